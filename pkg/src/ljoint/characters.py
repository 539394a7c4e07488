"""Dirichlet characters as dense value tables.

A character mod q is stored through its integer angle table: ``angles[n]``
is the integer ``a`` with ``chi(n) = exp(2 pi i a / E)`` where ``E`` is the
exponent of ``(Z/qZ)^x``, and ``-1`` marks residues not coprime to ``q``.
Complex values are derived once from these exact angles, so equality,
principality and products can be decided in integer arithmetic.

Characters are labelled by their exponent vector on the canonical generators
of ``(Z/qZ)^x``: one generator per odd prime power (its smallest primitive
root), ``-1`` for ``4 || q``, and the pair ``(-1, 5)`` when ``8 | q``.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetError, DomainError, ValidationError

TABLE_TOL = 1e-12


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of ``n`` as ``[(p, e), ...]`` with ``p`` ascending."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def totient(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def _smallest_primitive_root(m: int, order: int) -> int:
    """Smallest generator of the cyclic group ``(Z/mZ)^x`` of the given order."""
    if order == 1:
        return 1 % m if m > 1 else 0
    qs = [p for p, _ in factorize(order)]
    for g in range(2, m):
        if math.gcd(g, m) != 1:
            continue
        if all(pow(g, order // ell, m) != 1 for ell in qs):
            return g
    raise AssertionError(f"no primitive root mod {m}")


@dataclass(frozen=True)
class _Component:
    prime_power: int
    order: int
    generator: int
    logs: np.ndarray  # discrete log of each residue mod prime_power, -1 off units


@dataclass(frozen=True)
class UnitGroup:
    """CRT decomposition of ``(Z/qZ)^x`` into cyclic components."""

    modulus: int
    components: tuple
    exponent: int
    units: np.ndarray
    log_vectors: np.ndarray  # shape (q, n_components)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    @property
    def generators(self) -> tuple[int, ...]:
        """Generators lifted to residues mod q (1 on all other CRT components)."""
        q = self.modulus
        gens = []
        for c in self.components:
            m = c.prime_power
            rest = q // m
            # n = g mod m, n = 1 mod rest
            if rest == 1:
                n = c.generator % q
            else:
                inv = pow(rest, -1, m)
                n = (1 + rest * ((c.generator - 1) * inv % m)) % q
            gens.append(n)
        return tuple(gens)


def _cyclic_logs(m: int, g: int, order: int) -> np.ndarray:
    logs = np.full(m, -1, dtype=np.int64)
    x = 1 % m
    for k in range(order):
        logs[x] = k
        x = x * g % m
    return logs


@functools.lru_cache(maxsize=256)
def unit_group(q: int) -> UnitGroup:
    if q < 1:
        raise DomainError(f"modulus must be a positive integer, got {q}")
    comps = []
    for p, e in factorize(q):
        m = p**e
        if p == 2:
            if e == 1:
                continue
            if e == 2:
                comps.append(_Component(4, 2, 3, _cyclic_logs(4, 3, 2)))
                continue
            half = 2 ** (e - 2)
            log_neg = np.full(m, -1, dtype=np.int64)
            log_five = np.full(m, -1, dtype=np.int64)
            x = 1
            for b in range(half):
                log_neg[x], log_five[x] = 0, b
                log_neg[m - x], log_five[m - x] = 1, b
                x = x * 5 % m
            comps.append(_Component(m, 2, m - 1, log_neg))
            comps.append(_Component(m, half, 5, log_five))
        else:
            order = m - m // p
            g = _smallest_primitive_root(m, order)
            comps.append(_Component(m, order, g, _cyclic_logs(m, g, order)))
    residues = np.arange(q, dtype=np.int64)
    if comps:
        log_vectors = np.stack([c.logs[residues % c.prime_power] for c in comps], axis=1)
    else:
        log_vectors = np.zeros((q, 0), dtype=np.int64)
    coprime = np.gcd(residues, q) == 1
    log_vectors[~coprime] = -1
    exponent = math.lcm(*[c.order for c in comps]) if comps else 1
    return UnitGroup(q, tuple(comps), exponent, residues[coprime], log_vectors)


def _values_from_angles(angles: np.ndarray, exponent: int) -> np.ndarray:
    values = np.zeros(angles.shape, dtype=np.complex128)
    on = angles >= 0
    a = angles[on]
    v = np.exp(2j * np.pi * (a / exponent))
    # snap quarter turns so real characters are exactly +-1
    quarter = (4 * a) % exponent == 0
    if np.any(quarter):
        v[quarter] = np.array([1, 1j, -1, -1j])[(4 * a[quarter] // exponent) % 4]
    values[on] = v
    return values


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus`` with its full value table."""

    modulus: int
    label: tuple
    angles: np.ndarray = field(repr=False)
    exponent: int = field(repr=False)
    values: np.ndarray = field(repr=False)
    conductor: int = 0

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_principal(self) -> bool:
        return bool(np.all(self.angles[self.angles >= 0] == 0))

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.modulus == other.modulus and self.label == other.label

    def __hash__(self) -> int:
        return hash((self.modulus, self.label))

    def lift(self, d: int) -> "DirichletCharacter":
        """The character mod ``d`` induced by this one (``modulus`` must divide ``d``)."""
        if d % self.modulus:
            raise DomainError(f"{self.modulus} does not divide {d}")
        if d == self.modulus:
            return self
        q, src = self.modulus, self.angles
        return _from_unit_angles(d, lambda n: int(src[n % q]), self.exponent)

    def conjugate(self) -> "DirichletCharacter":
        g = unit_group(self.modulus)
        label = tuple((-k) % n for k, n in zip(self.label, g.orders))
        return character(self.modulus, label)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        d = math.lcm(self.modulus, other.modulus)
        a, b = self.lift(d), other.lift(d)
        g = unit_group(d)
        label = tuple((x + y) % n for x, y, n in zip(a.label, b.label, g.orders))
        return character(d, label)

    def __pow__(self, k: int) -> "DirichletCharacter":
        g = unit_group(self.modulus)
        label = tuple((x * k) % n for x, n in zip(self.label, g.orders))
        return character(self.modulus, label)

    def to_record(self) -> dict:
        return {"modulus": self.modulus, "conductor": self.conductor, "label": list(self.label)}

    @classmethod
    def from_record(cls, record: dict) -> "DirichletCharacter":
        chi = character(int(record["modulus"]), tuple(int(k) for k in record["label"]))
        if "conductor" in record and int(record["conductor"]) != chi.conductor:
            raise ValidationError("record conductor does not match the reconstructed character")
        return chi


def _compute_conductor(q: int, angles: np.ndarray) -> int:
    units = unit_group(q).units
    for f in sorted(f for f in range(1, q + 1) if q % f == 0):
        trivial_on = units[units % f == 1 % f]
        if np.all(angles[trivial_on] == 0):
            return f
    return q


@functools.lru_cache(maxsize=4096)
def character(q: int, label: tuple) -> DirichletCharacter:
    """The character mod ``q`` with exponent vector ``label``."""
    g = unit_group(q)
    label = tuple(int(k) for k in label)
    if len(label) != len(g.components):
        raise ValidationError(f"label for modulus {q} needs {len(g.components)} entries, got {len(label)}")
    if any(not 0 <= k < n for k, n in zip(label, g.orders)):
        raise ValidationError(f"label {label} out of range for orders {g.orders}")
    E = g.exponent
    weights = np.array([k * (E // n) for k, n in zip(label, g.orders)], dtype=np.int64)
    angles = np.full(q, -1, dtype=np.int64)
    lv = g.log_vectors[g.units]
    angles[g.units] = (lv @ weights) % E if len(weights) else 0
    angles.setflags(write=False)
    values = _values_from_angles(angles, E)
    values.setflags(write=False)
    cond = _compute_conductor(q, angles)
    return DirichletCharacter(q, label, angles, E, values, cond)


def _from_unit_angles(q: int, angle_of, source_exponent: int) -> DirichletCharacter:
    """Build the character mod ``q`` whose value at unit ``n`` is
    ``exp(2 pi i angle_of(n) / source_exponent)``."""
    g = unit_group(q)
    label = []
    for gen, n_i in zip(g.generators, g.orders):
        a = angle_of(gen)
        if a < 0:
            raise ValidationError(f"angle function undefined at unit {gen} mod {q}")
        num = a * n_i
        if num % source_exponent:
            raise ValidationError("angle function is not a character of the target modulus")
        label.append((num // source_exponent) % n_i)
    return character(q, tuple(label))


def enumerate_characters(q: int) -> list[DirichletCharacter]:
    """All ``phi(q)`` characters mod ``q``, principal first, lexicographic by label."""
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise DomainError(f"modulus must be a positive integer, got {q!r}")
    g = unit_group(int(q))
    return [character(int(q), lab) for lab in itertools.product(*(range(n) for n in g.orders))]


def character_by_index(q: int, index: int) -> DirichletCharacter:
    g = unit_group(q)
    n_chars = math.prod(g.orders)
    if not 0 <= index < n_chars:
        raise ValidationError(f"index {index} out of range for {n_chars} characters mod {q}")
    label = []
    for n in reversed(g.orders):
        index, k = divmod(index, n)
        label.append(k)
    return character(q, tuple(reversed(label)))


def principal_character(q: int) -> DirichletCharacter:
    return character(q, (0,) * len(unit_group(q).components))


def conductor_of(chi: DirichletCharacter) -> int:
    return chi.conductor


def primitive_inducing(chi: DirichletCharacter) -> DirichletCharacter:
    """The primitive character mod ``conductor_of(chi)`` inducing ``chi``."""
    f, q = chi.conductor, chi.modulus
    if f == q:
        return chi
    angles = chi.angles

    def angle_of(m: int) -> int:
        n = m
        while math.gcd(n, q) != 1:
            n += f
        return int(angles[n % q])

    return _from_unit_angles(f, angle_of, chi.exponent)


def equivalent(chi1: DirichletCharacter, chi2: DirichletCharacter) -> bool:
    """True when both characters are induced by the same primitive character."""
    p1, p2 = primitive_inducing(chi1), primitive_inducing(chi2)
    if p1.modulus != p2.modulus:
        return False
    return bool(np.max(np.abs(p1.values - p2.values), initial=0.0) <= TABLE_TOL)


def unit_generators(q: int) -> tuple[int, ...]:
    """A generating set of ``(Z/qZ)^x`` found without residue tables."""
    if q < 1:
        raise DomainError(f"modulus must be a positive integer, got {q}")
    local = []
    for p, e in factorize(q):
        m = p**e
        if p == 2:
            local += [(m, g) for g in ((3,) if e == 2 else (m - 1, 5) if e >= 3 else ())]
            continue
        g = _smallest_primitive_root(p, p - 1)
        if e > 1 and pow(g, p - 1, p * p) == 1:
            g += p
        local.append((m, g))
    gens = []
    for m, g in local:
        rest = q // m
        inv = pow(rest, -1, m) if m > 1 else 0
        gens.append((1 + rest * ((g - 1) * inv % m)) % q if rest > 1 else g % q)
    return tuple(gens)


def _echelon_det(rows: list[list[int]], mods: list[int]) -> int:
    """Index in Z^r of the lattice spanned by ``rows`` and the ``mods[j] e_j``."""
    r = len(mods)
    rows = [[x % m for x, m in zip(row, mods)] for row in rows]
    det = 1
    for col in range(r):
        # the mods[col] e_col row joins only now, so reducing later columns
        # mod mods[k] (k > col) stays inside the lattice
        rows.append([mods[col] if k == col else 0 for k in range(r)])
        pivot, rest = None, []
        for row in rows:
            if row[col] == 0:
                rest.append(row)
            elif pivot is None:
                pivot = row
            else:
                a, b = pivot[col], row[col]
                g = math.gcd(a, b)
                x, y = _bezout(a, b)
                pivot, other = (
                    [x * u + y * v for u, v in zip(pivot, row)],
                    [(b // g) * u - (a // g) * v for u, v in zip(pivot, row)],
                )
                rest.append(other)
        det *= abs(pivot[col])
        rows = [row[:col + 1] + [c % m for c, m in zip(row[col + 1:], mods[col + 1:])] for row in rest]
    return det


def _bezout(a: int, b: int) -> tuple[int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        k, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    return x0, y0


@dataclass(frozen=True)
class ValueImage:
    """The subgroup of value vectors ``(chi_1(u), ..., chi_r(u))``, u a unit mod d.

    u -> (chi_j(u))_j is a homomorphism, so every image point has the same
    number of preimages and averages over units equal averages over the image.
    Elements are ``sum_i k_i gens[i]`` (angles mod ``exponents``) with
    ``0 <= k_i < radices[i]``, each exactly once.
    """

    exponents: tuple
    gens: np.ndarray  # (m, r) integer angles
    radices: tuple
    size: int

    def angles(self, lo: int, hi: int) -> np.ndarray:
        """Angle vectors of elements lo..hi-1 in the mixed-radix order, shape (n, r)."""
        idx = np.arange(lo, hi, dtype=np.int64)
        out = np.zeros((hi - lo, len(self.exponents)), dtype=np.int64)
        for g, m in zip(self.gens, self.radices):
            idx, k = np.divmod(idx, m)
            out += k[:, None] * g[None, :]
        return out % np.asarray(self.exponents, dtype=np.int64)

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Character values for elements lo..hi-1 as an (r, n) complex array."""
        a = self.angles(lo, hi)
        return np.stack([_values_from_angles(a[:, j], E) for j, E in enumerate(self.exponents)])

    def is_trivial_combination(self, coeffs: Sequence[int]) -> bool:
        """True when prod_j chi_j^coeffs[j] is principal mod d."""
        L = math.lcm(*self.exponents)
        scale = np.array([L // E for E in self.exponents], dtype=np.int64)
        c = np.asarray(coeffs, dtype=np.int64) * scale
        return bool(np.all((self.gens @ c) % L == 0))


def value_image(chars: Sequence[DirichletCharacter]) -> ValueImage:
    d = math.lcm(*(c.modulus for c in chars))
    exps = [c.exponent for c in chars]
    total = math.prod(exps)
    gens, radices, kept = [], [], []
    prev = 1
    for n in unit_generators(d):
        g = [int(c.angles[n % c.modulus]) for c in chars]
        size = total // _echelon_det(kept + [g], exps)
        if size > prev:
            kept.append(g)
            gens.append(g)
            radices.append(size // prev)
            prev = size
    arr = np.array(gens, dtype=np.int64).reshape(len(gens), len(chars))
    return ValueImage(tuple(exps), arr, tuple(radices), prev)


IMAGE_CHUNK = 1 << 18


@dataclass(frozen=True)
class CharacterTuple:
    """``r`` characters with twist angles and the lcm ``d`` of their moduli."""

    characters: tuple
    thetas: tuple
    d: int

    @property
    def r(self) -> int:
        return len(self.characters)

    def lifted_values(self) -> np.ndarray:
        """Complex matrix ``(r, phi(d))``: ``chi_j(u)`` for units ``u`` mod ``d``."""
        return self._unit_table()[1]

    def units(self) -> np.ndarray:
        return self._unit_table()[0]

    def image(self) -> ValueImage:
        cached = self.__dict__.get("_image")
        if cached is None:
            cached = value_image(self.characters)
            object.__setattr__(self, "_image", cached)
        return cached

    def twisted_chunks(self, chunk: int = IMAGE_CHUNK):
        """Yield ``exp(-i theta_j) chi_j`` over the value image in (r, n) blocks.

        Means over these columns equal means over the units mod d.
        """
        img = self.image()
        rot = np.exp(-1j * np.asarray(self.thetas, dtype=float))[:, None]
        if img.size <= chunk:
            cached = self.__dict__.get("_twisted")
            if cached is None:
                cached = rot * img.values(0, img.size)
                cached.setflags(write=False)
                object.__setattr__(self, "_twisted", cached)
            yield cached
            return
        for lo in range(0, img.size, chunk):
            yield rot * img.values(lo, min(lo + chunk, img.size))

    def twisted_values(self) -> np.ndarray:
        """``exp(-i theta_j) chi_j`` on the whole value image (small tuples only)."""
        img = self.image()
        if img.size > IMAGE_CHUNK:
            raise BudgetError(f"value image of size {img.size} too large to materialize; use twisted_chunks")
        return next(self.twisted_chunks())

    def _unit_table(self):
        cached = self.__dict__.get("_cache")
        if cached is None:
            units = unit_group(self.d).units
            vals = np.stack([c.values[units % c.modulus] for c in self.characters])
            cached = (units, vals)
            object.__setattr__(self, "_cache", cached)
        return cached


def make_tuple(
    chars: Sequence[DirichletCharacter],
    thetas: Sequence[float] | None = None,
    require_inequivalent: bool = True,
) -> CharacterTuple:
    chars = tuple(chars)
    if thetas is None:
        thetas = (0.0,) * len(chars)
    thetas = tuple(float(t) for t in thetas)
    if len(chars) == 0:
        raise ValidationError("a character tuple needs at least one character")
    if len(chars) != len(thetas):
        raise ValidationError(f"{len(chars)} characters but {len(thetas)} angles")
    if not all(math.isfinite(t) for t in thetas):
        raise ValidationError("twist angles must be finite")
    if require_inequivalent:
        prims = [primitive_inducing(c) for c in chars]
        for i, j in itertools.combinations(range(len(chars)), 2):
            if prims[i] == prims[j]:
                raise ValidationError(f"characters {i} and {j} are equivalent")
    d = math.lcm(*(c.modulus for c in chars))
    return CharacterTuple(chars, thetas, d)
