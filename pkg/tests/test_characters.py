import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ljoint.characters import (
    DirichletCharacter,
    character,
    character_by_index,
    conductor_of,
    enumerate_characters,
    equivalent,
    factorize,
    make_tuple,
    primitive_inducing,
    principal_character,
    totient,
    unit_generators,
    unit_group,
)
from ljoint.errors import DomainError, ValidationError

moduli = st.integers(min_value=1, max_value=40)


def _mobius(n):
    f = factorize(n)
    return 0 if any(e > 1 for _, e in f) else (-1) ** len(f)


def test_mod8_table_by_hand():
    # residues 1, 3, 5, 7
    expected = {(1, 1, 1, 1), (1, -1, 1, -1), (1, -1, -1, 1), (1, 1, -1, -1)}
    chars = enumerate_characters(8)
    got = {tuple(int(round(c.values[n].real)) for n in (1, 3, 5, 7)) for c in chars}
    assert got == expected
    conductors = sorted(c.conductor for c in chars)
    assert conductors == [1, 4, 8, 8]
    assert all(c.values[n] == 0 for c in chars for n in (0, 2, 4, 6))


def test_units_for_twice_odd_modulus():
    g = unit_group(10)
    assert list(g.units) == [1, 3, 7, 9]
    assert all(c.values[n] == 0 for c in enumerate_characters(10) for n in (0, 2, 4, 5, 6, 8))


@given(moduli)
def test_count_and_orthogonality(q):
    chars = enumerate_characters(q)
    assert len(chars) == totient(q)
    table = np.stack([c.values for c in chars])
    assert np.allclose(table @ table.conj().T, totient(q) * np.eye(len(chars)), atol=1e-9)
    # second orthogonality: sum over characters picks out n = 1
    col = table.sum(axis=0)
    expect = np.zeros(q)
    expect[1 % q] = totient(q)
    assert np.allclose(col, expect, atol=1e-9)


@given(moduli, st.data())
def test_multiplicative_and_periodic(q, data):
    chars = enumerate_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    m = data.draw(st.integers(0, 500))
    n = data.draw(st.integers(0, 500))
    assert abs(chi(m * n) - chi(m) * chi(n)) < 1e-12
    assert chi(n + q) == chi(n)
    if math.gcd(n, q) == 1:
        assert abs(abs(chi(n)) - 1) < 1e-12


@given(moduli)
def test_primitive_count_matches_mobius_formula(q):
    expected = sum(_mobius(q // d) * totient(d) for d in range(1, q + 1) if q % d == 0)
    assert sum(c.is_primitive for c in enumerate_characters(q)) == expected


@given(moduli, st.data())
def test_inducing_character_lifts_back(q, data):
    chars = enumerate_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    prim = primitive_inducing(chi)
    assert prim.is_primitive
    assert prim.modulus == conductor_of(chi)
    assert prim.lift(q) == chi
    assert equivalent(chi, prim)


@given(st.integers(1, 20), st.integers(2, 4), st.data())
def test_equivalence_across_lifts(q, k, data):
    chars = enumerate_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    other = chars[data.draw(st.integers(0, len(chars) - 1))]
    lifted = chi.lift(q * k)
    assert equivalent(chi, lifted)
    assert equivalent(lifted, other.lift(q * k)) == (chi == other)


def test_group_operations():
    chars = enumerate_characters(21)
    a, b = chars[5], chars[7]
    prod = a * b
    assert np.allclose(prod.values, a.values * b.values)
    assert (a * a.conjugate()).is_principal
    assert a**0 == principal_character(21)
    mixed = character(4, (1,)) * character(5, (2,))
    assert mixed.modulus == 20
    assert mixed(3) == pytest.approx(character(4, (1,))(3) * character(5, (2,))(3))


def test_record_round_trip_and_index():
    for i, chi in enumerate(enumerate_characters(24)):
        assert DirichletCharacter.from_record(chi.to_record()) == chi
        assert character_by_index(24, i) == chi
    with pytest.raises(ValidationError):
        DirichletCharacter.from_record({"modulus": 8, "label": [1, 1], "conductor": 4})


def test_generators_have_listed_orders():
    for q in (16, 40, 63, 72):
        g = unit_group(q)
        for gen, order in zip(g.generators, g.orders):
            assert pow(gen, order, q) == 1
            assert all(pow(gen, order // p, q) != 1 for p, _ in factorize(order))


def test_errors():
    with pytest.raises(DomainError):
        enumerate_characters(0)
    with pytest.raises(ValidationError):
        character(5, (4,))
    with pytest.raises(ValidationError, match="0 and 2"):
        make_tuple([character(5, (1,)), character(7, (1,)), character(10, (1,))])
    with pytest.raises(ValidationError):
        make_tuple([character(5, (1,))], thetas=[0.0, 1.0])
    with pytest.raises(DomainError):
        character(5, (1,)).lift(12)


def test_tuple_lifted_values():
    tup = make_tuple([character(3, (1,)), character(4, (1,))], (0.0, 1.0))
    assert tup.d == 12
    assert list(tup.units()) == [1, 5, 7, 11]
    assert tup.lifted_values().shape == (2, 4)
    # the value image carries the same averages as the unit table
    tv = tup.twisted_values()
    lv = tup.lifted_values() * np.exp(-1j * np.array([0.0, 1.0]))[:, None]
    for p in (0.7, 1.5, 3.0):
        assert np.mean(np.abs(tv.sum(axis=0)) ** p) == pytest.approx(np.mean(np.abs(lv.sum(axis=0)) ** p))


@given(st.lists(st.integers(1, 60), min_size=1, max_size=4), st.data())
def test_value_image_matches_unit_average(moduli, data):
    chars = []
    for q in moduli:
        cs = enumerate_characters(q)
        chars.append(cs[data.draw(st.integers(0, len(cs) - 1))])
    tup = make_tuple(chars, require_inequivalent=False)
    img = tup.image()
    assert totient(tup.d) % img.size == 0
    assert len({tuple(a) for a in img.angles(0, img.size)}) == img.size
    if totient(tup.d) <= 50000:
        x = np.linspace(1.0, 2.0, tup.r)
        by_units = np.mean(np.abs(x @ tup.lifted_values()) ** 1.3)
        by_image = np.mean(np.abs(x @ img.values(0, img.size)) ** 1.3)
        assert by_image == pytest.approx(by_units, rel=1e-12)


def test_unit_generators_generate():
    for q in (1, 2, 4, 8, 9, 50, 72, 97 * 4, 2 * 3**4 * 7):
        gens = unit_generators(q)
        seen = {1 % q}
        frontier = [1 % q]
        while frontier:
            n = frontier.pop()
            for g in gens:
                m = n * g % q
                if m not in seen:
                    seen.add(m)
                    frontier.append(m)
        assert len(seen) == totient(q)
