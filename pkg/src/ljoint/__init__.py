"""Joint large values of twisted Dirichlet L-functions: arithmetic factors,
tail predictions, a random Euler-product model and grid scans."""

__version__ = "0.1.0"

from .characters import (  # noqa: E402
    CharacterTuple,
    DirichletCharacter,
    character,
    enumerate_characters,
    make_tuple,
)
from .errors import BudgetError, DomainError, LjointError, SearchFailure, StateError, ValidationError  # noqa: E402

__all__ = [
    "__version__",
    "CharacterTuple",
    "DirichletCharacter",
    "character",
    "enumerate_characters",
    "make_tuple",
    "LjointError",
    "DomainError",
    "ValidationError",
    "BudgetError",
    "SearchFailure",
    "StateError",
]
