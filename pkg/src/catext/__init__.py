"""Finite computations with colored operads, their algebras and extensions."""

from .collections import (CatextError, ColorSet, ContractError, DomainError, Profile,
                          SymmetricCollection, TruncationError, TruncationWindow)
from .operads import Operad, OperadMap, check_map_laws, check_operad_laws

__version__ = "0.1.0"
