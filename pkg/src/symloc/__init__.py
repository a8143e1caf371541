"""Seed states, local stabilizers and LOCC decision procedures for symmetric multipartite states."""

from __future__ import annotations

from .locc import (
    GridConfig,
    LoccScene,
    convertible_locc1,
    max_conversion_probability,
    monotone,
    reachable,
    weakly_isolated,
)
from .protocol_sim import LoccProtocol, simulate
from .stabilizer import StabilizerFamily, SymmetryElement
from .tensor_core import GramFactor, ProductOp, PureState

__version__ = "0.1.0"

__all__ = [
    "GramFactor",
    "GridConfig",
    "LoccProtocol",
    "LoccScene",
    "ProductOp",
    "PureState",
    "StabilizerFamily",
    "SymmetryElement",
    "convertible_locc1",
    "max_conversion_probability",
    "monotone",
    "reachable",
    "simulate",
    "weakly_isolated",
]
