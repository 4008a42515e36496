"""Gauss-Hermite and Gauss-Legendre node/weight rules.

Rules come from SciPy's `roots_hermite` / `roots_legendre` (Golub-Welsch with
Newton polishing, asymptotic expansions for large orders) and are cached per
(kind, order). Hermite rules integrate against exp(-x^2) over the real line;
Legendre rules integrate over [-1, 1].
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import special

logger = logging.getLogger(__name__)

MAX_ORDER = 2000
DEFAULT_HERMITE_ORDER = 300
DEFAULT_LEGENDRE_ORDER = 110


class RuleKind(StrEnum):
    HERMITE = "hermite"
    LEGENDRE = "legendre"


@dataclass(frozen=True)
class QuadratureRule:
    """Ordered nodes and matching weights of an N-point Gaussian rule.

    Extreme Hermite weights of very high orders underflow to zero in double
    precision; every representable weight is positive.
    """

    kind: RuleKind
    order: int
    nodes: NDArray[np.float64] = field(repr=False)
    weights: NDArray[np.float64] = field(repr=False)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(zip(self.nodes.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return self.order


def _check_order(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"Quadrature order must be an integer, got {n!r}")
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"Quadrature order must be in [1, {MAX_ORDER}], got {n}")


def _frozen(values: NDArray[np.float64]) -> NDArray[np.float64]:
    values = np.ascontiguousarray(values, dtype=np.float64)
    values.setflags(write=False)
    return values


@lru_cache(maxsize=64)
def _build(kind: RuleKind, n: int) -> QuadratureRule:
    if kind is RuleKind.HERMITE:
        nodes, weights = special.roots_hermite(n)
    else:
        nodes, weights = special.roots_legendre(n)
    order = np.argsort(nodes, kind="stable")
    nodes = nodes[order]
    weights = weights[order]
    # Roots come out symmetric up to rounding; enforce it exactly.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    logger.debug("Built %s rule of order %d", kind, n)
    return QuadratureRule(kind=kind, order=n, nodes=_frozen(nodes), weights=_frozen(weights))


def gauss_hermite(n: int = DEFAULT_HERMITE_ORDER) -> QuadratureRule:
    """N-point Gauss-Hermite rule for the weight exp(-x^2)."""
    _check_order(n)
    return _build(RuleKind.HERMITE, int(n))


def gauss_legendre(n: int = DEFAULT_LEGENDRE_ORDER) -> QuadratureRule:
    """N-point Gauss-Legendre rule on [-1, 1]."""
    _check_order(n)
    return _build(RuleKind.LEGENDRE, int(n))


def rule(kind: RuleKind | str, n: int) -> QuadratureRule:
    kind = RuleKind(kind)
    return gauss_hermite(n) if kind is RuleKind.HERMITE else gauss_legendre(n)
