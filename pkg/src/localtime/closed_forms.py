"""Analytic results for three graph families: the complete graph, the star
graph and the infinite discrete line (handled through a finite window)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputValidationError, SingularSystem
from .graph_model import TransitionMatrix, transition_from_adjacency
from .zseries import ZSeries

__all__ = [
    "complete_graph",
    "star_graph",
    "LineWindow",
    "complete_resolvent",
    "complete_mean_local_time",
    "star_resolvent",
    "star_resolvent_element",
    "line_resolvent",
    "line_zero_visit",
    "central_binomial_ratio",
    "line_distribution_z",
    "line_distribution_series",
]

_EXACT_BINOMIAL_MAX = 30


def _need_z(z):
    if not z > 1.0:
        raise SingularSystem(f"closed-form resolvents require z > 1, got {z}")


def complete_graph(N: int) -> TransitionMatrix:
    """Unbiased walk on ``K_N``: adjacency ``J - I``."""
    if N < 2:
        raise InputValidationError("complete graph needs N >= 2")
    return transition_from_adjacency(np.ones((N, N)) - np.eye(N))


def star_graph(N: int) -> TransitionMatrix:
    """Centre 0 joined to peripheral vertices ``1..N``."""
    if N < 1:
        raise InputValidationError("star graph needs N >= 1")
    a = np.zeros((N + 1, N + 1))
    a[0, 1:] = 1.0
    a[1:, 0] = 1.0
    return transition_from_adjacency(a)


@dataclass(frozen=True)
class LineWindow:
    """The discrete line restricted to ``[-radius, radius]``.

    Interior sites step left or right with probability 1/2; the two end
    sites reflect inward. A walk of ``n`` steps from ``x`` never feels the
    boundary when ``radius >= n + |x|``, so time-domain results on the window
    are exact for the infinite line.
    """

    radius: int

    def __post_init__(self):
        if self.radius < 1:
            raise InputValidationError("window radius must be at least 1")

    @classmethod
    def for_horizon(cls, n: int, start: int = 0) -> "LineWindow":
        return cls(max(n + abs(start), 1))

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    def index(self, x: int) -> int:
        if abs(x) > self.radius:
            raise InputValidationError(f"site {x} outside window of radius {self.radius}")
        return x + self.radius

    def site(self, i: int) -> int:
        return i - self.radius

    def exact_for(self, n: int, start: int = 0) -> bool:
        return self.radius >= n + abs(start)

    def matrix(self) -> TransitionMatrix:
        m = self.size
        a = np.zeros((m, m))
        i = np.arange(m - 1)
        a[i, i + 1] = 1.0
        a[i + 1, i] = 1.0
        return transition_from_adjacency(a)


def complete_resolvent(N: int, z: float, va: int, vb: int) -> float:
    """``<va|R|vb> = -((N-1) d + 1/(z-1)) / (1 + z(N-1))`` on ``K_N``."""
    _need_z(z)
    if N < 2:
        raise InputValidationError("complete graph needs N >= 2")
    diag = (N - 1) if va == vb else 0.0
    return -(diag + 1.0 / (z - 1.0)) / (1.0 + z * (N - 1))


def complete_mean_local_time(N: int, n: int, at_start: bool = False) -> float:
    """Mean visits to a vertex of ``K_N`` over ``n`` steps.

    ``(1/N) (n + 1/N - (-1)^n / (N (N-1)^n))`` for a vertex other than the
    start; the starting vertex lags one step behind.
    """
    if N < 2:
        raise InputValidationError("complete graph needs N >= 2")
    if n < 0:
        raise InputValidationError("n must be nonnegative")
    if at_start:
        if n == 0:
            return 0.0
        n -= 1
    return (n + 1.0 / N - (-1.0) ** n / (N * (N - 1.0) ** n)) / N


def star_resolvent(N: int, z: float) -> np.ndarray:
    """``R = -I/z + P/(1 - z^2) + P^2/(z(1 - z^2))``, using ``P^3 = P``."""
    _need_z(z)
    p = np.asarray(star_graph(N))
    eye = np.eye(N + 1)
    return -eye / z + p / (1.0 - z * z) + (p @ p) / (z * (1.0 - z * z))


def star_resolvent_element(N: int, z: float, a_is_center: bool, b_is_center: bool, same: bool = False) -> float:
    """One resolvent entry by vertex class; ``same`` marks the two peripheral
    arguments as the same vertex."""
    _need_z(z)
    if a_is_center and b_is_center:
        p, p2, d = 0.0, 1.0, 1.0
    elif a_is_center or b_is_center:
        p = 1.0 / N if a_is_center else 1.0
        p2, d = 0.0, 0.0
    else:
        p, p2, d = 0.0, 1.0 / N, 1.0 if same else 0.0
    return -d / z + p / (1.0 - z * z) + p2 / (z * (1.0 - z * z))


def line_resolvent(z: float, delta: int) -> float:
    """``<va|R|va+delta> = -(z - sqrt(z^2-1))^|delta| / sqrt(z^2-1)`` on the infinite line."""
    _need_z(z)
    s = math.sqrt(z * z - 1.0)
    return -((z - s) ** abs(delta)) / s


def central_binomial_ratio(m: int) -> float:
    """``C(2m, m) / 4^m``; exact integer arithmetic up to m = 30, log-gamma beyond."""
    if m < 0:
        raise InputValidationError("m must be nonnegative")
    if m <= _EXACT_BINOMIAL_MAX:
        return math.comb(2 * m, m) / 4 ** m
    return math.exp(math.lgamma(2 * m + 1) - 2 * math.lgamma(m + 1) - 2 * m * math.log(2.0))


def line_zero_visit(n: int) -> float:
    """Probability that a simple walk on the line does not return to its start within ``n`` steps."""
    if n < 0:
        raise InputValidationError("n must be nonnegative")
    return central_binomial_ratio(n // 2)


def line_distribution_z(ell: int, z: float) -> float:
    """``sqrt(z+1)/sqrt(z-1) * (1 - sqrt(z^2-1)/z)^ell``: z-transform of ``P(L(va) = ell)``."""
    _need_z(z)
    if ell < 0:
        raise InputValidationError("ell must be nonnegative")
    return math.sqrt(z + 1.0) / math.sqrt(z - 1.0) * (1.0 - math.sqrt(z * z - 1.0) / z) ** ell


def _binomial_series_in_w2(exponent: float, order: int) -> ZSeries:
    """``(1 - w^2)^exponent`` up to ``w^order``."""
    c = np.zeros(order + 1)
    coef = 1.0
    for k in range(order // 2 + 1):
        c[2 * k] = coef
        # next generalized binomial term of (1 - x)^exponent
        coef *= -(exponent - k) / (k + 1)
    return ZSeries(c, 0, order)


def line_distribution_series(ell: int, order: int) -> ZSeries:
    """Power series in ``w = 1/z`` of :func:`line_distribution_z`.

    With ``sqrt(z^2-1)/z = sqrt(1-w^2)`` the transform is
    ``(1 + w) (1 - w^2)^(-1/2) (1 - sqrt(1 - w^2))^ell``.
    """
    if ell < 0:
        raise InputValidationError("ell must be nonnegative")
    root = _binomial_series_in_w2(0.5, order)
    inv_root = _binomial_series_in_w2(-0.5, order)
    head = ZSeries([1.0, 1.0], 0, order) * inv_root
    return head * (ZSeries.constant(1.0, order) - root) ** ell
