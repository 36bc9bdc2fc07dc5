"""Large-time behaviour: invariant distribution, the Perron projection limit
of ``(1 - z) R(z)``, and final-value extrapolation ``z -> 1+``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExtrapolationDiverged, InputValidationError, NotStronglyConnected
from .graph_model import FREE, TransitionMatrix, strongly_connected
from .resolvent_zdomain import Resolvent, correlation_z, mean_z
from .zseries import ZSeries

__all__ = [
    "StationaryDistribution",
    "invariant_distribution",
    "perron_limit_residual",
    "final_value",
    "EPSILON_LADDER",
    "limiting_local_time_fraction",
    "limiting_pair_fraction",
    "limiting_fraction_by_extrapolation",
    "limiting_pair_by_extrapolation",
]

EPSILON_LADDER = tuple(2.0 ** -k for k in range(4, 21, 2))
FINAL_VALUE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: np.ndarray

    def __getitem__(self, v):
        return float(self.pi[v])

    def __len__(self):
        return len(self.pi)


def _require_strong(P):
    if not strongly_connected(P):
        raise NotStronglyConnected("transition graph is not strongly connected")


def invariant_distribution(P: TransitionMatrix) -> StationaryDistribution:
    """Left eigenvector of ``P`` at eigenvalue 1, summing to one.

    Solves ``(P^T - I) pi = 0`` stacked with the normalization row in the
    least-squares sense; this works for periodic chains where power iteration
    does not converge.
    """
    _require_strong(P)
    n = P.size
    a = np.vstack([np.asarray(P).T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi = pi / math.fsum(pi)
    pi.setflags(write=False)
    return StationaryDistribution(pi)


def perron_limit_residual(P: TransitionMatrix, eps: float) -> float:
    """Max-norm distance between ``(1 - z) R(z)`` at ``z = 1 + eps`` and ``|1><pi|``."""
    if not 0.0 < eps <= 0.5:
        raise InputValidationError("eps must lie in (0, 0.5]")
    pi = invariant_distribution(P).pi
    z = 1.0 + eps
    scaled = (1.0 - z) * Resolvent(P, z).matrix()
    return float(np.max(np.abs(scaled - np.outer(np.ones(P.size), pi))))


def final_value(F, k: int, ladder=EPSILON_LADDER, tol: float = FINAL_VALUE_TOL) -> float:
    """``lim_{n->inf} f_n / n^k`` from the z-transform ``F``.

    Evaluates ``g(eps) = eps^(k+1) / k! * F(1 + eps)`` along ``ladder`` and
    Richardson-extrapolates to ``eps = 0`` assuming an error expansion in
    integer powers of ``eps``.

    Parameters
    ----------
    F : callable
        ``F(z)`` for real ``z > 1``. The limit must exist; periodic or
        otherwise non-convergent sequences surface as
        :class:`ExtrapolationDiverged`.
    k : int
        Growth exponent.
    ladder : sequence of float
        Decreasing ``eps`` values with a constant ratio.
    tol : float
        Required agreement of the last two extrapolated estimates.
    """
    if isinstance(F, ZSeries):
        # a truncated series is a polynomial in 1/z; its z -> 1 limit says nothing about f_n
        raise InputValidationError("final_value needs F as a callable of z, not a truncated series")
    if k < 0:
        raise InputValidationError("k must be nonnegative")
    eps = np.asarray(ladder, dtype=float)
    if len(eps) < 3:
        raise InputValidationError("ladder needs at least three points")
    ratio = eps[0] / eps[1]
    g = [e ** (k + 1) / math.factorial(k) * float(F(1.0 + e)) for e in eps]
    # Neville-style table; column j removes the eps^j error term
    table = [g]
    for j in range(1, len(eps)):
        prev = table[-1]
        f = ratio ** j
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1.0) for i in range(len(prev) - 1)])
    diag = [col[-1] for col in table]
    best, runner_up = diag[-1], diag[-2]
    if not (math.isfinite(best) and abs(best - runner_up) <= tol * max(1.0, abs(best))):
        raise ExtrapolationDiverged(f"estimates {runner_up!r} and {best!r} differ by more than {tol:g}")
    return float(best)


def limiting_local_time_fraction(P: TransitionMatrix, v1: int) -> float:
    """``lim <L(v1)>*/n``, which equals the invariant probability of ``v1``."""
    v1 = P.check_vertex(v1, "v1")
    return invariant_distribution(P)[v1]


def limiting_pair_fraction(P: TransitionMatrix, v1: int, v2: int) -> float:
    pi = invariant_distribution(P)
    return pi[P.check_vertex(v1, "v1")] * pi[P.check_vertex(v2, "v2")]


def limiting_fraction_by_extrapolation(P: TransitionMatrix, va: int, v1: int) -> float:
    """Final-value estimate of ``lim <L(v1)>*/n`` from the free-endpoint mean transform."""
    _require_strong(P)
    return final_value(lambda z: mean_z(P, va, FREE, v1, z=z), 1)


def limiting_pair_by_extrapolation(P: TransitionMatrix, va: int, v1: int, v2: int) -> float:
    _require_strong(P)
    return final_value(lambda z: correlation_z(P, va, FREE, v1, v2, z=z), 2)
