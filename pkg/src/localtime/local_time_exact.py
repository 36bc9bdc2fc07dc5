"""Exact time-domain local-time statistics.

Everything here is computed from matrix-vector propagation: sums over visit
times of products of n-step probabilities, and an augmented chain on
``(vertex, visit count)`` states for full distributions. Local time counts
steps ``1..n``; the starting vertex is never counted.

Fixed-endpoint quantities are unnormalized (they sum over paths ending at
``vb`` with their path weights); :func:`normalize_fixed` divides by the total
weight ``<va|P^n|vb>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGraph, UnreachableEndpoint
from .graph_model import (
    FREE,
    Endpoint,
    Fixed,
    TransitionMatrix,
    as_endpoint,
    column_propagation,
    n_step_probability,
    row_propagation,
)

__all__ = [
    "LocalTimeProfile",
    "DistributionTable",
    "endpoint_weight",
    "normalize_fixed",
    "mean_local_time",
    "mean_local_time_free",
    "mean_local_time_fixed",
    "correlation",
    "correlation_free",
    "correlation_fixed",
    "zero_visit_probability",
    "local_time_distribution_exact",
]


@dataclass(frozen=True)
class LocalTimeProfile:
    """Visit counts ``L(v)`` of one path over steps ``1..horizon``."""

    horizon: int
    counts: tuple

    def __post_init__(self):
        if sum(self.counts) != self.horizon or any(c < 0 for c in self.counts):
            raise ValueError("local-time counts must be nonnegative and sum to the horizon")

    @classmethod
    def from_path(cls, path, size: int) -> "LocalTimeProfile":
        counts = np.bincount(np.asarray(path[1:], dtype=int), minlength=size)
        return cls(len(path) - 1, tuple(int(c) for c in counts))

    def __getitem__(self, v):
        return self.counts[v]


@dataclass(frozen=True, eq=False)
class DistributionTable:
    """Mass of ``L(v) = l`` for ``l = 0..lmax``.

    When ``saturated`` is true (``lmax < n``) the last entry aggregates every
    count ``>= lmax``. ``weight`` is ``<1>`` for the ensemble: 1 for a free
    endpoint, ``<va|P^n|vb>`` for a fixed one.
    """

    vertex: int
    horizon: int
    endpoint: Endpoint
    mass: np.ndarray
    weight: float
    saturated: bool

    @property
    def lmax(self) -> int:
        return len(self.mass) - 1

    def normalized(self) -> np.ndarray:
        if self.weight <= 0:
            raise UnreachableEndpoint("endpoint has zero probability; cannot normalize")
        return self.mass / self.weight

    def moment(self, k: int) -> float:
        if self.saturated:
            raise ValueError("moments of a saturated table are not exact")
        ell = np.arange(len(self.mass), dtype=float)
        return float(np.dot(ell ** k, self.mass))


def _check(P, va, endpoint, n, *vertices):
    va = P.check_vertex(va, "va")
    endpoint = as_endpoint(endpoint)
    vb = None
    if isinstance(endpoint, Fixed):
        vb = P.check_vertex(endpoint.vb, "vb")
    for v in vertices:
        P.check_vertex(v)
    if n < 0:
        raise InvalidGraph("n must be nonnegative")
    return va, endpoint, vb


def endpoint_weight(P: TransitionMatrix, va: int, endpoint, n: int) -> float:
    """``<1>`` of the ensemble: 1 for a free endpoint, ``<va|P^n|vb>`` otherwise."""
    endpoint = as_endpoint(endpoint)
    if isinstance(endpoint, Fixed):
        return n_step_probability(P, va, endpoint.vb, n)
    return 1.0


def normalize_fixed(value: float, P: TransitionMatrix, va: int, vb: int, n: int) -> float:
    weight = n_step_probability(P, va, vb, n)
    if weight <= 0:
        raise UnreachableEndpoint(f"<{va}|P^{n}|{vb}> = 0; fixed-endpoint average undefined")
    return value / weight


def mean_local_time(P: TransitionMatrix, va: int, endpoint, v1: int, n: int) -> float:
    va, endpoint, vb = _check(P, va, endpoint, n, v1)
    if n == 0:
        return 0.0
    rows = row_propagation(P, va, n)[:, v1]
    cols = column_propagation(P, vb, n)[:, v1]
    m = np.arange(1, n + 1)
    return float(np.dot(rows[m], cols[n - m]))


def mean_local_time_free(P: TransitionMatrix, va: int, v1: int, n: int) -> float:
    """Mean number of visits to ``v1`` during steps ``1..n``."""
    return mean_local_time(P, va, FREE, v1, n)


def mean_local_time_fixed(P: TransitionMatrix, va: int, vb: int, v1: int, n: int) -> float:
    return mean_local_time(P, va, Fixed(vb), v1, n)


def correlation(P: TransitionMatrix, va: int, endpoint, v1: int, v2: int, n: int) -> float:
    """``<L(v1) L(v2)>`` split by visit order.

    Pairs of visit times ``m < m'`` contribute
    ``<va|P^m|v1><v1|P^(m'-m)|v2><v2|P^(n-m')|end>`` (and the same with the
    roles of ``v1``/``v2`` swapped); coinciding times only contribute when
    ``v1 == v2``.
    """
    va, endpoint, vb = _check(P, va, endpoint, n, v1, v2)
    if n == 0:
        return 0.0
    rows = row_propagation(P, va, n)
    cols = column_propagation(P, vb, n)

    def ordered(first, second):
        head = rows[:, first].copy()
        head[0] = 0.0
        tail = cols[:, second]
        between = row_propagation(P, first, n)[:, second]
        conv = np.convolve(head, tail)
        d = np.arange(1, n)
        return float(np.dot(between[d], conv[n - d]))

    total = ordered(v1, v2) + ordered(v2, v1)
    if v1 == v2:
        m = np.arange(1, n + 1)
        total += float(np.dot(rows[m, v1], cols[n - m, v1]))
    return total


def correlation_free(P: TransitionMatrix, va: int, v1: int, v2: int, n: int) -> float:
    return correlation(P, va, FREE, v1, v2, n)


def correlation_fixed(P: TransitionMatrix, va: int, vb: int, v1: int, v2: int, n: int) -> float:
    return correlation(P, va, Fixed(vb), v1, v2, n)


def zero_visit_probability(P: TransitionMatrix, va: int, endpoint, v: int, n: int) -> float:
    """Weight of paths that avoid ``v`` at steps ``1..n``: propagate through ``P`` with column ``v`` zeroed."""
    va, endpoint, vb = _check(P, va, endpoint, n, v)
    q = P.entries.copy()
    q[:, v] = 0.0
    x = np.zeros(P.size)
    x[va] = 1.0
    for _ in range(n):
        x = x @ q
    return float(x[vb]) if vb is not None else float(x.sum())


def local_time_distribution_exact(
    P: TransitionMatrix, va: int, endpoint, v: int, n: int, lmax: int | None = None
) -> DistributionTable:
    """Distribution of ``L(v)`` from the augmented chain on ``(vertex, count)``.

    Counts saturate at ``lmax`` (default ``n``), so the state space has
    ``size * (lmax + 1)`` entries.
    """
    va, endpoint, vb = _check(P, va, endpoint, n, v)
    if lmax is None:
        lmax = n
    if lmax < 0:
        raise InvalidGraph("lmax must be nonnegative")
    pt = np.asarray(P).T
    x = np.zeros((P.size, lmax + 1))
    x[va, 0] = 1.0
    for _ in range(n):
        y = pt @ x
        arrived = y[v].copy()
        y[v] = 0.0
        y[v, 1:] = arrived[:-1]
        y[v, -1] += arrived[-1]
        x = y
    mass = x[vb].copy() if vb is not None else x.sum(axis=0)
    weight = 1.0 if vb is None else n_step_probability(P, va, vb, n)
    return DistributionTable(v, n, endpoint, mass, weight, saturated=lmax < n)
