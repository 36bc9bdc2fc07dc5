"""Seeded sample-path simulation of the walk.

Trials are grouped into fixed blocks of :data:`BLOCK_SIZE`; block ``j`` draws
from its own Philox stream keyed by ``SeedSequence([seed, j])``, so trial
``i`` always sees the same random numbers no matter how blocks are scheduled
or how many trials are requested.
Blocks may run on a thread pool (``LOCALTIME_THREADS``); results are stitched
back in trial order, which keeps estimates bit-identical to a sequential run.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InputValidationError, NoAcceptedPaths
from .graph_model import EnsembleSpec, Fixed, TransitionMatrix

__all__ = [
    "BLOCK_SIZE",
    "SimulationConfig",
    "EstimateWithError",
    "Mean",
    "Product",
    "Indicator",
    "ZeroVisit",
    "RowSampler",
    "block_stream",
    "sample_path",
    "local_time_of_path",
    "simulate_counts",
    "estimate",
]

BLOCK_SIZE = 4096
_BROADCAST_MAX_SIZE = 64
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    trials: int
    spec: EnsembleSpec

    def __post_init__(self):
        if self.trials < 1:
            raise InputValidationError("trials must be at least 1")
        if not 0 <= self.seed <= _MASK64:
            raise InputValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    standard_error: float
    trials_used: int

    def contains(self, value: float, k: float = 4.0) -> bool:
        return abs(self.mean - value) <= k * self.standard_error


# functionals ---------------------------------------------------------------

@dataclass(frozen=True)
class Mean:
    """``L(v1)``."""
    v1: int

    def vertices(self):
        return (self.v1,)

    def __call__(self, counts):
        return counts[self.v1].astype(float)


@dataclass(frozen=True)
class Product:
    """``L(v1) L(v2)``."""
    v1: int
    v2: int

    def vertices(self):
        return (self.v1, self.v2)

    def __call__(self, counts):
        return counts[self.v1].astype(float) * counts[self.v2]


@dataclass(frozen=True)
class Indicator:
    """``1[L(v) == ell]``."""
    v: int
    ell: int

    def vertices(self):
        return (self.v,)

    def __call__(self, counts):
        return (counts[self.v] == self.ell).astype(float)


@dataclass(frozen=True)
class ZeroVisit:
    v: int

    def vertices(self):
        return (self.v,)

    def __call__(self, counts):
        return (counts[self.v] == 0).astype(float)


# sampling ------------------------------------------------------------------

class RowSampler:
    """Inverse-CDF sampler over the cumulative rows of ``P``."""

    def __init__(self, P: TransitionMatrix):
        cdf = np.cumsum(np.asarray(P), axis=1)
        p = np.asarray(P)
        for i in range(P.size):
            # from the last positive entry on, pin the CDF at exactly 1 so u < 1
            # can never land on a trailing zero-probability column
            last = np.flatnonzero(p[i] > 0)[-1]
            cdf[i, last:] = 1.0
        cdf.setflags(write=False)
        self.cdf = cdf
        self.size = P.size

    def step(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Next vertex for each current state given uniforms in [0, 1)."""
        if self.size <= _BROADCAST_MAX_SIZE:
            return np.sum(self.cdf[states] <= u[:, None], axis=1)
        out = np.empty_like(states)
        for s in np.unique(states):
            mask = states == s
            out[mask] = np.searchsorted(self.cdf[s], u[mask], side="right")
        return out


def block_stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def sample_path(P: TransitionMatrix, va: int, n: int, stream: np.random.Generator, sampler: RowSampler | None = None):
    """One path ``(v_0 = va, v_1, ..., v_n)``."""
    va = P.check_vertex(va, "va")
    sampler = sampler or RowSampler(P)
    path = np.empty(n + 1, dtype=np.int64)
    path[0] = va
    u = stream.random(n)
    for m in range(n):
        path[m + 1] = sampler.step(path[m: m + 1], u[m: m + 1])[0]
    return path


def local_time_of_path(path, v: int) -> int:
    """Visits to ``v`` at steps ``1..n``; the starting vertex is not counted."""
    return int(np.count_nonzero(np.asarray(path[1:]) == v))


def _run_block(sampler, seed, block, count, va, n, watch):
    rng = block_stream(seed, block)
    # trial i of the block consumes draws i*n .. i*n+n-1, whatever the block size
    u = rng.random((count, n)).T
    state = np.full(count, va, dtype=np.int64)
    counts = np.zeros((len(watch), count), dtype=np.int64)
    for m in range(n):
        state = sampler.step(state, u[m])
        for j, v in enumerate(watch):
            counts[j] += state == v
    return counts, state


def _threads() -> int:
    raw = os.environ.get("LOCALTIME_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputValidationError(f"LOCALTIME_THREADS must be an integer, got {raw!r}") from None


def simulate_counts(P: TransitionMatrix, config: SimulationConfig, watch):
    """Local times at the ``watch`` vertices and the final vertex for every trial.

    Returns ``(counts, final)`` with ``counts[j, i]`` the local time of trial
    ``i`` at ``watch[j]``.
    """
    spec = config.spec.validate(P)
    watch = tuple(P.check_vertex(v) for v in watch)
    sampler = RowSampler(P)
    nblocks = -(-config.trials // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, config.trials - j * BLOCK_SIZE) for j in range(nblocks)]

    def job(j):
        return _run_block(sampler, config.seed, j, sizes[j], spec.start, spec.horizon, watch)

    workers = min(_threads(), nblocks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, range(nblocks)))
    else:
        parts = [job(j) for j in range(nblocks)]
    counts = np.concatenate([c for c, _ in parts], axis=1)
    final = np.concatenate([f for _, f in parts])
    return counts, final


def estimate(P: TransitionMatrix, config: SimulationConfig, functional) -> EstimateWithError:
    """Empirical average of ``functional`` over simulated paths.

    For a free endpoint this estimates ``<F>*``; for a fixed endpoint paths
    not ending at ``vb`` are rejected, giving the conditional mean
    ``<F> / <1>``.
    """
    watch = functional.vertices()
    counts, final = simulate_counts(P, config, watch)
    local = {v: counts[j] for j, v in enumerate(watch)}
    values = functional(local)
    endpoint = config.spec.endpoint
    if isinstance(endpoint, Fixed):
        values = values[final == endpoint.vb]
        if values.size == 0:
            raise NoAcceptedPaths(f"no sampled path ended at vertex {endpoint.vb}")
    used = int(values.size)
    mean = math.fsum(values) / used
    if used > 1:
        var = math.fsum((values - mean) ** 2) / (used - 1)
        stderr = math.sqrt(var / used)
    else:
        stderr = 0.0
    return EstimateWithError(mean, stderr, used)
