"""Finite directed weighted graphs and their stochastic transition matrices.

Vertices are the integers ``0 .. size-1``. A :class:`TransitionMatrix` is an
immutable, validated, row-stochastic dense matrix; everything downstream
takes one as input.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InvalidGraph, NegativeEntry, RowSumViolation, ZeroRow

__all__ = [
    "Graph",
    "TransitionMatrix",
    "Fixed",
    "Free",
    "FREE",
    "Endpoint",
    "EnsembleSpec",
    "as_endpoint",
    "validate_stochastic",
    "transition_from_adjacency",
    "strongly_connected",
    "n_step_probability",
    "row_propagation",
    "column_propagation",
    "graph_from_json",
    "load_graph",
    "transition_to_json",
    "save_graph",
]

ROW_SUM_TOL = 1e-12
# rows already this close to 1 are kept verbatim, which makes
# validate -> export -> validate an exact round trip
_RENORMALIZE_ABOVE = 1e-14


class TransitionMatrix:
    """Row-stochastic matrix ``P = (p_{vv'})``.

    Construct through :func:`validate_stochastic` or
    :func:`transition_from_adjacency`; the constructor assumes its input has
    already been checked.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: np.ndarray):
        arr = np.array(entries, dtype=float, copy=True)
        arr.setflags(write=False)
        self._entries = arr

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def size(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        arr = self._entries if dtype is None else self._entries.astype(dtype)
        return arr.copy() if copy and arr is self._entries else arr

    def __getitem__(self, idx):
        return self._entries[idx]

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash((self.size, self._entries.tobytes()))

    def __repr__(self):
        return f"TransitionMatrix(size={self.size})"

    def check_vertex(self, v: int, name: str = "vertex") -> int:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise InvalidGraph(f"{name} must be an integer, got {v!r}")
        if not 0 <= v < self.size:
            raise InvalidGraph(f"{name} {v} out of range [0, {self.size})")
        return int(v)


@dataclass(frozen=True)
class Graph:
    """Weighted digraph as an explicit edge list."""

    vertex_count: int
    edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if int(self.vertex_count) < 1:
            raise InvalidGraph("vertex_count must be positive")
        cleaned = []
        seen = set()
        for edge in self.edges:
            src, dst, weight = int(edge[0]), int(edge[1]), float(edge[2])
            for v in (src, dst):
                if not 0 <= v < self.vertex_count:
                    raise InvalidGraph(f"edge endpoint {v} out of range [0, {self.vertex_count})")
            if (src, dst) in seen:
                raise InvalidGraph(f"duplicate edge ({src}, {dst})")
            if not weight >= 0 or not math.isfinite(weight):
                raise NegativeEntry(src, dst, weight)
            seen.add((src, dst))
            cleaned.append((src, dst, weight))
        object.__setattr__(self, "edges", tuple(cleaned))
        has_out = {src for src, _, w in cleaned if w > 0}
        for v in range(self.vertex_count):
            if v not in has_out:
                raise ZeroRow(v)

    def weight_matrix(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count))
        for src, dst, w in self.edges:
            a[src, dst] = w
        return a

    @classmethod
    def from_matrix(cls, a) -> "Graph":
        a = np.asarray(a, dtype=float)
        rows, cols = np.nonzero(a)
        return cls(a.shape[0], tuple((int(i), int(j), float(a[i, j])) for i, j in zip(rows, cols)))


@dataclass(frozen=True)
class Fixed:
    vb: int


@dataclass(frozen=True)
class Free:
    pass


FREE = Free()
Endpoint = Union[Fixed, Free]


def as_endpoint(endpoint) -> Endpoint:
    """Accept ``Fixed``/``Free`` instances, ``None`` (free) or a vertex index (fixed)."""
    if isinstance(endpoint, (Fixed, Free)):
        return endpoint
    if endpoint is None or endpoint == "free":
        return FREE
    return Fixed(int(endpoint))


@dataclass(frozen=True)
class EnsembleSpec:
    start: int
    horizon: int
    endpoint: Endpoint = FREE

    def __post_init__(self):
        if self.horizon < 0:
            raise InvalidGraph("horizon must be nonnegative")
        object.__setattr__(self, "endpoint", as_endpoint(self.endpoint))

    def validate(self, P: TransitionMatrix) -> "EnsembleSpec":
        P.check_vertex(self.start, "start")
        if isinstance(self.endpoint, Fixed):
            P.check_vertex(self.endpoint.vb, "vb")
        return self


def _square(raw) -> np.ndarray:
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidGraph(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidGraph("matrix contains non-finite entries")
    return a


def _normalize_rows(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    for i, row in enumerate(a):
        total = math.fsum(row)
        if abs(total - 1.0) > _RENORMALIZE_ABOVE:
            out[i] = row / total
    return out


def validate_stochastic(raw) -> TransitionMatrix:
    """Check that ``raw`` is row-stochastic and wrap it.

    Raises
    ------
    NegativeEntry
        For the first negative entry in row-major order.
    RowSumViolation
        For the first row whose sum differs from 1 by more than 1e-12.
    """
    a = _square(raw)
    neg = np.argwhere(a < 0)
    if neg.size:
        i, j = neg[0]
        raise NegativeEntry(int(i), int(j), float(a[i, j]))
    for i, row in enumerate(a):
        total = math.fsum(row)
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise RowSumViolation(i, total)
    return TransitionMatrix(_normalize_rows(a))


def transition_from_adjacency(adjacency) -> TransitionMatrix:
    """Unbiased walk: each row of the adjacency matrix divided by its sum."""
    a = _square(adjacency)
    neg = np.argwhere(a < 0)
    if neg.size:
        i, j = neg[0]
        raise NegativeEntry(int(i), int(j), float(a[i, j]))
    sums = np.array([math.fsum(row) for row in a])
    zero = np.flatnonzero(sums <= 0)
    if zero.size:
        raise ZeroRow(int(zero[0]))
    return validate_stochastic(_normalize_rows(a / sums[:, None]))


def strongly_connected(P: TransitionMatrix) -> bool:
    ncomp, _ = connected_components(np.asarray(P) > 0, directed=True, connection="strong")
    return ncomp == 1


def row_propagation(P: TransitionMatrix, va: int, n: int) -> np.ndarray:
    """Rows ``<va|P^m`` for ``m = 0..n`` stacked into an ``(n+1, size)`` array."""
    p = np.asarray(P)
    out = np.empty((n + 1, P.size))
    x = np.zeros(P.size)
    x[va] = 1.0
    out[0] = x
    for m in range(1, n + 1):
        x = x @ p
        out[m] = x
    return out


def column_propagation(P: TransitionMatrix, vb, n: int) -> np.ndarray:
    """Columns ``P^k|vb>`` for ``k = 0..n``; ``vb=None`` means the all-ones vector."""
    p = np.asarray(P)
    out = np.empty((n + 1, P.size))
    if vb is None:
        # P|1> = |1> for stochastic P
        out[:] = 1.0
        return out
    x = np.zeros(P.size)
    x[vb] = 1.0
    out[0] = x
    for k in range(1, n + 1):
        x = p @ x
        out[k] = x
    return out


def n_step_probability(P: TransitionMatrix, va: int, vb: int, n: int) -> float:
    va = P.check_vertex(va, "va")
    vb = P.check_vertex(vb, "vb")
    if n < 0:
        raise InvalidGraph("n must be nonnegative")
    x = np.zeros(P.size)
    x[va] = 1.0
    p = np.asarray(P)
    for _ in range(n):
        x = x @ p
    return float(x[vb])


# --- file formats -----------------------------------------------------------

def graph_from_json(obj: dict) -> TransitionMatrix:
    """Build a transition matrix from the JSON graph schema.

    ``{"vertices": N, "edges": [{"from": i, "to": j, "weight": w}, ...],
    "mode": "adjacency" | "stochastic"}``. Missing ``weight`` means 1 and a
    missing ``mode`` means ``"adjacency"``.
    """
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise InvalidGraph('graph JSON must be an object with a "vertices" field')
    mode = obj.get("mode", "adjacency")
    if mode not in ("adjacency", "stochastic"):
        raise InvalidGraph(f"unknown mode {mode!r}")
    try:
        n = int(obj["vertices"])
        edges = [(int(e["from"]), int(e["to"]), float(e.get("weight", 1.0))) for e in obj.get("edges", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGraph(f"malformed graph JSON: {exc}") from None
    graph = Graph(n, tuple(edges))
    if mode == "adjacency":
        return transition_from_adjacency(graph.weight_matrix())
    return validate_stochastic(graph.weight_matrix())


def _read_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise InvalidGraph(f"non-numeric CSV cell in {path}") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InvalidGraph(f"{path} is not a square CSV matrix")
    return np.array(rows)


def load_graph(path, mode: str | None = None) -> TransitionMatrix:
    """Load a ``.json`` graph or a dense ``.csv`` adjacency matrix."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            a = _read_csv(path)
            if mode == "stochastic":
                return validate_stochastic(a)
            return transition_from_adjacency(a)
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InvalidGraph(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidGraph(f"invalid JSON in {path}: {exc}") from None
    if mode is not None:
        obj = dict(obj, mode=mode)
    return graph_from_json(obj)


def transition_to_json(P: TransitionMatrix) -> dict:
    p = np.asarray(P)
    rows, cols = np.nonzero(p)
    return {
        "vertices": P.size,
        "mode": "stochastic",
        "edges": [{"from": int(i), "to": int(j), "weight": float(p[i, j])} for i, j in zip(rows, cols)],
    }


def save_graph(P: TransitionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(transition_to_json(P), fh)
        fh.write("\n")
