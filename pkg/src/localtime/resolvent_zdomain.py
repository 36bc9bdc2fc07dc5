"""z-domain local-time formulas built from the free resolvent ``R = (P - zI)^{-1}``.

Each quantity can be evaluated in two modes:

* numeric: a real ``z > 1``; brackets come from one LU factorization of
  ``P - zI`` per ``(P, z)``.
* series: a truncation order; brackets are :class:`~localtime.zseries.ZSeries`
  in ``w = 1/z`` and the coefficient of ``w^n`` is the time-domain value at
  horizon ``n``.

The formulas are written once against a bracket provider exposing ``z``,
``R(a, b)`` (``<a|R|b>``), ``RP(a, b)`` (``<a|RP|b>``) and ``R1()``
(``<a|R|1> = 1/(1-z)``), so both modes evaluate literally the same algebra.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DenominatorVanishes, InputValidationError, InvalidGraph, SingularSystem
from .graph_model import Fixed, TransitionMatrix, as_endpoint, row_propagation
from .zseries import ZSeries

__all__ = [
    "Resolvent",
    "SeriesResolvent",
    "resolvent_element",
    "deformed_resolvent_element",
    "alpha_parameter",
    "mean_z",
    "correlation_z",
    "distribution_z",
    "zero_visit_z",
    "verify_contour_integral",
    "verify_appendix_integral",
    "contour_integral_closed",
]

DENOMINATOR_TOL = 1e-13


class Resolvent:
    """Numeric resolvent ``(P - zI)^{-1}`` at a fixed real ``z > 1``.

    Columns are solved lazily against a single LU factorization and cached.
    """

    def __init__(self, P: TransitionMatrix, z: float):
        z = float(z)
        if not z > 1.0:
            raise SingularSystem(f"numeric resolvent requires z > 1, got {z}")
        self.P = P
        self.z = z
        self._p = np.asarray(P)
        self._lu = lu_factor(self._p - z * np.eye(P.size), check_finite=False)
        self._cols: dict[int, np.ndarray] = {}

    def column(self, b: int) -> np.ndarray:
        col = self._cols.get(b)
        if col is None:
            e = np.zeros(self.P.size)
            e[b] = 1.0
            col = lu_solve(self._lu, e, check_finite=False)
            self._cols[b] = col
        return col

    def R(self, a: int, b: int) -> float:
        return float(self.column(b)[a])

    def RP(self, a: int, b: int) -> float:
        # R(P - zI) = I  =>  RP = I + zR
        return (1.0 if a == b else 0.0) + self.z * self.R(a, b)

    def R1(self) -> float:
        return 1.0 / (1.0 - self.z)

    def matrix(self) -> np.ndarray:
        return lu_solve(self._lu, np.eye(self.P.size), check_finite=False)


class SeriesResolvent:
    """Resolvent brackets as power series in ``w = 1/z`` up to ``w^order``.

    ``<a|R|b> = -sum_{m>=0} <a|P^m|b> w^{m+1}`` and
    ``<a|RP|b> = -sum_{m>=0} <a|P^{m+1}|b> w^{m+1}``.
    """

    def __init__(self, P: TransitionMatrix, order: int):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.P = P
        self.order = int(order)
        self.z = ZSeries.z(self.order)
        self._rows: dict[int, np.ndarray] = {}

    def _row(self, a: int) -> np.ndarray:
        rows = self._rows.get(a)
        if rows is None:
            rows = row_propagation(self.P, a, self.order)
            self._rows[a] = rows
        return rows

    def R(self, a: int, b: int) -> ZSeries:
        return ZSeries(-self._row(a)[: self.order, b], valuation=1, order=self.order)

    def RP(self, a: int, b: int) -> ZSeries:
        return ZSeries(-self._row(a)[1:, b], valuation=1, order=self.order)

    def R1(self) -> ZSeries:
        return 1.0 / (1.0 - self.z)


def resolvent_element(P: TransitionMatrix, z: float, va: int, vb: int) -> float:
    va = P.check_vertex(va, "va")
    vb = P.check_vertex(vb, "vb")
    return Resolvent(P, z).R(va, vb)


def deformed_resolvent_element(P: TransitionMatrix, z: float, v: int, u: float, va: int, vb: int) -> float:
    """``<va|(P e^{u|v><v|} - zI)^{-1}|vb>`` via the rank-one update of the free resolvent."""
    for x, name in ((v, "v"), (va, "va"), (vb, "vb")):
        P.check_vertex(x, name)
    res = Resolvent(P, z)
    c = 1.0 - math.exp(u)
    denom = 1.0 - c * res.RP(v, v)
    if abs(denom) <= DENOMINATOR_TOL:
        raise DenominatorVanishes(f"1 - (1 - e^u)<v|RP|v> = {denom:g} at z={z}, u={u}")
    return res.R(va, vb) + c * res.RP(va, v) * res.R(v, vb) / denom


def alpha_parameter(P: TransitionMatrix, z: float, v: int) -> float:
    """``<v|RP|v>``; lies in ``(-inf, 1/2)`` for every ``z > 1``."""
    return Resolvent(P, z).RP(P.check_vertex(v), v)


# --- formulas over a bracket provider ---------------------------------------

def _end(ctx, x, vb):
    return ctx.R1() if vb is None else ctx.R(x, vb)


def _mean(ctx, va, vb, v1):
    z = ctx.z
    if vb is None:
        return z / (1.0 - z) * ctx.RP(va, v1)
    return z * ctx.RP(va, v1) * ctx.R(v1, vb)


def _correlation(ctx, va, vb, v1, v2):
    z = ctx.z
    if vb is None:
        return (z * z / (z - 1.0)) * ctx.RP(va, v1) * ctx.R(v1, v2) + (z / (z - 1.0)) * ctx.RP(va, v2) * ctx.RP(v2, v1)
    return (
        -(z * z) * ctx.RP(va, v1) * ctx.R(v1, v2) * ctx.R(v2, vb)
        - z * ctx.RP(va, v2) * ctx.RP(v2, v1) * ctx.R(v1, vb)
    )


def _distribution_literal(ctx, va, vb, v, ell):
    """One-point distribution exactly as the general z-domain formula reads.

    ``-z<va|R|vb> d + <va|RP|v><v|R|vb>/<v|RP|v> * (z d + <v|RP|v>^l / (z^l <v|R|v>^(l+1)))``
    with ``d = 1`` if ``l == 0``. Divides by ``<v|RP|v>``.
    """
    z = ctx.z
    rp_vv = ctx.RP(v, v)
    ratio = ctx.RP(va, v) * _end(ctx, v, vb) / rp_vv
    tail = rp_vv ** ell / (z ** ell * ctx.R(v, v) ** (ell + 1))
    if ell == 0:
        return -z * _end(ctx, va, vb) + ratio * (z + tail)
    return ratio * tail


def _distribution_reduced(ctx, va, vb, v, ell):
    """Same quantity regrouped into generating functions with nonnegative
    coefficients, which is how series mode avoids cancellation.

    With ``RP = I + zR`` the ``l >= 1`` term factors as
    ``first * ret^(l-1) * last``, where ``first = <va|RP|v>/(z<v|R|v>)``
    (first arrival at ``v``), ``ret = <v|RP|v>/(z<v|R|v>)`` (one return)
    and ``last = <v|R|vb>/<v|R|v>`` (leaving without coming back). For
    ``l = 0`` the bracket collapses to ``1/<v|R|v>``. Only ``<v|R|v>`` is
    ever inverted, and its series has leading coefficient -1.
    """
    z = ctx.z
    r_vv = ctx.R(v, v)
    last = _end(ctx, v, vb) / r_vv
    if ell == 0:
        return -z * _end(ctx, va, vb) + ctx.RP(va, v) * last
    zr = z * r_vv
    first = ctx.RP(va, v) / zr
    ret = ctx.RP(v, v) / zr
    return first * ret ** (ell - 1) * last


def _distribution_origin(ctx, v, ell):
    """Free endpoint, ``v`` equal to the starting vertex: ``ret^l * R1 / <v|R|v>``."""
    z = ctx.z
    r_vv = ctx.R(v, v)
    return (ctx.RP(v, v) / (z * r_vv)) ** ell * (ctx.R1() / r_vv)


def _zero_visit(ctx, va, vb, v):
    # -z <va|(I - RP|v><v| / (z<v|R|v>)) R|vb>
    z = ctx.z
    return -z * _end(ctx, va, vb) + ctx.RP(va, v) * _end(ctx, v, vb) / ctx.R(v, v)


# --- dispatch ---------------------------------------------------------------

def _series(P, order, build):
    """Evaluate ``build(ctx)`` on series brackets, raising the bracket order
    until the result is known through ``w^order``."""
    if order < 0:
        raise InvalidGraph("series order must be nonnegative")
    k = max(order, 1) + 2
    for _ in range(64):
        result = build(SeriesResolvent(P, k))
        if result.order >= order:
            return result.truncate(order)
        k += order - result.order + 1
    raise RuntimeError("series order did not stabilize")


def _evaluate(P, z, order, build):
    if (z is None) == (order is None):
        raise InputValidationError("give exactly one of z (numeric mode) or order (series mode)")
    if z is not None:
        return float(build(Resolvent(P, z)))
    return _series(P, order, build)


def _vb(P, va, endpoint, *vertices):
    P.check_vertex(va, "va")
    for x in vertices:
        P.check_vertex(x)
    endpoint = as_endpoint(endpoint)
    if isinstance(endpoint, Fixed):
        return P.check_vertex(endpoint.vb, "vb")
    return None


def mean_z(P: TransitionMatrix, va: int, endpoint, v1: int, *, z: float | None = None, order: int | None = None):
    """z-transform of the mean local time at ``v1``.

    Returns a float for numeric ``z`` or a :class:`ZSeries` for ``order``.
    """
    vb = _vb(P, va, endpoint, v1)
    return _evaluate(P, z, order, lambda ctx: _mean(ctx, va, vb, v1))


def correlation_z(P: TransitionMatrix, va: int, endpoint, v1: int, v2: int, *, z=None, order=None):
    vb = _vb(P, va, endpoint, v1, v2)
    return _evaluate(P, z, order, lambda ctx: _correlation(ctx, va, vb, v1, v2))


def distribution_z(P: TransitionMatrix, va: int, endpoint, v: int, ell: int, *, z=None, order=None):
    """z-transform of the (unnormalized) probability that ``L(v) == ell``.

    Numeric mode evaluates the general formula as written and raises
    :class:`DenominatorVanishes` when ``<v|RP|v>`` is numerically zero.
    Series mode uses the algebraically equivalent form that never divides by
    ``<v|RP|v>``: that series can have a tiny leading coefficient, and long
    division by it amplifies rounding geometrically in the horizon.
    """
    if ell < 0:
        raise InputValidationError("ell must be nonnegative")
    vb = _vb(P, va, endpoint, v)
    if vb is None and v == va:
        return _evaluate(P, z, order, lambda ctx: _distribution_origin(ctx, v, ell))
    if z is not None and order is None:
        res = Resolvent(P, z)
        if abs(res.RP(v, v)) <= DENOMINATOR_TOL:
            raise DenominatorVanishes(f"<v|RP|v> vanishes at z={z}")
        return float(_distribution_literal(res, va, vb, v, ell))
    return _evaluate(P, z, order, lambda ctx: _distribution_reduced(ctx, va, vb, v, ell))


def zero_visit_z(P: TransitionMatrix, va: int, endpoint, v: int, *, z=None, order=None):
    vb = _vb(P, va, endpoint, v)
    return _evaluate(P, z, order, lambda ctx: _zero_visit(ctx, va, vb, v))


# --- contour integral used for the distribution -----------------------------

def contour_integral_closed(alpha: float, ell: int) -> float:
    if ell < 0:
        return 0.0
    return -(alpha ** ell) / (alpha - 1.0) ** (ell + 1)


def verify_contour_integral(alpha: float, ell: int, nodes: int = 4096) -> tuple[float, float]:
    """Trapezoidal value of ``(1/2pi) int_0^{2pi} e^{i phi l} / (1 - alpha(1 - e^{-i phi})) dphi``
    alongside its closed form. Requires ``alpha < 1/2``."""
    if not alpha < 0.5:
        raise InputValidationError("alpha must be below 1/2")
    if nodes < 4096:
        raise InputValidationError("at least 4096 quadrature nodes are required")
    phi = 2.0 * np.pi * np.arange(nodes) / nodes
    integrand = np.exp(1j * phi * ell) / (1.0 - alpha * (1.0 - np.exp(-1j * phi)))
    # trapezoid on a periodic integrand is the plain mean over equispaced nodes
    numeric = float(np.mean(integrand).real)
    return numeric, contour_integral_closed(alpha, ell)


# name used by the public operation list
verify_appendix_integral = verify_contour_integral
