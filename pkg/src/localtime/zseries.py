"""Truncated power series in ``w = 1/z``.

A z-transform ``F(z) = sum_n f_n z^{-n}`` is stored as the power series
``sum_n f_n w^n``, so reading off the coefficient of ``w^n`` recovers the
time-domain value at horizon ``n``.

Every series carries its truncation ``order``: the coefficient of ``w^k`` is
known for ``k <= order`` and unknown beyond. Arithmetic propagates the order
pessimistically and :meth:`ZSeries.coefficient` refuses to read past it.
"""

from __future__ import annotations

import numpy as np

from .errors import DivisionByZeroSeries, TruncationExceeded

__all__ = [
    "ZSeries",
    "TIGHT_TOL",
    "zs_add",
    "zs_mul",
    "zs_div",
    "zs_pow",
    "zs_coefficient",
    "zs_resolvent_element",
]

# leading coefficients below this are treated as exact zeros
TIGHT_TOL = 1e-13


class ZSeries:
    """Immutable truncated Laurent series ``sum_k c_k w^k`` for ``k <= order``.

    ``coeffs[i]`` is the coefficient of ``w^(valuation + i)`` and
    ``len(coeffs) == order - valuation + 1`` (trailing zeros are known zeros).
    The zero series has empty ``coeffs`` and ``valuation == order``.
    """

    __slots__ = ("valuation", "coeffs", "order")

    def __init__(self, coeffs, valuation: int = 0, order: int | None = None):
        c = np.array(coeffs, dtype=float).ravel()
        if order is None:
            order = valuation + len(c) - 1
        order = int(order)
        keep = order - valuation + 1
        if keep < len(c):
            c = c[: max(keep, 0)]
        elif keep > len(c):
            c = np.concatenate([c, np.zeros(keep - len(c))])
        nz = np.flatnonzero(np.abs(c) >= TIGHT_TOL)
        if nz.size == 0:
            valuation, c = order, np.zeros(0)
        else:
            valuation, c = valuation + int(nz[0]), c[nz[0]:]
        c.setflags(write=False)
        self.valuation = int(valuation)
        self.coeffs = c
        self.order = order

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, order: int) -> "ZSeries":
        return cls([], valuation=order, order=order)

    @classmethod
    def monomial(cls, coef: float, power: int, order: int) -> "ZSeries":
        """``coef * w^power``, known exactly up to ``order``."""
        if order < power:
            return cls.zero(order)
        return cls([coef], valuation=power, order=order)

    @classmethod
    def constant(cls, value: float, order: int) -> "ZSeries":
        return cls.monomial(value, 0, order)

    @classmethod
    def z(cls, order: int) -> "ZSeries":
        """The variable ``z = w^{-1}``."""
        return cls.monomial(1.0, -1, order)

    @classmethod
    def from_sequence(cls, values, start: int = 0) -> "ZSeries":
        """z-transform of a finite sequence: ``values[i]`` at ``w^(start+i)``."""
        return cls(values, valuation=start)

    # -- properties ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def _lowest(self) -> int:
        # first exponent whose coefficient may be nonzero
        return self.order + 1 if self.is_zero else self.valuation

    def coefficient(self, n: int) -> float:
        if n > self.order:
            raise TruncationExceeded(n, self.order)
        i = n - self.valuation
        if i < 0 or i >= self.coeffs.size:
            return 0.0
        return float(self.coeffs[i])

    def coefficients(self, start: int, stop: int) -> np.ndarray:
        """Coefficients of ``w^start .. w^stop`` inclusive."""
        return np.array([self.coefficient(k) for k in range(start, stop + 1)])

    def truncate(self, order: int) -> "ZSeries":
        if order > self.order:
            raise TruncationExceeded(order, self.order)
        return ZSeries(self.coeffs, self.valuation, order)

    def evaluate(self, z: float) -> float:
        """Sum of the known terms at ``w = 1/z`` (a partial sum, not the full transform)."""
        if self.is_zero:
            return 0.0
        w = 1.0 / z
        return float(np.polyval(self.coeffs[::-1], w) * w ** self.valuation)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ZSeries):
            other = ZSeries.constant(float(other), self.order)
        order = min(self.order, other.order)
        lo = min(self._lowest, other._lowest)
        if lo > order:
            return ZSeries.zero(order)
        out = np.zeros(order - lo + 1)
        for s in (self, other):
            if s.is_zero or s.valuation > order:
                continue
            k = min(s.coeffs.size, order - s.valuation + 1)
            out[s.valuation - lo: s.valuation - lo + k] += s.coeffs[:k]
        return ZSeries(out, lo, order)

    __radd__ = __add__

    def __neg__(self):
        return ZSeries(-self.coeffs, self.valuation, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: float) -> "ZSeries":
        return ZSeries(self.coeffs * factor, self.valuation, self.order)

    def __mul__(self, other):
        if not isinstance(other, ZSeries):
            return self.scale(float(other))
        order = min(self.order + other._lowest, other.order + self._lowest)
        if self.is_zero or other.is_zero:
            return ZSeries.zero(order)
        val = self.valuation + other.valuation
        if val > order:
            return ZSeries.zero(order)
        n = order - val + 1
        prod = np.convolve(self.coeffs[:n], other.coeffs[:n])[:n]
        return ZSeries(prod, val, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, ZSeries):
            return self.scale(1.0 / float(other))
        if other.is_zero:
            raise DivisionByZeroSeries("division by the zero series")
        vb = other.valuation
        order = min(self.order - vb, other.order - 2 * vb + self._lowest)
        if self.is_zero:
            return ZSeries.zero(order)
        val = self.valuation - vb
        n = order - val + 1
        if n <= 0:
            return ZSeries.zero(order)
        a = np.zeros(n)
        k = min(n, self.coeffs.size)
        a[:k] = self.coeffs[:k]
        b = np.zeros(n)
        k = min(n, other.coeffs.size)
        b[:k] = other.coeffs[:k]
        q = np.zeros(n)
        lead = b[0]
        for i in range(n):
            # a_i = sum_{j<=i} b_j q_{i-j}
            q[i] = (a[i] - np.dot(b[1: i + 1], q[:i][::-1])) / lead
        return ZSeries(q, val, order)

    def __rtruediv__(self, other):
        return ZSeries.constant(float(other), self.order - self.valuation) / self

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers: use division")
        if k == 0:
            # exact constant; give it at least the order of the base
            return ZSeries.constant(1.0, max(self.order, self.order - self._lowest, 0))
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def shift(self, k: int) -> "ZSeries":
        """Multiply by ``w^k`` (i.e. by ``z^{-k}``)."""
        return ZSeries(self.coeffs, self.valuation + k, self.order + k)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:6])
        more = ", ..." if self.coeffs.size > 6 else ""
        return f"ZSeries(valuation={self.valuation}, order={self.order}, coeffs=[{head}{more}])"


def zs_add(a: ZSeries, b: ZSeries) -> ZSeries:
    return a + b


def zs_mul(a: ZSeries, b: ZSeries) -> ZSeries:
    return a * b


def zs_div(a: ZSeries, b: ZSeries) -> ZSeries:
    return a / b


def zs_pow(a: ZSeries, k: int) -> ZSeries:
    return a ** k


def zs_coefficient(a: ZSeries, n: int) -> float:
    return a.coefficient(n)


def zs_resolvent_element(P, va: int, vb: int, order: int) -> ZSeries:
    """Series of ``<va|(P - zI)^{-1}|vb> = -sum_m <va|P^m|vb> w^{m+1}`` up to ``w^order``."""
    from .graph_model import row_propagation

    if order < 1:
        raise ValueError("order must be at least 1")
    va = P.check_vertex(va, "va")
    vb = P.check_vertex(vb, "vb")
    rows = row_propagation(P, va, order - 1)
    return ZSeries(-rows[:, vb], valuation=1, order=order)
