"""Symmetric q-numbers, q-factorials and q-double-factorials.

[a] = (q**a - q**-a) / (q - 1/q) is invariant under q -> 1/q, so every
evaluation is done with the canonical base Q = max(q, 1/q).  That makes
results at q and 1/q bitwise identical rather than merely close.

Arithmetic goes through a small backend object so the same code runs in
binary64 (numpy) or in extended precision (an mpmath context).  The
backend is selected by ``QParam.digits``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np


class Float64:
    """binary64 arithmetic on numpy arrays or Python floats."""

    digits = None
    eps = 2.0**-52
    name = "binary64"

    sqrt = staticmethod(np.sqrt)
    exp = staticmethod(np.exp)
    log = staticmethod(np.log)
    log1p = staticmethod(np.log1p)
    cos = staticmethod(np.cos)
    sin = staticmethod(np.sin)
    pi = math.pi

    def real(self, x):
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def complex(self, z):
        return np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)

    def arg(self, z):
        """Promote to an array so vectorised loops keep working."""
        a = np.asarray(z)
        if a.dtype.kind not in "fc":
            a = a.astype(float)
        return a

    def absmax(self, x):
        return float(np.max(np.abs(x))) if np.ndim(x) else abs(x)

    def to_float(self, x):
        return float(np.real(x))

    def to_complex(self, x):
        return complex(x)

    def __repr__(self):
        return "Float64()"


class Extended:
    """Arithmetic in a private mpmath context with a fixed number of digits."""

    name = "mpmath"

    def __init__(self, digits: int):
        self.digits = int(digits)
        self.ctx = mpmath.MPContext()
        self.ctx.dps = self.digits
        self.eps = float(self.ctx.eps)
        self.sqrt = self.ctx.sqrt
        self.exp = self.ctx.exp
        self.log = self.ctx.log
        self.log1p = self.ctx.log1p
        self.cos = self.ctx.cos
        self.sin = self.ctx.sin
        self.pi = self.ctx.pi

    def real(self, x):
        return self.ctx.mpf(x)

    def complex(self, z):
        return self.ctx.mpc(z)

    def arg(self, z):
        if isinstance(z, (complex, np.complexfloating, mpmath.ctx_mp_python._mpc)):
            return self.ctx.mpc(z)
        return self.ctx.mpf(z)

    def absmax(self, x):
        return abs(x)

    def to_float(self, x):
        return float(self.ctx.re(x))

    def to_complex(self, x):
        return complex(x)

    def __repr__(self):
        return f"Extended({self.digits})"


FLOAT64 = Float64()


@functools.lru_cache(maxsize=None)
def extended(digits: int) -> Extended:
    return Extended(digits)


def backend_for(digits):
    return FLOAT64 if digits is None else extended(int(digits))


@dataclass(frozen=True)
class QParam:
    """Deformation parameter with a guard away from q = 1.

    ``digits=None`` means binary64; an integer selects mpmath with that
    many decimal digits.
    """

    q: float
    one_minus_guard: float = 1e-3
    digits: int | None = None

    def __post_init__(self):
        q = float(self.q)
        if not math.isfinite(q) or q <= 0:
            raise ValueError(f"q must be a positive finite number, got {self.q!r}")
        if self.one_minus_guard <= 0:
            raise ValueError("one_minus_guard must be positive")
        if abs(q - 1.0) < self.one_minus_guard:
            raise ValueError(
                f"|q - 1| = {abs(q - 1.0):.3g} is below the guard {self.one_minus_guard:g}; "
                "the indeterminate-regime series do not converge usefully near q = 1"
            )
        if self.digits is not None and int(self.digits) < 16:
            raise ValueError("extended precision needs at least 16 digits")
        object.__setattr__(self, "q", q)

    @property
    def base(self) -> float:
        """Canonical base max(q, 1/q) used for all evaluation."""
        return self.q if self.q > 1 else 1.0 / self.q

    @property
    def backend(self):
        return backend_for(self.digits)

    @property
    def epsilon(self) -> float:
        return self.backend.eps

    def with_digits(self, digits):
        return replace(self, digits=digits)


def _base(p: QParam, bk):
    # 1/q is formed once in binary64 so q and 1/q share a canonical base
    return bk.real(p.base)


def q_number(p: QParam, a):
    """[a] = (Q**a - Q**-a)/(Q - 1/Q) with Q = max(q, 1/q)."""
    bk = p.backend
    Q = _base(p, bk)
    if bk is FLOAT64:
        a = np.asarray(a, dtype=float)
        Q = p.base
        with np.errstate(over="ignore"):
            val = (np.power(Q, a) - np.power(Q, -a)) / (Q - 1.0 / Q)
        return float(val) if val.ndim == 0 else val
    a = bk.real(a)
    return (Q**a - Q**(-a)) / (Q - 1 / Q)


def log_q_number(p: QParam, n: int):
    """log [n] for integer n >= 1, stable for large n."""
    if n < 1:
        raise ValueError("log_q_number needs n >= 1")
    bk = p.backend
    Q = _base(p, bk)
    lq = bk.log(Q)
    # [n] = Q**(n-1) * (1 - Q**-2n)/(1 - Q**-2)
    num = bk.log1p(-bk.exp(-2 * n * lq))
    den = bk.log1p(-bk.exp(-2 * lq))
    return (n - 1) * lq + num - den


def q_number_table(p: QParam, n_max: int):
    """[0], [1], ..., [n_max] as an array (binary64) or list (extended)."""
    bk = p.backend
    if bk is FLOAT64:
        return q_number(p, np.arange(n_max + 1, dtype=float))
    return [q_number(p, k) for k in range(n_max + 1)]


def log_q_number_table(p: QParam, n_max: int):
    """log [k] for k = 1..n_max, with entry 0 set to -inf (or None) as a placeholder."""
    vals = [log_q_number(p, k) for k in range(1, n_max + 1)]
    if p.backend is FLOAT64:
        return np.concatenate([[-np.inf], np.asarray(vals, dtype=float)])
    return [None] + vals


def _check_nonneg(n):
    if int(n) != n or n < 0:
        raise ValueError(f"expected a nonnegative integer, got {n!r}")
    return int(n)


def log_q_factorial(p: QParam, n: int):
    """log([n]!) without forming the product."""
    n = _check_nonneg(n)
    bk = p.backend
    total = bk.real(0)
    for k in range(2, n + 1):
        total = total + log_q_number(p, k)
    return total


def q_factorial(p: QParam, n: int):
    """[n]! = [1][2]...[n]; overflows to inf in binary64 for large n (use the log form)."""
    n = _check_nonneg(n)
    bk = p.backend
    out = bk.real(1)
    for k in range(2, n + 1):
        out = out * q_number(p, k)
    return out


def log_q_double_factorial(p: QParam, n: int):
    """log([n]!!) with [n]!! = [n][n-2]...; [0]!! = [-1]!! = 1."""
    if n == -1:
        return p.backend.real(0)
    n = _check_nonneg(n)
    bk = p.backend
    total = bk.real(0)
    for k in range(n, 1, -2):
        total = total + log_q_number(p, k)
    return total


def q_double_factorial(p: QParam, n: int):
    if n == -1:
        return p.backend.real(1)
    n = _check_nonneg(n)
    bk = p.backend
    out = bk.real(1)
    for k in range(n, 1, -2):
        out = out * q_number(p, k)
    return out


def log_double_factorial_table(p: QParam, n_max: int):
    """log([k]!!) for k = 0..n_max by cumulative sums over each parity chain."""
    bk = p.backend
    logs = log_q_number_table(p, n_max)
    out = [bk.real(0)] * (n_max + 1)
    for k in range(2, n_max + 1):
        out[k] = out[k - 2] + logs[k]
    if bk is FLOAT64:
        return np.asarray(out, dtype=float)
    return out


def basic_number(q: float, a: float) -> float:
    """Nonsymmetric basic number (1 - q**a)/(1 - q); helper only, not used by any pipeline."""
    if q <= 0 or q == 1:
        raise ValueError("basic_number needs q > 0, q != 1")
    return (1.0 - q**a) / (1.0 - q)


def log_q_ratio(p: QParam, n: int, m: int):
    """log([n]/[m]) for n, m >= 1, formed without the large common factor Q**(n-1)."""
    if n < 1 or m < 1:
        raise ValueError("log_q_ratio needs n, m >= 1")
    bk = p.backend
    lq = bk.log(_base(p, bk))
    return (n - m) * lq + bk.log1p(-bk.exp(-2 * n * lq)) - bk.log1p(-bk.exp(-2 * m * lq))


def q_ratio(p: QParam, n: int, m: int):
    """[n]/[m] accurate to a few ulp even when both overflow."""
    return p.backend.exp(log_q_ratio(p, n, m))
