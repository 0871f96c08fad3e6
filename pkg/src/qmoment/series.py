"""Auxiliary series: Psi, Phi, the four limit constants and the entire functions.

Notation used in code (all for a zero-diagonal Jacobi matrix with entries b_n):

    d_k = |P_{2k}(0)|   = sqrt([2k-1]!!/[2k]!!)      (d_0 = 1)
    c_k = |Q_{2k-1}(0)| = sqrt([2k-2]!!/[2k-1]!!)    (k >= 1)

    Psi = sum_{k>=0} d_k^2          Phi = sum_{k>=1} c_k^2

The entire functions are evaluated in polynomial form, with terms from the
forward recurrence:

    a1(z)  = 1 + sum_k (-1)^k     c_k z P_{2k-1}(z)    = A_alpha^(1)(z)
    pa2(z) = 1 + sum_k (-1)^k     d_k   P_{2k}(z)      = Psi A_alpha^(2)(z)
    b1(z)  = 1 + sum_k (-1)^k     d_k z Q_{2k}(z)      = A_beta^(1)(z)
    pb2(z) =     sum_k (-1)^(k-1) c_k   Q_{2k-1}(z)    = Phi A_beta^(2)(z)

They are the limits of the normalised polynomials:

    P_{2n}(z)/P_{2n}(0)           -> a1(z)
    b_{2n} P_{2n}(0) P_{2n+1}(z)  -> z pa2(z)
    b_{2n} P_{2n}(0) Q_{2n+1}(z)  -> b1(z)
    Q_{2n}(z)/P_{2n}(0)           -> -z pb2(z)

The partial sums equal these normalised polynomials exactly, which is the
telescoping check used to certify evaluations.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass, replace

import numpy as np

from .polynomials import JacobiBasis, coeff_table, pq_table
from .qkernel import FLOAT64, QParam, backend_for, log_double_factorial_table, q_ratio

WHICH = {
    "alpha1": "alpha1", "α1": "alpha1", "a1": "alpha1",
    "alpha2": "alpha2", "α2": "alpha2", "a2": "alpha2",
    "beta1": "beta1", "β1": "beta1", "b1": "beta1",
    "beta2": "beta2", "β2": "beta2", "b2": "beta2",
}
# production series names behind each constant
_SERIES_OF = {"alpha1": "a1", "alpha2": "pa2", "beta1": "b1", "beta2": "pb2"}


class NonConvergenceError(ArithmeticError):
    """Raised when max_terms is exhausted; carries the partial value."""

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = dict(diagnostics or {})


@dataclass(frozen=True)
class SeriesValue:
    value: object
    terms_used: int
    tail_bound: float
    converged: bool = True

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(np.real(complex(self.value)))


@dataclass(frozen=True)
class SeriesContext:
    """Basis plus truncation policy; ``digits`` selects the arithmetic."""

    basis: JacobiBasis
    tol: float | None = None
    max_terms: int = 100_000
    digits: int | None = None

    def __post_init__(self):
        if self.tol is None:
            # a few digits of headroom over the working precision
            tol = 1e-14 if self.digits is None else 10.0 ** (-(int(self.digits) - 6))
            object.__setattr__(self, "tol", tol)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be >= 8")

    @classmethod
    def for_q(cls, q, **kw) -> "SeriesContext":
        p = q if isinstance(q, QParam) else QParam(q)
        return cls(JacobiBasis.q_oscillator(p), **kw)

    @property
    def p(self) -> QParam | None:
        qp = self.basis.qparam
        return None if qp is None else qp.with_digits(self.digits)

    @property
    def bk(self):
        return backend_for(self.digits)

    @property
    def table(self):
        """Coefficient table for the cross-check paths (small depth)."""
        if self.basis.kind != "q_oscillator":
            raise ValueError("coefficient tables are defined for the q-oscillator basis")
        return _table(self.basis.qparam, 48)

    def with_digits(self, digits, tol=None) -> "SeriesContext":
        return replace(self, digits=None if digits is None else int(digits), tol=tol)


@functools.lru_cache(maxsize=32)
def _table(p, depth):
    return coeff_table(p, depth)


# --- weight sequences ------------------------------------------------------------


class _Weights:
    """Lazily extended b_n, r_n = (b_{n-1}/b_n)^2, d_k and c_k in one arithmetic."""

    def __init__(self, basis: JacobiBasis, digits):
        self.basis = basis
        self.bk = backend_for(digits)
        self.p = basis.qparam.with_digits(digits) if basis.kind == "q_oscillator" else None
        self.rho_limit = 1.0 / basis.qparam.base if basis.kind == "q_oscillator" else None
        self.b = []
        self.r = [None]
        self.d = [self.bk.real(1)]
        self.c = [None]
        self._lock = threading.RLock()

    def ensure_b(self, n):
        if len(self.b) >= n:
            return
        with self._lock:
            if len(self.b) >= n:
                return
            size = max(n, 2 * len(self.b), 64)
            vals = self.basis.values(size, self.bk)
            self.b = [float(v) for v in vals] if self.bk is FLOAT64 else list(vals)

    def ratio(self, n):
        """r_n = (b_{n-1}/b_n)^2, n >= 1."""
        while len(self.r) <= n:
            m = len(self.r)
            if self.p is not None:
                self.r.append(q_ratio(self.p, m, m + 1))
            else:
                self.ensure_b(m + 1)
                self.r.append((self.b[m - 1] / self.b[m]) ** 2)
        return self.r[n]

    def ensure(self, K):
        """Make d_0..d_K and c_1..c_K available."""
        if len(self.d) > K:
            return
        with self._lock:
            self.ensure_b(2 * K + 2)
            sq = self.bk.sqrt
            if len(self.c) == 1:
                self.c.append(1 / self.bk.real(self.b[0]))
            while len(self.d) <= K:
                k = len(self.d)
                self.d.append(self.d[k - 1] * sq(self.ratio(2 * k - 1)))
            while len(self.c) <= K:
                k = len(self.c)
                self.c.append(self.c[k - 1] * sq(self.ratio(2 * k - 2)))


_WEIGHTS: dict = {}
_WEIGHTS_LOCK = threading.Lock()


def _weights(basis, digits) -> _Weights:
    key = (id(basis), digits)
    with _WEIGHTS_LOCK:
        w = _WEIGHTS.get(key)
        if w is None or w.basis is not basis:
            w = _WEIGHTS[key] = _Weights(basis, digits)
    return w


# --- truncation bookkeeping ------------------------------------------------------


class _Tracker:
    """Three-small-terms plus geometric-tail stopping rule, elementwise over arrays.

    The tail after term t_k is bounded by |t_k| r/(1-r) with r the observed
    ratio |t_k/t_{k-1}|, floored by the known asymptotic term ratio of the
    basis when there is one.  The value scale is floored at eps times the
    largest term seen, below which no further digits are meaningful.
    """

    def __init__(self, tol, bk, rho_limit):
        self.tol = tol
        self.bk = bk
        self.rho = rho_limit or 0.0
        self.prev = None
        self.small = 0
        self.big = 0.0
        self.tail = math.inf

    def update(self, term, total) -> bool:
        bk = self.bk
        if bk is FLOAT64:
            mag = np.abs(term)
            ref = np.abs(total)
            self.big = max(self.big, float(np.max(mag)) if np.ndim(mag) else float(mag))
            scale = np.maximum(ref, bk.eps * self.big)
            small = bool(np.all(mag <= self.tol * scale))
            if self.prev is None:
                r = np.ones_like(mag)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.where(self.prev > 0, mag / self.prev, np.where(mag > 0, np.inf, 0.0))
            r = np.maximum(r, self.rho)
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = np.where(r < 1, mag * r / (1 - r), np.inf)
            ok = bool(np.all(tail <= self.tol * scale))
            self.tail = float(np.max(tail)) if np.ndim(tail) else float(tail)
        else:
            mag = abs(term)
            self.big = max(self.big, mag)
            scale = max(abs(total), bk.eps * self.big)
            small = mag <= self.tol * scale
            if self.prev is None:
                r = 1
            elif self.prev > 0:
                r = mag / self.prev
            else:
                r = 0 if mag == 0 else math.inf
            r = max(r, self.rho)
            tail = mag * r / (1 - r) if r < 1 else math.inf
            ok = tail <= self.tol * scale
            self.tail = float(tail)
        self.prev = mag
        self.small = self.small + 1 if small else 0
        return self.small >= 3 and ok


def _sum_terms(ctx: SeriesContext, terms, start_value, what: str) -> SeriesValue:
    """Sum a scalar term generator until the stopping rule fires."""
    bk = ctx.bk
    w = _weights(ctx.basis, ctx.digits)
    tr = _Tracker(ctx.tol, bk, w.rho_limit)
    total = start_value
    n = 0
    for t in terms:
        total = total + t
        n += 1
        if tr.update(t, total):
            return SeriesValue(total, n, tr.tail * 1.0, True)
        if n >= ctx.max_terms:
            break
    partial = SeriesValue(total, n, tr.tail, False)
    raise NonConvergenceError(f"{what}: no convergence after {n} terms", partial,
                              {"series": what, "terms": n, "tail_bound": tr.tail})


# --- Psi and Phi -----------------------------------------------------------------


def _psi_terms(ctx):
    w = _weights(ctx.basis, ctx.digits)
    k = 1
    while True:
        w.ensure(k)
        yield w.d[k] ** 2
        k += 1


def _phi_terms(ctx):
    w = _weights(ctx.basis, ctx.digits)
    k = 2
    while True:
        w.ensure(k)
        yield w.c[k] ** 2
        k += 1


@functools.lru_cache(maxsize=256)
def psi(ctx: SeriesContext) -> SeriesValue:
    """Psi = 1 + sum_k [2k-1]!!/[2k]!!."""
    return _sum_terms(ctx, _psi_terms(ctx), ctx.bk.real(1), "psi")


@functools.lru_cache(maxsize=256)
def phi(ctx: SeriesContext) -> SeriesValue:
    """Phi = 1 + sum_k [2k]!!/[2k+1]!!."""
    w = _weights(ctx.basis, ctx.digits)
    w.ensure(1)
    return _sum_terms(ctx, _phi_terms(ctx), w.c[1] ** 2, "phi")


def psi_partial(ctx: SeriesContext, s: int):
    """Psi_s = 1 + sum_{k=1}^{s} [2k-1]!!/[2k]!!."""
    w = _weights(ctx.basis, ctx.digits)
    w.ensure(s)
    return sum((w.d[k] ** 2 for k in range(1, s + 1)), ctx.bk.real(1))


def phi_partial(ctx: SeriesContext, s: int):
    """Phi_s = 1 + sum_{k=1}^{s} [2k]!!/[2k+1]!!."""
    w = _weights(ctx.basis, ctx.digits)
    w.ensure(s + 1)
    return sum((w.c[k] ** 2 for k in range(1, s + 2)), ctx.bk.real(0))


# --- limit constants from positive row sums --------------------------------------


def _row_sum_terms(ctx, which):
    """Terms of the constant series from the summed coefficient recursions.

    Row sums S_n = sum_m alpha_{2m-1,n} obey S_n = S_{n-1} + [n] S_{n-2};
    dividing by [n+1]!! gives R_n = g_n R_{n-1} + r_n R_{n-2} with
    r_n = [n]/[n+1] and g_n = [n]!!/[n+1]!!.  Rows with their top entry
    removed (S') obey the same pattern.  All quantities stay O(1).
    """
    w = _weights(ctx.basis, ctx.digits)
    bk = ctx.bk
    one, zero = bk.real(1), bk.real(0)
    g = {-1: one, 0: one}

    def gn(n):
        if n not in g:
            g[n] = w.ratio(n) * gn(n - 2)
        return g[n]

    # R (alpha rows), U (beta rows), full and top-removed
    R = {-1: one, 0: one}
    U = {-1: zero, 0: one}
    Rp = {-1: zero}
    Up = {0: zero}
    n = 0
    while True:
        n += 1
        R[n] = gn(n) * R[n - 1] + w.ratio(n) * R[n - 2]
        U[n] = gn(n) * U[n - 1] + w.ratio(n) * U[n - 2]
        if n % 2 == 1:
            Rp[n] = gn(n) * R[n - 1] + w.ratio(n) * Rp[n - 2]
        else:
            Up[n] = gn(n) * U[n - 1] + w.ratio(n) * Up[n - 2]
        k = (n + 1) // 2
        if which == "alpha1" and n % 2 == 1:
            yield R[2 * k - 2]
        elif which == "alpha2" and n % 2 == 1:
            yield Rp[2 * k - 1]
        elif which == "beta1" and n % 2 == 1:
            yield U[2 * k - 1]
        elif which == "beta2" and n % 2 == 0 and n >= 2:
            yield Up[n]
        for d in (R, U, Rp, Up):
            d.pop(n - 4, None)
        g.pop(n - 4, None)


@functools.lru_cache(maxsize=256)
def a_limit(ctx: SeriesContext, which: str) -> SeriesValue:
    """A_alpha^(1), A_alpha^(2), A_beta^(1), A_beta^(2) (with their 1/Psi, 1/Phi factors)."""
    which = WHICH[which]
    bk = ctx.bk
    sv = _sum_terms(ctx, _row_sum_terms(ctx, which), bk.real(0), f"A[{which}]")
    if which == "alpha2":
        s = psi(ctx)
        return SeriesValue(1 + sv.value / s.value, sv.terms_used, sv.tail_bound / float(s.value))
    if which == "beta2":
        s = phi(ctx)
        return SeriesValue(1 + sv.value / s.value, sv.terms_used, sv.tail_bound / float(s.value))
    return SeriesValue(1 + sv.value, sv.terms_used, sv.tail_bound)


def master_identity(ctx: SeriesContext):
    """W = A_alpha^(1) A_beta^(1) - Psi A_alpha^(2) Phi A_beta^(2); equals 1."""
    a1, a2 = a_limit(ctx, "alpha1").value, a_limit(ctx, "alpha2").value
    b1, b2 = a_limit(ctx, "beta1").value, a_limit(ctx, "beta2").value
    return a1 * b1 - psi(ctx).value * a2 * phi(ctx).value * b2


# --- entire functions ------------------------------------------------------------


@dataclass
class ParityValues:
    """The four production series (and optionally derivatives) at z."""

    values: dict
    derivatives: dict
    telescoped: dict
    terms_used: int
    tail_bound: dict


def parity_sums(ctx: SeriesContext, z, derivative: bool = False,
                names=("a1", "pa2", "b1", "pb2")) -> ParityValues:
    """Evaluate a1, pa2, b1, pb2 at z (array in binary64, scalar in extended).

    One pass of the recurrence feeds all four series.  With
    ``derivative=True`` the term-wise derivatives are summed as well, using
    the differentiated recurrence.
    """
    bk = ctx.bk
    z = bk.arg(z)
    w = _weights(ctx.basis, ctx.digits)
    one = z * 0 + 1
    zero = z * 0
    names = tuple(names)
    S = {"a1": one, "pa2": one, "b1": one, "pb2": zero}
    dS = {k: zero for k in S}
    trackers = {k: _Tracker(ctx.tol, bk, w.rho_limit) for k in names}
    dtrackers = {k: _Tracker(ctx.tol, bk, w.rho_limit) for k in names} if derivative else {}
    done = {k: False for k in names}
    w.ensure(2)
    b = w.b
    # state at n = 1: (P_0, P_1), (Q_0, Q_1)
    Pp, Pc = one, z / b[0]
    Qp, Qc = zero, one / b[0]
    dPp, dPc = zero, one / b[0]
    dQp, dQc = zero, zero
    k = 0
    while True:
        k += 1
        if k > ctx.max_terms:
            partial = {n: SeriesValue(S[n], k - 1, trackers[n].tail, False) for n in names}
            raise NonConvergenceError(
                f"entire-function series: no convergence after {k - 1} terms",
                partial, {"terms": k - 1, "tail_bound": {n: trackers[n].tail for n in names}})
        w.ensure(k + 1)
        b = w.b
        ck, dk = w.c[k], w.d[k]
        sgn = -1 if k % 2 else 1
        # n = 2k-1 terms
        t_a1 = sgn * ck * z * Pc
        t_pb2 = -sgn * ck * Qc
        if derivative:
            dt_a1 = sgn * ck * (Pc + z * dPc)
            dt_pb2 = -sgn * ck * dQc
        # step to n = 2k
        n = 2 * k - 1
        Pn = (z * Pc - b[n - 1] * Pp) / b[n]
        Qn = (z * Qc - b[n - 1] * Qp) / b[n]
        if derivative:
            dPn = (Pc + z * dPc - b[n - 1] * dPp) / b[n]
            dQn = (Qc + z * dQc - b[n - 1] * dQp) / b[n]
            dPp, dPc, dQp, dQc = dPc, dPn, dQc, dQn
        Pp, Pc, Qp, Qc = Pc, Pn, Qc, Qn
        t_pa2 = sgn * dk * Pc
        t_b1 = sgn * dk * z * Qc
        if derivative:
            dt_pa2 = sgn * dk * dPc
            dt_b1 = sgn * dk * (Qc + z * dQc)
        terms = {"a1": t_a1, "pa2": t_pa2, "b1": t_b1, "pb2": t_pb2}
        for name in names:
            S[name] = S[name] + terms[name]
        if derivative:
            dterms = {"a1": dt_a1, "pa2": dt_pa2, "b1": dt_b1, "pb2": dt_pb2}
            for name in names:
                dS[name] = dS[name] + dterms[name]
        # step to n = 2k+1 for the next round (and the telescoped values)
        n = 2 * k
        Pn = (z * Pc - b[n - 1] * Pp) / b[n]
        Qn = (z * Qc - b[n - 1] * Qp) / b[n]
        if derivative:
            dPn = (Pc + z * dPc - b[n - 1] * dPp) / b[n]
            dQn = (Qc + z * dQc - b[n - 1] * dQp) / b[n]
            dPp, dPc, dQp, dQc = dPc, dPn, dQc, dQn
        Pp, Pc, Qp, Qc = Pc, Pn, Qc, Qn
        all_done = True
        for name in names:
            ok = trackers[name].update(terms[name], S[name])
            if derivative:
                ok = dtrackers[name].update(dterms[name], dS[name]) and ok
            done[name] = ok
            all_done = all_done and ok
        if all_done:
            break
    # Pp = P_{2k}, Pc = P_{2k+1}
    sg = 1 if k % 2 == 0 else -1
    tele = {
        "a1": sg * Pp / dk,
        "b1": sg * dk * b[2 * k] * Qc,
        "z_pa2": sg * dk * b[2 * k] * Pc,
        "z_pb2": -sg * Qp / dk,
    }
    tails = {n: trackers[n].tail for n in names}
    if derivative:
        tails.update({"d" + n: dtrackers[n].tail for n in names})
    return ParityValues({n: S[n] for n in names},
                        {n: dS[n] for n in names} if derivative else {},
                        tele, k, tails)


def _scalarize(v, bk):
    if bk is FLOAT64 and np.ndim(v) == 0:
        v = complex(v)
        return v
    return v


def a_general(ctx: SeriesContext, which: str, z) -> SeriesValue:
    """A^(i)_eps(z): the entire functions whose values at z = i are the limit constants."""
    which = WHICH[which]
    name = _SERIES_OF[which]
    res = parity_sums(ctx, z, names=(name,))
    val = res.values[name]
    tail = res.tail_bound[name]
    if which == "alpha2":
        s = psi(ctx).value
        val, tail = val / s, tail / float(s)
    elif which == "beta2":
        s = phi(ctx).value
        val, tail = val / s, tail / float(s)
    return SeriesValue(_scalarize(val, ctx.bk), res.terms_used, tail, True)


def conjugation_check(ctx: SeriesContext, which: str, z) -> float:
    """|A(conj z) - conj(A(z))| / max(1, |A(z)|)."""
    z = complex(z)
    a = complex(a_general(ctx, which, z).value)
    b = complex(a_general(ctx, which, z.conjugate()).value)
    return abs(b - a.conjugate()) / max(1.0, abs(a))


def partial_sum(ctx: SeriesContext, which: str, n: int, z):
    """n-th partial sum of a production series (first n correction terms)."""
    name = _SERIES_OF[WHICH[which]]
    bk = ctx.bk
    w = _weights(ctx.basis, ctx.digits)
    w.ensure(n + 1)
    P, Q = pq_table(ctx.basis, 2 * n + 1, z, bk)
    z = bk.arg(z)
    total = {"a1": 1, "pa2": 1, "b1": 1, "pb2": 0}[name]
    for k in range(1, n + 1):
        sgn = -1 if k % 2 else 1
        if name == "a1":
            total = total + sgn * w.c[k] * z * P[2 * k - 1]
        elif name == "pa2":
            total = total + sgn * w.d[k] * P[2 * k]
        elif name == "b1":
            total = total + sgn * w.d[k] * z * Q[2 * k]
        else:
            total = total - sgn * w.c[k] * Q[2 * k - 1]
    return total


def telescoped(ctx: SeriesContext, which: str, n: int, z):
    """Closed value of the n-th partial sum in terms of single polynomials.

    alpha1: (-1)^n P_{2n}(z)/d_n  =  (-1)^n sqrt([2n]!!/[2n-1]!!) P_{2n}(z)
    alpha2: (-1)^n b_{2n} d_n P_{2n+1}(z)/z
    beta1:  (-1)^n b_{2n} d_n Q_{2n+1}(z)
    beta2:  (-1)^(n-1) Q_{2n}(z)/(d_n z)
    """
    name = _SERIES_OF[WHICH[which]]
    bk = ctx.bk
    w = _weights(ctx.basis, ctx.digits)
    w.ensure(n + 1)
    P, Q = pq_table(ctx.basis, 2 * n + 1, z, bk)
    z = bk.arg(z)
    sg = 1 if n % 2 == 0 else -1
    dn = w.d[n]
    bn = w.b[2 * n]
    if name == "a1":
        return sg * P[2 * n] / dn
    if name == "pa2":
        return sg * bn * dn * P[2 * n + 1] / z
    if name == "b1":
        return sg * bn * dn * Q[2 * n + 1]
    return -sg * Q[2 * n] / (dn * z)


def scaled_partial(ctx: SeriesContext, which: str, z, K: int, form: str = "poly"):
    """Truncation at K of the series in either representation.

    Both forms are scaled the same way (alpha2 by Psi_K, beta2 by Phi_K in
    place of the constant terms), so for every K they agree exactly in
    exact arithmetic.  form="nested" sums the coefficient-table expression
    term by term in binary64; it is a cross-check with a small depth cap.
    """
    which = WHICH[which]
    if form == "poly":
        return complex(partial_sum(ctx, which, K, complex(z)))
    if form != "nested":
        raise ValueError("form must be 'poly' or 'nested'")
    if K > 40:
        raise OverflowError("nested form is capped at K <= 40")
    p = ctx.basis.qparam.with_digits(None)
    tab = coeff_table(p, 2 * K + 1)
    ldf = log_double_factorial_table(p, 2 * K + 1)
    z = complex(z)
    if which == "alpha1":
        total = 1.0 + 0j
        for k in range(1, K + 1):
            for m in range(k):
                total += (-1) ** (k - m) * z ** (2 * (k - m)) * math.exp(
                    tab.log_alpha(m, 2 * k - 2) - ldf[2 * k - 1])
        return total
    if which == "alpha2":
        total = 1.0 + 0j
        for k in range(1, K + 1):
            total += math.exp(ldf[2 * k - 1] - ldf[2 * k])
            for m in range(k):
                total += (-1) ** (k - m) * z ** (2 * (k - m)) * math.exp(
                    tab.log_alpha(m, 2 * k - 1) - ldf[2 * k])
        return total
    if which == "beta1":
        total = 1.0 + 0j
        for k in range(1, K + 1):
            for m in range(k):
                total += (-1) ** (k - m) * z ** (2 * (k - m)) * math.exp(
                    tab.log_beta(m, 2 * k - 1) - ldf[2 * k])
        return total
    total = 0j
    for k in range(1, K + 1):
        total += math.exp(ldf[2 * k - 2] - ldf[2 * k - 1])
        for m in range(k - 1):
            total += (-1) ** (k - m - 1) * z ** (2 * (k - m - 1)) * math.exp(
                tab.log_beta(m, 2 * k - 2) - ldf[2 * k - 1])
    return total


def constants_at_i(ctx: SeriesContext) -> dict:
    """The four constants in the combinations that enter the Weyl data."""
    A1 = a_limit(ctx, "alpha1").value
    A2 = a_limit(ctx, "alpha2").value
    B1 = a_limit(ctx, "beta1").value
    B2 = a_limit(ctx, "beta2").value
    P, F = psi(ctx).value, phi(ctx).value
    return {"A1": A1, "PsiA2": P * A2, "B1": B1, "PhiB2": F * B2, "Psi": P, "Phi": F}
