"""Orthonormal polynomials of a zero-diagonal Jacobi matrix.

P_n (first kind) and Q_n (second kind) solve

    b_n y_{n+1} + b_{n-1} y_{n-1} = z y_n

with P_0 = 1, P_1 = z/b_0 and Q_0 = 0, Q_1 = 1/b_0.  Values always come
from the forward recurrence; monomial expansions through the alpha/beta
coefficient tables exist only as cross-checks.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qkernel import FLOAT64, QParam, log_q_number_table, q_factorial, q_number

N_CLOSED_MAX = 30


def exact_q_number(q: float, a: int) -> Fraction:
    """[a] as an exact rational in the binary64 value of max(q, 1/q)."""
    Q = Fraction(q)
    if Q < 1:
        Q = 1 / Q
    return (Q**a - Q**-a) / (Q - 1 / Q)


class JacobiBasis:
    """Off-diagonal entries b_n of a zero-diagonal Jacobi matrix.

    ``kind`` is "q_oscillator" (b_n = sqrt([n+1]_q)) or "custom".  A
    custom basis is a finite prefix, optionally continued by a
    q-oscillator tail.
    """

    def __init__(self, entries: Callable[[int], float], kind: str = "custom",
                 qparam: QParam | None = None, length: int | None = None,
                 name: str = "custom"):
        if kind not in ("q_oscillator", "custom"):
            raise ValueError(f"unknown basis kind {kind!r}")
        if kind == "q_oscillator" and qparam is None:
            raise ValueError("q_oscillator basis needs a QParam")
        self.entries = entries
        self.kind = kind
        self.qparam = qparam
        self.length = length
        self.name = name
        # optional exact b_n**2 as a Fraction, used by the exact-moment oracle
        self.square_rule: Callable[[int], Fraction] | None = None
        self.prefix_length: int | None = None
        self._cache: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def q_oscillator(cls, p: QParam | float) -> "JacobiBasis":
        if not isinstance(p, QParam):
            p = QParam(p)
        p = p.with_digits(None)
        return cls(lambda n: math.sqrt(q_number(p, n + 1)), "q_oscillator", p,
                   name=f"qosc(q={p.q!r})")

    @classmethod
    def harmonic(cls, scale: float = 1.0) -> "JacobiBasis":
        """b_n = scale*sqrt(n+1); scale 1/sqrt(2) gives the position operator of the oscillator."""
        basis = cls(lambda n: scale * math.sqrt(n + 1), "custom", name=f"harmonic(scale={scale!r})")
        s2 = Fraction(scale * scale).limit_denominator(10**9)
        basis.square_rule = lambda n: s2 * (n + 1)
        return basis

    @classmethod
    def from_prefix(cls, b, tail_q: float | None = None) -> "JacobiBasis":
        """Finite prefix b[0..], continued by sqrt([n+1]_q) if tail_q is given."""
        prefix = [float(v) for v in b]
        if any(not (v > 0 and math.isfinite(v)) for v in prefix):
            raise ValueError("basis entries must be positive and finite")
        tail = QParam(tail_q) if tail_q is not None else None

        def entry(n):
            if n < len(prefix):
                return prefix[n]
            if tail is None:
                raise IndexError(f"basis prefix has only {len(prefix)} entries")
            return math.sqrt(q_number(tail, n + 1))

        def square(n):
            if n < len(prefix):
                return Fraction(prefix[n]) ** 2
            return exact_q_number(tail.q, n + 1)

        length = None if tail is not None else len(prefix)
        basis = cls(entry, "custom", tail, length=length, name="custom-file")
        basis.square_rule = square
        basis.prefix_length = len(prefix)
        return basis

    def with_precision(self, bk):
        return self

    def values(self, n: int, bk=FLOAT64):
        """b_0 .. b_{n-1} in the given arithmetic (array for binary64, list for extended)."""
        if self.length is not None and n > self.length:
            raise IndexError(f"basis has only {self.length} entries, {n} requested")
        key = (bk.digits, n)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.kind == "q_oscillator":
            p = self.qparam.with_digits(bk.digits)
            if bk is FLOAT64:
                with np.errstate(over="ignore"):
                    vals = np.sqrt(q_number(p, np.arange(1, n + 1, dtype=float)))
            else:
                vals = [bk.sqrt(q_number(p, k + 1)) for k in range(n)]
        else:
            raw = [self.entries(k) for k in range(n)]
            if bk is FLOAT64:
                vals = np.asarray(raw, dtype=float)
            else:
                vals = [bk.real(v) for v in raw]
                if self.qparam is not None and self.prefix_length is not None:
                    # analytic tail recomputed in the working precision
                    p = self.qparam.with_digits(bk.digits)
                    for k in range(self.prefix_length, n):
                        vals[k] = bk.sqrt(q_number(p, k + 1))
        with self._lock:
            self._cache[key] = vals
        return vals

    def log_values(self, n: int, bk=FLOAT64):
        """log b_0 .. log b_{n-1}; computed without overflow for the q-oscillator."""
        if self.kind == "q_oscillator":
            p = self.qparam.with_digits(bk.digits)
            logs = log_q_number_table(p, n)[1:]
            if bk is FLOAT64:
                return 0.5 * np.asarray(logs, dtype=float)
            return [v / 2 for v in logs]
        vals = self.values(n, bk)
        if bk is FLOAT64:
            return np.log(vals)
        return [bk.log(v) for v in vals]

    def __call__(self, n: int) -> float:
        return float(self.values(n + 1)[n])

    def __repr__(self):
        return f"JacobiBasis({self.name})"


@dataclass(frozen=True)
class PolyPair:
    n: int
    z: complex
    p: complex
    q_val: complex
    prev_p: complex
    prev_q: complex

    def wronskian(self):
        """P_{n-1} Q_n - P_n Q_{n-1}; equals 1/b_{n-1} for n >= 1."""
        return self.prev_p * self.q_val - self.p * self.prev_q


def pq_table(basis: JacobiBasis, n_max: int, z, bk=FLOAT64, derivative: bool = False):
    """Rows P_0..P_{n_max} and Q_0..Q_{n_max} at z (vectorised over z in binary64).

    Returns (P, Q) or (P, Q, dP, dQ); in binary64 each is an array of shape
    (n_max+1,) + shape(z), in extended precision a list of scalars.
    """
    z = bk.arg(z)
    b = basis.values(max(n_max, 1), bk)
    one = z * 0 + 1
    zero = z * 0
    P = [one, z / b[0]]
    Q = [zero, one / b[0]]
    dP = [zero, one / b[0]]
    dQ = [zero, zero]
    for n in range(1, n_max):
        P.append((z * P[n] - b[n - 1] * P[n - 1]) / b[n])
        Q.append((z * Q[n] - b[n - 1] * Q[n - 1]) / b[n])
        if derivative:
            dP.append((P[n] + z * dP[n] - b[n - 1] * dP[n - 1]) / b[n])
            dQ.append((Q[n] + z * dQ[n] - b[n - 1] * dQ[n - 1]) / b[n])
    P, Q = P[: n_max + 1], Q[: n_max + 1]
    out = [P, Q]
    if derivative:
        out += [dP[: n_max + 1], dQ[: n_max + 1]]
    if bk is FLOAT64:
        out = [np.array(r) for r in out]
    return tuple(out)


def eval_pq(basis: JacobiBasis, n: int, z) -> PolyPair:
    """P_n(z), Q_n(z) and their predecessors by forward recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = complex(z)
    P, Q = pq_table(basis, max(n, 1), np.asarray(z))
    prev_p = complex(P[n - 1]) if n >= 1 else 0j
    prev_q = complex(Q[n - 1]) if n >= 1 else 0j
    return PolyPair(n, z, complex(P[n]), complex(Q[n]), prev_p, prev_q)


# --- alpha/beta coefficient tables -------------------------------------------------


@dataclass
class CoeffTable:
    """alpha_{2m-1,n} and beta_{2m,n} stored as (sign, log|value|).

    All entries are nonnegative, so sign is 0 (zero entry) or +1.
    ``alpha_log[m, n+1]`` holds log alpha_{2m-1,n} for n >= -1;
    ``beta_log[m, n+1]`` holds log beta_{2m,n}.
    """

    alpha_log: np.ndarray
    beta_log: np.ndarray
    max_n: int

    def alpha(self, m: int, n: int) -> float:
        return _entry(self.alpha_log, m, n)

    def beta(self, m: int, n: int) -> float:
        return _entry(self.beta_log, m, n)

    def log_alpha(self, m: int, n: int) -> float:
        return float(self.alpha_log[m, n + 1])

    def log_beta(self, m: int, n: int) -> float:
        return float(self.beta_log[m, n + 1])

    def sign_alpha(self, m: int, n: int) -> int:
        return 0 if np.isneginf(self.alpha_log[m, n + 1]) else 1

    def sign_beta(self, m: int, n: int) -> int:
        return 0 if np.isneginf(self.beta_log[m, n + 1]) else 1


def _entry(tab, m, n):
    if m < 0 or m >= tab.shape[0] or n + 1 < 0 or n + 1 >= tab.shape[1]:
        return 0.0
    return float(np.exp(tab[m, n + 1]))


def coeff_table(p: QParam, max_n: int) -> CoeffTable:
    """Fill alpha/beta by the recursions

        alpha_{2m-1,n} = [n] alpha_{2m-3,n-2} + alpha_{2m-1,n-1}
        beta_{2m,n}    = [n] beta_{2m-2,n-2}  + beta_{2m,n-1}

    in log space, with alpha_{-1,n} = 1 (n >= -1) and beta_{0,n} = 1 (n >= 0).
    """
    if max_n < 0:
        raise ValueError("max_n must be nonnegative")
    p = p.with_digits(None)
    logq = log_q_number_table(p, max(max_n, 1))
    mmax = max_n // 2 + 2
    A = np.full((mmax, max_n + 2), -np.inf)
    B = np.full((mmax, max_n + 2), -np.inf)
    A[0, :] = 0.0
    B[0, 1:] = 0.0
    for n in range(1, max_n + 1):
        c = n + 1
        for m in range(1, mmax):
            lo = A[m - 1, c - 2] + logq[n] if c >= 2 else -np.inf
            A[m, c] = np.logaddexp(lo, A[m, c - 1])
            lo = B[m - 1, c - 2] + logq[n] if c >= 2 else -np.inf
            B[m, c] = np.logaddexp(lo, B[m, c - 1])
    return CoeffTable(A, B, max_n)


def nested_alpha(p: QParam, m: int, n: int) -> float:
    """alpha_{2m-1,n} by brute-force nested summation (oracle; small m, n only).

    Sum over k_1 > k_2 > ... > k_m with k_j - k_{j+1} >= 2, k_1 <= n,
    k_m >= 1 of [k_1]...[k_m].
    """
    return _nested(p, m, n, lowest=1)


def nested_beta(p: QParam, m: int, n: int) -> float:
    """beta_{2m,n}: same nested sum as alpha but with innermost index >= 2."""
    return _nested(p, m, n, lowest=2)


def _nested(p, m, n, lowest):
    p = p.with_digits(None)

    def rec(depth, upper):
        if depth == 0:
            return 1.0
        # indices still to place below this one need room 2*(depth-1)
        floor = lowest + 2 * (depth - 1)
        return sum(q_number(p, k) * rec(depth - 1, k - 2) for k in range(floor, upper + 1))

    return float(rec(m, n))


def poly_from_table(table: CoeffTable, p: QParam, n: int, second_kind: bool = False):
    """Ascending monomial coefficients of P_n (or Q_n) from the tables.

    P_n = sum_m (-1)^m alpha_{2m-1,n-1} x^{n-2m} / sqrt([n]!)
    Q_{n+1} = sum_m (-1)^m beta_{2m,n} x^{n-2m} / sqrt([n+1]!)
    """
    p = p.with_digits(None)
    coef = np.zeros(max(n, 0) + 1)
    if not second_kind:
        norm = math.sqrt(q_factorial(p, n))
        for m in range(n // 2 + 1):
            coef[n - 2 * m] = (-1) ** m * table.alpha(m, n - 1)
        return coef / norm
    if n == 0:
        return coef
    d = n - 1
    norm = math.sqrt(q_factorial(p, n))
    for m in range(d // 2 + 1):
        coef[d - 2 * m] = (-1) ** m * table.beta(m, d)
    return coef / norm


def q_hermite_closed(p: QParam, n: int, table: CoeffTable | None = None) -> np.ndarray:
    """Ascending coefficients of the monic q-Hermite polynomial H_n.

    H_n = sum_k (-1)^k x^{n-2k} alpha_{2k-1,n-1}; the innermost nested sum
    runs over [m_1].
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > N_CLOSED_MAX:
        raise OverflowError(f"closed-form coefficients are capped at n <= {N_CLOSED_MAX}")
    table = table if table is not None and table.max_n >= n else coeff_table(p, max(n, 1))
    coef = np.zeros(n + 1)
    for k in range(n // 2 + 1):
        coef[n - 2 * k] = (-1) ** k * table.alpha(k, n - 1)
    return coef


def normalization_bridge(p: QParam, n: int, z) -> float:
    """|H_n(z) - sqrt([n]!) P_n(z)| / max(1, |H_n(z)|)."""
    h = np.polynomial.polynomial.polyval(complex(z), q_hermite_closed(p, n))
    pn = eval_pq(JacobiBasis.q_oscillator(p), n, z).p
    scaled = math.sqrt(q_factorial(p.with_digits(None), n)) * pn
    return abs(h - scaled) / max(1.0, abs(h))


def leading_identities(p: QParam, pmax: int) -> dict:
    """Check the top coefficients against q-double-factorial closed forms.

    alpha_{2p-1,2p} = [2p]!! Psi_p,  alpha_{2p-1,2p-1} = [2p-1]!!,
    beta_{2p,2p+1} = [2p+1]!! Phi_p, beta_{2p,2p} = [2p]!!,
    where Psi_p, Phi_p are the partial sums of the Psi/Phi series.
    """
    if pmax < 1:
        raise ValueError("pmax must be >= 1")
    from .qkernel import log_double_factorial_table

    p = p.with_digits(None)
    tab = coeff_table(p, 2 * pmax + 1)
    ldf = log_double_factorial_table(p, 2 * pmax + 1)
    worst = 0.0
    rows = []
    for j in range(1, pmax + 1):
        psi_j = sum(math.exp(ldf[2 * k - 1] - ldf[2 * k]) for k in range(1, j + 1)) + 1.0
        phi_j = sum(math.exp(ldf[2 * k] - ldf[2 * k + 1]) for k in range(1, j + 1)) + 1.0
        checks = {
            "alpha_even": (tab.log_alpha(j, 2 * j), ldf[2 * j] + math.log(psi_j)),
            "alpha_odd": (tab.log_alpha(j, 2 * j - 1), ldf[2 * j - 1]),
            "beta_odd": (tab.log_beta(j, 2 * j + 1), ldf[2 * j + 1] + math.log(phi_j)),
            "beta_even": (tab.log_beta(j, 2 * j), ldf[2 * j]),
        }
        for name, (got, want) in checks.items():
            err = abs(math.expm1(got - want))
            worst = max(worst, err)
            rows.append((j, name, err))
    return {"max_rel_residual": worst, "rows": rows}


# --- classification ---------------------------------------------------------------


@dataclass
class Classification:
    verdict: str
    evidence: dict = field(default_factory=dict)

    def __str__(self):
        return self.verdict


def classify(basis: JacobiBasis, n_probe: int = 64) -> Classification:
    """Decide determinacy from a finite probe of b_n.

    indeterminate: b_{n-1} b_{n+1} <= b_n^2 on the probe and the ratios
    b_n/b_{n+1} are nonincreasing on the tail and bounded away from 1
    (ratio test makes sum 1/b_n converge).
    determinate: the local growth exponent of b_n is nonincreasing and
    at most 1 on the tail, so sum 1/b_n diverges like a p-series with p <= 1.
    Anything else is inconclusive.
    """
    if n_probe < 16:
        raise ValueError("n_probe must be >= 16")
    n = n_probe
    if basis.length is not None:
        n = min(n, basis.length)
        if n < 16:
            return Classification("inconclusive", {"reason": "basis prefix shorter than 16"})
    with np.errstate(over="ignore"):
        b = np.asarray(basis.values(n), dtype=float)
    if not np.all(np.isfinite(b)):
        k = int(np.argmax(~np.isfinite(b)))
        b = b[:k]
        n = k
    lb = np.log(b)
    # log-concavity: 2 log b_n - log b_{n-1} - log b_{n+1} >= 0
    concav = 2 * lb[1:-1] - lb[:-2] - lb[2:]
    concave = bool(np.all(concav >= -1e-12))
    partial = float(np.sum(1.0 / b))
    tail = slice(n // 2, n - 1)
    ratios = b[:-1] / b[1:]
    rt = ratios[tail]
    idx = np.arange(n, dtype=float)
    expo = (lb[1:] - lb[:-1]) / np.log((idx[1:] + 1) / idx[1:])
    et = expo[tail]
    evidence = {
        "n_probe": n,
        "partial_sum_inv_b": partial,
        "log_concavity_margin": float(np.min(concav)) if concav.size else 0.0,
        "tail_ratio_max": float(np.max(rt)),
        "tail_growth_exponent": [float(et.min()), float(et.max())],
    }
    ratio_ok = bool(np.all(np.diff(rt) <= 1e-12) and rt.max() < 1 - 1e-6)
    if concave and ratio_ok:
        evidence["ratio_bound"] = float(rt.max())
        tail_est = float(b[-1] ** -1 * rt.max() / (1 - rt.max()))
        evidence["tail_sum_bound"] = tail_est
        return Classification("indeterminate", evidence)
    if np.all(np.diff(et) <= 1e-12) and et.max() <= 1.0 + 1e-12:
        return Classification("determinate", evidence)
    return Classification("inconclusive", evidence)
