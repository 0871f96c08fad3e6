"""Brute-force ground truth from finite sections of the Jacobi matrix.

Gauss quadrature from an N x N section (nodes by Sturm-sequence bisection,
weights by the Christoffel formula) and exact moments in rational
arithmetic.  Nothing here uses the series machinery, so these results are
independent of everything they are used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polynomials import JacobiBasis, exact_q_number


@dataclass(frozen=True)
class TruncatedMatrix:
    dim: int
    offdiag: np.ndarray

    @property
    def diag(self) -> np.ndarray:
        return np.zeros(self.dim)

    def dense(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def moments(self, n_max: int) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            x = self.nodes.astype(float)
            ax, sg = np.abs(x), np.sign(x)
            terms = [self.weights * sg**n * ax**n for n in range(n_max + 1)]
        return np.array([math.fsum(np.where(self.weights == 0, 0.0, t)) for t in terms])


def truncate(basis: JacobiBasis, N: int) -> TruncatedMatrix:
    """Leading N x N section (zero diagonal, off-diagonal b_0..b_{N-2})."""
    if N < 1:
        raise ValueError("N must be >= 1")
    off = np.asarray(basis.values(N - 1), dtype=float) if N > 1 else np.zeros(0)
    return TruncatedMatrix(N, off)


def sturm_count(m: TruncatedMatrix, x) -> np.ndarray:
    """Number of eigenvalues below each x (LDL^T inertia); one sitting exactly at x counts."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    b2 = m.offdiag**2
    tiny = np.finfo(float).tiny
    d = np.where(x == 0, -tiny, -x)
    count = (d < 0).astype(int)
    with np.errstate(over="ignore"):
        for i in range(1, m.dim):
            d = -x - b2[i - 1] / d
            # a zero pivot is perturbed consistently before it is counted
            d = np.where(d == 0, -tiny, d)
            count += d < 0
    return count


def eigenvalues(m: TruncatedMatrix) -> np.ndarray:
    """All eigenvalues by simultaneous bisection, ascending."""
    N = m.dim
    if N == 1:
        return np.zeros(1)
    bound = 2 * float(np.max(m.offdiag))
    lo = np.full(N, -bound)
    hi = np.full(N, bound)
    k = np.arange(N)
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi) | (hi - lo <= 2e-16 * np.maximum(np.abs(lo), np.abs(hi)))
        if np.all(done):
            break
        c = sturm_count(m, mid)
        # eigenvalue k lies below mid iff more than k eigenvalues are below mid
        below = c > k
        hi = np.where(below & ~done, mid, hi)
        lo = np.where(~below & ~done, mid, lo)
    ev = 0.5 * (lo + hi)
    if N % 2:
        ev[N // 2] = 0.0  # zero diagonal and odd N: exact zero eigenvalue
    return ev


def _christoffel_weights(m: TruncatedMatrix, nodes: np.ndarray) -> np.ndarray:
    """1 / sum_{n<N} P_n(x)^2 with rescaling so no intermediate overflows."""
    b = m.offdiag
    x = nodes
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    total = np.ones_like(x)
    log_scale = np.zeros_like(x)  # P_true = P_stored * exp(log_scale)
    for n in range(m.dim - 1):
        bprev = b[n - 1] if n > 0 else 0.0
        p_next = (x * p - bprev * p_prev) / b[n]
        p_prev, p = p, p_next
        total = total + p * p
        big = np.abs(p) > 1e100
        if np.any(big):
            f = np.where(big, 1e-100, 1.0)
            p, p_prev, total = p * f, p_prev * f, total * f * f
            log_scale = log_scale - np.log(f)
    with np.errstate(under="ignore"):
        return np.exp(-2 * log_scale) / total


def _inverse_iteration_weights(m: TruncatedMatrix, nodes: np.ndarray) -> np.ndarray:
    """Squared first components of eigenvectors by one inverse-iteration solve each."""
    T = m.dense()
    N = m.dim
    out = np.empty(N)
    for j, lam in enumerate(nodes):
        shift = lam + 1e-13 * max(1.0, abs(lam))
        v = np.linalg.solve(T - shift * np.eye(N), np.ones(N))
        v = np.linalg.solve(T - shift * np.eye(N), v / np.linalg.norm(v))
        v /= np.linalg.norm(v)
        out[j] = v[0] ** 2
    return out


def eigen_quadrature(m: TruncatedMatrix, weights: str = "christoffel") -> QuadratureRule:
    """Gauss rule of the section: nodes = eigenvalues = zeros of P_N.

    ``weights="christoffel"`` (default) keeps relative accuracy for tiny
    weights; ``"inverse_iteration"`` is the textbook squared first
    eigenvector component, kept as a cross-check for small N.
    """
    nodes = eigenvalues(m)
    if weights == "christoffel":
        w = _christoffel_weights(m, nodes)
    elif weights == "inverse_iteration":
        w = _inverse_iteration_weights(m, nodes)
    else:
        raise ValueError(f"unknown weights method {weights!r}")
    return QuadratureRule(nodes, w)


def _exact_square(basis: JacobiBasis, k: int) -> Fraction:
    if basis.kind == "q_oscillator":
        return exact_q_number(basis.qparam.q, k + 1)
    if basis.square_rule is not None:
        return basis.square_rule(k)
    return Fraction(basis(k)) ** 2


def moments_exact(basis: JacobiBasis, n_max: int) -> list:
    """s_0..s_{n_max} = (e_0, X^n e_0) as Fractions.

    Works with u_k = b_0...b_{k-1} (X^n e_0)_k, for which one application of
    X reads u_k <- b_{k-1}^2 u_{k-1} + u_{k+1}; only b_n^2 enter.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > 40:
        raise ValueError("moments_exact supports n_max <= 40")
    sq = [_exact_square(basis, k) for k in range(n_max + 1)]
    u = [Fraction(1)] + [Fraction(0)] * (n_max + 1)
    out = [Fraction(1)]
    for n in range(1, n_max + 1):
        new = [Fraction(0)] * len(u)
        for k in range(0, min(n, len(u) - 1) + 1):
            v = u[k + 1] if k + 1 < len(u) else 0
            if k > 0:
                v += sq[k - 1] * u[k - 1]
            new[k] = v
        u = new
        out.append(u[0])
    return out


def gaussian_moments(n_max: int, scale_sq: Fraction = Fraction(1)) -> list:
    """Moments of the harmonic basis b_n = scale sqrt(n+1): (2m-1)!! scale^(2m), odd zero."""
    out = []
    for n in range(n_max + 1):
        if n % 2:
            out.append(Fraction(0))
        else:
            m = n // 2
            out.append(Fraction(math.prod(range(1, 2 * m, 2))) * scale_sq**m)
    return out


def compare_measures(rule: QuadratureRule, measure, n: int, reference=None) -> dict:
    """Moment-by-moment comparison up to degree n (never node by node).

    Gaps are relative, |a - b| / max(1, |b|), against the exact moments when
    ``reference`` is given and against the measure otherwise.
    """
    a = rule.moments(n)
    b = measure.moments(n) if hasattr(measure, "moments") else np.asarray(measure, dtype=float)
    ref = np.asarray([float(v) for v in reference], dtype=float) if reference is not None else b
    gaps = np.abs(a - b) / np.maximum(1.0, np.abs(ref))
    return {"rule_moments": a, "measure_moments": b, "gaps": gaps, "max_gap": float(np.max(gaps))}
