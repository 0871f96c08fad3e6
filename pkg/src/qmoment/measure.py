"""Atomic spectral measures of the self-adjoint extensions.

The support of the phi0 measure is the zero set of

    F(x) = cos(phi0/2) a1(x)/A1 + sin(phi0/2) x pa2(x)/PsiA2,

which is a1 itself for phi0 = 0 and x pa2 for phi0 = pi.  Masses come from
closed residue formulas for those two cases and from Richardson
extrapolation of tau Im m(x + i tau) in general; every atom is also checked
against the Christoffel mass 1/sum P_n(x)^2.

Light atoms sit where the series values are many orders of magnitude below
their individual terms, so atoms whose Christoffel estimate is small are
re-solved in extended precision with enough digits to absorb the
cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qkernel import FLOAT64
from .series import SeriesContext, constants_at_i, parity_sums
from .weyl import ExtensionParam, PoleProximityError, m_at_i, m_of_z, phi0_from_t, t_from_phi0

ESCALATE_BELOW = 1e-5
MOMENT_ORDER = 12
LEVERAGE_LIMIT = 1e3
WINDOW_FLOOR = 1e-10


class DegenerateRootError(ArithmeticError):
    """Root where the mass formula's derivative vanishes (zero-mass branch)."""


class ExtrapolationError(ArithmeticError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


def _kind(ext: ExtensionParam) -> str:
    if ext.phi0 == 0.0:
        return "zero"
    if ext.phi0 == math.pi:
        return "pi"
    return "general"


# --- support function ----------------------------------------------------------


@dataclass
class SupportFunction:
    """F(x) for one extension; exact a1 (phi0 = 0) or x pa2 (phi0 = pi)."""

    ctx: SeriesContext
    phi0: ExtensionParam

    def _coeffs(self, ctx):
        kind = _kind(self.phi0)
        if kind == "zero":
            return 1, 0
        if kind == "pi":
            return 0, 1
        c = constants_at_i(ctx)
        bk = ctx.bk
        h = self.phi0.angle(bk) / 2
        return bk.cos(h) / c["A1"], bk.sin(h) / c["PsiA2"]

    def evaluate(self, x, derivative=False, ctx=None):
        """F (and F') at real x; returns (F, F', ParityValues)."""
        ctx = ctx or self.ctx
        ca, cb = self._coeffs(ctx)
        names = tuple(n for n, c in (("a1", ca), ("pa2", cb)) if not _is_zero(c))
        r = parity_sums(ctx, x, derivative=derivative, names=names)
        x = ctx.bk.arg(x)
        F = 0
        dF = 0
        if "a1" in names:
            F = F + ca * r.values["a1"]
            if derivative:
                dF = dF + ca * r.derivatives["a1"]
        if "pa2" in names:
            F = F + cb * x * r.values["pa2"]
            if derivative:
                dF = dF + cb * (r.values["pa2"] + x * r.derivatives["pa2"])
        return F, dF, r

    def __call__(self, x):
        return self.evaluate(x)[0]

    @property
    def symmetric(self) -> bool:
        return _kind(self.phi0) != "general"

    def with_ctx(self, ctx):
        return SupportFunction(ctx, self.phi0)

    def certify(self, x) -> np.ndarray:
        """Partial sums against their telescoped closed values at the final truncation.

        Returns a boolean per point: the two representations agree to
        rounding level and have the same sign.
        """
        ca, cb = self._coeffs(self.ctx)
        names = tuple(n for n, c in (("a1", ca), ("pa2", cb)) if not _is_zero(c))
        return _certify(self.ctx, x, names)


def _certify(ctx, x, names):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = parity_sums(ctx, x, names=names)
    ok = np.ones(x.shape, dtype=bool)
    # |P_n(x)| <= rho(x)^(-1/2) bounds the size of every term
    with np.errstate(divide="ignore"):
        big = 1.0 / np.sqrt(np.atleast_1d(christoffel_mass(ctx, x)))
    for name in names:
        S = r.values[name] * (x if name == "pa2" else 1)
        T = r.telescoped["a1" if name == "a1" else "z_pa2"]
        slack = 1e3 * FLOAT64.eps * r.terms_used * np.maximum(np.abs(x), 1) * \
            np.maximum(1.0, big) + 10 * r.tail_bound[name]
        ok &= np.abs(S - T) <= slack + 1e-9 * np.abs(T)
    return ok


def _is_zero(c):
    return isinstance(c, int) and c == 0


def support_function(ctx: SeriesContext, ext: ExtensionParam) -> SupportFunction:
    return SupportFunction(ctx, ext)


def _base(ctx):
    """Asymptotic growth base Q of b_n^2 (2 when the basis has no q tail)."""
    qp = ctx.basis.qparam
    return qp.base if qp is not None else 2.0


# --- Christoffel function ------------------------------------------------------


def christoffel_mass(ctx: SeriesContext, x):
    """1/sum_n P_n(x)^2 (vectorised in binary64).

    This is the largest mass any solution of the moment problem can put at
    x, and the exact mass of an extremal measure at its atoms.
    """
    bk = ctx.bk
    x = bk.arg(x)
    rho = 1.0 / _base(ctx)
    n_chunk = 64
    n = n_chunk
    tol = ctx.tol
    while True:
        if bk is FLOAT64:
            from .polynomials import pq_table

            with np.errstate(over="ignore", invalid="ignore"):
                P, _ = pq_table(ctx.basis, n, x, bk)
                sq = P**2
                total = np.sum(sq, axis=0)
            last = sq[-1] + sq[-2]
            b = ctx.basis.values(n + 1)
            past_turn = b[n] > 2 * float(np.max(np.abs(x)))
            with np.errstate(invalid="ignore"):
                done = past_turn and bool(np.all((last * rho / (1 - rho) <= tol * total) | ~np.isfinite(total)))
            if done or n > 20000:
                with np.errstate(divide="ignore", over="ignore"):
                    out = np.where(np.isfinite(total), 1.0 / total, 0.0)
                return float(out) if np.ndim(out) == 0 else out
        else:
            from .polynomials import pq_table

            P, _ = pq_table(ctx.basis, n, x, bk)
            total = sum(p * p for p in P)
            last = P[-1] ** 2 + P[-2] ** 2
            b = ctx.basis.values(n + 1, bk)
            if (b[n] > 2 * abs(x) and last * rho / (1 - rho) <= tol * total) or n > 20000:
                return 1 / total
        n *= 2


# --- window and root search ----------------------------------------------------


def auto_window(ctx: SeriesContext, moment_order: int = MOMENT_ORDER, floor: float = WINDOW_FLOOR,
                x_cap: float = 1e12) -> float:
    """Smallest geometric-grid point beyond which rho(x) max(1,x)^order < floor.

    rho is the Christoffel function; weighting by x^order keeps every atom
    that can still move a moment of that order by more than ``floor``.
    """
    Q = _base(ctx)
    xs = [1.0]
    while xs[-1] < x_cap:
        xs.append(xs[-1] * math.sqrt(Q))
    xs = np.asarray(xs)
    rho = christoffel_mass(ctx, xs)
    weight = rho * np.maximum(1.0, xs) ** moment_order
    above = np.nonzero(weight >= floor)[0]
    if above.size == 0:
        return float(xs[1])
    last = int(above[-1])
    return float(xs[min(last + 2, xs.size - 1)])


def _seeds(ctx, x_max, symmetric):
    Q = _base(ctx)
    x0 = 1.0
    fine = np.linspace(0.0, x0, 129)
    geo = [x0]
    step = Q ** (1.0 / 16)
    while geo[-1] < x_max:
        geo.append(geo[-1] * step)
    pos = np.unique(np.concatenate([fine, np.asarray(geo[1:])]))
    if symmetric:
        return pos
    return np.unique(np.concatenate([-pos[::-1], pos]))


@dataclass
class SupportSearch:
    roots: list
    flags: list = field(default_factory=list)
    window: float = 0.0
    certified: bool = True


def find_support(ctx: SeriesContext, ext: ExtensionParam, window="auto", tol_root: float = 1e-12,
                 max_bisect: int = 200, support=None) -> SupportSearch:
    """Sign-change roots of the support function, refined by bisection.

    For phi0 in {0, pi} only x >= 0 is searched (the measure is even);
    otherwise the whole window [-x_max, x_max] is searched.  ``support``
    replaces the default support function (used for the Nevanlinna path).
    """
    if not tol_root > 0:
        raise ValueError("tol_root must be positive")
    x_max = auto_window(ctx) if window in (None, "auto") else float(window)
    if not (x_max > 0 and math.isfinite(x_max)):
        raise ValueError("window must be positive and finite")
    sf = support if support is not None else SupportFunction(ctx, ext)
    xs = _seeds(ctx, x_max, sf.symmetric)
    F, dF, _ = sf.evaluate(xs, derivative=True)
    F = np.real(F)
    dF = np.real(dF)
    flags = []
    roots = []
    exact = np.nonzero(F == 0)[0]
    roots += [float(xs[i]) for i in exact]
    lo, hi = [], []
    s = np.sign(F)
    cand = []
    for i in range(len(xs) - 1):
        if s[i] * s[i + 1] < 0:
            lo.append(xs[i])
            hi.append(xs[i + 1])
        elif s[i] == s[i + 1] and s[i] != 0 and np.sign(dF[i]) != np.sign(dF[i + 1]):
            cand.append(i)  # extremum inside: look for a hidden pair of roots
    if cand:
        idx = np.asarray(cand)
        for xm, kind_split, i in zip(*_hidden_pairs(sf, xs[idx], xs[idx + 1], F[idx], dF[idx]), idx):
            if kind_split == "pair":
                lo += [xs[i], xm]
                hi += [xm, xs[i + 1]]
            elif kind_split == "double":
                flags.append({"kind": "suspected_double_root", "x": float(xm)})
    if lo:
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        flo = np.real(sf(lo))
        for _ in range(max_bisect):
            width = hi - lo
            active = width > tol_root * np.maximum(1.0, np.abs(lo))
            if not np.any(active):
                break
            mid = 0.5 * (lo + hi)
            stuck = (mid <= lo) | (mid >= hi)
            active &= ~stuck
            if not np.any(active):
                break
            fm = np.real(sf(mid))
            left = (np.sign(fm) == np.sign(flo)) & active
            right = ~left & active
            lo = np.where(left, mid, lo)
            flo = np.where(left, fm, flo)
            hi = np.where(right, mid, hi)
        cert = sf.certify(np.concatenate([lo, hi]))
        if not np.all(cert):
            flags.append({"kind": "uncertified_bracket", "count": int(np.sum(~cert))})
        # endpoint closer to the root by linear interpolation inside the final bracket
        fl = np.real(sf(lo))
        fh = np.real(sf(hi))
        with np.errstate(invalid="ignore", divide="ignore"):
            xr = np.where(fh != fl, lo - fl * (hi - lo) / (fh - fl), 0.5 * (lo + hi))
        xr = np.clip(xr, lo, hi)
        roots += [float(v) for v in xr]
    roots = sorted(set(roots))
    return SupportSearch(roots, flags, x_max, not any(f["kind"] == "uncertified_bracket" for f in flags))


def _hidden_pairs(sf, a, b, fa, dfa, steps: int = 48):
    """Bisect F' on every [a, b] at once; classify the extremum found.

    "double": |F| there is below 1e-9 of its endpoint value (flagged);
    "pair": otherwise, F changes sign at the extremum (two roots between seeds);
    "none": an ordinary extremum.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    sa = np.sign(np.real(dfa))
    for _ in range(steps):
        m = 0.5 * (a + b)
        _, dm, _ = sf.evaluate(m, derivative=True)
        same = np.sign(np.real(dm)) == sa
        a = np.where(same, m, a)
        b = np.where(same, b, m)
    xm = 0.5 * (a + b)
    fm = np.real(sf(xm))
    # a near-zero extremum is ambiguous (double root or unresolvable pair), so it is checked first
    kinds = np.where(np.abs(fm) <= 1e-9 * np.abs(fa), "double",
                     np.where(np.sign(fm) != np.sign(fa), "pair", "none"))
    return list(xm), list(kinds)


# --- refinement and masses -----------------------------------------------------


def refine_root(ctx: SeriesContext, ext: ExtensionParam, x, max_iter: int = 40, support=None):
    """Newton polish of a bracketed root in the context's arithmetic."""
    sf = support.with_ctx(ctx) if support is not None else SupportFunction(ctx, ext)
    bk = ctx.bk
    x = bk.real(x)
    if x == 0:
        return x
    goal = 10 * bk.eps
    for _ in range(max_iter):
        F, dF, _ = sf.evaluate(x, derivative=True)
        F, dF = _re(F, bk), _re(dF, bk)
        if dF == 0:
            break
        dx = F / dF
        x = x - dx
        if abs(dx) <= goal * max(1, abs(x)):
            break
    return x


def _re(v, bk):
    if bk is FLOAT64:
        return float(np.real(v))
    return bk.ctx.re(v)


def mass_sigma0(ctx: SeriesContext, x_k):
    """Closed form for phi0 = 0: -x pb2(x) / a1'(x) at a root of a1."""
    r = parity_sums(ctx, x_k, derivative=True, names=("a1", "pb2"))
    bk = ctx.bk
    d = _re(r.derivatives["a1"], bk)
    num = -_re(bk.arg(x_k) * r.values["pb2"], bk)
    if abs(d) <= 1e3 * bk.eps * max(1.0, abs(num)):
        raise DegenerateRootError(f"a1'(x) vanishes at x = {float(x_k)!r}")
    return num / d


def mass_sigma_pi(ctx: SeriesContext, x_k):
    """Closed form for phi0 = pi: b1(x) / (x pa2'(x)); at x = 0 the Christoffel value 1/Psi."""
    bk = ctx.bk
    if x_k == 0:
        return christoffel_mass(ctx, bk.real(0))
    r = parity_sums(ctx, x_k, derivative=True, names=("pa2", "b1"))
    d = _re(bk.arg(x_k) * r.derivatives["pa2"], bk)
    num = _re(r.values["b1"], bk)
    if abs(d) <= 1e3 * bk.eps * max(1.0, abs(num)):
        raise DegenerateRootError(f"pa2'(x) vanishes at x = {float(x_k)!r}")
    return num / d


def mass_sigma_pi_raw(ctx: SeriesContext, x_k: float, depth: int = 60) -> float:
    """phi0 = pi mass from the coefficient-table series (binary64, small x only).

    numerator:   sum_l 1/[2l]!! sum_m (-1)^(l-m) x^(2(l-m)) beta_{2m,2l-1}   (= b1)
    denominator: sum_l 1/[2l]!! sum_m (-1)^(l-m) 2(l-m) x^(2(l-m)-1) alpha_{2m-1,2l-1}
    The l-sums start at l = 0 for the numerator constant term.
    """
    from .polynomials import coeff_table
    from .qkernel import log_double_factorial_table

    p = ctx.basis.qparam.with_digits(None)
    tab = coeff_table(p, 2 * depth + 1)
    ldf = log_double_factorial_table(p, 2 * depth + 1)
    x = float(x_k)
    num = 1.0
    den = 0.0
    for l in range(1, depth + 1):
        for m in range(l):
            j = l - m
            sgn = (-1) ** j
            num += sgn * x ** (2 * j) * math.exp(tab.log_beta(m, 2 * l - 1) - ldf[2 * l])
            den += sgn * 2 * j * x ** (2 * j - 1) * math.exp(tab.log_alpha(m, 2 * l - 1) - ldf[2 * l])
    return num / (x * den)


def nevanlinna_mass(ctx: SeriesContext, ext: ExtensionParam, x_k):
    """Residue of -(A t - C)/(B t - D) at a root: (A t - C)/(B' t - D')."""
    kind = _kind(ext)
    if kind == "zero":
        return mass_sigma0(ctx, x_k)
    if kind == "pi":
        return mass_sigma_pi(ctx, x_k)
    return nevanlinna_mass_t(ctx, t_from_phi0(ctx, ext), x_k)


def nevanlinna_mass_t(ctx: SeriesContext, t, x_k):
    """(A t - C)/(B' t - D') at a zero of B t - D; t = inf gives A/B'."""
    r = parity_sums(ctx, x_k, derivative=True)
    bk = ctx.bk
    x = bk.arg(x_k)
    v, d = r.values, r.derivatives
    A, C = x * v["pb2"], v["b1"]
    dB = -d["a1"]
    dD = v["pa2"] + x * d["pa2"]
    if _is_inf(t):
        return _re(A / dB, bk)
    return _re((A * t - C) / (dB * t - dD), bk)


def _is_inf(t):
    return t is None or (isinstance(t, float) and math.isinf(t))


@dataclass
class NevanlinnaSupport:
    """t a1(x) + x pa2(x), the zero set of B t - D (a1 alone for t = inf)."""

    ctx: SeriesContext
    t: float

    @property
    def symmetric(self) -> bool:
        return _is_inf(self.t) or self.t == 0

    def with_ctx(self, ctx):
        return NevanlinnaSupport(ctx, self.t)

    def _names(self):
        if _is_inf(self.t):
            return ("a1",)
        return ("pa2",) if self.t == 0 else ("a1", "pa2")

    def evaluate(self, x, derivative=False):
        ctx = self.ctx
        names = self._names()
        r = parity_sums(ctx, x, derivative=derivative, names=names)
        x = ctx.bk.arg(x)
        if _is_inf(self.t):
            return r.values["a1"], (r.derivatives["a1"] if derivative else 0), r
        F = x * r.values["pa2"]
        dF = (r.values["pa2"] + x * r.derivatives["pa2"]) if derivative else 0
        if "a1" in names:
            F = F + self.t * r.values["a1"]
            if derivative:
                dF = dF + self.t * r.derivatives["a1"]
        return F, dF, r

    def __call__(self, x):
        return self.evaluate(x)[0]

    def certify(self, x):
        return _certify(self.ctx, x, self._names())


def measure_from_t(ctx: SeriesContext, t: float, window="auto", tol_root: float = 1e-12) -> AtomicMeasure:
    """Extremal measure of Nevanlinna parameter t built from A, B, C, D alone.

    Independent of the phi0 machinery except for the shared series, so
    t = 0 and t = inf can be compared with the pi and 0 measures.
    """
    sup = NevanlinnaSupport(ctx, t)
    search = find_support(ctx, None, window, tol_root, support=sup)
    atoms = []
    flags = list(search.flags)
    for x0 in search.roots:
        m_est = float(christoffel_mass(ctx, x0))
        lever = m_est * max(1.0, abs(x0)) ** MOMENT_ORDER
        digits = _digits_for(m_est) if (m_est < ESCALATE_BELOW or lever > LEVERAGE_LIMIT) else None
        c = ctx.with_digits(digits) if digits else ctx
        x = refine_root(c, None, x0, support=sup) if x0 != 0 else c.bk.real(0)
        mass = nevanlinna_mass_t(c, t, x)
        if not mass > 0:
            flags.append({"kind": "removed_nonpositive_mass", "x": float(x), "mass": float(mass)})
            continue
        atoms.append(Atom(float(x), float(mass), 0.0, float(mass), None, None, digits))
    if sup.symmetric:
        atoms = [Atom(-a.x, a.mass, a.residual, a.closed_form, None, None, a.digits)
                 for a in atoms if a.x != 0] + atoms
    atoms.sort(key=lambda a: a.x)
    ext = phi0_from_t(ctx, t)
    return AtomicMeasure(atoms, ext, math.fsum(a.mass for a in atoms), search.window, tol_root, flags,
                         ctx.basis.qparam.q if ctx.basis.qparam is not None else None)


def _richardson(vals):
    """Richardson table in tau^2 for tau halving; returns (best, error estimate)."""
    T = [list(vals)]
    for lvl in range(1, len(vals)):
        f = 4**lvl
        prev = T[-1]
        T.append([(f * prev[j + 1] - prev[j]) / (f - 1) for j in range(len(prev) - 1)])
    best = T[-1][0]
    err = abs(best - T[-2][-1]) if len(T) > 1 else abs(best)
    return best, err


def mass_general(ctx: SeriesContext, ext: ExtensionParam, x_k, mass_hint=None, spacing=None,
                 levels: int = 4, mi=None):
    """lim tau Im m(x_k + i tau) by Richardson extrapolation in tau^2.

    tau starts at 1e-2 * spacing * sqrt(mass_hint), which keeps the
    contribution of every other atom (about (tau/d)^2 times its mass)
    small against this atom's mass before extrapolation.
    """
    bk = ctx.bk
    if mass_hint is None:
        mass_hint = float(christoffel_mass(ctx, x_k))
    if spacing is None:
        spacing = max(1.0, abs(float(x_k)))
    if mi is None:
        mi = m_at_i(ctx, ext)
    tau0 = 1e-2 * spacing * math.sqrt(max(mass_hint, 1e-300))
    for _attempt in range(4):
        vals = []
        try:
            for j in range(levels):
                tau = bk.real(tau0) / 2**j
                z = bk.arg(x_k) + 1j * tau if bk is not FLOAT64 else complex(float(x_k), float(tau))
                vals.append(tau * _im(m_of_z(ctx, ext, z, mi), bk))
        except PoleProximityError:
            tau0 *= 4
            continue
        best, err = _richardson(vals)
        if err <= 1e-7 * abs(best):
            return best
        tau0 /= 4
    raise ExtrapolationError(f"residue extrapolation did not settle at x = {float(x_k)!r}",
                             {"x": float(x_k), "values": [float(v) for v in vals], "tau0": tau0})


def _im(v, bk):
    if bk is FLOAT64:
        return float(np.imag(v))
    return bk.ctx.im(v)


# --- the pipeline --------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    x: float
    mass: float
    residual: float
    closed_form: float | None = None
    christoffel: float | None = None
    residue: float | None = None
    digits: int | None = None

    def method_spread(self) -> float:
        """Largest pairwise relative gap among the available mass methods."""
        vals = [v for v in (self.closed_form, self.christoffel, self.residue) if v is not None]
        if len(vals) < 2:
            return 0.0
        ref = max(abs(v) for v in vals)
        return (max(vals) - min(vals)) / ref


@dataclass
class AtomicMeasure:
    atoms: list
    phi0: ExtensionParam
    total_mass: float
    window: float
    tol_root: float
    flags: list = field(default_factory=list)
    q: float | None = None

    @property
    def x(self) -> np.ndarray:
        return np.array([a.x for a in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.atoms])

    def moments(self, n_max: int) -> np.ndarray:
        x, w = self.x, self.masses
        ax, sg = np.abs(x), np.sign(x)
        # vectorized pow is not sign-symmetric; with |x|**n and fsum, mirrored atoms cancel exactly
        return np.array([math.fsum(w * sg**n * ax**n) for n in range(n_max + 1)])

    @property
    def symmetric(self) -> bool:
        return _kind(self.phi0) != "general"

    def max_method_spread(self) -> float:
        return max((a.method_spread() for a in self.atoms), default=0.0)


def _digits_for(mass):
    return int(40 + 2 * math.ceil(max(0.0, -math.log10(max(mass, 1e-300)))))


def build_measure(ctx: SeriesContext, ext: ExtensionParam, window="auto", tol_root: float = 1e-12,
                  cross_check: bool = True, escalate: bool = True) -> AtomicMeasure:
    """Support, masses and cross-checks for the phi0 extension.

    Primary masses: the closed forms for phi0 in {0, pi}, the residue limit
    otherwise.  With ``cross_check`` the Christoffel mass (and for {0, pi}
    also the residue limit) is attached to every atom.
    """
    kind = _kind(ext)
    search = find_support(ctx, ext, window, tol_root)
    roots = search.roots
    flags = list(search.flags)
    est = np.atleast_1d(christoffel_mass(ctx, np.asarray(roots, dtype=float))) if roots else np.zeros(0)
    full = sorted(set(roots) | ({-r for r in roots} if kind != "general" else set()))
    spacing = {}
    for i, r in enumerate(full):
        gaps = [abs(r - full[j]) for j in (i - 1, i + 1) if 0 <= j < len(full)]
        spacing[r] = min(gaps) if gaps else max(1.0, abs(r))
    mi64 = m_at_i(ctx, ext)
    atoms = []
    for x0, m_est in zip(roots, est):
        m_est = float(m_est)
        # light atoms lose digits to cancellation; heavy x^n leverage magnifies any mass error
        if escalate and (m_est < ESCALATE_BELOW or m_est * max(1.0, abs(x0)) ** MOMENT_ORDER > LEVERAGE_LIMIT):
            digits = _digits_for(m_est)
            c = ctx.with_digits(digits)
        else:
            digits = None
            c = ctx
        x = refine_root(c, ext, x0) if x0 != 0 else c.bk.real(0)
        F, dF, _ = SupportFunction(c, ext).evaluate(x, derivative=True)
        residual = abs(float(_re(F, c.bk))) / max(abs(float(_re(dF, c.bk))), 1e-300)
        closed = chris = resid = None
        try:
            if kind == "zero":
                closed = mass_sigma0(c, x)
            elif kind == "pi":
                closed = mass_sigma_pi(c, x)
        except DegenerateRootError:
            flags.append({"kind": "removed_zero_mass_root", "x": float(x)})
            continue
        if cross_check or kind == "general" or closed is None:
            chris = christoffel_mass(c, x)
        mi = mi64 if digits is None else m_at_i(c, ext)
        if kind == "general" or cross_check:
            if kind == "pi" and x == 0:
                resid = None
            else:
                resid = mass_general(c, ext, x, mass_hint=m_est, spacing=spacing[x0], mi=mi)
        primary = closed if closed is not None else resid
        if primary is None:
            primary = chris
        if not primary > 0:
            flags.append({"kind": "removed_nonpositive_mass", "x": float(x), "mass": float(primary)})
            continue
        if kind == "pi" and x == 0:
            closed = chris  # the closed form at the origin is the Christoffel value
        atoms.append(Atom(float(x), float(primary), residual,
                          None if closed is None else float(closed),
                          None if chris is None else float(chris),
                          None if resid is None else float(resid), digits))
    if kind != "general":
        mirrored = [Atom(-a.x, a.mass, a.residual, a.closed_form, a.christoffel, a.residue, a.digits)
                    for a in atoms if a.x != 0]
        atoms = mirrored + atoms
    atoms.sort(key=lambda a: a.x)
    total = math.fsum(a.mass for a in atoms)
    return AtomicMeasure(atoms, ext, total, search.window, tol_root, flags,
                         ctx.basis.qparam.q if ctx.basis.qparam is not None else None)


# --- verification ---------------------------------------------------------------


def verify_measure(ctx: SeriesContext, measure: AtomicMeasure, n_moments: int = 12,
                   n_ortho: int = 8) -> dict:
    """Moment and orthonormality residuals of an atomic measure.

    Moment residuals are absolute, |sum x^n sigma - s_n|, with s_n exact
    from the oracle module (relative ones, divided by max(1, s_n), are
    reported too); orthonormality residuals are
    |sum P_n P_m sigma - delta_nm| for n, m <= n_ortho.
    """
    from .oracle import moments_exact
    from .polynomials import pq_table

    s = moments_exact(ctx.basis, n_moments)
    got = measure.moments(n_moments)
    moment_abs = [abs(g - float(e)) for g, e in zip(got, s)]
    moment_res = [a / max(1.0, abs(float(e))) for a, e in zip(moment_abs, s)]
    x, w = measure.x, measure.masses
    P, _ = pq_table(ctx.basis, n_ortho, x)
    G = (P * w) @ P.T
    ortho = np.abs(G - np.eye(n_ortho + 1))
    return {
        "moment_residuals": moment_abs,
        "moment_residual_max": max(moment_abs),
        "moment_relative_residuals": moment_res,
        "moment_relative_max": max(moment_res),
        "ortho_residual_max": float(np.max(ortho)),
        "ortho_matrix": G,
        "total_mass": measure.total_mass,
    }
