"""Weyl circle at z = i, boundary values m(i), and transport of m to any z.

Limit functions of the normalised polynomials (see ``series``):

    Pe(z) = a1(z)      Po(z) = z pa2(z)      Qo(z) = b1(z)      Qe(z) = -z pb2(z)

The four transfer functions between two points z, w are bilinear in them:

    E0(z,w) = Qo(z) Pe(w) - Po(w) Qe(z)      E1(z,w) = Qo(z) Qe(w) - Qo(w) Qe(z)
    D0(z,w) = Po(w) Pe(z) - Pe(w) Po(z)      D1(z,w) = Qo(w) Pe(z) - Qe(w) Po(z)

and m(z) = (E0 m(w) + E1) / (D0 m(w) + D1) for every extremal measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polynomials import pq_table
from .qkernel import FLOAT64
from .series import SeriesContext, constants_at_i, parity_sums

POLE_THRESHOLD = 1e-13


class PoleProximityError(ArithmeticError):
    """m(z) requested too close to an atom; use residue extraction instead."""


@dataclass(frozen=True)
class ExtensionParam:
    """Self-adjoint extension label phi0, reduced to [0, 2 pi)."""

    phi0: float

    def __post_init__(self):
        v = float(self.phi0)
        if not math.isfinite(v):
            raise ValueError("phi0 must be finite")
        v = math.fmod(v, 2 * math.pi)
        if v < 0:
            v += 2 * math.pi
        if v >= 2 * math.pi:
            v = 0.0
        object.__setattr__(self, "phi0", v)

    def angle(self, bk):
        """phi0 in the backend's arithmetic; the binary64 pi is read as exact pi."""
        if self.phi0 == math.pi:
            return bk.pi
        return bk.real(self.phi0)


@dataclass(frozen=True)
class WeylDisk:
    center: complex
    radius: float
    radius_direct: float | None = None
    center_direct: complex | None = None

    def contains(self, m, tol=1e-10) -> bool:
        return abs(m - self.center) <= self.radius * (1 + tol)


def _const(ctx):
    c = constants_at_i(ctx)
    return c["A1"], c["PsiA2"], c["B1"], c["PhiB2"]


def weyl_disk(ctx: SeriesContext, master_identity: float = 1.0, direct: bool = True) -> WeylDisk:
    """Center and radius of the limit circle at i from the series constants.

    r = 1/(2 A1 PsiA2),  c = (i/2)(A1 B1 + PsiA2 PhiB2)/(A1 PsiA2).  The
    center numerator is assembled as W + 2 PsiA2 PhiB2 with W supplied by
    the master identity (W = 1); passing another value is the canary that
    shows the identity is load bearing.
    """
    A1, PA2, B1, PB2 = _const(ctx)
    r = 1 / (2 * A1 * PA2)
    num = master_identity + 2 * PA2 * PB2
    c = 1j * num / (2 * A1 * PA2)
    rd = cd = None
    if direct:
        rd, cd = disk_direct(ctx)
    if ctx.bk is FLOAT64:
        r, c = float(r), complex(c)
    return WeylDisk(c, r, rd, cd)


def disk_direct(ctx: SeriesContext, n_max: int | None = None):
    """Radius and center from the defining sums over |P_k(i)|^2 and Q_k(i)P_k(-i)."""
    w = 1j
    n = n_max or 64
    while True:
        P, Q = pq_table(ctx.basis, n, np.asarray(w))
        Pm = P.conj()  # P_k(-i) = conj(P_k(i)) for real coefficients
        s = np.abs(P) ** 2
        tail = float(np.sum(s[-8:]))
        total = float(np.sum(s))
        if n_max is not None or tail <= 1e-18 * total or n > 20000:
            break
        n *= 2
    cross = complex(np.sum(Q * Pm))
    return 1.0 / (2 * total), (0.5j - cross) / total


def m_at_i(ctx: SeriesContext, ext: ExtensionParam, master_identity: float = 1.0):
    """m(i) = c - i exp(-i phi0) r, the boundary point of the Weyl circle for phi0."""
    d = weyl_disk(ctx, master_identity, direct=False)
    bk = ctx.bk
    ph = ext.angle(bk)
    rot = bk.cos(ph) - 1j * bk.sin(ph)
    return d.center - 1j * rot * d.radius


def m_at_i_closed_form(ctx: SeriesContext, ext: ExtensionParam) -> dict:
    """Closed-form m(i) in two variants next to the geometric value.

    "literal" omits the factor 1/2 of center and radius and uses A_beta^(2)
    where the center needs A_beta^(1); "corrected" fixes both and must agree
    with the geometric value.
    """
    A1, PA2, B1, PB2 = (float(v) for v in _const(ctx))
    B2 = PB2 / float(constants_at_i(ctx)["Phi"])
    s, c = math.sin(ext.phi0), math.cos(ext.phi0)
    den = A1 * PA2
    literal = complex(-s / den, (-c + A1 * B2 + PA2 * PB2) / den)
    corrected = complex(-s / (2 * den), (-c + A1 * B1 + PA2 * PB2) / (2 * den))
    geo = complex(m_at_i(ctx, ext))
    return {
        "geometric": geo,
        "literal": literal,
        "corrected": corrected,
        "literal_gap": abs(literal - geo),
        "corrected_gap": abs(corrected - geo),
    }


# --- transfer functions ------------------------------------------------------------


def limit_functions(ctx: SeriesContext, z):
    """(Pe, Po, Qo, Qe) at z."""
    r = parity_sums(ctx, z)
    z = ctx.bk.arg(z)
    v = r.values
    return v["a1"], z * v["pa2"], v["b1"], -z * v["pb2"]


def _limits_at_i(ctx):
    A1, PA2, B1, PB2 = _const(ctx)
    return A1, 1j * PA2, B1, -1j * PB2


def transfer(ctx: SeriesContext, z, w=None):
    """(E0, E1, D0, D1)(z, w); w = None means w = i with the limit constants."""
    Pe, Po, Qo, Qe = limit_functions(ctx, z)
    if w is None:
        Pe_w, Po_w, Qo_w, Qe_w = _limits_at_i(ctx)
    else:
        Pe_w, Po_w, Qo_w, Qe_w = limit_functions(ctx, w)
    E0 = Qo * Pe_w - Po_w * Qe
    E1 = Qo * Qe_w - Qo_w * Qe
    D0 = Po_w * Pe - Pe_w * Po
    D1 = Qo_w * Pe - Qe_w * Po
    return E0, E1, D0, D1


def transfer_truncated(ctx: SeriesContext, z, w, n: int):
    """The finite-n transfer functions built from P_n, Q_n directly.

    E0 = b_{n-1}(Q_n(z)P_{n-1}(w) - P_n(w)Q_{n-1}(z)) and similarly; these
    converge to ``transfer`` as n grows and are kept only as a trend check.
    """
    zz = np.asarray([complex(z), complex(w)])
    P, Q = pq_table(ctx.basis, n, zz)
    b = ctx.basis.values(n)[n - 1]
    Pz, Pw = P[:, 0], P[:, 1]
    Qz, Qw = Q[:, 0], Q[:, 1]
    E0 = b * (Qz[n] * Pw[n - 1] - Pw[n] * Qz[n - 1])
    E1 = b * (Qz[n] * Qw[n - 1] - Qw[n] * Qz[n - 1])
    D0 = b * (Pw[n] * Pz[n - 1] - Pw[n - 1] * Pz[n])
    D1 = b * (Qw[n] * Pz[n - 1] - Qw[n - 1] * Pz[n])
    return E0, E1, D0, D1


def m_of_z(ctx: SeriesContext, ext: ExtensionParam, z, mi=None):
    """Stieltjes transform of the extremal measure for phi0, at z (scalar or array)."""
    if mi is None:
        mi = m_at_i(ctx, ext)
    E0, E1, D0, D1 = transfer(ctx, z)
    num = E0 * mi + E1
    den = D0 * mi + D1
    bk = ctx.bk
    if bk is FLOAT64:
        bad = np.abs(den) < POLE_THRESHOLD * np.abs(num)
        if np.any(bad):
            raise PoleProximityError("m(z) requested at a numerical pole")
        out = num / den
        return complex(out) if np.ndim(out) == 0 else out
    if abs(den) < POLE_THRESHOLD * abs(num):
        raise PoleProximityError("m(z) requested at a numerical pole")
    return num / den


# --- Nevanlinna matrix ----------------------------------------------------------


@dataclass
class NevanlinnaFns:
    z: object
    E0: object
    E1: object
    D0: object
    D1: object

    @property
    def A(self):
        return self.E1

    @property
    def B(self):
        return -self.D1

    @property
    def C(self):
        return self.E0

    @property
    def D(self):
        return -self.D0

    def m_t(self, t):
        """Stieltjes transform of the extremal measure with real parameter t (inf allowed).

        With the matrix entries taken verbatim, the transform is
        -(A t - C)/(B t - D); the leading minus is what makes t = 0 and
        t = inf reproduce the phi0 = pi and phi0 = 0 measures.
        """
        if t is None or (isinstance(t, float) and math.isinf(t)):
            return -self.A / self.B
        return -(self.A * t - self.C) / (self.B * t - self.D)

    def determinant(self):
        """A D - B C; equals 1 for a Nevanlinna matrix."""
        return self.A * self.D - self.B * self.C


def nevanlinna_matrix(ctx: SeriesContext, z) -> NevanlinnaFns:
    """Entries from the transfer functions at reference point 0."""
    Pe, Po, Qo, Qe = limit_functions(ctx, z)
    # at w = 0: Pe = 1, Po = 0, Qo = 1, Qe = 0
    E0 = Qo
    E1 = -Qe
    D0 = -Po
    D1 = Pe
    return NevanlinnaFns(z, E0, E1, D0, D1)


def t_from_phi0(ctx: SeriesContext, ext: ExtensionParam) -> float:
    """Nevanlinna parameter of the phi0 extension: t = cot(phi0/2) PsiA2/A1 (inf at phi0 = 0)."""
    A1, PA2, _, _ = (float(v) for v in _const(ctx))
    h = ext.phi0 / 2
    s = math.sin(h)
    if s == 0:
        return math.inf
    return math.cos(h) / s * PA2 / A1


def phi0_from_t(ctx: SeriesContext, t: float) -> ExtensionParam:
    A1, PA2, _, _ = (float(v) for v in _const(ctx))
    if math.isinf(t):
        return ExtensionParam(0.0)
    return ExtensionParam(2 * math.atan2(1.0, t * A1 / PA2))


def jump(ctx: SeriesContext, ext: ExtensionParam, gamma, tau, mi=None):
    """m(z) - m(conj z) at z = gamma + i tau."""
    z = np.asarray(gamma) + 1j * tau
    mz = m_of_z(ctx, ext, z, mi)
    mzb = m_of_z(ctx, ext, np.conj(z), mi)
    return mz - mzb


def imag_jump(ctx: SeriesContext, ext: ExtensionParam, gamma, tau, mi=None):
    """psi(gamma; tau) = Im(m(z) - m(conj z)) / (2 pi), the smoothed density."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    j = jump(ctx, ext, gamma, tau, mi)
    out = np.imag(j) / (2 * math.pi)
    return float(out) if np.ndim(out) == 0 else out
