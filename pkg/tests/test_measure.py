import math

import numpy as np
import pytest

from conftest import ctx_for, measure_for
from qmoment import (
    ExtensionParam, SeriesContext, auto_window, build_measure, christoffel_mass, find_support,
    mass_sigma0, mass_sigma_pi, measure_from_t, moments_exact, t_from_phi0, verify_measure,
)
from qmoment.measure import (
    mass_general, mass_sigma_pi_raw, nevanlinna_mass, refine_root,
)

# positive atoms at q = 2, frozen from the N = 80 / N = 81 Gauss rules of the oracle
SIGMA0_Q2 = [
    (0.67616679466432, 0.44040776888886),
    (2.20135207226949, 0.05899001009694),
    (4.60324487702966, 6.01890107558e-4),
    (9.23563284539774, 3.30896188307e-7),
    (18.4749619583545, 1.04451030547e-11),
]
SIGMA_PI_Q2 = [
    (0.0, 0.55705817203203),
    (1.38837969302265, 0.21291236144470),
    (3.22359002381531, 8.53825274420e-3),
    (6.52641238780618, 2.02971515386e-5),
    (13.0632477737079, 2.64351866323e-9),
]


def _check_frozen(meas, table):
    pos = meas.x >= 0
    x, w = meas.x[pos], meas.masses[pos]
    for k, (xk, wk) in enumerate(table):
        assert x[k] == pytest.approx(xk, rel=1e-10, abs=1e-12)
        assert w[k] == pytest.approx(wk, rel=1e-8)


def test_sigma0_atoms(sigma0_q2):
    _check_frozen(sigma0_q2, SIGMA0_Q2)
    assert sigma0_q2.flags == []
    assert len(sigma0_q2.atoms) == 18


def test_sigma_pi_atoms(sigma_pi_q2):
    _check_frozen(sigma_pi_q2, SIGMA_PI_Q2)
    assert 1 / sigma_pi_q2.masses[sigma_pi_q2.x == 0][0] == pytest.approx(1.7951446549149510, rel=1e-14)


@pytest.mark.parametrize("fx", ["sigma0_q2", "sigma_pi_q2"])
def test_symmetric_measures(fx, request):
    m = request.getfixturevalue(fx)
    assert m.symmetric
    assert np.allclose(np.sort(m.x), np.sort(-m.x), rtol=0, atol=0)
    assert m.total_mass == pytest.approx(1.0, abs=1e-13)
    assert np.all(m.masses > 0)
    mo = m.moments(11)
    assert np.all(mo[1::2] == 0)


def test_interlacing(sigma0_q2, sigma_pi_q2):
    x = np.sort(np.concatenate([sigma0_q2.x, sigma_pi_q2.x]))
    src = np.isin(x, sigma0_q2.x)
    assert np.all(src[1:] != src[:-1])


def test_mass_methods_agree(ctx2, sigma0_q2, sigma_pi_q2):
    for m in (sigma0_q2, sigma_pi_q2):
        assert m.max_method_spread() <= 1e-9
    x = float(SIGMA0_Q2[1][0])
    assert mass_sigma0(ctx2, x) == pytest.approx(christoffel_mass(ctx2, x), rel=1e-10)


def test_sigma_pi_closed_form_vs_coefficient_table(ctx2):
    for x, w in SIGMA_PI_Q2[1:4]:
        assert mass_sigma_pi_raw(ctx2, x) == pytest.approx(mass_sigma_pi(ctx2, x), rel=1e-9)


def test_christoffel_at_zero_is_inverse_psi(ctx2):
    assert mass_sigma_pi(ctx2, 0.0) == pytest.approx(1 / 1.7951446549149510, rel=1e-14)


@pytest.mark.parametrize("q,ph", [(2.0, 0.0), (2.0, math.pi), (0.5, 0.0), (0.5, math.pi)])
def test_verify_measure(q, ph):
    v = verify_measure(ctx_for(q), measure_for(q, ph), 12, 8)
    assert v["moment_residual_max"] <= 1e-6
    assert v["moment_relative_max"] <= 1e-9
    assert v["ortho_residual_max"] <= 1e-10
    assert abs(v["total_mass"] - 1) <= 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("q", [0.3, 5.0])
def test_other_q(q):
    ctx = ctx_for(q)
    s = np.array([float(v) for v in moments_exact(ctx.basis, 12)])
    for ph in (0.0, math.pi):
        m = measure_for(q, ph)
        assert abs(m.total_mass - 1) <= 1e-12
        assert np.max(np.abs(m.moments(12) - s) / np.maximum(1, s)) <= 1e-9
        assert m.max_method_spread() <= 1e-7


def test_general_phi0_reflection(ctx2):
    a = build_measure(ctx2, ExtensionParam(1.0))
    b = build_measure(ctx2, ExtensionParam(2 * math.pi - 1.0))
    assert not a.symmetric
    assert a.total_mass == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.sort(a.x), np.sort(-b.x), rtol=1e-12, atol=1e-14)
    ia, ib = np.argsort(a.x), np.argsort(-b.x)
    assert np.allclose(a.masses[ia], b.masses[ib], rtol=1e-8)
    # not symmetric: the atom set is not closed under x -> -x
    assert not np.allclose(np.sort(a.x), np.sort(-a.x), atol=1e-6)
    assert a.max_method_spread() <= 1e-6


def test_half_pi_normalization(ctx2):
    m = build_measure(ctx2, ExtensionParam(math.pi / 2))
    s = np.array([float(v) for v in moments_exact(ctx2.basis, 12)])
    assert abs(m.total_mass - 1) <= 1e-12
    assert np.max(np.abs(m.moments(12) - s) / np.maximum(1, s)) <= 1e-9


def test_residue_mass_matches_closed_form(ctx2):
    x = SIGMA0_Q2[1][0]
    ext = ExtensionParam(0.0)
    xr = float(refine_root(ctx2, ext, x))
    w = mass_sigma0(ctx2, xr)
    assert nevanlinna_mass(ctx2, ext, xr) == pytest.approx(w, rel=1e-11)
    assert mass_general(ctx2, ext, xr, mass_hint=w, spacing=1.5) == pytest.approx(w, rel=1e-8)


@pytest.mark.parametrize("t,ph", [(0.0, math.pi), (math.inf, 0.0)])
def test_measure_from_t_endpoints(ctx2, t, ph, sigma0_q2, sigma_pi_q2):
    ref = sigma_pi_q2 if ph else sigma0_q2
    m = measure_from_t(ctx2, t)
    assert np.allclose(m.x, ref.x, rtol=0, atol=1e-12)
    assert np.allclose(m.masses, ref.masses, rtol=1e-9)


def test_measure_from_t_general(ctx2):
    ext = ExtensionParam(2.2)
    a = measure_from_t(ctx2, t_from_phi0(ctx2, ext))
    b = build_measure(ctx2, ext)
    assert np.allclose(a.x, b.x, rtol=1e-11, atol=1e-12)
    assert np.allclose(a.masses, b.masses, rtol=1e-8)


def test_auto_window_keeps_moment_weight(ctx2, sigma0_q2):
    W = auto_window(ctx2)
    assert sigma0_q2.window == W
    assert np.all(np.abs(sigma0_q2.x) <= W)
    # the dropped tail cannot move s_12 by more than the floor
    assert christoffel_mass(ctx2, W) * W**12 < 1e-8


def test_q_inverse_identical(sigma0_q2):
    m = measure_for(0.5, 0.0)
    assert np.array_equal(m.x, sigma0_q2.x)
    assert np.array_equal(m.masses, sigma0_q2.masses)


class _Synthetic:
    """Stand-in support function with known roots."""

    symmetric = True

    def __init__(self, roots, offset=0.0):
        self.roots, self.offset = roots, offset

    def evaluate(self, x, derivative=False):
        x = np.asarray(x, dtype=float)
        a, b = self.roots
        F = (x - a) * (x - b) + self.offset
        return F, (2 * x - a - b), None

    def __call__(self, x):
        return self.evaluate(x)[0]

    def certify(self, x):
        return np.ones(np.shape(x), dtype=bool)


def test_hidden_root_pair(ctx2):
    # both roots fall between two adjacent seeds
    s = find_support(ctx2, ExtensionParam(0.0), window=10.0, support=_Synthetic((2.0101, 2.0102)))
    assert len(s.roots) == 2
    assert s.roots == pytest.approx([2.0101, 2.0102], abs=1e-11)


def test_double_root_is_flagged(ctx2):
    s = find_support(ctx2, ExtensionParam(0.0), window=10.0, support=_Synthetic((2.0137, 2.0137)))
    assert s.roots == []
    assert [f["kind"] for f in s.flags] == ["suspected_double_root"]


def test_validation(ctx2):
    with pytest.raises(ValueError):
        find_support(ctx2, ExtensionParam(0.0), tol_root=0)
    with pytest.raises(ValueError):
        find_support(ctx2, ExtensionParam(0.0), window=-1.0)


def test_explicit_window_truncates(ctx2):
    m = build_measure(ctx2, ExtensionParam(0.0), window=5.0)
    assert len(m.atoms) == 6
    assert m.total_mass == pytest.approx(1 - 2 * 3.309e-7, abs=1e-9)


def test_light_atoms_need_escalation(sigma0_q2):
    # in binary64 alone the masses of far atoms drown in cancellation
    lo = build_measure(SeriesContext.for_q(2.0), ExtensionParam(0.0), escalate=False, cross_check=False)
    dropped = [f for f in lo.flags if f["kind"] == "removed_nonpositive_mass"]
    assert dropped and all(abs(f["mass"]) < 1e-15 for f in dropped)
    assert sigma0_q2.flags == []
    assert min(sigma0_q2.masses) < 1e-40
    common = np.isin(sigma0_q2.x, lo.x)
    heavy = sigma0_q2.masses[common] > 1e-12
    assert np.allclose(lo.masses[np.isin(lo.x, sigma0_q2.x)][heavy], sigma0_q2.masses[common][heavy], rtol=1e-6)
