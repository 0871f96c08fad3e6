import math

import mpmath
import numpy as np
import pytest

from conftest import GRID, recurrence
from qmoment import (
    ExtensionParam, SeriesContext, m_at_i, m_of_z, nevanlinna_matrix, phi0_from_t, t_from_phi0,
    weyl_disk,
)
from qmoment.weyl import PoleProximityError, imag_jump, m_at_i_closed_form, transfer, transfer_truncated

PHIS = 2 * np.pi * np.arange(64) / 64


def test_extension_param_reduction():
    assert ExtensionParam(2 * math.pi).phi0 == 0.0
    assert ExtensionParam(-math.pi / 2).phi0 == pytest.approx(1.5 * math.pi)
    with pytest.raises(ValueError):
        ExtensionParam(float("nan"))


def test_disk_q2_against_oracle(ctx2):
    # r = 1/(2 sum |P_k(i)|^2); c = (i/2 - sum Q_k(i) P_k(-i)) / sum |P_k(i)|^2
    _, P, Q = recurrence(2.0, 1j, 120)
    s = mpmath.fsum(abs(p) ** 2 for p in P)
    cross = mpmath.fsum(qq * mpmath.conj(p) for p, qq in zip(P, Q))
    r_oracle = float(1 / (2 * s))
    c_oracle = complex((0.5j - cross) / s)
    d = weyl_disk(ctx2)
    assert d.radius == pytest.approx(0.039658698492745628, rel=1e-14)
    assert d.center == pytest.approx(0.66435135942342372j, rel=1e-14)
    assert d.radius == pytest.approx(r_oracle, rel=1e-13)
    assert abs(d.center - c_oracle) <= 1e-13


@pytest.mark.parametrize("q", GRID)
def test_radius_two_ways(q):
    d = weyl_disk(SeriesContext.for_q(q))
    assert abs(d.radius - d.radius_direct) <= 1e-8 * d.radius
    assert abs(d.center - d.center_direct) <= 1e-8 * abs(d.center)


@pytest.mark.parametrize("q", GRID)
def test_boundary_points_on_circle(q):
    ctx = SeriesContext.for_q(q)
    d = weyl_disk(ctx, direct=False)
    for ph in PHIS:
        m = complex(m_at_i(ctx, ExtensionParam(ph)))
        assert abs(abs(m - d.center) - d.radius) <= 1e-10
        assert m.imag > 0


def test_identity_canary(ctx2):
    # a wrong W moves the center off the directly summed one by (W - 1) r
    good = weyl_disk(ctx2)
    bad = weyl_disk(ctx2, master_identity=1.01)
    assert abs(good.center - good.center_direct) < 1e-13
    assert abs(bad.center - good.center_direct) == pytest.approx(0.01 * good.radius, rel=1e-10)


@pytest.mark.parametrize("ph", [0.0, 0.7, math.pi, 4.0])
def test_closed_form_variants(ctx2, ph):
    r = m_at_i_closed_form(ctx2, ExtensionParam(ph))
    assert r["corrected_gap"] <= 1e-14
    assert r["literal_gap"] > 0.1


def test_m_of_z_at_i_is_boundary_value(ctx2):
    ext = ExtensionParam(1.1)
    assert complex(m_of_z(ctx2, ext, 1j)) == pytest.approx(complex(m_at_i(ctx2, ext)), abs=1e-13)


@pytest.mark.parametrize("ph", [0.0, 1.0, math.pi, 5.0])
def test_herglotz_and_conjugation(ctx2, ph):
    ext = ExtensionParam(ph)
    rng = np.random.default_rng(11)
    z = rng.uniform(-6, 6, 30) + 1j * rng.uniform(0.05, 5, 30)
    m = m_of_z(ctx2, ext, z)
    assert np.all(m.imag > 0)
    assert np.allclose(m_of_z(ctx2, ext, z.conj()), m.conj(), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("ph", [0.3, 1.0, 2.5])
def test_reflection(ctx2, ph):
    # x -> -x maps the phi0 measure to the 2 pi - phi0 measure
    z = np.array([0.4 + 0.9j, -2 + 0.3j, 3 + 2j])
    a = m_of_z(ctx2, ExtensionParam(2 * math.pi - ph), z)
    b = -m_of_z(ctx2, ExtensionParam(ph), -z)
    assert np.allclose(a, b, rtol=1e-12)


def test_stieltjes_of_atoms(ctx2, sigma0_q2, sigma_pi_q2):
    z = np.array([0.5 + 1j, -3 + 0.2j, 10j])
    for meas, ph in ((sigma0_q2, 0.0), (sigma_pi_q2, math.pi)):
        direct = np.array([np.sum(meas.masses / (meas.x - zz)) for zz in z])
        assert np.allclose(m_of_z(ctx2, ExtensionParam(ph), z), direct, rtol=1e-11)


def test_transfer_truncated_trend(ctx2):
    limit = np.array(transfer(ctx2, 0.8 + 0.2j, 1.3j))
    gaps = [np.max(np.abs(np.array(transfer_truncated(ctx2, 0.8 + 0.2j, 1.3j, n)) - limit))
            for n in (10, 20, 40, 80)]
    assert gaps[0] > gaps[1] > gaps[2] > gaps[3]
    assert gaps[3] < 1e-10


@pytest.mark.parametrize("q", GRID)
def test_nevanlinna_determinant(q):
    ctx = SeriesContext.for_q(q)
    for z in (0.3 + 0.2j, -4 + 1j, 2j):
        assert abs(complex(nevanlinna_matrix(ctx, z).determinant()) - 1) <= 1e-10


@pytest.mark.parametrize("ph", [0.0, 0.5, math.pi / 2, math.pi, 4.4])
def test_nevanlinna_dictionary(ctx2, ph):
    ext = ExtensionParam(ph)
    t = t_from_phi0(ctx2, ext)
    for z in (0.5 + 0.5j, -1.5 + 2j, 3 + 0.1j):
        a = complex(nevanlinna_matrix(ctx2, z).m_t(t))
        b = complex(m_of_z(ctx2, ext, z))
        assert abs(a - b) <= 1e-11 * max(1, abs(b))


def test_t_phi0_round_trip(ctx2):
    assert math.isinf(t_from_phi0(ctx2, ExtensionParam(0.0)))
    assert t_from_phi0(ctx2, ExtensionParam(math.pi)) == pytest.approx(0.0, abs=1e-16)
    for ph in (0.4, 2.0, 3.5, 6.0):
        assert phi0_from_t(ctx2, t_from_phi0(ctx2, ExtensionParam(ph))).phi0 == pytest.approx(ph, rel=1e-13)


def test_smoothed_density_and_poles(ctx2, sigma0_q2):
    ext = ExtensionParam(0.0)
    x0 = float(sigma0_q2.x[sigma0_q2.x > 0][0])
    tau = 1e-6
    # Im(m(z) - m(conj z)) / (2 pi) ~ mass / (pi tau) near an atom
    v = imag_jump(ctx2, ext, x0, tau)
    assert v * math.pi * tau == pytest.approx(float(sigma0_q2.masses[sigma0_q2.x > 0][0]), rel=1e-6)
    with pytest.raises(PoleProximityError):
        m_of_z(ctx2, ext, x0)
    with pytest.raises(ValueError):
        imag_jump(ctx2, ext, x0, 0.0)
