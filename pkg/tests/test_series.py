import math

import numpy as np
import pytest

from conftest import GRID, recurrence
from qmoment import NonConvergenceError, SeriesContext, a_general, a_limit, master_identity, phi, psi
from qmoment.series import (
    constants_at_i, conjugation_check, parity_sums, partial_sum, scaled_partial, telescoped,
)

# q = 2 constants, frozen from the plain mpmath recurrence (limits at n = 100)
FROZEN_Q2 = {
    "A1": 4.0895076520983363,
    "PsiA2": 3.0829076940159485,
    "B1": 2.1703980242143719,
    "PhiB2": 2.5546854170856797,
    "Psi": 1.7951446549149510,
    "Phi": 1.9509396260634675,
}


def limits(q, z, n=60):
    """The four entire functions as limits of normalized polynomials."""
    b, P0, _ = recurrence(q, 0, 2 * n + 2)
    _, P, Q = recurrence(q, z, 2 * n + 2)
    k = 2 * n
    return {
        "a1": complex(P[k] / P0[k]),
        "pa2": complex(b[k] * P0[k] * P[k + 1] / z),
        "b1": complex(b[k] * P0[k] * Q[k + 1]),
        "pb2": complex(-Q[k] / (P0[k] * z)),
        "Psi": float(sum(P0[j] ** 2 for j in range(0, 2 * n + 1))),
        "Phi": float(sum(q ** 2 for q in _q0(q, 2 * n + 2))),
    }


def _q0(q, n):
    _, _, Q = recurrence(q, 0, n)
    return Q[: n - 1]


def test_frozen_constants_against_oracle():
    lim = limits(2.0, 1j)
    oracle = {"A1": lim["a1"].real, "PsiA2": lim["pa2"].real, "B1": lim["b1"].real,
              "PhiB2": lim["pb2"].real, "Psi": lim["Psi"], "Phi": lim["Phi"]}
    for k, v in FROZEN_Q2.items():
        assert oracle[k] == pytest.approx(v, rel=1e-14), k


def test_constants_q2(ctx2):
    c = constants_at_i(ctx2)
    for k, v in FROZEN_Q2.items():
        assert float(c[k]) == pytest.approx(v, rel=1e-13), k


@pytest.mark.parametrize("q", GRID)
def test_master_identity(q):
    assert abs(float(master_identity(SeriesContext.for_q(q))) - 1) <= 1e-12


@pytest.mark.parametrize("q", [0.3, 2.0, 5.0])
@pytest.mark.parametrize("z", [0.7 + 0.4j, -2.5 + 1j, 3.0 + 0j, 5j])
def test_entire_functions_against_limits(q, z):
    ctx = SeriesContext.for_q(q)
    got = parity_sums(ctx, z).values
    want = limits(q, z)
    for name in ("a1", "pa2", "b1", "pb2"):
        g = complex(np.asarray(got[name]).ravel()[0])
        assert abs(g - want[name]) <= 1e-11 * max(1, abs(want[name])), name


def test_a_general_at_i_gives_constants(ctx2):
    for which in ("alpha1", "alpha2", "beta1", "beta2"):
        lim = complex(a_general(ctx2, which, 1j).value)
        assert lim == pytest.approx(float(a_limit(ctx2, which).value), rel=1e-13)


@pytest.mark.parametrize("q", GRID)
def test_telescoping(q):
    ctx = SeriesContext.for_q(q)
    x = np.random.default_rng(3).uniform(-5, 5, 20)
    for n in (1, 2, 7, 30, 60):
        for which in ("alpha1", "alpha2", "beta1", "beta2"):
            S, T = partial_sum(ctx, which, n, x), telescoped(ctx, which, n, x)
            assert np.all(np.abs(S - T) <= 1e-9 * np.maximum(1, np.abs(T))), (n, which)


@pytest.mark.parametrize("which", ["alpha1", "alpha2", "beta1", "beta2"])
def test_nested_form_matches_polynomial_form(which):
    ctx = SeriesContext.for_q(2.0)
    for K in (1, 3, 8):
        a = scaled_partial(ctx, which, 0.6 + 0.2j, K, "poly")
        b = scaled_partial(ctx, which, 0.6 + 0.2j, K, "nested")
        assert abs(a - b) <= 1e-12 * max(1, abs(a))


def test_psi_phi_values():
    ctx = SeriesContext.for_q(2.0)
    assert float(psi(ctx).value) == pytest.approx(FROZEN_Q2["Psi"], rel=1e-14)
    assert float(phi(ctx).value) == pytest.approx(FROZEN_Q2["Phi"], rel=1e-14)


def test_conjugate_symmetry(ctx2):
    for which in ("alpha1", "alpha2", "beta1", "beta2"):
        assert conjugation_check(ctx2, which, 1.2 + 0.8j) <= 1e-13


def test_extended_precision_agrees():
    lo = SeriesContext.for_q(0.5)
    hi = lo.with_digits(40)
    assert abs(float(master_identity(hi)) - 1) <= 1e-30
    z = 2.0 + 0.5j
    for which in ("alpha1", "beta2"):
        a = complex(a_general(lo, which, z).value)
        b = complex(a_general(hi, which, z).value)
        assert abs(a - b) <= 1e-13 * max(1, abs(b))


def test_q_inverse_gives_same_values():
    a = constants_at_i(SeriesContext.for_q(2.0))
    b = constants_at_i(SeriesContext.for_q(0.5))
    for k in a:
        assert float(a[k]) == pytest.approx(float(b[k]), rel=1e-15)


def test_nonconvergence_carries_diagnostics():
    ctx = SeriesContext.for_q(2.0, max_terms=8)
    with pytest.raises(NonConvergenceError) as info:
        a_limit(ctx, "alpha1")
    assert info.value.diagnostics["terms"] == 8
    assert info.value.diagnostics["tail_bound"] > 0


def test_slow_convergence_near_one():
    ctx = SeriesContext.for_q(1.05)
    sv = a_limit(ctx, "alpha1")
    assert sv.converged and sv.terms_used > 50
    # W = 1 is a difference of two products of size ~1e6 here
    scale = float(a_limit(ctx, "alpha1").value * a_limit(ctx, "beta1").value)
    assert abs(float(master_identity(ctx)) - 1) <= 100 * np.finfo(float).eps * scale
    assert abs(float(master_identity(ctx.with_digits(40))) - 1) <= 1e-25


def test_context_validation():
    with pytest.raises(ValueError):
        SeriesContext.for_q(2.0, tol=0)
    with pytest.raises(ValueError):
        SeriesContext.for_q(2.0, max_terms=4)
    assert math.isclose(SeriesContext.for_q(2.0, digits=30).tol, 1e-24)
