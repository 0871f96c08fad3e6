import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GRID, recurrence
from qmoment import JacobiBasis, QParam, classify, coeff_table, eval_pq, pq_table
from qmoment.cli import wronskian_residual
from qmoment.polynomials import (
    exact_q_number, leading_identities, nested_alpha, nested_beta, normalization_bridge,
    poly_from_table, q_hermite_closed,
)
from qmoment.qkernel import extended


@pytest.mark.parametrize("q", GRID)
def test_recurrence_matches_independent_oracle(q):
    z = 1.3 - 0.7j
    _, P, Q = recurrence(q, z, 40)
    Pb, Qb = pq_table(JacobiBasis.q_oscillator(q), 40, z)
    for n in range(41):
        assert abs(Pb[n] - complex(P[n])) <= 1e-12 * max(1, abs(complex(P[n])))
        assert abs(Qb[n] - complex(Q[n])) <= 1e-12 * max(1, abs(complex(Q[n])))


def test_first_polynomials():
    pp = eval_pq(JacobiBasis.q_oscillator(2.0), 2, 1.0)
    # P_1 = x, P_2 = (x^2 - 1)/b_1 with b_1 = sqrt(2.5)
    assert pp.prev_p == pytest.approx(1.0)
    assert pp.p == pytest.approx(0.0, abs=1e-16)
    assert pp.q_val == pytest.approx(1 / math.sqrt(2.5))


@pytest.mark.parametrize("q", GRID)
def test_wronskian_extended(q):
    rng = np.random.default_rng(7)
    z = 10 * np.sqrt(rng.uniform(0, 1, 6)) * np.exp(2j * np.pi * rng.uniform(0, 1, 6))
    assert wronskian_residual(JacobiBasis.q_oscillator(q), z, 200) <= 1e-9


def test_wronskian_binary64_error_tracks_conditioning():
    # the binary64 identity is limited by |P_{n-1} Q_n| b_{n-1}, not by the recurrence
    basis = JacobiBasis.q_oscillator(2.0)
    z = 7.0 + 7.0j
    P, Q = pq_table(basis, 200, z)
    b = basis.values(200)
    n = np.arange(1, 201)
    err = np.abs((P[n - 1] * Q[n] - P[n] * Q[n - 1]) * b[n - 1] - 1)
    cond = (np.abs(P[n - 1] * Q[n]) + np.abs(P[n] * Q[n - 1])) * b[n - 1]
    eps = np.finfo(float).eps
    assert np.all(err <= 200 * eps * cond)
    assert cond.max() > 1e6  # the regime where extended precision is needed


def test_derivative_rows():
    basis = JacobiBasis.q_oscillator(0.5)
    z, h = 0.8 + 0.1j, 1e-6
    P, Q, dP, dQ = pq_table(basis, 20, z, derivative=True)
    Pp, Qp = pq_table(basis, 20, z + h)
    Pm, Qm = pq_table(basis, 20, z - h)
    assert np.allclose(dP, (Pp - Pm) / (2 * h), rtol=1e-7, atol=1e-8)
    assert np.allclose(dQ, (Qp - Qm) / (2 * h), rtol=1e-7, atol=1e-8)


def test_extended_rows_match_binary64():
    basis = JacobiBasis.q_oscillator(5.0)
    P, _ = pq_table(basis, 30, 0.4 + 2j)
    Pe, _ = pq_table(basis, 30, 0.4 + 2j, extended(30))
    assert np.allclose(P, [complex(v) for v in Pe], rtol=1e-12)


@pytest.mark.parametrize("m,n", [(1, 3), (2, 5), (2, 6), (3, 8), (4, 9)])
def test_tables_match_nested_sums(m, n):
    p = QParam(2.0)
    tab = coeff_table(p, 12)
    assert tab.alpha(m, n) == pytest.approx(nested_alpha(p, m, n), rel=1e-12)
    assert tab.beta(m, n) == pytest.approx(nested_beta(p, m, n), rel=1e-12)


@pytest.mark.parametrize("q", [0.5, 2.0, 5.0])
def test_table_polynomials_match_recurrence(q):
    p = QParam(q)
    basis = JacobiBasis.q_oscillator(p)
    tab = coeff_table(p, 14)
    x = 0.9
    P, Q = pq_table(basis, 12, x)
    for n in range(1, 12):
        cp = poly_from_table(tab, p, n)
        cq = poly_from_table(tab, p, n, second_kind=True)
        assert np.polynomial.polynomial.polyval(x, cp) == pytest.approx(P[n], rel=1e-11, abs=1e-12)
        assert np.polynomial.polynomial.polyval(x, cq) == pytest.approx(Q[n], rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("n", range(0, 11))
def test_q_hermite_closed_form(n):
    assert normalization_bridge(QParam(2.0), n, 0.7 + 0.3j) <= 1e-12


def test_q_hermite_cap():
    with pytest.raises(OverflowError):
        q_hermite_closed(QParam(2.0), 31)


def test_leading_identities():
    for q in GRID:
        assert leading_identities(QParam(q), 10)["max_rel_residual"] <= 1e-12


@given(st.floats(0.1, 10).filter(lambda q: abs(q - 1) > 0.01), st.integers(0, 30))
@settings(max_examples=30, deadline=None)
def test_exact_q_number(q, a):
    assert float(exact_q_number(q, a)) == pytest.approx(float(exact_q_number(1 / q, a)), rel=1e-12)


def test_classify():
    assert classify(JacobiBasis.q_oscillator(2.0)).verdict == "indeterminate"
    assert classify(JacobiBasis.q_oscillator(0.3)).verdict == "indeterminate"
    assert classify(JacobiBasis.harmonic()).verdict == "determinate"
    assert classify(JacobiBasis.harmonic(1 / math.sqrt(2))).verdict == "determinate"
    assert classify(JacobiBasis.from_prefix([1.0] * 8)).verdict == "inconclusive"


def test_custom_prefix_with_tail():
    basis = JacobiBasis.from_prefix([1.0, 2.0, 3.0], tail_q=2.0)
    b = basis.values(6)
    assert list(b[:3]) == [1.0, 2.0, 3.0]
    assert b[5] == pytest.approx(math.sqrt(exact_q_number(2.0, 6)))
    ext = basis.values(6, extended(40))
    assert float(ext[5]) == pytest.approx(b[5], rel=1e-15)


def test_custom_prefix_without_tail_is_finite():
    basis = JacobiBasis.from_prefix([1.0, 2.0])
    with pytest.raises(IndexError):
        basis.values(3)
    with pytest.raises(ValueError):
        JacobiBasis.from_prefix([1.0, -1.0])
