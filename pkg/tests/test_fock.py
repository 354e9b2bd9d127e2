import math

import numpy as np
import pytest
import scipy.linalg

from dopocanon import classical as cl
from dopocanon import fock as fk


@pytest.fixture(scope="module")
def small():
    return fk.basis(6)


@pytest.fixture(scope="module")
def algebra12():
    return fk.orientation_algebra(fk.basis(12))


def blocks(op):
    for _, sl in op.space.manifolds():
        yield op.matrix[sl, sl]


# --------------------------------------------------------------------------
# basis


@pytest.mark.parametrize("n_max, dim", [(1, 3), (2, 6), (60, 1891)])
def test_dimensions(n_max, dim):
    assert fk.basis(n_max).dim == dim


def test_basis_order_and_index():
    s = fk.basis(3)
    assert s.basis[:6] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    for i, (m, n) in enumerate(s.basis):
        assert s.index(m, n) == i
    with pytest.raises(IndexError):
        s.index(2, 2)


def test_dimension_cap(monkeypatch):
    with pytest.raises(ValueError, match="cap"):
        fk.basis(100)
    monkeypatch.setenv(fk.MAX_DIM_ENV, "5")
    with pytest.raises(ValueError, match="cap"):
        fk.basis(2)
    assert fk.basis(1).dim == 3
    with pytest.raises(ValueError):
        fk.basis(0)


# --------------------------------------------------------------------------
# ladder and shift operators


def test_ladder_actions(small):
    ap, am = fk.annihilation(1, small), fk.annihilation(-1, small)
    np.testing.assert_allclose(ap.matrix @ small.ket(2, 1), math.sqrt(2) * small.ket(1, 1))
    np.testing.assert_allclose(am.matrix @ small.ket(2, 3), math.sqrt(3) * small.ket(2, 2))
    np.testing.assert_allclose(ap.matrix @ small.ket(0, 4), 0)
    cp = fk.creation(1, small)
    np.testing.assert_allclose(cp.matrix @ small.ket(1, 2), math.sqrt(2) * small.ket(2, 2))
    with pytest.raises(ValueError):
        fk.annihilation(0, small)


def test_canonical_commutators_below_cutoff(small):
    for j in (1, -1):
        a = fk.annihilation(j, small).matrix
        c = a @ a.conj().T - a.conj().T @ a
        for m, n in small.basis:
            if m + n <= small.n_max - 1:
                k = small.ket(m, n)
                np.testing.assert_allclose(c @ k, k, atol=1e-14)
    ap = fk.annihilation(1, small).matrix
    am = fk.annihilation(-1, small).matrix
    cross = ap @ am.conj().T - am.conj().T @ ap
    for m, n in small.basis:
        if m + n <= small.n_max - 1:
            np.testing.assert_allclose(cross @ small.ket(m, n), 0, atol=1e-14)


def test_susskind_glogower(small):
    up = fk.susskind_glogower(1, small).matrix
    um = fk.susskind_glogower(-1, small).matrix
    np.testing.assert_allclose(up @ small.ket(2, 0), small.ket(1, 0), atol=1e-15)
    np.testing.assert_allclose(um @ small.ket(1, 3), small.ket(1, 2), atol=1e-15)
    np.testing.assert_allclose(up @ small.ket(0, 3), 0)
    # U^dag U = 1 - |0><0| in the affected mode
    p0 = np.diag((small.m == 0).astype(float))
    np.testing.assert_allclose(up.conj().T @ up, np.eye(small.dim) - p0, atol=1e-14)


def test_phase_difference_unitary_examples(small):
    t = fk.phase_difference_unitary(small).matrix
    np.testing.assert_allclose(t @ small.ket(1, 1), small.ket(2, 0), atol=1e-15)
    np.testing.assert_allclose(t @ small.ket(2, 0), small.ket(0, 2), atol=1e-15)
    t = fk.phase_difference_unitary(small, lambda k: 0.1 * k).matrix
    np.testing.assert_allclose(t @ small.ket(3, 0), np.exp(0.3j) * small.ket(0, 3), atol=1e-15)
    np.testing.assert_allclose(t @ small.ket(0, 0), small.ket(0, 0), atol=1e-15)


def test_phase_difference_unitary_matches_dense_product(small):
    phi = np.linspace(-3, 3, small.n_max + 1)
    up = fk.susskind_glogower(1, small).matrix
    um = fk.susskind_glogower(-1, small).matrix
    ref = up.conj().T @ um
    for k in range(small.n_max + 1):
        ket0k, ketk0 = small.ket(0, k), small.ket(k, 0)
        ref = ref + np.exp(1j * phi[k]) * np.outer(ket0k, ketk0.conj())
    t = fk.phase_difference_unitary(small, phi)
    np.testing.assert_allclose(t.matrix, ref, atol=1e-15)
    assert t.block_diagonal and t.unitary


def test_phase_values():
    np.testing.assert_allclose(fk.phase_values(None, 3), 0)
    np.testing.assert_allclose(fk.phase_values([0, -math.pi, 4.0, 7.0], 3), [0, math.pi, 4 - 2 * math.pi, 7 - 2 * math.pi])
    with pytest.raises(ValueError):
        fk.phase_values([0.0, 1.0], 3)


# --------------------------------------------------------------------------
# orientation operator


def test_root_squares_to_t(algebra12):
    a = algebra12
    assert a.U.block_diagonal and a.U.unitary
    for u, t in zip(blocks(a.U), blocks(a.T)):
        np.testing.assert_allclose(u @ u, t, atol=1e-12)


def test_first_manifold_eigenvalues(algebra12):
    u1 = algebra12.U.matrix[algebra12.space.manifold(1), algebra12.space.manifold(1)]
    ev = np.linalg.eigvals(u1)
    ev = ev[np.argsort(np.angle(ev))]
    np.testing.assert_allclose(ev, [1, 1j], atol=1e-12)


def test_theta_against_dft_oracle(algebra12):
    # with phi = 0 each manifold block of T is a cyclic permutation,
    # diagonalized by the discrete Fourier basis
    s = algebra12.space
    for N, sl in s.manifolds():
        d = N + 1
        f = np.fft.fft(np.eye(d)) / math.sqrt(d)
        tb = algebra12.T.matrix[sl, sl]
        lam = np.diag(f.conj().T @ tb @ f)
        assert np.allclose(f.conj().T @ tb @ f, np.diag(lam), atol=1e-12)
        a = np.angle(lam)
        a[a <= -math.pi + 1e-12] += 2 * math.pi
        ref = (f * (a / 2)) @ f.conj().T
        np.testing.assert_allclose(algebra12.theta.matrix[sl, sl], ref, atol=1e-12)


def test_exponential_of_theta_is_u(algebra12):
    for th, u in zip(blocks(algebra12.theta), blocks(algebra12.U)):
        np.testing.assert_allclose(scipy.linalg.expm(1j * th), u, atol=1e-12)


def test_theta_hermitian_with_principal_spectrum(algebra12):
    th = algebra12.theta
    assert th.hermitian
    ev = np.linalg.eigvalsh(th.matrix)
    assert ev.min() > -math.pi / 2 and ev.max() <= math.pi / 2 + 1e-12


def test_random_phase_function_keeps_structure(rng):
    s = fk.basis(10)
    phi = rng.uniform(-math.pi, math.pi, s.n_max + 1)
    alg = fk.orientation_algebra(s, phi)
    assert alg.U.unitary and alg.theta.hermitian
    for u, t in zip(blocks(alg.U), blocks(alg.T)):
        np.testing.assert_allclose(u @ u, t, atol=1e-12)
    u = fk.orientation_unitary(s, phi)
    np.testing.assert_allclose(u.matrix, alg.U.matrix, atol=1e-13)
    th = fk.orientation_operator(s, phi)
    np.testing.assert_allclose(th.matrix, alg.theta.matrix, atol=1e-13)


def test_non_block_operator_rejected(small):
    bad = fk.OperatorMatrix(fk.annihilation(1, small).matrix, small)
    assert not bad.block_diagonal
    with pytest.raises(ValueError, match="manifold"):
        fk._spectral(bad)


def test_quadrature_operator(algebra12):
    s = algebra12.space
    x = algebra12.quadrature(0.4)
    assert x.hermitian
    vac = fk.TwoModeState(s.ket(0, 0), s)
    assert abs(vac.expect(x)) < 1e-15
    np.testing.assert_allclose(algebra12.quadrature(0.4 + 2 * math.pi).matrix, x.matrix, atol=1e-13)
    np.testing.assert_allclose(algebra12.quadrature(0.4 + math.pi).matrix, -x.matrix, atol=1e-13)
    y = fk.rotating_quadrature_op(0.4, s, algebra=algebra12)
    np.testing.assert_allclose(y.matrix, x.matrix)


# --------------------------------------------------------------------------
# coherent states and commutators


def test_coherent_state_moments():
    s = fk.basis(40)
    st = fk.coherent_state(1.2 - 0.5j, 0.3 + 1j, s)
    ap, am = fk.annihilation(1, s), fk.annihilation(-1, s)
    assert st.expect(ap) == pytest.approx(1.2 - 0.5j, abs=1e-8)
    assert st.expect(am) == pytest.approx(0.3 + 1j, abs=1e-8)
    n_op = fk.OperatorMatrix(np.diag((s.m + s.n).astype(complex)), s)
    assert st.expect(n_op).real == pytest.approx(abs(1.2 - 0.5j) ** 2 + abs(0.3 + 1j) ** 2, abs=1e-7)
    vac = fk.coherent_state(0, 0, s)
    np.testing.assert_allclose(vac.vector, s.ket(0, 0))


def test_coherent_state_tail_check():
    with pytest.raises(ValueError, match="tail"):
        fk.coherent_state(3, 3, fk.basis(40))
    # Poisson(18) tail beyond 50 is about 1.6e-10
    st = fk.coherent_state(3, 3, fk.basis(50))
    assert 1e-11 < st.tail < 1e-9
    with pytest.raises(ValueError):
        fk.TwoModeState(np.ones(3, dtype=complex), fk.basis(1))


def test_required_n_max():
    assert [fk.required_n_max(r, r) for r in (1, 2, 3)] == [24, 41, 62]


# frozen values from a convergence scan over n_max in 30..72 (independent of psi)
FROZEN_QUADRATURE = {1: 1.3566532326, 2: 0.0977532086, 3: 0.0301687247}
FROZEN_ORIENTATION_RHO3 = -0.2413502386


@pytest.fixture(scope="module")
def steady_probes():
    out = {}
    for rho in (1, 2, 3):
        p = cl.steady_state(cl.SteadyState(rho, 0.0))
        s = fk.basis(fk.required_n_max(p.alpha_plus, p.alpha_minus))
        out[rho] = (fk.orientation_algebra(s), fk.coherent_state(p.alpha_plus, p.alpha_minus, s))
    return out


@pytest.mark.parametrize("rho", [1, 2, 3])
def test_quadrature_commutator_frozen(steady_probes, rho):
    alg, st = steady_probes[rho]
    for psi in (0.0, math.pi / 2):
        c = fk.commutator_expectation(alg.quadrature(psi), alg.quadrature(psi + math.pi / 2), st)
        assert abs(c.real) < 1e-12
        assert abs(c) == pytest.approx(FROZEN_QUADRATURE[rho], abs=1e-8)


def test_quadrature_commutator_decreases_with_rho(steady_probes):
    vals = []
    for rho in (1, 2, 3):
        alg, st = steady_probes[rho]
        vals.append(abs(fk.commutator_expectation(alg.quadrature(0.3), alg.quadrature(0.3 + math.pi / 2), st)))
    assert vals[0] > vals[1] > vals[2]


def test_orientation_commutator_frozen(steady_probes):
    alg, st = steady_probes[3]
    c = fk.commutator_expectation(alg.quadrature(math.pi / 2), alg.theta, st)
    assert abs(c.real) < 1e-12
    assert c.imag == pytest.approx(FROZEN_ORIENTATION_RHO3, abs=1e-8)
    ref = cl.symmetric_orientation_bracket(3, math.pi / 2)
    assert abs(c.imag - ref) / abs(ref) < 0.15


def test_commutator_with_random_phase_is_imaginary(rng):
    s = fk.basis(30)
    alg = fk.orientation_algebra(s, rng.uniform(-math.pi, math.pi, s.n_max + 1))
    st = fk.coherent_state(1.5, 1.5, s)
    c = fk.commutator_expectation(alg.quadrature(1.0), alg.theta, st)
    assert abs(c.real) < 1e-12 and np.isfinite(c.imag)


def test_commutator_dimension_mismatch(small):
    st = fk.coherent_state(0.1, 0.1, fk.basis(12))
    a = fk.annihilation(1, small)
    with pytest.raises(ValueError, match="dimension"):
        fk.commutator_expectation(a, a, st)
