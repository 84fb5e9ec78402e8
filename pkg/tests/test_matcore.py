import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockjacobi import matcore as mc
from blockjacobi.ensembles import ginibre, haar_unitary, rng
from blockjacobi.errors import NearSingular, NotPSD
from blockjacobi.tolerances import DEFAULT, Tolerances

SQ5 = np.sqrt(5.0)
GOLDEN = (1 + SQ5) / 2
JORDAN = np.array([[1, 1], [0, 1]], dtype=complex)


def charpoly_roots_2x2(m):
    """Roots of t^2 - tr(m) t + det(m), by the quadratic formula."""
    tr, det = np.trace(m), np.linalg.det(m)
    disc = np.sqrt(tr * tr - 4 * det + 0j)
    return (tr + disc) / 2, (tr - disc) / 2


def mgs_qr(a):
    """Modified Gram-Schmidt; column norms are positive so diag(r) > 0."""
    a = np.array(a, dtype=complex)
    l = a.shape[0]
    q = a.copy()
    r = np.zeros((l, l), dtype=complex)
    for k in range(l):
        r[k, k] = np.linalg.norm(q[:, k])
        q[:, k] /= r[k, k]
        for j in range(k + 1, l):
            r[k, j] = np.vdot(q[:, k], q[:, j])
            q[:, j] -= r[k, j] * q[:, k]
    return q, r


def svd_polar_oracle(t):
    """p = U diag(s) U*, u = U V* from LAPACK's SVD."""
    uf, s, vh = np.linalg.svd(t)
    return (uf * s) @ uf.conj().T, uf @ vh


# -- norms -------------------------------------------------------------------

def test_hs_norm_examples():
    assert mc.hs_norm(np.eye(2)) == pytest.approx(np.sqrt(2))
    assert mc.hs_norm(np.zeros((3, 3))) == 0.0
    assert mc.hs_norm(JORDAN) == pytest.approx(np.sqrt(3))


def test_hs_norm_batched_shape():
    out = mc.hs_norm(np.stack([np.eye(2), 2 * np.eye(2)]))
    np.testing.assert_allclose(out, [np.sqrt(2), 2 * np.sqrt(2)])


def test_op_norm_examples():
    assert mc.op_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    u = haar_unitary(rng(0), (), 4)
    assert mc.op_norm(u) == pytest.approx(1.0, abs=1e-13)
    # |[[1,1],[0,1]]|^2 = largest eigenvalue of a*a
    lam = max(abs(r) for r in charpoly_roots_2x2(JORDAN.conj().T @ JORDAN))
    assert mc.op_norm(JORDAN) == pytest.approx(np.sqrt(lam), abs=1e-14)
    assert mc.op_norm(JORDAN) == pytest.approx(GOLDEN, abs=1e-14)


# -- inverse -----------------------------------------------------------------

def test_inverse_examples():
    np.testing.assert_allclose(mc.inverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(mc.inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_inverse_residual_random():
    a = ginibre(rng(1), (200,), 3) + 3 * np.eye(3)
    r = mc.inverse(a)
    assert np.max(mc.hs_norm(a @ r - np.eye(3))) <= 1e-12


def test_inverse_near_singular_reports_index():
    stack = np.stack([np.eye(2), np.eye(2), np.diag([1.0, 1e-14])])
    with pytest.raises(NearSingular) as info:
        mc.inverse(stack)
    assert info.value.index == 2
    assert info.value.ratio == pytest.approx(1e-14)


# -- SVD ---------------------------------------------------------------------

def test_svd_examples():
    np.testing.assert_allclose(mc.svd(np.diag([-2.0, 1.0])).sigma, [2.0, 1.0])
    u = haar_unitary(rng(2), (), 3)
    np.testing.assert_allclose(mc.svd(u).sigma, np.ones(3), atol=1e-13)
    s2 = sorted((abs(r) for r in charpoly_roots_2x2(JORDAN.conj().T @ JORDAN)), reverse=True)
    np.testing.assert_allclose(mc.svd(JORDAN).sigma, np.sqrt(s2), atol=1e-14)
    np.testing.assert_allclose(mc.svd(JORDAN).sigma, [GOLDEN, (SQ5 - 1) / 2], atol=1e-14)


@pytest.mark.parametrize("l", [1, 2, 3, 5, 8])
def test_svd_reconstruction_and_unitarity(l):
    a = ginibre(rng(3, l), (300,), l)
    u, s, v = mc.svd(a)
    recon = (u * s[..., None, :]) @ mc.adjoint(v)
    assert np.max(mc.hs_norm(recon - a) / mc.hs_norm(a)) <= DEFAULT.svd_tol
    assert mc.is_unitary(u) and mc.is_unitary(v)
    assert np.all(np.diff(s, axis=-1) <= 0) and np.all(s >= 0)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), rtol=1e-12, atol=1e-13)


def test_svd_rank_deficient():
    a = np.array([[1, 2, 3], [2, 4, 6], [0, 0, 0]], dtype=complex)
    u, s, v = mc.svd(a)
    assert s[1] < 1e-12 and s[2] < 1e-12
    assert mc.is_unitary(u) and mc.is_unitary(v)
    np.testing.assert_allclose((u * s) @ v.conj().T, a, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_svd_property(l, seed):
    a = ginibre(rng(seed), (), l)
    u, s, v = mc.svd(a)
    assert np.allclose((u * s) @ v.conj().T, a, atol=1e-12 * max(1.0, s[0]))


# -- polar -------------------------------------------------------------------

def test_polar_examples():
    u = haar_unitary(rng(4), (), 3)
    p, w = mc.polar_left(u)
    np.testing.assert_allclose(p, np.eye(3), atol=1e-13)
    np.testing.assert_allclose(w, u, atol=1e-13)

    h = np.array([[2, 1j], [-1j, 3]])
    p, w = mc.polar_left(h)
    np.testing.assert_allclose(p, h, atol=1e-13)
    np.testing.assert_allclose(w, np.eye(2), atol=1e-13)

    t = np.array([[0, 2], [1, 0]], dtype=complex)
    po, uo = svd_polar_oracle(t)
    p, w = mc.polar_left(t)
    np.testing.assert_allclose(p, po, atol=1e-13)
    np.testing.assert_allclose(w, uo, atol=1e-13)
    np.testing.assert_allclose(p, np.diag([2, 1]), atol=1e-13)
    np.testing.assert_allclose(w, [[0, 1], [1, 0]], atol=1e-13)


def test_polar_matches_jacobi_svd_route():
    """The Newton route and the Jacobi-SVD route give the same phi."""
    a = ginibre(rng(5), (2000,), 4)
    s = mc.svdvals(a)
    keep = s[:, -1] >= 1e-6 * s[:, 0]
    a = a[keep]
    u_newton = mc.phi(a)
    f = mc.svd(a)
    u_svd = f.u @ mc.adjoint(f.v)
    assert np.max(mc.hs_norm(u_newton - u_svd)) <= 1e-10


def test_polar_reconstruction_and_psd():
    t = ginibre(rng(6), (500,), 3)
    p, u = mc.polar_left(t)
    assert np.max(mc.hs_norm(p @ u - t) / mc.hs_norm(t)) <= 1e-12
    assert mc.is_unitary(u)
    assert np.all(np.linalg.eigvalsh(p)[:, 0] > 0)
    np.testing.assert_allclose(p @ p, t @ mc.adjoint(t), atol=1e-11)


def test_polar_singular_raises():
    with pytest.raises(NearSingular):
        mc.polar_left(np.array([[1.0, 0], [0, 0]]))


# -- QR ----------------------------------------------------------------------

def test_qr_examples():
    q, r = mc.qr_positive(np.eye(3))
    np.testing.assert_allclose(q, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(r, np.eye(3), atol=1e-15)
    w = haar_unitary(rng(7), (), 3)
    q, r = mc.qr_positive(w)
    np.testing.assert_allclose(q, w, atol=1e-13)
    np.testing.assert_allclose(r, np.eye(3), atol=1e-13)


def test_qr_matches_gram_schmidt_oracle():
    for k in range(50):
        a = ginibre(rng(8, k), (), 4)
        qo, ro = mgs_qr(a)
        q, r = mc.qr_positive(a)
        np.testing.assert_allclose(q, qo, atol=1e-11)
        np.testing.assert_allclose(r, ro, atol=1e-11)
        assert mc.hs_norm(q @ r - a) <= 1e-12 * mc.op_norm(a)
        assert np.all(np.diag(r).real > 0) and np.all(np.diag(r).imag == 0)
        assert np.all(np.tril(r, -1) == 0)


def test_qr_singular_raises_with_index():
    stack = np.stack([np.eye(2), np.zeros((2, 2))])
    with pytest.raises(NearSingular) as info:
        mc.qr_positive(stack)
    assert info.value.index == 1


# -- eigenvalues ---------------------------------------------------------------

def test_eigenvalue_examples():
    np.testing.assert_allclose(mc.eigenvalues(np.array([[1, 5], [0, 3]])), [3, 1], atol=1e-14)
    th = np.pi / 3
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    # equal moduli: ties broken by real part, then imaginary part (descending)
    np.testing.assert_allclose(mc.eigenvalues(rot), [np.exp(1j * th), np.exp(-1j * th)], atol=1e-14)
    m = np.array([[2, 1], [1, 2]], dtype=complex)
    oracle = sorted(charpoly_roots_2x2(m), key=lambda z: -abs(z))
    np.testing.assert_allclose(mc.eigenvalues(m), oracle, atol=1e-14)
    np.testing.assert_allclose(mc.eigenvalues(m), [3, 1], atol=1e-14)


def test_eigenvalue_tie_break_on_real_part():
    ev = mc.eigenvalues(np.diag([-2.0, 2.0, 1j * 2, -1j * 2]))
    np.testing.assert_allclose(ev, [2, 2j, -2j, -2], atol=1e-15)


def test_eigenvalues_batched_sorted():
    ev = mc.eigenvalues(ginibre(rng(9), (100,), 4))
    assert np.all(np.diff(np.abs(ev), axis=-1) <= 1e-12)


# -- sqrt_psd ----------------------------------------------------------------

def test_sqrt_psd_examples():
    np.testing.assert_allclose(mc.sqrt_psd(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(mc.sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    # spectral oracle: eigenvalues 3 and 1 with eigenvectors (1,1) and (1,-1)
    v = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    oracle = v @ np.diag([np.sqrt(3), 1.0]) @ v.T
    np.testing.assert_allclose(mc.sqrt_psd(m), oracle, atol=1e-14)


def test_sqrt_psd_rejects():
    with pytest.raises(NotPSD):
        mc.sqrt_psd(np.diag([1.0, -1.0]))
    with pytest.raises(NotPSD):
        mc.sqrt_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))


# -- json and tolerances -----------------------------------------------------------

def test_matrix_json_round_trip_exact():
    a = ginibre(rng(10), (), 3)
    b = mc.matrix_from_json(mc.matrix_to_json(a))
    assert np.array_equal(a, b)


def test_matrix_json_bad_dim():
    with pytest.raises(ValueError):
        mc.matrix_from_json({"dim": 3, "entries": [[[1, 0]]]})


def test_as_matrix_rejects_non_square():
    with pytest.raises(ValueError):
        mc.as_matrix(np.zeros((2, 3)))


def test_tolerance_overrides():
    t = DEFAULT.with_overrides({"pos_tol": "1e-8", "svd_max_sweeps": "10"})
    assert t.pos_tol == 1e-8 and t.svd_max_sweeps == 10
    assert DEFAULT.pos_tol == 1e-10
    with pytest.raises(KeyError):
        DEFAULT.with_overrides({"nope": "1"})
    assert isinstance(t, Tolerances)
