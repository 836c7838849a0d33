"""Closed-form 3x3 linear algebra and trigonometric-polynomial roots,
checked against LAPACK and brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from magswim import numerics

finite_floats = st.floats(
    min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False
)
mat3 = arrays(np.float64, (3, 3), elements=finite_floats)


@given(mat3)
@settings(max_examples=200, deadline=None)
def test_svd3_reconstructs_and_rotations(M):
    out = numerics.svd3(M)
    s, U, V = out.singular_values, out.left_vectors, out.right_vectors
    scale = max(1.0, float(np.abs(M).max()))
    assert np.allclose(U @ np.diag(s) @ V.T, M, atol=1e-9 * scale)
    assert np.allclose(U @ U.T, np.eye(3), atol=1e-10)
    assert np.allclose(V @ V.T, np.eye(3), atol=1e-10)
    assert np.linalg.det(U) == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.det(V) == pytest.approx(1.0, abs=1e-9)
    assert s[0] >= s[1] >= abs(s[2])


@given(mat3)
@settings(max_examples=200, deadline=None)
def test_svd3_matches_lapack_magnitudes(M):
    ours = np.abs(numerics.svd3(M).singular_values)
    lapack = np.linalg.svd(M, compute_uv=False)
    scale = max(1.0, float(np.abs(M).max()))
    assert np.allclose(np.sort(ours)[::-1], lapack, atol=1e-8 * scale)


def _assert_spectra_match(got, expect, atol):
    """Greedy closest-pair matching; robust to complex sort-order ties."""
    got = list(got)
    for e in expect:
        j = min(range(len(got)), key=lambda k: abs(got[k] - e))
        assert abs(got[j] - e) < atol
        got.pop(j)


@given(mat3)
@settings(max_examples=200, deadline=None)
def test_eig3_matches_lapack(A):
    ours = numerics.eig3(A).eigenvalues
    lapack = np.linalg.eigvals(A)
    scale = max(1.0, float(np.abs(A).max()))
    _assert_spectra_match(ours, lapack, 1e-6 * scale)


@given(mat3)
@settings(max_examples=200, deadline=None)
def test_eig3_real_count(A):
    out = numerics.eig3(A)
    n_real = int(np.sum(np.abs(out.eigenvalues.imag) == 0.0))
    assert out.real_count in (1, 3)
    assert n_real == out.real_count


@given(mat3)
@settings(max_examples=200, deadline=None)
def test_bialternate_eigenvalue_sums(A):
    """Eigenvalues of the bialternate-sum matrix are the pairwise sums
    lambda_i + lambda_j (i < j) of the eigenvalues of A."""
    lam = np.linalg.eigvals(A)
    expect = np.array([lam[0] + lam[1], lam[0] + lam[2], lam[1] + lam[2]])
    got = np.linalg.eigvals(numerics.bialternate(A))
    scale = max(1.0, float(np.abs(A).max()))
    # defective spectra limit the eigenvalue oracle itself to ~eps^(1/3)
    _assert_spectra_match(got, expect, 1e-4 * scale)


def test_bialternate_detects_imaginary_pair():
    # eigenvalues +-2i and -3: the pair sums to zero, so det = 0
    A = np.array([[0.0, 2.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, -3.0]])
    assert abs(np.linalg.det(numerics.bialternate(A))) < 1e-12


coef5 = arrays(np.float64, (5,), elements=finite_floats)


def _brute_roots(a, b, n=200001):
    th = np.linspace(-np.pi, np.pi, n)
    f = numerics.trig_poly_eval(a, b, th)
    sign = np.sign(f)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    roots = []
    for i in idx:
        lo, hi = th[i], th[i + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if numerics.trig_poly_eval(a, b, lo) * numerics.trig_poly_eval(
                a, b, mid
            ) <= 0:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


@given(coef5, coef5)
@settings(max_examples=60, deadline=None)
def test_trig_roots_residuals(a, b):
    out = numerics.trig_poly_roots(a, b)
    scale = max(1.0, float(max(np.abs(a).max(), np.abs(b).max())))
    if len(out.thetas):
        assert np.all(np.abs(out.residuals) < 1e-8 * scale)
        assert np.all(out.thetas > -np.pi) and np.all(out.thetas <= np.pi)
        assert len(out.thetas) <= 8


@given(coef5, coef5)
@settings(max_examples=30, deadline=None)
def test_trig_roots_against_bisection(a, b):
    out = numerics.trig_poly_roots(a, b)
    if out.degenerate:
        return
    brute = _brute_roots(a, b)
    # every sign-change root must be matched by a reported root; tangent
    # (near-double) roots are only locatable to ~sqrt(eps), so the match
    # tolerance is loose while the residual test above stays tight
    for r in brute:
        d = np.abs(np.arctan2(np.sin(out.thetas - r), np.cos(out.thetas - r)))
        assert d.size and d.min() < 5e-3


def test_trig_roots_known_quartic():
    # f = cos(4 theta) has 8 roots at odd multiples of pi/8
    a = np.zeros(5)
    a[4] = 1.0
    out = numerics.trig_poly_roots(a, np.zeros(5))
    expect = (2 * np.arange(-4, 4) + 1) * np.pi / 8
    assert len(out.thetas) == 8
    assert np.allclose(np.sort(out.thetas), np.sort(expect), atol=1e-10)


def test_trig_roots_identically_zero_flagged():
    out = numerics.trig_poly_roots(np.zeros(5), np.zeros(5))
    assert out.degenerate and len(out.thetas) == 0


def test_trig_roots_rejects_bad_shape():
    with pytest.raises(ValueError):
        numerics.trig_poly_roots(np.zeros(4), np.zeros(5))


def test_svd3_rejects_nonfinite():
    M = np.full((3, 3), np.nan)
    with pytest.raises(ValueError):
        numerics.svd3(M)
