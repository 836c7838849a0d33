"""Linearized stability, chart Jacobian, and bifurcation-curve tracing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magswim import atlas, stability

angles = st.floats(
    min_value=-np.pi, max_value=np.pi, allow_nan=False, allow_infinity=False
)


def test_stability_index_known_matrices():
    assert stability.stability_index(-np.eye(3)) == (3, False)
    assert stability.stability_index(np.eye(3)) == (0, False)
    assert stability.stability_index(np.diag([-1.0, -2.0, 3.0])) == (2, False)
    idx, marginal = stability.stability_index(np.diag([-1.0, -2.0, 0.0]))
    assert idx == 2 and marginal
    # rotation block: pure imaginary pair is marginal
    A = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    idx, marginal = stability.stability_index(A)
    assert idx == 1 and marginal


@given(angles, angles)
@settings(max_examples=60, deadline=None)
def test_chart_jacobian_matches_finite_differences(dec_b, theta, phi):
    dec = dec_b
    h = 1e-6
    ma = lambda t, p: atlas.ma_of(dec, t, p)
    cp = lambda t, p: atlas.cos_psi_of(dec, t, p)
    J11 = (ma(theta + h, phi) - ma(theta - h, phi)) / (2 * h)
    J12 = (ma(theta, phi + h) - ma(theta, phi - h)) / (2 * h)
    J21 = (cp(theta + h, phi) - cp(theta - h, phi)) / (2 * h)
    J22 = (cp(theta, phi + h) - cp(theta, phi - h)) / (2 * h)
    fd = J11 * J22 - J12 * J21
    exact = stability.chart_jacobian(dec, theta, phi)
    assert exact == pytest.approx(fd, abs=2e-4 * max(1.0, abs(fd)))


@given(angles, angles)
@settings(max_examples=60, deadline=None)
def test_symmetric_pair_spectra_opposite(dec_b, theta, phi):
    """Eigenvalues of the linearization at a symmetric pair are negatives
    of each other, so exactly one member can be stable."""
    dec = dec_b
    eq = atlas.eval_chart(dec, theta, phi)
    if not np.isfinite(eq.Ma):
        return
    ts, ps = atlas.symmetric_pair(theta, phi)
    eq2 = atlas.eval_chart(dec, ts, ps)
    ev1 = np.sort_complex(stability.classify(dec, eq).eigenvalues.eigenvalues)
    ev2 = np.sort_complex(-stability.classify(dec, eq2).eigenvalues.eigenvalues)
    d = [min(abs(e - f) for f in ev2) for e in ev1]
    assert max(d) < 1e-10 * max(1.0, float(np.abs(ev1).max()))


def test_linearize_vanishes_on_equilibrium_direction(dec_a):
    """A annihilates nothing generically, but trace(A) equals the trace of
    P [B]x (the Ma [e3]x part is traceless)."""
    eq = atlas.eval_chart(dec_a, 0.7, 1.2)
    A = stability.linearize(dec_a, eq)
    from magswim.swimmer import skew

    assert np.trace(A) == pytest.approx(np.trace(dec_a.P @ skew(eq.B)), abs=1e-12)
    assert np.allclose(A, dec_a.P @ skew(eq.B) - eq.Ma * skew(eq.e3), atol=1e-14)


def test_fold_curves_lie_on_jacobian_zero_set(dec_b):
    curves = stability.fold_curves(dec_b, resolution=150)
    assert curves
    scale = np.abs(
        stability.chart_jacobian(
            dec_b,
            np.linspace(-np.pi, np.pi, 100),
            np.linspace(0.1, 3.0, 100),
        )
    ).max()
    for c in curves:
        assert c.kind == "fold"
        assert len(c.mas) == len(c.thetas) == len(c.cos_psis)
        if len(c) < 4:
            continue  # marching-squares edge fragments may not refine fully
        vals = stability.chart_jacobian(dec_b, c.thetas, c.phis)
        assert np.max(np.abs(vals)) < 1e-6 * scale


def test_hopf_curves_carry_imaginary_pair(dec_b):
    curves = stability.hopf_curves(dec_b, resolution=150)
    assert curves
    for c in curves:
        assert c.kind == "hopf"
        assert c.lambda_im is not None and np.all(c.lambda_im > 0)
        for i in range(0, len(c), max(1, len(c) // 10)):
            eq = atlas.eval_chart(dec_b, c.thetas[i], c.phis[i])
            ev = stability.classify(dec_b, eq).eigenvalues.eigenvalues
            pairs = [(0, 1), (0, 2), (1, 2)]
            ii, jj = min(pairs, key=lambda ij: abs(ev[ij[0]] + ev[ij[1]]))
            assert abs(ev[ii].real) < 1e-6
            assert abs(ev[ii].imag) == pytest.approx(c.lambda_im[i], rel=1e-3)


def test_hopf_curves_reach_large_cospsi_for_swimmer_b(dec_b):
    curves = stability.hopf_curves(dec_b, resolution=150)
    assert max(np.abs(c.cos_psis).max() for c in curves) > 0.8


def test_classify_attaches_spectrum(dec_any):
    eq = atlas.eval_chart(dec_any, 0.4, 0.9)
    out = stability.classify(dec_any, eq)
    assert out.index is not None and 0 <= out.index <= 3
    assert out.eigenvalues is not None
    A = stability.linearize(dec_any, eq)
    assert np.sum(out.eigenvalues.eigenvalues).real == pytest.approx(
        np.trace(A), abs=1e-8 * max(1.0, abs(np.trace(A)))
    )
