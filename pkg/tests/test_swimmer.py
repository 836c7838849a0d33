"""Swimmer ingestion and the singular-value decomposition of P = M22 [m]x."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from magswim import swimmer as sw

finite_floats = st.floats(
    min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False
)
mat3 = arrays(np.float64, (3, 3), elements=finite_floats)
vec3 = arrays(np.float64, (3,), elements=finite_floats)


def _random_swimmer(M12, A, m):
    """Build a swimmer with a guaranteed-SPD M22 = A A^T + I."""
    M22 = A @ A.T + np.eye(3)
    return sw.load_swimmer(
        {
            "name": "prop",
            "mobility": {
                "M11": np.eye(3).tolist(),
                "M12": M12.tolist(),
                "M22": M22.tolist(),
            },
            "m": m.tolist(),
        }
    )


@given(mat3, mat3, vec3)
@settings(max_examples=150, deadline=None)
def test_decompose_triads_and_coefficients(M12, A, m):
    if np.linalg.norm(m) < 1e-3:
        return
    s = _random_swimmer(M12, A, m)
    dec = sw.decompose(s)
    B = np.column_stack([dec.beta0, dec.beta1, dec.beta2])
    # right triad orthonormal and right-handed, beta0 = m exactly
    assert np.allclose(B.T @ B, np.eye(3), atol=1e-10)
    assert np.linalg.det(B) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(dec.beta0, s.m, atol=1e-12)
    # singular relations P beta_i = sigma_i eta_i, P m = 0
    assert np.allclose(dec.P @ dec.beta1, dec.sigma1 * dec.eta1, atol=1e-9)
    assert np.allclose(dec.P @ dec.beta2, dec.sigma2 * dec.eta2, atol=1e-9)
    assert np.linalg.norm(dec.P @ dec.beta0) < 1e-10 * max(1.0, dec.sigma1)
    assert dec.sigma1 >= dec.sigma2 >= 0.0
    # canonical sign: c01 > 0 (or c02 > 0 when c01 vanishes)
    tol = 1e-12 * dec.sigma1
    assert dec.c01 > -tol
    if abs(dec.c01) <= tol:
        assert dec.c02 > -tol
    # coefficients are the stated quadratic forms
    assert dec.c11 == pytest.approx(dec.beta1 @ dec.P @ dec.beta1, abs=1e-12)
    assert dec.c12 == pytest.approx(
        dec.beta1 @ (dec.P + dec.P.T) @ dec.beta2, abs=1e-12
    )


@given(mat3, mat3, vec3)
@settings(max_examples=60, deadline=None)
def test_decompose_invariant_under_m_scaling(M12, A, m):
    if np.linalg.norm(m) < 1e-3:
        return
    s1 = _random_swimmer(M12, A, m)
    s2 = _random_swimmer(M12, A, 3.7 * m)
    d1, d2 = sw.decompose(s1), sw.decompose(s2)
    assert d1.sigma1 == pytest.approx(d2.sigma1, rel=1e-12)
    assert d1.sigma2 == pytest.approx(d2.sigma2, rel=1e-12)
    # when c01 = c02 = 0 the joint sign of (beta1, beta2) is tie-broken and
    # not a continuous function of the input, so compare up to that sign
    assert np.allclose(d1.beta1, d2.beta1, atol=1e-10) or np.allclose(
        d1.beta1, -d2.beta1, atol=1e-10
    )
    dtheta = (d1.theta0 - d2.theta0) % np.pi
    assert min(dtheta, np.pi - dtheta) < 1e-10


def test_bundled_swimmers_load_and_decompose():
    names = sw.bundled_names()
    assert len(names) >= 2
    for name in names:
        s = sw.bundled_swimmer(name)
        dec = sw.decompose(s)
        assert dec.sigma1 > 0.0
        assert np.isfinite(dec.theta0)
        # theta0 is reported in [-pi/2, pi/2] (defined modulo pi)
        assert abs(dec.theta0) <= np.pi / 2 + 1e-12


def test_unknown_bundled_name_rejected():
    with pytest.raises(ValueError):
        sw.bundled_swimmer("no_such_swimmer")


def test_drag_input_matches_mobility_input():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((6, 6))
    D = A @ A.T + 6 * np.eye(6)  # SPD drag matrix
    M = np.linalg.inv(D)
    m = np.array([0.3, -0.5, 0.8])
    s_drag = sw.load_swimmer(
        {
            "name": "d",
            "drag": {
                "D11": D[:3, :3].tolist(),
                "D12": D[:3, 3:].tolist(),
                "D22": D[3:, 3:].tolist(),
            },
            "m": m.tolist(),
        }
    )
    s_mob = sw.load_swimmer(
        {
            "name": "m",
            "mobility": {
                "M11": M[:3, :3].tolist(),
                "M12": M[:3, 3:].tolist(),
                "M22": M[3:, 3:].tolist(),
            },
            "m": m.tolist(),
        }
    )
    assert np.allclose(s_drag.M11, s_mob.M11, atol=1e-12)
    assert np.allclose(s_drag.M12, s_mob.M12, atol=1e-12)
    assert np.allclose(s_drag.M22, s_mob.M22, atol=1e-12)


def test_load_swimmer_accepts_json_text():
    doc = {
        "name": "t",
        "mobility": {
            "M11": np.eye(3).tolist(),
            "M12": np.zeros((3, 3)).tolist(),
            "M22": np.eye(3).tolist(),
        },
        "m": [0, 0, 1],
    }
    s = sw.load_swimmer(json.dumps(doc))
    assert s.name == "t"
    assert np.allclose(s.m, [0, 0, 1])


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("mobility"),
        lambda d: d["mobility"].pop("M22"),
        lambda d: d["mobility"].__setitem__("M22", [[1, 0], [0, 1]]),
        lambda d: d.__setitem__("m", [0, 0, 0]),
        lambda d: d.__setitem__("m", [1, 2]),
        lambda d: d["mobility"].__setitem__(
            "M22", (-np.eye(3)).tolist()
        ),  # not positive definite
        lambda d: d["mobility"].__setitem__(
            "M11", [[np.nan] * 3] * 3
        ),
    ],
)
def test_bad_documents_rejected(mutate):
    doc = {
        "name": "bad",
        "mobility": {
            "M11": np.eye(3).tolist(),
            "M12": np.zeros((3, 3)).tolist(),
            "M22": np.eye(3).tolist(),
        },
        "m": [0, 0, 1],
    }
    mutate(doc)
    with pytest.raises(ValueError):
        sw.load_swimmer(doc)


def test_chirality_matches_definition():
    for name in sw.bundled_names():
        s = sw.bundled_swimmer(name)
        data = sw.chirality(s)
        # Ch M22 = M12 by definition of Ch = M12 M22^-1
        assert np.allclose(data.Ch @ s.M22, s.M12, atol=1e-12)
        assert data.f_perp > 0.0
        dec = sw.decompose(s)
        assert np.allclose(dec.ch, data.Ch, atol=1e-14)
        # vmat = M12 [m]x applied to the field equals translational velocity
        assert np.allclose(dec.vmat, s.M12 @ sw.skew(dec.m), atol=1e-14)


def test_skew_is_cross_product(rng):
    v, w = rng.standard_normal(3), rng.standard_normal(3)
    assert np.allclose(sw.skew(v) @ w, np.cross(v, w), atol=1e-14)
