"""Linearized stability and bifurcation curves.

The orientation dynamics linearized at a relative equilibrium has the 3x3
matrix A = P [B]x - Ma [e3]x.  The stability index counts eigenvalues with
strictly negative real part.  Two codimension-one bifurcations organise
the chart: folds, where the map (theta, phi) -> (Ma, cos psi) loses rank
(and A has a zero eigenvalue), and Hopf points, where A has a purely
imaginary conjugate pair.  Folds are traced as zero contours of the chart
Jacobian determinant, Hopfs as zero contours of det(2A (.) I) with the
spurious zeros from opposite real eigenvalue pairs filtered out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from skimage import measure

from . import atlas
from .numerics import bialternate, eig3
from .swimmer import PDecomposition, skew

__all__ = [
    "BifurcationCurve",
    "linearize",
    "stability_index",
    "classify",
    "chart_jacobian",
    "fold_curves",
    "hopf_curves",
]

MARGINAL_TOL = 1e-9  # |Re lambda| below this counts as marginal


@dataclass(frozen=True)
class BifurcationCurve:
    """An ordered polyline of bifurcation points in the (theta, phi) chart.

    ``kind`` is "fold" or "hopf".  ``mas`` and ``cos_psis`` give the
    driving parameters at each point; ``lambda_im`` holds the positive
    imaginary part of the critical eigenvalue pair for Hopf curves (None
    for folds).
    """

    kind: str
    thetas: np.ndarray
    phis: np.ndarray
    mas: np.ndarray
    cos_psis: np.ndarray
    lambda_im: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.thetas)


def linearize(dec: PDecomposition, eq: atlas.Equilibrium) -> np.ndarray:
    """Linearization A = P [B]x - Ma [e3]x at a relative equilibrium."""
    return dec.P @ skew(eq.B) - eq.Ma * skew(eq.e3)


def stability_index(A: np.ndarray) -> tuple[int, bool]:
    """(number of eigenvalues with Re < -tol, marginal flag).

    The marginal flag is set when any eigenvalue real part lies within
    MARGINAL_TOL of zero, where the strict count is unreliable.
    """
    ev = eig3(A).eigenvalues
    re = ev.real
    index = int(np.sum(re < -MARGINAL_TOL))
    marginal = bool(np.any(np.abs(re) <= MARGINAL_TOL))
    return index, marginal


def classify(dec: PDecomposition, eq: atlas.Equilibrium) -> atlas.Equilibrium:
    """Return the equilibrium with stability index and spectrum attached."""
    A = linearize(dec, eq)
    spec = eig3(A)
    re = spec.eigenvalues.real
    return replace(
        eq,
        index=int(np.sum(re < -MARGINAL_TOL)),
        eigenvalues=spec,
        marginal=bool(np.any(np.abs(re) <= MARGINAL_TOL)),
    )


def chart_jacobian(dec: PDecomposition, theta, phi):
    """Analytic Jacobian determinant of (theta, phi) -> (Ma, cos psi).

    Folds of the equilibrium surface are its zero set.  All partials are
    closed-form derivatives of the chart formulas.
    """
    s1, s2 = dec.sigma1, dec.sigma2
    c, s = np.cos(theta), np.sin(theta)
    k = atlas.k_factor(dec, theta)
    dk = -(k ** 3) * c * s * (1.0 / s2 ** 2 - 1.0 / s1 ** 2)
    L = dec.c01 * c / s1 + dec.c02 * s / s2
    dL = -dec.c01 * s / s1 + dec.c02 * c / s2
    Q = dec.c11 * (c ** 2 / s1 ** 2 - s ** 2 / s2 ** 2) + dec.c12 * c * s / (s1 * s2)
    dQ = -2.0 * dec.c11 * c * s * (1.0 / s1 ** 2 + 1.0 / s2 ** 2) + dec.c12 * (
        c * c - s * s
    ) / (s1 * s2)
    sph, cph = np.sin(phi), np.cos(phi)
    dma_dth = sph * dk
    dma_dph = cph * k
    dcp_dth = cph * dL + sph * (dk * Q + k * dQ)
    dcp_dph = -sph * L + cph * k * Q
    return dma_dth * dcp_dph - dma_dph * dcp_dth


def _hopf_indicator(dec: PDecomposition, theta, phi):
    """det(2A (.) I) over (possibly vectorized) chart points."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast_shapes(theta.shape, phi.shape)
    th = np.broadcast_to(theta, shape).ravel()
    ph = np.broadcast_to(phi, shape).ravel()
    e3 = atlas.e3_of(dec, th)
    if e3.ndim == 1:
        e3 = e3[None, :]
    B = (
        np.cos(ph)[:, None] * dec.beta0
        + (np.sin(ph) * atlas.k_factor(dec, th))[:, None]
        * (
            np.outer(np.cos(th) / dec.sigma1, dec.beta1)
            + np.outer(np.sin(th) / dec.sigma2, dec.beta2)
        )
    )
    ma = atlas.ma_of(dec, th, ph)

    def batched_skew(v):
        S = np.zeros((len(v), 3, 3))
        S[:, 0, 1] = -v[:, 2]
        S[:, 0, 2] = v[:, 1]
        S[:, 1, 0] = v[:, 2]
        S[:, 1, 2] = -v[:, 0]
        S[:, 2, 0] = -v[:, 1]
        S[:, 2, 1] = v[:, 0]
        return S

    # A_k = P skew(B_k) - Ma_k skew(e3_k), batched
    P = dec.P
    A = np.einsum("ij,njk->nik", P, batched_skew(B)) - ma[:, None, None] * batched_skew(
        e3
    )
    # bialternate product, batched
    G = np.empty_like(A)
    G[:, 0, 0] = A[:, 0, 0] + A[:, 1, 1]
    G[:, 0, 1] = A[:, 1, 2]
    G[:, 0, 2] = -A[:, 0, 2]
    G[:, 1, 0] = A[:, 2, 1]
    G[:, 1, 1] = A[:, 2, 2] + A[:, 0, 0]
    G[:, 1, 2] = A[:, 0, 1]
    G[:, 2, 0] = -A[:, 2, 0]
    G[:, 2, 1] = A[:, 1, 0]
    G[:, 2, 2] = A[:, 1, 1] + A[:, 2, 2]
    det = (
        G[:, 0, 0] * (G[:, 1, 1] * G[:, 2, 2] - G[:, 1, 2] * G[:, 2, 1])
        - G[:, 0, 1] * (G[:, 1, 0] * G[:, 2, 2] - G[:, 1, 2] * G[:, 2, 0])
        + G[:, 0, 2] * (G[:, 1, 0] * G[:, 2, 1] - G[:, 1, 1] * G[:, 2, 0])
    )
    return det.reshape(shape)


def _trace_zero_contours(func, resolution: int, refine_tol: float = 1e-12):
    """Zero contours of func(theta, phi) over the chart rectangle.

    Marching squares on a resolution x resolution grid followed by damped
    Newton refinement along the function gradient.  Returns a list of
    (thetas, phis) polylines.
    """
    th = np.linspace(-np.pi, np.pi, resolution)
    ph = np.linspace(0.0, np.pi, resolution)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    F = func(TH, PH)
    scale = np.max(np.abs(F))
    if scale == 0.0:
        return []
    curves = []
    h = 1e-7
    for poly in measure.find_contours(F, 0.0):
        t = -np.pi + poly[:, 0] * (2 * np.pi / (resolution - 1))
        p = poly[:, 1] * (np.pi / (resolution - 1))
        for _ in range(30):
            f = func(t, p)
            if np.max(np.abs(f)) < refine_tol * scale:
                break
            gt = (func(t + h, p) - func(t - h, p)) / (2 * h)
            gp = (func(t, p + h) - func(t, p - h)) / (2 * h)
            g2 = gt * gt + gp * gp
            g2 = np.where(g2 > 0, g2, 1.0)
            t = t - f * gt / g2
            p = p - f * gp / g2
        p = np.clip(p, 0.0, np.pi)
        curves.append((t, p))
    return curves


def fold_curves(dec: PDecomposition, resolution: int = 400) -> list[BifurcationCurve]:
    """Fold curves: zero set of the chart Jacobian determinant."""
    out = []
    for t, p in _trace_zero_contours(
        lambda th, ph: chart_jacobian(dec, th, ph), resolution
    ):
        out.append(
            BifurcationCurve(
                kind="fold",
                thetas=t,
                phis=p,
                mas=np.asarray(atlas.ma_of(dec, t, p)),
                cos_psis=np.asarray(atlas.cos_psi_of(dec, t, p)),
            )
        )
    return out


def hopf_curves(dec: PDecomposition, resolution: int = 400) -> list[BifurcationCurve]:
    """Hopf curves: zeros of det(2A (.) I) that carry an imaginary pair.

    The bialternate determinant also vanishes when A has two opposite real
    eigenvalues; those points are removed, and polylines are split at the
    removed gaps.  Surviving points store the imaginary part of the
    critical pair.
    """
    out = []
    for t, p in _trace_zero_contours(
        lambda th, ph: _hopf_indicator(dec, th, ph), resolution
    ):
        lam = np.zeros(len(t))
        keep = np.zeros(len(t), dtype=bool)
        for i in range(len(t)):
            eq = atlas.eval_chart(dec, t[i], p[i])
            ev = eig3(linearize(dec, eq)).eigenvalues
            pairs = [(0, 1), (0, 2), (1, 2)]
            ii, jj = min(pairs, key=lambda ij: abs(ev[ij[0]] + ev[ij[1]]))
            pair_im = abs(ev[ii].imag)
            if pair_im > 1e-8 and abs(ev[ii].real) < 1e-6:
                keep[i] = True
                lam[i] = pair_im
        # split into contiguous kept runs
        idx = np.flatnonzero(keep)
        if len(idx) == 0:
            continue
        breaks = np.flatnonzero(np.diff(idx) > 1)
        for seg in np.split(idx, breaks + 1):
            if len(seg) < 2:
                continue
            out.append(
                BifurcationCurve(
                    kind="hopf",
                    thetas=t[seg],
                    phis=p[seg],
                    mas=np.asarray(atlas.ma_of(dec, t[seg], p[seg])),
                    cos_psis=np.asarray(atlas.cos_psi_of(dec, t[seg], p[seg])),
                    lambda_im=lam[seg],
                )
            )
    return out
