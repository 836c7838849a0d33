"""Analytical chart of relative equilibria.

A rigid swimmer driven by a rotating conical field admits relative
equilibria (orientations that are steady in the rotating frame).  These
form a two-parameter family with global coordinates (theta, phi): theta
locates the rotation axis e3 within the plane of the two nonzero left
singular vectors of P, and phi is the angle between the field B and the
magnetic moment m.  The chart maps (theta, phi) to the driving parameters
(Ma, cos psi) in closed form; this module evaluates that map, inverts it at
fixed driving parameters through a degree-4 trigonometric polynomial, and
describes the symmetry and self-intersection structure of the resulting
surface.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numerics import Spectrum3, trig_poly_roots
from .swimmer import PDecomposition

__all__ = [
    "Equilibrium",
    "IntersectionFamily",
    "ChartRanges",
    "wrap_angle",
    "k_factor",
    "ma_of",
    "cos_psi_of",
    "e3_of",
    "B_of",
    "v_ax_of",
    "eval_chart",
    "chart_grid",
    "equilibrium_poly",
    "solve_equilibria",
    "symmetric_pair",
    "self_intersections",
    "chart_ranges",
]


@dataclass(frozen=True)
class Equilibrium:
    """One relative equilibrium in chart coordinates.

    ``e3`` (rotation axis of the field) and ``B`` (field direction) are
    body-frame unit vectors.  ``index`` is the number of linearization
    eigenvalues with strictly negative real part (0..3), or None before a
    stability pass; ``marginal`` marks eigenvalues within tolerance of the
    imaginary axis.  ``near_fold`` flags roots where the defining
    polynomial was close to tangent, i.e. parameters near a fold.
    """

    theta: float
    phi: float
    Ma: float
    cos_psi: float
    e3: np.ndarray
    B: np.ndarray
    v_ax: float
    index: int | None = None
    eigenvalues: Spectrum3 | None = None
    marginal: bool = False
    near_fold: bool = False


@dataclass(frozen=True)
class IntersectionFamily:
    """One family of self-intersections of the equilibrium surface.

    ``label`` is one of "mirror_theta" (points identified with -theta),
    "mirror_pi_theta" (with pi - theta), "vertical" (theta = theta0 and
    theta0 +- pi lines), "horizontal" (phi = pi/2 line).  ``thetas`` and
    ``phis`` sample the curve.
    """

    label: str
    thetas: np.ndarray
    phis: np.ndarray


@dataclass(frozen=True)
class ChartRanges:
    """Existence bounds of relative equilibria in driving-parameter space."""

    max_ma: float
    cos_psi_min: float
    cos_psi_max: float
    low_ma_interval: tuple[float, float]


def wrap_angle(theta):
    """Wrap an angle to the half-open interval (-pi, pi]."""
    th = np.arctan2(np.sin(theta), np.cos(theta))
    return np.where(th <= -np.pi + 1e-15, np.pi, th) if np.ndim(th) else (
        np.pi if th <= -np.pi + 1e-15 else float(th)
    )


def k_factor(dec: PDecomposition, theta):
    """k(theta) = (cos^2/sigma1^2 + sin^2/sigma2^2)^(-1/2), the Ma scale."""
    return (
        np.cos(theta) ** 2 / dec.sigma1 ** 2 + np.sin(theta) ** 2 / dec.sigma2 ** 2
    ) ** -0.5


def _L(dec: PDecomposition, theta):
    return dec.c01 * np.cos(theta) / dec.sigma1 + dec.c02 * np.sin(theta) / dec.sigma2


def _Q(dec: PDecomposition, theta):
    return dec.c11 * (
        np.cos(theta) ** 2 / dec.sigma1 ** 2 - np.sin(theta) ** 2 / dec.sigma2 ** 2
    ) + dec.c12 * np.cos(theta) * np.sin(theta) / (dec.sigma1 * dec.sigma2)


def ma_of(dec: PDecomposition, theta, phi):
    """Mason number of the equilibrium at chart point (theta, phi)."""
    return np.sin(phi) * k_factor(dec, theta)


def cos_psi_of(dec: PDecomposition, theta, phi):
    """Cosine of the conical angle at chart point (theta, phi)."""
    return np.cos(phi) * _L(dec, theta) + np.sin(phi) * k_factor(dec, theta) * _Q(
        dec, theta
    )


def e3_of(dec: PDecomposition, theta):
    """Body-frame rotation axis: e3 = cos(theta) eta1 + sin(theta) eta2."""
    theta = np.asarray(theta, dtype=float)
    return (
        np.multiply.outer(np.cos(theta), dec.eta1)
        + np.multiply.outer(np.sin(theta), dec.eta2)
    ) if theta.ndim else np.cos(theta) * dec.eta1 + np.sin(theta) * dec.eta2


def B_of(dec: PDecomposition, theta, phi):
    """Body-frame field direction at chart point (theta, phi)."""
    k = k_factor(dec, theta)
    inplane = (
        np.cos(theta) / dec.sigma1 * dec.beta1 + np.sin(theta) / dec.sigma2 * dec.beta2
    )
    return np.cos(phi) * dec.beta0 + np.sin(phi) * k * inplane


def v_ax_of(dec: PDecomposition, theta, phi):
    """Axial velocity Ma * e3 . Ch e3 of the helical equilibrium motion."""
    e3 = e3_of(dec, theta)
    if np.asarray(theta).ndim:
        return ma_of(dec, theta, phi) * np.einsum("...i,ij,...j->...", e3, dec.ch, e3)
    return ma_of(dec, theta, phi) * float(e3 @ dec.ch @ e3)


def eval_chart(dec: PDecomposition, theta: float, phi: float) -> Equilibrium:
    """Evaluate the equilibrium chart at a single (theta, phi) point."""
    theta = float(theta)
    phi = float(phi)
    return Equilibrium(
        theta=float(wrap_angle(theta)),
        phi=phi,
        Ma=float(ma_of(dec, theta, phi)),
        cos_psi=float(cos_psi_of(dec, theta, phi)),
        e3=e3_of(dec, theta),
        B=B_of(dec, theta, phi),
        v_ax=float(v_ax_of(dec, theta, phi)),
    )


def chart_grid(dec: PDecomposition, n_theta: int = 400, n_phi: int = 400):
    """Vectorized chart sweep.

    Returns a dict of (n_phi, n_theta) arrays: theta, phi, Ma, cos_psi,
    v_ax.  Theta spans (-pi, pi] and phi spans [0, pi].
    """
    th = -np.pi + 2 * np.pi * np.arange(1, n_theta + 1) / n_theta
    ph = np.linspace(0.0, np.pi, n_phi)
    TH, PH = np.meshgrid(th, ph)
    return {
        "theta": TH,
        "phi": PH,
        "Ma": ma_of(dec, TH, PH),
        "cos_psi": cos_psi_of(dec, TH, PH),
        "v_ax": v_ax_of(dec, TH, PH),
    }


def equilibrium_poly(dec: PDecomposition, Ma: float, cos_psi: float):
    """Fourier coefficients (a, b) of the equilibrium-counting polynomial.

    Relative equilibria at driving parameters (Ma, cos psi) have theta
    coordinates at the real roots of

        g(theta) = (Ma Q(theta) - cos psi)^2
                   + (Ma^2 K(theta) - 1) L(theta)^2,

    with K = cos^2/sigma1^2 + sin^2/sigma2^2, a trigonometric polynomial of
    degree 4 (hence at most 8 roots).  Coefficients are extracted exactly
    via a 16-point FFT.
    """
    n = 16
    th = 2.0 * np.pi * np.arange(n) / n
    K = np.cos(th) ** 2 / dec.sigma1 ** 2 + np.sin(th) ** 2 / dec.sigma2 ** 2
    g = (Ma * _Q(dec, th) - cos_psi) ** 2 + (Ma * Ma * K - 1.0) * _L(dec, th) ** 2
    G = np.fft.fft(g) / n
    a = np.concatenate(([G[0].real], 2.0 * G[1:5].real))
    b = np.concatenate(([0.0], -2.0 * G[1:5].imag))
    return a, b


def solve_equilibria(
    dec: PDecomposition, Ma: float, cos_psi: float, *, residual_tol: float = 1e-9
) -> list[Equilibrium]:
    """All relative equilibria at fixed driving parameters.

    Roots in theta come from the counting polynomial; for each root,
    sin phi = Ma / k(theta) and the sign of cos phi is recovered by testing
    both phi branches against the conical-angle formula (both survive only
    on the phi = pi/2 line).  Roots where the polynomial is nearly tangent
    are flagged near_fold.  Generically the list has 0, 4, or 8 entries.
    """
    if Ma < 0:
        raise ValueError("Ma must be nonnegative")
    if Ma > dec.sigma1:
        return []
    a, b = equilibrium_poly(dec, Ma, cos_psi)
    roots = trig_poly_roots(a, b)
    scale = max(1.0, np.max(np.abs(a)) + np.max(np.abs(b)))
    out: list[Equilibrium] = []
    for th, dg in zip(roots.thetas, roots.derivatives):
        sin_phi = Ma / k_factor(dec, th)
        if sin_phi > 1.0 + 1e-9:
            continue
        sin_phi = min(sin_phi, 1.0)
        phi_a = float(np.arcsin(sin_phi))
        branches = [phi_a] if abs(phi_a - np.pi / 2) < 1e-12 else [phi_a, np.pi - phi_a]
        for phi in branches:
            if abs(cos_psi_of(dec, th, phi) - cos_psi) < residual_tol:
                eq = eval_chart(dec, th, phi)
                out.append(
                    replace(eq, near_fold=bool(abs(dg) / scale < 1e-7))
                )
    return out


def symmetric_pair(theta: float, phi: float) -> tuple[float, float]:
    """Chart coordinates of the symmetric twin equilibrium.

    The twin corresponds to rotating the configuration through pi about the
    second right singular direction; it shares Ma and cos psi and carries
    e3 -> -e3, B -> -B.  The map is an involution.
    """
    theta_t = np.mod(2.0 * np.pi + theta, 2.0 * np.pi) - np.pi
    return float(theta_t), float(np.pi - phi)


def self_intersections(
    dec: PDecomposition, n: int = 721
) -> list[IntersectionFamily]:
    """Self-intersection curves of the equilibrium surface in (theta, phi).

    Four families exist generically: two arccot graphs (points identified
    with -theta and with pi-theta respectively), the vertical lines
    theta = theta0 and theta0 +- pi, and the horizontal line phi = pi/2.
    Families whose defining c-coefficient vanishes are omitted.
    """
    th = np.linspace(-np.pi, np.pi, n)
    k = k_factor(dec, th)
    scale = max(abs(dec.c01), abs(dec.c02), abs(dec.c12), dec.sigma1)
    arccot = lambda x: np.pi / 2 - np.arctan(x)
    fams: list[IntersectionFamily] = []
    if abs(dec.c02) > 1e-12 * scale:
        fams.append(
            IntersectionFamily(
                "mirror_theta",
                th.copy(),
                arccot(-dec.c12 * np.cos(th) / (dec.c02 * dec.sigma1) * k),
            )
        )
    if abs(dec.c01) > 1e-12 * scale:
        fams.append(
            IntersectionFamily(
                "mirror_pi_theta",
                th.copy(),
                arccot(-dec.c12 * np.sin(th) / (dec.c01 * dec.sigma2) * k),
            )
        )
    ph = np.linspace(0.0, np.pi, n)
    verticals_th = []
    verticals_ph = []
    for t0 in (dec.theta0 - np.pi, dec.theta0, dec.theta0 + np.pi):
        if -np.pi < t0 <= np.pi:
            verticals_th.append(np.full(n, t0))
            verticals_ph.append(ph)
    fams.append(
        IntersectionFamily(
            "vertical", np.concatenate(verticals_th), np.concatenate(verticals_ph)
        )
    )
    fams.append(IntersectionFamily("horizontal", th.copy(), np.full(n, np.pi / 2)))
    return fams


def chart_ranges(
    dec: PDecomposition, n_theta: int = 2001, n_phi: int = 1001
) -> ChartRanges:
    """Existence bounds: max Ma, cos psi range, and the low-Ma interval.

    max Ma equals sigma1 exactly.  The cos psi range has no known closed
    form and is found by a dense chart sweep.  The low-Ma interval is the
    set of cos psi values reachable in the limit Ma -> 0 (where B aligns
    with +-m), namely [-sqrt(1 - (beta0.eta0)^2), +sqrt(1 - (beta0.eta0)^2)];
    it can be much narrower than the full cos psi range.
    """
    g = chart_grid(dec, n_theta, n_phi)
    half_width = float(np.sqrt(max(0.0, 1.0 - float(dec.beta0 @ dec.eta0) ** 2)))
    return ChartRanges(
        max_ma=dec.sigma1,
        cos_psi_min=float(g["cos_psi"].min()),
        cos_psi_max=float(g["cos_psi"].max()),
        low_ma_interval=(-half_width, half_width),
    )
