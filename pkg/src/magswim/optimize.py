"""Optimization of driving parameters and of the magnetisation direction.

Three related problems are solved here for a swimmer of fixed shape:

* find the driving parameters (Ma, cos psi) that maximise the axial
  velocity |v_ax| over the chart of relative equilibria, optionally
  restricted to stable equilibria;
* find the magnetic moment direction m* that makes the optimal axial
  velocity of the shape attainable: maximise f(n) = |n . M22 M12 n| /
  |M22 n| over unit vectors n, then pick m* on the unit circle
  perpendicular to the maximiser n* such that the optimal equilibrium
  sits on a Hopf point (so stable equilibria exist arbitrarily close);
* extract v_ax as a function of Ma along level sets of cos psi, with
  each point tagged stable or unstable.

All searches are deterministic: dense seeding plus local refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from . import atlas, stability
from .numerics import bialternate, eig3
from .swimmer import PDecomposition, skew

__all__ = [
    "DriveOptimum",
    "MagnetisationOptimum",
    "VaxCurve",
    "axial_velocity_bound",
    "optimal_n",
    "optimal_magnetisation",
    "optimize_drive",
    "vax_vs_ma_curve",
]


@dataclass(frozen=True)
class DriveOptimum:
    """Driving parameters maximising |v_ax| over the equilibrium chart."""

    theta: float
    phi: float
    Ma: float
    cos_psi: float
    v_ax: float
    stable: bool
    near_hopf: bool


@dataclass(frozen=True)
class MagnetisationOptimum:
    """Optimal moment direction for a shape, with the optimal drive.

    ``m_star`` is a unit vector perpendicular to ``n_star`` (the
    maximiser of the axial-velocity bound); ``Ma_star`` = |M22 n*| and
    ``v_ax_star`` = f(n*).  ``hopf`` records whether an m* with a purely
    imaginary eigenvalue pair was found; otherwise m* minimises the
    largest real part of the non-real pair (best effort).
    """

    n_star: np.ndarray
    m_star: np.ndarray
    v_ax_star: float
    Ma_star: float
    cos_psi_star: float
    hopf: bool


@dataclass(frozen=True)
class VaxCurve:
    """Axial velocity along a cos psi level set of the chart.

    Points are ordered by theta; ``stable`` tags index-3 equilibria.
    Consecutive points may belong to different solution branches where
    the level set has several components.
    """

    cos_psi: float
    thetas: np.ndarray
    phis: np.ndarray
    mas: np.ndarray
    v_axs: np.ndarray
    stable: np.ndarray


def _canonical_sign(v: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Flip sign so the first component larger than tol is positive."""
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


def axial_velocity_bound(M12: np.ndarray, M22: np.ndarray, n: np.ndarray):
    """f(n) = |n . M22 M12 n| / |M22 n|, the axial-velocity bound at axis n.

    Vectorized over rows when n is an (N, 3) array.
    """
    n = np.asarray(n, dtype=float)
    G = M22 @ M12
    if n.ndim == 1:
        return abs(float(n @ G @ n)) / float(np.linalg.norm(M22 @ n))
    num = np.abs(np.einsum("ni,ij,nj->n", n, G, n))
    den = np.linalg.norm(n @ M22.T, axis=1)
    return num / den


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n)
    ga = np.pi * (3.0 - np.sqrt(5.0))
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(ga * i), r * np.sin(ga * i), z])


def optimal_n(
    M12: np.ndarray, M22: np.ndarray, n_seeds: int = 4096
) -> tuple[np.ndarray, float]:
    """Absolute maximiser of the axial-velocity bound over the unit sphere.

    Deterministic Fibonacci-sphere seeding followed by local refinement of
    the normalized objective; n and -n give the same value and the result
    is canonicalized by sign.  Returns (n*, f(n*)); f identically zero
    (M12 = 0) yields f(n*) = 0, a swimmer that cannot translate.
    """
    seeds = _fibonacci_sphere(n_seeds)
    vals = axial_velocity_bound(M12, M22, seeds)
    order = np.argsort(vals)[::-1]

    def neg(v):
        return -axial_velocity_bound(M12, M22, v / np.linalg.norm(v))

    best_n, best_f = seeds[order[0]], vals[order[0]]
    for i in order[:8]:
        res = minimize(neg, seeds[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
        cand = res.x / np.linalg.norm(res.x)
        val = axial_velocity_bound(M12, M22, cand)
        if val > best_f:
            best_n, best_f = cand, val
    return _canonical_sign(best_n), float(best_f)


def _perp_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([1.0, 0.0, 0.0])
    if abs(n @ a) > 0.9:
        a = np.array([0.0, 1.0, 0.0])
    u = np.cross(n, a)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def _hopf_gap(M22: np.ndarray, n_star: np.ndarray, m: np.ndarray):
    """(bialternate det, imaginary-pair flag, max Re of the pair) at m.

    The linearization at the optimal equilibrium (B, e3) =
    (n* x m, M22 n* / |M22 n*|) is A = M22 [m]x [(n* x m)]x - [(M22 n*)]x;
    its bialternate determinant vanishes when two eigenvalues sum to zero.
    """
    A = M22 @ skew(m) @ skew(np.cross(n_star, m)) - skew(M22 @ n_star)
    det = float(np.linalg.det(bialternate(A)))
    ev = eig3(A).eigenvalues
    pairs = [(0, 1), (0, 2), (1, 2)]
    i, j = min(pairs, key=lambda ij: abs(ev[ij[0]] + ev[ij[1]]))
    imag = abs(ev[i].imag) > 1e-8
    return det, imag, max(abs(ev[i].real), abs(ev[j].real))


def optimal_magnetisation(M12: np.ndarray, M22: np.ndarray) -> MagnetisationOptimum:
    """Optimal magnetic moment direction for a swimmer shape.

    Scans the unit circle of directions perpendicular to n* for a moment
    m(x) whose optimal equilibrium is a Hopf point (purely imaginary
    eigenvalue pair), locating sign changes of the bialternate determinant
    and polishing them by bisection.  Such an m* guarantees stable
    relative equilibria arbitrarily close to the optimum.  If no
    imaginary-pair zero exists the best-effort m minimising the real part
    of the near-pair is returned with ``hopf`` False.
    """
    n_star, v_star = optimal_n(M12, M22)
    u, v = _perp_basis(n_star)
    m_of = lambda x: np.cos(x) * u + np.sin(x) * v

    xs = np.linspace(0.0, 2.0 * np.pi, 1025)
    dets = np.empty_like(xs)
    res = np.empty_like(xs)
    for i, x in enumerate(xs):
        dets[i], _, res[i] = _hopf_gap(M22, n_star, m_of(x))

    candidates = []
    for i in range(len(xs) - 1):
        if dets[i] == 0.0 or dets[i] * dets[i + 1] > 0.0:
            continue
        x0 = brentq(lambda x: _hopf_gap(M22, n_star, m_of(x))[0], xs[i], xs[i + 1],
                    xtol=1e-14)
        det, imag, re = _hopf_gap(M22, n_star, m_of(x0))
        if imag and re < 1e-8:
            candidates.append(x0)

    Mn = M22 @ n_star
    ma_star = float(np.linalg.norm(Mn))
    if candidates:
        # several Hopf roots can coexist on the circle (in +/- pairs);
        # keep the one whose optimal equilibrium has the conical angle
        # closest to pi/2, where the axial velocity bound is attained
        m_star = min(
            (m_of(x) for x in candidates),
            key=lambda m: abs(float(np.cross(n_star, m) @ Mn)),
        )
        hopf = True
    else:
        m_star = m_of(xs[int(np.argmin(res))])
        hopf = False

    m_star = _canonical_sign(m_star)
    cos_psi = float(np.cross(n_star, m_star) @ (Mn / ma_star))
    return MagnetisationOptimum(
        n_star=n_star, m_star=m_star, v_ax_star=v_star, Ma_star=ma_star,
        cos_psi_star=cos_psi, hopf=hopf,
    )


def _classify_point(dec, theta, phi):
    return stability.classify(dec, atlas.eval_chart(dec, theta, phi))


def optimize_drive(
    dec: PDecomposition,
    stable_only: bool = False,
    n_theta: int = 720,
    n_phi: int = 360,
) -> DriveOptimum:
    """Driving parameters maximising |v_ax| over the equilibrium chart.

    Dense grid plus local simplex refinement.  Unconstrained maxima lie
    on the phi = pi/2 slice, where sin phi is extremal; with
    ``stable_only`` the search is restricted to index-3 equilibria, and
    an empty stable set falls back to the unconstrained optimum with
    ``stable`` False.
    """
    th = np.linspace(-np.pi, np.pi, n_theta, endpoint=False)
    ph = np.linspace(0.0, np.pi, n_phi + 2)[1:-1]
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    V = np.abs(atlas.v_ax_of(dec, TH.ravel(), PH.ravel())).reshape(TH.shape)

    if stable_only:
        order = np.argsort(V.ravel())[::-1]
        seed = None
        for flat in order[: max(2000, n_theta)]:
            i, j = np.unravel_index(flat, V.shape)
            eq = _classify_point(dec, TH[i, j], PH[i, j])
            if eq.index == 3 and not eq.marginal:
                seed = (TH[i, j], PH[i, j])
                break
        if seed is None:
            unc = optimize_drive(dec, stable_only=False, n_theta=n_theta, n_phi=n_phi)
            return DriveOptimum(
                theta=unc.theta, phi=unc.phi, Ma=unc.Ma, cos_psi=unc.cos_psi,
                v_ax=unc.v_ax, stable=False, near_hopf=unc.near_hopf,
            )

        def neg(z):
            eq = _classify_point(dec, z[0], np.clip(z[1], 1e-9, np.pi - 1e-9))
            if eq.index != 3 or eq.marginal:
                return np.inf
            return -abs(eq.v_ax)

        start = np.array(seed)
    else:
        i, j = np.unravel_index(np.argmax(V), V.shape)

        def neg(z):
            return -abs(
                float(atlas.v_ax_of(dec, z[0], np.clip(z[1], 1e-9, np.pi - 1e-9)))
            )

        start = np.array([TH[i, j], PH[i, j]])

    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    z = res.x if np.isfinite(res.fun) and -res.fun >= -neg(start) else start
    theta = atlas.wrap_angle(float(z[0]))
    phi = float(np.clip(z[1], 1e-9, np.pi - 1e-9))
    eq = _classify_point(dec, theta, phi)
    re_min = float(np.min(np.abs(eq.eigenvalues.eigenvalues.real)))
    return DriveOptimum(
        theta=theta, phi=phi, Ma=eq.Ma, cos_psi=eq.cos_psi, v_ax=eq.v_ax,
        stable=bool(eq.index == 3 and not eq.marginal),
        near_hopf=bool(re_min < 1e-4),
    )


def vax_vs_ma_curve(
    dec: PDecomposition, cos_psi: float, n_points: int = 2000
) -> VaxCurve:
    """Axial velocity along the level set cos psi(theta, phi) = cos_psi.

    For each theta, cos psi(theta, .) = R(theta) cos(phi - delta(theta))
    with R = sqrt(L^2 + (kQ)^2); the level set contributes the solutions
    phi = delta +/- arccos(cos_psi / R) that land in (0, pi).  Points are
    tagged stable via the linearized index.
    """
    if not -1.0 <= cos_psi <= 1.0:
        raise ValueError("cos_psi must lie in [-1, 1]")
    rows = []
    for theta in np.linspace(-np.pi, np.pi, n_points, endpoint=False):
        k = atlas.k_factor(dec, theta)
        c, s = np.cos(theta), np.sin(theta)
        L = dec.c01 * c / dec.sigma1 + dec.c02 * s / dec.sigma2
        Q = dec.c11 * (c * c / dec.sigma1 ** 2 - s * s / dec.sigma2 ** 2) + (
            dec.c12 * c * s / (dec.sigma1 * dec.sigma2)
        )
        R = float(np.hypot(L, k * Q))
        if R < abs(cos_psi) or R == 0.0:
            continue
        delta = float(np.arctan2(k * Q, L))
        half = float(np.arccos(np.clip(cos_psi / R, -1.0, 1.0)))
        for phi in (delta + half, delta - half):
            if not 0.0 < phi < np.pi:
                continue
            eq = _classify_point(dec, theta, phi)
            rows.append(
                (theta, phi, eq.Ma, eq.v_ax, eq.index == 3 and not eq.marginal)
            )
    if not rows:
        empty = np.empty(0)
        return VaxCurve(cos_psi=cos_psi, thetas=empty, phis=empty, mas=empty,
                        v_axs=empty, stable=np.empty(0, dtype=bool))
    arr = np.array([r[:4] for r in rows])
    return VaxCurve(
        cos_psi=cos_psi,
        thetas=arr[:, 0],
        phis=arr[:, 1],
        mas=arr[:, 2],
        v_axs=arr[:, 3],
        stable=np.array([r[4] for r in rows], dtype=bool),
    )
