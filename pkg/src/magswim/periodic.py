"""Periodic orbits of the orientation dynamics.

Rotating-wave equilibria lose stability at Hopf points, spawning periodic
orbits of the co-rotating quaternion ODE.  This module seeds small loops
from Hopf points, solves for orbits by single shooting with Newton on the
anchor state and period, computes Floquet multipliers from the monodromy
matrix of the variational equations, and continues orbits through the
(Ma, cos psi) plane at constant period with pseudo-arclength steps.
Constant-period branches generically start and end on Hopf curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import atlas, dynamics, stability
from .swimmer import PDecomposition

__all__ = [
    "HopfPoint",
    "OrbitGuess",
    "PeriodicOrbit",
    "Branch",
    "hopf_points_of",
    "hopf_seed",
    "flow",
    "shoot_orbit",
    "branch_from_hopf",
    "orbit_amplitude",
    "continue_constant_period",
]


@dataclass(frozen=True)
class HopfPoint:
    """A Hopf bifurcation of the chart with its imaginary eigenfrequency."""

    theta: float
    phi: float
    Ma: float
    cos_psi: float
    lambda_im: float


@dataclass(frozen=True)
class OrbitGuess:
    """Initial data for single shooting."""

    q0: np.ndarray
    T: float
    Ma: float
    cos_psi: float


@dataclass(frozen=True)
class PeriodicOrbit:
    """A closed orbit of the co-rotating quaternion ODE.

    ``floquet`` holds the three nontrivial multipliers (the trivial unit
    multiplier from time-translation is removed); ``closure`` is the gap
    |Phi_T(q0) - q0| after shooting.  Stability requires all nontrivial
    multipliers strictly inside the unit circle.
    """

    Ma: float
    cos_psi: float
    T: float
    q0: np.ndarray
    floquet: np.ndarray
    trivial_multiplier: complex
    closure: float
    stable: bool


@dataclass(frozen=True)
class Branch:
    """A constant-period branch of periodic orbits.

    ``termination`` is "hopf" (amplitude collapsed onto an equilibrium on
    the Hopf set at the branch frequency), "equilibrium" (amplitude
    collapsed elsewhere, i.e. the corrector left the orbit family),
    "step_underflow" (Newton kept failing at the minimal step),
    "max_steps", or "stop_condition" (a caller-supplied stop test fired).
    """

    orbits: tuple[PeriodicOrbit, ...]
    T: float
    termination: str


def hopf_points_of(dec: PDecomposition, resolution: int = 300) -> list[HopfPoint]:
    """All Hopf-curve points of the chart, flattened."""
    pts = []
    for curve in stability.hopf_curves(dec, resolution=resolution):
        for i in range(len(curve)):
            pts.append(
                HopfPoint(
                    theta=float(curve.thetas[i]),
                    phi=float(curve.phis[i]),
                    Ma=float(curve.mas[i]),
                    cos_psi=float(curve.cos_psis[i]),
                    lambda_im=float(curve.lambda_im[i]),
                )
            )
    return pts


def _hopf_frame(dec: PDecomposition, point: HopfPoint):
    """(q_eq, dq_re, dq_im, T) at a Hopf point.

    dq_re and dq_im span the quaternion lift of the imaginary eigenplane
    of the linearization; small loops live in that plane.
    """
    if point.lambda_im < 1e-6:
        raise ValueError("imaginary eigenfrequency too small; period diverges")
    eq = atlas.eval_chart(dec, point.theta, point.phi)
    A = stability.linearize(dec, eq)
    w = np.linalg.eig(A)
    idx = int(np.argmax(w.eigenvalues.imag))
    v = w.eigenvectors[:, idx]
    q_eq = dynamics.equilibrium_quat(eq)
    FT = _F_T(q_eq)
    dq_re = 0.5 * FT @ np.real(v)
    dq_im = 0.5 * FT @ np.imag(v)
    nrm = max(np.linalg.norm(dq_re), 1e-300)
    return q_eq, dq_re / nrm, dq_im / max(np.linalg.norm(dq_im), 1e-300), (
        2.0 * np.pi / point.lambda_im
    )


def hopf_seed(
    dec: PDecomposition, point: HopfPoint, amplitude: float = 1e-3
) -> OrbitGuess:
    """Small-loop orbit guess at a Hopf point.

    The guess is the equilibrium quaternion displaced by ``amplitude``
    along the imaginary eigenplane of the linearization, with period
    2 pi / lambda_I.  Near fold endpoints lambda_I -> 0 and the period
    diverges; seeding is refused below 1e-6.
    """
    q_eq, dq_re, _, T = _hopf_frame(dec, point)
    q0 = q_eq + amplitude * dq_re
    return OrbitGuess(
        q0=q0 / np.linalg.norm(q0),
        T=T,
        Ma=point.Ma,
        cos_psi=point.cos_psi,
    )


def _rhs_c(q, Ma, psi, dec):
    """Complex-safe right-hand side (polynomial/rational in q)."""
    q1, q2, q3, q4 = q
    n = q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4
    R = np.array(
        [
            [q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4,
             2 * (q1 * q2 - q3 * q4), 2 * (q1 * q3 + q2 * q4)],
            [2 * (q1 * q2 + q3 * q4),
             -q1 * q1 + q2 * q2 - q3 * q3 + q4 * q4, 2 * (q2 * q3 - q1 * q4)],
            [2 * (q1 * q3 - q2 * q4), 2 * (q2 * q3 + q1 * q4),
             -q1 * q1 - q2 * q2 + q3 * q3 + q4 * q4],
        ]
    ) / n
    bhat = np.array([np.sin(psi), 0.0, np.cos(psi)])
    u = Ma * (R @ np.array([0.0, 0.0, 1.0])) - dec.P @ (R @ bhat)
    F = np.array(
        [
            [q4, -q3, q2, -q1],
            [q3, q4, -q1, -q2],
            [-q2, q1, q4, -q3],
        ]
    )
    return 0.5 * F.T @ u - 0.5 * (n - 1.0) * q


def _jacobian_cs(q, Ma, psi, dec, h: float = 1e-100):
    """4x4 Jacobian of the right-hand side by complex step (test oracle)."""
    J = np.empty((4, 4))
    for k in range(4):
        dq = np.zeros(4, dtype=complex)
        dq[k] = 1j * h
        J[:, k] = np.imag(_rhs_c(q.astype(complex) + dq, Ma, psi, dec)) / h
    return J


def _dS_matvec(q, v):
    """Columns k: (dS/dq_k) v for the unnormalized rotation matrix S(q)."""
    q1, q2, q3, q4 = q
    v1, v2, v3 = v
    out = np.empty((3, 4))
    out[:, 0] = 2 * np.array(
        [q1 * v1 + q2 * v2 + q3 * v3, q2 * v1 - q1 * v2 - q4 * v3,
         q3 * v1 + q4 * v2 - q1 * v3]
    )
    out[:, 1] = 2 * np.array(
        [-q2 * v1 + q1 * v2 + q4 * v3, q1 * v1 + q2 * v2 + q3 * v3,
         -q4 * v1 + q3 * v2 - q2 * v3]
    )
    out[:, 2] = 2 * np.array(
        [-q3 * v1 - q4 * v2 + q1 * v3, q4 * v1 - q3 * v2 + q2 * v3,
         q1 * v1 + q2 * v2 + q3 * v3]
    )
    out[:, 3] = 2 * np.array(
        [q4 * v1 - q3 * v2 + q2 * v3, q3 * v1 + q4 * v2 - q1 * v3,
         -q2 * v1 + q1 * v2 + q4 * v3]
    )
    return out


def _F_T(q):
    q1, q2, q3, q4 = q
    return np.array(
        [[q4, q3, -q2], [-q3, q4, q1], [q2, -q1, q4], [-q1, -q2, -q3]]
    )


def _jacobian(q, Ma, psi, dec):
    """Closed-form 4x4 Jacobian of the norm-corrected right-hand side."""
    n = float(q @ q)
    R = dynamics.quat_to_matrix(q)
    bhat = np.array([np.sin(psi), 0.0, np.cos(psi)])
    zhat = np.array([0.0, 0.0, 1.0])
    u_lin = Ma * (R @ zhat) - dec.P @ (R @ bhat)
    # dU[:, k] = d u / d q_k
    dU = (Ma * _dS_matvec(q, zhat) - dec.P @ _dS_matvec(q, bhat)) / n
    dU -= (2.0 / n) * np.outer(u_lin, q)
    u1, u2, u3 = u_lin
    G = np.array(
        [
            [0.0, -u3, u2, u1],
            [u3, 0.0, -u1, u2],
            [-u2, u1, 0.0, u3],
            [-u1, -u2, -u3, 0.0],
        ]
    )
    J = 0.5 * G + 0.5 * _F_T(q) @ dU
    J -= np.outer(q, q)
    J -= 0.5 * (n - 1.0) * np.eye(4)
    return J


def flow(
    q0: np.ndarray,
    T: float,
    Ma: float,
    cos_psi: float,
    dec: PDecomposition,
    tol: float = 1e-10,
    with_monodromy: bool = False,
    with_sensitivities: bool = False,
):
    """Time-T flow map of the orbit ODE.

    With ``with_monodromy`` the 4x4 variational matrix is integrated
    alongside and (qT, M) is returned; ``with_sensitivities`` additionally
    integrates the parameter sensitivities d qT / d Ma and d qT / d cos_psi
    in the same pass, returning (qT, M, d_ma, d_cp).
    """
    psi = float(np.arccos(np.clip(cos_psi, -1.0, 1.0)))
    if not (with_monodromy or with_sensitivities):

        def fun(t, y):
            return dynamics.rhs(y, Ma, psi, dec)

        sol = solve_ivp(fun, (0.0, T), q0, method="DOP853", rtol=tol, atol=tol * 1e-2)
        if sol.status != 0:
            raise RuntimeError(f"flow integration failed: {sol.message}")
        return sol.y[:, -1]

    zhat = np.array([0.0, 0.0, 1.0])
    sp = np.sin(psi)
    # d(sin psi, 0, cos psi)/d cos_psi
    db_dcp = np.array([-cos_psi / sp if sp > 1e-12 else 0.0, 0.0, 1.0])
    bhat = np.array([sp, 0.0, np.cos(psi)])

    if with_sensitivities:

        def fun(t, y):
            q = y[:4]
            J = _jacobian(q, Ma, psi, dec)
            R = dynamics.quat_to_matrix(q)
            FT = _F_T(q)
            df_dma = 0.5 * FT @ (R @ zhat)
            df_dcp = -0.5 * FT @ (dec.P @ (R @ db_dcp))
            out = np.empty(28)
            out[:4] = dynamics.rhs(q, Ma, psi, dec)
            out[4:20] = (J @ y[4:20].reshape(4, 4)).ravel()
            out[20:24] = J @ y[20:24] + df_dma
            out[24:28] = J @ y[24:28] + df_dcp
            return out

        y0 = np.concatenate([q0, np.eye(4).ravel(), np.zeros(8)])
        sol = solve_ivp(fun, (0.0, T), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
        if sol.status != 0:
            raise RuntimeError(f"flow integration failed: {sol.message}")
        yT = sol.y[:, -1]
        return yT[:4], yT[4:20].reshape(4, 4), yT[20:24], yT[24:28]

    def fun(t, y):
        q = y[:4]
        J = _jacobian(q, Ma, psi, dec)
        return np.concatenate(
            [dynamics.rhs(q, Ma, psi, dec), (J @ y[4:].reshape(4, 4)).ravel()]
        )

    y0 = np.concatenate([q0, np.eye(4).ravel()])
    sol = solve_ivp(fun, (0.0, T), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return sol.y[:4, -1], sol.y[4:, -1].reshape(4, 4)


def _split_multipliers(M: np.ndarray):
    """(trivial multiplier, nontrivial multipliers sorted by |.| desc)."""
    mu = np.linalg.eigvals(M)
    i = int(np.argmin(np.abs(mu - 1.0)))
    trivial = mu[i]
    rest = np.delete(mu, i)
    return trivial, rest[np.argsort(np.abs(rest))[::-1]]


def shoot_orbit(
    dec: PDecomposition,
    guess: OrbitGuess,
    max_iter: int = 25,
    tol: float = 1e-10,
) -> PeriodicOrbit:
    """Single-shooting Newton solve for a periodic orbit.

    Unknowns are the anchor state q0 and the period T; the phase is fixed
    by requiring the correction to be orthogonal to the initial flow
    direction.  Raises on Newton divergence.
    """
    q0 = np.asarray(guess.q0, dtype=float).copy()
    T = float(guess.T)
    Ma, cp = guess.Ma, guess.cos_psi
    psi = float(np.arccos(np.clip(cp, -1.0, 1.0)))
    v_ref = dynamics.rhs(q0, Ma, psi, dec)

    def residual(q0, T):
        qT, M = flow(q0, T, Ma, cp, dec, with_monodromy=True)
        return qT - q0, qT, M

    r, qT, M = residual(q0, T)
    for _ in range(max_iter):
        if np.linalg.norm(r) < tol:
            break
        fT = dynamics.rhs(qT, Ma, psi, dec)
        Jac = np.zeros((5, 5))
        Jac[:4, :4] = M - np.eye(4)
        Jac[:4, 4] = fT
        Jac[4, :4] = v_ref
        rhs_vec = -np.concatenate([r, [0.0]])
        try:
            dz = np.linalg.solve(Jac, rhs_vec)
        except np.linalg.LinAlgError:
            dz, *_ = np.linalg.lstsq(Jac, rhs_vec, rcond=None)
        # near a Hopf point the monodromy is close to the identity on the
        # critical plane and raw Newton steps explode; regularize instead
        if not np.all(np.isfinite(dz)) or np.linalg.norm(dz[:4]) > 0.5 or abs(
            dz[4]
        ) > 0.2 * T:
            mu = 1e-8 * max(1.0, np.linalg.norm(Jac))
            for _ in range(20):
                dz = np.linalg.solve(Jac.T @ Jac + mu * np.eye(5), Jac.T @ rhs_vec)
                if np.linalg.norm(dz[:4]) <= 0.5 and abs(dz[4]) <= 0.2 * T:
                    break
                mu *= 10.0
        # backtracking line search on the closure residual
        lam = 1.0
        base = np.linalg.norm(r)
        for _ in range(10):
            q_try = q0 + lam * dz[:4]
            T_try = T + lam * dz[4]
            if T_try > 0:
                r_try, qT_try, M_try = residual(q_try, T_try)
                if np.linalg.norm(r_try) < base:
                    q0, T, r, qT, M = q_try, T_try, r_try, qT_try, M_try
                    break
            lam *= 0.5
        else:
            raise RuntimeError("shooting Newton stalled (no descent step)")
    else:
        raise RuntimeError("shooting Newton did not converge")

    closure = float(np.linalg.norm(r))
    trivial, rest = _split_multipliers(M)
    stable = bool(np.all(np.abs(rest) < 1.0 - 1e-8))
    return PeriodicOrbit(
        Ma=Ma, cos_psi=cp, T=T, q0=q0, floquet=rest,
        trivial_multiplier=complex(trivial), closure=closure, stable=stable,
    )


def branch_from_hopf(
    dec: PDecomposition,
    point: HopfPoint,
    amplitude: float = 2e-3,
    direction: int = 1,
    **continue_kwargs,
) -> Branch:
    """Constant-period branch emanating from a Hopf point.

    The period is frozen at 2 pi / lambda_I.  The first finite-amplitude
    orbit is found by Newton on (q0, Ma, cos psi) with the amplitude
    |q0 - q_eq| prescribed: near the Hopf the monodromy is degenerate
    (three multipliers at 1) and fixed-parameter shooting fails, but the
    free parameters restore full rank.  The branch is then continued with
    :func:`continue_constant_period`.
    """
    q_eq, dq_re, dq_im, T = _hopf_frame(dec, point)
    z = np.concatenate([q_eq + amplitude * dq_re, [point.Ma, point.cos_psi]])
    for it in range(40):
        q0, Ma, cp = z[:4], float(z[4]), float(z[5])
        qT, M, d_ma, d_cp = flow(q0, T, Ma, cp, dec, with_sensitivities=True)
        r = np.empty(6)
        r[:4] = qT - q0
        r[4] = dq_im @ (q0 - q_eq)
        r[5] = float((q0 - q_eq) @ (q0 - q_eq)) - amplitude ** 2
        if np.linalg.norm(r[:4]) < 1e-10 and abs(r[5]) < 1e-12:
            break
        J = np.zeros((6, 6))
        J[:4, :4] = M - np.eye(4)
        J[:4, 4] = d_ma
        J[:4, 5] = d_cp
        J[4, :4] = dq_im
        J[5, :4] = 2.0 * (q0 - q_eq)
        dz = np.linalg.lstsq(J, -r, rcond=None)[0]
        # keep the correction inside the local neighbourhood; the seed
        # amplitude must stay small because any strongly unstable extra
        # multiplier amplifies the quadratic seed error over one period
        scale = min(1.0, 0.5 * amplitude / max(np.linalg.norm(dz[:4]), 1e-300))
        z = z + scale * dz
    else:
        raise RuntimeError("Hopf branch-off Newton did not converge")

    _, M, _, _ = flow(z[:4], T, float(z[4]), float(z[5]), dec, with_sensitivities=True)
    trivial, rest = _split_multipliers(M)
    first = PeriodicOrbit(
        Ma=float(z[4]), cos_psi=float(z[5]), T=T, q0=z[:4].copy(),
        floquet=rest, trivial_multiplier=complex(trivial),
        closure=float(np.linalg.norm(r[:4])),
        stable=bool(np.all(np.abs(rest) < 1.0 - 1e-8)),
    )
    return continue_constant_period(dec, first, direction=direction, **continue_kwargs)


def orbit_amplitude(dec: PDecomposition, orbit: PeriodicOrbit, n: int = 8) -> float:
    """Geodesic diameter of the orbit, sampled at n points."""
    return _trajectory_amplitude(
        dec, orbit.q0, orbit.T, orbit.Ma, orbit.cos_psi, n=n
    )


def continue_constant_period(
    dec: PDecomposition,
    orbit: PeriodicOrbit,
    direction: int = 1,
    max_steps: int = 200,
    step: float = 5e-3,
    min_step: float = 1e-6,
    max_step: float | None = None,
    amplitude_floor: float = 2e-3,
    tol: float = 1e-10,
    stop_when=None,
) -> Branch:
    """Continue a periodic orbit at constant period through (Ma, cos psi).

    Pseudo-arclength stepping on the unknowns (q0, Ma, cos psi) with the
    period frozen; parameter sensitivities come from the augmented
    variational flow.  The step size adapts between ``min_step`` and
    ``max_step`` based on corrector performance.  The
    branch terminates when the orbit amplitude collapses (arrival on
    another Hopf point), when the step underflows, at ``max_steps``, or
    once ``stop_when(orbit)`` returns true for a newly accepted orbit
    (termination "stop_condition").
    """
    T = orbit.T
    orbits = [orbit]
    z = np.concatenate([orbit.q0, [orbit.Ma, orbit.cos_psi]])
    tangent = None
    termination = "max_steps"
    h = step
    if max_step is None:
        max_step = 8.0 * step

    def system(z, v_anchor, q_anchor):
        """Residual (5,), Jacobian (5, 6), monodromy at z."""
        q0, Ma, cp = z[:4], float(z[4]), float(z[5])
        qT, M, d_ma, d_cp = flow(
            q0, T, Ma, cp, dec, tol=tol, with_sensitivities=True
        )
        r = np.empty(5)
        r[:4] = qT - q0
        r[4] = v_anchor @ (q0 - q_anchor)
        J = np.zeros((5, 6))
        J[:4, :4] = M - np.eye(4)
        J[:4, 4] = d_ma
        J[:4, 5] = d_cp
        J[4, :4] = v_anchor
        return r, J, M

    amp_prev = _trajectory_amplitude(
        dec, orbit.q0, T, orbit.Ma, orbit.cos_psi, n=4, tol=tol
    )
    for _ in range(max_steps):
        psi = float(np.arccos(np.clip(z[5], -1.0, 1.0)))
        v_anchor = dynamics.rhs(z[:4], float(z[4]), psi, dec)
        q_anchor = z[:4].copy()
        _, J, _ = system(z, v_anchor, q_anchor)
        _, _, Vt = np.linalg.svd(J)
        t_vec = Vt[-1]
        if tangent is None:
            sgn = np.sign(t_vec[4]) * direction if abs(t_vec[4]) > 1e-12 else direction
            t_vec = t_vec * sgn
        elif t_vec @ tangent < 0:
            t_vec = -t_vec
        tangent = t_vec

        accepted = None
        while h >= min_step:
            z_new = z + h * tangent
            z_pred = z_new.copy()
            for n_corr in range(12):
                if not np.all(np.isfinite(z_new)) or abs(z_new[5]) > 1.0:
                    break
                r, J, M = system(z_new, v_anchor, q_anchor)
                if np.linalg.norm(r[:4]) < 1e-9:
                    accepted = (z_new, M, float(np.linalg.norm(r[:4])), n_corr)
                    break
                Jac = np.vstack([J, tangent])
                rhs_vec = -np.concatenate([r, [tangent @ (z_new - z_pred)]])
                try:
                    z_new = z_new + np.linalg.solve(Jac, rhs_vec)
                except np.linalg.LinAlgError:
                    break
            if accepted is not None:
                # any equilibrium solves the closure equation at any
                # period, so a sudden amplitude collapse away from the
                # Hopf set means the corrector jumped off the orbit
                # family; retry with a smaller step
                amp_new = _trajectory_amplitude(dec, accepted[0][:4], T,
                                                float(accepted[0][4]),
                                                float(accepted[0][5]),
                                                n=4, tol=tol)
                if (
                    amp_new < 0.25 * amp_prev
                    and amp_prev > 8.0 * amplitude_floor
                ):
                    accepted = None
                else:
                    break
            h *= 0.5
        if accepted is None:
            termination = "step_underflow"
            break

        z, M, closure, n_corr = accepted
        trivial, rest = _split_multipliers(M)
        orb = PeriodicOrbit(
            Ma=float(z[4]), cos_psi=float(z[5]), T=T, q0=z[:4].copy(),
            floquet=rest, trivial_multiplier=complex(trivial),
            closure=closure,
            stable=bool(np.all(np.abs(rest) < 1.0 - 1e-8)),
        )
        orbits.append(orb)
        amp_prev = amp_new
        if amp_new < amplitude_floor:
            termination = "hopf" if _near_hopf(dec, orb) else "equilibrium"
            break
        if stop_when is not None and stop_when(orb):
            termination = "stop_condition"
            break
        if n_corr <= 3:
            h = min(max_step, 1.5 * h)

    return Branch(orbits=tuple(orbits), T=T, termination=termination)


def _trajectory_amplitude(
    dec: PDecomposition, q0: np.ndarray, T: float, Ma: float, cos_psi: float,
    n: int = 8, tol: float = 1e-10,
) -> float:
    """Geodesic diameter of the trajectory started at q0, sampled at n points."""
    qs = [q0]
    q = q0
    for _ in range(n - 1):
        q = flow(q, T / n, Ma, cos_psi, dec, tol=tol)
        qs.append(q)
    return max(
        dynamics.quat_distance(qs[i], qs[j])
        for i in range(n)
        for j in range(i + 1, n)
    )


def _near_hopf(dec: PDecomposition, orbit: PeriodicOrbit, rel_tol: float = 0.05) -> bool:
    """Whether a collapsed orbit sits on the Hopf set at the right frequency.

    The equilibrium it collapsed onto must carry an eigenvalue pair with
    near-zero real part and imaginary part matching 2 pi / T.
    """
    psi = float(np.arccos(np.clip(orbit.cos_psi, -1.0, 1.0)))
    ev = np.linalg.eigvals(_jacobian(orbit.q0, orbit.Ma, psi, dec))
    # drop the structural -|q|^2 normalization eigenvalue and keep the
    # conjugate pair with the largest imaginary part
    omega = float(np.max(np.abs(ev.imag)))
    if omega < 1e-12:
        return False
    pair = ev[np.abs(np.abs(ev.imag) - omega) < 1e-12]
    target = 2.0 * np.pi / orbit.T
    return (
        abs(omega - target) < rel_tol * target
        and float(np.max(np.abs(pair.real))) < rel_tol * target
    )
