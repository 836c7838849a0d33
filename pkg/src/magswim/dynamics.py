"""Time integration of the orientation and translation dynamics.

The orientation of the swimmer relative to the rotating-field frame is
integrated as a quaternion ODE with a norm-stabilising correction term;
the lab-frame position follows by quadrature.  On top of the integrator
the module provides steady-state detection, basin-of-attraction sampling,
helix descriptors for the motion at a relative equilibrium, and
quasi-static parameter schedules with branch tracking.

Conventions: quaternions are 4-vectors (q1, q2, q3, q4) with scalar part
q4, reported with q4 >= 0 (q and -q encode the same rotation).  The
rotation matrix Q(q) maps rotating-frame components to body components;
in the rotating frame the field is fixed at (sin psi, 0, cos psi) and its
rotation axis at (0, 0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import atlas, stability
from .swimmer import PDecomposition

__all__ = [
    "SimState",
    "Trajectory",
    "HelixDescriptor",
    "BasinSample",
    "Schedule",
    "ScheduleEvent",
    "ScheduleResult",
    "IntegrationError",
    "quat_to_matrix",
    "matrix_to_quat",
    "canonical_quat",
    "quat_distance",
    "random_orientation",
    "equilibrium_quat",
    "angular_mismatch",
    "rhs",
    "integrate_orientation",
    "integrate_full",
    "helix_of",
    "basin_sample",
    "run_schedule",
    "stability_edge_cospsi",
    "fold_switch_schedule",
    "low_ma_side_schedule",
    "two_parameter_loop",
    "LoopStep",
    "LoopResult",
    "ATTRACTOR_PERIODIC",
    "ATTRACTOR_NONE",
]

ATTRACTOR_PERIODIC = -2
ATTRACTOR_NONE = -1


class IntegrationError(RuntimeError):
    """Integrator failure; carries the last reached state."""

    def __init__(self, message: str, t: float, q: np.ndarray):
        super().__init__(f"{message} (at t = {t:.6g})")
        self.t = t
        self.q = q


@dataclass(frozen=True)
class SimState:
    """One trajectory sample: time, orientation quaternion, position."""

    t: float
    q: np.ndarray
    x: np.ndarray | None = None


@dataclass(frozen=True)
class Trajectory:
    """Integration output: times, quaternions (n x 4), positions (n x 3)."""

    t: np.ndarray
    q: np.ndarray
    x: np.ndarray | None = None
    converged: bool = False

    def states(self) -> list[SimState]:
        return [
            SimState(
                float(self.t[i]),
                self.q[i],
                None if self.x is None else self.x[i],
            )
            for i in range(len(self.t))
        ]


@dataclass(frozen=True)
class HelixDescriptor:
    """Helical trajectory of a relative equilibrium.

    ``axis`` is the helix axis in the lab frame (the rotation axis of the
    field).  Pitch may be negative (motion against the axis); the radius
    is nonnegative.  v_ax = Ma * pitch / (2 pi) exactly.
    """

    axis: np.ndarray
    pitch: float
    radius: float
    v_ax: float


@dataclass(frozen=True)
class BasinSample:
    """Outcome of one basin-of-attraction probe.

    ``attractor_id`` indexes the stable equilibria passed to
    :func:`basin_sample`, or equals ATTRACTOR_PERIODIC / ATTRACTOR_NONE.
    """

    q0: np.ndarray
    attractor_id: int
    t_converge: float


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear driving-parameter program.

    ``waypoints`` is an ordered list of (t, Ma, cos_psi) with strictly
    increasing times; parameters are interpolated linearly in between.
    ``rate_bound`` is the maximal |d(Ma, cos psi)/dt| along the program
    and must stay well below the slowest attraction rate for the
    quasi-static tracking assumption to hold.
    """

    waypoints: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        ts = [w[0] for w in self.waypoints]
        if len(ts) < 2 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("waypoint times must be strictly increasing")

    @property
    def t_end(self) -> float:
        return self.waypoints[-1][0]

    @property
    def rate_bound(self) -> float:
        rates = []
        for (t0, ma0, cp0), (t1, ma1, cp1) in zip(
            self.waypoints, self.waypoints[1:]
        ):
            rates.append(np.hypot(ma1 - ma0, cp1 - cp0) / (t1 - t0))
        return float(max(rates))

    def params_at(self, t: float) -> tuple[float, float]:
        ts = np.array([w[0] for w in self.waypoints])
        mas = np.array([w[1] for w in self.waypoints])
        cps = np.array([w[2] for w in self.waypoints])
        return float(np.interp(t, ts, mas)), float(np.interp(t, ts, cps))


@dataclass(frozen=True)
class ScheduleEvent:
    """Branch-tracking event during a schedule run."""

    t: float
    kind: str  # "start" | "jump" | "step_out" | "step_in" | "end"
    Ma: float
    cos_psi: float
    theta: float | None = None
    phi: float | None = None
    v_ax: float | None = None


@dataclass(frozen=True)
class ScheduleResult:
    """Event log and final state of a quasi-static schedule run."""

    events: tuple[ScheduleEvent, ...]
    final_q: np.ndarray
    final_equilibrium: atlas.Equilibrium | None


# ---------------------------------------------------------------------------
# quaternion helpers


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix Q(q); homogeneous of degree 0 in q (any norm)."""
    q1, q2, q3, q4 = q
    n = q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4
    return (
        np.array(
            [
                [
                    q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4,
                    2 * (q1 * q2 - q3 * q4),
                    2 * (q1 * q3 + q2 * q4),
                ],
                [
                    2 * (q1 * q2 + q3 * q4),
                    -q1 * q1 + q2 * q2 - q3 * q3 + q4 * q4,
                    2 * (q2 * q3 - q1 * q4),
                ],
                [
                    2 * (q1 * q3 - q2 * q4),
                    2 * (q2 * q3 + q1 * q4),
                    -q1 * q1 - q2 * q2 + q3 * q3 + q4 * q4,
                ],
            ]
        )
        / n
    )


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Unit quaternion of a rotation matrix (Shepperd's branch selection)."""
    t = np.trace(R)
    cand = np.array([R[0, 0], R[1, 1], R[2, 2], t])
    i = int(np.argmax(cand))
    q = np.empty(4)
    if i == 3:
        r = np.sqrt(1.0 + t)
        s = 0.5 / r
        q[3] = 0.5 * r
        q[0] = (R[2, 1] - R[1, 2]) * s
        q[1] = (R[0, 2] - R[2, 0]) * s
        q[2] = (R[1, 0] - R[0, 1]) * s
    else:
        j, k = (i + 1) % 3, (i + 2) % 3
        r = np.sqrt(1.0 + R[i, i] - R[j, j] - R[k, k])
        s = 0.5 / r
        q[i] = 0.5 * r
        q[j] = (R[j, i] + R[i, j]) * s
        q[k] = (R[k, i] + R[i, k]) * s
        q[3] = (R[k, j] - R[j, k]) * s
    return canonical_quat(q / np.linalg.norm(q))


def canonical_quat(q: np.ndarray) -> np.ndarray:
    """Representative with nonnegative scalar part q4."""
    return -q if q[3] < 0 else q


def quat_distance(qa: np.ndarray, qb: np.ndarray) -> float:
    """Geodesic distance on SO(3) with antipodal identification (radians)."""
    qa = qa / np.linalg.norm(qa)
    qb = qb / np.linalg.norm(qb)
    return float(2.0 * np.arccos(min(1.0, abs(float(qa @ qb)))))


def random_orientation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation: normalized 4D Gaussian quaternion."""
    q = rng.normal(size=4)
    return canonical_quat(q / np.linalg.norm(q))


def equilibrium_quat(eq: atlas.Equilibrium) -> np.ndarray:
    """Orientation quaternion of a relative equilibrium.

    Builds the rotation with third column e3 and with the field direction
    (sin psi, 0, cos psi) mapped to B.  Undefined when B is parallel to e3
    (sin psi = 0), which does not occur at chart equilibria with Ma > 0.
    """
    spsi = np.sqrt(max(0.0, 1.0 - eq.cos_psi ** 2))
    if spsi < 1e-12:
        raise ValueError("equilibrium orientation undefined at sin psi = 0")
    a = (eq.B - eq.cos_psi * eq.e3) / spsi
    R = np.column_stack([a, np.cross(eq.e3, a), eq.e3])
    return matrix_to_quat(R)


# ---------------------------------------------------------------------------
# right-hand sides


def _field_vectors(psi: float) -> tuple[np.ndarray, np.ndarray]:
    return np.array([np.sin(psi), 0.0, np.cos(psi)]), np.array([0.0, 0.0, 1.0])


def angular_mismatch(q: np.ndarray, Ma: float, psi: float, dec: PDecomposition):
    """u = Ma e3 - omega in the body frame; zero exactly at equilibria."""
    bhat, zhat = _field_vectors(psi)
    R = quat_to_matrix(q)
    return Ma * (R @ zhat) - dec.P @ (R @ bhat)


def rhs(
    q: np.ndarray, Ma: float, psi: float, dec: PDecomposition, correct: bool = True
) -> np.ndarray:
    """Quaternion time derivative dq/dt = 1/2 F(q)^T u - 1/2 (|q|^2 - 1) q.

    With ``correct`` false the norm-stabilising term is dropped; both forms
    agree on the unit sphere.
    """
    q1, q2, q3, q4 = q
    u = angular_mismatch(q, Ma, psi, dec)
    F = np.array(
        [
            [q4, -q3, q2, -q1],
            [q3, q4, -q1, -q2],
            [-q2, q1, q4, -q3],
        ]
    )
    dq = 0.5 * F.T @ u
    if correct:
        dq = dq - 0.5 * (q @ q - 1.0) * q
    return dq


def _lab_velocity(t: float, q: np.ndarray, Ma: float, psi: float, dec) -> np.ndarray:
    """Lab-frame translational velocity at time t.

    Body-frame velocity is M12 (m x B); the body-to-rotating transform is
    Q(q)^T and the rotating frame is turned by R3(Ma t) in the lab.
    """
    bhat, _ = _field_vectors(psi)
    R = quat_to_matrix(q)
    v_body = dec.vmat @ (R @ bhat)
    c, s = np.cos(Ma * t), np.sin(Ma * t)
    R3 = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return R3 @ (R.T @ v_body)


# ---------------------------------------------------------------------------
# integration


def _run_ivp(fun, t_span, y0, tol, events=None, dense=False, max_step=np.inf):
    sol = solve_ivp(
        fun,
        t_span,
        y0,
        method="RK45",
        rtol=tol,
        atol=tol * 1e-3,
        events=events,
        dense_output=dense,
        max_step=max_step,
    )
    if sol.status == -1:
        raise IntegrationError(sol.message, float(sol.t[-1]), sol.y[:4, -1])
    return sol


def integrate_orientation(
    q0: np.ndarray,
    Ma: float,
    psi: float,
    dec: PDecomposition,
    t_end: float,
    tol: float = 1e-9,
    *,
    steady_tol: float = 1e-10,
    stop_at_steady: bool = False,
) -> Trajectory:
    """Integrate the orientation ODE with adaptive RK45.

    With ``stop_at_steady`` the run terminates once the angular-velocity
    mismatch |u| falls below ``steady_tol`` (u vanishes exactly at relative
    equilibria), and the trajectory is marked converged.
    """
    if not (1e-12 <= tol <= 1e-6):
        raise ValueError("tol must lie in [1e-12, 1e-6]")

    def fun(t, y):
        return rhs(y, Ma, psi, dec)

    events = None
    if stop_at_steady:

        def steady(t, y):
            return float(np.linalg.norm(angular_mismatch(y, Ma, psi, dec))) - steady_tol

        steady.terminal = True
        steady.direction = -1
        events = [steady]

    sol = _run_ivp(fun, (0.0, t_end), np.asarray(q0, dtype=float), tol, events=events)
    converged = bool(stop_at_steady and sol.status == 1)
    return Trajectory(t=sol.t, q=sol.y.T.copy(), converged=converged)


def integrate_full(
    q0: np.ndarray,
    x0: np.ndarray,
    Ma: float,
    psi: float,
    dec: PDecomposition,
    t_end: float,
    tol: float = 1e-9,
) -> Trajectory:
    """Integrate orientation and lab-frame position together."""
    if not (1e-12 <= tol <= 1e-6):
        raise ValueError("tol must lie in [1e-12, 1e-6]")

    def fun(t, y):
        q = y[:4]
        return np.concatenate(
            [rhs(q, Ma, psi, dec), _lab_velocity(t, q, Ma, psi, dec)]
        )

    y0 = np.concatenate([np.asarray(q0, dtype=float), np.asarray(x0, dtype=float)])
    sol = _run_ivp(fun, (0.0, t_end), y0, tol)
    return Trajectory(t=sol.t, q=sol.y[:4].T.copy(), x=sol.y[4:].T.copy())


def helix_of(dec: PDecomposition, eq: atlas.Equilibrium) -> HelixDescriptor:
    """Closed-form helix of the motion at a relative equilibrium.

    In the lab frame the body translates along the field rotation axis
    while rotating about it: pitch = 2 pi e3 . Ch e3 and radius =
    |e3 x Ch e3| with Ch = M12 M22^-1, both evaluated in the body frame.
    """
    che3 = dec.ch @ eq.e3
    pitch = 2.0 * np.pi * float(eq.e3 @ che3)
    radius = float(np.linalg.norm(np.cross(eq.e3, che3)))
    return HelixDescriptor(
        axis=np.array([0.0, 0.0, 1.0]),
        pitch=pitch,
        radius=radius,
        v_ax=eq.Ma * pitch / (2.0 * np.pi),
    )


# ---------------------------------------------------------------------------
# basins


def basin_sample(
    dec: PDecomposition,
    Ma: float,
    psi: float,
    n: int,
    seed: int,
    *,
    t_end: float = 5000.0,
    tol: float = 1e-9,
    match_tol: float = 1e-6,
    first_index: int = 0,
) -> list[BasinSample]:
    """Classify n random initial orientations by their attractor.

    Initial conditions are uniform on SO(3), drawn from per-sample RNG
    streams seeded with (seed, index) so results are independent of
    evaluation order.  Each trajectory is integrated until the steady-state
    detector fires or t_end is reached; converged samples are matched to
    the nearest stable equilibrium by geodesic distance (antipodal
    quaternions identified), non-steady endpoints are classified as
    periodic when the late trajectory revisits its final state.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eqs = [stability.classify(dec, e) for e in atlas.solve_equilibria(dec, Ma, np.cos(psi))]
    stable = [e for e in eqs if e.index == 3 and not e.marginal]
    stable_q = [equilibrium_quat(e) for e in stable]
    out = []
    for i in range(first_index, first_index + n):
        rng = np.random.default_rng([seed, i])
        q0 = random_orientation(rng)
        out.append(
            _classify_sample(dec, Ma, psi, q0, stable_q, t_end, tol, match_tol)
        )
    return out


def _classify_sample(dec, Ma, psi, q0, stable_q, t_end, tol, match_tol):
    if np.linalg.norm(angular_mismatch(q0, Ma, psi, dec)) < 1e-10:
        aid = _match_attractor(q0, stable_q, match_tol)
        return BasinSample(q0=q0, attractor_id=aid, t_converge=0.0)
    traj = integrate_orientation(
        q0, Ma, psi, dec, t_end, tol, stop_at_steady=True
    )
    qf = canonical_quat(traj.q[-1] / np.linalg.norm(traj.q[-1]))
    aid = _match_attractor(qf, stable_q, match_tol)
    if traj.converged or aid != ATTRACTOR_NONE:
        return BasinSample(q0=q0, attractor_id=aid, t_converge=float(traj.t[-1]))
    # neither steady nor near a stable equilibrium: a periodic attractor
    # shows up as a tail that makes O(1) excursions yet revisits the
    # final state; a slowly converging transient does neither cleanly
    tail = traj.q[-max(10, len(traj.q) // 3) :]
    dists = np.array([quat_distance(qf, qq) for qq in tail[:-5]])
    if len(dists) and np.max(dists) > 0.05 and np.min(dists) < 0.02:
        aid = ATTRACTOR_PERIODIC
    return BasinSample(q0=q0, attractor_id=aid, t_converge=float(t_end))


def _match_attractor(q, stable_q, match_tol):
    best, best_d = ATTRACTOR_NONE, np.inf
    for i, qs in enumerate(stable_q):
        d = quat_distance(q, qs)
        if d < best_d:
            best, best_d = i, d
    return best if best_d < match_tol else ATTRACTOR_NONE


# ---------------------------------------------------------------------------
# quasi-static schedules


def run_schedule(
    dec: PDecomposition,
    schedule: Schedule,
    q0: np.ndarray,
    *,
    tol: float = 1e-9,
    n_checkpoints: int = 400,
    jump_tol: float = 0.3,
) -> ScheduleResult:
    """Integrate through a slow parameter program and track the branch.

    At regular checkpoints the equilibrium nearest to the current
    orientation is located in the chart; a jump event is logged whenever
    that location moves by more than ``jump_tol`` in (theta, phi) between
    checkpoints (the signature of the tracked branch losing stability),
    and step-out/step-in events are logged when the existence region is
    left or re-entered.
    """
    t_grid = np.linspace(0.0, schedule.t_end, n_checkpoints + 1)
    events: list[ScheduleEvent] = []
    q = np.asarray(q0, dtype=float)
    last_chart: tuple[float, float] | None = None
    outside = False

    def fun(t, y):
        ma, cp = schedule.params_at(t)
        return rhs(y, ma, float(np.arccos(np.clip(cp, -1, 1))), dec)

    for k in range(n_checkpoints + 1):
        t = float(t_grid[k])
        if k > 0:
            sol = _run_ivp(fun, (float(t_grid[k - 1]), t), q, tol)
            q = sol.y[:, -1]
        ma, cp = schedule.params_at(t)
        eqs = atlas.solve_equilibria(dec, ma, cp)
        if not eqs:
            if not outside:
                events.append(ScheduleEvent(t=t, kind="step_out", Ma=ma, cos_psi=cp))
                outside = True
            last_chart = None
            continue
        if outside:
            events.append(ScheduleEvent(t=t, kind="step_in", Ma=ma, cos_psi=cp))
            outside = False
        nearest = min(
            eqs, key=lambda e: quat_distance(q, equilibrium_quat(e))
        )
        chart = (nearest.theta, nearest.phi)
        if last_chart is None:
            kind = "start" if k == 0 else None
            if kind:
                events.append(
                    ScheduleEvent(
                        t=t, kind=kind, Ma=ma, cos_psi=cp,
                        theta=chart[0], phi=chart[1], v_ax=nearest.v_ax,
                    )
                )
        else:
            dth = abs(
                float(np.arctan2(np.sin(chart[0] - last_chart[0]),
                                 np.cos(chart[0] - last_chart[0])))
            )
            dph = abs(chart[1] - last_chart[1])
            if np.hypot(dth, dph) > jump_tol:
                events.append(
                    ScheduleEvent(
                        t=t, kind="jump", Ma=ma, cos_psi=cp,
                        theta=chart[0], phi=chart[1], v_ax=nearest.v_ax,
                    )
                )
        last_chart = chart
    ma, cp = schedule.params_at(schedule.t_end)
    eqs = [stability.classify(dec, e) for e in atlas.solve_equilibria(dec, ma, cp)]
    final_eq = None
    if eqs:
        final_eq = min(eqs, key=lambda e: quat_distance(q, equilibrium_quat(e)))
    events.append(
        ScheduleEvent(
            t=schedule.t_end, kind="end", Ma=ma, cos_psi=cp,
            theta=None if final_eq is None else final_eq.theta,
            phi=None if final_eq is None else final_eq.phi,
            v_ax=None if final_eq is None else final_eq.v_ax,
        )
    )
    return ScheduleResult(
        events=tuple(events), final_q=canonical_quat(q / np.linalg.norm(q)),
        final_equilibrium=final_eq,
    )


# ---------------------------------------------------------------------------
# handling strategies for bistable operation


@dataclass(frozen=True)
class LoopStep:
    """One logged step of the two-parameter handling loop."""

    step: int
    description: str
    Ma: float
    cos_psi: float
    theta: float | None = None
    phi: float | None = None
    v_ax: float | None = None


@dataclass(frozen=True)
class LoopResult:
    """Outcome of the two-parameter handling loop.

    ``switched`` records whether the second probe (steps 4-6) produced the
    better branch; when it did not, the loop was retraced so that the
    final state is the higher-|v_ax| one either way.
    """

    steps: tuple[LoopStep, ...]
    events: tuple[ScheduleEvent, ...]
    final_q: np.ndarray
    final_equilibrium: atlas.Equilibrium | None
    switched: bool


def _chart_dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    dth = float(np.arctan2(np.sin(a[0] - b[0]), np.cos(a[0] - b[0])))
    return float(np.hypot(dth, a[1] - b[1]))


def _classified_nearest(dec, q, Ma, cp):
    eqs = [
        stability.classify(dec, e) for e in atlas.solve_equilibria(dec, Ma, cp)
    ]
    if not eqs:
        return None
    return min(eqs, key=lambda e: quat_distance(q, equilibrium_quat(e)))


def stability_edge_cospsi(
    dec: PDecomposition,
    Ma: float,
    theta: float,
    phi: float,
    direction: int,
    step: float = 2e-3,
    jump_tol: float = 0.3,
) -> float:
    """Last cos psi at which the tracked branch is still stable.

    The equilibrium branch through (theta, phi) is followed by chart
    continuity while cos psi is scanned from its current value in the
    given direction at fixed Ma; the scan stops when the branch loses
    stability, disappears, or the nearest equilibrium jumps.
    """
    cp = float(atlas.cos_psi_of(dec, theta, phi))
    chart = (float(theta), float(phi))
    last_stable = cp
    while -1.0 <= cp <= 1.0:
        eqs = [
            stability.classify(dec, e)
            for e in atlas.solve_equilibria(dec, Ma, cp)
        ]
        if not eqs:
            break
        nearest = min(eqs, key=lambda e: _chart_dist(chart, (e.theta, e.phi)))
        if _chart_dist(chart, (nearest.theta, nearest.phi)) > jump_tol:
            break
        if nearest.index != 3 or nearest.marginal:
            break
        chart = (nearest.theta, nearest.phi)
        last_stable = cp
        cp += direction * step
    return last_stable


def fold_switch_schedule(
    dec: PDecomposition,
    Ma: float,
    cos_psi: float,
    theta: float,
    phi: float,
    direction: int,
    t_ramp: float = 1500.0,
    t_hold: float = 6000.0,
    margin: float = 0.02,
) -> Schedule:
    """Fixed-Ma excursion past the stability edge of a branch and back.

    cos psi is ramped from its current value just beyond the point where
    the branch through (theta, phi) destabilises, held there for
    ``t_hold`` so the slow near-fold jump to the surviving branch
    completes, and ramped back (with a final settling hold).
    """
    edge = stability_edge_cospsi(dec, Ma, theta, phi, direction)
    cp_far = float(np.clip(edge + direction * margin, -1.0, 1.0))
    return Schedule(
        (
            (0.0, Ma, cos_psi),
            (t_ramp, Ma, cp_far),
            (t_ramp + t_hold, Ma, cp_far),
            (2.0 * t_ramp + t_hold, Ma, cos_psi),
            (2.0 * t_ramp + 2.0 * t_hold, Ma, cos_psi),
        )
    )


def low_ma_side_schedule(
    dec: PDecomposition,
    side: int,
    Ma_target: float,
    cos_psi_target: float,
    Ma_low: float | None = None,
    t_ramp: float = 1500.0,
    fraction: float = 0.6,
) -> Schedule:
    """Reach a chosen branch by starting at low Ma on one side of I.

    At low Ma the stable equilibrium is unique for each cos psi in the
    interval I = [-w, w], w = sqrt(1 - (beta0 . eta0)^2), so parking
    cos psi on one side of I selects the branch deterministically before
    Ma is raised to its target.
    """
    width = float(np.sqrt(max(0.0, 1.0 - float(dec.beta0 @ dec.eta0) ** 2)))
    cp_side = side * fraction * width
    if Ma_low is None:
        Ma_low = min(0.2 * dec.sigma2, 0.5 * Ma_target)
    return Schedule(
        (
            (0.0, Ma_low, cp_side),
            (t_ramp, Ma_target, cp_side),
            (2.0 * t_ramp, Ma_target, cos_psi_target),
        )
    )


def two_parameter_loop(
    dec: PDecomposition,
    Ma_star: float,
    cos_psi_star: float,
    *,
    side_first: int = 1,
    Ma_low: float | None = None,
    t_ramp: float = 1500.0,
    fraction: float = 0.6,
    tol: float = 1e-9,
    n_checkpoints: int = 150,
) -> LoopResult:
    """Seven-step loop that visits both branches and keeps the faster one.

    1. at low Ma, probe the stable interval I of cos psi from 0;
    2. park cos psi well on one side of I;
    3. raise Ma to its target and move cos psi to its target; note v_ax;
    4. bring cos psi back to 0 and lower Ma;
    5. park cos psi on the other side of I;
    6. return to the target parameters and note v_ax again;
    7. keep whichever state is faster, retracing 4-6 if the first was.
    """
    width = float(np.sqrt(max(0.0, 1.0 - float(dec.beta0 @ dec.eta0) ** 2)))
    if Ma_low is None:
        Ma_low = min(0.2 * dec.sigma2, 0.5 * Ma_star)
    cp_a = side_first * fraction * width
    cp_b = -cp_a

    start = _classified_nearest(dec, np.array([0.0, 0.0, 0.0, 1.0]), Ma_low, 0.0)
    stable0 = [
        e
        for e in (
            stability.classify(dec, e)
            for e in atlas.solve_equilibria(dec, Ma_low, 0.0)
        )
        if e.index == 3 and not e.marginal
    ]
    if not stable0:
        raise ValueError("no stable equilibrium at the low-Ma starting point")
    q = equilibrium_quat(stable0[0])

    steps: list[LoopStep] = []
    events: list[ScheduleEvent] = []
    t_offset = 0.0

    def run(waypoints):
        nonlocal q, t_offset
        res = run_schedule(
            dec, Schedule(tuple(waypoints)), q, tol=tol,
            n_checkpoints=n_checkpoints,
        )
        for ev in res.events:
            events.append(
                ScheduleEvent(
                    t=ev.t + t_offset, kind=ev.kind, Ma=ev.Ma,
                    cos_psi=ev.cos_psi, theta=ev.theta, phi=ev.phi,
                    v_ax=ev.v_ax,
                )
            )
        t_offset += waypoints[-1][0]
        q = res.final_q
        return res

    def log(step, desc):
        ma, cp = events[-1].Ma, events[-1].cos_psi
        eq = _classified_nearest(dec, q, ma, cp)
        steps.append(
            LoopStep(
                step=step, description=desc, Ma=ma, cos_psi=cp,
                theta=None if eq is None else eq.theta,
                phi=None if eq is None else eq.phi,
                v_ax=None if eq is None else eq.v_ax,
            )
        )
        return eq

    run(((0.0, Ma_low, 0.0), (t_ramp, Ma_low, cp_a)))
    log(1, f"probed stable interval I = [-{width:.4g}, {width:.4g}] at low Ma")
    log(2, "parked cos psi on the first side of I")
    run(
        (
            (0.0, Ma_low, cp_a),
            (t_ramp, Ma_star, cp_a),
            (2.0 * t_ramp, Ma_star, cos_psi_star),
        )
    )
    eq3 = log(3, "reached target parameters on the first branch")
    v3 = None if eq3 is None else eq3.v_ax

    forward = (
        (
            (0.0, Ma_star, cos_psi_star),
            (t_ramp, Ma_star, 0.0),
            (2.0 * t_ramp, Ma_low, 0.0),
        ),
        ((0.0, Ma_low, 0.0), (t_ramp, Ma_low, cp_b)),
        (
            (0.0, Ma_low, cp_b),
            (t_ramp, Ma_star, cp_b),
            (2.0 * t_ramp, Ma_star, cos_psi_star),
        ),
    )
    run(forward[0])
    log(4, "returned to low Ma through cos psi = 0")
    run(forward[1])
    log(5, "parked cos psi on the other side of I")
    run(forward[2])
    eq6 = log(6, "reached target parameters on the second branch")
    v6 = None if eq6 is None else eq6.v_ax

    second_better = v3 is None or (
        v6 is not None and abs(v6) >= abs(v3)
    )
    if not second_better:
        # retrace steps 4-6 with the original side to recover state 3
        run(forward[0])
        run(((0.0, Ma_low, 0.0), (t_ramp, Ma_low, cp_a)))
        run(
            (
                (0.0, Ma_low, cp_a),
                (t_ramp, Ma_star, cp_a),
                (2.0 * t_ramp, Ma_star, cos_psi_star),
            )
        )
    final_eq = log(7, "kept the faster of the two branches")
    return LoopResult(
        steps=tuple(steps), events=tuple(events), final_q=q,
        final_equilibrium=final_eq, switched=second_better,
    )
