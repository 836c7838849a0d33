"""Command-line surface for the magswim toolkit.

Subcommands cover atlas/curve generation, regime diagrams, trajectory
simulation, basin sampling, drive/magnetisation optimization, periodic
orbit continuation, and quasi-static handling schedules.  Outputs are
deterministic CSV (grids, curves, trajectories) and JSON (reports,
events); each file carries a header with the tool version, the swimmer
hash, and the full configuration.  Plot scripts are emitted as
standalone files that read the CSVs.

Exit codes: 0 on success, 2 on validation failure, 3 on numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import atlas, dynamics, optimize, periodic, regimes, stability
from . import swimmer as swimmer_mod

VERSION = "0.1.0"
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ValidationError(ValueError):
    """Bad input on the command line or in a swimmer file."""


# ---------------------------------------------------------------------------
# argument plumbing


def _parse_grid(text: str, name: str) -> tuple[float, float, int]:
    """Parse an A:B:N range specification."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"--{name} must have the form A:B:N")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"--{name}: {exc}") from exc
    if n < 2:
        raise ValidationError(f"--{name}: N must be at least 2")
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ValidationError(f"--{name}: need finite A < B")
    return a, b, n


def _parse_scalar(text: str, name: str) -> float:
    try:
        x = float(text)
    except ValueError as exc:
        raise ValidationError(f"--{name}: {exc}") from exc
    if not np.isfinite(x):
        raise ValidationError(f"--{name} must be finite")
    return x


def _load_swimmer(spec: str):
    """Resolve a swimmer path or bundled name to (Swimmer, sha256, label)."""
    if not spec:
        raise ValidationError("empty swimmer path")
    path = Path(spec)
    if path.is_file():
        data = path.read_bytes()
        try:
            s = swimmer_mod.load_swimmer(json.loads(data.decode()))
        except (ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"swimmer file {spec!r}: {exc}") from exc
        return s, hashlib.sha256(data).hexdigest(), path.name
    if spec in swimmer_mod.bundled_names():
        from importlib import resources

        data = (
            resources.files("magswim").joinpath(f"data/{spec}.json").read_bytes()
        )
        s = swimmer_mod.bundled_swimmer(spec)
        return s, hashlib.sha256(data).hexdigest(), spec
    raise ValidationError(
        f"swimmer {spec!r} is neither a file nor one of {swimmer_mod.bundled_names()}"
    )


def _config_echo(args: argparse.Namespace) -> dict:
    cfg = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    return cfg


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_csv(path: Path, header_meta: list[str], columns: list[str], rows):
    with open(path, "w") as fh:
        for line in header_meta:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _meta(args, swimmer_hash: str, label: str) -> list[str]:
    return [
        f"magswim {VERSION}",
        f"swimmer: {label} sha256={swimmer_hash}",
        "config: " + json.dumps(_config_echo(args), sort_keys=True, default=str),
    ]


def _json_report(args, swimmer_hash: str, label: str, payload: dict) -> dict:
    return {
        "tool": "magswim",
        "version": VERSION,
        "swimmer": label,
        "swimmer_sha256": swimmer_hash,
        "config": _config_echo(args),
        **payload,
    }


def _write_json(path: Path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    return str(o)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_plot_script(path: Path, body: str):
    with open(path, "w") as fh:
        fh.write("#!/usr/bin/env python3\n")
        fh.write(
            '"""Standalone plot script; reads the CSVs written alongside."""\n'
        )
        fh.write("import numpy as np\nimport matplotlib.pyplot as plt\n\n")
        fh.write(body)
    os.chmod(path, 0o755)


# ---------------------------------------------------------------------------
# subcommands


def cmd_atlas(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    n_theta = args.theta_n
    n_phi = args.phi_n
    grid = atlas.chart_grid(dec, n_theta=n_theta, n_phi=n_phi)
    out = _out_dir(args)
    meta = _meta(args, h, label)

    rows = []
    for iy in range(n_phi):
        for ix in range(n_theta):
            rows.append(
                (
                    grid["theta"][iy, ix],
                    grid["phi"][iy, ix],
                    grid["Ma"][iy, ix],
                    grid["cos_psi"][iy, ix],
                    grid["v_ax"][iy, ix],
                )
            )
    _write_csv(
        out / "chart.csv", meta, ["theta", "phi", "Ma", "cos_psi", "v_ax"], rows
    )

    curves = stability.fold_curves(dec, resolution=args.resolution)
    curves += stability.hopf_curves(dec, resolution=args.resolution)
    rows = []
    for k, c in enumerate(curves):
        for i in range(len(c)):
            rows.append(
                (
                    k,
                    c.kind,
                    c.thetas[i],
                    c.phis[i],
                    c.mas[i],
                    c.cos_psis[i],
                    c.lambda_im[i] if c.lambda_im is not None else 0.0,
                )
            )
    with open(out / "bifurcation_curves.csv", "w") as fh:
        for line in meta:
            fh.write(f"# {line}\n")
        fh.write("curve,kind,theta,phi,Ma,cos_psi,lambda_im\n")
        for row in rows:
            fh.write(
                f"{row[0]},{row[1]},"
                + ",".join(_fmt(x) for x in row[2:])
                + "\n"
            )

    ranges = atlas.chart_ranges(dec, n_theta=400, n_phi=400)
    _write_json(
        out / "atlas_report.json",
        _json_report(
            args,
            h,
            label,
            {
                "max_ma": ranges.max_ma,
                "cos_psi_min": ranges.cos_psi_min,
                "cos_psi_max": ranges.cos_psi_max,
                "low_ma_interval": list(ranges.low_ma_interval),
            },
        ),
    )
    _write_plot_script(
        out / "plot_atlas.py",
        f"""
chart = np.genfromtxt("chart.csv", delimiter=",", names=True, comments="#")
n_theta, n_phi = {n_theta}, {n_phi}
TH = chart["theta"].reshape(n_phi, n_theta)
PH = chart["phi"].reshape(n_phi, n_theta)
MA = chart["Ma"].reshape(n_phi, n_theta)
CP = chart["cos_psi"].reshape(n_phi, n_theta)
VX = chart["v_ax"].reshape(n_phi, n_theta)
fig, ax = plt.subplots(figsize=(8, 5))
pc = ax.pcolormesh(TH, PH, VX, shading="auto", cmap="RdBu_r")
fig.colorbar(pc, ax=ax, label="v_ax")
ax.contour(TH, PH, MA, levels=12, colors="k", linewidths=0.6)
ax.contour(TH, PH, CP, levels=12, colors="k", linewidths=0.6, linestyles="--")
curves = np.genfromtxt("bifurcation_curves.csv", delimiter=",", comments="#",
                       skip_header=4, dtype=None, encoding=None,
                       names=["curve", "kind", "theta", "phi", "Ma", "cos_psi",
                              "lambda_im"])
for cid in np.unique(curves["curve"]):
    sel = curves["curve"] == cid
    color = "tab:orange" if curves["kind"][sel][0] == "fold" else "tab:green"
    ax.plot(curves["theta"][sel], curves["phi"][sel], color=color, lw=1.5)
ax.set_xlabel("theta")
ax.set_ylabel("phi")
ax.set_title("equilibrium chart: v_ax with Ma (solid) and cos psi (dashed) level sets")
fig.savefig("atlas.png", dpi=160)
""",
    )
    return EXIT_OK


def cmd_regimes(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    ma_range = None
    if args.ma:
        a, b, n = _parse_grid(args.ma, "ma")
        ma_range, nx = (a, b), n
    else:
        nx = args.nx
    if args.cospsi:
        a, b, n = _parse_grid(args.cospsi, "cospsi")
        cp_range, ny = (a, b), n
    else:
        cp_range, ny = (-1.0, 1.0), args.ny
    diagram = regimes.regime_diagram(
        dec, ma_range=ma_range, cospsi_range=cp_range, nx=nx, ny=ny
    )
    out = _out_dir(args)
    meta = _meta(args, h, label)
    rows = []
    for iy in range(ny):
        for ix in range(nx):
            rows.append(
                (
                    diagram.ma_axis[ix],
                    diagram.cospsi_axis[iy],
                    diagram.total_count[iy, ix],
                    diagram.stable_count[iy, ix],
                    diagram.fold_flag[iy, ix],
                )
            )
    _write_csv(
        out / "regimes.csv",
        meta,
        ["Ma", "cos_psi", "n_total", "n_stable", "fold_flag"],
        rows,
    )
    labels, counts = np.unique(diagram.labels, return_counts=True)
    _write_json(
        out / "regimes_report.json",
        _json_report(
            args,
            h,
            label,
            {
                "regimes": {
                    str(lbl): int(cnt) for lbl, cnt in zip(labels, counts)
                }
            },
        ),
    )
    _write_plot_script(
        out / "plot_regimes.py",
        f"""
data = np.genfromtxt("regimes.csv", delimiter=",", names=True, comments="#")
nx, ny = {nx}, {ny}
MA = data["Ma"].reshape(ny, nx)
CP = data["cos_psi"].reshape(ny, nx)
code = (data["n_total"] + 10 * data["n_stable"]).reshape(ny, nx)
fig, ax = plt.subplots(figsize=(7, 5))
pc = ax.pcolormesh(MA, CP, code, shading="auto", cmap="viridis")
fig.colorbar(pc, ax=ax, label="total + 10*stable")
ax.set_xlabel("Ma")
ax.set_ylabel("cos psi")
ax.set_title("equilibrium count regimes")
fig.savefig("regimes.png", dpi=160)
""",
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    Ma = _parse_scalar(args.ma, "ma")
    cp = _parse_scalar(args.cospsi, "cospsi")
    if not (0.0 <= Ma) or abs(cp) > 1.0:
        raise ValidationError("need Ma >= 0 and |cos psi| <= 1")
    psi = float(np.arccos(cp))
    rng = np.random.default_rng(args.seed)
    q0 = dynamics.random_orientation(rng)
    traj = dynamics.integrate_full(
        q0,
        np.zeros(3),
        Ma,
        psi,
        dec,
        t_end=args.t_end,
        tol=args.tol,
    )
    out = _out_dir(args)
    meta = _meta(args, h, label)
    rows = [
        (
            traj.t[i],
            *traj.q[i],
            *traj.x[i],
        )
        for i in range(len(traj.t))
    ]
    _write_csv(
        out / "trajectory.csv",
        meta,
        ["t", "q1", "q2", "q3", "q4", "x", "y", "z"],
        rows,
    )
    payload = {"converged": bool(traj.converged)}
    eqs = [
        stability.classify(dec, e) for e in atlas.solve_equilibria(dec, Ma, cp)
    ]
    if eqs:
        near = min(
            eqs,
            key=lambda e: dynamics.quat_distance(
                traj.q[-1], dynamics.equilibrium_quat(e)
            ),
        )
        hel = dynamics.helix_of(dec, near)
        payload["nearest_equilibrium"] = {
            "theta": near.theta,
            "phi": near.phi,
            "v_ax": near.v_ax,
            "index": near.index,
            "distance": dynamics.quat_distance(
                traj.q[-1], dynamics.equilibrium_quat(near)
            ),
        }
        payload["helix"] = {
            "pitch": hel.pitch,
            "radius": hel.radius,
            "v_ax": hel.v_ax,
        }
    _write_json(
        out / "simulate_report.json", _json_report(args, h, label, payload)
    )
    _write_plot_script(
        out / "plot_trajectory.py",
        """
data = np.genfromtxt("trajectory.csv", delimiter=",", names=True, comments="#")
fig = plt.figure(figsize=(10, 4))
ax1 = fig.add_subplot(121, projection="3d")
ax1.plot(data["x"], data["y"], data["z"], lw=0.8)
ax1.set_title("lab-frame trajectory")
ax2 = fig.add_subplot(122)
for k in ("q1", "q2", "q3", "q4"):
    ax2.plot(data["t"], data[k], label=k, lw=0.8)
ax2.legend()
ax2.set_xlabel("t")
ax2.set_title("orientation quaternion")
fig.tight_layout()
fig.savefig("trajectory.png", dpi=160)
""",
    )
    return EXIT_OK


def cmd_basins(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    Ma = _parse_scalar(args.ma, "ma")
    cp = _parse_scalar(args.cospsi, "cospsi")
    if Ma < 0.0 or abs(cp) > 1.0:
        raise ValidationError("need Ma >= 0 and |cos psi| <= 1")
    if args.samples < 1:
        raise ValidationError("--samples must be at least 1")
    psi = float(np.arccos(cp))
    n = args.samples
    threads = args.threads or os.cpu_count() or 1

    if threads > 1 and n > 1:
        # per-sample RNG streams keyed on (seed, index) keep the result
        # independent of the thread schedule
        def one(i):
            return dynamics.basin_sample(
                dec, Ma, psi, 1, args.seed, t_end=args.t_end, tol=args.tol,
                first_index=i,
            )[0]

        with ThreadPoolExecutor(max_workers=threads) as ex:
            samples = list(ex.map(one, range(n)))
    else:
        samples = dynamics.basin_sample(
            dec, Ma, psi, n, args.seed, t_end=args.t_end, tol=args.tol
        )
    out = _out_dir(args)
    meta = _meta(args, h, label)
    rows = [
        (i, *smp.q0, smp.attractor_id, smp.t_converge)
        for i, smp in enumerate(samples)
    ]
    _write_csv(
        out / "basins.csv",
        meta,
        ["i", "q1", "q2", "q3", "q4", "attractor_id", "t_converge"],
        rows,
    )
    ids, counts = np.unique(
        [smp.attractor_id for smp in samples], return_counts=True
    )
    _write_json(
        out / "basins_report.json",
        _json_report(
            args,
            h,
            label,
            {
                "counts": {str(int(i)): int(c) for i, c in zip(ids, counts)},
                "n": n,
            },
        ),
    )
    return EXIT_OK


def cmd_optimize(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    mag = optimize.optimal_magnetisation(s.M12, s.M22)
    best_stable = optimize.optimize_drive(dec, stable_only=True)
    best_any = optimize.optimize_drive(dec, stable_only=False)
    out = _out_dir(args)
    payload = {
        "magnetisation": {
            "n_star": mag.n_star,
            "m_star": mag.m_star,
            "v_ax_star": mag.v_ax_star,
            "Ma_star": mag.Ma_star,
            "cos_psi_star": mag.cos_psi_star,
            "hopf": mag.hopf,
        },
        "drive_stable": vars(best_stable),
        "drive_unconstrained": vars(best_any),
    }
    _write_json(out / "optimize_report.json", _json_report(args, h, label, payload))

    cp = _parse_scalar(args.cospsi, "cospsi") if args.cospsi else 0.0
    curve = optimize.vax_vs_ma_curve(dec, cp)
    meta = _meta(args, h, label)
    rows = [
        (
            curve.thetas[i],
            curve.phis[i],
            curve.mas[i],
            curve.v_axs[i],
            curve.stable[i],
        )
        for i in range(len(curve.thetas))
    ]
    _write_csv(
        out / "vax_curve.csv",
        meta,
        ["theta", "phi", "Ma", "v_ax", "stable"],
        rows,
    )
    _write_plot_script(
        out / "plot_vax_curve.py",
        f"""
data = np.genfromtxt("vax_curve.csv", delimiter=",", names=True, comments="#")
fig, ax = plt.subplots(figsize=(7, 4.5))
stable = data["stable"] > 0.5
ax.plot(data["Ma"][~stable], data["v_ax"][~stable], ".", ms=2, color="0.7",
        label="unstable")
ax.plot(data["Ma"][stable], data["v_ax"][stable], ".", ms=3, color="tab:blue",
        label="stable")
ax.set_xlabel("Ma")
ax.set_ylabel("v_ax")
ax.set_title("axial velocity along cos psi = {cp}")
ax.legend()
fig.savefig("vax_curve.png", dpi=160)
""",
    )
    return EXIT_OK


def cmd_periodic(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    points = periodic.hopf_points_of(dec, resolution=args.resolution)
    if not points:
        raise ValidationError("swimmer has no Hopf points to branch from")
    if args.ma is not None and args.cospsi is not None:
        Ma = _parse_scalar(args.ma, "ma")
        cp = _parse_scalar(args.cospsi, "cospsi")
        point = min(
            points, key=lambda p: np.hypot(p.Ma - Ma, p.cos_psi - cp)
        )
    else:
        point = max(points, key=lambda p: p.lambda_im)
    branch = periodic.branch_from_hopf(
        dec,
        point,
        direction=args.direction,
        max_steps=args.max_steps,
        step=args.step,
    )
    out = _out_dir(args)
    meta = _meta(args, h, label)
    rows = []
    for k, o in enumerate(branch.orbits):
        mus = sorted(np.abs(o.floquet))[::-1]
        rows.append(
            (
                k,
                o.Ma,
                o.cos_psi,
                o.T,
                *o.q0,
                o.closure,
                abs(o.trivial_multiplier - 1.0),
                mus[0],
                mus[1],
                mus[2],
                o.stable,
            )
        )
    _write_csv(
        out / "branch.csv",
        meta,
        [
            "k", "Ma", "cos_psi", "T", "q1", "q2", "q3", "q4",
            "closure", "trivial_error", "mu1", "mu2", "mu3", "stable",
        ],
        rows,
    )
    _write_json(
        out / "periodic_report.json",
        _json_report(
            args,
            h,
            label,
            {
                "hopf_start": vars(point),
                "period": branch.T,
                "termination": branch.termination,
                "n_orbits": len(branch.orbits),
                "n_stable": int(sum(o.stable for o in branch.orbits)),
                "end": {
                    "Ma": branch.orbits[-1].Ma,
                    "cos_psi": branch.orbits[-1].cos_psi,
                },
            },
        ),
    )
    _write_plot_script(
        out / "plot_branch.py",
        """
data = np.genfromtxt("branch.csv", delimiter=",", names=True, comments="#")
fig, ax = plt.subplots(figsize=(7, 4.5))
stable = data["stable"] > 0.5
ax.plot(data["Ma"], data["cos_psi"], "-", lw=0.8, color="0.8")
ax.plot(data["Ma"][~stable], data["cos_psi"][~stable], ".", ms=3,
        color="0.6", label="unstable")
ax.plot(data["Ma"][stable], data["cos_psi"][stable], ".", ms=4,
        color="tab:red", label="stable")
ax.set_xlabel("Ma")
ax.set_ylabel("cos psi")
ax.set_title("constant-period orbit branch")
ax.legend()
fig.savefig("branch.png", dpi=160)
""",
    )
    return EXIT_OK


def cmd_handling(args) -> int:
    s, h, label = _load_swimmer(args.swimmer)
    dec = swimmer_mod.decompose(s)
    if args.ma is not None and args.cospsi is not None:
        Ma = _parse_scalar(args.ma, "ma")
        cp = _parse_scalar(args.cospsi, "cospsi")
    else:
        best = optimize.optimize_drive(dec, stable_only=True)
        Ma, cp = best.Ma, best.cos_psi
    eqs = [
        stability.classify(dec, e) for e in atlas.solve_equilibria(dec, Ma, cp)
    ]
    stable_eqs = sorted(
        (e for e in eqs if e.index == 3 and not e.marginal),
        key=lambda e: abs(e.v_ax),
    )
    if not stable_eqs:
        raise ValidationError(
            "no stable equilibrium at the requested parameters"
        )
    out = _out_dir(args)
    payload: dict = {"Ma": Ma, "cos_psi": cp, "strategy": args.strategy}

    def event_doc(ev):
        return {
            "t": ev.t,
            "kind": ev.kind,
            "Ma": ev.Ma,
            "cos_psi": ev.cos_psi,
            "theta": ev.theta,
            "phi": ev.phi,
            "v_ax": ev.v_ax,
        }

    if args.strategy == "loop":
        result = dynamics.two_parameter_loop(
            dec, Ma, cp, side_first=args.side, tol=args.tol
        )
        payload["steps"] = [vars(st) for st in result.steps]
        payload["events"] = [event_doc(ev) for ev in result.events]
        payload["switched"] = result.switched
        final = result.final_equilibrium
    else:
        start = stable_eqs[0]
        if args.strategy == "fold":
            schedule = dynamics.fold_switch_schedule(
                dec, Ma, cp, start.theta, start.phi, args.side
            )
        else:
            schedule = dynamics.low_ma_side_schedule(dec, args.side, Ma, cp)
        payload["schedule"] = {
            "waypoints": [list(w) for w in schedule.waypoints],
            "rate_bound": schedule.rate_bound,
        }
        q0 = dynamics.equilibrium_quat(start)
        if args.strategy == "lowma":
            eqs0 = [
                stability.classify(dec, e)
                for e in atlas.solve_equilibria(dec, *schedule.params_at(0.0))
            ]
            starters = [e for e in eqs0 if e.index == 3 and not e.marginal]
            if starters:
                q0 = dynamics.equilibrium_quat(starters[0])
        result = dynamics.run_schedule(dec, schedule, q0, tol=args.tol)
        payload["events"] = [event_doc(ev) for ev in result.events]
        final = result.final_equilibrium
    payload["final"] = (
        None
        if final is None
        else {
            "theta": final.theta,
            "phi": final.phi,
            "v_ax": final.v_ax,
            "index": final.index,
        }
    )
    _write_json(out / "handling_report.json", _json_report(args, h, label, payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magswim",
        description="relative equilibria, stability, and propulsion "
        "optimization for magnetically driven micro-swimmers",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, t_end=5000.0, tol=1e-9):
        p.add_argument(
            "--swimmer",
            required=True,
            help="path to a swimmer JSON file or a bundled name",
        )
        p.add_argument("--out", default="magswim_out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument(
            "--t-end", dest="t_end", type=float, default=t_end,
            help="integration horizon",
        )
        p.add_argument(
            "--tol", type=float, default=tol, help="numerical tolerance"
        )
        p.add_argument(
            "--threads", type=int, default=None,
            help="worker threads (default: available cores)",
        )

    p = sub.add_parser("atlas", help="equilibrium chart and bifurcation curves")
    common(p)
    p.add_argument("--theta-n", type=int, default=200, help="theta grid size")
    p.add_argument("--phi-n", type=int, default=200, help="phi grid size")
    p.add_argument(
        "--resolution", type=int, default=400, help="curve-tracing resolution"
    )
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("regimes", help="equilibrium-count regime diagram")
    common(p)
    p.add_argument("--ma", help="Ma range A:B:N")
    p.add_argument("--cospsi", help="cos psi range A:B:N")
    p.add_argument("--nx", type=int, default=150, help="Ma grid size")
    p.add_argument("--ny", type=int, default=150, help="cos psi grid size")
    p.set_defaults(func=cmd_regimes)

    p = sub.add_parser("simulate", help="integrate one seeded trajectory")
    common(p)
    p.add_argument("--ma", required=True, help="Mason number")
    p.add_argument("--cospsi", required=True, help="cos of the conical angle")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("basins", help="sample basins of attraction")
    common(p, t_end=12000.0)
    p.add_argument("--ma", required=True, help="Mason number")
    p.add_argument("--cospsi", required=True, help="cos of the conical angle")
    p.add_argument("--samples", type=int, default=200, help="number of probes")
    p.set_defaults(func=cmd_basins)

    p = sub.add_parser(
        "optimize", help="optimal drive and optimal magnetisation"
    )
    common(p)
    p.add_argument(
        "--cospsi", help="cos psi level for the v_ax(Ma) curve (default 0)"
    )
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser(
        "periodic", help="continue a constant-period orbit branch from a Hopf point"
    )
    common(p, tol=1e-10)
    p.add_argument("--ma", help="Ma of the Hopf point to start from")
    p.add_argument("--cospsi", help="cos psi of the Hopf point to start from")
    p.add_argument(
        "--direction", type=int, default=1, choices=(1, -1),
        help="initial continuation direction",
    )
    p.add_argument("--max-steps", type=int, default=700)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument(
        "--resolution", type=int, default=400, help="Hopf-point scan resolution"
    )
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser(
        "handling", help="quasi-static schedules that select a branch"
    )
    common(p)
    p.add_argument(
        "--strategy", choices=("fold", "lowma", "loop"), default="loop"
    )
    p.add_argument("--ma", help="target Mason number (default: stable optimum)")
    p.add_argument("--cospsi", help="target cos psi (default: stable optimum)")
    p.add_argument(
        "--side", type=int, default=1, choices=(1, -1),
        help="probe side for the fold/lowma strategies and loop start",
    )
    p.set_defaults(func=cmd_handling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and not (0 <= args.seed < 2**64):
        parser.exit(EXIT_VALIDATION, "magswim: --seed must fit in 64 bits\n")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"magswim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (
        dynamics.IntegrationError,
        np.linalg.LinAlgError,
        FloatingPointError,
        RuntimeError,
    ) as exc:
        print(f"magswim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
