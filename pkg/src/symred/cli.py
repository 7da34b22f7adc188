"""Command-line front end.

Subcommands: simulate-rigid, hammer, simulate-reduced, reconstruct,
portrait, nbody-reduce, verify.  Every run is deterministic given its
parameters (and seed, where one applies); outputs are CSV/SVG/JSON.
Exit codes: 0 success (and all checks passed, for verify), 2 invalid
configuration, 3 numerical failure (with the failing time attached).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import central, poisson, portrait, rigid, sp2k, verify
from .poisson import IntegratorConfig, SolverDivergenceError


class ConfigError(ValueError):
    pass


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"could not parse numbers from {text!r}") from exc
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {len(vals)} in {text!r}")
    return vals


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Start from parser defaults, overlay --config JSON, overlay explicit flags."""
    merged = {}
    for action in parser._actions:
        if action.dest not in ("help", "config"):
            merged[action.dest] = action.default
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key, val in vars(args).items():
        if key in ("config",):
            continue
        if val is not None:
            merged[key] = val
    return merged


def _integrator(cfg: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(method=cfg["method"], step=float(cfg["h"]),
                                newton_tol=float(cfg.get("newton_tol") or 1e-12))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _inertia(cfg: dict) -> rigid.InertiaTensor:
    vals = _floats(cfg["inertia"], 3) if isinstance(cfg["inertia"], str) else cfg["inertia"]
    try:
        return rigid.InertiaTensor(*vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode())
    else:
        with open(path, "wb") as fh:
            fh.write(data)


# ---------------------------------------------------------------------------
# subcommands

def _add_common_integration(p, t_default, h_default):
    p.add_argument("--t", type=float, default=t_default, help="time horizon")
    p.add_argument("--h", type=float, default=h_default, help="time step")
    p.add_argument("--method", choices=["implicit_midpoint", "rk4"],
                   default="implicit_midpoint")
    p.add_argument("--newton-tol", dest="newton_tol", type=float, default=1e-12)
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.add_argument("--config", default=None, help="JSON config file; flags override")


def cmd_simulate_rigid(cfg: dict) -> int:
    I = _inertia(cfg)
    m0 = np.array(_floats(cfg["m0"], 3) if isinstance(cfg["m0"], str) else cfg["m0"])
    icfg = _integrator(cfg)
    if cfg["full"]:
        s0 = rigid.FullRigidState(np.eye(3), m0)
        traj = rigid.integrate_full(I, s0, cfg["t"], icfg)
        cols = [f"Q{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)] + ["m1", "m2", "m3"]
    else:
        P, H, _ = rigid.rigid_body_structure(I)
        traj = poisson.integrate(P, H, m0, cfg["t"], icfg)
        cols = ["m1", "m2", "m3"]
    _write(cfg["out"], poisson.trajectory_csv_bytes(traj, cols))
    return 0


def cmd_hammer(cfg: dict) -> int:
    I = _inertia(cfg)
    m0 = np.array(_floats(cfg["m0"], 3) if isinstance(cfg["m0"], str) else cfg["m0"])
    s0 = rigid.FullRigidState(np.eye(3), m0)
    traj, rep = rigid.hammer_throw(I, s0, cfg["t"], _integrator(cfg))
    cols = [f"Q{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)] + ["m1", "m2", "m3"]
    if cfg["out"]:
        _write(cfg["out"], poisson.trajectory_csv_bytes(traj, cols))
    report = {
        "classification": rep.classification,
        "first_sign_change": rep.first_sign_change,
        "extremum_times": list(rep.extremum_times),
        "twist_angles": list(rep.twist_angles),
        "twist_axis_alignment": list(rep.twist_axis_alignment),
        "max_momentum_deviation": rep.max_momentum_deviation,
    }
    if cfg["report"]:
        with open(cfg["report"], "w") as fh:
            json.dump(report, fh, indent=2)
    print(f"classification: {rep.classification}")
    if rep.first_sign_change is not None:
        print(f"first m2 sign change at t = {rep.first_sign_change:.6g}")
    for a in rep.twist_angles:
        print(f"twist angle between pole passages: {a:.6f} rad "
              f"(pi {'-' if a < np.pi else '+'} {abs(a - np.pi):.6f})")
    return 0


def cmd_simulate_reduced(cfg: dict) -> int:
    try:
        H = central.builtin_hamiltonian(cfg["hamiltonian"])
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    w0 = np.array(_floats(cfg["w0"], 3) if isinstance(cfg["w0"], str) else cfg["w0"])
    if not central.in_cone(w0):
        raise ConfigError(f"w0 = {w0.tolist()} is outside the invariant cone")
    P, _ = central.reduced_structure()
    traj = poisson.integrate(P, H, w0, cfg["t"], _integrator(cfg))
    _write(cfg["out"], poisson.trajectory_csv_bytes(traj, ["w1", "w2", "w3"]))
    return 0


def cmd_reconstruct(cfg: dict) -> int:
    try:
        H = central.builtin_hamiltonian(cfg["hamiltonian"])
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    w0 = np.array(_floats(cfg["w0"], 3) if isinstance(cfg["w0"], str) else cfg["w0"])
    try:
        _, _, mu = central.align_initial_frame(w0)
    except (ValueError, central.DegenerateDataError) as exc:
        raise ConfigError(str(exc)) from exc
    P, _ = central.reduced_structure()
    traj = poisson.integrate(P, H, w0, cfg["t"], _integrator(cfg))
    rec = central.reconstruct_orbit(H, traj, float(np.linalg.norm(mu)))
    import io

    buf = io.StringIO()
    buf.write("t,qx,qy,qz,px,py,pz,theta\n")
    for i in range(len(rec.times)):
        row = [rec.times[i], *rec.positions[i], *rec.momenta[i], rec.theta[i]]
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    _write(cfg["out"], buf.getvalue().encode())
    return 0


def cmd_portrait(cfg: dict) -> int:
    if cfg["system"] == "rigid":
        I = _inertia(cfg)
        P, H, _ = rigid.rigid_body_structure(I)
        chart = portrait.make_chart("sphere", radius=float(cfg["radius"]))
    else:
        try:
            H = central.builtin_hamiltonian(cfg["hamiltonian"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        P, _ = central.reduced_structure()
        C = float(cfg["casimir"])
        if C < 0:
            raise ConfigError("no leaf for casimir < 0")
        kind = cfg["chart"]
        if kind == "auto":
            kind = "hyperboloid" if C > 0 else "cone"
        region = None
        if cfg["region"] == "auto":
            region = portrait.DEFAULT_REGIONS.get(cfg["hamiltonian"])
        elif cfg["region"]:
            v = _floats(cfg["region"], 6)
            region = ((v[0], v[1]), (v[2], v[3]), (v[4], v[5]))
        try:
            chart = portrait.make_chart(kind, casimir=C, region=region)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    grid = int(cfg["grid"])
    if cfg["levels"] == "auto":
        levels = portrait.auto_levels(chart, H, quantile=float(cfg["quantile"]))
    else:
        levels = _floats(cfg["levels"])
    highlight = None
    if cfg["system"] == "central" and cfg["hamiltonian"] == "kepler" \
            and min(levels) < 0.0 < max(levels) or (cfg["levels"] != "auto" and 0.0 in levels):
        if 0.0 not in levels:
            levels.append(0.0)
        highlight = 0.0
    cs = portrait.extract_contours(chart, H, levels, grid=(grid, grid), structure=P)
    if cfg["out"]:
        _write(cfg["out"], portrait.emit_svg(cs, highlight_level=highlight))
    if cfg["csv"]:
        _write(cfg["csv"], portrait.emit_csv(cs))
    if not cfg["out"] and not cfg["csv"]:
        _write(None, portrait.emit_svg(cs, highlight_level=highlight))
    return 0


def cmd_nbody_reduce(cfg: dict) -> int:
    k, n = int(cfg["k"]), int(cfg["n"])
    masses = _floats(cfg["masses"], k) if isinstance(cfg["masses"], str) else cfg["masses"]
    if cfg["q"] and cfg["p"]:
        qs = np.array(_floats(cfg["q"], k * n)).reshape(k, n)
        ps = np.array(_floats(cfg["p"], k * n)).reshape(k, n)
    else:
        rng = np.random.default_rng(int(cfg["seed"]))
        qs = rng.normal(size=(k, n))
        ps = rng.normal(size=(k, n))
    if cfg["remove_com"]:
        qs, ps = sp2k.remove_center_of_mass(qs, ps, masses)

    potentials = {
        "spring": (lambda u: 0.5 * u, lambda u: 0.5),
        "gravity": (lambda u: -u ** -0.5, lambda u: 0.5 * u ** -1.5),
    }
    if cfg["potential"] not in potentials:
        raise ConfigError(f"unknown potential {cfg['potential']!r}; "
                          f"available: {', '.join(potentials)}")
    V, Vp = potentials[cfg["potential"]]
    H = sp2k.collective_pairwise_hamiltonian(masses, V, Vp, name=cfg["potential"])

    P = sp2k.sp2k_poisson_structure(k)
    X0 = sp2k.momentum_map_phi(qs, ps)
    traj = poisson.integrate(P, sp2k.flat_hamiltonian(H, k), sp2k.flatten_point(X0),
                             cfg["t"], _integrator(cfg))

    # CSV with flattened matrix columns of the documented assembly
    import io

    size = 2 * k
    buf = io.StringIO()
    cols = [f"X{i + 1}{j + 1}" for i in range(size) for j in range(size)]
    buf.write("t," + ",".join(cols) + "\n")
    for i in range(len(traj)):
        X = sp2k.unflatten_point(traj.states[i], k).matrix
        row = [traj.times[i], *X.reshape(-1)]
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    _write(cfg["out"], buf.getvalue().encode())

    if cfg["audit"]:
        Xend = sp2k.unflatten_point(traj.states[-1], k)
        cas0 = sp2k.casimirs(X0, n)
        cas1 = sp2k.casimirs(Xend, n)
        audit = sp2k.phi_rank_audit(n, k, seed=int(cfg["seed"]))
        h_col = traj.audits["H"]
        report = {
            "n": n, "k": k,
            "casimirs_initial": cas0,
            "casimirs_final": cas1,
            "casimir_drift": [abs(a - b) for a, b in zip(cas0, cas1)],
            "energy_drift": float(np.abs(h_col - h_col[0]).max()),
            "rank_audit": {
                "jacobian_rank": audit.jacobian_rank,
                "lie_poisson_dim": audit.lie_poisson_dim,
                "image_dim": audit.image_dim,
                "leaf_dim": audit.leaf_dim,
            },
        }
        with open(cfg["audit"], "w") as fh:
            json.dump(report, fh, indent=2)
    return 0


def cmd_verify(cfg: dict) -> int:
    names = list(verify.SUITES) if cfg["suite"] == "all" else [cfg["suite"]]
    try:
        results = verify.run_suites(names, seed=int(cfg["seed"]))
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    width = max(len(r.name) for r in results) + 2
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += 0 if r.passed else 1
        print(f"[{r.suite:<12}] {r.name:<{width}} {status}  {r.detail}")
    total = len(results)
    print(f"{total - failures}/{total} checks passed")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="symred",
        description="Hamiltonian symmetry reduction: simulate, reduce, "
                    "reconstruct, draw phase portraits, verify structure.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-rigid", help="free rigid body (reduced or full attitude)")
    p.add_argument("--inertia", default="3,2,1")
    p.add_argument("--m0", default="0.2,1,0.3")
    p.add_argument("--full", action="store_true", default=False,
                   help="integrate attitude as well (CSV gains Q11..Q33 columns)")
    _add_common_integration(p, 10.0, 1e-2)
    p.set_defaults(func=cmd_simulate_rigid)

    p = sub.add_parser("hammer", help="intermediate-axis flip experiment")
    p.add_argument("--inertia", default="3,2,1")
    p.add_argument("--m0", default="1e-3,1,1e-3")
    p.add_argument("--report", default=None, help="flip report JSON path")
    _add_common_integration(p, 100.0, 1e-3)
    p.set_defaults(func=cmd_hammer)

    p = sub.add_parser("simulate-reduced", help="reduced central-force system")
    p.add_argument("--hamiltonian", default="kepler",
                   help=f"one of: {', '.join(central.builtin_names())}")
    p.add_argument("--w0", default="1,0,1")
    _add_common_integration(p, 50.0, 1e-3)
    p.set_defaults(func=cmd_simulate_reduced)

    p = sub.add_parser("reconstruct", help="lift a reduced orbit back to phase space")
    p.add_argument("--hamiltonian", default="kepler")
    p.add_argument("--w0", default="1,0,1")
    _add_common_integration(p, 20.0, 1e-3)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("portrait", help="phase portrait on a symplectic leaf")
    p.add_argument("--system", choices=["central", "rigid"], default="central")
    p.add_argument("--hamiltonian", default="kepler")
    p.add_argument("--casimir", type=float, default=0.6)
    p.add_argument("--inertia", default="3,2,1")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--chart", choices=["auto", "hyperboloid", "cone", "plane", "sphere"],
                   default="auto")
    p.add_argument("--levels", default="auto",
                   help='"auto" or comma-separated level values')
    p.add_argument("--quantile", type=float, default=0.98,
                   help="upper quantile for auto level selection")
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--region", default="auto",
                   help='"auto" or w1lo,w1hi,w2lo,w2hi,w3lo,w3hi')
    p.add_argument("--out", default=None, help="SVG output path")
    p.add_argument("--csv", default=None, help="contour CSV output path")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("nbody-reduce", help="k-body reduction to sp(2k)*")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--masses", default="1,1")
    p.add_argument("--q", default=None, help="flattened positions, k*n numbers")
    p.add_argument("--p", default=None, help="flattened momenta, k*n numbers")
    p.add_argument("--seed", type=int, default=0, help="seed for random initial data")
    p.add_argument("--potential", default="spring")
    p.add_argument("--remove-com", dest="remove_com", action="store_true", default=False)
    p.add_argument("--audit", default=None, help="audit report JSON path")
    _add_common_integration(p, 10.0, 1e-2)
    p.set_defaults(func=cmd_nbody_reduce)

    p = sub.add_parser("verify", help="run the structural verification suites")
    p.add_argument("--suite", default="all",
                   help=f"one of: {', '.join(verify.SUITES)}, all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_verify)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            subparser = action.choices[args.command]
            break
    try:
        cfg = _merge_config(args, subparser)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverDivergenceError as exc:
        at = f" at t = {exc.time:.6g}" if exc.time is not None else ""
        print(f"numerical failure{at}: {exc} "
              f"(iterations = {exc.iterations}, residual = {exc.residual:.3e})",
              file=sys.stderr)
        return 3
    except (ValueError, central.DegenerateDataError, central.SingularChartError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
