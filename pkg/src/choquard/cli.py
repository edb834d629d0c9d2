"""Command-line interface: run configuration, dispatch, provenance
stamping, and artifact emission (JSON summaries, CSV series, CHQF fields).

Exit codes: 0 success, 1 usage/parameter error, 2 experiment assertion
failure (e.g. a trichotomy verdict that should hold does not).
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import backend, __version__
from .dynamics import evolve, phase_winding_rate, stability_experiment
from .errors import (BlowUpError, ConvergenceError, FieldFormatError,
                     ParameterError)
from .fieldio import load_field, save_field
from .grids import Field, Grid, ModelParams, gaussian
from .ground_state import SolverOptions, find_ground_state, m_curve
from .landscape import compute_constants, f_value, landscape_curve, trichotomy_report
from .potentials import Potential, check_conditions, parse_potential
from .spectral import norm_l2_sq
from .wellposed import AdmissiblePair, admissible_pairs, picard_iterate, strichartz_ratio


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _add_common(sp):
    sp.add_argument("--config", type=str, default=None,
                    help="JSON file with defaults for the flags below")
    sp.add_argument("--out", type=str, default=None, help="output directory")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--q", type=float, default=1.9)
    sp.add_argument("--grid", type=str, default="128,12",
                    help="n,L (points per axis, half-width)")
    sp.add_argument("--potential", type=str, default="zero")


def build_parser() -> _Parser:
    parser = _Parser(prog="choquard",
                     description="numerical laboratory for the doubly "
                                 "nonlocal Schrodinger model")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("constants", "landscape", "kato"):
        _add_common(sub.add_parser(name))

    gs = sub.add_parser("ground-state")
    _add_common(gs)
    gs.add_argument("--a", type=float, required=True)
    gs.add_argument("--tol", type=float, default=1e-8)

    mc = sub.add_parser("m-curve")
    _add_common(mc)
    mc.add_argument("--a-list", type=str, required=True,
                    help="comma-separated mass samples")
    mc.add_argument("--tol", type=float, default=1e-8)

    ev = sub.add_parser("evolve")
    _add_common(ev)
    ev.add_argument("--phi", type=str, required=True,
                    help="CHQF field file or gaussian:mass=..,width=..")
    ev.add_argument("--T", type=float, required=True)
    ev.add_argument("--tau", type=float, default=1e-3)
    ev.add_argument("--record-every", type=int, default=10)
    ev.add_argument("--orbit-ref", type=str, default=None)
    ev.add_argument("--checkpoints", action="store_true")

    st = sub.add_parser("stability")
    _add_common(st)
    st.add_argument("--a", type=float, required=True)
    st.add_argument("--epsilons", type=str, default="1e-4,1e-3,1e-2")
    st.add_argument("--T", type=float, default=10.0)
    st.add_argument("--tau", type=float, default=0.01)

    pr = sub.add_parser("probe")
    _add_common(pr)
    pr.add_argument("--phi", type=str, required=True)
    pr.add_argument("--T", type=float, default=0.1)
    pr.add_argument("--iters", type=int, default=6)
    pr.add_argument("--pairs", type=str, default="auto")
    return parser


def _apply_config(args):
    if args.config:
        with open(args.config) as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise _CliError(f"malformed config: {exc}")
        if not isinstance(cfg, dict):
            raise _CliError("config must be a JSON object")
        for key, val in cfg.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise _CliError(f"unknown config key {key!r}")
            default = build_parser().parse_args(
                [args.command, "--a", "1"] if args.command in
                ("ground-state", "stability") else
                ([args.command, "--a-list", "1"] if args.command == "m-curve"
                 else ([args.command, "--phi", "x", "--T", "1"]
                       if args.command in ("evolve", "probe")
                       else [args.command])))
            if getattr(args, attr) == getattr(default, attr, None):
                setattr(args, attr, val)
    return args


def _grid(args) -> Grid:
    try:
        n_s, L_s = args.grid.split(",")
        return Grid(args.d, int(n_s), float(L_s))
    except ValueError as exc:
        raise _CliError(f"bad --grid {args.grid!r}: {exc}")


def _params(args) -> ModelParams:
    return ModelParams(args.d, args.alpha, args.q)


def _resolved_config(args) -> dict:
    skip = {"config", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _outdir(args) -> Path:
    out = Path(args.out) if args.out else Path.cwd() / "choquard-out"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, config: dict, constants, payload: dict):
    doc = {"package": f"choquard-lab {__version__}",
           "config": config,
           "constants": constants.as_dict() if constants is not None else None}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, default=_jsonable))
    return doc


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, AdmissiblePair):
        return {"m": obj.m, "n": obj.n}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_csv(path: Path, header_units: str, columns: dict):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header_units}\n")
        writer = csv.writer(fh)
        writer.writerow(columns.keys())
        for row in zip(*columns.values()):
            writer.writerow(row)


def _load_phi(spec: str, grid: Grid) -> Field:
    if spec.startswith("gaussian:"):
        kv = dict(item.split("=") for item in spec.partition(":")[2].split(","))
        width = float(kv.get("width", 1.0))
        mass = float(kv.get("mass", 1.0))
        u = gaussian(grid, width=width)
        return Field(grid, u.values * math.sqrt(mass / norm_l2_sq(u)))
    field = load_field(spec)
    field.grid.check_same(grid)
    return field


def _potential(args) -> Potential:
    return parse_potential(args.potential)


def _constants(params, V, grid):
    v_norm = 0.0 if V.is_zero else V.norms(grid).neg_lp_halfd
    return compute_constants(params, v_minus_halfd=v_norm)


def dispatch(args) -> int:
    backend.set_threads(args.threads)
    grid = _grid(args)
    params = _params(args)
    V = _potential(args)
    out = _outdir(args)
    config = _resolved_config(args)

    if args.command == "constants":
        c = _constants(params, V, grid)
        _write_json(out / "constants.json", config, c, {})
        print(json.dumps(c.as_dict(), indent=2))
        return 0

    if args.command == "landscape":
        c = _constants(params, V, grid)
        report = trichotomy_report(c, params)
        doc = _write_json(out / "landscape.json", config, c,
                          {"a0": c.a0, "rho0": c.rho0,
                           "trichotomy_report": report})
        rows = landscape_curve(c, params)
        _write_csv(out / "landscape.csv",
                   "a [mass], rho [gradient-norm^2], f [dimensionless]",
                   {"a": [r[0] for r in rows],
                    "rho": [r[1] for r in rows],
                    "f": [r[2] for r in rows]})
        print(json.dumps(doc["trichotomy_report"], indent=2, default=_jsonable))
        return 0 if report["pass"] else 2

    if args.command == "kato":
        c = _constants(params, V, grid)
        report = check_conditions(V, grid, c.sobolev_S)
        _write_json(out / "kato.json", config, c, {"report": report.as_dict()})
        print(json.dumps(report.as_dict(), indent=2))
        return 0

    if args.command == "ground-state":
        c = _constants(params, V, grid)
        opts = SolverOptions(tol=args.tol)
        res = find_ground_state(args.a, V, params, grid, opts=opts,
                                constants=c)
        save_field(out / "ground_state.chqf", res.u_a)
        _write_json(out / "ground_state.json", config, c, res.as_dict())
        print(json.dumps({"m_a": res.m_a, "lambda": res.lam,
                          "rho": res.rho_attained,
                          "residual": res.grad_residual}, indent=2))
        return 0

    if args.command == "m-curve":
        c = _constants(params, V, grid)
        a_list = [float(x) for x in args.a_list.split(",")]
        curve, results = m_curve(a_list, V, params, grid,
                                 opts=SolverOptions(tol=args.tol), constants=c)
        _write_json(out / "m_curve.json", config, c,
                    {"curve": [{"a": a, "m": m,
                                "all_energies": results[a].all_energies}
                               for a, m in curve]})
        _write_csv(out / "m_curve.csv", "a [mass], m [energy]",
                   {"a": [a for a, _ in curve], "m": [m for _, m in curve]})
        print(json.dumps({"curve": curve}, indent=2, default=_jsonable))
        return 0

    if args.command == "evolve":
        c = _constants(params, V, grid)
        phi = _load_phi(args.phi, grid)
        ref = load_field(args.orbit_ref) if args.orbit_ref else None
        writer = None
        if args.checkpoints:
            ckdir = out / "checkpoints"
            ckdir.mkdir(exist_ok=True)

            def writer(t, field):  # noqa: F811
                save_field(ckdir / f"state_t{t:.6f}.chqf", field)
        trace = evolve(phi, V, params, args.T, args.tau,
                       record_every=args.record_every, orbit_ref=ref,
                       translate=V.is_zero, on_record=writer)
        cols = {"t": trace.times, "mass": trace.mass, "energy": trace.energy}
        if trace.orbit_dist.size:
            cols["orbit_dist"] = trace.orbit_dist
        _write_csv(out / "evolve.csv",
                   "t [time], mass [L2^2], energy [energy], orbit_dist [H1]",
                   cols)
        save_field(out / "final_state.chqf", trace.final_state)
        _write_json(out / "evolve.json", config, c, {"summary": trace.summary()})
        print(json.dumps(trace.summary(), indent=2))
        return 0

    if args.command == "stability":
        c = _constants(params, V, grid)
        res = find_ground_state(args.a, V, params, grid, constants=c)
        eps = [float(x) for x in args.epsilons.split(",")]
        report = stability_experiment(res.u_a, args.a, V, params, eps,
                                      T=args.T, tau=args.tau, seed=args.seed,
                                      translate=V.is_zero)
        for e, tr in report.traces.items():
            _write_csv(out / f"stability_eps{e:g}.csv",
                       "t [time], mass [L2^2], energy [energy], orbit_dist [H1]",
                       {"t": tr.times, "mass": tr.mass, "energy": tr.energy,
                        "orbit_dist": tr.orbit_dist})
        _write_json(out / "stability.json", config, c,
                    {"report": report.as_dict(),
                     "ground_state": res.as_dict()})
        print(json.dumps(report.as_dict(), indent=2))
        return 0 if report.passes() else 2

    if args.command == "probe":
        c = _constants(params, V, grid)
        phi = _load_phi(args.phi, grid)
        ratios = strichartz_ratio(phi, V, params, args.T)
        pres = picard_iterate(phi, V, params, args.T, iters=args.iters)
        payload = {"strichartz": {"pairs": ratios["pairs"],
                                  "ratios": ratios["ratios"]},
                   "picard": {"diff_norms": pres.diff_norms,
                              "factors": pres.factors,
                              "contracting": pres.contracting,
                              "message": pres.message}}
        if args.pairs != "auto":
            try:
                m_s, n_s = args.pairs.split(",")
                pair = AdmissiblePair(float(m_s), float(n_s))
                pair.check(params.d)
                payload["requested_pair"] = pair
            except ValueError as exc:
                raise _CliError(f"bad --pairs {args.pairs!r}: {exc}")
        _write_json(out / "probe.json", config, c, payload)
        print(json.dumps(payload, indent=2, default=_jsonable))
        return 0 if pres.contracting else 2

    raise _CliError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args)
        return dispatch(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, FieldFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, BlowUpError) as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
