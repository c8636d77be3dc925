"""Command line entry point: ``nlsbeat {simulate,normal-form,verify,sweep,report}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .. import analysis, dynamics
from ..normal_form import ClassificationError, classify_Z4, free_hamiltonian
from ..polynomial import poisson_bracket
from ..validation import ConfigurationError
from .config import ExperimentConfig, parse_config, parse_window
from .report import merge_reports
from .scenarios import CATALOG, calibrate, horizon, normal_form, run_scenario, run_sweep, \
    sim_config, simulate

# flag -> ExperimentConfig field
_FLAGS = {
    "epsilon": ("epsilon", float),
    "sign": ("sign", int),
    "p": ("p", int),
    "a": ("a", float),
    "b": ("b", float),
    "recipe": ("recipe", str),
    "q": ("q", int),
    "N": ("N", int),
    "dt": ("dt", float),
    "window": ("T_mode", str),
    "integrator": ("integrator", str),
    "out": ("output_dir", str),
    "seed": ("rng_seed", int),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    for flag, (_, typ) in _FLAGS.items():
        p.add_argument(f"--{flag}", type=typ, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlsbeat", description="Beating between modes +-1 in a modulated cubic NLS.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="run one configuration and write CSV series")
    _common(p)

    p = sub.add_parser("normal-form", help="write chi, Z4 and its parts, check the homological residual")
    _common(p)
    p.add_argument("--bound", type=int, default=20)

    p = sub.add_parser("verify", help="run one catalog scenario and write report.json")
    p.add_argument("scenario")
    _common(p)
    p.add_argument("--calibrate", action="store_true",
                   help="also rerun the threshold oracles and write calibration.json")

    p = sub.add_parser("sweep", help="theorem runs over several epsilons plus slope fits")
    _common(p)
    p.add_argument("--epsilons", default="0.2,0.1,0.05")

    p = sub.add_parser("report", help="merge report.json files into summary.json")
    p.add_argument("paths", nargs="+", help="report files or directories searched recursively")
    p.add_argument("--out", default=None)
    return parser


def _config(args, scenario=None):
    lines = {}
    if args.config:
        text = Path(args.config).read_text()
        cfg = parse_config(text, require_scenario=False)
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0]
            if "=" in line:
                lines[line.split("=", 1)[0].strip()] = lineno
    else:
        cfg = ExperimentConfig()
    over = {}
    for flag, (name, _) in _FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            over[name] = v
            lines.pop(name, None)
    explicit = set(lines) | set(over)
    if scenario is not None:
        over["scenario"] = scenario
        for k, v in CATALOG[scenario].fixed.items():
            if k in explicit and over.get(k, getattr(cfg, k)) != v:
                where = f" (line {lines[k]})" if k in lines else ""
                raise ConfigurationError(f"{k}{where}: fixed to {v!r} by scenario {scenario}")
            over[k] = v
    return cfg.with_overrides(**over).validate(lines), explicit


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run(out: Path, traj, series, prediction):
    traj.to_csv(out / "trajectory.csv")
    series.to_csv(out / "observables.csv", prediction)


def cmd_simulate(args) -> int:
    cfg, _ = _config(args)
    parse_window(cfg.T_mode)
    over = {}
    if cfg.scenario == "control-constant":
        over = dict(const_weight=1.0, a=0.0, b=0.0)
    elif cfg.scenario == "general-p":
        over = dict(datum_mode=cfg.p)
    traj = simulate(sim_config(cfg, **over))
    series = analysis.observable_series(traj)
    pred = None
    if cfg.p == 1 and (cfg.a, cfg.b) == (2, 0) and over.get("const_weight", 0) == 0:
        pred = analysis.beating_prediction(series.t, cfg.epsilon, cfg.sign)
    out = _outdir(cfg.output_dir)
    _write_run(out, traj, series, pred)
    print(f"wrote {out / 'trajectory.csv'} and {out / 'observables.csv'} "
          f"({len(traj)} samples, T={horizon(cfg):.6g})")
    print(f"mass drift {traj.mass_drift:.3e}, energy drift {traj.energy_drift:.3e}")
    return 0


def cmd_normal_form(args) -> int:
    cfg, _ = _config(args)
    if args.bound < cfg.p:
        raise ConfigurationError(f"bound: must be >= p={cfg.p}, got {args.bound}")
    P, chi, Z4 = normal_form(cfg.p, cfg.sign, cfg.a, cfg.b, args.bound)
    out = _outdir(cfg.output_dir)
    files = {"perturbation.txt": P, "chi.txt": chi, "z4.txt": Z4}
    if cfg.p == 1:
        try:
            parts = classify_Z4(Z4)
        except ClassificationError as exc:
            raise ConfigurationError(f"Z4 classification failed: {exc}") from None
        files.update({"z41.txt": parts.effective, "z42.txt": parts.pair, "z43.txt": parts.rest})
    for name, poly in files.items():
        (out / name).write_text(poly.dumps())
    residual = poisson_bracket(chi, free_hamiltonian(args.bound)) + Z4 - P
    metric = "0/1" if residual.is_zero() else f"{len(residual)} nonzero terms"
    (out / "residual.txt").write_text(metric + "\n")
    print(f"homological residual: {metric}")
    print(f"terms: P={len(P)} chi={len(chi)} Z4={len(Z4)}")
    return 0 if residual.is_zero() else 1


def cmd_verify(args) -> int:
    if args.scenario not in CATALOG:
        raise ConfigurationError(f"scenario: unknown scenario {args.scenario!r}; "
                                 f"known: {', '.join(CATALOG)}")
    cfg, explicit = _config(args, args.scenario)
    report, artifacts = run_scenario(args.scenario, cfg, explicit)
    out = _outdir(os.path.join(cfg.output_dir, args.scenario))
    if "run" in artifacts:
        _write_run(out, *artifacts["run"])
    if args.calibrate:
        cal = calibrate(cfg)
        (out / "calibration.json").write_text(json.dumps(cal, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out / 'calibration.json'}")
    report.write(out / "report.json")
    print(report.summary())
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    cfg, _ = _config(args)
    try:
        eps = tuple(float(e) for e in args.epsilons.split(","))
    except ValueError:
        raise ConfigurationError(f"epsilons: cannot parse {args.epsilons!r}") from None
    report = run_sweep(cfg, eps)
    out = _outdir(os.path.join(cfg.output_dir, "sweep"))
    report.write(out / "report.json")
    print(report.summary())
    return 0 if report.passed else 1


def _collect(paths):
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(p.rglob("report.json")))
        elif p.is_file():
            found.append(p)
        else:
            raise ConfigurationError(f"report: no such file or directory {str(p)!r}")
    if not found:
        raise ConfigurationError("report: no report.json files found")
    return found


def cmd_report(args) -> int:
    reports = []
    for path in _collect(args.paths):
        try:
            reports.append(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"report: {path} is not valid JSON ({exc})") from None
    names = [r["scenario"] for r in reports]
    if len(set(names)) != len(names):
        raise ConfigurationError("report: duplicate scenario among inputs")
    summary = merge_reports(reports)
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.out:
        (_outdir(args.out) / "summary.json").write_text(text)
    sys.stdout.write(text)
    return 0 if summary["passed"] else 1


_COMMANDS = {
    "simulate": cmd_simulate,
    "normal-form": cmd_normal_form,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (ConfigurationError, ValueError, KeyError, OSError, dynamics.IntegrationError) as exc:
        msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        print(f"ERROR: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
