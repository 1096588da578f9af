"""Command-line interface: ``excitonium {run,compare,sweep,presets,validate}``."""

import argparse
import datetime as _dt
import logging
import sys
from pathlib import Path

from .heom import worker_count
from .propagation import IntegrationError
from .scenario import (
    PRESETS,
    SOLVERS,
    SWEEP_AXES,
    ConfigError,
    Scenario,
    compare,
    load_config,
    parse_config_text,
    preset_fields,
    preset_scenarios,
    probe_ordering,
    probe_summary,
    run_scenario,
    side_by_side_csv,
    summary_csv,
    sweep,
    trajectory_header,
)
from .trajectory import StateValidityError, write_atomic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("excitonium")


def _scenario_args(p):
    p.add_argument("--config", metavar="PATH", help="INI scenario file")
    p.add_argument("--preset", metavar="NAME", help="figure preset (see 'presets')")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--temp", type=float, metavar="K", help="temperature in kelvin")
    p.add_argument("--site", type=int, metavar="I", help="initially excited site (1-based)")
    p.add_argument("--depth", type=int, metavar="N", help="hierarchy truncation depth")
    p.add_argument("--horizon", type=float, metavar="FS", help="simulated time in fs")
    p.add_argument("--dt", type=float, metavar="FS", help="integration step in fs")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")
    p.add_argument("--workers", type=int, metavar="N",
                   help="worker threads (capped by EXCITONIUM_THREADS)")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the creation-time header line")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="excitonium",
        description="Exciton dynamics and entanglement in light-harvesting complexes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and write its trajectory CSV")
    _scenario_args(p)
    p.add_argument("--all-variants", action="store_true",
                   help="with --preset, run every variant of the preset")

    p = sub.add_parser("compare", help="run one scenario under several solvers")
    _scenario_args(p)
    p.add_argument("--solvers", metavar="LIST",
                   help=f"comma-separated subset of {','.join(SOLVERS)}")

    p = sub.add_parser("sweep", help="run a scenario for a list of parameter values")
    _scenario_args(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, metavar="LIST", help="comma-separated values")

    p = sub.add_parser("presets", help="list figure presets")
    p.add_argument("name", nargs="?")

    p = sub.add_parser("validate", help="check a configuration without running it")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--preset", metavar="NAME")
    return parser


_FLAG_FIELDS = {"solver": "solver", "temp": "temperature", "site": "initial_site",
                "depth": "depth", "horizon": "horizon_fs", "dt": "dt_fs"}


def _flag_overrides(args):
    return {field: getattr(args, flag) for flag, field in _FLAG_FIELDS.items()
            if getattr(args, flag, None) is not None}


def resolve_scenario(args):
    values = {}
    if args.preset:
        values.update(preset_fields(args.preset))
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_config_text(text, source=str(path), base=path.parent))
    values.update(_flag_overrides(args))
    return Scenario(**values)


def _timestamp(args):
    if getattr(args, "no_timestamp", False):
        return None
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _prefix(args):
    if args.preset:
        return f"{args.preset}_"
    if args.config:
        return f"{Path(args.config).stem}_"
    return ""


def _write_trajectory(args, sc, traj, name):
    out = Path(args.out)
    path = out / f"{name}.csv"
    write_atomic(path, traj.to_csv(trajectory_header(sc, traj, _timestamp(args))))
    if args.svg:
        from .plotting import trajectory_svg

        pairs = PRESETS[args.preset].pairs if args.preset in PRESETS else ()
        write_atomic(out / f"{name}.svg", trajectory_svg(traj, pairs, title=name))
    print(path)
    return path


def cmd_run(args):
    if args.all_variants:
        if not args.preset:
            raise ConfigError("--all-variants requires --preset")
        extra = parse_config_text(Path(args.config).read_text(), str(args.config)) if args.config else {}
        scenarios = preset_scenarios(args.preset, **{**extra, **_flag_overrides(args)})
    else:
        scenarios = [resolve_scenario(args)]
    workers = worker_count(args.workers)
    for sc in scenarios:
        name = _prefix(args) + sc.label()
        try:
            traj = run_scenario(sc, workers=workers)
        except StateValidityError as exc:
            if exc.trajectory is not None and exc.trajectory.times:
                _write_trajectory(args, sc, exc.trajectory, name)
            raise
        _write_trajectory(args, sc, traj, name)
    return EXIT_OK


def cmd_compare(args):
    sc = resolve_scenario(args)
    if args.solvers:
        solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    elif args.preset and len(PRESETS[args.preset].solvers) > 1:
        solvers = list(PRESETS[args.preset].solvers)
    else:
        solvers = list(SOLVERS)
    trajs = compare(sc, solvers, worker_count(args.workers))
    out = Path(args.out)
    stem = f"{_prefix(args)}compare_site{sc.initial_site}_{sc.temperature:g}K"
    header = {k: v for k, v in sc.provenance().items() if k != "solver.solver"}
    header["solvers"] = ",".join(trajs)
    ts = _timestamp(args)
    if ts:
        header["created"] = ts
    write_atomic(out / f"{stem}.csv", side_by_side_csv(trajs, header))
    rows = probe_summary(trajs)
    write_atomic(out / f"{stem}_summary.csv", summary_csv(rows))
    for name, traj in trajs.items():
        write_atomic(out / f"{stem}_{name}.csv",
                     traj.to_csv(trajectory_header(sc.replace(solver=name.split("#")[0]), traj, ts)))
    if args.svg:
        from .plotting import comparison_svg

        write_atomic(out / f"{stem}.svg", comparison_svg(trajs))
    _print_summary(rows, probe_ordering(trajs))
    print(out / f"{stem}.csv")
    return EXIT_OK


def _print_summary(rows, ordering):
    keys = list(rows[0])
    widths = [max(len(k), 12) for k in keys]
    print("  ".join(k.ljust(w) for k, w in zip(keys, widths)))
    for row in rows:
        cells = [row[k] if isinstance(row[k], str) else f"{row[k]:.6g}" for k in keys]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    for t, names in ordering.items():
        print(f"t = {t:g} fs: " + " >= ".join(names))


def cmd_sweep(args):
    sc = resolve_scenario(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    manifest = sweep(sc, args.axis, values, args.out, stem=_prefix(args) + sc.label(),
                     workers=worker_count(args.workers), timestamp=_timestamp(args))
    for entry in manifest["files"]:
        print(Path(args.out) / entry["file"])
    for row in manifest.get("convergence", []):
        print(f"depth {row['from']} -> {row['to']}: max|dE| = {row['max_dE']:.3e}, "
              f"max|dpop| = {row['max_dpop']:.3e}")
    return EXIT_OK


def cmd_presets(args):
    names = [args.name] if args.name else list(PRESETS)
    for name in names:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
        preset = PRESETS[name]
        print(f"{name}: {preset.description}")
        for sc in preset_scenarios(name):
            print(f"    {sc.label()}  (K = {sc.matsubara_terms}, depth = {sc.depth}, "
                  f"horizon = {sc.horizon_fs:g} fs)")
    return EXIT_OK


def cmd_validate(args):
    if not args.config and not args.preset:
        raise ConfigError("validate needs --config or --preset")
    if args.config and not args.preset:
        sc = load_config(args.config)
    else:
        sc = resolve_scenario(argparse.Namespace(**{**vars(args), **dict.fromkeys(_FLAG_FIELDS)}))
    h = sc.hamiltonian_matrix()
    n = h.shape[0]
    if sc.initial_site > n:
        raise ConfigError(f"system.initial_site: {sc.initial_site} out of range 1..{n}")
    sc.bath(n)
    print(f"ok: {sc.label()} ({n} sites)")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep,
            "presets": cmd_presets, "validate": cmd_validate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StateValidityError, IntegrationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
