"""Simulation scenarios: configuration, presets and runners.

A scenario is one fully resolved simulation (system, bath, trapping,
solver, time grid). Configuration files are INI-style; every key names a
:class:`Scenario` field::

    [system]
    hamiltonian = fmo
    initial_site = 1

    [bath]
    temperature = 77
    lam = 35
    gamma = 0.01
    n_matsubara = auto

    [trapping]
    enabled = true
    site = 3
    rate = 0.00025

    [solver]
    solver = heom
    depth = 4
    terminator = true

    [integrator]
    method = rk4
    horizon_fs = 5000
    dt_fs = 1
    record_stride = 1
"""

import configparser
import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bath import FMO_REORGANIZATION_CM1, FMO_RELAXATION_TIME_FS, BathSpec
from .hamiltonian import build_fmo_hamiltonian, load_hamiltonian, site_state
from .heom import (
    DEFAULT_DEPTH,
    FMO_TRAP_TIME_FS,
    NO_TRAPPING,
    TrappingSpec,
    convergence_scan,
    propagate_heom,
    worker_count,
)
from .propagation import METHODS, IntegratorOptions
from .redfield import build_redfield_tensor, propagate_redfield
from .trajectory import write_atomic

log = logging.getLogger(__name__)

SOLVERS = ("heom", "redfield-full", "redfield-secular")
PROBE_TIMES_FS = (100.0, 200.0, 500.0, 1000.0)
SWEEP_AXES = ("temperature", "initial_site", "depth")
# below this temperature one explicit Matsubara term is carried by default
MATSUBARA_AUTO_THRESHOLD_K = 150.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    hamiltonian: str = "fmo"
    initial_site: int = 1
    temperature: float = 77.0
    lam: float = FMO_REORGANIZATION_CM1
    gamma: float = 1.0 / FMO_RELAXATION_TIME_FS
    n_matsubara: object = "auto"
    site_lam: tuple = ()
    site_gamma: tuple = ()
    trapping: bool = True
    trap_site: int = 3
    trap_rate: float = 1.0 / FMO_TRAP_TIME_FS
    solver: str = "heom"
    depth: int = DEFAULT_DEPTH
    terminator: bool = True
    method: str = "rk4"
    horizon_fs: float = 5000.0
    dt_fs: float = 1.0
    record_stride: int = 1
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self):
        errors = _field_errors(self)
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def matsubara_terms(self):
        if self.n_matsubara == "auto":
            return 0 if self.temperature >= MATSUBARA_AUTO_THRESHOLD_K else 1
        return int(self.n_matsubara)

    def hamiltonian_matrix(self):
        if self.hamiltonian == "fmo":
            return build_fmo_hamiltonian()
        return load_hamiltonian(self.hamiltonian)

    def bath(self, n_sites):
        """Bath shared by all sites, or one per site when overrides are set."""
        k = self.matsubara_terms
        if not self.site_lam and not self.site_gamma:
            return BathSpec(self.lam, self.gamma, self.temperature, k)
        lams = self.site_lam or (self.lam,) * n_sites
        gams = self.site_gamma or (self.gamma,) * n_sites
        if len(lams) != n_sites or len(gams) != n_sites:
            raise ConfigError(f"bath.site_lam/site_gamma need {n_sites} entries")
        return [BathSpec(lm, g, self.temperature, k) for lm, g in zip(lams, gams)]

    def trapping_spec(self):
        return TrappingSpec(self.trap_site, self.trap_rate) if self.trapping else NO_TRAPPING

    def integrator(self):
        return IntegratorOptions(method=self.method, dt=self.dt_fs, rtol=self.rtol,
                                 atol=self.atol, dt_min=min(1e-6, self.dt_fs),
                                 dt_max=max(self.dt_fs, 10.0),
                                 record_stride=self.record_stride)

    def time_grid(self):
        step = self.dt_fs * self.record_stride
        n = int(round(self.horizon_fs / step))
        return np.arange(n + 1) * step

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def label(self):
        return f"{self.solver}_site{self.initial_site}_{self.temperature:g}K"

    def provenance(self):
        """Flat ``key -> value`` record of every field (for CSV headers)."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            out[f"{_SECTION_OF[f.name]}.{f.name}"] = value
        out["bath.n_matsubara_resolved"] = self.matsubara_terms
        return out


def _field_errors(sc):
    errors = []

    def bad(name, msg):
        errors.append(f"{_SECTION_OF[name]}.{name}: {msg}")

    if sc.solver not in SOLVERS:
        bad("solver", f"unknown solver {sc.solver!r}; expected one of {', '.join(SOLVERS)}")
    if sc.method not in METHODS:
        bad("method", f"unknown method {sc.method!r}; expected one of {', '.join(METHODS)}")
    if sc.hamiltonian != "fmo" and not Path(sc.hamiltonian).is_file():
        bad("hamiltonian", f"expected 'fmo' or an existing file, got {sc.hamiltonian!r}")
    if not sc.temperature > 0:
        bad("temperature", "must be > 0")
    if not sc.lam >= 0:
        bad("lam", "must be >= 0")
    if not sc.gamma > 0:
        bad("gamma", "must be > 0")
    if sc.n_matsubara != "auto":
        try:
            if int(sc.n_matsubara) < 0 or int(sc.n_matsubara) != sc.n_matsubara:
                raise ValueError
        except (TypeError, ValueError):
            bad("n_matsubara", "must be 'auto' or a nonnegative integer")
    if sc.initial_site < 1:
        bad("initial_site", "must be >= 1")
    if sc.trap_site < 1:
        bad("trap_site", "must be >= 1")
    if not sc.trap_rate >= 0:
        bad("trap_rate", "must be >= 0")
    if sc.depth < 0:
        bad("depth", "must be >= 0")
    if not sc.horizon_fs >= 0:
        bad("horizon_fs", "must be >= 0")
    if not sc.dt_fs > 0:
        bad("dt_fs", "must be > 0")
    if sc.record_stride < 1:
        bad("record_stride", "must be >= 1")
    if not (sc.rtol > 0 and sc.atol > 0):
        bad("rtol", "rtol and atol must be > 0")
    if any(not v >= 0 for v in sc.site_lam):
        bad("site_lam", "entries must be >= 0")
    if any(not v > 0 for v in sc.site_gamma):
        bad("site_gamma", "entries must be > 0")
    return errors


_SECTIONS = {
    "system": ("hamiltonian", "initial_site"),
    "bath": ("temperature", "lam", "gamma", "n_matsubara", "site_lam", "site_gamma"),
    "trapping": ("trapping", "trap_site", "trap_rate"),
    "solver": ("solver", "depth", "terminator"),
    "integrator": ("method", "horizon_fs", "dt_fs", "record_stride", "rtol", "atol"),
}
_SECTION_OF = {name: sec for sec, names in _SECTIONS.items() for name in names}
# INI aliases: [trapping] enabled/site/rate
_ALIASES = {("trapping", "enabled"): "trapping", ("trapping", "site"): "trap_site",
            ("trapping", "rate"): "trap_rate"}
_FIELD_TYPES = {f.name: f.default for f in dataclasses.fields(Scenario)}


def _coerce(name, text):
    default = _FIELD_TYPES[name]
    text = text.strip()
    if name == "n_matsubara":
        return "auto" if text == "auto" else int(text)
    if isinstance(default, bool):
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if isinstance(default, tuple):
        return tuple(float(v) for v in text.split(",") if v.strip())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def parse_config_text(text, source="<config>", base=None):
    """Parse INI text into a dict of :class:`Scenario` field overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    errors = []
    for section in parser.sections():
        if section not in _SECTIONS and section != "preset":
            errors.append(f"{source}: unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if section == "preset":
                if key != "name":
                    errors.append(f"{source}: [preset] only supports 'name'")
                continue
            name = _ALIASES.get((section, key), key)
            if _SECTION_OF.get(name) != section:
                errors.append(f"{source}: unknown key {section}.{key}")
                continue
            try:
                values[name] = _coerce(name, raw)
            except ValueError as exc:
                errors.append(f"{source}: {section}.{key}: {exc}")
    if errors:
        raise ConfigError("\n".join(errors))
    if parser.has_section("preset"):
        preset_name = parser.get("preset", "name", fallback=None)
        if preset_name:
            values = {**preset_fields(preset_name), **values}
    if "hamiltonian" in values and values["hamiltonian"] != "fmo" and base is not None:
        path = Path(values["hamiltonian"])
        if not path.is_absolute():
            values["hamiltonian"] = str(Path(base) / path)
    return values


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    values = parse_config_text(text, source=str(path), base=path.parent)
    try:
        return Scenario(**values)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class Preset:
    description: str
    fields: dict
    variants: tuple = ()
    solvers: tuple = ("heom",)
    pairs: tuple = field(default=())


_BOTH_TEMPS = ({"temperature": 77.0}, {"temperature": 300.0})

PRESETS = {
    "fig2": Preset(
        "Global entanglement E(t) for initial sites 1 and 6 at 77 K and 300 K (HEOM).",
        {"initial_site": 1, "temperature": 77.0},
        tuple({"initial_site": s, **t} for s in (1, 6) for t in _BOTH_TEMPS),
    ),
    "fig3": Preset(
        "Pairwise concurrence, initial site 1, 77 K and 300 K (HEOM).",
        {"initial_site": 1, "temperature": 77.0},
        _BOTH_TEMPS,
        pairs=((1, 2), (1, 3), (1, 5), (2, 3), (3, 4)),
    ),
    "fig4": Preset(
        "Pairwise concurrence, initial site 6, 77 K and 300 K (HEOM).",
        {"initial_site": 6, "temperature": 77.0},
        _BOTH_TEMPS,
        pairs=((4, 5), (4, 6), (4, 7), (5, 6), (5, 7), (6, 7)),
    ),
    "figS1": Preset(
        "All pairwise concurrences, initial site 1, 77 K and 300 K (HEOM).",
        {"initial_site": 1, "temperature": 77.0},
        _BOTH_TEMPS,
    ),
    "figS2": Preset(
        "All pairwise concurrences, initial site 6, 77 K and 300 K (HEOM).",
        {"initial_site": 6, "temperature": 77.0},
        _BOTH_TEMPS,
    ),
    "figS3": Preset(
        "HEOM against full and secular Redfield, initial site 1, 300 K.",
        {"initial_site": 1, "temperature": 300.0},
        solvers=SOLVERS,
    ),
}


def preset_fields(name):
    try:
        return dict(PRESETS[name].fields)
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def resolve_preset(name, **overrides):
    return Scenario(**{**preset_fields(name), **overrides})


def preset_scenarios(name, **overrides):
    """Every variant of a preset as a list of scenarios (at least the base)."""
    preset = PRESETS[name] if name in PRESETS else None
    if preset is None:
        preset_fields(name)
    variants = preset.variants or ({},)
    scenarios = []
    for solver in preset.solvers:
        for v in variants:
            scenarios.append(Scenario(**{**preset.fields, "solver": solver, **v, **overrides}))
    return scenarios


def run_scenario(sc, workers=1):
    """Run one scenario and return its :class:`Trajectory`."""
    h = sc.hamiltonian_matrix()
    n = h.shape[0]
    if sc.initial_site > n:
        raise ConfigError(f"system.initial_site: {sc.initial_site} out of range 1..{n}")
    if sc.trapping and sc.trap_site > n:
        raise ConfigError(f"trapping.trap_site: {sc.trap_site} out of range 1..{n}")
    bath = sc.bath(n)
    rho0 = site_state(sc.initial_site, n)
    grid = sc.time_grid()
    opts = sc.integrator()
    log.info("running %s", sc.label())
    if sc.solver == "heom":
        traj = propagate_heom(h, bath, sc.trapping_spec(), rho0, grid, depth=sc.depth,
                              opts=opts, terminator=sc.terminator, workers=workers)
    else:
        tensor = build_redfield_tensor(h, bath)
        traj = propagate_redfield(tensor, sc.trapping_spec(), rho0, grid,
                                  variant=sc.solver.split("-", 1)[1], opts=opts)
    traj.metadata.update(sc.provenance())
    return traj


def trajectory_header(sc, traj, timestamp=None):
    header = {"excitonium": _version(), **sc.provenance()}
    header.update({k: v for k, v in traj.metadata.items() if k not in header})
    if not traj.enforce_positivity:
        header["min_eigenvalue"] = repr(traj.min_eigenvalue)
    if timestamp:
        header["created"] = timestamp
    return header


def _version():
    from . import __version__

    return __version__


def run_many(scenarios, workers=None):
    """Run scenarios, in parallel when more than one worker is available.

    Results come back in input order. Each scenario is deterministic, so the
    worker count never changes the numbers.
    """
    workers = worker_count(workers)
    scenarios = list(scenarios)
    if workers == 1 or len(scenarios) == 1:
        return [run_scenario(sc, workers=workers) for sc in scenarios]
    with ThreadPoolExecutor(min(workers, len(scenarios))) as pool:
        return list(pool.map(run_scenario, scenarios))


def probe_summary(trajs, probe_times=PROBE_TIMES_FS):
    """Peak E, time of peak and E at the probe times for each trajectory."""
    rows = []
    for name, traj in trajs.items():
        t, e = traj.t(), traj.E()
        k = int(np.argmax(e))
        row = {"solver": name, "peak_E": float(e[k]), "t_peak_fs": float(t[k])}
        for p in probe_times:
            idx = np.flatnonzero(np.isclose(t, p))
            row[f"E_{p:g}fs"] = float(e[idx[0]]) if idx.size else float("nan")
        rows.append(row)
    return rows


def probe_ordering(trajs, probe_times=PROBE_TIMES_FS):
    """Solvers ranked by E (descending) at each probe time on the grid."""
    out = {}
    for p in probe_times:
        ranked = []
        for name, traj in trajs.items():
            idx = np.flatnonzero(np.isclose(traj.t(), p))
            if idx.size:
                ranked.append((float(traj.E()[idx[0]]), name))
        if len(ranked) == len(trajs):
            out[p] = [name for _, name in sorted(ranked, key=lambda x: -x[0])]
    return out


def compare(sc, solvers, workers=None):
    """Run ``sc`` under each solver; returns ``{solver: Trajectory}``."""
    solvers = list(solvers)
    if len(solvers) < 2:
        raise ConfigError("compare needs at least two solvers")
    for s in solvers:
        if s not in SOLVERS:
            raise ConfigError(f"unknown solver {s!r}; expected one of {', '.join(SOLVERS)}")
    trajs = run_many([sc.replace(solver=s) for s in solvers], workers)
    out = {}
    for s, traj in zip(solvers, trajs):
        key = s
        i = 2
        while key in out:
            key = f"{s}#{i}"
            i += 1
        out[key] = traj
    return out


def side_by_side_csv(trajs, header=None):
    names = list(trajs)
    t = trajs[names[0]].t()
    for traj in trajs.values():
        if not np.array_equal(traj.t(), t):
            raise ValueError("trajectories are on different time grids")
    n = trajs[names[0]].n_sites
    cols = ["t_fs"]
    blocks = []
    for name in names:
        traj = trajs[name]
        cols += [f"E_{name}", f"W_{name}", f"trace_{name}"]
        cols += [f"rho_{i}{i}_{name}" for i in range(1, n + 1)]
        blocks.append(np.column_stack([traj.E(), traj.W(), traj.trace(), traj.populations()]))
    lines = [f"# {k} = {v}" for k, v in (header or {}).items()]
    lines.append(",".join(cols))
    data = np.column_stack([t, *blocks])
    lines += [",".join(repr(float(x)) for x in row) for row in data]
    return "\n".join(lines) + "\n"


def summary_csv(rows):
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row[c]) if isinstance(row[c], str) else repr(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def sweep(sc, axis, values, out_dir, stem=None, workers=None, timestamp=None):
    """Run ``sc`` once per value of ``axis``; write CSVs, then a manifest.

    Returns the manifest dictionary. For a depth sweep a convergence table
    (``convergence.csv``) is written as well.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    kind = float if axis == "temperature" else int
    try:
        values = [kind(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"sweep values for {axis} must be {kind.__name__}s, got {values!r}") from None
    scenarios = [sc.replace(**{axis: v}) for v in values]
    stem = stem or f"{sc.solver}_site{sc.initial_site}_{sc.temperature:g}K"
    out_dir = Path(out_dir)
    trajs = run_many(scenarios, workers)
    manifest = {"axis": axis, "files": []}
    for v, s, traj in zip(values, scenarios, trajs):
        name = f"{stem}_{axis}-{v:g}.csv"
        write_atomic(out_dir / name, traj.to_csv(trajectory_header(s, traj, timestamp)))
        manifest["files"].append({"value": v, "file": name})
    if axis == "depth" and len(values) >= 2:
        by_depth = dict(zip(values, trajs))
        table = convergence_scan(lambda d: by_depth[d], values)
        manifest["convergence"] = table
        write_atomic(out_dir / "convergence.csv", summary_csv(table))
    write_atomic(out_dir / f"{stem}_{axis}_manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


