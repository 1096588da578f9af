"""Trajectories of the physical density matrix and their CSV form."""

import io
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .entanglement import entanglement_report
from .hamiltonian import InvalidStateError, validate_state

# Slack used when checking propagated states; integration noise and
# hierarchy truncation leave small negative eigenvalues.
HERMITICITY_SLACK = 1e-6
EIGENVALUE_SLACK = 1e-6
TRACE_SLACK = 1e-6


class StateValidityError(RuntimeError):
    """A propagated state left the physical region; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


def check_propagated(t, rho, positivity=True):
    diag = validate_state(rho)
    try:
        diag.check(tol=EIGENVALUE_SLACK if positivity else float("inf"),
                   herm_tol=HERMITICITY_SLACK)
    except InvalidStateError as exc:
        raise StateValidityError(
            f"t = {t:g} fs: {exc}; increase hierarchy depth or reduce the time step"
        ) from None
    return diag


def csv_columns(n_sites):
    pairs = [(i, j) for i in range(1, n_sites + 1) for j in range(i + 1, n_sites + 1)]
    cols = ["t_fs", "trace", "E", "W"]
    cols += [f"rho_{i}{i}" if n_sites < 10 else f"rho_{i}_{i}" for i in range(1, n_sites + 1)]
    sep = "" if n_sites < 10 else "_"
    for i, j in pairs:
        cols += [f"re_rho_{i}{sep}{j}", f"im_rho_{i}{sep}{j}"]
    cols += [f"C_{i}{sep}{j}" for i, j in pairs]
    return cols


@dataclass
class Trajectory:
    solver: str
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    status: str = "ok"
    # False: negative eigenvalues are recorded in ``min_eigenvalue`` and
    # clamped in the entropies instead of aborting (non-positive generators).
    enforce_positivity: bool = True
    min_eigenvalue: float = float("inf")

    def append(self, t, rho, validate=True):
        if validate:
            diag = check_propagated(t, rho, self.enforce_positivity)
            self.min_eigenvalue = min(self.min_eigenvalue, diag.min_eigenvalue)
        rho = 0.5 * (rho + rho.conj().T)
        slack = EIGENVALUE_SLACK if self.enforce_positivity else float("inf")
        self.times.append(float(t))
        self.states.append(rho)
        self.reports.append(entanglement_report(rho, slack=slack))

    @property
    def n_sites(self):
        return self.states[0].shape[0]

    def t(self):
        return np.array(self.times)

    def E(self):
        return np.array([r.global_E for r in self.reports])

    def W(self):
        return np.array([r.witness_W for r in self.reports])

    def trace(self):
        return np.array([r.trace for r in self.reports])

    def trapped(self):
        """Population lost to the trap (the ground state is not represented)."""
        return 1.0 - self.trace()

    def populations(self):
        return np.array([np.diag(s).real for s in self.states])

    def concurrence(self, i, j):
        return np.array([r.pairwise[i - 1, j - 1] for r in self.reports])

    def column(self, name):
        idx = csv_columns(self.n_sites).index(name)
        return np.array([row[idx] for row in self.rows()])

    def rows(self):
        n = self.n_sites
        iu = np.triu_indices(n, 1)
        for t, rho, rep in zip(self.times, self.states, self.reports):
            off = rho[iu]
            reim = np.empty(2 * off.size)
            reim[0::2] = off.real
            reim[1::2] = off.imag
            yield [t, rep.trace, rep.global_E, rep.witness_W,
                   *np.diag(rho).real, *reim, *rep.pairwise[iu]]

    def to_csv(self, header=None):
        """Render as CSV text; ``header`` lines are emitted as ``# key = value``."""
        buf = io.StringIO()
        meta = dict(header or {})
        meta.setdefault("solver", self.solver)
        meta["status"] = self.status
        for key, value in meta.items():
            buf.write(f"# {key} = {value}\n")
        buf.write(",".join(csv_columns(self.n_sites)) + "\n")
        for row in self.rows():
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path):
    """Parse a trajectory CSV into ``(metadata, columns, data)``."""
    meta = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    return meta, columns, np.array(rows).reshape(len(rows), len(columns or []))
