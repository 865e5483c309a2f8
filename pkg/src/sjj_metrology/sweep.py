"""Grid sweeps over probes, particle number, loss and nonlinearity, written as CSV.

A config is one JSON document::

    {
      "N": {"start": 10, "stop": 100, "step": 10},
      "eta": [0.95],
      "k": [1, 3],
      "Lambda": [2.1],
      "probes": ["sjj", "noon", "interferometric", "ideal"],
      "methods": ["bound", "analytic"],
      "out": "fig2.csv",
      "seed": 0,
      "jobs": 4
    }

Grid axes accept ``{start, stop, step}`` (stop inclusive), a list, or a scalar.
``Lambda`` only applies to the ``sjj`` probe.  Combinations a method cannot
evaluate (``analytic`` on an SJJ state, ``bound`` on a reference limit) are
skipped rather than reported as errors.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, _accel
from .errors import DomainError, NumericalError
from .fock_core import LossChannel
from .limits import ideal_limit, interferometric_limits, noon_limits
from .optimizer import OptimizerConfig, optimize_probe
from .qfi import DEFAULT_EXACT_CAP, qfi_exact, qfi_upper_bound
from .sjj_model import SjjParams, binomial_state, build_hamiltonian, ground_state, noon_state

STATE_PROBES = ("sjj", "noon", "binomial", "os")
REFERENCE_PROBES = ("ideal", "interferometric")
PROBES = STATE_PROBES + REFERENCE_PROBES
METHODS = ("bound", "exact", "analytic")
ANALYTIC_PROBES = ("noon",) + REFERENCE_PROBES
COLUMNS = ("probe", "N", "Lambda", "eta", "k", "method", "fisher", "delta_phi", "wall_ms")
ERROR_MARK = "ERROR"


def expand_axis(spec, name: str) -> list:
    """Turn ``{start, stop, step}``, a list or a scalar into a sorted list of values."""
    if isinstance(spec, dict):
        try:
            start, stop, step = spec["start"], spec["stop"], spec["step"]
        except KeyError as exc:
            raise DomainError(f"{name}: range needs start, stop and step") from exc
        if not step > 0:
            raise DomainError(f"{name}: step must be positive")
        if stop < start:
            return []
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(count)]
        if all(isinstance(v, int) for v in (start, stop, step)):
            return values
        # trim representation noise so 0.3 + 7 * 0.1 prints as 1.0
        return [round(v, 12) for v in values]
    if isinstance(spec, (list, tuple)):
        return list(spec)
    return [spec]


@dataclass(frozen=True)
class SweepConfig:
    N: tuple
    eta: tuple
    k: tuple
    probes: tuple
    methods: tuple
    Lambda: tuple = ()
    out: str = "sweep.csv"
    seed: int = 0
    jobs: int | None = None
    exact_cap: int = DEFAULT_EXACT_CAP
    optimizer_starts: int = OptimizerConfig.starts
    timing: bool = False
    gnuplot: bool = False

    def __post_init__(self):
        for name in ("N", "eta", "k", "probes", "methods"):
            if not getattr(self, name):
                raise DomainError(f"sweep grid axis {name!r} is empty")
        for n in self.N:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise DomainError(f"N values must be positive integers, got {n!r}")
        for k in self.k:
            if isinstance(k, bool) or int(k) != k or k < 1:
                raise DomainError(f"k values must be positive integers, got {k!r}")
        for eta in self.eta:
            if not 0.0 < eta <= 1.0:
                raise DomainError(f"eta values must lie in (0, 1], got {eta!r}")
        for L in self.Lambda:
            if not (math.isfinite(L) and L >= 0.0):
                raise DomainError(f"Lambda values must be finite and >= 0, got {L!r}")
        bad = [p for p in self.probes if p not in PROBES]
        if bad:
            raise DomainError(f"unknown probes {bad}; choose from {list(PROBES)}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise DomainError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if "sjj" in self.probes and not self.Lambda:
            raise DomainError("probe 'sjj' needs a non-empty Lambda axis")
        if "exact" in self.methods and any(p in STATE_PROBES for p in self.probes):
            too_big = [n for n in self.N if n > self.exact_cap]
            if too_big:
                raise DomainError(f"method 'exact' requested for N={too_big} above the cap {self.exact_cap}")
        if self.jobs is not None and self.jobs < 1:
            raise DomainError("jobs must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> "SweepConfig":
        doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        for axis in ("N", "eta", "k", "Lambda", "probes", "methods"):
            if axis in kwargs:
                kwargs[axis] = tuple(expand_axis(kwargs[axis], axis))
        for axis in ("N", "k"):
            if axis in kwargs:
                kwargs[axis] = tuple(int(v) if isinstance(v, float) and v.is_integer() else v for v in kwargs[axis])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise DomainError(f"invalid sweep config: {exc}") from exc

    @classmethod
    def load(cls, path, **overrides) -> "SweepConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise DomainError(f"{path}: top level must be an object")
        return cls.from_dict(doc, **overrides)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (output settings excluded)."""
        doc = asdict(self)
        for key in ("out", "jobs", "timing", "gnuplot"):
            doc.pop(key)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SweepRow:
    probe: str
    N: int
    Lambda: float | None
    eta: float
    k: int
    method: str
    fisher: float | None
    delta_phi: float | None
    wall_ms: float | None = None
    error: str | None = None

    def sort_key(self):
        lam = -math.inf if self.Lambda is None else self.Lambda
        return (self.probe, self.N, lam, self.eta, self.k, self.method)

    def as_record(self) -> list[str]:
        def num(v):
            return "" if v is None else format(v, ".17g")

        if self.error is not None:
            fisher, dphi = f"{ERROR_MARK}:{self.error}", ""
        else:
            fisher, dphi = num(self.fisher), num(self.delta_phi)
        return [
            self.probe,
            str(self.N),
            "" if self.Lambda is None else repr(float(self.Lambda)),
            repr(float(self.eta)),
            str(self.k),
            self.method,
            fisher,
            dphi,
            num(self.wall_ms),
        ]


@dataclass(frozen=True)
class _Task:
    probe: str
    N: int
    Lambda: float | None
    eta: float
    k: int
    methods: tuple
    seed: int
    starts: int
    timing: bool


def _applicable(probe: str, method: str) -> bool:
    if method == "analytic":
        return probe in ANALYTIC_PROBES
    return probe in STATE_PROBES


def build_tasks(config: SweepConfig) -> list[_Task]:
    tasks = []
    for probe in config.probes:
        methods = tuple(m for m in config.methods if _applicable(probe, m))
        if not methods:
            continue
        lambdas = [float(L) for L in config.Lambda] if probe == "sjj" else [None]
        for N in config.N:
            for L in lambdas:
                for eta in config.eta:
                    for k in config.k:
                        tasks.append(
                            _Task(probe, int(N), L, float(eta), int(k), methods, config.seed, config.optimizer_starts, config.timing)
                        )
    return tasks


def _probe_state(task: _Task, channel: LossChannel):
    if task.probe == "sjj":
        state, _ = ground_state(build_hamiltonian(SjjParams(task.N, task.Lambda)))
        return state
    if task.probe == "noon":
        return noon_state(task.N)
    if task.probe == "binomial":
        return binomial_state(task.N)
    config = OptimizerConfig(starts=task.starts, seed=task.seed)
    return optimize_probe(task.N, task.k, channel, config).state


def _analytic(task: _Task) -> float:
    if task.probe == "noon":
        fisher, _ = noon_limits(task.N, task.k, task.eta)
        return fisher
    if task.probe == "ideal":
        dphi = ideal_limit(task.N, task.k)
    else:
        dphi = interferometric_limits(task.N, task.k, task.eta).scaled
    return dphi**-2


def evaluate_task(task: _Task) -> list[SweepRow]:
    """Rows for one grid point; failures become error rows instead of raising."""
    channel = LossChannel.symmetric(task.eta)
    rows = []
    state = None
    state_error = None
    for method in task.methods:
        t0 = time.perf_counter()
        try:
            if method == "analytic":
                fisher = _analytic(task)
            else:
                if state is None and state_error is None:
                    try:
                        state = _probe_state(task, channel)
                    except (DomainError, NumericalError) as exc:
                        state_error = exc
                if state_error is not None:
                    raise state_error
                if method == "bound":
                    fisher = qfi_upper_bound(state, channel, task.k).value
                else:
                    fisher = qfi_exact(state, channel, task.k).value
            if not math.isfinite(fisher) or fisher < 0.0:
                raise NumericalError(f"Fisher information {fisher!r} is not a valid value", {})
        except (DomainError, NumericalError, ArithmeticError) as exc:
            rows.append(SweepRow(task.probe, task.N, task.Lambda, task.eta, task.k, method, None, None, None, type(exc).__name__))
            continue
        wall = (time.perf_counter() - t0) * 1e3 if task.timing else None
        dphi = math.inf if fisher == 0.0 else 1.0 / math.sqrt(fisher)
        rows.append(SweepRow(task.probe, task.N, task.Lambda, task.eta, task.k, method, fisher, dphi, wall))
    return rows


@dataclass
class SweepResult:
    rows: list
    csv_path: Path
    meta_path: Path
    failures: int = 0
    extra_files: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def gnuplot_script(csv_path: Path, config: SweepConfig) -> str:
    x_axis = "eta" if len(config.eta) > 1 and len(config.N) == 1 else "N"
    col = COLUMNS.index(x_axis) + 1
    lines = [
        "set datafile separator ','",
        "set key outside",
        "set logscale y",
        f"set xlabel '{x_axis}'",
        "set ylabel 'delta phi min'",
        "plot \\",
    ]
    plots = []
    for probe in config.probes:
        for k in config.k:
            cond = f'(strcol(1) eq "{probe}" && $5 == {k} ? ${col} : 1/0)'
            plots.append(f"  '{csv_path.name}' using {cond}:8 skip 1 with linespoints title '{probe} k={k}'")
    lines.append(", \\\n".join(plots))
    return "\n".join(lines) + "\n"


def run_sweep(config: SweepConfig, out=None, jobs=None) -> SweepResult:
    """Evaluate the whole grid and write the CSV plus a JSON metadata sidecar.

    Tasks run on a process pool of ``jobs`` workers (default: logical cores);
    the output is sorted before writing, so it does not depend on ``jobs``.
    """
    out = Path(out or config.out)
    jobs = jobs or config.jobs or os.cpu_count() or 1
    tasks = build_tasks(config)
    if not tasks:
        raise DomainError("no probe/method combination in the config can be evaluated")
    if jobs == 1 or len(tasks) == 1:
        chunks = [evaluate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            chunks = list(pool.map(evaluate_task, tasks))
    rows = sorted((r for chunk in chunks for r in chunk), key=SweepRow.sort_key)
    failures = sum(r.error is not None for r in rows)
    atomic_write(out, render_csv(rows))
    meta = {
        "config_hash": config.digest(),
        "seed": config.seed,
        "version": __version__,
        "backend": _accel.backend_name(),
        "optimizer_objective": "bound",
        "rows": len(rows),
        "failures": failures,
        "config": asdict(config),
    }
    meta_path = out.with_name(out.name + ".meta.json")
    atomic_write(meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    result = SweepResult(rows, out, meta_path, failures)
    if config.gnuplot:
        gp = out.with_suffix(".gp")
        atomic_write(gp, gnuplot_script(out, config))
        result.extra_files.append(gp)
    return result


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
