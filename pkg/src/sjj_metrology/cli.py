"""Command-line entry point: ``sjj-metrology {ground,qfi,sweep,limits,optimize}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 sweep finished
with some failed grid points.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__, _accel
from .errors import DomainError, NumericalError
from .fock_core import LossChannel
from .limits import ideal_limit, interferometric_limits, limits_table, noon_limits
from .optimizer import OptimizerConfig, optimize_probe
from .qfi import DEFAULT_EXACT_CAP, qfi_exact, qfi_upper_bound
from .sjj_model import SjjParams, TwoModeState, binomial_state, build_hamiltonian, catness, noon_state, solve_ground
from .sweep import COLUMNS, SweepConfig, SweepRow, atomic_write, render_csv, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

log = logging.getLogger("sjj_metrology")


def _channel(args) -> LossChannel:
    eta = 1.0 if args.eta is None else args.eta
    return LossChannel.symmetric(eta)


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def cmd_ground(args) -> int:
    if args.n is None or args.Lambda is None:
        raise DomainError("ground needs --n and --lambda")
    sol = solve_ground(build_hamiltonian(SjjParams(args.n, args.Lambda)))
    if args.out:
        atomic_write(args.out, json.dumps(sol.state.to_json(), indent=1) + "\n")
    print(f"energy {_fmt(sol.energy)}")
    print(f"catness {_fmt(catness(sol.state))}")
    if sol.degenerate:
        log.warning("ground state is numerically degenerate with the odd-parity sector")
    return EXIT_OK


def _load_probe(args) -> tuple[str, TwoModeState | None]:
    if args.state:
        return "state", TwoModeState.load(args.state)
    if args.n is None:
        raise DomainError("give --state FILE or --probe with --n")
    probe = args.probe or ("sjj" if args.Lambda is not None else "noon")
    if probe == "sjj":
        if args.Lambda is None:
            raise DomainError("probe 'sjj' needs --lambda")
        return probe, solve_ground(build_hamiltonian(SjjParams(args.n, args.Lambda))).state
    if probe == "noon":
        return probe, noon_state(args.n)
    if probe == "binomial":
        return probe, binomial_state(args.n)
    if probe in ("ideal", "interferometric"):
        return probe, None
    raise DomainError(f"unknown probe {probe!r}")


def cmd_qfi(args) -> int:
    probe, state = _load_probe(args)
    channel = _channel(args)
    k = args.k
    method = args.method or "bound"
    N = state.N if state is not None else args.n
    if method == "analytic":
        if probe == "noon":
            fisher, _ = noon_limits(N, k, channel.eta_a)
        elif probe == "ideal":
            fisher = ideal_limit(N, k) ** -2
        elif probe == "interferometric":
            fisher = interferometric_limits(N, k, channel.eta_a).scaled ** -2
        else:
            raise DomainError("method 'analytic' is only available for the noon and reference probes")
    elif state is None:
        raise DomainError(f"probe {probe!r} has only an analytic value")
    elif method == "bound":
        fisher = qfi_upper_bound(state, channel, k).value
    elif method == "exact":
        fisher = qfi_exact(state, channel, k, phi=args.phi, cap=DEFAULT_EXACT_CAP).value
    else:
        raise DomainError(f"unknown method {method!r}")
    dphi = math.inf if fisher == 0.0 else 1.0 / math.sqrt(fisher)
    lam = args.Lambda if probe == "sjj" else None
    row = SweepRow(probe, N, lam, channel.eta_a, k, method, fisher, dphi)
    if args.out:
        path = Path(args.out)
        if args.append and path.exists():
            with open(path, "a", newline="") as fh:
                fh.write(render_csv([row]).split("\n", 1)[1])
        else:
            atomic_write(path, render_csv([row]))
    print(",".join(COLUMNS))
    print(",".join(row.as_record()))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config:
        raise DomainError("sweep needs --config FILE")
    config = SweepConfig.load(args.config, seed=args.seed, timing=args.timing or None)
    result = run_sweep(config, out=args.out, jobs=args.jobs)
    print(f"wrote {len(result.rows)} rows to {result.csv_path}")
    if not result.ok:
        print(f"{result.failures} grid point(s) failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_limits(args) -> int:
    if args.n is None:
        raise DomainError("limits needs --n")
    eta = 1.0 if args.eta is None else args.eta
    table = limits_table(args.n, args.k, eta, gamma=args.gamma)
    width = max(len(key) for key in table)
    for key, value in table.items():
        print(f"{key:<{width}}  {_fmt(value)}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.n is None:
        raise DomainError("optimize needs --n")
    config = OptimizerConfig(
        starts=args.starts,
        seed=args.seed if args.seed is not None else 0,
        objective=args.objective,
    )
    result = optimize_probe(args.n, args.k, _channel(args), config)
    if args.out:
        atomic_write(args.out, json.dumps(result.state.to_json(), indent=1) + "\n")
    print(f"fisher {_fmt(result.estimate.value)}")
    print(f"delta_phi {_fmt(result.estimate.delta_phi_min)}")
    print(f"objective {config.objective}")
    print(f"converged {result.converged}")
    print(f"best_start {result.best_start}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="total particle number N")
    common.add_argument("--lambda", dest="Lambda", type=float, help="SJJ interaction parameter")
    common.add_argument("--eta", type=float, help="transmissivity of both arms (default 1)")
    common.add_argument("--k", type=int, default=1, help="nonlinearity order of the phase generator n^k")
    common.add_argument("--method", choices=("bound", "exact", "analytic"))
    common.add_argument("--phi", type=float, default=0.0, help="phase at which the exact QFI is evaluated")
    common.add_argument("--out", help="output file")
    common.add_argument("--config", help="JSON sweep config")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sjj-metrology", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_accel.backend_name()})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground", parents=[common], help="SJJ ground state; prints energy and cat-ness")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("qfi", parents=[common], help="QFI of one probe")
    p.add_argument("--probe", choices=("sjj", "noon", "binomial", "ideal", "interferometric"))
    p.add_argument("--state", help="JSON state document")
    p.add_argument("--append", action="store_true", help="append the row to --out instead of replacing it")
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("sweep", parents=[common], help="evaluate a grid from --config")
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column (output is then not reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limits", parents=[common], help="closed-form limits for N, k, eta")
    p.add_argument("--gamma", type=float, help="one-body loss rate (1/s) for the critical time")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("optimize", parents=[common], help="optimise the probe for N, k, eta")
    p.add_argument("--starts", type=int, default=OptimizerConfig.starts)
    p.add_argument("--objective", choices=("bound", "exact"), default="bound")
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=str), file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
