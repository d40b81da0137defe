"""
qlik: quantum coin likelihood toolkit.

Subcommands:
  optimize   best measurement basis for one strategy (StrategyReport JSON)
  compare    direct vs entangled strategy table (text + JSON)
  curve      log-likelihood decay curves (CSV)
  export     A/B circuits for one strategy as OpenQASM 2.0
  decompose  two-CNOT synthesis of a two-qubit unitary (JSON)
  simulate   shot sampling with optional noise, or a CNOT-noise sweep (JSON)

Value priority: CLI flag > config file > built-in default. See
``qlikelihood.config`` for the config file search order.

Exit status: 0 ok, 1 runtime or filesystem error, 2 usage or configuration
error, 3 degenerate result under --strict.

Usage:
    qlik compare --beta 0.2 --delta 1.8 --seed 7
    qlik optimize --strategy entangled --restarts 16 -o ent.json
    qlik curve --n-max 2000 --shots-per-point 10 -o curve.csv
    qlik export --strategy entangled --output-dir circuits/
    qlik simulate --strategy entangled --shots 1000000 --sweep-2q 0 0.01 0.02 0.05 0.1
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from qlikelihood.coin import nats_to_bits, write_curve_csv
from qlikelihood.config import (
    find_config_file,
    load_toml,
    noise_model,
    optimizer_config,
    preparation_params,
    resolve_defaults,
)
from qlikelihood.discrimination import StrategyReport, unitary_from_pairs
from qlikelihood.errors import (
    ConfigurationError,
    DimensionError,
    DomainError,
    QlikelihoodError,
)
from qlikelihood.qasm import emit_qasm
from qlikelihood.study import (
    compare_strategies,
    likelihood_decay,
    noise_sweep,
    optimize_strategy,
    run_metadata,
    simulate_strategy,
    strategy_circuits,
)
from qlikelihood.synthesis import cnot_count, decompose_two_qubit, makhlin_invariants

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3

_RUN_KEYS = ("beta", "delta")
_OPT_KEYS = (
    "step_size", "cooling", "iterations", "restarts", "tolerance", "grid_points",
    "stall_window", "workers", "polish", "search_group", "allow_infinite",
)
_NOISE_KEYS = ("depolarizing_1q", "depolarizing_2q", "readout_flip")


def _status(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _echo(args: argparse.Namespace, keys: tuple[str, ...]) -> dict:
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
        _status(f"[OK]  Written to {path}")
    else:
        sys.stdout.write(text)


def _qasm_comments(meta: dict, state: str) -> list[str]:
    return [
        f"tool: {meta['tool']} {meta['version']}",
        f"command: {meta['command']}",
        f"state: {state}",
        f"params: {json.dumps(meta['params'], sort_keys=True)}",
        f"seed: {meta['seed']}",
    ]


def _finish(reports: Iterable[StrategyReport], strict: bool) -> int:
    reports = list(reports)
    if any(r.unbounded for r in reports):
        _status("[warn] Unbounded result: rho_B is pure, so some basis gives an infinite S_rel.")
    if any(r.degenerate for r in reports):
        _status("[warn] Degenerate result: the states are indistinguishable (S_rel = 0).")
        if strict:
            return EXIT_DEGENERATE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_optimize(args: argparse.Namespace, seed: int) -> int:
    params = preparation_params(args)
    cfg = optimizer_config(args, seed)
    _status(f"[1/1] Optimizing {args.strategy} strategy (beta={params.beta}, delta={params.delta}) ...")
    report = optimize_strategy(params, args.strategy, cfg)

    summary = (
        f"S_rel ({args.strategy}): {report.s_rel:.10f} nats/qubit"
        f" = {nats_to_bits(report.s_rel):.10f} bits/qubit"
    )
    meta = run_metadata("optimize", _echo(args, ("strategy", *_RUN_KEYS, *_OPT_KEYS)), seed)
    _write_json(args.output, {"metadata": meta, **report.to_dict()})
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return _finish([report], args.strict)


def cmd_compare(args: argparse.Namespace, seed: int) -> int:
    params = preparation_params(args)
    cfg = optimizer_config(args, seed)
    _status("[1/1] Optimizing direct and entangled strategies ...")
    comparison = compare_strategies(params, cfg)

    print(f"  {'CONVENTION':<16}  {'DIR':>12}  {'ENT':>12}  {'DIFF':>12}")
    print(f"  {'-' * 16}  {'-' * 12}  {'-' * 12}  {'-' * 12}")
    for name, row in comparison.table().items():
        print(f"  {name:<16}  {row['direct']:>12.6f}  {row['entangled']:>12.6f}  {row['diff']:>12.6f}")
    matches = [k for k, ok in comparison.to_dict()["reference_convention_matches"].items() if ok]
    print(f"\n  Reference Theory row reproduced by: {', '.join(matches) or 'none'}\n")

    if args.output:
        meta = run_metadata("compare", _echo(args, (*_RUN_KEYS, *_OPT_KEYS)), seed)
        _write_json(args.output, {"metadata": meta, **comparison.to_dict()})
    return _finish([comparison.direct, comparison.entangled], args.strict)


def cmd_curve(args: argparse.Namespace, seed: int) -> int:
    params = preparation_params(args)
    cfg = optimizer_config(args, seed)
    strategies = ("direct", "entangled") if args.curve_strategy == "both" else (args.curve_strategy,)
    _status(f"[1/2] Simulating {args.shots_per_point} record(s) of {args.n_max} qubits per strategy ...")
    curves = likelihood_decay(
        params, strategies, int(args.n_max), int(args.shots_per_point), noise_model(args), seed, cfg,
    )

    _status(f"[2/2] Writing {args.output} ...")
    echo = _echo(args, (*_RUN_KEYS, "n_max", "shots_per_point", *_NOISE_KEYS, *_OPT_KEYS))
    echo["strategy"] = args.curve_strategy
    write_curve_csv(args.output, curves.csv_columns(), metadata=run_metadata("curve", echo, seed))
    for strategy, fit in curves.slopes.items():
        expected = -curves.reports[strategy].s_rel
        print(f"  slope {strategy:<9}  {fit.slope:+.6f} +/- {fit.stderr:.6f}  (expected {expected:+.6f})")
    _status(f"[OK]  Written to {args.output}")
    return _finish(curves.reports.values(), args.strict)


def cmd_export(args: argparse.Namespace, seed: int) -> int:
    params = preparation_params(args)
    cfg = optimizer_config(args, seed)
    _status(f"[1/2] Optimizing {args.strategy} strategy ...")
    circuits = strategy_circuits(params, args.strategy, cfg)
    meta = run_metadata("export", _echo(args, ("strategy", *_RUN_KEYS, *_OPT_KEYS)), seed)

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _status(f"[2/2] Writing circuits to {out_dir} ...")
    for state, circuit in (("A", circuits.circuit_a), ("B", circuits.circuit_b)):
        path = out_dir / f"{args.prefix}_{args.strategy}_{state}.qasm"
        path.write_text(emit_qasm(circuit.with_comments(_qasm_comments(meta, state))), encoding="utf-8")
        print(f"  {path}  ({circuit.count('cx')} CNOT, {circuit.count('u3')} u3)")
    _status("[OK]  Export complete")
    return _finish([circuits.report], args.strict)


def _read_unitary(path: str) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rows = data["unitary"] if isinstance(data, dict) else data
        return unitary_from_pairs(rows)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"{path}: 'unitary' must be rows of [re, im] pairs") from e


def cmd_decompose(args: argparse.Namespace, seed: int) -> int:
    if args.unitary:
        _status(f"[1/2] Reading unitary from {args.unitary} ...")
        u = _read_unitary(args.unitary)
        echo = {"unitary": args.unitary}
    else:
        params = preparation_params(args)
        _status("[1/2] Optimizing entangled strategy for its measurement unitary ...")
        u = optimize_strategy(params, "entangled", optimizer_config(args, seed)).basis.matrix
        echo = _echo(args, (*_RUN_KEYS, *_OPT_KEYS))

    _status("[2/2] Decomposing ...")
    inv = makhlin_invariants(u)
    result = decompose_two_qubit(u)
    payload = {
        "metadata": run_metadata("decompose", echo, seed),
        "cnot_count": cnot_count(u),
        "invariants": {"g1": [inv.g1.real, inv.g1.imag], "g2": inv.g2},
        **result.to_dict(),
    }
    _write_json(args.output, payload)
    print(f"  residual {result.residual:.3g}, global phase {result.global_phase:+.12f}",
          file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, seed: int) -> int:
    params = preparation_params(args)
    cfg = optimizer_config(args, seed)
    noise = noise_model(args)
    echo = _echo(args, ("strategy", *_RUN_KEYS, "shots", *_NOISE_KEYS, *_OPT_KEYS))

    if args.sweep_2q:
        echo["sweep_2q"] = list(args.sweep_2q)
        _status(f"[1/1] Sweeping depolarizing_2q over {args.sweep_2q} at {args.shots} shots ...")
        points = noise_sweep(
            params, args.sweep_2q, int(args.shots), noise, seed, int(args.workers), args.strategy, cfg,
        )
        print(f"  {'DEPOL_2Q':>9}  {'ESTIMATE':>12}  {'EXACT':>12}")
        for pt in points:
            print(f"  {pt.depolarizing_2q:>9.4f}  {pt.estimate_per_qubit:>12.6f}  {pt.exact_per_qubit:>12.6f}")
        if args.output:
            rows = [
                {"depolarizing_2q": pt.depolarizing_2q,
                 "s_rel_estimate_nats_per_qubit": pt.estimate_per_qubit,
                 "s_rel_exact_nats_per_qubit": pt.exact_per_qubit}
                for pt in points
            ]
            _write_json(args.output, {"metadata": run_metadata("simulate", echo, seed), "sweep": rows})
        return EXIT_OK

    _status(f"[1/2] Optimizing {args.strategy} strategy ...")
    circuits = strategy_circuits(params, args.strategy, cfg)
    _status(f"[2/2] Sampling {args.shots} shots per state ...")
    sim = simulate_strategy(circuits, int(args.shots), noise, seed, int(args.workers))
    print(f"  S_rel estimate {sim.estimate_per_qubit:.6f}, analytic {sim.analytic_per_qubit:.6f} nats/qubit",
          file=sys.stdout if args.output else sys.stderr)
    _write_json(args.output, {"metadata": run_metadata("simulate", echo, seed), **sim.to_dict()})
    return _finish([circuits.report], args.strict)


COMMANDS = {
    "optimize": cmd_optimize,
    "compare": cmd_compare,
    "curve": cmd_curve,
    "export": cmd_export,
    "decompose": cmd_decompose,
    "simulate": cmd_simulate,
}


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def _run_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="FILE",
                   help="Path to a TOML config file (overrides auto-discovery).")
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr.")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: drawn from OS entropy and printed).")
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="Exit with status 3 on a degenerate (S_rel = 0) result.")
    return p


def _prep_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("state preparation")
    g.add_argument("--beta", type=float, default=None, help="Purity angle of rho_A, in [0, pi].")
    g.add_argument("--delta", type=float, default=None, help="Rotation of rho_B from rho_A, in [0, pi].")
    return p


def _opt_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("optimizer")
    g.add_argument("--step-size", type=float, default=None, help="Initial walk step (Frobenius norm).")
    g.add_argument("--cooling", type=float, default=None, help="Step multiplier after a stall, in (0, 1].")
    g.add_argument("--iterations", type=int, default=None, help="Proposals per restart.")
    g.add_argument("--restarts", type=int, default=None, help="Independent seeded walks.")
    g.add_argument("--tolerance", type=float, default=None, help="Golden-section xtol and step floor.")
    g.add_argument("--grid-points", type=int, default=None, help="Direct-strategy grid size.")
    g.add_argument("--stall-window", type=int, default=None, help="Rejections before cooling.")
    g.add_argument("--workers", type=int, default=None, help="Parallel restarts / sampling workers.")
    g.add_argument("--no-polish", dest="polish", action="store_const", const=False, default=None,
                   help="Skip the local polish of the walk result.")
    g.add_argument("--search-group", choices=["SO4", "SU4"], default=None,
                   help="Group searched by the entangled walk.")
    g.add_argument("--allow-infinite", action="store_const", const=True, default=None,
                   help="Accept bases with an infinite divergence.")
    return p


def _noise_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("noise")
    g.add_argument("--depolarizing-1q", type=float, default=None, help="Depolarizing probability per u3.")
    g.add_argument("--depolarizing-2q", type=float, default=None, help="Depolarizing probability per CNOT.")
    g.add_argument("--readout-flip", type=float, default=None, help="Bit-flip probability per measured bit.")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qlik",
        description="Relative-entropy discrimination of quantum coins: direct vs entangled measurement.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    run, prep, opt, noise = _run_parent(), _prep_parent(), _opt_parent(), _noise_parent()
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    strategy_kw = dict(choices=["direct", "entangled"], default=None, help="Measurement strategy.")

    s = sub.add_parser("optimize", parents=[run, prep, opt], help="Optimize one strategy.")
    s.add_argument("--strategy", **strategy_kw)
    s.add_argument("-o", "--output", metavar="FILE", help="Write the report JSON to FILE (default: stdout).")

    s = sub.add_parser("compare", parents=[run, prep, opt], help="Compare both strategies.")
    s.add_argument("-o", "--output", metavar="FILE", help="Also write the comparison JSON to FILE.")

    s = sub.add_parser("curve", parents=[run, prep, opt, noise], help="Likelihood decay curves.")
    s.add_argument("--strategy", dest="curve_strategy", choices=["direct", "entangled", "both"],
                   default="both", help="Curves to compute (default: both).")
    s.add_argument("--n-max", type=int, default=None, help="Largest number of measured qubits N.")
    s.add_argument("--shots-per-point", type=int, default=None,
                   help="Independent measurement records averaged per N.")
    s.add_argument("-o", "--output", metavar="FILE", required=True, help="CSV output path.")

    s = sub.add_parser("export", parents=[run, prep, opt], help="Write A/B circuits as OpenQASM.")
    s.add_argument("--strategy", **strategy_kw)
    s.add_argument("--output-dir", metavar="DIR", default=".", help="Directory for the .qasm files.")
    s.add_argument("--prefix", default="qlik", help="File name prefix (default: qlik).")

    s = sub.add_parser("decompose", parents=[run, prep, opt], help="Two-CNOT synthesis of a unitary.")
    s.add_argument("--unitary", metavar="FILE",
                   help="JSON file with a 4x4 'unitary' as rows of [re, im] pairs "
                        "(default: the optimal entangled basis for --beta/--delta).")
    s.add_argument("-o", "--output", metavar="FILE", help="Write the decomposition JSON to FILE.")

    s = sub.add_parser("simulate", parents=[run, prep, opt, noise], help="Sample shots from the circuits.")
    s.add_argument("--strategy", **strategy_kw)
    s.add_argument("--shots", type=int, default=None, help="Shots per state.")
    s.add_argument("--sweep-2q", type=float, nargs="+", metavar="P",
                   help="Run a noise sweep over these CNOT depolarizing probabilities.")
    s.add_argument("-o", "--output", metavar="FILE", help="Write counts / sweep JSON to FILE.")

    return p


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("qlikelihood")
    if not verbose:
        return
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("[debug] %(name)s: %(message)s"))
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        if seed < 0:
            raise ConfigurationError("--seed must be >= 0")
        return seed
    seed = int(np.random.SeedSequence().entropy)
    _status(f"[seed] No seed given; using {seed}")
    return seed


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config_path = find_config_file(args.config)
        config = load_toml(config_path) if config_path else {}
        if config_path:
            _status(f"[cfg]  Using config: {config_path}")
        args = resolve_defaults(args, config)
        seed = _resolve_seed(args.seed)
        return COMMANDS[args.command](args, seed)
    except (ConfigurationError, DomainError, DimensionError) as e:
        _status(f"[ERROR] {e}")
        return EXIT_USAGE
    except OSError as e:
        _status(f"[ERROR] {e}")
        return EXIT_RUNTIME
    except QlikelihoodError as e:
        _status(f"[ERROR] {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
