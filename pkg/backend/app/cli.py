"""Command-line surface: `segbuf <command> [flags]`. Exit 0 ok, 1 on check/bound failures, 2 on bad input."""
import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from app.core.errors import SegBufError
from app.core.logger import logger
from app.models.schemas import GeneratorSpec, SuiteParams, SweepSpec
from app.models.switch import SwitchConfig, Trace
from app.services.adversary import build_lower_bound_instance
from app.services.engine import serialize_decision_log, simulate
from app.services.harness import SUITES, competitive_ratio, run_suite
from app.services.instances import compute_bounds, drain_extend, parse_config, parse_trace, serialize_trace
from app.services.oracle import optimal_benefit
from app.services.policies import make_policy
from app.services.sweep import sweep, sweep_csv
from app.services.workloads import generate

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_model(model: BaseModel, out: Optional[str]) -> None:
    _emit(model.model_dump_json(indent=2) + "\n", out)


def _config(args) -> SwitchConfig:
    return parse_config(_read(args.config))


def _trace(args, config: SwitchConfig) -> Trace:
    trace = parse_trace(_read(args.trace))
    return drain_extend(config, trace) if args.drain else trace


def _values(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_simulate(args) -> int:
    config = _config(args)
    result = simulate(config, _trace(args, config), make_policy(args.policy, seed=args.seed))
    if args.log:
        Path(args.log).write_text(serialize_decision_log(result.decision_log), encoding="utf-8")
    _emit_model(result, args.out)
    return EXIT_OK


def cmd_opt(args) -> int:
    config = _config(args)
    result = optimal_benefit(
        config, _trace(args, config), max_states=args.max_states, prefer_value_index=args.prefer_value
    )
    if args.log:
        Path(args.log).write_text(serialize_decision_log(result.schedule), encoding="utf-8")
    _emit_model(result, args.out)
    return EXIT_OK


def cmd_ratio(args) -> int:
    config = _config(args)
    record = competitive_ratio(
        config, _trace(args, config), make_policy(args.policy, seed=args.seed),
        instance_id=Path(args.trace).stem, seed=args.seed, max_states=args.max_states,
        record_runtime=args.timings or None,
    )
    _emit_model(record, args.out)
    return EXIT_OK if record.bound_satisfied else EXIT_FAILED


def cmd_adversary(args) -> int:
    transcript = build_lower_bound_instance(args.values, make_policy(args.policy, seed=args.seed))
    if args.trace:
        Path(args.trace).write_text(serialize_trace(transcript.trace), encoding="utf-8")
    _emit_model(transcript, args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        kind=args.kind,
        steps=args.steps,
        arrivals_per_step_max=args.max_arrivals,
        burst_len=args.burst_len,
        burst_size=args.burst_size,
        priority_share=args.priority_share,
    )
    _emit(serialize_trace(generate(_config(args), spec, args.seed or 0)), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.model_validate_json(_read(args.spec))
    if args.max_states:
        spec = spec.model_copy(update={"max_states": args.max_states})
    report = sweep(spec, record_runtime=args.timings or None, workers=args.workers)
    _emit(sweep_csv(report.records), args.out)
    if report.skipped:
        logger.warning(f"{report.skipped} instances skipped (oracle limits)")
    return EXIT_OK if all(r.bound_satisfied for r in report.records) else EXIT_FAILED


def cmd_check(args) -> int:
    params = SuiteParams(trials=args.trials, max_states=args.max_states, workers=args.workers)
    names = SUITES if args.suite == "all" else (args.suite,)
    reports = [run_suite(name, params, args.seed or 0) for name in names]
    text = "".join(r.model_dump_json(indent=2) + "\n" for r in reports)
    _emit(text, args.out)
    for r in reports:
        status = "passed" if r.passed else f"FAILED ({len(r.failures)} failures)"
        print(f"{r.suite}: {r.instances_tested} instances, {r.skipped} skipped, {status}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_bounds(args) -> int:
    if args.values:
        config = SwitchConfig.restricted(args.values, 1)
    elif args.config:
        config = _config(args)
    else:
        raise SegBufError("bounds needs --config or --values")
    _emit_model(compute_bounds(config), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segbuf", description="Online buffering with class segregation")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, fn, help_text: str, *, instance: bool = False) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--seed", type=int, default=None)
        if instance:
            p.add_argument("--config", required=True)
            p.add_argument("--trace", required=True)
            p.add_argument("--drain", action="store_true", help="append sends until the trace is drained")
        return p

    p = command("simulate", cmd_simulate, "run a policy over a trace", instance=True)
    p.add_argument("--policy", default="greedy")
    p.add_argument("--log", help="write the decision log (JSON Lines)")

    p = command("opt", cmd_opt, "exact offline optimum", instance=True)
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--prefer-value", type=int, default=None, help="tie-break toward sending this value index")
    p.add_argument("--log", help="write the optimal schedule (JSON Lines)")

    p = command("ratio", cmd_ratio, "OPT/ALG on a drained trace", instance=True)
    p.add_argument("--policy", default="greedy")
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--timings", action="store_true")

    p = command("adversary", cmd_adversary, "lower-bound construction against a deterministic policy")
    p.add_argument("--values", type=_values, required=True, help="e.g. 1,2,4")
    p.add_argument("--policy", default="greedy")
    p.add_argument("--trace", help="also write the constructed trace (JSON Lines)")

    p = command("gen", cmd_gen, "seeded trace generator")
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=("random", "bursty", "two-valued"), default="random")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--max-arrivals", type=int, default=3)
    p.add_argument("--burst-len", type=int, default=3)
    p.add_argument("--burst-size", type=int, default=2)
    p.add_argument("--priority-share", type=float, default=0.5)

    p = command("sweep", cmd_sweep, "ratio sweep to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--timings", action="store_true", help="fill the runtime_ms column")
    p.add_argument("--workers", type=int, default=None)

    p = command("check", cmd_check, "run a check suite")
    p.add_argument("--suite", choices=SUITES + ("all",), required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)

    p = command("bounds", cmd_bounds, "r, alpha and the proven bounds of a value set")
    p.add_argument("--config")
    p.add_argument("--values", type=_values)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SegBufError, ValidationError, OSError) as e:
        print(f"segbuf {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
