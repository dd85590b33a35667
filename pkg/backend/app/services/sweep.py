"""Parameter sweeps: one ratio row per (instance, policy), plus fixtures and per-cell summaries."""
import csv
import io
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import AdversaryError, OracleLimitError, SuiteError
from app.core.logger import activity_logger
from app.models.schemas import RatioRecord, SweepCell, SweepReport, SweepSpec
from app.services.adversary import build_lower_bound_instance
from app.services.harness import competitive_ratio, fan_out
from app.services.policies import make_policy
from app.services.workloads import generate, tight_two_valued_trace

CSV_COLUMNS = (
    "spec_id",
    "seed",
    "policy",
    "alg_benefit",
    "opt_benefit",
    "ratio_num",
    "ratio_den",
    "ratio_dec",
    "bound_num",
    "bound_den",
    "satisfied",
    "slack_num",
    "slack_den",
    "states_explored",
    "runtime_ms",
)

_SIX_PLACES = Decimal("0.000001")


def _check_spec(spec: SweepSpec) -> None:
    if not spec.cells:
        raise SuiteError("sweep spec has no cells")
    for i, cell in enumerate(spec.cells):
        try:
            config = cell.config()
        except ValidationError as e:
            raise SuiteError(f"cells[{i}]: {e.errors()[0]['msg']}") from None
        if not cell.policies:
            raise SuiteError(f"cells[{i}].policies: at least one policy is required")
        for name in cell.policies:
            if name.startswith("replay:"):
                raise SuiteError(f"cells[{i}].policies: replay policies have no schedule for generated traces")
            make_policy(name)
        if cell.generator.kind == "two-valued" and (config.m != 2 or not config.is_restricted):
            raise SuiteError(f"cells[{i}].generator: two-valued traces need a restricted cell with two values")


def _run_seed(args: Tuple[int, SweepCell, int, Optional[int], bool]) -> Tuple[List[RatioRecord], int]:
    index, cell, seed, max_states, record_runtime = args
    config = cell.config()
    trace = generate(config, cell.generator, seed)
    rows: List[RatioRecord] = []
    skipped = 0
    for name in cell.policies:
        try:
            rows.append(competitive_ratio(
                config, trace, make_policy(name, seed=seed), instance_id=f"cell-{index}", seed=seed,
                max_states=max_states, record_runtime=record_runtime,
            ))
        except OracleLimitError:
            skipped += 1
    return rows, skipped


def _fixture_rows(
    index: int, cell: SweepCell, max_states: Optional[int], record_runtime: bool
) -> Tuple[List[RatioRecord], int]:
    config = cell.config()
    rows: List[RatioRecord] = []
    skipped = 0
    if not config.is_restricted:
        return rows, skipped
    for name in cell.policies:
        policy = make_policy(name)
        try:
            if config.m == 2:
                rows.append(competitive_ratio(
                    config, tight_two_valued_trace(config), policy, instance_id=f"cell-{index}:tight",
                    max_states=max_states, record_runtime=record_runtime,
                ))
            if policy.deterministic:
                transcript = build_lower_bound_instance(config.values, policy)
                rows.append(competitive_ratio(
                    transcript.config, transcript.trace, make_policy(name),
                    instance_id=f"cell-{index}:lower-bound", max_states=max_states,
                    record_runtime=record_runtime,
                ))
        except OracleLimitError:
            skipped += 1
        except AdversaryError as e:
            activity_logger.log_event("Sweep", "ERROR", f"cell-{index}", str(e))
            raise
    return rows, skipped


def _summary_rows(index: int, policies: Sequence[str], rows: Sequence[RatioRecord]) -> List[RatioRecord]:
    summaries = []
    for name in policies:
        mine = [r for r in rows if r.policy == make_policy(name, seed=r.seed).name]
        if not mine:
            continue
        worst = max(mine, key=lambda r: r.ratio)
        slacks = [r.slack for r in mine if r.slack is not None]
        summaries.append(RatioRecord(
            instance_id=f"cell-{index}:summary",
            policy=worst.policy if len({r.policy for r in mine}) == 1 else name,
            alg_benefit=worst.alg_benefit,
            opt_benefit=worst.opt_benefit,
            ratio=worst.ratio,
            applicable_bound=worst.applicable_bound,
            bound_satisfied=all(r.bound_satisfied for r in mine),
            slack=min(slacks) if slacks else None,
            states_explored=sum(r.states_explored for r in mine),
        ))
    return summaries


def sweep(spec: SweepSpec, *, record_runtime: Optional[bool] = None, workers: Optional[int] = None) -> SweepReport:
    """
    Rows come out in cell order, then seed, then the cell's policy order; each
    cell ends with its fixture rows (if requested) and one max-ratio summary
    row per policy.
    """
    _check_spec(spec)
    record = settings.RECORD_RUNTIME if record_runtime is None else record_runtime
    workers = workers or settings.WORKERS
    activity_logger.log_event("Sweep", "START", f"{len(spec.cells)} cells", f"{workers} worker(s)")

    tasks = [
        (i, cell, seed, spec.max_states, record)
        for i, cell in enumerate(spec.cells)
        for seed in range(cell.seed, cell.seed + cell.trials)
    ]
    per_cell: List[List[RatioRecord]] = [[] for _ in spec.cells]
    skipped = 0
    for (i, *_), (rows, missed) in zip(tasks, fan_out(tasks, _run_seed, workers)):
        per_cell[i].extend(rows)
        skipped += missed

    records: List[RatioRecord] = []
    for i, cell in enumerate(spec.cells):
        rows = per_cell[i]
        if spec.include_fixtures:
            fixtures, missed = _fixture_rows(i, cell, spec.max_states, record)
            rows = rows + fixtures
            skipped += missed
        records.extend(rows)
        records.extend(_summary_rows(i, cell.policies, rows))

    if skipped:
        activity_logger.log_event("Sweep", "SKIP", f"{len(spec.cells)} cells", f"{skipped} instances over oracle limits")
    violated = sum(1 for r in records if not r.bound_satisfied and not r.instance_id.endswith(":summary"))
    activity_logger.log_event("Sweep", "FAIL" if violated else "SUCCESS", f"{len(spec.cells)} cells",
                              f"{len(records)} rows, {violated} bound violations")
    return SweepReport(records=tuple(records), skipped=skipped)


def _ratio_decimal(value: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 60
        return str((Decimal(value.numerator) / Decimal(value.denominator)).quantize(_SIX_PLACES, ROUND_HALF_EVEN))


def _parts(value: Optional[Fraction]) -> Tuple[str, str]:
    if value is None:
        return "", ""
    return str(value.numerator), str(value.denominator)


def sweep_csv(records: Iterable[RatioRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        bound = r.applicable_bound
        writer.writerow([
            r.instance_id,
            "" if r.seed is None else r.seed,
            r.policy,
            r.alg_benefit,
            r.opt_benefit,
            *_parts(r.ratio),
            _ratio_decimal(r.ratio),
            *_parts(bound),
            "" if bound is None else str(r.bound_satisfied).lower(),
            *_parts(r.slack),
            r.states_explored,
            "" if r.runtime_ms is None else f"{r.runtime_ms:.3f}",
        ])
    return buffer.getvalue()
