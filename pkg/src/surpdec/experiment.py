"""Experiment running: datasets, condition summaries, grid search.

A dataset is a JSON file of stimuli grouped into conditions, each
experimental item paired with a control item sharing its context.  A
run builds one candidate set per item with the configured strategy,
decomposes every item at the given policy parameters, and reduces the
results to per-condition means and effects against the paired
controls.  Grid search repeats the decomposition step over a parameter
grid, scoring each cell by how many expected orderings it satisfies;
candidate sets are built once since they do not depend on the
parameters.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from surpdec.candidates import (
    Lexicon,
    SamplerConfig,
    control_counterpart,
    ingest_external,
    multiple_sampler,
)
from surpdec.errors import DanglingControlRef, SchemaError, SurpdecError
from surpdec.policy import decompose
from surpdec.types import (
    SCHEMA_VERSION,
    CandidateSet,
    DecompositionResult,
    Generator,
    PolicyParams,
    Stimulus,
)

DEFAULT_JOBS = 8
DEFAULT_LAMBDA_GRID = (0.0, *(round(0.1 * i, 1) for i in range(1, 21)), 10.0)
DEFAULT_GAMMA_GRID = tuple(float(g) for g in range(11))

_CONSTRAINT_RE = re.compile(
    r"^\s*([ABVL])\[([^\]]+)\]\s*(>=|<=|>|<)\s*([ABVL])\[([^\]]+)\]\s*$"
)
_METRIC_ATTR = {"A": "shallow", "B": "deep", "V": "veridical", "L": "lm_surprisal"}


@dataclass(frozen=True)
class GeneratorSpec:
    """Candidate strategy plus whatever inputs it needs."""

    kind: Generator
    corrections: Optional[Mapping[str, Sequence[str]]] = None
    lexicon: Optional[Lexicon] = None
    sampler: Optional[SamplerConfig] = None
    word_vectors: object = None

    def __post_init__(self):
        if self.kind is Generator.EXTERNAL and self.corrections is None:
            raise SchemaError("external generation needs a corrections mapping")
        if self.kind is Generator.SAMPLER and self.lexicon is None:
            raise SchemaError("sampler generation needs a lexicon")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    stimuli: tuple[Stimulus, ...]
    generator: GeneratorSpec
    params: PolicyParams
    expected_pattern: tuple[str, ...] = ()

    def __post_init__(self):
        check_control_refs(self.stimuli)
        for constraint in self.expected_pattern:
            parse_constraint(constraint)


@dataclass(frozen=True)
class ItemResult:
    item_id: str
    condition: str
    is_control: bool
    control_item_id: Optional[str]
    result: DecompositionResult


@dataclass(frozen=True)
class ItemFailure:
    item_id: str
    condition: str
    error: str


@dataclass(frozen=True)
class ConditionSummary:
    """Per-condition means and effects against the paired controls.

    Effects are mean paired differences (item minus its own control),
    scaled by the component gains; control conditions report zero.
    """

    condition: str
    n_items: int
    mean_shallow: float
    mean_deep: float
    mean_veridical: float
    mean_lm_surprisal: float
    effect_n400: float
    effect_p600: float


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    params: PolicyParams
    results: tuple[ItemResult, ...]
    failures: tuple[ItemFailure, ...]
    summaries: tuple[ConditionSummary, ...]


def check_control_refs(stimuli: Sequence[Stimulus]):
    """Unique item ids; every control reference resolves to a control item."""
    by_id = {}
    for s in stimuli:
        if s.item_id in by_id:
            raise SchemaError(f"duplicate item id {s.item_id!r}")
        by_id[s.item_id] = s
    for s in stimuli:
        if s.is_control:
            continue
        control = by_id.get(s.control_item_id)
        if control is None:
            raise DanglingControlRef(
                f"{s.item_id}: control {s.control_item_id!r} not in dataset"
            )
        if not control.is_control:
            raise DanglingControlRef(
                f"{s.item_id}: {s.control_item_id!r} is not a control item"
            )


def load_stimuli(path) -> list[Stimulus]:
    """Stimuli from a dataset JSON file (see docs/schemas.md)."""
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be an object")
    version = str(data.get("schema_version", SCHEMA_VERSION))
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    rows = data.get("stimuli")
    if not rows:
        raise SchemaError(f"{path}: no stimuli")
    experiment_id = data.get("experiment_id")
    stimuli = []
    for row in rows:
        if not isinstance(row, dict):
            raise SchemaError(f"{path}: stimulus rows must be objects")
        if "experiment_id" not in row and experiment_id is not None:
            row = {**row, "experiment_id": experiment_id}
        stimuli.append(Stimulus.from_dict(row))
    check_control_refs(stimuli)
    return stimuli


def _build_set(stimulus: Stimulus, spec: ExperimentSpec, lm, embedder) -> CandidateSet:
    gen = spec.generator
    if gen.kind is Generator.COUNTERPART:
        by_id = {s.item_id: s for s in spec.stimuli}
        if stimulus.is_control:
            members = [stimulus] + [
                s for s in spec.stimuli
                if not s.is_control and s.control_item_id == stimulus.item_id
            ]
        else:
            members = [stimulus, by_id[stimulus.control_item_id]]
        return control_counterpart(members, lm, embedder)[stimulus.item_id]
    if gen.kind is Generator.EXTERNAL:
        sets = ingest_external(
            {stimulus.item_id: gen.corrections[stimulus.item_id]},
            [stimulus],
            lm,
            embedder,
        )
        return sets[stimulus.item_id]
    return multiple_sampler(
        stimulus, gen.lexicon, lm, gen.sampler, word_vectors=gen.word_vectors
    )


def generate_sets(
    spec: ExperimentSpec, lm, embedder=None, jobs: int = DEFAULT_JOBS
) -> tuple[dict[str, CandidateSet], list[ItemFailure]]:
    """One candidate set per stimulus, collecting per-item failures."""
    failures = []
    sets = {}

    def build(stimulus: Stimulus):
        if (
            spec.generator.kind is Generator.EXTERNAL
            and stimulus.item_id not in spec.generator.corrections
        ):
            raise SchemaError("no corrections entry for this item")
        return _build_set(stimulus, spec, lm, embedder)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = {s.item_id: pool.submit(build, s) for s in spec.stimuli}
        for stimulus in spec.stimuli:
            try:
                sets[stimulus.item_id] = futures[stimulus.item_id].result()
            except SurpdecError as e:
                failures.append(
                    ItemFailure(
                        item_id=stimulus.item_id,
                        condition=stimulus.condition,
                        error=f"{type(e).__name__}: {e}",
                    )
                )
    return sets, failures


def decompose_sets(
    spec: ExperimentSpec,
    sets: Mapping[str, CandidateSet],
    params: PolicyParams,
) -> tuple[list[ItemResult], list[ItemFailure]]:
    """Decompose every generated set, sorted by item id."""
    results = []
    failures = []
    for stimulus in sorted(spec.stimuli, key=lambda s: s.item_id):
        cset = sets.get(stimulus.item_id)
        if cset is None:
            continue
        try:
            res = decompose(cset, params)
        except SurpdecError as e:
            failures.append(
                ItemFailure(
                    item_id=stimulus.item_id,
                    condition=stimulus.condition,
                    error=f"{type(e).__name__}: {e}",
                )
            )
            continue
        results.append(
            ItemResult(
                item_id=stimulus.item_id,
                condition=stimulus.condition,
                is_control=stimulus.is_control,
                control_item_id=stimulus.control_item_id,
                result=res,
            )
        )
    return results, failures


def summarize(
    results: Sequence[ItemResult],
    scale_n400: float = 1.0,
    scale_p600: float = 1.0,
) -> list[ConditionSummary]:
    """Condition means plus paired effects against each item's control."""
    by_id = {r.item_id: r for r in results}
    by_condition: dict[str, list[ItemResult]] = {}
    for r in results:
        by_condition.setdefault(r.condition, []).append(r)

    def mean(values):
        return sum(values) / len(values)

    summaries = []
    for condition in sorted(by_condition):
        rows = by_condition[condition]
        effect_shallow = 0.0
        effect_deep = 0.0
        if not rows[0].is_control:
            pairs = [
                (r, by_id[r.control_item_id])
                for r in rows
                if r.control_item_id in by_id
            ]
            if pairs:
                effect_shallow = mean(
                    [r.result.shallow - c.result.shallow for r, c in pairs]
                )
                effect_deep = mean([r.result.deep - c.result.deep for r, c in pairs])
        summaries.append(
            ConditionSummary(
                condition=condition,
                n_items=len(rows),
                mean_shallow=mean([r.result.shallow for r in rows]),
                mean_deep=mean([r.result.deep for r in rows]),
                mean_veridical=mean([r.result.veridical for r in rows]),
                mean_lm_surprisal=mean([r.result.lm_surprisal for r in rows]),
                effect_n400=scale_n400 * effect_shallow,
                effect_p600=scale_p600 * effect_deep,
            )
        )
    return summaries


def run_experiment(
    spec: ExperimentSpec,
    lm,
    embedder=None,
    jobs: int = DEFAULT_JOBS,
    scale_n400: float = 1.0,
    scale_p600: float = 1.0,
) -> ExperimentReport:
    """Generate, decompose, and summarize one experiment."""
    sets, gen_failures = generate_sets(spec, lm, embedder=embedder, jobs=jobs)
    results, dec_failures = decompose_sets(spec, sets, spec.params)
    return ExperimentReport(
        name=spec.name,
        params=spec.params,
        results=tuple(results),
        failures=tuple(gen_failures + dec_failures),
        summaries=tuple(summarize(results, scale_n400, scale_p600)),
    )


def parse_constraint(text: str):
    """'A[Semantic] > A[Control]' -> (metric, condition, op, metric, condition)."""
    m = _CONSTRAINT_RE.match(text)
    if m is None:
        raise SchemaError(f"cannot parse ordering constraint {text!r}")
    return m.group(1), m.group(2), m.group(3), m.group(4), m.group(5)


def evaluate_constraint(constraint: str, summaries: Sequence[ConditionSummary]) -> bool:
    lhs_metric, lhs_cond, op, rhs_metric, rhs_cond = parse_constraint(constraint)
    by_condition = {s.condition: s for s in summaries}
    values = {}
    for metric, condition in ((lhs_metric, lhs_cond), (rhs_metric, rhs_cond)):
        summary = by_condition.get(condition)
        if summary is None:
            raise SchemaError(f"constraint {constraint!r}: no condition {condition!r}")
        values[(metric, condition)] = getattr(summary, f"mean_{_METRIC_ATTR[metric]}")
    lhs = values[(lhs_metric, lhs_cond)]
    rhs = values[(rhs_metric, rhs_cond)]
    if op == ">":
        return lhs > rhs
    if op == "<":
        return lhs < rhs
    if op == ">=":
        return lhs >= rhs
    return lhs <= rhs


@dataclass(frozen=True)
class GridCell:
    depth_weight: float
    semantic_scale: float
    score: int
    satisfied: tuple[bool, ...]


def grid_search(
    spec: ExperimentSpec,
    lm,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    embedder=None,
    jobs: int = DEFAULT_JOBS,
) -> list[GridCell]:
    """Score every (depth weight, semantic scale) cell on the expected pattern.

    Candidate sets are generated once.  Cells are ranked best first:
    score descending, then smaller depth weight, then smaller semantic
    scale.
    """
    if not lambda_grid or not gamma_grid:
        raise ValueError("parameter grids must be nonempty")
    if not spec.expected_pattern:
        raise ValueError("grid search needs a nonempty expected_pattern")
    sets, _ = generate_sets(spec, lm, embedder=embedder, jobs=jobs)
    cells = []
    for lam in lambda_grid:
        for gamma in gamma_grid:
            params = PolicyParams(depth_weight=float(lam), semantic_scale=float(gamma))
            results, _ = decompose_sets(spec, sets, params)
            summaries = summarize(results)
            satisfied = tuple(
                evaluate_constraint(c, summaries) for c in spec.expected_pattern
            )
            cells.append(
                GridCell(
                    depth_weight=float(lam),
                    semantic_scale=float(gamma),
                    score=sum(satisfied),
                    satisfied=satisfied,
                )
            )
    return sorted(cells, key=lambda c: (-c.score, c.depth_weight, c.semantic_scale))


def results_table(report: ExperimentReport) -> tuple[list[str], list[list]]:
    """Per-item rows for CSV export."""
    header = [
        "item_id",
        "condition",
        "is_control",
        "shallow",
        "deep",
        "veridical",
        "lm_surprisal",
        "lambda",
        "gamma",
    ]
    rows = [
        [
            r.item_id,
            r.condition,
            int(r.is_control),
            r.result.shallow,
            r.result.deep,
            r.result.veridical,
            r.result.lm_surprisal,
            report.params.depth_weight,
            report.params.semantic_scale,
        ]
        for r in report.results
    ]
    return header, rows


def summary_table(report: ExperimentReport) -> tuple[list[str], list[list]]:
    """Per-condition rows for CSV export."""
    header = [
        "condition",
        "n_items",
        "mean_shallow",
        "mean_deep",
        "mean_veridical",
        "mean_lm_surprisal",
        "effect_n400",
        "effect_p600",
    ]
    rows = [
        [
            s.condition,
            s.n_items,
            s.mean_shallow,
            s.mean_deep,
            s.mean_veridical,
            s.mean_lm_surprisal,
            s.effect_n400,
            s.effect_p600,
        ]
        for s in report.summaries
    ]
    return header, rows
