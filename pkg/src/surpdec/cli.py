"""Command-line entry point.

Subcommands mirror the library: decompose a dataset, trace one item's
frontier, grid-search the policy parameters, check the regression sign
pattern, or dump generated candidate sets.  Every output starts with a
'#'-prefixed provenance header (no timestamps) so identical invocations
produce identical bytes.

Exit codes: 0 clean, 1 when any item failed (partial results are still
written), 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from surpdec import __version__
from surpdec.backend import HttpLm, MockLm, WordVectors
from surpdec.candidates import Lexicon, SamplerConfig
from surpdec.errors import SchemaError, SurpdecError
from surpdec.experiment import (
    DEFAULT_GAMMA_GRID,
    DEFAULT_JOBS,
    DEFAULT_LAMBDA_GRID,
    ExperimentSpec,
    GeneratorSpec,
    generate_sets,
    grid_search,
    load_stimuli,
    results_table,
    run_experiment,
    summary_table,
)
from surpdec.policy import frontier
from surpdec.stats import check_sign_predictions
from surpdec.svg import effects_svg, frontier_svg
from surpdec.types import SCHEMA_VERSION, Generator, PolicyParams


class ConfigError(Exception):
    """Bad flags or inputs; maps to exit code 2."""


COMMON_DEFAULTS = {
    "backend": None,
    "config": None,
    "out": None,
    "seed": 0,
    "jobs": DEFAULT_JOBS,
}
GENERATION_DEFAULTS = {
    "stimuli": None,
    "generator": "counterpart",
    "candidates": None,
    "lexicon": None,
    "word_vectors": None,
    "n_phonological": 100,
    "n_semantic": 100,
    "n_contextual": 100,
}
DEFAULTS = {
    "decompose": {
        **COMMON_DEFAULTS,
        **GENERATION_DEFAULTS,
        "lam": 1.0,
        "gamma": 8.0,
        "alpha": 1.0,
        "beta": 1.0,
        "summary": None,
        "svg": None,
    },
    "frontier": {
        **COMMON_DEFAULTS,
        **GENERATION_DEFAULTS,
        "item": None,
        "lambda_grid": "0:10:0.1",
        "gamma": 8.0,
        "svg": None,
    },
    "gridsearch": {
        **COMMON_DEFAULTS,
        **GENERATION_DEFAULTS,
        "constraints": None,
        "lambda_grid": None,
        "gamma_grid": None,
    },
    "stats": {**COMMON_DEFAULTS, "data": None},
    "gen-candidates": {**COMMON_DEFAULTS, **GENERATION_DEFAULTS},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surpdec",
        description="Split word surprisal into shallow and deep components.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def new_sub(name, help_text):
        # unspecified flags stay absent so config file values survive the merge
        return sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)

    def add_common(p):
        p.add_argument("--backend", help="mock:FILE or an http(s):// URL")
        p.add_argument("--config", help="JSON file supplying any flag; flags win")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--seed", type=int, help="echoed into provenance headers")
        p.add_argument("--jobs", type=int, help="worker threads (default 8)")

    def add_generation(p):
        p.add_argument("--stimuli", help="dataset JSON file")
        p.add_argument(
            "--generator", choices=["external", "counterpart", "sampler"],
            help="candidate strategy (default counterpart)",
        )
        p.add_argument("--candidates", help="corrections JSON (external strategy)")
        p.add_argument("--lexicon", help="word/rank TSV (sampler strategy)")
        p.add_argument("--word-vectors", dest="word_vectors", help="word embedding JSON")
        p.add_argument("--n-phonological", dest="n_phonological", type=int)
        p.add_argument("--n-semantic", dest="n_semantic", type=int)
        p.add_argument("--n-contextual", dest="n_contextual", type=int)

    p = new_sub("decompose", "per-item shallow/deep decomposition")
    add_common(p)
    add_generation(p)
    p.add_argument("--lambda", dest="lam", type=float, help="depth weight (default 1)")
    p.add_argument("--gamma", type=float, help="semantic scale (default 8)")
    p.add_argument("--alpha", type=float, help="shallow effect gain (default 1)")
    p.add_argument("--beta", type=float, help="deep effect gain (default 1)")
    p.add_argument("--summary", help="also write per-condition summary CSV here")
    p.add_argument("--svg", help="also write per-condition effect bars here")

    p = new_sub("frontier", "depth/distortion curve for one item")
    add_common(p)
    add_generation(p)
    p.add_argument("--item", help="item id to trace")
    p.add_argument("--lambda-grid", dest="lambda_grid", help='"lo:hi:step" or comma list')
    p.add_argument("--gamma", type=float, help="semantic scale (default 8)")
    p.add_argument("--svg", help="also write the curve as SVG here")

    p = new_sub("gridsearch", "score a parameter grid on ordering constraints")
    add_common(p)
    add_generation(p)
    p.add_argument("--constraints", help="JSON list of ordering constraints")
    p.add_argument("--lambda-grid", dest="lambda_grid", help='"lo:hi:step" or comma list')
    p.add_argument("--gamma-grid", dest="gamma_grid", help='"lo:hi:step" or comma list')

    p = new_sub("stats", "sign-pattern regressions on a trial CSV")
    add_common(p)
    p.add_argument("--data", help="CSV with n400, p600, surprisal columns")

    p = new_sub("gen-candidates", "dump generated candidate sets as JSON")
    add_common(p)
    add_generation(p)

    return parser


def merge_flags(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then config file values, then explicit flags."""
    passed = {k: v for k, v in vars(args).items() if k != "command"}
    merged = dict(DEFAULTS[command])
    config_path = passed.get("config", merged.get("config"))
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as f:
                config = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {config_path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {config_path} is not valid JSON: {e}")
        if not isinstance(config, dict):
            raise ConfigError(f"config {config_path} must be a JSON object")
        for key, value in config.items():
            dest = "lam" if key == "lambda" else key.replace("-", "_")
            if dest not in merged:
                raise ConfigError(f"config key {key!r} unknown for {command}")
            merged[dest] = value
        merged["config"] = config_path
    merged.update(passed)
    return merged


def open_backend(spec: str | None):
    if not spec:
        raise ConfigError("--backend is required (mock:FILE or an http(s):// URL)")
    if spec.startswith("mock:"):
        path = spec[len("mock:") :]
        try:
            return MockLm.load(path)
        except OSError as e:
            raise ConfigError(f"cannot read mock backend {path}: {e}")
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpLm(spec)
    raise ConfigError(f"backend {spec!r} is neither mock:FILE nor an http(s):// URL")


def parse_grid(text, default) -> tuple[float, ...]:
    if text is None:
        return tuple(default)
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be lo:hi:step")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"grid {text!r} has non-numeric parts")
        if hi < lo:
            raise ConfigError(f"grid {text!r} has hi < lo")
        if lo == hi:
            return (lo,)
        if step <= 0:
            raise ConfigError(f"grid {text!r} needs a positive step")
        count = int(round((hi - lo) / step)) + 1
        return tuple(round(lo + i * step, 10) for i in range(count) if lo + i * step <= hi + 1e-9)
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"grid {text!r} is not a comma list of numbers")


def load_corrections(path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read corrections {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"corrections {path} is not valid JSON: {e}")
    if not isinstance(data, dict) or not all(
        isinstance(v, list) and all(isinstance(s, str) for s in v) for v in data.values()
    ):
        raise ConfigError(f"corrections {path} must map item ids to lists of strings")
    return data


def build_generator(flags: dict) -> GeneratorSpec:
    kind = {
        "external": Generator.EXTERNAL,
        "counterpart": Generator.COUNTERPART,
        "sampler": Generator.SAMPLER,
    }.get(flags["generator"])
    if kind is None:
        raise ConfigError(f"unknown generator {flags['generator']!r}")
    corrections = None
    lexicon = None
    sampler = None
    vectors = None
    if flags.get("word_vectors"):
        try:
            vectors = WordVectors.load(flags["word_vectors"])
        except OSError as e:
            raise ConfigError(f"cannot read word vectors: {e}")
    if kind is Generator.EXTERNAL:
        if not flags.get("candidates"):
            raise ConfigError("--candidates is required with --generator external")
        corrections = load_corrections(flags["candidates"])
    if kind is Generator.SAMPLER:
        if not flags.get("lexicon"):
            raise ConfigError("--lexicon is required with --generator sampler")
        try:
            lexicon = Lexicon.load(flags["lexicon"])
        except OSError as e:
            raise ConfigError(f"cannot read lexicon: {e}")
        sampler = SamplerConfig(
            n_phonological=flags["n_phonological"],
            n_semantic=flags["n_semantic"],
            n_contextual=flags["n_contextual"],
        )
    return GeneratorSpec(
        kind=kind,
        corrections=corrections,
        lexicon=lexicon,
        sampler=sampler,
        word_vectors=vectors,
    )


def load_dataset(flags: dict):
    if not flags.get("stimuli"):
        raise ConfigError("--stimuli is required")
    try:
        stimuli = load_stimuli(flags["stimuli"])
    except OSError as e:
        raise ConfigError(f"cannot read stimuli: {e}")
    return stimuli


def provenance(command: str, flags: dict) -> str:
    shown = {k: v for k, v in sorted(flags.items()) if k != "config"}
    lines = [
        f"# surpdec {command}",
        f"# version: {__version__}",
        f"# schema: {SCHEMA_VERSION}",
        f"# backend: {flags.get('backend')}",
        f"# seed: {flags.get('seed')}",
        "# flags: " + " ".join(f"{k}={v!r}" for k, v in shown.items()),
    ]
    return "\n".join(lines) + "\n"


def csv_text(header: list, rows: list) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return out.getvalue()


def write_output(path, text: str):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def report_failures(failures):
    for failure in failures:
        print(f"item {failure.item_id} failed: {failure.error}", file=sys.stderr)


def make_spec(flags: dict, pattern=()) -> ExperimentSpec:
    stimuli = load_dataset(flags)
    return ExperimentSpec(
        name=stimuli[0].experiment_id,
        stimuli=tuple(stimuli),
        generator=build_generator(flags),
        params=PolicyParams(
            depth_weight=flags.get("lam", 1.0), semantic_scale=flags.get("gamma", 8.0)
        ),
        expected_pattern=tuple(pattern),
    )


def cmd_decompose(flags: dict) -> int:
    lm = open_backend(flags["backend"])
    spec = make_spec(flags)
    report = run_experiment(
        spec,
        lm,
        jobs=flags["jobs"],
        scale_n400=flags["alpha"],
        scale_p600=flags["beta"],
    )
    header, rows = results_table(report)
    write_output(flags["out"], provenance("decompose", flags) + csv_text(header, rows))
    if flags.get("summary"):
        sheader, srows = summary_table(report)
        write_output(
            flags["summary"], provenance("decompose", flags) + csv_text(sheader, srows)
        )
    if flags.get("svg"):
        write_output(flags["svg"], effects_svg(report.summaries, title=report.name))
    report_failures(report.failures)
    return 1 if report.failures else 0


def cmd_frontier(flags: dict) -> int:
    lm = open_backend(flags["backend"])
    spec = make_spec(flags)
    item = flags.get("item")
    if not item:
        raise ConfigError("--item is required")
    if not any(s.item_id == item for s in spec.stimuli):
        raise ConfigError(f"item {item!r} not in dataset")
    sets, failures = generate_sets(spec, lm, jobs=flags["jobs"])
    if item not in sets:
        report_failures([f for f in failures if f.item_id == item])
        return 1
    grid = parse_grid(flags["lambda_grid"], ())
    if not grid:
        raise ConfigError("--lambda-grid must produce at least one value")
    points = frontier(sets[item], grid, semantic_scale=flags.get("gamma", 8.0))
    header = ["depth_weight", "depth", "expected_distortion"]
    rows = [[p.depth_weight, p.depth, p.expected_distortion] for p in points]
    write_output(flags["out"], provenance("frontier", flags) + csv_text(header, rows))
    if flags.get("svg"):
        write_output(flags["svg"], frontier_svg(points, title=item))
    return 0


def cmd_gridsearch(flags: dict) -> int:
    lm = open_backend(flags["backend"])
    if not flags.get("constraints"):
        raise ConfigError("--constraints is required")
    try:
        with open(flags["constraints"], encoding="utf-8") as f:
            pattern = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read constraints: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"constraints file is not valid JSON: {e}")
    if not isinstance(pattern, list) or not all(isinstance(c, str) for c in pattern):
        raise ConfigError("constraints file must be a JSON list of strings")
    spec = make_spec(flags, pattern=pattern)
    cells = grid_search(
        spec,
        lm,
        lambda_grid=parse_grid(flags["lambda_grid"], DEFAULT_LAMBDA_GRID),
        gamma_grid=parse_grid(flags["gamma_grid"], DEFAULT_GAMMA_GRID),
        jobs=flags["jobs"],
    )
    header = ["rank", "lambda", "gamma", "score", "satisfied"]
    rows = [
        [i + 1, c.depth_weight, c.semantic_scale, c.score,
         ";".join(str(int(s)) for s in c.satisfied)]
        for i, c in enumerate(cells)
    ]
    write_output(flags["out"], provenance("gridsearch", flags) + csv_text(header, rows))
    return 0


def cmd_stats(flags: dict) -> int:
    if not flags.get("data"):
        raise ConfigError("--data is required")
    try:
        with open(flags["data"], encoding="utf-8", newline="") as f:
            reader = csv.DictReader(row for row in f if not row.startswith("#"))
            rows = list(reader)
    except OSError as e:
        raise ConfigError(f"cannot read data: {e}")
    needed = {"n400", "p600", "surprisal"}
    if not rows or not needed.issubset(rows[0]):
        raise ConfigError(f"data must have columns {sorted(needed)}")
    try:
        n400 = [float(r["n400"]) for r in rows]
        p600 = [float(r["p600"]) for r in rows]
        surprisal = [float(r["surprisal"]) for r in rows]
    except ValueError as e:
        raise ConfigError(f"non-numeric cell in data: {e}")
    report = check_sign_predictions(n400, p600, surprisal)
    header = ["response", "predictor", "coefficient", "t_value", "expected_sign", "matches"]
    out_rows = []
    for check in report.checks:
        for i, predictor in enumerate(check.predictors):
            out_rows.append(
                [
                    check.response,
                    predictor,
                    check.coefficients[i],
                    check.t_values[i],
                    "+" if check.expected_signs[i] > 0 else "-",
                    int(check.matches[i]),
                ]
            )
    text = (
        provenance("stats", flags)
        + csv_text(header, out_rows)
        + f"# all_match: {str(report.all_match).lower()}\n"
    )
    write_output(flags["out"], text)
    return 0


def cmd_gen_candidates(flags: dict) -> int:
    lm = open_backend(flags["backend"])
    spec = make_spec(flags)
    sets, failures = generate_sets(spec, lm, jobs=flags["jobs"])
    payload = {
        "schema_version": SCHEMA_VERSION,
        "generator": spec.generator.kind.value,
        "sets": {item_id: cset.to_dict() for item_id, cset in sorted(sets.items())},
    }
    text = provenance("gen-candidates", flags) + json.dumps(
        payload, indent=2, sort_keys=True
    ) + "\n"
    write_output(flags["out"], text)
    report_failures(failures)
    return 1 if failures else 0


COMMANDS = {
    "decompose": cmd_decompose,
    "frontier": cmd_frontier,
    "gridsearch": cmd_gridsearch,
    "stats": cmd_stats,
    "gen-candidates": cmd_gen_candidates,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        flags = merge_flags(args.command, args)
        return COMMANDS[args.command](flags)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SurpdecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
