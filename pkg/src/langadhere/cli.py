"""Command-line entrypoint: one subcommand per workflow stage.

Exit code 0 means every requested artifact was produced; the first failure
prints a structured one-line error (subcommand, offending file, line or
tensor) to stderr and exits 1. A config file (INI-style sections per module)
can supply defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from collections import Counter
from pathlib import Path

from . import __version__, langid, metrics
from .ckptdiff import (
    build_matrix,
    diff_checkpoints,
    entries_to_csv,
    matrix_from_csv,
    matrix_to_csv,
    read_manifest,
)
from .corpus import IngestOptions, build_filtered_subset, ingest_corpus
from .demo import constructed_log, demo_rows, write_corpus, write_log
from .errors import ConfigError, ToolkitError
from .freezeplan import (
    LayerRange,
    TrainConfigTemplate,
    emit_plan,
    load_plan,
    multilingual_template,
    plan_explicit,
    plan_final_layers,
    plan_from_delta,
    plan_matched_prefix,
)
from .matcher import (
    GenerationRecord,
    MatcherConfig,
    collect_sets,
    judge,
    read_generation_log,
    write_verdicts,
)
from .report import (
    ReportBundle,
    fmt_percent,
    known_unknown_to_csv,
    overlap_to_csv,
    provenance,
    render_accuracy_table,
    render_cococola_table,
    render_heatmap,
    render_overlap_heatmap,
)

# config section/key -> argparse dest (applied when the flag was not given)
_CONFIG_KEYS = {
    ("corpus", "path"): "corpus",
    ("corpus", "languages"): "languages",
    ("corpus", "policy"): "policy",
    ("matcher", "reference"): "reference",
    ("langid", "profiles"): "profiles",
    ("diff", "scheme"): "scheme",
    ("plan", "scheme"): "scheme",
    ("report", "out"): "out",
}


def _load_config(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for (section, key), dest in _CONFIG_KEYS.items():
        if parser.has_option(section, key):
            values.setdefault(dest, parser.get(section, key))
    return values


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    for dest, value in _load_config(args.config).items():
        if getattr(args, dest, None) is None:
            setattr(args, dest, value)


def _ingest(args) -> tuple:
    languages = (
        tuple(args.languages.split(",")) if args.languages else None
    )
    options = IngestOptions(languages=languages, policy=args.policy or "strict")
    return ingest_corpus(args.corpus, options), options


def _group_records(records):
    groups: dict[tuple[str, str], list[GenerationRecord]] = {}
    for rec in records:
        groups.setdefault((rec.model_tag, rec.input_language), []).append(rec)
    return groups


def _load_profiles_arg(args):
    if getattr(args, "profiles", None):
        return langid.load_profiles(args.profiles)
    return None


def cmd_ingest(args) -> int:
    corpus, _ = _ingest(args)
    summary = {
        "languages": list(corpus.languages),
        "question_ids": len(corpus.items),
        "qa_items": sum(len(r) for r in corpus.items.values()),
        "splits": dict(Counter(corpus.split_of.values())),
        "quarantined": list(corpus.quarantined),
        "warnings": list(corpus.warnings),
    }
    if args.out:
        Path(args.out).write_text(
            json.dumps(summary, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    if args.build_profiles:
        langid.save_profiles(langid.build_profiles(corpus), args.build_profiles)
    print(
        f"ingested {summary['qa_items']} items over "
        f"{summary['question_ids']} ids in {len(corpus.languages)} languages; "
        f"{len(corpus.quarantined)} quarantined, "
        f"{len(corpus.warnings)} warnings"
    )
    return 0


def cmd_evaluate(args) -> int:
    corpus, _ = _ingest(args)
    profiles = _load_profiles_arg(args)
    config = MatcherConfig(reference_language=args.reference)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    table_entries = []
    inputs = [args.corpus]
    for log_path in args.log:
        inputs.append(log_path)
        records = read_generation_log(log_path)
        for (tag, lang), recs in sorted(_group_records(records).items()):
            verdicts = [judge(r, corpus, profiles, config) for r in recs]
            sets = collect_sets(
                verdicts, corpus.eval_ids, reference_language=args.reference
            )
            report = metrics.build_report(
                sets, reference_language=args.reference, filtered_universe=False
            )
            payload = report.to_dict()
            payload["model_tag"] = tag
            payload["universe"] = "full evaluation split"
            if profiles:
                # matched verdicts whose langid disagrees are surfaced, not
                # silently resolved; gold-answer matching stays primary
                payload["langid_disagreements"] = sum(
                    1
                    for v in verdicts
                    if v.matched_language is not None
                    and v.langid is not None
                    and v.langid.predicted not in ("other", v.matched_language)
                )
            reports.append(payload)
            table_entries.append(
                {
                    "model_tag": tag,
                    "language": lang,
                    "ratio": report.ratio_general,
                    "acc": report.cumulative_accuracy,
                }
            )
            if args.emit_verdicts:
                write_verdicts(
                    verdicts, out_dir / f"verdicts_{tag}_{lang}.jsonl"
                )

    (out_dir / "metrics.json").write_text(
        json.dumps(reports, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    bundle = ReportBundle(
        provenance=provenance(inputs),
        cococola_table=render_cococola_table(table_entries),
    )
    bundle.write(out_dir)
    print(f"evaluated {len(reports)} (model, language) groups -> {out_dir}")
    return 0


def cmd_cococola(args) -> int:
    corpus, _ = _ingest(args)
    profiles = _load_profiles_arg(args)
    config = MatcherConfig(reference_language=args.reference)
    subset = build_filtered_subset(corpus, args.language, args.reference)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    inputs = [args.corpus]
    for log_path in args.log:
        inputs.append(log_path)
        records = [
            r
            for r in read_generation_log(log_path)
            if r.input_language == args.language
        ]
        for (tag, lang), recs in sorted(_group_records(records).items()):
            in_subset = [r for r in recs if r.question_id in subset.question_ids]
            skipped = len(recs) - len(in_subset)
            verdicts = [judge(r, corpus, profiles, config) for r in in_subset]
            sets = collect_sets(
                verdicts, subset.question_ids, reference_language=args.reference
            )
            report = metrics.build_report(
                sets, reference_language=args.reference, filtered_universe=True
            )
            payload = report.to_dict()
            payload["model_tag"] = tag
            payload["universe"] = "filtered subset"
            payload["subset_size"] = len(subset)
            payload["records_outside_subset"] = skipped
            reports.append(payload)
            if args.emit_verdicts:
                write_verdicts(
                    verdicts, out_dir / f"verdicts_{tag}_{lang}_filtered.jsonl"
                )
            print(
                f"{tag} {lang}: adherence ratio "
                f"{fmt_percent(report.ratio_simplified)} over "
                f"{len(subset)} filtered ids ({skipped} records outside)"
            )

    (out_dir / f"cococola_{args.language}.json").write_text(
        json.dumps(reports, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return 0


def cmd_overlap(args) -> int:
    corpus, _ = _ingest(args)
    config = MatcherConfig(reference_language=args.reference)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    correct_by_language: dict[str, set] = {}
    inputs = [args.corpus]
    tags = set()
    for log_path in args.log:
        inputs.append(log_path)
        for (tag, lang), recs in sorted(
            _group_records(read_generation_log(log_path)).items()
        ):
            tags.add(tag)
            if len(tags) > 1:
                raise ToolkitError(
                    f"overlap needs one model per run, got tags {sorted(tags)}"
                )
            verdicts = [judge(r, corpus, None, config) for r in recs]
            sets = collect_sets(
                verdicts, corpus.eval_ids, reference_language=args.reference
            )
            correct = sets.correct_input
            if args.correct_in == "cumulative":
                correct = correct | sets.correct(args.reference)
            correct_by_language[lang] = set(correct)

    if not correct_by_language:
        raise ToolkitError("no generation records found")
    matrix = metrics.build_overlap_matrix(correct_by_language)
    kk = {
        (a, b): metrics.known_unknown(
            correct_by_language[a], correct_by_language[b]
        )
        for a in matrix.languages
        for b in matrix.languages
        if a < b
    }
    bundle = ReportBundle(
        provenance=provenance(inputs),
        overlap_figures={"overlap_matrix": render_overlap_heatmap(matrix)},
        extra_csv={
            "overlap_matrix": overlap_to_csv(matrix),
            "known_unknown": known_unknown_to_csv(kk, matrix.languages),
        },
    )
    bundle.write(out_dir)
    print(
        f"overlap matrix over {len(matrix.languages)} languages "
        f"({args.correct_in} sets) -> {out_dir}"
    )
    return 0


def cmd_diff(args) -> int:
    from .schemes import load_scheme

    scheme = load_scheme(args.scheme)
    entries = diff_checkpoints(args.base, args.tuned, scheme)
    matrix = build_matrix(entries)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "diff_entries.csv").write_text(
        entries_to_csv(entries), encoding="utf-8"
    )
    (out_dir / "diff_matrix.csv").write_text(
        matrix_to_csv(matrix), encoding="utf-8"
    )
    (out_dir / "diff_heatmap.svg").write_text(
        render_heatmap(matrix, title=f"update magnitude ({scheme.name})"),
        encoding="utf-8",
    )
    (out_dir / "provenance.json").write_text(
        json.dumps(provenance([args.base, args.tuned]), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    print(
        f"diffed {len(entries)} tensors; matrix "
        f"{len(matrix.kinds)}x{matrix.layer_count}, max cell "
        f"{matrix.max_value():.3g} -> {out_dir}"
    )
    return 0


def _parse_layer_range(spec: str) -> LayerRange:
    # human-facing inclusive 1-indexed "11-16"
    try:
        start, end = (int(v) for v in spec.split("-", 1))
    except ValueError as exc:
        raise ConfigError(f"bad layer range {spec!r}, expected e.g. 11-16") from exc
    if start < 1:
        raise ConfigError("layer ranges are 1-indexed")
    return LayerRange(start - 1, end - 1)


def cmd_plan(args) -> int:
    from .schemes import load_scheme

    scheme = load_scheme(args.scheme)
    manifest = read_manifest(args.manifest)
    if args.mode == "final-k":
        if args.k is None:
            raise ConfigError("--k is required for final-k plans")
        plan = plan_final_layers(manifest, scheme, args.k, args.include_head)
    elif args.mode == "matched-prefix":
        if args.reference_plan:
            reference, _ = load_plan(args.reference_plan)
        elif args.reference_k is not None:
            reference = plan_final_layers(manifest, scheme, args.reference_k)
        else:
            raise ConfigError(
                "matched-prefix needs --reference-k or --reference-plan"
            )
        plan = plan_matched_prefix(manifest, scheme, reference)
    elif args.mode == "top-delta":
        if not args.matrix or args.fraction is None:
            raise ConfigError("top-delta needs --matrix and --fraction")
        matrix = matrix_from_csv(Path(args.matrix).read_text(encoding="utf-8"))
        plan = plan_from_delta(matrix, manifest, scheme, args.fraction)
    elif args.mode == "explicit":
        if not args.layers:
            raise ConfigError("explicit mode needs --layers A-B (1-indexed)")
        plan = plan_explicit(
            manifest, scheme, _parse_layer_range(args.layers), args.include_head
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown mode {args.mode!r}")

    template = (
        multilingual_template(args.per_language_examples)
        if args.multilingual
        else TrainConfigTemplate()
    )
    emit_plan(plan, template, args.out)
    layers = plan.trainable_layers()
    span = (
        f"layers {layers[0] + 1}-{layers[-1] + 1} (1-indexed)"
        if layers
        else "no layers"
    )
    print(
        f"{plan.rationale} plan: {span}, "
        f"{plan.trainable_param_count}/{plan.total_param_count} params "
        f"trainable -> {args.out}"
    )
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    formats = set(args.format.split(",")) if args.format else {"md", "csv", "json", "svg"}
    inputs = []
    bundle = ReportBundle(provenance={})

    table_entries = []
    for metrics_path in args.metrics or []:
        inputs.append(metrics_path)
        payload = json.loads(Path(metrics_path).read_text(encoding="utf-8"))
        for item in payload:
            ratio = item.get("ratio_simplified")
            if ratio is None:
                ratio = item.get("ratio_general")
            table_entries.append(
                {
                    "model_tag": item.get("model_tag", "model"),
                    "language": item["input_language"],
                    "ratio": ratio if ratio is not None else metrics.UNDEFINED,
                    "acc": item["cumulative_accuracy"],
                }
            )
    if table_entries:
        bundle.cococola_table = render_cococola_table(table_entries)

    if args.accuracy:
        import csv as _csv

        inputs.append(args.accuracy)
        with Path(args.accuracy).open(encoding="utf-8") as fh:
            rows = [
                {
                    "model": r["model"],
                    "language": r["language"],
                    "plm": float(r["plm"]),
                    "sft": float(r["sft"]),
                }
                for r in _csv.DictReader(fh)
            ]
        bundle.accuracy_table = render_accuracy_table(rows)

    matrices = []
    for diff_path in args.diff or []:
        inputs.append(diff_path)
        matrices.append(
            (Path(diff_path).stem, matrix_from_csv(Path(diff_path).read_text()))
        )
    if matrices:
        lo = min(m.min_value() for _, m in matrices)
        hi = max(m.max_value() for _, m in matrices)
        for name, matrix in matrices:
            bundle.heatmap_figures[f"{name}_per_matrix"] = render_heatmap(
                matrix, title=f"update magnitude ({name})"
            )
            bundle.heatmap_figures[f"{name}_global"] = render_heatmap(
                matrix,
                normalization="global",
                global_bounds=(lo, hi),
                title=f"update magnitude ({name}, shared scale)",
            )

    bundle.provenance = provenance(inputs)
    written = bundle.write(out_dir)
    kept = []
    for path in written:
        if path.suffix.lstrip(".") not in formats and path.name != "provenance.json":
            path.unlink()
        else:
            kept.append(path)
    print(f"wrote {len(kept)} report artifacts -> {out_dir}")
    return 0


def cmd_demo(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    n_rows = write_corpus(corpus_path, demo_rows(args.seed))
    corpus = ingest_corpus(corpus_path)
    log_paths = []
    for lang in args.languages.split(","):
        records, _ = constructed_log(corpus, lang, seed=args.seed)
        path = out_dir / f"log_{lang}.jsonl"
        write_log(path, records)
        log_paths.append(path)
    profiles = langid.build_profiles(corpus)
    langid.save_profiles(profiles, out_dir / "profiles.json")
    print(
        f"demo corpus ({n_rows} rows) + {len(log_paths)} constructed logs "
        f"+ profiles -> {out_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langadhere",
        description="Language-adherence metrics, checkpoint diffing, and "
        "freeze plans for multilingual LLM evaluation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_corpus(p):
        p.add_argument("--config", help="INI config with per-module sections")
        p.add_argument("--corpus", help="corpus JSONL path")
        p.add_argument("--languages", help="comma-separated declared languages")
        p.add_argument(
            "--strict",
            dest="policy",
            action="store_const",
            const="strict",
            help="error on partial rows (default)",
        )
        p.add_argument(
            "--quarantine",
            dest="policy",
            action="store_const",
            const="quarantine",
            help="drop partial rows across all languages and count them",
        )

    p = sub.add_parser("ingest", help="validate a corpus file")
    common_corpus(p)
    p.add_argument("--out", help="write a JSON summary here")
    p.add_argument(
        "--build-profiles",
        help="also build langid profiles from the training split and save "
        "them to this JSON path",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("evaluate", help="judge logs and compute all metrics")
    common_corpus(p)
    p.add_argument("--log", nargs="+", required=True)
    p.add_argument("--profiles", help="langid profiles JSON for diagnostics")
    p.add_argument("--reference", default="en")
    p.add_argument("--emit-verdicts", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser(
        "cococola", help="adherence ratio on the filtered subset"
    )
    common_corpus(p)
    p.add_argument("--log", nargs="+", required=True)
    p.add_argument("--language", required=True, help="input language L_i")
    p.add_argument("--profiles")
    p.add_argument("--reference", default="en")
    p.add_argument("--emit-verdicts", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cococola)

    p = sub.add_parser("overlap", help="cross-language correct-answer overlap")
    common_corpus(p)
    p.add_argument("--log", nargs="+", required=True)
    p.add_argument(
        "--correct-in",
        choices=("input", "cumulative"),
        default="input",
        help="count answers correct in the input language only, or also in "
        "the reference language",
    )
    p.add_argument("--reference", default="en")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("diff", help="per-layer checkpoint update magnitudes")
    p.add_argument("--config")
    p.add_argument("--base", required=True)
    p.add_argument("--tuned", required=True)
    p.add_argument("--scheme", default=None, help="llama|gemma|toy|scheme.json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("plan", help="emit a freeze plan for partial training")
    p.add_argument("--config")
    p.add_argument("--manifest", required=True, help="checkpoint to plan for")
    p.add_argument("--scheme", default=None)
    p.add_argument(
        "--mode",
        required=True,
        choices=("final-k", "matched-prefix", "top-delta", "explicit"),
    )
    p.add_argument("--k", type=int)
    p.add_argument("--reference-k", type=int)
    p.add_argument("--reference-plan")
    p.add_argument("--fraction", type=float)
    p.add_argument("--matrix", help="diff matrix CSV for top-delta")
    p.add_argument("--layers", help="explicit 1-indexed range, e.g. 11-16")
    p.add_argument("--include-head", action="store_true")
    p.add_argument("--multilingual", action="store_true")
    p.add_argument("--per-language-examples", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("report", help="render tables and figures")
    p.add_argument("--config")
    p.add_argument("--metrics", nargs="*", help="metrics JSON files")
    p.add_argument("--diff", nargs="*", help="diff matrix CSV files")
    p.add_argument("--accuracy", help="CSV with model,language,plm,sft")
    p.add_argument("--format", help="comma list of md,csv,json,svg")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("demo", help="write the bundled fixture corpus and logs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--languages", default="fr,de,hi")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if getattr(args, "scheme", "unset") is None:
            args.scheme = "llama"
        if getattr(args, "corpus", "unset") is None:
            raise ConfigError("--corpus is required (flag or config)")
        return args.func(args)
    except (ToolkitError, OSError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        # malformed user-supplied file contents (bad JSON, missing keys,
        # non-numeric cells) surface as structured errors, not tracebacks
        print(
            f"error [{args.command}]: invalid input data: {exc}",
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
