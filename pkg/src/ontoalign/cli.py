"""Command-line pipelines: ingest, smartids, corpus, match, eval.

Every command is deterministic given its inputs and ``--seed``; file outputs
carry a provenance comment (tool version, config hash, seed). Exit codes:
0 success, 1 I/O or parse failure, 2 data invariant violation, 3
translator/protocol failure.

A JSON config file (``--config``) may pre-set any flag by its destination
name; explicit flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    AugmentationConfig,
    MaskingSchedule,
    build_finetune_corpus,
    build_pretrain_corpus,
    write_corpus,
)
from .engine import DecodeConfig, TaskId, TaskRegistry, match_ontologies, similarity_score
from .errors import (
    DataInvariantError,
    MetricError,
    OntoAlignError,
    ParseError,
    TranslatorError,
)
from .evalmetrics import (
    accuracy,
    hits_at_k,
    mrr,
    pr_curve,
    precision_recall_f,
    read_mapping_file,
    read_ranking_file,
    render_report,
    write_manifest,
    write_mapping_file,
)
from .ontology import description_set, dump_ontology, load_ontology_path, validate_graph
from .smartids import assign_smartids, build_trie, export_table, load_table
from .translators import EditSimilarityTranslator, Translator, WireTranslator

EXIT_OK = 0
EXIT_IO = 1
EXIT_DATA = 2
EXIT_TRANSLATOR = 3


def _config_hash(params: dict) -> str:
    canonical = json.dumps(params, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _provenance(command: str, seed: int, params: dict) -> str:
    return f"ontoalign {command} v{__version__} seed={seed} config={_config_hash(params)}"


def _ontology_id(path: str, explicit: str | None = None) -> str:
    return explicit if explicit else Path(path).stem


def _make_translator(spec: str, graph, table, trie, singularize: bool) -> Translator:
    if spec == "edit":
        return EditSimilarityTranslator(graph, table, trie, singularize=False)
    if spec.startswith("wire:"):
        return WireTranslator.from_spec(spec[len("wire:") :])
    raise TranslatorError(f"unknown translator spec {spec!r} (use 'edit' or 'wire:<address>')")


def cmd_ingest(args: argparse.Namespace) -> int:
    graph = load_ontology_path(args.input, _ontology_id(args.input, args.ontology_id))
    report = validate_graph(graph)
    print(f"ontology_id={graph.ontology_id}")
    print(f"classes={report.classes}")
    print(f"roots={report.roots}")
    print(f"multi_parent={report.multi_parent}")
    print(f"max_depth={report.max_depth}")
    print(f"errors={len(report.errors)}")
    for error in report.errors:
        print(f"error: {error}")
    if args.out:
        params = {"command": "ingest", "input": Path(args.input).name}
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(f"# {_provenance('ingest', args.seed, params)}\n")
            for line in dump_ontology(graph):
                handle.write(line + "\n")
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_smartids(args: argparse.Namespace) -> int:
    graph = load_ontology_path(args.input, _ontology_id(args.input, args.ontology_id))
    table = assign_smartids(graph, path_cap=args.path_cap)
    params = {
        "command": "smartids",
        "input": Path(args.input).name,
        "path_cap": args.path_cap,
    }
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(f"# {_provenance('smartids', args.seed, params)}\n")
        for line in export_table(table):
            handle.write(line + "\n")
    print(f"classes_with_ids={len(table.smart_of)}")
    print(f"path_ids={len(table.node_of)}")
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    graphs = [load_ontology_path(path, _ontology_id(path)) for path in args.graph]
    tables = [assign_smartids(graph, path_cap=args.path_cap) for graph in graphs]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    params = {
        "command": "corpus",
        "split": args.split,
        "graphs": [Path(p).name for p in args.graph],
        "path_cap": args.path_cap,
    }
    warnings: list[str] = []
    if args.split == "pretrain":
        schedule = MaskingSchedule(args.start_ratio, args.end_ratio, 1)
        params["schedule"] = [args.start_ratio, args.end_ratio]
        instances = build_pretrain_corpus(graphs, tables, schedule, args.seed)
        schedule_info = {"start_ratio": args.start_ratio, "end_ratio": args.end_ratio}
    else:
        cross = [load_ontology_path(p, _ontology_id(p)) for p in args.cross]
        prior = [load_ontology_path(p, _ontology_id(p)) for p in args.prior]
        params["cross"] = [Path(p).name for p in args.cross]
        params["prior"] = [Path(p).name for p in args.prior]
        augmentation = AugmentationConfig(cross_subset_sources=cross, prior_versions=prior)
        instances, warnings = build_finetune_corpus(graphs, tables, augmentation)
        schedule_info = None

    corpus_path = out_dir / f"{args.split}.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        handle.write(f"# {_provenance('corpus', args.seed, params)}\n")
        counts = write_corpus(instances, handle)

    manifest = {
        "version": __version__,
        "split": args.split,
        "seed": args.seed,
        "config": _config_hash(params),
        "schedule": schedule_info,
        "counts": counts,
        "total": sum(counts.values()),
        "warnings": warnings,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        write_manifest(handle, manifest)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"instances={manifest['total']}")
    print(f"corpus={corpus_path}")
    return EXIT_OK


def cmd_match(args: argparse.Namespace) -> int:
    source_graph = load_ontology_path(args.source, _ontology_id(args.source))
    target_graph = load_ontology_path(args.target, _ontology_id(args.target))
    if args.table:
        with open(args.table, "r", encoding="utf-8") as handle:
            table = load_table(handle, target_graph.ontology_id)
    else:
        table = assign_smartids(target_graph, path_cap=args.path_cap)
    trie = build_trie(table)
    registry = TaskRegistry()
    registry.register(TaskId(args.task, source_graph.ontology_id, target_graph.ontology_id))
    task = registry.get(args.task)
    config = DecodeConfig(
        mode=args.decode,
        beam_width=args.beam_width,
        temperature=args.temperature,
        max_depth=args.max_depth,
    )
    singularize = not args.no_singularize
    translator = _make_translator(args.translator, target_graph, table, trie, singularize)
    try:
        outcome = match_ontologies(
            source_graph,
            target_graph,
            table,
            trie,
            translator,
            task,
            config,
            threshold=args.threshold,
            scoring=args.mode,
            singularize=singularize,
        )
    finally:
        translator.close()

    params = {
        "command": "match",
        "task": args.task,
        "source": Path(args.source).name,
        "target": Path(args.target).name,
        "translator": args.translator,
        "threshold": args.threshold,
        "mode": args.mode,
        "decode": args.decode,
        "beam_width": args.beam_width,
        "temperature": args.temperature,
        "singularize": singularize,
    }
    with open(args.out, "w", encoding="utf-8") as handle:
        write_mapping_file(
            handle,
            ((m.source_id, m.target_id, m.score) for m in outcome.mappings),
            provenance=_provenance("match", args.seed, params),
        )
    print(f"mappings={len(outcome.mappings)}")
    if outcome.failures:
        print(f"translator_failures={len(outcome.failures)}", file=sys.stderr)
    return EXIT_OK


def _score_ranking_cases(args: argparse.Namespace, cases):
    """Score every (source, candidate) pair with the validation scorer."""
    source_graph = load_ontology_path(args.source, _ontology_id(args.source))
    target_graph = load_ontology_path(args.target, _ontology_id(args.target))
    table = assign_smartids(target_graph, path_cap=args.path_cap)
    trie = build_trie(table)
    task = TaskId(args.task, source_graph.ontology_id, target_graph.ontology_id)
    translator = _make_translator(args.translator, target_graph, table, trie, False)
    singularize = not args.no_singularize
    embed_cache: dict = {}
    scored = []
    try:
        for case in cases:
            omega1 = description_set(source_graph, case.source_id, singularize)
            scores: dict[str, float] = {}
            for target in (case.reference_target_id, *case.negative_targets):
                omega2 = description_set(target_graph, target, singularize)
                if args.rank_with_exact and omega1.terms & omega2.terms:
                    scores[target] = 1.0
                else:
                    scores[target] = similarity_score(translator, task, omega1, omega2, embed_cache)
            scored.append(case.with_scores(scores))
    finally:
        translator.close()
    return scored


def cmd_eval(args: argparse.Namespace) -> int:
    with open(args.mappings, "r", encoding="utf-8") as handle:
        m_out = read_mapping_file(handle)
    with open(args.reference, "r", encoding="utf-8") as handle:
        m_ref = read_mapping_file(handle)

    precision, recall, f_score = precision_recall_f(m_out, m_ref, beta=args.beta)
    acc = accuracy(m_out.predictions(), m_ref)

    params = {
        "command": "eval",
        "mappings": Path(args.mappings).name,
        "reference": Path(args.reference).name,
        "beta": args.beta,
        "k": sorted(args.k),
    }
    sections: list[tuple[str, object]] = [
        ("mappings_file", Path(args.mappings).name),
        ("reference_file", Path(args.reference).name),
        ("output_pairs", len(m_out)),
        ("reference_pairs", len(m_ref)),
        ("intersection", len(m_out.pairs & m_ref.pairs)),
        ("beta", args.beta),
        ("precision", precision),
        ("recall", recall),
        ("f_beta", f_score),
        ("accuracy", acc),
    ]

    if args.ranking:
        if not (args.source and args.target and args.task):
            raise ParseError("--ranking needs --source, --target and --task for scoring")
        with open(args.ranking, "r", encoding="utf-8") as handle:
            cases = read_ranking_file(handle)
        cases = _score_ranking_cases(args, cases)
        params["ranking"] = Path(args.ranking).name
        params["rank_with_exact"] = args.rank_with_exact
        sections.append(("ranking_cases", len(cases)))
        for k in sorted(args.k):
            sections.append((f"hits@{k}", hits_at_k(cases, k)))
        sections.append(("mrr", mrr(cases)))

    report = render_report(sections, provenance=_provenance("eval", args.seed, params))
    sys.stdout.write(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(report)

    if args.curve_out or args.plot_out:
        points = pr_curve(m_out, m_ref, beta=args.beta)
        if args.curve_out:
            with open(args.curve_out, "w", encoding="utf-8") as handle:
                handle.write(f"# {_provenance('eval', args.seed, params)}\n")
                handle.write("threshold\tprecision\trecall\tf\n")
                for threshold, p, r, f in points:
                    handle.write(f"{threshold:.6f}\t{p:.6f}\t{r:.6f}\t{f:.6f}\n")
        if args.plot_out:
            from .plots import save_pr_curve

            save_pr_curve(points, args.plot_out, title=Path(args.mappings).name)
    return EXIT_OK


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="ontoalign", description=__doc__)
    parser.add_argument("--config", help="JSON file of flag defaults", default=None)
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load and validate an ontology file")
    p_ingest.add_argument("--input", default=None)
    p_ingest.add_argument("--ontology-id", default=None)
    p_ingest.add_argument("--out", default=None, help="write the normalized graph here")
    p_ingest.set_defaults(func=cmd_ingest)

    p_smart = sub.add_parser("smartids", help="assign path ids and export the table")
    p_smart.add_argument("--input", default=None)
    p_smart.add_argument("--ontology-id", default=None)
    p_smart.add_argument("--path-cap", type=int, default=64)
    p_smart.add_argument("--out", default=None)
    p_smart.set_defaults(func=cmd_smartids)

    p_corpus = sub.add_parser("corpus", help="emit a training corpus and manifest")
    p_corpus.add_argument("--split", choices=["pretrain", "finetune"], default=None)
    p_corpus.add_argument("--graph", action="append", default=None)
    p_corpus.add_argument("--cross", action="append", default=[])
    p_corpus.add_argument("--prior", action="append", default=[])
    p_corpus.add_argument("--start-ratio", type=float, default=0.10)
    p_corpus.add_argument("--end-ratio", type=float, default=0.35)
    p_corpus.add_argument("--path-cap", type=int, default=64)
    p_corpus.add_argument("--out-dir", default=None)
    p_corpus.set_defaults(func=cmd_corpus)

    p_match = sub.add_parser("match", help="align a source ontology to a target")
    p_match.add_argument("--source", default=None)
    p_match.add_argument("--target", default=None)
    p_match.add_argument("--task", default=None)
    p_match.add_argument("--translator", default="edit")
    p_match.add_argument("--threshold", type=float, default=0.8)
    p_match.add_argument("--mode", choices=["tm1", "tm2"], default="tm1")
    p_match.add_argument("--decode", choices=["greedy", "beam"], default="greedy")
    p_match.add_argument("--beam-width", type=int, default=4)
    p_match.add_argument("--temperature", type=float, default=1.0)
    p_match.add_argument("--max-depth", type=int, default=128)
    p_match.add_argument("--path-cap", type=int, default=64)
    p_match.add_argument("--table", default=None, help="reuse an exported id table")
    p_match.add_argument("--no-singularize", action="store_true")
    p_match.add_argument("--out", default=None)
    p_match.set_defaults(func=cmd_match)

    p_eval = sub.add_parser("eval", help="score a mapping file against a reference")
    p_eval.add_argument("--mappings", default=None)
    p_eval.add_argument("--reference", default=None)
    p_eval.add_argument("--ranking", default=None)
    p_eval.add_argument("--source", default=None)
    p_eval.add_argument("--target", default=None)
    p_eval.add_argument("--task", default=None)
    p_eval.add_argument("--translator", default="edit")
    p_eval.add_argument("--path-cap", type=int, default=64)
    p_eval.add_argument("--rank-with-exact", action="store_true")
    p_eval.add_argument("--no-singularize", action="store_true")
    p_eval.add_argument("--k", action="append", type=int, default=None)
    p_eval.add_argument("--beta", type=float, default=1.0)
    p_eval.add_argument("--out", default=None)
    p_eval.add_argument("--curve-out", default=None)
    p_eval.add_argument("--plot-out", default=None)
    p_eval.set_defaults(func=cmd_eval)

    return parser, [p_ingest, p_smart, p_corpus, p_match, p_eval]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()

    # Apply config-file defaults before the real parse; explicit flags win.
    # Defaults go to every subparser too, since each owns its arguments.
    probe, _ = parser.parse_known_args(argv)
    if probe.config:
        try:
            with open(probe.config, "r", encoding="utf-8") as handle:
                defaults = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {probe.config!r}: {exc}", file=sys.stderr)
            return EXIT_IO
        if not isinstance(defaults, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return EXIT_IO
        parser.set_defaults(**defaults)
        for sub in subparsers:
            sub.set_defaults(**defaults)

    args = parser.parse_args(argv)
    if getattr(args, "k", "absent") is None:
        args.k = [1, 5]
    required = {
        "ingest": ("input",),
        "smartids": ("input", "out"),
        "corpus": ("split", "graph", "out_dir"),
        "match": ("source", "target", "task", "out"),
        "eval": ("mappings", "reference"),
    }
    missing = [
        f"--{name.replace('_', '-')}"
        for name in required[args.command]
        if getattr(args, name) is None
    ]
    if missing:
        print(
            f"error: {args.command} needs {', '.join(missing)} (flag or config file)",
            file=sys.stderr,
        )
        return EXIT_IO
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TranslatorError as exc:
        print(f"error: translator: {exc}", file=sys.stderr)
        return EXIT_TRANSLATOR
    except (DataInvariantError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OntoAlignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
