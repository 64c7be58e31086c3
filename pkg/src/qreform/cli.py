"""Command-line pipeline: gen | mine | bucketize | export | baseline | eval.

Every command is deterministic given its config and seed; no wall-clock or
environment entropy anywhere. Outputs are never overwritten without --force.
Validation failures exit with a machine-readable JSON error on stderr and a
distinct exit code per failure family: 2 config, 3 validation, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qreform.baselines import BaselineConfig, run_baseline
from qreform.config import PipelineConfig
from qreform.corpus import Taxonomy, load_log, write_log
from qreform.errors import ConfigError, InputError, ValidationError
from qreform.generator import GeneratorSpec, generate_synthetic_log, write_manifest
from qreform.intents import (AspectLexicon, IntentContext, RetrievalIndex,
                             bucketize, export_dataset,
                             query_categories_from_log, read_bucketed,
                             write_bucketed)
from qreform.metrics import (evaluate_at_k, load_predictions, render_reports,
                             write_reports)
from qreform.miner import (build_coclick_graph, mine_cross_session_coengaged,
                           mine_cross_session_onehop, mine_in_session,
                           write_pairs)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def _resolve(workdir: Path, value: str | Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else workdir / path


def _check_overwrite(paths: list[Path], force: bool) -> None:
    for path in paths:
        if path.exists() and not force:
            raise ConfigError(f"output {path} exists; pass --force to overwrite")


def _load_config(args) -> PipelineConfig:
    if args.config is None:
        raise ConfigError("this command requires --config")
    return PipelineConfig.load(_resolve(Path(args.workdir), args.config))


def _log_path(args, config: PipelineConfig) -> Path:
    if getattr(args, "log", None) is not None:
        return _resolve(Path(args.workdir), args.log)
    if config.paths.log is None:
        raise ConfigError("no log path given (use --log or paths.log in the config)")
    return config.paths.log


def cmd_gen(args) -> int:
    workdir = Path(args.workdir)
    spec = GeneratorSpec.load(_resolve(workdir, args.spec))
    out = _resolve(workdir, args.out)
    manifest_path = out.with_name(out.name + ".manifest.json")
    _check_overwrite([out, manifest_path], args.force)
    log, manifest = generate_synthetic_log(spec, args.seed)
    write_log(log, out)
    write_manifest(manifest, manifest_path)
    print(f"wrote {log.num_events} events in {log.num_sessions} sessions to {out}")
    print(f"planted pairs: {manifest['counts']}")
    return EXIT_OK


def cmd_mine(args) -> int:
    workdir = Path(args.workdir)
    config = _load_config(args)
    taxonomy = (Taxonomy.load(config.paths.taxonomy)
                if config.paths.taxonomy is not None else None)
    log = load_log(_log_path(args, config), taxonomy=taxonomy)
    graph = build_coclick_graph(log, config.miner.signal_filter)
    in_session = mine_in_session(log, max_hops=config.miner.max_hops,
                                 theta_eng=config.miner.theta_eng,
                                 weights=config.signal_weights)
    coengaged = mine_cross_session_coengaged(graph, log,
                                             min_shared=config.miner.min_shared)
    onehop = mine_cross_session_onehop(graph, min_shared=config.miner.min_shared)
    out = _resolve(workdir, args.out)
    counts_path = out.with_name(out.name + ".counts.json")
    _check_overwrite([out, counts_path], args.force)
    write_pairs(in_session + coengaged + onehop, out)
    counts = {
        "in_session": len(in_session),
        "cross_session_coengaged": len(coengaged),
        "cross_session_onehop": len(onehop),
        "total": len(in_session) + len(coengaged) + len(onehop),
    }
    with open(counts_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(counts, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"mined {counts['total']} pairs to {out}: {counts}")
    return EXIT_OK


def cmd_bucketize(args) -> int:
    from qreform.miner import read_pairs

    workdir = Path(args.workdir)
    config = _load_config(args)
    for name in ("taxonomy", "lexicon", "inventory"):
        if getattr(config.paths, name) is None:
            raise ConfigError(f"bucketize requires paths.{name} in the config")
    taxonomy = Taxonomy.load(config.paths.taxonomy)
    lexicon = AspectLexicon.load(config.paths.lexicon)
    index = RetrievalIndex.load(config.paths.inventory)
    log = load_log(_log_path(args, config), taxonomy=taxonomy)
    ctx = IntentContext(taxonomy=taxonomy, lexicon=lexicon, index=index,
                        thresholds=config.intents,
                        query_categories=query_categories_from_log(log))
    pairs = read_pairs(_resolve(workdir, args.pairs))
    out = _resolve(workdir, args.out)
    rejects_path = (_resolve(workdir, args.rejects) if args.rejects
                    else out.with_name(out.name + ".rejects.tsv"))
    _check_overwrite([out, rejects_path], args.force)
    accepted, rejected = bucketize(pairs, ctx)
    write_bucketed(accepted, out)
    with open(rejects_path, "w", encoding="utf-8", newline="\n") as fh:
        for pair, reason in rejected:
            fh.write("\t".join((pair.provenance.value, pair.source_query,
                                pair.target_query, reason)))
            fh.write("\n")
    by_bucket: dict[str, int] = {}
    for pair in accepted:
        by_bucket[pair.bucket.value] = by_bucket.get(pair.bucket.value, 0) + 1
    print(f"bucketed {len(accepted)} pairs ({by_bucket}), "
          f"rejected {len(rejected)} to {rejects_path}")
    return EXIT_OK


def cmd_export(args) -> int:
    workdir = Path(args.workdir)
    pairs = read_bucketed(_resolve(workdir, args.pairs))
    out = _resolve(workdir, args.out)
    manifest_path = out.with_name(out.name + ".manifest.json")
    _check_overwrite([out, manifest_path], args.force)
    counts = export_dataset(pairs, out)
    print(f"exported {counts['total']} instances to {out}: {counts}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    workdir = Path(args.workdir)
    if args.config is not None:
        base = _load_config(args).baseline
    else:
        base = BaselineConfig()
    cfg = BaselineConfig(
        kind=args.kind if args.kind else base.kind,
        seed=args.seed if args.seed is not None else base.seed,
        max_drop_fraction=base.max_drop_fraction,
        min_tokens_to_drop_from=base.min_tokens_to_drop_from,
    )
    out = _resolve(workdir, args.out)
    _check_overwrite([out], args.force)
    count = run_baseline(_resolve(workdir, args.dataset), cfg, out)
    print(f"wrote {count} {cfg.kind} predictions to {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    workdir = Path(args.workdir)
    k = args.k
    if k is None and args.config is not None:
        k = _load_config(args).eval_k
    if k is None:
        k = 1
    reports = []
    for pred_path in args.predictions:
        path = _resolve(workdir, pred_path)
        instances = load_predictions(path)
        if not instances:
            raise ValidationError(f"predictions file {path} is empty")
        reports.append(evaluate_at_k(instances, k, model=Path(pred_path).stem))
    out = _resolve(workdir, args.out)
    text_path = out.with_suffix(".txt") if out.suffix == ".json" \
        else out.with_name(out.name + ".txt")
    _check_overwrite([out, text_path], args.force)
    write_reports(reports, out)
    rendered = render_reports(reports)
    with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rendered)
    print(rendered, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qreform",
        description="Mine, bucket, and evaluate buyer query reformulations.")
    parser.add_argument("--config", help="pipeline config JSON")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for all randomness (gen, baseline)")
    parser.add_argument("--force", action="store_true",
                        help="overwrite existing outputs")
    parser.add_argument("--workdir", default=".",
                        help="base directory for relative paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic session log")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--out", required=True, help="output log (NDJSON)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mine", help="run all three miners over a log")
    p.add_argument("--log", help="session log (defaults to config paths.log)")
    p.add_argument("--out", required=True, help="output pairs TSV")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("bucketize", help="assign intent buckets to mined pairs")
    p.add_argument("--pairs", required=True, help="mined pairs TSV")
    p.add_argument("--log", help="session log (defaults to config paths.log)")
    p.add_argument("--out", required=True, help="output bucketed pairs TSV")
    p.add_argument("--rejects", help="rejected pairs TSV "
                                     "(default: <out>.rejects.tsv)")
    p.set_defaults(func=cmd_bucketize)

    p = sub.add_parser("export", help="export an intent-tagged dataset")
    p.add_argument("--pairs", required=True, help="bucketed pairs TSV")
    p.add_argument("--out", required=True, help="output dataset TSV")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("baseline", help="run a reference reformulator")
    p.add_argument("--dataset", required=True, help="exported dataset TSV")
    p.add_argument("--out", required=True, help="output predictions TSV")
    p.add_argument("--kind", choices=["random_drop", "identity"],
                   help="baseline kind (default from config, else random_drop)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score one or more predictions files")
    p.add_argument("predictions", nargs="+", help="predictions TSV file(s)")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--k", type=int, default=None,
                   help="top-k candidates to score (default from config, else 1)")
    p.set_defaults(func=cmd_eval)
    return parser


def _fail(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except (ValidationError, InputError) as exc:
        return _fail("validation", exc, EXIT_VALIDATION)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
