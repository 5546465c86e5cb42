"""Pipeline entry point: reproducible stages over the documented file formats.

Every stage writes its artifacts plus a manifest into a fresh run directory
(timestamp + config hash under the configured output dir, or --run-dir).
Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, analysis, annotation, corpus, depmatch, evaluate, features, models, weaksup
from .manifest import build_manifest, config_hash, write_manifest

log = logging.getLogger("wirref")

SUBCOMMANDS = (
    "ingest", "extract", "stats", "agreement", "lf-apply", "label-model", "silver",
    "sample-review", "export-pairs", "train", "predict", "cv", "score", "analyze",
)

DEFAULT_CONFIG = {
    "paths": {"output_dir": "runs"},
    "features": {
        "window": 20,
        "use_unigrams": True,
        "use_bigrams": True,
        "use_trigrams": False,
        "tfidf": True,
        "lemmatise": True,
        "remove_stopwords": False,
        "select_k": 300,
        "include_wordform": True,
        "include_ner": False,
    },
    "linear": {"regularization": 1e-4, "epochs": 50, "seed": 42},
    "cv": {"folds": 5, "seed": 42, "stratified": True},
    "weaksup": {
        "max_iter": 100,
        "tol": 1e-6,
        "seed": 42,
        "downsample_cap": 300,
        "review_sample_size": 25,
        "review_seed": 42,
    },
    "regime": "T1",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; the contract says 1
        raise UsageError(message)


def load_config(path: str | None) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        for section, values in user.items():
            if isinstance(values, dict):
                config.setdefault(section, {}).update(values)
            else:
                config[section] = values
    return config


def feature_config_from(config: dict) -> features.FeatureConfig:
    return features.FeatureConfig(**config["features"])


def _segments_from(args, config) -> list:
    path = args.segments or config["paths"].get("corpus")
    if not path:
        raise UsageError("no corpus given: pass --segments or set paths.corpus in the config")
    fmt = getattr(args, "format", None) or "jsonl"
    return corpus.ingest(path, fmt), path


def _start_run(stage: str, config: dict, run_dir: str | None) -> tuple:
    if run_dir:
        out = Path(run_dir)
        if out.exists() and any(out.iterdir()):
            raise UsageError(f"run directory {out} exists and is not empty")
    else:
        base = Path(config["paths"].get("output_dir", "runs"))
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = base / f"{stage}-{stamp}-{config_hash(config)[:8]}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish_run(stage, config, run_dir, inputs, outputs, seeds):
    manifest = build_manifest(stage, __version__, config, inputs, outputs, seeds)
    write_manifest(manifest, run_dir / "manifest.json")
    for name in sorted(outputs):
        print(f"wrote {run_dir / name}")
    print(f"wrote {run_dir / 'manifest.json'}")


# ---------------------------------------------------------------------------
# stages

def stage_ingest(args, config, run_dir):
    segments = corpus.ingest(args.corpus, args.format)
    out = run_dir / "segments.jsonl"
    corpus.emit_jsonl(segments, out)
    print(f"ingested {len(segments)} segments from {args.corpus}")
    return {"corpus": args.corpus}, {"segments.jsonl": out}, {}


def stage_extract(args, config, run_dir):
    segments, path = _segments_from(args, config)
    instances = corpus.extract_instances(segments)
    out = run_dir / "instances.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps({
                "instance_id": inst.instance_id,
                "form": inst.form,
                "doc_id": inst.doc_id,
                "segment": inst.segment_index,
                "flat_token_index": inst.flat_token_index,
            }, ensure_ascii=False) + "\n")
    print(f"extracted {len(instances)} pronoun instances from {len(segments)} segments")
    return {"segments": path}, {"instances.jsonl": out}, {}


def stage_stats(args, config, run_dir):
    segments, path = _segments_from(args, config)
    instances = corpus.extract_instances(segments)
    stats = corpus.corpus_stats(segments, instances, group_by=args.group_by)
    table = corpus.format_stats_table(stats)
    out_txt = run_dir / "stats.txt"
    out_txt.write_text(table + "\n", encoding="utf-8")
    out_json = run_dir / "stats.json"
    with open(out_json, "w", encoding="utf-8") as fh:
        json.dump({
            "group_by": stats.group_by,
            "tokens": stats.tokens,
            "instances": stats.instances,
            "speakers": stats.speakers,
            "rate_per_1000": stats.rate_per_1000,
            "total_tokens": stats.total_tokens,
            "total_instances": stats.total_instances,
            "total_rate_per_1000": stats.total_rate_per_1000,
        }, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    print(table)
    return {"segments": path}, {"stats.txt": out_txt, "stats.json": out_json}, {}


def stage_agreement(args, config, run_dir):
    records_a = annotation.read_annotations(args.ann_a)
    records_b = annotation.read_annotations(args.ann_b)
    annotator_a = records_a[0].annotator_id
    annotator_b = records_b[0].annotator_id
    inputs = {"annotations_a": args.ann_a, "annotations_b": args.ann_b}
    if args.gold:
        gold = annotation.read_gold(args.gold)
        inputs["gold"] = args.gold
    else:
        resolutions = {}
        if args.resolutions:
            res_records = annotation.read_annotations(args.resolutions)
            resolutions = {r.instance_id: r.label for r in res_records}
            inputs["resolutions"] = args.resolutions
        gold = annotation.adjudicate(records_a, records_b, resolutions)
        annotation.write_gold(gold, run_dir / "gold.jsonl")
    report = annotation.agreement_report(records_a + records_b, annotator_a, annotator_b, gold)
    text = annotation.format_agreement_report(report)
    (run_dir / "agreement.txt").write_text(text + "\n", encoding="utf-8")
    with open(run_dir / "agreement.json", "w", encoding="utf-8") as fh:
        json.dump({
            "alpha": report.alpha,
            "percent_agreement": report.percent_agreement,
            "micro_f1": report.micro_f1,
            "per_class_f1": {cls.name: report.per_class_f1[cls] for cls in annotation.RefClass},
            "support": {cls.name: report.support[cls] for cls in annotation.RefClass},
            "confusion": report.confusion.tolist(),
        }, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    print(text)
    outputs = {"agreement.txt": run_dir / "agreement.txt", "agreement.json": run_dir / "agreement.json"}
    if not args.gold:
        outputs["gold.jsonl"] = run_dir / "gold.jsonl"
    return inputs, outputs, {}


def stage_lf_apply(args, config, run_dir):
    segments, path = _segments_from(args, config)
    patterns = depmatch.load_patterns(args.patterns)
    if args.exclude_docs:
        drop = {l.strip() for l in Path(args.exclude_docs).read_text(encoding="utf-8").splitlines() if l.strip()}
        before = len(segments)
        segments = [s for s in segments if s.doc_id not in drop]
        print(f"excluded {before - len(segments)} segments from {len(drop)} held-out documents")
    test_docs = []
    if args.test_docs:
        test_docs = [l.strip() for l in Path(args.test_docs).read_text(encoding="utf-8").splitlines() if l.strip()]
    matrix = weaksup.build_matrix(patterns, segments, test_doc_ids=test_docs or None)
    weaksup.write_matrix_tsv(matrix, run_dir / "matrix.tsv")
    table = depmatch.match_all(patterns, segments)
    (run_dir / "hits.txt").write_text(depmatch.format_hit_table(patterns, table) + "\n", encoding="utf-8")
    print(f"{len(matrix.instance_ids)} instances with votes, {matrix.n_excluded} without")
    inputs = {"segments": path, "patterns": args.patterns}
    if args.test_docs:
        inputs["test_docs"] = args.test_docs
    if args.exclude_docs:
        inputs["exclude_docs"] = args.exclude_docs
    return inputs, {"matrix.tsv": run_dir / "matrix.tsv", "hits.txt": run_dir / "hits.txt"}, {}


def stage_label_model(args, config, run_dir):
    matrix = weaksup.read_matrix_tsv(args.matrix)
    ws = config["weaksup"]
    params = weaksup.fit_label_model(matrix, max_iter=ws["max_iter"], tol=ws["tol"], seed=ws["seed"])
    weaksup.write_label_model(params, run_dir / "label_model.json")
    print(f"EM converged after {len(params.log_likelihood_trace)} iterations "
          f"(final log-likelihood {params.log_likelihood_trace[-1]:.4f})")
    return {"matrix": args.matrix}, {"label_model.json": run_dir / "label_model.json"}, {"weaksup": ws["seed"]}


def stage_silver(args, config, run_dir):
    matrix = weaksup.read_matrix_tsv(args.matrix)
    if args.method == "majority":
        silver = weaksup.majority_vote(matrix)
    else:
        params = weaksup.read_label_model(args.params)
        silver = weaksup.predict_silver(matrix, params)
    cap = args.cap if args.cap is not None else config["weaksup"]["downsample_cap"]
    seed = config["weaksup"]["seed"]
    if cap >= 0:
        silver = weaksup.downsample(silver, cap, seed)
    weaksup.write_silver(silver, matrix, run_dir / "silver.jsonl")
    print(f"wrote {len(silver)} silver labels (method={args.method}, cap={cap})")
    inputs = {"matrix": args.matrix}
    if args.method != "majority":
        inputs["label_model"] = args.params
    return inputs, {"silver.jsonl": run_dir / "silver.jsonl"}, {"downsample": seed}


def stage_sample_review(args, config, run_dir):
    segments, path = _segments_from(args, config)
    silver = weaksup.read_silver(args.silver)
    matrix = weaksup.read_matrix_tsv(args.matrix) if args.matrix else None
    ws = config["weaksup"]
    n = args.n if args.n is not None else ws["review_sample_size"]
    rows = weaksup.sample_for_review(
        silver, corpus.index_segments(segments), n_per_class=n, seed=ws["review_seed"], matrix=matrix
    )
    (run_dir / "review.tsv").write_text(weaksup.format_review_sheet(rows), encoding="utf-8")
    print(f"sampled {len(rows)} instances for review")
    inputs = {"segments": path, "silver": args.silver}
    if args.matrix:
        inputs["matrix"] = args.matrix
    return inputs, {"review.tsv": run_dir / "review.tsv"}, {"review": ws["review_seed"]}


def stage_export_pairs(args, config, run_dir):
    segments, path = _segments_from(args, config)
    segindex = corpus.index_segments(segments)
    instances = corpus.extract_instances(segments)
    gold = None
    inputs = {"segments": path}
    if args.gold:
        gold = annotation.gold_as_dict(annotation.read_gold(args.gold))
        inputs["gold"] = args.gold
    if args.silver:
        silver = weaksup.read_silver(args.silver)
        silver_ids = {s.instance_id for s in silver}
        gold = dict(gold or {})
        gold.update({s.instance_id: s.hard_label for s in silver})
        instances = [i for i in instances if i.instance_id in silver_ids or (args.gold and i.instance_id in gold)]
        inputs["silver"] = args.silver
    rows = corpus.export_pairs(instances, segindex, gold)
    corpus.write_pairs(rows, run_dir / "pairs.jsonl")
    print(f"exported {len(rows)} sentence pairs")
    return inputs, {"pairs.jsonl": run_dir / "pairs.jsonl"}, {}


def stage_train(args, config, run_dir):
    segments, path = _segments_from(args, config)
    segindex = corpus.index_segments(segments)
    gold = annotation.gold_as_dict(annotation.read_gold(args.gold))
    inputs = {"segments": path, "gold": args.gold}
    outputs = {}
    if args.model == "majority":
        items = []
        for instance_id, label in sorted(gold.items()):
            seg, flat = corpus.resolve_instance(instance_id, segindex)
            items.append((seg.token_at(flat).form, label))
        model = models.fit_majority(items)
        models.write_majority(model, run_dir / "majority.json")
        (run_dir / "majority.txt").write_text(models.format_majority_table(model) + "\n", encoding="utf-8")
        outputs = {"majority.json": run_dir / "majority.json", "majority.txt": run_dir / "majority.txt"}
    elif args.model == "linear":
        fc = feature_config_from(config)
        ids = sorted(gold)
        instances = [corpus.instance_from_id(i, segindex) for i in ids]
        vocab = features.fit_vocabulary(instances, gold, segindex, fc)
        x = features.transform_many(instances, vocab, segindex)
        y = [gold[i].value for i in ids]
        hyper = models.LinearHyper(
            regularization=config["linear"]["regularization"],
            epochs=config["linear"]["epochs"],
            seed=config["linear"]["seed"],
        )
        model = models.fit_linear(x, np.array(y), hyper)
        models.write_linear(model, run_dir / "linear_weights.tsv", run_dir / "linear_meta.json")
        features.write_vocabulary(vocab, run_dir / "vocabulary.tsv")
        outputs = {
            "linear_weights.tsv": run_dir / "linear_weights.tsv",
            "linear_meta.json": run_dir / "linear_meta.json",
            "vocabulary.tsv": run_dir / "vocabulary.tsv",
        }
    else:
        raise UsageError("train supports --model majority or linear (rules need no training)")
    print(f"trained {args.model} model on {len(gold)} gold instances")
    return inputs, outputs, {"linear": config["linear"]["seed"]}


def stage_predict(args, config, run_dir):
    segments, path = _segments_from(args, config)
    segindex = corpus.index_segments(segments)
    instances = corpus.extract_instances(segments)
    ids = [i.instance_id for i in instances]
    inputs = {"segments": path}
    if args.model == "majority":
        model = models.read_majority(Path(args.model_dir) / "majority.json")
        inputs["model"] = str(Path(args.model_dir) / "majority.json")
        predictions = {i.instance_id: models.predict_majority(model, i.form) for i in instances}
    elif args.model == "linear":
        model_dir = Path(args.model_dir)
        fc = feature_config_from(config)
        vocab = features.read_vocabulary(model_dir / "vocabulary.tsv", fc)
        model = models.read_linear(model_dir / "linear_weights.tsv", model_dir / "linear_meta.json")
        inputs["model"] = str(model_dir / "linear_weights.tsv")
        x = features.transform_many(instances, vocab, segindex)
        labels = models.predict_linear_many(model, x)
        predictions = dict(zip(ids, labels))
    else:  # rule
        patterns = depmatch.load_patterns(args.patterns)
        params = weaksup.read_label_model(args.params)
        inputs["patterns"] = args.patterns
        inputs["label_model"] = args.params
        predictions = models.predict_rule_based(patterns, params, segments, ids)
    evaluate.write_predictions(predictions, run_dir / "predictions.jsonl")
    covered = sum(1 for v in predictions.values() if v is not None)
    print(f"predicted {covered}/{len(predictions)} instances")
    return inputs, {"predictions.jsonl": run_dir / "predictions.jsonl"}, {}


def stage_cv(args, config, run_dir):
    segments, path = _segments_from(args, config)
    gold = annotation.gold_as_dict(annotation.read_gold(args.gold))
    inputs = {"segments": path, "gold": args.gold}
    regime = args.regime or config["regime"]
    kwargs = {"regime": regime}
    if args.silver:
        kwargs["silver"] = weaksup.read_silver(args.silver)
        inputs["silver"] = args.silver
    if args.model == "rule":
        kwargs["patterns"] = depmatch.load_patterns(args.patterns)
        kwargs["label_params"] = weaksup.read_label_model(args.params)
        inputs["patterns"] = args.patterns
        inputs["label_model"] = args.params
    if args.model == "linear":
        kwargs["feature_config"] = feature_config_from(config)
        kwargs["hyper"] = models.LinearHyper(
            regularization=config["linear"]["regularization"],
            epochs=config["linear"]["epochs"],
            seed=config["linear"]["seed"],
        )
    plan = evaluate.CVPlan(k=config["cv"]["folds"], seed=config["cv"]["seed"],
                           stratified=config["cv"]["stratified"])
    report, predictions, folds = evaluate.cross_validate(args.model, gold, plan, segments, **kwargs)
    evaluate.write_folds(folds, run_dir / "folds.jsonl")
    evaluate.write_predictions(predictions, run_dir / "predictions.jsonl")
    with open(run_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(evaluate.report_to_json(report), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    text = evaluate.format_report(report)
    (run_dir / "report.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    outputs = {
        "folds.jsonl": run_dir / "folds.jsonl",
        "predictions.jsonl": run_dir / "predictions.jsonl",
        "report.json": run_dir / "report.json",
        "report.txt": run_dir / "report.txt",
    }
    return inputs, outputs, {"cv": config["cv"]["seed"], "linear": config["linear"]["seed"]}


def stage_score(args, config, run_dir):
    gold = annotation.gold_as_dict(annotation.read_gold(args.gold))
    predictions = evaluate.read_predictions(args.pred)
    report = evaluate.score(gold, predictions)
    with open(run_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(evaluate.report_to_json(report), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    text = evaluate.format_report(report)
    (run_dir / "report.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    return (
        {"gold": args.gold, "predictions": args.pred},
        {"report.json": run_dir / "report.json", "report.txt": run_dir / "report.txt"},
        {},
    )


def stage_analyze(args, config, run_dir):
    segments, path = _segments_from(args, config)
    gold = annotation.gold_as_dict(annotation.read_gold(args.gold))
    profile = analysis.build_profiles(gold, segments, group_by=args.group_by)
    analysis.write_profiles_csv(profile, run_dir / "profiles.csv")
    outputs = {"profiles.csv": run_dir / "profiles.csv"}
    if len(profile.groups) >= 2:
        result = analysis.pca(profile, standardize=args.standardize)
        analysis.write_pca_csv(result, profile.groups, run_dir)
        analysis.emit_biplot(result, profile.groups, run_dir / "biplot.svg")
        outputs.update({
            "pca_eigenvalues.csv": run_dir / "pca_eigenvalues.csv",
            "pca_loadings.csv": run_dir / "pca_loadings.csv",
            "pca_scores.csv": run_dir / "pca_scores.csv",
            "biplot.svg": run_dir / "biplot.svg",
        })
    else:
        log.warning("fewer than 2 groups; skipping PCA")
    print(f"analyzed {len(profile.groups)} groups ({args.group_by})")
    return {"segments": path, "gold": args.gold}, outputs, {}


STAGES = {
    "ingest": stage_ingest,
    "extract": stage_extract,
    "stats": stage_stats,
    "agreement": stage_agreement,
    "lf-apply": stage_lf_apply,
    "label-model": stage_label_model,
    "silver": stage_silver,
    "sample-review": stage_sample_review,
    "export-pairs": stage_export_pairs,
    "train": stage_train,
    "predict": stage_predict,
    "cv": stage_cv,
    "score": stage_score,
    "analyze": stage_analyze,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="wirref", description=__doc__)
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--run-dir", help="write outputs here instead of a timestamped directory")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        return p

    p = add("ingest", help="read a corpus file into canonical segment JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", required=True, choices=["conllu", "debate-xml", "jsonl"])

    for name in ("extract", "stats"):
        p = add(name)
        p.add_argument("--segments", help="segment JSONL (defaults to paths.corpus)")
        p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
        if name == "stats":
            p.add_argument("--group-by", default="party", choices=["party", "speaker"])

    p = add("agreement", help="inter-annotator agreement and adjudication")
    p.add_argument("--ann-a", required=True)
    p.add_argument("--ann-b", required=True)
    p.add_argument("--gold", help="existing gold store (skips adjudication)")
    p.add_argument("--resolutions", help="annotation JSONL resolving disagreements")

    p = add("lf-apply", help="apply patterns and build the label matrix")
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--patterns", required=True)
    p.add_argument("--exclude-docs", help="file of doc_ids removed from the corpus first")
    p.add_argument("--test-docs", help="file of doc_ids that must not appear (leakage guard)")

    p = add("label-model", help="fit the generative label model")
    p.add_argument("--matrix", required=True)

    p = add("silver", help="emit silver labels from the matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--params", help="label model JSON (required unless --method majority)")
    p.add_argument("--method", default="label_model", choices=["label_model", "majority"])
    p.add_argument("--cap", type=int, default=None, help="per-class downsampling cap (-1 disables)")

    p = add("sample-review", help="random per-class review sheet")
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--silver", required=True)
    p.add_argument("--matrix")
    p.add_argument("--n", type=int, default=None)

    p = add("export-pairs", help="sentence-pair JSONL for the fine-tuning harness")
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--gold")
    p.add_argument("--silver")

    p = add("train")
    p.add_argument("--model", required=True, choices=["majority", "linear"])
    p.add_argument("--gold", required=True)
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)

    p = add("predict")
    p.add_argument("--model", required=True, choices=["majority", "linear", "rule"])
    p.add_argument("--model-dir")
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--patterns")
    p.add_argument("--params")

    p = add("cv", help="cross-validate a model on the gold store")
    p.add_argument("--model", required=True, choices=["majority", "linear", "rule"])
    p.add_argument("--regime", choices=["T1", "T2", "T3"], default=None)
    p.add_argument("--gold", required=True)
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--silver")
    p.add_argument("--patterns")
    p.add_argument("--params")

    p = add("score", help="score a predictions file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)

    p = add("analyze", help="profiles, PCA and biplot")
    p.add_argument("--gold", required=True)
    p.add_argument("--segments")
    p.add_argument("--format", choices=["conllu", "debate-xml", "jsonl"], default=None)
    p.add_argument("--group-by", default="speaker", choices=["party", "speaker"])
    p.add_argument("--standardize", action="store_true")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        run_dir = _start_run(args.command, config, args.run_dir)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        inputs, outputs, seeds = STAGES[args.command](args, config, run_dir)
        _finish_run(args.command, config, run_dir, inputs, outputs, seeds)
        return 0
    except UsageError as err:
        shutil.rmtree(run_dir, ignore_errors=True)
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as err:
        shutil.rmtree(run_dir, ignore_errors=True)
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - contract: internal errors exit 3
        shutil.rmtree(run_dir, ignore_errors=True)
        print(f"internal error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
