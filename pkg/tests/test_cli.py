import json
from pathlib import Path

import pytest

from wirref.cli import main
from wirref.manifest import sha256_file

from conftest import FIXTURES

PATTERNS = str(Path(__file__).parent.parent / "src" / "wirref" / "data" / "patterns_v1.yaml")
CORPUS = str(FIXTURES / "fixture_debates.conllu")
GOLD = str(FIXTURES / "fixture_gold.jsonl")


def run(*argv):
    return main(list(argv))


class TestStages:
    def test_ingest_extract_stats(self, tmp_path):
        seg_dir = tmp_path / "seg"
        assert run("--run-dir", str(seg_dir), "ingest", "--corpus", CORPUS,
                   "--format", "conllu") == 0
        segments = seg_dir / "segments.jsonl"
        assert segments.exists()
        assert (seg_dir / "manifest.json").exists()

        ext_dir = tmp_path / "ext"
        assert run("--run-dir", str(ext_dir), "extract", "--segments", str(segments)) == 0
        instances = [json.loads(l) for l in (ext_dir / "instances.jsonl").open()]
        assert len(instances) == 90

        st_dir = tmp_path / "stats"
        assert run("--run-dir", str(st_dir), "stats", "--segments", str(segments),
                   "--group-by", "party") == 0
        stats = json.loads((st_dir / "stats.json").read_text())
        assert stats["total_instances"] == 90

    def test_agreement(self, tmp_path):
        out = tmp_path / "agr"
        assert run("--run-dir", str(out), "agreement",
                   "--ann-a", str(FIXTURES / "annotations_a.jsonl"),
                   "--ann-b", str(FIXTURES / "annotations_b.jsonl"),
                   "--resolutions", str(FIXTURES / "resolutions.jsonl")) == 0
        report = json.loads((out / "agreement.json").read_text())
        assert 0.7 < report["alpha"] < 1.0
        assert (out / "gold.jsonl").exists()

    def test_weak_supervision_chain(self, tmp_path):
        seg_dir = tmp_path / "seg"
        run("--run-dir", str(seg_dir), "ingest", "--corpus", CORPUS, "--format", "conllu")
        segments = str(seg_dir / "segments.jsonl")

        lf_dir = tmp_path / "lf"
        assert run("--run-dir", str(lf_dir), "lf-apply", "--segments", segments,
                   "--patterns", PATTERNS) == 0
        matrix = str(lf_dir / "matrix.tsv")

        lm_dir = tmp_path / "lm"
        assert run("--run-dir", str(lm_dir), "label-model", "--matrix", matrix) == 0
        params = str(lm_dir / "label_model.json")

        sv_dir = tmp_path / "sv"
        assert run("--run-dir", str(sv_dir), "silver", "--matrix", matrix,
                   "--params", params) == 0
        silver = [json.loads(l) for l in (sv_dir / "silver.jsonl").open()]
        assert silver and all("posterior" in s for s in silver)

        rv_dir = tmp_path / "rv"
        assert run("--run-dir", str(rv_dir), "sample-review", "--segments", segments,
                   "--silver", str(sv_dir / "silver.jsonl"), "--matrix", matrix,
                   "--n", "5") == 0
        sheet = (rv_dir / "review.tsv").read_text()
        assert sheet.startswith("instance_id\t")

    def test_lf_apply_leakage_guard(self, tmp_path):
        docs = tmp_path / "docs.txt"
        docs.write_text("btd-19-T01\n")
        out = tmp_path / "lf"
        code = run("--run-dir", str(out), "lf-apply", "--segments", CORPUS,
                   "--format", "conllu", "--patterns", PATTERNS,
                   "--test-docs", str(docs))
        assert code == 2
        assert not out.exists()  # partial outputs removed

    def test_export_pairs(self, tmp_path):
        out = tmp_path / "pairs"
        assert run("--run-dir", str(out), "export-pairs", "--segments", CORPUS,
                   "--format", "conllu", "--gold", GOLD) == 0
        rows = [json.loads(l) for l in (out / "pairs.jsonl").open()]
        assert len(rows) == 90
        labeled = [r for r in rows if "label" in r]
        assert len(labeled) == 55
        assert all(r["s2"].split()[0].casefold() in
                   {"wir", "uns", "unser", "unsre", "unsere", "unserem", "unseren",
                    "unserer", "unseres", "unsrem", "unsren", "unsrer", "unsres"}
                   for r in rows)

    def test_train_predict_score(self, tmp_path):
        train_dir = tmp_path / "model"
        assert run("--run-dir", str(train_dir), "train", "--model", "majority",
                   "--gold", GOLD, "--segments", CORPUS, "--format", "conllu") == 0
        assert (train_dir / "majority.json").exists()

        pred_dir = tmp_path / "pred"
        assert run("--run-dir", str(pred_dir), "predict", "--model", "majority",
                   "--model-dir", str(train_dir), "--segments", CORPUS,
                   "--format", "conllu") == 0

        # score only the gold subset
        predictions = [json.loads(l) for l in (pred_dir / "predictions.jsonl").open()]
        gold_ids = {json.loads(l)["instance_id"] for l in open(GOLD)}
        subset = tmp_path / "subset.jsonl"
        with open(subset, "w") as fh:
            for p in predictions:
                if p["instance_id"] in gold_ids:
                    fh.write(json.dumps(p) + "\n")
        score_dir = tmp_path / "score"
        assert run("--run-dir", str(score_dir), "score", "--gold", GOLD,
                   "--pred", str(subset)) == 0
        report = json.loads((score_dir / "report.json").read_text())
        assert 0 < report["accuracy"] <= 1

    def test_cv_and_analyze(self, tmp_path):
        cv_dir = tmp_path / "cv"
        assert run("--run-dir", str(cv_dir), "cv", "--model", "majority",
                   "--gold", GOLD, "--segments", CORPUS, "--format", "conllu") == 0
        for name in ("folds.jsonl", "predictions.jsonl", "report.json", "report.txt"):
            assert (cv_dir / name).exists()

        an_dir = tmp_path / "an"
        assert run("--run-dir", str(an_dir), "analyze", "--gold", GOLD,
                   "--segments", CORPUS, "--format", "conllu",
                   "--group-by", "speaker") == 0
        assert (an_dir / "biplot.svg").exists()
        assert (an_dir / "profiles.csv").exists()


class TestContract:
    def test_usage_error_exit_code(self, capsys):
        assert run("frobnicate") == 1

    def test_data_error_exit_code(self, tmp_path):
        out = tmp_path / "x"
        code = run("--run-dir", str(out), "ingest", "--corpus",
                   str(tmp_path / "missing.conllu"), "--format", "conllu")
        assert code == 2
        assert not out.exists()

    def test_existing_nonempty_run_dir_rejected(self, tmp_path):
        out = tmp_path / "occupied"
        out.mkdir()
        (out / "something").write_text("x")
        assert run("--run-dir", str(out), "extract", "--segments", CORPUS,
                   "--format", "conllu") == 1
        assert (out / "something").exists()  # pre-existing content untouched

    def test_manifest_reproducible(self, tmp_path):
        args = ("extract", "--segments", CORPUS, "--format", "conllu")
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        assert run("--run-dir", str(d1), *args) == 0
        assert run("--run-dir", str(d2), *args) == 0
        assert (d1 / "manifest.json").read_bytes() == (d2 / "manifest.json").read_bytes()
        assert sha256_file(d1 / "instances.jsonl") == sha256_file(d2 / "instances.jsonl")

    def test_manifest_covers_outputs(self, tmp_path):
        out = tmp_path / "r"
        run("--run-dir", str(out), "extract", "--segments", CORPUS, "--format", "conllu")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["stage"] == "extract"
        assert "instances.jsonl" in manifest["outputs"]
        assert manifest["outputs"]["instances.jsonl"] == sha256_file(out / "instances.jsonl")
        assert manifest["config_hash"]

    def test_config_file_loads(self, tmp_path):
        out = tmp_path / "r"
        assert run("--config", str(FIXTURES / "config.toml"), "--run-dir", str(out),
                   "extract", "--segments", CORPUS, "--format", "conllu") == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["features"]["window"] == 20
        assert manifest["config"]["features"]["select_k"] == 300
