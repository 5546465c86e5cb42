"""Acceptance for the fine-tuning harness on a 200-instance toy export."""

import json
import time

import pytest

from wirref_finetune.cli import main as finetune_main
from wirref_finetune.data import PairExample, read_folds, read_pairs
from wirref_finetune.harness import TrainConfig, eval_heldout_silver, train, train_on_pairs
from wirref_finetune.model import EncoderConfig

from conftest import toy_pairs, write_jsonl

BUDGET_S = 900  # 15 minutes


def small_config(epochs):
    return TrainConfig(epochs=epochs, pretrain_epochs=epochs, batch_size=16,
                       max_len=64, learning_rate=1e-3, encoder=EncoderConfig.small())


def test_secondary_acceptance(tmp_path, toy_export):
    t0 = time.perf_counter()
    pairs_path, folds_path, gold_path = toy_export
    gold_pairs = read_pairs(pairs_path, require_labels=True)
    folds = read_folds(folds_path)
    assert len(gold_pairs) == 200

    # T2 with empty silver equals T1, file for file
    config = small_config(epochs=4)
    t1 = train("T1", gold_pairs, folds, config=config, out_dir=tmp_path / "t1")
    t2 = train("T2", gold_pairs, folds, silver_pairs=[], config=config,
               out_dir=tmp_path / "t2")
    assert t1 == t2
    assert (tmp_path / "t1" / "predictions.jsonl").read_bytes() == \
        (tmp_path / "t2" / "predictions.jsonl").read_bytes()

    # a model trained on silver labels learns held-out silver from the same
    # generating patterns
    train_silver = [PairExample(**r) for r in toy_pairs(300, seed=21, id_prefix="silver")]
    heldout_silver = [PairExample(**r) for r in toy_pairs(100, seed=22, id_prefix="held")]
    trained = train_on_pairs(train_silver, small_config(epochs=25))
    accuracy = eval_heldout_silver(trained, heldout_silver)
    assert accuracy >= 0.90, f"held-out silver accuracy {accuracy:.3f}"

    # harness predictions score cleanly through the primary evaluator
    from wirref.cli import main as wirref_main

    score_dir = tmp_path / "score"
    code = wirref_main(["--run-dir", str(score_dir), "score",
                        "--gold", str(gold_path),
                        "--pred", str(tmp_path / "t1" / "predictions.jsonl")])
    assert code == 0
    report = json.loads((score_dir / "report.json").read_text())
    assert report["n"] == 200
    assert 0.0 <= report["accuracy"] <= 1.0

    elapsed = time.perf_counter() - t0
    print(f"[PASS] fine-tuning harness acceptance "
          f"(T1==T2-empty, silver acc {accuracy:.3f}, primary score ok; "
          f"{elapsed:.1f}s / budget {BUDGET_S}s)")
    assert elapsed < BUDGET_S


def test_cli_round_trip(tmp_path, toy_export):
    pairs_path, folds_path, gold_path = toy_export
    out = tmp_path / "run"
    code = finetune_main([
        "train", "--pairs", str(pairs_path), "--folds", str(folds_path),
        "--regime", "T1", "--small", "--epochs", "3", "--max-len", "64",
        "--out", str(out),
    ])
    assert code == 0
    predictions = [json.loads(l) for l in (out / "predictions.jsonl").open()]
    assert len(predictions) == 200

    silver_rows = toy_pairs(60, seed=31, id_prefix="silver")
    heldout_rows = toy_pairs(30, seed=32, id_prefix="held")
    sp = write_jsonl(silver_rows, tmp_path / "train_silver.jsonl")
    hp = write_jsonl(heldout_rows, tmp_path / "heldout_silver.jsonl")
    eval_out = tmp_path / "eval"
    code = finetune_main([
        "eval-silver", "--train-pairs", str(sp), "--heldout-pairs", str(hp),
        "--small", "--epochs", "10", "--max-len", "64", "--out", str(eval_out),
    ])
    assert code == 0
    result = json.loads((eval_out / "silver_eval.json").read_text())
    assert result["n_heldout"] == 30
