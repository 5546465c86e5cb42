"""Command line for the fine-tuning harness.

Consumes the exporter's pair/fold/silver files and emits predictions in the
format the primary `score` command evaluates.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .data import pairs_from_silver, read_folds, read_pairs
from .harness import TrainConfig, eval_heldout_silver, train, train_on_pairs
from .model import EncoderConfig


def _config_from(args) -> TrainConfig:
    encoder = EncoderConfig.small() if args.small else EncoderConfig()
    # fine-tuning scale for the full encoder; from-scratch training of the
    # small encoder needs a larger step
    learning_rate = args.learning_rate
    if learning_rate is None:
        learning_rate = 1e-3 if args.small else 4e-5
    return TrainConfig(
        epochs=args.epochs,
        pretrain_epochs=args.pretrain_epochs,
        batch_size=args.batch_size,
        learning_rate=learning_rate,
        max_len=args.max_len,
        seed=args.seed,
        encoder=encoder,
    )


def cmd_train(args) -> int:
    gold = read_pairs(args.pairs, require_labels=True)
    folds = read_folds(args.folds)
    silver = []
    if args.silver_pairs:
        silver = read_pairs(args.silver_pairs, require_labels=True)
    elif args.silver and args.all_pairs:
        silver = pairs_from_silver(args.silver, args.all_pairs)
    pooled = train(args.regime, gold, folds, silver_pairs=silver,
                   config=_config_from(args), out_dir=args.out)
    print(f"wrote {Path(args.out) / 'predictions.jsonl'} ({len(pooled)} predictions)")
    return 0


def cmd_eval_silver(args) -> int:
    train_pairs = read_pairs(args.train_pairs, require_labels=True)
    heldout = read_pairs(args.heldout_pairs, require_labels=True)
    trained = train_on_pairs(train_pairs, _config_from(args))
    accuracy = eval_heldout_silver(trained, heldout)
    result = {"n_train": len(train_pairs), "n_heldout": len(heldout), "accuracy": accuracy}
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        with open(Path(args.out) / "silver_eval.json", "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"held-out silver accuracy: {accuracy:.4f} over {len(heldout)} instances")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wirref-finetune", description=__doc__)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--epochs", type=int, default=25)
        p.add_argument("--pretrain-epochs", type=int, default=25)
        p.add_argument("--batch-size", type=int, default=16)
        p.add_argument("--learning-rate", type=float, default=None,
                       help="default 4e-5, or 1e-3 with --small")
        p.add_argument("--max-len", type=int, default=512)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--small", action="store_true",
                       help="compact encoder for CPU-scale experiments")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("train", help="cross-validation over exported folds")
    p.add_argument("--pairs", required=True, help="labeled gold pair export")
    p.add_argument("--folds", required=True, help="fold file from the exporter")
    p.add_argument("--regime", choices=["T1", "T2", "T3"], default="T1")
    p.add_argument("--silver-pairs", help="labeled silver pair export (T2/T3)")
    p.add_argument("--silver", help="silver JSONL, joined onto --all-pairs")
    p.add_argument("--all-pairs", help="unlabeled pair export covering the silver ids")
    shared(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval-silver", help="train on silver pairs, score held-out silver")
    p.add_argument("--train-pairs", required=True)
    p.add_argument("--heldout-pairs", required=True)
    shared(p)
    p.set_defaults(fn=cmd_eval_silver)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
