"""CLI: ``tagseq train`` fits the toy model on an intent-tagged dataset;
``tagseq predict`` writes a top-k predictions file for the evaluation harness."""

from __future__ import annotations

import argparse
import sys

from tagseq.data import DataError
from tagseq.predict import predict_file
from tagseq.train import TrainSpec, load_model, save_model, train


def cmd_train(args) -> int:
    spec = TrainSpec(dataset=args.dataset, vocab_cap=args.vocab_cap,
                     embed_dim=args.embed_dim, hidden_dim=args.hidden_dim,
                     epochs=args.epochs, lr=args.lr, seed=args.seed, k=args.k)
    artifact = train(spec)
    save_model(artifact, args.out)
    losses = artifact["losses"]
    print(f"trained {args.epochs} epochs: loss {losses[0]:.4f} -> {losses[-1]:.4f}; "
          f"saved {args.out}")
    return 0


def cmd_predict(args) -> int:
    model, vocab, artifact = load_model(args.model)
    count = predict_file(model, vocab, artifact, args.dataset, args.out,
                         k=args.k, seed=args.seed)
    print(f"wrote {count} predictions ({args.k} candidates each) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagseq")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on an intent-tagged dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="model artifact path (.pt)")
    p.add_argument("--vocab-cap", type=int, default=2000)
    p.add_argument("--embed-dim", type=int, default=32)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write a top-k predictions file")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True,
                   help="tagged dataset rows to reformulate (tag, source, target)")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
