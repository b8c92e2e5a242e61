"""bert-adapter command line: finetune a labeler, serve it over the protocol."""

from __future__ import annotations

import argparse
import sys

from .finetune import DEFAULT_BASE, FinetuneConfig, finetune


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bert-adapter",
        description="Fine-tune a transformer token classifier on story-element labels "
        "and serve it over the external labeler protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="fine-tune a base model on a training TSV")
    p.add_argument("--train", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--base", default=DEFAULT_BASE,
                   help="base model name or local directory (default: %(default)s)")
    p.add_argument("--epochs", type=int, default=6)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=5e-5)
    p.add_argument("--max-length", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="answer labeling requests on stdin until EOF")
    p.add_argument("--model", required=True, metavar="DIR")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "finetune":
        config = FinetuneConfig(
            base=ns.base,
            batch_size=ns.batch_size,
            epochs=ns.epochs,
            learning_rate=ns.lr,
            max_length=ns.max_length,
            seed=ns.seed,
        )
        try:
            out = finetune(ns.train, ns.out, config)
        except (ValueError, OSError) as exc:
            print(f"error\t{type(exc).__name__}\t{exc}", file=sys.stderr)
            return 1
        print(f"model written to {out}", file=sys.stderr)
        return 0
    from .serve import serve  # deferred: serving imports the model stack

    return serve(ns.model)


if __name__ == "__main__":
    sys.exit(main())
