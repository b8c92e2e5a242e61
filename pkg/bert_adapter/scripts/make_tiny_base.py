#!/usr/bin/env python3
"""Build a tiny randomly initialized BERT base model for offline use.

The adapter normally fine-tunes bert-base-uncased, which needs a network
to download. This script writes a self-contained miniature base (2 layers,
WordPiece vocab generated from a training TSV) so finetune/serve and their
tests run fully offline. It is a stand-in for plumbing purposes only; its
labels are as random as its weights until fine-tuned.
"""

import argparse
import string
import sys
from pathlib import Path

import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def build_vocab(train_tsv: Path | None) -> list[str]:
    vocab = list(SPECIALS)
    vocab += list(string.ascii_lowercase) + [f"##{c}" for c in string.ascii_lowercase]
    vocab += list(string.digits) + [f"##{c}" for c in string.digits]
    words = set()
    if train_tsv is not None:
        for line in Path(train_tsv).read_text(encoding="utf-8").splitlines():
            if line.strip():
                words.add(line.split("\t", 1)[0].lower())
    vocab += sorted(words - set(vocab))
    return vocab


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--train", help="training TSV whose tokens seed the vocabulary")
    ap.add_argument("--hidden", type=int, default=64)
    ap.add_argument("--layers", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    torch.manual_seed(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab = build_vocab(Path(args.train) if args.train else None)
    vocab_file = out / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=args.hidden,
        num_hidden_layers=args.layers,
        num_attention_heads=max(2, args.hidden // 32),
        intermediate_size=args.hidden * 2,
        max_position_embeddings=128,
    )
    BertModel(config).save_pretrained(out)
    BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True).save_pretrained(out)
    print(f"tiny base model written to {out} (vocab {len(vocab)})", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
