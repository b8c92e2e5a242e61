"""Few-shot fine-tuning of a pre-trained token classifier.

The defaults mirror the intended protocol for tiny hand-labeled datasets:
batch size 4 and six epochs to keep a 30-sentence set from overfitting,
AdamW at 5e-5, word-level labels aligned to the first sub-token. The output
directory holds the model, tokenizer, a label_map.json binding class
indices to abbreviations, and a training_log.json with per-epoch loss.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader
from transformers import AutoModelForTokenClassification, AutoTokenizer

from .data import load_training_tsv
from .labels import CLASSES, ID2LABEL, LABEL2ID, NUM_CLASSES

IGNORE_INDEX = -100

DEFAULT_BASE = "bert-base-uncased"


@dataclass(frozen=True)
class FinetuneConfig:
    base: str = DEFAULT_BASE
    batch_size: int = 4
    epochs: int = 6
    learning_rate: float = 5e-5
    max_length: int = 128
    seed: int = 0

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        return self


def _encode(sentences, tokenizer, max_length):
    encoded = tokenizer(
        [list(s.tokens) for s in sentences],
        is_split_into_words=True,
        truncation=True,
        max_length=max_length,
        padding="max_length",
        return_tensors="pt",
    )
    all_labels = []
    for i, sentence in enumerate(sentences):
        word_ids = encoded.word_ids(batch_index=i)
        ids = []
        previous = None
        for wid in word_ids:
            if wid is None or wid == previous:
                ids.append(IGNORE_INDEX)  # specials and continuation pieces
            else:
                ids.append(LABEL2ID[sentence.labels[wid]])
            previous = wid
        all_labels.append(ids)
    encoded["labels"] = torch.tensor(all_labels, dtype=torch.long)
    return encoded


def finetune(train_path, out_dir, config: FinetuneConfig = FinetuneConfig()) -> Path:
    config.validate()
    sentences = load_training_tsv(train_path)
    if not sentences:
        raise ValueError(f"{train_path}: training set is empty")

    random.seed(config.seed)
    np.random.seed(config.seed)
    torch.manual_seed(config.seed)

    tokenizer = AutoTokenizer.from_pretrained(config.base)
    model = AutoModelForTokenClassification.from_pretrained(
        config.base,
        num_labels=NUM_CLASSES,
        id2label=ID2LABEL,
        label2id=LABEL2ID,
    )
    model.train()

    encoded = _encode(sentences, tokenizer, config.max_length)
    dataset = [
        {key: encoded[key][i] for key in ("input_ids", "attention_mask", "labels")}
        for i in range(len(sentences))
    ]
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(config.seed),
    )
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)

    epoch_losses = []
    for epoch in range(config.epochs):
        total = 0.0
        steps = 0
        for batch in loader:
            optimizer.zero_grad()
            out = model(**batch)
            out.loss.backward()
            optimizer.step()
            total += float(out.loss.detach())
            steps += 1
        epoch_losses.append(total / steps)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    (out_dir / "label_map.json").write_text(
        json.dumps({"classes": list(CLASSES)}, indent=2) + "\n", encoding="utf-8"
    )
    (out_dir / "training_log.json").write_text(
        json.dumps(
            {
                "config": asdict(config),
                "sentences": len(sentences),
                "epoch_loss": epoch_losses,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return out_dir
