"""Training data loader: CoNLL-style TSV, `token<TAB>abbrev-or-O` per line,
blank line between sentences."""

from __future__ import annotations

from dataclasses import dataclass

from .labels import LABEL2ID, NULL_CLASS


class TrainingDataError(ValueError):
    pass


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    labels: tuple[str, ...]  # abbreviations, NULL_CLASS for unlabeled


def load_training_tsv(path) -> list[Sentence]:
    sentences = []
    tokens: list[str] = []
    labels: list[str] = []

    def flush():
        if tokens:
            sentences.append(Sentence(tuple(tokens), tuple(labels)))
            tokens.clear()
            labels.clear()

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush()
                continue
            token, sep, label = line.partition("\t")
            label = label.strip()
            if not sep or not token or not label:
                raise TrainingDataError(f"{path}:{lineno}: expected token<TAB>abbrev-or-O")
            if label != NULL_CLASS and label not in LABEL2ID:
                raise TrainingDataError(f"{path}:{lineno}: unknown label {label!r}")
            tokens.append(token)
            labels.append(label)
    flush()
    return sentences
