"""Serve labels over the external labeler line protocol.

Requests arrive one JSON object per line on stdin ({"doc_id", "index",
"tokens"}), responses leave on stdout ({"doc_id", "index", "labels"}) with
one label-or-null per word: the argmax class of each word's first sub-token,
null for the "O" class and for words truncated away by the tokenizer.
Malformed input lines get an {"error": ...} line and processing continues;
stdin EOF ends the process with status 0.
"""

from __future__ import annotations

import json
import sys

import torch
from transformers import AutoModelForTokenClassification, AutoTokenizer


class Server:
    def __init__(self, model_dir, max_length: int = 128):
        self.tokenizer = AutoTokenizer.from_pretrained(model_dir)
        self.model = AutoModelForTokenClassification.from_pretrained(model_dir)
        self.model.eval()
        self.id2label = {int(i): lab for i, lab in self.model.config.id2label.items()}
        self.max_length = max_length

    @torch.no_grad()
    def label_tokens(self, tokens: list[str]) -> list[str | None]:
        labels: list[str | None] = [None] * len(tokens)
        if not tokens:
            return labels
        encoded = self.tokenizer(
            [tokens],
            is_split_into_words=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        logits = self.model(**encoded).logits[0]
        pred = logits.argmax(dim=-1).tolist()
        previous = None
        for pos, wid in enumerate(encoded.word_ids(batch_index=0)):
            if wid is None or wid == previous:
                continue
            label = self.id2label[pred[pos]]
            labels[wid] = None if label == "O" else label
            previous = wid
        return labels

    def handle_line(self, line: str) -> str | None:
        if not line.strip():
            return None
        try:
            request = json.loads(line)
            doc_id = request["doc_id"]
            index = request["index"]
            tokens = request["tokens"]
            if not isinstance(tokens, list):
                raise TypeError("tokens must be a list")
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            return json.dumps({"error": f"bad request: {exc}"}, ensure_ascii=False)
        labels = self.label_tokens([str(t) for t in tokens])
        return json.dumps(
            {"doc_id": doc_id, "index": index, "labels": labels}, ensure_ascii=False
        )


def serve(model_dir, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    server = Server(model_dir)
    for line in stdin:
        response = server.handle_line(line)
        if response is not None:
            stdout.write(response + "\n")
            stdout.flush()
    return 0
