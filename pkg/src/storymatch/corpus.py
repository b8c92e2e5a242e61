"""Text ingestion: strip rules, passage segmentation, token normalization.

Prose is segmented on the three end-of-sentence characters '.', '!', '?'
with no lookahead, so abbreviations like "Mr." split a sentence; poetry is
segmented on line breaks. Tokens are lowercased, punctuation-free, and
whitespace-split. Both choices are deliberately bare; see README.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass

from .errors import MalformedRule, ParseError

PROSE = "prose"
POETRY = "poetry"
_MODES = (PROSE, POETRY)

_SENTENCE_TERMINATORS = ".!?"
_SEGMENT_RE = re.compile(r"[.!?]")

# Characters the ASCII/typographic quote-and-dash set that must always be
# stripped even where a Unicode category lookup would keep them.
_EXTRA_PUNCT = set("'\"`´–—…")


class _PunctTable(dict):
    """Lazy str.translate table deleting punctuation, caching per codepoint."""

    def __missing__(self, cp):
        ch = chr(cp)
        if ch in _EXTRA_PUNCT or unicodedata.category(ch).startswith("P"):
            self[cp] = None
        else:
            self[cp] = ch
        return self[cp]


_PUNCT_TABLE = _PunctTable()


def is_punctuation(ch: str) -> bool:
    return _PUNCT_TABLE[ord(ch)] is None


@dataclass(frozen=True)
class TextDocument:
    doc_id: str
    title: str
    author: str
    mode: str
    raw: str

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")


@dataclass
class Passage:
    doc_id: str
    index: int
    raw_span: str
    tokens: list[str]


@dataclass(frozen=True)
class StripRule:
    kind: str  # line-prefix | regex-range | literal-block
    pattern: str

    def compiled(self):
        if self.kind == "regex-range":
            try:
                return re.compile(self.pattern, re.MULTILINE | re.DOTALL)
            except re.error as exc:
                raise MalformedRule(f"bad regex {self.pattern!r}: {exc}") from None
        if self.kind in ("line-prefix", "literal-block"):
            return None
        raise MalformedRule(f"unknown strip-rule kind: {self.kind!r}")


def load_strip_rules(path) -> list[StripRule]:
    """Read a rule file: one `kind<TAB>pattern` per line, # comments allowed."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            kind, sep, pattern = line.partition("\t")
            if not sep or not pattern:
                raise MalformedRule(f"{path}:{lineno}: expected kind<TAB>pattern")
            rule = StripRule(kind.strip(), pattern)
            rule.compiled()  # validate eagerly
            rules.append(rule)
    return rules


def _apply_rule(text: str, rule: StripRule) -> str:
    if rule.kind == "line-prefix":
        kept = [ln for ln in text.split("\n") if not ln.lstrip().startswith(rule.pattern)]
        return "\n".join(kept)
    if rule.kind == "literal-block":
        return text.replace(rule.pattern, "")
    return rule.compiled().sub("", text)


def clean_text(raw: str, rules) -> str:
    """Remove every rule-matched region; idempotent.

    Removal can butt new matches together, so each pass repeats until the
    text stops changing (it strictly shrinks, so this terminates).
    """
    text = raw
    while True:
        before = text
        for rule in rules:
            while True:
                stripped = _apply_rule(text, rule)
                if stripped == text:
                    break
                text = stripped
        if text == before:
            return text


def segment(text: str, mode: str) -> list[str]:
    """Split cleaned text into raw spans; whitespace-only spans are dropped."""
    if mode == PROSE:
        spans = _SEGMENT_RE.split(text)
    elif mode == POETRY:
        spans = text.split("\n")
    else:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    return [s for s in spans if s.strip()]


def normalize(span: str) -> list[str]:
    """Lowercase, delete punctuation, split on whitespace runs."""
    return span.lower().translate(_PUNCT_TABLE).split()


def build_passages(doc: TextDocument, rules=()) -> list[Passage]:
    """clean -> segment -> normalize -> drop empty spans -> index from 0."""
    cleaned = clean_text(doc.raw, rules)
    passages = []
    for span in segment(cleaned, doc.mode):
        tokens = normalize(span)
        if tokens:
            passages.append(Passage(doc.doc_id, len(passages), span, tokens))
    return passages


# ---------------------------------------------------------------------------
# Passages file: JSON Lines, UTF-8, LF, fields in this order.
# ---------------------------------------------------------------------------


def passage_to_json(p: Passage) -> str:
    return json.dumps(
        {"doc_id": p.doc_id, "index": p.index, "raw_span": p.raw_span, "tokens": p.tokens},
        ensure_ascii=False,
    )


def write_passages(passages, out) -> int:
    """Write passages as JSONL to a path or text handle; returns the count."""
    n = 0
    fh = open(out, "w", encoding="utf-8", newline="\n") if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__") else out
    try:
        for p in passages:
            fh.write(passage_to_json(p) + "\n")
            n += 1
    finally:
        if fh is not out:
            fh.close()
    return n


def read_passages(path) -> list[Passage]:
    passages = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                passages.append(
                    Passage(obj["doc_id"], obj["index"], obj.get("raw_span", ""), obj["tokens"])
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad passage record: {exc}") from None
    return passages


def read_document(path, doc_id: str, mode: str, title: str = "", author: str = "") -> TextDocument:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    return TextDocument(doc_id=doc_id, title=title, author=author, mode=mode, raw=raw)
