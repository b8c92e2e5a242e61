"""Attach story-element labels to passage tokens and extract label sequences.

Three labeler kinds share one contract (one label-or-null per token):

  builtin-lexicon   deterministic word -> abbreviation lookup, for tests and
                    fully reproducible runs
  external-process  any program speaking the line protocol below on
                    stdin/stdout (a neural labeler lives behind this)
  precomputed-file  labels already on disk, keyed by (doc_id, index)

External protocol: requests are JSON objects, one per line, on the child's
stdin: {"doc_id": str, "index": int, "tokens": [str]}. Responses mirror them
on stdout: {"doc_id": str, "index": int, "labels": [str|null]}, in any order.
The child must exit 0 once its stdin reaches EOF.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass, field

from . import grammar
from .corpus import Passage
from .errors import (
    LabelerTimeout,
    LabelerUnavailable,
    MissingPassage,
    ParseError,
    ProtocolViolation,
    UnknownLabel,
)

NULL_LABEL = "O"  # training-file spelling of "unlabeled"

DEFAULT_BATCH_SIZE = 256
DEFAULT_BATCH_TIMEOUT = 120.0  # seconds per batch of external responses


@dataclass
class LabeledPassage:
    doc_id: str
    index: int
    tokens: list[str]
    labels: list[str | None]

    def validate(self, source: str = "labeler"):
        if len(self.labels) != len(self.tokens):
            raise ProtocolViolation(
                f"{source}: passage ({self.doc_id!r}, {self.index}) has "
                f"{len(self.labels)} labels for {len(self.tokens)} tokens"
            )
        for lab in self.labels:
            if lab is not None:
                grammar.resolve(lab)
        return self


@dataclass
class LabelSequence:
    doc_id: str
    index: int
    seq: list[str]


@dataclass(frozen=True)
class TrainingExample:
    tokens: tuple[str, ...]
    labels: tuple[str | None, ...]


@dataclass(frozen=True)
class LabelerSpec:
    kind: str  # builtin-lexicon | external-process | precomputed-file
    parameter: str

    _KINDS = ("builtin-lexicon", "external-process", "precomputed-file")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"labeler kind must be one of {self._KINDS}, got {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "LabelerSpec":
        """Parse the CLI form builtin:PATH | external:CMD | file:PATH."""
        prefix, sep, param = text.partition(":")
        kinds = {"builtin": "builtin-lexicon", "external": "external-process", "file": "precomputed-file"}
        if not sep or prefix not in kinds or not param:
            raise ValueError(f"bad labeler spec {text!r}; expected builtin:LEX, external:\"CMD\", or file:PATH")
        return cls(kinds[prefix], param)


# ---------------------------------------------------------------------------
# Builtin lexicon
# ---------------------------------------------------------------------------


def _digit_rule(token: str) -> str | None:
    return "circum-num" if token.isdigit() else None


@dataclass(frozen=True)
class Lexicon:
    words: dict
    fallbacks: tuple = (_digit_rule,)

    @classmethod
    def load(cls, path) -> "Lexicon":
        """Read a TSV of `word<TAB>abbrev`; abbreviations must be registered."""
        words = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                word, sep, abbrev = line.partition("\t")
                if not sep:
                    raise ParseError(f"{path}:{lineno}: expected word<TAB>abbrev")
                abbrev = abbrev.strip()
                try:
                    grammar.resolve(abbrev)
                except UnknownLabel:
                    raise UnknownLabel(f"{path}:{lineno}: unknown abbreviation {abbrev!r}") from None
                words[word.strip()] = abbrev
        return cls(words)


def lexicon_label(tokens, lexicon: Lexicon) -> list[str | None]:
    """Exact lexicon hit wins; otherwise the first matching fallback rule."""
    out = []
    for tok in tokens:
        label = lexicon.words.get(tok)
        if label is None:
            for rule in lexicon.fallbacks:
                label = rule(tok)
                if label is not None:
                    break
        out.append(label)
    return out


# ---------------------------------------------------------------------------
# Precomputed labels
# ---------------------------------------------------------------------------


class PrecomputedLabels:
    def __init__(self, path):
        self.path = path
        self._by_key = {}
        for lp in read_labeled(path):
            self._by_key[(lp.doc_id, lp.index)] = lp

    def lookup(self, doc_id: str, index: int) -> LabeledPassage:
        try:
            return self._by_key[(doc_id, index)]
        except KeyError:
            raise MissingPassage(
                f"{self.path}: no labels for passage ({doc_id!r}, {index})"
            ) from None


# ---------------------------------------------------------------------------
# External process protocol
# ---------------------------------------------------------------------------


def _request_line(p: Passage) -> str:
    return json.dumps(
        {"doc_id": p.doc_id, "index": p.index, "tokens": p.tokens}, ensure_ascii=False
    )


def _parse_response(line: str) -> LabeledPassage:
    try:
        obj = json.loads(line)
        lp = LabeledPassage(obj["doc_id"], obj["index"], tokens=[], labels=obj["labels"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ProtocolViolation(f"bad response line {line!r}: {exc}") from None
    if not isinstance(lp.labels, list):
        raise ProtocolViolation(f"response labels must be a list: {line!r}")
    return lp


def run_external(passages, command: str, batch_size: int = DEFAULT_BATCH_SIZE,
                 batch_timeout: float = DEFAULT_BATCH_TIMEOUT):
    """Stream passages through an external labeler; yields LabeledPassage.

    Requests are written in batches; responses may arrive in any order and
    are re-associated by (doc_id, index). Yields in input order. Raises
    LabelerTimeout if a batch's responses do not all arrive in time.
    """
    passages = list(passages)
    try:
        proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
    except OSError as exc:
        raise LabelerUnavailable(f"cannot spawn labeler {command!r}: {exc}") from None

    lines: queue.Queue = queue.Queue()

    def _reader():
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)

    reader = threading.Thread(target=_reader, daemon=True)
    reader.start()

    pending: dict[tuple, Passage] = {}
    answered: dict[tuple, LabeledPassage] = {}
    clean = False
    try:
        for start in range(0, len(passages), batch_size):
            batch = passages[start : start + batch_size]
            for p in batch:
                key = (p.doc_id, p.index)
                if key in pending or key in answered:
                    raise ProtocolViolation(f"duplicate passage key {key}")
                pending[key] = p
            try:
                proc.stdin.write("".join(_request_line(p) + "\n" for p in batch))
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise LabelerUnavailable(
                    f"labeler {command!r} closed its input (exit {proc.poll()})"
                ) from None
            want = {(p.doc_id, p.index) for p in batch}
            while want & pending.keys():
                try:
                    line = lines.get(timeout=batch_timeout)
                except queue.Empty:
                    raise LabelerTimeout(
                        f"no response from labeler {command!r} within {batch_timeout}s; "
                        f"{len(pending)} passages outstanding"
                    ) from None
                if line is None:
                    raise ProtocolViolation(
                        f"labeler {command!r} closed stdout with {len(pending)} "
                        "requests unanswered"
                    )
                if not line.strip():
                    continue
                resp = _parse_response(line)
                key = (resp.doc_id, resp.index)
                src = pending.pop(key, None)
                if src is None:
                    raise ProtocolViolation(f"response for unknown passage {key}")
                resp.tokens = src.tokens
                try:
                    answered[key] = resp.validate(source=f"labeler {command!r}")
                except UnknownLabel as exc:
                    raise ProtocolViolation(str(exc)) from None
            for p in batch:
                yield answered.pop((p.doc_id, p.index))
        clean = True
    finally:
        try:
            proc.stdin.close()
        except OSError:
            pass
        if not clean:
            # error or abandoned stream: don't wait on a possibly hung child
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        else:
            rc = proc.wait()
            reader.join(timeout=5)
    if clean and rc != 0:
        raise LabelerUnavailable(f"labeler {command!r} exited with status {rc}")


# ---------------------------------------------------------------------------
# Front door
# ---------------------------------------------------------------------------


def label_passage(p: Passage, spec: LabelerSpec) -> LabeledPassage:
    """Label a single passage. For streams prefer label_passages."""
    return next(iter(label_passages([p], spec)))


def label_passages(passages, spec: LabelerSpec):
    """Label a stream of passages; yields LabeledPassage in input order."""
    if spec.kind == "builtin-lexicon":
        lexicon = Lexicon.load(spec.parameter)
        for p in passages:
            yield LabeledPassage(
                p.doc_id, p.index, p.tokens, lexicon_label(p.tokens, lexicon)
            ).validate(source="builtin lexicon")
    elif spec.kind == "precomputed-file":
        table = PrecomputedLabels(spec.parameter)
        for p in passages:
            found = table.lookup(p.doc_id, p.index)
            lp = LabeledPassage(p.doc_id, p.index, p.tokens, list(found.labels))
            yield lp.validate(source=f"precomputed file {spec.parameter!r}")
    else:
        yield from run_external(passages, spec.parameter)


def extract_sequence(lp: LabeledPassage) -> LabelSequence:
    """Drop nulls, keep token order: the passage's feature sequence."""
    return LabelSequence(lp.doc_id, lp.index, [lab for lab in lp.labels if lab is not None])


# ---------------------------------------------------------------------------
# Labeled-passages file (JSONL) and training set (CoNLL-style TSV)
# ---------------------------------------------------------------------------


def labeled_to_json(lp: LabeledPassage) -> str:
    return json.dumps(
        {"doc_id": lp.doc_id, "index": lp.index, "tokens": lp.tokens, "labels": lp.labels},
        ensure_ascii=False,
    )


def write_labeled(labeled, out) -> int:
    n = 0
    fh = open(out, "w", encoding="utf-8", newline="\n") if not hasattr(out, "write") else out
    try:
        for lp in labeled:
            fh.write(labeled_to_json(lp) + "\n")
            n += 1
    finally:
        if fh is not out:
            fh.close()
    return n


def read_labeled(path) -> list[LabeledPassage]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                lp = LabeledPassage(obj["doc_id"], obj["index"], obj["tokens"], obj["labels"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad labeled record: {exc}") from None
            out.append(lp.validate(source=str(path)))
    return out


def load_training_set(path) -> list[TrainingExample]:
    """Parse `token<TAB>abbrev-or-O` lines, blank line between sentences."""
    examples = []
    tokens: list[str] = []
    labels: list[str | None] = []

    def _flush():
        if tokens:
            examples.append(TrainingExample(tuple(tokens), tuple(labels)))
            tokens.clear()
            labels.clear()

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                _flush()
                continue
            token, sep, abbrev = line.partition("\t")
            if not sep or not token or not abbrev.strip():
                raise ParseError(f"{path}:{lineno}: expected token<TAB>abbrev-or-O")
            abbrev = abbrev.strip()
            if abbrev == NULL_LABEL:
                label = None
            else:
                try:
                    grammar.resolve(abbrev)
                except UnknownLabel:
                    raise UnknownLabel(f"{path}:{lineno}: unknown abbreviation {abbrev!r}") from None
                label = abbrev
            tokens.append(token)
            labels.append(label)
    _flush()
    return examples
