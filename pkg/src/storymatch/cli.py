"""Command line pipeline: segment -> label -> match -> report, plus grammar tools.

Every subcommand is deterministic given its flags. Failures exit nonzero
with a single machine-parsable line on stderr: `error<TAB>Type<TAB>message`.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus, grammar, labeler, matcher
from .errors import MissingPassage, StorymatchError


@dataclass
class RunConfig:
    subcommand: str
    inputs: tuple = ()
    output: str | None = None
    mode: str = corpus.PROSE
    doc_id: str | None = None
    strip_rules: str | None = None
    labeler_spec: labeler.LabelerSpec | None = None
    theta: int = 0
    exact: bool = False
    workers: int = 1
    scores_format: str = "tsv"
    skip_empty: bool = False
    seed: int = 0
    count: int = 1
    max_events: int = 3
    max_triplets: int = 3
    membership_cap: int = grammar.DEFAULT_MEMBERSHIP_CAP

    def validate(self):
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.output is not None:
            out = Path(self.output).resolve()
            for inp in self.inputs:
                if Path(inp).resolve() == out:
                    raise ValueError(f"input and output paths must differ: {inp}")
        return self


def cmd_segment(config: RunConfig) -> int:
    inp, = config.inputs
    doc_id = config.doc_id or Path(inp).stem
    rules = corpus.load_strip_rules(config.strip_rules) if config.strip_rules else []
    doc = corpus.read_document(inp, doc_id=doc_id, mode=config.mode)
    passages = corpus.build_passages(doc, rules)
    corpus.write_passages(passages, config.output)
    print(f"passages={len(passages)}", file=sys.stderr)
    return 0


def cmd_label(config: RunConfig) -> int:
    inp, = config.inputs
    passages = corpus.read_passages(inp)
    n = labeler.write_labeled(labeler.label_passages(passages, config.labeler_spec), config.output)
    print(f"labeled={n}", file=sys.stderr)
    return 0


def cmd_match(config: RunConfig) -> int:
    src_path, tgt_path = config.inputs
    src = [labeler.extract_sequence(lp) for lp in labeler.read_labeled(src_path)]
    tgt = [labeler.extract_sequence(lp) for lp in labeler.read_labeled(tgt_path)]
    cap = None if config.exact else config.theta
    run = matcher.match_all(src, tgt, cap=cap, workers=config.workers)
    total, matches = matcher.write_scores(run, config.output, theta=config.theta,
                                          fmt=config.scores_format)
    print(f"comparisons={total} matches={matches} theta={config.theta}", file=sys.stderr)
    return 0


def _read_passage_map(path):
    """Accept segment or labeled JSONL; key records by (doc_id, index)."""
    import json

    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                table[(obj["doc_id"], obj["index"])] = obj
            except KeyError as exc:
                raise StorymatchError(f"{path}:{lineno}: record missing {exc}") from None
    return table


def cmd_report(config: RunConfig) -> int:
    scores_path, src_path, tgt_path = config.inputs
    src_map = _read_passage_map(src_path)
    tgt_map = _read_passage_map(tgt_path)
    kept = []
    for s in matcher.read_scores(scores_path):
        if s.value is matcher.EXCEEDS_CAP or s.value > config.theta:
            continue
        src = src_map.get((s.src_doc, s.src_index))
        tgt = tgt_map.get((s.tgt_doc, s.tgt_index))
        if src is None:
            raise MissingPassage(f"scores reference unknown source passage ({s.src_doc!r}, {s.src_index})")
        if tgt is None:
            raise MissingPassage(f"scores reference unknown target passage ({s.tgt_doc!r}, {s.tgt_index})")
        if config.skip_empty:
            if "labels" not in src or "labels" not in tgt:
                raise StorymatchError(
                    "--skip-empty needs labeled passage files (records with a 'labels' field)"
                )
            if not any(l is not None for l in src["labels"]) and not any(
                l is not None for l in tgt["labels"]
            ):
                continue
        kept.append((s.value, s.src_index, s.tgt_index, src, tgt))
    kept.sort(key=lambda r: (r[0], r[1], r[2]))
    blocks = []
    for value, _, _, src, tgt in kept:
        blocks.append(
            f'Source: "{" ".join(src["tokens"])}"\n'
            f'Target: "{" ".join(tgt["tokens"])}"\n'
            f"Score: {value}"
        )
    if blocks:
        print("\n\n".join(blocks))
    return 0


def cmd_grammar(config: RunConfig) -> int:
    if config.subcommand == "grammar-dump":
        sys.stdout.write(grammar.dump_text())
        return 0
    if config.subcommand == "grammar-gen":
        limits = grammar.GenLimits(config.max_events, config.max_triplets)
        for i in range(config.count):
            seq = grammar.generate_sequence(config.seed + i, limits)
            print(" ".join(lab.abbrev for lab in seq))
        return 0
    # grammar-check
    inp, = config.inputs
    all_ok = True
    with open(inp, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            result = grammar.check_membership(line.split(), cap=config.membership_cap)
            if result.consistent:
                print(f"{lineno}\tconsistent")
            else:
                all_ok = False
                print(f"{lineno}\tinconsistent\t{result.diagnostics}")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storymatch",
        description="Label passages with story-element labels and match them across texts "
        "by edit distance over the label sequences.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("segment", help="split a text file into normalized passages")
    p.add_argument("--mode", choices=(corpus.PROSE, corpus.POETRY), required=True)
    p.add_argument("--strip-rules", metavar="FILE", help="kind<TAB>pattern rules applied before segmentation")
    p.add_argument("--doc-id", help="document id for the passage records (default: input file stem)")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("label", help="attach story-element labels to passages")
    p.add_argument("--labeler", required=True, metavar="SPEC",
                   help='builtin:LEXICON_TSV, external:"COMMAND", or file:LABELED_JSONL')
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("match", help="score every source passage against every target passage")
    p.add_argument("--theta", type=int, required=True, help="match threshold (score <= theta)")
    p.add_argument("--exact", action="store_true",
                   help="compute full distances for every pair instead of capping at theta")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv", dest="scores_format")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("output")

    p = sub.add_parser("report", help="print matched passage pairs from a scores file")
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--skip-empty", action="store_true",
                   help="drop pairs where neither passage has any label (needs labeled files)")
    p.add_argument("scores")
    p.add_argument("src_passages")
    p.add_argument("tgt_passages")

    p = sub.add_parser("grammar", help="story grammar tools")
    gsub = p.add_subparsers(dest="grammar_command", required=True)
    gsub.add_parser("dump", help="print the label registry and production rules")
    g = gsub.add_parser("gen", help="generate label sequences by expanding the grammar")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--max-events", type=int, default=3)
    g.add_argument("--max-triplets", type=int, default=3)
    g = gsub.add_parser("check", help="check label sequences (one per line) for membership")
    g.add_argument("--cap", type=int, default=grammar.DEFAULT_MEMBERSHIP_CAP,
                   help="max repetitions searched per repeated item")
    g.add_argument("input")
    return parser


def _to_config(ns: argparse.Namespace) -> RunConfig:
    sub = ns.subcommand
    if sub == "segment":
        return RunConfig(sub, inputs=(ns.input,), output=ns.output, mode=ns.mode,
                         doc_id=ns.doc_id, strip_rules=ns.strip_rules)
    if sub == "label":
        return RunConfig(sub, inputs=(ns.input,), output=ns.output,
                         labeler_spec=labeler.LabelerSpec.parse(ns.labeler))
    if sub == "match":
        return RunConfig(sub, inputs=(ns.source, ns.target), output=ns.output,
                         theta=ns.theta, exact=ns.exact, workers=ns.workers,
                         scores_format=ns.scores_format)
    if sub == "report":
        return RunConfig(sub, inputs=(ns.scores, ns.src_passages, ns.tgt_passages),
                         theta=ns.theta, skip_empty=ns.skip_empty)
    if sub == "grammar":
        gsub = f"grammar-{ns.grammar_command}"
        if ns.grammar_command == "gen":
            return RunConfig(gsub, seed=ns.seed, count=ns.count,
                             max_events=ns.max_events, max_triplets=ns.max_triplets)
        if ns.grammar_command == "check":
            return RunConfig(gsub, inputs=(ns.input,), membership_cap=ns.cap)
        return RunConfig(gsub)
    raise ValueError(f"unknown subcommand {sub!r}")


_COMMANDS = {
    "segment": cmd_segment,
    "label": cmd_label,
    "match": cmd_match,
    "report": cmd_report,
    "grammar-dump": cmd_grammar,
    "grammar-gen": cmd_grammar,
    "grammar-check": cmd_grammar,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        config = _to_config(ns).validate()
        return _COMMANDS[config.subcommand](config)
    except StorymatchError as exc:
        print(f"error\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
