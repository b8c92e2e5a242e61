import pytest

from storymatch import labeler
from storymatch.corpus import Passage
from storymatch.errors import (
    LabelerTimeout,
    LabelerUnavailable,
    MissingPassage,
    ParseError,
    ProtocolViolation,
    UnknownLabel,
)
from storymatch.labeler import LabeledPassage, LabelerSpec, Lexicon

import stubs


def passage(tokens, doc_id="d", index=0):
    return Passage(doc_id, index, " ".join(tokens), list(tokens))


@pytest.fixture
def lexicon(data_dir):
    return Lexicon.load(data_dir / "demo_lexicon.tsv")


# ---------------------------------------------------------------------------
# Lexicon labeling
# ---------------------------------------------------------------------------


def test_lexicon_digit_fallback():
    assert labeler.lexicon_label(["1842"], Lexicon({})) == ["circum-num"]


def test_lexicon_no_rule_fires():
    assert labeler.lexicon_label(["zzz"], Lexicon({})) == [None]


def test_lexicon_per_token_independence():
    lex = Lexicon({"queen": "subj-ind"})
    assert labeler.lexicon_label(["queen", "queen"], lex) == ["subj-ind", "subj-ind"]


def test_lexicon_hit_beats_fallback():
    lex = Lexicon({"1842": "circum-time"})
    assert labeler.lexicon_label(["1842"], lex) == ["circum-time"]


def test_lexicon_load_rejects_unknown_abbrev(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("word\tsubj-xyz\n")
    with pytest.raises(UnknownLabel):
        Lexicon.load(path)


def test_lexicon_load_rejects_bad_line(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("word without tab\n")
    with pytest.raises(ParseError):
        Lexicon.load(path)


def test_label_passage_builtin(data_dir):
    spec = LabelerSpec("builtin-lexicon", str(data_dir / "demo_lexicon.tsv"))
    lp = labeler.label_passage(passage(["no", "no", "said", "the", "queen"]), spec)
    assert lp.labels == ["act-neg", "act-neg", "act-verb", None, "subj-ind"]
    assert labeler.label_passage(passage([]), spec).labels == []


# ---------------------------------------------------------------------------
# Precomputed labels
# ---------------------------------------------------------------------------


def test_precomputed_passthrough(tmp_path):
    lp = LabeledPassage("d", 0, ["a", "b"], ["subj-ind", None])
    path = tmp_path / "labeled.jsonl"
    labeler.write_labeled([lp], path)
    spec = LabelerSpec("precomputed-file", str(path))
    assert labeler.label_passage(passage(["a", "b"]), spec).labels == ["subj-ind", None]


def test_precomputed_missing_passage(tmp_path):
    path = tmp_path / "labeled.jsonl"
    labeler.write_labeled([LabeledPassage("d", 0, ["a"], [None])], path)
    spec = LabelerSpec("precomputed-file", str(path))
    with pytest.raises(MissingPassage):
        labeler.label_passage(passage(["x"], index=5), spec)


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


def test_extract_sequence_drops_nulls():
    lp = LabeledPassage("d", 3, list("wxyz"), [None, "subj-ind", "act-verb", None])
    seq = labeler.extract_sequence(lp)
    assert seq.seq == ["subj-ind", "act-verb"]
    assert (seq.doc_id, seq.index) == ("d", 3)
    assert labeler.extract_sequence(LabeledPassage("d", 0, ["w"], [None])).seq == []
    full = LabeledPassage("d", 0, ["w", "x"], ["act-verb", "act-neg"])
    assert labeler.extract_sequence(full).seq == ["act-verb", "act-neg"]


def test_length_agreement_enforced():
    with pytest.raises(ProtocolViolation):
        LabeledPassage("d", 0, ["a", "b"], ["subj-ind"]).validate()


# ---------------------------------------------------------------------------
# External protocol
# ---------------------------------------------------------------------------


def run_stub(tmp_path, body, passages, **kw):
    cmd = stubs.write_stub(tmp_path, "stub", body)
    return list(labeler.run_external(passages, cmd, **kw))


def test_external_null_stub(tmp_path):
    out = run_stub(tmp_path, stubs.NULL_LABELER, [passage(["a", "b"]), passage(["c"], index=1)])
    assert [lp.labels for lp in out] == [[None, None], [None]]


def test_external_reassociates_out_of_order(tmp_path):
    passages = [passage([chr(97 + i)], index=i) for i in range(20)]
    out = run_stub(tmp_path, stubs.SHUFFLING_LABELER, passages, batch_size=5)
    assert [(lp.doc_id, lp.index) for lp in out] == [("d", i) for i in range(20)]
    assert [lp.tokens for lp in out] == [p.tokens for p in passages]


def test_external_thousand_passages_set_equality(tmp_path):
    passages = [passage(["tok", str(i)], doc_id="big", index=i) for i in range(1000)]
    out = run_stub(tmp_path, stubs.FIRST_TOKEN_LABELER, passages, batch_size=64)
    assert {(lp.doc_id, lp.index) for lp in out} == {("big", i) for i in range(1000)}
    assert all(lp.labels == ["subj-ind", None] for lp in out)


def test_external_wrong_length_is_protocol_violation(tmp_path):
    with pytest.raises(ProtocolViolation) as err:
        run_stub(tmp_path, stubs.WRONG_LENGTH_LABELER, [passage(["a", "b"], index=7)])
    assert "7" in str(err.value)


def test_external_unregistered_label_is_protocol_violation(tmp_path):
    with pytest.raises(ProtocolViolation):
        run_stub(tmp_path, stubs.UNREGISTERED_LABELER, [passage(["a"])])


def test_external_timeout(tmp_path):
    with pytest.raises(LabelerTimeout):
        run_stub(tmp_path, stubs.SILENT_LABELER, [passage(["a"])], batch_timeout=1.0)


def test_external_crash_is_unavailable(tmp_path):
    with pytest.raises((LabelerUnavailable, ProtocolViolation)):
        run_stub(tmp_path, stubs.CRASHING_LABELER, [passage(["a"]), passage(["b"], index=1)])


def test_external_unspawnable_command():
    with pytest.raises(LabelerUnavailable):
        list(labeler.run_external([passage(["a"])], "/no/such/binary-xyz"))


def test_labeler_spec_parse():
    assert LabelerSpec.parse("builtin:lex.tsv").kind == "builtin-lexicon"
    assert LabelerSpec.parse("external:python stub.py").parameter == "python stub.py"
    assert LabelerSpec.parse("file:labels.jsonl").kind == "precomputed-file"
    with pytest.raises(ValueError):
        LabelerSpec.parse("magic:beans")


# ---------------------------------------------------------------------------
# Training set
# ---------------------------------------------------------------------------


def test_load_training_set_empty(tmp_path):
    path = tmp_path / "train.tsv"
    path.write_text("")
    assert labeler.load_training_set(path) == []


def test_load_training_set_fixture(data_dir):
    examples = labeler.load_training_set(data_dir / "training_30.tsv")
    assert len(examples) == 30
    for ex in examples:
        assert len(ex.tokens) == len(ex.labels)
    assert examples[0].tokens[:2] == ("no", "no")
    assert examples[0].labels[0] == "act-neg"
    assert ("O" not in {l for ex in examples for l in ex.labels})


def test_load_training_set_bad_label(tmp_path):
    path = tmp_path / "train.tsv"
    path.write_text("ok\tsubj-ind\nbad\tsubj-xyz\n")
    with pytest.raises(UnknownLabel) as err:
        labeler.load_training_set(path)
    assert ":2" in str(err.value)


def test_load_training_set_bad_line(tmp_path):
    path = tmp_path / "train.tsv"
    path.write_text("token-without-label\n")
    with pytest.raises(ParseError) as err:
        labeler.load_training_set(path)
    assert ":1" in str(err.value)


# ---------------------------------------------------------------------------
# Labeled JSONL
# ---------------------------------------------------------------------------


def test_labeled_roundtrip(tmp_path):
    lps = [
        LabeledPassage("d", 0, ["a", "b"], ["subj-ind", None]),
        LabeledPassage("d", 1, [], []),
    ]
    path = tmp_path / "l.jsonl"
    assert labeler.write_labeled(lps, path) == 2
    assert labeler.read_labeled(path) == lps
    line = path.read_text().splitlines()[0]
    assert line.index('"doc_id"') < line.index('"index"') < line.index('"tokens"') < line.index('"labels"')


def test_read_labeled_rejects_length_mismatch(tmp_path):
    path = tmp_path / "l.jsonl"
    path.write_text('{"doc_id": "d", "index": 0, "tokens": ["a"], "labels": []}\n')
    with pytest.raises(ProtocolViolation):
        labeler.read_labeled(path)
