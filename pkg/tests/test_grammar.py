import random
from collections import Counter

import pytest

from storymatch import grammar
from storymatch.errors import UnknownLabel

from oracles import derivation_multisets


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def test_registry_has_28_labels():
    assert len(grammar.LABELS) == 28
    assert len({l.name for l in grammar.LABELS}) == 28
    assert len({l.abbrev for l in grammar.LABELS}) == 28
    assert [l.id for l in grammar.LABELS] == list(range(28))


def test_id_assignment_follows_row_order():
    assert grammar.LABELS[0].name == "dispute"
    assert grammar.LABELS[0].abbrev == "disp"
    assert grammar.LABELS[27].name == "object characteristic"


@pytest.mark.parametrize(
    "name,abbrev",
    [
        ("subject individual", "subj-ind"),
        ("action negation", "act-neg"),
        ("semantic triple", "trip"),
        ("circumstances number", "circum-num"),
    ],
)
def test_abbreviate(name, abbrev):
    assert grammar.abbreviate(name) == abbrev


def test_abbreviate_unknown():
    with pytest.raises(UnknownLabel):
        grammar.abbreviate("flying carpet")


def test_resolve():
    assert grammar.resolve("circum-num").name == "circumstances number"
    lab = grammar.resolve("disp")
    assert lab.name == "dispute" and lab.id == 0
    with pytest.raises(UnknownLabel):
        grammar.resolve("")


def test_resolve_abbreviate_roundtrip():
    for lab in grammar.LABELS:
        assert grammar.resolve(grammar.abbreviate(lab.name)) == lab


def test_encode_decode():
    assert grammar.encode_ids([]) == []
    assert grammar.encode_ids(["dispute"]) == [0]
    assert grammar.encode_ids(["disp"]) == [0]
    everything = list(grammar.LABELS)
    assert grammar.decode_ids(grammar.encode_ids(everything)) == everything
    with pytest.raises(UnknownLabel):
        grammar.encode_ids(["nope"])
    with pytest.raises(UnknownLabel):
        grammar.decode_ids([28])


# ---------------------------------------------------------------------------
# Productions
# ---------------------------------------------------------------------------


def test_thirteen_productions_single_start():
    assert len(grammar.PRODUCTIONS) == 13
    assert grammar.START_SYMBOL == "dispute"
    # the start symbol appears on no right-hand side
    rhs_symbols = {i.symbol for p in grammar.PRODUCTIONS for i in p.rhs}
    assert "dispute" not in rhs_symbols


def test_every_rhs_symbol_is_known():
    for p in grammar.PRODUCTIONS:
        for item in p.rhs:
            assert item.symbol in grammar.NONTERMINALS


def test_object_alternatives_are_unioned():
    object_rules = [p for p in grammar.PRODUCTIONS if p.lhs == "object"]
    assert len(object_rules) == 2
    alts = {i.symbol for p in object_rules for i in p.rhs}
    assert alts == {"subject", "individual", "physical object"}


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def test_generation_deterministic():
    for seed in (0, 7, 123456):
        assert grammar.generate_sequence(seed) == grammar.generate_sequence(seed)


def test_generation_respects_limits_and_starts_at_root():
    for seed in range(200):
        seq = grammar.generate_sequence(seed, grammar.GenLimits(2, 2))
        abbrevs = [l.abbrev for l in seq]
        assert abbrevs[0] == "disp"
        counts = Counter(abbrevs)
        assert 1 <= counts["event"] <= 2
        assert counts["trip"] <= 2 * counts["event"]


def test_generation_rejects_bad_limits():
    with pytest.raises(ValueError):
        grammar.generate_sequence(0, grammar.GenLimits(0, 3))


def test_generated_sequences_pass_membership():
    for seed in range(300):
        seq = grammar.generate_sequence(seed)
        result = grammar.check_membership(seq)
        assert result.consistent, (seed, result.diagnostics)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def test_membership_examples():
    assert not grammar.check_membership([])
    assert not grammar.check_membership(["circum-time"])
    assert grammar.check_membership(grammar.generate_sequence(7))
    bad = grammar.check_membership(["disp", "zzz"])
    assert not bad and "zzz" in bad.diagnostics


def test_membership_ignores_order():
    seq = [l.abbrev for l in grammar.generate_sequence(11)]
    rng = random.Random(0)
    for _ in range(5):
        rng.shuffle(seq)
        assert grammar.check_membership(seq)


def test_membership_rejects_cap_zero():
    with pytest.raises(ValueError):
        grammar.check_membership(["disp"], cap=0)


def test_membership_agrees_with_enumeration_small_multisets():
    # All multisets of size <= 5 over a 6-label sub-alphabet. No derivation is
    # that small, so the enumeration is empty and the checker must agree.
    sub = ["disp", "doc", "event", "trip", "subj", "subj-inst"]
    enumerated = derivation_multisets(cap=2, max_size=5)
    assert enumerated == set()

    def multisets(prefix, remaining, start):
        yield tuple(prefix)
        if remaining == 0:
            return
        for i in range(start, len(sub)):
            prefix.append(sub[i])
            yield from multisets(prefix, remaining - 1, i)
            prefix.pop()

    n = 0
    for m in multisets([], 5, 0):
        got = grammar.check_membership(m, cap=2).consistent
        assert got == (tuple(sorted(m)) in enumerated), m
        n += 1
    assert n == 462  # multisets of size <= 5 from 6 labels


def test_membership_agrees_with_enumeration_real_derivations():
    # Exhaustive agreement at cap 2 on every multiset of size <= 14, reached
    # from enumerated derivations and single-label perturbations of them.
    enumerated = derivation_multisets(cap=2, max_size=14)
    assert enumerated, "enumeration should find derivations up to size 14"
    for m in enumerated:
        assert grammar.check_membership(m, cap=2), m
    rng = random.Random(42)
    abbrevs = [l.abbrev for l in grammar.LABELS]
    candidates = set()
    for m in enumerated:
        lst = list(m)
        candidates.add(tuple(sorted(lst + [rng.choice(abbrevs)])))
        dropped = list(lst)
        dropped.pop(rng.randrange(len(dropped)))
        candidates.add(tuple(sorted(dropped)))
    for m in candidates:
        if len(m) > 14:
            continue
        assert grammar.check_membership(m, cap=2).consistent == (m in enumerated), m


def test_dump_lists_labels_and_productions():
    text = grammar.dump_text()
    assert "subj-ind" in text and "<dispute>" in text
    assert text.count("->") == 13
