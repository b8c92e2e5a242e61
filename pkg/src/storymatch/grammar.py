"""The built-in story grammar: label registry, productions, generation, membership.

The grammar has no terminals. Its non-terminals are story elements (subjects,
actions, circumstances, ...) and the 28 registered labels are the element
names a labeler may attach to words. Sibling order never matters: membership
is decided on the multiset of labels, not their order.

Notation used for the production rules:
  one          exactly one occurrence
  optional     zero or one            (brackets in the usual notation)
  one_or_more  at least one           (braces)
  zero_or_more optional repetition    (brackets around braces)
Alternation is encoded by giving the alternative items a shared group index;
expanding the production picks exactly one item of the group.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import UnknownLabel

# ---------------------------------------------------------------------------
# Label registry
# ---------------------------------------------------------------------------

# Registry rows in id order. Ids are assigned by row position starting at 0
# and are stable: files and trained label maps depend on them.
_LABEL_ROWS = (
    ("dispute", "disp"),
    ("document", "doc"),
    ("event", "event"),
    ("semantic triple", "trip"),
    ("subject", "subj"),
    ("subject individual", "subj-ind"),
    ("individual name", "ind-name"),
    ("individual characteristic", "ind-char"),
    ("subject group", "subj-group"),
    ("group name", "group-name"),
    ("group characteristic", "group-char"),
    ("subject institution", "subj-inst"),
    ("action", "act"),
    ("action verb", "act-verb"),
    ("action negation", "act-neg"),
    ("action modality", "act-mod"),
    ("action circumstances", "act-circumstances"),
    ("circumstances time", "circum-time"),
    ("circumstances place", "circum-place"),
    ("circumstances type", "circum-type"),
    ("circumstances reason", "circum-reas"),
    ("circumstances instrument", "circum-instr"),
    ("circumstances outcome", "circum-out"),
    ("circumstances number", "circum-num"),
    ("object", "obj"),
    ("subject obj", "subj-obj"),
    ("object physical object", "obj-physobj"),
    ("object characteristic", "obj-char"),
)


@dataclass(frozen=True)
class Label:
    name: str
    abbrev: str
    id: int


LABELS: tuple[Label, ...] = tuple(
    Label(name, abbrev, i) for i, (name, abbrev) in enumerate(_LABEL_ROWS)
)
_BY_NAME = {lab.name: lab for lab in LABELS}
_BY_ABBREV = {lab.abbrev: lab for lab in LABELS}


def abbreviate(label_name: str) -> str:
    """Return the abbreviated form of a registered label name."""
    try:
        return _BY_NAME[label_name].abbrev
    except KeyError:
        raise UnknownLabel(f"unknown label name: {label_name!r}") from None


def resolve(abbrev: str) -> Label:
    """Return the Label registered under an abbreviation."""
    try:
        return _BY_ABBREV[abbrev]
    except KeyError:
        raise UnknownLabel(f"unknown label abbreviation: {abbrev!r}") from None


def label_of(value) -> Label:
    """Coerce a Label, abbreviation, or full name to its registry entry."""
    if isinstance(value, Label):
        if LABELS[value.id] != value:
            raise UnknownLabel(f"label not in registry: {value!r}")
        return value
    if value in _BY_ABBREV:
        return _BY_ABBREV[value]
    if value in _BY_NAME:
        return _BY_NAME[value]
    raise UnknownLabel(f"unknown label: {value!r}")


def encode_ids(seq) -> list[int]:
    """Map a label sequence to numeric ids, element by element."""
    return [label_of(x).id for x in seq]


def decode_ids(ids) -> list[Label]:
    """Inverse of encode_ids."""
    out = []
    for i in ids:
        if not isinstance(i, int) or not 0 <= i < len(LABELS):
            raise UnknownLabel(f"label id out of range: {i!r}")
        out.append(LABELS[i])
    return out


# ---------------------------------------------------------------------------
# Productions
# ---------------------------------------------------------------------------

ONE = "one"
OPTIONAL = "optional"
ONE_OR_MORE = "one_or_more"
ZERO_OR_MORE = "zero_or_more"


@dataclass(frozen=True)
class RhsItem:
    symbol: str
    multiplicity: str = ONE
    group: int | None = None


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[RhsItem, ...]


def _seq(lhs: str, *items) -> Production:
    rhs = tuple(
        RhsItem(sym, mult) for sym, mult in (i if isinstance(i, tuple) else (i, ONE) for i in items)
    )
    return Production(lhs, rhs)


def _alt(lhs: str, *symbols: str) -> Production:
    return Production(lhs, tuple(RhsItem(sym, ONE, group=0) for sym in symbols))


# The 13 production rules, in listing order. The start symbol is "dispute".
# "object" appears twice; the two rules are alternatives of each other, so
# expanding "object" chooses among the union of their alternatives.
PRODUCTIONS: tuple[Production, ...] = (
    _seq("dispute", ("event", ONE_OR_MORE), ("document", ONE_OR_MORE)),
    _seq("event", ("semantic triplet", ONE_OR_MORE)),
    _seq(
        "semantic triplet",
        ("subject", ONE_OR_MORE),
        ("action", ONE_OR_MORE),
        ("object", ZERO_OR_MORE),
    ),
    _alt("subject", "individual", "set of individuals", "institution"),
    _seq("action", "verb", ("negation", OPTIONAL), ("modality", OPTIONAL), "circumstances"),
    _alt("object", "subject", "physical object"),
    _seq("individual", "name", ("characteristics", OPTIONAL)),
    _seq("name", ("first name", OPTIONAL), ("last name", OPTIONAL), ("name of group", OPTIONAL)),
    _seq(
        "characteristics",
        ("gender", OPTIONAL),
        ("occupation", OPTIONAL),
        ("age", OPTIONAL),
        ("work organization", OPTIONAL),
    ),
    _seq("set of individuals", "name", ("characteristics", OPTIONAL)),
    _seq(
        "circumstances",
        "time",
        "place",
        ("type", OPTIONAL),
        ("reason", OPTIONAL),
        ("instrument", OPTIONAL),
        ("outcome", OPTIONAL),
    ),
    _seq("instrument", "physical object"),
    _alt("object", "individual", "physical object"),
)

START_SYMBOL = "dispute"

_PRODUCTIONS_BY_LHS: dict[str, list[Production]] = {}
for _p in PRODUCTIONS:
    _PRODUCTIONS_BY_LHS.setdefault(_p.lhs, []).append(_p)

NONTERMINALS = frozenset(_PRODUCTIONS_BY_LHS) | frozenset(
    item.symbol for p in PRODUCTIONS for item in p.rhs
)

# Non-terminals that emit a fixed label whenever they are visited. Symbols
# missing here either emit nothing ("name", "characteristics" are pure
# structure) or emit context-dependently (see emitted_abbrev).
_FIXED_EMISSION = {
    "dispute": "disp",
    "document": "doc",
    "event": "event",
    "semantic triplet": "trip",
    "individual": "subj-ind",
    "set of individuals": "subj-group",
    "institution": "subj-inst",
    "first name": "ind-name",
    "last name": "ind-name",
    "name of group": "group-name",
    "action": "act",
    "verb": "act-verb",
    "negation": "act-neg",
    "modality": "act-mod",
    "circumstances": "act-circumstances",
    "time": "circum-time",
    "place": "circum-place",
    "type": "circum-type",
    "reason": "circum-reas",
    "instrument": "circum-instr",
    "outcome": "circum-out",
    "physical object": "obj-physobj",
    "object": "obj",
}

_CHARACTERISTIC_LEAVES = frozenset({"gender", "occupation", "age", "work organization"})


def emitted_abbrev(symbol: str, in_object: bool, family: str | None) -> str | None:
    """Label abbreviation a visited non-terminal contributes, or None.

    in_object is True inside an object subtree: a subject reached that way is
    labeled as an object-position subject, and characteristic leaves become
    object characteristics. family tracks whether the nearest enclosing owner
    of a name/characteristics node is an individual or a group.
    """
    if symbol == "subject":
        return "subj-obj" if in_object else "subj"
    if symbol in _CHARACTERISTIC_LEAVES:
        if in_object:
            return "obj-char"
        return "ind-char" if family == "individual" else "group-char"
    return _FIXED_EMISSION.get(symbol)


def child_context(symbol: str, in_object: bool, family: str | None):
    if symbol == "object":
        in_object = True
    if symbol == "individual":
        family = "individual"
    elif symbol == "set of individuals":
        family = "group"
    return in_object, family


# ---------------------------------------------------------------------------
# Derivation generator
# ---------------------------------------------------------------------------

# Bound on repetition draws for one-or-more / zero-or-more items other than
# events and triplets, which have their own limits. Kept small so default
# generations stay within the default membership cap.
_INNER_REPEAT = 2


@dataclass(frozen=True)
class GenLimits:
    max_events: int = 3
    max_triplets: int = 3

    def validate(self):
        if self.max_events < 1 or self.max_triplets < 1:
            raise ValueError("generation limits must be positive")


def _repeat_count(rng: random.Random, item: RhsItem, limits: GenLimits) -> int:
    if item.multiplicity == ONE:
        return 1
    if item.multiplicity == OPTIONAL:
        return rng.randint(0, 1)
    if item.symbol == "event":
        hi = limits.max_events
    elif item.symbol == "semantic triplet":
        hi = limits.max_triplets
    else:
        hi = _INNER_REPEAT
    lo = 1 if item.multiplicity == ONE_OR_MORE else 0
    return rng.randint(lo, hi)


def _expand(symbol: str, rng: random.Random, limits: GenLimits, out: list[Label],
            in_object: bool, family: str | None) -> None:
    abbrev = emitted_abbrev(symbol, in_object, family)
    if abbrev is not None:
        out.append(_BY_ABBREV[abbrev])
    in_object, family = child_context(symbol, in_object, family)
    rules = _PRODUCTIONS_BY_LHS.get(symbol)
    if rules is None:
        return
    production = rules[0] if len(rules) == 1 else rng.choice(rules)
    grouped = [item for item in production.rhs if item.group is not None]
    if grouped:
        choice = rng.choice(grouped)
        _expand(choice.symbol, rng, limits, out, in_object, family)
        return
    for item in production.rhs:
        for _ in range(_repeat_count(rng, item, limits)):
            _expand(item.symbol, rng, limits, out, in_object, family)


def generate_sequence(seed: int, limits: GenLimits | None = None) -> list[Label]:
    """Expand the start symbol into a label sequence, deterministically per seed.

    Alternations, optional items, and repetition counts are drawn from a
    PRNG seeded with `seed`; the emitted labels are the visited non-terminals
    that carry registry labels, in derivation order.
    """
    limits = limits or GenLimits()
    limits.validate()
    rng = random.Random(seed)
    out: list[Label] = []
    _expand(START_SYMBOL, rng, limits, out, in_object=False, family=None)
    return out


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

DEFAULT_MEMBERSHIP_CAP = 8


@dataclass(frozen=True)
class MembershipResult:
    consistent: bool
    diagnostics: str = ""

    def __bool__(self):
        return self.consistent


def _fail(msg: str) -> MembershipResult:
    return MembershipResult(False, msg)


def check_membership(seq, cap: int = DEFAULT_MEMBERSHIP_CAP) -> MembershipResult:
    """Decide whether a label multiset is producible by some derivation.

    Order is ignored. Every one-or-more / zero-or-more repetition in the
    productions is searched up to `cap` occurrences per expansion site.
    Diagnostics name the first violated constraint; an inconsistent sequence
    is a result, not an error.
    """
    if cap < 1:
        raise ValueError("membership cap must be >= 1")
    counts: Counter[str] = Counter()
    for x in seq:
        try:
            counts[label_of(x).abbrev] += 1
        except UnknownLabel:
            return _fail(f"unregistered label: {x!r}")

    c = counts.__getitem__

    def within(n, lo, hi, what):
        if not lo <= n <= hi:
            return f"{what} count must be in [{lo}, {hi}], found {n}"
        return None

    if c("disp") != 1:
        return _fail(
            "a derivation emits the start label exactly once, "
            f"found {c('disp')} 'disp'"
        )
    for what, n, lo, hi in (
        ("document", c("doc"), 1, cap),
        ("event", c("event"), 1, cap),
    ):
        msg = within(n, lo, hi, what)
        if msg:
            return _fail(msg)
    e = c("event")
    t = c("trip")
    msg = within(t, e, e * cap, "semantic-triple")
    if msg:
        return _fail(msg)

    subj = c("subj")
    act = c("act")
    for what, n in (("subject", subj), ("action", act)):
        msg = within(n, t, t * cap, what)
        if msg:
            return _fail(msg)

    # Each action carries exactly one verb and one circumstances block, and
    # each circumstances block exactly one time and one place.
    for abbrev in ("act-verb", "act-circumstances", "circum-time", "circum-place"):
        if c(abbrev) != act:
            return _fail(f"'{abbrev}' count must equal action count {act}, found {c(abbrev)}")
    for abbrev in ("act-neg", "act-mod", "circum-type", "circum-reas", "circum-out"):
        if c(abbrev) > act:
            return _fail(f"'{abbrev}' count must not exceed action count {act}, found {c(abbrev)}")
    n_instr = c("circum-instr")
    if n_instr > act:
        return _fail(f"'circum-instr' count must not exceed action count {act}, found {n_instr}")

    if c("circum-num") > 0:
        return _fail("'circum-num' is registered for labeling but not derivable by any production")

    objects = c("obj")
    msg = within(objects, 0, t * cap, "object")
    if msg:
        return _fail(msg)
    obj_subjects = c("subj-obj")
    # Every instrument expands to exactly one physical object; the rest of
    # the physical-object labels must sit directly under objects.
    obj_phys = c("obj-physobj") - n_instr
    if obj_phys < 0:
        return _fail(
            f"'obj-physobj' count {c('obj-physobj')} is below the instrument count {n_instr}"
        )
    obj_individuals = objects - obj_subjects - obj_phys
    if obj_individuals < 0:
        return _fail(
            f"object count {objects} cannot cover {obj_subjects} object-position subjects "
            f"and {obj_phys} direct physical objects"
        )

    # Split subject expansions between subject slots (emitting 'subj') and
    # object position (emitting 'subj-obj'), then check that name and
    # characteristic counts fit the implied individual/group nodes.
    individuals = c("subj-ind")
    groups = c("subj-group")
    institutions = c("subj-inst")
    if individuals + groups + institutions != subj + obj_subjects + obj_individuals:
        return _fail(
            "individual/group/institution counts must cover every subject expansion "
            f"plus direct object individuals: {individuals}+{groups}+{institutions} != "
            f"{subj}+{obj_subjects}+{obj_individuals}"
        )
    for i_sub in range(min(subj, individuals) + 1):
        for g_sub in range(min(subj - i_sub, groups) + 1):
            n_sub = subj - i_sub - g_sub
            if n_sub > institutions:
                continue
            i_obj = individuals - i_sub - obj_individuals
            g_obj = groups - g_sub
            n_obj = institutions - n_sub
            if min(i_obj, g_obj, n_obj) < 0 or i_obj + g_obj + n_obj != obj_subjects:
                continue
            name_nodes = individuals + groups
            if c("ind-char") > 4 * i_sub:
                continue
            if c("group-char") > 4 * g_sub:
                continue
            if c("obj-char") > 4 * (i_obj + g_obj + obj_individuals):
                continue
            if c("ind-name") > 2 * name_nodes or c("group-name") > name_nodes:
                continue
            return MembershipResult(True)
    return _fail(
        "name/characteristic counts cannot be reconciled with any split of "
        "subjects between subject and object position"
    )


# ---------------------------------------------------------------------------
# Dump
# ---------------------------------------------------------------------------

_MULT_MARKS = {ONE: "", OPTIONAL: "?", ONE_OR_MORE: "+", ZERO_OR_MORE: "*"}


def format_production(p: Production) -> str:
    if any(item.group is not None for item in p.rhs):
        body = " | ".join(f"<{item.symbol}>" for item in p.rhs)
    else:
        body = " ".join(f"<{item.symbol}>{_MULT_MARKS[item.multiplicity]}" for item in p.rhs)
    return f"<{p.lhs}> -> {body}"


def dump_text() -> str:
    """Human-readable listing of the label registry and production rules."""
    lines = ["labels (id\tabbrev\tname):"]
    for lab in LABELS:
        lines.append(f"  {lab.id}\t{lab.abbrev}\t{lab.name}")
    lines.append("")
    lines.append(f"productions (start symbol <{START_SYMBOL}>):")
    for p in PRODUCTIONS:
        lines.append("  " + format_production(p))
    return "\n".join(lines) + "\n"
