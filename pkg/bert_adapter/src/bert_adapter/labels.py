"""Label inventory for the token classifier.

Class indices 0..27 are the story-element abbreviations in their stable
registry order (`storymatch grammar dump` prints the same ids); index 28 is
the null class "O" for unlabeled words. Files written by finetune and read
by serve depend on this ordering.
"""

LABEL_ABBREVS = (
    "disp",
    "doc",
    "event",
    "trip",
    "subj",
    "subj-ind",
    "ind-name",
    "ind-char",
    "subj-group",
    "group-name",
    "group-char",
    "subj-inst",
    "act",
    "act-verb",
    "act-neg",
    "act-mod",
    "act-circumstances",
    "circum-time",
    "circum-place",
    "circum-type",
    "circum-reas",
    "circum-instr",
    "circum-out",
    "circum-num",
    "obj",
    "subj-obj",
    "obj-physobj",
    "obj-char",
)

NULL_CLASS = "O"

CLASSES = LABEL_ABBREVS + (NULL_CLASS,)
NUM_CLASSES = len(CLASSES)  # 29

ID2LABEL = {i: label for i, label in enumerate(CLASSES)}
LABEL2ID = {label: i for i, label in enumerate(CLASSES)}
