"""Story-element labeling and edit-distance matching for literary texts."""

from . import corpus, grammar, labeler, matcher  # noqa: F401

__version__ = "0.1.0"
