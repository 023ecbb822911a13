"""Brace-delimited field grammar shared by all generation prompts.

A field renders as ``name: {value}``. Parsing takes everything between the
opening brace and the *first* closing brace; there is no nesting and no
escape convention, so rendered values must not contain ``}``. An opening
brace inside a value is tolerated (it round-trips), a closing brace is not.
"""

from __future__ import annotations


class BraceParseError(Exception):
    """A completion does not match the brace-field grammar."""


def render_field(name: str, value: str) -> str:
    if "}" in value:
        raise ValueError(
            f"field {name!r} contains '}}', which the brace format cannot represent"
        )
    return f"{name}: {{{value}}}"


def field_cue(name: str) -> str:
    """The prompt suffix that asks the model to fill in ``name``."""
    return f"{name}: {{"


def extract_field(text: str, name: str, start: int = 0) -> tuple[str, int]:
    """Extract the first ``name: {...}`` field at or after ``start``.

    Returns (value, index just past the closing brace). Raises
    :class:`BraceParseError` when the field is absent or never closed.
    """
    cue = field_cue(name)
    at = text.find(cue, start)
    if at < 0:
        raise BraceParseError(f"missing field {name!r}")
    open_end = at + len(cue)
    close = text.find("}", open_end)
    if close < 0:
        raise BraceParseError(f"unclosed field {name!r}")
    return text[open_end:close], close + 1


def parse_fields(text: str, names: tuple[str, ...]) -> dict[str, str]:
    """Parse the named fields in order, each starting where the last ended."""
    values: dict[str, str] = {}
    cursor = 0
    for name in names:
        values[name], cursor = extract_field(text, name, cursor)
    return values


def truncate_at_close(text: str) -> str:
    """Everything up to the first ``}``; the whole text when there is none.

    Idempotent: the result never contains a closing brace.
    """
    close = text.find("}")
    return text if close < 0 else text[:close]
