"""Built-in example documents with recorded expected verdicts."""

from __future__ import annotations

import json
from importlib import resources
from typing import Optional

from ..documents import InputDocument, parse_document

ENTRIES = (
    "ex-2-1",
    "ex-2-2",
    "ex-2-3",
    "prop-5-1-1a",
    "prop-5-1-1b",
    "prop-5-1-2",
    "prop-5-1-2-abelian",
    "prop-5-1-3",
    "prop-5-1-4",
    "moebius-rotation-5",
    "moebius-inversion",
    "moebius-dilation",
)


def list_entries() -> tuple[str, ...]:
    return ENTRIES


def load_raw(name: str) -> dict:
    if name not in ENTRIES:
        raise KeyError(f"unknown corpus entry {name!r}; available: {', '.join(ENTRIES)}")
    data = resources.files("germforge.corpus").joinpath(name + ".json").read_text()
    return json.loads(data)


def load(name: str, truncation_override: Optional[int] = None) -> InputDocument:
    return parse_document(load_raw(name), name=name, truncation_override=truncation_override)
