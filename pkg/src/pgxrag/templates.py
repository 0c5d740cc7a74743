"""Prompt templates for the two generation layers.

Templates are plain text files with single-brace ``{placeholder}`` slots.
The four shipped templates are treated as frozen assets: answer quality was
tuned against these exact strings (including their quirks), so rendering is
pure substitution and any drift is an error, not a convenience.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import MissingBinding, MissingFile, UnknownPlaceholder

PLACEHOLDER_NAMES = frozenset({"source", "query", "content", "user_input", "all_summaries"})

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


class TemplateId(str, Enum):
    LAYER1_SYSTEM = "layer1_system"
    LAYER1_USER = "layer1_user"
    LAYER2_SYSTEM = "layer2_system"
    LAYER2_USER = "layer2_user"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: TemplateId
    text: str

    def __post_init__(self):
        unknown = self.placeholders - PLACEHOLDER_NAMES
        if unknown:
            raise UnknownPlaceholder(sorted(unknown)[0])

    @cached_property
    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER_RE.findall(self.text))


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Single-pass substitution; bindings must cover the placeholders exactly.

    Extra bindings are rejected rather than ignored — a caller passing an
    unused binding almost always misspelled a placeholder name.  Values are
    never re-scanned, so braces inside bound text stay literal.
    """
    present = template.placeholders
    missing = sorted(present - set(bindings))
    if missing:
        raise MissingBinding(missing[0])
    extra = sorted(set(bindings) - present)
    if extra:
        raise UnknownPlaceholder(extra[0])
    return _PLACEHOLDER_RE.sub(lambda m: bindings[m.group(1)], template.text)


def load_templates(directory: Path | str | None = None) -> dict[TemplateId, PromptTemplate]:
    """Load all four templates from a directory, or the packaged defaults."""
    out: dict[TemplateId, PromptTemplate] = {}
    for tid in TemplateId:
        name = f"{tid.value}.txt"
        if directory is None:
            text = resources.files("pgxrag").joinpath(f"data/templates/{name}").read_text("utf-8")
        else:
            path = Path(directory) / name
            if not path.is_file():
                raise MissingFile(f"template file not found: {path}")
            text = path.read_text("utf-8")
        out[tid] = PromptTemplate(template_id=tid, text=text)
    return out
