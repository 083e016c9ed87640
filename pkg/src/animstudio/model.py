"""Shared domain types: code bundles and generation settings.

All text enters the engine LF-normalized so that line numbers mean the
same thing on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

PARTS = ("template", "style", "script")


def normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


@dataclass(frozen=True)
class CodeBundle:
    """One page's three editable parts: the unit of preview, diffing and versioning."""

    filename: str = "index.html"
    template: str = ""
    style: str = ""
    script: str = ""

    def __post_init__(self) -> None:
        for part in PARTS:
            object.__setattr__(self, part, normalize_newlines(getattr(self, part)))

    def part(self, name: str) -> str:
        if name not in PARTS:
            raise KeyError(f"unknown bundle part: {name!r}")
        return getattr(self, name)

    def with_part(self, name: str, text: str) -> CodeBundle:
        if name not in PARTS:
            raise KeyError(f"unknown bundle part: {name!r}")
        return replace(self, **{name: text})

    def to_dict(self) -> dict:
        return {
            "filename": self.filename,
            "template": self.template,
            "style": self.style,
            "script": self.script,
        }

    @classmethod
    def from_dict(cls, data: dict) -> CodeBundle:
        return cls(
            filename=data["filename"],
            template=data.get("template", ""),
            style=data.get("style", ""),
            script=data.get("script", ""),
        )


@dataclass(frozen=True)
class GenerationSettings:
    """Per-project generation options carried in the project document."""

    model_name: str = "gpt-4o"
    max_correction_rounds: int = 3
    context_message_cap: int = 12

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "max_correction_rounds": self.max_correction_rounds,
            "context_message_cap": self.context_message_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> GenerationSettings:
        return cls(
            model_name=data.get("model_name", "gpt-4o"),
            max_correction_rounds=int(data.get("max_correction_rounds", 3)),
            context_message_cap=int(data.get("context_message_cap", 12)),
        )
