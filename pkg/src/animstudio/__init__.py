"""LLM-assisted web animation authoring engine."""

from .model import CodeBundle, GenerationSettings
from .patching import Edit, EditScript, apply_edits, mark_lines, strip_markers, validate_script
from .repair import RepairReport, repair_all
from .versioning import VersionNode, VersionTree

__all__ = [
    "CodeBundle",
    "GenerationSettings",
    "Edit",
    "EditScript",
    "apply_edits",
    "mark_lines",
    "strip_markers",
    "validate_script",
    "RepairReport",
    "repair_all",
    "VersionNode",
    "VersionTree",
]

__version__ = "0.1.0"
