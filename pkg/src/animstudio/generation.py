"""Prompt construction and response parsing for the generation protocol.

The model must answer with a single JSON object. Full mode returns named
code components grouped by part; incremental mode returns an edit script
against line-marked source. Both carry a reasoning field (the model
plans before coding) and a short description reused later by the
video-correction loop.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .model import PARTS, CodeBundle, normalize_newlines
from .patching import EditScript, mark_lines, scripts_from_wire, script_to_wire
from .repair import format_bundle

MODES = ("full", "incremental")

# The four placeholder forms models substitute for real code, matched
# case-insensitively as substrings; extendable per request.
DEFAULT_LAZY_PATTERNS = (
    "simplistic representation",
    "add style here",
    "code omitted",
    "other lines of code unchanged",
)

LAZY_RETRY_INSTRUCTION = (
    "Your previous answer replaced code with placeholder comments. "
    "Answer again with the same JSON schema and output the complete code "
    "for every component or edit, with no omissions or placeholders."
)


class ResponseError(Exception):
    pass


class MalformedResponse(ResponseError):
    """No parseable JSON object in the model output."""


class SchemaViolation(ResponseError):
    """Parsed JSON is missing required fields or has wrong shapes."""


class ModeMismatch(ResponseError):
    """Response carries the other mode's payload (e.g. edits in full mode)."""


@dataclass(frozen=True)
class ContextMessage:
    role: str  # user | assistant
    content: str


@dataclass(frozen=True)
class GenerationRequest:
    mode: str
    user_prompt: str
    context: tuple[ContextMessage, ...] = ()
    bundle: CodeBundle | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown generation mode: {self.mode!r}")
        if self.mode == "incremental" and self.bundle is None:
            raise ValueError("incremental mode requires a bundle")
        if self.mode == "full" and self.bundle is not None:
            raise ValueError("full mode does not take a bundle")


@dataclass(frozen=True)
class Component:
    name: str
    part: str
    code: str


@dataclass(frozen=True)
class GenerationResult:
    reasoning: str
    description: str
    components: tuple[Component, ...] = ()
    edits: tuple[EditScript, ...] = ()


@dataclass(frozen=True)
class LazyFinding:
    part: str
    line_index: int
    matched_pattern: str


_BASE_ROLE = (
    "You are an expert front-end developer who creates polished web animation "
    "effects with plain HTML, CSS and JavaScript. Pages are organized into three "
    "parts: template (markup), style (stylesheet) and script. Prefer pure CSS "
    "animations; use script only when CSS cannot express the effect."
)

_FULL_SCHEMA = (
    '{\n'
    '  "reasoning": "step-by-step plan for the animation, written before any code",\n'
    '  "description": "short plain-language summary of what the finished animation shows",\n'
    '  "components": [\n'
    '    {"name": "component name", "part": "template" | "style" | "script", "code": "complete code"}\n'
    '  ]\n'
    '}'
)

_INCREMENTAL_SCHEMA = (
    '{\n'
    '  "reasoning": "step-by-step plan for the change, written before any edits",\n'
    '  "description": "short plain-language summary of the animation after the change",\n'
    '  "edits": [\n'
    '    {"type": "insert" | "remove" | "update", "part": "template" | "style" | "script",\n'
    '     "fromLine": 1, "toLine": 1, "content": "replacement or inserted lines"}\n'
    '  ]\n'
    '}'
)


def build_system_prompt(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown generation mode: {mode!r}")
    if mode == "full":
        return (
            f"{_BASE_ROLE}\n\n"
            "Respond with exactly one JSON object and nothing else, following this schema:\n"
            f"{_FULL_SCHEMA}\n\n"
            "Rules:\n"
            "- Fill in \"reasoning\" first and think the design through before writing code.\n"
            "- Split the code into small, named components, each tagged with its part.\n"
            "- Every component must contain complete, directly runnable code. Never stand in "
            "for code with placeholder comments such as \"code omitted\".\n"
        )
    return (
        f"{_BASE_ROLE}\n\n"
        "The current code is provided with every line prefixed by a \"(N) | \" marker, "
        "where N is the 1-based line number.\n"
        "Respond with exactly one JSON object and nothing else, following this schema:\n"
        f"{_INCREMENTAL_SCHEMA}\n\n"
        "Rules:\n"
        "- Fill in \"reasoning\" first and plan the change before writing edits.\n"
        "- Reference only the marked line numbers; never invent line numbers.\n"
        "- For insert, fromLine equals toLine and the content is placed before that line; "
        "line count + 1 appends at the end of the part.\n"
        "- For update, the content replaces lines fromLine through toLine inclusive; "
        "remove carries no content.\n"
        "- Edit ranges must not overlap. Keep edits minimal; do not restate unchanged lines.\n"
        "- Content must be complete code. Never stand in for code with placeholder "
        "comments such as \"code omitted\".\n"
    )


def _embed_bundle(bundle: CodeBundle) -> str:
    sections = [f"Current code of page \"{bundle.filename}\", line-marked:"]
    for part in PARTS:
        text = bundle.part(part)
        if text.strip():
            sections.append(f"--- {part} ---\n{mark_lines(text).marked}")
        else:
            sections.append(f"--- {part} ---\n(this part is currently empty)")
    return "\n\n".join(sections)


def build_messages(request: GenerationRequest) -> list[dict]:
    """System prompt, prior rounds in ancestor order, then the new user turn."""
    messages = [{"role": "system", "content": build_system_prompt(request.mode)}]
    messages.extend({"role": m.role, "content": m.content} for m in request.context)
    if request.mode == "incremental":
        beautified, _ = format_bundle(request.bundle)
        body = _embed_bundle(beautified) + f"\n\nRequest: {request.user_prompt}"
    else:
        body = request.user_prompt
    messages.append({"role": "user", "content": body})
    return messages


def build_incremental_messages(request: GenerationRequest) -> list[dict]:
    if request.mode != "incremental":
        raise ValueError("request is not incremental")
    return build_messages(request)


def build_fix_messages(bundle: CodeBundle, error_report: str) -> list[dict]:
    beautified, _ = format_bundle(bundle)
    body = _embed_bundle(beautified)
    if error_report.strip():
        body += f"\n\nThe code has the following problems:\n{error_report.strip()}"
        body += "\n\nProduce edits that fix these problems without changing the animation's intent."
    else:
        body += (
            "\n\nReview the code for syntax errors or broken structure and produce edits "
            "that repair anything wrong, without changing the animation's intent."
        )
    return [
        {"role": "system", "content": build_system_prompt("incremental")},
        {"role": "user", "content": body},
    ]


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:[A-Za-z0-9_-]+)?\n(.*?)```", re.DOTALL)


def extract_json_object(raw: str) -> dict:
    """Tolerant extraction: the raw text, any fenced block, or the outermost
    brace-balanced slice."""
    candidates = [raw.strip()]
    candidates.extend(m.strip() for m in _FENCE_RE.findall(raw))
    start = raw.find("{")
    if start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(raw)):
            ch = raw[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidates.append(raw[start : i + 1])
                    break
    for candidate in candidates:
        if not candidate.startswith("{"):
            continue
        try:
            obj = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise MalformedResponse("no JSON object found in model response")


def _require_str(obj: dict, key: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise SchemaViolation(f"missing or non-string field {key!r}")
    return normalize_newlines(value)


def parse_generation_response(raw: str, mode: str) -> GenerationResult:
    if mode not in MODES:
        raise ValueError(f"unknown generation mode: {mode!r}")
    obj = extract_json_object(raw)
    reasoning = _require_str(obj, "reasoning")
    description = _require_str(obj, "description")

    if mode == "full":
        if obj.get("edits"):
            raise ModeMismatch("full-mode response contains edits")
        raw_components = obj.get("components")
        if not isinstance(raw_components, list) or not raw_components:
            raise SchemaViolation("full-mode response requires a non-empty components list")
        components = []
        for i, c in enumerate(raw_components):
            if not isinstance(c, dict):
                raise SchemaViolation(f"component {i} is not an object")
            part = c.get("part")
            if part not in PARTS:
                raise SchemaViolation(f"component {i} has invalid part {part!r}")
            name = c.get("name")
            code = c.get("code")
            if not isinstance(name, str) or not isinstance(code, str):
                raise SchemaViolation(f"component {i} requires string name and code")
            components.append(Component(name=name, part=part, code=normalize_newlines(code)))
        return GenerationResult(reasoning, description, components=tuple(components))

    if obj.get("components"):
        raise ModeMismatch("incremental-mode response contains components")
    raw_edits = obj.get("edits")
    if not isinstance(raw_edits, list) or not raw_edits:
        raise SchemaViolation("incremental-mode response requires a non-empty edits list")
    for i, e in enumerate(raw_edits):
        if not isinstance(e, dict):
            raise SchemaViolation(f"edit {i} is not an object")
        if e.get("type") not in ("insert", "remove", "update"):
            raise SchemaViolation(f"edit {i} has invalid type {e.get('type')!r}")
        if e.get("part") not in PARTS:
            raise SchemaViolation(f"edit {i} has invalid part {e.get('part')!r}")
        for key in ("fromLine", "toLine"):
            if not isinstance(e.get(key), int) or isinstance(e.get(key), bool):
                raise SchemaViolation(f"edit {i} requires integer {key}")
        if "content" in e and e["content"] is not None and not isinstance(e["content"], str):
            raise SchemaViolation(f"edit {i} content must be a string")
        if e.get("content") is not None:
            e["content"] = normalize_newlines(e["content"])
    scripts = scripts_from_wire(raw_edits)
    return GenerationResult(reasoning, description, edits=tuple(scripts))


def serialize_generation_result(result: GenerationResult) -> str:
    obj: dict = {"reasoning": result.reasoning, "description": result.description}
    if result.components:
        obj["components"] = [
            {"name": c.name, "part": c.part, "code": c.code} for c in result.components
        ]
    else:
        obj["edits"] = [w for s in result.edits for w in script_to_wire(s)]
    return json.dumps(obj, ensure_ascii=False, indent=2)


# ---------------------------------------------------------------------------
# Lazy-output detection
# ---------------------------------------------------------------------------

def detect_lazy_output(
    result: GenerationResult,
    patterns: tuple[str, ...] = DEFAULT_LAZY_PATTERNS,
    extra_patterns: tuple[str, ...] = (),
) -> list[LazyFinding]:
    all_patterns = tuple(patterns) + tuple(extra_patterns)
    findings: list[LazyFinding] = []

    def scan(part: str, code: str) -> None:
        for line_no, line in enumerate(code.split("\n"), 1):
            lowered = line.lower()
            for pattern in all_patterns:
                if pattern.lower() in lowered:
                    findings.append(LazyFinding(part, line_no, pattern))

    for component in result.components:
        scan(component.part, component.code)
    for script in result.edits:
        for edit in script.edits:
            if edit.content:
                scan(script.part, edit.content)
    return findings
