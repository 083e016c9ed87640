"""Iterative video-based correction.

Each round records the current node's animation to video, asks a
video-understanding model whether the branch's accumulated requirements
are met, and, when they are not, feeds the unmet items back into an
incremental generation that produces a new correction node. The loop
stops on satisfaction, exhausted budget, or an analyzer failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

from .generation import MalformedResponse, extract_json_object
from .versioning import VersionNode, VersionTree, ancestor_path

TERMINALS = ("satisfied", "budget-exhausted", "analyzer-error", "generation-error")

ACCEPTED_VIDEO_SUFFIXES = (".mp4",)


class AnalyzerError(Exception):
    pass


class VideoUnavailable(Exception):
    pass


@dataclass(frozen=True)
class AnalyzerVerdict:
    satisfied: bool
    unmet: tuple[str, ...] = ()
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.satisfied and self.unmet:
            raise ValueError("a satisfied verdict cannot carry unmet requirements")

    def to_dict(self) -> dict:
        return {"satisfied": self.satisfied, "unmet": list(self.unmet), "rationale": self.rationale}


@dataclass(frozen=True)
class CorrectionRound:
    video_ref: str
    verdict: AnalyzerVerdict | None
    follow_up_prompt: str | None = None
    result_node_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "video_ref": self.video_ref,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "follow_up_prompt": self.follow_up_prompt,
            "result_node_id": self.result_node_id,
        }


@dataclass(frozen=True)
class CorrectionRun:
    start_node_id: str
    rounds: tuple[CorrectionRound, ...]
    terminal: str
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "start_node_id": self.start_node_id,
            "rounds": [r.to_dict() for r in self.rounds],
            "terminal": self.terminal,
            "error": self.error,
        }


class VideoAnalyzer(Protocol):
    def analyze(self, video_ref: str, requirements: Sequence[str]) -> AnalyzerVerdict: ...


def parse_verdict(raw: str) -> AnalyzerVerdict:
    obj = extract_json_object(raw)
    if "satisfied" not in obj:
        raise MalformedResponse("verdict lacks a 'satisfied' field")
    satisfied = bool(obj["satisfied"])
    unmet_raw = obj.get("unmet") or []
    if not isinstance(unmet_raw, list):
        raise MalformedResponse("verdict 'unmet' is not a list")
    unmet = tuple(str(item) for item in unmet_raw)
    rationale = str(obj.get("rationale", ""))
    if satisfied:
        unmet = ()
    return AnalyzerVerdict(satisfied=satisfied, unmet=unmet, rationale=rationale)


class GatewayVideoAnalyzer:
    """Analyzer backed by the shared gateway transport (video-capable model).
    One schema retry when the first answer does not parse."""

    def __init__(self, client):
        self.client = client

    def analyze(self, video_ref: str, requirements: Sequence[str]) -> AnalyzerVerdict:
        try:
            raw = self.client.analyze_video_raw(video_ref, list(requirements))
        except Exception as err:
            raise AnalyzerError(f"analyzer transport failed: {err}") from err
        try:
            return parse_verdict(raw)
        except MalformedResponse:
            pass
        try:
            raw = self.client.analyze_video_raw(
                video_ref,
                list(requirements),
                schema_note="Your previous answer was not valid JSON. Respond with only the JSON object.",
            )
            return parse_verdict(raw)
        except MalformedResponse as err:
            raise AnalyzerError(f"analyzer answer unparseable after retry: {err}") from err
        except Exception as err:
            raise AnalyzerError(f"analyzer transport failed: {err}") from err


class ScheduleAnalyzer:
    """Mock analyzer driven by a schedule string, e.g.
    "unsat:bubbles do not move;light missing|sat". Entries are consumed per
    call; the last entry repeats. Used for demos and UI integration tests."""

    def __init__(self, verdicts: list[AnalyzerVerdict]):
        if not verdicts:
            raise ValueError("schedule needs at least one verdict")
        self.verdicts = list(verdicts)
        self.position = 0

    @classmethod
    def parse(cls, schedule: str) -> "ScheduleAnalyzer":
        verdicts = []
        for token in schedule.split("|"):
            token = token.strip()
            if token == "sat":
                verdicts.append(AnalyzerVerdict(True, rationale="mock: satisfied"))
            elif token.startswith("unsat:"):
                items = tuple(i.strip() for i in token[len("unsat:"):].split(";") if i.strip())
                verdicts.append(AnalyzerVerdict(False, items, rationale="mock: unsatisfied"))
            elif token == "unsat":
                verdicts.append(
                    AnalyzerVerdict(False, ("requirement not met",), rationale="mock: unsatisfied")
                )
            else:
                raise ValueError(f"bad schedule token: {token!r}")
        return cls(verdicts)

    def analyze(self, video_ref: str, requirements: Sequence[str]) -> AnalyzerVerdict:
        verdict = self.verdicts[min(self.position, len(self.verdicts) - 1)]
        self.position += 1
        return verdict


def collect_requirements(tree: VersionTree, node_id: str) -> list[str]:
    """Prompts and descriptions accumulated along the node's branch, in
    ancestor order. Manual edits carry no requirement text."""
    requirements: list[str] = []
    for node in ancestor_path(tree, node_id):
        if node.kind == "manual-edit":
            continue
        if node.prompt.strip():
            requirements.append(node.prompt.strip())
        if node.response_summary.strip():
            requirements.append(node.response_summary.strip())
    return requirements


def analyze_video(video_ref: str, requirements: Sequence[str], analyzer: VideoAnalyzer) -> AnalyzerVerdict:
    path = Path(video_ref)
    if not path.exists():
        raise VideoUnavailable(f"video not found: {video_ref}")
    if path.suffix.lower() not in ACCEPTED_VIDEO_SUFFIXES:
        raise VideoUnavailable(f"unsupported container {path.suffix!r}; expected MP4")
    return analyzer.analyze(video_ref, requirements)


def compose_follow_up(unmet: Sequence[str]) -> str:
    bullet_list = "\n".join(f"- {item}" for item in unmet)
    return (
        "The rendered animation does not yet satisfy every requirement. "
        "Unmet requirements:\n"
        f"{bullet_list}\n"
        "Modify the code so each unmet requirement is fulfilled, keeping "
        "everything that already works."
    )


def run_correction(
    tree: VersionTree,
    node_id: str,
    video_provider: Callable[[VersionNode], str],
    analyzer: VideoAnalyzer,
    generator: Callable[[VersionTree, str, str], str],
    max_rounds: int = 3,
) -> CorrectionRun:
    """At most max_rounds analyzer calls and max_rounds generations; every new
    node descends from the previous round's result."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    tree.node(node_id)
    current = node_id
    rounds: list[CorrectionRound] = []
    for _ in range(max_rounds):
        video_ref = video_provider(tree.node(current))
        try:
            verdict = analyze_video(video_ref, collect_requirements(tree, current), analyzer)
        except (AnalyzerError, VideoUnavailable) as err:
            rounds.append(CorrectionRound(video_ref=video_ref, verdict=None))
            return CorrectionRun(node_id, tuple(rounds), "analyzer-error", error=str(err))
        if verdict.satisfied:
            rounds.append(CorrectionRound(video_ref=video_ref, verdict=verdict))
            return CorrectionRun(node_id, tuple(rounds), "satisfied")
        follow_up = compose_follow_up(verdict.unmet)
        try:
            new_node_id = generator(tree, current, follow_up)
        except Exception as err:
            rounds.append(
                CorrectionRound(video_ref=video_ref, verdict=verdict, follow_up_prompt=follow_up)
            )
            return CorrectionRun(node_id, tuple(rounds), "generation-error", error=str(err))
        rounds.append(
            CorrectionRound(
                video_ref=video_ref,
                verdict=verdict,
                follow_up_prompt=follow_up,
                result_node_id=new_node_id,
            )
        )
        current = new_node_id
    return CorrectionRun(node_id, tuple(rounds), "budget-exhausted")
