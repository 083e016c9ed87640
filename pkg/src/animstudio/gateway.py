"""Chat-completions client with record/replay fixtures.

Every model call in the engine goes through GatewayClient.complete, so
replay mode makes the whole engine a pure function of (inputs, fixtures).
Fixtures are keyed by a hash of the canonicalized request payload and
never contain the resolved API key.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .generation import build_fix_messages, parse_generation_response
from .model import CodeBundle
from .patching import EditScript, EditScriptInvalid, line_count, mark_lines, validate_script
from .repair import format_bundle

logger = logging.getLogger("animstudio.gateway")

MODES = ("live", "replay", "record")


class GatewayError(Exception):
    pass


class AuthFailure(GatewayError):
    pass


class TransportFailure(GatewayError):
    pass


class ReplayMiss(GatewayError):
    def __init__(self, request_hash: str):
        super().__init__(f"no fixture recorded for request hash {request_hash}")
        self.request_hash = request_hash


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key_ref: str = "LLM_API_KEY"  # name of the env var holding the key
    model_name: str = "gpt-4o"
    video_model_name: str = "qwen2.5-vl-32b-instruct"
    temperature: float = 0.0
    timeout: float = 60.0
    mode: str = "replay"
    fixtures_dir: str | None = None
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown gateway mode: {self.mode!r}")
        if self.mode in ("replay", "record") and not self.fixtures_dir:
            raise ValueError(f"{self.mode} mode requires a fixtures_dir")


def request_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Selection:
    text: str
    part: str
    from_line: int
    to_line: int


class GatewayClient:
    """Shareable across requests; each call is independent."""

    def __init__(self, config: GatewayConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._http = httpx.Client(transport=transport, timeout=config.timeout)

    def close(self) -> None:
        self._http.close()

    # -- fixtures ----------------------------------------------------------

    def _fixture_path(self, digest: str) -> Path:
        return Path(self.config.fixtures_dir) / f"{digest}.json"

    def _load_fixture(self, digest: str) -> str | None:
        path = self._fixture_path(digest)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return data["response_body"]

    def _store_fixture(self, digest: str, payload: dict, body: str) -> None:
        path = self._fixture_path(digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        document = {
            "request_hash": digest,
            "request_snapshot": payload,
            "response_body": body,
            "captured_at": datetime.now(timezone.utc).isoformat(),
        }
        path.write_text(
            json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    # -- transport ---------------------------------------------------------

    def _resolve_key(self) -> str:
        key = os.environ.get(self.config.api_key_ref, "")
        if not key:
            raise AuthFailure(
                f"environment variable {self.config.api_key_ref} is not set"
            )
        return key

    def _post_once(self, payload: dict) -> str:
        headers = {"Authorization": f"Bearer {self._resolve_key()}"}
        response = self._http.post(
            f"{self.config.base_url.rstrip('/')}/chat/completions",
            json=payload,
            headers=headers,
        )
        if response.status_code in (401, 403):
            raise AuthFailure(f"authentication rejected ({response.status_code})")
        if response.status_code >= 500:
            raise TransportFailure(f"server error {response.status_code}")
        if response.status_code != 200:
            raise TransportFailure(
                f"unexpected status {response.status_code}: {response.text[:200]}"
            )
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as err:
            raise TransportFailure(f"unexpected response shape: {err}") from err
        if not isinstance(content, str):
            raise TransportFailure("response content is not text")
        return content

    def _post_with_retries(self, payload: dict) -> str:
        attempts = self.config.max_retries + 1
        last: Exception | None = None
        for attempt in range(1, attempts + 1):
            try:
                logger.info("gateway call attempt %d/%d", attempt, attempts)
                return self._post_once(payload)
            except AuthFailure:
                raise
            except (httpx.TimeoutException, httpx.TransportError, TransportFailure) as err:
                last = err
                logger.warning("gateway attempt %d failed: %s", attempt, err)
                if attempt < attempts:
                    time.sleep(min(0.2 * attempt, 1.0))
        raise TransportFailure(f"all {attempts} attempts failed: {last}")

    # -- public API --------------------------------------------------------

    def complete(
        self,
        messages: list[dict],
        *,
        model: str | None = None,
        temperature: float | None = None,
    ) -> str:
        payload = {
            "model": model or self.config.model_name,
            "temperature": self.config.temperature if temperature is None else temperature,
            "messages": messages,
        }
        digest = request_hash(payload)
        if self.config.mode == "replay":
            body = self._load_fixture(digest)
            if body is None:
                raise ReplayMiss(digest)
            return body
        body = self._post_with_retries(payload)
        if self.config.mode == "record":
            self._store_fixture(digest, payload, body)
        return body

    def explain_code(self, selection: Selection, context: tuple = ()) -> str:
        if not selection.text.strip():
            raise ValueError("selection is empty")
        system = (
            "You are a patient front-end mentor. Explain the selected code "
            "plainly: what each line does and how it contributes to the "
            "animation. Keep the explanation focused on the selection."
        )
        messages = [{"role": "system", "content": system}]
        messages.extend({"role": m.role, "content": m.content} for m in context)
        messages.append(
            {
                "role": "user",
                "content": (
                    f"Explain lines {selection.from_line}-{selection.to_line} "
                    f"of the {selection.part} part:\n```\n{selection.text}\n```"
                ),
            }
        )
        return self.complete(messages)

    def fix_code_result(self, bundle: CodeBundle, error_report: str):
        """Ask for incremental repairs; scripts are validated against the
        beautified bundle before being returned."""
        messages = build_fix_messages(bundle, error_report)
        raw = self.complete(messages)
        result = parse_generation_response(raw, "incremental")
        formatted, _ = format_bundle(bundle)
        for script in result.edits:
            violations = validate_script(script, line_count(formatted.part(script.part)))
            if violations:
                raise EditScriptInvalid(violations)
        return result

    def fix_code(self, bundle: CodeBundle, error_report: str) -> list[EditScript]:
        return list(self.fix_code_result(bundle, error_report).edits)

    def optimize_prompt(self, draft: str, context: tuple = ()) -> str:
        if not draft.strip():
            raise ValueError("draft prompt is empty")
        system = (
            "You rewrite rough animation ideas into precise, vivid prompts for a "
            "code-generation model. Keep the author's intent, add concrete visual "
            "detail (shape, motion, timing, color) and name the animated elements. "
            "Answer with the rewritten prompt only."
        )
        messages = [{"role": "system", "content": system}]
        messages.extend({"role": m.role, "content": m.content} for m in context)
        messages.append({"role": "user", "content": draft})
        return self.complete(messages)

    def analyze_video_raw(self, video_ref: str, requirements: list[str], *, schema_note: str = "") -> str:
        """One analyzer call against the video-capable model; verdict parsing
        lives in the correction loop."""
        system = (
            "You review a screen recording of a web animation against a list of "
            "requirements. Answer with exactly one JSON object: "
            '{"satisfied": true|false, "unmet": ["requirement not yet met", ...], '
            '"rationale": "short justification"}. '
            "List an unmet entry for every requirement the video does not clearly satisfy."
        )
        if schema_note:
            system += " " + schema_note
        bullet_list = "\n".join(f"- {r}" for r in requirements) or "- (no explicit requirements)"
        messages = [
            {"role": "system", "content": system},
            {
                "role": "user",
                "content": [
                    {
                        "type": "text",
                        "text": f"Requirements gathered from this branch:\n{bullet_list}",
                    },
                    {"type": "video_url", "video_url": {"url": video_ref}},
                ],
            },
        ]
        return self.complete(messages, model=self.config.video_model_name)
