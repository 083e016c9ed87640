"""Engine orchestration and the HTTP service.

The Engine owns loaded projects, a per-project write lock and the
generation pipeline; the FastAPI routes are thin adapters over it. Every
mutating pipeline computes its result fully before the tree is touched,
and the document is persisted before the sequence number advances, so a
failing stage leaves the stored project byte-identical.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .correction import (
    AnalyzerVerdict,
    GatewayVideoAnalyzer,
    VideoUnavailable,
    run_correction,
)
from .diffing import (
    InvalidValue,
    StaleDescriptor,
    apply_parameter,
    diff_bundles,
    extract_parameters,
    render_diff_text,
)
from .gateway import GatewayClient, GatewayConfig, GatewayError, Selection
from .generation import (
    LAZY_RETRY_INSTRUCTION,
    GenerationRequest,
    ResponseError,
    build_messages,
    detect_lazy_output,
    parse_generation_response,
)
from .model import CodeBundle, GenerationSettings
from .patching import EditScriptInvalid, apply_edits, line_count, validate_script
from .project import ProjectStore, load_project, save_project
from .repair import format_bundle, repair_all
from .versioning import (
    UnknownNode,
    VersionTree,
    add_child,
    assemble_context,
    delete_node,
    duplicate_node,
    new_tree,
    record_manual_edit,
    set_active,
)

_DETERMINISTIC_NS = uuid.UUID("a34d3e97-62f5-4f83-9e6a-2c640a17b0a4")
_DETERMINISTIC_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)


class WriteConflict(Exception):
    pass


class Minter:
    """uuid4/now in live use; derived ids and a synthetic clock in replay mode
    so replayed sessions produce byte-identical documents."""

    def __init__(self, deterministic: bool, scope: str = ""):
        self.deterministic = deterministic
        self.scope = scope
        self.counter = 0

    def next_id(self) -> str:
        if not self.deterministic:
            return str(uuid.uuid4())
        self.counter += 1
        return str(uuid.uuid5(_DETERMINISTIC_NS, f"{self.scope}:{self.counter}"))

    def next_timestamp(self) -> str:
        if not self.deterministic:
            return datetime.now(timezone.utc).isoformat()
        self.counter += 1
        return (_DETERMINISTIC_EPOCH + timedelta(seconds=self.counter)).isoformat()


@dataclass
class ProjectEntry:
    store: ProjectStore
    path: Path
    minter: Minter
    lock: threading.RLock = field(default_factory=threading.RLock)
    condition: threading.Condition = field(default_factory=threading.Condition)
    sequence: int = 0


def bundle_from_components(components, filename: str) -> CodeBundle:
    parts = {"template": [], "style": [], "script": []}
    for component in components:
        if component.code.strip():
            parts[component.part].append(component.code)
    return CodeBundle(
        filename=filename,
        template="\n".join(parts["template"]),
        style="\n".join(parts["style"]),
        script="\n".join(parts["script"]),
    )


class Engine:
    def __init__(
        self,
        data_dir: str | Path,
        gateway: GatewayClient,
        *,
        deterministic: bool | None = None,
        video_provider=None,
        analyzer=None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.gateway = gateway
        # Replay needs derived ids and a synthetic clock; recording a session
        # meant for replay must mint the same ids, hence the override.
        self.deterministic = (
            deterministic if deterministic is not None else gateway.config.mode == "replay"
        )
        self.entries: dict[str, ProjectEntry] = {}
        self._project_minter = Minter(self.deterministic, "project")
        self.video_provider_override = video_provider
        self.analyzer_override = analyzer

    # -- project lifecycle ---------------------------------------------------

    def _path_for(self, project_id: str) -> Path:
        return self.data_dir / f"{project_id}.json"

    def create_project(
        self, filename: str = "index.html", settings: GenerationSettings | None = None
    ) -> ProjectEntry:
        project_id = self._project_minter.next_id()
        minter = Minter(self.deterministic, f"node:{project_id}")
        tree = new_tree(
            CodeBundle(filename=filename),
            node_id=minter.next_id(),
            created_at=minter.next_timestamp(),
        )
        store = ProjectStore(
            project_id=project_id,
            settings=settings or GenerationSettings(),
            trees={filename: tree},
        )
        entry = ProjectEntry(store=store, path=self._path_for(project_id), minter=minter)
        save_project(store, entry.path)
        self.entries[project_id] = entry
        return entry

    def entry(self, project_id: str) -> ProjectEntry:
        if project_id in self.entries:
            return self.entries[project_id]
        path = self._path_for(project_id)
        if not path.exists():
            raise KeyError(project_id)
        store = load_project(path)
        entry = ProjectEntry(
            store=store, path=path, minter=Minter(self.deterministic, f"node:{project_id}")
        )
        self.entries[project_id] = entry
        return entry

    def locate(self, store: ProjectStore, node_id: str) -> tuple[str, VersionTree]:
        for filename, tree in store.trees.items():
            if node_id in tree.nodes:
                return filename, tree
        raise UnknownNode(node_id)

    # -- commit protocol -----------------------------------------------------

    def _persist_and_commit(self, entry: ProjectEntry, rollback) -> None:
        try:
            save_project(entry.store, entry.path)
        except Exception:
            rollback()
            raise
        with entry.condition:
            entry.sequence += 1
            entry.condition.notify_all()

    # -- operations ------------------------------------------------------------

    def generate(
        self,
        project_id: str,
        node_id: str,
        prompt: str,
        mode: str,
        *,
        kind: str = "ai-generated",
    ) -> dict:
        entry = self.entry(project_id)
        with entry.lock:
            filename, tree = self.locate(entry.store, node_id)
            node = tree.node(node_id)
            settings = entry.store.settings
            context = assemble_context(tree, node_id, cap=settings.context_message_cap)
            if mode == "incremental":
                request = GenerationRequest(mode, prompt, context, bundle=node.bundle)
            else:
                request = GenerationRequest(mode, prompt, context)
            base_messages = build_messages(request)

            messages = list(base_messages)
            lazy_retried = False
            while True:
                raw = self.gateway.complete(messages, model=settings.model_name)
                result = parse_generation_response(raw, mode)
                findings = detect_lazy_output(result)
                if findings and not lazy_retried:
                    lazy_retried = True
                    messages = base_messages + [
                        {"role": "assistant", "content": raw},
                        {"role": "user", "content": LAZY_RETRY_INSTRUCTION},
                    ]
                    continue
                break

            if mode == "incremental":
                new_bundle, _ = format_bundle(node.bundle)
                for script in result.edits:
                    text = new_bundle.part(script.part)
                    violations = validate_script(script, line_count(text))
                    if violations:
                        raise EditScriptInvalid(violations)
                    new_text, _ = apply_edits(text, script)
                    new_bundle = new_bundle.with_part(script.part, new_text)
            else:
                new_bundle = bundle_from_components(result.components, filename)

            repaired, repair_report = repair_all(new_bundle)
            previous_active = tree.active_id
            new_id = add_child(
                tree,
                node_id,
                kind,
                prompt,
                repaired,
                response_summary=result.description,
                repair=repair_report,
                node_id=entry.minter.next_id(),
                created_at=entry.minter.next_timestamp(),
            )

            def rollback():
                del tree.nodes[new_id]
                tree.active_id = previous_active

            self._persist_and_commit(entry, rollback)
            return {
                "node_id": new_id,
                "filename": filename,
                "repair": repair_report.to_dict(),
                "lazy_findings": [
                    {"part": f.part, "line": f.line_index, "pattern": f.matched_pattern}
                    for f in findings
                ],
                "lazy_retried": lazy_retried,
            }

    def manual_edit(
        self,
        project_id: str,
        node_id: str,
        parts: dict,
        expected_sequence: int | None = None,
    ) -> str:
        entry = self.entry(project_id)
        with entry.lock:
            if expected_sequence is not None and expected_sequence != entry.sequence:
                raise WriteConflict(
                    f"expected sequence {expected_sequence}, current is {entry.sequence}"
                )
            filename, tree = self.locate(entry.store, node_id)
            base = tree.node(node_id).bundle
            bundle = CodeBundle(
                filename=filename,
                template=parts.get("template", base.template),
                style=parts.get("style", base.style),
                script=parts.get("script", base.script),
            )
            previous_active = tree.active_id
            new_id = record_manual_edit(
                tree,
                node_id,
                bundle,
                node_id=entry.minter.next_id(),
                created_at=entry.minter.next_timestamp(),
            )

            def rollback():
                del tree.nodes[new_id]
                tree.active_id = previous_active

            self._persist_and_commit(entry, rollback)
            return new_id

    def apply_param(self, project_id: str, node_id: str, param_id: str, value: str) -> str:
        entry = self.entry(project_id)
        with entry.lock:
            filename, tree = self.locate(entry.store, node_id)
            node = tree.node(node_id)
            new_bundle = apply_parameter(node.bundle, param_id, value)
            previous_active = tree.active_id
            new_id = record_manual_edit(
                tree,
                node_id,
                new_bundle,
                node_id=entry.minter.next_id(),
                created_at=entry.minter.next_timestamp(),
            )

            def rollback():
                del tree.nodes[new_id]
                tree.active_id = previous_active

            self._persist_and_commit(entry, rollback)
            return new_id

    def fix(self, project_id: str, node_id: str, error_report: str) -> dict:
        entry = self.entry(project_id)
        with entry.lock:
            filename, tree = self.locate(entry.store, node_id)
            node = tree.node(node_id)
            result = self.gateway.fix_code_result(node.bundle, error_report)
            formatted, _ = format_bundle(node.bundle)
            new_bundle = formatted
            for script in result.edits:
                text = new_bundle.part(script.part)
                new_text, _ = apply_edits(text, script)
                new_bundle = new_bundle.with_part(script.part, new_text)
            repaired, repair_report = repair_all(new_bundle)
            label = f"[AI Fix] {error_report.strip()}".strip()
            previous_active = tree.active_id
            new_id = add_child(
                tree,
                node_id,
                "ai-generated",
                label,
                repaired,
                response_summary=result.description,
                repair=repair_report,
                node_id=entry.minter.next_id(),
                created_at=entry.minter.next_timestamp(),
            )

            def rollback():
                del tree.nodes[new_id]
                tree.active_id = previous_active

            self._persist_and_commit(entry, rollback)
            return {"node_id": new_id, "filename": filename, "repair": repair_report.to_dict()}

    def duplicate(self, project_id: str, node_id: str) -> str:
        entry = self.entry(project_id)
        with entry.lock:
            _, tree = self.locate(entry.store, node_id)
            new_id = duplicate_node(
                tree,
                node_id,
                new_node_id=entry.minter.next_id(),
                created_at=entry.minter.next_timestamp(),
            )

            def rollback():
                tree.nodes.pop(new_id, None)

            self._persist_and_commit(entry, rollback)
            return new_id

    def delete(self, project_id: str, node_id: str) -> int:
        entry = self.entry(project_id)
        with entry.lock:
            _, tree = self.locate(entry.store, node_id)
            saved_nodes = dict(tree.nodes)
            saved_active = tree.active_id
            removed = delete_node(tree, node_id)

            def rollback():
                tree.nodes = saved_nodes
                tree.active_id = saved_active

            self._persist_and_commit(entry, rollback)
            return removed

    def activate(self, project_id: str, node_id: str) -> None:
        entry = self.entry(project_id)
        with entry.lock:
            _, tree = self.locate(entry.store, node_id)
            previous = tree.active_id
            set_active(tree, node_id)

            def rollback():
                tree.active_id = previous

            self._persist_and_commit(entry, rollback)

    def diff(self, project_id: str, from_id: str, to_id: str) -> dict:
        entry = self.entry(project_id)
        _, tree_a = self.locate(entry.store, from_id)
        _, tree_b = self.locate(entry.store, to_id)
        report = diff_bundles(tree_a.node(from_id).bundle, tree_b.node(to_id).bundle)
        payload = report.to_dict()
        payload["rendered"] = render_diff_text(report)
        return payload

    def explain(
        self, project_id: str, node_id: str, part: str, from_line: int, to_line: int, text: str | None = None
    ) -> str:
        entry = self.entry(project_id)
        _, tree = self.locate(entry.store, node_id)
        node = tree.node(node_id)
        if text is None:
            lines = node.bundle.part(part).split("\n")
            if not (1 <= from_line <= to_line <= len(lines)):
                raise ValueError(f"line range {from_line}..{to_line} outside the {part} part")
            text = "\n".join(lines[from_line - 1 : to_line])
        context = assemble_context(tree, node_id, cap=entry.store.settings.context_message_cap)
        return self.gateway.explain_code(Selection(text, part, from_line, to_line), context)

    def optimize(self, project_id: str, node_id: str, draft: str) -> str:
        entry = self.entry(project_id)
        _, tree = self.locate(entry.store, node_id)
        context = assemble_context(tree, node_id, cap=entry.store.settings.context_message_cap)
        return self.gateway.optimize_prompt(draft, context)

    def parameters(self, project_id: str, node_id: str, focus: str | None = None) -> list[dict]:
        entry = self.entry(project_id)
        _, tree = self.locate(entry.store, node_id)
        return [d.to_dict() for d in extract_parameters(tree.node(node_id).bundle, focus)]

    # -- videos / correction ---------------------------------------------------

    def _video_dir(self, project_id: str) -> Path:
        return self.data_dir / "videos" / project_id

    def store_video(self, project_id: str, node_id: str, content: bytes) -> str:
        entry = self.entry(project_id)
        self.locate(entry.store, node_id)
        directory = self._video_dir(project_id)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{node_id}.mp4"
        path.write_bytes(content)
        return str(path)

    def _video_for(self, project_id: str, node) -> str:
        if self.video_provider_override is not None:
            return self.video_provider_override(node)
        exact = self._video_dir(project_id) / f"{node.id}.mp4"
        if exact.exists():
            return str(exact)
        candidates = sorted(self._video_dir(project_id).glob("*.mp4")) if self._video_dir(project_id).exists() else []
        if candidates:
            return str(candidates[-1])
        raise VideoUnavailable(f"no recorded video available for node {node.id}")

    def correct(self, project_id: str, node_id: str, max_rounds: int | None = None) -> dict:
        entry = self.entry(project_id)
        with entry.lock:
            _, tree = self.locate(entry.store, node_id)
            rounds = max_rounds or entry.store.settings.max_correction_rounds
            analyzer = self.analyzer_override or GatewayVideoAnalyzer(self.gateway)

            def generator(t: VersionTree, nid: str, prompt: str) -> str:
                outcome = self.generate(project_id, nid, prompt, "incremental", kind="correction")
                return outcome["node_id"]

            run = run_correction(
                tree,
                node_id,
                lambda node: self._video_for(project_id, node),
                analyzer,
                generator,
                max_rounds=rounds,
            )
            return run.to_dict()

    # -- resources ---------------------------------------------------------------

    def node_resource(self, project_id: str, node_id: str) -> dict:
        entry = self.entry(project_id)
        filename, tree = self.locate(entry.store, node_id)
        node = tree.node(node_id)
        payload = node.to_dict()
        payload["filename"] = filename
        payload["is_active"] = tree.active_id == node_id
        return payload

    def project_resource(self, project_id: str) -> dict:
        entry = self.entry(project_id)
        return {
            "project_id": project_id,
            "sequence": entry.sequence,
            "settings": entry.store.settings.to_dict(),
            "trees": {
                fn: {
                    "root_id": tree.root_id,
                    "active_id": tree.active_id,
                    "node_count": len(tree.nodes),
                }
                for fn, tree in entry.store.trees.items()
            },
        }

    def wait_for_event(self, project_id: str, since: int, timeout: float = 20.0) -> dict:
        entry = self.entry(project_id)
        with entry.condition:
            if entry.sequence <= since:
                entry.condition.wait(timeout)
        active = {fn: tree.active_id for fn, tree in entry.store.trees.items()}
        return {"project_id": project_id, "sequence": entry.sequence, "active": active}


# ---------------------------------------------------------------------------
# HTTP adapter
# ---------------------------------------------------------------------------

def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="animstudio", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.engine = engine

    def fetch_entry(project_id: str) -> ProjectEntry:
        try:
            return engine.entry(project_id)
        except KeyError:
            raise HTTPException(404, f"unknown project: {project_id}")

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (KeyError, UnknownNode) as err:
            raise HTTPException(404, str(err))
        except WriteConflict as err:
            raise HTTPException(409, str(err))
        except StaleDescriptor as err:
            raise HTTPException(409, f"stale-descriptor: {err}")
        except EditScriptInvalid as err:
            raise HTTPException(
                422,
                {
                    "error": "edit-script-invalid",
                    "violations": [
                        {"code": v.code, "message": v.message, "edit": v.edit_index}
                        for v in err.violations
                    ],
                },
            )
        except (InvalidValue, ValueError) as err:
            raise HTTPException(422, str(err))
        except VideoUnavailable as err:
            raise HTTPException(422, str(err))
        except (GatewayError, ResponseError) as err:
            raise HTTPException(502, f"{type(err).__name__}: {err}")

    @app.post("/projects", status_code=201)
    def create_project(body: dict = Body(default={})):
        entry = guard(
            engine.create_project,
            filename=body.get("filename", "index.html"),
        )
        return engine.project_resource(entry.store.project_id)

    @app.get("/projects")
    def list_projects():
        known = set(engine.entries)
        known.update(p.stem for p in engine.data_dir.glob("*.json"))
        return {"projects": sorted(known)}

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        fetch_entry(project_id)
        return engine.project_resource(project_id)

    @app.get("/projects/{project_id}/trees/{filename}")
    def get_tree(project_id: str, filename: str):
        entry = fetch_entry(project_id)
        if filename not in entry.store.trees:
            raise HTTPException(404, f"unknown page: {filename}")
        payload = entry.store.trees[filename].to_dict()
        payload["filename"] = filename
        payload["sequence"] = entry.sequence
        return payload

    @app.get("/projects/{project_id}/nodes/{node_id}")
    def get_node(project_id: str, node_id: str):
        fetch_entry(project_id)
        return guard(engine.node_resource, project_id, node_id)

    @app.put("/projects/{project_id}/nodes/{node_id}/bundle")
    def put_bundle(project_id: str, node_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        new_id = guard(
            engine.manual_edit,
            project_id,
            node_id,
            {k: body[k] for k in ("template", "style", "script") if k in body},
            body.get("sequence"),
        )
        return engine.node_resource(project_id, new_id)

    @app.post("/projects/{project_id}/nodes/{node_id}/generate", status_code=201)
    def generate(project_id: str, node_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        mode = body.get("mode", "full")
        if mode not in ("full", "incremental"):
            raise HTTPException(422, f"unknown mode: {mode}")
        prompt = body.get("prompt", "")
        if not prompt.strip():
            raise HTTPException(422, "prompt is required")
        outcome = guard(engine.generate, project_id, node_id, prompt, mode)
        resource = engine.node_resource(project_id, outcome["node_id"])
        resource["lazy_findings"] = outcome["lazy_findings"]
        resource["lazy_retried"] = outcome["lazy_retried"]
        return resource

    @app.post("/projects/{project_id}/nodes/{node_id}/fix", status_code=201)
    def fix(project_id: str, node_id: str, body: dict = Body(default={})):
        fetch_entry(project_id)
        outcome = guard(engine.fix, project_id, node_id, body.get("error_report", ""))
        return engine.node_resource(project_id, outcome["node_id"])

    @app.get("/projects/{project_id}/diff")
    def diff(project_id: str, from_id: str = Query(alias="from"), to_id: str = Query(alias="to")):
        fetch_entry(project_id)
        return guard(engine.diff, project_id, from_id, to_id)

    @app.post("/projects/{project_id}/nodes/{node_id}/explain")
    def explain(project_id: str, node_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        explanation = guard(
            engine.explain,
            project_id,
            node_id,
            body.get("part", "style"),
            int(body.get("from_line", 1)),
            int(body.get("to_line", 1)),
            body.get("text"),
        )
        return {"explanation": explanation}

    @app.post("/projects/{project_id}/nodes/{node_id}/optimize")
    def optimize(project_id: str, node_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        improved = guard(engine.optimize, project_id, node_id, body.get("draft", ""))
        return {"prompt": improved}

    @app.get("/projects/{project_id}/nodes/{node_id}/parameters")
    def parameters(project_id: str, node_id: str, focus: str | None = None):
        fetch_entry(project_id)
        return {"parameters": guard(engine.parameters, project_id, node_id, focus)}

    @app.post("/projects/{project_id}/nodes/{node_id}/parameters/{param_id}", status_code=201)
    def apply_param(project_id: str, node_id: str, param_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        if "value" not in body:
            raise HTTPException(422, "value is required")
        new_id = guard(engine.apply_param, project_id, node_id, param_id, str(body["value"]))
        return engine.node_resource(project_id, new_id)

    @app.post("/projects/{project_id}/nodes/{node_id}/duplicate", status_code=201)
    def duplicate(project_id: str, node_id: str):
        fetch_entry(project_id)
        new_id = guard(engine.duplicate, project_id, node_id)
        return engine.node_resource(project_id, new_id)

    @app.delete("/projects/{project_id}/nodes/{node_id}")
    def delete(project_id: str, node_id: str):
        fetch_entry(project_id)
        removed = guard(engine.delete, project_id, node_id)
        return {"deleted": removed, "project": engine.project_resource(project_id)}

    @app.post("/projects/{project_id}/active")
    def activate(project_id: str, body: dict = Body(...)):
        fetch_entry(project_id)
        guard(engine.activate, project_id, body.get("node_id", ""))
        return engine.project_resource(project_id)

    @app.post("/projects/{project_id}/nodes/{node_id}/video", status_code=201)
    async def upload_video(project_id: str, node_id: str, file: UploadFile):
        fetch_entry(project_id)
        content = await file.read()
        video_ref = guard(engine.store_video, project_id, node_id, content)
        return {"video_ref": video_ref}

    @app.post("/projects/{project_id}/nodes/{node_id}/correct")
    def correct(project_id: str, node_id: str, body: dict = Body(default={})):
        fetch_entry(project_id)
        max_rounds = body.get("max_rounds")
        return guard(engine.correct, project_id, node_id, max_rounds)

    @app.get("/projects/{project_id}/events")
    def events(project_id: str, since: int = 0, timeout: float = 20.0):
        fetch_entry(project_id)
        return engine.wait_for_event(project_id, since, min(timeout, 55.0))

    return app


def engine_from_env(
    data_dir: str,
    *,
    mode: str | None = None,
    fixtures_dir: str | None = None,
    base_url: str | None = None,
    api_key_ref: str | None = None,
    model: str | None = None,
    deterministic: bool | None = None,
) -> Engine:
    import os

    config = GatewayConfig(
        base_url=base_url or os.environ.get("ANIMSTUDIO_BASE_URL", "https://api.openai.com/v1"),
        api_key_ref=api_key_ref or os.environ.get("ANIMSTUDIO_API_KEY_VAR", "LLM_API_KEY"),
        model_name=model or os.environ.get("ANIMSTUDIO_MODEL", "gpt-4o"),
        mode=mode or os.environ.get("ANIMSTUDIO_GATEWAY_MODE", "replay"),
        fixtures_dir=fixtures_dir or os.environ.get("ANIMSTUDIO_FIXTURES_DIR") or None,
    )
    return Engine(data_dir, GatewayClient(config), deterministic=deterministic)
