"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .diffing import render_diff_text
from .patching import apply_edits, scripts_from_wire
from .service import create_app, engine_from_env
from .session import load_session, run_session


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _env_default(name: str, fallback: str | None = None) -> str | None:
    return os.environ.get(name) or fallback


def build_parser() -> _Parser:
    parser = _Parser(prog="animstudio", description="LLM-assisted web animation engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--data-dir", default=_env_default("ANIMSTUDIO_DATA_DIR", "./animstudio-data"))
        p.add_argument("--fixtures-dir", default=_env_default("ANIMSTUDIO_FIXTURES_DIR"))
        p.add_argument("--gateway-mode", default=_env_default("ANIMSTUDIO_GATEWAY_MODE"))
        p.add_argument("--base-url", default=_env_default("ANIMSTUDIO_BASE_URL"))
        p.add_argument("--api-key-var", default=_env_default("ANIMSTUDIO_API_KEY_VAR"))
        p.add_argument("--model", default=_env_default("ANIMSTUDIO_MODEL"))

    serve = sub.add_parser("serve", help="run the HTTP service")
    common(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8600)
    serve.add_argument("--ui", default=None, help="directory of built UI assets to serve at /ui")
    serve.add_argument(
        "--mock-analyzer",
        default=None,
        help="video-verdict schedule for demos/tests, e.g. 'unsat:bubbles frozen|sat'",
    )

    new = sub.add_parser("new", help="create a project")
    common(new)
    new.add_argument("--filename", default="index.html")

    gen = sub.add_parser("gen", help="run one generation round")
    common(gen)
    gen.add_argument("--project", required=True)
    gen.add_argument("--node", default="$active")
    gen.add_argument("--prompt", required=True)
    gen.add_argument("--mode", choices=("full", "incremental"), default="full")

    patch = sub.add_parser("apply-patch", help="apply an edit-script JSON file to a text file")
    patch.add_argument("--input", required=True, help="text file the script addresses")
    patch.add_argument("--script", required=True, help="JSON array of wire edit objects")
    patch.add_argument("--part", default=None, help="only apply scripts for this part")
    patch.add_argument("--output", default=None, help="write here instead of stdout")

    diff = sub.add_parser("diff", help="semantic diff between two nodes")
    common(diff)
    diff.add_argument("--project", required=True)
    diff.add_argument("--from", dest="from_id", required=True)
    diff.add_argument("--to", dest="to_id", required=True)

    replay = sub.add_parser("replay", help="run a recorded session network-free")
    common(replay)
    replay.add_argument("--session", required=True)

    fixtures = sub.add_parser("fixtures", help="fixture management")
    fixtures_sub = fixtures.add_subparsers(dest="fixtures_command", required=True)
    record = fixtures_sub.add_parser("record", help="run a session live, recording fixtures")
    common(record)
    record.add_argument("--session", required=True)

    return parser


def _make_engine(args, mode: str | None = None):
    return engine_from_env(
        args.data_dir,
        mode=mode or args.gateway_mode,
        fixtures_dir=args.fixtures_dir,
        base_url=args.base_url,
        api_key_ref=args.api_key_var,
        model=args.model,
    )


def _resolve_node_arg(engine, project_id: str, ref: str) -> str:
    entry = engine.entry(project_id)
    tree = list(entry.store.trees.values())[0]
    if ref == "$active":
        return tree.active_id
    if ref == "$root":
        return tree.root_id
    return ref


def _cmd_serve(args) -> int:
    import uvicorn

    engine = _make_engine(args)
    if args.mock_analyzer:
        from .correction import ScheduleAnalyzer

        engine.analyzer_override = ScheduleAnalyzer.parse(args.mock_analyzer)
    app = create_app(engine)
    if args.ui:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=args.ui, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_new(args) -> int:
    engine = _make_engine(args)
    entry = engine.create_project(filename=args.filename)
    print(entry.store.project_id)
    return 0


def _cmd_gen(args) -> int:
    engine = _make_engine(args)
    node_id = _resolve_node_arg(engine, args.project, args.node)
    outcome = engine.generate(args.project, node_id, args.prompt, args.mode)
    print(json.dumps(outcome, indent=2))
    return 0


def _cmd_apply_patch(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    wire = json.loads(Path(args.script).read_text(encoding="utf-8"))
    if not isinstance(wire, list):
        raise _UsageError("--script must contain a JSON array of edit objects")
    result = text
    for script in scripts_from_wire(wire):
        if args.part and script.part != args.part:
            continue
        result, _ = apply_edits(result, script)
    if args.output:
        Path(args.output).write_text(result, encoding="utf-8")
    else:
        sys.stdout.write(result)
    return 0


def _cmd_diff(args) -> int:
    engine = _make_engine(args)
    payload = engine.diff(args.project, args.from_id, args.to_id)
    print(payload["rendered"])
    return 0


def _cmd_replay(args) -> int:
    engine = _make_engine(args, mode="replay")
    session = load_session(args.session)
    project_id = run_session(engine, session)
    document = engine.entry(project_id).path
    print(project_id)
    print(document)
    return 0


def _cmd_fixtures_record(args) -> int:
    # Deterministic ids: the recorded fixtures must replay against the exact
    # same prompts, which embed node ids.
    engine = engine_from_env(
        args.data_dir,
        mode="record",
        fixtures_dir=args.fixtures_dir,
        base_url=args.base_url,
        api_key_ref=args.api_key_var,
        model=args.model,
        deterministic=True,
    )
    session = load_session(args.session)
    project_id = run_session(engine, session)
    print(project_id)
    print(engine.gateway.config.fixtures_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "new":
            return _cmd_new(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "apply-patch":
            return _cmd_apply_patch(args)
        if args.command == "diff":
            return _cmd_diff(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "fixtures":
            return _cmd_fixtures_record(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except Exception as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
