"""Command-line interface.

Verbs: `ingest` validates a manifest, `static` runs the full static
selection stage, `dynamic` picks a prompt for a target text from a
persisted result, `report` renders the metric table, and `mock-serve`
hosts the deterministic mock backends over HTTP.

Exit codes: 0 success, 1 pipeline or backend failure, 2 usage errors and
missing input files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backends import MockFixture, MockWireServer
from .config import CONFIG_KEYS, build_config, parse_config_file
from .corpus import EmotionLabel, decode_audio, load_manifest, validate_candidate
from .errors import EmoProError, MockFixtureError
from .pipeline import load_result, run_dynamic, run_static
from .report import render_report

logger = logging.getLogger(__name__)

USAGE_EXIT = 2
FAILURE_EXIT = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emopro",
        description="Two-stage prompt selection for emotional speech synthesis.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log at DEBUG level"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="load and validate a prompt manifest")
    ingest.add_argument("--manifest", required=True, help="JSONL manifest path")
    ingest.add_argument("--speaker", required=True, help="speaker id to select")
    ingest.add_argument(
        "--emotion", required=True, type=EmotionLabel.parse, help="emotion label"
    )
    ingest.add_argument("--json", action="store_true", help="machine-readable output")

    static = sub.add_parser("static", help="run the static selection stage")
    static.add_argument("--manifest", required=True, help="JSONL manifest path")
    static.add_argument("--speaker", required=True, help="speaker id to select")
    static.add_argument(
        "--emotion", required=True, type=EmotionLabel.parse, help="emotion label"
    )
    static.add_argument("--config", help="flat key=value config file")
    static.add_argument("--out", required=True, help="result file to write")
    for key in CONFIG_KEYS:
        static.add_argument(
            f"--{key.name}",
            default=None,
            metavar="V",
            help=f"{key.help} (config key)",
        )

    dynamic = sub.add_parser("dynamic", help="pick a prompt for a target text")
    dynamic.add_argument("--result", required=True, help="static result file")
    dynamic.add_argument("--text", required=True, help="text to be synthesized")
    dynamic.add_argument("--json", action="store_true", help="machine-readable output")
    dynamic.add_argument("--backend_url", default=None, help="override scorer base URL")
    dynamic.add_argument("--cache_dir", default=None, help="override cache directory")

    report = sub.add_parser("report", help="render the metric table for a result")
    report.add_argument("--result", required=True, help="static result file")

    serve = sub.add_parser("mock-serve", help="host mock backends over HTTP")
    serve.add_argument("--fixture", required=True, help="mock fixture JSON file")
    serve.add_argument("--port", required=True, type=int, help="port to bind")
    serve.add_argument("--host", default="127.0.0.1", help="interface to bind")

    return parser


def _require_file(path: str, what: str) -> Path | None:
    resolved = Path(path)
    if not resolved.is_file():
        print(f"error: {what} not found: {path}", file=sys.stderr)
        return None
    return resolved


def _cmd_ingest(args: argparse.Namespace) -> int:
    manifest = _require_file(args.manifest, "manifest")
    if manifest is None:
        return USAGE_EXIT
    pool = load_manifest(manifest, args.speaker, args.emotion)
    reports = []
    for candidate in pool.candidates:
        audio = decode_audio(candidate)
        reports.append(validate_candidate(candidate, audio))
    flagged = [r for r in reports if not r.ok]
    if args.json:
        print(
            json.dumps(
                {
                    "count": len(reports),
                    "flagged": [
                        {"id": r.candidate_id, "flags": list(r.flags)}
                        for r in flagged
                    ],
                }
            )
        )
    else:
        for r in reports:
            state = "ok" if r.ok else ", ".join(r.flags)
            print(f"{r.candidate_id}: {state}")
        print(f"{len(reports)} candidates, {len(flagged)} flagged")
    return 0


def _cmd_static(args: argparse.Namespace) -> int:
    manifest = _require_file(args.manifest, "manifest")
    if manifest is None:
        return USAGE_EXIT
    file_values = {}
    if args.config:
        config_path = _require_file(args.config, "config file")
        if config_path is None:
            return USAGE_EXIT
        file_values = parse_config_file(config_path)
    overrides = {
        key.name: getattr(args, key.name)
        for key in CONFIG_KEYS
        if getattr(args, key.name) is not None
    }
    config = build_config(file_values, overrides)
    backends = config.make_backend_set()
    result = run_static(
        config, manifest, args.speaker, args.emotion, backends, args.out
    )
    print(
        f"static selection complete: "
        f"{len(result.pool_ids)} -> {len(result.post_pitch_ids)} -> "
        f"{len(result.post_quality_ids)} -> {len(result.top_k_ids)}; "
        f"result written to {args.out}"
    )
    return 0


def _cmd_dynamic(args: argparse.Namespace) -> int:
    result_path = _require_file(args.result, "result file")
    if result_path is None:
        return USAGE_EXIT
    result = load_result(result_path)
    # The stored config seeds the backend settings; empty values defer to
    # the environment, and explicit flags override both.
    stored = {k: str(v) for k, v in result.config.items() if v != ""}
    overrides = {}
    if args.backend_url is not None:
        overrides["backend_url"] = args.backend_url
    if args.cache_dir is not None:
        overrides["cache_dir"] = args.cache_dir
    config = build_config(stored, overrides)
    backends = config.make_backend_set()
    choice = run_dynamic(result, args.text, backends)
    if args.json:
        print(
            json.dumps(
                {
                    "chosen": choice.chosen_id,
                    "fallback": choice.fallback,
                    "scores": [
                        {"id": s.candidate_id, "relevance": s.relevance}
                        for s in choice.scores
                    ],
                }
            )
        )
    else:
        print(f"chosen: {choice.chosen_id}")
        for s in choice.scores:
            print(f"  {s.candidate_id}: {s.relevance:.4f}")
        if choice.fallback:
            print("  (semantic backend unavailable; static top-1 used)")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    result_path = _require_file(args.result, "result file")
    if result_path is None:
        return USAGE_EXIT
    print(render_report(load_result(result_path)))
    return 0


def _cmd_mock_serve(args: argparse.Namespace) -> int:
    fixture_path = _require_file(args.fixture, "fixture file")
    if fixture_path is None:
        return USAGE_EXIT
    fixture = MockFixture.from_json(fixture_path)
    server = MockWireServer(fixture, host=args.host, port=args.port)
    print(f"mock backends listening on {server.base_url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "static": _cmd_static,
    "dynamic": _cmd_dynamic,
    "report": _cmd_report,
    "mock-serve": _cmd_mock_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except MockFixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT
    except EmoProError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


def entrypoint() -> None:
    sys.exit(main())
