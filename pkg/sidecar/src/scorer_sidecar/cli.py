"""Command line entry point for the scoring sidecar."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .bindings import UNBOUND
from .config import load_config
from .errors import ConfigError
from .server import serve_scoring_api


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorer-sidecar",
        description="Serve the scoring backend roles over HTTP.",
    )
    parser.add_argument("--config", help="path to a key=value config file")
    parser.add_argument("--host", help="bind address (default 127.0.0.1)")
    parser.add_argument("--port", type=int, help="bind port, 0 for ephemeral")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    overrides = {}
    if args.host is not None:
        overrides["host"] = args.host
    if args.port is not None:
        overrides["port"] = args.port
    if overrides:
        config = dataclasses.replace(config, **overrides)
    try:
        server = serve_scoring_api(config)
    except OSError as exc:
        print(f"error: cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        return 1
    try:
        for role, spec in sorted(config.role_specs.items()):
            if role in server.bindings:
                line = f"  {role}: {server.bindings[role].model_id}"
            elif role in server.failures:
                line = f"  {role}: unavailable ({server.failures[role]})"
            else:
                assert spec == UNBOUND
                line = f"  {role}: unbound"
            print(line, flush=True)
        print(f"sidecar listening on {server.base_url}", flush=True)
        server.wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
