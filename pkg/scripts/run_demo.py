#!/usr/bin/env python3
"""Full demo: synthetic corpus, mock backends over HTTP, both stages.

Builds a 200-candidate corpus, serves the mock scorers on an ephemeral
port, runs static selection through the real wire client, then picks a
prompt for a sample target text and prints the report.
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

from emopro.backends import MockFixture, MockWireServer
from emopro.config import build_config
from emopro.corpus import EmotionLabel
from emopro.pipeline import run_dynamic, run_static
from emopro.report import render_report
from emopro.synth import build_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--workdir", help="directory to keep artifacts in (default: temp)"
    )
    parser.add_argument(
        "--text",
        default="The harbor wind carries the scent of rain.",
        help="target text for the dynamic stage",
    )
    args = parser.parse_args()

    if args.workdir:
        workdir = Path(args.workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        cleanup = None
    else:
        cleanup = tempfile.TemporaryDirectory(prefix="emopro-demo-")
        workdir = Path(cleanup.name)

    try:
        started = time.monotonic()
        corpus = build_corpus(workdir / "corpus")
        server = MockWireServer(MockFixture.from_json(corpus.fixture_path))
        server.start()
        try:
            config = build_config(
                overrides={
                    "backend_url": server.base_url,
                    "cache_dir": str(workdir / "cache"),
                },
                env={},
            )
            result = run_static(
                config,
                corpus.manifest_path,
                corpus.speaker_id,
                EmotionLabel(corpus.emotion),
                config.make_backend_set(),
                workdir / "result.json",
            )
            print(render_report(result))
            print()
            choice = run_dynamic(result, args.text, config.make_backend_set())
            print(f"target text: {args.text!r}")
            print(f"dynamic choice: {choice.chosen_id}")
            for score in choice.scores:
                print(f"  {score.candidate_id}: {score.relevance:.4f}")
            stats = server.stats()
            print(f"\n{stats['total']} wire calls in {time.monotonic() - started:.2f}s")
        finally:
            server.stop()
    finally:
        if cleanup is not None:
            cleanup.cleanup()
    return 0


if __name__ == "__main__":
    sys.exit(main())
