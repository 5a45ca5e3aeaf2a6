#!/usr/bin/env python3
"""Build a synthetic demo corpus (WAVs, manifest, mock fixture)."""

import argparse
import sys
from pathlib import Path

from emopro.corpus import EmotionLabel
from emopro.synth import DEFAULT_SEED, build_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--speaker", default="spk1")
    parser.add_argument("--emotion", default="happy", type=EmotionLabel.parse)
    parser.add_argument("--blobs", type=int, default=10)
    parser.add_argument("--per-blob", type=int, default=20)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args()

    corpus = build_corpus(
        Path(args.out),
        speaker_id=args.speaker,
        emotion=args.emotion,
        num_blobs=args.blobs,
        per_blob=args.per_blob,
        seed=args.seed,
    )
    print(f"manifest: {corpus.manifest_path}")
    print(f"fixture:  {corpus.fixture_path}")
    print(f"candidates: {len(corpus.all_ids)} in {args.blobs} blobs")
    return 0


if __name__ == "__main__":
    sys.exit(main())
