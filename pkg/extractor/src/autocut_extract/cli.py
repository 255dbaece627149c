"""autocut-extract: turn a video file into a .feat.jsonl feature stream."""

from __future__ import annotations

import argparse
import json
import sys

from autocut_extract.extract import ExtractorConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocut-extract",
        description="Sample video frames and extract semantic/aesthetic/shot-size features.",
    )
    parser.add_argument("video", help="input video file")
    parser.add_argument("--fps", type=float, default=2.0, help="sampling rate (frames per second)")
    parser.add_argument("--out", default=None, help="output path (default: <video>.feat.jsonl)")
    parser.add_argument("--semantic", default="untrained-seeded",
                        help="semantic backend: untrained-seeded | imagenet | weights path")
    parser.add_argument("--aesthetic", default="proxy",
                        help="aesthetic backend: proxy | TorchScript path")
    parser.add_argument("--shot-size", default="proxy-uniform",
                        help="shot-size backend: proxy-uniform | TorchScript path")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--no-deterministic", action="store_true",
                        help="allow multi-threaded nondeterministic inference")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExtractorConfig(
        fps_sample=args.fps,
        semantic=args.semantic,
        aesthetic=args.aesthetic,
        shot_size=args.shot_size,
        batch_size=args.batch_size,
        deterministic=not args.no_deterministic,
    )
    try:
        out = extract(args.video, config, args.out)
    except (ValueError, OSError, RuntimeError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "stage": "extract"}) + "\n")
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
