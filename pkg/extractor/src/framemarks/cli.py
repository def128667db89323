"""Command-line front end.

    extract --video interview.avi --out landmarks.csv

Exit codes match the downstream tooling: 0 success, 1 bad arguments or
unreadable/undecodable input, 2 a run that decoded fine but produced no
usable rows (for example no face in any sampled frame).
"""

from __future__ import annotations

import argparse
import sys

from .config import ExtractionConfig, load_index_map
from .errors import ExtractionError, InputError
from .extract import extract

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 reserved for runtime failures
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _build_parser() -> _Parser:
    p = _Parser(prog="extract", description="Extract facial landmark x-coordinates from a video into a landmarks CSV.")
    p.add_argument("--video", required=True, help="input video file")
    p.add_argument("--out", required=True, help="output landmarks CSV path")
    p.add_argument("--interval", type=float, default=0.25, help="seconds between samples (default 0.25)")
    p.add_argument("--max-frames", type=int, default=100, help="cap on sampled timestamps (default 100)")
    p.add_argument("--index-map", help="JSON file mapping the 8 channel names to 68-point indices")
    p.add_argument("--min-confidence", type=float, default=0.5, help="detector confidence threshold in (0, 1] (default 0.5)")
    p.add_argument("--video-id", help="video_id written into the CSV (default: video file stem)")
    p.add_argument("--log", help="extraction log path (default: <out>.log.jsonl)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        index_map = load_index_map(args.index_map) if args.index_map else None
        kwargs = dict(
            video_path=args.video,
            out_path=args.out,
            interval_s=args.interval,
            max_frames=args.max_frames,
            min_confidence=args.min_confidence,
            log_path=args.log,
            video_id=args.video_id,
        )
        if index_map is not None:
            kwargs["index_map"] = index_map
        result = extract(ExtractionConfig(**kwargs))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"wrote {result.rows_written} rows ({result.frames_skipped} skipped of "
        f"{result.frames_sampled} sampled) to {result.csv_path}"
    )
    print(f"log: {result.log_path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
