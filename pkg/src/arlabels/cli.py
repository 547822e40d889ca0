"""Command-line interface.

Subcommands:

* ``validate`` — check a scene file and print every violation.
* ``simulate`` — run a scripted device path through the engine and write
  one FrameSnapshot JSON line per frame.
* ``bench`` — time the occlusion resolver over the synthetic layouts.
* ``serve`` — stream frames to interactive clients over TCP/WebSocket.

Exit codes: 0 success, 1 domain violation, 2 I/O or usage error.
Set ARLABELS_LOG=debug|info|warning to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .bench import DEFAULT_NS, MIN_REPETITIONS, format_table, run_bench, scaling_exponent, to_csv
from .datasets import EXAMPLE_NAMES, load_example
from .layouts import LAYOUTS
from .pipeline import LabelEngine, snapshot_to_json_line
from .posescript import load_posescript, pose_at
from .scene import Scene, SceneFormatError, load_scene, validate_scene

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

log = logging.getLogger("arlabels")


def _resolve_scene(ref: str) -> Scene:
    """Load a scene from a file path, or from a bundled example name."""
    if ref in EXAMPLE_NAMES:
        return load_example(ref)
    return load_scene(ref)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        scene = _resolve_scene(args.scene)
    except (OSError, SceneFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problems = validate_scene(scene)
    for problem in problems:
        print(problem)
    if problems:
        print(f"{args.scene}: {len(problems)} violation(s)", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"{args.scene}: OK ({len(scene.pois)} POIs, {len(scene.groups)} groups)")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    if not 1.0 <= args.fps <= 240.0:
        print(f"error: --fps must be within [1, 240], got {args.fps}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scene = _resolve_scene(args.scene)
        script = load_posescript(args.script)
    except (OSError, SceneFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    duration = args.duration if args.duration is not None else script.duration_s
    if duration <= 0.0:
        print("error: pose script spans zero time; pass --duration", file=sys.stderr)
        return EXIT_USAGE

    try:
        engine = LabelEngine(scene)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION

    frame_count = round(duration * args.fps)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for k in range(frame_count):
            t = k / args.fps
            snapshot = engine.update_frame(pose_at(script, t), t)
            out.write(snapshot_to_json_line(snapshot) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    log.info("simulate: wrote %d frames over %.3f s", frame_count, duration)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.reps < MIN_REPETITIONS:
        print(f"error: --reps must be at least {MIN_REPETITIONS}", file=sys.stderr)
        return EXIT_USAGE
    try:
        records = run_bench(layouts=args.layouts, ns=args.ns, repetitions=args.reps)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("# wall times are machine-relative; compare orderings and scaling, not absolute values")
    print(format_table(records))
    for layout in args.layouts:
        cells = [r for r in records if r.layout == layout]
        if len(cells) >= 2:
            k = scaling_exponent([r.n for r in cells], [r.median_ms for r in cells])
            print(f"# {layout}: time ~ n^{k:.2f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(to_csv(records))
        print(f"# csv written to {args.csv}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        scene = _resolve_scene(args.scene)
    except (OSError, SceneFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problems = validate_scene(scene)
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return EXIT_VIOLATION
    if not 1.0 <= args.fps <= 240.0:
        print(f"error: --fps must be within [1, 240], got {args.fps}", file=sys.stderr)
        return EXIT_USAGE

    import asyncio

    from .service import serve_forever

    try:
        asyncio.run(serve_forever(scene, host=args.host, port=args.port, fps=args.fps))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arlabels",
        description="Occlusion-free billboard label placement for point-of-interest scenes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scene file and report violations")
    p.add_argument("scene", help=f"scene JSON path, or bundled name ({', '.join(EXAMPLE_NAMES)})")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scripted device path and write frame snapshots")
    p.add_argument("scene", help=f"scene JSON path, or bundled name ({', '.join(EXAMPLE_NAMES)})")
    p.add_argument("script", help="pose script JSON path")
    p.add_argument("--fps", type=float, default=30.0, help="frames per second, 1-240 (default 30)")
    p.add_argument("--duration", type=float, default=None, help="seconds to simulate (default: script length)")
    p.add_argument("--out", default=None, help="output file for JSON lines (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time the occlusion resolver on synthetic layouts")
    p.add_argument("--layouts", nargs="+", default=list(LAYOUTS), choices=sorted(LAYOUTS), help="layouts to run")
    p.add_argument("--ns", nargs="+", type=int, default=list(DEFAULT_NS), help="label counts to run")
    p.add_argument("--reps", type=int, default=5, help=f"timed repetitions per cell, minimum {MIN_REPETITIONS}")
    p.add_argument("--csv", default=None, help="also write results to this CSV file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="stream frames to interactive clients")
    p.add_argument("scene", help=f"scene JSON path, or bundled name ({', '.join(EXAMPLE_NAMES)})")
    p.add_argument("--host", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=7788, help="TCP/WebSocket port (default 7788)")
    p.add_argument("--fps", type=float, default=30.0, help="frame rate per session, 1-240 (default 30)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("ARLABELS_LOG", "WARNING").upper()
    logging.basicConfig(level=level if level in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL") else "WARNING")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
