"""Command-line entry point.

Exit codes: 0 success, 1 a file failed or an invariant was violated,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import encoder, masking, objectives, pipeline
from .formats import FormatError, format_from_dict, resolve_format
from .ingest import ParseError, parse_generic_json, parse_ntu_skeleton, serialize_generic_json
from .stats import ChannelStats, load_manifest, save_stats
from .streams import STREAMS

log = logging.getLogger("skel2img")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _size(text: str) -> tuple[int, int]:
    try:
        parts = [int(v) for v in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}; use N or HxW") from None
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"bad size {text!r}; use N or HxW")
    return parts[0], parts[1]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--format", help="built-in format (ntu25, ucla20, toyota13) or a "
                                    "format-description file")
    g.add_argument("--stream", choices=STREAMS, default="joint")
    g.add_argument("--size", type=_size, default=encoder.DEFAULT_SIZE, help="N or HxW")
    g.add_argument("--normalize", type=Path, metavar="STATS", help="stats file to normalize with")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--fail-fast", action="store_true")
    g.add_argument("--keep-zero-frames", action="store_true")
    g.add_argument("--no-translate", action="store_true")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="skel2img", description="Encode 3D skeleton sequences as images and build "
                                     "the masks, schedules and statistics used to pretrain on them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="encode skeleton files to images")
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--manifest", action="append", type=Path, default=[])
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--mode", choices=tuple(pipeline.EXTENSIONS), default="f32raw")

    p = sub.add_parser("mask", parents=[common], help="generate a patch mask file")
    p.add_argument("--strategy", choices=masking.STRATEGIES + ("group",), default="random")
    p.add_argument("--ratio", type=float, default=masking.DEFAULT_RATIO)
    p.add_argument("--grid", type=_size, help="patch grid HxW (default: size / patch size)")
    p.add_argument("--patch-size", type=int, default=16)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("stats", parents=[common], help="channel statistics over manifests")
    p.add_argument("--manifest", action="append", type=Path, required=True)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("decode", parents=[common], help="image back to a generic JSON sequence")
    p.add_argument("image", type=Path)
    p.add_argument("--sidecar", type=Path)
    p.add_argument("--T", dest="target_T", type=int)
    p.add_argument("--J", dest="target_J", type=int)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("inspect", parents=[common], help="print and validate file headers")
    p.add_argument("paths", nargs="+", type=Path)

    p = sub.add_parser("schedule", parents=[common], help="dump a diffusion variance schedule")
    p.add_argument("--t", dest="T_diff", type=int, default=1000)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        pipeline.write_atomic(out, text)


def _spec(args, inputs=()) -> pipeline.JobSpec:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.format:
        try:
            resolve_format(args.format)
        except (KeyError, FormatError) as e:
            raise UsageError(str(e)) from None
    if args.normalize and not args.normalize.is_file():
        raise UsageError(f"stats file {args.normalize} not found")
    return pipeline.JobSpec(
        inputs=list(inputs), format=args.format, stream=args.stream, size=args.size,
        normalize=args.normalize, out_dir=getattr(args, "out", None) or Path("."),
        mode=getattr(args, "mode", "f32raw"), jobs=args.jobs, seed=args.seed,
        keep_zero_frames=args.keep_zero_frames, translate=not args.no_translate,
        fail_fast=args.fail_fast)


def cmd_encode(args) -> int:
    inputs = list(args.inputs)
    for m in args.manifest:
        inputs += [e.path for e in load_manifest(m).entries]
    if not inputs:
        raise UsageError("no inputs given")
    results = pipeline.run_encode(_spec(args, inputs))
    failed = [r for r in results if not r.ok]
    for r in results:
        print(f"{'ok' if r.ok else 'FAIL'}\t{r.path}\t{r.outputs[0] if r.ok else r.error}")
    skipped = len(inputs) - len(results)
    print(f"# {len(results) - len(failed)} encoded, {len(failed)} failed"
          + (f", {skipped} skipped (fail-fast)" if skipped else ""))
    return EXIT_FAILED if failed else EXIT_OK


def cmd_mask(args) -> int:
    if args.grid:
        grid = masking.PatchGrid(args.grid[0], args.grid[1], args.patch_size)
    else:
        try:
            grid = masking.PatchGrid.for_image(args.size[0], args.size[1], args.patch_size)
        except ValueError as e:
            raise UsageError(str(e)) from None
    try:
        mask = masking.make_mask(args.strategy, grid, args.ratio, args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(masking.dumps_mask(mask), args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    for m in args.manifest:
        if not m.is_file():
            raise UsageError(f"manifest {m} not found")
    stats = pipeline.stats_for_manifests(args.manifest, _spec(args))
    if stats.count == 0:
        print("no pixels accumulated", file=sys.stderr)
        return EXIT_FAILED
    if args.out:
        save_stats(stats, args.out)
    print(json.dumps({k: v for k, v in stats.to_dict().items() if k != "m2"}))
    return EXIT_OK


def cmd_decode(args) -> int:
    side = args.sidecar or pipeline.sidecar_path(args.image)
    doc = json.loads(side.read_text())
    payload = args.image.read_bytes()
    problems = encoder.validate_sidecar(doc, payload)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_FAILED
    img = encoder.import_image(payload, doc)
    seq = encoder.decode(img, args.target_T, args.target_J)
    _emit(serialize_generic_json(seq) + "\n", args.out)
    return EXIT_OK


def _inspect_json(path: Path, doc) -> list[str]:
    if not isinstance(doc, dict):
        return ["top-level JSON value is not an object"]
    if "joint_order" in doc:
        payload = None
        for ext in pipeline.EXTENSIONS.values():
            cand = path.with_suffix(ext)
            if cand.is_file():
                payload = cand.read_bytes()
        print(f"{path}: sidecar sample={doc.get('sample_id')!r} format={doc.get('format_id')} "
              f"T={doc.get('original_T')} J={doc.get('original_J')} "
              f"{doc.get('height')}x{doc.get('width')} mode={doc.get('mode')}")
        return encoder.validate_sidecar(doc, payload)
    if "strategy" in doc:
        mask = masking.mask_from_dict(doc)
        print(f"{path}: mask {mask.strategy} ratio={mask.ratio} seed={mask.seed} "
              f"grid={mask.grid.grid_h}x{mask.grid.grid_w} masked={mask.count}")
        problems = []
        if mask.strategy == "block" and not (masking.blocks_union(mask) == mask.masked).all():
            problems.append("block witnesses do not reproduce the mask")
        return problems
    if "joints" in doc:
        fmt = format_from_dict(doc)
        print(f"{path}: format {fmt.format_id} J={fmt.num_joints} parts={fmt.part_sizes()}")
        return []
    if "T_diff" in doc:
        sched = objectives.build_schedule(doc["T_diff"], doc["rho"])
        print(f"{path}: schedule T={sched.T_diff} rho={sched.rho}")
        ok = all(abs(a - b) <= 1e-12 for a, b in zip(doc["alpha_bar"], sched.alpha_bar))
        return [] if ok else ["alpha_bar disagrees with a rebuilt schedule"]
    if "count" in doc and "mean" in doc:
        stats = ChannelStats.from_dict(doc)
        print(f"{path}: stats count={stats.count} mean={stats.mean.tolist()} "
              f"std={stats.std.tolist()}")
        return []
    if "frames" in doc:
        fmt = resolve_format(doc.get("format_id", ""))
        seq = parse_generic_json(path.read_bytes(), fmt)
        print(f"{path}: sequence {seq.sample_id!r} format={seq.format_id} "
              f"T={seq.num_frames} J={seq.num_joints}")
        return []
    return ["unrecognized JSON document"]


def _inspect_one(path: Path) -> list[str]:
    if path.suffix == ".skeleton":
        frames = parse_ntu_skeleton(path.read_bytes())
        bodies = [len(f) for f in frames]
        joints = sorted({len(b.joints) for f in frames for b in f})
        print(f"{path}: ntu skeleton frames={len(frames)} max_bodies={max(bodies, default=0)} "
              f"joints={joints}")
        return [f"frame {t} has {n} bodies" for t, n in enumerate(bodies) if n > 2]
    if path.suffix in pipeline.EXTENSIONS.values():
        side = pipeline.sidecar_path(path)
        if not side.is_file():
            return [f"sidecar {side} not found"]
        doc = json.loads(side.read_text())
        print(f"{path}: image {doc.get('mode')} sample={doc.get('sample_id')!r}")
        return encoder.validate_sidecar(doc, path.read_bytes())
    return _inspect_json(path, json.loads(path.read_text()))


def cmd_inspect(args) -> int:
    status = EXIT_OK
    for path in args.paths:
        try:
            problems = _inspect_one(path)
        except (ParseError, FormatError, ValueError, KeyError, OSError) as e:
            problems = [f"{type(e).__name__}: {e}"]
        for p in problems:
            print(f"{path}: violation: {p}")
        if problems:
            status = EXIT_FAILED
    return status


def cmd_schedule(args) -> int:
    try:
        sched = objectives.build_schedule(args.T_diff, args.rho)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(sched.dumps(), args.out)
    return EXIT_OK


COMMANDS = {
    "encode": cmd_encode,
    "mask": cmd_mask,
    "stats": cmd_stats,
    "decode": cmd_decode,
    "inspect": cmd_inspect,
    "schedule": cmd_schedule,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"skel2img {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"skel2img {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
