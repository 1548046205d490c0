"""Command-line entry point: ``granops {synth,run,bench,compare,ops}``.

Exit codes: 0 success, 2 usage error, 3 data or format error, 4 runtime
op error.
"""
from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
from pathlib import Path

from . import bench as benchmod
from .errors import (DomainError, FormatError, GranopsError, InsufficientDataError, PairingError, ScriptError,
                     ScriptRuntimeError)
from .io import (ensure_dir, read_stack, rows_from_csv, write_measurements_csv, write_pairs_csv,
                 write_stack)
from .macro import ScriptSegmenter, load_script
from .registry import unique_ops
from .runtime import Runtime
from .stats import bland_altman, compare_methods
from .workflow import SynthParams, Variant, WorkflowParams, nucseg, run_workflow, synth_timelapse

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("width and height must be >= 1")
    return w, h


def _triple(text):
    try:
        x, y, r = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,R, got {text!r}") from None
    return x, y, r


def _params(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--params expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _workflow_setup(args):
    """Resolve params and segmenter from ``--variant``/``--script``/``--params``."""
    overrides = _params(args.params)
    base = WorkflowParams(variant=Variant(args.variant))
    script_extra = {}
    if args.script:
        known = {"nuclei_channel", "protein_channel", "sigma", "band_radius", "radius", "minimum_size",
                 "min_size", "maximum_size", "max_size", "variant"}
        for key in list(overrides):
            if key not in known:
                script_extra[key] = _number_or_string(overrides.pop(key))
    try:
        p = base.with_overrides(overrides)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except ValueError as exc:
        raise UsageError(f"bad --params value: {exc}") from None
    segment = ScriptSegmenter(load_script(args.script), script_extra) if args.script else nucseg
    return p, segment


def _number_or_string(v):
    try:
        return float(v)
    except ValueError:
        return v


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args):
    w, h = args.size
    try:
        sp = SynthParams(frames=args.frames, width=w, height=h, nucleus_radius=args.nucleus_radius,
                         envelope_gain=args.gain, noise_amplitude=args.noise, seed=args.seed,
                         distractors=tuple(args.distractor or ()))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    path = write_stack(synth_timelapse(sp), args.out, args.dtype)
    print(path)


def cmd_run(args):
    p, segment = _workflow_setup(args)
    tl = read_stack(args.input)
    rt = Runtime(args.backend, args.threads)
    if args.trace:
        rt.start_time_tracing()
    rows = run_workflow(tl, p, runtime=rt, segment=segment)
    if args.trace:
        rt.stop_time_tracing()
        print(rt.get_time_tracing()[0])
    if args.out:
        write_measurements_csv(rows, args.out)
    else:
        write_measurements_csv(rows, sys.stdout)


def _bench_samples(manifest, variant, script, params, backend, threads, repeats):
    ns = argparse.Namespace(variant=variant, script=script, params=params)
    p, segment = _workflow_setup(ns)
    tl = read_stack(manifest)
    rt = Runtime(backend, threads)
    return benchmod.benchmark(lambda: run_workflow(tl, p, runtime=rt, segment=segment), repeats)


def _bench_child(queue, *task):
    try:
        queue.put(("ok", [tuple(s) for s in _bench_samples(*task)]))
    except BaseException as exc:  # reported by the parent
        queue.put(("error", f"{type(exc).__name__}: {exc}"))


def cmd_bench(args):
    task = (args.input, args.variant, args.script, args.params, args.backend, args.threads, args.repeats)
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    _workflow_setup(args)  # validate before spawning
    if args.isolate:
        ctx = multiprocessing.get_context("spawn")
        queue = ctx.Queue()
        proc = ctx.Process(target=_bench_child, args=(queue, *task))
        proc.start()
        status, payload = queue.get()
        proc.join()
        if status != "ok":
            raise GranopsError(f"isolated benchmark failed: {payload}")
        samples = [benchmod.BenchSample(*s) for s in payload]
    else:
        samples = _bench_samples(*task)
    label = f"{Path(args.script).stem if args.script else args.variant}/{args.backend}"
    summary = benchmod.summarize(samples, args.discard_warmup, label)
    summary.extra = {"repeats": args.repeats, "isolated": bool(args.isolate),
                     "threads": Runtime(args.backend, args.threads).backend.threads}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(summary.to_json(indent=2))
    benchmod.write_samples_csv(samples, out.with_suffix(".samples.csv"), label)
    print(f"{label}: median {summary.median:.3f} ms, IQR [{summary.q25:.3f}, {summary.q75:.3f}], "
          f"first run {summary.first_run:.3f} ms ({summary.warmup_ratio:.2f}x)")


def cmd_compare(args):
    a, b = rows_from_csv(args.a), rows_from_csv(args.b)
    fields = {"area", "mean", "centroid_x", "centroid_y", "perimeter", "circularity", "integrated_density"}
    if args.field not in fields:
        raise UsageError(f"--field must be one of {sorted(fields)}")
    report = compare_methods(a, b, args.field, args.tolerance, args.alpha)
    text = report.to_json(indent=2)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        print(text)
    if args.plots:
        d = ensure_dir(args.plots)
        va = [getattr(r, args.field) for r in a]
        vb = [getattr(r, args.field) for r in b]
        write_pairs_csv(d / "scatter.csv", ["a", "b"], zip(va, vb))
        ba = bland_altman(va, vb)
        write_pairs_csv(d / "bland_altman.csv", ["mean", "difference"], ba.pairs)
        (d / "bland_altman_lines.json").write_text(json.dumps(
            {"bias": ba.bias, "loa_low": ba.loa_low, "loa_high": ba.loa_high}, indent=2))


def cmd_ops(args):
    for spec in unique_ops():
        print(f"{spec.signature():<90} {spec.summary}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granops", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic two-channel time lapse")
    s.add_argument("--frames", type=int, default=15)
    s.add_argument("--size", type=_size, default=(512, 512), metavar="WxH")
    s.add_argument("--nucleus-radius", type=float, default=60.0)
    s.add_argument("--gain", type=float, default=1.0, help="envelope intensity increase per frame")
    s.add_argument("--noise", type=float, default=2.0, help="uniform noise amplitude")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--distractor", type=_triple, action="append", metavar="X,Y,R",
                   help="extra disk in the nucleus channel (repeatable)")
    s.add_argument("--dtype", choices=["u8", "u16", "f32"], help="plane format (default: inferred)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    def workflow_args(p):
        p.add_argument("--input", required=True, help="stack manifest or its directory")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--script", help="segmentation macro (.cmacro)")
        g.add_argument("--variant", choices=[v.value for v in Variant], default="original")
        p.add_argument("--backend", choices=["reference", "parallel"], default="reference")
        p.add_argument("--threads", type=int)
        p.add_argument("--params", nargs="*", metavar="K=V")

    r = sub.add_parser("run", help="segment and measure a stack")
    workflow_args(r)
    r.add_argument("--trace", action="store_true", help="print the operation time trace")
    r.add_argument("--out", help="measurements CSV (default: stdout)")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="time repeated workflow runs")
    workflow_args(b)
    b.add_argument("--repeats", type=int, default=benchmod.DEFAULT_REPEATS)
    b.add_argument("--discard-warmup", type=int, default=0, metavar="K")
    b.add_argument("--isolate", action="store_true", help="run in a freshly spawned process")
    b.add_argument("--out", required=True, help="summary JSON; samples go to <out>.samples.csv")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("compare", help="compare two measurement CSVs")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--field", default="mean")
    c.add_argument("--tolerance", type=float, default=0.05)
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--out")
    c.add_argument("--plots", metavar="DIR", help="write scatter and Bland-Altman CSVs here")
    c.set_defaults(func=cmd_compare)

    o = sub.add_parser("ops", help="list registered operations")
    o.set_defaults(func=cmd_ops)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"granops {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, PairingError, InsufficientDataError, OSError) as exc:
        print(f"granops {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ScriptRuntimeError as exc:
        print(f"granops {args.command}: {_where(args)}{exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ScriptError as exc:
        print(f"granops {args.command}: {_where(args)}{exc}", file=sys.stderr)
        return EXIT_DATA
    except (GranopsError, IndexError, ValueError) as exc:
        print(f"granops {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _where(args):
    return f"{args.script}: " if getattr(args, "script", None) else ""


if __name__ == "__main__":
    sys.exit(main())
