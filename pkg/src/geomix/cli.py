"""Command-line interface: compress, decompress, bench, verify, trace.

Exit codes: 0 success, 1 failure (I/O, corrupt input, verification
violations), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, optlab
from .engine import (
    SHORT_NAMES,
    CodecConfig,
    FrameError,
    compress,
    decompress,
    ideal_code_length,
    trace,
    write_trace_csv,
)
from .mixers import canonical_kind

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _mixer(text: str) -> str:
    try:
        return canonical_kind(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _mixer_list(text: str) -> list[str]:
    return [_mixer(t.strip()) for t in text.split(",") if t.strip()]


def _config(args) -> CodecConfig:
    try:
        return CodecConfig(mixer=args.mixer, alpha=args.alpha, epsilon=args.epsilon)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _bpc(bits: float, n: int) -> float:
    return bits / n if n else 0.0


# -- compress / decompress -----------------------------------------------------

def cmd_compress(args) -> int:
    cfg = _config(args)
    data = Path(args.input).read_bytes()
    frame = compress(data, cfg).to_bytes()
    Path(args.output).write_bytes(frame)
    print(f"{args.input}: {len(data)} -> {len(frame)} bytes, {_bpc(8 * len(frame), len(data)):.4f} bpc "
          f"({SHORT_NAMES[cfg.mixer]})")
    return EXIT_OK


def cmd_decompress(args) -> int:
    blob = Path(args.input).read_bytes()
    cfg = None
    if args.mixer is not None or args.alpha is not None or args.epsilon is not None:
        if args.mixer is None:
            raise UsageError("--alpha/--epsilon need --mixer")
        cfg = _config(args)
    data = decompress(blob, cfg)
    Path(args.output).write_bytes(data)
    print(f"{args.input}: {len(blob)} -> {len(data)} bytes")
    return EXIT_OK


# -- bench ---------------------------------------------------------------------

@dataclass
class BenchRow:
    name: str
    size: int
    ideal_bits: dict = field(default_factory=dict)
    framed: dict = field(default_factory=dict)

    def bpc(self, mixer: str) -> float:
        return _bpc(self.ideal_bits[mixer], self.size)


@dataclass
class BenchReport:
    mixers: list
    rows: list

    def average(self, mixer: str) -> float:
        return sum(r.bpc(mixer) for r in self.rows) / len(self.rows)

    def average_framed_bpc(self, mixer: str) -> float:
        return sum(_bpc(8 * r.framed[mixer], r.size) for r in self.rows) / len(self.rows)


def _bench_file(path: Path, mixers: list[str], framed: bool) -> BenchRow:
    data = path.read_bytes()
    row = BenchRow(path.name, len(data))
    for mix in mixers:
        cfg = CodecConfig(mixer=mix)
        row.ideal_bits[mix] = ideal_code_length(data, cfg)
        if framed:
            row.framed[mix] = len(compress(data, cfg))
    return row


def run_bench(directory: Path, mixers: list[str], framed: bool = True, jobs: int = 1) -> BenchReport:
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    files = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise UsageError(f"no files in {directory}")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(lambda p: _bench_file(p, mixers, framed), files))
    else:
        rows = [_bench_file(p, mixers, framed) for p in files]
    return BenchReport(mixers, rows)


def bench_markdown(report: BenchReport) -> str:
    names = [SHORT_NAMES[m] for m in report.mixers]
    framed = bool(report.rows[0].framed)
    head = ["File", "Bytes"] + names + ([f"{n} framed" for n in names] if framed else [])
    lines = ["| " + " | ".join(head) + " |", "|" + "|".join(["---"] + ["---:"] * (len(head) - 1)) + "|"]

    def cells(values: list[float]) -> list[str]:
        best = min(f"{v:.3f}" for v in values)
        return [f"**{v:.3f}**" if f"{v:.3f}" == best else f"{v:.3f}" for v in values]

    for r in report.rows:
        line = [r.name, str(r.size)] + cells([r.bpc(m) for m in report.mixers])
        if framed:
            line += [str(r.framed[m]) for m in report.mixers]
        lines.append("| " + " | ".join(line) + " |")
    avg = ["Average", str(sum(r.size for r in report.rows))] + cells([report.average(m) for m in report.mixers])
    if framed:
        avg += [str(sum(r.framed[m] for r in report.rows)) for m in report.mixers]
    lines.append("| " + " | ".join(avg) + " |")
    return "\n".join(lines) + "\n"


def bench_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    framed = bool(report.rows[0].framed)
    head = ["file", "bytes"]
    for m in report.mixers:
        head += [f"{SHORT_NAMES[m]}_bpc", f"{SHORT_NAMES[m]}_ideal_bits"]
        if framed:
            head.append(f"{SHORT_NAMES[m]}_framed_bytes")
    w.writerow(head)
    for r in report.rows:
        line = [r.name, r.size]
        for m in report.mixers:
            line += [f"{r.bpc(m):.3f}", repr(r.ideal_bits[m])]
            if framed:
                line.append(r.framed[m])
        w.writerow(line)
    avg = ["Average", sum(r.size for r in report.rows)]
    for m in report.mixers:
        avg += [f"{report.average(m):.3f}", repr(sum(r.ideal_bits[m] for r in report.rows))]
        if framed:
            avg.append(sum(r.framed[m] for r in report.rows))
    w.writerow(avg)
    return buf.getvalue()


def cmd_bench(args) -> int:
    report = run_bench(Path(args.corpus), args.mixers, framed=not args.no_framed, jobs=args.jobs)
    text = bench_markdown(report) if args.format == "md" else bench_csv(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- verify --------------------------------------------------------------------

def cmd_verify(args) -> int:
    suites = args.suite or ["all"]
    report = optlab.verification_report(suites, args.trials, args.seed)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for name, res in report["suites"].items():
        status = "ok" if res["violations"] == 0 else f"{res['violations']} violation(s)"
        print(f"{name}: {res['trials']} trials, {status}", file=sys.stderr)
    return EXIT_OK if report["violations"] == 0 else EXIT_FAIL


# -- trace ---------------------------------------------------------------------

def cmd_trace(args) -> int:
    data = Path(args.input).read_bytes()
    records = trace(data, _config(args))
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_trace_csv(records, fh)
    else:
        write_trace_csv(records, sys.stdout)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _codec_flags(p: argparse.ArgumentParser, default_mixer: str | None = "geometric") -> None:
    p.add_argument("--mixer", type=_mixer, default=default_mixer,
                   help="geo, lin, beta or logistic (default: %(default)s)")
    p.add_argument("--alpha", type=float, default=None, help="step size (default per mixer)")
    p.add_argument("--epsilon", type=float, default=None, help="weight floor (default per mixer)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geomix", description="Context-mixing compressor with pluggable mixers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a file")
    p.add_argument("input")
    p.add_argument("output")
    _codec_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="decompress a file")
    p.add_argument("input")
    p.add_argument("output")
    _codec_flags(p, default_mixer=None)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("bench", help="bits per character for every file of a directory")
    p.add_argument("corpus")
    p.add_argument("--mixers", type=_mixer_list, default=["geometric", "linear", "beta"],
                   help="comma-separated mixer kinds (default: geo,lin,beta)")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--no-framed", action="store_true", help="skip the framed-size column")
    p.add_argument("--jobs", type=_positive_int, default=1, help="files processed concurrently")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run the optimization-lab verification suites")
    p.add_argument("--suite", action="append", choices=optlab.SUITES + tuple(optlab.SUITE_GROUPS),
                   help="suite to run; repeatable (default: all)")
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None, help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trace", help="per-bit CSV trace of the coding pipeline")
    p.add_argument("input")
    p.add_argument("--output", "-o", default=None)
    _codec_flags(p)
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"geomix: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FrameError) as e:
        print(f"geomix: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
