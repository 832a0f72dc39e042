"""Command line: ``compress``, ``decompress`` and ``evaluate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 round-trip error bound violated.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluate as ev
from .exceptions import DataError, PLAError
from .generators import generate_arrays, parse_spec
from .io import read_channels, write_csv
from .methods import METHODS
from .metrics import write_stats_csv
from .protocols import PROTOCOLS, decode_bytes, dump_stream, encode, load_stream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VIOLATION = 3

log = logging.getLogger("plastream")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p, many=False):
    src = p.add_mutually_exclusive_group(required=True)
    if many:
        src.add_argument("--input", nargs="+", metavar="PATH", help="CSV file(s)")
    else:
        src.add_argument("--input", metavar="PATH", help="CSV file")
    src.add_argument(
        "--generate",
        metavar="KIND:N:PARAMS",
        help="synthetic stream, e.g. random_walk:1000:sigma=0.5",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for --generate (default 0)")
    p.add_argument("--t-col", default="0", help="timestamp column, index or header name")
    p.add_argument(
        "--y-col",
        action="append",
        default=None,
        help="value column, index or header name; repeat for several channels",
    )


def _add_limits(p):
    p.add_argument("--max-seg", type=int, default=None, help="maximum segment length")
    p.add_argument("--min-seg", type=int, default=None, help="minimum segment length")
    p.add_argument(
        "--t-offset",
        type=float,
        default=None,
        help="added to timestamps before compression (implicit needs t > 0)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plastream", description="Streaming piecewise linear compression.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", help="compress a CSV column or a generated stream")
    c.add_argument("--method", choices=METHODS, required=True)
    c.add_argument("--protocol", choices=PROTOCOLS, required=True)
    c.add_argument("--epsilon", type=float, required=True)
    _add_source(c)
    _add_limits(c)
    c.add_argument(
        "--output", required=True, metavar="PREFIX", help="files are written as PREFIX[.CHANNEL].STREAM.pla"
    )

    d = sub.add_parser("decompress", help="rebuild values from .pla stream files")
    d.add_argument("streams", nargs="+", metavar="STREAM", help=".pla files of one channel")
    tsrc = d.add_mutually_exclusive_group(required=True)
    tsrc.add_argument("--timestamps", metavar="PATH", help="CSV holding the timestamp column")
    tsrc.add_argument("--generate", metavar="KIND:N:PARAMS", help="take timestamps from a generated stream")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--t-col", default="0")
    d.add_argument("--y-col", default=None, help="original values, checked with --verify")
    d.add_argument("--t-offset", type=float, default=None)
    d.add_argument("--verify", action="store_true", help="compare against the original values")
    d.add_argument("--output", default="-", metavar="PATH", help="CSV output (default stdout)")

    e = sub.add_parser("evaluate", help="run pairings and write metric summaries")
    e.add_argument("--method", action="append", choices=METHODS, default=None)
    e.add_argument("--protocol", action="append", choices=PROTOCOLS, default=None)
    e.add_argument("--all", action="store_true", help="every legal pairing, keyed or not")
    e.add_argument("--epsilon", type=float, nargs="+", required=True)
    _add_source(e, many=True)
    e.add_argument("--streams", type=int, default=1, help="number of generated streams")
    _add_limits(e)
    e.add_argument("--output", default="-", metavar="PATH", help="stats CSV (default stdout)")
    return parser


@contextlib.contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _channels(args):
    """``[(name, t, y), ...]`` from --input or --generate."""
    if args.generate:
        kind, n, params = parse_spec(args.generate)
        t, y = generate_arrays(kind, n, params, seed=args.seed)
        return [(kind, t, y)]
    y_cols = args.y_col or ["1"]
    t, ys = read_channels(args.input, args.t_col, y_cols)
    return [(str(col), t, y) for col, y in zip(y_cols, ys)]


def _offset(args, protocol, t):
    if args.t_offset is not None:
        return args.t_offset
    return ev.implicit_offset(t) if protocol == "implicit" else 0.0


def cmd_compress(args) -> int:
    kw = {}
    if args.max_seg is not None:
        kw["max_length"] = args.max_seg
    if args.min_seg is not None:
        kw["min_length"] = args.min_seg
    channels = _channels(args)
    for name, t, y in channels:
        offset = _offset(args, args.protocol, t)
        res = encode(args.method, args.protocol, (t + offset).tolist(), y.tolist(), args.epsilon, **kw)
        for stream, records in res.streams.items():
            parts = [args.output] + ([name] if len(channels) > 1 else []) + [stream, "pla"]
            path = Path(".".join(parts))
            path.write_bytes(dump_stream(args.protocol, stream, args.method, args.epsilon, records))
            print(path)
        log.info("%s: %d tuples -> %d bytes (offset %g)", name, len(y), res.nbytes, offset)
    return EXIT_OK


def cmd_decompress(args) -> int:
    blobs = [Path(p).read_bytes() for p in args.streams]
    if args.generate:
        kind, n, params = parse_spec(args.generate)
        t, y = generate_arrays(kind, n, params, seed=args.seed)
    else:
        t, ys = read_channels(args.timestamps, args.t_col, [args.y_col] if args.y_col else [])
        y = ys[0] if ys else None
    header, _ = load_stream(blobs[0])
    offset = args.t_offset
    if offset is None:
        offset = ev.implicit_offset(t) if header.protocol == "implicit" else 0.0
    y_approx = decode_bytes(t + offset, *blobs)
    with _open_out(args.output) as fh:
        write_csv(fh, t, [y_approx])
    if args.verify:
        if y is None:
            raise UsageError("--verify needs original values (--y-col or --generate)")
        bad = int(np.count_nonzero(~(np.abs(y_approx - y) < header.epsilon)))
        if bad:
            print(f"{bad} value(s) off by epsilon={header.epsilon} or more", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


def _pairings(args):
    if args.all:
        pairs = ev.legal_pairings()
    elif not args.method and not args.protocol:
        pairs = list(ev.KEYED_PAIRINGS)
    else:
        methods = args.method or METHODS
        protocols = args.protocol or PROTOCOLS
        pairs = []
        for m in methods:
            for p in protocols:
                if m == "swing" and p != "implicit" and not (args.method and args.protocol):
                    continue
                pairs.append(ev.Pairing(ev.pairing_key(m, p), m, p))
    return [(p.method, p.protocol) for p in pairs]


def _evaluate_streams(args):
    if args.generate:
        kind, n, params = parse_spec(args.generate)
        for k in range(args.streams):
            t, y = generate_arrays(kind, n, params, seed=args.seed + k)
            yield f"{kind}{k}", t, y
    else:
        y_cols = args.y_col or ["1"]
        for path in args.input:
            t, ys = read_channels(path, args.t_col, y_cols)
            for col, y in zip(y_cols, ys):
                yield f"{Path(path).stem}.{col}", t, y


def cmd_evaluate(args) -> int:
    if args.streams < 1:
        raise UsageError("--streams must be at least 1")
    configs = ev.expand_configs(
        _pairings(args), args.epsilon, args.max_seg, args.min_seg, args.t_offset
    )
    report = ev.run_evaluate(configs, _evaluate_streams(args))
    for notice in report.notices:
        print(notice, file=sys.stderr)
    with _open_out(args.output) as fh:
        write_stats_csv(fh, report.rows())
    bad = [r for r in report.results if not r.ok]
    for r in bad:
        print(
            f"{r.run_id} eps={r.config.epsilon}: {r.violations} point(s) out of bound, max error {r.max_error}",
            file=sys.stderr,
        )
    return EXIT_VIOLATION if bad else EXIT_OK


COMMANDS = {"compress": cmd_compress, "decompress": cmd_decompress, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"plastream: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"plastream: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (PLAError, UsageError) as exc:
        print(f"plastream: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
