"""Command-line front end: ``ezw encode``, ``ezw decode`` and ``ezw bench``."""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
import logging
import sys
import warnings

from .codec import EncoderConfig, decode, encode
from .errors import EzwError, FormatError
from .imageio import load_pgm, save_pgm
from .metrics import CSV_FIELDS, compression_ratio, csv_row, format_psnr, psnr
from .wavelet import BANKS

log = logging.getLogger("ezw")

DEFAULT_SCHEMES = "A,B,C3,C4,C5"


def parse_scheme(label):
    """``A``, ``B`` or ``C<drp>`` -> (scheme, drp)."""
    label = label.strip().upper()
    if label in ("A", "B"):
        return label, None
    if label.startswith("C") and label[1:].isdigit():
        return "C", int(label[1:])
    raise ValueError(f"bad scheme {label!r}; use A, B or C<drp> such as C4")


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def pass_line(stats):
    s = stats.symbols
    return (
        f"pass {stats.pass_index:2d}  T={stats.threshold:g}  visits={stats.coefficient_visits}"
        f"  ZTR={s['ZTR']} IZ={s['IZ']} POS={s['POS']} NEG={s['NEG']}"
        f"  sub_bits={stats.subordinate_bits}  bytes={stats.cumulative_stream_bytes}"
        f"  dominant={stats.dominant_wall_time * 1e3:.2f}ms"
    )


def cmd_encode(args):
    image = load_pgm(args.input)
    cfg = EncoderConfig(args.scheme, args.drp, args.passes, args.levels, args.bank)
    stream, run = encode(image, cfg)
    data = stream.to_bytes()
    with open(args.output, "wb") as f:
        f.write(data)
    for stats in run.passes:
        print(pass_line(stats))
    if stream.num_passes < cfg.num_passes:
        print(f"stopped after {stream.num_passes} passes: threshold fell below 1")
    ratio = compression_ratio(image.width * image.height, len(data))
    print(f"wrote {args.output}: {len(data)} bytes, ratio {ratio:.3f}")
    return 0


def cmd_decode(args):
    with open(args.input, "rb") as f:
        data = f.read()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = decode(data, max_passes=args.max_passes)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    save_pgm(args.output, result.image)
    print(f"decoded {result.passes} passes -> {args.output}")
    if args.reference:
        print(f"PSNR {format_psnr(psnr(load_pgm(args.reference), result.image))} dB")
    return 0


def run_config(image, cfg):
    """Encode once, then decode every pass prefix. Returns list of (PassStats, psnr)."""
    stream, run = encode(image, cfg)
    result = decode(stream, per_pass=True)
    return [(stats, psnr(image, img)) for stats, img in zip(run.passes, result.images())]


def _table(title, labels, rows):
    width = max(12, *(len(lb) + 2 for lb in labels))
    out = [title, "pass".ljust(6) + "".join(lb.rjust(width) for lb in labels)]
    for k, values in rows:
        out.append(str(k).ljust(6) + "".join(v.rjust(width) for v in values))
    return "\n".join(out)


def summary_tables(results):
    """Cumulative dominant-pass visits and PSNR per pass, one column per config."""
    labels = [cfg.label for cfg in results]
    npass = max(len(r) for r in results.values())
    visit_rows, psnr_rows = [], []
    totals = {cfg: 0 for cfg in results}
    for k in range(npass):
        vis, ps = [], []
        for cfg, rows in results.items():
            if k < len(rows):
                totals[cfg] += rows[k][0].coefficient_visits
                vis.append(str(totals[cfg]))
                ps.append(format_psnr(rows[k][1]))
            else:
                vis.append("-")
                ps.append("-")
        visit_rows.append((k + 1, vis))
        psnr_rows.append((k + 1, ps))
    return (
        _table("cumulative dominant-pass coefficient visits", labels, visit_rows)
        + "\n\n"
        + _table("decoded PSNR (dB)", labels, psnr_rows)
    )


def cmd_bench(args):
    image = load_pgm(args.image)
    configs = []
    for label in args.schemes.split(","):
        scheme, drp = parse_scheme(label)
        configs.append(EncoderConfig(scheme, drp, args.passes, args.levels, args.bank))
    configs.sort(key=lambda c: (c.scheme, c.drp or 0))
    results = {}
    status = 0
    out = open(args.csv, "w", newline="") if args.csv != "-" else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [(cfg, pool.submit(run_config, image, cfg)) for cfg in configs]
            for cfg, fut in futures:
                try:
                    rows = fut.result()
                except Exception as exc:  # noqa: BLE001 - report and stop after flushing
                    print(f"error: run {cfg.label} failed: {exc}", file=sys.stderr)
                    status = 1
                    break
                results[cfg] = rows
                for stats, db in rows:
                    writer.writerow(csv_row(cfg.scheme, cfg.drp, stats, db))
                out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    if results:
        print(summary_tables(results), file=sys.stdout if args.csv != "-" else sys.stderr)
    return status


def build_parser():
    parser = argparse.ArgumentParser(prog="ezw", description="Embedded zerotree wavelet codec")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def codec_options(p):
        p.add_argument("--passes", type=_positive, default=10)
        p.add_argument("--levels", type=_positive, default=5)
        p.add_argument("--bank", choices=sorted(BANKS), default="haar")

    enc = sub.add_parser("encode", help="encode a P5 PGM image")
    enc.add_argument("--in", dest="input", required=True)
    enc.add_argument("--out", dest="output", required=True)
    enc.add_argument("--scheme", choices=["A", "B", "C"], type=str.upper, required=True)
    enc.add_argument("--drp", type=_positive, help="detail retaining pass (scheme C)")
    codec_options(enc)
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode an EZW1 stream to PGM")
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--out", dest="output", required=True)
    dec.add_argument("--max-passes", type=_positive)
    dec.add_argument("--reference", help="original PGM; prints PSNR against it")
    dec.set_defaults(func=cmd_decode)

    bench = sub.add_parser("bench", help="compare coding schemes on one image")
    bench.add_argument("--image", required=True)
    bench.add_argument("--schemes", default=DEFAULT_SCHEMES, help="comma list of A, B, C<drp>")
    bench.add_argument("--csv", default="-", help="output CSV path ('-' for stdout)")
    bench.add_argument("--jobs", type=_positive, default=1)
    codec_options(bench)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "encode":
        if args.scheme == "C" and args.drp is None:
            parser.error("--scheme C requires --drp")
        if args.drp is not None and args.scheme == "C" and args.drp > args.passes:
            parser.error(f"--drp {args.drp} exceeds --passes {args.passes}")
    if args.command == "bench":
        try:
            for label in args.schemes.split(","):
                scheme, drp = parse_scheme(label)
                if drp is not None and not 1 <= drp <= args.passes:
                    raise ValueError(f"drp {drp} outside 1..{args.passes}")
        except ValueError as exc:
            parser.error(str(exc))
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
    except EzwError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
