"""Command line front end.

    rgvss contrast-table --k 2 --n 3 --format csv
    rgvss corrigendum --format markdown
    rgvss encode --secret card.pbm --k 2 --n 3 --seed 42 --out shares/
    rgvss decode --op xor --out recon.pbm shares/card.share1.pbm shares/card.share2.pbm
    rgvss verify --k 2 --n 3 --trials 100000

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

from .analytic import SchemeParams, contrast_table, corrigendum_report
from .codec import EncodingPolicy
from .imaging import encode_image, measure_transmission, read_pbm, reconstruct, write_pbm
from .numeric import Ratio, to_decimal_str
from .oracle import EnumerationCapError, verify_scheme

MAX_TABLE_N = 12
FORMATS = ("markdown", "csv", "json")


class UsageError(Exception):
    pass


def _frac(x: Ratio) -> str:
    return str(x)


def _render(headers: list[str], rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return buf.getvalue()
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = [
        "| " + " | ".join(h.ljust(w) for h, w in zip(headers, widths)) + " |",
        "|" + "|".join("-" * (w + 2) for w in widths) + "|",
    ]
    lines += ["| " + " | ".join(c.ljust(w) for c, w in zip(r, widths)) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _scheme(k: int, n: int) -> SchemeParams:
    try:
        return SchemeParams(k, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_contrast_table(args) -> int:
    scheme = _scheme(args.k, args.n)
    if scheme.n > MAX_TABLE_N:
        raise UsageError(f"n={scheme.n} exceeds the table limit of {MAX_TABLE_N}")
    rows = contrast_table(scheme)
    digits = args.digits
    if args.format == "json":
        out = []
        for r in rows:
            item = {
                "k": scheme.k,
                "n": scheme.n,
                "t": r.t,
                "alpha_or": r.alpha_or.to_json(),
                "alpha_xor": r.alpha_xor.to_json(),
                "alpha_or_decimal": to_decimal_str(r.alpha_or, digits),
                "alpha_xor_decimal": to_decimal_str(r.alpha_xor, digits),
            }
            if args.show_transmissions:
                for name in ("t0_or", "t1_or", "t0_xor", "t1_xor"):
                    item[name] = getattr(r, name).to_json()
            out.append(item)
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
        return 0

    headers = ["t", "alpha_or", "alpha_xor", "alpha_or_decimal", "alpha_xor_decimal"]
    if args.show_transmissions:
        headers += ["t0_or", "t1_or", "t0_xor", "t1_xor"]
    body = []
    for r in rows:
        line = [
            str(r.t),
            _frac(r.alpha_or),
            _frac(r.alpha_xor),
            to_decimal_str(r.alpha_or, digits),
            to_decimal_str(r.alpha_xor, digits),
        ]
        if args.show_transmissions:
            line += [_frac(r.t0_or), _frac(r.t1_or), _frac(r.t0_xor), _frac(r.t1_xor)]
        body.append(line)
    if args.format == "markdown":
        sys.stdout.write(f"Contrast of the averaged {scheme} scheme\n\n")
    sys.stdout.write(_render(headers, body, args.format))
    return 0


def cmd_corrigendum(args) -> int:
    report = corrigendum_report()
    if args.format == "json":
        out = [
            {
                "scheme": {"k": r.scheme.k, "n": r.scheme.n},
                "t": r.t,
                "claimed_or": r.claimed_or.to_json(),
                "claimed_xor": r.claimed_xor.to_json(),
                "corrected_or": r.corrected_or.to_json(),
                "corrected_xor": r.corrected_xor.to_json(),
                "or_match": r.or_match,
                "xor_match": r.xor_match,
            }
            for r in report
        ]
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
        return 0
    headers = ["scheme", "t", "claimed_or", "claimed_xor", "corrected_or", "corrected_xor", "or_match", "xor_match"]
    flag = (lambda b: "true" if b else "false") if args.format == "csv" else (lambda b: "yes" if b else "NO")
    body = [
        [
            str(r.scheme),
            str(r.t),
            _frac(r.claimed_or),
            _frac(r.claimed_xor),
            _frac(r.corrected_or),
            _frac(r.corrected_xor),
            flag(r.or_match),
            flag(r.xor_match),
        ]
        for r in report
    ]
    sys.stdout.write(_render(headers, body, args.format))
    if args.format == "markdown":
        bad = sum(1 for r in report if not (r.or_match and r.xor_match))
        sys.stdout.write(f"\n{bad} of {len(report)} rows have at least one mismatch.\n")
    return 0


def _read(path: str):
    try:
        return read_pbm(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_encode(args) -> int:
    scheme = _scheme(args.k, args.n)
    try:
        policy = EncodingPolicy.parse(args.policy, scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    secret = _read(args.secret)
    shares = encode_image(secret, policy, args.seed)
    stem = args.stem or Path(args.secret).stem
    try:
        manifest = shares.save(args.out, stem, binary=not args.ascii)
    except OSError as exc:
        raise UsageError(f"cannot write shares to {args.out}: {exc.strerror or exc}") from None
    print(f"wrote {scheme.n} shares and {manifest}")
    return 0


def cmd_decode(args) -> int:
    shares = [_read(p) for p in args.shares]
    try:
        recon = reconstruct(shares, args.op)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        write_pbm(recon, args.out, binary=not args.ascii)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    print(f"stacked {len(shares)} shares with {args.op.upper()} into {args.out}")
    if args.secret:
        secret = _read(args.secret)
        if secret.shape != recon.shape:
            raise UsageError(f"secret is {secret.width}x{secret.height}, shares are {recon.width}x{recon.height}")
        measured = {}
        for region, name in ((0, "white"), (1, "black")):
            if (secret.pixels == region).any():
                frac = measure_transmission(recon, secret, region)
                measured[region] = frac
                print(f"region {region} ({name}): white fraction {float(frac):.6f} ({frac.numerator}/{frac.denominator})")
        if len(measured) == 2:
            t0, t1 = float(measured[0]), float(measured[1])
            print(f"measured contrast {(t0 - t1) / (1 + t1):.6f}")
    return 0


def cmd_verify(args) -> int:
    scheme = _scheme(args.k, args.n)
    try:
        policy = EncodingPolicy.parse(args.policy, scheme)
        report = verify_scheme(scheme, trials=args.trials, seed=args.seed, policy=policy, sigma=args.sigma)
    except EnumerationCapError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    else:
        print(f"verify {scheme} policy={policy} trials={args.trials} seed={args.seed}")
        for c in report.checks:
            status = "ok  " if c.passed else "FAIL"
            print(
                f"{status} t={c.spec.t} {c.spec.op.value:<3} s={c.spec.s}  "
                f"closed={c.closed_form}  enum={c.enumerated}  "
                f"mc={c.mc.estimate:.6f}±{c.mc.stderr:.6f} ({c.mc.deviation(c.closed_form):.2f}σ)"
            )
        for (t, op), a in sorted(report.contrasts.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
            if t >= scheme.k:
                print(f"contrast t={t} {op.value:<3} {a}")
        print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgvss", description="Random-grid (k,n) visual secret sharing with OR/XOR decryption.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contrast-table", help="exact contrast for t = k..n")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--show-transmissions", action="store_true", help="also print T(s=0), T(s=1) per op")
    p.add_argument("--digits", type=int, default=6, help="significant digits of decimal columns")
    p.set_defaults(func=cmd_contrast_table)

    p = sub.add_parser("corrigendum", help="published vs recomputed contrast values")
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.set_defaults(func=cmd_corrigendum)

    p = sub.add_parser("encode", help="split a PBM secret into n shares")
    p.add_argument("--secret", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--policy", default="averaged", help="'averaged' or 'fixed:<j>'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--stem", help="share file stem (default: secret file stem)")
    p.add_argument("--ascii", action="store_true", help="write P1 instead of P4")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="stack shares with OR or XOR")
    p.add_argument("--op", choices=("or", "xor"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--secret", help="original secret; prints measured white fractions per region")
    p.add_argument("--ascii", action="store_true", help="write P1 instead of P4")
    p.add_argument("shares", nargs="+")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="closed form vs enumeration vs Monte Carlo")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", default="averaged")
    p.add_argument("--sigma", type=float, default=5.0, help="Monte Carlo tolerance in standard errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rgvss: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
