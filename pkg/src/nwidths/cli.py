"""Command-line front end: nwidths {compute,witness,verify,mc,table}."""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import sys
from pathlib import Path

from .numerics import SearchConfig
from .recovery import sphere_mc_lower_bound
from .spaces import Instance
from .verify import run_suite
from .widths import (ALL_LINEAR, WidthKind, bounds_to_csv, compute_width,
                     standard_information)
from .witness import build_chain, certify_chain, chain_to_json


class InputError(ValueError):
    pass


def parse_range(text: str) -> list[int]:
    """'3' -> [3]; '0..3' -> [0, 1, 2, 3]; '0,2,5' -> [0, 2, 5]."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise InputError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 0:
        raise InputError(f"bad n range {text!r}")
    return out


def parse_kinds(text: str) -> list[WidthKind]:
    if text.strip().lower() == "all":
        return list(WidthKind)
    return [WidthKind.parse(k) for k in text.split(",")]


def load_instance(path: str) -> Instance:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return Instance.from_json(data, name=p.stem)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _config(args) -> SearchConfig:
    return SearchConfig(restarts=args.restarts, tol=args.tol, seed=args.seed)


def _header(args) -> str:
    if args.deterministic:
        return ""
    return f"# generated {datetime.datetime.now(datetime.timezone.utc).isoformat()}\n"


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _info(args, inst: Instance):
    if args.info == "all":
        return ALL_LINEAR
    return standard_information(inst.body.dim, inst.op.source_norm.dual)


def cmd_compute(args) -> int:
    cfg = _config(args)
    rows, errors = [], []
    for path in args.instance:
        inst = load_instance(path)
        for kind in parse_kinds(args.kind):
            for n in parse_range(args.n):
                try:
                    rows.append((inst.name, compute_width(inst, kind, n, cfg, _info(args, inst))))
                except Exception as exc:  # per-item failure, reported as a row
                    errors.append((inst.name, kind.value, n, f"{type(exc).__name__}: {exc}"))
    if args.format == "json":
        payload = {"rows": [{"instance": name, "kind": b.kind.value, "n": b.n,
                             "lower": b.lower, "upper": b.upper, "exact": b.exact,
                             "certified": b.certified,
                             "wall_ms": 0.0 if args.deterministic else b.wall_ms}
                            for name, b in rows],
                   "errors": [dict(zip(("instance", "kind", "n", "error"), e)) for e in errors]}
        if not args.deterministic:
            payload["generated"] = _header(args)[12:].strip()
        _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        text = bounds_to_csv(rows, args.deterministic)
        if errors:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            for name, kind, n, msg in errors:
                w.writerow([name, kind, n, "nan", "nan", "false", "false", "0"])
                print(f"error: {name} {kind} n={n}: {msg}", file=sys.stderr)
            text += buf.getvalue()
        _emit(args, _header(args) + text)
    return 1 if errors else 0


def cmd_table(args) -> int:
    cfg = _config(args)
    inst = load_instance(args.instance[0])
    kinds = parse_kinds(args.kind)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n"] + [f"{k.value}_{side}" for k in kinds for side in ("lower", "upper")])
    for n in parse_range(args.n):
        row = [n]
        for k in kinds:
            b = compute_width(inst, k, n, cfg, _info(args, inst))
            row += [f"{b.lower:.12g}", f"{b.upper:.12g}"]
        w.writerow(row)
    _emit(args, _header(args) + buf.getvalue())
    return 0


def cmd_witness(args) -> int:
    cfg = _config(args)
    inst = load_instance(args.instance[0])
    n = max(parse_range(args.n))
    chain = build_chain(inst, n, args.variant, args.eps, cfg)
    cert = certify_chain(chain, inst)
    _emit(args, json.dumps(chain_to_json(chain, cert), indent=2, sort_keys=True) + "\n")
    return 0 if cert.valid and cert.det_ok else 1


def cmd_verify(args) -> int:
    if args.suite != "default":
        raise InputError(f"unknown suite {args.suite!r}")
    res = run_suite(cfg=_config(args))
    text = res.to_json() + "\n" if args.format == "json" else res.to_csv()
    _emit(args, ("" if args.format == "json" else _header(args)) + text)
    for r in res.failures:
        print(f"FAILED {r.name} {r.instance} n={r.n}: {r.lhs:.6g} > {r.rhs:.6g}",
              file=sys.stderr)
    print(f"{len(res.reports)} reports, {len(res.families)} families, "
          f"{len(res.failures)} failures", file=sys.stderr)
    return 1 if res.failures else 0


def cmd_mc(args) -> int:
    n = max(parse_range(args.n))
    mc = sphere_mc_lower_bound(n, args.samples, args.seed, rotate=args.rotate)
    _emit(args, json.dumps(mc.to_json(), indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nwidths",
                                 description="Certified bounds on widths of operators on convex bodies.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", action="append", required=True,
                           help="instance JSON file (repeatable)")
        p.add_argument("--n", default="0", help="index or range such as 0..3")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--restarts", type=int, default=64)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--deterministic", action="store_true",
                       help="suppress timestamps and wall-clock columns")

    p = sub.add_parser("compute", help="bounds for chosen widths")
    common(p)
    p.add_argument("--kind", default="gelfand", help="comma list or 'all'")
    p.add_argument("--info", choices=("all", "std"), default="all")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("table", help="width-versus-n table for one instance")
    common(p)
    p.add_argument("--kind", default="all")
    p.add_argument("--info", choices=("all", "std"), default="all")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("witness", help="build and certify a greedy witness chain")
    common(p)
    p.add_argument("--variant", default="general")
    p.add_argument("--eps", type=float, default=1e-3)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="run the inequality suite")
    common(p, instance=False)
    p.add_argument("--suite", default="default")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="sphere Monte Carlo estimate")
    common(p, instance=False)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--rotate", action="store_true")
    p.set_defaults(func=cmd_mc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
