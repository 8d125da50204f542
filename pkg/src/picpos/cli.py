"""Command-line front end.

    picpos check --e 4 --r 17 --d 11 --mults 3x13,1x4 --properties ample
    picpos check request.json --pretty --expect ample=Negative
    picpos sweep --e 5 --r 31 --m 5 --k 5 --d 30:40 --positive-genus yes
    picpos standardize --e 3 --r 10 --d 8 --mults 3x3,2x7
    picpos orbit-search --e 4 --r 18 --d 10 --mults 3x3,2x15
    picpos oracle enumerate --e 2 --r 7 --d 5 --m 1 --k 1

Reports are JSON on stdout with a top-level ``"schema": 1``.  The exit status
is 0 whenever evaluation succeeded, whatever the verdicts; 2 on bad input;
1 when an ``--expect`` assertion fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .criteria import (
    PreconditionError,
    Property,
    Status,
    Verdict,
    certify_effective,
    check_ample,
    check_ample_uniform,
    check_globally_generated,
    check_k_very_ample,
    check_nef,
)
from .cremona import orbit_search_standard, reduce_to_standard_e3
from .lattice import BlowupContext, DivisorClass, Flag, adjoint_class
from .oracle import EnumerationTooLarge, enumerate_obstructions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA = 1
DEFAULT_GRID_CAP = 100_000
PROPERTY_NAMES = {
    "effective": Property.EFFECTIVE,
    "nef": Property.NEF,
    "ample": Property.AMPLE,
    "globally_generated": Property.GLOBALLY_GENERATED,
    "k_very_ample": Property.K_VERY_AMPLE,
}
ALL_PROPERTIES = tuple(PROPERTY_NAMES)


class InputError(ValueError):
    """Malformed request; the message names the offending field or line."""


# ---------------------------------------------------------------- parsing


def load_document(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(f"{path}: cannot read ({err.strerror})") from None
    if path.suffix.lower() == ".toml":
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as err:
            raise InputError(f"{path}: {err}") from None
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise InputError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return doc


def _int(doc: dict, key: str, required: bool = True, default=None):
    if key not in doc or doc[key] is None:
        if required:
            raise InputError(f"field '{key}': required")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, str) and v.strip().lstrip("-").isdigit():
            return int(v)
        raise InputError(f"field '{key}': expected an integer, got {v!r}")
    return v


def parse_mults(value) -> tuple[int, ...]:
    """``[3, 3, 2]``, ``"3,3,2"`` or run-length ``"3x13,1x4"``."""
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, str):
        items = [s.strip() for s in value.split(",") if s.strip()]
    else:
        raise InputError(f"field 'mults': expected a list or string, got {value!r}")
    out: list[int] = []
    for item in items:
        try:
            if isinstance(item, str) and "x" in item:
                m, count = item.split("x")
                out.extend([int(m)] * int(count))
            elif isinstance(item, bool):
                raise ValueError
            else:
                out.append(int(item))
        except ValueError:
            raise InputError(f"field 'mults': bad entry {item!r}") from None
    return tuple(out)


def _flag(doc: dict, *keys: str) -> Flag:
    for key in keys:
        if key in doc:
            try:
                return Flag.parse(doc[key])
            except ValueError as err:
                raise InputError(f"field '{key}': {err}") from None
    return Flag.UNKNOWN


def parse_context(doc: dict) -> BlowupContext:
    try:
        return BlowupContext(
            _int(doc, "e"),
            _int(doc, "r"),
            has_e_collinear=_flag(doc, "has_e_collinear", "collinear"),
            positive_genus=_flag(doc, "positive_genus"),
        )
    except (ValueError, TypeError) as err:
        if isinstance(err, InputError):
            raise
        raise InputError(f"context: {err}") from None


def parse_bundle(doc: dict, r: int) -> DivisorClass:
    d = _int(doc, "d")
    if "mults" in doc and doc["mults"] is not None:
        mults = parse_mults(doc["mults"])
        if len(mults) != r:
            raise InputError(f"field 'mults': {len(mults)} entries, expected r={r}")
        return DivisorClass(d, mults)
    if "m" in doc and doc["m"] is not None:
        return DivisorClass.uniform(d, _int(doc, "m"), r)
    raise InputError("field 'm' or 'mults': one is required")


@dataclass
class CheckRequest:
    ctx: BlowupContext
    bundle: DivisorClass
    properties: tuple[str, ...]
    k: int | None = None
    oracle: dict[str, int] | None = None

    @classmethod
    def from_doc(cls, doc: dict) -> "CheckRequest":
        ctx = parse_context(doc)
        bundle = parse_bundle(doc, ctx.r)
        k = _int(doc, "k", required=False)
        if k is not None and k < 0:
            raise InputError(f"field 'k': must be nonnegative, got {k}")
        props = doc.get("properties")
        if props is None:
            props = [p for p in ALL_PROPERTIES if p != "k_very_ample" or k is not None]
        if isinstance(props, str):
            props = [p.strip() for p in props.split(",") if p.strip()]
        if not isinstance(props, list):
            raise InputError("field 'properties': expected a list")
        for p in props:
            if p not in PROPERTY_NAMES:
                raise InputError(f"field 'properties': unknown property {p!r}")
        if ("k_very_ample" in props) != (k is not None):
            raise InputError("field 'k': required exactly when k_very_ample is requested")
        oracle = doc.get("oracle")
        if oracle is not None:
            if not isinstance(oracle, dict):
                raise InputError("field 'oracle': expected an object with f_max/n_max")
            oracle = {key: _int(oracle, key, required=False) for key in ("f_max", "n_max")}
        return cls(ctx, bundle, tuple(dict.fromkeys(props)), k, oracle)

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "e": self.ctx.e,
            "r": self.ctx.r,
            "d": self.bundle.d,
            "mults": list(self.bundle.mults),
            "has_e_collinear": self.ctx.has_e_collinear.value,
            "positive_genus": self.ctx.positive_genus.value,
            "properties": list(self.properties),
        }
        if self.k is not None:
            doc["k"] = self.k
        if self.oracle is not None:
            doc["oracle"] = dict(self.oracle)
        return doc


# ---------------------------------------------------------------- evaluation


def _not_applicable(prop: Property, err: Exception, k: int | None = None) -> Verdict:
    return Verdict(Status.UNKNOWN, prop, "not-applicable", k=k, failed=(str(err),))


def evaluate(ctx: BlowupContext, L: DivisorClass, properties: Sequence[str], k: int | None) -> list[Verdict]:
    out = []
    for name in properties:
        prop = PROPERTY_NAMES[name]
        try:
            if name == "effective":
                v = certify_effective(L, ctx)
            elif name == "nef":
                v = check_nef(L, ctx)
            elif name == "ample":
                m = L.uniform_mult
                v = check_ample_uniform(L, ctx) if m is not None and m >= 0 else check_ample(L, ctx)
            elif name == "globally_generated":
                v = check_globally_generated(L, ctx)
            else:
                v = check_k_very_ample(L, ctx, k)
        except PreconditionError as err:
            v = _not_applicable(prop, err, k if name == "k_very_ample" else None)
        out.append(v)
    return out


def _context_json(ctx: BlowupContext) -> dict[str, Any]:
    return {
        "e": ctx.e,
        "r": ctx.r,
        "has_e_collinear": ctx.has_e_collinear.value,
        "positive_genus": ctx.positive_genus.value,
    }


def _bundle_json(L: DivisorClass) -> dict[str, Any]:
    out = L.to_json()
    out["text"] = str(L)
    return out


def run_check(request: CheckRequest) -> dict[str, Any]:
    ctx, L = request.ctx, request.bundle
    verdicts = evaluate(ctx, L, request.properties, request.k)
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "command": "check",
        "request": request.to_doc(),
        "context": _context_json(ctx),
        "bundle": _bundle_json(L),
        "verdicts": [v.to_json() for v in verdicts],
    }
    if request.oracle is not None:
        k = request.k if request.k is not None else 0
        report["oracle"] = _oracle_json(adjoint_class(L, ctx), k, ctx, **request.oracle)
    return report


def _oracle_json(N: DivisorClass, k: int, ctx: BlowupContext, f_max=None, n_max=None) -> dict[str, Any]:
    cands = enumerate_obstructions(N, k, ctx, f_max=f_max, n_max=n_max)
    return {
        "N": _bundle_json(N),
        "k": k,
        "f_max": 2 * ctx.e if f_max is None else f_max,
        "n_max": ctx.r if n_max is None else n_max,
        "candidates": [c.to_json() for c in cands],
        "count": sum(c.orbit_size for c in cands),
        "any_n_at_least_r": any(c.n_at_least_r for c in cands),
        "any_D.C1_nonneg": any(c.meets_c1_nonneg for c in cands),
    }


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int
    step: int = 1

    def __post_init__(self):
        if self.step <= 0:
            raise InputError(f"range step must be positive, got {self.step}")

    def values(self) -> range:
        return range(self.lo, self.hi + 1, self.step)

    @classmethod
    def parse(cls, value, name: str) -> "IntRange":
        try:
            if isinstance(value, bool):
                raise ValueError
            if isinstance(value, int):
                return cls(value, value)
            if isinstance(value, str):
                parts = [int(p) for p in value.split(":")]
                if len(parts) == 1:
                    return cls(parts[0], parts[0])
                return cls(*parts)
            if isinstance(value, list):
                return cls(*[int(p) for p in value])
            if isinstance(value, dict):
                return cls(int(value["lo"]), int(value["hi"]), int(value.get("step", 1)))
        except (ValueError, TypeError, KeyError):
            pass
        raise InputError(f"field '{name}': expected lo:hi[:step], got {value!r}")


SWEEP_AXES = ("d", "m", "r", "e", "k")
SWEEP_PROPERTIES = ("effective", "nef", "ample", "globally_generated", "k_very_ample")


@dataclass
class SweepRequest:
    ranges: dict[str, IntRange | None]
    has_e_collinear: Flag = Flag.UNKNOWN
    positive_genus: Flag = Flag.UNKNOWN
    fmt: str = "csv"

    @classmethod
    def from_doc(cls, doc: dict) -> "SweepRequest":
        ranges: dict[str, IntRange | None] = {}
        for axis in SWEEP_AXES:
            if doc.get(axis) is None:
                if axis != "k":
                    raise InputError(f"field '{axis}': required")
                ranges[axis] = None
            else:
                ranges[axis] = IntRange.parse(doc[axis], axis)
        fmt = doc.get("format", "csv")
        if fmt not in ("csv", "jsonl"):
            raise InputError(f"field 'format': expected csv or jsonl, got {fmt!r}")
        return cls(ranges, _flag(doc, "has_e_collinear", "collinear"), _flag(doc, "positive_genus"), fmt)

    def grid(self) -> list[tuple[int, int, int, int, int | None]]:
        axes = [self.ranges[a].values() if self.ranges[a] is not None else [None] for a in SWEEP_AXES]
        return list(itertools.product(*axes))

    def size(self) -> int:
        n = 1
        for a in SWEEP_AXES:
            if self.ranges[a] is not None:
                n *= len(self.ranges[a].values())
        return n

    @property
    def columns(self) -> list[str]:
        props = [p for p in SWEEP_PROPERTIES if p != "k_very_ample" or self.ranges["k"] is not None]
        return list(SWEEP_AXES) + props


def _sweep_row(args) -> dict[str, Any]:
    point, collinear, genus, props = args
    d, m, r, e, k = point
    row: dict[str, Any] = dict(zip(SWEEP_AXES, point))
    try:
        ctx = BlowupContext(e, r, has_e_collinear=collinear, positive_genus=genus)
    except ValueError as err:
        for p in props:
            row[p] = "Invalid"
        row["error"] = str(err)
        return row
    L = DivisorClass.uniform(d, m, r)
    for p, v in zip(props, evaluate(ctx, L, props, k)):
        row[p] = v.status.value
    return row


def grid_cap() -> int:
    raw = os.environ.get("PICPOS_GRID_CAP")
    if raw is None:
        return DEFAULT_GRID_CAP
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PICPOS_GRID_CAP: expected an integer, got {raw!r}") from None


class GridTooLarge(InputError):
    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(f"sweep grid has {required} points, cap is {cap} (set PICPOS_GRID_CAP)")


def run_sweep(request: SweepRequest, workers: int = 1, cap: int | None = None) -> str:
    cap = grid_cap() if cap is None else cap
    size = request.size()
    if size > cap:
        raise GridTooLarge(size, cap)
    props = [c for c in request.columns if c in SWEEP_PROPERTIES]
    jobs = [(p, request.has_e_collinear, request.positive_genus, props) for p in request.grid()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_sweep_row(j) for j in jobs]

    buf = io.StringIO()
    if request.fmt == "jsonl":
        for row in rows:
            buf.write(json.dumps(row, sort_keys=False) + "\n")
    else:
        writer = csv.DictWriter(buf, fieldnames=request.columns + ["error"], extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- command line


def _add_common(p: argparse.ArgumentParser, bundle: bool = True) -> None:
    p.add_argument("file", nargs="?", help="JSON or TOML request; flags override its fields")
    p.add_argument("--e", type=int)
    p.add_argument("--r", type=int)
    if bundle:
        p.add_argument("--d", type=int)
        p.add_argument("--m", type=int, help="uniform multiplicity")
        p.add_argument("--mults", help="comma list, runs allowed: 3x13,1x4")
    p.add_argument("--collinear", choices=[f.value for f in Flag], dest="has_e_collinear")
    p.add_argument("--positive-genus", choices=[f.value for f in Flag], dest="positive_genus")
    p.add_argument("--pretty", action="store_true", help="human-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="picpos", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate positivity properties")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--properties", help=f"comma list from {','.join(ALL_PROPERTIES)}")
    p.add_argument("--f-max", type=int, dest="f_max", help="also run the obstruction oracle")
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--expect", action="append", default=[], metavar="PROPERTY=STATUS",
                   help="assert a verdict; exit 1 on mismatch")

    p = sub.add_parser("certify-effective", help="effectivity certificate")
    _add_common(p)

    p = sub.add_parser("standardize", help="e = 3 Cremona reduction")
    _add_common(p)

    p = sub.add_parser("orbit-search", help="search the Cremona orbit for a standard form")
    _add_common(p)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--degree-cap", type=int, dest="degree_cap")

    p = sub.add_parser("oracle", help="brute-force oracles")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    q = osub.add_parser("enumerate", help="enumerate BFS obstruction candidates for N = L - K")
    _add_common(q)
    q.add_argument("--k", type=int)
    q.add_argument("--f-max", type=int, dest="f_max")
    q.add_argument("--n-max", type=int, dest="n_max")
    q.add_argument("--as-adjoint", action="store_true", help="treat the given class as N itself")

    p = sub.add_parser("sweep", help="batch grid over d, m, r, e, k (uniform classes)")
    p.add_argument("file", nargs="?")
    for axis in SWEEP_AXES:
        p.add_argument(f"--{axis}", help="value or lo:hi[:step]")
    p.add_argument("--collinear", choices=[f.value for f in Flag], dest="has_e_collinear")
    p.add_argument("--positive-genus", choices=[f.value for f in Flag], dest="positive_genus")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--workers", type=int, default=1)
    return ap


def _merge(args: argparse.Namespace, keys: Sequence[str]) -> dict[str, Any]:
    doc = load_document(args.file) if getattr(args, "file", None) else {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if getattr(args, "mults", None) is not None:
        doc.pop("m", None)
    elif getattr(args, "m", None) is not None:
        doc.pop("mults", None)
    return doc


_BUNDLE_KEYS = ("e", "r", "d", "m", "mults", "has_e_collinear", "positive_genus")


def _emit(payload: dict[str, Any], pretty: bool, out) -> None:
    if pretty:
        out.write(render_pretty(payload))
    else:
        out.write(json.dumps(payload, indent=2) + "\n")


def render_pretty(report: dict[str, Any]) -> str:
    lines = []
    if "bundle" in report:
        ctx = report["context"]
        lines.append(f"L = {report['bundle']['text']}   (e={ctx['e']}, r={ctx['r']}, "
                     f"collinear={ctx['has_e_collinear']}, positive_genus={ctx['positive_genus']})")
    for v in report.get("verdicts", []):
        prop = v["property"] + (f"(k={v['k']})" if "k" in v else "")
        lines.append(f"{prop:<20} {v['status']:<9} {v['justification']}")
        for q in v["details"]:
            lines.append(f"    {q['text']}")
        for note in v.get("annotations", []):
            lines.append(f"    note: {note}")
        if "certificate" in v and "terms" in v["certificate"]:
            terms = " + ".join(f"{t['coefficient']}*({t['text']})" for t in v["certificate"]["terms"])
            lines.append(f"    certificate: {terms}")
    for key in ("trace", "search"):
        if key in report:
            lines.append(f"{key}: {json.dumps(report[key])}")
    if "oracle" in report:
        o = report["oracle"]
        lines.append(f"oracle: {len(o['candidates'])} candidate(s) up to relabelling, "
                     f"{o['count']} in total; n >= r: {o['any_n_at_least_r']}; "
                     f"D.C1 >= 0: {o['any_D.C1_nonneg']}")
    return "\n".join(lines) + "\n"


def _check_expectations(report: dict[str, Any], expects: Sequence[str]) -> list[str]:
    by_name = {}
    for v in report["verdicts"]:
        for name, prop in PROPERTY_NAMES.items():
            if prop.value == v["property"]:
                by_name[name] = v["status"]
    failures = []
    for item in expects:
        if "=" not in item:
            raise InputError(f"--expect: expected PROPERTY=STATUS, got {item!r}")
        name, want = (s.strip() for s in item.split("=", 1))
        if name not in PROPERTY_NAMES:
            raise InputError(f"--expect: unknown property {name!r}")
        got = by_name.get(name)
        if got is None:
            failures.append(f"{name}: not evaluated")
        elif got.lower() != want.lower():
            failures.append(f"{name}: expected {want}, got {got}")
    return failures


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args, out)
    except (InputError, EnumerationTooLarge) as err:
        print(f"picpos: error: {err}", file=sys.stderr)
        return 2
    except PreconditionError as err:
        print(f"picpos: precondition: {err}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace, out) -> int:
    cmd = args.command
    if cmd == "sweep":
        doc = _merge(args, SWEEP_AXES + ("has_e_collinear", "positive_genus", "format"))
        request = SweepRequest.from_doc(doc)
        out.write(run_sweep(request, workers=max(1, args.workers)))
        return 0

    if cmd == "check":
        doc = _merge(args, _BUNDLE_KEYS + ("k", "properties"))
        if args.f_max is not None or args.n_max is not None:
            oracle = dict(doc.get("oracle") or {})
            for key in ("f_max", "n_max"):
                if getattr(args, key) is not None:
                    oracle[key] = getattr(args, key)
            doc["oracle"] = oracle
        request = CheckRequest.from_doc(doc)
        report = run_check(request)
        _emit(report, args.pretty, out)
        failures = _check_expectations(report, args.expect)
        for f in failures:
            print(f"picpos: expectation failed: {f}", file=sys.stderr)
        return 1 if failures else 0

    doc = _merge(args, _BUNDLE_KEYS + ("k", "f_max", "n_max"))
    ctx = parse_context(doc)
    L = parse_bundle(doc, ctx.r)
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "command": cmd if cmd != "oracle" else "oracle enumerate",
        "context": _context_json(ctx),
        "bundle": _bundle_json(L),
    }
    if cmd == "certify-effective":
        report["verdicts"] = [certify_effective(L, ctx).to_json()]
    elif cmd == "standardize":
        report["trace"] = reduce_to_standard_e3(L, ctx).to_json()
    elif cmd == "orbit-search":
        report["search"] = orbit_search_standard(L, ctx, args.depth, args.degree_cap).to_json()
    else:
        k = _int(doc, "k", required=False, default=0)
        N = L if args.as_adjoint else adjoint_class(L, ctx)
        report["oracle"] = _oracle_json(N, k, ctx, _int(doc, "f_max", False), _int(doc, "n_max", False))
    _emit(report, args.pretty, out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
