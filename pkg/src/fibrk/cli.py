"""Command-line interface: ``fibrk <subcommand> ...``.

Exit codes: 0 success (an indeterminate verdict is a success), 2 schema
error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional

from . import gallery
from .algebra import EPS, SparsePoly, format_scalar
from .degenerations import (
    DEFAULT_TRUNCATION,
    build_test_config,
    entropy_series,
    fano_fiber_type_obstruction,
    fano_leading,
    i_j_series,
    lc_obstruction,
    load_catalog,
)
from .errors import FibrkError, SchemaError
from .functionals import functional_report, m_na
from .intersection import TestConfigDatum, datum_diagnostics, load_datum
from .winvariants import (
    decompose,
    parse_assumptions,
    verdict,
    w_k_via_fano_identity,
    zero_substitution,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_COMPUTE = 3


def approx(p: SparsePoly) -> str:
    """Decimal rendering for reading only; never compared."""
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.sorted_terms():
        vars_ = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
        num = f"{float(c):.6g}"
        parts.append(f"{num}*{vars_}" if vars_ else num)
    return " + ".join(parts).replace("+ -", "- ")


def _truncation(args) -> int:
    if getattr(args, "truncation", None) is not None:
        return args.truncation
    env = os.environ.get("FIBRK_TRUNCATION")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise SchemaError(f"FIBRK_TRUNCATION must be an integer, got {env!r}", "/truncation") from None
        if value < 0:
            raise SchemaError("FIBRK_TRUNCATION must be nonnegative", "/truncation")
        return value
    return DEFAULT_TRUNCATION


def _read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", "/") from None
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"invalid JSON: {exc}", "/") from None


def _assume(args):
    try:
        return parse_assumptions(args.assume or [])
    except ValueError as exc:
        raise SchemaError(str(exc), "/assume") from None


# ---------------------------------------------------------------- reports


def functionals_payload(datum: TestConfigDatum, args) -> dict:
    report = functional_report(datum, check=args.check)
    out = {"datum": datum.name, **report.to_json(check=args.check)}
    if args.approx:
        out["approx"] = {k: (None if v is None else approx(v)) for k, v in report.values().items()}
    return out


def wtable_payload(datum: TestConfigDatum, args, assume) -> dict:
    w = decompose(datum, df=getattr(args, "df", False))
    v = verdict(w, assume, declared_trivial=datum.declared_trivial)
    out = {"datum": datum.name, "df_path": bool(getattr(args, "df", False)), **w.to_json(), "verdict": v.to_json()}
    zeros = zero_substitution(assume)
    if zeros:
        out["w_under_assumptions"] = [str(x.subs(zeros)) for x in w.w]
    if args.approx:
        out["approx"] = [approx(x) for x in w.w]
    return out


def verdict_payload(datum: TestConfigDatum, args, assume) -> dict:
    w = decompose(datum)
    v = verdict(w, assume, declared_trivial=datum.declared_trivial)
    return {"datum": datum.name, "assumptions": [f"{k}{v_}" for k, v_ in sorted(assume.items())], "verdict": v.to_json()}


def cone_payload(name, cone, raw, args) -> dict:
    i, j = i_j_series(cone)
    order, coeff = fano_leading(cone)
    out = {
        "name": name,
        "N": cone.N,
        "n": cone.n,
        "r": cone.r,
        "truncation": cone.truncation,
        "i_na": str(i),
        "j_na": str(j),
        "entropy": str(entropy_series(cone)),
        "fano_leading": {"order": order, "coefficient": format_scalar(coeff)},
    }
    level = args.level if getattr(args, "level", None) is not None else raw.get("level")
    if level is not None or not cone.components:
        out["lc_obstruction"] = lc_obstruction(cone, level).to_json()
    else:
        out["lc_obstruction"] = {"kind": "NotRun", "summary": "pass --level to choose the first nontrivial cut level"}
    lam = getattr(args, "lam", None)
    if lam is None and "lambda" in raw:
        lam = raw["lambda"]
    if lam is not None:
        lam = Fraction(str(lam))
        if all(c.A == 0 for c in cone.components):
            out["fano_obstruction"] = fano_fiber_type_obstruction(cone, None, lam).to_json()
        else:
            out["fano_obstruction"] = {"kind": "NotRun", "summary": "some discrepancy is nonzero"}
    return out


def example_payload(name: str, args) -> dict:
    raw = gallery.get(name)
    if name in gallery.CONES:
        (entry,) = load_catalog(raw, truncation=args.truncation)
        return {"example": name, **cone_payload(*entry, args)}
    datum = load_datum(raw)
    assume = parse_assumptions(list(gallery.ASSUMPTIONS.get(name, [])) + list(args.assume or []))
    args.check = True
    out = {
        "example": name,
        "description": raw.get("description", ""),
        "functionals": functionals_payload(datum, args),
        "wtable": wtable_payload(datum, args, {}),
        "assumptions": [f"{k}{v}" for k, v in sorted(assume.items())],
        "verdict": verdict(decompose(datum), assume, declared_trivial=datum.declared_trivial).to_json(),
    }
    zeros = zero_substitution(assume)
    if zeros:
        out["w_under_assumptions"] = [str(x.subs(zeros)) for x in decompose(datum).w]
    if name == "lcbase":
        w2 = w_k_via_fano_identity(datum, 2, 1)
        out["fano_identity_w2"] = {"value": str(w2), "under_assumptions": str(w2.subs(zeros))}
    if name == "p1-point":
        m = m_na(datum)
        scan = []
        for k in range(1, 10):
            e = Fraction(k, 10)
            val = m.subs({EPS: e}).constant_value()
            scan.append({"eps": format_scalar(e), "m_na": format_scalar(val), "positive": val > 0})
        out["slope_scan"] = scan
        out["slope_summary"] = "M = eps - eps^2 > 0 for 0 < eps < 1"
    return out


# ---------------------------------------------------------------- text


_MACHINE_KEYS = {"values", "w", "remainder"}


def _human(obj):
    """Drop the machine-readable polynomial arrays; their display strings remain."""
    if isinstance(obj, dict):
        return {k: _human(v) for k, v in obj.items() if k not in _MACHINE_KEYS}
    if isinstance(obj, list):
        return [_human(v) for v in obj]
    return obj


def _text(obj, indent: int = 0) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(obj, dict):
        width = max((len(str(k)) for k in obj), default=0)
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{str(k).ljust(width)}  {_scalar_text(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}[{i}]")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}[{i}] {_scalar_text(v)}")
    else:
        lines.append(pad + _scalar_text(obj))
    return lines


def _scalar_text(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return "(none)"
    return str(v)


def wtable_text(payload: dict) -> str:
    rows = [("level", "value")] + [(f"W_{k}", w) for k, w in enumerate(payload["w_display"])]
    rows.append((f"W_{payload['n'] + 1}(j)", f"({payload['remainder_display']['num']}) / ({payload['remainder_display']['den']})"))
    width = max(len(r[0]) for r in rows)
    lines = [f"{a.ljust(width)}  {b}" for a, b in rows]
    v = payload["verdict"]
    lines.append("")
    lines.append(f"verdict: {v['label']}")
    lines.append(f"  {v['summary']}")
    for line in v["epsilon_analysis"]:
        lines.append(f"  {line}")
    return "\n".join(lines)


def emit(payload, fmt: str, out, *, kind: str = "") -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        return
    if kind == "wtable":
        out.write(wtable_text(payload) + "\n")
        return
    out.write("\n".join(_text(_human(payload))) + "\n")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibrk",
        description="Exact non-Archimedean functionals, W-levels and f-stability verdicts from intersection data.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--approx", action="store_true", help="add decimal renderings (display only)")
    common.add_argument("--assume", action="append", metavar="SIGN",
                        help="parameter sign hypothesis such as 't>0', 'u<0' or 'u=0' (repeatable)")
    common.add_argument("--truncation", type=int, default=None,
                        help="eps truncation order for normal-cone data (default: $FIBRK_TRUNCATION or 4)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("functionals", parents=[common], help="E, I, J, H, R, M and DF of a datum")
    p.add_argument("file")
    p.add_argument("--check", action="store_true", help="evaluate exact identities")

    p = sub.add_parser("wtable", parents=[common], help="levels W_0..W_n and remainder")
    p.add_argument("file")
    p.add_argument("--df", action="store_true", help="expand the Donaldson-Futaki invariant instead of M")

    p = sub.add_parser("verdict", parents=[common], help="lexicographic f-stability verdict")
    p.add_argument("file")

    p = sub.add_parser("degenerate", parents=[common], help="normal-cone catalog: series and obstructions")
    p.add_argument("file")
    p.add_argument("--level", type=int, default=None, help="first nontrivial cut level for the lc obstruction")
    p.add_argument("--lambda", dest="lam", default=None, help="Fano constant: -(K + Delta) = lambda H relatively")

    p = sub.add_parser("examples", parents=[common], help="run a bundled example")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true", help="list bundled examples")

    p = sub.add_parser("validate", parents=[common], help="schema diagnostics for a datum or catalog")
    p.add_argument("file")
    return parser


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args, out)
    except SchemaError as exc:
        _report_error(err, args, "schema", exc.detail, exc.pointer)
        return EXIT_SCHEMA
    except FibrkError as exc:
        _report_error(err, args, type(exc).__name__, str(exc), None)
        return EXIT_COMPUTE


def _report_error(err, args, kind, message, pointer) -> None:
    if args.format == "json":
        payload = {"error": kind, "message": message}
        if pointer is not None:
            payload["pointer"] = pointer
        err.write(json.dumps(payload, sort_keys=True) + "\n")
    elif pointer is not None:
        err.write(f"error: {pointer}: {message}\n")
    else:
        err.write(f"error: {kind}: {message}\n")


def _dispatch(args, out) -> int:
    cmd = args.command
    if args.truncation is not None and args.truncation < 0:
        raise SchemaError("truncation must be nonnegative", "/truncation")
    if cmd == "examples":
        if args.list or not args.name:
            if args.format == "json":
                emit({"examples": gallery.names()}, "json", out)
            else:
                for nm in gallery.names():
                    desc = gallery.get(nm).get("description", "normal-cone catalog entry")
                    out.write(f"{nm.ljust(10)}  {desc}\n")
            return EXIT_OK
        try:
            gallery.get(args.name)
        except KeyError as exc:
            raise SchemaError(exc.args[0], "/name") from None
        emit(example_payload(args.name, args), args.format, out)
        return EXIT_OK

    obj = _read_json(args.file)
    if cmd == "validate":
        diags = _diagnostics(obj, args)
        payload = {"valid": not diags, "diagnostics": [{"pointer": p, "message": m} for p, m in diags]}
        emit(payload, args.format, out)
        return EXIT_OK if not diags else EXIT_SCHEMA
    if cmd == "degenerate":
        trunc = _truncation(args)
        entries = load_catalog(obj, truncation=trunc)
        payload = [cone_payload(name, cone, raw, args) for name, cone, raw in entries]
        emit(payload[0] if not isinstance(obj, list) else payload, args.format, out)
        return EXIT_OK

    datum = load_datum(obj)
    assume = _assume(args)
    if cmd == "functionals":
        emit(functionals_payload(datum, args), args.format, out)
    elif cmd == "wtable":
        emit(wtable_payload(datum, args, assume), args.format, out, kind="wtable")
    elif cmd == "verdict":
        emit(verdict_payload(datum, args, assume), args.format, out)
    return EXIT_OK


def _is_catalog(obj) -> bool:
    if isinstance(obj, list):
        return True
    return isinstance(obj, dict) and "N" in obj


def _diagnostics(obj, args):
    if _is_catalog(obj):
        try:
            load_catalog(obj, truncation=args.truncation)
        except SchemaError as exc:
            return [(exc.pointer, exc.detail)]
        except ValueError as exc:
            return [("/", str(exc))]
        return []
    return datum_diagnostics(obj)


def main(argv: Optional[List[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
