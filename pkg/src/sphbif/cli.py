"""Command-line entry point: ``sphbif {spectrum,reduce,classify,verify,product}``.

Exit codes: 0 success, 1 usage or I/O error, 2 golden mismatch or failed check.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    kernel: str = "onsager"
    taylor: str | None = None
    order: int = 4
    quad_order: int = 32
    fmt: str = "json"
    digits: int = 17
    seed: int = 0


def load_kernel(name: str, taylor: str | None = None):
    from .spectrum import BUILTIN_KERNELS, custom_kernel

    if name != "custom":
        try:
            return BUILTIN_KERNELS[name]
        except KeyError:
            raise UsageError(f"unknown kernel {name!r}") from None
    if not taylor:
        raise UsageError("--kernel custom needs --taylor FILE")
    try:
        data = json.loads(Path(taylor).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read kernel file {taylor}: {exc}") from None
    try:
        coeffs = {int(r): Fraction(str(a)) for r, a in data["coefficients"].items()}
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        raise UsageError(f"bad kernel file {taylor}: {exc}") from None
    return custom_kernel(data.get("name", "custom"), coeffs, data.get("bound"), data.get("normalized", True))


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _round(x: float, digits: int) -> float:
    return float(f"{x:.{digits}g}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args) -> int:
    from .spectrum import spectrum_table

    kernel = load_kernel(args.kernel, args.taylor)
    table = spectrum_table(kernel, args.smax)
    if args.format == "csv":
        _emit(table.to_csv(), args.out)
    else:
        rows = table.rows()
        for r in rows:
            r["mu_float"] = _round(r["mu_float"], args.precision)
            r["lambda_float"] = _round(r["lambda_float"], args.precision)
        _emit(json.dumps({"kernel": table.kernel, "entries": rows}, indent=2), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    from .golden import compare_f
    from .reduction import reduce
    from .spectrum import ONSAGER

    kernel = load_kernel(args.kernel, args.taylor)
    if kernel != ONSAGER:
        raise UsageError("reference data exists only for the onsager kernel")
    red = reduce(kernel, args.order)
    eq = red.complex_eq if args.basis == "complex" else red.real_eq
    cmp = compare_f(red.complex_eq.components, args.order)
    total = len(cmp.matched) + len(cmp.mismatched)
    pct = 100.0 * len(cmp.matched) / total if total else 100.0
    payload = json.loads(eq.to_json())
    payload["config"] = asdict(args.config)
    payload["reduced"] = {"c": str(red.reduced.c), "d": str(red.reduced.d),
                          "c_float": float(red.reduced.c), "d_float": float(red.reduced.d)}
    payload["golden"] = {
        "match_percent": round(pct, 2),
        "summary": cmp.summary(),
        "differences": [str(m) for m in cmp.mismatched],
        "extra_computed": [str(m) for m in cmp.missing],
        "above_order": [{"component": t.component, "monomial": list(t.monomial)} for t in cmp.beyond_order],
    }
    if args.format == "csv":
        lines = ["component,exponents,coeff,coeff_float"]
        for r in eq.rows():
            lines.append(f"{r['component']},{' '.join(map(str, r['exponents']))},\"{r['coeff_str']}\",{r['coeff_float']}")
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(payload, indent=2), args.out)
    print(f"golden match: {pct:.0f}% ({cmp.summary()})", file=sys.stderr)
    if not cmp.ok:
        for m in cmp.mismatched:
            print(f"  {m}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def parse_sweep(text: str) -> list[float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"sweep must be start:stop:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError("sweep needs step > 0 and stop >= start")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 12) for k in range(n + 1)]


def cmd_classify(args) -> int:
    from .classify import classify
    from .reduction import equivariance_residual, reduce

    red = reduce()
    sweep = parse_sweep(args.stability_sweep) if args.stability_sweep else (0.05, 0.1, 0.15)
    report = classify(red.reduced, sweep=sweep, M=args.M, lam_bound=args.lam_bound)
    out = report.to_dict()
    flips = [
        (a.lam, b.lam) for a, b in zip(report.stability, report.stability[1:])
        if a.classification != b.classification
    ]
    out["stability_flips"] = flips
    out["config"] = asdict(args.config)
    status = EXIT_OK
    if args.check_equivariance:
        res = equivariance_residual(red.real_eq, args.trials, args.seed)
        out["equivariance"] = {"trials": args.trials, "seed": args.seed, "max_residual": res}
        if res > 1e-9:
            status = EXIT_MISMATCH
    _emit(json.dumps(out, indent=2), args.out)
    return status


def verify_checks(quad_order: int = 32, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Property suite used by ``verify``; each entry is ``(name, ok, detail)``."""
    from .classify import convexity_threshold, recognition, stability
    from .oracle import SphereGrid, axial_independence_check, gaunt, zonal_eigenvalue
    from .products import default_engine
    from .reduction import equivariance_residual, reduce
    from .spectrum import ONSAGER, decay_check
    from .symmetry import max_I2_on_sphere, representation_checks

    out = []
    err = max(abs(zonal_eigenvalue(ONSAGER, s) - ONSAGER.eigenvalue_float(s)) for s in range(0, 21))
    out.append(("spectrum oracle", err < 1e-8, f"max error {err:.2e}"))
    grid = SphereGrid(quad_order)
    eng = default_engine()
    worst = 0.0
    for la in range(3):
        for ma in range(-la, la + 1):
            for lb in range(3):
                for mb in range(-lb, lb + 1):
                    prod = eng.product((la, ma), (lb, mb))
                    for l in range(la + lb + 1):
                        for m in range(-l, l + 1):
                            g = gaunt((la, ma), (lb, mb), (l, m), grid)
                            worst = max(worst, abs(complex(prod[(l, m)]) - g))
    out.append(("product vs gaunt", worst < 1e-9, f"max error {worst:.2e}"))
    checks = representation_checks(20, seed)
    out.append(("representations", all(c.ok for c in checks), "; ".join(f"{c.name} {c.max_error:.1e}" for c in checks)))
    i2 = max_I2_on_sphere("slice")
    out.append(("max I2", abs(i2 - 2 / (3 * math.sqrt(3))) < 1e-9, f"{i2:.12f}"))
    red = reduce()
    res = equivariance_residual(red.real_eq, 20, seed)
    out.append(("equivariance", res < 1e-9, f"max residual {res:.2e}"))
    rec = recognition(red.reduced)
    out.append(("recognition", rec.verdict, json.dumps(rec.to_dict())))
    lam_star = convexity_threshold(1.0)
    out.append(("convexity threshold", abs(lam_star - 38.205) < 1e-3, f"{lam_star:.6f}"))
    flip = stability(0.0981).classification != stability(0.0982).classification
    out.append(("stability flip", flip, "between 0.0981 and 0.0982"))
    dec = decay_check(100)
    out.append(("eigenvalue decay", dec.ok, f"first violation {dec.first_violation()}"))
    ax = axial_independence_check(lambda t, p: np.exp(np.cos(t) ** 2), ONSAGER, SphereGrid(max(quad_order, 32)))
    out.append(("axial independence", ax.variation <= 1e-10, f"variation {ax.variation:.2e}"))
    return out


def cmd_verify(args) -> int:
    results = verify_checks(args.quad_order, args.seed)
    rows = [{"check": n, "ok": bool(ok), "detail": d} for n, ok, d in results]
    _emit(json.dumps({"checks": rows, "ok": all(r["ok"] for r in rows)}, indent=2), args.out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_MISMATCH


def _parse_index(text: str) -> tuple[int, int]:
    try:
        l, m = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"harmonic index must be l,m, got {text!r}") from None
    if l < 0 or abs(m) > l:
        raise UsageError(f"invalid harmonic index {text!r}")
    return l, m


def cmd_product(args) -> int:
    from .products import default_engine

    a, b = _parse_index(args.a), _parse_index(args.b)
    e = default_engine().product(a, b)
    terms = [{"l": l, "m": m, "coeff": str(v), "coeff_float": float(v)} for (l, m), v in e]
    _emit(json.dumps({"a": list(a), "b": list(b), "terms": terms}, indent=2), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphbif", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--precision", type=int, default=17, help="significant digits for floats")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--quad-order", type=int, default=32)
    kern = argparse.ArgumentParser(add_help=False)
    kern.add_argument("--kernel", choices=("onsager", "maier-saupe", "dipolar", "custom"), default="onsager")
    kern.add_argument("--taylor", help="JSON file {\"coefficients\": {r: a_r}, \"bound\": M}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common, kern], help="interaction-operator eigenvalues")
    s.add_argument("--smax", type=int, default=10)
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("reduce", parents=[common, kern], help="bifurcation equation and reference diff")
    r.add_argument("--order", type=int, default=4, choices=(2, 3, 4))
    r.add_argument("--basis", choices=("real", "complex"), default="real")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("classify", parents=[common], help="normal form, branches, stability, global bounds")
    c.add_argument("--stability-sweep", metavar="START:STOP:STEP")
    c.add_argument("--check-equivariance", action="store_true")
    c.add_argument("--trials", type=int, default=20)
    c.add_argument("--M", type=float, default=1.0, help="kernel bound for the global estimates")
    c.add_argument("--lam-bound", type=float, default=16.0, help="lambda for the density bound C*")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", parents=[common], help="run the property suite")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("product", parents=[common], help="expand Y_a * Y_b")
    d.add_argument("a", help="l,m")
    d.add_argument("b", help="l,m")
    d.set_defaults(func=cmd_product)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    args.config = RunConfig(
        getattr(args, "kernel", "onsager"), getattr(args, "taylor", None), getattr(args, "order", 4),
        args.quad_order, args.format, args.precision, args.seed,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
