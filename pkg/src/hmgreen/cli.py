"""Command-line front end.

Every subcommand validates its inputs, computes, and only then writes JSON (or
CSV for tables) to stdout or --output.  Exit codes: 0 success, 1 verification
failure, 2 usage error, 3 precision or truncation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import checks
from . import specialfun as sf
from .arithseries import divisor_sigma, gsum, gsum_reference, regularization_constants
from .borcherds import local_product, log_norm_block, multiplicity_table
from .errors import HMGreenError, InputError, PrecisionError, SearchExhaustedError, UnsupportedError
from .green import (Truncation, phi_direct, phi_fourier, phi_regularized_direct, smooth_kernel)
from .ideals import FractionalIdeal, boundary_cycle, genus_characters
from .lattice import EvalPoint, lambda_set, reduced_and_weyl
from .numberfield import FieldElement, check_discriminant, field_context

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3
SUITE_NAMES = ("field", "dirichlet", "sigma", "green2route", "laplace", "borcherds", "integrals", "growth", "all")


# ------------------------------------------------------------ configuration
@dataclass(frozen=True)
class RunConfig:
    disc: int
    ideal: FractionalIdeal
    trunc: Truncation = field(default_factory=Truncation)
    output: str = "json"
    seed: int = 0
    jobs: int = 1
    digits: int = 15

    @classmethod
    def from_mapping(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown configuration keys: {sorted(unknown)}")
        if "disc" not in data:
            raise InputError("disc is required")
        D = check_discriminant(int(data["disc"]))
        ideal = data.get("ideal", "OK")
        if not isinstance(ideal, FractionalIdeal):
            ideal = parse_ideal(D, ideal)
        trunc = data.get("trunc") or Truncation()
        if isinstance(trunc, str):
            trunc = Truncation.from_overrides(trunc)
        out = data.get("output", "json")
        if out not in ("json", "csv"):
            raise InputError("output must be json or csv")
        jobs = int(data.get("jobs", 1))
        digits = int(data.get("digits", 15))
        if jobs < 1:
            raise InputError("jobs must be at least 1")
        if not 1 <= digits <= 17:
            raise InputError("digits must be between 1 and 17")
        return cls(D, ideal, trunc, out, int(data.get("seed", 0)), jobs, digits)


def parse_ideal(D: int, text: str) -> FractionalIdeal:
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"ideal is not valid JSON: {exc}") from None
        try:
            return FractionalIdeal.from_json(D, obj)
        except (TypeError, KeyError, IndexError) as exc:
            raise InputError(f"malformed ideal {text!r}: {exc}") from None
    return FractionalIdeal.named(D, text)


def parse_element(D: int, text: str) -> FieldElement:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise InputError("field elements are given as p,q[,r] meaning (p + q sqrt(D)) / r")
    try:
        return FieldElement.from_json(D, [int(p) for p in parts])
    except ValueError:
        raise InputError(f"bad field element {text!r}") from None


def parse_s(text: str):
    """'2' -> Fraction, '1.5' -> float, '2.5,0.5' -> complex."""
    parts = text.split(",")
    try:
        if len(parts) == 2:
            re_, im = float(parts[0]), float(parts[1])
            return complex(re_, im) if im else re_
        if len(parts) != 1:
            raise ValueError
        v = Fraction(parts[0])
        return v if v.denominator == 1 else float(parts[0])
    except ValueError:
        raise InputError(f"bad value for s: {text!r}") from None


def parse_weight(text: str | None):
    if text is None:
        return (1.0, 1.0)
    parts = text.split(",")
    try:
        w = tuple(float(p) for p in parts)
    except ValueError:
        raise InputError(f"bad weight vector {text!r}") from None
    if len(w) != 2:
        raise InputError("weight vector needs two entries w1,w2")
    return w


# ------------------------------------------------------------ output
def to_plain(v, digits: int):
    if isinstance(v, dict):
        return {str(k): to_plain(x, digits) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_plain(x, digits) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": to_plain(v.real, digits), "im": to_plain(v.imag, digits)}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{digits}g}")
    if hasattr(v, "to_json"):
        return to_plain(v.to_json(), digits)
    if v is None or isinstance(v, str):
        return v
    raise TypeError(f"cannot serialize {type(v).__name__}")


def render_json(payload: dict, digits: int) -> str:
    body = to_plain(payload, digits)
    body["precision"] = {"significant_digits": digits}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_output(text: str, path: str | None) -> None:
    if not path:
        sys.stdout.write(text)
        return
    # write to a temporary file first so a failure never leaves a partial file
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".hmgreen-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------ subcommands
def cmd_field(cfg: RunConfig, args) -> tuple[dict, int]:
    ctx = field_context(cfg.disc)
    return {"disc": cfg.disc, "eps0": ctx.eps0, "eps1": ctx.eps1, "eps0_norm": ctx.eps0.norm(),
            "L_minus1": ctx.L_minus1, "zetaK_minus1": ctx.zetaK_minus1,
            "ideal": cfg.ideal, "ideal_norm": cfg.ideal.norm,
            "genus_characters": list(genus_characters(cfg.ideal)) if cfg.disc % 2 else None}, EXIT_OK


def cmd_sigma(cfg: RunConfig, args) -> tuple[dict, int]:
    s = parse_s(args.s)
    v = divisor_sigma(cfg.ideal, args.m, s)
    out = {"disc": cfg.disc, "m": args.m, "sigma": v}
    if args.constants:
        rc = regularization_constants(cfg.ideal, args.m)
        out["q"], out["L"], out["note"] = rc.q, rc.L, rc.note
    return out, EXIT_OK


def cmd_gsum(cfg: RunConfig, args) -> tuple[dict, int]:
    nu = parse_element(cfg.disc, args.nu)
    v = gsum(cfg.ideal, args.m, nu, args.b)
    out = {"disc": cfg.disc, "m": args.m, "b": args.b, "nu": nu, "value": v}
    if args.reference:
        out["reference"] = gsum_reference(cfg.ideal, args.m, nu, args.b)
    return out, EXIT_OK


def cmd_weyl(cfg: RunConfig, args) -> tuple[dict, int]:
    w = parse_weight(args.weyl)
    hz = lambda_set(cfg.ideal, args.m)
    if not hz.representatives:
        return {"m": args.m, "representatives": [], "reduced": [], "rho": None, "walls": []}, EXIT_OK
    wd = reduced_and_weyl(cfg.ideal, args.m, w)
    return {"m": args.m, "weight": list(w), "representatives": list(hz.representatives),
            "reduced": list(wd.reduced), "rho": wd.rho, "walls": list(wd.walls)}, EXIT_OK


def _green_one(job):
    mode, a, m, s, ztext, t = job
    z = EvalPoint.parse(ztext)
    if mode == "direct":
        v = phi_direct(a, m, s, z, t)
    elif mode == "smooth":
        v = smooth_kernel(a, m, s, z, t)
    elif mode == "fourier":
        v = phi_fourier(a, m, z, t)
    else:
        v = phi_regularized_direct(a, m, z, t)
    return {"z": ztext, **v.to_json()}


def cmd_green(cfg: RunConfig, args) -> tuple[dict, int]:
    s = parse_s(args.s) if args.s else None
    if args.mode in ("direct", "smooth") and s is None:
        raise InputError(f"--mode {args.mode} needs --s")
    if args.mode in ("fourier", "reg") and s is not None:
        raise InputError(f"--mode {args.mode} evaluates at s = 1; drop --s")
    zs = args.z
    for ztext in zs:
        EvalPoint.parse(ztext)  # validate all points before any work
    s_num = float(s) if isinstance(s, Fraction) else s
    jobs = [(args.mode, cfg.ideal, args.m, s_num, ztext, cfg.trunc) for ztext in zs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_green_one, jobs))
    else:
        results = [_green_one(j) for j in jobs]
    return {"mode": args.mode, "disc": cfg.disc, "m": args.m, "s": s if s is not None else 1,
            "ideal": cfg.ideal, "values": results}, EXIT_OK


def cmd_borcherds(cfg: RunConfig, args) -> tuple[dict, int]:
    w = parse_weight(args.weyl)
    z = EvalPoint.parse(args.z)
    psi = local_product(cfg.ideal, args.m, z, w, form=args.form)
    lb = log_norm_block(cfg.ideal, args.m, z)
    return {"disc": cfg.disc, "m": args.m, "z": args.z, "weight": list(w), "form": args.form, "value": psi,
            "log_abs": math.log(abs(psi)), "f5": lb.f5, "f6": lb.f6}, EXIT_OK


def cmd_multiplicities(cfg: RunConfig, args) -> tuple[dict, int]:
    rows = multiplicity_table(cfg.ideal, args.m)
    if cfg.output == "csv":
        return {"csv": render_csv(["k", "p", "q", "r", "b_k", "multiplicity"],
                                  [[r.k, r.point.p, r.point.q, r.point.r, r.self_intersection, str(r.multiplicity)]
                                   for r in rows])}, EXIT_OK
    return {"disc": cfg.disc, "m": args.m, "cycle_length": boundary_cycle(cfg.ideal.inverse()).length,
            "rows": rows}, EXIT_OK


def cmd_qexp(cfg: RunConfig, args) -> tuple[dict, int]:
    if cfg.disc % 2 == 0:
        raise UnsupportedError("q-expansions are emitted for odd discriminants only")
    if args.mmax < 1:
        raise InputError("--mmax must be positive")
    e = checks.qexp(cfg.disc, cfg.ideal, args.mmax)
    if cfg.output == "csv":
        rows = [[0, "", str(e["eisenstein"][0])]] + [[m, str(c), str(e["eisenstein"][m])]
                                                      for m, c in enumerate(e["c"], start=1)]
        return {"csv": render_csv(["m", "c_m", "eisenstein_m"], rows)}, EXIT_OK
    return {"disc": cfg.disc, "ideal": cfg.ideal, "c": e["c"], "eisenstein": e["eisenstein"],
            "constant": e["constant"]}, EXIT_OK


def _suite_options(cfg: RunConfig, args) -> dict:
    discs = (cfg.disc,) if args.disc_given else checks.ACCEPT_DISCS
    configs = tuple(c for c in checks.GRID_CONFIGS if c[0] in discs) or checks.GRID_CONFIGS
    return {"discs": discs, "mmax": args.mmax or 50, "mmax_default": args.mmax is None, "bmax": args.bmax or 50,
            "mmax_growth": args.mmax or 200, "configs": configs, "trunc": cfg.trunc, "seed": cfg.seed}


def _run_suite(item):
    name, opts = item
    return [r.to_json() for r in checks.SUITES[name](opts)]


def cmd_verify(cfg: RunConfig, args) -> tuple[dict, int]:
    names = [n for n in SUITE_NAMES if n != "all"] if args.suite == "all" else [args.suite]
    opts = _suite_options(cfg, args)
    items = [(n, opts) for n in names]
    if cfg.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_suite, items))
    else:
        results = [_run_suite(i) for i in items]
    reports = [r for group in results for r in group]
    ok = all(r["pass"] for r in reports)
    return {"suite": args.suite, "pass": ok, "reports": reports}, EXIT_OK if ok else EXIT_FAIL


def special_battery() -> "checks.Report":
    """Identities among the special functions that need no external oracle."""
    rep = checks.Report("special")
    for z in (0.3, 1.7, 4.25):
        rep.add(f"Gamma reflection z={z}", sf.gamma(z) * sf.gamma(1 - z) - math.pi / math.sin(math.pi * z), 1e-12)
    for nu, x in ((0.5, 0.7), (1.0, 3.0), (2.5, 12.0)):
        w = sf.bessel("I", nu, x) * sf.bessel("K", nu + 1, x) + sf.bessel("I", nu + 1, x) * sf.bessel("K", nu, x)
        rep.add(f"I/K Wronskian nu={nu} x={x}", (w - 1 / x) * x, 1e-11)
    for x in (1.5, 3.0, 11.0):
        rep.add(f"Q_0({x}) closed form", sf.legendre_q(1, x) - 0.5 * math.log((x + 1) / (x - 1)), 1e-13)
    for s in (1.5, 2.0, 2.5 + 0.5j):
        _, acc = sf.unit_sum_partials(s)
        rep.add(f"sum c_n/(s+n-1) s={s}", acc - 1 / (s * (s - 1)), 1e-10)
    return rep


def cmd_selftest(cfg: RunConfig, args) -> tuple[dict, int]:
    reports = [special_battery()]
    if not args.special:
        reports += [checks.field_checks((cfg.disc,)), checks.sigma_functional_equation((cfg.disc,), 10)]
    ok = all(r.ok for r in reports)
    return {"pass": ok, "reports": [r.to_json() for r in reports]}, EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------ argument parsing
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--disc", type=int, default=None, help="fundamental discriminant D (default 5)")
    common.add_argument("--ideal", default="OK", help='OK, diff, diffinv or {"basis": [[p,q,r],[p,q,r]]}')
    common.add_argument("--trunc", default=None, help="truncation overrides, e.g. b_max=60,nu_trace_max=6")
    common.add_argument("--format", dest="output", choices=("json", "csv"), default="json")
    common.add_argument("--json", dest="output", action="store_const", const="json")
    common.add_argument("--output", dest="path", default=None, help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=int(os.environ.get("HMGREEN_JOBS", "1") or 1))
    common.add_argument("--digits", type=int, default=15, help="significant digits of float output")

    p = argparse.ArgumentParser(prog="hmgreen", description="Green functions and Borcherds products on Hilbert modular surfaces")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("field", parents=[common], help="units, L(-1, chi_D), zeta_K(-1), genus characters")

    sp = sub.add_parser("sigma", parents=[common], help="divisor sum sigma(a, m, s)")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--s", required=True)
    sp.add_argument("--constants", action="store_true", help="also emit q(a, m) and L(a, m)")

    sp = sub.add_parser("gsum", parents=[common], help="exponential sum G^b(a, m, nu)")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--nu", required=True, help="p,q,r for (p + q sqrt(D)) / r")
    sp.add_argument("--reference", action="store_true", help="also run the brute-force reference")

    sp = sub.add_parser("weyl", parents=[common], help="reduced representatives and Weyl vector")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--weyl", default=None, help="weight vector w1,w2 (default 1,1)")

    sp = sub.add_parser("green", parents=[common], help="Green function values")
    sp.add_argument("--mode", choices=("direct", "fourier", "reg", "smooth"), required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--s", default=None, help="s or re,im (direct and smooth modes)")
    sp.add_argument("--z", action="append", required=True, help="x1,y1,x2,y2; repeat for several points")

    sp = sub.add_parser("borcherds", parents=[common], help="local Borcherds product at z")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--z", required=True)
    sp.add_argument("--weyl", default=None)
    sp.add_argument("--form", choices=("weyl", "direct"), default="weyl")

    sp = sub.add_parser("multiplicities", parents=[common], help="vanishing orders along the boundary cycle")
    sp.add_argument("--m", type=int, required=True)

    sp = sub.add_parser("qexp", parents=[common], help="generating series and Eisenstein coefficients")
    sp.add_argument("--mmax", type=int, required=True)

    sp = sub.add_parser("verify", parents=[common], help="run a verification suite")
    sp.add_argument("--suite", choices=SUITE_NAMES, required=True)
    sp.add_argument("--mmax", type=int, default=None)
    sp.add_argument("--bmax", type=int, default=None)

    sp = sub.add_parser("selftest", parents=[common], help="quick identity battery")
    sp.add_argument("--special", action="store_true", help="special functions only")
    return p


COMMANDS = {"field": cmd_field, "sigma": cmd_sigma, "gsum": cmd_gsum, "weyl": cmd_weyl, "green": cmd_green,
            "borcherds": cmd_borcherds, "multiplicities": cmd_multiplicities, "qexp": cmd_qexp,
            "verify": cmd_verify, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    args.disc_given = args.disc is not None
    try:
        cfg = RunConfig.from_mapping({"disc": args.disc if args.disc_given else 5, "ideal": args.ideal,
                                      "trunc": args.trunc, "output": args.output, "seed": args.seed,
                                      "jobs": args.jobs, "digits": args.digits})
        payload, code = COMMANDS[args.command](cfg, args)
    except (PrecisionError, SearchExhaustedError) as exc:
        print(f"hmgreen: precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (HMGreenError, ValueError) as exc:
        print(f"hmgreen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = payload["csv"] if "csv" in payload else render_json(payload, cfg.digits)
    write_output(text, args.path)
    return code


if __name__ == "__main__":
    sys.exit(main())
