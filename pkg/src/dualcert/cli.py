"""Command-line entry point: construct, verify, solve, sweep.

Exit codes: 0 feasible / success, 2 infeasible, 3 feasible within floating tolerance,
64 usage error, 65 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import completeness as comp
from . import fq
from . import gridfunc as gf
from . import hierarchy as hz
from . import krawtchouk as kr
from . import lift as lf
from . import oracle as orc
from . import simplex as sx
from . import spectral as sp
from .errors import BudgetExceeded, DualCertError, InfeasibleInput
from .valid import parse_spec

EXIT_OK, EXIT_INFEASIBLE, EXIT_TOLERANCE, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3, 64, 65
ENV_DENSE_BITS = "DUALCERT_DENSE_BITS"
DEFAULT_DENSE_BITS = 20
FLOAT_PRECISION = "binary64"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    params: dict
    dense_bits: int = DEFAULT_DENSE_BITS
    group_cap: int = 1_000_000
    simplex_cap: int = 4000
    fmt: str = "json"
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dense_bits <= 0 or self.group_cap <= 0 or self.simplex_cap <= 0:
            raise UsageError("budgets must be positive")


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {s!r}") from exc


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _emit(cfg, obj, out) -> None:
    if cfg.fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    elif cfg.fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(obj):
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
    else:
        for k, v in _flatten(obj):
            out.write(f"{k}: {v}\n")


def _write_cert(cert, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(hz.cert_to_json(cert), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _exit_for(report) -> int:
    if not report.feasible:
        return EXIT_INFEASIBLE
    return EXIT_TOLERANCE if report.status == hz.TOLERANCE else EXIT_OK


# ----------------------------------------------------------------- commands

def cmd_lift(cfg: RunConfig, out) -> int:
    p = cfg.params
    spec = parse_spec(p["spec"], p["n"], p["q"])
    if p.get("input"):
        with open(p["input"]) as fh:
            src = hz.cert_from_json(json.load(fh))
        k = src.ell
    else:
        k = p["k"]
        src = lf.trivial_level(spec, k)
    ell = p["level"]
    cert = lf.lift_level1(src, ell, spec) if k == 1 and p.get("method") == "prop" else lf.lift_general(src, ell, spec)
    rep = hz.check_symmp(cert, spec)
    value = lf._as_level(src).value
    _write_cert(cert, p.get("emit_cert"))
    _emit(cfg, {"input_value": gf.frac_str(value), "k": k, "l": ell, "objective": gf.frac_str(cert.objective()),
           "power_law": cert.objective() == value ** (ell // k), "report": rep.to_json()}, out)
    return _exit_for(rep)


def cmd_completeness(cfg: RunConfig, out) -> int:
    p = cfg.params
    spec = parse_spec(p["spec"], p["n"], p["q"]) if p.get("spec") else None
    if spec is not None:
        k = comp.max_valid_dimension(spec)
    elif p.get("k") is not None:
        k = p["k"]
    else:
        raise UsageError("completeness needs --k or --spec")
    bt = comp.build_beta_tilde(p["n"], p["level"], k, p["q"], allow_low_level=p.get("allow_low_level", False))
    cert = comp.build_completeness_cert(p["n"], p["level"], k, p["q"], spec, allow_low_level=p.get("allow_low_level", False))
    rep = hz.check_mdual(cert, cert.spec)
    _write_cert(cert, p.get("emit_cert"))
    _emit(cfg, {"k": k, "alpha": gf.frac_str(cert.objective()), "beta_tilde": [str(v) for v in bt.values],
           "beta_tilde_nonnegative": bt.nonnegative, "report": rep.to_json()}, out)
    return _exit_for(rep)


def cmd_spectral(cfg: RunConfig, out) -> int:
    p = cfg.params
    params = sp.SpectralParams(p["level"], p["m"], _frac(p["eps"]), p["n"], p["family"], clamp=p.get("clamp", False))
    cert, diag = sp.build_spectral_certificate(params)
    _write_cert(cert, p.get("emit_cert"))
    body = diag.to_json()
    body["precision"] = FLOAT_PRECISION
    body["mrrw_leading"] = sp.mrrw_leading(params.eps)
    _emit(cfg, body, out)
    return EXIT_OK if diag.feasible else EXIT_INFEASIBLE


def cmd_lp_solve(cfg: RunConfig, out) -> int:
    p = cfg.params
    sx.MAX_COLUMNS = sx.MAX_ROWS = cfg.simplex_cap
    if p.get("file"):
        with open(p["file"]) as fh:
            problem = sx.from_text(fh.read())
    else:
        if not p.get("spec"):
            raise UsageError("lp-solve needs an LP file or --spec with --n and --level")
        spec = parse_spec(p["spec"], p["n"], p["q"])
        red = kr.build_klp_dual(spec, p["level"]) if p.get("dual") else kr.build_klp(spec, p["level"])
        problem = red.problem
        if p.get("export"):
            with open(p["export"], "w") as fh:
                fh.write(sx.to_text(problem))
    sol = sx.solve(problem)
    body = {"status": sol.status, "pivots": sol.pivots}
    if sol.status == "optimal":
        body["objective"] = gf.frac_str(sol.objective)
        body["x"] = {problem.col_names[j]: gf.frac_str(v) for j, v in enumerate(sol.x) if v}
        body["y"] = {problem.row_names[i]: gf.frac_str(v) for i, v in enumerate(sol.y) if v}
    _emit(cfg, body, out)
    return EXIT_OK if sol.status == "optimal" else EXIT_INFEASIBLE


def cmd_oracle(cfg: RunConfig, out) -> int:
    p = cfg.params
    if p["action"] == "max-code":
        spec = parse_spec(p["spec"], p["n"], p["q"])
        basis, size, power = orc.max_valid_code(spec, p["level"])
        _emit(cfg, {"basis": [list(r) for r in basis], "size": size, "size_power": power, "l": p["level"]}, out)
        return EXIT_OK
    with open(p["cert"]) as fh:
        cert = hz.cert_from_json(json.load(fh))
    rep = orc.audit_certificate(cert)
    _emit(cfg, rep.to_json(), out)
    return _exit_for(rep)


def cmd_verify(cfg: RunConfig, out) -> int:
    with open(cfg.params["cert"]) as fh:
        raw = json.load(fh)
    cert = hz.cert_from_json(raw)
    rep = hz.check(cert, cert.spec)
    claimed = raw.get("claimed_objective")
    if claimed is not None and not isinstance(rep.objective, complex) and Fraction(claimed) != rep.objective:
        rep.violations.append(hz.Violation("claimed-objective", None, gf.frac_str(Fraction(claimed)),
                                           f"= {gf.frac_str(rep.objective)}"))
        rep.violation_count += 1
        rep.feasible = False
        rep.status = hz.INFEASIBLE
    _emit(cfg, rep.to_json(), out)
    return _exit_for(rep)


def cmd_sweep(cfg: RunConfig, out) -> int:
    p = cfg.params
    eps_list = [_frac(s) for s in p["eps"].split(",") if s]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["family", "l", "m", "n", "eps", "tau", "tau_clamped", "objective", "rate", "entropy",
                "rate_constant", "mrrw_leading", "sign_check", "hypothesis_holds", "feasible"])
    for eps in eps_list:
        params = sp.SpectralParams(p["level"], p["m"], eps, p["n"], p["family"], clamp=p.get("clamp", False))
        _, d = sp.build_spectral_certificate(params)
        w.writerow([p["family"], p["level"], p["m"], p["n"], str(eps), repr(d.tau), d.tau_clamped,
                    gf.frac_str(d.objective), repr(d.rate), repr(d.entropy),
                    repr(d.rate_constant), repr(sp.mrrw_leading(eps)),
                    d.sign_check, d.hypothesis_holds, d.feasible])
    return EXIT_OK


COMMANDS = {
    "lift": cmd_lift,
    "completeness": cmd_completeness,
    "spectral": cmd_spectral,
    "lp-solve": cmd_lp_solve,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    saved = gf.DENSE_MAX_BITS, fq.GL_ENUM_MAX_ELEMENTS, sx.MAX_COLUMNS, sx.MAX_ROWS
    gf.set_dense_budget(cfg.dense_bits)
    fq.GL_ENUM_MAX_ELEMENTS = cfg.group_cap
    try:
        return COMMANDS[cfg.command](cfg, out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InfeasibleInput as exc:
        print(f"infeasible input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, DualCertError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        gf.set_dense_budget(saved[0])
        fq.GL_ENUM_MAX_ELEMENTS, sx.MAX_COLUMNS, sx.MAX_ROWS = saved[1:]


# ------------------------------------------------------------------ parsing

def _common(p: argparse.ArgumentParser, level=True, spec=True):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=2)
    if level:
        p.add_argument("--level", "--l", dest="level", type=int, required=True)
    if spec:
        p.add_argument("--spec", help="distance:D | balanced:P/Q | dim:K")


def build_parser() -> argparse.ArgumentParser:
    default_bits = int(os.environ.get(ENV_DENSE_BITS, DEFAULT_DENSE_BITS))
    # budget and format flags are accepted before or after the subcommand
    glob = _Parser(add_help=False)
    glob.add_argument("--dense-cap", type=int, default=argparse.SUPPRESS, help="log2 of the dense point budget")
    glob.add_argument("--group-cap", type=int, default=argparse.SUPPRESS)
    glob.add_argument("--simplex-cap", type=int, default=argparse.SUPPRESS)
    glob.add_argument("--format", choices=["json", "csv", "human"], default=argparse.SUPPRESS)
    parser = _Parser(prog="dualcert", description="Dual certificates for linear-code LP hierarchies.", parents=[glob])
    # set_defaults would mutate the actions shared with every subparser, so fill these after parsing
    parser.global_defaults = dict(dense_cap=default_bits, group_cap=1_000_000, simplex_cap=4000, format="json")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[glob], **kw)
    sub.add_parser = add_parser

    p = sub.add_parser("lift", help="lift a level-k certificate to level l")
    _common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--input", help="level-k symmpLPdual certificate JSON (default: trivial)")
    p.add_argument("--method", choices=["thm", "prop"], default="thm")
    p.add_argument("--emit-cert")

    p = sub.add_parser("completeness", help="closed-form Mdual certificate")
    _common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--allow-low-level", action="store_true")
    p.add_argument("--emit-cert")

    p = sub.add_parser("spectral", help="spectral LPdual certificate for balanced codes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--level", "--l", dest="level", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--family", choices=list(sp.FAMILIES), default=sp.VERTEX_UNIFORM)
    p.add_argument("--clamp", action="store_true", help="clamp tau when no admissible root exists")
    p.add_argument("--emit-cert")

    p = sub.add_parser("lp-solve", help="exact simplex on an LP file or the reduced Krawtchouk LP")
    p.add_argument("file", nargs="?")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--level", "--l", dest="level", type=int, default=1)
    p.add_argument("--spec")
    p.add_argument("--dual", action="store_true")
    p.add_argument("--export")

    p = sub.add_parser("oracle", help="brute-force ground truth")
    osub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    m = osub.add_parser("max-code", parents=[glob])
    _common(m, level=False)
    m.add_argument("--level", "--l", dest="level", type=int, default=1)
    a = osub.add_parser("audit", parents=[glob])
    a.add_argument("cert")

    p = sub.add_parser("verify", help="check a certificate file")
    p.add_argument("cert")

    p = sub.add_parser("sweep", help="spectral rate table over eps values (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--level", "--l", dest="level", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", required=True, help="comma-separated rationals")
    p.add_argument("--family", choices=list(sp.FAMILIES), default=sp.VERTEX_UNIFORM)
    p.add_argument("--clamp", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    for key, val in parser.global_defaults.items():
        if not hasattr(ns, key):
            setattr(ns, key, val)
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "dense_cap", "group_cap", "simplex_cap", "format")}
    try:
        cfg = RunConfig(ns.command, params, ns.dense_cap, ns.group_cap, ns.simplex_cap, ns.format)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
