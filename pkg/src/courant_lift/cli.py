"""Command-line front end.

Every command prints one JSON report on stdout (or a readable rendering with
``--pretty``).  Exit status: 0 when the checked statement holds, 1 when it
fails (the report carries a witness), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .brackets import BracketError, BracketSpec, bracket_suite, catalog, natural_context, suite_holds, twist
from .bundle import BundleContext, BundleError, parse_fiber_model
from .cartan import CartanError
from .lift import build_lift, check_main2, check_natural, check_symmetry, check_twist
from .sampling import SamplePlan
from .scalar import ScalarError
from .serialize import (
    InputError,
    decode_anchored,
    decode_form,
    decode_general,
    decode_vvform,
    dumps,
    encode_anchored,
    encode_derivation,
    encode_general,
    encode_poly,
    encode_vvform,
    load_json,
)
from .total_space import NotLinearError, decompose_linear, decompose_linear_kform
from . import torus

SEED_ENV = "COURANT_LIFT_SEED"

DESCRIPTIONS = {
    "courant-dorfman": "([X1,X2], L_X1 t2 - i_X2 d t1) on TM + T*M",
    "forms:k[,k...]": "(T,t) bracket on (+) wedge^k TM + T*M: ([X1,X2], L_X1 T2 - i_X2 dT1) blockwise",
    "mixed:k,j": "forms bracket on wedge^k + wedge^j + wedge^(k+j+1) with the degree-mixing term and its partner",
    "mixed-printed:k,j": "mixed bracket with the degree-mixing term alone (fails Jacobi; kept as a negative control)",
    "e7": "exceptional bracket on TM + wedge^2 T*M + wedge^5 T*M + (T*M x wedge^7 T*M)",
    "lie-only": "([X1,X2], L_X1 t2) on TM + T*M",
}


@dataclass
class RunConfig:
    command: str
    context: Optional[BundleContext] = None
    bracket: Optional[str] = None
    twists: List[str] = field(default_factory=list)
    seed: int = 0
    trials: int = 100
    max_degree: int = 2
    output: str = "json"
    extra: dict = field(default_factory=dict)

    def plan(self) -> SamplePlan:
        return SamplePlan(seed=self.seed, trials=self.trials, max_degree=self.max_degree)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "seed": self.seed,
            "trials": self.trials,
            "max_degree": self.max_degree,
            "output": self.output,
        }
        if self.context is not None:
            out["context"] = self.context.to_json()
        if self.bracket is not None:
            out["bracket"] = {"name": self.bracket, "twists": list(self.twists)}
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# input


def read_input(path: str, stdin=None):
    if path == "-":
        text = (stdin or sys.stdin).read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(path, f"cannot read: {exc.strerror}") from None
    return load_json(text, path)


def parse_input(path: str, kind: str, ctx: BundleContext | None = None, stdin=None):
    """Read and validate one JSON document; errors name the offending path."""
    obj = read_input(path, stdin)
    if kind == "anchored":
        return decode_anchored(obj, path, ctx)
    if kind == "vvform":
        return decode_vvform(obj, path, ctx)
    if kind == "general":
        return decode_general(obj, path, ctx.total_vars if ctx else None)
    if kind == "form":
        return decode_form(obj, path, ctx.total_vars)
    raise ValueError(kind)


def _fiber_model_arg(text: str):
    if text in ("generic", "e7"):
        return text
    if text.startswith("wedge:"):
        try:
            return parse_fiber_model({"wedge": [int(v) for v in text[6:].split(",")]})
        except ValueError:
            raise InputError("--fiber-model", f"bad degree list in {text!r}") from None
    try:
        return parse_fiber_model(json.loads(text))
    except (json.JSONDecodeError, BundleError):
        raise InputError("--fiber-model", f"expected generic, e7, wedge:k1,k2,... or JSON, got {text!r}") from None


def resolve_context(args, need_bracket: bool) -> BundleContext:
    if args.n is None:
        raise InputError("--n", "base dimension is required")
    if args.n < 1:
        raise InputError("--n", "must be at least 1")
    if need_bracket:
        if not args.bracket:
            raise InputError("--bracket", "required")
        try:
            ctx = natural_context(args.bracket, args.n)
        except BracketError as exc:
            raise InputError("--bracket", str(exc)) from None
        if args.fiber_model is not None and parse_fiber_model(_fiber_model_arg(args.fiber_model)) != ctx.fiber_model:
            raise InputError("--fiber-model", f"bracket {args.bracket} needs {ctx.to_json()['fiber_model']!r}")
        if args.r is not None and args.r != ctx.r:
            raise InputError("--r", f"bracket {args.bracket} over R^{args.n} has rank {ctx.r}")
        return ctx
    fm = _fiber_model_arg(args.fiber_model) if args.fiber_model else "generic"
    if fm == "generic":
        if args.r is None:
            raise InputError("--r", "fiber rank is required for the generic fiber model")
        try:
            return BundleContext.generic(args.n, args.r)
        except BundleError as exc:
            raise InputError("--r", str(exc)) from None
    ctx = BundleContext.e7(args.n) if fm == "e7" else BundleContext.wedge(args.n, fm[1])
    if args.r is not None and args.r != ctx.r:
        raise InputError("--r", f"fiber model has rank {ctx.r}")
    return ctx


def resolve_spec(args, ctx: BundleContext, stdin=None) -> BracketSpec:
    try:
        spec = catalog(args.bracket, ctx)
    except BracketError as exc:
        raise InputError("--bracket", str(exc)) from None
    for path in args.twist or []:
        mu = parse_input(path, "vvform", ctx, stdin)
        if mu.degree != 2:
            raise InputError(f"{path}.degree", "a twist must be an E*-valued 2-form")
        spec = twist(spec, mu)
    return spec


def resolve_seed(args, env) -> int:
    raw = env.get(SEED_ENV)
    source, value = (SEED_ENV, raw) if raw not in (None, "") else ("--seed", args.seed)
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise InputError(source, f"not an integer: {value!r}") from None
    if not 0 <= seed < 2**64:
        raise InputError(source, "must be a 64-bit unsigned integer")
    return seed


# ---------------------------------------------------------------------------
# commands; each returns (exit_code, report)


def cmd_catalog(args, cfg, stdin):
    entries = []
    for name, text in DESCRIPTIONS.items():
        entry = {"name": name, "description": text}
        if args.n is not None:
            probe = {"forms:k[,k...]": "forms:1", "mixed:k,j": "mixed:1,1", "mixed-printed:k,j": "mixed-printed:1,1"}.get(name, name)
            entry["example_context"] = {"bracket": probe, **natural_context(probe, args.n).to_json()}
        entries.append(entry)
    return 0, {"brackets": entries}


def cmd_bracket_eval(args, cfg, stdin):
    ctx = cfg.context
    spec = resolve_spec(args, ctx, stdin)
    s1 = parse_input(args.section1, "anchored", ctx, stdin)
    s2 = parse_input(args.section2, "anchored", ctx, stdin)
    return 0, {"result": encode_anchored(spec(s1, s2))}


def cmd_jacobi(args, cfg, stdin):
    spec = resolve_spec(args, cfg.context, stdin)
    rep = bracket_suite(spec, cfg.plan())
    return (0 if suite_holds(rep) else 1), rep


def cmd_lift(args, cfg, stdin):
    ctx = cfg.context
    spec = resolve_spec(args, ctx, stdin)
    if not args.section:
        raise InputError("--section", "required")
    nu = parse_input(args.section, "anchored", ctx, stdin)
    op = spec.dual(nu)
    return 0, {
        "lift": encode_general(build_lift(spec, nu)),
        "delta": encode_derivation(op.delta()),
        "phi": [[encode_poly(p) for p in row] for row in op.phi()],
    }


def cmd_check(args, cfg, stdin):
    ctx = cfg.context
    spec = resolve_spec(args, ctx, stdin)
    plan = cfg.plan()
    which = args.which
    if which == "natural":
        rep = check_natural(spec, plan)
    elif which == "main2":
        rep = check_main2(spec, plan)
    elif which == "twist":
        if not args.mu:
            raise InputError("--mu", "required for check twist")
        mu = parse_input(args.mu, "vvform", ctx, stdin)
        if mu.degree != 2:
            raise InputError(f"{args.mu}.degree", "mu must be an E*-valued 2-form")
        cfg.extra["mu"] = args.mu
        rep = check_twist(spec, mu, plan)
    else:
        if not args.beta:
            raise InputError("--beta", "required for check symmetry")
        beta = parse_input(args.beta, "vvform", ctx, stdin)
        if beta.degree != 1:
            raise InputError(f"{args.beta}.degree", "beta must be an E*-valued 1-form")
        cfg.extra["beta"] = args.beta
        rep = check_symmetry(spec, beta, plan)
    return (0 if rep.holds else 1), rep.to_json()


def cmd_torus(args, cfg, stdin):
    F = args.max_frequency
    if F < 0:
        raise InputError("--max-frequency", "must be non-negative")
    cfg.extra["max_frequency"] = F
    jac = "pass"
    for k in range(cfg.trials):
        secs = [torus.random_torus_section(cfg.seed, k, s, F) for s in range(3)]
        J = torus.torus_jacobiator(*secs)
        if not J.is_zero():
            jac = {"fail": {"trial": k, "jacobiator_top": J.part("h").to_json()}}
            break
    f = torus.FourierPoly.cos(1)
    e_x = torus.TorusSection.build(fx=torus.FourierPoly.const(1))
    top = torus.TorusSection.build(h=torus.FourierPoly.const(1))
    defect = torus.first_slot_defect(f, e_x, top)
    witness = torus.is_local_witness(F)
    report = {
        "jacobi": jac,
        "first_slot_defect": {"nonzero": not defect.is_zero(), "top": defect.part("h").to_json()},
        "local_witness": witness,
    }
    ok = jac == "pass" and not defect.is_zero() and (witness["found"] or F == 0)
    return (0 if ok else 1), report


def cmd_decompose_linear(args, cfg, stdin):
    ctx = cfg.context
    chi = parse_input(args.input, "general", ctx, stdin)
    try:
        dec = decompose_linear(ctx, chi)
    except NotLinearError as exc:
        return 1, {"linear": False, "error": str(exc), "witness": exc.witness}
    return 0, {
        "linear": True,
        "d": encode_derivation(dec.d),
        "eps": [encode_poly(p) for p in dec.eps],
        "phi": [[encode_poly(p) for p in row] for row in dec.phi],
        "reconstructs": dec.reconstruct(ctx) == chi,
    }


def cmd_decompose_kform(args, cfg, stdin):
    ctx = cfg.context
    obj = read_input(args.input, stdin)
    H = decode_form(obj, args.input, ctx.total_vars)
    try:
        dec = decompose_linear_kform(ctx, H)
    except NotLinearError as exc:
        return 1, {"linear": False, "error": str(exc), "witness": exc.witness}
    return 0, {
        "linear": True,
        "mu": encode_vvform(dec.mu),
        "omega": encode_vvform(dec.omega),
        "closed": dec.omega.is_zero(),
        "reconstructs": dec.reconstruct(ctx) == H,
    }


COMMANDS = {
    "catalog": (cmd_catalog, None),
    "bracket-eval": (cmd_bracket_eval, True),
    "jacobi-check": (cmd_jacobi, True),
    "lift": (cmd_lift, True),
    "check": (cmd_check, True),
    "torus-check": (cmd_torus, None),
    "decompose-linear": (cmd_decompose_linear, False),
    "decompose-kform": (cmd_decompose_kform, False),
}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bracket", help="catalog name, e.g. courant-dorfman, forms:2, mixed:1,1, e7, lie-only")
    common.add_argument("--n", type=int, help="base dimension")
    common.add_argument("--r", type=int, help="fiber rank (generic fiber model)")
    common.add_argument("--fiber-model", help="generic | e7 | wedge:k1,k2,... | JSON")
    common.add_argument("--twist", action="append", metavar="MU.json", help="E*-valued 2-form added to the bracket; repeatable")
    common.add_argument("--seed", default=0, help=f"sampling seed (overridden by ${SEED_ENV})")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--max-degree", type=int, default=2)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", dest="output", action="store_const", const="json", default="json")
    out.add_argument("--pretty", dest="output", action="store_const", const="pretty")

    p = argparse.ArgumentParser(prog="courant-lift", description="Exact checks for Dorfman brackets and their lifts.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", parents=[common], help="list the bracket catalog")
    be = sub.add_parser("bracket-eval", parents=[common], help="evaluate a bracket on two sections")
    be.add_argument("section1")
    be.add_argument("section2")
    sub.add_parser("jacobi-check", parents=[common], help="Leibniz, anchor and Jacobi suite")
    lf = sub.add_parser("lift", parents=[common], help="lift a section to the total space")
    lf.add_argument("--section")
    ck = sub.add_parser("check", parents=[common], help="lift-level criteria")
    ck.add_argument("which", choices=("natural", "main2", "twist", "symmetry"))
    ck.add_argument("--mu")
    ck.add_argument("--beta")
    tc = sub.add_parser("torus-check", parents=[common], help="the non-local bracket on the 2-torus")
    tc.add_argument("--max-frequency", type=int, default=3)
    dl = sub.add_parser("decompose-linear", parents=[common], help="split a linear section of TE + T*E")
    dl.add_argument("input")
    dk = sub.add_parser("decompose-kform", parents=[common], help="split a linear k-form on E")
    dk.add_argument("input")
    return p


# ---------------------------------------------------------------------------
# rendering


def render_pretty(cfg: RunConfig, code: int, report: dict) -> str:
    verdict = {0: "holds", 1: "fails", 2: "input error"}[code]
    lines = [f"{cfg.command}: {verdict}"]
    if cfg.context is not None:
        c = cfg.context.to_json()
        lines.append(f"  context: n={c['n']} r={c['r']} fiber={json.dumps(c['fiber_model'])}")
    if cfg.bracket:
        lines.append(f"  bracket: {cfg.bracket}" + (f" twisted by {', '.join(cfg.twists)}" if cfg.twists else ""))
    lines.append(f"  seed={cfg.seed} trials={cfg.trials} max_degree={cfg.max_degree}")
    _pretty_value(lines, report, 1)
    return "\n".join(lines) + "\n"


def _pretty_scalar(obj) -> Optional[str]:
    from .scalar import Poly

    if isinstance(obj, dict) and "nvars" in obj and "terms" in obj:
        return Poly.from_json(obj).pretty()
    return None


def _pretty_graded(obj) -> Optional[str]:
    if not (isinstance(obj, dict) and "degree" in obj and "terms" in obj and isinstance(obj["terms"], list)):
        return None
    mv = obj.get("kind") == "multivector"
    parts = []
    for t in obj["terms"]:
        c = _pretty_scalar(t["coeff"]) or str(t["coeff"])
        basis = " ^ ".join((f"d/dx{i + 1}" if mv else f"dx{i + 1}") for i in t["idx"])
        parts.append(f"({c}) {basis}".rstrip() if basis else f"({c})")
    return " + ".join(parts) if parts else "0"


def _pretty_value(lines: List[str], obj, depth: int, key: str = "") -> None:
    pad = "  " * depth
    label = f"{key}: " if key else ""
    text = _pretty_scalar(obj) or _pretty_graded(obj)
    if text is not None:
        lines.append(f"{pad}{label}{text}")
    elif isinstance(obj, dict):
        if key:
            lines.append(f"{pad}{key}:")
            depth += 1
        for k in sorted(obj):
            _pretty_value(lines, obj[k], depth, str(k))
    elif isinstance(obj, list) and obj and all(isinstance(v, (dict, list)) for v in obj):
        lines.append(f"{pad}{key}:")
        for i, v in enumerate(obj):
            _pretty_value(lines, v, depth + 1, f"[{i}]")
    else:
        lines.append(f"{pad}{label}{json.dumps(obj)}")


# ---------------------------------------------------------------------------
# entry point


def run(argv: Sequence[str] | None = None, env=None, stdin=None, stdout=None, stderr=None) -> int:
    env = os.environ if env is None else env
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    cfg = RunConfig(
        command=args.command + (f" {args.which}" if args.command == "check" else ""),
        bracket=args.bracket,
        twists=list(args.twist or []),
        trials=args.trials,
        max_degree=args.max_degree,
        output=args.output,
    )
    handler, needs = COMMANDS[args.command]
    try:
        cfg.seed = resolve_seed(args, env)
        if cfg.trials < 0:
            raise InputError("--trials", "must be non-negative")
        if cfg.max_degree < 0:
            raise InputError("--max-degree", "must be non-negative")
        if needs is not None:
            cfg.context = resolve_context(args, needs)
        if needs is not True:
            cfg.bracket = None
        code, report = handler(args, cfg, stdin)
    except (InputError, BundleError, BracketError, CartanError, ScalarError) as exc:
        path = getattr(exc, "path", None)
        msg = getattr(exc, "message", str(exc))
        code, report = 2, {"error": {"path": path, "message": msg}}
        print(f"error: {exc}", file=stderr)
    doc = {"config": cfg.to_json(), "exit_code": code, "report": report}
    if cfg.output == "pretty":
        stdout.write(render_pretty(cfg, code, report))
    else:
        stdout.write(dumps(doc))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
