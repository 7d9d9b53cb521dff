"""Dorfman bracket catalog on TM + E*, twists, and Jacobi/Leibniz/anchor diagnostics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .bundle import (
    AnchoredSection,
    BundleContext,
    BundleError,
    CoSection,
    Derivation,
    DualOperator,
    basis_anchored,
    derivation_commutator,
    frame_section,
)
from .cartan import (
    Form,
    VectorValuedForm,
    apply_vf,
    coordinate_vector,
    exterior_d,
    interior,
    lie_bracket,
    lie_derivative,
    wedge,
)
from .scalar import Poly

Evaluator = Callable[[AnchoredSection, AnchoredSection], AnchoredSection]


class BracketError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BracketSpec:
    """A named bracket on sections of TM + E* over ``context``."""

    name: str
    context: BundleContext
    evaluate: Evaluator
    twists: Tuple[VectorValuedForm, ...] = ()
    split: bool = True

    def __call__(self, nu1: AnchoredSection, nu2: AnchoredSection) -> AnchoredSection:
        return self.evaluate(nu1, nu2)

    def dual(self, nu: AnchoredSection) -> DualOperator:
        return DualOperator(self.evaluate, self.context, nu)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "context": self.context.to_json(),
            "twists": len(self.twists),
        }


# ---------------------------------------------------------------------------
# evaluators


def _lie_top(X, v: Sequence[Form]) -> List[Form]:
    """Lie derivative of v in Ω^7 ⊗ T*, stored as v(Y) = sum_i Y^i v^i."""
    n = X.nvars
    out = [lie_derivative(X, vi) for vi in v]
    grads = {I[0]: c.partials() for I, c in X.terms.items()}
    for i, g in grads.items():
        if not v[i]:
            continue
        for j, dj in g.items():
            # (L_X v)^j gains (d_j X^i) v^i
            out[j] = out[j] + v[i].scale(dj)
    return out


def _diamond(da: Form, beta: Form) -> List[Form]:
    """(da ⋄ beta)^i = (ι_{d_i} da) ^ beta."""
    n = da.nvars
    one = Poly.const(n, 1)
    return [wedge(interior(coordinate_vector(n, i, one), da), beta) for i in range(n)]


def _forms_views(ctx: BundleContext, nu1: AnchoredSection, nu2: AnchoredSection) -> List:
    """Blockwise L_X beta - ι_Y d alpha (and L_X v on the top block)."""
    X, Y = nu1.X, nu2.X
    a_views = ctx.eps_views(nu1.eps)
    b_views = ctx.eps_views(nu2.eps)
    out = []
    for blk, a, b in zip(ctx.blocks, a_views, b_views):
        if blk.kind == "wedge":
            out.append(lie_derivative(X, b) - interior(Y, exterior_d(a)))
        elif blk.kind == "e7top":
            out.append(_lie_top(X, b))
        else:
            raise BracketError("the forms bracket needs a wedge fiber model")
    return out


def _finish(ctx: BundleContext, nu1, nu2, views) -> AnchoredSection:
    return AnchoredSection(lie_bracket(nu1.X, nu2.X), ctx.eps_from_views(views))


def forms_evaluator(ctx: BundleContext) -> Evaluator:
    def ev(nu1, nu2):
        return _finish(ctx, nu1, nu2, _forms_views(ctx, nu1, nu2))

    return ev


def mixed_evaluator(ctx: BundleContext, k: int, j: int, partner: bool = True) -> Evaluator:
    """Forms bracket on blocks (k, j, k+j+1) plus degree-mixing terms.

    The printed term is (-1)^{(k-1)j} dα_k ^ β_j.  With ``partner`` the term
    (-1)^j dα_j ^ β_k is added as well; without it the Jacobi identity fails.
    """
    c1 = -1 if ((k - 1) * j) & 1 else 1
    c2 = -1 if j & 1 else 1

    def ev(nu1, nu2):
        views = _forms_views(ctx, nu1, nu2)
        a = ctx.eps_views(nu1.eps)
        b = ctx.eps_views(nu2.eps)
        extra = wedge(exterior_d(a[0]), b[1])
        views[2] = views[2] + (extra if c1 > 0 else -extra)
        if partner:
            extra = wedge(exterior_d(a[1]), b[0])
            views[2] = views[2] + (extra if c2 > 0 else -extra)
        return _finish(ctx, nu1, nu2, views)

    return ev


def e7_evaluator(ctx: BundleContext) -> Evaluator:
    n = ctx.n

    def ev(nu1, nu2):
        views = _forms_views(ctx, nu1, nu2)
        a2, a5, _ = ctx.eps_views(nu1.eps)
        b2, b5, _ = ctx.eps_views(nu2.eps)
        da2 = exterior_d(a2)
        views[1] = views[1] + wedge(da2, b2)
        if n >= 7:
            top = list(views[2])
            if b5:
                for i, t in enumerate(_diamond(da2, b5)):
                    top[i] = top[i] - t
            if b2:
                for i, t in enumerate(_diamond(exterior_d(a5), b2)):
                    top[i] = top[i] + t
            views[2] = tuple(top)
        return _finish(ctx, nu1, nu2, views)

    return ev


def lie_only_evaluator(ctx: BundleContext) -> Evaluator:
    def ev(nu1, nu2):
        b = ctx.eps_views(nu2.eps)
        return _finish(ctx, nu1, nu2, [lie_derivative(nu1.X, b[0])])

    return ev


# ---------------------------------------------------------------------------
# catalog

_NAME_RE = re.compile(r"^(courant-dorfman|lie-only|e7|forms:(\d+(?:,\d+)*)|(mixed|mixed-printed):(\d+),(\d+))$")

CATALOG_NAMES = ("courant-dorfman", "forms:k", "mixed:k,j", "e7", "lie-only")


def parse_name(name: str):
    m = _NAME_RE.match(name.strip())
    if not m:
        raise BracketError(f"unknown bracket {name!r}; known: {', '.join(CATALOG_NAMES)}")
    if m.group(2):
        return "forms", tuple(int(v) for v in m.group(2).split(","))
    if m.group(3):
        return m.group(3), (int(m.group(4)), int(m.group(5)))
    return m.group(1), ()


def natural_context(name: str, n: int) -> BundleContext:
    """The fiber model a catalog bracket expects over R^n."""
    kind, args = parse_name(name)
    if kind in ("courant-dorfman", "lie-only"):
        return BundleContext.tangent(n)
    if kind == "forms":
        return BundleContext.wedge(n, args)
    if kind in ("mixed", "mixed-printed"):
        k, j = args
        return BundleContext.wedge(n, (k, j, k + j + 1))
    return BundleContext.e7(n)


def catalog(name: str, context: BundleContext | None = None, n: int | None = None) -> BracketSpec:
    kind, args = parse_name(name)
    if context is None:
        if n is None:
            raise BracketError("need a context or a base dimension")
        context = natural_context(name, n)
    expected = natural_context(name, context.n)
    if context != expected:
        raise BracketError(
            f"bracket {name!r} needs fiber model {expected.to_json()['fiber_model']!r}, got {context.to_json()['fiber_model']!r}"
        )
    if kind in ("courant-dorfman",):
        ev = forms_evaluator(context)
    elif kind == "forms":
        ev = forms_evaluator(context)
    elif kind == "mixed":
        ev = mixed_evaluator(context, *args, partner=True)
    elif kind == "mixed-printed":
        ev = mixed_evaluator(context, *args, partner=False)
    elif kind == "lie-only":
        ev = lie_only_evaluator(context)
    else:
        ev = e7_evaluator(context)
    return BracketSpec(name, context, ev)


# ---------------------------------------------------------------------------
# twists


def twist_term(mu: VectorValuedForm, X1, X2) -> Tuple[Poly, ...]:
    """Components a of ι_{X2} ι_{X1} μ."""
    z = Poly.zero(X1.nvars)
    return tuple(interior(X2, interior(X1, m)).terms.get((), z) for m in mu)


def twist(spec: BracketSpec, mu: VectorValuedForm) -> BracketSpec:
    ctx = spec.context
    if mu.degree != 2 or mu.rank != ctx.r or mu.nvars != ctx.n:
        raise BracketError(f"twist needs an E*-valued 2-form of rank {ctx.r} over {ctx.n} variables")
    base = spec.evaluate

    def ev(nu1, nu2):
        out = base(nu1, nu2)
        add = twist_term(mu, nu1.X, nu2.X)
        return AnchoredSection(out.X, tuple(p + q for p, q in zip(out.eps, add)))

    split = spec.split and mu.is_zero()
    return BracketSpec(spec.name, ctx, ev, spec.twists + (mu,), split)


# ---------------------------------------------------------------------------
# identities


def jacobiator(spec: BracketSpec, nu1, nu2, nu3) -> AnchoredSection:
    b = spec.evaluate
    return b(nu1, b(nu2, nu3)) - b(b(nu1, nu2), nu3) - b(nu2, b(nu1, nu3))


def leibniz_defect(spec: BracketSpec, nu1, nu2, f: Poly) -> AnchoredSection:
    """[[nu1, f nu2]] - f [[nu1, nu2]] - X1(f) nu2."""
    b = spec.evaluate
    return b(nu1, nu2.scale(f)) - b(nu1, nu2).scale(f) - nu2.scale(apply_vf(nu1.X, f))


def anchor_defect(spec: BracketSpec, nu1, nu2):
    return spec.evaluate(nu1, nu2).X - lie_bracket(nu1.X, nu2.X)


@dataclass
class Check:
    name: str
    holds: bool = True
    witness: Optional[dict] = None
    count: int = 0

    def record(self, residual_zero: bool, witness_fn: Callable[[], dict]) -> None:
        self.count += 1
        if self.holds and not residual_zero:
            self.holds = False
            self.witness = witness_fn()

    def to_json(self):
        if self.holds:
            return "pass"
        return {"fail": self.witness}


def diag_pair(spec: BracketSpec, nu1, nu2, ops: dict | None = None):
    """Residuals of the two Jacobi conditions for a pair (nu1, nu2).

    Condition 1: [delta_1, delta_2] - delta_{[[nu1,nu2]]}.
    Condition 2: T*M parts of ([D_1, D_2] - D_{[[nu1,nu2]]}) on the frame of E.
    """
    ops = {} if ops is None else ops

    def op(nu):
        key = id(nu)
        if key not in ops:
            ops[key] = (nu, spec.dual(nu))
        return ops[key][1]

    ctx = spec.context
    d1, d2 = op(nu1), op(nu2)
    d12 = spec.dual(spec.evaluate(nu1, nu2))
    cond1 = derivation_commutator(d1.delta(), d2.delta()) - d12.delta()
    cond2 = []
    for b in range(ctx.r):
        tau = frame_section(ctx, b)
        lhs = d1(d2(tau)) - d2(d1(tau))
        rhs = d12(tau)
        cond2.append((lhs - rhs).theta)
    return cond1, cond2


def jacobi_diagnostics(spec: BracketSpec, pairs: Iterable[Tuple[AnchoredSection, AnchoredSection]], encode=None) -> dict:
    from .serialize import encode_anchored, encode_derivation, encode_form

    c1 = Check("diag1")
    c2 = Check("diag2")
    ops: dict = {}
    for nu1, nu2 in pairs:
        r1, r2 = diag_pair(spec, nu1, nu2, ops)
        c1.record(r1.is_zero(), lambda: {
            "nu1": encode_anchored(nu1), "nu2": encode_anchored(nu2), "residual": encode_derivation(r1)})
        bad = next((b for b, t in enumerate(r2) if t), None)
        c2.record(bad is None, lambda: {
            "nu1": encode_anchored(nu1), "nu2": encode_anchored(nu2), "frame": bad,
            "residual": encode_form(r2[bad])})
    return {"diag1": c1.to_json(), "diag2": c2.to_json(), "pairs": c1.count}


def bracket_suite(spec: BracketSpec, plan, diag_plan=None) -> dict:
    """Leibniz (slot 2), anchor, Jacobi and the two Jacobi conditions on a sample plan.

    ``diag_plan`` defaults to ``plan``; the diagnostics are the costliest part,
    so callers may pass a smaller plan.
    """
    from .serialize import encode_anchored, encode_form, encode_poly

    ctx = spec.context
    S = plan.sampler(ctx)
    leib = Check("leibniz2")
    anch = Check("anchor")
    for label, (n1, n2) in plan.pairs(ctx):
        k = label.get("trial", sum(label.get("generator", [0])))
        fs = [S.function(k)] + ([ctx.x(k % ctx.n)] if "generator" in label else [])
        for f in fs:
            res = leibniz_defect(spec, n1, n2, f)
            leib.record(res.is_zero(), lambda: {
                "sample": label, "nu1": encode_anchored(n1), "nu2": encode_anchored(n2),
                "f": encode_poly(f), "residual": encode_anchored(res)})
        a = anchor_defect(spec, n1, n2)
        anch.record(a.is_zero(), lambda: {
            "sample": label, "nu1": encode_anchored(n1), "nu2": encode_anchored(n2), "residual": encode_form(a)})
    jac = Check("jacobi")
    for label, (n1, n2, n3) in plan.triples(ctx):
        J = jacobiator(spec, n1, n2, n3)
        jac.record(J.is_zero(), lambda: {
            "sample": label, "sections": [encode_anchored(s) for s in (n1, n2, n3)], "jacobiator": encode_anchored(J)})
    diag = jacobi_diagnostics(spec, (p for _, p in (diag_plan or plan).pairs(ctx)))
    return {
        "leibniz2": leib.to_json(),
        "anchor": anch.to_json(),
        "jacobi": jac.to_json(),
        "diag1": diag["diag1"],
        "diag2": diag["diag2"],
        "counts": {"pairs": anch.count, "triples": jac.count, "diag_pairs": diag["pairs"]},
        "method": plan.method(ctx, 3),
    }


def suite_holds(report: dict) -> bool:
    return all(report[k] == "pass" for k in ("leibniz2", "anchor", "jacobi", "diag1", "diag2"))
