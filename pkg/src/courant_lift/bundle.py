"""Trivialized bundle E = R^n x R^r, sections of TM + E* and E + T*M, derivations.

Fiber models describe what E stands for.  A ``wedge`` block of degree k is
the bundle of k-vectors with frame d_I (I increasing, lexicographic order);
an ``e7top`` block is the bundle of top-degree 7-vectors tensored with TM,
framed by pairs (I, i).  E* carries the dual frames.  Components are always
stored flat; ``eps_views`` and ``e_views`` convert to geometric objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Callable, Dict, List, Sequence, Tuple

from .cartan import (
    CartanError,
    Form,
    Multivector,
    apply_vf,
    coordinate_vector,
    interior,
    lie_bracket,
    lie_derivative,
    one_form,
    vector_field,
)
from .scalar import Poly


class BundleError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    kind: str  # "generic" | "wedge" | "e7top"
    degree: int
    keys: Tuple


@dataclass(frozen=True)
class BundleContext:
    n: int
    r: int
    fiber_model: object = "generic"
    blocks: Tuple[Block, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "fiber_model", parse_fiber_model(self.fiber_model))
        if self.n < 1:
            raise BundleError("base dimension n must be at least 1")
        blocks = _build_blocks(self.n, self.r, self.fiber_model)
        induced = sum(len(b.keys) for b in blocks)
        if induced != self.r:
            raise BundleError(f"fiber model {self.fiber_model!r} over n={self.n} has rank {induced}, not r={self.r}")
        if self.r < 1:
            raise BundleError("fiber rank r must be at least 1")
        object.__setattr__(self, "blocks", blocks)
        offsets, o = [], 0
        for b in blocks:
            offsets.append(o)
            o += len(b.keys)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @classmethod
    def generic(cls, n: int, r: int) -> "BundleContext":
        return cls(n, r, "generic")

    @classmethod
    def wedge(cls, n: int, degrees: Sequence[int]) -> "BundleContext":
        model = ("wedge", tuple(degrees))
        return cls(n, _induced_rank(n, model), model)

    @classmethod
    def tangent(cls, n: int) -> "BundleContext":
        return cls.wedge(n, (1,))

    @classmethod
    def e7(cls, n: int = 7) -> "BundleContext":
        return cls(n, _induced_rank(n, "e7"), "e7")

    @property
    def total_vars(self) -> int:
        return self.n + self.r

    def block_offsets(self) -> Tuple[int, ...]:
        return self._offsets

    def is_wedge(self, degrees: Sequence[int] | None = None) -> bool:
        if not (isinstance(self.fiber_model, tuple) and self.fiber_model[0] == "wedge"):
            return False
        return degrees is None or tuple(degrees) == self.fiber_model[1]

    def is_e7(self) -> bool:
        return self.fiber_model == "e7"

    # polynomial helpers on the base
    def zero(self) -> Poly:
        return Poly.zero(self.n)

    def one(self) -> Poly:
        return Poly.const(self.n, 1)

    def x(self, i: int) -> Poly:
        return Poly.var(self.n, i)

    def partial(self, i: int) -> Multivector:
        return coordinate_vector(self.n, i, self.one())

    # geometric views
    def eps_views(self, eps: Sequence[Poly]) -> List:
        """Split flat E* components into one geometric object per block."""
        return self._views(eps, Form)

    def e_views(self, e: Sequence[Poly]) -> List:
        return self._views(e, Multivector)

    def eps_from_views(self, views: Sequence) -> Tuple[Poly, ...]:
        return self._from_views(views)

    def e_from_views(self, views: Sequence) -> Tuple[Poly, ...]:
        return self._from_views(views)

    def _views(self, comps, cls) -> List:
        if len(comps) != self.r:
            raise BundleError(f"expected {self.r} components, got {len(comps)}")
        out = []
        for b, off in zip(self.blocks, self._offsets):
            chunk = comps[off:off + len(b.keys)]
            if b.kind == "generic":
                out.append(tuple(chunk))
            elif b.kind == "wedge":
                out.append(cls._raw(self.n, b.degree, {I: c for I, c in zip(b.keys, chunk) if c}))
            else:
                per = [dict() for _ in range(self.n)]
                for (I, i), c in zip(b.keys, chunk):
                    if c:
                        per[i][I] = c
                out.append(tuple(cls._raw(self.n, 7, t) for t in per))
        return out

    def _from_views(self, views) -> Tuple[Poly, ...]:
        if len(views) != len(self.blocks):
            raise BundleError("wrong number of block views")
        z = self.zero()
        out: List[Poly] = []
        for b, v in zip(self.blocks, views):
            if b.kind == "generic":
                out.extend(v)
            elif b.kind == "wedge":
                if v.degree != b.degree or v.nvars != self.n:
                    raise BundleError(f"block of degree {b.degree} got degree {v.degree}")
                out.extend(v.terms.get(I, z) for I in b.keys)
            else:
                out.extend(v[i].terms.get(I, z) for I, i in b.keys)
        return tuple(out)

    def to_json(self) -> dict:
        if self.fiber_model == "generic":
            fm = "generic"
        elif self.fiber_model == "e7":
            fm = "e7"
        else:
            fm = {"wedge": list(self.fiber_model[1])}
        return {"n": self.n, "r": self.r, "fiber_model": fm}

    @classmethod
    def from_json(cls, obj) -> "BundleContext":
        try:
            n, r, fm = obj["n"], obj["r"], obj.get("fiber_model", "generic")
        except (KeyError, TypeError) as exc:
            raise BundleError("context needs 'n' and 'r'") from exc
        return cls(n, r, parse_fiber_model(fm))


def parse_fiber_model(fm):
    if fm in ("generic", "e7"):
        return fm
    if isinstance(fm, dict) and set(fm) == {"wedge"} and isinstance(fm["wedge"], list):
        degs = fm["wedge"]
        if not degs or not all(isinstance(k, int) and k >= 0 for k in degs):
            raise BundleError("fiber_model.wedge must list non-negative degrees")
        return ("wedge", tuple(degs))
    if isinstance(fm, tuple) and len(fm) == 2 and fm[0] == "wedge":
        return ("wedge", tuple(fm[1]))
    raise BundleError(f"unknown fiber_model {fm!r}")


def _induced_rank(n: int, model) -> int:
    return sum(len(b.keys) for b in _build_blocks(n, None, model))


def _build_blocks(n: int, r, model) -> Tuple[Block, ...]:
    model = parse_fiber_model(model)
    if model == "generic":
        return (Block("generic", 0, tuple(range(r or 0))),)
    if model == "e7":
        top = tuple((I, i) for I in combinations(range(n), 7) for i in range(n))
        return (
            Block("wedge", 2, tuple(combinations(range(n), 2))),
            Block("wedge", 5, tuple(combinations(range(n), 5))),
            Block("e7top", 7, top),
        )
    return tuple(Block("wedge", k, tuple(combinations(range(n), k))) for k in model[1])


# ---------------------------------------------------------------------------
# sections


def _polys(seq, n, what) -> Tuple[Poly, ...]:
    out = tuple(seq)
    for p in out:
        if not isinstance(p, Poly) or p.nvars != n:
            raise BundleError(f"{what} components must be polynomials in {n} variables")
    return out


@dataclass(frozen=True, eq=True)
class AnchoredSection:
    """A section (X, eps) of TM + E*."""

    X: Multivector
    eps: Tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "eps", _polys(self.eps, self.X.nvars, "eps"))
        if self.X.degree != 1 or not isinstance(self.X, Multivector):
            raise BundleError("X must be a vector field")

    @classmethod
    def zero(cls, ctx: BundleContext) -> "AnchoredSection":
        return cls(Multivector.zero(ctx.n, 1), (ctx.zero(),) * ctx.r)

    @classmethod
    def build(cls, ctx: BundleContext, X=None, eps=None) -> "AnchoredSection":
        X = Multivector.zero(ctx.n, 1) if X is None else X
        eps = (ctx.zero(),) * ctx.r if eps is None else tuple(eps)
        if len(eps) != ctx.r:
            raise BundleError(f"expected {ctx.r} eps components")
        return cls(X, eps)

    @classmethod
    def from_views(cls, ctx: BundleContext, X, views) -> "AnchoredSection":
        return cls.build(ctx, X, ctx.eps_from_views(views))

    def __add__(self, o):
        return AnchoredSection(self.X + o.X, tuple(a + b for a, b in zip(self.eps, o.eps)))

    def __neg__(self):
        return AnchoredSection(-self.X, tuple(-a for a in self.eps))

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f) -> "AnchoredSection":
        return AnchoredSection(self.X.scale(f), tuple(a * f for a in self.eps))

    def is_zero(self) -> bool:
        return self.X.is_zero() and not any(self.eps)

    def __bool__(self):
        return not self.is_zero()


@dataclass(frozen=True, eq=True)
class CoSection:
    """A section (e, theta) of E + T*M."""

    e: Tuple[Poly, ...]
    theta: Form

    def __post_init__(self):
        object.__setattr__(self, "e", _polys(self.e, self.theta.nvars, "e"))
        if self.theta.degree != 1 or not isinstance(self.theta, Form):
            raise BundleError("theta must be a 1-form")

    @classmethod
    def zero(cls, ctx: BundleContext) -> "CoSection":
        return cls((ctx.zero(),) * ctx.r, Form.zero(ctx.n, 1))

    @classmethod
    def build(cls, ctx: BundleContext, e=None, theta=None) -> "CoSection":
        e = (ctx.zero(),) * ctx.r if e is None else tuple(e)
        theta = Form.zero(ctx.n, 1) if theta is None else theta
        if len(e) != ctx.r:
            raise BundleError(f"expected {ctx.r} e components")
        return cls(e, theta)

    def __add__(self, o):
        return CoSection(tuple(a + b for a, b in zip(self.e, o.e)), self.theta + o.theta)

    def __neg__(self):
        return CoSection(tuple(-a for a in self.e), -self.theta)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f) -> "CoSection":
        return CoSection(tuple(a * f for a in self.e), self.theta.scale(f))

    def is_zero(self) -> bool:
        return self.theta.is_zero() and not any(self.e)

    def __bool__(self):
        return not self.is_zero()


def basis_anchored(ctx: BundleContext) -> List[AnchoredSection]:
    """(d_i, 0) for i < n, then (0, eps^a) for a < r."""
    out = [AnchoredSection.build(ctx, X=ctx.partial(i)) for i in range(ctx.n)]
    for a in range(ctx.r):
        eps = [ctx.zero()] * ctx.r
        eps[a] = ctx.one()
        out.append(AnchoredSection.build(ctx, eps=eps))
    return out


def frame_section(ctx: BundleContext, b: int, coeff: Poly | None = None) -> CoSection:
    e = [ctx.zero()] * ctx.r
    e[b] = ctx.one() if coeff is None else coeff
    return CoSection.build(ctx, e=e)


def theta_of(X: Multivector, theta: Form) -> Poly:
    return interior(X, theta).terms.get((), Poly.zero(X.nvars))


def pairing(nu: AnchoredSection, tau: CoSection) -> Poly:
    """<(X, eps), (e, theta)> = eps(e) + theta(X)."""
    if len(nu.eps) != len(tau.e) or nu.X.nvars != tau.theta.nvars:
        raise BundleError("pairing across different contexts")
    total = theta_of(nu.X, tau.theta)
    for a, b in zip(nu.eps, tau.e):
        if a and b:
            total = total + a * b
    return total


def symmetric_pairing(nu1: AnchoredSection, nu2: AnchoredSection) -> Poly:
    """<(X1,t1),(X2,t2)> = t1(X2) + t2(X1) for E = TM (no factor 1/2)."""
    n = nu1.X.nvars
    t1 = one_form(n, {i: c for i, c in enumerate(nu1.eps)})
    t2 = one_form(n, {i: c for i, c in enumerate(nu2.eps)})
    return theta_of(nu2.X, t1) + theta_of(nu1.X, t2)


# ---------------------------------------------------------------------------
# derivations


def _matrix(rows, r: int, n: int) -> Tuple[Tuple[Poly, ...], ...]:
    m = tuple(tuple(row) for row in rows)
    if len(m) != r or any(len(row) != r for row in m):
        raise BundleError(f"matrix must be {r}x{r}")
    for row in m:
        _polys(row, n, "matrix")
    return m


@dataclass(frozen=True, eq=True)
class Derivation:
    """D(e)^a = X(e^a) + sum_b matrix[a][b] e^b on sections of a trivial bundle."""

    symbol: Multivector
    matrix: Tuple[Tuple[Poly, ...], ...]

    def __post_init__(self):
        r = len(self.matrix)
        object.__setattr__(self, "matrix", _matrix(self.matrix, r, self.symbol.nvars))

    @classmethod
    def zero(cls, n: int, r: int) -> "Derivation":
        z = Poly.zero(n)
        return cls(Multivector.zero(n, 1), tuple((z,) * r for _ in range(r)))

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def nvars(self) -> int:
        return self.symbol.nvars

    def apply(self, e: Sequence[Poly]) -> Tuple[Poly, ...]:
        out = []
        for a in range(self.rank):
            v = apply_vf(self.symbol, e[a])
            for b, m in enumerate(self.matrix[a]):
                if m and e[b]:
                    v = v + m * e[b]
            out.append(v)
        return tuple(out)

    def dual(self) -> "Derivation":
        r = self.rank
        return Derivation(self.symbol, tuple(tuple(-self.matrix[b][a] for b in range(r)) for a in range(r)))

    def __add__(self, o):
        return Derivation(
            self.symbol + o.symbol,
            tuple(tuple(p + q for p, q in zip(r1, r2)) for r1, r2 in zip(self.matrix, o.matrix)),
        )

    def __neg__(self):
        return Derivation(-self.symbol, tuple(tuple(-p for p in row) for row in self.matrix))

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f) -> "Derivation":
        return Derivation(self.symbol.scale(f), tuple(tuple(p * f for p in row) for row in self.matrix))

    def is_zero(self) -> bool:
        return self.symbol.is_zero() and not any(p for row in self.matrix for p in row)


def derivation_commutator(D1: Derivation, D2: Derivation) -> Derivation:
    r = D1.rank
    if D2.rank != r or D1.nvars != D2.nvars:
        raise BundleError("derivations over different bundles")
    A1, A2 = D1.matrix, D2.matrix
    rows = []
    for a in range(r):
        row = []
        for b in range(r):
            v = apply_vf(D1.symbol, A2[a][b]) - apply_vf(D2.symbol, A1[a][b])
            for c in range(r):
                if A1[a][c] and A2[c][b]:
                    v = v + A1[a][c] * A2[c][b]
                if A2[a][c] and A1[c][b]:
                    v = v - A2[a][c] * A1[c][b]
            row.append(v)
        rows.append(tuple(row))
    return Derivation(lie_bracket(D1.symbol, D2.symbol), tuple(rows))


def derivation_dual(D: Derivation) -> Derivation:
    return D.dual()


@dataclass(frozen=True)
class CoDerivation:
    """D(e, theta) = (base(e), sum_b e^b phi_b + L_X theta)."""

    base: Derivation
    phi: Tuple[Form, ...]

    def apply(self, tau: CoSection) -> CoSection:
        e = self.base.apply(tau.e)
        theta = lie_derivative(self.base.symbol, tau.theta)
        for b, f in enumerate(self.phi):
            if tau.e[b]:
                theta = theta + f.scale(tau.e[b])
        return CoSection(e, theta)

    def phi_array(self) -> Tuple[Tuple[Poly, ...], ...]:
        """phi[b][i] with phi(e_b) = sum_i phi[b][i] dx^i."""
        n = self.base.nvars
        z = Poly.zero(n)
        return tuple(tuple(f.terms.get((i,), z) for i in range(n)) for f in self.phi)


# ---------------------------------------------------------------------------
# the dual derivation of a bracket


class NotADerivation(BundleError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class DualOperator:
    """The operator tau -> D_nu tau for a fixed nu, defined by

        X <nu', tau> = <nu', D_nu tau> + <[[nu, nu']], tau>

    and computed by evaluating against the coordinate basis of TM + E*.
    Brackets with the n + r basis sections are computed once.
    """

    def __init__(self, bracket: Callable, ctx: BundleContext, nu: AnchoredSection):
        self.ctx = ctx
        self.nu = nu
        basis = basis_anchored(ctx)
        self._brackets = [bracket(nu, b) for b in basis]

    def __call__(self, tau: CoSection) -> CoSection:
        ctx, X = self.ctx, self.nu.X
        n = ctx.n
        theta_comps = {}
        for i in range(n):
            c = tau.theta.terms.get((i,))
            v = apply_vf(X, c) if c is not None else ctx.zero()
            v = v - pairing(self._brackets[i], tau)
            if v:
                theta_comps[i] = v
        e = []
        for a in range(ctx.r):
            v = apply_vf(X, tau.e[a]) - pairing(self._brackets[n + a], tau)
            e.append(v)
        return CoSection(tuple(e), one_form(n, theta_comps))

    def delta(self) -> Derivation:
        """pr_E o D_nu o iota_E as a derivation of E."""
        n, r = self.ctx.n, self.ctx.r
        rows = tuple(tuple(-self._brackets[n + a].eps[b] for b in range(r)) for a in range(r))
        return Derivation(self.nu.X, rows)

    def phi(self) -> Tuple[Tuple[Poly, ...], ...]:
        """phi[b][i]: dx^i coefficient of pr_{T*M} D_nu(e_b, 0)."""
        n, r = self.ctx.n, self.ctx.r
        return tuple(tuple(-self._brackets[i].eps[b] for i in range(n)) for b in range(r))

    def co_derivation(self) -> CoDerivation:
        n = self.ctx.n
        return CoDerivation(self.delta(), tuple(one_form(n, row) for row in self.phi()))


def _bracket_and_context(bracket, ctx=None):
    ctx = ctx or getattr(bracket, "context", None)
    if ctx is None:
        raise BundleError("bracket carries no context")
    return bracket, ctx


def dual_derivation(bracket, nu: AnchoredSection, tau: CoSection, ctx: BundleContext | None = None) -> CoSection:
    bracket, ctx = _bracket_and_context(bracket, ctx)
    _check_section(ctx, nu)
    return DualOperator(bracket, ctx, nu)(tau)


def delta(bracket, nu: AnchoredSection, ctx: BundleContext | None = None, check: bool = False) -> Derivation:
    """The derivation delta_nu of E.  With ``check``, confirm the Leibniz rule on coordinate multiples."""
    bracket, ctx = _bracket_and_context(bracket, ctx)
    _check_section(ctx, nu)
    op = DualOperator(bracket, ctx, nu)
    d = op.delta()
    if check:
        for b in range(ctx.r):
            for i in range(ctx.n):
                tau = frame_section(ctx, b, ctx.x(i))
                got = op(tau).e
                if got != d.apply(tau.e):
                    raise NotADerivation(
                        "delta fails the derivation Leibniz test; the bracket is not anchored",
                        witness={"frame": b, "variable": i},
                    )
    return d


def _check_section(ctx: BundleContext, nu: AnchoredSection) -> None:
    if nu.X.nvars != ctx.n or len(nu.eps) != ctx.r:
        raise BundleError("section does not belong to this context")


def derivation_on_vvforms(D: Derivation, omega) -> "VectorValuedForm":
    """Action of D on E*-valued forms: (D omega)^b = L_X omega^b - sum_a A[a][b] omega^a.

    On 1-forms this is (D omega)(Y) = D*(omega(Y)) - omega([X, Y]).
    """
    from .cartan import VectorValuedForm

    out = []
    for b in range(D.rank):
        w = lie_derivative(D.symbol, omega[b])
        for a in range(D.rank):
            m = D.matrix[a][b]
            if m and omega[a]:
                w = w - omega[a].scale(m)
        out.append(w)
    return VectorValuedForm(out)
