"""Calculus on the total space of E, coordinatized as R^(n+r).

Variables 0..n-1 are base coordinates x, variables n..n+r-1 are fiber
coordinates u (one per frame element of E, so u_a is the linear function
of the dual frame element eps^a).  The 1-form basis is dx followed by du.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .bundle import AnchoredSection, BundleContext, CoSection, Derivation
from .cartan import (
    Form,
    Multivector,
    VectorValuedForm,
    exterior_d,
    function_form,
    interior,
    lie_bracket,
    lie_derivative,
    pullback_extend,
    restrict_base,
)
from .scalar import Poly


class NotLinearError(ValueError):
    """The input is not linear over the base; ``witness`` pins the offending term."""

    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness or {}


@dataclass(frozen=True, eq=True)
class GeneralizedSection:
    """A section (V, A) of TE + T*E."""

    V: Multivector
    A: Form

    def __post_init__(self):
        if self.V.degree != 1 or self.A.degree != 1 or self.V.nvars != self.A.nvars:
            raise ValueError("need a vector field and a 1-form on the same space")

    @classmethod
    def zero(cls, N: int) -> "GeneralizedSection":
        return cls(Multivector.zero(N, 1), Form.zero(N, 1))

    @property
    def nvars(self) -> int:
        return self.V.nvars

    def __add__(self, o):
        return GeneralizedSection(self.V + o.V, self.A + o.A)

    def __neg__(self):
        return GeneralizedSection(-self.V, -self.A)

    def __sub__(self, o):
        return self + (-o)

    def is_zero(self) -> bool:
        return self.V.is_zero() and self.A.is_zero()

    def __bool__(self):
        return not self.is_zero()


# ---------------------------------------------------------------------------
# coordinates


def pull(ctx: BundleContext, p: Poly) -> Poly:
    return p.extend(ctx.total_vars)


def pull_form(ctx: BundleContext, a):
    return pullback_extend(a, ctx.total_vars)


def u(ctx: BundleContext, a: int) -> Poly:
    return Poly.var(ctx.total_vars, ctx.n + a)


def _fiber_partial(ctx, a, coeff) -> Multivector:
    return Multivector._raw(ctx.total_vars, 1, {(ctx.n + a,): coeff} if coeff else {})


def ell(ctx: BundleContext, eps: Sequence[Poly]) -> Poly:
    """The fiberwise linear function l_eps = sum_a eps_a u_a."""
    total = Poly.zero(ctx.total_vars)
    for a, e in enumerate(eps):
        if e:
            total = total + pull(ctx, e) * u(ctx, a)
    return total


def d_ell(ctx: BundleContext, eps: Sequence[Poly]) -> Form:
    return exterior_d(function_form(ell(ctx, eps)))


def core_linear(ctx: BundleContext, phi: Sequence[Sequence[Poly]]) -> Form:
    """sum_{a,i} phi[a][i] u_a dx_i, for phi in Hom(E, T*M) with phi(e_a) = sum_i phi[a][i] dx_i."""
    N = ctx.total_vars
    terms = {}
    for i in range(ctx.n):
        c = Poly.zero(N)
        for a in range(ctx.r):
            if phi[a][i]:
                c = c + pull(ctx, phi[a][i]) * u(ctx, a)
        if c:
            terms[(i,)] = c
    return Form._raw(N, 1, terms)


def lam(ctx: BundleContext, omega: VectorValuedForm) -> Form:
    """Lambda_omega = sum_a u_a (pullback of omega^a)."""
    out = Form.zero(ctx.total_vars, omega.degree)
    for a, w in enumerate(omega):
        if w:
            out = out + pull_form(ctx, w).scale(u(ctx, a))
    return out


def phi_to_vvform(ctx: BundleContext, phi: Sequence[Sequence[Poly]]) -> VectorValuedForm:
    """The same r x n array read as an E*-valued 1-form (so core_linear = lam of it)."""
    return VectorValuedForm(Form(ctx.n, 1, {(i,): phi[a][i] for i in range(ctx.n) if phi[a][i]}) for a in range(ctx.r))


def vvform_to_phi(ctx: BundleContext, w: VectorValuedForm) -> Tuple[Tuple[Poly, ...], ...]:
    z = ctx.zero()
    return tuple(tuple(w[a].terms.get((i,), z) for i in range(ctx.n)) for a in range(ctx.r))


def linear_vf(ctx: BundleContext, D: Derivation) -> Multivector:
    """D-hat = sum_i X^i d/dx_i - sum_{a,b} A[a][b] u_b d/du_a."""
    N = ctx.total_vars
    terms = {(i,): pull(ctx, c) for (i,), c in D.symbol.terms.items()}
    for a in range(ctx.r):
        c = Poly.zero(N)
        for b in range(ctx.r):
            m = D.matrix[a][b]
            if m:
                c = c - pull(ctx, m) * u(ctx, b)
        if c:
            terms[(ctx.n + a,)] = c
    return Multivector._raw(N, 1, terms)


def vertical_lift(ctx: BundleContext, tau: CoSection) -> GeneralizedSection:
    N = ctx.total_vars
    V = Multivector._raw(N, 1, {(ctx.n + a,): pull(ctx, e) for a, e in enumerate(tau.e) if e})
    return GeneralizedSection(V, pull_form(ctx, tau.theta))


def vector_lift(ctx: BundleContext, e: Sequence[Poly]) -> Multivector:
    return vertical_lift(ctx, CoSection.build(ctx, e=e)).V


def base_function(ctx: BundleContext, p: Poly) -> Poly:
    return pull(ctx, p)


# ---------------------------------------------------------------------------
# the standard Courant algebroid on E


def courant_dorfman_total(chi1: GeneralizedSection, chi2: GeneralizedSection, H: Form | None = None) -> GeneralizedSection:
    """([V1,V2], L_{V1} A2 - ι_{V2} dA1), plus (0, ι_{V2} ι_{V1} H) when a 3-form H is given."""
    V = lie_bracket(chi1.V, chi2.V)
    A = lie_derivative(chi1.V, chi2.A) - interior(chi2.V, exterior_d(chi1.A))
    if H is not None:
        A = A + interior(chi2.V, interior(chi1.V, H))
    return GeneralizedSection(V, A)


def pairing_total(chi1: GeneralizedSection, chi2: GeneralizedSection) -> Poly:
    N = chi1.nvars
    z = Poly.zero(N)
    return interior(chi2.V, chi1.A).terms.get((), z) + interior(chi1.V, chi2.A).terms.get((), z)


def b_transform(B: Form, chi: GeneralizedSection) -> GeneralizedSection:
    if B.degree != 2:
        raise ValueError("B must be a 2-form")
    return GeneralizedSection(chi.V, chi.A + interior(chi.V, B))


# ---------------------------------------------------------------------------
# linearity and decomposition


def _u_split(ctx: BundleContext, p: Poly):
    return p.degree_in(range(ctx.n, ctx.total_vars))


def _monomial_witness(ctx, p: Poly, where: str) -> dict:
    e, c = p.sorted_terms()[0]
    from .serialize import encode_poly

    return {"location": where, "monomial": encode_poly(Poly._raw(p.nvars, {e: c}))}


def _at_zero_section(ctx: BundleContext, p: Poly) -> Poly:
    keep = {e: c for e, c in p.terms.items() if not any(e[ctx.n:])}
    return Poly._raw(ctx.total_vars, keep).restrict(ctx.n)


def _require_u_degree(ctx, p: Poly, degree: int, where: str) -> None:
    for k, part in _u_split(ctx, p).items():
        if k != degree:
            raise NotLinearError(f"not linear: {where} has a term of fiber degree {k}", _monomial_witness(ctx, part, where))


def linearity_violation(ctx: BundleContext, chi: GeneralizedSection) -> Optional[dict]:
    try:
        _check_linear(ctx, chi)
    except NotLinearError as exc:
        return {"message": str(exc), **exc.witness}
    return None


def _check_linear(ctx: BundleContext, chi: GeneralizedSection) -> None:
    if chi.nvars != ctx.total_vars:
        raise NotLinearError(f"section lives on {chi.nvars} variables, expected {ctx.total_vars}")
    n = ctx.n
    for (j,), c in chi.V.terms.items():
        if j < n:
            _require_u_degree(ctx, c, 0, f"V[{j}]")
        else:
            _require_u_degree(ctx, c, 1, f"V[{j}]")
    for (j,), c in chi.A.terms.items():
        if j < n:
            _require_u_degree(ctx, c, 1, f"A[{j}]")
        else:
            _require_u_degree(ctx, c, 0, f"A[{j}]")


def is_linear(ctx: BundleContext, chi: GeneralizedSection) -> bool:
    return linearity_violation(ctx, chi) is None


def is_core(ctx: BundleContext, chi: GeneralizedSection) -> bool:
    """Fiberwise constant: V has no base components, everything u-free, no du part in A."""
    n = ctx.n
    for (j,), c in chi.V.terms.items():
        if j < n or set(_u_split(ctx, c)) != {0}:
            return False
    for (j,), c in chi.A.terms.items():
        if j >= n or set(_u_split(ctx, c)) != {0}:
            return False
    return True


def is_core_linear_form(ctx: BundleContext, A: Form) -> bool:
    """A 1-form sum phi[a][i] u_a dx_i: no du part, dx coefficients homogeneous of fiber degree 1."""
    for (j,), c in A.terms.items():
        if j >= ctx.n or set(_u_split(ctx, c)) != {1}:
            return False
    return True


def phi_E(ctx: BundleContext, chi: GeneralizedSection) -> AnchoredSection:
    """(X, eps): base part of V and du part of A, both along the zero section."""
    n = ctx.n
    X = Multivector(n, 1, {(j,): _at_zero_section(ctx, c) for (j,), c in chi.V.terms.items() if j < n})
    z = ctx.zero()
    eps = tuple(_at_zero_section(ctx, chi.A.terms[(n + a,)]) if (n + a,) in chi.A.terms else z for a in range(ctx.r))
    return AnchoredSection(X, eps)


@dataclass(frozen=True, eq=True)
class LinearSectionDecomp:
    """chi = (D-hat_d, d l_eps - phi~)."""

    d: Derivation
    eps: Tuple[Poly, ...]
    phi: Tuple[Tuple[Poly, ...], ...]

    def reconstruct(self, ctx: BundleContext) -> GeneralizedSection:
        return GeneralizedSection(linear_vf(ctx, self.d), d_ell(ctx, self.eps) - core_linear(ctx, self.phi))


def decompose_linear(ctx: BundleContext, chi: GeneralizedSection) -> LinearSectionDecomp:
    _check_linear(ctx, chi)
    n, r = ctx.n, ctx.r
    z = ctx.zero()
    X = Multivector(n, 1, {(j,): c.restrict(n) for (j,), c in chi.V.terms.items() if j < n})
    rows = []
    for a in range(r):
        c = chi.V.terms.get((n + a,))
        row = []
        for b in range(r):
            row.append(-(c.coefficient_of({n + b: 1}).restrict(n)) if c is not None else z)
        rows.append(tuple(row))
    eps = tuple(chi.A.terms[(n + a,)].restrict(n) if (n + a,) in chi.A.terms else z for a in range(r))
    phi = []
    for a in range(r):
        grads = eps[a].partials()
        row = []
        for i in range(n):
            Ai = chi.A.terms.get((i,))
            lin = Ai.coefficient_of({n + a: 1}).restrict(n) if Ai is not None else z
            row.append(grads.get(i, z) - lin)
        phi.append(tuple(row))
    return LinearSectionDecomp(Derivation(X, tuple(rows)), eps, tuple(phi))


# ---------------------------------------------------------------------------
# linear k-forms


@dataclass(frozen=True, eq=True)
class LinearKFormDecomp:
    """H = d Lambda_mu + Lambda_omega."""

    mu: VectorValuedForm
    omega: VectorValuedForm

    def reconstruct(self, ctx: BundleContext) -> Form:
        return exterior_d(lam(ctx, self.mu)) + lam(ctx, self.omega)


def decompose_linear_kform(ctx: BundleContext, H: Form) -> LinearKFormDecomp:
    n, r, N = ctx.n, ctx.r, ctx.total_vars
    k = H.degree
    if k < 1:
        raise NotLinearError("linear forms of degree 0 are the functions l_eps; need degree >= 1")
    if H.nvars != N:
        raise NotLinearError(f"form lives on {H.nvars} variables, expected {N}")
    mu_terms = [dict() for _ in range(r)]
    lin_terms = [dict() for _ in range(r)]
    sign = -1 if (k - 1) & 1 else 1
    for I, c in H.terms.items():
        fiber = [i for i in I if i >= n]
        where = f"H{list(I)}"
        if len(fiber) > 1:
            raise NotLinearError("not a linear form: term with more than one du factor",
                                 _monomial_witness(ctx, c, where))
        if fiber:
            _require_u_degree(ctx, c, 0, where)
            a = fiber[0] - n
            mu_terms[a][I[:-1]] = c.restrict(n) if sign > 0 else -c.restrict(n)
        else:
            _require_u_degree(ctx, c, 1, where)
            for a in range(r):
                part = c.coefficient_of({n + a: 1})
                if part:
                    lin_terms[a][I] = part.restrict(n)
    mu = VectorValuedForm(Form(n, k - 1, t) for t in mu_terms)
    omega = VectorValuedForm(Form(n, k, t) - exterior_d(m) for t, m in zip(lin_terms, mu))
    return LinearKFormDecomp(mu, omega)


def is_closed_linear(ctx: BundleContext, H: Form) -> bool:
    return decompose_linear_kform(ctx, H).omega.is_zero()
