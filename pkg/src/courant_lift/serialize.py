"""JSON encodings for every value type, with path-qualified validation errors."""

from __future__ import annotations

import json
from typing import Any, Sequence

from .bundle import AnchoredSection, BundleContext, BundleError, CoSection, Derivation
from .cartan import CartanError, Form, Graded, Multivector, VectorValuedForm, from_higher_form
from .scalar import FourierPoly, Poly, ScalarError


class InputError(ValueError):
    """Malformed input; ``path`` locates the offending value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _need(obj, key, path):
    if not isinstance(obj, dict):
        raise InputError(path, "expected an object")
    if key not in obj:
        raise InputError(f"{path}.{key}", "missing")
    return obj[key]


def _list(obj, path) -> list:
    if not isinstance(obj, list):
        raise InputError(path, "expected a list")
    return obj


# scalars -------------------------------------------------------------------


def encode_poly(p: Poly) -> dict:
    return p.to_json()


def decode_poly(obj, path: str = "$", nvars: int | None = None) -> Poly:
    try:
        p = Poly.from_json(obj)
    except ScalarError as exc:
        raise InputError(path, str(exc)) from None
    if nvars is not None and p.nvars != nvars:
        raise InputError(f"{path}.nvars", f"expected {nvars}, got {p.nvars}")
    return p


def encode_fourier(p: FourierPoly) -> dict:
    return p.to_json()


def decode_fourier(obj, path: str = "$") -> FourierPoly:
    try:
        return FourierPoly.from_json(obj)
    except ScalarError as exc:
        raise InputError(path, str(exc)) from None


# graded --------------------------------------------------------------------


def encode_form(a: Graded) -> dict:
    out = {
        "degree": a.degree,
        "terms": [{"idx": list(I), "coeff": c.to_json()} for I, c in a.sorted_terms()],
    }
    if isinstance(a, Multivector):
        out["kind"] = "multivector"
    return out


def decode_graded(obj, path: str, nvars: int, kind: str = "form", scalar: str = "poly") -> Graded:
    deg = _need(obj, "degree", path)
    if not isinstance(deg, int) or isinstance(deg, bool) or deg < 0:
        raise InputError(f"{path}.degree", "must be a non-negative integer")
    declared = obj.get("kind", "form")
    if declared not in ("form", "multivector"):
        raise InputError(f"{path}.kind", f"unknown kind {declared!r}")
    if declared != kind:
        raise InputError(f"{path}.kind", f"expected a {kind}, got a {declared}")
    cls = Multivector if kind == "multivector" else Form
    terms = {}
    for k, t in enumerate(_list(_need(obj, "terms", path), f"{path}.terms")):
        tp = f"{path}.terms[{k}]"
        idx = _need(t, "idx", tp)
        if not isinstance(idx, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise InputError(f"{tp}.idx", "must be a list of integers")
        if any(idx[m] >= idx[m + 1] for m in range(len(idx) - 1)):
            raise InputError(f"{tp}.idx", "indices not strictly increasing")
        if len(idx) != deg:
            raise InputError(f"{tp}.idx", f"expected {deg} indices")
        if any(i < 0 or i >= nvars for i in idx):
            raise InputError(f"{tp}.idx", f"index out of range for {nvars} variables")
        craw = _need(t, "coeff", tp)
        c = decode_fourier(craw, f"{tp}.coeff") if scalar == "fourier" else decode_poly(craw, f"{tp}.coeff", nvars)
        key = tuple(idx)
        if key in terms:
            raise InputError(f"{tp}.idx", "duplicate index tuple")
        terms[key] = c
    try:
        return cls(nvars, deg, terms)
    except CartanError as exc:
        raise InputError(path, str(exc)) from None


def decode_form(obj, path: str, nvars: int, scalar: str = "poly") -> Form:
    return decode_graded(obj, path, nvars, "form", scalar)


def decode_multivector(obj, path: str, nvars: int, scalar: str = "poly") -> Multivector:
    return decode_graded(obj, path, nvars, "multivector", scalar)


def encode_vvform(w: VectorValuedForm) -> dict:
    return {"kind": "vector_valued_form", "degree": w.degree, "components": [encode_form(c) for c in w]}


def decode_vvform(obj, path: str, ctx: BundleContext, degree: int | None = None) -> VectorValuedForm:
    """Either explicit components, or ``{"from_form": <Form>}`` for T*M-valued forms.

    ``from_form`` views a (k+1)-form K as a k-form with values in T*M, so that
    ι_{X_k}...ι_{X_1} of the result evaluated on Y is K(X_1, ..., X_k, Y).
    """
    if isinstance(obj, dict) and "from_form" in obj:
        K = decode_form(obj["from_form"], f"{path}.from_form", ctx.n)
        if K.degree < 1:
            raise InputError(f"{path}.from_form.degree", "must be at least 1")
        if ctx.r != ctx.n:
            raise InputError(f"{path}.from_form", "needs E = TM (r = n)")
        w = from_higher_form(K, ctx.n)
    else:
        comps = _list(_need(obj, "components", path), f"{path}.components")
        if len(comps) != ctx.r:
            raise InputError(f"{path}.components", f"expected {ctx.r} components")
        forms = [decode_form(c, f"{path}.components[{a}]", ctx.n) for a, c in enumerate(comps)]
        degs = {f.degree for f in forms}
        if len(degs) != 1:
            raise InputError(f"{path}.components", "components must share one degree")
        w = VectorValuedForm(forms)
    if degree is not None and w.degree != degree:
        raise InputError(f"{path}.degree", f"expected degree {degree}, got {w.degree}")
    return w


# sections ------------------------------------------------------------------


def encode_anchored(nu: AnchoredSection) -> dict:
    return {"X": encode_form(nu.X), "eps": [encode_poly(p) for p in nu.eps]}


def decode_anchored(obj, path: str, ctx: BundleContext) -> AnchoredSection:
    X = decode_multivector(_need(obj, "X", path), f"{path}.X", ctx.n)
    if X.degree != 1:
        raise InputError(f"{path}.X.degree", "must be 1")
    eps = _list(_need(obj, "eps", path), f"{path}.eps")
    if len(eps) != ctx.r:
        raise InputError(f"{path}.eps", f"expected {ctx.r} components")
    return AnchoredSection(X, tuple(decode_poly(p, f"{path}.eps[{a}]", ctx.n) for a, p in enumerate(eps)))


def encode_cosection(tau: CoSection) -> dict:
    return {"e": [encode_poly(p) for p in tau.e], "theta": encode_form(tau.theta)}


def decode_cosection(obj, path: str, ctx: BundleContext) -> CoSection:
    theta = decode_form(_need(obj, "theta", path), f"{path}.theta", ctx.n)
    if theta.degree != 1:
        raise InputError(f"{path}.theta.degree", "must be 1")
    e = _list(_need(obj, "e", path), f"{path}.e")
    if len(e) != ctx.r:
        raise InputError(f"{path}.e", f"expected {ctx.r} components")
    return CoSection(tuple(decode_poly(p, f"{path}.e[{a}]", ctx.n) for a, p in enumerate(e)), theta)


def encode_derivation(D: Derivation) -> dict:
    return {"symbol": encode_form(D.symbol), "matrix": [[encode_poly(p) for p in row] for row in D.matrix]}


def decode_derivation(obj, path: str, n: int, r: int) -> Derivation:
    sym = decode_multivector(_need(obj, "symbol", path), f"{path}.symbol", n)
    rows = _list(_need(obj, "matrix", path), f"{path}.matrix")
    if len(rows) != r:
        raise InputError(f"{path}.matrix", f"expected {r} rows")
    mat = []
    for a, row in enumerate(rows):
        row = _list(row, f"{path}.matrix[{a}]")
        if len(row) != r:
            raise InputError(f"{path}.matrix[{a}]", f"expected {r} entries")
        mat.append(tuple(decode_poly(p, f"{path}.matrix[{a}][{b}]", n) for b, p in enumerate(row)))
    return Derivation(sym, tuple(mat))


def encode_context(ctx: BundleContext) -> dict:
    return ctx.to_json()


def decode_context(obj, path: str = "$") -> BundleContext:
    for key in ("n", "r"):
        v = _need(obj, key, path)
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputError(f"{path}.{key}", "must be an integer")
    try:
        return BundleContext.from_json(obj)
    except BundleError as exc:
        raise InputError(f"{path}.fiber_model", str(exc)) from None


def encode_general(chi) -> dict:
    return {"total_vars": chi.V.nvars, "V": encode_form(chi.V), "A": encode_form(chi.A)}


def decode_general(obj, path: str, total_vars: int | None = None):
    from .total_space import GeneralizedSection

    N = _need(obj, "total_vars", path)
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise InputError(f"{path}.total_vars", "must be a positive integer")
    if total_vars is not None and N != total_vars:
        raise InputError(f"{path}.total_vars", f"expected {total_vars}")
    V = decode_multivector(_need(obj, "V", path), f"{path}.V", N)
    A = decode_form(_need(obj, "A", path), f"{path}.A", N)
    if V.degree != 1 or A.degree != 1:
        raise InputError(path, "V must be a vector field and A a 1-form")
    return GeneralizedSection(V, A)


def dumps(obj: Any, pretty: bool = False) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def load_json(text: str, path: str = "$"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
