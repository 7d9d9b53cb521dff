"""Exterior calculus on a coordinate patch.

Forms and multivectors share one sparse container keyed by strictly increasing
index tuples.  Coefficients are any scalar type offering ``+ - *``, ``diff``,
``partials`` and truthiness (``Poly`` or ``FourierPoly``); a single expression
never mixes the two.

Sign conventions: dx^I pairs with d_J by the determinant of evaluations, and
``interior`` inserts into the first slot.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

from .scalar import Poly, ScalarError

Index = Tuple[int, ...]


class CartanError(ValueError):
    pass


@lru_cache(maxsize=None)
def merge_sign(I: Index, J: Index):
    """Sign and sorted union for dx^I ^ dx^J, or ``(0, None)`` on overlap."""
    if not I:
        return 1, J
    if not J:
        return 1, I
    if set(I) & set(J):
        return 0, None
    inv = 0
    for j in J:
        for i in I:
            if i > j:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(I + J))


@lru_cache(maxsize=None)
def sort_sign(seq: Index):
    """Sign of the sorting permutation and the sorted tuple; ``(0, None)`` on repeats."""
    if len(set(seq)) != len(seq):
        return 0, None
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(seq))


def _accumulate(out: Dict, key, value) -> None:
    v = out.get(key)
    if v is None:
        out[key] = value
    else:
        v = v + value
        if v:
            out[key] = v
        else:
            del out[key]


class Graded:
    """Sparse antisymmetric tensor of fixed degree on ``nvars`` coordinates."""

    __slots__ = ("nvars", "degree", "terms")
    kind = "graded"

    def __init__(self, nvars: int, degree: int, terms: Mapping[Sequence[int], object] | None = None):
        if degree < 0 or nvars < 0:
            raise CartanError("degree and nvars must be non-negative")
        clean: Dict[Index, object] = {}
        for idx, c in (terms or {}).items():
            I = tuple(int(i) for i in idx)
            if len(I) != degree:
                raise CartanError(f"index tuple {I} has length {len(I)}, expected {degree}")
            if any(I[k] >= I[k + 1] for k in range(len(I) - 1)):
                raise CartanError(f"indices not strictly increasing: {list(I)}")
            if any(i < 0 or i >= nvars for i in I):
                raise CartanError(f"index out of range in {list(I)}")
            if getattr(c, "nvars", nvars) != nvars:
                raise CartanError("coefficient variable count differs from the container")
            if c:
                _accumulate(clean, I, c)
        self.nvars = nvars
        self.degree = degree
        self.terms = clean

    @classmethod
    def _raw(cls, nvars: int, degree: int, terms: Dict[Index, object]):
        g = object.__new__(cls)
        g.nvars = nvars
        g.degree = degree
        g.terms = terms
        return g

    @classmethod
    def zero(cls, nvars: int, degree: int):
        return cls._raw(nvars, degree, {})

    @classmethod
    def basis(cls, nvars: int, idx: Sequence[int], coeff):
        """``coeff`` times dx^idx (or d_idx); idx need not be sorted."""
        s, I = sort_sign(tuple(idx))
        if not s or not coeff:
            return cls._raw(nvars, len(idx), {})
        return cls._raw(nvars, len(idx), {I: coeff if s > 0 else -coeff})

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def component(self, idx: Sequence[int]):
        return self.terms.get(tuple(idx))

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise CartanError(f"cannot combine {self.kind} with {getattr(other, 'kind', type(other).__name__)}")
        if other.nvars != self.nvars:
            raise CartanError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
        # the zero tensor is the zero of every degree
        if other.degree != self.degree and self.terms and other.terms:
            raise CartanError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        self._check(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for I, c in other.terms.items():
            _accumulate(out, I, c)
        return type(self)._raw(self.nvars, self.degree, out)

    def __neg__(self):
        return type(self)._raw(self.nvars, self.degree, {I: -c for I, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        """Multiply every coefficient by a scalar function or rational."""
        out = {}
        for I, c in self.terms.items():
            v = c * f
            if v:
                out[I] = v
        return type(self)._raw(self.nvars, self.degree, out)

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def map_coeffs(self, fn: Callable):
        out = {}
        for I, c in self.terms.items():
            v = fn(c)
            if v:
                out[I] = v
        return type(self)._raw(self.nvars, self.degree, out)

    def __eq__(self, other):
        if not isinstance(other, Graded):
            return NotImplemented
        if type(self) is not type(other) or self.nvars != other.nvars:
            return False
        if not self.terms and not other.terms:
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        if not self.terms:
            return hash((self.kind, self.nvars))
        return hash((self.kind, self.nvars, self.degree, frozenset(self.terms.items())))

    def sorted_terms(self):
        return sorted(self.terms.items())

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = list(names) if names else [f"x{i}" for i in range(self.nvars)]
        sym = self._symbol
        parts = []
        for I, c in self.sorted_terms():
            basis = "^".join(f"{sym}{names[i]}" for i in I)
            cs = c.pretty(names) if isinstance(c, Poly) else c.pretty()
            parts.append(f"({cs})" + (f" {basis}" if basis else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"{type(self).__name__}[{self.degree}]({self.pretty()})"


class Form(Graded):
    __slots__ = ()
    kind = "form"
    _symbol = "d"


class Multivector(Graded):
    __slots__ = ()
    kind = "multivector"
    _symbol = "D"


def vector_field(nvars: int, comps: Mapping[int, object] | Sequence) -> Multivector:
    items = comps.items() if isinstance(comps, Mapping) else enumerate(comps)
    return Multivector(nvars, 1, {(i,): c for i, c in items if c})


def one_form(nvars: int, comps: Mapping[int, object] | Sequence) -> Form:
    items = comps.items() if isinstance(comps, Mapping) else enumerate(comps)
    return Form(nvars, 1, {(i,): c for i, c in items if c})


def function_form(f) -> Form:
    return Form._raw(f.nvars, 0, {(): f} if f else {})


def as_function(a: Form, zero):
    if a.degree != 0:
        raise CartanError("expected a 0-form")
    return a.terms.get((), zero)


def coordinate_vector(nvars: int, i: int, one=None) -> Multivector:
    one = Poly.const(nvars, 1) if one is None else one
    return Multivector._raw(nvars, 1, {(i,): one})


def coordinate_form(nvars: int, idx: Sequence[int], one=None) -> Form:
    one = Poly.const(nvars, 1) if one is None else one
    return Form.basis(nvars, idx, one)


def components(X: Multivector) -> Dict[int, object]:
    """Vector field components as ``{i: X^i}`` (nonzero only)."""
    if X.degree != 1:
        raise CartanError("expected a vector field")
    return {I[0]: c for I, c in X.terms.items()}


# ---------------------------------------------------------------------------
# algebra


def wedge(a: Graded, b: Graded) -> Graded:
    if type(a) is not type(b):
        raise CartanError("wedge needs two forms or two multivectors")
    if a.nvars != b.nvars:
        raise CartanError(f"nvars mismatch: {a.nvars} vs {b.nvars}")
    out: Dict[Index, object] = {}
    for I, c in a.terms.items():
        for J, e in b.terms.items():
            s, K = merge_sign(I, J)
            if s:
                p = c * e
                _accumulate(out, K, p if s > 0 else -p)
    return type(a)._raw(a.nvars, a.degree + b.degree, out)


def pairing(T: Multivector, a: Form):
    """Full contraction of a k-vector with a k-form (determinant convention)."""
    if T.degree != a.degree or T.nvars != a.nvars:
        raise CartanError("pairing needs equal degree and nvars")
    total = None
    for I, c in T.terms.items():
        e = a.terms.get(I)
        if e is not None:
            total = c * e if total is None else total + c * e
    return total


def apply_vf(X: Multivector, f):
    """X(f) for a scalar function f."""
    total = None
    parts = f.partials() if X.terms else {}
    for (i,), c in X.terms.items():
        p = parts.get(i)
        if p is not None:
            total = c * p if total is None else total + c * p
    return f.scale(0) if total is None else total


def exterior_d(a: Form) -> Form:
    if not isinstance(a, Form):
        raise CartanError("exterior derivative is defined on forms")
    out: Dict[Index, object] = {}
    for I, c in a.terms.items():
        for j, dc in c.partials().items():
            if j in I:
                continue
            below = 0
            for i in I:
                if i < j:
                    below += 1
                else:
                    break
            K = I[:below] + (j,) + I[below:]
            _accumulate(out, K, -dc if below & 1 else dc)
    return Form._raw(a.nvars, a.degree + 1, out)


def interior(X: Multivector, a: Form) -> Form:
    if X.degree != 1:
        raise CartanError("interior product needs a vector field")
    if X.nvars != a.nvars:
        raise CartanError(f"nvars mismatch: {X.nvars} vs {a.nvars}")
    if a.degree == 0:
        return Form._raw(a.nvars, 0, {})
    xs = {I[0]: c for I, c in X.terms.items()}
    out: Dict[Index, object] = {}
    for I, c in a.terms.items():
        for p, i in enumerate(I):
            xi = xs.get(i)
            if xi is not None:
                v = xi * c
                _accumulate(out, I[:p] + I[p + 1:], -v if p & 1 else v)
    return Form._raw(a.nvars, a.degree - 1, out)


def lie_bracket(X: Multivector, Y: Multivector) -> Multivector:
    if X.degree != 1 or Y.degree != 1:
        raise CartanError("Lie bracket needs vector fields")
    if X.nvars != Y.nvars:
        raise CartanError(f"nvars mismatch: {X.nvars} vs {Y.nvars}")
    out: Dict[Index, object] = {}
    for J, c in Y.terms.items():
        v = apply_vf(X, c)
        if v:
            _accumulate(out, J, v)
    for J, c in X.terms.items():
        v = apply_vf(Y, c)
        if v:
            _accumulate(out, J, -v)
    return Multivector._raw(X.nvars, 1, out)


def lie_derivative(X: Multivector, a: Graded) -> Graded:
    if X.degree != 1:
        raise CartanError("Lie derivative along a vector field only")
    if X.nvars != a.nvars:
        raise CartanError(f"nvars mismatch: {X.nvars} vs {a.nvars}")
    if isinstance(a, Form):
        if a.degree == 0:
            out = {}
            if a.terms:
                v = apply_vf(X, a.terms[()])
                if v:
                    out[()] = v
            return Form._raw(a.nvars, 0, out)
        return interior(X, exterior_d(a)) + exterior_d(interior(X, a))
    # multivector: X(c) d_I plus c * sum over slots of [X, d_i] = -(d_i X^j) d_j
    grads = {I[0]: c.partials() for I, c in X.terms.items()}
    out: Dict[Index, object] = {}
    for I, c in a.terms.items():
        v = apply_vf(X, c)
        if v:
            _accumulate(out, I, v)
        for p, i in enumerate(I):
            for j, g in grads.items():
                dij = g.get(i)
                if dij is None:
                    continue
                s, K = sort_sign(I[:p] + (j,) + I[p + 1:])
                if s:
                    w = c * dij
                    _accumulate(out, K, w if s < 0 else -w)
    return Multivector._raw(a.nvars, a.degree, out)


def multi_contract(T: Multivector, a: Form) -> Form:
    """T ⌐ a = ι_{X_k} ... ι_{X_1} a for T = X_1 ^ ... ^ X_k (first factor innermost)."""
    if not isinstance(T, Multivector) or not isinstance(a, Form):
        raise CartanError("multi_contract needs a multivector and a form")
    if T.nvars != a.nvars:
        raise CartanError(f"nvars mismatch: {T.nvars} vs {a.nvars}")
    if a.degree < T.degree:
        raise CartanError(f"degree underflow: contracting a {T.degree}-vector into a {a.degree}-form")
    out: Dict[Index, object] = {}
    for J, t in T.terms.items():
        Js = set(J)
        for I, c in a.terms.items():
            if not Js.issubset(I):
                continue
            rest = list(I)
            sign = 1
            for j in J:
                p = rest.index(j)
                if p & 1:
                    sign = -sign
                del rest[p]
            v = t * c
            _accumulate(out, tuple(rest), v if sign > 0 else -v)
    return Form._raw(a.nvars, a.degree - T.degree, out)


def form_contract(a: Form, T: Multivector) -> Multivector:
    """a ⌐ T, characterized by <a ⌐ T, b> = <T, a ^ b> for all forms b."""
    if a.nvars != T.nvars:
        raise CartanError(f"nvars mismatch: {a.nvars} vs {T.nvars}")
    if T.degree < a.degree:
        raise CartanError("degree underflow")
    out: Dict[Index, object] = {}
    for K, t in T.terms.items():
        Ks = set(K)
        for I, c in a.terms.items():
            if not Ks.issuperset(I):
                continue
            L = tuple(k for k in K if k not in I)
            s, _ = merge_sign(I, L)
            v = c * t
            _accumulate(out, L, v if s > 0 else -v)
    return Multivector._raw(a.nvars, T.degree - a.degree, out)


def pullback_extend(a: Graded, nvars: int) -> Graded:
    """Pull a polynomial tensor back along a projection R^nvars -> R^a.nvars (first coordinates)."""
    return type(a)._raw(nvars, a.degree, {I: c.extend(nvars) for I, c in a.terms.items()})


def restrict_base(a: Graded, nvars: int) -> Graded:
    """Inverse of ``pullback_extend`` for tensors that only involve base data."""
    out = {}
    for I, c in a.terms.items():
        if any(i >= nvars for i in I):
            raise CartanError("tensor has components outside the base")
        out[I] = c.restrict(nvars)
    return type(a)._raw(nvars, a.degree, out)


def evaluate_form(a: Form, vectors: Sequence[Multivector]):
    """a(X_1, ..., X_k) by iterated insertion (X_1 first)."""
    if len(vectors) != a.degree:
        raise CartanError("wrong number of arguments")
    cur = a
    for X in vectors:
        cur = interior(X, cur)
    return cur


class VectorValuedForm:
    """A k-form with values in E*: one scalar form per dual frame element."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Form]):
        comps = tuple(components)
        if not comps:
            raise CartanError("vector-valued form needs at least one component")
        n, k = comps[0].nvars, comps[0].degree
        for c in comps:
            if not isinstance(c, Form) or c.nvars != n or c.degree != k:
                raise CartanError("components must be forms of common nvars and degree")
        self.components = comps

    @classmethod
    def zero(cls, rank: int, nvars: int, degree: int) -> "VectorValuedForm":
        return cls(Form.zero(nvars, degree) for _ in range(rank))

    @property
    def rank(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return self.components[0].degree

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    def __getitem__(self, a: int) -> Form:
        return self.components[a]

    def __iter__(self):
        return iter(self.components)

    def _check(self, other) -> None:
        if not isinstance(other, VectorValuedForm) or other.rank != self.rank:
            raise CartanError("rank mismatch")

    def __add__(self, other):
        self._check(other)
        return VectorValuedForm(a + b for a, b in zip(self, other))

    def __neg__(self):
        return VectorValuedForm(-a for a in self)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        return VectorValuedForm(a.scale(f) for a in self)

    def map(self, fn: Callable[[Form], Form]) -> "VectorValuedForm":
        return VectorValuedForm(fn(a) for a in self)

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, VectorValuedForm):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "VectorValuedForm(" + ", ".join(c.pretty() for c in self) + ")"


def from_higher_form(K: Form, rank: int | None = None) -> VectorValuedForm:
    """View a (k+1)-form as a k-form with values in T*M: component a = (-1)^k ι_{d_a} K.

    With this choice ι_{X2} ι_{X1} of the result, evaluated on Y, equals K(X1, X2, Y).
    """
    n = K.nvars
    k = K.degree - 1
    if k < 0:
        raise CartanError("need a form of degree at least one")
    one = _unit_like(K)
    comps = []
    for a in range(n if rank is None else rank):
        c = interior(coordinate_vector(n, a, one), K) if one is not None else Form.zero(n, k)
        comps.append(-c if k & 1 else c)
    return VectorValuedForm(comps)


def _unit_like(a: Graded):
    for c in a.terms.values():
        if isinstance(c, Poly):
            return Poly.const(c.nvars, 1)
        return c.__class__.const(1)
    return None
