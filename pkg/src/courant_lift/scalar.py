"""Exact scalars: rationals, sparse polynomials on R^n, trigonometric polynomials on T^2.

Rationals are ``gmpy2.mpq`` values, which are always kept in lowest terms with a
positive denominator.  Every container here is immutable after construction.
"""

from __future__ import annotations

import math
import re
from operator import add
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import gmpy2

Rational = type(gmpy2.mpq(0))
Q = gmpy2.mpq
ZERO = Q(0)
ONE = Q(1)

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class ScalarError(ValueError):
    """Raised on malformed scalar input or incompatible operands."""


def rational(value) -> Rational:
    """Coerce an int, mpq, Fraction or ``"p/q"`` string to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise ScalarError("booleans are not rationals")
    if isinstance(value, int):
        return Q(value)
    if isinstance(value, str):
        return parse_rational(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        if value.denominator == 0:
            raise ScalarError("zero denominator")
        return Q(value.numerator, value.denominator)
    raise ScalarError(f"cannot interpret {value!r} as an exact rational")


def parse_rational(text: str) -> Rational:
    m = _FRACTION_RE.match(text)
    if not m:
        raise ScalarError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ScalarError("zero denominator")
    return Q(num, den)


def format_rational(q: Rational) -> str:
    return f"{q.numerator}/{q.denominator}"


def _grlex_key(exps: Tuple[int, ...]):
    return (sum(exps), exps)


class Poly:
    """Sparse polynomial with rational coefficients in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero rationals.  Two polynomials are
    equal exactly when their term maps coincide.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 0:
            raise ScalarError("nvars must be non-negative")
        clean: Dict[Tuple[int, ...], Rational] = {}
        for exps, coeff in (terms or {}).items():
            e = tuple(int(v) for v in exps)
            if len(e) != nvars:
                raise ScalarError(f"exponent vector {e} has length {len(e)}, expected {nvars}")
            if any(v < 0 for v in e):
                raise ScalarError(f"negative exponent in {e}")
            c = rational(coeff)
            if c:
                clean[e] = clean.get(e, ZERO) + c
                if not clean[e]:
                    del clean[e]
        self.nvars = nvars
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Tuple[int, ...], Rational]) -> "Poly":
        p = object.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c=1) -> "Poly":
        c = rational(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        if not 0 <= i < nvars:
            raise ScalarError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): ONE})

    @classmethod
    def monomial(cls, nvars: int, exps: Sequence[int], c=1) -> "Poly":
        return cls(nvars, {tuple(exps): c})

    # predicates / access
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Rational:
        return self.terms.get((0,) * self.nvars, ZERO)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, indices: Iterable[int]) -> Dict[int, "Poly"]:
        """Split by total degree in the given variables: ``{degree: part}``."""
        idx = tuple(indices)
        out: Dict[int, Dict] = {}
        for e, c in self.terms.items():
            k = sum(e[i] for i in idx)
            out.setdefault(k, {})[e] = c
        return {k: Poly._raw(self.nvars, t) for k, t in out.items()}

    def _check(self, other: "Poly") -> None:
        if other.nvars != self.nvars:
            raise ScalarError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, Poly):
            if other == 0:
                return self
            other = Poly.const(self.nvars, other)
        self._check(other)
        if len(other.terms) > len(self.terms):
            small, big = self.terms, other.terms
        else:
            small, big = other.terms, self.terms
        out = dict(big)
        for e, c in small.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            return self + (-rational(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = rational(c)
        if not c:
            return Poly._raw(self.nvars, {})
        return Poly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, (int, Rational)):
                return self.scale(other)
            return NotImplemented
        self._check(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return Poly._raw(self.nvars, {})
        out: Dict[Tuple[int, ...], Rational] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(map(add, e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return Poly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ScalarError("negative power")
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    # calculus
    def diff(self, i: int) -> "Poly":
        if not 0 <= i < self.nvars:
            raise ScalarError(f"variable index {i} out of range for {self.nvars} variables")
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Poly._raw(self.nvars, out)

    def partials(self) -> Dict[int, "Poly"]:
        """All nonzero first partial derivatives, computed in one pass."""
        acc: Dict[int, Dict[Tuple[int, ...], Rational]] = {}
        for e, c in self.terms.items():
            for i, k in enumerate(e):
                if k:
                    ne = e[:i] + (k - 1,) + e[i + 1:]
                    acc.setdefault(i, {})[ne] = c * k
        return {i: Poly._raw(self.nvars, t) for i, t in acc.items()}

    def evaluate(self, point: Sequence) -> Rational:
        if len(point) != self.nvars:
            raise ScalarError("point has wrong dimension")
        pt = [rational(v) for v in point]
        total = ZERO
        for e, c in self.terms.items():
            m = c
            for v, k in zip(pt, e):
                if k:
                    m = m * v ** k
            total += m
        return total

    def extend(self, nvars: int, offset: int = 0) -> "Poly":
        """Embed into a larger variable set, placing old variable i at ``offset + i``."""
        if offset < 0 or offset + self.nvars > nvars:
            raise ScalarError("embedding does not fit")
        pre = (0,) * offset
        post = (0,) * (nvars - offset - self.nvars)
        return Poly._raw(nvars, {pre + e + post: c for e, c in self.terms.items()})

    def restrict(self, nvars: int) -> "Poly":
        """Drop trailing variables; every term must be free of them."""
        out = {}
        for e, c in self.terms.items():
            if any(e[nvars:]):
                raise ScalarError("polynomial depends on dropped variables")
            out[e[:nvars]] = c
        return Poly._raw(nvars, out)

    def coefficient_of(self, var_exps: Mapping[int, int]) -> "Poly":
        """Coefficient of a monomial in the listed variables (others kept)."""
        out = {}
        for e, c in self.terms.items():
            if all(e[i] == k for i, k in var_exps.items()):
                ne = list(e)
                for i in var_exps:
                    ne[i] = 0
                out[tuple(ne)] = c
        return Poly._raw(self.nvars, out)

    # comparison / display
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Rational)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = list(names) if names else default_names(self.nvars)
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.pretty()})"

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [{"exps": list(e), "coeff": format_rational(c)} for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj) -> "Poly":
        if not isinstance(obj, dict) or "nvars" not in obj or "terms" not in obj:
            raise ScalarError("polynomial needs 'nvars' and 'terms'")
        n = obj["nvars"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise ScalarError("'nvars' must be a non-negative integer")
        terms: Dict[Tuple[int, ...], Rational] = {}
        for k, t in enumerate(obj["terms"]):
            try:
                e = tuple(t["exps"])
                c = rational(t["coeff"])
            except (KeyError, TypeError) as exc:
                raise ScalarError(f"terms[{k}]: malformed term") from exc
            except ScalarError as exc:
                raise ScalarError(f"terms[{k}].coeff: {exc}") from None
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in e):
                raise ScalarError(f"terms[{k}].exps: exponents must be integers")
            if len(e) != n:
                raise ScalarError(f"terms[{k}].exps: expected {n} exponents")
            if any(v < 0 for v in e):
                raise ScalarError(f"terms[{k}].exps: negative exponent")
            terms[e] = terms.get(e, ZERO) + c
        return cls(n, terms)


def default_names(nvars: int) -> list:
    return [f"x{i}" for i in range(nvars)]


def poly_mul(p: Poly, q: Poly) -> Poly:
    return p * q


def poly_diff(p: Poly, var_index: int) -> Poly:
    return p.diff(var_index)


# ---------------------------------------------------------------------------
# Trigonometric polynomials on the torus

Gauss = Tuple[Rational, Rational]


def _cmul(a: Gauss, b: Gauss) -> Gauss:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


class FourierPoly:
    """Real trigonometric polynomial sum c_(a,b) exp(i(a t1 + b t2)).

    Coefficients are Gaussian rationals ``(re, im)``; the coefficient at
    ``(-a,-b)`` is always the conjugate of the one at ``(a,b)``.  Angles are
    addressed as variable 0 (t1, the integrated circle) and 1 (t2).
    """

    __slots__ = ("terms",)
    nvars = 2

    def __init__(self, terms: Mapping[Tuple[int, int], Tuple[object, object]] | None = None, *, check: bool = True):
        clean: Dict[Tuple[int, int], Gauss] = {}
        for freq, (re_, im_) in (terms or {}).items():
            f = (int(freq[0]), int(freq[1]))
            re_, im_ = rational(re_), rational(im_)
            if re_ or im_:
                clean[f] = (re_, im_)
        if check:
            for (a, b), (re_, im_) in clean.items():
                partner = clean.get((-a, -b))
                if partner is None or partner != (re_, -im_):
                    raise ScalarError(f"reality constraint violated at frequency {(a, b)}")
        self.terms = clean

    @classmethod
    def _raw(cls, terms: Dict[Tuple[int, int], Gauss]) -> "FourierPoly":
        p = object.__new__(cls)
        p.terms = terms
        return p

    @classmethod
    def zero(cls) -> "FourierPoly":
        return cls._raw({})

    @classmethod
    def const(cls, c=1) -> "FourierPoly":
        c = rational(c)
        return cls._raw({(0, 0): (c, ZERO)} if c else {})

    @classmethod
    def cos(cls, a: int, b: int = 0, c=1) -> "FourierPoly":
        """c * cos(a t1 + b t2)."""
        c = rational(c)
        if a == 0 and b == 0:
            return cls.const(c)
        h = c / 2
        return cls._raw({(a, b): (h, ZERO), (-a, -b): (h, ZERO)}) if c else cls.zero()

    @classmethod
    def sin(cls, a: int, b: int = 0, c=1) -> "FourierPoly":
        """c * sin(a t1 + b t2)."""
        c = rational(c)
        if (a == 0 and b == 0) or not c:
            return cls.zero()
        h = c / 2
        return cls._raw({(a, b): (ZERO, -h), (-a, -b): (ZERO, h)})

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def max_frequency(self) -> int:
        return max((max(abs(a), abs(b)) for a, b in self.terms), default=0)

    def __add__(self, other):
        if not isinstance(other, FourierPoly):
            if other == 0:
                return self
            other = FourierPoly.const(other)
        out = dict(self.terms)
        for f, c in other.terms.items():
            v = out.get(f)
            if v is None:
                out[f] = c
            else:
                s = (v[0] + c[0], v[1] + c[1])
                if s[0] or s[1]:
                    out[f] = s
                else:
                    del out[f]
        return FourierPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return FourierPoly._raw({f: (-c[0], -c[1]) for f, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, FourierPoly):
            return self + (-rational(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "FourierPoly":
        c = rational(c)
        if not c:
            return FourierPoly.zero()
        return FourierPoly._raw({f: (v[0] * c, v[1] * c) for f, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, FourierPoly):
            if isinstance(other, (int, Rational)):
                return self.scale(other)
            return NotImplemented
        out: Dict[Tuple[int, int], Gauss] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                f = (a1 + a2, b1 + b2)
                p = _cmul(c1, c2)
                v = out.get(f)
                out[f] = p if v is None else (v[0] + p[0], v[1] + p[1])
        return FourierPoly._raw({f: c for f, c in out.items() if c[0] or c[1]})

    def __rmul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        return NotImplemented

    def diff(self, i: int) -> "FourierPoly":
        if i not in (0, 1):
            raise ScalarError("angle index must be 0 or 1")
        out = {}
        for f, (re_, im_) in self.terms.items():
            k = f[i]
            if k:
                # (re + i im) * (i k)
                out[f] = (-k * im_, k * re_)
        return FourierPoly._raw(out)

    def partials(self) -> Dict[int, "FourierPoly"]:
        out = {}
        for i in (0, 1):
            d = self.diff(i)
            if d:
                out[i] = d
        return out

    def integrate_first(self) -> "FourierPoly":
        """Mean over the first circle (normalized measure): keep frequencies (0, b)."""
        return FourierPoly._raw({f: c for f, c in self.terms.items() if f[0] == 0})

    def depends_on_first(self) -> bool:
        return any(a for a, _ in self.terms)

    def value_at_origin(self) -> Rational:
        """Exact value at t1 = t2 = 0 (the imaginary parts cancel by reality)."""
        return sum((c[0] for c in self.terms.values()), ZERO)

    def evaluate(self, t1: float, t2: float) -> float:
        total = 0.0
        for (a, b), (re_, im_) in self.terms.items():
            ang = a * t1 + b * t2
            total += float(re_) * math.cos(ang) - float(im_) * math.sin(ang)
        return total

    def __eq__(self, other):
        if isinstance(other, FourierPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Rational)):
            return self == FourierPoly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (abs(t[0][0]) + abs(t[0][1]), t[0]))

    def pretty(self, names=None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), (re_, im_) in self.sorted_terms():
            parts.append(f"({re_}{'+' if im_ >= 0 else '-'}{abs(im_)}i)e^i({a},{b})")
        return " + ".join(parts)

    def __repr__(self):
        return f"FourierPoly({self.pretty()})"

    def to_json(self) -> dict:
        return {
            "terms": [
                {"freq": [a, b], "re": format_rational(re_), "im": format_rational(im_)}
                for (a, b), (re_, im_) in self.sorted_terms()
            ]
        }

    @classmethod
    def from_json(cls, obj) -> "FourierPoly":
        if not isinstance(obj, dict) or "terms" not in obj:
            raise ScalarError("trigonometric polynomial needs 'terms'")
        terms: Dict[Tuple[int, int], Gauss] = {}
        for k, t in enumerate(obj["terms"]):
            try:
                a, b = t["freq"]
                c = (rational(t["re"]), rational(t["im"]))
            except ScalarError as exc:
                raise ScalarError(f"terms[{k}]: {exc}") from None
            except (KeyError, TypeError, ValueError) as exc:
                raise ScalarError(f"terms[{k}]: malformed term") from exc
            if (a, b) in terms:
                raise ScalarError(f"terms[{k}]: duplicate frequency")
            terms[(a, b)] = c
        return cls(terms)


def fourier_mul(p: FourierPoly, q: FourierPoly) -> FourierPoly:
    return p * q


def fourier_diff(p: FourierPoly, angle_index: int) -> FourierPoly:
    return p.diff(angle_index)


def fourier_integrate_first(p: FourierPoly) -> FourierPoly:
    return p.integrate_first()
