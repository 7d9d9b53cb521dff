"""A non-local Leibniz algebroid on T*T^2 + ∧²T*T^2 with zero anchor.

Sections are pairs (alpha1, alpha2) with trigonometric coefficients in the
coframe eta_x, eta_y.  The bracket integrates the first argument along the
first circle (normalized measure), so it is not a differential operator in
that slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .cartan import Form
from .sampling import random_fourier, rng_for
from .scalar import FourierPoly, format_rational


@dataclass(frozen=True, eq=True)
class TorusSection:
    alpha1: Form
    alpha2: Form

    def __post_init__(self):
        if self.alpha1.degree != 1 or self.alpha2.degree != 2:
            raise ValueError("need a 1-form and a 2-form")
        if self.alpha1.nvars != 2 or self.alpha2.nvars != 2:
            raise ValueError("torus sections live on two angles")

    @classmethod
    def build(cls, fx=None, fy=None, h=None) -> "TorusSection":
        """(fx eta_x + fy eta_y, h eta_x ^ eta_y); missing parts are zero."""
        a1 = {}
        if fx:
            a1[(0,)] = fx
        if fy:
            a1[(1,)] = fy
        a2 = {(0, 1): h} if h else {}
        return cls(Form(2, 1, a1), Form(2, 2, a2))

    @classmethod
    def zero(cls) -> "TorusSection":
        return cls.build()

    def part(self, key):
        z = FourierPoly.zero()
        if key == "x":
            return self.alpha1.terms.get((0,), z)
        if key == "y":
            return self.alpha1.terms.get((1,), z)
        return self.alpha2.terms.get((0, 1), z)

    def __add__(self, o):
        return TorusSection(self.alpha1 + o.alpha1, self.alpha2 + o.alpha2)

    def __neg__(self):
        return TorusSection(-self.alpha1, -self.alpha2)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f: FourierPoly) -> "TorusSection":
        return TorusSection(self.alpha1.scale(f), self.alpha2.scale(f))

    def is_zero(self) -> bool:
        return self.alpha1.is_zero() and self.alpha2.is_zero()


def integrate(s: TorusSection):
    """Fiber integrals: the eta_x part of alpha1 gives a function; alpha2 gives (∫h) eta_y."""
    return s.part("x").integrate_first(), s.part("h").integrate_first()


def nonlocal_bracket(s1: TorusSection, s2: TorusSection) -> TorusSection:
    """(0, (∫alpha1) beta2 + (∫alpha2) ^ beta1).

    With beta1 = bx eta_x + by eta_y, the second term is (∫h) eta_y ^ bx eta_x
    = -(∫h) bx eta_x ^ eta_y.
    """
    i1, ih = integrate(s1)
    top = i1 * s2.part("h") - ih * s2.part("x")
    return TorusSection.build(h=top)


def torus_jacobiator(s1: TorusSection, s2: TorusSection, s3: TorusSection) -> TorusSection:
    b = nonlocal_bracket
    return b(s1, b(s2, s3)) - b(b(s1, s2), s3) - b(s2, b(s1, s3))


def random_torus_section(seed: int, trial: int, sub: int, max_frequency: int = 3) -> TorusSection:
    rng = rng_for(seed, trial, "torus", sub)
    return TorusSection.build(
        random_fourier(rng, max_frequency),
        random_fourier(rng, max_frequency),
        random_fourier(rng, max_frequency),
    )


def jet_vanishes(f: FourierPoly, order: int) -> bool:
    """All partial derivatives of total order <= ``order`` vanish at the origin."""
    for a in range(order + 1):
        for b in range(order + 1 - a):
            g = f
            for _ in range(a):
                g = g.diff(0)
            for _ in range(b):
                g = g.diff(1)
            if g.value_at_origin():
                return False
    return True


def bump(F: int) -> FourierPoly:
    """(1 - cos t1)^F: zero at t1 = 0 to order 2F - 1, positive mean."""
    base = FourierPoly.const(1) - FourierPoly.cos(1)
    out = FourierPoly.const(1)
    for _ in range(F):
        out = out * base
    return out


def is_local_witness(max_frequency: int) -> dict:
    """Search for first arguments with equal jets at the origin but different brackets there.

    Compares s1 = ((1 - cos t1)^F eta_x, 0) with s1' = 0 against the fixed
    second argument (0, eta_x ^ eta_y), for F up to ``max_frequency``.  The
    strongest witness (largest jet order) is returned.
    """
    if max_frequency < 0:
        raise ValueError("max_frequency must be non-negative")
    probe = TorusSection.build(h=FourierPoly.const(1))
    best: Optional[dict] = None
    for F in range(1, max_frequency + 1):
        f = bump(F)
        order = 2 * F - 1
        if not jet_vanishes(f, order):
            continue
        s1 = TorusSection.build(fx=f)
        out = nonlocal_bracket(s1, probe).part("h").value_at_origin()
        other = nonlocal_bracket(TorusSection.zero(), probe).part("h").value_at_origin()
        if out != other:
            best = {
                "found": True,
                "max_frequency": max_frequency,
                "frequency": F,
                "jet_order": order,
                "first_argument": {"eta_x": f.to_json()},
                "comparison_argument": "zero section",
                "second_argument": "eta_x ^ eta_y",
                "bracket_at_origin": [format_rational(out), format_rational(other)],
            }
    if best is None:
        return {"found": False, "max_frequency": max_frequency}
    return best


def first_slot_defect(f: FourierPoly, s1: TorusSection, s2: TorusSection) -> TorusSection:
    """[[f s1, s2]] - f [[s1, s2]]; nonzero shows the first slot is not C-infinity linear."""
    return nonlocal_bracket(s1.scale(f), s2) - nonlocal_bracket(s1, s2).scale(f)
