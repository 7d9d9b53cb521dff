"""Seeded random and exhaustive section generators.

Each trial draws from its own counter-based stream, keyed by
``(seed, trial, stream)``.  A trial's output therefore does not depend on
which other trials ran or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .bundle import AnchoredSection, BundleContext, CoSection, Derivation
from .cartan import Form, Multivector, VectorValuedForm
from .scalar import FourierPoly, Poly, Q

COEFFS = (-2, -1, 1, 2)

# named streams so unrelated draws never share random numbers
STREAMS = {
    "anchored": 1,
    "cosection": 2,
    "derivation": 3,
    "vvform": 4,
    "function": 5,
    "linear": 6,
    "torus": 7,
    "forms": 8,
}


def rng_for(seed: int, trial: int, stream: str | int, sub: int = 0) -> np.random.Generator:
    s = STREAMS.get(stream, stream) if isinstance(stream, str) else stream
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(trial), int(s), int(sub)))
    return np.random.Generator(np.random.Philox(ss))


def random_poly(rng: np.random.Generator, nvars: int, max_degree: int, terms: Tuple[int, int] = (1, 3)) -> Poly:
    k = int(rng.integers(terms[0], terms[1] + 1))
    out = {}
    for _ in range(k):
        deg = int(rng.integers(0, max_degree + 1))
        e = [0] * nvars
        if nvars:
            for v in rng.integers(0, nvars, size=deg):
                e[int(v)] += 1
        c = COEFFS[int(rng.integers(0, len(COEFFS)))]
        out[tuple(e)] = out.get(tuple(e), 0) + c
    return Poly(nvars, out)


def random_sparse(rng, nvars, max_degree, density: float) -> Poly:
    """A random polynomial or zero, nonzero with probability ``density``."""
    if rng.random() >= density:
        return Poly.zero(nvars)
    return random_poly(rng, nvars, max_degree)


def random_form(rng, nvars: int, degree: int, max_degree: int, density: float = 1.0, cls=Form):
    from itertools import combinations

    terms = {}
    for I in combinations(range(nvars), degree):
        p = random_sparse(rng, nvars, max_degree, density)
        if p:
            terms[I] = p
    return cls(nvars, degree, terms)


def random_fourier(rng, max_frequency: int, terms: Tuple[int, int] = (1, 3)) -> FourierPoly:
    out = FourierPoly.zero()
    for _ in range(int(rng.integers(terms[0], terms[1] + 1))):
        a = int(rng.integers(-max_frequency, max_frequency + 1))
        b = int(rng.integers(-max_frequency, max_frequency + 1))
        c = COEFFS[int(rng.integers(0, len(COEFFS)))]
        if rng.random() < 0.5:
            out = out + FourierPoly.cos(a, b, c)
        else:
            out = out + FourierPoly.sin(a, b, c)
    return out


@dataclass(frozen=True)
class Sampler:
    """Random data over a bundle context, reproducible per (seed, trial)."""

    ctx: BundleContext
    seed: int = 0
    max_degree: int = 2
    density: float = 1.0

    def _rng(self, trial: int, stream: str, sub: int = 0):
        return rng_for(self.seed, trial, stream, sub)

    def _poly(self, rng):
        return random_sparse(rng, self.ctx.n, self.max_degree, self.density)

    def anchored(self, trial: int, sub: int = 0) -> AnchoredSection:
        rng = self._rng(trial, "anchored", sub)
        X = Multivector(self.ctx.n, 1, {(i,): self._poly(rng) for i in range(self.ctx.n)})
        eps = tuple(self._poly(rng) for _ in range(self.ctx.r))
        return AnchoredSection(X, eps)

    def cosection(self, trial: int, sub: int = 0) -> CoSection:
        rng = self._rng(trial, "cosection", sub)
        e = tuple(self._poly(rng) for _ in range(self.ctx.r))
        theta = Form(self.ctx.n, 1, {(i,): self._poly(rng) for i in range(self.ctx.n)})
        return CoSection(e, theta)

    def function(self, trial: int, sub: int = 0) -> Poly:
        return random_poly(self._rng(trial, "function", sub), self.ctx.n, self.max_degree)

    def derivation(self, trial: int, sub: int = 0) -> Derivation:
        rng = self._rng(trial, "derivation", sub)
        n, r = self.ctx.n, self.ctx.r
        X = Multivector(n, 1, {(i,): self._poly(rng) for i in range(n)})
        mat = tuple(tuple(self._poly(rng) for _ in range(r)) for _ in range(r))
        return Derivation(X, mat)

    def vvform(self, trial: int, degree: int, sub: int = 0) -> VectorValuedForm:
        rng = self._rng(trial, "vvform", sub)
        return VectorValuedForm(
            random_form(rng, self.ctx.n, degree, self.max_degree, self.density) for _ in range(self.ctx.r)
        )

    def phi(self, trial: int, sub: int = 0) -> Tuple[Tuple[Poly, ...], ...]:
        rng = self._rng(trial, "linear", sub)
        return tuple(tuple(self._poly(rng) for _ in range(self.ctx.n)) for _ in range(self.ctx.r))

    def eps(self, trial: int, sub: int = 0) -> Tuple[Poly, ...]:
        rng = self._rng(trial, "linear", 1000 + sub)
        return tuple(self._poly(rng) for _ in range(self.ctx.r))


def generator_set(ctx: BundleContext, max_degree: int = 1) -> List[AnchoredSection]:
    """Unit coordinate monomials of degree <= max_degree times each basis section of TM + E*."""
    from itertools import combinations_with_replacement

    n, r = ctx.n, ctx.r
    monos = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            monos.append(Poly.monomial(n, e))
    out = []
    for m in monos:
        for i in range(n):
            out.append(AnchoredSection.build(ctx, X=ctx.partial(i).scale(m)))
        for a in range(r):
            eps = [ctx.zero()] * r
            eps[a] = m
            out.append(AnchoredSection.build(ctx, eps=eps))
    return out


def constant_frame(ctx: BundleContext) -> List[AnchoredSection]:
    return generator_set(ctx, 0)


def covering_pairs(g: int, budget: int) -> Iterator[Tuple[int, int]]:
    """Index pairs over a generator set of size g.

    The full product when it fits in ``budget``; otherwise a deterministic
    covering in which every generator occurs in both slots and partners rotate
    through several strides.
    """
    if g * g <= budget:
        for i in range(g):
            for j in range(g):
                yield i, j
        return
    for s in range(max(1, budget // g)):
        for i in range(g):
            yield i, (i * (2 * s + 1) + s) % g


def covering_triples(g: int, c: int, budget: int) -> Iterator[Tuple[int, int, int]]:
    """Index triples over G x G x C, with the same full-or-covering rule."""
    if g * g * c <= budget:
        for i in range(g):
            for j in range(g):
                for k in range(c):
                    yield i, j, k
        return
    for s in range(max(1, budget // (g * c))):
        for i in range(g):
            for k in range(c):
                yield i, (i * (2 * s + 1) + s + k) % g, k


@dataclass(frozen=True)
class SamplePlan:
    """Random trials followed by an optional pass over low-degree generators.

    The generator pass uses every unit monomial section of degree <= 1.  For
    triples the third slot only ranges over constant frame sections: once the
    anchor and Leibniz identities hold, the Jacobiator is C-infinity linear in
    its last argument.
    """

    seed: int = 0
    trials: int = 100
    max_degree: int = 2
    exhaustive: bool = True
    pair_budget: int = 5000
    triple_budget: int = 50000

    def sampler(self, ctx: BundleContext) -> Sampler:
        return Sampler(ctx, self.seed, self.max_degree)

    def singles(self, ctx: BundleContext):
        S = self.sampler(ctx)
        for k in range(self.trials):
            yield {"trial": k}, (S.anchored(k, 0),)
        if self.exhaustive:
            for i, g in enumerate(generator_set(ctx)):
                yield {"generator": [i]}, (g,)

    def pairs(self, ctx: BundleContext):
        S = self.sampler(ctx)
        for k in range(self.trials):
            yield {"trial": k}, (S.anchored(k, 0), S.anchored(k, 1))
        if self.exhaustive:
            G = generator_set(ctx)
            for i, j in covering_pairs(len(G), self.pair_budget):
                yield {"generator": [i, j]}, (G[i], G[j])

    def triples(self, ctx: BundleContext):
        S = self.sampler(ctx)
        for k in range(self.trials):
            yield {"trial": k}, (S.anchored(k, 0), S.anchored(k, 1), S.anchored(k, 2))
        if self.exhaustive:
            G = generator_set(ctx)
            C = constant_frame(ctx)
            for i, j, k in covering_triples(len(G), len(C), self.triple_budget):
                yield {"generator": [i, j, k]}, (G[i], G[j], C[k])

    def generator_coverage(self, ctx: BundleContext, arity: int) -> str:
        g = (ctx.n + 1) * (ctx.n + ctx.r)
        c = ctx.n + ctx.r
        full = g * g <= self.pair_budget if arity == 2 else g * g * c <= self.triple_budget
        if arity == 1:
            full = True
        return "full" if full else "covering"

    def method(self, ctx: BundleContext, arity: int) -> str:
        if not self.exhaustive:
            return "random trials"
        return f"verified on generator set ({self.generator_coverage(ctx, arity)})"

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "max_degree": self.max_degree,
            "exhaustive": self.exhaustive,
        }
