from itertools import combinations

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from courant_lift.cartan import Form, Multivector
from courant_lift.scalar import FourierPoly, Poly

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repro")

small_int = st.integers(-3, 3).filter(bool)


def polys(nvars: int, max_degree: int = 2, max_terms: int = 3):
    exps = st.lists(st.integers(0, nvars - 1), max_size=max_degree).map(
        lambda vs: tuple(vs.count(i) for i in range(nvars))
    )
    return st.dictionaries(exps, small_int, max_size=max_terms).map(lambda d: Poly(nvars, d))


def graded(nvars: int, degree: int, cls=Form, max_degree: int = 2):
    keys = list(combinations(range(nvars), degree))
    return st.lists(polys(nvars, max_degree), min_size=len(keys), max_size=len(keys)).map(
        lambda cs: cls(nvars, degree, {k: c for k, c in zip(keys, cs) if c})
    )


def forms(nvars: int, degree: int, max_degree: int = 2):
    return graded(nvars, degree, Form, max_degree)


def vector_fields(nvars: int, max_degree: int = 2):
    return graded(nvars, 1, Multivector, max_degree)


def fourier_polys(max_frequency: int = 3, max_terms: int = 3):
    freq = st.integers(-max_frequency, max_frequency)
    term = st.tuples(freq, freq, small_int, st.booleans()).map(
        lambda t: FourierPoly.cos(t[0], t[1], t[2]) if t[3] else FourierPoly.sin(t[0], t[1], t[2])
    )
    return st.lists(term, max_size=max_terms).map(lambda ts: sum(ts, FourierPoly.zero()))


# acceptance criteria report -------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
