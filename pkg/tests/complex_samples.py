"""Sample elements of the quadruple complex for randomized property tests.

Basis elements come from sector truncations; random elements are small
rational combinations of them, optionally restricted by total degree.
"""

from fractions import Fraction

from quadrham.kcomplex import KElement
from quadrham.truncation import Grading, Truncation


def sector_truncations(model, max_total, max_radius=2, mode="k"):
    """One truncation per (sector, stage) over all radii up to max_radius."""
    grading = Grading(model)
    stages = (1, 2) if grading.uses_stage else (0,)
    radius = 0
    while radius <= max_radius:
        secs = grading.sectors_at_radius(radius)
        if not secs:
            break
        for sector in secs:
            for stage in stages:
                yield Truncation(model, sector, stage, max_total, mode=mode)
        radius += 1


def basis_pool(model, max_degree, max_radius=1, stage=1):
    """(degree, element) pairs across the sectors of small radius."""
    grading = Grading(model)
    pool = []
    radius = 0
    while radius <= max_radius:
        secs = grading.sectors_at_radius(radius)
        if not secs:
            break
        for sector in secs:
            tr = Truncation(model, sector,
                            stage if grading.uses_stage else 0,
                            max_degree, mode="k")
            for deg in range(max_degree + 1):
                for key in tr.bases.get(deg, ()):
                    pool.append((deg, tr.element_of(key)))
        radius += 1
    return pool


def random_element(rng, pool, degree=None, terms=2):
    """A small random combination of pool elements, homogeneous if degree
    is given (mixing degrees breaks no identity but muddies witnesses)."""
    if degree is not None:
        choices = [el for d, el in pool if d == degree]
    else:
        d = rng.choice(sorted({d for d, _ in pool}))
        choices = [el for dd, el in pool if dd == d]
    if not choices:
        raise ValueError("empty sample pool at degree %r" % degree)
    out = None
    for _ in range(terms):
        c = Fraction(rng.randrange(-4, 5), rng.randrange(1, 4))
        piece = rng.choice(choices).scale(c)
        out = piece if out is None else out + piece
    return out


def degrees_available(pool):
    return sorted({d for d, _ in pool})
