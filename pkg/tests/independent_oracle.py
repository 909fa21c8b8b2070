"""Independent reference computations for the bundled models' cohomology.

Self-contained bicomplex computations sharing no code with the package:
bases are enumerated directly, the differentials are written straight from
the simplicial face formulas, and ranks come from a local fraction
elimination.  Every builder asserts that its differential squares to zero
before any dimension is reported.

Reduction used for the torus models: the function spaces split by
character, the de Rham differential on a character-v summand is the Koszul
complex of v (exact over Q whenever v != 0), and face pullbacks act
injectively on characters — so the nonzero characters form an exact
sub-bicomplex and the constant-character part carries the entire
cohomology.  The constant parts below are finite exterior algebras with
the induced alternating face sums.
"""

from fractions import Fraction
from itertools import combinations, product


def _rank(cols):
    """Rank of a sparse column list ({row: Fraction} dicts) over Q."""
    pivots = {}
    rank = 0
    for col in cols:
        col = {r: Fraction(v) for r, v in col.items() if v}
        while col:
            r = min(col)
            if r in pivots:
                c = col.pop(r)
                for rr, vv in pivots[r].items():
                    if rr == r:
                        continue
                    nv = col.get(rr, Fraction(0)) - c * vv
                    if nv:
                        col[rr] = nv
                    else:
                        col.pop(rr, None)
            else:
                piv = col[r]
                pivots[r] = {rr: vv / piv for rr, vv in col.items()}
                rank += 1
                break
    return rank


def _cohomology_dims(bases, diff, max_degree):
    """dims of H^0..H^max_degree for bases[deg] -> labels, diff(label) ->
    {label: Fraction} raising degree by one.  Asserts diff o diff = 0."""
    index = {deg: {lab: i for i, lab in enumerate(labs)}
             for deg, labs in bases.items()}
    mats = {}
    for deg in range(max_degree + 1):
        cols = []
        for lab in bases.get(deg, ()):
            img = diff(lab)
            for tgt in img:
                assert tgt in index.get(deg + 1, {}), (lab, tgt)
            cols.append({index[deg + 1][t]: v for t, v in img.items() if v})
        mats[deg] = cols
        for lab in bases.get(deg, ()):
            second = {}
            for mid, c in diff(lab).items():
                for tgt, c2 in diff(mid).items():
                    second[tgt] = second.get(tgt, Fraction(0)) + c * c2
            assert all(v == 0 for v in second.values()), lab
    dims = []
    prev_rank = 0
    for deg in range(max_degree + 1):
        n_here = len(bases.get(deg, ()))
        rank_out = _rank(mats[deg])
        dims.append(n_here - rank_out - prev_rank)
        prev_rank = rank_out
    return dims


def _wedge_image(wedge, gen_images):
    """Multilinear expansion of a wedge of generators, as
    {sorted tuple: sign} given each generator's image list of (gen, coeff)."""
    out = {(): Fraction(1)}
    for g in wedge:
        nxt = {}
        for word, c in out.items():
            for tgt, c2 in gen_images[g]:
                if tgt in word:
                    continue
                pos = sum(1 for w in word if w < tgt)
                sign = (-1) ** (len(word) - pos)
                nw = tuple(sorted(word + (tgt,)))
                nc = nxt.get(nw, Fraction(0)) + c * c2 * sign
                if nc:
                    nxt[nw] = nc
                else:
                    nxt.pop(nw, None)
        out = nxt
    return out


def classifying_torus_dims(max_degree):
    """Constant-character part of the nerve de Rham bicomplex of the
    one-dimensional torus's classifying groupoid: level n carries the
    exterior algebra on the n dlog classes, the de Rham differential
    vanishes, and the alternating face sum is the only differential.
    Total degree = level + form degree."""
    levels = max_degree + 2

    bases = {}
    for n in range(levels + 1):
        for p in range(n + 1):
            for wedge in combinations(range(1, n + 1), p):
                bases.setdefault(n + p, []).append((n, wedge))

    def face_gen_images(n, q):
        # pullback of the level-n dlog generators along face q of level n+1
        imgs = {}
        for i in range(1, n + 1):
            if q == 0:
                imgs[i] = [(i + 1, Fraction(1))]
            elif q == n + 1:
                imgs[i] = [(i, Fraction(1))]
            elif i < q:
                imgs[i] = [(i, Fraction(1))]
            elif i == q:
                imgs[i] = [(q, Fraction(1)), (q + 1, Fraction(1))]
            else:
                imgs[i] = [(i + 1, Fraction(1))]
        return imgs

    def diff(label):
        n, wedge = label
        out = {}
        for q in range(n + 2):
            imgs = face_gen_images(n, q)
            for nw, sign in _wedge_image(wedge, imgs).items():
                key = (n + 1, nw)
                c = out.get(key, Fraction(0)) + sign * (-1) ** q
                if c:
                    out[key] = c
                else:
                    out.pop(key, None)
        return out

    return _cohomology_dims(bases, diff, max_degree)


def torus_on_torus_dims(max_degree):
    """Constant-character part for the torus acting on itself by
    multiplication: level n carries dlog classes e_1..e_n of the group
    coordinates and f of the base coordinate; the last face twists the
    base, pulling f back to f + e_{n+1}."""
    levels = max_degree + 2

    bases = {}
    for n in range(levels + 1):
        gens = list(range(1, n + 1)) + ["f"]
        for p in range(len(gens) + 1):
            for wedge in combinations(gens, p):
                key = tuple(sorted(wedge, key=lambda g: (g == "f", g)))
                bases.setdefault(n + p, []).append((n, key))

    def face_gen_images(n, q):
        imgs = {"f": [("f", Fraction(1))]}
        for i in range(1, n + 1):
            if q == 0:
                imgs[i] = [(i + 1, Fraction(1))]
            elif q == n + 1:
                imgs[i] = [(i, Fraction(1))]
            elif i < q:
                imgs[i] = [(i, Fraction(1))]
            elif i == q:
                imgs[i] = [(q, Fraction(1)), (q + 1, Fraction(1))]
            else:
                imgs[i] = [(i + 1, Fraction(1))]
        if q == n + 1:
            imgs["f"] = [("f", Fraction(1)), (n + 1, Fraction(1))]
        return imgs

    def sortkey(g):
        return (g == "f", 0 if g == "f" else g)

    def diff(label):
        n, wedge = label
        out = {}
        for q in range(n + 2):
            imgs = face_gen_images(n, q)
            # _wedge_image sorts tuples; use a total order with f last
            expanded = {(): Fraction(1)}
            for g in wedge:
                nxt = {}
                for word, c in expanded.items():
                    for tgt, c2 in imgs[g]:
                        if tgt in word:
                            continue
                        pos = sum(1 for w in word if sortkey(w) < sortkey(tgt))
                        sign = (-1) ** (len(word) - pos)
                        nw = tuple(sorted(word + (tgt,), key=sortkey))
                        nc = nxt.get(nw, Fraction(0)) + c * c2 * sign
                        if nc:
                            nxt[nw] = nc
                        else:
                            nxt.pop(nw, None)
                expanded = nxt
            for nw, sign in expanded.items():
                key = (n + 1, nw)
                c = out.get(key, Fraction(0)) + sign * (-1) ** q
                if c:
                    out[key] = c
                else:
                    out.pop(key, None)
        return out

    return _cohomology_dims(bases, diff, max_degree)


def torus_mod_two_dims(max_degree, window=3):
    """Direct nerve computation for the order-two group inverting the
    torus coordinate.  Level n: functions on sign tuples times t^w and an
    optional dlog t leg; the character window |w| <= window is exact
    (faces only flip the sign of w).  Basis label: (n, sigma, w, eps)."""
    levels = max_degree + 2

    bases = {}
    for n in range(levels + 1):
        for sigma in product((0, 1), repeat=n):
            for w in range(-window, window + 1):
                for eps in (0, 1):
                    bases.setdefault(n + eps, []).append((n, sigma, w, eps))

    def diff(label):
        n, sigma, w, eps = label
        out = {}

        def add(key, c):
            v = out.get(key, Fraction(0)) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)

        # de Rham, with the level sign of a total complex
        if eps == 0 and w != 0:
            add((n, sigma, w, 1), Fraction(w) * (-1) ** n)
        # face pullbacks into level n+1
        for q in range(n + 2):
            sq = (-1) ** q
            if q == 0:
                for s0 in (0, 1):
                    add((n + 1, (s0,) + sigma, w, eps), Fraction(sq))
            elif q == n + 1:
                for sl in (0, 1):
                    flip = -1 if sl else 1
                    c = Fraction(sq) * ((-1) ** eps if sl else 1)
                    add((n + 1, sigma + (sl,), w * flip, eps), c)
            else:
                # merge slots q, q+1: indicator sigma pulls back to the sum
                # over splittings sigma_q = a + b mod 2
                for a in (0, 1):
                    b = (sigma[q - 1] - a) % 2
                    ns = sigma[:q - 1] + (a, b) + sigma[q:]
                    add((n + 1, ns, w, eps), Fraction(sq))
        return out

    return _cohomology_dims(bases, diff, max_degree)


# frozen expected values, derived by the computations above
CLASSIFYING_TORUS_DIMS = [1, 0, 1, 0, 1, 0, 1]   # degrees 0..6
TORUS_ON_TORUS_DIMS = [1, 0, 0, 0]               # degrees 0..3
TORUS_MOD_TWO_DIMS = [1, 0, 0]                   # degrees 0..2
