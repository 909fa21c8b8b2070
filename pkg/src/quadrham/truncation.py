"""Finite truncations of the quadruple complex.

Coefficient rings are infinite dimensional over Q, so every matrix
computation happens inside a finite slice cut out by two mechanisms:

* a *sector* grading of coefficient monomials that every operator preserves
  exactly (the complex splits as a direct sum over sectors), and
* where a single sector is still infinite, a *stage* truncation whose
  union over stages recovers the sector.

The grading depends on the model kind:

* torus groups on anchored kinds ("block" scheme): the sector is the exact
  base multidegree, with affine coframes counting one unit of their own
  variable; arrow-block exponents are truncated to
  ``V_s = {|v|_inf <= s} ∪ {kappa(sector)}`` where ``kappa`` is the action
  weight of the sector (the only exponent a fresh arrow block ever receives).
* additive groups ("additive" scheme): total polynomial degree, exact.
* finite groups ("finite" scheme): the orbit of the base multidegree under
  the group's monomial action, exact.
* pair kind ("pair" scheme): per-variable totals across the slots, with the
  slot exponents truncated to an L1 ball that grows with the stage.

Escapes from the enumerated basis are never silently dropped: they raise
``TruncationError`` with the offending term, and a failing square of the
assembled differential is reported with the violated graded identity.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .groupoids import ModelError
from .kcomplex import (AmbientElement, KElement, ambient_cech, ambient_derham,
                       cech, contraction, derham, phi, total_differential)
from .linalg import SparseMatrix
from .scalars import TupleFn


class TruncationError(ValueError):
    """A computed term escaped the enumerated basis."""


# ---------------------------------------------------------------------------
# sector gradings


def _vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


class Grading:
    """Monomial grading of a model's coefficients preserved by all operators."""

    def __init__(self, model):
        self.model = model
        base = model.base
        self.e = base.e
        self.nu = model.nu
        if model.kind == "pair":
            self.scheme = "pair"
            self._check_diagonal_frame()
        elif model.finite:
            self.scheme = "finite"
            self._orbit_mats = self._finite_exponent_maps()
        elif model.group.kind == "torus":
            self.scheme = "block"
            self._weights = self._action_weights()
        elif model.group.kind == "additive":
            self.scheme = "additive"
            if any(base.laurent):
                raise NotImplementedError(
                    "additive-group models over a torus base have no finite "
                    "total-degree truncation"
                )
        else:
            raise NotImplementedError(
                "no sector grading for group kind %r" % model.group.kind
            )
        # weight carried by the i-th base coframe: its own variable for
        # affine coordinates, nothing for torus coordinates (log coframes)
        self._coframe_w = [
            tuple(
                (1 if (j == i and not base.laurent[i]) else 0)
                for j in range(self.e)
            )
            for i in range(self.e)
        ]

    # -- model introspection -------------------------------------------------

    def _action_weights(self):
        """w[i][a] with x_i ↦ (unit)·Π_a g_a^{w[i][a]}·x_i."""
        action = self.model.action
        ring = action.ring
        nu, e = self.nu, self.e
        out = []
        for i, img in enumerate(action.images):
            if len(img.terms) != 1:
                raise NotImplementedError(
                    "sector grading needs a monomial action"
                )
            (exps,) = img.terms
            gpart, xpart = exps[:nu], exps[nu:]
            want = tuple(1 if j == i else 0 for j in range(e))
            if tuple(xpart) != want:
                raise NotImplementedError(
                    "sector grading needs a diagonal monomial action"
                )
            out.append(tuple(gpart))
        return out

    def _finite_exponent_maps(self):
        """Per group element, the matrix A with x^m ↦ (unit)·x^{m·A}."""
        mats = []
        for hom in self.model.action.homs:
            rows = []
            for img in hom.images:
                if len(img.terms) != 1:
                    raise NotImplementedError(
                        "sector grading needs a monomial action"
                    )
                (exps,) = img.terms
                rows.append(tuple(exps))
            for j in range(self.e):
                col = [abs(rows[i][j]) for i in range(self.e)]
                if sum(col) != 1:
                    raise NotImplementedError(
                        "sector grading needs a signed-permutation action"
                    )
            mats.append(rows)
        return mats

    def _check_diagonal_frame(self):
        coeffs = self.model.frame_coeffs
        for i in range(self.e):
            for l in range(self.e):
                if i != l and not coeffs[i][l].is_zero():
                    raise NotImplementedError(
                        "pair frame mixes base variables; no per-variable "
                        "sector grading"
                    )

    # -- weights --------------------------------------------------------------

    def zero_weight(self):
        return 0 if self.scheme == "additive" else (0,) * self.e

    def eps_weight(self, i):
        if self.scheme == "additive":
            return 1
        return self._coframe_w[i]

    def ups_weight(self, a):
        if self.scheme == "additive":
            return 1
        if self.scheme == "pair":
            return self._coframe_w[a]
        return (0,) * self.e

    def label_weight(self, label):
        """Weight of an ambient coframe label."""
        kind, _, idx = label
        if kind == "g":
            return 1 if self.scheme == "additive" else (0,) * self.e
        return self.eps_weight(idx)

    def key_weight(self, wedge, sym, ambient):
        w = self.zero_weight()
        for item in wedge:
            piece = self.label_weight(item) if ambient else self.eps_weight(item)
            w = w + piece if self.scheme == "additive" else _vec_add(w, piece)
        for a in sym:
            piece = self.ups_weight(a)
            w = w + piece if self.scheme == "additive" else _vec_add(w, piece)
        return w

    # -- sectors ---------------------------------------------------------------

    def orbit(self, vec):
        return sorted({tuple(
            sum(vec[i] * mat[i][j] for i in range(self.e))
            for j in range(self.e)
        ) for mat in self._orbit_mats})

    def sector_of(self, n, exps, weight):
        if self.scheme == "additive":
            return sum(exps) + weight
        if self.scheme == "block":
            base = exps[len(exps) - self.e:] if self.e else ()
            return _vec_add(tuple(base), weight)
        if self.scheme == "finite":
            return self.orbit(_vec_add(tuple(exps), weight))[0]
        # pair: per-variable totals across slots
        tot = list(weight)
        for j in range(n + 1):
            for i in range(self.e):
                tot[i] += exps[j * self.e + i]
        return tuple(tot)

    def sectors_at_radius(self, radius):
        if self.scheme == "additive":
            return [radius]
        if self.e == 0:
            return [()] if radius == 0 else []
        laurent = self.model.base.laurent
        out = []
        for split in _compositions(radius, self.e):
            for vec in _sign_choices(split, laurent):
                out.append(vec)
        if self.scheme == "finite":
            out = sorted({tuple(self.orbit(v)[0]) for v in out})
        return sorted(set(out))

    @property
    def uses_stage(self):
        return self.scheme in ("block", "pair")

    # -- coefficient enumeration -------------------------------------------

    def tuples(self, n):
        if self.model.finite:
            return list(itertools.product(
                range(self.model.group.order), repeat=n))
        return [()]

    def kappa(self, sector):
        return tuple(
            sum(self._weights[i][a] * sector[i] for i in range(self.e))
            for a in range(self.nu)
        )

    def exps_in_sector(self, n, weight, sector, stage):
        """Exponent tuples (aligned with the level ring) of the coefficients
        of a key whose labels carry `weight`, inside sector and stage."""
        base = self.model.base
        if self.scheme == "additive":
            total = sector - weight
            if total < 0:
                return
            for exps in _compositions(total, n * self.nu + self.e):
                yield exps
            return
        if self.scheme == "block":
            target = _vec_sub(sector, weight)
            if any(t < 0 for t, lau in zip(target, base.laurent) if not lau):
                return
            ball = [
                v for v in itertools.product(
                    range(-stage, stage + 1), repeat=self.nu)
                if all(abs(c) <= stage for c in v)
            ]
            vset = sorted(set(ball) | {self.kappa(sector)})
            for blocks in itertools.product(vset, repeat=n):
                yield tuple(itertools.chain(*blocks)) + target
            return
        if self.scheme == "finite":
            seen = set()
            for v in self.orbit(sector):
                exps = _vec_sub(v, weight)
                if any(t < 0 for t, lau in zip(exps, base.laurent) if not lau):
                    continue
                if exps not in seen:
                    seen.add(exps)
                    yield exps
            return
        # pair
        target = _vec_sub(sector, weight)
        if any(t < 0 for t, lau in zip(target, base.laurent) if not lau):
            return
        budget = sum(abs(t) for t in target) + 2 * stage
        for table in self._pair_tables(target, n + 1, budget):
            yield tuple(
                table[i][j] for j in range(n + 1) for i in range(self.e)
            )

    def _pair_tables(self, targets, slots, budget):
        """Per-variable slot exponents with given totals and shared L1 cap."""
        lau = self.model.base.laurent

        def rec(i, budget_left):
            if i == self.e:
                yield []
                return
            if lau[i]:
                rows = _signed_compositions(targets[i], slots, budget_left)
            else:
                rows = _compositions(targets[i], slots)
            for row in rows:
                used = sum(abs(a) for a in row)
                if used > budget_left:
                    continue
                for rest in rec(i + 1, budget_left - used):
                    yield [row] + rest

        return rec(0, budget)


def _compositions(total, parts):
    if total < 0:
        return
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _signed_compositions(total, parts, budget):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for a in range(-budget, budget + 1):
        left = budget - abs(a)
        if abs(total - a) > left:
            continue
        for rest in _signed_compositions(total - a, parts - 1, left):
            yield (a,) + rest


def _sign_choices(split, laurent):
    """All sign patterns of a nonnegative vector on its torus coordinates."""
    options = []
    for v, lau in zip(split, laurent):
        if lau and v:
            options.append((v, -v))
        else:
            options.append((v,))
    return itertools.product(*options)


# ---------------------------------------------------------------------------
# coordinatized slices


def _kspots(max_total, e, nu):
    for n in range(max_total + 1):
        for wlen in range(min(e, max_total - n) + 1):
            for slen in range((max_total - n - wlen) // 2 + 1):
                for w in itertools.combinations(range(e), wlen):
                    for s in itertools.combinations_with_replacement(
                            range(nu), slen):
                        yield n, w, s


class Truncation:
    """One coordinatized (sector, stage) slice of the complex.

    mode "k":       the (p, k, n) complex; degree = p + k + n.
    mode "ambient": plain forms on the nerve; degree = form degree + n.
    mode "fixed_p": the (phi, cech) rows at one symbol degree p;
                    degree = k + n.
    """

    def __init__(self, model, sector, stage, max_total, mode="k", p=None):
        self.model = model
        self.grading = Grading(model)
        self.sector = sector
        self.stage = stage
        self.max_total = max_total
        self.mode = mode
        self.p = p
        self.bases = {d: [] for d in range(max_total + 1)}
        self.index = {}
        for key in self._keys():
            deg = self.degree_of(key)
            pos = len(self.bases[deg])
            self.bases[deg].append(key)
            self.index[key] = (deg, pos)

    # -- enumeration ---------------------------------------------------------

    def _keys(self):
        g = self.grading
        if self.mode == "ambient":
            for n in range(self.max_total + 1):
                labels = self.model.level(n).labels
                for wlen in range(min(len(labels), self.max_total - n) + 1):
                    for wedge in itertools.combinations(labels, wlen):
                        yield from self._fill(n, wedge, ())
            return
        if self.mode == "fixed_p":
            for n in range(self.max_total + 1):
                for slen in range(min(self.p, self.max_total - n) + 1):
                    wlen = self.p - slen
                    if wlen > self.model.e:
                        continue
                    for wedge in itertools.combinations(
                            range(self.model.e), wlen):
                        for sym in itertools.combinations_with_replacement(
                                range(g.nu), slen):
                            yield from self._fill(n, wedge, sym)
            return
        for n, wedge, sym in _kspots(self.max_total, self.model.e, g.nu):
            yield from self._fill(n, wedge, sym)

    def _fill(self, n, wedge, sym):
        g = self.grading
        weight = g.key_weight(wedge, sym, self.mode == "ambient")
        for exps in g.exps_in_sector(n, weight, self.sector, self.stage):
            for tup in g.tuples(n):
                yield (n, wedge, sym, tup, exps)

    def degree_of(self, key):
        n, wedge, sym = key[0], key[1], key[2]
        if self.mode == "ambient":
            return len(wedge) + n
        if self.mode == "fixed_p":
            return len(sym) + n
        return len(wedge) + 2 * len(sym) + n

    def filtration_of(self, key):
        """p + k for mode "k", k for mode "fixed_p"."""
        if self.mode == "fixed_p":
            return len(key[2])
        return len(key[1]) + 2 * len(key[2])

    def dim(self, deg):
        return len(self.bases.get(deg, ()))

    # -- elements ------------------------------------------------------------

    def element_of(self, key):
        n, wedge, sym, tup, exps = key
        lv = self.model.level(n)
        coeff = TupleFn(lv.ring, lv.arity, lv.size,
                        {tup: lv.ring.monomial(exps)})
        cls = AmbientElement if self.mode == "ambient" else KElement
        return cls.term(self.model, n, wedge, sym, coeff)

    def coordinatize(self, el, deg):
        out = {}
        for n, wedge, sym, tf in el.terms():
            for tup, poly in tf.data.items():
                for exps, c in poly.terms.items():
                    if not c:
                        continue
                    key = (n, wedge, sym, tup, exps)
                    hit = self.index.get(key)
                    if hit is None:
                        self._leak(key)
                    kdeg, pos = hit
                    if kdeg != deg:
                        raise TruncationError(
                            "term of degree %d produced at degree %d: %s"
                            % (kdeg, deg, self._render(key))
                        )
                    s = out.get(pos, Fraction(0)) + c
                    if s:
                        out[pos] = s
                    elif pos in out:
                        del out[pos]
        return out

    def _leak(self, key):
        n, wedge, sym, tup, exps = key
        weight = self.grading.key_weight(wedge, sym, self.mode == "ambient")
        sec = self.grading.sector_of(n, exps, weight)
        if sec != self.sector:
            why = "left sector %r for %r" % (self.sector, sec)
        else:
            why = "escaped the stage-%d truncation" % self.stage
        raise TruncationError(
            "term %s %s" % (self._render(key), why)
        )

    def _render(self, key):
        n, wedge, sym, tup, exps = key
        mono = str(self.model.level(n).ring.monomial(exps))
        parts = [mono]
        if tup:
            parts.append("on tuple %r" % (tup,))
        if wedge:
            parts.append("wedge %r" % (wedge,))
        if sym:
            parts.append("sym %r" % (sym,))
        parts.append("@n=%d" % n)
        return " ".join(parts)

    def render_vector(self, vec, deg):
        """Readable form of a coordinate vector in this slice's basis."""
        el = None
        for pos, c in sorted(vec.items()):
            t = self.element_of(self.bases[deg][pos]).scale(c)
            el = t if el is None else el + t
        return "0" if el is None else str(el)

    # -- matrices ------------------------------------------------------------

    def assemble(self, op):
        """Matrices of op per degree; op must raise degree by exactly one."""
        mats = {}
        for deg in range(self.max_total):
            rows = self.dim(deg + 1)
            M = SparseMatrix(rows, self.dim(deg))
            for j, key in enumerate(self.bases.get(deg, ())):
                M.cols[j] = self.coordinatize(op(self.element_of(key)), deg + 1)
            mats[deg] = M
        return mats

    def check_square(self, mats, identity_namer=None):
        """D∘D = 0 on the assembled matrices, else ModelError with the
        violated graded identity and a witness term."""
        for deg in range(self.max_total - 1):
            prod = mats[deg + 1].mul(mats[deg])
            if prod.is_zero():
                continue
            j = next(i for i, col in enumerate(prod.cols) if col)
            key = self.bases[deg][j]
            name = None
            if identity_namer is not None:
                name = identity_namer(self.element_of(key))
            raise ModelError(
                name or "square of the assembled differential",
                "fails on %s (sector %r, stage %r)"
                % (self._render(key), self.sector, self.stage),
            )


# ---------------------------------------------------------------------------
# differentials and identity naming


def total_operator(x):
    return total_differential(x)


def rows_operator(x):
    """phi + cech: the differential of the fixed-p rows."""
    return phi(x) + cech(x)


def oracle_operator(x):
    """Simplicial de Rham differential on plain nerve forms."""
    out = ambient_cech(x)
    for n in x.levels():
        part = ambient_derham(x.restrict_level(n))
        out = out + (part if n % 2 == 0 else -part)
    return out


def broken_identity(el):
    """Name the graded identity that D∘D violates on el (None if none)."""
    apps = {
        "phi": phi(el),
        "cech": cech(el),
        "derham": derham(el),
        "iota": contraction(el),
    }
    checks = (
        ("phi∘phi = 0", phi(apps["phi"])),
        ("cech∘cech = 0", cech(apps["cech"])),
        ("derham∘derham = 0", derham(apps["derham"])),
        ("iota∘iota = 0", contraction(apps["iota"])),
        ("[phi, cech] = 0", phi(apps["cech"]) + cech(apps["phi"])),
        ("[phi, derham] + [cech, iota] = 0",
         phi(apps["derham"]) + derham(apps["phi"])
         + cech(apps["iota"]) + contraction(apps["cech"])),
        ("[phi, iota] = 0", phi(apps["iota"]) + contraction(apps["phi"])),
        ("[cech, derham] = 0", cech(apps["derham"]) + derham(apps["cech"])),
        ("[derham, iota] = 0",
         derham(apps["iota"]) + contraction(apps["derham"])),
    )
    for name, val in checks:
        if not val.is_zero():
            return name
    return None


def broken_rows_identity(el):
    apps = {"phi": phi(el), "cech": cech(el)}
    checks = (
        ("phi∘phi = 0", phi(apps["phi"])),
        ("cech∘cech = 0", cech(apps["cech"])),
        ("[phi, cech] = 0", phi(apps["cech"]) + cech(apps["phi"])),
    )
    for name, val in checks:
        if not val.is_zero():
            return name
    return None
