"""Morphisms of groupoid models and the pullback maps they induce.

A morphism source → target is a group homomorphism plus an equivariant base
map, both encoded contravariantly: an integer (torus) or rational (additive)
matrix describing the group coordinates' pullback, and one source-ring
polynomial per target base coordinate.  The induced map on the complex goes
the other way, K(target) → K(source), and commutes with all four
differentials; `check_chain_map` asserts that on truncated sector bases and
`induced_cohomology_map` measures the map on cohomology.
"""

from __future__ import annotations

from fractions import Fraction

from .groupoids import ModelError
from .kcomplex import (KElement, _distribute, cech, contraction, cup, derham,
                       phi, sym_insert)
from .poly import Poly, RingHom
from .linalg import Eliminator
from .scalars import TupleFn


def _reinterpret(ring, p):
    """The same terms as monomials of a ring with an equal variable layout."""
    return Poly(ring, dict(p.terms))


class GroupoidMorphism:
    """source → target: group matrix + equivariant base map.

    group_matrix[a][b] is the exponent (torus) or coefficient (additive) of
    the b-th source group coordinate in the pullback of the a-th target one;
    base_images[i] is the pullback of the i-th target base coordinate, a
    polynomial over the source base.
    """

    def __init__(self, source, target, group_matrix, base_images, check=True):
        for model, side in ((source, "source"), (target, "target")):
            if model.kind == "pair":
                raise NotImplementedError(
                    "pair models carry no arrow-block coordinates; morphisms "
                    "are defined for transformation and vector-bundle models "
                    "(%s)" % side
                )
            if model.finite:
                raise NotImplementedError(
                    "finite-group models index coefficients by group tuples; "
                    "morphisms are defined for torus and additive groups "
                    "(%s)" % side
                )
        if source.group.kind != target.group.kind:
            raise ModelError(
                "morphism datum",
                "group kinds differ: %r -> %r"
                % (source.group.kind, target.group.kind),
            )
        self.source = source
        self.target = target
        self.torus = source.group.kind == "torus"
        if len(group_matrix) != target.nu or any(
                len(row) != source.nu for row in group_matrix):
            raise ModelError(
                "morphism datum",
                "group matrix must be %d x %d" % (target.nu, source.nu),
            )
        if self.torus:
            self.group_matrix = [[int(v) for v in row] for row in group_matrix]
        else:
            self.group_matrix = [
                [Fraction(v) for v in row] for row in group_matrix
            ]
        if len(base_images) != target.e:
            raise ModelError(
                "morphism datum",
                "need one base image per target coordinate",
            )
        self.base_images = list(base_images)
        try:
            self.base_hom = RingHom(
                target.base.ring, source.base.ring, self.base_images)
        except ValueError as exc:
            raise ModelError("morphism datum", str(exc))
        self.eps_matrix = self._coframe_matrix()
        self._level_homs = {}
        self._eps_rows = {}
        self._sym_tables = {}
        if check:
            self._check_equivariance()

    @classmethod
    def identity(cls, model):
        L = [[1 if a == b else 0 for b in range(model.nu)]
             for a in range(model.nu)]
        images = [model.base.ring.var(nm) for nm in model.base.names]
        return cls(model, model, L, images, check=False)

    def then(self, other):
        """Composite morphism self; other (source of other = target of self)."""
        if other.source is not self.target:
            raise ModelError(
                "morphism datum", "composition endpoints do not match")
        L = [
            [
                sum(other.group_matrix[a][c] * self.group_matrix[c][b]
                    for c in range(self.target.nu))
                for b in range(self.source.nu)
            ]
            for a in range(other.target.nu)
        ]
        images = [self.base_hom.apply(im) for im in other.base_images]
        return GroupoidMorphism(
            self.source, other.target, L, images, check=False)

    # -- structure maps ------------------------------------------------------

    def _coframe_matrix(self):
        """C[i][l] over O(X_source) with pulled target coframe
        eps_i = sum_l C[i][l]·eps_l."""
        sb, tb = self.source.base, self.target.base
        C = [[sb.ring.zero() for _ in range(sb.e)] for _ in range(tb.e)]
        for i in range(tb.e):
            beta = self.base_images[i]
            if tb.laurent[i]:
                ((exps, _),) = beta.terms.items()
                for l, m in enumerate(exps):
                    if not m:
                        continue
                    if not sb.laurent[l]:
                        raise ModelError(
                            "morphism datum",
                            "log coframe of %s pulls back with a pole along %s"
                            % (tb.names[i], sb.names[l]),
                        )
                    C[i][l] = sb.ring.constant(m)
            else:
                for l in range(sb.e):
                    d = beta.derive(sb.names[l])
                    if d.is_zero():
                        continue
                    if sb.laurent[l]:
                        d = d * sb.ring.var(sb.names[l])
                    C[i][l] = d
        return C

    def _group_image(self, ring, n, j, a):
        """Pullback of the a-th target group coordinate of block j, inside a
        source level-n ring."""
        nu_s = self.source.nu
        nvars = len(ring.names)
        if self.torus:
            exps = [0] * nvars
            for b in range(nu_s):
                exps[(j - 1) * nu_s + b] = self.group_matrix[a][b]
            return ring.monomial(tuple(exps))
        out = ring.zero()
        for b in range(nu_s):
            c = self.group_matrix[a][b]
            if c:
                out = out + ring.var(ring.names[(j - 1) * nu_s + b]).scale(c)
        return out

    def level_hom(self, n):
        """Ring pullback O(target level n) → O(source level n)."""
        hom = self._level_homs.get(n)
        if hom is None:
            src = self.source.level(n)
            tgt = self.target.level(n)
            images = []
            for j in range(1, n + 1):
                for a in range(self.target.nu):
                    images.append(self._group_image(src.ring, n, j, a))
            for i in range(self.target.e):
                images.append(src.from_base.apply(self.base_images[i]))
            try:
                hom = RingHom(tgt.ring, src.ring, images)
            except ValueError as exc:
                raise ModelError("morphism datum", str(exc))
            self._level_homs[n] = hom
        return hom

    def _eps_expansion(self, n, i):
        """Wedge-label expansion of the pulled target coframe i at level n."""
        rows = self._eps_rows.get(n)
        if rows is None:
            lv = self.source.level(n)
            rows = []
            for ti in range(self.target.e):
                row = []
                for l in range(self.source.e):
                    c = self.eps_matrix[ti][l]
                    if c.is_zero():
                        continue
                    lifted = lv.from_base.apply(c)
                    row.append(
                        (l, TupleFn(lv.ring, lv.arity, lv.size, {(): lifted})))
                rows.append(row)
            self._eps_rows[n] = rows
        return rows[i]

    def _sym_table(self, sym):
        """Expansion of a pulled symmetric word: {source word: coefficient}."""
        table = self._sym_tables.get(sym)
        if table is None:
            table = {(): Fraction(1)}
            for a in sym:
                nxt = {}
                for word, c in table.items():
                    for b in range(self.source.nu):
                        l = self.group_matrix[a][b]
                        if not l:
                            continue
                        key = sym_insert(word, b)
                        s = nxt.get(key, Fraction(0)) + c * l
                        if s:
                            nxt[key] = s
                        elif key in nxt:
                            del nxt[key]
                table = nxt
            self._sym_tables[sym] = table
        return table

    # -- the complex map -------------------------------------------------------

    def pull(self, x):
        """The induced map K(target) → K(source)."""
        if x.model is not self.target:
            raise ValueError("element does not live on the target model")
        out = KElement(self.source)
        for n, wedge, sym, coeff in x.terms():
            hom = self.level_hom(n)
            lv = self.source.level(n)
            poly = coeff.data.get(())
            if poly is None:
                continue
            pulled = TupleFn(lv.ring, lv.arity, lv.size, {(): hom.apply(poly)})
            expansions = [self._eps_expansion(n, i) for i in wedge]
            for word, c in self._sym_table(sym).items():
                _distribute(out, n, pulled.scale(c), expansions, word)
        return out

    # -- verification ----------------------------------------------------------

    def _check_equivariance(self):
        src_ring = self.source.action.ring
        tgt_ring = self.target.action.ring
        nu_s, nu_t = self.source.nu, self.target.nu
        images = []
        for a in range(nu_t):
            if self.torus:
                exps = [0] * len(src_ring.names)
                for b in range(nu_s):
                    exps[b] = self.group_matrix[a][b]
                images.append(src_ring.monomial(tuple(exps)))
            else:
                im = src_ring.zero()
                for b in range(nu_s):
                    c = self.group_matrix[a][b]
                    if c:
                        im = im + src_ring.var(src_ring.names[b]).scale(c)
                images.append(im)
        for i in range(self.target.e):
            beta = self.base_images[i]
            images.append(Poly(src_ring, {
                (0,) * nu_s + exps: c for exps, c in beta.terms.items()
            }))
        try:
            lam_beta = RingHom(tgt_ring, src_ring, images)
        except ValueError as exc:
            raise ModelError("morphism datum", str(exc))
        act_src = RingHom(
            self.source.base.ring, src_ring,
            [_reinterpret(src_ring, im) for im in self.source.action.images])
        for i in range(self.target.e):
            via_target = lam_beta.apply(
                _reinterpret(tgt_ring, self.target.action.images[i]))
            via_source = act_src.apply(self.base_images[i])
            if via_target != via_source:
                raise ModelError(
                    "equivariance",
                    "pullback of %s: action-then-map %s != map-then-action %s"
                    % (self.target.base.names[i], via_target, via_source),
                )


def check_chain_map(morphism, max_degree, stage=1, max_radius=2,
                    check_cup=True):
    """Assert pull∘op = op∘pull for op in (phi, cech, derham, contraction) on
    truncated sector bases of the target, and multiplicativity for cup on the
    basis pairs of lowest degrees.  Returns a report dict; commutation
    failures are collected as witnesses."""
    from .truncation import Grading, Truncation

    target = morphism.target
    grading = Grading(target)
    ops = (("phi", phi), ("cech", cech), ("derham", derham),
           ("iota", contraction))
    witnesses = []
    checked = 0
    sectors = []
    radius = 0
    while radius <= max_radius:
        secs = grading.sectors_at_radius(radius)
        if not secs:
            break
        sectors.extend(secs)
        radius += 1
    for sector in sectors:
        tr = Truncation(target, sector, stage if grading.uses_stage else 0,
                        max_degree, mode="k")
        for deg in range(max_degree + 1):
            for key in tr.bases.get(deg, ()):
                el = tr.element_of(key)
                pel = morphism.pull(el)
                for name, op in ops:
                    lhs = morphism.pull(op(el))
                    rhs = op(pel)
                    checked += 1
                    if not (lhs - rhs).is_zero():
                        witnesses.append(
                            "%s does not commute on %s (sector %r)"
                            % (name, tr._render(key), sector))
        if check_cup:
            low = [k for d in (0, 1) for k in tr.bases.get(d, ())]
            for k1 in low:
                for k2 in low:
                    a, b = tr.element_of(k1), tr.element_of(k2)
                    lhs = morphism.pull(cup(a, b))
                    rhs = cup(morphism.pull(a), morphism.pull(b))
                    checked += 1
                    if not (lhs - rhs).is_zero():
                        witnesses.append(
                            "cup does not commute on %s, %s (sector %r)"
                            % (tr._render(k1), tr._render(k2), sector))
    return {"ok": not witnesses, "checked": checked, "witnesses": witnesses}


def pullback_complex_map(morphism, max_degree=2):
    """The degree-preserving map K(target) → K(source), certified to commute
    with all four differentials on truncated sector bases first."""
    report = check_chain_map(morphism, max_degree)
    if not report["ok"]:
        raise ModelError("chain map", "; ".join(report["witnesses"][:3]))
    return morphism.pull


# ---------------------------------------------------------------------------
# the induced map on cohomology


def _slice_for(model, sector, max_degree, start_stage):
    from .truncation import Grading, Truncation
    from .cohomology import total_operator

    grading = Grading(model)
    stage = start_stage if grading.uses_stage else 0
    tr = Truncation(model, sector, stage, max_degree + 1, mode="k")
    mats = tr.assemble(total_operator)
    return tr, mats


def induced_cohomology_map(morphism, max_degree, jobs=1):
    """Per-degree rank of H(target) → H(source) on pulled representatives,
    plus both dimension tables and an isomorphism verdict."""
    from .cohomology import total_cohomology
    from .truncation import Grading, TruncationError

    source, target = morphism.source, morphism.target
    tgt_res = total_cohomology(target, max_degree, jobs=jobs)
    src_res = total_cohomology(source, max_degree, jobs=jobs)
    src_grading = Grading(source)

    def route(el):
        """Split a source element into per-sector monomial buckets."""
        buckets = {}
        for n, wedge, sym, tf in el.terms():
            weight = src_grading.key_weight(wedge, sym, False)
            for tup, poly in tf.data.items():
                for exps, c in poly.terms.items():
                    sec = src_grading.sector_of(n, exps, weight)
                    buckets.setdefault(sec, {})[
                        (n, wedge, sym, tup, exps)] = c
        return buckets

    # pull every representative first; slices are sized afterwards so that a
    # late stage escalation cannot invalidate earlier coordinates
    pulled = {deg: [] for deg in range(max_degree + 1)}
    needed = {}
    for sec in sorted(tgt_res["_sectors"]):
        res = tgt_res["_sectors"][sec]
        tr = res["trunc"]
        for deg in range(max_degree + 1):
            for vec in res["reps"].get(deg, ()):
                el = None
                for pos, c in sorted(vec.items()):
                    t = tr.element_of(tr.bases[deg][pos]).scale(c)
                    el = t if el is None else el + t
                buckets = route(morphism.pull(el))
                pulled[deg].append(buckets)
                for sec_s, mono in buckets.items():
                    needed.setdefault(sec_s, set()).update(mono)
    slices = {
        sec: (r["trunc"], r["mats"])
        for sec, r in src_res["_sectors"].items()
    }
    for sec in sorted(needed):
        keys = needed[sec]
        hit = slices.get(sec)
        stage = hit[0].stage if hit else (
            1 if src_grading.uses_stage else 0)
        while True:
            if hit is None:
                hit = _slice_for(source, sec, max_degree, stage)
                slices[sec] = hit
            if all(key in hit[0].index for key in keys):
                break
            stage += 1
            if stage > 4:
                raise TruncationError(
                    "pulled representative escapes every probed stage "
                    "(sector %r)" % (sec,))
            hit = None

    ranks = []
    for deg in range(max_degree + 1):
        involved = set()
        for buckets in pulled[deg]:
            involved.update(buckets)
        elim = Eliminator()
        offsets = {}
        base = 0
        for sec in sorted(involved):
            tr_s, mats_s = slices[sec]
            offsets[sec] = base
            if deg:
                for col in mats_s[deg - 1].cols:
                    if col:
                        elim.feed({base + i: c for i, c in col.items()})
            base += tr_s.dim(deg)
        rank = 0
        for buckets in pulled[deg]:
            vec = {}
            for sec, mono in buckets.items():
                tr_s = slices[sec][0]
                off = offsets[sec]
                for key, c in mono.items():
                    kdeg, pos = tr_s.index[key]
                    if kdeg != deg:
                        raise TruncationError(
                            "pulled representative changed degree at %r"
                            % (key,))
                    vec[off + pos] = c
            if vec and elim.feed(vec) is None:
                rank += 1
        ranks.append(rank)
    iso = all(
        ranks[d] == src_res["dims"][d] == tgt_res["dims"][d]
        for d in range(max_degree + 1)
    )
    return {
        "degrees": list(range(max_degree + 1)),
        "ranks": ranks,
        "source_dims": src_res["dims"],
        "target_dims": tgt_res["dims"],
        "isomorphism": iso,
        "stabilized": tgt_res["stabilized"] and src_res["stabilized"],
    }
