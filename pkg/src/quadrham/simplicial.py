"""Per-level geometry of the groupoid nerve.

Each Level materializes the coordinate ring of one nerve level together with
everything the operator layer needs there:

  - the ambient coframe labels in canonical order, with the dual derivations
    and the coordinate expansion of every coframe entry;
  - face and degeneracy pullbacks (coefficient homs, the full ambient coframe
    matrices, and the fiberwise frame transports of the 0-anchored bundles);
  - the connection covectors ρ_q, the splittings η_q, the comparison δ, the
    anchor dual, and the difference covectors ω_qr.

Label scheme: ("g", j, a) is the a-th invariant coframe entry of arrow block
j ≥ 1; ("x", 0, i) is the i-th base coframe entry; pair models use ("s", j, i)
for the i-th frame coframe entry on slot j ≥ 0.  Tuples sort canonically.
"""

from __future__ import annotations

import itertools

from .poly import Poly, Ring, RingHom
from .scalars import TupleFn, TupleHom


class FaceMap:
    """Pullback data of one face X_{n+1} → X_n."""

    __slots__ = ("q", "src", "tgt", "hom", "_coframe", "_eps", "ups")

    def __init__(self, q, src, tgt, hom, eps_pending=False):
        self.q = q
        self.src = src
        self.tgt = tgt
        self.hom = hom
        self._coframe = None
        # eps: e×e fiberwise frame transport (None = identity); only the
        # 0-face of an anchored kind transports frames
        self._eps = "pending" if eps_pending else None
        self.ups = None  # abelian/trivial coadjoint: identity throughout

    @property
    def coframe(self):
        if self._coframe is None:
            self._coframe = pullback_coframe(self.src, self.tgt, self.hom)
        return self._coframe

    @property
    def eps(self):
        if self._eps == "pending":
            self._eps = _base_cpart(self.src, self.tgt, self.coframe)
        return self._eps


class DegenMap:
    """Pullback data of one degeneracy X_{n-1} → X_n (unit insertion)."""

    __slots__ = ("q", "src", "tgt", "hom", "_coframe")

    def __init__(self, q, src, tgt, hom):
        self.q = q
        self.src = src      # level n (the domain of the pullback)
        self.tgt = tgt      # level n-1
        self.hom = hom
        self._coframe = None

    @property
    def coframe(self):
        if self._coframe is None:
            self._coframe = pullback_coframe(self.src, self.tgt, self.hom)
        return self._coframe


class CupSupport:
    """The two segment projections a concatenation product pulls along."""

    __slots__ = ("n", "m", "s_hom", "t_hom", "_t_eps", "src_first", "src_second",
                 "tgt")

    def __init__(self, n, m, s_hom, t_hom, src_first, src_second, tgt,
                 eps_pending=False):
        self.n = n
        self.m = m
        self.s_hom = s_hom
        self.t_hom = t_hom
        self.src_first = src_first
        self.src_second = src_second
        self.tgt = tgt
        self._t_eps = "pending" if eps_pending else None

    @property
    def t_eps(self):
        if self._t_eps == "pending":
            cof = pullback_coframe(self.src_second, self.tgt, self.t_hom)
            self._t_eps = _base_cpart(self.src_second, self.tgt, cof)
        return self._t_eps


class Level:
    """All structure carried by one nerve level (see module docstring)."""

    def __init__(self, model, n):
        self.model = model
        self.n = n
        kind = model.kind
        self.is_pair = kind == "pair"
        self.is_finite = model.finite
        group, base = model.group, model.base
        if self.is_pair:
            names, laurent = [], []
            for j in range(n + 1):
                names.extend("%s%d" % (nm, j) for nm in base.names)
                laurent.extend(base.laurent)
            self.ring = Ring(names, laurent)
            self.arity, self.size = 0, 1
            self.labels = [
                ("s", j, i) for j in range(n + 1) for i in range(base.e)
            ]
        elif self.is_finite:
            self.ring = Ring(base.names, base.laurent)
            self.arity, self.size = n, group.order
            self.labels = [("x", 0, i) for i in range(base.e)]
        else:
            names, laurent = [], []
            for j in range(1, n + 1):
                names.extend("%s%d" % (nm, j) for nm in group.names)
                laurent.extend(group.laurent)
            names.extend(base.names)
            laurent.extend(base.laurent)
            self.ring = Ring(names, laurent)
            self.arity, self.size = 0, 1
            self.labels = [
                ("g", j, a) for j in range(1, n + 1) for a in range(group.nu)
            ] + [("x", 0, i) for i in range(base.e)]
        self._tuples = None
        self._faces = None
        self._degens = None
        self._rho = {}
        self._eta = {}
        self._omega = {}
        self._phi_dual = None
        self._delta = None
        self._from_base = None
        self._anchor_tf = None
        self._christoffel = None
        self._cofd = {}

    # -- coefficients -------------------------------------------------------

    @property
    def all_tuples(self):
        if self._tuples is None:
            self._tuples = list(
                itertools.product(range(self.size), repeat=self.arity)
            )
        return self._tuples

    def zero(self):
        return TupleFn(self.ring, self.arity, self.size, {})

    def full(self, p: Poly) -> TupleFn:
        """The coefficient equal to p on every group tuple."""
        return TupleFn(
            self.ring, self.arity, self.size, {t: p for t in self.all_tuples}
        )

    def one(self):
        return self.full(self.ring.one())

    def constant(self, c):
        return self.full(self.ring.constant(c))

    def var(self, name):
        return self.full(self.ring.var(name))

    def block_var(self, j, c):
        """Arrow-block variable name (transformation kinds)."""
        return "%s%d" % (self.model.group.names[c], j)

    def slot_var(self, j, i):
        """Slot variable name (pair kind)."""
        return "%s%d" % (self.model.base.names[i], j)

    @property
    def from_base(self) -> RingHom:
        """Inclusion of the base coordinate ring into this level's ring."""
        if self._from_base is None:
            base = self.model.base
            if self.is_pair:
                images = [self.ring.var(self.slot_var(0, i)) for i in range(base.e)]
            else:
                images = [self.ring.var(nm) for nm in base.names]
            self._from_base = RingHom(base.ring, self.ring, images)
        return self._from_base

    def base_poly(self, p: Poly) -> TupleFn:
        return self.full(self.from_base.apply(p))

    # -- derivations and coframe expansions ---------------------------------

    def derivation(self, label, tf: TupleFn) -> TupleFn:
        kind, j, idx = label
        if kind == "g":
            nm = self.block_var(j, idx)
            if self.model.group.laurent[idx]:
                return tf.log_derive(nm)
            return tf.derive(nm)
        if kind == "x":
            base = self.model.base
            nm = base.names[idx]
            return tf.log_derive(nm) if base.laurent[idx] else tf.derive(nm)
        # pair slot: θ_idx on slot j
        base = self.model.base
        coeffs = self.model.frame_coeffs[idx]
        out = self.zero()
        slot_hom = self._slot_hom(j)
        for l in range(base.e):
            if coeffs[l].is_zero():
                continue
            coeff_here = slot_hom.apply(coeffs[l])
            d = tf.derive(self.slot_var(j, l))
            out = out + d.map_values(lambda p, c=coeff_here: p * c)
        return out

    def _slot_hom(self, j):
        base = self.model.base
        return RingHom(
            base.ring, self.ring,
            [self.ring.var(self.slot_var(j, i)) for i in range(base.e)],
        )

    def coframe_in_coords(self, label):
        """[(variable name, Poly coefficient)] with label = Σ coeff·d(var)."""
        kind, j, idx = label
        if kind == "g":
            nm = self.block_var(j, idx)
            v = self.ring.var(nm)
            if self.model.group.laurent[idx]:
                return [(nm, v ** -1)]
            return [(nm, self.ring.one())]
        if kind == "x":
            base = self.model.base
            nm = base.names[idx]
            v = self.ring.var(nm)
            if base.laurent[idx]:
                return [(nm, v ** -1)]
            return [(nm, self.ring.one())]
        base = self.model.base
        inv = self.model.frame_coeffs_inv
        slot_hom = self._slot_hom(j)
        out = []
        for l in range(base.e):
            coeff = inv[l][idx]
            if not coeff.is_zero():
                out.append((self.slot_var(j, l), slot_hom.apply(coeff)))
        return out

    def expansion(self, tf: TupleFn):
        """Exterior derivative of a coefficient over the ambient coframe."""
        out = []
        for label in self.labels:
            d = self.derivation(label, tf)
            if not d.is_zero():
                out.append((label, d))
        return out

    def coframe_differential(self, label):
        """d(label) = Σ coeff·A∧B for non-closed frames; [(A, B, coeff)]."""
        got = self._cofd.get(label)
        if got is not None:
            return got
        out = []
        if label[0] == "s":
            from .groupoids import structure_constants

            consts = structure_constants(self.model)
            _, j, k = label
            e = self.model.base.e
            for a in range(e):
                for b in range(a + 1, e):
                    c = consts[a][b][k]
                    if c:
                        out.append(
                            (("s", j, a), ("s", j, b), self.constant(-c))
                        )
        self._cofd[label] = out
        return out

    def christoffel(self):
        """∇υ_a = Σ (label, b, coeff): label ⊗ υ_b — zero for anchored kinds,
        the constant structure tensor along slot 0 for pair kinds."""
        if self._christoffel is None:
            nu = self.model.nu
            out = [[] for _ in range(nu)]
            if self.is_pair:
                from .groupoids import structure_constants

                consts = structure_constants(self.model)
                e = self.model.base.e
                for k in range(e):
                    for i in range(e):
                        for b in range(e):
                            c = consts[b][i][k]
                            if c:
                                out[k].append((("s", 0, i), b, self.constant(-c)))
            self._christoffel = out
        return self._christoffel

    # -- faces and degeneracies ---------------------------------------------

    @property
    def faces(self):
        if self._faces is None:
            self._faces = [
                _build_face(self.model, self, q) for q in range(self.n + 2)
            ]
        return self._faces

    @property
    def degens(self):
        if self._degens is None:
            self._degens = [
                _build_degen(self.model, self, q) for q in range(self.n)
            ]
        return self._degens

    # -- structure matrices ---------------------------------------------------

    @property
    def anchor_tf(self):
        """Anchor matrix entries as level coefficients."""
        if self._anchor_tf is None:
            self._anchor_tf = [
                [self.base_poly(entry) for entry in row]
                for row in self.model.anchor
            ]
        return self._anchor_tf

    def rho_cov(self, q):
        """Connection covector: {label: ((υ-index, coeff), …)}."""
        got = self._rho.get(q)
        if got is not None:
            return got
        model, n = self.model, self.n
        s = model.signs
        out = {}
        if self.is_pair:
            for i in range(model.e):
                out[("s", q, i)] = ((i, self.constant(s.rho_diag)),)
        elif not self.is_finite:
            nu = model.nu
            if q == 0:
                F = self.anchor_tf
                for i in range(model.e):
                    row = tuple(
                        (a, F[i][a]) for a in range(nu) if not F[i][a].is_zero()
                    )
                    if row:
                        out[("x", 0, i)] = row
                if n >= 1:
                    for b in range(nu):
                        out[("g", 1, b)] = ((b, self.constant(s.rho_off)),)
            else:
                for b in range(nu):
                    out[("g", q, b)] = ((b, self.constant(s.rho_diag)),)
                if q < n:
                    for b in range(nu):
                        out[("g", q + 1, b)] = ((b, self.constant(s.rho_off)),)
        self._rho[q] = out
        return out

    @property
    def delta(self):
        """Comparison with the 0-anchored forms: {label: ε-index}."""
        if self._delta is None:
            if self.is_pair:
                self._delta = {
                    ("s", j, i): i
                    for j in range(self.n + 1)
                    for i in range(self.model.e)
                }
            else:
                self._delta = {("x", 0, i): i for i in range(self.model.e)}
        return self._delta

    def eta(self, q):
        """q-th splitting: ε_i ↦ [(label, coeff)]."""
        got = self._eta.get(q)
        if got is not None:
            return got
        model = self.model
        out = []
        if self.is_pair:
            for i in range(model.e):
                out.append([(("s", q, i), self.one())])
        elif self.is_finite:
            for i in range(model.e):
                out.append([(("x", 0, i), self.one())])
        else:
            F = self.anchor_tf
            for i in range(model.e):
                terms = [(("x", 0, i), self.one())]
                for l in range(1, q + 1):
                    for b in range(model.nu):
                        if not F[i][b].is_zero():
                            terms.append((("g", l, b), F[i][b]))
                out.append(terms)
        self._eta[q] = out
        return out

    @property
    def phi_dual(self):
        """Anchor dual: ε_i ↦ [(υ-index, coeff)]."""
        if self._phi_dual is None:
            model = self.model
            sign = model.signs.anchor_sign
            out = []
            if self.is_pair:
                for i in range(model.e):
                    out.append([(i, self.constant(sign))])
            else:
                F = self.anchor_tf
                for i in range(model.e):
                    out.append(
                        [
                            (a, F[i][a].scale(sign))
                            for a in range(model.nu)
                            if not F[i][a].is_zero()
                        ]
                    )
            self._phi_dual = out
        return self._phi_dual

    def omega(self, q, r):
        """Difference covector ω_qr: {label: ((υ-index, coeff), …)}."""
        got = self._omega.get((q, r))
        if got is not None:
            return got
        model = self.model
        out = {}
        if self.is_pair:
            for i in range(model.e):
                out[("s", q, i)] = ((i, self.one()),)
                out[("s", r, i)] = ((i, -self.one()),)
        elif not self.is_finite:
            for j in range(q + 1, r + 1):
                for b in range(model.nu):
                    out[("g", j, b)] = ((b, -self.one()),)
        self._omega[(q, r)] = out
        return out

    def rho_vec(self, q):
        """Vector-side connection columns in the frame dual to the ambient
        coframe: per υ-index a, {label: coeff}."""
        model = self.model
        out = []
        if self.is_pair:
            for a in range(model.nu):
                out.append({("s", q, a): self.one()})
        elif self.is_finite:
            pass
        elif q == 0:
            F = self.anchor_tf
            for a in range(model.nu):
                col = {}
                if self.n >= 1:
                    col[("g", 1, a)] = -self.one()
                for i in range(model.e):
                    if not F[i][a].is_zero():
                        col[("x", 0, i)] = F[i][a]
                out.append(col)
        else:
            for a in range(model.nu):
                col = {("g", q, a): self.one()}
                if q < self.n:
                    col[("g", q + 1, a)] = -self.one()
                out.append(col)
        return out

    def e_columns(self, i):
        """Invariant directions (the η-side frame) as coordinate columns."""
        if self.is_pair:
            return {("s", j, i): self.one() for j in range(self.n + 1)}
        return {("x", 0, i): self.one()}


def build_level(model, n):
    return Level(model, n)


# ---------------------------------------------------------------------------
# generic coframe pullback


def pullback_coframe(src: Level, tgt: Level, hom: TupleHom):
    """Ambient coframe matrix of a structural map: for every source label L,
    the expansion of its pullback over the target labels."""
    out = {}
    for L in src.labels:
        acc = {}
        for varname, coeff in src.coframe_in_coords(L):
            img = hom.apply(src.var(varname))
            coeff_pulled = hom.apply(src.full(coeff))
            for Lt, dtf in tgt.expansion(img):
                term = dtf * coeff_pulled
                prev = acc.get(Lt)
                acc[Lt] = term if prev is None else prev + term
        out[L] = [(Lt, tf) for Lt, tf in sorted(acc.items()) if not tf.is_zero()]
    return out


def _base_cpart(src: Level, tgt: Level, coframe):
    """Fiberwise frame transport: the base-coframe block of the ambient
    matrix (the arrow-block components are the frame variation, not part of
    the bundle identification)."""
    e = src.model.e
    eps = [[tgt.zero() for _ in range(e)] for _ in range(e)]
    for i in range(e):
        for Lt, tf in coframe.get(("x", 0, i), ()):
            if Lt[0] == "x":
                eps[i][Lt[2]] = tf
    return eps


# ---------------------------------------------------------------------------
# face/degeneracy construction per kind


def _build_face(model, lv: Level, q):
    n = lv.n
    tgt = model.level(n + 1)
    if lv.is_pair:
        images = []
        for j in range(n + 1):
            jj = j if j < q else j + 1
            images.extend(
                tgt.ring.var(tgt.slot_var(jj, i)) for i in range(model.base.e)
            )
        hom = TupleHom.plain(RingHom(lv.ring, tgt.ring, images))
        return FaceMap(q, lv, tgt, hom, eps_pending=False)
    if lv.is_finite:
        group, action = model.group, model.action
        ident = RingHom(
            lv.ring, tgt.ring, [tgt.ring.var(nm) for nm in lv.ring.names]
        )
        assignment = {}
        for out_t in tgt.all_tuples:
            if q == 0:
                # pullback f ↦ f(γ_1 · x): substitute through the element hom
                act = action.homs[out_t[0]]
                hom_q = RingHom(
                    lv.ring, tgt.ring,
                    [_lift_poly(act.images[i], tgt.ring)
                     for i in range(model.base.e)],
                )
                assignment[out_t] = (out_t[1:], hom_q)
            elif q <= n:
                merged = group.compose(out_t[q], out_t[q - 1])
                src_t = out_t[: q - 1] + (merged,) + out_t[q + 1:]
                assignment[out_t] = (src_t, ident)
            else:
                assignment[out_t] = (out_t[:-1], ident)
        hom = TupleHom(n, n + 1, group.order, assignment)
        return FaceMap(q, lv, tgt, hom, eps_pending=(q == 0 and model.e > 0))
    # continuous transformation kinds
    group, base, action = model.group, model.base, model.action
    images = []
    if q == 0:
        act_to_tgt = RingHom(
            action.ring,
            tgt.ring,
            [tgt.ring.var(tgt.block_var(1, c)) for c in range(group.nu)]
            + [tgt.ring.var(nm) for nm in base.names],
        )
        for l in range(1, n + 1):
            images.extend(
                tgt.ring.var(tgt.block_var(l + 1, c)) for c in range(group.nu)
            )
        images.extend(act_to_tgt.apply(img) for img in action.images)
    elif q <= n:
        for l in range(1, n + 1):
            if l < q:
                images.extend(
                    tgt.ring.var(tgt.block_var(l, c)) for c in range(group.nu)
                )
            elif l == q:
                first = [
                    tgt.ring.var(tgt.block_var(q + 1, c)) for c in range(group.nu)
                ]
                second = [
                    tgt.ring.var(tgt.block_var(q, c)) for c in range(group.nu)
                ]
                images.extend(group.mult_images(first, second))
            else:
                images.extend(
                    tgt.ring.var(tgt.block_var(l + 1, c)) for c in range(group.nu)
                )
        images.extend(tgt.ring.var(nm) for nm in base.names)
    else:
        for l in range(1, n + 1):
            images.extend(
                tgt.ring.var(tgt.block_var(l, c)) for c in range(group.nu)
            )
        images.extend(tgt.ring.var(nm) for nm in base.names)
    hom = TupleHom.plain(RingHom(lv.ring, tgt.ring, images))
    return FaceMap(q, lv, tgt, hom, eps_pending=(q == 0 and model.e > 0))


def _lift_poly(p: Poly, ring: Ring) -> Poly:
    """Re-home a polynomial into a ring that shares its variable names."""
    src = p.ring
    return RingHom(src, ring, [ring.var(nm) for nm in src.names]).apply(p)


def _build_degen(model, lv: Level, j):
    """Pullback of the degeneracy inserting the identity arrow at slot j+1:
    maps level-n coefficients to level-(n-1) coefficients."""
    n = lv.n
    tgt = model.level(n - 1)
    if lv.is_pair:
        images = []
        for l in range(n + 1):
            ll = l if l <= j else l - 1
            images.extend(
                tgt.ring.var(tgt.slot_var(ll, i)) for i in range(model.base.e)
            )
        hom = TupleHom.plain(RingHom(lv.ring, tgt.ring, images))
        return DegenMap(j, lv, tgt, hom)
    if lv.is_finite:
        group = model.group
        e_idx = group.unit_index
        ident = RingHom(
            lv.ring, tgt.ring, [tgt.ring.var(nm) for nm in lv.ring.names]
        )
        assignment = {}
        for out_t in tgt.all_tuples:
            src_t = out_t[:j] + (e_idx,) + out_t[j:]
            assignment[out_t] = (src_t, ident)
        hom = TupleHom(n, n - 1, group.order, assignment)
        return DegenMap(j, lv, tgt, hom)
    group, base = model.group, model.base
    unit = group.unit_values()
    images = []
    for l in range(1, n + 1):
        if l <= j:
            images.extend(
                tgt.ring.var(tgt.block_var(l, c)) for c in range(group.nu)
            )
        elif l == j + 1:
            images.extend(tgt.ring.constant(c) for c in unit)
        else:
            images.extend(
                tgt.ring.var(tgt.block_var(l - 1, c)) for c in range(group.nu)
            )
    images.extend(tgt.ring.var(nm) for nm in base.names)
    hom = TupleHom.plain(RingHom(lv.ring, tgt.ring, images))
    return DegenMap(j, lv, tgt, hom)


# ---------------------------------------------------------------------------
# concatenation support and segment transports


def cup_support(model, n, m) -> CupSupport:
    """Pullbacks along the first-n and last-m segment projections of level
    n+m, the latter with its frame transport to the 0-anchor."""
    lv_n, lv_m, tgt = model.level(n), model.level(m), model.level(n + m)
    if model.kind == "pair":
        e = model.base.e
        s_imgs = [
            tgt.ring.var(tgt.slot_var(j, i)) for j in range(n + 1) for i in range(e)
        ]
        t_imgs = [
            tgt.ring.var(tgt.slot_var(n + j, i))
            for j in range(m + 1)
            for i in range(e)
        ]
        s_hom = TupleHom.plain(RingHom(lv_n.ring, tgt.ring, s_imgs))
        t_hom = TupleHom.plain(RingHom(lv_m.ring, tgt.ring, t_imgs))
        return CupSupport(n, m, s_hom, t_hom, lv_n, lv_m, tgt)
    if model.finite:
        group, action = model.group, model.action
        ident_n = RingHom(
            lv_n.ring, tgt.ring, [tgt.ring.var(nm) for nm in lv_n.ring.names]
        )
        s_assign, t_assign = {}, {}
        for out_t in tgt.all_tuples:
            s_assign[out_t] = (out_t[:n], ident_n)
            h = group.unit_index
            for j in range(n):
                h = group.compose(out_t[j], h)
            act = action.homs[h]
            t_assign[out_t] = (
                out_t[n:],
                RingHom(
                    lv_m.ring, tgt.ring,
                    [_lift_poly(img, tgt.ring) for img in act.images],
                ),
            )
        s_hom = TupleHom(n, n + m, group.order, s_assign)
        t_hom = TupleHom(m, n + m, group.order, t_assign)
        return CupSupport(
            n, m, s_hom, t_hom, lv_n, lv_m, tgt,
            eps_pending=(n > 0 and model.e > 0),
        )
    group, base, action = model.group, model.base, model.action
    s_imgs = []
    for l in range(1, n + 1):
        s_imgs.extend(tgt.ring.var(tgt.block_var(l, c)) for c in range(group.nu))
    s_imgs.extend(tgt.ring.var(nm) for nm in base.names)
    s_hom = TupleHom.plain(RingHom(lv_n.ring, tgt.ring, s_imgs))
    t_imgs = []
    for l in range(1, m + 1):
        t_imgs.extend(
            tgt.ring.var(tgt.block_var(n + l, c)) for c in range(group.nu)
        )
    t_imgs.extend(_anchored_point(model, tgt, n))
    t_hom = TupleHom.plain(RingHom(lv_m.ring, tgt.ring, t_imgs))
    return CupSupport(
        n, m, s_hom, t_hom, lv_n, lv_m, tgt,
        eps_pending=(n > 0 and model.e > 0),
    )


def _anchored_point(model, lv: Level, q):
    """Base-coordinate expressions of the q-anchored point h_q·x over X_n."""
    base, group, action = model.base, model.group, model.action
    cur = [lv.ring.var(nm) for nm in base.names]
    for j in range(1, q + 1):
        hom = RingHom(
            action.ring,
            lv.ring,
            [lv.ring.var(lv.block_var(j, c)) for c in range(group.nu)] + cur,
        )
        cur = [hom.apply(img) for img in action.images]
    return cur


def segment_transport(model, q, r, n):
    """Fiberwise frame transport ψ_qr over X_n (e×e TupleFn matrix): the
    coframe Jacobian of the arrow segment q→r evaluated at the q-anchored
    point.  Satisfies ψ_qs = ψ_rs·ψ_qr (matrix product over O(X_n))."""
    if not (0 <= q < r <= n):
        raise ValueError("need 0 <= q < r <= n")
    lv = model.level(n)
    e = model.e
    if model.kind == "pair":
        return [
            [lv.one() if i == l else lv.zero() for l in range(e)] for i in range(e)
        ]
    if model.finite:
        group, action = model.group, model.action
        out = [[dict() for _ in range(e)] for _ in range(e)]
        for t in lv.all_tuples:
            h = group.unit_index
            for j in range(q, r):
                h = group.compose(t[j], h)
            # anchored point for this tuple: substitute x ↦ h_q·x afterwards
            hq = group.unit_index
            for j in range(q):
                hq = group.compose(t[j], hq)
            anchor = action.homs[hq]
            J = _finite_jacobian(model, action.homs[h])
            for i in range(e):
                for l in range(e):
                    p = anchor.apply(J[i][l])
                    if not p.is_zero():
                        out[i][l][t] = _lift_poly(p, lv.ring)
        return [
            [TupleFn(lv.ring, lv.arity, lv.size, out[i][l]) for l in range(e)]
            for i in range(e)
        ]
    group, base, action = model.group, model.base, model.action
    # segment product g_r ∘ … ∘ g_{q+1} as level-n expressions
    prod = [lv.ring.var(lv.block_var(q + 1, c)) for c in range(group.nu)]
    for j in range(q + 2, r + 1):
        blk = [lv.ring.var(lv.block_var(j, c)) for c in range(group.nu)]
        prod = group.mult_images(blk, prod)
    point = _anchored_point(model, lv, q)
    J = _action_jacobian(model)
    ev = RingHom(action.ring, lv.ring, prod + point)
    return [
        [lv.full(ev.apply(J[i][l])) for l in range(e)] for i in range(e)
    ]


def _action_jacobian(model):
    """Fiberwise coframe matrix of the action over O(G×X):
    α_g^*(c_i) = Σ_l J[i][l]·c_l."""
    base, action = model.base, model.action
    J = []
    for i in range(base.e):
        img = action.images[i]
        row = []
        for l in range(base.e):
            nm = base.names[l]
            entry = img.log_derive(nm) if base.laurent[l] else img.derive(nm)
            if base.laurent[i]:
                entry = entry * img ** -1
            row.append(entry)
        J.append(row)
    return J


def _finite_jacobian(model, hom: RingHom):
    """Coframe matrix of one finite group element's action over O(X)."""
    base = model.base
    J = []
    for i in range(base.e):
        img = hom.images[i]
        row = []
        for l in range(base.e):
            nm = base.names[l]
            entry = img.log_derive(nm) if base.laurent[l] else img.derive(nm)
            if base.laurent[i]:
                entry = entry * img ** -1
            row.append(entry)
        J.append(row)
    return J
