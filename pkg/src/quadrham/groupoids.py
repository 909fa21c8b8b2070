"""Groupoid presentations carrying a flat connection.

A model packages a finitely presented groupoid (transformation groupoid of a
group action, pair groupoid of a framed space, or the vector-bundle groupoid
of a trivial bundle — plus finite-group transformation groupoids) together
with the frame data every level of its nerve needs: invariant coframes on the
arrow directions, the chosen coframe on the base, the anchor, and the
connection covectors.

Frame conventions used throughout (certified by the structure identity suite,
see validate_structure and the operator tests):
  - base coframe: dx_i on affine coordinates, dt_i/t_i on torus coordinates;
  - arrow-block coframes: left-invariant Maurer-Cartan coframes;
  - the vertical frame υ is normalized so that the connection covector of a
    block evaluates to +υ on its own block and −υ on the following block,
    and the anchor dual reads ε_i ↦ +Σ_a F_ia·υ_a.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Poly, Ring, RingHom
from .scalars import TupleFn
from .signs import DEFAULT_SIGNS, SignConventions


class ModelError(ValueError):
    """A structural identity failed; carries the identity name and a witness."""

    def __init__(self, identity, witness):
        self.identity = identity
        self.witness = witness
        super().__init__("%s violated: %s" % (identity, witness))


def _disjoint(*name_groups):
    seen = set()
    for names in name_groups:
        for nm in names:
            if nm in seen:
                raise ValueError("coordinate name collision: %r" % nm)
            seen.add(nm)


# ---------------------------------------------------------------------------
# group data


class GroupModel:
    """A group presented for symbolic work.

    Continuous kinds ("torus", "additive") carry coordinate names and the
    closed-form multiplication/inverse/unit expressions of an abelian group;
    the finite kind carries an explicit element list and multiplication table
    (table[a][b] = a∘b with b acting first).
    """

    def __init__(self, kind, names=(), laurent=(), elements=None, table=None):
        self.kind = kind
        if kind in ("torus", "additive"):
            self.names = tuple(names)
            for nm in self.names:
                if nm and nm[-1].isdigit():
                    raise ValueError("group coordinate names must not end in digits")
            self.laurent = tuple(laurent)
            self.nu = len(self.names)
            self.ring = Ring(self.names, self.laurent)
            self.elements = None
            self.table = None
            self.order = None
        elif kind == "finite":
            self.names = ()
            self.laurent = ()
            self.nu = 0
            self.ring = None
            self.elements = list(elements)
            self.table = [list(row) for row in table]
            self.order = len(self.elements)
        else:
            raise ValueError("unknown group kind %r" % kind)

    # constructors ---------------------------------------------------------

    @classmethod
    def multiplicative(cls, name="g"):
        return cls("torus", (name,), (True,))

    @classmethod
    def additive(cls, names=("u",)):
        return cls("additive", tuple(names), (False,) * len(names))

    @classmethod
    def finite(cls, elements, table):
        g = cls("finite", elements=elements, table=table)
        g.validate()
        return g

    @classmethod
    def cyclic(cls, k):
        elements = ["r%d" % i for i in range(k)]
        elements[0] = "e"
        table = [[(a + b) % k for b in range(k)] for a in range(k)]
        return cls.finite(elements, table)

    # structure ------------------------------------------------------------

    @property
    def abelian(self):
        if self.kind == "finite":
            t = self.table
            n = self.order
            return all(t[a][b] == t[b][a] for a in range(n) for b in range(n))
        return True  # both continuous kinds here are abelian

    @property
    def unit_index(self):
        # unit element: the row acting as identity
        for a in range(self.order):
            if all(self.table[a][b] == b for b in range(self.order)):
                return a
        raise ModelError("group unit", "no identity element in table")

    def compose(self, a, b):
        """Product a∘b — b acts first."""
        return self.table[a][b]

    def inverse_of(self, a):
        e = self.unit_index
        for b in range(self.order):
            if self.table[a][b] == e and self.table[b][a] == e:
                return b
        raise ModelError("group inverse", "element %s has no inverse" % self.elements[a])

    def mult_images(self, first_factors, second_factors):
        """Variable images of the product (first∘second, second acts first)."""
        if self.kind == "torus":
            return [a * b for a, b in zip(first_factors, second_factors)]
        return [a + b for a, b in zip(first_factors, second_factors)]

    def inverse_images(self, factors):
        if self.kind == "torus":
            return [v ** -1 for v in factors]
        return [-v for v in factors]

    def unit_values(self):
        """Coordinates of the unit element as rational constants."""
        if self.kind == "torus":
            return [Fraction(1)] * self.nu
        return [Fraction(0)] * self.nu

    def mc_inverse_entry(self, i, a, block_vars):
        """Entry (i,a) of the matrix with d(g_i) = Σ_a entry·μ_a.

        For the torus μ = dg/g so the matrix is diag(g); for additive groups
        it is the identity.  Abelian only — the Maurer-Cartan data of the
        bundled groups.
        """
        if i != a:
            return None
        if self.kind == "torus":
            return block_vars[i]
        return block_vars[i].ring.one()

    def validate(self):
        if self.kind == "finite":
            n = self.order
            if len(self.table) != n or any(len(r) != n for r in self.table):
                raise ModelError("group table", "table is not %d×%d" % (n, n))
            e = self.unit_index
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        lhs = self.table[self.table[a][b]][c]
                        rhs = self.table[a][self.table[b][c]]
                        if lhs != rhs:
                            raise ModelError(
                                "group associativity",
                                "(%s∘%s)∘%s ≠ %s∘(%s∘%s)"
                                % tuple(self.elements[i] for i in (a, b, c, a, b, c)),
                            )
                self.inverse_of(a)
            return
        # continuous: check the closed forms symbolically in a 3-factor ring
        names = []
        for suffix in ("a", "b", "c"):
            names.extend("%s_%s" % (nm, suffix) for nm in self.names)
        ring3 = Ring(names, self.laurent * 3)
        va = [ring3.var("%s_a" % nm) for nm in self.names]
        vb = [ring3.var("%s_b" % nm) for nm in self.names]
        vc = [ring3.var("%s_c" % nm) for nm in self.names]
        ab = self.mult_images(va, vb)
        bc = self.mult_images(vb, vc)
        if self.mult_images(ab, vc) != self.mult_images(va, bc):
            raise ModelError("group associativity", "closed form is not associative")
        ones = [ring3.constant(c) for c in self.unit_values()]
        if self.mult_images(va, ones) != va or self.mult_images(ones, va) != va:
            raise ModelError("group unit", "unit law fails")
        if self.mult_images(va, self.inverse_images(va)) != ones:
            raise ModelError("group inverse", "inverse law fails")


# ---------------------------------------------------------------------------
# base space


class SpaceModel:
    """An affine/torus product space with its chosen global coframe."""

    def __init__(self, names, laurent):
        self.names = tuple(names)
        for nm in self.names:
            if nm and nm[-1].isdigit():
                raise ValueError("base coordinate names must not end in digits")
        self.laurent = tuple(laurent)
        self.ring = Ring(self.names, self.laurent)
        self.e = len(self.names)

    @classmethod
    def point(cls):
        return cls((), ())

    @classmethod
    def affine(cls, names=("x",)):
        return cls(tuple(names), (False,) * len(names))

    @classmethod
    def torus(cls, names=("t",)):
        return cls(tuple(names), (True,) * len(names))

    def coframe_name(self, i):
        nm = self.names[i]
        return "d%s/%s" % (nm, nm) if self.laurent[i] else "d%s" % nm

    def derive_along(self, i, p: Poly) -> Poly:
        """Derivative dual to coframe entry i (∂_x or t·∂_t)."""
        nm = self.names[i]
        return p.log_derive(nm) if self.laurent[i] else p.derive(nm)

    def coframe_degree(self, i):
        """Degree the i-th coframe entry contributes to the base multidegree."""
        return 1 if not self.laurent[i] else 0


# ---------------------------------------------------------------------------
# actions


class ActionModel:
    """A group action on the base, presented by its pullback.

    Continuous: images of the base coordinates in O(G×X) (group coordinates
    first).  Finite: one pullback RingHom of O(X) per group element.
    """

    def __init__(self, group, space, images=None, homs=None):
        self.group = group
        self.space = space
        if group.kind == "finite":
            self.homs = list(homs)
            self.images = None
            self.ring = None
        else:
            _disjoint(group.names, space.names)
            self.ring = Ring(group.names + space.names, group.laurent + space.laurent)
            self.images = list(images)
            self.homs = None

    # constructors ---------------------------------------------------------

    @classmethod
    def monomial(cls, group, space, weights):
        """x_i ↦ (Π_a g_a^{w[i][a]})·x_i — covers trivial, weight and
        multiplication actions of tori and trivial additive actions."""
        ring = Ring(group.names + space.names, group.laurent + space.laurent)
        gvars = [ring.var(nm) for nm in group.names]
        images = []
        for i, nm in enumerate(space.names):
            img = ring.var(nm)
            for a, w in enumerate(weights[i]):
                if w:
                    img = img * gvars[a] ** w
            images.append(img)
        return cls(group, space, images=images)

    @classmethod
    def trivial(cls, group, space):
        if group.kind == "finite":
            ident = RingHom(space.ring, space.ring,
                            [space.ring.var(nm) for nm in space.names])
            return cls(group, space, homs=[ident] * group.order)
        return cls.monomial(group, space, [[0] * group.nu for _ in range(space.e)])

    @classmethod
    def finite_from_images(cls, group, space, images_per_element):
        homs = [
            RingHom(space.ring, space.ring, imgs) for imgs in images_per_element
        ]
        return cls(group, space, homs=homs)

    # symbolic checks -------------------------------------------------------

    def validate(self):
        g, X = self.group, self.space
        if g.kind == "finite":
            e = g.unit_index
            idf = [X.ring.var(nm) for nm in X.names]
            if list(self.homs[e].images) != idf:
                raise ModelError("action unit", "unit element does not act trivially")
            for a in range(g.order):
                for b in range(g.order):
                    lhs = self.homs[a].then(self.homs[b])
                    rhs = self.homs[g.compose(a, b)]
                    if list(lhs.images) != list(rhs.images):
                        raise ModelError(
                            "action associativity",
                            "%s∘%s acts wrong" % (g.elements[a], g.elements[b]),
                        )
            return
        # continuous, two group factors
        names = (
            ["%s_a" % nm for nm in g.names]
            + ["%s_b" % nm for nm in g.names]
            + list(X.names)
        )
        ring2 = Ring(names, g.laurent * 2 + X.laurent)
        va = [ring2.var("%s_a" % nm) for nm in g.names]
        vb = [ring2.var("%s_b" % nm) for nm in g.names]
        vx = [ring2.var(nm) for nm in X.names]
        to2_inner = RingHom(self.ring, ring2, vb + vx)   # g ↦ g_b, x ↦ x
        inner = [to2_inner.apply(img) for img in self.images]  # g_b·x
        outer_hom = RingHom(self.ring, ring2, va + inner)  # g ↦ g_a, x ↦ g_b·x
        lhs = [outer_hom.apply(img) for img in self.images]  # g_a·(g_b·x)
        prod = g.mult_images(va, vb)                        # g_a∘g_b, b first
        prod_hom = RingHom(self.ring, ring2, prod + vx)
        rhs = [prod_hom.apply(img) for img in self.images]
        if lhs != rhs:
            raise ModelError("action associativity", "g·(h·x) ≠ (gh)·x")
        unit_hom = RingHom(
            self.ring,
            X.ring,
            [X.ring.constant(c) for c in g.unit_values()]
            + [X.ring.var(nm) for nm in X.names],
        )
        if [unit_hom.apply(img) for img in self.images] != [
            X.ring.var(nm) for nm in X.names
        ]:
            raise ModelError("action unit", "unit does not act trivially")

    def anchor_matrix(self):
        """F[i][a] over O(X): fundamental field of the a-th frame element in
        the invariant base frame (differentiate the orbit map at the unit)."""
        g, X = self.group, self.space
        if g.kind == "finite":
            return [[] for _ in range(X.e)]
        unit_hom = RingHom(
            self.ring,
            X.ring,
            [X.ring.constant(c) for c in g.unit_values()]
            + [X.ring.var(nm) for nm in X.names],
        )
        F = []
        for i in range(X.e):
            row = []
            img = self.images[i]
            for a in range(g.nu):
                v = unit_hom.apply(img.derive(g.names[a]))
                if X.laurent[i]:
                    v = v * X.ring.var(X.names[i]) ** -1
                row.append(v)
            F.append(row)
        return F


# ---------------------------------------------------------------------------
# matrix inversion over a ring (unit-monomial pivots only)


def invert_matrix_over_ring(rows, ring):
    """Invert a square matrix of Polys by Gauss-Jordan with unit-monomial
    pivots; raises if the matrix is not invertible over the ring."""
    n = len(rows)
    aug = [[rows[i][j] for j in range(n)] + [ring.one() if k == i else ring.zero()
                                             for k in range(n)]
           for i, k_row in enumerate(range(n))]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col].is_unit_monomial():
                piv = r
                break
        if piv is None:
            raise ModelError("frame inversion", "no unit pivot in column %d" % col)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col] ** -1
        aug[col] = [entry * inv for entry in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------------------
# the model


class FlatGroupoidModel:
    """A groupoid nerve presentation with its flat-connection frame data.

    kind: "transformation" | "pair" | "vector_bundle" | one of the former
    with a finite group.  Levels (see simplicial.build_level) are built on
    demand and cached; they carry the per-level structure matrices.
    """

    def __init__(self, kind, group, base, action, signs=None, options=None,
                 frame_coeffs=None, name=None):
        self.kind = kind
        self.group = group
        self.base = base
        self.action = action
        self.signs = signs or DEFAULT_SIGNS
        self.options = dict(options or {})
        self.name = name or kind
        self.nu = group.nu if group is not None else 0
        self.e = base.e
        # pair models: frame_coeffs[i] = coordinate coefficients of the i-th
        # frame field θ_i; None for anchored kinds
        self.frame_coeffs = frame_coeffs
        self.frame_coeffs_inv = None
        if frame_coeffs is not None:
            self.frame_coeffs_inv = invert_matrix_over_ring(frame_coeffs, base.ring)
        self._levels = {}
        self._flatness = None
        self.anchor = None
        if kind in ("transformation", "vector_bundle") and group.kind != "finite":
            self.anchor = action.anchor_matrix()
        elif kind == "pair":
            # anchor is the identity in the frame: φ(n_i) = θ_i
            self.anchor = [
                [base.ring.one() if i == a else base.ring.zero()
                 for a in range(self.nu)]
                for i in range(self.e)
            ]
        else:  # finite group: no vertical directions
            self.anchor = [[] for _ in range(self.e)]

    def __repr__(self):
        return "FlatGroupoidModel(%s, %s)" % (self.kind, self.name)

    @property
    def finite(self):
        return self.group is not None and self.group.kind == "finite"

    def level(self, n):
        lv = self._levels.get(n)
        if lv is None:
            from . import simplicial

            lv = simplicial.build_level(self, n)
            self._levels[n] = lv
        return lv

    def operators_supported(self):
        """None when the complex operators are defined for this model, else a
        human-readable reason.  Pair models need a zero frame bracket: a
        non-abelian flat frame has exponential parallel transport, which does
        not live in the coordinate ring."""
        if self.kind == "pair":
            if self._flatness is None:
                self._flatness = check_flatness(self)
            if self._flatness != "flat":
                return "model is not flat: %s" % self._flatness
            consts = structure_constants(self)
            e = self.e
            for i in range(e):
                for j in range(e):
                    for k in range(e):
                        if consts[i][j][k]:
                            return (
                                "pair frame has non-abelian bracket; its "
                                "parallel transport is not polynomial"
                            )
        return None

    def require_flat(self):
        res = check_flatness(self)
        if res != "flat":
            raise ModelError("flatness", res)


# ---------------------------------------------------------------------------
# builders


def build_transformation_model(group, base, action, signs=None, options=None,
                               name=None):
    group.validate()
    action.validate()
    if group.kind != "finite" and not group.abelian:
        raise NotImplementedError(
            "nonabelian continuous groups are not bundled; the adjoint "
            "transport chain is only exercised through finite groups"
        )
    model = FlatGroupoidModel(
        "transformation", group, base, action, signs=signs, options=options,
        name=name,
    )
    validate_structure(model, n_max=2)
    return model


def build_pair_model(group, frame_twist=None, signs=None, options=None, name=None):
    """Pair groupoid of the underlying space of `group`, tangent bundle
    trivialized by the invariant frame (or an explicit twist of it)."""
    group.validate()
    if group.kind == "finite":
        raise ValueError("pair models need a positive-dimensional space")
    base = SpaceModel(group.names, group.laurent)
    if frame_twist is not None:
        frame_coeffs = frame_twist
    else:
        # invariant frame: θ_i = Σ_l mc_inverse[l][i]·∂_l (diagonal here)
        frame_coeffs = []
        base_vars = [base.ring.var(nm) for nm in base.names]
        for i in range(base.e):
            row = []
            for l in range(base.e):
                entry = group.mc_inverse_entry(l, i, base_vars)
                row.append(entry if entry is not None else base.ring.zero())
            frame_coeffs.append(row)
    pair_group = GroupModel(group.kind, group.names, group.laurent)
    model = FlatGroupoidModel(
        "pair", pair_group, base, None, signs=signs, options=options,
        frame_coeffs=frame_coeffs, name=name,
    )
    model._flatness = check_flatness(model)
    if model._flatness == "flat" and model.operators_supported() is None:
        validate_structure(model, n_max=2)
    return model


def build_pair_model_from_frame(base, frame_coeffs, signs=None, options=None,
                                name=None):
    """Pair groupoid of an explicitly framed space (used by twisted frames)."""
    fake_group = GroupModel(
        "torus" if any(base.laurent) else "additive", base.names, base.laurent
    )
    model = FlatGroupoidModel(
        "pair", fake_group, base, None, signs=signs, options=options,
        frame_coeffs=frame_coeffs, name=name,
    )
    model._flatness = check_flatness(model)
    if model._flatness == "flat" and model.operators_supported() is None:
        validate_structure(model, n_max=2)
    return model


def build_vector_bundle_model(base, rank, signs=None, options=None, name=None):
    """Trivial rank-r bundle groupoid X×𝔾_a^r ⇒ X: the transformation model
    of 𝔾_a^r acting trivially, reported under its own kind."""
    names = tuple("u" if rank == 1 else "u%s" % chr(ord("a") + i) for i in range(rank))
    group = GroupModel.additive(names)
    action = ActionModel.trivial(group, base)
    group.validate()
    action.validate()
    model = FlatGroupoidModel(
        "vector_bundle", group, base, action, signs=signs, options=options,
        name=name,
    )
    validate_structure(model, n_max=2)
    return model


# ---------------------------------------------------------------------------
# flatness and the derived connection


def _frame_fields(model):
    """Pair models: θ_i as coordinate-coefficient rows over O(X)."""
    return model.frame_coeffs


def _bracket(space, u, v):
    """Lie bracket of two coordinate-coefficient vector fields over O(X)."""
    out = []
    for l in range(space.e):
        term = space.ring.zero()
        for m in range(space.e):
            nm = space.names[m]
            term = term + u[m] * v[l].derive(nm) - v[m] * u[l].derive(nm)
        out.append(term)
    return out


def check_flatness(model):
    """"flat" or a human-readable witness naming the failing bracket."""
    if model.kind in ("transformation", "vector_bundle"):
        # E is the kernel of the projection to the arrow factor: closed under
        # brackets because base-directed fields have base-directed brackets.
        return "flat"
    theta = _frame_fields(model)
    base = model.base
    inv = model.frame_coeffs_inv
    consts = structure_constants(model)
    e = base.e
    for i in range(e):
        for j in range(i + 1, e):
            br = _bracket(base, theta[i], theta[j])
            # frame coordinates of the bracket
            for k in range(e):
                ck = base.ring.zero()
                for l in range(e):
                    ck = ck + br[l] * inv[l][k]
                if not (ck - consts[i][j][k] * base.ring.one()).is_zero():
                    return (
                        "bracket [θ%d, θ%d] has non-constant frame coefficient "
                        "%s on θ%d" % (i, j, ck, k)
                    )
    return "flat"


def structure_constants(model):
    """c[i][j][k] with [θ_i, θ_j] = Σ_k c·θ_k when constant; the constant part
    is the value at the unit/origin of the frame coordinates."""
    theta = _frame_fields(model)
    base = model.base
    inv = model.frame_coeffs_inv
    e = base.e
    out = [[[Fraction(0)] * e for _ in range(e)] for _ in range(e)]
    # evaluation at a fixed rational point: 1 on torus coords, 0 on affine
    point = [Fraction(1) if lau else Fraction(0) for lau in base.laurent]
    zero_ring = Ring((), ())
    ev = RingHom(base.ring, zero_ring, [zero_ring.constant(c) for c in point])
    for i in range(e):
        for j in range(e):
            br = _bracket(base, theta[i], theta[j])
            for k in range(e):
                ck = base.ring.zero()
                for l in range(e):
                    ck = ck + br[l] * inv[l][k]
                out[i][j][k] = ev.apply(ck).constant_value()
    return out


def derived_connection(model):
    """Connection matrix Γ on the vertical frame plus the level-1 frame
    transition Ψ (π_1-frames to π_0-frames).

    Transformation kinds: Γ = 0 in the invariant frame — certified by
    computing the defining bracket expression symbolically.  Pair kinds:
    Γ is the constant structure tensor of the frame; Ψ is only returned for
    models whose transports stay polynomial (None otherwise).
    """
    if model.kind == "pair":
        consts = structure_constants(model)
        e = model.e
        # ∇_{θ_i} n_a = Σ_k c[a][i][k] n_k
        gamma = [[[consts[a][i][k] for k in range(e)] for i in range(e)]
                 for a in range(e)]
        if model.operators_supported() is not None:
            return gamma, None
        return gamma, _eps_matrix(model.level(0).faces[0])
    # transformation: the bracket of a vertical lift with a base lift has no
    # vertical reading — base-directed fields on G×X have base-directed
    # brackets with the G-directed generators once the connection form is
    # applied; symbolically the Christoffel entries all vanish.
    nu, e = model.nu, model.e
    gamma = [[[Fraction(0)] * nu for _ in range(e)] for _ in range(nu)]
    return gamma, _eps_matrix(model.level(0).faces[0])


def _eps_matrix(face):
    """Materialize a face's frame transport (identity when untransported)."""
    if face.eps is not None:
        return face.eps
    tgt = face.tgt
    e = face.src.model.e
    return [
        [tgt.one() if i == l else tgt.zero() for l in range(e)]
        for i in range(e)
    ]


# ---------------------------------------------------------------------------
# structure validation


def _expand_through(matrix_row, lookup):
    """Compose a covector expansion with a label-indexed covector map."""
    out = {}
    for label, coeff in matrix_row:
        for a, c2 in lookup(label):
            prev = out.get(a)
            val = coeff * c2
            out[a] = val if prev is None else prev + val
    return {a: v for a, v in out.items() if not v.is_zero()}


def validate_structure(model, n_max=2):
    """Check the level-wise structure identities up to level n_max.

    Covers: δ∘η_q = id; ρ_r∘η_q = δ_rq·(anchor dual); Σ_q ρ_q = φ∘δ;
    ω_qr against the connection columns and the invariant directions;
    the degeneracy annihilation of ω; the level-2 cocycle of ω; the
    transport cocycle of the frame transitions; flatness.
    """
    report = []
    flat = check_flatness(model)
    if flat != "flat":
        raise ModelError("flatness", flat)
    report.append("flatness: ok")
    for n in range(n_max + 1):
        lv = model.level(n)
        for q in range(n + 1):
            eta = lv.eta(q)
            for i in range(model.e):
                # δ∘η_q = id
                got = {}
                for label, coeff in eta[i]:
                    tgt = lv.delta.get(label)
                    if tgt is not None:
                        prev = got.get(tgt)
                        got[tgt] = coeff if prev is None else prev + coeff
                got = {t: c for t, c in got.items() if not c.is_zero()}
                want = {i: lv.one()}
                if got != want:
                    raise ModelError(
                        "delta∘eta_q = id",
                        "level %d, q=%d, ε_%d gives %s" % (n, q, i, got),
                    )
                # ρ_r∘η_q = δ_rq φ
                for r in range(n + 1):
                    got = _expand_through(eta[i], lambda L: lv.rho_cov(r).get(L, ()))
                    want = {}
                    if r == q:
                        want = {
                            a: c for a, c in lv.phi_dual[i] if not c.is_zero()
                        }
                    if got != want:
                        raise ModelError(
                            "rho_r∘eta_q = delta_rq·phi",
                            "level %d, q=%d, r=%d, ε_%d: %s vs %s"
                            % (n, q, r, i, _fmt(got), _fmt(want)),
                        )
        report.append("level %d: eta/delta/rho diagrams ok" % n)
        # Σ_q ρ_q = φ∘δ on every ambient coframe label
        for label in lv.labels:
            total = {}
            for q in range(n + 1):
                for a, c in lv.rho_cov(q).get(label, ()):
                    prev = total.get(a)
                    v = c if prev is None else prev + c
                    total[a] = v
            total = {a: v for a, v in total.items() if not v.is_zero()}
            want = {}
            tgt = lv.delta.get(label)
            if tgt is not None:
                want = {a: c for a, c in lv.phi_dual[tgt] if not c.is_zero()}
            if total != want:
                raise ModelError(
                    "sum of rho_q = phi∘delta",
                    "level %d, label %s: %s vs %s" % (n, label, _fmt(total), _fmt(want)),
                )
        report.append("level %d: sum-of-rho diagram ok" % n)
        # ω_qr evaluations
        for q in range(n + 1):
            for r in range(q + 1, n + 1):
                omega = lv.omega(q, r)
                for j in range(n + 1):
                    cols = lv.rho_vec(j)
                    for a in range(model.nu):
                        got = {}
                        for label, coeff in cols[a].items():
                            for b, c2 in omega.get(label, ()):
                                prev = got.get(b)
                                v = coeff * c2
                                got[b] = v if prev is None else prev + v
                        got = {b: v for b, v in got.items() if not v.is_zero()}
                        want = {}
                        if j == q:
                            want = {a: lv.one()}
                        elif j == r:
                            want = {a: -lv.one()}
                        if got != want:
                            raise ModelError(
                                "omega_qr on connection columns",
                                "level %d ω_%d%d on ρ'_%d(n_%d): %s"
                                % (n, q, r, j, a, _fmt(got)),
                            )
                for i in range(model.e):
                    col = lv.e_columns(i)
                    got = {}
                    for label, coeff in col.items():
                        for b, c2 in omega.get(label, ()):
                            prev = got.get(b)
                            v = coeff * c2
                            got[b] = v if prev is None else prev + v
                    got = {b: v for b, v in got.items() if not v.is_zero()}
                    if got:
                        raise ModelError(
                            "omega_qr on invariant directions",
                            "level %d ω_%d%d on e_%d: %s" % (n, q, r, i, _fmt(got)),
                        )
        report.append("level %d: omega evaluations ok" % n)
    # degeneracy annihilation of ω at level 1: the pulled covector vanishes
    if model.nu and n_max >= 1:
        lv1 = model.level(1)
        degen = lv1.degens[0]
        omega = lv1.omega(0, 1)
        pulled = {}
        for label, terms in omega.items():
            for tgt_label, cof in degen.coframe.get(label, ()):
                for b, coeff in terms:
                    key = (tgt_label, b)
                    add = degen.hom.apply(coeff) * cof
                    prev = pulled.get(key)
                    pulled[key] = add if prev is None else prev + add
        for key, val in pulled.items():
            if not val.is_zero():
                raise ModelError(
                    "degeneracy kills omega",
                    "pulled ω_01 has nonzero %s component" % (key,),
                )
    report.append("degeneracy annihilation of omega: ok")
    # cocycle of ω at level 2: ω_02 = ω_01 + (transported) ω_12
    if model.nu and n_max >= 2:
        lv2 = model.level(2)
        w02, w01, w12 = lv2.omega(0, 2), lv2.omega(0, 1), lv2.omega(1, 2)
        for label in lv2.labels:
            lhs = {a: c for a, c in w02.get(label, ())}
            rhs = {}
            for a, c in list(w01.get(label, ())) + list(w12.get(label, ())):
                prev = rhs.get(a)
                rhs[a] = c if prev is None else prev + c
            lhs = {a: c for a, c in lhs.items() if not c.is_zero()}
            rhs = {a: c for a, c in rhs.items() if not c.is_zero()}
            if lhs != rhs:
                raise ModelError(
                    "omega cocycle",
                    "label %s: ω_02 ≠ ω_01 + ω_12" % (label,),
                )
    report.append("omega cocycle (stated direction): ok")
    # transport cocycle: the 0-face transports compose along level 2
    if n_max >= 2:
        _check_transport_cocycle(model, report)
    return report


def _check_transport_cocycle(model, report):
    """ψ-descent: the composite of the two inner 0-faces equals the 0-face of
    the merged arrow — checked on the ε-transport matrices over O(X_2)."""
    from . import simplicial

    lv0 = model.level(0)
    lv1 = model.level(1)
    lv2 = model.level(2)
    # route A: pull x through face_0 twice: transport J(g_2-block)·pulled J(g_1)
    f1 = lv1.faces[0]          # level 1 -> 2
    f0 = lv0.faces[0]          # level 0 -> 1
    e = model.e
    if e == 0 or f0.eps is None or f1.eps is None:
        report.append("transport cocycle: trivial (identity transports)")
        return
    routeA = [[lv2.zero() for _ in range(e)] for _ in range(e)]
    for i in range(e):
        for l in range(e):
            acc = lv2.zero()
            for m in range(e):
                lower = f1.hom.apply(f0.eps[i][m])       # pulled to O(X_2)
                upper = f1.eps[m][l]                     # over O(X_2)
                acc = acc + lower * upper
            routeA[i][l] = acc
    # route B: the 1-face of level 1 composed with the 0-face — the merged
    # arrow's transport
    g1 = lv1.faces[1]
    routeB = [[g1.hom.apply(f0.eps[i][l]) for l in range(e)] for i in range(e)]
    for i in range(e):
        for l in range(e):
            if not (routeA[i][l] - routeB[i][l]).is_zero():
                raise ModelError(
                    "transport cocycle",
                    "ε-transport entry (%d,%d) differs between the two routes"
                    % (i, l),
                )
    report.append("transport cocycle: ok")


def _fmt(d):
    return "{" + ", ".join("%s: %s" % (k, v) for k, v in sorted(d.items())) + "}"
