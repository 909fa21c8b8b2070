"""Elements and operators of the connection complex.

A KElement is a finite sum of terms  coeff · ε_{i1}∧…∧ε_{i(p-k)} ⊗ υ^{(k)}
living on finitely many nerve levels; an AmbientElement is the same with the
wedge taken over the ambient coframe labels of each level.  The operator set:

  phi                  replaces one ε by its anchor reading (degree (0,1,0))
  cech                 alternating face pullback           (degree (0,0,1))
  derham               lift, exterior derivative, compare  (degree (1,0,0))
  contraction          degeneracy-transported derivatives  (degree (1,1,-1))
  symmetric_derivative the level operator ρ_q∘D + D∘ρ_q    (degree (1,1,0))
  cup                  concatenation product
  normalize            projection onto the normalized subcomplex
  total_differential   phi + cech + derham + contraction

Level signs: phi and derham carry (−1)^n on level n; the ambient exterior
derivative is unsigned.  All switchable signs are read from model.signs.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction

from .poly import Poly
from .scalars import TupleFn
from . import simplicial


# ---------------------------------------------------------------------------
# wedge utilities


def wedge_prepend(wedge, item):
    """Insert a degree-1 factor from the left; (sign, new) or (0, None)."""
    pos = bisect_left(wedge, item)
    if pos < len(wedge) and wedge[pos] == item:
        return 0, None
    return (-1) ** pos, wedge[:pos] + (item,) + wedge[pos:]


def wedge_append(wedge, item):
    """Insert a degree-1 factor from the right; (sign, new) or (0, None)."""
    pos = bisect_left(wedge, item)
    if pos < len(wedge) and wedge[pos] == item:
        return 0, None
    return (-1) ** (len(wedge) - pos), wedge[:pos] + (item,) + wedge[pos:]


def wedge_sort(items):
    """Sort a factor sequence, tracking the permutation sign; None if it
    contains a repeated factor."""
    items = list(items)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and items[j - 1] == items[j]:
            return 0, None
    if len(items) >= 2:
        for a, b in zip(items, items[1:]):
            if a == b:
                return 0, None
    return sign, tuple(items)


def wedge_concat(w1, w2):
    """Concatenate two sorted wedges; (sign, merged) or (0, None)."""
    sign, out = 1, []
    i = j = 0
    while i < len(w1) and j < len(w2):
        if w1[i] == w2[j]:
            return 0, None
        if w1[i] < w2[j]:
            out.append(w1[i])
            i += 1
        else:
            # w2[j] jumps over the remaining factors of w1
            if (len(w1) - i) % 2:
                sign = -sign
            out.append(w2[j])
            j += 1
    out.extend(w1[i:])
    out.extend(w2[j:])
    return sign, tuple(out)


def sym_insert(sym, item):
    pos = bisect_left(sym, item)
    return sym[:pos] + (item,) + sym[pos:]


def sym_remove_one(sym, item):
    pos = bisect_left(sym, item)
    return sym[:pos] + sym[pos + 1:]


# ---------------------------------------------------------------------------
# elements


class _Element:
    """Shared container: {level: {(wedge, sym): TupleFn}}."""

    __slots__ = ("model", "parts")

    def __init__(self, model, parts=None):
        self.model = model
        self.parts = {}
        if parts:
            for n, terms in parts.items():
                bucket = {}
                for key, coeff in terms.items():
                    if not coeff.is_zero():
                        bucket[key] = coeff
                if bucket:
                    self.parts[n] = bucket

    def is_zero(self):
        return not self.parts

    def __eq__(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        if self.model is not other.model:
            return NotImplemented
        if set(self.parts) != set(other.parts):
            return False
        for n, terms in self.parts.items():
            if terms != other.parts[n]:
                return False
        return True

    def _combine(self, other, flip):
        if type(other) is not type(self) or other.model is not self.model:
            raise ValueError("cannot combine elements of different models")
        parts = {n: dict(t) for n, t in self.parts.items()}
        for n, terms in other.parts.items():
            bucket = parts.setdefault(n, {})
            for key, coeff in terms.items():
                add = -coeff if flip else coeff
                prev = bucket.get(key)
                bucket[key] = add if prev is None else prev + add
        return type(self)(self.model, parts)

    def __add__(self, other):
        return self._combine(other, False)

    def __sub__(self, other):
        return self._combine(other, True)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        return type(self)(
            self.model,
            {
                n: {key: coeff.scale(c) for key, coeff in terms.items()}
                for n, terms in self.parts.items()
            },
        )

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def add_term(self, n, wedge, sym, coeff):
        """Accumulate one term in place (builder use only)."""
        if coeff.is_zero():
            return
        bucket = self.parts.setdefault(n, {})
        key = (wedge, sym)
        prev = bucket.get(key)
        total = coeff if prev is None else prev + coeff
        if total.is_zero():
            bucket.pop(key, None)
            if not bucket:
                del self.parts[n]
        else:
            bucket[key] = total

    def levels(self):
        return sorted(self.parts)

    def terms(self):
        for n in sorted(self.parts):
            for key in sorted(self.parts[n]):
                yield n, key[0], key[1], self.parts[n][key]

    def restrict_level(self, n):
        if n not in self.parts:
            return type(self)(self.model)
        return type(self)(self.model, {n: dict(self.parts[n])})


def _require_operators(model):
    reason = model.operators_supported()
    if reason is not None:
        raise NotImplementedError(reason)


class KElement(_Element):
    """Sum of ε-wedge ⊗ υ-power terms over nerve levels."""

    @classmethod
    def zero(cls, model):
        return cls(model)

    @classmethod
    def term(cls, model, n, wedge, sym, coeff):
        _require_operators(model)
        lv = model.level(n)
        if isinstance(coeff, Poly):
            coeff = lv.full(coeff)
        if isinstance(coeff, (int, Fraction)):
            coeff = lv.constant(coeff)
        s, wedge = wedge_sort(wedge)
        if s == 0:
            return cls(model)
        return cls(model, {n: {(wedge, tuple(sorted(sym))): coeff.scale(s)}})

    @classmethod
    def unit(cls, model):
        return cls.term(model, 0, (), (), 1)

    def spots(self):
        """Sorted (p, k, n) triples present in the element."""
        out = set()
        for n, w, s, _ in self.terms():
            out.add((len(w) + len(s), len(s), n))
        return sorted(out)

    def __str__(self):
        return _render(self, _render_k_factor)


class AmbientElement(_Element):
    """Sum of ambient-coframe wedge ⊗ υ-power terms over nerve levels."""

    @classmethod
    def zero(cls, model):
        return cls(model)

    @classmethod
    def term(cls, model, n, wedge, sym, coeff):
        _require_operators(model)
        lv = model.level(n)
        if isinstance(coeff, Poly):
            coeff = lv.full(coeff)
        if isinstance(coeff, (int, Fraction)):
            coeff = lv.constant(coeff)
        s, wedge = wedge_sort(wedge)
        if s == 0:
            return cls(model)
        return cls(model, {n: {(wedge, tuple(sorted(sym))): coeff.scale(s)}})

    def __str__(self):
        return _render(self, _render_amb_factor)


def _render_k_factor(model, item):
    return "e%d" % item


def _render_amb_factor(model, label):
    kind, j, idx = label
    if kind == "g":
        return "mu%d[%s]" % (j, model.group.names[idx])
    if kind == "s":
        return "c%d[%s]" % (j, model.base.names[idx])
    return model.base.coframe_name(idx)


def _render(el, factor_fn):
    if el.is_zero():
        return "0"
    chunks = []
    for n, w, s, coeff in el.terms():
        bits = ["(%s)" % coeff]
        bits.extend(factor_fn(el.model, item) for item in w)
        bits.extend("v%d" % a for a in s)
        chunks.append("%s @n=%d" % ("*".join(bits), n))
    return " + ".join(chunks)


# ---------------------------------------------------------------------------
# ambient operators


def ambient_derham(x: AmbientElement) -> AmbientElement:
    """Unsigned exterior derivative on each level (connection term included)."""
    model = x.model
    out = AmbientElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        for label, d in lv.expansion(coeff):
            s, nw = wedge_prepend(wedge, label)
            if s:
                out.add_term(n, nw, sym, d.scale(s))
        # non-closed coframe entries
        for pos, label in enumerate(wedge):
            rest = wedge[:pos] + wedge[pos + 1:]
            for la, lb, c in lv.coframe_differential(label):
                sb, w1 = wedge_prepend(rest, lb)
                if not sb:
                    continue
                sa, w2 = wedge_prepend(w1, la)
                if not sa:
                    continue
                out.add_term(
                    n, w2, sym, (coeff * c).scale(sa * sb * (-1) ** pos)
                )
        # connection term on the symmetric part
        if sym:
            chris = lv.christoffel()
            seen = set()
            for u in sym:
                if u in seen:
                    continue
                seen.add(u)
                cnt = sym.count(u)
                for label, b, c in chris[u]:
                    s, nw = wedge_append(wedge, label)
                    if not s:
                        continue
                    nsym = sym_insert(sym_remove_one(sym, u), b)
                    out.add_term(
                        n, nw, nsym,
                        (coeff * c).scale(s * cnt * (-1) ** len(wedge)),
                    )
    return out


def ambient_rho(q, x: AmbientElement) -> AmbientElement:
    """Odd contraction with the q-th connection covector."""
    model = x.model
    out = AmbientElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        rho = lv.rho_cov(q)
        for pos, label in enumerate(wedge):
            reads = rho.get(label)
            if not reads:
                continue
            rest = wedge[:pos] + wedge[pos + 1:]
            for a, c in reads:
                out.add_term(
                    n, rest, sym_insert(sym, a),
                    (coeff * c).scale((-1) ** pos),
                )
    return out


def ambient_face_pullback(q, x: AmbientElement) -> AmbientElement:
    """Pullback along one face, on ambient forms (full coframe matrix)."""
    model = x.model
    out = AmbientElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        face = lv.faces[q]
        pulled = face.hom.apply(coeff)
        expansions = [face.coframe.get(label, ()) for label in wedge]
        _distribute(out, n + 1, pulled, expansions, sym)
    return out


def ambient_cech(x: AmbientElement) -> AmbientElement:
    """Alternating face sum (unsigned conventions; oracle use)."""
    out = AmbientElement(x.model)
    for n in x.levels():
        part = x.restrict_level(n)
        for q in range(n + 2):
            piece = ambient_face_pullback(q, part)
            out = out + (piece if q % 2 == 0 else -piece)
    return out


def _distribute(out, n, coeff, expansions, sym, sign0=1):
    """Expand a wedge of covector expansions and accumulate the terms."""
    stack = [((), coeff.scale(sign0), 0)]
    while stack:
        wedge, c, i = stack.pop()
        if c.is_zero():
            continue
        if i == len(expansions):
            out.add_term(n, wedge, sym, c)
            continue
        for label, tf in expansions[i]:
            s, nw = wedge_append(wedge, label)
            if s:
                stack.append((nw, (c * tf).scale(s), i + 1))


# ---------------------------------------------------------------------------
# comparison with the 0-anchored forms


def lift(x: KElement) -> AmbientElement:
    """Embed via the 0-th splitting η_0 (υ-parts are untouched)."""
    model = x.model
    out = AmbientElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        eta = lv.eta(0)
        expansions = [eta[i] for i in wedge]
        _distribute(out, n, coeff, expansions, sym)
    return out


def push_delta(x: AmbientElement) -> KElement:
    """Collapse ambient wedges through δ; arrow-block entries die."""
    model = x.model
    out = KElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        imgs = []
        dead = False
        for label in wedge:
            tgt = lv.delta.get(label)
            if tgt is None:
                dead = True
                break
            imgs.append(tgt)
        if dead:
            continue
        s, nw = wedge_sort(imgs)
        if s:
            out.add_term(n, nw, sym, coeff.scale(s))
    return out


# ---------------------------------------------------------------------------
# the four differentials


def phi(x: KElement) -> KElement:
    """Anchor substitution, one ε at a time; level sign (−1)^n."""
    model = x.model
    signs = model.signs
    out = KElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        lead = (-1) ** n if signs.phi_level_sign else 1
        for pos, i in enumerate(wedge):
            rest = wedge[:pos] + wedge[pos + 1:]
            for a, c in lv.phi_dual[i]:
                out.add_term(
                    n, rest, sym_insert(sym, a),
                    (coeff * c).scale(lead * (-1) ** pos),
                )
    return out


def derham(x: KElement) -> KElement:
    """δ ∘ (ambient exterior derivative) ∘ η_0, with level sign (−1)^n."""
    model = x.model
    signs = model.signs
    out = KElement(model)
    for n in x.levels():
        part = x.restrict_level(n)
        piece = push_delta(ambient_derham(lift(part)))
        lead = (-1) ** n if signs.derham_level_sign else 1
        out = out + piece.scale(lead)
    return out


def symmetric_derivative(x: KElement, q) -> KElement:
    """δ ∘ (ρ_q∘D + D∘ρ_q) ∘ η_0 on a single-level element."""
    model = x.model
    out = KElement(model)
    for n in x.levels():
        if q > n:
            raise ValueError("level operator index %d exceeds level %d" % (q, n))
        a = lift(x.restrict_level(n))
        out = out + push_delta(
            ambient_rho(q, ambient_derham(a)) + ambient_derham(ambient_rho(q, a))
        )
    return out


def face_pullback(q, x: KElement) -> KElement:
    """Pullback along one face with the fiberwise frame transport."""
    model = x.model
    signs = model.signs
    out = KElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        face = lv.faces[q]
        pulled = face.hom.apply(coeff)
        if face.eps is None:
            out.add_term(n + 1, wedge, sym, pulled)
            continue
        if signs.transport_ups != 1 and sym:
            pulled = pulled.scale(signs.transport_ups ** len(sym))
        expansions = []
        for i in wedge:
            row = [
                (l, face.eps[i][l].scale(signs.transport_eps))
                for l in range(model.e)
                if not face.eps[i][l].is_zero()
            ]
            expansions.append(row)
        _distribute(out, n + 1, pulled, expansions, sym)
    return out


def degeneracy_pullback(q, x: KElement) -> KElement:
    """Pullback along the degeneracy inserting the unit arrow at slot q+1."""
    model = x.model
    out = KElement(model)
    for n, wedge, sym, coeff in x.terms():
        lv = model.level(n)
        degen = lv.degens[q]
        out.add_term(n - 1, wedge, sym, degen.hom.apply(coeff))
    return out


def cech(x: KElement) -> KElement:
    """Alternating face sum Σ_q (−1)^q · face pullback."""
    model = x.model
    lead = model.signs.cech_alternation
    out = KElement(model)
    for n in x.levels():
        part = x.restrict_level(n)
        for q in range(n + 2):
            piece = face_pullback(q, part)
            out = out + piece.scale(lead * (-1) ** q)
    return out


def contraction(x: KElement) -> KElement:
    """Degeneracy-transported level derivatives:
    sign · Σ_{0 ≤ i < j ≤ n} (−1)^i · (degeneracy_i)^* ∘ L_j."""
    model = x.model
    lead = model.signs.contraction_sign
    out = KElement(model)
    for n in x.levels():
        part = x.restrict_level(n)
        for j in range(1, n + 1):
            lj = symmetric_derivative(part, j)
            for i in range(j):
                out = out + degeneracy_pullback(i, lj).scale(lead * (-1) ** i)
    return out


def total_differential(x: KElement) -> KElement:
    return phi(x) + cech(x) + derham(x) + contraction(x)


# ---------------------------------------------------------------------------
# product and normalization


def cup(x: KElement, y: KElement) -> KElement:
    """Concatenation product: x∪y = (−1)^{m(p−k)}·s^*(x)∧t^*(y)."""
    model = x.model
    if y.model is not model:
        raise ValueError("cup factors live on different models")
    signs = model.signs
    out = KElement(model)
    for n in x.levels():
        for m in y.levels():
            support = simplicial.cup_support(model, n, m)
            t_eps = support.t_eps
            for (wx, sx), cx in x.parts[n].items():
                sx_pulled = support.s_hom.apply(cx)
                lead = (-1) ** (m * len(wx) + signs.cup_parity)
                for (wy, sy), cy in y.parts[m].items():
                    ty = support.t_hom.apply(cy)
                    if t_eps is None:
                        pieces = [((wy), ty)]
                    else:
                        if signs.transport_ups != 1 and sy:
                            ty = ty.scale(signs.transport_ups ** len(sy))
                        collect = KElement(model)
                        expansions = [
                            [
                                (l, t_eps[i][l].scale(signs.transport_eps))
                                for l in range(model.e)
                                if not t_eps[i][l].is_zero()
                            ]
                            for i in wy
                        ]
                        _distribute(collect, n + m, ty, expansions, sy)
                        pieces = [
                            (w2, c2)
                            for _, w2, _, c2 in collect.terms()
                        ]
                    for w2, c2 in pieces:
                        s, wedge = wedge_concat(wx, w2)
                        if not s:
                            continue
                        sym = tuple(sorted(sx + sy))
                        out.add_term(
                            n + m, wedge, sym,
                            (sx_pulled * c2).scale(s * lead),
                        )
    return out


def normalize(x: KElement) -> KElement:
    """Project each level onto the normalized subcomplex (kernel of all
    degeneracy pullbacks): apply V_j = 1 − face_j^* ∘ degeneracy_j^* for
    j = n−1 … 0."""
    model = x.model
    out = KElement(model)
    for n in x.levels():
        part = x.restrict_level(n)
        for j in range(n - 1, -1, -1):
            part = part - face_pullback(j, degeneracy_pullback(j, part))
        out = out + part
    return out
