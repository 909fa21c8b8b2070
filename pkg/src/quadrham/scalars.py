"""Level coefficients: polynomial-valued functions on finite group tuples.

The coordinate ring of simplicial level n is O(G^n × X).  For continuous
groups the G^n-part is folded into the polynomial ring; for finite groups it
is a function on n-tuples of group elements with values in O(X).  Both cases
are stored as a TupleFn — continuous models simply use the single empty tuple
— so every operator downstream has exactly one code path.
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Poly, RingHom


class TupleFn:
    """Sparse map {group index tuple: Poly}; missing tuples mean zero."""

    __slots__ = ("ring", "arity", "size", "data")

    def __init__(self, ring, arity, size, data):
        self.ring = ring
        self.arity = arity
        self.size = size
        self.data = {t: p for t, p in data.items() if not p.is_zero()}

    @classmethod
    def plain(cls, poly: Poly):
        """Wrap a polynomial as the coefficient of a continuous model."""
        return cls(poly.ring, 0, 1, {(): poly})

    def shape(self):
        return (self.ring, self.arity, self.size)

    def is_zero(self):
        return not self.data

    def __eq__(self, other):
        if not isinstance(other, TupleFn):
            return NotImplemented
        return self.shape() == other.shape() and self.data == other.data

    def __hash__(self):
        raise TypeError("TupleFn is not hashable")

    def __add__(self, other):
        if self.shape() != other.shape():
            raise ValueError("coefficient shape mismatch")
        data = dict(self.data)
        for t, p in other.data.items():
            q = data.get(t)
            data[t] = p if q is None else q + p
        return TupleFn(self.ring, self.arity, self.size, data)

    def __neg__(self):
        return TupleFn(
            self.ring, self.arity, self.size, {t: -p for t, p in self.data.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Pointwise product (functions on the same tuple set)."""
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if self.shape() != other.shape():
            raise ValueError("coefficient shape mismatch")
        small, big = (self, other) if len(self.data) <= len(other.data) else (other, self)
        data = {}
        for t, p in small.data.items():
            q = big.data.get(t)
            if q is not None:
                data[t] = p * q
        return TupleFn(self.ring, self.arity, self.size, data)

    __rmul__ = __mul__

    def scale(self, c):
        return TupleFn(
            self.ring, self.arity, self.size,
            {t: p.scale(c) for t, p in self.data.items()},
        )

    def map_values(self, fn):
        return TupleFn(
            self.ring, self.arity, self.size,
            {t: fn(p) for t, p in self.data.items()},
        )

    def derive(self, name):
        return self.map_values(lambda p: p.derive(name))

    def log_derive(self, name):
        return self.map_values(lambda p: p.log_derive(name))

    def value(self) -> Poly:
        """The single value of a continuous-model coefficient."""
        if self.arity != 0:
            raise ValueError("value() is only for arity-0 coefficients")
        return self.data.get((), self.ring.zero())

    def __str__(self):
        if not self.data:
            return "0"
        if self.arity == 0:
            return str(self.data[()])
        parts = [
            "%s: %s" % (t, p) for t, p in sorted(self.data.items())
        ]
        return "{%s}" % ", ".join(parts)

    def __repr__(self):
        return "TupleFn(%s)" % self


class TupleHom:
    """Pullback of coefficients along a structural map of levels.

    Geometric map X_out → X_in; the pullback sends a TupleFn on in-tuples to
    one on out-tuples via assignment {out_tuple: (in_tuple, RingHom)}.
    """

    __slots__ = ("in_arity", "out_arity", "size", "assignment")

    def __init__(self, in_arity, out_arity, size, assignment):
        self.in_arity = in_arity
        self.out_arity = out_arity
        self.size = size
        self.assignment = assignment

    @classmethod
    def plain(cls, hom: RingHom):
        return cls(0, 0, 1, {(): ((), hom)})

    def apply(self, f: TupleFn) -> TupleFn:
        if f.arity != self.in_arity or f.size != self.size:
            raise ValueError("coefficient does not match hom domain")
        data = {}
        ring = None
        for out_t, (in_t, hom) in self.assignment.items():
            ring = hom.target
            p = f.data.get(in_t)
            if p is not None:
                data[out_t] = hom.apply(p)
        if ring is None:
            raise ValueError("empty assignment")
        return TupleFn(ring, self.out_arity, self.size, data)

    def then(self, other: "TupleHom") -> "TupleHom":
        """Pullback along (geometric other-map followed by self-map)."""
        if other.in_arity != self.out_arity or other.size != self.size:
            raise ValueError("homs do not compose")
        assignment = {}
        for out_t, (mid_t, hom2) in other.assignment.items():
            in_t, hom1 = self.assignment[mid_t]
            assignment[out_t] = (in_t, hom1.then(hom2))
        return TupleHom(self.in_arity, other.out_arity, self.size, assignment)
