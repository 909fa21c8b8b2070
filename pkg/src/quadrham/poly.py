"""Exact sparse (Laurent) polynomial arithmetic over Q.

Everything downstream works over free coordinate rings: polynomial variables
for affine directions, Laurent variables for torus directions.  A sparse
dict-of-monomials representation with Fraction coefficients is all that is
needed — no quotients, no Groebner machinery.

Conventions:
  - a monomial is a tuple of integer exponents, one per ring variable;
  - term order is lexicographic on exponent tuples (deterministic rendering);
  - exponents are kept below MAX_EXPONENT as a sanity guard.
"""

from __future__ import annotations

from fractions import Fraction

MAX_EXPONENT = 2 ** 31

Q0 = Fraction(0)
Q1 = Fraction(1)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError("coefficients must be exact rationals, got %r" % (c,))


class Ring:
    """A free polynomial / Laurent polynomial ring over Q.

    `names` are the variable names in order; `laurent[i]` says whether
    variable i is invertible (torus direction) or not (affine direction).
    """

    __slots__ = ("names", "laurent", "index")

    def __init__(self, names, laurent=None):
        self.names = tuple(names)
        if laurent is None:
            laurent = (False,) * len(self.names)
        self.laurent = tuple(bool(b) for b in laurent)
        if len(self.laurent) != len(self.names):
            raise ValueError("laurent flags must match variable count")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names: %r" % (self.names,))
        self.index = {nm: i for i, nm in enumerate(self.names)}

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.names == other.names
            and self.laurent == other.laurent
        )

    def __hash__(self):
        return hash((self.names, self.laurent))

    def __repr__(self):
        flags = "".join("L" if b else "P" for b in self.laurent)
        return "Ring(%s;%s)" % (",".join(self.names), flags)

    @property
    def nvars(self):
        return len(self.names)

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly(self, {(0,) * self.nvars: Q1})

    def constant(self, c) -> "Poly":
        c = _as_fraction(c)
        if c == 0:
            return self.zero()
        return Poly(self, {(0,) * self.nvars: c})

    def var(self, name) -> "Poly":
        i = self.index[name]
        exps = [0] * self.nvars
        exps[i] = 1
        return Poly(self, {tuple(exps): Q1})

    def monomial(self, exps, coeff=Q1) -> "Poly":
        exps = tuple(int(e) for e in exps)
        if len(exps) != self.nvars:
            raise ValueError("exponent tuple has wrong length")
        coeff = _as_fraction(coeff)
        self._check_exps(exps)
        if coeff == 0:
            return self.zero()
        return Poly(self, {exps: coeff})

    def _check_exps(self, exps):
        for e, lau in zip(exps, self.laurent):
            if abs(e) >= MAX_EXPONENT:
                raise OverflowError("monomial exponent out of range")
            if e < 0 and not lau:
                raise ValueError(
                    "negative exponent on non-Laurent variable in %r" % (self,)
                )


class Poly:
    """Sparse exact polynomial: {exponent tuple: Fraction}, zeros dropped."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        nz = (0,) * self.ring.nvars
        return all(m == nz for m in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Q0
        nz = (0,) * self.ring.nvars
        if set(self.terms) != {nz}:
            raise ValueError("not a constant: %s" % self)
        return self.terms[nz]

    def is_unit_monomial(self) -> bool:
        return len(self.terms) == 1

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        if self.ring != other.ring:
            raise ValueError("ring mismatch in addition")
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, Q0) + c
            if s:
                terms[m] = s
            elif m in terms:
                del terms[m]
        return Poly(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = _as_fraction(c)
        if c == 0:
            return self.ring.zero()
        return Poly(self.ring, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if self.ring != other.ring:
            raise ValueError("ring mismatch in multiplication")
        out: dict = {}
        check = self.ring._check_exps
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m)
                if s is None:
                    check(m)
                    out[m] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return Poly(self.ring, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            if not self.is_unit_monomial():
                raise ValueError("negative power of a non-monomial")
            ((m, c),) = self.terms.items()
            exps = tuple(e * n for e in m)
            self.ring._check_exps(exps)
            return Poly(self.ring, {exps: c ** n})
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ---------------------------------------------------------

    def derive(self, name: str) -> "Poly":
        """Partial derivative with respect to the named variable."""
        i = self.ring.index[name]
        out: dict = {}
        for m, c in self.terms.items():
            e = m[i]
            if e == 0:
                continue
            m2 = m[:i] + (e - 1,) + m[i + 1:]
            s = out.get(m2, Q0) + c * e
            if s:
                out[m2] = s
            elif m2 in out:
                del out[m2]
        return Poly(self.ring, out)

    def log_derive(self, name: str) -> "Poly":
        """Invariant derivative t·d/dt — degree-preserving, any variable kind."""
        i = self.ring.index[name]
        out: dict = {}
        for m, c in self.terms.items():
            e = m[i]
            if e == 0:
                continue
            out[m] = c * e
        return Poly(self.ring, out)

    # -- rendering --------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.ring.names
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for nm, e in zip(names, m):
                if e == 0:
                    continue
                factors.append(nm if e == 1 else "%s^%d" % (nm, e))
            mono = "*".join(factors)
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = "%s*%s" % (abs(c), mono)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts)

    def __repr__(self):
        return "Poly(%s)" % self


class RingHom:
    """Ring homomorphism between free rings, given by images of variables.

    Laurent variables must map to unit monomials (their images need inverses).
    """

    __slots__ = ("source", "target", "images")

    def __init__(self, source: Ring, target: Ring, images):
        self.source = source
        self.target = target
        self.images = tuple(images)
        if len(self.images) != source.nvars:
            raise ValueError("need one image per source variable")
        for im, lau, nm in zip(self.images, source.laurent, source.names):
            if im.ring != target:
                raise ValueError("image of %s lies in the wrong ring" % nm)
            if lau and not im.is_unit_monomial():
                raise ValueError(
                    "Laurent variable %s must map to a unit monomial, got %s"
                    % (nm, im)
                )

    def apply(self, p: Poly) -> Poly:
        if p.ring != self.source:
            raise ValueError("polynomial not in the source ring")
        out = self.target.zero()
        pow_cache: dict = {}
        for m, c in p.terms.items():
            term = self.target.constant(c)
            for i, e in enumerate(m):
                if e == 0:
                    continue
                key = (i, e)
                pw = pow_cache.get(key)
                if pw is None:
                    pw = self.images[i] ** e
                    pow_cache[key] = pw
                term = term * pw
            out = out + term
        return out

    def then(self, other: "RingHom") -> "RingHom":
        """Composite hom: first self, then other."""
        if self.target != other.source:
            raise ValueError("homs do not compose")
        return RingHom(
            self.source, other.target, [other.apply(im) for im in self.images]
        )

    def __repr__(self):
        body = ", ".join(
            "%s -> %s" % (nm, im) for nm, im in zip(self.source.names, self.images)
        )
        return "RingHom(%s)" % body


def ring_ops(a: Poly, b, op: str, var: str = None) -> Poly:
    """Uniform dispatch over the basic ring operations (used by law tests)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(b)
    if op == "partial_derivative":
        return a.derive(var)
    raise ValueError("unknown op %r" % op)


def substitute(h: RingHom, p: Poly) -> Poly:
    return h.apply(p)
