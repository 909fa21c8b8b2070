"""Sparse exact linear algebra over Q.

Vectors are dicts {index: Fraction}; matrices are column-major lists of such
dicts.  Elimination is fraction-free in the Bareiss style: incoming vectors
are scaled to integers, rows combine by cross-multiplication, and every stored
row is divided by the gcd of its entries to control coefficient growth.
Shadow tracking turns the same elimination into a kernel/membership solver.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Q0 = Fraction(0)


def _to_integer_vector(vec):
    """Scale a {index: Fraction} vector by the lcm of denominators."""
    scale = 1
    for c in vec.values():
        d = c.denominator
        scale = scale // gcd(scale, d) * d
    return {i: int(c * scale) for i, c in vec.items() if c}, scale


def _strip_content(vec):
    g = 0
    for c in vec.values():
        g = gcd(g, abs(c))
        if g == 1:
            return vec
    if g > 1:
        return {i: c // g for i, c in vec.items()}
    return vec


def _strip_pair(row, shadow):
    """Divide row and shadow by their joint content; keeps row = Σ shadow·orig."""
    g = 0
    for c in row.values():
        g = gcd(g, abs(c))
        if g == 1:
            return row, shadow
    for c in shadow.values():
        g = gcd(g, abs(c))
        if g == 1:
            return row, shadow
    if g > 1:
        row = {i: c // g for i, c in row.items()}
        shadow = {t: c // g for t, c in shadow.items()}
    return row, shadow


class Eliminator:
    """Incremental fraction-free Gaussian elimination.

    feed() returns None when the vector was independent (rank grew) and a
    linear dependency {tag: Fraction} with Σ dep[tag]·vec_tag = 0 otherwise
    (only when built with track=True).
    """

    def __init__(self, track=False):
        self.track = track
        self.rows = {}      # pivot index -> integer row dict
        self.shadows = {}   # pivot index -> integer shadow dict
        self.rank = 0

    def feed(self, vec, tag=None):
        row, scale = _to_integer_vector(vec)
        shadow = {tag: scale} if self.track else None
        while row:
            # deterministic pivot choice: smallest index present
            piv = min(row)
            stored = self.rows.get(piv)
            if stored is None:
                if self.track:
                    row, shadow = _strip_pair(row, shadow)
                    self.shadows[piv] = shadow
                else:
                    row = _strip_content(row)
                self.rows[piv] = row
                self.rank += 1
                return None
            a = stored[piv]
            b = row[piv]
            new = {}
            for i, c in row.items():
                new[i] = a * c
            for i, c in stored.items():
                s = new.get(i, 0) - b * c
                if s:
                    new[i] = s
                elif i in new:
                    del new[i]
            if self.track:
                sh = {}
                for t, c in shadow.items():
                    sh[t] = a * c
                for t, c in self.shadows[piv].items():
                    s = sh.get(t, 0) - b * c
                    if s:
                        sh[t] = s
                    elif t in sh:
                        del sh[t]
                row, shadow = _strip_pair(new, sh)
            else:
                row = _strip_content(new)
        if not self.track:
            return {}
        g = 0
        for c in shadow.values():
            g = gcd(g, abs(c))
        if g > 1:
            shadow = {t: c // g for t, c in shadow.items()}
        return {t: Fraction(c) for t, c in shadow.items()}


class SparseMatrix:
    """Column-major sparse matrix over Q."""

    __slots__ = ("nrows", "ncols", "cols")

    def __init__(self, nrows, ncols):
        self.nrows = nrows
        self.ncols = ncols
        self.cols = [dict() for _ in range(ncols)]

    @classmethod
    def from_columns(cls, nrows, columns):
        m = cls(nrows, len(columns))
        for j, col in enumerate(columns):
            m.cols[j] = {i: Fraction(c) for i, c in col.items() if c}
        return m

    def set(self, i, j, c):
        c = Fraction(c)
        if c:
            self.cols[j][i] = c
        else:
            self.cols[j].pop(i, None)

    def get(self, i, j):
        return self.cols[j].get(i, Q0)

    def is_zero(self):
        return all(not col for col in self.cols)

    def nnz(self):
        return sum(len(col) for col in self.cols)

    def apply(self, vec):
        """Matrix·vector for {col: Fraction} vectors."""
        out = {}
        for j, x in vec.items():
            if not x:
                continue
            for i, c in self.cols[j].items():
                s = out.get(i, Q0) + c * x
                if s:
                    out[i] = s
                elif i in out:
                    del out[i]
        return out

    def mul(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = SparseMatrix(self.nrows, other.ncols)
        for j, col in enumerate(other.cols):
            out.cols[j] = self.apply(col)
        return out

    def transpose(self):
        out = SparseMatrix(self.ncols, self.nrows)
        for j, col in enumerate(self.cols):
            for i, c in col.items():
                out.cols[i][j] = c
        return out

    def rank(self):
        elim = Eliminator()
        for col in self.cols:
            if col:
                elim.feed(col)
        return elim.rank

    def kernel_and_image(self):
        return kernel_and_image(self)


def kernel_and_image(M: SparseMatrix):
    """Kernel basis (list of {col: Fraction}) and image rank of M."""
    elim = Eliminator(track=True)
    kernel = []
    for j, col in enumerate(M.cols):
        if not col:
            kernel.append({j: Fraction(1)})
            continue
        dep = elim.feed(col, tag=j)
        if dep is not None:
            kernel.append(dep)
    return kernel, elim.rank


def subquotient_dim(d_in: SparseMatrix, d_out: SparseMatrix, check=True):
    """dim(ker d_out / im d_in) for consecutive maps of a complex."""
    if d_in.ncols and d_out.ncols and d_in.nrows != d_out.ncols:
        raise ValueError("maps are not consecutive")
    if check and d_in.ncols and d_out.ncols:
        if not d_out.mul(d_in).is_zero():
            raise ValueError("d_out ∘ d_in is not zero")
    dim_mid = d_out.ncols if d_out.ncols else d_in.nrows
    rank_out = d_out.rank()
    rank_in = d_in.rank()
    return dim_mid - rank_out - rank_in


def cohomology_basis(d_in: SparseMatrix, d_out: SparseMatrix):
    """Dimension and representative vectors of ker d_out / im d_in."""
    kernel, _ = kernel_and_image(d_out)
    elim = Eliminator()
    for col in d_in.cols:
        if col:
            elim.feed(col)
    reps = []
    for v in kernel:
        before = elim.rank
        elim.feed(v)
        if elim.rank > before:
            reps.append(v)
    return len(reps), reps
