"""Exact rational linear algebra.

Every decision this package makes reduces to ranks, kernels, images and affine
solvability over Q, so arithmetic is exact: entries are `fractions.Fraction`,
floating point never enters.  Matrices are dense and immutable.

Determinism is part of the contract, not an aspiration.  Row reduction uses a
fixed pivot rule -- leftmost nonzero column, first nonzero row at or below the
cursor, pivot scaled to 1, full elimination above and below -- so echelon
forms, kernel bases and canonical subspace bases are reproducible across runs
and platforms.  A `Subspace` stores the canonical column-echelon basis of its
span (the transposed reduced row echelon form of any spanning set), hence two
equal subspaces compare equal as plain data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvariantViolation

Rat = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce an int, string like '3/4', or Fraction to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ValueError(f"not an exact rational: {x!r}")


def _frozen_row(row: Iterable) -> tuple[Fraction, ...]:
    return tuple(rat(x) for x in row)


# --------------------------- matrices ---------------------------


class RatMatrix:
    """Immutable dense matrix over Q.

    Zero-row and zero-column shapes are first-class: pass ``cols=`` when the
    row list is empty so the shape survives.
    """

    __slots__ = ("_rows", "rows", "cols")

    def __init__(self, data: Sequence[Sequence], *, cols: int | None = None):
        rows = tuple(_frozen_row(r) for r in data)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged rows")
            if cols is not None and cols != width:
                raise ValueError("cols does not match row width")
            cols = width
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", cols)

    def __setattr__(self, name, value):  # immutability
        raise AttributeError("RatMatrix is immutable")

    # -- constructors --

    @staticmethod
    def zeros(rows: int, cols: int) -> "RatMatrix":
        return RatMatrix([[_ZERO] * cols for _ in range(rows)], cols=cols)

    @staticmethod
    def identity(n: int) -> "RatMatrix":
        return RatMatrix(
            [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)],
            cols=n,
        )

    @staticmethod
    def from_cols(cols: Sequence[Sequence], *, rows: int | None = None) -> "RatMatrix":
        """Build from a list of column vectors."""
        cols = [tuple(rat(x) for x in c) for c in cols]
        if cols:
            height = len(cols[0])
            if any(len(c) != height for c in cols):
                raise ValueError("ragged columns")
            if rows is not None and rows != height:
                raise ValueError("rows does not match column height")
            rows = height
        elif rows is None:
            raise ValueError("empty column list needs an explicit row count")
        return RatMatrix(
            [[cols[j][i] for j in range(len(cols))] for i in range(rows)],
            cols=len(cols),
        )

    @staticmethod
    def column(vec: Sequence) -> "RatMatrix":
        return RatMatrix([[rat(x)] for x in vec], cols=1)

    @staticmethod
    def hstack(mats: Sequence["RatMatrix"]) -> "RatMatrix":
        if not mats:
            raise ValueError("hstack of nothing")
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("hstack: row counts differ")
        total = sum(m.cols for m in mats)
        return RatMatrix(
            [sum((m._rows[i] for m in mats), ()) for i in range(rows)], cols=total
        )

    @staticmethod
    def vstack(mats: Sequence["RatMatrix"]) -> "RatMatrix":
        if not mats:
            raise ValueError("vstack of nothing")
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("vstack: column counts differ")
        data: list[tuple[Fraction, ...]] = []
        for m in mats:
            data.extend(m._rows)
        return RatMatrix(data, cols=cols)

    # -- access --

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        return self._rows[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._rows)

    def row_list(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    # -- algebra --

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatMatrix)
            and self.cols == other.cols
            and self._rows == other._rows
        )

    def __hash__(self) -> int:
        return hash((self.cols, self._rows))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([[-x for x in r] for r in self._rows], cols=self.cols)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch in +")
        return RatMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self._rows, other._rows)
            ],
            cols=self.cols,
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def scale(self, c) -> "RatMatrix":
        c = rat(c)
        return RatMatrix([[c * x for x in r] for r in self._rows], cols=self.cols)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in @")
        out = [[_ZERO] * other.cols for _ in range(self.rows)]
        orows = other._rows
        for i, rowa in enumerate(self._rows):
            oi = out[i]
            for k, a in enumerate(rowa):
                if a:  # skip-zero: matrices here are mostly sparse
                    rb = orows[k]
                    for j, b in enumerate(rb):
                        if b:
                            oi[j] += a * b
        return RatMatrix(out, cols=other.cols)

    def apply(self, vec: Sequence) -> tuple[Fraction, ...]:
        """Matrix-vector product as a tuple."""
        v = [rat(x) for x in vec]
        if len(v) != self.cols:
            raise ValueError("shape mismatch in apply")
        out = []
        for r in self._rows:
            s = _ZERO
            for a, b in zip(r, v):
                if a and b:
                    s += a * b
            out.append(s)
        return tuple(out)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            [[self._rows[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def is_zero(self) -> bool:
        return all(not x for r in self._rows for x in r)

    def rref(self) -> tuple["RatMatrix", tuple[int, ...]]:
        return rref(self)

    def rank(self) -> int:
        return len(self.rref()[1])

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._rows)
        return f"RatMatrix({self.rows}x{self.cols}: {body})"


def rref(m: RatMatrix) -> tuple[RatMatrix, tuple[int, ...]]:
    """Reduced row echelon form with the fixed pivot rule.

    Returns (R, pivots) where pivots are the pivot column indices in order.
    Pivot choice: scan columns left to right; within a column take the first
    nonzero row at or below the cursor; scale the pivot to 1; eliminate the
    column everywhere else.
    """
    work = [list(r) for r in m._rows]
    nrows, ncols = m.rows, m.cols
    pivots: list[int] = []
    cursor = 0
    for col in range(ncols):
        pivot_row = None
        for i in range(cursor, nrows):
            if work[i][col]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[cursor], work[pivot_row] = work[pivot_row], work[cursor]
        prow = work[cursor]
        inv = _ONE / prow[col]
        if inv != 1:
            for j in range(col, ncols):
                if prow[j]:
                    prow[j] *= inv
        for i in range(nrows):
            if i == cursor:
                continue
            factor = work[i][col]
            if factor:
                target = work[i]
                for j in range(col, ncols):
                    if prow[j]:
                        target[j] -= factor * prow[j]
        pivots.append(col)
        cursor += 1
        if cursor == nrows:
            break
    return RatMatrix(work, cols=ncols), tuple(pivots)


# --------------------------- subspaces ---------------------------


class Subspace:
    """A linear subspace of Q^ambient_dim with a canonical basis.

    The basis is stored as the columns of ``basis`` in column-echelon form:
    column j has entry 1 in its pivot row p_j, pivot rows strictly increase,
    and every other basis column vanishes on p_j.  Canonicality means equal
    subspaces are equal as data, which the rest of the package leans on for
    caching and for byte-stable reports.
    """

    __slots__ = ("ambient_dim", "basis", "pivots", "_constraints")

    def __init__(self, ambient_dim: int, basis: RatMatrix, pivots: tuple[int, ...]):
        # Not for direct use -- go through from_spanning/zero/full.
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "pivots", pivots)
        object.__setattr__(self, "_constraints", None)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @staticmethod
    def from_spanning(ambient_dim: int, vectors) -> "Subspace":
        """Span of the given vectors (a RatMatrix of columns, or a vector list)."""
        if isinstance(vectors, RatMatrix):
            mat = vectors
            if mat.rows != ambient_dim:
                raise ValueError("spanning matrix has wrong ambient dimension")
        else:
            mat = RatMatrix.from_cols(list(vectors), rows=ambient_dim)
        r, pivots = rref(mat.transpose())
        cols = [r.row(i) for i in range(len(pivots))]
        basis = RatMatrix.from_cols(cols, rows=ambient_dim)
        return Subspace(ambient_dim, basis, pivots)

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, RatMatrix.zeros(ambient_dim, 0), ())

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(
            ambient_dim, RatMatrix.identity(ambient_dim), tuple(range(ambient_dim))
        )

    @property
    def dim(self) -> int:
        return self.basis.cols

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of Q^{self.ambient_dim})"

    def basis_columns(self) -> list[tuple[Fraction, ...]]:
        return [self.basis.col(j) for j in range(self.dim)]

    # -- membership and coordinates --

    def reduce_mod(self, vec: Sequence) -> tuple[Fraction, ...]:
        """Canonical coset representative of vec modulo this subspace.

        Subtracts the unique combination of basis columns matching vec on the
        pivot coordinates; the result vanishes there.  reduce_mod(v) == 0 iff
        v lies in the subspace.
        """
        v = [rat(x) for x in vec]
        if len(v) != self.ambient_dim:
            raise ValueError("vector has wrong ambient dimension")
        for j, p in enumerate(self.pivots):
            c = v[p]
            if c:
                col = self.basis.col(j)
                for i, b in enumerate(col):
                    if b:
                        v[i] -= c * b
        return tuple(v)

    def contains_vector(self, vec: Sequence) -> bool:
        return not any(self.reduce_mod(vec))

    def coords_of(self, vec: Sequence) -> tuple[Fraction, ...] | None:
        """Coordinates of vec in the canonical basis, or None if outside."""
        v = [rat(x) for x in vec]
        if len(v) != self.ambient_dim:
            raise ValueError("vector has wrong ambient dimension")
        coords = tuple(v[p] for p in self.pivots)
        if any(self.reduce_mod(v)):
            return None
        return coords

    def contains(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return all(
            self.contains_vector(other.basis.col(j)) for j in range(other.dim)
        )

    # -- lattice operations --

    def sum(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return Subspace.from_spanning(
            self.ambient_dim, RatMatrix.hstack([self.basis, other.basis])
        )

    __add__ = sum

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        # x in both spans  <=>  A s = B t for coefficient vectors (s, t).
        stacked = RatMatrix.hstack([self.basis, -other.basis])
        k = kernel(stacked)
        vecs = []
        for j in range(k.dim):
            coeffs = k.basis.col(j)[: self.dim]
            vecs.append(self.basis.apply(coeffs))
        return Subspace.from_spanning(self.ambient_dim, vecs)

    def quotient_dim(self, small: "Subspace") -> int:
        """dim(self / small); raises ValueError unless small is contained in self."""
        if not self.contains(small):
            raise ValueError("quotient_dim: the alleged subspace is not contained")
        return self.dim - small.dim

    def constraint_matrix(self) -> RatMatrix:
        """A matrix Q with kernel exactly this subspace (rows span the annihilator)."""
        cached = self._constraints
        if cached is None:
            cached = kernel(self.basis.transpose()).basis.transpose()
            object.__setattr__(self, "_constraints", cached)
        return cached


# --------------------------- derived maps ---------------------------


def kernel(m: RatMatrix) -> Subspace:
    """Null space of m as a canonical Subspace of Q^cols."""
    r, pivots = rref(m)
    pivot_set = set(pivots)
    free = [j for j in range(m.cols) if j not in pivot_set]
    vecs = []
    for f in free:
        v = [_ZERO] * m.cols
        v[f] = _ONE
        for i, p in enumerate(pivots):
            coeff = r[i, f]
            if coeff:
                v[p] = -coeff
        vecs.append(v)
    return Subspace.from_spanning(m.cols, vecs)


def image(m: RatMatrix) -> Subspace:
    """Column span of m as a canonical Subspace of Q^rows."""
    return Subspace.from_spanning(m.rows, m)


@dataclass(frozen=True)
class AffineSolution:
    """Outcome of an affine system A x = b.

    Either feasible (a particular solution plus the kernel of A) or
    infeasible, in which case ``witness`` is a Fredholm certificate:
    y with yᵀA = 0 and <y, b> != 0.  Infeasibility is a value, not an error.
    """

    particular: tuple[Fraction, ...] | None
    kernel: Subspace
    witness: tuple[Fraction, ...] | None

    @property
    def feasible(self) -> bool:
        return self.particular is not None


def solve(a: RatMatrix, b: Sequence) -> tuple[Fraction, ...] | None:
    """One solution of A x = b, or None if infeasible."""
    bv = [rat(x) for x in b]
    if len(bv) != a.rows:
        raise ValueError("right-hand side has wrong length")
    aug = RatMatrix.hstack([a, RatMatrix.column(bv)])
    r, pivots = rref(aug)
    if pivots and pivots[-1] == a.cols:
        return None
    x = [_ZERO] * a.cols
    for i, p in enumerate(pivots):
        x[p] = r[i, a.cols]
    return tuple(x)


def solve_affine(a: RatMatrix, b: Sequence) -> AffineSolution:
    particular = solve(a, b)
    ker = kernel(a)
    witness = None
    if particular is None:
        bv = [rat(x) for x in b]
        for y in kernel(a.transpose()).basis_columns():
            pairing = sum((yi * bi for yi, bi in zip(y, bv) if yi and bi), _ZERO)
            if pairing:
                witness = y
                break
        if witness is None:
            raise InvariantViolation("infeasible system without a Fredholm witness")
    return AffineSolution(particular, ker, witness)


def preimage(m: RatMatrix, target: Subspace) -> Subspace:
    """{x : m x in target} as a subspace of the domain."""
    if m.rows != target.ambient_dim:
        raise ValueError("target lives in the wrong ambient space")
    q = target.constraint_matrix()
    if q.rows == 0:  # target is everything
        return Subspace.full(m.cols)
    return kernel(q @ m)


def expressed_in(m: RatMatrix, src: Subspace, tgt: Subspace) -> RatMatrix:
    """The matrix of m restricted to src, in the canonical bases of src and tgt.

    Requires m(src) to lie inside tgt; raises ValueError with the offending
    basis column otherwise.
    """
    if m.cols != src.ambient_dim or m.rows != tgt.ambient_dim:
        raise ValueError("shape mismatch in expressed_in")
    cols = []
    for j in range(src.dim):
        img = m.apply(src.basis.col(j))
        coords = tgt.coords_of(img)
        if coords is None:
            raise ValueError(f"image of basis column {j} escapes the target subspace")
        cols.append(coords)
    return RatMatrix.from_cols(cols, rows=tgt.dim)
