"""Coordinates for the spaces Λ^j E* ⊗ S^k E* ⊗ F.

Fixed basis orderings (every matrix in the package is written against these):

* symmetric multi-indices of one degree: graded reverse lexicographic,
  DESCENDING -- equivalently, ascending lexicographic order of the reversed
  exponent tuple.  For n = 2, k = 2: (2,0), (1,1), (0,2).  For n = 3, k = 2:
  x1^2, x1x2, x2^2, x1x3, x2x3, x3^2.
* exterior indices: strictly increasing tuples of 0-based directions, in
  ascending lexicographic order.
* the flat index of (fiber a, exterior S, symmetric alpha) is
  (a * C(n,j) + ext_rank(S)) * sym_dim(n,k) + sym_rank(alpha): fiber slowest,
  exterior in the middle, symmetric fastest.

Degenerate degrees follow the usual conventions: S^k = 0 for k < 0 and
Λ^j = 0 for j > n or j < 0, so the corresponding dimensions are 0.

Symmetric tensors are polynomials with plain monomial coefficients: the
contraction (directional derivative) ι_i sends x^alpha to alpha_i x^(alpha-e_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

from .ratlin import RatMatrix

ExtIndex = tuple[int, ...]
MultiIndex = tuple[int, ...]


# --------------------------- enumeration ---------------------------


def sym_dim(n: int, k: int) -> int:
    """dim S^k(E*) for dim E = n."""
    if k < 0:
        return 0
    if n == 0:
        return 1 if k == 0 else 0
    return comb(n + k - 1, k)


def ext_dim(n: int, j: int) -> int:
    """dim Λ^j(E*)."""
    if j < 0 or j > n:
        return 0
    return comb(n, j)


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[MultiIndex, ...]:
    """All exponent tuples of total degree k, in the canonical order."""
    if k < 0 or (n == 0 and k > 0):
        return ()
    if n == 0:
        return ((),)

    def fill(slots: int, total: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in fill(slots - 1, total - first):
                yield (first,) + rest

    return tuple(sorted(fill(n, k), key=lambda a: tuple(reversed(a))))


@lru_cache(maxsize=None)
def _sym_rank_table(n: int, k: int) -> dict[MultiIndex, int]:
    return {a: i for i, a in enumerate(multi_indices(n, k))}


def sym_rank(alpha: MultiIndex) -> int:
    return _sym_rank_table(len(alpha), sum(alpha))[tuple(alpha)]


@lru_cache(maxsize=None)
def ext_indices(n: int, j: int) -> tuple[ExtIndex, ...]:
    if j < 0 or j > n:
        return ()
    return tuple(combinations(range(n), j))


@lru_cache(maxsize=None)
def _ext_rank_table(n: int, j: int) -> dict[ExtIndex, int]:
    return {s: i for i, s in enumerate(ext_indices(n, j))}


def ext_rank(n: int, s: ExtIndex) -> int:
    return _ext_rank_table(n, len(s))[tuple(s)]


# --------------------------- elementary actions ---------------------------


def contract_sym(alpha: MultiIndex, i: int) -> tuple[Fraction, MultiIndex] | None:
    """ι_i on a monomial: x^alpha -> alpha_i x^(alpha - e_i); None if alpha_i = 0."""
    if alpha[i] == 0:
        return None
    reduced = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
    return Fraction(alpha[i]), reduced


def raise_sym(alpha: MultiIndex, i: int) -> MultiIndex:
    return alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]


def delta_insertion(s: ExtIndex, i: int) -> tuple[int, ExtIndex] | None:
    """Insert direction i into the exterior slot with the differential's sign.

    Sign is (-1)^(number of members of s smaller than i), which equals
    (-1)^|s| times the plain wedge sign of e_s ∧ e_i.  Returns None when
    i already occurs.
    """
    if i in s:
        return None
    below = sum(1 for x in s if x < i)
    merged = tuple(sorted(s + (i,)))
    return (-1) ** below, merged


# --------------------------- the space descriptor ---------------------------


@dataclass(frozen=True)
class TensorSpaceDesc:
    """Λ^j E* ⊗ S^k E* ⊗ F with dim E = n, dim F = f."""

    n: int
    j: int
    k: int
    f: int

    @property
    def dim(self) -> int:
        return self.f * ext_dim(self.n, self.j) * sym_dim(self.n, self.k)

    def index_of(self, a: int, s: ExtIndex, alpha: MultiIndex) -> int:
        """Flat index of basis element (fiber a, exterior s, symmetric alpha)."""
        if not (0 <= a < self.f):
            raise ValueError("fiber index out of range")
        er = _ext_rank_table(self.n, self.j)[tuple(s)]
        sr = _sym_rank_table(self.n, self.k)[tuple(alpha)]
        return (a * ext_dim(self.n, self.j) + er) * sym_dim(self.n, self.k) + sr

    def coindex_of(self, idx: int) -> tuple[int, ExtIndex, MultiIndex]:
        if not (0 <= idx < self.dim):
            raise ValueError("flat index out of range")
        sd = sym_dim(self.n, self.k)
        ed = ext_dim(self.n, self.j)
        sr = idx % sd
        rest = idx // sd
        er = rest % ed
        a = rest // ed
        return a, ext_indices(self.n, self.j)[er], multi_indices(self.n, self.k)[sr]

    def basis(self):
        """Triples (a, s, alpha) in flat order."""
        for a in range(self.f):
            for s in ext_indices(self.n, self.j):
                for alpha in multi_indices(self.n, self.k):
                    yield a, s, alpha


def contraction_matrix(desc: TensorSpaceDesc) -> RatMatrix:
    """Total contraction S^k ⊗ F -> E* ⊗ S^(k-1) ⊗ F, eta -> (v -> ι_v eta).

    Only defined on pure symmetric spaces (j = 0) of degree k >= 1; degree 0
    has nothing to contract and is rejected.
    """
    if desc.j != 0:
        raise ValueError("contraction_matrix needs a j = 0 source")
    if desc.k < 1:
        raise ValueError("contraction undefined in degree 0")
    target = TensorSpaceDesc(desc.n, 1, desc.k - 1, desc.f)
    cols: list[list[Fraction]] = []
    zero = Fraction(0)
    for a, _s, alpha in desc.basis():
        col = [zero] * target.dim
        for i in range(desc.n):
            hit = contract_sym(alpha, i)
            if hit is not None:
                coeff, beta = hit
                col[target.index_of(a, (i,), beta)] = coeff
        cols.append(col)
    return RatMatrix.from_cols(cols, rows=target.dim)
