"""Tableaux and prolongation towers.

A classical tableau of degree d is a subspace g of S^d E* ⊗ F (degree 1 is
the textbook Hom(E, F) case); its prolongation is

    g^(1) = { xi in S^(d+1) E* ⊗ F : iota_v xi in g for every v },

computed as an intersection of contraction preimages.  A generalized tableau
is an abstract carrier subspace g together with a degree-lowering map
∂ : g -> Hom(E, F) (rows b*n + i); its first prolongation lives in S^1 ⊗ R^p
over the canonical basis of g (p = dim g),

    g^(1)(∂) = { eta : ∂(eta(X))(Y) = ∂(eta(Y))(X) for all X, Y },

and higher prolongations are classical prolongations of g^(1)(∂), so ∂ is
consumed exactly once, at level 1.

Towers re-verify, level by level, that each computed space really contracts
into the previous one; a vanished level makes all later ones zero by
construction (monotone vanishing is structural, not re-derived).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InvariantViolation
from .ratlin import RatMatrix, Subspace, kernel
from .spencer import TableauChain
from .tensorspace import multi_indices, sym_dim, sym_rank

_ZERO = Fraction(0)


# --------------------------- contraction matrices ---------------------------


@lru_cache(maxsize=None)
def iota_matrix(n: int, d: int, f: int, i: int) -> RatMatrix:
    """Single-direction contraction S^d ⊗ F -> S^(d-1) ⊗ F (monomial coefficients)."""
    src_mi = multi_indices(n, d)
    sd_src = sym_dim(n, d)
    sd_tgt = sym_dim(n, d - 1)
    rows = [[_ZERO] * (sd_src * f) for _ in range(sd_tgt * f)]
    for a in range(f):
        for sr, alpha in enumerate(src_mi):
            if alpha[i]:
                beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
                rows[a * sd_tgt + sym_rank(beta)][a * sd_src + sr] = Fraction(alpha[i])
    return RatMatrix(rows, cols=sd_src * f)


@lru_cache(maxsize=None)
def polarization_matrix(n: int, degree: int, f: int) -> RatMatrix:
    """Total contraction S^degree ⊗ F -> Hom(E, S^(degree-1) ⊗ F), rows b*n + i."""
    sd_src = sym_dim(n, degree)
    sd_tgt = sym_dim(n, degree - 1)
    rows = [[_ZERO] * (sd_src * f) for _ in range(n * sd_tgt * f)]
    for a in range(f):
        for sr, alpha in enumerate(multi_indices(n, degree)):
            for i in range(n):
                if alpha[i]:
                    beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
                    b = a * sd_tgt + sym_rank(beta)
                    rows[b * n + i][a * sd_src + sr] = Fraction(alpha[i])
    return RatMatrix(rows, cols=sd_src * f)


# --------------------------- the tableau type ---------------------------


@dataclass(frozen=True)
class Tableau:
    """A classical or generalized tableau.

    Classical (partial_map is None): ``space`` sits in S^degree ⊗ F, flat
    coordinates a * sym_dim + sym_rank; for degree 1 that ambient is n*f.
    Generalized: ``space`` sits in an abstract carrier Q^ambient, and
    ``partial_map`` gives ∂ on the canonical basis of ``space`` (columns =
    space.dim, rows = n*f with convention b*n + i).  Generalized carriers are
    not required to have ambient n*f -- symbol tableaux of connections live in
    their own source space.
    """

    n: int
    f: int
    space: Subspace
    degree: int = 1
    partial_map: RatMatrix | None = None

    def __post_init__(self):
        if self.n < 0 or self.f < 0:
            raise ValueError("negative dimensions")
        if self.partial_map is None:
            if self.degree < 1:
                raise ValueError("classical tableaux need degree >= 1")
            want = sym_dim(self.n, self.degree) * self.f
            if self.space.ambient_dim != want:
                raise ValueError(
                    f"classical carrier has ambient {self.space.ambient_dim}, want {want}"
                )
        else:
            if self.degree != 1:
                raise ValueError("generalized tableaux carry no symmetric degree")
            if self.partial_map.rows != self.n * self.f:
                raise ValueError("partial_map must have n*f rows (convention b*n+i)")
            if self.partial_map.cols != self.space.dim:
                raise ValueError("partial_map columns must match the carrier basis")

    @property
    def classical(self) -> bool:
        return self.partial_map is None

    @property
    def dim(self) -> int:
        return self.space.dim

    @staticmethod
    def classical_from(n: int, f: int, space: Subspace, degree: int = 1) -> "Tableau":
        return Tableau(n=n, f=f, space=space, degree=degree)

    @staticmethod
    def generalized(n: int, f: int, space: Subspace, partial: RatMatrix) -> "Tableau":
        return Tableau(n=n, f=f, space=space, partial_map=partial)

    @staticmethod
    def full(n: int, f: int, degree: int = 1) -> "Tableau":
        return Tableau(n=n, f=f, space=Subspace.full(sym_dim(n, degree) * f), degree=degree)

    @staticmethod
    def zero(n: int, f: int, degree: int = 1) -> "Tableau":
        return Tableau(n=n, f=f, space=Subspace.zero(sym_dim(n, degree) * f), degree=degree)

    @staticmethod
    def from_matrices(n: int, f: int, mats) -> "Tableau":
        """Degree-1 classical tableau spanned by Hom(E,F) matrices M[a][i]."""
        vecs = []
        for m in mats:
            vecs.append([Fraction(m[a][i]) for a in range(f) for i in range(n)])
        return Tableau(n=n, f=f, space=Subspace.from_spanning(n * f, vecs))


# --------------------------- prolongation ---------------------------


def _classical_prolong(n: int, f: int, degree: int, space: Subspace) -> Subspace:
    target_dim = sym_dim(n, degree + 1) * f
    if target_dim == 0 or n == 0:
        return Subspace.zero(target_dim)
    q = space.constraint_matrix()
    if q.rows == 0:  # free tableau: every contraction lands inside
        return Subspace.full(target_dim)
    blocks = [q @ iota_matrix(n, degree + 1, f, i) for i in range(n)]
    return kernel(RatMatrix.vstack(blocks))


def _generalized_first_prolong(t: Tableau) -> Subspace:
    n, f, p = t.n, t.f, t.space.dim
    partial = t.partial_map
    ambient = sym_dim(n, 1) * p  # eta flat index c*n + i
    rows: list[list[Fraction]] = []
    for b in range(f):
        for i in range(n):
            for j in range(i + 1, n):
                row = [_ZERO] * ambient
                for c in range(p):
                    # ∂(eta_i)(e_j) - ∂(eta_j)(e_i) at output coordinate b
                    co_j = partial[b * n + j, c]
                    co_i = partial[b * n + i, c]
                    if co_j:
                        row[c * n + i] += co_j
                    if co_i:
                        row[c * n + j] -= co_i
                rows.append(row)
    if not rows:
        return Subspace.full(ambient)
    return kernel(RatMatrix(rows, cols=ambient))


def prolong(t: Tableau) -> Subspace:
    """First prolongation; S^(degree+1) ⊗ F for classical, S^1 ⊗ R^p for generalized."""
    if t.classical:
        return _classical_prolong(t.n, t.f, t.degree, t.space)
    return _generalized_first_prolong(t)


# --------------------------- towers ---------------------------


@dataclass(frozen=True)
class TableauTower:
    """Levels g^(1) .. g^(depth) over a base tableau.

    For a classical base, level i sits in S^(degree+i) ⊗ F.  For a generalized
    base, levels sit in S^i ⊗ R^p over the canonical basis of the carrier
    (p = base.dim), and level 1 consumed ∂.
    """

    base: Tableau
    levels: tuple[Subspace, ...]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(level.dim for level in self.levels)

    def level_fiber(self) -> int:
        return self.base.f if self.base.classical else self.base.dim

    def level_degree(self, i: int) -> int:
        """Symmetric degree of level i (i = 0 means the base carrier)."""
        return (self.base.degree + i) if self.base.classical else i

    def chain(self) -> TableauChain:
        """The tower as a chain ready for cohomology.

        Classical: levels are g = g^(0), g^(1), ..., the bottom is the full
        S^(degree-1) ⊗ F and the bottom map is polarization.  Generalized:
        level 0 is the full carrier-coordinate space R^p, the bottom is F and
        the bottom map is ∂ itself.
        """
        t = self.base
        if t.classical:
            return TableauChain(
                n=t.n,
                fiber_dim=t.f,
                degree0=t.degree,
                levels=(t.space,) + self.levels,
                bottom_dim=sym_dim(t.n, t.degree - 1) * t.f,
                bottom_partial=polarization_matrix(t.n, t.degree, t.f),
            )
        return TableauChain(
            n=t.n,
            fiber_dim=t.dim,
            degree0=0,
            levels=(Subspace.full(t.dim),) + self.levels,
            bottom_dim=t.f,
            bottom_partial=t.partial_map,
        )


def _verify_contracts_into(n: int, f: int, degree: int, level: Subspace, prev: Subspace):
    # every contraction of every basis vector must land in the previous space
    for i in range(n):
        m = iota_matrix(n, degree, f, i)
        for col in level.basis_columns():
            if not prev.contains_vector(m.apply(col)):
                raise InvariantViolation(
                    "tower level does not contract into its predecessor"
                )


def _verify_generalized_level_one(t: Tableau, level: Subspace):
    partial, n, f, p = t.partial_map, t.n, t.f, t.space.dim
    for col in level.basis_columns():
        for b in range(f):
            for i in range(n):
                for j in range(i + 1, n):
                    s = _ZERO
                    for c in range(p):
                        s += partial[b * n + j, c] * col[c * n + i]
                        s -= partial[b * n + i, c] * col[c * n + j]
                    if s:
                        raise InvariantViolation(
                            "generalized first prolongation violates ∂-symmetry"
                        )


def tower(t: Tableau, depth: int) -> TableauTower:
    """Prolongations g^(1) .. g^(depth), each level re-verified against the last."""
    if depth < 1:
        raise ValueError("tower needs depth >= 1")
    levels: list[Subspace] = []
    fiber = t.f if t.classical else t.dim
    for i in range(1, depth + 1):
        degree_i = (t.degree + i) if t.classical else i
        if levels and levels[-1].dim == 0:
            levels.append(Subspace.zero(sym_dim(t.n, degree_i) * fiber))
            continue
        if i == 1:
            nxt = prolong(t)
            if t.classical:
                _verify_contracts_into(t.n, fiber, degree_i, nxt, t.space)
            else:
                _verify_generalized_level_one(t, nxt)
        else:
            prev = levels[-1]
            nxt = _classical_prolong(t.n, fiber, degree_i - 1, prev)
            _verify_contracts_into(t.n, fiber, degree_i, nxt, prev)
        levels.append(nxt)
    return TableauTower(base=t, levels=tuple(levels))


# --------------------------- classification ---------------------------


@dataclass(frozen=True)
class TypeVerdict:
    """Finite/infinite type, certified only up to the inspected bound.

    kind == "finite": level is the smallest l with g^(l) = 0 (g^(0) = g).
    kind == "infinite-up-to": nothing vanished through l_max; no claim beyond.
    """

    kind: str
    level: int
    ranks: tuple[int, ...]


def classify_type(t: Tableau, l_max: int) -> TypeVerdict:
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    ranks = [t.dim]
    if l_max >= 1:
        ranks.extend(tower(t, l_max).ranks)
    for l, r in enumerate(ranks):
        if r == 0:
            return TypeVerdict(kind="finite", level=l, ranks=tuple(ranks))
    return TypeVerdict(kind="infinite-up-to", level=l_max, ranks=tuple(ranks))


@dataclass(frozen=True)
class StabilizationScan:
    """Observed vanishing of H^(l,m) over a bounded window.

    stabilization[m] is the smallest l0 such that H^(l,m) = 0 for all
    l0 <= l <= l_max (l_max + 1 when even the last computed slot is nonzero).
    certified is True only under the finite-type short-circuit; otherwise the
    scan is evidence up to l_max, never a claim about all levels.
    """

    l_max: int
    entries: dict[tuple[int, int], int]
    stabilization: dict[int, int]
    certified: bool


def stabilization_scan(t: Tableau, l_max: int) -> StabilizationScan:
    from .spencer import cohomology

    tw = tower(t, l_max + 1)
    report = cohomology(tw.chain(), l_max=l_max, m_max=max(t.n, 1))
    entries = {key: e.h_dim for key, e in report.entries.items()}
    stab: dict[int, int] = {}
    for m in range(1, max(t.n, 1) + 1):
        level = l_max + 1
        for l in range(l_max, -1, -1):
            if entries[(l, m)] != 0:
                break
            level = l
        stab[m] = level
    certified = (
        report.vanishing_level is not None and report.vanishing_level <= l_max + 1
    )
    return StabilizationScan(
        l_max=l_max, entries=entries, stabilization=stab, certified=certified
    )
