"""Connections relative to a coefficient map, and their torsion.

A relative connection is the data D = (sigma, A_1..A_n): sigma maps the
source space E' into a coefficient space W, the A_i map E' into W, and the
covariant derivative of a section s along d_i is D_i(s) = A_i s + sigma(d_i s).
Everything below is fiberwise exact linear algebra over these matrices.

Fixed coordinate layouts:
* points of the first jet of a section are written (e, psi_1..psi_n) with the
  e block first, then the psi blocks in direction order -- ambient dimension
  (1 + n) * source_dim;
* the symbol g = ker(sigma) is carried by its canonical basis, and the
  degree-lowering map ∂_D(v) = (i -> A_i v) is stored with rows b*n + i;
* torsion representatives live in the Λ² ⊗ W slot with ext-major coordinates
  rank(i,j) * coeff_dim + b.

The torsion at a source point e is decided by affine feasibility alone, so a
non-surjective sigma needs no special casing: an empty fiber is reported with
a Fredholm witness, a nonvanishing torsion with a canonical representative of
its class modulo the image of the ∂-built Spencer differential.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantViolation
from .ratlin import (
    RatMatrix,
    Subspace,
    image,
    kernel,
    rat,
    solve_affine,
)
from .spencer import delta_partial_matrix
from .tableau import Tableau, prolong
from .tensorspace import ext_indices, ext_rank

_ZERO = Fraction(0)


class RelConn:
    """A relative connection (sigma, A_1..A_n) with cached derived data."""

    __slots__ = ("n", "source_dim", "coeff_dim", "sigma", "mats", "symbol",
                 "sigma_surjective", "_symbol_map", "_delta_image")

    def __init__(self, sigma: RatMatrix, mats: Sequence[RatMatrix]):
        n = len(mats)
        if n < 1:
            raise ValueError("need at least one direction")
        if any(m.shape != sigma.shape for m in mats):
            raise ValueError("all A_i must share sigma's shape")
        self.n = n
        self.coeff_dim, self.source_dim = sigma.shape
        self.sigma = sigma
        self.mats = tuple(mats)
        self.symbol = kernel(sigma)
        self.sigma_surjective = sigma.rank() == self.coeff_dim
        self._symbol_map = None
        self._delta_image = None

    def __repr__(self) -> str:
        return (
            f"RelConn(n={self.n}, source={self.source_dim}, "
            f"coeff={self.coeff_dim}, symbol dim {self.symbol.dim})"
        )


def symbol(conn: RelConn) -> Subspace:
    """ker(sigma) inside the source space."""
    return conn.symbol


def symbol_map(conn: RelConn) -> Tableau:
    """The generalized tableau (g, ∂_D) with ∂_D(v) = (i -> A_i v)."""
    if conn._symbol_map is None:
        g = conn.symbol
        rows = [[_ZERO] * g.dim for _ in range(conn.n * conn.coeff_dim)]
        for c, vec in enumerate(g.basis_columns()):
            for i, a in enumerate(conn.mats):
                out = a.apply(vec)
                for b, x in enumerate(out):
                    if x:
                        rows[b * conn.n + i][c] = x
        partial = RatMatrix(rows, cols=g.dim)
        conn._symbol_map = Tableau.generalized(conn.n, conn.coeff_dim, g, partial)
    return conn._symbol_map


def _delta_image(conn: RelConn) -> Subspace:
    """Image of delta_∂D : Hom(E, g) -> Λ² ⊗ W, in slot coordinates."""
    if conn._delta_image is None:
        partial = symbol_map(conn).partial_map
        conn._delta_image = image(delta_partial_matrix(partial, conn.n, 1))
    return conn._delta_image


# --------------------------- prolongation fibers ---------------------------


def _partial_rows(conn: RelConn) -> RatMatrix:
    """Rows of the linear system cutting the partial fiber out of (e, psi)."""
    n, sd, cd = conn.n, conn.source_dim, conn.coeff_dim
    width = (1 + n) * sd
    rows = []
    for i in range(n):
        for b in range(cd):
            row = [_ZERO] * width
            arow = conn.mats[i].row(b)
            srow = conn.sigma.row(b)
            for c in range(sd):
                if arow[c]:
                    row[c] = arow[c]
                if srow[c]:
                    row[(1 + i) * sd + c] = srow[c]
            rows.append(row)
    return RatMatrix(rows, cols=width)


def _symmetry_rows(conn: RelConn) -> RatMatrix:
    """A_j psi_i - A_i psi_j = 0 for i < j, as rows over (e, psi)."""
    n, sd, cd = conn.n, conn.source_dim, conn.coeff_dim
    width = (1 + n) * sd
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            for b in range(cd):
                row = [_ZERO] * width
                aj = conn.mats[j].row(b)
                ai = conn.mats[i].row(b)
                for c in range(sd):
                    if aj[c]:
                        row[(1 + i) * sd + c] += aj[c]
                    if ai[c]:
                        row[(1 + j) * sd + c] -= ai[c]
                rows.append(row)
    return RatMatrix(rows, cols=width)


def partial_prolongation_fiber(conn: RelConn) -> Subspace:
    """{(e, psi) : sigma(psi_i) = -A_i e for all i}."""
    return kernel(_partial_rows(conn))


@dataclass(frozen=True)
class ProlFiber:
    """The classical prolongation fiber with its two canonical pieces.

    subspace sits in (1+n)*source_dim coordinates; kernel_part is the e = 0
    slice in the psi-block coordinates and is canonically the generalized
    prolongation g^(1)(∂_D); projection_image is the set of source points
    admitting a full first-order lift.
    """

    subspace: Subspace
    projection_image: Subspace
    kernel_part: Subspace


def classical_prolongation_fiber(conn: RelConn) -> ProlFiber:
    n, sd = conn.n, conn.source_dim
    full_rows = RatMatrix.vstack([_partial_rows(conn), _symmetry_rows(conn)])
    fiber = kernel(full_rows)
    proj = Subspace.from_spanning(sd, [col[:sd] for col in fiber.basis_columns()])
    psi_block = RatMatrix(
        [row[sd:] for row in full_rows.row_list()], cols=n * sd
    )
    ker_part = kernel(psi_block)
    if fiber.dim != ker_part.dim + proj.dim:
        raise InvariantViolation("prolongation fiber fails exactness bookkeeping")
    # the e = 0 slice, rewritten over the symbol basis, is g^(1)(∂_D)
    g = conn.symbol
    etas = []
    for col in ker_part.basis_columns():
        eta = [_ZERO] * (g.dim * n)
        for i in range(n):
            coords = g.coords_of(col[i * sd : (i + 1) * sd])
            if coords is None:
                raise InvariantViolation("kernel part leaves the symbol")
            for c, x in enumerate(coords):
                eta[c * n + i] = x
        etas.append(eta)
    if Subspace.from_spanning(g.dim * n, etas) != prolong(symbol_map(conn)):
        raise InvariantViolation(
            "kernel part does not match the generalized prolongation"
        )
    return ProlFiber(subspace=fiber, projection_image=proj, kernel_part=ker_part)


def prolongation_connection(conn: RelConn) -> RelConn:
    """The induced connection on the classical prolongation fiber.

    sigma' extracts the base point e; the direction maps extract -psi_i (the
    sign is forced by compatibility: sigma(psi_i) = -A_i e on the fiber).
    """
    fiber = classical_prolongation_fiber(conn).subspace
    sd, n = conn.source_dim, conn.n
    cols = fiber.basis_columns()
    sigma_p = RatMatrix.from_cols([col[:sd] for col in cols], rows=sd)
    mats = []
    for i in range(n):
        mats.append(
            RatMatrix.from_cols(
                [tuple(-x for x in col[(1 + i) * sd : (2 + i) * sd]) for col in cols],
                rows=sd,
            )
        )
    return RelConn(sigma_p, mats)


# --------------------------- compatibility ---------------------------


@dataclass(frozen=True)
class CompatibilityFailure:
    condition: int  # 1: A_i sigma' != sigma B_i;  2: A_i B_j != A_j B_i
    directions: tuple[int, ...]
    basis_index: int
    discrepancy: tuple[Fraction, ...]


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    failures: tuple[CompatibilityFailure, ...]


def compatible(outer: RelConn, inner: RelConn) -> CompatibilityReport:
    """Check the two compatibility identities of a nested pair.

    (1) A_i sigma' = sigma B_i for every direction; (2) A_i B_j = A_j B_i for
    i < j.  Failures carry the first basis vector where the identity breaks
    and the nonzero discrepancy, one record per broken identity.
    """
    if inner.n != outer.n:
        raise ValueError("direction counts differ")
    if inner.coeff_dim != outer.source_dim:
        raise ValueError("inner coefficients must be the outer source")
    failures: list[CompatibilityFailure] = []
    for i in range(outer.n):
        diff = outer.mats[i] @ inner.sigma - outer.sigma @ inner.mats[i]
        if not diff.is_zero():
            col = next(j for j in range(diff.cols) if any(diff.col(j)))
            failures.append(
                CompatibilityFailure(1, (i,), col, diff.col(col))
            )
    for i in range(outer.n):
        for j in range(i + 1, outer.n):
            diff = outer.mats[i] @ inner.mats[j] - outer.mats[j] @ inner.mats[i]
            if not diff.is_zero():
                col = next(c for c in range(diff.cols) if any(diff.col(c)))
                failures.append(
                    CompatibilityFailure(2, (i, j), col, diff.col(col))
                )
    return CompatibilityReport(ok=not failures, failures=tuple(failures))


# --------------------------- torsion ---------------------------


@dataclass(frozen=True)
class TorsionResult:
    """Outcome of the torsion question at a source point.

    kind is one of:
    * "vanishes": some lift makes the curvature 2-form zero; ``lift`` holds
      the psi blocks (flat, length n * source_dim);
    * "obstruction": lifts exist but none kills the curvature;
      ``representative`` is the canonical representative of the class of
      K(i,j) = A_j psi_i - A_i psi_j modulo Im(delta_∂D), in Λ² ⊗ W slot
      coordinates;
    * "fiber-empty": no lift at all; ``witness`` certifies infeasibility of
      sigma(psi_i) = -A_i e (rows ordered i*coeff_dim + b).
    """

    kind: str
    lift: tuple[Fraction, ...] | None = None
    representative: tuple[Fraction, ...] | None = None
    witness: tuple[Fraction, ...] | None = None


def _lift_system(conn: RelConn, e: Sequence) -> tuple[RatMatrix, list[Fraction]]:
    """sigma(psi_i) = -A_i e as a system over the flat psi vector."""
    n, sd, cd = conn.n, conn.source_dim, conn.coeff_dim
    rows = []
    rhs: list[Fraction] = []
    for i in range(n):
        neg = [-x for x in conn.mats[i].apply(e)]
        for b in range(cd):
            row = [_ZERO] * (n * sd)
            srow = conn.sigma.row(b)
            for c in range(sd):
                if srow[c]:
                    row[i * sd + c] = srow[c]
            rows.append(row)
            rhs.append(neg[b])
    return RatMatrix(rows, cols=n * sd), rhs


def curvature_of_lift(conn: RelConn, psi: Sequence) -> tuple[Fraction, ...]:
    """K(i,j) = A_j psi_i - A_i psi_j over Λ² ⊗ W slot coordinates."""
    n, sd, cd = conn.n, conn.source_dim, conn.coeff_dim
    psi = [rat(x) for x in psi]
    out = [_ZERO] * (len(ext_indices(n, 2)) * cd)
    for (i, j) in ext_indices(n, 2):
        base = ext_rank(n, (i, j)) * cd
        vi = psi[i * sd : (i + 1) * sd]
        vj = psi[j * sd : (j + 1) * sd]
        term = [
            a - b
            for a, b in zip(conn.mats[j].apply(vi), conn.mats[i].apply(vj))
        ]
        for b, x in enumerate(term):
            if x:
                out[base + b] = x
    return tuple(out)


def torsion_at(conn: RelConn, e: Sequence) -> TorsionResult:
    """Decide whether the torsion class at e vanishes, obstructs, or is void."""
    e = [rat(x) for x in e]
    if len(e) != conn.source_dim:
        raise ValueError("point has wrong dimension")
    lift_mat, rhs = _lift_system(conn, e)
    n, sd, cd = conn.n, conn.source_dim, conn.coeff_dim
    sym_rows = []
    sym_rhs = []
    full_sym = _symmetry_rows(conn)
    for r in range(full_sym.rows):
        row = full_sym.row(r)
        sym_rows.append(row[sd:])
        sym_rhs.append(_ZERO)
    full = RatMatrix.vstack([lift_mat, RatMatrix(sym_rows, cols=n * sd)]) if sym_rows else lift_mat
    sol = solve_affine(full, rhs + sym_rhs)
    if sol.feasible:
        return TorsionResult(kind="vanishes", lift=sol.particular)
    partial_sol = solve_affine(lift_mat, rhs)
    if not partial_sol.feasible:
        return TorsionResult(kind="fiber-empty", witness=partial_sol.witness)
    k = curvature_of_lift(conn, partial_sol.particular)
    rep = _delta_image(conn).reduce_mod(k)
    if not any(rep):
        raise InvariantViolation(
            "torsion class vanished although no symmetric lift exists"
        )
    return TorsionResult(kind="obstruction", representative=rep)


def h01_dim(outer: RelConn, inner: RelConn) -> int:
    """dim of ker(delta_∂D on Hom(E, g)) / (symbol of the inner connection).

    Requires the pair to pass ``compatible``; raises ValueError otherwise.
    """
    report = compatible(outer, inner)
    if not report.ok:
        raise ValueError("h01_dim needs a compatible pair")
    g = outer.symbol
    p = g.dim
    n = outer.n
    z = kernel(delta_partial_matrix(symbol_map(outer).partial_map, n, 1))
    vecs = []
    for v in inner.symbol.basis_columns():
        eta = [_ZERO] * (n * p)
        for i in range(n):
            img = inner.mats[i].apply(v)
            coords = g.coords_of(img)
            if coords is None:
                raise InvariantViolation(
                    "inner symbol does not map into the outer symbol"
                )
            for c, x in enumerate(coords):
                eta[i * p + c] = x
        vecs.append(eta)
    b = Subspace.from_spanning(n * p, vecs)
    if not z.contains(b):
        raise InvariantViolation("inner-symbol image is not closed")
    return z.dim - b.dim
