"""Matrix algebra over truncated Laurent series, plus exact linear algebra
over the coefficient field for residue-space computations.

The workhorse is a Smith-type diagonalization over the valuation ring O:
valuation-greedy pivoting produces ascending pivot exponents in one sweep,
because the minimum-valuation pivot divides every remaining entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (DimensionMismatch, IndeterminateValuation,
                     SingularMatrix)
from .series import FieldConfig, Series, invert_unit

INF = math.inf


class SeriesMatrix:
    """Rectangular immutable matrix of Series over a single field."""

    __slots__ = ("rows", "cols", "entries", "field")

    def __init__(self, entries):
        entries = tuple(tuple(row) for row in entries)
        if not entries or not entries[0]:
            raise ValueError("empty matrix")
        cols = len(entries[0])
        if any(len(row) != cols for row in entries):
            raise DimensionMismatch("ragged rows")
        field = entries[0][0].field
        for row in entries:
            for e in row:
                if e.field != field:
                    raise ValueError("mixed coefficient fields")
        object.__setattr__(self, "rows", len(entries))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "field", field)

    def __setattr__(self, *a):
        raise AttributeError("SeriesMatrix is immutable")

    @classmethod
    def identity(cls, field: FieldConfig, n: int) -> "SeriesMatrix":
        one, zero = Series.one(field), Series.zero(field)
        return cls([[one if i == j else zero for j in range(n)]
                    for i in range(n)])

    @classmethod
    def diagonal(cls, field: FieldConfig, diag) -> "SeriesMatrix":
        diag = list(diag)
        zero = Series.zero(field)
        return cls([[diag[i] if i == j else zero for j in range(len(diag))]
                    for i in range(len(diag))])

    @classmethod
    def from_t_exponents(cls, field: FieldConfig, exps) -> "SeriesMatrix":
        return cls.diagonal(field, [Series.t_power(field, e) for e in exps])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return isinstance(other, SeriesMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.cols} vs {other.rows}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Series.zero(self.field)
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def matvec(self, vec) -> tuple:
        vec = tuple(vec)
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length")
        out = []
        for i in range(self.rows):
            acc = Series.zero(self.field)
            for k in range(self.cols):
                acc = acc + self.entries[i][k] * vec[k]
            out.append(acc)
        return tuple(out)

    def column(self, j) -> tuple:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix([[self.entries[i][j] for i in range(self.rows)]
                             for j in range(self.cols)])

    def shift(self, k: int) -> "SeriesMatrix":
        """Entrywise multiplication by t^k."""
        return SeriesMatrix([[e.shift(k) for e in row] for row in self.entries])

    def hstack(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("row counts differ")
        return SeriesMatrix([self.entries[i] + other.entries[i]
                             for i in range(self.rows)])

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in row)
                         for row in self.entries)
        return f"SeriesMatrix[{body}]"


@dataclass(frozen=True)
class SNFResult:
    """U * diag(t^exponents) * V reconstructs the input; U, V unimodular
    over O; exponents ascending."""
    U: SeriesMatrix
    exponents: tuple
    V: SeriesMatrix

    def diagonal(self) -> SeriesMatrix:
        return SeriesMatrix.from_t_exponents(self.U.field, self.exponents)


def _pick_pivot(work, k, n):
    """Global minimum-valuation pivot in the trailing submatrix.

    Entries whose window is all zero cannot be chosen: they either are exact
    zeros or have valuation >= their horizon, so they never beat an entry
    with a certain valuation below every horizon.
    """
    best = None
    best_bound = INF
    all_exact_zero = True
    indeterminate = False
    for i in range(k, n):
        for j in range(k, n):
            e = work[i][j]
            if e.coeffs:
                all_exact_zero = False
                v = e.lead
                if v < best_bound:
                    best, best_bound = (i, j), v
            elif e.is_exact_zero:
                pass
            else:
                all_exact_zero = False
                indeterminate = True
                best_bound = min(best_bound, INF)
    if best is not None:
        # certain pivot must beat every unknown window
        for i in range(k, n):
            for j in range(k, n):
                e = work[i][j]
                if not e.coeffs and not e.is_exact_zero \
                        and e.horizon <= best_bound:
                    raise IndeterminateValuation(
                        f"entry ({i},{j}) is zero only up to horizon "
                        f"{e.horizon} <= candidate pivot valuation {best_bound}"
                    )
        return best
    if all_exact_zero:
        return None  # singular: trailing block is exactly zero
    if indeterminate:
        raise IndeterminateValuation(
            "trailing submatrix has no certain nonzero entry"
        )
    return None


def snf_over_O(M: SeriesMatrix, want_transforms: bool = True) -> SNFResult:
    """Smith normal form over O = F[[t]] for a nonsingular square matrix.

    Pivoting picks the minimum-valuation entry (ties by smallest (row, col)),
    normalizes its row so the pivot becomes exactly t^a, then clears its row
    and column with multipliers in O.  Because the pivot is a global minimum,
    pivot exponents come out ascending with no divisibility fixups.
    """
    if M.rows != M.cols:
        raise DimensionMismatch("SNF requires a square matrix")
    n = M.rows
    field = M.field
    zero = Series.zero(field)
    work = [list(row) for row in M.entries]
    if want_transforms:
        U = [[Series.one(field) if i == j else zero for j in range(n)]
             for i in range(n)]
        V = [[Series.one(field) if i == j else zero for j in range(n)]
             for i in range(n)]
    exponents = []
    for k in range(n):
        pos = _pick_pivot(work, k, n)
        if pos is None:
            raise SingularMatrix("matrix is singular over K")
        pi, pj = pos
        if pi != k:
            work[k], work[pi] = work[pi], work[k]
            if want_transforms:  # U <- U * swap
                for r in range(n):
                    U[r][k], U[r][pi] = U[r][pi], U[r][k]
        if pj != k:
            for row in work:
                row[k], row[pj] = row[pj], row[k]
            if want_transforms:  # V <- swap * V
                V[k], V[pj] = V[pj], V[k]
        pivot = work[k][k]
        a = pivot.valuation()
        exponents.append(a)
        unit = pivot.shift(-a)  # unit part of the pivot
        inv_unit = invert_unit(unit)
        # normalize the pivot row; pivot becomes t^a exactly (by construction)
        for j in range(k + 1, n):
            work[k][j] = work[k][j] * inv_unit
        work[k][k] = Series.t_power(field, a)
        if want_transforms:  # U <- U * diag(unit at k)
            for r in range(n):
                U[r][k] = U[r][k] * unit
        # clear the column below the pivot
        for i in range(k + 1, n):
            e = work[i][k]
            if e.is_exact_zero:
                continue
            m = e.shift(-a)  # e / t^a, in O since a is the minimum valuation
            for j in range(k + 1, n):
                work[i][j] = work[i][j] - m * work[k][j]
            work[i][k] = zero
            if want_transforms:  # row_i -= m*row_k  =>  U col_k += m*col_i
                for r in range(n):
                    U[r][k] = U[r][k] + m * U[r][i]
        # clear the row right of the pivot (column entries below are now 0)
        for j in range(k + 1, n):
            e = work[k][j]
            if e.is_exact_zero:
                continue
            m = e.shift(-a)
            work[k][j] = zero
            if want_transforms:  # col_j -= m*col_k  =>  V row_k += m*row_j
                for c in range(n):
                    V[k][c] = V[k][c] + m * V[j][c]
    if want_transforms:
        return SNFResult(SeriesMatrix(U), tuple(exponents), SeriesMatrix(V))
    return SNFResult(SeriesMatrix.identity(field, n), tuple(exponents),
                     SeriesMatrix.identity(field, n))


def snf_exponents(M: SeriesMatrix) -> tuple:
    return snf_over_O(M, want_transforms=False).exponents


def det_valuation(M: SeriesMatrix):
    """Valuation of det(M); +inf exactly when M is singular over K."""
    try:
        return sum(snf_exponents(M))
    except SingularMatrix:
        return INF


def solve_in_K(M: SeriesMatrix, w) -> tuple:
    """Solve M x = w over the Laurent-series field (truncated)."""
    if M.rows != M.cols:
        raise DimensionMismatch("solve requires a square matrix")
    n = M.rows
    field = M.field
    w = list(w)
    if len(w) != n:
        raise DimensionMismatch("right-hand side length")
    work = [list(row) for row in M.entries]
    perm = list(range(n))
    for k in range(n):
        # min-valuation pivot in column k keeps multipliers in O
        best, bound = None, INF
        for i in range(k, n):
            e = work[i][k]
            if e.coeffs and e.lead < bound:
                best, bound = i, e.lead
        if best is None:
            for i in range(k, n):
                e = work[i][k]
                if not e.is_exact_zero:
                    raise IndeterminateValuation(
                        f"no certain pivot in column {k}"
                    )
            raise SingularMatrix("matrix is singular over K")
        for i in range(k, n):
            e = work[i][k]
            if not e.coeffs and not e.is_exact_zero and e.horizon <= bound:
                raise IndeterminateValuation(
                    f"entry ({i},{k}) undetermined below pivot valuation"
                )
        if best != k:
            work[k], work[best] = work[best], work[k]
            w[k], w[best] = w[best], w[k]
            perm[k], perm[best] = perm[best], perm[k]
        inv_p = invert_unit(work[k][k])
        for i in range(k + 1, n):
            e = work[i][k]
            if e.is_exact_zero:
                continue
            m = e * inv_p
            for j in range(k + 1, n):
                work[i][j] = work[i][j] - m * work[k][j]
            work[i][k] = Series.zero(field)
            w[i] = w[i] - m * w[k]
    x = [Series.zero(field)] * n
    for k in range(n - 1, -1, -1):
        acc = w[k]
        for j in range(k + 1, n):
            acc = acc - work[k][j] * x[j]
        x[k] = acc * invert_unit(work[k][k])
    return tuple(x)


def det_series(M: SeriesMatrix) -> Series:
    """Determinant as a truncated series (sign and leading coefficient kept).

    Computed as the signed product of elimination pivots, so the valuation
    and the leading coefficient are certified whenever every pivot has a
    certain valuation.
    """
    if M.rows != M.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    n = M.rows
    field = M.field
    work = [list(row) for row in M.entries]
    sign = 1
    det = Series.one(field)
    for k in range(n):
        best, bound = None, INF
        any_unknown = False
        for i in range(k, n):
            e = work[i][k]
            if e.coeffs and e.lead < bound:
                best, bound = i, e.lead
            elif not e.coeffs and not e.is_exact_zero:
                any_unknown = True
        if best is None:
            if any_unknown:
                raise IndeterminateValuation(f"column {k} has no certain pivot")
            return Series.zero(field)  # exactly singular
        for i in range(k, n):
            e = work[i][k]
            if not e.coeffs and not e.is_exact_zero and e.horizon <= bound:
                raise IndeterminateValuation(
                    f"entry ({i},{k}) undetermined below pivot valuation"
                )
        if best != k:
            work[k], work[best] = work[best], work[k]
            sign = -sign
        pivot = work[k][k]
        det = det * pivot
        inv_p = invert_unit(pivot)
        for i in range(k + 1, n):
            e = work[i][k]
            if e.is_exact_zero:
                continue
            m = e * inv_p
            for j in range(k + 1, n):
                work[i][j] = work[i][j] - m * work[k][j]
            work[i][k] = Series.zero(field)
    return det if sign > 0 else -det


# -- exact linear algebra over the coefficient field ------------------------


def rref(vectors, field: FieldConfig):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    rows = [list(v) for v in vectors]
    if not rows:
        return (), ()
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [field.sub(x, field.mul(f, y))
                           for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return tuple(tuple(row) for row in rows[:r]), tuple(pivots)


class SubspaceBasis:
    """Subspace of F^n stored in reduced row echelon form (canonical)."""

    __slots__ = ("ambient", "field", "rows", "pivots")

    def __init__(self, ambient: int, field: FieldConfig, vectors=()):
        rows, pivots = rref(vectors, field)
        if rows and len(rows[0]) != ambient:
            raise DimensionMismatch("vector length differs from ambient")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "pivots", pivots)

    def __setattr__(self, *a):
        raise AttributeError("SubspaceBasis is immutable")

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, vector) -> bool:
        v = list(vector)
        if len(v) != self.ambient:
            raise DimensionMismatch("vector length")
        f = self.field
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                c = v[p]
                v = [f.sub(x, f.mul(c, y)) for x, y in zip(v, row)]
        return all(x == 0 for x in v)

    def reduce(self, vector):
        """Residue of a vector modulo this subspace (for independence tests)."""
        v = list(vector)
        f = self.field
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                c = v[p]
                v = [f.sub(x, f.mul(c, y)) for x, y in zip(v, row)]
        return tuple(v)

    def sum(self, other: "SubspaceBasis") -> "SubspaceBasis":
        if self.ambient != other.ambient:
            raise DimensionMismatch("ambient dimensions differ")
        return SubspaceBasis(self.ambient, self.field,
                             self.rows + other.rows)

    def enumerate_vectors(self, include_zero: bool = False):
        """Every vector of the subspace; small prime fields only."""
        f = self.field
        if not self.rows:
            if include_zero:
                yield (f.zero(),) * self.ambient
            return
        from itertools import product
        for combo in product(f.elements(), repeat=self.dim):
            if not include_zero and all(c == 0 for c in combo):
                continue
            acc = [f.zero()] * self.ambient
            for c, row in zip(combo, self.rows):
                if c:
                    acc = [f.add(x, f.mul(c, y)) for x, y in zip(acc, row)]
            yield tuple(acc)

    @classmethod
    def full(cls, ambient: int, field: FieldConfig) -> "SubspaceBasis":
        one, zero = field.one(), field.zero()
        return cls(ambient, field,
                   [[one if i == j else zero for j in range(ambient)]
                    for i in range(ambient)])

    def __eq__(self, other):
        return (isinstance(other, SubspaceBasis)
                and self.ambient == other.ambient and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ambient, self.rows))

    def __repr__(self):
        return f"SubspaceBasis(dim {self.dim} of F^{self.ambient})"


def field_rank(vectors, field: FieldConfig) -> int:
    return len(rref(vectors, field)[0])


def kernel_basis(rows, field: FieldConfig, ncols: int):
    """Basis of the right kernel of the matrix with the given rows."""
    red, pivots = rref(rows, field)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [field.zero()] * ncols
        v[fc] = field.one()
        for row, p in zip(red, pivots):
            v[p] = field.neg(row[fc])
        basis.append(tuple(v))
    return basis


def solve_field(rows, rhs, field: FieldConfig):
    """One solution of rows * x = rhs, or None when inconsistent."""
    if not rows:
        return None if any(b != 0 for b in rhs) else ()
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, field)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    x = [field.zero()] * ncols
    for row, p in zip(red, pivots):
        if p == ncols:
            return None
        x[p] = row[-1]
    return tuple(x)
