"""Dense matrices over GF(2^q): rank and incremental row-space tracking.

A network-coding trial needs to know, row by row, whether a freshly received
coefficient vector is innovative (outside the span of everything received so
far).  ``EchelonBasis`` supports that in O(cols^2) per insertion by keeping a
reduced basis with one pivot column per row.  ``CoeffMatrix.rank`` is the
batch counterpart used for cross-checks.

Entries are stored as plain ints (see gf2q); ``FieldElement`` appears only at
the API boundary.
"""

from __future__ import annotations

from .gf2q import FieldContext, FieldElement
from .rng import Stream


class CoeffMatrix:
    """Row-major dense matrix of field elements (stored as ints)."""

    __slots__ = ("ctx", "rows", "cols", "entries")

    def __init__(self, ctx: FieldContext, rows: int, cols: int,
                 entries: list[int] | None = None) -> None:
        if rows < 0 or cols < 0:
            raise ValueError("rows and cols must be non-negative")
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        if entries is None:
            entries = [0] * (rows * cols)
        if len(entries) != rows * cols:
            raise ValueError(f"need {rows * cols} entries, got {len(entries)}")
        for v in entries:
            if not 0 <= v < ctx.order:
                raise ValueError(f"entry {v} outside [0, {ctx.order})")
        self.entries = list(entries)

    @classmethod
    def identity(cls, ctx: FieldContext, n: int) -> "CoeffMatrix":
        m = cls(ctx, n, n)
        for i in range(n):
            m.entries[i * n + i] = 1
        return m

    def entry(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.ctx, self.entries[i * self.cols + j])

    def row(self, i: int) -> list[int]:
        return self.entries[i * self.cols:(i + 1) * self.cols]


def random_matrix(rng: Stream, ctx: FieldContext, rows: int, cols: int) -> CoeffMatrix:
    """Matrix with i.i.d. uniform entries, drawn row-major."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    entries = [rng.below(ctx.order) for _ in range(rows * cols)]
    return CoeffMatrix(ctx, rows, cols, entries)


def rank(mat: CoeffMatrix) -> int:
    """Rank over GF(2^q) by Gaussian elimination on a working copy."""
    if mat.ctx.exponent == 1:
        return _rank_gf2(mat)
    ctx = mat.ctx
    grid = [mat.row(i) for i in range(mat.rows)]
    r = 0
    for col in range(mat.cols):
        pivot = next((i for i in range(r, mat.rows) if grid[i][col]), None)
        if pivot is None:
            continue
        grid[r], grid[pivot] = grid[pivot], grid[r]
        inv_p = ctx.inv(grid[r][col])
        for i in range(r + 1, mat.rows):
            v = grid[i][col]
            if v:
                f = ctx.mul(v, inv_p)
                row_r = grid[r]
                row_i = grid[i]
                for j in range(col, mat.cols):
                    row_i[j] ^= ctx.mul(f, row_r[j])
        r += 1
        if r == mat.rows:
            break
    return r


def _rank_gf2(mat: CoeffMatrix) -> int:
    # GF(2) fast path: rows as bitmasks, elimination is XOR.
    masks = []
    for i in range(mat.rows):
        acc = 0
        for j, v in enumerate(mat.row(i)):
            if v:
                acc |= 1 << j
        masks.append(acc)
    r = 0
    for col in range(mat.cols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(masks)) if masks[i] & bit), None)
        if pivot is None:
            continue
        masks[r], masks[pivot] = masks[pivot], masks[r]
        for i in range(len(masks)):
            if i != r and masks[i] & bit:
                masks[i] ^= masks[r]
        r += 1
    return r


class EchelonBasis:
    """Reduced row-space basis with incremental insertion.

    Each stored row has a distinct pivot column whose entry is 1, and every
    stored row is fully reduced against the others, so the basis is a
    canonical (insertion-order independent) representation of the span.
    """

    __slots__ = ("ctx", "cols", "_rows")

    def __init__(self, ctx: FieldContext, cols: int) -> None:
        if cols < 1:
            raise ValueError("cols must be >= 1")
        self.ctx = ctx
        self.cols = cols
        self._rows: dict[int, list[int]] = {}  # pivot column -> reduced row

    @property
    def rank(self) -> int:
        return len(self._rows)

    def basis_rows(self) -> list[list[int]]:
        """Stored rows ordered by pivot column."""
        return [list(self._rows[c]) for c in sorted(self._rows)]

    def _reduce(self, row: list[int]) -> list[int]:
        ctx = self.ctx
        row = list(row)
        for col in sorted(self._rows):
            v = row[col]
            if v:
                base = self._rows[col]
                for j in range(col, self.cols):
                    row[j] ^= ctx.mul(v, base[j])
        return row

    def contains(self, row: list[int] | list[FieldElement]) -> bool:
        """Span membership (zero row is always a member)."""
        return not any(self._reduce(self._coerce(row)))

    def _coerce(self, row) -> list[int]:
        if len(row) != self.cols:
            raise ValueError(f"row length {len(row)} != cols {self.cols}")
        out = []
        for v in row:
            if isinstance(v, FieldElement):
                if v.ctx != self.ctx:
                    raise ValueError("row element from a different field context")
                v = v.value
            if not 0 <= v < self.ctx.order:
                raise ValueError(f"entry {v} outside [0, {self.ctx.order})")
            out.append(v)
        return out

    def insert(self, row: list[int] | list[FieldElement]) -> bool:
        """Insert a row; True iff it was outside the span (rank grew by 1)."""
        ctx = self.ctx
        red = self._reduce(self._coerce(row))
        pivot = next((j for j, v in enumerate(red) if v), None)
        if pivot is None:
            return False
        inv_p = ctx.inv(red[pivot])
        red = [ctx.mul(inv_p, v) for v in red]
        # Back-reduce existing rows so the basis stays canonical.
        for col, base in self._rows.items():
            v = base[pivot]
            if v:
                for j in range(pivot, self.cols):
                    base[j] ^= ctx.mul(v, red[j])
        self._rows[pivot] = red
        return True


def insert_row(basis: EchelonBasis, row: list[int] | list[FieldElement]) -> tuple[EchelonBasis, bool]:
    """Functional-style wrapper around :meth:`EchelonBasis.insert`."""
    return basis, basis.insert(row)
