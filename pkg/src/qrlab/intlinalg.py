"""Exact integer and mod-p linear algebra.

Everything here is arbitrary-precision (plain Python ints); nothing ever
rounds.  Matrices are lists of row lists internally, with a small immutable
IntMatrix wrapper for public return values.  Row-vector convention
throughout: vectors multiply matrices from the left, lattices are spanned
by rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rows = list[list[int]]


@dataclass(frozen=True)
class IntMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.entries:
            w = len(self.entries[0])
            if any(len(r) != w for r in self.entries):
                raise ValueError("ragged matrix")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def to_rows(self) -> Rows:
        return [list(r) for r in self.entries]

    def diagonal(self) -> list[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]


def identity_rows(n: int) -> Rows:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Rows, b: Rows) -> Rows:
    if a and b and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    cols = len(b[0])
    out = []
    for row in a:
        acc = [0] * cols
        for k, x in enumerate(row):
            if x:
                bk = b[k]
                for j in range(cols):
                    acc[j] += x * bk[j]
        out.append(acc)
    return out


def transpose(a: Rows) -> Rows:
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def det_int(rows: Rows) -> int:
    """Bareiss fraction-free determinant."""
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    m = [r[:] for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def integer_inverse(rows: Rows) -> Rows:
    """Exact inverse of an integer matrix whose inverse is integral
    (unimodular input).  Fraction Gauss-Jordan, integrality asserted."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        d = a[col][col]
        a[col] = [x / d for x in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    inv = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = a[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular over Z")
            row.append(int(x))
        inv.append(row)
    return inv


# ---------------------------------------------------------------------------
# Smith normal form

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def smith_normal_form(a) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (D, U, V) with U*A*V = D diagonal, d1 | d2 | ..., di >= 0.

    U and V are unimodular (products of elementary row/column operations,
    determinant sign tracked and the reconstruction U*A*V == D is checked
    before returning).  Pivot rule: smallest nonzero absolute value in the
    working submatrix, ties by lowest (row, col).
    """
    A = a.to_rows() if isinstance(a, IntMatrix) else [list(r) for r in a]
    m = len(A)
    n = len(A[0]) if A else 0
    M = [r[:] for r in A]
    U = identity_rows(m)
    V = identity_rows(n)

    def row_sub(i, t, q):  # row_i -= q * row_t
        Mi, Mt, Ui, Ut = M[i], M[t], U[i], U[t]
        for j in range(n):
            Mi[j] -= q * Mt[j]
        for j in range(m):
            Ui[j] -= q * Ut[j]

    def col_sub(j, t, q):  # col_j -= q * col_t
        for i in range(m):
            M[i][j] -= q * M[i][t]
        for i in range(n):
            V[i][j] -= q * V[i][t]

    t = 0
    while t < min(m, n):
        # deterministic pivot: smallest |entry|, then lowest row, then col
        best = None
        for i in range(t, m):
            Mi = M[i]
            for j in range(t, n):
                x = Mi[j]
                if x:
                    key = (abs(x), i, j)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        _, bi, bj = best
        if bi != t:
            M[bi], M[t] = M[t], M[bi]
            U[bi], U[t] = U[t], U[bi]
        if bj != t:
            for row in M:
                row[bj], row[t] = row[t], row[bj]
            for row in V:
                row[bj], row[t] = row[t], row[bj]
        while True:
            dirty = False
            for i in range(t + 1, m):
                if M[i][t]:
                    q = M[i][t] // M[t][t]
                    if q:
                        row_sub(i, t, q)
                    if M[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if M[t][j]:
                    q = M[t][j] // M[t][t]
                    if q:
                        col_sub(j, t, q)
                    if M[t][j]:
                        dirty = True
            if not dirty:
                break
            # a nonzero remainder is strictly smaller than the pivot;
            # re-select inside the submatrix and keep going
            best = None
            for i in range(t, m):
                Mi = M[i]
                for j in range(t, n):
                    x = Mi[j]
                    if x:
                        key = (abs(x), i, j)
                        if best is None or key < best:
                            best = key
            _, bi, bj = best
            if bi != t:
                M[bi], M[t] = M[t], M[bi]
                U[bi], U[t] = U[t], U[bi]
            if bj != t:
                for row in M:
                    row[bj], row[t] = row[t], row[bj]
                for row in V:
                    row[bj], row[t] = row[t], row[bj]
        if M[t][t] < 0:
            M[t] = [-x for x in M[t]]
            U[t] = [-x for x in U[t]]
        # divisibility repair: fold any non-multiple into row t and redo
        d = M[t][t]
        offender = None
        for i in range(t + 1, m):
            Mi = M[i]
            for j in range(t + 1, n):
                if Mi[j] % d:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_sub(t, offender, -1)  # row_t += row_offender
            continue
        t += 1

    D = [[M[i][j] if i == j else 0 for j in range(n)] for i in range(m)]
    if M != D:
        raise AssertionError("Smith reduction left off-diagonal residue")
    diag = [D[i][i] for i in range(min(m, n))]
    for i in range(len(diag) - 1):
        if diag[i + 1] and diag[i] == 0:
            raise AssertionError("zero divisor precedes nonzero in Smith chain")
        if diag[i] and diag[i + 1] % diag[i]:
            raise AssertionError("Smith divisibility chain broken")
    if mat_mul(mat_mul(U, A), V) != D:
        raise AssertionError("U*A*V != D after Smith reduction")
    if m <= 64 and abs(det_int(U)) != 1:
        raise AssertionError("U not unimodular")
    if n <= 64 and abs(det_int(V)) != 1:
        raise AssertionError("V not unimodular")
    return IntMatrix.from_rows(D), IntMatrix.from_rows(U), IntMatrix.from_rows(V)


def elementary_divisors(rows: Rows) -> list[int]:
    """Nonzero diagonal of the Smith form (with multiplicity, 1s included)."""
    if not rows or not rows[0]:
        return []
    D, _, _ = smith_normal_form(rows)
    return [d for d in D.diagonal() if d]


# ---------------------------------------------------------------------------
# abelian invariants

@dataclass(frozen=True)
class AbelianInvariants:
    """Isomorphism type Z^free_rank + sum Z/d_i with 2 <= d1 | d2 | ..."""

    free_rank: int
    torsion: tuple[int, ...]

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        prev = None
        for d in self.torsion:
            if d < 2:
                raise ValueError("torsion entries must be >= 2")
            if prev is not None and d % prev:
                raise ValueError("torsion entries must form a divisibility chain")
            prev = d

    @property
    def order(self) -> int | None:
        """Group order, None if infinite."""
        if self.free_rank:
            return None
        n = 1
        for d in self.torsion:
            n *= d
        return n

    def is_torsion_free(self) -> bool:
        return not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append(f"Z^{self.free_rank}" if self.free_rank > 1 else "Z")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def lattice_quotient(ambient_rank: int, gens: Iterable[Sequence[int]]) -> AbelianInvariants:
    """Invariants of Z^ambient_rank / (row span of gens)."""
    rows = [list(r) for r in gens]
    for r in rows:
        if len(r) != ambient_rank:
            raise ValueError("generator length != ambient rank")
    if not rows or ambient_rank == 0:
        return AbelianInvariants(ambient_rank, ())
    divisors = elementary_divisors(rows)
    torsion = tuple(d for d in divisors if d > 1)
    return AbelianInvariants(ambient_rank - len(divisors), torsion)


def p_part(d: int, p: int) -> int:
    q = 1
    while d % p == 0:
        d //= p
        q *= p
    return q


def p_torsion(inv: AbelianInvariants, p: int) -> tuple[int, ...]:
    """p-power elementary divisors of the torsion part (empty = no p-torsion)."""
    parts = [p_part(d, p) for d in inv.torsion]
    return tuple(q for q in parts if q > 1)


# ---------------------------------------------------------------------------
# Hermite-form row lattices

class Lattice:
    """Sublattice of Z^n spanned by inserted rows, kept in echelon form.

    Basis rows have strictly increasing pivot columns and positive pivots.
    canonicalize() additionally reduces entries above each pivot into
    [0, pivot), yielding the unique Hermite basis of the span.
    """

    def __init__(self, ambient: int):
        self.ambient = ambient
        self.basis: Rows = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.basis)

    def _pivot_of(self, row: list[int]) -> int:
        for j, x in enumerate(row):
            if x:
                return j
        return -1

    def add(self, vec: Sequence[int]) -> bool:
        """Insert one vector; True iff the spanned lattice grew or changed."""
        v = [int(x) for x in vec]
        if len(v) != self.ambient:
            raise ValueError("vector length != ambient dimension")
        changed = False
        k = 0
        while True:
            j = self._pivot_of(v)
            if j < 0:
                return changed
            while k < len(self.basis) and self._pivots[k] < j:
                k += 1
            if k == len(self.basis) or self._pivots[k] > j:
                if v[j] < 0:
                    v = [-x for x in v]
                self.basis.insert(k, v)
                self._pivots.insert(k, j)
                return True
            b = self.basis[k]
            if v[j] % b[j] == 0:
                q = v[j] // b[j]
                v = [x - q * y for x, y in zip(v, b)]
            else:
                g, s, t = _xgcd(b[j], v[j])
                nb = [s * x + t * y for x, y in zip(b, v)]
                nv = [(b[j] // g) * y - (v[j] // g) * x for x, y in zip(b, v)]
                self.basis[k] = nb
                v = nv
                changed = True

    def canonicalize(self) -> None:
        """Reduce above-pivot entries; basis becomes the Hermite normal form."""
        for k in range(len(self.basis) - 1, -1, -1):
            j = self._pivots[k]
            b = self.basis[k]
            for i in range(k):
                q = self.basis[i][j] // b[j]
                if q:
                    self.basis[i] = [x - q * y for x, y in zip(self.basis[i], b)]

    def coordinates(self, vec: Sequence[int]) -> list[int] | None:
        """c with sum c_k basis_k == vec, or None if vec is not in the lattice."""
        v = [int(x) for x in vec]
        if len(v) != self.ambient:
            raise ValueError("vector length != ambient dimension")
        coeffs = [0] * len(self.basis)
        for k, b in enumerate(self.basis):
            j = self._pivots[k]
            if v[j]:
                if v[j] % b[j]:
                    return None
                q = v[j] // b[j]
                coeffs[k] = q
                v = [x - q * y for x, y in zip(v, b)]
        return coeffs if not any(v) else None

    def __contains__(self, vec) -> bool:
        return self.coordinates(vec) is not None

    def basis_rows(self) -> Rows:
        return [r[:] for r in self.basis]

    def equals(self, other: "Lattice") -> bool:
        if self.ambient != other.ambient or self.rank != other.rank:
            return False
        return all(r in other for r in self.basis) and all(r in self for r in other.basis)


def lattice_from_rows(ambient: int, rows: Iterable[Sequence[int]]) -> Lattice:
    lat = Lattice(ambient)
    for r in rows:
        lat.add(r)
    lat.canonicalize()
    return lat


def left_kernel(rows: Rows, width: int | None = None) -> Rows:
    """Basis of {x in Z^m : x * A = 0} for A given as m rows.

    Echelonize (A | I); rows whose A-part vanished carry kernel vectors in
    the identity part.  The result is a full basis of the kernel lattice.
    """
    m = len(rows)
    n = width if width is not None else (len(rows[0]) if rows else 0)
    lat = Lattice(n + m)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ValueError("ragged input")
        aug = list(r) + [0] * m
        aug[n + i] = 1
        lat.add(aug)
    lat.canonicalize()
    return [row[n:] for row in lat.basis if not any(row[:n])]


# ---------------------------------------------------------------------------
# mod-p (and mod-p^k) routines

def modp_rref(rows: Rows, p: int) -> tuple[Rows, list[int]]:
    """Reduced row echelon form over F_p; returns (rref rows, pivot columns).
    Zero rows are dropped."""
    a = [[x % p for x in r] for r in rows]
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [(x * inv) % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def modp_rank(rows: Rows, p: int) -> int:
    _, pivots = modp_rref(rows, p)
    return len(pivots)


def modp_left_kernel(rows: Rows, p: int, width: int | None = None) -> Rows:
    """Basis of {x : x * A = 0 mod p}, A given as m rows of length n."""
    m = len(rows)
    n = width if width is not None else (len(rows[0]) if rows else 0)
    aug = []
    for i, r in enumerate(rows):
        e = [0] * m
        e[i] = 1
        aug.append([x % p for x in r] + e)
    # echelonize prioritizing the A-columns
    red, pivots = modp_rref(aug, p)
    out = [row[n:] for row in red if not any(row[:n])]
    # rows of rref that vanished entirely never appear; recover them:
    # rank-nullity says we need m - rank(A) kernel rows
    want = m - modp_rank(rows, p)
    if len(out) != want:
        raise AssertionError("kernel dimension mismatch")
    return out


def modp_solve_left(a_rows: Rows, b: Sequence[int], p: int) -> list[int] | None:
    """One x with x * A = b (mod p), or None.  A is m rows of length n."""
    m = len(a_rows)
    if m == 0:
        return [] if not any(x % p for x in b) else None
    at = transpose(a_rows)  # n x m, solve At * x^T = b^T
    aug = [[x % p for x in row] + [b[i] % p] for i, row in enumerate(at)]
    red, pivots = modp_rref(aug, p)
    x = [0] * m
    for row, c in zip(red, pivots):
        if c == m:
            return None  # pivot in the constants column: inconsistent
        x[c] = row[m]
    return x


def modpk_mat_mul(a: Rows, b: Rows, q: int) -> Rows:
    out = mat_mul(a, b)
    return [[x % q for x in row] for row in out]


def modpk_identity(n: int) -> Rows:
    return identity_rows(n)


def is_invertible_modp(rows: Rows, p: int) -> bool:
    n = len(rows)
    return n == 0 or (len(rows[0]) == n and modp_rank(rows, p) == n)


class ModpSpan:
    """Incremental F_p row space kept in reduced echelon form."""

    def __init__(self, width: int, p: int):
        self.width = width
        self.p = p
        self.rows: Rows = []
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Sequence[int]) -> list[int]:
        p = self.p
        v = [x % p for x in vec]
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                f = v[c]
                v = [(x - f * y) % p for x, y in zip(v, row)]
        return v

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce(vec))

    def add(self, vec: Sequence[int]) -> bool:
        """Insert one vector; True iff the dimension grew."""
        p = self.p
        v = self.reduce(vec)
        c = next((j for j, x in enumerate(v) if x), None)
        if c is None:
            return False
        inv = pow(v[c], -1, p)
        v = [(x * inv) % p for x in v]
        for i in range(len(self.rows)):
            if self.rows[i][c]:
                f = self.rows[i][c]
                self.rows[i] = [(x - f * y) % p for x, y in zip(self.rows[i], v)]
        k = next((i for i, pc in enumerate(self.pivots) if pc > c), len(self.rows))
        self.rows.insert(k, v)
        self.pivots.insert(k, c)
        return True
