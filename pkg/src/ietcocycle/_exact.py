"""Exact linear algebra over Z, Q and finite fields.

Matrices are plain lists of rows. Entries are Python ints, Fractions, or any
field element supporting ``+ - * /`` and truthiness (zero is falsy).
"""
from fractions import Fraction
from math import gcd


def as_rows(M):
    return [list(r) for r in M]


def transpose(M):
    return [list(c) for c in zip(*M)]


def echelon(M):
    """Reduced row echelon form over a field.

    Returns ``(rows, pivots)`` where ``rows`` are the nonzero rows of the RREF
    and ``pivots`` their pivot columns.
    """
    A = as_rows(M)
    if not A:
        return [], []
    n = len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(A)) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c] if not isinstance(A[r][c], int) else Fraction(1, A[r][c])
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(M):
    """Exact rank; integer matrices use fraction-free (Bareiss) elimination."""
    A = as_rows(M)
    if not A or not A[0]:
        return 0
    if all(isinstance(x, int) for row in A for x in row):
        return _bareiss_rank(A)
    return len(echelon(A)[1])


def _bareiss_rank(A):
    A = [row[:] for row in A]
    m, n = len(A), len(A[0])
    prev = 1
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        piv = A[r][c]
        for i in range(r + 1, m):
            a = A[i][c]
            A[i] = [(piv * x - a * y) // prev for x, y in zip(A[i], A[r])]
        prev = piv
        r += 1
        if r == m:
            break
    return r


def nullspace(M):
    """Basis of the right kernel over Q, as lists of Fractions."""
    A = as_rows(M)
    n = len(A[0]) if A else 0
    rows, pivots = echelon([[Fraction(x) if isinstance(x, int) else x for x in r] for r in A])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(rows, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def primitive(v):
    """Scale a rational vector to a primitive integer vector."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    w = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in w:
        g = gcd(g, x)
    return [x // g for x in w] if g else w


def integer_kernel(M, n=None):
    """Z-basis of ``{v in Z^n : M v = 0}`` for an integer matrix ``M``.

    Column-style Hermite reduction of ``M`` with the unimodular transform
    tracked alongside; the transform columns that end up opposite zero
    columns of ``M`` span the kernel lattice, which is automatically
    saturated.
    """
    A = as_rows(M)
    if n is None:
        n = len(A[0]) if A else 0
    m = len(A)
    cols = [[A[i][j] for i in range(m)] + [int(i == j) for i in range(n)] for j in range(n)]
    start = 0
    for i in range(m):
        while True:
            nz = [j for j in range(start, n) if cols[j][i]]
            if not nz:
                break
            j0 = min(nz, key=lambda j: abs(cols[j][i]))
            cols[start], cols[j0] = cols[j0], cols[start]
            if len(nz) == 1:
                start += 1
                break
            a = cols[start][i]
            for j in range(start + 1, n):
                q = cols[j][i] // a
                if q:
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[start])]
    return [c[m:] for c in cols[start:]]


def lattice_index(basis):
    """Index of the lattice spanned by ``basis`` inside its rational saturation.

    Equals the gcd of the maximal minors; 1 means the lattice is saturated.
    Computed from the elementary divisors via repeated integer kernels, which
    avoids enumerating minors.
    """
    if not basis:
        return 1
    n = len(basis[0])
    r = len(basis)
    if rank(basis) < r:
        raise ValueError("basis vectors are linearly dependent")
    # Saturation = integer kernel of the integer kernel.
    dual = integer_kernel(basis, n)
    sat = integer_kernel(dual, n) if dual else [[int(i == j) for j in range(n)] for i in range(n)]
    # Express basis in terms of sat; |det| of the coefficient matrix is the index.
    coeffs = []
    S = transpose(sat)
    for v in basis:
        rows, piv = echelon([[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(S, v)])
        sol = [Fraction(0)] * len(sat)
        for row, pc in zip(rows, piv):
            sol[pc] = row[-1]
        coeffs.append(sol)
    return abs(determinant(coeffs))


def determinant(M):
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return det


def mat_mul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def rank_mod(M, modulus):
    """Rank over the prime field F_modulus of an integer matrix."""
    A = [[x % modulus for x in row] for row in M]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = pow(A[r][c], -1, modulus)
        A[r] = [x * inv % modulus for x in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % modulus for x, y in zip(A[i], A[r])]
        r += 1
        if r == m:
            break
    return r
