"""Exact arithmetic in the cyclotomic field Q(w), w = exp(2 pi i / p), p prime.

Elements are coefficient tuples in the power basis 1, w, ..., w^{p-2}.
"""
from fractions import Fraction
from functools import lru_cache

from . import _exact


class Cyclotomic:
    __slots__ = ("p", "c")

    def __init__(self, p: int, coeffs):
        self.p = p
        c = list(coeffs) + [0] * (p - len(coeffs)) if len(coeffs) < p else list(coeffs)
        if len(c) > p:
            full = [0] * p
            for i, x in enumerate(c):
                full[i % p] += x
            c = full
        top = c[p - 1]
        self.c = tuple(x - top for x in c[: p - 1])

    @classmethod
    def root(cls, p: int, k: int) -> "Cyclotomic":
        """``w^k``."""
        c = [0] * p
        c[k % p] = 1
        return cls(p, c)

    @classmethod
    def const(cls, p: int, a) -> "Cyclotomic":
        return cls(p, [a])

    def _coerce(self, other):
        if isinstance(other, Cyclotomic):
            return other
        return Cyclotomic.const(self.p, other)

    def __add__(self, other):
        o = self._coerce(other)
        return Cyclotomic(self.p, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.p, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        out = [0] * self.p
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        out[(i + j) % self.p] += a * b
        return Cyclotomic(self.p, out)

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        n = self.p - 1
        # columns: self * w^j in the power basis
        cols = [(self * Cyclotomic.root(self.p, j)).c for j in range(n)]
        A = [[Fraction(cols[j][i]) for j in range(n)] + [Fraction(int(i == 0))] for i in range(n)]
        rows, piv = _exact.echelon(A)
        sol = [Fraction(0)] * n
        for r, pc in zip(rows, piv):
            sol[pc] = r[-1]
        return Cyclotomic(self.p, sol)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __bool__(self):
        return any(self.c)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.p == o.p and self.c == o.c

    def __hash__(self):
        return hash((self.p, self.c))

    def __complex__(self):
        import cmath

        w = cmath.exp(2j * cmath.pi / self.p)
        return sum(complex(a) * w ** i for i, a in enumerate(self.c))

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def mod(self, ell: int, omega: int) -> int:
        """Image under the ring map w -> omega in F_ell (denominators must be
        units mod ell)."""
        s = 0
        for i, a in enumerate(self.c):
            a = Fraction(a)
            s += a.numerator * pow(a.denominator, -1, ell) * pow(omega, i, ell)
        return s % ell

    def __repr__(self):
        return f"Cyclotomic({self.p}, {self.c})"


@lru_cache(maxsize=None)
def split_prime(p: int, skip: int = 0):
    """A prime ``ell = 1 mod p`` (the ``skip``-th one above 10^6) and a
    primitive p-th root of unity mod ell."""
    found = 0
    ell = (10 ** 6 // p + 1) * p + 1
    while True:
        if _is_prime(ell):
            if found == skip:
                break
            found += 1
        ell += p
    g = 2
    while True:
        omega = pow(g, (ell - 1) // p, ell)
        if omega != 1:
            return ell, omega
        g += 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def rank_lower_bound(M, p: int, tries: int = 2) -> int:
    """Largest rank mod a few split primes; never exceeds the rank over Q(w)."""
    best = 0
    for k in range(tries):
        ell, omega = split_prime(p, k)
        A = [[(x.mod(ell, omega) if isinstance(x, Cyclotomic) else int(x) % ell) for x in row] for row in M]
        best = max(best, _exact.rank_mod(A, ell))
    return best


def exact_rank(M) -> int:
    return len(_exact.echelon([list(r) for r in M])[1])
