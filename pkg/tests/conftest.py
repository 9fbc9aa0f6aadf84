import os
import sys

from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from ietcocycle.combinatorics import Permutation, reducibility_index  # noqa: E402


@st.composite
def irreducible_perms(draw, dmin=2, dmax=5):
    d = draw(st.integers(dmin, dmax))
    bottom = tuple(draw(st.permutations(list(range(d)))))
    top = tuple(range(d))
    if reducibility_index(top, bottom) is not None:
        bottom = tuple(reversed(top))
    return Permutation(top, bottom)


@st.composite
def iet_params(draw, dmin=2, dmax=5, max_len=10 ** 6):
    """(perm, positive integer lengths)."""
    perm = draw(irreducible_perms(dmin, dmax))
    lam = draw(st.lists(st.integers(1, max_len), min_size=perm.d, max_size=perm.d))
    return perm, lam
