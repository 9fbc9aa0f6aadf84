"""Permutations of interval exchanges, Rauzy moves and classes, and the
intersection form with its genus and singularity counts."""
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from . import _exact
from .errors import InconsistentParity, NonComposablePath, NotABijection, Reducible

TOP, BOTTOM = "top", "bottom"


@dataclass(frozen=True)
class Permutation:
    """Two orderings of the same alphabet: the top and bottom rows.

    ``alphabet`` fixes the row/column order of every matrix indexed by
    letters; it defaults to the top row and is carried through Rauzy moves.
    It does not take part in equality or hashing.
    """

    top: tuple
    bottom: tuple
    alphabet: tuple = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "top", tuple(self.top))
        object.__setattr__(self, "bottom", tuple(self.bottom))
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", self.top)
        else:
            object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def d(self) -> int:
        return len(self.top)

    @property
    def last_top(self):
        return self.top[-1]

    @property
    def last_bottom(self):
        return self.bottom[-1]

    def pos_top(self, letter) -> int:
        """1-based position of ``letter`` in the top row."""
        return self.top.index(letter) + 1

    def pos_bottom(self, letter) -> int:
        return self.bottom.index(letter) + 1

    def index(self, letter) -> int:
        return self.alphabet.index(letter)

    def monodromy(self) -> tuple:
        """``pi_b o pi_t^{-1}`` as a tuple: entry i is the bottom position of the
        i-th top letter."""
        where = {a: i + 1 for i, a in enumerate(self.bottom)}
        return tuple(where[a] for a in self.top)

    def canonical(self) -> tuple:
        """Label-free encoding used to identify class vertices."""
        return self.monodromy()

    def is_irreducible(self) -> bool:
        return reducibility_index(self.top, self.bottom) is None

    def __str__(self):
        return " ".join(map(str, self.top)) + "\n" + " ".join(map(str, self.bottom))

    @classmethod
    def from_string(cls, text: str) -> "Permutation":
        rows = [r.split() for r in text.strip().splitlines() if r.strip()]
        if len(rows) == 1 and "/" in text:
            rows = [r.split() for r in text.split("/")]
        if len(rows) != 2:
            raise NotABijection("expected two rows of letters")
        return validate_permutation(rows[0], rows[1])


def reducibility_index(top: Sequence, bottom: Sequence):
    """Smallest k < d with equal top/bottom prefix sets, or None."""
    seen_t, seen_b = set(), set()
    for k in range(1, len(top)):
        seen_t.add(top[k - 1])
        seen_b.add(bottom[k - 1])
        if seen_t == seen_b:
            return k
    return None


def validate_permutation(top_order: Sequence[Hashable], bottom_order: Sequence[Hashable],
                         alphabet=None) -> Permutation:
    top, bottom = tuple(top_order), tuple(bottom_order)
    if isinstance(top_order, str) and " " in top_order:
        top, bottom = tuple(top_order.split()), tuple(bottom_order.split())
    if len(top) < 2:
        raise NotABijection("need at least two letters")
    if len(set(top)) != len(top) or len(set(bottom)) != len(bottom) or set(top) != set(bottom):
        raise NotABijection(f"rows {top} and {bottom} are not orderings of one alphabet")
    k = reducibility_index(top, bottom)
    if k is not None:
        raise Reducible(k)
    if alphabet is not None and set(alphabet) != set(top):
        raise NotABijection("alphabet does not match the rows")
    return Permutation(top, bottom, alphabet)


def parse_permutation(spec: str) -> Permutation:
    """Accept ``"1234/4321"``, ``"A B / B A"`` or a two-line string."""
    if "/" in spec:
        t, b = spec.split("/")
        t, b = t.split() or list(t.strip()), b.split() or list(b.strip())
        if len(t) == 1 and len(t[0]) > 1:
            t, b = list(t[0]), list(b[0])
        return validate_permutation(t, b)
    return Permutation.from_string(spec)


def rauzy_move(perm: Permutation, kind: str) -> Permutation:
    """One Rauzy operation.

    Top type (the last top interval wins): the top row is kept and the last
    bottom letter is moved to just after the last top letter in the bottom
    row. Bottom type is the mirror image.
    """
    top, bottom = list(perm.top), list(perm.bottom)
    if kind == TOP:
        loser = bottom.pop()
        bottom.insert(bottom.index(perm.last_top) + 1, loser)
    elif kind == BOTTOM:
        loser = top.pop()
        top.insert(top.index(perm.last_bottom) + 1, loser)
    else:
        raise ValueError(f"kind must be 'top' or 'bottom', got {kind!r}")
    return Permutation(tuple(top), tuple(bottom), perm.alphabet)


def inverse_rauzy_move(perm: Permutation, kind: str) -> Permutation:
    """Undo :func:`rauzy_move`; raises ValueError if ``perm`` has no
    predecessor of that kind."""
    top, bottom = list(perm.top), list(perm.bottom)
    if kind == TOP:
        i = bottom.index(perm.last_top)
        if i == len(bottom) - 1:
            raise ValueError("no top-type predecessor")
        bottom.append(bottom.pop(i + 1))
    elif kind == BOTTOM:
        i = top.index(perm.last_bottom)
        if i == len(top) - 1:
            raise ValueError("no bottom-type predecessor")
        top.append(top.pop(i + 1))
    else:
        raise ValueError(f"kind must be 'top' or 'bottom', got {kind!r}")
    return Permutation(tuple(top), tuple(bottom), perm.alphabet)


@dataclass(frozen=True)
class RauzyDiagram:
    """Vertices of a Rauzy class with their top/bottom edges.

    ``vertices[i]`` is a labelled representative; ``edges`` holds
    ``(source, kind, target)`` index triples.
    """

    vertices: tuple
    edges: tuple
    labelled: bool = False

    def key(self, perm: Permutation):
        return (perm.top, perm.bottom) if self.labelled else perm.canonical()

    def find(self, perm: Permutation) -> int:
        k = self.key(perm)
        for i, v in enumerate(self.vertices):
            if self.key(v) == k:
                return i
        raise KeyError(perm)

    def successor(self, i: int, kind: str) -> int:
        for s, lab, t in self.edges:
            if s == i and lab == kind:
                return t
        raise KeyError((i, kind))

    def __len__(self):
        return len(self.vertices)

    def edge_list(self) -> str:
        return "\n".join(f"{s} {lab} {t}" for s, lab, t in self.edges)

    def to_dict(self) -> dict:
        return {
            "labelled": self.labelled,
            "vertices": [
                {"index": i, "top": list(map(str, v.top)), "bottom": list(map(str, v.bottom)),
                 "canonical": list(v.canonical())}
                for i, v in enumerate(self.vertices)
            ],
            "edges": [{"source": s, "label": lab, "target": t} for s, lab, t in self.edges],
        }


def rauzy_class(perm: Permutation, labelled: bool = False) -> RauzyDiagram:
    """Breadth-first closure of ``perm`` under both Rauzy moves."""
    key = (lambda q: (q.top, q.bottom)) if labelled else (lambda q: q.canonical())
    index = {key(perm): 0}
    vertices = [perm]
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for kind in (TOP, BOTTOM):
            q = rauzy_move(vertices[i], kind)
            k = key(q)
            if k not in index:
                index[k] = len(vertices)
                vertices.append(q)
                queue.append(index[k])
            edges.append((i, kind, index[k]))
    return RauzyDiagram(tuple(vertices), tuple(edges), labelled)


def path_matrix(diagram: RauzyDiagram, path: Sequence) -> list:
    """Ordered product ``B_{gamma_k} ... B_{gamma_1}`` along an edge path.

    ``path`` is a sequence of ``(source, kind, target)`` triples. The matrix
    is indexed by the alphabet of the source vertex's representative.
    """
    if not path:
        return _exact.identity(diagram.vertices[0].d)
    cur = diagram.vertices[path[0][0]]
    M = _exact.identity(cur.d)
    expect = path[0][0]
    for s, kind, t in path:
        if s != expect or (s, kind, t) not in diagram.edges:
            raise NonComposablePath(f"edge {(s, kind, t)} does not continue the path")
        i, j = cur.index(cur.last_top), cur.index(cur.last_bottom)
        row_to, row_from = (j, i) if kind == TOP else (i, j)
        M[row_to] = [a + b for a, b in zip(M[row_to], M[row_from])]
        cur = rauzy_move(cur, kind)
        expect = t
    return M


def rauzy_matrix(perm: Permutation, kind: str) -> list:
    """``I + E_{b t}`` for top type, ``I + E_{t b}`` for bottom type, with t, b
    the indices of the last top and bottom letters."""
    M = _exact.identity(perm.d)
    i, j = perm.index(perm.last_top), perm.index(perm.last_bottom)
    if kind == TOP:
        M[j][i] = 1
    else:
        M[i][j] = 1
    return M


def omega(perm: Permutation) -> list:
    """The intersection form, indexed by ``perm.alphabet``."""
    pt = {a: perm.pos_top(a) for a in perm.alphabet}
    pb = {a: perm.pos_bottom(a) for a in perm.alphabet}
    M = []
    for a in perm.alphabet:
        row = []
        for b in perm.alphabet:
            if pb[b] < pb[a] and pt[b] > pt[a]:
                row.append(1)
            elif pb[b] > pb[a] and pt[b] < pt[a]:
                row.append(-1)
            else:
                row.append(0)
        M.append(row)
    return M


@dataclass(frozen=True)
class SymplecticData:
    omega: tuple
    kernel_dim: int
    genus: int
    num_singularities: int
    h_lattice: tuple  # d rows, 2g columns
    kernel_basis: tuple = ()

    @property
    def h_vectors(self) -> list:
        """Columns of ``h_lattice`` as vectors."""
        return [list(c) for c in zip(*self.h_lattice)] if self.h_lattice and self.h_lattice[0] else []


def genus_and_singularities(perm: Permutation) -> SymplecticData:
    W = omega(perm)
    d = perm.d
    kernel = _exact.integer_kernel(W, d)
    kappa = len(kernel) + 1
    if (d - kappa + 1) % 2:
        raise InconsistentParity(f"d={d}, kappa={kappa}")
    g = (d - kappa + 1) // 2
    # H = image of an antisymmetric form = orthogonal complement of its kernel.
    if kernel:
        h_cols = _exact.integer_kernel(kernel, d)
    else:
        h_cols = _exact.identity(d)
    h_rows = tuple(tuple(c[i] for c in h_cols) for i in range(d))
    return SymplecticData(
        omega=tuple(map(tuple, W)),
        kernel_dim=len(kernel),
        genus=g,
        num_singularities=kappa,
        h_lattice=h_rows,
        kernel_basis=tuple(map(tuple, kernel)),
    )


def in_zipping_cone(perm: Permutation, tau: Sequence) -> bool:
    """Suspension-data test: partial sums of ``tau`` over proper prefixes of the
    top row are positive, over proper prefixes of the bottom row negative."""
    val = {a: tau[perm.index(a)] for a in perm.alphabet}
    s = 0
    for a in perm.top[:-1]:
        s += val[a]
        if s <= 0:
            return False
    s = 0
    for a in perm.bottom[:-1]:
        s += val[a]
        if s >= 0:
            return False
    return True


def standard_zipping_vector(perm: Permutation) -> list:
    """``tau_a = pi_b(a) - pi_t(a)``, which lies in the cone for every
    irreducible permutation."""
    return [perm.pos_bottom(a) - perm.pos_top(a) for a in perm.alphabet]


def roof_vector(perm: Permutation, tau: Sequence) -> list:
    """Heights ``h = -Omega tau`` of the suspension given by ``tau``."""
    W = omega(perm)
    return [-sum(w * t for w, t in zip(row, tau)) for row in W]


def irreducible_permutations(d: int):
    """All irreducible permutations with top row ``0..d-1`` (one per canonical
    encoding)."""
    from itertools import permutations

    top = tuple(range(d))
    for bottom in permutations(top):
        if reducibility_index(top, bottom) is None:
            yield Permutation(top, bottom)


def all_rauzy_classes(d: int) -> list:
    """Partition of the irreducible permutations on ``d`` letters into
    (reduced) Rauzy classes."""
    seen = set()
    classes = []
    for perm in irreducible_permutations(d):
        if perm.canonical() in seen:
            continue
        D = rauzy_class(perm)
        seen.update(v.canonical() for v in D.vertices)
        classes.append(D)
    return classes
