"""Vertex expansion of infinite covering graphs.

Graphs are given by a neighbor oracle on string vertex ids and explored
lazily from a root.  Boundaries are always taken in the ambient infinite
graph.  For a vertex set V the boundary is the set of vertices outside V
adjacent to V, and the expansion of the graph is inf |dV|/|V| over finite V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .fuchsian import BudgetExceeded

DEFAULT_BALL_CAP = 2_000_000
DEFAULT_SUBSET_CAP = 5_000_000

AMENABLE_BELOW = 0.05
NONAMENABLE_ABOVE = 0.1
FLAT_TOLERANCE = 0.1


class CoverGraph:
    """Lazily generated graph: root id plus a deterministic neighbor oracle."""

    def __init__(self, root: str, oracle: Callable[[str], Iterable[str]], name: str = "",
                 metadata: dict | None = None):
        self.root = root
        self._oracle = oracle
        self._cache: dict = {}
        self.name = name
        self.metadata = metadata if metadata is not None else {}

    def nbrs(self, v: str) -> tuple:
        out = self._cache.get(v)
        if out is None:
            out = tuple(sorted(set(self._oracle(v)) - {v}))
            self._cache[v] = out
        return out

    def spheres(self, radius: int, cap: int = DEFAULT_BALL_CAP) -> list:
        """BFS layers S_0..S_radius around the root."""
        layers = [[self.root]]
        seen = {self.root}
        for _ in range(radius):
            nxt = []
            for v in layers[-1]:
                for u in self.nbrs(v):
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            if len(seen) > cap:
                raise BudgetExceeded(f"budget: ball exceeds {cap} vertices", partial_count=len(seen))
            layers.append(nxt)
        return layers

    def ball(self, radius: int, cap: int = DEFAULT_BALL_CAP) -> list:
        return [v for layer in self.spheres(radius, cap) for v in layer]

    def asymmetric_pairs(self, vertices: Iterable[str]) -> list:
        """Pairs (v, u) with u a neighbor of v but not vice versa."""
        return [(v, u) for v in vertices for u in self.nbrs(v) if v not in self.nbrs(u)]


def vertex_boundary(G: CoverGraph, V: Iterable[str]) -> frozenset:
    V = set(V)
    return frozenset(u for v in V for u in G.nbrs(v) if u not in V)


# -- families ------------------------------------------------------------------

def line_graph() -> CoverGraph:
    return CoverGraph("0", lambda v: (str(int(v) - 1), str(int(v) + 1)), "line")


def regular_tree(d: int) -> CoverGraph:
    """The d-regular tree as words in d involutions with no letter repeated."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    sep = "" if d <= 10 else "."

    def split(v):
        if v == "e":
            return []
        return [int(x) for x in (v.split(".") if sep else v)]

    def join(ls):
        return sep.join(map(str, ls)) if ls else "e"

    def oracle(v):
        ls = split(v)
        out = []
        for j in range(d):
            if ls and ls[-1] == j:
                out.append(join(ls[:-1]))
            else:
                out.append(join(ls + [j]))
        return out

    return CoverGraph("e", oracle, f"tree:{d}", {"degree": d})


# -- Schreier graphs --------------------------------------------------------------

def _letters(rank: int) -> list:
    """Signed letters +1, -1, +2, -2, ... for a free group of the given rank."""
    return [s * (i + 1) for i in range(rank) for s in (1, -1)]


def schreier_graph(rank: int, act: Callable[[str, int], str], root: str, name: str = "schreier") -> CoverGraph:
    """Coset graph: vertices are coset labels, edges join c and act(c, letter).

    Loops and repeated edges carry no vertex-boundary information; they are
    dropped and counted in ``metadata``.
    """
    meta = {"rank": rank, "loops_dropped": 0, "multi_edges_collapsed": 0}

    def oracle(v):
        targets = [act(v, l) for l in _letters(rank)]
        loops = sum(t == v for t in targets)
        others = [t for t in targets if t != v]
        meta["loops_dropped"] += loops
        meta["multi_edges_collapsed"] += len(others) - len(set(others))
        return others

    return CoverGraph(root, oracle, name, meta)


def hom_to_lattice(images: Sequence[Sequence[int]]):
    """Coset action for the kernel of F_k -> Z^m, generator i -> images[i]."""
    images = [tuple(int(x) for x in im) for im in images]
    m = len(images[0]) if images else 0
    if any(len(im) != m for im in images):
        raise ValueError("all images must have the same dimension")

    def act(label, letter):
        v = [int(x) for x in label.split(",")] if m else []
        im = images[abs(letter) - 1]
        s = 1 if letter > 0 else -1
        return ",".join(str(a + s * b) for a, b in zip(v, im))

    return act, ",".join("0" for _ in range(m))


def hom_to_cyclic(images: Sequence[int], n: int):
    """Coset action for the kernel of F_k -> Z/n."""
    def act(label, letter):
        s = 1 if letter > 0 else -1
        return str((int(label) + s * images[abs(letter) - 1]) % n)
    return act, "0"


def free_group_action(rank: int):
    """Right multiplication on reduced words: cosets of the trivial subgroup."""
    names = "abcdefghijklmnopqrstuvwxyz"[:rank]

    def sym(letter):
        c = names[abs(letter) - 1]
        return c if letter > 0 else c.upper()

    def act(label, letter):
        w = "" if label == "e" else label
        s = sym(letter)
        if w and w[-1] == s.swapcase():
            w = w[:-1]
        else:
            w = w + s
        return w or "e"

    return act, "e"


def cayley_graph(rank: int) -> CoverGraph:
    act, root = free_group_action(rank)
    return schreier_graph(rank, act, root, f"cayley:{rank}")


def schreier_from_hom(images, modulus: int | None = None) -> CoverGraph:
    """Schreier graph of ker(F_k -> Z^m) or, with ``modulus``, of ker(F_k -> Z/n).

    ``images[i]`` is the image of generator i: an integer vector, or an
    integer when a modulus is given.
    """
    if modulus is None:
        act, root = hom_to_lattice(images)
        return schreier_graph(len(images), act, root, f"schreier:Z^{len(images[0])}")
    act, root = hom_to_cyclic([int(x) if not isinstance(x, (list, tuple)) else int(x[0]) for x in images],
                              modulus)
    return schreier_graph(len(images), act, root, f"schreier:Z/{modulus}")


def graph_family(family: str, degree: int = 3, rank: int = 2, hom: dict | None = None) -> CoverGraph:
    """Graph by CLI family name: line, tree, cayley, schreier."""
    if family == "line":
        return line_graph()
    if family == "tree":
        return regular_tree(degree)
    if family == "cayley":
        return cayley_graph(rank)
    if family == "schreier":
        if not hom or "images" not in hom:
            raise ValueError('schreier family needs a hom spec {"images": [...]}')
        return schreier_from_hom(hom["images"], hom.get("modulus"))
    raise ValueError(f"unknown graph family {family!r}")


# -- Folner profiles --------------------------------------------------------------

@dataclass
class FolnerProfile:
    ball_sizes: list
    boundary_sizes: list
    graph: str = ""

    @property
    def ratios(self) -> list:
        return [Fraction(b, v) for b, v in zip(self.boundary_sizes, self.ball_sizes)]

    def __len__(self):
        return len(self.ball_sizes)

    def rows(self) -> list:
        return [(n, v, b, float(Fraction(b, v)))
                for n, (v, b) in enumerate(zip(self.ball_sizes, self.boundary_sizes))]


def folner_profile(G: CoverGraph, R: int, cap: int = DEFAULT_BALL_CAP) -> FolnerProfile:
    """|dB_n| / |B_n| for balls about the root, n = 0..R (exact)."""
    layers = G.spheres(R + 1, cap)
    sizes = np.cumsum([len(l) for l in layers]).tolist()
    balls, bnd = [], []
    for n in range(R + 1):
        balls.append(int(sizes[n]))
        # in a connected graph the boundary of B_n is the sphere S_{n+1}
        bnd.append(len(layers[n + 1]))
    return FolnerProfile(balls, bnd, G.name)


# -- exact small-scale expansion ---------------------------------------------------

@dataclass
class ExpansionResult:
    ratio: Fraction
    witness: frozenset
    subsets_searched: int
    metadata: dict = field(default_factory=dict)


def connected_subsets(G: CoverGraph, vertices: Sequence[str], max_size: int) -> Iterable[frozenset]:
    """Every connected induced subset of ``vertices`` with at most max_size elements, once.

    Uses the ESU scheme: a subset is generated only from its lowest-index
    vertex, extending through exclusive neighbors.
    """
    index = {v: i for i, v in enumerate(vertices)}
    adj = [[index[u] for u in G.nbrs(v) if u in index] for v in vertices]

    def extend(S, nbhd, ext, v):
        yield S
        if len(S) == max_size:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new = [u for u in adj[w] if u > v and u not in S and u not in nbhd]
            yield from extend(S | {w}, nbhd | set(adj[w]) | {w}, ext + new, v)

    for v in range(len(vertices)):
        start = frozenset([v])
        ext = [u for u in adj[v] if u > v]
        for S in extend(start, set(adj[v]) | {v}, ext, v):
            yield frozenset(vertices[i] for i in S)


def expansion_exact(G: CoverGraph, ball_radius: int, max_subset_size: int,
                    cap: int = DEFAULT_SUBSET_CAP) -> ExpansionResult:
    """Minimum of |dV|/|V| over connected V in the ball with |V| <= max_subset_size.

    The boundary is taken in the ambient graph, so the value is an upper
    bound for the expansion.
    """
    ball = G.ball(ball_radius)
    best, witness, count = None, frozenset(), 0
    for V in connected_subsets(G, ball, max_subset_size):
        count += 1
        if count > cap:
            raise BudgetExceeded(
                f"budget: more than {cap} connected subsets",
                partial_count=count - 1,
                partial=ExpansionResult(best, witness, count - 1, {"partial": True}),
            )
        r = Fraction(len(vertex_boundary(G, V)), len(V))
        if best is None or r < best or (r == best and sorted(V) < sorted(witness)):
            best, witness = r, V
    meta = {"connected_only": True, "ball_radius": ball_radius,
            "max_subset_size": max_subset_size, "ball_size": len(ball)}
    return ExpansionResult(best, witness, count, meta)


# -- amenability evidence -------------------------------------------------------------

@dataclass
class AmenabilityVerdict:
    label: str
    limit: float
    slope: float
    tail: list
    window: int

    def as_dict(self) -> dict:
        return {"verdict": self.label, "limit_estimate": self.limit, "slope": self.slope,
                "tail": self.tail, "window": self.window}


def classify_amenability(profile, window: int | None = None) -> AmenabilityVerdict:
    """Fit the tail of a Folner profile and label it as evidence only.

    The tail is fitted as ratio = limit + slope * x with x = 1/|B_n| when
    ball sizes are known (exact for trees and lines) and x = 1/(n+1)
    otherwise.
    """
    if isinstance(profile, FolnerProfile):
        ys = [float(r) for r in profile.ratios]
        xs_all = [1.0 / s for s in profile.ball_sizes]
    else:
        ys = [float(r) for r in profile]
        xs_all = [1.0 / (n + 1) for n in range(len(ys))]
    if len(ys) < 4:
        raise ValueError("profile needs at least 4 entries")
    w = window or max(4, math.ceil(len(ys) / 2))
    w = min(w, len(ys))
    ys_t, xs_t = ys[-w:], xs_all[-w:]
    if max(xs_t) - min(xs_t) > 0:
        slope, limit = np.polyfit(xs_t, ys_t, 1)
    else:
        slope, limit = 0.0, float(np.mean(ys_t))
    decreasing = all(b <= a for a, b in zip(ys_t, ys_t[1:])) and ys_t[-1] < ys_t[0]
    flat = (max(ys_t) - min(ys_t)) <= FLAT_TOLERANCE * max(abs(limit), 1e-12)
    if limit < AMENABLE_BELOW and decreasing:
        label = "amenable-evidence"
    elif limit > NONAMENABLE_ABOVE and flat:
        label = "nonamenable-evidence"
    else:
        label = "inconclusive"
    return AmenabilityVerdict(label, float(limit), float(slope), ys_t, w)
