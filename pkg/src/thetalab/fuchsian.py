"""Free Fuchsian groups on the unit disk.

Groups are given by generator lists.  Elements are indexed by freely reduced
words, enumerated depth-first in lexicographic letter order
``g1, g1^-1, g2, g2^-1, ...`` so that every word is preceded by its prefix.
Fundamental domains are Ford domains: the common exterior of a finite list of
isometric circles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .moebius import (
    MoebiusMap,
    classify,
    compose,
    inverse,
    to_disk,
    translation_length,
)

DEFAULT_WORD_CAP = 10**6


class BudgetExceeded(RuntimeError):
    """A finite enumeration would exceed its configured cap."""

    def __init__(self, message, partial_count=0, partial=None):
        super().__init__(message)
        self.partial_count = partial_count
        self.partial = partial


def letter_name(names, letter: int) -> str:
    s = names[abs(letter) - 1]
    return s if letter > 0 else s.upper() if s.islower() and len(s) == 1 else s + "^-1"


@dataclass(frozen=True)
class GroupWord:
    letters: tuple
    matrix: MoebiusMap

    def __len__(self):
        return len(self.letters)

    def label(self, names) -> str:
        return "".join(letter_name(names, l) for l in self.letters) or "e"


@dataclass(frozen=True)
class FuchsianGroup:
    """Generators act on the unit disk.

    ``domain_words`` lists the elements whose isometric circles bound the
    stored Ford domain; ``None`` means the generators and their inverses.
    """

    generators: tuple
    names: tuple = ()
    kind: str = "schottky"
    domain_words: tuple | None = None
    description: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.names:
            object.__setattr__(self, "names", tuple("abcdefghijklmnopqrstuvwxyz"[: len(self.generators)]))
        if len(self.names) != len(self.generators):
            raise ValueError("one name per generator")

    @property
    def rank(self) -> int:
        return len(self.generators)

    def letter_maps(self) -> list:
        """Maps for letter indices 0..2k-1, ordered g1, g1^-1, g2, g2^-1, ..."""
        out = []
        for g in self.generators:
            out += [g, inverse(g)]
        return out

    def word_matrix(self, letters) -> MoebiusMap:
        m = MoebiusMap(1, 0, 0, 1)
        for l in letters:
            g = self.generators[abs(l) - 1]
            m = compose(m, g if l > 0 else inverse(g))
        return m

    def domain_maps(self) -> list:
        if self.domain_words is None:
            return self.letter_maps()
        return [self.word_matrix(w) for w in self.domain_words]

    def conjugated(self, h: MoebiusMap) -> "FuchsianGroup":
        """The group h G h^-1 (generators, names and domain words carried over)."""
        hi = inverse(h)
        gens = tuple(compose(compose(h, g), hi) for g in self.generators)
        return FuchsianGroup(gens, self.names, self.kind, self.domain_words,
                             self.description, dict(self.meta))

    def to_spec(self) -> dict:
        return {
            "model": "disk",
            "generators": [g.to_list() for g in self.generators],
            "kind": "schottky" if self.kind == "schottky" else "preset:" + self.kind,
        }


# -- word enumeration ------------------------------------------------------

def word_count(rank: int, N: int) -> int:
    """Number of freely reduced words of length <= N in a free group of the given rank."""
    if rank == 0:
        return 1
    if rank == 1:
        return 1 + 2 * N
    return 1 + rank * ((2 * rank - 1) ** N - 1) // (rank - 1)


def _letter_of(index: int) -> int:
    return index // 2 + 1 if index % 2 == 0 else -(index // 2 + 1)


@dataclass
class WordTable:
    """Flat arrays describing the words of length <= N in enumeration order.

    ``mats[i]`` holds (a, b, c, d) of word i, ``length[i]`` its length,
    ``parent[i]`` the index of the word with its last letter removed and
    ``last[i]`` that letter's index (-1 for the identity).
    """

    mats: np.ndarray
    length: np.ndarray
    parent: np.ndarray
    last: np.ndarray
    rank: int
    N: int

    def __len__(self):
        return len(self.length)

    def letters(self, i: int) -> tuple:
        out = []
        while self.last[i] >= 0:
            out.append(_letter_of(int(self.last[i])))
            i = int(self.parent[i])
        return tuple(reversed(out))


def word_table(G: FuchsianGroup, N: int, cap: int = DEFAULT_WORD_CAP) -> WordTable:
    if N < 0:
        raise ValueError("N must be >= 0")
    k = G.rank
    total = word_count(k, N)
    if total > cap:
        raise BudgetExceeded(
            f"budget: {total} words of length <= {N} exceed cap {cap}",
            partial_count=cap,
        )
    L = np.array([[m.a, m.b, m.c, m.d] for m in G.letter_maps()], dtype=complex).reshape(-1, 4)
    mats = np.empty((total, 4), dtype=complex)
    length = np.zeros(total, dtype=np.int64)
    parent = np.full(total, -1, dtype=np.int64)
    last = np.full(total, -1, dtype=np.int64)
    mats[0] = (1, 0, 0, 1)
    n = 1
    # iterative depth-first preorder; children in increasing letter index
    stack = [(0, j) for j in reversed(range(2 * k))] if N > 0 else []
    while stack:
        p, j = stack.pop()
        a, b, c, d = mats[p]
        A, B, C, D = L[j]
        mats[n] = (a * A + b * C, a * B + b * D, c * A + d * C, c * B + d * D)
        length[n] = length[p] + 1
        parent[n] = p
        last[n] = j
        if length[n] < N:
            inv = j ^ 1
            for jj in reversed(range(2 * k)):
                if jj != inv:
                    stack.append((n, jj))
        n += 1
    assert n == total
    return WordTable(mats, length, parent, last, k, N)


def iter_shells(G: FuchsianGroup, N: int | None = None, cap: int = DEFAULT_WORD_CAP):
    """Yield the (W, 4) matrices of the words of length exactly n, n = 0, 1, ...

    Within a shell the words come in lexicographic order, the same order as
    in ``word_table``.  Shells are built on demand, so a consumer that stops
    early never pays for deeper ones.  Stops after shell N, or raises
    ``BudgetExceeded`` before a shell that would take the total past ``cap``.
    """
    k = G.rank
    L = np.array([[m.a, m.b, m.c, m.d] for m in G.letter_maps()], dtype=complex).reshape(-1, 4)
    mats = np.array([[1, 0, 0, 1]], dtype=complex)
    last = np.array([-1])
    total, n = 1, 0
    yield mats
    while k > 0 and (N is None or n < N):
        size = len(mats) * (2 * k - 1)
        if total + size > cap:
            raise BudgetExceeded(f"budget: shell {n + 1} would exceed cap {cap} words",
                                 partial_count=total)
        a, b, c, d = mats.T
        # children ordered parent-major, letter-minor, skipping the inverse letter
        kids = np.empty((len(mats), 2 * k, 4), dtype=complex)
        for j in range(2 * k):
            A, B, C, D = L[j]
            kids[:, j] = np.stack([a * A + b * C, a * B + b * D, c * A + d * C, c * B + d * D], axis=1)
        letters = np.broadcast_to(np.arange(2 * k), (len(mats), 2 * k))
        keep = letters != (last[:, None] ^ 1)
        mats = kids[keep]
        last = letters[keep]
        total += size
        n += 1
        yield mats


def enumerate_words(G: FuchsianGroup, N: int, cap: int = DEFAULT_WORD_CAP) -> list:
    """All freely reduced words of length <= N, identity first, in lexicographic order."""
    t = word_table(G, N, cap)
    return [GroupWord(t.letters(i), MoebiusMap(*t.mats[i])) for i in range(len(t))]


# -- isometric circles and fundamental domains ----------------------------

def isometric_circle(m: MoebiusMap):
    """Center -d/c and radius 1/|c| of the circle where |m'| = 1."""
    if abs(m.c) < 1e-14:
        raise ValueError("no isometric circle: c = 0")
    return -m.d / m.c, 1.0 / abs(m.c)


@dataclass
class SchottkyReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def validate_schottky(G: FuchsianGroup, tol: float = 1e-9) -> SchottkyReport:
    """Check that the 2k isometric circles are disjoint and meet the unit circle orthogonally."""
    bad = []
    circles = []
    for i, g in enumerate(G.generators):
        try:
            kind = classify(g)
        except ValueError as exc:
            kind = str(exc)
        if kind != "hyperbolic":
            bad.append(f"generator {G.names[i]} is {kind}, not hyperbolic")
    for j, m in enumerate(G.letter_maps()):
        label = letter_name(G.names, _letter_of(j))
        try:
            c, r = isometric_circle(m)
        except ValueError:
            bad.append(f"{label} has no isometric circle")
            continue
        if abs(abs(c) ** 2 - (1.0 + r * r)) > tol * (1.0 + r * r):
            bad.append(f"isometric circle of {label} is not orthogonal to the unit circle")
        circles.append((label, c, r))
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            li, ci, ri = circles[i]
            lj, cj, rj = circles[j]
            dist = abs(ci - cj)
            if dist < tol * max(1.0, ri):
                bad.append(f"isometric circles of {li} and {lj} coincide")
            elif dist <= ri + rj:
                bad.append(f"isometric circles of {li} and {lj} intersect")
    return SchottkyReport(not bad, bad)


def domain_circles(G: FuchsianGroup):
    """Arrays (centers, radii) of the circles bounding the stored Ford domain."""
    cs = [isometric_circle(m) for m in G.domain_maps()]
    return (np.array([c for c, _ in cs], dtype=complex),
            np.array([r for _, r in cs], dtype=float))


def in_fundamental_domain(G: FuchsianGroup, z):
    """True where |m'(z)| <= 1 for every domain map, i.e. outside all circles."""
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=bool)
    for m in G.domain_maps():
        out &= np.abs(m.c * z + m.d) >= 1.0
    return bool(out) if out.ndim == 0 else out


def distance_to_boundary(G: FuchsianGroup, z):
    """Euclidean distance from z to the nearest domain circle."""
    z = np.asarray(z, dtype=complex)
    centers, radii = domain_circles(G)
    if len(radii) == 0:
        return np.full(z.shape, np.inf)
    d = np.abs(np.abs(z[..., None] - centers) - radii)
    return d.min(axis=-1)


def systole_upper_bound(G: FuchsianGroup, N: int, cap: int = DEFAULT_WORD_CAP) -> float:
    """Shortest translation length over hyperbolic words of length <= N.

    This bounds the length of the shortest closed geodesic from above.
    """
    t = word_table(G, N, cap)
    tr = np.abs((t.mats[:, 0] + t.mats[:, 3]).real)
    hyp = tr > 2.0 + 1e-9
    if not hyp.any():
        raise ValueError(f"no hyperbolic word of length <= {N}")
    return float(2.0 * np.arccosh(tr[hyp].min() / 2.0))


# -- presets ---------------------------------------------------------------

def pairing_map(theta_in: float, theta_out: float, radius: float) -> MoebiusMap:
    """Disk map sending the outside of the circle at angle theta_in onto the
    inside of the circle at angle theta_out.

    Both circles have Euclidean radius ``radius`` and meet the unit circle
    orthogonally; they are the isometric circles of the map and its inverse.
    """
    beta_abs = 1.0 / radius
    alpha_abs = math.sqrt(1.0 + beta_abs**2)
    arg_b = (theta_out + theta_in - math.pi) / 2.0
    arg_a = theta_out - arg_b
    alpha = alpha_abs * complex(math.cos(arg_a), math.sin(arg_a))
    beta = beta_abs * complex(math.cos(arg_b), math.sin(arg_b))
    return MoebiusMap(alpha, beta, beta.conjugate(), alpha.conjugate())


def pairing_radius(length: float, separation: float) -> float:
    """Circle radius giving translation length ``length`` for circles whose
    centers are ``separation`` radians apart."""
    q = (math.cosh(length / 2.0) / math.sin(separation / 2.0)) ** 2
    if q <= 1.0:
        raise ValueError("length too short for this separation")
    return 1.0 / math.sqrt(q - 1.0)


def trivial_group() -> FuchsianGroup:
    return FuchsianGroup((), (), "schottky", description="trivial group, F is the whole disk")


def cyclic_group(scale: float = 2.0) -> FuchsianGroup:
    """<z -> scale^2 z> on the half-plane, transported to the disk."""
    g = to_disk(MoebiusMap(scale, 0, 0, 1.0 / scale))
    return FuchsianGroup((g,), ("a",), "schottky", description=f"cyclic group <diag({scale}, 1/{scale})>")


def schottky_group(radius: float, separation: float, rank: int = 2, rotation: float = 0.0) -> FuchsianGroup:
    """Generator j pairs the circles at angles phi_j -/+ separation/2,
    with phi_j = rotation + 2 pi j / rank."""
    gens = []
    for j in range(rank):
        phi = rotation + 2.0 * math.pi * j / rank
        gens.append(pairing_map(phi - separation / 2.0, phi + separation / 2.0, radius))
    return FuchsianGroup(
        tuple(gens), kind="schottky",
        description=f"rank-{rank} Schottky group, circle radius {radius:.6g}, separation {separation:.6g}",
        meta={"radius": radius, "separation": separation, "rank": rank},
    )


def schottky_from_pairs(radius: float, pairs) -> FuchsianGroup:
    """One generator per (theta_in, theta_out) pair of circle angles."""
    gens = tuple(pairing_map(a, b, radius) for a, b in pairs)
    return FuchsianGroup(
        gens, kind="schottky",
        description=f"Schottky group, circle radius {radius:.6g}, circle pairs {list(pairs)}",
        meta={"radius": radius, "pairs": [list(p) for p in pairs]},
    )


TREND_RADIUS = 0.2
TREND_PARTNER_HALF_ANGLE = 1.2


def schottky_by_length(length: float, radius: float = TREND_RADIUS,
                       partner_half_angle: float = TREND_PARTNER_HALF_ANGLE) -> FuchsianGroup:
    """Rank-2 Schottky group in which the first generator has the given length.

    All four isometric circles share one radius.  The first generator pairs
    the circles at angles -s/2 and s/2, with the separation s solved from the
    length; the second pairs the circles at pi -/+ partner_half_angle and
    stays fixed across the family, so only the short geodesic changes.
    """
    x = math.cosh(length / 2.0) * radius / math.sqrt(1.0 + radius * radius)
    if x >= 1.0:
        raise ValueError("length too large for this radius")
    s = 2.0 * math.asin(x)
    w = partner_half_angle
    G = schottky_from_pairs(radius, ((-s / 2.0, s / 2.0), (math.pi - w, math.pi + w)))
    G.meta["target_length"] = length
    G.meta["separation"] = s
    return G


PUNCTURED_TORUS_HALFPLANE = ([[1, 1], [1, 2]], [[1, -1], [-1, 2]])
# elements whose isometric circles bound the Ford domain centred at 0
PUNCTURED_TORUS_DOMAIN = ((1,), (-1,), (2,), (-2,), (1, 2), (2, 1), (-1, -2), (-2, -1))


def punctured_torus() -> FuchsianGroup:
    """Once-punctured torus group (genus 1, one cusp); the commutator is parabolic."""
    gens = tuple(to_disk(MoebiusMap.from_matrix(m)) for m in PUNCTURED_TORUS_HALFPLANE)
    return FuchsianGroup(
        gens, ("a", "b"), "punctured-torus", PUNCTURED_TORUS_DOMAIN,
        description="punctured torus, g=1 n=1, generators [[1,1],[1,2]], [[1,-1],[-1,2]] on the half-plane",
    )


WIDE_SCHOTTKY_RADIUS = 0.25

PRESETS = {
    "trivial": trivial_group,
    "cyclic": cyclic_group,
    "schottky-wide": lambda: schottky_from_pairs(
        WIDE_SCHOTTKY_RADIUS, ((math.pi, 0.0), (1.5 * math.pi, 0.5 * math.pi))),
    "schottky-L4": lambda: schottky_by_length(4.0),
    "schottky-L2": lambda: schottky_by_length(2.0),
    "schottky-L1": lambda: schottky_by_length(1.0),
    "punctured-torus": punctured_torus,
}

NONELEMENTARY_PRESETS = ("schottky-wide", "schottky-L4", "schottky-L2", "schottky-L1", "punctured-torus")


def preset(name: str) -> FuchsianGroup:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown group preset {name!r}; known: {sorted(PRESETS)}") from None


def _parse_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def group_from_spec(spec: dict) -> FuchsianGroup:
    """Build a group from the JSON group-spec format.

    ``{"model": "disk"|"halfplane", "generators": [[[a,b],[c,d]], ...],
    "kind": "schottky"|"preset:punctured-torus"}``
    """
    kind = spec.get("kind", "schottky")
    if kind.startswith("preset:"):
        return preset(kind.split(":", 1)[1])
    if kind != "schottky":
        raise ValueError(f"unknown group kind {kind!r}")
    model = spec.get("model", "disk")
    if model not in ("disk", "halfplane"):
        raise ValueError(f"unknown model {model!r}")
    gens = []
    for m in spec["generators"]:
        g = MoebiusMap(*(_parse_entry(x) for row in m for x in row))
        gens.append(to_disk(g) if model == "halfplane" else g)
    return FuchsianGroup(tuple(gens), kind="schottky")


def load_group(ref: str) -> FuchsianGroup:
    """A preset name, ``preset:<name>``, or a path to a group-spec JSON file."""
    name = ref.split(":", 1)[1] if ref.startswith("preset:") else ref
    if name in PRESETS:
        return preset(name)
    path = Path(ref)
    if path.exists():
        return group_from_spec(json.loads(path.read_text()))
    raise ValueError(f"unknown group {ref!r}: not a preset and not a file")
