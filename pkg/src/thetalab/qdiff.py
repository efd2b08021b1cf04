"""Quadratic differentials on the disk and truncated Poincare series.

A quadratic differential is a polynomial phi(z) dz^2.  Its pullback by a
group element w is phi(w z) w'(z)^2, and the truncated Poincare series is

    Theta_N phi = sum over words |w| <= N of w^* phi.

Integrals over the quotient surface are computed over the stored Ford
domain F with a midpoint rule in polar coordinates.  Every norm comes with
an error estimate: the change against the half-resolution grid plus the
mass of cells straddling the boundary of F.  Truncation of the series is
diagnosed by shell masses M_n = sum over |w| = n of the integral over F of
|w^* phi|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .fuchsian import (
    DEFAULT_WORD_CAP,
    BudgetExceeded,
    FuchsianGroup,
    GroupWord,
    in_fundamental_domain,
    iter_shells,
    word_count,
)
from .moebius import MoebiusMap, apply, derivative

DEFAULT_MAX_DEGREE = 6
SHELL_STOP = 1e-3


def fsum_c(x) -> complex:
    x = np.asarray(x)
    return complex(math.fsum(x.real.ravel()), math.fsum(x.imag.ravel()))


@dataclass(frozen=True)
class QuadraticDifferential:
    """phi(z) = sum_k c_k z^k."""

    coefficients: tuple
    max_degree: int = field(default=DEFAULT_MAX_DEGREE, compare=False)

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coefficients)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        if not cs:
            cs = (0j,)
        if len(cs) - 1 > self.max_degree:
            raise ValueError(f"degree {len(cs) - 1} exceeds max degree {self.max_degree}")
        object.__setattr__(self, "coefficients", cs)

    @classmethod
    def monomial(cls, k: int, scale: complex = 1.0, max_degree: int = DEFAULT_MAX_DEGREE):
        return cls((0,) * k + (scale,), max_degree=max(max_degree, k))

    @classmethod
    def parse(cls, text: str) -> "QuadraticDifferential":
        """Accepts ``1``, ``z``, ``z^k`` or a comma separated list of coefficients."""
        t = text.strip().replace(" ", "")
        if t == "z":
            return cls.monomial(1)
        if t.startswith("z^") or t.startswith("z**"):
            return cls.monomial(int(t.split("^")[-1].split("*")[-1]))
        return cls(tuple(complex(x.replace("i", "j")) for x in t.split(",")))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def padded(self, D: int) -> np.ndarray:
        out = np.zeros(D + 1, dtype=complex)
        out[: len(self.coefficients)] = self.coefficients
        return out

    def __call__(self, z):
        v = np.polyval(np.array(self.coefficients[::-1]), z)
        return complex(v) if np.ndim(v) == 0 else v

    def scaled(self, lam: complex) -> "QuadraticDifferential":
        return QuadraticDifferential(tuple(lam * c for c in self.coefficients), self.max_degree)

    def __add__(self, other: "QuadraticDifferential") -> "QuadraticDifferential":
        D = max(self.degree, other.degree)
        return QuadraticDifferential(tuple(self.padded(D) + other.padded(D)),
                                     max(self.max_degree, other.max_degree))

    def annulus_bound(self, rho: float) -> float:
        """Upper bound for the integral of |phi| over rho < |z| < 1."""
        return sum(abs(c) for c in self.coefficients) * math.pi * (1.0 - rho * rho)

    def to_list(self):
        return [[c.real, c.imag] for c in self.coefficients]


@dataclass(frozen=True)
class PulledBackDifferential:
    """w^* phi, evaluated lazily as phi(w z) w'(z)^2."""

    base: object
    word: object

    @property
    def matrix(self) -> MoebiusMap:
        return self.word.matrix if isinstance(self.word, GroupWord) else self.word

    def __call__(self, z):
        m = self.matrix
        return self.base(apply(m, z)) * derivative(m, z) ** 2


def pullback(word, phi) -> PulledBackDifferential:
    return PulledBackDifferential(phi, word)


# -- quadrature ------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Polar midpoint rule on the disk.

    ``n_r`` uniform rings cover 0 <= r <= rho; one extra ring covers
    rho <= r <= 1 so no part of the disk is dropped.  Cells are ordered
    row-major (ring, then angle).
    """

    n_r: int = 512
    n_theta: int = 512
    rho: float = 1.0 - 1e-4

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError("need 0 < rho < 1")
        if self.n_r < 2 or self.n_theta < 2:
            raise ValueError("grid too small")

    @cached_property
    def radial_edges(self) -> np.ndarray:
        return np.concatenate([np.linspace(0.0, self.rho, self.n_r + 1), [1.0]])

    @cached_property
    def angular_edges(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.n_theta + 1)

    @cached_property
    def _cells(self):
        re = self.radial_edges
        te = self.angular_edges
        rm = 0.5 * (re[1:] + re[:-1])
        tm = 0.5 * (te[1:] + te[:-1])
        # exact cell areas: (r1^2 - r0^2)/2 * dtheta
        ring_area = 0.5 * (re[1:] ** 2 - re[:-1] ** 2) * (2.0 * math.pi / self.n_theta)
        R, T = np.meshgrid(rm, tm, indexing="ij")
        z = (R * np.exp(1j * T)).ravel()
        area = np.repeat(ring_area, self.n_theta)
        return z, area

    @property
    def centers(self) -> np.ndarray:
        return self._cells[0]

    @property
    def areas(self) -> np.ndarray:
        return self._cells[1]

    @property
    def size(self) -> int:
        return (self.n_r + 1) * self.n_theta

    def corners(self) -> np.ndarray:
        """Corner points, shape (n_r + 2, n_theta + 1)."""
        R, T = np.meshgrid(self.radial_edges, self.angular_edges, indexing="ij")
        return R * np.exp(1j * T)

    def coarse(self) -> "QuadratureGrid":
        return QuadratureGrid(max(2, self.n_r // 2), max(2, self.n_theta // 2), self.rho)

    def integrate(self, values) -> float:
        return math.fsum(np.asarray(values, dtype=float) * self.areas)


@dataclass
class DomainCells:
    """Cells of a grid whose centers lie in the fundamental domain."""

    grid: QuadratureGrid
    inside: np.ndarray
    straddle: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.grid.centers[self.inside]

    @property
    def areas(self) -> np.ndarray:
        return self.grid.areas[self.inside]

    @property
    def straddle_inside(self) -> np.ndarray:
        """Straddle flags restricted to the inside cells."""
        return self.straddle[self.inside]


_DOMAIN_CACHE: dict = {}


def domain_cells(G: FuchsianGroup, grid: QuadratureGrid) -> DomainCells:
    key = (id(G), G.generators, G.domain_words, grid)
    hit = _DOMAIN_CACHE.get(key)
    if hit is not None:
        return hit
    inside = in_fundamental_domain(G, grid.centers)
    c = in_fundamental_domain(G, grid.corners())
    quad = np.stack([c[:-1, :-1], c[1:, :-1], c[:-1, 1:], c[1:, 1:]]).reshape(4, -1)
    straddle = ~(quad == inside).all(axis=0)
    out = DomainCells(grid, inside, straddle)
    if len(_DOMAIN_CACHE) > 32:
        _DOMAIN_CACHE.clear()
    _DOMAIN_CACHE[key] = out
    return out


@dataclass
class NormEstimate:
    value: float
    error: float
    refinement_delta: float = 0.0
    straddle_mass: float = 0.0
    annulus_mass: float = 0.0
    annulus_bound: float = 0.0


def _disk_integral(phi, grid):
    return grid.integrate(np.abs(phi(grid.centers)))


def l1_norm_disk(phi, grid: QuadratureGrid | None = None) -> NormEstimate:
    """Integral of |phi| over the disk with a refinement error estimate."""
    grid = grid or QuadratureGrid()
    fine = _disk_integral(phi, grid)
    coarse = _disk_integral(phi, grid.coarse())
    ring = slice(grid.n_r * grid.n_theta, None)
    annulus = math.fsum(np.abs(phi(grid.centers[ring])) * grid.areas[ring])
    bound = phi.annulus_bound(grid.rho) if hasattr(phi, "annulus_bound") else float("nan")
    delta = abs(fine - coarse)
    return NormEstimate(fine, delta, delta, 0.0, annulus, bound)


# -- truncated Poincare series ----------------------------------------------

def _shell_tables(G: FuchsianGroup, N: int, cap: int):
    """Split-real word matrices for each shell |w| = n, n = 0..N, built lazily.

    Shells come in order of length and words within a shell in lexicographic
    order; this is the fixed summation order of every series.
    """
    return (_kernels.split_mats(m) for m in iter_shells(G, N, cap))


class _Accumulator:
    """Running sums of pullbacks over a fixed point set, one shell at a time.

    With ``coef`` given, sums a single differential; otherwise all monomials
    z^0..z^D.  Results are bit-identical regardless of thread count.
    """

    def __init__(self, points: np.ndarray, coef: np.ndarray | None = None, D: int = 0):
        self.zr = np.ascontiguousarray(points.real)
        self.zi = np.ascontiguousarray(points.imag)
        self.single = coef is not None
        shape = (points.size,) if self.single else (D + 1, points.size)
        self.D = D
        if self.single:
            self.coef = np.ascontiguousarray(np.stack([coef.real, coef.imag]))
        self.theta_r = np.zeros(shape)
        self.theta_i = np.zeros(shape)
        self.comp_r = np.zeros(shape)
        self.comp_i = np.zeros(shape)

    def add_shell(self, mats: np.ndarray) -> np.ndarray:
        """Add one shell of words; return that shell's per-point |w^* phi| sums."""
        mass = np.zeros(self.theta_r.shape)
        if len(mats) and self.zr.size:
            if self.single:
                _kernels.pullback_sums(self.zr, self.zi, mats, self.coef, self.theta_r,
                                       self.theta_i, self.comp_r, self.comp_i, mass)
            else:
                _kernels.monomial_sums(self.zr, self.zi, mats, self.D, self.theta_r,
                                       self.theta_i, self.comp_r, self.comp_i, mass)
        return mass

    @property
    def theta(self) -> np.ndarray:
        return self.theta_r + 1j * self.theta_i


def evaluate_series(G: FuchsianGroup, phi: QuadraticDifferential, N: int, z,
                    cap: int = DEFAULT_WORD_CAP):
    z = np.asarray(z, dtype=complex)
    acc = _Accumulator(np.atleast_1d(z).ravel(), phi.padded(phi.degree))
    for mats in _shell_tables(G, N, cap):
        acc.add_shell(mats)
    out = acc.theta.reshape(z.shape)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ThetaSeries:
    """Theta_N phi as an evaluable differential."""

    group: FuchsianGroup
    phi: QuadraticDifferential
    N: int
    cap: int = DEFAULT_WORD_CAP

    def __call__(self, z):
        return evaluate_series(self.group, self.phi, self.N, z, self.cap)

    @property
    def word_count(self) -> int:
        return word_count(self.group.rank, self.N)


def theta_truncated(G: FuchsianGroup, phi: QuadraticDifferential, N: int,
                    cap: int = DEFAULT_WORD_CAP) -> ThetaSeries:
    if word_count(G.rank, N) > cap:
        raise BudgetExceeded(f"budget: {word_count(G.rank, N)} words exceed cap {cap}", partial_count=cap)
    return ThetaSeries(G, phi, N, cap)


def _straddle_mass(cells: DomainCells, values: np.ndarray) -> float:
    s = cells.straddle_inside
    return math.fsum(np.abs(values[s]) * cells.areas[s])


def _domain_integral(cells: DomainCells, values: np.ndarray) -> float:
    return math.fsum(np.abs(values) * cells.areas)


def quotient_norm(G: FuchsianGroup, psi, grid: QuadratureGrid | None = None) -> NormEstimate:
    """Integral of |psi| over the fundamental domain.

    The error is the refinement delta against the half-resolution grid plus
    the mass of included cells that straddle the boundary of F.
    """
    grid = grid or QuadratureGrid()
    fine = domain_cells(G, grid)
    coarse = domain_cells(G, grid.coarse())
    vf = np.asarray(psi(fine.points)) if fine.points.size else np.zeros(0)
    vc = np.asarray(psi(coarse.points)) if coarse.points.size else np.zeros(0)
    value = _domain_integral(fine, vf)
    delta = abs(value - _domain_integral(coarse, vc))
    straddle = _straddle_mass(fine, vf)
    return NormEstimate(value, delta + straddle, delta, straddle)


@dataclass
class Unfolding:
    """Shell-by-shell sums of a single differential over F.

    ``shell_masses[n]`` is M_n and ``quotient_norms[n]`` the integral of
    |Theta_n phi| over F; ``theta`` holds Theta_N phi at the F cells
    of the fine grid, ``theta_coarse`` at those of the half-resolution grid.
    """

    N: int
    shell_masses: list
    shell_masses_coarse: list
    stop_reason: str
    theta: np.ndarray
    theta_coarse: np.ndarray
    cells: DomainCells
    cells_coarse: DomainCells
    l1: NormEstimate
    quotient_norms: list = field(default_factory=list)
    straddle_masses: list = field(default_factory=list)

    @property
    def unfolded_masses(self) -> list:
        """Cumulative unfolded mass for N' = 0..N."""
        out, acc = [], []
        for m in self.shell_masses:
            acc.append(m)
            out.append(math.fsum(acc))
        return out

    @property
    def unfolded_mass(self) -> float:
        return self.unfolded_masses[-1]

    @property
    def unfolded_error(self) -> float:
        """Refinement delta of the unfolded mass plus its straddle-cell mass."""
        delta = abs(math.fsum(self.shell_masses) - math.fsum(self.shell_masses_coarse))
        return delta + math.fsum(self.straddle_masses)


def unfold(G: FuchsianGroup, phi: QuadraticDifferential, N: int | None = None,
           grid: QuadratureGrid | None = None, cap: int = DEFAULT_WORD_CAP,
           stop: float = SHELL_STOP) -> Unfolding:
    """Accumulate Theta_N phi and shell masses over F.

    With ``N=None`` the depth grows until M_N < stop * ||phi|| (reason
    ``"shell"``) or the next shell would exceed ``cap`` words (``"budget"``).
    """
    grid = grid or QuadratureGrid()
    l1 = l1_norm_disk(phi, grid)
    fine = domain_cells(G, grid)
    coarse = domain_cells(G, grid.coarse())
    coef = phi.padded(phi.degree)
    acc_f = _Accumulator(fine.points, coef)
    acc_c = _Accumulator(coarse.points, coef)
    n_max = N if N is not None else _max_depth(G.rank, cap)
    if N is not None and word_count(G.rank, N) > cap:
        raise BudgetExceeded(f"budget: {word_count(G.rank, N)} words exceed cap {cap}",
                             partial_count=cap)
    tables = _shell_tables(G, n_max, cap)
    shells, shells_c, quotients, straddles = [], [], [], []
    reason = "fixed" if N is not None else "budget"
    for n, mats in enumerate(tables):
        m = acc_f.add_shell(mats)
        shells.append(_domain_integral(fine, m))
        straddles.append(_straddle_mass(fine, m))
        shells_c.append(_domain_integral(coarse, acc_c.add_shell(mats)))
        quotients.append(_domain_integral(fine, acc_f.theta))
        if N is None and (shells[-1] < stop * l1.value or G.rank == 0):
            reason = "shell"
            break
    return Unfolding(len(shells) - 1, shells, shells_c, reason, acc_f.theta, acc_c.theta,
                     fine, coarse, l1, quotients, straddles)


def _max_depth(rank: int, cap: int) -> int:
    if rank == 0:
        return 0
    n, total, shell = 0, 1, 1
    while True:
        shell = 2 * rank if n == 0 else shell * (2 * rank - 1)
        if total + shell > cap:
            return n
        total += shell
        n += 1


def unfolded_mass(G: FuchsianGroup, phi: QuadraticDifferential, N: int,
                  grid: QuadratureGrid | None = None, cap: int = DEFAULT_WORD_CAP) -> float:
    """The integral over F of sum_{|w| <= N} |w^* phi|."""
    return unfold(G, phi, N, grid, cap).unfolded_mass


@dataclass
class ThetaRatio:
    ratio: float
    error_quadrature: float
    error_truncation: float
    N: int
    stop_reason: str
    shell_masses: list
    quotient_norm: float
    unfolded_mass: float
    disk_norm: float

    @property
    def error(self) -> float:
        return self.error_quadrature + self.error_truncation

    def as_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "error_quadrature": self.error_quadrature,
            "error_truncation": self.error_truncation,
            "N": self.N,
            "stop_reason": self.stop_reason,
            "shell_masses": list(self.shell_masses),
            "quotient_norm": self.quotient_norm,
            "unfolded_mass": self.unfolded_mass,
            "disk_norm": self.disk_norm,
        }


def _ratio_from_unfolding(u: Unfolding) -> ThetaRatio:
    l1 = u.l1.value
    q = _domain_integral(u.cells, u.theta)
    qc = _domain_integral(u.cells_coarse, u.theta_coarse)
    straddle = _straddle_mass(u.cells, u.theta)
    ratio = q / l1
    eq = (abs(q - qc) + straddle) / l1 + ratio * u.l1.error / l1
    et = u.shell_masses[-1] / l1 if u.N > 0 else 0.0
    return ThetaRatio(ratio, eq, et, u.N, u.stop_reason, list(u.shell_masses), q,
                      u.unfolded_mass, l1)


def theta_ratio(G: FuchsianGroup, phi: QuadraticDifferential, N: int | None = None,
                grid: QuadratureGrid | None = None, cap: int = DEFAULT_WORD_CAP) -> ThetaRatio:
    """||Theta_N phi||_F / ||phi||_disk with quadrature and truncation error bars."""
    if phi.is_zero():
        raise ValueError("phi = 0: ratio undefined")
    return _ratio_from_unfolding(unfold(G, phi, N, grid, cap))


# -- norm search --------------------------------------------------------------

@dataclass
class MonomialImages:
    """Theta_N z^k (k = 0..D) at F cells, and z^k at all cells, for one grid."""

    grid: QuadratureGrid
    cells: DomainCells
    theta: np.ndarray
    disk: np.ndarray
    shell_masses: np.ndarray

    def ratio(self, c: np.ndarray) -> float:
        num = np.abs(c @ self.theta) @ self.cells.areas
        den = np.abs(c @ self.disk) @ self.grid.areas
        return float(num / den)

    def exact_parts(self, c: np.ndarray):
        """(quotient integral, disk integral, straddle mass) with compensated sums."""
        vals = c @ self.theta
        return (_domain_integral(self.cells, vals),
                self.grid.integrate(np.abs(c @ self.disk)),
                _straddle_mass(self.cells, vals))


def monomial_images(G: FuchsianGroup, D: int, N: int, grid: QuadratureGrid,
                    cap: int = DEFAULT_WORD_CAP) -> MonomialImages:
    cells = domain_cells(G, grid)
    acc = _Accumulator(cells.points, None, D)
    shells = []
    for mats in _shell_tables(G, N, cap):
        m = acc.add_shell(mats)
        shells.append([_domain_integral(cells, m[k]) for k in range(D + 1)])
    disk = np.vander(grid.centers, D + 1, increasing=True).T.copy()
    return MonomialImages(grid, cells, acc.theta, disk, np.array(shells).T)


def choose_depth(G: FuchsianGroup, D: int, grid: QuadratureGrid, cap: int = DEFAULT_WORD_CAP,
                 stop: float = SHELL_STOP):
    """Smallest N whose last shell is below ``stop`` relative mass for every monomial."""
    if G.rank == 0:
        return 0, "shell"
    cells = domain_cells(G, grid)
    norms = np.array([2.0 * math.pi / (k + 2) for k in range(D + 1)])
    acc = _Accumulator(cells.points, None, D)
    n_max = _max_depth(G.rank, cap)
    for n, mats in enumerate(_shell_tables(G, n_max, cap)):
        m = acc.add_shell(mats)
        rel = max(_domain_integral(cells, m[k]) / norms[k] for k in range(D + 1))
        if n > 0 and rel < stop:
            return n, "shell"
    return n_max, "budget"


@dataclass
class ThetaNormEstimate:
    lower_bound: float
    witness: QuadraticDifferential
    error_quadrature: float
    error_truncation: float
    N: int
    stop_reason: str
    restarts: int
    history: list

    @property
    def error(self) -> float:
        return self.error_quadrature + self.error_truncation

    def as_dict(self) -> dict:
        return {
            "ratio": self.lower_bound,
            "error_quadrature": self.error_quadrature,
            "error_truncation": self.error_truncation,
            "N": self.N,
            "stop_reason": self.stop_reason,
            "restarts": self.restarts,
            "witness_coefficients": self.witness.to_list(),
            "best_so_far": list(self.history),
        }


def _refine(f, c: np.ndarray, steps=(0.5, 0.15, 0.05)) -> tuple:
    """Coordinate-wise hill climbing over real and imaginary parts."""
    best = f(c)
    for h in steps:
        scale = h * np.max(np.abs(c))
        for k in range(c.size):
            for unit in (1.0, 1j):
                for sgn in (1.0, -1.0):
                    trial = c.copy()
                    trial[k] += sgn * scale * unit
                    v = f(trial)
                    if v > best:
                        best, c = v, trial
    return c, best


def _polish(f, c: np.ndarray) -> np.ndarray:
    """Powell search over the real and imaginary parts, started from c."""
    n = c.size
    res = minimize(lambda x: -f(x[:n] + 1j * x[n:]), np.concatenate([c.real, c.imag]),
                   method="Powell", options={"xtol": 1e-6, "ftol": 1e-10, "maxiter": 20000})
    x = res.x
    out = x[:n] + 1j * x[n:]
    return out if f(out) >= f(c) else c


def estimate_theta_norm(G: FuchsianGroup, max_degree: int = DEFAULT_MAX_DEGREE, budget: int = 200,
                        N: int | None = None, grid: QuadratureGrid | None = None, seed: int = 0,
                        cap: int = DEFAULT_WORD_CAP, search_grid: QuadratureGrid | None = None
                        ) -> ThetaNormEstimate:
    """Lower estimate of ||Theta|| by maximizing the theta ratio over polynomials.

    Each restart draws a random coefficient vector from a seeded generator,
    refines it coordinate-wise on a coarse search grid, and is then scored on
    the full grid.  The best full-grid score so far is returned, so the
    result never decreases as ``budget`` grows.
    """
    grid = grid or QuadratureGrid()
    search_grid = search_grid or QuadratureGrid(max(8, grid.n_r // 4), max(8, grid.n_theta // 4), grid.rho)
    D = max_degree
    if N is None:
        N, reason = choose_depth(G, D, search_grid, cap)
    else:
        reason = "fixed"
    full = monomial_images(G, D, N, grid, cap)
    search = monomial_images(G, D, N, search_grid, cap)
    rng = np.random.default_rng(seed)
    best_c, best, history = None, -1.0, []
    search_best = -1.0
    for _ in range(budget):
        c = rng.standard_normal(D + 1) + 1j * rng.standard_normal(D + 1)
        c, v_search = _refine(search.ratio, c)
        candidates = [c]
        if v_search > search_best:
            # a new record on the search grid earns a full local polish
            search_best = v_search
            candidates.append(_polish(search.ratio, c))
        for c in candidates:
            c = c / np.max(np.abs(c))
            q, l1, _ = full.exact_parts(c)
            v = q / l1
            if v > best:
                best, best_c = v, c
        history.append(best)
    if best_c is None:
        best_c = np.zeros(D + 1, dtype=complex)
        best_c[0] = 1.0
    # error bars for the winning witness
    coarse = monomial_images(G, D, N, grid.coarse(), cap)
    q, l1, straddle = full.exact_parts(best_c)
    qc, l1c, _ = coarse.exact_parts(best_c)
    ratio = q / l1
    eq = (abs(q - qc) + straddle) / l1 + ratio * abs(l1 - l1c) / l1
    # |sum c_k w^* z^k| <= sum |c_k| |w^* z^k| bounds the witness's last shell
    et = float(np.abs(best_c) @ full.shell_masses[:, -1]) / l1 if N > 0 else 0.0
    witness = QuadraticDifferential(tuple(best_c), max_degree=D)
    return ThetaNormEstimate(ratio, witness, eq, et, N, reason, budget, history)
