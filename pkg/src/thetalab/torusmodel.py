"""Teichmueller space of the torus and a model fixed-point iteration.

A marked torus is the lattice Z + tau Z with tau in the upper half-plane.
The extremal map between two marked tori is the real-linear stretch fixing
1 and sending tau1 to tau2, and the distance is log K of that stretch, which
equals the hyperbolic distance of the half-plane (curvature -1).

The iteration engine applies a list of model maps repeatedly and reports
whether the orbit settles at a fixed point or runs off to Im tau -> infinity,
the torus picture of a short curve developing.  The model maps are
synthetic stand-ins, not computed from any 3-manifold.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from statistics import median

from .moebius import LinearStretch, MoebiusMap, apply, log_dilatation

DEFAULT_PINCH_THRESHOLD = 1e3
# tau is stored to ~1e-16 absolute, so distances below ~1e-7 carry
# relative rounding above 1e-9; the default stops well before that
DEFAULT_TOL = 1e-6
DEFAULT_MAX_N = 10_000
RATIO_FLOOR = 1e-8


@dataclass(frozen=True)
class TorusPoint:
    """Marked torus C / (Z + tau Z)."""

    tau: complex

    def __post_init__(self):
        t = complex(self.tau)
        if not t.imag > 0:
            raise ValueError(f"tau must lie in the upper half-plane, got {t}")
        object.__setattr__(self, "tau", t)

    @classmethod
    def from_pair(cls, pair) -> "TorusPoint":
        return cls(complex(pair[0], pair[1]))

    def to_list(self) -> list:
        return [self.tau.real, self.tau.imag]


def _tau(x) -> complex:
    return TorusPoint(x.tau if isinstance(x, TorusPoint) else x).tau


def affine_coeffs(tau1, tau2) -> LinearStretch:
    """The stretch L(z) = a z + b conj(z) with L(1) = 1 and L(tau1) = tau2."""
    t1, t2 = _tau(tau1), _tau(tau2)
    den = t1 - t1.conjugate()
    return LinearStretch((t2 - t1.conjugate()) / den, (t1 - t2) / den)


def teich_distance(tau1, tau2) -> float:
    """log K of the extremal stretch, i.e. 2 artanh(|b|/|a|).

    With |b|/|a| = |tau1 - tau2| / |tau2 - conj(tau1)| the formula is
    symmetric in its arguments to the last bit.
    """
    t1, t2 = _tau(tau1), _tau(tau2)
    return 2.0 * math.atanh(abs(t1 - t2) / abs(t2 - t1.conjugate()))


def _stretch_distance(tau1, tau2) -> float:
    # same quantity computed through the stretch coefficients
    return log_dilatation(affine_coeffs(tau1, tau2))


def geodesic_point(tau, target, c: float) -> complex:
    """Point on the geodesic from target to tau at distance c * d(tau, target) from target.

    Computed in the disk chart w = (tau - target)/(tau - conj(target)),
    where geodesics through target are radii and |w| = tanh(d/2).
    """
    t, s = _tau(tau), _tau(target)
    w = (t - s) / (t - s.conjugate())
    r = abs(w)
    if r == 0.0:
        return s
    w = w * (math.tanh(c * math.atanh(r)) / r)
    return (s - s.conjugate() * w) / (1.0 - w)


# -- model maps ---------------------------------------------------------------

@dataclass(frozen=True)
class ModelMap:
    """One of the synthetic maps of torus Teichmueller space.

    kinds:
      isometry              tau -> m(tau) for a real determinant-one m
      uniform-contraction   move toward ``target`` shrinking the distance by ``factor``
      cylindrical           contract toward ``target`` by 1 - eps/(1 + Im tau), then drift
                            upward by ``s``
    The cylindrical factor function is an invented stand-in for a contraction
    that weakens near the boundary of Teichmueller space.  Its default drift
    adds ``s`` to log Im tau; ``drift="additive"`` adds i s to tau instead.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.params
        if self.kind == "isometry":
            m = p["matrix"]
            if not isinstance(m, MoebiusMap):
                m = MoebiusMap(*(float(x) for row in m for x in row))
            if not m.is_real():
                raise ValueError("isometry must have real entries")
            object.__setattr__(self, "params", {**p, "matrix": m})
        elif self.kind == "uniform-contraction":
            c = float(p["factor"])
            if not 0.0 < c < 1.0:
                raise ValueError("contraction factor must lie strictly in (0, 1)")
            object.__setattr__(self, "params", {"target": _tau(_complex(p.get("target", 1j))), "factor": c})
        elif self.kind == "cylindrical":
            eps, s = float(p["eps"]), float(p["s"])
            if not 0.0 < eps < 1.0 or not s > 0.0:
                raise ValueError("cylindrical map needs eps in (0, 1) and s > 0")
            drift = p.get("drift", "log")
            if drift not in ("log", "additive"):
                raise ValueError(f"unknown drift {drift!r}")
            object.__setattr__(self, "params", {"eps": eps, "s": s, "drift": drift,
                                                "target": _tau(_complex(p.get("target", 1j)))})
        else:
            raise ValueError(f"unknown model map kind {self.kind!r}")

    @classmethod
    def isometry(cls, m) -> "ModelMap":
        return cls("isometry", {"matrix": m})

    @classmethod
    def uniform_contraction(cls, target=1j, factor: float = 0.5) -> "ModelMap":
        return cls("uniform-contraction", {"target": target, "factor": factor})

    @classmethod
    def cylindrical(cls, eps: float = 0.5, s: float = 1.0, target=1j, drift: str = "log") -> "ModelMap":
        return cls("cylindrical", {"eps": eps, "s": s, "target": target, "drift": drift})

    def factor(self, tau) -> float:
        """Local contraction factor of the map at tau."""
        if self.kind == "isometry":
            return 1.0
        if self.kind == "uniform-contraction":
            return self.params["factor"]
        return 1.0 - self.params["eps"] / (1.0 + _tau(tau).imag)

    def __call__(self, tau) -> complex:
        t = _tau(tau)
        p = self.params
        if self.kind == "isometry":
            return apply(p["matrix"], t)
        if self.kind == "uniform-contraction":
            return geodesic_point(t, p["target"], p["factor"])
        u = geodesic_point(t, p["target"], self.factor(t))
        if p["drift"] == "additive":
            return u + 1j * p["s"]
        return complex(u.real, u.imag * math.exp(p["s"]))

    def to_dict(self) -> dict:
        p = dict(self.params)
        if "matrix" in p:
            p["matrix"] = p["matrix"].to_list()
        if "target" in p:
            p["target"] = [p["target"].real, p["target"].imag]
        return {"kind": self.kind, "params": p}


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def model_map_from_dict(d: dict) -> ModelMap:
    return ModelMap(d["kind"], dict(d.get("params", {})))


def compose_maps(maps, tau) -> complex:
    """Apply the maps in list order: maps[0] first."""
    for f in maps:
        tau = f(tau)
    return tau


def _partial_images(maps, tau):
    """The points each map in the list is applied to."""
    out = []
    for f in maps:
        out.append(tau)
        tau = f(tau)
    return out


# -- iteration ------------------------------------------------------------------

@dataclass
class IterationTrace:
    points: list
    distances: list
    outcome: str  # "converged", "pinching" or "budget-exceeded"
    n: int
    fixed_point: complex | None = None
    metadata: dict = field(default_factory=dict)
    factors: list = field(default_factory=list)

    def rows(self) -> list:
        """(n, re, im, step_distance) with an empty distance on the last point."""
        out = []
        for k, t in enumerate(self.points):
            d = self.distances[k] if k < len(self.distances) else ""
            out.append((k, t.real, t.imag, d))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re", "im", "step_distance"])
        for k, x, y, d in self.rows():
            w.writerow([k, repr(x), repr(y), repr(d) if d != "" else ""])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "n": self.n,
            "fixed_point": None if self.fixed_point is None
            else [self.fixed_point.real, self.fixed_point.imag],
            "final_point": [self.points[-1].real, self.points[-1].imag],
            "step_distances": self.distances,
            "model_factors": self.factors,
            "metadata": self.metadata,
        }


def iterate(maps, y0, max_n: int = DEFAULT_MAX_N, tol: float = DEFAULT_TOL,
            pinch_threshold: float = DEFAULT_PINCH_THRESHOLD) -> IterationTrace:
    """Iterate Y_{n+1} = f(Y_n), f the composition of ``maps`` in list order.

    Stops as converged once d(Y_n, Y_{n+1}) < tol (Y_{n+1} is reported as the
    fixed point), as pinching once Im Y_n exceeds ``pinch_threshold``, and
    otherwise after ``max_n`` steps.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if isinstance(maps, ModelMap):
        maps = [maps]
    y = _tau(_complex(y0) if isinstance(y0, (list, tuple)) else y0)
    points, dists, factors = [y], [], []
    meta = {"maps": [m.to_dict() for m in maps], "tol": tol, "pinch_threshold": pinch_threshold,
            "max_n": max_n}
    if any(m.kind == "cylindrical" for m in maps):
        meta["model_note"] = "cylindrical factor 1 - eps/(1 + Im tau) is a synthetic stand-in"
    for n in range(max_n):
        if y.imag > pinch_threshold:
            return IterationTrace(points, dists, "pinching", n, None, meta, factors)
        factors.append(math.prod(f.factor(t) for f, t in zip(maps, _partial_images(maps, y))))
        y_next = compose_maps(maps, y)
        d = teich_distance(y, y_next)
        points.append(y_next)
        dists.append(d)
        if d < tol:
            return IterationTrace(points, dists, "converged", n + 1, y_next, meta, factors)
        y = y_next
    if y.imag > pinch_threshold:
        return IterationTrace(points, dists, "pinching", max_n, None, meta, factors)
    return IterationTrace(points, dists, "budget-exceeded", max_n, None, meta, factors)


@dataclass
class ContractionEstimate:
    value: float
    ratios: list
    tail: list

    def as_dict(self) -> dict:
        return {"c_hat": self.value, "ratios": self.ratios, "tail_size": len(self.tail)}


def contraction_estimate(trace: IterationTrace, floor: float = RATIO_FLOOR) -> ContractionEstimate:
    """Median of d_{n+1}/d_n over the second half of the usable steps.

    Steps whose distance falls below ``floor`` are dropped: there rounding
    in tau dominates the ratio.  All usable ratios are returned so that
    drifting factors can be inspected step by step.
    """
    d = [x for x in trace.distances if x > floor]
    if len(d) < 4:
        raise ValueError("trace too short: need at least 4 steps above the noise floor")
    ratios = [b / a for a, b in zip(d, d[1:])]
    tail = ratios[len(ratios) // 2:]
    return ContractionEstimate(float(median(tail)), ratios, tail)


# -- scenarios --------------------------------------------------------------------

@dataclass
class Scenario:
    maps: list
    y0: complex
    max_n: int = DEFAULT_MAX_N
    tol: float = DEFAULT_TOL
    pinch_threshold: float = DEFAULT_PINCH_THRESHOLD

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls([model_map_from_dict(m) for m in d["maps"]], _complex(d["y0"]),
                   int(d.get("max_n", DEFAULT_MAX_N)), float(d.get("tol", DEFAULT_TOL)),
                   float(d.get("pinch_threshold", DEFAULT_PINCH_THRESHOLD)))

    def run(self) -> IterationTrace:
        return iterate(self.maps, self.y0, self.max_n, self.tol, self.pinch_threshold)


__all__ = [
    "TorusPoint", "affine_coeffs", "teich_distance", "geodesic_point", "ModelMap",
    "model_map_from_dict", "compose_maps", "IterationTrace", "iterate", "ContractionEstimate",
    "contraction_estimate", "Scenario",
]
