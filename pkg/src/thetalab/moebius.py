"""Moebius transformations of the hyperbolic plane and real-linear stretches.

A `MoebiusMap` is a 2x2 matrix of determinant one, identified with its
negative.  Matrices acting on the upper half-plane have real entries; the
same class also holds their conjugates by the Cayley map, which act on the
unit disk and have entries of the form [[alpha, beta], [conj(beta), conj(alpha)]].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

PARABOLIC_TOL = 1e-9
IDENTITY_TOL = 1e-12


class PoleError(ValueError):
    """Raised when a point is sent to infinity."""


def _canonical_sign(entries):
    for x in entries:
        if abs(x) > 0.0:
            if x.real < 0 or (x.real == 0 and x.imag < 0):
                return tuple(-e for e in entries)
            return entries
    raise ValueError("zero matrix")


def _clean(x: complex) -> complex:
    # drop imaginary dust so real matrices stay real after normalization
    if abs(x.imag) <= 1e-15 * max(1.0, abs(x.real)):
        return complex(x.real, 0.0)
    return x


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b) / (c z + d), normalized to ad - bc = 1 and canonical sign."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if abs(det) == 0.0:
            raise ValueError("singular matrix")
        if det.imag == 0.0 and det.real < 0 and all(x.imag == 0 for x in (a, b, c, d)):
            raise ValueError("real matrix with negative determinant reverses orientation")
        s = cmath.sqrt(det)
        entries = _canonical_sign(tuple(_clean(x / s) for x in (a, b, c, d)))
        for name, x in zip("abcd", entries):
            object.__setattr__(self, name, x)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(abs(x.imag) <= tol for x in (self.a, self.b, self.c, self.d))

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __call__(self, z):
        return apply(self, z)

    def to_list(self):
        """[[a, b], [c, d]] with real entries where possible, [re, im] pairs otherwise."""
        def enc(x):
            return x.real if x.imag == 0 else [x.real, x.imag]
        return [[enc(self.a), enc(self.b)], [enc(self.c), enc(self.d)]]


IDENTITY = MoebiusMap(1, 0, 0, 1)

# Cayley map z -> (z - i)/(z + i), upper half-plane onto the unit disk
CAYLEY = MoebiusMap(1, -1j, 1, 1j)


def identity() -> MoebiusMap:
    return IDENTITY


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """Matrix product m1 * m2, i.e. the map z -> m1(m2(z))."""
    return MoebiusMap(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def inverse(m: MoebiusMap) -> MoebiusMap:
    return MoebiusMap(m.d, -m.b, -m.c, m.a)


def conjugate(m: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """g m g^-1."""
    return compose(compose(g, m), inverse(g))


def to_disk(m: MoebiusMap) -> MoebiusMap:
    """Transport a half-plane map to the disk via the Cayley map."""
    return conjugate(m, CAYLEY)


def to_halfplane(m: MoebiusMap) -> MoebiusMap:
    return conjugate(m, inverse(CAYLEY))


def _pole_tol(m: MoebiusMap) -> float:
    return 1e-14 * max(abs(m.c), abs(m.d), 1.0)


def apply(m: MoebiusMap, z):
    """Evaluate (a z + b)/(c z + d); works on scalars and numpy arrays."""
    den = m.c * z + m.d
    if np.any(np.abs(den) <= _pole_tol(m)):
        raise PoleError("point maps to infinity")
    w = (m.a * z + m.b) / den
    if np.ndim(w) == 0:
        return complex(w)
    return w


def derivative(m: MoebiusMap, z):
    """m'(z) = 1/(c z + d)^2 for a determinant-one matrix."""
    den = m.c * z + m.d
    if np.any(np.abs(den) <= _pole_tol(m)):
        raise PoleError("derivative has a pole at this point")
    out = 1.0 / den**2
    if np.ndim(out) == 0:
        return complex(out)
    return out


def is_identity(m: MoebiusMap, tol: float = IDENTITY_TOL) -> bool:
    return (abs(m.a - 1) <= tol and abs(m.b) <= tol
            and abs(m.c) <= tol and abs(m.d - 1) <= tol)


def classify(m: MoebiusMap) -> str:
    """One of 'identity', 'elliptic', 'parabolic', 'hyperbolic', by |trace|."""
    tr = m.trace
    if abs(tr.imag) > 1e-9 * max(1.0, abs(tr)):
        raise ValueError("non-real trace: not conjugate into PSL(2,R)")
    if is_identity(m):
        return "identity"
    t = abs(tr.real)
    if abs(t - 2.0) < PARABOLIC_TOL:
        return "parabolic"
    return "elliptic" if t < 2.0 else "hyperbolic"


def translation_length(m: MoebiusMap) -> float:
    """Hyperbolic translation length 2 arccosh(|tr|/2) along the axis of m."""
    if classify(m) != "hyperbolic":
        raise ValueError("no geodesic length: map is not hyperbolic")
    return 2.0 * math.acosh(abs(m.trace.real) / 2.0)


@dataclass(frozen=True)
class LinearStretch:
    """The real-linear map z -> a z + b conj(z), with |a| > |b|."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if abs(self.a) <= abs(self.b):
            raise ValueError("degenerate / orientation-reversing stretch: need |a| > |b|")

    def __call__(self, z):
        return self.a * z + self.b * np.conj(z)

    def real_matrix(self) -> np.ndarray:
        """The 2x2 real matrix of the map acting on (x, y)."""
        a, b = self.a, self.b
        return np.array([[a.real + b.real, -a.imag + b.imag],
                         [a.imag + b.imag, a.real - b.real]])


def linear_dilatation(s: LinearStretch) -> float:
    """Ratio of major to minor axis of the image of the unit circle."""
    A, B = abs(s.a), abs(s.b)
    return (A + B) / (A - B)


def log_dilatation(s: LinearStretch) -> float:
    """log K computed as 2 artanh(|b|/|a|), accurate for nearly conformal maps."""
    return 2.0 * math.atanh(abs(s.b) / abs(s.a))
