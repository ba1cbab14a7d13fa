"""Real-coefficient rational function algebra.

Polynomials and rational functions carry exact ``fractions.Fraction``
coefficients, so canonical reduction (gcd cancellation, monic denominator)
is exact: factors created by common-denominator arithmetic cancel without
any tolerance, and equal functions compare equal bit-for-bit.  Evaluation,
root finding and state-space realization convert to floats at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegreeZeroError,
    ImproperError,
    IndeterminateError,
    ZeroFunctionError,
)

__all__ = [
    "Polynomial",
    "RationalFunction",
    "StateSpaceModel",
    "PassivityCertificate",
    "harmonic_mean",
]


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(x)
    raise TypeError(f"unsupported coefficient type {type(x).__name__}")


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial, coefficients in ascending degree order."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable):
        cs = [_to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> float:
        """Degree; -inf for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeffs_float(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def __call__(self, s: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * s + float(c)
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    def scale(self, k) -> "Polynomial":
        k = _to_fraction(k)
        return Polynomial([c * k for c in self.coeffs])

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.degree < other.degree:
            return Polynomial([]), self
        rem = list(self.coeffs)
        dcoef = other.coeffs
        dlead = dcoef[-1]
        quot = [Fraction(0)] * (len(rem) - len(dcoef) + 1)
        for k in range(len(quot) - 1, -1, -1):
            q = rem[k + len(dcoef) - 1] / dlead
            quot[k] = q
            if q:
                for i, c in enumerate(dcoef):
                    rem[k + i] -= q * c
        return Polynomial(quot), Polynomial(rem)

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        lead = self.coeffs[-1]
        return Polynomial([c / lead for c in self.coeffs])

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs_float()})"


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact monic gcd via the Euclidean algorithm."""
    while not b.is_zero:
        _, r = divmod(a, b)
        a, b = b, r
    if a.is_zero:
        return a
    return a.monic()


def poly_roots(p: Polynomial, tol: float = 1e-8) -> list[complex]:
    """All complex roots with multiplicity, via the companion matrix.

    Each root gets up to two Newton polish steps; residuals stay below
    tol * max|coeff| for the moderate degrees used here.
    """
    if p.degree < 1:
        raise DegreeZeroError("root finding needs degree >= 1")
    cs = np.array(p.coeffs_float())
    raw = np.roots(cs[::-1])
    dcs = cs[1:] * np.arange(1, len(cs))
    roots = []
    for z in raw:
        z = complex(z)
        for _ in range(2):
            pv = complex(np.polyval(cs[::-1], z))
            dv = complex(np.polyval(dcs[::-1], z)) if len(dcs) else 0.0
            if dv == 0:
                break
            step = pv / dv
            if abs(step) > 1.0:  # diverging polish, keep companion value
                break
            z -= step
        roots.append(z)
    return roots


INFINITY = complex("inf")


@dataclass(frozen=True)
class RationalFunction:
    """Rational function num/den in reduced canonical form (monic den)."""

    num: Polynomial = field()
    den: Polynomial = field()

    def __init__(self, num, den):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise ZeroDivisionError("denominator is the zero polynomial")
        if not num.is_zero:
            g = poly_gcd(num, den)
            if g.degree >= 1:
                num, _ = divmod(num, g)
                den, _ = divmod(den, g)
        lead = den.coeffs[-1]
        if lead != 1:
            num = num.scale(1 / lead)
            den = den.scale(1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # --- predicates ---

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    # --- evaluation ---

    def __call__(self, s: complex) -> complex:
        """Evaluate at s; returns complex infinity at a pole."""
        dv = self.den(s)
        if dv == 0:
            nv = self.num(s)
            if nv == 0:
                raise IndeterminateError(
                    f"0/0 at s={s}: canonical reduction is broken"
                )
            return INFINITY
        return self.num(s) / dv

    def eval_inverse(self, s: complex) -> complex:
        """Evaluate 1/r at s without constructing the reciprocal."""
        nv = self.num(s)
        if nv == 0:
            if self.den(s) == 0:
                raise IndeterminateError(f"0/0 at s={s}")
            return INFINITY
        return self.den(s) / nv

    # --- algebra ---

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def scale(self, k) -> "RationalFunction":
        return RationalFunction(self.num.scale(k), self.den)

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero:
            raise ZeroFunctionError("reciprocal of the zero function")
        return RationalFunction(self.den, self.num)

    # --- singularities ---

    def poles(self) -> list[complex]:
        return poly_roots(self.den) if self.den.degree >= 1 else []

    def zeros(self) -> list[complex]:
        return poly_roots(self.num) if self.num.degree >= 1 else []

    # --- realization ---

    def to_state_space(self) -> "StateSpaceModel":
        """Controllable-canonical realization of a proper function."""
        if not self.is_proper:
            raise ImproperError(f"{self} is improper")
        den = self.den  # already monic
        k = int(den.degree)
        if k == 0:
            d = float(self.num.coeffs[0]) if self.num.coeffs else 0.0
            z = np.zeros((0, 0))
            return StateSpaceModel(z, np.zeros((0, 1)), np.zeros((1, 0)),
                                   np.array([[d]]))
        if self.num.degree == den.degree:
            d_frac = self.num.coeffs[-1]
            rem = self.num - den.scale(d_frac)
        else:
            d_frac = Fraction(0)
            rem = self.num
        a_coeffs = den.coeffs_float()[:-1]
        A = np.zeros((k, k))
        A[:-1, 1:] = np.eye(k - 1)
        A[-1, :] = [-c for c in a_coeffs]
        B = np.zeros((k, 1))
        B[-1, 0] = 1.0
        C = np.zeros((1, k))
        for i, c in enumerate(rem.coeffs):
            C[0, i] = float(c)
        D = np.array([[float(d_frac)]])
        return StateSpaceModel(A, B, C, D)

    # --- serialization ---

    def serialize(self) -> str:
        """Render as ``num=[...], den=[...]`` ascending coefficient arrays.

        Uses the primitive integer representation when the coefficients
        are small rationals (e.g. ``num=[1], den=[7, 3]`` for 1/(3s+7)),
        otherwise the monic-denominator float form.
        """
        denoms = [c.denominator for c in self.num.coeffs + self.den.coeffs]
        scale = 1
        for d in denoms:
            scale = scale * d // math.gcd(scale, d)
        nums = [int(c * scale) for c in self.num.coeffs]
        dens = [int(c * scale) for c in self.den.coeffs]
        content = 0
        for v in nums + dens:
            content = math.gcd(content, abs(v))
        if content > 1:
            nums = [v // content for v in nums]
            dens = [v // content for v in dens]
        if all(abs(v) < 10**9 for v in nums + dens):
            return f"num={nums}, den={dens}"
        return f"num={self.num.coeffs_float()}, den={self.den.coeffs_float()}"

    @staticmethod
    def parse(text: str) -> "RationalFunction":
        import re

        m = re.match(r"\s*num=\[(.*?)\]\s*,\s*den=\[(.*?)\]\s*$", text)
        if m is None:
            raise ValueError(f"cannot parse rational function from {text!r}")
        num = [float(x) for x in m.group(1).split(",") if x.strip()]
        den = [float(x) for x in m.group(2).split(",") if x.strip()]
        return RationalFunction(num, den)

    def __repr__(self) -> str:
        return f"RationalFunction({self.serialize()})"


def harmonic_mean(gs: Sequence[RationalFunction]) -> RationalFunction:
    """Harmonic mean ((1/n) sum g_i^{-1})^{-1} via exact arithmetic.

    For n identical inputs this returns the common g exactly.
    """
    if not gs:
        raise ValueError("harmonic_mean of an empty list")
    acc = None
    for g in gs:
        inv = g.reciprocal()  # raises ZeroFunctionError on a zero node
        acc = inv if acc is None else acc + inv
    mean_inv = acc.scale(Fraction(1, len(gs)))
    return mean_inv.reciprocal()


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """State-space realization (A, B, C, D)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (np.atleast_2d(np.asarray(m, dtype=float))
                      for m in (self.A, self.B, self.C, self.D))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if B.shape[0] != n or C.shape[1] != n:
            raise ValueError("B/C dimensions inconsistent with A")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError("D dimensions inconsistent with B/C")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def response(self, s: complex) -> np.ndarray:
        """Frequency response C(sI - A)^{-1}B + D."""
        n = self.order
        if n == 0:
            return self.D.astype(complex)
        X = np.linalg.solve(s * np.eye(n) - self.A, self.B.astype(complex))
        return self.C @ X + self.D


@dataclass(frozen=True)
class PassivityCertificate:
    """Numerical passivity certificate; the grid used is part of the record."""

    kind: str  # "positive_real" | "output_strictly_passive" | "fails"
    epsilon: float
    witness: complex | None
    grid_resolution: str


def _rhp_boundary_grid(n_freq: int = 64) -> tuple[list[complex], str]:
    omegas = np.concatenate(([0.0], np.logspace(-3, 3, n_freq)))
    pts = [complex(sig, w) for sig in (0.0, 1e-6) for w in omegas]
    desc = (f"{n_freq} log-spaced omega in [1e-3, 1e3] plus omega=0, "
            "Re(s) in {0, 1e-6}")
    return pts, desc


def passivity_check(r: RationalFunction, mode: str) -> PassivityCertificate:
    """Certify positive-realness or output strict passivity on a grid.

    positive_real: Re(r(s)) >= 0 on the sampled right-half-plane boundary,
    no poles with Re > 0, simple imaginary-axis poles allowed.
    osp: Re(r(s)) >= eps |r(s)|^2 with eps > 0; no imaginary-axis poles.
    """
    if mode not in ("positive_real", "osp"):
        raise ValueError(f"unknown passivity mode {mode!r}")
    if not r.is_proper:
        raise ImproperError("passivity check requires a proper function")
    grid, desc = _rhp_boundary_grid()

    poles = r.poles()
    for p in poles:
        if p.real > 1e-9:
            return PassivityCertificate("fails", 0.0, p, desc)
        if abs(p.real) <= 1e-9:
            if mode == "osp":
                return PassivityCertificate("fails", 0.0, p, desc)
            if sum(1 for q in poles if abs(q - p) < 1e-6) > 1:
                return PassivityCertificate("fails", 0.0, p, desc)

    eps = math.inf
    for s in grid:
        if any(abs(s - p) < 1e-9 for p in poles):
            continue
        v = r(s)
        if mode == "positive_real":
            if v.real < -1e-12:
                return PassivityCertificate("fails", 0.0, s, desc)
        else:
            mag2 = abs(v) ** 2
            if mag2 == 0:
                continue
            ratio = v.real / mag2
            if ratio < eps:
                eps = ratio
    if mode == "positive_real":
        return PassivityCertificate("positive_real", 0.0, None, desc)
    if eps > 0 and math.isfinite(eps):
        return PassivityCertificate("output_strictly_passive", eps, None, desc)
    worst = min(
        (s for s in grid if not any(abs(s - p) < 1e-9 for p in poles)),
        key=lambda s: r(s).real / max(abs(r(s)) ** 2, 1e-300),
    )
    return PassivityCertificate("fails", 0.0, worst, desc)
