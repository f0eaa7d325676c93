"""Offspring probability generating functions as finite coefficient vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_DEGREE = 64
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Pgf:
    """Offspring law p_0, p_1, ..., p_D given as the coefficients of its pgf.

    The generating function is f(theta) = sum_i p_i * theta**i.  Coefficients
    must be nonnegative and sum to 1 within 1e-12; the degree is capped at 64
    so that polynomial root counting stays exact.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))
        if not self.coeffs:
            raise ValueError("pgf needs at least one coefficient")
        if len(self.coeffs) > MAX_DEGREE + 1:
            raise ValueError(f"pgf degree exceeds cap {MAX_DEGREE}")
        for c in self.coeffs:
            if not math.isfinite(c) or c < 0.0:
                raise ValueError(f"pgf coefficients must be finite and >= 0, got {c}")
        total = math.fsum(self.coeffs)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"pgf coefficients must sum to 1 within {_NORM_TOL}, got {total}")

    def __call__(self, theta: float) -> float:
        return pgf_eval(self, theta)

    @property
    def mean(self) -> float:
        return offspring_mean(self)


def pgf_eval(f: Pgf, theta: float) -> float:
    """Evaluate f(theta) by Horner's scheme for theta in [0, 1]."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"pgf argument must lie in [0, 1], got {theta}")
    acc = 0.0
    for c in reversed(f.coeffs):
        acc = acc * theta + c
    return min(acc, 1.0)


def offspring_mean(f: Pgf) -> float:
    """Mean number of offspring, f'(1)."""
    return math.fsum(i * c for i, c in enumerate(f.coeffs))


def survival_step(f: Pgf, w: float) -> float:
    """Map w = 1 - theta to 1 - f(1 - w) without cancellation.

    Iterating this from w = 1 tracks 1 - f_n(0) at full relative precision,
    which direct iteration of f_n(0) loses once the cdf saturates at 1.0.
    """
    if w >= 1.0:
        return 1.0 - f.coeffs[0]
    if w <= 0.0:
        return 0.0
    lg = math.log1p(-w)
    # i = 0 contributes nothing: 1 - (1-w)^0 = 0
    return -math.fsum(c * math.expm1(i * lg) for i, c in enumerate(f.coeffs) if i > 0 and c > 0.0)
