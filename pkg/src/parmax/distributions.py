"""Lifetime distributions with evaluable cdf, quantile, mean, and integrated tail.

Every variant describes a nonnegative random lifetime with a finite mean.  The
integrated tail ``integrated_tail(T) >= int_T^inf (1 - F(s)) ds`` is exact for
the closed-form families and a certified upper bound for the branching-process
variant; it is what the lifetime integrator uses to truncate safely.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .pgf import Pgf, offspring_mean, survival_step

_PROB_TOL = 1e-12


def _check_u(u: float) -> None:
    if not 0.0 <= u < 1.0:
        raise ValueError(f"quantile argument must lie in [0, 1), got {u}")


class LifetimeDistribution(ABC):
    """A nonnegative random lifetime.

    ``cdf`` is nondecreasing, right-continuous, 0 for s < 0, and maps into
    [0, 1].  ``quantile(u)`` is the generalized inverse inf{t : F(t) > u}.
    """

    @abstractmethod
    def cdf(self, s: float) -> float: ...

    @abstractmethod
    def quantile(self, u: float) -> float: ...

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def integrated_tail(self, T: float) -> float: ...

    @abstractmethod
    def breakpoints(self, horizon: float) -> list[float]:
        """Discontinuities and non-smooth points of the cdf in [0, horizon]."""

    @property
    @abstractmethod
    def is_step(self) -> bool:
        """True when the cdf is piecewise constant (pure jump distribution)."""

    def cdf_array(self, s: np.ndarray) -> np.ndarray:
        return np.array([self.cdf(float(x)) for x in np.asarray(s, dtype=float).ravel()]).reshape(np.shape(s))

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        return np.array([self.quantile(float(x)) for x in np.asarray(u, dtype=float).ravel()]).reshape(np.shape(u))


@dataclass(frozen=True)
class Uniform(LifetimeDistribution):
    """Uniform lifetime on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("uniform endpoints must be finite")
        if self.a < 0.0 or self.b <= self.a:
            raise ValueError(f"uniform needs 0 <= a < b, got a={self.a}, b={self.b}")

    def cdf(self, s: float) -> float:
        if s < self.a:
            return 0.0
        if s >= self.b:
            return 1.0
        return (s - self.a) / (self.b - self.a)

    def quantile(self, u: float) -> float:
        _check_u(u)
        return self.a + u * (self.b - self.a)

    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    def integrated_tail(self, T: float) -> float:
        if T <= self.a:
            return (self.a - T) + 0.5 * (self.b - self.a)
        if T < self.b:
            return (self.b - T) ** 2 / (2.0 * (self.b - self.a))
        return 0.0

    def breakpoints(self, horizon: float) -> list[float]:
        return [x for x in (self.a, self.b) if x <= horizon]

    @property
    def is_step(self) -> bool:
        return False

    def cdf_array(self, s):
        s = np.asarray(s, dtype=float)
        return np.clip((s - self.a) / (self.b - self.a), 0.0, 1.0)

    def quantile_array(self, u):
        return self.a + np.asarray(u, dtype=float) * (self.b - self.a)


@dataclass(frozen=True)
class Exponential(LifetimeDistribution):
    """Exponential lifetime with the given failure rate."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError(f"exponential rate must be finite and > 0, got {self.rate}")

    def cdf(self, s: float) -> float:
        if s <= 0.0:
            return 0.0
        return -math.expm1(-self.rate * s)

    def quantile(self, u: float) -> float:
        _check_u(u)
        return -math.log1p(-u) / self.rate

    def mean(self) -> float:
        return 1.0 / self.rate

    def integrated_tail(self, T: float) -> float:
        return math.exp(-self.rate * max(T, 0.0)) / self.rate

    def breakpoints(self, horizon: float) -> list[float]:
        return [0.0] if horizon >= 0.0 else []

    @property
    def is_step(self) -> bool:
        return False

    def cdf_array(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s > 0.0, -np.expm1(-self.rate * np.maximum(s, 0.0)), 0.0)

    def quantile_array(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate


@dataclass(frozen=True)
class PointMass(LifetimeDistribution):
    """Deterministic lifetime equal to c."""

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0.0):
            raise ValueError(f"point mass location must be finite and >= 0, got {self.c}")

    def cdf(self, s: float) -> float:
        return 1.0 if s >= self.c else 0.0

    def quantile(self, u: float) -> float:
        _check_u(u)
        return self.c

    def mean(self) -> float:
        return self.c

    def integrated_tail(self, T: float) -> float:
        return max(self.c - T, 0.0)

    def breakpoints(self, horizon: float) -> list[float]:
        return [self.c] if self.c <= horizon else []

    @property
    def is_step(self) -> bool:
        return True

    def cdf_array(self, s):
        return np.where(np.asarray(s, dtype=float) >= self.c, 1.0, 0.0)

    def quantile_array(self, u):
        return np.full(np.shape(u), self.c, dtype=float)


@dataclass(frozen=True)
class DiscreteLattice(LifetimeDistribution):
    """Lifetime supported on finitely many points with the given masses."""

    values: tuple[float, ...]
    probs: tuple[float, ...]
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, values, probs):
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("values and probs must be nonempty and of equal length")
        if any(v < 0.0 or not math.isfinite(v) for v in self.values):
            raise ValueError("lattice values must be finite and >= 0")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("lattice values must be strictly increasing")
        if any(p < 0.0 for p in self.probs):
            raise ValueError("lattice probabilities must be >= 0")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"lattice probabilities must sum to 1 within {_PROB_TOL}, got {total}")
        object.__setattr__(self, "_v", np.array(self.values))
        object.__setattr__(self, "_cum", np.minimum(np.cumsum(self.probs), 1.0))

    def cdf(self, s: float) -> float:
        i = int(np.searchsorted(self._v, s, side="right"))
        return 0.0 if i == 0 else float(self._cum[i - 1])

    def quantile(self, u: float) -> float:
        _check_u(u)
        i = int(np.searchsorted(self._cum, u, side="right"))
        return float(self._v[min(i, len(self.values) - 1)])

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def integrated_tail(self, T: float) -> float:
        return math.fsum(p * (v - T) for v, p in zip(self.values, self.probs) if v > T)

    def breakpoints(self, horizon: float) -> list[float]:
        return [v for v in self.values if v <= horizon]

    @property
    def is_step(self) -> bool:
        return True

    def cdf_array(self, s):
        idx = np.searchsorted(self._v, np.asarray(s, dtype=float), side="right")
        padded = np.concatenate([[0.0], self._cum])
        return padded[idx]

    def quantile_array(self, u):
        idx = np.searchsorted(self._cum, np.asarray(u, dtype=float), side="right")
        return self._v[np.minimum(idx, len(self.values) - 1)]


@dataclass(frozen=True)
class Tabulated(LifetimeDistribution):
    """Empirical cdf given at knots, stepped (right-continuous) or linearly interpolated."""

    knots: tuple[tuple[float, float], ...]
    mode: str = "step"
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _F: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, knots, mode="step"):
        object.__setattr__(self, "knots", tuple((float(t), float(v)) for t, v in knots))
        object.__setattr__(self, "mode", mode)
        if mode not in ("step", "linear"):
            raise ValueError(f"mode must be 'step' or 'linear', got {mode!r}")
        if not self.knots:
            raise ValueError("tabulated cdf needs at least one knot")
        ts = [t for t, _ in self.knots]
        vs = [v for _, v in self.knots]
        if any(t < 0.0 or not math.isfinite(t) for t in ts):
            raise ValueError("knot times must be finite and >= 0")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in vs) or any(b < a for a, b in zip(vs, vs[1:])):
            raise ValueError("knot cdf values must be nondecreasing within [0, 1]")
        if abs(vs[-1] - 1.0) > _PROB_TOL:
            raise ValueError("final knot must reach cdf 1 (finite mean requires a closed tail)")
        object.__setattr__(self, "_t", np.array(ts))
        object.__setattr__(self, "_F", np.array(vs))

    def cdf(self, s: float) -> float:
        t, F = self._t, self._F
        if s < t[0]:
            return 0.0
        if s >= t[-1]:
            return 1.0
        if self.mode == "step":
            i = int(np.searchsorted(t, s, side="right")) - 1
            return float(F[i])
        return float(np.interp(s, t, F))

    def quantile(self, u: float) -> float:
        _check_u(u)
        t, F = self._t, self._F
        i = int(np.searchsorted(F, u, side="right"))
        i = min(i, len(t) - 1)
        if self.mode == "step" or i == 0:
            return float(t[i])
        lo, hi = F[i - 1], F[i]
        if hi <= lo:
            return float(t[i])
        return float(t[i - 1] + (u - lo) / (hi - lo) * (t[i] - t[i - 1]))

    def mean(self) -> float:
        return self.integrated_tail(0.0)

    def integrated_tail(self, T: float) -> float:
        t, F = self._t, self._F
        if T >= t[-1]:
            return 0.0
        total = 0.0
        if T < t[0]:
            total += t[0] - T
            T = float(t[0])
        for i in range(len(t) - 1):
            a, b = float(t[i]), float(t[i + 1])
            if b <= T:
                continue
            lo = max(a, T)
            if self.mode == "step":
                total += (b - lo) * (1.0 - float(F[i]))
            else:
                fa = float(np.interp(lo, t, F))
                fb = float(F[i + 1])
                total += (b - lo) * (1.0 - 0.5 * (fa + fb))
        return total

    def breakpoints(self, horizon: float) -> list[float]:
        return [float(x) for x in self._t if x <= horizon]

    @property
    def is_step(self) -> bool:
        return self.mode == "step"

    def cdf_array(self, s):
        s = np.asarray(s, dtype=float)
        if self.mode == "step":
            idx = np.searchsorted(self._t, s, side="right")
            padded = np.concatenate([[0.0], self._F])
            return padded[idx]
        out = np.interp(s, self._t, self._F)
        return np.where(s < self._t[0], 0.0, out)


_BGW_TAIL_FLOOR = 1e-18
_BGW_ITER_CAP = 2_000_000


@dataclass(frozen=True)
class BgwExtinction(LifetimeDistribution):
    """Extinction time of a single-ancestor subcritical branching process.

    The cdf at s is the ⌊s⌋-th functional iterate of the offspring pgf at 0,
    so the support is the positive integers.  Iterates and their survival
    tails are precomputed at construction; the offspring mean must be below
    1 - 1e-12 or the expected lifetime would be infinite.
    """

    pgf: Pgf
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _suffix: np.ndarray = field(init=False, repr=False, compare=False)
    _mu: float = field(init=False, repr=False, compare=False)

    def __init__(self, pgf):
        if not isinstance(pgf, Pgf):
            pgf = Pgf(pgf)
        object.__setattr__(self, "pgf", pgf)
        mu = offspring_mean(pgf)
        if mu >= 1.0 - 1e-12:
            raise ValueError(f"offspring mean {mu} is not subcritical; extinction time has infinite mean")
        object.__setattr__(self, "_mu", mu)
        ts = [0.0]
        ws = [1.0]
        t, w = 0.0, 1.0
        while w >= _BGW_TAIL_FLOOR:
            if len(ws) > _BGW_ITER_CAP:
                raise ValueError("offspring mean too close to 1; extinction tail does not converge in the iteration cap")
            t = pgf(t)
            w = survival_step(pgf, w)
            ts.append(t)
            ws.append(w)
        warr = np.array(ws)
        # remainder after the stored tail, certified by 1 - f(t) <= mu * (1 - t)
        remainder = warr[-1] * mu / (1.0 - mu)
        suffix = np.concatenate([np.cumsum(warr[::-1])[::-1] + remainder, [remainder]])
        object.__setattr__(self, "_t", np.array(ts))
        object.__setattr__(self, "_w", warr)
        object.__setattr__(self, "_suffix", suffix)

    def cdf(self, s: float) -> float:
        if s < 0.0:
            return 0.0
        n = int(math.floor(s))
        if n >= len(self._t):
            return 1.0
        return float(self._t[n])

    def quantile(self, u: float) -> float:
        _check_u(u)
        n = int(np.searchsorted(self._t, u, side="right"))
        return float(min(n, len(self._t)))

    def mean(self) -> float:
        return float(self._suffix[0])

    def integrated_tail(self, T: float) -> float:
        T = max(T, 0.0)
        n = int(math.floor(T))
        if n >= len(self._w):
            return float(self._suffix[-1])
        return float((n + 1 - T) * self._w[n] + self._suffix[n + 1])

    def breakpoints(self, horizon: float) -> list[float]:
        top = min(int(math.floor(horizon)), len(self._t) - 1)
        return [float(k) for k in range(top + 1)] if horizon >= 0.0 else []

    @property
    def is_step(self) -> bool:
        return True

    def cdf_array(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.floor(s).astype(int), -1, len(self._t) - 1)
        padded = np.concatenate([[0.0], self._t, [1.0]])
        out = padded[idx + 1]
        return np.where(np.floor(s) >= len(self._t), 1.0, out)

    def quantile_array(self, u):
        idx = np.searchsorted(self._t, np.asarray(u, dtype=float), side="right")
        return np.minimum(idx, len(self._t)).astype(float)


def _sudbury_lattice(level: int, first: int, odd: bool) -> DiscreteLattice:
    if not 1 <= level <= 9:
        raise ValueError(f"sudbury level must lie in [1, 9] (double-precision tails), got {level}")
    # tail over the j-th support point: 2^-(first * 2^(j-1)), doubly exponential
    tails = [math.ldexp(1.0, -first * (1 << (j - 1))) for j in range(1, level + 1)]
    probs = [1.0 - tails[0]]
    probs += [tails[j] - tails[j + 1] for j in range(level - 1)]
    probs.append(tails[-1])
    base = 1 if odd else 0
    values = [float(base + 2 * j) for j in range(level + 1)]
    return DiscreteLattice(values, probs)


class _SudburyBase(LifetimeDistribution):
    """Delegating wrapper around the precomputed crossing-staircase lattice."""

    _lat: DiscreteLattice

    def cdf(self, s):
        return self._lat.cdf(s)

    def quantile(self, u):
        return self._lat.quantile(u)

    def mean(self):
        return self._lat.mean()

    def integrated_tail(self, T):
        return self._lat.integrated_tail(T)

    def breakpoints(self, horizon):
        return self._lat.breakpoints(horizon)

    @property
    def is_step(self):
        return True

    def cdf_array(self, s):
        return self._lat.cdf_array(s)

    def quantile_array(self, u):
        return self._lat.quantile_array(u)


@dataclass(frozen=True)
class SudburyX(_SudburyBase):
    """Even-step half of the built-in crossing pair.

    Supported on {0, 2, ..., 2J} with doubly exponential tails
    P(X >= 2j) = 2^(-2^j).  Together with :class:`SudburyY` the two cdfs
    cross on every unit interval, so which unmixed assembly is better keeps
    flipping as the assembly size grows through the tail scales.
    """

    level: int

    def __post_init__(self):
        object.__setattr__(self, "_lat", _sudbury_lattice(self.level, first=2, odd=False))


@dataclass(frozen=True)
class SudburyY(_SudburyBase):
    """Odd-step half of the crossing pair, supported on {1, 3, ..., 2J+1}.

    Its tails P(Y >= 2j+1) = 2^(-3*2^(j-1)) sit strictly between consecutive
    tails of :class:`SudburyX`; that interleaving is what makes the cdfs
    alternate sides at every integer.
    """

    level: int

    def __post_init__(self):
        object.__setattr__(self, "_lat", _sudbury_lattice(self.level, first=3, odd=True))


def dist_to_spec(dist: LifetimeDistribution) -> dict:
    """Serialize a distribution to its tagged-record form."""
    if isinstance(dist, Uniform):
        return {"type": "uniform", "a": dist.a, "b": dist.b}
    if isinstance(dist, Exponential):
        return {"type": "exponential", "rate": dist.rate}
    if isinstance(dist, PointMass):
        return {"type": "pointmass", "c": dist.c}
    if isinstance(dist, SudburyX):
        return {"type": "sudbury_x", "level": dist.level}
    if isinstance(dist, SudburyY):
        return {"type": "sudbury_y", "level": dist.level}
    if isinstance(dist, DiscreteLattice):
        return {"type": "lattice", "values": list(dist.values), "probs": list(dist.probs)}
    if isinstance(dist, Tabulated):
        return {"type": "tabulated", "knots": [list(k) for k in dist.knots], "mode": dist.mode}
    if isinstance(dist, BgwExtinction):
        return {"type": "bgw", "pgf": list(dist.pgf.coeffs)}
    raise ValueError(f"cannot serialize distribution {dist!r}")


def dist_from_spec(record: dict) -> LifetimeDistribution:
    """Build a distribution from a tagged record, e.g. {"type": "uniform", "a": 0, "b": 1}."""
    if not isinstance(record, dict) or "type" not in record:
        raise ValueError(f"distribution record must be an object with a 'type' tag, got {record!r}")
    kind = record["type"]
    args = {k: v for k, v in record.items() if k != "type"}
    try:
        if kind == "uniform":
            return Uniform(args["a"], args["b"])
        if kind == "exponential":
            return Exponential(args["rate"])
        if kind == "pointmass":
            return PointMass(args["c"])
        if kind == "lattice":
            return DiscreteLattice(args["values"], args["probs"])
        if kind == "tabulated":
            return Tabulated([tuple(k) for k in args["knots"]], args.get("mode", "step"))
        if kind == "bgw":
            return BgwExtinction(Pgf(args["pgf"]))
        if kind == "sudbury_x":
            return SudburyX(int(args["level"]))
        if kind == "sudbury_y":
            return SudburyY(int(args["level"]))
    except KeyError as exc:
        raise ValueError(f"distribution record {record!r} is missing field {exc}") from None
    raise ValueError(f"unknown distribution type {kind!r}")
