"""Grids, sampled fields and closed-form evaluators for the exact solution families.

All five families live on the period-2 cell: the Taylor vortex in two
dimensions and the Arnold-Beltrami-Childress (ABC) flow in three, each with
optional time-only forcing.  Evaluators are vectorised over coordinate arrays;
the scalar ``eval_*`` entry points wrap them for single points.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

PI = math.pi
CELL_PERIOD = 2.0


class DimensionMismatchError(ValueError):
    """Raised when a point, grid or field has the wrong number of axes."""


def _as_tuple(value, dim, cast):
    if np.ndim(value) == 0:
        return tuple(cast(value) for _ in range(dim))
    out = tuple(cast(v) for v in value)
    if len(out) != dim:
        raise DimensionMismatchError(f"expected {dim} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice; the node at ``origin + period`` is identified with ``origin``."""

    dim: int
    resolution: tuple[int, ...]
    period: tuple[float, ...] = CELL_PERIOD
    origin: tuple[float, ...] = 0.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionMismatchError(f"dim must be 2 or 3, got {self.dim}")
        res = _as_tuple(self.resolution, self.dim, int)
        per = _as_tuple(self.period, self.dim, float)
        org = _as_tuple(self.origin, self.dim, float)
        for n in res:
            if n < 4 or n % 2:
                raise ValueError(f"resolution must be even and >= 4, got {n}")
        for length in per:
            if not length > 0:
                raise ValueError(f"period must be positive, got {length}")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "period", per)
        object.__setattr__(self, "origin", org)

    @classmethod
    def cube(cls, dim: int, n: int, period: float = CELL_PERIOD) -> "Grid":
        return cls(dim, (n,) * dim, (period,) * dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.period, self.resolution))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.period))

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.resolution)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    samples: np.ndarray
    meta: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.size != self.grid.size:
            raise DimensionMismatchError(f"expected {self.grid.size} samples, got {arr.size}")
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.samples - other.samples)

    def __mul__(self, scale: float) -> "ScalarField":
        return ScalarField(self.grid, self.samples * scale)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    """``data`` has shape ``(dim, *grid.shape)``; component ``i`` is ``data[i]``."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.shape != (self.grid.dim, *self.grid.shape):
            raise DimensionMismatchError(
                f"expected shape {(self.grid.dim, *self.grid.shape)}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_components(cls, components: Sequence[ScalarField]) -> "VectorField":
        grid = components[0].grid
        for comp in components[1:]:
            _check_same_grid(grid, comp.grid)
        return cls(grid, np.stack([c.samples for c in components]))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim, *grid.shape)))

    @property
    def components(self) -> tuple[ScalarField, ...]:
        return tuple(ScalarField(self.grid, c) for c in self.data)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.data)))

    def l2_norm(self) -> float:
        """Cell integral of |w|^2, square-rooted."""
        return float(np.sqrt(np.sum(self.data**2) * self.grid.cell_volume))

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.data - other.data)

    def __mul__(self, scale: float) -> "VectorField":
        return VectorField(self.grid, self.data * scale)

    __rmul__ = __mul__


def _check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise DimensionMismatchError("fields live on different grids")


@dataclass(frozen=True)
class FluidParams:
    kappa: float = 0.02
    rho: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


def _expm1_ratio(d: float, t: float) -> float:
    """``(exp(d t) - 1) / d``, continuous through d = 0 and safe for subnormal d."""
    x = d * t
    if abs(x) < 1e-8:
        return t * (1.0 + 0.5 * x)
    return math.expm1(x) / d


@dataclass(frozen=True)
class TimeProfile:
    """A scalar function of time: zero, constant, ``f_I exp(-lambda t)`` or piecewise linear."""

    kind: str = "zero"
    params: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "zero":
            return
        if self.kind == "constant":
            if len(self.params) != 1:
                raise ValueError("constant profile takes one parameter")
        elif self.kind == "exponential":
            if len(self.params) != 2:
                raise ValueError("exponential profile takes (f_I, lambda)")
            if self.params[1] < 0:
                raise ValueError("exponential profile requires lambda >= 0")
        elif self.kind == "tabulated":
            times = [k[0] for k in self.knots]
            if len(times) < 2 or times[0] != 0.0:
                raise ValueError("tabulated profile needs >= 2 knots starting at t=0")
            if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
                raise ValueError("tabulated knot times must be strictly increasing")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "TimeProfile":
        return cls("zero")

    @classmethod
    def constant(cls, c: float) -> "TimeProfile":
        return cls("constant", (float(c),))

    @classmethod
    def exponential(cls, amplitude: float, lam: float) -> "TimeProfile":
        return cls("exponential", (float(amplitude), float(lam)))

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float]) -> "TimeProfile":
        knots = tuple((float(t), float(v)) for t, v in zip(times, values, strict=True))
        return cls("tabulated", knots=knots)

    @property
    def horizon(self) -> float:
        return self.knots[-1][0] if self.kind == "tabulated" else math.inf

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "exponential":
            amp, lam = self.params
            return amp * np.exp(-lam * t)
        if np.any(t > self.horizon):
            raise ValueError(f"tabulated profile ends at t={self.horizon}")
        times, values = zip(*self.knots)
        return np.interp(t, times, values)

    def integral(self, t: float) -> float:
        """Exact integral of the profile over ``[0, t]``."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.params[0] * t
        if self.kind == "exponential":
            amp, lam = self.params
            return amp * _expm1_ratio(-lam, t)
        if t > self.horizon:
            raise ValueError(f"tabulated profile ends at t={self.horizon}")
        times = np.array([k[0] for k in self.knots])
        inner = times[times < t]
        pts = np.append(inner, t)
        vals = self(pts)
        return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))


def omega(G: TimeProfile, fluid: FluidParams, decay_rate: float, t: float) -> float:
    """Amplitude law ``1 + int_0^t G(tau) exp(decay_rate tau) dtau`` of the forced families."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    r = decay_rate
    if G.kind == "zero":
        return 1.0
    if G.kind == "constant":
        (c,) = G.params
        return 1.0 + c * _expm1_ratio(r, t)
    if G.kind == "exponential":
        amp, lam = G.params
        d = r - lam
        return 1.0 + amp * _expm1_ratio(d, t)
    if t > G.horizon:
        raise ValueError(f"tabulated profile ends at t={G.horizon}, cannot integrate to {t}")
    breaks = [k[0] for k in G.knots if 0 < k[0] < t]
    value, _ = integrate.quad(
        lambda tau: float(G(tau)) * math.exp(r * tau),
        0.0,
        t,
        points=breaks or None,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=200,
    )
    return 1.0 + value


class Family(str, enum.Enum):
    TAYLOR_VORTEX_2D = "TaylorVortex2D"
    FORCED_TAYLOR_VORTEX_2D = "ForcedTaylorVortex2D"
    ABC_FLOW_3D = "ABCFlow3D"
    FORCED_ABC_FLOW_3D = "ForcedABCFlow3D"
    ABC_EXP_FORCED_3D = "ABCExpForced3D"

    @property
    def dim(self) -> int:
        return 2 if self in (Family.TAYLOR_VORTEX_2D, Family.FORCED_TAYLOR_VORTEX_2D) else 3

    @property
    def decay_coefficient(self) -> float:
        """Multiplier of kappa in the viscous decay rate."""
        return 2 * PI**2 if self.dim == 2 else PI**2


@dataclass(frozen=True)
class SolutionFamily:
    tag: Family
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    G: TimeProfile = TimeProfile()
    f_I: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")

    @classmethod
    def taylor_vortex(cls) -> "SolutionFamily":
        return cls(Family.TAYLOR_VORTEX_2D)

    @classmethod
    def forced_taylor_vortex(cls, G: TimeProfile) -> "SolutionFamily":
        return cls(Family.FORCED_TAYLOR_VORTEX_2D, G=G)

    @classmethod
    def abc_flow(cls, a: float, b: float, c: float) -> "SolutionFamily":
        return cls(Family.ABC_FLOW_3D, a, b, c)

    @classmethod
    def forced_abc_flow(cls, a: float, b: float, c: float, G: TimeProfile) -> "SolutionFamily":
        return cls(Family.FORCED_ABC_FLOW_3D, a, b, c, G=G)

    @classmethod
    def abc_exp_forced(cls, a: float, b: float, c: float, f_I: float, lam: float) -> "SolutionFamily":
        return cls(Family.ABC_EXP_FORCED_3D, a, b, c, f_I=f_I, lam=lam)

    @property
    def dim(self) -> int:
        return self.tag.dim

    @property
    def is_forced(self) -> bool:
        return self.tag in (
            Family.FORCED_TAYLOR_VORTEX_2D,
            Family.FORCED_ABC_FLOW_3D,
            Family.ABC_EXP_FORCED_3D,
        )

    def decay_rate(self, fluid: FluidParams) -> float:
        return self.tag.decay_coefficient * fluid.kappa

    def params(self) -> dict:
        if self.dim == 2:
            return {"G": profile_to_dict(self.G)} if self.is_forced else {}
        out = {"a": self.a, "b": self.b, "c": self.c}
        if self.tag is Family.FORCED_ABC_FLOW_3D:
            out["G"] = profile_to_dict(self.G)
        elif self.tag is Family.ABC_EXP_FORCED_3D:
            out.update(f_I=self.f_I, lam=self.lam)
        return out


def profile_to_dict(G: TimeProfile) -> dict:
    if G.kind == "tabulated":
        return {"kind": G.kind, "knots": [list(k) for k in G.knots]}
    return {"kind": G.kind, "params": list(G.params)}


# -- vectorised closed forms; ``x`` is a sequence of coordinate arrays ------------


def initial_velocity(family: SolutionFamily, x: Sequence[np.ndarray]) -> np.ndarray:
    """The family's initial field v0, evaluated directly from its defining formula."""
    if family.dim == 2:
        x1, x2 = x
        return np.stack([np.sin(PI * x1) * np.cos(PI * x2), -np.cos(PI * x1) * np.sin(PI * x2)])
    x1, x2, x3 = x
    a, b, c = family.a, family.b, family.c
    return np.stack(
        [
            a * np.sin(PI * x3) - c * np.cos(PI * x2),
            b * np.sin(PI * x1) - a * np.cos(PI * x3),
            c * np.sin(PI * x2) - b * np.cos(PI * x1),
        ]
    )


def _amplitude(family: SolutionFamily, fluid: FluidParams, t: float) -> float:
    r = family.decay_rate(fluid)
    decay = math.exp(-r * t)
    if family.tag in (Family.FORCED_TAYLOR_VORTEX_2D, Family.FORCED_ABC_FLOW_3D):
        return omega(family.G, fluid, r, t) * decay
    return decay


def _amplitude_rate(family: SolutionFamily, fluid: FluidParams, t: float) -> float:
    r = family.decay_rate(fluid)
    if family.tag in (Family.FORCED_TAYLOR_VORTEX_2D, Family.FORCED_ABC_FLOW_3D):
        # d/dt[Omega e^{-rt}] = G(t) - r Omega(t) e^{-rt}
        return float(family.G(t)) - r * _amplitude(family, fluid, t)
    return -r * math.exp(-r * t)


def uniform_stream(family: SolutionFamily, t: float) -> float:
    """Additive x1-velocity ``int_0^t f_I e^{-lambda tau} dtau`` of ABCExpForced3D, else 0."""
    if family.tag is not Family.ABC_EXP_FORCED_3D:
        return 0.0
    if family.lam == 0:
        return family.f_I * t
    return family.f_I * _expm1_ratio(-family.lam, t)


def velocity(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    out = _amplitude(family, fluid, t) * initial_velocity(family, x)
    if family.tag is Family.ABC_EXP_FORCED_3D:
        out[0] += uniform_stream(family, t)
    return out


def velocity_time_derivative(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    """Exact time derivative of :func:`velocity` by differentiating the amplitude law."""
    out = _amplitude_rate(family, fluid, t) * initial_velocity(family, x)
    if family.tag is Family.ABC_EXP_FORCED_3D:
        out[0] += family.f_I * math.exp(-family.lam * t)
    return out


def _pressure_shape(family: SolutionFamily, x) -> np.ndarray:
    if family.dim == 2:
        x1, x2 = x
        return 0.25 * (np.cos(2 * PI * x1) + np.cos(2 * PI * x2))
    x1, x2, x3 = x
    a, b, c = family.a, family.b, family.c
    return (
        b * c * np.cos(PI * x1) * np.sin(PI * x2)
        + a * b * np.cos(PI * x3) * np.sin(PI * x1)
        + a * c * np.cos(PI * x2) * np.sin(PI * x3)
    )


def pressure(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    """Zero-mean pressure balancing the inertial term: grad(p)/rho = -g.

    The published closed forms carry the opposite overall sign; see
    :func:`published_pressure`.
    """
    amp = _amplitude(family, fluid, t)
    return fluid.rho * amp**2 * _pressure_shape(family, x)


def published_pressure(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    """Pressure exactly as printed for each family, kept for audit reports."""
    return -pressure(family, fluid, x, t)


def force(family: SolutionFamily, x, t: float) -> np.ndarray:
    shape = np.broadcast_shapes(*(np.shape(xi) for xi in x))
    if family.tag in (Family.FORCED_TAYLOR_VORTEX_2D, Family.FORCED_ABC_FLOW_3D):
        return float(family.G(t)) * initial_velocity(family, x)
    out = np.zeros((family.dim, *shape))
    if family.tag is Family.ABC_EXP_FORCED_3D:
        out[0] = family.f_I * math.exp(-family.lam * t)
    return out


def inertial_closed_form(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    if family.tag is Family.ABC_EXP_FORCED_3D:
        raise ValueError("no closed-form inertial term for ABCExpForced3D")
    amp2 = _amplitude(family, fluid, t) ** 2
    if family.dim == 2:
        return amp2 * np.stack([0.5 * PI * np.sin(2 * PI * xi) for xi in x])
    x1, x2, x3 = x
    a, b, c = family.a, family.b, family.c
    s1, s2, s3 = np.sin(PI * x1), np.sin(PI * x2), np.sin(PI * x3)
    c1, c2, c3 = np.cos(PI * x1), np.cos(PI * x2), np.cos(PI * x3)
    return amp2 * PI * np.stack(
        [b * c * s1 * s2 - a * b * c1 * c3, a * c * s2 * s3 - b * c * c1 * c2, a * b * s1 * s3 - a * c * c2 * c3]
    )


# -- pointwise entry points -------------------------------------------------------


def _check_point(family: SolutionFamily, x, t: float) -> tuple[float, ...]:
    pt = tuple(float(v) for v in x)
    if len(pt) != family.dim:
        raise DimensionMismatchError(f"{family.tag.value} needs a {family.dim}-point, got {len(pt)}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return pt


def eval_velocity(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    return velocity(family, fluid, _check_point(family, x, t), t)


def eval_pressure(family: SolutionFamily, fluid: FluidParams, x, t: float) -> float:
    return float(pressure(family, fluid, _check_point(family, x, t), t))


def eval_force(family: SolutionFamily, x, t: float) -> np.ndarray:
    return force(family, _check_point(family, x, t), t)


def eval_inertial_closed_form(family: SolutionFamily, fluid: FluidParams, x, t: float) -> np.ndarray:
    return inertial_closed_form(family, fluid, _check_point(family, x, t), t)


def check_family_grid(family: SolutionFamily, grid: Grid) -> None:
    if grid.dim != family.dim:
        raise DimensionMismatchError(f"{family.tag.value} is {family.dim}D, grid is {grid.dim}D")
    if any(L != CELL_PERIOD for L in grid.period):
        raise ValueError(f"solution families need period {CELL_PERIOD} on every axis, got {grid.period}")


def sample(
    family: SolutionFamily, fluid: FluidParams, grid: Grid, t: float
) -> tuple[VectorField, ScalarField, VectorField]:
    """Velocity, pressure and force of ``family`` at every node of ``grid``."""
    check_family_grid(family, grid)
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = grid.mesh()
    return (
        VectorField(grid, velocity(family, fluid, x, t)),
        ScalarField(grid, pressure(family, fluid, x, t)),
        VectorField(grid, force(family, x, t)),
    )
