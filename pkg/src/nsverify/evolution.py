"""Heat-kernel propagation, the forced Duhamel solution operator and free-space oracles.

``duhamel_evolve`` is the diffusion solution with projected forcing and an
optional spatially uniform drift.  It solves the Navier-Stokes problem exactly
when the solenoidal part of the inertial term vanishes (or is uniform in space).

The two ``free_space_oracle_*`` functions evaluate the whole-space integral
kernels by direct real-space quadrature, truncated to a window of
``truncation_radius`` periods around each evaluation point.  Apart from the
divergence that forms the pressure source, they never touch the Fourier
multipliers used by the spectral path.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .fields import (
    FluidParams,
    Grid,
    SolutionFamily,
    TimeProfile,
    VectorField,
    check_family_grid,
    force as family_force_values,
)
from .operators import _project_hat, _workspace, divergence, leray_project

ForceFn = Callable[[float], VectorField]


def heat_propagate(v0: VectorField, fluid: FluidParams, t: float) -> VectorField:
    """Multiply every Fourier mode by ``exp(-kappa |k|^2 t)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return v0
    ws = _workspace(v0.grid)
    return VectorField(v0.grid, ws.inverse(ws.forward(v0.data) * np.exp(-fluid.kappa * ws.k2 * t)))


def project_force(f: VectorField) -> VectorField:
    """Solenoidal part of the applied force; vanishes when ``f`` is a pure gradient."""
    return leray_project(f)


@dataclass(frozen=True)
class TabulatedForce:
    """Force samples at strictly increasing times, linearly interpolated in between."""

    times: tuple[float, ...]
    fields: tuple[VectorField, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) != len(self.fields) or len(times) < 2:
            raise ValueError("need at least two (time, field) pairs")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("force timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fields", tuple(self.fields))

    def covers(self, t: float) -> bool:
        return self.times[0] <= 0.0 and self.times[-1] >= t

    def __call__(self, t: float) -> VectorField:
        i = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        t0, t1 = self.times[i], self.times[i + 1]
        w = (t - t0) / (t1 - t0)
        return self.fields[i] * (1 - w) + self.fields[i + 1] * w


def family_force(family: SolutionFamily, grid: Grid) -> ForceFn:
    """The family's applied force as a callable ``t -> VectorField`` on ``grid``."""
    check_family_grid(family, grid)
    x = grid.mesh()
    return lambda t: VectorField(grid, family_force_values(family, x, t))


@dataclass(frozen=True, eq=False)
class EvolutionSpec:
    fluid: FluidParams
    initial: VectorField
    force: Union[ForceFn, TabulatedForce, None] = None
    drift: Sequence[TimeProfile] | None = None
    panels_per_unit_time: int = 64

    def __post_init__(self):
        div = divergence(self.initial).sup_norm()
        if div > 1e-8:
            raise ValueError(f"initial field is not divergence-free (sup |div| = {div:.3e})")
        if self.drift is not None and len(self.drift) != self.initial.grid.dim:
            raise ValueError("drift needs one profile per velocity component")
        if self.panels_per_unit_time < 1:
            raise ValueError("panels_per_unit_time must be positive")


def simpson_nodes(t: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson on ``[0, t]`` with ``panels`` double intervals."""
    n = 2 * panels
    nodes = np.linspace(0.0, t, n + 1)
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return nodes, weights * (t / n) / 3.0


def duhamel_evolve(spec: EvolutionSpec, t: float, panels: int | None = None) -> VectorField:
    """Heat-propagated data + time integral of heat-propagated projected force + drift."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    grid = spec.initial.grid
    out = heat_propagate(spec.initial, spec.fluid, t).data.copy()
    if spec.force is not None and t > 0:
        if isinstance(spec.force, TabulatedForce) and not spec.force.covers(t):
            raise ValueError(f"tabulated force does not cover [0, {t}]")
        if panels is None:
            panels = max(1, math.ceil(spec.panels_per_unit_time * t))
        ws = _workspace(grid)
        nodes, weights = simpson_nodes(t, panels)
        acc = np.zeros((grid.dim, *grid.shape), dtype=complex)
        for tau, w in zip(nodes, weights):
            f_hat = _project_hat(ws, ws.forward(spec.force(float(tau)).data))
            acc += w * np.exp(-spec.fluid.kappa * ws.k2 * (t - tau)) * f_hat
        out += ws.inverse(acc)
    if spec.drift is not None:
        for i, G in enumerate(spec.drift):
            out[i] += G.integral(t)
    return VectorField(grid, out)


# -- free-space oracles -----------------------------------------------------------


@dataclass(frozen=True)
class OracleConfig:
    """Quadrature settings for the truncated whole-space integrals.

    ``window`` selects how the pressure-gradient kernel is cut off: ``"smooth"``
    (radial plateau with a C-infinity taper over the outer half) or ``"box"``
    (sharp cube).  The cube converges to a shape-dependent wrong limit for
    periodic sources and is kept only to demonstrate that.
    """

    truncation_radius: float = 6.0
    quadrature_points_per_axis: int = 64
    window: str = "smooth"

    def __post_init__(self):
        if self.truncation_radius < 2:
            raise ValueError("truncation_radius must be >= 2 periods")
        if self.quadrature_points_per_axis < 16:
            raise ValueError("quadrature_points_per_axis must be >= 16")
        if self.window not in ("smooth", "box"):
            raise ValueError(f"unknown window {self.window!r}")


_GL_ORDER = 8


def _gauss_legendre_cell(origin: float, period: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    panels = max(1, points // _GL_ORDER)
    xg, wg = leggauss(_GL_ORDER)
    edges = origin + period * np.arange(panels + 1) / panels
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _folded_heat_matrix(x_eval, y_nodes, y_weights, period, radius, kappa_t):
    """M[a, q] = w_q * sum over images of the 1D heat kernel inside the window."""
    half_width = radius * period
    n_img = int(math.ceil(radius)) + 1
    var4 = 4.0 * kappa_t
    norm = 1.0 / math.sqrt(math.pi * var4)
    M = np.zeros((x_eval.size, y_nodes.size))
    for m in range(-n_img, n_img + 1):
        d = x_eval[:, None] - (y_nodes[None, :] + m * period)
        inside = np.abs(d) <= half_width
        M += np.where(inside, norm * np.exp(-(d**2) / var4), 0.0)
    return M * y_weights[None, :]


def _apply_separable(mats: Sequence[np.ndarray], values: np.ndarray) -> np.ndarray:
    out = values
    for axis, M in enumerate(mats):
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [axis])), 0, axis)
    return out


def free_space_oracle_heat(
    v0: VectorField,
    fluid: FluidParams,
    t: float,
    cfg: OracleConfig = OracleConfig(),
    evaluator: Callable[[Sequence[np.ndarray]], np.ndarray] | None = None,
) -> VectorField:
    """Gaussian convolution of ``v0`` over a cube of half-width ``truncation_radius`` periods.

    With ``evaluator`` (a vectorised ``x -> v0(x)``), the cell is integrated by
    composite Gauss-Legendre at ``quadrature_points_per_axis`` nodes per period.
    Without it, the periodic samples themselves are the nodes (trapezoid rule).
    """
    if t <= 0:
        raise ValueError("oracle kernel is singular at t=0; use the initial field")
    grid = v0.grid
    axes = grid.axes()
    mats, nodes = [], []
    for j, (x, L, o, h) in enumerate(zip(axes, grid.period, grid.origin, grid.spacing)):
        if evaluator is None:
            y, w = x, np.full(x.size, h)
        else:
            y, w = _gauss_legendre_cell(o, L, cfg.quadrature_points_per_axis)
        nodes.append(y)
        mats.append(_folded_heat_matrix(x, y, w, L, cfg.truncation_radius, fluid.kappa * t))
    if evaluator is None:
        values = v0.data
    else:
        values = np.asarray(evaluator(np.meshgrid(*nodes, indexing="ij")), dtype=float)
    out = np.stack([_apply_separable(mats, comp) for comp in values])
    return VectorField(grid, out)


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)

    def bump(z):
        safe = np.where(z > 0, z, 1.0)
        return np.where(z > 0, np.exp(-1.0 / safe), 0.0)

    return bump(1 - u) / (bump(1 - u) + bump(u))


def _window(s: Sequence[np.ndarray], r: np.ndarray, reach: float, kind: str) -> np.ndarray:
    if kind == "box":
        inside = np.ones(r.shape, dtype=bool)
        for sj in s:
            inside &= np.abs(sj) <= reach
        return inside.astype(float)
    return _smooth_step((r / reach - 0.5) / 0.5)


def lattice_correction(n: int) -> float:
    """Local weight restoring the punctured lattice sum of ``(x-y)/|x-y|^n``.

    Dropping the singular node from the lattice sum misses
    ``-grad P(x) h^2 D_n`` per unit kernel prefactor, where
    ``D_n = (1/n) * [integral - lattice sum](|s|^(2-n))`` on the unit lattice.
    Poisson summation gives ``D_2 = 1/2``; ``D_3 = -Z/3`` with ``Z`` the
    cubic-lattice Epstein zeta value ``sum' 1/|m|``, summed here by Ewald splitting.
    """
    if n == 2:
        return 0.5
    if n != 3:
        raise ValueError("only n = 2, 3 are supported")
    m = np.arange(-6, 7)
    M = np.meshgrid(m, m, m, indexing="ij")
    r = np.sqrt(sum(x**2 for x in M)).ravel()
    r = r[r > 0]
    z = -3.0 + np.sum(special.erfc(np.sqrt(np.pi) * r) / r + np.exp(-np.pi * r**2) / (np.pi * r**2))
    return float(-z / 3.0)


def _circular_convolve(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``out[a] = sum_d W[d] P[a - d]`` on a periodic lattice by direct summation.

    ``W`` is indexed by offset modulo the grid shape.  The last axis is done
    as a circulant matrix product, the leading axes by explicit shifts.
    """
    n = P.shape[-1]
    lead_axes = tuple(range(P.ndim - 1))
    diff = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    out = np.zeros_like(P)
    for lead in itertools.product(*(range(k) for k in P.shape[:-1])):
        shifted = np.roll(P, lead, axis=lead_axes)
        out += shifted @ W[lead][diff].T
    return out


def _fd4_partial(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (
        -np.roll(arr, -2, axis) + 8 * np.roll(arr, -1, axis) - 8 * np.roll(arr, 1, axis) + np.roll(arr, 2, axis)
    ) / (12 * h)


def free_space_oracle_pressure_gradient(
    g_minus_f: VectorField, rho: float, cfg: OracleConfig = OracleConfig()
) -> VectorField:
    """grad(p)/rho from the whole-space kernel ``c_n (x-y)/|x-y|^n`` applied to ``div(f - g)``.

    ``c_n = Gamma(n/2) / (2 pi^(n/2))``.  The source is extended periodically,
    the kernel is folded onto the lattice within the truncation window, and
    the singular node is replaced by :func:`lattice_correction` times a
    fourth-order finite-difference gradient of the source.  ``rho`` cancels
    out of grad(p)/rho; it is accepted for symmetry with the spectral path.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    grid = g_minus_f.grid
    n = grid.dim
    if len(set(grid.resolution)) != 1 or len(set(grid.period)) != 1:
        raise ValueError("pressure-gradient oracle needs a cubic grid")
    N, L, h = grid.resolution[0], grid.period[0], grid.spacing[0]
    source = -divergence(g_minus_f).samples
    c_n = math.gamma(n / 2) / (2 * math.pi ** (n / 2))
    reach = cfg.truncation_radius * L
    n_img = int(math.ceil(cfg.truncation_radius)) + 1
    base = np.arange(N) * h
    W = np.zeros((n, *grid.shape))
    for img in itertools.product(range(-n_img, n_img + 1), repeat=n):
        # nearest point of this image block to the origin
        gap = math.sqrt(sum(max(0, abs(q) - 1) ** 2 for q in img)) * L
        if gap > reach * (1 if cfg.window == "smooth" else math.sqrt(n)):
            continue
        s = np.meshgrid(*(base + q * L for q in img), indexing="ij")
        r = np.sqrt(sum(sj**2 for sj in s))
        with np.errstate(divide="ignore", invalid="ignore"):
            radial = np.where(r > 0, c_n / r**n, 0.0) * _window(s, r, reach, cfg.window)
        for i in range(n):
            W[i] += s[i] * radial
    W *= h**n
    corr = c_n * lattice_correction(n) * h**2
    out = np.stack(
        [_circular_convolve(source, W[i]) - corr * _fd4_partial(source, i, h) for i in range(n)]
    )
    return VectorField(grid, out)
