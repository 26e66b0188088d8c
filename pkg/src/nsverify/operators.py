"""Differential operators, Poisson solve and Leray projection on periodic grids.

The spectral backend is exact for trigonometric polynomials below Nyquist.
The finite-difference backend is the usual second-order centred stencil with
periodic wrap and exists mainly for convergence studies.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import FluidParams, Grid, ScalarField, VectorField, _check_same_grid


class Backend(str, enum.Enum):
    SPECTRAL = "spectral"
    FD = "fd"


def _backend(backend) -> Backend:
    if backend in ("finite_difference_2nd_order",):
        return Backend.FD
    return Backend(backend)


@dataclass(frozen=True, eq=False)
class SpectralWorkspace:
    """Per-grid wavenumbers.

    ``k[j]`` holds the signed wavenumbers of axis ``j`` (``k[j][0] == 0``);
    ``ik[j]`` is the first-derivative multiplier with the Nyquist entry zeroed.
    Both are broadcast-shaped against the full transform array.
    """

    grid: Grid
    k: tuple[np.ndarray, ...]
    ik: tuple[np.ndarray, ...]
    k2: np.ndarray

    @classmethod
    def for_grid(cls, grid: Grid) -> "SpectralWorkspace":
        return _workspace(grid)

    def forward(self, arr: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.grid.dim, 0))
        return np.fft.fftn(arr, axes=axes)

    def inverse(self, arr: np.ndarray) -> np.ndarray:
        axes = tuple(range(-self.grid.dim, 0))
        return np.fft.ifftn(arr, axes=axes).real

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keeps modes with |m| < N/3 on every axis."""
        mask = np.ones(self.grid.shape, dtype=bool)
        for j, n in enumerate(self.grid.resolution):
            m = np.abs(np.fft.fftfreq(n, 1.0 / n))
            shape = [1] * self.grid.dim
            shape[j] = n
            mask = mask & (m < n / 3).reshape(shape)
        return mask


@lru_cache(maxsize=32)
def _workspace(grid: Grid) -> SpectralWorkspace:
    ks, iks = [], []
    for j, (n, L) in enumerate(zip(grid.resolution, grid.period)):
        if n % 2:
            raise ValueError("spectral backend requires even resolution")
        k = 2 * np.pi * np.fft.fftfreq(n, L / n)
        k[n // 2] = np.pi * n / L
        ik = 1j * k
        ik[n // 2] = 0.0
        shape = [1] * grid.dim
        shape[j] = n
        ks.append(k.reshape(shape))
        iks.append(ik.reshape(shape))
    k2 = sum(k**2 for k in ks)
    for arr in (*ks, *iks, k2):
        arr.flags.writeable = False
    return SpectralWorkspace(grid, tuple(ks), tuple(iks), k2)


def _fd_diff(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2 * h)


def _fd_second(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis=axis) - 2 * arr + np.roll(arr, 1, axis=axis)) / h**2


def _partials(arr: np.ndarray, grid: Grid, backend: Backend) -> np.ndarray:
    """All first partials of a scalar array: shape ``(dim, *grid.shape)``."""
    if backend is Backend.SPECTRAL:
        ws = _workspace(grid)
        a_hat = ws.forward(arr)
        return np.stack([ws.inverse(ik * a_hat) for ik in ws.ik])
    return np.stack([_fd_diff(arr, j, h) for j, h in enumerate(grid.spacing)])


def gradient(s: ScalarField, backend="spectral") -> VectorField:
    return VectorField(s.grid, _partials(s.samples, s.grid, _backend(backend)))


def divergence(v: VectorField, backend="spectral") -> ScalarField:
    backend = _backend(backend)
    grid = v.grid
    if backend is Backend.SPECTRAL:
        ws = _workspace(grid)
        v_hat = ws.forward(v.data)
        return ScalarField(grid, ws.inverse(sum(ik * v_hat[j] for j, ik in enumerate(ws.ik))))
    return ScalarField(grid, sum(_fd_diff(v.data[j], j, h) for j, h in enumerate(grid.spacing)))


def _laplacian_array(arr: np.ndarray, grid: Grid, backend: Backend) -> np.ndarray:
    if backend is Backend.SPECTRAL:
        ws = _workspace(grid)
        return ws.inverse(-ws.k2 * ws.forward(arr))
    axes = range(arr.ndim - grid.dim, arr.ndim)
    return sum(_fd_second(arr, ax, h) for ax, h in zip(axes, grid.spacing))


def laplacian(field, backend="spectral"):
    """Componentwise Laplacian of a ScalarField or VectorField."""
    backend = _backend(backend)
    if isinstance(field, VectorField):
        return VectorField(field.grid, _laplacian_array(field.data, field.grid, backend))
    return ScalarField(field.grid, _laplacian_array(field.samples, field.grid, backend))


def curl(v: VectorField, backend="spectral"):
    """Vorticity: a ScalarField ``dv2/dx1 - dv1/dx2`` in 2D, a VectorField in 3D."""
    backend = _backend(backend)
    d = [_partials(c, v.grid, backend) for c in v.data]  # d[i][j] = dv_i/dx_j
    if v.grid.dim == 2:
        return ScalarField(v.grid, d[1][0] - d[0][1])
    return VectorField(v.grid, np.stack([d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]]))


def advection(v: VectorField, backend="spectral", dealias: bool = False) -> VectorField:
    """Inertial term ``g_i = sum_j v_j dv_i/dx_j`` evaluated pointwise."""
    backend = _backend(backend)
    grid = v.grid
    vel = v.data
    if dealias:
        if backend is not Backend.SPECTRAL:
            raise ValueError("dealiasing needs the spectral backend")
        ws = _workspace(grid)
        mask = ws.dealias_mask()
        vel = ws.inverse(ws.forward(vel) * mask)
    g = np.stack([np.sum(vel * _partials(vi, grid, backend), axis=0) for vi in vel])
    if dealias:
        g = ws.inverse(ws.forward(g) * mask)
    return VectorField(grid, g)


def poisson_solve(source: ScalarField) -> ScalarField:
    """Zero-mean ``s`` with ``laplacian(s) = source - mean(source)``.

    The removed source mean is recorded as ``meta["source_mean"]``.
    """
    ws = _workspace(source.grid)
    s_hat = ws.forward(source.samples)
    mean = s_hat.flat[0].real / source.grid.size
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -s_hat / ws.k2
    out.flat[0] = 0.0
    return ScalarField(source.grid, ws.inverse(out), meta={"source_mean": float(mean)})


def pressure_from_fields(v: VectorField, f: VectorField, fluid: FluidParams) -> ScalarField:
    """Pressure reconstructed from ``laplacian(p) = rho div(f - g)``, zero-mean gauge."""
    _check_same_grid(v.grid, f.grid)
    g = advection(v)
    return poisson_solve(divergence(f - g) * fluid.rho)


def leray_project(w: VectorField) -> VectorField:
    """Divergence-free part of ``w``: per mode ``w - k (k.w)/|k|^2``; the k=0 mode passes through."""
    ws = _workspace(w.grid)
    w_hat = ws.forward(w.data)
    return VectorField(w.grid, ws.inverse(_project_hat(ws, w_hat)))


def _project_hat(ws: SpectralWorkspace, w_hat: np.ndarray) -> np.ndarray:
    # ik is zero at Nyquist; the projection uses the same multiplier as grad/div
    # so that div(leray_project(w)) vanishes to rounding.
    div_hat = sum(ik * w_hat[j] for j, ik in enumerate(ws.ik))
    lap = sum(ik * ik for ik in ws.ik)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_hat = np.where(lap != 0, div_hat / lap, 0.0)
    return w_hat - np.stack([ik * phi_hat for ik in ws.ik])


def umbilical_force(v: VectorField, backend="spectral") -> VectorField:
    """Solenoidal part of the inertial term; zero (or constant) for the exact solutions."""
    if _backend(backend) is not Backend.SPECTRAL:
        raise ValueError("umbilical force needs the spectral backend")
    return leray_project(advection(v))
