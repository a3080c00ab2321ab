"""
Periodic grid, transforms, and Fourier-multiplier operators.

All fields live on a uniform N x N grid covering [0, 2pi)^2, so wavenumbers
are integers. Scalar fields are represented two ways:

* physical: real ``(n, n)`` arrays indexed ``[ix, iy]`` (x is axis 0),
* spectral: complex ``(n, n)`` arrays of unnormalized forward-FFT
  coefficients in numpy's standard frequency ordering.

Transform normalization (fixed once, relied on throughout):

    coeff(k) = sum_x f(x) exp(-i k.x)

so the Fourier-series amplitude of mode k is ``coeff(k) / n**2`` and
Parseval reads ``sum_grid f**2 == sum_k |coeff(k)|**2 / n**2``. Domain
integrals follow as ``int f dx = (2pi)**2 * coeff(0,0) / n**2`` and
``int f*g dx = (2pi)**2 * sum_k conj(F) G / n**4``.

Dealiasing uses the 2/3 rule: a mode is kept iff ``|kx| < n/3`` and
``|ky| < n/3``, which in particular always removes the Nyquist modes.
First-derivative multipliers zero the Nyquist wavenumber as well so odd
derivatives of real fields stay real.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: tolerances for internal sanity checks (relative to the field magnitude)
_HERMITIAN_RTOL = 1e-9
_MEAN_RTOL = 1e-9


@dataclass(frozen=True)
class TorusGrid:
    """
    Precomputed spectral quantities for the periodic square [0, 2pi)^2.

    Parameters
    ----------
    n : int
        Grid points per dimension; must be even and >= 8.

    Attributes
    ----------
    x, y : ndarray, shape (n,)
        Collocation coordinates, ``2pi * i / n``.
    X, Y : ndarray, shape (n, n)
        Meshgrid coordinates, ``indexing="ij"``.
    kx, ky : ndarray, shape (n,)
        Integer wavenumbers in FFT order (0, 1, ..., -n/2, ..., -1).
    KX, KY, K2 : ndarray, shape (n, n)
        Wavenumber meshes and squared magnitude ``kx**2 + ky**2``.
    DX, DY : ndarray, shape (n, n), complex
        First-derivative multipliers ``i*k`` with the Nyquist mode zeroed.
    dealias_mask : ndarray of bool, shape (n, n)
        True iff ``|kx| < n/3`` and ``|ky| < n/3`` (2/3 rule).
    kmax_dealias : int
        Largest retained wavenumber magnitude per axis.
    h : float
        Grid spacing ``2pi / n``.
    """

    n: int
    x: np.ndarray = field(init=False, repr=False)
    y: np.ndarray = field(init=False, repr=False)
    X: np.ndarray = field(init=False, repr=False)
    Y: np.ndarray = field(init=False, repr=False)
    kx: np.ndarray = field(init=False, repr=False)
    ky: np.ndarray = field(init=False, repr=False)
    KX: np.ndarray = field(init=False, repr=False)
    KY: np.ndarray = field(init=False, repr=False)
    K2: np.ndarray = field(init=False, repr=False)
    DX: np.ndarray = field(init=False, repr=False)
    DY: np.ndarray = field(init=False, repr=False)
    dealias_mask: np.ndarray = field(init=False, repr=False)
    kmax_dealias: int = field(init=False)
    h: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        n = self.n
        s = object.__setattr__
        x = 2.0 * np.pi * np.arange(n) / n
        s(self, "x", x)
        s(self, "y", x.copy())
        X, Y = np.meshgrid(x, x, indexing="ij")
        s(self, "X", X)
        s(self, "Y", Y)
        k1 = np.fft.fftfreq(n, 1.0 / n)  # integer-valued floats
        s(self, "kx", k1)
        s(self, "ky", k1.copy())
        KX, KY = np.meshgrid(k1, k1, indexing="ij")
        s(self, "KX", KX)
        s(self, "KY", KY)
        s(self, "K2", KX**2 + KY**2)
        # zero the (unpaired) Nyquist wavenumber in first derivatives
        kd = k1.copy()
        kd[n // 2] = 0.0
        KXd, KYd = np.meshgrid(kd, kd, indexing="ij")
        s(self, "DX", 1j * KXd)
        s(self, "DY", 1j * KYd)
        cut = n / 3.0
        s(self, "dealias_mask", (np.abs(KX) < cut) & (np.abs(KY) < cut))
        s(self, "kmax_dealias", int(np.ceil(cut)) - 1)
        s(self, "h", 2.0 * np.pi / n)

    def multiplier(self, func) -> np.ndarray:
        """Evaluate ``func(kx, ky)`` on the wavenumber mesh."""
        return func(self.KX, self.KY)


@dataclass(frozen=True)
class VectorField:
    """A 2D velocity-like field: physical samples of both components."""

    grid: TorusGrid
    ux: np.ndarray
    uy: np.ndarray

    def hats(self) -> tuple[np.ndarray, np.ndarray]:
        """Spectral coefficients of both components."""
        return np.fft.fft2(self.ux), np.fft.fft2(self.uy)

    def speed(self) -> np.ndarray:
        """Pointwise speed ``|u|``."""
        return np.hypot(self.ux, self.uy)

    def max_speed(self) -> float:
        return float(self.speed().max())


def forward_transform(values: np.ndarray) -> np.ndarray:
    """Physical samples -> unnormalized Fourier coefficients."""
    return np.fft.fft2(np.asarray(values, dtype=np.float64))


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    """
    Fourier coefficients -> real physical samples.

    Rejects input that is not Hermitian-symmetric (a real field's
    coefficients satisfy coeff(-k) = conj(coeff(k))); such input signals
    an internal logic error upstream.
    """
    defect = hermitian_defect(coeffs)
    scale = np.abs(coeffs).max()
    if defect > _HERMITIAN_RTOL * (1.0 + scale):
        raise ValueError(
            f"coefficients are not Hermitian-symmetric (defect {defect:.3e})"
        )
    return np.fft.ifft2(coeffs).real


def _ifft_real(coeffs: np.ndarray) -> np.ndarray:
    # hot-path inverse for internally constructed (Hermitian) data
    return np.fft.ifft2(coeffs).real


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max modulus of ``coeff(k) - conj(coeff(-k))`` over all modes."""
    n = coeffs.shape[0]
    idx = (-np.arange(n)) % n
    reflected = coeffs[np.ix_(idx, idx)]
    return float(np.abs(coeffs - np.conj(reflected)).max())


def apply_multiplier(coeffs: np.ndarray, m) -> np.ndarray:
    """
    Multiply coefficients by a Fourier multiplier.

    ``m`` may be an ``(n, n)`` array over the wavenumber mesh or a callable
    ``m(KX, KY)``; all multipliers used here are even in k, which preserves
    Hermitian symmetry.
    """
    if callable(m):
        n = coeffs.shape[0]
        k1 = np.fft.fftfreq(n, 1.0 / n)
        KX, KY = np.meshgrid(k1, k1, indexing="ij")
        m = m(KX, KY)
    return coeffs * m


def laplacian(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Spectral Laplacian, multiplier ``-k**2``."""
    return -grid.K2 * coeffs


def helmholtz(grid: TorusGrid, coeffs: np.ndarray, alpha: float) -> np.ndarray:
    """Apply ``1 - alpha**2 * Lap``, i.e. the multiplier ``1 + alpha**2 k**2``."""
    if alpha == 0.0:
        return coeffs.copy()
    return (1.0 + alpha**2 * grid.K2) * coeffs


def inverse_helmholtz(grid: TorusGrid, coeffs: np.ndarray, alpha: float) -> np.ndarray:
    """Apply ``(1 - alpha**2 * Lap)^-1``, the smoothing filter ``1/(1 + alpha**2 k**2)``."""
    if alpha == 0.0:
        return coeffs.copy()
    return coeffs / (1.0 + alpha**2 * grid.K2)


def ddx(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Spectral d/dx (Nyquist zeroed)."""
    return grid.DX * coeffs


def ddy(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Spectral d/dy (Nyquist zeroed)."""
    return grid.DY * coeffs


def stream_from_omega(grid: TorusGrid, omega_hat: np.ndarray) -> np.ndarray:
    """
    Solve ``-Lap psi = omega`` for the stream function.

    psi_hat(k) = omega_hat(k) / k**2 for k != 0, with the k = 0 mode pinned
    to zero (gauge). The input must be mean-zero; a nonzero mean makes the
    inversion ill-posed and is rejected.
    """
    scale = np.abs(omega_hat).max()
    if np.abs(omega_hat[0, 0]) > _MEAN_RTOL * (1.0 + scale):
        raise ValueError("stream-function solve requires a mean-zero vorticity")
    k2 = np.where(grid.K2 == 0.0, 1.0, grid.K2)
    psi_hat = omega_hat / k2
    psi_hat[0, 0] = 0.0
    return psi_hat


def dealias(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    """Zero all modes outside the 2/3-rule mask (idempotent)."""
    return coeffs * grid.dealias_mask


def project_zero_mean(coeffs: np.ndarray) -> np.ndarray:
    """Return a copy with the k = 0 mode pinned to zero."""
    out = coeffs.copy()
    out[0, 0] = 0.0
    return out


def integral(grid: TorusGrid, coeffs: np.ndarray) -> float:
    """Exact domain integral of the field, ``(2pi)**2 * coeff(0,0) / n**2``."""
    return float(coeffs[0, 0].real) * (2.0 * np.pi) ** 2 / grid.n**2


def l2_inner(grid: TorusGrid, f_hat: np.ndarray, g_hat: np.ndarray) -> float:
    """Exact L2 inner product ``int f g dx`` by Parseval."""
    return float(np.sum(np.conj(f_hat) * g_hat).real) * (2.0 * np.pi) ** 2 / grid.n**4


def l2_norm(grid: TorusGrid, f_hat: np.ndarray) -> float:
    """Exact L2 norm ``sqrt(int f**2 dx)``."""
    return float(np.sqrt(max(l2_inner(grid, f_hat, f_hat), 0.0)))
