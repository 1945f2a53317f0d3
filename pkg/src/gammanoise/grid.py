"""Periodic grids and spectral fields on the d-dimensional torus.

The torus is ``[0, L)^d`` sampled with ``n`` points per axis.  A field is
stored through its Fourier coefficients ``c_k`` against the modes
``e_k(x) = exp(2*pi*i k.x / L)`` with integer frequencies
``k in (-n/2, n/2]`` per axis.  The Nyquist frequency is assigned to the
positive bin ``+n/2`` so every multiplier is evaluated at a single signed
frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of the torus ``[0, L)^d``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 to 3.
    n : int
        Points per axis; must be a power of two.
    length : float
        Box length L (default 1).
    """

    dim: int
    n: int
    length: float = 1.0

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 2, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def cell_measure(self) -> float:
        return (self.length / self.n) ** self.dim

    def freq_axis(self) -> np.ndarray:
        """Integer frequencies per axis in DFT order, Nyquist at ``+n/2``."""
        k = np.arange(self.n)
        k = np.where(k > self.n // 2, k - self.n, k)
        return k

    def freq_mesh(self) -> list:
        """Broadcastable integer frequency arrays, one per axis."""
        k = self.freq_axis()
        out = []
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = self.n
            out.append(k.reshape(shape))
        return out

    def k2_physical(self) -> np.ndarray:
        """``|k/L|^2`` on the full frequency lattice."""
        mesh = self.freq_mesh()
        out = np.zeros(self.shape)
        for km in mesh:
            out = out + (km / self.length) ** 2
        return out

    def freq_abs(self) -> np.ndarray:
        """Euclidean norm of the integer frequency multi-index."""
        mesh = self.freq_mesh()
        out = np.zeros(self.shape)
        for km in mesh:
            out = out + km.astype(float) ** 2
        return np.sqrt(out)

    def coords(self) -> list:
        """Broadcastable coordinate arrays, one per axis."""
        x = np.arange(self.n) * (self.length / self.n)
        out = []
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = self.n
            out.append(x.reshape(shape))
        return out

    def index_of_freq(self, k: tuple) -> tuple:
        """Array index of the integer frequency multi-index ``k``."""
        if np.isscalar(k):
            k = (int(k),)
        idx = []
        for ki in k:
            ki = int(ki)
            if not (-self.n // 2 < ki <= self.n // 2):
                raise ValueError(f"frequency {ki} outside (-n/2, n/2] for n={self.n}")
            idx.append(ki % self.n)
        if len(idx) != self.dim:
            raise ValueError(f"frequency index has {len(idx)} axes, grid has {self.dim}")
        return tuple(idx)


@dataclass
class SpectralField:
    """Complex amplitudes per integer frequency, dual to grid samples.

    Coefficients are the continuum Fourier coefficients: a constant c has
    ``coeff(0) = c`` and the squared L2 norm equals ``L^d * sum |c_k|^2``
    (Plancherel).  A field flagged ``real`` keeps Hermitian symmetry
    ``coeff(-k) == conj(coeff(k))``.
    """

    grid: Grid
    coeffs: np.ndarray
    real: bool = False
    _values: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )
        if self.real and not self.is_hermitian():
            raise ValueError("field flagged real but coefficients are not Hermitian-symmetric")

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        flipped = _reverse_freq(self.coeffs)
        scale = np.max(np.abs(self.coeffs)) or 1.0
        return bool(np.max(np.abs(self.coeffs - np.conj(flipped))) <= tol * scale)

    def values(self) -> np.ndarray:
        """Samples on the grid; real array when flagged real."""
        if self._values is None:
            v = np.fft.ifftn(self.coeffs) * (self.grid.n ** self.grid.dim)
            self._values = v.real if self.real else v
        return self._values

    def coeff_at(self, k) -> complex:
        return complex(self.coeffs[self.grid.index_of_freq(k)])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs, real=self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs, real=self.real and other.real)

    def __mul__(self, c) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * c, real=self.real and np.isrealobj(np.asarray(c)))

    __rmul__ = __mul__


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _reverse_freq(c: np.ndarray) -> np.ndarray:
    """Coefficients at ``-k``, in the same DFT layout."""
    out = c
    for ax in range(c.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def forward_transform(grid: Grid, values: np.ndarray) -> SpectralField:
    """Fourier coefficients of grid samples; inverse of ``SpectralField.values``."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"value shape {values.shape} does not match grid {grid.shape}")
    coeffs = np.fft.fftn(values) / (grid.n ** grid.dim)
    return SpectralField(grid, coeffs, real=bool(np.isrealobj(values)))


def inverse_transform(f: SpectralField) -> np.ndarray:
    return f.values()


def zero_field(grid: Grid, real: bool = True) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.shape, dtype=np.complex128), real=real)


def constant_field(grid: Grid, c: complex) -> SpectralField:
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[(0,) * grid.dim] = c
    return SpectralField(grid, coeffs, real=bool(np.imag(c) == 0))


def mode_field(grid: Grid, k, amplitude: complex = 1.0) -> SpectralField:
    """Single Fourier mode ``amplitude * e_k``."""
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[grid.index_of_freq(k)] = amplitude
    return SpectralField(grid, coeffs)


def field_from_function(grid: Grid, fn) -> SpectralField:
    """Sample ``fn`` on the grid; ``fn`` receives one coordinate array per axis."""
    vals = fn(*[np.broadcast_to(x, grid.shape) for x in grid.coords()])
    return forward_transform(grid, np.asarray(vals, dtype=float))


def upsampled_values(f: SpectralField, factor: int) -> np.ndarray:
    """Trigonometric interpolation of ``f`` on the ``factor * n`` grid.

    The Nyquist coefficient is split over ``+n/2`` and ``-n/2`` so real
    fields stay real and original samples are reproduced exactly.
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError(f"oversampling factor must be a positive integer, got {factor}")
    if factor == 1:
        return f.values()
    n, dim = f.grid.n, f.grid.dim
    m = n * factor
    c = f.coeffs
    for ax in range(dim):
        c = _upsample_axis(c, ax, n, m)
    v = np.fft.ifftn(c) * (m ** dim)
    return v.real if f.real else v


def _upsample_axis(c: np.ndarray, ax: int, n: int, m: int) -> np.ndarray:
    shape = list(c.shape)
    shape[ax] = m
    out = np.zeros(shape, dtype=np.complex128)
    half = n // 2
    src = [slice(None)] * c.ndim

    dst = list(src)
    src[ax] = slice(0, half)
    dst[ax] = slice(0, half)
    out[tuple(dst)] = c[tuple(src)]

    src[ax] = slice(half + 1, n)
    dst[ax] = slice(m - half + 1, m)
    out[tuple(dst)] = c[tuple(src)]

    src[ax] = half
    dst[ax] = half
    out[tuple(dst)] = c[tuple(src)] / 2.0
    dst[ax] = m - half
    out[tuple(dst)] = c[tuple(src)] / 2.0
    return out


def product(f: SpectralField, g: SpectralField, oversample: int = 4) -> SpectralField:
    """Pointwise product, dealiased on an ``oversample``-times finer grid.

    Both factors are trigonometrically interpolated, multiplied, and the
    result is sampled back on the original grid.  Exact whenever the
    combined bandwidth fits below the fine Nyquist frequency.
    """
    _check_same_grid(f, g)
    vf = upsampled_values(f, oversample)
    vg = upsampled_values(g, oversample)
    v = vf * vg
    if oversample > 1:
        sl = tuple(slice(None, None, oversample) for _ in range(f.grid.dim))
        v = v[sl]
    return forward_transform(f.grid, v)
