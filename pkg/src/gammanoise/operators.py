"""Convolution-type operators and their mean-square norms.

The operator ``h -> int f(x-y) g(y) h(y) dy`` has squared gamma(L2, Lq) norm
comparable to ``|| |f|^2 * |g|^2 ||_{L^{q/2}}`` (exactly equal at q = 2), so
everything reduces to one convolution computed spectrally.  A dense-matrix
Hilbert-Schmidt oracle guards the quadrature.  Convolution bounds of this
kind fail outright for eta > q or eta < 2; the checks here stay inside the
valid exponent range and do not probe the failure cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, SpectralField, forward_transform
from .norms import DEFAULT_OVERSAMPLE, bessel_kernel, lq_norm, weak_lp_norm
from .systems import bump_values

BRUTEFORCE_MAX_CELLS = 4096


class ResourceError(RuntimeError):
    """Raised when an oracle would exceed its declared memory budget."""


@dataclass
class ConvPair:
    """Kernel f, multiplier g, and target integrability q >= 2."""

    f: SpectralField
    g: SpectralField
    q: float

    def __post_init__(self) -> None:
        if self.f.grid != self.g.grid:
            raise ValueError("kernel and multiplier live on different grids")
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")


def convolve(a: SpectralField, b: SpectralField) -> SpectralField:
    """Periodic convolution ``int a(x-y) b(y) dy`` via coefficient products."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    coeffs = a.coeffs * b.coeffs * a.grid.length**a.grid.dim
    return SpectralField(a.grid, coeffs, real=a.real and b.real)


def afg_gamma_norm(pair: ConvPair, oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """``|| |f|^2 * |g|^2 ||_{L^{q/2}}^{1/2}``; the exact norm at q = 2.

    At q = 2 the convolution is nonnegative and its L1 norm is its integral,
    read off the zero coefficient with no quadrature at all.
    """
    F = forward_transform(pair.f.grid, np.abs(pair.f.values()) ** 2)
    G = forward_transform(pair.g.grid, np.abs(pair.g.values()) ** 2)
    conv = convolve(F, G)
    if pair.q == 2:
        mass = abs(conv.coeff_at((0,) * pair.f.grid.dim)) * pair.f.grid.length ** pair.f.grid.dim
        return float(math.sqrt(mass))
    return float(math.sqrt(lq_norm(conv, pair.q / 2.0, oversample=oversample)))


def afg_bruteforce_hs(pair: ConvPair) -> float:
    """Frobenius norm of the dense discretized operator, continuum-normalized.

    Assembles ``K(x, y) = f(x - y) g(y)`` over all grid pairs; limited to
    small grids by the quadratic memory footprint.
    """
    grid = pair.f.grid
    cells = grid.n**grid.dim
    if cells > BRUTEFORCE_MAX_CELLS:
        raise ResourceError(
            f"grid has {cells} cells, brute-force oracle allows {BRUTEFORCE_MAX_CELLS}"
        )
    fv = pair.f.values().ravel()
    gv = pair.g.values().ravel()
    idx = np.arange(cells)
    if grid.dim == 1:
        diff = (idx[:, None] - idx[None, :]) % grid.n
        K = fv[diff] * gv[None, :]
    else:
        unravel = np.array(np.unravel_index(idx, grid.shape))
        diff_axes = [(unravel[a][:, None] - unravel[a][None, :]) % grid.n
                     for a in range(grid.dim)]
        flat = np.ravel_multi_index(diff_axes, grid.shape)
        K = fv[flat] * gv[None, :]
    return float(np.linalg.norm(K) * grid.cell_measure)


def gamma_young_check(kernel: SpectralField, g: SpectralField, q: float, r: float,
                      eta: float, oversample: int = DEFAULT_OVERSAMPLE):
    """Both sides of the weak-kernel Young inequality and their ratio.

    Requires ``1/q + 1/2 = 1/r + 1/eta`` with all three exponents in
    (2, inf); returns (lhs, rhs, lhs / rhs).
    """
    for name, val in (("q", q), ("r", r), ("eta", eta)):
        if not (2 < val < math.inf):
            raise ValueError(f"{name} must lie in (2, inf), got {val}")
    if abs(1.0 / q + 0.5 - 1.0 / r - 1.0 / eta) > 1e-9:
        raise ValueError("exponents must satisfy 1/q + 1/2 = 1/r + 1/eta")
    lhs = afg_gamma_norm(ConvPair(kernel, g, q), oversample=oversample)
    rhs = weak_lp_norm(kernel, r) * lq_norm(g, eta, oversample=oversample)
    ratio = lhs / rhs if rhs > 0 else math.inf if lhs > 0 else 0.0
    return lhs, rhs, ratio


def mg_sobolev_gamma_norm(g: SpectralField, s: float, q: float,
                          oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """Mean-square norm of multiplication by g into smoothness -s.

    Smoothing by the Bessel potential turns the multiplication operator into
    a convolution pair with the periodized kernel, so this is the afg norm
    with that kernel.
    """
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    kernel = bessel_kernel(g.grid, s)
    return afg_gamma_norm(ConvPair(kernel, g, q), oversample=oversample)


def schatten_heat_norm(g: SpectralField, t: float) -> float:
    """Hilbert-Schmidt norm of the heat semigroup composed with M_g.

    ``(sum_k exp(-2 lambda_k t) ||g e_k||_2^2)^{1/2}`` over the frequency
    lattice with ``lambda_k = 4 pi^2 |k/L|^2``; since ``|e_k| = 1`` this is
    ``||g||_2`` times the square root of the lattice theta sum.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    lam = 4.0 * np.pi**2 * g.grid.k2_physical()
    theta = float(np.sum(np.exp(-2.0 * lam * t)))
    return lq_norm(g, 2) * math.sqrt(theta)


def heat_kernel_field(grid: Grid, t: float) -> SpectralField:
    """Periodic heat kernel at time t (unit mass, coefficients exp(-lambda_k t))."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    lam = 4.0 * np.pi**2 * grid.k2_physical()
    coeffs = np.exp(-lam * t) / grid.length**grid.dim
    return SpectralField(grid, coeffs.astype(np.complex128), real=True)


@dataclass(frozen=True)
class EndpointReport:
    """Best-constant estimate over a probe family, next to the predicted norm."""

    constants: tuple       # per probe level, increasing refinement
    estimate: float        # last-level value, a lower bound of the supremum
    reference: float       # the norm the constant should be comparable to


def endpoint_checks(f: SpectralField, mode: str, exponent: float, levels: int = 6,
                    oversample: int = DEFAULT_OVERSAMPLE) -> EndpointReport:
    """Estimate the best constant of an endpoint inequality from probe inputs.

    ``mode="eta2"``: probes are square roots of shrinking unit-mass
    mollifiers and the constant should track ``||f||_{L^q}`` (q = exponent).
    ``mode="etaq"``: probes are positive plateaus of growing support and the
    constant should track ``||f||_{L^2}`` (eta = exponent).
    """
    if exponent < 2:
        raise ValueError(f"exponent must be >= 2, got {exponent}")
    grid = f.grid
    coords = [np.broadcast_to(x, grid.shape) for x in grid.coords()]
    constants = []
    if mode == "eta2":
        q = exponent
        for j in range(levels):
            width = grid.length / 2.0**j
            G = bump_values(coords, grid.length / 2.0, width)
            mass = np.sum(G) * grid.cell_measure
            if mass <= 0 or np.count_nonzero(G) < 8:
                break
            gj = forward_transform(grid, np.sqrt(G / mass))
            constants.append(afg_gamma_norm(ConvPair(f, gj, q), oversample=oversample))
        reference = lq_norm(f, q, oversample=oversample)
    elif mode == "etaq":
        eta = exponent
        for j in range(levels - 1, -1, -1):
            radius = grid.length / 2.0 ** (j + 1)
            r = np.zeros(grid.shape)
            for x in coords:
                centered = np.minimum(np.abs(x - grid.length / 2.0),
                                      grid.length - np.abs(x - grid.length / 2.0))
                r = np.maximum(r, centered)
            gj = forward_transform(grid, np.where(r <= radius, 1.0, 0.0))
            denom = lq_norm(gj, eta, oversample=1)
            if denom == 0:
                continue
            val = afg_gamma_norm(ConvPair(f, gj, eta), oversample=1) / denom
            constants.append(val)
        reference = lq_norm(f, 2)
    else:
        raise ValueError(f"mode must be 'eta2' or 'etaq', got {mode!r}")
    estimate = constants[-1] if constants else 0.0
    return EndpointReport(tuple(constants), float(estimate), float(reference))
