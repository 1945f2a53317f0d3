"""Sampling of truncated Gaussian series and estimators of their mean-square norm.

A series spec bundles an orthonormal system, a coloring, an optional
multiplier field g, a truncation N and the target smoothness/integrability
(s, q).  Three estimators are provided: Monte Carlo averaging of squared
norms, the deterministic square-function surrogate, and the exact
Hilbert-Schmidt value at q = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, SpectralField, forward_transform, upsampled_values
from .norms import DEFAULT_OVERSAMPLE, bessel_multiplier, lq_norm
from .rng import complex_standard_normal, stream
from .systems import Coloring

from concurrent.futures import ThreadPoolExecutor


@dataclass
class SeriesSpec:
    """Truncated Gaussian series ``g * sum_{n<=N} gamma_n mu_n f_n``."""

    grid: Grid
    system: object
    coloring: Coloring
    N: int
    s: float
    q: float
    g: SpectralField = None
    _terms: np.ndarray = None   # cached term samples, filled lazily

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("truncation N must be >= 1")
        if self.g is not None and self.g.grid != self.grid:
            raise ValueError("multiplier field lives on a different grid")

    @property
    def real(self) -> bool:
        return bool(self.system.real) and (self.g is None or self.g.real)


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate of the mean squared norm.

    ``mean`` averages the squared norms (the quantity the mean-square
    estimate controls); ``mean_norm`` averages the norms themselves and is
    reported alongside.
    """

    mean: float
    stderr: float
    samples: int
    seed: int
    mean_norm: float = 0.0


def term_values(spec: SeriesSpec) -> np.ndarray:
    """Stacked physical samples of ``g mu_n f_n``, shape (N, *grid); cached."""
    if spec._terms is not None:
        return spec._terms
    idxs = spec.system.indices(spec.N)
    mus = np.array([spec.coloring.value(idx, i + 1) for i, idx in enumerate(idxs)])
    dtype = float if spec.system.real else complex
    terms = np.empty((spec.N,) + spec.grid.shape, dtype=dtype)
    for i, idx in enumerate(idxs):
        terms[i] = spec.system.render(idx, spec.grid).values()
    terms = terms * mus.reshape((-1,) + (1,) * spec.grid.dim)
    if spec.g is not None:
        terms = terms * spec.g.values()
    spec._terms = terms
    return terms


def sample_series(spec: SeriesSpec, rng: np.random.Generator) -> SpectralField:
    """One realization of the series; complex Gaussians unless the system is real."""
    terms = term_values(spec)
    gam = _draw_gammas(rng, spec.N, real=spec.system.real)
    vals = np.tensordot(gam, terms, axes=(0, 0))
    return forward_transform(spec.grid, vals)


def _draw_gammas(rng: np.random.Generator, n: int, real: bool) -> np.ndarray:
    if real:
        return rng.standard_normal(n)
    return complex_standard_normal(rng, (n,))


def mc_gamma_norm(spec: SeriesSpec, M: int, seed: int, workers: int = 1,
                  oversample: int = DEFAULT_OVERSAMPLE) -> MCEstimate:
    """Estimate ``E ||.||^2`` in the (-s, q) norm over M independent samples.

    Sample i draws from the stream derived from (seed, i), so the estimate
    is independent of worker count and chunking; the reduction uses exact
    summation.
    """
    if M < 2:
        raise ValueError("need at least M = 2 samples")
    terms = term_values(spec)
    flat = terms.reshape(spec.N, -1)
    norms_sq = np.empty(M)
    chunk = 256

    def run_chunk(lo: int) -> None:
        hi = min(lo + chunk, M)
        gam = np.stack([_draw_gammas(stream(seed, i), spec.N, spec.system.real)
                        for i in range(lo, hi)])
        vals = (gam @ flat).reshape((hi - lo,) + spec.grid.shape)
        coeffs = np.fft.fftn(vals, axes=tuple(range(1, spec.grid.dim + 1)))
        coeffs /= spec.grid.n ** spec.grid.dim
        coeffs *= bessel_multiplier(spec.grid, -spec.s)
        norms_sq[lo:hi] = _batch_lq_norm(spec.grid, coeffs, spec.q, oversample) ** 2

    starts = list(range(0, M, chunk))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, starts))
    else:
        for lo in starts:
            run_chunk(lo)

    mean = math.fsum(norms_sq) / M
    var = math.fsum((x - mean) ** 2 for x in norms_sq) / (M - 1)
    stderr = math.sqrt(var / M)
    mean_norm = math.fsum(np.sqrt(norms_sq)) / M
    return MCEstimate(mean=mean, stderr=stderr, samples=M, seed=seed, mean_norm=mean_norm)


def _batch_lq_norm(grid: Grid, coeffs: np.ndarray, q: float, oversample: int) -> np.ndarray:
    """L^q norms of a stack of coefficient arrays (leading batch axis)."""
    if q == 2:
        axes = tuple(range(1, coeffs.ndim))
        return np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=axes) * grid.length**grid.dim)
    batch = coeffs.shape[0]
    out = np.empty(batch)
    for b in range(batch):
        out[b] = lq_norm(SpectralField(grid, coeffs[b]), q, oversample=oversample)
    return out


def hs_gamma_norm_exact(spec: SeriesSpec) -> float:
    """Exact mean-square norm at q = 2 through the Hilbert-Schmidt identity.

    ``(sum_n mu_n^2 ||(1-Lap)^{-s/2}(g f_n)||_2^2)^{1/2}``, evaluated
    spectrally term by term.
    """
    if spec.q != 2:
        raise ValueError("the Hilbert-Schmidt identity requires q = 2")
    terms = term_values(spec)
    coeffs = np.fft.fftn(terms, axes=tuple(range(1, spec.grid.dim + 1)))
    coeffs /= spec.grid.n ** spec.grid.dim
    coeffs *= bessel_multiplier(spec.grid, -spec.s)
    total = np.sum(np.abs(coeffs) ** 2) * spec.grid.length**spec.grid.dim
    return float(np.sqrt(total))


def sq_function_gamma_norm(spec: SeriesSpec, oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """Deterministic square-function surrogate of the mean-square norm.

    ``|| (sum_n |(1-Lap)^{-s/2}(g mu_n f_n)|^2)^{1/2} ||_{L^q}`` -- equal to
    the Hilbert-Schmidt value at q = 2 and to the true mean-square norm up
    to q-dependent constants otherwise.
    """
    terms = term_values(spec)
    return sq_function_from_terms(spec.grid, terms, spec.s, spec.q, oversample=oversample)


def sq_function_from_terms(grid: Grid, terms: np.ndarray, s: float, q: float,
                           oversample: int = DEFAULT_OVERSAMPLE,
                           chunk: int = 64) -> float:
    """Square-function norm for explicit term samples of shape (N, *grid)."""
    if not (1 < q < math.inf):
        raise ValueError(f"q must lie in (1, inf), got {q}")
    mult = bessel_multiplier(grid, -s)
    fine_shape = tuple(n * oversample for n in grid.shape)
    acc = np.zeros(fine_shape)
    axes = tuple(range(1, grid.dim + 1))
    for lo in range(0, terms.shape[0], chunk):
        block = terms[lo:lo + chunk]
        coeffs = np.fft.fftn(block, axes=axes) / grid.n**grid.dim
        coeffs *= mult
        for c in coeffs:
            fine = upsampled_values(SpectralField(grid, c), oversample)
            acc += np.abs(fine) ** 2
    cell = (grid.length / (grid.n * oversample)) ** grid.dim
    return float((np.sum(acc ** (q / 2.0)) * cell) ** (1.0 / q))


@dataclass(frozen=True)
class GrowthReport:
    label: str      # convergent | divergent | log_divergent | inconclusive
    slope: float    # log-log slope
    r2: float       # of the log-log fit
    log_r2: float   # of the value-versus-log-N fit
    npoints: int


def classify_growth(points, slope_tol: float = 0.05, r2_min: float = 0.9,
                    log_r2_min: float = 0.95, increment_ratio: float = 0.9) -> GrowthReport:
    """Classify a norm sequence over geometric truncations N.

    Divergent when the log-log slope exceeds ``slope_tol`` with a good fit;
    convergent when successive increments decay geometrically; log-divergent
    when the values are affine in log N with small log-log slope.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 4:
        raise ValueError("need at least 4 points to classify growth")
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(ns <= 0):
        raise ValueError("truncations must be positive")

    scale = np.max(np.abs(vs))
    if scale == 0:
        return GrowthReport("convergent", 0.0, 1.0, 1.0, len(pts))

    log_n = np.log(ns)
    with np.errstate(divide="ignore"):
        log_v = np.log(np.maximum(vs, 1e-300))
    slope, r2 = _linfit(log_n, log_v)
    _, log_r2 = _linfit(log_n, vs)

    if slope > slope_tol and r2 > r2_min:
        return GrowthReport("divergent", slope, r2, log_r2, len(pts))

    inc = np.diff(vs)
    if np.all(np.abs(inc) <= 1e-12 * scale):
        return GrowthReport("convergent", slope, r2, log_r2, len(pts))
    if np.all(inc > 0) and np.all(inc[1:] < increment_ratio * inc[:-1]):
        return GrowthReport("convergent", slope, r2, log_r2, len(pts))

    if log_r2 > log_r2_min and slope <= slope_tol:
        return GrowthReport("log_divergent", slope, r2, log_r2, len(pts))
    return GrowthReport("inconclusive", slope, r2, log_r2, len(pts))


def _linfit(x: np.ndarray, y: np.ndarray):
    """Least-squares slope and R^2 of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    syy = np.sum((y - ym) ** 2)
    slope = sxy / sxx
    r2 = 1.0 if syy == 0 else (sxy * sxy) / (sxx * syy)
    return float(slope), float(r2)
