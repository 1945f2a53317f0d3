"""Necessity constructions and parameter-boundary sweeps.

Each construction measures both sides of the mean-square bound along a
dyadic scale sweep and fits the growth exponent of their ratio; quadrature
constants land in the regression intercept, the exponents are what the
theory pins down.  Fits carry R^2 and point counts, and anything with
R^2 < 0.9 is reported inconclusive rather than classified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .conditions import ParamTuple, predicted_exponent, sharp_condition
from .grid import Grid, SpectralField, forward_transform, mode_field
from .norms import hsq_norm, lq_norm
from .series import _linfit, sq_function_from_terms
from .systems import (ShiftedBumpSystem, bump_values, frequency_block,
                      plateau_values)

FIT_R2_MIN = 0.9
MARGINAL_EXPONENT = 0.05


@dataclass(frozen=True)
class SweepRecord:
    """One scale point of a two-sided comparison."""

    construction: str
    scale_index: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return math.inf if self.lhs > 0 else 0.0

    def as_row(self) -> dict:
        row = asdict(self)
        row["ratio"] = self.ratio
        return row


@dataclass(frozen=True)
class FitReport:
    exponent: float
    intercept: float
    r2: float
    npoints: int
    predicted: float

    @property
    def conclusive(self) -> bool:
        # a flat ratio has no trend to fit; only trust trends with good fits
        return self.r2 >= FIT_R2_MIN or abs(self.exponent) <= MARGINAL_EXPONENT


def fit_ratio_exponent(records, predicted: float, log_base: float = 2.0) -> FitReport:
    xs = np.array([r.scale_index for r in records], dtype=float)
    ys = np.array([r.ratio for r in records], dtype=float)
    if np.any(ys <= 0):
        raise ValueError("ratio sweep contains nonpositive values")
    slope, r2 = _linfit(xs, np.log(ys) / math.log(log_base))
    intercept = float(np.mean(np.log(ys) / math.log(log_base)) - slope * np.mean(xs))
    return FitReport(slope, intercept, r2, len(records), predicted)


def growth_label(fit: FitReport, tol: float = MARGINAL_EXPONENT) -> str:
    """bounded / divergent / log-divergent / inconclusive from a ratio fit."""
    if abs(fit.exponent) <= tol:
        return "log-divergent"
    if fit.r2 < FIT_R2_MIN:
        return "inconclusive"
    return "divergent" if fit.exponent > 0 else "bounded"


# ---------------------------------------------------------------------------
# frequency-block construction


def block_field(grid: Grid, N: int) -> SpectralField:
    """``g = sum_{n in C_N} e_n`` for the dyadic block C_N."""
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for k in frequency_block(N, grid.dim):
        coeffs[grid.index_of_freq(k)] = 1.0
    return SpectralField(grid, coeffs)


def frequency_block_test(params: ParamTuple, N_range, oversample: int = 2,
                         resolution_margin: int = 3):
    """Diagonal-operator necessity sweep over dyadic frequency blocks.

    lhs is the square-function norm of ``sum_{n in C_N} g e_n`` (the exact
    Hilbert-Schmidt value is recorded alongside when q = 2), rhs is
    ``||g||_eta |C_N|^{1/zeta}``.  Returns the records and the fitted
    exponent of the log2 ratio per block level.
    """
    if params.d > 2:
        raise ValueError("frequency blocks are resource-bounded to d <= 2")
    N_range = sorted(int(N) for N in N_range)
    n = 2 ** (max(N_range) + resolution_margin)
    if params.d == 2 and n > 1024:
        raise ValueError("2-d blocks need N <= 7 to stay within the grid budget")
    grid = Grid(params.d, n)
    records = []
    for N in N_range:
        block = frequency_block(N, params.d)
        g = block_field(grid, N)
        terms = np.empty((len(block),) + grid.shape, dtype=complex)
        gv = g.values()
        for i, k in enumerate(block):
            terms[i] = mode_field(grid, k).values() * gv
        # the square function at q = 2 is the exact Hilbert-Schmidt value
        lhs = sq_function_from_terms(grid, terms, params.s, params.q,
                                     oversample=oversample)
        mu_norm = 1.0 if math.isinf(params.zeta) else len(block) ** (1.0 / params.zeta)
        rhs = lq_norm(g, params.eta, oversample=oversample) * mu_norm
        records.append(SweepRecord("freq_block", N, lhs, rhs))
    fit = fit_ratio_exponent(records, predicted_exponent(params, "freq_block"))
    return records, fit


# ---------------------------------------------------------------------------
# rescaled-bump construction


def rescaled_bump_test(params: ParamTuple, m_range, n: int = 2**14,
                       width: float = 0.25, oversample: int = 4):
    """Rank-one necessity sweep under dyadic shrinking of smooth bumps.

    lhs is ``||g_m h_m||`` in smoothness -s (the exact mean-square norm of
    the rank-one operator), rhs is ``||g_m||_eta`` times the weighted norm
    of the one-entry coloring; the ratio exponent per dyadic shrink is
    fitted against the scaling prediction.
    """
    if params.d != 1:
        raise ValueError("rescaled bumps are implemented for d = 1")
    m_range = sorted(int(m) for m in m_range)
    grid = Grid(params.d, n)
    if n < 2 ** (max(m_range) + 7):
        raise ValueError("grid too coarse to resolve the smallest bump")
    coords = [np.broadcast_to(x, grid.shape) for x in grid.coords()]
    records = []
    for m in m_range:
        w = width * 2.0**-m
        gv = bump_values(coords, w / 2.0, w)
        hv = bump_values(coords, w / 2.0, w)
        gh = forward_transform(grid, gv * hv)
        lhs = hsq_norm(gh, -params.s, params.q, oversample=oversample)
        g_field = forward_transform(grid, gv)
        h_field = forward_transform(grid, hv)
        h2 = lq_norm(h_field, 2)
        hsup = float(np.max(np.abs(hv)))
        if math.isinf(params.zeta):
            mu_norm = h2
        else:
            mu_norm = h2 ** (1.0 - 2.0 / params.zeta) * hsup ** (2.0 / params.zeta)
        rhs = lq_norm(g_field, params.eta, oversample=oversample) * mu_norm
        records.append(SweepRecord("rescaled_bump", m, lhs, rhs))
    fit = fit_ratio_exponent(records, predicted_exponent(params, "rescaled_bump"))
    return records, fit


# ---------------------------------------------------------------------------
# shifted-bump construction (large periodic box)


def shifted_bump_test(params: ParamTuple, N_range, resolution: int = 64,
                      width: float = 0.5, oversample: int = 2):
    """Translate-lattice necessity sweep in the unweighted regime.

    On a periodic box that grows with the lattice extent N, the system is
    the translates of one bump, g is a plateau sum equal to one on every
    translate, and the ratio exponent against ``log N`` is compared with
    the unweighted prediction.
    """
    if params.d != 1:
        raise ValueError("shifted bumps are implemented for d = 1")
    N_range = sorted(int(N) for N in N_range)
    records = []
    measured_g = []
    for N in N_range:
        length = 2.0 ** math.ceil(math.log2(2 * N + 2))
        n = int(length) * resolution
        grid = Grid(params.d, n, length)
        system = ShiftedBumpSystem(params.d, N, width=width)
        idxs = system.all_indices()
        coords = [np.broadcast_to(x, grid.shape) for x in grid.coords()]
        gv = np.zeros(grid.shape)
        for k in idxs:
            centered = np.mod(coords[0] - k[0] - 0.5, length)
            centered = np.where(centered > length / 2, centered - length, centered)
            gv += plateau_values([centered], 0.0, width + 0.1, width + 0.3)
        g = forward_transform(grid, gv)
        terms = np.empty((len(idxs),) + grid.shape)
        for i, k in enumerate(idxs):
            terms[i] = system.render(k, grid).values() * gv
        lhs = sq_function_from_terms(grid, terms, params.s, params.q,
                                     oversample=oversample)
        mu_norm = 1.0 if math.isinf(params.zeta) else len(idxs) ** (1.0 / params.zeta)
        g_eta = lq_norm(g, params.eta, oversample=oversample)
        rhs = g_eta * mu_norm
        records.append(SweepRecord("shifted_bump", math.log2(N), lhs, rhs))
        measured_g.append((N, len(idxs), g_eta))
    fit = fit_ratio_exponent(records, predicted_exponent(params, "shifted_bump"))
    return records, fit, measured_g


# ---------------------------------------------------------------------------
# Dirichlet kernel growth


def dirichlet_field(grid: Grid, N: int) -> SpectralField:
    """``D_N = sum_{|m| <= N} e_m`` on the one-dimensional torus."""
    if grid.dim != 1:
        raise ValueError("Dirichlet kernels live on the circle")
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    k = grid.freq_axis()
    coeffs[np.abs(k) <= N] = 1.0
    return SpectralField(grid, coeffs, real=True)


def dirichlet_norm_test(eta: float, N_range, oversample: int = 4):
    """Fitted growth exponent of ``||D_N||_eta`` against ``2N + 1``.

    The classical rate is ``1 - 1/eta`` for eta in (1, inf); eta = 1 grows
    only logarithmically and is rejected here (the growth classifier flags
    it instead).
    """
    if not (1 < eta < math.inf):
        raise ValueError(f"eta must lie in (1, inf), got {eta}")
    N_range = sorted(int(N) for N in N_range)
    rows = []
    for N in N_range:
        n = max(1024, 2 ** math.ceil(math.log2(8 * (2 * N + 1))))
        grid = Grid(1, n)
        val = lq_norm(dirichlet_field(grid, N), eta, oversample=oversample)
        rows.append((N, 2 * N + 1, val))
    xs = np.log2([r[1] for r in rows])
    ys = np.log2([r[2] for r in rows])
    slope, r2 = _linfit(xs, ys)
    fit = FitReport(slope, float(np.mean(ys) - slope * np.mean(xs)), r2,
                    len(rows), 1.0 - 1.0 / eta)
    return rows, fit


def dirichlet_l1_values(N_range):
    """``||D_N||_1`` values, for feeding the growth classifier."""
    out = []
    for N in sorted(int(N) for N in N_range):
        n = max(1024, 2 ** math.ceil(math.log2(8 * (2 * N + 1))))
        grid = Grid(1, n)
        out.append((2 * N + 1, lq_norm(dirichlet_field(grid, N), 1.0)))
    return out


# ---------------------------------------------------------------------------
# boundary sweep


@dataclass(frozen=True)
class SweepCell:
    params: ParamTuple
    construction: str
    label: str
    exponent: float
    r2: float
    slack: float
    classification: str
    status: str   # ok | failed


def boundary_sweep(tuples, construction: str, scale_range, **kwargs) -> list:
    """Run one construction over a grid of parameter tuples and label each cell.

    Cells that raise are recorded as failed and the sweep continues; the
    label tracks the fitted ratio exponent (bounded / divergent /
    log-divergent / inconclusive).
    """
    runners = {
        "freq_block": lambda p: frequency_block_test(p, scale_range, **kwargs)[:2],
        "rescaled_bump": lambda p: rescaled_bump_test(p, scale_range, **kwargs)[:2],
        "shifted_bump": lambda p: shifted_bump_test(p, scale_range, **kwargs)[:2],
    }
    if construction not in runners:
        raise ValueError(f"unknown construction {construction!r}")
    regime = "unweighted" if construction == "shifted_bump" else "weighted"
    cells = []
    for params in tuples:
        cond = sharp_condition(params, regime)
        try:
            _, fit = runners[construction](params)
            cells.append(SweepCell(params, construction, growth_label(fit),
                                   fit.exponent, fit.r2, cond.slack,
                                   cond.classification, "ok"))
        except Exception:
            cells.append(SweepCell(params, construction, "error", math.nan,
                                   math.nan, cond.slack, cond.classification,
                                   "failed"))
    return cells
