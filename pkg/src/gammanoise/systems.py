"""Orthonormal systems, noise colorings, and the weighted sequence norm.

Systems enumerate their members in a fixed, documented order so a truncation
parameter N always selects the same family.  Sup-norms are carried as
metadata; the synthetic-growth system is metadata only and cannot be
rendered.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Grid, SpectralField, field_from_function, forward_transform, mode_field


class NonEvaluableError(TypeError):
    """Raised when asked to render a system that only carries sup-norm data."""


class IndexRangeError(IndexError):
    """Raised when a truncation exceeds the system's index set."""


# ---------------------------------------------------------------------------
# bump building blocks


def bump_profile(t: np.ndarray) -> np.ndarray:
    """C-infinity bump ``exp(1 - 1/(1 - t^2))`` on ``|t| < 1``, zero outside."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    tt = np.where(inside, t, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - tt**2))[inside]
    return out


def bump_values(coords: list, center, width: float) -> np.ndarray:
    """Product bump of support width ``width`` per axis centered at ``center``."""
    if np.isscalar(center):
        center = (center,) * len(coords)
    out = 1.0
    for x, c in zip(coords, center):
        out = out * bump_profile(2.0 * (x - c) / width)
    return out


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.asarray(t, dtype=float)
    def f(u):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    a = f(t)
    return a / (a + f(1.0 - t))


def plateau_values(coords: list, center, inner: float, outer: float) -> np.ndarray:
    """Smooth plateau equal to 1 on the inner box, 0 outside the outer box."""
    if np.isscalar(center):
        center = (center,) * len(coords)
    out = 1.0
    ramp = (outer - inner) / 2.0
    for x, c in zip(coords, center):
        r = np.abs(x - c)
        out = out * smoothstep((outer / 2.0 - r) / ramp)
    return out


# ---------------------------------------------------------------------------
# orthonormal systems


class FourierSystem:
    """Standard Fourier modes ``e_k`` on the unit torus, sup-norms all one.

    Enumerated by increasing ``|k|^2`` with lexicographic tie-break, so the
    first N indices always fill a centered ball of the frequency lattice.
    """

    evaluable = True
    real = False

    def __init__(self, dim: int):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
        self.dim = dim
        self._cache: list = []

    def indices(self, count: int) -> list:
        while len(self._cache) < count:
            self._grow(count)
        return self._cache[:count]

    def _grow(self, count: int) -> None:
        box = 1
        while True:
            rng = range(-box, box + 1)
            ks = [k for k in itertools.product(rng, repeat=self.dim)
                  if sum(x * x for x in k) <= box * box]
            if len(ks) >= count:
                ks.sort(key=lambda k: (sum(x * x for x in k), k))
                self._cache = ks
                return
            box *= 2

    def ball_indices(self, radius: int) -> list:
        """All lattice frequencies with ``|k| <= radius``."""
        rng = range(-radius, radius + 1)
        ks = [k for k in itertools.product(rng, repeat=self.dim)
              if sum(x * x for x in k) <= radius * radius]
        ks.sort(key=lambda k: (sum(x * x for x in k), k))
        return ks

    def sup_norm(self, idx) -> float:
        return 1.0

    def render(self, idx, grid: Grid) -> SpectralField:
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match system")
        if grid.length != 1.0:
            raise ValueError("Fourier modes are orthonormal on the unit torus only")
        return mode_field(grid, idx)


class HaarSystem:
    """Periodic Haar wavelets on the unit torus.

    Indices are ``(sigma, j, k)`` with orientation ``sigma`` a nonzero 0/1
    tuple, level ``j >= 0`` and position ``k`` in ``{0..2^j-1}^d``; flattened
    level-major.  The wavelet at level j has sup-norm ``2^(j d / 2)``.
    """

    evaluable = True
    real = True

    def __init__(self, dim: int, j_min: int = 0, j_max: int = 6):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
        if j_min < 0 or j_max < j_min:
            raise ValueError("need 0 <= j_min <= j_max on the unit torus")
        self.dim = dim
        self.j_min = j_min
        self.j_max = j_max
        self.orientations = [s for s in itertools.product((0, 1), repeat=dim) if any(s)]

    def level_indices(self, j: int) -> list:
        pos = itertools.product(range(2**j), repeat=self.dim)
        return [(sigma, j, k) for k in pos for sigma in self.orientations]

    def indices(self, count: int) -> list:
        out = []
        for j in range(self.j_min, self.j_max + 1):
            out.extend(self.level_indices(j))
            if len(out) >= count:
                return out[:count]
        if len(out) < count:
            raise IndexRangeError(
                f"requested {count} Haar indices, levels [{self.j_min}, {self.j_max}] "
                f"hold only {len(out)}"
            )
        return out[:count]

    def size(self) -> int:
        per_level = len(self.orientations)
        return sum(per_level * 2 ** (j * self.dim) for j in range(self.j_min, self.j_max + 1))

    def sup_norm(self, idx) -> float:
        _, j, _ = idx
        return 2.0 ** (j * self.dim / 2.0)

    def render(self, idx, grid: Grid) -> SpectralField:
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match system")
        sigma, j, k = idx
        if np.isscalar(k):
            k = (k,) * 1
        vals = np.ones(grid.shape)
        for ax, (s, ki) in enumerate(zip(sigma, k)):
            x = np.broadcast_to(grid.coords()[ax], grid.shape)
            # dyadic rescale onto [0,1) with periodic wrap
            t = np.mod(2.0**j * np.mod(x / grid.length, 1.0) - ki, 2.0**j)
            on_support = t < 1.0
            if s == 0:
                axis_vals = np.where(on_support, 1.0, 0.0)
            else:
                axis_vals = np.where(on_support, np.where(t < 0.5, 1.0, -1.0), 0.0)
            vals = vals * axis_vals
        vals = vals * 2.0 ** (j * self.dim / 2.0) / grid.length ** (self.dim / 2.0)
        return forward_transform(grid, vals)


class SyntheticGrowthSystem:
    """Sup-norm model ``c n^((d-1)/(2d))`` for eigenfunction-like growth.

    Carries weights only; rendering raises ``NonEvaluableError``.
    """

    evaluable = False
    real = True

    def __init__(self, dim: int, c: float = 1.0):
        self.dim = dim
        self.c = c

    def indices(self, count: int) -> list:
        return list(range(1, count + 1))

    def sup_norm(self, idx) -> float:
        n = int(idx)
        return self.c * n ** ((self.dim - 1) / (2.0 * self.dim))

    def render(self, idx, grid: Grid) -> SpectralField:
        raise NonEvaluableError("synthetic-growth system carries sup-norms only")


class ShiftedBumpSystem:
    """Integer translates ``phi(. - k)`` of one smooth bump, a disjoint family.

    The bump sits inside the unit cell, is L2-normalized numerically, and is
    translated to every lattice point with ``1 <= |k|_inf <= extent``.  Meant
    for large periodic boxes whose length exceeds ``2 * extent + 1``.
    """

    evaluable = True
    real = True

    def __init__(self, dim: int, extent: int, width: float = 0.5):
        if extent < 1:
            raise ValueError("extent must be >= 1")
        if not 0 < width < 1:
            raise ValueError("width must lie in (0, 1)")
        self.dim = dim
        self.extent = extent
        self.width = width
        self._norm_const = self._compute_norm_const()

    def _compute_norm_const(self) -> float:
        # L2 mass of the product bump on a fine reference grid per axis
        m = 4096
        t = (np.arange(m) + 0.5) / m
        one_d = bump_profile(2.0 * (t - 0.5) / self.width)
        mass_1d = float(np.sum(one_d**2) / m)
        return mass_1d ** (-self.dim / 2.0)

    def indices(self, count: int) -> list:
        ks = self.all_indices()
        if count > len(ks):
            raise IndexRangeError(
                f"requested {count} translates, extent {self.extent} holds {len(ks)}"
            )
        return ks[:count]

    def all_indices(self) -> list:
        rng = range(-self.extent, self.extent + 1)
        ks = [k for k in itertools.product(rng, repeat=self.dim) if any(k)]
        ks.sort(key=lambda k: (max(abs(x) for x in k), k))
        return ks

    def sup_norm(self, idx) -> float:
        return self._norm_const

    def render(self, idx, grid: Grid) -> SpectralField:
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match system")
        if grid.length < 2 * self.extent + 2:
            raise ValueError(
                f"box length {grid.length} too small for extent {self.extent}"
            )
        if np.isscalar(idx):
            idx = (idx,)

        def fn(*coords):
            out = 1.0
            for x, ki in zip(coords, idx):
                t = np.mod(x - ki - 0.5, grid.length)
                t = np.where(t > grid.length / 2, t - grid.length, t)
                out = out * bump_profile(2.0 * t / self.width)
            return self._norm_const * out

        return field_from_function(grid, fn)


# ---------------------------------------------------------------------------
# colorings


@dataclass(frozen=True)
class Coloring:
    """Scalar damping ``mu_n`` of noise modes, keyed by the system's indices.

    kind is one of ``power_law`` (needs ordinal position), ``matern``
    (frequency tuples), ``block`` (frequency tuples), ``haar``
    ((sigma, j, k) triples) or ``explicit`` (ordinal position).
    """

    kind: str
    params: dict = dc_field(default_factory=dict)

    @staticmethod
    def power_law(alpha: float) -> "Coloring":
        if alpha <= 0:
            raise ValueError("power-law exponent must be positive")
        return Coloring("power_law", {"alpha": alpha})

    @staticmethod
    def matern(alpha: float) -> "Coloring":
        if alpha <= 0:
            raise ValueError("Matern exponent must be positive")
        return Coloring("matern", {"alpha": alpha})

    @staticmethod
    def block_indicator(N: int) -> "Coloring":
        if N < 1:
            raise ValueError("block level must be >= 1")
        return Coloring("block", {"N": N})

    @staticmethod
    def haar(alpha: float, beta: float, dim: int) -> "Coloring":
        if alpha < 0:
            raise ValueError("haar coloring needs alpha >= 0")
        if beta <= dim / 2.0:
            raise ValueError(f"haar coloring needs beta > d/2 = {dim/2}")
        return Coloring("haar", {"alpha": alpha, "beta": beta, "dim": dim})

    @staticmethod
    def explicit(values) -> "Coloring":
        vals = tuple(float(v) for v in values)
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise ValueError("explicit coloring entries must be finite and nonnegative")
        return Coloring("explicit", {"values": vals})

    @staticmethod
    def constant(c: float, count: int) -> "Coloring":
        return Coloring.explicit([c] * count)

    def value(self, idx, ordinal: int) -> float:
        """Weight for structured index ``idx`` at 1-based position ``ordinal``."""
        if self.kind == "power_law":
            return float(ordinal) ** (-self.params["alpha"])
        if self.kind == "matern":
            k2 = _freq_sq(idx)
            return (1.0 + 4.0 * np.pi**2 * k2) ** (-self.params["alpha"] / 2.0)
        if self.kind == "block":
            return 1.0 if in_frequency_block(idx, self.params["N"]) else 0.0
        if self.kind == "haar":
            sigma, j, k = idx
            k2 = sum(int(x) ** 2 for x in (k if not np.isscalar(k) else (k,)))
            return (1.0 + k2) ** (-self.params["beta"] / 2.0) * 2.0 ** (-j * self.params["alpha"])
        if self.kind == "explicit":
            vals = self.params["values"]
            if ordinal > len(vals):
                raise IndexRangeError(f"explicit coloring has {len(vals)} entries, asked for {ordinal}")
            return vals[ordinal - 1]
        raise ValueError(f"unknown coloring kind {self.kind!r}")

    def weights(self, system, N: int) -> np.ndarray:
        idxs = system.indices(N)
        return np.array([self.value(idx, i + 1) for i, idx in enumerate(idxs)])


def _freq_sq(idx) -> float:
    if np.isscalar(idx):
        return float(idx) ** 2
    return float(sum(int(x) ** 2 for x in idx))


def in_frequency_block(k, N: int) -> bool:
    """Membership in the dyadic block ``2^N <= k_i <= 3 * 2^(N-1)`` per axis."""
    if np.isscalar(k):
        k = (k,)
    lo, hi = 2**N, 3 * 2 ** (N - 1)
    return all(lo <= ki <= hi for ki in k)


def frequency_block(N: int, dim: int) -> list:
    lo, hi = 2**N, 3 * 2 ** (N - 1)
    return list(itertools.product(range(lo, hi + 1), repeat=dim))


# ---------------------------------------------------------------------------
# weighted sequence norm and the Haar criticality sums


def ell_zeta_weighted_norm(mu: Coloring, system, zeta: float, N: int) -> float:
    """Truncated weighted sequence norm with the system's squared sup-norms.

    ``(sum_{n<=N} |mu_n|^zeta ||f_n||_inf^2)^(1/zeta)`` for finite zeta;
    ``max_{n<=N} |mu_n|`` when zeta is infinite.
    """
    if zeta < 2:
        raise ValueError(f"zeta must lie in [2, inf], got {zeta}")
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    idxs = system.indices(N)
    mus = np.array([mu.value(idx, i + 1) for i, idx in enumerate(idxs)])
    if math.isinf(zeta):
        return float(np.max(np.abs(mus)))
    w = np.array([system.sup_norm(idx) for idx in idxs])
    return float(np.sum(np.abs(mus) ** zeta * w**2) ** (1.0 / zeta))


def rank_one_mu_norm(h_l2: float, h_sup: float, zeta: float) -> float:
    """Weighted norm of the single-entry coloring of a rank-one operator.

    Normalizing the range function to unit L2 norm leaves
    ``||h||_2^(1-2/zeta) ||h||_inf^(2/zeta)``; for infinite zeta only the L2
    factor survives.
    """
    if math.isinf(zeta):
        return h_l2
    return h_l2 ** (1.0 - 2.0 / zeta) * h_sup ** (2.0 / zeta)


def haar_lattice_sums(alpha: float, beta: float, zeta: float, dim: int,
                      j_values) -> np.ndarray:
    """Partial sums ``sum_{|j|<=J} sum_k |mu_{j,k}|^zeta 2^(j d)`` over levels.

    Pure lattice arithmetic over all integer levels and positions (no
    evaluability needed); the position sum converges iff
    ``beta * zeta > d``.  Affine growth in J signals the critical coloring
    ``zeta = d / alpha``; any other zeta grows exponentially.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    if beta * zeta <= dim:
        raise ValueError(f"need beta * zeta > d for a finite position sum, got {beta * zeta} <= {dim}")
    kmass = _lattice_bessel_sum(beta * zeta, dim)
    out = []
    for J in j_values:
        J = int(J)
        js = np.arange(-J, J + 1, dtype=float)
        out.append(kmass * float(np.sum(2.0 ** (js * (dim - alpha * zeta)))))
    return np.array(out)


def _lattice_bessel_sum(exponent: float, dim: int) -> float:
    """``sum_{k in Z^d} (1 + |k|^2)^(-exponent/2)``.

    Direct summation over a centered box plus an integral estimate of the
    tail; relative accuracy is ample for the divergence diagnostics, which
    only use this value as a J-independent constant.
    """
    R = {1: 200_000, 2: 1_024, 3: 96}[dim]
    k = np.arange(-R, R + 1, dtype=float)
    if dim == 1:
        core = float(np.sum((1.0 + k**2) ** (-exponent / 2.0)))
    elif dim == 2:
        k2 = k[:, None] ** 2 + k[None, :] ** 2
        core = float(np.sum((1.0 + k2) ** (-exponent / 2.0)))
    else:
        core = 0.0
        for kz in k:
            k2 = k[:, None] ** 2 + k[None, :] ** 2 + kz**2
            core += float(np.sum((1.0 + k2) ** (-exponent / 2.0)))
    # tail beyond the box, by a radial integral with surface area of the sphere
    X = R + 0.5
    surface = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[dim]
    tail = surface * X ** (dim - exponent) / (exponent - dim)
    return core + tail
