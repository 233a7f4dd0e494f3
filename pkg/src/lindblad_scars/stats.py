"""
Ensemble statistics for per-eigenstate observables.

The workflow for a partial-size observable ``y`` against ``x = Re(lambda) - center``:

1. bin ``x`` in equal-width bins and take the mean of the nonzero ``y`` per
   bin (bins with fewer than ``min_count`` samples are dropped);
2. fit a smooth ``M(x)`` (polynomial, degree <= 3) piecewise on the fit
   window, then fit ``sigma(x) = a + b|x| + c x`` to the per-bin RMS of
   ``y - M(x)``;
3. normalize ``(y - M(x)) / sigma(x)`` and study the tails of the pooled
   distribution with a log-log power-law fit and the excess kurtosis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class BinSpec:
    n_bins: int = 100
    range: tuple[float, float] | None = None
    min_count: int = 1000

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("need at least two bins")
        if self.range is not None and not self.range[0] < self.range[1]:
            raise ValueError("bin range must be increasing")


@dataclass(frozen=True)
class BinnedMoments:
    centers: np.ndarray
    counts: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def usable(self, min_count: int) -> np.ndarray:
        return self.counts >= max(min_count, 2)


def binned_moments(x: np.ndarray, y: np.ndarray, spec: BinSpec) -> BinnedMoments:
    x, y = np.asarray(x, float), np.asarray(y, float)
    lo, hi = spec.range if spec.range is not None else (x.min(), x.max())
    edges = np.linspace(lo, hi, spec.n_bins + 1)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, spec.n_bins - 1)
    inside = (x >= lo) & (x <= hi)
    idx, yy = idx[inside], y[inside]
    counts = np.bincount(idx, minlength=spec.n_bins)
    s1 = np.bincount(idx, yy, minlength=spec.n_bins)
    s2 = np.bincount(idx, yy * yy, minlength=spec.n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = s1 / counts
        var = (s2 - counts * mean**2) / (counts - 1)
    std = np.sqrt(np.clip(var, 0, None))
    return BinnedMoments((edges[:-1] + edges[1:]) / 2, counts, mean, std)


@dataclass(frozen=True)
class SmoothPiece:
    lo: float
    hi: float
    mean_coeffs: np.ndarray  # ascending powers of x
    sigma_coeffs: np.ndarray  # (a, b, c) in a + b|x| + c x


@dataclass(frozen=True)
class SmoothFit:
    """Piecewise smooth mean ``M`` and width ``sigma`` of an observable versus ``x``."""

    center: float
    window: tuple[float, float]
    pieces: tuple[SmoothPiece, ...] = field(repr=False)

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        bounds = np.array([p.hi for p in self.pieces[:-1]])
        return np.searchsorted(bounds, x, side="right")

    def M(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        k = self._piece_index(x)
        out = np.empty_like(x)
        for i, p in enumerate(self.pieces):
            m = k == i
            out[m] = np.polynomial.polynomial.polyval(x[m], p.mean_coeffs)
        return out

    def sigma(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        k = self._piece_index(x)
        out = np.empty_like(x)
        for i, p in enumerate(self.pieces):
            m = k == i
            a, b, c = p.sigma_coeffs
            out[m] = a + b * np.abs(x[m]) + c * x[m]
        return out

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return (x >= self.window[0]) & (x <= self.window[1])


def _lstsq(A: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    return coef


def fit_smooth(
    x: np.ndarray,
    y: np.ndarray,
    *,
    center: float = 0.0,
    window: float = 0.2,
    breaks: tuple[float, ...] = (0.02,),
    spec: BinSpec | None = None,
    mean_degree: int = 3,
    odd_mean: bool = False,
) -> SmoothFit:
    """Fit ``M`` and ``sigma`` to binned moments of ``y`` on ``|Re(lambda) - center| < window``.

    ``x`` is the raw ``Re(lambda)``; the returned fit is a function of the
    offset from ``center``. ``breaks`` split the window into pieces symmetric
    about zero. Zero values of ``y`` should be removed by the caller.
    """
    spec = spec or BinSpec()
    off = np.asarray(x, float) - center
    y = np.asarray(y, float)
    brange = spec.range if spec.range is not None else (-window, window)
    bm = binned_moments(off, y, BinSpec(spec.n_bins, brange, spec.min_count))
    ok = bm.usable(spec.min_count) & np.isfinite(bm.mean)
    if ok.sum() < 2:
        raise FitError(f"only {int(ok.sum())} bins reach {spec.min_count} samples")
    cuts = sorted({-b for b in breaks} | set(breaks))
    edges = [-window] + [c for c in cuts if -window < c < window] + [window]
    means = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = ok & (bm.centers >= lo) & (bm.centers <= hi)
        xc, w = bm.centers[sel], bm.counts[sel].astype(float)
        npts = int(sel.sum())
        if npts < 2:
            raise FitError(f"piece [{lo}, {hi}] has {npts} usable bins")
        if odd_mean:
            powers = [p for p in (1, 3) if p <= mean_degree][: max(1, npts - 1)]
        else:
            powers = list(range(min(mean_degree, npts - 1) + 1))
        A = np.column_stack([xc**p for p in powers])
        c = _lstsq(A, bm.mean[sel], w)
        mean_coeffs = np.zeros(max(powers) + 1)
        mean_coeffs[powers] = c
        means.append(SmoothPiece(lo, hi, mean_coeffs, np.array([1.0, 0.0, 0.0])))
    # widths from the spread about M itself; the per-bin standard deviation
    # would also pick up the slope of M across each bin
    provisional = SmoothFit(center, (-window, window), tuple(means))
    inside = provisional.contains(off)
    resid = np.full_like(y, np.nan)
    resid[inside] = y[inside] - provisional.M(off[inside])
    rm = binned_moments(off[inside], resid[inside] ** 2, BinSpec(spec.n_bins, brange, spec.min_count))
    rms = np.sqrt(rm.mean)
    pieces = []
    for piece in means:
        lo, hi = piece.lo, piece.hi
        sel = ok & (bm.centers >= lo) & (bm.centers <= hi)
        xc, w = bm.centers[sel], bm.counts[sel].astype(float)
        npts = int(sel.sum())
        B = np.column_stack([np.ones_like(xc), np.abs(xc), xc])[:, : min(3, npts)]
        sc = np.zeros(3)
        sc[: B.shape[1]] = _lstsq(B, rms[sel], w)
        grid = np.linspace(lo, hi, 201)
        if np.any(sc[0] + sc[1] * np.abs(grid) + sc[2] * grid <= 0):
            raise FitError(f"fitted width is not positive on [{lo}, {hi}]")
        pieces.append(SmoothPiece(lo, hi, piece.mean_coeffs, sc))
    return SmoothFit(center, (-window, window), tuple(pieces))


def normalize_split_size(re_lambda: np.ndarray, values: np.ndarray, fit: SmoothFit) -> np.ndarray:
    """``(y - M) / sigma`` for the samples inside the fit window (others are dropped)."""
    off = np.asarray(re_lambda, float) - fit.center
    inside = fit.contains(off)
    off, y = off[inside], np.asarray(values, float)[inside]
    sig = fit.sigma(off)
    if np.any(sig <= 0):
        raise FitError("non-positive width inside the window")
    return (y - fit.M(off)) / sig


def window_mask(re_lambda: np.ndarray, center: float, lo: float, hi: float) -> np.ndarray:
    """``lo <= |Re(lambda) - center| < hi``."""
    d = np.abs(np.asarray(re_lambda, float) - center)
    return (d >= lo) & (d < hi)


def fraction_vanishing(values, tol: float = 1e-8) -> float:
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValueError("no samples")
    return float(np.mean(np.abs(v) < tol))


def imaginary_fraction(values, shift: float = 0.0, tol: float = 1e-8) -> float:
    """Fraction of eigenvalues of ``L + shift`` with ``|Re| < tol``."""
    v = np.asarray(getattr(values, "values", values), dtype=complex)
    return float(np.mean(np.abs((v + shift).real) < tol))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2

    @property
    def density(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / (total * np.diff(self.edges)) if total else np.zeros(len(self.counts))


def histogram(values, bins: int = 60) -> Histogram:
    v = np.asarray(values, float)
    counts, edges = np.histogram(v, bins=bins, range=(v.min(), v.max()) if v.size else (0, 1))
    return Histogram(edges, counts)


@dataclass(frozen=True)
class PowerLawFit:
    """Tail density ``a / x^b`` for ``x = |normalized value|`` on ``fit_range``."""

    a: float
    b: float
    fit_range: tuple[float, float]
    goodness: float
    n_points: int
    kurtosis: float


def histogram_powerlaw(values, bins: int = 60, tail_quantile: float = 0.9, tail_bins: int = 15) -> tuple[PowerLawFit, Histogram]:
    """Fit ``a / x^b`` to the log-binned density of ``|values|`` above the tail quantile.

    The density is normalized over all samples, so ``a`` is comparable between
    windows. ``goodness`` is the RMS residual of the log-log fit. The excess
    (Fisher) kurtosis of the signed values is reported alongside.
    """
    v = np.asarray(values, float)
    v = v[np.isfinite(v)]
    if v.size < 10:
        raise FitError("need at least 10 samples")
    hist = histogram(v, bins)
    x = np.abs(v)
    x0 = float(np.quantile(x, tail_quantile))
    x1 = float(x.max())
    if not 0 < x0 < x1:
        raise FitError("degenerate tail")
    edges = np.geomspace(x0, x1, tail_bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    dens = counts / (x.size * np.diff(edges))
    mid = np.sqrt(edges[:-1] * edges[1:])
    ok = counts > 0
    if ok.sum() < 5:
        raise FitError(f"only {int(ok.sum())} populated tail bins")
    lx, ly = np.log(mid[ok]), np.log(dens[ok])
    A = np.column_stack([np.ones_like(lx), -lx])
    (loga, b), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ np.array([loga, b])
    fit = PowerLawFit(
        float(np.exp(loga)),
        float(b),
        (x0, x1),
        float(np.sqrt(np.mean(resid**2))),
        int(ok.sum()),
        float(sps.kurtosis(v, fisher=True)),
    )
    return fit, hist
