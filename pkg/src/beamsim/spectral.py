"""Spectral and correlation estimators for field-trace ensembles.

The frequency grid is always the DFT grid of the trace (spacing
2 pi / duration); no windowing or tapering is applied, so the finite-record
periodogram ordinate at detuning w is

    u~(w) = (1/sqrt(T)) sum_j dt exp(i w t_j) alpha_j

and satisfies the discrete Parseval identity
sum_l |u~(w_l)|^2 dw/(2 pi) = (1/T) sum_j |alpha_j|^2 dt exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .fieldgen import FieldTrace, lorentzian

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# result containers

@dataclass(frozen=True)
class SpectrumEstimate:
    """Frequency-indexed photon flux per unit frequency (dimensionless)."""

    grid: np.ndarray         # detunings, rad/s, strictly increasing
    values: np.ndarray       # >= 0
    std_errors: np.ndarray   # >= 0 (zero for single-shot periodograms)
    ensemble_size: int

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if np.any(self.values < 0) or np.any(self.std_errors < 0):
            raise DomainError("values and std_errors must be non-negative")

    def value_at(self, detuning: float) -> float:
        return float(self.values[_nearest_index(self.grid, detuning)])

    def to_csv(self, path, metadata: dict | None = None) -> None:
        _write_csv(path, ["detuning", "value", "std_error"],
                   zip(self.grid, self.values, self.std_errors),
                   metadata, {"ensemble_size": self.ensemble_size})

    def to_json_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "std_errors": self.std_errors.tolist(),
            "ensemble_size": self.ensemble_size,
        }


@dataclass(frozen=True)
class CorrelationEstimate:
    """Cross-mode correlations E[u~(k) u~*(k')] for a list of detuning pairs."""

    pairs: list          # [(k_detuning, kprime_detuning), ...]
    values: np.ndarray   # complex
    std_errors: np.ndarray
    ensemble_size: int

    def to_csv(self, path, metadata: dict | None = None) -> None:
        rows = [(k, kp, v.real, v.imag, s) for (k, kp), v, s in
                zip(self.pairs, self.values, self.std_errors)]
        _write_csv(path, ["k_detuning", "kprime_detuning", "re", "im", "std_error"],
                   rows, metadata, {"ensemble_size": self.ensemble_size})


@dataclass(frozen=True)
class TestReport:
    """Outcome of a statistical test at a fixed significance level."""

    statistic: float
    p_value: float
    passed: bool
    significance: float
    ensemble_size: int


@dataclass(frozen=True)
class StationarityReport:
    """Windowed-intensity stationarity diagnostic (two permutation tests).

    p_position tests homogeneity of the windowed mean intensity across window
    positions; p_independence tests whether window intensities within a trace
    behave like independent draws from the per-position ensembles (a pulsed /
    record-length-dependent field fails this even when its ensemble is
    position-homogeneous).
    """

    position_statistic: float
    p_position: float
    independence_statistic: float
    p_independence: float
    passed: bool
    significance: float
    n_traces: int
    n_windows: int

    @property
    def p_value(self) -> float:
        return min(self.p_position, self.p_independence)


# ---------------------------------------------------------------------------
# helpers

def _write_csv(path, columns, rows, metadata, extra) -> None:
    meta = dict(metadata or {})
    meta.update(extra or {})
    with open(path, "w", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def detuning_grid(trace: FieldTrace) -> np.ndarray:
    """Sorted DFT detuning grid of a trace."""
    return np.sort(TWO_PI * np.fft.fftfreq(trace.n_samples, d=trace.dt))


def _nearest_index(grid: np.ndarray, detuning: float) -> int:
    i = int(np.argmin(np.abs(grid - detuning)))
    spacing = grid[1] - grid[0]
    if abs(grid[i] - detuning) > 1e-6 * max(abs(detuning), spacing):
        raise DomainError(
            f"detuning {detuning:g} is not on the trace grid (nearest bin {grid[i]:g})"
        )
    return i


def _fft_bin(trace: FieldTrace, detuning: float) -> int:
    """Unshifted DFT bin index for an on-grid detuning."""
    duration = trace.duration
    l = int(round(detuning * duration / TWO_PI))
    if abs(l * TWO_PI / duration - detuning) > 1e-6 * max(abs(detuning), TWO_PI / duration):
        raise DomainError(f"detuning {detuning:g} is not on the trace grid")
    n = trace.n_samples
    if not (-(n // 2) <= l <= (n - 1) // 2):
        raise DomainError(f"detuning {detuning:g} beyond the Nyquist band")
    return l % n


def _amplitude_transform(trace: FieldTrace) -> np.ndarray:
    """u~(w_l) in numpy fft ordering; |u~|^2 is the periodogram."""
    return math.sqrt(trace.duration) * np.fft.ifft(trace.samples)


def periodogram(trace: FieldTrace) -> SpectrumEstimate:
    """Single-shot periodogram |u~(w)|^2 on the trace's DFT grid."""
    u = _amplitude_transform(trace)
    p = u.real**2 + u.imag**2
    order = np.argsort(TWO_PI * np.fft.fftfreq(trace.n_samples, d=trace.dt))
    grid = TWO_PI * np.fft.fftfreq(trace.n_samples, d=trace.dt)[order]
    return SpectrumEstimate(grid=grid, values=p[order],
                            std_errors=np.zeros_like(p), ensemble_size=1)


def _check_same_grid(trace: FieldTrace, dt: float, n: int) -> None:
    if trace.n_samples != n or abs(trace.dt - dt) > 1e-12 * dt:
        raise DomainError("ensemble traces must share one time grid")


def spectrum(traces: Iterable[FieldTrace]) -> SpectrumEstimate:
    """Ensemble-averaged periodogram with per-bin Monte Carlo standard errors."""
    total = None
    total_sq = None
    count = 0
    dt = n = None
    for trace in traces:
        if total is None:
            dt, n = trace.dt, trace.n_samples
            total = np.zeros(n)
            total_sq = np.zeros(n)
        else:
            _check_same_grid(trace, dt, n)
        u = _amplitude_transform(trace)
        p = u.real**2 + u.imag**2
        total += p
        total_sq += p * p
        count += 1
    if count < 2:
        raise DomainError("spectrum needs at least 2 traces")
    mean = total / count
    var = np.maximum(total_sq / count - mean**2, 0.0) * count / (count - 1)
    stderr = np.sqrt(var / count)
    unsorted_grid = TWO_PI * np.fft.fftfreq(n, d=dt)
    order = np.argsort(unsorted_grid)
    return SpectrumEstimate(grid=unsorted_grid[order], values=mean[order],
                            std_errors=stderr[order], ensemble_size=count)


def periodogram_bin_values(traces: Iterable[FieldTrace], detuning: float) -> np.ndarray:
    """Single-shot periodogram value at one detuning bin, per trace."""
    values = []
    dt = n = None
    bin_index = None
    for trace in traces:
        if bin_index is None:
            dt, n = trace.dt, trace.n_samples
            bin_index = _fft_bin(trace, detuning)
        else:
            _check_same_grid(trace, dt, n)
        u = _amplitude_transform(trace)[bin_index]
        values.append(u.real**2 + u.imag**2)
    return np.asarray(values)


def periodogram_distribution_test(traces: Iterable[FieldTrace], detuning: float,
                                  significance: float = 1e-3) -> TestReport:
    """Kolmogorov-Smirnov test of single-shot periodogram values in one bin
    against an exponential law with mean equal to the ensemble average."""
    from scipy import stats

    values = periodogram_bin_values(traces, detuning)
    if values.size < 1000:
        raise DomainError(f"need >= 1000 traces, got {values.size}")
    mean = float(values.mean())
    if mean <= 0:
        raise DomainError("degenerate (zero-power) bin")
    result = stats.kstest(values, "expon", args=(0.0, mean))
    return TestReport(statistic=float(result.statistic), p_value=float(result.pvalue),
                      passed=bool(result.pvalue > significance),
                      significance=significance, ensemble_size=values.size)


def cross_mode_correlation(traces: Iterable[FieldTrace],
                           pairs: Sequence[tuple[float, float]]) -> CorrelationEstimate:
    """Ensemble mean of u~(k) u~*(k') for each detuning pair, with standard errors."""
    if not pairs:
        raise DomainError("need at least one detuning pair")
    products = None
    dt = n = None
    bins = None
    for trace in traces:
        if products is None:
            dt, n = trace.dt, trace.n_samples
            bins = [(_fft_bin(trace, k), _fft_bin(trace, kp)) for k, kp in pairs]
            products = [[] for _ in pairs]
        else:
            _check_same_grid(trace, dt, n)
        u = _amplitude_transform(trace)
        for slot, (bk, bkp) in enumerate(bins):
            products[slot].append(u[bk] * np.conj(u[bkp]))
    if products is None or len(products[0]) < 2:
        raise DomainError("need at least 2 traces")
    count = len(products[0])
    values = np.array([np.mean(p) for p in products])
    std_errors = np.array([
        math.sqrt((np.var(np.real(p), ddof=1) + np.var(np.imag(p), ddof=1)) / count)
        for p in products
    ])
    return CorrelationEstimate(pairs=list(pairs), values=values,
                               std_errors=std_errors, ensemble_size=count)


def predicted_cross_mode_correlation(nu: float, gamma: float, duration: float,
                                     k_detuning: float, kprime_detuning: float) -> complex:
    """Leading-order finite-record prediction for E[u~(k) u~*(k')] of a
    non-periodic thermal or phase-diffusing laser field:

        delta_{k,k'} nu f(k) - nu (2/(T Gamma)) f(k) f(k') [1 - k' k (2/Gamma)^2]

    with detunings measured from the carrier and f the unit-peak Lorentzian.
    """
    f = lorentzian(k_detuning, gamma)
    fp = lorentzian(kprime_detuning, gamma)
    diag = nu * f if k_detuning == kprime_detuning else 0.0
    correction = nu * (2.0 / (duration * gamma)) * f * fp * (
        1.0 - kprime_detuning * k_detuning * (2.0 / gamma) ** 2
    )
    return complex(diag - correction)


def windowed_mean_intensities(traces: Iterable[FieldTrace], n_windows: int) -> np.ndarray:
    """Matrix W[r, w]: mean photon flux of trace r in window w (equal windows,
    trailing remainder dropped)."""
    if n_windows < 4:
        raise DomainError("need n_windows >= 4")
    rows = []
    dt = n = None
    for trace in traces:
        if dt is None:
            dt, n = trace.dt, trace.n_samples
            if n < n_windows:
                raise DomainError("trace shorter than n_windows samples")
        else:
            _check_same_grid(trace, dt, n)
        w = n // n_windows
        intensity = trace.intensity()[: w * n_windows]
        rows.append(intensity.reshape(n_windows, w).mean(axis=1))
    if not rows:
        raise DomainError("empty ensemble")
    return np.asarray(rows)


def _anova_f(W: np.ndarray) -> float:
    """One-way F statistic with window positions as groups, traces as replicates."""
    r, k = W.shape
    col_means = W.mean(axis=0)
    grand = W.mean()
    ss_between = r * np.sum((col_means - grand) ** 2)
    ss_within = np.sum((W - col_means) ** 2)
    if ss_within <= 0:
        return 0.0
    return (ss_between / (k - 1)) / (ss_within / (k * (r - 1)))


def stationarity_test(traces: Iterable[FieldTrace], n_windows: int,
                      significance: float = 1e-3, n_permutations: int = 4999,
                      permutation_seed: int = 20210607) -> StationarityReport:
    """Windowed-intensity stationarity diagnostic.

    Part 1 (position homogeneity): one-way ANOVA F across window positions,
    null distribution by permuting window labels within each trace.
    Part 2 (window independence): variance across traces of the per-trace mean
    intensity, null distribution by shuffling each window column across traces
    (two-sided).  A mixture of pulses has a deterministic per-trace total flux
    and lands in the far left tail of part 2.
    """
    W = windowed_mean_intensities(traces, n_windows)
    r, k = W.shape
    if r < 8:
        raise DomainError("need at least 8 traces")

    if np.ptp(W) == 0:
        # constant intensity everywhere (ideal laser): trivially stationary
        return StationarityReport(0.0, 1.0, 0.0, 1.0, True, significance, r, k)

    rng = np.random.default_rng(permutation_seed)

    f_obs = _anova_f(W)
    d_obs = float(np.var(W.mean(axis=1), ddof=1))

    f_ge = 0
    d_ge = 0
    d_le = 0
    for _ in range(n_permutations):
        # permute window labels within each trace
        perm_rows = rng.permuted(W, axis=1)
        if _anova_f(perm_rows) >= f_obs:
            f_ge += 1
        # shuffle each window column across traces
        perm_cols = rng.permuted(W, axis=0)
        d_star = float(np.var(perm_cols.mean(axis=1), ddof=1))
        if d_star >= d_obs:
            d_ge += 1
        if d_star <= d_obs:
            d_le += 1
    p_position = (1 + f_ge) / (n_permutations + 1)
    p_independence = min(1.0, 2.0 * min((1 + d_ge), (1 + d_le)) / (n_permutations + 1))
    passed = (p_position > significance) and (p_independence > significance)
    return StationarityReport(f_obs, p_position, d_obs, p_independence,
                              passed, significance, r, k)


def autocorrelation(traces: Iterable[FieldTrace], lag_indices: Sequence[int]):
    """Direct lag correlation E[alpha*(t) alpha(t+tau)] at tau = lag * dt.

    Returns (lags_seconds, complex values, std_errors, ensemble_size); the
    time average runs over each trace, the error over the ensemble scatter.
    """
    lag_indices = list(lag_indices)
    per_trace = [[] for _ in lag_indices]
    dt = n = None
    for trace in traces:
        if dt is None:
            dt, n = trace.dt, trace.n_samples
            if max(lag_indices) >= n:
                raise DomainError("lag exceeds trace length")
        else:
            _check_same_grid(trace, dt, n)
        s = trace.samples
        for slot, lag in enumerate(lag_indices):
            if lag == 0:
                per_trace[slot].append(np.mean(s.real**2 + s.imag**2) + 0.0j)
            else:
                per_trace[slot].append(np.mean(np.conj(s[:-lag]) * s[lag:]))
    count = len(per_trace[0])
    if count < 2:
        raise DomainError("need at least 2 traces")
    values = np.array([np.mean(p) for p in per_trace])
    std_errors = np.array([
        math.sqrt((np.var(np.real(p), ddof=1) + np.var(np.imag(p), ddof=1)) / count)
        for p in per_trace
    ])
    lags = np.asarray(lag_indices) * dt
    return lags, values, std_errors, count


def estimate_fwhm(est: SpectrumEstimate, smooth_bins: int = 1) -> float:
    """Full width at half maximum of a single-peaked spectrum estimate,
    with linear interpolation of the half-max crossings.

    smooth_bins > 1 applies a centered boxcar of that (odd) width first;
    for noisy ensemble estimates this suppresses the upward bias of the
    raw peak maximum at the cost of a slight smoothing broadening, so keep
    the boxcar much narrower than the line.
    """
    if smooth_bins < 1 or smooth_bins % 2 == 0:
        raise DomainError("smooth_bins must be a positive odd integer")
    v = est.values
    g = est.grid
    if smooth_bins > 1:
        if smooth_bins >= v.size:
            raise DomainError("smooth_bins must be smaller than the grid")
        kernel = np.full(smooth_bins, 1.0 / smooth_bins)
        v = np.convolve(v, kernel, mode="same")
    ipk = int(np.argmax(v))
    half = v[ipk] / 2.0
    # walk outward from the peak to the first crossings
    left = None
    for i in range(ipk, 0, -1):
        if v[i - 1] < half <= v[i]:
            frac = (half - v[i - 1]) / (v[i] - v[i - 1])
            left = g[i - 1] + frac * (g[i] - g[i - 1])
            break
    right = None
    for i in range(ipk, len(v) - 1):
        if v[i + 1] < half <= v[i]:
            frac = (v[i] - half) / (v[i] - v[i + 1])
            right = g[i] + frac * (g[i + 1] - g[i])
            break
    if left is None or right is None:
        raise DomainError("half-max crossings not found; spectrum not single-peaked")
    return float(right - left)


def report_to_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
