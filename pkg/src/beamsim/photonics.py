"""Spectral filtering, intensity correlations, and photon counting.

Filtering is done in the amplitude domain with a causal single-pole response
whose squared modulus is exactly the unit-peak Lorentzian power transmission;
it is applied over the whole trace via the DFT (circular convolution), so a
leading margin of ~10/fwhm should be discarded from any analysis of filtered
traces (the g2 and sampling helpers take a burn_in argument for this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .fieldgen import (
    BeamModelSpec,
    FieldTrace,
    generate_ensemble,
    trace_rng,
    _CHANNEL_COUNTS,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FilterSpec:
    """Single-pole Lorentzian filter: center detuning and FWHM of |t(w)|^2."""

    center_detuning: float   # rad/s
    fwhm: float              # rad/s

    def __post_init__(self):
        if not (math.isfinite(self.fwhm) and self.fwhm > 0):
            raise DomainError(f"fwhm must be finite and > 0, got {self.fwhm!r}")
        if not math.isfinite(self.center_detuning):
            raise DomainError("center_detuning must be finite")

    def amplitude_response(self, omega) -> np.ndarray:
        """t(w) = (d/2) / ((d/2) - i (w - w_f)); |t|^2 is Lorentzian of FWHM d."""
        half = self.fwhm / 2.0
        return half / (half - 1j * (np.asarray(omega, dtype=float) - self.center_detuning))

    def suggested_burn_in(self) -> float:
        """Analysis margin covering the filter transient, 10/fwhm seconds."""
        return 10.0 / self.fwhm


def apply_filter(trace: FieldTrace, filt: FilterSpec) -> FieldTrace:
    """Multiply the trace's frequency components by the filter's amplitude response."""
    if filt.fwhm >= math.pi / trace.dt:
        raise ConfigurationError(
            f"filter fwhm {filt.fwhm:g} not resolvable on a grid with dt={trace.dt:g} "
            f"(need fwhm < pi/dt = {math.pi / trace.dt:g})"
        )
    omega = TWO_PI * np.fft.fftfreq(trace.n_samples, d=trace.dt)
    modes = np.fft.ifft(trace.samples) * filt.amplitude_response(omega)
    return FieldTrace(samples=np.fft.fft(modes), dt=trace.dt, model=trace.model,
                      master_seed=trace.master_seed, trace_index=trace.trace_index)


@dataclass(frozen=True)
class G2Estimate:
    """Normalized intensity autocorrelation on a lag grid."""

    tau: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    ensemble_size: int

    def value_at(self, tau: float) -> float:
        i = int(np.argmin(np.abs(self.tau - tau)))
        return float(self.values[i])

    def to_csv(self, path, metadata: dict | None = None) -> None:
        from .spectral import _write_csv

        _write_csv(path, ["tau", "g2", "std_error"],
                   zip(self.tau, self.values, self.std_errors),
                   metadata, {"ensemble_size": self.ensemble_size})


def _burn_in_samples(dt: float, n: int, burn_in: float) -> int:
    skip = int(round(burn_in / dt))
    if skip >= n - 1:
        raise DomainError("burn_in leaves no samples to analyse")
    return skip


def g2(traces: Iterable[FieldTrace], tau_grid: Sequence[float],
       burn_in: float = 0.0) -> G2Estimate:
    """g2(tau) = <I(t) I(t+tau)> / <I>^2 averaged over time and ensemble.

    The ratio is pooled (ensemble-mean numerator over squared ensemble-mean
    flux); standard errors come from the per-trace scatter via the delta
    method.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    per_num = None   # per trace, per tau: time-mean of I(t) I(t+tau)
    per_mean = []    # per trace: time-mean intensity
    dt = n = None
    lags = None
    for trace in traces:
        if dt is None:
            dt, n = trace.dt, trace.n_samples
            lags = np.rint(tau_grid / dt).astype(int)
            if np.any(np.abs(lags * dt - tau_grid) > 1e-6 * max(dt, float(np.max(tau_grid, initial=dt)))):
                raise DomainError("tau_grid values must be multiples of dt")
            per_num = [[] for _ in lags]
        elif trace.n_samples != n or abs(trace.dt - dt) > 1e-12 * dt:
            raise DomainError("ensemble traces must share one time grid")
        skip = _burn_in_samples(dt, n, burn_in)
        intensity = trace.intensity()[skip:]
        if np.max(lags, initial=0) >= intensity.size:
            raise DomainError("tau exceeds the analysable trace length")
        per_mean.append(intensity.mean())
        for slot, lag in enumerate(lags):
            if lag == 0:
                per_num[slot].append(np.mean(intensity * intensity))
            else:
                per_num[slot].append(np.mean(intensity[:-lag] * intensity[lag:]))
    if per_num is None:
        raise DomainError("empty ensemble")
    count = len(per_mean)
    y = np.asarray(per_mean)
    ybar = y.mean()
    values = np.empty(len(lags))
    std_errors = np.empty(len(lags))
    for slot in range(len(lags)):
        x = np.asarray(per_num[slot])
        xbar = x.mean()
        values[slot] = xbar / ybar**2
        if count > 1:
            var_x = np.var(x, ddof=1) / count
            var_y = np.var(y, ddof=1) / count
            cov_xy = np.cov(x, y, ddof=1)[0, 1] / count
            var_g = (var_x / ybar**4
                     + 4.0 * xbar**2 / ybar**6 * var_y
                     - 4.0 * xbar / ybar**5 * cov_xy)
            std_errors[slot] = math.sqrt(max(var_g, 0.0))
        else:
            std_errors[slot] = 0.0
    return G2Estimate(tau=np.asarray(lags) * dt, values=values,
                      std_errors=std_errors, ensemble_size=count)


@dataclass(frozen=True)
class PhotonCountRecord:
    """Photon counts drawn window by window from a trace's flux."""

    window_T: float
    counts: np.ndarray
    mean: float
    fano: float


def fano_factor(counts) -> float:
    """Sample variance over sample mean of a count sequence."""
    counts = np.asarray(counts, dtype=float)
    if counts.size < 2:
        raise DomainError("need at least 2 count windows")
    mean = counts.mean()
    if mean <= 0:
        raise DomainError("zero mean count; Fano factor undefined")
    return float(np.var(counts, ddof=1) / mean)


def photon_counts(trace: FieldTrace, window_T: float,
                  rng: np.random.Generator | None = None) -> PhotonCountRecord:
    """Partition the trace into windows and draw Poisson counts with per-window
    mean equal to the trapezoidal integral of |alpha|^2.

    With no explicit rng, a counting stream tied to the trace's seed and index
    is used, so records are reproducible.
    """
    if window_T < trace.dt:
        raise ConfigurationError("window_T must be >= dt")
    if trace.duration < 10.0 * window_T:
        raise ConfigurationError("trace must be at least 10 windows long")
    w = int(round(window_T / trace.dt))
    if abs(w * trace.dt - window_T) > 1e-9 * window_T:
        raise ConfigurationError("window_T must be an integer multiple of dt")
    intensity = trace.intensity()
    n_windows = (trace.n_samples - 1) // w
    idx = np.arange(n_windows + 1) * w
    cum = np.concatenate([[0.0], np.cumsum((intensity[1:] + intensity[:-1]) * (trace.dt / 2.0))])
    means = cum[idx[1:]] - cum[idx[:-1]]
    if rng is None:
        rng = trace_rng(trace.master_seed, trace.trace_index, _CHANNEL_COUNTS)
    counts = rng.poisson(means)
    mean = float(counts.mean())
    fano = float(np.var(counts, ddof=1) / mean) if mean > 0 else 0.0
    return PhotonCountRecord(window_T=window_T, counts=counts, mean=mean, fano=fano)


def intensity_samples(traces: Iterable[FieldTrace], spacing: float,
                      burn_in: float = 0.0) -> np.ndarray:
    """Instantaneous intensities sampled every `spacing` seconds past burn_in,
    pooled over the ensemble (for distribution comparisons)."""
    out = []
    for trace in traces:
        skip = _burn_in_samples(trace.dt, trace.n_samples, burn_in)
        step = max(1, int(round(spacing / trace.dt)))
        out.append(trace.intensity()[skip::step])
    if not out:
        raise DomainError("empty ensemble")
    return np.concatenate(out)


@dataclass(frozen=True)
class SweepRow:
    fwhm: float
    g2_zero: float
    std_error: float
    ensemble_size: int


def filtered_laser_sweep(model: BeamModelSpec, fwhm_list: Sequence[float],
                         dt: float, n: int, master_seed: int, n_traces: int,
                         center_detuning: float = 0.0) -> list[SweepRow]:
    """g2(0) of the filtered beam for each filter width, sharing one ensemble.

    Each trace is transformed once; every filter reuses the transform.  The
    per-filter burn-in is max(10/fwhm, 10/Gamma) and must leave at least half
    of the trace for analysis.
    """
    filters = [FilterSpec(center_detuning=center_detuning, fwhm=f) for f in fwhm_list]
    for f in filters:
        if f.fwhm >= math.pi / dt:
            raise ConfigurationError(f"filter fwhm {f.fwhm:g} not resolvable at dt={dt:g}")
        burn = max(f.suggested_burn_in(), 10.0 / model.gamma)
        if burn > 0.5 * n * dt:
            raise ConfigurationError(
                f"trace too short for fwhm={f.fwhm:g}: burn-in {burn:g} exceeds half the duration"
            )
    omega = TWO_PI * np.fft.fftfreq(n, d=dt)
    responses = [f.amplitude_response(omega) for f in filters]
    burns = [max(f.suggested_burn_in(), 10.0 / model.gamma) for f in filters]
    skips = [int(round(b / dt)) for b in burns]

    per_num = [[] for _ in filters]
    per_mean = [[] for _ in filters]
    for trace in generate_ensemble(model, dt, n, master_seed, n_traces):
        modes = np.fft.ifft(trace.samples)
        for slot, resp in enumerate(responses):
            filtered = np.fft.fft(modes * resp)
            intensity = (filtered.real**2 + filtered.imag**2)[skips[slot]:]
            per_mean[slot].append(intensity.mean())
            per_num[slot].append(np.mean(intensity * intensity))
    rows = []
    for slot, f in enumerate(filters):
        x = np.asarray(per_num[slot])
        y = np.asarray(per_mean[slot])
        xbar, ybar = x.mean(), y.mean()
        value = xbar / ybar**2
        count = x.size
        if count > 1:
            var_x = np.var(x, ddof=1) / count
            var_y = np.var(y, ddof=1) / count
            cov_xy = np.cov(x, y, ddof=1)[0, 1] / count
            var_g = (var_x / ybar**4
                     + 4.0 * xbar**2 / ybar**6 * var_y
                     - 4.0 * xbar / ybar**5 * cov_xy)
            err = math.sqrt(max(var_g, 0.0))
        else:
            err = 0.0
        rows.append(SweepRow(fwhm=f.fwhm, g2_zero=float(value),
                             std_error=err, ensemble_size=count))
    return rows
