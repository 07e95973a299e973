"""Unit tests for filtering, intensity correlations, and photon counting."""

import math

import numpy as np
import pytest
from scipy import stats

from beamsim import ConfigurationError, DomainError
from beamsim.fieldgen import BeamModelSpec, generate_ensemble, lorentzian
from beamsim.photonics import (
    FilterSpec,
    apply_filter,
    fano_factor,
    filtered_laser_sweep,
    g2,
    intensity_samples,
    photon_counts,
)

THERMAL = BeamModelSpec(family="thermal", nu=100.0, gamma=1.0)
LASER = BeamModelSpec(family="laser", nu=100.0, gamma=1.0)
TWO_PI = 2.0 * math.pi


def thermal_fano_oracle(mean_flux, gamma, window):
    """Fano factor of Poisson counts driven by OU-thermal intensity:
    1 + (2 I / Gamma) [1 - (1 - e^{-Gamma w})/(Gamma w)], from the
    closed-form variance of the integrated intensity."""
    x = gamma * window
    return 1.0 + (2.0 * mean_flux / gamma) * (1.0 - (1.0 - math.exp(-x)) / x)


class TestFilter:
    def test_power_transmission_is_lorentzian(self):
        filt = FilterSpec(center_detuning=0.7, fwhm=2.5)
        omega = TWO_PI * np.fft.fftfreq(4096, d=0.01)
        power = np.abs(filt.amplitude_response(omega)) ** 2
        assert np.max(np.abs(power - lorentzian(omega, 2.5, center=0.7))) < 1e-12

    def test_all_pass_limit(self):
        trace = next(generate_ensemble(THERMAL, 0.002, 100000, 3, 1))
        wide = apply_filter(trace, FilterSpec(0.0, 1000.0 * 1.0))
        rms_in = math.sqrt(np.mean(np.abs(trace.samples) ** 2))
        rms_dev = math.sqrt(np.mean(np.abs(wide.samples - trace.samples) ** 2))
        assert rms_dev < 0.05 * rms_in

    def test_filtering_composes(self):
        trace = next(generate_ensemble(THERMAL, 0.01, 5000, 5, 1))
        filt = FilterSpec(0.0, 2.0)
        twice = apply_filter(apply_filter(trace, filt), filt)
        omega = TWO_PI * np.fft.fftfreq(trace.n_samples, d=trace.dt)
        squared = np.fft.fft(np.fft.ifft(trace.samples)
                             * filt.amplitude_response(omega) ** 2)
        assert np.max(np.abs(twice.samples - squared)) < 1e-12 * math.sqrt(25.0)

    def test_filtered_thermal_peak_density(self):
        # |t|^2 f product: at zero detuning both factors are 1
        duration = 200.0
        vals = []
        for trace in generate_ensemble(THERMAL, 0.01, 20000, 7, 300):
            filtered = apply_filter(trace, FilterSpec(0.0, 1.0))
            u0 = math.sqrt(duration) * np.fft.ifft(filtered.samples)[0]
            vals.append(abs(u0) ** 2)
        vals = np.asarray(vals)
        sigma = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - 100.0) < 3.0 * sigma + 2.0  # finite-record deficit margin

    def test_validation(self):
        with pytest.raises(DomainError):
            FilterSpec(0.0, -1.0)
        trace = next(generate_ensemble(THERMAL, 0.01, 2000, 1, 1))
        with pytest.raises(ConfigurationError):
            apply_filter(trace, FilterSpec(0.0, 1000.0))  # pi/dt ~ 314


class TestG2:
    def test_laser_exactly_one(self):
        est = g2(generate_ensemble(LASER, 0.01, 5000, 11, 10), [0.0, 1.0, 3.0])
        assert np.max(np.abs(est.values - 1.0)) < 1e-12

    def test_thermal_values(self):
        est = g2(generate_ensemble(THERMAL, 0.01, 20000, 13, 400),
                 [0.0, 1.0])
        assert abs(est.values[0] - 2.0) < 3.0 * est.std_errors[0]
        assert abs(est.values[1] - (1.0 + math.exp(-1.0))) < 3.0 * est.std_errors[1]

    def test_siegert_relation(self):
        # g2(tau) - 1 = |g1(tau)|^2 = e^{-Gamma tau} for the OU field
        taus = [0.0, 0.5, 1.0, 2.0, 5.0]
        est = g2(generate_ensemble(THERMAL, 0.01, 20000, 17, 400), taus)
        for tau, value, err in zip(taus, est.values, est.std_errors):
            assert abs(value - (1.0 + math.exp(-tau))) < 3.0 * err

    def test_validation(self):
        with pytest.raises(DomainError):
            g2([], [0.0])
        with pytest.raises(DomainError):
            g2(generate_ensemble(THERMAL, 0.01, 2000, 1, 2), [0.0137])


class TestPhotonCounts:
    def test_laser_fano_is_one(self):
        trace = next(generate_ensemble(LASER, 0.01, 100000, 19, 1))
        record = photon_counts(trace, window_T=1.0)
        # Poisson(25) per window, 1000 windows
        sigma = math.sqrt(2.0 / record.counts.size)
        assert abs(record.fano - 1.0) < 3.0 * sigma + 0.02
        assert record.mean == pytest.approx(25.0, rel=0.05)

    def test_reproducible_without_explicit_rng(self):
        trace = next(generate_ensemble(LASER, 0.01, 2000, 19, 1))
        a = photon_counts(trace, window_T=1.0)
        b = photon_counts(trace, window_T=1.0)
        assert np.array_equal(a.counts, b.counts)

    def test_explicit_rng_override(self):
        trace = next(generate_ensemble(LASER, 0.01, 2000, 19, 1))
        a = photon_counts(trace, window_T=1.0, rng=np.random.default_rng(1))
        b = photon_counts(trace, window_T=1.0, rng=np.random.default_rng(2))
        assert not np.array_equal(a.counts, b.counts)

    def test_thermal_short_window_super_poissonian(self):
        # window much shorter than the coherence time: Fano ~ 1 + counts/window
        counts = []
        for trace in generate_ensemble(THERMAL, 0.01, 20000, 23, 20):
            counts.append(photon_counts(trace, window_T=0.01).counts)
        counts = np.concatenate(counts)
        fano = counts.var(ddof=1) / counts.mean()
        oracle = thermal_fano_oracle(25.0, 1.0, 0.01)  # ~1.25
        assert oracle == pytest.approx(1.0 + 0.25, abs=0.01)
        assert abs(fano - oracle) < 0.1

    def test_thermal_long_window_averages_out(self):
        # many coherence times per window at low flux: Fano approaches 1
        model = BeamModelSpec(family="thermal", nu=0.1, gamma=1.0)
        counts = []
        for trace in generate_ensemble(model, 0.01, 100000, 29, 50):
            counts.append(photon_counts(trace, window_T=100.0).counts)
        counts = np.concatenate(counts)
        fano = counts.var(ddof=1) / counts.mean()
        oracle = thermal_fano_oracle(0.025, 1.0, 100.0)  # ~1.05
        assert abs(fano - oracle) < 0.2
        assert fano < 1.25

    def test_validation(self):
        trace = next(generate_ensemble(LASER, 0.01, 2000, 1, 1))
        with pytest.raises(ConfigurationError):
            photon_counts(trace, window_T=0.005)     # below dt
        with pytest.raises(ConfigurationError):
            photon_counts(trace, window_T=0.0123)    # not a multiple of dt
        with pytest.raises(ConfigurationError):
            photon_counts(trace, window_T=10.0)      # fewer than 10 windows


class TestFanoFactor:
    def test_constant_counts(self):
        assert fano_factor([7, 7, 7, 7]) == 0.0

    def test_poisson_reference(self):
        counts = np.random.default_rng(31).poisson(10.0, 100000)
        assert abs(fano_factor(counts) - 1.0) < 0.02

    def test_validation(self):
        with pytest.raises(DomainError):
            fano_factor([5])
        with pytest.raises(DomainError):
            fano_factor([0, 0, 0])


class TestIntensitySamples:
    def test_laser_constant(self):
        samples = intensity_samples(generate_ensemble(LASER, 0.01, 2000, 1, 3),
                                    spacing=1.0)
        assert samples.size == 3 * 2000 // 100
        assert np.max(np.abs(samples - 25.0)) < 1e-10

    def test_burn_in_skips_leading_samples(self):
        samples = intensity_samples(generate_ensemble(LASER, 0.01, 2000, 1, 1),
                                    spacing=1.0, burn_in=10.0)
        assert samples.size == (2000 - 1000 + 99) // 100


class TestSweep:
    def test_matches_manual_filter_and_g2(self):
        model = BeamModelSpec(family="jittered_laser", nu=100.0, gamma=1.0,
                              jitter_band=100.0, jitter_corr_time=10.0)
        dt, n, seed, n_traces = 1e-3, 50000, 37, 5
        rows = filtered_laser_sweep(model, [2.0], dt, n, seed, n_traces)
        filt = FilterSpec(0.0, 2.0)
        manual = g2((apply_filter(t, filt)
                     for t in generate_ensemble(model, dt, n, seed, n_traces)),
                    [0.0], burn_in=10.0)
        assert rows[0].g2_zero == pytest.approx(manual.values[0], rel=1e-12)
        assert rows[0].ensemble_size == n_traces

    def test_thermal_input_stays_thermal_at_every_width(self):
        # Gaussian fields stay Gaussian under linear filtering
        rows = filtered_laser_sweep(THERMAL, [10.0, 1.0, 0.1], 0.01, 25000, 41, 200)
        for row in rows:
            assert abs(row.g2_zero - 2.0) < max(3.0 * row.std_error, 0.2)

    def test_ideal_laser_monotone_rise(self):
        rows = filtered_laser_sweep(LASER, [100.0, 1.0, 0.1], 0.01, 25000, 43, 200)
        values = [r.g2_zero for r in rows]
        assert abs(values[0] - 1.0) < 0.1
        assert values[0] < values[1] < values[2]
        assert 1.6 < values[2] < 2.3

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            filtered_laser_sweep(LASER, [1000.0], 0.01, 25000, 1, 2)  # unresolvable
        with pytest.raises(ConfigurationError):
            filtered_laser_sweep(LASER, [0.01], 0.01, 25000, 1, 2)    # burn-in too long


class TestNarrowFilterUniversality:
    def test_filtered_laser_matches_filtered_thermal(self):
        # delta-omega = Gamma/100: intensities sampled 10/delta-omega apart
        # are indistinguishable between the two sources
        filt = FilterSpec(0.0, 0.01)
        dt, n = 0.01, 300000  # duration 3000
        spacing = burn = 1000.0
        pools = {}
        for name, model in (("laser", LASER), ("thermal", THERMAL)):
            filtered = (apply_filter(t, filt)
                        for t in generate_ensemble(model, dt, n, 47, 150))
            pools[name] = intensity_samples(filtered, spacing=spacing, burn_in=burn)
        assert pools["laser"].size >= 300
        ks = stats.ks_2samp(pools["laser"], pools["thermal"])
        assert ks.pvalue > 1e-3
