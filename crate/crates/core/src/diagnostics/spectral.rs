//! Frequency-domain view of the transition amplitudes.
//!
//! The finite-interval transform A~(w) = Int_0^T exp(+i w t) A(t) dt is
//! evaluated on the natural discrete frequencies w_j = 2 pi j / T,
//! j = 0..N/2, and reported against the dimensionless frequency
//! w~ = w T = 2 pi j. On that axis the spectrum of a fixed schedule shape
//! is independent of T, which is what makes the support cutoff a
//! T-invariant property of the Hamiltonian path. No window is applied: the
//! finite interval is the definition.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::SpectrumPath;

/// Bins with |A~| below this fraction of the peak count as empty when
/// locating the support cutoff.
pub const CUTOFF_THRESHOLD_FRACTION: f64 = 0.01;

/// |A~| sampled on w~_j = 2 pi j, j = 0..N/2.
#[derive(Debug, Clone)]
pub struct AmplitudeSpectrum {
    omega_tilde: Vec<f64>,
    values: Vec<Complex64>,
    total_time: f64,
}

impl AmplitudeSpectrum {
    pub fn omega_tilde(&self) -> &[f64] {
        &self.omega_tilde
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn total_time(&self) -> f64 {
        self.total_time
    }
    pub fn bins(&self) -> usize {
        self.values.len()
    }
    /// Spacing of the dimensionless frequency grid (2 pi).
    pub fn bin_width(&self) -> f64 {
        2.0 * std::f64::consts::PI
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    /// Nearest-bin lookup of |A~| at a dimensionless frequency.
    pub fn abs_at(&self, omega_tilde: f64) -> f64 {
        let j = (omega_tilde / self.bin_width()).round().max(0.0) as usize;
        self.values[j.min(self.values.len() - 1)].norm()
    }
}

/// Transforms grid samples A(t_k), k = 0..N, into the half-spectrum
/// A~(w_j) = sum_k w_k exp(+i w_j t_k) A(t_k) dt with trapezoid end
/// weights, via an FFT over the first N samples plus the endpoint terms.
pub fn amplitude_spectrum(samples: &[Complex64], total_time: f64) -> AmplitudeSpectrum {
    let n = samples.len() - 1;
    assert!(n >= 2, "need at least three grid samples");
    assert!(total_time > 0.0);
    let dt = total_time / n as f64;

    let mut buffer: Vec<rustfft::num_complex::Complex<f64>> = samples[..n]
        .iter()
        .map(|z| rustfft::num_complex::Complex::new(z.re, z.im))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buffer);

    // exp(+i w_j T) = 1 on every bin, so the trapezoid correction is the
    // same for all j: half the first sample out, half the last sample in.
    let end_correction = 0.5 * (samples[n] - samples[0]);
    let bins = n / 2 + 1;
    let mut omega_tilde = Vec::with_capacity(bins);
    let mut values = Vec::with_capacity(bins);
    for (j, b) in buffer.iter().take(bins).enumerate() {
        omega_tilde.push(2.0 * std::f64::consts::PI * j as f64);
        values.push((Complex64::new(b.re, b.im) + end_correction) * dt);
    }
    AmplitudeSpectrum {
        omega_tilde,
        values,
        total_time,
    }
}

/// Whether any spectral weight survived the threshold, and where it ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFrequency {
    /// Largest w~ whose bin still exceeds the threshold; everything beyond
    /// is below threshold_fraction of the peak.
    pub omega_tilde_c: f64,
    pub all_below_threshold: bool,
}

pub fn cutoff_frequency(spectrum: &AmplitudeSpectrum, threshold_fraction: f64) -> CutoffFrequency {
    let peak = spectrum.max_abs();
    if peak <= 0.0 {
        return CutoffFrequency {
            omega_tilde_c: 0.0,
            all_below_threshold: true,
        };
    }
    let threshold = threshold_fraction * peak;
    let mut last = 0usize;
    for (j, v) in spectrum.values().iter().enumerate() {
        if v.norm() > threshold {
            last = j;
        }
    }
    CutoffFrequency {
        omega_tilde_c: spectrum.omega_tilde()[last],
        all_below_threshold: false,
    }
}

/// Resonance indicator T max_k |A~(w_nm(t_k)) E_nm(t_k)|: the transform is
/// sampled by nearest bin along the mean-gap curve through the
/// time-frequency plane. The lookup uses |w_nm| since the half-spectrum
/// carries only non-negative frequencies. Order-of-magnitude only; its
/// trend with T separates resonant from smooth evolutions.
pub fn dominant_path_estimate(
    spectrum: &AmplitudeSpectrum,
    path: &SpectrumPath,
    n: usize,
    m: usize,
) -> f64 {
    let t_total = spectrum.total_time();
    let mut worst: f64 = 0.0;
    for k in 0..path.len() {
        let omega_tilde = path.mean_gap(k, n, m).abs() * t_total;
        let value = spectrum.abs_at(omega_tilde) * path.gap(k, n, m).abs();
        worst = worst.max(value);
    }
    t_total * worst
}
