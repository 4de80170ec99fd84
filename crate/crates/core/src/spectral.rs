//! Orthonormal DFT/IDFT and the half-spectrum packing for real signals.
//!
//! A real length-`N` signal (`N` even) packs into `n = N/2 + 1` complex
//! coefficients; the remaining bins are conjugate-determined. Both transform
//! directions carry the `1/sqrt(N)` orthonormal normalization. Power-of-two
//! lengths go through an iterative radix-2 FFT; other even lengths fall back
//! to the direct `O(N^2)` evaluation.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// A real-valued signal of even length `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSignal {
    values: Vec<f64>,
}

impl RealSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                context: "RealSignal length must be even and >= 2",
                left: values.len(),
                right: 2,
            });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The first `N/2 + 1` orthonormal DFT coefficients of a real signal.
/// The endpoint bins (`q = 0` and `q = N/2`) are real.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpectrum {
    values: Vec<Complex64>,
}

impl HalfSpectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionMismatch {
                context: "HalfSpectrum needs at least two coefficients",
                left: values.len(),
                right: 2,
            });
        }
        if values[0].im != 0.0 || values[values.len() - 1].im != 0.0 {
            return Err(Error::Domain(
                "half-spectrum endpoint coefficients must be real".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Number of packed coefficients `n = N/2 + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Length `N = 2(n - 1)` of the underlying real signal.
    pub fn signal_len(&self) -> usize {
        2 * (self.values.len() - 1)
    }

    /// Elementwise product; endpoints stay real, so the result is a valid
    /// half-spectrum (the conjugate-symmetric extension of a product is the
    /// product of the extensions).
    pub fn elementwise_product(&self, other: &HalfSpectrum) -> Result<HalfSpectrum> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context: "HalfSpectrum elementwise_product",
                left: self.len(),
                right: other.len(),
            });
        }
        HalfSpectrum::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }
}

/// In-place radix-2 decimation-in-time FFT (unnormalized).
/// `sign = -1` for the forward kernel, `+1` for the inverse kernel.
fn fft_in_place(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    // Twiddle table for the full size; stage `len` strides it by n/len.
    let half_n = n / 2;
    let twiddles: Vec<Complex64> = (0..half_n)
        .map(|k| Complex64::from_polar(1.0, sign * TAU * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k * stride];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Orthonormal forward transform of a real signal, packed to `N/2 + 1` bins.
pub fn dft_forward(x: &RealSignal) -> HalfSpectrum {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    let half = n / 2;
    let mut out: Vec<Complex64>;
    if n.is_power_of_two() {
        let mut buf: Vec<Complex64> = x.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut buf, -1.0);
        out = buf[..=half].iter().map(|z| z * scale).collect();
    } else {
        out = (0..=half)
            .map(|q| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, &v) in x.values.iter().enumerate() {
                    let angle = -TAU * (p * q % n) as f64 / n as f64;
                    acc += v * Complex64::from_polar(1.0, angle);
                }
                acc * scale
            })
            .collect();
    }
    // Endpoint bins of a real signal are exactly real; zero the float noise.
    out[0].im = 0.0;
    out[half].im = 0.0;
    HalfSpectrum { values: out }
}

/// Orthonormal inverse transform via the conjugate-symmetric extension
/// `z_q = conj(z_{-q mod N})`.
pub fn dft_inverse(z: &HalfSpectrum) -> RealSignal {
    let n = z.signal_len();
    let half = n / 2;
    let scale = 1.0 / (n as f64).sqrt();
    let mut full: Vec<Complex64> = Vec::with_capacity(n);
    full.extend_from_slice(&z.values);
    for q in half + 1..n {
        full.push(z.values[n - q].conj());
    }
    let values: Vec<f64> = if n.is_power_of_two() {
        fft_in_place(&mut full, 1.0);
        full.iter().map(|v| v.re * scale).collect()
    } else {
        (0..n)
            .map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, zq) in full.iter().enumerate() {
                    let angle = TAU * (p * q % n) as f64 / n as f64;
                    acc += zq * Complex64::from_polar(1.0, angle);
                }
                acc.re * scale
            })
            .collect()
    };
    RealSignal { values }
}

/// Direct `O(N^2)` circular convolution `sum_p x_p y_{(n-p) mod N}`.
/// Reference oracle for the convolution theorem; note the orthonormal
/// transforms put a `sqrt(N)` factor into the spectral identity.
pub fn circular_convolve_reference(x: &RealSignal, y: &RealSignal) -> Result<RealSignal> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "circular_convolve_reference",
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    let values = (0..n)
        .map(|k| {
            (0..n)
                .map(|p| x.values[p] * y.values[(n + k - p) % n])
                .sum()
        })
        .collect();
    Ok(RealSignal { values })
}
