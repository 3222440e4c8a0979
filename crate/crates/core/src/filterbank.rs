//! Log-spaced band-pass filter bank: design, prewarped discretization and
//! envelope feature extraction.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::scalar::hz_to_rad;
use crate::tf::{biquad_bpf_equal_poles, two_pole_bpf, two_pole_from_omega_q, RationalTf};
use crate::Scalar;

/// Continuous-time channel prototype.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prototype {
    /// `ω0·s/(s² + (ω0/Q)s + ω0²)`, peak gain `Q`.
    #[default]
    EqualPoleBpf,
    /// `ω1·s/(s² + ω2·s + ω1ω2)`, peak gain `Q²`.
    TwoPoleBpf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterBankSpec<T> {
    pub channels: usize,
    pub f_lo: T,
    pub f_hi: T,
    pub q: T,
    pub prototype: Prototype,
}

impl<T: Scalar> FilterBankSpec<T> {
    pub fn new(channels: usize, f_lo: T, f_hi: T, q: T, prototype: Prototype) -> Result<Self> {
        let spec = Self {
            channels,
            f_lo,
            f_hi,
            q,
            prototype,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::InvalidParameter {
                name: "channels",
                value: 0.0,
                reason: "need at least one channel",
            });
        }
        require_positive("f_lo", self.f_lo.to_f64_lossy())?;
        require_positive("f_hi", self.f_hi.to_f64_lossy())?;
        require_positive("q", self.q.to_f64_lossy())?;
        if self.channels > 1 && !(self.f_lo < self.f_hi) {
            return Err(Error::InvalidParameter {
                name: "f_hi",
                value: self.f_hi.to_f64_lossy(),
                reason: "must exceed f_lo",
            });
        }
        Ok(())
    }

    /// `f_lo·(f_hi/f_lo)^(k/(N−1))`; a single channel sits at `f_lo`.
    /// The last center is exactly `f_hi`.
    pub fn center_frequencies(&self) -> Vec<T> {
        if self.channels == 1 {
            return vec![self.f_lo];
        }
        let last = self.channels - 1;
        let ratio = self.f_hi / self.f_lo;
        (0..self.channels)
            .map(|k| match k {
                0 => self.f_lo,
                k if k == last => self.f_hi,
                k => self.f_lo * ratio.powf(T::lit(k as f64) / T::lit(last as f64)),
            })
            .collect()
    }
}

/// One continuous-time transfer function per channel, with its center in Hz.
pub fn design_bank<T: Scalar>(spec: &FilterBankSpec<T>) -> Result<Vec<(T, RationalTf<T>)>> {
    spec.validate()?;
    spec.center_frequencies()
        .into_iter()
        .map(|f0| {
            let w0 = hz_to_rad(f0);
            let tf = match spec.prototype {
                Prototype::EqualPoleBpf => biquad_bpf_equal_poles(w0, spec.q)?,
                Prototype::TwoPoleBpf => {
                    let (w1, w2) = two_pole_from_omega_q(w0, spec.q)?;
                    two_pole_bpf(w1, w2)?
                }
            };
            Ok((f0, tf))
        })
        .collect()
}

/// Second-order IIR section in transposed direct form II, `a0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteBiquad<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub a1: T,
    pub a2: T,
    s1: T,
    s2: T,
}

impl<T: Scalar> DiscreteBiquad<T> {
    /// Coefficients are taken as given, with `a0 = 1`; state starts at zero.
    pub fn new(b: [T; 3], a1: T, a2: T) -> Self {
        Self {
            b0: b[0],
            b1: b[1],
            b2: b[2],
            a1,
            a2,
            s1: T::zero(),
            s2: T::zero(),
        }
    }

    pub fn reset(&mut self) {
        self.s1 = T::zero();
        self.s2 = T::zero();
    }

    #[inline]
    pub fn process(&mut self, x: T) -> T {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    /// Multiplies the numerator by `k`.
    pub fn scaled(mut self, k: T) -> Self {
        self.b0 = self.b0 * k;
        self.b1 = self.b1 * k;
        self.b2 = self.b2 * k;
        self
    }

    /// `H(e^{jθ})` with `θ = 2π·f/fs`.
    pub fn response_at(&self, f: T, fs: T) -> Complex<T> {
        let theta = hz_to_rad(f) / fs;
        let z1 = Complex::new(theta.cos(), -theta.sin());
        let z2 = z1 * z1;
        let one = Complex::new(T::one(), T::zero());
        (z1 * self.b1 + z2 * self.b2 + self.b0) / (one + z1 * self.a1 + z2 * self.a2)
    }

    /// Roots of `z² + a1·z + a2`.
    pub fn poles(&self) -> [Complex<T>; 2] {
        let two = T::lit(2.0);
        let disc = self.a1 * self.a1 - T::lit(4.0) * self.a2;
        let re = -self.a1 / two;
        if disc < T::zero() {
            let im = (-disc).sqrt() / two;
            [Complex::new(re, im), Complex::new(re, -im)]
        } else {
            let r = disc.sqrt() / two;
            [Complex::new(re + r, T::zero()), Complex::new(re - r, T::zero())]
        }
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < T::one())
    }
}

/// Bilinear transform prewarped so that the discrete response at `f0`
/// equals the continuous one there.
pub fn discretize<T: Scalar>(tf: &RationalTf<T>, f0: T, fs: T) -> Result<DiscreteBiquad<T>> {
    require_positive("f0", f0.to_f64_lossy())?;
    require_positive("fs", fs.to_f64_lossy())?;
    let nyquist = fs / T::lit(2.0);
    if f0 >= nyquist {
        return Err(Error::Nyquist {
            f0: f0.to_f64_lossy(),
            nyquist: nyquist.to_f64_lossy(),
        });
    }
    let (nd, dd) = (tf.num().degree(), tf.den().degree());
    if nd > 2 || dd > 2 || dd == 0 {
        return Err(Error::UnsupportedDegree(nd.max(dd)));
    }
    let pad = |c: &[T]| {
        let mut p = [T::zero(); 3];
        p[..c.len()].copy_from_slice(c);
        p
    };
    let n = pad(tf.num().coeffs());
    let d = pad(tf.den().coeffs());
    let k = hz_to_rad(f0) / (T::PI() * f0 / fs).tan();
    let k2 = k * k;
    let two = T::lit(2.0);
    let map = |c: [T; 3]| {
        [
            c[0] + c[1] * k + c[2] * k2,
            two * c[0] - two * c[2] * k2,
            c[0] - c[1] * k + c[2] * k2,
        ]
    };
    let b = map(n);
    let a = map(d);
    let a0 = a[0];
    Ok(DiscreteBiquad::new(
        [b[0] / a0, b[1] / a0, b[2] / a0],
        a[1] / a0,
        a[2] / a0,
    ))
}

/// Discretizes every channel, reporting all channels at or above Nyquist at once.
pub fn discretize_bank<T: Scalar>(channels: &[(T, RationalTf<T>)], fs: T) -> Result<Vec<DiscreteBiquad<T>>> {
    let nyquist = fs / T::lit(2.0);
    let bad: Vec<usize> = channels
        .iter()
        .enumerate()
        .filter(|(_, (f0, _))| *f0 >= nyquist)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NyquistChannels {
            channels: bad,
            nyquist: nyquist.to_f64_lossy(),
        });
    }
    channels.iter().map(|(f0, tf)| discretize(tf, *f0, fs)).collect()
}

/// Rectify, smooth, decimate, optionally compress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeConfig<T> {
    /// One-pole smoother cutoff in Hz.
    pub smooth_hz: T,
    /// Output frames per second.
    pub frame_rate: T,
    /// Apply `ln(1 + x/ε)` with `ε = 1e-6`.
    pub log_compress: bool,
    /// Keep the full-rate band-pass outputs in [`FeatureMatrix::raw`].
    pub keep_raw: bool,
}

impl<T: Scalar> Default for EnvelopeConfig<T> {
    fn default() -> Self {
        Self {
            smooth_hz: T::lit(25.0),
            frame_rate: T::lit(100.0),
            log_compress: false,
            keep_raw: false,
        }
    }
}

pub const LOG_EPSILON: f64 = 1e-6;

/// Channel-major envelope frames.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T> {
    pub fs: T,
    pub frame_rate: T,
    /// Samples between frames, `round(fs/frame_rate)`.
    pub hop: usize,
    pub log_compressed: bool,
    /// `values[channel][frame]`.
    pub values: Vec<Vec<T>>,
    /// `raw[channel][sample]`, when requested.
    pub raw: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn frames(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Time stamp of frame `i`: `i·hop/fs`.
    pub fn time_s(&self, frame: usize) -> T {
        T::lit((frame * self.hop) as f64) / self.fs
    }

    pub fn channel_means(&self) -> Vec<T> {
        self.values
            .iter()
            .map(|ch| {
                if ch.is_empty() {
                    T::zero()
                } else {
                    ch.iter().fold(T::zero(), |a, &x| a + x) / T::lit(ch.len() as f64)
                }
            })
            .collect()
    }

    /// CSV with header `time_s,ch00,ch01,...`, one row per frame.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for k in 0..self.channels() {
            let _ = write!(out, ",ch{k:02}");
        }
        out.push('\n');
        for i in 0..self.frames() {
            let _ = write!(out, "{}", self.time_s(i).to_f64_lossy());
            for ch in &self.values {
                let _ = write!(out, ",{}", ch[i].to_f64_lossy());
            }
            out.push('\n');
        }
        out
    }
}

/// Runs PCM samples through every channel and extracts envelope frames.
/// Filter state is taken from `bank` as given (normally zero).
pub fn run_bank<T: Scalar>(
    bank: &[DiscreteBiquad<T>],
    samples: &[T],
    fs: T,
    cfg: &EnvelopeConfig<T>,
) -> Result<FeatureMatrix<T>> {
    if bank.is_empty() {
        return Err(Error::InvalidParameter {
            name: "bank",
            value: 0.0,
            reason: "need at least one channel",
        });
    }
    require_positive("fs", fs.to_f64_lossy())?;
    require_positive("smooth_hz", cfg.smooth_hz.to_f64_lossy())?;
    require_positive("frame_rate", cfg.frame_rate.to_f64_lossy())?;
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::InputCorrupt { index });
    }
    let hop = (fs / cfg.frame_rate).round().to_f64_lossy().max(1.0) as usize;
    let frames = samples.len() / hop;
    let alpha = T::one() - (-(hz_to_rad(cfg.smooth_hz) / fs)).exp();
    let eps = T::lit(LOG_EPSILON);

    let mut values = Vec::with_capacity(bank.len());
    let mut raw = cfg.keep_raw.then(|| Vec::with_capacity(bank.len()));
    for section in bank {
        let mut filt = *section;
        let mut env = T::zero();
        let mut out = Vec::with_capacity(frames);
        let mut raw_ch = Vec::with_capacity(if cfg.keep_raw { samples.len() } else { 0 });
        for (n, &x) in samples.iter().enumerate() {
            let y = filt.process(x);
            if cfg.keep_raw {
                raw_ch.push(y);
            }
            env = env + alpha * (y.abs() - env);
            if n % hop == 0 && n / hop < frames {
                out.push(if cfg.log_compress {
                    (T::one() + env / eps).ln()
                } else {
                    env
                });
            }
        }
        values.push(out);
        if let Some(r) = raw.as_mut() {
            r.push(raw_ch);
        }
    }
    Ok(FeatureMatrix {
        fs,
        frame_rate: cfg.frame_rate,
        hop,
        log_compressed: cfg.log_compress,
        values,
        raw,
    })
}

/// Bank description as stored on disk (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    pub channels: usize,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub q: f64,
    #[serde(default)]
    pub prototype: Prototype,
    pub fs_hz: f64,
    #[serde(default = "default_smooth")]
    pub smooth_hz: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate_hz: f64,
    #[serde(default)]
    pub log_compress: bool,
    /// Scale each channel so its gain at the center frequency is 1.
    #[serde(default)]
    pub normalize_peak: bool,
}

fn default_smooth() -> f64 {
    25.0
}

fn default_frame_rate() -> f64 {
    100.0
}

impl BankConfig {
    pub fn spec(&self) -> Result<FilterBankSpec<f64>> {
        FilterBankSpec::new(self.channels, self.f_lo_hz, self.f_hi_hz, self.q, self.prototype)
    }

    pub fn envelope(&self) -> EnvelopeConfig<f64> {
        EnvelopeConfig {
            smooth_hz: self.smooth_hz,
            frame_rate: self.frame_rate_hz,
            log_compress: self.log_compress,
            keep_raw: false,
        }
    }

    /// Validates the whole record, including Nyquist at `fs_hz`.
    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        require_positive("smooth_hz", self.smooth_hz)?;
        require_positive("frame_rate_hz", self.frame_rate_hz)?;
        self.discretize().map(|_| ())
    }

    /// Discrete channels at `fs_hz`.
    pub fn discretize(&self) -> Result<Vec<DiscreteBiquad<f64>>> {
        require_positive("fs_hz", self.fs_hz)?;
        let channels = design_bank(&self.spec()?)?;
        let bank = discretize_bank(&channels, self.fs_hz)?;
        if !self.normalize_peak {
            return Ok(bank);
        }
        channels
            .iter()
            .zip(bank)
            .map(|((f0, tf), b)| Ok(b.scaled(tf.eval(*f0)?.norm().recip())))
            .collect()
    }
}
