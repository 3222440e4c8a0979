//! Frequency sweeps and the measurements taken from them.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::netlist::GmCNetlist;
use crate::scalar::{db, rad_to_hz};
use crate::tf::RationalTf;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Sweep description. The default is 512 log-spaced points from 1 Hz to 1 MHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    pub f_start: T,
    pub f_stop: T,
    pub points: usize,
    pub spacing: Spacing,
}

impl<T: Scalar> Default for FrequencyGrid<T> {
    fn default() -> Self {
        Self {
            f_start: T::one(),
            f_stop: T::lit(1e6),
            points: 512,
            spacing: Spacing::Log,
        }
    }
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn log(f_start: T, f_stop: T, points: usize) -> Result<Self> {
        let g = Self {
            f_start,
            f_stop,
            points,
            spacing: Spacing::Log,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn linear(f_start: T, f_stop: T, points: usize) -> Result<Self> {
        let g = Self {
            f_start,
            f_stop,
            points,
            spacing: Spacing::Linear,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidGrid("need at least 2 points"));
        }
        if !(self.f_start.is_finite() && self.f_stop.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if !(self.f_start < self.f_stop) {
            return Err(Error::InvalidGrid("f_start must be below f_stop"));
        }
        match self.spacing {
            Spacing::Log if !(self.f_start > T::zero()) => Err(Error::InvalidGrid("log spacing needs f_start > 0")),
            Spacing::Linear if self.f_start < T::zero() => Err(Error::InvalidGrid("frequencies must be non-negative")),
            _ => Ok(()),
        }
    }

    /// Grid frequencies in Hz; both endpoints are exact.
    pub fn frequencies(&self) -> Result<Vec<T>> {
        self.validate()?;
        let last = T::lit((self.points - 1) as f64);
        let mut f: Vec<T> = (0..self.points)
            .map(|i| {
                let t = T::lit(i as f64) / last;
                match self.spacing {
                    Spacing::Log => self.f_start * (self.f_stop / self.f_start).powf(t),
                    Spacing::Linear => self.f_start + (self.f_stop - self.f_start) * t,
                }
            })
            .collect();
        f[0] = self.f_start;
        f[self.points - 1] = self.f_stop;
        Ok(f)
    }
}

/// Ordered `(frequency, complex gain)` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse<T> {
    entries: Vec<(T, Complex<T>)>,
}

impl<T: Scalar> FrequencyResponse<T> {
    pub fn new(entries: Vec<(T, Complex<T>)>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::NonMonotoneResponse);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(T, Complex<T>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn magnitudes_db(&self) -> Vec<T> {
        self.entries.iter().map(|e| db(e.1.norm())).collect()
    }

    /// CSV with header `freq_hz,re,im,mag_db,phase_deg`, shortest round-trip
    /// decimal for every number.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,re,im,mag_db,phase_deg\n");
        for &(f, h) in &self.entries {
            let f = f.to_f64_lossy();
            let (re, im) = (h.re.to_f64_lossy(), h.im.to_f64_lossy());
            let mag_db = 20.0 * re.hypot(im).log10();
            let phase = im.atan2(re).to_degrees();
            let _ = writeln!(out, "{f},{re},{im},{mag_db},{phase}");
        }
        out
    }
}

impl FrequencyResponse<f64> {
    /// Parses the CSV produced by [`FrequencyResponse::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("freq_hz,re,im,mag_db,phase_deg") {
            return Err(Error::InvalidGrid("unexpected CSV header"));
        }
        let entries = lines
            .filter(|l| !l.is_empty())
            .map(|l| {
                let cols: Vec<f64> = l
                    .split(',')
                    .map(|c| c.parse().map_err(|_| Error::InvalidGrid("bad CSV number")))
                    .collect::<Result<_>>()?;
                if cols.len() != 5 {
                    return Err(Error::InvalidGrid("CSV row must have 5 columns"));
                }
                Ok((cols[0], Complex::new(cols[1], cols[2])))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Pointwise evaluation of a closed form.
pub fn sweep_tf<T: Scalar>(tf: &RationalTf<T>, grid: &FrequencyGrid<T>) -> Result<FrequencyResponse<T>> {
    let entries = grid
        .frequencies()?
        .into_iter()
        .map(|f| tf.eval(f).map(|h| (f, h)))
        .collect::<Result<Vec<_>>>()?;
    FrequencyResponse::new(entries)
}

/// Pointwise nodal solve of a netlist probe.
pub fn sweep_netlist<T: Scalar>(
    netlist: &GmCNetlist<T>,
    probe: &str,
    grid: &FrequencyGrid<T>,
) -> Result<FrequencyResponse<T>> {
    crate::mna::response(netlist, probe, &grid.frequencies()?)
}

/// Location and height of the largest magnitude sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    pub f_peak: T,
    pub mag_db: T,
    /// The maximum sits on the first or last grid point; no interpolation was done.
    pub at_boundary: bool,
}

/// Largest-magnitude point, refined by a 3-point parabola in `(log f, dB)`.
/// Ties resolve toward the lower frequency.
pub fn peak<T: Scalar>(resp: &FrequencyResponse<T>) -> Result<Peak<T>> {
    let n = resp.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, found: n });
    }
    let mags = resp.magnitudes_db();
    let mut k = 0;
    for (i, &m) in mags.iter().enumerate() {
        if m > mags[k] {
            k = i;
        }
    }
    let f = |i: usize| resp.entries[i].0;
    if k == 0 || k == n - 1 {
        return Ok(Peak {
            f_peak: f(k),
            mag_db: mags[k],
            at_boundary: true,
        });
    }
    let (x0, x1, x2) = (f(k - 1).ln(), f(k).ln(), f(k + 1).ln());
    let (y0, y1, y2) = (mags[k - 1], mags[k], mags[k + 1]);
    let (f_peak, mag_db) = parabola_vertex([x0, x1, x2], [y0, y1, y2])
        .map(|(x, y)| (x.exp(), y))
        .unwrap_or((f(k), y1));
    Ok(Peak {
        f_peak,
        mag_db,
        at_boundary: false,
    })
}

fn parabola_vertex<T: Scalar>(x: [T; 3], y: [T; 3]) -> Option<(T, T)> {
    // Lagrange form: y = a(x − x1)² + b(x − x1) + y1.
    let (d0, d2) = (x[0] - x[1], x[2] - x[1]);
    let (e0, e2) = (y[0] - y[1], y[2] - y[1]);
    let denom = d0 * d2 * (d0 - d2);
    if denom.is_zero() {
        return None;
    }
    let a = (e0 * d2 - e2 * d0) / denom;
    let b = (e2 * d0 * d0 - e0 * d2 * d2) / denom;
    if !(a < T::zero()) {
        return None;
    }
    let dx = -b / (T::lit(2.0) * a);
    if dx < d0 || dx > d2 {
        return None;
    }
    Some((x[1] + dx, y[1] + b * dx + a * dx * dx))
}

/// Half-power drop in dB.
fn half_power_db<T: Scalar>() -> T {
    T::lit(10.0) * T::lit(2.0).log10()
}

/// `Q = f_peak / (f_hi − f_lo)` with `f_lo`, `f_hi` the half-power points
/// below and above the interpolated peak.
pub fn q_from_bandwidth<T: Scalar>(resp: &FrequencyResponse<T>) -> Result<T> {
    let pk = peak(resp)?;
    if pk.at_boundary {
        return Err(Error::BandwidthUnresolved(if pk.f_peak == resp.entries[0].0 {
            "lower"
        } else {
            "upper"
        }));
    }
    let level = pk.mag_db - half_power_db::<T>();
    let mags = resp.magnitudes_db();
    let logf: Vec<T> = resp.frequencies().map(|f| f.ln()).collect();
    let k = resp
        .entries
        .iter()
        .position(|e| e.0 >= pk.f_peak)
        .unwrap_or(resp.len() - 1);

    let cross = |i: usize, j: usize| {
        let t = (level - mags[i]) / (mags[j] - mags[i]);
        (logf[i] + t * (logf[j] - logf[i])).exp()
    };
    let f_lo = (1..k)
        .rev()
        .find(|&i| mags[i - 1] <= level && mags[i] > level)
        .map(|i| cross(i - 1, i))
        .ok_or(Error::BandwidthUnresolved("lower"))?;
    let f_hi = (k..resp.len())
        .find(|&i| i > 0 && mags[i - 1] > level && mags[i] <= level)
        .map(|i| cross(i - 1, i))
        .ok_or(Error::BandwidthUnresolved("upper"))?;
    Ok(pk.f_peak / (f_hi - f_lo))
}

/// Least-squares slope of dB against `log10 f` over the samples in `[f_a, f_b]`.
pub fn rolloff<T: Scalar>(resp: &FrequencyResponse<T>, f_a: T, f_b: T) -> Result<T> {
    if !(f_a < f_b) {
        return Err(Error::InvalidGrid("roll-off band needs f_a < f_b"));
    }
    let pts: Vec<(T, T)> = resp
        .entries
        .iter()
        .filter(|e| e.0 >= f_a && e.0 <= f_b)
        .map(|e| (e.0.log10(), db(e.1.norm())))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            found: pts.len(),
        });
    }
    let n = T::lit(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), p| {
        let dx = p.0 - mx;
        (sxy + dx * (p.1 - my), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}

/// Suggested roll-off band `[10·f_c, 100·f_c]` above the largest critical frequency.
pub fn rolloff_band<T: Scalar>(critical_hz: &[T]) -> (T, T) {
    let fc = critical_hz.iter().copied().fold(T::zero(), T::max);
    (T::lit(10.0) * fc, T::lit(100.0) * fc)
}

/// Critical frequencies (Hz) of a closed form: pole and zero magnitudes.
pub fn critical_frequencies<T: Scalar>(tf: &RationalTf<T>) -> Result<Vec<T>> {
    let mut out: Vec<T> = tf.poles()?.into_iter().map(|p| rad_to_hz(p.norm())).collect();
    out.extend(tf.zeros()?.into_iter().map(|z| rad_to_hz(z.norm())));
    Ok(out)
}

/// `max |a − b| / max |b|` over a shared grid (normalized by the second argument).
pub fn compare<T: Scalar>(resp_a: &FrequencyResponse<T>, resp_b: &FrequencyResponse<T>) -> Result<T> {
    if resp_a.len() != resp_b.len() {
        return Err(Error::GridMismatch);
    }
    let tol = T::lit(1e-12);
    let mut num = T::zero();
    let mut den = T::zero();
    for (&(fa, ha), &(fb, hb)) in resp_a.entries.iter().zip(&resp_b.entries) {
        if (fa - fb).abs() > tol * fa.abs().max(fb.abs()) {
            return Err(Error::GridMismatch);
        }
        num = num.max((ha - hb).norm());
        den = den.max(hb.norm());
    }
    if den.is_zero() {
        return Ok(if num.is_zero() { T::zero() } else { T::infinity() });
    }
    Ok(num / den)
}

/// `f0 = sqrt(a0/a2) / 2π` of a second-order denominator with positive coefficients.
pub fn center_frequency<T: Scalar>(tf: &RationalTf<T>) -> Result<T> {
    let c = tf.den().coeffs();
    if c.len() != 3 {
        return Err(Error::UnsupportedDegree(tf.den().degree()));
    }
    let m = tf.den().monic();
    let m = m.coeffs();
    if !(m[0] > T::zero() && m[1] > T::zero()) {
        return Err(Error::InvalidPolynomial("denominator coefficients must be positive"));
    }
    Ok(rad_to_hz(m[0].sqrt()))
}

/// Summary measurements of one response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseMetrics<T> {
    pub f_peak: T,
    pub peak_mag_db: T,
    pub dc_gain_db: T,
    pub q_estimate: Option<T>,
    pub rolloff_db_per_decade: Option<T>,
}

pub fn metrics<T: Scalar>(resp: &FrequencyResponse<T>, rolloff_band: Option<(T, T)>) -> Result<ResponseMetrics<T>> {
    let pk = peak(resp)?;
    let dc_gain_db = db(resp.entries[0].1.norm());
    Ok(ResponseMetrics {
        f_peak: pk.f_peak,
        peak_mag_db: pk.mag_db,
        dc_gain_db,
        q_estimate: q_from_bandwidth(resp).ok(),
        rolloff_db_per_decade: match rolloff_band {
            Some((a, b)) => Some(rolloff(resp, a, b)?),
            None => None,
        },
    })
}
