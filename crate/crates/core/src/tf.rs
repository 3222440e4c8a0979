//! Rational transfer functions in `s` and the biquad prototypes built from
//! one- and two-integrator loops.
//!
//! Lossy-first loops give the equal-pole forms ([`biquad_lpf`],
//! [`biquad_bpf_equal_poles`]); lossless-first loops expose the extra
//! `X` node ([`hx_equal_poles`], [`two_pole_hx`]) whose lossy high-pass
//! response turns into an ideal band-pass once the low-pass output is
//! subtracted from it.

use num_complex::Complex;

use crate::error::{require_positive, Error, Result};
use crate::poly::Polynomial;
use crate::scalar::hz_to_rad;
use crate::Scalar;

/// `num(s) / den(s)`. No cancellation is ever performed; two transfer
/// functions are equivalent when they evaluate equal.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTf<T> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Scalar> RationalTf<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidPolynomial("denominator is the zero polynomial"));
        }
        Ok(Self { num, den })
    }

    /// Builds from ascending-power coefficient lists.
    pub fn from_coeffs(num: &[T], den: &[T]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec())?, Polynomial::new(den.to_vec())?)
    }

    pub fn constant(k: T) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::constant(T::one()),
        }
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    /// Evaluates at an arbitrary complex `s`.
    pub fn eval_s(&self, s: Complex<T>) -> Result<Complex<T>> {
        let d = self.den.eval(s);
        let mag = d.norm();
        if !(mag >= T::singular_threshold()) {
            return Err(Error::SingularEvaluation {
                freq_hz: (s.im / T::two_pi()).to_f64_lossy(),
                den_mag: mag.to_f64_lossy(),
            });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Evaluates on the imaginary axis at `s = j·2π·freq_hz`.
    pub fn eval(&self, freq_hz: T) -> Result<Complex<T>> {
        self.eval_s(Complex::new(T::zero(), hz_to_rad(freq_hz)))
    }

    /// Value at DC.
    pub fn dc_gain(&self) -> Result<T> {
        Ok(self.eval_s(Complex::new(T::zero(), T::zero()))?.re)
    }

    /// Roots of the denominator, which must be of degree 1 or 2.
    pub fn poles(&self) -> Result<Vec<Complex<T>>> {
        poly_roots(&self.den)
    }

    /// Roots of the numerator (degree 1 or 2; a constant numerator has none).
    pub fn zeros(&self) -> Result<Vec<Complex<T>>> {
        if self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        poly_roots(&self.num)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            };
        }
        Self {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// Natural frequency `sqrt(a0/a2)` of a second-order denominator.
    pub fn natural_frequency(&self) -> Result<T> {
        let (a0, _, a2) = self.quadratic_den()?;
        Ok((a0 / a2).sqrt())
    }

    /// Quality factor `sqrt(a0·a2)/a1` of a second-order denominator.
    pub fn quality_factor(&self) -> Result<T> {
        let (a0, a1, a2) = self.quadratic_den()?;
        Ok((a0 * a2).sqrt() / a1)
    }

    fn quadratic_den(&self) -> Result<(T, T, T)> {
        let c = self.den.coeffs();
        if c.len() != 3 {
            return Err(Error::UnsupportedDegree(self.den.degree()));
        }
        Ok((c[0], c[1], c[2]))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U + Copy) -> RationalTf<U> {
        RationalTf {
            num: self.num.map(f),
            den: self.den.map(f),
        }
    }
}

fn poly_roots<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<Complex<T>>> {
    let c = p.coeffs();
    match p.degree() {
        1 => Ok(vec![Complex::new(-c[0] / c[1], T::zero())]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let two = T::lit(2.0);
            let disc = b * b - T::lit(4.0) * a * cc;
            if disc < T::zero() {
                let re = -b / (two * a);
                let im = (-disc).sqrt() / (two * a);
                Ok(vec![Complex::new(re, im), Complex::new(re, -im)])
            } else {
                // Cancellation-free form for real roots.
                let sign = if b >= T::zero() { T::one() } else { -T::one() };
                let q = -(b + sign * disc.sqrt()) / two;
                if q.is_zero() {
                    return Ok(vec![Complex::new(T::zero(), T::zero()); 2]);
                }
                let r1 = q / a;
                let r2 = cc / q;
                Ok(vec![Complex::new(r1, T::zero()), Complex::new(r2, T::zero())])
            }
        }
        d => Err(Error::UnsupportedDegree(d)),
    }
}

/// Response family of a [`BiquadParams`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BiquadKind {
    Lpf,
    Bpf,
}

/// Natural frequency, quality factor and response family of a biquad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiquadParams<T> {
    pub omega0: T,
    pub q: T,
    pub kind: BiquadKind,
}

impl<T: Scalar> BiquadParams<T> {
    pub fn new(omega0: T, q: T, kind: BiquadKind) -> Result<Self> {
        check_omega_q(omega0, q)?;
        Ok(Self { omega0, q, kind })
    }

    pub fn to_tf(&self) -> Result<RationalTf<T>> {
        match self.kind {
            BiquadKind::Lpf => biquad_lpf(self.omega0, self.q),
            BiquadKind::Bpf => biquad_bpf_equal_poles(self.omega0, self.q),
        }
    }
}

fn check_omega_q<T: Scalar>(omega0: T, q: T) -> Result<()> {
    require_positive("omega0", omega0.to_f64_lossy())?;
    require_positive("q", q.to_f64_lossy())
}

fn check_two_poles<T: Scalar>(omega1: T, omega2: T) -> Result<()> {
    require_positive("omega1", omega1.to_f64_lossy())?;
    require_positive("omega2", omega2.to_f64_lossy())
}

fn equal_pole_den<T: Scalar>(omega0: T, q: T) -> Vec<T> {
    vec![omega0 * omega0, omega0 / q, T::one()]
}

fn two_pole_den<T: Scalar>(omega1: T, omega2: T) -> Vec<T> {
    vec![omega1 * omega2, omega2, T::one()]
}

/// `ω0² / (s² + (ω0/Q)s + ω0²)`, unity DC gain.
pub fn biquad_lpf<T: Scalar>(omega0: T, q: T) -> Result<RationalTf<T>> {
    check_omega_q(omega0, q)?;
    RationalTf::from_coeffs(&[omega0 * omega0], &equal_pole_den(omega0, q))
}

/// `ω0·s / (s² + (ω0/Q)s + ω0²)`, peak gain `Q` at `ω0`.
pub fn biquad_bpf_equal_poles<T: Scalar>(omega0: T, q: T) -> Result<RationalTf<T>> {
    check_omega_q(omega0, q)?;
    RationalTf::from_coeffs(&[T::zero(), omega0], &equal_pole_den(omega0, q))
}

/// Lossless-first loop, `X` node: `ω0(s + ω0/Q) / (s² + (ω0/Q)s + ω0²)`.
/// `H_X(0) = 1/Q`.
pub fn hx_equal_poles<T: Scalar>(omega0: T, q: T) -> Result<RationalTf<T>> {
    check_omega_q(omega0, q)?;
    // Written as ω0²·(1/Q) so that subtracting (1/Q)·H_LPF cancels exactly.
    RationalTf::from_coeffs(&[omega0 * omega0 * q.recip(), omega0], &equal_pole_den(omega0, q))
}

/// Lossless-first loop with poles set by `ω1, ω2`, low-pass output.
pub fn two_pole_lpf<T: Scalar>(omega1: T, omega2: T) -> Result<RationalTf<T>> {
    check_two_poles(omega1, omega2)?;
    RationalTf::from_coeffs(&[omega1 * omega2], &two_pole_den(omega1, omega2))
}

/// `X` node of the two-pole loop: `ω1(s + ω2) / (s² + ω2·s + ω1ω2)`, `H_X(0) = 1`.
pub fn two_pole_hx<T: Scalar>(omega1: T, omega2: T) -> Result<RationalTf<T>> {
    check_two_poles(omega1, omega2)?;
    RationalTf::from_coeffs(&[omega1 * omega2, omega1], &two_pole_den(omega1, omega2))
}

/// `H_X − H_LPF = ω1·s / (s² + ω2·s + ω1ω2)`, peak gain `ω1/ω2 = Q²`.
pub fn two_pole_bpf<T: Scalar>(omega1: T, omega2: T) -> Result<RationalTf<T>> {
    check_two_poles(omega1, omega2)?;
    RationalTf::from_coeffs(&[T::zero(), omega1], &two_pole_den(omega1, omega2))
}

/// `Q = sqrt(ω1/ω2)` of the two-pole loop.
pub fn two_pole_q<T: Scalar>(omega1: T, omega2: T) -> Result<T> {
    check_two_poles(omega1, omega2)?;
    Ok((omega1 / omega2).sqrt())
}

/// Two-pole loop parameters `(ω1, ω2)` realizing a given `(ω0, Q)`.
pub fn two_pole_from_omega_q<T: Scalar>(omega0: T, q: T) -> Result<(T, T)> {
    check_omega_q(omega0, q)?;
    Ok((omega0 * q, omega0 / q))
}

/// First-order lossy integrator `1 / (1 + s/ω)`.
pub fn lossy_integrator<T: Scalar>(omega: T) -> Result<RationalTf<T>> {
    require_positive("omega", omega.to_f64_lossy())?;
    RationalTf::from_coeffs(&[omega], &[omega, T::one()])
}

/// Ideal integrator `ω / s`.
pub fn lossless_integrator<T: Scalar>(omega: T) -> Result<RationalTf<T>> {
    require_positive("omega", omega.to_f64_lossy())?;
    RationalTf::from_coeffs(&[omega], &[T::zero(), T::one()])
}

/// Cascade of two lossy integrators and its quality factor, which never
/// exceeds 0.5.
pub fn cascaded_lossy<T: Scalar>(omega1: T, omega2: T) -> Result<(RationalTf<T>, T)> {
    check_two_poles(omega1, omega2)?;
    let tf = RationalTf::from_coeffs(&[omega1 * omega2], &[omega1 * omega2, omega1 + omega2, T::one()])?;
    let q = (omega1 * omega2).sqrt() / (omega1 + omega2);
    Ok((tf, q))
}

/// Exact `|H_X(jω0)| = Q·sqrt(Q² + 1)` of the two-pole loop. The familiar
/// "peak gain ω1/ω2 = Q²" is its large-Q asymptote.
pub fn two_pole_hx_gain_at_omega0<T: Scalar>(omega1: T, omega2: T) -> Result<T> {
    let q = two_pole_q(omega1, omega2)?;
    Ok(q * (q * q + T::one()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn j(w: f64) -> C {
        C::new(0.0, w)
    }

    // Oracles: the defining formulas evaluated directly in complex arithmetic.
    fn lpf_oracle(w0: f64, q: f64, s: C) -> C {
        C::from(w0 * w0) / (s * s + s * (w0 / q) + w0 * w0)
    }
    fn bpf_oracle(w0: f64, q: f64, s: C) -> C {
        s * w0 / (s * s + s * (w0 / q) + w0 * w0)
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn lpf_dc_gain_is_one() {
        let h = biquad_lpf(1.0, 0.5).unwrap();
        assert_eq!(h.eval_s(C::new(0.0, 0.0)).unwrap(), C::new(1.0, 0.0));
    }

    #[test]
    fn lpf_gain_at_omega0_is_q() {
        let h = biquad_lpf(1.0, 2.0).unwrap();
        assert!((h.eval_s(j(1.0)).unwrap().norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lpf_far_above_cutoff() {
        let w0 = 2.0 * PI * 100.0;
        let s = j(2.0 * PI * 1e4);
        let h = biquad_lpf(w0, 2.0).unwrap().eval_s(s).unwrap();
        // brute force: 1.0000875064847e-4
        assert!(close(h, lpf_oracle(w0, 2.0, s), 1e-13));
        assert!((h.norm() - 1.000_087_506_484_7e-4).abs() < 1e-15);
    }

    #[test]
    fn bpf_examples() {
        let h = biquad_bpf_equal_poles(1.0, 2.0).unwrap();
        assert_eq!(h.eval_s(C::new(0.0, 0.0)).unwrap().norm(), 0.0);
        assert!((h.eval_s(j(1.0)).unwrap().norm() - 2.0).abs() < 1e-14);
        // |10j / (-100 + 5j + 1)| = 10/sqrt(99^2 + 25) = 0.100881520672064
        let far = h.eval_s(j(10.0)).unwrap();
        assert!(close(far, bpf_oracle(1.0, 2.0, j(10.0)), 1e-14));
        assert!((far.norm() - 0.100_881_520_672_064).abs() < 1e-14);
    }

    #[test]
    fn hx_dc_is_inverse_q() {
        let h = hx_equal_poles(1.0, 2.0).unwrap();
        assert_eq!(h.dc_gain().unwrap(), 0.5);
        assert_eq!(hx_equal_poles(1.0, 1.0).unwrap().dc_gain().unwrap(), 1.0);
    }

    #[test]
    fn hx_minus_scaled_lpf_is_bpf() {
        let (w0, q) = (1.0, 2.0);
        let y = hx_equal_poles(w0, q)
            .unwrap()
            .sub(&biquad_lpf(w0, q).unwrap().scale(1.0 / q));
        let bpf = biquad_bpf_equal_poles(w0, q).unwrap();
        for k in 0..512 {
            let s = j(10f64.powf(-2.0 + 4.0 * k as f64 / 511.0));
            assert!(close(y.eval_s(s).unwrap(), bpf.eval_s(s).unwrap(), 1e-12));
        }
    }

    #[test]
    fn two_pole_examples() {
        assert_eq!(two_pole_q(4.0, 1.0).unwrap(), 2.0);
        assert_eq!(two_pole_hx(4.0, 1.0).unwrap().dc_gain().unwrap(), 1.0);
        let g = two_pole_bpf(4.0, 1.0).unwrap().eval_s(j(2.0)).unwrap();
        assert!((g.norm() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn cascaded_lossy_examples() {
        assert_eq!(cascaded_lossy(1.0, 1.0).unwrap().1, 0.5);
        assert!((cascaded_lossy(4.0f64, 1.0).unwrap().1 - 0.4).abs() < 1e-15);
        let (tf, _) = cascaded_lossy(3.0, 7.0).unwrap();
        let prod = lossy_integrator(3.0).unwrap().mul(&lossy_integrator(7.0).unwrap());
        for w in [0.0, 0.1, 1.0, 3.0, 10.0, 100.0] {
            assert!(close(prod.eval_s(j(w)).unwrap(), tf.eval_s(j(w)).unwrap(), 1e-14));
        }
    }

    #[test]
    fn eval_examples() {
        let h = biquad_lpf(1.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert_eq!(h.eval(0.0).unwrap(), C::new(1.0, 0.0));
        let k = RationalTf::from_coeffs(&[3.0], &[1.0]).unwrap();
        assert_eq!(k.eval(1234.5).unwrap(), C::new(3.0, 0.0));
        let h = biquad_lpf(2.0 * PI * 1000.0, 2.0).unwrap().eval(1000.0).unwrap();
        assert!(close(h, C::new(0.0, -2.0), 1e-12));
    }

    #[test]
    fn eval_on_axis_pole_is_singular() {
        let integ = lossless_integrator(1.0).unwrap();
        assert!(matches!(integ.eval(0.0), Err(Error::SingularEvaluation { .. })));
    }

    #[test]
    fn pole_examples() {
        let p = RationalTf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap().poles().unwrap();
        assert_eq!(p, vec![C::new(-1.0, 0.0)]);
        let p = biquad_lpf(1.0, 0.5).unwrap().poles().unwrap();
        assert_eq!(p, vec![C::new(-1.0, 0.0), C::new(-1.0, 0.0)]);
        let p = biquad_lpf(1.0, 2.0).unwrap().poles().unwrap();
        // quadratic formula: -1/4 ± j·sqrt(15)/4
        let im = 15f64.sqrt() / 4.0;
        assert!(close(p[0], C::new(-0.25, im), 1e-15));
        assert!(close(p[1], C::new(-0.25, -im), 1e-15));
        assert!((im - 0.9682).abs() < 1e-4);
    }

    #[test]
    fn pole_degree_errors() {
        let cubic = RationalTf::from_coeffs(&[1.0], &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(cubic.poles(), Err(Error::UnsupportedDegree(3))));
        let k = RationalTf::constant(2.0);
        assert!(matches!(k.poles(), Err(Error::UnsupportedDegree(0))));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(biquad_lpf(0.0, 1.0).is_err());
        assert!(biquad_bpf_equal_poles(1.0, -1.0).is_err());
        assert!(two_pole_bpf(1.0, f64::NAN).is_err());
        assert!(cascaded_lossy(-1.0, 1.0).is_err());
        assert!(RationalTf::from_coeffs(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn self_difference_vanishes() {
        let h = two_pole_hx(5.0, 0.3).unwrap();
        let z = h.sub(&h);
        for w in [0.0, 0.5, 2.0, 50.0] {
            assert_eq!(z.eval_s(j(w)).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let h = biquad_bpf_equal_poles(1.0f32, 2.0).unwrap();
        let g = h.eval_s(Complex::new(0.0f32, 1.0)).unwrap().norm();
        assert!((g - 2.0).abs() < 1e-6);
    }

    #[test]
    fn eval_is_bit_reproducible() {
        let h = two_pole_hx(7.0f64, 0.2).unwrap();
        let a = h.eval(0.37).unwrap();
        let b = h.eval(0.37).unwrap();
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    proptest! {
        #[test]
        fn bpf_peak_equals_q(lw in -2.0f64..8.0, lq in -1.5f64..1.5) {
            let (w0, q) = (10f64.powf(lw), 10f64.powf(lq));
            let g = biquad_bpf_equal_poles(w0, q).unwrap().eval_s(j(w0)).unwrap().norm();
            prop_assert!((g - q).abs() <= 1e-12 * q);
        }

        #[test]
        fn cascaded_q_bounded(l1 in -3.0f64..6.0, l2 in -3.0f64..6.0) {
            let (w1, w2) = (10f64.powf(l1), 10f64.powf(l2));
            let q = cascaded_lossy(w1, w2).unwrap().1;
            prop_assert!(q <= 0.5 + 1e-12);
            if (w1 - w2).abs() > 1e-9 * w1.max(w2) {
                prop_assert!(q < 0.5);
            }
        }

        #[test]
        fn two_pole_subtraction_identity(l1 in -1.0f64..5.0, l2 in -1.0f64..5.0, lw in -2.0f64..6.0) {
            let (w1, w2) = (10f64.powf(l1), 10f64.powf(l2));
            let y = two_pole_hx(w1, w2).unwrap().sub(&two_pole_lpf(w1, w2).unwrap());
            let s = j(10f64.powf(lw));
            let a = y.eval_s(s).unwrap();
            let b = two_pole_bpf(w1, w2).unwrap().eval_s(s).unwrap();
            prop_assert!(close(a, b, 1e-12));
        }

        #[test]
        fn hx_gain_at_omega0_exact(l1 in -1.0f64..5.0, l2 in -1.0f64..5.0) {
            let (w1, w2) = (10f64.powf(l1), 10f64.powf(l2));
            let w0 = (w1 * w2).sqrt();
            let g = two_pole_hx(w1, w2).unwrap().eval_s(j(w0)).unwrap().norm();
            let exact = two_pole_hx_gain_at_omega0(w1, w2).unwrap();
            prop_assert!((g - exact).abs() <= 1e-12 * exact);
        }

        #[test]
        fn biquad_poles_left_half_plane(a0 in 1e-3f64..1e6, a1 in 1e-3f64..1e3) {
            let tf = RationalTf::from_coeffs(&[1.0], &[a0, a1, 1.0]).unwrap();
            for p in tf.poles().unwrap() {
                prop_assert!(p.re < 0.0);
            }
        }
    }

    #[test]
    fn hx_asymptote_error_shrinks_with_q() {
        // Q·sqrt(Q²+1) − Q² → 1/2 from below, so the relative gap decays like 1/(2Q²).
        let mut prev = f64::INFINITY;
        for q in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let (w1, w2) = two_pole_from_omega_q(1.0, q).unwrap();
            let exact = two_pole_hx_gain_at_omega0(w1, w2).unwrap();
            let rel = (exact - q * q) / (q * q);
            assert!(rel > 0.0 && rel < prev);
            prev = rel;
        }
    }
}
