//! Continuous-time gm-C filter toolkit.
//!
//! Every biquad topology is available twice: as a closed-form rational
//! transfer function in `s` and as a small-signal gm-C netlist. The
//! [`mna`] solver evaluates netlists independently of any closed form, so
//! the two routes check each other. On top of the verified prototypes,
//! [`filterbank`] builds a log-spaced band-pass bank that turns PCM audio
//! into per-channel envelope features.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line front end uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod filterbank;
pub mod mna;
pub mod netlist;
pub mod poly;
pub mod scalar;
pub mod tf;
pub mod topology;
pub mod verify;
pub mod wav;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex;

/// Complex number over `f64`.
pub type C64 = Complex<f64>;

pub type Polynomial = poly::Polynomial<f64>;
pub type RationalTf = tf::RationalTf<f64>;
pub type BiquadParams = tf::BiquadParams<f64>;
pub type GmCNetlist = netlist::GmCNetlist<f64>;
pub type NetlistBuilder = netlist::NetlistBuilder<f64>;
pub type TopologyParams = topology::TopologyParams<f64>;
pub type TopologyBundle = topology::TopologyBundle<f64>;
pub type ComplexMatrixSystem = mna::ComplexMatrixSystem<f64>;
pub type SolveOptions = mna::SolveOptions<f64>;
pub type FrequencyGrid = analysis::FrequencyGrid<f64>;
pub type FrequencyResponse = analysis::FrequencyResponse<f64>;
pub type FilterBankSpec = filterbank::FilterBankSpec<f64>;
pub type DiscreteBiquad = filterbank::DiscreteBiquad<f64>;
pub type EnvelopeConfig = filterbank::EnvelopeConfig<f64>;
pub type FeatureMatrix = filterbank::FeatureMatrix<f64>;
