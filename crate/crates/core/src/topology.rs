//! gm-C realizations of the biquad topologies: OTA two-integrator loops,
//! the CCIA band-pass, and the single-branch follower filters (SF, XSF,
//! SSF, FVF).
//!
//! Every constructor returns a [`TopologyBundle`] holding the netlist and
//! the closed-form transfer function of each labeled output. Capacitor
//! values of the differential follower filters are half-circuit values.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::netlist::{GmCNetlist, NetlistBuilder, NodeId, Probe};
use crate::tf::RationalTf;
use crate::Scalar;

const GND: NodeId = NodeId::GROUND;

/// Type I or type II follower biquad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    I,
    II,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::I => "I",
            Variant::II => "II",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Variant::I),
            "II" | "ii" | "2" => Ok(Variant::II),
            _ => Err(Error::InvalidNetlist(format!(
                "unknown variant `{s}` (expected I or II)"
            ))),
        }
    }
}

/// Element values of one topology, in SI units.
///
/// Serialized with an internal `topology` tag, e.g.
/// `{"topology":"xsf","gm1":2.532e-7,"gm2":2.532e-7,"c1":2e-12,"c2":8e-12}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case")]
pub enum TopologyParams<T> {
    Sf {
        gm1: T,
        c1: T,
        #[serde(default)]
        gds1: T,
        #[serde(default)]
        gdsb: T,
    },
    OtaLpf {
        gm1: T,
        gm2: T,
        gm3: T,
        c1: T,
        c2: T,
    },
    OtaBpf {
        gm1: T,
        gm2: T,
        gm3: T,
        c1: T,
        c2: T,
        gm4: T,
        gm5: T,
        #[serde(default)]
        c_par: T,
    },
    CciaBpf {
        gm1: T,
        gm2: T,
        c1: T,
        c2: T,
        #[serde(default)]
        c_f: T,
    },
    Xsf {
        gm1: T,
        gm2: T,
        c1: T,
        c2: T,
    },
    XsfBpf {
        gm1: T,
        gm2: T,
        gm3: T,
        c_in: T,
        c_f: T,
        c_l: T,
    },
    Ssf {
        variant: Variant,
        gm1: T,
        gm2: T,
        c1: T,
        c2: T,
    },
    Fvf {
        variant: Variant,
        gm1: T,
        gm2: T,
        c1: T,
        c2: T,
    },
}

impl<T: Scalar> TopologyParams<T> {
    pub fn build(&self) -> Result<TopologyBundle<T>> {
        match *self {
            Self::Sf { gm1, c1, gds1, gdsb } => make_sf_lpf(gm1, c1, gds1, gdsb),
            Self::OtaLpf { gm1, gm2, gm3, c1, c2 } => make_ota_lpf(gm1, gm2, gm3, c1, c2),
            Self::OtaBpf {
                gm1,
                gm2,
                gm3,
                c1,
                c2,
                gm4,
                gm5,
                c_par,
            } => make_ota_bpf(gm1, gm2, gm3, c1, c2, gm4, gm5, c_par),
            Self::CciaBpf { gm1, gm2, c1, c2, c_f } => make_ccia_bpf(gm1, gm2, c1, c2, c_f),
            Self::Xsf { gm1, gm2, c1, c2 } => make_xsf(gm1, gm2, c1, c2),
            Self::XsfBpf {
                gm1,
                gm2,
                gm3,
                c_in,
                c_f,
                c_l,
            } => make_xsf_bpf(gm1, gm2, gm3, c_in, c_f, c_l),
            Self::Ssf {
                variant,
                gm1,
                gm2,
                c1,
                c2,
            } => make_ssf(variant, gm1, gm2, c1, c2),
            Self::Fvf {
                variant,
                gm1,
                gm2,
                c1,
                c2,
            } => make_fvf(variant, gm1, gm2, c1, c2),
        }
    }

    pub fn kind(&self) -> TopologyKind {
        match *self {
            Self::Sf { .. } => TopologyKind::Sf,
            Self::OtaLpf { .. } => TopologyKind::OtaLpf,
            Self::OtaBpf { .. } => TopologyKind::OtaBpf,
            Self::CciaBpf { .. } => TopologyKind::CciaBpf,
            Self::Xsf { .. } => TopologyKind::Xsf,
            Self::XsfBpf { .. } => TopologyKind::XsfBpf,
            Self::Ssf {
                variant: Variant::I, ..
            } => TopologyKind::SsfI,
            Self::Ssf {
                variant: Variant::II, ..
            } => TopologyKind::SsfII,
            Self::Fvf {
                variant: Variant::I, ..
            } => TopologyKind::FvfI,
            Self::Fvf {
                variant: Variant::II, ..
            } => TopologyKind::FvfII,
        }
    }
}

/// The ten named configurations (SSF and FVF count once per variant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    Sf,
    OtaLpf,
    OtaBpf,
    CciaBpf,
    Xsf,
    XsfBpf,
    SsfI,
    SsfII,
    FvfI,
    FvfII,
}

/// Topology family names accepted on the command line.
pub const FAMILIES: [&str; 8] = ["sf", "ota-lpf", "ota-bpf", "ccia-bpf", "xsf", "xsf-bpf", "ssf", "fvf"];

impl TopologyKind {
    pub const ALL: [TopologyKind; 10] = [
        TopologyKind::Sf,
        TopologyKind::OtaLpf,
        TopologyKind::OtaBpf,
        TopologyKind::CciaBpf,
        TopologyKind::Xsf,
        TopologyKind::XsfBpf,
        TopologyKind::SsfI,
        TopologyKind::SsfII,
        TopologyKind::FvfI,
        TopologyKind::FvfII,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TopologyKind::Sf => "sf",
            TopologyKind::OtaLpf => "ota-lpf",
            TopologyKind::OtaBpf => "ota-bpf",
            TopologyKind::CciaBpf => "ccia-bpf",
            TopologyKind::Xsf => "xsf",
            TopologyKind::XsfBpf => "xsf-bpf",
            TopologyKind::SsfI => "ssf-I",
            TopologyKind::SsfII => "ssf-II",
            TopologyKind::FvfI => "fvf-I",
            TopologyKind::FvfII => "fvf-II",
        }
    }

    pub fn family(self) -> &'static str {
        match self {
            TopologyKind::SsfI | TopologyKind::SsfII => "ssf",
            TopologyKind::FvfI | TopologyKind::FvfII => "fvf",
            other => other.label(),
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            TopologyKind::SsfI | TopologyKind::FvfI => Some(Variant::I),
            TopologyKind::SsfII | TopologyKind::FvfII => Some(Variant::II),
            _ => None,
        }
    }

    /// All configurations of a family (`"ssf"` yields both variants).
    pub fn of_family(family: &str) -> Vec<TopologyKind> {
        Self::ALL.into_iter().filter(|k| k.family() == family).collect()
    }

    /// Reference element values. XSF, SSF and FVF use the published
    /// design values; the others use values chosen inside their ideal regime.
    pub fn preset<T: Scalar>(self) -> TopologyParams<T> {
        let v = T::lit;
        let follower = |variant, fvf: bool| {
            let (gm1, gm2) = if fvf {
                (v(262.4e-9), v(262.5e-9))
            } else {
                (v(252.8e-9), v(227.3e-9))
            };
            let (c1, c2) = (v(1e-12), v(4e-12));
            if fvf {
                TopologyParams::Fvf {
                    variant,
                    gm1,
                    gm2,
                    c1,
                    c2,
                }
            } else {
                TopologyParams::Ssf {
                    variant,
                    gm1,
                    gm2,
                    c1,
                    c2,
                }
            }
        };
        match self {
            TopologyKind::Sf => TopologyParams::Sf {
                gm1: v(253.2e-9),
                c1: v(2e-12),
                gds1: T::zero(),
                gdsb: T::zero(),
            },
            TopologyKind::OtaLpf => TopologyParams::OtaLpf {
                gm1: v(10e-9),
                gm2: v(10e-9),
                gm3: v(15e-9),
                c1: v(1e-12),
                c2: v(1e-12),
            },
            TopologyKind::OtaBpf => TopologyParams::OtaBpf {
                gm1: v(10e-9),
                gm2: v(10e-9),
                gm3: v(15e-9),
                c1: v(1e-12),
                c2: v(1e-12),
                gm4: v(10e-9),
                gm5: v(10e-9),
                c_par: T::zero(),
            },
            TopologyKind::CciaBpf => TopologyParams::CciaBpf {
                gm1: v(10e-9),
                gm2: v(10e-9),
                c1: v(4e-12),
                c2: v(1e-12),
                c_f: T::zero(),
            },
            TopologyKind::Xsf => TopologyParams::Xsf {
                gm1: v(253.2e-9),
                gm2: v(253.2e-9),
                c1: v(2e-12),
                c2: v(8e-12),
            },
            TopologyKind::XsfBpf => TopologyParams::XsfBpf {
                gm1: v(253.2e-9),
                gm2: v(253.2e-9),
                gm3: v(1e6),
                c_in: v(4e-12),
                c_f: v(0.4e-12),
                c_l: v(10e-12),
            },
            TopologyKind::SsfI => follower(Variant::I, false),
            TopologyKind::SsfII => follower(Variant::II, false),
            TopologyKind::FvfI => follower(Variant::I, true),
            TopologyKind::FvfII => follower(Variant::II, true),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A netlist together with the closed forms of its outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologyBundle<T> {
    pub netlist: GmCNetlist<T>,
    /// Closed form per probe label; exact for the netlist in its ideal regime.
    pub closed_forms: BTreeMap<String, RationalTf<T>>,
    /// Simplified textbook forms where they differ from `closed_forms`
    /// (e.g. the OTA band-pass with a unity buffer).
    pub idealized: BTreeMap<String, RationalTf<T>>,
    pub params: TopologyParams<T>,
    /// Natural frequency in rad/s from the design formula.
    pub omega0: T,
    /// Quality factor from the design formula; not meaningful when `!stable`.
    pub q: T,
    /// Coefficient of `s` in the monic denominator.
    pub damping: T,
    pub stable: bool,
    pub warnings: Vec<String>,
    /// Main output label.
    pub primary_probe: &'static str,
}

impl<T: Scalar> TopologyBundle<T> {
    pub fn closed_form(&self, label: &str) -> Result<&RationalTf<T>> {
        self.closed_forms.get(label).ok_or_else(|| Error::UnknownProbe {
            label: label.to_owned(),
            available: self.closed_forms.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }

    pub fn primary(&self) -> &RationalTf<T> {
        &self.closed_forms[self.primary_probe]
    }

    pub fn f0_hz(&self) -> T {
        crate::scalar::rad_to_hz(self.omega0)
    }

    /// Fails for a configuration whose loop has non-positive damping.
    pub fn check_stable(&self) -> Result<()> {
        if self.stable {
            Ok(())
        } else {
            Err(Error::UnstableConfiguration {
                damping: self.damping.to_f64_lossy(),
            })
        }
    }
}

fn pos<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    require_positive(name, v.to_f64_lossy())
}

fn non_neg<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    require_non_negative(name, v.to_f64_lossy())
}

fn tf<T: Scalar>(num: &[T], den: &[T]) -> Result<RationalTf<T>> {
    RationalTf::from_coeffs(num, den)
}

struct Parts<T> {
    closed: Vec<(&'static str, RationalTf<T>)>,
    omega0: T,
    damping: T,
    primary: &'static str,
}

fn bundle<T: Scalar>(netlist: GmCNetlist<T>, params: TopologyParams<T>, parts: Parts<T>) -> TopologyBundle<T> {
    let stable = parts.damping > T::zero();
    let mut warnings = Vec::new();
    if !stable {
        warnings.push(format!(
            "loop damping {} is not positive; the poles are not in the left half-plane",
            parts.damping
        ));
    }
    TopologyBundle {
        netlist,
        closed_forms: parts.closed.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        idealized: BTreeMap::new(),
        params,
        omega0: parts.omega0,
        q: parts.omega0 / parts.damping,
        damping: parts.damping,
        stable,
        warnings,
        primary_probe: parts.primary,
    }
}

/// Source-follower low-pass with finite output conductances `gds1`, `gdsb`.
pub fn make_sf_lpf<T: Scalar>(gm1: T, c1: T, gds1: T, gdsb: T) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("c1", c1)?;
    non_neg("gds1", gds1)?;
    non_neg("gdsb", gdsb)?;

    let mut b = NetlistBuilder::new();
    let inp = b.node("IN");
    let out = b.node("OUT");
    b.input(inp);
    b.gm(inp, out, out, GND, gm1);
    b.cap(out, GND, c1);
    if gds1 > T::zero() {
        b.conductance(out, GND, gds1);
    }
    if gdsb > T::zero() {
        b.conductance(out, GND, gdsb);
    }
    b.probe("OUT", Probe::Node(out));

    let g = gm1 + gds1 + gdsb;
    let omega = g / c1;
    let mut bdl = bundle(
        b.build()?,
        TopologyParams::Sf { gm1, c1, gds1, gdsb },
        Parts {
            closed: vec![("OUT", tf(&[gm1], &[g, c1])?)],
            omega0: omega,
            damping: omega,
            primary: "OUT",
        },
    );
    // First order: there is no quality factor.
    bdl.q = T::nan();
    Ok(bdl)
}

/// DC loop gain `gm1/(gds1 + gdsb)` of the source follower.
pub fn sf_loop_gain<T: Scalar>(gm1: T, gds1: T, gdsb: T) -> Result<T> {
    pos("gm1", gm1)?;
    non_neg("gds1", gds1)?;
    non_neg("gdsb", gdsb)?;
    let g = gds1 + gdsb;
    if g.is_zero() {
        return Err(Error::InfiniteLoopGain);
    }
    Ok(gm1 / g)
}

fn ota_loop<T: Scalar>(b: &mut NetlistBuilder<T>, gm1: T, gm2: T, gm3: T, c1: T, c2: T) -> (NodeId, NodeId) {
    let inp = b.node("IN");
    let x = b.node("X");
    let lpf = b.node("LPF");
    b.input(inp);
    b.gm(inp, x, x, GND, gm1);
    if gm3 > T::zero() {
        b.gm(x, lpf, x, GND, gm3);
    }
    b.gm(x, lpf, lpf, GND, gm2);
    b.cap(x, GND, c1).cap(lpf, GND, c2);
    b.probe("LPF", Probe::Node(lpf)).probe("X", Probe::Node(x));
    (x, lpf)
}

/// Monic denominator of the OTA loop and its damping coefficient.
fn ota_den<T: Scalar>(gm1: T, gm2: T, gm3: T, c1: T, c2: T) -> ([T; 3], T) {
    let w2 = gm1 * gm2 / (c1 * c2);
    let a1 = (gm1 - gm3) / c1 + gm2 / c2;
    ([w2, a1, T::one()], a1)
}

/// Two-OTA low-pass loop; `gm3` adds positive feedback around the first
/// integrator (zero removes it).
pub fn make_ota_lpf<T: Scalar>(gm1: T, gm2: T, gm3: T, c1: T, c2: T) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    non_neg("gm3", gm3)?;
    pos("c1", c1)?;
    pos("c2", c2)?;
    let mut b = NetlistBuilder::new();
    ota_loop(&mut b, gm1, gm2, gm3, c1, c2);
    let (den, damping) = ota_den(gm1, gm2, gm3, c1, c2);
    Ok(bundle(
        b.build()?,
        TopologyParams::OtaLpf { gm1, gm2, gm3, c1, c2 },
        Parts {
            closed: vec![("LPF", tf(&[den[0]], &den)?), ("X", tf(&[den[0], gm1 / c1], &den)?)],
            omega0: den[0].sqrt(),
            damping,
            primary: "LPF",
        },
    ))
}

/// OTA loop with a differential buffer (`gm4` into `gm5 ∥ c_par`) reading
/// `X − LPF`. The closed form keeps the buffer pole; `idealized["BPF"]`
/// drops it.
#[allow(clippy::too_many_arguments)]
pub fn make_ota_bpf<T: Scalar>(
    gm1: T,
    gm2: T,
    gm3: T,
    c1: T,
    c2: T,
    gm4: T,
    gm5: T,
    c_par: T,
) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    non_neg("gm3", gm3)?;
    pos("c1", c1)?;
    pos("c2", c2)?;
    pos("gm4", gm4)?;
    pos("gm5", gm5)?;
    non_neg("c_par", c_par)?;

    let mut b = NetlistBuilder::new();
    let (x, lpf) = ota_loop(&mut b, gm1, gm2, gm3, c1, c2);
    let bpf = b.node("BPF");
    b.gm(x, lpf, bpf, GND, gm4);
    b.gm(GND, bpf, bpf, GND, gm5);
    if c_par > T::zero() {
        b.cap(bpf, GND, c_par);
    }
    b.probe("BPF", Probe::Node(bpf));

    let (den, damping) = ota_den(gm1, gm2, gm3, c1, c2);
    let den_poly = crate::poly::Polynomial::new(den.to_vec())?;
    let buf_poly = crate::poly::Polynomial::new(vec![gm5, c_par])?;
    let bpf_tf = RationalTf::new(
        crate::poly::Polynomial::new(vec![T::zero(), gm1 / c1 * gm4])?,
        den_poly.mul(&buf_poly),
    )?;
    let mut bdl = bundle(
        b.build()?,
        TopologyParams::OtaBpf {
            gm1,
            gm2,
            gm3,
            c1,
            c2,
            gm4,
            gm5,
            c_par,
        },
        Parts {
            closed: vec![
                ("LPF", tf(&[den[0]], &den)?),
                ("X", tf(&[den[0], gm1 / c1], &den)?),
                ("BPF", bpf_tf),
            ],
            omega0: den[0].sqrt(),
            damping,
            primary: "BPF",
        },
    );
    bdl.idealized
        .insert("BPF".to_owned(), tf(&[T::zero(), gm1 / c1], &den)?);
    if c_par > T::zero() && gm5 / c_par < T::lit(1000.0) * bdl.omega0 {
        bdl.warnings.push(format!(
            "buffer pole gm5/c_par = {} rad/s is within 1000·ω0; the unity-buffer form is inaccurate",
            gm5 / c_par
        ));
    }
    Ok(bdl)
}

/// Capacitively coupled band-pass. The closed form neglects the feedback
/// capacitor `c_f`, which the netlist includes when non-zero.
pub fn make_ccia_bpf<T: Scalar>(gm1: T, gm2: T, c1: T, c2: T, c_f: T) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    pos("c1", c1)?;
    pos("c2", c2)?;
    non_neg("c_f", c_f)?;

    let mut b = NetlistBuilder::new();
    let inp = b.node("IN");
    let z = b.node("Z");
    let bpf = b.node("BPF");
    b.input(inp);
    b.cap(inp, z, c1);
    if c_f > T::zero() {
        b.cap(z, bpf, c_f);
    }
    b.gm(bpf, z, z, GND, gm2);
    b.gm(GND, z, bpf, GND, gm1);
    b.cap(bpf, GND, c2);
    b.probe("BPF", Probe::Node(bpf)).probe("Z", Probe::Node(z));

    let w2 = gm1 * gm2 / (c1 * c2);
    let damping = gm2 / c1;
    let den = [w2, damping, T::one()];
    let bpf_tf = tf(&[T::zero(), -gm1 / c2], &den)?;
    // V_Z = −(s·C2/gm1)·V_BPF.
    let z_tf = tf(&[T::zero(), T::zero(), T::one()], &den)?;
    let mut bdl = bundle(
        b.build()?,
        TopologyParams::CciaBpf { gm1, gm2, c1, c2, c_f },
        Parts {
            closed: vec![("BPF", bpf_tf), ("Z", z_tf)],
            omega0: w2.sqrt(),
            damping,
            primary: "BPF",
        },
    );
    if c_f > T::zero() {
        bdl.warnings.push(format!(
            "c_f = {c_f} F is not modeled by the closed form; expect a deviation of order c_f/c1"
        ));
        if c1 / c_f < T::lit(10.0) {
            bdl.warnings.push(format!(
                "c1/c_f = {} is below 10; outside the validity regime",
                c1 / c_f
            ));
        }
    }
    Ok(bdl)
}

/// Cross-coupled source-follower low-pass, as its differential half-circuit.
/// Probes: `LPF`, `X`, `Y = X − LPF`, and the current probe `GmX`.
pub fn make_xsf<T: Scalar>(gm1: T, gm2: T, c1: T, c2: T) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    pos("c1", c1)?;
    pos("c2", c2)?;

    let mut b = NetlistBuilder::new();
    let inp = b.node("IN");
    let x = b.node("X");
    let lpf = b.node("LPF");
    b.input(inp);
    b.gm(inp, x, x, GND, gm1);
    // Cross-coupled pair: its current re-enters X and feeds the LPF node.
    b.gm(x, lpf, x, GND, gm2);
    let gmx = b.gm(x, lpf, lpf, GND, gm2);
    b.cap(x, GND, c1).cap(lpf, GND, c2);
    b.probe("LPF", Probe::Node(lpf))
        .probe("X", Probe::Node(x))
        .probe("Y", Probe::Differential(x, lpf))
        .probe("GmX", Probe::Current(gmx));

    let (den, damping) = ota_den(gm1, gm2, gm2, c1, c2);
    Ok(bundle(
        b.build()?,
        TopologyParams::Xsf { gm1, gm2, c1, c2 },
        Parts {
            closed: vec![
                ("LPF", tf(&[den[0]], &den)?),
                ("X", tf(&[den[0], gm1 / c1], &den)?),
                ("Y", tf(&[T::zero(), gm1 / c1], &den)?),
                ("GmX", tf(&[T::zero(), gm1 * gm2 / c1], &den)?),
            ],
            omega0: den[0].sqrt(),
            damping,
            primary: "LPF",
        },
    ))
}

/// Fully differential XSF band-pass: an XSF core whose `X − LPF` difference
/// is taken by a capacitive-feedback amplifier (`gm3`, `c_f`, `c_l`).
/// The closed form assumes an infinitely fast amplifier.
pub fn make_xsf_bpf<T: Scalar>(gm1: T, gm2: T, gm3: T, c_in: T, c_f: T, c_l: T) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    pos("gm3", gm3)?;
    pos("c_in", c_in)?;
    pos("c_f", c_f)?;
    pos("c_l", c_l)?;

    let mut b = NetlistBuilder::new();
    let inp = b.node("INP");
    let inn = b.node("INN");
    let xp = b.node("XP");
    let xn = b.node("XN");
    let lp = b.node("LP");
    let ln = b.node("LN");
    let zp = b.node("ZP");
    let zn = b.node("ZN");
    let bp = b.node("BP");
    let bn = b.node("BN");
    b.input(inp).source(inn, -T::one());
    b.gm(inp, xp, xp, GND, gm1);
    b.gm(inn, xn, xn, GND, gm1);
    b.gm(xp, lp, lp, xn, gm2);
    b.gm(xn, ln, ln, xp, gm2);
    b.cap(xp, zp, c_in).cap(ln, zp, c_in);
    b.cap(xn, zn, c_in).cap(lp, zn, c_in);
    b.cap(zp, bn, c_f).cap(zn, bp, c_f);
    b.gm(GND, zp, bn, GND, gm3);
    b.gm(GND, zn, bp, GND, gm3);
    b.cap(bp, GND, c_l).cap(bn, GND, c_l);
    b.probe("BPF", Probe::Node(bp))
        .probe("LPF", Probe::Node(lp))
        .probe("X", Probe::Node(xp));

    let w2 = gm1 * gm2 / (c_in * c_in);
    let damping = gm1 / c_in;
    let bpf_tf = tf(&[T::zero(), gm1 / c_f], &[w2, damping, T::one()])?;
    let mut bdl = bundle(
        b.build()?,
        TopologyParams::XsfBpf {
            gm1,
            gm2,
            gm3,
            c_in,
            c_f,
            c_l,
        },
        Parts {
            closed: vec![("BPF", bpf_tf)],
            omega0: w2.sqrt(),
            damping,
            primary: "BPF",
        },
    );
    if c_l / c_f < T::lit(10.0) {
        bdl.warnings.push(format!(
            "c_l/c_f = {} is below 10; outside the validity regime",
            c_l / c_f
        ));
    }
    let bw = xsf_bpf_amp_bandwidth(gm3, c_in, c_f, c_l);
    if bw < T::lit(1000.0) * bdl.omega0 {
        bdl.warnings.push(format!(
            "amplifier bandwidth {bw} rad/s is within 1000·ω0; the closed form is approximate"
        ));
    }
    Ok(bdl)
}

/// Feedback factor `c_f/(2·c_in + c_f)` of the XSF band-pass amplifier.
pub fn xsf_bpf_feedback_factor<T: Scalar>(c_in: T, c_f: T) -> T {
    c_f / (T::lit(2.0) * c_in + c_f)
}

/// Closed-loop amplifier bandwidth `gm3·β/c_l` in rad/s.
pub fn xsf_bpf_amp_bandwidth<T: Scalar>(gm3: T, c_in: T, c_f: T, c_l: T) -> T {
    gm3 * xsf_bpf_feedback_factor(c_in, c_f) / c_l
}

fn follower<T: Scalar>(variant: Variant, gm1: T, gm2: T, c1: T, c2: T, flipped: bool) -> Result<TopologyBundle<T>> {
    pos("gm1", gm1)?;
    pos("gm2", gm2)?;
    pos("c1", c1)?;
    pos("c2", c2)?;

    let mut b = NetlistBuilder::new();
    let inp = b.node("IN");
    let w2 = gm1 * gm2 / (c1 * c2);
    let bpf_num = [T::zero(), -gm1 / c1];
    let params = if flipped {
        TopologyParams::Fvf {
            variant,
            gm1,
            gm2,
            c1,
            c2,
        }
    } else {
        TopologyParams::Ssf {
            variant,
            gm1,
            gm2,
            c1,
            c2,
        }
    };
    b.input(inp);
    let (closed, damping) = match variant {
        Variant::I => {
            let lpf = b.node("LPF");
            let bpf = b.node("BPF");
            b.gm(inp, lpf, lpf, bpf, gm1);
            b.cap(lpf, bpf, c1).cap(lpf, GND, c2);
            if flipped {
                b.gm(bpf, GND, GND, lpf, gm2);
            } else {
                b.gm(GND, bpf, lpf, GND, gm2);
            }
            b.probe("LPF", Probe::Node(lpf)).probe("BPF", Probe::Node(bpf));
            let damping = gm2 / c2;
            let den = [w2, damping, T::one()];
            (vec![("LPF", tf(&[w2], &den)?), ("BPF", tf(&bpf_num, &den)?)], damping)
        }
        Variant::II => {
            let z = b.node("Z");
            let bpf = b.node("BPF");
            b.gm(inp, z, z, bpf, gm1);
            b.cap(bpf, GND, c1).cap(z, GND, c2);
            if flipped {
                b.gm(bpf, GND, GND, z, gm2);
            } else {
                b.gm(GND, bpf, z, GND, gm2);
            }
            b.probe("Z", Probe::Node(z)).probe("BPF", Probe::Node(bpf));
            let damping = gm1 / c2;
            let den = [w2, damping, T::one()];
            (
                vec![("BPF", tf(&bpf_num, &den)?), ("Z", tf(&[w2, gm1 / c2], &den)?)],
                damping,
            )
        }
    };
    Ok(bundle(
        b.build()?,
        params,
        Parts {
            closed,
            omega0: w2.sqrt(),
            damping,
            primary: "BPF",
        },
    ))
}

/// Super source follower biquad. Type I exposes `LPF` and `BPF`;
/// type II exposes `BPF` and the first-order-like `Z` output.
pub fn make_ssf<T: Scalar>(variant: Variant, gm1: T, gm2: T, c1: T, c2: T) -> Result<TopologyBundle<T>> {
    follower(variant, gm1, gm2, c1, c2, false)
}

/// Flipped voltage follower biquad. The feedback transconductor senses the
/// opposite polarity; the transfer functions equal those of [`make_ssf`].
pub fn make_fvf<T: Scalar>(variant: Variant, gm1: T, gm2: T, c1: T, c2: T) -> Result<TopologyBundle<T>> {
    follower(variant, gm1, gm2, c1, c2, true)
}
