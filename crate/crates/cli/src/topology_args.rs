//! Turns `--topology` plus element flags into a built topology or a
//! textbook prototype.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gmc::analysis::center_frequency;
use gmc::scalar::hz_to_rad;
use gmc::tf::{self, RationalTf};
use gmc::topology::{TopologyKind, TopologyParams, Variant, FAMILIES};
use gmc::TopologyBundle;
use serde_json::{Map, Value};

use crate::si;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "paper", alias = "reference")]
    Reference,
}

/// Prototype transfer functions accepted by `poles`.
pub const PROTOTYPES: [&str; 4] = ["biquad-lpf", "biquad-bpf", "two-pole", "cascaded-lossy"];

#[derive(Args, Debug, Default)]
pub struct ElementArgs {
    /// Topology name (sf, ota-lpf, ota-bpf, ccia-bpf, xsf, xsf-bpf, ssf, fvf).
    #[arg(long)]
    pub topology: Option<String>,
    /// Follower variant for ssf and fvf (I or II).
    #[arg(long)]
    pub variant: Option<String>,
    /// Start from the built-in reference element values.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// JSON parameter record to start from.
    #[arg(long)]
    pub params: Option<PathBuf>,

    #[arg(long, value_parser = si::parse)]
    pub gm1: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gm2: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gm3: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gm4: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gm5: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c1: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c2: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c_par: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c_f: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c_in: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub c_l: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gds1: Option<f64>,
    #[arg(long, value_parser = si::parse)]
    pub gdsb: Option<f64>,
}

/// Extra flags for the prototype transfer functions.
#[derive(Args, Debug, Default)]
pub struct PrototypeArgs {
    /// Natural frequency in Hz.
    #[arg(long, value_parser = si::parse_positive)]
    pub f0: Option<f64>,
    /// Natural frequency in rad/s.
    #[arg(long, value_parser = si::parse_positive)]
    pub omega0: Option<f64>,
    #[arg(long, value_parser = si::parse_positive)]
    pub q: Option<f64>,
    /// First loop frequency in rad/s.
    #[arg(long, value_parser = si::parse_positive)]
    pub omega1: Option<f64>,
    /// Second loop frequency in rad/s.
    #[arg(long, value_parser = si::parse_positive)]
    pub omega2: Option<f64>,
}

impl ElementArgs {
    fn element_flags(&self) -> Vec<(&'static str, f64)> {
        [
            ("gm1", self.gm1),
            ("gm2", self.gm2),
            ("gm3", self.gm3),
            ("gm4", self.gm4),
            ("gm5", self.gm5),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c_par", self.c_par),
            ("c_f", self.c_f),
            ("c_in", self.c_in),
            ("c_l", self.c_l),
            ("gds1", self.gds1),
            ("gdsb", self.gdsb),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn read_params_file(path: &PathBuf) -> Result<Map<String, Value>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!("{} must hold a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("{}: {e}", path.display()))),
    }
}

/// Parameter record from `--params`, `--preset` and element flags, in
/// that order of precedence (later wins).
pub fn topology_params(args: &ElementArgs) -> Result<TopologyParams<f64>, CliError> {
    let mut obj = match &args.params {
        Some(p) => read_params_file(p)?,
        None => Map::new(),
    };
    let family = match (&args.topology, obj.get("topology").and_then(Value::as_str)) {
        (Some(t), Some(f)) if t != f => {
            return Err(CliError::Usage(format!(
                "--topology {t} conflicts with `{f}` in the parameter file"
            )))
        }
        (Some(t), _) => t.clone(),
        (None, Some(f)) => f.to_owned(),
        (None, None) => return Err(CliError::Usage("--topology is required".into())),
    };
    if !FAMILIES.contains(&family.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown topology `{family}` (expected one of: {})",
            FAMILIES.join(", ")
        )));
    }
    let is_follower = family == "ssf" || family == "fvf";
    let variant = match &args.variant {
        Some(v) if !is_follower => return Err(CliError::Usage(format!("--variant {v} does not apply to {family}"))),
        Some(v) => Some(v.parse::<Variant>().map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };

    if args.preset == Some(Preset::Reference) {
        let kind = TopologyKind::of_family(&family)
            .into_iter()
            .find(|k| k.variant() == variant || variant.is_none())
            .expect("every family has a preset");
        let preset = kind.preset::<f64>();
        let Value::Object(p) = serde_json::to_value(preset).expect("serializable") else {
            unreachable!()
        };
        for (k, v) in p {
            obj.entry(k).or_insert(v);
        }
    }
    obj.insert("topology".into(), Value::String(family.clone()));
    if is_follower {
        let v = variant.map(|v| v.to_string());
        match v {
            Some(v) => {
                obj.insert("variant".into(), Value::String(v));
            }
            None => {
                obj.entry("variant").or_insert_with(|| Value::String("I".into()));
            }
        }
    }
    let given = args.element_flags();
    for &(k, v) in &given {
        obj.insert(k.into(), Value::from(v));
    }

    let params: TopologyParams<f64> = serde_json::from_value(Value::Object(obj)).map_err(|e| {
        let msg = e.to_string();
        match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
            Some(field) => CliError::Usage(format!("{family} needs {}", flag(field))),
            None => CliError::Usage(format!("{family}: {msg}")),
        }
    })?;
    let Value::Object(known) = serde_json::to_value(params).expect("serializable") else {
        unreachable!()
    };
    if let Some((k, _)) = given.iter().find(|(k, _)| !known.contains_key(*k)) {
        return Err(CliError::Usage(format!("{} does not apply to {family}", flag(k))));
    }
    Ok(params)
}

pub fn build_bundle(args: &ElementArgs) -> Result<TopologyBundle, CliError> {
    let params = topology_params(args)?;
    params.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// A resolved second-order (or first-order) response for pole reports.
pub struct PoleSource {
    pub name: String,
    pub tf: RationalTf<f64>,
    pub omega0: f64,
    pub q: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn pole_source(args: &ElementArgs, proto: &PrototypeArgs) -> Result<PoleSource, CliError> {
    let name = args.topology.clone().unwrap_or_default();
    if PROTOTYPES.contains(&name.as_str()) {
        if let Some((k, _)) = args.element_flags().first() {
            return Err(CliError::Usage(format!("{} does not apply to {name}", flag(k))));
        }
        return prototype(&name, proto);
    }
    if proto
        .f0
        .or(proto.omega0)
        .or(proto.q)
        .or(proto.omega1)
        .or(proto.omega2)
        .is_some()
    {
        return Err(CliError::Usage(format!(
            "--f0/--omega0/--q/--omega1/--omega2 apply only to {}",
            PROTOTYPES.join(", ")
        )));
    }
    let b = build_bundle(args)?;
    // The OTA band-pass output carries the buffer pole; report the loop.
    let tf = if b.primary().den().degree() <= 2 {
        b.primary().clone()
    } else {
        b.closed_forms["LPF"].clone()
    };
    let q = (tf.den().degree() == 2).then_some(b.q);
    Ok(PoleSource {
        name: b.params.kind().label().to_owned(),
        tf,
        omega0: b.omega0,
        q,
        warnings: b.warnings,
    })
}

fn prototype(name: &str, p: &PrototypeArgs) -> Result<PoleSource, CliError> {
    let usage = |e: gmc::Error| CliError::Usage(e.to_string());
    let omega0 = p.omega0.or(p.f0.map(hz_to_rad));
    let need = |what: &str| CliError::Usage(format!("{name} needs {what}"));
    let (tf, q) = match name {
        "biquad-lpf" | "biquad-bpf" => {
            let w0 = omega0.ok_or_else(|| need("--f0 or --omega0"))?;
            let q = p.q.ok_or_else(|| need("--q"))?;
            let tf = if name == "biquad-lpf" {
                tf::biquad_lpf(w0, q)
            } else {
                tf::biquad_bpf_equal_poles(w0, q)
            };
            (tf.map_err(usage)?, q)
        }
        "two-pole" => {
            let (w1, w2) = match (p.omega1, p.omega2, omega0, p.q) {
                (Some(a), Some(b), _, _) => (a, b),
                (_, _, Some(w0), Some(q)) => tf::two_pole_from_omega_q(w0, q).map_err(usage)?,
                _ => return Err(need("--omega1 and --omega2, or --f0/--omega0 and --q")),
            };
            (
                tf::two_pole_lpf(w1, w2).map_err(usage)?,
                tf::two_pole_q(w1, w2).map_err(usage)?,
            )
        }
        "cascaded-lossy" => {
            let w1 = p.omega1.ok_or_else(|| need("--omega1"))?;
            let w2 = p.omega2.ok_or_else(|| need("--omega2"))?;
            tf::cascaded_lossy(w1, w2).map_err(usage)?
        }
        _ => unreachable!(),
    };
    let omega0 = hz_to_rad(center_frequency(&tf).map_err(usage)?);
    Ok(PoleSource {
        name: name.to_owned(),
        tf,
        omega0,
        q: Some(q),
        warnings: Vec::new(),
    })
}
