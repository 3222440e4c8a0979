//! Closed form against nodal solution, per probe.

use crate::analysis::{compare, sweep_netlist, sweep_tf, FrequencyGrid};
use crate::error::Result;
use crate::topology::{TopologyBundle, TopologyKind};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeCheck<T> {
    pub probe: String,
    pub max_rel_err: T,
}

/// Relative error `max|H_mna − H_closed| / max|H_closed|` for every closed form
/// in the bundle, in label order.
pub fn verify_bundle<T: Scalar>(bundle: &TopologyBundle<T>, grid: &FrequencyGrid<T>) -> Result<Vec<ProbeCheck<T>>> {
    bundle
        .closed_forms
        .iter()
        .map(|(label, tf)| {
            let closed = sweep_tf(tf, grid)?;
            let oracle = sweep_netlist(&bundle.netlist, label, grid)?;
            Ok(ProbeCheck {
                probe: label.clone(),
                max_rel_err: compare(&oracle, &closed)?,
            })
        })
        .collect()
}

/// Worst probe error of a preset configuration.
pub fn verify_preset<T: Scalar>(kind: TopologyKind, grid: &FrequencyGrid<T>) -> Result<(T, Vec<ProbeCheck<T>>)> {
    let checks = verify_bundle(&kind.preset::<T>().build()?, grid)?;
    let worst = checks.iter().map(|c| c.max_rel_err).fold(T::zero(), T::max);
    Ok((worst, checks))
}
