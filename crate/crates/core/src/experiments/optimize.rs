use rayon::prelude::*;

use super::{AxisName, Scenario};
use crate::error::ExperimentError;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    pub best: f64,
    pub objective: f64,
    /// Every `(parameter, objective)` pair, in axis order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Exhaustive grid search for the maximum of `objective` over `axis`.
/// Ties go to the smaller parameter value.
pub fn optimize<F>(axis: &[f64], objective: F) -> Result<OptimizeResult, ExperimentError>
where
    F: Fn(f64) -> Result<f64, ExperimentError> + Sync,
{
    if axis.is_empty() {
        return Err(ExperimentError::EmptyAxis);
    }
    let evaluations = axis
        .par_iter()
        .map(|&x| Ok((x, objective(x)?)))
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let (best, value) = evaluations
        .iter()
        .copied()
        .reduce(|acc, cand| {
            if cand.1 > acc.1 || (cand.1 == acc.1 && cand.0 < acc.0) {
                cand
            } else {
                acc
            }
        })
        .expect("axis is nonempty");
    Ok(OptimizeResult {
        best,
        objective: value,
        evaluations,
    })
}

/// Maximises the quantum `P_tot` at `horizon` over one scenario parameter.
pub fn optimize_scenario(
    base: &Scenario,
    axis: AxisName,
    values: &[f64],
    horizon: usize,
) -> Result<OptimizeResult, ExperimentError> {
    if horizon > base.t_max {
        return Err(ExperimentError::Config(format!(
            "optimize_horizon = {horizon} exceeds t_max = {}",
            base.t_max
        )));
    }
    optimize(values, |v| {
        let s = axis.apply(base, v)?;
        s.validate()?;
        let xi = s.xi_values.first().copied().unwrap_or(0.0);
        Ok(s.run_quantum(xi)?.p_tot_at(horizon))
    })
}
