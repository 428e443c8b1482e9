//! Evaluation of the growth law over a (principal, order, rate) grid.

use crate::error::Result;
use crate::exec::{self, Execution};
use crate::integrate::{self, IntegratorConfig};
use crate::kinetics::{self, GrowthSpec, GrowthValue, Regime};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub principals: Vec<f64>,
    pub orders: Vec<f64>,
    pub rates: Vec<f64>,
    pub horizon: f64,
}

impl SweepGrid {
    /// Grid points in principal-major, then order, then rate order.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out =
            Vec::with_capacity(self.principals.len() * self.orders.len() * self.rates.len());
        for &c in &self.principals {
            for &p in &self.orders {
                for &i in &self.rates {
                    out.push((c, p, i));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub principal: f64,
    pub order: f64,
    pub rate: f64,
    pub regime: Regime,
    /// Growth factor at the horizon.
    pub factor: GrowthValue,
    pub doubling_time: Option<f64>,
    pub blowup_time: Option<f64>,
    /// End of the interval the oracle was checked on: the horizon, or
    /// `0.9 t*` when that comes first.
    pub oracle_horizon: f64,
    /// Largest relative deviation of the integrator from the closed form.
    pub oracle_error: f64,
}

pub fn evaluate_point(
    principal: f64,
    order: f64,
    rate: f64,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<SweepRow> {
    let spec = GrowthSpec::new(principal, rate, order)?;
    let blowup_time = kinetics::blowup_time(&spec);
    let oracle_horizon = blowup_time.map_or(horizon, |t| horizon.min(0.9 * t));
    Ok(SweepRow {
        principal,
        order,
        rate,
        regime: spec.regime(),
        factor: kinetics::growth_factor(&spec, horizon),
        doubling_time: kinetics::doubling_time(&spec).ok(),
        blowup_time,
        oracle_horizon,
        oracle_error: integrate::max_rel_error_vs_closed_form(&spec, oracle_horizon, config)?,
    })
}

/// Evaluates every grid point. Rows come back in [`SweepGrid::points`] order
/// regardless of the execution mode.
pub fn run_sweep(
    grid: &SweepGrid,
    config: &IntegratorConfig,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    exec::try_map(exec, &grid.points(), |&(c, p, i)| {
        evaluate_point(c, p, i, grid.horizon, config)
    })
}
