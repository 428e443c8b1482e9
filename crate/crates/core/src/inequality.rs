//! Lorenz curves and Gini indices of account populations that all grow under
//! one shared rate and order.
//!
//! The Gini index uses the population convention
//! `G = sum_i sum_j |x_i - x_j| / (2 n^2 mean)` without small-sample
//! correction, which makes it equal to one minus twice the trapezoidal area
//! under the Lorenz curve.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::kinetics::{self, GrowthValue, Unit};
use crate::sum::neumaier;

#[derive(Debug, Clone, PartialEq)]
pub struct AccountPopulation {
    balances: Vec<f64>,
    rate: f64,
    order: f64,
    unit: Unit,
}

impl AccountPopulation {
    pub fn new(balances: Vec<f64>, rate: f64, order: f64) -> Result<AccountPopulation> {
        if balances.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if let Some(&bad) = balances.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::domain("balance", "positive and finite", bad));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::domain("rate", "non-negative and finite", rate));
        }
        if !(order >= 0.0 && order.is_finite()) {
            return Err(Error::domain("order", "non-negative and finite", order));
        }
        Ok(AccountPopulation {
            balances,
            rate,
            order,
            unit: Unit::default(),
        })
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn balances(&self) -> &[f64] {
        &self.balances
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.balances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balances.is_empty()
    }

    /// Earliest blow-up time over all accounts, for `p > 1`.
    pub fn min_blowup_time(&self) -> Option<f64> {
        if !(self.order > 1.0 && self.rate > 0.0) {
            return None;
        }
        // t* falls with the balance, so the largest account diverges first.
        let largest = self.balances.iter().copied().fold(f64::MIN, f64::max);
        Some(kinetics::blowup_time_raw(largest, self.rate, self.order))
    }
}

/// Points `(population share, wealth share)` from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    pub points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        neumaier(
            self.points
                .windows(2)
                .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)),
        )
    }
}

pub fn lorenz_curve(pop: &AccountPopulation) -> LorenzCurve {
    lorenz_of(&pop.balances).expect("populations are non-empty")
}

/// Lorenz curve of raw balances.
pub fn lorenz_of(balances: &[f64]) -> Result<LorenzCurve> {
    if balances.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let sorted = sorted(balances);
    let n = sorted.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for &v in &sorted {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        cumulative.push(sum + comp);
    }
    let total = cumulative[n];
    let points = cumulative
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let share = k as f64 / n as f64;
            // The curve never rises above the diagonal; clip rounding.
            (share, (c / total).min(share))
        })
        .collect();
    Ok(LorenzCurve { points })
}

pub fn gini(pop: &AccountPopulation) -> f64 {
    gini_of(&pop.balances).expect("populations are non-empty")
}

/// Gini index of raw balances via the rank form
/// `sum_i (2i - n - 1) x_(i) / (n * sum(x))`.
pub fn gini_of(balances: &[f64]) -> Result<f64> {
    if balances.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let sorted = sorted(balances);
    let n = sorted.len() as f64;
    let total = neumaier(sorted.iter().copied());
    let weighted = neumaier(
        sorted
            .iter()
            .enumerate()
            .map(|(k, &x)| (2.0 * (k as f64 + 1.0) - n - 1.0) * x),
    );
    Ok((weighted / (n * total)).max(0.0))
}

fn sorted(balances: &[f64]) -> Vec<f64> {
    let mut v = balances.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Every balance advanced by `t` years under the population's shared law.
pub fn evolve_population(pop: &AccountPopulation, t: f64) -> Result<AccountPopulation> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("t", "non-negative and finite", t));
    }
    let balances = pop
        .balances
        .iter()
        .enumerate()
        .map(
            |(index, &b)| match kinetics::closed_form(b, pop.rate, pop.order, t) {
                GrowthValue::Finite(v) => Ok(v),
                GrowthValue::Diverged => Err(Error::AccountBlowup {
                    index,
                    balance: b,
                    blowup_time: kinetics::blowup_time_raw(b, pop.rate, pop.order),
                    t,
                }),
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    Ok(AccountPopulation {
        balances,
        ..pop.clone()
    })
}

/// `(t, gini(evolve_population(pop, t)))` for each `t` of a non-decreasing grid.
pub fn gini_trajectory(pop: &AccountPopulation, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] >= w[0])) {
        return Err(Error::domain("time grid", "non-decreasing", w[1]));
    }
    t_grid
        .iter()
        .map(|&t| Ok((t, gini(&evolve_population(pop, t)?))))
        .collect()
}

/// [`gini_trajectory`] for many populations at once.
pub fn gini_trajectories(
    pops: &[AccountPopulation],
    t_grid: &[f64],
    exec: Execution,
) -> Result<Vec<Vec<(f64, f64)>>> {
    exec::try_map(exec, pops, |pop| gini_trajectory(pop, t_grid))
}
