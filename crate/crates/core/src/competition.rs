//! Competition of replicators in a flow reactor at constant organization.
//!
//! Each replicator grows as `i_k * c_k^p` and is diluted by a common outflow
//! `phi(t) * c_k`, with
//!
//! ```text
//! phi = sum_j(i_j * c_j^p) / sum_j(c_j)
//! ```
//!
//! chosen so that the total concentration stays constant. The long-run outcome
//! depends on the shared order `p`:
//!
//! * `p < 1`: coexistence with stationary ratios `(i_A/i_B)^(1/(1-p))`.
//! * `p = 1`: the most efficient replicator takes over (survival of the fittest).
//! * `p > 1`: the replicator with the largest `i_k * c0_k^(p-1)` takes over
//!   (survival of the most common).

use crate::error::{Error, Result};
use crate::integrate::{self, IntegratorConfig, OdeSystem};

/// Fractions below this share of the total count as extinct.
pub const EXTINCTION_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Replicator {
    pub label: String,
    pub efficiency: f64,
    pub initial: f64,
}

impl Replicator {
    pub fn new(label: impl Into<String>, efficiency: f64, initial: f64) -> Result<Replicator> {
        if !(efficiency > 0.0 && efficiency.is_finite()) {
            return Err(Error::domain("efficiency", "positive and finite", efficiency));
        }
        if !(initial > 0.0 && initial.is_finite()) {
            return Err(Error::domain(
                "initial concentration",
                "positive and finite",
                initial,
            ));
        }
        Ok(Replicator {
            label: label.into(),
            efficiency,
            initial,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetitionSystem {
    replicators: Vec<Replicator>,
    order: f64,
    total: f64,
}

impl CompetitionSystem {
    pub fn new(replicators: Vec<Replicator>, order: f64) -> Result<CompetitionSystem> {
        if replicators.len() < 2 {
            return Err(Error::TooFewReplicators(replicators.len()));
        }
        if !(order >= 0.0 && order.is_finite()) {
            return Err(Error::domain("order", "non-negative and finite", order));
        }
        for (k, r) in replicators.iter().enumerate() {
            if replicators[..k].iter().any(|o| o.label == r.label) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
        }
        let total = replicators.iter().map(|r| r.initial).sum();
        Ok(CompetitionSystem {
            replicators,
            order,
            total,
        })
    }

    pub fn replicators(&self) -> &[Replicator] {
        &self.replicators
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn labels(&self) -> Vec<String> {
        self.replicators.iter().map(|r| r.label.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Stationary fractions per label, summing to one.
    CoexistenceRatios(Vec<(String, f64)>),
    /// `p = 1`: the strictly most efficient replicator wins.
    SoleWinner(String),
    /// `p > 1`: the winner depends on efficiency and initial abundance.
    InitialConditionWinner(String),
    /// Exact tie for the decisive score among these labels.
    Tie(Vec<String>),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::CoexistenceRatios(_) => "coexistence",
            Outcome::SoleWinner(_) => "sole-winner",
            Outcome::InitialConditionWinner(_) => "initial-condition-winner",
            Outcome::Tie(_) => "tie",
        }
    }
}

/// Stationary ratio `c_A/c_B = (i_A/i_B)^(1/(1-p))` for `0 <= p < 1`.
pub fn stationary_ratio(order: f64, eff_a: f64, eff_b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&order) {
        return Err(Error::domain(
            "order",
            "in [0, 1) for a finite coexistence ratio",
            order,
        ));
    }
    for v in [eff_a, eff_b] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain("efficiency", "positive and finite", v));
        }
    }
    if order == 0.0 {
        return Ok(eff_a / eff_b);
    }
    Ok(((eff_a.ln() - eff_b.ln()) / (1.0 - order)).exp())
}

pub fn predict_outcome(system: &CompetitionSystem) -> Outcome {
    let p = system.order;
    let reps = &system.replicators;
    if p < 1.0 {
        let q = 1.0 - p;
        let ln_max = reps
            .iter()
            .map(|r| r.efficiency.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = reps
            .iter()
            .map(|r| ((r.efficiency.ln() - ln_max) / q).exp())
            .collect();
        // Summed in sorted order so relabeling cannot change the rounding.
        let mut sorted = weights.clone();
        sorted.sort_by(f64::total_cmp);
        let sum: f64 = sorted.iter().sum();
        return Outcome::CoexistenceRatios(
            reps.iter()
                .zip(weights)
                .map(|(r, w)| (r.label.clone(), w / sum))
                .collect(),
        );
    }

    let scores: Vec<f64> = reps.iter().map(|r| decisive_score(r, p)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let leaders: Vec<String> = reps
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best)
        .map(|(r, _)| r.label.clone())
        .collect();
    if leaders.len() > 1 {
        return Outcome::Tie(leaders);
    }
    let winner = leaders.into_iter().next().expect("at least two replicators");
    if p == 1.0 {
        Outcome::SoleWinner(winner)
    } else {
        Outcome::InitialConditionWinner(winner)
    }
}

/// Initial per-capita growth `i * c0^(p-1)`; reduces to `i` at `p = 1`.
fn decisive_score(r: &Replicator, order: f64) -> f64 {
    if order == 1.0 {
        r.efficiency
    } else {
        r.efficiency * r.initial.powf(order - 1.0)
    }
}

/// Predicted terminal fraction of every replicator, in system order.
pub fn predicted_fractions(system: &CompetitionSystem) -> Vec<f64> {
    let reps = &system.replicators;
    let share_of = |labels: &[String]| -> Vec<f64> {
        let sum: f64 = reps
            .iter()
            .filter(|r| labels.contains(&r.label))
            .map(|r| r.initial)
            .sum();
        reps.iter()
            .map(|r| {
                if labels.contains(&r.label) {
                    r.initial / sum
                } else {
                    0.0
                }
            })
            .collect()
    };
    match predict_outcome(system) {
        Outcome::CoexistenceRatios(ratios) => ratios.into_iter().map(|(_, f)| f).collect(),
        Outcome::SoleWinner(w) | Outcome::InitialConditionWinner(w) => share_of(&[w]),
        // Tied leaders keep their initial proportions among themselves.
        Outcome::Tie(labels) => share_of(&labels),
    }
}

/// Sampled fractions of every replicator at the integrator's accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitionTrajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// Row-major, one row of `labels.len()` fractions per time.
    fractions: Vec<f64>,
    /// Largest `|sum(c) - total| / total` over the accepted steps.
    pub max_total_drift: f64,
}

impl CompetitionTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn fractions(&self, k: usize) -> &[f64] {
        let n = self.labels.len();
        &self.fractions[k * n..(k + 1) * n]
    }

    pub fn terminal(&self) -> &[f64] {
        self.fractions(self.len() - 1)
    }

    /// Fractions at `t`, linearly interpolated between accepted steps.
    pub fn fractions_at(&self, t: f64) -> Option<Vec<f64>> {
        let (&first, &last) = (self.times.first()?, self.times.last()?);
        if t < first || t > last {
            return None;
        }
        let k = self.times.partition_point(|&s| s < t);
        if self.times[k] == t || k == 0 {
            return Some(self.fractions(k).to_vec());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.fractions(k - 1)
                .iter()
                .zip(self.fractions(k))
                .map(|(a, b)| a + (b - a) * w)
                .collect(),
        )
    }
}

struct FlowReactor<'a> {
    system: &'a CompetitionSystem,
    ln_efficiency: Vec<f64>,
}

impl FlowReactor<'_> {
    fn growth(&self, k: usize, c: f64) -> f64 {
        let p = self.system.order;
        if p > 1.0 {
            // i * c^(p-1) in log space, then times c.
            c * (self.ln_efficiency[k] + (p - 1.0) * c.ln()).exp()
        } else {
            self.system.replicators[k].efficiency * c.powf(p)
        }
    }
}

impl OdeSystem for FlowReactor<'_> {
    fn dim(&self) -> usize {
        self.system.replicators.len()
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let mut inflow = 0.0;
        let mut total = 0.0;
        for (k, &c) in y.iter().enumerate() {
            let c = c.max(0.0);
            let g = self.growth(k, c);
            dy[k] = g;
            inflow += g;
            total += c;
        }
        let phi = inflow / total;
        for (d, &c) in dy.iter_mut().zip(y) {
            *d -= phi * c.max(0.0);
        }
    }
}

pub fn simulate_competition(
    system: &CompetitionSystem,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<CompetitionTrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain("t_end", "positive and finite", t_end));
    }
    let reactor = FlowReactor {
        system,
        ln_efficiency: system
            .replicators
            .iter()
            .map(|r| r.efficiency.ln())
            .collect(),
    };
    let y0: Vec<f64> = system.replicators.iter().map(|r| r.initial).collect();
    let solution = integrate::solve(&reactor, &y0, t_end, config)?;
    if solution.stop != integrate::Stop::Reached {
        let t = *solution.times.last().expect("non-empty");
        return Err(Error::StepUnderflow { t });
    }

    let n = y0.len();
    let mut fractions = Vec::with_capacity(solution.states.len());
    let mut max_total_drift = 0.0_f64;
    for k in 0..solution.len() {
        let state = solution.state(k);
        let sum: f64 = state.iter().map(|c| c.max(0.0)).sum();
        max_total_drift = max_total_drift.max(((sum - system.total) / system.total).abs());
        fractions.extend(state.iter().map(|c| c.max(0.0) / sum));
    }
    debug_assert_eq!(fractions.len(), n * solution.len());
    Ok(CompetitionTrajectory {
        labels: system.labels(),
        times: solution.times,
        fractions,
        max_total_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicatorCheck {
    pub label: String,
    pub predicted: f64,
    pub simulated: f64,
    pub extinct: bool,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub outcome: Outcome,
    pub checks: Vec<ReplicatorCheck>,
    /// Largest change of any fraction over the final 10% of the run.
    pub drift: f64,
    pub converged: bool,
    pub tol: f64,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.converged && self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }
}

/// Simulates to `t_end` and checks the terminal fractions against the
/// predicted outcome.
///
/// Surviving replicators must match their predicted fraction to within `tol`
/// relative; replicators predicted to die out must fall below
/// [`EXTINCTION_THRESHOLD`]. The run counts as converged only when no fraction
/// moved by `tol / 10` or more over the last 10% of the run.
pub fn verify_prediction(
    system: &CompetitionSystem,
    t_end: f64,
    tol: f64,
    config: &IntegratorConfig,
) -> Result<AgreementReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain("tol", "positive and finite", tol));
    }
    let trajectory = simulate_competition(system, t_end, config)?;
    let terminal = trajectory.terminal();
    let earlier = trajectory
        .fractions_at(0.9 * t_end)
        .expect("0.9 t_end lies inside the run");
    let drift = terminal
        .iter()
        .zip(&earlier)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let predicted = predicted_fractions(system);
    let checks = system
        .replicators
        .iter()
        .zip(&predicted)
        .zip(terminal)
        .map(|((r, &pred), &sim)| {
            let extinct = sim < EXTINCTION_THRESHOLD;
            let ok = if pred == 0.0 {
                extinct
            } else {
                (sim - pred).abs() <= tol * pred
            };
            ReplicatorCheck {
                label: r.label.clone(),
                predicted: pred,
                simulated: sim,
                extinct,
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            }
        })
        .collect();

    Ok(AgreementReport {
        outcome: predict_outcome(system),
        checks,
        drift,
        converged: drift < tol / 10.0,
        tol,
    })
}
