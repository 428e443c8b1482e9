//! Closed-form evaluation of the growth law `dc/dt = i * c^p`.
//!
//! For `p != 1` the solution is
//!
//! ```text
//! c(t) = [c0^(1-p) + (1-p) * i * t]^(1/(1-p))
//! ```
//!
//! and for `p = 1` it is `c0 * exp(i * t)`. Everything here evaluates the
//! solution through `ln_1p`/`exp_m1` so that orders close to one do not suffer
//! from cancellation in `1 - p`.
//!
//! For `p != 1` numbers depend on the currency unit, so every [`GrowthSpec`]
//! carries the [`Unit`] its amounts are expressed in.

use std::fmt;

use arrayvec::ArrayString;

use crate::error::{Error, Result};

/// Reference currency unit that amounts are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unit(ArrayString<16>);

impl Unit {
    pub fn new(code: &str) -> Result<Unit> {
        if code.is_empty() {
            return Err(Error::InvalidUnit(code.to_owned()));
        }
        ArrayString::from(code)
            .map(Unit)
            .map_err(|_| Error::InvalidUnit(code.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl Default for Unit {
    fn default() -> Self {
        Unit(ArrayString::from("EUR").expect("fits"))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One instance of the growth law: principal `c0`, rate `i` and order `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSpec {
    principal: f64,
    rate: f64,
    order: f64,
    unit: Unit,
}

impl GrowthSpec {
    /// Builds a spec in the default unit. Requires `principal > 0`,
    /// `rate >= 0` and `order >= 0`, all finite.
    pub fn new(principal: f64, rate: f64, order: f64) -> Result<GrowthSpec> {
        check_positive("principal", principal)?;
        check_non_negative("rate", rate)?;
        check_non_negative("order", order)?;
        Ok(GrowthSpec {
            principal,
            rate,
            order,
            unit: Unit::default(),
        })
    }

    pub fn with_unit(mut self, unit: Unit) -> GrowthSpec {
        self.unit = unit;
        self
    }

    pub fn principal(&self) -> f64 {
        self.principal
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

    pub fn regime(&self) -> Regime {
        Regime::of(self.order)
    }

    /// Re-expresses the spec in another unit, where one old unit equals
    /// `per_reference` new units.
    ///
    /// The rate is rescaled by `per_reference^(1-p)` so that the converted
    /// spec describes the same trajectory.
    pub fn convert_unit(&self, unit: Unit, per_reference: f64) -> Result<GrowthSpec> {
        check_positive("unit conversion factor", per_reference)?;
        let q = 1.0 - self.order;
        let rate = self.rate * (q * per_reference.ln()).exp();
        Ok(GrowthSpec::new(self.principal * per_reference, rate, self.order)?.with_unit(unit))
    }
}

/// Growth regime selected by the order `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `p = 0`
    Linear,
    /// `0 < p < 1`
    Monomial,
    /// `p = 1`
    Exponential,
    /// `p > 1`
    Hyperbolic,
}

impl Regime {
    fn of(order: f64) -> Regime {
        if order == 0.0 {
            Regime::Linear
        } else if order < 1.0 {
            Regime::Monomial
        } else if order == 1.0 {
            Regime::Exponential
        } else {
            Regime::Hyperbolic
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Monomial => "monomial",
            Regime::Exponential => "exponential",
            Regime::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn classify_regime(order: f64) -> Result<Regime> {
    check_non_negative("order", order)?;
    Ok(Regime::of(order))
}

/// A principal (or ratio) at some time, or the marker for a trajectory that
/// has passed its blow-up time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthValue {
    Finite(f64),
    Diverged,
}

impl GrowthValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GrowthValue::Finite(v) => Some(v),
            GrowthValue::Diverged => None,
        }
    }

    pub fn is_diverged(self) -> bool {
        matches!(self, GrowthValue::Diverged)
    }

    fn map(self, f: impl FnOnce(f64) -> f64) -> GrowthValue {
        match self {
            GrowthValue::Finite(v) => GrowthValue::Finite(f(v)),
            GrowthValue::Diverged => GrowthValue::Diverged,
        }
    }
}

/// Value of the spec's principal after `t` years.
///
/// # Panics
///
/// If `t` is negative or NaN.
pub fn principal_at(spec: &GrowthSpec, t: f64) -> GrowthValue {
    closed_form(spec.principal, spec.rate, spec.order, t)
}

/// `principal_at(spec, t) / spec.principal`.
pub fn growth_factor(spec: &GrowthSpec, t: f64) -> GrowthValue {
    assert!(t >= 0.0, "time must be non-negative, got {t}");
    if t == 0.0 {
        return GrowthValue::Finite(1.0);
    }
    ln_growth(spec.principal, spec.rate, spec.order, t).map(f64::exp)
}

/// Closed form on raw parameters, for hot loops that already validated them.
pub(crate) fn closed_form(principal: f64, rate: f64, order: f64, t: f64) -> GrowthValue {
    assert!(t >= 0.0, "time must be non-negative, got {t}");
    if t == 0.0 {
        return GrowthValue::Finite(principal);
    }
    ln_growth(principal, rate, order, t).map(|ln_factor| principal * ln_factor.exp())
}

/// `ln(c(t) / c0)`.
fn ln_growth(principal: f64, rate: f64, order: f64, t: f64) -> GrowthValue {
    if rate == 0.0 {
        return GrowthValue::Finite(0.0);
    }
    if order == 1.0 {
        return GrowthValue::Finite(rate * t);
    }
    let q = 1.0 - order;
    if order > 1.0 {
        let t_star = blowup_time_raw(principal, rate, order);
        if t >= t_star {
            return GrowthValue::Diverged;
        }
        let mut ln_base = (-(t / t_star)).ln_1p();
        if ln_base == f64::NEG_INFINITY {
            ln_base = ((t_star - t) / t_star).ln();
        }
        return GrowthValue::Finite(ln_base / q);
    }
    // c0^(1-p) + (1-p) i t = c0^(1-p) * (1 + x)
    let x = q * rate * t * (-q * principal.ln()).exp();
    GrowthValue::Finite(x.ln_1p() / q)
}

/// Effective (interest-bearing) principal `c^p`.
pub fn effective_principal(c: f64, order: f64) -> Result<f64> {
    check_positive("amount", c)?;
    check_non_negative("order", order)?;
    Ok(c.powf(order))
}

/// Time for the principal to grow to `target`.
///
/// Requires `target >= principal` and a positive rate.
pub fn time_to_reach(spec: &GrowthSpec, target: f64) -> Result<f64> {
    if !(target >= spec.principal) || !target.is_finite() {
        return Err(Error::domain(
            "target",
            "finite and at least the principal",
            target,
        ));
    }
    if spec.rate == 0.0 {
        return Err(Error::NoDoubling);
    }
    let q = 1.0 - spec.order;
    let ln_ratio = (target / spec.principal).ln();
    // c0^(1-p) * ((target/c0)^(1-p) - 1) / ((1-p) i)
    Ok(scale_q(spec.principal, q) * expm1_over(q, ln_ratio) / spec.rate)
}

/// Time for the principal to double.
pub fn doubling_time(spec: &GrowthSpec) -> Result<f64> {
    if spec.rate == 0.0 {
        return Err(Error::NoDoubling);
    }
    let q = 1.0 - spec.order;
    Ok(scale_q(spec.principal, q) * expm1_over(q, std::f64::consts::LN_2) / spec.rate)
}

/// Rate that makes `principal` double in `target_doubling` years at `order`.
pub fn required_rate(order: f64, principal: f64, target_doubling: f64) -> Result<f64> {
    check_non_negative("order", order)?;
    check_positive("principal", principal)?;
    check_positive("target doubling time", target_doubling)?;
    let q = 1.0 - order;
    Ok(scale_q(principal, q) * expm1_over(q, std::f64::consts::LN_2) / target_doubling)
}

/// Finite blow-up time `t* = c0^(1-p) / ((p-1) i)` for `p > 1` and `i > 0`.
pub fn blowup_time(spec: &GrowthSpec) -> Option<f64> {
    (spec.order > 1.0 && spec.rate > 0.0)
        .then(|| blowup_time_raw(spec.principal, spec.rate, spec.order))
}

pub(crate) fn blowup_time_raw(principal: f64, rate: f64, order: f64) -> f64 {
    scale_q(principal, 1.0 - order) / ((order - 1.0) * rate)
}

/// `c^q`
fn scale_q(c: f64, q: f64) -> f64 {
    (q * c.ln()).exp()
}

/// `(exp(q x) - 1) / q`, with the `q -> 0` limit `x`.
fn expm1_over(q: f64, x: f64) -> f64 {
    if q == 0.0 {
        x
    } else {
        (q * x).exp_m1() / q
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, "positive and finite", v))
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, "non-negative and finite", v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn spec(c0: f64, i: f64, p: f64) -> GrowthSpec {
        GrowthSpec::new(c0, i, p).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(0.0).unwrap(), Regime::Linear);
        assert_eq!(classify_regime(0.5).unwrap(), Regime::Monomial);
        assert_eq!(classify_regime(1.0).unwrap(), Regime::Exponential);
        assert_eq!(classify_regime(2.0).unwrap(), Regime::Hyperbolic);
        assert!(matches!(
            classify_regime(-0.1),
            Err(Error::Domain { name: "order", .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(GrowthSpec::new(0.0, 0.05, 1.0).is_err());
        assert!(GrowthSpec::new(-1.0, 0.05, 1.0).is_err());
        assert!(GrowthSpec::new(1.0, -0.05, 1.0).is_err());
        assert!(GrowthSpec::new(1.0, 0.05, -1.0).is_err());
        assert!(GrowthSpec::new(f64::NAN, 0.05, 1.0).is_err());
        assert!(GrowthSpec::new(1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn units() {
        assert_eq!(Unit::default().as_str(), "EUR");
        assert!(Unit::new("").is_err());
        assert!(Unit::new("a-very-long-currency-name").is_err());
        let s = spec(5.0, 0.05, 0.9).with_unit(Unit::new("USD").unwrap());
        assert_eq!(s.unit().to_string(), "USD");
    }

    #[test]
    fn unit_conversion_preserves_trajectory() {
        let eur = spec(1000.0, 0.05, 0.95);
        let cents = eur.convert_unit(Unit::new("cent").unwrap(), 100.0).unwrap();
        let a = principal_at(&eur, 50.0).finite().unwrap();
        let b = principal_at(&cents, 50.0).finite().unwrap();
        assert!(rel(b / 100.0, a) < 1e-13);
        // Same rate in the new unit would not be the same law.
        let naive = spec(100_000.0, 0.05, 0.95);
        assert!(rel(principal_at(&naive, 50.0).finite().unwrap() / 100.0, a) > 1e-2);
    }

    #[test]
    fn exponential_factor_148() {
        let f = growth_factor(&spec(1.0, 0.05, 1.0), 100.0).finite().unwrap();
        assert!(rel(f, 5.0_f64.exp()) < 1e-15);
        assert!((f - 148.41).abs() < 0.01);
    }

    #[test]
    fn parabolic_case() {
        let v = principal_at(&spec(1.0, 0.05, 0.5), 100.0).finite().unwrap();
        assert!(rel(v, 12.25) < 1e-14);
    }

    #[test]
    fn linear_case_is_simple_interest() {
        let v = principal_at(&spec(100.0, 0.05, 0.0), 10.0).finite().unwrap();
        assert!(rel(v, 100.5) < 1e-14);
    }

    #[test]
    fn initial_value_is_exact() {
        for &(c0, p) in &[(0.1, 0.0), (3.3, 0.5), (1e9, 1.0), (7.0, 1.7)] {
            assert_eq!(principal_at(&spec(c0, 0.05, p), 0.0), GrowthValue::Finite(c0));
            assert_eq!(growth_factor(&spec(c0, 0.05, p), 0.0), GrowthValue::Finite(1.0));
        }
    }

    #[test]
    fn zero_rate_is_constant() {
        let s = spec(42.0, 0.0, 1.5);
        assert_eq!(principal_at(&s, 1e6), GrowthValue::Finite(42.0));
        assert_eq!(blowup_time(&s), None);
        assert_eq!(doubling_time(&s), Err(Error::NoDoubling));
    }

    #[test]
    fn published_factor_anchors() {
        // Subexponential factors at 5% after 100 years.
        let f = |c0: f64, p: f64| growth_factor(&spec(c0, 0.05, p), 100.0).finite().unwrap();
        assert!((f(1000.0, 0.99) - 96.0).abs() / 96.0 < 0.015);
        assert!((f(1e9, 0.95) - 5.5).abs() / 5.5 < 0.015);
        assert!(rel(f(1.0, 0.95), 1.25_f64.powi(20)) < 1e-13);
    }

    #[test]
    fn effective_principal_rows() {
        assert!((effective_principal(1000.0, 1.1).unwrap() - 1995.26).abs() < 0.005);
        assert!((effective_principal(1e10, 0.9).unwrap() - 1e9).abs() < 0.005);
        assert_eq!(effective_principal(1234.5, 1.0).unwrap(), 1234.5);
        assert!(effective_principal(0.0, 1.0).is_err());
        assert!(effective_principal(-3.0, 1.0).is_err());
    }

    #[test]
    fn doubling_time_anchors() {
        let ln2 = std::f64::consts::LN_2;
        assert!(rel(doubling_time(&spec(1.0, 0.01, 1.0)).unwrap(), ln2 / 0.01) < 1e-15);
        assert!(rel(doubling_time(&spec(1.0, 1.0, 1.0)).unwrap(), ln2) < 1e-15);
        let t2 = doubling_time(&spec(1e9, 0.1987, 0.95)).unwrap();
        assert!((t2 - 10.0).abs() < 0.01, "{t2}");
    }

    #[test]
    fn doubling_time_doubles() {
        for &p in &[0.0, 0.5, 0.95, 1.0, 1.05, 2.0] {
            for &c0 in &[1.0, 1e3, 1e9] {
                let s = spec(c0, 0.05, p);
                let t2 = doubling_time(&s).unwrap();
                let v = principal_at(&s, t2).finite().unwrap();
                assert!(rel(v, 2.0 * c0) < 1e-9, "p={p} c0={c0}: {v}");
            }
        }
    }

    #[test]
    fn required_rate_anchors() {
        let r = required_rate(0.97, 1e9, 10.0).unwrap();
        assert!((r - 0.1304).abs() < 5e-5);
        let r = required_rate(1.0, 123.0, 7.0).unwrap();
        assert!((r - 0.099).abs() < 1e-3);
        assert!(required_rate(1.0, 1.0, 0.0).is_err());
        assert!(required_rate(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn blowup_anchors() {
        assert_eq!(blowup_time(&spec(1.0, 1.0, 2.0)), Some(1.0));
        assert_eq!(blowup_time(&spec(1.0, 1.0, 1.0)), None);
        assert_eq!(blowup_time(&spec(1.0, 1.0, 0.5)), None);
        let t = blowup_time(&spec(1e9, 0.05, 1.05)).unwrap();
        assert!((t - 141.9).abs() < 0.05);
    }

    #[test]
    fn diverged_exactly_from_blowup_time() {
        let s = spec(1.0, 1.0, 2.0);
        assert!(principal_at(&s, 1.0).is_diverged());
        assert!(principal_at(&s, 5.0).is_diverged());
        assert!(growth_factor(&s, 1.0).is_diverged());
        let before = 1.0 - f64::EPSILON;
        let v = principal_at(&s, before).finite().unwrap();
        assert!(v.is_finite() && v > 1e15);
        let v = principal_at(&s, 0.5).finite().unwrap();
        assert!(rel(v, 2.0) < 1e-15);
    }

    #[test]
    fn time_to_reach_generalizes_doubling() {
        let s = spec(1e9, 0.05, 1.05);
        let t = time_to_reach(&s, 60e9).unwrap();
        assert!((t - 26.27).abs() < 0.01, "{t}");
        assert!(rel(time_to_reach(&s, 2e9).unwrap(), doubling_time(&s).unwrap()) < 1e-14);
        assert!(time_to_reach(&s, 1.0).is_err());
    }
}
