//! Stepsize rules: constant, diminishing, and the two dynamic rules that
//! scale with `(f(x_k) - f*)^(1/p)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::OptimumMeta;

/// `C_{p,m} = L_max^(-1/p) * min{1, (2m)^(1 - 1/p)}`, the constant of the
/// deterministic incremental method.
pub fn c_pm(p: f64, m: usize, l_max: f64) -> f64 {
    l_max.powf(-1.0 / p) * (2.0 * m as f64).powf(1.0 - 1.0 / p).min(1.0)
}

/// `R_{p,m} = L_max^(-1/p) * min{1, m^(1 - 1/p)}`, the constant of the
/// randomized method.
pub fn r_pm(p: f64, m: usize, l_max: f64) -> f64 {
    l_max.powf(-1.0 / p) * (m as f64).powf(1.0 - 1.0 / p).min(1.0)
}

/// Asymptotic error bound of the deterministic method under a constant
/// stepsize `v`: `(m^2 v / (2 C_{p,m}))^p`.
pub fn incremental_error_bound(meta: &OptimumMeta, v: f64) -> f64 {
    let m = meta.m as f64;
    (m * m * v / (2.0 * c_pm(meta.p, meta.m, meta.l_max))).powf(meta.p)
}

/// Asymptotic error bound of the randomized method under a constant stepsize
/// `v`: `(m v / (2 R_{p,m}))^p`.
pub fn randomized_error_bound(meta: &OptimumMeta, v: f64) -> f64 {
    let m = meta.m as f64;
    (m * v / (2.0 * r_pm(meta.p, meta.m, meta.l_max))).powf(meta.p)
}

/// Closed form of `randomized_error_bound / incremental_error_bound`,
/// independent of `v` and `L_max`.
pub fn tolerance_ratio(p: f64, m: usize) -> f64 {
    let mf = m as f64;
    (2.0 * mf).powf(p - 1.0).min(1.0) / (mf.powf(p - 1.0).min(1.0) * mf.powf(p))
}

/// Upper bound `max{1, 2^(p-1)} / m^p` on [`tolerance_ratio`].
pub fn tolerance_ratio_bound(p: f64, m: usize) -> f64 {
    2f64.powf(p - 1.0).max(1.0) / (m as f64).powf(p)
}

type IndexFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A diminishing schedule `k -> v_k` with `v_k -> 0` and `sum v_k = inf`.
#[derive(Clone)]
pub enum Schedule {
    /// `v / (1 + rate * k)`
    Harmonic { v: f64, rate: f64 },
    /// `v / (1 + k)^exponent`, exponent in (0, 1]
    Power { v: f64, exponent: f64 },
    /// Caller-supplied schedule; positivity is checked on each call.
    Custom(IndexFn),
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Harmonic { v, rate } => write!(f, "Harmonic {{ v: {v}, rate: {rate} }}"),
            Schedule::Power { v, exponent } => write!(f, "Power {{ v: {v}, exponent: {exponent} }}"),
            Schedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Schedule {
    /// `v / (1 + 0.1 k)`, the schedule used in the Cobb-Douglas experiments.
    pub fn standard(v: f64) -> Result<Self> {
        Self::harmonic(v, 0.1)
    }

    pub fn harmonic(v: f64, rate: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Configuration(format!(
                "harmonic schedule needs v > 0 and rate > 0 (got v={v}, rate={rate})"
            )));
        }
        Ok(Schedule::Harmonic { v, rate })
    }

    pub fn power(v: f64, exponent: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) || !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::Configuration(format!(
                "power schedule needs v > 0 and exponent in (0, 1] (got v={v}, exponent={exponent})"
            )));
        }
        Ok(Schedule::Power { v, exponent })
    }

    pub fn at(&self, k: usize) -> Result<f64> {
        let v = match self {
            Schedule::Harmonic { v, rate } => v / (1.0 + rate * k as f64),
            Schedule::Power { v, exponent } => v / (1.0 + k as f64).powf(*exponent),
            Schedule::Custom(f) => f(k),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Configuration(format!("schedule produced non-positive stepsize {v} at k={k}")));
        }
        Ok(v)
    }
}

/// Relaxation sequence `gamma_k` of the dynamic rules, confined to
/// `[lower, upper]` within `(0, 2)`.
#[derive(Clone)]
pub enum Gamma {
    Constant(f64),
    Custom { f: IndexFn, lower: f64, upper: f64 },
}

impl fmt::Debug for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Constant(g) => write!(f, "Constant({g})"),
            Gamma::Custom { lower, upper, .. } => write!(f, "Custom {{ lower: {lower}, upper: {upper} }}"),
        }
    }
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma::Constant(1.0)
    }
}

impl Gamma {
    pub fn constant(g: f64) -> Result<Self> {
        if !(g > 0.0 && g < 2.0) {
            return Err(Error::Configuration(format!("gamma must lie in (0, 2), got {g}")));
        }
        Ok(Gamma::Constant(g))
    }

    pub fn custom(f: impl Fn(usize) -> f64 + Send + Sync + 'static, lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper < 2.0) {
            return Err(Error::Configuration(format!(
                "gamma bounds must satisfy 0 < lower <= upper < 2 (got {lower}, {upper})"
            )));
        }
        Ok(Gamma::Custom { f: Arc::new(f), lower, upper })
    }

    pub fn at(&self, k: usize) -> Result<f64> {
        match self {
            Gamma::Constant(g) => Ok(*g),
            Gamma::Custom { f, lower, upper } => {
                let g = f(k);
                if !(g >= *lower && g <= *upper) {
                    return Err(Error::Configuration(format!(
                        "gamma({k}) = {g} outside [{lower}, {upper}]"
                    )));
                }
                Ok(g)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum StepsizeRule {
    Constant { v: f64 },
    Diminishing(Schedule),
    /// `gamma_k * C_{p,m} / m^2 * (f(x_k) - f*)^(1/p)`, for the deterministic method.
    DynamicI { gamma: Gamma, f_star: Option<f64> },
    /// `gamma_k * R_{p,m} / m * (f(x_k) - f*)^(1/p)`, for the randomized method.
    DynamicII { gamma: Gamma, f_star: Option<f64> },
}

impl StepsizeRule {
    pub fn constant(v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Configuration(format!("constant stepsize must be positive, got {v}")));
        }
        Ok(StepsizeRule::Constant { v })
    }

    pub fn diminishing(schedule: Schedule) -> Self {
        StepsizeRule::Diminishing(schedule)
    }

    pub fn dynamic_i(gamma: Gamma, f_star: Option<f64>) -> Self {
        StepsizeRule::DynamicI { gamma, f_star }
    }

    pub fn dynamic_ii(gamma: Gamma, f_star: Option<f64>) -> Self {
        StepsizeRule::DynamicII { gamma, f_star }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, StepsizeRule::DynamicI { .. } | StepsizeRule::DynamicII { .. })
    }

    /// Fills in a missing `f*` of a dynamic rule from `fallback`; fails when
    /// neither is known.
    pub fn resolved(&self, fallback: Option<f64>) -> Result<Self> {
        let fix = |f_star: &Option<f64>| -> Result<Option<f64>> {
            match f_star.or(fallback) {
                Some(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(Error::Configuration("dynamic stepsize needs a known optimal value f*".into())),
            }
        };
        Ok(match self {
            StepsizeRule::DynamicI { gamma, f_star } => StepsizeRule::DynamicI {
                gamma: gamma.clone(),
                f_star: fix(f_star)?,
            },
            StepsizeRule::DynamicII { gamma, f_star } => StepsizeRule::DynamicII {
                gamma: gamma.clone(),
                f_star: fix(f_star)?,
            },
            other => other.clone(),
        })
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            StepsizeRule::Constant { v } => format!("constant(v={v})"),
            StepsizeRule::Diminishing(Schedule::Harmonic { v, rate }) => format!("diminishing(v={v};rate={rate})"),
            StepsizeRule::Diminishing(Schedule::Power { v, exponent }) => {
                format!("diminishing(v={v};exponent={exponent})")
            }
            StepsizeRule::Diminishing(Schedule::Custom(_)) => "diminishing(custom)".into(),
            StepsizeRule::DynamicI { gamma, .. } => format!("dynamic_i(gamma={})", gamma_label(gamma)),
            StepsizeRule::DynamicII { gamma, .. } => format!("dynamic_ii(gamma={})", gamma_label(gamma)),
        }
    }
}

fn gamma_label(g: &Gamma) -> String {
    match g {
        Gamma::Constant(v) => v.to_string(),
        Gamma::Custom { .. } => "custom".into(),
    }
}

/// A computed stepsize. `target_reached` is set when a dynamic rule sees
/// `f(x_k) <= f*`; the value is then zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stepsize {
    pub value: f64,
    pub target_reached: bool,
}

impl Stepsize {
    fn step(value: f64) -> Self {
        Stepsize { value, target_reached: false }
    }
}

/// Stepsize for iteration `k` at an iterate with objective value `f_xk`.
pub fn next_stepsize(rule: &StepsizeRule, k: usize, f_xk: f64, meta: &OptimumMeta) -> Result<Stepsize> {
    match rule {
        StepsizeRule::Constant { v } => Ok(Stepsize::step(*v)),
        StepsizeRule::Diminishing(s) => Ok(Stepsize::step(s.at(k)?)),
        StepsizeRule::DynamicI { gamma, f_star } | StepsizeRule::DynamicII { gamma, f_star } => {
            let f_star = f_star
                .ok_or_else(|| Error::Configuration("dynamic stepsize needs a known optimal value f*".into()))?;
            let gap = f_xk - f_star;
            if !(gap > 0.0) {
                return Ok(Stepsize { value: 0.0, target_reached: true });
            }
            let m = meta.m as f64;
            let scale = match rule {
                StepsizeRule::DynamicI { .. } => c_pm(meta.p, meta.m, meta.l_max) / (m * m),
                _ => r_pm(meta.p, meta.m, meta.l_max) / m,
            };
            Ok(Stepsize::step(gamma.at(k)? * scale * gap.powf(1.0 / meta.p)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(p: f64, m: usize, l_max: f64) -> OptimumMeta {
        OptimumMeta { p, l_max, m }
    }

    #[test]
    fn c_pm_examples() {
        assert_eq!(c_pm(1.0, 2, 1.0), 1.0);
        assert!((c_pm(2.0, 3, 4.0) - 0.5).abs() < 1e-15);
        assert!((c_pm(0.5, 2, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn r_pm_examples() {
        assert_eq!(r_pm(1.0, 5, 1.0), 1.0);
        assert!((r_pm(0.5, 4, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(r_pm(2.0, 2, 1.0), 1.0);
    }

    #[test]
    fn constants_are_one_at_order_one() {
        for m in 1..200 {
            assert_eq!(c_pm(1.0, m, 1.0), 1.0);
            assert_eq!(r_pm(1.0, m, 1.0), 1.0);
        }
    }

    #[test]
    fn diminishing_standard_schedule() {
        let rule = StepsizeRule::diminishing(Schedule::standard(3.0).unwrap());
        let m = meta(1.0, 2, 1.0);
        assert_eq!(next_stepsize(&rule, 0, 0.0, &m).unwrap().value, 3.0);
        assert_eq!(next_stepsize(&rule, 10, 0.0, &m).unwrap().value, 1.5);
    }

    #[test]
    fn dynamic_rule_examples() {
        let r1 = StepsizeRule::dynamic_i(Gamma::default(), Some(0.0));
        let s = next_stepsize(&r1, 0, 0.8, &meta(1.0, 1, 1.0)).unwrap();
        assert!((s.value - 0.8).abs() < 1e-15);
        let r2 = StepsizeRule::dynamic_ii(Gamma::default(), Some(0.0));
        let s = next_stepsize(&r2, 0, 1.0, &meta(1.0, 2, 1.0)).unwrap();
        assert!((s.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dynamic_rule_clamps_below_target() {
        let r1 = StepsizeRule::dynamic_i(Gamma::default(), Some(1.0));
        let s = next_stepsize(&r1, 3, 0.5, &meta(1.0, 2, 1.0)).unwrap();
        assert_eq!(s, Stepsize { value: 0.0, target_reached: true });
    }

    #[test]
    fn dynamic_rule_without_optimum_is_a_configuration_error() {
        let r1 = StepsizeRule::dynamic_i(Gamma::default(), None);
        assert!(matches!(
            next_stepsize(&r1, 0, 1.0, &meta(1.0, 2, 1.0)),
            Err(Error::Configuration(_))
        ));
        assert!(r1.resolved(None).is_err());
        assert!(r1.resolved(Some(0.0)).is_ok());
    }

    #[test]
    fn gamma_bounds_are_enforced() {
        assert!(Gamma::constant(2.0).is_err());
        assert!(Gamma::constant(0.0).is_err());
        let g = Gamma::custom(|k| if k < 3 { 1.0 } else { 1.99 }, 0.5, 1.5).unwrap();
        assert!(g.at(0).is_ok());
        assert!(g.at(5).is_err());
    }

    #[test]
    fn tolerance_ratio_matches_bound_ratio() {
        for &p in &[0.5, 1.0, 2.0] {
            for &m in &[2usize, 5, 10, 100] {
                for &l in &[0.5, 1.0, 3.0] {
                    let mt = meta(p, m, l);
                    let direct = randomized_error_bound(&mt, 0.7) / incremental_error_bound(&mt, 0.7);
                    let closed = tolerance_ratio(p, m);
                    assert!((direct - closed).abs() <= 1e-12 * closed.max(1.0));
                    assert!(closed <= tolerance_ratio_bound(p, m) * (1.0 + 1e-12));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn stepsize_nonnegative_and_positive_above_target(
                p in 0.2f64..3.0, m in 1usize..50, l in 0.1f64..10.0,
                gap in -5.0f64..5.0, k in 0usize..10_000, g in 0.01f64..1.99,
            ) {
                let mt = meta(p, m, l);
                for rule in [
                    StepsizeRule::dynamic_i(Gamma::constant(g).unwrap(), Some(0.0)),
                    StepsizeRule::dynamic_ii(Gamma::constant(g).unwrap(), Some(0.0)),
                ] {
                    let s = next_stepsize(&rule, k, gap, &mt).unwrap();
                    prop_assert!(s.value >= 0.0);
                    if gap > 0.0 {
                        prop_assert!(s.value > 0.0);
                    }
                }
                let c = next_stepsize(&StepsizeRule::constant(g).unwrap(), k, gap, &mt).unwrap();
                prop_assert!(c.value > 0.0);
                let d = next_stepsize(&StepsizeRule::diminishing(Schedule::standard(g).unwrap()), k, gap, &mt).unwrap();
                prop_assert!(d.value > 0.0);
            }
        }
    }
}
