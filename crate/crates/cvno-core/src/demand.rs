//! Expected user demand and the per-slot revenue maximization.
//!
//! Demand is expressed in expected packets per slot as a function of the
//! market state `M` and the announced per-packet price `q`. It is
//! non-increasing in `q` and vanishes at the price cap `q_max`. The pricing
//! problem maximizes `(q − Q/V) · D(M, q)` over `q ∈ [0, q_max]`; the shift
//! `Q/V` is the backlog pressure, so congestion raises the optimal price.
//! Users are admitted only when the maximum is strictly positive.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Parametric families of the expected-demand curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DemandFamily {
    /// `D(M, q) = (q − q_max)² / M` below the cap, 0 at and above it.
    QuadraticS7,
    /// `D(M, q) = slope · (q_max − q)⁺ / M`.
    Linear { slope: f64 },
    /// Piecewise-linear base curve `T(q)` from sample points, `D = T(q)/M`.
    /// Points must be sorted by price with non-increasing values.
    Table { points: Vec<(f64, f64)> },
}

/// Distribution of one application's file length in packets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FileLengthDist {
    Fixed { packets: u64 },
    DiscreteUniform { lo: u64, hi: u64 },
}

impl FileLengthDist {
    pub fn mean(&self) -> f64 {
        match self {
            FileLengthDist::Fixed { packets } => *packets as f64,
            FileLengthDist::DiscreteUniform { lo, hi } => (*lo as f64 + *hi as f64) / 2.0,
        }
    }
}

/// One application class in the traffic mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppProfile {
    /// Probability that an incoming user runs this application.
    pub prob: f64,
    pub length: FileLengthDist,
}

/// The demand model: curve family, application mix, price cap, and the hard
/// per-slot arrival bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    #[serde(flatten)]
    pub family: DemandFamily,
    pub apps: Vec<AppProfile>,
    /// Price at and above which demand is zero.
    pub q_max: f64,
    /// Hard cap on packets admitted in one slot.
    pub a_max: f64,
}

impl DemandModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_max > 0.0) {
            return Err(SimError::Config("q_max must be positive".into()));
        }
        if !(self.a_max > 0.0) {
            return Err(SimError::Config("a_max must be positive".into()));
        }
        if self.apps.is_empty() {
            return Err(SimError::Config("at least one application required".into()));
        }
        let total: f64 = self.apps.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::Config(format!(
                "application probabilities sum to {total}, expected 1"
            )));
        }
        for a in &self.apps {
            if !(a.prob >= 0.0) {
                return Err(SimError::Config("negative application probability".into()));
            }
            if let FileLengthDist::DiscreteUniform { lo, hi } = a.length {
                if lo == 0 || hi < lo {
                    return Err(SimError::Config(format!(
                        "bad file length range [{lo}, {hi}]"
                    )));
                }
            }
            if let FileLengthDist::Fixed { packets } = a.length {
                if packets == 0 {
                    return Err(SimError::Config("file length must be positive".into()));
                }
            }
        }
        match &self.family {
            DemandFamily::QuadraticS7 => {}
            DemandFamily::Linear { slope } => {
                if !(*slope > 0.0) {
                    return Err(SimError::Config("linear demand slope must be positive".into()));
                }
            }
            DemandFamily::Table { points } => {
                if points.len() < 2 {
                    return Err(SimError::Config("table demand needs >= 2 points".into()));
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(SimError::Config(
                            "table demand prices must be strictly increasing".into(),
                        ));
                    }
                    if w[1].1 > w[0].1 {
                        return Err(SimError::Config(
                            "table demand must be non-increasing in price".into(),
                        ));
                    }
                }
                if points.iter().any(|p| p.1 < 0.0) {
                    return Err(SimError::Config("table demand values must be >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Mean file length over the application mix, packets.
    pub fn mean_file_length(&self) -> f64 {
        self.apps.iter().map(|a| a.prob * a.length.mean()).sum()
    }

    /// Expected packets demanded per slot at market state `market` and price
    /// `price`. Deterministic, non-increasing in price, zero from `q_max` on.
    pub fn expected_demand(&self, market: f64, price: f64) -> f64 {
        if price >= self.q_max {
            return 0.0;
        }
        let base = match &self.family {
            DemandFamily::QuadraticS7 => {
                let d = price - self.q_max;
                d * d
            }
            DemandFamily::Linear { slope } => slope * (self.q_max - price),
            DemandFamily::Table { points } => interpolate(points, price),
        };
        (base / market).max(0.0)
    }

    /// Expected incoming users per slot (the demand divided by the mean file
    /// length), used as the arrival process rate.
    pub fn expected_user_rate(&self, market: f64, price: f64) -> f64 {
        self.expected_demand(market, price) / self.mean_file_length()
    }

    /// Whether the shifted revenue objective is unimodal on `[0, q_max]`,
    /// enabling golden-section refinement instead of a dense grid.
    fn unimodal_objective(&self) -> bool {
        matches!(
            self.family,
            DemandFamily::QuadraticS7 | DemandFamily::Linear { .. }
        )
    }
}

fn interpolate(points: &[(f64, f64)], q: f64) -> f64 {
    if q <= points[0].0 {
        return points[0].1;
    }
    for w in points.windows(2) {
        if q <= w[1].0 {
            let t = (q - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    points.last().map(|p| p.1).unwrap_or(0.0)
}

/// Outcome of the per-slot pricing problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingDecision {
    /// Optimal price; meaningful only when `admit` is set.
    pub price: f64,
    /// Whether incoming requests are accepted this slot.
    pub admit: bool,
    /// Maximum of `(q − Q/V) · D(M, q)`; admission requires it positive.
    pub objective: f64,
}

const GRID_POINTS: usize = 10_000;
const GOLDEN_TOL: f64 = 1e-11;

/// Maximizes the backlog-shifted revenue `(q − Q/V) · D(M, q)` over
/// `q ∈ [0, q_max]`.
///
/// Unimodal families are refined by golden-section search; other families use
/// a dense grid with the smallest maximizer winning ties.
pub fn optimal_price(demand: &DemandModel, market: f64, queue: f64, v: f64) -> PricingDecision {
    let shift = queue / v;
    let f = |q: f64| (q - shift) * demand.expected_demand(market, q);
    let (price, objective) = if demand.unimodal_objective() {
        golden_section_max(f, 0.0, demand.q_max)
    } else {
        grid_max(f, 0.0, demand.q_max, GRID_POINTS)
    };
    PricingDecision {
        price,
        admit: objective > 0.0,
        objective,
    }
}

/// Smallest maximizer over an inclusive uniform grid.
pub(crate) fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let mut best_q = lo;
    let mut best = f(lo);
    for k in 1..points {
        let q = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let val = f(q);
        if val > best {
            best = val;
            best_q = q;
        }
    }
    (best_q, best)
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    // Endpoints can win when the peak sits on the boundary.
    let mut best = (mid, fm);
    for (q, val) in [(lo, f(lo)), (hi, f(hi))] {
        if val > best.1 {
            best = (q, val);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s7_model() -> DemandModel {
        DemandModel {
            family: DemandFamily::QuadraticS7,
            apps: vec![AppProfile {
                prob: 1.0,
                length: FileLengthDist::DiscreteUniform { lo: 1, hi: 10 },
            }],
            q_max: 5.0,
            a_max: 200.0,
        }
    }

    #[test]
    fn quadratic_demand_evaluates_exactly() {
        let m = s7_model();
        assert_relative_eq!(m.expected_demand(2.0, 3.0), 2.0, max_relative = 1e-12);
        assert_eq!(m.expected_demand(1.0, 5.0), 0.0);
        assert_relative_eq!(m.expected_demand(1.0, 0.0), 25.0, max_relative = 1e-12);
    }

    #[test]
    fn demand_is_zero_beyond_the_cap() {
        let m = s7_model();
        assert_eq!(m.expected_demand(1.0, 5.0), 0.0);
        assert_eq!(m.expected_demand(1.0, 7.5), 0.0);
    }

    #[test]
    fn zero_backlog_price_hits_the_stationary_point() {
        // Stationary point of q (q-5)^2 on [0,5]: q = 5/3, value 500/27.
        let d = optimal_price(&s7_model(), 1.0, 0.0, 100.0);
        assert!(d.admit);
        assert_relative_eq!(d.price, 5.0 / 3.0, epsilon = 1e-8);
        assert_relative_eq!(d.objective, 500.0 / 27.0, max_relative = 1e-10);
    }

    #[test]
    fn unit_shift_price_hits_the_stationary_point() {
        // Stationary point of (q-1)(q-5)^2: q = 7/3, value 256/27.
        let d = optimal_price(&s7_model(), 1.0, 100.0, 100.0);
        assert!(d.admit);
        assert_relative_eq!(d.price, 7.0 / 3.0, epsilon = 1e-8);
        assert_relative_eq!(d.objective, 256.0 / 27.0, max_relative = 1e-10);
    }

    #[test]
    fn backlog_beyond_price_cap_rejects_demand() {
        let d = optimal_price(&s7_model(), 1.0, 5.0 * 100.0, 100.0);
        assert!(!d.admit);
        assert!(d.objective <= 0.0);
        let d = optimal_price(&s7_model(), 2.0, 9.0 * 100.0, 100.0);
        assert!(!d.admit);
    }

    #[test]
    fn identically_zero_demand_rejects() {
        let m = DemandModel {
            family: DemandFamily::Table {
                points: vec![(0.0, 0.0), (5.0, 0.0)],
            },
            ..s7_model()
        };
        let d = optimal_price(&m, 1.0, 0.0, 10.0);
        assert!(!d.admit);
        assert_eq!(d.objective, 0.0);
    }

    #[test]
    fn table_family_interpolates() {
        let m = DemandModel {
            family: DemandFamily::Table {
                points: vec![(0.0, 10.0), (2.0, 4.0), (5.0, 0.0)],
            },
            ..s7_model()
        };
        assert_relative_eq!(m.expected_demand(1.0, 1.0), 7.0, max_relative = 1e-12);
        assert_relative_eq!(m.expected_demand(2.0, 2.0), 2.0, max_relative = 1e-12);
        assert_relative_eq!(m.expected_demand(1.0, 3.5), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn admission_tracks_objective_sign() {
        let m = s7_model();
        for queue in [0.0, 50.0, 200.0, 499.0, 500.0, 700.0] {
            let d = optimal_price(&m, 1.0, queue, 100.0);
            assert_eq!(d.admit, d.objective > 0.0);
        }
    }

    #[test]
    fn validation_rejects_bad_mixes() {
        let mut m = s7_model();
        m.apps[0].prob = 0.7;
        assert!(m.validate().is_err());
        let mut m = s7_model();
        m.apps[0].length = FileLengthDist::DiscreteUniform { lo: 4, hi: 2 };
        assert!(m.validate().is_err());
        let m = DemandModel {
            family: DemandFamily::Table {
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            },
            ..s7_model()
        };
        assert!(m.validate().is_err());
    }

    proptest! {
        #[test]
        fn price_monotone_in_backlog(q1 in 0.0f64..700.0, q2 in 0.0f64..700.0) {
            let m = s7_model();
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            let a = optimal_price(&m, 1.0, lo, 100.0);
            let b = optimal_price(&m, 1.0, hi, 100.0);
            if a.admit && b.admit {
                prop_assert!(b.price >= a.price - 1e-7);
            }
        }

        #[test]
        fn scaling_backlog_and_tradeoff_together_changes_nothing(
            queue in 0.0f64..400.0,
            v in 1.0f64..300.0,
            pow in 0u32..8,
        ) {
            let m = s7_model();
            let c = f64::from(1u32 << pow);
            let a = optimal_price(&m, 2.0, queue, v);
            let b = optimal_price(&m, 2.0, queue * c, v * c);
            // Power-of-two scaling keeps the shift bit-identical.
            prop_assert_eq!(a.price.to_bits(), b.price.to_bits());
            prop_assert_eq!(a.admit, b.admit);
        }

        #[test]
        fn demand_non_increasing_in_price(qa in 0.0f64..5.0, qb in 0.0f64..5.0) {
            let m = s7_model();
            let (lo, hi) = if qa <= qb { (qa, qb) } else { (qb, qa) };
            prop_assert!(m.expected_demand(1.0, hi) <= m.expected_demand(1.0, lo) + 1e-12);
        }
    }
}
