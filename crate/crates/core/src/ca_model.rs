//! Continuous-approximation tour lengths for routes that mix first-mile
//! pickups with last-mile drop-offs.
//!
//! A single leg over `n` uniformly scattered stops in a region of area `A`
//! has expected length `k·√(n·A)`. Integrating the pickup leg and the
//! drop-off leg into one route scales their sum by the short-circuiting
//! factor `k⁺ ≤ 1`, which for demand made only of short-circuiting orders
//! collapses to the constant `1/√2 + c2`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};

/// Routing constant under the Euclidean metric.
pub const EUCLIDEAN_K: f64 = 0.763;
/// Routing constant under the Manhattan metric.
pub const MANHATTAN_K: f64 = 0.97;
/// Regression constant weighting the short-circuiting share.
pub const DEFAULT_C2: f64 = 0.1042;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Custom,
}

impl Metric {
    pub fn default_k(self) -> Option<f64> {
        match self {
            Metric::Euclidean => Some(EUCLIDEAN_K),
            Metric::Manhattan => Some(MANHATTAN_K),
            Metric::Custom => None,
        }
    }
}

/// Service area with its routing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    area: f64,
    metric: Metric,
    k: f64,
}

impl Region {
    /// Builds a region, taking `k` from the metric unless one is supplied.
    /// A custom metric must carry an explicit `k` in `(0, 2)`.
    pub fn new(area: f64, metric: Metric, k: Option<f64>) -> Result<Self> {
        ensure_positive("region.area", area)?;
        let k = match (k, metric.default_k()) {
            (Some(k), _) => k,
            (None, Some(default)) => default,
            (None, None) => {
                return Err(Error::invalid(
                    "region.k",
                    "a custom metric requires an explicit routing constant",
                ))
            }
        };
        if !(k.is_finite() && k > 0.0 && k < 2.0) {
            return Err(Error::invalid("region.k", format!("must lie in (0, 2), got {k}")));
        }
        Ok(Region { area, metric, k })
    }

    pub fn euclidean(area: f64) -> Result<Self> {
        Region::new(area, Metric::Euclidean, None)
    }

    pub fn manhattan(area: f64) -> Result<Self> {
        Region::new(area, Metric::Manhattan, None)
    }

    /// Area in square miles.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Same metric and constant over a different area.
    pub fn with_area(&self, area: f64) -> Result<Self> {
        Region::new(area, self.metric, Some(self.k))
    }
}

/// Composition of the stops served by one integrated route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopMix {
    /// Pickup-only stops (orders delivered to the depot).
    pub n_pickup: f64,
    /// Drop-off-only stops (orders loaded at the depot).
    pub n_dropoff: f64,
    /// Orders picked up and dropped off along the route.
    pub n_short_circuit: f64,
    /// Orders per pickup stop.
    pub sigma_pickup: f64,
    /// Orders per drop-off stop.
    pub sigma_dropoff: f64,
    /// Robot compartment capacity.
    pub capacity: u32,
    /// Capacity-ratio regression constant. There is no published default.
    pub c1: Option<f64>,
    pub c2: f64,
}

impl StopMix {
    /// A mix of short-circuiting orders only, one order per stop.
    pub fn short_circuit_only(orders: f64, capacity: u32) -> Self {
        StopMix {
            n_pickup: 0.0,
            n_dropoff: 0.0,
            n_short_circuit: orders,
            sigma_pickup: 1.0,
            sigma_dropoff: 1.0,
            capacity,
            c1: None,
            c2: DEFAULT_C2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("mix.n_p", self.n_pickup)?;
        ensure_nonnegative("mix.n_d", self.n_dropoff)?;
        ensure_nonnegative("mix.n_sc", self.n_short_circuit)?;
        if self.n_pickup + self.n_dropoff + self.n_short_circuit < 1.0 {
            return Err(Error::invalid("mix", "needs at least one stop or order"));
        }
        for (field, sigma) in [("mix.sigma_p", self.sigma_pickup), ("mix.sigma_d", self.sigma_dropoff)] {
            if !(sigma.is_finite() && sigma >= 1.0) {
                return Err(Error::invalid(field, format!("must be >= 1, got {sigma}")));
            }
        }
        if self.capacity < 1 {
            return Err(Error::invalid("mix.capacity", "must be >= 1"));
        }
        if !self.c2.is_finite() {
            return Err(Error::invalid("mix.c2", "must be finite"));
        }
        Ok(())
    }

    /// Share of depot-anchored stops that are pickups.
    pub fn alpha(&self) -> f64 {
        self.n_pickup / (self.n_pickup + self.n_dropoff)
    }

    /// Short-circuiting orders relative to depot-anchored stops.
    pub fn beta(&self) -> f64 {
        self.n_short_circuit / (self.n_pickup + self.n_dropoff)
    }

    /// Capacity relative to the heavier of the two load directions.
    pub fn capacity_ratio(&self) -> f64 {
        let load = (self.n_dropoff + self.n_short_circuit).max(self.n_pickup + self.n_short_circuit);
        f64::from(self.capacity) / load
    }

    /// Total pickup stops on the route.
    pub fn pickup_stops(&self) -> f64 {
        self.n_pickup + self.n_short_circuit / self.sigma_pickup
    }

    /// Total drop-off stops on the route.
    pub fn dropoff_stops(&self) -> f64 {
        self.n_dropoff + self.n_short_circuit / self.sigma_dropoff
    }
}

/// Which closed form turns order counts into a route length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConvention {
    /// Integrated pickup and drop-off legs: `2·k⁺·k·√(A·C)`.
    #[default]
    Eq9,
    /// One leg only: `k·√(A·C)`.
    SingleLeg,
}

impl LengthConvention {
    /// Multiplier on `k·√(A·C)` for the given `c2`.
    pub fn factor(self, c2: f64) -> f64 {
        match self {
            LengthConvention::Eq9 => 2.0 * short_circuit_factor_limit_with(c2),
            LengthConvention::SingleLeg => 1.0,
        }
    }
}

/// Expected length of a single leg over `n_stops` stops.
pub fn leg_length(n_stops: f64, region: &Region) -> Result<f64> {
    ensure_nonnegative("n_stops", n_stops)?;
    Ok(region.k * (n_stops * region.area).sqrt())
}

/// General short-circuiting factor `k⁺` for a mix with depot-anchored stops.
pub fn short_circuit_factor(mix: &StopMix) -> Result<f64> {
    mix.validate()?;
    if mix.n_pickup + mix.n_dropoff <= 0.0 {
        return Err(Error::LimitRequired);
    }
    let c1 = mix.c1.ok_or_else(|| {
        Error::invalid("mix.c1", "required whenever the mix has pickup-only or drop-off-only stops")
    })?;
    let alpha = mix.alpha();
    let beta = mix.beta();
    let q = mix.capacity_ratio();
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::invalid("mix.q", format!("capacity ratio must be > 0, got {q}")));
    }

    let routing = (1.0 + 2.0 * beta).sqrt() / ((1.0 - alpha + beta).sqrt() + (alpha + beta).sqrt());
    let capacity = c1 * ((1.0 - alpha).sqrt() + alpha.sqrt() - 1.0) * (1.0 / q - 0.5);
    let short_circuit = mix.c2 * beta / (1.0 + beta * beta).sqrt();
    Ok(routing + capacity + short_circuit)
}

/// `k⁺` for any mix, delegating to the closed-form limit when every order
/// short-circuits.
pub fn short_circuit_factor_or_limit(mix: &StopMix) -> Result<f64> {
    match short_circuit_factor(mix) {
        Err(Error::LimitRequired) => Ok(short_circuit_factor_limit_with(mix.c2)),
        other => other,
    }
}

/// Limit of `k⁺` when all demand short-circuits, with the default `c2`.
pub fn short_circuit_factor_limit() -> f64 {
    short_circuit_factor_limit_with(DEFAULT_C2)
}

pub fn short_circuit_factor_limit_with(c2: f64) -> f64 {
    FRAC_1_SQRT_2 + c2
}

/// Integrated route length for a general stop mix: `k⁺·(l_D + l_P)`.
pub fn mixed_tour_length(mix: &StopMix, region: &Region) -> Result<f64> {
    let factor = short_circuit_factor_or_limit(mix)?;
    Ok(factor * (leg_length(mix.dropoff_stops(), region)? + leg_length(mix.pickup_stops(), region)?))
}

/// Route length needed to serve `orders` short-circuiting orders.
pub fn integrated_tour_length(orders: f64, region: &Region, convention: LengthConvention) -> Result<f64> {
    integrated_tour_length_with(orders, region, convention, DEFAULT_C2)
}

pub fn integrated_tour_length_with(
    orders: f64,
    region: &Region,
    convention: LengthConvention,
    c2: f64,
) -> Result<f64> {
    ensure_nonnegative("orders", orders)?;
    Ok(convention.factor(c2) * leg_length(orders, region)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn region_defaults_and_validation() {
        assert_eq!(Region::euclidean(1.0).unwrap().k(), 0.763);
        assert_eq!(Region::manhattan(1.0).unwrap().k(), 0.97);
        assert!(Region::new(1.0, Metric::Custom, None).is_err());
        assert!(Region::new(1.0, Metric::Custom, Some(2.5)).is_err());
        assert_eq!(Region::new(1.0, Metric::Custom, Some(0.9)).unwrap().k(), 0.9);
        assert!(Region::manhattan(0.0).is_err());
        assert!(Region::manhattan(-3.0).is_err());
    }

    #[test]
    fn leg_length_examples() {
        let r = Region::manhattan(3.51).unwrap();
        assert_eq!(leg_length(0.0, &r).unwrap(), 0.0);
        assert!(close(leg_length(285.6, &r).unwrap(), 30.71, 0.01));
        let e = Region::euclidean(1.0).unwrap();
        assert!(close(leg_length(100.0, &e).unwrap(), 7.63, 1e-12));
        assert!(leg_length(-1.0, &e).is_err());
    }

    #[test]
    fn factor_balanced_without_short_circuit() {
        let mix = StopMix {
            n_pickup: 10.0,
            n_dropoff: 10.0,
            n_short_circuit: 0.0,
            c1: Some(0.0),
            ..StopMix::short_circuit_only(0.0, 4)
        };
        assert!(close(short_circuit_factor(&mix).unwrap(), FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn factor_converges_for_large_beta() {
        let mix = StopMix {
            n_pickup: 1.0,
            n_dropoff: 1.0,
            n_short_circuit: 1e6,
            c1: Some(0.0),
            ..StopMix::short_circuit_only(0.0, 4)
        };
        assert!(close(short_circuit_factor(&mix).unwrap(), 0.81131, 1e-3));
    }

    #[test]
    fn factor_without_anchored_stops_needs_limit() {
        let mix = StopMix::short_circuit_only(285.6, 4);
        assert!(matches!(short_circuit_factor(&mix), Err(Error::LimitRequired)));
        let k = short_circuit_factor_or_limit(&mix).unwrap();
        assert_eq!(k, FRAC_1_SQRT_2 + DEFAULT_C2);
        assert!(close(k, 0.81131, 1e-5));
    }

    #[test]
    fn factor_requires_c1() {
        let mix = StopMix {
            n_pickup: 3.0,
            n_dropoff: 2.0,
            ..StopMix::short_circuit_only(5.0, 4)
        };
        match short_circuit_factor(&mix) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mix.c1"),
            other => panic!("expected c1 validation error, got {other:?}"),
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn limit_values() {
        assert!(close(short_circuit_factor_limit(), 0.81131, 1e-5));
        assert!(close(2.0 * short_circuit_factor_limit(), 1.62262, 1e-5));
        assert!(close(short_circuit_factor_limit_with(0.0), 0.70711, 1e-5));
    }

    #[test]
    fn integrated_length_examples() {
        let r = Region::manhattan(3.51).unwrap();
        assert!(close(integrated_tour_length(285.6, &r, LengthConvention::Eq9).unwrap(), 49.83, 0.05));
        assert!(close(integrated_tour_length(285.6, &r, LengthConvention::SingleLeg).unwrap(), 30.71, 0.05));
        assert_eq!(integrated_tour_length(0.0, &r, LengthConvention::Eq9).unwrap(), 0.0);
        assert!(integrated_tour_length(-1.0, &r, LengthConvention::Eq9).is_err());
    }

    #[test]
    fn mixed_length_matches_closed_form_for_short_circuit_demand() {
        let r = Region::euclidean(2.0).unwrap();
        let mix = StopMix::short_circuit_only(50.0, 4);
        let a = mixed_tour_length(&mix, &r).unwrap();
        let b = integrated_tour_length(50.0, &r, LengthConvention::Eq9).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
    }

    proptest! {
        #[test]
        fn length_scales_with_sqrt_of_orders(c1 in 0.1f64..1e4, ratio in 1.01f64..100.0, area in 0.01f64..50.0) {
            let r = Region::manhattan(area).unwrap();
            for conv in [LengthConvention::Eq9, LengthConvention::SingleLeg] {
                let l1 = integrated_tour_length(c1, &r, conv).unwrap();
                let l2 = integrated_tour_length(c1 * ratio, &r, conv).unwrap();
                prop_assert!(l2 > l1);
                prop_assert!(((l2 / l1) - ratio.sqrt()).abs() < 1e-12 * ratio.sqrt());
            }
        }

        #[test]
        fn eq9_is_twice_the_limit_times_single_leg(c in 0.0f64..1e4, area in 0.01f64..50.0) {
            let r = Region::euclidean(area).unwrap();
            let eq9 = integrated_tour_length(c, &r, LengthConvention::Eq9).unwrap();
            let single = integrated_tour_length(c, &r, LengthConvention::SingleLeg).unwrap();
            prop_assert!((eq9 - 2.0 * short_circuit_factor_limit() * single).abs() <= 1e-12 * eq9.max(1.0));
            if single > 0.0 {
                prop_assert!((eq9 / single - 1.62262).abs() < 1e-5);
            }
        }

        #[test]
        fn leg_scales_linearly_in_k_and_sqrt_area(n in 0.0f64..1e4, area in 0.01f64..50.0, k in 0.1f64..1.9) {
            let base = leg_length(n, &Region::new(area, Metric::Custom, Some(k)).unwrap()).unwrap();
            let k_half = leg_length(n, &Region::new(area, Metric::Custom, Some(k / 2.0)).unwrap()).unwrap();
            let area4 = leg_length(n, &Region::new(4.0 * area, Metric::Custom, Some(k)).unwrap()).unwrap();
            prop_assert!((2.0 * k_half - base).abs() <= 1e-12 * base.max(1.0));
            prop_assert!((area4 - 2.0 * base).abs() <= 1e-12 * area4.max(1.0));
        }

        #[test]
        fn factor_reaches_limit_at_large_beta(np in 1.0f64..50.0, nd in 1.0f64..50.0) {
            let mix = StopMix {
                n_pickup: np,
                n_dropoff: nd,
                n_short_circuit: 1e4 * (np + nd),
                c1: Some(0.0),
                ..StopMix::short_circuit_only(0.0, 4)
            };
            let k = short_circuit_factor(&mix).unwrap();
            prop_assert!((k - short_circuit_factor_limit()).abs() < 1e-3);
        }
    }
}
