//! Single-interval fleet sizing.
//!
//! The fleet `f` minimizes `P·f + L·(π_d + r_c·π_c)` subject to two lower
//! bounds: every robot must finish its share of travel, stop service and
//! (optionally) recharging within the interval, and its share of the tour
//! must fit in the battery range. Both bounds scale as `1/f` and the
//! objective increases in `f`, so the optimum is the larger bound and the
//! multiplier `P` sits entirely on whichever constraint binds.

use serde::{Deserialize, Serialize};

use crate::ca_model::{integrated_tour_length_with, LengthConvention, Region, DEFAULT_C2};
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};

/// Residual tolerance for the KKT certificate.
pub const KKT_TOLERANCE: f64 = 1e-9;

/// Relative tolerance when deciding whether both bounds coincide.
const TIE_TOLERANCE: f64 = 1e-12;

/// Allowed mismatch between the stated range and battery / consumption.
const RANGE_CONSISTENCY: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub price_usd: f64,
    /// Straight-line amortization horizon; one planning interval per day.
    pub lifespan_days: f64,
    pub speed_mph: f64,
    pub range_mi: f64,
    pub battery_wh: Option<f64>,
    pub consumption_wh_per_mi: f64,
    pub charge_rate_w: f64,
    pub compartment: u32,
}

impl RobotSpec {
    /// Fixed cost `P` charged per planning interval.
    pub fn fixed_cost(&self) -> f64 {
        self.price_usd / self.lifespan_days
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("robot.price_usd", self.price_usd)?;
        ensure_positive("robot.lifespan_days", self.lifespan_days)?;
        ensure_positive("robot.speed_mph", self.speed_mph)?;
        ensure_positive("robot.range_mi", self.range_mi)?;
        ensure_positive("robot.consumption_wh_per_mi", self.consumption_wh_per_mi)?;
        ensure_positive("robot.charge_rate_w", self.charge_rate_w)?;
        if self.compartment < 1 {
            return Err(Error::invalid("robot.compartment", "must be >= 1"));
        }
        if let Some(battery) = self.battery_wh {
            ensure_positive("robot.battery_wh", battery)?;
            let implied = battery / self.consumption_wh_per_mi;
            if (implied - self.range_mi).abs() > RANGE_CONSISTENCY * self.range_mi {
                return Err(Error::invalid(
                    "robot.range_mi",
                    format!(
                        "{} mi disagrees with battery / consumption = {implied:.3} mi by more than 1%",
                        self.range_mi
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargingPolicy {
    /// Robots recharge inside the delivery interval.
    #[default]
    InInterval,
    /// Recharging happens after the interval closes.
    External,
}

/// One planning interval. Times are in hours, energy in watt-hours and
/// money in dollars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub region: Region,
    /// Orders `C` delivered in the interval (may be fractional).
    pub orders: f64,
    /// Order arrival rate `δ`; when present `orders = δ·t`.
    pub arrival_rate: Option<f64>,
    /// Daily order total that demand shares are taken from.
    pub daily_orders: Option<f64>,
    pub interval_hours: f64,
    pub pickup_hours: f64,
    pub dropoff_hours: f64,
    /// Route-length buffer `ϱ`.
    pub rho: f64,
    /// Charging-tail multiplier `φ`.
    pub phi: f64,
    pub maintenance_per_mi: f64,
    pub energy_price_per_wh: f64,
    pub charging: ChargingPolicy,
    pub convention: LengthConvention,
    pub c2: f64,
    pub robot: RobotSpec,
    /// Flat per-interval cost added after optimization (depot rent).
    pub depot_overhead: f64,
    /// Largest fleet the operator can field.
    pub fleet_cap: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("demand.orders", self.orders)?;
        ensure_positive("interval.hours", self.interval_hours)?;
        ensure_nonnegative("service.pickup", self.pickup_hours)?;
        ensure_nonnegative("service.dropoff", self.dropoff_hours)?;
        if !(self.rho.is_finite() && self.rho >= 1.0) {
            return Err(Error::invalid("buffers.rho", format!("must be >= 1, got {}", self.rho)));
        }
        if !(self.phi.is_finite() && self.phi >= 1.0) {
            return Err(Error::invalid("buffers.phi", format!("must be >= 1, got {}", self.phi)));
        }
        ensure_nonnegative("costs.maintenance_usd_per_mi", self.maintenance_per_mi)?;
        ensure_nonnegative("costs.energy_usd_per_kwh", self.energy_price_per_wh)?;
        ensure_nonnegative("costs.depot_overhead_usd", self.depot_overhead)?;
        if !self.c2.is_finite() {
            return Err(Error::invalid("ca.c2", "must be finite"));
        }
        if let Some(rate) = self.arrival_rate {
            ensure_nonnegative("demand.arrival_rate", rate)?;
            let implied = rate * self.interval_hours;
            if (implied - self.orders).abs() > 1e-12 * implied.abs().max(self.orders.abs()) {
                return Err(Error::invalid(
                    "demand.arrival_rate",
                    format!(
                        "arrival rate x interval = {implied} does not match orders = {}",
                        self.orders
                    ),
                ));
            }
        }
        if let Some(daily) = self.daily_orders {
            ensure_nonnegative("demand.daily_orders", daily)?;
        }
        if let Some(cap) = self.fleet_cap {
            ensure_nonnegative("fleet_cap", cap)?;
        }
        self.robot.validate()
    }

    /// CA route length `L` for the interval's orders.
    pub fn tour_length(&self) -> Result<f64> {
        integrated_tour_length_with(self.orders, &self.region, self.convention, self.c2)
    }

    /// Hours of robot time per mile of tour: buffered travel plus, when
    /// charging in the interval, buffered and tail-adjusted recharging.
    pub fn hours_per_tour_mile(&self) -> f64 {
        let travel = self.rho / self.robot.speed_mph;
        match self.charging {
            ChargingPolicy::InInterval => {
                travel + self.phi * self.rho * self.robot.consumption_wh_per_mi / self.robot.charge_rate_w
            }
            ChargingPolicy::External => travel,
        }
    }

    /// Stop service hours per order (one pickup and one drop-off).
    pub fn service_hours_per_order(&self) -> f64 {
        self.pickup_hours + self.dropoff_hours
    }

    /// Maintenance plus energy dollars per tour mile.
    pub fn operating_cost_per_mile(&self) -> f64 {
        self.maintenance_per_mi + self.robot.consumption_wh_per_mi * self.energy_price_per_wh
    }

    /// Left-hand side of the time budget for a fleet of `fleet` robots.
    pub fn hours_per_robot(&self, fleet: f64) -> Result<f64> {
        Ok(self.robot_hours_needed()? / fleet)
    }

    /// Total robot-hours needed to serve the interval.
    fn robot_hours_needed(&self) -> Result<f64> {
        let tour = self.tour_length()?;
        Ok(self.hours_per_tour_mile() * tour + self.orders * self.service_hours_per_order())
    }

    /// Both lower bounds on the fleet size.
    pub fn fleet_bounds(&self) -> Result<FleetBounds> {
        self.validate()?;
        let tour = self.tour_length()?;
        Ok(FleetBounds {
            time: self.robot_hours_needed()? / self.interval_hours,
            range: self.rho * tour / self.robot.range_mi,
        })
    }

    /// Objective value for an arbitrary fleet size, depot overhead included.
    pub fn total_cost_at(&self, fleet: f64) -> Result<f64> {
        let tour = self.tour_length()?;
        Ok(self.robot.fixed_cost() * fleet + tour * self.operating_cost_per_mile() + self.depot_overhead)
    }
}

/// Fleet sizes at which the time and range constraints hold with equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetBounds {
    pub time: f64,
    pub range: f64,
}

impl FleetBounds {
    pub fn optimum(&self) -> f64 {
        self.time.max(self.range)
    }

    pub fn binding(&self) -> Binding {
        let scale = self.time.abs().max(self.range.abs());
        if (self.time - self.range).abs() <= TIE_TOLERANCE * scale {
            Binding::Both
        } else if self.time > self.range {
            Binding::TimeBinding
        } else {
            Binding::RangeBinding
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    TimeBinding,
    RangeBinding,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Continuous optimal fleet `f*`.
    pub fleet_size: f64,
    pub fleet_size_ceil: u64,
    pub tour_length: f64,
    /// Tour miles per robot; absent for an empty interval.
    pub avg_route_length: Option<f64>,
    pub total_cost: f64,
    /// Dollars per order; absent for an empty interval.
    pub average_cost: Option<f64>,
    /// Multiplier on the time constraint.
    pub lambda_time: f64,
    /// Multiplier on the range constraint.
    pub lambda_range: f64,
    pub binding: Binding,
    pub feasible: bool,
}

/// Closed-form optimal fleet size.
pub fn optimal_fleet_size(s: &Scenario) -> Result<f64> {
    Ok(s.fleet_bounds()?.optimum())
}

pub fn plan(s: &Scenario) -> Result<PlanResult> {
    let bounds = s.fleet_bounds()?;
    let fleet = bounds.optimum();
    let tour = s.tour_length()?;
    let binding = bounds.binding();
    let price = s.robot.fixed_cost();
    let (lambda_time, lambda_range) = match binding {
        Binding::RangeBinding => (0.0, price),
        Binding::TimeBinding | Binding::Both => (price, 0.0),
    };

    let total_cost = s.total_cost_at(fleet)?;
    let (avg_route_length, average_cost) = if s.orders > 0.0 {
        (Some(tour / fleet), Some(total_cost / s.orders))
    } else {
        (None, None)
    };

    let within = |value: f64, limit: f64| value <= limit * (1.0 + KKT_TOLERANCE);
    let feasible = if fleet > 0.0 {
        within(s.rho * tour / fleet, s.robot.range_mi)
            && within(s.hours_per_robot(fleet)?, s.interval_hours)
            && s.fleet_cap.is_none_or(|cap| within(fleet, cap))
    } else {
        true
    };

    Ok(PlanResult {
        fleet_size: fleet,
        fleet_size_ceil: (fleet * (1.0 - TIE_TOLERANCE)).ceil() as u64,
        tour_length: tour,
        avg_route_length,
        total_cost,
        average_cost,
        lambda_time,
        lambda_range,
        binding,
        feasible,
    })
}

/// Per-order dollars attributable to each tour mile at the optimum: the
/// fleet share of the binding constraint plus operating cost.
pub(crate) fn distance_cost_bracket(s: &Scenario, binding: Binding) -> f64 {
    let price = s.robot.fixed_cost();
    let fleet_per_mile = match binding {
        Binding::RangeBinding => price * s.rho / s.robot.range_mi,
        Binding::TimeBinding | Binding::Both => price / s.interval_hours * s.hours_per_tour_mile(),
    };
    fleet_per_mile + s.operating_cost_per_mile()
}

/// Optimal cost per order in closed form.
pub fn average_cost(s: &Scenario) -> Result<f64> {
    if s.orders <= 0.0 {
        return Err(Error::UndefinedAverage { quantity: "average cost" });
    }
    let binding = s.fleet_bounds()?.binding();
    let per_order_distance = s.convention.factor(s.c2) * s.region.k() * (s.region.area() / s.orders).sqrt();
    let service = match binding {
        Binding::RangeBinding => 0.0,
        Binding::TimeBinding | Binding::Both => {
            s.robot.fixed_cost() / s.interval_hours * s.service_hours_per_order()
        }
    };
    Ok(per_order_distance * distance_cost_bracket(s, binding) + service + s.depot_overhead / s.orders)
}

/// Tour miles per robot in closed form.
pub fn avg_route_length(s: &Scenario) -> Result<f64> {
    if s.orders <= 0.0 {
        return Err(Error::UndefinedAverage { quantity: "average route length" });
    }
    s.validate()?;
    let factor = s.convention.factor(s.c2);
    let stops_per_mile = s.orders.sqrt() / (factor * s.region.k() * s.region.area().sqrt());
    let time_limited = s.interval_hours / (s.hours_per_tour_mile() + stops_per_mile * s.service_hours_per_order());
    Ok(time_limited.min(s.robot.range_mi / s.rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCondition {
    Stationarity,
    DualFeasibility,
    PrimalFeasibilityTime,
    PrimalFeasibilityRange,
    ComplementarySlacknessTime,
    ComplementarySlacknessRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktViolation {
    pub condition: KktCondition,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub passed: bool,
    /// `|λ_time + λ_range − P|`.
    pub stationarity: f64,
    /// `λ_time · (f − f_time)`.
    pub slackness_time: f64,
    /// `λ_range · (f − f_range)`.
    pub slackness_range: f64,
    pub violations: Vec<KktViolation>,
}

/// Checks a plan against the first-order conditions of the Lagrangian.
///
/// Residuals are scaled by `max(1, P)` and `max(1, f)` so the tolerance is
/// meaningful for both tiny and large scenarios.
pub fn kkt_verify(s: &Scenario, result: &PlanResult) -> Result<KktCertificate> {
    let bounds = s.fleet_bounds()?;
    let price = s.robot.fixed_cost();
    let fleet = result.fleet_size;
    let price_scale = price.max(1.0);
    let fleet_scale = fleet.abs().max(bounds.optimum()).max(1.0);
    let tol = KKT_TOLERANCE;

    let stationarity = (result.lambda_time + result.lambda_range - price).abs();
    let slackness_time = result.lambda_time * (fleet - bounds.time);
    let slackness_range = result.lambda_range * (fleet - bounds.range);

    let mut violations = Vec::new();
    let mut check = |condition, residual: f64, limit: f64| {
        if !(residual <= limit) {
            violations.push(KktViolation { condition, residual });
        }
    };
    check(KktCondition::Stationarity, stationarity, tol * price_scale);
    check(
        KktCondition::DualFeasibility,
        (-result.lambda_time).max(-result.lambda_range).max(0.0),
        0.0,
    );
    check(KktCondition::PrimalFeasibilityTime, (bounds.time - fleet).max(0.0), tol * fleet_scale);
    check(KktCondition::PrimalFeasibilityRange, (bounds.range - fleet).max(0.0), tol * fleet_scale);
    check(
        KktCondition::ComplementarySlacknessTime,
        slackness_time.abs(),
        tol * price_scale * fleet_scale,
    );
    check(
        KktCondition::ComplementarySlacknessRange,
        slackness_range.abs(),
        tol * price_scale * fleet_scale,
    );

    Ok(KktCertificate {
        passed: violations.is_empty(),
        stationarity,
        slackness_time,
        slackness_range,
        violations,
    })
}

impl Default for Scenario {
    /// A 5% lunch-peak share of 5,712 daily orders over 3.51 sq mi of
    /// Manhattan, served by a $5,000 robot amortized over two years.
    fn default() -> Self {
        let daily = 5712.0;
        Scenario {
            region: Region::manhattan(3.51).expect("valid default area"),
            orders: daily * 0.05,
            arrival_rate: None,
            daily_orders: Some(daily),
            interval_hours: 2.0,
            pickup_hours: 3.0 / 60.0,
            dropoff_hours: 2.0 / 60.0,
            rho: 1.25,
            phi: 1.2,
            maintenance_per_mi: 0.06,
            energy_price_per_wh: 0.17 / 1000.0,
            charging: ChargingPolicy::InInterval,
            convention: LengthConvention::Eq9,
            c2: DEFAULT_C2,
            robot: RobotSpec {
                price_usd: 5000.0,
                lifespan_days: 730.0,
                speed_mph: 4.0,
                range_mi: 6.97,
                battery_wh: Some(200.0),
                consumption_wh_per_mi: 28.7,
                charge_rate_w: 400.0,
                compartment: 1,
            },
            depot_overhead: 0.0,
            fleet_cap: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lunch(convention: LengthConvention) -> Scenario {
        Scenario {
            convention,
            ..Scenario::default()
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_depot_single_leg() {
        let s = lunch(LengthConvention::SingleLeg);
        let r = plan(&s).unwrap();
        assert!((r.fleet_size - 18.41).abs() <= 0.2, "{}", r.fleet_size);
        assert_eq!(r.fleet_size_ceil, 19);
        assert!(rel(r.total_cost, 128.08) <= 0.02);
        assert!((r.average_cost.unwrap() - 0.45).abs() <= 0.01);
        let l_avg = r.avg_route_length.unwrap();
        assert!((l_avg - 1.68).abs() <= 0.05);
        assert!((s.rho * l_avg - 2.1).abs() <= 0.05);
        assert!(r.feasible);
        assert_eq!(r.binding, Binding::TimeBinding);
    }

    #[test]
    fn neighborhood_depots_eq9() {
        for (area, orders, fleet, cost) in [(0.46, 74.0, 5.01, 34.93), (0.38, 99.0, 6.15, 42.77), (0.51, 112.0, 7.17, 49.86)] {
            let s = Scenario {
                region: Region::manhattan(area).unwrap(),
                orders,
                daily_orders: None,
                ..lunch(LengthConvention::Eq9)
            };
            assert!((optimal_fleet_size(&s).unwrap() - fleet).abs() <= 0.05);
            assert!(rel(plan(&s).unwrap().total_cost, cost) <= 0.02);
        }
    }

    #[test]
    fn empty_interval() {
        let s = Scenario {
            orders: 0.0,
            ..Scenario::default()
        };
        let r = plan(&s).unwrap();
        assert_eq!(r.fleet_size, 0.0);
        assert_eq!(r.fleet_size_ceil, 0);
        assert_eq!(r.average_cost, None);
        assert!(r.feasible);
        assert!(matches!(average_cost(&s), Err(Error::UndefinedAverage { .. })));
        assert!(matches!(avg_route_length(&s), Err(Error::UndefinedAverage { .. })));
    }

    #[test]
    fn closed_forms_agree_with_plan() {
        for convention in [LengthConvention::Eq9, LengthConvention::SingleLeg] {
            for charging in [ChargingPolicy::InInterval, ChargingPolicy::External] {
                let s = Scenario {
                    charging,
                    depot_overhead: 17.5,
                    ..lunch(convention)
                };
                let r = plan(&s).unwrap();
                assert!(rel(average_cost(&s).unwrap(), r.average_cost.unwrap()) < 1e-12);
                assert!(rel(avg_route_length(&s).unwrap(), r.avg_route_length.unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_cost_matches_two_year_amortization() {
        assert!((Scenario::default().robot.fixed_cost() - 6.85).abs() < 0.005);
    }

    #[test]
    fn time_bound_meets_budget_with_equality() {
        let s = Scenario::default();
        let f = s.fleet_bounds().unwrap().time;
        assert!(rel(s.hours_per_robot(f).unwrap(), s.interval_hours) < 1e-12);
    }

    #[test]
    fn kkt_time_binding() {
        let s = lunch(LengthConvention::SingleLeg);
        let r = plan(&s).unwrap();
        let cert = kkt_verify(&s, &r).unwrap();
        assert!(cert.passed, "{cert:?}");
        assert_eq!(r.lambda_time, s.robot.fixed_cost());
        assert_eq!(r.lambda_range, 0.0);
    }

    #[test]
    fn kkt_range_binding() {
        let mut s = Scenario::default();
        s.robot.range_mi = 0.01;
        s.robot.battery_wh = None;
        let r = plan(&s).unwrap();
        assert_eq!(r.binding, Binding::RangeBinding);
        assert_eq!(r.lambda_time, 0.0);
        assert_eq!(r.lambda_range, s.robot.fixed_cost());
        assert!(r.feasible);
        assert!(kkt_verify(&s, &r).unwrap().passed);
        assert!(rel(average_cost(&s).unwrap(), r.average_cost.unwrap()) < 1e-12);
        assert!(rel(avg_route_length(&s).unwrap(), 0.01 / s.rho) < 1e-12);
    }

    #[test]
    fn kkt_rejects_tampered_fleet() {
        let s = Scenario::default();
        let mut r = plan(&s).unwrap();
        r.fleet_size /= 2.0;
        let cert = kkt_verify(&s, &r).unwrap();
        assert!(!cert.passed);
        assert!(cert
            .violations
            .iter()
            .any(|v| v.condition == KktCondition::PrimalFeasibilityTime));
    }

    #[test]
    fn kkt_rejects_bad_multipliers() {
        let s = Scenario::default();
        let mut r = plan(&s).unwrap();
        r.lambda_range = -1.0;
        r.lambda_time += 1.0;
        let cert = kkt_verify(&s, &r).unwrap();
        assert!(cert.violations.iter().any(|v| v.condition == KktCondition::DualFeasibility));
    }

    #[test]
    fn fleet_cap_marks_infeasible() {
        let s = Scenario {
            fleet_cap: Some(10.0),
            ..Scenario::default()
        };
        assert!(!plan(&s).unwrap().feasible);
    }

    #[test]
    fn validation_errors() {
        let mut s = Scenario::default();
        s.pickup_hours = -1.0;
        assert!(s.validate().is_err());

        let mut s = Scenario::default();
        s.rho = 0.9;
        assert!(plan(&s).is_err());

        let mut s = Scenario::default();
        s.robot.speed_mph = -4.0;
        assert!(plan(&s).is_err());

        let mut s = Scenario::default();
        s.robot.range_mi = 9.0;
        match s.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "robot.range_mi"),
            other => panic!("{other:?}"),
        }

        let mut s = Scenario::default();
        s.arrival_rate = Some(100.0);
        assert!(s.validate().is_err());
        s.arrival_rate = Some(s.orders / s.interval_hours);
        assert!(s.validate().is_ok());
    }

    proptest! {
        #[test]
        fn total_cost_identity(orders in 0.0f64..5000.0, area in 0.05f64..20.0, overhead in 0.0f64..500.0) {
            let s = Scenario {
                orders,
                region: Region::manhattan(area).unwrap(),
                depot_overhead: overhead,
                ..Scenario::default()
            };
            let r = plan(&s).unwrap();
            let direct = s.robot.fixed_cost() * r.fleet_size
                + r.tour_length * s.maintenance_per_mi
                + r.tour_length * s.robot.consumption_wh_per_mi * s.energy_price_per_wh
                + overhead;
            prop_assert!((r.total_cost - direct).abs() <= 1e-9 * direct.max(1.0));
            if orders > 0.0 {
                prop_assert!((r.average_cost.unwrap() - r.total_cost / orders).abs() <= 1e-12 * r.total_cost);
                prop_assert!((r.avg_route_length.unwrap() - r.tour_length / r.fleet_size).abs() <= 1e-12 * r.tour_length);
            }
            let cert = kkt_verify(&s, &r).unwrap();
            prop_assert!(cert.passed);
        }

        #[test]
        fn economies_of_scale(orders in 1.0f64..5000.0, ratio in 1.01f64..10.0, single in any::<bool>(), external in any::<bool>()) {
            let s = Scenario {
                orders,
                daily_orders: None,
                convention: if single { LengthConvention::SingleLeg } else { LengthConvention::Eq9 },
                charging: if external { ChargingPolicy::External } else { ChargingPolicy::InInterval },
                ..Scenario::default()
            };
            let bigger = Scenario { orders: orders * ratio, ..s.clone() };
            prop_assert!(average_cost(&bigger).unwrap() < average_cost(&s).unwrap());
            prop_assert!(avg_route_length(&bigger).unwrap() < avg_route_length(&s).unwrap());
        }

        #[test]
        fn external_charging_never_costs_more(orders in 1.0f64..5000.0, rate in 10.0f64..1e6) {
            let mut s = Scenario { orders, daily_orders: None, ..Scenario::default() };
            s.robot.charge_rate_w = rate;
            let inside = average_cost(&s).unwrap();
            s.charging = ChargingPolicy::External;
            prop_assert!(average_cost(&s).unwrap() < inside);
        }

        #[test]
        fn cost_affine_in_service_time(extra in 0.0f64..0.2) {
            let s = Scenario::default();
            let shifted = Scenario { pickup_hours: s.pickup_hours + extra, ..s.clone() };
            let slope = s.robot.fixed_cost() / s.interval_hours;
            let diff = average_cost(&shifted).unwrap() - average_cost(&s).unwrap();
            prop_assert!((diff - slope * extra).abs() < 1e-12);
        }
    }
}
