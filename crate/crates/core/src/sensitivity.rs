//! Trade-off derivatives, sidewalk level-of-service adjustment and
//! parameter sweeps over the fleet plan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fleet_plan::{average_cost, distance_cost_bracket, plan, Binding, ChargingPolicy, PlanResult, Scenario};

/// Relative residual allowed between analytic and numeric derivatives.
pub const FD_TOLERANCE: f64 = 1e-6;
/// Default finite-difference step relative to the parameter value.
pub const FD_RELATIVE_STEP: f64 = 1e-3;

/// Slope of the optimal average cost with respect to the order count.
pub fn d_average_cost_d_orders(s: &Scenario) -> Result<f64> {
    if !(s.orders > 0.0) {
        return Err(Error::invalid("demand.orders", "derivative needs orders > 0"));
    }
    let binding = s.fleet_bounds()?.binding();
    let leading = 0.5 * s.convention.factor(s.c2) * s.region.k() * s.region.area().sqrt();
    Ok(-leading * s.orders.powf(-1.5) * distance_cost_bracket(s, binding)
        - s.depot_overhead / (s.orders * s.orders))
}

/// Slope of the optimal average cost with respect to the charging rate.
pub fn d_average_cost_d_charge_rate(s: &Scenario) -> Result<f64> {
    if !(s.orders > 0.0) {
        return Err(Error::invalid("demand.orders", "derivative needs orders > 0"));
    }
    if s.charging == ChargingPolicy::External {
        return Err(Error::NotApplicable(
            "the charging-rate derivative under external charging".into(),
        ));
    }
    if s.fleet_bounds()?.binding() == Binding::RangeBinding {
        return Ok(0.0);
    }
    let per_order_distance = s.convention.factor(s.c2) * s.region.k() * (s.region.area() / s.orders).sqrt();
    let rate = s.robot.charge_rate_w;
    Ok(-per_order_distance * s.robot.fixed_cost() / s.interval_hours * s.phi * s.rho
        * s.robot.consumption_wh_per_mi
        / (rate * rate))
}

/// Pedestrian level of service on the sidewalks the robots use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LosClass {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosLevel {
    pub class: LosClass,
    pub speed_multiplier: f64,
}

impl LosLevel {
    /// Free flow at A, half speed at D, linear in between.
    pub fn standard(class: LosClass) -> Self {
        let speed_multiplier = match class {
            LosClass::A => 1.0,
            LosClass::B => 5.0 / 6.0,
            LosClass::C => 2.0 / 3.0,
            LosClass::D => 0.5,
        };
        LosLevel { class, speed_multiplier }
    }

    pub fn custom(class: LosClass, speed_multiplier: f64) -> Result<Self> {
        if !(speed_multiplier > 0.0 && speed_multiplier <= 1.0) {
            return Err(Error::invalid(
                "los.speed_multiplier",
                format!("must lie in (0, 1], got {speed_multiplier}"),
            ));
        }
        Ok(LosLevel { class, speed_multiplier })
    }
}

/// The scenario with robot speed reduced to the given level of service.
pub fn apply_los(s: &Scenario, los: LosLevel) -> Scenario {
    let mut out = s.clone();
    out.robot.speed_mph *= los.speed_multiplier;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Orders per interval.
    OrdersC,
    /// Fraction of the daily order total served in the interval.
    DemandShare,
    /// Interval length in hours.
    IntervalT,
    /// Minutes per pickup stop.
    PickupTime,
    /// Minutes per drop-off stop.
    DropoffTime,
    /// Watts.
    ChargeRate,
    /// Miles per hour.
    Speed,
    /// Dollars per kWh.
    EnergyPrice,
    /// Dollars per mile.
    MaintenanceRate,
    /// Dollars per robot.
    RobotPrice,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 10] = [
        SweepParameter::OrdersC,
        SweepParameter::DemandShare,
        SweepParameter::IntervalT,
        SweepParameter::PickupTime,
        SweepParameter::DropoffTime,
        SweepParameter::ChargeRate,
        SweepParameter::Speed,
        SweepParameter::EnergyPrice,
        SweepParameter::MaintenanceRate,
        SweepParameter::RobotPrice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::OrdersC => "orders_c",
            SweepParameter::DemandShare => "demand_share",
            SweepParameter::IntervalT => "interval_t",
            SweepParameter::PickupTime => "pickup_time",
            SweepParameter::DropoffTime => "dropoff_time",
            SweepParameter::ChargeRate => "charge_rate",
            SweepParameter::Speed => "speed",
            SweepParameter::EnergyPrice => "energy_price",
            SweepParameter::MaintenanceRate => "maintenance_rate",
            SweepParameter::RobotPrice => "robot_price",
        }
    }

    /// Current value in sweep units.
    pub fn read(self, s: &Scenario) -> Option<f64> {
        Some(match self {
            SweepParameter::OrdersC => s.orders,
            SweepParameter::DemandShare => s.orders / s.daily_orders?,
            SweepParameter::IntervalT => s.interval_hours,
            SweepParameter::PickupTime => s.pickup_hours * 60.0,
            SweepParameter::DropoffTime => s.dropoff_hours * 60.0,
            SweepParameter::ChargeRate => s.robot.charge_rate_w,
            SweepParameter::Speed => s.robot.speed_mph,
            SweepParameter::EnergyPrice => s.energy_price_per_wh * 1000.0,
            SweepParameter::MaintenanceRate => s.maintenance_per_mi,
            SweepParameter::RobotPrice => s.robot.price_usd,
        })
    }

    /// Returns a validated copy of `s` with this parameter set to `value`.
    ///
    /// Changing the order count keeps a configured arrival rate consistent;
    /// changing the interval with an arrival rate rescales the orders.
    pub fn apply(self, s: &Scenario, value: f64) -> Result<Scenario> {
        let mut out = s.clone();
        match self {
            SweepParameter::OrdersC => set_orders(&mut out, value),
            SweepParameter::DemandShare => {
                let daily = s.daily_orders.ok_or_else(|| {
                    Error::invalid("demand.daily_orders", "a demand-share sweep needs a daily order total")
                })?;
                set_orders(&mut out, daily * value);
            }
            SweepParameter::IntervalT => {
                out.interval_hours = value;
                if let Some(rate) = out.arrival_rate {
                    out.orders = rate * value;
                }
            }
            SweepParameter::PickupTime => out.pickup_hours = value / 60.0,
            SweepParameter::DropoffTime => out.dropoff_hours = value / 60.0,
            SweepParameter::ChargeRate => out.robot.charge_rate_w = value,
            SweepParameter::Speed => out.robot.speed_mph = value,
            SweepParameter::EnergyPrice => out.energy_price_per_wh = value / 1000.0,
            SweepParameter::MaintenanceRate => out.maintenance_per_mi = value,
            SweepParameter::RobotPrice => out.robot.price_usd = value,
        }
        out.validate()?;
        Ok(out)
    }
}

fn set_orders(s: &mut Scenario, orders: f64) {
    s.orders = orders;
    if s.arrival_rate.is_some() {
        s.arrival_rate = Some(orders / s.interval_hours);
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
                Error::invalid("param", format!("unknown sweep parameter '{s}' (one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub baseline: Scenario,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(Error::invalid("sweep.range", format!("need from < to, got {} .. {}", self.from, self.to)));
        }
        if self.steps < 2 {
            return Err(Error::invalid("sweep.steps", "must be >= 2"));
        }
        self.baseline.validate()
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.to - self.from;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.to } else { self.from + span * i as f64 / last })
            .collect()
    }
}

/// Direction of a quantity across the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        let pairs = || values.windows(2);
        if pairs().all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else if pairs().all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else if pairs().all(|w| w[1] == w[0]) {
            Trend::Constant
        } else {
            Trend::Mixed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub orders: f64,
    pub plan: PlanResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub fleet_trend: Trend,
    pub total_cost_trend: Trend,
    pub average_cost_trend: Trend,
}

/// Plans every grid point. Rows come back in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let rows = spec
        .grid()
        .into_par_iter()
        .enumerate()
        .map(|(index, value)| {
            let point = |e: Error| Error::GridPoint {
                index,
                parameter: spec.parameter.name().to_string(),
                value,
                source: Box::new(e),
            };
            let scenario = spec.parameter.apply(&spec.baseline, value).map_err(point)?;
            let plan = plan(&scenario).map_err(point)?;
            Ok(SweepRow { value, orders: scenario.orders, plan })
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let average: Vec<f64> = rows
        .iter()
        .map(|r| r.plan.average_cost.unwrap_or(f64::NAN))
        .collect();
    Ok(SweepTable {
        parameter: spec.parameter,
        fleet_trend: Trend::of(&column(|r| r.plan.fleet_size)),
        total_cost_trend: Trend::of(&column(|r| r.plan.total_cost)),
        average_cost_trend: Trend::of(&average),
        rows,
    })
}

/// Parameters with an analytic average-cost derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeParameter {
    OrdersC,
    ChargeRate,
}

impl DerivativeParameter {
    fn sweep_parameter(self) -> SweepParameter {
        match self {
            DerivativeParameter::OrdersC => SweepParameter::OrdersC,
            DerivativeParameter::ChargeRate => SweepParameter::ChargeRate,
        }
    }

    pub fn analytic(self, s: &Scenario) -> Result<f64> {
        match self {
            DerivativeParameter::OrdersC => d_average_cost_d_orders(s),
            DerivativeParameter::ChargeRate => d_average_cost_d_charge_rate(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub parameter: DerivativeParameter,
    pub step: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_residual: f64,
}

/// Compares the analytic derivative with a central difference of the
/// closed-form average cost. `step` defaults to `1e-3` times the value.
pub fn finite_difference_check(s: &Scenario, parameter: DerivativeParameter, step: Option<f64>) -> Result<FdReport> {
    finite_difference_check_with(s, parameter, step, |s| parameter.analytic(s))
}

/// Same as [`finite_difference_check`] with a caller-supplied analytic
/// derivative.
pub fn finite_difference_check_with(
    s: &Scenario,
    parameter: DerivativeParameter,
    step: Option<f64>,
    analytic: impl Fn(&Scenario) -> Result<f64>,
) -> Result<FdReport> {
    let target = parameter.sweep_parameter();
    let x = target.read(s).expect("orders and charge rate are always readable");
    let h = step.unwrap_or(FD_RELATIVE_STEP * x.abs());
    if !(h > 0.0 && h < x.abs() / 2.0) {
        return Err(Error::invalid("step", format!("must lie in (0, |x|/2), got {h}")));
    }
    let cost_at = |value: f64| target.apply(s, value).and_then(|p| average_cost(&p));
    // Five-point central stencil; its O(h^4) truncation keeps the residual
    // well under the tolerance even for the 1/x terms.
    let numeric = (cost_at(x - 2.0 * h)? - 8.0 * cost_at(x - h)? + 8.0 * cost_at(x + h)? - cost_at(x + 2.0 * h)?)
        / (12.0 * h);
    let analytic = analytic(s)?;
    let relative_residual = (analytic - numeric).abs() / analytic.abs();
    if !(relative_residual < FD_TOLERANCE) {
        return Err(Error::FiniteDifference {
            parameter: target.name().to_string(),
            analytic,
            numeric,
            residual: relative_residual,
        });
    }
    Ok(FdReport {
        parameter,
        step: h,
        analytic,
        numeric,
        relative_residual,
    })
}

/// Relative reduction `1 − after/before`.
pub fn saving(before: f64, after: f64) -> f64 {
    1.0 - after / before
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca_model::{LengthConvention, Region};
    use proptest::prelude::*;

    fn lunch(share: f64) -> Scenario {
        let s = Scenario {
            convention: LengthConvention::SingleLeg,
            ..Scenario::default()
        };
        SweepParameter::DemandShare.apply(&s, share).unwrap()
    }

    fn ac(s: &Scenario) -> f64 {
        average_cost(s).unwrap()
    }

    #[test]
    fn slope_ratios() {
        let at = |c: f64| d_average_cost_d_orders(&SweepParameter::OrdersC.apply(&lunch(0.05), c).unwrap()).unwrap();
        assert!((at(100.0) / at(200.0) - 2.83).abs() <= 0.01);
        assert!((at(100.0) / at(1000.0) - 31.62).abs() <= 0.01);
        assert!(at(100.0) < 0.0);
    }

    #[test]
    fn charge_rate_savings() {
        for (share, expected) in [(0.05, 0.0711), (0.15, 0.0485)] {
            let s = lunch(share);
            let fast = SweepParameter::ChargeRate.apply(&s, 2000.0).unwrap();
            assert!((saving(ac(&s), ac(&fast)) - expected).abs() <= 0.003);
        }
    }

    #[test]
    fn charge_rate_derivative_decays() {
        let s = lunch(0.05);
        let slow = d_average_cost_d_charge_rate(&s).unwrap();
        let fast = d_average_cost_d_charge_rate(&SweepParameter::ChargeRate.apply(&s, 800.0).unwrap()).unwrap();
        assert!(slow < 0.0 && fast < 0.0);
        assert!(fast.abs() < slow.abs());
        let busy = d_average_cost_d_charge_rate(&lunch(0.15)).unwrap();
        assert!(busy.abs() < slow.abs());
    }

    #[test]
    fn charge_rate_derivative_needs_in_interval_charging() {
        let s = Scenario {
            charging: ChargingPolicy::External,
            ..lunch(0.05)
        };
        assert!(matches!(d_average_cost_d_charge_rate(&s), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn los_d_increase() {
        for (share, expected) in [(0.05, 0.2584), (0.15, 0.1762)] {
            let s = lunch(share);
            let crowded = apply_los(&s, LosLevel::standard(LosClass::D));
            assert!((ac(&crowded) / ac(&s) - 1.0 - expected).abs() <= 0.005);
        }
        let s = lunch(0.05);
        assert_eq!(apply_los(&s, LosLevel::standard(LosClass::A)), s);
        assert!(LosLevel::custom(LosClass::B, 0.0).is_err());
        assert!(LosLevel::custom(LosClass::B, 1.2).is_err());
    }

    #[test]
    fn los_multipliers_are_monotone() {
        let m: Vec<f64> = [LosClass::A, LosClass::B, LosClass::C, LosClass::D]
            .into_iter()
            .map(|c| LosLevel::standard(c).speed_multiplier)
            .collect();
        assert_eq!(m[0], 1.0);
        assert_eq!(m[3], 0.5);
        assert!(m.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn demand_share_sweep_with_faster_pickup() {
        let base = SweepParameter::PickupTime.apply(&lunch(0.05), 2.0).unwrap();
        let table = sweep(&SweepSpec {
            parameter: SweepParameter::DemandShare,
            from: 0.05,
            to: 0.15,
            steps: 11,
            baseline: base,
        })
        .unwrap();
        assert_eq!(table.rows.len(), 11);
        let first = table.rows.first().unwrap().plan.average_cost.unwrap();
        let last = table.rows.last().unwrap().plan.average_cost.unwrap();
        assert!((first - 0.39).abs() <= 0.01);
        assert!((last - 0.32).abs() <= 0.01);
        assert_eq!(table.average_cost_trend, Trend::Decreasing);
        assert_eq!(table.total_cost_trend, Trend::Increasing);
    }

    #[test]
    fn pickup_time_savings() {
        for (share, expected) in [(0.05, 0.1274), (0.15, 0.1505)] {
            let table = sweep(&SweepSpec {
                parameter: SweepParameter::PickupTime,
                from: 2.0,
                to: 3.0,
                steps: 2,
                baseline: lunch(share),
            })
            .unwrap();
            let fast = table.rows[0].plan.average_cost.unwrap();
            let slow = table.rows[1].plan.average_cost.unwrap();
            assert!((saving(slow, fast) - expected).abs() <= 0.003);
        }
    }

    #[test]
    fn two_point_sweep_matches_plan_calls() {
        let base = lunch(0.05);
        let table = sweep(&SweepSpec {
            parameter: SweepParameter::Speed,
            from: 4.0,
            to: 4.0 + 1e-9,
            steps: 2,
            baseline: base.clone(),
        })
        .unwrap();
        assert_eq!(table.rows[0].plan, plan(&base).unwrap());
        assert_eq!(
            table.rows[1].plan,
            plan(&SweepParameter::Speed.apply(&base, 4.0 + 1e-9).unwrap()).unwrap()
        );
    }

    #[test]
    fn sweep_rejects_bad_specs_and_points() {
        let base = lunch(0.05);
        let spec = |from, to, steps| SweepSpec {
            parameter: SweepParameter::Speed,
            from,
            to,
            steps,
            baseline: base.clone(),
        };
        assert!(sweep(&spec(4.0, 3.0, 5)).is_err());
        assert!(sweep(&spec(3.0, 4.0, 1)).is_err());
        match sweep(&spec(-1.0, 4.0, 6)) {
            Err(Error::GridPoint { index, .. }) => assert_eq!(index, 0),
            other => panic!("{other:?}"),
        }
        let no_daily = Scenario { daily_orders: None, ..base.clone() };
        assert!(SweepParameter::DemandShare.apply(&no_daily, 0.1).is_err());
    }

    #[test]
    fn interval_sweep_rescales_orders() {
        let mut base = lunch(0.05);
        base.arrival_rate = Some(base.orders / base.interval_hours);
        let table = sweep(&SweepSpec {
            parameter: SweepParameter::IntervalT,
            from: 1.0,
            to: 4.0,
            steps: 4,
            baseline: base.clone(),
        })
        .unwrap();
        for row in &table.rows {
            assert!((row.orders - base.arrival_rate.unwrap() * row.value).abs() < 1e-9);
        }
        assert_eq!(table.average_cost_trend, Trend::Decreasing);
    }

    #[test]
    fn finite_differences_pass() {
        let s = lunch(0.05);
        let r = finite_difference_check(&s, DerivativeParameter::OrdersC, Some(1e-3 * s.orders)).unwrap();
        assert!(r.relative_residual < FD_TOLERANCE);
        let r = finite_difference_check(&s, DerivativeParameter::ChargeRate, None).unwrap();
        assert!(r.relative_residual < FD_TOLERANCE);
        let rent = Scenario { depot_overhead: 273.97, ..s };
        finite_difference_check(&rent, DerivativeParameter::OrdersC, None).unwrap();
    }

    #[test]
    fn los_d_increase_can_exceed_half_when_travel_dominates() {
        let s = SweepParameter::OrdersC.apply(&lunch(0.05), 1.0).unwrap();
        let increase = ac(&apply_los(&s, LosLevel::standard(LosClass::D))) / ac(&s) - 1.0;
        assert!(increase > 0.5, "{increase}");
    }

    #[test]
    fn finite_difference_catches_sign_error() {
        let s = lunch(0.05);
        let flipped = finite_difference_check_with(&s, DerivativeParameter::OrdersC, None, |s| {
            d_average_cost_d_orders(s).map(|d| -d)
        });
        assert!(matches!(flipped, Err(Error::FiniteDifference { .. })));
    }

    proptest! {
        #[test]
        fn los_d_increase_bounded_by_travel_share(orders in 1.0f64..10_000.0, area in 0.05f64..20.0, single in any::<bool>()) {
            let s = Scenario {
                orders,
                region: Region::manhattan(area).unwrap(),
                convention: if single { LengthConvention::SingleLeg } else { LengthConvention::Eq9 },
                ..Scenario::default()
            };
            let crowded = apply_los(&s, LosLevel::standard(LosClass::D));
            let increase = ac(&crowded) / ac(&s) - 1.0;
            let base = plan(&s).unwrap();
            let travel_share = s.robot.fixed_cost() * s.rho * base.tour_length
                / (s.robot.speed_mph * s.interval_hours)
                / base.total_cost;
            prop_assert!(increase >= 0.0);
            prop_assert!(increase <= travel_share * (1.0 + 1e-12));
            prop_assert!(travel_share < 1.0);
        }

        #[test]
        fn analytic_derivatives_match(orders in 5.0f64..5000.0, rate in 100.0f64..5000.0, area in 0.1f64..10.0) {
            let mut s = Scenario { orders, region: Region::manhattan(area).unwrap(), ..Scenario::default() };
            s.robot.charge_rate_w = rate;
            prop_assert!(finite_difference_check(&s, DerivativeParameter::OrdersC, None).is_ok());
            prop_assert!(finite_difference_check(&s, DerivativeParameter::ChargeRate, None).is_ok());
        }

        #[test]
        fn longer_interval_beats_more_orders(rate in 20.0f64..500.0, t in 0.5f64..3.0, factor in 1.1f64..3.0) {
            let base = Scenario {
                orders: rate * t,
                arrival_rate: Some(rate),
                interval_hours: t,
                ..Scenario::default()
            };
            let longer = SweepParameter::IntervalT.apply(&base, t * factor).unwrap();
            let more_orders = SweepParameter::OrdersC.apply(&base, base.orders * factor).unwrap();
            prop_assert!(ac(&longer) < ac(&base));
            prop_assert!(ac(&longer) < ac(&more_orders));
        }
    }
}
