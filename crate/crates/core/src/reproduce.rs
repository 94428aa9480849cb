//! Case-study reproduction checks behind `sdr-planner reproduce`.
//!
//! The single-depot figures and their sensitivities only reproduce when the
//! route length is taken as one leg, `k·√(A·C)`; the neighborhood depot table
//! only reproduces with the integrated factor. Each check therefore carries
//! the convention it was run under.

use serde::{Deserialize, Serialize};

use crate::ca_model::{short_circuit_factor_limit, LengthConvention};
use crate::error::Result;
use crate::fixtures;
use crate::fleet_plan::{average_cost, kkt_verify, plan, ChargingPolicy, Scenario};
use crate::scenario_io::{compare_depots, parse_partition, parse_scenario};
use crate::sensitivity::{apply_los, d_average_cost_d_orders, saving, LosClass, LosLevel, SweepParameter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub group: String,
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    /// Absolute tolerance on `actual - expected`.
    pub tolerance: f64,
    pub passed: bool,
}

struct Checks {
    group: &'static str,
    items: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &str, expected: f64, actual: f64, tolerance: f64) {
        self.items.push(Check {
            group: self.group.to_string(),
            name: name.to_string(),
            expected,
            actual,
            tolerance,
            passed: (actual - expected).abs() <= tolerance,
        });
    }

    fn relative(&mut self, name: &str, expected: f64, actual: f64, fraction: f64) {
        self.push(name, expected, actual, fraction * expected.abs());
    }
}

fn at_share(s: &Scenario, share: f64) -> Result<Scenario> {
    SweepParameter::DemandShare.apply(s, share)
}

/// Runs every check against the given baseline and depot partition.
pub fn run_checks(base: &Scenario, partition_json: &str) -> Result<Vec<Check>> {
    let single = Scenario {
        convention: LengthConvention::SingleLeg,
        ..base.clone()
    };
    let low = at_share(&single, 0.05)?;
    let high = at_share(&single, 0.15)?;
    let mut c = Checks { group: "single_leg", items: Vec::new() };

    let p = plan(&low)?;
    let l_avg = p.avg_route_length.unwrap_or(f64::NAN);
    c.push("fleet size", 18.41, p.fleet_size, 0.2);
    c.relative("total cost ($)", 128.08, p.total_cost, 0.02);
    c.push("average cost ($/order)", 0.45, p.average_cost.unwrap_or(f64::NAN), 0.01);
    c.push("route length per robot (mi)", 1.68, l_avg, 0.05);
    c.push("buffered route length (mi)", 2.1, low.rho * l_avg, 0.05);
    c.push("buffered route within range (1 = yes)", 1.0, f64::from(u8::from(low.rho * l_avg <= low.robot.range_mi)), 0.0);

    let ac = average_cost;
    c.push("average cost at 15% share", 0.38, ac(&high)?, 0.01);
    let fast_low = SweepParameter::PickupTime.apply(&low, 2.0)?;
    let fast_high = SweepParameter::PickupTime.apply(&high, 2.0)?;
    c.push("2-min pickup, 5% share", 0.39, ac(&fast_low)?, 0.01);
    c.push("2-min pickup, 15% share", 0.32, ac(&fast_high)?, 0.01);
    c.push("pickup-time saving, 5% (%)", 12.74, 100.0 * saving(ac(&low)?, ac(&fast_low)?), 0.3);
    c.push("pickup-time saving, 15% (%)", 15.05, 100.0 * saving(ac(&high)?, ac(&fast_high)?), 0.3);

    for (label, s, expected_fast, expected_external) in [("5%", &low, 7.11, 8.90), ("15%", &high, 4.85, 6.07)] {
        let fast = SweepParameter::ChargeRate.apply(s, 2000.0)?;
        let external = Scenario { charging: ChargingPolicy::External, ..s.clone() };
        c.push(&format!("2 kW charging saving, {label} (%)"), expected_fast, 100.0 * saving(ac(s)?, ac(&fast)?), 0.3);
        c.push(&format!("external charging saving, {label} (%)"), expected_external, 100.0 * saving(ac(s)?, ac(&external)?), 0.3);
    }

    let los_d = LosLevel::standard(LosClass::D);
    for (label, s, expected) in [("5%", &low, 25.84), ("15%", &high, 17.62)] {
        let increase = 100.0 * (ac(&apply_los(s, los_d))? / ac(s)? - 1.0);
        c.push(&format!("LOS D cost increase, {label} (%)"), expected, increase, 0.5);
    }

    for (label, s, expected) in [("5%", &low, 1.41), ("15%", &high, 0.70)] {
        let rented = Scenario { depot_overhead: 273.97, ..s.clone() };
        c.push(&format!("average cost with depot rent, {label}"), expected, ac(&rented)?, 0.02);
    }
    let mut checks = c.items;

    let mut c = Checks { group: "eq9", items: Vec::new() };
    let eq9 = Scenario {
        convention: LengthConvention::Eq9,
        ..at_share(base, 0.05)?
    };
    let partition = parse_partition(partition_json, &eq9.region)?;
    let cmp = compare_depots(&partition, &eq9)?;
    let expected = [(5.01, 34.93), (6.15, 42.77), (7.17, 49.86)];
    for (row, (fleet, cost)) in cmp.depots.iter().zip(expected) {
        c.push(&format!("{} fleet", row.name), fleet, row.fleet_size, 0.05);
        c.relative(&format!("{} total cost ($)", row.name), cost, row.total_cost, 0.02);
    }
    c.push("sum fleet", 18.33, cmp.sum.fleet_size, 0.05);
    c.relative("sum total cost ($)", 127.56, cmp.sum.total_cost, 0.02);
    checks.extend(c.items);

    let mut c = Checks { group: "model", items: Vec::new() };
    let slope = |orders: f64| SweepParameter::OrdersC.apply(&low, orders).and_then(|s| d_average_cost_d_orders(&s));
    c.push("slope ratio C=100 vs 200", 2.83, slope(100.0)? / slope(200.0)?, 0.01);
    c.push("slope ratio C=100 vs 1000", 31.62, slope(100.0)? / slope(1000.0)?, 0.01);
    c.push("short-circuit limit", 0.8113067, short_circuit_factor_limit(), 1e-5);
    c.push("integrated factor", 1.62262, 2.0 * short_circuit_factor_limit(), 1e-5);
    let cert = kkt_verify(&low, &p)?;
    c.push("daily fixed cost ($)", 6.85, low.robot.fixed_cost(), 0.005);
    c.push("KKT certificate (1 = pass)", 1.0, f64::from(u8::from(cert.passed)), 0.0);
    checks.extend(c.items);

    Ok(checks)
}

/// Runs the checks on the bundled (or overridden) fixtures.
pub fn run_bundled_checks() -> Result<Vec<Check>> {
    let base = parse_scenario(&fixtures::read_fixture("manhattan_lunch.json")?, &[])?;
    run_checks(&base, &fixtures::read_fixture("table1.json")?)
}
