//! Scenario and depot-partition files, multi-depot comparison and report
//! serialization.
//!
//! Scenario files are JSON documents in user-facing units (minutes for stop
//! service, $/kWh for energy). Loading converts them to the internal
//! [`Scenario`] units and validates every field; unknown keys are rejected
//! so a misspelt override never silently falls back to a default.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ca_model::{Metric, Region, DEFAULT_C2};
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::fleet_plan::{plan, ChargingPolicy, PlanResult, RobotSpec, Scenario};
use crate::ca_model::LengthConvention;

pub const DEFAULT_RHO: f64 = 1.25;
pub const DEFAULT_PHI: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub region: RegionConfig,
    pub demand: DemandConfig,
    pub interval: IntervalConfig,
    pub service: ServiceConfig,
    #[serde(default)]
    pub buffers: BuffersConfig,
    pub robot: RobotConfig,
    pub costs: CostsConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub ca: CaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fleet_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_sq_mi: Option<f64>,
    /// Planar ring in miles, used when the area is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daily_orders: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub share: Option<f64>,
    /// Orders per hour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    pub hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub pickup_min: f64,
    pub dropoff_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuffersConfig {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_phi() -> f64 {
    DEFAULT_PHI
}

impl Default for BuffersConfig {
    fn default() -> Self {
        BuffersConfig { rho: DEFAULT_RHO, phi: DEFAULT_PHI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub price_usd: f64,
    pub lifespan_days: f64,
    pub speed_mph: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_mi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery_wh: Option<f64>,
    pub consumption_wh_per_mi: f64,
    pub charge_rate_w: f64,
    #[serde(default = "default_compartment")]
    pub compartment: u32,
}

fn default_compartment() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsConfig {
    pub maintenance_usd_per_mi: f64,
    pub energy_usd_per_kwh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depot_overhead_usd: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default)]
    pub charging: ChargingPolicy,
    #[serde(default)]
    pub convention: LengthConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaConfig {
    #[serde(default = "default_c2")]
    pub c2: f64,
}

fn default_c2() -> f64 {
    DEFAULT_C2
}

impl Default for CaConfig {
    fn default() -> Self {
        CaConfig { c2: DEFAULT_C2 }
    }
}

/// Signed-area magnitude of a planar ring. The closing vertex is optional.
pub fn polygon_area(ring: &[[f64; 2]]) -> Result<f64> {
    let ring = match (ring.first(), ring.last()) {
        (Some(first), Some(last)) if ring.len() > 1 && first == last => &ring[..ring.len() - 1],
        _ => ring,
    };
    if ring.len() < 3 {
        return Err(Error::invalid("region.polygon", "needs at least three vertices"));
    }
    if ring.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::invalid("region.polygon", "coordinates must be finite"));
    }
    let twice: f64 = ring
        .iter()
        .zip(ring.iter().cycle().skip(1))
        .map(|(a, b)| a[0] * b[1] - b[0] * a[1])
        .sum();
    let area = twice.abs() / 2.0;
    if !(area > 0.0) {
        return Err(Error::invalid("region.polygon", "encloses zero area"));
    }
    Ok(area)
}

impl ScenarioConfig {
    pub fn into_scenario(self) -> Result<Scenario> {
        let area = match (self.region.area_sq_mi, &self.region.polygon) {
            (Some(area), _) => area,
            (None, Some(ring)) => polygon_area(ring)?,
            (None, None) => {
                return Err(Error::invalid("region", "either area_sq_mi or polygon is required"))
            }
        };
        let region = Region::new(area, self.region.metric, self.region.k)?;

        let demand = &self.demand;
        if let Some(share) = demand.share {
            if !(0.0..=1.0).contains(&share) {
                return Err(Error::invalid("demand.share", format!("must lie in [0, 1], got {share}")));
            }
        }
        let orders = match (demand.orders, demand.daily_orders, demand.share, demand.arrival_rate) {
            (Some(orders), ..) => orders,
            (None, Some(daily), Some(share), _) => daily * share,
            (None, None, Some(_), _) => {
                return Err(Error::invalid("demand.share", "needs demand.daily_orders"))
            }
            (None, _, None, Some(rate)) => rate * self.interval.hours,
            _ => {
                return Err(Error::invalid(
                    "demand",
                    "give orders, daily_orders with share, or arrival_rate",
                ))
            }
        };
        if let (Some(given), Some(daily), Some(share)) = (demand.orders, demand.daily_orders, demand.share) {
            if (given - daily * share).abs() > 1e-9 * given.abs().max(1.0) {
                return Err(Error::invalid(
                    "demand.orders",
                    format!("{given} disagrees with daily_orders x share = {}", daily * share),
                ));
            }
        }

        let robot = &self.robot;
        let range_mi = match (robot.range_mi, robot.battery_wh) {
            (Some(range), _) => range,
            (None, Some(battery)) => {
                ensure_positive("robot.consumption_wh_per_mi", robot.consumption_wh_per_mi)?;
                battery / robot.consumption_wh_per_mi
            }
            (None, None) => {
                return Err(Error::invalid("robot.range_mi", "give range_mi or battery_wh"))
            }
        };

        for (field, value) in [
            ("service.pickup_min", self.service.pickup_min),
            ("service.dropoff_min", self.service.dropoff_min),
        ] {
            ensure_nonnegative(field, value)?;
        }

        let scenario = Scenario {
            region,
            orders,
            arrival_rate: demand.arrival_rate,
            daily_orders: demand.daily_orders,
            interval_hours: self.interval.hours,
            pickup_hours: self.service.pickup_min / 60.0,
            dropoff_hours: self.service.dropoff_min / 60.0,
            rho: self.buffers.rho,
            phi: self.buffers.phi,
            maintenance_per_mi: self.costs.maintenance_usd_per_mi,
            energy_price_per_wh: self.costs.energy_usd_per_kwh / 1000.0,
            charging: self.policy.charging,
            convention: self.policy.convention,
            c2: self.ca.c2,
            robot: RobotSpec {
                price_usd: robot.price_usd,
                lifespan_days: robot.lifespan_days,
                speed_mph: robot.speed_mph,
                range_mi,
                battery_wh: robot.battery_wh,
                consumption_wh_per_mi: robot.consumption_wh_per_mi,
                charge_rate_w: robot.charge_rate_w,
                compartment: robot.compartment,
            },
            depot_overhead: self.costs.depot_overhead_usd.unwrap_or(0.0),
            fleet_cap: self.fleet_cap,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Config that loads back into `s`. Regions are written by area.
    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioConfig {
            region: RegionConfig {
                area_sq_mi: Some(s.region.area()),
                polygon: None,
                metric: s.region.metric(),
                k: Some(s.region.k()),
            },
            demand: DemandConfig {
                orders: Some(s.orders),
                daily_orders: s.daily_orders,
                share: None,
                arrival_rate: s.arrival_rate,
            },
            interval: IntervalConfig { hours: s.interval_hours },
            service: ServiceConfig {
                pickup_min: s.pickup_hours * 60.0,
                dropoff_min: s.dropoff_hours * 60.0,
            },
            buffers: BuffersConfig { rho: s.rho, phi: s.phi },
            robot: RobotConfig {
                price_usd: s.robot.price_usd,
                lifespan_days: s.robot.lifespan_days,
                speed_mph: s.robot.speed_mph,
                range_mi: Some(s.robot.range_mi),
                battery_wh: s.robot.battery_wh,
                consumption_wh_per_mi: s.robot.consumption_wh_per_mi,
                charge_rate_w: s.robot.charge_rate_w,
                compartment: s.robot.compartment,
            },
            costs: CostsConfig {
                maintenance_usd_per_mi: s.maintenance_per_mi,
                energy_usd_per_kwh: s.energy_price_per_wh * 1000.0,
                depot_overhead_usd: (s.depot_overhead != 0.0).then_some(s.depot_overhead),
            },
            policy: PolicyConfig {
                charging: s.charging,
                convention: s.convention,
            },
            ca: CaConfig { c2: s.c2 },
            fleet_cap: s.fleet_cap,
        }
    }
}

/// Sets `path` (dot-separated) in a JSON document. The value is parsed as
/// JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut keys = path.split('.').peekable();
    let mut node = doc;
    while let Some(key) = keys.next() {
        if key.is_empty() {
            return Err(Error::Config(format!("override key '{path}' has an empty segment")));
        }
        let object = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override '{path}': '{key}' is not inside an object")))?;
        if keys.peek().is_none() {
            object.insert(key.to_string(), value);
            return Ok(());
        }
        node = object
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one segment")
}

/// Parses and validates a scenario document, applying overrides first.
pub fn parse_scenario(text: &str, overrides: &[String]) -> Result<Scenario> {
    let mut doc: Value = serde_json::from_str(text)?;
    for assignment in overrides {
        apply_override(&mut doc, assignment)?;
    }
    let config: ScenarioConfig = serde_json::from_value(doc)?;
    config.into_scenario()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?, &[])
}

pub fn scenario_to_json(s: &Scenario) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ScenarioConfig::from_scenario(s))?)
}

/// Depot entry as written in a partition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepotEntry {
    pub name: String,
    pub area_sq_mi: f64,
    pub orders: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depot_overhead_usd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionFile {
    List(Vec<DepotEntry>),
    WithParent {
        depots: Vec<DepotEntry>,
        parent_area_sq_mi: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Depot {
    pub name: String,
    pub region: Region,
    pub orders: f64,
    pub depot_overhead: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepotPartition {
    pub depots: Vec<Depot>,
    pub parent: Option<Region>,
}

impl DepotPartition {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for depot in &self.depots {
            if !seen.insert(depot.name.as_str()) {
                return Err(Error::invalid("depots.name", format!("duplicate depot '{}'", depot.name)));
            }
            ensure_nonnegative(&format!("depots.{}.orders", depot.name), depot.orders)?;
            ensure_nonnegative(&format!("depots.{}.depot_overhead_usd", depot.name), depot.depot_overhead)?;
        }
        Ok(())
    }

    /// Builds depot regions with the metric and constant of `template`.
    pub fn from_file(file: PartitionFile, template: &Region) -> Result<Self> {
        let (entries, parent_area) = match file {
            PartitionFile::List(entries) => (entries, None),
            PartitionFile::WithParent { depots, parent_area_sq_mi } => (depots, parent_area_sq_mi),
        };
        let depots = entries
            .into_iter()
            .map(|e| {
                Ok(Depot {
                    region: template.with_area(e.area_sq_mi).map_err(|_| {
                        Error::invalid(format!("depots.{}.area_sq_mi", e.name), "must be > 0")
                    })?,
                    orders: e.orders,
                    depot_overhead: e.depot_overhead_usd.unwrap_or(0.0),
                    name: e.name,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let parent = parent_area.map(|a| template.with_area(a)).transpose()?;
        let partition = DepotPartition { depots, parent };
        partition.validate()?;
        Ok(partition)
    }
}

pub fn parse_partition(text: &str, template: &Region) -> Result<DepotPartition> {
    DepotPartition::from_file(serde_json::from_str(text)?, template)
}

pub fn load_partition(path: impl AsRef<Path>, template: &Region) -> Result<DepotPartition> {
    parse_partition(&std::fs::read_to_string(path)?, template)
}

/// One line of a depot comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub area_sq_mi: f64,
    pub orders: f64,
    pub fleet_size: f64,
    pub total_cost: f64,
    pub average_cost: Option<f64>,
}

impl ReportRow {
    pub fn from_plan(name: impl Into<String>, area: f64, orders: f64, plan: &PlanResult) -> Self {
        ReportRow {
            name: name.into(),
            area_sq_mi: area,
            orders,
            fleet_size: plan.fleet_size,
            total_cost: plan.total_cost,
            average_cost: plan.average_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotComparison {
    pub depots: Vec<ReportRow>,
    pub sum: ReportRow,
    /// The whole area served from a single depot.
    pub parent: Option<ReportRow>,
}

impl DepotComparison {
    /// Depot rows, then the sum row, then the single-depot baseline.
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = self.depots.clone();
        rows.push(self.sum.clone());
        rows.extend(self.parent.clone());
        rows
    }
}

fn depot_scenario(base: &Scenario, region: Region, orders: f64, overhead: f64) -> Scenario {
    Scenario {
        region,
        orders,
        arrival_rate: None,
        daily_orders: None,
        depot_overhead: overhead,
        ..base.clone()
    }
}

/// Plans every depot independently on the shared rates of `base`.
pub fn compare_depots(partition: &DepotPartition, base: &Scenario) -> Result<DepotComparison> {
    partition.validate()?;
    let depots = partition
        .depots
        .par_iter()
        .map(|d| {
            let s = depot_scenario(base, d.region, d.orders, d.depot_overhead);
            Ok(ReportRow::from_plan(&d.name, d.region.area(), d.orders, &plan(&s)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let orders: f64 = depots.iter().map(|r| r.orders).sum();
    let total_cost: f64 = depots.iter().map(|r| r.total_cost).sum();
    let sum = ReportRow {
        name: "Sum".to_string(),
        area_sq_mi: depots.iter().map(|r| r.area_sq_mi).sum(),
        orders,
        fleet_size: depots.iter().map(|r| r.fleet_size).sum(),
        total_cost,
        average_cost: (orders > 0.0).then(|| total_cost / orders),
    };

    let parent = partition
        .parent
        .map(|region| {
            let s = depot_scenario(base, region, orders, base.depot_overhead);
            plan(&s).map(|p| ReportRow::from_plan("Single depot", region.area(), orders, &p))
        })
        .transpose()?;

    Ok(DepotComparison { depots, sum, parent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Rounds half away from zero to `places` decimals.
pub fn round_to(value: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    (value * scale).round() / scale
}

const DOLLARS: i32 = 2;
const FLEET: i32 = 2;
const MILES: i32 = 3;
const ORDERS: i32 = 2;

impl ReportRow {
    fn rounded(&self) -> ReportRow {
        ReportRow {
            name: self.name.clone(),
            area_sq_mi: round_to(self.area_sq_mi, MILES),
            orders: round_to(self.orders, ORDERS),
            fleet_size: round_to(self.fleet_size, FLEET),
            total_cost: round_to(self.total_cost, DOLLARS),
            average_cost: self.average_cost.map(|v| round_to(v, DOLLARS)),
        }
    }
}

const REPORT_HEADER: [&str; 6] = ["name", "area_sq_mi", "orders", "fleet_size", "total_cost", "average_cost"];

/// Serializes depot rows with fixed decimals.
pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let rounded: Vec<ReportRow> = rows.iter().map(ReportRow::rounded).collect();
            let mut out = serde_json::to_vec_pretty(&rounded)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(REPORT_HEADER)?;
            for row in rows {
                writer.write_record([
                    row.name.clone(),
                    format!("{:.*}", MILES as usize, row.area_sq_mi),
                    format!("{:.*}", ORDERS as usize, row.orders),
                    format!("{:.*}", FLEET as usize, row.fleet_size),
                    format!("{:.*}", DOLLARS as usize, row.total_cost),
                    row.average_cost
                        .map(|v| format!("{:.*}", DOLLARS as usize, v))
                        .unwrap_or_default(),
                ])?;
            }
            writer.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

pub fn parse_report_json(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Writes a header row and one record per item, all serialized through serde.
pub fn emit_csv<T: Serialize>(records: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        writer.serialize(record)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}
