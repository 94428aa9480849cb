//! Monte Carlo routing oracle.
//!
//! Random pickup-and-delivery instances are drawn on a square around a
//! central depot and routed explicitly: exactly by a subset dynamic
//! program for a handful of orders, heuristically (cheapest insertion then
//! precedence-preserving 2-opt and or-opt) beyond that. Averaging over many
//! seeded trials gives empirical counterparts of the routing constant `k`,
//! the integration factor `k⁺` and the route-length buffer.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Largest instance the exact solver accepts.
pub const MAX_EXACT_ORDERS: usize = 6;
/// Buffer whose coverage `estimate_constants` reports.
pub const RHO_BUFFER: f64 = 1.25;
pub const MIN_TRIALS: usize = 30;
pub const MIN_ESTIMATE_ORDERS: usize = 10;

/// Smallest length reduction accepted as an improving move.
const IMPROVEMENT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteMetric {
    Euclidean,
    Manhattan,
}

impl RouteMetric {
    pub fn distance(self, a: Point, b: Point) -> f64 {
        let (dx, dy) = (a.x - b.x, a.y - b.y);
        match self {
            RouteMetric::Euclidean => dx.hypot(dy),
            RouteMetric::Manhattan => dx.abs() + dy.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub pickup: Point,
    pub dropoff: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteInstance {
    pub depot: Point,
    pub orders: Vec<Order>,
    pub region_side: f64,
    pub metric: RouteMetric,
    /// Compartment capacity; `None` is unbounded.
    pub capacity: Option<u32>,
    pub seed: u64,
}

/// Draws `n_orders` orders with pickup and drop-off independently uniform on
/// the square of the given area, depot at the center.
pub fn gen_instance(
    n_orders: usize,
    area: f64,
    metric: RouteMetric,
    capacity: Option<u32>,
    seed: u64,
) -> Result<RouteInstance> {
    ensure_positive("area", area)?;
    if capacity == Some(0) {
        return Err(Error::invalid("capacity", "must be >= 1"));
    }
    let side = area.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || Point {
        x: rng.random::<f64>() * side,
        y: rng.random::<f64>() * side,
    };
    let orders = (0..n_orders)
        .map(|_| Order {
            pickup: point(),
            dropoff: point(),
        })
        .collect();
    Ok(RouteInstance {
        depot: Point { x: side / 2.0, y: side / 2.0 },
        orders,
        region_side: side,
        metric,
        capacity,
        seed,
    })
}

/// One visit on a tour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum Stop {
    Pickup(usize),
    Dropoff(usize),
}

impl Stop {
    pub fn order(self) -> usize {
        match self {
            Stop::Pickup(i) | Stop::Dropoff(i) => i,
        }
    }
}

/// A closed tour from the depot; the depot itself is implicit at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourSolution {
    pub visits: Vec<Stop>,
    pub length: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TourViolation {
    UnknownOrder(usize),
    Duplicate(Stop),
    Missing(Stop),
    Precedence(usize),
    Capacity { position: usize, load: u32 },
}

impl fmt::Display for TourViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TourViolation::UnknownOrder(i) => write!(f, "stop refers to unknown order {i}"),
            TourViolation::Duplicate(s) => write!(f, "{s:?} visited more than once"),
            TourViolation::Missing(s) => write!(f, "{s:?} never visited"),
            TourViolation::Precedence(i) => write!(f, "order {i} dropped off before pickup"),
            TourViolation::Capacity { position, load } => {
                write!(f, "load {load} exceeds capacity after visit {position}")
            }
        }
    }
}

impl std::error::Error for TourViolation {}

fn stop_point(inst: &RouteInstance, stop: Stop) -> Point {
    match stop {
        Stop::Pickup(i) => inst.orders[i].pickup,
        Stop::Dropoff(i) => inst.orders[i].dropoff,
    }
}

/// Checks every tour invariant and returns the recomputed length.
pub fn validate_tour(inst: &RouteInstance, visits: &[Stop]) -> std::result::Result<f64, TourViolation> {
    let n = inst.orders.len();
    let mut picked = vec![false; n];
    let mut dropped = vec![false; n];
    let mut load = 0u32;
    for (position, &stop) in visits.iter().enumerate() {
        let i = stop.order();
        if i >= n {
            return Err(TourViolation::UnknownOrder(i));
        }
        match stop {
            Stop::Pickup(_) => {
                if std::mem::replace(&mut picked[i], true) {
                    return Err(TourViolation::Duplicate(stop));
                }
                load += 1;
            }
            Stop::Dropoff(_) => {
                if dropped[i] {
                    return Err(TourViolation::Duplicate(stop));
                }
                if !picked[i] {
                    return Err(TourViolation::Precedence(i));
                }
                dropped[i] = true;
                load -= 1;
            }
        }
        if inst.capacity.is_some_and(|q| load > q) {
            return Err(TourViolation::Capacity { position, load });
        }
    }
    if let Some(i) = picked.iter().position(|p| !p) {
        return Err(TourViolation::Missing(Stop::Pickup(i)));
    }
    if let Some(i) = dropped.iter().position(|d| !d) {
        return Err(TourViolation::Missing(Stop::Dropoff(i)));
    }
    let mut length = 0.0;
    let mut at = inst.depot;
    for &stop in visits {
        let next = stop_point(inst, stop);
        length += inst.metric.distance(at, next);
        at = next;
    }
    Ok(length + inst.metric.distance(at, inst.depot))
}

/// Minimum-length tour by dynamic programming over visited-stop subsets.
///
/// Stop `2i` is the pickup and `2i + 1` the drop-off of order `i`. The
/// onboard load is a function of the subset alone, so capacity and
/// precedence both prune subsets rather than paths.
pub fn solve_exact(inst: &RouteInstance) -> Result<TourSolution> {
    let n = inst.orders.len();
    if n > MAX_EXACT_ORDERS {
        return Err(Error::InstanceTooLarge { orders: n, max: MAX_EXACT_ORDERS });
    }
    if n == 0 {
        return Ok(TourSolution { visits: Vec::new(), length: 0.0, exact: true });
    }
    let m = 2 * n;
    let stop = |s: usize| if s.is_multiple_of(2) { Stop::Pickup(s / 2) } else { Stop::Dropoff(s / 2) };
    let points: Vec<Point> = (0..m).map(|s| stop_point(inst, stop(s))).collect();
    let d = |a: Point, b: Point| inst.metric.distance(a, b);
    let pickup_bits: usize = (0..n).map(|i| 1 << (2 * i)).sum();
    let load = |mask: usize| i64::from((mask & pickup_bits).count_ones()) - i64::from((mask & !pickup_bits).count_ones());
    let over = |mask: usize| inst.capacity.is_some_and(|q| load(mask) > i64::from(q));

    let full = (1usize << m) - 1;
    let mut best = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![usize::MAX; (full + 1) * m];
    for i in 0..n {
        best[(1 << (2 * i)) * m + 2 * i] = d(inst.depot, points[2 * i]);
    }
    for mask in 1..=full {
        if over(mask) {
            continue;
        }
        for last in 0..m {
            let here = best[mask * m + last];
            if !here.is_finite() {
                continue;
            }
            for next in 0..m {
                let bit = 1 << next;
                if mask & bit != 0 {
                    continue;
                }
                // a drop-off needs its pickup already on board
                if next % 2 == 1 && mask & (1 << (next - 1)) == 0 {
                    continue;
                }
                let grown = mask | bit;
                if over(grown) {
                    continue;
                }
                let candidate = here + d(points[last], points[next]);
                let slot = grown * m + next;
                if candidate < best[slot] {
                    best[slot] = candidate;
                    parent[slot] = last;
                }
            }
        }
    }

    let (mut last, length) = (0..m)
        .map(|s| (s, best[full * m + s] + d(points[s], inst.depot)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one stop");
    let mut visits = Vec::with_capacity(m);
    let mut mask = full;
    while mask != 0 {
        visits.push(stop(last));
        let prev = parent[mask * m + last];
        mask &= !(1 << last);
        last = prev;
    }
    visits.reverse();
    Ok(TourSolution { visits, length, exact: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Free,
    Pickup { dropoff: usize },
    Dropoff { pickup: usize },
}

impl NodeKind {
    fn load_delta(self) -> i64 {
        match self {
            NodeKind::Free => 0,
            NodeKind::Pickup { .. } => 1,
            NodeKind::Dropoff { .. } => -1,
        }
    }
}

/// Routing problem over nodes `1..=m` with node `0` as the depot. Routes
/// are stored without the depot.
struct Router {
    size: usize,
    dist: Vec<f64>,
    kind: Vec<NodeKind>,
    capacity: Option<u32>,
}

impl Router {
    fn new(metric: RouteMetric, depot: Point, nodes: &[(Point, NodeKind)], capacity: Option<u32>) -> Self {
        let points: Vec<Point> = std::iter::once(depot).chain(nodes.iter().map(|n| n.0)).collect();
        let size = points.len();
        let mut dist = vec![0.0; size * size];
        for (a, pa) in points.iter().enumerate() {
            for (b, pb) in points.iter().enumerate().skip(a + 1) {
                let d = metric.distance(*pa, *pb);
                dist[a * size + b] = d;
                dist[b * size + a] = d;
            }
        }
        let kind = std::iter::once(NodeKind::Free).chain(nodes.iter().map(|n| n.1)).collect();
        Router { size, dist, kind, capacity }
    }

    fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.size + b]
    }

    fn length(&self, route: &[usize]) -> f64 {
        let mut at = 0;
        let mut total = 0.0;
        for &node in route {
            total += self.d(at, node);
            at = node;
        }
        total + self.d(at, 0)
    }

    fn fits(&self, route: &[usize]) -> bool {
        let Some(q) = self.capacity else { return true };
        let mut load = 0i64;
        route.iter().all(|&node| {
            load += self.kind[node].load_delta();
            load <= i64::from(q)
        })
    }

    /// Global cheapest insertion. Pickup/drop-off pairs are inserted
    /// together; the pickup node stands for its pair in `units`.
    fn construct(&self, units: &[usize]) -> Vec<usize> {
        let mut route: Vec<usize> = Vec::with_capacity(self.size - 1);
        let mut pending: Vec<usize> = units.to_vec();
        while !pending.is_empty() {
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for (slot, &unit) in pending.iter().enumerate() {
                let (cost, a, b) = match self.kind[unit] {
                    NodeKind::Pickup { dropoff } => self.best_pair_insertion(&route, unit, dropoff),
                    _ => self.best_single_insertion(&route, unit),
                };
                if best.is_none_or(|(c, ..)| cost < c) {
                    best = Some((cost, slot, a, b));
                }
            }
            let (_, slot, a, b) = best.expect("pending is non-empty");
            let unit = pending.remove(slot);
            match self.kind[unit] {
                NodeKind::Pickup { dropoff } => {
                    route.insert(b, dropoff);
                    route.insert(a, unit);
                }
                _ => route.insert(a, unit),
            }
        }
        route
    }

    /// Edge `e` joins route position `e - 1` to `e`, with the depot at both
    /// ends; inserting into edge `e` means `route.insert(e, node)`.
    fn edge_ends(&self, route: &[usize], edge: usize) -> (usize, usize) {
        let u = if edge == 0 { 0 } else { route[edge - 1] };
        let v = route.get(edge).copied().unwrap_or(0);
        (u, v)
    }

    fn insertion_delta(&self, route: &[usize], edge: usize, node: usize) -> f64 {
        let (u, v) = self.edge_ends(route, edge);
        self.d(u, node) + self.d(node, v) - self.d(u, v)
    }

    fn best_single_insertion(&self, route: &[usize], node: usize) -> (f64, usize, usize) {
        (0..=route.len())
            .map(|e| (self.insertion_delta(route, e, node), e, e))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one edge")
    }

    /// Cheapest insertion of a pickup into edge `a` and its drop-off into
    /// edge `b >= a`, in linear time via a running minimum over `a`.
    fn best_pair_insertion(&self, route: &[usize], pickup: usize, dropoff: usize) -> (f64, usize, usize) {
        let limit = self.capacity.map(i64::from);
        let mut best = (f64::INFINITY, 0, 0);
        let mut load = 0i64;
        let mut running: Option<(f64, usize)> = None;
        for b in 0..=route.len() {
            if b > 0 {
                load += self.kind[route[b - 1]].load_delta();
            }
            if limit.is_some_and(|q| load + 1 > q) {
                running = None;
                continue;
            }
            let drop_delta = self.insertion_delta(route, b, dropoff);
            if let Some((pick_delta, a)) = running {
                if pick_delta + drop_delta < best.0 {
                    best = (pick_delta + drop_delta, a, b);
                }
            }
            let (u, v) = self.edge_ends(route, b);
            let adjacent = self.d(u, pickup) + self.d(pickup, dropoff) + self.d(dropoff, v) - self.d(u, v);
            if adjacent < best.0 {
                best = (adjacent, b, b);
            }
            let pick_delta = self.insertion_delta(route, b, pickup);
            if running.is_none_or(|(p, _)| pick_delta < p) {
                running = Some((pick_delta, b));
            }
        }
        best
    }

    fn positions(&self, route: &[usize]) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &node) in route.iter().enumerate() {
            pos[node] = i;
        }
        pos
    }

    /// Repeats 2-opt and or-opt passes until neither improves the route.
    fn improve(&self, route: &mut Vec<usize>) {
        let mut pos = self.positions(route);
        loop {
            let reversed = self.two_opt_pass(route, &mut pos);
            let moved = self.or_opt_pass(route, &mut pos);
            if !reversed && !moved {
                break;
            }
        }
    }

    fn two_opt_pass(&self, route: &mut [usize], pos: &mut [usize]) -> bool {
        let m = route.len();
        let limit = self.capacity.map(i64::from);
        let mut improved = false;
        let mut load_before = 0i64;
        for i in 0..m {
            let prev = if i == 0 { 0 } else { route[i - 1] };
            // largest reversed-prefix load gain, updated Kadane style
            let mut peak = self.kind[route[i]].load_delta();
            for j in (i + 1)..m {
                let node = route[j];
                if let NodeKind::Dropoff { pickup } = self.kind[node] {
                    if pos[pickup] >= i {
                        break;
                    }
                }
                peak = self.kind[node].load_delta() + peak.max(0);
                if limit.is_some_and(|q| load_before + peak > q) {
                    continue;
                }
                let next = if j + 1 == m { 0 } else { route[j + 1] };
                let gain = self.d(prev, route[i]) + self.d(route[j], next) - self.d(prev, route[j]) - self.d(route[i], next);
                if gain > IMPROVEMENT_EPS {
                    route[i..=j].reverse();
                    for k in i..=j {
                        pos[route[k]] = k;
                    }
                    improved = true;
                    break;
                }
            }
            load_before += self.kind[route[i]].load_delta();
        }
        improved
    }

    fn or_opt_pass(&self, route: &mut Vec<usize>, pos: &mut Vec<usize>) -> bool {
        let mut improved = false;
        for len in 1..=3 {
            let mut a = 0;
            while a + len <= route.len() {
                if self.try_relocate(route, pos, a, len) {
                    improved = true;
                }
                a += 1;
            }
        }
        improved
    }

    /// Moves `route[a..a + len]` to the best improving edge, if any.
    fn try_relocate(&self, route: &mut Vec<usize>, pos: &mut Vec<usize>, a: usize, len: usize) -> bool {
        let m = route.len();
        let end = a + len - 1;
        let (first, last) = (route[a], route[end]);
        let prev = if a == 0 { 0 } else { route[a - 1] };
        let next = if end + 1 == m { 0 } else { route[end + 1] };
        let removal = self.d(prev, first) + self.d(last, next) - self.d(prev, next);
        if removal <= IMPROVEMENT_EPS {
            return false;
        }
        // Earliest edge the segment may move back to and latest edge it may
        // move forward to without breaking precedence.
        let mut lowest_back = 0usize;
        let mut highest_forward = m;
        for &node in &route[a..=end] {
            match self.kind[node] {
                NodeKind::Dropoff { pickup } if pos[pickup] < a => lowest_back = lowest_back.max(pos[pickup] + 1),
                NodeKind::Pickup { dropoff } if pos[dropoff] > end => highest_forward = highest_forward.min(pos[dropoff]),
                _ => {}
            }
        }
        // Edge e sits between route[e - 1] and route[e]; e in [a, end + 1]
        // touches the segment itself.
        let candidates = (lowest_back..a).chain((end + 2)..=highest_forward);
        for edge in candidates {
            let (u, v) = self.edge_ends(route, edge);
            let added = self.d(u, first) + self.d(last, v) - self.d(u, v);
            if removal - added > IMPROVEMENT_EPS {
                let mut moved: Vec<usize> = Vec::with_capacity(m);
                let segment = &route[a..=end];
                if edge < a {
                    moved.extend_from_slice(&route[..edge]);
                    moved.extend_from_slice(segment);
                    moved.extend_from_slice(&route[edge..a]);
                    moved.extend_from_slice(&route[end + 1..]);
                } else {
                    moved.extend_from_slice(&route[..a]);
                    moved.extend_from_slice(&route[end + 1..edge]);
                    moved.extend_from_slice(segment);
                    moved.extend_from_slice(&route[edge..]);
                }
                if !self.fits(&moved) {
                    continue;
                }
                *route = moved;
                *pos = self.positions(route);
                return true;
            }
        }
        false
    }
}

/// Tours that serve all pickups in one closed route and all drop-offs in
/// another, both from the depot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedTours {
    /// Order indices in pickup-route sequence.
    pub pickup_sequence: Vec<usize>,
    pub pickup_length: f64,
    pub dropoff_sequence: Vec<usize>,
    pub dropoff_length: f64,
}

impl SeparatedTours {
    pub fn total(&self) -> f64 {
        self.pickup_length + self.dropoff_length
    }
}

fn point_tour(metric: RouteMetric, depot: Point, points: &[Point]) -> (Vec<usize>, f64) {
    let nodes: Vec<(Point, NodeKind)> = points.iter().map(|&p| (p, NodeKind::Free)).collect();
    let router = Router::new(metric, depot, &nodes, None);
    let units: Vec<usize> = (1..=points.len()).collect();
    let mut route = router.construct(&units);
    router.improve(&mut route);
    let length = router.length(&route);
    (route.into_iter().map(|node| node - 1).collect(), length)
}

/// Heuristic single-leg tours over the pickup points and the drop-off points.
pub fn separated_tours(inst: &RouteInstance) -> SeparatedTours {
    let pickups: Vec<Point> = inst.orders.iter().map(|o| o.pickup).collect();
    let dropoffs: Vec<Point> = inst.orders.iter().map(|o| o.dropoff).collect();
    let (pickup_sequence, pickup_length) = point_tour(inst.metric, inst.depot, &pickups);
    let (dropoff_sequence, dropoff_length) = point_tour(inst.metric, inst.depot, &dropoffs);
    SeparatedTours {
        pickup_sequence,
        pickup_length,
        dropoff_sequence,
        dropoff_length,
    }
}

/// Heuristic integrated tour. See [`solve_heuristic_with`].
pub fn solve_heuristic(inst: &RouteInstance) -> TourSolution {
    let separated = inst.capacity.is_none().then(|| separated_tours(inst));
    solve_heuristic_with(inst, separated.as_ref())
}

/// Cheapest insertion improved by 2-opt and or-opt. When separated tours
/// are supplied (unbounded capacity only), their concatenation is improved
/// as a second start and the shorter result is returned, so the integrated
/// tour never exceeds the separated total.
pub fn solve_heuristic_with(inst: &RouteInstance, separated: Option<&SeparatedTours>) -> TourSolution {
    let n = inst.orders.len();
    if n == 0 {
        return TourSolution { visits: Vec::new(), length: 0.0, exact: false };
    }
    // node 2i + 1 picks up order i, node 2i + 2 drops it off
    let nodes: Vec<(Point, NodeKind)> = inst
        .orders
        .iter()
        .enumerate()
        .flat_map(|(i, o)| {
            [
                (o.pickup, NodeKind::Pickup { dropoff: 2 * i + 2 }),
                (o.dropoff, NodeKind::Dropoff { pickup: 2 * i + 1 }),
            ]
        })
        .collect();
    let router = Router::new(inst.metric, inst.depot, &nodes, inst.capacity);

    let units: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
    let mut best = router.construct(&units);
    router.improve(&mut best);
    let mut best_length = router.length(&best);

    if let (Some(sep), None) = (separated, inst.capacity) {
        let mut chained: Vec<usize> = sep
            .pickup_sequence
            .iter()
            .map(|&i| 2 * i + 1)
            .chain(sep.dropoff_sequence.iter().map(|&i| 2 * i + 2))
            .collect();
        router.improve(&mut chained);
        let length = router.length(&chained);
        if length < best_length {
            best = chained;
            best_length = length;
        }
    }

    let visits = best
        .into_iter()
        .map(|node| {
            let order = (node - 1) / 2;
            if node % 2 == 1 { Stop::Pickup(order) } else { Stop::Dropoff(order) }
        })
        .collect();
    TourSolution { visits, length: best_length, exact: false }
}

/// Per-trial seed derived from the master seed and trial index only, so
/// results do not depend on evaluation order.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Drop-off-only tour.
    pub single_leg: f64,
    pub pickup_leg: f64,
    pub integrated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub n_orders: usize,
    pub area: f64,
    pub metric: RouteMetric,
    pub master_seed: u64,
    /// Mean single-leg length over `√(n·A)`.
    pub k_hat: f64,
    /// Mean ratio of integrated to separated length.
    pub kplus_hat: f64,
    /// Fraction of integrated tours within `RHO_BUFFER` times their mean.
    pub rho_quantile: f64,
    pub mean_single_leg: f64,
    pub mean_integrated: f64,
    pub trials: Vec<TrialRecord>,
}

pub fn estimate_constants(
    n_orders: usize,
    area: f64,
    metric: RouteMetric,
    trials: usize,
    master_seed: u64,
) -> Result<ConstantEstimate> {
    ensure_positive("area", area)?;
    if trials < MIN_TRIALS {
        return Err(Error::invalid("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
    }
    if n_orders < MIN_ESTIMATE_ORDERS {
        return Err(Error::invalid(
            "n_orders",
            format!("need at least {MIN_ESTIMATE_ORDERS}, got {n_orders}"),
        ));
    }

    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, trial as u64);
            let inst = gen_instance(n_orders, area, metric, None, seed)?;
            let separated = separated_tours(&inst);
            let tour = solve_heuristic_with(&inst, Some(&separated));
            Ok(TrialRecord {
                trial,
                seed,
                single_leg: separated.dropoff_length,
                pickup_leg: separated.pickup_length,
                integrated: tour.length,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let count = records.len() as f64;
    let mean = |f: fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / count;
    let mean_single_leg = mean(|r| r.single_leg);
    let mean_integrated = mean(|r| r.integrated);
    let kplus_hat = mean(|r| r.integrated / (r.single_leg + r.pickup_leg));
    let covered = records
        .iter()
        .filter(|r| r.integrated <= RHO_BUFFER * mean_integrated)
        .count();

    Ok(ConstantEstimate {
        n_orders,
        area,
        metric,
        master_seed,
        k_hat: mean_single_leg / (n_orders as f64 * area).sqrt(),
        kplus_hat,
        rho_quantile: covered as f64 / count,
        mean_single_leg,
        mean_integrated,
        trials: records,
    })
}
