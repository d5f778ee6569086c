//! The simulation engine: drives the slot loop until every flow drains its
//! workload, then reports capacity (delivered packets per slot in units of
//! `W`), spatial reuse, hop statistics and collision rate.
//!
//! Packets are conserved: collided transmissions are retried, never
//! dropped, and a relay only forwards packets it has already received.
//! Sources are saturating: a flow's entire workload is queued at its first
//! hop from slot one. A run is strictly sequential and deterministic for a
//! fixed configuration; sweeps parallelize across independent runs.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::{self, BackoffState, Link, MacConfig, PowerMap, SlotInput, SlotOutcome};
use crate::phy::{self, PhysicalParams};
use crate::routing::min_hop_route;
use crate::topology::{connectivity, FlowSpec, Network};

/// Which per-slot scheduler drives transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheduler {
    /// Carrier sensing with exponential backoff.
    Cs,
    /// Centralized collision-free greedy benchmark.
    Cen,
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheduler::Cs => "cs",
            Scheduler::Cen => "cen",
        })
    }
}

impl std::str::FromStr for Scheduler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cs" => Ok(Scheduler::Cs),
            "cen" => Ok(Scheduler::Cen),
            other => Err(Error::InvalidParams(format!("unknown scheduler '{other}'"))),
        }
    }
}

/// Route selection policy. Minimum hop count is the only one implemented;
/// the enum keeps result schemas explicit about it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    #[default]
    Hop,
}

impl fmt::Display for Routing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("hop")
    }
}

impl std::str::FromStr for Routing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hop" => Ok(Routing::Hop),
            other => Err(Error::InvalidParams(format!("unknown routing '{other}'"))),
        }
    }
}

/// Configuration of a single simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scheduler: Scheduler,
    pub routing: Routing,
    /// Target transmission range in meters; the common transmit power is
    /// derived from it.
    pub range: f64,
    pub params: PhysicalParams,
    pub mac: MacConfig,
    pub seed: u64,
    /// Slot budget before the run is declared stuck. Defaults to
    /// `200 * total workload`.
    pub max_slots: Option<u64>,
}

/// Results of a drained (or timed-out) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Slots needed to deliver every workload end to end.
    pub slots: u64,
    /// Delivered packets per slot in units of the channel rate `W`.
    pub capacity_w: f64,
    pub delivered: u64,
    /// Slot at which each flow finished (0 when unfinished).
    pub per_flow_completion: Vec<u64>,
    /// Mean successful transmissions per slot, over slots with any attempt.
    pub spatial_reuse: f64,
    /// Mean route length over flows.
    pub avg_hops: f64,
    /// Collided fraction of attempted transmissions.
    pub collision_rate: f64,
    pub attempts: u64,
    pub successes: u64,
    pub collisions: u64,
}

/// Runs the slot loop without tracing.
pub fn run(net: &Network, flows: &[FlowSpec], cfg: &SimConfig) -> Result<CapacityReport> {
    run_traced(net, flows, cfg, &mut |_, _| {})
}

/// Runs the slot loop, handing every slot outcome to `sink`.
pub fn run_traced(
    net: &Network,
    flows: &[FlowSpec],
    cfg: &SimConfig,
    sink: &mut dyn FnMut(u64, &SlotOutcome),
) -> Result<CapacityReport> {
    if flows.is_empty() {
        return Err(Error::InvalidParams("no flows to simulate".into()));
    }
    for f in flows {
        if f.src == f.dst || f.src >= net.nodes.len() || f.dst >= net.nodes.len() {
            return Err(Error::InvalidParams(format!("bad flow {} -> {}", f.src, f.dst)));
        }
        if f.workload == 0 {
            return Err(Error::InvalidParams("workloads must be positive".into()));
        }
    }

    let p_t = phy::power_for_range(cfg.range, &cfg.params)?;
    let graph = connectivity(net, cfg.range);
    let routes: Vec<_> = flows
        .iter()
        .map(|f| min_hop_route(net, &graph, f.src, f.dst))
        .collect::<Result<_>>()?;

    // Global directed-link table in sorted order.
    let mut all_links: Vec<Link> = routes
        .iter()
        .flat_map(|r| r.nodes.windows(2).map(|w| Link::new(w[0], w[1])))
        .collect();
    all_links.sort_unstable();
    all_links.dedup();
    let link_idx = |l: Link| all_links.binary_search(&l).expect("link in table");

    // Per flow: link indices along the route and the successor of each.
    let flow_links: Vec<Vec<usize>> = routes
        .iter()
        .map(|r| r.nodes.windows(2).map(|w| link_idx(Link::new(w[0], w[1]))).collect())
        .collect();
    let next_on_route: Vec<HashMap<usize, Option<usize>>> = flow_links
        .iter()
        .map(|links| {
            links
                .iter()
                .enumerate()
                .map(|(pos, &l)| (l, links.get(pos + 1).copied()))
                .collect()
        })
        .collect();

    // Saturating sources: the whole workload starts queued at hop one.
    let mut queues: Vec<VecDeque<u32>> = vec![VecDeque::new(); all_links.len()];
    for (fi, f) in flows.iter().enumerate() {
        for _ in 0..f.workload {
            queues[flow_links[fi][0]].push_back(fi as u32);
        }
    }
    let mut backlog: Vec<u64> = queues.iter().map(|q| q.len() as u64).collect();

    let power = PowerMap::build(net, p_t, &cfg.params);
    let mut states = vec![BackoffState::fresh(&cfg.mac); all_links.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);

    let total_workload: u64 = flows.iter().map(|f| f.workload).sum();
    let max_slots = cfg.max_slots.unwrap_or(200 * total_workload);

    let mut delivered_per_flow = vec![0u64; flows.len()];
    let mut completion = vec![0u64; flows.len()];
    let mut delivered: u64 = 0;
    let mut slot: u64 = 0;
    let mut attempts: u64 = 0;
    let mut successes: u64 = 0;
    let mut collisions: u64 = 0;
    let mut active_slots: u64 = 0;

    let mut ready: Vec<usize> = Vec::with_capacity(all_links.len());
    while delivered < total_workload {
        if slot >= max_slots {
            let report = finish(
                slot, delivered, &completion, attempts, successes, collisions, active_slots,
                &routes, total_workload, &cfg.params,
            );
            return Err(Error::Timeout { max_slots, partial: Box::new(report) });
        }
        slot += 1;

        ready.clear();
        ready.extend((0..all_links.len()).filter(|&i| backlog[i] > 0));
        let inp = SlotInput {
            links: &all_links,
            ready: &ready,
            backlog: &backlog,
            power: &power,
            params: &cfg.params,
        };
        let outcome = match cfg.scheduler {
            Scheduler::Cs => mac::cs_schedule_slot(&inp, &mut states, &cfg.mac, &mut rng),
            Scheduler::Cen => mac::cen_schedule_slot(&inp),
        };

        attempts += outcome.attempted.len() as u64;
        successes += outcome.succeeded.len() as u64;
        collisions += outcome.collided.len() as u64;
        if !outcome.attempted.is_empty() {
            active_slots += 1;
        }

        for &link in &outcome.succeeded {
            let li = link_idx(link);
            let fi = queues[li].pop_front().expect("succeeded link has backlog") as usize;
            backlog[li] -= 1;
            match next_on_route[fi][&li] {
                Some(next) => {
                    queues[next].push_back(fi as u32);
                    backlog[next] += 1;
                }
                None => {
                    delivered_per_flow[fi] += 1;
                    delivered += 1;
                    if delivered_per_flow[fi] == flows[fi].workload {
                        completion[fi] = slot;
                    }
                }
            }
        }
        sink(slot, &outcome);
    }

    for (fi, f) in flows.iter().enumerate() {
        debug_assert_eq!(delivered_per_flow[fi], f.workload, "packet conservation");
    }
    debug_assert!(queues.iter().all(VecDeque::is_empty));

    Ok(finish(
        slot, delivered, &completion, attempts, successes, collisions, active_slots,
        &routes, total_workload, &cfg.params,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    slots: u64,
    delivered: u64,
    completion: &[u64],
    attempts: u64,
    successes: u64,
    collisions: u64,
    active_slots: u64,
    routes: &[crate::routing::Route],
    _total_workload: u64,
    params: &PhysicalParams,
) -> CapacityReport {
    let capacity_w = if slots == 0 {
        0.0
    } else {
        delivered as f64 / slots as f64 / params.w
    };
    CapacityReport {
        slots,
        capacity_w,
        delivered,
        per_flow_completion: completion.to_vec(),
        spatial_reuse: if active_slots == 0 {
            0.0
        } else {
            successes as f64 / active_slots as f64
        },
        avg_hops: routes.iter().map(|r| r.hops() as f64).sum::<f64>() / routes.len() as f64,
        collision_rate: if attempts == 0 {
            0.0
        } else {
            collisions as f64 / attempts as f64
        },
        attempts,
        successes,
        collisions,
    }
}

/// Capacity gain `c_high / c_low` of raising the power.
pub fn gain(c_high: f64, c_low: f64) -> Result<f64> {
    if !(c_low > 0.0) {
        return Err(Error::UndefinedGain);
    }
    Ok(c_high / c_low)
}

/// One sweep result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheduler: Scheduler,
    pub routing: Routing,
    pub r: f64,
    pub seed: u64,
    pub rep: u64,
    pub report: CapacityReport,
}

/// Runs the full `scheduler x range x repetition` grid. One topology (and
/// flow set) is resolved per repetition from `generate(seed)`, retrying
/// with strided seeds until the network is connected at the smallest ladder
/// range; the same topology is then reused across the whole ladder and all
/// schedulers, and runs execute in parallel. Rows come back in
/// deterministic `(scheduler, range, repetition)` order.
pub fn sweep<F>(
    generate: F,
    reps: u64,
    base_seed: u64,
    ladder: &[f64],
    schedulers: &[Scheduler],
    params: &PhysicalParams,
    mac: MacConfig,
    max_slots: Option<u64>,
    retry_cap: u64,
) -> Result<Vec<SweepRow>>
where
    F: Fn(u64) -> Result<(Network, Vec<FlowSpec>)>,
{
    if ladder.is_empty() {
        return Err(Error::InvalidParams("empty range ladder".into()));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("range ladder must be ascending".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidParams("repetitions must be at least 1".into()));
    }
    let min_r = ladder[0];

    let mut topologies: Vec<(u64, Arc<(Network, Vec<FlowSpec>)>)> = Vec::new();
    for rep in 0..reps {
        let mut chosen = None;
        for retry in 0..=retry_cap {
            let seed = base_seed + rep + retry * reps;
            let (net, flows) = generate(seed)?;
            if connectivity(&net, min_r).is_connected() {
                chosen = Some((seed, Arc::new((net, flows))));
                break;
            }
        }
        match chosen {
            Some(t) => topologies.push(t),
            None => {
                return Err(Error::ConnectivityRetries {
                    first: base_seed + rep,
                    last: base_seed + rep + retry_cap * reps,
                })
            }
        }
    }

    let mut tasks = Vec::new();
    for (si, &scheduler) in schedulers.iter().enumerate() {
        for (ri, &r) in ladder.iter().enumerate() {
            for rep in 0..reps {
                tasks.push((si, ri, rep, scheduler, r));
            }
        }
    }

    let mut rows: Vec<((usize, usize, u64), SweepRow)> = tasks
        .into_par_iter()
        .map(|(si, ri, rep, scheduler, r)| {
            let (seed, topo) = &topologies[rep as usize];
            let cfg = SimConfig {
                scheduler,
                routing: Routing::Hop,
                range: r,
                params: *params,
                mac,
                seed: *seed,
                max_slots,
            };
            let report = run(&topo.0, &topo.1, &cfg)?;
            Ok((
                (si, ri, rep),
                SweepRow { scheduler, routing: Routing::Hop, r, seed: *seed, rep, report },
            ))
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

/// Mean capacity of the rows matching a scheduler and range.
pub fn mean_capacity(rows: &[SweepRow], scheduler: Scheduler, r: f64) -> f64 {
    let caps: Vec<f64> = rows
        .iter()
        .filter(|row| row.scheduler == scheduler && row.r == r)
        .map(|row| row.report.capacity_w)
        .collect();
    caps.iter().sum::<f64>() / caps.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::topology::Region;

    fn net_from(points: &[(f64, f64)]) -> Network {
        Network {
            nodes: points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            region: Region::Square { side: 10_000.0 },
            seed: None,
        }
    }

    fn cfg(scheduler: Scheduler, range: f64, seed: u64) -> SimConfig {
        SimConfig {
            scheduler,
            routing: Routing::Hop,
            range,
            params: PhysicalParams::default(),
            mac: MacConfig::default(),
            seed,
            max_slots: None,
        }
    }

    #[test]
    fn single_hop_flow_fills_the_channel() {
        let net = net_from(&[(0.0, 0.0), (200.0, 0.0)]);
        let flows = [FlowSpec { src: 0, dst: 1, weight: 1.0, workload: 500 }];
        for scheduler in [Scheduler::Cen, Scheduler::Cs] {
            let report = run(&net, &flows, &cfg(scheduler, 250.0, 1)).unwrap();
            assert_eq!(report.slots, 500, "{scheduler}");
            assert!((report.capacity_w - 1.0).abs() < 1e-12);
            assert_eq!(report.delivered, 500);
            assert_eq!(report.collisions, 0);
            assert_eq!(report.avg_hops, 1.0);
        }
    }

    #[test]
    fn shared_node_example_reaches_two_thirds() {
        // Flows A->C and B->C->D: 1500 transmissions, one per slot.
        let net = net_from(&[(0.0, 0.0), (250.0, 0.0), (500.0, 0.0), (250.0, -250.0)]);
        let flows = [
            FlowSpec { src: 0, dst: 1, weight: 1.0, workload: 500 },
            FlowSpec { src: 3, dst: 2, weight: 1.0, workload: 500 },
        ];
        let report = run(&net, &flows, &cfg(Scheduler::Cen, 250.0, 1)).unwrap();
        assert_eq!(report.slots, 1500);
        assert!((report.capacity_w - 2.0 / 3.0).abs() < 1e-12);
        // Capacity identity: capacity * T = total workload.
        assert!((report.capacity_w * report.slots as f64 - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn two_hop_relay_preserves_causality() {
        let net = net_from(&[(0.0, 0.0), (200.0, 0.0), (400.0, 0.0)]);
        let flows = [FlowSpec { src: 0, dst: 2, weight: 1.0, workload: 100 }];
        let report = run(&net, &flows, &cfg(Scheduler::Cen, 250.0, 9)).unwrap();
        // Both hops share the relay: exactly one transmission per slot.
        assert_eq!(report.slots, 200);
        assert_eq!(report.delivered, 100);
        assert_eq!(report.avg_hops, 2.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let net = crate::topology::gen_uniform(15, 800.0, 5).unwrap();
        let flows: Vec<FlowSpec> = (0..5)
            .map(|i| FlowSpec { src: i, dst: i + 5, weight: 1.0, workload: 50 })
            .collect();
        let a = run(&net, &flows, &cfg(Scheduler::Cs, 400.0, 42)).unwrap();
        let b = run(&net, &flows, &cfg(Scheduler::Cs, 400.0, 42)).unwrap();
        assert_eq!(a, b);
        let c = run(&net, &flows, &cfg(Scheduler::Cs, 400.0, 43)).unwrap();
        assert!(a.slots != c.slots || a.attempts != c.attempts || a == c);
    }

    #[test]
    fn timeout_reports_partial_progress() {
        let net = net_from(&[(0.0, 0.0), (200.0, 0.0)]);
        let flows = [FlowSpec { src: 0, dst: 1, weight: 1.0, workload: 500 }];
        let mut c = cfg(Scheduler::Cen, 250.0, 1);
        c.max_slots = Some(10);
        match run(&net, &flows, &c) {
            Err(Error::Timeout { max_slots: 10, partial }) => {
                assert_eq!(partial.delivered, 10);
                assert_eq!(partial.per_flow_completion, vec![0]);
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_flow_is_an_error() {
        let net = net_from(&[(0.0, 0.0), (10_000.0, 0.0)]);
        let flows = [FlowSpec { src: 0, dst: 1, weight: 1.0, workload: 1 }];
        assert!(matches!(
            run(&net, &flows, &cfg(Scheduler::Cen, 250.0, 1)),
            Err(Error::NoRoute { .. })
        ));
    }

    #[test]
    fn gain_examples() {
        assert!((gain(1.0, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((gain(0.7, 0.7).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(gain(1.0, 0.0), Err(Error::UndefinedGain)));
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let ladder = [300.0, 600.0];
        let schedulers = [Scheduler::Cs, Scheduler::Cen];
        let gen = |seed: u64| {
            let net = crate::topology::gen_uniform(12, 700.0, seed)?;
            let flows = vec![
                FlowSpec { src: 0, dst: 6, weight: 1.0, workload: 30 },
                FlowSpec { src: 1, dst: 7, weight: 1.0, workload: 30 },
            ];
            Ok((net, flows))
        };
        let params = PhysicalParams::default();
        let rows = sweep(gen, 3, 10, &ladder, &schedulers, &params, MacConfig::default(), None, 50)
            .unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        let again = sweep(gen, 3, 10, &ladder, &schedulers, &params, MacConfig::default(), None, 50)
            .unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.report, b.report);
            assert_eq!((a.scheduler, a.r, a.seed), (b.scheduler, b.r, b.seed));
        }
    }
}
