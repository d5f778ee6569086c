//! Per-slot link scheduling: carrier sensing with exponential backoff (CS),
//! a centralized collision-free greedy benchmark (Cen), and an exhaustive
//! optimal-capacity oracle for small instances.
//!
//! Both schedulers enforce half-duplex single-radio operation: a node takes
//! part in at most one transmission per slot. All decisions are resolved at
//! the beginning of the slot.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::phy::{self, PhysicalParams, Power};
use crate::routing::min_hop_route;
use crate::topology::{connectivity, ConnectivityGraph, FlowSpec, Network};

/// A directed link between two node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub tx: usize,
    pub rx: usize,
}

impl Link {
    pub fn new(tx: usize, rx: usize) -> Self {
        Link { tx, rx }
    }
}

/// What happened to the candidate links of one slot. `attempted` is the
/// disjoint union of `succeeded` and `collided`; `deferred` links sensed a
/// busy channel, waited out backoff, or were blocked by a busy node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub attempted: Vec<Link>,
    pub succeeded: Vec<Link>,
    pub collided: Vec<Link>,
    pub deferred: Vec<Link>,
}

/// Contention parameters of the CS scheduler. Backoff is counted in slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacConfig {
    pub cw_min: u32,
    pub cw_max: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig { cw_min: 16, cw_max: 1024 }
    }
}

/// Per-link contention state: current window and pending backoff slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffState {
    pub cw: u32,
    pub backoff: u32,
}

impl BackoffState {
    pub fn fresh(mac: &MacConfig) -> Self {
        BackoffState { cw: mac.cw_min, backoff: 0 }
    }
}

/// Precomputed received power between every ordered node pair at a common
/// transmit power, so the slot loop never re-evaluates the decay law.
#[derive(Debug, Clone)]
pub struct PowerMap {
    n: usize,
    vals: Vec<f64>,
}

impl PowerMap {
    pub fn build(net: &Network, p_t: Power, params: &PhysicalParams) -> Self {
        let n = net.nodes.len();
        let mut vals = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = net.nodes[i].dist(net.nodes[j]);
                    vals[i * n + j] = p_t.linear() / d.powf(params.alpha);
                }
            }
        }
        PowerMap { n, vals }
    }

    /// Received power at node `rx` from a transmitter at node `tx`.
    #[inline]
    pub fn at(&self, tx: usize, rx: usize) -> f64 {
        self.vals[tx * self.n + rx]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// Immutable inputs of one scheduling slot. `ready` indexes into `links`
/// and holds exactly the links with positive backlog.
pub struct SlotInput<'a> {
    pub links: &'a [Link],
    pub ready: &'a [usize],
    pub backlog: &'a [u64],
    pub power: &'a PowerMap,
    pub params: &'a PhysicalParams,
}

fn sensed_at(inp: &SlotInput, admitted: &[usize], tx: usize) -> f64 {
    inp.params.n0
        + admitted
            .iter()
            .map(|&ai| inp.power.at(inp.links[ai].tx, tx))
            .sum::<f64>()
}

fn links_of(inp: &SlotInput, idxs: &[usize]) -> Vec<Link> {
    let mut v: Vec<Link> = idxs.iter().map(|&i| inp.links[i]).collect();
    v.sort_unstable();
    v
}

/// Carrier sensing with exponential backoff. Candidates are visited in a
/// per-slot uniformly random order; a link starts transmitting iff its
/// endpoints are free, the noise it senses from already-admitted
/// transmitters is at most `H_s`, and its backoff expired. Reception of
/// each transmission is then judged against all simultaneous transmitters.
/// Collided links double their window (capped) and draw a fresh backoff;
/// successful links reset; deferred links count their backoff down only
/// when their channel is sensed idle.
pub fn cs_schedule_slot(
    inp: &SlotInput,
    state: &mut [BackoffState],
    mac: &MacConfig,
    rng: &mut impl Rng,
) -> SlotOutcome {
    let mut order = inp.ready.to_vec();
    order.shuffle(rng);

    let mut node_busy = vec![false; inp.power.node_count()];
    let mut admitted: Vec<usize> = Vec::new();
    let mut deferred: Vec<usize> = Vec::new();

    for &li in &order {
        let l = inp.links[li];
        if node_busy[l.tx] || node_busy[l.rx] {
            deferred.push(li);
            continue;
        }
        if sensed_at(inp, &admitted, l.tx) > inp.params.h_s || state[li].backoff > 0 {
            deferred.push(li);
            continue;
        }
        node_busy[l.tx] = true;
        node_busy[l.rx] = true;
        admitted.push(li);
    }

    let mut succeeded: Vec<usize> = Vec::new();
    let mut collided: Vec<usize> = Vec::new();
    for &li in &admitted {
        let l = inp.links[li];
        let p_r = inp.power.at(l.tx, l.rx);
        let noise = inp.params.n0
            + admitted
                .iter()
                .filter(|&&o| o != li)
                .map(|&o| inp.power.at(inp.links[o].tx, l.rx))
                .sum::<f64>();
        let sinr = if noise == 0.0 { f64::INFINITY } else { p_r / noise };
        if phy::reception_ok(Power::from_linear(p_r), sinr, inp.params) {
            succeeded.push(li);
        } else {
            collided.push(li);
        }
    }

    for &li in &succeeded {
        state[li] = BackoffState::fresh(mac);
    }
    for &li in &collided {
        let st = &mut state[li];
        st.cw = (st.cw.saturating_mul(2)).min(mac.cw_max);
        st.backoff = rng.gen_range(0..st.cw);
    }
    for &li in &deferred {
        if state[li].backoff > 0 && sensed_at(inp, &admitted, inp.links[li].tx) <= inp.params.h_s {
            state[li].backoff -= 1;
        }
    }

    SlotOutcome {
        attempted: links_of(inp, &admitted),
        succeeded: links_of(inp, &succeeded),
        collided: links_of(inp, &collided),
        deferred: links_of(inp, &deferred),
    }
}

/// Centralized collision-free greedy scheduling: ready links are visited in
/// descending-backlog order (ties by link id) and admitted when doing so
/// keeps every already-admitted link and the candidate itself decodable.
/// Admitted links always succeed, and the admitted set is maximal: no
/// deferred ready link could be added without breaking feasibility.
pub fn cen_schedule_slot(inp: &SlotInput) -> SlotOutcome {
    let mut order = inp.ready.to_vec();
    order.sort_by(|&a, &b| {
        inp.backlog[b]
            .cmp(&inp.backlog[a])
            .then(inp.links[a].cmp(&inp.links[b]))
    });

    let mut node_busy = vec![false; inp.power.node_count()];
    let mut admitted: Vec<usize> = Vec::new();
    // Interference-plus-noise currently seen at each admitted receiver.
    let mut noise_at: Vec<f64> = Vec::new();
    let mut deferred: Vec<usize> = Vec::new();

    'candidates: for &ci in &order {
        let c = inp.links[ci];
        if node_busy[c.tx] || node_busy[c.rx] {
            deferred.push(ci);
            continue;
        }
        let p_r_c = inp.power.at(c.tx, c.rx);
        let noise_c = inp.params.n0
            + admitted
                .iter()
                .map(|&ai| inp.power.at(inp.links[ai].tx, c.rx))
                .sum::<f64>();
        let sinr_c = if noise_c == 0.0 { f64::INFINITY } else { p_r_c / noise_c };
        if !phy::reception_ok(Power::from_linear(p_r_c), sinr_c, inp.params) {
            deferred.push(ci);
            continue;
        }
        for (k, &ai) in admitted.iter().enumerate() {
            let a = inp.links[ai];
            let p_r_a = inp.power.at(a.tx, a.rx);
            if p_r_a / (noise_at[k] + inp.power.at(c.tx, a.rx)) < inp.params.beta {
                deferred.push(ci);
                continue 'candidates;
            }
        }
        for (k, &ai) in admitted.iter().enumerate() {
            noise_at[k] += inp.power.at(c.tx, inp.links[ai].rx);
        }
        noise_at.push(noise_c);
        node_busy[c.tx] = true;
        node_busy[c.rx] = true;
        admitted.push(ci);
    }

    SlotOutcome {
        attempted: links_of(inp, &admitted),
        succeeded: links_of(inp, &admitted),
        collided: Vec::new(),
        deferred: links_of(inp, &deferred),
    }
}

/// True when no node appears in more than one link of the set.
pub fn half_duplex_consistent(links: &[Link]) -> bool {
    let mut seen = BTreeSet::new();
    for l in links {
        if !seen.insert(l.tx) || !seen.insert(l.rx) {
            return false;
        }
    }
    true
}

/// True iff every link of the set is decodable under the mutual
/// interference of all the others at the common power `p_t`.
pub fn feasible_at_power(net: &Network, links: &[Link], p_t: Power, params: &PhysicalParams) -> bool {
    let pm = PowerMap::build(net, p_t, params);
    set_feasible(&pm, params, links)
}

fn set_feasible(pm: &PowerMap, params: &PhysicalParams, links: &[Link]) -> bool {
    for (i, e) in links.iter().enumerate() {
        let p_r = pm.at(e.tx, e.rx);
        if p_r < params.h_r {
            return false;
        }
        let noise = params.n0
            + links
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| pm.at(o.tx, e.rx))
                .sum::<f64>();
        if noise > 0.0 && p_r / noise < params.beta {
            return false;
        }
    }
    true
}

/// Knobs of the exhaustive search in [`optimal_capacity`].
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Refuse instances with more nodes than this.
    pub max_nodes: usize,
    /// Refuse instances whose pruned directed-link universe is larger.
    pub max_links: usize,
    /// Candidate routes may exceed the minimum hop count by this much.
    /// Larger values refine the search (it is exact in the limit) at
    /// combinatorial cost.
    pub extra_hops: u32,
    /// Refuse instances with more route combinations than this.
    pub max_route_combos: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_nodes: 12,
            max_links: 20,
            extra_hops: 1,
            max_route_combos: 50_000,
        }
    }
}

/// All simple paths from `src` to `dst` with at most `bound` hops, as
/// directed link sequences, in lexicographic node order.
fn enumerate_routes(graph: &ConnectivityGraph, src: usize, dst: usize, bound: u32) -> Vec<Vec<Link>> {
    // Distance to dst prunes prefixes that cannot finish within the bound.
    let mut dist_to_dst = vec![u32::MAX; graph.node_count()];
    {
        let mut queue = std::collections::VecDeque::new();
        dist_to_dst[dst] = 0;
        queue.push_back(dst);
        while let Some(u) = queue.pop_front() {
            for &v in graph.neighbors(u) {
                if dist_to_dst[v] == u32::MAX {
                    dist_to_dst[v] = dist_to_dst[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut path = vec![src];
    let mut on_path = vec![false; graph.node_count()];
    on_path[src] = true;
    fn dfs(
        graph: &ConnectivityGraph,
        dst: usize,
        bound: u32,
        dist_to_dst: &[u32],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<Link>>,
    ) {
        let u = *path.last().unwrap();
        if u == dst {
            out.push(path.windows(2).map(|w| Link::new(w[0], w[1])).collect());
            return;
        }
        let used = (path.len() - 1) as u32;
        for &v in graph.neighbors(u) {
            if on_path[v] || dist_to_dst[v] == u32::MAX {
                continue;
            }
            if used + 1 + dist_to_dst[v] > bound {
                continue;
            }
            on_path[v] = true;
            path.push(v);
            dfs(graph, dst, bound, dist_to_dst, path, on_path, out);
            path.pop();
            on_path[v] = false;
        }
    }
    dfs(graph, dst, bound, &dist_to_dst, &mut path, &mut on_path, &mut out);
    out
}

/// Enumerates every maximal SINR-feasible, half-duplex-consistent subset of
/// `universe` exactly once.
fn maximal_feasible_sets(pm: &PowerMap, params: &PhysicalParams, universe: &[Link]) -> Vec<Vec<usize>> {
    struct Search<'a> {
        pm: &'a PowerMap,
        params: &'a PhysicalParams,
        universe: &'a [Link],
        node_used: Vec<bool>,
        current: Vec<usize>,
        noise_at: Vec<f64>,
        out: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        /// Can `j` be added to the current set without breaking anything?
        fn addable(&self, j: usize) -> bool {
            let c = self.universe[j];
            if self.node_used[c.tx] || self.node_used[c.rx] {
                return false;
            }
            let p_r_c = self.pm.at(c.tx, c.rx);
            if p_r_c < self.params.h_r {
                return false;
            }
            let noise_c = self.params.n0
                + self
                    .current
                    .iter()
                    .map(|&ai| self.pm.at(self.universe[ai].tx, c.rx))
                    .sum::<f64>();
            if noise_c > 0.0 && p_r_c / noise_c < self.params.beta {
                return false;
            }
            for (k, &ai) in self.current.iter().enumerate() {
                let a = self.universe[ai];
                let p_r_a = self.pm.at(a.tx, a.rx);
                if p_r_a / (self.noise_at[k] + self.pm.at(c.tx, a.rx)) < self.params.beta {
                    return false;
                }
            }
            true
        }

        fn push(&mut self, j: usize) {
            let c = self.universe[j];
            let noise_c = self.params.n0
                + self
                    .current
                    .iter()
                    .map(|&ai| self.pm.at(self.universe[ai].tx, c.rx))
                    .sum::<f64>();
            for (k, &ai) in self.current.iter().enumerate() {
                self.noise_at[k] += self.pm.at(c.tx, self.universe[ai].rx);
            }
            self.noise_at.push(noise_c);
            self.node_used[c.tx] = true;
            self.node_used[c.rx] = true;
            self.current.push(j);
        }

        fn pop(&mut self) {
            let j = self.current.pop().unwrap();
            let c = self.universe[j];
            self.noise_at.pop();
            for (k, &ai) in self.current.iter().enumerate() {
                self.noise_at[k] -= self.pm.at(c.tx, self.universe[ai].rx);
            }
            self.node_used[c.tx] = false;
            self.node_used[c.rx] = false;
        }

        fn recurse(&mut self, start: usize) {
            if (0..self.universe.len()).all(|l| self.current.contains(&l) || !self.addable(l)) {
                let mut set = self.current.clone();
                set.sort_unstable();
                self.out.push(set);
            }
            for j in start..self.universe.len() {
                if self.addable(j) {
                    self.push(j);
                    self.recurse(j + 1);
                    self.pop();
                }
            }
        }
    }

    let mut search = Search {
        pm,
        params,
        universe,
        node_used: vec![false; pm.node_count()],
        current: Vec::new(),
        noise_at: Vec::new(),
        out: Vec::new(),
    };
    search.recurse(0);
    search.out
}

/// Optimal network capacity of a small instance, in units of `W`: the
/// maximum pattern scaling supported by time-sharing over SINR-feasible
/// simultaneous link sets, searched over per-flow candidate routes of
/// minimal and near-minimal hop count.
pub fn optimal_capacity(
    net: &Network,
    flows: &[FlowSpec],
    p_t: Power,
    params: &PhysicalParams,
    opts: &OracleOptions,
) -> Result<f64> {
    if net.nodes.len() > opts.max_nodes {
        return Err(Error::InstanceTooLarge {
            detail: format!("{} nodes > {}", net.nodes.len(), opts.max_nodes),
        });
    }
    if flows.is_empty() {
        return Err(Error::InvalidParams("no flows".into()));
    }
    for f in flows {
        if f.src == f.dst {
            return Err(Error::InvalidParams(format!("flow {}->{} is degenerate", f.src, f.dst)));
        }
        if !(f.weight > 0.0) {
            return Err(Error::InvalidParams("flow weights must be positive".into()));
        }
    }
    let norm = flows.iter().map(|f| f.weight * f.weight).sum::<f64>().sqrt();
    let weights: Vec<f64> = flows.iter().map(|f| f.weight / norm).collect();

    let r = phy::transmission_range(p_t, params);
    let graph = connectivity(net, r);

    let mut route_sets: Vec<Vec<Vec<Link>>> = Vec::with_capacity(flows.len());
    for f in flows {
        let min_hops = min_hop_route(net, &graph, f.src, f.dst)?.hops() as u32;
        let routes = enumerate_routes(&graph, f.src, f.dst, min_hops + opts.extra_hops);
        debug_assert!(!routes.is_empty());
        route_sets.push(routes);
    }

    let mut universe: BTreeSet<Link> = BTreeSet::new();
    for routes in &route_sets {
        for route in routes {
            universe.extend(route.iter().copied());
        }
    }
    let universe: Vec<Link> = universe.into_iter().collect();
    if universe.len() > opts.max_links {
        return Err(Error::InstanceTooLarge {
            detail: format!("{} candidate links > {}", universe.len(), opts.max_links),
        });
    }
    let link_index = |l: &Link| universe.binary_search(l).expect("link in universe");

    let combos: usize = route_sets.iter().map(Vec::len).product();
    if combos > opts.max_route_combos {
        return Err(Error::InstanceTooLarge {
            detail: format!("{combos} route combinations > {}", opts.max_route_combos),
        });
    }

    let pm = PowerMap::build(net, p_t, params);
    let sets = maximal_feasible_sets(&pm, params, &universe);
    debug_assert!(!sets.is_empty());

    let weight_sum: f64 = weights.iter().sum();
    let mut best = 0.0f64;
    let mut choice = vec![0usize; flows.len()];
    loop {
        let mut load = vec![0.0f64; universe.len()];
        for (fi, routes) in route_sets.iter().enumerate() {
            for link in &routes[choice[fi]] {
                load[link_index(link)] += weights[fi];
            }
        }
        let loaded: Vec<usize> = (0..universe.len()).filter(|&e| load[e] > 0.0).collect();
        // Dual of the fractional covering problem: one packing variable per
        // loaded link, one constraint per feasible set.
        let objective: Vec<f64> = loaded.iter().map(|&e| load[e]).collect();
        let mut rows: BTreeSet<Vec<usize>> = BTreeSet::new();
        for set in &sets {
            let row: Vec<usize> = loaded
                .iter()
                .enumerate()
                .filter(|&(_, &e)| set.contains(&e))
                .map(|(col, _)| col)
                .collect();
            if !row.is_empty() {
                rows.insert(row);
            }
        }
        let a: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; loaded.len()];
                for &col in row {
                    dense[col] = 1.0;
                }
                dense
            })
            .collect();
        let b = vec![1.0; a.len()];
        match lp::maximize(&objective, &a, &b) {
            lp::LpOutcome::Optimal(v) if v > 0.0 => {
                let capacity = weight_sum / v * params.w;
                if capacity > best {
                    best = capacity;
                }
            }
            // An unbounded packing dual means some loaded link belongs to
            // no feasible set, which cannot happen for graph links.
            lp::LpOutcome::Unbounded | lp::LpOutcome::Optimal(_) => {
                return Err(Error::InvalidParams(
                    "degenerate time-sharing program".into(),
                ));
            }
        }

        // Next route combination (mixed-radix increment).
        let mut pos = 0;
        loop {
            if pos == flows.len() {
                return Ok(best);
            }
            choice[pos] += 1;
            if choice[pos] < route_sets[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
