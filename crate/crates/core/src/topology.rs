//! Node placement generators and range-dependent connectivity graphs.
//!
//! Generation is deterministic for a fixed seed. Coincident node pairs are
//! rejected (the power-decay law diverges at zero distance): random
//! generators resample, constructed topologies cannot produce them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Bounding region of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Axis-aligned square `[0, side] x [0, side]`.
    Square { side: f64 },
    /// Disc of the given radius centered at the origin.
    Disc { radius: f64 },
}

impl Region {
    pub fn area(&self) -> f64 {
        match *self {
            Region::Square { side } => side * side,
            Region::Disc { radius } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Square { side } => p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side,
            Region::Disc { radius } => p.x.hypot(p.y) <= radius + 1e-9,
        }
    }
}

/// A static set of node positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<Point>,
    pub region: Region,
    pub seed: Option<u64>,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Checks the structural invariants: positions inside the region and no
    /// two nodes coincident.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.nodes.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidParams(format!("node {i} has a non-finite coordinate")));
            }
            if !self.region.contains(*p) {
                return Err(Error::InvalidParams(format!(
                    "node {i} at ({}, {}) lies outside the declared region",
                    p.x, p.y
                )));
            }
        }
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                if self.nodes[i].dist(self.nodes[j]) == 0.0 {
                    return Err(Error::CoincidentNodes);
                }
            }
        }
        Ok(())
    }
}

/// A source-destination demand with its traffic-pattern weight and workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub src: usize,
    pub dst: usize,
    /// Traffic-pattern weight `v_i`; the weights of a flow set are
    /// normalized so their squares sum to one.
    pub weight: f64,
    /// Number of packets this flow must deliver end to end.
    pub workload: u64,
}

/// Rescales weights in place so that the sum of their squares is 1.
pub fn normalize_weights(flows: &mut [FlowSpec]) {
    let norm = flows.iter().map(|f| f.weight * f.weight).sum::<f64>().sqrt();
    if norm > 0.0 {
        for f in flows {
            f.weight /= norm;
        }
    }
}

/// Undirected adjacency derived from a `Network` and a transmission range:
/// an edge joins `u` and `v` iff their distance is at most `r`.
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    adj: Vec<Vec<usize>>,
}

impl ConnectivityGraph {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Neighbor lists are sorted ascending.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adj.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

/// Builds the connectivity graph of `net` at transmission range `r`.
pub fn connectivity(net: &Network, r: f64) -> ConnectivityGraph {
    let n = net.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if net.nodes[u].dist(net.nodes[v]) <= r {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    // Built in ascending order already, but keep the invariant explicit.
    for list in &mut adj {
        list.sort_unstable();
    }
    ConnectivityGraph { adj }
}

/// `n` i.i.d. uniform positions in a `side x side` square. Coincident pairs
/// are resampled. Identical seeds produce identical networks.
pub fn gen_uniform(n: usize, side: f64, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 nodes, got {n}")));
    }
    if !(side > 0.0) {
        return Err(Error::InvalidParams(format!("side must be positive, got {side}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Point> = Vec::with_capacity(n);
    while nodes.len() < n {
        let p = Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
        if nodes.iter().all(|q| q.dist(p) > 0.0) {
            nodes.push(p);
        }
    }
    Ok(Network {
        nodes,
        region: Region::Square { side },
        seed: Some(seed),
    })
}

/// A `rows x cols` lattice with the given spacing. Node `(i, j)` sits at
/// `(j*spacing, i*spacing)` and has index `i*cols + j`. One left-to-right
/// flow per row and one top-to-bottom flow per column, equal weights.
pub fn gen_grid(rows: usize, cols: usize, spacing: f64, workload: u64) -> Result<(Network, Vec<FlowSpec>)> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParams(format!("grid needs rows, cols >= 2, got {rows}x{cols}")));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidParams(format!("spacing must be positive, got {spacing}")));
    }
    let mut nodes = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            nodes.push(Point::new(j as f64 * spacing, i as f64 * spacing));
        }
    }
    let idx = |i: usize, j: usize| i * cols + j;
    let mut flows = Vec::with_capacity(rows + cols);
    for i in 0..rows {
        flows.push(FlowSpec { src: idx(i, 0), dst: idx(i, cols - 1), weight: 1.0, workload });
    }
    for j in 0..cols {
        flows.push(FlowSpec { src: idx(0, j), dst: idx(rows - 1, j), weight: 1.0, workload });
    }
    normalize_weights(&mut flows);
    let side = spacing * (rows.max(cols) - 1) as f64;
    Ok((
        Network {
            nodes,
            region: Region::Square { side },
            seed: None,
        },
        flows,
    ))
}

/// The unbounded-gain construction: `2m+1` vertical links of length `d`
/// spaced `2d` apart, a single relay node halving the middle link, and two
/// evenly spaced nodes between horizontally neighboring top (and bottom)
/// nodes; `12m+3` nodes total, one top-to-bottom flow per vertical link.
#[derive(Debug, Clone)]
pub struct Theorem2Net {
    pub network: Network,
    pub flows: Vec<FlowSpec>,
    /// Top endpoints of the vertical links, left to right (transmitters).
    pub top: Vec<usize>,
    /// Bottom endpoints, left to right (receivers).
    pub bottom: Vec<usize>,
    /// The relay splitting the middle vertical link.
    pub relay: usize,
    pub m: usize,
    pub d: f64,
}

impl Theorem2Net {
    /// Top of the middle vertical link.
    pub fn mid_top(&self) -> usize {
        self.top[self.m]
    }

    /// Bottom of the middle vertical link.
    pub fn mid_bottom(&self) -> usize {
        self.bottom[self.m]
    }
}

pub fn gen_theorem2(m: usize, d: f64, workload: u64) -> Result<Theorem2Net> {
    if m < 1 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if !(d > 0.0) {
        return Err(Error::InvalidParams(format!("d must be positive, got {d}")));
    }
    let cols = 2 * m + 1;
    let x = |j: usize| 2.0 * d * j as f64;
    let mut nodes = Vec::with_capacity(12 * m + 3);
    let top: Vec<usize> = (0..cols).collect();
    for j in 0..cols {
        nodes.push(Point::new(x(j), d));
    }
    let bottom: Vec<usize> = (cols..2 * cols).collect();
    for j in 0..cols {
        nodes.push(Point::new(x(j), 0.0));
    }
    let relay = nodes.len();
    nodes.push(Point::new(x(m), d / 2.0));
    for y in [d, 0.0] {
        for j in 0..cols - 1 {
            nodes.push(Point::new(x(j) + 2.0 * d / 3.0, y));
            nodes.push(Point::new(x(j) + 4.0 * d / 3.0, y));
        }
    }
    debug_assert_eq!(nodes.len(), 12 * m + 3);

    let mut flows: Vec<FlowSpec> = (0..cols)
        .map(|j| FlowSpec { src: top[j], dst: bottom[j], weight: 1.0, workload })
        .collect();
    normalize_weights(&mut flows);

    Ok(Theorem2Net {
        network: Network {
            nodes,
            region: Region::Square { side: 2.0 * d * (cols - 1) as f64 },
            seed: None,
        },
        flows,
        top,
        bottom,
        relay,
        m,
        d,
    })
}

/// Star topology: one center node, `k` sources on a circle of radius
/// `inner` and their destinations placed antipodally at radius
/// `inner * outer_ratio`. At low power (range just above `inner`) every
/// flow's only 2-hop route runs through the center; at high power (range
/// at least `inner * (1 + outer_ratio)`) every flow is a single hop.
#[derive(Debug, Clone)]
pub struct StarNet {
    pub network: Network,
    pub flows: Vec<FlowSpec>,
    pub center: usize,
    pub sources: Vec<usize>,
    pub dests: Vec<usize>,
}

pub fn gen_star(k: usize, inner: f64, outer_ratio: f64, workload: u64) -> Result<StarNet> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("star needs k >= 2 flows, got {k}")));
    }
    if !(inner > 0.0) || !(outer_ratio > 0.0) {
        return Err(Error::InvalidParams("star radii must be positive".into()));
    }
    let outer = inner * outer_ratio;
    let mut nodes = vec![Point::new(0.0, 0.0)];
    let mut sources = Vec::with_capacity(k);
    let mut dests = Vec::with_capacity(k);
    for i in 0..k {
        let theta = std::f64::consts::PI * i as f64 / k as f64;
        sources.push(nodes.len());
        nodes.push(Point::new(inner * theta.cos(), inner * theta.sin()));
    }
    for i in 0..k {
        let theta = std::f64::consts::PI * i as f64 / k as f64 + std::f64::consts::PI;
        dests.push(nodes.len());
        nodes.push(Point::new(outer * theta.cos(), outer * theta.sin()));
    }
    let mut flows: Vec<FlowSpec> = (0..k)
        .map(|i| FlowSpec { src: sources[i], dst: dests[i], weight: 1.0, workload })
        .collect();
    normalize_weights(&mut flows);
    Ok(StarNet {
        network: Network {
            nodes,
            region: Region::Disc { radius: inner.max(outer) },
            seed: None,
        },
        flows,
        center: 0,
        sources,
        dests,
    })
}

/// How the `k_n` term of the critical-range formula is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnRule {
    /// `k_n = ln ln n`, which grows without bound; requires `n >= 3`.
    LogLog,
    Fixed(f64),
}

/// Critical transmission range for connectivity of `n` uniform nodes over
/// the given area: `sqrt(area) * sqrt((ln n + k_n) / (pi n))`. The formula
/// is exact for a disc of unit area and used here as an approximation for
/// squares as well.
pub fn critical_range(n: usize, area: f64, k_n: KnRule) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::InvalidParams(format!("area must be positive, got {area}")));
    }
    let k = match k_n {
        KnRule::LogLog => {
            if n < 3 {
                return Err(Error::InvalidParams(format!(
                    "critical_range with k_n = ln ln n needs n >= 3, got {n}"
                )));
            }
            (n as f64).ln().ln()
        }
        KnRule::Fixed(v) => v,
    };
    let n_f = n as f64;
    Ok(area.sqrt() * ((n_f.ln() + k) / (std::f64::consts::PI * n_f)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_deterministic_and_in_bounds() {
        let a = gen_uniform(200, 3000.0, 7).unwrap();
        let b = gen_uniform(200, 3000.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 200);
        assert!(a.validate().is_ok());
        for p in &a.nodes {
            assert!(p.x >= 0.0 && p.x <= 3000.0 && p.y >= 0.0 && p.y <= 3000.0);
        }
        let c = gen_uniform(20, 1000.0, 7).unwrap();
        assert_eq!(c.node_count(), 20);
    }

    #[test]
    fn different_seeds_differ() {
        let a = gen_uniform(50, 1000.0, 1).unwrap();
        let b = gen_uniform(50, 1000.0, 2).unwrap();
        assert_ne!(a.nodes, b.nodes);
    }

    #[test]
    fn grid_layout_and_flow_count() {
        let (net, flows) = gen_grid(25, 25, 200.0, 500).unwrap();
        assert_eq!(net.node_count(), 625);
        assert_eq!(flows.len(), 50);
        // Node (i, j) sits at (j*spacing, i*spacing).
        assert_eq!(net.nodes[1 * 25 + 3], Point::new(600.0, 200.0));
        let sq: f64 = flows.iter().map(|f| f.weight * f.weight).sum();
        assert!((sq - 1.0).abs() < 1e-12);

        let (tiny, tiny_flows) = gen_grid(2, 2, 1.0, 10).unwrap();
        assert_eq!(tiny.node_count(), 4);
        assert_eq!(tiny_flows.len(), 4);
    }

    #[test]
    fn grid_connectivity_at_250m_has_no_diagonals() {
        let (net, _) = gen_grid(25, 25, 200.0, 500).unwrap();
        let g = connectivity(&net, 250.0);
        // Interior node: exactly 4 lattice neighbors (the diagonal is
        // 200*sqrt(2) = 282.8 > 250).
        let center = 12 * 25 + 12;
        assert_eq!(g.neighbors(center).len(), 4);
        assert!(g.is_connected());
    }

    #[test]
    fn connectivity_extremes() {
        let net = gen_uniform(10, 100.0, 3).unwrap();
        let min_dist = (0..10)
            .flat_map(|i| (0..10).map(move |j| (i, j)))
            .filter(|(i, j)| i < j)
            .map(|(i, j)| net.nodes[i].dist(net.nodes[j]))
            .fold(f64::INFINITY, f64::min);
        let g_empty = connectivity(&net, min_dist * 0.99);
        assert_eq!(g_empty.edge_count(), 0);
        assert!(!g_empty.is_connected());
        let g_full = connectivity(&net, 100.0 * std::f64::consts::SQRT_2);
        assert_eq!(g_full.edge_count(), 10 * 9 / 2);
        assert!(g_full.is_connected());
    }

    #[test]
    fn theorem2_node_and_flow_counts() {
        let t = gen_theorem2(2, 250.0, 500).unwrap();
        assert_eq!(t.network.node_count(), 27);
        assert_eq!(t.flows.len(), 5);
        assert!(t.network.validate().is_ok());
        let t1 = gen_theorem2(1, 100.0, 500).unwrap();
        assert_eq!(t1.network.node_count(), 15);
        assert_eq!(t1.flows.len(), 3);
    }

    #[test]
    fn theorem2_middle_link_geometry() {
        let t = gen_theorem2(2, 250.0, 500).unwrap();
        let a1 = t.network.nodes[t.mid_top()];
        let a2 = t.network.nodes[t.mid_bottom()];
        let a3 = t.network.nodes[t.relay];
        assert!((a1.dist(a2) - 250.0).abs() < 1e-12);
        assert!((a1.dist(a3) - 125.0).abs() < 1e-12);
        assert!((a2.dist(a3) - 125.0).abs() < 1e-12);
        // Adjacent vertical links sit 2d apart.
        assert!((t.network.nodes[t.top[0]].dist(t.network.nodes[t.top[1]]) - 500.0).abs() < 1e-12);
    }

    #[test]
    fn star_counts_and_symmetry() {
        let s = gen_star(2, 237.5, 1.0, 500).unwrap();
        assert_eq!(s.network.node_count(), 5);
        assert_eq!(s.flows.len(), 2);
        assert!(s.network.validate().is_ok());
        let c = s.network.nodes[s.center];
        // All flows have the same source-center and center-destination
        // distances, hence equal min-hop lengths by symmetry.
        for i in 0..2 {
            assert!((s.network.nodes[s.sources[i]].dist(c) - 237.5).abs() < 1e-9);
            assert!((s.network.nodes[s.dests[i]].dist(c) - 237.5).abs() < 1e-9);
            let direct = s.network.nodes[s.sources[i]].dist(s.network.nodes[s.dests[i]]);
            assert!((direct - 475.0).abs() < 1e-9);
        }
    }

    #[test]
    fn critical_range_examples() {
        let r = critical_range(200, 1.0, KnRule::LogLog).unwrap();
        assert!((r - 0.1053).abs() < 2e-4, "got {r}");
        // Decreasing in n at large n.
        let r2 = critical_range(400, 1.0, KnRule::LogLog).unwrap();
        assert!(r2 < r);
        // Area scaling: 4x area doubles the range.
        let r4 = critical_range(200, 4.0, KnRule::LogLog).unwrap();
        assert!((r4 / r - 2.0).abs() < 1e-12);
        assert!(critical_range(2, 1.0, KnRule::LogLog).is_err());
    }
}
