//! Minimum hop-count routing and the segment-covering route construction.

use crate::error::{Error, Result};
use crate::geom::{line_distance, Point};
use crate::topology::{ConnectivityGraph, Network};

/// An ordered node path from source to destination with per-hop lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub hop_lengths: Vec<f64>,
}

impl Route {
    fn from_nodes(net: &Network, nodes: Vec<usize>) -> Route {
        let hop_lengths = nodes
            .windows(2)
            .map(|w| net.nodes[w[0]].dist(net.nodes[w[1]]))
            .collect();
        Route { nodes, hop_lengths }
    }

    pub fn hops(&self) -> usize {
        self.hop_lengths.len()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.contains(&node)
    }
}

fn bfs_distances(graph: &ConnectivityGraph, from: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; graph.node_count()];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// A route with the minimum possible hop count. Ties are broken
/// deterministically: among all minimum-hop routes the lexicographically
/// smallest node-index sequence is returned.
pub fn min_hop_route(net: &Network, graph: &ConnectivityGraph, src: usize, dst: usize) -> Result<Route> {
    let dist_from_src = bfs_distances(graph, src);
    if dist_from_src[dst] == u32::MAX {
        return Err(Error::NoRoute { src, dst });
    }
    if src == dst {
        return Ok(Route::from_nodes(net, vec![src]));
    }
    let dist_to_dst = bfs_distances(graph, dst);
    let total = dist_from_src[dst];
    // Greedy walk: at each step take the smallest-index neighbor that still
    // lies on some shortest path. Neighbor lists are sorted, so the first
    // qualifying neighbor is the lexicographic choice.
    let mut nodes = vec![src];
    let mut current = src;
    while current != dst {
        let next = graph
            .neighbors(current)
            .iter()
            .copied()
            .find(|&v| {
                dist_from_src[v] == dist_from_src[current] + 1
                    && dist_from_src[v].saturating_add(dist_to_dst[v]) == total
            })
            .expect("shortest-path invariant: some neighbor advances toward dst");
        nodes.push(next);
        current = next;
    }
    Ok(Route::from_nodes(net, nodes))
}

/// Builds a route from node `a` to node `b` that hugs the straight segment
/// between them: the segment is split into pieces of length `2*r_c`, each
/// covered by a disc of radius `r_c` centered on the segment, and one node
/// is selected from every disc (the one nearest its center). Requires
/// `r > 4*r_c` so consecutive selections are always within range. When
/// `|a-b| <= 4*r_c` the direct route is returned.
pub fn segment_route(net: &Network, a: usize, b: usize, r_c: f64, r: f64) -> Result<Route> {
    if !(r_c > 0.0) {
        return Err(Error::InvalidParams(format!("r_c must be positive, got {r_c}")));
    }
    if !(r > 4.0 * r_c) {
        return Err(Error::RangeTooSmall { r, r_c });
    }
    let pa = net.nodes[a];
    let pb = net.nodes[b];
    let span = pa.dist(pb);
    if span == 0.0 {
        return Err(Error::CoincidentNodes);
    }
    if span <= 4.0 * r_c {
        return Ok(Route::from_nodes(net, vec![a, b]));
    }
    let discs = (span / (2.0 * r_c)).ceil() as usize;
    let ux = (pb.x - pa.x) / span;
    let uy = (pb.y - pa.y) / span;
    let mut nodes = vec![a];
    for i in 1..=discs {
        let along = (2.0 * i as f64 - 1.0) * r_c;
        let center = Point::new(pa.x + ux * along, pa.y + uy * along);
        let mut best: Option<(f64, usize)> = None;
        for (idx, p) in net.nodes.iter().enumerate() {
            if idx == a || idx == b {
                continue;
            }
            let d = p.dist(center);
            if d <= r_c && best.map_or(true, |(bd, bi)| d < bd || (d == bd && idx < bi)) {
                best = Some((d, idx));
            }
        }
        match best {
            Some((_, idx)) => {
                if *nodes.last().unwrap() != idx {
                    nodes.push(idx);
                }
            }
            None => return Err(Error::EmptyCoveringDisc { disc: i, total: discs }),
        }
    }
    nodes.push(b);
    Ok(Route::from_nodes(net, nodes))
}

/// Checks the three conditions of the segment-route guarantee for a route
/// from `a` to `b`:
/// (a) every hop is at most `4*r_c` long;
/// (b) every relay node lies within perpendicular distance `r_c` of the
///     line through `a` and `b`;
/// (c) for every pair of relay nodes the hop count between them is at most
///     `|a1 - a2| / (2*r_c) + 1`.
pub fn check_lemma3(net: &Network, route: &Route, a: usize, b: usize, r_c: f64) -> bool {
    if route.nodes.first() != Some(&a) || route.nodes.last() != Some(&b) {
        return false;
    }
    if route.hop_lengths.iter().any(|&h| h > 4.0 * r_c) {
        return false;
    }
    let pa = net.nodes[a];
    let pb = net.nodes[b];
    let relays = &route.nodes[1..route.nodes.len().saturating_sub(1)];
    for &v in relays {
        if line_distance(net.nodes[v], pa, pb) > r_c {
            return false;
        }
    }
    for i in 0..relays.len() {
        for j in (i + 1)..relays.len() {
            let hops = (j - i) as f64;
            let sep = net.nodes[relays[i]].dist(net.nodes[relays[j]]);
            if hops > sep / (2.0 * r_c) + 1.0 + 1e-9 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{connectivity, gen_grid, gen_uniform, Network, Region};

    fn line_network(positions: &[(f64, f64)]) -> Network {
        let side = positions
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .fold(0.0f64, f64::max);
        Network {
            nodes: positions.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            region: Region::Square { side: side.max(1.0) },
            seed: None,
        }
    }

    #[test]
    fn grid_row_route_is_24_hops_at_250m() {
        let (net, _) = gen_grid(25, 25, 200.0, 1).unwrap();
        let g = connectivity(&net, 250.0);
        let route = min_hop_route(&net, &g, 0, 24).unwrap();
        assert_eq!(route.hops(), 24);
        assert!(route.hop_lengths.iter().all(|&h| (h - 200.0).abs() < 1e-9));
    }

    #[test]
    fn min_hop_matches_bfs_distance_and_is_lexicographic() {
        let net = line_network(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 0.5), (0.5, 1.5)]);
        let g = connectivity(&net, 1.3);
        for src in 0..5 {
            let dist = bfs_distances(&g, src);
            for dst in 0..5 {
                if dist[dst] == u32::MAX {
                    continue;
                }
                let route = min_hop_route(&net, &g, src, dst).unwrap();
                assert_eq!(route.hops() as u32, dist[dst]);
            }
        }
    }

    #[test]
    fn disconnected_pair_is_an_error() {
        let net = line_network(&[(0.0, 0.0), (1.0, 0.0), (10.0, 0.0), (11.0, 0.0)]);
        let g = connectivity(&net, 1.5);
        assert!(matches!(
            min_hop_route(&net, &g, 0, 3),
            Err(Error::NoRoute { src: 0, dst: 3 })
        ));
    }

    #[test]
    fn segment_route_direct_when_short() {
        let net = line_network(&[(0.0, 0.0), (3.0, 0.0), (1.5, 0.1)]);
        let r_c = 1.0;
        let route = segment_route(&net, 0, 1, r_c, 5.0).unwrap();
        assert_eq!(route.nodes, vec![0, 1]);
        assert!(check_lemma3(&net, &route, 0, 1, r_c));
    }

    #[test]
    fn segment_route_covers_with_three_discs_at_six_rc() {
        // |a-b| = 6*r_c: three covering discs, at most 4 hops.
        let r_c = 1.0;
        let net = line_network(&[
            (0.0, 0.0),
            (6.0, 0.0),
            (1.0, 0.2),  // disc 1 center (1, 0)
            (3.0, -0.3), // disc 2 center (3, 0)
            (5.0, 0.4),  // disc 3 center (5, 0)
        ]);
        let route = segment_route(&net, 0, 1, r_c, 4.1).unwrap();
        assert_eq!(route.nodes, vec![0, 2, 3, 4, 1]);
        assert!(route.hops() <= 4);
        assert!(check_lemma3(&net, &route, 0, 1, r_c));
    }

    #[test]
    fn segment_route_reports_empty_disc() {
        let r_c = 1.0;
        let net = line_network(&[(0.0, 0.0), (6.0, 0.0), (1.0, 0.2), (5.0, 0.4)]);
        // No node near (3, 0): the middle disc is empty.
        assert!(matches!(
            segment_route(&net, 0, 1, r_c, 4.1),
            Err(Error::EmptyCoveringDisc { disc: 2, total: 3 })
        ));
    }

    #[test]
    fn segment_route_requires_large_range() {
        let net = line_network(&[(0.0, 0.0), (6.0, 0.0)]);
        assert!(matches!(
            segment_route(&net, 0, 1, 1.0, 4.0),
            Err(Error::RangeTooSmall { .. })
        ));
    }

    #[test]
    fn lemma3_rejects_offset_relay() {
        let r_c = 1.0;
        let net = line_network(&[(0.0, 0.0), (6.0, 0.0), (3.0, 2.0)]);
        let route = Route::from_nodes(&net, vec![0, 2, 1]);
        // Relay sits 2*r_c off the segment: condition (b) fails.
        assert!(!check_lemma3(&net, &route, 0, 1, r_c));
    }

    #[test]
    fn lemma3_rejects_long_hop() {
        let r_c = 1.0;
        let net = line_network(&[(0.0, 0.0), (6.0, 0.0)]);
        let route = Route::from_nodes(&net, vec![0, 1]);
        assert!(!check_lemma3(&net, &route, 0, 1, r_c));
    }

    #[test]
    fn hop_count_non_increasing_in_range() {
        let net = gen_uniform(40, 1000.0, 11).unwrap();
        let mut prev: Option<Vec<usize>> = None;
        for r in [300.0, 450.0, 600.0, 800.0] {
            let g = connectivity(&net, r);
            if !g.is_connected() {
                prev = None;
                continue;
            }
            let hops: Vec<usize> = (1..10)
                .map(|dst| min_hop_route(&net, &g, 0, dst).unwrap().hops())
                .collect();
            if let Some(p) = prev {
                for (now, before) in hops.iter().zip(&p) {
                    assert!(now <= before, "hops grew with range");
                }
            }
            prev = Some(hops);
        }
    }
}
