//! Time- and distance-weighted shortest paths over the directed graph,
//! including partial first/last edges for on-edge start and end points.

use super::{effective_speed, kmh_to_ms, RoadNetwork, Snap};
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc as StdArc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    cost: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap by cost; node index breaks ties deterministically.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Weight {
    TravelTime,
    Distance,
}

/// Shortest-path engine bound to one network and one operator speed limit.
///
/// Node-to-node costs are cached per source node, so repeated queries along
/// a trajectory stay cheap. The cache is behind a mutex and safe to share
/// across worker threads; results do not depend on query order.
pub struct Router<'a> {
    net: &'a RoadNetwork,
    sp_c_kmh: f64,
    time_cache: Mutex<std::collections::HashMap<usize, StdArc<Vec<f64>>>>,
    dist_cache: Mutex<std::collections::HashMap<usize, StdArc<Vec<f64>>>>,
}

impl<'a> Router<'a> {
    pub fn new(net: &'a RoadNetwork, sp_c_kmh: f64) -> Result<Self> {
        if sp_c_kmh <= 0.0 || !sp_c_kmh.is_finite() {
            return Err(Error::Input(format!(
                "operator speed limit {sp_c_kmh} must be positive"
            )));
        }
        Ok(Router {
            net,
            sp_c_kmh,
            time_cache: Mutex::new(std::collections::HashMap::new()),
            dist_cache: Mutex::new(std::collections::HashMap::new()),
        })
    }

    pub fn operator_limit_kmh(&self) -> f64 {
        self.sp_c_kmh
    }

    /// Effective speed on an edge in m/s under this router's operator limit.
    pub fn edge_speed_ms(&self, edge_idx: usize) -> f64 {
        let e = self.net.edge(edge_idx);
        kmh_to_ms(effective_speed(e.speed_limit_kmh, self.sp_c_kmh).expect("validated"))
    }

    /// Minimum travel time in seconds from `from` to `to` along directed
    /// edges at the effective speed of each edge.
    pub fn travel_time_s(&self, from: &Snap, to: &Snap) -> Result<f64> {
        self.query(from, to, Weight::TravelTime)
    }

    /// Length in meters of the shortest directed path from `from` to `to`.
    pub fn route_distance_m(&self, from: &Snap, to: &Snap) -> Result<f64> {
        self.query(from, to, Weight::Distance)
    }

    fn edge_cost_per_m(&self, edge_idx: usize, weight: Weight) -> f64 {
        match weight {
            Weight::Distance => 1.0,
            Weight::TravelTime => 1.0 / self.edge_speed_ms(edge_idx),
        }
    }

    fn node_costs(&self, source: usize, weight: Weight) -> StdArc<Vec<f64>> {
        let cache = match weight {
            Weight::TravelTime => &self.time_cache,
            Weight::Distance => &self.dist_cache,
        };
        if let Some(hit) = cache.lock().unwrap().get(&source) {
            return StdArc::clone(hit);
        }
        let costs = StdArc::new(self.dijkstra(source, weight));
        cache
            .lock()
            .unwrap()
            .entry(source)
            .or_insert_with(|| StdArc::clone(&costs));
        costs
    }

    fn dijkstra(&self, source: usize, weight: Weight) -> Vec<f64> {
        let n = self.net.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem {
            cost: 0.0,
            node: source,
        });
        while let Some(HeapItem { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for arc in self.net.out_arcs(node) {
                let e = self.net.edge(arc.edge);
                let next = cost + e.length_m * self.edge_cost_per_m(arc.edge, weight);
                if next < dist[arc.head] {
                    dist[arc.head] = next;
                    heap.push(HeapItem {
                        cost: next,
                        node: arc.head,
                    });
                }
            }
        }
        dist
    }

    fn query(&self, from: &Snap, to: &Snap, weight: Weight) -> Result<f64> {
        let mut best = f64::INFINITY;

        // Staying on one edge.
        if from.edge == to.edge {
            let e = self.net.edge(from.edge);
            let per_m = self.edge_cost_per_m(from.edge, weight);
            let delta = to.offset_m - from.offset_m;
            if delta >= 0.0 {
                best = delta * per_m;
            } else if !e.oneway {
                best = -delta * per_m;
            }
        }

        // Through the node graph: exit the start edge at one of its ends,
        // enter the destination edge from one of its ends.
        let e1 = self.net.edge(from.edge);
        let e2 = self.net.edge(to.edge);
        let per1 = self.edge_cost_per_m(from.edge, weight);
        let per2 = self.edge_cost_per_m(to.edge, weight);

        let mut exits: Vec<(usize, f64)> = vec![(e1.to, (e1.length_m - from.offset_m) * per1)];
        if !e1.oneway {
            exits.push((e1.from, from.offset_m * per1));
        }
        let mut entries: Vec<(usize, f64)> = vec![(e2.from, to.offset_m * per2)];
        if !e2.oneway {
            entries.push((e2.to, (e2.length_m - to.offset_m) * per2));
        }

        for (exit_node, exit_cost) in &exits {
            let costs = self.node_costs(*exit_node, weight);
            for (entry_node, entry_cost) in &entries {
                let total = exit_cost + costs[*entry_node] + entry_cost;
                if total < best {
                    best = total;
                }
            }
        }

        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Unreachable)
        }
    }
}

/// Minimum travel time in seconds between two snapped points under the
/// operator speed limit `sp_c_kmh`. One-shot convenience over [`Router`].
pub fn theoretical_travel_time(
    net: &RoadNetwork,
    from: &Snap,
    to: &Snap,
    sp_c_kmh: f64,
) -> Result<f64> {
    Router::new(net, sp_c_kmh)?.travel_time_s(from, to)
}
