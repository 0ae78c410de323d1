//! Directed road graph with geodesic geometry, nearest-point queries,
//! speed-profile constraints and travel-time routing.
//!
//! The network is immutable after construction; every query is pure and safe
//! to call concurrently from many workers.

mod geojson;
mod routing;
mod snap;

pub use geojson::{load_network, write_network_geojson};
pub use routing::{theoretical_travel_time, Router};
pub use snap::Snap;

use crate::error::{Error, Result};
use crate::geo::{haversine, LatLon};
use std::collections::BTreeMap;

/// External identifier of a node as it appears in the network file.
pub type NodeId = i64;
/// External identifier of an edge as it appears in the network file.
pub type EdgeId = i64;

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub pos: LatLon,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: EdgeId,
    /// Index into `RoadNetwork::nodes`.
    pub from: usize,
    pub to: usize,
    pub length_m: f64,
    /// Road speed limit (sp_g), km/h.
    pub speed_limit_kmh: f64,
    pub oneway: bool,
    /// Polyline from the `from` node to the `to` node, endpoints included.
    pub geometry: Vec<LatLon>,
    /// Cumulative geometric length at each polyline vertex; last entry equals
    /// the geometric length of the edge.
    seg_cum_m: Vec<f64>,
}

impl Edge {
    /// Coordinate at the given offset (meters from the `from` node).
    pub fn point_at_offset(&self, offset_m: f64) -> LatLon {
        let off = offset_m.clamp(0.0, *self.seg_cum_m.last().unwrap());
        let i = match self
            .seg_cum_m
            .binary_search_by(|c| c.partial_cmp(&off).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i + 1 >= self.geometry.len() {
            return *self.geometry.last().unwrap();
        }
        let seg_len = self.seg_cum_m[i + 1] - self.seg_cum_m[i];
        let t = if seg_len > 0.0 {
            (off - self.seg_cum_m[i]) / seg_len
        } else {
            0.0
        };
        let a = self.geometry[i];
        let b = self.geometry[i + 1];
        LatLon {
            lat: a.lat + t * (b.lat - a.lat),
            lon: a.lon + t * (b.lon - a.lon),
        }
    }

    /// Bearing of the geometry segment containing the given offset, degrees.
    pub fn bearing_at_offset(&self, offset_m: f64) -> f64 {
        let off = offset_m.clamp(0.0, *self.seg_cum_m.last().unwrap());
        let mut i = match self
            .seg_cum_m
            .binary_search_by(|c| c.partial_cmp(&off).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i + 1 >= self.geometry.len() {
            i = self.geometry.len() - 2;
        }
        crate::geo::bearing_deg(&self.geometry[i], &self.geometry[i + 1])
    }

    fn geometric_length_m(&self) -> f64 {
        *self.seg_cum_m.last().unwrap()
    }
}

/// Input record for one edge; geometry vertices must run from `from_node`
/// to `to_node`. `length_m = None` means "recompute from geometry".
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: EdgeId,
    pub from_node: NodeId,
    pub to_node: NodeId,
    pub length_m: Option<f64>,
    pub speed_limit_kmh: f64,
    pub oneway: bool,
    pub geometry: Vec<LatLon>,
}

/// One directed arc of the adjacency list.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub edge: usize,
    /// True when the arc follows the edge geometry from -> to.
    pub forward: bool,
    pub head: usize,
}

#[derive(Debug)]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_by_id: BTreeMap<NodeId, usize>,
    out_arcs: Vec<Vec<Arc>>,
    grid: snap::SnapGrid,
}

impl RoadNetwork {
    /// Builds and validates a network from raw parts.
    pub fn from_parts(nodes: Vec<(NodeId, f64, f64)>, edge_specs: Vec<EdgeSpec>) -> Result<Self> {
        let mut node_by_id = BTreeMap::new();
        let mut node_list = Vec::with_capacity(nodes.len());
        for (id, lat, lon) in nodes {
            let pos = LatLon::new(lat, lon)
                .map_err(|e| Error::Validation(format!("node {id}: {e}")))?;
            if node_by_id.insert(id, node_list.len()).is_some() {
                return Err(Error::Validation(format!("duplicate node id {id}")));
            }
            node_list.push(Node { id, pos });
        }

        let mut edges = Vec::with_capacity(edge_specs.len());
        let mut seen_edge_ids = BTreeMap::new();
        for spec in edge_specs {
            if seen_edge_ids.insert(spec.id, ()).is_some() {
                return Err(Error::Validation(format!("duplicate edge id {}", spec.id)));
            }
            let from = *node_by_id.get(&spec.from_node).ok_or_else(|| {
                Error::Validation(format!(
                    "edge {} references missing node {}",
                    spec.id, spec.from_node
                ))
            })?;
            let to = *node_by_id.get(&spec.to_node).ok_or_else(|| {
                Error::Validation(format!(
                    "edge {} references missing node {}",
                    spec.id, spec.to_node
                ))
            })?;
            if spec.speed_limit_kmh <= 0.0 || !spec.speed_limit_kmh.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {}: speed limit must be positive",
                    spec.id
                )));
            }
            let geometry = if spec.geometry.is_empty() {
                vec![node_list[from].pos, node_list[to].pos]
            } else {
                spec.geometry
            };
            if geometry.len() < 2 {
                return Err(Error::Validation(format!(
                    "edge {}: geometry needs at least two vertices",
                    spec.id
                )));
            }
            let mut seg_cum_m = Vec::with_capacity(geometry.len());
            let mut acc = 0.0;
            seg_cum_m.push(0.0);
            for w in geometry.windows(2) {
                acc += haversine(&w[0], &w[1]);
                seg_cum_m.push(acc);
            }
            let mut edge = Edge {
                id: spec.id,
                from,
                to,
                length_m: 0.0,
                speed_limit_kmh: spec.speed_limit_kmh,
                oneway: spec.oneway,
                geometry,
                seg_cum_m,
            };
            edge.length_m = match spec.length_m {
                Some(l) => l,
                None => edge.geometric_length_m(),
            };
            if edge.length_m <= 0.0 || !edge.length_m.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {}: length must be positive",
                    spec.id
                )));
            }
            edges.push(edge);
        }

        let mut out_arcs = vec![Vec::new(); node_list.len()];
        for (i, e) in edges.iter().enumerate() {
            out_arcs[e.from].push(Arc {
                edge: i,
                forward: true,
                head: e.to,
            });
            if !e.oneway {
                out_arcs[e.to].push(Arc {
                    edge: i,
                    forward: false,
                    head: e.from,
                });
            }
        }
        // Deterministic arc order regardless of input file order.
        for arcs in &mut out_arcs {
            arcs.sort_by_key(|a| (edges[a.edge].id, !a.forward));
        }

        let grid = snap::SnapGrid::build(&node_list, &edges);
        Ok(RoadNetwork {
            nodes: node_list,
            edges,
            node_by_id,
            out_arcs,
            grid,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.node_by_id.get(&id).copied()
    }

    pub fn edge_index(&self, id: EdgeId) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub(crate) fn out_arcs(&self, node: usize) -> &[Arc] {
        &self.out_arcs[node]
    }

    pub(crate) fn grid(&self) -> &snap::SnapGrid {
        &self.grid
    }

    /// Total geometric length of all edges, meters.
    pub fn total_length_m(&self) -> f64 {
        self.edges.iter().map(|e| e.length_m).sum()
    }
}

/// Effective speed bound: the binding constraint between the road limit
/// (sp_g) and the operator limit (sp_c). Km/h in, km/h out.
pub fn effective_speed(sp_g_kmh: f64, sp_c_kmh: f64) -> Result<f64> {
    if sp_g_kmh <= 0.0 || !sp_g_kmh.is_finite() {
        return Err(Error::Input(format!("road speed limit {sp_g_kmh} must be positive")));
    }
    if sp_c_kmh <= 0.0 || !sp_c_kmh.is_finite() {
        return Err(Error::Input(format!("operator speed limit {sp_c_kmh} must be positive")));
    }
    Ok(if sp_g_kmh <= sp_c_kmh { sp_g_kmh } else { sp_c_kmh })
}

/// Km/h to m/s.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}
