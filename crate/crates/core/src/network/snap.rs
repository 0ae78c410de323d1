//! Nearest-point queries against the edge geometry.

use super::{Edge, Node, RoadNetwork};
use crate::error::{Error, Result};
use crate::geo::{project_onto_segment, LatLon, M_PER_DEG};

/// A position on the network produced by snapping a coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snap {
    /// Index into `RoadNetwork::edges`.
    pub edge: usize,
    pub edge_id: super::EdgeId,
    /// Meters along the edge geometry from its `from` node.
    pub offset_m: f64,
    pub pos: LatLon,
    /// Great-circle distance from the query point to `pos`, meters.
    pub distance_m: f64,
}

/// Uniform cell index over edge segments. Cells are addressed in scaled
/// degree space; each segment is registered in every cell its bounding box
/// touches.
#[derive(Debug)]
pub(crate) struct SnapGrid {
    cell_deg: f64,
    min_lat: f64,
    min_lon: f64,
    cols: usize,
    rows: usize,
    /// Per cell: (edge index, segment index).
    cells: Vec<Vec<(u32, u32)>>,
}

const CELL_M: f64 = 500.0;

impl SnapGrid {
    pub fn build(nodes: &[Node], edges: &[Edge]) -> SnapGrid {
        let mut min_lat = f64::INFINITY;
        let mut max_lat = f64::NEG_INFINITY;
        let mut min_lon = f64::INFINITY;
        let mut max_lon = f64::NEG_INFINITY;
        for n in nodes {
            min_lat = min_lat.min(n.pos.lat);
            max_lat = max_lat.max(n.pos.lat);
            min_lon = min_lon.min(n.pos.lon);
            max_lon = max_lon.max(n.pos.lon);
        }
        for e in edges {
            for p in &e.geometry {
                min_lat = min_lat.min(p.lat);
                max_lat = max_lat.max(p.lat);
                min_lon = min_lon.min(p.lon);
                max_lon = max_lon.max(p.lon);
            }
        }
        if nodes.is_empty() {
            return SnapGrid {
                cell_deg: 1.0,
                min_lat: 0.0,
                min_lon: 0.0,
                cols: 0,
                rows: 0,
                cells: Vec::new(),
            };
        }

        let cell_deg = CELL_M / M_PER_DEG;
        let cols = (((max_lon - min_lon) / cell_deg).floor() as usize + 1).max(1);
        let rows = (((max_lat - min_lat) / cell_deg).floor() as usize + 1).max(1);
        let mut cells = vec![Vec::new(); cols * rows];
        let clamp_col = |c: isize| c.clamp(0, cols as isize - 1) as usize;
        let clamp_row = |r: isize| r.clamp(0, rows as isize - 1) as usize;
        for (ei, e) in edges.iter().enumerate() {
            for si in 0..e.geometry.len() - 1 {
                let a = e.geometry[si];
                let b = e.geometry[si + 1];
                let c0 = clamp_col(((a.lon.min(b.lon) - min_lon) / cell_deg).floor() as isize);
                let c1 = clamp_col(((a.lon.max(b.lon) - min_lon) / cell_deg).floor() as isize);
                let r0 = clamp_row(((a.lat.min(b.lat) - min_lat) / cell_deg).floor() as isize);
                let r1 = clamp_row(((a.lat.max(b.lat) - min_lat) / cell_deg).floor() as isize);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        cells[r * cols + c].push((ei as u32, si as u32));
                    }
                }
            }
        }
        SnapGrid {
            cell_deg,
            min_lat,
            min_lon,
            cols,
            rows,
            cells,
        }
    }

    fn cell_of(&self, p: &LatLon) -> (isize, isize) {
        (
            ((p.lon - self.min_lon) / self.cell_deg).floor() as isize,
            ((p.lat - self.min_lat) / self.cell_deg).floor() as isize,
        )
    }

    /// Visits all segments registered within `ring` cells of the query cell.
    fn segments_in_ring(&self, p: &LatLon, ring: isize, out: &mut Vec<(u32, u32)>) {
        let (qc, qr) = self.cell_of(p);
        for r in qr - ring..=qr + ring {
            if r < 0 || r >= self.rows as isize {
                continue;
            }
            for c in qc - ring..=qc + ring {
                if c < 0 || c >= self.cols as isize {
                    continue;
                }
                // only the outer shell of this ring
                if ring > 0 && (r - qr).abs() != ring && (c - qc).abs() != ring {
                    continue;
                }
                out.extend_from_slice(&self.cells[r as usize * self.cols + c as usize]);
            }
        }
    }

    fn max_ring(&self) -> isize {
        self.cols.max(self.rows) as isize
    }
}

fn snap_to_segment(net: &RoadNetwork, fix: &LatLon, edge_idx: u32, seg_idx: u32) -> Snap {
    let e = net.edge(edge_idx as usize);
    let si = seg_idx as usize;
    let (t, pos, dist) = project_onto_segment(fix, &e.geometry[si], &e.geometry[si + 1]);
    let seg_len = e.seg_cum_m[si + 1] - e.seg_cum_m[si];
    Snap {
        edge: edge_idx as usize,
        edge_id: e.id,
        offset_m: e.seg_cum_m[si] + t * seg_len,
        pos,
        distance_m: dist,
    }
}

/// Deterministic preference order: smallest distance, then lowest edge id,
/// then lowest offset.
fn better(a: &Snap, b: &Snap) -> bool {
    (a.distance_m, a.edge_id, a.offset_m) < (b.distance_m, b.edge_id, b.offset_m)
}

/// Snaps a coordinate to the closest point on any edge polyline.
pub fn nearest_network_point(net: &RoadNetwork, fix: &LatLon) -> Result<Snap> {
    if net.edge_count() == 0 {
        return Err(Error::Input("cannot snap onto an empty network".into()));
    }
    let grid = net.grid();
    let mut best: Option<Snap> = None;
    let mut seg_buf = Vec::new();
    // Longitude cells shrink by cos(lat) in meters; use the tighter scale
    // when deciding whether farther rings can still hold a closer segment.
    let cell_floor_m = CELL_M * fix.lat.to_radians().cos().abs().min(1.0);
    for ring in 0..=grid.max_ring() {
        seg_buf.clear();
        grid.segments_in_ring(fix, ring, &mut seg_buf);
        for &(ei, si) in &seg_buf {
            let cand = snap_to_segment(net, fix, ei, si);
            if best.as_ref().map_or(true, |b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        if let Some(b) = &best {
            // Any segment in ring r+1 or farther is at least r cells away.
            if b.distance_m < ring as f64 * cell_floor_m {
                break;
            }
        }
    }
    best.ok_or_else(|| Error::Input("cannot snap onto an empty network".into()))
}

/// All candidate snaps within `threshold_m`, best projection per edge,
/// ordered by the deterministic preference order.
pub fn candidates_within(net: &RoadNetwork, fix: &LatLon, threshold_m: f64) -> Vec<Snap> {
    let grid = net.grid();
    let cell_floor_m = CELL_M * fix.lat.to_radians().cos().abs().max(1e-6);
    let rings = ((threshold_m / cell_floor_m).ceil() as isize + 1).min(grid.max_ring());
    let mut seg_buf = Vec::new();
    for ring in 0..=rings {
        grid.segments_in_ring(fix, ring, &mut seg_buf);
    }
    let mut per_edge: Vec<Option<Snap>> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    for &(ei, si) in &seg_buf {
        let cand = snap_to_segment(net, fix, ei, si);
        if cand.distance_m > threshold_m {
            continue;
        }
        let slot = ei as usize;
        if per_edge.len() <= slot {
            per_edge.resize(slot + 1, None);
        }
        if per_edge[slot].is_none() {
            touched.push(slot);
        }
        if per_edge[slot].as_ref().map_or(true, |b| better(&cand, b)) {
            per_edge[slot] = Some(cand);
        }
    }
    touched.sort_unstable();
    let mut out: Vec<Snap> = touched
        .into_iter()
        .filter_map(|i| per_edge[i].take())
        .collect();
    out.sort_by(|a, b| {
        (a.distance_m, a.edge_id, a.offset_m)
            .partial_cmp(&(b.distance_m, b.edge_id, b.offset_m))
            .unwrap()
    });
    out
}
