//! Network file ingestion and emission.
//!
//! The network file is a GeoJSON FeatureCollection. Every LineString feature
//! is one edge with properties `edge_id`, `from_node`, `to_node`,
//! `speed_limit_kmh` and `oneway` (plus optional `length_m`); its coordinates
//! run from the `from` node to the `to` node as `[lon, lat]` pairs, and the
//! endpoints define the node coordinates. Point features with a `node_id`
//! property may pre-declare nodes; when present they must agree with every
//! endpoint that references them, which makes dangling references detectable
//! at load time.

use super::{EdgeSpec, NodeId, RoadNetwork};
use crate::error::{Error, Result};
use crate::geo::{haversine, LatLon};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::Path;

/// Maximum disagreement tolerated between two coordinates claimed for the
/// same node id, meters.
const NODE_COORD_TOL_M: f64 = 1.0;

pub fn load_network(path: impl AsRef<Path>) -> Result<RoadNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file_label = path.display().to_string();
    parse_network(&text, &file_label)
}

fn parse_err(file: &str, feature_idx: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line: feature_idx as u64,
        message: message.into(),
    }
}

/// `line` in parse errors is the feature index within the collection, since
/// GeoJSON has no meaningful physical line numbers once pretty-printing
/// varies.
pub fn parse_network(text: &str, file_label: &str) -> Result<RoadNetwork> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        file: file_label.to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    if root["type"] != "FeatureCollection" {
        return Err(Error::Schema {
            file: file_label.to_string(),
            message: "expected a GeoJSON FeatureCollection".into(),
        });
    }
    let features = root["features"].as_array().ok_or_else(|| Error::Schema {
        file: file_label.to_string(),
        message: "missing features array".into(),
    })?;

    let mut declared: BTreeMap<NodeId, LatLon> = BTreeMap::new();
    let mut any_point_decl = false;
    let mut inferred: BTreeMap<NodeId, LatLon> = BTreeMap::new();
    let mut edges: Vec<EdgeSpec> = Vec::new();

    let get_i64 = |props: &Map<String, Value>, key: &str, idx: usize| -> Result<i64> {
        props
            .get(key)
            .and_then(Value::as_i64)
            .ok_or_else(|| parse_err(file_label, idx, format!("missing integer property {key:?}")))
    };

    for (idx, feat) in features.iter().enumerate() {
        let geom = &feat["geometry"];
        let props = feat["properties"]
            .as_object()
            .cloned()
            .unwrap_or_default();
        match geom["type"].as_str() {
            Some("Point") => {
                let node_id = get_i64(&props, "node_id", idx)?;
                let pos = coord_of(&geom["coordinates"], file_label, idx)?;
                if let Some(prev) = declared.insert(node_id, pos) {
                    if haversine(&prev, &pos) > NODE_COORD_TOL_M {
                        return Err(Error::Validation(format!(
                            "node {node_id} declared at two different coordinates"
                        )));
                    }
                }
                any_point_decl = true;
            }
            Some("LineString") => {
                let coords = geom["coordinates"].as_array().ok_or_else(|| {
                    parse_err(file_label, idx, "LineString without coordinates")
                })?;
                if coords.len() < 2 {
                    return Err(parse_err(file_label, idx, "LineString needs >= 2 positions"));
                }
                let mut geometry = Vec::with_capacity(coords.len());
                for c in coords {
                    geometry.push(coord_of(c, file_label, idx)?);
                }
                let edge_id = get_i64(&props, "edge_id", idx)?;
                let from_node = get_i64(&props, "from_node", idx)?;
                let to_node = get_i64(&props, "to_node", idx)?;
                let speed = props
                    .get("speed_limit_kmh")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| {
                        parse_err(file_label, idx, "missing numeric property \"speed_limit_kmh\"")
                    })?;
                let oneway = props.get("oneway").and_then(Value::as_bool).ok_or_else(|| {
                    parse_err(file_label, idx, "missing boolean property \"oneway\"")
                })?;
                let length_m = props.get("length_m").and_then(Value::as_f64);

                for (node, pos) in [(from_node, geometry[0]), (to_node, *geometry.last().unwrap())]
                {
                    match inferred.get(&node) {
                        Some(prev) if haversine(prev, &pos) > NODE_COORD_TOL_M => {
                            return Err(Error::Validation(format!(
                                "node {node} has conflicting coordinates across edges"
                            )));
                        }
                        Some(_) => {}
                        None => {
                            inferred.insert(node, pos);
                        }
                    }
                }
                edges.push(EdgeSpec {
                    id: edge_id,
                    from_node,
                    to_node,
                    length_m,
                    speed_limit_kmh: speed,
                    oneway,
                    geometry,
                });
            }
            other => {
                return Err(parse_err(
                    file_label,
                    idx,
                    format!("unsupported geometry type {other:?}"),
                ));
            }
        }
    }

    // With explicit Point declarations the declared set is authoritative;
    // otherwise nodes are taken from the LineString endpoints.
    let nodes: Vec<(NodeId, f64, f64)> = if any_point_decl {
        for (node, pos) in &inferred {
            match declared.get(node) {
                None => {
                    return Err(Error::Validation(format!(
                        "edge references missing node {node}"
                    )))
                }
                Some(decl) if haversine(decl, pos) > NODE_COORD_TOL_M => {
                    return Err(Error::Validation(format!(
                        "node {node}: endpoint disagrees with declared coordinate"
                    )))
                }
                Some(_) => {}
            }
        }
        declared
            .iter()
            .map(|(id, p)| (*id, p.lat, p.lon))
            .collect()
    } else {
        inferred
            .iter()
            .map(|(id, p)| (*id, p.lat, p.lon))
            .collect()
    };

    RoadNetwork::from_parts(nodes, edges)
}

fn coord_of(v: &Value, file: &str, idx: usize) -> Result<LatLon> {
    let arr = v
        .as_array()
        .filter(|a| a.len() >= 2)
        .ok_or_else(|| parse_err(file, idx, "position must be a [lon, lat] array"))?;
    let lon = arr[0]
        .as_f64()
        .ok_or_else(|| parse_err(file, idx, "non-numeric longitude"))?;
    let lat = arr[1]
        .as_f64()
        .ok_or_else(|| parse_err(file, idx, "non-numeric latitude"))?;
    LatLon::new(lat, lon).map_err(|e| Error::Validation(format!("feature {idx}: {e}")))
}

/// Serializes a network back to the file schema. Used by the synthetic
/// scenario generator and handy for fixtures.
pub fn write_network_geojson(net: &RoadNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let features: Vec<Value> = net
        .edges()
        .iter()
        .map(|e| {
            let coords: Vec<Value> = e
                .geometry
                .iter()
                .map(|p| json!([p.lon, p.lat]))
                .collect();
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "edge_id": e.id,
                    "from_node": net.node(e.from).id,
                    "to_node": net.node(e.to).id,
                    "speed_limit_kmh": e.speed_limit_kmh,
                    "oneway": e.oneway,
                    "length_m": e.length_m,
                }
            })
        })
        .collect();
    let doc = json!({"type": "FeatureCollection", "features": features});
    std::fs::write(path, serde_json::to_string(&doc).expect("serializable"))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_feature(id: i64, from: i64, to: i64, coords: &str, extra: &str) -> String {
        format!(
            r#"{{"type":"Feature","geometry":{{"type":"LineString","coordinates":{coords}}},
              "properties":{{"edge_id":{id},"from_node":{from},"to_node":{to},
              "speed_limit_kmh":50.0,"oneway":false{extra}}}}}"#
        )
    }

    #[test]
    fn minimal_two_node_network_loads() {
        let f = edge_feature(1, 10, 20, "[[2.35,48.85],[2.351,48.85]]", "");
        let text = format!(r#"{{"type":"FeatureCollection","features":[{f}]}}"#);
        let net = parse_network(&text, "test").unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert!(net.edge(0).length_m > 0.0);
    }

    #[test]
    fn missing_node_declaration_is_validation_error() {
        let decl = r#"{"type":"Feature","geometry":{"type":"Point","coordinates":[2.35,48.85]},
                       "properties":{"node_id":10}}"#;
        let f = edge_feature(1, 10, 20, "[[2.35,48.85],[2.351,48.85]]", "");
        let text = format!(r#"{{"type":"FeatureCollection","features":[{decl},{f}]}}"#);
        let err = parse_network(&text, "test").unwrap_err();
        assert!(err.to_string().contains("missing node 20"), "{err}");
    }

    #[test]
    fn malformed_property_reports_feature_index() {
        let f = r#"{"type":"Feature","geometry":{"type":"LineString",
            "coordinates":[[2.35,48.85],[2.351,48.85]]},
            "properties":{"edge_id":1,"from_node":10,"to_node":20,"oneway":false}}"#;
        let text = format!(r#"{{"type":"FeatureCollection","features":[{f}]}}"#);
        let err = parse_network(&text, "net.geojson").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("speed_limit_kmh") && msg.contains("net.geojson"), "{msg}");
    }

    #[test]
    fn square_loop_total_length_matches_haversine() {
        // 4-node square, ~100 m sides.
        let a = LatLon::new(48.85, 2.35).unwrap();
        let b = crate::geo::offset_by_m(&a, 100.0, 0.0);
        let c = crate::geo::offset_by_m(&a, 100.0, 100.0);
        let d = crate::geo::offset_by_m(&a, 0.0, 100.0);
        let coord = |p: &LatLon, q: &LatLon| {
            format!("[[{},{}],[{},{}]]", p.lon, p.lat, q.lon, q.lat)
        };
        let fs = [
            edge_feature(1, 1, 2, &coord(&a, &b), ""),
            edge_feature(2, 2, 3, &coord(&b, &c), ""),
            edge_feature(3, 3, 4, &coord(&c, &d), ""),
            edge_feature(4, 4, 1, &coord(&d, &a), ""),
        ]
        .join(",");
        let text = format!(r#"{{"type":"FeatureCollection","features":[{fs}]}}"#);
        let net = parse_network(&text, "test").unwrap();
        assert_eq!(net.edge_count(), 4);
        let expect: f64 = haversine(&a, &b) + haversine(&b, &c) + haversine(&c, &d)
            + haversine(&d, &a);
        assert!((net.total_length_m() - expect).abs() < 1e-6);
    }

    #[test]
    fn explicit_length_property_is_kept() {
        let f = edge_feature(1, 10, 20, "[[2.35,48.85],[2.351,48.85]]", r#","length_m":95.0"#);
        let text = format!(r#"{{"type":"FeatureCollection","features":[{f}]}}"#);
        let net = parse_network(&text, "test").unwrap();
        assert_eq!(net.edge(0).length_m, 95.0);
    }

    #[test]
    fn round_trip_through_writer() {
        let f = edge_feature(7, 1, 2, "[[2.35,48.85],[2.352,48.851]]", "");
        let text = format!(r#"{{"type":"FeatureCollection","features":[{f}]}}"#);
        let net = parse_network(&text, "test").unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        write_network_geojson(&net, tmp.path()).unwrap();
        let reread = load_network(tmp.path()).unwrap();
        assert_eq!(reread.edge_count(), 1);
        assert_eq!(reread.edge(0).id, 7);
        assert!((reread.edge(0).length_m - net.edge(0).length_m).abs() < 1e-9);
    }
}
