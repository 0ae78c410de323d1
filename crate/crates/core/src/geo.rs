//! Great-circle geometry primitives on a spherical Earth.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spherical Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Meters per degree of latitude (and of longitude at the equator).
pub const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

/// A validated WGS-style coordinate in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Input(format!("latitude {lat} out of [-90, 90]")));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::Input(format!("longitude {lon} out of [-180, 180]")));
        }
        Ok(LatLon { lat, lon })
    }
}

/// Great-circle distance in meters between two coordinates.
pub fn haversine(a: &LatLon, b: &LatLon) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * s.sqrt().min(1.0).asin()
}

/// Range-checked wrapper around [`haversine`] for raw degree inputs.
pub fn haversine_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64> {
    let a = LatLon::new(lat1, lon1)?;
    let b = LatLon::new(lat2, lon2)?;
    Ok(haversine(&a, &b))
}

/// Initial great-circle bearing from `a` to `b`, degrees in [0, 360).
pub fn bearing_deg(a: &LatLon, b: &LatLon) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    let deg = y.atan2(x).to_degrees();
    (deg + 360.0) % 360.0
}

/// Absolute angular difference between two bearings, in [0, 180].
pub fn bearing_delta_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Local equirectangular projection: meters east/north of `origin`.
/// Accurate for the sub-kilometer scales snapping works at.
pub fn to_local_m(p: &LatLon, origin: &LatLon) -> (f64, f64) {
    let x = (p.lon - origin.lon) * M_PER_DEG * origin.lat.to_radians().cos();
    let y = (p.lat - origin.lat) * M_PER_DEG;
    (x, y)
}

/// Moves a coordinate by the given local offsets in meters.
pub fn offset_by_m(p: &LatLon, east_m: f64, north_m: f64) -> LatLon {
    LatLon {
        lat: p.lat + north_m / M_PER_DEG,
        lon: p.lon + east_m / (M_PER_DEG * p.lat.to_radians().cos()),
    }
}

/// Projects `fix` onto the segment `a`-`b`.
///
/// Returns `(t, snapped, distance_m)` where `t` in [0, 1] is the position
/// along the segment (interpolated in coordinate space) and `distance_m` is
/// the great-circle distance from the fix to the snapped position.
pub fn project_onto_segment(fix: &LatLon, a: &LatLon, b: &LatLon) -> (f64, LatLon, f64) {
    let (ax, ay) = to_local_m(a, fix);
    let (bx, by) = to_local_m(b, fix);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let snapped = LatLon {
        lat: a.lat + t * (b.lat - a.lat),
        lon: a.lon + t * (b.lon - a.lon),
    };
    let dist = haversine(fix, &snapped);
    (t, snapped, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn haversine_identity_is_zero() {
        let p = LatLon::new(0.0, 0.0).unwrap();
        assert_eq!(haversine(&p, &p), 0.0);
    }

    #[test]
    fn haversine_one_degree_arc_on_equator() {
        // pi * R / 180
        let d = haversine_deg(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d, 111_194.9, epsilon = 0.1);
    }

    #[test]
    fn haversine_paris_fixture_matches_independent_oracle() {
        // Notre-Dame to Place de la Concorde. Expected value computed with an
        // independent spherical law-of-cosines oracle at R = 6371 km.
        let d = haversine_deg(48.8566, 2.3522, 48.8606, 2.3376).unwrap();
        let oracle = {
            let (la1, lo1) = (48.8566f64.to_radians(), 2.3522f64.to_radians());
            let (la2, lo2) = (48.8606f64.to_radians(), 2.3376f64.to_radians());
            EARTH_RADIUS_M
                * (la1.sin() * la2.sin() + la1.cos() * la2.cos() * (lo2 - lo1).cos()).acos()
        };
        assert!((d - oracle).abs() / oracle < 1e-3, "d={d} oracle={oracle}");
    }

    #[test]
    fn haversine_rejects_out_of_range() {
        assert!(haversine_deg(95.0, 0.0, 0.0, 0.0).is_err());
        assert!(haversine_deg(0.0, 181.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bearing_cardinal_directions() {
        let o = LatLon::new(0.0, 0.0).unwrap();
        let n = LatLon::new(0.1, 0.0).unwrap();
        let e = LatLon::new(0.0, 0.1).unwrap();
        assert_abs_diff_eq!(bearing_deg(&o, &n), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bearing_deg(&o, &e), 90.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_perpendicular_distance() {
        // Straight ~200 m east-west segment, fix 10 m north of its middle.
        let a = LatLon::new(48.85, 2.35).unwrap();
        let b = offset_by_m(&a, 200.0, 0.0);
        let mid = offset_by_m(&a, 100.0, 10.0);
        let (t, _, dist) = project_onto_segment(&mid, &a, &b);
        assert_abs_diff_eq!(dist, 10.0, epsilon = 0.05);
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn haversine_symmetry(lat1 in -89.0..89.0f64, lon1 in -179.0..179.0f64,
                              lat2 in -89.0..89.0f64, lon2 in -179.0..179.0f64) {
            let a = LatLon::new(lat1, lon1).unwrap();
            let b = LatLon::new(lat2, lon2).unwrap();
            let ab = haversine(&a, &b);
            let ba = haversine(&b, &a);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        }

        #[test]
        fn haversine_triangle_inequality(lat1 in -89.0..89.0f64, lon1 in -179.0..179.0f64,
                                         lat2 in -89.0..89.0f64, lon2 in -179.0..179.0f64,
                                         lat3 in -89.0..89.0f64, lon3 in -179.0..179.0f64) {
            let a = LatLon::new(lat1, lon1).unwrap();
            let b = LatLon::new(lat2, lon2).unwrap();
            let c = LatLon::new(lat3, lon3).unwrap();
            let ab = haversine(&a, &b);
            let bc = haversine(&b, &c);
            let ac = haversine(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-9 * (ab + bc).max(1.0));
        }
    }
}
