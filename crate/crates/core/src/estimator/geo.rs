//! Equirectangular geometry, adequate at city scale.

use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

/// Local planar coordinates in meters around a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    origin: LatLon,
    cos_lat: f64,
}

impl Projection {
    pub fn new(origin: LatLon) -> Self {
        Self { origin, cos_lat: origin.lat.to_radians().cos() }
    }

    pub fn to_xy(&self, p: LatLon) -> [f64; 2] {
        [
            (p.lon - self.origin.lon).to_radians() * self.cos_lat * EARTH_RADIUS_M,
            (p.lat - self.origin.lat).to_radians() * EARTH_RADIUS_M,
        ]
    }

    pub fn to_latlon(&self, xy: [f64; 2]) -> LatLon {
        LatLon {
            lat: self.origin.lat + (xy[1] / EARTH_RADIUS_M).to_degrees(),
            lon: self.origin.lon + (xy[0] / (EARTH_RADIUS_M * self.cos_lat)).to_degrees(),
        }
    }
}

/// Equirectangular distance in meters.
pub fn distance_m(a: LatLon, b: LatLon) -> f64 {
    let mean_lat = ((a.lat + b.lat) / 2.0).to_radians();
    let dx = (b.lon - a.lon).to_radians() * mean_lat.cos();
    let dy = (b.lat - a.lat).to_radians();
    EARTH_RADIUS_M * dx.hypot(dy)
}

pub fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Distance from `p` to segment `ab` and the clamped position `t ∈ [0, 1]`
/// of the closest point.
pub fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, f64) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (planar_distance(p, q), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_of_latitude() {
        let d = distance_m(LatLon::new(1.0, 103.0), LatLon::new(2.0, 103.0));
        assert!((d - 111_195.0).abs() < 5.0);
    }

    #[test]
    fn projection_round_trip() {
        let proj = Projection::new(LatLon::new(1.3, 103.8));
        let p = LatLon::new(1.31, 103.79);
        let back = proj.to_latlon(proj.to_xy(p));
        assert!((back.lat - p.lat).abs() < 1e-12 && (back.lon - p.lon).abs() < 1e-12);
        let xy = proj.to_xy(p);
        let planar = xy[0].hypot(xy[1]);
        let direct = distance_m(LatLon::new(1.3, 103.8), p);
        assert!((planar - direct).abs() / direct < 1e-3);
    }

    #[test]
    fn segment_projection() {
        let (d, t) = point_segment([5.0, 3.0], [0.0, 0.0], [10.0, 0.0]);
        assert!((d - 3.0).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
        let (d, t) = point_segment([-4.0, 3.0], [0.0, 0.0], [10.0, 0.0]);
        assert!((d - 5.0).abs() < 1e-12 && t == 0.0);
    }
}
