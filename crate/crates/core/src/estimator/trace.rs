use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::geo::LatLon;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Seconds, any epoch.
    pub timestamp: f64,
    pub pos: LatLon,
}

/// Time-ordered location samples of one trip.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    trip_id: String,
    points: Vec<TracePoint>,
}

impl Trace {
    pub fn new(trip_id: impl Into<String>, points: Vec<TracePoint>) -> Result<Self> {
        let trip_id = trip_id.into();
        if points.is_empty() {
            return Err(Error::Parse(format!("trip {trip_id} has no points")));
        }
        for p in &points {
            if !(p.timestamp.is_finite() && p.pos.lat.is_finite() && p.pos.lon.is_finite()) {
                return Err(Error::Parse(format!("trip {trip_id} has a non-finite point")));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::Parse(format!(
                "trip {trip_id}: timestamps must be strictly increasing ({} then {})",
                w[0].timestamp, w[1].timestamp
            )));
        }
        Ok(Self { trip_id, points })
    }

    pub fn trip_id(&self) -> &str {
        &self.trip_id
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    trip_id: String,
    timestamp: f64,
    lat: f64,
    lon: f64,
}

/// Reads `trip_id,timestamp,lat,lon` rows. Trips keep the order of their
/// first appearance and points keep file order.
pub fn read_traces<R: Read>(reader: R) -> Result<Vec<Trace>> {
    let mut order: Vec<String> = Vec::new();
    let mut points: HashMap<String, Vec<TracePoint>> = HashMap::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let r: Row = row?;
        let entry = points.entry(r.trip_id.clone()).or_insert_with(|| {
            order.push(r.trip_id.clone());
            Vec::new()
        });
        entry.push(TracePoint { timestamp: r.timestamp, pos: LatLon::new(r.lat, r.lon) });
    }
    order
        .into_iter()
        .map(|id| {
            let pts = points.remove(&id).unwrap_or_default();
            Trace::new(id, pts)
        })
        .collect()
}

pub fn write_traces_csv<W: Write>(traces: &[Trace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in traces {
        for p in t.points() {
            w.serialize(Row { trip_id: t.trip_id.clone(), timestamp: p.timestamp, lat: p.pos.lat, lon: p.pos.lon })?;
        }
    }
    w.flush()?;
    Ok(())
}
