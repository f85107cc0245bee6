//! Per-drone run metrics and their aggregation into extra-distance and
//! wait-time distributions.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Slack for the inclusive "at most one second" wait comparison; wait
/// totals are sums of `dt` and carry rounding noise.
const WAIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneMetrics {
    pub id: u32,
    pub straight_line: f64,
    pub path_length: f64,
    pub extra_distance: f64,
    pub wait_total: f64,
    pub avoided: bool,
    pub waited: bool,
    pub arrived: bool,
    pub arrival_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub drones: Vec<DroneMetrics>,
}

impl RunMetrics {
    pub fn all_arrived(&self) -> bool {
        self.drones.iter().all(|d| d.arrived)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.drones.is_empty() {
            wtr.write_record([
                "id",
                "straight_line",
                "path_length",
                "extra_distance",
                "wait_total",
                "avoided",
                "waited",
                "arrived",
                "arrival_time",
            ])?;
        }
        for d in &self.drones {
            wtr.serialize(d)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let drones = rdr.deserialize().collect::<std::result::Result<Vec<DroneMetrics>, _>>()?;
        Ok(Self { drones })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Which population a histogram describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramKind {
    /// Extra moving distance of drones that ever detoured.
    ExtraDistance,
    /// Total wait time of drones that ever waited.
    WaitTime,
}

impl HistogramKind {
    pub fn label(self) -> &'static str {
        match self {
            HistogramKind::ExtraDistance => "extra_distance (avoiding drones)",
            HistogramKind::WaitTime => "wait_total (waiting drones)",
        }
    }

    pub fn summary_label(self) -> &'static str {
        match self {
            HistogramKind::ExtraDistance => "fraction_below_1m",
            HistogramKind::WaitTime => "fraction_below_1s",
        }
    }

    pub fn values(self, runs: &[RunMetrics]) -> Vec<f64> {
        runs.iter()
            .flat_map(|r| r.drones.iter())
            .filter_map(|d| match self {
                HistogramKind::ExtraDistance => d.avoided.then_some(d.extra_distance),
                HistogramKind::WaitTime => d.waited.then_some(d.wait_total),
            })
            .collect()
    }

    /// Share of the population below one unit: extra distance `< 1 m`,
    /// wait time `<= 1 s`. `None` for an empty population.
    pub fn fraction_below_one(self, runs: &[RunMetrics]) -> Option<f64> {
        let values = self.values(runs);
        if values.is_empty() {
            return None;
        }
        let hits = values
            .iter()
            .filter(|&&v| match self {
                HistogramKind::ExtraDistance => v < 1.0,
                HistogramKind::WaitTime => v <= 1.0 + WAIT_EPS,
            })
            .count();
        Some(hits as f64 / values.len() as f64)
    }

    pub fn histogram(self, runs: &[RunMetrics], bin_width: f64) -> Result<Histogram> {
        Histogram::from_values(&self.values(runs), bin_width, self.label())
    }
}

/// Right-open bins `[k w, (k + 1) w)` starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub population: String,
}

impl Histogram {
    /// Negative values (rounding noise on zero extra distance) land in the first bin.
    pub fn from_values(values: &[f64], bin_width: f64, population: &str) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(invalid(format!("bin width must be > 0, got {bin_width}")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite histogram value {bad}")));
        }
        let population = population.to_string();
        let Some(max) = values.iter().copied().map(|v| v.max(0.0)).reduce(f64::max) else {
            return Ok(Self { bin_edges: Vec::new(), counts: Vec::new(), population });
        };
        let bins = bin_index(max, bin_width) + 1;
        let mut counts = vec![0u64; bins];
        for &v in values {
            counts[bin_index(v.max(0.0), bin_width).min(bins - 1)] += 1;
        }
        let bin_edges = (0..=bins).map(|k| k as f64 * bin_width).collect();
        Ok(Self { bin_edges, counts, population })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `bin_lo,bin_hi,count` rows followed by one `label,value` summary row.
    pub fn write_csv<W: Write>(&self, w: W, summary_label: &str, fraction: Option<f64>) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        wtr.write_record(["bin_lo", "bin_hi", "count"])?;
        for (k, count) in self.counts.iter().enumerate() {
            wtr.write_record([self.bin_edges[k].to_string(), self.bin_edges[k + 1].to_string(), count.to_string()])?;
        }
        let value = fraction.map(|f| f.to_string()).unwrap_or_default();
        wtr.write_record([summary_label, value.as_str()])?;
        wtr.flush()?;
        Ok(())
    }
}

fn bin_index(v: f64, width: f64) -> usize {
    (v / width).floor() as usize
}

pub fn extra_distance_histogram(runs: &[RunMetrics], bin_width: f64) -> Result<Histogram> {
    HistogramKind::ExtraDistance.histogram(runs, bin_width)
}

pub fn wait_time_histogram(runs: &[RunMetrics], bin_width: f64) -> Result<Histogram> {
    HistogramKind::WaitTime.histogram(runs, bin_width)
}
