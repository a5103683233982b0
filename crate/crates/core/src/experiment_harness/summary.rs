use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ResultBundle;
use crate::error::{Error, Result};
use crate::stats::{mean, median, std_err};

/// Late-time window for saturation values.
pub const DEFAULT_WINDOW: [f64; 2] = [15.0, 20.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Mean,
    Median,
}

/// Per-sample time average over the window, reduced across samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub n_a: usize,
    pub column: String,
    pub value: f64,
    /// Standard error of the mean over samples.
    pub std_err: f64,
    pub samples: usize,
}

/// `(2 n_A - n, log F_A)` for the collapse plot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub n: usize,
    pub n_a: usize,
    pub x: i64,
    pub log_value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub reduction: Reduction,
    pub window: [f64; 2],
    pub rows: Vec<SummaryRow>,
    pub collapse: Vec<CollapsePoint>,
}

impl Summary {
    pub fn get(&self, n: usize, n_a: usize, column: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.n == n && r.n_a == n_a && r.column == column)
    }
}

/// Rows with a time outside `window` are dropped; time-independent rows
/// are always kept. NaN entries are skipped.
pub fn summarize(bundle: &ResultBundle, reduction: Reduction, window: [f64; 2]) -> Result<Summary> {
    if !(window[0] <= window[1]) {
        return Err(Error::InvalidArgument(format!("window {window:?} is empty")));
    }
    // (n, n_a) -> stream -> per-column sums and counts
    let mut groups: BTreeMap<(usize, usize), BTreeMap<u64, Vec<(f64, usize)>>> = BTreeMap::new();
    let nc = bundle.columns.len();
    for r in &bundle.rows {
        if r.t.is_some_and(|t| t < window[0] - 1e-12 || t > window[1] + 1e-12) {
            continue;
        }
        let acc = groups
            .entry((r.n, r.n_a))
            .or_default()
            .entry(r.stream)
            .or_insert_with(|| vec![(0.0, 0); nc]);
        for (a, &v) in acc.iter_mut().zip(&r.values) {
            if !v.is_nan() {
                a.0 += v;
                a.1 += 1;
            }
        }
    }
    let mut rows = Vec::new();
    for (&(n, n_a), per_sample) in &groups {
        for (c, name) in bundle.columns.iter().enumerate() {
            let xs: Vec<f64> = per_sample
                .values()
                .filter(|acc| acc[c].1 > 0)
                .map(|acc| acc[c].0 / acc[c].1 as f64)
                .collect();
            if xs.is_empty() {
                continue;
            }
            let value = match reduction {
                Reduction::Mean => mean(&xs),
                Reduction::Median => median(&xs),
            };
            rows.push(SummaryRow {
                n,
                n_a,
                column: name.clone(),
                value,
                std_err: if xs.len() > 1 { std_err(&xs) } else { f64::NAN },
                samples: xs.len(),
            });
        }
    }
    let collapse = rows
        .iter()
        .filter(|r| r.column == "f_a" && r.value > 0.0)
        .map(|r| CollapsePoint {
            n: r.n,
            n_a: r.n_a,
            x: 2 * r.n_a as i64 - r.n as i64,
            log_value: r.value.ln(),
        })
        .collect();
    Ok(Summary {
        reduction,
        window,
        rows,
        collapse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment_harness::{ExperimentConfig, ExperimentId, Row, RunMeta, FORMAT_VERSION};

    fn bundle(rows: Vec<Row>) -> ResultBundle {
        ResultBundle {
            format_version: FORMAT_VERSION,
            config: ExperimentConfig::new(ExperimentId::QfiScan),
            columns: vec!["f_a".into()],
            rows,
            nested: vec![],
            meta: RunMeta {
                started_unix_ms: 0,
                wall_seconds: 0.0,
                threads: 1,
                version: String::new(),
                tasks: 0,
                resumed_tasks: 0,
            },
        }
    }

    fn row(n_a: usize, stream: u64, t: f64, v: f64) -> Row {
        Row {
            n: 6,
            n_a,
            sample: stream as usize,
            seed: 0,
            stream,
            t: Some(t),
            values: vec![v],
        }
    }

    #[test]
    fn constant_series_summarizes_to_itself() {
        let rows = (0..3).flat_map(|s| (0..30).map(move |k| row(2, s, k as f64, 0.7))).collect();
        let s = summarize(&bundle(rows), Reduction::Mean, DEFAULT_WINDOW).unwrap();
        let r = s.get(6, 2, "f_a").unwrap();
        assert!((r.value - 0.7).abs() < 1e-15);
        assert!(r.std_err.abs() < 1e-15);
        assert_eq!(r.samples, 3);
        assert_eq!(s.collapse[0].x, -2);
    }

    #[test]
    fn window_excludes_early_times() {
        let mut rows: Vec<Row> = (0..15).map(|k| row(1, 0, k as f64, 100.0)).collect();
        rows.extend((15..=20).map(|k| row(1, 0, k as f64, 2.0)));
        rows.push(row(1, 1, 16.0, 4.0));
        let b = bundle(rows);
        assert_eq!(summarize(&b, Reduction::Mean, DEFAULT_WINDOW).unwrap().rows[0].value, 3.0);
        assert_eq!(summarize(&b, Reduction::Median, [16.0, 16.0]).unwrap().rows[0].value, 3.0);
    }
}
