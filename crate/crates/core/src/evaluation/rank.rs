//! Mean-rank aggregation of a methods-by-datasets metric table.
//!
//! Within each dataset the methods are ranked ascending by metric value
//! (lower is better); exact ties share the average of their rank
//! positions. A method's mean rank averages its ranks over all datasets.

use serde::Serialize;

use crate::error::{Error, Result};

/// A complete methods-by-datasets matrix of finite metric values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricMatrix {
    methods: Vec<String>,
    datasets: Vec<String>,
    /// Dataset-major rows, one value per method.
    values: Vec<f64>,
}

impl MetricMatrix {
    /// `rows[d][m]` is the metric of method `m` on dataset `d`. Every entry
    /// must be present and finite.
    pub fn new(
        methods: Vec<String>,
        datasets: Vec<String>,
        rows: &[Vec<f64>],
    ) -> Result<MetricMatrix> {
        if methods.is_empty() || datasets.is_empty() {
            return Err(Error::MetricsInput(
                "rank table needs at least one method and one dataset".into(),
            ));
        }
        if rows.len() != datasets.len() {
            return Err(Error::MetricsInput(format!(
                "{} datasets but {} rows",
                datasets.len(),
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(methods.len() * datasets.len());
        for (d, row) in rows.iter().enumerate() {
            if row.len() != methods.len() {
                return Err(Error::MetricsInput(format!(
                    "dataset {:?} has {} entries, expected {}",
                    datasets[d],
                    row.len(),
                    methods.len()
                )));
            }
            for (m, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::MetricsInput(format!(
                        "missing or non-finite entry for method {:?} on dataset {:?}",
                        methods[m], datasets[d]
                    )));
                }
                values.push(v);
            }
        }
        Ok(MetricMatrix {
            methods,
            datasets,
            values,
        })
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn value(&self, dataset: usize, method: usize) -> f64 {
        self.values[dataset * self.methods.len() + method]
    }

    fn row(&self, dataset: usize) -> &[f64] {
        let w = self.methods.len();
        &self.values[dataset * w..(dataset + 1) * w]
    }
}

/// Per-dataset ranks and per-method mean ranks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `ranks[d][m]`, each row a permutation of 1..#methods up to averaged
    /// ties.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
}

impl RankTable {
    /// Delimiter-separated text: a header row, one rank row per dataset,
    /// and a final mean-rank row.
    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = String::new();
        out.push_str("dataset");
        for m in &self.methods {
            out.push(sep);
            out.push_str(m);
        }
        out.push('\n');
        for (d, row) in self.ranks.iter().enumerate() {
            out.push_str(&self.datasets[d]);
            for r in row {
                out.push(sep);
                out.push_str(&r.to_string());
            }
            out.push('\n');
        }
        out.push_str("mean_rank");
        for r in &self.mean_ranks {
            out.push(sep);
            out.push_str(&format!("{r:.2}"));
        }
        out.push('\n');
        out
    }
}

/// Ascending ranks with averaged ties: positions s..e of the sorted order
/// all receive (s + e + 1) / 2, counting from 1.
fn rank_ascending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut s = 0;
    while s < order.len() {
        let mut e = s + 1;
        while e < order.len() && values[order[e]] == values[order[s]] {
            e += 1;
        }
        let avg = (s + e + 1) as f64 / 2.0;
        for &i in &order[s..e] {
            ranks[i] = avg;
        }
        s = e;
    }
    ranks
}

/// Ranks every dataset column of `table` (lower metric is better) and
/// averages each method's ranks over the datasets.
pub fn mean_rank(table: &MetricMatrix) -> RankTable {
    let ranks: Vec<Vec<f64>> = (0..table.datasets.len())
        .map(|d| rank_ascending(table.row(d)))
        .collect();
    let n_datasets = table.datasets.len() as f64;
    let mean_ranks = (0..table.methods.len())
        .map(|m| ranks.iter().map(|row| row[m]).sum::<f64>() / n_datasets)
        .collect();
    RankTable {
        methods: table.methods.clone(),
        datasets: table.datasets.clone(),
        ranks,
        mean_ranks,
    }
}
