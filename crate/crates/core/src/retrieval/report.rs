use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RuntimeStats {
    pub queries: usize,
    pub database: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub map_n: usize,
    pub map_at_n: f64,
    /// `(rank, precision)` for ranks `1..=min(map_n, database size)`.
    pub precision_at_n: Vec<(usize, f64)>,
    /// `(recall, precision)` at every rank cutoff, ascending.
    pub pr_curve: Vec<(f64, f64)>,
    pub radius: u32,
    pub precision_within_radius: f64,
    /// Optional groups x centers mean-distance matrix.
    pub distance_matrix: Option<Vec<Vec<f64>>>,
    /// Wall-clock statistics. Not serialized, so reports stay reproducible.
    pub runtime: RuntimeStats,
}

/// Writes the `center_i,center_j,mean_distance` section body.
pub(crate) fn write_matrix_rows(out: &mut String, matrix: &[Vec<f64>]) {
    out.push_str("center_i,center_j,mean_distance\n");
    for (i, row) in matrix.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{i},{j},{v}");
        }
    }
}

pub fn matrix_to_csv(matrix: &[Vec<f64>]) -> String {
    let mut out = String::new();
    write_matrix_rows(&mut out, matrix);
    out
}

impl EvalReport {
    /// CSV sections separated by blank lines: scalar `metric,value` rows,
    /// the `rank,precision` table, the `recall,precision` table and, when
    /// present, the distance matrix triples.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("metric,value\n");
        let _ = writeln!(out, "map_n,{}", self.map_n);
        let _ = writeln!(out, "map_at_n,{}", self.map_at_n);
        let _ = writeln!(out, "radius,{}", self.radius);
        let _ = writeln!(out, "precision_within_radius,{}", self.precision_within_radius);
        let _ = writeln!(out, "queries,{}", self.runtime.queries);
        let _ = writeln!(out, "database,{}", self.runtime.database);
        out.push_str("\nrank,precision\n");
        for (r, p) in &self.precision_at_n {
            let _ = writeln!(out, "{r},{p}");
        }
        out.push_str("\nrecall,precision\n");
        for (r, p) in &self.pr_curve {
            let _ = writeln!(out, "{r},{p}");
        }
        if let Some(m) = &self.distance_matrix {
            out.push('\n');
            write_matrix_rows(&mut out, m);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
