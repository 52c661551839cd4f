use serde::Serialize;

use super::family::moment_bound;
use super::spec::EnsembleSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub passes: bool,
    /// Entry with the largest `E|xi|^r`, `(row, col)`.
    pub worst_entry: (usize, usize),
    pub worst_moment: f64,
    /// `mu^r`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnCheck {
    pub passes: bool,
    pub column_sums: Vec<f64>,
    pub min: f64,
    /// `a3^2 N`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowCheck {
    pub passes: bool,
    pub row_counts: Vec<usize>,
    pub min: usize,
    /// `a4 n`, compared as a real number.
    pub threshold: f64,
}

/// Analytic verdicts on conditions (i), (iii), (iv). Condition (ii) is an
/// operator-norm tail assumption and is only ever estimated by Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub cond_i: MomentCheck,
    pub cond_ii: &'static str,
    pub cond_iii: ColumnCheck,
    pub cond_iv: RowCheck,
}

impl ConditionReport {
    pub fn analytic_pass(&self) -> bool {
        self.cond_i.passes && self.cond_iii.passes && self.cond_iv.passes
    }
}

pub fn check_conditions(spec: &EnsembleSpec) -> ConditionReport {
    let p = spec.params();
    let threshold = p.mu.powf(p.r);
    let mut worst_entry = (0, 0);
    let mut worst_moment = f64::NEG_INFINITY;
    for j in 0..spec.rows() {
        for i in 0..spec.cols() {
            // Families built from a validated spec are always valid.
            let m = moment_bound(&spec.family_at(j, i), p.r).expect("validated family");
            if m > worst_moment {
                worst_moment = m;
                worst_entry = (j, i);
            }
        }
    }

    let column_sums = spec.profile().column_sums();
    let min_sum = column_sums.iter().copied().fold(f64::INFINITY, f64::min);
    let col_threshold = p.a3 * p.a3 * spec.rows() as f64;

    let row_counts = spec.profile().unit_counts();
    let min_count = row_counts.iter().copied().min().unwrap_or(0);
    let row_threshold = p.a4 * spec.cols() as f64;

    ConditionReport {
        cond_i: MomentCheck { passes: worst_moment <= threshold, worst_entry, worst_moment, threshold },
        cond_ii: "empirical",
        cond_iii: ColumnCheck { passes: min_sum >= col_threshold, column_sums, min: min_sum, threshold: col_threshold },
        cond_iv: RowCheck {
            passes: min_count as f64 >= row_threshold,
            row_counts,
            min: min_count,
            threshold: row_threshold,
        },
    }
}
