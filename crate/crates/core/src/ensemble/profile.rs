use rand::seq::SliceRandom;

use super::EnsembleError;
use crate::rng::stream;

/// Variances `sigma^2_{ji}` of an `N x n` ensemble, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl VarianceProfile {
    /// Entries below machine epsilon are stored as exact zeros.
    pub fn new(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self, EnsembleError> {
        if data.len() != rows * cols {
            return Err(EnsembleError::InvalidInput(format!(
                "profile has {} entries, shape {rows}x{cols} needs {}",
                data.len(),
                rows * cols
            )));
        }
        for (k, v) in data.iter_mut().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(EnsembleError::InvalidInput(format!(
                    "profile entry ({}, {}) = {v} must be finite and nonnegative",
                    k / cols,
                    k % cols
                )));
            }
            if *v < f64::EPSILON {
                *v = 0.0;
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self, EnsembleError> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, EnsembleError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(EnsembleError::InvalidInput(format!("profile row {bad} has the wrong length")));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `sum_j sigma^2_{ji}` for every column `i`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols.max(1)) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// `|{i : sigma^2_{ji} >= 1}|` for every row `j`.
    pub fn unit_counts(&self) -> Vec<usize> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().filter(|&&v| v >= 1.0).count())
            .collect()
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let data = perm.iter().flat_map(|&j| self.data[j * self.cols..(j + 1) * self.cols].iter().copied()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.rows {
            data.extend(perm.iter().map(|&i| self.get(j, i)));
        }
        Self { rows: self.rows, cols: self.cols, data }
    }
}

/// Smallest integer `k` with `k >= x` in the same floating-point comparison
/// the condition checks use.
pub(crate) fn count_threshold(x: f64) -> usize {
    x.max(0.0).ceil() as usize
}

/// Whether a 0/1 unit-variance profile with exactly `per_row` ones in each row
/// can give every column at least `per_col` ones.
///
/// Rows contribute `rows * per_row` ones in total, so `cols * per_col` of them
/// are needed; a cyclic layout balances the column counts to within one, which
/// makes the counting bound sufficient as well.
pub fn sparse_profile_feasible(rows: usize, cols: usize, per_row: usize, per_col: usize) -> bool {
    per_row <= cols && per_col <= rows && rows * per_row >= cols * per_col
}

/// Unit-variance profile with `ceil(row_fill * n)` ones per row, zeros elsewhere,
/// whose column sums reach `column_target^2 * N`.
///
/// Zeros are laid out cyclically so that column counts differ by at most one;
/// `seed` then shuffles rows and columns. The result is checked against
/// conditions (iii) and (iv) before it is returned.
pub fn make_sparse_profile(
    rows: usize,
    cols: usize,
    row_fill: f64,
    column_target: f64,
    seed: u64,
) -> Result<VarianceProfile, EnsembleError> {
    if rows < cols || cols == 0 {
        return Err(EnsembleError::InvalidInput(format!("need N >= n >= 1, got {rows}x{cols}")));
    }
    if !(row_fill > 0.0 && row_fill <= 1.0) {
        return Err(EnsembleError::InvalidInput(format!("row fill a4 = {row_fill} must lie in (0, 1]")));
    }
    if !(column_target > 0.0 && column_target.is_finite()) {
        return Err(EnsembleError::InvalidInput(format!("column target a3 = {column_target} must be positive")));
    }
    if column_target > 1.0 {
        return Err(EnsembleError::Infeasible {
            condition: "iii",
            detail: format!("a3 = {column_target} > 1 cannot be reached with unit variances"),
        });
    }
    let per_row = count_threshold(row_fill * cols as f64);
    let per_col = count_threshold(column_target * column_target * rows as f64);
    if !sparse_profile_feasible(rows, cols, per_row, per_col) {
        return Err(EnsembleError::Infeasible {
            condition: "iii",
            detail: format!(
                "{rows} rows with {per_row} unit entries each cannot give {cols} columns {per_col} unit entries each"
            ),
        });
    }

    let zeros = cols - per_row;
    let mut data = vec![1.0; rows * cols];
    for j in 0..rows {
        for t in 0..zeros {
            data[j * cols + (j * zeros + t) % cols] = 0.0;
        }
    }
    let mut rng = stream(seed, 0);
    let mut row_perm: Vec<usize> = (0..rows).collect();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    row_perm.shuffle(&mut rng);
    col_perm.shuffle(&mut rng);
    let profile = VarianceProfile::new(rows, cols, data)?.permute_rows(&row_perm).permute_cols(&col_perm);

    let sums = profile.column_sums();
    let min_sum = sums.iter().copied().fold(f64::INFINITY, f64::min);
    if min_sum < column_target * column_target * rows as f64 {
        return Err(EnsembleError::Infeasible { condition: "iii", detail: format!("minimum column sum {min_sum}") });
    }
    let min_count = profile.unit_counts().into_iter().min().unwrap_or(0);
    if (min_count as f64) < row_fill * cols as f64 {
        return Err(EnsembleError::Infeasible { condition: "iv", detail: format!("minimum row count {min_count}") });
    }
    Ok(profile)
}
