use super::SpectraError;
use crate::matrix::{dot, norm2, Matrix};

/// Columns whose remaining norm falls below `RANK_TOL * |M|_F` are treated as
/// linearly dependent on the ones already eliminated.
pub const RANK_TOL: f64 = 1e-10;

/// Euclidean distance from column `k` to the span of the other columns.
///
/// Householder QR with column pivoting on the other columns; the distance is
/// the norm of the part of `X_k` left after the `rank` reflections.
pub fn column_distance(m: &Matrix, k: usize) -> Result<f64, SpectraError> {
    if m.cols() < 2 {
        return Err(SpectraError::InvalidInput(format!("need at least 2 columns, got {}", m.cols())));
    }
    if k >= m.cols() {
        return Err(SpectraError::InvalidInput(format!("column {k} out of range for {} columns", m.cols())));
    }
    if !m.is_finite() {
        return Err(SpectraError::InvalidInput("matrix has non-finite entries".into()));
    }
    let rows = m.rows();
    let mut target = m.column(k);
    let mut others: Vec<Vec<f64>> = (0..m.cols()).filter(|&i| i != k).map(|i| m.column(i)).collect();
    let tol = RANK_TOL * m.frobenius_norm_sq().sqrt();

    let mut rank = 0;
    for step in 0..rows.min(others.len()) {
        let (pivot, pivot_norm) = others[step..]
            .iter()
            .enumerate()
            .map(|(offset, c)| (step + offset, norm2(&c[step..])))
            .fold((step, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_norm <= tol {
            break;
        }
        others.swap(step, pivot);

        // Reflector v maps the pivot column's tail onto -sign(x_0) |x| e_0.
        let mut v = others[step][step..].to_vec();
        v[0] += if v[0] >= 0.0 { pivot_norm } else { -pivot_norm };
        let vv = dot(&v, &v);
        let reflect = |x: &mut [f64]| {
            let scale = 2.0 * dot(&v, x) / vv;
            x.iter_mut().zip(&v).for_each(|(xi, vi)| *xi -= scale * vi);
        };
        for col in others.iter_mut().skip(step) {
            reflect(&mut col[step..]);
        }
        reflect(&mut target[step..]);
        rank += 1;
    }
    Ok(norm2(&target[rank..]))
}
