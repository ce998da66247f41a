//! Small numerical kernels shared across modules.

/// Compensated (Neumaier) accumulator.
///
/// Used wherever per-path results are reduced, so that the total does not
/// depend on how the work was split.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().total()
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert!(n == 0 || (lower.len() == n - 1 && upper.len() == n - 1));
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return None;
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Largest absolute value, zero for an empty slice.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
    }

    #[test]
    fn thomas_matches_dense_solution() {
        // 4x4 system with known solution x = [1, -2, 3, 0.5].
        let lower = [1.0, -1.0, 2.0];
        let diag = [4.0, 5.0, 6.0, 7.0];
        let upper = [0.5, 1.5, -2.0];
        let x = [1.0, -2.0, 3.0, 0.5];
        let rhs = [
            diag[0] * x[0] + upper[0] * x[1],
            lower[0] * x[0] + diag[1] * x[1] + upper[1] * x[2],
            lower[1] * x[1] + diag[2] * x[2] + upper[2] * x[3],
            lower[2] * x[2] + diag[3] * x[3],
        ];
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in sol.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn thomas_reports_zero_pivot() {
        assert!(solve_tridiagonal(&[], &[0.0], &[], &[1.0]).is_none());
    }
}
