//! Small dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Exchange matrix `J_m` (ones on the anti-diagonal).
pub fn exchange(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| if i + j + 1 == m { 1.0 } else { 0.0 })
}

/// Symmetric Toeplitz matrix `(values[|i-j|])` of order `m`.
pub fn toeplitz(values: &[f64], m: usize) -> DMatrix<f64> {
    assert!(values.len() >= m, "need {m} values, got {}", values.len());
    DMatrix::from_fn(m, m, |i, j| values[i.abs_diff(j)])
}

/// Induced 1-norm (max column sum).
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn matrix_norm_inf_entries(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solution of a dense linear system together with the 1-norm condition
/// number `‖A‖₁‖A⁻¹‖₁`.
#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: DVector<f64>,
    pub inverse: DMatrix<f64>,
    pub condition: f64,
}

/// LU with partial pivoting. Returns `None` when the matrix is singular to
/// working precision (zero pivot or non-finite inverse).
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Solved> {
    let lu = a.clone().lu();
    let inverse = lu.try_inverse()?;
    if inverse.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let solution = lu.solve(b)?;
    let condition = norm1(a) * norm1(&inverse);
    Some(Solved {
        solution,
        inverse,
        condition,
    })
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;

/// Spectral radius by power iteration, falling back to the full (complex)
/// eigenvalue decomposition when the iteration does not settle, which
/// happens when the dominant eigenvalues form a complex pair or `±r`.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    power_iteration(a).unwrap_or_else(|| {
        a.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    })
}

fn power_iteration(a: &DMatrix<f64>) -> Option<f64> {
    let n = a.nrows();
    // Irregular start vector to avoid landing in an invariant subspace.
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sqrt());
    x /= x.norm();
    let mut previous = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let y = a * &x;
        let r = y.norm();
        if r == 0.0 {
            return Some(0.0);
        }
        if (r - previous).abs() <= POWER_TOL * r.max(1.0) {
            // Guard against a two-cycle that happens to match once.
            let z = a * &y;
            let r2 = z.norm() / r;
            if (r2 - r).abs() <= 1e3 * POWER_TOL * r.max(1.0) {
                return Some(r);
            }
        }
        previous = r;
        x = y / r;
    }
    None
}
