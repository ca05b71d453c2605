//! Dense linear algebra used throughout: operator norms, checked inversion
//! and the matrix exponential.

use nalgebra::{DMatrix, DVector};

/// Condition numbers above this are treated as numerical breakdown.
pub const KAPPA_MAX: f64 = 1e12;

/// Operator norm induced by the Euclidean vector norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.singular_values().max()
}

/// Maximum absolute column sum.
pub fn norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Result of a checked inversion.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub matrix: DMatrix<f64>,
    /// 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
    pub cond: f64,
}

impl Inverse {
    /// Residual tolerance for `‖A·A⁻¹ − 1‖`: `100·ε·κ`.
    pub fn tol_solve(&self) -> f64 {
        100.0 * f64::EPSILON * self.cond
    }
}

/// Inverts `m` through an LU factorization with partial pivoting.
///
/// Returns `None` when the factorization is singular or the condition
/// estimate exceeds [`KAPPA_MAX`]; the caller attaches the time of failure.
pub fn checked_inverse(m: &DMatrix<f64>) -> std::result::Result<Inverse, f64> {
    let inv = match m.clone().lu().try_inverse() {
        Some(inv) => inv,
        None => return Err(f64::INFINITY),
    };
    let cond = norm_1(m) * norm_1(&inv);
    if !cond.is_finite() || cond > KAPPA_MAX {
        return Err(cond);
    }
    Ok(Inverse { matrix: inv, cond })
}

// Padé(13,13) numerator coefficients for exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a Padé(13,13) kernel.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].exp());
    }

    let norm = norm_1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    let b = &PADE13;
    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let w2 = &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1];
    let u = &scaled * (&a6 * w1 + w2);

    let z1 = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let z2 = &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    let v = &a6 * z1 + z2;

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");

    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Composite Simpson rule for a vector-valued integrand on `[a, b]`.
///
/// `panels` is rounded up to an even count.
pub fn simpson<F>(a: f64, b: f64, panels: usize, mut f: F) -> DVector<f64>
where
    F: FnMut(f64) -> DVector<f64>,
{
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Truncated Taylor series; only trustworthy for small norms.
    fn expm_taylor(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_for_small_norm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -0.3, 0.2, 0.05, -0.4, 0.0, 0.3, 0.1, -0.2]);
        let diff = (expm(&a) - expm_taylor(&a, 30)).abs().max();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn expm_symmetric_matches_eigendecomposition() {
        let a = DMatrix::from_row_slice(3, 3, &[-40.0, 3.0, 1.0, 3.0, -12.0, 2.0, 1.0, 2.0, -7.5]);
        let eig = a.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::exp));
        let oracle = &eig.eigenvectors * d * eig.eigenvectors.transpose();
        let diff = (expm(&a) - &oracle).abs().max();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn expm_rotation_generator() {
        let theta = 2.5;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 0)], theta.cos(), epsilon = 1e-13);
        assert_relative_eq!(e[(1, 0)], theta.sin(), epsilon = 1e-13);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&DMatrix::zeros(4, 4));
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn singular_inverse_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(checked_inverse(&m).is_err());
    }

    #[test]
    fn ill_conditioned_inverse_is_rejected() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-13]));
        let err = checked_inverse(&m).unwrap_err();
        assert!(err > KAPPA_MAX);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -3.0, 2.0]));
        assert_relative_eq!(spectral_norm(&m), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(0.0, 1.0, 8, |t| DVector::from_vec(vec![t * t * t, 1.0]));
        assert_relative_eq!(v[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-15);
    }
}
