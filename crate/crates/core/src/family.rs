//! Time-dependent operator families `t ↦ A(t) = Σ_k φ_k(t)·M_k − σ·1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Inverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// `params = [c]`.
    Constant,
    /// `params = [c₀, c₁, …]`, value `Σ cᵢ tⁱ`.
    Polynomial,
    /// `params = [amplitude, frequency, phase]`, value `a·sin(ω t + φ)`.
    Sine,
    /// `params = [c]`, value `|t − c|`.
    AbsShift,
    /// `params = [c]`, value `1` for `t ≥ c` and `0` otherwise.
    Step,
    /// Piecewise-linear interpolation of `samples`.
    Sampled,
}

impl CoefficientKind {
    pub fn name(self) -> &'static str {
        match self {
            CoefficientKind::Constant => "constant",
            CoefficientKind::Polynomial => "polynomial",
            CoefficientKind::Sine => "sine",
            CoefficientKind::AbsShift => "abs_shift",
            CoefficientKind::Step => "step",
            CoefficientKind::Sampled => "sampled",
        }
    }
}

/// Scalar coefficient `φ: [0, 1] → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    kind: CoefficientKind,
    params: Vec<f64>,
    samples: Vec<(f64, f64)>,
}

impl ScalarFunction {
    pub fn constant(c: f64) -> Self {
        Self::closed(CoefficientKind::Constant, vec![c])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::closed(CoefficientKind::Polynomial, coeffs)
    }

    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self::closed(CoefficientKind::Sine, vec![amplitude, frequency, phase])
    }

    pub fn abs_shift(c: f64) -> Self {
        Self::closed(CoefficientKind::AbsShift, vec![c])
    }

    pub fn step(c: f64) -> Self {
        Self::closed(CoefficientKind::Step, vec![c])
    }

    fn closed(kind: CoefficientKind, params: Vec<f64>) -> Self {
        ScalarFunction {
            kind,
            params,
            samples: Vec::new(),
        }
    }

    /// Piecewise-linear coefficient through `(t, value)` samples.
    pub fn sampled(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.len() < 2 {
            return Err(Error::input("sampled coefficient needs at least 2 samples"));
        }
        for &(t, v) in &samples {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::input(format!("sample time {t} outside [0, 1]")));
            }
            if !v.is_finite() {
                return Err(Error::input("non-finite sample value"));
            }
        }
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::input("duplicate sample time"));
        }
        Ok(ScalarFunction {
            kind: CoefficientKind::Sampled,
            params: Vec::new(),
            samples,
        })
    }

    /// Builds a coefficient from its serialized parts, validating parameter counts.
    pub fn from_parts(
        kind: CoefficientKind,
        params: Vec<f64>,
        samples: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::input(format!(
                "non-finite parameter for `{}` coefficient",
                kind.name()
            )));
        }
        let want = match kind {
            CoefficientKind::Constant | CoefficientKind::AbsShift | CoefficientKind::Step => {
                Some(1)
            }
            CoefficientKind::Sine => Some(3),
            CoefficientKind::Polynomial | CoefficientKind::Sampled => None,
        };
        if let Some(n) = want {
            if params.len() != n {
                return Err(Error::input(format!(
                    "`{}` coefficient takes {n} params, got {}",
                    kind.name(),
                    params.len()
                )));
            }
        }
        match kind {
            CoefficientKind::Sampled => {
                let samples = samples
                    .ok_or_else(|| Error::input("`sampled` coefficient requires `samples`"))?;
                ScalarFunction::sampled(samples)
            }
            CoefficientKind::Polynomial if params.is_empty() => Err(Error::input(
                "polynomial coefficient needs at least one param",
            )),
            _ => Ok(Self::closed(kind, params)),
        }
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn has_derivative(&self) -> bool {
        matches!(
            self.kind,
            CoefficientKind::Constant | CoefficientKind::Polynomial | CoefficientKind::Sine
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            CoefficientKind::Constant => p[0],
            CoefficientKind::Polynomial => p.iter().rev().fold(0.0, |acc, c| acc * t + c),
            CoefficientKind::Sine => p[0] * (p[1] * t + p[2]).sin(),
            CoefficientKind::AbsShift => (t - p[0]).abs(),
            CoefficientKind::Step => {
                if t >= p[0] {
                    1.0
                } else {
                    0.0
                }
            }
            CoefficientKind::Sampled => interpolate(&self.samples, t),
        }
    }

    /// Closed-form derivative, when one exists.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let p = &self.params;
        match self.kind {
            CoefficientKind::Constant => Ok(0.0),
            CoefficientKind::Polynomial => {
                let mut acc = 0.0;
                for (i, c) in p.iter().enumerate().skip(1).rev() {
                    acc = acc * t + i as f64 * c;
                }
                Ok(acc)
            }
            CoefficientKind::Sine => Ok(p[0] * p[1] * (p[1] * t + p[2]).cos()),
            kind => Err(Error::DerivativeUnavailable {
                kind: kind.name().to_string(),
            }),
        }
    }
}

// Constant extrapolation outside the sampled range.
fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let idx = samples.partition_point(|s| s.0 <= t);
    let (t0, v0) = samples[idx - 1];
    let (t1, v1) = samples[idx];
    let w = (t - t0) / (t1 - t0);
    v0 + w * (v1 - v0)
}

/// One term `φ(t)·M` of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub function: ScalarFunction,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FamilyFlags {
    pub invertible: bool,
    pub dissipative: bool,
}

/// Tolerance for the negative-semidefiniteness check of the symmetric part.
pub const TOL_PSD: f64 = 1e-10;

/// The map `t ↦ A(t)` on `[0, 1]` as `d × d` real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    dim: usize,
    terms: Vec<Coefficient>,
    shift: f64,
    flags: FamilyFlags,
    warnings: Vec<String>,
}

impl OperatorFamily {
    pub fn new(
        dim: usize,
        terms: Vec<Coefficient>,
        shift: f64,
        flags: FamilyFlags,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if !shift.is_finite() || shift < 0.0 {
            return Err(Error::input(format!(
                "shift must be finite and >= 0, got {shift}"
            )));
        }
        if terms.is_empty() {
            return Err(Error::input("family needs at least one term"));
        }
        for (i, term) in terms.iter().enumerate() {
            if term.matrix.nrows() != dim || term.matrix.ncols() != dim {
                return Err(Error::Shape(format!(
                    "term {i} has a {}x{} matrix but dim = {dim}",
                    term.matrix.nrows(),
                    term.matrix.ncols()
                )));
            }
            if term.matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "term {i} has non-finite matrix entries"
                )));
            }
        }
        Ok(OperatorFamily {
            dim,
            terms,
            shift,
            flags,
            warnings: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Coefficient] {
        &self.terms
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn flags(&self) -> FamilyFlags {
        self.flags
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn derivative_available(&self) -> bool {
        self.terms.iter().all(|c| c.function.has_derivative())
    }

    fn check_time(t: f64) -> Result<()> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain { t })
        }
    }

    /// `A(t) = Σ_k φ_k(t)·M_k − σ·1`.
    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        Self::check_time(t)?;
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            a += &term.matrix * term.function.eval(t);
        }
        for i in 0..self.dim {
            a[(i, i)] -= self.shift;
        }
        Ok(a)
    }

    /// `A(t)x` without forming the whole matrix sum.
    pub fn apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        Self::check_time(t)?;
        let mut y = x * -self.shift;
        for term in &self.terms {
            y += (&term.matrix * x) * term.function.eval(t);
        }
        Ok(y)
    }

    /// `A(t)⁻¹` together with its condition estimate.
    pub fn inverse_at(&self, t: f64) -> Result<Inverse> {
        let a = self.eval(t)?;
        linalg::checked_inverse(&a).map_err(|cond| Error::Breakdown { t, cond })
    }

    /// `A(t)⁻¹` via LU with partial pivoting.
    pub fn resolvent_at(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.inverse_at(t)?.matrix)
    }

    /// `1 − A(t)`.
    pub fn one_minus(&self, t: f64) -> Result<DMatrix<f64>> {
        let a = self.eval(t)?;
        Ok(DMatrix::identity(self.dim, self.dim) - a)
    }

    /// `(1 − A(s))⁻¹`.
    pub fn one_minus_inverse(&self, s: f64) -> Result<Inverse> {
        let m = self.one_minus(s)?;
        linalg::checked_inverse(&m).map_err(|cond| Error::Breakdown { t: s, cond })
    }

    /// `B(t,s) = (1 − A(t))(1 − A(s))⁻¹`.
    pub fn b_operator(&self, t: f64, s: f64) -> Result<DMatrix<f64>> {
        let inv = self.one_minus_inverse(s)?;
        Ok(self.one_minus(t)? * inv.matrix)
    }

    /// `C(t,s) = A(t)A(s)⁻¹ − 1`.
    pub fn c_operator(&self, t: f64, s: f64) -> Result<DMatrix<f64>> {
        let inv = self.resolvent_at(s)?;
        let mut c = self.eval(t)? * inv;
        for i in 0..self.dim {
            c[(i, i)] -= 1.0;
        }
        Ok(c)
    }

    /// Closed-form `Ȧ(t)`; an oracle, never used by the suites' decisions.
    pub fn derivative_at(&self, t: f64) -> Result<DMatrix<f64>> {
        Self::check_time(t)?;
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            d += &term.matrix * term.function.derivative(t)?;
        }
        Ok(d)
    }

    /// Largest eigenvalue of the symmetric part `(A + Aᵀ)/2`.
    pub fn max_symmetric_eigenvalue(&self, t: f64) -> Result<f64> {
        let a = self.eval(t)?;
        let sym = (&a + a.transpose()) * 0.5;
        Ok(sym.symmetric_eigenvalues().max())
    }

    /// Re-checks the declared flags on a uniform probe grid of `probes` points
    /// and downgrades any that fail, recording a warning.
    pub fn validate_flags(&mut self, probes: usize) {
        let probes = probes.max(2);
        let times: Vec<f64> = (0..probes)
            .map(|i| i as f64 / (probes - 1) as f64)
            .collect();
        if self.flags.dissipative {
            let worst = times
                .iter()
                .map(|&t| self.max_symmetric_eigenvalue(t).unwrap_or(f64::INFINITY))
                .fold(f64::NEG_INFINITY, f64::max);
            if worst > TOL_PSD {
                self.flags.dissipative = false;
                self.warnings.push(format!(
                    "declared dissipative but symmetric part has eigenvalue {worst:e} > {TOL_PSD:e}; flag downgraded"
                ));
            }
        }
        if self.flags.invertible {
            if let Some(t) = times.iter().copied().find(|&t| self.inverse_at(t).is_err()) {
                self.flags.invertible = false;
                self.warnings.push(format!(
                    "declared invertible but A({t}) is singular or ill-conditioned; flag downgraded"
                ));
            }
        }
    }

    /// `sup_t ‖A(t)‖` over the given times; the scale for relative tolerances.
    pub fn scale_on(&self, times: &[f64]) -> Result<f64> {
        let mut s: f64 = 0.0;
        for &t in times {
            s = s.max(linalg::spectral_norm(&self.eval(t)?));
        }
        Ok(s)
    }
}
