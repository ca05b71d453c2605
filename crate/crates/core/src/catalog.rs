//! Built-in operator families with known regularity class, and the JSON
//! family file format.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Coefficient, CoefficientKind, FamilyFlags, OperatorFamily, ScalarFunction};
use crate::linalg::spectral_norm;

pub const BUILTIN_NAMES: [&str; 6] = [
    "constant",
    "scalar_affine",
    "smooth_sin",
    "lipschitz_kink",
    "step",
    "discrete_laplacian",
];

/// Probe points used when validating declared flags of loaded families.
pub const FLAG_PROBES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Pass,
    Fail,
}

/// Ground-truth verdicts. The three conditions are equivalent, so a valid
/// entry always has all three equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub kato53: Expected,
    pub yosida: Expected,
    pub c1: Expected,
}

impl Truth {
    pub fn all(e: Expected) -> Self {
        Truth {
            kato53: e,
            yosida: e,
            c1: e,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.kato53 == self.yosida && self.yosida == self.c1
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub family: OperatorFamily,
    pub truth: Truth,
    pub notes: String,
}

/// `(d+1)²·tridiag(1, −2, 1)`: negative definite second-difference matrix.
pub fn second_difference(d: usize) -> DMatrix<f64> {
    let h2 = ((d + 1) * (d + 1)) as f64;
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            -2.0 * h2
        } else if i.abs_diff(j) == 1 {
            h2
        } else {
            0.0
        }
    })
}

/// Fixed perturbation with a symmetric Hilbert-type part and a small skew part.
pub fn perturbation(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        1.0 / (1 + i + j) as f64 + 0.25 * (j as f64 - i as f64) / d as f64
    })
}

fn term(function: ScalarFunction, matrix: DMatrix<f64>) -> Coefficient {
    Coefficient { function, matrix }
}

const WELL_POSED: FamilyFlags = FamilyFlags {
    invertible: true,
    dissipative: true,
};

// A(t) = L_h − (‖A₁‖ + 1)·1 + φ(t)·A₁, stored with shift σ = 1.
fn perturbed_laplacian(d: usize, phi: ScalarFunction) -> Result<OperatorFamily> {
    let a1 = perturbation(d);
    let base = second_difference(d) - DMatrix::identity(d, d) * spectral_norm(&a1);
    OperatorFamily::new(
        d,
        vec![term(ScalarFunction::constant(1.0), base), term(phi, a1)],
        1.0,
        WELL_POSED,
    )
}

/// Looks up a built-in family by name.
pub fn builtin(name: &str, dim: usize) -> Result<CatalogEntry> {
    if dim == 0 {
        return Err(Error::input("dimension must be positive"));
    }
    let (family, truth, notes) = match name {
        "constant" => {
            let diag = DVector::from_fn(dim, |i, _| -((i + 1) as f64));
            let family = OperatorFamily::new(
                dim,
                vec![term(
                    ScalarFunction::constant(1.0),
                    DMatrix::from_diagonal(&diag),
                )],
                0.0,
                WELL_POSED,
            )?;
            (
                family,
                Truth::all(Expected::Pass),
                "A(t) = diag(-1, ..., -d)",
            )
        }
        "scalar_affine" => {
            if dim != 1 {
                return Err(Error::input(format!(
                    "scalar_affine is one-dimensional, got dim = {dim}"
                )));
            }
            let family = OperatorFamily::new(
                1,
                vec![term(
                    ScalarFunction::polynomial(vec![-1.0, -1.0]),
                    DMatrix::identity(1, 1),
                )],
                0.0,
                WELL_POSED,
            )?;
            (family, Truth::all(Expected::Pass), "A(t) = -(1 + t)")
        }
        "smooth_sin" => (
            perturbed_laplacian(dim, ScalarFunction::sine(1.0, PI, 0.0))?,
            Truth::all(Expected::Pass),
            "A(t) = A0 + sin(pi t) A1, A0 = -(|A1| + 1) + L_h; smooth",
        ),
        "lipschitz_kink" => (
            perturbed_laplacian(dim, ScalarFunction::abs_shift(0.5))?,
            Truth::all(Expected::Fail),
            "A(t) = A0 + |t - 1/2| A1; Lipschitz, derivative jumps at 1/2",
        ),
        "step" => (
            perturbed_laplacian(dim, ScalarFunction::step(0.5))?,
            Truth::all(Expected::Fail),
            "A(t) = A0 + 1[t >= 1/2] A1; bounded variation, discontinuous at 1/2",
        ),
        "discrete_laplacian" => {
            let family = OperatorFamily::new(
                dim,
                vec![term(
                    ScalarFunction::polynomial(vec![1.0, 0.0, 0.5]),
                    second_difference(dim),
                )],
                0.0,
                WELL_POSED,
            )?;
            (
                family,
                Truth::all(Expected::Pass),
                "A(t) = (1 + t^2/2) L_h; stiff, smooth",
            )
        }
        other => {
            return Err(Error::input(format!(
                "unknown family `{other}`; expected one of {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(CatalogEntry {
        name: name.to_string(),
        family,
        truth,
        notes: notes.to_string(),
    })
}

/// Default dimension used when a caller does not specify one.
pub fn default_dim(name: &str) -> usize {
    if name == "scalar_affine" {
        1
    } else {
        4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    pub kind: CoefficientKind,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: CoeffSpec,
    pub matrix: Vec<Vec<f64>>,
}

/// On-disk JSON description of an operator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpecFile {
    pub dim: usize,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub flags: FamilyFlags,
    pub terms: Vec<TermSpec>,
}

impl FamilySpecFile {
    pub fn from_family(family: &OperatorFamily) -> Self {
        let terms = family
            .terms()
            .iter()
            .map(|c| {
                let f = &c.function;
                let samples = (f.kind() == CoefficientKind::Sampled)
                    .then(|| f.samples().iter().map(|&(t, v)| [t, v]).collect());
                TermSpec {
                    coeff: CoeffSpec {
                        kind: f.kind(),
                        params: f.params().to_vec(),
                        samples,
                    },
                    matrix: c
                        .matrix
                        .row_iter()
                        .map(|r| r.iter().copied().collect())
                        .collect(),
                }
            })
            .collect();
        FamilySpecFile {
            dim: family.dim(),
            shift: family.shift(),
            flags: family.flags(),
            terms,
        }
    }

    /// Builds the family without re-validating flags.
    pub fn to_family(&self) -> Result<OperatorFamily> {
        let d = self.dim;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            if t.matrix.len() != d || t.matrix.iter().any(|row| row.len() != d) {
                let cols = t.matrix.first().map_or(0, Vec::len);
                return Err(Error::Shape(format!(
                    "terms[{i}].matrix is {}x{cols} but dim = {d}",
                    t.matrix.len()
                )));
            }
            let flat: Vec<f64> = t.matrix.iter().flatten().copied().collect();
            if flat.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "terms[{i}].matrix has non-finite entries"
                )));
            }
            let samples = t
                .coeff
                .samples
                .as_ref()
                .map(|s| s.iter().map(|p| (p[0], p[1])).collect());
            let function =
                ScalarFunction::from_parts(t.coeff.kind, t.coeff.params.clone(), samples)
                    .map_err(|e| Error::input(format!("terms[{i}].coeff: {e}")))?;
            terms.push(Coefficient {
                function,
                matrix: DMatrix::from_row_slice(d, d, &flat),
            });
        }
        OperatorFamily::new(d, terms, self.shift, self.flags)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family spec serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }
}

/// Reads a family file and re-checks its declared flags on a 64-point grid.
pub fn load_family(path: impl AsRef<Path>) -> Result<OperatorFamily> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut family = FamilySpecFile::parse(&text)?.to_family()?;
    family.validate_flags(FLAG_PROBES);
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn truth_tables_are_consistent() {
        for name in BUILTIN_NAMES {
            let e = builtin(name, default_dim(name)).unwrap();
            assert!(e.truth.is_consistent(), "{name}");
        }
        assert_eq!(
            builtin("constant", 2).unwrap().truth,
            Truth::all(Expected::Pass)
        );
        assert_eq!(
            builtin("lipschitz_kink", 4).unwrap().truth,
            Truth::all(Expected::Fail)
        );
    }

    #[test]
    fn scalar_affine_values() {
        let e = builtin("scalar_affine", 1).unwrap();
        assert_eq!(e.truth, Truth::all(Expected::Pass));
        assert_eq!(e.family.eval(0.25).unwrap()[(0, 0)], -1.25);
        assert!(builtin("scalar_affine", 3).is_err());
    }

    #[test]
    fn smooth_sin_starts_at_base_matrix() {
        let e = builtin("smooth_sin", 3).unwrap();
        let a0 = second_difference(3)
            - DMatrix::identity(3, 3) * (spectral_norm(&perturbation(3)) + 1.0);
        let diff = (e.family.eval(0.0).unwrap() - a0).abs().max();
        assert_eq!(diff, 0.0);
        let d = e.family.derivative_at(0.5).unwrap();
        assert!(d.abs().max() < 1e-14);
    }

    #[test]
    fn kink_has_one_sided_derivative_jump() {
        // Left derivative −A₁, right derivative +A₁: jump of norm 2‖A₁‖.
        let e = builtin("lipschitz_kink", 4).unwrap();
        let h = 1e-6;
        let a = |t: f64| e.family.eval(t).unwrap();
        let left = (a(0.5) - a(0.5 - h)) / h;
        let right = (a(0.5 + h) - a(0.5)) / h;
        let jump = spectral_norm(&(right - left));
        assert_relative_eq!(
            jump,
            2.0 * spectral_norm(&perturbation(4)),
            max_relative = 1e-8
        );
    }

    #[test]
    fn catalog_flags_hold_on_default_grid() {
        for name in BUILTIN_NAMES {
            let mut f = builtin(name, default_dim(name)).unwrap().family;
            f.validate_flags(129);
            assert!(f.warnings().is_empty(), "{name}: {:?}", f.warnings());
        }
    }

    #[test]
    fn unknown_name_is_input_error() {
        assert!(matches!(builtin("nope", 2), Err(Error::Input(_))));
    }

    #[test]
    fn parse_reports_location() {
        let err = FamilySpecFile::parse("{\n \"dim\": 2,\n \"terms\": [}").unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("line 3")),
            "{err}"
        );
    }

    #[test]
    fn shape_mismatch_in_file() {
        let text = r#"{"dim": 2, "shift": 0.0, "flags": {"invertible": true, "dissipative": false},
            "terms": [{"coeff": {"kind": "constant", "params": [1.0], "samples": null},
                       "matrix": [[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        let err = FamilySpecFile::parse(text)
            .unwrap()
            .to_family()
            .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn sampled_coefficient_from_file() {
        let text = r#"{"dim": 1, "shift": 0.0, "flags": {"invertible": true, "dissipative": true},
            "terms": [{"coeff": {"kind": "sampled", "params": [], "samples": [[0, 1], [1, 2]]},
                       "matrix": [[-1.0]]}]}"#;
        let f = FamilySpecFile::parse(text).unwrap().to_family().unwrap();
        assert_eq!(f.eval(0.5).unwrap()[(0, 0)], -1.5);
    }
}
