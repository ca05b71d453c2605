//! Evolution system `U(t, s)` of `ẋ = A(t)x`: midpoint-frozen exponential
//! products, a classical RK4 reference, grid tables and axiom checks.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::grid::Grid;
use crate::linalg::{expm, spectral_norm};
use crate::regularity::report::Verdict;
use crate::SCHEMA_VERSION;

/// Substeps per grid interval unless told otherwise.
pub const DEFAULT_SUBSTEPS: usize = 64;
/// RK4 stiffness guard: every step satisfies `Δ·‖A‖ ≤ STIFFNESS_LIMIT`.
pub const STIFFNESS_LIMIT: f64 = 2.0;
pub const TOL_CONTRACT: f64 = 1e-8;

fn check_interval(s: f64, t: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::input("number of substeps must be positive"));
    }
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            t: if (0.0..=1.0).contains(&s) { t } else { s },
        });
    }
    if s > t {
        return Err(Error::input(format!(
            "backward propagation is not supported (s={s} > t={t})"
        )));
    }
    Ok(())
}

/// `sqrt(‖M‖₁‖M‖∞)`, a cheap upper bound for the spectral norm.
fn norm_bound(m: &DMatrix<f64>) -> f64 {
    let one = m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let inf = m.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
    (one * inf).sqrt()
}

fn sup_norm_bound(family: &OperatorFamily, s: f64, t: f64) -> Result<f64> {
    let mut a: f64 = 0.0;
    for j in 0..=32 {
        let tau = if j == 32 {
            t
        } else {
            s + (t - s) * j as f64 / 32.0
        };
        a = a.max(norm_bound(&family.eval(tau)?));
    }
    Ok(a)
}

fn guarded_steps(len: f64, n: usize, a_max: f64) -> usize {
    n.max((len.abs() * a_max / STIFFNESS_LIMIT).ceil() as usize)
}

/// Classical RK4 for `X′ = A(τ)X` from `t0` to `t1` (either direction).
fn integrate(
    family: &OperatorFamily,
    t0: f64,
    t1: f64,
    x: DMatrix<f64>,
    steps: usize,
) -> Result<DMatrix<f64>> {
    let h = (t1 - t0) / steps as f64;
    let clamp = |tau: f64| tau.clamp(t0.min(t1), t0.max(t1));
    let mut x = x;
    let mut a_left = family.eval(t0)?;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let t_next = if k + 1 == steps {
            t1
        } else {
            clamp(t0 + (k + 1) as f64 * h)
        };
        let a_mid = family.eval(clamp(t + 0.5 * h))?;
        let a_right = family.eval(t_next)?;
        let k1 = &a_left * &x;
        let k2 = &a_mid * (&x + &k1 * (0.5 * h));
        let k3 = &a_mid * (&x + &k2 * (0.5 * h));
        let k4 = &a_right * (&x + &k3 * h);
        x += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        a_left = a_right;
    }
    Ok(x)
}

/// `∏_{j=n−1}^{0} exp(Δ·A(s + (j + ½)Δ))` with `Δ = (t − s)/n`.
pub fn frozen_product(family: &OperatorFamily, s: f64, t: f64, n: usize) -> Result<DMatrix<f64>> {
    check_interval(s, t, n)?;
    let d = family.dim();
    let delta = (t - s) / n as f64;
    let mut u = DMatrix::identity(d, d);
    if delta == 0.0 {
        return Ok(u);
    }
    for j in 0..n {
        let tau = s + (j as f64 + 0.5) * delta;
        u = expm(&(family.eval(tau)? * delta)) * u;
    }
    Ok(u)
}

/// Number of RK4 steps actually taken for `n` requested steps on `[s, t]`.
pub fn rk4_substeps(family: &OperatorFamily, s: f64, t: f64, n: usize) -> Result<usize> {
    check_interval(s, t, n)?;
    Ok(guarded_steps(t - s, n, sup_norm_bound(family, s, t)?))
}

/// RK4 approximation of `U(t, s)` with at least `n` uniform steps.
pub fn reference_rk4(family: &OperatorFamily, s: f64, t: f64, n: usize) -> Result<DMatrix<f64>> {
    let steps = rk4_substeps(family, s, t, n)?;
    let d = family.dim();
    if s == t {
        return Ok(DMatrix::identity(d, d));
    }
    integrate(family, s, t, DMatrix::identity(d, d), steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Method {
    FrozenProduct { n_sub: usize },
    ReferenceRk4 { n_sub: usize },
}

impl Method {
    pub fn n_sub(self) -> usize {
        match self {
            Method::FrozenProduct { n_sub } | Method::ReferenceRk4 { n_sub } => n_sub,
        }
    }

    fn run(self, family: &OperatorFamily, s: f64, t: f64, n: usize) -> Result<DMatrix<f64>> {
        match self {
            Method::FrozenProduct { .. } => frozen_product(family, s, t, n),
            Method::ReferenceRk4 { .. } => reference_rk4(family, s, t, n),
        }
    }
}

/// Table of `U(t_i, t_j)` for `i ≥ j` on a grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    method: Method,
    family: OperatorFamily,
    table: Vec<DMatrix<f64>>,
}

fn tri(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl Propagator {
    /// Builds one factor per grid interval and composes them column by column.
    pub fn build(family: &OperatorFamily, grid: &Grid, method: Method) -> Result<Self> {
        if method.n_sub() == 0 {
            return Err(Error::input("n_sub must be positive"));
        }
        let pts = grid.points();
        let factors: Vec<DMatrix<f64>> = (0..grid.intervals())
            .into_par_iter()
            .map(|i| method.run(family, pts[i], pts[i + 1], method.n_sub()))
            .collect::<Result<_>>()?;
        let d = family.dim();
        let columns: Vec<Vec<DMatrix<f64>>> = (0..pts.len())
            .into_par_iter()
            .map(|j| {
                let mut col = vec![DMatrix::identity(d, d)];
                for f in &factors[j..] {
                    let next = f * col.last().expect("nonempty");
                    col.push(next);
                }
                col
            })
            .collect();
        let mut table = vec![DMatrix::zeros(0, 0); tri(pts.len(), 0)];
        for (j, col) in columns.into_iter().enumerate() {
            for (off, m) in col.into_iter().enumerate() {
                table[tri(j + off, j)] = m;
            }
        }
        Ok(Propagator {
            grid: grid.clone(),
            method,
            family: family.clone(),
            table,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn family(&self) -> &OperatorFamily {
        &self.family
    }

    /// `U(t_i, t_j)`; panics unless `i ≥ j` are grid indices.
    pub fn get(&self, i: usize, j: usize) -> &DMatrix<f64> {
        assert!(i >= j && i < self.grid.len(), "need grid indices i ≥ j");
        &self.table[tri(i, j)]
    }

    /// `U(t, s)` for arbitrary `s ≤ t`: the grid-aligned part comes from the
    /// table, the partial intervals at either end are integrated afresh.
    pub fn at(&self, t: f64, s: f64) -> Result<DMatrix<f64>> {
        check_interval(s, t, 1)?;
        let pts = self.grid.points();
        let substeps = |len: f64| {
            ((self.method.n_sub() as f64 * len / self.grid.max_step()).ceil() as usize).max(1)
        };
        let a = pts.partition_point(|&p| p < s);
        let b = pts.partition_point(|&p| p <= t) - 1;
        if a > b {
            return self.method.run(&self.family, s, t, substeps(t - s));
        }
        let head = self
            .method
            .run(&self.family, s, pts[a], substeps(pts[a] - s))?;
        let tail = self
            .method
            .run(&self.family, pts[b], t, substeps(t - pts[b]))?;
        Ok(tail * self.get(b, a) * head)
    }
}

/// Bounds behind the truncation model of the central-difference residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualModel {
    /// Sampled bounds on `‖A‖`, `‖A′‖`, `‖A″‖`.
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    /// Half-width of the local difference stencil.
    pub h_c: f64,
}

impl ResidualModel {
    pub fn new(family: &OperatorFamily, grid_step: f64) -> Result<Self> {
        const N: usize = 256;
        let delta = 1.0 / N as f64;
        let mats: Vec<DMatrix<f64>> = (0..=N)
            .map(|j| family.eval(j as f64 * delta))
            .collect::<Result<_>>()?;
        let a = mats.iter().map(norm_bound).fold(0.0, f64::max);
        let a1 = mats
            .windows(2)
            .map(|w| norm_bound(&(&w[1] - &w[0])) / delta)
            .fold(0.0, f64::max);
        let a2 = mats
            .windows(3)
            .map(|w| norm_bound(&(&w[2] - &w[1] * 2.0 + &w[0])) / (delta * delta))
            .fold(0.0, f64::max);
        let mut h_c = 0.5 * grid_step;
        if a > 0.0 {
            h_c = h_c.min(0.01 / a);
        }
        Ok(ResidualModel { a, a1, a2, h_c })
    }

    /// `‖x‴‖ ≤ K·‖x‖` along solutions.
    pub fn k(&self) -> f64 {
        self.a.powi(3) + 3.0 * self.a * self.a1 + self.a2
    }

    /// Allowed residual for states of size up to `x_max`: twice the one-sided
    /// stencil error `h²/3·K·‖x‖` plus a cancellation term.
    pub fn tolerance(&self, x_max: f64) -> f64 {
        let h = self.h_c;
        2.0 * h * h / 3.0 * self.k() * x_max + 100.0 * f64::EPSILON * x_max * (1.0 / h + self.a)
    }

    /// `D_c x(t) − A(t)x(t)` with neighbours obtained by fresh RK4 from `x`.
    pub fn residual(
        &self,
        family: &OperatorFamily,
        t: f64,
        x: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>> {
        let h = self.h_c;
        let go = |tau: f64| {
            let steps = guarded_steps(tau - t, 2, self.a);
            integrate(family, t, tau, x.clone(), steps)
        };
        let d = if t - h >= 0.0 && t + h <= 1.0 {
            (go(t + h)? - go(t - h)?) / (2.0 * h)
        } else if t + 2.0 * h <= 1.0 {
            (go(t + h)? * 4.0 - x * 3.0 - go(t + 2.0 * h)?) / (2.0 * h)
        } else {
            (x * 3.0 - go(t - h)? * 4.0 + go(t - 2.0 * h)?) / (2.0 * h)
        };
        Ok(d - family.eval(t)? * x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub schema_version: String,
    /// Grid points `t_i ≥ s`.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub s: f64,
    pub y: Vec<f64>,
    /// `‖x′(t_i) − A(t_i)x(t_i)‖` by local central difference.
    pub residuals: Vec<f64>,
    pub tol_res: f64,
    pub n_sub: usize,
}

impl Trajectory {
    pub fn state(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.states[i])
    }

    pub fn final_state(&self) -> DVector<f64> {
        self.state(self.states.len() - 1)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    /// Columns `t, x_1..x_d, residual`.
    pub fn to_csv(&self) -> String {
        let d = self.y.len();
        let mut out = String::from("t");
        for k in 1..=d {
            out.push_str(&format!(",x_{k}"));
        }
        out.push_str(",residual\n");
        for ((t, x), r) in self.times.iter().zip(&self.states).zip(&self.residuals) {
            out.push_str(&format!("{t:e}"));
            for v in x {
                out.push_str(&format!(",{v:e}"));
            }
            out.push_str(&format!(",{r:e}\n"));
        }
        out
    }
}

pub fn solve_ivp(
    family: &OperatorFamily,
    s: f64,
    y: &DVector<f64>,
    grid: &Grid,
) -> Result<Trajectory> {
    solve_ivp_with(family, s, y, grid, DEFAULT_SUBSTEPS)
}

/// RK4 from `(s, y)` across the grid points at or after `s`.
pub fn solve_ivp_with(
    family: &OperatorFamily,
    s: f64,
    y: &DVector<f64>,
    grid: &Grid,
    n_sub: usize,
) -> Result<Trajectory> {
    if y.len() != family.dim() {
        return Err(Error::Shape(format!(
            "initial vector has length {} but the family has dimension {}",
            y.len(),
            family.dim()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(
            "initial vector contains NaN or infinite values",
        ));
    }
    if n_sub == 0 {
        return Err(Error::input("n_sub must be positive"));
    }
    let start = grid
        .index_of(s)
        .ok_or_else(|| Error::input(format!("s = {s} is not a grid point")))?;
    let pts = &grid.points()[start..];
    let mut states = vec![DMatrix::from_column_slice(y.len(), 1, y.as_slice())];
    for w in pts.windows(2) {
        let steps = rk4_substeps(family, w[0], w[1], n_sub)?;
        let next = integrate(
            family,
            w[0],
            w[1],
            states.last().expect("nonempty").clone(),
            steps,
        )?;
        states.push(next);
    }
    let model = ResidualModel::new(family, grid.max_step())?;
    let residuals: Vec<f64> = pts
        .par_iter()
        .zip(&states)
        .map(|(&t, x)| Ok(model.residual(family, t, x)?.norm()))
        .collect::<Result<_>>()?;
    let x_max = states.iter().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(Trajectory {
        schema_version: SCHEMA_VERSION.to_string(),
        times: pts.to_vec(),
        states: states.into_iter().map(|x| x.as_slice().to_vec()).collect(),
        s,
        y: y.as_slice().to_vec(),
        residuals,
        tol_res: model.tolerance(x_max),
        n_sub,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub schema_version: String,
    pub method: Method,
    pub grid_points: usize,
    pub identity_residual: f64,
    pub cocycle_residual: f64,
    pub tol_cocycle: f64,
    pub max_norm: f64,
    /// Present when the family is flagged dissipative.
    pub contraction_excess: Option<f64>,
    pub tol_contract: f64,
    /// Operator residual of `t ↦ U(t, t₀)` on the grid.
    pub solution_residual: f64,
    pub tol_res: f64,
    pub residual_model: ResidualModel,
    pub identity_ok: bool,
    pub cocycle_ok: bool,
    pub contraction_ok: bool,
    pub solution_ok: bool,
    pub verdict: Verdict,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn verify_evolution_axioms(p: &Propagator) -> Result<AxiomReport> {
    let n = p.grid.len();
    let d = p.family.dim();
    let eye = DMatrix::<f64>::identity(d, d);
    let identity_residual = (0..n)
        .map(|i| spectral_norm(&(p.get(i, i) - &eye)))
        .fold(0.0, f64::max);

    let norms: Vec<f64> = p.table.par_iter().map(spectral_norm).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);

    let cocycle_residual = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..=i {
                for k in 0..=j {
                    let r = p.get(i, j) * p.get(j, k) - p.get(i, k);
                    worst = worst.max(spectral_norm(&r));
                }
            }
            worst
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let tol_cocycle = 100.0 * n as f64 * f64::EPSILON * max_norm.max(1.0).powi(2);

    let contraction_excess = p.family.flags().dissipative.then_some(max_norm - 1.0);

    let model = ResidualModel::new(&p.family, p.grid.max_step())?;
    let pts = p.grid.points();
    let solution_residual = (0..n)
        .into_par_iter()
        .map(|i| {
            Ok(spectral_norm(&model.residual(
                &p.family,
                pts[i],
                p.get(i, 0),
            )?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let x_max = (0..n).map(|i| norms[tri(i, 0)]).fold(0.0, f64::max);
    let tol_res = model.tolerance(x_max);

    let identity_ok = identity_residual == 0.0;
    let cocycle_ok = cocycle_residual <= tol_cocycle;
    let contraction_ok = contraction_excess.is_none_or(|e| e <= TOL_CONTRACT);
    let solution_ok = solution_residual <= tol_res;
    let all_finite = norms.iter().all(|v| v.is_finite());
    let verdict = if all_finite && identity_ok && cocycle_ok && contraction_ok && solution_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(AxiomReport {
        schema_version: SCHEMA_VERSION.to_string(),
        method: p.method,
        grid_points: n,
        identity_residual,
        cocycle_residual,
        tol_cocycle,
        max_norm,
        contraction_excess,
        tol_contract: TOL_CONTRACT,
        solution_residual,
        tol_res,
        residual_model: model,
        identity_ok,
        cocycle_ok,
        contraction_ok,
        solution_ok,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::family::{Coefficient, FamilyFlags, ScalarFunction};
    use approx::assert_relative_eq;

    fn affine_exact(t: f64, s: f64) -> f64 {
        (-((t - s) + (t * t - s * s) / 2.0)).exp()
    }

    #[test]
    fn frozen_product_on_constant_family_is_expm() {
        let fam = builtin("constant", 3).unwrap().family;
        let exact = expm(&(fam.eval(0.0).unwrap() * 0.7));
        for n in [1, 3, 17] {
            let u = frozen_product(&fam, 0.2, 0.9, n).unwrap();
            assert!((u - &exact).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn frozen_product_scalar_affine() {
        let fam = builtin("scalar_affine", 1).unwrap().family;
        let u = frozen_product(&fam, 0.0, 1.0, 256).unwrap()[(0, 0)];
        let err = (u - (-1.5f64).exp()).abs();
        assert!(err < 1e-5 && err > 0.0, "{err}");
    }

    #[test]
    fn commuting_sine_family_matches_integral_exponential() {
        let fam = OperatorFamily::new(
            2,
            vec![Coefficient {
                function: ScalarFunction::sine(1.0, std::f64::consts::PI, 0.0),
                matrix: DMatrix::identity(2, 2) * -0.5,
            }],
            0.0,
            FamilyFlags::default(),
        )
        .unwrap();
        // ∫₀¹ −½ sin(πτ) dτ = −1/π.
        let exact = (-1.0 / std::f64::consts::PI).exp();
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32] {
            let err = (frozen_product(&fam, 0.0, 1.0, n).unwrap()[(0, 0)] - exact).abs();
            assert!(err < prev / 3.5, "n={n}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn rk4_oracles() {
        let fam = OperatorFamily::new(
            1,
            vec![Coefficient {
                function: ScalarFunction::constant(1.0),
                matrix: DMatrix::from_element(1, 1, -1.0),
            }],
            0.0,
            FamilyFlags::default(),
        )
        .unwrap();
        let e = reference_rk4(&fam, 0.0, 1.0, 64).unwrap()[(0, 0)];
        assert_relative_eq!(e, (-1.0f64).exp(), epsilon = 1e-9);
        let aff = builtin("scalar_affine", 1).unwrap().family;
        let u = reference_rk4(&aff, 0.0, 1.0, 64).unwrap()[(0, 0)];
        assert!((u - 0.2231302).abs() <= 1e-7);
        assert!((u - affine_exact(1.0, 0.0)).abs() <= 1e-8);
        assert_eq!(
            reference_rk4(&aff, 0.4, 0.4, 8).unwrap(),
            DMatrix::identity(1, 1)
        );
    }

    #[test]
    fn bad_intervals_are_input_errors() {
        let fam = builtin("scalar_affine", 1).unwrap().family;
        assert!(matches!(
            frozen_product(&fam, 0.5, 0.2, 4),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            reference_rk4(&fam, 0.0, 1.0, 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn stiffness_guard_raises_steps() {
        let lap = builtin("discrete_laplacian", 16).unwrap().family;
        let n = rk4_substeps(&lap, 0.0, 1.0, 4).unwrap();
        assert!(n > 100, "{n}");
        let u = reference_rk4(&lap, 0.0, 1.0, 4).unwrap();
        assert!(spectral_norm(&u) <= 1.0);
    }

    #[test]
    fn solve_ivp_diagonal_oracle() {
        let fam = OperatorFamily::new(
            2,
            vec![Coefficient {
                function: ScalarFunction::constant(1.0),
                matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0])),
            }],
            0.0,
            FamilyFlags::default(),
        )
        .unwrap();
        let grid = Grid::uniform(8).unwrap();
        let traj = solve_ivp(&fam, 0.0, &DVector::from_vec(vec![1.0, 1.0]), &grid).unwrap();
        let x = traj.final_state();
        assert_relative_eq!(x[0], (-1.0f64).exp(), epsilon = 1e-8);
        assert_relative_eq!(x[1], (-2.0f64).exp(), epsilon = 1e-8);
        assert!(traj.max_residual() <= traj.tol_res);
    }

    #[test]
    fn solve_ivp_forward_only_and_exact_start() {
        let fam = builtin("scalar_affine", 1).unwrap().family;
        let grid = Grid::uniform(8).unwrap();
        let y = DVector::from_element(1, 1.0);
        let traj = solve_ivp(&fam, 0.25, &y, &grid).unwrap();
        assert_eq!(traj.times.len(), 7);
        assert_eq!(traj.states[0], vec![1.0]);
        assert_relative_eq!(
            traj.final_state()[0],
            affine_exact(1.0, 0.25),
            epsilon = 1e-9
        );
        assert!(matches!(
            solve_ivp(&fam, 0.3, &y, &grid),
            Err(Error::Input(_))
        ));
        let zero = solve_ivp(&fam, 0.0, &DVector::zeros(1), &grid).unwrap();
        assert!(zero.states.iter().all(|x| x[0] == 0.0));
        assert!(matches!(
            solve_ivp(&fam, 0.0, &DVector::zeros(2), &grid),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let fam = builtin("constant", 2).unwrap().family;
        let traj = solve_ivp(
            &fam,
            0.0,
            &DVector::from_vec(vec![1.0, 0.0]),
            &Grid::uniform(2).unwrap(),
        )
        .unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x_1,x_2,residual");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 4);
    }

    #[test]
    fn axioms_scalar_affine_rk4() {
        let fam = builtin("scalar_affine", 1).unwrap().family;
        let p = Propagator::build(
            &fam,
            &Grid::uniform(16).unwrap(),
            Method::ReferenceRk4 { n_sub: 64 },
        )
        .unwrap();
        let r = verify_evolution_axioms(&p).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_relative_eq!(
            p.get(16, 0)[(0, 0)],
            affine_exact(1.0, 0.0),
            epsilon = 1e-10
        );
        assert_relative_eq!(
            p.get(12, 4)[(0, 0)],
            affine_exact(0.75, 0.25),
            epsilon = 1e-10
        );
    }

    #[test]
    fn axioms_constant_frozen() {
        let fam = builtin("constant", 4).unwrap().family;
        let p = Propagator::build(
            &fam,
            &Grid::uniform(8).unwrap(),
            Method::FrozenProduct { n_sub: 4 },
        )
        .unwrap();
        let r = verify_evolution_axioms(&p).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.cocycle_residual <= 1e-12);
    }

    #[test]
    fn off_grid_query_composes_with_fresh_integration() {
        let fam = builtin("scalar_affine", 1).unwrap().family;
        let p = Propagator::build(
            &fam,
            &Grid::uniform(8).unwrap(),
            Method::ReferenceRk4 { n_sub: 64 },
        )
        .unwrap();
        for (t, s) in [(0.9, 0.1), (0.3, 0.26), (0.5, 0.5), (1.0, 0.0)] {
            assert_relative_eq!(
                p.at(t, s).unwrap()[(0, 0)],
                affine_exact(t, s),
                epsilon = 1e-10
            );
        }
    }
}
