//! End-to-end behaviour of the suites, the catalog file format, the lemma
//! engine and the propagator on the documented reference cases.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};

use evolveq::catalog::Expected;
use evolveq::lemma::{
    default_ladder, left_quotients, named_path, reconstruct_and_verify, telescope_check,
};
use evolveq::propagator::{frozen_product, solve_ivp, verify_evolution_axioms, Method, Propagator};
use evolveq::regularity::{
    check_c1, check_kato53, check_yosida, equivalence_matrix, yosida_modified_flag, Agreement,
    CheckConfig, Verdict,
};
use evolveq::{builtin, load_family, Error, FamilySpecFile, Grid, BUILTIN_NAMES};

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

fn part(r: &evolveq::regularity::ConditionReport, name: &str) -> Verdict {
    r.part(name)
        .unwrap_or_else(|| panic!("missing part {name}"))
        .verdict
}

#[test]
fn kato_constant_family() {
    let fam = builtin("constant", 4).unwrap().family;
    let r = check_kato53(&fam, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((r.bounds.sup_b.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.bounds.variation_n.unwrap() <= 1e-12);
    assert!(r.notes.iter().any(|n| n.contains("weak")));
}

#[test]
fn kato_scalar_affine_sup_b() {
    let fam = builtin("scalar_affine", 1).unwrap().family;
    let r = check_kato53(&fam, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let tol = r.tolerances_used.tol;
    assert!((r.bounds.sup_b.unwrap() - 1.5).abs() <= tol);
    assert_eq!(r.diagnostics["sup_b_at_t"], 1.0);
    assert_eq!(r.diagnostics["sup_b_at_s"], 0.0);
}

#[test]
fn kato_step_family_has_bounded_variation_but_fails_item_three() {
    let fam = builtin("step", 4).unwrap().family;
    let r = check_kato53(&fam, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(part(&r, "ii"), Verdict::Pass);
    assert_eq!(part(&r, "iii"), Verdict::Fail);
    assert!(r
        .failure_loci
        .iter()
        .any(|&t| (t - 0.5).abs() <= 1.0 / 128.0));
    // Variation sums settle at the jump of B(·, 0) across ½.
    let below = fam.b_operator(0.5 - 1e-12, 0.0).unwrap();
    let above = fam.b_operator(0.5 + 1e-12, 0.0).unwrap();
    let jump = evolveq::linalg::spectral_norm(&(above - below));
    assert!(jump > 0.1);
    let v = r.bounds.variation_n.unwrap();
    assert!((v - jump).abs() <= 1e-6 * v, "variation {v} vs jump {jump}");
}

#[test]
fn c1_examples() {
    let sin = check_c1(&builtin("smooth_sin", 4).unwrap().family, &cfg()).unwrap();
    assert_eq!(sin.verdict, Verdict::Pass);
    assert!(sin.diagnostics["oracle_residual"] < 1e-8);

    let kink = check_c1(&builtin("lipschitz_kink", 4).unwrap().family, &cfg()).unwrap();
    assert_eq!(kink.verdict, Verdict::Fail);
    assert!(kink
        .failure_loci
        .iter()
        .any(|&t| (t - 0.5).abs() <= 1.0 / 128.0));

    let constant = check_c1(&builtin("constant", 4).unwrap().family, &cfg()).unwrap();
    assert_eq!(constant.verdict, Verdict::Pass);
}

#[test]
fn yosida_examples() {
    let fam = builtin("scalar_affine", 1).unwrap().family;
    let r = check_yosida(&fam, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((r.bounds.quotient_m.unwrap() - 1.0).abs() <= 1e-3);
    assert!((r.diagnostics["limit_norm_at_1"] - 0.5).abs() <= 1e-3);
    assert!(yosida_modified_flag(&fam, &cfg(), &r));

    let constant = builtin("constant", 4).unwrap().family;
    let r = check_yosida(&constant, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.bounds.quotient_m.unwrap(), 0.0);
    assert!(yosida_modified_flag(&constant, &cfg(), &r));

    let kink = builtin("lipschitz_kink", 4).unwrap().family;
    let r = check_yosida(&kink, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(part(&r, "ii"), Verdict::Fail);
    assert!(r.convergence.stagnation_ratio.unwrap() >= 0.9);
    assert!(!yosida_modified_flag(&kink, &cfg(), &r));
}

#[test]
fn equivalence_examples() {
    for (name, expected) in [
        ("smooth_sin", Verdict::Pass),
        ("step", Verdict::Fail),
        ("constant", Verdict::Pass),
    ] {
        let entry = builtin(name, 4).unwrap();
        let r = equivalence_matrix(&entry, &cfg()).unwrap();
        assert_eq!(r.agreement, Agreement::Agree, "{name}");
        assert_eq!(r.verdicts, [expected; 3], "{name}");
        assert_eq!(r.matches_truth, Some(true));
    }
}

#[test]
fn coarse_grid_never_fabricates_disagreement() {
    let entry = builtin("scalar_affine", 1).unwrap();
    let mut c = cfg();
    c.grid_n = 33;
    let r = equivalence_matrix(&entry, &c).unwrap();
    assert_ne!(r.agreement, Agreement::Disagree);
}

#[test]
fn catalog_truth_tables() {
    for name in BUILTIN_NAMES {
        let e = builtin(name, evolveq::catalog::default_dim(name)).unwrap();
        assert!(e.truth.is_consistent(), "{name}");
    }
    assert_eq!(builtin("constant", 2).unwrap().truth.kato53, Expected::Pass);
    assert_eq!(
        builtin("lipschitz_kink", 4).unwrap().truth.c1,
        Expected::Fail
    );
    let affine = builtin("scalar_affine", 1).unwrap();
    assert_eq!(affine.family.eval(0.25).unwrap()[(0, 0)], -1.25);
}

#[test]
fn family_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("affine.json");
    std::fs::write(
        &path,
        FamilySpecFile::from_family(&builtin("scalar_affine", 1).unwrap().family).to_json(),
    )
    .unwrap();
    let fam = load_family(&path).unwrap();
    assert_eq!(fam.eval(0.5).unwrap()[(0, 0)], -1.5);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dim": 2, "shift": 0.0, "terms": [{"coeff": {"kind": "constant", "params": [1.0]},
            "matrix": [[1,0,0],[0,1,0],[0,0,1]]}]}"#,
    )
    .unwrap();
    assert!(matches!(load_family(&bad), Err(Error::Shape(_))));

    let sampled = dir.path().join("sampled.json");
    std::fs::write(
        &sampled,
        r#"{"dim": 1, "shift": 0.0, "terms": [{"coeff": {"kind": "sampled", "params": [], "samples": [[0, 1], [1, 2]]},
            "matrix": [[1]]}]}"#,
    )
    .unwrap();
    assert_eq!(
        load_family(&sampled).unwrap().eval(0.5).unwrap()[(0, 0)],
        1.5
    );

    assert!(matches!(
        load_family(dir.path().join("missing.json")),
        Err(Error::Io(_))
    ));
}

#[test]
fn lemma_on_family_path() {
    let f = named_path("family:smooth_sin:0", 4096, None, cfg().seed).unwrap();
    let r = reconstruct_and_verify(&f, &default_ladder(4096)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let scale = f
        .times()
        .iter()
        .map(|&t| f.value_at(t).norm())
        .fold(0.0, f64::max);
    assert!(telescope_check(&f, 1, 4, 8).unwrap() <= 1e-12 * scale);
    assert!(r.mve_margin >= -1e-9);
    let q = left_quotients(&f, 64).unwrap();
    assert_eq!(q.times()[0], 1.0 / 64.0);
}

#[test]
fn lemma_paths_by_name() {
    let lin = named_path("linear", 1024, None, 0).unwrap();
    let r = reconstruct_and_verify(&lin, &default_ladder(1024)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.mve_margin.abs() <= 1e-9);
    let kink = named_path("kink", 1024, None, 0).unwrap();
    assert_eq!(
        reconstruct_and_verify(&kink, &default_ladder(1024))
            .unwrap()
            .verdict,
        Verdict::Fail
    );
}

#[test]
fn propagator_examples() {
    let constant = builtin("constant", 2).unwrap().family;
    let grid = Grid::uniform(16).unwrap();
    let traj = solve_ivp(&constant, 0.0, &DVector::from_vec(vec![1.0, 1.0]), &grid).unwrap();
    let x = traj.final_state();
    assert_relative_eq!(x[0], (-1.0f64).exp(), epsilon = 1e-8);
    assert_relative_eq!(x[1], (-2.0f64).exp(), epsilon = 1e-8);

    let affine = builtin("scalar_affine", 1).unwrap().family;
    let traj = solve_ivp(&affine, 0.0, &DVector::from_element(1, 1.0), &grid).unwrap();
    assert!((traj.final_state()[0] - 0.2231302).abs() <= 1e-7);

    let p = Propagator::build(&affine, &grid, Method::ReferenceRk4 { n_sub: 64 }).unwrap();
    assert!(verify_evolution_axioms(&p).unwrap().passed());

    let u = frozen_product(&constant, 0.0, 1.0, 5).unwrap();
    let expected =
        DMatrix::from_diagonal(&DVector::from_vec(vec![(-1.0f64).exp(), (-2.0f64).exp()]));
    assert!((u - expected).abs().max() <= 1e-12);
}

#[test]
fn dissipative_propagation_contracts() {
    let lap = builtin("discrete_laplacian", 16).unwrap().family;
    assert!(lap.flags().dissipative);
    let grid = Grid::uniform(16).unwrap();
    let p = Propagator::build(&lap, &grid, Method::FrozenProduct { n_sub: 16 }).unwrap();
    let r = verify_evolution_axioms(&p).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.contraction_excess.unwrap() <= 1e-8);
}
