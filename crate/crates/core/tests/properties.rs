mod common;

use std::sync::Arc;

use biconf_core::biconformal::{
    conformal_laplacian, conformal_ricci_coords, deformed_laplacian, horizontal_bracket, metric_of,
    ricci_coords, ricci_mixed,
};
use biconf_core::curvature::max_abs_diff;
use biconf_core::einstein::profile::FieldProfile;
use biconf_core::einstein::{
    integrate_rho, single_param_residuals, special_residuals, FamilyParams, Termination,
};
use biconf_core::fields::{parse_expr, ExprField};
use biconf_core::{CurvatureOracle, DeformationPair, Point, ScalarField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(s: &str) -> ExprField {
    ExprField::parse(s).unwrap()
}

#[test]
fn printer_parser_round_trip_on_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut corpus: Vec<String> = common::SMOOTH_FIELDS.iter().map(|s| s.to_string()).collect();
    corpus.extend(["-x1^2", "2^3^2", "(x1 - x2) - x3", "x1 - (x2 - x3)", "8/(4/2)", "-(-x1)"].map(String::from));
    while corpus.len() < 50 {
        corpus.push(common::random_expr(&mut rng, 4));
    }
    for text in &corpus {
        let e = parse_expr(text).unwrap();
        let printed = e.to_string();
        let reparsed = parse_expr(&printed).unwrap();
        assert_eq!(reparsed, e, "{text} -> {printed}");
        assert_eq!(reparsed.to_string(), printed);
    }
}

fn fd_first(f: &ExprField, p: [f64; 4], i: usize, h: f64) -> f64 {
    let at = |d: f64| {
        let mut q = p;
        q[i] += d;
        f.eval(&Point::new(q)).unwrap()
    };
    (at(h) - at(-h)) / (2.0 * h)
}

fn fd_second(f: &ExprField, p: [f64; 4], i: usize, j: usize, h: f64) -> f64 {
    let at = |di: f64, dj: f64| {
        let mut q = p;
        q[i] += di;
        q[j] += dj;
        f.eval(&Point::new(q)).unwrap()
    };
    (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn jets_match_centered_differences(
        k in 0..common::SMOOTH_FIELDS.len(),
        p in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let f = field(common::SMOOTH_FIELDS[k]);
        let jet = f.jet(&Point::new(p)).unwrap();
        let h = 1e-4;
        for i in 0..4 {
            let fd = fd_first(&f, p, i, h);
            prop_assert!((jet.grad[i] - fd).abs() <= 1e-6 * jet.grad[i].abs().max(1.0));
            for j in 0..4 {
                let fd = if i == j {
                    let mut q = p;
                    q[i] += h;
                    let up = f.eval(&Point::new(q)).unwrap();
                    q[i] -= 2.0 * h;
                    let down = f.eval(&Point::new(q)).unwrap();
                    (up - 2.0 * jet.value + down) / (h * h)
                } else {
                    fd_second(&f, p, i, j, h)
                };
                prop_assert!(
                    (jet.hess[i][j] - fd).abs() <= 1e-6 * jet.hess[i][j].abs().max(1.0),
                    "field {} d{}d{}: {} vs {}", k, i, j, jet.hess[i][j], fd
                );
            }
        }
    }

    #[test]
    fn mixed_partials_are_symmetric(seed in any::<u64>(), p in prop::array::uniform4(-1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = field(&common::positive_field(&mut rng));
        let q = Point::new(p);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(f.partial2(&q, i, j).unwrap(), f.partial2(&q, j, i).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_ricci_agrees_with_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DeformationPair::from_exprs(
            &common::positive_field(&mut rng),
            &common::positive_field(&mut rng),
        ).unwrap();
        let g = metric_of(&d);
        let p = Point::new(common::point(&mut rng, 0.5));
        let closed = ricci_coords(&d, &p).unwrap();
        let fd = CurvatureOracle::default().ricci(&g, &p).unwrap();
        prop_assert!(fd.asymmetry < 1e-6);
        prop_assert!(max_abs_diff(&closed, &fd.ricci) < 1e-4);
    }

    #[test]
    fn conformal_case_reduces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::positive_field(&mut rng);
        let d = DeformationPair::from_exprs(&s, &s).unwrap();
        let p = Point::new(common::point(&mut rng, 0.5));
        let a = ricci_coords(&d, &p).unwrap();
        let b = conformal_ricci_coords(&*d.sigma().clone(), &p).unwrap();
        prop_assert!(max_abs_diff(&a, &b) < 1e-8);
        let f = field(&common::positive_field(&mut rng));
        let l1 = deformed_laplacian(&d, &f, &p).unwrap();
        let l2 = conformal_laplacian(&**d.sigma(), &f, &p).unwrap();
        prop_assert!((l1 - l2).abs() < 1e-8);
    }

    #[test]
    fn separated_pairs_have_no_mixed_block(
        a in 0.1f64..0.9, b in -0.5f64..0.5, p in prop::array::uniform4(-0.5f64..0.5),
    ) {
        let d = DeformationPair::from_exprs(
            &format!("2 + {a}*x1*x2 + exp({b}*x2)"),
            &format!("1.5 + sin({a}*x3) * {b} + x4^2"),
        ).unwrap();
        prop_assert_eq!(ricci_mixed(&d, &Point::new(p)).unwrap(), [[0.0; 2]; 2]);
    }

    #[test]
    fn horizontal_bracket_is_horizontal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DeformationPair::from_exprs(
            &common::positive_field(&mut rng),
            &common::positive_field(&mut rng),
        ).unwrap();
        let br = horizontal_bracket(&d, &Point::new(common::point(&mut rng, 0.5))).unwrap();
        prop_assert!(br[2].abs() < 1e-10 && br[3].abs() < 1e-10);
    }

    #[test]
    fn deformed_laplacian_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DeformationPair::from_exprs(
            &common::positive_field(&mut rng),
            &common::positive_field(&mut rng),
        ).unwrap();
        let f = field(&common::positive_field(&mut rng));
        let p = Point::new(common::point(&mut rng, 0.5));
        let closed = deformed_laplacian(&d, &f, &p).unwrap();
        let fd = CurvatureOracle::default().laplace_beltrami(&metric_of(&d), &f, &p).unwrap();
        prop_assert!((closed - fd).abs() < 1e-4, "{} vs {}", closed, fd);
    }

    #[test]
    fn reduced_equation_sets_are_equivalent(seed in any::<u64>(), t in -0.5f64..0.5, a in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prof = FieldProfile::new(
            Arc::new(field(&common::positive_field(&mut rng))),
            Arc::new(field(&common::positive_field(&mut rng))),
        );
        let r = single_param_residuals(&prof, a, t).unwrap();
        let [ra, rb] = special_residuals(&prof, a, t).unwrap();
        let s = prof_sigma(&prof, t);
        prop_assert!((r[0] - ra - 2.0 * s * s * rb).abs() < 1e-12);
        prop_assert!((r[1] - ra).abs() < 1e-12);
    }

    #[test]
    fn first_family_is_monotone_and_bounded(alpha in -3.0f64..-0.2, beta in 0.3f64..2.0) {
        let fp = FamilyParams::new(alpha, beta, 1.0).unwrap();
        let traj = integrate_rho(&fp, 0.0, 1e-2, 5.0).unwrap();
        prop_assert_eq!(traj.termination, Termination::ReachedEnd);
        for w in traj.samples.windows(2) {
            // once saturated at the float nearest beta the sequence may stall
            prop_assert!(w[1].rho > w[0].rho || beta - w[1].rho < 1e-12 * beta);
            prop_assert!(w[1].rho <= beta);
        }
    }
}

fn prof_sigma(p: &FieldProfile, t: f64) -> f64 {
    use biconf_core::einstein::Profile;
    p.sigma_log_jet(t).unwrap()[0]
}
