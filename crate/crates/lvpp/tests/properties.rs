use lvpp::entropy::{atanh_map, bregman_boltzmann, exp_clamped, lnit, sigmoid, tanh_map, EntropyKind};
use lvpp::linalg::CsrMatrix;
use lvpp::mesh::unit_square_mesh;
use lvpp::schedules::{StepRule, StepSchedule};
use proptest::prelude::*;

const X: [f64; 2] = [0.1, 0.7];

fn interior() -> impl Strategy<Value = f64> {
    1e-4..1.0 - 1e-4
}

proptest! {
    #[test]
    fn bregman_is_nonnegative_and_vanishes_on_the_diagonal(u in interior(), w in interior()) {
        for kind in [EntropyKind::boltzmann(), EntropyKind::fermi_dirac()] {
            let d = kind.divergence(u, w, X).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(kind.divergence(u, u, X).unwrap(), 0.0);
        }
        prop_assert!(bregman_boltzmann(u, w).unwrap() >= 0.0);
    }

    #[test]
    fn three_points_identity(u in interior(), v in interior(), w in interior()) {
        for kind in [EntropyKind::boltzmann(), EntropyKind::fermi_dirac()] {
            let d = |p: f64, q: f64| kind.divergence(p, q, X).unwrap();
            let g = |p: f64| kind.gradient(p, X).unwrap();
            let lhs = d(u, v) - d(u, w) + d(v, w);
            let rhs = (g(v) - g(w)) * (v - u);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + d(u, v) + d(u, w) + d(v, w)));
        }
    }

    #[test]
    fn latent_maps_invert(y in -15.0f64..15.0) {
        prop_assert!((lnit(sigmoid(y)).unwrap() - y).abs() <= 1e-8 * (1.0 + y.abs()));
        let t = tanh_map(y / 10.0);
        if t.abs() < 1.0 - 1e-12 {
            prop_assert!((atanh_map(t).unwrap() - y / 10.0).abs() <= 1e-8);
        }
        prop_assert!(exp_clamped(y) > 0.0);
    }

    #[test]
    fn gradient_inverts_primal(psi in -20.0f64..20.0) {
        let kind = EntropyKind::fermi_dirac();
        let u = kind.primal(psi, X).unwrap();
        if u > 1e-9 && u < 1.0 - 1e-9 {
            prop_assert!((kind.gradient(u, X).unwrap() - psi).abs() <= 1e-6 * (1.0 + psi.abs()));
        }
    }

    #[test]
    fn schedule_grammar_round_trips(alpha in 0.1f64..10.0, mu in 1.1f64..4.0, m in 0u32..3) {
        for rule in [
            StepRule::Fixed { alpha },
            StepRule::Geometric { c: 1.0, mu },
            StepRule::Arithmetic { c: alpha, m },
            StepRule::Factorial { c: alpha },
        ] {
            prop_assert_eq!(rule.to_string().parse::<StepRule>().unwrap(), rule);
        }
    }

    #[test]
    fn partial_sums_follow_closed_forms(c in 0.1f64..5.0, mu in 1.1f64..3.0) {
        for rule in [StepRule::Fixed { alpha: c }, StepRule::Arithmetic { c, m: 1 }, StepRule::Geometric { c, mu }] {
            let alphas = StepSchedule::take(rule, 30).unwrap();
            let mut sum = 0.0;
            for (k, a) in alphas.iter().enumerate() {
                sum += a;
                let closed = rule.log_partial_sum(k as u32 + 1).unwrap().exp();
                prop_assert!((sum / closed - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sparse_product_matches_dense(entries in prop::collection::vec((0usize..6, 0usize..5, -3.0f64..3.0), 0..40),
                                    x in prop::collection::vec(-1.0f64..1.0, 5)) {
        let a = CsrMatrix::from_triplets(6, 5, &entries).unwrap();
        let dense = a.to_dense();
        let y = a.mul_vec(&x);
        for i in 0..6 {
            let want: f64 = (0..5).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - want).abs() < 1e-12);
        }
        prop_assert_eq!(a.par_mul_vec(&x), y);
    }
}

#[test]
fn non_fixed_rules_are_unsummable() {
    let rules = [
        StepRule::Arithmetic { c: 1.0, m: 0 },
        StepRule::Geometric { c: 1.0, mu: 2.0 },
        StepRule::Factorial { c: 1.0 },
        StepRule::PaperDoubleExp { r: 1.5, q: 1.5, floor: 1.0, cap: 1e10 },
    ];
    for rule in rules {
        let alphas = StepSchedule::take(rule, 100).unwrap();
        let sums: Vec<f64> = alphas
            .iter()
            .scan(0.0, |s, a| {
                *s += a;
                Some(*s)
            })
            .collect();
        assert!(sums.windows(2).all(|w| w[1] > w[0]), "{rule}");
        assert!(sums[99] > 1e3, "{rule}: {}", sums[99]);
    }
}

#[test]
fn factorial_partial_sums_are_exact() {
    let alphas = StepSchedule::take(StepRule::Factorial { c: 1.0 }, 12).unwrap();
    let mut sum: u64 = 0;
    let mut fact: u64 = 1;
    for (k, a) in alphas.iter().enumerate() {
        let k = k as u64 + 1;
        sum += *a as u64;
        assert_eq!(*a, a.round());
        fact *= k;
        assert_eq!(sum, fact, "k = {k}");
    }
}

#[test]
fn telescoping_partial_sums() {
    let (r, q, mu) = (1.5, 1.5, 2.0);
    let rule = StepRule::DoubleExp { r, q, mu, cap: f64::INFINITY };
    let alphas = StepSchedule::take(rule, 8).unwrap();
    let mut sum = 0.0;
    for (k, a) in alphas.iter().enumerate() {
        sum += a;
        let want = r.powf(1.0 / (q - 1.0)) * mu.powf(q.powi(k as i32));
        assert!((sum / want - 1.0).abs() < 1e-10);
    }
}

#[test]
fn refinement_preserves_area_and_quality() {
    let mesh = unit_square_mesh(2).unwrap();
    let fine = mesh.refined(3);
    assert_eq!(fine.n_cells(), mesh.n_cells() * 64);
    assert!((fine.area() - mesh.area()).abs() < 1e-12);
    assert!((fine.min_angle() - mesh.min_angle()).abs() < 1e-12);
}
