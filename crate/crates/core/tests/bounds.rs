use bcnf_core::poly::Poly1;
use bcnf_core::verifier::{check_appendix_bounds, check_chi_bound, chi_triple, AppendixGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn iterate_bounds_hold_for_cubic_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let lambda = rng.gen_range(0.2..0.9);
        let f = Poly1::new(vec![0.0, lambda, rng.gen_range(-2.0..2.0), rng.gen_range(-5.0..5.0)]);
        // K measured by the checker; radius chosen from a safe upper estimate
        let k = 2.0 * f.coeff(2).abs() + 6.0 * f.coeff(3).abs() * 0.05 + 1e-3;
        let r = lambda * (1.0 - lambda) / (10.0 * k);
        let rep =
            check_appendix_bounds(&f, lambda, None, &AppendixGrid { radius: 0.9 * r, points: 500, n_max: 60 }, 1.0)
                .unwrap();
        assert_eq!(rep.violations, 0, "{f:?}");
    }
}

#[test]
fn iterate_bound_rejects_bad_hypotheses() {
    let f = Poly1::new(vec![0.0, 0.5, 1.0]);
    let grid = AppendixGrid { radius: 0.001, points: 10, n_max: 5 };
    assert_eq!(check_appendix_bounds(&f, 1.5, None, &grid, 1.0).unwrap_err().kind(), "HypothesisViolation");
    // K below the true |f''| = 2
    assert_eq!(check_appendix_bounds(&f, 0.5, Some(1.0), &grid, 1.0).unwrap_err().kind(), "HypothesisViolation");
    let wide = AppendixGrid { radius: 0.1, points: 10, n_max: 5 };
    assert_eq!(check_appendix_bounds(&f, 0.5, Some(2.0), &wide, 1.0).unwrap_err().kind(), "HypothesisViolation");
}

#[test]
fn difference_quotient_bound_and_corrupted_conjugacy() {
    let t = chi_triple(0.4, 1.2, -1.5, 1.1, 1.0, 1000).unwrap();
    assert_eq!(t.check().unwrap().violations, 0);
    let b = t.cfg.b;
    // narrow bump near the fixed point; h(0) and h(b) are unchanged
    let bumped = |x: f64| Ok(t.h.eval(x)? + 0.1 * b * (-((x - 0.02 * b) / (0.005 * b)).powi(2)).exp());
    let rep = check_chi_bound(&t.f, &t.g, &bumped, &t.cfg).unwrap();
    assert!(rep.violations > 0);
}
