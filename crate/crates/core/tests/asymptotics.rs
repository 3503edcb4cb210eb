use bcnf_core::invariant_sets::{find_fixed_point, find_period_two};
use bcnf_core::map_core::{extract_bifurcation_data, BifurcationData, PiecewiseMap, Side};
use bcnf_core::normal_form_matcher::{
    match_t_period_doubling, match_t_saddle_node, t_period_doubling_limit, t_saddle_node_limit,
};

fn quad_map(a: [f64; 2], c: [f64; 2], d: [f64; 2], beta: f64, e: f64) -> PiecewiseMap {
    let side = |k: usize| vec![(1, 0, a[k]), (0, 1, beta), (0, 2, e), (2, 0, c[k]), (1, 1, d[k])];
    PiecewiseMap::from_terms(&side(0), &side(1)).unwrap()
}

fn extrapolate(s: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (s[i + m] * p[i] - s[i] * p[i + 1]) / (s[i + m] - s[i]);
        }
    }
    p[0]
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn grid() -> Vec<f64> {
    (0..12).map(|k| 1e-2 * 0.6f64.powi(k)).collect()
}

#[test]
fn fixed_points_leave_the_linear_skeleton_at_second_order() {
    let f = quad_map([0.5, 0.8], [0.2, -0.1], [0.3, -0.4], 1.3, 0.5);
    let d = extract_bifurcation_data(&f).unwrap();
    for (side, sign) in [(Side::Left, -1.0), (Side::Right, 1.0)] {
        let mus: Vec<f64> = grid().into_iter().map(|m| sign * m).collect();
        let errs: Vec<f64> = mus
            .iter()
            .map(|&mu| (find_fixed_point(&f, mu, side).unwrap().location - d.beta * mu / (1.0 - d.slope(side))).abs())
            .collect();
        let slope = loglog_slope(&grid(), &errs);
        assert!((slope - 2.0).abs() <= 0.1, "{side:?}: slope {slope}");
    }
}

fn xi_coefficient(d: &BifurcationData) -> f64 {
    let (al, ar) = (d.a_l, d.a_r);
    al * d.d_r + ar * d.d_l + 2.0 * (al * (1.0 + al) * d.c_r + ar * (1.0 + ar) * d.c_l) * d.beta / (1.0 - al * ar)
}

#[test]
fn cycle_multiplier_first_order_correction() {
    let maps = [
        quad_map([-0.4, -2.0], [1.0, 0.0], [0.0, 0.0], 1.0, 0.0),
        quad_map([-0.5, -1.5], [0.5, -0.3], [0.2, 0.4], 1.2, 0.0),
        quad_map([-0.3, -2.5], [-1.0, 0.6], [-0.5, 0.1], 0.8, 0.3),
    ];
    for f in &maps {
        let d = extract_bifurcation_data(f).unwrap();
        let mus = [4e-4, 2e-4, 1e-4, 5e-5];
        let q: Vec<f64> =
            mus.iter().map(|&mu| (find_period_two(f, mu).unwrap().multiplier - d.a_l * d.a_r) / mu).collect();
        let k = extrapolate(&mus, &q);
        assert!((k - xi_coefficient(&d)).abs() <= 1e-4, "{k} vs {}", xi_coefficient(&d));
    }
    // the map with c_L = 1 only
    assert!((xi_coefficient(&extract_bifurcation_data(&maps[0]).unwrap()) - 20.0).abs() < 1e-12);
}

#[test]
fn t_is_continuous_at_zero() {
    let sn = quad_map([2.0, 0.5], [1.0, 1.0], [0.0, 0.0], 1.0, 0.0);
    let d = extract_bifurcation_data(&sn).unwrap();
    let t0 = t_saddle_node_limit(&d);
    let gaps: Vec<f64> = grid().iter().map(|&mu| (match_t_saddle_node(&d, &sn, mu).unwrap() - t0).abs()).collect();
    assert!(loglog_slope(&grid(), &gaps) >= 0.9);

    // with c_R = 0 the map is its own normal form and t is constant, so use c_R != 0
    let pd = quad_map([-0.5, -1.5], [0.5, -0.3], [0.0, 0.0], 1.0, 0.0);
    let d = extract_bifurcation_data(&pd).unwrap();
    let t0 = t_period_doubling_limit(&d);
    let mus: Vec<f64> = grid().into_iter().map(|m| 0.1 * m).collect();
    let gaps: Vec<f64> = mus.iter().map(|&mu| (match_t_period_doubling(&d, &pd, mu).unwrap() - t0).abs()).collect();
    let slope = loglog_slope(&mus, &gaps);
    assert!(slope >= 0.9, "{slope}");
}

#[test]
fn implicit_t_extrapolates_to_closed_form() {
    let mus = [4e-4, 2e-4, 1e-4, 5e-5];
    for f in [
        quad_map([2.0, 0.5], [1.0, 1.0], [0.0, 0.0], 1.0, 0.0),
        quad_map([1.5, 0.3], [-0.7, 2.0], [0.0, 0.0], 1.0, 0.0),
        quad_map([3.0, -0.6], [0.4, -1.2], [0.0, 0.0], 2.0, 0.0),
    ] {
        let d = extract_bifurcation_data(&f).unwrap();
        let ts: Vec<f64> = mus.iter().map(|&mu| match_t_saddle_node(&d, &f, mu).unwrap()).collect();
        let t0 = extrapolate(&mus, &ts);
        assert!((t0 - t_saddle_node_limit(&d)).abs() <= 1e-4, "{t0} vs {}", t_saddle_node_limit(&d));
    }
    for f in [
        quad_map([-0.4, -2.0], [1.0, 0.0], [0.0, 0.0], 1.0, 0.0),
        quad_map([-0.5, -1.5], [0.5, -0.3], [0.0, 0.0], 1.0, 0.0),
        quad_map([-0.3, -2.5], [-1.0, 0.6], [0.0, 0.0], 1.0, 0.0),
    ] {
        let d = extract_bifurcation_data(&f).unwrap();
        let ts: Vec<f64> = mus.iter().map(|&mu| match_t_period_doubling(&d, &f, mu).unwrap()).collect();
        let t0 = extrapolate(&mus, &ts);
        assert!((t0 - t_period_doubling_limit(&d)).abs() <= 1e-4, "{t0} vs {}", t_period_doubling_limit(&d));
    }
    // values quoted for the two reference maps
    let sn = extract_bifurcation_data(&quad_map([2.0, 0.5], [1.0, 1.0], [0.0, 0.0], 1.0, 0.0)).unwrap();
    assert_eq!(t_saddle_node_limit(&sn), 9.0);
    let pd = extract_bifurcation_data(&quad_map([-0.4, -2.0], [1.0, 0.0], [0.0, 0.0], 1.0, 0.0)).unwrap();
    assert_eq!(t_period_doubling_limit(&pd), 1.0);
}
