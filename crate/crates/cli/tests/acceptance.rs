//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails other than in its documented way.

use std::io::Write as _;
use std::process::Command;
use std::time::Instant;

use bcnf_core::conjugacy_builder::build_seed_chart;
use bcnf_core::invariant_sets::{find_fixed_point, find_period_two, normal_form_cycle, normal_form_fixed_point};
use bcnf_core::map_core::{extract_bifurcation_data, PiecewiseMap, Side};
use bcnf_core::normal_form_matcher::{match_t_period_doubling, match_t_saddle_node};
use bcnf_core::pipeline::{analyze, match_normal_form};
use bcnf_core::poly::Poly1;
use bcnf_core::verifier::{
    check_appendix_bounds, check_neighborhood_ratio, chi_triple, slope_freedom_report, AppendixGrid, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// Fails in the way recorded for this criterion; does not fail the run.
    expected_failure: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, expected_failure: false }
    }
}

fn region1() -> PiecewiseMap {
    PiecewiseMap::from_terms(&[(1, 0, 0.5), (0, 1, 1.0), (2, 0, 0.2)], &[(1, 0, 0.8), (0, 1, 1.0), (2, 0, -0.1)])
        .unwrap()
        .with_half_width(0.05)
}

fn region2() -> PiecewiseMap {
    PiecewiseMap::from_terms(&[(1, 0, 2.0), (0, 1, 1.0), (2, 0, 1.0)], &[(1, 0, 0.5), (0, 1, 1.0), (2, 0, 1.0)])
        .unwrap()
        .with_half_width(0.05)
}

fn region3() -> PiecewiseMap {
    PiecewiseMap::from_terms(&[(1, 0, -0.4), (0, 1, 1.0), (2, 0, 1.0)], &[(1, 0, -2.0), (0, 1, 1.0)]).unwrap()
}

/// Value at 0 of the interpolating polynomial through `(s, v)`.
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

fn criterion_1() -> Outcome {
    let f = region1();
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut problems = Vec::new();
    for mu in [-0.02, -0.005, 0.0, 0.005, 0.02] {
        let res = analyze(&f, mu).and_then(|a| Ok((a.normal_form.params.t, a.verify(&VerifyOptions::default())?)));
        match res {
            Ok((t, rep)) => {
                let h0 = rep.h_at_zero.map_or(f64::NAN, f64::abs);
                let gap = rep.derivative_gap.unwrap_or(f64::NAN);
                worst = (worst.0.max(rep.residual_sup), worst.1.max(h0), worst.2.max(gap));
                if !(rep.residual_sup <= 1e-7 && h0 <= 1e-10 && gap <= 1e-4 && t == 0.0) {
                    problems.push(format!(
                        "mu={mu}: residual {:.2e}, |h(0)| {h0:.2e}, gap {gap:.2e}, t {t}",
                        rep.residual_sup
                    ));
                }
            }
            Err(e) => problems.push(format!("mu={mu}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 2.0 {
        problems.push(format!("runtime {secs:.2}s"));
    }
    Outcome::new(
        problems.is_empty(),
        format!(
            "residual {:.1e}, |h(0)| {:.1e}, gap {:.1e}, runtime {secs:.2}s{}",
            worst.0,
            worst.1,
            worst.2,
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn criterion_2() -> Outcome {
    let f =
        PiecewiseMap::from_terms(&[(1, 0, 2.0), (0, 1, 1.0), (2, 0, 1.0)], &[(1, 0, 0.5), (0, 1, 1.0), (2, 0, 1.0)])
            .unwrap();
    let d = extract_bifurcation_data(&f).unwrap();
    // closed form: c_L - a_L (1 - a_L) c_R / (a_R (1 - a_R))
    let oracle = 1.0 - 2.0 * (1.0 - 2.0) * 1.0 / (0.5 * (1.0 - 0.5));
    let mus = [1e-3, 1e-4];
    let ts: Vec<f64> = mus.iter().map(|&mu| match_t_saddle_node(&d, &f, mu).unwrap()).collect();
    let t0 = extrapolate(&mus, &ts);
    let mut gap = 0.0f64;
    for &mu in &mus {
        let (_, g) = match_normal_form(&f, mu).unwrap();
        let lf = find_fixed_point(&f, mu, Side::Left).unwrap().multiplier;
        let lg = normal_form_fixed_point(&g.params, Side::Left).unwrap().multiplier;
        gap = gap.max((lf - lg).abs());
    }
    Outcome::new(
        (t0 - oracle).abs() <= 1e-3 && gap <= 1e-9,
        format!("t(0) extrapolated {t0:.6} vs {oracle}, left multiplier gap {gap:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let f = region3();
    let d = extract_bifurcation_data(&f).unwrap();
    let mus = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
    let xis: Vec<f64> = mus.iter().map(|&mu| find_period_two(&f, mu).unwrap().multiplier).collect();
    let xi0 = extrapolate(&mus, &xis);
    let ts: Vec<f64> = mus.iter().map(|&mu| match_t_period_doubling(&d, &f, mu).unwrap()).collect();
    let t0 = extrapolate(&mus, &ts);
    let limits_ok = (xi0 - 0.8).abs() <= 1e-6 && (t0 - 1.0).abs() <= 1e-3;

    let cycle_gap = |mu: f64| -> Result<f64, String> {
        let xi = find_period_two(&f, mu).map_err(|e| e.kind().to_string())?.multiplier;
        let (_, g) = match_normal_form(&f, mu).map_err(|e| e.kind().to_string())?;
        let xg = normal_form_cycle(&g.params).map_err(|e| e.kind().to_string())?.multiplier;
        Ok((xi - xg).abs())
    };
    let stated: Vec<(f64, Result<f64, String>)> = [0.01, 0.03].iter().map(|&mu| (mu, cycle_gap(mu))).collect();
    let stated_ok = stated.iter().all(|(_, r)| matches!(r, Ok(g) if *g <= 1e-9));
    let feasible: Vec<f64> = [0.001, 0.003].iter().map(|&mu| cycle_gap(mu).unwrap_or(f64::NAN)).collect();
    let feasible_ok = feasible.iter().all(|g| *g <= 1e-9);

    // the 2-cycle of this map solves 2 u_L^2 + 0.2 u_L + mu = 0, real only for mu <= 0.005
    let no_cycle_beyond_fold = stated.iter().all(|(_, r)| r.is_err()) && 0.04 - 8.0 * 0.01 < 0.0;
    let stated_text: Vec<String> = stated
        .iter()
        .map(|(mu, r)| match r {
            Ok(g) => format!("mu={mu}: gap {g:.1e}"),
            Err(k) => format!("mu={mu}: {k} (no 2-cycle)"),
        })
        .collect();
    Outcome {
        pass: limits_ok && stated_ok && feasible_ok,
        detail: format!(
            "xi -> {xi0:.9}, t -> {t0:.6}; {}; at mu in {{0.001, 0.003}} gaps {:.1e}, {:.1e}",
            stated_text.join(", "),
            feasible[0],
            feasible[1]
        ),
        expected_failure: limits_ok && feasible_ok && !stated_ok && no_cycle_beyond_fold,
    }
}

fn criterion_4() -> Outcome {
    let f = region1();
    let p = f.half_width();
    let sample = |m: f64| -> Vec<f64> { (0..20).map(|k| m * (2.0 * (k as f64 + 0.5) / 20.0 - 1.0)).collect() };
    let ratios_at = |mu: f64| -> Option<(f64, f64)> {
        let a = analyze(&f, mu).ok()?;
        let r = check_neighborhood_ratio(&a.conjugacies[0], p, 0.1).ok()?;
        Some((r.ratio_minus, r.ratio_plus))
    };
    let inside = |r: f64| 0.9 < r && r < 1.1;
    let holds = |m: f64| sample(m).into_iter().all(|mu| ratios_at(mu).is_some_and(|(a, b)| inside(a) && inside(b)));
    let (mut lo, mut hi) = (0.0, p);
    let mu0 = if holds(hi) {
        hi
    } else {
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let worst = sample(mu0)
        .into_iter()
        .filter_map(ratios_at)
        .map(|(a, b)| (a - 1.0).abs().max((b - 1.0).abs()))
        .fold(0.0, f64::max);
    Outcome::new(mu0 > 0.0 && holds(mu0), format!("mu0 = {mu0:.4e}, max |ratio - 1| = {worst:.3e} over 20 samples"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut maps = Vec::new();
    for _ in 0..20 {
        let lambda = rng.gen_range(0.2..=0.9);
        let mut c: f64 = rng.gen_range(-2.0..=2.0);
        if c.abs() < 1e-3 {
            c = 1e-3;
        }
        maps.push((lambda, c));
    }
    let run = |r_scale: f64| -> Result<(usize, f64), String> {
        let mut violations = 0;
        let mut worst = 0.0f64;
        for &(lambda, c) in &maps {
            let k = 2.0 * c.abs();
            let r = lambda * (1.0 - lambda) / (10.0 * k);
            let grid = AppendixGrid { radius: r, points: 500, n_max: 60 };
            let rep = check_appendix_bounds(&Poly1::new(vec![0.0, lambda, c]), lambda, Some(k), &grid, r_scale)
                .map_err(|e| e.to_string())?;
            violations += rep.violations;
            worst = worst.max(rep.worst_ratio);
        }
        Ok((violations, worst))
    };
    let main = run(1.0);
    // r enters the bounds as 1/r: dividing r by 5 loosens them, multiplying by 5 tightens them
    let literal = run(0.2);
    let tightened = run(5.0);
    match (main, literal, tightened) {
        (Ok((v, w)), Ok((vl, _)), Ok((vt, wt))) => Outcome::new(
            v == 0 && vt > 0,
            format!(
                "20 maps: {v} violations (worst ratio {w:.3}); control r/5: {vl} violations; control 5r: {vt} violations (worst ratio {wt:.3})"
            ),
        ),
        (a, b, c) => Outcome::new(false, format!("checker error: {:?} {:?} {:?}", a.err(), b.err(), c.err())),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for _ in 0..10 {
        let lambda = rng.gen_range(0.2..0.8);
        let c_f = rng.gen_range(-2.0..2.0);
        let c_g = rng.gen_range(-2.0..2.0);
        let chi = rng.gen_range(0.6..1.5);
        let frac = rng.gen_range(0.5..1.0);
        match chi_triple(lambda, c_f, c_g, chi, frac, 1000).and_then(|t| t.check()) {
            Ok(rep) => {
                violations += rep.violations;
                worst = worst.max(rep.worst_ratio);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    Outcome::new(
        violations == 0 && errors.is_empty(),
        format!(
            "10 triples x 1000 samples: {violations} violations, worst ratio {worst:.3}{}",
            if errors.is_empty() { String::new() } else { format!("; {}", errors.join("; ")) }
        ),
    )
}

fn criterion_7() -> Outcome {
    let f = Poly1::new(vec![0.0, 0.5, 1.0]);
    let chart = build_seed_chart(&f, 0.0, 0.5).unwrap();
    let mut sup = 0.0f64;
    for k in 0..=2000 {
        let x = -0.05 + 0.1 * k as f64 / 2000.0;
        sup = sup.max((chart.phi(f.eval(x)).unwrap() - 0.5 * chart.phi(x).unwrap()).abs());
    }
    let e = 1e-5;
    let d0 = (chart.phi(e).unwrap() - chart.phi(-e).unwrap()) / (2.0 * e);
    Outcome::new(
        sup <= 1e-9 && (d0 - 1.0).abs() <= 1e-6,
        format!("functional equation sup {sup:.1e}, |phi'(0) - 1| = {:.1e}", (d0 - 1.0).abs()),
    )
}

fn criterion_8() -> Outcome {
    let f =
        PiecewiseMap::from_terms(&[(1, 0, 2.0), (0, 1, 1.0), (2, 0, 1.0)], &[(1, 0, 0.5), (0, 1, 1.0), (2, 0, 1.0)])
            .unwrap();
    match slope_freedom_report(&f, (3.0, 0.2), &[-0.05, 0.0, 0.05]) {
        Ok(rep) => {
            let counts: Vec<String> = rep
                .rows
                .iter()
                .map(|r| format!("{}/{}/{}", r.map.count(), r.piecewise_linear.count(), r.quadratic.count()))
                .collect();
            Outcome::new(
                rep.counts_agree && rep.multipliers_differ,
                format!(
                    "counts {} (map/linear/quadratic), patterns agree {}, multipliers differ {}",
                    counts.join(", "),
                    rep.counts_agree,
                    rep.multipliers_differ
                ),
            )
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, f) in [("region 1", region1()), ("region 2", region2())] {
        match analyze(&f, 0.0).and_then(|a| a.verify(&VerifyOptions::default())) {
            Ok(rep) => {
                let dh = rep.h_prime_at_zero.unwrap_or(f64::NAN);
                ok &= rep.residual_sup <= 1e-7 && (dh - 1.0).abs() <= 1e-4;
                parts.push(format!("{name}: residual {:.1e}, |h'(0) - 1| {:.1e}", rep.residual_sup, (dh - 1.0).abs()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome::new(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, map, mu) in [
        (
            "r1",
            r#"{"left": [[1,0,0.5],[0,1,1.0],[2,0,0.2]], "right": [[1,0,0.8],[0,1,1.0],[2,0,-0.1]], "p": 0.05}"#,
            "0.005",
        ),
        (
            "r2",
            r#"{"left": [[1,0,2.0],[0,1,1.0],[2,0,1.0]], "right": [[1,0,0.5],[0,1,1.0],[2,0,1.0]], "p": 0.05}"#,
            "0.02",
        ),
    ] {
        let cfg = dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg, map).unwrap();
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}_{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_bcnf"))
                .args([
                    "conjugate",
                    "--config",
                    cfg.to_str().unwrap(),
                    "--mu",
                    mu,
                    "--seed",
                    "42",
                    "--out",
                    out.to_str().unwrap(),
                ])
                .output()
                .unwrap()
                .status;
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .map(|it| {
                    it.map(|e| {
                        let e = e.unwrap();
                        (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
                    })
                    .collect()
                })
                .unwrap_or_default();
            files.sort();
            ok &= status.success();
            runs.push(files);
        }
        let same = runs[0] == runs[1] && !runs[0].is_empty();
        ok &= same;
        detail.push(format!("{name}: {} files, identical {same}", runs[0].len()));
    }
    Outcome::new(ok, detail.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("region-1 end-to-end", criterion_1),
        ("saddle-node matching", criterion_2),
        ("period-doubling matching", criterion_3),
        ("neighborhood bound", criterion_4),
        ("iterate bounds suite", criterion_5),
        ("difference-quotient suite", criterion_6),
        ("Koenigs seed quality", criterion_7),
        ("slope freedom", criterion_8),
        ("mu = 0 conjugacy", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut unexpected = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && o.expected_failure { " [known deviation]" } else { "" };
        writeln!(out, "criterion {:>2} {tag}{note}: {name}: {}", i + 1, o.detail).unwrap();
        if !o.pass && !o.expected_failure {
            unexpected += 1;
        }
    }
    out.flush().unwrap();
    if unexpected > 0 {
        eprintln!("{unexpected} criterion/criteria failed unexpectedly");
        std::process::exit(1);
    }
}
