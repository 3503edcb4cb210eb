//! Schematic SVG rendering of a sweep: bifurcation diagram on the left, cobweb on the right.

use std::fmt::Write as _;

use bcnf_core::map_core::{evaluate, PiecewiseMap};

use crate::{Stability, SweepSlice, GENERATOR};

const W: f64 = 420.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

struct Frame {
    x0: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + PAD + (x - self.x_lo) / (self.x_hi - self.x_lo) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y_lo) / (self.y_hi - self.y_lo) * (H - 2.0 * PAD)
    }

    fn axes(&self, s: &mut String, x_label: &str, y_label: &str) {
        let (l, r) = (self.x0 + PAD, self.x0 + W - PAD);
        writeln!(
            s,
            r#"<rect x="{l:.2}" y="{PAD:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            H - 2.0 * PAD
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, (l + r) / 2.0, H - 10.0)
            .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{y_label}</text>"#, self.x0 + 14.0, H / 2.0)
            .unwrap();
    }

    fn polyline(&self, s: &mut String, pts: &[(f64, f64)], style: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        writeln!(s, r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" ")).unwrap();
    }
}

fn branch_style(st: Stability) -> &'static str {
    match st {
        Stability::Stable => r#"stroke="black" stroke-width="1.5""#,
        Stability::Unstable => r#"stroke="black" stroke-dasharray="4,3""#,
        Stability::Virtual => r#"stroke="gray" stroke-dasharray="1,3""#,
        Stability::Cycle => r#"stroke="blue" stroke-width="1.5""#,
    }
}

/// Splits each branch into runs of constant stability and consecutive grid points.
fn branch_runs(slices: &[SweepSlice]) -> Vec<(Stability, Vec<(f64, f64)>)> {
    let mut runs: Vec<(Stability, Vec<(f64, f64)>)> = Vec::new();
    for id in 0..4 {
        let mut cur: Option<(Stability, Vec<(f64, f64)>)> = None;
        for s in slices {
            match s.branches.iter().find(|b| b.branch_id == id) {
                Some(b) => match &mut cur {
                    Some((st, pts)) if *st == b.stability => pts.push((s.mu, b.x)),
                    _ => {
                        if let Some(run) = cur.take() {
                            runs.push(run);
                        }
                        cur = Some((b.stability, vec![(s.mu, b.x)]));
                    }
                },
                None => {
                    if let Some(run) = cur.take() {
                        runs.push(run);
                    }
                }
            }
        }
        if let Some(run) = cur {
            runs.push(run);
        }
    }
    runs
}

pub fn diagram(map: &PiecewiseMap, slices: &[SweepSlice], cobweb: Option<(f64, &[f64])>) -> String {
    let p = map.half_width();
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}" font-family="sans-serif" font-size="12">"#,
        2.0 * W
    )
    .unwrap();
    writeln!(s, "<!-- generator: {GENERATOR} -->").unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    let (mu_lo, mu_hi) = match (slices.first(), slices.last()) {
        (Some(a), Some(b)) if b.mu > a.mu => (a.mu, b.mu),
        _ => (-1.0, 1.0),
    };
    let left = Frame { x0: 0.0, x_lo: mu_lo, x_hi: mu_hi, y_lo: -p, y_hi: p };
    left.axes(&mut s, "mu", "x");
    left.polyline(&mut s, &[(0.0, -p), (0.0, p)], r#"stroke="lightgray""#);
    for sl in slices {
        for &x in &sl.attractor {
            if x.abs() <= p {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8" fill="red"/>"#, left.px(sl.mu), left.py(x))
                    .unwrap();
            }
        }
    }
    for (st, pts) in branch_runs(slices) {
        left.polyline(&mut s, &pts, branch_style(st));
    }

    if let Some((mu, orbit)) = cobweb {
        let right = Frame { x0: W, x_lo: -p, x_hi: p, y_lo: -p, y_hi: p };
        right.axes(&mut s, &format!("x (mu = {mu})"), "f(x)");
        // identity line dashed
        right.polyline(&mut s, &[(-p, -p), (p, p)], r#"stroke="black" stroke-dasharray="5,4""#);
        let graph: Vec<(f64, f64)> = (0..=200)
            .map(|k| {
                let x = -p + 2.0 * p * k as f64 / 200.0;
                (x, evaluate(map, x, mu).clamp(-p, p))
            })
            .collect();
        right.polyline(&mut s, &graph, r#"stroke="black" stroke-width="1.5""#);
        let mut web = Vec::new();
        for w in orbit.windows(2) {
            web.push((w[0], w[0]));
            web.push((w[0], w[1]));
        }
        if web.len() > 1 {
            web.remove(0);
        }
        let web: Vec<(f64, f64)> = web.into_iter().map(|(x, y)| (x.clamp(-p, p), y.clamp(-p, p))).collect();
        right.polyline(&mut s, &web, r#"stroke="red""#);
    }
    s.push_str("</svg>\n");
    s
}
