//! Shared fixtures and independent numerical oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use symcc::io::{parse_configuration, AnsatzJson};
use symcc::{parse_group, Configuration, Slot, StrataTable, SymmetricAnsatz};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn config_fixture(name: &str) -> Configuration {
    parse_configuration(&fixture_text(name)).unwrap()
}

pub fn ansatz_fixture(name: &str) -> SymmetricAnsatz {
    AnsatzJson::parse(&fixture_text(name)).unwrap().build(None).unwrap()
}

pub fn table(group: &str) -> Arc<StrataTable> {
    Arc::new(StrataTable::new(Arc::new(parse_group(group).unwrap())))
}

pub fn ansatz(group: &str, slots: &[(&str, f64)]) -> SymmetricAnsatz {
    let t = table(group);
    let slots = slots.iter().map(|(n, m)| Slot { topo: t.parse_topo(n).unwrap(), mass: *m }).collect();
    SymmetricAnsatz::new(t, slots, 1.0).unwrap()
}

/// Ansatz fixtures whose minimizers are central configurations.
pub const ANSATZ_CORPUS: &[&str] = &[
    "d3_two_triangles_hexagon.json",
    "d3_both_axes_hexagon.json",
    "d4_center_three_squares.json",
    "nested_triangles_d3.json",
    "c2h.json",
    "c2h_generic.json",
    "dnh_double_antiprism.json",
    "dnh3_double_antiprism.json",
    "nested_tetrahedra.json",
    "cuboctahedron_ansatz.json",
    "icosidodecahedron_ansatz.json",
    "truncated_tetrahedron.json",
    "d2_census.json",
    "euler_123.json",
    "euler_111.json",
];

pub fn rows(c: &Configuration) -> Vec<Vec<f64>> {
    c.points().iter().map(|p| p.iter().copied().collect()).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `sum m_i m_j / r^a`, written out directly.
pub fn potential_oracle(pts: &[Vec<f64>], m: &[f64], a: f64) -> f64 {
    let mut u = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            u += m[i] * m[j] / dist(&pts[i], &pts[j]).powf(a);
        }
    }
    u
}

pub fn inertia_oracle(pts: &[Vec<f64>], m: &[f64]) -> f64 {
    pts.iter().zip(m).map(|(p, mi)| mi * p.iter().map(|x| x * x).sum::<f64>()).sum()
}

/// Gradient of the potential by central differences with step `h`.
pub fn fd_gradient(pts: &[Vec<f64>], m: &[f64], a: f64, h: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; pts[0].len()]; pts.len()];
    for i in 0..pts.len() {
        for k in 0..pts[0].len() {
            let mut p = pts.to_vec();
            p[i][k] += h;
            let up = potential_oracle(&p, m, a);
            p[i][k] -= 2.0 * h;
            let dn = potential_oracle(&p, m, a);
            out[i][k] = (up - dn) / (2.0 * h);
        }
    }
    out
}

/// Closed-form gradient `grad_i U = a sum_j m_i m_j (x_j - x_i) / r^(a+2)`.
pub fn gradient_oracle(pts: &[Vec<f64>], m: &[f64], a: f64) -> Vec<Vec<f64>> {
    let d = pts[0].len();
    let mut g = vec![vec![0.0; d]; pts.len()];
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j {
                let r = dist(&pts[i], &pts[j]);
                for k in 0..d {
                    g[i][k] += a * m[i] * m[j] * (pts[j][k] - pts[i][k]) / r.powf(a + 2.0);
                }
            }
        }
    }
    g
}

/// `|grad U - lambda grad I| / |grad U|` with the least-squares multiplier, from the oracles above.
pub fn central_residual_oracle(pts: &[Vec<f64>], m: &[f64], a: f64) -> (f64, f64) {
    let gu: Vec<f64> = gradient_oracle(pts, m, a).concat();
    let gi: Vec<f64> = pts.iter().zip(m).flat_map(|(p, mi)| p.iter().map(move |x| 2.0 * mi * x)).collect();
    let lambda = gu.iter().zip(&gi).map(|(x, y)| x * y).sum::<f64>() / gi.iter().map(|x| x * x).sum::<f64>();
    let res = gu.iter().zip(&gi).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt()
        / gu.iter().map(|x| x * x).sum::<f64>().sqrt();
    (lambda, res)
}

/// All pair distances, sorted.
pub fn pair_distances(pts: &[Vec<f64>]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d.push(dist(&pts[i], &pts[j]));
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Group sorted values into (value, multiplicity) clusters at relative tolerance `tol`.
pub fn clusters(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((c, n)) if (v - *c).abs() <= tol * c.abs().max(1e-300) => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Edge ratio of a 12-point truncated tetrahedron: hexagon-hexagon edge over triangle edge.
///
/// The two shortest distance classes are the edges: 6 hexagon-hexagon edges and
/// 12 triangle edges.
pub fn truncated_tetrahedron_ratio(pts: &[Vec<f64>]) -> f64 {
    assert_eq!(pts.len(), 12);
    let cl = clusters(&pair_distances(pts), 1e-7);
    let (a, b) = (cl[0], cl[1]);
    let (hex, tri) = match (a.1, b.1) {
        (6, 12) | (12, 6) => {
            if a.1 == 6 {
                (a.0, b.0)
            } else {
                (b.0, a.0)
            }
        }
        _ => panic!("not a truncated tetrahedron: shortest distance classes {a:?}, {b:?}"),
    };
    hex / tri
}

/// Golden-section minimization of `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Radius ratio `r_outer / r_inner` (>= 1) of the equal-mass D_3 triangle-plus-dual
/// configuration minimizing U at I = 1, by grid scan then golden section.
pub fn nested_triangle_ratio_oracle() -> f64 {
    let u = |ratio: f64| {
        // inner triangle at radius 1 on the rays 0, 120, 240 degrees; dual at `ratio` on 60, 180, 300
        let mut pts = Vec::new();
        for k in 0..3 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            pts.push(vec![t.cos(), t.sin()]);
            pts.push(vec![-ratio * t.cos(), -ratio * t.sin()]);
        }
        let m = vec![1.0; 6];
        // U is homogeneous of degree -1, so U at I = 1 is U * sqrt(I)
        potential_oracle(&pts, &m, 1.0) * inertia_oracle(&pts, &m).sqrt()
    };
    let n = 20000;
    let grid: Vec<f64> = (1..=n).map(|i| 10.0 * i as f64 / n as f64).collect();
    let best = grid.iter().copied().min_by(|a, b| u(*a).total_cmp(&u(*b))).unwrap();
    let h = 10.0 / n as f64;
    let r = golden_section(u, (best - h).max(1e-6), best + h, 1e-12);
    if r < 1.0 {
        1.0 / r
    } else {
        r
    }
}

/// Seeded random configuration with coordinates in [-1, 1] and masses in [0.5, 2].
pub fn random_configuration(seed: u64, n: usize, d: usize) -> Configuration {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let masses = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    Configuration::from_rows(d, &rows, masses).unwrap()
}
