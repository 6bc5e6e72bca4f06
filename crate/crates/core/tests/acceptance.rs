//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use symcc::balanced::{balanced_residual, schur_check, solve_balanced, SpectrumTarget};
use symcc::dynamics::{homothetic_test, rotation_test};
use symcc::nbody::{self, Configuration};
use symcc::solver::{component_census, find_critical_points, minimize, CriticalPoint, SolveOptions};
use symcc::strata::enumerate_isotropy_classes;
use symcc::{parse_group, Slot, StrataTable, SymmetricAnsatz};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn solve(ans: &SymmetricAnsatz) -> CriticalPoint {
    minimize(ans, &SolveOptions::default()).expect("minimize")
}

fn unit_scale(c: &Configuration) -> Configuration {
    let c = nbody::center(c);
    c.scaled(1.0 / c.max_norm())
}

fn truncated_tetrahedron() -> Check {
    let t0 = Instant::now();
    let ans = ansatz_fixture("truncated_tetrahedron.json");
    let cp = solve(&ans);
    let rho = truncated_tetrahedron_ratio(&rows(&cp.configuration));
    let census = find_critical_points(&ans, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    ensure((0.845..=0.865).contains(&rho), format!("rho = {rho:.6} outside [0.845, 0.865]"))?;
    ensure((rho - 1.0).abs() > 0.05, format!("rho = {rho:.6} is the Archimedean value"))?;
    ensure(census.distinct.len() == 1, format!("census found {} critical points", census.distinct.len()))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("rho = {rho:.6}, 1 critical point, {elapsed:.2?}"))
}

fn is_regular_tetrahedron(c: &Configuration) -> bool {
    let cl = clusters(&pair_distances(&rows(c)), 1e-8);
    cl.len() == 1 && cl[0].1 == 6
}

/// Square lying in a coordinate plane: returns the normal axis.
fn coordinate_square_axis(c: &Configuration) -> Option<usize> {
    let pts = rows(c);
    let axis = (0..3).find(|&k| pts.iter().all(|p| p[k].abs() <= 1e-8))?;
    let cl = clusters(&pair_distances(&pts), 1e-8);
    let ok = cl.len() == 2 && cl[0].1 == 4 && cl[1].1 == 2 && (cl[1].0 / cl[0].0 - 2f64.sqrt()).abs() < 1e-8;
    ok.then_some(axis)
}

fn d2_census() -> Check {
    let t0 = Instant::now();
    let ans = ansatz_fixture("d2_census.json");
    let census = find_critical_points(&ans, &SolveOptions { starts: 256, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    ensure(census.distinct.len() == 5, format!("{} distinct critical points", census.distinct.len()))?;
    let minima: Vec<_> = census.distinct.iter().filter(|p| p.morse_index == 0).collect();
    let saddles: Vec<_> = census.distinct.iter().filter(|p| p.morse_index >= 1).collect();
    ensure(minima.len() == 2, format!("{} minima", minima.len()))?;
    ensure(
        minima.iter().all(|p| is_regular_tetrahedron(&p.configuration)),
        "a minimum is not a regular tetrahedron",
    )?;
    ensure(saddles.len() == 3, format!("{} saddles", saddles.len()))?;
    let mut axes: Vec<usize> = saddles.iter().filter_map(|p| coordinate_square_axis(&p.configuration)).collect();
    axes.sort();
    ensure(axes == vec![0, 1, 2], format!("saddles are not squares in the three coordinate planes: {axes:?}"))?;
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("2 tetrahedral minima + 3 coordinate-plane square saddles, {elapsed:.2?}"))
}

fn edge_regular_archimedeans() -> Check {
    let mut worst: f64 = 0.0;
    for name in ["cuboctahedron.json", "icosidodecahedron.json"] {
        let c = config_fixture(name);
        let r = nbody::central_residual(&c, 1.0).unwrap().residual;
        let (_, oracle) = central_residual_oracle(&rows(&c), c.masses(), 1.0);
        ensure(r <= 1e-10 && oracle <= 1e-10, format!("{name}: residual {r:.3e} (oracle {oracle:.3e})"))?;
        worst = worst.max(r).max(oracle);
    }
    // any point of the stratum, lifted without optimization
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, n) in [("cuboctahedron_ansatz.json", 12), ("icosidodecahedron_ansatz.json", 30)] {
        let ans = ansatz_fixture(name);
        for _ in 0..5 {
            let r = ans.random_point((0.2, 5.0), &mut rng).unwrap();
            let c = ans.lift(&r).unwrap();
            ensure(c.len() == n, format!("{name}: {} bodies", c.len()))?;
            let res = nbody::central_residual(&c, 1.0).unwrap().residual;
            ensure(res <= 1e-10, format!("{name}: lifted residual {res:.3e}"))?;
            worst = worst.max(res);
        }
    }
    Ok(format!("worst residual {worst:.2e}"))
}

fn symmetric_criticality() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..200usize {
        let name = ANSATZ_CORPUS[k % ANSATZ_CORPUS.len()];
        let ans = ansatz_fixture(name);
        let opts = SolveOptions { starts: 4, seed: k as u64, ..Default::default() };
        let cp = minimize(&ans, &opts).map_err(|e| format!("{name} seed {k}: {e}"))?;
        let (_, res) = central_residual_oracle(&rows(&cp.configuration), cp.configuration.masses(), 1.0);
        ensure(res <= 1e-8, format!("{name} seed {k}: full-space residual {res:.3e}"))?;
        worst = worst.max(res);
    }
    Ok(format!("200 solves, worst full-space residual {worst:.2e}"))
}

fn gradients_and_homogeneity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_grad: f64 = 0.0;
    let mut worst_hom: f64 = 0.0;
    for s in 0..50u64 {
        let n = rng.random_range(2..8);
        let d = rng.random_range(1..4);
        let c = random_configuration(100 + s, n, d);
        if c.min_separation() < 0.05 {
            continue;
        }
        let g = nbody::flatten(&nbody::grad_potential(&c, 1.0).unwrap());
        let fd: Vec<f64> = fd_gradient(&rows(&c), c.masses(), 1.0, 1e-6).concat();
        let err = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / g.norm();
        ensure(err <= 1e-6, format!("seed {s}: gradient relative error {err:.3e}"))?;
        worst_grad = worst_grad.max(err);
        let lam = rng.random_range(0.3..4.0);
        let (u, i) = (nbody::potential(&c, 1.0).unwrap(), nbody::moment_of_inertia(&c));
        let cl = c.scaled(lam);
        let eu = (nbody::potential(&cl, 1.0).unwrap() * lam - u).abs() / u;
        let ei = (nbody::moment_of_inertia(&cl) - lam * lam * i).abs() / (lam * lam * i);
        ensure(eu <= 1e-12 && ei <= 1e-12, format!("seed {s}: homogeneity errors {eu:.3e}, {ei:.3e}"))?;
        worst_hom = worst_hom.max(eu).max(ei);
    }
    let mut worst_lambda: f64 = 0.0;
    for name in ANSATZ_CORPUS {
        let cp = solve(&ansatz_fixture(name));
        let i = nbody::moment_of_inertia(&cp.configuration);
        ensure((i - 1.0).abs() <= 1e-10, format!("{name}: solution has I = {i}"))?;
        let e = (cp.lambda + cp.u_value / 2.0).abs() / (cp.u_value / 2.0);
        ensure(e <= 1e-8, format!("{name}: lambda = {}, -U/2 = {}", cp.lambda, -cp.u_value / 2.0))?;
        worst_lambda = worst_lambda.max(e);
    }
    Ok(format!(
        "gradient err {worst_grad:.1e}, homogeneity err {worst_hom:.1e}, lambda err {worst_lambda:.1e}"
    ))
}

fn orbit_type_tables() -> Check {
    for (g, expected) in [("D_3", 3), ("D_3h", 6), ("T_d", 5), ("D_2rot", 5)] {
        let n = enumerate_isotropy_classes(&parse_group(g).unwrap()).len();
        ensure(n == expected, format!("{g}: {n} orbit types, expected {expected}"))?;
    }
    for k in 2..=9usize {
        let t = StrataTable::new(std::sync::Arc::new(parse_group(&format!("D_{k}")).unwrap()));
        let topo = t.topo_types().count();
        let reflection_classes: Vec<usize> = t
            .strata()
            .iter()
            .filter(|s| s.orbit_type.representative.order() == 2)
            .map(|s| s.components.len())
            .collect();
        ensure(topo == 4, format!("D_{k}: {topo} topological types"))?;
        let expected = if k % 2 == 1 { vec![2] } else { vec![1, 1] };
        ensure(
            reflection_classes == expected,
            format!("D_{k}: reflection strata components {reflection_classes:?}, expected {expected:?}"),
        )?;
    }
    Ok("D_3: 3, D_3h: 6, T_d: 5, D_2rot: 5; D_k odd/even split holds for k = 2..9".into())
}

fn euler_lagrange_counts() -> Check {
    let mut counts = Vec::new();
    for (name, expected) in [("euler_123.json", 3), ("euler_111.json", 1)] {
        let ans = ansatz_fixture(name);
        let census = find_critical_points(&ans, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let classes = census.congruence_classes.len();
        let comps = component_census(&ans);
        ensure(
            classes == expected && comps == expected as u64,
            format!("{name}: {classes} solutions, {comps} components, expected {expected}"),
        )?;
        counts.push(classes);
    }
    let cp = solve(&ansatz_fixture("nested_triangles_d3.json"));
    let radii = clusters(
        &{
            let mut r: Vec<f64> = cp.configuration.points().iter().map(|p| p.norm()).collect();
            r.sort_by(f64::total_cmp);
            r
        },
        1e-9,
    );
    ensure(radii.len() == 2, format!("expected two radii, got {radii:?}"))?;
    let ratio = radii[1].0 / radii[0].0;
    let oracle = nested_triangle_ratio_oracle();
    ensure((ratio - oracle).abs() <= 1e-4, format!("ratio {ratio:.8} vs oracle {oracle:.8}"))?;
    Ok(format!("Euler {counts:?}; nested-triangle ratio {ratio:.6} (oracle {oracle:.6})"))
}

fn balanced_suite() -> Check {
    let mut central: Vec<(String, Configuration)> = ANSATZ_CORPUS
        .iter()
        .map(|n| (n.to_string(), solve(&ansatz_fixture(n)).configuration))
        .collect();
    for n in ["lagrange_triangle.json", "lagrange_triangle_123.json", "square.json", "cuboctahedron.json", "icosidodecahedron.json"] {
        central.push((n.to_string(), config_fixture(n).normalized().unwrap()));
    }
    let mut worst: f64 = 0.0;
    for (name, c) in &central {
        let r = balanced_residual(c, 1.0).unwrap();
        ensure(r.residual <= 1e-8 && r.is_central, format!("{name}: residual {:.3e}, scalar B {}", r.residual, r.is_central))?;
        worst = worst.max(r.residual);
    }

    let ans = ansatz_fixture("truncated_tetrahedron.json");
    let central_td = solve(&ans).configuration;
    let target = SpectrumTarget::new(nbody::inertia_matrix(&central_td).spectrum).unwrap();
    let bal = solve_balanced(&ans, &target, &SolveOptions { starts: 8, ..Default::default() })
        .map_err(|e| format!("T_d balanced solve: {e}"))?;
    let dist = nbody::config_distance(&bal.configuration, &central_td).unwrap();
    ensure(dist <= 1e-6, format!("T_d balanced solution is {dist:.3e} from the central one"))?;

    for name in ["c2h_generic.json", "dnh3_double_antiprism.json"] {
        let ans = ansatz_fixture(name);
        let c = solve(&ans).configuration;
        let rep = schur_check(ans.group(), &c).map_err(|e| e.to_string())?;
        ensure(rep.commutation <= 1e-10, format!("{name}: |AS - SA| = {:.3e}", rep.commutation))?;
        ensure(rep.off_block <= 1e-10, format!("{name}: off-block entry {:.3e}", rep.off_block))?;
        for b in &rep.blocks {
            if let Some(dev) = b.scalar_deviation {
                ensure(dev <= 1e-10, format!("{name}: block deviates from scalar by {dev:.3e}"))?;
            }
        }
        // the vertical axis is its own block for both groups
        let s = &rep.s;
        ensure(s[(0, 2)].abs().max(s[(1, 2)].abs()) <= 1e-10, format!("{name}: S couples plane and axis"))?;
    }
    Ok(format!(
        "{} central configurations balanced (worst {worst:.1e}); T_d balanced = central ({dist:.1e}); Schur blocks hold",
        central.len()
    ))
}

fn dynamical_certification() -> Check {
    let mut planar: Vec<(String, Configuration)> = Vec::new();
    let mut spatial: Vec<(String, Configuration)> = Vec::new();
    for n in ["lagrange_triangle.json", "lagrange_triangle_123.json", "square.json"] {
        planar.push((n.into(), config_fixture(n)));
    }
    for n in ["cuboctahedron.json", "icosidodecahedron.json"] {
        spatial.push((n.into(), config_fixture(n)));
    }
    for n in ["d3_two_triangles_hexagon.json", "nested_triangles_d3.json", "d4_center_three_squares.json", "euler_123.json"] {
        planar.push((n.into(), solve(&ansatz_fixture(n)).configuration));
    }
    for n in ["truncated_tetrahedron.json", "dnh_double_antiprism.json", "nested_tetrahedra.json"] {
        spatial.push((n.into(), solve(&ansatz_fixture(n)).configuration));
    }
    let (mut worst_h, mut worst_r): (f64, f64) = (0.0, 0.0);
    for (name, c) in planar.iter().chain(&spatial) {
        let h = homothetic_test(&unit_scale(c), 0.1, 1e-4, 1.0).map_err(|e| format!("{name}: {e}"))?;
        ensure(h <= 1e-5, format!("{name}: homothetic deviation {h:.3e}"))?;
        worst_h = worst_h.max(h);
    }
    for (name, c) in &planar {
        let r = rotation_test(&unit_scale(c), 0.1, 1e-4, 1.0, 1.0).map_err(|e| format!("{name}: {e}"))?;
        ensure(r <= 1e-6, format!("{name}: rotation deviation {r:.3e}"))?;
        worst_r = worst_r.max(r);
    }
    let tri = unit_scale(&config_fixture("lagrange_triangle.json"));
    let perturbed = rotation_test(&tri, 0.1, 1e-4, 1.0, 1.1).map_err(|e| e.to_string())?;
    ensure(perturbed > 1e-3, format!("perturbed omega deviation only {perturbed:.3e}"))?;
    let random = unit_scale(&random_configuration(11, 4, 2));
    let neg = homothetic_test(&random, 0.1, 1e-4, 1.0).map_err(|e| e.to_string())?;
    ensure(neg > 1e-3, format!("random shape homothetic deviation only {neg:.3e}"))?;
    Ok(format!(
        "homothetic worst {worst_h:.1e}, rotation worst {worst_r:.1e}; controls {perturbed:.1e}, {neg:.1e}"
    ))
}

fn existence_robustness() -> Check {
    let groups = ["D_1", "C_3", "D_3", "D_4", "D_5", "C_2h", "D_2rot", "D_3h", "D_4h", "T_d", "O_h", "I_h"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut min_sep = f64::INFINITY;
    let mut made = 0;
    while made < 20 {
        let g = groups[rng.random_range(0..groups.len())];
        let t = table(g);
        let types: Vec<_> = t.topo_types().map(|x| x.topo_ref()).collect();
        let mut slots: Vec<Slot> = Vec::new();
        let mut bodies = 0;
        let target = rng.random_range(2..=30);
        for _ in 0..50 {
            let r = types[rng.random_range(0..types.len())];
            let size = t.stratum(r.class_id).orbit_type.orbit_size;
            let origin = t.stratum(r.class_id).orbit_type.fixed_dim == 0;
            if bodies + size > 30 || (origin && slots.iter().any(|s| s.topo == r)) {
                continue;
            }
            slots.push(Slot { topo: r, mass: rng.random_range(0.5..2.0) });
            bodies += size;
            if bodies >= target {
                break;
            }
        }
        let Ok(ans) = SymmetricAnsatz::new(t.clone(), slots, 1.0) else { continue };
        made += 1;
        let label = format!("{g} {}", ans.burnside_type().format(&t));
        let cp = minimize(&ans, &SolveOptions::default()).map_err(|e| format!("{label}: {e}"))?;
        let (_, res) = central_residual_oracle(&rows(&cp.configuration), cp.configuration.masses(), 1.0);
        let sep = cp.configuration.min_separation();
        ensure(res <= 1e-8, format!("{label}: residual {res:.3e}"))?;
        ensure(sep > 1e-3, format!("{label}: min separation {sep:.3e}"))?;
        worst = worst.max(res);
        min_sep = min_sep.min(sep);
    }
    Ok(format!("20 random types, worst residual {worst:.1e}, smallest separation {min_sep:.3}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("truncated tetrahedron edge ratio and uniqueness", truncated_tetrahedron),
        ("D_2 four-body census", d2_census),
        ("cuboctahedron and icosidodecahedron are central", edge_regular_archimedeans),
        ("reduced solutions are critical in the full space", symmetric_criticality),
        ("gradients, homogeneity and multiplier", gradients_and_homogeneity),
        ("orbit-type tables", orbit_type_tables),
        ("Euler/Lagrange counts and nested-triangle ratio", euler_lagrange_counts),
        ("balanced configurations", balanced_suite),
        ("dynamical certification", dynamical_certification),
        ("existence for random symmetry types", existence_robustness),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {title}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {title}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
