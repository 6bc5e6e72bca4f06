mod common;

use nalgebra::{dvector, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use symcc::group::FiniteGroup;
use symcc::nbody::{self, Configuration};
use symcc::reduction::check_symmetric;
use symcc::strata::isotropy_subgroup;
use symcc::{Error, OrthogonalMatrix, ReducedPoint, SymmetricAnsatz};

/// Reduced coordinates putting every 1-dimensional slot on its component's ray at the given radius.
fn on_rays(ans: &SymmetricAnsatz, radii: &[f64]) -> ReducedPoint {
    let t = ans.table();
    let mut coords = Vec::new();
    for (slot, r) in ans.slots().iter().zip(radii) {
        let st = t.stratum(slot.topo.class_id);
        let dir = &t.topo(slot.topo).representative_point;
        let local = st.basis.transpose() * dir.normalize() * *r;
        coords.extend(local.iter());
    }
    ReducedPoint::new(DVector::from_vec(coords))
}

#[test]
fn triangle_lift() {
    let ans = ansatz("D_3", &[("Z2", 1.0)]);
    let c = ans.lift(&on_rays(&ans, &[1.0])).unwrap();
    assert_eq!(c.len(), 3);
    let d = clusters(&pair_distances(&rows(&c)), 1e-12);
    assert_eq!(d, vec![(d[0].0, 3)]);
    assert!((d[0].0 - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn two_triangles_and_hexagon_lift() {
    let ans = ansatz_fixture("d3_two_triangles_hexagon.json");
    assert_eq!(ans.n_bodies(), 12);
    let c = ans.lift(&ans.random_point((0.5, 2.0), &mut ChaCha8Rng::seed_from_u64(2)).unwrap()).unwrap();
    assert_eq!(c.len(), 12);
    assert!(check_symmetric(ans.group(), &c).is_ok());
    assert_eq!(ans.table().burnside_type_of(&c).unwrap(), ans.burnside_type());
}

#[test]
fn truncated_tetrahedron_lift() {
    let ans = ansatz_fixture("truncated_tetrahedron.json");
    let c = ans.lift(&ans.random_point((0.5, 2.0), &mut ChaCha8Rng::seed_from_u64(3)).unwrap()).unwrap();
    assert_eq!(c.len(), 12);
    let g = ans.group();
    for p in c.points() {
        assert_eq!(isotropy_subgroup(g, p).unwrap().order(), 2);
    }
    let r0 = c.points()[0].norm();
    assert!(c.points().iter().all(|p| (p.norm() - r0).abs() < 1e-12));
}

#[test]
fn reduced_functionals_of_the_triangle() {
    let ans = ansatz("D_3", &[("Z2", 1.0)]);
    for rho in [0.3, 1.0, 2.5] {
        let r = on_rays(&ans, &[rho]);
        assert!((ans.reduced_i(&r).unwrap() - 3.0 * rho * rho).abs() < 1e-13);
        assert!((ans.reduced_u(&r).unwrap() - 3f64.sqrt() / rho).abs() < 1e-13);
    }
}

#[test]
fn reduced_values_match_full_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ANSATZ_CORPUS {
        let ans = ansatz_fixture(name);
        let r = ans.random_point((0.5, 2.0), &mut rng).unwrap();
        let c = ans.lift(&r).unwrap();
        let u = potential_oracle(&rows(&c), c.masses(), 1.0);
        let i = inertia_oracle(&rows(&c), c.masses());
        assert!((ans.reduced_u(&r).unwrap() - u).abs() <= 1e-12 * u, "{name}");
        assert!((ans.reduced_i(&r).unwrap() - i).abs() <= 1e-12 * i, "{name}");
        assert!(nbody::barycenter(&c).norm() <= 1e-12, "{name}");
    }
}

#[test]
fn reduced_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in ["d3_two_triangles_hexagon.json", "c2h_generic.json", "dnh_double_antiprism.json", "d2_census.json"] {
        let ans = ansatz_fixture(name);
        let r = ans.random_point((0.5, 2.0), &mut rng).unwrap();
        let g = ans.reduced_grad_u(&r).unwrap();
        let gi = ans.reduced_grad_i(&r).unwrap();
        let h = 1e-6;
        let mut fd = DVector::zeros(g.len());
        let mut fdi = DVector::zeros(g.len());
        for k in 0..g.len() {
            let mut up = r.coords.clone();
            up[k] += h;
            let mut dn = r.coords.clone();
            dn[k] -= h;
            let (up, dn) = (ReducedPoint::new(up), ReducedPoint::new(dn));
            let lu = ans.lift(&up).unwrap();
            let ld = ans.lift(&dn).unwrap();
            fd[k] = (potential_oracle(&rows(&lu), lu.masses(), 1.0) - potential_oracle(&rows(&ld), ld.masses(), 1.0)) / (2.0 * h);
            fdi[k] = (inertia_oracle(&rows(&lu), lu.masses()) - inertia_oracle(&rows(&ld), ld.masses())) / (2.0 * h);
        }
        assert!((&g - &fd).norm() <= 1e-6 * g.norm(), "{name}: {:.3e}", (&g - &fd).norm() / g.norm());
        assert!((&gi - &fdi).norm() <= 1e-6 * gi.norm(), "{name}");
    }
}

#[test]
fn lift_detects_collisions_and_wall_crossings() {
    let ans = ansatz("D_3", &[("Z2", 1.0), ("Z2", 1.0)]);
    assert!(matches!(ans.lift(&on_rays(&ans, &[1.0, 1.0])), Err(Error::OrbitCollision { .. })));
    assert!(ans.lift(&on_rays(&ans, &[1.0, 2.0])).is_ok());

    let single = ansatz("D_3", &[("Z2", 1.0)]);
    let wrong_side = ReducedPoint::new(-on_rays(&single, &[1.0]).coords);
    assert!(matches!(single.lift(&wrong_side), Err(Error::StratumViolation { .. })));
}

#[test]
fn check_symmetric_examples() {
    let ans = ansatz_fixture("d3_two_triangles_hexagon.json");
    let c = ans.lift(&ans.random_point((0.5, 2.0), &mut ChaCha8Rng::seed_from_u64(4)).unwrap()).unwrap();
    assert!(check_symmetric(ans.group(), &c).is_ok());

    // perturb the mass of one triangle vertex
    let mut m = c.masses().to_vec();
    let idx = c.points().iter().position(|p| isotropy_subgroup(ans.group(), p).unwrap().order() == 2).unwrap();
    m[idx] *= 1.1;
    let perturbed = c.with_masses(m).unwrap();
    assert!(check_symmetric(ans.group(), &perturbed).is_err());

    let trivial = FiniteGroup::generate("1", &[OrthogonalMatrix::identity(2)], 2).unwrap();
    assert!(check_symmetric(&trivial, &random_configuration(8, 5, 2)).is_ok());
}

#[test]
fn project_to_sphere_examples() {
    let ans = ansatz("D_3", &[("Z2", 1.0)]);
    let r = on_rays(&ans, &[2.0]);
    assert!((ans.reduced_i(&r).unwrap() - 12.0).abs() < 1e-12);
    let p = ans.project_to_sphere(&r).unwrap();
    assert!((ans.reduced_i(&p).unwrap() - 1.0).abs() < 1e-14);
    assert!((p.coords.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-14);

    let again = ans.project_to_sphere(&p).unwrap();
    assert!((again.coords - &p.coords).norm() < 1e-15);
    let scaled = ans.project_to_sphere(&ReducedPoint::new(&r.coords * 7.5)).unwrap();
    assert!((scaled.coords - &p.coords).norm() < 1e-14);

    let origin_only = ansatz("D_3", &[("D3", 1.0), ("Z2", 1.0)]);
    assert!(matches!(origin_only.project_to_sphere(&ReducedPoint::new(dvector![0.0])), Err(_)));
}

#[test]
fn normalizer_images_of_a_representative_give_the_same_configuration() {
    let ans = ansatz("D_3", &[("1", 1.0)]);
    let t = ans.table();
    let st = t.stratum(ans.slots()[0].topo.class_id);
    let r = ans.random_point((0.5, 2.0), &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let x = &st.basis * &r.coords;
    let c = ans.lift(&r).unwrap();
    for &n in st.normalizer.members() {
        let y = ans.group().element(n).apply(&x);
        let moved = ReducedPoint::new(st.basis.transpose() * y);
        let cn = ans.lift(&moved).unwrap();
        assert!(nbody::same_configuration(&c, &cn, 1e-12));
    }
}

#[test]
fn lifts_are_centered_even_with_invariant_directions() {
    // D_1 fixes the x-axis, so orbit barycenters need not vanish before centering
    let ans = ansatz_fixture("euler_123.json");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let c: Configuration = ans.lift(&ans.random_point((0.5, 2.0), &mut rng).unwrap()).unwrap();
        assert!(nbody::barycenter(&c).norm() < 1e-12);
    }
}
