//! The symmetry-reduced search space.
//!
//! A [`SymmetricAnsatz`] has one slot per orbit. Each slot holds one
//! representative point, given by coordinates in the fixed space of its
//! isotropy subgroup. The lift to a full configuration is linear: it places the
//! images of each representative under coset representatives, then subtracts
//! the barycenter. The lift has a kernel when `Fix(G)` is nonzero, because a
//! common shift along `Fix(G)` is removed by centering. The solver therefore
//! works in "effective" coordinates `y`, an orthonormal basis of the
//! complement of that kernel.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::burnside::BurnsideType;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{from_columns, sorted_symmetric_eigen};
use crate::nbody::{self, Configuration};
use crate::strata::{StrataTable, TopoRef};

/// One orbit of the ansatz: its topological type and per-particle mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub topo: TopoRef,
    pub mass: f64,
}

/// Raw fixed-space coordinates, slot by slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoint {
    pub coords: DVector<f64>,
}

impl ReducedPoint {
    pub fn new(coords: DVector<f64>) -> Self {
        Self { coords }
    }
}

#[derive(Clone, Debug)]
pub struct SymmetricAnsatz {
    table: Arc<StrataTable>,
    slots: Vec<Slot>,
    exponent: f64,
    slot_offsets: Vec<usize>,
    /// First body index of each slot.
    body_offsets: Vec<usize>,
    masses: Vec<f64>,
    /// `x = lift * r` (already centered).
    lift: DMatrix<f64>,
    /// Orthonormal basis of `ker(lift)^perp` in raw coordinates.
    effective: DMatrix<f64>,
    /// `lift * effective`.
    a: DMatrix<f64>,
    /// `I(y) = y^T q y`.
    q: DMatrix<f64>,
}

/// Representatives `g` of the left cosets `gH`, identity first.
pub fn coset_representatives(group: &FiniteGroup, h: &crate::group::Subgroup) -> Vec<usize> {
    let mut covered = vec![false; group.order()];
    let mut reps = Vec::new();
    for g in 0..group.order() {
        if covered[g] {
            continue;
        }
        reps.push(g);
        for &x in h.members() {
            covered[group.mul(g, x)] = true;
        }
    }
    reps
}

impl SymmetricAnsatz {
    pub fn new(table: Arc<StrataTable>, slots: Vec<Slot>, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidAnsatz(format!("exponent {exponent} must be positive")));
        }
        if slots.is_empty() {
            return Err(Error::InvalidAnsatz("no slots".into()));
        }
        let group = table.group().clone();
        let d = group.dim();
        let mut origin_slots = 0;
        for s in &slots {
            let st = table
                .strata()
                .get(s.topo.class_id)
                .ok_or_else(|| Error::InvalidAnsatz(format!("unknown class {}", s.topo.class_id)))?;
            if s.topo.component >= st.components.len() {
                return Err(Error::InvalidAnsatz(format!("unknown component {}", s.topo.component)));
            }
            if !(s.mass > 0.0) || !s.mass.is_finite() {
                return Err(Error::InvalidAnsatz(format!("mass {} must be positive", s.mass)));
            }
            if st.fixed_dim() == 0 {
                origin_slots += 1;
            }
        }
        if origin_slots > 1 {
            return Err(Error::InvalidAnsatz("at most one orbit can sit at the origin".into()));
        }

        let mut slot_offsets = Vec::with_capacity(slots.len());
        let mut body_offsets = Vec::with_capacity(slots.len());
        let mut masses = Vec::new();
        let mut blocks: Vec<(usize, usize, DMatrix<f64>)> = Vec::new();
        let mut m = 0;
        for s in &slots {
            let st = table.stratum(s.topo.class_id);
            slot_offsets.push(m);
            body_offsets.push(masses.len());
            for g in coset_representatives(&group, &st.orbit_type.representative) {
                blocks.push((masses.len(), m, group.element(g).matrix() * &st.basis));
                masses.push(s.mass);
            }
            m += st.fixed_dim();
        }
        let n = masses.len();
        if n < 2 {
            return Err(Error::InvalidAnsatz("need at least two bodies".into()));
        }
        let mut j = DMatrix::zeros(n * d, m);
        for (body, col, blk) in &blocks {
            if blk.ncols() > 0 {
                j.view_mut((body * d, *col), (d, blk.ncols())).copy_from(blk);
            }
        }
        let total: f64 = masses.iter().sum();
        let mut bary = DMatrix::zeros(d, m);
        for i in 0..n {
            bary += j.rows(i * d, d) * (masses[i] / total);
        }
        let mut lift = j;
        for i in 0..n {
            let mut rows = lift.rows_mut(i * d, d);
            rows -= &bary;
        }
        let effective = if m == 0 {
            DMatrix::zeros(0, 0)
        } else {
            let gram = lift.transpose() * &lift;
            let (vals, vecs) = sorted_symmetric_eigen(&gram);
            let cut = 1e-10 * vals.first().copied().unwrap_or(0.0).max(1.0);
            let cols: Vec<DVector<f64>> =
                (0..m).filter(|&i| vals[i] > cut).map(|i| vecs.column(i).into_owned()).collect();
            from_columns(m, &cols)
        };
        let a = &lift * &effective;
        let mdiag = DMatrix::from_diagonal(&DVector::from_fn(n * d, |i, _| masses[i / d]));
        let q = a.transpose() * &mdiag * &a;
        Ok(Self { table, slots, exponent, slot_offsets, body_offsets, masses, lift, effective, a, q })
    }

    /// Ansatz with one slot per orbit of a Burnside type, all masses equal to `mass`.
    pub fn from_burnside(table: Arc<StrataTable>, b: &BurnsideType, mass: f64, exponent: f64) -> Result<Self> {
        let slots = b
            .counts
            .iter()
            .flat_map(|(r, &n)| std::iter::repeat_n(Slot { topo: *r, mass }, n))
            .collect();
        Self::new(table, slots, exponent)
    }

    pub fn table(&self) -> &Arc<StrataTable> {
        &self.table
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.table.group()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn with_exponent(&self, exponent: f64) -> Result<Self> {
        Self::new(self.table.clone(), self.slots.clone(), exponent)
    }

    /// Copy with one slot's mass changed.
    pub fn with_slot_mass(&self, slot: usize, mass: f64) -> Result<Self> {
        let mut slots = self.slots.clone();
        slots
            .get_mut(slot)
            .ok_or_else(|| Error::InvalidAnsatz(format!("no slot {slot}")))?
            .mass = mass;
        Self::new(self.table.clone(), slots, self.exponent)
    }

    pub fn n_bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn slot_dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| self.table.stratum(s.topo.class_id).fixed_dim()).collect()
    }

    pub fn reduced_dim(&self) -> usize {
        self.lift.ncols()
    }

    pub fn effective_dim(&self) -> usize {
        self.effective.ncols()
    }

    /// Orbit sizes per slot.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.slots
            .iter()
            .map(|s| self.table.stratum(s.topo.class_id).orbit_type.orbit_size)
            .collect()
    }

    pub fn burnside_type(&self) -> BurnsideType {
        let mut b = BurnsideType::default();
        for s in &self.slots {
            *b.counts.entry(s.topo).or_insert(0) += 1;
        }
        b
    }

    /// Coordinates of one slot in its fixed space.
    pub fn slot_coords<'a>(&self, r: &'a ReducedPoint, slot: usize) -> nalgebra::DVectorView<'a, f64> {
        let k = self.table.stratum(self.slots[slot].topo.class_id).fixed_dim();
        r.coords.rows(self.slot_offsets[slot], k)
    }

    pub fn to_effective(&self, r: &ReducedPoint) -> DVector<f64> {
        self.effective.transpose() * &r.coords
    }

    pub fn from_effective(&self, y: &DVector<f64>) -> ReducedPoint {
        ReducedPoint::new(&self.effective * y)
    }

    /// Flat lifted positions for effective coordinates, without any checks.
    pub fn positions(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.a * y
    }

    /// Linear map from effective coordinates to flat positions.
    pub fn position_map(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn config_unchecked(&self, flat: &DVector<f64>) -> Result<Configuration> {
        Configuration::from_flat(self.group().dim(), flat, self.masses.clone())
    }

    /// Lift with stratum and collision checks.
    pub fn lift(&self, r: &ReducedPoint) -> Result<Configuration> {
        if r.coords.len() != self.reduced_dim() {
            return Err(Error::DimensionMismatch { expected: self.reduced_dim(), found: r.coords.len() });
        }
        let flat = &self.lift * &r.coords;
        self.check_flat(&flat)
    }

    pub fn lift_effective(&self, y: &DVector<f64>) -> Result<Configuration> {
        self.check_flat(&self.positions(y))
    }

    fn check_flat(&self, flat: &DVector<f64>) -> Result<Configuration> {
        let d = self.group().dim();
        for (slot, s) in self.slots.iter().enumerate() {
            let x = flat.rows(self.body_offsets[slot] * d, d).into_owned();
            if !self.table.in_component(s.topo, &x) {
                return Err(Error::StratumViolation { slot });
            }
        }
        let c = self.config_unchecked(flat)?;
        if let Some((i, j, r)) = c.closest_pair() {
            if r < 1e-9 {
                return Err(Error::OrbitCollision { i, j });
            }
        }
        Ok(c)
    }

    /// Whether every slot representative sits in its stratum component.
    pub fn in_strata(&self, y: &DVector<f64>) -> bool {
        let flat = self.positions(y);
        let d = self.group().dim();
        self.slots.iter().enumerate().all(|(slot, s)| {
            let x = flat.rows(self.body_offsets[slot] * d, d).into_owned();
            self.table.in_component(s.topo, &x)
        })
    }

    pub fn reduced_u(&self, r: &ReducedPoint) -> Result<f64> {
        nbody::potential(&self.lift(r)?, self.exponent)
    }

    pub fn reduced_i(&self, r: &ReducedPoint) -> Result<f64> {
        Ok(nbody::moment_of_inertia(&self.lift(r)?))
    }

    /// Gradient of `U` with respect to raw coordinates (chain rule through the lift).
    pub fn reduced_grad_u(&self, r: &ReducedPoint) -> Result<DVector<f64>> {
        let c = self.lift(r)?;
        Ok(self.lift.transpose() * nbody::flatten(&nbody::grad_potential(&c, self.exponent)?))
    }

    pub fn reduced_grad_i(&self, r: &ReducedPoint) -> Result<DVector<f64>> {
        let c = self.lift(r)?;
        Ok(self.lift.transpose() * nbody::flatten(&nbody::grad_inertia(&c)))
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn eff_inertia(&self, y: &DVector<f64>) -> f64 {
        y.dot(&(&self.q * y))
    }

    pub fn eff_u(&self, y: &DVector<f64>) -> Result<f64> {
        nbody::potential(&self.config_unchecked(&self.positions(y))?, self.exponent)
    }

    /// `U` and its effective gradient.
    pub fn eff_u_grad(&self, y: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let c = self.config_unchecked(&self.positions(y))?;
        let u = nbody::potential(&c, self.exponent)?;
        let g = self.a.transpose() * nbody::flatten(&nbody::grad_potential(&c, self.exponent)?);
        Ok((u, g))
    }

    pub fn eff_hessian_u(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let c = self.config_unchecked(&self.positions(y))?;
        let h = nbody::hessian_potential(&c, self.exponent)?;
        Ok(self.a.transpose() * h * &self.a)
    }

    /// Smallest pairwise distance of the unchecked lift.
    pub fn eff_min_separation(&self, y: &DVector<f64>) -> f64 {
        self.config_unchecked(&self.positions(y)).map_or(0.0, |c| c.min_separation())
    }

    /// Rescale so that the reduced moment of inertia is one.
    pub fn project_to_sphere(&self, r: &ReducedPoint) -> Result<ReducedPoint> {
        let i = self.reduced_i(r)?;
        if !(i > 1e-300) {
            return Err(Error::ZeroInertia);
        }
        Ok(ReducedPoint::new(&r.coords / i.sqrt()))
    }

    /// Random stratum point; slot radii drawn from `radius`.
    pub fn random_point<R: Rng + ?Sized>(&self, radius: (f64, f64), rng: &mut R) -> Result<ReducedPoint> {
        let mut coords = DVector::zeros(self.reduced_dim());
        for (slot, s) in self.slots.iter().enumerate() {
            let st = self.table.stratum(s.topo.class_id);
            let x = self.table.random_representative(s.topo, radius, rng)?;
            let v = st.basis.transpose() * x;
            coords.rows_mut(self.slot_offsets[slot], v.len()).copy_from(&v);
        }
        Ok(ReducedPoint::new(coords))
    }

    /// Reduced point whose lift reproduces a given symmetric configuration, if it has this ansatz's type.
    pub fn reduce(&self, c: &Configuration) -> Result<ReducedPoint> {
        let d = self.group().dim();
        if c.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: c.dim() });
        }
        let c = nbody::center(c);
        let mut used = vec![false; c.len()];
        let mut coords = DVector::zeros(self.reduced_dim());
        'slots: for (slot, s) in self.slots.iter().enumerate() {
            let st = self.table.stratum(s.topo.class_id);
            for i in 0..c.len() {
                if used[i] || !nbody::masses_equal(c.masses()[i], s.mass) {
                    continue;
                }
                for g in 0..self.group().order() {
                    let x = self.group().element(g).apply(&c.points()[i]);
                    if self.table.in_component(s.topo, &x) {
                        for y in crate::strata::orbit(self.group(), &x)? {
                            if let Some(j) = c.find_body(&y, s.mass, 1e-8 * (1.0 + c.max_norm())) {
                                used[j] = true;
                            }
                        }
                        let v = st.basis.transpose() * x;
                        coords.rows_mut(self.slot_offsets[slot], v.len()).copy_from(&v);
                        continue 'slots;
                    }
                }
            }
            return Err(Error::InvalidConfiguration(format!("no orbit matches slot {slot}")));
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidConfiguration("configuration has orbits outside the ansatz".into()));
        }
        Ok(ReducedPoint::new(coords))
    }
}

/// `Ok(())` if every generator maps the configuration to itself with masses;
/// otherwise the index of the first failing generator.
pub fn check_symmetric(group: &FiniteGroup, c: &Configuration) -> std::result::Result<(), usize> {
    let tol = 1e-8 * (1.0 + c.max_norm());
    for &g in group.generators() {
        let m = group.element(g);
        if m.dim() != c.dim() {
            return Err(g);
        }
        let ok = c
            .points()
            .iter()
            .zip(c.masses())
            .all(|(p, &mass)| c.find_body(&m.apply(p), mass, tol).is_some());
        if !ok {
            return Err(g);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_group;

    fn d3() -> Arc<StrataTable> {
        Arc::new(StrataTable::new(Arc::new(parse_group("D_3").unwrap())))
    }

    #[test]
    fn triangle_slot_functionals() {
        let t = d3();
        let z2 = t.parse_topo("Z2").unwrap();
        let a = SymmetricAnsatz::new(t, vec![Slot { topo: z2, mass: 1.0 }], 1.0).unwrap();
        let rho = 0.7;
        let r = ReducedPoint::new(DVector::from_vec(vec![rho]));
        assert!((a.reduced_i(&r).unwrap() - 3.0 * rho * rho).abs() < 1e-14);
        assert!((a.reduced_u(&r).unwrap() - 3f64.sqrt() / rho).abs() < 1e-13);
        let p = a.project_to_sphere(&ReducedPoint::new(DVector::from_vec(vec![2.0]))).unwrap();
        assert!((a.reduced_i(&p).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_side_is_a_stratum_violation() {
        let t = d3();
        let z2 = t.parse_topo("Z2").unwrap();
        let a = SymmetricAnsatz::new(t, vec![Slot { topo: z2, mass: 1.0 }], 1.0).unwrap();
        let r = ReducedPoint::new(DVector::from_vec(vec![-1.0]));
        assert!(matches!(a.lift(&r), Err(Error::StratumViolation { slot: 0 })));
    }

    #[test]
    fn two_origin_slots_rejected() {
        let t = d3();
        let g = t.parse_topo("G").unwrap();
        let z2 = t.parse_topo("Z2").unwrap();
        let slots = vec![Slot { topo: g, mass: 1.0 }, Slot { topo: g, mass: 1.0 }, Slot { topo: z2, mass: 1.0 }];
        assert!(SymmetricAnsatz::new(t, slots, 1.0).is_err());
    }

    #[test]
    fn symmetric_check_detects_mass_change() {
        let g = parse_group("D_3").unwrap();
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let c = Configuration::from_rows(2, &pts, vec![1.0; 3]).unwrap();
        assert!(check_symmetric(&g, &c).is_ok());
        let c2 = c.with_masses(vec![1.0, 1.0, 1.1]).unwrap();
        assert!(check_symmetric(&g, &c2).is_err());
    }
}
