//! Isotropy subgroups, orbits, orbit types and their refinement into connected
//! components of the stratum `V°(H)/N_G(H)`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::burnside::BurnsideType;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, OrthogonalMatrix, Subgroup};
use crate::linalg::{complement_in, fixed_space, intersect, null_space, same_subspace};
use crate::nbody::Configuration;

/// Relative tolerance for "g fixes x" and "x lies on a wall".
pub const POINT_TOL: f64 = 1e-9;

fn fixes(g: &OrthogonalMatrix, x: &DVector<f64>) -> bool {
    (g.apply(x) - x).norm() <= POINT_TOL * (1.0 + x.norm())
}

/// `G_x = { g : g x = x }`.
pub fn isotropy_subgroup(group: &FiniteGroup, x: &DVector<f64>) -> Result<Subgroup> {
    if x.len() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: x.len() });
    }
    let members: Vec<usize> = (0..group.order()).filter(|&i| fixes(group.element(i), x)).collect();
    Ok(group.subgroup(&members).unwrap_or_else(|_| group.generated_subgroup(&members)))
}

/// The deduplicated orbit `{ g x }`, in element order.
pub fn orbit(group: &FiniteGroup, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    if x.len() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: x.len() });
    }
    let tol = POINT_TOL * (1.0 + x.norm());
    let mut out: Vec<DVector<f64>> = Vec::new();
    for g in group.elements() {
        let y = g.apply(x);
        if !out.iter().any(|p| (p - &y).norm() <= tol) {
            out.push(y);
        }
    }
    Ok(out)
}

/// A conjugacy class of isotropy subgroups.
#[derive(Clone, Debug)]
pub struct OrbitType {
    pub class_id: usize,
    pub name: String,
    pub aliases: Vec<String>,
    pub representative: Subgroup,
    pub fixed_dim: usize,
    pub orbit_size: usize,
}

/// Index of a topological orbit type: isotropy class plus component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopoRef {
    pub class_id: usize,
    pub component: usize,
}

/// An orbit type refined by a connected component of its stratum.
#[derive(Clone, Debug)]
pub struct TopoOrbitType {
    pub class_id: usize,
    pub component: usize,
    /// Primes appended to the class name: `""`, `"'"`, `"''"`, ...
    pub label: String,
    pub name: String,
    /// Unit point of `Fix(H)` with isotropy exactly `H`, inside this component.
    pub representative_point: DVector<f64>,
}

impl TopoOrbitType {
    pub fn topo_ref(&self) -> TopoRef {
        TopoRef { class_id: self.class_id, component: self.component }
    }
}

/// `V(H) = Fix(H)` with its walls and chamber structure.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub orbit_type: OrbitType,
    /// Orthonormal basis of `V(H)` as columns (`d x k`).
    pub basis: DMatrix<f64>,
    /// Unit normals of the walls, in `V(H)` coordinates.
    pub walls: Vec<DVector<f64>>,
    pub normalizer: Subgroup,
    pub components: Vec<TopoOrbitType>,
    chambers: Vec<Vec<i8>>,
    chamber_points: Vec<DVector<f64>>,
    chamber_component: Vec<usize>,
    chamber_index: HashMap<Vec<i8>, usize>,
}

impl Stratum {
    pub fn fixed_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Sign pattern of `V(H)` coordinates against the walls; `None` on a wall.
    pub fn sign_vector(&self, coords: &DVector<f64>) -> Option<Vec<i8>> {
        let tol = POINT_TOL * (1.0 + coords.norm());
        self.walls
            .iter()
            .map(|n| {
                let s = n.dot(coords);
                if s.abs() <= tol {
                    None
                } else {
                    Some(if s > 0.0 { 1 } else { -1 })
                }
            })
            .collect()
    }

    /// Component containing the given `V(H)` coordinates, if off all walls.
    pub fn component_of(&self, coords: &DVector<f64>) -> Option<usize> {
        let s = self.sign_vector(coords)?;
        self.chamber_index.get(&s).map(|&c| self.chamber_component[c])
    }

    pub fn chamber_count(&self) -> usize {
        self.chambers.len()
    }

    /// Chambers (as `V(H)` points) belonging to a component.
    fn component_chambers(&self, component: usize) -> impl Iterator<Item = &DVector<f64>> {
        self.chamber_points
            .iter()
            .zip(&self.chamber_component)
            .filter(move |(_, &c)| c == component)
            .map(|(p, _)| p)
    }
}

/// All strata of a group, indexed by class id.
#[derive(Clone, Debug)]
pub struct StrataTable {
    group: Arc<FiniteGroup>,
    strata: Vec<Stratum>,
    /// Subgroup members -> (class id, w) with `w K w^-1 = H_class`.
    conjugates: HashMap<Vec<usize>, (usize, usize)>,
}

impl StrataTable {
    pub fn new(group: Arc<FiniteGroup>) -> Self {
        let classes = enumerate_isotropy_classes(&group);
        let mut conjugates = HashMap::new();
        for t in &classes {
            for g in 0..group.order() {
                let k = group.conjugate(g, &t.representative);
                conjugates.entry(k.members().to_vec()).or_insert((t.class_id, group.inv(g)));
            }
        }
        let strata = classes.into_iter().map(|t| build_stratum(&group, t)).collect();
        Self { group, strata, conjugates }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn stratum(&self, class_id: usize) -> &Stratum {
        &self.strata[class_id]
    }

    pub fn orbit_types(&self) -> Vec<OrbitType> {
        self.strata.iter().map(|s| s.orbit_type.clone()).collect()
    }

    pub fn topo(&self, r: TopoRef) -> &TopoOrbitType {
        &self.strata[r.class_id].components[r.component]
    }

    pub fn topo_types(&self) -> impl Iterator<Item = &TopoOrbitType> {
        self.strata.iter().flat_map(|s| s.components.iter())
    }

    /// Class id for a name or alias (`Z2`, `Z_2^kappa`, `G`, ...).
    pub fn find_class(&self, name: &str) -> Option<usize> {
        let key = normalize_name(name);
        self.strata.iter().position(|s| {
            normalize_name(&s.orbit_type.name) == key || s.orbit_type.aliases.iter().any(|a| normalize_name(a) == key)
        })
    }

    /// Parse `Z2''` style names into a topological type.
    pub fn parse_topo(&self, s: &str) -> Result<TopoRef> {
        let t = s.trim();
        let t = t.strip_prefix('(').map(|x| x.replacen(')', "", 1)).unwrap_or_else(|| t.to_string());
        let base = t.trim_end_matches(['\'', '′']);
        let primes = t[base.len()..].chars().count();
        let class_id = self.find_class(base).ok_or_else(|| Error::Parse(format!("unknown orbit type `{base}`")))?;
        if primes >= self.strata[class_id].components.len() {
            return Err(Error::Parse(format!("orbit type `{base}` has no component with {primes} primes")));
        }
        Ok(TopoRef { class_id, component: primes })
    }

    /// Isotropy class and component of a point.
    pub fn classify(&self, x: &DVector<f64>) -> Result<TopoRef> {
        let k = isotropy_subgroup(&self.group, x)?;
        let &(class_id, w) = self.conjugates.get(k.members()).ok_or(Error::NotIsotropy)?;
        let st = &self.strata[class_id];
        let y = self.group.element(w).apply(x);
        let coords = st.basis.transpose() * y;
        let component = st.component_of(&coords).ok_or(Error::NotIsotropy)?;
        Ok(TopoRef { class_id, component })
    }

    /// Whether `x` lies in `V°(H)` of the class representative, inside the given component.
    pub fn in_component(&self, r: TopoRef, x: &DVector<f64>) -> bool {
        let st = &self.strata[r.class_id];
        match isotropy_subgroup(&self.group, x) {
            Ok(k) if k == st.orbit_type.representative => {
                let coords = st.basis.transpose() * x;
                st.component_of(&coords) == Some(r.component)
            }
            _ => false,
        }
    }

    /// Random point of the component with norm drawn uniformly from `radius`.
    pub fn random_representative<R: Rng + ?Sized>(
        &self,
        r: TopoRef,
        radius: (f64, f64),
        rng: &mut R,
    ) -> Result<DVector<f64>> {
        let st = self.strata.get(r.class_id).ok_or(Error::EmptyStratum)?;
        if r.component >= st.components.len() {
            return Err(Error::EmptyStratum);
        }
        let k = st.fixed_dim();
        if k == 0 {
            return Ok(DVector::zeros(self.group.dim()));
        }
        let scale = if radius.1 > radius.0 { rng.random_range(radius.0..radius.1) } else { radius.0 };
        let accept = |v: &DVector<f64>| self.in_component(r, &(&st.basis * v));
        for _ in 0..8 {
            let v = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
            if v.norm() > 1e-6 {
                let v = v.normalize();
                if accept(&v) {
                    return Ok(&st.basis * v * scale);
                }
            }
        }
        let chambers: Vec<&DVector<f64>> = st.component_chambers(r.component).collect();
        let base = chambers[rng.random_range(0..chambers.len())];
        let mut step = 0.5;
        for _ in 0..60 {
            let noise = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
            let v = (base + noise * step).normalize();
            if accept(&v) {
                return Ok(&st.basis * v * scale);
            }
            step *= 0.5;
        }
        Ok(&st.basis * base * scale)
    }

    pub fn burnside_type_of(&self, c: &Configuration) -> Result<BurnsideType> {
        burnside_type_of(self, c)
    }
}

/// Count orbits of a symmetric configuration per topological orbit type.
pub fn burnside_type_of(table: &StrataTable, c: &Configuration) -> Result<BurnsideType> {
    let group = table.group();
    if c.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: c.dim() });
    }
    if let Err(generator) = crate::reduction::check_symmetric(group, c) {
        return Err(Error::NotSymmetric { generator });
    }
    let tol = 1e-8 * (1.0 + c.max_norm());
    let mut seen = vec![false; c.len()];
    let mut out = BurnsideType::default();
    for i in 0..c.len() {
        if seen[i] {
            continue;
        }
        let x = &c.points()[i];
        let r = table.classify(x)?;
        for y in orbit(group, x)? {
            if let Some(j) = c.find_body(&y, c.masses()[i], tol) {
                seen[j] = true;
            }
        }
        *out.counts.entry(r).or_insert(0) += 1;
    }
    Ok(out)
}

/// One orbit type per conjugacy class of isotropy subgroups.
pub fn enumerate_isotropy_classes(group: &FiniteGroup) -> Vec<OrbitType> {
    let dim = group.dim();
    let mut flats: Vec<DMatrix<f64>> = Vec::new();
    let push_new = |flats: &mut Vec<DMatrix<f64>>, f: DMatrix<f64>| -> bool {
        if flats.iter().any(|e| same_subspace(e, &f)) {
            false
        } else {
            flats.push(f);
            true
        }
    };
    for g in group.elements() {
        push_new(&mut flats, fixed_space(dim, [g.matrix()]));
    }
    let mut i = 0;
    while i < flats.len() {
        for j in 0..i {
            let f = intersect(&flats[i], &flats[j]);
            push_new(&mut flats, f);
        }
        i += 1;
    }

    let mut reps: Vec<Subgroup> = Vec::new();
    for f in &flats {
        let members: Vec<usize> = (0..group.order())
            .filter(|&g| {
                let e = group.element(g).matrix();
                f.ncols() == 0 || ((e * f) - f).amax() < POINT_TOL
            })
            .collect();
        let Ok(h) = group.subgroup(&members) else { continue };
        if !reps.iter().any(|r| group.are_conjugate(r, &h).is_some()) {
            reps.push(h);
        }
    }

    let curated = curated_subgroups(group);
    let mut classes: Vec<(Subgroup, usize, Vec<usize>)> = reps
        .into_iter()
        .map(|h| {
            let conj: BTreeSet<Subgroup> = (0..group.order()).map(|g| group.conjugate(g, &h)).collect();
            let min_key = conj.iter().next().expect("nonempty").members().to_vec();
            let chosen = curated
                .iter()
                .map(|(_, s)| s)
                .find(|s| conj.contains(*s))
                .cloned()
                .unwrap_or_else(|| conj.iter().next().cloned().expect("nonempty"));
            let k = fixed_space(dim, group.matrices_of(&chosen)).ncols();
            (chosen, k, min_key)
        })
        .collect();
    classes.sort_by(|a, b| b.0.order().cmp(&a.0.order()).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

    let whole = group.whole();
    let bases: Vec<String> = classes
        .iter()
        .map(|(h, _, _)| if *h == whole { group.name().to_string() } else { group.structural_name(h) })
        .collect();
    let aliases: Vec<Vec<String>> = classes
        .iter()
        .map(|(h, _, _)| {
            let conj: BTreeSet<Subgroup> = (0..group.order()).map(|g| group.conjugate(g, h)).collect();
            curated.iter().filter(|(_, s)| conj.contains(s)).map(|(n, _)| n.clone()).collect()
        })
        .collect();
    let mut seen_base: HashMap<&str, usize> = HashMap::new();
    classes
        .iter()
        .enumerate()
        .map(|(id, (h, k, _))| {
            let base = &bases[id];
            let collides = bases.iter().filter(|b| *b == base).count() > 1;
            let mut names: Vec<String> = Vec::new();
            if collides {
                let idx = seen_base.entry(base.as_str()).or_insert(0);
                *idx += 1;
                let unique_alias = aliases[id].iter().find(|a| aliases.iter().filter(|l| l.contains(a)).count() == 1);
                if let Some(a) = unique_alias {
                    names.push(a.clone());
                }
                names.push(format!("{base}^{idx}"));
            } else {
                names.push(base.clone());
            }
            for a in &aliases[id] {
                names.push(a.clone());
            }
            if *h == whole {
                names.push("G".into());
                let s = group.structural_name(h);
                if !bases.contains(&s) {
                    names.push(s);
                }
            }
            if group.structural_name(h) == "D3" {
                names.push("S3".into());
            }
            let mut uniq: Vec<String> = Vec::new();
            for n in names {
                if !uniq.contains(&n) {
                    uniq.push(n);
                }
            }
            let name = uniq.remove(0);
            OrbitType {
                class_id: id,
                name,
                aliases: uniq,
                representative: h.clone(),
                fixed_dim: *k,
                orbit_size: group.order() / h.order(),
            }
        })
        .collect()
}

/// Subgroups generated by catalog-named elements, with their display names.
fn curated_subgroups(group: &FiniteGroup) -> Vec<(String, Subgroup)> {
    let named: Vec<(&String, usize)> = group.named_elements().iter().map(|(n, &i)| (n, i)).collect();
    let mut out: Vec<(String, Subgroup)> = Vec::new();
    for &(n, e) in &named {
        let s = group.generated_subgroup(&[e]);
        out.push((format!("{}^{}", group.structural_name(&s), n), s));
    }
    for &(a, ea) in named.iter().rev() {
        for &(b, eb) in named.iter().rev() {
            if a <= b {
                continue;
            }
            let s = group.generated_subgroup(&[ea, eb]);
            if s.order() == 4 && group.structural_name(&s) == "Z2xZ2" {
                out.push((format!("Z2^{a}xZ2^{b}"), s.clone()));
                out.push((format!("Z2^{b}xZ2^{a}"), s));
            }
        }
    }
    out
}

fn normalize_name(s: &str) -> String {
    s.replace('×', "x")
        .replace('κ', "kappa")
        .replace('τ', "tau")
        .chars()
        .filter(|c| !matches!(c, '_' | ' ' | '{' | '}' | '\\' | '(' | ')'))
        .collect()
}

/// Components of `V°(H)/N_G(H)` for an isotropy subgroup `H`.
pub fn topological_components(group: &FiniteGroup, h: &Subgroup) -> Result<Vec<TopoOrbitType>> {
    let v = fixed_space(group.dim(), group.matrices_of(h));
    let stab: Vec<usize> = (0..group.order())
        .filter(|&g| v.ncols() == 0 || ((group.element(g).matrix() * &v) - &v).amax() < POINT_TOL)
        .collect();
    if stab != h.members() {
        return Err(Error::NotIsotropy);
    }
    let table = StrataTable::new(Arc::new(group.clone()));
    let &(class_id, w) = table.conjugates.get(h.members()).ok_or(Error::NotIsotropy)?;
    let back = group.element(group.inv(w));
    Ok(table.strata[class_id]
        .components
        .iter()
        .map(|t| TopoOrbitType { representative_point: back.apply(&t.representative_point), ..t.clone() })
        .collect())
}

fn build_stratum(group: &FiniteGroup, orbit_type: OrbitType) -> Stratum {
    let dim = group.dim();
    let h = &orbit_type.representative;
    let basis = fixed_space(dim, group.matrices_of(h));
    let k = basis.ncols();
    let normalizer = group.normalizer(h);

    let mut walls: Vec<DVector<f64>> = Vec::new();
    if k > 0 {
        for g in 0..group.order() {
            if h.contains(g) {
                continue;
            }
            let w = intersect(&basis, &fixed_space(dim, [group.element(g).matrix()]));
            if w.ncols() + 1 != k {
                continue;
            }
            let ns = null_space(&(w.transpose() * &basis), 1e-9);
            if ns.ncols() != 1 {
                continue;
            }
            let n = canonical_sign(ns.column(0).normalize());
            if !walls.iter().any(|m| (m.dot(&n).abs() - 1.0).abs() < 1e-9) {
                walls.push(n);
            }
        }
    }

    let (chambers, chamber_points) = if k == 0 {
        (vec![Vec::new()], vec![DVector::zeros(0)])
    } else {
        let pts = chamber_points(&walls, &DMatrix::identity(k, k));
        let mut chambers: Vec<Vec<i8>> = Vec::new();
        let mut points: Vec<DVector<f64>> = Vec::new();
        for p in pts {
            let s: Vec<i8> = walls.iter().map(|n| if n.dot(&p) > 0.0 { 1 } else { -1 }).collect();
            if !chambers.contains(&s) {
                chambers.push(s);
                points.push(p);
            }
        }
        (chambers, points)
    };
    let chamber_index: HashMap<Vec<i8>, usize> = chambers.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();

    // merge chambers under N_G(H) acting on V(H) by B^T g B
    let mut parent: Vec<usize> = (0..chambers.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    if k > 0 {
        for &g in normalizer.members() {
            let a = basis.transpose() * group.element(g).matrix() * &basis;
            for (i, p) in chamber_points.iter().enumerate() {
                let q = &a * p;
                let s: Vec<i8> = walls.iter().map(|n| if n.dot(&q) > 0.0 { 1 } else { -1 }).collect();
                if let Some(&j) = chamber_index.get(&s) {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
    }
    let sign_key = |s: &Vec<i8>| s.iter().map(|&x| if x > 0 { 0u8 } else { 1u8 }).collect::<Vec<u8>>();
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..chambers.len() {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    for c in &mut comps {
        c.sort_by_key(|&i| sign_key(&chambers[i]));
    }
    comps.sort_by_key(|c| sign_key(&chambers[c[0]]));
    let mut chamber_component = vec![0; chambers.len()];
    for (ci, c) in comps.iter().enumerate() {
        for &i in c {
            chamber_component[i] = ci;
        }
    }

    let components = comps
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let label = "'".repeat(ci);
            let point = exact_representative(group, h, &basis, &walls, &chamber_points[c[0]]);
            TopoOrbitType {
                class_id: orbit_type.class_id,
                component: ci,
                name: format!("{}{}", orbit_type.name, label),
                label,
                representative_point: point,
            }
        })
        .collect();

    Stratum {
        orbit_type,
        basis,
        walls,
        normalizer,
        components,
        chambers,
        chamber_points,
        chamber_component,
        chamber_index,
    }
}

fn canonical_sign(n: DVector<f64>) -> DVector<f64> {
    match n.iter().find(|v| v.abs() > 1e-9) {
        Some(v) if *v < 0.0 => -n,
        _ => n,
    }
}

/// One unit point per chamber of the central arrangement `walls`, restricted to `span(sub)`.
fn chamber_points(walls: &[DVector<f64>], sub: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let m = sub.ncols();
    let k = sub.nrows();
    if m == 0 {
        return vec![DVector::zeros(k)];
    }
    // in-subspace unit normals, deduplicated up to sign
    let mut normals: Vec<DVector<f64>> = Vec::new();
    for n in walls {
        let r = sub.transpose() * n;
        if r.norm() < 1e-9 {
            continue;
        }
        let u = sub * r.normalize();
        if !normals.iter().any(|v| (v.dot(&u).abs() - 1.0).abs() < 1e-9) {
            normals.push(u);
        }
    }
    if normals.is_empty() {
        let generic = DVector::from_fn(m, |i, _| 1.0 / (1.0 + i as f64 * 0.618));
        return vec![(sub * generic).normalize()];
    }
    if m == 1 {
        let e = sub.column(0).into_owned();
        return vec![e.clone(), -e];
    }
    let mut out: Vec<DVector<f64>> = Vec::new();
    for n in &normals {
        let face = complement_in(sub, n);
        for p in chamber_points(&normals, &face) {
            let dist = normals
                .iter()
                .map(|o| o.dot(&p).abs())
                .filter(|d| *d > 1e-9)
                .fold(f64::INFINITY, f64::min);
            let eps = if dist.is_finite() { 0.5 * dist } else { 1.0 };
            out.push((&p + n * eps).normalize());
            out.push((&p - n * eps).normalize());
        }
    }
    out
}

/// Chamber point nudged, if necessary, so that its isotropy is exactly `H`.
fn exact_representative(
    group: &FiniteGroup,
    h: &Subgroup,
    basis: &DMatrix<f64>,
    walls: &[DVector<f64>],
    coords: &DVector<f64>,
) -> DVector<f64> {
    let k = basis.ncols();
    if k == 0 {
        return DVector::zeros(group.dim());
    }
    let sign = |v: &DVector<f64>| walls.iter().map(|n| n.dot(v) > 0.0).collect::<Vec<_>>();
    let target = sign(coords);
    let ok = |v: &DVector<f64>| {
        sign(v) == target && isotropy_subgroup(group, &(basis * v)).map_or(false, |s| &s == h)
    };
    if ok(coords) {
        return basis * coords;
    }
    let mut step = 0.25;
    for t in 1..200 {
        let dir = DVector::from_fn(k, |i, _| ((t * 7 + i * 13) as f64 * 0.7548776662).sin());
        let v = (coords + dir * step).normalize();
        if ok(&v) {
            return basis * v;
        }
        if t % 10 == 0 {
            step *= 0.5;
        }
    }
    basis * coords
}
