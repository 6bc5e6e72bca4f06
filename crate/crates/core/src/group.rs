//! Finite subgroups of O(d) held as explicit matrices with a full Cayley table.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance used to decide that two group elements are equal.
pub const ELEMENT_TOL: f64 = 1e-9;

/// An orthogonal matrix, checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let d = m.nrows();
        let dev = (m.transpose() * &m - DMatrix::<f64>::identity(d, d)).amax();
        if !dev.is_finite() || dev > ELEMENT_TOL {
            return Err(Error::NotOrthogonal { deviation: dev });
        }
        let det = m.determinant();
        if (det.abs() - 1.0).abs() > ELEMENT_TOL {
            return Err(Error::NotOrthogonal { deviation: (det.abs() - 1.0).abs() });
        }
        Ok(Self(m))
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Rotation by `angle` in the (x, y)-plane of R^2.
    pub fn rotation2(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Max-norm distance between entries.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).amax()
    }

    fn grid_key(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|v| {
                let k = (v * 1e6).round() as i64;
                if k == 0 { 0 } else { k }
            })
            .collect()
    }
}

/// A subgroup given by sorted element indices of a fixed parent enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|g| other.contains(*g))
    }
}

/// A finite subgroup of O(d). Element 0 is always the identity.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    name: String,
    dim: usize,
    elements: Vec<OrthogonalMatrix>,
    cayley: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    named: BTreeMap<String, usize>,
    lookup: HashMap<Vec<i64>, Vec<usize>>,
}

impl FiniteGroup {
    /// Closure of a set of generators, by breadth-first multiplication.
    pub fn generate(name: &str, generators: &[OrthogonalMatrix], max_order: usize) -> Result<Self> {
        let dim = generators.first().map(|g| g.dim()).unwrap_or(1);
        for g in generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
            }
            // re-validate: callers may have built the matrix by hand
            OrthogonalMatrix::new(g.0.clone())?;
        }
        let mut group = Self::empty(name, dim);
        group.insert(OrthogonalMatrix::identity(dim));
        let mut gen_idx = Vec::with_capacity(generators.len());
        for g in generators {
            let idx = match group.find(g) {
                Some(i) => i,
                None => group.insert(g.clone()),
            };
            gen_idx.push(idx);
        }
        let mut queue: VecDeque<usize> = (0..group.elements.len()).collect();
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let prod = g.compose(&group.elements[i]);
                if group.find(&prod).is_none() {
                    if group.elements.len() >= max_order {
                        return Err(Error::ClosureOverflow { max_order });
                    }
                    let j = group.insert(prod);
                    queue.push_back(j);
                }
            }
        }
        group.generators = gen_idx;
        group.build_tables()?;
        Ok(group)
    }

    /// Build from an explicit element list (JSON import). Element 0 must be the identity.
    pub fn from_elements(
        name: &str,
        elements: Vec<OrthogonalMatrix>,
        generators: Vec<usize>,
    ) -> Result<Self> {
        let dim = elements.first().map(|g| g.dim()).ok_or_else(|| Error::NotSubgroup("empty element list".into()))?;
        if elements[0].distance(&OrthogonalMatrix::identity(dim)) > ELEMENT_TOL {
            return Err(Error::NotSubgroup("element 0 is not the identity".into()));
        }
        let mut group = Self::empty(name, dim);
        for e in elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
            }
            if group.find(&e).is_some() {
                return Err(Error::NotSubgroup("duplicate element".into()));
            }
            group.insert(e);
        }
        if let Some(&bad) = generators.iter().find(|&&g| g >= group.elements.len()) {
            return Err(Error::NotSubgroup(format!("generator index {bad} out of range")));
        }
        group.generators = generators;
        group.build_tables()?;
        Ok(group)
    }

    fn empty(name: &str, dim: usize) -> Self {
        Self {
            name: name.to_string(),
            dim,
            elements: Vec::new(),
            cayley: Vec::new(),
            inverse: Vec::new(),
            generators: Vec::new(),
            named: BTreeMap::new(),
            lookup: HashMap::new(),
        }
    }

    fn insert(&mut self, m: OrthogonalMatrix) -> usize {
        let idx = self.elements.len();
        self.lookup.entry(m.grid_key()).or_default().push(idx);
        self.elements.push(m);
        idx
    }

    /// Index of the element equal to `m` (max-norm distance below tolerance).
    pub fn find(&self, m: &OrthogonalMatrix) -> Option<usize> {
        if m.dim() != self.dim {
            return None;
        }
        if let Some(bucket) = self.lookup.get(&m.grid_key()) {
            if let Some(&i) = bucket.iter().find(|&&i| self.elements[i].distance(m) < ELEMENT_TOL) {
                return Some(i);
            }
        }
        // grid rounding can split near-equal entries across buckets
        self.elements.iter().position(|e| e.distance(m) < ELEMENT_TOL)
    }

    fn build_tables(&mut self) -> Result<()> {
        let n = self.elements.len();
        let mut cayley = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let prod = self.elements[a].compose(&self.elements[b]);
                cayley[a][b] = self
                    .find(&prod)
                    .ok_or_else(|| Error::NotSubgroup("element set is not closed".into()))?;
            }
        }
        let inverse = (0..n)
            .map(|a| cayley[a].iter().position(|&c| c == 0).expect("latin square row contains identity"))
            .collect();
        self.cayley = cayley;
        self.inverse = inverse;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[OrthogonalMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &OrthogonalMatrix {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// Catalog-assigned names of distinguished elements (e.g. `tau`, `kappa`).
    pub fn named_elements(&self) -> &BTreeMap<String, usize> {
        &self.named
    }

    pub(crate) fn name_element(&mut self, label: &str, m: &OrthogonalMatrix) {
        if let Some(i) = self.find(m) {
            self.named.insert(label.to_string(), i);
        }
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_sorted((0..self.order()).collect())
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::from_sorted(vec![0])
    }

    /// Validate an index set as a subgroup.
    pub fn subgroup(&self, members: &[usize]) -> Result<Subgroup> {
        let mut m: Vec<usize> = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.first() != Some(&0) {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        if let Some(&bad) = m.iter().find(|&&g| g >= self.order()) {
            return Err(Error::NotSubgroup(format!("index {bad} out of range")));
        }
        let h = Subgroup::from_sorted(m);
        for &a in h.members() {
            for &b in h.members() {
                if !h.contains(self.mul(a, b)) {
                    return Err(Error::NotSubgroup("not closed under multiplication".into()));
                }
            }
        }
        Ok(h)
    }

    /// Subgroup generated by the given elements.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Subgroup {
        let mut members = vec![0usize];
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut i = 0;
        while i < members.len() {
            for &g in gens {
                let p = self.mul(g, members[i]);
                if !seen[p] {
                    seen[p] = true;
                    members.push(p);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        Subgroup::from_sorted(members)
    }

    /// g H g^-1.
    pub fn conjugate(&self, g: usize, h: &Subgroup) -> Subgroup {
        let gi = self.inv(g);
        let mut m: Vec<usize> = h.members().iter().map(|&x| self.mul(self.mul(g, x), gi)).collect();
        m.sort_unstable();
        Subgroup::from_sorted(m)
    }

    /// N_G(H) = { g : g H g^-1 = H }.
    pub fn normalizer(&self, h: &Subgroup) -> Subgroup {
        let members = (0..self.order()).filter(|&g| &self.conjugate(g, h) == h).collect();
        Subgroup::from_sorted(members)
    }

    /// Returns a witness `g` with `g H1 g^-1 = H2` when the subgroups are conjugate.
    pub fn are_conjugate(&self, h1: &Subgroup, h2: &Subgroup) -> Option<usize> {
        if h1.order() != h2.order() {
            return None;
        }
        (0..self.order()).find(|&g| &self.conjugate(g, h1) == h2)
    }

    /// Block embedding `g -> diag(g, Id)` into O(e), optionally adjoining `diag(Id_d, -Id_{e-d})`.
    pub fn embed(&self, e: usize, adjoin_flip: bool) -> Result<FiniteGroup> {
        if e <= self.dim {
            return Err(Error::BadParameter(format!("target dimension {e} must exceed {}", self.dim)));
        }
        let lift = |m: &DMatrix<f64>, tail: f64| {
            let mut out = DMatrix::<f64>::identity(e, e);
            out.view_mut((0, 0), (self.dim, self.dim)).copy_from(m);
            for i in self.dim..e {
                out[(i, i)] = tail;
            }
            OrthogonalMatrix(out)
        };
        let mut gens: Vec<OrthogonalMatrix> = self.generators.iter().map(|&g| lift(self.elements[g].matrix(), 1.0)).collect();
        if adjoin_flip {
            gens.push(lift(&DMatrix::identity(self.dim, self.dim), -1.0));
        }
        let suffix = if adjoin_flip { "xZ2" } else { "" };
        let mut out = FiniteGroup::generate(&format!("{}{}@R{}", self.name, suffix, e), &gens, 2 * self.order() + 1)?;
        for (label, &i) in &self.named {
            let m = lift(self.elements[i].matrix(), 1.0);
            out.name_element(label, &m);
        }
        if adjoin_flip {
            out.name_element("flip", &lift(&DMatrix::identity(self.dim, self.dim), -1.0));
        }
        Ok(out)
    }

    /// The elements of the subgroup as matrices.
    pub fn matrices_of<'a>(&'a self, h: &'a Subgroup) -> impl Iterator<Item = &'a DMatrix<f64>> + 'a {
        h.members().iter().map(move |&i| self.elements[i].matrix())
    }

    /// Whether every element of `h` commutes with every other one.
    pub fn is_abelian(&self, h: &Subgroup) -> bool {
        h.members()
            .iter()
            .all(|&a| h.members().iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Isomorphism-type label of a subgroup: `1`, `Zn`, `Z2xZ2`, `Dn`, or `Hn`.
    pub fn structural_name(&self, h: &Subgroup) -> String {
        let n = h.order();
        if n == 1 {
            return "1".into();
        }
        let orders: Vec<(usize, usize)> = h.members().iter().map(|&g| (g, self.element_order(g))).collect();
        if orders.iter().any(|&(_, o)| o == n) {
            return format!("Z{n}");
        }
        if self.is_abelian(h) && orders.iter().all(|&(_, o)| o <= 2) {
            let k = n.trailing_zeros() as usize;
            return vec!["Z2"; k].join("x");
        }
        if n % 2 == 0 {
            let half = n / 2;
            if let Some(&(r, _)) = orders.iter().find(|&&(_, o)| o == half) {
                let rot = self.generated_subgroup(&[r]);
                let dihedral = orders
                    .iter()
                    .filter(|(g, _)| !rot.contains(*g))
                    .all(|&(g, o)| o == 2 && self.mul(self.mul(g, r), g) == self.inv(r));
                if dihedral {
                    return format!("D{half}");
                }
            }
        }
        format!("H{n}")
    }
}
