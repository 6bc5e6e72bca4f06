//! Configurations of point masses and the two functionals that define central
//! configurations: the potential `U` and the moment of inertia `I`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::OrthogonalMatrix;
use crate::linalg::sorted_symmetric_eigen;

/// Pairs closer than this are treated as a collision.
pub const COLLISION_TOL: f64 = 1e-12;

/// Point masses in R^d. Stored in order; equality semantics are order-free.
#[derive(Clone, Debug)]
pub struct Configuration {
    dim: usize,
    points: Vec<DVector<f64>>,
    masses: Vec<f64>,
}

impl Configuration {
    pub fn new(points: Vec<DVector<f64>>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfiguration("no bodies".into()));
        }
        if points.len() != masses.len() {
            return Err(Error::SizeMismatch(points.len(), masses.len()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidConfiguration("zero-dimensional points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfiguration("non-finite coordinate".into()));
            }
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("mass {m} is not positive")));
        }
        Ok(Self { dim, points, masses })
    }

    /// Build from row-major coordinates.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>], masses: Vec<f64>) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| {
                if r.len() == dim {
                    Ok(DVector::from_column_slice(r))
                } else {
                    Err(Error::DimensionMismatch { expected: dim, found: r.len() })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, masses)
    }

    /// Build from a flat `n*d` coordinate vector.
    pub fn from_flat(dim: usize, flat: &DVector<f64>, masses: Vec<f64>) -> Result<Self> {
        let points = (0..masses.len()).map(|i| flat.rows(i * dim, dim).into_owned()).collect();
        Self::new(points, masses)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.len() * self.dim);
        for (i, p) in self.points.iter().enumerate() {
            out.rows_mut(i * self.dim, self.dim).copy_from(p);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            points: self.points.iter().map(|p| p * factor).collect(),
            masses: self.masses.clone(),
        }
    }

    /// Rescale so that the moment of inertia is one.
    pub fn normalized(&self) -> Result<Self> {
        let i = moment_of_inertia(self);
        if !(i > 0.0) {
            return Err(Error::ZeroInertia);
        }
        Ok(self.scaled(1.0 / i.sqrt()))
    }

    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), masses)
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Index of a body at `p` with mass `m`, within `tol`.
    pub fn find_body(&self, p: &DVector<f64>, m: f64, tol: f64) -> Option<usize> {
        self.points
            .iter()
            .zip(&self.masses)
            .position(|(q, &mq)| (q - p).norm() <= tol && masses_equal(m, mq))
    }

    /// Smallest pairwise distance with the offending pair.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let r = (&self.points[i] - &self.points[j]).norm();
                if best.map_or(true, |b| r < b.2) {
                    best = Some((i, j, r));
                }
            }
        }
        best
    }

    pub fn min_separation(&self) -> f64 {
        self.closest_pair().map_or(f64::INFINITY, |p| p.2)
    }
}

pub(crate) fn masses_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// `U = sum_{i<j} m_i m_j / r_ij^a`.
pub fn potential(c: &Configuration, exponent: f64) -> Result<f64> {
    let mut u = 0.0;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            let r = (&c.points[i] - &c.points[j]).norm();
            if r < COLLISION_TOL {
                return Err(Error::CollisionSingularity { i, j, distance: r });
            }
            u += c.masses[i] * c.masses[j] / r.powf(exponent);
        }
    }
    Ok(u)
}

/// `I = sum_i m_i |x_i|^2`, about the origin.
pub fn moment_of_inertia(c: &Configuration) -> f64 {
    c.points.iter().zip(&c.masses).map(|(p, m)| m * p.norm_squared()).sum()
}

/// Gradient of `U` with respect to each body position.
pub fn grad_potential(c: &Configuration, exponent: f64) -> Result<Vec<DVector<f64>>> {
    let mut grad = vec![DVector::zeros(c.dim); c.len()];
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            let diff = &c.points[i] - &c.points[j];
            let r = diff.norm();
            if r < COLLISION_TOL {
                return Err(Error::CollisionSingularity { i, j, distance: r });
            }
            let f = -exponent * c.masses[i] * c.masses[j] / r.powf(exponent + 2.0);
            grad[i] += &diff * f;
            grad[j] -= &diff * f;
        }
    }
    Ok(grad)
}

pub fn grad_inertia(c: &Configuration) -> Vec<DVector<f64>> {
    c.points.iter().zip(&c.masses).map(|(p, m)| p * (2.0 * m)).collect()
}

/// Hessian of `U` in flat coordinates (`n*d` square).
pub fn hessian_potential(c: &Configuration, exponent: f64) -> Result<DMatrix<f64>> {
    let d = c.dim;
    let mut h = DMatrix::zeros(c.len() * d, c.len() * d);
    let id = DMatrix::<f64>::identity(d, d);
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            let diff = &c.points[i] - &c.points[j];
            let r = diff.norm();
            if r < COLLISION_TOL {
                return Err(Error::CollisionSingularity { i, j, distance: r });
            }
            let mm = c.masses[i] * c.masses[j];
            let block = (&id * (-exponent * r.powf(-exponent - 2.0))
                + &diff * diff.transpose() * (exponent * (exponent + 2.0) * r.powf(-exponent - 4.0)))
                * mm;
            for (a, b, s) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
                let mut v = h.view_mut((a * d, b * d), (d, d));
                v += &block * s;
            }
        }
    }
    Ok(h)
}

pub fn flatten(vs: &[DVector<f64>]) -> DVector<f64> {
    let d = vs.first().map_or(0, |v| v.len());
    let mut out = DVector::zeros(vs.len() * d);
    for (i, v) in vs.iter().enumerate() {
        out.rows_mut(i * d, d).copy_from(v);
    }
    out
}

pub fn barycenter(c: &Configuration) -> DVector<f64> {
    let mut acc = DVector::zeros(c.dim);
    for (p, m) in c.points.iter().zip(&c.masses) {
        acc += p * *m;
    }
    acc / c.total_mass()
}

/// Translated copy with barycenter at the origin.
pub fn center(c: &Configuration) -> Configuration {
    let b = barycenter(c);
    Configuration {
        dim: c.dim,
        points: c.points.iter().map(|p| p - &b).collect(),
        masses: c.masses.clone(),
    }
}

/// `g . C`: every point mapped, masses carried along.
pub fn act(g: &OrthogonalMatrix, c: &Configuration) -> Result<Configuration> {
    if g.dim() != c.dim {
        return Err(Error::DimensionMismatch { expected: c.dim, found: g.dim() });
    }
    Ok(Configuration {
        dim: c.dim,
        points: c.points.iter().map(|p| g.apply(p)).collect(),
        masses: c.masses.clone(),
    })
}

/// The inertia matrix `S = sum_i m_i x_i x_i^T` with its spectrum.
#[derive(Clone, Debug)]
pub struct InertiaData {
    pub s: DMatrix<f64>,
    /// Eigenvalues in descending order.
    pub spectrum: Vec<f64>,
    /// Distinct eigenvalues with multiplicities (merged within `1e-9 * trace`).
    pub multiplicities: Vec<(f64, usize)>,
    pub eigenvectors: DMatrix<f64>,
}

pub fn inertia_matrix(c: &Configuration) -> InertiaData {
    let mut s = DMatrix::zeros(c.dim, c.dim);
    for (p, m) in c.points.iter().zip(&c.masses) {
        s += p * p.transpose() * *m;
    }
    let (spectrum, eigenvectors) = sorted_symmetric_eigen(&s);
    let tol = 1e-9 * s.trace().abs().max(f64::MIN_POSITIVE);
    let mut multiplicities: Vec<(f64, usize)> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for &v in &spectrum {
        if let Some(&last) = group.last() {
            if (last - v).abs() > tol {
                let mean = group.iter().sum::<f64>() / group.len() as f64;
                multiplicities.push((mean, group.len()));
                group.clear();
            }
        }
        group.push(v);
    }
    if !group.is_empty() {
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        multiplicities.push((mean, group.len()));
    }
    InertiaData { s, spectrum, multiplicities, eigenvectors }
}

/// Least-squares Lagrange multiplier and relative residual of `grad U = lambda grad I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralResidual {
    pub lambda: f64,
    pub residual: f64,
}

pub fn central_residual(c: &Configuration, exponent: f64) -> Result<CentralResidual> {
    let gu = flatten(&grad_potential(c, exponent)?);
    let gi = flatten(&grad_inertia(c));
    let gi2 = gi.norm_squared();
    if !(gi2 > 0.0) {
        return Err(Error::ZeroInertia);
    }
    let lambda = gu.dot(&gi) / gi2;
    let residual = (&gu - &gi * lambda).norm() / gu.norm();
    Ok(CentralResidual { lambda, residual })
}

/// Sorted `(m_lo, m_hi, r)` triples over all pairs; invariant under isometries and relabeling.
pub fn fingerprint(c: &Configuration) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(c.len() * c.len().saturating_sub(1) / 2);
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            let (a, b) = (c.masses[i], c.masses[j]);
            let r = (&c.points[i] - &c.points[j]).norm();
            out.push((a.min(b), a.max(b), r));
        }
    }
    let key = |m: f64| (m * 1e9).round();
    out.sort_by(|x, y| {
        key(x.0)
            .total_cmp(&key(y.0))
            .then(key(x.1).total_cmp(&key(y.1)))
            .then(x.2.total_cmp(&y.2))
    });
    out
}

/// L-infinity distance between sorted fingerprints (zero for congruent configurations).
pub fn config_distance(a: &Configuration, b: &Configuration) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    let (fa, fb) = (fingerprint(a), fingerprint(b));
    Ok(fa
        .iter()
        .zip(&fb)
        .map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs()).max((x.2 - y.2).abs()))
        .fold(0.0, f64::max))
}

/// Lexicographic comparison of fingerprints, for deterministic tie-breaking.
pub fn fingerprint_cmp(a: &[(f64, f64, f64)], b: &[(f64, f64, f64)]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Hausdorff distance between the mass-labelled point sets (no isometry quotient).
///
/// Zero exactly when the two configurations are equal as unordered sets with masses.
pub fn set_distance(a: &Configuration, b: &Configuration) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    let one_way = |x: &Configuration, y: &Configuration| {
        x.points
            .iter()
            .zip(&x.masses)
            .map(|(p, &m)| {
                y.points
                    .iter()
                    .zip(&y.masses)
                    .filter(|(_, &mq)| masses_equal(m, mq))
                    .map(|(q, _)| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_way(a, b).max(one_way(b, a)))
}

/// Unordered, mass-preserving equality within `tol`.
pub fn same_configuration(a: &Configuration, b: &Configuration, tol: f64) -> bool {
    set_distance(a, b).map_or(false, |d| d <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: &[&[f64]], masses: &[f64]) -> Configuration {
        let dim = rows[0].len();
        Configuration::from_rows(dim, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), masses.to_vec()).unwrap()
    }

    #[test]
    fn potential_examples() {
        let two = cfg(&[&[0.5, 0.0], &[-0.5, 0.0]], &[1.0, 1.0]);
        assert!((potential(&two, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let s3 = 3f64.sqrt();
        let tri = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, s3 / 2.0]], &[1.0; 3]);
        assert!((potential(&tri, 1.0).unwrap() - 3.0).abs() < 1e-14);
        let sq = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]], &[1.0; 4]);
        assert!((potential(&sq, 1.0).unwrap() - (4.0 + 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn inertia_examples() {
        let two = cfg(&[&[0.5, 0.0], &[-0.5, 0.0]], &[1.0, 1.0]);
        assert!((moment_of_inertia(&two) - 0.5).abs() < 1e-15);
        let tri: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let tri = Configuration::from_rows(2, &tri, vec![1.0; 3]).unwrap();
        assert!((moment_of_inertia(&tri) - 3.0).abs() < 1e-14);
        let data = inertia_matrix(&tri);
        assert!((data.spectrum[0] - 1.5).abs() < 1e-14 && (data.spectrum[1] - 1.5).abs() < 1e-14);
        assert_eq!(data.multiplicities.len(), 1);
        assert_eq!(data.multiplicities[0].1, 2);
    }

    #[test]
    fn collinear_spectrum_has_zeros() {
        let c = cfg(&[&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]], &[1.0, 1.0]);
        let data = inertia_matrix(&c);
        assert!((data.spectrum[0] - 2.0).abs() < 1e-14);
        assert!(data.spectrum[1].abs() < 1e-14 && data.spectrum[2].abs() < 1e-14);
    }

    #[test]
    fn unit_square_inertia_is_scalar() {
        // circumradius 1, four unit masses: trace S = I = 4 forces S = 2 Id
        let h = 0.5f64.sqrt();
        let c = cfg(&[&[h, h], &[-h, h], &[-h, -h], &[h, -h]], &[1.0; 4]);
        let data = inertia_matrix(&c);
        assert!((data.s.clone() - DMatrix::<f64>::identity(2, 2) * 2.0).amax() < 1e-14);
    }

    #[test]
    fn pair_force_attracts() {
        let two = cfg(&[&[0.5, 0.0], &[-0.5, 0.0]], &[1.0, 1.0]);
        let g = grad_potential(&two, 1.0).unwrap();
        assert!((g[0][0] + 1.0).abs() < 1e-14 && (g[1][0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn collision_is_an_error() {
        let c = cfg(&[&[0.0, 0.0], &[0.0, 0.0]], &[1.0, 1.0]);
        assert!(matches!(potential(&c, 1.0), Err(Error::CollisionSingularity { .. })));
        assert!(matches!(grad_potential(&c, 1.0), Err(Error::CollisionSingularity { .. })));
    }

    #[test]
    fn barycenter_and_center() {
        let c = cfg(&[&[0.0, 0.0], &[3.0, 0.0]], &[1.0, 2.0]);
        let b = barycenter(&c);
        assert!((b[0] - 2.0).abs() < 1e-15 && b[1].abs() < 1e-15);
        let cc = center(&c);
        assert!(barycenter(&cc).norm() < 1e-15);
        assert!(set_distance(&center(&cc), &cc).unwrap() < 1e-15);
    }

    #[test]
    fn nonpositive_mass_rejected() {
        assert!(Configuration::from_rows(1, &[vec![0.0]], vec![0.0]).is_err());
    }

    #[test]
    fn scale_changes_fingerprint() {
        let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[0.2, 0.7]], &[1.0, 2.0, 3.0]);
        assert!(config_distance(&c, &c.scaled(2.0)).unwrap() > 0.1);
        assert!(config_distance(&c, &c).unwrap() == 0.0);
    }

    #[test]
    fn equal_mass_triangle_is_central() {
        let tri: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let c = Configuration::from_rows(2, &tri, vec![1.0; 3]).unwrap().normalized().unwrap();
        let res = central_residual(&c, 1.0).unwrap();
        let u = potential(&c, 1.0).unwrap();
        assert!(res.residual < 1e-12);
        assert!((res.lambda + u / 2.0).abs() < 1e-12);
    }
}
