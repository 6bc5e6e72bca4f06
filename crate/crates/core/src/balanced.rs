//! Balanced configurations: critical points of `U` at fixed inertia spectrum.
//!
//! The first-order condition is `grad_i U + m_i B x_i = 0` for a symmetric
//! matrix `B`; central configurations at `I = 1` give `B = a U Id`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{fixed_space, from_columns, null_space, pinv_solve, rank, sorted_symmetric_eigen};
use crate::nbody::{self, Configuration};
use crate::reduction::{check_symmetric, SymmetricAnsatz};
use crate::solver::SolveOptions;

/// Target inertia spectrum, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTarget {
    sigma: Vec<f64>,
}

impl SpectrumTarget {
    pub fn new(mut sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidAnsatz("spectrum entries must be finite and non-negative".into()));
        }
        if sigma.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidAnsatz("spectrum must have positive trace".into()));
        }
        sigma.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `p_k = sum_j sigma_j^k` for `k = 1..d`.
    pub fn power_sums(&self) -> Vec<f64> {
        (1..=self.sigma.len()).map(|k| self.sigma.iter().map(|s| s.powi(k as i32)).sum()).collect()
    }

    /// `max_j |sigma_j(S) - sigma_j| / (1 + p_1)`.
    pub fn error_of(&self, spectrum: &[f64]) -> f64 {
        let p1 = self.power_sums()[0];
        self.sigma
            .iter()
            .zip(spectrum)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / (1.0 + p1)
    }
}

#[derive(Clone, Debug)]
pub struct BalancedResult {
    pub configuration: Configuration,
    pub b: DMatrix<f64>,
    pub u_value: f64,
    /// `max_i |grad_i U + m_i B x_i| / |grad U|`.
    pub residual: f64,
    /// Present when a target spectrum was imposed.
    pub spectrum_error: Option<f64>,
    pub is_central: bool,
    /// The least-squares system for `B` was rank deficient; `B` is the minimum-norm solution.
    pub degenerate_geometry: bool,
    /// `|BS - SB|` (max entry).
    pub commutator: f64,
}

fn sym_basis(d: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in a..d {
            let mut e = DMatrix::zeros(d, d);
            e[(a, b)] = 1.0;
            e[(b, a)] = 1.0;
            out.push(e);
        }
    }
    out
}

fn is_scalar(b: &DMatrix<f64>) -> bool {
    let d = b.nrows();
    let s = b.trace() / d as f64;
    (b - DMatrix::identity(d, d) * s).amax() <= 1e-8 * s.abs().max(1.0)
}

fn flatten_weighted(c: &Configuration) -> DVector<f64> {
    let d = c.dim();
    let mut v = DVector::zeros(c.len() * d);
    for (i, (p, m)) in c.points().iter().zip(c.masses()).enumerate() {
        v.rows_mut(i * d, d).copy_from(&(p * *m));
    }
    v
}

/// Best symmetric multiplier for a given configuration.
pub fn balanced_residual(c: &Configuration, exponent: f64) -> Result<BalancedResult> {
    let d = c.dim();
    let n = c.len();
    if !(nbody::moment_of_inertia(c) > 0.0) {
        return Err(Error::ZeroInertia);
    }
    let grad = nbody::flatten(&nbody::grad_potential(c, exponent)?);
    let basis = sym_basis(d);
    let mut m = DMatrix::zeros(n * d, basis.len());
    for (col, e) in basis.iter().enumerate() {
        for i in 0..n {
            let v = e * &c.points()[i] * c.masses()[i];
            m.view_mut((i * d, col), (d, 1)).copy_from(&v);
        }
    }
    let coeffs = pinv_solve(&m, &(-&grad), 1e-12);
    let degenerate_geometry = rank(&m, 1e-10) < basis.len();
    let mut b = DMatrix::zeros(d, d);
    for (e, &k) in basis.iter().zip(coeffs.iter()) {
        b += e * k;
    }
    let scale = grad.norm().max(f64::MIN_POSITIVE);
    let residual = (0..n)
        .map(|i| (grad.rows(i * d, d) + &b * &c.points()[i] * c.masses()[i]).norm())
        .fold(0.0, f64::max)
        / scale;
    // with a rank-deficient system the minimal-norm B need not be scalar even when a scalar one fits
    let is_central = if degenerate_geometry {
        let mx = flatten_weighted(c);
        let lam = -grad.dot(&mx) / mx.norm_squared();
        (&grad + &mx * lam).norm() <= 1e-8 * scale
    } else {
        is_scalar(&b)
    };
    let s = nbody::inertia_matrix(c).s;
    let commutator = (&b * &s - &s * &b).amax();
    Ok(BalancedResult {
        configuration: c.clone(),
        is_central,
        b,
        u_value: nbody::potential(c, exponent)?,
        residual,
        spectrum_error: None,
        degenerate_geometry,
        commutator,
    })
}

struct SpectrumProblem<'a> {
    ans: &'a SymmetricAnsatz,
    target: &'a SpectrumTarget,
    p: Vec<f64>,
}

impl<'a> SpectrumProblem<'a> {
    fn new(ans: &'a SymmetricAnsatz, target: &'a SpectrumTarget) -> Result<Self> {
        let d = ans.group().dim();
        if target.sigma().len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: target.sigma().len() });
        }
        Ok(Self { ans, target, p: target.power_sums() })
    }

    fn d(&self) -> usize {
        self.p.len()
    }

    fn config(&self, y: &DVector<f64>) -> Result<Configuration> {
        Configuration::from_flat(self.d(), &self.ans.positions(y), self.ans.masses().to_vec())
    }

    fn s_matrix(&self, c: &Configuration) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.d(), self.d());
        for (x, m) in c.points().iter().zip(c.masses()) {
            s += x * x.transpose() * *m;
        }
        s
    }

    /// Normalized power-sum constraints `(tr S^k - p_k) / p_1^k`.
    fn constraints(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.s_matrix(&self.config(y)?);
        let mut pow = DMatrix::identity(self.d(), self.d());
        Ok(DVector::from_fn(self.d(), |k, _| {
            pow = &pow * &s;
            (pow.trace() - self.p[k]) / self.p[0].powi(k as i32 + 1)
        }))
    }

    /// Rows are effective-coordinate gradients of the normalized constraints.
    fn jacobian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let c = self.config(y)?;
        let s = self.s_matrix(&c);
        let d = self.d();
        let a = self.ans.positions(y).len();
        let mut out = DMatrix::zeros(d, y.len());
        let mut pow = DMatrix::identity(d, d);
        let lift = |flat: &DVector<f64>| self.ans.position_map().transpose() * flat;
        for k in 1..=d {
            let mut flat = DVector::zeros(a);
            for (i, (x, m)) in c.points().iter().zip(c.masses()).enumerate() {
                let v = &pow * x * (2.0 * k as f64 * m);
                flat.rows_mut(i * d, d).copy_from(&v);
            }
            let row = lift(&flat) / self.p[0].powi(k as i32);
            out.set_row(k - 1, &row.transpose());
            pow = &pow * &s;
        }
        Ok(out)
    }

    fn spectrum_error(&self, y: &DVector<f64>) -> Result<f64> {
        let (vals, _) = sorted_symmetric_eigen(&self.s_matrix(&self.config(y)?));
        Ok(self.target.error_of(&vals))
    }

    fn admissible(&self, y: &DVector<f64>, opts: &SolveOptions) -> bool {
        self.ans.in_strata(y) && self.ans.eff_min_separation(y) >= opts.min_separation
    }
}

/// Gauss-Newton/LM on the constraints alone.
fn feasibility(prob: &SpectrumProblem, y0: DVector<f64>, opts: &SolveOptions) -> Result<DVector<f64>> {
    let mut y = y0;
    let mut c = prob.constraints(&y)?;
    let mut mu = 1e-6;
    for _ in 0..300 {
        if c.amax() <= 1e-14 {
            break;
        }
        let j = prob.jacobian(&y)?;
        let jt = j.transpose();
        let lhs = &jt * &j + DMatrix::identity(y.len(), y.len()) * (mu * (1.0 + (&jt * &j).amax()));
        let step = pinv_solve(&lhs, &(-(&jt * &c)), 1e-15);
        let trial = &y + step;
        let ct = if prob.admissible(&trial, opts) { prob.constraints(&trial).ok() } else { None };
        match ct {
            Some(ct) if ct.norm() < c.norm() => {
                y = trial;
                c = ct;
                mu = (mu * 0.3).max(1e-15);
            }
            _ => {
                mu *= 10.0;
                if mu > 1e8 {
                    break;
                }
            }
        }
    }
    Ok(y)
}

/// Augmented Lagrangian with a BFGS inner solve.
fn augmented_lagrangian(
    prob: &SpectrumProblem,
    y0: DVector<f64>,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let d = prob.d();
    let ans = prob.ans;
    let mut y = y0;
    let mut nu = DVector::zeros(d);
    let u0 = ans.eff_u(&y)?;
    let mut rho = 10.0 * u0.abs().max(1.0);
    let mut last_violation = f64::INFINITY;

    let phi = |y: &DVector<f64>, nu: &DVector<f64>, rho: f64| -> Result<(f64, DVector<f64>)> {
        let (u, g) = ans.eff_u_grad(y)?;
        let c = prob.constraints(y)?;
        let j = prob.jacobian(y)?;
        let val = u - nu.dot(&c) + 0.5 * rho * c.norm_squared();
        let grad = g - j.transpose() * (nu - &c * rho);
        Ok((val, grad))
    };

    for _ in 0..40 {
        // BFGS inner loop
        let (mut f, mut g) = phi(&y, &nu, rho)?;
        let p = y.len();
        let mut hinv = DMatrix::identity(p, p) / g.norm().max(1.0);
        for _ in 0..200 {
            if g.norm() <= 1e-7 * (1.0 + f.abs()) {
                break;
            }
            let mut dir = -(&hinv * &g);
            if dir.dot(&g) >= 0.0 {
                hinv = DMatrix::identity(p, p) / g.norm().max(1.0);
                dir = -&g / g.norm().max(1.0);
            }
            let mut t = 1.0;
            let mut next = None;
            while t > 1e-16 {
                let trial = &y + &dir * t;
                if prob.admissible(&trial, opts) {
                    if let Ok((ft, gt)) = phi(&trial, &nu, rho) {
                        if ft <= f + 1e-4 * t * dir.dot(&g) {
                            next = Some((trial, ft, gt));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            let Some((yn, fnew, gnew)) = next else { break };
            let s = &yn - &y;
            let yv = &gnew - &g;
            let sy = s.dot(&yv);
            if sy > 1e-14 * s.norm() * yv.norm() {
                let r = 1.0 / sy;
                let id = DMatrix::<f64>::identity(p, p);
                let left = &id - &s * yv.transpose() * r;
                let right = &id - &yv * s.transpose() * r;
                hinv = &left * &hinv * &right + &s * s.transpose() * r;
            }
            y = yn;
            f = fnew;
            g = gnew;
        }
        let c = prob.constraints(&y)?;
        let violation = c.amax();
        nu -= &c * rho;
        // the KKT polish takes it from here
        if violation <= 1e-8 {
            break;
        }
        if violation > 0.25 * last_violation {
            rho *= 10.0;
        }
        last_violation = violation;
    }
    Ok((y, nu))
}

/// Newton/LM on the KKT system `grad U = J^T nu`, `c = 0`.
fn kkt_polish(
    prob: &SpectrumProblem,
    y0: DVector<f64>,
    nu0: DVector<f64>,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let ans = prob.ans;
    let p = y0.len();
    let d = prob.d();
    let system = |y: &DVector<f64>, nu: &DVector<f64>| -> Result<DVector<f64>> {
        let (_, g) = ans.eff_u_grad(y)?;
        let j = prob.jacobian(y)?;
        let mut f = DVector::zeros(p + d);
        f.rows_mut(0, p).copy_from(&(g - j.transpose() * nu));
        f.rows_mut(p, d).copy_from(&prob.constraints(y)?);
        Ok(f)
    };
    let (mut y, mut nu) = (y0, nu0);
    let mut f = system(&y, &nu)?;
    let mut mu = 0.0;
    let mut stalls = 0;
    for _ in 0..60 {
        if f.norm() <= 1e-14 * (1.0 + ans.eff_u_grad(&y)?.1.norm()) {
            break;
        }
        let j = prob.jacobian(&y)?;
        let h = ans.eff_hessian_u(&y)?;
        // Hessian of nu . c by central differences of the constraint Jacobian
        let step_h = 1e-6 * y.norm().max(1.0);
        let mut hc = DMatrix::zeros(p, p);
        for k in 0..p {
            let mut e = DVector::zeros(p);
            e[k] = step_h;
            let jp = prob.jacobian(&(&y + &e))?;
            let jm = prob.jacobian(&(&y - &e))?;
            let col = (jp - jm).transpose() * &nu / (2.0 * step_h);
            hc.set_column(k, &col);
        }
        let hc = (&hc + hc.transpose()) * 0.5;
        let mut jac = DMatrix::zeros(p + d, p + d);
        jac.view_mut((0, 0), (p, p)).copy_from(&(h - hc));
        jac.view_mut((0, p), (p, d)).copy_from(&(-j.transpose()));
        jac.view_mut((p, 0), (d, p)).copy_from(&j);
        let step = if mu == 0.0 {
            pinv_solve(&jac, &(-&f), 1e-13)
        } else {
            let jt = jac.transpose();
            pinv_solve(&(&jt * &jac + DMatrix::identity(p + d, p + d) * mu), &(-(&jt * &f)), 1e-15)
        };
        let yt = &y + step.rows(0, p);
        let nt = &nu + step.rows(p, d);
        let ft = if prob.admissible(&yt, opts) { system(&yt, &nt).ok() } else { None };
        match ft {
            Some(ft) if ft.norm() < f.norm() => {
                y = yt;
                nu = nt;
                f = ft;
                mu = if mu < 1e-12 { 0.0 } else { mu / 10.0 };
                stalls = 0;
            }
            _ => {
                let s = jac.amax().max(1.0);
                mu = if mu == 0.0 { 1e-8 * s * s } else { mu * 10.0 };
                stalls += 1;
                if stalls > 10 {
                    break;
                }
            }
        }
    }
    Ok((y, nu))
}

/// Critical point of the reduced potential at a fixed inertia spectrum.
pub fn solve_balanced(ans: &SymmetricAnsatz, target: &SpectrumTarget, opts: &SolveOptions) -> Result<BalancedResult> {
    opts.validate()?;
    let prob = SpectrumProblem::new(ans, target)?;
    let p1 = prob.p[0];
    let runs: Vec<Result<(f64, DVector<f64>)>> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = opts.rng_for(s);
            let r = ans.random_point((0.5, 1.5), &mut rng)?;
            let y = ans.to_effective(&r);
            let i = ans.eff_inertia(&y);
            if !(i > 0.0) {
                return Err(Error::ZeroInertia);
            }
            let y = feasibility(&prob, y * (p1 / i).sqrt(), opts)?;
            Ok((prob.spectrum_error(&y)?, y))
        })
        .collect();
    let feasible: Vec<(f64, DVector<f64>)> = runs.into_iter().filter_map(|r| r.ok()).collect();
    let best = feasible.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    if !(best <= 1e-6) {
        return Err(Error::InfeasibleSpectrum { best });
    }

    let mut results: Vec<BalancedResult> = feasible
        .into_par_iter()
        .filter(|(e, _)| *e <= 1e-6)
        .filter_map(|(_, y)| {
            let (y, nu) = augmented_lagrangian(&prob, y, opts).ok()?;
            let (y, _) = kkt_polish(&prob, y, nu, opts).ok()?;
            let c = ans.lift_effective(&y).ok()?;
            let mut res = balanced_residual(&c, ans.exponent()).ok()?;
            res.spectrum_error = Some(prob.spectrum_error(&y).ok()?);
            Some(res)
        })
        .filter(|r| r.residual <= 1e-8 && r.spectrum_error.is_some_and(|e| e <= 1e-8))
        .collect();
    if results.is_empty() {
        return Err(Error::NoConvergence { starts: opts.starts, failures: opts.starts });
    }
    results.sort_by(|a, b| {
        a.u_value.total_cmp(&b.u_value).then_with(|| {
            nbody::fingerprint_cmp(&nbody::fingerprint(&a.configuration), &nbody::fingerprint(&b.configuration))
        })
    });
    Ok(results.remove(0))
}

/// One block `E_j` of the isotypic decomposition.
#[derive(Clone, Debug)]
pub struct IsotypicBlock {
    /// Orthonormal basis of `E_j` as columns.
    pub basis: DMatrix<f64>,
    /// Dimension of each irreducible copy (as found over the reals).
    pub irreducible_dim: usize,
    pub multiplicity: usize,
    /// Character value at each group element.
    pub character: Vec<f64>,
    /// `<chi, chi> = 1`; false flags a complex or quaternionic constituent.
    pub real_type: bool,
}

#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    pub blocks: Vec<IsotypicBlock>,
}

impl IsotypicDecomposition {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.ncols()).sum()
    }

    pub fn is_irreducible(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].multiplicity == 1 && self.blocks[0].real_type
    }
}

/// Isotypic blocks from the eigenspaces of a generic symmetric matrix commuting with `G`.
pub fn isotypic_decomposition(group: &FiniteGroup) -> IsotypicDecomposition {
    let d = group.dim();
    let basis = sym_basis(d);
    // columns: vec(g X - X g) for each basis X, stacked over generators
    let gens: Vec<usize> = if group.generators().is_empty() { vec![0] } else { group.generators().to_vec() };
    let mut rows = DMatrix::zeros(gens.len() * d * d, basis.len());
    for (gi, &g) in gens.iter().enumerate() {
        let m = group.element(g).matrix();
        for (col, x) in basis.iter().enumerate() {
            let c = m * x - x * m;
            for (k, v) in c.iter().enumerate() {
                rows[(gi * d * d + k, col)] = *v;
            }
        }
    }
    let commutant = null_space(&rows, 1e-9);
    let mut generic = DMatrix::zeros(d, d);
    for j in 0..commutant.ncols() {
        let w = 1.0 + 0.7548776662466927 * (j as f64 + 1.0).sqrt();
        for (col, x) in basis.iter().enumerate() {
            generic += x * (commutant[(col, j)] * w);
        }
    }
    let (vals, vecs) = sorted_symmetric_eigen(&generic);
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut spaces: Vec<DMatrix<f64>> = Vec::new();
    let mut start = 0;
    for i in 1..=d {
        if i == d || (vals[i] - vals[start]).abs() > 1e-8 * scale {
            let cols: Vec<DVector<f64>> = (start..i).map(|k| vecs.column(k).into_owned()).collect();
            spaces.push(from_columns(d, &cols));
            start = i;
        }
    }
    let character = |p: &DMatrix<f64>| -> Vec<f64> {
        group.elements().iter().map(|g| (p.transpose() * g.matrix() * p).trace()).collect()
    };
    let mut blocks: Vec<IsotypicBlock> = Vec::new();
    for sp in spaces {
        let chi = character(&sp);
        if let Some(b) = blocks.iter_mut().find(|b| {
            b.irreducible_dim == sp.ncols() && b.character.iter().zip(&chi).all(|(x, y)| (x - y).abs() < 1e-6)
        }) {
            let cols: Vec<DVector<f64>> =
                b.basis.column_iter().chain(sp.column_iter()).map(|c| c.into_owned()).collect();
            b.basis = from_columns(d, &cols);
            b.multiplicity += 1;
            continue;
        }
        let norm = chi.iter().map(|x| x * x).sum::<f64>() / group.order() as f64;
        blocks.push(IsotypicBlock {
            irreducible_dim: sp.ncols(),
            basis: sp,
            multiplicity: 1,
            real_type: (norm - 1.0).abs() < 1e-6,
            character: chi,
        });
    }
    IsotypicDecomposition { blocks }
}

/// `I_j = sum_i m_i |pi_j x_i|^2` for each block.
pub fn isotypic_inertia(c: &Configuration, dec: &IsotypicDecomposition) -> Result<Vec<f64>> {
    if dec.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: dec.dim(), found: c.dim() });
    }
    Ok(dec
        .blocks
        .iter()
        .map(|b| {
            c.points()
                .iter()
                .zip(c.masses())
                .map(|(x, m)| m * (b.basis.transpose() * x).norm_squared())
                .sum()
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SchurBlock {
    pub dim: usize,
    pub multiplicity: usize,
    pub real_type: bool,
    pub projected_inertia: f64,
    /// `I_j / dim E_j`, the scalar the block must equal when multiplicity is one.
    pub expected_scalar: Option<f64>,
    /// Largest deviation of the block from that scalar.
    pub scalar_deviation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SchurReport {
    /// `max_g |g S - S g|`.
    pub commutation: f64,
    /// Largest entry of `S` outside the isotypic blocks, in the block basis.
    pub off_block: f64,
    pub blocks: Vec<SchurBlock>,
    pub s: DMatrix<f64>,
}

pub fn schur_check(group: &FiniteGroup, c: &Configuration) -> Result<SchurReport> {
    if c.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: c.dim() });
    }
    if let Err(generator) = check_symmetric(group, c) {
        return Err(Error::NotSymmetric { generator });
    }
    let s = nbody::inertia_matrix(c).s;
    let commutation = group
        .elements()
        .iter()
        .map(|g| (g.matrix() * &s - &s * g.matrix()).amax())
        .fold(0.0, f64::max);
    let dec = isotypic_decomposition(group);
    let inertia = isotypic_inertia(c, &dec)?;
    let mut off_block: f64 = 0.0;
    for (i, bi) in dec.blocks.iter().enumerate() {
        for (j, bj) in dec.blocks.iter().enumerate() {
            if i != j {
                off_block = off_block.max((bi.basis.transpose() * &s * &bj.basis).amax());
            }
        }
    }
    let blocks = dec
        .blocks
        .iter()
        .zip(&inertia)
        .map(|(b, &ij)| {
            let dim = b.basis.ncols();
            let scalar = (b.multiplicity == 1 && b.real_type).then(|| ij / dim as f64);
            let deviation = scalar.map(|v| {
                (b.basis.transpose() * &s * &b.basis - DMatrix::identity(dim, dim) * v).amax()
            });
            SchurBlock {
                dim,
                multiplicity: b.multiplicity,
                real_type: b.real_type,
                projected_inertia: ij,
                expected_scalar: scalar,
                scalar_deviation: deviation,
            }
        })
        .collect();
    Ok(SchurReport { commutation, off_block, blocks, s })
}

/// Dimension of the space of `G`-invariant vectors, a quick irreducibility hint.
pub fn invariant_dim(group: &FiniteGroup) -> usize {
    fixed_space(group.dim(), group.elements().iter().map(|g| g.matrix())).ncols()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_group;

    #[test]
    fn two_bodies_are_balanced() {
        let c = Configuration::from_rows(2, &[vec![0.5, 0.0], vec![-0.5, 0.0]], vec![1.0, 1.0]).unwrap();
        let r = balanced_residual(&c, 1.0).unwrap();
        assert!(r.residual <= 1e-12);
        assert!(r.degenerate_geometry);
    }

    #[test]
    fn decomposition_examples() {
        let td = isotypic_decomposition(&parse_group("T_d").unwrap());
        assert!(td.is_irreducible());
        assert_eq!(td.blocks[0].irreducible_dim, 3);
        let c2h = isotypic_decomposition(&parse_group("C_2h").unwrap());
        let mut dims: Vec<usize> = c2h.blocks.iter().map(|b| b.basis.ncols()).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
        let c3 = isotypic_decomposition(&parse_group("C_3").unwrap());
        assert_eq!(c3.blocks.len(), 1);
        assert!(!c3.blocks[0].real_type);
        let c1 = isotypic_decomposition(&parse_group("C_1").unwrap());
        assert_eq!(c1.blocks.len(), 1);
        assert_eq!(c1.blocks[0].multiplicity, 2);
    }

    #[test]
    fn power_sums() {
        let t = SpectrumTarget::new(vec![0.2, 1.2, 0.6]).unwrap();
        assert_eq!(t.sigma(), &[1.2, 0.6, 0.2]);
        let p = t.power_sums();
        assert!((p[0] - 2.0).abs() < 1e-15);
        assert!((p[1] - (1.44 + 0.36 + 0.04)).abs() < 1e-14);
    }
}
