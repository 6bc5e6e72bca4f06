//! Critical points of the reduced potential on the unit-inertia ellipsoid.
//!
//! All iterations run in the ansatz's effective coordinates `y`, where
//! `I(y) = y^T Q y`. The Lagrange system is `grad U = lambda * 2 Q y`, `I = 1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{complement_in, pinv_solve, sorted_symmetric_eigen};
use crate::nbody::{self, Configuration};
use crate::reduction::{ReducedPoint, SymmetricAnsatz};

/// Relative tangent-gradient size at which descent hands over to Newton polishing.
const POLISH_SWITCH: f64 = 1e-4;
const ARMIJO_C: f64 = 1e-4;
const START_RADIUS: (f64, f64) = (0.5, 1.5);

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol_grad: f64,
    pub max_iters: usize,
    pub starts: usize,
    pub seed: u64,
    pub min_separation: f64,
    pub newton_tol: f64,
    pub zero_eig_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-10,
            max_iters: 5000,
            starts: 64,
            seed: 0,
            min_separation: 1e-6,
            newton_tol: 1e-12,
            zero_eig_tol: 1e-6,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.tol_grad, self.min_separation, self.newton_tol, self.zero_eig_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidAnsatz("solver tolerances must be positive".into()));
        }
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidAnsatz("starts and max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Deterministic RNG stream for one start.
    pub fn rng_for(&self, start: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(start as u64);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Saddle,
    Degenerate,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::Minimum => "minimum",
            CriticalKind::Saddle => "saddle",
            CriticalKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    /// Lifted configuration: centered, `I = 1`.
    pub configuration: Configuration,
    pub reduced: ReducedPoint,
    pub u_value: f64,
    /// Full-space multiplier of `grad U = lambda grad I`.
    pub lambda: f64,
    /// Full-space relative central residual.
    pub residual: f64,
    /// Relative residual of the reduced Lagrange system.
    pub reduced_residual: f64,
    pub morse_index: usize,
    pub null_count: usize,
    pub kind: CriticalKind,
    /// Eigenvalues of the constrained Hessian on the tangent space, ascending.
    pub hessian_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Census {
    /// Distinct configurations (as mass-labelled point sets, tolerance 1e-6).
    pub distinct: Vec<CriticalPoint>,
    /// One representative per congruence class (fingerprint tolerance 1e-6).
    pub congruence_classes: Vec<CriticalPoint>,
    pub starts_used: usize,
    pub converged_count: usize,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct ScanStep {
    pub mass: f64,
    pub point: CriticalPoint,
}

fn retract(ans: &SymmetricAnsatz, z: &DVector<f64>) -> Option<DVector<f64>> {
    let i = ans.eff_inertia(z);
    (i > 1e-300 && i.is_finite()).then(|| z / i.sqrt())
}

fn tangent_basis(ans: &SymmetricAnsatz, y: &DVector<f64>) -> DMatrix<f64> {
    let p = y.len();
    complement_in(&DMatrix::identity(p, p), &(ans.q() * y))
}

fn admissible(ans: &SymmetricAnsatz, y: &DVector<f64>, opts: &SolveOptions) -> bool {
    ans.in_strata(y) && ans.eff_min_separation(y) >= opts.min_separation
}

/// Least-squares multiplier of `g = lambda * 2 Q y` and the relative residual.
fn reduced_multiplier(ans: &SymmetricAnsatz, y: &DVector<f64>, g: &DVector<f64>) -> (f64, f64) {
    let n = ans.q() * y * 2.0;
    let lambda = g.dot(&n) / n.norm_squared();
    let res = (g - &n * lambda).norm() / g.norm().max(f64::MIN_POSITIVE);
    (lambda, res)
}

/// Projected-gradient descent with Armijo backtracking; returns a point ready for polishing.
fn descend(ans: &SymmetricAnsatz, y0: &DVector<f64>, opts: &SolveOptions) -> Result<DVector<f64>> {
    let fail = || Error::NoConvergence { starts: 1, failures: 1 };
    let mut y = retract(ans, y0).ok_or(Error::ZeroInertia)?;
    if !admissible(ans, &y, opts) {
        return Err(fail());
    }
    let mut alpha_prev: f64 = 0.25;
    for _ in 0..opts.max_iters {
        let (u, g) = ans.eff_u_grad(&y)?;
        let n = ans.q() * &y;
        let gt = &g - &n * (g.dot(&n) / n.norm_squared());
        let gt2 = gt.norm_squared();
        if gt2.sqrt() <= POLISH_SWITCH * g.norm() {
            return Ok(y);
        }
        let mut alpha = (4.0 * alpha_prev).min(1.0);
        let mut accepted = None;
        while alpha > 1e-300 {
            if let Some(z) = retract(ans, &(&y - &gt * alpha)) {
                if admissible(ans, &z, opts) {
                    if let Ok(uz) = ans.eff_u(&z) {
                        if uz <= u - ARMIJO_C * alpha * gt2 {
                            accepted = Some(z);
                            break;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(z) => {
                y = z;
                alpha_prev = alpha;
            }
            None => return Ok(y),
        }
        if ans.eff_min_separation(&y) < opts.min_separation {
            return Err(fail());
        }
    }
    Err(fail())
}

/// Levenberg-Marquardt on the Lagrange system, staying inside the strata.
fn polish(ans: &SymmetricAnsatz, y0: &DVector<f64>, opts: &SolveOptions, iters: usize) -> Result<DVector<f64>> {
    let p = y0.len();
    let mut y = retract(ans, y0).ok_or(Error::ZeroInertia)?;
    let (_, g) = ans.eff_u_grad(&y)?;
    let mut lambda = reduced_multiplier(ans, &y, &g).0;

    let system = |y: &DVector<f64>, lambda: f64| -> Result<DVector<f64>> {
        let (_, g) = ans.eff_u_grad(y)?;
        let qy = ans.q() * y;
        let mut f = DVector::zeros(p + 1);
        f.rows_mut(0, p).copy_from(&(g - &qy * (2.0 * lambda)));
        f[p] = y.dot(&qy) - 1.0;
        Ok(f)
    };

    let mut f = system(&y, lambda)?;
    let mut mu = 0.0;
    let mut stalls = 0;
    for _ in 0..iters {
        let (_, g) = ans.eff_u_grad(&y)?;
        if (f.rows(0, p).norm() / g.norm()) <= opts.newton_tol && f[p].abs() <= 1e-14 {
            break;
        }
        let h = ans.eff_hessian_u(&y)?;
        let qy = ans.q() * &y;
        let mut j = DMatrix::zeros(p + 1, p + 1);
        j.view_mut((0, 0), (p, p)).copy_from(&(h - ans.q() * (2.0 * lambda)));
        j.view_mut((0, p), (p, 1)).copy_from(&(&qy * -2.0));
        j.view_mut((p, 0), (1, p)).copy_from(&(qy.transpose() * 2.0));
        let step = if mu == 0.0 {
            pinv_solve(&j, &(-&f), 1e-14)
        } else {
            let jt = j.transpose();
            let lhs = &jt * &j + DMatrix::identity(p + 1, p + 1) * mu;
            pinv_solve(&lhs, &(-(&jt * &f)), 1e-15)
        };
        let y_try = &y + step.rows(0, p);
        let l_try = lambda + step[p];
        let ok = admissible(ans, &y_try, opts);
        let f_try = if ok { system(&y_try, l_try).ok() } else { None };
        match f_try {
            Some(ft) if ft.norm() < f.norm() => {
                y = y_try;
                lambda = l_try;
                f = ft;
                mu = if mu < 1e-12 { 0.0 } else { mu / 10.0 };
                stalls = 0;
            }
            _ => {
                let scale = j.amax().max(1.0);
                mu = if mu == 0.0 { 1e-8 * scale * scale } else { mu * 10.0 };
                stalls += 1;
                if stalls > 8 {
                    break;
                }
            }
        }
    }
    retract(ans, &y).ok_or(Error::ZeroInertia)
}

/// Evaluate and classify a converged effective point.
fn classify(ans: &SymmetricAnsatz, y: &DVector<f64>, opts: &SolveOptions) -> Result<CriticalPoint> {
    let configuration = ans.lift_effective(y)?;
    let (u, g) = ans.eff_u_grad(y)?;
    let (lambda_red, reduced_residual) = reduced_multiplier(ans, y, &g);
    let central = nbody::central_residual(&configuration, ans.exponent())?;
    let (morse_index, null_count, hessian_eigenvalues) = if y.len() <= 1 {
        (0, 0, Vec::new())
    } else {
        let z = tangent_basis(ans, y);
        let hl = ans.eff_hessian_u(y)? - ans.q() * (2.0 * lambda_red);
        let m = z.transpose() * hl * &z;
        let (mut vals, _) = sorted_symmetric_eigen(&m);
        vals.reverse();
        let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = opts.zero_eig_tol * scale;
        let null = vals.iter().filter(|v| v.abs() <= tol).count();
        let neg = vals.iter().filter(|v| **v < -tol).count();
        (neg, null, vals)
    };
    let kind = if null_count > 0 {
        CriticalKind::Degenerate
    } else if morse_index == 0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    };
    Ok(CriticalPoint {
        configuration,
        reduced: ans.from_effective(y),
        u_value: u,
        lambda: central.lambda,
        residual: central.residual,
        reduced_residual,
        morse_index,
        null_count,
        kind,
        hessian_eigenvalues,
    })
}

fn accept(cp: CriticalPoint, opts: &SolveOptions) -> Result<CriticalPoint> {
    let sep = cp.configuration.min_separation();
    if cp.residual <= opts.tol_grad && sep >= opts.min_separation && cp.u_value.is_finite() {
        Ok(cp)
    } else {
        Err(Error::NoConvergence { starts: 1, failures: 1 })
    }
}

/// Ansatzes whose unit-inertia set is a finite set of points.
fn rigid_points(ans: &SymmetricAnsatz, opts: &SolveOptions) -> Result<Vec<CriticalPoint>> {
    match ans.effective_dim() {
        0 => Err(Error::ZeroInertia),
        1 => {
            let y = DVector::from_element(1, 1.0 / ans.q()[(0, 0)].sqrt());
            let mut out = Vec::new();
            for s in [y.clone(), -y] {
                if admissible(ans, &s, opts) {
                    if let Ok(cp) = classify(ans, &s, opts).and_then(|c| accept(c, opts)) {
                        out.push(cp);
                    }
                }
            }
            if out.is_empty() {
                Err(Error::NoConvergence { starts: 1, failures: 1 })
            } else {
                Ok(out)
            }
        }
        _ => unreachable!("rigid_points called on a non-rigid ansatz"),
    }
}

fn start_point(ans: &SymmetricAnsatz, opts: &SolveOptions, start: usize) -> Result<DVector<f64>> {
    let mut rng = opts.rng_for(start);
    let r = ans.random_point(START_RADIUS, &mut rng)?;
    retract(ans, &ans.to_effective(&r)).ok_or(Error::ZeroInertia)
}

fn cmp_points(a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    let tie = 1e-9 * a.u_value.abs().max(b.u_value.abs());
    if (a.u_value - b.u_value).abs() > tie {
        return a.u_value.total_cmp(&b.u_value);
    }
    nbody::fingerprint_cmp(&nbody::fingerprint(&a.configuration), &nbody::fingerprint(&b.configuration))
        .then(a.configuration.to_flat().as_slice().partial_cmp(b.configuration.to_flat().as_slice()).unwrap_or(Ordering::Equal))
}

/// Minimize the reduced potential on `I = 1` from many random starts.
pub fn minimize(ans: &SymmetricAnsatz, opts: &SolveOptions) -> Result<CriticalPoint> {
    opts.validate()?;
    if ans.effective_dim() <= 1 {
        let mut pts = rigid_points(ans, opts)?;
        pts.sort_by(cmp_points);
        return Ok(pts.remove(0));
    }
    let results: Vec<Result<CriticalPoint>> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            let y0 = start_point(ans, opts, s)?;
            let y = descend(ans, &y0, opts)?;
            let y = polish(ans, &y, opts, 100)?;
            accept(classify(ans, &y, opts)?, opts)
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_err()).count();
    let mut minima: Vec<CriticalPoint> = results
        .into_iter()
        .filter_map(|r| r.ok())
        .filter(|c| c.morse_index == 0)
        .collect();
    if minima.is_empty() {
        return Err(Error::NoConvergence { starts: opts.starts, failures });
    }
    minima.sort_by(cmp_points);
    Ok(minima.remove(0))
}

/// Polish from a given reduced point (no descent).
pub fn refine(ans: &SymmetricAnsatz, r: &ReducedPoint, opts: &SolveOptions) -> Result<CriticalPoint> {
    if ans.effective_dim() <= 1 {
        let y = ans.to_effective(r);
        let mut pts = rigid_points(ans, opts)?;
        pts.sort_by(|a, b| {
            let da = (ans.to_effective(&a.reduced) - &y).norm();
            let db = (ans.to_effective(&b.reduced) - &y).norm();
            da.total_cmp(&db)
        });
        return Ok(pts.remove(0));
    }
    let y = polish(ans, &ans.to_effective(r), opts, 100)?;
    accept(classify(ans, &y, opts)?, opts)
}

fn dedup(points: &[CriticalPoint], same: impl Fn(&CriticalPoint, &CriticalPoint) -> bool) -> Vec<CriticalPoint> {
    let mut out: Vec<CriticalPoint> = Vec::new();
    for p in points {
        if !out.iter().any(|q| same(p, q)) {
            out.push(p.clone());
        }
    }
    out
}

/// Newton census of critical points from random stratum starts.
pub fn find_critical_points(ans: &SymmetricAnsatz, opts: &SolveOptions) -> Result<Census> {
    opts.validate()?;
    let (mut found, starts_used, failures) = if ans.effective_dim() <= 1 {
        let pts = rigid_points(ans, opts)?;
        (pts, 1, 0)
    } else {
        let results: Vec<Result<CriticalPoint>> = (0..opts.starts)
            .into_par_iter()
            .map(|s| {
                let y0 = start_point(ans, opts, s)?;
                let y = polish(ans, &y0, opts, 200)?;
                accept(classify(ans, &y, opts)?, opts)
            })
            .collect();
        let failures = results.iter().filter(|r| r.is_err()).count();
        (results.into_iter().filter_map(|r| r.ok()).collect(), opts.starts, failures)
    };
    let converged_count = found.len();
    found.sort_by(cmp_points);
    let distinct = dedup(&found, |a, b| {
        nbody::set_distance(&a.configuration, &b.configuration).map_or(false, |d| d <= 1e-6)
    });
    let congruence_classes = dedup(&distinct, |a, b| {
        nbody::config_distance(&a.configuration, &b.configuration).map_or(false, |d| d <= 1e-6)
    });
    Ok(Census { distinct, congruence_classes, starts_used, converged_count, failures })
}

/// Continuation in one slot's mass: secant predictor, Newton corrector.
pub fn mass_scan(ans: &SymmetricAnsatz, slot: usize, masses: &[f64], opts: &SolveOptions) -> Result<Vec<ScanStep>> {
    opts.validate()?;
    if slot >= ans.slots().len() {
        return Err(Error::InvalidAnsatz(format!("no slot {slot}")));
    }
    let mut out: Vec<ScanStep> = Vec::with_capacity(masses.len());
    for (step, &mass) in masses.iter().enumerate() {
        let a = ans.with_slot_mass(slot, mass)?;
        let point = if step == 0 {
            minimize(&a, opts).map_err(|_| Error::ContinuationLost { step, mass })?
        } else {
            let prev = &out[step - 1];
            let y1 = a.to_effective(&prev.point.reduced);
            let predicted = if step >= 2 && (prev.mass - out[step - 2].mass).abs() > 0.0 {
                let y0 = a.to_effective(&out[step - 2].point.reduced);
                let t = (mass - prev.mass) / (prev.mass - out[step - 2].mass);
                retract(&a, &(&y1 + (&y1 - y0) * t)).filter(|y| admissible(&a, y, opts))
            } else {
                None
            };
            let attempt = |y: &DVector<f64>| refine(&a, &a.from_effective(y), opts);
            predicted
                .and_then(|y| attempt(&y).ok())
                .or_else(|| attempt(&y1).ok())
                .ok_or(Error::ContinuationLost { step, mass })?
        };
        out.push(ScanStep { mass, point });
    }
    Ok(out)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Number of connected components of the configuration space of the ansatz.
///
/// Only one-dimensional strata contribute: slots sharing a ray can be ordered
/// by radius (equal masses indistinguishable). A stratum that is a whole line
/// (no walls) is counted up to reversal, since reversed orderings are related
/// by a rotation of the plane.
pub fn component_census(ans: &SymmetricAnsatz) -> u64 {
    let mut families: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for s in ans.slots() {
        if ans.table().stratum(s.topo.class_id).fixed_dim() == 1 {
            families.entry(s.topo).or_default().push(s.mass);
        }
    }
    let mut total: u128 = 1;
    for (topo, mut masses) in families {
        masses.sort_by(f64::total_cmp);
        let mut counts: Vec<usize> = Vec::new();
        let mut last: Option<f64> = None;
        for m in masses.iter() {
            match last {
                Some(l) if nbody::masses_equal(l, *m) => *counts.last_mut().expect("nonempty") += 1,
                _ => counts.push(1),
            }
            last = Some(*m);
        }
        let n = masses.len();
        let orderings = factorial(n) / counts.iter().map(|&c| factorial(c)).product::<u128>();
        let is_line = ans.table().stratum(topo.class_id).walls.is_empty();
        let factor = if is_line {
            let odd = counts.iter().filter(|&&c| c % 2 == 1).count();
            let palindromes = if odd <= 1 {
                factorial(n / 2) / counts.iter().map(|&c| factorial(c / 2)).product::<u128>()
            } else {
                0
            };
            (orderings + palindromes) / 2
        } else {
            orderings
        };
        total = total.saturating_mul(factor);
    }
    total.min(u64::MAX as u128) as u64
}
