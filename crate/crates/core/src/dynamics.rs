//! Fixed-step RK4 integration and shape-invariance certificates.
//!
//! Bodies move under `m_i x_i'' = grad_i U`, so the potential energy is `-U`
//! and the conserved energy is `E = KE - U`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;
use crate::nbody::{self, Configuration};

/// Integration aborts when two bodies come closer than this.
pub const COLLISION_DISTANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dim: usize,
    pub masses: Vec<f64>,
    pub times: Vec<f64>,
    /// `(positions, velocities)` as flat vectors of length `n * dim`.
    pub states: Vec<(DVector<f64>, DVector<f64>)>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn configuration(&self, k: usize) -> Result<Configuration> {
        Configuration::from_flat(self.dim, &self.states[k].0, self.masses.clone())
    }

    /// `max_k |E_k - E_0| / |E_0|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / scale
    }

    pub fn momentum(&self, k: usize) -> DVector<f64> {
        let v = &self.states[k].1;
        let mut p = DVector::zeros(self.dim);
        for (i, m) in self.masses.iter().enumerate() {
            p += v.rows(i * self.dim, self.dim) * *m;
        }
        p
    }

    /// Largest change of total linear momentum along the trajectory.
    pub fn momentum_drift(&self) -> f64 {
        let p0 = self.momentum(0);
        (0..self.len()).map(|k| (self.momentum(k) - &p0).amax()).fold(0.0, f64::max)
    }
}

struct System<'a> {
    dim: usize,
    masses: &'a [f64],
    exponent: f64,
}

impl System<'_> {
    fn accel(&self, x: &DVector<f64>) -> (DVector<f64>, f64) {
        let d = self.dim;
        let n = self.masses.len();
        let mut acc = DVector::zeros(n * d);
        let mut rmin = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = x.rows(j * d, d) - x.rows(i * d, d);
                let r = diff.norm();
                rmin = rmin.min(r);
                let f = self.exponent / r.powf(self.exponent + 2.0);
                let mut ai = acc.rows_mut(i * d, d);
                ai += &diff * (f * self.masses[j]);
                let mut aj = acc.rows_mut(j * d, d);
                aj -= &diff * (f * self.masses[i]);
            }
        }
        (acc, rmin)
    }

    /// Smallest pair distance along straight segments from `x0` to `x1`.
    fn swept_min_distance(&self, x0: &DVector<f64>, x1: &DVector<f64>) -> f64 {
        let d = self.dim;
        let n = self.masses.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let p = x0.rows(j * d, d) - x0.rows(i * d, d);
                let q = x1.rows(j * d, d) - x1.rows(i * d, d);
                let dq = &q - &p;
                let s = if dq.norm_squared() > 0.0 { (-p.dot(&dq) / dq.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
                best = best.min((&p + &dq * s).norm());
            }
        }
        best
    }

    fn energy(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let d = self.dim;
        let n = self.masses.len();
        let mut ke = 0.0;
        let mut u = 0.0;
        for i in 0..n {
            ke += 0.5 * self.masses[i] * v.rows(i * d, d).norm_squared();
            for j in (i + 1)..n {
                let r = (x.rows(j * d, d) - x.rows(i * d, d)).norm();
                u += self.masses[i] * self.masses[j] / r.powf(self.exponent);
            }
        }
        ke - u
    }
}

/// Fixed-step RK4 from `(C, velocities)` to `t_end`; the last step is shortened to land on `t_end`.
pub fn integrate(
    c: &Configuration,
    velocities: &[DVector<f64>],
    t_end: f64,
    dt: f64,
    exponent: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidConfiguration(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidConfiguration(format!("end time must be non-negative, got {t_end}")));
    }
    if !(exponent > 0.0) {
        return Err(Error::InvalidConfiguration(format!("exponent must be positive, got {exponent}")));
    }
    if velocities.len() != c.len() {
        return Err(Error::SizeMismatch(c.len(), velocities.len()));
    }
    if let Some(v) = velocities.iter().find(|v| v.len() != c.dim()) {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: v.len() });
    }
    let sys = System { dim: c.dim(), masses: c.masses(), exponent };
    let mut x = nbody::flatten(c.points());
    let mut v = nbody::flatten(velocities);
    let (_, rmin) = sys.accel(&x);
    if rmin < COLLISION_DISTANCE {
        return Err(Error::CollisionAbort { time: 0.0 });
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        dim: c.dim(),
        masses: c.masses().to_vec(),
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
    };
    traj.times.push(0.0);
    traj.energy.push(sys.energy(&x, &v));
    traj.states.push((x.clone(), v.clone()));
    let mut t = 0.0;
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        let (a1, r1) = sys.accel(&x);
        let x2 = &x + &v * (0.5 * h);
        let v2 = &v + &a1 * (0.5 * h);
        let (a2, r2) = sys.accel(&x2);
        let x3 = &x + &v2 * (0.5 * h);
        let v3 = &v + &a2 * (0.5 * h);
        let (a3, r3) = sys.accel(&x3);
        let x4 = &x + &v3 * h;
        let v4 = &v + &a3 * h;
        let (a4, r4) = sys.accel(&x4);
        if r1.min(r2).min(r3).min(r4) < COLLISION_DISTANCE {
            return Err(Error::CollisionAbort { time: t });
        }
        let x_next = &x + (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (&a1 + &a2 * 2.0 + &a3 * 2.0 + &a4) * (h / 6.0);
        // catches pairs that pass through each other within one step
        if sys.swept_min_distance(&x, &x_next) < COLLISION_DISTANCE {
            return Err(Error::CollisionAbort { time: t });
        }
        x = x_next;
        t = if k + 1 == steps { t_end } else { (k + 1) as f64 * dt };
        traj.times.push(t);
        traj.energy.push(sys.energy(&x, &v));
        traj.states.push((x.clone(), v.clone()));
    }
    Ok(traj)
}

fn prepared(c: &Configuration) -> Result<Configuration> {
    let centered = nbody::center(c);
    if !(nbody::moment_of_inertia(&centered) > 0.0) {
        return Err(Error::ZeroInertia);
    }
    Ok(centered)
}

/// Release from rest and track the shape, rescaled to `I = 1`; returns the largest `config_distance`.
///
/// The input is centered but integrated at its own scale, which sets the collapse time.
pub fn homothetic_test(c: &Configuration, t_end: f64, dt: f64, exponent: f64) -> Result<f64> {
    homothetic_run(c, t_end, dt, exponent).map(|(dev, _)| dev)
}

/// [`homothetic_test`] together with the trajectory.
pub fn homothetic_run(c: &Configuration, t_end: f64, dt: f64, exponent: f64) -> Result<(f64, Trajectory)> {
    let c0 = prepared(c)?;
    let rest = vec![DVector::zeros(c0.dim()); c0.len()];
    let traj = integrate(&c0, &rest, t_end, dt, exponent)?;
    let shape = c0.normalized()?;
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() {
        let ck = nbody::center(&traj.configuration(k)?).normalized()?;
        worst = worst.max(nbody::config_distance(&ck, &shape)?);
    }
    Ok((worst, traj))
}

/// Unit normal of the plane holding a centered configuration in R^3.
fn plane_normal(c: &Configuration) -> Result<DVector<f64>> {
    let data = nbody::inertia_matrix(c);
    let (vals, vecs) = sorted_symmetric_eigen(&data.s);
    let smallest = vals[vals.len() - 1];
    if smallest > 1e-10 * data.s.trace().max(1.0) {
        return Err(Error::InvalidConfiguration("configuration is not planar".into()));
    }
    Ok(vecs.column(vals.len() - 1).into_owned())
}

/// Angular velocity `sqrt(a U / I)` of the rigid rotation of a central configuration.
pub fn rotation_rate(c: &Configuration, exponent: f64) -> Result<f64> {
    Ok((exponent * nbody::potential(c, exponent)? / nbody::moment_of_inertia(c)).sqrt())
}

/// Spin the configuration rigidly at `omega_scale` times the central rate and track its
/// shape up to rotation; returns the largest `config_distance` to the initial shape.
pub fn rotation_test(c: &Configuration, t_end: f64, dt: f64, exponent: f64, omega_scale: f64) -> Result<f64> {
    rotation_run(c, t_end, dt, exponent, omega_scale).map(|(dev, _)| dev)
}

/// [`rotation_test`] together with the trajectory.
pub fn rotation_run(
    c: &Configuration,
    t_end: f64,
    dt: f64,
    exponent: f64,
    omega_scale: f64,
) -> Result<(f64, Trajectory)> {
    let c0 = prepared(c)?;
    let omega = rotation_rate(&c0, exponent)? * omega_scale;
    let quarter_turn: Box<dyn Fn(&DVector<f64>) -> DVector<f64>> = match c0.dim() {
        2 => Box::new(|x: &DVector<f64>| DVector::from_vec(vec![-x[1], x[0]])),
        3 => {
            let n = plane_normal(&c0)?;
            let n3 = nalgebra::Vector3::new(n[0], n[1], n[2]);
            Box::new(move |x: &DVector<f64>| {
                let w = n3.cross(&nalgebra::Vector3::new(x[0], x[1], x[2]));
                DVector::from_vec(vec![w[0], w[1], w[2]])
            })
        }
        d => {
            return Err(Error::InvalidConfiguration(format!("rotation test needs dimension 2 or 3, got {d}")));
        }
    };
    let velocities: Vec<DVector<f64>> = c0.points().iter().map(|x| quarter_turn(x) * omega).collect();
    let traj = integrate(&c0, &velocities, t_end, dt, exponent)?;
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() {
        worst = worst.max(nbody::config_distance(&traj.configuration(k)?, &c0)?);
    }
    Ok((worst, traj))
}

/// `t, x_1..x_n, v_1..v_n, E` per row, coordinates spelled out per axis.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.masses.len();
    let axes = ["x", "y", "z"];
    let axis = |k: usize| axes.get(k).map(|s| s.to_string()).unwrap_or_else(|| format!("c{k}"));
    let mut header = vec!["t".to_string()];
    for prefix in ["x", "v"] {
        for i in 0..n {
            for k in 0..traj.dim {
                header.push(format!("{prefix}{}_{}", i + 1, axis(k)));
            }
        }
    }
    header.push("E".into());
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..traj.len() {
        let (x, v) = &traj.states[k];
        let mut row = vec![crate::io::fmt_f64(traj.times[k])];
        row.extend(x.iter().chain(v.iter()).map(|z| crate::io::fmt_f64(*z)));
        row.push(crate::io::fmt_f64(traj.energy[k]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
