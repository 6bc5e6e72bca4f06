//! Fixed generator matrices for the standard planar and spatial point groups.
//!
//! Conventions:
//! - `C_k`: rotation by 2π/k in the plane.
//! - `D_k`: rotation by 2π/k plus the reflection `kappa` in the x-axis.
//! - `C_2h`: `tau(x,y,z) = (x,y,-z)` and `rho` = rotation by π about the z-axis.
//! - `D_nh`: planar `D_n` acting on (x, y) and fixing z, plus `tau`.
//! - `D_2rot`: the identity and the π-rotations about the three coordinate axes.
//! - `T_d`: permutation matrices times even sign changes; stabilizes the
//!   tetrahedron with vertices (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1).
//! - `O_h`: all signed permutation matrices.
//! - `I_h`: generated by the cyclic coordinate permutation, the golden-ratio
//!   five-fold rotation below and `-Id`; stabilizes the icosahedron with
//!   vertices (0, ±1, ±φ) and cyclic permutations.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, OrthogonalMatrix};

const MAX_ORDER: usize = 1024;

/// Names accepted by [`catalog_group`], for listings.
pub const CATALOG_NAMES: &[&str] = &["C_k", "D_k", "C_2h", "D_nh", "D_2rot", "T_d", "O_h", "I_h"];

/// Build a catalog group from a family name and optional parameter.
pub fn catalog_group(name: &str, param: Option<usize>) -> Result<FiniteGroup> {
    let need = |p: Option<usize>| -> Result<usize> {
        match p {
            Some(k) if k >= 1 => Ok(k),
            Some(k) => Err(Error::BadParameter(format!("{name} needs k >= 1, got {k}"))),
            None => Err(Error::BadParameter(format!("{name} needs a parameter"))),
        }
    };
    match name {
        "C" | "C_k" => cyclic(need(param)?),
        "D" | "D_k" => dihedral(need(param)?),
        "C_2h" | "C2h" => c2h(),
        "D_nh" | "Dnh" => dnh(need(param)?),
        "D_2rot" | "D2rot" => d2rot(),
        "T_d" | "Td" => tetrahedral(),
        "O_h" | "Oh" => octahedral(),
        "I_h" | "Ih" => icosahedral(),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// Parse a compact group name: `C_3`, `D4`, `D_3h`, `C_2h`, `D_2rot`, `T_d`, `O_h`, `I_h`.
pub fn parse_group(spec: &str) -> Result<FiniteGroup> {
    let s = spec.trim();
    match s {
        "C_2h" | "C2h" => return c2h(),
        "D_2rot" | "D2rot" => return d2rot(),
        "T_d" | "Td" => return tetrahedral(),
        "O_h" | "Oh" => return octahedral(),
        "I_h" | "Ih" => return icosahedral(),
        _ => {}
    }
    let (family, rest) = s.split_at(s.chars().next().map(|c| c.len_utf8()).unwrap_or(0));
    let rest = rest.trim_start_matches('_');
    let (digits, tail) = rest.split_at(rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len()));
    if digits.is_empty() {
        return Err(Error::UnknownName(spec.to_string()));
    }
    let k: usize = digits.parse().map_err(|_| Error::BadParameter(spec.to_string()))?;
    match (family, tail) {
        ("C", "") => catalog_group("C", Some(k)),
        ("D", "") => catalog_group("D", Some(k)),
        ("D", "h") => catalog_group("D_nh", Some(k)),
        _ => Err(Error::UnknownName(spec.to_string())),
    }
}

fn m3(rows: [[f64; 3]; 3]) -> OrthogonalMatrix {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    OrthogonalMatrix::from_row_slice(3, &flat).expect("catalog matrix is orthogonal")
}

fn diag(entries: &[f64]) -> OrthogonalMatrix {
    OrthogonalMatrix::diagonal(entries).expect("catalog matrix is orthogonal")
}

fn rot_z(angle: f64) -> OrthogonalMatrix {
    let (s, c) = angle.sin_cos();
    m3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

fn cyclic(k: usize) -> Result<FiniteGroup> {
    let gen = if k == 1 { OrthogonalMatrix::identity(2) } else { OrthogonalMatrix::rotation2(2.0 * PI / k as f64) };
    FiniteGroup::generate(&format!("C_{k}"), &[gen], MAX_ORDER)
}

fn dihedral(k: usize) -> Result<FiniteGroup> {
    let kappa = diag(&[1.0, -1.0]);
    let mut gens = Vec::new();
    if k > 1 {
        gens.push(OrthogonalMatrix::rotation2(2.0 * PI / k as f64));
    }
    gens.push(kappa.clone());
    let mut g = FiniteGroup::generate(&format!("D_{k}"), &gens, MAX_ORDER)?;
    g.name_element("kappa", &kappa);
    if k % 2 == 0 {
        let kappa2 = OrthogonalMatrix::rotation2(2.0 * PI / k as f64).compose(&kappa);
        g.name_element("kappa2", &kappa2);
    }
    Ok(g)
}

fn c2h() -> Result<FiniteGroup> {
    let tau = diag(&[1.0, 1.0, -1.0]);
    let rho = diag(&[-1.0, -1.0, 1.0]);
    let mut g = FiniteGroup::generate("C_2h", &[tau.clone(), rho.clone()], MAX_ORDER)?;
    g.name_element("tau", &tau);
    g.name_element("rho", &rho);
    Ok(g)
}

fn dnh(n: usize) -> Result<FiniteGroup> {
    let tau = diag(&[1.0, 1.0, -1.0]);
    let kappa = diag(&[1.0, -1.0, 1.0]);
    let mut gens = vec![tau.clone(), kappa.clone()];
    if n > 1 {
        gens.insert(0, rot_z(2.0 * PI / n as f64));
    }
    let mut g = FiniteGroup::generate(&format!("D_{n}h"), &gens, MAX_ORDER)?;
    g.name_element("tau", &tau);
    g.name_element("kappa", &kappa);
    if n % 2 == 0 {
        g.name_element("kappa2", &rot_z(2.0 * PI / n as f64).compose(&kappa));
    }
    Ok(g)
}

fn d2rot() -> Result<FiniteGroup> {
    let rx = diag(&[1.0, -1.0, -1.0]);
    let ry = diag(&[-1.0, 1.0, -1.0]);
    let rz = diag(&[-1.0, -1.0, 1.0]);
    let mut g = FiniteGroup::generate("D_2rot", &[rx.clone(), ry.clone()], MAX_ORDER)?;
    g.name_element("Rx", &rx);
    g.name_element("Ry", &ry);
    g.name_element("Rz", &rz);
    Ok(g)
}

fn cyclic_perm() -> OrthogonalMatrix {
    m3([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
}

fn tetrahedral() -> Result<FiniteGroup> {
    let swap_xy = m3([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    FiniteGroup::generate("T_d", &[cyclic_perm(), diag(&[-1.0, -1.0, 1.0]), swap_xy], MAX_ORDER)
}

fn octahedral() -> Result<FiniteGroup> {
    let swap_xy = m3([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    FiniteGroup::generate("O_h", &[cyclic_perm(), swap_xy, diag(&[-1.0, 1.0, 1.0])], MAX_ORDER)
}

fn icosahedral() -> Result<FiniteGroup> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let ip = 1.0 / phi;
    let five = m3([[0.5, -0.5 * phi, 0.5 * ip], [0.5 * phi, 0.5 * ip, -0.5], [0.5 * ip, 0.5, 0.5 * phi]]);
    FiniteGroup::generate("I_h", &[cyclic_perm(), five, diag(&[-1.0, -1.0, -1.0])], MAX_ORDER)
}
