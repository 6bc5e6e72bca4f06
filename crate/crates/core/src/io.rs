//! File formats: JSON documents for groups, configurations, ansätze and results,
//! plus CSV point tables. Floats are written with 17 significant digits so
//! output is exact and byte-stable.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::balanced::BalancedResult;
use crate::burnside::BurnsideType;
use crate::catalog::{catalog_group, parse_group};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, OrthogonalMatrix};
use crate::nbody::{self, Configuration, InertiaData};
use crate::reduction::{Slot, SymmetricAnsatz};
use crate::solver::{Census, CriticalPoint};
use crate::strata::StrataTable;

/// `x` with 17 significant digits in exponent form; `NaN`/`inf` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Pretty printer that writes every float with [`fmt_f64`].
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with exact floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn points_of(c: &Configuration) -> Vec<Vec<f64>> {
    c.points().iter().map(|p| p.iter().copied().collect()).collect()
}

// ---- groups ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub name: String,
    pub dim: usize,
    pub order: usize,
    /// Row-major entries of each element.
    pub elements: Vec<Vec<f64>>,
    pub generators: Vec<usize>,
}

impl GroupJson {
    pub fn from_group(g: &FiniteGroup) -> Self {
        Self {
            name: g.name().to_string(),
            dim: g.dim(),
            order: g.order(),
            elements: g.elements().iter().map(|e| rows_of(e.matrix()).concat()).collect(),
            generators: g.generators().to_vec(),
        }
    }

    pub fn to_group(&self) -> Result<FiniteGroup> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                if e.len() != self.dim * self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim * self.dim, found: e.len() });
                }
                OrthogonalMatrix::from_row_slice(self.dim, e)
            })
            .collect::<Result<Vec<_>>>()?;
        if elements.len() != self.order {
            return Err(Error::Parse(format!("order {} but {} elements", self.order, elements.len())));
        }
        FiniteGroup::from_elements(&self.name, elements, self.generators.clone())
    }
}

/// A group given by compact name (`"D_3"`), by family and parameter, or explicitly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Name(String),
    Family { family: String, k: Option<usize> },
    Explicit(GroupJson),
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Name(n) => parse_group(n),
            GroupSpec::Family { family, k } => catalog_group(family, *k),
            GroupSpec::Explicit(g) => g.to_group(),
        }
    }
}

// ---- configurations ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BodyJson {
    pub x: Vec<f64>,
    pub m: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigJson {
    pub dim: usize,
    pub bodies: Vec<BodyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ConfigJson {
    pub fn from_configuration(c: &Configuration) -> Self {
        Self {
            dim: c.dim(),
            bodies: c
                .points()
                .iter()
                .zip(c.masses())
                .map(|(p, m)| BodyJson { x: p.iter().copied().collect(), m: *m })
                .collect(),
            labels: None,
        }
    }
}

/// Accepted configuration inputs: `{dim, bodies}` or any document with `points` and `masses`
/// (which includes solver output).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ConfigInput {
    Bodies(ConfigJson),
    Points { points: Vec<Vec<f64>>, masses: Vec<f64> },
}

pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let input: ConfigInput = serde_json::from_str(text).map_err(|_| {
        Error::Parse("expected {dim, bodies: [{x, m}]} or {points, masses}".into())
    })?;
    match input {
        ConfigInput::Bodies(cj) => {
            if let Some(labels) = &cj.labels {
                if labels.len() != cj.bodies.len() {
                    return Err(Error::SizeMismatch(cj.bodies.len(), labels.len()));
                }
            }
            let rows: Vec<Vec<f64>> = cj.bodies.iter().map(|b| b.x.clone()).collect();
            let masses = cj.bodies.iter().map(|b| b.m).collect();
            Configuration::from_rows(cj.dim, &rows, masses)
        }
        ConfigInput::Points { points, masses } => {
            let dim = points.first().map_or(0, |p| p.len());
            Configuration::from_rows(dim, &points, masses)
        }
    }
}

pub fn configuration_json(c: &Configuration) -> String {
    to_json(&ConfigJson::from_configuration(c))
}

/// `body,x,y[,z],m` table.
pub fn points_csv(c: &Configuration) -> String {
    let axes = ["x", "y", "z"];
    let mut header = vec!["body".to_string()];
    header.extend((0..c.dim()).map(|k| axes.get(k).map_or(format!("c{k}"), |s| s.to_string())));
    header.push("m".into());
    let mut out = header.join(",") + "\n";
    for (i, (p, m)) in c.points().iter().zip(c.masses()).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(*m));
        out += &(row.join(",") + "\n");
    }
    out
}

// ---- ansätze ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassSpec {
    /// One mass for the whole orbit.
    Uniform(f64),
    /// One mass per body of the orbit; must be constant.
    PerBody(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlotJson {
    #[serde(rename = "type")]
    pub topo: String,
    #[serde(default = "unit_mass")]
    pub mass: MassSpec,
}

fn unit_mass() -> MassSpec {
    MassSpec::Uniform(1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnsatzJson {
    pub group: GroupSpec,
    /// Explicit slot list; alternatively `burnside` with a uniform `mass`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<Vec<SlotJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burnside: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Target spectrum for balanced solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

impl AnsatzJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(parse_err)
    }

    /// Build the ansatz; `exponent` overrides the file's value when given.
    pub fn build(&self, exponent: Option<f64>) -> Result<SymmetricAnsatz> {
        let group = Arc::new(self.group.build()?);
        let table = Arc::new(StrataTable::new(group));
        let exponent = exponent.or(self.exponent).unwrap_or(1.0);
        match (&self.slots, &self.burnside) {
            (Some(_), Some(_)) => Err(Error::InvalidAnsatz("give either `slots` or `burnside`, not both".into())),
            (None, None) => Err(Error::InvalidAnsatz("missing `slots` or `burnside`".into())),
            (None, Some(text)) => {
                let b = BurnsideType::parse(text, &table)?;
                SymmetricAnsatz::from_burnside(table, &b, self.mass.unwrap_or(1.0), exponent)
            }
            (Some(slots), None) => {
                let mut out = Vec::with_capacity(slots.len());
                for (k, s) in slots.iter().enumerate() {
                    let topo = table.parse_topo(&s.topo)?;
                    let size = table.stratum(topo.class_id).orbit_type.orbit_size;
                    let mass = match &s.mass {
                        MassSpec::Uniform(m) => *m,
                        MassSpec::PerBody(ms) => {
                            if ms.len() != size {
                                return Err(Error::InvalidAnsatz(format!(
                                    "slot {k}: orbit has {size} bodies but {} masses were given",
                                    ms.len()
                                )));
                            }
                            let m0 = ms[0];
                            if ms.iter().any(|m| (m - m0).abs() > 1e-9 * m0.abs().max(1.0)) {
                                return Err(Error::InvalidAnsatz(format!(
                                    "slot {k}: masses must be equal on an orbit"
                                )));
                            }
                            m0
                        }
                    };
                    out.push(Slot { topo, mass });
                }
                SymmetricAnsatz::new(table, out, exponent)
            }
        }
    }
}

// ---- results ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPointJson {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    #[serde(rename = "U")]
    pub u: f64,
    pub lambda: f64,
    pub residual: f64,
    pub reduced_residual: f64,
    pub morse_index: usize,
    pub null_count: usize,
    pub kind: String,
    pub min_separation: f64,
    pub reduced: Vec<f64>,
    pub hessian_eigenvalues: Vec<f64>,
}

impl CriticalPointJson {
    pub fn from_point(cp: &CriticalPoint) -> Self {
        let c = &cp.configuration;
        Self {
            dim: c.dim(),
            points: points_of(c),
            masses: c.masses().to_vec(),
            u: cp.u_value,
            lambda: cp.lambda,
            residual: cp.residual,
            reduced_residual: cp.reduced_residual,
            morse_index: cp.morse_index,
            null_count: cp.null_count,
            kind: cp.kind.as_str().to_string(),
            min_separation: c.min_separation(),
            reduced: cp.reduced.coords.iter().copied().collect(),
            hessian_eigenvalues: cp.hessian_eigenvalues.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnsatzSummary {
    pub group: String,
    pub burnside: String,
    pub bodies: usize,
    pub exponent: f64,
}

impl AnsatzSummary {
    pub fn of(ans: &SymmetricAnsatz) -> Self {
        Self {
            group: ans.group().name().to_string(),
            burnside: ans.burnside_type().format(ans.table()),
            bodies: ans.n_bodies(),
            exponent: ans.exponent(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusJson {
    pub ansatz: AnsatzSummary,
    pub starts_used: usize,
    pub converged: usize,
    pub failures: usize,
    pub solutions: Vec<CriticalPointJson>,
    pub congruence_classes: Vec<CriticalPointJson>,
}

impl CensusJson {
    pub fn from_census(ans: &SymmetricAnsatz, c: &Census) -> Self {
        Self {
            ansatz: AnsatzSummary::of(ans),
            starts_used: c.starts_used,
            converged: c.converged_count,
            failures: c.failures,
            solutions: c.distinct.iter().map(CriticalPointJson::from_point).collect(),
            congruence_classes: c.congruence_classes.iter().map(CriticalPointJson::from_point).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalancedJson {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub residual: f64,
    pub spectrum_error: Option<f64>,
    pub spectrum: Vec<f64>,
    pub is_central: bool,
    pub degenerate_geometry: bool,
    pub commutator: f64,
}

impl BalancedJson {
    pub fn from_result(r: &BalancedResult) -> Self {
        let c = &r.configuration;
        Self {
            dim: c.dim(),
            points: points_of(c),
            masses: c.masses().to_vec(),
            u: r.u_value,
            b: rows_of(&r.b),
            residual: r.residual,
            spectrum_error: r.spectrum_error,
            spectrum: nbody::inertia_matrix(c).spectrum,
            is_central: r.is_central,
            degenerate_geometry: r.degenerate_geometry,
            commutator: r.commutator,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InertiaJson {
    #[serde(rename = "I")]
    pub inertia: f64,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub spectrum: Vec<f64>,
    /// Distinct eigenvalues with their multiplicities.
    pub multiplicities: Vec<(f64, usize)>,
    /// Unit eigenvectors, one per spectrum entry.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl InertiaJson {
    pub fn from_data(d: &InertiaData) -> Self {
        Self {
            inertia: d.s.trace(),
            s: rows_of(&d.s),
            spectrum: d.spectrum.clone(),
            multiplicities: d.multiplicities.clone(),
            eigenvectors: d.eigenvectors.column_iter().map(|c| c.iter().copied().collect()).collect(),
        }
    }
}
