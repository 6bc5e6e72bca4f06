//! `symcc`: catalogs, orbit tables, solvers and certificates for symmetric central configurations.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 invalid input.
//! Errors are reported on stderr as one JSON object.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use symcc::balanced::{balanced_residual, solve_balanced, SpectrumTarget};
use symcc::catalog::{catalog_group, parse_group};
use symcc::dynamics::{homothetic_run, rotation_run, trajectory_csv};
use symcc::io::{
    fmt_f64, parse_configuration, points_csv, to_json, AnsatzJson, AnsatzSummary, BalancedJson, CensusJson,
    CriticalPointJson, GroupJson, InertiaJson,
};
use symcc::nbody::{self, Configuration};
use symcc::reduction::{check_symmetric, SymmetricAnsatz};
use symcc::solver::{component_census, find_critical_points, mass_scan, minimize, SolveOptions};
use symcc::{Error, StrataTable};

#[derive(Parser, Debug)]
#[command(name = "symcc", version, about = "Symmetric central and balanced configurations of the n-body problem")]
struct Cli {
    /// Potential exponent a in U = sum m_i m_j / r_ij^a (overrides ansatz files)
    #[arg(long, global = true)]
    exponent: Option<f64>,

    /// Base seed for multi-start solves
    #[arg(long, global = true, env = "SYMCC_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Catalog groups
    Groups {
        #[command(subcommand)]
        action: GroupsAction,
    },
    /// Orbit-type table of a group: classes, orbit sizes, fixed dimensions, components
    Orbits {
        /// Group name, e.g. D_3, D_4h, T_d
        #[arg(long)]
        group: String,
        /// Emit JSON instead of a text table
        #[arg(long)]
        json: bool,
    },
    /// Minimize U at I = 1 over a symmetric ansatz
    Solve {
        #[command(flatten)]
        solve: SolveArgs,
        /// Also write the point table to this CSV file
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// All critical points found from multiple starts
    Census {
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Check a configuration: central residual, balanced residual, symmetry, Burnside type
    Verify {
        /// Configuration JSON ({dim, bodies} or {points, masses})
        #[arg(long)]
        config: PathBuf,
        /// Group to check symmetry against and classify orbits with
        #[arg(long)]
        group: Option<String>,
    },
    /// Critical point of U at a fixed inertia spectrum
    Balanced {
        #[command(flatten)]
        solve: SolveArgs,
        /// Target spectrum, comma separated (defaults to the ansatz file's `sigma`)
        #[arg(long, value_delimiter = ',')]
        sigma: Option<Vec<f64>>,
    },
    /// Inertia matrix, spectrum and multiplicities of a configuration
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate from a configuration and report the shape deviation
    Dynamics {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// End time
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        /// RK4 step
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        /// Factor applied to the central angular velocity (rotation mode)
        #[arg(long, default_value_t = 1.0)]
        omega_scale: f64,
        /// Also write the trajectory to this CSV file
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Continue a solution while varying one slot's mass; CSV to stdout
    Scan {
        #[command(flatten)]
        solve: SolveArgs,
        /// Slot index (0-based, in ansatz order)
        #[arg(long)]
        slot: usize,
        /// Mass range start:end:count (inclusive, evenly spaced)
        #[arg(long)]
        mass: String,
    },
    /// Number of connected components of the ansatz's configuration space
    Components {
        #[arg(long)]
        ansatz: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum GroupsAction {
    /// List catalog families
    List,
    /// Show one group: order, generators, named elements, matrices
    Show {
        /// Group name, e.g. D_4 or O_h
        name: String,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    /// Release from rest; the shape must be preserved up to scale
    Homothetic,
    /// Rigid rotation at the central rate; the shape must be preserved up to rotation
    Rotation,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Ansatz JSON ({group, slots | burnside, exponent?})
    #[arg(long)]
    ansatz: PathBuf,
    /// Number of random starts
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Acceptance tolerance on the central residual
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap per start
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    /// Smallest admissible pair distance
    #[arg(long, default_value_t = 1e-6)]
    min_separation: f64,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::NoConvergence { .. } => ("NoConvergence", 2),
        Error::ContinuationLost { .. } => ("ContinuationLost", 2),
        Error::InfeasibleSpectrum { .. } => ("InfeasibleSpectrum", 2),
        Error::CollisionAbort { .. } => ("CollisionAbort", 2),
        Error::CollisionSingularity { .. } => ("CollisionSingularity", 2),
        Error::ZeroInertia => ("ZeroInertia", 2),
        Error::ClosureOverflow { .. } => ("ClosureOverflow", 3),
        Error::NotOrthogonal { .. } => ("NotOrthogonal", 3),
        Error::DimensionMismatch { .. } => ("DimensionMismatch", 3),
        Error::UnknownName(_) => ("UnknownName", 3),
        Error::BadParameter(_) => ("BadParameter", 3),
        Error::NotSubgroup(_) => ("NotSubgroup", 3),
        Error::NotIsotropy => ("NotIsotropy", 3),
        Error::EmptyStratum => ("EmptyStratum", 3),
        Error::NotSymmetric { .. } => ("NotSymmetric", 3),
        Error::SizeMismatch(..) => ("SizeMismatch", 3),
        Error::InvalidConfiguration(_) => ("InvalidConfiguration", 3),
        Error::InvalidAnsatz(_) => ("InvalidAnsatz", 3),
        Error::OrbitCollision { .. } => ("OrbitCollision", 3),
        Error::StratumViolation { .. } => ("StratumViolation", 3),
        Error::Parse(_) => ("Parse", 3),
    }
}

#[derive(Serialize)]
struct ErrorJson {
    error: String,
    message: String,
    exit_code: u8,
}

fn report(f: Failure) -> ExitCode {
    let (error, message, code) = match f {
        Failure::Usage(m) => ("Usage".to_string(), m, 1),
        Failure::Lib(e) => {
            let (kind, code) = error_kind(&e);
            (kind.to_string(), e.to_string(), code)
        }
        Failure::Io(p, e) => ("Io".to_string(), format!("{}: {e}", p.display()), 3),
    };
    let json = serde_json::to_string(&ErrorJson { error, message, exit_code: code }).expect("plain struct");
    eprintln!("{json}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report(Failure::Usage(e.render().to_string()));
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => report(f),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_config(path: &Path) -> Result<Configuration, Failure> {
    Ok(parse_configuration(&read(path)?)?)
}

fn load_ansatz(path: &Path, exponent: Option<f64>) -> Result<(AnsatzJson, SymmetricAnsatz), Failure> {
    let json = AnsatzJson::parse(&read(path)?)?;
    let ans = json.build(exponent)?;
    Ok((json, ans))
}

fn options(a: &SolveArgs, seed: u64) -> Result<SolveOptions, Failure> {
    let opts = SolveOptions {
        tol_grad: a.tol,
        max_iters: a.max_iters,
        starts: a.starts,
        seed,
        min_separation: a.min_separation,
        ..SolveOptions::default()
    };
    opts.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(opts)
}

fn check_exponent(exponent: Option<f64>) -> Result<(), Failure> {
    match exponent {
        Some(a) if !(a > 0.0 && a.is_finite()) => Err(Failure::Usage(format!("--exponent must be positive, got {a}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    check_exponent(cli.exponent)?;
    let exponent = cli.exponent;
    match cli.command {
        Command::Groups { action: GroupsAction::List } => Ok(groups_list()),
        Command::Groups { action: GroupsAction::Show { name } } => groups_show(&name),
        Command::Orbits { group, json } => orbits(&group, json),
        Command::Solve { solve, csv } => {
            let (_, ans) = load_ansatz(&solve.ansatz, exponent)?;
            let opts = options(&solve, cli.seed)?;
            let cp = minimize(&ans, &opts)?;
            if let Some(path) = csv {
                write(&path, &points_csv(&cp.configuration))?;
            }
            Ok(to_json(&CriticalPointJson::from_point(&cp)))
        }
        Command::Census { solve } => {
            let (_, ans) = load_ansatz(&solve.ansatz, exponent)?;
            let opts = options(&solve, cli.seed)?;
            let census = find_critical_points(&ans, &opts)?;
            Ok(to_json(&CensusJson::from_census(&ans, &census)))
        }
        Command::Verify { config, group } => verify(&load_config(&config)?, group.as_deref(), exponent.unwrap_or(1.0)),
        Command::Balanced { solve, sigma } => {
            let (json, ans) = load_ansatz(&solve.ansatz, exponent)?;
            let opts = options(&solve, cli.seed)?;
            let sigma = sigma
                .or(json.sigma)
                .ok_or_else(|| Failure::Usage("a target spectrum is required (--sigma or `sigma` in the ansatz)".into()))?;
            let target = SpectrumTarget::new(sigma)?;
            let r = solve_balanced(&ans, &target, &opts)?;
            Ok(to_json(&BalancedJson::from_result(&r)))
        }
        Command::Spectrum { config } => {
            let c = load_config(&config)?;
            Ok(to_json(&InertiaJson::from_data(&nbody::inertia_matrix(&c))))
        }
        Command::Dynamics { config, mode, t_end, dt, omega_scale, csv } => {
            let c = load_config(&config)?;
            let a = exponent.unwrap_or(1.0);
            let (deviation, traj) = match mode {
                Mode::Homothetic => homothetic_run(&c, t_end, dt, a)?,
                Mode::Rotation => rotation_run(&c, t_end, dt, a, omega_scale)?,
            };
            if let Some(path) = csv {
                write(&path, &trajectory_csv(&traj))?;
            }
            Ok(to_json(&DynamicsJson {
                mode: match mode {
                    Mode::Homothetic => "homothetic",
                    Mode::Rotation => "rotation",
                },
                t_end,
                dt,
                exponent: a,
                omega_scale,
                steps: traj.len() - 1,
                deviation,
                energy_drift: traj.energy_drift(),
                momentum_drift: traj.momentum_drift(),
            }))
        }
        Command::Scan { solve, slot, mass } => {
            let (_, ans) = load_ansatz(&solve.ansatz, exponent)?;
            let opts = options(&solve, cli.seed)?;
            let masses = parse_range(&mass)?;
            if slot >= ans.slots().len() {
                return Err(Failure::Usage(format!("--slot {slot} but the ansatz has {} slots", ans.slots().len())));
            }
            let steps = mass_scan(&ans, slot, &masses, &opts)?;
            let k = ans.reduced_dim();
            let mut out = String::from("mass,U,lambda,residual,morse_index");
            for j in 0..k {
                out += &format!(",r{}", j + 1);
            }
            out.push('\n');
            for s in &steps {
                let p = &s.point;
                let mut row = vec![
                    fmt_f64(s.mass),
                    fmt_f64(p.u_value),
                    fmt_f64(p.lambda),
                    fmt_f64(p.residual),
                    p.morse_index.to_string(),
                ];
                row.extend(p.reduced.coords.iter().map(|v| fmt_f64(*v)));
                out += &(row.join(",") + "\n");
            }
            Ok(out)
        }
        Command::Components { ansatz } => {
            let (_, ans) = load_ansatz(&ansatz, exponent)?;
            Ok(to_json(&ComponentsJson { ansatz: AnsatzSummary::of(&ans), components: component_census(&ans) }))
        }
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--mass expects start:end:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(a > 0.0) || !(b > 0.0) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

#[derive(Serialize)]
struct DynamicsJson {
    mode: &'static str,
    t_end: f64,
    dt: f64,
    exponent: f64,
    omega_scale: f64,
    steps: usize,
    deviation: f64,
    energy_drift: f64,
    momentum_drift: f64,
}

#[derive(Serialize)]
struct ComponentsJson {
    ansatz: AnsatzSummary,
    components: u64,
}

fn groups_list() -> String {
    let rows = [
        ("C_k", "2", "k", "rotations of the plane by multiples of 2pi/k"),
        ("D_k", "2", "2k", "C_k plus the reflection in the x-axis (D_1: that reflection alone)"),
        ("C_2h", "3", "4", "half-turn about z and reflection in the xy-plane"),
        ("D_kh", "3", "4k", "D_k acting on (x, y) plus reflection in the xy-plane"),
        ("D_2rot", "3", "4", "half-turns about the three coordinate axes"),
        ("T_d", "3", "24", "full symmetry group of the regular tetrahedron"),
        ("O_h", "3", "48", "full symmetry group of the cube"),
        ("I_h", "3", "120", "full symmetry group of the icosahedron"),
    ];
    let mut out = format!("{:<8} {:>3} {:>5}  {}\n", "name", "dim", "order", "description");
    for (n, d, o, desc) in rows {
        out += &format!("{n:<8} {d:>3} {o:>5}  {desc}\n");
    }
    out
}

#[derive(Serialize)]
struct GroupShowJson {
    #[serde(flatten)]
    group: GroupJson,
    named_elements: BTreeMap<String, usize>,
    orbit_types: usize,
}

fn build_group(name: &str) -> Result<symcc::FiniteGroup, Failure> {
    parse_group(name).or_else(|_| catalog_group(name, None)).map_err(Failure::from)
}

fn groups_show(name: &str) -> Result<String, Failure> {
    let g = build_group(name)?;
    let table = StrataTable::new(Arc::new(g.clone()));
    Ok(to_json(&GroupShowJson {
        group: GroupJson::from_group(&g),
        named_elements: g.named_elements().clone(),
        orbit_types: table.strata().len(),
    }))
}

#[derive(Serialize)]
struct OrbitRow {
    class: usize,
    name: String,
    aliases: Vec<String>,
    isotropy_order: usize,
    orbit_size: usize,
    fixed_dim: usize,
    components: Vec<String>,
    chambers: usize,
}

fn orbits(group: &str, json: bool) -> Result<String, Failure> {
    let g = build_group(group)?;
    let table = StrataTable::new(Arc::new(g));
    let rows: Vec<OrbitRow> = table
        .strata()
        .iter()
        .map(|s| OrbitRow {
            class: s.orbit_type.class_id,
            name: s.orbit_type.name.clone(),
            aliases: s.orbit_type.aliases.clone(),
            isotropy_order: s.orbit_type.representative.order(),
            orbit_size: s.orbit_type.orbit_size,
            fixed_dim: s.orbit_type.fixed_dim,
            components: s.components.iter().map(|c| format!("({}){}", s.orbit_type.name, c.label)).collect(),
            chambers: s.chamber_count(),
        })
        .collect();
    if json {
        return Ok(to_json(&rows));
    }
    let mut out = format!(
        "{:>5}  {:<18} {:>4} {:>6} {:>5}  {}\n",
        "class", "type", "|H|", "orbit", "fix", "components"
    );
    for r in rows {
        out += &format!(
            "{:>5}  {:<18} {:>4} {:>6} {:>5}  {}\n",
            r.class,
            r.name,
            r.isotropy_order,
            r.orbit_size,
            r.fixed_dim,
            r.components.join(" ")
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct VerifyJson {
    bodies: usize,
    dim: usize,
    #[serde(rename = "U")]
    u: f64,
    #[serde(rename = "I")]
    inertia: f64,
    min_separation: f64,
    lambda: f64,
    central_residual: f64,
    balanced_residual: f64,
    balanced_is_central: bool,
    balanced_degenerate_geometry: bool,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetric: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failing_generator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    burnside: Option<String>,
}

fn verify(c: &Configuration, group: Option<&str>, exponent: f64) -> Result<String, Failure> {
    let central = nbody::central_residual(c, exponent)?;
    let bal = balanced_residual(c, exponent)?;
    let mut out = VerifyJson {
        bodies: c.len(),
        dim: c.dim(),
        u: nbody::potential(c, exponent)?,
        inertia: nbody::moment_of_inertia(c),
        min_separation: c.min_separation(),
        lambda: central.lambda,
        central_residual: central.residual,
        balanced_residual: bal.residual,
        balanced_is_central: bal.is_central,
        balanced_degenerate_geometry: bal.degenerate_geometry,
        b: bal.b.row_iter().map(|r| r.iter().copied().collect()).collect(),
        group: None,
        symmetric: None,
        failing_generator: None,
        burnside: None,
    };
    if let Some(name) = group {
        let g = Arc::new(build_group(name)?);
        if g.dim() != c.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), found: c.dim() }.into());
        }
        out.group = Some(g.name().to_string());
        match check_symmetric(&g, c) {
            Ok(()) => {
                out.symmetric = Some(true);
                let table = StrataTable::new(g);
                out.burnside = Some(table.burnside_type_of(c)?.format(&table));
            }
            Err(generator) => {
                out.symmetric = Some(false);
                out.failing_generator = Some(generator);
            }
        }
    }
    Ok(to_json(&out))
}
