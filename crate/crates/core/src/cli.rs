//! The `spdefem` command line.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 for numeric
//! failures and failed validations.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assembly::{build_fem, FemMatrices};
use crate::gmrf::{build_precision, validate_matern, MaternSpec};
use crate::io::{
    mesh_hash, read_field_csv, read_to_string, write_atomic, write_field_csv, write_matrix_market, IoError,
    Metadata,
};
use crate::linalg::factorize;
use crate::mesh::{generate_structured_mesh, Mesh, Point};
use crate::pde::{l2_error, load_vector, residual_norm, Field};

/// Correlation discrepancy above which `validate` fails when the mesh
/// satisfies both rules of thumb.
pub const VALIDATION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "spdefem", version, about = "P1 finite elements and SPDE/GMRF precisions on triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a structured triangle mesh over a rectangle.
    Meshgen(MeshgenArgs),
    /// Export the mass, stiffness, and white-noise quantities.
    Assemble(AssembleArgs),
    /// Solve k·u − ∇²u = f with zero-flux boundaries.
    Solve(SolveArgs),
    /// L2-project a function onto the mesh.
    Project(ProjectArgs),
    /// Draw GMRF samples.
    Sample(SampleArgs),
    /// Write the covariance column of the node nearest a probe point.
    Cov(CovArgs),
    /// Compare FEM correlations with the Matérn correlation.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct MeshgenArgs {
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    ny: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ymax: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out_mass: Option<PathBuf>,
    #[arg(long)]
    out_stiff: Option<PathBuf>,
    #[arg(long)]
    out_noise: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "rhs", required = true, multiple = false)]
struct RhsArgs {
    /// Built-in right-hand side: one, zero, or cospi.
    #[arg(long = "f", group = "rhs")]
    name: Option<String>,
    /// Nodal values (node,x,y,value CSV) of a piecewise-linear f.
    #[arg(long = "f-csv", group = "rhs")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[command(flatten)]
    rhs: RhsArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report the error against the closed-form solution.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[command(flatten)]
    rhs: RhsArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    out_prefix: String,
}

#[derive(Debug, Args)]
struct CovArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
    probe: Point,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Defaults to 8/range², the value whose Matérn range equals --range.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    range: f64,
    #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
    probe: Point,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("invalid number `{v}`"));
    Ok([p(x)?, p(y)?])
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Parses `argv` (including the program name) and runs one subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Meshgen(a) => cmd_meshgen(a, out),
        Command::Assemble(a) => cmd_assemble(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Project(a) => cmd_project(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Cov(a) => cmd_cov(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) | CliError::Numeric(m) => m,
            };
            let _ = writeln!(err, "error: {msg}");
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<Mesh, CliError> {
    let text = read_to_string(path)?;
    Mesh::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn positive_k(k: f64) -> Result<f64, CliError> {
    if k > 0.0 && k.is_finite() {
        Ok(k)
    } else {
        Err(CliError::Usage(format!("--k must be positive, got {k}")))
    }
}

fn emit(out: &mut dyn Write, line: String) {
    let _ = writeln!(out, "{line}");
}

fn write_field(path: &Path, mesh: &Mesh, values: &[f64]) -> Result<(), CliError> {
    write_atomic(path, &write_field_csv(mesh, values)?)?;
    Ok(())
}

fn cmd_meshgen(a: MeshgenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mesh = generate_structured_mesh(a.nx, a.ny, (a.xmin, a.xmax), (a.ymin, a.ymax))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write_atomic(&a.out, &mesh.emit())?;
    emit(
        out,
        format!("wrote {} ({} nodes, {} triangles)", a.out.display(), mesh.node_count(), mesh.triangle_count()),
    );
    Ok(())
}

fn cmd_assemble(a: AssembleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.out_mass.is_none() && a.out_stiff.is_none() && a.out_noise.is_none() {
        return Err(CliError::Usage("assemble needs at least one of --out-mass, --out-stiff, --out-noise".into()));
    }
    let mesh = load(&a.mesh)?;
    let fem = build_fem(&mesh);
    for (path, m, what) in [(&a.out_mass, &fem.mass, "mass"), (&a.out_stiff, &fem.stiffness, "stiffness")] {
        if let Some(p) = path {
            write_atomic(p, &write_matrix_market(m))?;
            emit(out, format!("wrote {} ({what}, {}x{}, {} stored entries)", p.display(), m.dim(), m.dim(), m.nnz()));
        }
    }
    if let Some(p) = &a.out_noise {
        write_field(p, &mesh, &fem.a_tilde)?;
        emit(out, format!("wrote {} (white-noise variances, {} nodes)", p.display(), mesh.node_count()));
    }
    Ok(())
}

/// A built-in right-hand side with its closed-form solution for a given k.
struct BuiltinRhs {
    f: Box<dyn Fn(f64, f64) -> f64>,
    exact: Box<dyn Fn(f64, f64) -> f64>,
}

fn builtin(name: &str, k: f64) -> Result<BuiltinRhs, CliError> {
    use std::f64::consts::PI;
    let cc = |x: f64, y: f64| (PI * x).cos() * (PI * y).cos();
    Ok(match name {
        "one" => BuiltinRhs { f: Box::new(|_, _| 1.0), exact: Box::new(move |_, _| 1.0 / k) },
        "zero" => BuiltinRhs { f: Box::new(|_, _| 0.0), exact: Box::new(|_, _| 0.0) },
        // cos(πx)cos(πy) has zero normal derivative on the unit square.
        "cospi" => BuiltinRhs {
            f: Box::new(move |x, y| (k + 2.0 * PI * PI) * cc(x, y)),
            exact: Box::new(cc),
        },
        other => return Err(CliError::Usage(format!("unknown function `{other}` (expected one, zero, cospi)"))),
    })
}

/// Load vector of the requested right-hand side.
fn rhs_load(rhs: &RhsArgs, mesh: &Mesh, fem: &FemMatrices, k: f64) -> Result<Vec<f64>, CliError> {
    if let Some(name) = &rhs.name {
        let b = builtin(name, k)?;
        return load_vector(mesh, &*b.f).map_err(numeric);
    }
    let path = rhs.csv.as_ref().expect("clap enforces one rhs source");
    let nodal = read_field_csv(&read_to_string(path)?)?;
    if nodal.values.len() != mesh.node_count() {
        return Err(CliError::Usage(format!(
            "{}: {} values for a mesh with {} nodes",
            path.display(),
            nodal.values.len(),
            mesh.node_count()
        )));
    }
    // The midpoint rule is exact for piecewise-linear f, so its load is J·w.
    fem.mass.matvec(&nodal.values).map_err(numeric)
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let k = positive_k(a.k)?;
    if a.exact && a.rhs.name.is_none() {
        return Err(CliError::Usage("--exact needs a built-in --f".into()));
    }
    let exact = a.rhs.name.as_deref().map(|n| builtin(n, k)).transpose()?;
    let mesh = load(&a.mesh)?;
    let fem = build_fem(&mesh);
    let b = rhs_load(&a.rhs, &mesh, &fem, k)?;
    let op = fem.operator(k);
    let u = factorize(&op).and_then(|f| f.solve(&b)).map_err(numeric)?;
    let r = op.matvec(&u).map_err(numeric)?;
    let l2_res = r.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    emit(out, format!("L2 residual: {l2_res:.6e}"));
    if a.exact {
        let ex = &exact.expect("checked above").exact;
        let max_dev = mesh.nodes().iter().zip(&u).map(|(p, v)| (v - ex(p[0], p[1])).abs()).fold(0.0, f64::max);
        let err = l2_error(&mesh, &Field { weights: u.clone() }, &**ex);
        emit(out, format!("max deviation: {max_dev:.6e}"));
        emit(out, format!("L2 error: {err:.6e}"));
    }
    if let Some(p) = &a.out {
        write_field(p, &mesh, &u)?;
        emit(out, format!("wrote {} (solution, {} nodes)", p.display(), mesh.node_count()));
    }
    Ok(())
}

fn cmd_project(a: ProjectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mesh = load(&a.mesh)?;
    let fem = build_fem(&mesh);
    // k only enters built-in cospi, whose projection uses k = 1.
    let b = rhs_load(&a.rhs, &mesh, &fem, 1.0)?;
    let m = factorize(&fem.mass).and_then(|f| f.solve(&b)).map_err(numeric)?;
    emit(out, format!("projection residual: {:.6e}", residual_norm(&fem.mass, &m, &b).map_err(numeric)?));
    write_field(&a.out, &mesh, &m)?;
    emit(out, format!("wrote {} (projection, {} nodes)", a.out.display(), mesh.node_count()));
    Ok(())
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let k = positive_k(a.k)?;
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mesh = load(&a.mesh)?;
    let model = build_precision(&build_fem(&mesh), k).map_err(numeric)?;
    let samples = model.sample(a.seed, a.n).map_err(numeric)?;
    for (s, field) in samples.iter().enumerate() {
        let path = PathBuf::from(format!("{}_{s:03}.csv", a.out_prefix));
        write_field(&path, &mesh, &field.weights)?;
        emit(out, format!("wrote {} (sample {s})", path.display()));
    }
    let mut meta = Metadata::default();
    meta.insert("seed", a.seed);
    meta.insert("k", format!("{k:.16e}"));
    meta.insert("n", a.n);
    meta.insert("nodes", mesh.node_count());
    meta.insert("mesh_sha256", mesh_hash(&mesh));
    meta.insert("generator", crate::rng::GENERATOR_ID);
    meta.insert("version", env!("CARGO_PKG_VERSION"));
    let path = PathBuf::from(format!("{}_meta.txt", a.out_prefix));
    write_atomic(&path, &meta.to_text())?;
    emit(out, format!("wrote {} (metadata)", path.display()));
    Ok(())
}

fn probe_node(mesh: &Mesh, probe: Point) -> Result<usize, CliError> {
    if mesh.locate(probe).is_none() {
        return Err(CliError::Usage(format!("probe ({}, {}) is outside the mesh", probe[0], probe[1])));
    }
    Ok(mesh.nearest_node(probe))
}

fn cmd_cov(a: CovArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let k = positive_k(a.k)?;
    let mesh = load(&a.mesh)?;
    let node = probe_node(&mesh, a.probe)?;
    let model = build_precision(&build_fem(&mesh), k).map_err(numeric)?;
    let col = model.covariance_column(node).map_err(numeric)?;
    emit(out, format!("probe node {node}, variance {:.6e}", col[node]));
    write_field(&a.out, &mesh, &col)?;
    emit(out, format!("wrote {} (covariance column {node})", a.out.display()));
    Ok(())
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.range > 0.0) {
        return Err(CliError::Usage(format!("--range must be positive, got {}", a.range)));
    }
    let k = positive_k(a.k.unwrap_or(8.0 / (a.range * a.range)))?;
    let mesh = load(&a.mesh)?;
    let node = probe_node(&mesh, a.probe)?;
    let model = build_precision(&build_fem(&mesh), k).map_err(numeric)?;
    let spec = MaternSpec::from_k(k);
    let mut report = validate_matern(&mesh, &model, &spec, node).map_err(numeric)?;
    if (spec.empirical_range() - a.range).abs() > 1e-9 * a.range {
        // Rules of thumb follow the requested range; correlations follow k.
        report.quality = crate::mesh::quality_report(&mesh, a.range, &[mesh.nodes()[node]]);
    }
    let mut text = format!("k = {k}\nmatern range (sqrt(8)/sqrt(k)) = {}\n", spec.empirical_range());
    text.push_str(&report.to_string());
    let failed = !report.flagged() && !(report.max_discrepancy <= VALIDATION_TOLERANCE);
    text.push_str(&format!(
        "verdict: {}\n",
        if report.flagged() {
            "not enforced"
        } else if failed {
            "FAIL"
        } else {
            "pass"
        }
    ));
    match &a.out {
        Some(p) => {
            write_atomic(p, &text)?;
            emit(out, format!("wrote {} (max discrepancy {:.6})", p.display(), report.max_discrepancy));
        }
        None => {
            let _ = write!(out, "{text}");
        }
    }
    if failed {
        return Err(CliError::Numeric(format!(
            "correlation discrepancy {:.6} exceeds {VALIDATION_TOLERANCE}",
            report.max_discrepancy
        )));
    }
    Ok(())
}
