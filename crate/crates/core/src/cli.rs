//! Command-line driver: refinement studies, oracle runs, point-cloud export
//! and mesh file conversion.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::mesh::{read_mesh, tag_boundary, write_mesh, MeshKind, PolyMesh};
use crate::system::{SolverMethod, SolverOptions, SystemError};
use crate::verify::oracle::{default_tagging, OracleOptions};
use crate::verify::study::level_size;
use crate::verify::{
    convergence_study, oracle_suite, sample_solution, solve_level, ErrorReport, Gamma2, ManufacturedSolution,
    MeshSource, StudyConfig,
};
use crate::wgcore::WgConfig;

/// Exit status of a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status when a solve or oracle fails.
pub const EXIT_SOLVER: i32 = 1;
/// Exit status for invalid arguments, configuration or input files.
pub const EXIT_INPUT: i32 = 2;

/// Environment variable selecting the worker thread count.
pub const THREADS_ENV: &str = "LSWG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lswg", version, about = "Least-squares weak Galerkin solver for the Helmholtz Cauchy problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refinement study: one CSV row per level.
    Run(RunArgs),
    /// Commutativity, error-equation, exactness and SPD self-checks.
    Oracle(OracleArgs),
    /// Point cloud of the discrete and exact solution on the finest level.
    Export(ExportArgs),
    /// Mesh file conversion.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolutionName {
    S2,
    S3,
    S5,
    Quadratic,
    Linear,
}

impl SolutionName {
    pub fn name(self) -> &'static str {
        match self {
            SolutionName::S2 => "s2",
            SolutionName::S3 => "s3",
            SolutionName::S5 => "s5",
            SolutionName::Quadratic => "quadratic",
            SolutionName::Linear => "linear",
        }
    }

    pub fn solution(self) -> ManufacturedSolution {
        ManufacturedSolution::by_name(self.name()).expect("every listed solution exists")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Gamma2Arg {
    Left,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshArg {
    Family(MeshKind),
    File(PathBuf),
}

impl FromStr for MeshArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tri_uniform" => Ok(MeshArg::Family(MeshKind::TriUniform)),
            "tri_figure" => Ok(MeshArg::Family(MeshKind::TriFigure)),
            "pentagon" => Ok(MeshArg::Family(MeshKind::Pentagon)),
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(MeshArg::File(PathBuf::from(p))),
                _ => Err(format!("unknown mesh `{other}` (expected tri_uniform, tri_figure, pentagon or file:<path>)")),
            },
        }
    }
}

impl std::fmt::Display for MeshArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshArg::Family(k) => f.write_str(k.name()),
            MeshArg::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Strictly increasing refinement levels, given as one comma-separated value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels(pub Vec<u32>);

impl FromStr for Levels {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_levels(s).map(Levels)
    }
}

fn parse_levels(s: &str) -> Result<Vec<u32>, String> {
    let levels = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| format!("invalid level `{t}`")))
        .collect::<Result<Vec<u32>, String>>()?;
    if levels.is_empty() {
        return Err("at least one level is required".into());
    }
    if levels.iter().any(|&l| l == 0 || l > 12) {
        return Err("levels must lie in 1..=12".into());
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err("levels must be strictly increasing".into());
    }
    Ok(levels)
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Manufactured solution.
    #[arg(long, value_enum, default_value = "s2")]
    pub solution: SolutionName,
    /// Squared wavenumber k².
    #[arg(long, default_value_t = 10.0)]
    pub k2: f64,
    /// Polynomial degree m.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// tri_uniform, tri_figure, pentagon or file:<path>.
    #[arg(long, default_value = "tri_uniform")]
    pub mesh: MeshArg,
    /// Comma-separated refinement levels; level ℓ has 2^(ℓ-1) macro squares
    /// per side. Defaults: 1,2,3,4 for `run`, 2 for `oracle`, 4 for `export`.
    #[arg(long)]
    pub levels: Option<Levels>,
    #[arg(skip = vec![1, 2, 3, 4])]
    pub default_levels: Vec<u32>,
    /// Linear solver.
    #[arg(long, default_value = "auto")]
    pub solver: SolverMethod,
    /// Relative residual tolerance for CG and for the direct solver's refinement.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Boundary part without data. Defaults to `left` for generated meshes
    /// and to the tags stored in the file for file meshes.
    #[arg(long, value_enum)]
    pub gamma2: Option<Gamma2Arg>,
}

impl ProblemArgs {
    fn level_list(&self) -> Vec<u32> {
        match (&self.levels, &self.mesh) {
            (Some(l), _) => l.0.clone(),
            (None, MeshArg::File(_)) => vec![1],
            (None, MeshArg::Family(_)) => self.default_levels.clone(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.k2.is_finite() && self.k2 > 0.0) {
            return Err(format!("k2 must be a positive finite number, got {}", self.k2));
        }
        if !(1..=4).contains(&self.degree) {
            return Err(format!("degree must be in 1..=4, got {}", self.degree));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if matches!(self.mesh, MeshArg::File(_)) && self.level_list().len() > 1 {
            return Err("a file mesh cannot be refined; pass a single level".into());
        }
        Ok(())
    }

    fn gamma2(&self) -> Gamma2 {
        match (self.gamma2, &self.mesh) {
            (Some(Gamma2Arg::Left), _) => Gamma2::Left,
            (Some(Gamma2Arg::None), _) => Gamma2::None,
            (None, MeshArg::File(_)) => Gamma2::Keep,
            (None, MeshArg::Family(_)) => Gamma2::Left,
        }
    }

    fn source(&self) -> Result<MeshSource, String> {
        match &self.mesh {
            MeshArg::Family(k) => Ok(MeshSource::Family(*k)),
            MeshArg::File(p) => Ok(MeshSource::Fixed(load_mesh(p)?)),
        }
    }

    fn study_config(&self) -> Result<StudyConfig, String> {
        let wg = WgConfig::new(self.degree, self.k2).map_err(|e| e.to_string())?;
        Ok(StudyConfig {
            wg,
            gamma2: self.gamma2(),
            solver: SolverOptions { method: self.solver, tol: self.tol, max_iter: None },
        })
    }

    /// Canonical flags reproducing this configuration.
    fn command_line(&self) -> String {
        let levels: Vec<String> = self.level_list().iter().map(|l| l.to_string()).collect();
        let mut s = format!(
            "--solution {} --k2 {} --degree {} --mesh {} --levels {} --solver {} --tol {:e}",
            self.solution.name(),
            self.k2,
            self.degree,
            self.mesh,
            levels.join(","),
            self.solver,
            self.tol
        );
        if let Some(g) = self.gamma2 {
            let _ = write!(s, " --gamma2 {}", if g == Gamma2Arg::Left { "left" } else { "none" });
        }
        s
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Random polynomials for the commutativity check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Sample points per triangle side inside each cell.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Write a generated mesh in the text format.
    Export {
        #[arg(long, default_value = "tri_uniform")]
        mesh: MeshArg,
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, value_enum, default_value = "left")]
        gamma2: Gamma2Arg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read and validate a mesh file and print a summary.
    Import { path: PathBuf },
}

fn load_mesh(path: &PathBuf) -> Result<PolyMesh, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    read_mesh(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: &Option<PathBuf>, body: &str, stdout: &mut dyn Write) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| format!("cannot write {}: {e}", p.display())),
        // A reader that stops early, such as `head`, is not an error.
        None => match stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
            _ => Ok(()),
        },
    }
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.1}")).unwrap_or_default()
}

pub const CSV_COLUMNS: &str =
    "grid_level,n_cells,h,l2_err,l2_rate,wlap_err,wlap_rate,energy_err,cg_iters,residual,time_ms";

pub fn csv_row(r: &ErrorReport) -> String {
    format!(
        "{},{},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{},{:.3e},{}",
        r.grid_level,
        r.n_cells,
        r.h,
        r.l2_err,
        fmt_rate(r.l2_rate),
        r.wlap_err,
        fmt_rate(r.wlap_rate),
        r.energy_err,
        r.iterations,
        r.residual,
        r.time.as_millis()
    )
}

fn metadata(cmd: &str, p: &ProblemArgs) -> String {
    let wg = WgConfig { degree: p.degree, k2: p.k2, trace_power: 3 };
    let mut s = String::new();
    let _ = writeln!(s, "# lswg {} {}", cmd, p.command_line());
    let _ = writeln!(s, "# version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        s,
        "# problem: Δu + k²u = f on (0,1)², Cauchy data u and ∂u/∂n on Γ1, Γ2 = {}",
        match p.gamma2() {
            Gamma2::Left => "{x = 0}",
            Gamma2::None => "empty",
            Gamma2::Keep => "as tagged in the mesh file",
        }
    );
    let _ = writeln!(
        s,
        "# spaces: P{m} cells, P{m} traces, P{} normal fluxes; weak Laplacian in P{m}; stabilizer weights k²h^-3, k²h^-1",
        p.degree - 1,
        m = p.degree
    );
    let _ = writeln!(
        s,
        "# quadrature: cells exact to degree {}, edges {} Gauss points",
        wg.cell_quadrature_order(),
        wg.edge_quadrature_points()
    );
    let _ = writeln!(s, "# solver: {} tol {:e}", p.solver, p.tol);
    if let MeshArg::Family(_) = p.mesh {
        let _ = writeln!(s, "# levels: grid level l has 2^(l-1) macro squares per side");
    }
    let _ = writeln!(
        s,
        "# columns: l2_err = ||u - u0||; wlap_err = ||Q0(Δu) - Δ_w u_h|| (= ||Δ_w(Q_h u - u_h)|| on polynomials); energy_err = |||u_h - Q_h u|||; rates are log(e_coarse/e_fine)/log(h_coarse/h_fine); cg_iters counts CG iterations or direct-solver refinement steps"
    );
    s
}

fn input_error(stderr: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    EXIT_INPUT
}

fn is_input_error(e: &SystemError) -> bool {
    matches!(e, SystemError::UntaggedBoundary(_) | SystemError::NoCauchyData | SystemError::DataNotEvaluable(_))
}

fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let p = &args.problem;
    let prepared = p.validate().and_then(|_| Ok((p.source()?, p.study_config()?)));
    let (source, cfg) = match prepared {
        Ok(v) => v,
        Err(e) => return input_error(stderr, e),
    };
    let mut body = metadata("run", p);
    body.push_str(CSV_COLUMNS);
    body.push('\n');
    let (reports, failure) = match convergence_study(&p.solution.solution(), &source, &p.level_list(), &cfg) {
        Ok(r) => (r, None),
        Err((r, e)) => (r, Some(e)),
    };
    for r in &reports {
        body.push_str(&csv_row(r));
        body.push('\n');
    }
    if let Some(e) = &failure {
        let _ = writeln!(body, "# error: {e}");
    }
    if let Err(e) = emit(&args.out, &body, stdout) {
        return input_error(stderr, e);
    }
    match failure {
        None => EXIT_OK,
        Some(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_SOLVER
            }
        }
    }
}

fn tag_for(mesh: &PolyMesh, gamma2: Gamma2) -> Result<PolyMesh, String> {
    match gamma2 {
        Gamma2::Keep => Ok(mesh.clone()),
        Gamma2::Left => default_tagging(mesh).map_err(|e| e.to_string()),
        Gamma2::None => tag_boundary(mesh, |_| false).map_err(|e| e.to_string()),
    }
}

fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let p = &args.problem;
    let prepared = p.validate().and_then(|_| Ok((p.source()?, p.study_config()?)));
    let (source, cfg) = match prepared {
        Ok(v) => v,
        Err(e) => return input_error(stderr, e),
    };
    let levels = p.level_list();
    let mut all_passed = true;
    for level in levels {
        let mesh = match tag_for(&source.mesh(level), cfg.gamma2) {
            Ok(m) => m,
            Err(e) => return input_error(stderr, e),
        };
        let _ = writeln!(
            stdout,
            "# oracle {} level {} ({} cells), m = {}, k² = {}",
            p.mesh,
            level,
            mesh.n_cells(),
            p.degree,
            p.k2
        );
        match oracle_suite(&mesh, cfg.wg, OracleOptions { samples: args.samples, seed: args.seed }) {
            Ok(report) => {
                for e in &report.entries {
                    let _ = writeln!(stdout, "{e}");
                }
                all_passed &= report.passed();
            }
            Err(e) if is_input_error(&e) => return input_error(stderr, e),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_SOLVER;
            }
        }
    }
    let _ = writeln!(stdout, "{}", if all_passed { "all oracles passed" } else { "oracle failure" });
    if all_passed {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

fn cmd_export(args: &ExportArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let p = &args.problem;
    if args.samples == 0 {
        return input_error(stderr, "at least one sample per side is required");
    }
    let prepared = p.validate().and_then(|_| Ok((p.source()?, p.study_config()?)));
    let (source, cfg) = match prepared {
        Ok(v) => v,
        Err(e) => return input_error(stderr, e),
    };
    let level = *p.level_list().last().expect("levels are nonempty");
    let sol = p.solution.solution();
    let (report, disc, u_h) = match solve_level(&sol, &source.mesh(level), level, &cfg) {
        Ok(v) => v,
        Err(e) if is_input_error(&e) => return input_error(stderr, e),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_SOLVER;
        }
    };
    let points = match sample_solution(&u_h, &*sol.u, &disc, args.samples) {
        Ok(v) => v,
        Err(e) => return input_error(stderr, e),
    };
    let mut body = metadata("export", p);
    let _ = writeln!(
        body,
        "# samples per side: {}; level {} ({} cells), l2_err {:.6e}",
        args.samples, level, report.n_cells, report.l2_err
    );
    body.push_str("x,y,u_h,u_exact,error\n");
    for s in &points {
        let _ = writeln!(body, "{:.9e},{:.9e},{:.9e},{:.9e},{:.6e}", s.point.x, s.point.y, s.u_h, s.exact, s.error());
    }
    if let Err(e) = emit(&args.out, &body, stdout) {
        return input_error(stderr, e);
    }
    EXIT_OK
}

fn cmd_mesh(cmd: &MeshCommand, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match cmd {
        MeshCommand::Export { mesh, level, gamma2, out } => {
            let MeshArg::Family(kind) = mesh else {
                return input_error(stderr, "mesh export needs a generated family");
            };
            if *level == 0 || *level > 12 {
                return input_error(stderr, "level must lie in 1..=12");
            }
            let g = if *gamma2 == Gamma2Arg::Left { Gamma2::Left } else { Gamma2::None };
            let text =
                tag_for(&kind.generate(level_size(*level)), g).and_then(|m| write_mesh(&m).map_err(|e| e.to_string()));
            match text.and_then(|t| emit(out, &t, stdout)) {
                Ok(()) => EXIT_OK,
                Err(e) => input_error(stderr, e),
            }
        }
        MeshCommand::Import { path } => match load_mesh(path) {
            Ok(m) => {
                use crate::mesh::EdgeTag;
                let _ = writeln!(
                    stdout,
                    "{}: {} vertices, {} cells, {} edges ({} interior, {} Γ1, {} Γ2, {} untagged), h = {:.6e}, area = {:.12}",
                    path.display(),
                    m.vertices.len(),
                    m.n_cells(),
                    m.n_edges(),
                    m.count_tag(EdgeTag::Interior),
                    m.count_tag(EdgeTag::Gamma1),
                    m.count_tag(EdgeTag::Gamma2),
                    m.count_tag(EdgeTag::Boundary),
                    m.h,
                    m.total_area()
                );
                EXIT_OK
            }
            Err(e) => input_error(stderr, e),
        },
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    // Sequential factorization keeps outputs bitwise reproducible.
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
        }
    };
    init_threads();
    match cli.command {
        Command::Run(a) => cmd_run(&a, stdout, stderr),
        Command::Oracle(mut a) => {
            a.problem.default_levels = vec![2];
            cmd_oracle(&a, stdout, stderr)
        }
        Command::Export(mut a) => {
            a.problem.default_levels = vec![4];
            cmd_export(&a, stdout, stderr)
        }
        Command::Mesh(m) => cmd_mesh(&m, stdout, stderr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(std::iter::once("lswg").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn level_parsing() {
        assert_eq!(parse_levels("3,4,5").unwrap(), vec![3, 4, 5]);
        assert!(parse_levels("4,3").is_err());
        assert!(parse_levels("2,2").is_err());
        assert!(parse_levels("0").is_err());
        assert!(parse_levels("a").is_err());
    }

    #[test]
    fn mesh_argument() {
        assert_eq!("pentagon".parse::<MeshArg>().unwrap(), MeshArg::Family(MeshKind::Pentagon));
        assert_eq!("file:a.mesh".parse::<MeshArg>().unwrap(), MeshArg::File("a.mesh".into()));
        assert!("file:".parse::<MeshArg>().is_err());
        assert!("hexagon".parse::<MeshArg>().is_err());
    }

    #[test]
    fn single_level_has_empty_rates() {
        let (code, out, _) = run(&["run", "--solution", "s2", "--degree", "2", "--levels", "2"]);
        assert_eq!(code, 0);
        let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], CSV_COLUMNS);
        assert_eq!(rows.len(), 2);
        let cols: Vec<&str> = rows[1].split(',').collect();
        assert_eq!(cols.len(), 11);
        assert_eq!((cols[4], cols[6]), ("", ""));
    }

    #[test]
    fn invalid_config_is_input_error() {
        assert_eq!(run(&["run", "--k2", "-1"]).0, EXIT_INPUT);
        assert_eq!(run(&["run", "--degree", "5"]).0, EXIT_INPUT);
        assert_eq!(run(&["run", "--levels", "3,2"]).0, EXIT_INPUT);
        assert_eq!(run(&["run", "--solver", "lu"]).0, EXIT_INPUT);
        assert_eq!(run(&["oracle", "--mesh", "file:/nonexistent/x.mesh"]).0, EXIT_INPUT);
        assert_eq!(run(&["export", "--samples", "0", "--levels", "1"]).0, EXIT_INPUT);
    }

    #[test]
    fn metadata_reproduces_run() {
        let (_, out, _) = run(&["run", "--degree", "2", "--levels", "1,2", "--solver", "direct"]);
        let first = out.lines().next().unwrap();
        let args: Vec<&str> = first.trim_start_matches("# lswg ").split_whitespace().collect();
        let (_, again, _) = run(&args);
        let strip = |s: &str| -> Vec<String> {
            s.lines()
                .map(|l| {
                    if l.starts_with('#') {
                        l.to_string()
                    } else {
                        l.rsplit_once(',').map(|x| x.0).unwrap_or(l).to_string()
                    }
                })
                .collect()
        };
        assert_eq!(strip(&out), strip(&again));
    }
}
