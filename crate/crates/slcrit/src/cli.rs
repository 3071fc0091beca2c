//! Command-line front end over every module, with reproducible file-based
//! outputs.
//!
//! One binary, subcommand style. Global flags select the output directory
//! (`--out-dir`, or the `SLCRIT_OUT_DIR` environment variable), a config
//! file supplying defaults for any flag (`--config`; explicit flags win),
//! a base seed, a default grid resolution, and a thread count. All floats
//! print with 17 significant digits and all exact values print as
//! fractions, so identical invocations produce byte-identical output.
//!
//! Exit codes: `0` success, `2` parameter/input validation failure, `3`
//! numerical failure (escape, non-convergence, failed conservation check).

use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::dynamics::{
    eval_observable, poisson_bracket, DynamicsError, Observable, PhaseState, SystemParams,
};
use crate::exact::{parse_ratio, ExactRatio};
use crate::galois::GaloisError;
use crate::integrator::{
    energy_drift, fmt_f64, integrate, IntegratorConfig, IntegratorError, Scheme,
};
use crate::kovacic::KovacicError;
use crate::optimize::{
    extract_critical, optimize_sum, parse_problem_spec, verify_critical, write_u_csv,
    OptimizeError, OptimizeProblem, SolverConfig,
};
use crate::poincare::{
    compute_section, default_seed_grid, render, CrossingDirection, PoincareError, SectionConfig,
};
use crate::spectral::{
    dirichlet_eigs, read_potential_csv, write_eigs_csv, write_potential_csv, SpectralError,
};

/// Process exit code for success.
pub const EXIT_OK: i32 = 0;
/// Process exit code for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

/// Failure category carrying the message shown to the user.
#[derive(Debug)]
pub enum CliError {
    /// Bad parameters or unreadable/malformed input: exit 2.
    Validation(String),
    /// The computation itself failed: exit 3.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::NonFinite => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<IntegratorError> for CliError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::Escape { .. }
            | IntegratorError::NonFiniteState { .. }
            | IntegratorError::EmptyTrajectory => CliError::Numerical(e.to_string()),
            IntegratorError::InvalidConfig(_) => CliError::Validation(e.to_string()),
            IntegratorError::Dynamics(inner) => inner.into(),
        }
    }
}

impl From<PoincareError> for CliError {
    fn from(e: PoincareError) -> Self {
        match e {
            PoincareError::EmptyPointSet => CliError::Numerical(e.to_string()),
            PoincareError::Integrator(inner) => inner.into(),
            PoincareError::Dynamics(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<GaloisError> for CliError {
    fn from(e: GaloisError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<KovacicError> for CliError {
    fn from(e: KovacicError) -> Self {
        match e {
            KovacicError::SetElementOverflow => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::DegenerateMultiplier(_) => CliError::Numerical(e.to_string()),
            OptimizeError::Spectral(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "slcrit",
    version,
    about = "Integrability classification, simulation, sections, and \
             eigenvalue-sum optimization for coupled oscillator systems"
)]
struct Cli {
    /// Directory for output files (default: $SLCRIT_OUT_DIR or '.').
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Config file supplying any long flag as 'name: value' lines;
    /// explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base RNG seed for seeded subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Default grid resolution for spectral subcommands.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Worker threads for parallel-safe work (results never depend on
    /// this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// Nonlinearity exponent k >= 2.
    #[arg(long)]
    k: u32,
    /// Coupling sign, -1 or +1.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    epsilon: i32,
    /// Comma-separated frequency parameters mu_1,...,mu_m.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    mu: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide meromorphic integrability of the system (exact arithmetic).
    Classify {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Classify the spectral-gap critical system for gap index n.
    Gap {
        /// Gap index n >= 1 (the system couples with exponent 2n).
        #[arg(long)]
        n: u32,
        /// Comma-separated pair mu_1,mu_2.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        mu: Vec<String>,
    },
    /// Integrate the equations of motion and write a trajectory CSV.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        /// Comma-separated initial positions u_1,...,u_m.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        u0: Vec<f64>,
        /// Comma-separated initial velocities v_1,...,v_m.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        v0: Vec<f64>,
        /// Step size.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Final time.
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        /// Scheme: verlet | yoshida4.
        #[arg(long, default_value = "verlet")]
        scheme: String,
        /// Record every this-many steps.
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Compute a Poincare section (u1 = 0) and write CSV + SVG scatter.
    Section {
        #[command(flatten)]
        system: SystemArgs,
        /// Energy level h.
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        /// Number of seeds on the default grid line.
        #[arg(long, default_value_t = 12)]
        seeds: usize,
        /// Crossings recorded per seed.
        #[arg(long, default_value_t = 200)]
        crossings: usize,
        /// Step size.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Crossing direction: increasing | decreasing | both.
        #[arg(long, default_value = "increasing")]
        direction: String,
    },
    /// Evaluate conserved quantities along a trajectory and report drifts
    /// and Poisson brackets.
    Integrals {
        #[command(flatten)]
        system: SystemArgs,
        /// Comma-separated initial positions.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        u0: Vec<f64>,
        /// Comma-separated initial velocities.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        v0: Vec<f64>,
        /// Final time.
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        /// Step size.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Fail (exit 3) if a conserved quantity drifts beyond --tol.
        #[arg(long)]
        check: bool,
        /// Drift tolerance for --check.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run the second-order differential Galois certificate, either for
    /// the built-in family at exponent k or for an explicit coefficient.
    Kovacic {
        /// Nonlinearity exponent k >= 3 selecting the built-in normal
        /// variational equation.
        #[arg(long)]
        k: Option<u32>,
        /// Explicit rational coefficient r(z) of x'' = r x, e.g.
        /// "-3/(32*z^3)".
        #[arg(long, allow_hyphen_values = true, conflicts_with = "k")]
        r: Option<String>,
    },
    /// Dirichlet eigenvalues of a sampled potential.
    Eigs {
        /// Potential CSV with header `x,q` on uniform nodes.
        #[arg(long)]
        q_file: PathBuf,
        /// Number of eigenvalues.
        #[arg(long)]
        m: usize,
        /// Norm exponent attached to the grid.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Optimize an eigenvalue sum over an Lp ball and verify the critical
    /// system.
    Optimize {
        /// Number of eigenvalues summed (>= 2).
        #[arg(long)]
        m: Option<usize>,
        /// Ball exponent in (1, inf).
        #[arg(long)]
        p: Option<f64>,
        /// Ball radius.
        #[arg(long)]
        r: Option<f64>,
        /// min | max.
        #[arg(long)]
        sense: Option<String>,
        /// Problem-spec file (keys m, p, r, sense, n, restarts, seed);
        /// explicit flags override it.
        #[arg(long)]
        spec_file: Option<PathBuf>,
        /// Number of restarts.
        #[arg(long)]
        restarts: Option<usize>,
    },
}

/// Entry point used by the binary: parses, dispatches, returns the exit
/// code. All output (including error messages) goes to `out`.
pub fn run_with_writer<W: Write>(args: Vec<String>, out: &mut W) -> i32 {
    let args = match apply_config_file(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(out, "{e}");
            return EXIT_VALIDATION;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = match &e {
                CliError::Validation(_) => EXIT_VALIDATION,
                CliError::Numerical(_) => EXIT_NUMERICAL,
            };
            let _ = writeln!(out, "{e}");
            code
        }
    }
}

/// Entry point with stdout.
pub fn run(args: impl IntoIterator<Item = String>) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with_writer(args.into_iter().collect(), &mut lock)
}

/// Reads `--config FILE` (if present) and appends `--key value` for every
/// `key: value` line whose flag is not already on the command line.
fn apply_config_file(mut args: Vec<String>) -> Result<Vec<String>, CliError> {
    let path = {
        let mut found = None;
        let mut iter = args.iter().peekable();
        while let Some(a) = iter.next() {
            if a == "--config" {
                found = iter.peek().map(|s| PathBuf::from(*s));
            } else if let Some(rest) = a.strip_prefix("--config=") {
                found = Some(PathBuf::from(rest));
            }
        }
        match found {
            Some(p) => p,
            None => return Ok(args),
        }
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(CliError::Validation(format!(
                "config line {}: expected 'name: value', got '{line}'",
                lineno + 1
            )));
        };
        let flag = format!("--{}", key.trim());
        let already = args
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if !already {
            args.push(flag);
            args.push(value.trim().to_string());
        }
    }
    Ok(args)
}

fn out_dir_of(cli: &Cli) -> Result<PathBuf, CliError> {
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("SLCRIT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Validation(format!("output dir {}: {e}", dir.display())))?;
    Ok(dir)
}

fn parse_mu_exact(mu: &[String]) -> Result<Vec<ExactRatio>, CliError> {
    mu.iter()
        .map(|s| parse_ratio(s).map_err(|e| CliError::Validation(format!("mu '{s}': {e}"))))
        .collect()
}

fn parse_mu_f64(mu: &[String]) -> Result<Vec<f64>, CliError> {
    mu.iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .or_else(|| parse_ratio(s).ok().map(|r| crate::exact::to_f64(&r)))
                .ok_or_else(|| CliError::Validation(format!("mu '{s}' is not a number")))
        })
        .collect()
}

fn parse_scheme(name: &str) -> Result<Scheme, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "verlet" | "stormer-verlet" => Ok(Scheme::StormerVerlet2),
        "yoshida4" | "yoshida" => Ok(Scheme::Yoshida4),
        other => Err(CliError::Validation(format!(
            "unknown scheme '{other}' (want verlet or yoshida4)"
        ))),
    }
}

fn parse_direction(name: &str) -> Result<CrossingDirection, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "increasing" => Ok(CrossingDirection::Increasing),
        "decreasing" => Ok(CrossingDirection::Decreasing),
        "both" => Ok(CrossingDirection::Both),
        other => Err(CliError::Validation(format!(
            "unknown direction '{other}' (want increasing, decreasing, or both)"
        ))),
    }
}

fn write_text(path: &std::path::Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Validation(format!("writing {}: {e}", path.display())))
}

fn dispatch<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    let out_dir = out_dir_of(&cli)?;
    match &cli.cmd {
        Cmd::Classify { system } => {
            let mu = parse_mu_exact(&system.mu)?;
            let verdict = crate::galois::classify_exact(system.k, system.epsilon, &mu)?;
            let text = verdict.to_report();
            write_text(&out_dir.join("verdict.txt"), &text)?;
            write!(out, "{text}").map_err(CliError::from)
        }
        Cmd::Gap { n, mu } => {
            let mu = parse_mu_exact(mu)?;
            if mu.len() != 2 {
                return Err(CliError::Validation(format!(
                    "gap expects exactly two mu values, got {}",
                    mu.len()
                )));
            }
            let verdict = crate::galois::classify_gap_system(*n, &mu[0], &mu[1])?;
            let text = verdict.to_report();
            write_text(&out_dir.join("verdict.txt"), &text)?;
            write!(out, "{text}").map_err(CliError::from)
        }
        Cmd::Simulate { system, u0, v0, dt, t_end, scheme, stride } => {
            let params = SystemParams::new(system.k, system.epsilon, parse_mu_f64(&system.mu)?)?;
            let start = PhaseState::new(u0.clone(), v0.clone())?;
            let cfg = IntegratorConfig::new(*dt, *t_end, parse_scheme(scheme)?, *stride)?;
            let traj = integrate(&params, &start, &cfg)?;
            let path = out_dir.join("trajectory.csv");
            let mut file = fs::File::create(&path).map_err(CliError::from)?;
            traj.write_csv(&mut file).map_err(CliError::from)?;
            writeln!(out, "simulate-summary")?;
            writeln!(out, "samples: {}", traj.times.len())?;
            writeln!(out, "energy-drift: {}", fmt_f64(energy_drift(&traj)?))?;
            writeln!(out, "file: {}", path.display())?;
            Ok(())
        }
        Cmd::Section { system, h, seeds, crossings, dt, direction } => {
            let params = SystemParams::new(system.k, system.epsilon, parse_mu_f64(&system.mu)?)?;
            let grid = default_seed_grid(&params, *h, *seeds)?;
            let cfg = SectionConfig::new(*h, grid, *crossings, parse_direction(direction)?, *dt)?;
            let set = compute_section(&params, &cfg)?;
            let base = out_dir.join("section");
            render(&set, &base)?;
            writeln!(out, "section-summary")?;
            writeln!(out, "points: {}", set.points.len())?;
            writeln!(out, "seeds: {}", *seeds)?;
            writeln!(out, "skipped-seeds: {:?}", set.skipped_seeds)?;
            writeln!(out, "truncated-seeds: {:?}", set.truncated_seeds)?;
            writeln!(out, "max-u1-residual: {}", fmt_f64(set.max_u1_residual))?;
            writeln!(out, "max-energy-residual: {}", fmt_f64(set.max_energy_residual))?;
            writeln!(out, "files: {} {}", base.with_extension("csv").display(), base.with_extension("svg").display())?;
            Ok(())
        }
        Cmd::Integrals { system, u0, v0, t_end, dt, check, tol } => {
            let params = SystemParams::new(system.k, system.epsilon, parse_mu_f64(&system.mu)?)?;
            let start = PhaseState::new(u0.clone(), v0.clone())?;
            let (text, pass) = integrals_report(&params, &start, *t_end, *dt, *tol)?;
            write_text(&out_dir.join("integrals.txt"), &text)?;
            write!(out, "{text}")?;
            if *check && !pass {
                return Err(CliError::Numerical(format!(
                    "a conserved quantity drifted beyond {tol}"
                )));
            }
            Ok(())
        }
        Cmd::Kovacic { k, r } => {
            let ratfn = match (k, r) {
                (Some(k), None) => crate::kovacic::anve_r(*k)?,
                (None, Some(expr)) => crate::kovacic::parse_ratfn(expr)?,
                _ => {
                    return Err(CliError::Validation(
                        "provide exactly one of --k or --r".into(),
                    ))
                }
            };
            let cert = crate::kovacic::certify_case2(&ratfn)?;
            let text = cert.to_report();
            write_text(&out_dir.join("certificate.txt"), &text)?;
            write!(out, "{text}").map_err(CliError::from)
        }
        Cmd::Eigs { q_file, m, p } => {
            let file = fs::File::open(q_file)
                .map_err(|e| CliError::Validation(format!("{}: {e}", q_file.display())))?;
            let grid = read_potential_csv(BufReader::new(file), *p)?;
            let eigs = dirichlet_eigs(&grid, *m)?;
            let mut text = Vec::new();
            write_eigs_csv(&eigs, &mut text).map_err(CliError::from)?;
            let text = String::from_utf8(text).expect("csv is utf8");
            write_text(&out_dir.join("eigs.csv"), &text)?;
            write!(out, "{text}").map_err(CliError::from)
        }
        Cmd::Optimize { m, p, r, sense, spec_file, restarts } => {
            let (mut prob, mut cfg) = match spec_file {
                Some(path) => {
                    let file = fs::File::open(path)
                        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
                    parse_problem_spec(BufReader::new(file))?
                }
                None => (
                    OptimizeProblem::new(
                        m.ok_or_else(|| CliError::Validation("--m required".into()))?,
                        p.ok_or_else(|| CliError::Validation("--p required".into()))?,
                        r.ok_or_else(|| CliError::Validation("--r required".into()))?,
                        sense
                            .as_deref()
                            .ok_or_else(|| CliError::Validation("--sense required".into()))?
                            .parse()
                            .map_err(CliError::Validation)?,
                    )?,
                    SolverConfig::default(),
                ),
            };
            // Explicit flags override the spec file.
            if let Some(m) = m {
                prob = OptimizeProblem::new(*m, prob.p, prob.r, prob.sense)?;
            }
            if let Some(p) = p {
                prob = OptimizeProblem::new(prob.m, *p, prob.r, prob.sense)?;
            }
            if let Some(r) = r {
                prob = OptimizeProblem::new(prob.m, prob.p, *r, prob.sense)?;
            }
            if let Some(s) = sense {
                prob = OptimizeProblem::new(
                    prob.m,
                    prob.p,
                    prob.r,
                    s.parse().map_err(CliError::Validation)?,
                )?;
            }
            if let Some(n) = cli.grid_n {
                cfg.n = n;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(restarts) = restarts {
                cfg.restarts = *restarts;
            }
            cfg.threads = cli.threads;
            let outcome = optimize_sum(&prob, &cfg)?;
            let sol = extract_critical(&outcome.q, &prob)?;
            let report = verify_critical(&sol, &prob);
            let text = format!("{}{}", outcome.to_report(&prob), report.to_report());
            let mut qf = fs::File::create(out_dir.join("q.csv")).map_err(CliError::from)?;
            write_potential_csv(&sol.q, &mut qf).map_err(CliError::from)?;
            let mut uf = fs::File::create(out_dir.join("u.csv")).map_err(CliError::from)?;
            write_u_csv(&sol, &mut uf).map_err(CliError::from)?;
            write_text(&out_dir.join("critical.txt"), &text)?;
            write!(out, "{text}")?;
            if !report.pass {
                return Err(CliError::Numerical(
                    "critical-system verification failed (see report)".into(),
                ));
            }
            Ok(())
        }
    }
}

/// Conservation/bracket report for the integrable families applicable to
/// the given parameters. Returns the text and whether every quantity
/// expected to be conserved stayed within `tol` (brackets within 1e-10).
fn integrals_report(
    params: &SystemParams,
    start: &PhaseState<f64>,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<(String, bool), CliError> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = (steps / 2000).max(1);
    let cfg = IntegratorConfig::new(dt, t_end, Scheme::StormerVerlet2, stride)?;
    let traj = integrate(params, start, &cfg)?;

    let drift_of = |obs: &Observable| -> Result<f64, CliError> {
        let base = eval_observable(obs, params, &traj.states[0])?;
        let mut max = 0.0f64;
        for state in &traj.states[1..] {
            max = max.max((eval_observable(obs, params, state)? - base).abs());
        }
        Ok(max)
    };
    let bracket_of = |obs: &Observable| -> Result<f64, CliError> {
        Ok(poisson_bracket(&Observable::Hamiltonian, obs, params, start)?)
    };

    let mut text = String::from("integrals-report\n");
    text.push_str(&format!("m: {}\n", params.m));
    text.push_str(&format!("k: {}\n", params.k));
    text.push_str(&format!("epsilon: {:+}\n", params.epsilon));
    let mu_list: Vec<String> = params.mu.iter().map(|x| fmt_f64(*x)).collect();
    text.push_str(&format!("mu: [{}]\n", mu_list.join(", ")));
    text.push_str(&format!("t-end: {}\n", fmt_f64(t_end)));
    text.push_str(&format!("dt: {}\n", fmt_f64(dt)));

    let mut pass = true;
    let h_drift = energy_drift(&traj)?;
    pass &= h_drift <= tol;
    text.push_str(&format!("integral: H drift={}\n", fmt_f64(h_drift)));

    let equal_mu = params.mu.iter().all(|&x| x == params.mu[0]);
    let mut any_family = false;

    if params.k == 2 {
        any_family = true;
        let mu_min = params.mu.iter().cloned().fold(f64::INFINITY, f64::min);
        for j in 1..params.m.max(2) {
            let s = mu_min - j as f64;
            let printed = Observable::Deformation(s);
            let corrected = Observable::DeformationCorrected(s);
            let drift_printed = drift_of(&printed)?;
            let drift_corrected = drift_of(&corrected)?;
            // The plus-variant of the quartic term is conserved for the
            // attractive sign, the minus-variant for the repulsive sign.
            let (conserved_name, conserved_drift, conserved_obs) = if params.epsilon == -1 {
                ("printed", drift_printed, &printed)
            } else {
                ("corrected", drift_corrected, &corrected)
            };
            let bracket = bracket_of(conserved_obs)?;
            pass &= conserved_drift <= tol && bracket.abs() <= 1e-10;
            text.push_str(&format!(
                "integral: Deformation(s={}) variant=printed drift={}\n",
                fmt_f64(s),
                fmt_f64(drift_printed)
            ));
            text.push_str(&format!(
                "integral: Deformation(s={}) variant=corrected drift={}\n",
                fmt_f64(s),
                fmt_f64(drift_corrected)
            ));
            text.push_str(&format!(
                "bracket: {{H, Deformation(s={})}} variant={} value={}\n",
                fmt_f64(s),
                conserved_name,
                fmt_f64(bracket)
            ));
            text.push_str(&format!(
                "discrepancy: s={} conserved-variant={} sign-flip-of-quadratic-term drift-ratio={}\n",
                fmt_f64(s),
                conserved_name,
                fmt_f64(if conserved_drift > 0.0 {
                    drift_printed.max(drift_corrected) / conserved_drift.max(1e-300)
                } else {
                    f64::INFINITY
                })
            ));
        }
    }
    if equal_mu && params.m >= 2 {
        any_family = true;
        for i in 1..params.m {
            let obs = Observable::Angular(i);
            let drift = drift_of(&obs)?;
            let bracket = bracket_of(&obs)?;
            pass &= drift <= tol && bracket.abs() <= 1e-10;
            text.push_str(&format!(
                "integral: Angular({i}) drift={}\n",
                fmt_f64(drift)
            ));
            text.push_str(&format!(
                "bracket: {{H, Angular({i})}} value={}\n",
                fmt_f64(bracket)
            ));
        }
    }
    if !any_family {
        text.push_str("integral-family: none-beyond-H\n");
    }
    text.push_str(&format!("verdict: {}\n", if pass { "pass" } else { "FAIL" }));
    Ok((text, pass))
}
