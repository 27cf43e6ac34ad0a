//! `hyperagm` command line: JSON in, JSON out.
//!
//! Exit codes: 0 success, 1 verification failure or numerical breakdown,
//! 2 malformed input or usage error. Errors are written to stderr as
//! `{"error": {"code": …, "message": …}}`.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use hyperagm::agm::{agm_limit, MeanVector, DEFAULT_AGM_REL_TOL};
use hyperagm::calabi_yau::{cy_comparison, EXPERIMENTAL_REL_TOL};
use hyperagm::error::Error;
use hyperagm::genus2::{
    branch_points_from_means, closed_form_limit, moduli_from_means, ratio_residual, Genus2Quadruple,
};
use hyperagm::json::FromJson;
use hyperagm::hyperelliptic::{normalized_tau, period_matrices, BranchPoints, DEFAULT_PERIOD_REL_TOL};
use hyperagm::theta::{duplication_residual, theta_vector, Tau, DEFAULT_THETA_ABS_TOL};
use hyperagm::thomae::{initial_data, thomae_comparison};
use hyperagm::verify::{verify_all, RunConfig, THOMAE_TOL};

/// Directory for `verify-all` reports when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "HYPERAGM_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperagm", version, about = "Generalized AGM and hyperelliptic period computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the 2^g-term mean: {"genus": g, "values": {"00": …}}
    Agm {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_AGM_REL_TOL)]
        rel_tol: f64,
    },
    /// Theta constants of a period matrix: {"genus": g, "entries": [[re, im], …]}
    Theta {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THETA_ABS_TOL)]
        abs_tol: f64,
    },
    /// Period matrices A, B and τ of a branch point set: {"points": […]}
    Periods {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PERIOD_REL_TOL)]
        rel_tol: f64,
    },
    /// AGM initial data from branch points
    ThomaeInit {
        input: Option<PathBuf>,
        /// Also compare against theta constants of the period matrix
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_PERIOD_REL_TOL)]
        rel_tol: f64,
    },
    /// Period of the double cover branched along the Veronese hyperplanes
    CyPeriod {
        input: Option<PathBuf>,
        /// Tolerance; defaults to 1e-10, or 1e-3 for genus 3
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        experimental_genus3: bool,
    },
    /// Closed-form genus-2 pipeline: {"a00": …, "a01": …, "a10": …, "a11": …}
    Genus2 {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PERIOD_REL_TOL)]
        rel_tol: f64,
    },
    /// Run every seeded verification check
    VerifyAll {
        /// Largest genus to sample (1..=3)
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// JSON file with RunConfig fields
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report file; defaults to $HYPERAGM_OUTPUT_DIR/verify-all-seed<N>.json when that is set
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: "input",
            message: message.into(),
            exit: EXIT_INPUT,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "code": self.code, "message": self.message } })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::Convergence { .. } | Error::Quadrature { .. } | Error::LinearAlgebra(_) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        };
        Self {
            code: e.code(),
            message: e.to_string(),
            exit,
        }
    }
}

type CmdResult = Result<(Value, i32), CliError>;

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| CliError::input(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed JSON input: {e}")))
}

fn parse_validated<T: FromJson>(text: &str) -> Result<T, CliError> {
    Ok(T::from_json(text)?)
}

fn matrix_rows(m: &hyperagm::nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_agm(text: &str, rel_tol: f64) -> CmdResult {
    let a: MeanVector = parse_validated(text)?;
    let trace = agm_limit(&a, rel_tol)?;
    Ok((
        json!({
            "genus": a.genus(),
            "limit": trace.limit,
            "iterations": trace.iterations(),
            "spreads": trace.spreads,
        }),
        EXIT_OK,
    ))
}

fn cmd_theta(text: &str, abs_tol: f64) -> CmdResult {
    let tau: Tau = parse_validated(text)?;
    let theta = theta_vector(&tau, abs_tol)?;
    let dup = duplication_residual(&tau, abs_tol)?;
    Ok((
        json!({ "theta": theta, "duplication_residual": dup }),
        EXIT_OK,
    ))
}

fn cmd_periods(text: &str, rel_tol: f64) -> CmdResult {
    let p: BranchPoints = parse_validated(text)?;
    let pp = period_matrices(&p, rel_tol)?;
    let tau = normalized_tau(&pp)?;
    Ok((
        json!({
            "genus": p.genus(),
            "t": pp.table(),
            "a": matrix_rows(pp.a()),
            "b_imag": matrix_rows(pp.b_imag()),
            "det_a": pp.det_a(),
            "tau": tau,
        }),
        EXIT_OK,
    ))
}

fn cmd_thomae_init(text: &str, verify: bool, rel_tol: f64) -> CmdResult {
    let p: BranchPoints = parse_validated(text)?;
    let a = initial_data(&p)?;
    let mut out = json!({ "genus": p.genus(), "means": a });
    let mut exit = EXIT_OK;
    if verify {
        let cmp = thomae_comparison(&p, rel_tol)?;
        let pass = cmp.residual <= THOMAE_TOL;
        if !pass {
            exit = EXIT_FAILURE;
        }
        out["verification"] = json!({
            "theta_side": cmp.lhs,
            "product_side": cmp.rhs,
            "residual": cmp.residual,
            "tolerance": THOMAE_TOL,
            "pass": pass,
        });
    }
    Ok((out, exit))
}

fn cmd_cy_period(text: &str, rel_tol: Option<f64>, experimental: bool) -> CmdResult {
    let p: BranchPoints = parse_validated(text)?;
    let default = if p.genus() >= 3 {
        EXPERIMENTAL_REL_TOL
    } else {
        DEFAULT_PERIOD_REL_TOL
    };
    let cmp = cy_comparison(&p, rel_tol.unwrap_or(default), experimental)?;
    Ok((
        json!({
            "genus": cmp.genus,
            "cy_period": cmp.cy_period,
            "abs_det_a": cmp.abs_det_a,
            "mean": cmp.mean,
            "pushforward_residual": cmp.pushforward_residual,
            "mean_residual": cmp.mean_residual,
        }),
        EXIT_OK,
    ))
}

fn cmd_genus2(text: &str, rel_tol: f64) -> CmdResult {
    let a: Genus2Quadruple = parse_validated(text)?;
    let moduli = moduli_from_means(&a)?;
    let p = branch_points_from_means(&a)?;
    let ratio = ratio_residual(&a, &p)?;
    let iterated = agm_limit(&a.to_mean_vector(), DEFAULT_AGM_REL_TOL)?;
    let closed = closed_form_limit(&a, rel_tol)?;
    Ok((
        json!({
            "quadruple": a,
            "moduli": moduli,
            "branch_points": p,
            "mu_iterated": iterated.limit,
            "iterations": iterated.iterations(),
            "mu_closed_form": closed.det_form,
            "mu_closed_form_expanded": closed.expanded_form,
            "abs_det_a": closed.abs_det_a,
            "residuals": {
                "ratio": ratio,
                "closed_forms": (closed.det_form - closed.expanded_form).abs() / closed.det_form,
                "closed_form_vs_iterated": (closed.det_form - iterated.limit).abs() / iterated.limit,
            },
        }),
        EXIT_OK,
    ))
}

fn cmd_verify_all(
    genus: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    config_path: Option<PathBuf>,
    output: Option<PathBuf>,
    env_dir: Option<OsString>,
) -> CmdResult {
    let mut config = match &config_path {
        Some(path) => {
            let text = read_input(Some(path), &mut std::io::empty())?;
            parse::<RunConfig>(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(g) = genus {
        config.max_genus = g;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(n) = samples {
        config.samples = n;
    }
    if output.is_some() {
        config.output = output;
    }
    if config.output.is_none() {
        if let Some(dir) = env_dir.filter(|d| !d.is_empty()) {
            config.output = Some(PathBuf::from(dir).join(format!("verify-all-seed{}.json", config.seed)));
        }
    }
    let report = verify_all(&config)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    if let Some(path) = &config.output {
        let text = serde_json::to_string_pretty(&value).expect("report serializes") + "\n";
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    }
    let exit = if report.all_pass() { EXIT_OK } else { EXIT_FAILURE };
    Ok((value, exit))
}

/// Parses `argv` (including the program name), runs the command, and returns
/// the process exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError {
                code: "usage",
                message: e.to_string().trim_end().to_string(),
                exit: EXIT_INPUT,
            };
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit;
        }
    };

    let result = match cli.command {
        Command::Agm { input, rel_tol } => {
            read_input(input.as_deref(), stdin).and_then(|t| cmd_agm(&t, rel_tol))
        }
        Command::Theta { input, abs_tol } => {
            read_input(input.as_deref(), stdin).and_then(|t| cmd_theta(&t, abs_tol))
        }
        Command::Periods { input, rel_tol } => {
            read_input(input.as_deref(), stdin).and_then(|t| cmd_periods(&t, rel_tol))
        }
        Command::ThomaeInit { input, verify, rel_tol } => {
            read_input(input.as_deref(), stdin).and_then(|t| cmd_thomae_init(&t, verify, rel_tol))
        }
        Command::CyPeriod {
            input,
            rel_tol,
            experimental_genus3,
        } => read_input(input.as_deref(), stdin)
            .and_then(|t| cmd_cy_period(&t, rel_tol, experimental_genus3)),
        Command::Genus2 { input, rel_tol } => {
            read_input(input.as_deref(), stdin).and_then(|t| cmd_genus2(&t, rel_tol))
        }
        Command::VerifyAll {
            genus,
            seed,
            samples,
            config,
            output,
        } => cmd_verify_all(genus, seed, samples, config, output, std::env::var_os(OUTPUT_DIR_ENV)),
    };

    match result {
        Ok((value, exit)) => {
            let text = serde_json::to_string_pretty(&value).expect("values serialize");
            let _ = writeln!(stdout, "{text}");
            exit
        }
        Err(err) => {
            let _ = writeln!(stderr, "{}", err.to_json());
            err.exit
        }
    }
}
