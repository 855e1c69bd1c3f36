//! Command-line front end for the `gurlab` uncertainty-relation suite.
//!
//! Exit codes: 0 when every relation and agreement check passes, 1 when
//! any fails (or an engine rejects a battery state), 2 for usage and
//! configuration errors.

pub mod battery;
pub mod config;
pub mod summary;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Parser;
use gurlab::searcher::{minimize as run_minimize, sweep as run_sweep, write_sweep_csv};
use gurlab::{Error, Family, SearchProblem};

use battery::{Engines, Reference};
use config::{Cli, Command, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &Reference, stdout, stderr)
}

/// [`run`] with an explicit moment source.
pub fn run_with<I, T>(args: I, engines: &dyn Engines, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(msg) => return usage(stderr, msg),
    };
    match cfg.command {
        Command::Verify => verify(&cfg, engines, stdout, stderr),
        Command::Sweep => sweep(&cfg, stdout, stderr),
        Command::Minimize => minimize(&cfg, stdout, stderr),
        Command::Report => report(&cfg, stdout, stderr),
    }
}

fn usage(stderr: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    EXIT_USAGE
}

/// Writes to `--out` when given, standard output otherwise.
fn emit<F>(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write, body: F) -> Option<i32>
where
    F: FnOnce(&mut dyn Write) -> gurlab::Result<()>,
{
    let result = match &cfg.out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                body(&mut w).and_then(|_| w.flush().map_err(Error::from))
            }
            Err(e) => return Some(usage(stderr, format!("cannot create {}: {e}", path.display()))),
        },
        None => body(stdout),
    };
    match result {
        Ok(()) => None,
        Err(e) => {
            let _ = writeln!(stderr, "error: writing output: {e}");
            Some(EXIT_USAGE)
        }
    }
}

fn verify(cfg: &RunConfig, engines: &dyn Engines, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match battery::run(cfg, engines) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "FAIL engine rejected a battery state: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = emit(cfg, stdout, stderr, |w| match cfg.format {
        Format::Json => gurlab::report::write_jsonl(w, &outcome.reports),
        Format::Csv => gurlab::report::write_csv(w, &outcome.reports),
    });
    if let Some(code) = written {
        return code;
    }
    for c in &outcome.checks {
        let _ = writeln!(stderr, "{}", c.line());
    }
    let failing = outcome.reports.iter().filter(|r| !r.holds).count();
    let _ = writeln!(
        stderr,
        "verify: {} reports ({failing} failing), {} checks",
        outcome.reports.len(),
        outcome.checks.len()
    );
    match outcome.first_failure() {
        Some(f) => {
            let _ = writeln!(stderr, "first failure: {f}");
            EXIT_FAILURE
        }
        None => EXIT_OK,
    }
}

fn family_for(cfg: &RunConfig, allow_random: bool) -> Result<Family, String> {
    let family = match cfg.family.as_deref().unwrap_or("two_mode_squeezed") {
        "two_mode_squeezed" => Family::TwoModeSqueezed,
        "correlated_triple" => Family::CorrelatedTriple,
        "grid_correlated_gaussian" => Family::grid_correlated_gaussian(),
        "random_gaussian" if allow_random => {
            Family::RandomGaussian { n: cfg.particles, squeeze_max: cfg.squeeze_max }
        }
        "random_gaussian" => {
            return Err("sweep takes a one-parameter family; random_gaussian is available to minimize".into())
        }
        other => return Err(format!("unknown family '{other}'")),
    };
    let engine = family.engine();
    let allowed = match engine {
        gurlab::Engine::Gaussian => cfg.engine.gaussian(),
        gurlab::Engine::Grid => cfg.engine.grid(),
    };
    if !allowed {
        return Err(format!("family {} needs the {} engine", family.name(), engine.as_str()));
    }
    Ok(family)
}

pub const DEFAULT_B_GRID: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

fn sweep(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let family = match family_for(cfg, false) {
        Ok(f) => f,
        Err(msg) => return usage(stderr, msg),
    };
    let grid: Vec<Vec<f64>> = match (&family, &cfg.r_grid) {
        // The grid family sweeps the coupling b at a = 1.
        (Family::GridCorrelatedGaussian { .. }, g) => {
            g.clone().unwrap_or_else(|| DEFAULT_B_GRID.to_vec()).into_iter().map(|b| vec![1.0, b]).collect()
        }
        (Family::CorrelatedTriple, None) => battery::DEFAULT_TRIPLE_GRID.iter().map(|&r| vec![r]).collect(),
        (_, None) => battery::DEFAULT_TMS_GRID.iter().map(|&r| vec![r]).collect(),
        (_, Some(g)) => g.iter().map(|&r| vec![r]).collect(),
    };
    let table = match run_sweep(&family, &grid, cfg.hbar(), cfg.tol) {
        Ok(t) => t,
        Err(e @ Error::InvalidArgument(_)) => return usage(stderr, e),
        Err(e) => {
            let _ = writeln!(stderr, "FAIL engine rejected a sweep point: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = emit(cfg, stdout, stderr, |w| match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &table)?;
            writeln!(w)?;
            Ok(())
        }
        Format::Csv => write_sweep_csv(w, &table),
    });
    if let Some(code) = written {
        return code;
    }
    let failing = table
        .rows
        .iter()
        .flat_map(|r| r.outcomes.iter().filter_map(|o| o.report()))
        .find(|r| !r.holds);
    let _ = writeln!(stderr, "sweep: {} rows", table.rows.len());
    match failing {
        Some(r) => {
            let _ = writeln!(stderr, "first failure: {} on {} (slack {:e})", r.key(), r.state_descriptor, r.slack);
            EXIT_FAILURE
        }
        None => EXIT_OK,
    }
}

fn minimize(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let family = match family_for(cfg, true) {
        Ok(f) => f,
        Err(msg) => return usage(stderr, msg),
    };
    let mut problem = match SearchProblem::new(family, cfg.objective, cfg.hbar()) {
        Ok(p) => p,
        Err(e) => return usage(stderr, e),
    };
    if let Some(t) = cfg.tol {
        problem.tol = t;
    }
    let result = match run_minimize(&problem, cfg.budget, cfg.seed) {
        Ok(r) => r,
        Err(e) => return usage(stderr, e),
    };
    let written = emit(cfg, stdout, stderr, |w| match cfg.format {
        Format::Json => {
            writeln!(w, "{}", result.to_json()?)?;
            Ok(())
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.serialize(summary::MinimizeRow::from(&result))
                .map_err(|e| Error::Format(e.to_string()))?;
            c.flush()?;
            Ok(())
        }
    });
    if let Some(code) = written {
        return code;
    }
    let _ = writeln!(
        stderr,
        "minimize: best {:e} (bound {:e}, hur reference {:e}) after {} evaluations",
        result.best_value, result.bound, result.hur_reference, result.evaluations
    );
    if result.holds {
        EXIT_OK
    } else {
        let _ = writeln!(stderr, "first failure: best value below bound or no valid point");
        EXIT_FAILURE
    }
}

fn report(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let path = cfg.input.as_ref().expect("report always carries an input path");
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return usage(stderr, format!("cannot read {}: {e}", path.display())),
    };
    let input = match summary::parse_input(&text) {
        Ok(i) => i,
        Err(msg) => return usage(stderr, format!("{}: {msg}", path.display())),
    };
    let text = summary::render(&input);
    match emit(cfg, stdout, stderr, |w| Ok(w.write_all(text.as_bytes())?)) {
        Some(code) => code,
        None => EXIT_OK,
    }
}
