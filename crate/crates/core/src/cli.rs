//! The `iet` command line.
//!
//! Every subcommand prints one JSON document (keys in a fixed order,
//! rationals as `"p/q"`) holding the command name, the seed and the
//! result; `eval` prints the bare value. Exit codes: 0 on success, 2 when
//! the mathematics says no (a tie, no edge, no closing parameter, ...), 1
//! for bad input or flags.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::closing::close_at_point;
use crate::edges::{
    default_gap, estimate_full_measure, find_virtual_edges, max_disjoint_edges_with_gap, probe_bk, ClosingCriterion,
    MeasureConfig,
};
use crate::error::{Error, Result};
use crate::induction::{check_property_c, default_max_steps, induce, rauzy_orbit};
use crate::io::{load_flow, load_iet};
use crate::rational::{format_rational, parse_rational, Rational};

const SCHEMAS: &str = "\
File formats (rationals are strings \"p/q\"):
  iet.json   {\"lengths\": [\"2/3\", \"1/3\"], \"permutation\": [2, 1]}
             permutation[i] is the position (1-based) of interval i in the image
  flow.json  {\"base\": <iet>, \"roof\": [\"1/1\", \"1/1\"],
              \"singular_points\": [\"1/2\"], \"singularities\": 1}
             one roof value per listed base interval; the last two keys are optional

Exit codes: 0 success, 1 usage or input error, 2 domain outcome
(TieEncountered, NoEdgeInNeighborhood, NoClosingInRange, ...).
The environment variable IET_WORKERS sets the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "iet", version, about = "Exact interval exchanges, Rauzy induction and twist-closing", after_help = SCHEMAS)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice; echoed into the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E^n(x).
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        x: Rational,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
    },
    /// First-return map to [0, b).
    Induce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        b: Rational,
        /// Defaults to 10 (m + base/b).
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Rauzy–Veech orbit, optionally compared with direct induction.
    Rauzy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Check at every step that the Rauzy map equals the induced map.
        #[arg(long)]
        check_induced: bool,
    },
    /// Exact families of virtual orthogonal edges.
    Edges {
        #[arg(long)]
        input: PathBuf,
        /// Gap between consecutive witness edges.
        #[arg(long, value_parser = rational_arg)]
        gap: Option<Rational>,
    },
    /// Depth-bounded probe of the B_k edge requirement.
    Probe {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long)]
        depth: usize,
        /// Comma-separated decreasing scales, e.g. 1/2,1/4,1/8.
        #[arg(long, value_delimiter = ',', value_parser = rational_arg)]
        scales: Option<Vec<Rational>>,
    },
    /// Monte Carlo estimate of the certified fraction.
    Measure {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        criterion: CriterionArgs,
        /// Lengths are multiples of 1/resolution.
        #[arg(long, default_value_t = 1_000_000)]
        resolution: u64,
        /// Per-sample rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Close orbits near a point of a suspension flow.
    Close {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        point: Rational,
        #[arg(long, allow_hyphen_values = true, default_value_t = -3)]
        chi: i64,
        /// Defaults to the number of singularities of the flow, at least 1.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 3)]
        shrink_steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Negative values twist the other way.
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        drift_rate: f64,
        /// Crossings of every closed orbit.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    /// Euler characteristic (signed).
    #[arg(long, allow_hyphen_values = true, default_value_t = -3)]
    pub chi: i64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Number of singularities K.
    #[arg(long, default_value_t = 0)]
    pub singularities: u32,
}

impl CriterionArgs {
    fn criterion(&self) -> Result<ClosingCriterion> {
        ClosingCriterion::new(self.chi, self.singularities, self.k)
    }
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    result: T,
}

fn workers_from_env() {
    if let Some(n) = std::env::var("IET_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call fails harmlessly once the pool exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let text = err.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    workers_from_env();
    match execute(&config, stdout) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            if err.is_domain() {
                2
            } else {
                1
            }
        }
    }
}

fn emit<T: Serialize>(config: &RunConfig, command: &str, result: T, stdout: &mut dyn Write) -> Result<()> {
    let report = Report { command, seed: config.seed, result };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &config.output {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    match &config.command {
        Command::Eval { input, x, n } => {
            let e = load_iet(input)?;
            let y = e.iterate(x, *n)?;
            let text = format!("{}\n", format_rational(&y));
            match &config.output {
                Some(path) => File::create(path)?.write_all(text.as_bytes())?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(())
        }
        Command::Induce { input, b, max_steps } => {
            let e = load_iet(input)?;
            if b <= &Rational::default() || b > e.base_length() {
                return Err(Error::InvalidArgument(format!("--b must lie in (0, {}]", format_rational(e.base_length()))));
            }
            let steps = max_steps.unwrap_or_else(|| default_max_steps(&e, b));
            emit(config, "induce", induce(&e, b, steps)?, stdout)
        }
        Command::Rauzy { input, depth, check_induced } => {
            let e = load_iet(input)?;
            if *depth == 0 {
                return Err(Error::InvalidArgument("--depth must be at least 1".into()));
            }
            if *check_induced {
                emit(config, "rauzy", check_property_c(&e, *depth)?, stdout)
            } else {
                emit(config, "rauzy", rauzy_orbit(&e, *depth)?, stdout)
            }
        }
        Command::Edges { input, gap } => {
            let e = load_iet(input)?;
            let gap = gap.clone().unwrap_or_else(default_gap);
            if gap <= Rational::default() {
                return Err(Error::InvalidArgument("--gap must be positive".into()));
            }
            #[derive(Serialize)]
            struct EdgeReport {
                families: Vec<crate::edges::EdgeFamily>,
                max_disjoint: crate::edges::DisjointEdges,
            }
            let report = EdgeReport { families: find_virtual_edges(&e), max_disjoint: max_disjoint_edges_with_gap(&e, &gap) };
            emit(config, "edges", report, stdout)
        }
        Command::Probe { input, criterion, depth, scales } => {
            let criterion = criterion.criterion()?;
            if *depth == 0 {
                return Err(Error::InvalidArgument("--depth must be at least 1".into()));
            }
            let e = load_iet(input)?;
            emit(config, "probe", probe_bk(&e, &criterion, *depth, scales.as_deref())?, stdout)
        }
        Command::Measure { m, samples, depth, criterion, resolution, csv } => {
            let criterion = criterion.criterion()?;
            if *depth == 0 {
                return Err(Error::InvalidArgument("--depth must be at least 1".into()));
            }
            let mut measure = MeasureConfig::new(*m, criterion, *depth, *samples, config.seed);
            measure.resolution = *resolution;
            let report = estimate_full_measure(&measure)?;
            if let Some(path) = csv {
                report.write_csv(File::create(path)?)?;
            }
            emit(config, "measure", report, stdout)
        }
        Command::Close { flow, point, chi, k, shrink_steps, tolerance, drift_rate, trace_csv } => {
            let flow = load_flow(flow)?;
            let k = k.unwrap_or(flow.singularities.max(1));
            let criterion = ClosingCriterion::new(*chi, flow.singularities, k)?;
            if *shrink_steps == 0 || !(*tolerance > 0.0) || !drift_rate.is_finite() {
                return Err(Error::InvalidArgument(
                    "--shrink-steps must be at least 1, --tolerance positive and --drift-rate finite".into(),
                ));
            }
            let results = close_at_point(&flow, point, &criterion, *shrink_steps, *tolerance, *drift_rate)?;
            if let Some(path) = trace_csv {
                let mut w = csv::Writer::from_writer(File::create(path)?);
                w.write_record(["n", "crossing", "position", "time"])?;
                for r in &results {
                    for (i, c) in r.orbit_trace.iter().enumerate() {
                        w.write_record([r.n.to_string(), i.to_string(), c.position.to_string(), c.time.to_string()])?;
                    }
                }
                w.flush()?;
            }
            emit(config, "close", results, stdout)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("iet").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_prints_the_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rot13.json");
        std::fs::write(&path, r#"{"lengths": ["2/3", "1/3"], "permutation": [2, 1]}"#).unwrap();
        let (code, out, _) = run_args(&["eval", "--input", path.to_str().unwrap(), "--x", "1/2"]);
        assert_eq!((code, out.as_str()), (0, "5/6\n"));
        let (code, _, err) = run_args(&["eval", "--input", path.to_str().unwrap(), "--x", "3/2"]);
        assert_eq!(code, 2);
        assert!(err.contains("OutOfDomain"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&["eval"]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["eval", "--input", "/nonexistent.json", "--x", "1/2"]).0, 1);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("flow.json"));
    }
}
