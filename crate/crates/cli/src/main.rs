use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use stsm::ensemble::{ensemble, sample_with, Arrangement, DistributionReport, Preparation};
use stsm::grid::{DEFAULT_N_PHI, DEFAULT_N_THETA};
use stsm::interferometer::{
    delayed_choice_report_with, run_experiment_with, Layout, OpticalSetup, Placement,
    PlacementTally, RunSummary,
};
use stsm::maxent::estimate;
use stsm::{BlochDirection, Execution, Sign};

/// Configuration ensembles, maximum-entropy state estimation and
/// beamsplitter simulations.
#[derive(Debug, Parser)]
#[command(name = "stsm", version)]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-entropy estimate from a measured <sigma_z>.
    Estimate {
        #[arg(long, allow_negative_numbers = true)]
        sigma_z: f64,
        #[arg(long, default_value_t = DEFAULT_N_THETA)]
        n_theta: usize,
        #[arg(long, default_value_t = DEFAULT_N_PHI)]
        n_phi: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Configuration distribution of a single-qubit or Bell arrangement.
    Ensemble {
        /// Prepared eigenstate as `theta,phi,sign` (radians).
        #[arg(
            long,
            default_value = "0,0,+",
            allow_hyphen_values = true,
            conflicts_with = "bell"
        )]
        prep: String,
        /// Measured direction as `theta,phi`.
        #[arg(long, allow_hyphen_values = true)]
        obs: String,
        /// Second observable of a Bell arrangement.
        #[arg(long, allow_hyphen_values = true, requires = "bell")]
        obs2: Option<String>,
        /// Measure both halves of the Bell pair.
        #[arg(long)]
        bell: bool,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Single-photon interferometer runs.
    Interfere {
        /// direct, single-bs, double-bs or delayed-choice
        #[arg(long)]
        layout: String,
        /// after-first-bs, after-second-bs, or random (delayed-choice only)
        #[arg(long)]
        placement: Option<String>,
        #[arg(long)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Estimator quantities over an evenly spaced range of <sigma_z>.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        sigma_z_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        sigma_z_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_N_THETA)]
        n_theta: usize,
        #[arg(long, default_value_t = DEFAULT_N_PHI)]
        n_phi: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<stsm::Error> for Failure {
    fn from(e: stsm::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// 17 significant digits, locale independent.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn parse_floats(s: &str, what: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{what}: {t:?} is not a number")))
        })
        .collect()
}

fn parse_direction(s: &str, what: &str) -> Outcome<BlochDirection> {
    match parse_floats(s, what)?.as_slice() {
        [theta, phi] => Ok(BlochDirection::new(*theta, *phi)?),
        _ => Err(Failure::Usage(format!(
            "{what}: expected theta,phi, got {s:?}"
        ))),
    }
}

fn parse_preparation(s: &str) -> Outcome<Preparation> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "--prep: expected theta,phi,sign, got {s:?}"
        )));
    }
    let direction = parse_direction(&parts[..2].join(","), "--prep")?;
    Ok(Preparation::new(direction, Sign::parse(parts[2])?))
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>, comment: Option<String>) -> Outcome<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = comment.map(|c| format!("# {c}\n")).unwrap_or_default();
    out.push_str(&String::from_utf8_lossy(&body));
    Ok(out)
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_estimate(sigma_z: f64, n_theta: usize, n_phi: usize, format: Format) -> Outcome<String> {
    let report = estimate(sigma_z, n_theta, n_phi)?.report();
    match format {
        Format::Json => Ok(pretty(&report)),
        Format::Csv => {
            let rows = (0..4)
                .map(|k| {
                    vec![
                        (k / 2).to_string(),
                        (k % 2).to_string(),
                        num(report.rho[k][0]),
                        num(report.rho[k][1]),
                    ]
                })
                .collect();
            let comment = format!(
                "sigma_z={} lambda={} n_theta={} n_phi={}",
                num(report.sigma_z),
                num(report.lambda),
                report.grid.n_theta,
                report.grid.n_phi
            );
            csv_text(&["row", "col", "re", "im"], rows, Some(comment))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_ensemble(
    prep: &str,
    obs: &str,
    obs2: Option<&str>,
    bell: bool,
    samples: Option<u64>,
    seed: u64,
    format: Format,
) -> Outcome<String> {
    let first = parse_direction(obs, "--obs")?;
    let arrangement = if bell {
        let second = obs2.ok_or_else(|| Failure::Usage("--bell needs --obs2".into()))?;
        Arrangement::bell(first, parse_direction(second, "--obs2")?)
    } else {
        Arrangement::single(parse_preparation(prep)?, first)
    };
    let dist = ensemble(&arrangement)?;
    let mut report = DistributionReport::new(&dist);
    if let Some(n) = samples {
        let drawn = sample_with(&dist, seed, n, Execution::Parallel)?;
        report = report.with_sample(seed, &drawn);
    }
    match format {
        Format::Json => Ok(pretty(&report)),
        Format::Csv => {
            let mut header = vec!["label", "probability"];
            if report.counts.is_some() {
                header.push("count");
            }
            let rows = report
                .labels
                .iter()
                .enumerate()
                .map(|(k, label)| {
                    let mut row = vec![label.clone(), num(report.probabilities[k])];
                    if let Some(counts) = &report.counts {
                        row.push(counts[k].to_string());
                    }
                    row
                })
                .collect();
            let comment = report
                .seed
                .map(|s| format!("seed={s} samples={}", report.samples.unwrap_or(0)));
            csv_text(&header, rows, comment)
        }
    }
}

fn cmd_interfere(
    layout: &str,
    placement: Option<&str>,
    runs: u64,
    seed: u64,
    format: Format,
) -> Outcome<String> {
    let layout = Layout::parse(layout)?;
    let summary = match (layout, placement) {
        (Layout::DelayedChoice, Some("random")) => {
            delayed_choice_report_with(seed, runs, Execution::Parallel)?.summary(seed)
        }
        (_, placement) => {
            let placement = placement.map(Placement::parse).transpose()?;
            let setup = OpticalSetup::new(layout, placement)?;
            let outcome = run_experiment_with(&setup, seed, runs, Execution::Parallel)?;
            let mut summary = RunSummary::new(&setup, seed, &outcome);
            if let Some(p) = placement {
                summary.by_placement = Some(vec![PlacementTally {
                    placement: p,
                    tally: outcome.tally,
                }]);
            }
            summary
        }
    };
    match format {
        Format::Json => Ok(pretty(&summary)),
        Format::Csv => {
            let row = |group: String, t: (u64, u64, u64, u64, u64)| {
                vec![
                    group,
                    t.0.to_string(),
                    t.1.to_string(),
                    t.2.to_string(),
                    t.3.to_string(),
                    t.4.to_string(),
                ]
            };
            let mut rows = vec![row(
                "all".into(),
                (
                    summary.n,
                    summary.detector_counts.d1,
                    summary.detector_counts.d2,
                    summary.path_counts.a,
                    summary.path_counts.b,
                ),
            )];
            for p in summary.by_placement.iter().flatten() {
                let t = &p.tally;
                rows.push(row(
                    p.placement.name().into(),
                    (
                        t.runs,
                        t.detector_counts.d1,
                        t.detector_counts.d2,
                        t.path_counts.a,
                        t.path_counts.b,
                    ),
                ));
            }
            let comment = format!("setup={} seed={seed}", summary.setup);
            csv_text(&["group", "n", "D1", "D2", "A", "B"], rows, Some(comment))
        }
    }
}

fn cmd_sweep(
    min: f64,
    max: f64,
    steps: usize,
    n_theta: usize,
    n_phi: usize,
    format: Format,
) -> Outcome<String> {
    let inside = |x: f64| x > -1.0 && x < 1.0;
    if !inside(min) || !inside(max) || !(min <= max) {
        return Err(Failure::Usage(format!(
            "sweep range [{min}, {max}] must satisfy -1 < min <= max < 1"
        )));
    }
    if steps < 2 {
        return Err(Failure::Usage(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    let h = (max - min) / (steps - 1) as f64;
    let mut reports = Vec::with_capacity(steps);
    for i in 0..steps {
        let sigma = if i == steps - 1 {
            max
        } else {
            min + h * i as f64
        };
        reports.push(estimate(sigma, n_theta, n_phi)?.report());
    }
    match format {
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| {
                    json!({
                        "sigma_z": r.sigma_z,
                        "lambda": r.lambda,
                        "Z": r.partition,
                        "entropy": r.entropy,
                        "rho00": r.rho[0][0],
                        "rho11": r.rho[3][0],
                    })
                })
                .collect();
            Ok(pretty(&rows))
        }
        Format::Csv => {
            let rows = reports
                .iter()
                .map(|r| {
                    [
                        r.sigma_z,
                        r.lambda,
                        r.partition,
                        r.entropy,
                        r.rho[0][0],
                        r.rho[3][0],
                    ]
                    .map(num)
                    .to_vec()
                })
                .collect();
            csv_text(
                &["sigma_z", "lambda", "Z", "entropy", "rho00", "rho11"],
                rows,
                None,
            )
        }
    }
}

fn run(cli: Cli) -> Outcome<String> {
    match cli.command {
        Command::Estimate {
            sigma_z,
            n_theta,
            n_phi,
            format,
        } => cmd_estimate(sigma_z, n_theta, n_phi, format),
        Command::Ensemble {
            prep,
            obs,
            obs2,
            bell,
            samples,
            seed,
            format,
        } => cmd_ensemble(&prep, &obs, obs2.as_deref(), bell, samples, seed, format),
        Command::Interfere {
            layout,
            placement,
            runs,
            seed,
            format,
        } => cmd_interfere(&layout, placement.as_deref(), runs, seed, format),
        Command::Sweep {
            sigma_z_min,
            sigma_z_max,
            steps,
            n_theta,
            n_phi,
            format,
        } => cmd_sweep(sigma_z_min, sigma_z_max, steps, n_theta, n_phi, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let text = match run(cli) {
        Ok(text) => text,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let written = match output {
        Some(path) => fs::write(&path, text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_failures_map_to_exit_three() {
        assert!(matches!(
            Failure::from(stsm::Error::NoConvergence("x".into())),
            Failure::Numerical(_)
        ));
        assert!(matches!(
            Failure::from(stsm::Error::OutOfRange(2.0)),
            Failure::Usage(_)
        ));
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn preparation_parsing() {
        let p = parse_preparation("3.141592653589793,0,-").unwrap();
        assert_eq!(p.sign, Sign::Minus);
        assert!(parse_preparation("0,0").is_err());
    }
}
