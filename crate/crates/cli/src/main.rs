use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deform_core::analysis::{self, Format, TraceOptions};
use deform_core::cohomology;
use deform_core::{Domain, Error, OneForm, Point, DEFAULT_EXCLUSION_RADIUS, DEFAULT_RTOL, DEFAULT_SAMPLES, DEFAULT_TOL};

/// Classify and solve M dx + N dy = 0 on a punctured rectangle.
#[derive(Parser)]
#[command(name = "deform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: classification, integrating factor, potential, tag.
    Analyze {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_RTOL)]
        rtol: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Periods around each puncture (closed forms only).
    Periods {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = DEFAULT_RTOL)]
        rtol: f64,
    },
    /// Trace integral curves and write them as csv, svg or json.
    Curves {
        #[command(flatten)]
        form: FormArgs,
        /// Seed point x,y (repeatable); defaults to a 3x3 grid.
        #[arg(long = "seed", value_parser = parse_point, allow_hyphen_values = true)]
        seeds: Vec<Point>,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FormArgs {
    /// Coefficient of dx.
    #[arg(long = "M", allow_hyphen_values = true)]
    m: String,
    /// Coefficient of dy.
    #[arg(long = "N", allow_hyphen_values = true)]
    n: String,
    /// xmin,xmax,ymin,ymax
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    rect: [f64; 4],
    /// Puncture px,py (repeatable).
    #[arg(long = "puncture", value_parser = parse_point, allow_hyphen_values = true)]
    punctures: Vec<Point>,
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_RADIUS)]
    exclusion_radius: f64,
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", values.len()));
    }
    Ok(values)
}

fn parse_rect(s: &str) -> Result<[f64; 4], String> {
    let v = parse_numbers(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn parse_point(s: &str) -> Result<Point, String> {
    let v = parse_numbers(s, 2)?;
    Ok(Point::new(v[0], v[1]))
}

enum Failure {
    Invalid(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidDomain(_) | Error::OutsideDomain(_) => {
                Failure::Invalid(e.to_string())
            }
            other => Failure::Computation(other.to_string()),
        }
    }
}

impl FormArgs {
    fn build(&self) -> Result<(OneForm, Domain), Failure> {
        let form = OneForm::parse(&self.m, &self.n)?;
        let [xmin, xmax, ymin, ymax] = self.rect;
        let domain = Domain::new(xmin, xmax, ymin, ymax, self.punctures.clone(), self.exclusion_radius)?;
        Ok((form, domain))
    }
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Computation(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            form,
            tol,
            rtol,
            samples,
            out,
        } => {
            let (w, u) = form.build()?;
            let opts = analysis::Options {
                tol,
                rtol,
                samples,
                ..analysis::Options::default()
            };
            let report = analysis::analyze(&w, &u, &opts)?;
            write_or_print(&report.to_json(), out.as_ref())
        }
        Command::Periods { form, rtol } => {
            let (w, u) = form.build()?;
            let periods = cohomology::periods(&w, &u, rtol)?;
            write_or_print(&analysis::json::to_string(&periods), None)
        }
        Command::Curves {
            form,
            seeds,
            step,
            max_steps,
            format,
            out,
        } => {
            let (w, u) = form.build()?;
            if !(step > 0.0) {
                return Err(Failure::Invalid(format!("step must be positive, got {step}")));
            }
            let seeds = if seeds.is_empty() { analysis::default_seeds(&u) } else { seeds };
            if let Some(bad) = seeds.iter().find(|s| !u.is_admissible(**s)) {
                return Err(Failure::Invalid(format!("seed ({}, {}) is outside the domain", bad.x, bad.y)));
            }
            let report = analysis::analyze(&w, &u, &analysis::Options::default())?;
            let opts = TraceOptions {
                step,
                max_steps,
                ..TraceOptions::default()
            };
            let traces = analysis::trace_curves(&w, &u, &seeds, &opts, report.potential.as_ref())?;
            analysis::emit_traces(&traces, &u, format, &out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
