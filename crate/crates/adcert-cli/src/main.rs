//! `adcert`: evaluate, differentiate, classify, and census networks from
//! the command line.
//!
//! Exit codes: 0 success (and all census checks pass), 1 a verdict or bound
//! check failed, 2 I/O or configuration error.

use adcert::census::{self, Grid, ScanOptions, DEFAULT_POINT_CAP};
use adcert::certify::{classify, Verdict};
use adcert::fixtures::{self, FixtureSpec};
use adcert::network::Subject;
use adcert::oracle::OracleBudget;
use adcert::ad;
use adcert::rat::Rat;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "adcert", version, about = "Exact AD correctness certification for piecewise-polynomial networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Network config file (JSON).
    #[arg(long)]
    net: Option<PathBuf>,
    /// Built-in fixture, e.g. `intro_identity` or `thm3_bias_lb,M=16eq,n=3,a=2`.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    /// Deterministic seed for probe directions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra random probe directions (default 2*W + 8).
    #[arg(long)]
    directions: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the network output at a parameter point.
    Eval {
        #[command(flatten)]
        source: Source,
        /// Comma-separated free parameter values, e.g. `-1,0,1/2`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        decimal: bool,
    },
    /// Print the AD jacobian at a parameter point.
    Ad {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        decimal: bool,
    },
    /// Classify a parameter point (verdict + certificate).
    Classify {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Exhaustively classify a whole grid and verify the density bounds.
    Census {
        #[command(flatten)]
        source: Source,
        /// Grid: comma-separated rationals or `equispaced:lo:hi:count`
        /// (defaults to the fixture's own grid).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Write the report as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include one CSV row per grid point.
        #[arg(long)]
        log_points: bool,
        /// Downgrade unknown verdicts to a warning.
        #[arg(long)]
        allow_unknown: bool,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Maximum number of grid points.
        #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
        point_cap: u128,
        #[arg(long)]
        decimal: bool,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Print the applicable density-bound values for a grid.
    Bounds {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Write a fixture's network config and answer sheet.
    Fixture {
        /// Fixture spec, e.g. `thm7_ndf_lb_zeros,M=16eq,n=4,a=2`.
        spec: String,
        /// Output path for the network config JSON.
        #[arg(long)]
        out: PathBuf,
    },
}

struct Loaded {
    subject: Subject,
    answers: Option<fixtures::AnswerSheet>,
}

fn load_source(source: &Source) -> Result<Loaded, String> {
    match (&source.net, &source.fixture) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let subject = parse_subject(&text)?;
            Ok(Loaded {
                subject,
                answers: None,
            })
        }
        (None, Some(spec)) => {
            let spec = FixtureSpec::parse(spec).map_err(|e| e.to_string())?;
            let fixture = fixtures::fixture(&spec).map_err(|e| e.to_string())?;
            Ok(Loaded {
                subject: fixture.subject,
                answers: Some(fixture.answers),
            })
        }
        _ => Err("exactly one of --net and --fixture is required".into()),
    }
}

fn parse_subject(text: &str) -> Result<Subject, String> {
    let subject: Subject = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if subject.pins.is_empty() {
        return Ok(Subject::unpinned(subject.network));
    }
    Subject::with_pins(subject.network.clone(), subject.pins.clone()).map_err(|e| e.to_string())
}

fn parse_point(s: &str, want: usize) -> Result<Vec<Rat>, String> {
    let vals: Result<Vec<Rat>, _> = s.split(',').map(|f| f.trim().parse::<Rat>()).collect();
    let vals = vals.map_err(|e| e.to_string())?;
    if vals.len() != want {
        return Err(format!(
            "point has {} coordinates, the free parameter count is {want}",
            vals.len()
        ));
    }
    Ok(vals)
}

fn parse_grid(s: &str) -> Result<Vec<Rat>, String> {
    if let Some(rest) = s.strip_prefix("equispaced:") {
        let fields: Vec<&str> = rest.split(':').collect();
        if fields.len() != 3 {
            return Err(format!("expected equispaced:lo:hi:count, got {s:?}"));
        }
        let lo: Rat = fields[0].parse().map_err(|_| "bad lo".to_string())?;
        let hi: Rat = fields[1].parse().map_err(|_| "bad hi".to_string())?;
        let count: usize = fields[2].parse().map_err(|_| "bad count".to_string())?;
        return fixtures::equispaced(&lo, &hi, count);
    }
    s.split(',')
        .map(|f| f.trim().parse::<Rat>().map_err(|e| e.to_string()))
        .collect()
}

fn budget_for(subject: &Subject, args: &OracleArgs) -> OracleBudget {
    let mut b = OracleBudget::for_width(subject.free_count()).with_seed(args.seed);
    if let Some(d) = args.directions {
        b.directions = d;
    }
    b
}

fn render(value: &Rat, decimal: bool) -> String {
    if decimal {
        format!("{} ({})", value, value.to_f64())
    } else {
        value.to_string()
    }
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval {
            source,
            at,
            decimal,
        } => {
            let loaded = load_source(&source)?;
            let point = parse_point(&at, loaded.subject.free_count())?;
            let w = loaded.subject.embed(&point).map_err(|e| e.to_string())?;
            let trace = loaded
                .subject
                .network
                .forward(&w)
                .map_err(|e| e.to_string())?;
            let line: Vec<String> = trace
                .output()
                .iter()
                .map(|v| render(v, decimal))
                .collect();
            println!("{}", line.join(" "));
            Ok(true)
        }
        Command::Ad {
            source,
            at,
            decimal,
        } => {
            let loaded = load_source(&source)?;
            let point = parse_point(&at, loaded.subject.free_count())?;
            let w = loaded.subject.embed(&point).map_err(|e| e.to_string())?;
            let report = ad::reverse_ad(&loaded.subject.network, &w).map_err(|e| e.to_string())?;
            for row in &report.jacobian {
                let projected = loaded.subject.project_row(row);
                let line: Vec<String> = projected.iter().map(|v| render(v, decimal)).collect();
                println!("{}", line.join(" "));
            }
            Ok(true)
        }
        Command::Classify {
            source,
            at,
            oracle: oracle_args,
        } => {
            let loaded = load_source(&source)?;
            let point = parse_point(&at, loaded.subject.free_count())?;
            let budget = budget_for(&loaded.subject, &oracle_args);
            let c = classify(&loaded.subject, &point, &budget);
            let mut line = format!("{} certificate={}", c.verdict.as_str(), c.certificate.as_str());
            if let Some((l, i)) = c.witness {
                line.push_str(&format!(" witness={}:{}", l + 1, i + 1));
            }
            if let Some(claim) = &c.derivative_claim {
                let rows: Vec<String> = claim
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(Rat::to_string)
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                line.push_str(&format!(" derivative={}", rows.join("; ")));
            }
            println!("{line}");
            Ok(c.verdict != Verdict::Unknown)
        }
        Command::Census {
            source,
            grid,
            out,
            log_points,
            allow_unknown,
            jobs,
            point_cap,
            decimal,
            oracle: oracle_args,
        } => {
            let loaded = load_source(&source)?;
            let grid_values = match (&grid, &loaded.answers) {
                (Some(s), _) => parse_grid(s)?,
                (None, Some(a)) if a.grid.is_some() => a.grid.clone().unwrap(),
                _ => return Err("--grid is required for this source".into()),
            };
            let grid = Grid::new(grid_values).map_err(|e| e.to_string())?;
            // Achievability claims are grid-specific: attach only when the
            // census runs on the grid the fixture was built for.
            let lower = loaded.answers.as_ref().and_then(|a| {
                (a.grid.as_deref() == Some(grid.elements()))
                    .then(|| a.lower_bound.clone())
                    .flatten()
            });
            let opts = ScanOptions {
                budget: budget_for(&loaded.subject, &oracle_args),
                point_cap,
                log_points,
                jobs,
            };
            let report =
                census::scan(&loaded.subject, &grid, &opts, lower).map_err(|e| e.to_string())?;
            let outcome = match census::verify(&report, allow_unknown) {
                Ok(o) => o,
                Err(e) => {
                    // Incomplete report: still emit the summary, then fail.
                    let mut buf = Vec::new();
                    census::write_csv(&report, None, decimal, &mut buf)
                        .map_err(|e| e.to_string())?;
                    print!("{}", String::from_utf8_lossy(&buf));
                    eprintln!("{e}");
                    return Ok(false);
                }
            };
            if let Some(path) = out {
                let mut buf = Vec::new();
                census::write_csv(&report, Some(&outcome), decimal, &mut buf)
                    .map_err(|e| e.to_string())?;
                fs::write(&path, &buf).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            let mut buf = Vec::new();
            let summary_only = census::CensusReport {
                log: None,
                ..report.clone()
            };
            census::write_csv(&summary_only, Some(&outcome), decimal, &mut buf)
                .map_err(|e| e.to_string())?;
            print!("{}", String::from_utf8_lossy(&buf));
            Ok(outcome.pass)
        }
        Command::Bounds { source, grid } => {
            let loaded = load_source(&source)?;
            let grid_values = match (&grid, &loaded.answers) {
                (Some(s), _) => parse_grid(s)?,
                (None, Some(a)) if a.grid.is_some() => a.grid.clone().unwrap(),
                _ => return Err("--grid is required for this source".into()),
            };
            let grid = Grid::new(grid_values).map_err(|e| e.to_string())?;
            let values = census::bounds(&loaded.subject, &grid).map_err(|e| e.to_string())?;
            let fmt = |b: &Option<Rat>| b.as_ref().map_or("n/a".to_string(), Rat::to_string);
            println!("bias_ndf_bound {}", fmt(&values.bias_ndf));
            println!("general_union_bound {}", fmt(&values.general_union));
            println!("inc_bound {}", fmt(&values.incorrect));
            Ok(true)
        }
        Command::Fixture { spec, out } => {
            let spec = FixtureSpec::parse(&spec).map_err(|e| e.to_string())?;
            let fixture = fixtures::fixture(&spec).map_err(|e| e.to_string())?;
            let config = serde_json::to_string_pretty(&fixture.subject)
                .map_err(|e| e.to_string())?;
            fs::write(&out, config).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            let answers_path = out.with_extension("answers.json");
            let answers = serde_json::to_string_pretty(&fixture.answers)
                .map_err(|e| e.to_string())?;
            fs::write(&answers_path, answers)
                .map_err(|e| format!("cannot write {}: {e}", answers_path.display()))?;
            println!(
                "wrote {} and {}",
                out.display(),
                answers_path.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
