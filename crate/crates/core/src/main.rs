use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hybrid_pursuit::cli::export::{format_f64, report_text};
use hybrid_pursuit::cli::{self, batch, load_entry, Scenario};
use hybrid_pursuit::reachability::{verify_reach, ReachSpec, Role};
use hybrid_pursuit::state_space::StateVector;
use hybrid_pursuit::strategy::PhaseConstraint;

#[derive(Parser)]
#[command(name = "hybrid-pursuit", version, about = "Pursuit-evasion game with hybrid dynamics and energy budgets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Override the scenario's grid size.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override the seed of random-admissible policies.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Play one scenario and print its report.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Play many scenarios and print a summary CSV.
    Batch {
        /// Scenario file or directory of `*.toml` files; repeatable.
        #[arg(long, required = true)]
        scenario: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check both attainability balls on center, boundary and interior targets.
    ReachCheck {
        #[arg(long)]
        scenario: PathBuf,
        /// `pursuer`, `evader` or `both`.
        #[arg(long, default_value = "both")]
        role: String,
        /// Extra target, comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        target: Option<Vec<f64>>,
        /// Random boundary and interior targets per role.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the phase constraint for a point, or for the scenario's e(phi).
    ZCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        zeta: Option<Vec<f64>>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<Scenario, String> {
    load_entry(path, overrides.grid_n, overrides.seed).scenario
}

fn simulate(path: &Path, out_dir: Option<&Path>, overrides: &Overrides) -> Result<ExitCode, String> {
    let scenario = load(path, overrides)?;
    let run = batch::run_scenario(&scenario).map_err(|e| e.to_string())?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        batch::write_artifacts(&scenario, &run, dir)?;
    }
    print!("{}", report_text(&scenario.label, &run.outcome.report, run.z_rhs));
    Ok(if run.outcome.report.captured {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_batch(
    paths: &[PathBuf],
    out_dir: Option<&Path>,
    parallelism: usize,
    overrides: &Overrides,
) -> Result<ExitCode, String> {
    let files = cli::expand_paths(paths)?;
    let entries: Vec<_> = files
        .iter()
        .map(|p| load_entry(p, overrides.grid_n, overrides.seed))
        .collect();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let summary = cli::run_batch(&entries, parallelism, out_dir);
    let csv = summary.to_csv();
    if let Some(dir) = out_dir {
        let path = dir.join("summary.csv");
        fs::write(&path, &csv).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    print!("{csv}");
    Ok(ExitCode::from(summary.exit_code() as u8))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    loop {
        let coords = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Some(u) = StateVector::new(coords).ok().and_then(|v| v.normalized()) {
            return u;
        }
    }
}

fn reach_check(
    path: &Path,
    role: &str,
    target: Option<Vec<f64>>,
    samples: usize,
    seed: u64,
) -> Result<ExitCode, String> {
    let scenario = load(path, &Overrides { grid_n: None, seed: None })?;
    let params = &scenario.params;
    let roles = match role {
        "both" => vec![Role::Pursuer, Role::Evader],
        r => vec![r.parse::<Role>().map_err(|e| e.to_string())?],
    };
    let extra = target
        .map(StateVector::new)
        .transpose()
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_pass = true;
    println!("role,kind,miss,energy,budget_sq,admissible,passed");
    for role in roles {
        let ball = ReachSpec::for_role(params, role).map_err(|e| e.to_string())?;
        let mut targets = vec![("center", ball.center.clone())];
        for _ in 0..samples {
            let u = random_unit(&mut rng, params.dim());
            targets.push(("boundary", ball.center.add_scaled(ball.radius, &u)));
            let u = random_unit(&mut rng, params.dim());
            let r = rng.random_range(0.0..1.0) * ball.radius;
            targets.push(("interior", ball.center.add_scaled(r, &u)));
        }
        if let Some(t) = &extra {
            targets.push(("given", t.clone()));
        }
        for (kind, t) in targets {
            match verify_reach(params, role, &t) {
                Ok(rep) => {
                    all_pass &= rep.passed();
                    println!(
                        "{role},{kind},{},{},{},{},{}",
                        format_f64(rep.miss),
                        format_f64(rep.energy),
                        format_f64(rep.budget * rep.budget),
                        rep.admissible,
                        rep.passed()
                    );
                }
                Err(e) => {
                    all_pass = false;
                    println!("{role},{kind},,,,,false # {e}");
                }
            }
        }
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn z_check(path: &Path, zeta: Option<Vec<f64>>, overrides: &Overrides) -> Result<ExitCode, String> {
    let scenario = load(path, overrides)?;
    let z = PhaseConstraint::new(&scenario.params).map_err(|e| e.to_string())?;
    let (source, point) = match zeta {
        Some(c) => ("given", StateVector::new(c).map_err(|e| e.to_string())?),
        None => {
            let run = batch::run_scenario(&scenario).map_err(|e| e.to_string())?;
            ("terminal_e", run.outcome.report.terminal_e)
        }
    };
    let lhs = z.lhs(&point).map_err(|e| e.to_string())?;
    let member = z.contains(&point).map_err(|e| e.to_string())?;
    println!("point = {source:?}");
    println!("z_rhs = {}", format_f64(z.rhs));
    println!("lhs = {}", format_f64(lhs));
    println!("member = {member}");
    Ok(if member { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out_dir,
            overrides,
        } => simulate(&scenario, out_dir.as_deref(), &overrides),
        Command::Batch {
            scenario,
            out_dir,
            parallelism,
            overrides,
        } => run_batch(&scenario, out_dir.as_deref(), parallelism, &overrides),
        Command::ReachCheck {
            scenario,
            role,
            target,
            samples,
            seed,
        } => reach_check(&scenario, &role, target, samples, seed),
        Command::ZCheck {
            scenario,
            zeta,
            overrides,
        } => z_check(&scenario, zeta, &overrides),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
