use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ries_core::bilevel::evolve;
use ries_core::dispatch::{schedule_csv, summary, verify_solution};
use ries_core::model::{load_config, Scenario, SystemConfig};
use ries_core::scenarios::{comparison, comparison_csv, comparison_table, run_scenarios, sig6};
use ries_core::sensitivity::{self, select_params};

#[derive(Parser, Debug)]
#[command(name = "ries-opt", version, about = "Rural integrated energy system scheduling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Config file merged over the bundled dataset; bundled data when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; results land in <out>/<timestamp>/<command>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the four comparison scenarios (or one with --scenario).
    Scenarios {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: Option<u8>,
    },
    /// Optimise the grid price schedule with the genetic algorithm.
    Bilevel {
        #[command(flatten)]
        common: Common,
        /// Park scenario used as the lower level.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
        scenario: u8,
        #[arg(long)]
        ga_generations: Option<usize>,
        #[arg(long)]
        ga_pop: Option<usize>,
        #[arg(long)]
        ga_mutation: Option<f64>,
    },
    /// One-at-a-time carbon sensitivity sweeps.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated list such as F1,F2.
        #[arg(long, default_value = "all")]
        params: String,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Load and check a config without solving anything.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: Option<String>,
    flags: serde_json::Value,
    seed: u64,
    timestamp: String,
    versions: serde_json::Value,
    files: Vec<String>,
    success: bool,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn create(root: &Path, stamp: &str, command: &str) -> Result<Self> {
        let mut base = root.join(stamp);
        let mut k = 1;
        while base.join(command).exists() {
            base = root.join(format!("{stamp}-{k}"));
            k += 1;
        }
        let dir = base.join(command);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.dir.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn finish(self, m: Manifest<'_>) -> Result<PathBuf> {
        let m = Manifest { files: self.files, ..m };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        std::fs::write(self.dir.join("manifest.json"), s)?;
        Ok(self.dir)
    }
}

fn load(common: &Common) -> Result<SystemConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => SystemConfig::bundled(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<bool> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let versions = serde_json::json!({
        "ries-opt": env!("CARGO_PKG_VERSION"),
    });
    match cmd {
        Command::Validate { common } => {
            let cfg = load(&common)?;
            cfg.validate()?;
            println!(
                "config OK (seed {}, {} sensitivity ranges)",
                cfg.seed,
                cfg.sensitivity.ranges.len()
            );
            Ok(true)
        }
        Command::Scenarios { common, scenario } => {
            let cfg = load(&common)?;
            let which: Vec<Scenario> = match scenario {
                Some(n) => vec![Scenario::from_number(n).expect("range checked by clap")],
                None => Scenario::ALL.to_vec(),
            };
            let runs = run_scenarios(&cfg, &which)?;
            let mut out = Output::create(&common.out, &stamp, "scenarios")?;
            let rows = comparison(&runs);
            let table = comparison_table(&rows);
            print!("{table}");
            out.write("comparison.txt", &table)?;
            out.write("comparison.csv", &comparison_csv(&rows))?;
            let mut ok = true;
            for r in &runs {
                let tag = r.scenario.to_string();
                out.write(&format!("{tag}_schedule.csv"), &schedule_csv(&r.solution.schedule))?;
                out.json(&format!("{tag}_summary.json"), &summary(&tag, &r.solution))?;
                out.write(&format!("{tag}_verify.txt"), &r.report.to_string())?;
                if !r.report.all_passed() {
                    ok = false;
                    eprintln!("{tag}: verification failed\n{}", r.report);
                }
            }
            let dir = out.finish(Manifest {
                command: "scenarios",
                config: common.config.as_ref().map(|p| p.display().to_string()),
                flags: serde_json::json!({ "scenario": scenario }),
                seed: cfg.seed,
                timestamp: stamp,
                versions,
                files: Vec::new(),
                success: ok,
            })?;
            println!("wrote {}", dir.display());
            Ok(ok)
        }
        Command::Bilevel {
            common,
            scenario,
            ga_generations,
            ga_pop,
            ga_mutation,
        } => {
            let mut cfg = load(&common)?;
            if let Some(g) = ga_generations {
                cfg.ga.generations = g;
            }
            if let Some(p) = ga_pop {
                cfg.ga.population = p;
            }
            if let Some(m) = ga_mutation {
                cfg.ga.mutation_rate = m;
            }
            cfg.validate()?;
            let sc = Scenario::from_number(scenario).expect("range checked by clap");
            let res = evolve(&cfg.ga_config(), &cfg, sc.flags())?;
            let mut out = Output::create(&common.out, &stamp, "bilevel")?;
            out.json("chromosome.json", &res.best)?;
            out.write("prices.csv", &res.evaluation.prices.to_csv_string())?;
            let mut conv = String::from("generation,best_fitness\n");
            for (g, f) in res.trace.iter().enumerate() {
                conv.push_str(&format!("{g},{f}\n"));
            }
            out.write("convergence.csv", &conv)?;
            out.write("schedule.csv", &schedule_csv(&res.evaluation.park.schedule))?;
            out.json(
                "summary.json",
                &serde_json::json!({
                    "scenario": sc,
                    "chromosome": res.best.to_string(),
                    "generations_run": res.trace.len(),
                    "converged": res.converged,
                    "grid_cost": res.evaluation.grid,
                    "baseline_grid_cost": res.baseline.grid,
                    "park": summary(&sc.to_string(), &res.evaluation.park),
                }),
            )?;
            let report = verify_solution(&res.evaluation.park, &res.evaluation.input);
            out.write("verify.txt", &report.to_string())?;
            println!("best price schedule: {}", res.best);
            println!(
                "grid cost {} (static tariff {}), park cost {}, park emissions {} kg",
                sig6(res.evaluation.grid.total),
                sig6(res.baseline.grid.total),
                sig6(res.evaluation.park.costs.total),
                sig6(res.evaluation.park.emissions())
            );
            let ok = report.all_passed();
            if !ok {
                eprintln!("verification failed\n{report}");
            }
            let dir = out.finish(Manifest {
                command: "bilevel",
                config: common.config.as_ref().map(|p| p.display().to_string()),
                flags: serde_json::json!({
                    "scenario": scenario,
                    "ga_generations": cfg.ga.generations,
                    "ga_pop": cfg.ga.population,
                    "ga_mutation": cfg.ga.mutation_rate,
                }),
                seed: cfg.seed,
                timestamp: stamp,
                versions,
                files: Vec::new(),
                success: ok,
            })?;
            println!("wrote {}", dir.display());
            Ok(ok)
        }
        Command::Sensitivity {
            common,
            params,
            samples,
        } => {
            let cfg = load(&common)?;
            let defs = select_params(&params)?;
            if defs.is_empty() {
                bail!("--params selects no parameter");
            }
            let n = samples.unwrap_or(cfg.sensitivity.samples);
            let report = sensitivity::run(&cfg, &defs, n)?;
            let mut out = Output::create(&common.out, &stamp, "sensitivity")?;
            out.write("samples.csv", &report.samples_csv())?;
            out.json("report.json", &report)?;
            println!("{:<5} {:<4} {:<12} {:>12} {:>10} {:>8}", "rank", "id", "symbol", "spread_kg", "pearson", "class");
            for p in &report.params {
                let r = p.pearson.map_or("degenerate".to_string(), sig6);
                println!(
                    "{:<5} {:<4} {:<12} {:>12} {:>10} {:>8}",
                    p.rank,
                    p.id,
                    p.symbol,
                    sig6(p.spread),
                    r,
                    p.class.to_string()
                );
            }
            let missing: usize = report.params.iter().map(|p| p.missing).sum();
            if missing > 0 {
                eprintln!("{missing} samples had no feasible dispatch and are recorded as missing");
            }
            let dir = out.finish(Manifest {
                command: "sensitivity",
                config: common.config.as_ref().map(|p| p.display().to_string()),
                flags: serde_json::json!({ "params": params, "samples": n }),
                seed: cfg.seed,
                timestamp: stamp,
                versions,
                files: Vec::new(),
                success: true,
            })?;
            println!("wrote {}", dir.display());
            Ok(true)
        }
    }
}
