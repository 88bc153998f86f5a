//! Command-line front end: argument parsing, parameter overrides, and the
//! plan/bench/gen subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mmplan_core::highlevel::SearchMode;

use crate::batch::{run_batch, run_one, summarize};
use crate::generate::generate_instances;
use crate::report;
use crate::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "mmplan",
    about = "Conflict-tree motion planning for multiple manipulators",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one scenario file and print the outcome
    Plan {
        scenario: PathBuf,
        /// Write the solution as line-oriented waypoint rows
        #[arg(long, value_name = "PATH")]
        dump_trajectories: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run scenario files (plus generated variants) across planner modes
    Bench {
        /// Scenario file or directory of *.json scenario files
        path: PathBuf,
        /// Comma-separated planner modes to compare
        #[arg(long, value_delimiter = ',', default_value = "cbs,ecbs,apf-ecbs,apf-ecbs-nf")]
        modes: Vec<String>,
        /// Random instances generated per scenario, on top of the file itself
        #[arg(long, default_value_t = 0)]
        instances: usize,
        /// Seed for instance generation
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV report path
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Also write the full records as JSON
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Also write per-mode aggregate series for plotting
        #[arg(long, value_name = "PATH")]
        plot_data: Option<PathBuf>,
        /// Leave the wall-clock column out of the CSV (reruns become
        /// byte-identical)
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate randomized instances of a base scenario
    Gen {
        base: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory the instance files go to
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Command-line parameter overrides, applied on top of scenario files.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Planner mode: cbs, ecbs, apf-ecbs, apf-ecbs-nf
    #[arg(long)]
    mode: Option<String>,
    /// Suboptimality factor of the focal rule
    #[arg(long)]
    w: Option<f64>,
    /// Wall-clock budget per run, seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// Expanded-node cap per run
    #[arg(long)]
    node_limit: Option<usize>,
    /// Time grid step, seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Deformation step size
    #[arg(long)]
    alpha: Option<f64>,
    /// Repulsive gain
    #[arg(long)]
    krep: Option<f64>,
    /// Repulsion influence distance, meters
    #[arg(long)]
    d0: Option<f64>,
    /// Deformation iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// Constraint ball radius, radians
    #[arg(long)]
    rho: Option<f64>,
    /// Conflict-check sphere inflation, meters
    #[arg(long)]
    eps_margin: Option<f64>,
    /// Per-joint speed cap, rad/s
    #[arg(long)]
    v_max: Option<f64>,
    /// Sample budget of the single-robot planner
    #[arg(long)]
    max_samples: Option<usize>,
    /// Goal bias of the single-robot planner
    #[arg(long)]
    goal_bias: Option<f64>,
    /// Steering step of the single-robot planner, radians
    #[arg(long)]
    eta: Option<f64>,
    /// Base seed of the single-robot planner
    #[arg(long)]
    planner_seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) {
        let p = &mut s.params;
        if let Some(v) = &self.mode {
            p.mode = v.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { p.$field = v; })*
            };
        }
        set!(w, dt, alpha, d0, max_iter, rho, eps_margin, v_max, max_samples, goal_bias, eta);
        if let Some(v) = self.krep {
            p.k_rep = v;
        }
        if let Some(v) = self.planner_seed {
            p.seed = v;
        }
        if let Some(v) = self.time_limit {
            p.time_limit = Some(v);
        }
        if let Some(v) = self.node_limit {
            p.node_limit = Some(v);
        }
    }
}

fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no .json scenario files in {}", path.display());
        }
        files.iter().map(|f| Scenario::load(f)).collect()
    } else {
        Ok(vec![Scenario::load(path)?])
    }
}

fn parse_modes(modes: &[String]) -> Result<Vec<SearchMode>> {
    if modes.is_empty() {
        bail!("at least one mode is required");
    }
    modes
        .iter()
        .map(|m| m.parse::<SearchMode>().map_err(|e| anyhow::anyhow!("--modes {m}: {e}")))
        .collect()
}

fn cmd_plan(path: &Path, dump: Option<&Path>, overrides: &Overrides) -> Result<()> {
    let mut scenario = Scenario::load(path)?;
    overrides.apply(&mut scenario);
    let mode = scenario.search_params()?.mode;
    let record = run_one(&scenario, mode);
    println!(
        "{}: {} [{}] expanded={} generated={} time={:.3}s",
        record.scenario,
        if record.success { "solved" } else { "failed" },
        record.mode,
        record.expanded_nodes,
        record.generated_nodes,
        record.planning_time,
    );
    match (record.success, &record.failure) {
        (true, _) => println!(
            "  makespan={:.3}s cost={:.3}rad fast_track_successes={}",
            record.makespan.unwrap_or_default(),
            record.cost.unwrap_or_default(),
            record.fast_track_successes,
        ),
        (false, Some(reason)) => println!("  reason: {reason}"),
        (false, None) => {}
    }
    if let Some(dump_path) = dump {
        if record.success {
            // Re-run deterministically to get the trajectories themselves.
            let problem = scenario.problem()?;
            let mut params = scenario.search_params()?;
            params.mode = mode;
            let outcome = mmplan_core::highlevel::plan_all_timed(&problem, &params);
            let sol = outcome
                .result
                .map_err(|e| anyhow::anyhow!("rerun for trajectory dump failed: {e}"))?;
            report::write_text(dump_path, &report::trajectories_string(&sol.trajectories))?;
            println!("  trajectories written to {}", dump_path.display());
        } else {
            println!("  no trajectories to dump (run failed)");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    path: &Path,
    modes: &[String],
    instances: usize,
    seed: u64,
    out: &Path,
    json: Option<&Path>,
    plot_data: Option<&Path>,
    no_timing: bool,
    overrides: &Overrides,
) -> Result<()> {
    let modes = parse_modes(modes)?;
    let mut scenarios = load_scenarios(path)?;
    if instances > 0 {
        let bases = scenarios.clone();
        for base in &bases {
            scenarios.extend(generate_instances(base, instances, seed)?);
        }
    }
    for s in &mut scenarios {
        overrides.apply(s);
    }
    eprintln!(
        "running {} scenarios x {} modes...",
        scenarios.len(),
        modes.len()
    );
    let records = run_batch(&scenarios, &modes);
    report::write_text(out, &report::csv_string(&records, !no_timing))?;
    if let Some(p) = json {
        report::write_text(p, &report::json_string(&records))?;
    }
    if let Some(p) = plot_data {
        report::write_text(p, &report::plot_data_string(&records))?;
    }
    print!("{}", report::summary_string(&summarize(&records)));
    println!("report written to {}", out.display());
    Ok(())
}

fn cmd_gen(base: &Path, count: usize, seed: u64, out_dir: &Path) -> Result<()> {
    let base_scenario = Scenario::load(base)?;
    let instances = generate_instances(&base_scenario, count, seed)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    for instance in &instances {
        let file = out_dir.join(format!("{}.json", instance.name));
        instance.save(&file)?;
        println!("{}", file.display());
    }
    Ok(())
}

/// Parse the process arguments and execute the selected subcommand.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Plan { scenario, dump_trajectories, overrides } => {
            cmd_plan(scenario, dump_trajectories.as_deref(), overrides)
        }
        Cmd::Bench {
            path,
            modes,
            instances,
            seed,
            out,
            json,
            plot_data,
            no_timing,
            overrides,
        } => cmd_bench(
            path,
            modes,
            *instances,
            *seed,
            out,
            json.as_deref(),
            plot_data.as_deref(),
            *no_timing,
            overrides,
        ),
        Cmd::Gen { base, count, seed, out_dir } => cmd_gen(base, *count, *seed, out_dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_reach_the_params() {
        let mut s = crate::scenario::tests::minimal_scenario();
        let o = Overrides {
            mode: Some("cbs".to_owned()),
            w: Some(2.0),
            time_limit: Some(5.0),
            krep: Some(0.2),
            ..Overrides::default()
        };
        o.apply(&mut s);
        assert_eq!(s.params.mode, "cbs");
        assert_eq!(s.params.w, 2.0);
        assert_eq!(s.params.time_limit, Some(5.0));
        assert_eq!(s.params.k_rep, 0.2);
        assert_eq!(s.params.dt, 0.1);
    }

    #[test]
    fn mode_lists_are_validated() {
        assert!(parse_modes(&["cbs".to_owned(), "apf-ecbs".to_owned()]).is_ok());
        assert!(parse_modes(&["bfs".to_owned()]).is_err());
        assert!(parse_modes(&[]).is_err());
    }
}
