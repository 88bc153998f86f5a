//! Report emission: CSV and JSON record dumps, a plain-text summary table,
//! plot-ready aggregate series, and trajectory dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use mmplan_core::trajectory::Trajectory;

use crate::batch::{mean_std, ModeSummary, RunRecord};

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per record. `include_timing` controls the wall-clock column;
/// leaving it out makes reruns of the same seeds byte-identical.
pub fn csv_string(records: &[RunRecord], include_timing: bool) -> String {
    let mut out = String::new();
    out.push_str("scenario,mode,seed,success,failure,expanded_nodes,generated_nodes");
    if include_timing {
        out.push_str(",planning_time");
    }
    out.push_str(
        ",makespan,cost,fast_track_attempts,fast_track_successes,modify_motion_calls,focal_violations,dense_rejections\n",
    );
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.scenario),
            csv_field(&r.mode),
            r.seed,
            r.success,
            csv_field(r.failure.as_deref().unwrap_or("")),
            r.expanded_nodes,
            r.generated_nodes,
        );
        if include_timing {
            let _ = write!(out, ",{}", r.planning_time);
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{}",
            opt(r.makespan),
            opt(r.cost),
            r.fast_track_attempts,
            r.fast_track_successes,
            r.modify_motion_calls,
            r.focal_violations,
            r.dense_rejections,
        );
    }
    out
}

pub fn json_string(records: &[RunRecord]) -> String {
    let mut text = serde_json::to_string_pretty(records).expect("records serialize");
    text.push('\n');
    text
}

/// Per-mode success rates plus expanded-node comparisons against apf-ecbs,
/// the latter computed only over instances every present mode solved.
pub fn plot_data_string(records: &[RunRecord]) -> String {
    let modes: Vec<String> = {
        let mut seen = Vec::new();
        for r in records {
            if !seen.contains(&r.mode) {
                seen.push(r.mode.clone());
            }
        }
        seen
    };
    let mut success_rate = serde_json::Map::new();
    for mode in &modes {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| &r.mode == mode).collect();
        let rate = 100.0 * rows.iter().filter(|r| r.success).count() as f64 / rows.len() as f64;
        success_rate.insert(mode.clone(), json!(rate));
    }

    // Instances solved by every mode, so node-count ratios compare like with
    // like.
    let mut common: Vec<&str> = Vec::new();
    let scenarios: Vec<&str> = {
        let mut seen = Vec::new();
        for r in records {
            if !seen.contains(&r.scenario.as_str()) {
                seen.push(r.scenario.as_str());
            }
        }
        seen
    };
    for s in scenarios {
        let solved_by_all = modes.iter().all(|m| {
            records
                .iter()
                .any(|r| r.scenario == s && &r.mode == m && r.success)
        });
        if solved_by_all {
            common.push(s);
        }
    }

    let mut mean_expanded_common = serde_json::Map::new();
    let mut ratio_vs_apf = serde_json::Map::new();
    let mean_over_common = |mode: &str| -> f64 {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.mode == mode && common.contains(&r.scenario.as_str()))
            .map(|r| r.expanded_nodes as f64)
            .collect();
        mean_std(&values).0
    };
    let apf_mean = if modes.iter().any(|m| m == "apf-ecbs") {
        Some(mean_over_common("apf-ecbs"))
    } else {
        None
    };
    for mode in &modes {
        let mean = mean_over_common(mode);
        mean_expanded_common.insert(mode.clone(), json!(mean));
        if let Some(base) = apf_mean {
            if base > 0.0 {
                ratio_vs_apf.insert(mode.clone(), json!(mean / base));
            }
        }
    }

    let doc = json!({
        "modes": modes,
        "success_rate_percent": success_rate,
        "common_instance_count": common.len(),
        "mean_expanded_over_common": mean_expanded_common,
        "expanded_ratio_vs_apf-ecbs": ratio_vs_apf,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plot data serializes");
    text.push('\n');
    text
}

/// Plain-text table: mean (stddev) per mode, success rate, run counts.
pub fn summary_string(summaries: &[ModeSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>5} {:>8} {:>20} {:>20} {:>20} {:>20}",
        "mode", "runs", "solved%", "expanded", "time_s", "makespan_s", "cost_rad"
    );
    for s in summaries {
        let cell = |mean: f64, std: f64| format!("{mean:.2} ({std:.2})");
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>8.1} {:>20} {:>20} {:>20} {:>20}",
            s.mode,
            s.runs,
            s.success_rate_percent,
            cell(s.mean_expanded, s.std_expanded),
            cell(s.mean_time, s.std_time),
            cell(s.mean_makespan, s.std_makespan),
            cell(s.mean_cost, s.std_cost),
        );
    }
    out
}

/// Line-oriented dump: a `robot <id>` header per robot, then one
/// `t, q_1, ..., q_d` row per waypoint.
pub fn trajectories_string(trajectories: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajectories {
        let _ = writeln!(out, "robot {}", t.robot_id);
        for w in &t.waypoints {
            let _ = write!(out, "{}", w.time);
            for q in w.config.iter() {
                let _ = write!(out, ", {q}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
