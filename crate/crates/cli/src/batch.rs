//! Batch execution: every scenario under every requested mode, in parallel,
//! merged into a deterministic record list plus per-mode summary rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mmplan_core::collision::timed_violations;
use mmplan_core::highlevel::{plan_all_timed, SearchMode, Solution};

use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub mode: String,
    pub seed: u64,
    pub success: bool,
    /// Human-readable reason, present exactly when the run failed.
    pub failure: Option<String>,
    pub expanded_nodes: u64,
    pub generated_nodes: u64,
    pub planning_time: f64,
    pub makespan: Option<f64>,
    pub cost: Option<f64>,
    pub fast_track_attempts: u64,
    pub fast_track_successes: u64,
    pub modify_motion_calls: u64,
    pub focal_violations: u64,
    pub dense_rejections: u64,
}

/// Runs one scenario in one mode. Never fails: configuration or model
/// problems become failure records so a batch always completes.
pub fn run_one(scenario: &Scenario, mode: SearchMode) -> RunRecord {
    run_one_full(scenario, mode).0
}

/// Like [`run_one`], but also hands back the verified solution so callers can
/// inspect the trajectories behind a success record.
pub fn run_one_full(scenario: &Scenario, mode: SearchMode) -> (RunRecord, Option<Solution>) {
    let mut record = RunRecord {
        scenario: scenario.name.clone(),
        mode: mode.as_str().to_owned(),
        seed: scenario.seed,
        success: false,
        failure: None,
        expanded_nodes: 0,
        generated_nodes: 0,
        planning_time: 0.0,
        makespan: None,
        cost: None,
        fast_track_attempts: 0,
        fast_track_successes: 0,
        modify_motion_calls: 0,
        focal_violations: 0,
        dense_rejections: 0,
    };
    let (problem, mut params) = match (scenario.problem(), scenario.search_params()) {
        (Ok(p), Ok(s)) => (p, s),
        (Err(e), _) | (_, Err(e)) => {
            record.failure = Some(format!("invalid scenario: {e:#}"));
            return (record, None);
        }
    };
    params.mode = mode;
    let outcome = plan_all_timed(&problem, &params);
    record.expanded_nodes = outcome.metrics.expanded;
    record.generated_nodes = outcome.metrics.generated;
    record.planning_time = outcome.metrics.elapsed_seconds;
    record.fast_track_attempts = outcome.metrics.fast_track_attempts;
    record.fast_track_successes = outcome.metrics.fast_track_successes;
    record.modify_motion_calls = outcome.metrics.modify_motion_calls;
    record.focal_violations = outcome.metrics.focal_violations;
    record.dense_rejections = outcome.metrics.dense_rejections;
    let mut solution = None;
    match outcome.result {
        Ok(sol) => {
            // Success goes in the books only after an independent recheck.
            let clean =
                timed_violations(&sol.set, &problem.chains, params.dt / 10.0, params.eps_margin)
                    .map(|v| v.is_empty())
                    .unwrap_or(false)
                    && sol.set.max_joint_speed() <= params.v_max + 1e-9;
            if clean {
                record.success = true;
                record.makespan = Some(sol.makespan);
                record.cost = Some(sol.cost);
                solution = Some(sol);
            } else {
                record.failure = Some("solution failed the independent recheck".to_owned());
            }
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    (record, solution)
}

/// One record per (scenario, mode), ordered by scenario name then mode name.
pub fn run_batch(scenarios: &[Scenario], modes: &[SearchMode]) -> Vec<RunRecord> {
    let jobs: Vec<(&Scenario, SearchMode)> = scenarios
        .iter()
        .flat_map(|s| modes.iter().map(move |&m| (s, m)))
        .collect();
    let mut records: Vec<RunRecord> =
        jobs.par_iter().map(|&(s, m)| run_one(s, m)).collect();
    records.sort_by(|a, b| (&a.scenario, &a.mode).cmp(&(&b.scenario, &b.mode)));
    records
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate_percent: f64,
    /// Over all runs of the mode.
    pub mean_expanded: f64,
    pub std_expanded: f64,
    pub mean_time: f64,
    pub std_time: f64,
    /// Over successful runs only.
    pub mean_makespan: f64,
    pub std_makespan: f64,
    pub mean_cost: f64,
    pub std_cost: f64,
}

/// Mean and sample standard deviation (n-1); (0, 0) on empty input.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-mode aggregate rows, in canonical mode order.
pub fn summarize(records: &[RunRecord]) -> Vec<ModeSummary> {
    let mut out = Vec::new();
    for mode in SearchMode::ALL {
        let rows: Vec<&RunRecord> =
            records.iter().filter(|r| r.mode == mode.as_str()).collect();
        if rows.is_empty() {
            continue;
        }
        let expanded: Vec<f64> = rows.iter().map(|r| r.expanded_nodes as f64).collect();
        let time: Vec<f64> = rows.iter().map(|r| r.planning_time).collect();
        let makespan: Vec<f64> = rows.iter().filter_map(|r| r.makespan).collect();
        let cost: Vec<f64> = rows.iter().filter_map(|r| r.cost).collect();
        let successes = rows.iter().filter(|r| r.success).count();
        let (mean_expanded, std_expanded) = mean_std(&expanded);
        let (mean_time, std_time) = mean_std(&time);
        let (mean_makespan, std_makespan) = mean_std(&makespan);
        let (mean_cost, std_cost) = mean_std(&cost);
        out.push(ModeSummary {
            mode: mode.as_str().to_owned(),
            runs: rows.len(),
            successes,
            success_rate_percent: 100.0 * successes as f64 / rows.len() as f64,
            mean_expanded,
            std_expanded,
            mean_time,
            std_time,
            mean_makespan,
            std_makespan,
            mean_cost,
            std_cost,
        });
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::scenario::tests::minimal_scenario;

    pub(crate) fn stub_record(scenario: &str, mode: &str, expanded: u64) -> RunRecord {
        RunRecord {
            scenario: scenario.to_owned(),
            mode: mode.to_owned(),
            seed: 0,
            success: true,
            failure: None,
            expanded_nodes: expanded,
            generated_nodes: expanded + 1,
            planning_time: 0.5,
            makespan: Some(2.0),
            cost: Some(3.0),
            fast_track_attempts: 0,
            fast_track_successes: 0,
            modify_motion_calls: 0,
            focal_violations: 0,
            dense_rejections: 0,
        }
    }

    #[test]
    fn mean_and_sample_stddev_match_hand_arithmetic() {
        let (mean, std) = mean_std(&[10.0, 20.0]);
        assert!((mean - 15.0).abs() < 1e-12);
        assert!((std - 7.0710678).abs() < 1e-6);
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn batch_produces_one_sorted_record_per_pair() {
        let mut a = minimal_scenario();
        a.name = "b-scenario".to_owned();
        let mut b = minimal_scenario();
        b.name = "a-scenario".to_owned();
        // Tiny budget: outcomes may be failures, records must still appear.
        a.params.node_limit = Some(1);
        b.params.node_limit = Some(1);
        a.params.time_limit = Some(5.0);
        b.params.time_limit = Some(5.0);
        let records =
            run_batch(&[a, b], &[SearchMode::Ecbs, SearchMode::ApfEcbs]);
        assert_eq!(records.len(), 4);
        let keys: Vec<(&str, &str)> =
            records.iter().map(|r| (r.scenario.as_str(), r.mode.as_str())).collect();
        assert_eq!(
            keys,
            vec![
                ("a-scenario", "apf-ecbs"),
                ("a-scenario", "ecbs"),
                ("b-scenario", "apf-ecbs"),
                ("b-scenario", "ecbs"),
            ]
        );
        assert!(records.iter().all(|r| r.success != r.failure.is_some()));
        assert!(run_batch(&[minimal_scenario()], &[]).is_empty());
    }

    #[test]
    fn summary_covers_modes_in_canonical_order() {
        let records = vec![
            stub_record("s", "ecbs", 10),
            stub_record("s", "apf-ecbs", 4),
            stub_record("t", "ecbs", 20),
        ];
        let summary = summarize(&records);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[0].mode, "ecbs");
        assert_eq!(summary[0].runs, 2);
        assert!((summary[0].mean_expanded - 15.0).abs() < 1e-12);
        assert!((summary[0].std_expanded - 7.0710678).abs() < 1e-6);
        assert_eq!(summary[1].mode, "apf-ecbs");
        assert_eq!(summary[1].success_rate_percent, 100.0);
    }
}
