//! Seeded random instance creation: fresh start/goal configurations for a
//! base scenario, sampled uniformly in joint limits.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmplan_core::collision::{is_config_free, min_robot_distance, Obstacle};
use mmplan_core::kinematics::{Config, SerialChain};

use crate::scenario::Scenario;

/// Draws per robot until its configuration is statically free, its
/// end-effector lies in the scenario's workspace box, and it keeps more than
/// 2 * eps_margin of surface clearance to every robot already placed (an
/// overlap at rest, start or goal, is unresolvable by any schedule).
/// Placement is greedy, so an unlucky early draw can box a later robot out of
/// a tight workspace entirely; when a robot exhausts its tries the whole set
/// is discarded and redrawn.
const TRIES_PER_ROBOT: usize = 2_000;
const SET_RESTARTS: usize = 200;

fn sample_pose_set(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    chains: &[SerialChain],
    obstacles: &[Obstacle],
    what: &str,
) -> Result<Vec<Config>> {
    let clearance = 2.0 * scenario.params.eps_margin;
    let mut last_stuck = 0;
    'restarts: for _ in 0..SET_RESTARTS {
        let mut placed: Vec<Config> = Vec::with_capacity(chains.len());
        for (r, chain) in chains.iter().enumerate() {
            let mut found = None;
            'tries: for _ in 0..TRIES_PER_ROBOT {
                let q = Config(
                    chain
                        .limits()
                        .iter()
                        .map(|&(lo, hi)| rng.gen_range(lo..hi))
                        .collect(),
                );
                if !is_config_free(chain, &q, obstacles)? {
                    continue;
                }
                if !scenario.workspace.contains(chain.tip_position(&q)?) {
                    continue;
                }
                for (other, q_other) in placed.iter().enumerate() {
                    if min_robot_distance(chain, &q, &chains[other], q_other)? <= clearance {
                        continue 'tries;
                    }
                }
                found = Some(q);
                break;
            }
            match found {
                Some(q) => placed.push(q),
                None => {
                    last_stuck = r;
                    continue 'restarts;
                }
            }
        }
        return Ok(placed);
    }
    bail!(
        "could not sample a mutually clear {what} set in {SET_RESTARTS} rounds of {TRIES_PER_ROBOT} tries (last stuck at robot {last_stuck})"
    )
}

/// `count` scenarios derived from `base`, identical except for fresh starts
/// and goals (and a name suffix). Deterministic in `seed`.
pub fn generate_instances(base: &Scenario, count: usize, seed: u64) -> Result<Vec<Scenario>> {
    if count == 0 {
        bail!("instance count must be at least 1");
    }
    let chains = base.chains()?;
    let obstacles: Vec<Obstacle> =
        base.problem()?.obstacles;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let starts = sample_pose_set(&mut rng, base, &chains, &obstacles, "start")?;
        let goals = loop {
            let goals = sample_pose_set(&mut rng, base, &chains, &obstacles, "goal")?;
            // A robot already at its goal would make the instance partly
            // trivial; redraw the whole goal set on an exact coincidence.
            if goals.iter().zip(&starts).all(|(g, s)| g.linf_dist(s) > 1e-9) {
                break goals;
            }
        };
        let mut instance = base.clone();
        instance.name = format!("{}-{idx:03}", base.name);
        instance.seed = seed;
        for ((robot, start), goal) in instance.robots.iter_mut().zip(starts).zip(goals) {
            robot.start = start.0;
            robot.goal = goal.0;
        }
        out.push(instance);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::minimal_scenario;

    #[test]
    fn same_seed_reproduces_instances() {
        let base = minimal_scenario();
        let a = generate_instances(&base, 3, 42).unwrap();
        let b = generate_instances(&base, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let base = minimal_scenario();
        let a = generate_instances(&base, 20, 1).unwrap();
        let b = generate_instances(&base, 20, 2).unwrap();
        assert!(a.iter().zip(&b).any(|(x, y)| x.robots != y.robots));
    }

    #[test]
    fn instances_satisfy_the_sampling_contract() {
        let base = minimal_scenario();
        let chains = base.chains().unwrap();
        let obstacles = base.problem().unwrap().obstacles;
        let clearance = 2.0 * base.params.eps_margin;
        for instance in generate_instances(&base, 10, 7).unwrap() {
            let problem = instance.problem().unwrap();
            for (r, chain) in chains.iter().enumerate() {
                for q in [&problem.starts[r], &problem.goals[r]] {
                    assert!(is_config_free(chain, q, &obstacles).unwrap());
                    assert!(instance.workspace.contains(chain.tip_position(q).unwrap()));
                }
                assert!(problem.starts[r].linf_dist(&problem.goals[r]) > 1e-9);
                for other in 0..r {
                    for (qa, qb) in [
                        (&problem.starts[r], &problem.starts[other]),
                        (&problem.goals[r], &problem.goals[other]),
                    ] {
                        let d =
                            min_robot_distance(chain, qa, &chains[other], qb).unwrap();
                        assert!(d > clearance, "robots {r}/{other} too close: {d}");
                    }
                }
            }
            // Instances parse back through full validation.
            Scenario::from_json(&instance.to_json()).unwrap();
        }
    }

    #[test]
    fn impossible_workspace_names_the_robot() {
        let mut base = minimal_scenario();
        base.workspace.min = [50.0, 50.0, 50.0];
        base.workspace.max = [51.0, 51.0, 51.0];
        let err = generate_instances(&base, 1, 0).unwrap_err();
        assert!(err.to_string().contains("robot 0"), "{err}");
    }
}
