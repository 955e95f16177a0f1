//! Acceptance suite. Every criterion runs in sequence inside one test so that
//! its wall-clock limit is measured without other tests competing for the
//! CPU. Each criterion prints one PASS/FAIL line; the test fails if any does.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use regionrrt::bench::{
    fixture_problems, median, run_comparison, validate_records, BenchConfig, PlannerKind, Stage,
    TrialRecord,
};
use regionrrt::dataset::{generate_dataset, load_sample, DatasetConfig};
use regionrrt::gridworld::{generate_map, GridMap, MapFamily, MapSpec, State};
use regionrrt::planner::{
    plan_rrt, plan_rrt_star, PlannerParams, PlanningProblem, SampleSource, Sampler, StopRule,
};
use regionrrt::region::{connectivity_check, ground_truth_region, GroundTruthConfig};
use regionrrt::seed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(number: u32, name: &str, outcome: &Outcome, elapsed: Duration) {
    let line = format!(
        "criterion {number} ({name}): {} in {:.1}s: {}\n",
        if outcome.pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        outcome.detail
    );
    // Written straight to the process stdout so it shows without --nocapture.
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn random_free(map: &GridMap, rng: &mut impl Rng) -> State {
    let free = map.free_cell_indices();
    let i = free[rng.gen_range(0..free.len())] as usize;
    State::new(
        (i % map.width()) as f64 + rng.gen::<f64>(),
        (i / map.width()) as f64 + rng.gen::<f64>(),
    )
}

/// 1,000 random problems over all map families, alternating plain RRT,
/// uniform RRT* and region-guided RRT*. Every returned path and every final
/// tree is checked. Limit: 5 minutes.
fn planner_soundness() -> (Outcome, Duration) {
    let limit = Duration::from_secs(300);
    let started = Instant::now();
    let mut violations = Vec::new();
    let mut solved = 0;
    let n_maps = 200;
    let per_map = 5;
    for m in 0..n_maps {
        let family = MapFamily::ALL[m % MapFamily::ALL.len()];
        let map = Arc::new(generate_map(&MapSpec::new(family, seed::derive(101, &[m as u64]))).unwrap());
        for k in 0..per_map {
            let mut rng = seed::rng(seed::derive(202, &[m as u64, k as u64]));
            let init = random_free(&map, &mut rng);
            let goal = random_free(&map, &mut rng);
            let radius = rng.gen_range(1.0..6.0);
            let problem = PlanningProblem::new(map.clone(), init, goal, radius).unwrap();
            let params = PlannerParams {
                max_iterations: rng.gen_range(500..3000),
                mu: rng.gen_range(0.0..=100.0),
                validate_every: Some(250),
                ..Default::default()
            };
            let id = format!("map {m} problem {k}");
            let result = match (m * per_map + k) % 3 {
                0 => plan_rrt(&problem, &params, &mut rng).unwrap(),
                1 => {
                    let sampler = Sampler::uniform(&map, goal, &params).unwrap();
                    plan_rrt_star(&problem, &params, &sampler, StopRule::Budget, &mut rng).unwrap()
                }
                _ => {
                    let cfg = GroundTruthConfig {
                        n_runs: 3,
                        rrt: PlannerParams {
                            max_iterations: 5000,
                            validate_every: None,
                            ..Default::default()
                        },
                        ..Default::default()
                    };
                    match ground_truth_region(&problem, &cfg, rng.gen()) {
                        Ok(gt) => {
                            let h = gt.mask.discretize().unwrap();
                            let sampler = Sampler::from_params(&map, goal, &params, Some(&h)).unwrap();
                            plan_rrt_star(&problem, &params, &sampler, StopRule::Budget, &mut rng)
                                .unwrap()
                        }
                        Err(_) => plan_rrt(&problem, &params, &mut rng).unwrap(),
                    }
                }
            };
            if let Err(v) = result.tree.validate(&map) {
                violations.push(format!("{id}: tree: {v}"));
            }
            if let Some(path) = &result.path {
                solved += 1;
                if let Err(v) = path.check(&problem) {
                    violations.push(format!("{id}: path: {v}"));
                }
            }
        }
    }
    let elapsed = started.elapsed();
    let total = n_maps * per_map;
    let pass = violations.is_empty() && elapsed < limit;
    let detail = format!(
        "{total} problems, {solved} solved, {} violation(s){}",
        violations.len(),
        violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
    );
    (Outcome { pass, detail }, elapsed)
}

/// Empty 50x50 map, (5,5) to (45,45), radius 3, RRT budget 5,000, 100 seeds:
/// every run succeeds. Limit: 30 seconds.
fn completeness() -> (Outcome, Duration) {
    let started = Instant::now();
    let map = Arc::new(GridMap::empty(50, 50).unwrap());
    let problem = PlanningProblem::new(map, State::new(5.0, 5.0), State::new(45.0, 45.0), 3.0).unwrap();
    let params = PlannerParams {
        max_iterations: 5000,
        validate_every: None,
        ..Default::default()
    };
    let ok = (0..100u64)
        .filter(|&s| plan_rrt(&problem, &params, &mut seed::rng(s)).unwrap().success())
        .count();
    let elapsed = started.elapsed();
    let pass = ok == 100 && elapsed < Duration::from_secs(30);
    (Outcome { pass, detail: format!("{ok}/100 runs found a path") }, elapsed)
}

/// Empty 201x201 map, straight-line problem, RRT* with 50,000 iterations,
/// 50 seeds: median final cost at most 1.05 times the straight-line distance.
fn asymptotic_optimality() -> (Outcome, Duration) {
    let started = Instant::now();
    let map = Arc::new(GridMap::empty(201, 201).unwrap());
    let (init, goal) = (State::new(20.5, 100.5), State::new(180.5, 100.5));
    let problem = PlanningProblem::new(map.clone(), init, goal, 3.0).unwrap();
    let params = PlannerParams {
        max_iterations: 50_000,
        validate_every: None,
        ..Default::default()
    };
    let sampler = Sampler::uniform(&map, goal, &params).unwrap();
    let costs: Vec<f64> = (0..50u64)
        .map(|s| {
            plan_rrt_star(&problem, &params, &sampler, StopRule::Budget, &mut seed::rng(s))
                .unwrap()
                .best_cost()
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let straight = init.distance(&goal);
    let m = median(&costs);
    let ratio = m / straight;
    // Paths may stop anywhere inside the goal disk, so the true optimum is
    // shorter than the straight line by the goal radius.
    let optimum = straight - problem.goal_radius;
    let pass = ratio <= 1.05;
    (
        Outcome {
            pass,
            detail: format!(
                "median cost {m:.2} over straight line {straight:.2} = {ratio:.4} (limit 1.05); {:.4} of the optimum {optimum:.2}",
                m / optimum
            ),
        },
        started.elapsed(),
    )
}

/// With mu = 10, the heuristic branch serves 0.90 +- 0.02 of 10,000 draws.
fn heuristic_mixing() -> (Outcome, Duration) {
    let started = Instant::now();
    let spec = MapSpec::new(MapFamily::ScatteredBlocks, 5);
    let map = Arc::new(generate_map(&spec).unwrap());
    let mut rng = seed::rng(77);
    let (init, goal) = loop {
        let (a, b) = (random_free(&map, &mut rng), random_free(&map, &mut rng));
        if a.distance(&b) > 100.0 {
            break (a, b);
        }
    };
    let problem = PlanningProblem::new(map.clone(), init, goal, 3.0).unwrap();
    let gt = ground_truth_region(&problem, &GroundTruthConfig::default(), 8).unwrap();
    let h = gt.mask.discretize().unwrap();
    let params = PlannerParams::default();
    assert_eq!(params.mu, 10.0);
    let sampler = Sampler::from_params(&map, goal, &params, Some(&h)).unwrap();
    let heuristic = (0..10_000)
        .filter(|_| sampler.draw(&mut rng).1 == SampleSource::Heuristic)
        .count();
    let f = heuristic as f64 / 10_000.0;
    let pass = (f - 0.90).abs() <= 0.02;
    (
        Outcome { pass, detail: format!("heuristic fraction {f:.4} (target 0.90 +- 0.02)") },
        started.elapsed(),
    )
}

fn medians(records: &[TrialRecord], problem: &str, planner: PlannerKind, stage: Stage) -> (f64, f64, f64) {
    let rs: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.problem == problem && r.planner == planner && r.stage == stage)
        .collect();
    // Costs over successful trials; counts over all trials, where a trial that
    // never reached the stage contributes everything it spent.
    let costs: Vec<f64> = rs.iter().filter_map(|r| r.cost).collect();
    let iterations: Vec<f64> = rs.iter().map(|r| r.iterations as f64).collect();
    let nodes: Vec<f64> = rs.iter().map(|r| r.nodes as f64).collect();
    let cost = if costs.is_empty() { f64::INFINITY } else { median(&costs) };
    (cost, median(&iterations), median(&nodes))
}

/// Five fixture problems, 50 trials each, ground-truth-region RRT* against
/// uniform RRT*. Limit: 30 minutes.
fn benchmark_direction() -> (Outcome, Duration) {
    let started = Instant::now();
    let problems = fixture_problems(&GroundTruthConfig::default()).unwrap();
    let config = BenchConfig {
        trials: 50,
        seed: 1,
        ..Default::default()
    };
    let cmp = run_comparison(&problems, &config).unwrap();
    let violations = validate_records(&cmp.records, &cmp.references);
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    let mut lines = Vec::new();
    for p in &problems {
        let (ui_cost, _, _) = medians(&cmp.records, &p.id, PlannerKind::RrtStar, Stage::Initial);
        let (hi_cost, _, _) = medians(&cmp.records, &p.id, PlannerKind::HeuristicRrtStar, Stage::Initial);
        let (uo_cost, uo_it, uo_nodes) = medians(&cmp.records, &p.id, PlannerKind::RrtStar, Stage::Optimal);
        let (ho_cost, ho_it, ho_nodes) =
            medians(&cmp.records, &p.id, PlannerKind::HeuristicRrtStar, Stage::Optimal);
        let it_ratio = uo_it / ho_it;
        let node_cut = 1.0 - ho_nodes / uo_nodes;
        let cost_gap = (ho_cost - uo_cost).abs() / uo_cost.min(ho_cost);
        a += (hi_cost < ui_cost) as usize;
        b += (it_ratio >= 2.0) as usize;
        c += (node_cut >= 0.20) as usize;
        d += (cost_gap <= 0.03) as usize;
        lines.push(format!(
            "{}: initial cost {hi_cost:.1} vs {ui_cost:.1}, iterations x{it_ratio:.2}, nodes -{:.0}%, optimal cost gap {:.2}%",
            p.id,
            100.0 * node_cut,
            100.0 * cost_gap
        ));
    }
    let elapsed = started.elapsed();
    let mut out = std::io::stdout().lock();
    for l in &lines {
        let _ = writeln!(out, "    {l}");
    }
    let pass = a >= 4 && b >= 4 && c >= 4 && d >= 4 && violations.is_empty()
        && elapsed < Duration::from_secs(1800);
    (
        Outcome {
            pass,
            detail: format!(
                "(a) lower initial cost {a}/5, (b) >=2x fewer iterations {b}/5, (c) >=20% fewer nodes {c}/5, (d) optimal cost within 3% {d}/5, {} record violation(s)",
                violations.len()
            ),
        },
        elapsed,
    )
}

/// 100 freshly generated ground-truth regions, read back from their images,
/// pass the connectivity check at least 99 times.
fn connectivity_oracle() -> (Outcome, Duration) {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = DatasetConfig {
        families: MapFamily::ALL.to_vec(),
        maps_per_family: 4,
        pairs_min: 6,
        pairs_max: 6,
        seed: 31,
        ..Default::default()
    };
    let out = generate_dataset(&config, dir.path()).unwrap();
    // A few more pairs than needed are generated because infeasible pairs are
    // skipped; the first 100 emitted samples are checked.
    let records = &out.manifest.records[..out.manifest.records.len().min(100)];
    let connected = records
        .iter()
        .enumerate()
        .filter(|(i, r)| {
            let s = load_sample(dir.path(), r).unwrap();
            connectivity_check(&s.region, &s.problem, 5000, seed::derive(9, &[*i as u64]))
        })
        .count();
    let n = records.len();
    let rate = connected as f64 / n.max(1) as f64;
    let pass = n >= 100 && rate >= 0.99;
    (
        Outcome {
            pass,
            detail: format!("{connected}/{n} regions connected"),
        },
        started.elapsed(),
    )
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                files.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    files.sort();
    files
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_regionrrt"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

/// Runs a command, then re-runs it from the `config.resolved.json` it wrote
/// and compares every file under `out_dir`.
fn rerun_matches(name: &str, args: &[&str], out_dir: &Path) -> Result<usize, String> {
    run_cli(args)?;
    let first = snapshot(out_dir);
    let resolved = out_dir.join("config.resolved.json");
    if !resolved.exists() {
        return Err(format!("{name}: no config.resolved.json"));
    }
    // Keep the resolved file outside the output directory during the re-run.
    let saved = out_dir.with_extension("resolved.json");
    std::fs::copy(&resolved, &saved).unwrap();
    std::fs::remove_dir_all(out_dir).unwrap();
    let sub = args[0];
    run_cli(&[sub, "--config", saved.to_str().unwrap()])?;
    let second = snapshot(out_dir);
    let names = |s: &[(PathBuf, Vec<u8>)]| s.iter().map(|f| f.0.clone()).collect::<Vec<_>>();
    if names(&first) != names(&second) {
        return Err(format!("{name}: file sets differ"));
    }
    for (a, b) in first.iter().zip(&second) {
        if a.1 != b.1 {
            return Err(format!("{name}: {} differs", a.0.display()));
        }
    }
    Ok(first.len())
}

/// Every subcommand re-run from its resolved config reproduces its outputs
/// byte for byte. Runs that record wall-clock time use --no-timing.
fn reproducibility() -> (Outcome, Duration) {
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let p = |s: &str| tmp.path().join(s);
    let s = |path: &Path| path.to_str().unwrap().to_string();

    let maps = p("maps");
    let data = p("data");
    let plan_dir = p("plan");
    let eval_one = p("eval-one");
    let eval_batch = p("eval-batch");
    let pred = p("pred");
    let bench = p("bench");
    let mut checks: Vec<(&str, Result<usize, String>)> = Vec::new();

    checks.push((
        "gen-maps",
        rerun_matches(
            "gen-maps",
            &["gen-maps", "--family", "rooms", "--count", "3", "--seed", "4", "--out", &s(&maps)],
            &maps,
        ),
    ));
    checks.push((
        "gen-dataset",
        rerun_matches(
            "gen-dataset",
            &[
                "gen-dataset", "--families", "maze,wall-gaps", "--maps", "2", "--pairs-min", "2",
                "--pairs-max", "3", "--runs", "10", "--trainer-side", "64", "--seed", "9",
                "--out", &s(&data),
            ],
            &data,
        ),
    ));

    // Inputs for the remaining commands come from the dataset just written.
    let manifest = regionrrt::dataset::Manifest::read(&data).unwrap();
    let r = &manifest.records[0];
    let (init, goal) = (r.init.to_string(), r.goal.to_string());
    let map_file = s(&data.join(&r.files.map));
    let region_file = s(&data.join(&r.files.region));
    std::fs::create_dir_all(&pred).unwrap();
    for rec in &manifest.records {
        std::fs::copy(
            data.join(&rec.files.region),
            pred.join(format!("{}_region_pred.png", rec.id)),
        )
        .unwrap();
    }

    checks.push((
        "plan",
        rerun_matches(
            "plan",
            &[
                "plan", "--map", &map_file, "--init", &init, "--goal", &goal, "--planner",
                "rrt-star", "--region", &region_file, "--iters", "4000", "--seed", "5",
                "--no-timing", "--out", &s(&plan_dir.join("trace.csv")),
            ],
            &plan_dir,
        ),
    ));
    checks.push((
        "eval-region (single)",
        rerun_matches(
            "eval-region",
            &[
                "eval-region", "--region", &region_file, "--map", &map_file, "--init", &init,
                "--goal", &goal, "--budget", "5000", "--out", &s(&eval_one),
            ],
            &eval_one,
        ),
    ));
    checks.push((
        "eval-region (batch)",
        rerun_matches(
            "eval-region",
            &[
                "eval-region", "--data", &s(&data), "--pred", &s(&pred), "--split", "test",
                "--budget", "5000", "--seed", "2", "--out", &s(&eval_batch),
            ],
            &eval_batch,
        ),
    ));
    checks.push((
        "bench",
        rerun_matches(
            "bench",
            &[
                "bench", "--fixtures", "--region-source", "ground-truth", "--trials", "2",
                "--iters", "20000", "--reference-iters", "50000", "--seed", "3", "--no-timing",
                "--out", &s(&bench),
            ],
            &bench,
        ),
    ));

    let failures: Vec<String> = checks
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    let files: usize = checks.iter().filter_map(|(_, r)| r.as_ref().ok()).sum();
    let detail = if failures.is_empty() {
        format!("{} commands, {files} output files identical on re-run", checks.len())
    } else {
        failures.join("; ")
    };
    (Outcome { pass: failures.is_empty(), detail }, started.elapsed())
}

#[test]
fn acceptance_criteria() {
    type Criterion = (u32, &'static str, fn() -> (Outcome, Duration));
    let criteria: [Criterion; 7] = [
        (1, "planner soundness", planner_soundness),
        (2, "completeness smoke", completeness),
        (3, "asymptotic optimality proxy", asymptotic_optimality),
        (4, "heuristic mixing", heuristic_mixing),
        (5, "heuristic vs uniform RRT* on fixtures", benchmark_direction),
        (6, "connectivity oracle", connectivity_oracle),
        (7, "reproducibility", reproducibility),
    ];
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        let (outcome, elapsed) = run();
        report(n, name, &outcome, elapsed);
        if !outcome.pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
