//! Acceptance gate: one integration test per release criterion, each ending
//! in an `acceptance NN (...): PASS` line (run with `--nocapture` to see
//! them). Dataset-conditional checks print `SKIPPED` with the reason instead
//! of silently passing.
//!
//! Every derived number is checked against an oracle implemented here,
//! independently of the library: exact joint enumeration for information,
//! batch normal equations for the sequential conjugate update, central
//! finite differences for gradients, a dense grid for the two-point mixture,
//! bitmask enumeration for smallest maximal independent sets, and closed-form
//! least squares for the budget sweep.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};

use asd::bench::{hard_instance_demo, run_experiment, ExperimentConfig, ModelKind, PolicyKind};
use asd::graph::{estimate_smallest_mis, gen_complete, greedy_clique_cover, Graph};
use asd::infotheory::{exact_info_gain, DiscreteLabelModel};
use asd::policies::{select_from_delta_gain, two_point_mix, vids_gain_weighted};
use asd::posterior::{
    laplace_fit, logistic_log_posterior_gradient, GaussianLinearPosterior, GibbsConfig,
    LaplaceConfig, LowRankGibbsState, PosteriorSampleSet,
};
use asd::replay::{load_dataset, replay_run, replay_table, ReplayConfig};
use asd::rng::substream;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn standard_error(values: &[f64]) -> f64 {
    sample_sd(values) / (values.len() as f64).sqrt()
}

/// Final regrets of one policy, ordered by run id.
fn finals_for(result: &asd::bench::ExperimentResult, policy: PolicyKind) -> Vec<f64> {
    result
        .records
        .iter()
        .filter(|r| r.policy == policy)
        .map(|r| r.final_regret)
        .collect()
}

#[test]
fn acceptance_01_variance_bound_on_information_gain() {
    let start = Instant::now();
    let mut rng = substream(101, &[]);
    for instance in 0..200 {
        let thetas = rng.random_range(1..=5usize);
        let candidates = rng.random_range(1..=6usize);
        let mut probs = Vec::with_capacity(thetas);
        let mut rows = Vec::with_capacity(thetas);
        for _ in 0..thetas {
            let mut per_theta = Vec::with_capacity(candidates);
            let mut row = Vec::with_capacity(candidates);
            for _ in 0..candidates {
                let p: f64 = rng.random();
                per_theta.push(vec![1.0 - p, p]);
                row.push(p);
            }
            probs.push(per_theta);
            rows.push(row);
        }
        let model = DiscreteLabelModel::new(vec![0.0, 1.0], probs).unwrap();
        let raw: Vec<f64> = (0..thetas).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let prior: Vec<f64> = raw.into_iter().map(|w| w / total).collect();

        // Rows enumerate the exact posterior support, so the weighted gain is
        // the exact variance of the conditional mean, not an estimate.
        let set = PosteriorSampleSet::from_rows(rows).unwrap();
        let gain = vids_gain_weighted(&set, &prior).unwrap();
        for (x, &g) in gain.iter().enumerate() {
            let exact = exact_info_gain(&prior, &model, x, 1).unwrap();
            assert!(
                g <= exact + 1e-9,
                "instance {instance}, candidate {x}: variance proxy {g} exceeds exact gain {exact}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("acceptance 01 (variance bound on information gain): PASS");
}

#[test]
fn acceptance_02_conjugacy_exactness() {
    // One observation of x = 1, y = 1 on a unit prior with unit noise splits
    // the difference exactly: posterior N(0.5, 0.5).
    let mut post = GaussianLinearPosterior::new(1, 1.0, 1.0).unwrap();
    post.update(&[1.0], 1.0).unwrap();
    assert!((post.mean()[0] - 0.5).abs() < 1e-12);
    assert!((post.cov()[(0, 0)] - 0.5).abs() < 1e-12);

    let mut rng = substream(202, &[]);
    for _ in 0..20 {
        let d = rng.random_range(1..=10usize);
        let n = 50;
        let prior_sd: f64 = rng.random_range(0.5..2.0);
        let noise_sd: f64 = rng.random_range(0.5..2.0);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();

        let mut in_order = GaussianLinearPosterior::new(d, prior_sd, noise_sd).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            in_order.update(x, y).unwrap();
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut shuffled = GaussianLinearPosterior::new(d, prior_sd, noise_sd).unwrap();
        for &i in &perm {
            shuffled.update(&xs[i], ys[i]).unwrap();
        }
        for i in 0..d {
            assert!(
                (in_order.mean()[i] - shuffled.mean()[i]).abs() < 1e-10,
                "posterior mean depends on observation order"
            );
            for j in 0..d {
                assert!(
                    (in_order.cov()[(i, j)] - shuffled.cov()[(i, j)]).abs() < 1e-10,
                    "posterior covariance depends on observation order"
                );
            }
        }

        // Batch normal equations, solved directly, as the independent oracle.
        let x_mat = DMatrix::from_fn(n, d, |r, c| xs[r][c]);
        let y_vec = DVector::from_column_slice(&ys);
        let precision = DMatrix::identity(d, d) / (prior_sd * prior_sd)
            + x_mat.transpose() * &x_mat / (noise_sd * noise_sd);
        let chol = Cholesky::new(precision).expect("positive definite");
        let mean = chol.solve(&(x_mat.transpose() * y_vec / (noise_sd * noise_sd)));
        let cov = chol.inverse();
        for i in 0..d {
            assert!((in_order.mean()[i] - mean[i]).abs() < 1e-8);
            for j in 0..d {
                assert!((in_order.cov()[(i, j)] - cov[(i, j)]).abs() < 1e-8);
            }
        }
    }
    println!("acceptance 02 (conjugate update exactness): PASS");
}

#[test]
fn acceptance_03_logistic_mode_validity() {
    let mut rng = substream(303, &[]);
    let cfg = LaplaceConfig::default();
    for instance in 0..100 {
        let d = rng.random_range(1..=10usize);
        let n = 50;
        let theta_true: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| {
                let z: f64 = x.iter().zip(&theta_true).map(|(a, b)| a * b).sum();
                let p = 1.0 / (1.0 + (-z).exp());
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();

        let fit = laplace_fit(&xs, &ys, d, &cfg).unwrap();
        assert!(fit.converged(), "instance {instance} did not converge");
        let mode: Vec<f64> = fit.mode().iter().copied().collect();
        let grad = logistic_log_posterior_gradient(&xs, &ys, &mode, cfg.prior_sd);
        let sup = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        assert!(sup < 1e-8, "instance {instance}: gradient sup-norm {sup}");

        // Central finite differences at a random probe point, where the
        // gradient is far from zero, so relative agreement is well posed.
        let probe: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = logistic_log_posterior_gradient(&xs, &ys, &probe, cfg.prior_sd);
        let h = 1e-5;
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..d {
            let mut plus = probe.clone();
            plus[i] += h;
            let mut minus = probe.clone();
            minus[i] -= h;
            let fd = (asd::posterior::logistic_log_posterior(&xs, &ys, &plus, cfg.prior_sd)
                - asd::posterior::logistic_log_posterior(&xs, &ys, &minus, cfg.prior_sd))
                / (2.0 * h);
            worst = worst.max((fd - analytic[i]).abs());
            scale = scale.max(analytic[i].abs());
        }
        assert!(
            worst <= 1e-4 * scale,
            "instance {instance}: finite differences disagree by {worst} (scale {scale})"
        );
    }
    println!("acceptance 03 (logistic mode and gradient validity): PASS");
}

#[test]
fn acceptance_04_low_rank_posterior_improves_with_data() {
    let start = Instant::now();
    let size = 15;
    let rank = 2;
    let noise_sd = 0.1;
    let mut wins = 0;
    for seed in 0..10u64 {
        let mut rng = substream(404, &[seed]);
        let u = DMatrix::<f64>::from_fn(size, rank, |_, _| StandardNormal.sample(&mut rng));
        let v = DMatrix::<f64>::from_fn(size, rank, |_, _| StandardNormal.sample(&mut rng));
        let truth = &u * v.transpose();

        let mut cells: Vec<(usize, usize)> = (0..size)
            .flat_map(|r| (0..size).map(move |c| (r, c)))
            .collect();
        cells.shuffle(&mut rng);
        let small = (cells.len() as f64 * 0.1).floor() as usize; // 22 of 225
        let large = (cells.len() as f64 * 0.6).floor() as usize; // 135 of 225
        let heldout: Vec<(usize, usize)> = cells[large..].to_vec();

        let rmse = |observed: &[(usize, usize)], rng: &mut rand_chacha::ChaCha8Rng| {
            let mut chain = LowRankGibbsState::new(
                size,
                size,
                rank,
                1.0,
                noise_sd,
                GibbsConfig::default(),
                rng,
            )
            .unwrap();
            for &(r, c) in observed {
                let z: f64 = StandardNormal.sample(rng);
                chain.observe(r, c, truth[(r, c)] + noise_sd * z).unwrap();
            }
            let set = chain.sample_set(&heldout, 40, rng).unwrap();
            let means = set.mean_per_candidate();
            let ss: f64 = heldout
                .iter()
                .zip(&means)
                .map(|(&(r, c), &m)| (truth[(r, c)] - m) * (truth[(r, c)] - m))
                .sum();
            (ss / heldout.len() as f64).sqrt()
        };

        let rmse_small = rmse(&cells[..small], &mut rng);
        let rmse_large = rmse(&cells[..large], &mut rng);
        if rmse_large < rmse_small {
            wins += 1;
        }
    }
    assert!(wins >= 9, "held-out error shrank in only {wins}/10 seeds");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!("acceptance 04 (low-rank posterior improves with data): PASS");
}

#[test]
fn acceptance_05_linear_benchmark_ordering() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::for_model(ModelKind::Linear);
    cfg.policies = vec![PolicyKind::Ids, PolicyKind::Ts, PolicyKind::Random];
    cfg.base_seed = 505;
    let result = run_experiment(&cfg).unwrap();
    let ids = finals_for(&result, PolicyKind::Ids);
    let ts = finals_for(&result, PolicyKind::Ts);
    let random = finals_for(&result, PolicyKind::Random);

    // Policies share each run's environment draw, so the difference of
    // paired finals is the natural estimator and its standard error the
    // natural scale.
    for (name, policy_finals) in [("ids", &ids), ("ts", &ts)] {
        let diffs: Vec<f64> = random
            .iter()
            .zip(policy_finals)
            .map(|(r, p)| r - p)
            .collect();
        let gap = mean(&diffs);
        let se = standard_error(&diffs);
        assert!(
            gap > 0.0 && gap >= 2.0 * se,
            "{name} beats random by {gap:.2} but needs 2 standard errors ({:.2})",
            2.0 * se
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!("acceptance 05 (linear benchmark ordering): PASS");
}

#[test]
fn acceptance_06_complete_graph_equivalence() {
    let mut cfg = ExperimentConfig::for_model(ModelKind::GraphComplete);
    cfg.pool_size = 225;
    cfg.policies = vec![PolicyKind::Ids, PolicyKind::Ts];
    cfg.base_seed = 606;
    let result = run_experiment(&cfg).unwrap();
    let ids = finals_for(&result, PolicyKind::Ids);
    let ts = finals_for(&result, PolicyKind::Ts);
    let gap = (mean(&ids) - mean(&ts)).abs();
    let pooled = (standard_error(&ids).powi(2) + standard_error(&ts).powi(2)).sqrt();
    assert!(
        gap <= pooled,
        "complete-graph gap {gap:.3} exceeds one pooled standard error {pooled:.3}"
    );
    println!("acceptance 06 (complete-graph equivalence): PASS");
}

#[test]
fn acceptance_07_star_graph_separation() {
    let mut cfg = ExperimentConfig::for_model(ModelKind::GraphStar);
    cfg.pool_size = 225;
    cfg.noise_sd = 1.0;
    cfg.policies = vec![PolicyKind::Ids, PolicyKind::Ts];
    cfg.base_seed = 707;
    let result = run_experiment(&cfg).unwrap();
    let ids = finals_for(&result, PolicyKind::Ids);
    let ts = finals_for(&result, PolicyKind::Ts);
    let gap = mean(&ts) - mean(&ids);
    let pooled = (standard_error(&ids).powi(2) + standard_error(&ts).powi(2)).sqrt();
    assert!(
        gap >= pooled,
        "star-graph advantage {gap:.3} is below one pooled standard error {pooled:.3}"
    );
    println!("acceptance 07 (star-graph separation): PASS");
}

#[test]
fn acceptance_08_uniform_selection_regret_grows_linearly() {
    let budgets = [20usize, 40, 80];
    let points = hard_instance_demo(&budgets, 10, 0.5, 808).unwrap();
    assert_eq!(points.len(), 3);

    // Closed-form least squares of mean final regret against the budget.
    let xs: Vec<f64> = points.iter().map(|p| p.budget as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.regret_mean).collect();
    let xm = mean(&xs);
    let ym = mean(&ys);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    assert!(slope > 0.0, "regret should grow with the budget, slope {slope}");
    assert!(r2 > 0.95, "regret growth is not linear enough: R^2 = {r2:.4}");
    println!("acceptance 08 (uniform-selection regret grows linearly): PASS");
}

#[test]
fn acceptance_09_selection_invariances() {
    let mut rng = substream(909, &[]);

    // Positive rescaling of either score vector cannot change the choice.
    for case in 0..1000 {
        let n = rng.random_range(2..=8usize);
        let lambda = [1.0, 2.0, 3.0][case % 3];
        let delta: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    0.0
                } else {
                    rng.random_range(0.01..3.0)
                }
            })
            .collect();
        let gain: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    0.0
                } else {
                    rng.random_range(0.01..2.0)
                }
            })
            .collect();
        let a: f64 = rng.random_range(0.1..10.0);
        let b: f64 = rng.random_range(0.1..10.0);
        let scaled_delta: Vec<f64> = delta.iter().map(|d| a * d).collect();
        let scaled_gain: Vec<f64> = gain.iter().map(|g| b * g).collect();
        let (base, _) = select_from_delta_gain(&delta, &gain, lambda).unwrap();
        for (d, g) in [
            (&scaled_delta, &gain),
            (&delta, &scaled_gain),
            (&scaled_delta, &scaled_gain),
        ] {
            let (chosen, _) = select_from_delta_gain(d, g, lambda).unwrap();
            assert_eq!(chosen, base, "case {case}: rescaling moved the choice");
        }
    }

    // The optimal two-point mixture is never worse than the best singleton.
    for case in 0..1000 {
        let n = rng.random_range(2..=6usize);
        let delta: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.05 {
                    0.0
                } else {
                    rng.random_range(0.01..3.0)
                }
            })
            .collect();
        let gain: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.05 {
                    0.0
                } else {
                    rng.random_range(0.01..2.0)
                }
            })
            .collect();
        let mix = two_point_mix(&delta, &gain).unwrap();
        let (_, ratios) = select_from_delta_gain(&delta, &gain, 2.0).unwrap();
        let det_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            mix.psi <= det_min + 1e-12,
            "case {case}: mixture ratio {} exceeds deterministic minimum {det_min}",
            mix.psi
        );
    }

    // Worked pair, plus a dense 1-D grid as the independent oracle.
    let delta = [0.3, 0.1];
    let gain = [0.9, 0.1];
    let mix = two_point_mix(&delta, &gain).unwrap();
    assert_eq!((mix.first, mix.second), (0, 1));
    assert!((mix.weight_first - 0.25).abs() < 1e-6, "weight {}", mix.weight_first);
    assert!((mix.psi - 0.075).abs() < 1e-6, "ratio {}", mix.psi);
    let grid_min = (0..=10_000)
        .map(|k| {
            let p = k as f64 / 10_000.0;
            let d = p * delta[0] + (1.0 - p) * delta[1];
            let g = p * gain[0] + (1.0 - p) * gain[1];
            d * d / g
        })
        .fold(f64::INFINITY, f64::min);
    assert!((grid_min - 0.075).abs() < 1e-6);
    assert!(mix.psi <= grid_min + 1e-9);
    println!("acceptance 09 (selection invariances): PASS");
}

/// Exhaustive smallest maximal independent set size by bitmask enumeration:
/// a set is maximal independent iff it is independent and dominating.
fn exhaustive_smallest_mis(graph: &Graph) -> usize {
    let n = graph.node_count();
    let mut best = usize::MAX;
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&u| mask & (1 << u) != 0).collect();
        let independent = members
            .iter()
            .all(|&u| members.iter().all(|&v| v <= u || !graph.has_edge(u, v)));
        if !independent {
            continue;
        }
        let dominating = (0..n).all(|u| {
            mask & (1 << u) != 0 || graph.neighbors(u).iter().any(|&v| mask & (1 << v) != 0)
        });
        if dominating {
            best = best.min(members.len());
        }
    }
    best
}

#[test]
fn acceptance_10_graph_diagnostics() {
    let mut rng = substream(1010, &[]);
    for case in 0..100 {
        let n = rng.random_range(2..=7usize);
        // Random spanning tree plus extra edges, so the graph is connected.
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(&mut rng);
        let mut edges = Vec::new();
        for i in 1..n {
            let j = rng.random_range(0..i);
            edges.push((nodes[i], nodes[j]));
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < 0.3 {
                    edges.push((u, v));
                }
            }
        }
        let graph = Graph::from_edges(n, &edges).unwrap();
        let estimate = estimate_smallest_mis(&graph, 64, &mut rng);
        let exact = exhaustive_smallest_mis(&graph);
        assert_eq!(
            estimate, exact,
            "case {case}: estimate missed the exhaustive optimum on {} nodes",
            n
        );
        let cover = greedy_clique_cover(&graph).len();
        assert!(
            estimate <= cover,
            "case {case}: smallest-set estimate {estimate} exceeds clique cover {cover}"
        );
    }
    for n in 1..=8 {
        assert_eq!(greedy_clique_cover(&gen_complete(n)).len(), 1);
        assert_eq!(greedy_clique_cover(&Graph::empty(n)).len(), n);
    }
    println!("acceptance 10 (graph diagnostics): PASS");
}

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn acceptance_11_replay_pipeline() {
    let dataset = load_dataset(
        data_path("synthetic_features.csv"),
        data_path("synthetic_yields.csv"),
    )
    .unwrap();
    assert_eq!(dataset.len(), 80);
    assert_eq!(dataset.dim(), 10);

    let cfg = ReplayConfig {
        runs: 3,
        base_seed: 1111,
        ..ReplayConfig::default()
    };

    // Replayed labels are the recorded responses themselves, so the oracle's
    // regret is an exact floating-point zero on every target.
    for name in dataset.target_names() {
        let summary = replay_run(&dataset, name, PolicyKind::Oracle, &cfg).unwrap();
        assert_eq!(summary.horizon, 16);
        assert!(
            summary.finals.iter().all(|&r| r == 0.0),
            "oracle regret on {name} is not exactly zero: {:?}",
            summary.finals
        );
    }

    let policies = [PolicyKind::Ids, PolicyKind::Random, PolicyKind::Oracle];
    let first = replay_table(&dataset, &policies, &cfg).unwrap();
    let second = replay_table(&dataset, &policies, &cfg).unwrap();
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.target, b.target);
        assert_eq!(a.policy, b.policy);
        assert!(
            a.regret_mean == b.regret_mean && a.finals == b.finals,
            "rerun of {} / {} is not bit-identical",
            a.target,
            a.policy
        );
    }
    println!("acceptance 11 (replay pipeline on bundled data): PASS");

    // The original recorded datasets are not redistributable. When compatible
    // CSVs are placed under data/, the reference values are checked too.
    let features = data_path("pndc_features.csv");
    let yields = data_path("pndc_yields.csv");
    if !features.exists() || !yields.exists() {
        println!(
            "acceptance 11 (recorded-data reference values): SKIPPED (data/pndc_*.csv not present)"
        );
        return;
    }
    let recorded = load_dataset(&features, &yields).unwrap();
    let ref_cfg = ReplayConfig {
        runs: 10,
        base_seed: 1111,
        ..ReplayConfig::default()
    };
    let x2 = recorded
        .target_names()
        .into_iter()
        .find(|n| n.eq_ignore_ascii_case("x2"))
        .expect("recorded dataset has an x2 target");
    let random = replay_run(&recorded, x2, PolicyKind::Random, &ref_cfg).unwrap();
    let sd = random.regret_sd.unwrap_or(0.0);
    assert!(
        (random.regret_mean - 8.77).abs() <= 3.0 * sd,
        "random-policy regret {} (sd {sd}) is not within 3 sd of the reference 8.77",
        random.regret_mean
    );
    let mut wins = 0;
    let mut total = 0;
    for name in recorded.target_names() {
        let ids = replay_run(&recorded, name, PolicyKind::Ids, &ref_cfg).unwrap();
        let rand_run = replay_run(&recorded, name, PolicyKind::Random, &ref_cfg).unwrap();
        total += 1;
        if ids.regret_mean < rand_run.regret_mean {
            wins += 1;
        }
    }
    assert!(
        wins * 11 >= total * 9,
        "directed sampling beat random on only {wins}/{total} recorded targets"
    );
    println!("acceptance 11 (recorded-data reference values): PASS");
}
