//! Acceptance suite: one PASS/FAIL line per criterion, full-scale experiments
//! included. Exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use netwalk::experiments::figures::{fraction_trend, run_figure, with_threads, Figure, FigureParams, Profile};
use netwalk::experiments::hub_correlation;
use netwalk_core::dynamics::Simulation;
use netwalk_core::seed::{derive_seed, graph_seed, sim_seed};
use netwalk_core::stats::{ols_fit, pearson, percentile, skewness, spearman};
use netwalk_core::{generate, giant_component, init_state, stationary_prediction, step, Graph, GraphSpec, Model, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed for every full-scale experiment; the CLI default.
const MASTER_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{v:.3}"))
}

// ---- dense transition-matrix oracle ----

#[allow(clippy::needless_range_loop)]
fn dense_step(g: &Graph, p: f64, v: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for j in 0..n {
        a[j][j] = 1.0 - p;
        for &i in g.neighbors(j) {
            a[i][j] += p / g.degree(j) as f64;
        }
    }
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn random_small_graph(rng: &mut ChaCha8Rng, i: u64) -> Graph {
    let model = if i.is_multiple_of(2) { Model::Er } else { Model::Ba };
    let node_count = rng.random_range(6..=50);
    let avg_degree = rng.random_range(2..=8).min(node_count - 2) as f64;
    let spec = GraphSpec { model, node_count, avg_degree, rng_seed: rng.random() };
    giant_component(&generate(&spec).unwrap()).0
}

fn conservation_and_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(MASTER_SEED, 1, &[]));
    let (mut worst_node, mut worst_mass) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let g = random_small_graph(&mut rng, i);
        let p = rng.random_range(0.05..0.95);
        let cfg = SimConfig::new(p, 1000.0, rng.random_range(1..=g.node_count().min(8)), rng.random());
        let (mut state, _) = init_state(&g, &cfg).unwrap();
        let mut dense = state.masses.clone();
        for t in 1..=50 {
            state = step(&state, &g, p).unwrap();
            dense = dense_step(&g, p, &dense);
            let total: f64 = state.masses.iter().sum();
            worst_mass = worst_mass.max((total - 1000.0).abs() / 1000.0);
            if [1, 5, 50].contains(&t) {
                for (a, b) in state.masses.iter().zip(&dense) {
                    worst_node = worst_node.max((a - b).abs());
                }
            }
        }
    }
    outcome(
        worst_node <= 1e-9 && worst_mass <= 1e-9,
        format!("50 graphs, max node error {worst_node:.1e}, max relative mass drift {worst_mass:.1e}"),
    )
}

fn stationarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(MASTER_SEED, 2, &[]));
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let model = if i.is_multiple_of(2) { Model::Er } else { Model::Ba };
        let node_count = rng.random_range(100..=500);
        let spec = GraphSpec { model, node_count, avg_degree: 6.0, rng_seed: graph_seed(MASTER_SEED, i) };
        let g = giant_component(&generate(&spec).unwrap()).0;
        let cfg = SimConfig::new(0.4, 10_000.0, 4, sim_seed(MASTER_SEED, i, 0));
        let result = Simulation::new(g.clone(), cfg).unwrap().run();
        let Some(t_sat) = result.saturation_time else {
            failures.push(format!("graph {i} did not saturate"));
            continue;
        };
        let mut state = result.final_state;
        while state.tick < 10 * t_sat {
            state = step(&state, &g, 0.4).unwrap();
        }
        let w = stationary_prediction(&g, 10_000.0);
        let dev = state.masses.iter().zip(&w).map(|(m, w)| (m - w).abs() / w).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    outcome(
        failures.is_empty() && worst <= 1e-6,
        format!("20 graphs, max relative deviation {worst:.1e} {}", failures.join("; ")),
    )
}

// ---- brute-force statistics oracles ----

fn oracle_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn oracle_ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    // Normal equations by Cramer's rule on raw sums of the centred data.
    let (mx, my) = (oracle_mean(xs), oracle_mean(ys));
    let n = xs.len() as f64;
    let cx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let cy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let (sx, sy) = (cx.iter().sum::<f64>(), cy.iter().sum::<f64>());
    let sxx: f64 = cx.iter().map(|x| x * x).sum();
    let sxy: f64 = cx.iter().zip(&cy).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det + my - slope * mx;
    let fitted: Vec<f64> = xs.iter().map(|x| intercept + slope * x).collect();
    let ss_res: f64 = ys.iter().zip(&fitted).map(|(y, f)| (y - f) * (y - f)).sum();
    let ss_tot: f64 = cy.iter().map(|y| y * y).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

fn oracle_skewness(xs: &[f64]) -> f64 {
    let mu = oracle_mean(xs);
    let m = |k: i32| xs.iter().map(|x| (x - mu).powi(k)).sum::<f64>() / xs.len() as f64;
    m(3) / m(2).powf(1.5)
}

fn oracle_percentile(xs: &[f64], q: f64) -> f64 {
    let mut sorted = xs.to_vec();
    // insertion sort
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            j -= 1;
        }
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[lo];
    }
    sorted[lo] * (1.0 - (pos - lo as f64)) + sorted[lo + 1] * (pos - lo as f64)
}

fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (oracle_mean(xs), oracle_mean(ys));
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    let sd = |v: &[f64], m: f64| (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sd(xs, mx) * sd(ys, my))
}

fn oracle_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let below = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn statistics_kit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(MASTER_SEED, 3, &[]));
    let mut worst = 0.0f64;
    let mut worst_r2_identity = 0.0f64;
    let mut track = |got: f64, want: f64| {
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    };
    for _ in 0..100 {
        let n = rng.random_range(5..=80);
        let scale = 10f64.powi(rng.random_range(-2..=3));
        let draw = |rng: &mut ChaCha8Rng| {
            let v: f64 = rng.random_range(-1.0..1.0) * scale;
            // about one value in four lands on a coarse grid to create ties
            if rng.random_bool(0.25) {
                (v / scale * 4.0).round() * scale / 4.0
            } else {
                v
            }
        };
        let xs: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let noise = rng.random_range(0.0..3.0);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + noise * draw(&mut rng)).collect();
        let q = rng.random_range(0.0..=100.0);

        let fit = ols_fit(&xs, &ys).unwrap();
        let (slope, intercept, r2) = oracle_ols(&xs, &ys);
        track(fit.slope, slope);
        track(fit.intercept, intercept);
        track(fit.r_squared, r2);
        track(skewness(&xs).unwrap(), oracle_skewness(&xs));
        track(percentile(&xs, q).unwrap(), oracle_percentile(&xs, q));
        let r = pearson(&xs, &ys).unwrap();
        track(r, oracle_pearson(&xs, &ys));
        track(spearman(&xs, &ys).unwrap(), oracle_pearson(&oracle_ranks(&xs), &oracle_ranks(&ys)));
        worst_r2_identity = worst_r2_identity.max((fit.r_squared - r * r).abs());
    }
    outcome(
        worst <= 1e-12 && worst_r2_identity <= 1e-12,
        format!("100 inputs, max scaled error {worst:.1e}, max |R² − r²| {worst_r2_identity:.1e}"),
    )
}

// ---- experiments ----

fn full(figure: Figure) -> FigureParams {
    let mut p = FigureParams::defaults(figure, Profile::Paper);
    p.master_seed = MASTER_SEED;
    p
}

fn saturation_spread(out: &Path) -> Outcome {
    let run = run_figure(&full(Figure::Fig3a), out).unwrap();
    let mut er_wider = 0;
    let mut ba_balanced = 0;
    let mut ratios = Vec::new();
    for (model, rates) in &run.rate_summaries {
        for r in rates {
            let (Some(up), Some(low)) = (r.upper_spread(), r.lower_spread()) else { continue };
            match model {
                Model::Er => er_wider += usize::from(up > low),
                Model::Ba => {
                    let ratio = up / low;
                    ratios.push(format!("{ratio:.2}"));
                    ba_balanced += usize::from((0.5..=2.0).contains(&ratio));
                }
            }
        }
    }
    outcome(
        er_wider >= 6 && ba_balanced >= 6,
        format!("ER upper > lower at {er_wider}/9 rates; BA ratio in [0.5, 2] at {ba_balanced}/9 (ratios {})", ratios.join(" ")),
    )
}

fn skew_fraction_smoke(out: &Path) -> Outcome {
    let run = run_figure(&FigureParams::defaults(Figure::Fig3b, Profile::Smoke), out).unwrap();
    let frac = |m: Model| run.ensembles.iter().find(|e| e.config.graph_spec.model == m).unwrap().fraction_above_threshold;
    let (er, ba) = (frac(Model::Er), frac(Model::Ba));
    outcome(
        matches!((er, ba), (Some(e), Some(b)) if e > b),
        format!("10 graphs x 20 sims: ER {} vs BA {}", fmt(er), fmt(ba)),
    )
}

fn degree_trend_smoke(out: &Path) -> Outcome {
    let params = FigureParams::defaults(Figure::Fig4a, Profile::Smoke);
    let run = run_figure(&params, out).unwrap();
    let rho = fraction_trend(&run.sweep, params.node_count);
    let fractions: Vec<String> = run.sweep.iter().map(|p| format!("k={}:{}", p.avg_degree, fmt(p.fraction()))).collect();
    outcome(rho.is_some_and(|r| r < 0.0), format!("25 x 50: Spearman {} ({})", fmt(rho), fractions.join(" ")))
}

fn degree_trend_full(out: &Path) -> Outcome {
    let run = run_figure(&full(Figure::Fig4a), out).unwrap();
    let counts: Vec<(f64, usize)> =
        run.sweep.iter().map(|p| (p.avg_degree, p.ensemble.graphs_above_threshold)).collect();
    let detail: Vec<String> = counts.iter().map(|(k, c)| format!("k={k}:{c}")).collect();
    outcome(
        counts.len() == 6 && counts.iter().all(|(_, c)| *c >= 1),
        format!("graphs with skewness >= 1 per <k>: {}", detail.join(" ")),
    )
}

fn tree_digest(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism(root: &Path) -> Outcome {
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for figure in [Figure::Fig3a, Figure::Fig3b, Figure::Fig4b, Figure::Fig5] {
        let mut params = FigureParams::defaults(figure, Profile::Smoke);
        params.n_graphs = params.n_graphs.min(6);
        params.n_sims = params.n_sims.min(10);
        params.node_count = 300;
        params.node_counts = vec![150, 300];
        params.avg_degrees = vec![4.0, 8.0];
        let mut trees = Vec::new();
        for (i, threads) in [1, 2, 1].into_iter().enumerate() {
            let dir = root.join(format!("{}-{i}", figure.name()));
            with_threads(threads, || run_figure(&params, &dir)).unwrap();
            trees.push(tree_digest(&dir));
        }
        compared += trees[0].len();
        if trees[0] != trees[1] || trees[0] != trees[2] {
            mismatches.push(figure.name());
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{compared} files byte-identical across 1, 2, 1 workers; mismatched: {mismatches:?}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| tmp.path().join(name);
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        println!("{} {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, start.elapsed().as_secs_f64());
        results.push((name, o));
    };

    run("conservation-and-dense-oracle", &conservation_and_oracle);
    run("stationarity-10x-saturation", &stationarity);
    run("statistics-kit-vs-brute-force", &statistics_kit);
    run("fig3a-saturation-spread", &|| saturation_spread(&dir("fig3a")));

    // One full ensemble per model backs both skewness fractions and hub correlations.
    let skew = run_figure(&full(Figure::Fig3b), &dir("fig3b")).unwrap();
    let by_model = |m: Model| skew.ensembles.iter().find(|e| e.config.graph_spec.model == m).unwrap();
    let (er, ba) = (by_model(Model::Er), by_model(Model::Ba));
    let (er_c, ba_c) = (hub_correlation(er.clone()), hub_correlation(ba.clone()));

    run("fig3b-er-skew-fraction", &|| {
        let f = er.fraction_above_threshold;
        outcome(f.is_some_and(|f| (0.40..=0.75).contains(&f)), format!("ER fraction {} (want [0.40, 0.75])", fmt(f)))
    });
    run("fig3b-ba-skew-fraction", &|| {
        let f = ba.fraction_above_threshold;
        outcome(f.is_some_and(|f| f <= 0.10), format!("BA fraction {} (want <= 0.10)", fmt(f)))
    });
    run("fig3b-smoke-er-above-ba", &|| skew_fraction_smoke(&dir("fig3b-smoke")));
    run("fig5-er-hubs-vs-median", &|| {
        let r = er_c.corr_hubs_median;
        outcome(r.is_some_and(|r| r.abs() <= 0.2), format!("ER r = {} (want |r| <= 0.2)", fmt(r)))
    });
    run("fig5-ba-hubs-vs-median", &|| {
        let r = ba_c.corr_hubs_median;
        outcome(r.is_some_and(|r| r >= 0.4), format!("BA r = {} (want >= 0.4)", fmt(r)))
    });
    run("fig5-er-hubs-vs-skewness-positive", &|| {
        let r = er_c.corr_hubs_skewness;
        outcome(r.is_some_and(|r| r > 0.0), format!("ER r = {} (want > 0)", fmt(r)))
    });
    run("fig5-ba-hubs-vs-skewness-negative", &|| {
        let r = ba_c.corr_hubs_skewness;
        outcome(r.is_some_and(|r| r < 0.0), format!("BA r = {} (want < 0)", fmt(r)))
    });
    run("fig4-smoke-fraction-falls-with-degree", &|| degree_trend_smoke(&dir("fig4a-smoke")));
    run("fig4-full-skew-at-every-degree", &|| degree_trend_full(&dir("fig4a")));
    run("determinism-across-workers", &|| determinism(&dir("determinism")));

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!("\n{} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
