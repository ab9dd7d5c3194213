//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails. Criterion 6 runs only when
//! `TERMINATOR_DATASET` points at a featurized history file.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use terminator_tcp::dataset::{ingest, toy_history, Format, Outcome, TestRecord};
use terminator_tcp::dynamic::{CoFailurePrioritizer, FeedbackPrioritizer, FlipPrioritizer, RulePrioritizer, RuleSet};
use terminator_tcp::evaluation::{apfd, apfdc, recall_cost_curve, SessionResult};
use terminator_tcp::features::{history_features, hybrid_all, text_features, FeatureVector};
use terminator_tcp::ridge::{RidgeSolver, DEFAULT_LAMBDA};
use terminator_tcp::sim::{simulate, Algorithm, Metric, SimulationConfig, Timing};
use terminator_tcp::static_order::{self as so, LabelScheme, DEFAULT_ALPHA};
use terminator_tcp::stats::{cliffs_delta, differs, scott_knott, MetricSample, NEGLIGIBLE_DELTA};
use terminator_tcp::svm::{self, objective, sample_weights, subgradient, ClassWeight, LinearModel, SvmParams};
use terminator_tcp::synth::{generate_synthetic, SyntheticSpec};
use terminator_tcp::terminator::{Terminator, TerminatorConfig, Variant};
use terminator_tcp::{HistoryView, SessionHistory};

// Pinned tolerances and budgets.
const WORKED_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_INSTANCES: usize = 500;
const ORACLE_MAX_N: usize = 7;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const FD_POINTS: usize = 100;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-4;
const DUPLICATION_ANGLE_TOL: f64 = 1e-3;
const CLASSIFIER_BUDGET: Duration = Duration::from_secs(30);
const SIGNAL_TESTS: usize = 500;
const SIGNAL_SESSIONS: usize = 30;
const SIGNAL_SEEDS: u64 = 20;
const SIGNAL_MARGIN: f64 = 0.10;
const SIGNAL_BUDGET: Duration = Duration::from_secs(300);
const CALIBRATION_SD: f64 = 0.02;
const CALIBRATION_N: usize = 49;
const CALIBRATION_TRIALS: u64 = 100;
const CALIBRATION_MIN_NULL: usize = 95;
const DATASET_ENV: &str = "TERMINATOR_DATASET";
const FUZZ_TRACES: u64 = 1000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn report(id: usize, name: &str, r: &Verdict) -> bool {
    println!("{} criterion {id} ({name}): {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
    r.pass
}

fn names(order: &[usize]) -> String {
    let v: Vec<String> = order.iter().map(|i| format!("t{}", i + 1)).collect();
    format!("{{{}}}", v.join(","))
}

fn fmt_values(v: &[f64]) -> String {
    let v: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("{{{}}}", v.join(","))
}

// ---------------------------------------------------------------------------
// 1. worked example

fn worked_example() -> Verdict {
    let start = Instant::now();
    let h = toy_history();
    let v = HistoryView::new(&h, 3).unwrap();
    let text = text_features(&h);
    let ridge = RidgeSolver::new(&text, DEFAULT_LAMBDA);
    let failing: Vec<bool> = (0..4).map(|t| h.test(t).outcomes[3].is_failed()).collect();
    let durations = h.durations(3);

    let mut mismatches = Vec::new();
    let mut expect = |label: &str, got: String, want: &str| {
        if got != want {
            mismatches.push(format!("{label}: got {got}, want {want}"));
        }
    };
    expect("B1", names(&so::order_b1(&v)), "{t3,t4,t1,t2}");
    expect("B2", names(&so::order_b2(&v)), "{t2,t4,t1,t3}");
    expect("B3", names(&so::order_b3(&v, DEFAULT_ALPHA)), "{t4,t3,t2,t1}");
    expect("B4", names(&so::order_b4(&v)), "{t4,t3,t2,t1}");
    expect("B5", names(&so::order_b5(&v)), "{t2,t4,t1,t3}");
    expect("C1", names(&so::order_c1(&v)), "{t1,t2,t3,t4}");
    expect("D1", names(&so::order_supervised(&v, &ridge, LabelScheme::SimpleHistory)), "{t3,t4,t1,t2}");
    expect("D2", names(&so::order_supervised(&v, &ridge, LabelScheme::AllHistory)), "{t2,t4,t1,t3}");
    expect("WH", names(&so::order_supervised(&v, &ridge, LabelScheme::WeightedHistory)), "{t4,t3,t2,t1}");
    expect("A2", names(&so::order_optimal(&failing, &durations)), "{t1,t2,t4,t3}");

    // E1: t1 fails, then t2 fails. The second step is compared as a multiset
    // of the two remaining priorities.
    let mut e1 = CoFailurePrioritizer::new(&v);
    let first = e1.next_batch(1).unwrap();
    e1.feedback(first[0], true).unwrap();
    expect("E1 step 1", fmt_values(&e1.priorities()[1..]), "{0.5,-0.5,-0.5}");
    let second = e1.next_batch(1).unwrap();
    e1.feedback(second[0], true).unwrap();
    let mut rest = e1.priorities()[2..].to_vec();
    rest.sort_by(|a, b| b.total_cmp(a));
    expect("E1 step 2", fmt_values(&rest), "{-0.5,-1}");

    let mut e2 = FlipPrioritizer::new(&v);
    let first = e2.next_batch(1).unwrap();
    e2.feedback(first[0], true).unwrap();
    expect("E2", format!("{} {}", names(&first), fmt_values(&e2.priorities()[..3])), "{t4} {1,1,1}");

    let rules = RuleSet::mine(&v, 2, 0.9);
    expect("E3 rules", rules.len().to_string(), "2");
    let mut e3 = RulePrioritizer::new(&v);
    let first = e3.next_batch(1).unwrap();
    e3.feedback(first[0], true).unwrap();
    expect("E3 queue", format!("{} {}", names(&first), names(&e3.queue())), "{t2} {t4,t1,t3}");

    let elapsed = start.elapsed();
    if elapsed > WORKED_BUDGET {
        mismatches.push(format!("took {elapsed:?}"));
    }
    if mismatches.is_empty() {
        check(true, format!("all orders and traces match in {elapsed:?}"))
    } else {
        check(false, mismatches.join("; "))
    }
}

// ---------------------------------------------------------------------------
// 2. metric oracles

fn trapezoid(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn metric_oracles() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let perms: Vec<Vec<Vec<usize>>> = (0..=ORACLE_MAX_N).map(permutations).collect();
    let (mut worst_area, mut worst_opt, mut worst_equal) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.gen_range(1..=ORACLE_MAX_N);
        let mut failing: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let forced = rng.gen_range(0..n);
        failing[forced] = true;
        let durations: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let order = perms[n][rng.gen_range(0..perms[n].len())].clone();

        let r = SessionResult::new(order.clone(), failing.clone(), durations.clone());
        let c = apfdc(&r).unwrap().unwrap();
        worst_area = worst_area.max((trapezoid(&recall_cost_curve(&r).unwrap()) - c).abs());

        let opt = SessionResult::new(so::order_optimal(&failing, &durations), failing.clone(), durations.clone());
        let opt_value = apfdc(&opt).unwrap().unwrap();
        let brute = perms[n]
            .iter()
            .map(|p| apfdc(&SessionResult::new(p.clone(), failing.clone(), durations.clone())).unwrap().unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        worst_opt = worst_opt.max(brute - opt_value);

        let d = rng.gen_range(0.5..5.0);
        let eq = SessionResult::new(order, failing, vec![d; n]);
        worst_equal = worst_equal.max((apfd(&eq).unwrap() - apfdc(&eq).unwrap().unwrap()).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_area <= ORACLE_TOL && worst_opt <= ORACLE_TOL && worst_equal <= ORACLE_TOL && elapsed <= ORACLE_BUDGET;
    check(
        pass,
        format!(
            "{ORACLE_INSTANCES} instances: |trapezoid-APFDc| ≤ {worst_area:.2e}, brute-force gap {worst_opt:.2e}, |APFD-APFDc| ≤ {worst_equal:.2e}, {elapsed:?}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. classifier properties

fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<FeatureVector>, Vec<bool>) {
    let xs: Vec<FeatureVector> = (0..n)
        .map(|_| FeatureVector::from_dense(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
        .collect();
    let mut ys: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    ys[0] = true;
    ys[1] = false;
    (xs, ys)
}

fn finite_difference_check() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..FD_POINTS {
        let dim = rng.gen_range(1..6);
        let n = rng.gen_range(2..20);
        let (xs, ys) = random_set(&mut rng, n, dim);
        let refs: Vec<&FeatureVector> = xs.iter().collect();
        let scheme = if rng.gen_bool(0.5) { ClassWeight::Balanced } else { ClassWeight::None };
        let cw = sample_weights(&ys, scheme);
        let cost = rng.gen_range(0.1..5.0);
        let model = LinearModel {
            weights: (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            bias: rng.gen_range(-1.0..1.0),
        };
        let (gw, gb) = subgradient(&model, &refs, &ys, &cw, cost);
        let j = |m: &LinearModel| objective(m, &refs, &ys, &cw, cost);
        for k in 0..=dim {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            if k < dim {
                plus.weights[k] += FD_STEP;
                minus.weights[k] -= FD_STEP;
            } else {
                plus.bias += FD_STEP;
                minus.bias -= FD_STEP;
            }
            let fd = (j(&plus) - j(&minus)) / (2.0 * FD_STEP);
            let analytic = if k < dim { gw[k] } else { gb };
            worst = worst.max((fd - analytic).abs());
        }
    }
    worst
}

fn angle(a: &LinearModel, b: &LinearModel) -> f64 {
    let va: Vec<f64> = a.weights.iter().copied().chain([a.bias]).collect();
    let vb: Vec<f64> = b.weights.iter().copied().chain([b.bias]).collect();
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Two separated blobs; with a large cost no box constraint binds, so the
/// balanced fit is the hard-margin solution and duplicating the majority
/// class cannot move it.
fn separated(rng: &mut ChaCha8Rng, n_pos: usize, n_neg: usize) -> (Vec<FeatureVector>, Vec<bool>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (count, center, label) in [(n_pos, 1.5, true), (n_neg, -1.5, false)] {
        for _ in 0..count {
            xs.push(FeatureVector::from_dense(&[
                center + rng.gen_range(-0.5..0.5),
                rng.gen_range(-1.0..1.0),
                0.5 * center + rng.gen_range(-0.5..0.5),
            ]));
            ys.push(label);
        }
    }
    (xs, ys)
}

fn tight() -> SvmParams {
    SvmParams {
        cost: 100.0,
        max_epochs: 20_000,
        tolerance: 1e-9,
        ..SvmParams::default()
    }
}

fn duplication_check() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (xs, ys) = separated(&mut rng, 6, 30);
        let refs: Vec<&FeatureVector> = xs.iter().collect();
        let base = svm::fit(&refs, &ys, &tight()).unwrap();
        let mut dup_x = refs.clone();
        let mut dup_y = ys.clone();
        for (x, &y) in refs.iter().zip(&ys) {
            if !y {
                for _ in 0..3 {
                    dup_x.push(x);
                    dup_y.push(false);
                }
            }
        }
        let dup = svm::fit(&dup_x, &dup_y, &tight()).unwrap();
        worst = worst.max(angle(&base, &dup));
    }
    worst
}

fn separable_sign_check() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut wrong, mut total) = (0, 0);
    for _ in 0..10 {
        let (xs, ys) = separated(&mut rng, 10, 25);
        let refs: Vec<&FeatureVector> = xs.iter().collect();
        let m = svm::fit(&refs, &ys, &tight()).unwrap();
        wrong += refs.iter().zip(&ys).filter(|(x, y)| (m.decision(x) > 0.0) != **y).count();
        total += ys.len();
    }
    (wrong, total)
}

fn classifier_properties() -> Verdict {
    let start = Instant::now();
    let fd = finite_difference_check();
    let dup = duplication_check();
    let (wrong, total) = separable_sign_check();
    let elapsed = start.elapsed();
    check(
        fd <= FD_TOL && dup <= DUPLICATION_ANGLE_TOL && wrong == 0 && elapsed <= CLASSIFIER_BUDGET,
        format!(
            "finite-difference error {fd:.2e} over {FD_POINTS} points, duplication angle {dup:.2e} rad, {wrong}/{total} separable points misclassified, {elapsed:?}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. signal recovery

fn signal_recovery() -> Verdict {
    let start = Instant::now();
    let mut f3 = Vec::new();
    let mut a1 = Vec::new();
    for seed in 1..=SIGNAL_SEEDS {
        let spec = SyntheticSpec {
            n_tests: SIGNAL_TESTS,
            n_sessions: SIGNAL_SESSIONS,
            persistence: 0.6,
            cluster_correlation: 0.9,
            seed,
            ..SyntheticSpec::default()
        };
        let h = generate_synthetic(&spec).unwrap();
        let config = SimulationConfig {
            algorithms: vec![Algorithm::A1, Algorithm::F3],
            seeds: vec![seed],
            timing: Timing::Disabled,
            ..SimulationConfig::default()
        };
        let r = simulate(&h, &config).unwrap();
        f3.extend(r.values(Metric::Apfdc, Algorithm::F3));
        a1.extend(r.values(Metric::Apfdc, Algorithm::A1));
    }
    let elapsed = start.elapsed();
    let samples = [MetricSample::new("A1", a1.clone()), MetricSample::new("F3", f3.clone())];
    let ranks = scott_knott(&samples);
    let (mf3, ma1) = (samples[1].median(), samples[0].median());
    let delta = cliffs_delta(&f3, &a1);
    let pass = mf3 >= ma1 + SIGNAL_MARGIN && ranks["F3"] > ranks["A1"] && delta.abs() >= NEGLIGIBLE_DELTA && elapsed <= SIGNAL_BUDGET;
    check(
        pass,
        format!(
            "median APFDc F3 {mf3:.3} vs A1 {ma1:.3} over {} sessions, ranks F3 {} / A1 {}, δ {delta:.3}, {elapsed:?}",
            f3.len(),
            ranks["F3"],
            ranks["A1"]
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. statistics calibration

fn draw(seed: u64, mean: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(mean, CALIBRATION_SD).unwrap();
    (0..CALIBRATION_N).map(|_| normal.sample(&mut rng)).collect()
}

fn statistics_calibration() -> Verdict {
    let samples = [
        MetricSample::new("low_a", draw(100, 0.5)),
        MetricSample::new("low_b", draw(101, 0.5)),
        MetricSample::new("high", draw(102, 0.9)),
    ];
    let ranks = scott_knott(&samples);
    let got = (ranks["low_a"], ranks["low_b"], ranks["high"]);
    let null_ok = (0..CALIBRATION_TRIALS)
        .filter(|&trial| {
            let a = draw(1000 + 2 * trial, 0.5);
            let b = draw(1001 + 2 * trial, 0.5);
            !differs(&a, &b, trial)
        })
        .count();
    check(
        got == (1, 1, 2) && null_ok >= CALIBRATION_MIN_NULL,
        format!("ranks {got:?}, {null_ok}/{CALIBRATION_TRIALS} same-distribution pairs not significant"),
    )
}

// ---------------------------------------------------------------------------
// 6. dataset reproduction (conditional)

fn dataset_reproduction(path: &str) -> Verdict {
    let start = Instant::now();
    let h = match ingest(path, Format::from_path(path.as_ref())) {
        Ok(h) => h,
        Err(e) => return check(false, format!("cannot read {path}: {e}")),
    };
    let config = SimulationConfig {
        algorithms: vec![
            Algorithm::A1,
            Algorithm::A2,
            Algorithm::B1,
            Algorithm::B2,
            Algorithm::B3,
            Algorithm::B4,
            Algorithm::B5,
            Algorithm::F3,
        ],
        ..SimulationConfig::default()
    };
    let r = match simulate(&h, &config) {
        Ok(r) => r,
        Err(e) => return check(false, format!("simulation failed: {e}")),
    };
    let med = |a| r.row(Metric::Apfdc, a).map(|row| row.median).unwrap_or(f64::NAN);
    let rank = |a| r.row(Metric::Apfdc, a).map(|row| row.rank).unwrap_or(0);
    let overhead = r.row(Metric::Overhead, Algorithm::F3).map(|row| row.median).unwrap_or(f64::NAN);
    let targets = [
        (Algorithm::F3, 0.73, 0.05),
        (Algorithm::B4, 0.67, 0.05),
        (Algorithm::A1, 0.50, 0.03),
        (Algorithm::A2, 0.95, 0.03),
    ];
    let mut pass = targets.iter().all(|&(a, want, tol)| (med(a) - want).abs() <= tol);
    pass &= overhead < 0.01;
    let b_group = [Algorithm::B1, Algorithm::B2, Algorithm::B3, Algorithm::B4, Algorithm::B5];
    pass &= b_group.iter().all(|&b| rank(Algorithm::F3) > rank(b));
    let detail: Vec<String> = targets.iter().map(|&(a, _, _)| format!("{a} {:.3}", med(a))).collect();
    check(
        pass,
        format!("{}, F3 overhead {:.4}%, {:?}", detail.join(", "), overhead * 100.0, start.elapsed()),
    )
}

// ---------------------------------------------------------------------------
// 7. permutation fuzz

fn random_history(rng: &mut ChaCha8Rng) -> SessionHistory {
    let n = rng.gen_range(1..=40);
    let sessions = rng.gen_range(1..=8);
    let tests = (0..n)
        .map(|i| {
            let outcomes = (0..sessions)
                .map(|_| match rng.gen_range(0..10) {
                    0..=2 => Outcome::Failed,
                    3 => Outcome::Skipped,
                    4 => Outcome::Timeout,
                    _ => Outcome::Passed,
                })
                .collect();
            let durations = (0..sessions).map(|_| rng.gen_range(0.0..3.0)).collect();
            let words = ["alpha", "beta", "gamma", "delta", "epsilon"];
            let text = format!("{} {}", words[rng.gen_range(0..5)], words[rng.gen_range(0..5)]);
            TestRecord::new(format!("t{i}"), terminator_tcp::Description::Text(text), outcomes, durations)
        })
        .collect();
    SessionHistory::new((0..sessions).map(|s| s.to_string()).collect(), tests).unwrap()
}

fn permutation_fuzz() -> Verdict {
    let mut bad = Vec::new();
    for trace in 0..FUZZ_TRACES {
        let mut rng = ChaCha8Rng::seed_from_u64(trace);
        let h = random_history(&mut rng);
        let current = rng.gen_range(0..h.session_count());
        let view = HistoryView::new(&h, current).unwrap();
        let n = h.n_tests();
        let failing: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let batch = rng.gen_range(1..=12);
        let text = text_features(&h);
        let config = TerminatorConfig {
            batch_size: batch,
            certainty_threshold: rng.gen_range(1..=5),
            ..TerminatorConfig::default()
        };
        let mut p: Box<dyn FeedbackPrioritizer> = match trace % 6 {
            0 => Box::new(CoFailurePrioritizer::new(&view)),
            1 => Box::new(FlipPrioritizer::new(&view)),
            2 => Box::new(RulePrioritizer::new(&view)),
            3 => Box::new(Terminator::new(text, Variant::Text, config, trace)),
            4 => Box::new(Terminator::new(history_features(&view), Variant::History, config, trace)),
            _ => Box::new(Terminator::new(hybrid_all(&text, &history_features(&view)), Variant::Hybrid, config, trace)),
        };
        let mut order = Vec::new();
        let result = (|| -> terminator_tcp::Result<()> {
            loop {
                let next = p.next_batch(batch)?;
                if next.is_empty() {
                    return Ok(());
                }
                // results arrive in a shuffled order within the batch
                let mut arrival = next.clone();
                for i in (1..arrival.len()).rev() {
                    arrival.swap(i, rng.gen_range(0..=i));
                }
                for t in arrival {
                    p.feedback(t, failing[t])?;
                }
                order.extend(next);
            }
        })();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if result.is_err() || sorted != (0..n).collect::<Vec<_>>() || p.remaining() != 0 {
            bad.push(format!("trace {trace}: {result:?}"));
        }
    }
    check(
        bad.is_empty(),
        format!("{} of {FUZZ_TRACES} traces emitted exact permutations {}", FUZZ_TRACES as usize - bad.len(), bad.join("; ")),
    )
}

/// Runs without the libtest harness so the verdict lines are never captured.
fn main() -> std::process::ExitCode {
    let mut all = true;
    all &= report(1, "worked example", &worked_example());
    all &= report(2, "metric oracles", &metric_oracles());
    all &= report(3, "classifier properties", &classifier_properties());
    all &= report(4, "signal recovery", &signal_recovery());
    all &= report(5, "statistics calibration", &statistics_calibration());
    match std::env::var(DATASET_ENV) {
        Ok(path) => all &= report(6, "dataset reproduction", &dataset_reproduction(&path)),
        Err(_) => println!("SKIP criterion 6 (dataset reproduction): set {DATASET_ENV} to a featurized history"),
    }
    all &= report(7, "permutation fuzz", &permutation_fuzz());
    if all {
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance criteria failed");
        std::process::ExitCode::FAILURE
    }
}
