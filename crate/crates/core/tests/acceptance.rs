//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use evjoint::baselines::{baf_filter, cmax_run, cmax_solve, sequential_pipeline, BafConfig};
use evjoint::contrast::{hard_map, smooth_map, weighted_map, ConfidenceMap};
use evjoint::events::{window_stream, write_events, EventFormat, WindowPolicy};
use evjoint::joint::{
    objective, objective_gradients, raw_baseline, EaBaseline, JointConfig, ObjectiveWeights, Penalty,
};
use evjoint::metrics::{confusion, esr, motion_rmse};
use evjoint::synth::{generate, Pattern, SceneSpec};
use evjoint::{solve, Event, EventLabels, EventWindow, MotionModel, MotionParams, SensorGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRAD_REL_TOL: f64 = 1e-3;
const TIE_EPS: f64 = 1e-6;
const GRAD_BUDGET: Duration = Duration::from_secs(10);
const RECOVERY_REL_TOL: f64 = 0.05;
const SOLVE_BUDGET: Duration = Duration::from_secs(5);
const RATE_FLOOR: f64 = 0.80;
const REAL_TOL: f64 = 1e-12;
const IDENTITY_TOL: f64 = 1e-10;
const TRAJECTORY_TOL: f64 = 1e-9;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 gradient correctness", gradient_correctness),
        ("2 motion recovery", motion_recovery),
        ("3 denoising across noise rates", denoising_across_rates),
        ("4 joint vs sequential", joint_vs_sequential),
        ("5 oracle equivalences", oracle_equivalences),
        ("6 structural identities", structural_identities),
        ("7 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_window(rng: &mut ChaCha8Rng, n: usize, size: usize, duration: f64) -> EventWindow {
    let g = SensorGeometry::new(size, size).unwrap();
    let mut ts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..duration)).collect();
    ts.sort_by(f64::total_cmp);
    let events = ts
        .into_iter()
        .map(|t| {
            let x = rng.random_range(0.0..size as f64);
            let y = rng.random_range(0.0..size as f64);
            let p = if rng.random::<bool>() { 1 } else { -1 };
            Event::new(x, y, t, p).unwrap()
        })
        .collect();
    EventWindow::new(events, g, 0.0, duration, duration / 2.0).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(numeric).max(1e-8)
}

fn gradient_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sigma = 1.0;
    let (mut worst_theta, mut worst_logits) = (0.0f64, 0.0f64);
    let (mut checked, mut ties, mut ea_active) = (0, 0, 0);
    for k in 0..24 {
        let window = random_window(&mut rng, 200, 16, 0.1);
        let g = window.geometry();
        let theta = if k % 2 == 0 {
            MotionParams::translation(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))
        } else {
            MotionParams::rotation(rng.random_range(-5.0..5.0))
        };
        let logits: Vec<f64> = (0..g.pixel_count()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let conf = ConfidenceMap::from_logits(g, logits).unwrap();
        let b_ed = raw_baseline(&window, sigma).unwrap();
        let mut weights = ObjectiveWeights {
            alpha: rng.random_range(0.0..0.01),
            beta: rng.random_range(0.0..0.05),
            b_ea: 0.0,
            b_ed,
        };
        let probe = objective(&window, &theta, &conf, weights, sigma).unwrap();
        // place b_EA so the two regrets differ by 20% of f_EA, alternating sides
        let side = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        weights.b_ea = probe.f_ea + (probe.f_ed - b_ed) + side * 0.2 * probe.f_ea;

        let grads = objective_gradients(&window, &theta, &conf, weights, sigma).unwrap();
        if (grads.parts.r_ea - grads.parts.r_ed).abs() < TIE_EPS {
            ties += 1;
            continue;
        }
        if grads.parts.r_ea > grads.parts.r_ed {
            ea_active += 1;
        }
        let total = |th: &MotionParams, c: &ConfidenceMap| objective(&window, th, c, weights, sigma).unwrap().total;

        let h_theta = if theta.model == MotionModel::Translation2d { 1e-4 } else { 1e-5 };
        let fd_theta: Vec<f64> = (0..theta.dim())
            .map(|d| {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus.values[d] += h_theta;
                minus.values[d] -= h_theta;
                (total(&plus, &conf) - total(&minus, &conf)) / (2.0 * h_theta)
            })
            .collect();
        let h_logit = 1e-5;
        let fd_logits: Vec<f64> = (0..conf.logits.len())
            .map(|idx| {
                let mut plus = conf.clone();
                let mut minus = conf.clone();
                plus.logits[idx] += h_logit;
                minus.logits[idx] -= h_logit;
                (total(&theta, &plus) - total(&theta, &minus)) / (2.0 * h_logit)
            })
            .collect();
        worst_theta = worst_theta.max(rel_err(&grads.theta, &fd_theta));
        worst_logits = worst_logits.max(rel_err(&grads.logits, &fd_logits));
        checked += 1;
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{checked} windows, {ea_active} with the alignment regret active, {ties} ties skipped; \
         max rel err theta {worst_theta:.2e}, logits {worst_logits:.2e}; {:.2}s",
        elapsed.as_secs_f64()
    );
    ensure(
        checked >= 20 && worst_theta <= GRAD_REL_TOL && worst_logits <= GRAD_REL_TOL && elapsed < GRAD_BUDGET,
        detail,
    )
}

fn relative_l2(estimate: &MotionParams, truth: &MotionParams) -> f64 {
    let diff: Vec<f64> = estimate.values.iter().zip(&truth.values).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&truth.values)
}

fn motion_recovery() -> Check {
    let g = SensorGeometry::new(64, 64).unwrap();
    let spec = SceneSpec {
        duration: 0.1,
        contrast_threshold: 0.5,
        ..SceneSpec::new(g, Pattern::MultiEdge { spacing: 7.0 }, MotionParams::translation(30.0, -10.0))
    };
    let scene = generate(&spec, 0).unwrap();
    let truth = scene.compensating();
    let cfg = JointConfig::default();

    let t0 = Instant::now();
    let cmax = cmax_solve(&scene.window, MotionModel::Translation2d, &cfg).unwrap();
    let cmax_time = t0.elapsed();
    let t0 = Instant::now();
    let joint = solve(&scene.window, &cfg).unwrap();
    let joint_time = t0.elapsed();

    let (e_cmax, e_joint) = (relative_l2(&cmax, &truth), relative_l2(&joint.theta, &truth));
    let detail = format!(
        "{} events; cmax {:.2?} rel err {:.4} in {:.2}s; joint {:.2?} rel err {:.4} in {:.2}s; truth {:?}",
        scene.window.len(),
        cmax.values,
        e_cmax,
        cmax_time.as_secs_f64(),
        joint.theta.values,
        e_joint,
        joint_time.as_secs_f64(),
        truth.values
    );
    ensure(
        e_cmax <= RECOVERY_REL_TOL
            && e_joint <= RECOVERY_REL_TOL
            && cmax_time < SOLVE_BUDGET
            && joint_time < SOLVE_BUDGET,
        detail,
    )
}

fn denoising_across_rates() -> Check {
    // a 1 s stream processed in 100 ms windows, so even 1% noise gives a
    // usable specificity denominator
    let g = SensorGeometry::new(128, 64).unwrap();
    let cfg = JointConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (seed, rate) in [(11, 0.01), (12, 0.05), (13, 0.10)] {
        let spec = SceneSpec {
            duration: 1.0,
            noise_rate: rate,
            ..SceneSpec::new(g, Pattern::VerticalEdge { x0: 10.0 }, MotionParams::translation(100.0, 0.0))
        };
        let scene = generate(&spec, seed).unwrap();
        let windows = window_stream(scene.window.events(), g, WindowPolicy::FixedDuration(0.1)).unwrap();
        let mut labels = Vec::with_capacity(scene.window.len());
        for w in &windows {
            labels.extend(solve(w, &cfg).unwrap().labels.iter());
        }
        let c = confusion(&EventLabels(labels), &scene.labels).unwrap();
        ok &= c.sensitivity >= RATE_FLOOR && c.specificity >= RATE_FLOOR;
        parts.push(format!(
            "{:.0}%: sens {:.3} spec {:.3} ({} noise of {})",
            rate * 100.0,
            c.sensitivity,
            c.specificity,
            c.counts.tn + c.counts.fp,
            scene.window.len()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn joint_vs_sequential() -> Check {
    let g = SensorGeometry::new(48, 48).unwrap();
    let spec = SceneSpec {
        duration: 0.5,
        noise_rate: 0.05,
        ..SceneSpec::new(
            g,
            Pattern::Dot {
                center: [12.0, 12.0],
                radius: 5.0,
            },
            MotionParams::translation(40.0, 20.0),
        )
    };
    let scene = generate(&spec, 0).unwrap();
    let truth = vec![(0.0, scene.compensating()), (spec.duration, scene.compensating())];
    let windows = window_stream(scene.window.events(), g, WindowPolicy::FixedDuration(0.1)).unwrap();
    let cfg = JointConfig::default();
    let baf = BafConfig::default();
    let (mut joint_labels, mut seq_labels) = (Vec::new(), Vec::new());
    let (mut joint_traj, mut seq_traj) = (Vec::new(), Vec::new());
    for w in &windows {
        let j = solve(w, &cfg).unwrap();
        let s = sequential_pipeline(w, &baf, &cfg).unwrap();
        joint_labels.extend(j.labels.iter());
        seq_labels.extend(s.labels.iter());
        joint_traj.push((w.t_ref(), j.theta));
        seq_traj.push((w.t_ref(), s.theta));
    }
    let truth_labels = EventLabels(scene.labels.0[..joint_labels.len()].to_vec());
    let cj = confusion(&EventLabels(joint_labels), &truth_labels).unwrap();
    let cs = confusion(&EventLabels(seq_labels), &truth_labels).unwrap();
    let rj = motion_rmse(&joint_traj, &truth).unwrap();
    let rs = motion_rmse(&seq_traj, &truth).unwrap();
    let detail = format!(
        "{} windows; joint sens {:.3} spec {:.3} rmse {:.3}; sequential sens {:.3} spec {:.3} rmse {:.3}",
        windows.len(),
        cj.sensitivity,
        cj.specificity,
        rj,
        cs.sensitivity,
        cs.specificity,
        rs
    );
    ensure(cs.sensitivity < cj.sensitivity && rj <= rs, detail)
}

fn oracle_equivalences() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();

    // hard map against a per-cell brute-force count
    let g = SensorGeometry::new(32, 24).unwrap();
    let positions: Vec<[f64; 2]> = (0..20_000)
        .map(|_| [rng.random_range(-2.0..34.0), rng.random_range(-2.0..26.0)])
        .collect();
    let map = hard_map(&positions, g);
    for i in 0..g.height {
        for j in 0..g.width {
            let (lo_x, lo_y) = (j as f64, i as f64);
            let count = positions
                .iter()
                .filter(|p| p[0] >= lo_x && p[0] < lo_x + 1.0 && p[1] >= lo_y && p[1] < lo_y + 1.0)
                .count();
            if map.values[i * g.width + j] != count as f64 {
                failures.push(format!("hard_map cell ({i},{j})"));
            }
        }
    }

    // weighted map against an elementwise product
    let smooth = smooth_map(&positions[..5000], g, 1.0).unwrap();
    let logits: Vec<f64> = (0..g.pixel_count()).map(|_| rng.random_range(-8.0..8.0)).collect();
    let conf = ConfidenceMap::from_logits(g, logits.clone()).unwrap();
    let weighted = weighted_map(&smooth, &conf).unwrap();
    let worst_weighted = weighted
        .values
        .iter()
        .zip(&smooth.values)
        .zip(&logits)
        .map(|((w, m), l)| (w - m / (1.0 + (-l).exp())).abs())
        .fold(0.0, f64::max);
    if worst_weighted > REAL_TOL {
        failures.push(format!("weighted_map err {worst_weighted:e}"));
    }

    // BAF against the quadratic neighbor count
    let noisy = generate(
        &SceneSpec {
            noise_rate: 0.1,
            duration: 0.2,
            ..SceneSpec::new(
                SensorGeometry::new(64, 64).unwrap(),
                Pattern::MultiEdge { spacing: 7.0 },
                MotionParams::translation(60.0, -25.0),
            )
        },
        5,
    )
    .unwrap();
    let baf_cases = [
        (noisy.window.clone(), BafConfig::default()),
        (
            random_window(&mut rng, 20_000, 48, 1.0),
            BafConfig {
                dt_max: 0.004,
                radius: 2,
                min_support: 2,
            },
        ),
    ];
    let mut baf_sizes = Vec::new();
    for (w, cfg) in &baf_cases {
        baf_sizes.push(w.len());
        let fast = baf_filter(w, cfg).unwrap();
        let ev = w.events();
        let slow: Vec<bool> = ev
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let mut n = 0;
                for (j, b) in ev.iter().enumerate() {
                    if j != k
                        && (a.t - b.t).abs() <= cfg.dt_max
                        && (a.x.floor() - b.x.floor()).abs() <= cfg.radius as f64
                        && (a.y.floor() - b.y.floor()).abs() <= cfg.radius as f64
                    {
                        n += 1;
                    }
                }
                n >= cfg.min_support
            })
            .collect();
        if fast.0 != slow {
            failures.push(format!("baf_filter on {} events", w.len()));
        }
    }

    // ESR against the formula over a sparse pixel count table
    let mut worst_esr = 0.0f64;
    for trial in 0..20 {
        let size = 4 + trial;
        let g = SensorGeometry::new(size, size + 1).unwrap();
        let n = rng.random_range(0..3000);
        let kept: Vec<Event> = (0..n)
            .map(|_| {
                // concentrate mass so some pixels repeat
                let x = (rng.random_range(0.0..size as f64) * rng.random_range(0.2..1.0f64)).min(size as f64 - 1e-9);
                let y = rng.random_range(0.0..(size + 1) as f64);
                Event::new(x, y, 0.0, 1).unwrap()
            })
            .collect();
        let m_ref = rng.random_range(1..n.max(2) + 200);
        let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
        for e in &kept {
            *counts.entry((e.x.floor() as i64, e.y.floor() as i64)).or_default() += 1;
        }
        let expected = if n < 2 {
            0.0
        } else {
            let nf = n as f64;
            let f1 = counts.values().map(|&c| (c * (c - 1)) as f64).sum::<f64>() / (nf * (nf - 1.0));
            let base = (1.0 - m_ref as f64 / nf).max(0.0);
            let empty = (g.pixel_count() - counts.len()) as f64;
            let f2 = g.pixel_count() as f64 - empty - counts.values().map(|&c| base.powf(c as f64)).sum::<f64>();
            (f1 * f2).sqrt()
        };
        let got = esr(&kept, g, m_ref).unwrap();
        worst_esr = worst_esr.max((got - expected).abs());
    }
    if worst_esr > REAL_TOL {
        failures.push(format!("esr err {worst_esr:e}"));
    }

    // confusion against direct counting
    for _ in 0..20 {
        let n = rng.random_range(0..20_000);
        let pred: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
        let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
        let c = confusion(&EventLabels(pred.clone()), &EventLabels(truth.clone())).unwrap();
        let count = |p: bool, t: bool| pred.iter().zip(&truth).filter(|&(&a, &b)| a == p && b == t).count() as u64;
        let (tp, fn_, tn, fp) = (count(true, true), count(false, true), count(false, false), count(true, false));
        let sens = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
        let spec = if tn + fp == 0 { 1.0 } else { tn as f64 / (tn + fp) as f64 };
        if (c.counts.tp, c.counts.fn_, c.counts.tn, c.counts.fp) != (tp, fn_, tn, fp)
            || (c.sensitivity - sens).abs() > REAL_TOL
            || (c.specificity - spec).abs() > REAL_TOL
        {
            failures.push("confusion".into());
        }
    }

    // RMSE against a linear-search interpolation
    let mut worst_rmse = 0.0f64;
    for _ in 0..20 {
        let mut times: Vec<f64> = (0..rng.random_range(2..40)).map(|_| rng.random_range(0.0..10.0)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.len() < 2 {
            continue;
        }
        let truth: Vec<(f64, MotionParams)> = times
            .iter()
            .map(|&t| (t, MotionParams::translation(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))))
            .collect();
        let (t_lo, t_hi) = (times[0], times[times.len() - 1]);
        let est: Vec<(f64, MotionParams)> = (0..rng.random_range(1..60))
            .map(|_| {
                let t = rng.random_range(t_lo..=t_hi);
                (t, MotionParams::translation(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            })
            .collect();
        let mut sum = 0.0;
        for (t, m) in &est {
            let mut seg = 0;
            while seg + 2 < truth.len() && truth[seg + 1].0 < *t {
                seg += 1;
            }
            let (a, b) = (&truth[seg], &truth[seg + 1]);
            let u = (t - a.0) / (b.0 - a.0);
            for d in 0..2 {
                let gt = a.1.values[d] + u * (b.1.values[d] - a.1.values[d]);
                sum += (m.values[d] - gt).powi(2);
            }
        }
        let expected = (sum / est.len() as f64).sqrt();
        worst_rmse = worst_rmse.max((motion_rmse(&est, &truth).unwrap() - expected).abs());
    }
    if worst_rmse > REAL_TOL {
        failures.push(format!("rmse err {worst_rmse:e}"));
    }

    let detail = format!(
        "hard_map on 20000 positions, BAF on {baf_sizes:?} events; max err weighted {worst_weighted:.1e}, \
         esr {worst_esr:.1e}, rmse {worst_rmse:.1e}"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; mismatches: {}", failures.join(", ")))
    }
}

fn structural_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sigma = 1.0;
    let (mut worst_fed, mut worst_red, mut worst_recombine) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..10 {
        let window = random_window(&mut rng, 300, 20, 0.1);
        let g = window.geometry();
        let ones = ConfidenceMap::filled(g, 40.0);
        let b_ed = raw_baseline(&window, sigma).unwrap();
        let weights = ObjectiveWeights {
            alpha: rng.random_range(0.0..0.1),
            beta: rng.random_range(0.0..0.1),
            b_ea: rng.random_range(0.0..1.0),
            b_ed,
        };
        let theta = MotionParams::translation(rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0));
        let p = objective(&window, &theta, &ones, weights, sigma).unwrap();
        worst_fed = worst_fed.max((p.f_ed - p.f_ea).abs());
        let zero = objective(&window, &MotionParams::zero(MotionModel::Translation2d), &ones, weights, sigma).unwrap();
        worst_red = worst_red.max(zero.r_ed.abs());

        let logits: Vec<f64> = (0..g.pixel_count()).map(|_| rng.random_range(-4.0..4.0)).collect();
        let conf = ConfidenceMap::from_logits(g, logits).unwrap();
        let q = objective(&window, &theta, &conf, weights, sigma).unwrap();
        let recombined = q.r_ea.max(q.r_ed) + weights.alpha * q.l1 + weights.beta * q.fidelity;
        worst_recombine = worst_recombine.max((recombined - q.total).abs());
        if k == 0 && (q.regret != q.r_ea.max(q.r_ed)) {
            return Err("regret is not the larger regret".into());
        }
    }

    // EA-only joint objective against contrast maximization
    let g = SensorGeometry::new(64, 64).unwrap();
    let spec = SceneSpec {
        contrast_threshold: 0.5,
        ..SceneSpec::new(g, Pattern::MultiEdge { spacing: 7.0 }, MotionParams::translation(30.0, -10.0))
    };
    let scene = generate(&spec, 3).unwrap();
    let cfg = JointConfig {
        alpha: Penalty::Absolute(0.0),
        beta: Penalty::Absolute(0.0),
        b_ea: EaBaseline::Explicit(1e6),
        freeze_confidence: true,
        initial_logit: 40.0,
        iterations: 120,
        ..JointConfig::default()
    };
    let joint = solve(&scene.window, &cfg).unwrap();
    let cmax = cmax_run(&scene.window, MotionModel::Translation2d, &cfg).unwrap();
    let mut worst_traj = 0.0f64;
    for (rec, theta) in joint.trace.iter().zip(&cmax.trajectory) {
        for (a, b) in rec.theta.iter().zip(theta) {
            worst_traj = worst_traj.max((a - b).abs());
        }
    }
    for (a, b) in joint.theta.values.iter().zip(&cmax.theta.values) {
        worst_traj = worst_traj.max((a - b).abs());
    }
    let same_len = joint.trace.len() == cmax.trajectory.len();

    let detail = format!(
        "|f_ED - f_EA| at W=1 {worst_fed:.1e}; |r_ED| at theta=0, W=1 {worst_red:.1e}; \
         recombination {worst_recombine:.1e}; trajectory gap over {} steps {worst_traj:.1e}",
        joint.trace.len()
    );
    ensure(
        worst_fed <= IDENTITY_TOL
            && worst_red <= IDENTITY_TOL
            && worst_recombine == 0.0
            && same_len
            && worst_traj <= TRAJECTORY_TOL,
        detail,
    )
}

fn pipeline_bytes(dir: &std::path::Path, tag: &str) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let g = SensorGeometry::new(48, 48).unwrap();
        let spec = SceneSpec {
            noise_rate: 0.08,
            contrast_threshold: 0.5,
            ..SceneSpec::new(g, Pattern::MultiEdge { spacing: 7.0 }, MotionParams::translation(-25.0, 15.0))
        };
        let scene = generate(&spec, 77).unwrap();
        let result = solve(&scene.window, &JointConfig::default()).unwrap();
        let path = dir.join(format!("{tag}.evj"));
        write_events(&path, EventFormat::Binary, scene.window.events(), Some(&result.labels), g).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        for v in result.theta.values.iter().chain(&result.conf.logits) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes
    })
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let a = pipeline_bytes(dir.path(), "a");
    let b = pipeline_bytes(dir.path(), "b");
    ensure(
        a == b,
        format!("synth + joint solve + binary write twice on one thread: {} bytes, identical = {}", a.len(), a == b),
    )
}
