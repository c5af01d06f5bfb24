//! Acceptance criteria. Each test prints one `PASS` or `FAIL` line and then
//! asserts on the same verdict.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use more_core::approx::{run_experiment, ExperimentConfig};
use more_core::backtest::{replay, run_backtest, BacktestConfig};
use more_core::convert::{
    convert_gmv, convert_mv, ConversionConfig, MatchResult, Normalization, Strategy,
};
use more_core::dist::{weighted_mean, Distribution, EvaluationSpace};
use more_core::engine::{
    certainty, decay, group_exact, review, AgentId, DecayParams, GroupOpinionState, Opinion,
    ReputationLedger, Timestamp,
};
use more_core::io::{gen_synthetic, parse_matches};
use more_core::predict::{predict, relative_strength, PredictionConfig};

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    // Written to the real stdout so the line survives the test harness capture.
    let line = format!(
        "{} criterion {id} ({title}): {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
}

fn max_abs_diff(a: &Distribution, b: &Distribution) -> f64 {
    a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_dist(rng: &mut ChaCha8Rng, space: &Arc<EvaluationSpace>) -> Distribution {
    let mut v: Vec<f64> = (0..space.len())
        .map(|_| rng.random::<f64>() + 1e-9)
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    Distribution::new(space.clone(), v).unwrap()
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

#[test]
fn criterion_1_approximation_trace() {
    let cfg = ExperimentConfig {
        repeats: 20,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let trace = run_experiment(&cfg).unwrap();
    let elapsed = start.elapsed();
    let means = trace.means();

    let (peak_i, peak) = means
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let peak_index = peak_i + 1;
    let moving: Vec<f64> = means
        .windows(5)
        .map(|w| w.iter().sum::<f64>() / 5.0)
        .collect();
    // moving[j] ends at opinion index j + 5
    let from = peak_index.saturating_sub(5);
    let decreasing = moving[from..].windows(2).all(|w| w[1] <= w[0]);
    let last = *means.last().unwrap();

    let pass = (0.06..=0.16).contains(&peak)
        && (8..=20).contains(&peak_index)
        && decreasing
        && last <= 0.01
        && elapsed < Duration::from_secs(30);
    verdict(
        1,
        "approximation error trace",
        pass,
        &format!(
            "peak {peak:.4} at index {peak_index} (want 0.06..0.16 at 8..20), \
             5-point average non-increasing after peak: {decreasing}, \
             value at 60 {last:.4} (want <= 0.01), runtime {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_zero_nu_trace() {
    let cfg = ExperimentConfig {
        decay: DecayParams::new(0.0, 5.0).unwrap(),
        ..ExperimentConfig::default()
    };
    let trace = run_experiment(&cfg).unwrap();
    let worst = trace.points.iter().map(|p| p.max_emd).fold(0.0, f64::max);
    let pass = worst <= 1e-12 && trace.points.len() == 60;
    verdict(
        2,
        "zero decay rate",
        pass,
        &format!("max EMD over all repeats {worst:e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_zero_decay_oracle_equivalence() {
    let space = EvaluationSpace::binary();
    let params = DecayParams::new(1.0, 5.0).unwrap();
    let mut worst = 0.0f64;
    let mut first_bad = None;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reliabilities: Vec<f64> = (0..10).map(|_| rng.random_range(0.2..1.0)).collect();
        let mut ops = Vec::new();
        let mut ledger = ReputationLedger::new(space.clone(), params);
        let mut t = 0;
        for k in 0..100 {
            t += rng.random_range(0..20);
            let r = rng.random_range(0..reliabilities.len());
            let op = Opinion::new(
                format!("r{r}"),
                "target",
                Timestamp(t),
                random_dist(&mut rng, &space),
            )
            .unwrap();
            ledger
                .update_with_reliability(&op, reliabilities[r])
                .unwrap();
            ops.push(op);
            let approx = ledger.group_opinion("target", Timestamp(t)).unwrap();
            let exact = group_exact(&space, &ops, Timestamp(t), &params, |o| {
                reliabilities[o.rater.as_str()[1..].parse::<usize>().unwrap()]
            })
            .unwrap();
            let d = max_abs_diff(&approx, &exact);
            if d > 1e-9 && first_bad.is_none() {
                first_bad = Some(k + 1);
            }
            worst = worst.max(d);
        }
    }
    let pass = worst <= 1e-9;
    verdict(
        3,
        "running aggregate equals exact aggregate without decay",
        pass,
        &format!(
            "max |approx - exact| {worst:.3e} over 5 histories of 100 opinions; first exceeds 1e-9 at history {}",
            first_bad.map_or("never".to_string(), |k| k.to_string())
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_constant_time_update() {
    let space = EvaluationSpace::binary();
    let params = DecayParams::new(0.98, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stream = |rng: &mut ChaCha8Rng, n: usize, t0: i64| -> Vec<Opinion> {
        (0..n)
            .map(|i| {
                Opinion::new(
                    format!("r{}", i % 50),
                    "target",
                    Timestamp(t0 + i as i64),
                    random_dist(rng, &space),
                )
                .unwrap()
            })
            .collect()
    };
    let history_small = stream(&mut rng, 100, 0);
    let history_large = stream(&mut rng, 10_000, 0);
    let mut small = ReputationLedger::new(space.clone(), params);
    let mut large = ReputationLedger::new(space.clone(), params);
    small.process(&history_small);
    large.process(&history_large);

    let probes = stream(&mut rng, 4001, 20_000);
    let (mut ts, mut tl) = (Vec::new(), Vec::new());
    for op in &probes {
        let t0 = Instant::now();
        small.group_update(op).unwrap();
        ts.push(t0.elapsed());
        let t0 = Instant::now();
        large.group_update(op).unwrap();
        tl.push(t0.elapsed());
    }
    let (ms, ml) = (median(ts), median(tl));
    let update_ratio = ml.as_secs_f64() / ms.as_secs_f64();

    let t = Timestamp(15_000);
    let time_exact = |ops: &[Opinion], reps: usize| {
        median(
            (0..reps)
                .map(|_| {
                    let t0 = Instant::now();
                    std::hint::black_box(group_exact(&space, ops, t, &params, |_| 0.5).unwrap());
                    t0.elapsed()
                })
                .collect(),
        )
    };
    let (es, el) = (
        time_exact(&history_small, 51),
        time_exact(&history_large, 7),
    );
    let exact_ratio = el.as_secs_f64() / es.as_secs_f64();

    let pass = update_ratio <= 2.0 && exact_ratio >= 10.0;
    verdict(
        4,
        "constant-time update",
        pass,
        &format!(
            "median update {ms:?} at 1e2 vs {ml:?} at 1e4 (ratio {update_ratio:.2}, want <= 2); \
             exact oracle {es:?} vs {el:?} (ratio {exact_ratio:.1}, want >= 10)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_converter_limits() {
    let mut worst_mv = 0.0f64;
    let mut worst_half = 0.0f64;
    for h in 0..=10 {
        for a in 0..=10 {
            let m = MatchResult::new(Timestamp(1), "s", "H", "A", h, a).unwrap();
            let (mv_h, mv_a) = convert_mv(&m).unwrap();
            let (g_h, g_a) = convert_gmv(&m, 1e-9, None).unwrap();
            worst_mv = worst_mv
                .max(max_abs_diff(&mv_h.value, &g_h.value))
                .max(max_abs_diff(&mv_a.value, &g_a.value));
            let (big_h, big_a) = convert_gmv(&m, 1e6, None).unwrap();
            for v in big_h.value.probs().iter().chain(big_a.value.probs()) {
                worst_half = worst_half.max((v - 0.5).abs());
            }
        }
    }
    let pass = worst_mv <= 1e-6 && worst_half <= 1e-5;
    verdict(
        5,
        "converter limits",
        pass,
        &format!("X=1e-9 vs MV max diff {worst_mv:.2e}; X=1e6 max |p - 0.5| {worst_half:.2e}"),
    );
    assert!(pass);
}

fn fuzz_engine(updates: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spaces = [
        EvaluationSpace::binary(),
        EvaluationSpace::new(["poor", "fair", "good", "great"]).unwrap(),
    ];
    let mut done = 0;
    while done < updates {
        let space = &spaces[rng.random_range(0..spaces.len())];
        let params =
            DecayParams::new(rng.random_range(0.0..=1.0), rng.random_range(0.5..50.0)).unwrap();
        let mut ledger = ReputationLedger::new(space.clone(), params);
        let mut t = 0i64;
        for _ in 0..1000 {
            t += rng.random_range(0..30);
            let rater = rng.random_range(0..30);
            let mut ratee = rng.random_range(0..30);
            if ratee == rater {
                ratee = (ratee + 1) % 30;
            }
            let value = if rng.random_bool(0.1) {
                Distribution::point(space, rng.random_range(0..space.len()))
            } else {
                random_dist(&mut rng, space)
            };
            let op = Opinion::new(
                format!("a{rater}"),
                format!("a{ratee}"),
                Timestamp(t),
                value,
            )
            .unwrap();
            let out = ledger.group_update(&op).map_err(|e| e.to_string())?;
            let d = &ledger.state(op.ratee.as_str()).unwrap().dist;
            let sum: f64 = d.probs().iter().sum();
            if d.probs().iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(format!("invalid distribution {:?}", d.probs()));
            }
            if !(0.0..=1.0).contains(&out.reputation) || !(0.0..=1.0).contains(&out.reliability) {
                return Err(format!("reputation out of range: {out:?}"));
            }
            done += 1;
        }
    }
    Ok(())
}

fn decay_fixed_point() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let space = EvaluationSpace::new(["a", "b", "c"]).unwrap();
    let flat = Distribution::flat(&space);
    for _ in 0..10_000 {
        let p =
            DecayParams::new(rng.random_range(0.0..=1.0), rng.random_range(0.1..100.0)).unwrap();
        let gap = rng.random_range(0..100_000);
        let out = decay(&flat, Timestamp(0), Timestamp(gap), &p).unwrap();
        if max_abs_diff(&out, &flat) > 1e-15 {
            return Err(format!("flat moved to {:?}", out.probs()));
        }
    }
    Ok(())
}

fn weight_invariance() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let space = EvaluationSpace::new(["a", "b", "c"]).unwrap();
    let ln2 = 2f64.ln();
    let n_ln = (space.len() as f64).ln();
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        // Running update: weights n·I(group) and I(opinion).
        let g = random_dist(&mut rng, &space);
        let o = random_dist(&mut rng, &space);
        let n = rng.random_range(1..100u64);
        let mut ledger = ReputationLedger::new(space.clone(), DecayParams::new(1.0, 1.0).unwrap());
        ledger
            .insert_state(
                AgentId::from("x"),
                GroupOpinionState {
                    dist: g.clone(),
                    count: n,
                    last_update: Timestamp(0),
                },
            )
            .unwrap();
        let out = ledger
            .update_with_reliability(
                &Opinion::new("y", "x", Timestamp(0), o.clone()).unwrap(),
                1.0,
            )
            .unwrap();
        if out.counted {
            let got = &ledger.state("x").unwrap().dist;
            // base-2 entropy with the sign as printed: H(O) - H(F)
            let literal = |d: &Distribution| (d.entropy() - n_ln) / ln2;
            let alt = weighted_mean(&[(&g, n as f64 * literal(&g)), (&o, literal(&o))])
                .unwrap()
                .ok_or("zero weight")?;
            worst = worst.max(max_abs_diff(&alt, got));
        }

        // Exact aggregate over a short history.
        let t = Timestamp(200);
        let params = DecayParams::new(0.9, 10.0).unwrap();
        let ops: Vec<Opinion> = (0..8)
            .map(|i| {
                Opinion::new(
                    format!("r{i}"),
                    "x",
                    Timestamp(i * 20),
                    random_dist(&mut rng, &space),
                )
                .unwrap()
            })
            .collect();
        let exact = group_exact(&space, &ops, t, &params, |_| 0.8).unwrap();
        let decayed: Vec<Distribution> = ops
            .iter()
            .map(|o| decay(&review(&o.value, 0.8).unwrap(), o.time, t, &params).unwrap())
            .collect();
        let parts: Vec<(&Distribution, f64)> = decayed
            .iter()
            .map(|d| (d, -certainty(d) / ln2 * 3.7))
            .collect();
        if let Some(alt) = weighted_mean(&parts).unwrap() {
            worst = worst.max(max_abs_diff(&alt, &exact));
        }
    }
    if worst <= 1e-9 {
        Ok(worst)
    } else {
        Err(format!("max deviation {worst:e}"))
    }
}

fn strength_symmetry() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..10_000 {
        let (a, b) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let k = rng.random_range(0.01..100.0);
        let r = relative_strength(a, b);
        if (r + relative_strength(b, a) - 1.0).abs() > 1e-12 {
            return Err(format!("antisymmetry fails at ({a}, {b})"));
        }
        if (relative_strength(k * a, k * b) - r).abs() > 1e-12 {
            return Err(format!("scale invariance fails at ({a}, {b}) x {k}"));
        }
        let cfg = PredictionConfig::new(rng.random_range(0.001..0.49)).unwrap();
        let (p, q) = (predict(r, &cfg), predict(1.0 - r, &cfg));
        use more_core::predict::Outcome::*;
        let mirrored = matches!(
            (p, q),
            (HomeWin, AwayWin) | (AwayWin, HomeWin) | (Draw, Draw)
        );
        if !mirrored {
            return Err(format!("prediction not mirrored at r = {r}"));
        }
    }
    Ok(())
}

fn no_lookahead() -> Result<(), String> {
    let corpus = gen_synthetic(10, 3, 99).map_err(|e| e.to_string())?.matches;
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for strategy in Strategy::ALL {
        let mut cfg = BacktestConfig::new(strategy, DecayParams::new(0.6, 30.0).unwrap());
        cfg.conversion = ConversionConfig {
            normalization: Normalization::Off,
            ..ConversionConfig::new(strategy)
        };
        let (_, base) = replay(&corpus, &cfg).map_err(|e| e.to_string())?;
        for cut in [0, 1, 45, 137, corpus.len() - 1] {
            let mut altered = corpus.clone();
            for m in &mut altered[cut + 1..] {
                m.home_goals = rng.random_range(0..6);
                m.away_goals = rng.random_range(0..6);
            }
            let (_, alt) = replay(&altered, &cfg).map_err(|e| e.to_string())?;
            if alt[..=cut]
                .iter()
                .zip(&base[..=cut])
                .any(|(x, y)| (x.r, x.more, x.baseline) != (y.r, y.more, y.baseline))
            {
                return Err(format!(
                    "{strategy}: prediction before match {cut} depends on later scores"
                ));
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_6_property_suites() {
    let checks: Vec<(&str, Result<String, String>)> = vec![
        (
            "1e5 fuzzed updates stay valid, reputations in [0,1]",
            fuzz_engine(100_000).map(|_| "ok".into()),
        ),
        ("decay fixes flat", decay_fixed_point().map(|_| "ok".into())),
        (
            "log base and certainty sign",
            weight_invariance().map(|w| format!("max dev {w:.1e}")),
        ),
        (
            "relative strength symmetry",
            strength_symmetry().map(|_| "ok".into()),
        ),
        ("no lookahead", no_lookahead().map(|_| "ok".into())),
    ];
    let pass = checks.iter().all(|(_, r)| r.is_ok());
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, r)| match r {
            Ok(msg) => format!("{name}: {msg}"),
            Err(e) => format!("{name}: FAILED {e}"),
        })
        .collect();
    verdict(6, "property suites", pass, &detail.join("; "));
    assert!(pass);
}

fn f_home_inversions(report: &more_core::backtest::BacktestReport) -> usize {
    report
        .bins
        .windows(2)
        .filter(|w| w[1].f_home < w[0].f_home)
        .count()
}

#[test]
fn criterion_7_synthetic_league() {
    let corpus = gen_synthetic(20, 10, 1).unwrap().matches;
    let mut lines = Vec::new();
    let mut pass = true;
    for strategy in Strategy::ALL {
        let report = run_backtest(
            &corpus,
            &BacktestConfig::new(strategy, DecayParams::default()),
        )
        .unwrap();
        let inversions = f_home_inversions(&report);
        let beats_random = report.more_accuracy >= 1.0 / 3.0 + 0.05;
        pass &= beats_random;
        if strategy == Strategy::Gmv {
            let beats_baseline = report.more_accuracy >= report.baseline_accuracy;
            pass &= inversions <= 1 && beats_baseline;
        }
        lines.push(format!(
            "{strategy}: accuracy {:.4} vs baseline {:.4}, F_H inversions {inversions}",
            report.more_accuracy, report.baseline_accuracy
        ));
    }

    match std::env::var_os("MORE_LIGA_CSV") {
        Some(path) => {
            let s = parse_matches(path.as_ref()).unwrap().summary;
            let ok = (s.total, s.home_wins, s.away_wins, s.draws) == (8182, 3920, 2043, 2119);
            pass &= ok;
            lines.push(format!(
                "league corpus counts {}/{}/{}/{} ({})",
                s.total,
                s.home_wins,
                s.away_wins,
                s.draws,
                if ok { "match" } else { "mismatch" }
            ));
        }
        None => lines.push("league corpus not supplied (MORE_LIGA_CSV), counts not checked".into()),
    }
    verdict(
        7,
        "synthetic league backtest (GMV: F_H monotone up to one inversion and >= baseline; all: >= 1/3 + 0.05)",
        pass,
        &lines.join("; "),
    );
    assert!(pass);
}

#[test]
fn criterion_8_naive_draws_are_a_no_op() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let teams: Vec<String> = (0..12).map(|i| format!("T{i}")).collect();
    let mut matches = Vec::new();
    for day in 0..500i64 {
        let h = rng.random_range(0..teams.len());
        let a = (h + rng.random_range(1..teams.len())) % teams.len();
        let g = rng.random_range(0..5);
        matches.push(
            MatchResult::new(
                Timestamp(day * 3),
                "s",
                teams[h].clone(),
                teams[a].clone(),
                g,
                g,
            )
            .unwrap(),
        );
    }
    let cfg = BacktestConfig::new(Strategy::Naive, DecayParams::default());
    let (_, records) = replay(&matches, &cfg).unwrap();
    let worst = records
        .iter()
        .flat_map(|r| [r.rep_home, r.rep_away])
        .map(|r| (r - 0.5).abs())
        .fold(0.0, f64::max);
    let pass = worst <= 1e-12;
    verdict(
        8,
        "naive draws leave reputations unchanged",
        pass,
        &format!("max |rep - 0.5| {worst:e} over {} matches", matches.len()),
    );
    assert!(pass);
}
