//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass line (run with `--nocapture` to see them; a failing
//! criterion fails its test).

use approx::assert_relative_eq;
use loopshield::compensate::{char_poly, pid_tf, stability_region, GridSpec, PidGains};
use loopshield::ident::{batch_ls, build_regressor, ArxOrders, RlsState};
use loopshield::lti::{is_stable, polynomial_roots, LtiSimState, Polynomial, TransferFunction};
use loopshield::scenarios;
use loopshield::sim::{run_scenario, summarize, SimLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TS: f64 = 0.001;

fn sample_index(log: &SimLog, t: f64) -> i64 {
    (t / log.ts).round() as i64
}

/// max |y - amplitude| over the final second of the run.
fn final_second_error(log: &SimLog) -> f64 {
    let n = log.records.len();
    let last_second = (1.0 / log.ts).round() as usize;
    log.records[n - last_second..]
        .iter()
        .map(|r| (r.y - log.reference_amplitude).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_1_baseline_converges_without_detection() {
    let log = run_scenario(&scenarios::baseline().scenario).unwrap();
    let summary = summarize(&log);
    let err = final_second_error(&log);
    assert!(err < 0.01, "final-second |y - 1| = {err}");
    assert!(summary.detection_time.is_none(), "spurious detection");
    assert!(!summary.diverged);
    println!("PASS criterion 1: baseline converges (final-second error {err:.2e}), no detection");
}

#[test]
fn criterion_2_gain_attack_destabilizes_uncompensated() {
    let mut s = scenarios::gain_attack().scenario;
    s.ids_enabled = false;
    s.compensation_enabled = false;
    let log = run_scenario(&s).unwrap();
    let summary = summarize(&log);
    assert!(
        summary.diverged || summary.peak_output > 10.0,
        "peak {} and diverged={} show no instability",
        summary.peak_output,
        summary.diverged
    );
    println!(
        "PASS criterion 2: uncompensated gain attack unstable (peak |y| = {:.2}, diverged = {})",
        summary.peak_output, summary.diverged
    );
}

#[test]
fn criterion_3_detection_latency_windows() {
    let gain = scenarios::gain_attack();
    assert_eq!(gain.scenario.detector.eta, 3.0);
    assert_eq!(gain.scenario.detector.persistence, 1);
    assert_eq!(gain.scenario.ts, 0.001);
    let log = run_scenario(&gain.scenario).unwrap();
    let t_gain = summarize(&log).detection_time.expect("gain detection");
    let idx = sample_index(&log, t_gain);
    assert!(
        (5001..=5010).contains(&idx),
        "gain detection at {t_gain} s (sample {idx}) outside [5.001, 5.010]"
    );

    let sse = scenarios::sse_attack();
    assert_eq!(sse.scenario.detector.eta, 3.0);
    assert_eq!(sse.scenario.detector.persistence, 1);
    let log = run_scenario(&sse.scenario).unwrap();
    let t_sse = summarize(&log).detection_time.expect("sse detection");
    let idx = sample_index(&log, t_sse);
    assert!(
        (5010..=5040).contains(&idx),
        "sse detection at {t_sse} s (sample {idx}) outside [5.010, 5.040]"
    );
    println!("PASS criterion 3: detection at {t_gain} s (gain) and {t_sse} s (filter)");
}

#[test]
fn criterion_4_identification_accuracy() {
    let log = run_scenario(&scenarios::gain_attack().scenario).unwrap();
    let summary = summarize(&log);
    let num = summary.identified_num.expect("identified numerator");
    let den = summary.identified_den.expect("identified denominator");
    // reported magnitudes; the reported trailing-numerator sign differs
    // from the derived composition, so compare magnitudes here and signs
    // against the composition oracle in criterion 5
    let num_expected = [1.59359996e-4, 1.58720003e-4];
    for (got, want) in num.iter().zip(num_expected) {
        let rel = (got.abs() - want).abs() / want;
        assert!(rel < 0.01, "numerator |{got}| vs {want}: rel err {rel}");
    }
    let den_expected = [-1.98799999, 0.988099999];
    for (got, want) in den[1..].iter().zip(den_expected) {
        let rel = (got - want).abs() / want.abs();
        assert!(rel < 0.001, "denominator {got} vs {want}: rel err {rel}");
    }
    let final_err = summary.final_prediction_error.expect("prediction error");
    assert!(final_err < 1e-10, "final prediction error {final_err}");
    println!(
        "PASS criterion 4: identified coefficients within 1%/0.1%, final prediction error {final_err:.2e}"
    );
}

#[test]
fn criterion_5_identified_model_matches_series_composition() {
    let log = run_scenario(&scenarios::gain_attack().scenario).unwrap();
    let summary = summarize(&log);
    let oracle = TransferFunction::constant(160.0, TS)
        .unwrap()
        .series(&scenarios::motor_plant())
        .unwrap();
    let num = summary.identified_num.unwrap();
    let den = summary.identified_den.unwrap();
    for (got, want) in num.iter().zip(oracle.num().coeffs()) {
        assert_relative_eq!(got, want, max_relative = 0.01);
    }
    for (got, want) in den.iter().zip(oracle.den().coeffs()) {
        assert_relative_eq!(got, want, max_relative = 0.01);
    }
    println!("PASS criterion 5: identified model matches gain x plant composition within 1%");
}

#[test]
fn criterion_6_stability_region_verdicts() {
    let grid = GridSpec {
        kp_min: 0.0,
        kp_max: 5000.0,
        ki_min: 0.0,
        ki_max: 5000.0,
        steps: 201,
    };
    let gain_model = scenarios::reported_gain_attack_model();
    let region = stability_region(&gain_model, &grid).unwrap();
    let (i, j) = region.nearest_cell(50.0, 100.0);
    assert_eq!((region.kp_axis()[i], region.ki_axis()[j]), (50.0, 100.0));
    assert!(region.is_stable_cell(i, j), "(50, 100) must be stable");
    let (i0, j0) = region.nearest_cell(0.0, 0.0);
    assert!(!region.is_stable_cell(i0, j0), "(0, 0) must be unstable");
    assert!(region.stable_count() > 0 && region.stable_count() < region.cell_count());

    let sse_model = scenarios::reported_sse_attack_model();
    let region = stability_region(&sse_model, &grid).unwrap();
    let (i, j) = region.nearest_cell(2000.0, 1500.0);
    assert_eq!((region.kp_axis()[i], region.ki_axis()[j]), (2000.0, 1500.0));
    assert!(region.is_stable_cell(i, j), "(2000, 1500) must be stable");
    assert!(region.stable_count() > 0 && region.stable_count() < region.cell_count());
    println!("PASS criterion 6: region marks (50,100) stable, (0,0) unstable, (2000,1500) stable");
}

#[test]
fn criterion_7_gain_attack_compensation() {
    let log = run_scenario(&scenarios::gain_attack().scenario).unwrap();
    let summary = summarize(&log);
    assert_eq!(summary.selected_kp, Some(50.0));
    assert_eq!(summary.selected_ki, Some(100.0));
    let swap = summary.swap_time.expect("controller swap");
    let post_peak = log.peak_after(swap);
    assert!(post_peak < 5.0, "post-swap peak {post_peak}");
    let err = final_second_error(&log);
    assert!(err < 0.05, "final-second |y - 1| = {err}");
    assert!(!summary.diverged);
    println!(
        "PASS criterion 7: compensated gain attack bounded (post-swap peak {post_peak:.3}, final error {err:.2e})"
    );
}

#[test]
fn criterion_8_sse_attack_compensation() {
    let mut uncompensated = scenarios::sse_attack().scenario;
    uncompensated.compensation_enabled = false;
    let log = run_scenario(&uncompensated).unwrap();
    let sse = summarize(&log).steady_state_error;
    assert!(
        (0.024..=0.040).contains(&sse),
        "uncompensated steady-state error {sse} outside 0.032 +- 0.008"
    );

    let log = run_scenario(&scenarios::sse_attack().scenario).unwrap();
    let summary = summarize(&log);
    assert!(summary.swap_time.is_some(), "no swap happened");
    let err14 = log.error_at(14.0).unwrap();
    assert!(err14 <= 0.0075, "|r - y| at t=14 s is {err14}");
    println!(
        "PASS criterion 8: steady-state error {sse:.4} uncompensated, {err14:.4} at t=14 s compensated"
    );
}

// --- criterion 9: property suite -----------------------------------------

/// Random real polynomial of degree 1..=5 built from sampled roots with
/// modulus in [0, 2], avoiding the unit circle by 1e-6. Returns the
/// polynomial and the largest sampled modulus.
fn random_rooted_poly(rng: &mut ChaCha8Rng) -> (Polynomial, f64) {
    let degree = rng.random_range(1..=5usize);
    let mut p = Polynomial::constant(rng.random_range(0.5..2.0));
    let mut remaining = degree;
    let mut max_mod: f64 = 0.0;
    let modulus = |rng: &mut ChaCha8Rng| loop {
        let m: f64 = rng.random_range(0.0..2.0);
        if (m - 1.0).abs() > 1e-6 {
            break m;
        }
    };
    while remaining > 0 {
        if remaining >= 2 && rng.random_bool(0.5) {
            // conjugate pair: z^2 - 2 m cos(w) z + m^2
            let m = modulus(rng);
            let w: f64 = rng.random_range(0.05..std::f64::consts::PI - 0.05);
            p = &p * &Polynomial::new(vec![1.0, -2.0 * m * w.cos(), m * m]);
            max_mod = max_mod.max(m);
            remaining -= 2;
        } else {
            let m = modulus(rng);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            p = &p * &Polynomial::new(vec![1.0, -sign * m]);
            max_mod = max_mod.max(m);
            remaining -= 1;
        }
    }
    (p, max_mod)
}

#[test]
fn criterion_9a_jury_agrees_with_root_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for trial in 0..500 {
        let (p, max_mod) = random_rooted_poly(&mut rng);
        let expected = max_mod < 1.0;
        let jury = is_stable(&p).unwrap();
        assert_eq!(
            jury,
            expected,
            "trial {trial}: jury={jury} but max sampled modulus {max_mod} ({:?})",
            p.coeffs()
        );
        let eig_max = polynomial_roots(&p)
            .unwrap()
            .iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max);
        assert_relative_eq!(eig_max, max_mod, max_relative = 1e-6);
    }
    println!("PASS criterion 9a: Jury test matches root oracle on 500 random polynomials");
}

#[test]
fn criterion_9b_batch_and_recursive_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for _ in 0..20 {
        // random stable second-order system
        let r1: f64 = rng.random_range(-0.9..0.9);
        let r2: f64 = rng.random_range(-0.9..0.9);
        let tf = TransferFunction::from_coeffs(
            &[rng.random_range(0.1..1.0), rng.random_range(-0.5..0.5)],
            &[1.0, -(r1 + r2), r1 * r2],
            TS,
        )
        .unwrap();
        let u: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut state = LtiSimState::new(&tf);
        let y: Vec<f64> = u.iter().map(|&ui| state.step(ui)).collect();
        let orders = ArxOrders::new(2, 2).unwrap();
        let (x, t) = build_regressor(&u, &y, orders).unwrap();
        let batch = batch_ls(&x, &t, orders).unwrap();
        let mut rls = RlsState::new(orders, 1.0, 1e8).unwrap();
        for i in 0..x.nrows() {
            rls.update(&x.row(i).transpose(), t[i]);
        }
        let recursive = rls.theta();
        for (b, r) in batch
            .a()
            .iter()
            .chain(batch.b())
            .zip(recursive.a().iter().chain(recursive.b()))
        {
            assert!((b - r).abs() < 1e-6, "batch {b} vs recursive {r}");
        }
    }
    println!("PASS criterion 9b: batch and recursive least squares agree within 1e-6");
}

#[test]
fn criterion_9c_simulate_identify_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    for _ in 0..20 {
        let r1: f64 = rng.random_range(-0.8..0.8);
        let r2: f64 = rng.random_range(-0.8..0.8);
        let b = [rng.random_range(0.2..1.0), rng.random_range(-0.5..0.5)];
        let a = [-(r1 + r2), r1 * r2];
        let tf = TransferFunction::from_coeffs(&b, &[1.0, a[0], a[1]], TS).unwrap();
        let u: Vec<f64> = (0..600).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut state = LtiSimState::new(&tf);
        let y: Vec<f64> = u.iter().map(|&ui| state.step(ui)).collect();
        let orders = ArxOrders::new(2, 2).unwrap();
        let (x, t) = build_regressor(&u, &y, orders).unwrap();
        let theta = batch_ls(&x, &t, orders).unwrap();
        for (got, want) in theta.a().iter().zip(a) {
            assert!((got - want).abs() < 1e-8, "a: {got} vs {want}");
        }
        for (got, want) in theta.b().iter().zip(b) {
            assert!((got - want).abs() < 1e-8, "b: {got} vs {want}");
        }
    }
    println!("PASS criterion 9c: simulate/identify round trip recovers parameters within 1e-8");
}

#[test]
fn criterion_9d_char_poly_matches_closed_form() {
    // closed-form cubic for the reported second-order model under a PI
    // controller, as an independent route
    let a1 = 1.59359996e-4;
    let a2 = -1.58720003e-4;
    let b1 = -1.98799999;
    let b2 = 0.988099999;
    let g = TransferFunction::from_coeffs(&[a1, a2], &[1.0, b1, b2], TS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    for _ in 0..100 {
        let kp: f64 = rng.random_range(0.0..5000.0);
        let ki: f64 = rng.random_range(0.0..5000.0);
        let c = pid_tf(&PidGains::pi(kp, ki, TS)).unwrap();
        let p = char_poly(&g, &c).unwrap();
        let expected = [
            1.0,
            b1 - 1.0 + kp * a1,
            b2 - b1 + kp * a2 - kp * a1 + TS * ki * a1,
            -b2 - kp * a2 + TS * ki * a2,
        ];
        for (got, want) in p.coeffs().iter().zip(expected) {
            assert_relative_eq!(got, &want, max_relative = 1e-12);
        }
    }
    println!("PASS criterion 9d: characteristic polynomial matches the closed form within 1e-12");
}

#[test]
fn criterion_9e_repeated_runs_byte_identical() {
    for golden in scenarios::all() {
        let a = run_scenario(&golden.scenario).unwrap();
        let b = run_scenario(&golden.scenario).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b, "{}: timeseries differ", golden.name);
        let sa = serde_json::to_vec(&summarize(&a)).unwrap();
        let sb = serde_json::to_vec(&summarize(&b)).unwrap();
        assert_eq!(sa, sb, "{}: summaries differ", golden.name);
    }
    println!("PASS criterion 9e: repeated golden runs serialize byte-identically");
}
