mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use pwm_qoc::pulse::*;
use pwm_qoc::QocError;
use rand::Rng;

const EPS: f64 = 2.0 * PI * 2e6;

/// `∫_a^b A sin(ω t + φ) dt` by hand.
fn sine_area(a_amp: f64, w: f64, phi: f64, a: f64, b: f64) -> f64 {
    a_amp / w * ((w * a + phi).cos() - (w * b + phi).cos())
}

#[test]
fn sine_widths_match_antiderivative() {
    let (amp, w, phi) = (2.0 * PI * 50e3, 2.0 * PI * 50e3, 0.3);
    let u = ControlSignal::sine(amp, w, phi);
    for &m in &[10usize, 137, 1000] {
        let cfg = PwmConfig::from_horizon(20e-6, m, Layout::Centered).unwrap();
        let train = pwm_transform(&u, &cfg, EPS).unwrap();
        let tau = cfg.tau;
        for k in 0..m {
            let expected = sine_area(amp, w, phi, k as f64 * tau, (k + 1) as f64 * tau);
            let got = train.controls[0].area(k);
            assert!((got - expected).abs() <= 1e-12 * EPS * tau, "M = {m}, k = {k}: {got} vs {expected}");
        }
    }
}

#[test]
fn constant_signal_gives_equal_widths() {
    let cfg = PwmConfig::from_horizon(1e-3, 50, Layout::Centered).unwrap();
    let v = -0.37 * EPS;
    let train = pwm_transform(&ControlSignal::constant(v), &cfg, EPS).unwrap();
    for &w in &train.controls[0].widths {
        assert!((w - v * cfg.tau / EPS).abs() <= 1e-12 * cfg.tau);
    }
}

#[test]
fn zero_signal_gives_zero_train() {
    let cfg = PwmConfig::from_horizon(1e-3, 40, Layout::Centered).unwrap();
    let train = pwm_transform(&ControlSignal::zero(), &cfg, EPS).unwrap();
    assert!(train.controls[0].widths.iter().all(|&w| w == 0.0));
}

#[test]
fn over_amplitude_names_the_interval() {
    // exceeds eps only on the third of four intervals
    let levels = vec![0.0, 0.5 * EPS, 1.5 * EPS, 0.0];
    let u = ControlSignal::piecewise_constant(0.0, 1e-6, levels, 2.0 * EPS).unwrap();
    let cfg = PwmConfig::from_horizon(4e-6, 4, Layout::Centered).unwrap();
    match pwm_transform(&u, &cfg, EPS) {
        Err(e @ QocError::AmplitudeBound { interval: 3, .. }) => {
            assert!(e.to_string().contains("amplitude bound violated at interval 3"));
            assert_eq!(e.exit_code(), 2);
        }
        other => panic!("expected an amplitude error, got {other:?}"),
    }
}

#[test]
fn anti_pwm_is_a_fixed_point_on_pwc_signals() {
    let mut rng = common::rng(7);
    for m in [1usize, 5, 64] {
        let tau = 2e-6;
        let levels: Vec<f64> = (0..m).map(|_| rng.random_range(-EPS..EPS)).collect();
        let u = ControlSignal::piecewise_constant(0.0, tau, levels.clone(), EPS).unwrap();
        let cfg = PwmConfig::new(tau, m, Layout::Centered).unwrap();
        let train = pwm_transform(&u, &cfg, EPS).unwrap();
        let back = anti_pwm(&train).unwrap();
        let again = pwm_transform(&back[0], &cfg, EPS).unwrap();
        for k in 0..m {
            let centre = (k as f64 + 0.5) * tau;
            assert!((back[0].value_at(centre) - levels[k]).abs() <= 1e-12 * EPS);
            assert!((again.controls[0].widths[k] - train.controls[0].widths[k]).abs() <= 1e-12 * tau);
        }
    }
}

#[test]
fn linear_anti_pwm_keeps_mean_level() {
    let tau = 1e-6;
    let levels = vec![0.2 * EPS; 12];
    let u = ControlSignal::piecewise_constant(0.0, tau, levels, EPS).unwrap();
    let cfg = PwmConfig::new(tau, 12, Layout::Centered).unwrap();
    let train = pwm_transform(&u, &cfg, EPS).unwrap();
    let lin = anti_pwm_with(&train, AntiPwmShape::Linear).unwrap();
    for j in 0..=120 {
        let t = j as f64 * tau / 10.0;
        assert!((lin[0].value_at(t) - 0.2 * EPS).abs() <= 1e-9 * EPS);
    }
}

/// Trapezoid rule over the samples of a sampled signal.
fn trapezoid(u: &ControlSignal) -> f64 {
    match u.kind() {
        SignalKind::Sampled { dt, values, .. } => {
            let n = values.len();
            dt * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
        }
        _ => panic!("not sampled"),
    }
}

#[test]
fn gaussian_train_keeps_total_area() {
    let mut rng = common::rng(11);
    let m = 40;
    let cfg = PwmConfig::from_horizon(40e-6, m, Layout::Centered).unwrap();
    let mut train = PwmTrain::zeros(cfg, &[EPS]).unwrap();
    for w in &mut train.controls[0].widths {
        // resolved by the sampling, and short enough that the tails stay
        // inside [0, T]
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        *w = sign * rng.random_range(0.1..0.3) * cfg.tau;
    }
    let expected: f64 = train.controls[0].widths.iter().map(|w| EPS * w).sum();
    let scale: f64 = train.controls[0].widths.iter().map(|w| EPS * w.abs()).sum();
    for spi in [32usize, 64] {
        let g = gaussian_train(&train, spi).unwrap();
        let err = (trapezoid(&g[0]) - expected).abs() / scale;
        assert!(err <= 5e-3, "spi = {spi}: relative area error {err:e}");
    }
    assert!(gaussian_train(&train, 4).is_err());
}

#[test]
fn rectangular_rendering_preserves_areas() {
    let cfg = PwmConfig::from_horizon(10e-6, 10, Layout::Centered).unwrap();
    let mut train = PwmTrain::zeros(cfg, &[EPS]).unwrap();
    for (k, w) in train.controls[0].widths.iter_mut().enumerate() {
        *w = (k as f64 / 10.0 - 0.45) * cfg.tau;
    }
    let r = rectangular_signal(&train, 0, 37).unwrap();
    let total: f64 = train.controls[0].widths.iter().map(|w| EPS * w).sum();
    let sum = match r.kind() {
        SignalKind::Sampled { dt, values, .. } => values.iter().sum::<f64>() * dt,
        _ => unreachable!(),
    };
    assert!((sum - total).abs() <= 1e-9 * EPS * cfg.tau);
}

#[test]
fn spectrum_peak_matches_direct_dft() {
    let (amp, f0) = (3.0, 50e3);
    let n = 1000;
    let dt = 1e-7;
    let values: Vec<f64> = (0..n).map(|j| amp * (2.0 * PI * f0 * j as f64 * dt).sin()).collect();
    let u = ControlSignal::sampled(0.0, dt, values.clone()).unwrap();
    let bins = signal_spectrum(&u).unwrap();
    let peak = bins.iter().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude)).unwrap();
    assert!((peak.frequency - f0).abs() < 1e-6);
    // direct sum at the peak frequency
    let (mut re, mut im) = (0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let ph = -2.0 * PI * f0 * j as f64 * dt;
        re += v * ph.cos();
        im += v * ph.sin();
    }
    let direct = (re * re + im * im).sqrt() * dt;
    assert!((peak.magnitude - direct).abs() <= 1e-9 * direct);
    assert!((direct - amp * n as f64 * dt / 2.0).abs() <= 1e-9 * direct);
}

#[test]
fn signal_csv_round_trip() {
    let u = ControlSignal::sampled(0.0, 1e-7, vec![0.0, 1.5, -2.25, 1e-300, 3.0e6]).unwrap();
    let mut buf = Vec::new();
    write_signal_csv(&u, &mut buf, 1e-7, 4e-7).unwrap();
    let back = read_signal_csv(buf.as_slice(), None).unwrap();
    for j in 0..5 {
        let t = j as f64 * 1e-7;
        assert_eq!(back.value_at(t), u.value_at(t));
    }
}

#[test]
fn signal_csv_rejects_bad_input() {
    assert!(matches!(read_signal_csv("x,y\n0,1\n".as_bytes(), None), Err(QocError::Parse { .. })));
    assert!(matches!(
        read_signal_csv("t,u\n0,1\n1e-6,abc\n".as_bytes(), None),
        Err(QocError::Parse { row: 3, .. })
    ));
    assert!(read_signal_csv("t,u\n0,1\n1e-6,1\n3e-6,1\n".as_bytes(), None).is_err());
}

fn random_train(seed: u64, m: usize, controls: usize, layout: Layout) -> PwmTrain {
    let mut rng = common::rng(seed);
    let cfg = PwmConfig::from_horizon(1e-4, m, layout).unwrap();
    let mut t = PwmTrain::zeros(cfg, &vec![EPS; controls]).unwrap();
    let b = t.width_bound();
    for c in &mut t.controls {
        for w in &mut c.widths {
            *w = rng.random_range(-b..=b);
        }
    }
    t
}

#[test]
fn train_json_round_trip_is_exact() {
    let t = random_train(3, 17, 2, Layout::Nested);
    let back = PwmTrain::from_json(&t.to_json().unwrap()).unwrap();
    assert_eq!(back, t);
    let file = tempfile::NamedTempFile::new().unwrap();
    t.save(file.path()).unwrap();
    assert_eq!(PwmTrain::load(file.path()).unwrap(), t);
}

fn areas(t: &PwmTrain) -> Vec<Vec<f64>> {
    t.controls
        .iter()
        .map(|c| (0..t.intervals()).map(|k| c.area(k)).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_preserves_areas(seed in 0u64..10_000, m in 1usize..40, f in 1.0f64..32.0) {
        let t = random_train(seed, m, 1, Layout::Centered);
        let s = scale_train(&t, f).unwrap();
        for (a, b) in areas(&t)[0].iter().zip(&areas(&s)[0]) {
            prop_assert!((a - b).abs() <= 1e-12 * EPS * t.tau());
        }
        for k in 0..m {
            prop_assert!(s.controls[0].duration(k) <= t.tau() / f * (1.0 + 1e-12));
            let (lo, hi) = s.pulse_support(0, k);
            prop_assert!(lo >= k as f64 * t.tau() - 1e-18 && hi <= (k + 1) as f64 * t.tau() + 1e-18);
        }
        let back = unscale_train(&s).unwrap();
        for (a, b) in t.controls[0].widths.iter().zip(&back.controls[0].widths) {
            prop_assert!((a - b).abs() <= 1e-12 * t.tau());
        }
    }

    #[test]
    fn interleaving_keeps_areas_and_separates_pulses(seed in 0u64..10_000, m in 1usize..30, controls in 2usize..4) {
        let nested = random_train(seed, m, controls, Layout::Nested);
        let small = nested;
        let inter = interleave(&small).unwrap();
        prop_assert_eq!(inter.config.layout, Layout::Interleaved);
        let (a, b) = (areas(&small), areas(&inter));
        for i in 0..controls {
            for k in 0..m {
                prop_assert!((a[i][k] - b[i][k]).abs() <= 1e-12 * EPS * small.tau());
            }
        }
        for k in 0..m {
            let mut spans: Vec<(f64, f64)> = (0..controls).map(|i| inter.pulse_support(i, k)).collect();
            spans.sort_by(|x, y| x.0.total_cmp(&y.0));
            for w in spans.windows(2) {
                prop_assert!(w[0].1 <= w[1].0 + 1e-15);
            }
        }
        prop_assert!(inter.validate().is_ok());
    }
}

#[test]
fn interleave_needs_several_nested_controls() {
    assert!(interleave(&random_train(5, 4, 1, Layout::Centered)).is_err());
    let inter = interleave(&random_train(5, 4, 2, Layout::Nested)).unwrap();
    assert!(interleave(&inter).is_err());
}
