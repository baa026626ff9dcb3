use fracmc::mc::{expect, Accumulator};
use fracmc::sampler::{
    kanter_a, sample_gaussian, sample_inverse_subordinator, sample_stable_oneside, sample_subordinator, Law,
    RngStream, SampleBatch,
};
use fracmc::special::gamma;
use statrs::function::erf::{erf, erfc};

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

fn mean_and_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut acc = Accumulator::new();
    xs.for_each(|x| acc.push(x));
    let e = acc.estimate();
    (e.mean, e.std_error)
}

#[test]
fn kanter_a_reference_points() {
    assert!((kanter_a(0.5, std::f64::consts::FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
    assert!((kanter_a(0.5, 1e-9).unwrap() - 0.25).abs() < 1e-12);
    assert!(kanter_a(1.0, 1.0).is_err());
    assert!(kanter_a(0.5, 0.0).is_err());
}

#[test]
fn stable_half_matches_levy_cdf() {
    let n = 100_000;
    let b = sample_stable_oneside(&mut RngStream::new(11, 0), 0.5, n).unwrap();
    let d = ks_statistic(b.values, |x| erfc(0.5 / x.sqrt()));
    assert!(d < ks_critical_1pct(n), "D = {d}");
}

#[test]
fn stable_laplace_functional() {
    let b = sample_stable_oneside(&mut RngStream::new(12, 0), 0.5, 100_000).unwrap();
    for s in [0.5f64, 1.0, 2.0] {
        let (m, se) = mean_and_se(b.values.iter().map(|x| (-s * x).exp()));
        let exact = (-s.sqrt()).exp();
        assert!((m - exact).abs() < 3.0 * se, "s = {s}: {m} vs {exact} (se {se})");
    }
}

#[test]
fn empty_and_repeatable_batches() {
    assert!(sample_stable_oneside(&mut RngStream::new(1, 0), 0.3, 0).unwrap().values.is_empty());
    let a = sample_stable_oneside(&mut RngStream::new(5, 9), 0.7, 1000).unwrap();
    let b = sample_stable_oneside(&mut RngStream::new(5, 9), 0.7, 1000).unwrap();
    assert_eq!(a, b);
    let c = sample_stable_oneside(&mut RngStream::new(5, 10), 0.7, 1000).unwrap();
    assert_ne!(a.values, c.values);
}

#[test]
fn subordinator_laplace_at_t4() {
    let b = sample_subordinator(&mut RngStream::new(13, 0), 0.5, 4.0, 100_000).unwrap();
    for s in [0.25f64, 1.0] {
        let (m, se) = mean_and_se(b.values.iter().map(|y| (-s * y).exp()));
        let exact = (-4.0 * s.sqrt()).exp();
        assert!((m - exact).abs() < 3.0 * se, "s = {s}: {m} vs {exact} (se {se})");
    }
}

#[test]
fn subordinator_at_unit_time_is_the_stable_law() {
    let a = sample_subordinator(&mut RngStream::new(3, 3), 0.6, 1.0, 500).unwrap();
    let b = sample_stable_oneside(&mut RngStream::new(3, 3), 0.6, 500).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn inverse_half_first_two_moments() {
    let law = Law::inverse_subordinator(0.5, 1.0).unwrap();
    let m1 = expect(&mut RngStream::new(14, 0), &law, |x| x, 1_000_000).unwrap();
    assert!(m1.within(1.0 / gamma(1.5), 3.0), "{m1:?}");
    let m2 = expect(&mut RngStream::new(14, 1), &law, |x| x * x, 1_000_000).unwrap();
    assert!(m2.within(2.0, 3.0), "{m2:?}");
}

#[test]
fn inverse_half_is_half_gaussian() {
    let n = 100_000;
    let b = sample_inverse_subordinator(&mut RngStream::new(15, 0), 0.5, 1.0, n).unwrap();
    let d = ks_statistic(b.values, |x| erf(0.5 * x));
    assert!(d < ks_critical_1pct(n), "D = {d}");
}

#[test]
fn inverse_at_time_zero_is_degenerate() {
    let b = sample_inverse_subordinator(&mut RngStream::new(1, 0), 0.4, 0.0, 10).unwrap();
    assert!(b.values.iter().all(|&x| x == 0.0));
    assert!(Law::inverse_subordinator(1.0, 1.0).is_err());
}

#[test]
fn inverse_concentrates_near_beta_one() {
    let mut b = sample_inverse_subordinator(&mut RngStream::new(16, 0), 0.999, 1.0, 100_000)
        .unwrap()
        .values;
    b.sort_by(f64::total_cmp);
    let iqr = b[75_000] - b[25_000];
    assert!(iqr < 0.05, "iqr = {iqr}");
}

#[test]
fn gaussian_kernel_variance() {
    for (tau, var) in [(1.0, 2.0), (0.5, 1.0)] {
        let xs = sample_gaussian(&mut RngStream::new(17, 0), tau, 1_000_000).unwrap();
        let (m, se) = mean_and_se(xs.iter().map(|x| x * x));
        assert!((m - var).abs() < 3.0 * se, "tau = {tau}: {m} (se {se})");
    }
    assert!(sample_gaussian(&mut RngStream::new(1, 0), 0.0, 10).is_err());
}

#[test]
fn batch_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    let b = sample_inverse_subordinator(&mut RngStream::new(21, 4), 0.3, 2.5, 257).unwrap();
    b.write_csv(&path).unwrap();
    assert_eq!(SampleBatch::read_csv(&path).unwrap(), b);
}
