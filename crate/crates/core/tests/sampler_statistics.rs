use isowiener::kernel::{covariance_matrix, increment_variance};
use isowiener::sampler::{sample_field, FieldSampler};
use isowiener::{Point, RngStream};
use statrs::distribution::{ContinuousCDF, Normal};

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

/// Sample second moments `mean(f_i f_j)` of a zero-mean field.
fn second_moments(sampler: &FieldSampler, draws: usize, seed: u64) -> Vec<f64> {
    let n = sampler.points().len();
    let base = RngStream::new(seed, 0);
    let mut acc = vec![0.0; n * n];
    for r in 0..draws {
        let f = sampler.draw_values(&mut base.split(r as u64));
        for i in 0..n {
            for j in 0..=i {
                acc[i * n + j] += f[i] * f[j];
            }
        }
    }
    acc.iter().map(|s| s / draws as f64).collect()
}

#[test]
fn variance_at_unit_norm_point() {
    let sampler = FieldSampler::new(vec![pt(&[0.6, 0.8])]).unwrap();
    let draws = 10_000;
    let m = second_moments(&sampler, draws, 31)[0];
    // Var of a χ²₁-scaled estimator: 2σ⁴/N
    let se = (2.0 / draws as f64).sqrt();
    assert!((m - 1.0).abs() < 4.0 * se, "{m}");
}

#[test]
fn one_dim_covariance_is_min() {
    let sampler = FieldSampler::new(vec![pt(&[0.25]), pt(&[0.75])]).unwrap();
    let draws = 10_000;
    let m = second_moments(&sampler, draws, 32);
    let (s11, s22, s12) = (0.25, 0.75, 0.25);
    let se = ((s11 * s22 + s12 * s12) / draws as f64).sqrt();
    assert!((m[2] - 0.25).abs() < 4.0 * se, "{}", m[2]);
}

#[test]
fn ten_point_empirical_covariance_matches_gram_matrix() {
    let mut rng = RngStream::new(2, 0);
    let pts: Vec<Point> = (0..10).map(|_| pt(&[rng.uniform(), rng.uniform()])).collect();
    let cov = covariance_matrix(&pts).unwrap();
    let sampler = FieldSampler::new(pts).unwrap();
    let draws = 20_000;
    let m = second_moments(&sampler, draws, 33);
    for i in 0..10 {
        for j in 0..=i {
            let s = cov.entry(i, j);
            let se = ((cov.entry(i, i) * cov.entry(j, j) + s * s) / draws as f64).sqrt();
            assert!((m[i * 10 + j] - s).abs() < 4.0 * se, "entry ({i},{j}): {} vs {s}", m[i * 10 + j]);
        }
    }
}

#[test]
fn one_dim_endpoint_is_standard_normal() {
    let sampler = FieldSampler::new(vec![pt(&[0.3]), pt(&[1.0])]).unwrap();
    let draws = 10_000;
    let base = RngStream::new(34, 0);
    let mut xs: Vec<f64> = (0..draws)
        .map(|r| sampler.draw_values(&mut base.split(r as u64))[1])
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nd = Normal::standard();
    let n = draws as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = nd.cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    // asymptotic 1% critical value
    assert!(ks < 1.628 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn increment_law_on_random_pairs() {
    let mut rng = RngStream::new(35, 0);
    let draws = 10_000;
    for pair in 0..10 {
        let d = 1 + pair % 3;
        let x = pt(&(0..d).map(|_| rng.uniform()).collect::<Vec<_>>());
        let y = pt(&(0..d).map(|_| rng.uniform()).collect::<Vec<_>>());
        let target = increment_variance(&x, &y).unwrap();
        let sampler = FieldSampler::new(vec![x, y]).unwrap();
        let base = RngStream::new(36, pair as u64);
        let mean: f64 = (0..draws)
            .map(|r| {
                let f = sampler.draw_values(&mut base.split(r as u64));
                (f[0] - f[1]).powi(2)
            })
            .sum::<f64>()
            / draws as f64;
        let se = target * (2.0 / draws as f64).sqrt();
        assert!((mean - target).abs() < 4.0 * se, "pair {pair}: {mean} vs {target}");
    }
}

#[test]
fn sample_field_reproducible_and_origin_zero() {
    let pts = vec![pt(&[0.0, 0.0]), pt(&[0.5, 0.5]), pt(&[1.0, 0.2])];
    let a = sample_field(&pts, &mut RngStream::new(1, 1)).unwrap();
    let b = sample_field(&pts, &mut RngStream::new(1, 1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values[0], 0.0);
    let c = sample_field(&pts, &mut RngStream::new(1, 2)).unwrap();
    assert_ne!(a.values, c.values);
}
