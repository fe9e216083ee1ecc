mod common;

use common::{mean, std, two_gaussians, BARYCENTER_OF_TWO_GAUSSIANS};
use dpfair::{calibrate, group_unfairness, risk_mse, CalibrationConfig};

#[test]
fn barycenter_of_gaussians_has_averaged_parameters() {
    let n = 50_000;
    let data = two_gaussians(n, 3);
    let model = calibrate(&data, &CalibrationConfig::default()).unwrap().model;
    let pooled = model.barycenter().pooled_fair().values();
    let (mu, sigma) = BARYCENTER_OF_TWO_GAUSSIANS;
    let se_mean = (0.25 * (1.0 + 2.25) / n as f64).sqrt();
    let se_std = (0.25 * (1.0 + 2.25) / (2 * n) as f64).sqrt();
    assert!((mean(pooled) - mu).abs() <= 3.0 * se_mean, "{}", mean(pooled));
    assert!((std(pooled) - sigma).abs() <= 3.0 * se_std, "{}", std(pooled));
}

#[test]
fn unfairness_shrinks_linearly_in_epsilon() {
    let data = two_gaussians(10_000, 4);
    let model = calibrate(&data, &CalibrationConfig::default()).unwrap().model;
    let (base, _) = group_unfairness(data.scores(), data.groups()).unwrap();
    for eps in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let out = model.transform_batch_with_epsilon(&data, eps).unwrap();
        let (u, _) = group_unfairness(&out, data.groups()).unwrap();
        assert!((u / base - eps).abs() <= 0.03, "eps {eps}: ratio {}", u / base);
    }
}

#[test]
fn group_output_is_geodesic_midpoint() {
    let data = two_gaussians(2_000, 5);
    let model = calibrate(&data, &CalibrationConfig::default()).unwrap().model;
    let fair = model.fair_parts(&data).unwrap();
    let half = model.transform_batch_with_epsilon(&data, 0.5).unwrap();
    for s in ["A", "B"] {
        let pick = |v: &[f64]| {
            let mut out: Vec<f64> = v.iter().zip(data.groups()).filter(|(_, g)| *g == s).map(|(x, _)| *x).collect();
            out.sort_by(f64::total_cmp);
            out
        };
        let (raw_s, fair_s, half_s) = (pick(data.scores()), pick(&fair), pick(&half));
        for i in 0..raw_s.len() {
            assert!((half_s[i] - 0.5 * (fair_s[i] + raw_s[i])).abs() < 1e-12);
        }
    }
}

#[test]
fn risk_follows_squared_interpolation() {
    let data = two_gaussians(1_000, 6);
    let model = calibrate(&data, &CalibrationConfig::default()).unwrap().model;
    let r0 = risk_mse(&model.transform_batch_with_epsilon(&data, 0.0).unwrap(), data.scores()).unwrap();
    for eps in [0.1, 0.3, 0.9] {
        let r = risk_mse(&model.transform_batch_with_epsilon(&data, eps).unwrap(), data.scores()).unwrap();
        assert!((r - (1.0 - eps).powi(2) * r0).abs() <= 1e-12 * r0.max(1.0));
    }
}
