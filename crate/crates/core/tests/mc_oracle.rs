use regrisk::mc::{divergence, estimate_risk, mle_fit, simulate, Params, SimConfig, XDist, XSample};
use regrisk::{ErrorModel, Error};

#[test]
fn normal_mle_is_consistent() {
    let mut cfg = SimConfig::new(ErrorModel::normal(), XDist::NormalP, 2, 100_000, -1.0, 1, 5);
    cfg.beta = vec![0.5, -1.0, 2.0];
    cfg.sigma = 1.0;
    let sample = simulate(&cfg, 0).unwrap();
    let fit = mle_fit(&sample, &cfg.model, None).unwrap();
    assert!(fit.converged);
    assert!((0.99..=1.01).contains(&fit.sigma), "{}", fit.sigma);
    for (b, t) in fit.beta.iter().zip(&cfg.beta) {
        assert!((b - t).abs() < 0.02, "{b} vs {t}");
    }
}

#[test]
fn intercept_only_heavy_tail_fit_reaches_stationarity() {
    let cfg = SimConfig::new(ErrorModel::student_t(3.0).unwrap(), XDist::NormalP, 0, 500, -1.0, 1, 17);
    let sample = simulate(&cfg, 0).unwrap();
    let fit = mle_fit(&sample, &cfg.model, None).unwrap();
    assert!(fit.converged);
    assert!(fit.grad_norm < 1e-8, "{}", fit.grad_norm);
    assert_eq!(fit.beta.len(), 1);
}

#[test]
fn divergence_duality_over_regressors() {
    let x = XSample { p: 2, data: vec![0.3, -1.0, 1.2, 0.4, -0.7, 0.0, 2.0, 1.5] };
    let a = Params { beta: vec![0.1, 0.4, -0.2], sigma: 1.3 };
    let b = Params { beta: vec![-0.2, 0.0, 0.3], sigma: 0.9 };
    for model in [ErrorModel::normal(), ErrorModel::student_t(4.2).unwrap(), ErrorModel::skew_normal(3.0).unwrap()] {
        for alpha in [-1.0, -0.4, 0.0, 0.6, 1.0] {
            let d = divergence(&model, &a, &b, alpha, &x).unwrap();
            let e = divergence(&model, &b, &a, -alpha, &x).unwrap();
            assert!(d > 0.0);
            assert!((d - e).abs() <= 1e-9 * d, "{} alpha={alpha}: {d} vs {e}", model.label());
        }
    }
}

#[test]
fn same_seed_same_estimate() {
    let cfg = SimConfig::new(ErrorModel::student_t(5.0).unwrap(), XDist::Controlled, 2, 40, -1.0, 30, 123);
    let a = estimate_risk(&cfg).unwrap();
    let b = estimate_risk(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(simulate(&cfg, 7).unwrap(), simulate(&cfg, 7).unwrap());
    assert_ne!(simulate(&cfg, 7).unwrap(), simulate(&cfg, 8).unwrap());
}

#[test]
fn single_replication_has_no_standard_error() {
    let cfg = SimConfig::new(ErrorModel::normal(), XDist::NormalP, 1, 30, 0.5, 1, 1);
    let est = estimate_risk(&cfg).unwrap();
    assert_eq!(est.replications_used, 1);
    assert_eq!(est.std_error, None);
    assert!(est.mean > 0.0);
}

#[test]
fn controlled_regressors_are_signs() {
    let cfg = SimConfig::new(ErrorModel::normal(), XDist::Controlled, 3, 200, -1.0, 1, 2);
    let s = simulate(&cfg, 0).unwrap();
    assert!(s.x.data.iter().all(|v| *v == 1.0 || *v == -1.0));
    let plus = s.x.data.iter().filter(|v| **v > 0.0).count() as f64 / s.x.data.len() as f64;
    assert!((plus - 0.5).abs() < 0.1);
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = SimConfig::new(ErrorModel::normal(), XDist::NormalP, 4, 6, -1.0, 10, 0);
    assert!(matches!(estimate_risk(&cfg), Err(Error::InvalidConfig(_))));
    cfg.n = 50;
    cfg.sigma = 0.0;
    assert!(matches!(estimate_risk(&cfg), Err(Error::InvalidConfig(_))));
    let cfg = SimConfig::new(ErrorModel::normal(), XDist::ParetoIid { b: 1.5 }, 1, 50, -1.0, 10, 0);
    assert!(estimate_risk(&cfg).is_err());
}
