use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use spitzer_core::early_exercise::{price_perpetual, Method, Monitoring, PerpetualNumerics, PerpetualPut};
use spitzer_core::exec::{Executor, Serial};
use spitzer_core::mc::{bermudan_horizon, bermudan_price, quantile_price, McConfig, QuantileEstimator, Stepper};
use spitzer_core::payoffs::{OptionKind, PayoffSpec};
use spitzer_core::processes::{LevyModel, Process};
use spitzer_core::quantile::QuantileContract;
use spitzer_core::Error;

mod common;
use common::dense_oracle;

/// Spreads indices over OS threads in contiguous chunks.
struct Threads(usize);

impl Executor for Threads {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let chunk = n.div_ceil(self.0).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| {
                    let f = &f;
                    s.spawn(move || (start..(start + chunk).min(n)).map(f).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        })
    }
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let s = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n / v.powf(1.5);
    (m, v, s)
}

fn increments(model: &LevyModel, dt: f64, n: usize, seed: u64) -> Vec<f64> {
    let st = Stepper::new(model, dt).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| st.sample(&mut rng)).collect()
}

#[test]
fn increments_are_martingale_increments() {
    for (i, name) in ["gaussian-paper", "vg-paper", "mjd-paper", "kou-paper"].iter().enumerate() {
        let model = LevyModel::new(Process::preset(name).unwrap(), 0.05).unwrap();
        for dt in [1.0, 0.1] {
            let xs = increments(&model, dt, 400_000, 7 + i as u64);
            let e: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let (m, v, _) = moments(&e);
            let se = (v / e.len() as f64).sqrt();
            assert!((m - (0.05 * dt).exp()).abs() < 3.5 * se, "{name} dt={dt}: {m} ± {se}");
            let (_, var, _) = moments(&xs);
            let want = model.process.variance_rate() * dt;
            assert!((var - want).abs() < 0.02 * want, "{name} dt={dt}: {var} vs {want}");
        }
    }
}

#[test]
fn vg_with_negative_theta_is_left_skewed() {
    let model = LevyModel::new(Process::vg_paper(), 0.05).unwrap();
    let (_, _, skew) = moments(&increments(&model, 1.0, 200_000, 3));
    assert!(skew < -0.1, "{skew}");
    let model = LevyModel::new(Process::gaussian_paper(), 0.05).unwrap();
    let (_, _, skew) = moments(&increments(&model, 1.0, 200_000, 3));
    assert!(skew.abs() < 0.02, "{skew}");
}

fn gaussian_quantile(sigma: f64, dates: usize, alpha: f64) -> QuantileContract {
    let model = LevyModel::new(Process::Gaussian { sigma }, 0.05).unwrap();
    let payoff = PayoffSpec::vanilla(OptionKind::Call, 1.0, 0.9, 0.0).unwrap();
    QuantileContract::new(model, payoff, 1.0, dates, alpha).unwrap()
}

#[test]
fn quantile_estimators_match_the_dense_oracle() {
    let c = gaussian_quantile(0.4, 4, 0.5);
    let oracle = (4.0 * dense_oracle(&c, 2e-3) - dense_oracle(&c, 4e-3)) / 3.0;
    for estimator in [QuantileEstimator::OrderStatistic, QuantileEstimator::DpwSplit] {
        let cfg = McConfig { paths: 200_000, estimator, ..McConfig::default() };
        let e = quantile_price(&Serial, &c, &cfg).unwrap();
        assert!((e.price - oracle).abs() < 1.5 * e.two_sd, "{estimator:?}: {} ± {} vs {oracle}", e.price, e.two_sd);
    }
}

#[test]
fn runs_are_reproducible_across_executors() {
    let c = gaussian_quantile(0.4, 12, 0.5);
    let cfg = McConfig { paths: 10_000, ..McConfig::default() };
    let a = quantile_price(&Serial, &c, &cfg).unwrap();
    let b = quantile_price(&Threads(3), &c, &cfg).unwrap();
    assert_eq!(a, b);
    let other = quantile_price(&Serial, &c, &McConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.price, other.price);

    let model = LevyModel::new(Process::mjd_paper(), 0.05).unwrap();
    let put = PerpetualPut::new(model, 1.0, 1.0, Monitoring::Discrete(1.0)).unwrap();
    let cfg = McConfig { paths: 5_000, ..McConfig::default() };
    assert_eq!(bermudan_price(&Serial, &put, &cfg).unwrap(), bermudan_price(&Threads(4), &put, &cfg).unwrap());
}

#[test]
fn deterministic_walk_has_a_known_quantile() {
    let c = gaussian_quantile(1e-9, 10, 0.3);
    let e = quantile_price(&Serial, &c, &McConfig { paths: 1000, ..McConfig::default() }).unwrap();
    let want = (-0.05f64).exp() * ((3.0 * 0.05 * 0.1f64).exp() - 0.9);
    assert!((e.price - want).abs() < 1e-8, "{} vs {want}", e.price);
    assert!(e.two_sd < 1e-8);
}

#[test]
fn bermudan_agrees_with_the_transform_price() {
    let model = LevyModel::new(Process::gaussian_paper(), 0.05).unwrap();
    let put = PerpetualPut::new(model, 1.0, 1.0, Monitoring::Discrete(1.0)).unwrap();
    let exact = price_perpetual(&put, &PerpetualNumerics::with_grid(1 << 15), Method::Spitzer).unwrap();
    let mc = bermudan_price(&Serial, &put, &McConfig { paths: 40_000, ..McConfig::default() }).unwrap();
    assert!((mc.estimate.price - exact.price).abs() < 1.5 * mc.estimate.two_sd, "{:?} vs {}", mc.estimate, exact.price);
    assert!((mc.barrier - exact.barrier).abs() < 0.02, "{} vs {}", mc.barrier, exact.barrier);
    assert_eq!(mc.horizon, 461);
    // the line meets K − D at the barrier
    assert!((mc.c + mc.m * mc.barrier - (1.0 - mc.barrier)).abs() < 1e-12);
}

#[test]
fn short_horizons_are_refused() {
    let model = LevyModel::new(Process::gaussian_paper(), 0.05).unwrap();
    let put = PerpetualPut::new(model, 1.0, 1.0, Monitoring::Discrete(1.0)).unwrap();
    let cfg = McConfig { paths: 20_000, horizon: Some(20), ..McConfig::default() };
    assert_eq!(bermudan_horizon(&put, 1.0, &cfg), 20);
    assert!(matches!(bermudan_price(&Serial, &put, &cfg), Err(Error::HorizonTooShort(_))));
}

#[test]
fn bad_configurations_are_rejected() {
    let model = LevyModel::new(Process::gaussian_paper(), 0.05).unwrap();
    let american = PerpetualPut::new(model, 1.0, 1.0, Monitoring::Continuous).unwrap();
    assert!(matches!(bermudan_price(&Serial, &american, &McConfig::default()), Err(Error::Parameter { .. })));
    let c = gaussian_quantile(0.4, 4, 0.5);
    assert!(matches!(quantile_price(&Serial, &c, &McConfig { paths: 1, ..McConfig::default() }), Err(Error::Parameter { .. })));
    assert!(Stepper::new(&model, 0.0).is_err());
}
