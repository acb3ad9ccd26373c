use std::f64::consts::LN_10;

use rustfft::FftPlanner;
use spitzer_core::early_exercise::{
    calibrate_barrier, eval_shifted, phi_body, price_perpetual, truncation_bound, Method, Monitoring, PerpetualNumerics,
    PerpetualPut, Prepared,
};
use spitzer_core::grid::{Grid, Spectral};
use spitzer_core::processes::{LevyModel, Process};
use spitzer_core::{Complex64, Error};

fn gaussian(r: f64) -> LevyModel {
    LevyModel::new(Process::gaussian_paper(), r).unwrap()
}

fn put(model: LevyModel, monitoring: Monitoring) -> PerpetualPut {
    PerpetualPut::new(model, 1.0, 1.0, monitoring).unwrap()
}

/// Perpetual American put under Black–Scholes: `D = Kβ/(1+β)`, `β = 2r/σ²`.
fn american_gaussian(r: f64, sigma: f64, k: f64, s0: f64) -> (f64, f64) {
    let beta = 2.0 * r / (sigma * sigma);
    let d = k * beta / (1.0 + beta);
    (if s0 <= d { k - s0 } else { (k - d) * (s0 / d).powf(-beta) }, d)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Perpetual American put under Kou's model. The infimum `I` of `X` at an
/// independent `Exp(r)` time has `−I` a two-term exponential mixture with the
/// negative roots of `κ(β) = r`; then `D = K E[e^I]` and
/// `V(S) = E[(K E[e^I] − S e^I)⁺] / E[e^I]`.
fn american_kou(model: &LevyModel, k: f64, s0: f64) -> (f64, f64) {
    let Process::Kou { sigma, lambda, p, eta1, eta2 } = model.process else { unreachable!() };
    let mu = model.drift();
    let kappa = |b: f64| 0.5 * sigma * sigma * b * b + mu * b + lambda * (p * eta1 / (eta1 - b) + (1.0 - p) * eta2 / (eta2 + b) - 1.0);
    let r = model.r;
    let b1 = bisect(|b| kappa(-b) - r, 1e-9, eta2 - 1e-9);
    let b2 = bisect(|b| kappa(-b) - r, eta2 + 1e-9, 1e4);
    let a1 = b2 / eta2 * (eta2 - b1) / (b2 - b1);
    let a2 = b1 / eta2 * (b2 - eta2) / (b2 - b1);
    let m = a1 * b1 / (b1 + 1.0) + a2 * b2 / (b2 + 1.0);
    let d = k * m;
    if s0 <= d {
        return (k - s0, d);
    }
    let ys = (s0 / d).ln();
    let v: f64 = [(a1, b1), (a2, b2)]
        .iter()
        .map(|&(a, b)| a * (k * m * (-b * ys).exp() - s0 * b / (b + 1.0) * (-(b + 1.0) * ys).exp()))
        .sum();
    (v / m, d)
}

/// Value iteration for the perpetual Bermudan put under Black–Scholes on a
/// uniform log-price mesh of spacing `h`, with the transition density
/// applied by FFT convolution. Returns `(V(0), barrier)`.
fn bermudan_dp(r: f64, sigma: f64, dt: f64, h: f64) -> (f64, f64) {
    let (lo, hi) = (-10.0, 10.0);
    let sd = sigma * dt.sqrt();
    let mu = (r - 0.5 * sigma * sigma) * dt;
    let half = (12.0 * sd / h).ceil() as i64;
    let inner = ((hi - lo) / h).round() as i64 + 1;
    let total = inner + 2 * half;
    let x = |i: i64| lo + (i - half) as f64 * h;
    let exercise = |x: f64| (1.0 - x.exp()).max(0.0);
    let size = ((total + 2 * half + 1) as usize).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    // kernel[m] for offsets m in [−half, half], stored wrapped
    let mut kernel = vec![Complex64::new(0.0, 0.0); size];
    let norm = (2.0 * std::f64::consts::PI).sqrt() * sd;
    for m in -half..=half {
        let y = m as f64 * h;
        let w = (-0.5 * ((y - mu) / sd).powi(2)).exp() / norm * h;
        kernel[m.rem_euclid(size as i64) as usize] = Complex64::new(w, 0.0);
    }
    fwd.process(&mut kernel);

    let disc = (-r * dt).exp();
    let mut v: Vec<f64> = (0..total).map(|i| exercise(x(i))).collect();
    for _ in 0..20_000 {
        // continuation(x_i) = Σ_m k_m V(x_{i+m}): correlate by convolving with the reversed kernel
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (i, vi) in v.iter().enumerate() {
            buf[(size - i) % size] = Complex64::new(*vi, 0.0);
        }
        fwd.process(&mut buf);
        buf.iter_mut().zip(&kernel).for_each(|(a, k)| *a *= k);
        inv.process(&mut buf);
        let mut change = 0.0f64;
        let mut next = v.clone();
        for i in half..half + inner {
            let cont = disc * buf[(size - i as usize) % size].re / size as f64;
            let nv = exercise(x(i)).max(cont);
            change = change.max((nv - v[i as usize]).abs());
            next[i as usize] = nv;
        }
        v = next;
        if change < 1e-14 {
            break;
        }
    }
    let zero = (-lo / h).round() as i64 + half;
    // barrier: last node where exercising is optimal
    let mut barrier = f64::NAN;
    for i in half..half + inner - 1 {
        let (a, b) = (v[i as usize] - exercise(x(i)), v[i as usize + 1] - exercise(x(i + 1)));
        if a <= 1e-15 && b > 1e-15 {
            barrier = x(i).exp();
            break;
        }
    }
    (v[zero as usize], barrier)
}

#[test]
fn american_gaussian_matches_closed_form() {
    for r in [0.1, 0.05, 0.02] {
        let c = put(gaussian(r), Monitoring::Continuous);
        let (want, d) = american_gaussian(r, 0.4, 1.0, 1.0);
        for method in [Method::Spitzer, Method::Green] {
            let got = price_perpetual(&c, &PerpetualNumerics::with_grid(1 << 16), method).unwrap();
            assert!((got.barrier - d).abs() < 1e-6, "r={r} {method:?}: {} vs {d}", got.barrier);
            assert!((got.price - want).abs() < 1e-6, "r={r} {method:?}: {} vs {want}", got.price);
            assert!(got.coarse_barrier.is_some());
        }
    }
}

#[test]
fn american_kou_matches_closed_form() {
    let model = LevyModel::new(Process::kou_paper(), 0.05).unwrap();
    let c = put(model, Monitoring::Continuous);
    let (want, d) = american_kou(&model, 1.0, 1.0);
    let got = price_perpetual(&c, &PerpetualNumerics::with_grid(1 << 16), Method::Spitzer).unwrap();
    assert!((got.barrier - d).abs() < 1e-5, "{} vs {d}", got.barrier);
    assert!((got.price - want).abs() < 1e-5, "{} vs {want}", got.price);
}

#[test]
fn bermudan_matches_value_iteration() {
    let (r, dt) = (0.05, 1.0);
    let (coarse, _) = bermudan_dp(r, 0.4, dt, 2e-3);
    let (fine, dp_barrier) = bermudan_dp(r, 0.4, dt, 1e-3);
    let dp = (4.0 * fine - coarse) / 3.0;
    let c = put(gaussian(r), Monitoring::Discrete(dt));
    for method in [Method::Spitzer, Method::Green] {
        let got = price_perpetual(&c, &PerpetualNumerics::with_grid(1 << 16), method).unwrap();
        assert!((got.price - dp).abs() < 1e-6, "{method:?}: {} vs {dp}", got.price);
        assert!((got.barrier - dp_barrier).abs() < 2e-3, "{method:?}: {} vs {dp_barrier}", got.barrier);
    }
}

#[test]
fn green_and_spitzer_agree() {
    for name in ["gaussian-paper", "vg-paper", "mjd-paper"] {
        let model = LevyModel::new(Process::preset(name).unwrap(), 0.05).unwrap();
        for dt in [1.0, 0.1] {
            let c = put(model, Monitoring::Discrete(dt));
            let n = PerpetualNumerics::with_grid(1 << 15);
            let s = price_perpetual(&c, &n, Method::Spitzer).unwrap();
            let g = price_perpetual(&c, &n, Method::Green).unwrap();
            assert!((s.barrier - g.barrier).abs() < 1e-6, "{name} dt={dt}: {} {}", s.barrier, g.barrier);
            assert!((s.price - g.price).abs() < 1e-6, "{name} dt={dt}: {} {}", s.price, g.price);
        }
    }
}

#[test]
fn more_frequent_exercise_is_worth_more() {
    let n = PerpetualNumerics::with_grid(1 << 15);
    let mut last = (0.0, 1.0);
    for dt in [1.0, 0.5, 0.25, 0.1] {
        let r = price_perpetual(&put(gaussian(0.05), Monitoring::Discrete(dt)), &n, Method::Spitzer).unwrap();
        assert!(r.price > last.0 && r.barrier < last.1, "dt={dt}");
        last = (r.price, r.barrier);
    }
    let am = price_perpetual(&put(gaussian(0.05), Monitoring::Continuous), &n, Method::Spitzer).unwrap();
    assert!(am.price > last.0 && am.barrier < last.1);
}

#[test]
fn price_is_flat_in_the_barrier_at_the_optimum() {
    let c = put(gaussian(0.05), Monitoring::Discrete(0.25));
    let n = PerpetualNumerics::with_grid(1 << 15);
    let t = truncation_bound(&c.model, n.lambda_bound).unwrap();
    let prep = Prepared::new(&c, &n, n.grid, t).unwrap();
    let d = prep.spitzer_barrier(1.0, 0.5, true).unwrap().barrier;
    let p = prep.spitzer_price(&c, d);
    for f in [0.99, 1.01] {
        let q = prep.spitzer_price(&c, d * f);
        assert!(q <= p + 1e-9, "f={f}");
        assert!(p - q < 5e-4, "f={f}: {}", p - q);
    }
}

#[test]
fn exercise_value_is_linear_in_the_probe() {
    let c = put(gaussian(0.05), Monitoring::Discrete(1.0));
    let n = PerpetualNumerics::with_grid(1 << 14);
    let t = truncation_bound(&c.model, n.lambda_bound).unwrap();
    let prep = Prepared::new(&c, &n, n.grid, t).unwrap();
    let a = prep.spitzer_barrier(1.0, 0.2, false).unwrap();
    let b = prep.spitzer_barrier(1.0, 0.7, false).unwrap();
    let (la, lb) = (a.line.unwrap(), b.line.unwrap());
    assert!((la.m - lb.m).abs() < 1e-12 && (la.c - lb.c).abs() < 1e-12);
    assert!((a.barrier - b.barrier).abs() < 1e-12);
    // the line meets K − D at the barrier
    assert!((la.c + la.m * a.barrier - (1.0 - a.barrier)).abs() < 1e-12);
}

#[test]
fn green_barrier_reads_the_minus_factor() {
    let c = put(gaussian(0.05), Monitoring::Discrete(1.0));
    let n = PerpetualNumerics::with_grid(1 << 14);
    let prep = Prepared::new(&c, &n, n.grid, 40.0).unwrap();
    let (f0, fi) = prep.minus_factor_values();
    assert!((prep.green_barrier(2.0) - 2.0 * f0 / fi).abs() < 1e-14);
    let cal = calibrate_barrier(&c, &n, Method::Green).unwrap();
    assert!(cal.line.is_none());
    assert!((cal.level - cal.barrier.ln()).abs() < 1e-15);
}

#[test]
fn spot_inside_the_exercise_region_pays_intrinsic() {
    let c = PerpetualPut::new(gaussian(0.05), 1.0, 0.3, Monitoring::Discrete(1.0)).unwrap();
    for method in [Method::Spitzer, Method::Green] {
        let r = price_perpetual(&c, &PerpetualNumerics::with_grid(1 << 13), method).unwrap();
        assert_eq!(r.price, 0.7);
    }
}

#[test]
fn truncation_bound_arithmetic() {
    let m = gaussian(0.05);
    let t_bound = 10.0 * LN_10 / 0.05;
    assert!((t_bound - 460.517).abs() < 1e-3);
    let b = truncation_bound(&m, 10.0).unwrap();
    assert!((b - 6.0 * 0.4 * t_bound.sqrt()).abs() < 1e-12);
    assert!((b - 51.503).abs() < 1e-3);
    // b ∝ √(λ/r)
    assert!((truncation_bound(&gaussian(0.2), 10.0).unwrap() - b / 2.0).abs() < 1e-12);
    assert!((truncation_bound(&m, 2.5).unwrap() - b / 2.0).abs() < 1e-12);
    assert!(matches!(truncation_bound(&m, 0.0), Err(Error::Parameter { .. })));
}

#[test]
fn phi_body_values() {
    let m = gaussian(0.05);
    let d = phi_body(&m, Monitoring::Discrete(0.5), 0.0, 0.0, 1.0).unwrap();
    assert!((d - (1.0 - (-0.025f64).exp())).norm() < 1e-16);
    let c = phi_body(&m, Monitoring::Continuous, 0.0, 0.0, 1.0).unwrap();
    assert!((c - 0.05).norm() < 1e-16);
    // a fully filtered frequency leaves 1 (discrete) or r (continuous)
    assert_eq!(phi_body(&m, Monitoring::Discrete(0.5), 3.0, 0.0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(phi_body(&m, Monitoring::Continuous, 3.0, 0.0, 0.0).unwrap(), Complex64::new(0.05, 0.0));
    // (1 − e^{−rΔt}Ψ)/Δt → r − ψ
    for xi in [0.0, 1.5, -4.0] {
        let dt = 1e-6;
        let d = phi_body(&m, Monitoring::Discrete(dt), xi, 0.0, 1.0).unwrap() / dt;
        let c = phi_body(&m, Monitoring::Continuous, xi, 0.0, 1.0).unwrap();
        assert!((d - c).norm() < 1e-4 * (1.0 + c.norm()), "xi={xi}");
    }
}

#[test]
fn eval_shifted_reads_exponential_moments() {
    let sp = Spectral::new(Grid::new(1 << 12, 12.0).unwrap()).unwrap();
    let g = *sp.grid();
    let ones = vec![Complex64::new(1.0, 0.0); g.len()];
    assert!((eval_shifted(&sp, &ones, 0.0) - 1.0).norm() < 1e-12);
    let a = g.x(g.zero() + 100);
    let delta: Vec<Complex64> = g.xis().iter().map(|&k| Complex64::new(0.0, k * a).exp()).collect();
    let v = eval_shifted(&sp, &delta, -1.0);
    assert!((v - (-a).exp()).norm() < 1e-11);
    let (mu, s) = (0.3, 0.5);
    let gauss: Vec<Complex64> = g.xis().iter().map(|&k| Complex64::new(-0.5 * s * s * k * k, mu * k).exp()).collect();
    assert!((eval_shifted(&sp, &gauss, -1.0) - (0.5 * s * s - mu).exp()).norm() < 1e-11);
}

#[test]
fn contract_validation() {
    assert!(matches!(PerpetualPut::new(gaussian(0.05), 0.0, 1.0, Monitoring::Continuous), Err(Error::Parameter { .. })));
    assert!(matches!(PerpetualPut::new(gaussian(0.05), 1.0, -1.0, Monitoring::Continuous), Err(Error::Parameter { .. })));
    assert!(matches!(PerpetualPut::new(gaussian(0.05), 1.0, 1.0, Monitoring::Discrete(0.0)), Err(Error::Parameter { .. })));
    for r in [0.0, -0.01] {
        let m = LevyModel::new(Process::gaussian_paper(), r).unwrap();
        assert!(matches!(PerpetualPut::new(m, 1.0, 1.0, Monitoring::Continuous), Err(Error::Parameter { .. })));
        assert!(truncation_bound(&m, 10.0).is_err());
    }
}
