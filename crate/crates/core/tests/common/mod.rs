//! Dense oracles shared by the integration tests.

use spitzer_core::quantile::QuantileContract;

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Law of `max(X_0..X_n)` for a Gaussian walk, by the Lindley recursion
/// `W ← max(0, W + Y)` on the nodes `ih`, `i ≥ 0`. Entry 0 carries the atom
/// at zero; the rest are trapezoid weights of the density.
fn lindley_max(mu: f64, sd: f64, steps: usize, h: f64, len: usize) -> Vec<f64> {
    let pdf = |x: f64| (-0.5 * ((x - mu) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut atom = 1.0;
    let mut dens = vec![0.0; len];
    for _ in 0..steps {
        let trap = |i: usize| if i == 0 { 0.5 * h } else { h };
        let mut next = vec![0.0; len];
        for (i, nx) in next.iter_mut().enumerate() {
            let x = i as f64 * h;
            let mut v = atom * pdf(x);
            for (k, d) in dens.iter().enumerate() {
                v += trap(k) * d * pdf(x - k as f64 * h);
            }
            *nx = v;
        }
        let mut a = atom * norm_cdf(-mu / sd);
        for (k, d) in dens.iter().enumerate() {
            a += trap(k) * d * norm_cdf((-(k as f64) * h - mu) / sd);
        }
        atom = a;
        dens = next;
    }
    let mut w: Vec<f64> = dens.iter().enumerate().map(|(i, d)| d * if i == 0 { 0.5 * h } else { h }).collect();
    w[0] += atom;
    w
}

/// `E[f(M − M')]` with `M` the max over `j` steps and `M'` the max over
/// `N − j` steps of the reflected walk, so `−M'` is the running minimum.
pub fn dense_oracle(contract: &QuantileContract, h: f64) -> f64 {
    let dt = contract.dt();
    let sd = contract.model.volatility() * dt.sqrt();
    let mu = contract.model.drift() * dt;
    let len = (14.0 * sd * (contract.dates as f64).sqrt() / h) as usize;
    let j = contract.index();
    let up = lindley_max(mu, sd, j, h, len);
    let down = lindley_max(-mu, sd, contract.dates - j, h, len);
    let mut v = 0.0;
    for (a, wa) in up.iter().enumerate() {
        for (b, wb) in down.iter().enumerate() {
            v += wa * wb * contract.payoff.value((a as f64 - b as f64) * h);
        }
    }
    (-contract.model.r * contract.maturity).exp() * v
}
