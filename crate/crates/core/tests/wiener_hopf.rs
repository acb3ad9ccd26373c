use std::f64::consts::PI;

use proptest::prelude::*;
use spitzer_core::early_exercise::{phi_body, truncation_bound, Monitoring};
use spitzer_core::grid::{Grid, Spectral};
use spitzer_core::processes::{LevyModel, Process};
use spitzer_core::wiener_hopf::{continuous_log, HilbertKernel, WienerHopf};
use spitzer_core::{Complex64, Error};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sup(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sup_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `(Hf)_k = Σ_{j≠k} f_j (1 − cos((k−j)π)) / ((k−j)π)`, summed directly.
fn sinc_hilbert_direct(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len() as i64;
    let kern: Vec<f64> = (-(n - 1)..n)
        .map(|m| if m % 2 != 0 { 2.0 / (PI * m as f64) } else { 0.0 })
        .collect();
    (0..n)
        .map(|k| {
            let mut s = c(0.0);
            for j in 0..n {
                s += f[j as usize] * kern[(k - j + n - 1) as usize];
            }
            s
        })
        .collect()
}

/// Direct quadratures `Σ dx e^{iξx} f` and `(dξ/2π) Σ e^{−iξx} f̂` on the grid,
/// using the table of `e^{iπ(k−n/2)(j−n/2)·2/n}`.
struct DenseFourier {
    grid: Grid,
    roots: Vec<Complex64>,
}

impl DenseFourier {
    fn new(grid: Grid) -> Self {
        let n = grid.len();
        let roots = (0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)).collect();
        DenseFourier { grid, roots }
    }

    fn phase(&self, k: usize, j: usize, sign: i64) -> Complex64 {
        let n = self.grid.len() as i64;
        let h = n / 2;
        let m = (sign * (k as i64 - h) * (j as i64 - h)).rem_euclid(n);
        self.roots[m as usize]
    }

    fn forward(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        (0..n)
            .map(|k| (0..n).map(|j| f[j] * self.phase(k, j, 1)).sum::<Complex64>() * self.grid.dx())
            .collect()
    }

    fn inverse(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        (0..n)
            .map(|j| (0..n).map(|k| f[k] * self.phase(k, j, -1)).sum::<Complex64>() * self.grid.dxi() / (2.0 * PI))
            .collect()
    }
}

fn models() -> Vec<LevyModel> {
    [Process::gaussian_paper(), Process::vg_paper(), Process::mjd_paper(), Process::kou_paper()]
        .into_iter()
        .map(|p| LevyModel::new(p, 0.05).unwrap())
        .collect()
}

fn discrete_phi(model: &LevyModel, grid: &Grid, dt: f64) -> Vec<Complex64> {
    (0..grid.len()).map(|k| phi_body(model, Monitoring::Discrete(dt), grid.xi(k), 0.0, 1.0).unwrap()).collect()
}

#[test]
fn zero_has_zero_hilbert_transform() {
    let sp = Spectral::new(Grid::new(64, 3.0).unwrap()).unwrap();
    for kernel in [HilbertKernel::Periodic, HilbertKernel::Sinc] {
        let wh = WienerHopf::new(&sp, kernel).unwrap();
        assert!(wh.hilbert(&vec![c(0.0); 64]).iter().all(|v| v.norm() == 0.0));
    }
}

#[test]
fn sinc_hilbert_matches_direct_sum() {
    let sp = Spectral::new(Grid::new(1 << 11, 40.0).unwrap()).unwrap();
    let f: Vec<Complex64> = sp.grid().xis().iter().map(|&k| c(1.0 / (1.0 + k * k))).collect();
    let wh = WienerHopf::new(&sp, HilbertKernel::Sinc).unwrap();
    assert!(sup(&wh.hilbert(&f), &sinc_hilbert_direct(&f)) < 1e-10);
}

#[test]
fn periodic_hilbert_matches_dense_sign_multiplier() {
    let grid = Grid::new(1 << 10, 30.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    let dense = DenseFourier::new(grid);
    let f: Vec<Complex64> = grid.xis().iter().map(|&k| Complex64::new(1.0 / (1.0 + k * k), k / (4.0 + k * k))).collect();
    let mut g = dense.inverse(&f);
    for (j, v) in g.iter_mut().enumerate() {
        *v *= -Complex64::i() * grid.x(j).signum() * if grid.x(j) == 0.0 { 0.0 } else { 1.0 };
    }
    let want = dense.forward(&g);
    let wh = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap();
    assert!(sup(&wh.hilbert(&f), &want) < 1e-12);
}

#[test]
fn upper_analytic_function_is_an_eigenvector() {
    // Support on x > 0 means H f = −i f.
    let grid = Grid::new(1 << 12, 20.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    let f: Vec<Complex64> = grid
        .xs()
        .iter()
        .map(|&x| c((-(x - 4.0) * (x - 4.0) / 0.5).exp()))
        .collect();
    let fh = sp.forward_to_vec(&f);
    let want: Vec<Complex64> = fh.iter().map(|v| -Complex64::i() * v).collect();
    for kernel in [HilbertKernel::Periodic, HilbertKernel::Sinc] {
        let wh = WienerHopf::new(&sp, kernel).unwrap();
        assert!(sup(&wh.hilbert(&fh), &want) < 1e-8, "{kernel:?}");
    }
}

#[test]
fn decomposition_matches_dense_indicator() {
    let grid = Grid::new(1 << 10, 20.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    let dense = DenseFourier::new(grid);
    let model = LevyModel::new(Process::vg_paper(), 0.05).unwrap();
    let phi = discrete_phi(&model, &grid, 0.5);
    let f = continuous_log(&phi, grid.zero()).unwrap();
    let wh = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap();
    for l in [0.0, -1.3, 2.0 * grid.dx(), 0.77] {
        let d = wh.decompose(&f, l);
        let g = dense.inverse(&f);
        let masked: Vec<Complex64> = g
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let x = grid.x(j);
                let w = if (x - l).abs() < 1e-12 { 0.5 } else if x > l { 1.0 } else { 0.0 };
                v * w
            })
            .collect();
        let plus = dense.forward(&masked);
        let minus: Vec<Complex64> = f.iter().zip(&plus).map(|(a, b)| a - b).collect();
        assert!(sup(&d.plus, &plus) < 1e-8, "l = {l}");
        assert!(sup(&d.minus, &minus) < 1e-8, "l = {l}");
    }
}

#[test]
fn bump_above_level_is_all_plus() {
    let grid = Grid::new(1 << 12, 16.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    let l = -0.4;
    // Gaussian bump centred well above l; its tail below l is ~e^{-50}.
    let f: Vec<Complex64> = grid.xs().iter().map(|&x| c((-(x - l - 2.0).powi(2) / 0.08).exp())).collect();
    let fh = sp.forward_to_vec(&f);
    for kernel in [HilbertKernel::Periodic, HilbertKernel::Sinc] {
        let wh = WienerHopf::new(&sp, kernel).unwrap();
        let d = wh.decompose(&fh, l);
        assert!(sup(&d.plus, &fh) < 1e-8, "{kernel:?}");
        assert!(sup_norm(&d.minus) < 1e-8, "{kernel:?}");
    }
}

#[test]
fn shifting_the_function_shifts_the_split() {
    let grid = Grid::new(1 << 10, 10.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    // decays fast in x, so the periodic wrap of the shifted copy is invisible
    let f: Vec<Complex64> = grid.xis().iter().map(|&k| Complex64::new(1.0, 0.3 * k) * (-0.5 * k * k).exp()).collect();
    for (kernel, l) in [(HilbertKernel::Sinc, 0.731), (HilbertKernel::Periodic, 37.0 * grid.dx())] {
        let wh = WienerHopf::new(&sp, kernel).unwrap();
        let shift: Vec<Complex64> = grid.xis().iter().map(|&k| Complex64::from_polar(1.0, l * k)).collect();
        let shifted: Vec<Complex64> = f.iter().zip(&shift).map(|(a, s)| a * s).collect();
        let at_l = wh.decompose(&shifted, l);
        let at_0 = wh.decompose(&f, 0.0);
        let want: Vec<Complex64> = at_0.plus.iter().zip(&shift).map(|(a, s)| a * s).collect();
        assert!(sup(&at_l.plus, &want) < 1e-12, "{kernel:?}");
    }
}

#[test]
fn unit_function_factorises_to_ones() {
    let sp = Spectral::new(Grid::new(256, 4.0).unwrap()).unwrap();
    let wh = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap();
    let f = wh.factorize(&vec![c(1.0); 256]).unwrap();
    assert!(f.plus.iter().chain(&f.minus).all(|v| (v - 1.0).norm() < 1e-15));
}

#[test]
fn gaussian_factorisation_reconstructs() {
    let model = LevyModel::new(Process::Gaussian { sigma: 0.4 }, 0.05).unwrap();
    let grid = Grid::new(1 << 16, truncation_bound(&model, 10.0).unwrap()).unwrap();
    let sp = Spectral::new(grid).unwrap();
    let phi = discrete_phi(&model, &grid, 1.0);
    let f = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap().factorize(&phi).unwrap();
    let prod: Vec<Complex64> = f.plus.iter().zip(&f.minus).map(|(a, b)| a * b).collect();
    assert!(sup(&prod, &phi) < 1e-10);
}

#[test]
fn catalog_factorisations_reconstruct_with_split_support() {
    for model in models() {
        let b = truncation_bound(&model, 10.0).unwrap();
        let grid = Grid::new(1 << 14, b).unwrap();
        let sp = Spectral::new(grid).unwrap();
        for dt in [1.0, 0.1] {
            let phi = discrete_phi(&model, &grid, dt);
            for kernel in [HilbertKernel::Periodic, HilbertKernel::Sinc] {
                let wh = WienerHopf::new(&sp, kernel).unwrap();
                let f = wh.factorize(&phi).unwrap();
                let prod: Vec<Complex64> = f.plus.iter().zip(&f.minus).map(|(a, b)| a * b).collect();
                assert!(sup(&prod, &phi) / sup_norm(&phi) < 1e-8, "{:?} {kernel:?}", model.process);
            }
            let wh = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap();
            let f = wh.factorize(&phi).unwrap();
            let ell = sp.inverse_to_vec(&f.log_minus);
            let total: f64 = ell.iter().map(|v| v.norm()).sum();
            let above: f64 =
                ell.iter().enumerate().filter(|(j, _)| grid.x(*j) > 2.0 * grid.dx()).map(|(_, v)| v.norm()).sum();
            assert!(above / total < 1e-6);
            // The split is a projection. At a level between nodes the mask
            // is an exact indicator; on a node the shared half weight would
            // be halved again.
            let l = 0.5 * grid.dx();
            let once = wh.decompose(&f.log_plus, l).plus;
            let twice = wh.decompose(&once, l).plus;
            assert!(sup(&twice, &once) < 1e-8);
        }
    }
}

#[test]
fn function_analytic_above_has_trivial_minus_factor() {
    let grid = Grid::new(1 << 12, 12.0).unwrap();
    let sp = Spectral::new(grid).unwrap();
    // exp of the transform of a bump living on x > 0
    let g: Vec<Complex64> = grid.xs().iter().map(|&x| c(0.3 * (-(x - 2.0).powi(2) / 0.1).exp())).collect();
    let phi: Vec<Complex64> = sp.forward_to_vec(&g).iter().map(|v| v.exp()).collect();
    let f = WienerHopf::new(&sp, HilbertKernel::Periodic).unwrap().factorize(&phi).unwrap();
    assert!(f.minus.iter().all(|v| (v - 1.0).norm() < 1e-10));
}

#[test]
fn zero_on_the_grid_is_rejected() {
    let mut phi = vec![c(1.0); 64];
    phi[10] = c(0.0);
    assert!(matches!(continuous_log(&phi, 32), Err(Error::ZeroCrossing(_))));
}

#[test]
fn winding_is_rejected() {
    let grid = Grid::new(256, 3.0).unwrap();
    // (ξ − i)/(ξ + i) winds once around the origin along the real line
    let phi: Vec<Complex64> =
        grid.xis().iter().map(|&k| (Complex64::new(k, -1.0)) / Complex64::new(k, 1.0)).collect();
    assert!(matches!(continuous_log(&phi, grid.zero()), Err(Error::NonzeroIndex(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_adds_up(l in -3.0f64..3.0, a in 0.1f64..3.0, sinc in any::<bool>()) {
        let sp = Spectral::new(Grid::new(256, 8.0).unwrap()).unwrap();
        let f: Vec<Complex64> = sp.grid().xis().iter().map(|&k| Complex64::new(a, k) / (a * a + k * k)).collect();
        let kernel = if sinc { HilbertKernel::Sinc } else { HilbertKernel::Periodic };
        let d = WienerHopf::new(&sp, kernel).unwrap().decompose(&f, l);
        let sum: Vec<Complex64> = d.plus.iter().zip(&d.minus).map(|(p, m)| p + m).collect();
        prop_assert!(sup(&sum, &f) < 1e-14);
    }

    #[test]
    fn hilbert_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, sinc in any::<bool>()) {
        let sp = Spectral::new(Grid::new(128, 5.0).unwrap()).unwrap();
        let xi = sp.grid().xis();
        let f: Vec<Complex64> = xi.iter().map(|&k| c(1.0 / (1.0 + k * k))).collect();
        let g: Vec<Complex64> = xi.iter().map(|&k| c((-k * k).exp())).collect();
        let kernel = if sinc { HilbertKernel::Sinc } else { HilbertKernel::Periodic };
        let wh = WienerHopf::new(&sp, kernel).unwrap();
        let mix: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = wh.hilbert(&mix);
        let rhs: Vec<Complex64> = wh.hilbert(&f).iter().zip(&wh.hilbert(&g)).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(sup(&lhs, &rhs) < 1e-13);
    }
}
