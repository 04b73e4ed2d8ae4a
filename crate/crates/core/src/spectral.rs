//! Two-dimensional FFTs on a periodic [`Grid`](crate::grid::Grid).
//!
//! Spectra use the same `j * n + i` layout as physical fields, with `i`
//! indexing `k_x` and `j` indexing `k_y` in standard FFT order. Real fields are
//! transformed two at a time by packing them into the real and imaginary
//! parts of one complex array.
//!
//! Every transform is sequential; row transforms and reductions run in
//! storage order, so results are bit-reproducible.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub type Spectrum = Vec<Complex64>;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// Wavenumbers per index (FFT order).
    k: Vec<f64>,
    /// Wavenumbers for odd derivatives; the Nyquist entry is zeroed so that
    /// derivatives of real fields stay real.
    k_odd: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let (forward, inverse) = plans(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let dk = PI / grid.half_width();
        let k: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                m * dk
            })
            .collect();
        let mut k_odd = k.clone();
        k_odd[n / 2] = 0.0;
        Self {
            grid,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            k,
            k_odd,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn k_odd(&self) -> &[f64] {
        &self.k_odd
    }

    /// `|k|²` at spectral index `idx`.
    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        let n = self.n();
        let kx = self.k[idx % n];
        let ky = self.k[idx / n];
        kx * kx + ky * ky
    }

    /// Odd-derivative wavevector `(k_x, k_y)` at `idx`.
    #[inline]
    pub fn k_vec(&self, idx: usize) -> [f64; 2] {
        let n = self.n();
        [self.k_odd[idx % n], self.k_odd[idx / n]]
    }

    /// 2/3-rule mask: keeps modes with `|m_x|, |m_y| <= n/3`.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let n = self.n();
        let cut = n / 3;
        let keep = |i: usize| {
            let m = if i < n / 2 { i } else { n - i };
            m <= cut
        };
        (0..n * n).map(|idx| keep(idx % n) && keep(idx / n)).collect()
    }

    /// In-place square transpose, blocked for cache locality.
    fn transpose(buf: &mut [Complex64], n: usize) {
        const B: usize = 32;
        for jb in (0..n).step_by(B) {
            for ib in (jb..n).step_by(B) {
                for j in jb..(jb + B).min(n) {
                    let start = if ib == jb { j + 1 } else { ib };
                    for i in start..(ib + B).min(n) {
                        buf.swap(j * n + i, i * n + j);
                    }
                }
            }
        }
    }

    fn fft2(&mut self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n();
        let plan = if inverse { &self.inverse } else { &self.forward };
        plan.process_with_scratch(buf, &mut self.scratch);
        Self::transpose(buf, n);
        plan.process_with_scratch(buf, &mut self.scratch);
        Self::transpose(buf, n);
    }

    /// Unnormalised forward transform in place.
    pub fn forward_in_place(&mut self, buf: &mut [Complex64]) {
        self.fft2(buf, false);
    }

    /// Normalised inverse transform in place.
    pub fn inverse_in_place(&mut self, buf: &mut [Complex64]) {
        self.fft2(buf, true);
        let norm = 1.0 / (self.grid.len() as f64);
        buf.iter_mut().for_each(|c| *c *= norm);
    }

    pub fn forward_real(&mut self, a: &[f64]) -> Spectrum {
        let mut buf: Spectrum = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Transforms two real fields with one complex FFT.
    pub fn forward_pair(&mut self, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
        let mut buf: Spectrum = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.forward_in_place(&mut buf);
        let n = self.n();
        let mut fa = vec![Complex64::new(0.0, 0.0); buf.len()];
        let mut fb = fa.clone();
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let im = (n - i) % n;
                let z = buf[j * n + i];
                let zc = buf[jm * n + im].conj();
                fa[j * n + i] = (z + zc) * 0.5;
                // (z - zc) / 2i
                let d = (z - zc) * 0.5;
                fb[j * n + i] = Complex64::new(d.im, -d.re);
            }
        }
        (fa, fb)
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&mut self, a: &[Complex64]) -> Vec<f64> {
        let mut buf = a.to_vec();
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Inverse of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair(&mut self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Spectrum = a
            .iter()
            .zip(b)
            .map(|(x, y)| x + Complex64::new(-y.im, y.re))
            .collect();
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// `Σ |f|² h²` from the spectrum of a real field (Parseval).
    pub fn l2_squared(&self, a: &[Complex64]) -> f64 {
        let nn = self.grid.len() as f64;
        a.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_area() / nn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(32, 3.0).unwrap()
    }

    fn field(g: &Grid, phase: f64) -> Vec<f64> {
        g.points()
            .map(|(_, x)| (-(x[0] - phase).powi(2) - x[1] * x[1]).exp() + 0.1 * (x[1] + phase).sin())
            .collect()
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = grid();
        let mut sp = Spectral::new(g);
        let a = field(&g, 0.3);
        let b = field(&g, -1.1);
        let (fa, fb) = sp.forward_pair(&a, &b);
        let fa1 = sp.forward_real(&a);
        let fb1 = sp.forward_real(&b);
        for k in 0..g.len() {
            assert!((fa[k] - fa1[k]).norm() < 1e-12);
            assert!((fb[k] - fb1[k]).norm() < 1e-12);
        }
        let (ra, rb) = sp.inverse_pair(&fa, &fb);
        for k in 0..g.len() {
            assert!((ra[k] - a[k]).abs() < 1e-14);
            assert!((rb[k] - b[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn parseval() {
        let g = grid();
        let mut sp = Spectral::new(g);
        let a = field(&g, 0.7);
        let phys: f64 = a.iter().map(|v| v * v).sum::<f64>() * g.cell_area();
        let fa = sp.forward_real(&a);
        let spec = sp.l2_squared(&fa);
        assert!(((phys - spec) / phys).abs() < 1e-12);
    }

    #[test]
    fn dealias_mask_keeps_two_thirds() {
        let sp = Spectral::new(Grid::new(64, 1.0).unwrap());
        let mask = sp.dealias_mask();
        let kept = mask.iter().filter(|&&m| m).count();
        // |m| <= 21 on each axis: 43 modes per axis.
        assert_eq!(kept, 43 * 43);
    }
}
