//! Uniform real-space grid over one unit cell, x_j = x0 + j a / N_x.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub a: f64,
    pub nx: usize,
    pub origin: f64,
}

impl CellGrid {
    pub fn new(a: f64, nx: usize, origin: f64) -> Self {
        CellGrid { a, nx, origin }
    }

    pub fn dx(&self) -> f64 {
        self.a / self.nx as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// Grid index of the point reflected through the origin, x0 - (x_j - x0).
    pub fn mirror(&self, j: usize) -> usize {
        (self.nx - j) % self.nx
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx()
    }

    pub fn integrate_c(&self, f: &[C64]) -> C64 {
        f.iter().sum::<C64>() * self.dx()
    }

    /// ∫ e^{iGx} f(x) dx over the cell, exact for band-limited f.
    pub fn fourier<T: Copy + Into<C64>>(&self, g: f64, f: &[T]) -> C64 {
        let dx = self.dx();
        f.iter()
            .enumerate()
            .map(|(j, &v)| C64::from_polar(1.0, g * self.x(j)) * v.into())
            .sum::<C64>()
            * dx
    }

    /// Angular wavenumbers of the DFT bins in FFT order; the Nyquist bin is zeroed.
    fn wavenumbers(&self) -> Vec<f64> {
        let n = self.nx as i64;
        (0..n)
            .map(|j| {
                let m = if j <= (n - 1) / 2 { j } else { j - n };
                if n % 2 == 0 && j == n / 2 {
                    0.0
                } else {
                    2.0 * PI * m as f64 / self.a
                }
            })
            .collect()
    }

    pub fn derivative_c(&self, f: &[C64]) -> Vec<C64> {
        let n = self.nx;
        let mut buf = f.to_vec();
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(n).process(&mut buf);
        for (z, k) in buf.iter_mut().zip(self.wavenumbers()) {
            *z *= C64::new(0.0, k) / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        buf
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let c: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.derivative_c(&c).into_iter().map(|z| z.re).collect()
    }
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn l2(f: &[f64]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// ‖a − b‖₂ / ‖b‖₂ (absolute when b vanishes).
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let n = l2(b);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}
