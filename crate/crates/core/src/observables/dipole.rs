use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::RealField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DipoleMoment {
    pub mu: i64,
    /// ∫ (x - x0) ϱ_μ over [x0, x0 + a).
    pub direct: f64,
    /// (1/μω)(∫𝔧_μ - a 𝔧_μ(x0 + a)).
    pub current_route: Option<f64>,
}

/// Cell moment of a band-limited field, exact through its Fourier series.
fn first_moment(field: &RealField) -> f64 {
    let grid = &field.grid;
    let (a, nx) = (grid.a, grid.nx as i64);
    let dx = grid.dx();
    let mut total = 0.0;
    for n in -(nx - 1) / 2..=(nx - 1) / 2 {
        let g = 2.0 * PI * n as f64 / a;
        let fnv: C64 = field
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| C64::from_polar(v, g * j as f64 * dx))
            .sum::<C64>()
            * dx;
        // ∫_0^a y e^{-iGy} dy
        let kernel = if n == 0 { C64::new(a * a / 2.0, 0.0) } else { C64::new(0.0, a / g) };
        total += (fnv * kernel).re / a;
    }
    total
}

pub fn dipole_moment(rho: &RealField, current: Option<&RealField>, omega: f64) -> Result<DipoleMoment> {
    if rho.order == 0 {
        return Err(Error::Domain("the zero-order dipole depends on the cell origin and is not defined".into()));
    }
    let direct = first_moment(rho);
    let current_route = current.map(|j| {
        let a = j.grid.a;
        (j.integral() - a * j.values[0]) / (rho.order as f64 * omega)
    });
    Ok(DipoleMoment { mu: rho.order, direct, current_route })
}
