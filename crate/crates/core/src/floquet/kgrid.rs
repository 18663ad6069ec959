use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shifted Monkhorst-Pack mesh k_j = (2π/a)(j + ½)/N - π/a.
///
/// With N even the mesh is closed under k -> -k and avoids Γ and the zone boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KGrid {
    pub fn monkhorst_pack(a: f64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Config(format!("k-point count must be even and >= 2, got {n}")));
        }
        let points = (0..n).map(|j| 2.0 * PI / a * (j as f64 + 0.5) / n as f64 - PI / a).collect();
        Ok(KGrid { points, weights: vec![1.0 / n as f64; n] })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the point at -k.
    pub fn partner(&self, j: usize) -> usize {
        self.points.len() - 1 - j
    }

    /// Indices with k > 0.
    pub fn positive_half(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&j| self.points[j] > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_mesh() {
        let g = KGrid::monkhorst_pack(8.0, 8).unwrap();
        for j in 0..8 {
            assert!((g.points[j] + g.points[g.partner(j)]).abs() < 1e-15);
            assert!(g.points[j].abs() > 0.0 && g.points[j].abs() < PI / 8.0);
        }
        assert_eq!(g.positive_half().count(), 4);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(KGrid::monkhorst_pack(8.0, 7).is_err());
    }
}
