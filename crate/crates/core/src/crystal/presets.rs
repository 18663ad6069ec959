//! Named reference crystals.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::CrystalModel;
use crate::registry::{Named, Registry};

pub trait CrystalPreset: Named + Send + Sync {
    fn build(&self) -> CrystalModel;
}

fn base(potential: Vec<C64>) -> CrystalModel {
    CrystalModel {
        lattice_constant: 8.0,
        potential,
        n_occupied: 1,
        spin_degeneracy: 2,
        n_planewaves: 25,
        scissors: 0.0,
        grid_points: 128,
        inversion_symmetric: None,
        origin: None,
    }
}

/// a = 8 bohr, V_{±1} = -0.15, V_{±2} = -0.05 hartree, one occupied band.
pub fn symmetric_reference() -> CrystalModel {
    base(vec![C64::new(0.0, 0.0), C64::new(-0.15, 0.0), C64::new(-0.05, 0.0)])
}

/// Same as the symmetric reference but with V_2 = -0.05i, which removes every inversion center.
pub fn asymmetric_reference() -> CrystalModel {
    base(vec![C64::new(0.0, 0.0), C64::new(-0.15, 0.0), C64::new(0.0, -0.05)])
}

pub fn free_electron() -> CrystalModel {
    base(vec![C64::new(0.0, 0.0)])
}

struct Symmetric;
struct Asymmetric;
struct Free;

impl Named for Symmetric {
    fn name(&self) -> &'static str {
        "symmetric-reference"
    }
    fn describe(&self) -> &'static str {
        "a = 8 bohr, V1 = -0.15, V2 = -0.05 hartree"
    }
}
impl CrystalPreset for Symmetric {
    fn build(&self) -> CrystalModel {
        symmetric_reference()
    }
}

impl Named for Asymmetric {
    fn name(&self) -> &'static str {
        "asymmetric-reference"
    }
    fn describe(&self) -> &'static str {
        "a = 8 bohr, V1 = -0.15, V2 = -0.05i hartree"
    }
}
impl CrystalPreset for Asymmetric {
    fn build(&self) -> CrystalModel {
        asymmetric_reference()
    }
}

impl Named for Free {
    fn name(&self) -> &'static str {
        "free-electron"
    }
    fn describe(&self) -> &'static str {
        "V = 0"
    }
}
impl CrystalPreset for Free {
    fn build(&self) -> CrystalModel {
        free_electron()
    }
}

pub fn registry() -> Registry<dyn CrystalPreset> {
    Registry::<dyn CrystalPreset>::new("crystal preset")
        .with(Arc::new(Symmetric))
        .with(Arc::new(Asymmetric))
        .with(Arc::new(Free))
}
