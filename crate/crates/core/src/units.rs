//! Fixed conversion constants and parsing of quantities with unit suffixes.
//!
//! Everything inside the crate is in atomic units (hartree, bohr, ħ/hartree).

use crate::error::{Error, Result};

pub const HARTREE_EV: f64 = 27.211386245988;
pub const AU_TIME_FS: f64 = 0.024188843265;
pub const BOHR_ANGSTROM: f64 = 0.529177210903;
/// Intensity (W/cm²) corresponding to a unit atomic field amplitude.
pub const INTENSITY_AU_W_CM2: f64 = 3.50944758e16;

pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs / AU_TIME_FS
}

pub fn intensity_to_field(w_cm2: f64) -> f64 {
    (w_cm2 / INTENSITY_AU_W_CM2).sqrt()
}

pub fn field_to_intensity(e0: f64) -> f64 {
    e0 * e0 * INTENSITY_AU_W_CM2
}

/// Physical dimension a quantity string is parsed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Time,
    Intensity,
    Field,
}

impl Dimension {
    fn label(self) -> &'static str {
        match self {
            Dimension::Energy => "energy",
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Intensity => "intensity",
            Dimension::Field => "field amplitude",
        }
    }
}

/// Time can additionally be given in optical periods (`"1.13 T"`); the caller
/// supplies the period when that is meaningful.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeContext {
    pub period: Option<f64>,
}

/// Parse `"<number> <unit>"` into atomic units.
///
/// A bare number is taken to be in atomic units already.
pub fn parse_quantity(text: &str, dim: Dimension, ctx: TimeContext) -> Result<f64> {
    let s = text.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-')
                && !((c == 'e' || c == 'E') && is_exponent(s, i))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Unit(format!("cannot read a number from '{text}'")))?;
    let unit = normalize_unit(unit.trim());
    let bad = || {
        Error::Unit(format!(
            "unit '{}' is not a {} unit (in '{text}')",
            unit,
            dim.label()
        ))
    };
    let v = match dim {
        Dimension::Energy => match unit.as_str() {
            "" | "ha" | "hartree" | "au" => value,
            "ev" => ev_to_hartree(value),
            "mev" => ev_to_hartree(value * 1e-3),
            "kev" => ev_to_hartree(value * 1e3),
            "ry" => 0.5 * value,
            _ => return Err(bad()),
        },
        Dimension::Length => match unit.as_str() {
            "" | "bohr" | "au" | "a0" => value,
            "a" | "angstrom" | "å" => value / BOHR_ANGSTROM,
            "nm" => 10.0 * value / BOHR_ANGSTROM,
            _ => return Err(bad()),
        },
        Dimension::Time => match unit.as_str() {
            "" | "au" => value,
            "fs" => fs_to_au(value),
            "as" => fs_to_au(value * 1e-3),
            "t" | "periods" | "cycles" => match ctx.period {
                Some(p) => value * p,
                None => {
                    return Err(Error::Unit(format!(
                        "'{text}' is given in optical periods but no drive period is known"
                    )))
                }
            },
            _ => return Err(bad()),
        },
        Dimension::Intensity => match unit.as_str() {
            "w/cm2" | "w/cm^2" | "w·cm-2" | "w·cm⁻²" | "wcm-2" | "w cm-2" | "w cm⁻²" => value,
            "tw/cm2" | "tw/cm^2" => value * 1e12,
            "" | "au" => value * INTENSITY_AU_W_CM2,
            _ => return Err(bad()),
        },
        Dimension::Field => match unit.as_str() {
            "" | "au" => value,
            "v/m" => value / 5.14220674763e11,
            "v/a" | "v/å" => value * 1e10 / 5.14220674763e11,
            _ => return Err(bad()),
        },
    };
    if !v.is_finite() {
        return Err(Error::Unit(format!("'{text}' is not finite")));
    }
    Ok(v)
}

fn is_exponent(s: &str, i: usize) -> bool {
    let bytes = s.as_bytes();
    let prev_digit = i > 0 && (bytes[i - 1].is_ascii_digit() || bytes[i - 1] == b'.');
    let next = s[i + 1..].chars().next();
    prev_digit && matches!(next, Some(c) if c.is_ascii_digit() || c == '-' || c == '+')
}

fn normalize_unit(u: &str) -> String {
    u.to_lowercase().replace("a.u.", "au").replace(' ', "")
        .replace("w·cm⁻²", "w/cm2")
        .replace("w·cm-2", "w/cm2")
        .replace("wcm-2", "w/cm2")
        .replace("wcm⁻²", "w/cm2")
        .replace("cm²", "cm2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_energy_in_ev() {
        let w = parse_quantity("1.55 eV", Dimension::Energy, TimeContext::default()).unwrap();
        assert!((w - 1.55 / 27.211386245988).abs() < 1e-12);
    }

    #[test]
    fn intensity_variants() {
        let ctx = TimeContext::default();
        for s in ["2e12 W/cm^2", "2e12 W/cm2", "2e12 W·cm⁻²", "2E12 w·cm-2"] {
            let i = parse_quantity(s, Dimension::Intensity, ctx).unwrap();
            assert_eq!(i, 2e12, "{s}");
        }
        let e0 = intensity_to_field(2e12);
        assert!((e0 - 0.0075491).abs() < 1e-6);
    }

    #[test]
    fn times_and_periods() {
        let t = parse_quantity("2 fs", Dimension::Time, TimeContext::default()).unwrap();
        assert!((t - 82.682).abs() < 1e-3);
        let p = parse_quantity("1.5 T", Dimension::Time, TimeContext { period: Some(100.0) }).unwrap();
        assert_eq!(p, 150.0);
        assert!(parse_quantity("1.5 T", Dimension::Time, TimeContext::default()).is_err());
    }

    #[test]
    fn rejects_wrong_dimension() {
        assert!(parse_quantity("3 fs", Dimension::Energy, TimeContext::default()).is_err());
        assert!(parse_quantity("abc", Dimension::Energy, TimeContext::default()).is_err());
        assert_eq!(parse_quantity("-0.15", Dimension::Energy, TimeContext::default()).unwrap(), -0.15);
        assert_eq!(parse_quantity("8 bohr", Dimension::Length, TimeContext::default()).unwrap(), 8.0);
    }
}
