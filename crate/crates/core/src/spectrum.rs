//! Bound-state spectrum of the Morse well.
//!
//! Dimensionless energies are `E_n = (l+1)^2 - (l+1-n)^2 = n (2(l+1) - n)`
//! for `n = 0..=l`, stored as exact integers. The dimensional energies are
//! `eps_n = hbar_omega / (2(l+1)) * E_n`, and at inverse temperature beta the
//! Boltzmann exponent is `A n - B n^2` with `A = beta hbar_omega` and
//! `B = A / (2(l+1))`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MorseSpace {
    l: usize,
    energies: Vec<u64>,
    preset: Option<PresetOrigin>,
}

/// Where a preset space came from and how far the rounding moved it.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetOrigin {
    pub name: String,
    /// Tabulated value of `2(l+1)`.
    pub tabulated: f64,
    /// `2(l+1) - tabulated` after rounding to integer `l`.
    pub residual: f64,
}

impl MorseSpace {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("make_space", "l must be a positive integer"));
        }
        let top = (l + 1) as u64;
        let energies = (0..=l as u64)
            .map(|n| top * top - (top - n) * (top - n))
            .collect();
        Ok(MorseSpace {
            l,
            energies,
            preset: None,
        })
    }

    /// Accepts a signed depth parameter, for front ends.
    pub fn from_signed(l: i64) -> Result<Self> {
        if l <= 0 {
            return Err(Error::domain(
                "make_space",
                format!("l must be a positive integer, got {l}"),
            ));
        }
        Self::new(l as usize)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.l + 1
    }

    pub fn energies(&self) -> &[u64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> Result<u64> {
        self.energies
            .get(n)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                op: "energy",
                index: n,
                max: self.l,
            })
    }

    pub(crate) fn energy_f64(&self, n: usize) -> f64 {
        self.energies[n] as f64
    }

    pub fn preset(&self) -> Option<&PresetOrigin> {
        self.preset.as_ref()
    }

    /// `hbar_omega n - hbar_omega / (2(l+1)) n^2`.
    pub fn dimensional_energy(&self, n: usize, hbar_omega: f64) -> Result<f64> {
        if n > self.l {
            return Err(Error::IndexOutOfRange {
                op: "dimensional_energy",
                index: n,
                max: self.l,
            });
        }
        if !(hbar_omega > 0.0) || !hbar_omega.is_finite() {
            return Err(Error::domain(
                "dimensional_energy",
                format!("hbar_omega must be positive, got {hbar_omega}"),
            ));
        }
        let nf = n as f64;
        Ok(hbar_omega * nf - hbar_omega / (2.0 * (self.l + 1) as f64) * nf * nf)
    }

    pub fn thermal_params(&self, beta_hbar_omega: f64) -> Result<ThermalParams> {
        ThermalParams::new(self.l, beta_hbar_omega)
    }
}

/// Dimensionless Boltzmann parameters `A = beta hbar_omega`, `B = A / (2(l+1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalParams {
    pub a: f64,
    pub b: f64,
    pub l: usize,
}

impl ThermalParams {
    pub fn new(l: usize, beta_hbar_omega: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("thermal_params", "l must be a positive integer"));
        }
        if !(beta_hbar_omega >= 0.0) || beta_hbar_omega.is_nan() {
            return Err(Error::domain(
                "thermal_params",
                format!("beta*hbar_omega must be >= 0, got {beta_hbar_omega}"),
            ));
        }
        Ok(ThermalParams {
            a: beta_hbar_omega,
            b: beta_hbar_omega / (2.0 * (l + 1) as f64),
            l,
        })
    }

    /// `A n - B n^2`, the reduced energy `beta eps_n`.
    pub fn exponent(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.a * nf - self.b * nf * nf
    }
}

pub fn make_space(l: usize) -> Result<MorseSpace> {
    MorseSpace::new(l)
}

pub fn dimensional_energy(space: &MorseSpace, n: usize, hbar_omega: f64) -> Result<f64> {
    space.dimensional_energy(n, hbar_omega)
}

pub fn thermal_params(space: &MorseSpace, beta_hbar_omega: f64) -> Result<ThermalParams> {
    space.thermal_params(beta_hbar_omega)
}

/// Table of molecules keyed by name, valued by the tabulated `2(l+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetTable {
    entries: BTreeMap<String, f64>,
}

impl Default for PresetTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PresetTable {
    pub fn builtin() -> Self {
        let entries = [("H2", 37.1586), ("I2", 348.78)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        PresetTable { entries }
    }

    pub fn empty() -> Self {
        PresetTable {
            entries: BTreeMap::new(),
        }
    }

    /// Parses `name value` lines; `#` starts a comment. Later entries
    /// override earlier ones (and built-ins, when merged).
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::empty();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(|c: char| c.is_whitespace() || c == '=');
            let parts: Vec<&str> = parts.by_ref().filter(|s| !s.is_empty()).collect();
            if parts.len() != 2 {
                return Err(Error::PresetParse {
                    line: idx + 1,
                    detail: format!("expected `name value`, got `{line}`"),
                });
            }
            let value: f64 = parts[1].parse().map_err(|_| Error::PresetParse {
                line: idx + 1,
                detail: format!("`{}` is not a number", parts[1]),
            })?;
            if !(value >= 4.0) || !value.is_finite() {
                return Err(Error::PresetParse {
                    line: idx + 1,
                    detail: format!("2(l+1) must be at least 4, got {value}"),
                });
            }
            table.entries.insert(parts[0].to_string(), value);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn merge(&mut self, other: PresetTable) {
        self.entries.extend(other.entries);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn resolve(&self, name: &str) -> Result<MorseSpace> {
        let tabulated = *self.entries.get(name).ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: self.names().collect::<Vec<_>>().join(", "),
        })?;
        let l_plus_one = (tabulated / 2.0).round().max(2.0) as usize;
        let mut space = MorseSpace::new(l_plus_one - 1)?;
        space.preset = Some(PresetOrigin {
            name: name.to_string(),
            tabulated,
            residual: 2.0 * l_plus_one as f64 - tabulated,
        });
        Ok(space)
    }
}

/// Space for a built-in molecule.
pub fn molecule_preset(name: &str) -> Result<MorseSpace> {
    PresetTable::builtin().resolve(name)
}

impl fmt::Display for MorseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MorseSpace(l = {})", self.l)?;
        if let Some(p) = &self.preset {
            write!(
                f,
                " from {} (2(l+1) = {}, residual {:+.4})",
                p.name, p.tabulated, p.residual
            )?;
        }
        Ok(())
    }
}
