//! Optical material models: constant-index dielectrics and tabulated
//! dispersion data.
//!
//! Tabulated data is linearly interpolated on (n, k) separately, never
//! extrapolated. Sign convention: absorbing media have k >= 0 and
//! Im(eps) >= 0.

use num_complex::Complex64;
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("line {line}: expected 3 numeric fields `wavelength_nm,n,k`, got `{content}`")]
    Parse { line: usize, content: String },
    #[error("line {line}: wavelengths must be strictly increasing ({previous} nm then {current} nm)")]
    Ordering {
        line: usize,
        previous: f64,
        current: f64,
    },
    #[error("dispersion table `{name}` has {rows} data rows, need at least 2")]
    InsufficientData { name: String, rows: usize },
    #[error("line {line}: wavelength must be > 0 and n, k >= 0 and finite")]
    InvalidValue { line: usize },
    #[error("wavelength {wavelength_nm} nm is outside `{name}` data range [{min}, {max}] nm")]
    OutOfRange {
        wavelength_nm: f64,
        name: String,
        min: f64,
        max: f64,
    },
    #[error("failed to read dispersion data: {0}")]
    Io(#[from] std::io::Error),
}

/// Tabulated (wavelength, n, k) dispersion data, strictly increasing in
/// wavelength, at least two entries.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    entries: Vec<(f64, f64, f64)>,
    source_name: String,
}

impl DispersionTable {
    /// Parse `wavelength_nm,n,k` rows. `#`-prefixed lines and blank lines are
    /// skipped; a leading non-numeric row is treated as a column header.
    pub fn from_csv<R: BufRead>(reader: R, source_name: &str) -> Result<Self, MaterialError> {
        let mut entries: Vec<(f64, f64, f64)> = Vec::new();
        let mut saw_data = false;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if !saw_data && fields[0].parse::<f64>().is_err() {
                // header row
                saw_data = true;
                continue;
            }
            saw_data = true;
            if fields.len() != 3 {
                return Err(MaterialError::Parse {
                    line: lineno,
                    content: trimmed.to_string(),
                });
            }
            let mut vals = [0.0f64; 3];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse::<f64>().map_err(|_| MaterialError::Parse {
                    line: lineno,
                    content: trimmed.to_string(),
                })?;
            }
            let (wl, n, k) = (vals[0], vals[1], vals[2]);
            if !(wl > 0.0) || !(n >= 0.0) || !(k >= 0.0) || !wl.is_finite() {
                return Err(MaterialError::InvalidValue { line: lineno });
            }
            if let Some(&(prev, _, _)) = entries.last() {
                if wl <= prev {
                    return Err(MaterialError::Ordering {
                        line: lineno,
                        previous: prev,
                        current: wl,
                    });
                }
            }
            entries.push((wl, n, k));
        }
        if entries.len() < 2 {
            return Err(MaterialError::InsufficientData {
                name: source_name.to_string(),
                rows: entries.len(),
            });
        }
        Ok(Self {
            entries,
            source_name: source_name.to_string(),
        })
    }

    pub fn from_str(data: &str, source_name: &str) -> Result<Self, MaterialError> {
        Self::from_csv(data.as_bytes(), source_name)
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn entries(&self) -> &[(f64, f64, f64)] {
        &self.entries
    }

    /// Covered wavelength interval (nm).
    pub fn range(&self) -> (f64, f64) {
        (self.entries[0].0, self.entries[self.entries.len() - 1].0)
    }

    /// n + i k at `wavelength_nm`, linearly interpolated component-wise.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        let (min, max) = self.range();
        if !(wavelength_nm >= min && wavelength_nm <= max) {
            return Err(MaterialError::OutOfRange {
                wavelength_nm,
                name: self.source_name.clone(),
                min,
                max,
            });
        }
        let pos = self
            .entries
            .partition_point(|&(wl, _, _)| wl <= wavelength_nm);
        if pos == 0 {
            let (_, n, k) = self.entries[0];
            return Ok(Complex64::new(n, k));
        }
        let (w0, n0, k0) = self.entries[pos - 1];
        if pos == self.entries.len() {
            return Ok(Complex64::new(n0, k0)); // exactly at the last node
        }
        let (w1, n1, k1) = self.entries[pos];
        let t = (wavelength_nm - w0) / (w1 - w0);
        Ok(Complex64::new(n0 + t * (n1 - n0), k0 + t * (k1 - k0)))
    }
}

/// A material is either a constant complex index or a dispersion table.
#[derive(Debug, Clone)]
pub enum MaterialModel {
    Constant { index: Complex64, name: String },
    Tabulated(DispersionTable),
}

impl MaterialModel {
    pub fn constant(name: &str, index: Complex64) -> Self {
        Self::Constant {
            index,
            name: name.to_string(),
        }
    }

    /// GaAs around the telecom window, n = 3.45.
    pub fn gaas() -> Self {
        Self::constant("GaAs", Complex64::new(3.45, 0.0))
    }

    /// Si3N4 adlayer, n = 1.95.
    pub fn si3n4() -> Self {
        Self::constant("Si3N4", Complex64::new(1.95, 0.0))
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Constant { name, .. } => name,
            Self::Tabulated(t) => t.source_name(),
        }
    }

    /// Complex refractive index n + i k at `wavelength_nm`.
    pub fn refractive_index(&self, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        match self {
            Self::Constant { index, .. } => Ok(*index),
            Self::Tabulated(table) => table.index_at(wavelength_nm),
        }
    }

    /// Complex relative permittivity (n + i k)^2.
    pub fn permittivity(&self, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        let n = self.refractive_index(wavelength_nm)?;
        Ok(n * n)
    }
}
