//! Modal reflection at the cylinder's end facets, out-coupling into a
//! collection cone and plasmon loss.
//!
//! The top (air) reflection is the effective-index Fresnel coefficient; the
//! bottom mirror is a thin-film stack (core / shell(e) / metal) evaluated at
//! the mode's conical incidence, s-polarized for the TE families and
//! p-polarized for TM01. Both are approximations to the full-wave modal
//! reflectances and can be overridden row-by-row from an externally computed
//! coefficient table.
//!
//! Out-coupling T(theta) comes from a scalar Fraunhofer diffraction of the
//! transmitted mode profile with obliquity factor (1 + cos theta)/2; the
//! vector aperture field is split into its e^{i(m-1)phi} and e^{i(m+1)phi}
//! Cartesian sidebands, each Hankel-transformed at its own order. The
//! pattern is normalized so the hemisphere total equals 1 - |r_t|^2 - L_p,
//! which makes the energy bookkeeping exact by construction.

use crate::materials::MaterialError;
use crate::modesolver::{GuidedMode, ModeFamily, RadialStack, SolveError};
use crate::special::bessel_j;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::BufRead;
use thiserror::Error;

type C = Complex64;

/// Polar samples of T(theta) and the far-field pattern on [0, pi/2].
pub const THETA_SAMPLES: usize = 181;

#[derive(Debug, Error)]
pub enum InterfaceError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("theta = {0} rad outside [0, pi/2]")]
    ThetaOutOfRange(f64),
    #[error("coefficient table line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("coefficient table line {line}: |r| = {magnitude} exceeds 1")]
    TableReflectanceBound { line: usize, magnitude: f64 },
    #[error("coefficient table: duplicate key ({family}, a = {a_nm} nm, lambda = {lambda_nm} nm)")]
    TableDuplicateKey {
        family: ModeFamily,
        a_nm: f64,
        lambda_nm: f64,
    },
    #[error("energy bookkeeping violated: |r_t|^2 + T(pi/2) + L_p = {total}, expected 1")]
    EnergyBookkeeping { total: f64 },
    #[error("failed to read coefficient table: {0}")]
    Io(#[from] std::io::Error),
}

/// Where a set of interface coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    Analytic,
    Table,
}

/// Far-field intensity per solid angle vs polar angle, normalized so the
/// hemisphere integral equals the out-coupled fraction `total`.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub theta: Vec<f64>,
    pub intensity: Vec<f64>,
    pub total: f64,
}

impl FarFieldPattern {
    /// Cumulative fraction radiated into the cone of half-angle `theta`.
    pub fn outcoupling(&self, theta: f64) -> Result<f64, InterfaceError> {
        if !(0.0..=PI / 2.0 + 1e-12).contains(&theta) {
            return Err(InterfaceError::ThetaOutOfRange(theta));
        }
        let mut acc = 0.0;
        for i in 1..self.theta.len() {
            let (t0, t1) = (self.theta[i - 1], self.theta[i]);
            let (f0, f1) = (
                self.intensity[i - 1] * t0.sin(),
                self.intensity[i] * t1.sin(),
            );
            if theta >= t1 {
                acc += PI * (f0 + f1) * (t1 - t0);
            } else if theta > t0 {
                let t = (theta - t0) / (t1 - t0);
                let fm = f0 + (f1 - f0) * t;
                acc += PI * (f0 + fm) * (theta - t0);
                break;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    /// Normalized L2 inner product of two patterns; 1 for identical shapes.
    pub fn overlap(&self, other: &FarFieldPattern) -> f64 {
        let dot = |a: &FarFieldPattern, b: &FarFieldPattern| -> f64 {
            let mut acc = 0.0;
            for i in 1..a.theta.len() {
                let w0 = a.theta[i - 1].sin();
                let w1 = a.theta[i].sin();
                let f0 = a.intensity[i - 1] * b.intensity[i - 1] * w0;
                let f1 = a.intensity[i] * b.intensity[i] * w1;
                acc += 0.5 * (f0 + f1) * (a.theta[i] - a.theta[i - 1]);
            }
            acc
        };
        dot(self, other) / (dot(self, self) * dot(other, other)).sqrt()
    }
}

/// Modal reflection and out-coupling data for one mode at one geometry and
/// wavelength. `t_cum` is sampled on the same grid as the far-field pattern
/// and satisfies t_cum(pi/2) + |r_t|^2 + plasmon_loss = 1 exactly.
#[derive(Debug, Clone)]
pub struct InterfaceCoefficients {
    pub r_t: C,
    pub r_b: C,
    pub theta: Vec<f64>,
    pub t_cum: Vec<f64>,
    pub plasmon_loss: f64,
    pub provenance: Provenance,
    pub pattern: FarFieldPattern,
}

impl InterfaceCoefficients {
    pub fn t_at(&self, theta: f64) -> Result<f64, InterfaceError> {
        if !(0.0..=PI / 2.0 + 1e-12).contains(&theta) {
            return Err(InterfaceError::ThetaOutOfRange(theta));
        }
        let n = self.theta.len();
        let step = self.theta[1] - self.theta[0];
        let idx = ((theta / step).floor() as usize).min(n - 2);
        let t = (theta - self.theta[idx]) / step;
        Ok(self.t_cum[idx] * (1.0 - t) + self.t_cum[idx + 1] * t)
    }

    pub fn t_total(&self) -> f64 {
        *self.t_cum.last().unwrap()
    }

    fn validate(&self) -> Result<(), InterfaceError> {
        let total = self.r_t.norm_sqr() + self.t_total() + self.plasmon_loss;
        if (total - 1.0).abs() > 1e-6 {
            return Err(InterfaceError::EnergyBookkeeping { total });
        }
        Ok(())
    }
}

/// Effective-index Fresnel reflection of the top facet: (n_eff-1)/(n_eff+1).
pub fn top_reflection(mode: &GuidedMode) -> C {
    (mode.n_eff - 1.0) / (mode.n_eff + 1.0)
}

/// Thin-film reflection of the bottom mirror seen by the mode: a plane wave
/// in the core with in-plane wavevector k0 sqrt(eps1 - n_eff^2) hitting the
/// core / shell(e) / metal stack, s-polarization for TE families, p for TM01.
pub fn bottom_reflection(
    mode: &GuidedMode,
    stack: &RadialStack,
    wavelength: f64,
) -> Result<C, InterfaceError> {
    let eps1 = stack.core.permittivity(wavelength)?;
    let eps2 = stack.shell.permittivity(wavelength)?;
    let eps3 = stack.cladding.permittivity(wavelength)?;
    let n2 = mode.n_eff * mode.n_eff;
    // kz_i = k0 sqrt(eps_i - eps1 + n_eff^2); in the core this is k0 n_eff
    let kz = |eps: C| -> C {
        let root = (eps - eps1 + n2).sqrt();
        if root.im < 0.0 {
            -root
        } else {
            root
        }
    };
    let (kz1, kz2, kz3) = (kz(eps1), kz(eps2), kz(eps3));
    let p_pol = mode.family == ModeFamily::TM01;
    let r_ij = |kzi: C, kzj: C, epsi: C, epsj: C| -> C {
        if p_pol {
            (epsj * kzi - epsi * kzj) / (epsj * kzi + epsi * kzj)
        } else {
            (kzi - kzj) / (kzi + kzj)
        }
    };
    let e = stack.shell_thickness;
    if e == 0.0 {
        return Ok(r_ij(kz1, kz3, eps1, eps3));
    }
    let k0 = 2.0 * PI / wavelength;
    let r12 = r_ij(kz1, kz2, eps1, eps2);
    let r23 = r_ij(kz2, kz3, eps2, eps3);
    let u2 = (C::new(0.0, 1.0) * k0 * kz2 * e).exp().powi(2);
    Ok((r12 + r23 * u2) / (C::new(1.0, 0.0) + r12 * r23 * u2))
}

/// Empirical plasmon/absorption loss of the top rim, anchored to
/// L_p(100 nm) = 0.10 and L_p(200 nm) = 0.05 at 950 nm and scaled across
/// wavelength by Im(eps_metal); clamped to [0, 0.2].
pub fn plasmon_loss(
    core_radius: f64,
    wavelength: f64,
    stack: &RadialStack,
) -> Result<f64, InterfaceError> {
    let im_ref = stack.cladding.permittivity(950.0)?.im;
    let scale = if im_ref > 1e-12 {
        stack.cladding.permittivity(wavelength)?.im / im_ref
    } else {
        0.0 // lossless cladding launches no plasmons
    };
    let base = 0.1f64.min(0.1 * 100.0 / core_radius);
    Ok((base * scale).clamp(0.0, 0.2))
}

/// Scalar-diffraction far-field of the transmitted mode at the top facet.
/// Returned unnormalized (normalization happens against the energy budget).
fn raw_pattern(mode: &GuidedMode, wavelength: f64) -> (Vec<f64>, Vec<f64>) {
    let k0 = 2.0 * PI / wavelength;
    let m = mode.family.azimuthal_order() as i32;
    let theta: Vec<f64> = (0..THETA_SAMPLES)
        .map(|i| PI / 2.0 * i as f64 / (THETA_SAMPLES - 1) as f64)
        .collect();
    let mut intensity = Vec::with_capacity(THETA_SAMPLES);
    // Cartesian sidebands of the vector aperture field
    let g_minus: Vec<C> = mode
        .e_r
        .iter()
        .zip(&mode.e_phi)
        .map(|(er, ephi)| 0.5 * (er + C::new(0.0, 1.0) * ephi))
        .collect();
    let g_plus: Vec<C> = mode
        .e_r
        .iter()
        .zip(&mode.e_phi)
        .map(|(er, ephi)| 0.5 * (er - C::new(0.0, 1.0) * ephi))
        .collect();
    let hankel = |g: &[C], order: u32, kt: f64| -> C {
        let mut acc = C::new(0.0, 0.0);
        for i in 1..mode.grid.len() {
            let (r0, r1) = (mode.grid[i - 1], mode.grid[i]);
            let f0 = g[i - 1] * bessel_j(order, C::new(kt * r0, 0.0)) * r0;
            let f1 = g[i] * bessel_j(order, C::new(kt * r1, 0.0)) * r1;
            acc += 0.5 * (f0 + f1) * (r1 - r0);
        }
        acc
    };
    for &th in &theta {
        let kt = k0 * th.sin();
        let fm = hankel(&g_minus, (m - 1).unsigned_abs(), kt);
        let fp = hankel(&g_plus, (m + 1).unsigned_abs(), kt);
        let obliquity = 0.5 * (1.0 + th.cos());
        intensity.push((fm.norm_sqr() + fp.norm_sqr()) * obliquity * obliquity);
    }
    (theta, intensity)
}

fn hemisphere_integral(theta: &[f64], intensity: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..theta.len() {
        let f0 = intensity[i - 1] * theta[i - 1].sin();
        let f1 = intensity[i] * theta[i].sin();
        acc += PI * (f0 + f1) * (theta[i] - theta[i - 1]);
    }
    acc
}

/// Far-field pattern of the mode, normalized to the analytic energy budget
/// T(pi/2) = 1 - |r_t|^2 - L_p.
pub fn far_field_pattern(
    mode: &GuidedMode,
    stack: &RadialStack,
    wavelength: f64,
) -> Result<FarFieldPattern, InterfaceError> {
    let r_t = top_reflection(mode);
    let l_p = plasmon_loss(mode.core_radius, wavelength, stack)?;
    let l_p = l_p.min(1.0 - r_t.norm_sqr());
    let total = 1.0 - r_t.norm_sqr() - l_p;
    let (theta, mut intensity) = raw_pattern(mode, wavelength);
    let raw_total = hemisphere_integral(&theta, &intensity);
    let scale = if raw_total > 0.0 { total / raw_total } else { 0.0 };
    for v in &mut intensity {
        *v *= scale;
    }
    Ok(FarFieldPattern {
        theta,
        intensity,
        total,
    })
}

/// One override row of externally computed modal coefficients.
#[derive(Debug, Clone)]
struct TableRow {
    family: ModeFamily,
    a_nm: f64,
    lambda_nm: f64,
    r_t: C,
    r_b: C,
    /// (theta_rad, cumulative T) pairs when the table declares T columns
    t_columns: Option<Vec<(f64, f64)>>,
}

/// Externally computed interface coefficients keyed by (family, a, lambda),
/// matched nearest-neighbor within `tolerance_nm`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    rows: Vec<TableRow>,
    pub tolerance_nm: f64,
}

impl CoefficientTable {
    /// Parse `family,a_nm,lambda_nm,re_rt,im_rt,re_rb,im_rb[,T_<deg>...]`.
    /// A header row declares the optional T(theta) columns.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self, InterfaceError> {
        let mut rows: Vec<TableRow> = Vec::new();
        let mut t_grid_deg: Vec<f64> = Vec::new();
        let mut saw_data = false;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if !saw_data && ModeFamily::parse(fields[0]).is_none() {
                // header: pick up declared T_<deg> columns
                for name in fields.iter().skip(7) {
                    let deg = name
                        .strip_prefix("T_")
                        .and_then(|d| d.parse::<f64>().ok())
                        .ok_or_else(|| InterfaceError::TableParse {
                            line: lineno,
                            message: format!("unrecognized T column `{name}`"),
                        })?;
                    t_grid_deg.push(deg);
                }
                saw_data = true;
                continue;
            }
            saw_data = true;
            let expected = 7 + t_grid_deg.len();
            if fields.len() != expected {
                return Err(InterfaceError::TableParse {
                    line: lineno,
                    message: format!("expected {expected} fields, got {}", fields.len()),
                });
            }
            let family =
                ModeFamily::parse(fields[0]).ok_or_else(|| InterfaceError::TableParse {
                    line: lineno,
                    message: format!("unknown mode family `{}`", fields[0]),
                })?;
            let num = |i: usize| -> Result<f64, InterfaceError> {
                fields[i]
                    .parse::<f64>()
                    .map_err(|_| InterfaceError::TableParse {
                        line: lineno,
                        message: format!("field {} `{}` is not numeric", i + 1, fields[i]),
                    })
            };
            let (a_nm, lambda_nm) = (num(1)?, num(2)?);
            let r_t = C::new(num(3)?, num(4)?);
            let r_b = C::new(num(5)?, num(6)?);
            for r in [r_t, r_b] {
                if r.norm() > 1.0 + 1e-12 {
                    return Err(InterfaceError::TableReflectanceBound {
                        line: lineno,
                        magnitude: r.norm(),
                    });
                }
            }
            let t_columns = if t_grid_deg.is_empty() {
                None
            } else {
                let mut cols = Vec::with_capacity(t_grid_deg.len());
                for (j, &deg) in t_grid_deg.iter().enumerate() {
                    cols.push((deg.to_radians(), num(7 + j)?));
                }
                Some(cols)
            };
            if rows
                .iter()
                .any(|r| r.family == family && r.a_nm == a_nm && r.lambda_nm == lambda_nm)
            {
                return Err(InterfaceError::TableDuplicateKey {
                    family,
                    a_nm,
                    lambda_nm,
                });
            }
            rows.push(TableRow {
                family,
                a_nm,
                lambda_nm,
                r_t,
                r_b,
                t_columns,
            });
        }
        Ok(Self {
            rows,
            tolerance_nm: 1.0,
        })
    }

    pub fn from_str(data: &str) -> Result<Self, InterfaceError> {
        Self::from_csv(data.as_bytes())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn lookup(&self, family: ModeFamily, a_nm: f64, lambda_nm: f64) -> Option<&TableRow> {
        self.rows
            .iter()
            .filter(|r| {
                r.family == family
                    && (r.a_nm - a_nm).abs() <= self.tolerance_nm
                    && (r.lambda_nm - lambda_nm).abs() <= self.tolerance_nm
            })
            .min_by(|x, y| {
                let dx = (x.a_nm - a_nm).powi(2) + (x.lambda_nm - lambda_nm).powi(2);
                let dy = (y.a_nm - a_nm).powi(2) + (y.lambda_nm - lambda_nm).powi(2);
                dx.partial_cmp(&dy).unwrap()
            })
    }
}

/// Interface-coefficient provider: analytic approximations, overridable by a
/// loaded table. Immutable after construction.
#[derive(Debug, Clone, Default)]
pub struct InterfaceModel {
    pub table: Option<CoefficientTable>,
}

impl InterfaceModel {
    pub fn analytic() -> Self {
        Self { table: None }
    }

    pub fn with_table(table: CoefficientTable) -> Self {
        Self { table: Some(table) }
    }

    /// Full coefficient set for one solved mode. Table rows win when a key
    /// matches; the far-field shape always comes from the mode profile.
    pub fn build(
        &self,
        mode: &GuidedMode,
        stack: &RadialStack,
        wavelength: f64,
    ) -> Result<InterfaceCoefficients, InterfaceError> {
        let hit = self
            .table
            .as_ref()
            .and_then(|t| t.lookup(mode.family, stack.core_radius, wavelength));
        let (r_t, r_b, provenance) = match hit {
            Some(row) => (row.r_t, row.r_b, Provenance::Table),
            None => (
                top_reflection(mode),
                bottom_reflection(mode, stack, wavelength)?,
                Provenance::Analytic,
            ),
        };
        let l_p_model = plasmon_loss(stack.core_radius, wavelength, stack)?;
        // plasmon launching cannot exceed the non-reflected power
        let mut l_p = l_p_model.min(1.0 - r_t.norm_sqr());
        let total = 1.0 - r_t.norm_sqr() - l_p;
        let (theta, mut intensity) = raw_pattern(mode, wavelength);
        let t_cum: Vec<f64> = match hit.and_then(|row| row.t_columns.clone()) {
            Some(cols) => {
                // the declared cumulative T is authoritative; the bookkeeping
                // identity then fixes L_p
                let t_end = cols.last().map(|&(_, t)| t).unwrap_or(0.0);
                l_p = (1.0 - r_t.norm_sqr() - t_end).max(0.0);
                let interp = |th: f64| -> f64 {
                    if th <= cols[0].0 {
                        return cols[0].1 * (th / cols[0].0.max(1e-12)).min(1.0);
                    }
                    for w in cols.windows(2) {
                        if th <= w[1].0 {
                            let t = (th - w[0].0) / (w[1].0 - w[0].0);
                            return w[0].1 + t * (w[1].1 - w[0].1);
                        }
                    }
                    t_end
                };
                theta.iter().map(|&th| interp(th)).collect()
            }
            None => {
                let raw_total = hemisphere_integral(&theta, &intensity);
                let scale = if raw_total > 0.0 { total / raw_total } else { 0.0 };
                for v in &mut intensity {
                    *v *= scale;
                }
                let mut acc = 0.0;
                let mut cum = Vec::with_capacity(THETA_SAMPLES);
                cum.push(0.0);
                for i in 1..theta.len() {
                    let f0 = intensity[i - 1] * theta[i - 1].sin();
                    let f1 = intensity[i] * theta[i].sin();
                    acc += PI * (f0 + f1) * (theta[i] - theta[i - 1]);
                    cum.push(acc);
                }
                // pin the endpoint exactly to the energy budget
                let end = *cum.last().unwrap();
                if end > 0.0 {
                    let fix = total / end;
                    for v in cum.iter_mut().chain(intensity.iter_mut()) {
                        *v *= fix;
                    }
                }
                cum
            }
        };
        let pattern_total = *t_cum.last().unwrap();
        let coeffs = InterfaceCoefficients {
            r_t,
            r_b,
            theta: theta.clone(),
            t_cum,
            plasmon_loss: l_p,
            provenance,
            pattern: FarFieldPattern {
                theta,
                intensity,
                total: pattern_total,
            },
        };
        coeffs.validate()?;
        Ok(coeffs)
    }
}
