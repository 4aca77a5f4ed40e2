//! Four-level maser: parameters, bath occupations and the rotating-frame
//! master-equation generator.
//!
//! Levels are ordered `|0⟩, |1⟩, |2⟩, |3⟩` with energies `0, ω1, ω2, ω3 = ω2 + Δ`.
//! The cold bath drives `|0⟩ ↔ |1⟩` through a GKSL dissipator. The hot bath
//! couples `|0⟩` to the near-degenerate pair `{|2⟩, |3⟩}` through a
//! Bloch-Redfield dissipator whose cross rates are weighted by the
//! interference strength `p`. A collective drive of strength `λ` couples
//! `|1⟩` to both `|2⟩` and `|3⟩`.
//!
//! All frequencies and rates are in units of `ω1`.

use std::fmt;

use nalgebra::{Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense 4×4 complex matrix in the level basis.
pub type CMatrix4 = Matrix4<Complex64>;

/// Dense 16×16 complex superoperator acting on column-major `vec(ρ)`.
pub type Superoperator = SMatrix<Complex64, 16, 16>;

pub const DIM: usize = 4;

/// Hermiticity tolerance for [`DensityMatrix::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance for [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-12;
/// Minimum eigenvalues below this are reported as mild (Redfield) negativity.
pub const POSITIVITY_WARN: f64 = -1e-9;
/// Minimum eigenvalues below this make a state non-physical.
pub const POSITIVITY_ERROR: f64 = -1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("matrix is not Hermitian (max |ρ - ρ†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
}

/// Drive frequency `Ω`.
///
/// Serialized either as a number or as the string `"resonant_mid"`, which
/// places the drive halfway between the `1→2` and `1→3` transitions,
/// `Ω = ω2 − ω1 + Δ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "DriveRepr", into = "DriveRepr")]
pub enum DriveFrequency {
    #[default]
    ResonantMid,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DriveRepr {
    Number(f64),
    Keyword(String),
}

impl TryFrom<DriveRepr> for DriveFrequency {
    type Error = String;

    fn try_from(repr: DriveRepr) -> Result<Self, Self::Error> {
        match repr {
            DriveRepr::Number(x) => Ok(DriveFrequency::Fixed(x)),
            DriveRepr::Keyword(s) if s == "resonant_mid" => Ok(DriveFrequency::ResonantMid),
            DriveRepr::Keyword(s) => Err(format!(
                "unknown drive frequency {s:?}; expected a number or \"resonant_mid\""
            )),
        }
    }
}

impl From<DriveFrequency> for DriveRepr {
    fn from(d: DriveFrequency) -> Self {
        match d {
            DriveFrequency::ResonantMid => DriveRepr::Keyword("resonant_mid".to_owned()),
            DriveFrequency::Fixed(x) => DriveRepr::Number(x),
        }
    }
}

/// Complete physical parameterization of the maser.
///
/// Defaults are the phase-distribution engine panel: `ω2 = 3`, `Δ = 0.05`,
/// mid-gap drive with `λ = 0.05`, `γh = γc = 0.1`, `n_c = 0.1`,
/// `n_h2 = 0.5` and `p = 0.5`.
///
/// `Δ ≪ ω2 − ω1` is where the model is physically meaningful; it is not
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaserParams {
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    #[serde(rename = "Omega", alias = "omega_drive")]
    pub omega_drive: DriveFrequency,
    pub lambda_drive: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub n_c: f64,
    pub n_h2: f64,
    pub p: f64,
}

impl Default for MaserParams {
    fn default() -> Self {
        Self {
            omega1: 1.0,
            omega2: 3.0,
            delta: 0.05,
            omega_drive: DriveFrequency::ResonantMid,
            lambda_drive: 0.05,
            gamma_h: 0.1,
            gamma_c: 0.1,
            n_c: 0.1,
            n_h2: 0.5,
            p: 0.5,
        }
    }
}

impl MaserParams {
    pub fn omega3(&self) -> f64 {
        self.omega2 + self.delta
    }

    /// Resolved drive frequency `Ω`.
    pub fn drive_frequency(&self) -> f64 {
        match self.omega_drive {
            DriveFrequency::ResonantMid => self.omega2 - self.omega1 + 0.5 * self.delta,
            DriveFrequency::Fixed(x) => x,
        }
    }

    /// `n_h^(2) / n_c`, the bath-ratio axis used throughout the sweeps.
    pub fn occupation_ratio(&self) -> f64 {
        self.n_h2 / self.n_c
    }

    /// True for the exactly degenerate, resonantly driven configuration
    /// (`Δ = 0`, `Ω = ω2 − ω1`) where the steady state has a closed form.
    pub fn is_degenerate_resonant(&self) -> bool {
        let scale = self.omega2.abs().max(1.0);
        self.delta.abs() <= 1e-14 * scale
            && (self.drive_frequency() - (self.omega2 - self.omega1)).abs() <= 1e-12 * scale
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), ModelError> {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, value, reason })
            }
        }
        check("omega1", self.omega1, self.omega1 > 0.0, "must be > 0")?;
        check("omega2", self.omega2, self.omega2 > self.omega1, "must exceed omega1")?;
        check("delta", self.delta, self.delta >= 0.0, "must be >= 0")?;
        let omega = self.drive_frequency();
        check("Omega", omega, true, "must be finite")?;
        check(
            "lambda_drive",
            self.lambda_drive,
            self.lambda_drive >= 0.0,
            "must be >= 0",
        )?;
        check("gamma_h", self.gamma_h, self.gamma_h > 0.0, "must be > 0")?;
        check("gamma_c", self.gamma_c, self.gamma_c > 0.0, "must be > 0")?;
        check("n_c", self.n_c, self.n_c >= 0.0, "must be >= 0")?;
        check("n_h2", self.n_h2, self.n_h2 >= 0.0, "must be >= 0")?;
        check("p", self.p, self.p.abs() <= 1.0, "must lie in [-1, 1]")?;
        Ok(())
    }
}

/// Bath temperatures implied by the occupations, and the hot occupation at `ω3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathOccupations {
    pub t_h: f64,
    pub t_c: f64,
    pub n_h3: f64,
}

/// Bose-Einstein occupation `1/(exp(ω/T) − 1)`; zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    }
}

/// Temperature at which a mode of frequency `omega` has occupation `n`.
/// `n = 0` maps to `T = 0`.
pub fn temperature_for_occupation(omega: f64, n: f64) -> f64 {
    if n <= 0.0 {
        0.0
    } else {
        omega / (1.0 / n).ln_1p()
    }
}

pub fn derive_bath_occupations(params: &MaserParams) -> BathOccupations {
    let t_h = temperature_for_occupation(params.omega2, params.n_h2);
    let t_c = temperature_for_occupation(params.omega1, params.n_c);
    let n_h3 = if params.delta == 0.0 {
        params.n_h2
    } else {
        bose_occupation(params.omega3(), t_h)
    };
    BathOccupations { t_h, t_c, n_h3 }
}

/// Outcome of the positivity check on a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Positivity {
    Physical,
    /// Slightly negative spectrum, tolerated for Redfield steady states.
    MildlyNegative(f64),
    NonPhysical(f64),
}

/// 4×4 Hermitian, unit-trace state in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMatrix4);

impl DensityMatrix {
    /// Validates Hermiticity and unit trace.
    pub fn new(m: CMatrix4) -> Result<Self, ModelError> {
        let herm = hermiticity_error(&m);
        if herm > HERMITICITY_TOL {
            return Err(ModelError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(ModelError::BadTrace(tr.re));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix after Hermitizing it and normalizing the trace.
    pub fn from_hermitized(m: CMatrix4) -> Self {
        let h = hermitize(&m);
        let tr = h.trace().re;
        Self(h / Complex64::from(tr))
    }

    pub fn from_matrix_unchecked(m: CMatrix4) -> Self {
        Self(m)
    }

    /// Pure state `|k⟩⟨k|`.
    pub fn basis_state(k: usize) -> Self {
        let mut m = CMatrix4::zeros();
        m[(k, k)] = Complex64::from(1.0);
        Self(m)
    }

    pub fn ground() -> Self {
        Self::basis_state(0)
    }

    pub fn maximally_mixed() -> Self {
        Self(CMatrix4::identity() * Complex64::from(0.25))
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix4 {
        self.0
    }

    /// Element `ρ_ij`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(hermitize(&self.0));
        let mut v = [0.0; 4];
        v.copy_from_slice(eig.eigenvalues.as_slice());
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn positivity(&self) -> Positivity {
        let min = self.min_eigenvalue();
        if min >= POSITIVITY_WARN {
            Positivity::Physical
        } else if min >= POSITIVITY_ERROR {
            Positivity::MildlyNegative(min)
        } else {
            Positivity::NonPhysical(min)
        }
    }

    /// Complex conjugate state (all coherences conjugated).
    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    /// Largest element-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..DIM {
            for j in 0..DIM {
                let z = self.0[(i, j)];
                write!(f, "{:>+.6e}{:+.6e}i", z.re, z.im)?;
                if j + 1 < DIM {
                    f.write_str("  ")?;
                }
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

pub fn hermitize(m: &CMatrix4) -> CMatrix4 {
    (m + m.adjoint()) * Complex64::from(0.5)
}

pub fn hermiticity_error(m: &CMatrix4) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<Complex64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Column-major vectorization: `vec(ρ)[i + 4j] = ρ_ij`.
pub fn vectorize(m: &CMatrix4) -> SMatrix<Complex64, 16, 1> {
    SMatrix::<Complex64, 16, 1>::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &SMatrix<Complex64, 16, 1>) -> CMatrix4 {
    CMatrix4::from_column_slice(v.as_slice())
}

/// Accumulates one Redfield pair term for the ladder operators
/// `A = |a⟩⟨b|`, `B = |c⟩⟨d|`:
///
/// `g_ab_cd (AρB† − ρB†A) + g_cd_ab (AρB† − B†Aρ)`.
///
/// With `A = B` and equal rates this is the GKSL term `Γ(2AρA† − {A†A, ρ})`.
fn add_pair_term(
    out: &mut CMatrix4,
    rho: &CMatrix4,
    (a, b): (usize, usize),
    (c, d): (usize, usize),
    rate_ij: f64,
    rate_ji: f64,
) {
    // AρB† = ρ_bd |a⟩⟨c|
    out[(a, c)] += rho[(b, d)] * (rate_ij + rate_ji);
    if a == c {
        // B†A = |d⟩⟨b|
        for r in 0..DIM {
            out[(r, b)] -= rho[(r, d)] * rate_ij;
        }
        for col in 0..DIM {
            out[(d, col)] -= rho[(b, col)] * rate_ji;
        }
    }
}

/// Validated model with derived bath data and the rotating-frame Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct MaserModel {
    params: MaserParams,
    baths: BathOccupations,
    hamiltonian: CMatrix4,
}

impl MaserModel {
    pub fn new(params: MaserParams) -> Result<Self, ModelError> {
        params.validate()?;
        let baths = derive_bath_occupations(&params);
        let hamiltonian = build_effective_hamiltonian(&params);
        Ok(Self {
            params,
            baths,
            hamiltonian,
        })
    }

    pub fn params(&self) -> &MaserParams {
        &self.params
    }

    pub fn baths(&self) -> &BathOccupations {
        &self.baths
    }

    /// Hot occupation at the transition frequency of level `j ∈ {2, 3}`.
    pub fn n_hot(&self, j: usize) -> f64 {
        match j {
            2 => self.params.n_h2,
            3 => self.baths.n_h3,
            _ => panic!("hot bath only couples levels 2 and 3, got {j}"),
        }
    }

    /// Effective rotating-frame Hamiltonian `H0 − H̃ + Ṽ`.
    pub fn hamiltonian(&self) -> &CMatrix4 {
        &self.hamiltonian
    }

    pub fn bare_hamiltonian(&self) -> CMatrix4 {
        bare_hamiltonian(&self.params)
    }

    pub fn cold_dissipator(&self, rho: &CMatrix4) -> CMatrix4 {
        let p = &self.params;
        let mut out = CMatrix4::zeros();
        let decay = p.gamma_c * (1.0 + p.n_c);
        let pump = p.gamma_c * p.n_c;
        add_pair_term(&mut out, rho, (0, 1), (0, 1), decay, decay);
        add_pair_term(&mut out, rho, (1, 0), (1, 0), pump, pump);
        out
    }

    /// Bloch-Redfield hot dissipator.
    ///
    /// Decay channels use `h_1^i = |0⟩⟨i|` with rates `P_ij γh (1 + n_h^(j))`,
    /// excitation channels use `h_2^i = |i⟩⟨0|` with rates `P_ij γh n_h^(j)`,
    /// where `P` has unit diagonal and off-diagonal `p`.
    pub fn hot_dissipator(&self, rho: &CMatrix4) -> CMatrix4 {
        let gh = self.params.gamma_h;
        let corr = |i: usize, j: usize| if i == j { 1.0 } else { self.params.p };
        let mut out = CMatrix4::zeros();
        for i in 2..DIM {
            for j in 2..DIM {
                let (ni, nj) = (self.n_hot(i), self.n_hot(j));
                let pij = corr(i, j);
                add_pair_term(
                    &mut out,
                    rho,
                    (0, i),
                    (0, j),
                    pij * gh * (1.0 + nj),
                    pij * gh * (1.0 + ni),
                );
                add_pair_term(&mut out, rho, (i, 0), (j, 0), pij * gh * nj, pij * gh * ni);
            }
        }
        out
    }

    /// Rotating-frame generator `−i[H0 − H̃ + Ṽ, ρ] + D_h[ρ] + D_c[ρ]`.
    pub fn rhs(&self, rho: &CMatrix4) -> CMatrix4 {
        let h = &self.hamiltonian;
        let comm = h * rho - rho * h;
        comm * (-I) + self.hot_dissipator(rho) + self.cold_dissipator(rho)
    }

    /// Lab-frame generator `−i[H0 + V(t), ρ] + D_h[ρ] + D_c[ρ]` with the
    /// co-rotating drive `V(t) = λ e^{−iΩt} Σ_j |j⟩⟨1| + h.c.`, the sign for
    /// which the rotating frame of [`crate::steady_state::rotating_frame_transform`]
    /// removes the time dependence exactly.
    pub fn lab_frame_rhs(&self, t: f64, rho: &CMatrix4) -> CMatrix4 {
        let h = self.lab_hamiltonian(t);
        let comm = h * rho - rho * h;
        comm * (-I) + self.hot_dissipator(rho) + self.cold_dissipator(rho)
    }

    pub fn lab_hamiltonian(&self, t: f64) -> CMatrix4 {
        let p = &self.params;
        let mut h = self.bare_hamiltonian();
        let phase = Complex64::from_polar(p.lambda_drive, -p.drive_frequency() * t);
        for j in 2..DIM {
            h[(j, 1)] = phase;
            h[(1, j)] = phase.conj();
        }
        h
    }

    /// Explicit 16×16 generator, built column by column from the action on
    /// matrix units.
    pub fn generator(&self) -> GeneratorMatrix {
        let mut l = Superoperator::zeros();
        for col in 0..DIM * DIM {
            let mut unit = CMatrix4::zeros();
            unit[(col % DIM, col / DIM)] = Complex64::from(1.0);
            let image = vectorize(&self.rhs(&unit));
            l.set_column(col, &image);
        }
        GeneratorMatrix(l)
    }
}

/// `H0 = diag(0, ω1, ω2, ω3)`.
pub fn bare_hamiltonian(params: &MaserParams) -> CMatrix4 {
    let diag = nalgebra::Vector4::new(0.0, params.omega1, params.omega2, params.omega3()).map(Complex64::from);
    CMatrix4::from_diagonal(&diag)
}

/// Rotating-frame generator `H̃ = (Ω/2)(|2⟩⟨2| + |3⟩⟨3|) − (Ω/2)|1⟩⟨1|` as its diagonal.
pub fn frame_generator_diagonal(omega_drive: f64) -> [f64; 4] {
    let half = 0.5 * omega_drive;
    [0.0, -half, half, half]
}

/// `H0 − H̃ + Ṽ`: diagonal `(0, ω1 + Ω/2, ω2 − Ω/2, ω3 − Ω/2)` with `λ` on the
/// `(1,2)`, `(1,3)` entries and their transposes.
pub fn build_effective_hamiltonian(params: &MaserParams) -> CMatrix4 {
    let frame = frame_generator_diagonal(params.drive_frequency());
    let mut h = bare_hamiltonian(params);
    for (k, shift) in frame.iter().enumerate() {
        h[(k, k)] -= Complex64::from(*shift);
    }
    let lambda = Complex64::from(params.lambda_drive);
    for j in 2..DIM {
        h[(j, 1)] = lambda;
        h[(1, j)] = lambda;
    }
    h
}

/// The vectorized generator `L`, with `L·vec(ρ) = vec(rhs(ρ))` under
/// column-major vectorization.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix(Superoperator);

impl GeneratorMatrix {
    pub fn matrix(&self) -> &Superoperator {
        &self.0
    }

    pub fn apply(&self, rho: &CMatrix4) -> CMatrix4 {
        unvectorize(&(self.0 * vectorize(rho)))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// `‖L vec(ρ)‖∞`.
    pub fn residual(&self, rho: &CMatrix4) -> f64 {
        max_abs(&(self.0 * vectorize(rho)))
    }

    /// Eigenvalues of `L` (complex Schur form).
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let schur = nalgebra::Schur::new(self.0);
        let (_, t) = schur.unpack();
        (0..DIM * DIM).map(|k| t[(k, k)]).collect()
    }

    /// Slowest nonzero relaxation rate, `min |Re μ|` over eigenvalues `μ` of
    /// `L` that are not numerically zero.
    pub fn slowest_relaxation_rate(&self) -> Option<f64> {
        let scale = self.max_abs();
        self.eigenvalues()
            .into_iter()
            .map(|z| z.re.abs())
            .filter(|r| *r > 1e-10 * scale)
            .min_by(f64::total_cmp)
    }
}

impl ZeroCheck for CMatrix4 {
    fn is_zero_within(&self, tol: f64) -> bool {
        max_abs(self) <= tol
    }
}

/// Element-wise zero test with an absolute tolerance.
pub trait ZeroCheck {
    fn is_zero_within(&self, tol: f64) -> bool;
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn degenerate(p: f64) -> MaserParams {
        MaserParams {
            delta: 0.0,
            p,
            ..MaserParams::default()
        }
    }

    fn rho_from(entries: &[((usize, usize), Complex64)]) -> CMatrix4 {
        let mut m = CMatrix4::zeros();
        for &((i, j), z) in entries {
            m[(i, j)] = z;
        }
        m
    }

    #[test]
    fn bath_occupations() {
        let params = MaserParams {
            omega2: 3.0,
            delta: 0.0,
            n_h2: 0.5,
            ..MaserParams::default()
        };
        assert_eq!(derive_bath_occupations(&params).n_h3, 0.5);

        let baths = derive_bath_occupations(&MaserParams {
            n_c: 0.1,
            ..MaserParams::default()
        });
        assert!((baths.t_c - 1.0 / 11f64.ln()).abs() < 1e-15);
        assert!((bose_occupation(1.0, baths.t_c) - 0.1).abs() < 1e-14);

        let shifted = derive_bath_occupations(&MaserParams { delta: 0.05, ..params });
        assert!(shifted.n_h3 < 0.5);
    }

    #[test]
    fn zero_occupation_is_zero_temperature() {
        let params = MaserParams {
            n_c: 0.0,
            n_h2: 0.0,
            ..MaserParams::default()
        };
        let baths = derive_bath_occupations(&params);
        assert_eq!(baths.t_c, 0.0);
        assert_eq!(baths.t_h, 0.0);
        assert_eq!(baths.n_h3, 0.0);
    }

    #[test]
    fn validation_rejects_bad_params() {
        let bad = [
            MaserParams {
                p: 1.5,
                ..MaserParams::default()
            },
            MaserParams {
                omega2: 0.5,
                ..MaserParams::default()
            },
            MaserParams {
                gamma_h: 0.0,
                ..MaserParams::default()
            },
            MaserParams {
                delta: -0.1,
                ..MaserParams::default()
            },
            MaserParams {
                n_c: f64::NAN,
                ..MaserParams::default()
            },
        ];
        for params in bad {
            assert!(MaserModel::new(params).is_err(), "{params:?}");
        }
    }

    #[test]
    fn resonant_hamiltonian_collapses() {
        let params = MaserParams {
            delta: 0.0,
            lambda_drive: 0.0,
            omega_drive: DriveFrequency::Fixed(2.0),
            ..MaserParams::default()
        };
        let h = build_effective_hamiltonian(&params);
        let expected = [0.0, 2.0, 2.0, 2.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expected[i] } else { 0.0 };
                assert_eq!(h[(i, j)], Complex64::from(want), "({i},{j})");
            }
        }
    }

    #[test]
    fn hamiltonian_structure() {
        let params = MaserParams::default();
        let h = build_effective_hamiltonian(&params);
        assert_eq!(hermiticity_error(&h), 0.0);
        let omega = params.drive_frequency();
        // ρ12 rotates at ω2 − ω1 − Ω = −Δ/2
        let rate = (h[(2, 2)] - h[(1, 1)]).re;
        assert!((rate - (-0.025)).abs() < 1e-15);
        assert!((omega - 2.025).abs() < 1e-15);
        assert_eq!(h[(1, 2)], Complex64::from(0.05));
        assert_eq!(h[(1, 3)], Complex64::from(0.05));
        assert_eq!(h[(2, 3)], Complex64::from(0.0));
        assert_eq!(h[(0, 1)], Complex64::from(0.0));
    }

    #[test]
    fn cold_dissipator_on_ground() {
        let params = MaserParams {
            gamma_c: 0.1,
            n_c: 0.1,
            ..MaserParams::default()
        };
        let model = MaserModel::new(params).unwrap();
        let out = model.cold_dissipator(DensityMatrix::ground().matrix());
        assert!((out[(1, 1)].re - 0.02).abs() < 1e-15);
        assert!((out[(0, 0)].re + 0.02).abs() < 1e-15);
        assert!(out.trace().norm() < 1e-16);

        let untouched = model.cold_dissipator(DensityMatrix::basis_state(2).matrix());
        assert!(untouched.is_zero_within(0.0));
    }

    #[test]
    fn hot_dissipator_on_ground() {
        let model = MaserModel::new(degenerate(0.5)).unwrap();
        let out = model.hot_dissipator(DensityMatrix::ground().matrix());
        assert!((out[(2, 2)].re - 0.1).abs() < 1e-15);
        assert!((out[(3, 3)].re - 0.1).abs() < 1e-15);
        assert!((out[(2, 3)].re - 0.05).abs() < 1e-15);
        assert!((out[(3, 2)].re - 0.05).abs() < 1e-15);
        assert!(out.trace().norm() < 1e-16);

        let untouched = model.hot_dissipator(DensityMatrix::basis_state(1).matrix());
        assert!(untouched.is_zero_within(0.0));
    }

    #[test]
    fn hot_dissipator_without_interference_is_two_gksl_channels() {
        let params = MaserParams {
            p: 0.0,
            ..MaserParams::default()
        };
        let model = MaserModel::new(params).unwrap();
        let gh = params.gamma_h;
        let rho = rho_from(&[
            ((0, 0), Complex64::from(0.4)),
            ((2, 2), Complex64::from(0.3)),
            ((3, 3), Complex64::from(0.3)),
            ((2, 3), Complex64::new(0.1, 0.05)),
            ((3, 2), Complex64::new(0.1, -0.05)),
        ]);
        let mut expected = CMatrix4::zeros();
        for j in 2..4 {
            let n = model.n_hot(j);
            let r = rho_from(&[((0, j), Complex64::from(1.0))]);
            let e = r.adjoint();
            let gksl = |op: &CMatrix4, rate: f64| {
                let od = op.adjoint();
                (op * rho * od * Complex64::from(2.0) - od * op * rho - rho * od * op) * Complex64::from(rate)
            };
            expected += gksl(&r, gh * (1.0 + n)) + gksl(&e, gh * n);
        }
        let got = model.hot_dissipator(&rho);
        assert!(max_abs(&(got - expected)) < 1e-16);
        // No population gain fed by the ρ23 coherence.
        assert!((got[(2, 2)].re - (0.4 * 2.0 * gh * params.n_h2 - 2.0 * gh * (1.0 + params.n_h2) * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn ground_state_outflow() {
        let params = MaserParams {
            delta: 0.0,
            n_c: 0.1,
            n_h2: 0.5,
            ..MaserParams::default()
        };
        let model = MaserModel::new(params).unwrap();
        let out = model.rhs(DensityMatrix::ground().matrix());
        assert!((out[(0, 0)].re + 0.22).abs() < 1e-15);
    }

    #[test]
    fn undriven_mixed_state_stays_diagonal() {
        let params = MaserParams {
            lambda_drive: 0.0,
            p: 0.0,
            ..MaserParams::default()
        };
        let model = MaserModel::new(params).unwrap();
        let out = model.rhs(DensityMatrix::maximally_mixed().matrix());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(out[(i, j)], ZERO);
                }
            }
        }
        // ρ11 sits above its cold-bath equilibrium n_c/(1+n_c) ratio, so it relaxes down.
        assert!(out[(1, 1)].re < 0.0);
    }

    #[test]
    fn ground_coherences_decouple() {
        let model = MaserModel::new(degenerate(0.5)).unwrap();
        for j in 1..4 {
            let rho = rho_from(&[((0, j), Complex64::new(0.1, 0.2)), ((j, 0), Complex64::new(0.1, -0.2))]);
            let out = model.rhs(&rho);
            for a in 0..4 {
                for b in 0..4 {
                    let in_ground_block = (a == 0) != (b == 0);
                    if !in_ground_block {
                        assert_eq!(out[(a, b)], ZERO, "ρ0{j} leaked into ({a},{b})");
                    }
                }
            }
            // Self-coupling has negative real part: the coherence decays.
            assert!((out[(0, j)] / rho[(0, j)]).re < 0.0);
        }
    }

    #[test]
    fn lab_frame_matches_at_t_zero() {
        let model = MaserModel::new(MaserParams::default()).unwrap();
        let rho = DensityMatrix::maximally_mixed();
        let lab = model.lab_frame_rhs(0.0, rho.matrix());
        let h0 = model.lab_hamiltonian(0.0);
        let mut h = *model.hamiltonian();
        let frame = frame_generator_diagonal(model.params().drive_frequency());
        for k in 0..4 {
            h[(k, k)] += Complex64::from(frame[k]);
        }
        assert!(max_abs(&(h - h0)) < 1e-15);
        let rotating = model.rhs(rho.matrix());
        // Diagonal states commute with the diagonal frame shift.
        assert!(max_abs(&(lab - rotating)) < 1e-15);
    }

    #[test]
    fn generator_matches_action_on_units() {
        let model = MaserModel::new(MaserParams::default()).unwrap();
        let l = model.generator();
        for col in 0..16 {
            let mut unit = CMatrix4::zeros();
            unit[(col % 4, col / 4)] = Complex64::from(1.0);
            assert!(max_abs(&(l.apply(&unit) - model.rhs(&unit))) < 1e-15);
        }
    }

    #[test]
    fn generator_has_zero_eigenvalue() {
        let model = MaserModel::new(MaserParams::default()).unwrap();
        let l = model.generator();
        let min = l
            .eigenvalues()
            .into_iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(min < 1e-12, "{min}");
        assert!(l.slowest_relaxation_rate().unwrap() > 0.0);
    }

    #[test]
    fn vectorization_is_column_major() {
        let mut m = CMatrix4::zeros();
        m[(1, 2)] = Complex64::from(7.0);
        let v = vectorize(&m);
        assert_eq!(v[1 + 4 * 2], Complex64::from(7.0));
        assert_eq!(unvectorize(&v), m);
    }

    #[test]
    fn density_matrix_checks() {
        assert!(DensityMatrix::new(*DensityMatrix::maximally_mixed().matrix()).is_ok());
        let mut m = *DensityMatrix::ground().matrix();
        m[(0, 1)] = Complex64::from(0.1);
        assert!(matches!(DensityMatrix::new(m), Err(ModelError::NotHermitian(_))));
        let doubled = DensityMatrix::ground().matrix() * Complex64::from(2.0);
        assert!(matches!(DensityMatrix::new(doubled), Err(ModelError::BadTrace(_))));

        let mut neg = CMatrix4::zeros();
        neg[(0, 0)] = Complex64::from(1.0 + 1e-7);
        neg[(1, 1)] = Complex64::from(-1e-7);
        assert!(matches!(
            DensityMatrix::from_matrix_unchecked(neg).positivity(),
            Positivity::MildlyNegative(_)
        ));
        neg[(0, 0)] = Complex64::from(1.1);
        neg[(1, 1)] = Complex64::from(-0.1);
        assert!(matches!(
            DensityMatrix::from_matrix_unchecked(neg).positivity(),
            Positivity::NonPhysical(_)
        ));
    }

    #[test]
    fn drive_frequency_serde() {
        let params: MaserParams = serde_json::from_str(r#"{"Omega": "resonant_mid", "delta": 0.1}"#).unwrap();
        assert_eq!(params.omega_drive, DriveFrequency::ResonantMid);
        assert!((params.drive_frequency() - 2.05).abs() < 1e-15);
        let params: MaserParams = serde_json::from_str(r#"{"Omega": 2.0}"#).unwrap();
        assert_eq!(params.omega_drive, DriveFrequency::Fixed(2.0));
        assert!(serde_json::from_str::<MaserParams>(r#"{"Omega": "fast"}"#).is_err());
        let text = serde_json::to_string(&MaserParams::default()).unwrap();
        assert!(text.contains(r#""Omega":"resonant_mid""#));
    }
}
