//! Physical parameters and the four-level density matrix.
//!
//! Levels are indexed `0..4`: `|0⟩` is the common ground state, `|1⟩` and
//! `|2⟩` the excited doublet that decays into it, and `|3⟩` the metastable
//! reservoir. Rates are in units of a reference linewidth γ and times in 1/γ.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const LEVELS: usize = 4;

/// Number of real components in the packed representation.
pub const PACKED_LEN: usize = 16;

/// Strictly-lower-triangle element order used by the packed storage.
pub const LOWER_PAIRS: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Tolerance above which a raw matrix is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub const DEFAULT_TRACE_TOL: f64 = 1e-6;
pub const DEFAULT_POS_TOL: f64 = 1e-7;

fn lower_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (1, 0) => 0,
        (2, 0) => 1,
        (2, 1) => 2,
        (3, 0) => 3,
        (3, 1) => 4,
        (3, 2) => 5,
        _ => unreachable!("({i}, {j}) is not a strictly-lower index pair"),
    }
}

fn check_level(name: &'static str, i: usize) -> Result<()> {
    if i < LEVELS {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("level index {i} out of range 0..4"),
        ))
    }
}

/// A 4×4 Hermitian matrix stored as its real diagonal plus the six
/// strictly-lower complex entries, so `ρ_ij = conj(ρ_ji)` holds exactly.
///
/// Used both for states and for their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    diag: [f64; LEVELS],
    lower: [Complex64; 6],
}

impl Default for DensityMatrix {
    fn default() -> Self {
        Self::zeros()
    }
}

impl DensityMatrix {
    pub fn zeros() -> Self {
        DensityMatrix {
            diag: [0.0; LEVELS],
            lower: [Complex64::new(0.0, 0.0); 6],
        }
    }

    pub fn from_diagonal(diag: [f64; LEVELS]) -> Self {
        DensityMatrix {
            diag,
            ..Self::zeros()
        }
    }

    /// `|k⟩⟨k|`.
    pub fn projector(k: usize) -> Result<Self> {
        check_level("level", k)?;
        let mut diag = [0.0; LEVELS];
        diag[k] = 1.0;
        Ok(Self::from_diagonal(diag))
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) amplitude vector.
    pub fn pure(psi: &[Complex64; LEVELS]) -> Self {
        let mut rho = Self::zeros();
        for (d, a) in rho.diag.iter_mut().zip(psi) {
            *d = a.norm_sqr();
        }
        for &(i, j) in LOWER_PAIRS.iter() {
            rho.lower[lower_index(i, j)] = psi[i] * psi[j].conj();
        }
        rho
    }

    pub fn maximally_mixed() -> Self {
        Self::from_diagonal([0.25; LEVELS])
    }

    /// Builds from a full matrix, rejecting it if `max |m_ij − conj(m_ji)|`
    /// exceeds [`HERMITICITY_TOL`]. The stored entries are the Hermitian part.
    pub fn from_matrix(m: &Matrix4<Complex64>) -> Result<Self> {
        let defect = hermiticity_defect(m);
        if !(defect <= HERMITICITY_TOL) {
            return Err(Error::NotHermitian { defect });
        }
        let mut rho = Self::zeros();
        for i in 0..LEVELS {
            rho.diag[i] = m[(i, i)].re;
        }
        for &(i, j) in LOWER_PAIRS.iter() {
            rho.lower[lower_index(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)].conj());
        }
        Ok(rho)
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|i, j| self.get(i, j))
    }

    /// Element `ρ_ij`. Panics if either index is outside `0..4`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < LEVELS && j < LEVELS, "index ({i}, {j}) out of range");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Complex64::new(self.diag[i], 0.0),
            std::cmp::Ordering::Greater => self.lower[lower_index(i, j)],
            std::cmp::Ordering::Less => self.lower[lower_index(j, i)].conj(),
        }
    }

    /// Sets `ρ_ij = value` and `ρ_ji = conj(value)`. Requires `i ≠ j`.
    pub fn set_coherence(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(
            i < LEVELS && j < LEVELS && i != j,
            "bad coherence index ({i}, {j})"
        );
        if i > j {
            self.lower[lower_index(i, j)] = value;
        } else {
            self.lower[lower_index(j, i)] = value.conj();
        }
    }

    pub fn set_population(&mut self, i: usize, value: f64) {
        self.diag[i] = value;
    }

    #[inline]
    pub fn population(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn diagonal(&self) -> [f64; LEVELS] {
        self.diag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// `Tr(ρ²)` of the full matrix.
    pub fn purity(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let off: f64 = self.lower.iter().map(|z| z.norm_sqr()).sum();
        d + 2.0 * off
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; LEVELS] {
        let ev = self.to_matrix().symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64; LEVELS]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..LEVELS {
            for j in 0..LEVELS {
                acc += psi[i].conj() * self.get(i, j) * psi[j];
            }
        }
        acc.re
    }

    /// Packs into 16 reals: the diagonal, then `(re, im)` of each
    /// lower-triangle entry in [`LOWER_PAIRS`] order.
    pub fn to_packed(&self) -> [f64; PACKED_LEN] {
        let mut y = [0.0; PACKED_LEN];
        y[..LEVELS].copy_from_slice(&self.diag);
        for (k, z) in self.lower.iter().enumerate() {
            y[LEVELS + 2 * k] = z.re;
            y[LEVELS + 2 * k + 1] = z.im;
        }
        y
    }

    pub fn from_packed(y: &[f64; PACKED_LEN]) -> Self {
        let mut rho = Self::zeros();
        rho.diag.copy_from_slice(&y[..LEVELS]);
        for k in 0..6 {
            rho.lower[k] = Complex64::new(y[LEVELS + 2 * k], y[LEVELS + 2 * k + 1]);
        }
        rho
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().all(|x| x.is_finite())
            && self
                .lower
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest elementwise modulus.
    pub fn max_norm(&self) -> f64 {
        self.diag
            .iter()
            .map(|x| x.abs())
            .chain(self.lower.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_norm()
    }
}

impl Add for DensityMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..LEVELS {
            self.diag[i] += rhs.diag[i];
        }
        for k in 0..6 {
            self.lower[k] += rhs.lower[k];
        }
        self
    }
}

impl Sub for DensityMatrix {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..LEVELS {
            self.diag[i] -= rhs.diag[i];
        }
        for k in 0..6 {
            self.lower[k] -= rhs.lower[k];
        }
        self
    }
}

impl Mul<f64> for DensityMatrix {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for x in self.diag.iter_mut() {
            *x *= s;
        }
        for z in self.lower.iter_mut() {
            *z *= s;
        }
        self
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..LEVELS {
            let row: Vec<String> = (0..LEVELS)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `max |m_ij − conj(m_ji)|` over all index pairs (diagonal included).
pub fn hermiticity_defect(m: &Matrix4<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..LEVELS {
        for j in 0..=i {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
            if worst.is_nan() {
                return worst;
            }
        }
    }
    worst
}

/// Result of [`validate_physicality`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace_violation: bool,
    pub hermiticity_violation: bool,
    pub positivity_violation: bool,
}

impl Diagnostics {
    pub fn is_physical(&self) -> bool {
        !(self.trace_violation || self.hermiticity_violation || self.positivity_violation)
    }
}

/// Trace, Hermiticity and positivity diagnostics for a raw 4×4 matrix.
pub fn validate_matrix(m: &Matrix4<Complex64>, trace_tol: f64, pos_tol: f64) -> Diagnostics {
    let herm = hermiticity_defect(m);
    let trace: Complex64 = (0..LEVELS).map(|i| m[(i, i)]).sum();
    let trace_error = (trace - Complex64::new(1.0, 0.0)).norm();
    // eigenvalues of the Hermitian part
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = h
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let diag_out_of_range =
        (0..LEVELS).any(|i| m[(i, i)].re < -pos_tol || m[(i, i)].re > 1.0 + pos_tol);
    Diagnostics {
        trace_error,
        hermiticity_defect: herm,
        min_eigenvalue,
        trace_violation: !(trace_error <= trace_tol),
        hermiticity_violation: !(herm <= HERMITICITY_TOL),
        positivity_violation: !(min_eigenvalue >= -pos_tol) || diag_out_of_range,
    }
}

pub fn validate_physicality(rho: &DensityMatrix, trace_tol: f64, pos_tol: f64) -> Diagnostics {
    validate_matrix(&rho.to_matrix(), trace_tol, pos_tol)
}

/// `|3⟩⟨3|`: all population in the metastable reservoir.
pub fn initial_metastable() -> DensityMatrix {
    DensityMatrix::from_diagonal([0.0, 0.0, 0.0, 1.0])
}

/// VIC cross-damping rate `γ₁₂ = √(γ₀₁γ₀₂)·cos θ`.
pub fn cross_damping(gamma01: f64, gamma02: f64, theta: f64) -> Result<f64> {
    if !(gamma01 >= 0.0) {
        return Err(Error::invalid(
            "gamma01",
            format!("must be >= 0, got {gamma01}"),
        ));
    }
    if !(gamma02 >= 0.0) {
        return Err(Error::invalid(
            "gamma02",
            format!("must be >= 0, got {gamma02}"),
        ));
    }
    if !theta.is_finite() {
        return Err(Error::invalid("theta", "must be finite"));
    }
    Ok((gamma01 * gamma02).sqrt() * theta.cos())
}

/// Spontaneous decay rates and the dipole angle of the doublet transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub gamma01: f64,
    pub gamma02: f64,
    pub gamma03: f64,
    pub gamma_coll: f64,
    /// Angle between the `|1⟩→|0⟩` and `|2⟩→|0⟩` transition dipoles.
    pub theta: f64,
    /// Accept θ outside `[0, π/2]`.
    pub allow_wide_theta: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            gamma01: 5.8,
            gamma02: 2.2,
            gamma03: 0.1,
            gamma_coll: 0.0,
            theta: 0.0,
            allow_wide_theta: false,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma01", self.gamma01),
            ("gamma02", self.gamma02),
            ("gamma03", self.gamma03),
            ("gamma_coll", self.gamma_coll),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !self.allow_wide_theta && !(0.0..=FRAC_PI_2).contains(&self.theta) {
            return Err(Error::invalid(
                "theta",
                format!(
                    "must lie in [0, pi/2], got {} (set allow_wide_theta to override)",
                    self.theta
                ),
            ));
        }
        Ok(())
    }

    /// γ₁₂ for these parameters.
    pub fn gamma12(&self) -> f64 {
        (self.gamma01 * self.gamma02).sqrt() * self.theta.cos()
    }

    /// Total spontaneous decay rate out of level `i` (level 0 is stable).
    pub fn decay_out_of(&self, i: usize) -> f64 {
        match i {
            1 => self.gamma01,
            2 => self.gamma02,
            3 => self.gamma03,
            _ => 0.0,
        }
    }
}

/// `Γ_ij = ½(decay out of i + decay out of j) + γ_coll`.
pub fn coherence_decay_rate(i: usize, j: usize, params: &SystemParams) -> Result<f64> {
    check_level("i", i)?;
    check_level("j", j)?;
    if i == j {
        return Err(Error::invalid("j", "coherence decay rate needs i != j"));
    }
    Ok(0.5 * (params.decay_out_of(i) + params.decay_out_of(j)) + params.gamma_coll)
}

/// Time dependence of the detuning sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChirpProfile {
    /// `F(t) = tanh(t − center)`.
    #[default]
    Tanh,
    /// `F(t) = 1`.
    Constant,
}

impl ChirpProfile {
    pub fn name(&self) -> &'static str {
        match self {
            ChirpProfile::Tanh => "tanh",
            ChirpProfile::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(ChirpProfile::Tanh),
            "constant" => Some(ChirpProfile::Constant),
            _ => None,
        }
    }
}

/// Pulse pair and detuning configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveConfig {
    /// Peak Rabi frequency of the doublet drive G₁.
    pub g01: f64,
    /// Peak Rabi frequency of the metastable drive G₂.
    pub g02: f64,
    pub tau: f64,
    /// Center of the G₂ pulse (signed).
    pub t0: f64,
    /// Center of the G₁ pulse. Zero in every preset.
    pub t1: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub chirp_enabled: bool,
    pub chirp_profile: ChirpProfile,
    pub static_delta1: f64,
    pub static_delta2: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            g01: 0.9,
            g02: 0.3,
            tau: 4.0,
            t0: 10.0,
            t1: 0.0,
            chi1: 0.3,
            chi2: 0.2,
            chirp_enabled: false,
            chirp_profile: ChirpProfile::Tanh,
            static_delta1: 0.0,
            static_delta2: 0.0,
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(
                "tau",
                format!("must be finite and > 0, got {}", self.tau),
            ));
        }
        for (name, v) in [("g01", self.g01), ("g02", self.g02)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("t0", self.t0),
            ("t1", self.t1),
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("static_delta1", self.static_delta1),
            ("static_delta2", self.static_delta2),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Criteria for reading a steady state off the end of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyCriteria {
    pub window: f64,
    pub tol: f64,
}

impl Default for SteadyCriteria {
    fn default() -> Self {
        SteadyCriteria {
            window: 5.0,
            tol: 1e-4,
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub drive: DriveConfig,
    pub initial_state: DensityMatrix,
    pub t_start: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    pub rtol: f64,
    pub atol: f64,
    pub trace_tol: f64,
    pub pos_tol: f64,
    pub steady: SteadyCriteria,
}

impl Default for Scenario {
    fn default() -> Self {
        let drive = DriveConfig::default();
        Scenario {
            params: SystemParams::default(),
            drive,
            initial_state: initial_metastable(),
            t_start: -4.0 * drive.tau,
            t_end: 60.0,
            sample_interval: 0.05,
            rtol: 1e-8,
            atol: 1e-10,
            trace_tol: DEFAULT_TRACE_TOL,
            pos_tol: DEFAULT_POS_TOL,
            steady: SteadyCriteria::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.drive.validate()?;
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(Error::invalid(
                "t_end",
                format!(
                    "need finite t_start < t_end, got [{}, {}]",
                    self.t_start, self.t_end
                ),
            ));
        }
        for (name, v) in [
            ("sample_interval", self.sample_interval),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("trace_tol", self.trace_tol),
            ("pos_tol", self.pos_tol),
            ("steady_window", self.steady.window),
            ("steady_tol", self.steady.tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        let diag = validate_physicality(&self.initial_state, self.trace_tol, self.pos_tol);
        if !diag.is_physical() {
            return Err(Error::invalid(
                "initial_state",
                format!(
                    "not a physical state (trace error {:e}, min eigenvalue {:e})",
                    diag.trace_error, diag.min_eigenvalue
                ),
            ));
        }
        Ok(())
    }
}
