//! Populations, coherences and doublet diagnostics read off a density matrix.

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemParams, LEVELS};
use num_complex::Complex64;

/// Everything recorded at one sample time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRecord {
    pub time: f64,
    pub populations: [f64; LEVELS],
    pub c10: Complex64,
    pub c20: Complex64,
    pub c21: Complex64,
    pub c30: Complex64,
    pub c31: Complex64,
    pub c32: Complex64,
    pub doublet_purity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl ObservableRecord {
    pub fn of(time: f64, rho: &DensityMatrix) -> Self {
        ObservableRecord {
            time,
            populations: populations(rho),
            c10: rho.get(1, 0),
            c20: rho.get(2, 0),
            c21: rho.get(2, 1),
            c30: rho.get(3, 0),
            c31: rho.get(3, 1),
            c32: rho.get(3, 2),
            doublet_purity: doublet_purity(rho),
            trace_error: (rho.trace() - 1.0).abs(),
            min_eigenvalue: rho.min_eigenvalue(),
        }
    }

    pub fn doublet_population(&self) -> f64 {
        self.populations[1] + self.populations[2]
    }

    /// The four coherences that couple the doublet to `|0⟩` and `|3⟩`.
    pub fn cross_manifold_coherences(&self) -> [Complex64; 4] {
        [self.c10, self.c20, self.c31, self.c32]
    }

    pub fn is_finite(&self) -> bool {
        let z = [self.c10, self.c20, self.c21, self.c30, self.c31, self.c32];
        self.populations.iter().all(|p| p.is_finite())
            && z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && self.doublet_purity.is_finite()
            && self.trace_error.is_finite()
            && self.min_eigenvalue.is_finite()
    }
}

pub fn populations(rho: &DensityMatrix) -> [f64; LEVELS] {
    rho.diagonal()
}

pub fn coherence(rho: &DensityMatrix, i: usize, j: usize) -> Result<Complex64> {
    if i >= LEVELS || j >= LEVELS {
        return Err(Error::invalid(
            "i",
            format!("level pair ({i}, {j}) out of range 0..4"),
        ));
    }
    if i == j {
        return Err(Error::invalid("j", "coherence needs i != j"));
    }
    Ok(rho.get(i, j))
}

/// `Tr(B²)` for the unnormalized doublet block `B = [[ρ₁₁, ρ₁₂], [ρ₂₁, ρ₂₂]]`.
pub fn doublet_purity(rho: &DensityMatrix) -> f64 {
    let (p1, p2) = (rho.population(1), rho.population(2));
    p1 * p1 + p2 * p2 + 2.0 * rho.get(2, 1).norm_sqr()
}

/// Purity of the doublet block after rescaling it to unit trace. `None` when
/// the block is empty.
pub fn doublet_purity_normalized(rho: &DensityMatrix) -> Option<f64> {
    let n = rho.population(1) + rho.population(2);
    (n > 0.0).then(|| doublet_purity(rho) / (n * n))
}

fn doublet_norm(params: &SystemParams) -> Result<f64> {
    let s = params.gamma01 + params.gamma02;
    if !(s > 0.0) {
        return Err(Error::invalid(
            "gamma01",
            "dark state needs gamma01 + gamma02 > 0",
        ));
    }
    Ok(s.sqrt())
}

/// `|A⟩ = (√γ₀₂|1⟩ − √γ₀₁|2⟩)/√(γ₀₁+γ₀₂)`, the null vector of the doublet
/// decay matrix at θ = 0.
pub fn dark_vector(params: &SystemParams) -> Result<[Complex64; LEVELS]> {
    let n = doublet_norm(params)?;
    Ok([
        Complex64::new(0.0, 0.0),
        Complex64::new(params.gamma02.sqrt() / n, 0.0),
        Complex64::new(-params.gamma01.sqrt() / n, 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// `|B⟩ = (√γ₀₁|1⟩ + √γ₀₂|2⟩)/√(γ₀₁+γ₀₂)`, orthogonal to the dark vector.
pub fn bright_vector(params: &SystemParams) -> Result<[Complex64; LEVELS]> {
    let n = doublet_norm(params)?;
    Ok([
        Complex64::new(0.0, 0.0),
        Complex64::new(params.gamma01.sqrt() / n, 0.0),
        Complex64::new(params.gamma02.sqrt() / n, 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

pub fn dark_state_overlap(rho: &DensityMatrix, params: &SystemParams) -> Result<f64> {
    Ok(rho.expectation(&dark_vector(params)?))
}

pub fn bright_state_overlap(rho: &DensityMatrix, params: &SystemParams) -> Result<f64> {
    Ok(rho.expectation(&bright_vector(params)?))
}
