//! Gaussian pulse envelopes and chirped detunings.
//!
//! `G₁(t) = G₀₁ exp(−(t − t₁)²/τ²)` drives `|0⟩ ↔ {|1⟩, |2⟩}` and
//! `G₂(t) = G₀₂ exp(−(t − t₀)²/τ²)` drives `|0⟩ ↔ |3⟩`. With chirp on, the
//! detunings sweep as `Δᵢ(t) = Δᵢ_static + χᵢ F(t − centerᵢ)`, each sweep
//! centered on its own pulse.

use crate::model::{ChirpProfile, DriveConfig};

/// Fraction of peak below which a pulse counts as switched off.
pub const PULSE_OFF_FRACTION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[inline]
fn gaussian(t: f64, center: f64, tau: f64) -> f64 {
    let x = (t - center) / tau;
    (-x * x).exp()
}

pub fn pulse_envelopes(t: f64, drive: &DriveConfig) -> (f64, f64) {
    (
        drive.g01 * gaussian(t, drive.t1, drive.tau),
        drive.g02 * gaussian(t, drive.t0, drive.tau),
    )
}

#[inline]
fn profile(p: ChirpProfile, s: f64) -> f64 {
    match p {
        ChirpProfile::Tanh => s.tanh(),
        ChirpProfile::Constant => 1.0,
    }
}

pub fn chirped_detunings(t: f64, drive: &DriveConfig) -> (f64, f64) {
    if !drive.chirp_enabled {
        return (drive.static_delta1, drive.static_delta2);
    }
    (
        drive.static_delta1 + drive.chi1 * profile(drive.chirp_profile, t - drive.t1),
        drive.static_delta2 + drive.chi2 * profile(drive.chirp_profile, t - drive.t0),
    )
}

pub fn sample(t: f64, drive: &DriveConfig) -> DriveSample {
    let (g1, g2) = pulse_envelopes(t, drive);
    let (delta1, delta2) = chirped_detunings(t, drive);
    DriveSample {
        g1,
        g2,
        delta1,
        delta2,
    }
}

/// Earliest time after which every nonzero pulse stays below
/// [`PULSE_OFF_FRACTION`] of its peak. `-inf` when both amplitudes are zero.
pub fn pulses_off_after(drive: &DriveConfig) -> f64 {
    let half_width = drive.tau * (-PULSE_OFF_FRACTION.ln()).sqrt();
    let mut last = f64::NEG_INFINITY;
    if drive.g01 > 0.0 {
        last = last.max(drive.t1 + half_width);
    }
    if drive.g02 > 0.0 {
        last = last.max(drive.t0 + half_width);
    }
    last
}
