//! Right-hand side of the rotating-frame master equation.
//!
//! The coherent part is `−i[H, ρ]` with
//! `H = −Δ₁(|1⟩⟨1| + |2⟩⟨2|) − Δ₂|3⟩⟨3| − (G₁|1⟩⟨0| + G₁|2⟩⟨0| + G₂|3⟩⟨0| + h.c.)`.
//! The dissipative part has independent decay `|3⟩ → |0⟩` at γ₀₃ and a
//! correlated doublet channel whose decay matrix is `[[γ₀₁, γ₁₂], [γ₁₂, γ₀₂]]`
//! with `γ₁₂ = √(γ₀₁γ₀₂) cos θ`. Every coherence `ρ_ij` additionally
//! dephases at γ_coll.
//!
//! The population equations carry the drive terms as `i(G ρ₀ᵢ − G* ρᵢ₀)` and
//! the doublet coherence decays as `−Γ₂₁ ρ₂₁`. `ρ̇₀₀` closes the trace.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::drive::{self, DriveSample};
use crate::model::{DensityMatrix, DriveConfig, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Decay constants appearing in the equations of motion.
#[derive(Clone, Copy, Debug)]
struct Rates {
    g01: f64,
    g02: f64,
    g03: f64,
    half_g12: f64,
    big10: f64,
    big20: f64,
    big21: f64,
    big30: f64,
    big31: f64,
    big32: f64,
}

impl Rates {
    fn new(p: &SystemParams) -> Self {
        let c = p.gamma_coll;
        Rates {
            g01: p.gamma01,
            g02: p.gamma02,
            g03: p.gamma03,
            half_g12: 0.5 * p.gamma12(),
            big10: 0.5 * p.gamma01 + c,
            big20: 0.5 * p.gamma02 + c,
            big21: 0.5 * (p.gamma01 + p.gamma02) + c,
            big30: 0.5 * p.gamma03 + c,
            big31: 0.5 * (p.gamma03 + p.gamma01) + c,
            big32: 0.5 * (p.gamma03 + p.gamma02) + c,
        }
    }
}

/// `dρ/dt` at time `t`. The result is Hermitian by construction and its
/// trace vanishes up to one rounding of the final sum.
pub fn master_rhs(
    t: f64,
    rho: &DensityMatrix,
    params: &SystemParams,
    drive_cfg: &DriveConfig,
) -> DensityMatrix {
    let s = drive::sample(t, drive_cfg);
    rhs_with(&s, rho, &Rates::new(params))
}

fn rhs_with(s: &DriveSample, rho: &DensityMatrix, k: &Rates) -> DensityMatrix {
    let g1 = Complex64::new(s.g1, 0.0);
    let g2 = Complex64::new(s.g2, 0.0);
    let (d1, d2) = (s.delta1, s.delta2);
    let r = |i, j| rho.get(i, j);
    let (p0, p1, p2, p3) = (r(0, 0), r(1, 1), r(2, 2), r(3, 3));

    let dot11 =
        -k.g01 * p1 - k.half_g12 * (r(1, 2) + r(2, 1)) + I * (g1 * r(0, 1) - g1.conj() * r(1, 0));
    let dot22 =
        -k.g02 * p2 - k.half_g12 * (r(1, 2) + r(2, 1)) + I * (g1 * r(0, 2) - g1.conj() * r(2, 0));
    let dot33 = -k.g03 * p3 + I * (g2 * r(0, 3) - g2.conj() * r(3, 0));

    let dot21 =
        -k.big21 * r(2, 1) - k.half_g12 * (p1 + p2) + I * (g1 * r(0, 1) - g1.conj() * r(2, 0));
    let dot10 = (I * d1 - k.big10) * r(1, 0) - k.half_g12 * r(2, 0) + I * g1 * (p0 - p1)
        - I * g1 * r(1, 2)
        - I * g2 * r(1, 3);
    let dot20 = (I * d1 - k.big20) * r(2, 0) - k.half_g12 * r(1, 0) + I * g1 * (p0 - p2)
        - I * g1 * r(2, 1)
        - I * g2 * r(2, 3);
    let dot30 =
        (I * d2 - k.big30) * r(3, 0) + I * g2 * (p0 - p3) - I * g1 * r(3, 1) - I * g1 * r(3, 2);
    let dot31 = (I * (d2 - d1) - k.big31) * r(3, 1) - k.half_g12 * r(3, 2) + I * g2 * r(0, 1)
        - I * g1.conj() * r(3, 0);
    let dot32 = (I * (d2 - d1) - k.big32) * r(3, 2) - k.half_g12 * r(3, 1) + I * g2 * r(0, 2)
        - I * g1.conj() * r(3, 0);

    let (a, b, c) = (dot11.re, dot22.re, dot33.re);
    let mut out = DensityMatrix::from_diagonal([-(a + b + c), a, b, c]);
    out.set_coherence(1, 0, dot10);
    out.set_coherence(2, 0, dot20);
    out.set_coherence(2, 1, dot21);
    out.set_coherence(3, 0, dot30);
    out.set_coherence(3, 1, dot31);
    out.set_coherence(3, 2, dot32);
    out
}

/// Decay and dephasing terms only.
pub fn dissipator_only(rho: &DensityMatrix, params: &SystemParams) -> DensityMatrix {
    let k = Rates::new(params);
    let r = |i, j| rho.get(i, j);
    let h = k.half_g12;
    let cross = (r(1, 2) + r(2, 1)).re;

    let dot11 = -k.g01 * r(1, 1).re - h * cross;
    let dot22 = -k.g02 * r(2, 2).re - h * cross;
    let dot33 = -k.g03 * r(3, 3).re;
    let mut out = DensityMatrix::from_diagonal([-(dot11 + dot22 + dot33), dot11, dot22, dot33]);
    out.set_coherence(1, 0, -k.big10 * r(1, 0) - h * r(2, 0));
    out.set_coherence(2, 0, -k.big20 * r(2, 0) - h * r(1, 0));
    out.set_coherence(2, 1, -k.big21 * r(2, 1) - h * (r(1, 1) + r(2, 2)));
    out.set_coherence(3, 0, -k.big30 * r(3, 0));
    out.set_coherence(3, 1, -k.big31 * r(3, 1) - h * r(3, 2));
    out.set_coherence(3, 2, -k.big32 * r(3, 2) - h * r(3, 1));
    out
}

/// Rotating-frame Hamiltonian for a drive sample.
pub fn rotating_frame_hamiltonian(s: &DriveSample) -> Matrix4<Complex64> {
    let mut h = Matrix4::<Complex64>::zeros();
    h[(1, 1)] = Complex64::new(-s.delta1, 0.0);
    h[(2, 2)] = Complex64::new(-s.delta1, 0.0);
    h[(3, 3)] = Complex64::new(-s.delta2, 0.0);
    let g1 = Complex64::new(-s.g1, 0.0);
    let g2 = Complex64::new(-s.g2, 0.0);
    h[(1, 0)] = g1;
    h[(2, 0)] = g1;
    h[(3, 0)] = g2;
    h[(0, 1)] = g1.conj();
    h[(0, 2)] = g1.conj();
    h[(0, 3)] = g2.conj();
    h
}

/// Drive and detuning terms only, `−i[H(t), ρ]`.
pub fn coherent_only(t: f64, rho: &DensityMatrix, drive_cfg: &DriveConfig) -> DensityMatrix {
    let h = rotating_frame_hamiltonian(&drive::sample(t, drive_cfg));
    let m = rho.to_matrix();
    let comm = (h * m - m * h) * (-I);
    let mut out = DensityMatrix::zeros();
    // Lower triangle only; the commutator of Hermitian matrices is anti-Hermitian
    // so −i[H, ρ] is Hermitian.
    let (a, b, c) = (comm[(1, 1)].re, comm[(2, 2)].re, comm[(3, 3)].re);
    out.set_population(0, -(a + b + c));
    out.set_population(1, a);
    out.set_population(2, b);
    out.set_population(3, c);
    for &(i, j) in crate::model::LOWER_PAIRS.iter() {
        out.set_coherence(i, j, comm[(i, j)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfcheck::random_density_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn fields_off() -> DriveConfig {
        DriveConfig {
            g01: 0.0,
            g02: 0.0,
            ..Default::default()
        }
    }

    fn dark_state(p: &SystemParams) -> DensityMatrix {
        let n = (p.gamma01 + p.gamma02).sqrt();
        let psi = [
            Complex64::new(0.0, 0.0),
            Complex64::new(p.gamma02.sqrt() / n, 0.0),
            Complex64::new(-p.gamma01.sqrt() / n, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        DensityMatrix::pure(&psi)
    }

    #[test]
    fn undriven_ground_state_is_stationary() {
        let rho = DensityMatrix::projector(0).unwrap();
        let d = master_rhs(0.3, &rho, &SystemParams::default(), &fields_off());
        assert_eq!(d.max_norm(), 0.0);
    }

    #[test]
    fn metastable_single_channel_decay() {
        let p = SystemParams::default();
        let d = master_rhs(
            0.0,
            &DensityMatrix::projector(3).unwrap(),
            &p,
            &fields_off(),
        );
        assert_eq!(d.population(3), -0.1);
        assert_eq!(d.population(0), 0.1);
        let mut rest = d;
        rest.set_population(0, 0.0);
        rest.set_population(3, 0.0);
        assert_eq!(rest.max_norm(), 0.0);
    }

    #[test]
    fn dark_state_example_values() {
        let p = SystemParams::default();
        let rho = dark_state(&p);
        let s = p.gamma01 + p.gamma02;
        assert!((rho.population(1) - p.gamma02 / s).abs() < 1e-15);
        assert!((rho.population(2) - p.gamma01 / s).abs() < 1e-15);
        assert!((rho.get(2, 1).re + (p.gamma01 * p.gamma02).sqrt() / s).abs() < 1e-15);
        let d = master_rhs(4.0, &rho, &p, &fields_off());
        assert!(d.max_norm() < 1e-12, "{}", d.max_norm());
    }

    #[test]
    fn dark_state_not_stationary_without_full_vic() {
        for theta in [0.3, FRAC_PI_2] {
            let p = SystemParams {
                theta,
                ..Default::default()
            };
            let d = master_rhs(4.0, &dark_state(&p), &p, &fields_off());
            assert!(d.max_norm() > 1e-3, "theta {theta}");
        }
    }

    #[test]
    fn dissipator_on_mixed_state_without_vic() {
        let p = SystemParams {
            theta: FRAC_PI_2,
            ..Default::default()
        };
        let d = dissipator_only(&DensityMatrix::maximally_mixed(), &p);
        let tol = 1e-15;
        assert!((d.population(1) + 5.8 / 4.0).abs() < tol);
        assert!((d.population(2) + 2.2 / 4.0).abs() < tol);
        assert!((d.population(3) + 0.1 / 4.0).abs() < tol);
        assert!((d.population(0) - 8.1 / 4.0).abs() < tol);
        for &(i, j) in crate::model::LOWER_PAIRS.iter() {
            assert!(d.get(i, j).norm() < tol);
        }
    }

    #[test]
    fn split_reproduces_full_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = SystemParams {
            theta: 0.4,
            gamma_coll: 0.15,
            ..Default::default()
        };
        let drive = DriveConfig {
            chirp_enabled: true,
            static_delta1: 0.2,
            static_delta2: -0.35,
            ..Default::default()
        };
        for n in 0..100 {
            let rho = random_density_matrix(&mut rng, 4);
            let t = -8.0 + 0.23 * n as f64;
            let full = master_rhs(t, &rho, &params, &drive);
            let coh = coherent_only(t, &rho, &drive);
            let split = dissipator_only(&rho, &params) + coh;
            assert!(full.max_abs_diff(&split) < 1e-12);
            assert!(coh.trace().abs() < 1e-14);
        }
    }

    #[test]
    fn trace_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = SystemParams {
            theta: 0.2,
            ..Default::default()
        };
        let drive = DriveConfig {
            chirp_enabled: true,
            ..Default::default()
        };
        for n in 0..50 {
            let t = 0.4 * n as f64 - 6.0;
            let a = random_density_matrix(&mut rng, 4);
            let b = random_density_matrix(&mut rng, 2);
            let (alpha, beta) = (0.37, -1.6);
            let lhs = master_rhs(t, &(a * alpha + b * beta), &params, &drive);
            let rhs = master_rhs(t, &a, &params, &drive) * alpha
                + master_rhs(t, &b, &params, &drive) * beta;
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            assert!(master_rhs(t, &a, &params, &drive).trace().abs() < 1e-14);
        }
    }

    #[test]
    fn zero_eigenvalue_does_not_flow_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for theta in [0.0, 0.3, 1.0, FRAC_PI_2] {
            let params = SystemParams {
                theta,
                gamma_coll: 0.05,
                ..Default::default()
            };
            for _ in 0..50 {
                let rho = random_density_matrix(&mut rng, 3);
                let eig = rho.to_matrix().symmetric_eigen();
                let (k, _) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                let v = eig.eigenvectors.column(k);
                let psi = [v[0], v[1], v[2], v[3]];
                let d = master_rhs(0.0, &rho, &params, &fields_off());
                assert!(d.expectation(&psi) >= -1e-12);
            }
        }
    }
}
