//! Rebuilds the rotating-frame equations from a lab-frame Hamiltonian and a
//! generic Lindblad dissipator, then compares against `master_rhs`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trapsim::liouvillian::master_rhs;
use trapsim::model::{DensityMatrix, DriveConfig, SystemParams};
use trapsim::selfcheck::random_density_matrix;

type M = Matrix4<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ket_bra(i: usize, j: usize) -> M {
    let mut m = M::zeros();
    m[(i, j)] = c(1.0);
    m
}

fn envelope(t: f64, amp: f64, center: f64, tau: f64) -> f64 {
    amp * (-((t - center) / tau).powi(2)).exp()
}

/// Lab-frame phase of each field: transition frequency times `t` plus the
/// integral of the detuning.
fn phases(t: f64, d: &DriveConfig, w1: f64, w3: f64) -> (f64, f64) {
    let chirp = |chi: f64, center: f64| {
        if d.chirp_enabled {
            chi * (t - center).cosh().ln()
        } else {
            0.0
        }
    };
    (
        w1 * t + d.static_delta1 * t + chirp(d.chi1, d.t1),
        w3 * t + d.static_delta2 * t + chirp(d.chi2, d.t0),
    )
}

fn phase_rates(t: f64, d: &DriveConfig, w1: f64, w3: f64) -> (f64, f64) {
    let chirp = |chi: f64, center: f64| {
        if d.chirp_enabled {
            chi * (t - center).tanh()
        } else {
            0.0
        }
    };
    (
        w1 + d.static_delta1 + chirp(d.chi1, d.t1),
        w3 + d.static_delta2 + chirp(d.chi2, d.t0),
    )
}

fn frame(ph1: f64, ph3: f64) -> M {
    let mut u = M::zeros();
    u[(0, 0)] = c(1.0);
    u[(1, 1)] = Complex64::from_polar(1.0, ph1);
    u[(2, 2)] = Complex64::from_polar(1.0, ph1);
    u[(3, 3)] = Complex64::from_polar(1.0, ph3);
    u
}

fn lab_hamiltonian(t: f64, d: &DriveConfig, w1: f64, w3: f64) -> M {
    let (ph1, ph3) = phases(t, d, w1, w3);
    let g1 = envelope(t, d.g01, d.t1, d.tau);
    let g2 = envelope(t, d.g02, d.t0, d.tau);
    let e1 = Complex64::from_polar(g1, -ph1);
    let e3 = Complex64::from_polar(g2, -ph3);
    let mut v = (ket_bra(1, 0) + ket_bra(2, 0)) * e1 + ket_bra(3, 0) * e3;
    v += v.adjoint();
    (ket_bra(1, 1) + ket_bra(2, 2)) * c(w1) + ket_bra(3, 3) * c(w3) - v
}

/// `Σ γᵢⱼ (σᵢ ρ σⱼ† − ½{σⱼ†σᵢ, ρ}) + Σ γ_c (Pₖ ρ Pₖ − ½{Pₖ, ρ})` with
/// `σᵢ = |0⟩⟨i|`.
fn generic_dissipator(rho: &M, p: &SystemParams) -> M {
    let sigma = [ket_bra(0, 1), ket_bra(0, 2), ket_bra(0, 3)];
    let g12 = (p.gamma01 * p.gamma02).sqrt() * p.theta.cos();
    let gamma = [
        [p.gamma01, g12, 0.0],
        [g12, p.gamma02, 0.0],
        [0.0, 0.0, p.gamma03],
    ];
    let mut out = M::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let si = &sigma[i];
            let sj_dag = sigma[j].adjoint();
            let n = sj_dag * si;
            out += (si * rho * sj_dag - (n * rho + rho * n) * c(0.5)) * c(gamma[i][j]);
        }
    }
    for k in 0..4 {
        let pk = ket_bra(k, k);
        out += (pk * rho * pk - (pk * rho + rho * pk) * c(0.5)) * c(p.gamma_coll);
    }
    out
}

/// `d/dt (U ρ_lab U†)` with `U = exp(i(Φ₁(P₁+P₂) + Φ₂P₃))`.
fn oracle_rhs(t: f64, rho_rot: &M, p: &SystemParams, d: &DriveConfig, w1: f64, w3: f64) -> M {
    let (ph1, ph3) = phases(t, d, w1, w3);
    let (r1, r3) = phase_rates(t, d, w1, w3);
    let u = frame(ph1, ph3);
    let rho_lab = u.adjoint() * rho_rot * u;
    let h = lab_hamiltonian(t, d, w1, w3);
    let lab_dot = (h * rho_lab - rho_lab * h) * (-I) + generic_dissipator(&rho_lab, p);
    let mut k = M::zeros();
    k[(1, 1)] = c(r1);
    k[(2, 2)] = c(r1);
    k[(3, 3)] = c(r3);
    let gen = k * I;
    u * lab_dot * u.adjoint() + gen * rho_rot - rho_rot * gen
}

fn random_setup(rng: &mut ChaCha8Rng) -> (f64, SystemParams, DriveConfig, f64, f64) {
    let p = SystemParams {
        gamma01: rng.random_range(0.5..8.0),
        gamma02: rng.random_range(0.5..8.0),
        gamma03: rng.random_range(0.0..0.5),
        gamma_coll: rng.random_range(0.0..0.5),
        theta: rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
        allow_wide_theta: false,
    };
    let d = DriveConfig {
        g01: rng.random_range(0.0..2.0),
        g02: rng.random_range(0.0..2.0),
        tau: rng.random_range(1.0..6.0),
        t0: rng.random_range(0.0..15.0),
        t1: rng.random_range(-5.0..5.0),
        chi1: rng.random_range(-1.0..1.0),
        chi2: rng.random_range(-1.0..1.0),
        chirp_enabled: rng.random_bool(0.7),
        static_delta1: rng.random_range(-1.0..1.0),
        static_delta2: rng.random_range(-1.0..1.0),
        ..DriveConfig::default()
    };
    let t = rng.random_range(-10.0..25.0);
    (
        t,
        p,
        d,
        rng.random_range(1.0..5.0),
        rng.random_range(1.0..5.0),
    )
}

#[test]
fn master_rhs_matches_lab_frame_derivation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let (t, p, d, w1, w3) = random_setup(&mut rng);
        let rank = rng.random_range(1..=4);
        let rho = random_density_matrix(&mut rng, rank);
        let expected = oracle_rhs(t, &rho.to_matrix(), &p, &d, w1, w3);
        let got = master_rhs(t, &rho, &p, &d).to_matrix();
        let diff = (got - expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    assert!(worst < 1e-11, "max deviation {worst:e}");
}

#[test]
fn generic_dissipator_is_the_rotating_frame_dissipator() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let (_, p, _, _, _) = random_setup(&mut rng);
        let rho = random_density_matrix(&mut rng, 4);
        let expected = generic_dissipator(&rho.to_matrix(), &p);
        let got = trapsim::liouvillian::dissipator_only(&rho, &p).to_matrix();
        let diff = (got - expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13, "deviation {diff:e}");
    }
}

#[test]
fn oracle_frame_is_consistent() {
    let d = DriveConfig::default();
    let u = frame(1.3, -0.4);
    let id = u * u.adjoint();
    assert!((id - M::identity()).iter().all(|z| z.norm() < 1e-15));
    let h = lab_hamiltonian(3.0, &d, 2.0, 4.0);
    assert!((h - h.adjoint()).iter().all(|z| z.norm() == 0.0));
    let rho = DensityMatrix::maximally_mixed().to_matrix();
    let tr: Complex64 = (0..4)
        .map(|k| generic_dissipator(&rho, &SystemParams::default())[(k, k)])
        .sum();
    assert!(tr.norm() < 1e-15);
}
