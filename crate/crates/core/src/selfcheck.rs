//! Built-in consistency checks behind the `validate` command, plus the random
//! state generator the tests share.

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiments::{chirped, unchirped};
use crate::integrator::integrate;
use crate::liouvillian::{coherent_only, dissipator_only, master_rhs};
use crate::model::{initial_metastable, DensityMatrix, DriveConfig, Scenario, SystemParams};
use crate::observables::dark_vector;

/// `A A† / Tr(A A†)` for a random complex `4 × rank` matrix `A`, so the result
/// has rank `rank` (clamped to 1..=4) with probability one.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> DensityMatrix {
    let rank = rank.clamp(1, 4);
    let mut a = SMatrix::<Complex64, 4, 4>::zeros();
    for i in 0..4 {
        for j in 0..rank {
            a[(i, j)] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let m: Matrix4<Complex64> = a * a.adjoint();
    let tr: f64 = (0..4).map(|k| m[(k, k)].re).sum();
    let mut rho = DensityMatrix::zeros();
    for i in 0..4 {
        rho.set_population(i, m[(i, i)].re / tr);
        for j in 0..i {
            rho.set_coherence(i, j, m[(i, j)] / tr);
        }
    }
    rho
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn random_drive(rng: &mut ChaCha8Rng) -> (f64, DriveConfig) {
    let d = DriveConfig {
        chirp_enabled: true,
        static_delta1: rng.random_range(-1.0..1.0),
        static_delta2: rng.random_range(-1.0..1.0),
        ..DriveConfig::default()
    };
    (rng.random_range(-10.0..25.0), d)
}

fn dark_state_invariance() -> Check {
    let p = SystemParams::default();
    let dark = DensityMatrix::pure(&dark_vector(&p).expect("default rates are positive"));
    let err = dissipator_only(&dark, &p).max_norm();
    check(
        "dark state invariance",
        err < 1e-12,
        format!("|D[ρ_A]| = {err:.2e}"),
    )
}

fn trace_and_hermiticity(rng: &mut ChaCha8Rng) -> Check {
    let p = SystemParams::default();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rank = rng.random_range(1..=4);
        let rho = random_density_matrix(rng, rank);
        let (t, d) = random_drive(rng);
        let dot = master_rhs(t, &rho, &p, &d);
        let herm = crate::model::hermiticity_defect(&dot.to_matrix());
        worst = worst.max(dot.trace().abs()).max(herm);
    }
    check(
        "trace and Hermiticity preserved",
        worst < 1e-12,
        format!("max |Tr ρ̇|, Hermiticity defect = {worst:.2e}"),
    )
}

fn split_consistency(rng: &mut ChaCha8Rng) -> Check {
    let p = SystemParams::default();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rho = random_density_matrix(rng, 4);
        let (t, d) = random_drive(rng);
        let full = master_rhs(t, &rho, &p, &d);
        let split = coherent_only(t, &rho, &d) + dissipator_only(&rho, &p);
        worst = worst.max(full.max_abs_diff(&split));
    }
    check(
        "coherent + dissipative split",
        worst < 1e-12,
        format!("max deviation {worst:.2e}"),
    )
}

fn analytic_decay() -> Check {
    let s = Scenario {
        drive: DriveConfig {
            g01: 0.0,
            g02: 0.0,
            ..DriveConfig::default()
        },
        t_start: 0.0,
        t_end: 20.0,
        ..Scenario::default()
    };
    match integrate(&s) {
        Ok(traj) => {
            let g = s.params.gamma03;
            let worst = traj
                .samples
                .iter()
                .map(|x| (x.state.population(3) - (-g * x.time).exp()).abs())
                .fold(0.0, f64::max);
            check(
                "analytic metastable decay",
                worst < 1e-7,
                format!("max error {worst:.2e}"),
            )
        }
        Err(e) => check("analytic metastable decay", false, e.to_string()),
    }
}

fn positivity_flow(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let s = Scenario {
            initial_state: random_density_matrix(rng, 1),
            t_end: 15.0,
            ..chirped()
        };
        match integrate(&s) {
            Ok(traj) => worst = worst.min(traj.stats.min_eigenvalue),
            Err(e) => return check("positivity from pure states", false, e.to_string()),
        }
    }
    check(
        "positivity from pure states",
        worst >= -1e-7,
        format!("min eigenvalue {worst:.2e}"),
    )
}

fn preset_physicality() -> Check {
    let mut parts = Vec::new();
    for (name, s) in [("unchirped", unchirped()), ("chirped", chirped())] {
        match integrate(&s) {
            Ok(traj) => parts.push(format!(
                "{name}: trace error {:.1e}, min eig {:.1e}",
                traj.stats.max_trace_error, traj.stats.min_eigenvalue
            )),
            Err(e) => return check("preset runs stay physical", false, format!("{name}: {e}")),
        }
    }
    check("preset runs stay physical", true, parts.join("; "))
}

fn initial_state_sane() -> Check {
    let rho = initial_metastable();
    let ok = rho.trace() == 1.0 && rho.min_eigenvalue() == 0.0 && rho.population(3) == 1.0;
    check(
        "metastable initial state",
        ok,
        format!("diag {:?}", rho.diagonal()),
    )
}

pub fn run_self_checks() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    vec![
        initial_state_sane(),
        dark_state_invariance(),
        trace_and_hermiticity(&mut rng),
        split_consistency(&mut rng),
        analytic_decay(),
        positivity_flow(&mut rng),
        preset_physicality(),
    ]
}
