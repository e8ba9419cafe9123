//! Figure presets and parameter sweeps.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::integrate;
use crate::model::{DriveConfig, Scenario};

pub const FIG6_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// What a preset or config file asks for.
#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Run(Scenario),
    Sweep(SweepSpec),
}

/// Resonant delayed-pulse run without chirp: θ = 0, G₀₁ = 0.9, G₀₂ = 0.3,
/// τ = 4, t₀ = 2.5τ, γ₀₁ = 5.8, γ₀₂ = 2.2, γ₀₃ = 0.1.
pub fn unchirped() -> Scenario {
    Scenario::default()
}

/// Same run with the tanh chirp on, χ₁ = 0.3 and χ₂ = 0.2.
pub fn chirped() -> Scenario {
    Scenario {
        drive: DriveConfig {
            chirp_enabled: true,
            chi1: 0.3,
            chi2: 0.2,
            ..DriveConfig::default()
        },
        ..Scenario::default()
    }
}

pub fn theta_sweep(points: usize) -> SweepSpec {
    SweepSpec {
        base: chirped(),
        axes: vec![SweepAxis {
            param: SweepParam::Theta,
            grid: Grid::Linspace {
                start: 0.0,
                stop: FRAC_PI_2,
                points,
            },
        }],
    }
}

pub fn preset(p: Preset) -> Job {
    match p {
        Preset::Fig2 | Preset::Fig3 => Job::Run(unchirped()),
        Preset::Fig4 | Preset::Fig5 => Job::Run(chirped()),
        Preset::Fig6 => Job::Sweep(theta_sweep(FIG6_POINTS)),
    }
}

/// Scalar knobs a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Theta,
    Gamma01,
    Gamma02,
    Gamma03,
    GammaColl,
    G01,
    G02,
    Tau,
    T0,
    Chi1,
    Chi2,
    StaticDelta1,
    StaticDelta2,
}

impl SweepParam {
    pub const ALL: [SweepParam; 13] = [
        SweepParam::Theta,
        SweepParam::Gamma01,
        SweepParam::Gamma02,
        SweepParam::Gamma03,
        SweepParam::GammaColl,
        SweepParam::G01,
        SweepParam::G02,
        SweepParam::Tau,
        SweepParam::T0,
        SweepParam::Chi1,
        SweepParam::Chi2,
        SweepParam::StaticDelta1,
        SweepParam::StaticDelta2,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            SweepParam::Theta => "theta",
            SweepParam::Gamma01 => "gamma01",
            SweepParam::Gamma02 => "gamma02",
            SweepParam::Gamma03 => "gamma03",
            SweepParam::GammaColl => "gamma_coll",
            SweepParam::G01 => "g01",
            SweepParam::G02 => "g02",
            SweepParam::Tau => "tau",
            SweepParam::T0 => "t0",
            SweepParam::Chi1 => "chi1",
            SweepParam::Chi2 => "chi2",
            SweepParam::StaticDelta1 => "static_delta1",
            SweepParam::StaticDelta2 => "static_delta2",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        SweepParam::ALL.into_iter().find(|p| p.key() == key)
    }

    pub fn apply(&self, s: &mut Scenario, v: f64) {
        match self {
            SweepParam::Theta => s.params.theta = v,
            SweepParam::Gamma01 => s.params.gamma01 = v,
            SweepParam::Gamma02 => s.params.gamma02 = v,
            SweepParam::Gamma03 => s.params.gamma03 = v,
            SweepParam::GammaColl => s.params.gamma_coll = v,
            SweepParam::G01 => s.drive.g01 = v,
            SweepParam::G02 => s.drive.g02 = v,
            SweepParam::Tau => s.drive.tau = v,
            SweepParam::T0 => s.drive.t0 = v,
            SweepParam::Chi1 => s.drive.chi1 = v,
            SweepParam::Chi2 => s.drive.chi2 = v,
            SweepParam::StaticDelta1 => s.drive.static_delta1 = v,
            SweepParam::StaticDelta2 => s.drive.static_delta2 = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// `points` evenly spaced values including both ends.
    Linspace {
        start: f64,
        stop: f64,
        points: usize,
    },
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Linspace {
                start,
                stop,
                points,
            } => match points {
                0 => vec![],
                1 => vec![*start],
                n => {
                    let step = (stop - start) / (*n - 1) as f64;
                    (0..*n)
                        .map(|k| {
                            if k + 1 == *n {
                                *stop
                            } else {
                                start + k as f64 * step
                            }
                        })
                        .collect()
                }
            },
            Grid::Values(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub grid: Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    /// Checks the axes and that every grid point yields a valid scenario.
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Validation {
                key: "sweep".into(),
                message: format!("need one or two swept parameters, got {}", self.axes.len()),
            });
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::Validation {
                key: self.axes[0].param.key().into(),
                message: "parameter swept twice".into(),
            });
        }
        for axis in &self.axes {
            let vals = axis.grid.values();
            if vals.is_empty() {
                return Err(Error::Validation {
                    key: axis.param.key().into(),
                    message: "empty grid".into(),
                });
            }
            if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
                return Err(Error::Validation {
                    key: axis.param.key().into(),
                    message: format!("non-finite grid value {bad}"),
                });
            }
        }
        for (values, scenario) in self.points() {
            scenario.validate().map_err(|e| Error::Validation {
                key: self
                    .axes
                    .iter()
                    .map(|a| a.param.key())
                    .collect::<Vec<_>>()
                    .join(","),
                message: format!("grid point {values:?}: {e}"),
            })?;
        }
        Ok(())
    }

    /// Grid points in row-major order (first axis outermost).
    pub fn points(&self) -> Vec<(Vec<f64>, Scenario)> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(|a| a.grid.values()).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; grids.len()];
        if grids.iter().any(|g| g.is_empty()) {
            return out;
        }
        loop {
            let values: Vec<f64> = idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect();
            let mut s = self.base.clone();
            for (axis, &v) in self.axes.iter().zip(&values) {
                axis.param.apply(&mut s, v);
            }
            out.push((values, s));
            // odometer increment, last axis fastest
            let mut k = grids.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < grids[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub p_doublet: f64,
    pub purity: f64,
    pub abs_rho21: f64,
    pub converged: bool,
    /// Set when the point failed to integrate or had no steady window.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub params: Vec<SweepParam>,
    pub rows: Vec<SweepRow>,
}

fn run_point(values: Vec<f64>, scenario: &Scenario) -> SweepRow {
    let failed = |values, msg: String| SweepRow {
        values,
        p_doublet: f64::NAN,
        purity: f64::NAN,
        abs_rho21: f64::NAN,
        converged: false,
        error: Some(msg),
    };
    match integrate(scenario) {
        Ok(traj) => match traj.steady {
            Some(st) => SweepRow {
                values,
                p_doublet: st.doublet_population,
                purity: st.doublet_purity,
                abs_rho21: st.abs_rho21,
                converged: st.converged,
                error: None,
            },
            None => failed(values, "run too short for a steady-state window".into()),
        },
        Err(e) => failed(values, e.to_string()),
    }
}

/// Runs every grid point. `threads == 1` runs inline; `0` uses rayon's
/// default pool size. Row order always follows [`SweepSpec::points`].
pub fn sweep(spec: &SweepSpec, threads: usize) -> Result<SweepTable> {
    spec.validate()?;
    let points = spec.points();
    let rows: Vec<SweepRow> = if threads == 1 {
        points.into_iter().map(|(v, s)| run_point(v, &s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| {
            points
                .into_par_iter()
                .map(|(v, s)| run_point(v, &s))
                .collect()
        })
    };
    Ok(SweepTable {
        params: spec.axes.iter().map(|a| a.param).collect(),
        rows,
    })
}
