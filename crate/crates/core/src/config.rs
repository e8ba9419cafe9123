//! Flat `key = value` config files with `[section]` headers.
//!
//! ```text
//! # fig4-style run
//! [decay]
//! gamma01 = 5.8
//! theta = 0.0
//!
//! [chirp]
//! enabled = true
//! chi1 = 0.3
//!
//! [sweep]
//! theta = linspace(0.0, 1.5707963267948966, 64)
//! ```
//!
//! Sections: `[decay]`, `[drive]`, `[chirp]`, `[integration]`, `[sweep]` and
//! `[output]`. Keys that appear before the first header are looked up by
//! name in the non-sweep sections. Unknown or repeated keys are errors.
//! Omitted keys keep the unchirped preset values, and an omitted `t_start`
//! becomes `−4τ`. Any key in `[sweep]` turns the file into a sweep; its
//! value is either `linspace(start, stop, points)` or a comma-separated
//! list.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::{Grid, Job, SweepAxis, SweepParam, SweepSpec};
use crate::model::{ChirpProfile, DensityMatrix, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputSettings {
    pub format: Option<OutputFormat>,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub job: Job,
    pub output: OutputSettings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Decay,
    Drive,
    Chirp,
    Integration,
    Sweep,
    Output,
}

impl Section {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "decay" => Section::Decay,
            "drive" => Section::Drive,
            "chirp" => Section::Chirp,
            "integration" => Section::Integration,
            "sweep" => Section::Sweep,
            "output" => Section::Output,
            _ => return None,
        })
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Section::Decay => &[
                "gamma01",
                "gamma02",
                "gamma03",
                "gamma_coll",
                "theta",
                "allow_wide_theta",
            ],
            Section::Drive => &[
                "g01",
                "g02",
                "tau",
                "t0",
                "t1",
                "static_delta1",
                "static_delta2",
            ],
            Section::Chirp => &["enabled", "chi1", "chi2", "profile"],
            Section::Integration => &[
                "t_start",
                "t_end",
                "sample_interval",
                "rtol",
                "atol",
                "trace_tol",
                "pos_tol",
                "initial",
                "steady_window",
                "steady_tol",
            ],
            Section::Sweep => &[],
            Section::Output => &["format", "path"],
        }
    }

    fn owning(key: &str) -> Option<Self> {
        [
            Section::Decay,
            Section::Drive,
            Section::Chirp,
            Section::Integration,
            Section::Output,
        ]
        .into_iter()
        .find(|s| s.keys().contains(&key))
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("`{key}`: expected a number, got `{v}`")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_error(
            line,
            format!("`{key}`: expected true or false, got `{v}`"),
        )),
    }
}

fn parse_grid(line: usize, key: &str, v: &str) -> Result<Grid> {
    if let Some(inner) = v
        .strip_prefix("linspace(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(parse_error(
                line,
                format!("`{key}`: linspace takes (start, stop, points)"),
            ));
        }
        let points = parts[2]
            .parse::<usize>()
            .map_err(|_| parse_error(line, format!("`{key}`: bad point count `{}`", parts[2])))?;
        return Ok(Grid::Linspace {
            start: number(line, key, parts[0])?,
            stop: number(line, key, parts[1])?,
            points,
        });
    }
    let values = v
        .split(',')
        .map(|p| number(line, key, p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Grid::Values(values))
}

fn parse_initial(line: usize, v: &str) -> Result<DensityMatrix> {
    match v {
        "metastable" => return Ok(crate::model::initial_metastable()),
        "ground" => return DensityMatrix::projector(0),
        "mixed" => return Ok(DensityMatrix::maximally_mixed()),
        _ => {}
    }
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 4 {
        return Err(parse_error(
            line,
            format!("`initial`: expected metastable, ground, mixed or four populations, got `{v}`"),
        ));
    }
    let mut diag = [0.0; 4];
    for (d, p) in diag.iter_mut().zip(parts) {
        *d = number(line, "initial", p)?;
    }
    Ok(DensityMatrix::from_diagonal(diag))
}

fn strip_comment(raw: &str) -> &str {
    match raw.find(['#', ';']) {
        Some(i) => &raw[..i],
        None => raw,
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut s = Scenario::default();
    let mut output = OutputSettings::default();
    let mut axes: Vec<SweepAxis> = Vec::new();
    let mut seen: HashSet<(Option<&'static str>, String)> = HashSet::new();
    let mut saw_sweep_header = false;
    let mut t_start_set = false;
    let mut section: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, format!("malformed section header `{content}`")))?
                .trim();
            let sec = Section::from_name(name)
                .ok_or_else(|| parse_error(line, format!("unknown section `[{name}]`")))?;
            saw_sweep_header |= sec == Section::Sweep;
            section = Some(sec);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(parse_error(line, "missing key before `=`"));
        }

        let sec = match section {
            Some(sec) => sec,
            None => Section::owning(key)
                .ok_or_else(|| parse_error(line, format!("unknown key `{key}`")))?,
        };
        if sec == Section::Sweep {
            let param = SweepParam::from_key(key)
                .ok_or_else(|| parse_error(line, format!("`{key}` cannot be swept")))?;
            if axes.iter().any(|a| a.param == param) {
                return Err(parse_error(line, format!("duplicate sweep key `{key}`")));
            }
            axes.push(SweepAxis {
                param,
                grid: parse_grid(line, key, value)?,
            });
            continue;
        }
        if !sec.keys().contains(&key) {
            return Err(parse_error(
                line,
                format!("unknown key `{key}` in this section"),
            ));
        }
        if !seen.insert((None, key.to_string())) {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }

        let num = || number(line, key, value);
        match key {
            "gamma01" => s.params.gamma01 = num()?,
            "gamma02" => s.params.gamma02 = num()?,
            "gamma03" => s.params.gamma03 = num()?,
            "gamma_coll" => s.params.gamma_coll = num()?,
            "theta" => s.params.theta = num()?,
            "allow_wide_theta" => s.params.allow_wide_theta = boolean(line, key, value)?,
            "g01" => s.drive.g01 = num()?,
            "g02" => s.drive.g02 = num()?,
            "tau" => s.drive.tau = num()?,
            "t0" => s.drive.t0 = num()?,
            "t1" => s.drive.t1 = num()?,
            "static_delta1" => s.drive.static_delta1 = num()?,
            "static_delta2" => s.drive.static_delta2 = num()?,
            "enabled" => s.drive.chirp_enabled = boolean(line, key, value)?,
            "chi1" => s.drive.chi1 = num()?,
            "chi2" => s.drive.chi2 = num()?,
            "profile" => {
                s.drive.chirp_profile = ChirpProfile::parse(value).ok_or_else(|| {
                    parse_error(
                        line,
                        format!("`profile`: expected tanh or constant, got `{value}`"),
                    )
                })?
            }
            "t_start" => {
                s.t_start = num()?;
                t_start_set = true;
            }
            "t_end" => s.t_end = num()?,
            "sample_interval" => s.sample_interval = num()?,
            "rtol" => s.rtol = num()?,
            "atol" => s.atol = num()?,
            "trace_tol" => s.trace_tol = num()?,
            "pos_tol" => s.pos_tol = num()?,
            "initial" => s.initial_state = parse_initial(line, value)?,
            "steady_window" => s.steady.window = num()?,
            "steady_tol" => s.steady.tol = num()?,
            "format" => {
                output.format = Some(OutputFormat::parse(value).ok_or_else(|| {
                    parse_error(
                        line,
                        format!("`format`: expected csv or json, got `{value}`"),
                    )
                })?)
            }
            "path" => output.path = Some(PathBuf::from(value)),
            _ => unreachable!("key table and match arms disagree on `{key}`"),
        }
    }

    if !t_start_set {
        s.t_start = -4.0 * s.drive.tau;
    }
    s.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Validation {
            key: if name == "initial_state" {
                "initial"
            } else {
                name
            }
            .to_string(),
            message: reason,
        },
        other => other,
    })?;

    let job = if saw_sweep_header {
        let spec = SweepSpec { base: s, axes };
        spec.validate()?;
        Job::Sweep(spec)
    } else {
        Job::Run(s)
    };
    Ok(Config { job, output })
}

fn fmt_initial(rho: &DensityMatrix) -> String {
    if *rho == crate::model::initial_metastable() {
        "metastable".into()
    } else if Ok(*rho) == DensityMatrix::projector(0) {
        "ground".into()
    } else if *rho == DensityMatrix::maximally_mixed() {
        "mixed".into()
    } else {
        let d = rho.diagonal();
        format!("{:?}, {:?}, {:?}, {:?}", d[0], d[1], d[2], d[3])
    }
}

fn fmt_grid(g: &Grid) -> String {
    match g {
        Grid::Linspace {
            start,
            stop,
            points,
        } => format!("linspace({start:?}, {stop:?}, {points})"),
        Grid::Values(v) => v
            .iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

/// Writes every key explicitly. Initial states other than the three named
/// ones are written as their diagonal.
pub fn serialize_config(cfg: &Config) -> String {
    let (s, axes) = match &cfg.job {
        Job::Run(s) => (s, None),
        Job::Sweep(spec) => (&spec.base, Some(&spec.axes)),
    };
    let mut out = String::new();
    let p = &s.params;
    let d = &s.drive;
    let _ = writeln!(out, "[decay]");
    let _ = writeln!(out, "gamma01 = {:?}", p.gamma01);
    let _ = writeln!(out, "gamma02 = {:?}", p.gamma02);
    let _ = writeln!(out, "gamma03 = {:?}", p.gamma03);
    let _ = writeln!(out, "gamma_coll = {:?}", p.gamma_coll);
    let _ = writeln!(out, "theta = {:?}", p.theta);
    let _ = writeln!(out, "allow_wide_theta = {}", p.allow_wide_theta);
    let _ = writeln!(out, "\n[drive]");
    let _ = writeln!(out, "g01 = {:?}", d.g01);
    let _ = writeln!(out, "g02 = {:?}", d.g02);
    let _ = writeln!(out, "tau = {:?}", d.tau);
    let _ = writeln!(out, "t0 = {:?}", d.t0);
    let _ = writeln!(out, "t1 = {:?}", d.t1);
    let _ = writeln!(out, "static_delta1 = {:?}", d.static_delta1);
    let _ = writeln!(out, "static_delta2 = {:?}", d.static_delta2);
    let _ = writeln!(out, "\n[chirp]");
    let _ = writeln!(out, "enabled = {}", d.chirp_enabled);
    let _ = writeln!(out, "chi1 = {:?}", d.chi1);
    let _ = writeln!(out, "chi2 = {:?}", d.chi2);
    let _ = writeln!(out, "profile = {}", d.chirp_profile.name());
    let _ = writeln!(out, "\n[integration]");
    let _ = writeln!(out, "t_start = {:?}", s.t_start);
    let _ = writeln!(out, "t_end = {:?}", s.t_end);
    let _ = writeln!(out, "sample_interval = {:?}", s.sample_interval);
    let _ = writeln!(out, "rtol = {:?}", s.rtol);
    let _ = writeln!(out, "atol = {:?}", s.atol);
    let _ = writeln!(out, "trace_tol = {:?}", s.trace_tol);
    let _ = writeln!(out, "pos_tol = {:?}", s.pos_tol);
    let _ = writeln!(out, "initial = {}", fmt_initial(&s.initial_state));
    let _ = writeln!(out, "steady_window = {:?}", s.steady.window);
    let _ = writeln!(out, "steady_tol = {:?}", s.steady.tol);
    if let Some(axes) = axes {
        let _ = writeln!(out, "\n[sweep]");
        for a in axes {
            let _ = writeln!(out, "{} = {}", a.param.key(), fmt_grid(&a.grid));
        }
    }
    if cfg.output.format.is_some() || cfg.output.path.is_some() {
        let _ = writeln!(out, "\n[output]");
        if let Some(f) = cfg.output.format {
            let _ = writeln!(out, "format = {}", f.name());
        }
        if let Some(path) = &cfg.output.path {
            let _ = writeln!(out, "path = {}", path.display());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{preset, Preset};

    fn run(cfg: &Config) -> &Scenario {
        match &cfg.job {
            Job::Run(s) => s,
            Job::Sweep(_) => panic!("expected a run"),
        }
    }

    #[test]
    fn empty_config_is_fig2() {
        let cfg = parse_config("").unwrap();
        assert_eq!(Job::Run(run(&cfg).clone()), preset(Preset::Fig2));
        let s = run(&cfg);
        assert_eq!(s.params.gamma01, 5.8);
        assert_eq!(s.params.gamma02, 2.2);
        assert_eq!(s.params.gamma03, 0.1);
        assert_eq!(s.params.theta, 0.0);
        assert!(!s.drive.chirp_enabled);
    }

    #[test]
    fn theta_out_of_range() {
        match parse_config("theta = -0.1") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "theta"),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("[decay]\ntheta = 2.0\nallow_wide_theta = true\n").is_ok());
    }

    #[test]
    fn single_key_round_trip() {
        let cfg = parse_config("gamma01 = 5.8").unwrap();
        let again = parse_config(&serialize_config(&cfg)).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(run(&again).params.gamma01, 5.8);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[decay]\ngamma01 = 1.0\n\ngamma99 = 2\n";
        assert!(matches!(
            parse_config(text),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_config("[decay]\ngamma01 = x"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("[nope]"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("[drive]\ntheta = 0"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("g01 = 1\n[drive]\ng01 = 2"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("just words"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("[sweep]\nrtol = 1, 2"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn t_start_follows_tau() {
        let cfg = parse_config("[drive]\ntau = 2.5").unwrap();
        assert_eq!(run(&cfg).t_start, -10.0);
        let cfg = parse_config("[drive]\ntau = 2.5\n[integration]\nt_start = -3").unwrap();
        assert_eq!(run(&cfg).t_start, -3.0);
    }

    #[test]
    fn sweep_section() {
        let text =
            "[chirp]\nenabled = true  # on\n[sweep]\ntheta = linspace(0, 1.5707963267948966, 64)\n";
        let cfg = parse_config(text).unwrap();
        let Job::Sweep(spec) = &cfg.job else { panic!() };
        assert_eq!(Job::Sweep(spec.clone()), preset(Preset::Fig6));
        let cfg = parse_config("[sweep]\ng01 = 0.5, 0.9\ntheta = 0.1").unwrap();
        let Job::Sweep(spec) = &cfg.job else { panic!() };
        assert_eq!(spec.axes.len(), 2);
        assert_eq!(spec.axes[0].grid, Grid::Values(vec![0.5, 0.9]));
        assert!(matches!(
            parse_config("[sweep]\n"),
            Err(Error::Validation { .. })
        ));
        assert!(matches!(
            parse_config("[sweep]\ntheta = 0, 3"),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn output_and_initial() {
        let cfg = parse_config(
            "[integration]\ninitial = ground\n[output]\nformat = json\npath = out.json",
        )
        .unwrap();
        assert_eq!(cfg.output.format, Some(OutputFormat::Json));
        assert_eq!(cfg.output.path, Some(PathBuf::from("out.json")));
        assert_eq!(
            run(&cfg).initial_state,
            DensityMatrix::projector(0).unwrap()
        );
        let cfg = parse_config("initial = 0.5, 0, 0, 0.5").unwrap();
        assert_eq!(run(&cfg).initial_state.population(3), 0.5);
        assert!(matches!(
            parse_config("initial = 0.5, 0, 0, 0.6"),
            Err(Error::Validation { .. })
        ));
        let cfg2 = parse_config(&serialize_config(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }
}
