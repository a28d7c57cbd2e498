//! Experiment configuration: an INI-style key=value format with sections,
//! exhaustive validation (all errors reported, not just the first), and a
//! canonical manifest serialization that round-trips through the parser.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::asymptotic::BoundaryData;
use crate::barrier::delta1;
use crate::error::{Error, Result};
use crate::manifold::profile_by_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Jacobi,
    Assumptions,
    BarrierVerify,
    SolveBall,
    Exhaustion,
    Nonuniqueness,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<ExperimentKind> {
        Some(match s {
            "jacobi" => ExperimentKind::Jacobi,
            "assumptions" => ExperimentKind::Assumptions,
            "barrier-verify" => ExperimentKind::BarrierVerify,
            "solve-ball" => ExperimentKind::SolveBall,
            "exhaustion" => ExperimentKind::Exhaustion,
            "nonuniqueness" => ExperimentKind::Nonuniqueness,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Jacobi => "jacobi",
            ExperimentKind::Assumptions => "assumptions",
            ExperimentKind::BarrierVerify => "barrier-verify",
            ExperimentKind::SolveBall => "solve-ball",
            ExperimentKind::Exhaustion => "exhaustion",
            ExperimentKind::Nonuniqueness => "nonuniqueness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub out_dir: PathBuf,
    pub manifold_preset: String,
    pub dimension: usize,
    pub r_max: f64,
    pub jacobi_step: f64,
    pub drift_preset: String,
    pub a0_preset: String,
    pub nr: usize,
    pub nt: usize,
    pub h_r: f64,
    pub tol: f64,
    pub solve_radius: f64,
    pub boundary: String,
    pub guess: String,
    pub radii: Vec<f64>,
    pub theta0: f64,
    pub eps_sandwich: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub cone_l: f64,
    pub r1: f64,
    pub sigma: f64,
    pub r_probe: f64,
    pub drift_factor: f64,
    pub allow_unsolvable: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::SolveBall,
            out_dir: PathBuf::from("out"),
            manifold_preset: "euclidean".into(),
            dimension: 2,
            r_max: 100.0,
            jacobi_step: 1e-3,
            drift_preset: "zero".into(),
            a0_preset: "zero".into(),
            nr: 64,
            nt: 32,
            h_r: 0.0625,
            tol: 1e-10,
            solve_radius: 2.0,
            boundary: "zero".into(),
            guess: "harmonic".into(),
            radii: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            theta0: 0.0,
            eps_sandwich: 0.1,
            delta: 0.0,
            amplitude: 2.0,
            cone_l: 4.0,
            r1: 0.5,
            sigma: 1.0,
            r_probe: 1000.0,
            drift_factor: 0.5,
            allow_unsolvable: false,
        }
    }
}

const KNOWN_KEYS: &[(&str, &str)] = &[
    ("experiment", "kind"),
    ("experiment", "out"),
    ("manifold", "preset"),
    ("manifold", "dimension"),
    ("manifold", "r_max"),
    ("manifold", "jacobi_step"),
    ("drift", "preset"),
    ("drift", "factor"),
    ("weight", "a0"),
    ("grid", "nr"),
    ("grid", "nt"),
    ("grid", "h_r"),
    ("solve", "radius"),
    ("solve", "boundary"),
    ("solve", "guess"),
    ("solve", "tol"),
    ("solve", "allow_unsolvable"),
    ("exhaustion", "radii"),
    ("exhaustion", "theta0"),
    ("exhaustion", "eps"),
    ("barrier", "delta"),
    ("barrier", "amplitude"),
    ("barrier", "cone_l"),
    ("barrier", "r1"),
    ("barrier", "sigma"),
    ("barrier", "r_probe"),
];

/// Parses and validates a config. All problems are collected and reported
/// together in a single error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut errors: Vec<String> = Vec::new();
    let mut map: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut section = String::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {lineno}: expected key = value, got \"{line}\""));
            continue;
        };
        let key = k.trim().to_string();
        let val = v.trim().to_string();
        if section.is_empty() {
            errors.push(format!("line {lineno}: key \"{key}\" before any [section] header"));
            continue;
        }
        if !KNOWN_KEYS.iter().any(|&(s, kk)| s == section && kk == key) {
            errors.push(format!("line {lineno}: unknown key \"{section}.{key}\""));
            continue;
        }
        let full = format!("{section}.{key}");
        if let Some((_, first)) = map.get(&full) {
            errors.push(format!(
                "duplicate key \"{full}\" on lines {first} and {lineno}"
            ));
            continue;
        }
        map.insert(full, (val, lineno));
    }

    let mut cfg = ExperimentConfig::default();
    let get = |key: &str| map.get(key).map(|(v, _)| v.clone());

    match get("experiment.kind") {
        Some(k) => match ExperimentKind::parse(&k) {
            Some(kind) => cfg.kind = kind,
            None => errors.push(format!(
                "experiment.kind must be one of jacobi | assumptions | barrier-verify | solve-ball | exhaustion | nonuniqueness, got \"{k}\""
            )),
        },
        None => errors.push("missing required key experiment.kind".into()),
    }
    if let Some(v) = get("experiment.out") {
        cfg.out_dir = PathBuf::from(v);
    }

    match get("manifold.preset") {
        Some(p) => {
            if let Err(e) = profile_by_name(&p) {
                errors.push(format!("manifold.preset: {e}"));
            } else {
                cfg.manifold_preset = p;
            }
        }
        None => errors.push("missing required key manifold.preset".into()),
    }

    macro_rules! num {
        ($key:expr, $field:expr, $check:expr, $constraint:expr) => {
            if let Some(v) = get($key) {
                match v.parse::<f64>() {
                    Ok(x) if $check(x) => $field = x,
                    Ok(x) => errors.push(format!("{}: {} (got {x})", $key, $constraint)),
                    Err(_) => errors.push(format!("{}: not a number: \"{v}\"", $key)),
                }
            }
        };
    }
    macro_rules! int {
        ($key:expr, $field:expr, $min:expr) => {
            if let Some(v) = get($key) {
                match v.parse::<usize>() {
                    Ok(x) if x >= $min => $field = x,
                    Ok(x) => errors.push(format!("{}: must be >= {} (got {x})", $key, $min)),
                    Err(_) => errors.push(format!("{}: not a positive integer: \"{v}\"", $key)),
                }
            }
        };
    }

    int!("manifold.dimension", cfg.dimension, 2);
    num!("manifold.r_max", cfg.r_max, |x: f64| x > 0.0, "must be positive");
    num!("manifold.jacobi_step", cfg.jacobi_step, |x: f64| x > 0.0, "must be positive");
    num!("drift.factor", cfg.drift_factor, |x: f64| x >= 0.0, "must be >= 0");
    int!("grid.nr", cfg.nr, 2);
    int!("grid.nt", cfg.nt, 4);
    num!("grid.h_r", cfg.h_r, |x: f64| x > 0.0, "must be positive");
    num!("solve.radius", cfg.solve_radius, |x: f64| x > 0.0, "must be positive");
    num!("solve.tol", cfg.tol, |x: f64| x > 0.0, "must be positive");
    num!("exhaustion.theta0", cfg.theta0, |_| true, "");
    num!("exhaustion.eps", cfg.eps_sandwich, |x: f64| x > 0.0, "must be positive");
    num!("barrier.amplitude", cfg.amplitude, |x: f64| x > 0.0, "must be positive");
    num!(
        "barrier.cone_l",
        cfg.cone_l,
        |x: f64| x > 8.0 / std::f64::consts::PI,
        "cone parameter L must exceed 8/pi"
    );
    num!("barrier.r1", cfg.r1, |x: f64| x > 0.0, "must be positive");
    num!("barrier.sigma", cfg.sigma, |x: f64| x > 0.0, "must be positive");
    num!("barrier.r_probe", cfg.r_probe, |x: f64| x > 0.0, "must be positive");

    if let Some(p) = get("drift.preset") {
        if let Err(e) = crate::drift::DriftFunction::by_name(&p) {
            errors.push(format!("drift.preset: {e}"));
        } else {
            cfg.drift_preset = p;
        }
    }
    if let Some(p) = get("weight.a0") {
        if let Err(e) = crate::barrier::a0_by_name(&p) {
            errors.push(format!("weight.a0: {e}"));
        } else {
            cfg.a0_preset = p;
        }
    }
    if let Some(b) = get("solve.boundary") {
        if boundary_by_name(&b).is_err() {
            errors.push(format!("solve.boundary: unknown boundary data \"{b}\""));
        } else {
            cfg.boundary = b;
        }
    }
    if let Some(g) = get("solve.guess") {
        if guess_kind_valid(&g) {
            cfg.guess = g;
        } else {
            errors.push(format!(
                "solve.guess: expected zero | harmonic | bump(x), got \"{g}\""
            ));
        }
    }
    if let Some(v) = get("solve.allow_unsolvable") {
        match v.as_str() {
            "true" => cfg.allow_unsolvable = true,
            "false" => cfg.allow_unsolvable = false,
            _ => errors.push(format!("solve.allow_unsolvable: expected true/false, got \"{v}\"")),
        }
    }
    if let Some(v) = get("exhaustion.radii") {
        let mut radii = Vec::new();
        let mut ok = true;
        for part in v.split(',') {
            match part.trim().parse::<f64>() {
                Ok(x) if x > 0.0 => radii.push(x),
                _ => {
                    errors.push(format!("exhaustion.radii: bad entry \"{}\"", part.trim()));
                    ok = false;
                }
            }
        }
        if ok {
            if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
                errors.push("exhaustion.radii: need at least two strictly increasing radii".into());
            } else {
                cfg.radii = radii;
            }
        }
    }

    // delta range depends on the preset's curvature constants
    if let Some(v) = get("barrier.delta") {
        match v.parse::<f64>() {
            Ok(x) => {
                if let Ok(profile) = profile_by_name(&cfg.manifold_preset) {
                    let (_, d1) = delta1(profile.c1, profile.c4, cfg.dimension);
                    let cap = d1.min(profile.eps);
                    if x == 0.0 {
                        // 0 means "unset": take half the admissible ceiling,
                        // mirroring the no-key default (keeps manifests
                        // written before a delta was chosen parseable)
                        cfg.delta = 0.5 * cap.max(1e-6);
                    } else if x > 0.0 && x < cap {
                        cfg.delta = x;
                    } else {
                        errors.push(format!(
                            "barrier.delta: must lie in (0, min(delta1, eps)) = (0, {cap}) with delta1 = {d1}, got {x}"
                        ));
                    }
                } else {
                    cfg.delta = x; // preset error already reported
                }
            }
            Err(_) => errors.push(format!("barrier.delta: not a number: \"{v}\"")),
        }
    } else if cfg.delta == 0.0 {
        // default: half the admissible ceiling
        if let Ok(profile) = profile_by_name(&cfg.manifold_preset) {
            let (_, d1) = delta1(profile.c1, profile.c4, cfg.dimension);
            cfg.delta = 0.5 * d1.min(profile.eps).max(1e-6);
        }
    }

    // per-kind required keys
    match cfg.kind {
        ExperimentKind::SolveBall => {
            if get("solve.radius").is_none() {
                errors.push("missing required key solve.radius for solve-ball".into());
            }
        }
        ExperimentKind::Exhaustion => {
            if get("exhaustion.radii").is_none() {
                errors.push("missing required key exhaustion.radii for exhaustion".into());
            }
        }
        _ => {}
    }

    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Parameter(errors.join("\n")))
    }
}

fn guess_kind_valid(g: &str) -> bool {
    g == "zero"
        || g == "harmonic"
        || g
            .strip_prefix("bump(")
            .and_then(|s| s.strip_suffix(')'))
            .map(|s| s.trim().parse::<f64>().is_ok())
            .unwrap_or(false)
}

pub fn guess_by_name(g: &str) -> crate::solver::InitialGuess {
    if g == "zero" {
        crate::solver::InitialGuess::Zero
    } else if let Some(amp) = g
        .strip_prefix("bump(")
        .and_then(|s| s.strip_suffix(')'))
        .and_then(|s| s.trim().parse::<f64>().ok())
    {
        crate::solver::InitialGuess::Bump(amp)
    } else {
        crate::solver::InitialGuess::Harmonic
    }
}

/// Boundary data presets: "zero", "const(c)", "cos", "cos(A)",
/// "bumpy" (cos theta + 0.3 sin 3 theta).
pub fn boundary_by_name(spec: &str) -> Result<BoundaryData> {
    let spec = spec.trim();
    if spec == "zero" {
        return Ok(BoundaryData::constant(0.0));
    }
    if spec == "cos" {
        return Ok(BoundaryData::from_fn(512, &|t| t.cos()));
    }
    if spec == "bumpy" {
        return Ok(BoundaryData::from_fn(512, &|t| t.cos() + 0.3 * (3.0 * t).sin()));
    }
    if let Some(inner) = spec.strip_prefix("const(").and_then(|s| s.strip_suffix(')')) {
        let c: f64 = inner.trim().parse().map_err(|_| Error::UnknownPreset(spec.into()))?;
        return Ok(BoundaryData::constant(c));
    }
    if let Some(inner) = spec.strip_prefix("cos(").and_then(|s| s.strip_suffix(')')) {
        let a: f64 = inner.trim().parse().map_err(|_| Error::UnknownPreset(spec.into()))?;
        return Ok(BoundaryData::from_fn(512, &move |t| a * t.cos()));
    }
    Err(Error::UnknownPreset(spec.into()))
}

/// Canonical manifest text: parsing it reproduces the config exactly.
pub fn to_manifest(cfg: &ExperimentConfig) -> String {
    let radii = cfg
        .radii
        .iter()
        .map(|r| format!("{r}"))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "[experiment]\nkind = {}\nout = {}\n\n\
         [manifold]\npreset = {}\ndimension = {}\nr_max = {}\njacobi_step = {}\n\n\
         [drift]\npreset = {}\nfactor = {}\n\n\
         [weight]\na0 = {}\n\n\
         [grid]\nnr = {}\nnt = {}\nh_r = {}\n\n\
         [solve]\nradius = {}\nboundary = {}\nguess = {}\ntol = {}\nallow_unsolvable = {}\n\n\
         [exhaustion]\nradii = {}\ntheta0 = {}\neps = {}\n\n\
         [barrier]\ndelta = {}\namplitude = {}\ncone_l = {}\nr1 = {}\nsigma = {}\nr_probe = {}\n",
        cfg.kind.name(),
        cfg.out_dir.display(),
        cfg.manifold_preset,
        cfg.dimension,
        cfg.r_max,
        cfg.jacobi_step,
        cfg.drift_preset,
        cfg.drift_factor,
        cfg.a0_preset,
        cfg.nr,
        cfg.nt,
        cfg.h_r,
        cfg.solve_radius,
        cfg.boundary,
        cfg.guess,
        cfg.tol,
        cfg.allow_unsolvable,
        radii,
        cfg.theta0,
        cfg.eps_sandwich,
        cfg.delta,
        cfg.amplitude,
        cfg.cone_l,
        cfg.r1,
        cfg.sigma,
        cfg.r_probe,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(
            "[experiment]\nkind = solve-ball\n[manifold]\npreset = euclidean\n[solve]\nradius = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::SolveBall);
        assert_eq!(cfg.solve_radius, 2.0);
        assert_eq!(cfg.manifold_preset, "euclidean");
    }

    #[test]
    fn duplicate_key_lists_both_lines() {
        let err = parse_config(
            "[experiment]\nkind = jacobi\nkind = solve-ball\n[manifold]\npreset = euclidean\n",
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("lines 2 and 3"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected_and_all_errors_reported() {
        let err = parse_config(
            "[experiment]\nkind = solve-ball\nbogus = 1\n[manifold]\npreset = euclidean\n[grid]\nnr = 1\n",
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("unknown key \"experiment.bogus\""), "{msg}");
        assert!(msg.contains("grid.nr"), "{msg}");
    }

    #[test]
    fn delta_out_of_range_names_the_ceiling() {
        let err = parse_config(
            "[experiment]\nkind = barrier-verify\n[manifold]\npreset = power(2,0.5)\n[barrier]\ndelta = 0.9\n",
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("delta1"), "{msg}");
        assert!(msg.contains("min(delta1, eps)"), "{msg}");
    }

    #[test]
    fn manifest_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.kind = ExperimentKind::Exhaustion;
        cfg.manifold_preset = "power(2,0.5)".into();
        cfg.boundary = "cos".into();
        cfg.radii = vec![4.0, 8.0, 16.0];
        cfg.delta = 0.0625;
        let text = to_manifest(&cfg);
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn missing_required_keys_reported() {
        let err = parse_config("[manifold]\npreset = euclidean\n").unwrap_err();
        assert!(format!("{err}").contains("experiment.kind"));
        let err2 = parse_config("[experiment]\nkind = exhaustion\n[manifold]\npreset = euclidean\n")
            .unwrap_err();
        assert!(format!("{err2}").contains("exhaustion.radii"));
    }
}
