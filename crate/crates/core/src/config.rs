//! Experiment configuration: flat `section.key = value` text.
//!
//! The format is plain line-oriented text so configs diff cleanly: one
//! assignment per line, `#` comments, lists comma-separated. Later
//! assignments override earlier ones (that is how `--override` works).
//! Unknown keys are hard errors — a silent typo would corrupt an experiment.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrator::{InitialGuess, SolverOptions};
use crate::operator::PotentialSpec;

/// How the initial wave function is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Trap-ground-state-style Gaussian `ψ₀ = C_d e^{−Σ γ_w² x_w²/2}` with
    /// the dimension-dependent normalization
    /// `C_d = (Πγ)^{1/4} / (2^{(d−1)/2} π^{d/4})`.
    Gaussian { gammas: Vec<f64> },
    /// `ψ₀ = A e^{i Σ k_w μ_w x_w}` with integer mode numbers `k_w`.
    PlaneWave { k: Vec<i64>, amplitude: f64 },
    /// Field loaded from a snapshot file; `q` is re-derived from the field.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub tau: f64,
    pub t_final: f64,
    pub stages: usize,
    pub beta: f64,
    pub omega: f64,
    pub c0: f64,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    pub output_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub diag_stride: usize,
    pub solver: SolverOptions,
    /// τ ladder for the `converge` subcommand.
    pub converge_taus: Option<Vec<f64>>,
}

const KNOWN_KEYS: &[&str] = &[
    "grid.dim",
    "grid.sizes",
    "grid.lower",
    "grid.upper",
    "time.tau",
    "time.t_final",
    "scheme.stages",
    "model.beta",
    "model.omega",
    "model.c0",
    "potential.kind",
    "potential.gammas",
    "potential.scale",
    "potential.path",
    "initial.kind",
    "initial.gammas",
    "initial.k",
    "initial.amplitude",
    "initial.path",
    "output.dir",
    "output.snapshot_times",
    "output.diag_stride",
    "solver.tol",
    "solver.max_iter",
    "solver.initial_guess",
    "converge.taus",
];

/// Raw ordered assignments; later entries for the same key win.
#[derive(Debug, Default, Clone)]
struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.push((key, value.trim().to_string()));
        }
        Ok(RawConfig { entries })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.push((key.to_string(), value.to_string()));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a nonnegative integer")))
}

fn parse_list<T, F: Fn(&str, &str) -> Result<T>>(key: &str, v: &str, f: F) -> Result<Vec<T>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|item| f(key, item.trim())).collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        Self::from_sources(text, &[])
    }

    /// Parse `text` and apply `key=value` overrides on top.
    pub fn from_sources(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
        let mut raw = RawConfig::parse(text)?;
        for (k, v) in overrides {
            raw.set(k, v)?;
        }
        Self::finalize(&raw)
    }

    fn finalize(raw: &RawConfig) -> Result<ExperimentConfig> {
        let require = |key: &str| {
            raw.get(key)
                .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        };

        let sizes = parse_list("grid.sizes", require("grid.sizes")?, parse_usize)?;
        let dim = sizes.len();
        if let Some(d) = raw.get("grid.dim") {
            let d = parse_usize("grid.dim", d)?;
            if d != dim {
                return Err(Error::Config(format!(
                    "grid.dim = {d} disagrees with grid.sizes ({dim} axes)"
                )));
            }
        }
        let lower = parse_list("grid.lower", require("grid.lower")?, parse_f64)?;
        let upper = parse_list("grid.upper", require("grid.upper")?, parse_f64)?;
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::Config(format!(
                "grid.lower/grid.upper must have {dim} entries"
            )));
        }

        let tau = parse_f64("time.tau", require("time.tau")?)?;
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("time.tau must be positive, got {tau}")));
        }
        let t_final = parse_f64("time.t_final", require("time.t_final")?)?;
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::Config(format!(
                "time.t_final must be nonnegative, got {t_final}"
            )));
        }

        let stages = parse_usize("scheme.stages", require("scheme.stages")?)?;
        let beta = parse_f64("model.beta", require("model.beta")?)?;
        let omega = parse_f64("model.omega", require("model.omega")?)?;
        let c0 = match raw.get("model.c0") {
            Some(v) => parse_f64("model.c0", v)?,
            None => 1.0,
        };

        let potential = match raw.get("potential.kind").unwrap_or("harmonic") {
            "harmonic" => {
                let gammas = match raw.get("potential.gammas") {
                    Some(v) => parse_list("potential.gammas", v, parse_f64)?,
                    None => vec![1.0; dim],
                };
                let scale = match raw.get("potential.scale") {
                    Some(v) => parse_f64("potential.scale", v)?,
                    None => 1.0,
                };
                PotentialSpec::Harmonic { gammas, scale }
            }
            "from_file" => PotentialSpec::FromFile {
                path: PathBuf::from(require("potential.path")?),
            },
            other => {
                return Err(Error::Config(format!(
                    "potential.kind must be harmonic or from_file, got `{other}`"
                )))
            }
        };

        let initial = match require("initial.kind")? {
            "gaussian" => {
                let gammas = match raw.get("initial.gammas") {
                    Some(v) => parse_list("initial.gammas", v, parse_f64)?,
                    None => vec![1.0; dim],
                };
                if gammas.len() != dim {
                    return Err(Error::Config(format!(
                        "initial.gammas must have {dim} entries"
                    )));
                }
                if gammas.iter().any(|&g| !(g > 0.0)) {
                    return Err(Error::Config("initial.gammas must be positive".into()));
                }
                InitialSpec::Gaussian { gammas }
            }
            "plane_wave" => {
                let k = parse_list("initial.k", require("initial.k")?, |key, v| {
                    v.parse::<i64>()
                        .map_err(|_| Error::Config(format!("{key}: `{v}` is not an integer")))
                })?;
                if k.len() != dim {
                    return Err(Error::Config(format!("initial.k must have {dim} entries")));
                }
                let amplitude = match raw.get("initial.amplitude") {
                    Some(v) => parse_f64("initial.amplitude", v)?,
                    None => 1.0,
                };
                InitialSpec::PlaneWave { k, amplitude }
            }
            "from_file" => InitialSpec::FromFile {
                path: PathBuf::from(require("initial.path")?),
            },
            other => {
                return Err(Error::Config(format!(
                    "initial.kind must be gaussian, plane_wave or from_file, got `{other}`"
                )))
            }
        };

        let output_dir = PathBuf::from(raw.get("output.dir").unwrap_or("out"));
        let snapshot_times = match raw.get("output.snapshot_times") {
            Some(v) => parse_list("output.snapshot_times", v, parse_f64)?,
            None => Vec::new(),
        };
        if snapshot_times.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::Config("snapshot times must be finite and >= 0".into()));
        }
        let diag_stride = match raw.get("output.diag_stride") {
            Some(v) => parse_usize("output.diag_stride", v)?,
            None => 1,
        };
        if diag_stride == 0 {
            return Err(Error::Config("output.diag_stride must be >= 1".into()));
        }

        let mut solver = SolverOptions::default();
        if let Some(v) = raw.get("solver.tol") {
            solver.tol = parse_f64("solver.tol", v)?;
        }
        if let Some(v) = raw.get("solver.max_iter") {
            solver.max_iter = parse_usize("solver.max_iter", v)?;
        }
        if let Some(v) = raw.get("solver.initial_guess") {
            solver.initial_guess = match v {
                "explicit_rhs" => InitialGuess::ExplicitRhs,
                "previous_step" => InitialGuess::PreviousStep,
                other => {
                    return Err(Error::Config(format!(
                        "solver.initial_guess must be explicit_rhs or previous_step, got `{other}`"
                    )))
                }
            };
        }

        let converge_taus = match raw.get("converge.taus") {
            Some(v) => Some(parse_list("converge.taus", v, parse_f64)?),
            None => None,
        };

        Ok(ExperimentConfig {
            sizes,
            lower,
            upper,
            tau,
            t_final,
            stages,
            beta,
            omega,
            c0,
            potential,
            initial,
            output_dir,
            snapshot_times,
            diag_stride,
            solver,
            converge_taus,
        })
    }

    /// Canonical echo of the effective configuration (manifest content).
    pub fn echo(&self) -> String {
        let list_f64 = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("grid.dim", format!("{}", self.sizes.len()));
        push(
            "grid.sizes",
            self.sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("grid.lower", list_f64(&self.lower));
        push("grid.upper", list_f64(&self.upper));
        push("time.tau", format!("{}", self.tau));
        push("time.t_final", format!("{}", self.t_final));
        push("scheme.stages", format!("{}", self.stages));
        push("model.beta", format!("{}", self.beta));
        push("model.omega", format!("{}", self.omega));
        push("model.c0", format!("{}", self.c0));
        match &self.potential {
            PotentialSpec::Harmonic { gammas, scale } => {
                push("potential.kind", "harmonic".into());
                push("potential.gammas", list_f64(gammas));
                push("potential.scale", format!("{scale}"));
            }
            PotentialSpec::FromFile { path } => {
                push("potential.kind", "from_file".into());
                push("potential.path", path.display().to_string());
            }
        }
        match &self.initial {
            InitialSpec::Gaussian { gammas } => {
                push("initial.kind", "gaussian".into());
                push("initial.gammas", list_f64(gammas));
            }
            InitialSpec::PlaneWave { k, amplitude } => {
                push("initial.kind", "plane_wave".into());
                push(
                    "initial.k",
                    k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                );
                push("initial.amplitude", format!("{amplitude}"));
            }
            InitialSpec::FromFile { path } => {
                push("initial.kind", "from_file".into());
                push("initial.path", path.display().to_string());
            }
        }
        push("output.dir", self.output_dir.display().to_string());
        push("output.snapshot_times", list_f64(&self.snapshot_times));
        push("output.diag_stride", format!("{}", self.diag_stride));
        push("solver.tol", format!("{}", self.solver.tol));
        push("solver.max_iter", format!("{}", self.solver.max_iter));
        push(
            "solver.initial_guess",
            match self.solver.initial_guess {
                InitialGuess::ExplicitRhs => "explicit_rhs".into(),
                InitialGuess::PreviousStep => "previous_step".into(),
            },
        );
        if let Some(taus) = &self.converge_taus {
            push("converge.taus", list_f64(taus));
        }
        out
    }
}
