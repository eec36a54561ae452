//! Config-driven experiment execution: runs, artifacts, convergence studies.
//!
//! A run writes four kinds of artifacts into the output directory:
//! `manifest.txt` (effective config, tableau, library version, warnings,
//! wall-clock), `diagnostics.csv` (fixed column set, one row per
//! `diag_stride` steps plus the final step), field snapshots at the
//! requested times (snapped to step boundaries), and `final.gpfld`.
//! Re-running a config reproduces every artifact byte for byte except the
//! manifest's wall-clock line.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::config::{ExperimentConfig, InitialSpec};
use crate::diagnostics::{self, DriftSeries, ErrorNorm};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::integrator::{SolverOptions, Stepper};
use crate::operator::{GpOperator, GpParams};
use crate::oracle;
use crate::sav::{self, SavState};
use crate::snapshot;
use crate::tableau::ButcherTableau;

pub const DIAGNOSTICS_HEADER: &str =
    "step,t,mass,mass_err,E_h,quad_err,H_h,ham_err,q,fp_iters,fp_residual";

#[derive(Debug)]
pub struct RunSummary {
    pub final_state: SavState,
    pub drift: DriftSeries,
    pub n_steps: u64,
    pub output_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub diagnostics_path: PathBuf,
    pub final_snapshot_path: PathBuf,
    /// (step index, path) of the extra snapshots that were written.
    pub snapshots: Vec<(u64, PathBuf)>,
}

/// Grid and prepared operator for a config.
pub fn build_operator(config: &ExperimentConfig) -> Result<(Arc<Grid>, GpOperator)> {
    let grid = Arc::new(Grid::new(&config.sizes, &config.lower, &config.upper)?);
    let params = GpParams {
        beta: config.beta,
        omega: config.omega,
        potential: config.potential.clone(),
        c0: config.c0,
    };
    let op = GpOperator::new(&grid, &params)?;
    Ok((grid, op))
}

/// Initial SAV state for a config (q always re-derived from the field).
pub fn initial_state(config: &ExperimentConfig, grid: &Arc<Grid>, op: &GpOperator) -> Result<SavState> {
    let psi0 = match &config.initial {
        InitialSpec::Gaussian { gammas } => gaussian_initial(grid, gammas),
        InitialSpec::PlaneWave { k, amplitude } => {
            let k = k.clone();
            let amp = *amplitude;
            let mu: Vec<f64> = grid.mu().to_vec();
            Field::from_fn(grid, move |x| {
                let phase: f64 = x
                    .iter()
                    .zip(&k)
                    .zip(&mu)
                    .map(|((&xi, &ki), &mui)| ki as f64 * mui * xi)
                    .sum();
                Complex64::from_polar(amp, phase)
            })
        }
        InitialSpec::FromFile { path } => {
            let snap = snapshot::read(path)?;
            if !snap.field.grid().same_layout(grid) {
                return Err(Error::Config(format!(
                    "initial field {} is not sampled on the run grid",
                    path.display()
                )));
            }
            Field::from_data(grid, snap.field.into_data())?
        }
    };
    if !psi0.is_finite() {
        return Err(Error::Config("initial field contains non-finite values".into()));
    }
    Ok(SavState::init(op, psi0))
}

/// The Gaussian profile `ψ₀ = C_d e^{−Σ γ_w² x_w²/2}`.
pub fn gaussian_initial(grid: &Arc<Grid>, gammas: &[f64]) -> Field {
    let c = oracle::gaussian_norm_constant(gammas);
    let g = gammas.to_vec();
    Field::from_fn(grid, move |x| {
        let v: f64 = g.iter().zip(x).map(|(&ga, &xi)| ga * ga * xi * xi).sum();
        Complex64::new(c * (-0.5 * v).exp(), 0.0)
    })
}

/// Number of steps for `(t_final, tau)`. Ratios within 8 ulp of an integer
/// round to it; anything farther rounds down and reports a warning string.
fn step_count(t_final: f64, tau: f64) -> (u64, Option<String>) {
    let ratio = t_final / tau;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 8.0 * f64::EPSILON * ratio.max(1.0) {
        (nearest as u64, None)
    } else {
        let n = ratio.floor() as u64;
        let warning = format!(
            "t_final = {t_final} is not an integer number of steps of tau = {tau}; \
             truncated to {n} steps (t = {})",
            n as f64 * tau
        );
        (n, Some(warning))
    }
}

fn fmt_tableau(tab: &ButcherTableau) -> String {
    let line = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = String::new();
    out.push_str(&format!("tableau.stages = {}\n", tab.stages()));
    out.push_str(&format!("tableau.order = {}\n", tab.order()));
    out.push_str(&format!("tableau.c = {}\n", line(tab.c())));
    out.push_str(&format!("tableau.b = {}\n", line(tab.b())));
    for i in 0..tab.stages() {
        let row: Vec<f64> = (0..tab.stages()).map(|j| tab.a(i, j)).collect();
        out.push_str(&format!("tableau.a.{i} = {}\n", line(&row)));
    }
    out
}

struct CsvWriter {
    w: BufWriter<File>,
}

impl CsvWriter {
    fn create(path: &PathBuf) -> Result<CsvWriter> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{DIAGNOSTICS_HEADER}")?;
        Ok(CsvWriter { w })
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        step: u64,
        t: f64,
        mass: f64,
        mass_err: f64,
        e_h: f64,
        quad_err: f64,
        h_h: f64,
        ham_err: f64,
        q: f64,
        fp_iters: usize,
        fp_residual: f64,
    ) -> Result<()> {
        writeln!(
            self.w,
            "{step},{t},{mass},{mass_err:e},{e_h},{quad_err:e},{h_h},{ham_err:e},{q},{fp_iters},{fp_residual:e}"
        )?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

fn energies(op: &GpOperator, state: &SavState) -> (f64, f64, f64) {
    let mass = state.mass();
    let e_h = sav::modified_energy(op, state);
    let h_h = sav::hamiltonian_energy(op, state);
    (mass, e_h, h_h)
}

/// Execute a configured run and write its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let (grid, op) = build_operator(config)?;
    let tableau = ButcherTableau::gauss(config.stages)?;
    let state0 = initial_state(config, &grid, &op)?;
    let (n_steps, rounding_warning) = step_count(config.t_final, config.tau);

    std::fs::create_dir_all(&config.output_dir)?;
    let manifest_path = config.output_dir.join("manifest.txt");
    let diagnostics_path = config.output_dir.join("diagnostics.csv");
    let final_snapshot_path = config.output_dir.join("final.gpfld");

    // Snapshot times snap to the nearest step boundary.
    let mut snapshot_steps: Vec<(u64, f64)> = Vec::new();
    for &t in &config.snapshot_times {
        let step = (t / config.tau).round().clamp(0.0, n_steps as f64) as u64;
        if !snapshot_steps.iter().any(|&(s, _)| s == step) {
            snapshot_steps.push((step, t));
        }
    }
    snapshot_steps.sort_unstable_by_key(|&(s, _)| s);
    let snapshot_name = |step: u64| format!("snap_step{step:08}.gpfld");

    let mut manifest = String::new();
    manifest.push_str("# gpsav run manifest\n");
    manifest.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    manifest.push_str(&config.echo());
    manifest.push_str(&fmt_tableau(&tableau));
    manifest.push_str(&format!("run.n_steps = {n_steps}\n"));
    if let Some(w) = &rounding_warning {
        manifest.push_str(&format!("run.warning = {w}\n"));
    }
    for &(step, requested) in &snapshot_steps {
        manifest.push_str(&format!(
            "run.snapshot.{step} = {} (requested t = {requested}, snapped t = {})\n",
            snapshot_name(step),
            step as f64 * config.tau
        ));
    }
    std::fs::write(&manifest_path, &manifest)?;

    let mut csv = CsvWriter::create(&diagnostics_path)?;
    let mut drift = DriftSeries::new(&op, &state0);
    {
        let (mass, e_h, h_h) = energies(&op, &state0);
        csv.row(0, 0.0, mass, 0.0, e_h, 0.0, h_h, 0.0, state0.q, 0, 0.0)?;
    }
    let mut snapshots = Vec::new();
    if snapshot_steps.iter().any(|&(s, _)| s == 0) {
        let path = config.output_dir.join(snapshot_name(0));
        snapshot::write(&path, &state0.psi, 0.0, state0.q)?;
        snapshots.push((0, path));
    }

    let mut stepper = Stepper::new(&op, tableau, config.solver.clone())?;
    let mut state = state0;
    for step in 1..=n_steps {
        let (next, stats) = stepper
            .step(&state, config.tau)
            .map_err(|e| e.at_step(step))?;
        state = next;
        let t = step as f64 * config.tau;
        let (mass, e_h, h_h) = energies(&op, &state);
        let mass_err = (mass - drift.initial_mass()).abs();
        let quad_err = (e_h - drift.initial_modified_energy()).abs();
        let ham_err = (h_h - drift.initial_hamiltonian()).abs();
        drift.record_computed(t, mass, h_h, e_h, state.q);
        if step % config.diag_stride as u64 == 0 || step == n_steps {
            csv.row(
                step, t, mass, mass_err, e_h, quad_err, h_h, ham_err, state.q,
                stats.iterations, stats.residual,
            )?;
        }
        if snapshot_steps.iter().any(|&(s, _)| s == step) {
            let path = config.output_dir.join(snapshot_name(step));
            snapshot::write(&path, &state.psi, t, state.q)?;
            snapshots.push((step, path));
        }
    }
    csv.finish()?;
    snapshot::write(
        &final_snapshot_path,
        &state.psi,
        n_steps as f64 * config.tau,
        state.q,
    )?;

    let mut manifest_file = std::fs::OpenOptions::new().append(true).open(&manifest_path)?;
    writeln!(manifest_file, "result.status = ok")?;
    writeln!(
        manifest_file,
        "result.wallclock_seconds = {:.3}",
        started.elapsed().as_secs_f64()
    )?;

    Ok(RunSummary {
        final_state: state,
        drift,
        n_steps,
        output_dir: config.output_dir.clone(),
        manifest_path,
        diagnostics_path,
        final_snapshot_path,
        snapshots,
    })
}

/// Result of a τ-ladder self-convergence study.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub stages: usize,
    pub reference_tau: f64,
    pub taus: Vec<f64>,
    pub errors_inf: Vec<f64>,
    /// Pairwise rates; `rates[i]` compares rung i against rung i+1.
    pub rates: Vec<f64>,
}

impl RateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,error_inf,rate\n");
        for (i, (&tau, &err)) in self.taus.iter().zip(&self.errors_inf).enumerate() {
            if i == 0 {
                out.push_str(&format!("{tau},{err:e},\n"));
            } else {
                out.push_str(&format!("{tau},{err:e},{:.4}\n", self.rates[i - 1]));
            }
        }
        out
    }
}

/// Temporal self-convergence: a reference run with `s = 3` and
/// `τ = min(taus)/10` on the same grid, then one run per ladder rung; the
/// error is `‖ψ_rung(T) − ψ_ref(T)‖_{∞,h}` and rates follow the pairwise
/// log formula. Writes `rates.csv` into the output directory.
pub fn convergence_study(config: &ExperimentConfig, taus: &[f64]) -> Result<RateTable> {
    if taus.len() < 3 {
        return Err(Error::InvalidArgument(
            "convergence ladder needs at least 3 step sizes".into(),
        ));
    }
    if taus.windows(2).any(|w| !(w[1] < w[0])) || taus.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument(
            "convergence ladder must be positive and strictly decreasing".into(),
        ));
    }
    let (grid, op) = build_operator(config)?;
    let state0 = initial_state(config, &grid, &op)?;

    let run_once = |stages: usize, tau: f64, opts: &SolverOptions| -> Result<SavState> {
        let tableau = ButcherTableau::gauss(stages)?;
        let (n_steps, warn) = step_count(config.t_final, tau);
        if warn.is_some() {
            return Err(Error::InvalidArgument(format!(
                "tau = {tau} does not divide t_final = {}",
                config.t_final
            )));
        }
        crate::integrator::evolve(&op, &tableau, opts, state0.clone(), tau, n_steps, |_, _, _, _| {})
    };

    let tau_min = *taus.last().unwrap();
    let reference_tau = tau_min / 10.0;
    let reference = run_once(3, reference_tau, &config.solver)?;

    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let state = run_once(config.stages, tau, &config.solver)?;
        errors.push(diagnostics::field_error(
            &state.psi,
            &reference.psi,
            ErrorNorm::Inf,
        )?);
    }
    let rates = diagnostics::convergence_rate(&errors, taus)?;
    let table = RateTable {
        stages: config.stages,
        reference_tau,
        taus: taus.to_vec(),
        errors_inf: errors,
        rates,
    };

    std::fs::create_dir_all(&config.output_dir)?;
    let mut csv = String::new();
    csv.push_str(&format!(
        "# self-convergence, stages = {}, reference: stages = 3, tau = {}\n",
        table.stages, table.reference_tau
    ));
    csv.push_str(&table.to_csv());
    std::fs::write(config.output_dir.join("rates.csv"), csv)?;
    Ok(table)
}
