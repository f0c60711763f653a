//! Subcommand implementations: spectrum/xi diagnostics, trajectory and sweep
//! emitters, the figure presets, and the virtual-tomography counts export.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use adiab_core::adiabatic::AQC_THRESHOLD;
use adiab_core::dynamics::{integrate_master, uniform_grid, IntegratorConfig, Trajectory};
use adiab_core::linalg::ComplexMatrix;
use adiab_core::measurement::{
    bloch, fidelity, reconstruct, sample_all_axes, TomographyProtocol,
};
use adiab_core::models::{
    deutsch_adiabatic_reference, deutsch_hamiltonian, deutsch_superop, deutsch_target,
    lz_adiabatic_reference, lz_hamiltonian, lz_superop, DeutschParams, DeutschReferenceVariant,
    LzParams, LzReferenceVariant,
};
use adiab_core::spectral::{
    decompose_with, default_derivative_step, frame_derivative, PathOptions, SpectralError,
    SpectralPath,
};
use adiab_core::superop::{DensityMatrix, NoiseChannel, SuperoperatorFn};

use crate::config::{ConfigError, Model, ScenarioConfig};
use crate::table::{Cell, ResultTable};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(String),
    Io(std::io::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

/// Everything needed to drive one model configuration.
struct Runtime {
    model: Model,
    lz: Option<LzParams>,
    deutsch: Option<DeutschParams>,
    sup: SuperoperatorFn,
    channel: NoiseChannel,
    rho0: DensityMatrix,
    horizon: f64,
}

impl Runtime {
    fn build(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        match cfg.model {
            Model::Lz => {
                let p = LzParams::new(cfg.omega0, cfg.omegax, cfg.omega, cfg.gamma)
                    .map_err(|e| ConfigError(e.to_string()))?;
                Ok(Self {
                    model: Model::Lz,
                    lz: Some(p),
                    deutsch: None,
                    sup: lz_superop(&p).map_err(numeric)?,
                    channel: NoiseChannel::dephasing(p.gamma),
                    rho0: DensityMatrix::ket1(),
                    horizon: cfg.horizon(),
                })
            }
            Model::Deutsch => {
                let p = DeutschParams::new(cfg.omega_d, cfg.f0, cfg.f1, cfg.tau, cfg.gamma)
                    .map_err(|e| ConfigError(e.to_string()))?;
                Ok(Self {
                    model: Model::Deutsch,
                    lz: None,
                    deutsch: Some(p),
                    sup: deutsch_superop(&p).map_err(numeric)?,
                    channel: NoiseChannel::dephasing(p.gamma),
                    rho0: DensityMatrix::plus(),
                    horizon: cfg.horizon(),
                })
            }
        }
    }

    fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        match self.model {
            Model::Lz => lz_hamiltonian(self.lz.as_ref().unwrap(), t),
            Model::Deutsch => deutsch_hamiltonian(self.deutsch.as_ref().unwrap(), t),
        }
    }

    fn adiabatic_reference(&self, t: f64) -> DensityMatrix {
        match self.model {
            Model::Lz => {
                lz_adiabatic_reference(self.lz.as_ref().unwrap(), t, LzReferenceVariant::Printed)
            }
            Model::Deutsch => {
                let p = self.deutsch.as_ref().unwrap();
                deutsch_adiabatic_reference(p, t / p.tau, DeutschReferenceVariant::Printed)
            }
        }
    }

    fn target(&self) -> Option<DensityMatrix> {
        self.deutsch.as_ref().map(|p| deutsch_target(p.f0, p.f1))
    }

    fn integrator(&self, cfg: &ScenarioConfig, grid: Vec<f64>) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            grid,
            ..Default::default()
        }
    }
}

fn write_table(table: &ResultTable, out: &mut dyn Write) -> Result<(), RunError> {
    table.write_to(out)?;
    Ok(())
}

/// Eigenvalue scan: one row per grid time with the tracked spectrum, minimum
/// gap, and eigenvector conditioning. On a detected crossing the rows so far
/// are flushed before the numeric error is reported.
pub fn cmd_spectrum(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let rt = Runtime::build(cfg)?;
    let grid = uniform_grid(rt.horizon, cfg.samples);
    let mut columns = vec!["t".to_string()];
    for a in 0..4 {
        columns.push(format!("re_lambda{a}"));
        columns.push(format!("im_lambda{a}"));
    }
    columns.push("min_gap".into());
    columns.push("condition".into());
    let mut table = ResultTable::new(columns);

    let opts = PathOptions::default();
    let mut path: Option<SpectralPath> = None;
    let mut failure: Option<SpectralError> = None;
    for &t in &grid {
        let frame = match decompose_with(&rt.sup.eval(t), t, &opts) {
            Ok(f) => f,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let frame = match &mut path {
            None => {
                path = Some(SpectralPath::from_first_frame(frame, opts.clone()));
                path.as_ref().unwrap().frame(0).clone()
            }
            Some(p) => match p.track(frame) {
                Ok(()) => p.frames().last().unwrap().clone(),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            },
        };
        let mut row: Vec<Cell> = vec![frame.t.into()];
        for a in 0..4 {
            row.push(frame.eigenvalues[a].re.into());
            row.push(frame.eigenvalues[a].im.into());
        }
        row.push(frame.min_gap.into());
        row.push(frame.condition_estimate.into());
        table.push_row(row);
    }
    if let Some(e) = &failure {
        table.footer(format!("error = {e}"));
    }
    write_table(&table, out)?;
    match failure {
        Some(e) => Err(numeric(e)),
        None => Ok(()),
    }
}

/// Per-pair xi values along a path grid. Times where a gap check fails carry
/// the sentinel value -1 with gap_ok = false.
struct XiSeries {
    times: Vec<f64>,
    /// values[time][pair]
    values: Vec<Vec<f64>>,
    gap_ok: Vec<bool>,
    running_max: Vec<f64>,
    gap_failures: usize,
    verdict: bool,
}

fn xi_series(
    path: &SpectralPath,
    sup: &SuperoperatorFn,
    pairs: &[(usize, usize)],
) -> Result<XiSeries, RunError> {
    let dim = path.dim();
    let mut lam_int = vec![C64::ZERO; dim];
    let mut prev_t: Option<(f64, Vec<C64>)> = None;
    let mut series = XiSeries {
        times: Vec::new(),
        values: Vec::new(),
        gap_ok: Vec::new(),
        running_max: Vec::new(),
        gap_failures: 0,
        verdict: true,
    };
    let mut running_max = 0.0f64;

    for frame in path.frames() {
        if let Some((t0, lam0)) = &prev_t {
            let dt = frame.t - t0;
            for a in 0..dim {
                lam_int[a] += 0.5 * dt * (lam0[a] + frame.eigenvalues[a]);
            }
        }
        prev_t = Some((frame.t, frame.eigenvalues.clone()));

        let scale = frame.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap_tol = path.options().gap_tol_rel * scale;
        // Gap screening happens before any derivative so that sentinel rows
        // never pay for (or fail on) a finite-difference stencil.
        let gap_of = |b: usize, a: usize| (frame.eigenvalues[b] - frame.eigenvalues[a]).norm();
        let mut ddots: Vec<Option<Vec<C64>>> = vec![None; dim];
        for &(b, a) in pairs {
            if a != 0 && b != 0 && gap_of(b, a) >= gap_tol && ddots[a].is_none() {
                let h = default_derivative_step(frame);
                ddots[a] =
                    Some(frame_derivative(path, sup, a, frame.t, h).map_err(numeric)?);
            }
        }

        let mut row_ok = true;
        let mut row_values = Vec::with_capacity(pairs.len());
        for &(b, a) in pairs {
            if a == 0 || b == 0 {
                row_values.push(0.0);
                continue;
            }
            let gap = gap_of(b, a);
            if gap < gap_tol {
                row_ok = false;
                series.gap_failures += 1;
                row_values.push(-1.0);
                continue;
            }
            let kappa = frame.project_left(b, ddots[a].as_ref().unwrap());
            if kappa.norm() == 0.0 {
                row_values.push(0.0);
                continue;
            }
            let el = (lam_int[a] - lam_int[b]).re;
            let xi = (el + kappa.norm().ln() - gap.ln()).min(700.0).exp();
            row_values.push(xi);
        }
        if row_ok {
            running_max = row_values.iter().copied().fold(running_max, f64::max);
        }
        series.times.push(frame.t);
        series.values.push(row_values);
        series.gap_ok.push(row_ok);
        series.running_max.push(running_max);
    }
    series.verdict = running_max < AQC_THRESHOLD && series.gap_failures == 0;
    Ok(series)
}

pub fn cmd_xi(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let rt = Runtime::build(cfg)?;
    let grid = uniform_grid(rt.horizon, cfg.samples);
    let path =
        SpectralPath::build(&rt.sup, &grid, PathOptions::default()).map_err(numeric)?;
    let series = xi_series(&path, &rt.sup, &cfg.pairs)?;

    let mut columns = vec!["t".to_string()];
    for &(b, a) in &cfg.pairs {
        columns.push(format!("xi_{b}{a}"));
    }
    columns.push("gap_ok".into());
    columns.push("running_max".into());
    let mut table = ResultTable::new(columns);
    for (k, &t) in series.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        for &v in &series.values[k] {
            row.push(v.into());
        }
        row.push(if series.gap_ok[k] { 1i64.into() } else { 0i64.into() });
        row.push(series.running_max[k].into());
        table.push_row(row);
    }
    if series.gap_failures > 0 {
        table.footer(format!(
            "warning = {} rows hit GapTooSmall (sentinel -1)",
            series.gap_failures
        ));
    }
    table.footer(format!("aqc_verdict = {} (threshold = {AQC_THRESHOLD})", series.verdict));
    write_table(&table, out)
}

fn trajectory_for(
    rt: &Runtime,
    cfg: &ScenarioConfig,
    grid: Vec<f64>,
) -> Result<Trajectory, RunError> {
    let horizon = *grid.last().unwrap();
    integrate_master(
        |t| rt.hamiltonian(t),
        &rt.channel,
        &rt.rho0,
        horizon,
        &rt.integrator(cfg, grid),
    )
    .map_err(numeric)
}

/// Time evolution with fidelity/diagnostic columns and optional virtual
/// tomography (the synthetic counterpart of the experimental fidelity).
pub fn cmd_evolve(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let rt = Runtime::build(cfg)?;
    let grid = uniform_grid(rt.horizon, cfg.samples);
    let traj = trajectory_for(&rt, cfg, grid)?;
    let target = rt.target();

    let mut columns = vec!["t".to_string(), "fid_adiabatic".into()];
    if target.is_some() {
        columns.push("fid_target".into());
    }
    columns.extend(
        ["trace_err", "purity", "bloch_x", "bloch_y", "bloch_z"].map(String::from),
    );
    if cfg.tomo.is_some() {
        columns.push("fid_expt_mean".into());
        columns.push("fid_expt_std".into());
    }
    let mut table = ResultTable::new(columns);

    for (k, &t) in traj.times.iter().enumerate() {
        let state = &traj.states[k];
        let reference = rt.adiabatic_reference(t);
        let fid_ad = fidelity(&reference, state).map_err(numeric)?;
        let mut row: Vec<Cell> = vec![t.into(), fid_ad.into()];
        if let Some(target) = &target {
            row.push(fidelity(target, state).map_err(numeric)?.into());
        }
        row.push(traj.trace_error[k].into());
        row.push(traj.purity[k].into());
        let r = bloch(state);
        row.extend(r.iter().map(|&x| Cell::from(x)));
        if let Some(tomo) = &cfg.tomo {
            let protocol = TomographyProtocol {
                shots: tomo.shots,
                repeats: tomo.repeats,
                readout_error: tomo.readout_error,
                seed: point_seed(cfg.seed, k),
            };
            let counts = sample_all_axes(state, &protocol).map_err(numeric)?;
            let result = reconstruct(&counts, protocol.shots).map_err(numeric)?;
            let (mean, std) = result.fidelity_stats(&reference).map_err(numeric)?;
            row.push(mean.into());
            row.push(std.into());
        }
        table.push_row(row);
    }
    if let Some(tomo) = &cfg.tomo {
        table.footer(format!(
            "tomography: shots = {}, repeats = {}, readout_error = {}, seed = {}",
            tomo.shots, tomo.repeats, tomo.readout_error, cfg.seed
        ));
    }
    write_table(&table, out)
}

fn point_seed(master: u64, k: usize) -> u64 {
    master ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C55)
}

struct SweepRow {
    gamma: f64,
    tau: f64,
    fid_adiabatic: f64,
    fid_target: Option<f64>,
}

fn sweep_point(cfg: &ScenarioConfig, gamma: f64, tau: f64) -> Result<SweepRow, RunError> {
    let mut local = cfg.clone();
    local.gamma = gamma;
    match cfg.model {
        Model::Deutsch => local.tau = tau,
        Model::Lz => local.tmax = Some(tau),
    }
    let rt = Runtime::build(&local)?;
    let traj = trajectory_for(&rt, &local, vec![0.0, tau])?;
    let state = traj.states.last().unwrap();
    let fid_adiabatic =
        fidelity(&rt.adiabatic_reference(tau), state).map_err(numeric)?;
    let fid_target = match rt.target() {
        Some(target) => Some(fidelity(&target, state).map_err(numeric)?),
        None => None,
    };
    Ok(SweepRow { gamma, tau, fid_adiabatic, fid_target })
}

/// Mark maximal runs of fid >= threshold; returns (in_window, window_id) per
/// point plus (start, end, peak) summaries.
fn detect_windows(
    taus: &[f64],
    fids: &[f64],
    threshold: f64,
) -> (Vec<(bool, i64)>, Vec<(f64, f64, f64)>) {
    let mut flags = Vec::with_capacity(fids.len());
    let mut windows: Vec<(f64, f64, f64)> = Vec::new();
    let mut open = false;
    for (k, &f) in fids.iter().enumerate() {
        if f >= threshold {
            if !open {
                windows.push((taus[k], taus[k], f));
                open = true;
            } else if let Some(last) = windows.last_mut() {
                last.1 = taus[k];
                last.2 = last.2.max(f);
            }
            flags.push((true, windows.len() as i64 - 1));
        } else {
            open = false;
            flags.push((false, -1));
        }
    }
    (flags, windows)
}

/// Sweep of final-time fidelities over tau (and optionally gamma), with
/// window detection on the Deutsch target fidelity.
pub fn cmd_sweep(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let mut taus = cfg.taus.clone();
    if taus.is_empty() {
        return Err(ConfigError("sweep needs a nonempty tau list (--taus)".into()).into());
    }
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if taus.iter().any(|&t| !(t > 0.0)) {
        return Err(ConfigError("sweep taus must be positive".into()).into());
    }
    let gammas = if cfg.gammas.is_empty() { vec![cfg.gamma] } else { cfg.gammas.clone() };

    let items: Vec<(usize, f64, f64)> = gammas
        .iter()
        .enumerate()
        .flat_map(|(gi, &g)| taus.iter().map(move |&t| (gi, g, t)))
        .collect();
    let rows: Vec<Result<SweepRow, RunError>> = items
        .par_iter()
        .map(|&(_, g, t)| sweep_point(cfg, g, t))
        .collect();
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_, _>>()?;

    let deutsch = cfg.model == Model::Deutsch;
    let mut columns = vec!["gamma".to_string(), "tau".into(), "fid_adiabatic".into()];
    if deutsch {
        columns.extend(["fid_target", "in_window", "window_id"].map(String::from));
    }
    let mut table = ResultTable::new(columns);

    let per_gamma = taus.len();
    for (gi, &g) in gammas.iter().enumerate() {
        let chunk = &rows[gi * per_gamma..(gi + 1) * per_gamma];
        let window_info = if deutsch {
            let fids: Vec<f64> = chunk.iter().map(|r| r.fid_target.unwrap()).collect();
            let (flags, windows) = detect_windows(&taus, &fids, cfg.window_threshold);
            for (w, (start, end, peak)) in windows.iter().enumerate() {
                table.footer(format!(
                    "window gamma={g} id={w}: tau in [{start:.6e}, {end:.6e}], peak fid {peak:.6}"
                ));
            }
            Some(flags)
        } else {
            None
        };
        for (k, row) in chunk.iter().enumerate() {
            let mut cells: Vec<Cell> =
                vec![row.gamma.into(), row.tau.into(), row.fid_adiabatic.into()];
            if let Some(flags) = &window_info {
                cells.push(row.fid_target.unwrap().into());
                cells.push(if flags[k].0 { 1i64.into() } else { 0i64.into() });
                cells.push(flags[k].1.into());
            }
            table.push_row(cells);
        }
    }
    table.footer(format!("window_threshold = {}", cfg.window_threshold));
    write_table(&table, out)
}

const PRESET_GAMMAS: [f64; 3] = [1256.0, 3141.0, 6283.0];

/// Oscillating Landau-Zener preset: fidelity-to-reference traces for the
/// three published dephasing rates plus the literal xi_21/xi_31 diagnostics
/// at the smallest rate.
pub fn cmd_fig2(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let tmax = cfg.tmax.unwrap_or(3.0e-3);
    let grid = uniform_grid(tmax, cfg.samples);

    let fids: Vec<Vec<f64>> = PRESET_GAMMAS
        .par_iter()
        .map(|&gamma| -> Result<Vec<f64>, RunError> {
            let mut local = cfg.clone();
            local.model = Model::Lz;
            local.gamma = gamma;
            local.tmax = Some(tmax);
            let rt = Runtime::build(&local)?;
            let traj = trajectory_for(&rt, &local, grid.clone())?;
            traj.times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| fidelity(&rt.adiabatic_reference(t), s).map_err(numeric))
                .collect()
        })
        .collect::<Result<_, _>>()?;

    // xi diagnostics at gamma_1 on the same grid.
    let mut local = cfg.clone();
    local.model = Model::Lz;
    local.gamma = PRESET_GAMMAS[0];
    let rt = Runtime::build(&local)?;
    let path = SpectralPath::build(&rt.sup, &grid, PathOptions::default()).map_err(numeric)?;
    let pairs = [(2usize, 1usize), (3usize, 1usize)];
    let series = xi_series(&path, &rt.sup, &pairs)?;

    let mut columns = vec!["t".to_string()];
    for &g in &PRESET_GAMMAS {
        columns.push(format!("fid_gamma{g:.0}"));
    }
    columns.push("xi21_gamma1256".into());
    columns.push("xi31_gamma1256".into());
    let mut table = ResultTable::new(columns);
    for (k, &t) in grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        for fid_curve in &fids {
            row.push(fid_curve[k].into());
        }
        row.push(series.values[k][0].into());
        row.push(series.values[k][1].into());
        table.push_row(row);
    }
    table.footer("preset = oscillating Landau-Zener at resonance, omega0 = 2 pi MHz, omegax = 2 pi x 20 kHz".to_string());
    write_table(&table, out)
}

/// Deutsch preset: final-time adiabatic fidelity and the xi diagnostics as
/// functions of the total time tau, per dephasing rate.
pub fn cmd_fig3(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let taus: Vec<f64> = if cfg.taus.is_empty() {
        (1..=60).map(|k| k as f64 * 5.0e-5).collect()
    } else {
        let mut t = cfg.taus.clone();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t
    };

    struct Fig3Point {
        fid_ad: f64,
        xi21: f64,
        xi31: f64,
    }
    let eval = |gamma: f64, tau: f64| -> Result<Fig3Point, RunError> {
        let mut local = cfg.clone();
        local.model = Model::Deutsch;
        local.gamma = gamma;
        local.tau = tau;
        local.tmax = None;
        let rt = Runtime::build(&local)?;
        let traj = trajectory_for(&rt, &local, vec![0.0, tau])?;
        let state = traj.states.last().unwrap();
        let fid_ad = fidelity(&rt.adiabatic_reference(tau), state).map_err(numeric)?;
        // Path resolving the pair oscillation (2 omega) with margin.
        let p = rt.deutsch.as_ref().unwrap();
        let samples = ((2.0 * p.omega * tau / 0.4).ceil() as usize).clamp(201, 20_001);
        let path = SpectralPath::build(&rt.sup, &uniform_grid(tau, samples), PathOptions::default())
            .map_err(numeric)?;
        let mut xi_at_tau = [0.0f64; 2];
        for (slot, &(b, a)) in [(2usize, 1usize), (3, 1)].iter().enumerate() {
            xi_at_tau[slot] =
                adiab_core::adiabatic::xi(&path, &rt.sup, b, a, tau).map_err(numeric)?;
        }
        Ok(Fig3Point { fid_ad, xi21: xi_at_tau[0], xi31: xi_at_tau[1] })
    };

    let items: Vec<(f64, f64)> = PRESET_GAMMAS
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect();
    let points: Vec<Fig3Point> = items
        .par_iter()
        .map(|&(g, t)| eval(g, t))
        .collect::<Result<_, _>>()?;

    let mut columns = vec!["tau".to_string()];
    for &g in &PRESET_GAMMAS {
        columns.push(format!("fid_ad_gamma{g:.0}"));
        columns.push(format!("xi21_gamma{g:.0}"));
        columns.push(format!("xi31_gamma{g:.0}"));
    }
    let mut table = ResultTable::new(columns);
    for (k, &tau) in taus.iter().enumerate() {
        let mut row: Vec<Cell> = vec![tau.into()];
        for gi in 0..PRESET_GAMMAS.len() {
            let p = &points[gi * taus.len() + k];
            row.push(p.fid_ad.into());
            row.push(p.xi21.into());
            row.push(p.xi31.into());
        }
        table.push_row(row);
    }
    table.footer("preset = adiabatic Deutsch (balanced), omega = 2 pi x 10 kHz".to_string());
    write_table(&table, out)
}

/// Deutsch target-state preset: fidelity to the pure algorithm output as a
/// function of tau, with high-fidelity window detection.
pub fn cmd_fig4(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let taus: Vec<f64> = if cfg.taus.is_empty() {
        let mut t: Vec<f64> = (1..=300).map(|k| k as f64 * 2.0e-6).collect();
        t.extend((13..=60).map(|k| k as f64 * 5.0e-5));
        t
    } else {
        let mut t = cfg.taus.clone();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t
    };

    let items: Vec<(f64, f64)> = PRESET_GAMMAS
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect();
    let fids: Vec<f64> = items
        .par_iter()
        .map(|&(g, t)| {
            let mut local = cfg.clone();
            local.model = Model::Deutsch;
            sweep_point(&local, g, t).map(|row| row.fid_target.unwrap())
        })
        .collect::<Result<_, _>>()?;

    let mut columns = vec!["tau".to_string()];
    for &g in &PRESET_GAMMAS {
        columns.push(format!("fid_target_gamma{g:.0}"));
    }
    columns.push("in_window_gamma3141".into());
    columns.push("window_id_gamma3141".into());
    let mut table = ResultTable::new(columns);

    let per_gamma = taus.len();
    let curve = |gi: usize| &fids[gi * per_gamma..(gi + 1) * per_gamma];
    let (flags_3141, _) = detect_windows(&taus, curve(1), cfg.window_threshold);
    for (k, &tau) in taus.iter().enumerate() {
        let mut row: Vec<Cell> = vec![tau.into()];
        for gi in 0..PRESET_GAMMAS.len() {
            row.push(curve(gi)[k].into());
        }
        row.push(if flags_3141[k].0 { 1i64.into() } else { 0i64.into() });
        row.push(flags_3141[k].1.into());
        table.push_row(row);
    }
    for (gi, &g) in PRESET_GAMMAS.iter().enumerate() {
        let (_, windows) = detect_windows(&taus, curve(gi), cfg.window_threshold);
        for (w, (start, end, peak)) in windows.iter().enumerate() {
            table.footer(format!(
                "window gamma={g} id={w}: tau in [{start:.6e}, {end:.6e}], peak fid {peak:.6}"
            ));
        }
    }
    table.footer(format!("window_threshold = {}", cfg.window_threshold));
    write_table(&table, out)
}

/// Virtual tomography counts along a trajectory: one row per (time, repeat).
pub fn cmd_tomo(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let mut local = cfg.clone();
    let tomo = *local.tomo_mut();
    let rt = Runtime::build(&local)?;
    let grid = uniform_grid(rt.horizon, local.samples);
    let traj = trajectory_for(&rt, &local, grid)?;

    let mut table = ResultTable::new(vec!["t", "repeat", "up_x", "up_y", "up_z"]);
    for (k, &t) in traj.times.iter().enumerate() {
        let protocol = TomographyProtocol {
            shots: tomo.shots,
            repeats: tomo.repeats,
            readout_error: tomo.readout_error,
            seed: point_seed(local.seed, k),
        };
        let counts = sample_all_axes(&traj.states[k], &protocol).map_err(numeric)?;
        for rec in counts {
            table.push_row(vec![
                t.into(),
                rec.repeat.into(),
                (rec.up_x as i64).into(),
                (rec.up_y as i64).into(),
                (rec.up_z as i64).into(),
            ]);
        }
    }
    table.footer(format!(
        "shots = {}, repeats = {}, readout_error = {}, seed = {}",
        tomo.shots, tomo.repeats, tomo.readout_error, cfg.seed
    ));
    write_table(&table, out)
}
