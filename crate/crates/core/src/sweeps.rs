//! Parameter-grid experiments over drive amplitude and sweep rate.
//!
//! A [`GridSpec`] fixes δω, τc, the pulse shape and relaxation; every
//! `(ω₁, R)` cell is an independent sweep of duration `T = 2δω/R` started
//! from the ground state. Under drive-induced dissipation each row of fixed
//! `R` has an interior optimum in ω₁, and those optima lie close to a
//! parabola `R = k ω₁²`.

use rayon::prelude::*;

use crate::error::{ParamError, RidgeError};
use crate::lz::{arp_probability, phenom_max};
use crate::propagator::{evolve, IntegratorSettings};
use crate::types::{DensityState, PulseProfile, PulseShape, RelaxationParams, SweepParams, Timing};

/// Default axis used for both ω₁ (rad/ms) and R (rad/ms²).
pub const DEFAULT_AXIS: (f64, f64, usize) = (0.1, 5.0, 50);

/// A row's interior maximum must beat the value at the largest ω₁ by more
/// than this to count as a ridge point. Rows that are flat to within this
/// margin are treated as monotone.
pub const RIDGE_PROMINENCE: f64 = 1e-3;

/// `n` evenly spaced values from `lo` to `hi` inclusive; `[lo]` when `n == 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    omega1: Vec<f64>,
    rates: Vec<f64>,
    pub delta_omega: f64,
    pub tau_c: f64,
    pub shape: PulseShape,
    pub relaxation: RelaxationParams,
}

fn check_axis(name: &'static str, values: &[f64], allow_zero: bool) -> Result<(), ParamError> {
    if values.is_empty() {
        return Err(ParamError::Invalid {
            name,
            reason: "axis is empty".into(),
        });
    }
    for &v in values {
        let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !ok {
            return Err(if allow_zero {
                ParamError::Negative { name, value: v }
            } else {
                ParamError::NotPositive { name, value: v }
            });
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ParamError::Invalid {
            name,
            reason: "values must be strictly increasing".into(),
        });
    }
    Ok(())
}

impl GridSpec {
    pub fn new(
        omega1: Vec<f64>,
        rates: Vec<f64>,
        delta_omega: f64,
        tau_c: f64,
        shape: PulseShape,
        relaxation: RelaxationParams,
    ) -> Result<Self, ParamError> {
        check_axis("omega1", &omega1, true)?;
        check_axis("rate", &rates, false)?;
        let spec = Self {
            omega1,
            rates,
            delta_omega,
            tau_c,
            shape,
            relaxation,
        };
        // Validates δω, τc and the shape once, up front.
        spec.params(spec.omega1[0], spec.rates[0])?;
        Ok(spec)
    }

    /// 50×50 grid over ω₁ ∈ [0.1, 5] and R ∈ [0.1, 5].
    pub fn default_axes(
        delta_omega: f64,
        tau_c: f64,
        shape: PulseShape,
        relaxation: RelaxationParams,
    ) -> Result<Self, ParamError> {
        let (lo, hi, n) = DEFAULT_AXIS;
        Self::new(linspace(lo, hi, n), linspace(lo, hi, n), delta_omega, tau_c, shape, relaxation)
    }

    pub fn omega1(&self) -> &[f64] {
        &self.omega1
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Sweep parameters of one cell.
    pub fn params(&self, omega1: f64, rate: f64) -> Result<SweepParams, ParamError> {
        SweepParams::new(
            self.delta_omega,
            Timing::Rate(rate),
            PulseProfile::new(self.shape, omega1)?,
            self.tau_c,
            self.relaxation,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub omega1: f64,
    pub rate: f64,
    pub p_max: f64,
    pub t_peak: f64,
    pub p_final: f64,
}

/// A cell whose integration failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub omega1: f64,
    pub rate: f64,
    pub message: String,
}

/// Sweep results over a grid, ω₁-major: cell `(i, j)` has `omega1[i]` and
/// `rates[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourDataset {
    pub grid: GridSpec,
    cells: Vec<Option<Cell>>,
    pub failures: Vec<CellFailure>,
}

impl ContourDataset {
    /// Assembles a dataset from precomputed cells in ω₁-major order.
    pub fn from_cells(grid: GridSpec, cells: Vec<Option<Cell>>) -> Result<Self, ParamError> {
        let expected = grid.omega1.len() * grid.rates.len();
        if cells.len() != expected {
            return Err(ParamError::Invalid {
                name: "cells",
                reason: format!("expected {expected} cells, got {}", cells.len()),
            });
        }
        Ok(Self {
            grid,
            cells,
            failures: Vec::new(),
        })
    }

    pub fn cell(&self, i_omega1: usize, j_rate: usize) -> Option<&Cell> {
        self.cells[i_omega1 * self.grid.rates.len() + j_rate].as_ref()
    }

    /// All cells in ω₁-major order, `None` where integration failed.
    pub fn cells(&self) -> &[Option<Cell>] {
        &self.cells
    }

    /// `p_max` along the row of fixed `rates[j]`.
    pub fn row(&self, j_rate: usize) -> Vec<Option<f64>> {
        (0..self.grid.omega1.len())
            .map(|i| self.cell(i, j_rate).map(|c| c.p_max))
            .collect()
    }
}

fn run_cell(grid: &GridSpec, settings: &IntegratorSettings, omega1: f64, rate: f64) -> Result<Cell, String> {
    let params = grid.params(omega1, rate).map_err(|e| e.to_string())?;
    let traj = evolve(&DensityState::ground(), &params, settings, 0.0).map_err(|e| e.to_string())?;
    Ok(Cell {
        omega1,
        rate,
        p_max: traj.stats.p_max,
        t_peak: traj.stats.t_peak,
        p_final: traj.stats.p_final,
    })
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool, ParamError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ParamError::Invalid {
            name: "threads",
            reason: e.to_string(),
        })
}

/// Runs every cell on rayon's global pool. Output does not depend on the
/// order cells are scheduled in.
pub fn grid_sweep(spec: &GridSpec, settings: &IntegratorSettings) -> Result<ContourDataset, ParamError> {
    settings.validate()?;
    let pairs: Vec<(f64, f64)> = spec
        .omega1
        .iter()
        .flat_map(|&w| spec.rates.iter().map(move |&r| (w, r)))
        .collect();
    let results: Vec<Result<Cell, String>> = pairs
        .par_iter()
        .map(|&(w, r)| run_cell(spec, settings, w, r))
        .collect();

    let mut failures = Vec::new();
    let cells = results
        .into_iter()
        .zip(&pairs)
        .map(|(res, &(omega1, rate))| match res {
            Ok(cell) => Some(cell),
            Err(message) => {
                failures.push(CellFailure { omega1, rate, message });
                None
            }
        })
        .collect();
    Ok(ContourDataset {
        grid: spec.clone(),
        cells,
        failures,
    })
}

/// [`grid_sweep`] on a dedicated pool of `threads` workers.
pub fn grid_sweep_with_threads(
    spec: &GridSpec,
    settings: &IntegratorSettings,
    threads: usize,
) -> Result<ContourDataset, ParamError> {
    build_pool(threads)?.install(|| grid_sweep(spec, settings))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub rate: f64,
    pub omega1_star: f64,
}

/// Index of the row maximum if it is interior and prominent. Ties go to the
/// smaller ω₁.
fn interior_argmax(row: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in row.iter().enumerate() {
        if let Some(v) = *v {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (i, v) = best?;
    if i == 0 || i + 1 == row.len() {
        return None;
    }
    let last = row.iter().rev().flatten().next().copied()?;
    (v - last > RIDGE_PROMINENCE).then_some(i)
}

/// Per-row optimal ω₁ for every row with an interior maximum.
pub fn extract_ridge(dataset: &ContourDataset) -> Result<Vec<RidgePoint>, RidgeError> {
    let rows: Vec<Vec<Option<f64>>> = (0..dataset.grid.rates.len()).map(|j| dataset.row(j)).collect();
    ridge_from_rows(&dataset.grid.omega1, &dataset.grid.rates, &rows)
}

/// [`extract_ridge`] on a bare table: `rows[j][i]` is `p_max` at
/// `(omega1[i], rates[j])`, `None` where missing.
pub fn ridge_from_rows(
    omega1: &[f64],
    rates: &[f64],
    rows: &[Vec<Option<f64>>],
) -> Result<Vec<RidgePoint>, RidgeError> {
    let ridge: Vec<RidgePoint> = rates
        .iter()
        .zip(rows)
        .filter_map(|(&rate, row)| {
            debug_assert_eq!(row.len(), omega1.len());
            interior_argmax(row).map(|i| RidgePoint {
                rate,
                omega1_star: omega1[i],
            })
        })
        .collect();
    if ridge.len() < 3 {
        return Err(RidgeError::InsufficientRidge { usable: ridge.len() });
    }
    Ok(ridge)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub points: Vec<RidgePoint>,
    /// Coefficient of `R = k ω₁²` in ms⁻¹·rad⁻¹.
    pub k: f64,
    pub stderr: f64,
}

/// Least-squares fit of `R = k ω₁²` through the origin.
pub fn fit_parabola(ridge: &[RidgePoint]) -> Result<RidgeFit, RidgeError> {
    if ridge.len() < 3 {
        return Err(RidgeError::TooFewPoints(ridge.len()));
    }
    let first = ridge[0].omega1_star;
    if ridge.iter().all(|p| p.omega1_star == first) || ridge.iter().all(|p| p.omega1_star == 0.0) {
        return Err(RidgeError::Degenerate);
    }
    let sxx: f64 = ridge.iter().map(|p| p.omega1_star.powi(4)).sum();
    let sxy: f64 = ridge.iter().map(|p| p.omega1_star.powi(2) * p.rate).sum();
    let k = sxy / sxx;
    let rss: f64 = ridge
        .iter()
        .map(|p| (p.rate - k * p.omega1_star.powi(2)).powi(2))
        .sum();
    let n = ridge.len() as f64;
    let stderr = (rss / (n - 1.0) / sxx).sqrt();
    Ok(RidgeFit {
        points: ridge.to_vec(),
        k,
        stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyPoint {
    pub omega1: f64,
    /// Simulated maximum transfer, `None` if integration failed.
    pub p_sim: Option<f64>,
    /// Model optimum `p(ω₁)`.
    pub p_model: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCurve {
    pub tau_c: f64,
    pub points: Vec<FamilyPoint>,
}

impl FamilyCurve {
    /// `(ω₁, p)` at the simulated optimum (first on ties).
    pub fn sim_peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.p_sim.map(|v| (p.omega1, v)))
            .fold(None, |best: Option<(f64, f64)>, (w, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((w, v)),
            })
    }

    pub fn model_peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.omega1, p.p_model))
            .fold(None, |best: Option<(f64, f64)>, (w, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((w, v)),
            })
    }
}

/// Model curve value used as overlay; reduces to the Landau–Zener transfer
/// when τc = 0 and to its ω₁ → 0 limit of zero.
pub fn model_overlay(omega1: f64, rate: f64, delta_omega: f64, tau_c: f64) -> f64 {
    if tau_c == 0.0 || omega1 == 0.0 {
        arp_probability(omega1, rate)
    } else {
        phenom_max(omega1, rate, delta_omega, tau_c).unwrap_or(f64::NAN)
    }
}

/// Rectangular-pulse slices `p_max(ω₁)` at fixed `R`, one per τc, with the
/// phenomenological model alongside.
pub fn tauc_family(
    omega1: &[f64],
    tau_c: &[f64],
    delta_omega: f64,
    rate: f64,
    settings: &IntegratorSettings,
) -> Result<Vec<FamilyCurve>, ParamError> {
    let mut curves = Vec::with_capacity(tau_c.len());
    for &tc in tau_c {
        let grid = GridSpec::new(
            omega1.to_vec(),
            vec![rate],
            delta_omega,
            tc,
            PulseShape::Rectangular,
            RelaxationParams::disabled(),
        )?;
        let data = grid_sweep(&grid, settings)?;
        let points = omega1
            .iter()
            .enumerate()
            .map(|(i, &w)| FamilyPoint {
                omega1: w,
                p_sim: data.cell(i, 0).map(|c| c.p_max),
                p_model: model_overlay(w, rate, delta_omega, tc),
            })
            .collect();
        curves.push(FamilyCurve { tau_c: tc, points });
    }
    Ok(curves)
}
