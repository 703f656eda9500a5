use std::collections::BTreeSet;

use arpsim::{
    evolve, fit_parabola, grid_sweep, grid_sweep_with_threads, phenom_max, phenom_tmax, phenom_transfer,
    ridge_from_rows, tauc_family, DensityState, GridSpec, IntegratorSettings, ParamError, PhenomParams,
    PulseProfile, PulseShape, RelaxationParams, SweepParams, Tail, TailDrive, Timing,
};
use serde_json::{json, Value};

use crate::args::{
    read_input, FamilyArgs, ModelArgs, PhysicsArgs, ProfileArg, RidgeFitArgs, ScanArg, SimulateArgs, SolverArgs,
    SweepArgs, TailDriveArg, TimingArgs,
};
use crate::error::CliError;
use crate::output::{ensure_dir, jnum, num, write_json, CsvOut};

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t_ms", "rho11", "rho22", "re_rho12", "im_rho12", "mx", "my", "mz", "amplitude"];
pub const CONTOUR_HEADER: [&str; 5] = ["omega1", "rate", "p_max", "t_peak_ms", "p_final"];
pub const RIDGE_HEADER: [&str; 2] = ["rate", "omega1_star"];
pub const MODEL_HEADER: [&str; 2] = ["x", "value"];
pub const FAMILY_HEADER: [&str; 4] = ["tau_c", "omega1", "p_sim", "p_model"];

fn shape(physics: &PhysicsArgs) -> Result<PulseShape, CliError> {
    Ok(match physics.profile {
        ProfileArg::Rect => PulseShape::Rectangular,
        ProfileArg::Gauss => PulseShape::gaussian(physics.cutoff_fraction)?,
    })
}

fn relaxation(physics: &PhysicsArgs) -> Result<RelaxationParams, CliError> {
    if physics.t1.is_none() && physics.t2.is_none() {
        return Ok(RelaxationParams::disabled());
    }
    Ok(RelaxationParams::new(
        physics.m0,
        physics.t1.unwrap_or(f64::INFINITY),
        physics.t2.unwrap_or(f64::INFINITY),
    )?)
}

fn timing(t: &TimingArgs) -> Timing {
    match (t.duration, t.rate) {
        (Some(d), _) => Timing::Duration(d),
        (None, Some(r)) => Timing::Rate(r),
        (None, None) => unreachable!("clap requires one of --duration and --rate"),
    }
}

fn settings(s: &SolverArgs) -> Result<IntegratorSettings, CliError> {
    let settings = IntegratorSettings {
        rel_tol: s.rel_tol,
        abs_tol: s.abs_tol,
        max_step: s.max_step,
        sample_count: s.samples,
    };
    settings.validate()?;
    Ok(settings)
}

/// Reports an axis error under the range flag that produced the axis.
fn axis_error(e: ParamError, omega1_flag: &str, rate_flag: &str) -> CliError {
    match e.name() {
        "omega1" => CliError::usage(format!("invalid {omega1_flag}: {e}")),
        "rate" => CliError::usage(format!("invalid {rate_flag}: {e}")),
        _ => e.into(),
    }
}

fn params_json(p: &SweepParams) -> Value {
    let relax = p.relaxation();
    let cutoff = match p.profile().shape {
        PulseShape::Gaussian { cutoff_fraction } => jnum(cutoff_fraction),
        PulseShape::Rectangular => Value::Null,
    };
    json!({
        "profile": p.profile().shape.name(),
        "delta_omega": jnum(p.delta_omega().value()),
        "omega1": jnum(p.omega1().value()),
        "peak_amplitude": jnum(p.peak_amplitude()),
        "duration_ms": jnum(p.duration()),
        "rate": jnum(p.rate().value()),
        "tau_c": jnum(p.tau_c()),
        "t1": jnum(relax.t1()),
        "t2": jnum(relax.t2()),
        "m0": jnum(relax.m0()),
        "cutoff_fraction": cutoff,
    })
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let params = SweepParams::new(
        a.physics.delta_omega,
        timing(&a.timing),
        PulseProfile::new(shape(&a.physics)?, a.omega1)?,
        a.physics.tauc,
        relaxation(&a.physics)?,
    )?;
    let settings = settings(&a.solver)?;
    let drive = match a.tail_drive {
        TailDriveArg::Off => TailDrive::Off,
        TailDriveArg::Continued => TailDrive::Continued,
    };
    let tail = Tail {
        duration: a.tail,
        drive,
    };
    let traj = evolve(&DensityState::ground(), &params, &settings, tail)?;

    let out = &a.common.out;
    ensure_dir(out)?;
    let mut csv = CsvOut::create(out, "trajectory.csv", &TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        let rho12 = s.state.rho12();
        csv.row([
            s.t,
            s.state.rho11(),
            s.state.rho22(),
            rho12.re,
            rho12.im,
            s.bloch.mx,
            s.bloch.my,
            s.bloch.mz,
            s.amplitude,
        ]
        .map(num))?;
    }
    csv.finish()?;

    let mut p = params_json(&params);
    p["tail_ms"] = jnum(a.tail);
    p["tail_drive"] = json!(match drive {
        TailDrive::Off => "off",
        TailDrive::Continued => "continued",
    });
    p["samples"] = json!(settings.sample_count);
    let summary = json!({
        "p_max": jnum(traj.stats.p_max),
        "t_peak_ms": jnum(traj.stats.t_peak),
        "p_final": jnum(traj.stats.p_final),
        "params": p,
    });
    write_json(out, "summary.json", &summary)?;
    println!(
        "p_max {} at t = {} ms, p_final {}",
        num(traj.stats.p_max),
        num(traj.stats.t_peak),
        num(traj.stats.p_final)
    );
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let grid = GridSpec::new(
        a.omega1_range.values(),
        a.rate_range.values(),
        a.physics.delta_omega,
        a.physics.tauc,
        shape(&a.physics)?,
        relaxation(&a.physics)?,
    )
    .map_err(|e| axis_error(e, "--omega1-range", "--rate-range"))?;
    let settings = settings(&a.solver)?;
    let data = match a.threads {
        Some(0) => return Err(CliError::usage("invalid --threads: must be at least 1")),
        Some(n) => grid_sweep_with_threads(&grid, &settings, n),
        None => grid_sweep(&grid, &settings),
    }
    .map_err(|e| match e.name() {
        "threads" => CliError::usage(format!("invalid --threads: {e}")),
        _ => e.into(),
    })?;

    let out = &a.common.out;
    ensure_dir(out)?;
    let mut csv = CsvOut::create(out, "contour.csv", &CONTOUR_HEADER)?;
    let n_rates = grid.rates().len();
    for (idx, cell) in data.cells().iter().enumerate() {
        let (w, r) = (grid.omega1()[idx / n_rates], grid.rates()[idx % n_rates]);
        let mut fields = vec![num(w), num(r)];
        match cell {
            Some(c) => fields.extend([c.p_max, c.t_peak, c.p_final].map(num)),
            None => fields.extend([String::new(), String::new(), String::new()]),
        }
        csv.row(fields)?;
    }
    csv.finish()?;

    let warnings: Vec<Value> = data
        .failures
        .iter()
        .map(|f| json!({"omega1": jnum(f.omega1), "rate": jnum(f.rate), "message": f.message}))
        .collect();
    let range = |r: &crate::args::Range| json!([jnum(r.lo), jnum(r.hi), r.n]);
    let meta = json!({
        "profile": grid.shape.name(),
        "delta_omega": jnum(grid.delta_omega),
        "tau_c": jnum(grid.tau_c),
        "omega1_range": range(&a.omega1_range),
        "rate_range": range(&a.rate_range),
        "samples": settings.sample_count,
        "cells": data.cells().len(),
        "warnings": warnings,
    });
    write_json(out, "sweep.json", &meta)?;
    println!("{} cells, {} failed", data.cells().len(), data.failures.len());
    Ok(())
}

/// p_max table parsed from contour.csv.
#[derive(Debug, PartialEq)]
pub struct ContourTable {
    pub omega1: Vec<f64>,
    pub rates: Vec<f64>,
    /// `rows[j][i]` is `p_max` at `(omega1[i], rates[j])`.
    pub rows: Vec<Vec<Option<f64>>>,
}

fn parse_field(s: &str, what: &str, line: u64) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--input line {line}: bad {what} '{s}'")))
}

pub fn parse_contour(text: &str) -> Result<ContourTable, CliError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::usage(format!("--input: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != CONTOUR_HEADER {
        return Err(CliError::usage(format!(
            "--input: expected header {}",
            CONTOUR_HEADER.join(",")
        )));
    }
    let mut cells = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k as u64 + 2;
        let record = record.map_err(|e| CliError::usage(format!("--input line {line}: {e}")))?;
        let w = parse_field(&record[0], "omega1", line)?;
        let r = parse_field(&record[1], "rate", line)?;
        let p = match record[2].trim() {
            "" => None,
            s => Some(parse_field(s, "p_max", line)?),
        };
        cells.push((w, r, p));
    }
    if cells.is_empty() {
        return Err(CliError::usage("--input: no data rows"));
    }
    // Axis values round-trip exactly through the 12-digit text, so bitwise
    // comparison identifies grid lines.
    let axis = |pick: fn(&(f64, f64, Option<f64>)) -> f64| -> Vec<f64> {
        let set: BTreeSet<u64> = cells.iter().map(|c| pick(c).to_bits()).collect();
        let mut v: Vec<f64> = set.into_iter().map(f64::from_bits).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let omega1 = axis(|c| c.0);
    let rates = axis(|c| c.1);
    let mut rows = vec![vec![None; omega1.len()]; rates.len()];
    for (w, r, p) in cells {
        let i = omega1.iter().position(|x| x.to_bits() == w.to_bits()).expect("axis built from cells");
        let j = rates.iter().position(|x| x.to_bits() == r.to_bits()).expect("axis built from cells");
        rows[j][i] = p;
    }
    Ok(ContourTable { omega1, rates, rows })
}

pub fn ridge_fit(a: &RidgeFitArgs) -> Result<(), CliError> {
    let text = read_input(&a.input, "--input")?;
    let table = parse_contour(&text)?;
    let ridge = ridge_from_rows(&table.omega1, &table.rates, &table.rows)?;
    let fit = fit_parabola(&ridge)?;

    let out = &a.common.out;
    ensure_dir(out)?;
    let mut csv = CsvOut::create(out, "ridge.csv", &RIDGE_HEADER)?;
    for p in &fit.points {
        csv.row([num(p.rate), num(p.omega1_star)])?;
    }
    csv.finish()?;
    write_json(
        out,
        "fit.json",
        &json!({"k": jnum(fit.k), "stderr": jnum(fit.stderr), "n_points": fit.points.len()}),
    )?;
    println!("k = {} ± {} from {} rows", num(fit.k), num(fit.stderr), fit.points.len());
    Ok(())
}

pub fn model(a: &ModelArgs) -> Result<(), CliError> {
    // Validates δω and the timing flags with their usual names.
    let sweep = SweepParams::new(
        a.delta_omega,
        timing(&a.timing),
        PulseProfile::rectangular(a.omega1)?,
        a.tauc,
        RelaxationParams::disabled(),
    )?;
    let rate = sweep.rate().value();
    let model = PhenomParams::new(a.omega1, rate, a.delta_omega, a.tauc)?;
    let t_max = phenom_tmax(&model)?;

    let range = a.range.unwrap_or(match a.scan {
        ScanArg::Time => crate::args::Range {
            lo: 0.0,
            hi: sweep.duration(),
            n: 2001,
        },
        ScanArg::Omega1 => crate::args::Range {
            lo: 0.01,
            hi: 5.0,
            n: 500,
        },
    });
    let xs = range.values();
    let values: Vec<f64> = match a.scan {
        ScanArg::Time => {
            if xs.iter().any(|&t| t < 0.0) {
                return Err(CliError::usage("invalid --range: times must be non-negative"));
            }
            xs.iter().map(|&t| phenom_transfer(t, &model)).collect()
        }
        ScanArg::Omega1 => xs
            .iter()
            .map(|&w| phenom_max(w, rate, a.delta_omega, a.tauc))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::usage(format!("invalid --range: {e}")))?,
    };

    let out = &a.common.out;
    ensure_dir(out)?;
    let mut csv = CsvOut::create(out, "model.csv", &MODEL_HEADER)?;
    for (x, v) in xs.iter().zip(&values) {
        csv.row([num(*x), num(*v)])?;
    }
    csv.finish()?;

    let (peak_x, peak_v) = xs
        .iter()
        .zip(&values)
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (&x, &v)| if v > best.1 { (x, v) } else { best });
    let meta = json!({
        "scan": match a.scan { ScanArg::Time => "time", ScanArg::Omega1 => "omega1" },
        "omega1": jnum(a.omega1),
        "rate": jnum(rate),
        "delta_omega": jnum(a.delta_omega),
        "tau_c": jnum(a.tauc),
        "t_max_ms": jnum(t_max),
        "p_at_t_max": jnum(phenom_transfer(t_max, &model)),
        "scan_peak": {"x": jnum(peak_x), "value": jnum(peak_v)},
    });
    write_json(out, "model.json", &meta)?;
    println!("t_max = {} ms", num(t_max));
    Ok(())
}

pub fn family(a: &FamilyArgs) -> Result<(), CliError> {
    if a.tauc_list.is_empty() {
        return Err(CliError::usage("invalid --tauc-list: empty"));
    }
    let settings = settings(&a.solver)?;
    let omega1 = a.omega1_range.values();
    let curves = tauc_family(&omega1, &a.tauc_list, a.delta_omega, a.rate, &settings).map_err(|e| match e.name() {
        "tau_c" => CliError::usage(format!("invalid --tauc-list: {e}")),
        _ => axis_error(e, "--omega1-range", "--rate"),
    })?;

    let out = &a.common.out;
    ensure_dir(out)?;
    let mut csv = CsvOut::create(out, "family.csv", &FAMILY_HEADER)?;
    let mut warnings = Vec::new();
    for c in &curves {
        for p in &c.points {
            let sim = match p.p_sim {
                Some(v) => num(v),
                None => {
                    warnings.push(json!({"tau_c": jnum(c.tau_c), "omega1": jnum(p.omega1)}));
                    String::new()
                }
            };
            csv.row([num(c.tau_c), num(p.omega1), sim, num(p.p_model)])?;
        }
    }
    csv.finish()?;

    let peak = |p: Option<(f64, f64)>| match p {
        Some((w, v)) => json!({"omega1": jnum(w), "p": jnum(v)}),
        None => Value::Null,
    };
    let summary: Vec<Value> = curves
        .iter()
        .map(|c| json!({"tau_c": jnum(c.tau_c), "sim_peak": peak(c.sim_peak()), "model_peak": peak(c.model_peak())}))
        .collect();
    write_json(
        out,
        "family.json",
        &json!({
            "delta_omega": jnum(a.delta_omega),
            "rate": jnum(a.rate),
            "curves": summary,
            "warnings": warnings,
        }),
    )?;
    println!("{} curves", curves.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_round_trip() {
        let text = "omega1,rate,p_max,t_peak_ms,p_final\n\
                    1.00000000000e-1,5.00000000000e-1,2.0e-1,1,1\n\
                    1.00000000000e-1,1.00000000000e0,,,\n\
                    2.00000000000e-1,5.00000000000e-1,3.0e-1,1,1\n\
                    2.00000000000e-1,1.00000000000e0,4.0e-1,1,1\n";
        let t = parse_contour(text).unwrap();
        assert_eq!(t.omega1, vec![0.1, 0.2]);
        assert_eq!(t.rates, vec![0.5, 1.0]);
        assert_eq!(t.rows, vec![vec![Some(0.2), Some(0.3)], vec![None, Some(0.4)]]);
    }

    #[test]
    fn contour_rejects_bad_input() {
        assert!(parse_contour("a,b\n1,2\n").is_err());
        assert!(parse_contour("omega1,rate,p_max,t_peak_ms,p_final\n").is_err());
        let e = parse_contour("omega1,rate,p_max,t_peak_ms,p_final\nx,1,1,1,1\n").unwrap_err();
        assert!(e.message.contains("omega1"));
    }
}
