use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;
use szilard_core::constants::convert_energy;
use szilard_core::cycle::{linspace, run_cycle, sweep_expansion_with_cutoff, sweep_insertion_with_cutoff};
use szilard_core::qbl::{qbl_delta, validate_against_exact};
use szilard_core::spectrum::{density_map, solve_partitioned_2d, Cutoff};
use szilard_core::{Constants, Error, Occupancy, SweepCurve64};

use crate::config::RunConfig;
use crate::report::{metadata_header, write_timings, RunReport};
use crate::CliError;

const NM: f64 = 1e-9;
/// Ledger row, column and net sums must vanish to this many kT.
const LEDGER_TOLERANCE_KT: f64 = 1e-10;

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out)?;
    Ok(&cfg.out)
}

fn to_unit(cfg: &RunConfig, joules: f64) -> Result<f64, CliError> {
    Ok(convert_energy(joules, cfg.temp_k, cfg.units, &Constants::codata2018())?)
}

/// Four-step cycle ledger from exact 1D sums at `L = lx`.
pub fn cmd_cycle(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let c = Constants::codata2018();
    let dir = out_dir(cfg)?;
    let start = Instant::now();
    let ledger = run_cycle(cfg.lx_nm * NM, cfg.temp_k, &c)?;
    let elapsed = start.elapsed().as_secs_f64();
    let imbalance = ledger.max_imbalance_kt(&c);
    let check = ledger.check_invariants(LEDGER_TOLERANCE_KT, &c);

    let mut text = metadata_header("cycle", cfg);
    text.push_str(&ledger.to_table(cfg.units, &c)?);
    let _ = writeln!(
        text,
        "zero-sum checks (system row, step columns, net W/Q/dU): max imbalance {imbalance:.3e} kT, tolerance {LEDGER_TOLERANCE_KT:e} kT: {}",
        if check.is_ok() { "pass" } else { "FAIL" }
    );
    fs::write(dir.join("cycle_ledger.txt"), text)?;

    let steps: Vec<_> = ledger
        .steps
        .iter()
        .map(|s| {
            Ok(json!({
                "step": s.step.roman(),
                "work": to_unit(cfg, s.work)?,
                "heat": to_unit(cfg, s.heat)?,
                "delta_u": to_unit(cfg, s.delta_u)?,
            }))
        })
        .collect::<Result<_, CliError>>()?;
    let report = RunReport::new(
        "cycle",
        cfg,
        json!({
            "unit": cfg.units.tag(),
            "steps": steps,
            "net_work": to_unit(cfg, ledger.net_work())?,
            "net_heat": to_unit(cfg, ledger.net_heat())?,
            "net_delta_u": to_unit(cfg, ledger.net_delta_u())?,
            "max_imbalance_kt": imbalance,
            "invariants_pass": check.is_ok(),
            "ledger_joule": ledger,
        }),
    );
    report.write(&dir.join("cycle_report.json"))?;
    write_timings(dir, "cycle", &[("run_cycle", elapsed)])?;
    check?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepWhich {
    /// Partition depth from 0 to `ly` at the centre.
    Insert,
    /// Fully inserted partition moved across the whole box, particle in both parts.
    ExpandSuperposed,
    /// Partition moved from the centre to the right wall, particle on the left.
    ExpandLocalized,
}

impl SweepWhich {
    pub fn name(&self) -> &'static str {
        match self {
            SweepWhich::Insert => "insert",
            SweepWhich::ExpandSuperposed => "expand-superposed",
            SweepWhich::ExpandLocalized => "expand-localized",
        }
    }
}

fn worker_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

fn sweep_summary(which: SweepWhich, curve: &SweepCurve64, kt: f64) -> serde_json::Value {
    let f = &curve.free_energy;
    match which {
        SweepWhich::Insert => json!({
            "free_energy_non_decreasing": f.windows(2).all(|w| w[1] >= w[0]),
            "free_energy_change_kt": (f[f.len() - 1] - f[0]) / kt,
        }),
        SweepWhich::ExpandSuperposed => {
            // only meaningful when the abscissa is symmetric about the centre
            let n = f.len();
            let asym = (0..n).map(|i| (f[i] - f[n - 1 - i]).abs() / f[i].abs()).fold(0.0, f64::max);
            json!({
                "max_relative_asymmetry": asym,
                "free_energy_change_kt": (f[n - 1] - f[n / 2]) / kt,
            })
        }
        SweepWhich::ExpandLocalized => json!({
            "free_energy_change_kt": (f[f.len() - 1] - f[0]) / kt,
        }),
    }
}

/// Free energy, entropy and internal energy along one sweep.
pub fn cmd_sweep(cfg: &RunConfig, which: SweepWhich) -> Result<RunReport, CliError> {
    let c = Constants::codata2018();
    let dir = out_dir(cfg)?;
    let base = cfg.geometry()?;
    let grid = cfg.grid()?;
    let t = cfg.temp_k;
    let (lx, ly) = (base.lx, base.ly);
    let pool = worker_pool(cfg)?;
    let start = Instant::now();
    let curve = pool.install(|| match which {
        SweepWhich::Insert => sweep_insertion_with_cutoff(&base, t, &linspace(0.0, ly, cfg.points), &grid, cfg.cutoff_multiple, &c),
        SweepWhich::ExpandSuperposed => {
            sweep_expansion_with_cutoff(&base, t, &linspace(0.0, lx, cfg.points), false, &grid, cfg.cutoff_multiple, &c)
        }
        SweepWhich::ExpandLocalized => {
            sweep_expansion_with_cutoff(&base, t, &linspace(lx / 2.0, lx, cfg.points), true, &grid, cfg.cutoff_multiple, &c)
        }
    })?;
    let elapsed = start.elapsed().as_secs_f64();

    let name = which.name();
    let mut csv = metadata_header(&format!("sweep {name}"), cfg).into_bytes();
    curve.write_csv(&mut csv)?;
    fs::write(dir.join(format!("sweep_{name}.csv")), csv)?;

    let failures: Vec<_> = curve
        .failures
        .iter()
        .map(|(i, msg)| json!({ "index": i, "abscissa_nm": curve.abscissa[*i] / NM, "error": msg }))
        .collect();
    let report = RunReport::new(
        &format!("sweep {name}"),
        cfg,
        json!({
            "abscissa": curve.kind.abscissa(),
            "points": curve.len(),
            "csv": format!("sweep_{name}.csv"),
            "failures": failures,
            "summary": if curve.failures.is_empty() { sweep_summary(which, &curve, c.kt(t)) } else { json!(null) },
        }),
    );
    report.write(&dir.join(format!("sweep_{name}_report.json")))?;
    write_timings(dir, &format!("sweep {name}"), &[("sweep", elapsed)])?;
    if !curve.failures.is_empty() {
        return Err(CliError::PointsFailed {
            failed: curve.failures.len(),
            total: curve.len(),
        });
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug)]
pub struct DensityArgs {
    pub depth_nm: f64,
    pub position_nm: f64,
    pub occupancy: Occupancy,
}

/// Thermal density on the grid for one partition configuration.
pub fn cmd_density(cfg: &RunConfig, args: DensityArgs) -> Result<RunReport, CliError> {
    let c = Constants::codata2018();
    let dir = out_dir(cfg)?;
    let g = cfg.geometry_at(args.depth_nm, args.position_nm, args.occupancy)?;
    let cutoff = Cutoff::Thermal {
        temperature: cfg.temp_k,
        multiple: cfg.cutoff_multiple,
    };
    let start = Instant::now();
    let basis = solve_partitioned_2d(&g, &cfg.grid()?, cutoff, &c)?;
    let solve = start.elapsed().as_secs_f64();
    let rho = density_map(&basis, cfg.temp_k, &c)?;
    let total = start.elapsed().as_secs_f64();

    let s = basis.grid();
    let stem = format!("density_d{}_l{}", args.depth_nm, args.position_nm);
    let mut csv = metadata_header("density", cfg).into_bytes();
    rho.write_csv(&mut csv)?;
    fs::write(dir.join(format!("{stem}.csv")), csv)?;

    let report = RunReport::new(
        "density",
        cfg,
        json!({
            "csv": format!("{stem}.csv"),
            "occupancy": args.occupancy,
            "snapped_depth_nm": s.depth() / NM,
            "snapped_position_nm": s.position() / NM,
            "columns": rho.columns,
            "rows": rho.rows,
            "integral": rho.integral(),
            "left_weight": rho.integral_columns(0..s.column),
            "right_weight": rho.integral_columns(s.column + 1..rho.columns),
            "states": basis.states().len(),
            "ground_energy": to_unit(cfg, basis.spectrum().ground())?,
            "unit": cfg.units.tag(),
            "solver": basis.stats(),
        }),
    );
    report.write(&dir.join(format!("{stem}_report.json")))?;
    write_timings(dir, "density", &[("solve", solve), ("total", total)])?;
    Ok(report)
}

/// Boundary-layer formulas against exact 1D sums over the configured
/// length and temperature grids.
pub fn cmd_qbl(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let c = Constants::codata2018();
    let dir = out_dir(cfg)?;
    let start = Instant::now();
    let unit = cfg.units.tag();
    let mut text = metadata_header("qbl", cfg);
    let _ = writeln!(
        text,
        "{:>10}{:>10}{:>12}{:>22}{:>22}{:>12}{:>12}{:>12}  flag",
        "L_nm",
        "T_K",
        "delta_nm",
        format!("W_analytic [{unit}]"),
        format!("W_exact [{unit}]"),
        "err_W",
        "err_dU",
        "err_Q"
    );
    let mut rows = Vec::new();
    for &t in &cfg.qbl_temps_k {
        for &l in &cfg.qbl_lengths_nm {
            let delta = qbl_delta(t, &c)? / NM;
            let conv = |v: f64| convert_energy(v, t, cfg.units, &c);
            match validate_against_exact(l * NM, t, &c) {
                Ok(r) => {
                    let flag = if r.near_validity_boundary { "near-validity-boundary" } else { "ok" };
                    let _ = writeln!(
                        text,
                        "{:>10}{:>10}{:>12.6}{:>22.14e}{:>22.14e}{:>12.3e}{:>12.3e}{:>12.3e}  {flag}",
                        l,
                        t,
                        delta,
                        conv(r.work_analytic)?,
                        conv(r.work_exact)?,
                        r.work_rel_error,
                        r.delta_u_rel_error,
                        r.heat_rel_error
                    );
                    rows.push(json!({
                        "length_nm": l, "temperature_k": t, "delta_nm": delta, "status": flag,
                        "work_analytic": conv(r.work_analytic)?, "work_exact": conv(r.work_exact)?,
                        "delta_u_analytic": conv(r.delta_u_analytic)?, "delta_u_exact": conv(r.delta_u_exact)?,
                        "heat_analytic": conv(r.heat_analytic)?, "heat_exact": conv(r.heat_exact)?,
                        "work_rel_error": r.work_rel_error, "delta_u_rel_error": r.delta_u_rel_error,
                        "heat_rel_error": r.heat_rel_error,
                    }));
                }
                Err(e @ Error::OutOfValidity { .. }) => {
                    let _ = writeln!(text, "{:>10}{:>10}{:>12.6}{:>22}{:>22}{:>12}{:>12}{:>12}  out-of-validity", l, t, delta, "-", "-", "-", "-", "-");
                    rows.push(json!({
                        "length_nm": l, "temperature_k": t, "delta_nm": delta,
                        "status": "out-of-validity", "error": e.to_string(),
                    }));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    fs::write(dir.join("qbl_table.txt"), text)?;
    let report = RunReport::new(
        "qbl",
        cfg,
        json!({
            "unit": unit,
            "delta_300k_nm": qbl_delta(300.0, &c)? / NM,
            "delta_nm": qbl_delta(cfg.temp_k, &c)? / NM,
            "rows": rows,
        }),
    );
    report.write(&dir.join("qbl_report.json"))?;
    write_timings(dir, "qbl", &[("validate", elapsed)])?;
    Ok(report)
}
