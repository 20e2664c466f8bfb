//! Raw solver runs: one stationary state, or one trajectory, from a config.

use cnt_coherence::density::DensityMatrix;
use cnt_coherence::error::Result;
use cnt_coherence::integrate::{evolve, linear_grid, DrivenSystem};
use cnt_coherence::liouvillian::{cw_liouvillian, steady_state};
use cnt_coherence::rates::build_dissipator;
use cnt_coherence::scenario::{Column, Reference, ScanTable};
use cnt_coherence::scheme::{build_scheme, RwaHamiltonian};

use crate::config::{EvolveWindow, RunConfig, Selection};
use crate::output::ResultTable;

fn manifest(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "scenario": cfg.selection.label(),
        "engine": "cnt-coherence",
        "engine_version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_toml(),
    })
}

fn reference(name: &str, value: f64, unit: &str) -> Reference {
    Reference {
        name: name.to_string(),
        value,
        unit: unit.to_string(),
    }
}

/// Steady state as one row per matrix element (i, j, Re ρ_ij, Im ρ_ij), i ≤ j.
pub fn run_steady(cfg: &RunConfig) -> Result<ResultTable> {
    let scheme = build_scheme(cfg.scheme, &cfg.scheme_params)?;
    let l = cw_liouvillian(&scheme, &cfg.fields, &cfg.rates)?;
    let rho = steady_state(&l)?;
    let n = rho.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i..n {
            let z = rho.coherence(i, j);
            rows.push(vec![i as f64, j as f64, z.re, z.im]);
        }
    }
    let check = rho.check();
    Ok(ResultTable {
        columns: vec![
            Column::new("row", "1"),
            Column::new("col", "1"),
            Column::new("re_rho", "1"),
            Column::new("im_rho", "1"),
        ],
        rows,
        references: vec![
            reference("trace_error", check.trace_error, "1"),
            reference("min_eigenvalue", check.min_eigenvalue, "1"),
            reference(
                "slowest_relaxation_rate",
                l.slowest_relaxation_rate().unwrap_or(0.0),
                "1/s",
            ),
        ],
        manifest: manifest(cfg),
    })
}

/// Populations and upper-triangle coherences against time.
pub fn run_evolve(cfg: &RunConfig) -> Result<ResultTable> {
    let window = cfg.evolve.clone().unwrap_or_default();
    let EvolveWindow {
        start,
        stop,
        points,
        ref initial_state,
    } = window;
    let scheme = build_scheme(cfg.scheme, &cfg.scheme_params)?;
    let sys = DrivenSystem::new(
        RwaHamiltonian::new(&scheme, &cfg.fields)?,
        &build_dissipator(&scheme, &cfg.rates)?,
    )?;
    let rho0 = DensityMatrix::basis(scheme.dim(), scheme.index_of(initial_state)?);
    let traj = evolve(
        &rho0,
        &sys,
        &linear_grid(start, stop, points),
        &cfg.solver.evolve_options(),
    )?;
    let n = scheme.dim();
    let mut columns = vec![Column::new("time", "s")];
    columns.extend(
        scheme
            .states
            .iter()
            .map(|s| Column::new(&format!("population_{s}"), "1")),
    );
    for i in 0..n {
        for j in i + 1..n {
            let pair = format!("{}{}", scheme.states[i], scheme.states[j]);
            columns.push(Column::new(&format!("re_rho_{pair}"), "1"));
            columns.push(Column::new(&format!("im_rho_{pair}"), "1"));
        }
    }
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, rho)| {
            let mut row = vec![*t];
            row.extend(rho.populations());
            for i in 0..n {
                for j in i + 1..n {
                    let z = rho.coherence(i, j);
                    row.extend([z.re, z.im]);
                }
            }
            row
        })
        .collect();
    Ok(ResultTable {
        columns,
        rows,
        references: vec![
            reference("max_trace_error", traj.max_trace_error(), "1"),
            reference("accepted_steps", traj.accepted_steps as f64, "1"),
        ],
        manifest: manifest(cfg),
    })
}

/// Runs whatever the config selects.
pub fn run(cfg: &RunConfig) -> Result<ResultTable> {
    match cfg.selection {
        Selection::Scenario(_) => {
            let spec = cfg
                .scenario_spec()
                .expect("scenario selections carry scenario settings");
            let table: ScanTable = cnt_coherence::scenario::run_scenario(&spec)?;
            Ok(ResultTable::from(&table))
        }
        Selection::Steady => run_steady(cfg),
        Selection::Evolve => run_evolve(cfg),
    }
}
