use std::time::Instant;

use super::errors::exact_errors;
use super::history::{ConvergenceHistory, HistoryRow};
use super::indicators::{eta_eigen, eta_source};
use super::marking::dorfler_mark;
use crate::error::{HhoError, Result};
use crate::local::{DofLayout, StabilizationVariant};
use crate::mesh::{Mesh, Point};
use crate::poly::ScalarField;
use crate::system::{assemble, leb, solve_gevp, solve_source, DofMap, LowerBound};

/// Upper limit on loop iterations, independent of the dof cap.
pub const MAX_STEPS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Halve every cell diameter (two bisection generations).
    Uniform,
    /// Dörfler marking with bulk parameter `theta`.
    Adaptive { theta: f64 },
}

pub struct SourceRun<'a> {
    pub layout: DofLayout,
    pub strategy: Strategy,
    /// No row exceeds this number of unknowns (except a too large initial mesh).
    pub max_ndof: usize,
    pub load: &'a dyn Fn(Point) -> f64,
    pub exact: Option<&'a dyn ScalarField>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRun {
    pub layout: DofLayout,
    pub strategy: Strategy,
    pub max_ndof: usize,
    pub sigma: f64,
    /// One-based eigenvalue index.
    pub index: usize,
}

/// Observer called with each mesh and its history row.
pub type Observer<'a> = &'a mut dyn FnMut(&Mesh, &HistoryRow);

fn check_strategy(strategy: Strategy) -> Result<()> {
    if let Strategy::Adaptive { theta } = strategy {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(HhoError::InvalidParameter {
                name: "theta",
                reason: format!("must lie in (0, 1], got {theta}"),
            });
        }
    }
    Ok(())
}

/// Next mesh, or `None` once it would exceed the dof cap.
fn advance(mesh: &Mesh, layout: DofLayout, marked: Option<&[usize]>, max_ndof: usize) -> Option<Mesh> {
    let next = match marked {
        Some(m) if !m.is_empty() => mesh.refine(m).mesh,
        _ => mesh.refine_uniform(),
    };
    (DofMap::new(&next, layout).total() <= max_ndof).then_some(next)
}

/// Solve, estimate, mark and refine until the dof cap is reached.
pub fn run_source(initial: Mesh, run: &SourceRun, observer: Observer) -> Result<ConvergenceHistory> {
    check_strategy(run.strategy)?;
    let mut history = ConvergenceHistory::default();
    let mut mesh = initial;
    for step in 0..MAX_STEPS {
        let start = Instant::now();
        let system = assemble(&mesh, run.layout, StabilizationVariant::Source, Some(run.load))?;
        let u = solve_source(&system)?;
        let (eta, components, ind) = eta_source(&mesh, &system, &u.data, run.load)?;
        let errors = run.exact.map(|e| exact_errors(&system, &u.data, e)).transpose()?;
        let marked = match run.strategy {
            Strategy::Adaptive { theta } => Some(dorfler_mark(&ind.squared(), theta)?),
            Strategy::Uniform => None,
        };
        let mut row = HistoryRow {
            step,
            ndof: system.dim(),
            num_cells: mesh.num_cells(),
            hmax: mesh.h_max(),
            eta: Some(eta),
            energy_err: errors.map(|e| e.energy),
            l2_err: errors.map(|e| e.l2_cell),
            components,
            marked: marked.as_ref().map(Vec::len),
            ..Default::default()
        };
        let next = advance(&mesh, run.layout, marked.as_deref(), run.max_ndof);
        row.seconds = start.elapsed().as_secs_f64();
        if next.is_none() {
            row.marked = None;
        }
        observer(&mesh, &row);
        history.rows.push(row);
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    Ok(history)
}

/// Adaptive source loop with the default settings of the L-shape benchmark.
pub fn adaptive_source(initial: Mesh, layout: DofLayout, theta: f64, max_ndof: usize, load: &dyn Fn(Point) -> f64) -> Result<ConvergenceHistory> {
    let run = SourceRun {
        layout,
        strategy: Strategy::Adaptive { theta },
        max_ndof,
        load,
        exact: None,
    };
    run_source(initial, &run, &mut |_, _| {})
}

/// Eigenvalue loop: uniform refinement while `α + β λ_h(j) > 1`, then
/// Dörfler marking with `η̂` (or uniform throughout for `Strategy::Uniform`).
pub fn run_eigen(initial: Mesh, run: &EigenRun, observer: Observer) -> Result<(ConvergenceHistory, Option<LowerBound>)> {
    check_strategy(run.strategy)?;
    if run.index == 0 {
        return Err(HhoError::InvalidParameter {
            name: "eig_index",
            reason: "indices start at 1".into(),
        });
    }
    let variant = StabilizationVariant::eigen(run.sigma)?;
    let mut history = ConvergenceHistory::default();
    let mut last = None;
    let mut mesh = initial;
    for step in 0..MAX_STEPS {
        let start = Instant::now();
        let system = assemble(&mesh, run.layout, variant, None)?;
        let sol = solve_gevp(&system, run.index, None)?;
        let pair = &sol.pairs[run.index - 1];
        let bound = leb(pair.value, run.sigma, mesh.h_max());
        let (eta, components, ind) = eta_eigen(&mesh, &system, &pair.vector)?;
        let marked = match run.strategy {
            Strategy::Adaptive { theta } if bound.is_direct(pair.value) => Some(dorfler_mark(&ind.squared(), theta)?),
            _ => None,
        };
        let mut row = HistoryRow {
            step,
            ndof: system.dim(),
            num_cells: mesh.num_cells(),
            hmax: mesh.h_max(),
            eta: Some(eta),
            lambda_h: Some(pair.value),
            leb: Some(bound.value),
            components,
            marked: marked.as_ref().map(Vec::len),
            ..Default::default()
        };
        last = Some(bound);
        let next = advance(&mesh, run.layout, marked.as_deref(), run.max_ndof);
        row.seconds = start.elapsed().as_secs_f64();
        if next.is_none() {
            row.marked = None;
        }
        observer(&mesh, &row);
        history.rows.push(row);
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    Ok((history, last))
}

pub fn adaptive_eigen(initial: Mesh, layout: DofLayout, sigma: f64, index: usize, theta: f64, max_ndof: usize) -> Result<(ConvergenceHistory, Option<LowerBound>)> {
    let run = EigenRun {
        layout,
        strategy: Strategy::Adaptive { theta },
        max_ndof,
        sigma,
        index,
    };
    run_eigen(initial, &run, &mut |_, _| {})
}
