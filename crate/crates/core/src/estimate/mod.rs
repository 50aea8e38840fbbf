//! A posteriori estimators, exact errors, marking and adaptive loops.

mod adapt;
mod errors;
mod history;
mod indicators;
mod marking;

pub use adapt::{adaptive_eigen, adaptive_source, run_eigen, run_source, EigenRun, Observer, SourceRun, Strategy, MAX_STEPS};
pub use errors::{exact_errors, ExactErrors, Manufactured, SinSquared};
pub use history::{eoc, fitted_rate, rates, Abscissa, Column, ConvergenceHistory, HistoryRow, COMPONENTS_HEADER, CSV_HEADER};
pub use indicators::{eta_eigen, eta_source, mu_jumps, oscillation, reconstructions, EstimatorComponents, FacetJumps, Indicators};
pub use marking::dorfler_mark;
