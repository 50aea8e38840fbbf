use std::fmt::Write;

use super::indicators::EstimatorComponents;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    pub ndof: usize,
    pub num_cells: usize,
    pub hmax: f64,
    pub eta: Option<f64>,
    pub energy_err: Option<f64>,
    pub l2_err: Option<f64>,
    pub lambda_h: Option<f64>,
    pub leb: Option<f64>,
    pub seconds: f64,
    pub components: EstimatorComponents,
    /// Cells marked for the next step; `None` for a uniform step or the last row.
    pub marked: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Eta,
    EnergyErr,
    L2Err,
    LambdaH,
    Leb,
}

/// Abscissa of a convergence rate; rates are positive for decreasing errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Abscissa {
    SqrtNdof,
    Ndof,
    /// `1 / h_max`.
    H,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub rows: Vec<HistoryRow>,
}

pub const CSV_HEADER: &str = "step,ndof,hmax,eta,energy_err,l2_err,lambda_h,leb,seconds";
pub const COMPONENTS_HEADER: &str = "step,ndof,eta,mu2,stabilization2,oscillation2,extra_jumps2,residual2";

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

impl HistoryRow {
    pub fn get(&self, column: Column) -> Option<f64> {
        match column {
            Column::Eta => self.eta,
            Column::EnergyErr => self.energy_err,
            Column::L2Err => self.l2_err,
            Column::LambdaH => self.lambda_h,
            Column::Leb => self.leb,
        }
    }

    fn abscissa(&self, a: Abscissa) -> f64 {
        match a {
            Abscissa::SqrtNdof => (self.ndof as f64).sqrt(),
            Abscissa::Ndof => self.ndof as f64,
            Abscissa::H => 1.0 / self.hmax,
        }
    }
}

impl ConvergenceHistory {
    /// CSV text; the `seconds` field stays empty unless `timing` is set, so
    /// that repeated runs produce identical files.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let secs = if timing { format!("{:.6}", r.seconds) } else { String::new() };
            writeln!(
                s,
                "{},{},{:.16e},{},{},{},{},{},{}",
                r.step,
                r.ndof,
                r.hmax,
                opt(r.eta),
                opt(r.energy_err),
                opt(r.l2_err),
                opt(r.lambda_h),
                opt(r.leb),
                secs
            )
            .unwrap();
        }
        s
    }

    /// Squared estimator components per row.
    pub fn components_csv(&self) -> String {
        let mut s = String::from(COMPONENTS_HEADER);
        s.push('\n');
        for r in &self.rows {
            let c = &r.components;
            writeln!(
                s,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.step,
                r.ndof,
                opt(r.eta),
                c.mu,
                c.stabilization,
                c.oscillation,
                c.extra_jumps,
                c.residual
            )
            .unwrap();
        }
        s
    }

    /// Series of `(abscissa, value)` for rows that carry the column.
    pub fn series(&self, column: Column, abscissa: Abscissa) -> Vec<(f64, f64)> {
        self.rows.iter().filter_map(|r| r.get(column).map(|v| (r.abscissa(abscissa), v))).collect()
    }
}

/// Consecutive rates `log(e_i/e_{i+1}) / log(x_{i+1}/x_i)`.
pub fn eoc(history: &ConvergenceHistory, column: Column, abscissa: Abscissa) -> Vec<f64> {
    rates(&history.series(column, abscissa))
}

pub fn rates(series: &[(f64, f64)]) -> Vec<f64> {
    series.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 / w[0].0).ln()).collect()
}

/// Least-squares rate `−d log e / d log x` over the given points.
pub fn fitted_rate(series: &[(f64, f64)]) -> f64 {
    let n = series.len() as f64;
    let lx: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}
