use std::fmt::Write as _;
use std::io::{self, Write};

/// One outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub k: usize,
    pub alpha: f64,
    /// `‖u^k − u^{k−1}‖_{H¹}`.
    pub inc_h1: f64,
    /// `‖u^k − u^{k−1}‖_{L²}`.
    pub inc_l2: f64,
    pub newton_its: usize,
    /// Cumulative number of linear solves up to and including this iteration.
    pub lin_solves: usize,
    /// Discrete Dirichlet energy; NaN where no energy is defined.
    pub energy: f64,
    /// Smallest value of `ũ_h − lower bound` over latent dofs.
    pub min_gap: f64,
    /// Smallest local average of `u_h − lower bound` (cell averages for
    /// broken latent spaces, nodal values for lumped ones).
    pub min_excess: f64,
}

pub const CSV_HEADER: &str = "k,alpha,inc_h1,inc_l2,newton_its,lin_solves,energy";

/// Six significant digits, the CSV number format.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.5e}")
    }
}

impl IterationRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.k,
            fmt_sig(self.alpha),
            fmt_sig(self.inc_h1),
            fmt_sig(self.inc_l2),
            self.newton_its,
            self.lin_solves,
            fmt_sig(self.energy)
        )
    }
}

/// Iteration table plus free-form metadata, serialized as CSV with `#` comment lines.
#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub rows: Vec<IterationRow>,
    pub converged: bool,
    pub wall_time: f64,
    pub metadata: Vec<(String, String)>,
}

impl SolveReport {
    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "# converged = {}", self.converged);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Total linear solves recorded in a report.
pub fn count_linear_solves(report: &SolveReport) -> usize {
    report.rows.last().map_or(0, |r| r.lin_solves)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, lin: usize) -> IterationRow {
        IterationRow {
            k,
            alpha: 1.0,
            inc_h1: 2.1,
            inc_l2: 0.5,
            newton_its: 1,
            lin_solves: lin,
            energy: -0.25,
            min_gap: 1.0,
            min_excess: 1.0,
        }
    }

    #[test]
    fn counts() {
        let mut r = SolveReport::default();
        assert_eq!(count_linear_solves(&r), 0);
        r.rows.push(row(1, 1));
        assert_eq!(count_linear_solves(&r), 1);
        r.rows.push(row(2, 4));
        assert_eq!(count_linear_solves(&r), 4);
    }

    #[test]
    fn csv_layout() {
        let mut r = SolveReport::default();
        r.push_meta("problem", "biactive");
        r.rows.push(row(1, 9));
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# problem = biactive");
        assert_eq!(lines[2], CSV_HEADER);
        assert_eq!(lines[3], "1,1.00000e0,2.10000e0,5.00000e-1,1,9,-2.50000e-1");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }
}
