//! Fixed-format MPS export for cross-checking problems with external solvers.
//!
//! Fixed MPS limits names to eight characters, so rows and columns are
//! emitted under positional names (`R0`, `R1`, ... and `C0`, `C1`, ...)
//! matching the problem's row and column order.

use crate::problem::{LinearProgram, RowSense};
use std::fmt::Write;

fn field(buf: &mut String, start: usize, text: &str) {
    while buf.len() < start {
        buf.push(' ');
    }
    buf.push_str(text);
}

fn line(f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) -> String {
    let mut buf = String::new();
    field(&mut buf, 1, f1);
    field(&mut buf, 4, f2);
    field(&mut buf, 14, f3);
    field(&mut buf, 24, f4);
    field(&mut buf, 39, f5);
    field(&mut buf, 49, f6);
    buf.trim_end().to_string()
}

fn num(v: f64) -> String {
    format!("{v:.10}")
}

/// Render the program in fixed MPS. The objective row is named `COST`.
pub fn to_mps(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let name = if lp.name().is_empty() { "LP" } else { lp.name() };
    writeln!(out, "NAME          {name}").unwrap();

    out.push_str("ROWS\n");
    out.push_str(&line("N", "COST", "", "", "", ""));
    out.push('\n');
    for (id, row) in lp.rows() {
        let tag = match row.sense {
            RowSense::LessEq => "L",
            RowSense::Equal => "E",
            RowSense::GreaterEq => "G",
        };
        out.push_str(&line(tag, &format!("R{}", id.index()), "", "", "", ""));
        out.push('\n');
    }

    // Transpose row-wise coefficients into per-column entry lists.
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_cols()];
    for (rid, row) in lp.rows() {
        for &(c, v) in &row.coeffs {
            per_col[c].push((rid.index(), v));
        }
    }

    out.push_str("COLUMNS\n");
    for (id, col) in lp.cols() {
        let cname = format!("C{}", id.index());
        let mut entries: Vec<(String, f64)> = Vec::new();
        if col.objective != 0.0 {
            entries.push(("COST".to_string(), col.objective));
        }
        for &(r, v) in &per_col[id.index()] {
            entries.push((format!("R{r}"), v));
        }
        let mut chunks = entries.chunks(2);
        for chunk in &mut chunks {
            let (r1, v1) = &chunk[0];
            if let Some((r2, v2)) = chunk.get(1) {
                out.push_str(&line("", &cname, r1, &num(*v1), r2, &num(*v2)));
            } else {
                out.push_str(&line("", &cname, r1, &num(*v1), "", ""));
            }
            out.push('\n');
        }
    }

    out.push_str("RHS\n");
    for (id, row) in lp.rows() {
        if row.rhs != 0.0 {
            out.push_str(&line(
                "",
                "RHS",
                &format!("R{}", id.index()),
                &num(row.rhs),
                "",
                "",
            ));
            out.push('\n');
        }
    }

    out.push_str("BOUNDS\n");
    for (id, col) in lp.cols() {
        let cname = format!("C{}", id.index());
        match (col.lower, col.upper) {
            (lo, hi) if lo == hi => {
                out.push_str(&line("FX", "BND", &cname, &num(lo), "", ""));
                out.push('\n');
            }
            (lo, hi) => {
                if lo.is_infinite() && hi.is_infinite() {
                    out.push_str(&line("FR", "BND", &cname, "", "", ""));
                    out.push('\n');
                    continue;
                }
                if lo.is_infinite() {
                    out.push_str(&line("MI", "BND", &cname, "", "", ""));
                    out.push('\n');
                } else if lo != 0.0 {
                    out.push_str(&line("LO", "BND", &cname, &num(lo), "", ""));
                    out.push('\n');
                }
                if hi.is_finite() {
                    out.push_str(&line("UP", "BND", &cname, &num(hi), "", ""));
                    out.push('\n');
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::LinearProgram;

    #[test]
    fn small_program_renders_all_sections() {
        let mut lp = LinearProgram::new("demo");
        let a = lp.add_column("a", 0.0, 4.0, 2.0).unwrap();
        let b = lp.add_column("b", 0.0, f64::INFINITY, 3.0).unwrap();
        lp.add_row("sum", RowSense::Equal, 10.0, &[(a, 1.0), (b, 1.0)])
            .unwrap();
        let mps = to_mps(&lp);
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(mps.contains(section), "missing section {section}");
        }
        assert!(mps.contains(" E  R0"));
        assert!(mps.lines().any(|l| l.starts_with(" UP BND")));
        // Column C0 carries the objective and the row coefficient on one line.
        assert!(mps
            .lines()
            .any(|l| l.contains("C0") && l.contains("COST") && l.contains("R0")));
    }
}
