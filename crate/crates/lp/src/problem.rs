//! Sparse minimisation problems with named, bounded columns and named rows.

use std::collections::HashMap;
use std::fmt;

use crate::LpError;

/// Handle to a column of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColId(pub(crate) usize);

/// Handle to a row of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowId(pub(crate) usize);

impl ColId {
    /// Position of the column in the problem's column order.
    pub fn index(self) -> usize {
        self.0
    }
}

impl RowId {
    /// Position of the row in the problem's row order.
    pub fn index(self) -> usize {
        self.0
    }
}

/// Relation between a row's activity and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    LessEq,
    Equal,
    GreaterEq,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSense::LessEq => write!(f, "<="),
            RowSense::Equal => write!(f, "="),
            RowSense::GreaterEq => write!(f, ">="),
        }
    }
}

/// A decision variable: bounds and objective coefficient.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

/// A linear constraint with a sparse coefficient list over existing columns.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub sense: RowSense,
    pub rhs: f64,
    pub coeffs: Vec<(usize, f64)>,
}

/// A sparse linear program, always minimising.
///
/// Columns and rows are identified by unique names and by the [`ColId`] /
/// [`RowId`] handles returned when they are added. Coefficients can only
/// reference columns that already exist, so a fully built program always
/// satisfies its structural invariants; [`LinearProgram::validate`] re-checks
/// them for programs assembled from untrusted parts.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    name: String,
    cols: Vec<Column>,
    rows: Vec<Row>,
    col_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Add a bounded column with the given objective coefficient.
    ///
    /// Infinite bounds are expressed with `f64::INFINITY` /
    /// `f64::NEG_INFINITY`.
    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<ColId, LpError> {
        let name = name.into();
        if self.col_index.contains_key(&name) {
            return Err(LpError::DuplicateName(name));
        }
        if lower.is_nan() || upper.is_nan() || objective.is_nan() {
            return Err(LpError::NotFinite(name));
        }
        if lower > upper {
            return Err(LpError::BoundOrder {
                name,
                lower,
                upper,
            });
        }
        let id = ColId(self.cols.len());
        self.col_index.insert(name.clone(), id.0);
        self.cols.push(Column {
            name,
            lower,
            upper,
            objective,
        });
        Ok(id)
    }

    /// Add a row over existing columns. Duplicate column references within
    /// one row are rejected rather than silently merged.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: RowSense,
        rhs: f64,
        coeffs: &[(ColId, f64)],
    ) -> Result<RowId, LpError> {
        let name = name.into();
        if self.row_index.contains_key(&name) {
            return Err(LpError::DuplicateName(name));
        }
        if !rhs.is_finite() {
            return Err(LpError::NotFinite(name));
        }
        let mut seen = vec![];
        let mut sparse = Vec::with_capacity(coeffs.len());
        for &(col, value) in coeffs {
            if col.0 >= self.cols.len() {
                return Err(LpError::UnknownColumn {
                    row: name,
                    col: col.0,
                });
            }
            if !value.is_finite() {
                return Err(LpError::NotFinite(name));
            }
            if seen.contains(&col.0) {
                return Err(LpError::DuplicateCoefficient {
                    row: name,
                    col: self.cols[col.0].name.clone(),
                });
            }
            seen.push(col.0);
            if value != 0.0 {
                sparse.push((col.0, value));
            }
        }
        let id = RowId(self.rows.len());
        self.row_index.insert(name.clone(), id.0);
        self.rows.push(Row {
            name,
            sense,
            rhs,
            coeffs: sparse,
        });
        Ok(id)
    }

    pub fn col(&self, id: ColId) -> &Column {
        &self.cols[id.0]
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    pub fn col_by_name(&self, name: &str) -> Option<ColId> {
        self.col_index.get(name).copied().map(ColId)
    }

    pub fn row_by_name(&self, name: &str) -> Option<RowId> {
        self.row_index.get(name).copied().map(RowId)
    }

    pub fn cols(&self) -> impl Iterator<Item = (ColId, &Column)> {
        self.cols.iter().enumerate().map(|(i, c)| (ColId(i), c))
    }

    pub fn rows(&self) -> impl Iterator<Item = (RowId, &Row)> {
        self.rows.iter().enumerate().map(|(i, r)| (RowId(i), r))
    }

    /// Shift a row's right-hand side in place (used by perturbation checks).
    pub fn shift_rhs(&mut self, row: RowId, delta: f64) {
        self.rows[row.0].rhs += delta;
    }

    /// Scale every objective coefficient by `factor`.
    pub fn scale_objective(&mut self, factor: f64) {
        for col in &mut self.cols {
            col.objective *= factor;
        }
    }

    /// Re-check the structural invariants, returning one message per breach.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for col in &self.cols {
            if col.lower > col.upper {
                violations.push(format!(
                    "column {}: lower bound {} exceeds upper bound {}",
                    col.name, col.lower, col.upper
                ));
            }
        }
        for row in &self.rows {
            for &(c, _) in &row.coeffs {
                if c >= self.cols.len() {
                    violations.push(format!(
                        "row {}: coefficient references unknown column index {c}",
                        row.name
                    ));
                }
            }
        }
        if self.col_index.len() != self.cols.len() {
            violations.push("column names are not unique".into());
        }
        if self.row_index.len() != self.rows.len() {
            violations.push("row names are not unique".into());
        }
        violations
    }

    /// Activity of each row under the given primal point.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.coeffs.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Objective value at the given primal point.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cols
            .iter()
            .zip(x)
            .map(|(col, &xj)| col.objective * xj)
            .sum()
    }
}
