use std::io::{Read, Write};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use super::{Grid, GridKind, SpaceError};

/// A sampled state: values on a grid plus an optional limit at infinity.
///
/// Scalar states are curves on the one-point grid without a limit slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Arc<Grid>,
    values: Vec<f64>,
    at_infinity: Option<f64>,
}

impl Curve {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, at_infinity: Option<f64>) -> Result<Self, SpaceError> {
        if values.len() != grid.len() {
            return Err(SpaceError::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        Ok(Self { grid, values, at_infinity })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(grid: &Arc<Grid>, at_infinity: Option<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self { grid: grid.clone(), values, at_infinity }
    }

    pub fn zeros(grid: &Arc<Grid>, with_infinity: bool) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            at_infinity: with_infinity.then_some(0.0),
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self { grid: Grid::scalar(), values: vec![value], at_infinity: None }
    }

    /// Zero curve with the same grid and limit slot as `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: vec![0.0; self.values.len()],
            at_infinity: self.at_infinity.map(|_| 0.0),
        }
    }

    /// Replaces the values, keeping grid and slot layout.
    pub fn with_values(&self, values: Vec<f64>, at_infinity: Option<f64>) -> Self {
        assert_eq!(values.len(), self.values.len(), "value count must match the grid");
        Self { grid: self.grid.clone(), values, at_infinity }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at_infinity(&self) -> Option<f64> {
        self.at_infinity
    }

    pub fn set_at_infinity(&mut self, value: Option<f64>) {
        self.at_infinity = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The single value of a scalar state (the first grid value otherwise).
    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn same_grid(&self, other: &Curve) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.points() == other.grid.points()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite()) && self.at_infinity.is_none_or(f64::is_finite)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Curve {
        Curve {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            at_infinity: self.at_infinity.map(&f),
        }
    }

    /// `max(-h, 0)` pointwise, including the limit slot.
    pub fn negative_part(&self) -> Curve {
        self.map(|v| (-v).max(0.0))
    }

    /// `max(h, 0)` pointwise, including the limit slot.
    pub fn positive_part(&self) -> Curve {
        self.map(|v| v.max(0.0))
    }

    pub fn scaled(&self, a: f64) -> Curve {
        self.map(|v| a * v)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Curve) {
        self.assert_compatible(other);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        if let (Some(x), Some(y)) = (self.at_infinity.as_mut(), other.at_infinity) {
            *x += a * y;
        }
    }

    /// `sum_i coeffs[i] * curves[i]`; panics when `curves` is empty.
    pub fn linear_combination(coeffs: &[f64], curves: &[Curve]) -> Curve {
        assert!(!curves.is_empty() && coeffs.len() == curves.len());
        let mut out = curves[0].zeros_like();
        for (c, e) in coeffs.iter().zip(curves) {
            out.axpy(*c, e);
        }
        out
    }

    fn assert_compatible(&self, other: &Curve) {
        assert!(self.same_grid(other), "curve arithmetic across different grids");
        assert_eq!(
            self.at_infinity.is_some(),
            other.at_infinity.is_some(),
            "curve arithmetic between curves with and without a limit slot"
        );
    }

    /// Writes `x,value` rows with an optional trailing `inf,<value>` row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SpaceError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.points().iter().zip(&self.values) {
            w.write_record([format!("{x:.16e}"), format!("{v:.16e}")])?;
        }
        if let Some(v) = self.at_infinity {
            w.write_record(["inf".to_string(), format!("{v:.16e}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads the format produced by [`Curve::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Curve, SpaceError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut xs = Vec::new();
        let mut values = Vec::new();
        let mut at_infinity = None;
        for record in r.records() {
            let record = record?;
            if record.len() != 2 {
                return Err(SpaceError::Parse(format!("expected 2 columns, found {}", record.len())));
            }
            let value: f64 = parse_number(&record[1])?;
            if record[0].trim().eq_ignore_ascii_case("inf") {
                at_infinity = Some(value);
            } else {
                if at_infinity.is_some() {
                    return Err(SpaceError::Parse("the inf row must come last".into()));
                }
                xs.push(parse_number(&record[0])?);
                values.push(value);
            }
        }
        let grid = Arc::new(Grid::new(xs, GridKind::Custom)?);
        Curve::new(grid, values, at_infinity)
    }
}

fn parse_number(field: &str) -> Result<f64, SpaceError> {
    field
        .trim()
        .parse()
        .map_err(|_| SpaceError::Parse(format!("not a number: {field:?}")))
}

impl Add for &Curve {
    type Output = Curve;

    fn add(self, rhs: &Curve) -> Curve {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Curve {
    type Output = Curve;

    fn sub(self, rhs: &Curve) -> Curve {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &Curve {
    type Output = Curve;

    fn neg(self) -> Curve {
        self.scaled(-1.0)
    }
}

impl Mul<&Curve> for f64 {
    type Output = Curve;

    fn mul(self, rhs: &Curve) -> Curve {
        rhs.scaled(self)
    }
}

impl AddAssign<&Curve> for Curve {
    fn add_assign(&mut self, rhs: &Curve) {
        self.axpy(1.0, rhs);
    }
}
