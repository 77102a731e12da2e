//! Nodal P1 fields on a mesh.

use crate::{Error, Point2, Result};

/// One scalar value per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field contains non-finite values".into()));
        }
        Ok(ScalarField { values })
    }

    pub fn constant(value: f64, n: usize) -> Self {
        ScalarField {
            values: vec![value; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(0.0, n)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.values[i] = v;
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_len(other.len())?;
        Ok(ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_len(other.len())?;
        Ok(ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_len(&self, other: usize) -> Result<()> {
        if self.values.len() != other {
            return Err(Error::FieldMismatch(format!(
                "field lengths differ: {} vs {}",
                self.values.len(),
                other
            )));
        }
        Ok(())
    }
}

/// One 2-vector per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    values: Vec<Point2>,
}

impl VectorField {
    pub fn new(values: Vec<Point2>) -> Result<Self> {
        if values.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::NonFinite("vector field contains non-finite values".into()));
        }
        Ok(VectorField { values })
    }

    pub fn zeros(n: usize) -> Self {
        VectorField {
            values: vec![Point2::new(0.0, 0.0); n],
        }
    }

    pub fn from_components(x: &ScalarField, y: &ScalarField) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::FieldMismatch(
                "component fields have different lengths".into(),
            ));
        }
        Ok(VectorField {
            values: x
                .values()
                .iter()
                .zip(y.values())
                .map(|(&a, &b)| Point2::new(a, b))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Point2] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Point2 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: Point2) {
        self.values[i] = v;
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField {
            values: self
                .values
                .iter()
                .map(|p| if axis == 0 { p.x } else { p.y })
                .collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}
