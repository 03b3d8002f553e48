use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// A symmetric `n x n` linear map that can only be applied, never inspected.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// Computes `Op X` for an `n x b` block.
    fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

/// An explicit symmetric matrix behind the operator interface.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("dense operator must be square"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.dim() {
            return Err(invalid(format!("block has {} rows, operator is {}", x.nrows(), self.dim())));
        }
        Ok(&self.matrix * x)
    }
}
