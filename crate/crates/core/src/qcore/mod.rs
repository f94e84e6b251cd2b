//! Dense complex linear algebra over tensor-product Hilbert spaces.

mod linalg;
mod operator;
mod pauli;
mod space;
mod state;

pub use linalg::{
    apply_local_kraus, ground_state, hermitian_eigen, matrix_exponential, negativity,
    partial_trace, partial_transpose, project_local, pure_to_density, unitarity_error, GroundState,
    DEGENERACY_GAP, NEGATIVITY_TOL,
};
pub use operator::{Axis, CMatrix, CVector, LinearCombination, LinearOperator, Observable, C64};
pub use pauli::{PauliString, PauliSum};
pub use space::{dimension_cap, set_dimension_cap, HilbertSpace, DEFAULT_DIMENSION_CAP};
pub use state::{
    anticommutator_expectation, expectation, moment, tensor_product, variance, DensityMatrix,
    MaximallyMixed, PureState, QuantumState, TensorProduct, IMAG_TOL, NORM_TOL, PSD_TOL, TRACE_TOL,
};

pub(crate) use linalg::local_sandwich;
pub(crate) use operator::c;

use crate::error::{Error, Result};

/// The three collective angular momentum components together with the
/// particle-number observable of the same system.
#[derive(Debug, Clone)]
pub struct CollectiveSpin<O> {
    pub x: O,
    pub y: O,
    pub z: O,
    pub number: O,
}

impl<O: LinearCombination> CollectiveSpin<O> {
    pub fn axis(&self, axis: Axis) -> &O {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    /// `alpha_x J_x + alpha_y J_y + alpha_z J_z`.
    pub fn along(&self, alpha: [f64; 3]) -> Result<O> {
        let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "direction has norm {norm}, expected 1"
            )));
        }
        O::combine(&[
            (alpha[0], &self.x),
            (alpha[1], &self.y),
            (alpha[2], &self.z),
        ])
    }

    pub fn space(&self) -> &HilbertSpace {
        self.x.space()
    }
}
