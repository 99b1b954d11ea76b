//! The state encoder, bilinear scorer and their gradients.
//!
//! Everything is generic over the float type: training runs in `f32` and
//! the finite-difference checks run the same code in `f64`.

pub mod checkpoint;
pub mod gradcheck;
pub mod lstm;
pub mod optim;
pub mod scorer;

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use optim::{Adam, Optimizer, OptimizerKind, Sgd};
pub use scorer::{ContrastiveExample, Params, Scorer, ScorerConfig};

pub trait Real:
    Float
    + FromPrimitive
    + LinalgScalar
    + ScalarOperand
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    const DTYPE: u8;
}

impl Real for f32 {
    const DTYPE: u8 = 4;
}

impl Real for f64 {
    const DTYPE: u8 = 8;
}

pub(crate) fn sigmoid<T: Real>(v: T) -> T {
    T::one() / (T::one() + (-v).exp())
}

pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("representable")
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("character {byte:#04x} at byte {pos} of {state:?} is outside the vocabulary")]
    UnknownCharacter { state: String, pos: usize, byte: u8 },
    #[error("cannot encode an empty state")]
    EmptyState,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
