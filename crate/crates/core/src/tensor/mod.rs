//! Dense f32 tensors and the fixed-vocabulary CNN engine built on them.
//!
//! The engine evaluates AlexNet-style stacks (conv2d, relu, maxpool,
//! adaptive average pooling, flatten, linear, dropout) and can split a
//! forward pass at any convolutional layer. The part of the network after
//! the split point (the "tail") can be re-evaluated on modified activations
//! and differentiated, which is all the attribution methods need.

mod container;
mod engine;
mod model;
pub mod zoo;

pub use container::{read_container, read_container_file, write_container, write_container_file, TensorMap};
pub use engine::{softmax, ForwardTrace, Prediction};
pub use model::{load_model, InputSpec, LayerKind, LayerSpec, ModelDescriptor, ModelSpec, Normalization};

use crate::error::{Error, Result};

/// Row-major f32 array with an explicit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Tensor(format!("dimensions must be >= 1, got {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Tensor(format!(
                "shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![0.0; len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Mutable access to the values; the shape is fixed.
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Shape interpreted as (channels, height, width).
    pub(crate) fn chw(&self) -> Option<(usize, usize, usize)> {
        match self.shape.as_slice() {
            &[c, h, w] => Some((c, h, w)),
            _ => None,
        }
    }
}
