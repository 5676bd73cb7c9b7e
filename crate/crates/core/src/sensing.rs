//! Attenuated sensor field: per-node sensing value, all-sensor intensity,
//! and the exposure integral along a composite Dubins path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CompositePath, Piece};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensingError {
    #[error("quadrature step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("sensing constant `{name}` must be positive and finite, got {value}")]
    InvalidConstant { name: &'static str, value: f64 },
    #[error("sensor node {0} has non-finite coordinates")]
    NonFiniteNode(usize),
}

/// Default arc-length spacing of the exposure quadrature, in meters.
pub const DEFAULT_EXPOSURE_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNode<T> {
    pub position: [T; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorField<T> {
    pub nodes: Vec<SensorNode<T>>,
    /// Energy constant of the attenuated disk model.
    pub alpha: T,
    /// Attenuation exponent.
    pub mu: T,
    /// Saturation value; sensing values above it are clamped.
    pub cap: T,
}

impl<T: Real> SensorField<T> {
    pub fn new(nodes: Vec<[T; 2]>, alpha: T, mu: T, cap: T) -> Result<Self, SensingError> {
        let field = SensorField {
            nodes: nodes
                .into_iter()
                .map(|position| SensorNode { position })
                .collect(),
            alpha,
            mu,
            cap,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        for (name, value) in [("alpha", self.alpha), ("mu", self.mu), ("cap", self.cap)] {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(SensingError::InvalidConstant {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if let Some(i) = self
            .nodes
            .iter()
            .position(|n| !n.position[0].is_finite() || !n.position[1].is_finite())
        {
            return Err(SensingError::NonFiniteNode(i));
        }
        Ok(())
    }

    /// Same constants, no nodes.
    pub fn emptied(&self) -> Self {
        SensorField {
            nodes: Vec::new(),
            ..self.clone()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Upper bound of the field intensity anywhere in the plane.
    pub fn intensity_bound(&self) -> T {
        self.cap * T::from_usize(self.nodes.len()).unwrap_or_else(T::infinity)
    }

    /// `min(cap, α / d^μ)` for the node at `index`.
    pub fn sensing_value(&self, index: usize, x: [T; 2]) -> T {
        let n = self.nodes[index].position;
        let dx = n[0] - x[0];
        let dy = n[1] - x[1];
        self.attenuate(dx * dx + dy * dy)
    }

    #[inline]
    fn attenuate(&self, dist_sq: T) -> T {
        if dist_sq == T::zero() {
            return self.cap;
        }
        let raw = if self.mu == T::lit(2.0) {
            self.alpha / dist_sq
        } else {
            self.alpha / dist_sq.powf(self.mu / T::lit(2.0))
        };
        raw.min(self.cap)
    }

    /// All-sensor intensity: the sum of every node's sensing value at `x`.
    pub fn intensity(&self, x: [T; 2]) -> T {
        self.nodes.iter().fold(T::zero(), |acc, n| {
            let dx = n.position[0] - x[0];
            let dy = n.position[1] - x[1];
            acc + self.attenuate(dx * dx + dy * dy)
        })
    }
}

pub fn sensing_value<T: Real>(field: &SensorField<T>, node_index: usize, x: [T; 2]) -> T {
    field.sensing_value(node_index, x)
}

pub fn field_intensity<T: Real>(field: &SensorField<T>, x: [T; 2]) -> T {
    field.intensity(x)
}

/// Composite Simpson rule over one primitive, with panel width at most `step`.
fn piece_exposure<T: Real>(field: &SensorField<T>, piece: &Piece<T>, step: T) -> T {
    if piece.length <= T::zero() {
        return T::zero();
    }
    let mut panels = (piece.length / step).ceil().to_usize().unwrap_or(2).max(2);
    if panels % 2 == 1 {
        panels += 1;
    }
    let h = piece.length / T::from_usize(panels).unwrap_or_else(T::one);
    let f = |k: usize| {
        let s = h * T::from_usize(k).unwrap_or_else(T::zero);
        field.intensity(piece.pose_at(s).position())
    };
    let mut odd = T::zero();
    let mut even = T::zero();
    for k in 1..panels {
        if k % 2 == 1 {
            odd = odd + f(k);
        } else {
            even = even + f(k);
        }
    }
    let ends = field.intensity(piece.start.position()) + f(panels);
    h / T::lit(3.0) * (ends + T::lit(4.0) * odd + T::lit(2.0) * even)
}

/// Exposure of a path: the line integral of the field intensity with
/// respect to arc length, by composite Simpson quadrature on each primitive.
pub fn exposure<T: Real>(
    field: &SensorField<T>,
    path: &CompositePath<T>,
    step: T,
) -> Result<T, SensingError> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(SensingError::InvalidStep(step.to_f64().unwrap_or(f64::NAN)));
    }
    if field.is_empty() {
        return Ok(T::zero());
    }
    Ok(path
        .curves
        .iter()
        .flat_map(|c| c.pieces())
        .fold(T::zero(), |acc, piece| {
            acc + piece_exposure(field, &piece, step)
        }))
}
