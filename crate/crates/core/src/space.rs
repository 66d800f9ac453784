//! Search-space definition and the mapping between natural and internal scale.
//!
//! Users state bounds in natural scale. The optimizer works in internal scale,
//! where `Log10` dimensions are replaced by their base-10 logarithm. Integer and
//! factor dimensions are always `Identity` and get rounded on the way back out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("search space must have at least one dimension")]
    Empty,
    #[error("parameter set is empty")]
    EmptyParameterSet,
    #[error("dimension {dim}: {field} has length {got}, expected {expected}")]
    LengthMismatch {
        dim: usize,
        field: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("dimension {dim}: lower bound {lower} must be below upper bound {upper}")]
    InvalidBounds { dim: usize, lower: f64, upper: f64 },
    #[error("dimension {dim}: log10 transform needs strictly positive bounds, got ({lower}, {upper})")]
    NonPositiveLogBounds { dim: usize, lower: f64, upper: f64 },
    #[error("dimension {dim}: {kind} variables cannot be transformed")]
    TransformOnDiscrete { dim: usize, kind: &'static str },
    #[error("dimension {dim}: factor needs at least 2 levels, got {levels}")]
    TooFewLevels { dim: usize, levels: usize },
    #[error("dimension {dim}: factor bounds must be (0, {expected_upper}), got ({lower}, {upper})")]
    FactorBounds {
        dim: usize,
        lower: f64,
        upper: f64,
        expected_upper: f64,
    },
    #[error("dimension {dim}: value {value} outside bounds ({lower}, {upper})")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("dimension {dim}: log10 transform of non-positive value {value}")]
    NonPositiveLogInput { dim: usize, value: f64 },
    #[error("point has {got} coordinates, space has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
    #[error("parameter `{name}`: default {default} outside bounds ({lower}, {upper})")]
    DefaultOutOfBounds {
        name: String,
        default: f64,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum VarType {
    Float,
    Int,
    Factor { levels: usize },
}

impl VarType {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, VarType::Float)
    }

    pub fn label(&self) -> &'static str {
        match self {
            VarType::Float => "float",
            VarType::Int => "int",
            VarType::Factor { .. } => "factor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarTrans {
    #[default]
    Identity,
    Log10,
}

impl VarTrans {
    fn forward(self, v: f64) -> f64 {
        match self {
            VarTrans::Identity => v,
            VarTrans::Log10 => v.log10(),
        }
    }

    fn inverse(self, v: f64) -> f64 {
        match self {
            VarTrans::Identity => v,
            VarTrans::Log10 => 10f64.powf(v),
        }
    }
}

/// Rounds half away from zero, then clamps into `[lower, upper]`.
pub fn round_clamp(v: f64, lower: f64, upper: f64) -> f64 {
    v.round().clamp(lower, upper)
}

/// A validated box-bounded search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    bounds: Vec<(f64, f64)>,
    var_type: Vec<VarType>,
    var_trans: Vec<VarTrans>,
    var_name: Vec<String>,
}

impl SearchSpace {
    /// All-float space with identity transforms and names `x0, x1, ...`.
    pub fn continuous(bounds: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        let d = bounds.len();
        Self::new(
            bounds,
            vec![VarType::Float; d],
            vec![VarTrans::Identity; d],
            default_names(d),
        )
    }

    pub fn new(
        bounds: Vec<(f64, f64)>,
        var_type: Vec<VarType>,
        var_trans: Vec<VarTrans>,
        var_name: Vec<String>,
    ) -> Result<Self, SpaceError> {
        let d = bounds.len();
        if d == 0 {
            return Err(SpaceError::Empty);
        }
        for (field, got) in [
            ("var_type", var_type.len()),
            ("var_trans", var_trans.len()),
            ("var_name", var_name.len()),
        ] {
            if got != d {
                return Err(SpaceError::LengthMismatch {
                    dim: got.min(d),
                    field,
                    got,
                    expected: d,
                });
            }
        }
        for (dim, &(lower, upper)) in bounds.iter().enumerate() {
            if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
                return Err(SpaceError::InvalidBounds { dim, lower, upper });
            }
            match (var_type[dim], var_trans[dim]) {
                (VarType::Float, VarTrans::Log10) if lower <= 0.0 => {
                    return Err(SpaceError::NonPositiveLogBounds { dim, lower, upper });
                }
                (t, VarTrans::Log10) if t.is_discrete() => {
                    return Err(SpaceError::TransformOnDiscrete {
                        dim,
                        kind: t.label(),
                    });
                }
                (VarType::Factor { levels }, _) => {
                    if levels < 2 {
                        return Err(SpaceError::TooFewLevels { dim, levels });
                    }
                    let expected_upper = (levels - 1) as f64;
                    if lower != 0.0 || upper != expected_upper {
                        return Err(SpaceError::FactorBounds {
                            dim,
                            lower,
                            upper,
                            expected_upper,
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(Self {
            bounds,
            var_type,
            var_trans,
            var_name,
        })
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn var_type(&self) -> &[VarType] {
        &self.var_type
    }

    pub fn var_trans(&self) -> &[VarTrans] {
        &self.var_trans
    }

    pub fn var_name(&self) -> &[String] {
        &self.var_name
    }

    /// Bounds after applying each dimension's transform.
    pub fn internal_bounds(&self) -> Vec<(f64, f64)> {
        self.bounds
            .iter()
            .zip(&self.var_trans)
            .map(|(&(lo, hi), t)| (t.forward(lo), t.forward(hi)))
            .collect()
    }

    pub fn to_internal(&self, x: &[f64]) -> Result<Vec<f64>, SpaceError> {
        self.check_len(x)?;
        x.iter()
            .enumerate()
            .map(|(dim, &value)| {
                let (lower, upper) = self.bounds[dim];
                if self.var_trans[dim] == VarTrans::Log10 && value <= 0.0 {
                    return Err(SpaceError::NonPositiveLogInput { dim, value });
                }
                if !(value >= lower && value <= upper) {
                    return Err(SpaceError::OutOfBounds {
                        dim,
                        value,
                        lower,
                        upper,
                    });
                }
                Ok(self.var_trans[dim].forward(value))
            })
            .collect()
    }

    /// Inverse of [`to_internal`](Self::to_internal); discrete dimensions are
    /// rounded and clamped.
    pub fn to_natural(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(dim, &v)| {
                let natural = self.var_trans[dim].inverse(v);
                let (lo, hi) = self.bounds[dim];
                match self.var_type[dim] {
                    VarType::Float => natural.clamp(lo, hi),
                    VarType::Int | VarType::Factor { .. } => round_clamp(natural, lo, hi),
                }
            })
            .collect()
    }

    /// Rounds discrete dimensions of an internal-scale point in place.
    ///
    /// Internal and natural scale coincide on discrete dimensions, so this is
    /// the same rounding `to_natural` applies.
    pub fn repair_internal(&self, x: &mut [f64]) {
        let ib = self.internal_bounds();
        for (dim, v) in x.iter_mut().enumerate() {
            let (lo, hi) = ib[dim];
            *v = match self.var_type[dim] {
                VarType::Float => v.clamp(lo, hi),
                _ => round_clamp(*v, lo, hi),
            };
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<(), SpaceError> {
        if x.len() != self.dims() {
            return Err(SpaceError::DimensionMismatch {
                got: x.len(),
                expected: self.dims(),
            });
        }
        Ok(())
    }
}

pub(crate) fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub var_type: VarType,
    pub bounds: (f64, f64),
    pub default: f64,
    pub transform: VarTrans,
    /// Labels for factor levels, indexed by level code.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

/// Fluent builder for typed search spaces.
///
/// ```
/// use spoke_core::space::{ParameterSet, VarTrans};
///
/// let ps = ParameterSet::new()
///     .add_float("lr", 1e-5, 0.1, 1e-3, VarTrans::Log10)
///     .add_int("l1", 8, 128, 32)
///     .add_factor("act", &["relu", "tanh"], "relu");
/// let space = ps.to_space().unwrap();
/// assert_eq!(space.dims(), 3);
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    params: Vec<Parameter>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_float(mut self, name: &str, low: f64, high: f64, default: f64, transform: VarTrans) -> Self {
        self.params.push(Parameter {
            name: name.to_string(),
            var_type: VarType::Float,
            bounds: (low, high),
            default,
            transform,
            levels: Vec::new(),
        });
        self
    }

    pub fn add_int(mut self, name: &str, low: i64, high: i64, default: i64) -> Self {
        self.params.push(Parameter {
            name: name.to_string(),
            var_type: VarType::Int,
            bounds: (low as f64, high as f64),
            default: default as f64,
            transform: VarTrans::Identity,
            levels: Vec::new(),
        });
        self
    }

    /// Adds a categorical variable; the default is given by label and stored
    /// as its level code. An unknown default label maps to level 0.
    pub fn add_factor(mut self, name: &str, levels: &[&str], default: &str) -> Self {
        let code = levels.iter().position(|l| *l == default).unwrap_or(0);
        self.params.push(Parameter {
            name: name.to_string(),
            var_type: VarType::Factor {
                levels: levels.len(),
            },
            bounds: (0.0, levels.len().saturating_sub(1) as f64),
            default: code as f64,
            transform: VarTrans::Identity,
            levels: levels.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.params.iter().map(|p| p.bounds).collect()
    }

    pub fn var_type(&self) -> Vec<VarType> {
        self.params.iter().map(|p| p.var_type).collect()
    }

    pub fn var_trans(&self) -> Vec<VarTrans> {
        self.params.iter().map(|p| p.transform).collect()
    }

    pub fn defaults(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.default).collect()
    }

    pub fn to_space(&self) -> Result<SearchSpace, SpaceError> {
        if self.params.is_empty() {
            return Err(SpaceError::EmptyParameterSet);
        }
        for (i, p) in self.params.iter().enumerate() {
            if self.params[..i].iter().any(|q| q.name == p.name) {
                return Err(SpaceError::DuplicateName(p.name.clone()));
            }
        }
        let space = SearchSpace::new(self.bounds(), self.var_type(), self.var_trans(), self.names())?;
        for p in &self.params {
            let (lower, upper) = p.bounds;
            if !(p.default >= lower && p.default <= upper) {
                return Err(SpaceError::DefaultOutOfBounds {
                    name: p.name.clone(),
                    default: p.default,
                    lower,
                    upper,
                });
            }
        }
        Ok(space)
    }
}
