//! Built-in benchmark objectives and a name registry.
//!
//! Every function takes an `(n, d)` matrix of natural-scale points. Single
//! objective functions return `n` values, multi-objective ones an `(n, 2)`
//! matrix. `robot_arm_hard` has no canonical literature form; the version here
//! is defined by this crate (see [`engineering::robot_arm_hard`]).

pub mod engineering;
pub mod multi;
pub mod single;

use std::f64::consts::PI;
use std::sync::Mutex;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

pub use engineering::{lennard_jones, lj_energy, robot_arm_hard, wingwt};
pub use multi::{dtlz1, dtlz2, fonseca_fleming, kursawe, schaffer_n1, zdt1, zdt2, zdt3, zdt4, zdt5, zdt6};
pub use single::{ackley, michalewicz, rosenbrock, sphere};

use crate::mo::scalarize_weighted_sum;
use crate::objective::{Objective, ObjectiveError};

#[derive(Debug, Error, PartialEq)]
pub enum FunctionError {
    #[error("unknown function `{name}`; registered: {}", known.join(", "))]
    Unknown { name: String, known: Vec<String> },
    #[error("{name}: dimension {dims} not supported ({expected})")]
    Dimension {
        name: String,
        dims: usize,
        expected: String,
    },
    #[error("{name}: row {row}, x{dim} = {value} outside ({lower}, {upper})")]
    DomainViolation {
        name: String,
        row: usize,
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("{name}: {got} weights for {expected} objectives")]
    Weights { name: String, got: usize, expected: usize },
}

/// Admissible dimensions of a registered function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dims {
    Fixed { d: usize },
    Variable { min: usize, default: usize },
}

impl Dims {
    pub fn default_dims(self) -> usize {
        match self {
            Dims::Fixed { d } => d,
            Dims::Variable { default, .. } => default,
        }
    }

    pub fn accepts(self, d: usize) -> bool {
        match self {
            Dims::Fixed { d: f } => d == f,
            Dims::Variable { min, .. } => d >= min,
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Single(fn(&Array2<f64>) -> Vec<f64>),
    Multi(fn(&Array2<f64>) -> Array2<f64>),
    NoisySphere,
    Michalewicz,
    Wingwt,
}

#[derive(Clone, Copy)]
pub struct FunctionInfo {
    pub name: &'static str,
    pub dims: Dims,
    /// Objectives returned per point.
    pub arity: usize,
    /// Known global minimum of the (first) objective, when one exists.
    pub optimum: Option<f64>,
    pub description: &'static str,
    bounds: BoundsRule,
    kind: Kind,
}

impl std::fmt::Debug for FunctionInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionInfo")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .field("arity", &self.arity)
            .finish()
    }
}

impl FunctionInfo {
    pub fn bounds(&self, d: usize) -> Vec<(f64, f64)> {
        match self.bounds {
            BoundsRule::Uniform(lo, hi) => vec![(lo, hi); d],
            BoundsRule::Custom(f) => f(d),
        }
    }

    pub fn default_bounds(&self) -> Vec<(f64, f64)> {
        self.bounds(self.dims.default_dims())
    }
}

/// Serializable registry listing entry.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionListing {
    pub name: String,
    pub dims: Dims,
    pub bounds: Vec<(f64, f64)>,
    pub arity: usize,
    pub optimum: Option<f64>,
    pub description: String,
}

impl From<&FunctionInfo> for FunctionListing {
    fn from(f: &FunctionInfo) -> Self {
        Self {
            name: f.name.to_owned(),
            dims: f.dims,
            bounds: f.default_bounds(),
            arity: f.arity,
            optimum: f.optimum,
            description: f.description.to_owned(),
        }
    }
}

#[derive(Clone, Copy)]
enum BoundsRule {
    Uniform(f64, f64),
    Custom(fn(usize) -> Vec<(f64, f64)>),
}

fn boxed(lo: f64, hi: f64) -> BoundsRule {
    BoundsRule::Uniform(lo, hi)
}

fn michalewicz_bounds(d: usize) -> Vec<(f64, f64)> {
    vec![(0.0, PI); d]
}

fn zdt4_bounds(d: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(-5.0, 5.0); d];
    if d > 0 {
        b[0] = (0.0, 1.0);
    }
    b
}

fn wingwt_bounds(d: usize) -> Vec<(f64, f64)> {
    engineering::WINGWT_BOUNDS[..d.min(10)].to_vec()
}

fn robot_bounds(_: usize) -> Vec<(f64, f64)> {
    engineering::robot_arm_bounds()
}

/// Every registered function, in listing order.
pub fn registry() -> Vec<FunctionInfo> {
    use Dims::{Fixed, Variable};
    let var = |min, default| Variable { min, default };
    vec![
        FunctionInfo {
            name: "sphere",
            dims: var(1, 2),
            arity: 1,
            optimum: Some(0.0),
            description: "sum of squares",
            bounds: boxed(-5.0, 5.0),
            kind: Kind::Single(sphere),
        },
        FunctionInfo {
            name: "noisy_sphere",
            dims: var(1, 2),
            arity: 1,
            optimum: Some(0.0),
            description: "sphere plus Gaussian noise (sd 0.1 unless overridden)",
            bounds: boxed(-5.0, 5.0),
            kind: Kind::NoisySphere,
        },
        FunctionInfo {
            name: "rosenbrock",
            dims: var(2, 2),
            arity: 1,
            optimum: Some(0.0),
            description: "curved valley, minimum at (1, ..., 1)",
            bounds: boxed(-2.0, 2.0),
            kind: Kind::Single(rosenbrock),
        },
        FunctionInfo {
            name: "ackley",
            dims: var(1, 2),
            arity: 1,
            optimum: Some(0.0),
            description: "multimodal, a=20, b=0.2, c=2pi",
            bounds: boxed(-32.768, 32.768),
            kind: Kind::Single(ackley),
        },
        FunctionInfo {
            name: "michalewicz",
            dims: var(1, 2),
            arity: 1,
            optimum: None,
            description: "steep valleys, m=10",
            bounds: BoundsRule::Custom(michalewicz_bounds),
            kind: Kind::Michalewicz,
        },
        FunctionInfo {
            name: "zdt1",
            dims: var(2, 30),
            arity: 2,
            optimum: None,
            description: "convex front",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(zdt1),
        },
        FunctionInfo {
            name: "zdt2",
            dims: var(2, 30),
            arity: 2,
            optimum: None,
            description: "non-convex front",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(zdt2),
        },
        FunctionInfo {
            name: "zdt3",
            dims: var(2, 30),
            arity: 2,
            optimum: None,
            description: "disconnected front",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(zdt3),
        },
        FunctionInfo {
            name: "zdt4",
            dims: var(2, 10),
            arity: 2,
            optimum: None,
            description: "multimodal, x0 in [0,1], others in [-5,5]",
            bounds: BoundsRule::Custom(zdt4_bounds),
            kind: Kind::Multi(zdt4),
        },
        FunctionInfo {
            name: "zdt5",
            dims: Fixed { d: multi::ZDT5_DIMS },
            arity: 2,
            optimum: None,
            description: "deceptive, 80 bits read from [0,1] reals",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(zdt5),
        },
        FunctionInfo {
            name: "zdt6",
            dims: var(2, 10),
            arity: 2,
            optimum: None,
            description: "non-uniform front density",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(zdt6),
        },
        FunctionInfo {
            name: "dtlz1",
            dims: Fixed { d: 1 + multi::DTLZ1_K },
            arity: 2,
            optimum: None,
            description: "linear front, two objectives, k=5",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(dtlz1),
        },
        FunctionInfo {
            name: "dtlz2",
            dims: Fixed { d: 1 + multi::DTLZ2_K },
            arity: 2,
            optimum: None,
            description: "spherical front, two objectives, k=10",
            bounds: boxed(0.0, 1.0),
            kind: Kind::Multi(dtlz2),
        },
        FunctionInfo {
            name: "fonseca_fleming",
            dims: var(1, 2),
            arity: 2,
            optimum: None,
            description: "concave front",
            bounds: boxed(-4.0, 4.0),
            kind: Kind::Multi(fonseca_fleming),
        },
        FunctionInfo {
            name: "schaffer_n1",
            dims: Fixed { d: 1 },
            arity: 2,
            optimum: None,
            description: "x^2 and (x-2)^2",
            bounds: boxed(-10.0, 10.0),
            kind: Kind::Multi(schaffer_n1),
        },
        FunctionInfo {
            name: "kursawe",
            dims: var(2, 3),
            arity: 2,
            optimum: None,
            description: "disconnected non-convex front",
            bounds: boxed(-5.0, 5.0),
            kind: Kind::Multi(kursawe),
        },
        FunctionInfo {
            name: "wingwt",
            dims: var(9, 10),
            arity: 1,
            optimum: None,
            description: "light aircraft wing weight; 9 dims fixes paint weight at baseline",
            bounds: BoundsRule::Custom(wingwt_bounds),
            kind: Kind::Wingwt,
        },
        FunctionInfo {
            name: "robot_arm_hard",
            dims: Fixed { d: 10 },
            arity: 1,
            optimum: None,
            description: "10-link planar arm reaching (5,5) around circular obstacles",
            bounds: BoundsRule::Custom(robot_bounds),
            kind: Kind::Single(robot_arm_hard),
        },
        FunctionInfo {
            name: "lennard_jones",
            dims: Fixed { d: 3 * engineering::LJ_ATOMS },
            arity: 1,
            optimum: Some(engineering::LJ13_MINIMUM),
            description: "13-atom cluster energy",
            bounds: boxed(-2.0, 2.0),
            kind: Kind::Single(lennard_jones),
        },
    ]
}

pub fn names() -> Vec<String> {
    registry().iter().map(|f| f.name.to_owned()).collect()
}

pub fn lookup(name: &str) -> Result<FunctionInfo, FunctionError> {
    registry().into_iter().find(|f| f.name == name).ok_or_else(|| FunctionError::Unknown {
        name: name.to_owned(),
        known: names(),
    })
}

/// Options for turning a registry entry into an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub dims: Option<usize>,
    /// Scalarization weights for multi-objective functions; uniform if absent.
    pub weights: Option<Vec<f64>>,
    /// Noise standard deviation of `noisy_sphere`.
    pub noise_sd: f64,
    /// Seed of the noise stream.
    pub seed: u64,
    /// Steepness of `michalewicz`.
    pub michalewicz_m: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            dims: None,
            weights: None,
            noise_sd: 0.1,
            seed: 0,
            michalewicz_m: 10.0,
        }
    }
}

/// A registry function ready to be optimized. Points outside the function's
/// domain (beyond 1e-9) are rejected.
pub struct BuiltinObjective {
    info: FunctionInfo,
    bounds: Vec<(f64, f64)>,
    weights: Vec<f64>,
    noise: Option<(Normal<f64>, Mutex<ChaCha8Rng>)>,
    michalewicz_m: f64,
}

impl BuiltinObjective {
    pub fn new(name: &str, opts: &BuildOptions) -> Result<Self, FunctionError> {
        let info = lookup(name)?;
        let d = opts.dims.unwrap_or(info.dims.default_dims());
        if !info.dims.accepts(d) {
            return Err(FunctionError::Dimension {
                name: name.to_owned(),
                dims: d,
                expected: match info.dims {
                    Dims::Fixed { d } => format!("exactly {d}"),
                    Dims::Variable { min, .. } => format!("at least {min}"),
                },
            });
        }
        let weights = match &opts.weights {
            Some(w) if w.len() != info.arity => {
                return Err(FunctionError::Weights {
                    name: name.to_owned(),
                    got: w.len(),
                    expected: info.arity,
                })
            }
            Some(w) => w.clone(),
            None => vec![1.0 / info.arity as f64; info.arity],
        };
        let noise = matches!(info.kind, Kind::NoisySphere).then(|| {
            (
                Normal::new(0.0, opts.noise_sd.max(0.0)).expect("finite sd"),
                Mutex::new(ChaCha8Rng::seed_from_u64(opts.seed)),
            )
        });
        Ok(Self {
            info,
            bounds: info.bounds(d),
            weights,
            noise,
            michalewicz_m: opts.michalewicz_m,
        })
    }

    pub fn info(&self) -> &FunctionInfo {
        &self.info
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    fn check_domain(&self, x: &Array2<f64>) -> Result<(), FunctionError> {
        if x.ncols() != self.dims() {
            return Err(FunctionError::Dimension {
                name: self.info.name.to_owned(),
                dims: x.ncols(),
                expected: format!("exactly {}", self.dims()),
            });
        }
        for (row, r) in x.rows().into_iter().enumerate() {
            for (dim, (&value, &(lower, upper))) in r.iter().zip(&self.bounds).enumerate() {
                if !(value >= lower - 1e-9 && value <= upper + 1e-9) {
                    return Err(FunctionError::DomainViolation {
                        name: self.info.name.to_owned(),
                        row,
                        dim,
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Raw outputs: `(n, arity)`.
    pub fn evaluate_raw(&self, x: &Array2<f64>) -> Result<Array2<f64>, FunctionError> {
        self.check_domain(x)?;
        let column = |v: Vec<f64>| Array2::from_shape_vec((v.len(), 1), v).expect("column");
        Ok(match self.info.kind {
            Kind::Single(f) => column(f(x)),
            Kind::Multi(f) => f(x),
            Kind::Michalewicz => column(michalewicz(x, self.michalewicz_m)),
            Kind::Wingwt => column(wingwt(x)),
            Kind::NoisySphere => {
                let (dist, rng) = self.noise.as_ref().expect("noise state");
                let mut rng = rng.lock().expect("noise rng poisoned");
                column(sphere(x).into_iter().map(|v| v + dist.sample(&mut *rng)).collect())
            }
        })
    }
}

impl Objective for BuiltinObjective {
    fn evaluate(&self, x: &Array2<f64>) -> Result<Vec<f64>, ObjectiveError> {
        self.evaluate_with_raw(x).map(|(y, _)| y)
    }

    fn evaluate_with_raw(&self, x: &Array2<f64>) -> Result<(Vec<f64>, Option<Array2<f64>>), ObjectiveError> {
        let raw = self.evaluate_raw(x).map_err(|e| ObjectiveError(e.to_string()))?;
        if self.info.arity == 1 {
            return Ok((raw.column(0).to_vec(), None));
        }
        let y = scalarize_weighted_sum(&raw, &self.weights).map_err(|e| ObjectiveError(e.to_string()))?;
        Ok((y, Some(raw)))
    }
}

/// Sphere plus `Normal(0, sigma^2)` noise drawn from `rng`.
pub fn noisy_sphere<R: rand::Rng>(x: &Array2<f64>, sigma: f64, rng: &mut R) -> Vec<f64> {
    let base = sphere(x);
    if sigma == 0.0 {
        return base;
    }
    let dist = Normal::new(0.0, sigma).expect("finite sigma");
    base.into_iter().map(|v| v + dist.sample(rng)).collect()
}
