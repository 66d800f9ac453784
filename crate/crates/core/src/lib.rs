//! Sequential parameter optimization with Kriging surrogates.
//!
//! The entry point is [`optimize`]: it evaluates a space-filling design, then
//! alternates between fitting a surrogate and evaluating the points an
//! acquisition function proposes on it. See [`RunConfig`] for the knobs.
//!
//! ```
//! use spoke_core::{optimize, functions::sphere, RunConfig, SearchSpace, SurrogateSchedule};
//!
//! let space = SearchSpace::continuous(vec![(-5.0, 5.0); 2]).unwrap();
//! let cfg = RunConfig { max_iter: 15, n_initial: 8, ..Default::default() };
//! let result = optimize(&sphere, &space, &cfg, &mut SurrogateSchedule::default()).unwrap();
//! assert_eq!(result.nfev, 15);
//! ```

// Checks such as `!(v > 0.0)` also reject NaN, which `v <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod config;
pub mod de;
pub mod design;
pub mod functions;
pub mod mo;
pub mod noise;
pub mod objective;
pub mod optimizer;
pub mod parallel;
pub mod reporting;
pub mod space;
pub mod store;
pub mod surrogate;

pub use acquisition::{AcquisitionKind, AcquisitionOptimizer};
pub use config::{ConfigError, RunConfig};
pub use design::DesignKind;
pub use objective::{Fallible, Objective, ObjectiveError};
pub use optimizer::{optimize, OptimizationResult, OptimizeError, RestartRecord};
pub use space::{ParameterSet, SearchSpace, SpaceError, VarTrans, VarType};
pub use store::EvaluationStore;
pub use surrogate::{Kriging, KrigingConfig, KrigingMethod, Predictor, SubsetCriterion, Surrogate, SurrogateSchedule};
