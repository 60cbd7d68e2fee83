//! Open-system analysis of adiabatic quantum search.

pub mod bath;
pub mod bogoliubov;
pub mod critical;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod model;
pub mod ode;
pub mod quad;
pub mod rates;
pub mod renorm;

pub use bath::{BathSpec, CutoffForm, DiscretizedBath, DressedModeParams, Scheme, Validity};
pub use error::{Error, Result};
pub use fit::ExponentFit;
pub use model::{Axis, ProjectedPauli, SearchInstance, TwoLevelPoint};
pub use renorm::{Process, Regime, RenormInput, RenormResult, Renormalizer, Threshold};
pub use critical::{CriticalCurve, PhasePoint};
pub use rates::{RateMethod, RateRegime, RateResult};
pub use dynamics::{DephasingParams, EvolutionResult, Schedule, ScheduleKind};
pub use bogoliubov::{BogoliubovTransform, QuadraticHamiltonian};
