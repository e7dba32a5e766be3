//! Entanglement dynamics of two dipole-coupled inversion-doublet molecules.
//!
//! Each molecule is a two-level system `{|g⟩, |e⟩}`; the pair lives in the
//! bare product basis `|1⟩ = g₁g₂, |2⟩ = g₁e₂, |3⟩ = e₁g₂, |4⟩ = e₁e₂`.
//! The state is propagated by a Lindblad equation with coherent exchange
//! `J`, optional driving `Ω` in the rotating frame and pure dephasing `γ`;
//! entanglement is measured by the Wootters concurrence.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32`, `f64`); the
//! aliases at the crate root fix it to `f64`.

pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod integrator;
pub mod liouvillian;
pub mod matrix;
pub mod physics;
pub mod qcore;
pub mod scalar;
pub mod scenarios;
pub mod zeno;

pub use error::{Error, Result};
pub use liouvillian::RhsVariant;
pub use qcore::NamedState;
pub use scalar::{Cx, Real};
pub use scenarios::{FieldOff, Observable, SweepParam};

pub type Mat4 = matrix::Mat4<f64>;
pub type PureState = qcore::PureState<f64>;
pub type DensityMatrix = qcore::DensityMatrix<f64>;
pub type SystemParams = qcore::SystemParams<f64>;
pub type IntegrationConfig = integrator::IntegrationConfig<f64>;
pub type Trajectory = integrator::Trajectory<f64>;
pub type Sample = integrator::Sample<f64>;
pub type Generator = liouvillian::Generator<f64>;
pub type ConsistencyReport = liouvillian::ConsistencyReport<f64>;
pub type ConcurrenceResult = entanglement::ConcurrenceResult<f64>;
pub type ZenoProtocol = zeno::ZenoProtocol<f64>;
pub type Scenario = scenarios::Scenario<f64>;
pub type ObservableTable = scenarios::ObservableTable<f64>;
pub type Preset = scenarios::Preset<f64>;
pub type RunOptions = scenarios::RunOptions<f64>;

pub type Mat4F32 = matrix::Mat4<f32>;
pub type PureStateF32 = qcore::PureState<f32>;
pub type DensityMatrixF32 = qcore::DensityMatrix<f32>;
pub type SystemParamsF32 = qcore::SystemParams<f32>;
pub type TrajectoryF32 = integrator::Trajectory<f32>;
