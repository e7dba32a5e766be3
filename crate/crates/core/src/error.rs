use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is not normalized: norm² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian: max |ρ_ij − ρ_ji*| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("trace deviates from one: tr ρ = {trace}")]
    TraceDeviation { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("population {value} lies outside [0, 1] beyond rounding tolerance")]
    PopulationOutOfRange { value: f64 },

    #[error("unknown state `{name}`; valid names: {valid}")]
    UnknownState { name: String, valid: String },

    #[error("unknown observable `{name}`; valid names: {valid}")]
    UnknownObservable { name: String, valid: String },

    #[error("unknown scenario `{name}`; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    #[error("r = 0 is a singularity of the dipole-dipole coupling")]
    ZeroSeparation,

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    EigenNoConvergence { iterations: usize },

    #[error("unphysical spectrum of ρρ̃: eigenvalue {re:e}{im:+e}i")]
    UnphysicalSpectrum { re: f64, im: f64 },

    #[error("step size underflow at t = {t_reached:e} s (h = {step:e} s)")]
    StepSizeUnderflow { t_reached: f64, step: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t_reached:e} s")]
    MaxStepsExceeded { t_reached: f64, max_steps: usize },

    #[error("invariant violated at t = {t:e} s: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("measurement chain extinguished at measurement {k}: p = {probability:e}")]
    ZenoExtinguished { k: usize, probability: f64 },

    #[error("series has no interior or boundary maximum (monotone or constant)")]
    MonotoneSeries,

    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Time reached for integrator failures, looking through scenario context.
    pub fn time_reached(&self) -> Option<f64> {
        match self {
            Error::StepSizeUnderflow { t_reached, .. } | Error::MaxStepsExceeded { t_reached, .. } => {
                Some(*t_reached)
            }
            Error::InvariantViolation { t, .. } => Some(*t),
            Error::Scenario { source, .. } => source.time_reached(),
            _ => None,
        }
    }

    pub fn is_integrator_failure(&self) -> bool {
        self.time_reached().is_some()
    }

    pub(crate) fn in_scenario(self, name: &str) -> Self {
        Error::Scenario { name: name.to_string(), source: Box::new(self) }
    }
}
