//! Repeated projective measurement onto an entangled target.
//!
//! Between measurements the pair evolves freely for `τ`; each measurement
//! projects onto the target, and the reported survival is the probability
//! that all measurements so far found it.

use crate::error::{Error, Result};
use crate::integrator::closed_form_free;
use crate::qcore::{expectation, pure_density, DensityMatrix, NamedState, PureState, SystemParams};
use crate::scalar::Real;

/// Below this success probability the conditional state is undefined.
pub const EXTINCTION_TOL: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoProtocol<T: Real> {
    pub tau: T,
    pub n: usize,
    pub target: PureState<T>,
    pub params: SystemParams<T>,
}

impl<T: Real> ZenoProtocol<T> {
    /// Protocol with target `|f⟩`.
    pub fn new(tau: T, n: usize, params: SystemParams<T>) -> Result<Self> {
        Self::with_target(tau, n, NamedState::F.state(), params)
    }

    pub fn with_target(tau: T, n: usize, target: PureState<T>, params: SystemParams<T>) -> Result<Self> {
        let p = Self { tau, n, target, params };
        p.validate()?;
        Ok(p)
    }

    /// Protocol covering total time `total` with interval `tau`.
    pub fn over(tau: T, total: T, params: SystemParams<T>) -> Result<Self> {
        if !(tau > T::zero()) {
            return Err(Error::InvalidParams(format!("tau must be > 0, got {tau:e}")));
        }
        let n = (total / tau).round().to_usize().unwrap_or(0);
        Self::new(tau, n, params)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.omega != T::zero() {
            return Err(Error::InvalidParams("the Zeno protocol needs Omega = 0".into()));
        }
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidParams(format!("tau must be > 0, got {:e}", self.tau)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be >= 1".into()));
        }
        if !(self.params.j * self.tau < T::one()) {
            return Err(Error::InvalidParams(format!(
                "Zeno regime requires J·tau < 1, got {:e}",
                self.params.j * self.tau
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> T {
        self.tau * T::lit(self.n as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoPoint<T: Real> {
    pub k: usize,
    pub t: T,
    pub survival: T,
}

pub fn run_zeno<T: Real>(protocol: &ZenoProtocol<T>) -> Result<Vec<ZenoPoint<T>>> {
    protocol.validate()?;
    let projector = protocol.target.projector();
    let mut rho = pure_density(&protocol.target)?;
    let mut survival = T::one();
    let mut out = Vec::with_capacity(protocol.n);
    for k in 1..=protocol.n {
        let evolved = closed_form_free(&rho, &protocol.params, protocol.tau)?;
        let p = expectation(evolved.matrix(), &protocol.target).re;
        if !(p > T::lit(EXTINCTION_TOL)) {
            return Err(Error::ZenoExtinguished { k, probability: p.as_f64() });
        }
        survival = survival * p.min(T::one());
        rho = DensityMatrix::from_matrix_unchecked((projector * *evolved.matrix() * projector).scale(T::one() / p));
        out.push(ZenoPoint { k, t: protocol.tau * T::lit(k as f64), survival });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticSurvival<T: Real> {
    /// `[cos²(Jτ)]^N`
    pub exact: T,
    /// `exp(−J²T²/N)` with `T = Nτ`
    pub gaussian: T,
}

pub fn analytic_survival<T: Real>(j: T, tau: T, n: usize) -> AnalyticSurvival<T> {
    let nf = T::lit(n as f64);
    let jt = j * tau;
    AnalyticSurvival { exact: jt.cos().powi(2).powf(nf), gaussian: (-jt * jt * nf).exp() }
}
