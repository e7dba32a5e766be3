//! Generators of the master equation `dρ/dt = −i[H/ħ, ρ] + L_d(ρ)`.
//!
//! Two right-hand sides are provided. [`RhsVariant::Derived`] composes the
//! Hamiltonian commutator with the pure-dephasing dissipator.
//! [`RhsVariant::Published`] transcribes the element-wise equations as they
//! appear in the literature, line by line, including the `ρ̇₄₄` closure; its
//! `ρ̇₃₃` line carries the opposite overall sign to the commutator, which
//! makes `ρ₃₃ − ρ₂₂` a constant of the free motion. The published system is
//! kept for auditing; [`consistency_report`] quantifies the gap.

use std::fmt;
use std::str::FromStr;

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::integrator::{integrate_with, IntegrationConfig};
use crate::matrix::{Mat4, DIM};
use crate::qcore::{DensityMatrix, SystemParams};
use crate::scalar::{re, Cx, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RhsVariant {
    #[default]
    Derived,
    Published,
}

impl RhsVariant {
    pub fn name(self) -> &'static str {
        match self {
            RhsVariant::Derived => "derived",
            RhsVariant::Published => "published",
        }
    }
}

impl fmt::Display for RhsVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RhsVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(RhsVariant::Derived),
            "published" => Ok(RhsVariant::Published),
            other => Err(Error::InvalidParams(format!("unknown rhs variant `{other}` (derived|published)"))),
        }
    }
}

/// `H/ħ` in the bare basis, rad/s.
///
/// Diagonal `(−Δ, 0, 0, +Δ)` with `Δ = Δ_l` in the rotating frame or `ω₀`
/// for free evolution; `J` exchanges `|2⟩ ↔ |3⟩`; `Ω` couples every
/// single-flip pair.
pub fn hamiltonian<T: Real>(params: &SystemParams<T>) -> Result<Mat4<T>> {
    params.validate()?;
    let d = params.splitting();
    let mut h = Mat4::diagonal([re(-d), re(T::zero()), re(T::zero()), re(d)]);
    h[(1, 2)] = re(params.j);
    h[(2, 1)] = re(params.j);
    for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        h[(i, j)] = re(params.omega);
        h[(j, i)] = re(params.omega);
    }
    Ok(h)
}

/// Number of molecules whose level differs between bare states `i` and `j`.
#[inline]
fn flips(i: usize, j: usize) -> u32 {
    ((i ^ j) as u32).count_ones()
}

/// Pure-dephasing dissipator: populations untouched, single-flip coherences
/// decay at `γ`, double-flip coherences `ρ₁₄`, `ρ₂₃` at `2γ`.
pub fn dephasing<T: Real>(rho: &Mat4<T>, gamma: T) -> Mat4<T> {
    Mat4::from_fn(|i, j| rho[(i, j)] * (-gamma * T::lit(f64::from(flips(i, j)))))
}

/// `ρ̇₄₄` either from trace closure or from the commutator line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rho44 {
    Closure,
    Commutator,
}

/// A right-hand side bound to one parameter set.
#[derive(Clone, Copy, Debug)]
pub struct Generator<T: Real> {
    variant: RhsVariant,
    params: SystemParams<T>,
    h: Mat4<T>,
    rho44: Rho44,
}

impl<T: Real> Generator<T> {
    pub fn new(variant: RhsVariant, params: &SystemParams<T>) -> Result<Self> {
        Ok(Self { variant, params: *params, h: hamiltonian(params)?, rho44: Rho44::Closure })
    }

    /// Published equations with `ρ̇₄₄` taken from the commutator instead of
    /// the trace closure. Exposes the trace drift the closure hides.
    pub fn published_without_closure(params: &SystemParams<T>) -> Result<Self> {
        Ok(Self { rho44: Rho44::Commutator, ..Self::new(RhsVariant::Published, params)? })
    }

    pub fn variant(&self) -> RhsVariant {
        self.variant
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn apply(&self, rho: &Mat4<T>) -> Mat4<T> {
        match self.variant {
            RhsVariant::Derived => self.derived(rho),
            RhsVariant::Published => self.published(rho),
        }
    }

    fn derived(&self, rho: &Mat4<T>) -> Mat4<T> {
        let minus_i = Cx::new(T::zero(), -T::one());
        let coherent = self.h.commutator(rho).scale_cx(minus_i);
        (coherent + dephasing(rho, self.params.gamma)).hermitian_from_upper()
    }

    /// Element-wise transcription. Indices below are zero-based: `r(0, 2)` is
    /// `ρ₁₃`.
    fn published(&self, rho: &Mat4<T>) -> Mat4<T> {
        let p = &self.params;
        let r = |i: usize, j: usize| rho[(i, j)];
        let i = Cx::new(T::zero(), T::one());
        let om = re(p.omega);
        let jj = re(p.j);
        let d = re(p.splitting());
        let g = re(p.gamma);
        let two = re(T::lit(2.0));

        let d11 = -i * om * (r(2, 0) - r(0, 2) + r(1, 0) - r(0, 1));
        let d22 = -i * om * (r(0, 1) - r(1, 0) + r(3, 1) - r(1, 3)) - i * jj * (r(2, 1) - r(1, 2));
        let d33 = -i * om * (r(2, 0) - r(0, 2) + r(2, 3) - r(3, 2)) - i * jj * (r(2, 1) - r(1, 2));
        let d44 = match self.rho44 {
            Rho44::Closure => -d11 - d22 - d33,
            Rho44::Commutator => -i * om * (r(1, 3) + r(2, 3) - r(3, 1) - r(3, 2)),
        };
        let d12 = i * d * r(0, 1) - i * om * (r(1, 1) - r(0, 0) + r(2, 1) - r(0, 3)) + i * jj * r(0, 2)
            - g * r(0, 1);
        let d13 = i * d * r(0, 2) - i * om * (r(2, 2) - r(0, 0) + r(1, 2) - r(0, 3)) + i * jj * r(0, 1)
            - g * r(0, 2);
        let d14 = i * two * d * r(0, 3) - i * om * (r(2, 3) + r(1, 3) - r(0, 1) - r(0, 2)) - two * g * r(0, 3);
        let d23 = -i * om * (r(0, 2) + r(3, 2) - r(1, 3) - r(1, 0)) - i * jj * (r(2, 2) - r(1, 1))
            - two * g * r(1, 2);
        let d24 = i * d * r(1, 3) + i * om * (r(1, 1) + r(1, 2) - r(3, 3) - r(0, 3)) - i * jj * r(2, 3)
            - g * r(1, 3);
        let d34 = i * d * r(2, 3) + i * om * (r(2, 2) + r(2, 1) - r(3, 3) - r(0, 3)) - i * jj * r(1, 3)
            - g * r(2, 3);

        let mut out = Mat4::zeros();
        out[(0, 0)] = d11;
        out[(1, 1)] = d22;
        out[(2, 2)] = d33;
        out[(3, 3)] = d44;
        out[(0, 1)] = d12;
        out[(0, 2)] = d13;
        out[(0, 3)] = d14;
        out[(1, 2)] = d23;
        out[(1, 3)] = d24;
        out[(2, 3)] = d34;
        out.hermitian_from_upper()
    }
}

/// `dρ/dt` for one state.
pub fn rhs<T: Real>(variant: RhsVariant, rho: &DensityMatrix<T>, params: &SystemParams<T>) -> Result<Mat4<T>> {
    Ok(Generator::new(variant, params)?.apply(rho.matrix()))
}

/// Side-by-side comparison of the two generators over one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport<T: Real> {
    pub horizon: T,
    pub samples: usize,
    /// Max over samples and the four bare populations of |derived − published|.
    pub max_population_deviation: T,
    /// Max concurrence gap; `None` once the published trajectory leaves the
    /// physical state space and concurrence is undefined.
    pub max_concurrence_deviation: Option<T>,
    /// Max drift of `ρ₃₃ − ρ₂₂` from its initial value, derived generator.
    pub derived_population_gap_drift: T,
    /// Same for the published generator with trace closure.
    pub published_population_gap_drift: T,
    /// Max `|tr ρ − 1|` of the published equations integrated without the
    /// `ρ̇₄₄` closure.
    pub published_open_trace_drift: T,
    /// Max `|tr ρ − 1|` of the derived generator.
    pub derived_trace_drift: T,
}

impl<T: Real> fmt::Display for ConsistencyReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "horizon_s={:e}", self.horizon)?;
        writeln!(f, "samples={}", self.samples)?;
        writeln!(f, "max_population_deviation={:e}", self.max_population_deviation)?;
        match self.max_concurrence_deviation {
            Some(c) => writeln!(f, "max_concurrence_deviation={c:e}")?,
            None => writeln!(f, "max_concurrence_deviation=undefined (published state unphysical)")?,
        }
        writeln!(f, "derived_population_gap_drift={:e}", self.derived_population_gap_drift)?;
        writeln!(f, "published_population_gap_drift={:e}", self.published_population_gap_drift)?;
        writeln!(f, "published_open_trace_drift={:e}", self.published_open_trace_drift)?;
        write!(f, "derived_trace_drift={:e}", self.derived_trace_drift)
    }
}

/// Integrates both generators from `rho0` and reports where they part ways.
pub fn consistency_report<T: Real>(
    params: &SystemParams<T>,
    rho0: &DensityMatrix<T>,
    horizon: T,
    samples: usize,
) -> Result<ConsistencyReport<T>> {
    let config = IntegrationConfig::uniform(horizon, samples)?;
    let derived = integrate_with(&Generator::new(RhsVariant::Derived, params)?, rho0, &config)?;
    let mut raw = config.clone();
    raw.check_invariants = false;
    let published = integrate_with(&Generator::new(RhsVariant::Published, params)?, rho0, &raw)?;
    let open = integrate_with(&Generator::published_without_closure(params)?, rho0, &raw)?;

    let gap = |rho: &DensityMatrix<T>| rho.get(2, 2).re - rho.get(1, 1).re;
    let gap0 = gap(rho0);
    let mut max_pop = T::zero();
    let mut max_c: Option<T> = Some(T::zero());
    let mut derived_gap = T::zero();
    let mut published_gap = T::zero();
    let mut derived_trace = T::zero();
    for (a, b) in derived.samples.iter().zip(published.samples.iter()) {
        for k in 0..DIM {
            max_pop = max_pop.max((a.rho.get(k, k).re - b.rho.get(k, k).re).abs());
        }
        derived_gap = derived_gap.max((gap(&a.rho) - gap0).abs());
        published_gap = published_gap.max((gap(&b.rho) - gap0).abs());
        derived_trace = derived_trace.max((a.rho.trace() - T::one()).abs());
        if let Some(current) = max_c {
            let physical = b.rho.validate(
                T::tol(crate::qcore::HERMITIAN_TOL),
                T::tol(1e-6),
                T::tol(crate::qcore::POSITIVITY_TOL),
            );
            max_c = match (physical, concurrence(&a.rho), concurrence(&b.rho)) {
                (Ok(()), Ok(ca), Ok(cb)) => Some(current.max((ca.value - cb.value).abs())),
                _ => None,
            };
        }
    }
    let open_trace = open.samples.iter().fold(T::zero(), |m, s| m.max((s.rho.trace() - T::one()).abs()));

    Ok(ConsistencyReport {
        horizon,
        samples: derived.samples.len(),
        max_population_deviation: max_pop,
        max_concurrence_deviation: max_c,
        derived_population_gap_drift: derived_gap,
        published_population_gap_drift: published_gap,
        published_open_trace_drift: open_trace,
        derived_trace_drift: derived_trace,
    })
}
