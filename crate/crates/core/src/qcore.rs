//! Domain types for the two-molecule system: the bare product basis
//! `|1⟩=|g₁g₂⟩, |2⟩=|g₁e₂⟩, |3⟩=|e₁g₂⟩, |4⟩=|e₁e₂⟩`, the named entangled and
//! localized states, density matrices and the rate bundle that drives them.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::{Mat4, DIM};
use crate::scalar::{Cx, Real};

/// Normalization slack for states handed in from outside.
pub const NORM_TOL: f64 = 1e-9;
/// Trace slack accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-9;
/// Hermiticity slack accepted by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as rounding noise.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Populations this close outside `[0, 1]` are clamped; further out is an error.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: [Cx<T>; DIM],
}

impl<T: Real> PureState<T> {
    /// Accepts amplitudes whose squared norm is one within [`NORM_TOL`].
    pub fn new(amplitudes: [Cx<T>; DIM]) -> Result<Self> {
        let norm_sq = norm_sq(&amplitudes);
        if (norm_sq - T::one()).abs() > T::tol(NORM_TOL) {
            return Err(Error::NotNormalized { norm_sq: norm_sq.as_f64() });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: [Cx<T>; DIM]) -> Result<Self> {
        let n = norm_sq(&amplitudes).sqrt();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::NotNormalized { norm_sq: (n * n).as_f64() });
        }
        Ok(Self { amplitudes: amplitudes.map(|a| a / n) })
    }

    pub fn named(name: NamedState) -> Self {
        name.state()
    }

    pub fn amplitudes(&self) -> &[Cx<T>; DIM] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> T {
        norm_sq(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Cx<T> {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn projector(&self) -> Mat4<T> {
        Mat4::outer(&self.amplitudes, &self.amplitudes)
    }
}

fn norm_sq<T: Real>(a: &[Cx<T>; DIM]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// States with a name in the model: bare products, the Bell-type states
/// `a, s, p, q`, the phase-shifted pair `f, k` and products of localized
/// `L`/`R` conformations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedState {
    G1G2,
    G1E2,
    E1G2,
    E1E2,
    A,
    S,
    P,
    Q,
    F,
    K,
    L1L2,
    R1R2,
    L1R2,
    R1L2,
}

impl NamedState {
    pub const ALL: [NamedState; 14] = [
        NamedState::G1G2,
        NamedState::G1E2,
        NamedState::E1G2,
        NamedState::E1E2,
        NamedState::A,
        NamedState::S,
        NamedState::P,
        NamedState::Q,
        NamedState::F,
        NamedState::K,
        NamedState::L1L2,
        NamedState::R1R2,
        NamedState::L1R2,
        NamedState::R1L2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedState::G1G2 => "g1g2",
            NamedState::G1E2 => "g1e2",
            NamedState::E1G2 => "e1g2",
            NamedState::E1E2 => "e1e2",
            NamedState::A => "a",
            NamedState::S => "s",
            NamedState::P => "p",
            NamedState::Q => "q",
            NamedState::F => "f",
            NamedState::K => "k",
            NamedState::L1L2 => "L1L2",
            NamedState::R1R2 => "R1R2",
            NamedState::L1R2 => "L1R2",
            NamedState::R1L2 => "R1L2",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|n| n.name()).collect::<Vec<_>>().join(", ")
    }

    pub fn state<T: Real>(self) -> PureState<T> {
        let h = T::lit(0.5);
        let r = T::FRAC_1_SQRT_2();
        let z = Cx::zero();
        let c = |x: T| Cx::new(x, T::zero());
        let i = |x: T| Cx::new(T::zero(), x);
        let amplitudes = match self {
            NamedState::G1G2 => [c(T::one()), z, z, z],
            NamedState::G1E2 => [z, c(T::one()), z, z],
            NamedState::E1G2 => [z, z, c(T::one()), z],
            NamedState::E1E2 => [z, z, z, c(T::one())],
            NamedState::A => [z, c(r), c(-r), z],
            NamedState::S => [z, c(r), c(r), z],
            NamedState::P => [c(r), z, z, c(r)],
            NamedState::Q => [c(r), z, z, c(-r)],
            NamedState::F => [z, c(r), i(r), z],
            NamedState::K => [z, c(r), i(-r), z],
            // Localized products as expanded in the model's literature
            // convention; the mixed pair satisfies a = (L1R2 − R1L2)/√2 and
            // q = (L1R2 + R1L2)/√2.
            NamedState::L1L2 => [c(h), c(h), c(h), c(h)],
            NamedState::R1R2 => [c(h), c(-h), c(-h), c(h)],
            NamedState::L1R2 => [c(h), c(h), c(-h), c(-h)],
            NamedState::R1L2 => [c(h), c(-h), c(h), c(-h)],
        };
        PureState { amplitudes }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let alias = match s {
            "1" => Some(NamedState::G1G2),
            "2" => Some(NamedState::G1E2),
            "3" => Some(NamedState::E1G2),
            "4" => Some(NamedState::E1E2),
            _ => None,
        };
        alias
            .or_else(|| Self::ALL.iter().copied().find(|n| n.name() == s))
            .ok_or_else(|| Error::UnknownState { name: s.to_string(), valid: Self::valid_names() })
    }
}

/// Looks a state up by name.
pub fn named_state<T: Real>(name: &str) -> Result<PureState<T>> {
    Ok(name.parse::<NamedState>()?.state())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    entries: Mat4<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: Mat4<T>) -> Result<Self> {
        let rho = Self { entries };
        rho.validate(T::tol(HERMITIAN_TOL), T::tol(TRACE_TOL), T::tol(POSITIVITY_TOL))?;
        Ok(rho)
    }

    /// Wraps a matrix without checking it. Integrator output of the published
    /// generator is deliberately allowed to be unphysical.
    pub fn from_matrix_unchecked(entries: Mat4<T>) -> Self {
        Self { entries }
    }

    pub fn maximally_mixed() -> Self {
        Self { entries: Mat4::identity().scale(T::lit(0.25)) }
    }

    pub fn validate(&self, hermitian_tol: T, trace_tol: T, positivity_tol: T) -> Result<()> {
        let defect = self.entries.hermiticity_defect();
        if !(defect <= hermitian_tol) {
            return Err(Error::NotHermitian { defect: defect.as_f64() });
        }
        let tr = self.trace();
        if !((tr - T::one()).abs() <= trace_tol) {
            return Err(Error::TraceDeviation { trace: tr.as_f64() });
        }
        let min = self.min_eigenvalue()?;
        if min < -positivity_tol {
            return Err(Error::NotPositive { min_eigenvalue: min.as_f64() });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.entries
    }

    /// Zero-based entry `ρ_{i+1, j+1}`.
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> T {
        self.entries.trace().re
    }

    pub fn purity(&self) -> T {
        (self.entries * self.entries).trace().re
    }

    pub fn populations(&self) -> [T; DIM] {
        [0, 1, 2, 3].map(|i| self.entries[(i, i)].re)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(eigen::hermitian_eigenvalues(&self.entries)?[0])
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix { entries: self.entries.cast() }
    }
}

/// `|ψ⟩⟨ψ|`, rejecting inputs that are not normalized within [`NORM_TOL`].
pub fn pure_density<T: Real>(state: &PureState<T>) -> Result<DensityMatrix<T>> {
    let norm_sq = state.norm_sq();
    if (norm_sq - T::one()).abs() > T::tol(NORM_TOL) {
        return Err(Error::NotNormalized { norm_sq: norm_sq.as_f64() });
    }
    Ok(DensityMatrix { entries: state.projector().hermitian_from_upper() })
}

/// Unitary change of basis to the entangled states, rows ordered `(p, s, a, q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntangledBasisTransform<T: Real> {
    m: Mat4<T>,
}

/// Row order of [`EntangledBasisTransform`].
pub const ENTANGLED_ORDER: [NamedState; 4] = [NamedState::P, NamedState::S, NamedState::A, NamedState::Q];

impl<T: Real> Default for EntangledBasisTransform<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> EntangledBasisTransform<T> {
    pub fn new() -> Self {
        let rows = ENTANGLED_ORDER.map(|n| n.state::<T>());
        // Row r holds ⟨e_r| in the bare basis so that v_E = M v.
        let m = Mat4::from_fn(|r, j| rows[r].amplitudes()[j].conj());
        Self { m }
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.m
    }

    /// `M ρ M†`
    pub fn forward(&self, rho: &Mat4<T>) -> Mat4<T> {
        self.m * *rho * self.m.adjoint()
    }

    /// `M† ρ_E M`
    pub fn inverse(&self, rho_e: &Mat4<T>) -> Mat4<T> {
        self.m.adjoint() * *rho_e * self.m
    }
}

/// `ρ_E = M ρ M⁻¹` with `M⁻¹ = M†`.
pub fn to_entangled_basis<T: Real>(rho: &DensityMatrix<T>) -> DensityMatrix<T> {
    let t = EntangledBasisTransform::new();
    DensityMatrix { entries: t.forward(rho.matrix()).hermitian_from_upper() }
}

pub fn from_entangled_basis<T: Real>(rho_e: &DensityMatrix<T>) -> DensityMatrix<T> {
    let t = EntangledBasisTransform::new();
    DensityMatrix { entries: t.inverse(rho_e.matrix()).hermitian_from_upper() }
}

/// Raw `⟨ψ|ρ|ψ⟩` without range checks; may be complex for non-Hermitian input.
pub fn expectation<T: Real>(rho: &Mat4<T>, state: &PureState<T>) -> Cx<T> {
    rho.expectation(state.amplitudes())
}

/// `⟨ψ|ρ|ψ⟩` as a population in `[0, 1]`.
///
/// Values within [`CLAMP_TOL`] outside the interval are clamped; anything
/// further out means the state is unphysical and is reported as an error.
pub fn population<T: Real>(rho: &DensityMatrix<T>, state: &PureState<T>) -> Result<T> {
    let v = expectation(rho.matrix(), state);
    let tol = T::tol(CLAMP_TOL);
    if v.im.abs() > tol || v.re < -tol || v.re > T::one() + tol || !v.re.is_finite() {
        return Err(Error::PopulationOutOfRange { value: v.re.as_f64() });
    }
    Ok(v.re.max(T::zero()).min(T::one()))
}

/// Rates driving the dynamics, all in s⁻¹ (angular frequencies in rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T: Real> {
    pub omega0: T,
    pub delta_l: T,
    pub j: T,
    pub omega: T,
    pub gamma: T,
    /// Rotating frame with detuning `delta_l` when set; bare splitting
    /// `omega0` otherwise.
    pub driven: bool,
}

impl<T: Real> SystemParams<T> {
    pub fn free(omega0: T, j: T, gamma: T) -> Self {
        Self { omega0, delta_l: T::zero(), j, omega: T::zero(), gamma, driven: false }
    }

    pub fn driven(omega0: T, delta_l: T, j: T, omega: T, gamma: T) -> Self {
        Self { omega0, delta_l, j, omega, gamma, driven: true }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [("omega0", self.omega0), ("J", self.j), ("Omega", self.omega), ("gamma", self.gamma)];
        for (name, v) in rates {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !self.delta_l.is_finite() {
            return Err(Error::InvalidParams("delta_l must be finite".into()));
        }
        if !self.driven && self.omega != T::zero() {
            return Err(Error::InvalidParams("Omega must be 0 for free (undriven) evolution".into()));
        }
        Ok(())
    }

    /// Diagonal splitting used by the Hamiltonian.
    pub fn splitting(&self) -> T {
        if self.driven {
            self.delta_l
        } else {
            self.omega0
        }
    }

    /// Upper bound on the magnitude of the generator's eigenvalues.
    pub fn fastest_rate(&self) -> T {
        let two = T::lit(2.0);
        two * self.splitting().abs() + two * self.j + two * self.omega + two * self.gamma
    }

    pub fn with_field_off(&self) -> Self {
        Self { omega: T::zero(), ..*self }
    }

    pub fn cast<U: Real>(&self) -> SystemParams<U> {
        SystemParams {
            omega0: U::lit(self.omega0.as_f64()),
            delta_l: U::lit(self.delta_l.as_f64()),
            j: U::lit(self.j.as_f64()),
            omega: U::lit(self.omega.as_f64()),
            gamma: U::lit(self.gamma.as_f64()),
            driven: self.driven,
        }
    }
}
