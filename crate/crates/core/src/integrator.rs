//! Time propagation of the density matrix.
//!
//! [`integrate`] runs an adaptive Dormand–Prince 5(4) pair with its
//! fourth-order continuous extension for output at arbitrary sample times.
//! Internally time is measured in units of the inverse fastest rate of the
//! generator so that step sizes stay near unity even when `ω₀ ~ 1e11 rad/s`.
//!
//! [`closed_form_free`] is the exact solution of the undriven problem and is
//! the reference the adaptive path is checked against.

use crate::error::{Error, Result};
use crate::liouvillian::{Generator, RhsVariant};
use crate::matrix::{Mat4, DIM};
use crate::qcore::{DensityMatrix, SystemParams};
use crate::scalar::{Cx, Real};

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes
// c_i never appear.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
/// Automatic step cap, in units of the inverse fastest rate.
const AUTO_MAX_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationConfig<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Largest step in seconds; `None` picks `0.05 / fastest rate`.
    pub max_step: Option<T>,
    /// Output times in seconds, strictly increasing, starting at `>= 0`.
    pub sample_times: Vec<T>,
    pub max_steps: usize,
    /// Fail when trace, Hermiticity or positivity drift past `invariant_tol`.
    pub check_invariants: bool,
    pub invariant_tol: T,
}

impl<T: Real> IntegrationConfig<T> {
    pub fn new(sample_times: Vec<T>) -> Result<Self> {
        let config = Self {
            rel_tol: T::tol(1e-10),
            abs_tol: T::tol(1e-12),
            max_step: None,
            sample_times,
            max_steps: 50_000_000,
            check_invariants: true,
            invariant_tol: T::tol(1e-6),
        };
        config.validate()?;
        Ok(config)
    }

    /// `samples` equally spaced points on `[0, horizon]`, both ends included.
    pub fn uniform(horizon: T, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidConfig("need at least two samples".into()));
        }
        Self::new(uniform_times(horizon, samples))
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let upper = T::lit(1e-2);
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > T::zero() && v <= upper) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1e-2], got {v:e}")));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > T::zero()) {
                return Err(Error::InvalidConfig(format!("max_step must be > 0, got {h:e}")));
            }
        }
        let Some(first) = self.sample_times.first() else {
            return Err(Error::InvalidConfig("sample_times is empty".into()));
        };
        if !(*first >= T::zero()) {
            return Err(Error::InvalidConfig("sample_times must start at t >= 0".into()));
        }
        if self.sample_times.windows(2).any(|w| !(w[1] > w[0])) || self.sample_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("sample_times must be finite and strictly increasing".into()));
        }
        Ok(())
    }

    pub fn horizon(&self) -> T {
        *self.sample_times.last().expect("validated non-empty")
    }
}

pub fn uniform_times<T: Real>(horizon: T, samples: usize) -> Vec<T> {
    let n = samples.saturating_sub(1).max(1);
    let mut times: Vec<T> = (0..samples).map(|k| horizon * T::lit(k as f64) / T::lit(n as f64)).collect();
    if let Some(last) = times.last_mut() {
        *last = horizon;
    }
    times
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T: Real> {
    pub t: T,
    pub rho: DensityMatrix<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationStats<T: Real> {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest accepted scaled error estimate (`<= 1`).
    pub max_error_estimate: T,
    pub min_step: T,
    pub max_step: T,
    /// Max `|tr ρ − 1|` over accepted steps.
    pub trace_drift: T,
    /// Max Hermiticity defect over accepted steps.
    pub hermiticity_drift: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<Sample<T>>,
    pub params: SystemParams<T>,
    pub variant: RhsVariant,
    pub stats: IntegrationStats<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Propagates `rho0` from `t = 0` under the selected generator.
pub fn integrate<T: Real>(
    variant: RhsVariant,
    rho0: &DensityMatrix<T>,
    params: &SystemParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    integrate_with(&Generator::new(variant, params)?, rho0, config)
}

/// As [`integrate`], with a prebuilt generator. Invariants are only enforced
/// for the derived generator.
pub fn integrate_with<T: Real>(
    generator: &Generator<T>,
    rho0: &DensityMatrix<T>,
    config: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    let params = *generator.params();
    let horizon = config.horizon();
    let rate = params.fastest_rate();
    let scale = if rate > T::zero() {
        rate
    } else if horizon > T::zero() {
        T::one() / horizon
    } else {
        T::one()
    };
    let max_step_scaled = match config.max_step {
        Some(h) => h * scale,
        None if rate > T::zero() => T::lit(AUTO_MAX_STEP),
        None => horizon * scale,
    };
    let inv_scale = T::one() / scale;
    let f = |y: &Mat4<T>| generator.apply(y).scale(inv_scale);
    let checks = config.check_invariants && generator.variant() == RhsVariant::Derived;

    let mut stepper = Dopri5::new(f, *rho0.matrix(), config.rel_tol, config.abs_tol, max_step_scaled);
    let mut samples = Vec::with_capacity(config.sample_times.len());
    let mut pending = config.sample_times.iter().copied().peekable();
    let emit = |t: T, m: Mat4<T>, samples: &mut Vec<Sample<T>>| -> Result<()> {
        let rho = DensityMatrix::from_matrix_unchecked(m);
        if checks {
            check_sample(t, &rho, config.invariant_tol)?;
        }
        samples.push(Sample { t, rho });
        Ok(())
    };

    while let Some(&t) = pending.peek() {
        if t == T::zero() {
            emit(t, *rho0.matrix(), &mut samples)?;
            pending.next();
        } else {
            break;
        }
    }
    let s_end = horizon * scale;
    if pending.peek().is_some() {
        stepper.init_step(s_end);
    }
    while pending.peek().is_some() {
        let step = stepper.step(s_end, config.max_steps).map_err(|e| e.rescale_time(inv_scale))?;
        let now = stepper.t * inv_scale;
        if checks {
            let drift = (stepper.y.trace().re - T::one()).abs();
            if drift > config.invariant_tol {
                return Err(Error::InvariantViolation { t: now.as_f64(), what: format!("trace drift {drift:e}") });
            }
        }
        while let Some(&t) = pending.peek() {
            let s = t * scale;
            if s > step.t_new && !(step.last && s >= step.t_new) {
                break;
            }
            let m = if s >= step.t_new { stepper.y } else { stepper.interpolate(s) };
            emit(t, m, &mut samples)?;
            pending.next();
        }
    }

    let mut stats = stepper.stats;
    stats.min_step = stats.min_step * inv_scale;
    stats.max_step = stats.max_step * inv_scale;
    Ok(Trajectory { samples, params, variant: generator.variant(), stats })
}

fn check_sample<T: Real>(t: T, rho: &DensityMatrix<T>, tol: T) -> Result<()> {
    let fail = |what: String| Error::InvariantViolation { t: t.as_f64(), what };
    let drift = (rho.trace() - T::one()).abs();
    if !(drift <= tol) {
        return Err(fail(format!("trace drift {drift:e}")));
    }
    let herm = rho.matrix().hermiticity_defect();
    if !(herm <= tol) {
        return Err(fail(format!("Hermiticity defect {herm:e}")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -tol {
        return Err(fail(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

impl Error {
    fn rescale_time(self, inv_scale: impl Real) -> Self {
        let k = inv_scale.as_f64();
        match self {
            Error::StepSizeUnderflow { t_reached, step } => {
                Error::StepSizeUnderflow { t_reached: t_reached * k, step: step * k }
            }
            Error::MaxStepsExceeded { t_reached, max_steps } => {
                Error::MaxStepsExceeded { t_reached: t_reached * k, max_steps }
            }
            other => other,
        }
    }
}

struct StepOutcome<T> {
    t_new: T,
    last: bool,
}

/// Dormand–Prince 5(4) on 4×4 complex matrices, FSAL, dense output.
struct Dopri5<T: Real, F: Fn(&Mat4<T>) -> Mat4<T>> {
    f: F,
    t: T,
    y: Mat4<T>,
    k1: Mat4<T>,
    h: T,
    rtol: T,
    atol: T,
    h_max: T,
    steps: usize,
    rejected_last: bool,
    cont: [Mat4<T>; 5],
    t_old: T,
    h_old: T,
    stats: IntegrationStats<T>,
}

fn lincomb<T: Real>(base: &Mat4<T>, h: T, terms: &[(f64, &Mat4<T>)]) -> Mat4<T> {
    let mut out = *base;
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let w = h * T::lit(c);
        for i in 0..DIM {
            for j in 0..DIM {
                out.0[i][j] = out.0[i][j] + k.0[i][j] * w;
            }
        }
    }
    out
}

impl<T: Real, F: Fn(&Mat4<T>) -> Mat4<T>> Dopri5<T, F> {
    fn new(f: F, y0: Mat4<T>, rtol: T, atol: T, h_max: T) -> Self {
        let k1 = f(&y0);
        let stats = IntegrationStats { rhs_evaluations: 1, min_step: T::infinity(), ..Default::default() };
        Self {
            f,
            t: T::zero(),
            y: y0,
            k1,
            h: T::zero(),
            rtol,
            atol,
            h_max,
            steps: 0,
            rejected_last: false,
            cont: [Mat4::zeros(); 5],
            t_old: T::zero(),
            h_old: T::one(),
            stats,
        }
    }

    fn error_norm(&self, y_old: &Mat4<T>, y_new: &Mat4<T>, err: &Mat4<T>) -> T {
        let mut acc = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                let sc = self.atol + self.rtol * y_old.0[i][j].norm().max(y_new.0[i][j].norm());
                acc = acc + (err.0[i][j].norm() / sc).powi(2);
            }
        }
        (acc / T::lit((DIM * DIM) as f64)).sqrt()
    }

    /// Initial step heuristic after Hairer, Nørsett & Wanner.
    fn init_step(&mut self, t_end: T) {
        let zero = Mat4::zeros();
        let d0 = self.error_norm(&self.y, &self.y, &self.y);
        let d1 = self.error_norm(&self.y, &self.y, &self.k1);
        let small = T::lit(1e-5);
        let mut h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
        h0 = h0.min(self.h_max).min(t_end - self.t);
        let y1 = lincomb(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(&y1);
        self.stats.rhs_evaluations += 1;
        let d2 = self.error_norm(&self.y, &self.y, &lincomb(&zero, T::one() / h0, &[(1.0, &f1), (-1.0, &self.k1)]));
        let dm = d1.max(d2);
        let h1 = if dm <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dm).powf(T::lit(0.2))
        };
        self.h = (h0 * T::lit(100.0)).min(h1).min(self.h_max);
    }

    fn step(&mut self, t_end: T, max_steps: usize) -> Result<StepOutcome<T>> {
        loop {
            if self.steps >= max_steps {
                return Err(Error::MaxStepsExceeded { t_reached: self.t.as_f64(), max_steps });
            }
            let floor = T::epsilon() * T::lit(16.0) * self.t.abs().max(T::one());
            if self.h < floor {
                return Err(Error::StepSizeUnderflow { t_reached: self.t.as_f64(), step: self.h.as_f64() });
            }
            let mut h = self.h.min(self.h_max);
            let remaining = t_end - self.t;
            let last = h >= remaining * (T::one() - T::lit(1e-12));
            if last {
                h = remaining;
            }
            self.steps += 1;

            let y = self.y;
            let k1 = self.k1;
            let k2 = (self.f)(&lincomb(&y, h, &[(A[1][0], &k1)]));
            let k3 = (self.f)(&lincomb(&y, h, &[(A[2][0], &k1), (A[2][1], &k2)]));
            let k4 = (self.f)(&lincomb(&y, h, &[(A[3][0], &k1), (A[3][1], &k2), (A[3][2], &k3)]));
            let k5 = (self.f)(&lincomb(&y, h, &[(A[4][0], &k1), (A[4][1], &k2), (A[4][2], &k3), (A[4][3], &k4)]));
            let k6 = (self.f)(&lincomb(
                &y,
                h,
                &[(A[5][0], &k1), (A[5][1], &k2), (A[5][2], &k3), (A[5][3], &k4), (A[5][4], &k5)],
            ));
            let y_new = lincomb(
                &y,
                h,
                &[(A[6][0], &k1), (A[6][2], &k3), (A[6][3], &k4), (A[6][4], &k5), (A[6][5], &k6)],
            );
            let k7 = (self.f)(&y_new);
            self.stats.rhs_evaluations += 6;
            let err = lincomb(
                &Mat4::zeros(),
                h,
                &[(E[0], &k1), (E[2], &k3), (E[3], &k4), (E[4], &k5), (E[5], &k6), (E[6], &k7)],
            );
            let en = self.error_norm(&y, &y_new, &err);

            if en <= T::one() {
                let ydiff = y_new - y;
                let bspl = k1.scale(h) - ydiff;
                self.cont = [
                    y,
                    ydiff,
                    bspl,
                    ydiff - k7.scale(h) - bspl,
                    lincomb(
                        &Mat4::zeros(),
                        h,
                        &[(D[0], &k1), (D[2], &k3), (D[3], &k4), (D[4], &k5), (D[5], &k6), (D[6], &k7)],
                    ),
                ];
                self.t_old = self.t;
                self.h_old = h;
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;

                let st = &mut self.stats;
                st.accepted_steps += 1;
                st.max_error_estimate = st.max_error_estimate.max(en);
                st.min_step = st.min_step.min(h);
                st.max_step = st.max_step.max(h);
                st.trace_drift = st.trace_drift.max((y_new.trace().re - T::one()).abs());
                st.hermiticity_drift = st.hermiticity_drift.max(y_new.hermiticity_defect());

                let mut fac = if en == T::zero() {
                    T::lit(FAC_MAX)
                } else {
                    (T::lit(SAFETY) * en.powf(T::lit(-0.2))).max(T::lit(FAC_MIN)).min(T::lit(FAC_MAX))
                };
                if self.rejected_last {
                    fac = fac.min(T::one());
                }
                self.rejected_last = false;
                if !last {
                    self.h = h * fac;
                }
                return Ok(StepOutcome { t_new: self.t, last });
            }

            self.stats.rejected_steps += 1;
            self.rejected_last = true;
            let fac = if en.is_finite() {
                (T::lit(SAFETY) * en.powf(T::lit(-0.2))).max(T::lit(FAC_MIN))
            } else {
                T::lit(FAC_MIN)
            };
            self.h = h * fac;
        }
    }

    /// Dense output on the last accepted step.
    fn interpolate(&self, t: T) -> Mat4<T> {
        let theta = (t - self.t_old) / self.h_old;
        let theta1 = T::one() - theta;
        let [c0, c1, c2, c3, c4] = &self.cont;
        Mat4::from_fn(|i, j| {
            let inner = c3.0[i][j] + c4.0[i][j] * theta1;
            let inner = c2.0[i][j] + inner * theta;
            let inner = c1.0[i][j] + inner * theta1;
            c0.0[i][j] + inner * theta
        })
    }
}

/// Exact solution of the undriven master equation at time `t`.
///
/// With `Ω = 0` the generator splits into small invariant blocks: `ρ₁₁`, `ρ₄₄`
/// are constant; `ρ₁₄` rotates at `2Δ` and decays at `2γ`; the pairs
/// `(ρ₁₂, ρ₁₃)` and `(ρ₂₄, ρ₃₄)` rotate at `Δ ± J` and decay at `γ`; and
/// `(ρ₂₂, ρ₃₃, ρ₂₃)` is a damped exchange oscillation at `2J`.
pub fn closed_form_free<T: Real>(rho0: &DensityMatrix<T>, params: &SystemParams<T>, t: T) -> Result<DensityMatrix<T>> {
    params.validate()?;
    if params.omega != T::zero() {
        return Err(Error::InvalidParams("closed-form propagation needs Omega = 0".into()));
    }
    if t == T::zero() {
        return Ok(*rho0);
    }
    let r = |i: usize, j: usize| rho0.get(i, j);
    let g = params.gamma;
    let j = params.j;
    let d = params.splitting();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let rot = |freq: T, decay: T| Cx::from_polar((-decay * t).exp(), freq * t);

    let mut out = Mat4::zeros();
    out[(0, 0)] = r(0, 0);
    out[(3, 3)] = r(3, 3);
    out[(0, 3)] = r(0, 3) * rot(two * d, two * g);

    let u = (r(0, 1) + r(0, 2)) * rot(d + j, g);
    let v = (r(0, 1) - r(0, 2)) * rot(d - j, g);
    out[(0, 1)] = (u + v) * half;
    out[(0, 2)] = (u - v) * half;

    let u = (r(1, 3) + r(2, 3)) * rot(d - j, g);
    let v = (r(1, 3) - r(2, 3)) * rot(d + j, g);
    out[(1, 3)] = (u + v) * half;
    out[(2, 3)] = (u - v) * half;

    // Exchange block: D = ρ₃₃ − ρ₂₂, z = ρ₂₃ = x + i y.
    //   ẋ = −2γ x,   [Ḋ, ẏ]ᵀ = [[0, 4J], [−J, −2γ]] [D, y]ᵀ
    let sum = r(1, 1).re + r(2, 2).re;
    let d0 = r(2, 2).re - r(1, 1).re;
    let x0 = r(1, 2).re;
    let y0 = r(1, 2).im;
    let (c, s) = damped_pair(g, j, t);
    let four = T::lit(4.0);
    let dt = c * d0 + s * (g * d0 + four * j * y0);
    let yt = c * y0 + s * (-j * d0 - g * y0);
    let xt = x0 * (-two * g * t).exp();
    out[(1, 1)] = Cx::new((sum - dt) * half, T::zero());
    out[(2, 2)] = Cx::new((sum + dt) * half, T::zero());
    out[(1, 2)] = Cx::new(xt, yt);

    Ok(DensityMatrix::from_matrix_unchecked(out.hermitian_from_upper()))
}

/// `e^{−γt}·(cosh κt, sinh κt / κ)` with `κ² = γ² − 4J²`, continued to the
/// oscillatory and critical cases.
fn damped_pair<T: Real>(gamma: T, j: T, t: T) -> (T, T) {
    let k2 = gamma * gamma - T::lit(4.0) * j * j;
    let half = T::lit(0.5);
    if k2 > T::zero() {
        let k = k2.sqrt();
        let ep = ((k - gamma) * t).exp();
        let em = (-(k + gamma) * t).exp();
        ((ep + em) * half, (ep - em) * half / k)
    } else if k2 < T::zero() {
        let w = (-k2).sqrt();
        let decay = (-gamma * t).exp();
        (decay * (w * t).cos(), decay * (w * t).sin() / w)
    } else {
        let decay = (-gamma * t).exp();
        (decay, decay * t)
    }
}

/// [`closed_form_free`] at each of `times`.
pub fn closed_form_trajectory<T: Real>(
    rho0: &DensityMatrix<T>,
    params: &SystemParams<T>,
    times: &[T],
) -> Result<Vec<Sample<T>>> {
    times
        .iter()
        .map(|&t| Ok(Sample { t, rho: closed_form_free(rho0, params, t)? }))
        .collect()
}
