//! Preset scenarios, observables and the tables they produce.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::integrator::{integrate_with, uniform_times, IntegrationConfig, Sample};
use crate::liouvillian::{Generator, RhsVariant};
use crate::qcore::{
    expectation, population, pure_density, to_entangled_basis, DensityMatrix, NamedState, PureState, SystemParams,
};
use crate::scalar::Real;
use crate::zeno::{analytic_survival, run_zeno, AnalyticSurvival, ZenoPoint, ZenoProtocol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Rho11,
    Rho22,
    Rho33,
    Rho44,
    RhoAa,
    RhoSs,
    RhoPp,
    RhoQq,
    RhoFf,
    RhoKk,
    ReRho23,
    Concurrence,
}

impl Observable {
    pub const ALL: [Observable; 12] = [
        Observable::Rho11,
        Observable::Rho22,
        Observable::Rho33,
        Observable::Rho44,
        Observable::RhoAa,
        Observable::RhoSs,
        Observable::RhoPp,
        Observable::RhoQq,
        Observable::RhoFf,
        Observable::RhoKk,
        Observable::ReRho23,
        Observable::Concurrence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Rho11 => "rho11",
            Observable::Rho22 => "rho22",
            Observable::Rho33 => "rho33",
            Observable::Rho44 => "rho44",
            Observable::RhoAa => "rho_aa",
            Observable::RhoSs => "rho_ss",
            Observable::RhoPp => "rho_pp",
            Observable::RhoQq => "rho_qq",
            Observable::RhoFf => "rho_ff",
            Observable::RhoKk => "rho_kk",
            Observable::ReRho23 => "re_rho23",
            Observable::Concurrence => "C",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|o| o.name()).collect::<Vec<_>>().join(", ")
    }

    fn target(self) -> Option<NamedState> {
        match self {
            Observable::RhoAa => Some(NamedState::A),
            Observable::RhoSs => Some(NamedState::S),
            Observable::RhoPp => Some(NamedState::P),
            Observable::RhoQq => Some(NamedState::Q),
            Observable::RhoFf => Some(NamedState::F),
            Observable::RhoKk => Some(NamedState::K),
            _ => None,
        }
    }

    /// Depends on the phase of `ρ₁₄`, which the frame choice changes.
    pub fn frame_dependent(self) -> bool {
        matches!(self, Observable::RhoPp | Observable::RhoQq)
    }

    /// Value on a physical state. Populations are clamped within rounding
    /// and the concurrence must succeed.
    pub fn evaluate<T: Real>(self, rho: &DensityMatrix<T>) -> Result<T> {
        match self {
            Observable::Rho11 => Ok(rho.get(0, 0).re),
            Observable::Rho22 => Ok(rho.get(1, 1).re),
            Observable::Rho33 => Ok(rho.get(2, 2).re),
            Observable::Rho44 => Ok(rho.get(3, 3).re),
            Observable::ReRho23 => Ok(rho.get(1, 2).re),
            Observable::Concurrence => Ok(concurrence(rho)?.value),
            o => population(rho, &o.target().expect("population observable").state()),
        }
    }

    /// Value on a possibly unphysical state: raw expectation values, and NaN
    /// where the concurrence is undefined.
    pub fn evaluate_raw<T: Real>(self, rho: &DensityMatrix<T>) -> T {
        match self.target() {
            Some(n) => expectation(rho.matrix(), &n.state()).re,
            None => self.evaluate(rho).unwrap_or_else(|_| T::nan()),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::UnknownObservable { name: s.to_string(), valid: Self::valid_names() })
    }
}

/// Time series with named columns. Written as CSV with a `t_s` column first.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableTable<T: Real> {
    pub columns: Vec<String>,
    pub times: Vec<T>,
    pub rows: Vec<Vec<T>>,
    /// Switch-off instant when the run had one.
    pub field_off_time: Option<T>,
}

impl<T: Real> ObservableTable<T> {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, times: Vec::new(), rows: Vec::new(), field_off_time: None }
    }

    pub fn push(&mut self, t: T, row: Vec<T>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.times.push(t);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<T>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Header `t_s,<columns>`, values as `{:.16e}` (17 significant digits),
    /// LF line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        if self.is_empty() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty table"));
        }
        let mut line = String::from("t_s");
        for c in &self.columns {
            line.push(',');
            line.push_str(c);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            line.clear();
            line.push_str(&format!("{:.16e}", t.as_f64()));
            for v in row {
                line.push_str(&format!(",{:.16e}", v.as_f64()));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> io::Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ASCII output"))
    }
}

impl ObservableTable<f64> {
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidConfig(format!("malformed CSV: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let mut names = header.split(',');
        if names.next() != Some("t_s") {
            return Err(bad("first column must be t_s".into()));
        }
        let mut table = ObservableTable::new(names.map(str::to_string).collect());
        for (k, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 1))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != table.columns.len() + 1 {
                return Err(bad(format!("row {} has {} fields", k + 1, vals.len())));
            }
            table.push(vals[0], vals[1..].to_vec());
        }
        Ok(table)
    }
}

/// Field switch-off inside a driven run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldOff<T: Real> {
    At(T),
    /// At the first maximum of an observable, located on a grid of the
    /// given spacing and refined by quadratic interpolation.
    FirstMaximum { observable: Observable, resolution: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Omega0,
    DeltaL,
    J,
    Omega,
    Gamma,
    Horizon,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] =
        [SweepParam::Omega0, SweepParam::DeltaL, SweepParam::J, SweepParam::Omega, SweepParam::Gamma, SweepParam::Horizon];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Omega0 => "omega0",
            SweepParam::DeltaL => "delta_l",
            SweepParam::J => "J",
            SweepParam::Omega => "Omega",
            SweepParam::Gamma => "gamma",
            SweepParam::Horizon => "horizon",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| {
            let valid = Self::ALL.iter().map(|p| p.name()).collect::<Vec<_>>().join(", ");
            Error::InvalidConfig(format!("unknown sweep parameter `{s}`; valid: {valid}"))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T: Real> {
    pub param: SweepParam,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T: Real> {
    pub name: String,
    pub initial: NamedState,
    pub params: SystemParams<T>,
    pub horizon: T,
    /// Uniform output grid on `[window_start, horizon]`.
    pub samples: usize,
    pub window_start: T,
    pub observables: Vec<Observable>,
    pub field_off: Option<FieldOff<T>>,
    /// Parameter variants the preset is meant to be run over.
    pub sweep: Option<Sweep<T>>,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(format!("{}: {msg}", self.name)));
        self.params.validate()?;
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return fail(format!("horizon must be > 0, got {:e}", self.horizon));
        }
        if self.samples < 2 {
            return fail("need at least two samples".into());
        }
        if !(self.window_start >= T::zero() && self.window_start < self.horizon) {
            return fail("window start must lie in [0, horizon)".into());
        }
        if self.observables.is_empty() {
            return fail("no observables selected".into());
        }
        if let Some(off) = &self.field_off {
            if !self.params.driven {
                return fail("field switch-off requires a driven scenario".into());
            }
            if let FieldOff::At(t) = off {
                if !(*t > T::zero() && *t < self.horizon) {
                    return fail(format!("field_off_time must lie in (0, horizon), got {t:e}"));
                }
            }
            if let FieldOff::FirstMaximum { resolution, .. } = off {
                if !(*resolution > T::zero()) {
                    return fail("trigger resolution must be > 0".into());
                }
            }
            if let Some(o) = self.observables.iter().find(|o| o.frame_dependent()) {
                return fail(format!("{o} depends on the frame after switch-off"));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> PureState<T> {
        self.initial.state()
    }

    pub fn sample_times(&self) -> Vec<T> {
        let span = self.horizon - self.window_start;
        uniform_times(span, self.samples).into_iter().map(|t| t + self.window_start).collect()
    }

    /// Same scenario with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: T) -> Result<Self> {
        let mut s = self.clone();
        match param {
            SweepParam::Omega0 => s.params.omega0 = value,
            SweepParam::DeltaL => s.params.delta_l = value,
            SweepParam::J => s.params.j = value,
            SweepParam::Omega => s.params.omega = value,
            SweepParam::Gamma => s.params.gamma = value,
            SweepParam::Horizon => s.horizon = value,
        }
        s.sweep = None;
        s.validate()?;
        Ok(s)
    }

    /// One scenario per sweep value, or just this one.
    pub fn expand(&self) -> Result<Vec<Self>> {
        match &self.sweep {
            None => Ok(vec![self.clone()]),
            Some(sw) => sw.values.iter().map(|&v| self.with_param(sw.param, v)).collect(),
        }
    }

    /// Output restricted to `[start, start + duration]` with at least 20
    /// samples per `1/J`, to resolve the exchange-frequency ripple of
    /// driven runs.
    pub fn zoomed(&self, start: T, duration: T) -> Result<Self> {
        let mut s = self.clone();
        s.window_start = start;
        s.horizon = start + duration;
        let per_unit = T::lit(20.0) * self.params.j.max(T::one() / duration);
        s.samples = (duration * per_unit).ceil().to_usize().unwrap_or(0).max(1) + 1;
        s.name = format!("{}_zoom", self.name);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZenoSweep<T: Real> {
    pub name: String,
    pub taus: Vec<T>,
    pub total: T,
    pub target: NamedState,
    pub params: SystemParams<T>,
}

/// Survival curves for one interval, with and without dephasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ZenoSeries<T: Real> {
    pub tau: T,
    pub dephased: Vec<ZenoPoint<T>>,
    pub coherent: Vec<ZenoPoint<T>>,
    pub analytic: Vec<AnalyticSurvival<T>>,
}

impl<T: Real> ZenoSeries<T> {
    pub fn table(&self) -> ObservableTable<T> {
        let cols = ["survival", "survival_gamma0", "exact", "gaussian"];
        let mut table = ObservableTable::new(cols.iter().map(|c| c.to_string()).collect());
        for ((d, c), a) in self.dephased.iter().zip(&self.coherent).zip(&self.analytic) {
            table.push(d.t, vec![d.survival, c.survival, a.exact, a.gaussian]);
        }
        table
    }
}

impl<T: Real> ZenoSweep<T> {
    pub fn run(&self) -> Result<Vec<ZenoSeries<T>>> {
        let target = self.target.state();
        let coherent_params = SystemParams { gamma: T::zero(), ..self.params };
        self.taus
            .iter()
            .map(|&tau| {
                let n = (self.total / tau).round().to_usize().unwrap_or(0);
                let dephased = run_zeno(&ZenoProtocol::with_target(tau, n, target, self.params)?)?;
                let coherent = run_zeno(&ZenoProtocol::with_target(tau, n, target, coherent_params)?)?;
                let analytic = (1..=n).map(|k| analytic_survival(self.params.j, tau, k)).collect();
                Ok(ZenoSeries { tau, dephased, coherent, analytic })
            })
            .collect::<Result<_>>()
            .map_err(|e: Error| e.in_scenario(&self.name))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Preset<T: Real> {
    Trajectory(Scenario<T>),
    Zeno(ZenoSweep<T>),
}

impl<T: Real> Preset<T> {
    pub fn name(&self) -> &str {
        match self {
            Preset::Trajectory(s) => &s.name,
            Preset::Zeno(z) => &z.name,
        }
    }
}

const OMEGA0: f64 = 1.5e11;
const J: f64 = 4e9;
const GAMMA: f64 = 1e6;

/// Every preset, in a fixed order.
pub fn catalog<T: Real>() -> Vec<Preset<T>> {
    use Observable::*;
    let l = T::lit;
    let free = SystemParams::free(l(OMEGA0), l(J), l(GAMMA));
    let scenario = |name: &str, initial, params, horizon: f64, samples, observables: &[Observable]| Scenario {
        name: name.to_string(),
        initial,
        params,
        horizon: l(horizon),
        samples,
        window_start: T::zero(),
        observables: observables.to_vec(),
        field_off: None,
        sweep: None,
    };
    let ll_obs = [RhoAa, RhoSs, RhoPp, RhoQq, ReRho23, Concurrence];
    let detuned_obs = [Rho22, Rho33, Rho44, RhoSs, RhoAa, ReRho23, Concurrence];
    let detuned_s = scenario(
        "driven_detuned_s",
        NamedState::E1E2,
        SystemParams::driven(l(OMEGA0), l(J), l(J), l(4e7), l(GAMMA)),
        0.2e-6,
        2001,
        &detuned_obs,
    );
    let mut switch_off = Scenario {
        name: "switch_off".into(),
        horizon: l(3e-6),
        samples: 3001,
        field_off: Some(FieldOff::FirstMaximum { observable: RhoSs, resolution: l(1e-9) }),
        sweep: Some(Sweep { param: SweepParam::Gamma, values: vec![l(1e6), l(1e5)] }),
        ..detuned_s.clone()
    };
    switch_off.observables = detuned_obs.to_vec();

    vec![
        Preset::Trajectory(scenario(
            "free_eg",
            NamedState::E1G2,
            free,
            5e-9,
            2001,
            &[Rho11, Rho22, Rho33, Rho44, RhoFf, RhoKk, Concurrence],
        )),
        Preset::Trajectory(scenario("free_LL", NamedState::L1L2, free, 5e-9, 20001, &ll_obs)),
        Preset::Trajectory(scenario("free_LR", NamedState::L1R2, free, 5e-9, 20001, &ll_obs)),
        Preset::Trajectory(scenario(
            "driven_resonant",
            NamedState::E1E2,
            SystemParams::driven(l(OMEGA0), T::zero(), l(J), l(7e7), l(GAMMA)),
            5e-6,
            5001,
            &[Rho11, Rho44, RhoSs, RhoAa, Concurrence],
        )),
        Preset::Trajectory(detuned_s.clone()),
        Preset::Trajectory(Scenario {
            name: "driven_detuned_a".into(),
            params: SystemParams::driven(l(OMEGA0), -l(J), l(J), l(4e7), l(GAMMA)),
            ..detuned_s
        }),
        Preset::Trajectory(switch_off),
        Preset::Zeno(ZenoSweep {
            name: "zeno_sweep".into(),
            taus: vec![l(1e-10), l(1e-11), l(5e-12)],
            total: l(1e-9),
            target: NamedState::F,
            params: free,
        }),
    ]
}

pub fn catalog_names() -> String {
    catalog::<f64>().iter().map(|p| p.name().to_string()).collect::<Vec<_>>().join(", ")
}

pub fn preset<T: Real>(name: &str) -> Result<Preset<T>> {
    catalog()
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| Error::UnknownScenario { name: name.to_string(), valid: catalog_names() })
}

/// A trajectory preset by name.
pub fn scenario<T: Real>(name: &str) -> Result<Scenario<T>> {
    match preset(name)? {
        Preset::Trajectory(s) => Ok(s),
        Preset::Zeno(_) => Err(Error::InvalidConfig(format!("`{name}` is a Zeno sweep, not a trajectory scenario"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions<T: Real> {
    pub variant: RhsVariant,
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: Option<T>,
}

// Scenario runs integrate two orders tighter than the library default so
// that accumulated error stays below the 1e-9 clamping tolerance that the
// observables (notably C) apply to each sample.
impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self { variant: RhsVariant::Derived, rel_tol: T::tol(1e-12), abs_tol: T::tol(1e-14), max_step: None }
    }
}

impl<T: Real> RunOptions<T> {
    fn config(&self, times: Vec<T>) -> Result<IntegrationConfig<T>> {
        let mut cfg = IntegrationConfig::new(times)?.with_tolerances(self.rel_tol, self.abs_tol)?;
        cfg.max_step = self.max_step;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Integrates a scenario and evaluates its observables at every sample.
///
/// With a switch-off the run is split: the driven segment ends at the
/// switch-off instant and the state continues under `Ω = 0` in the same
/// rotating frame.
pub fn run_scenario<T: Real>(s: &Scenario<T>, opts: &RunOptions<T>) -> Result<ObservableTable<T>> {
    run_inner(s, opts).map_err(|e| e.in_scenario(&s.name))
}

fn run_inner<T: Real>(s: &Scenario<T>, opts: &RunOptions<T>) -> Result<ObservableTable<T>> {
    s.validate()?;
    let rho0 = pure_density(&s.initial_state())?;
    let times = s.sample_times();
    let strict = opts.variant == RhsVariant::Derived;
    let mut table = ObservableTable::new(s.observables.iter().map(|o| o.name().to_string()).collect());
    let record = |samples: &[Sample<T>], offset: T, table: &mut ObservableTable<T>| -> Result<()> {
        for smp in samples {
            let row = s
                .observables
                .iter()
                .map(|o| if strict { o.evaluate(&smp.rho) } else { Ok(o.evaluate_raw(&smp.rho)) })
                .collect::<Result<Vec<_>>>()?;
            table.push(smp.t + offset, row);
        }
        Ok(())
    };

    let driven = Generator::new(opts.variant, &s.params)?;
    let t_off = match s.field_off {
        None => {
            let traj = integrate_with(&driven, &rho0, &opts.config(times)?)?;
            record(&traj.samples, T::zero(), &mut table)?;
            return Ok(table);
        }
        Some(FieldOff::At(t)) => t,
        Some(FieldOff::FirstMaximum { observable, resolution }) => {
            locate_trigger(&driven, &rho0, observable, resolution, s.horizon, opts, strict)?
        }
    };

    let (before, after): (Vec<T>, Vec<T>) = times.iter().partition(|&&t| t <= t_off);
    let mut seg_times = before.clone();
    if seg_times.last() != Some(&t_off) {
        seg_times.push(t_off);
    }
    let first = integrate_with(&driven, &rho0, &opts.config(seg_times)?)?;
    record(&first.samples[..before.len()], T::zero(), &mut table)?;
    let rho_off = first.last().rho;

    if !after.is_empty() {
        let free = Generator::new(opts.variant, &s.params.with_field_off())?;
        let rel: Vec<T> = after.iter().map(|&t| t - t_off).collect();
        let second = integrate_with(&free, &rho_off, &opts.config(rel)?)?;
        record(&second.samples, t_off, &mut table)?;
    }
    table.field_off_time = Some(t_off);
    Ok(table)
}

/// Integrates in chunks on a grid of spacing `resolution` until the first
/// maximum of `observable` is bracketed.
fn locate_trigger<T: Real>(
    generator: &Generator<T>,
    rho0: &DensityMatrix<T>,
    observable: Observable,
    resolution: T,
    horizon: T,
    opts: &RunOptions<T>,
    strict: bool,
) -> Result<T> {
    const CHUNK: usize = 200;
    let mut ts = vec![T::zero()];
    let mut vs = vec![if strict { observable.evaluate(rho0)? } else { observable.evaluate_raw(rho0) }];
    let mut rho = *rho0;
    let mut t0 = T::zero();
    while t0 < horizon {
        let rel: Vec<T> = (1..=CHUNK).map(|k| resolution * T::lit(k as f64)).filter(|&t| t0 + t <= horizon).collect();
        if rel.is_empty() {
            break;
        }
        let traj = integrate_with(generator, &rho, &opts.config(rel)?)?;
        for smp in &traj.samples {
            ts.push(t0 + smp.t);
            vs.push(if strict { observable.evaluate(&smp.rho)? } else { observable.evaluate_raw(&smp.rho) });
        }
        rho = traj.last().rho;
        t0 = *ts.last().expect("non-empty");
        if let Ok((t, _)) = find_first_maximum(&ts, &vs) {
            if t > T::zero() {
                return Ok(t);
            }
        }
    }
    Err(Error::InvalidParams(format!("{observable} has no maximum before the horizon")))
}

/// First local maximum of a sampled series.
///
/// A strict three-point maximum is refined by the vertex of the parabola
/// through its neighbours. A series that falls from its first sample and
/// rises again later has its maximum at the boundary.
pub fn find_first_maximum<T: Real>(times: &[T], values: &[T]) -> Result<(T, T)> {
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::InvalidParams("series must be non-empty with matching lengths".into()));
    }
    let n = values.len();
    if n < 3 {
        return Err(Error::MonotoneSeries);
    }
    if values[1] < values[0] {
        return if values.windows(2).any(|w| w[1] > w[0]) { Ok((times[0], values[0])) } else { Err(Error::MonotoneSeries) };
    }
    for i in 1..n - 1 {
        if values[i - 1] < values[i] && values[i] >= values[i + 1] {
            return Ok(refine_vertex(
                (times[i - 1], values[i - 1]),
                (times[i], values[i]),
                (times[i + 1], values[i + 1]),
            ));
        }
    }
    Err(Error::MonotoneSeries)
}

fn refine_vertex<T: Real>(p0: (T, T), p1: (T, T), p2: (T, T)) -> (T, T) {
    let (x0, x2) = (p0.0 - p1.0, p2.0 - p1.0);
    let (d0, d2) = (p0.1 - p1.1, p2.1 - p1.1);
    let a = (d2 / x2 - d0 / x0) / (x2 - x0);
    let b = d2 / x2 - a * x2;
    if !(a < T::zero()) {
        return p1;
    }
    let x = (-b / (T::lit(2.0) * a)).max(x0).min(x2);
    (p1.0 + x, p1.1 + b * x + a * x * x)
}

/// Density matrix in the `(p, s, a, q)` basis at a concurrence maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceSnapshot<T: Real> {
    pub t: T,
    pub concurrence: T,
    pub entangled: DensityMatrix<T>,
}

/// Snapshots at every interior local maximum of the concurrence.
pub fn concurrence_maxima<T: Real>(samples: &[Sample<T>]) -> Result<Vec<ConcurrenceSnapshot<T>>> {
    let c = samples.iter().map(|s| Ok(concurrence(&s.rho)?.value)).collect::<Result<Vec<T>>>()?;
    Ok((1..c.len().saturating_sub(1))
        .filter(|&i| c[i - 1] < c[i] && c[i] >= c[i + 1])
        .map(|i| ConcurrenceSnapshot { t: samples[i].t, concurrence: c[i], entangled: to_entangled_basis(&samples[i].rho) })
        .collect())
}

/// Runs independent scenarios concurrently; results keep input order.
pub fn run_many<T: Real>(scenarios: &[Scenario<T>], opts: &RunOptions<T>) -> Vec<Result<ObservableTable<T>>> {
    scenarios.par_iter().map(|s| run_scenario(s, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_and_order() {
        let names: Vec<String> = catalog::<f64>().iter().map(|p| p.name().to_string()).collect();
        assert_eq!(
            names,
            [
                "free_eg",
                "free_LL",
                "free_LR",
                "driven_resonant",
                "driven_detuned_s",
                "driven_detuned_a",
                "switch_off",
                "zeno_sweep"
            ]
        );
        for p in catalog::<f64>() {
            if let Preset::Trajectory(s) = p {
                s.validate().unwrap();
                for v in s.expand().unwrap() {
                    v.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn preset_parameters() {
        let eg = scenario::<f64>("free_eg").unwrap();
        assert_eq!((eg.params.omega0, eg.params.j, eg.params.gamma, eg.params.omega), (1.5e11, 4e9, 1e6, 0.0));
        assert!(!eg.params.driven);
        let s = scenario::<f64>("driven_detuned_s").unwrap();
        assert_eq!((s.params.delta_l, s.params.omega), (s.params.j, 4e7));
        let a = scenario::<f64>("driven_detuned_a").unwrap();
        assert_eq!(a.params.delta_l, -4e9);
        match preset::<f64>("zeno_sweep").unwrap() {
            Preset::Zeno(z) => assert_eq!(z.taus, vec![1e-10, 1e-11, 5e-12]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(preset::<f64>("nope"), Err(Error::UnknownScenario { .. })));
        assert!(scenario::<f64>("zeno_sweep").is_err());
    }

    #[test]
    fn observables_parse() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        assert!(matches!("rho55".parse::<Observable>(), Err(Error::UnknownObservable { .. })));
    }

    #[test]
    fn first_maximum_of_sine_squared() {
        let omega = 4e7;
        let ts: Vec<f64> = (0..100).map(|k| k as f64 * 1e-9).collect();
        let vs: Vec<f64> = ts.iter().map(|t| (2f64.sqrt() * omega * t).sin().powi(2)).collect();
        let (t, v) = find_first_maximum(&ts, &vs).unwrap();
        let want = std::f64::consts::PI / (2.0 * 2f64.sqrt() * omega);
        assert!((t - want).abs() < 1e-10, "{t:e} vs {want:e}");
        assert!(v <= 1.0 + 1e-12 && v > 0.999);
    }

    #[test]
    fn first_maximum_edge_cases() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64 * 1e-11).collect();
        assert_eq!(find_first_maximum(&ts, &vec![0.3; 50]), Err(Error::MonotoneSeries));
        let rising: Vec<f64> = ts.iter().map(|t| t * 1e9).collect();
        assert_eq!(find_first_maximum(&ts, &rising), Err(Error::MonotoneSeries));
        let cos2: Vec<f64> = ts.iter().map(|t| (4e9 * t).cos().powi(2)).collect();
        assert_eq!(find_first_maximum(&ts, &cos2).unwrap(), (0.0, 1.0));
        assert!(find_first_maximum::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut table = ObservableTable::new(vec!["a".into(), "C".into()]);
        table.push(0.0, vec![1.0 / 3.0, 0.0]);
        table.push(1e-9, vec![std::f64::consts::PI, 2.0f64.sqrt() * 1e-300]);
        let text = table.to_csv().unwrap();
        assert!(text.starts_with("t_s,a,C\n"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let back = ObservableTable::from_csv(&text).unwrap();
        assert_eq!(back.rows, table.rows);
        assert_eq!(back.times, table.times);
        assert!(ObservableTable::<f64>::new(vec!["a".into()]).to_csv().is_err());
    }

    #[test]
    fn single_sample_table_is_two_lines() {
        let mut table = ObservableTable::new(vec!["C".into()]);
        table.push(0.0, vec![0.0]);
        assert_eq!(table.to_csv().unwrap().lines().count(), 2);
    }

    #[test]
    fn switch_off_validation() {
        let mut s = scenario::<f64>("free_eg").unwrap();
        s.field_off = Some(FieldOff::At(1e-9));
        assert!(s.validate().is_err());
        let mut d = scenario::<f64>("driven_detuned_s").unwrap();
        d.field_off = Some(FieldOff::At(1.0));
        assert!(d.validate().is_err());
        d.field_off = Some(FieldOff::At(1e-8));
        d.observables.push(Observable::RhoPp);
        assert!(d.validate().is_err());
    }

    #[test]
    fn zoom_window_sampling() {
        let mut s = scenario::<f64>("driven_resonant").unwrap();
        s.params.j = 1e9;
        let z = s.zoomed(1e-7, 2e-8).unwrap();
        let ts = z.sample_times();
        assert_eq!(ts[0], 1e-7);
        assert!((ts.last().unwrap() - 1.2e-7).abs() < 1e-20);
        assert!((ts[1] - ts[0]) * 1e9 <= 1.0 / 20.0 + 1e-12);
    }

    #[test]
    fn free_eg_starts_separable() {
        let mut s = scenario::<f64>("free_eg").unwrap();
        s.samples = 11;
        s.horizon = 1e-10;
        let t = run_scenario(&s, &RunOptions::default()).unwrap();
        assert_eq!(t.column("C").unwrap()[0], 0.0);
        assert_eq!(t.columns.len(), 7);
    }
}
