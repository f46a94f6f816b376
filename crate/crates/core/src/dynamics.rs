//! Split-step integration of `i u_t = L u +- |u|^2 u` on a lattice (with
//! `L = L^J_h`) or on the fine continuum grid (with `L = c (-Delta)^alpha`).
//!
//! Both substeps are exact: the nonlinear flow keeps `|u|` fixed pointwise, so
//! `u(t) = exp(-+ i |u|^2 t) u(0)`, and the linear flow is a diagonal phase in
//! Fourier space.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::interp::{ContinuumFunction, Provenance};
use crate::kernel::{Kernel, Periodization};
use crate::lattice::{
    discrete_mass, energy_with, h_sigma_norm, LatticeField, LatticeOperator,
    PeriodicLattice, Sign,
};

pub const MAX_STEPS: f64 = 1e8;
pub const DEFAULT_BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// `N(dt/2) L(dt) N(dt/2)`.
    #[default]
    Strang,
    /// `L(dt) N(dt)`.
    Lie,
}

/// Which parts of the equation are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flow {
    #[default]
    Full,
    LinearOnly,
    NonlinearOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub sign: Sign,
    pub scheme: Scheme,
    pub record_every: usize,
    pub flow: Flow,
    /// Keep a copy of the state at every record point.
    pub keep_states: bool,
    /// Orders `sigma` of the Sobolev norms recorded alongside mass and energy.
    pub norm_sigmas: Vec<f64>,
    /// Abort when `||u||_inf` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_final: f64, sign: Sign) -> Result<Self> {
        let c = Self {
            dt,
            t_final,
            sign,
            scheme: Scheme::Strang,
            record_every: 1,
            flow: Flow::Full,
            keep_states: false,
            norm_sigmas: Vec::new(),
            blowup_factor: DEFAULT_BLOWUP_FACTOR,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt and t_final must be positive and finite, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.dt > self.t_final {
            return Err(Error::InvalidArgument(format!(
                "dt = {} exceeds t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.t_final / self.dt > MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "t_final / dt = {} exceeds the step limit",
                self.t_final / self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        if let Some(s) = self.norm_sigmas.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidArgument(format!("recorded sigma {s} outside [0, 1]")));
        }
        Ok(())
    }

    /// Number of uniform steps and the step actually taken; `dt` is shrunk
    /// so that the steps land exactly on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        let n = libm::ceil(self.t_final / self.dt * (1.0 - 1e-12)).max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_flow(mut self, flow: Flow) -> Self {
        self.flow = flow;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_states(mut self) -> Self {
        self.keep_states = true;
        self
    }

    pub fn with_norms(mut self, sigmas: &[f64]) -> Self {
        self.norm_sigmas = sigmas.to_vec();
        self
    }
}

/// `dt = 1e-3 min(1, beta(h) / omega_max)` with `omega_max` the largest
/// lattice multiplier numerator.
pub fn default_dt(kernel: &Kernel, lattice: PeriodicLattice) -> Result<f64> {
    let op = LatticeOperator::new(kernel, lattice, Periodization::Images)?;
    let lambda_max = op.multiplier().iter().cloned().fold(0.0, f64::max);
    Ok(1e-3 * if lambda_max > 1.0 { 1.0 / lambda_max } else { 1.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    /// One `(sigma, values)` series per requested norm order.
    pub norm_series: Vec<(f64, Vec<f64>)>,
}

impl<S> Trajectory<S> {
    fn new(sigmas: &[f64]) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            mass_series: Vec::new(),
            energy_series: Vec::new(),
            norm_series: sigmas.iter().map(|&s| (s, Vec::new())).collect(),
        }
    }

    pub fn norms(&self, sigma: f64) -> Option<&[f64]> {
        self.norm_series.iter().find(|(s, _)| *s == sigma).map(|(_, v)| v.as_slice())
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.mass_series)
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy_series)
    }

    /// `|E(t_final) - E(0)|`.
    pub fn final_energy_error(&self) -> f64 {
        match (self.energy_series.first(), self.energy_series.last()) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => 0.0,
        }
    }
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else { return 0.0 };
    let scale = if first != 0.0 { first.abs() } else { 1.0 };
    series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max) / scale
}

/// A split-step propagator for a fixed step `dt` (which may be negative).
#[derive(Debug, Clone)]
pub struct SplitStepper {
    plan: FftPlan,
    /// `exp(-i dt lambda_j)`.
    phases: Vec<Complex64>,
    dt: f64,
    sign: Sign,
    scheme: Scheme,
    flow: Flow,
}

impl SplitStepper {
    /// Propagator for a real multiplier `lambda_j` in DFT order.
    pub fn from_multiplier(multiplier: &[f64], dt: f64, sign: Sign, scheme: Scheme, flow: Flow) -> Result<Self> {
        let plan = FftPlan::new(multiplier.len())?;
        let phases = multiplier.iter().map(|&l| Complex64::new(0.0, -dt * l).exp()).collect();
        Ok(Self { plan, phases, dt, sign, scheme, flow })
    }

    pub fn for_lattice(
        op: &LatticeOperator,
        dt: f64,
        sign: Sign,
        scheme: Scheme,
        flow: Flow,
    ) -> Result<Self> {
        Self::from_multiplier(op.multiplier(), dt, sign, scheme, flow)
    }

    /// Propagator on the fine grid with multiplier `c |kappa|^{2 alpha}`.
    pub fn for_continuum(
        grid: PeriodicLattice,
        alpha: f64,
        c: f64,
        dt: f64,
        sign: Sign,
        scheme: Scheme,
        flow: Flow,
    ) -> Result<Self> {
        let m: Vec<f64> = (0..grid.n_sites())
            .map(|j| c * libm::pow((grid.wavenumber(j) / grid.h()).abs(), 2.0 * alpha))
            .collect();
        Self::from_multiplier(&m, dt, sign, scheme, flow)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn nonlinear(&self, u: &mut [Complex64], tau: f64) {
        let g = self.sign.factor() * tau;
        for v in u.iter_mut() {
            *v *= Complex64::new(0.0, -g * v.norm_sqr()).exp();
        }
    }

    fn linear(&self, u: &mut [Complex64]) {
        self.plan.forward(u);
        for (v, p) in u.iter_mut().zip(&self.phases) {
            *v *= p;
        }
        self.plan.inverse(u);
        let inv = 1.0 / u.len() as f64;
        for v in u.iter_mut() {
            *v *= inv;
        }
    }

    /// Advances `u` by one step.
    pub fn step(&self, u: &mut [Complex64]) {
        match self.flow {
            Flow::LinearOnly => self.linear(u),
            Flow::NonlinearOnly => self.nonlinear(u, self.dt),
            Flow::Full => match self.scheme {
                Scheme::Strang => {
                    self.nonlinear(u, 0.5 * self.dt);
                    self.linear(u);
                    self.nonlinear(u, 0.5 * self.dt);
                }
                Scheme::Lie => {
                    self.linear(u);
                    self.nonlinear(u, self.dt);
                }
            },
        }
    }

    pub fn advance(&self, u: &mut [Complex64], steps: usize) {
        for _ in 0..steps {
            self.step(u);
        }
    }
}

fn sup_norm(u: &[Complex64]) -> f64 {
    u.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Runs the stepping loop, calling `record` at step 0, every `record_every`
/// steps and at the final step.
fn run<F>(
    u: &mut [Complex64],
    stepper: &SplitStepper,
    steps: usize,
    config: &EvolutionConfig,
    mut record: F,
) -> Result<()>
where
    F: FnMut(f64, &[Complex64]) -> Result<()>,
{
    let dt = stepper.dt();
    let initial = sup_norm(u);
    record(0.0, u)?;
    for n in 1..=steps {
        stepper.step(u);
        let sup = sup_norm(u);
        if !sup.is_finite() || (initial > 0.0 && sup > config.blowup_factor * initial) {
            return Err(Error::BlowUp { time: n as f64 * dt, sup_norm: sup, initial });
        }
        if n % config.record_every == 0 || n == steps {
            record(if n == steps { config.t_final } else { n as f64 * dt }, u)?;
        }
    }
    Ok(())
}

/// Evolves a lattice datum under the discrete equation.
pub fn evolve_discrete(
    v: &LatticeField,
    kernel: &Kernel,
    config: &EvolutionConfig,
) -> Result<Trajectory<LatticeField>> {
    config.validate()?;
    let lattice = *v.lattice();
    let op = LatticeOperator::new(kernel, lattice, Periodization::Images)?;
    let (steps, dt) = config.steps();
    let stepper = SplitStepper::for_lattice(&op, dt, config.sign, config.scheme, config.flow)?;
    let mut traj = Trajectory::new(&config.norm_sigmas);
    let mut u = v.values().to_vec();
    run(&mut u, &stepper, steps, config, |t, state| {
        let field = LatticeField::from_parts(lattice, state.to_vec());
        traj.times.push(t);
        traj.mass_series.push(discrete_mass(&field));
        traj.energy_series.push(energy_with(&op, &field, config.sign)?);
        for (sigma, series) in traj.norm_series.iter_mut() {
            series.push(h_sigma_norm(&field, *sigma)?);
        }
        if config.keep_states {
            traj.states.push(field);
        }
        Ok(())
    })?;
    Ok(traj)
}

/// Evolves a band-limited continuum datum under `i u_t = c (-Delta)^alpha u +- |u|^2 u`.
pub fn evolve_continuum(
    v: &ContinuumFunction,
    alpha: f64,
    c: f64,
    config: &EvolutionConfig,
) -> Result<Trajectory<ContinuumFunction>> {
    config.validate()?;
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (1/2, 1], got {alpha}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    v.check_band_limited()?;
    let grid = *v.grid();
    let (steps, dt) = config.steps();
    let stepper =
        SplitStepper::for_continuum(grid, alpha, c, dt, config.sign, config.scheme, config.flow)?;
    let mut traj = Trajectory::new(&config.norm_sigmas);
    let mut u = v.samples().to_vec();
    run(&mut u, &stepper, steps, config, |t, state| {
        let f = ContinuumFunction::from_parts(grid, state.to_vec(), Provenance::Evolved);
        traj.times.push(t);
        traj.mass_series.push(f.mass());
        traj.energy_series.push(f.energy(alpha, c, config.sign));
        if !traj.norm_series.is_empty() {
            let spec = f.spectrum();
            for (sigma, series) in traj.norm_series.iter_mut() {
                let s: f64 = spec
                    .iter()
                    .enumerate()
                    .map(|(j, z)| {
                        let w = if *sigma == 0.0 {
                            1.0
                        } else {
                            1.0 + libm::pow(f.wavenumber(j).abs(), 2.0 * *sigma)
                        };
                        w * z.norm_sqr()
                    })
                    .sum();
                series.push(libm::sqrt(grid.h() * s));
            }
        }
        if config.keep_states {
            traj.states.push(f);
        }
        Ok(())
    })?;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriRecord {
    pub sigma: f64,
    pub initial: f64,
    pub sup_norm: f64,
    pub factor: f64,
    pub bounded: bool,
}

/// Running supremum of the recorded `H^sigma` norm and whether it stayed
/// within `factor` times the initial norm.
pub fn track_apriori<S>(traj: &Trajectory<S>, sigma: f64, factor: f64) -> Result<AprioriRecord> {
    let series = traj.norms(sigma).ok_or_else(|| {
        Error::InvalidArgument(format!("trajectory carries no norm series for sigma = {sigma}"))
    })?;
    let initial = series.first().copied().unwrap_or(0.0);
    let sup = series.iter().cloned().fold(0.0, f64::max);
    Ok(AprioriRecord { sigma, initial, sup_norm: sup, factor, bounded: sup <= factor * initial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel, KernelSpec, DEFAULT_EVAL_CUTOFF};
    use crate::lattice::l2_norm;
    use core::f64::consts::PI;

    fn gaussian_field(lat: PeriodicLattice) -> LatticeField {
        LatticeField::from_fn(lat, |x| Complex64::new(libm::exp(-x * x), 0.0)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::new(0.0, 1.0, Sign::Defocusing).is_err());
        assert!(EvolutionConfig::new(2.0, 1.0, Sign::Defocusing).is_err());
        assert!(EvolutionConfig::new(1e-9, 1.0, Sign::Defocusing).is_err());
        let c = EvolutionConfig::new(0.3, 1.0, Sign::Defocusing).unwrap();
        let (n, dt) = c.steps();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(EvolutionConfig::new(0.1, 1.0, Sign::Focusing).unwrap().steps().0, 10);
    }

    #[test]
    fn linear_flow_rotates_plane_modes() {
        let lat = PeriodicLattice::new(0.125, 64).unwrap();
        let k = build_kernel(KernelSpec::PurePower { s: 0.75 }, DEFAULT_EVAL_CUTOFF).unwrap();
        let beta = k.beta(0.125).unwrap();
        let j = 5;
        let u = LatticeField::plane_mode(lat, j);
        let cfg = EvolutionConfig::new(0.01, 0.5, Sign::Defocusing)
            .unwrap()
            .with_flow(Flow::LinearOnly)
            .with_states();
        let traj = evolve_discrete(&u, &k, &cfg).unwrap();
        let t = *traj.times.last().unwrap();
        let phase = Complex64::new(0.0, -t * k.omega(lat.wavenumber(j)) / beta).exp();
        let last = traj.states.last().unwrap();
        let err = l2_norm(&last.sub(&u.scale(phase)).unwrap()) / l2_norm(&u);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn nonlinear_flow_keeps_modulus() {
        let lat = PeriodicLattice::new(0.25, 32).unwrap();
        let k = build_kernel(KernelSpec::NearestNeighbor, 10).unwrap();
        let v = gaussian_field(lat);
        for sign in [Sign::Focusing, Sign::Defocusing] {
            let cfg = EvolutionConfig::new(0.1, 1.0, sign)
                .unwrap()
                .with_flow(Flow::NonlinearOnly)
                .with_states();
            let traj = evolve_discrete(&v, &k, &cfg).unwrap();
            let last = traj.states.last().unwrap();
            for (a, b) in last.values().iter().zip(v.values()) {
                assert!((a.norm() - b.norm()).abs() < 1e-15);
                let expected = b * Complex64::new(0.0, -sign.factor() * b.norm_sqr()).exp();
                assert!((a - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn continuum_plane_wave_phase() {
        let grid = PeriodicLattice::new(2.0 * PI / 64.0, 64).unwrap();
        let kappa = 3.0;
        let amp = 0.7;
        let v = ContinuumFunction::from_fn(grid, |x| Complex64::new(0.0, kappa * x).exp() * amp).unwrap();
        let (alpha, c) = (0.75, 1.3);
        let cfg = EvolutionConfig::new(0.01, 0.5, Sign::Defocusing).unwrap().with_states();
        let traj = evolve_continuum(&v, alpha, c, &cfg).unwrap();
        let t = 0.5;
        let w = c * libm::pow(kappa, 2.0 * alpha) + amp * amp;
        let rot = Complex64::new(0.0, -w * t).exp();
        let last = traj.states.last().unwrap();
        for (a, b) in last.samples().iter().zip(v.samples()) {
            assert!((a - b * rot).norm() < 1e-12);
        }
    }

    #[test]
    fn apriori_zero_datum() {
        let lat = PeriodicLattice::new(0.25, 32).unwrap();
        let k = build_kernel(KernelSpec::NearestNeighbor, 10).unwrap();
        let cfg = EvolutionConfig::new(0.1, 1.0, Sign::Focusing).unwrap().with_norms(&[0.5]);
        let traj = evolve_discrete(&LatticeField::zeros(lat), &k, &cfg).unwrap();
        let rec = track_apriori(&traj, 0.5, 10.0).unwrap();
        assert_eq!(rec.sup_norm, 0.0);
        assert!(rec.bounded);
        assert!(track_apriori(&traj, 0.25, 10.0).is_err());
    }

    #[test]
    fn reversibility() {
        let lat = PeriodicLattice::new(0.125, 128).unwrap();
        let k = build_kernel(KernelSpec::PurePower { s: 0.75 }, DEFAULT_EVAL_CUTOFF).unwrap();
        let op = LatticeOperator::new(&k, lat, Periodization::Images).unwrap();
        let v = gaussian_field(lat).scale(Complex64::new(1.5, 0.0));
        let fwd = SplitStepper::for_lattice(&op, 0.01, Sign::Defocusing, Scheme::Strang, Flow::Full).unwrap();
        let bwd = SplitStepper::for_lattice(&op, -0.01, Sign::Defocusing, Scheme::Strang, Flow::Full).unwrap();
        let mut u = v.values().to_vec();
        fwd.advance(&mut u, 100);
        bwd.advance(&mut u, 100);
        let back = LatticeField::new(lat, u).unwrap();
        assert!(l2_norm(&back.sub(&v).unwrap()) < 1e-9);
    }
}
