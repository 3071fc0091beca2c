//! Fixed-step symplectic integration of the separable oscillator family.
//!
//! The Hamiltonian splits as `H = T(v) + V(u)` with kinetic `T = 1/2 sum v_i^2`
//! and potential `V = 1/2 sum mu_i u_i^2 - eps/(2k) (sum u_j^2)^k`, so explicit
//! splitting schemes apply:
//!
//! * [`Scheme::StormerVerlet2`] — kick-drift-kick leapfrog, second order;
//! * [`Scheme::Yoshida4`] — the triple-jump composition of Verlet steps with
//!   weights `w1 = 1/(2 - 2^(1/3))`, `w0 = 1 - 2 w1`, fourth order.
//!
//! Both are symplectic and time-reversible, which is what the long-time
//! section statistics downstream need: energy errors stay bounded instead of
//! accumulating secularly, and [`reverse_check`] recovers the initial state
//! to near roundoff.
//!
//! Steps are fixed size and the flow map is deterministic for fixed inputs.
//! Trajectories that leave the ball of radius `1e12` abort with an escape
//! error carrying the last finite time (possible for `eps = +1`, where the
//! coupling term is anti-confining).

use std::io::{self, Write};

use thiserror::Error;

use crate::dynamics::{hamiltonian_value, DynamicsError, PhaseState, SystemParams};

/// Component magnitude beyond which a trajectory counts as escaped.
pub const ESCAPE_THRESHOLD: f64 = 1e12;

/// Errors from integration.
#[derive(Debug, Error)]
pub enum IntegratorError {
    /// A state component exceeded [`ESCAPE_THRESHOLD`].
    #[error("trajectory escaped beyond {ESCAPE_THRESHOLD:e}; last finite time t = {t}")]
    Escape {
        /// Time of the last state inside the escape ball.
        t: f64,
    },
    /// A state component became NaN.
    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState {
        /// Time of the last finite state.
        t: f64,
    },
    /// Configuration violates an invariant.
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    /// Underlying dimension or state validation failure.
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    /// An operation that needs samples was given an empty trajectory.
    #[error("operation requires a nonempty trajectory")]
    EmptyTrajectory,
}

/// Available splitting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Second-order kick-drift-kick Störmer–Verlet.
    StormerVerlet2,
    /// Fourth-order Yoshida composition of three Verlet steps.
    Yoshida4,
}

/// Step size, duration, scheme, and recording stride for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Step size, `> 0`.
    pub dt: f64,
    /// Final time, `>= dt`.
    pub t_end: f64,
    /// Splitting scheme.
    pub scheme: Scheme,
    /// Record every this many steps (the initial and final states are always
    /// recorded).
    pub record_stride: usize,
}

impl IntegratorConfig {
    /// Validates `dt > 0`, `t_end >= dt`, `record_stride >= 1`.
    pub fn new(
        dt: f64,
        t_end: f64,
        scheme: Scheme,
        record_stride: usize,
    ) -> Result<Self, IntegratorError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(IntegratorError::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        if !(t_end >= dt && t_end.is_finite()) {
            return Err(IntegratorError::InvalidConfig(format!(
                "t_end = {t_end} must be finite and >= dt = {dt}"
            )));
        }
        if record_stride == 0 {
            return Err(IntegratorError::InvalidConfig("record_stride must be >= 1".into()));
        }
        Ok(IntegratorConfig { dt, t_end, scheme, record_stride })
    }

    /// Number of whole steps covering `t_end`.
    pub fn step_count(&self) -> u64 {
        (self.t_end / self.dt).round().max(1.0) as u64
    }
}

/// A sampled solution curve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// System the curve solves.
    pub params: SystemParams,
    /// Strictly increasing sample times.
    pub times: Vec<f64>,
    /// Sampled states, same length as `times`.
    pub states: Vec<PhaseState<f64>>,
    /// `H` evaluated at each sample.
    pub energies: Vec<f64>,
}

impl Trajectory {
    /// Final sampled state.
    pub fn last_state(&self) -> &PhaseState<f64> {
        self.states.last().expect("trajectories are built nonempty")
    }

    /// Writes the samples as CSV with header `t,u1..um,v1..vm,H` and
    /// 17-significant-digit scientific formatting, so repeated runs produce
    /// byte-identical files.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let m = self.params.m;
        write!(out, "t")?;
        for i in 1..=m {
            write!(out, ",u{i}")?;
        }
        for i in 1..=m {
            write!(out, ",v{i}")?;
        }
        writeln!(out, ",H")?;
        for idx in 0..self.times.len() {
            write!(out, "{}", fmt_f64(self.times[idx]))?;
            for i in 0..m {
                write!(out, ",{}", fmt_f64(self.states[idx].u[i]))?;
            }
            for i in 0..m {
                write!(out, ",{}", fmt_f64(self.states[idx].v[i]))?;
            }
            writeln!(out, ",{}", fmt_f64(self.energies[idx]))?;
        }
        Ok(())
    }

    /// CSV samples as an in-memory string.
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// 17 significant digits, scientific; round-trips every finite `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Low-level integration driver: owns the current `(u, v)` and advances by
/// arbitrary step sizes. Time bookkeeping is left to callers so that section
/// detection can take fractional refinement steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: SystemParams,
    scheme: Scheme,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Stepper {
    /// Starts a stepper at `start`.
    pub fn new(
        params: &SystemParams,
        start: &PhaseState<f64>,
        scheme: Scheme,
    ) -> Result<Self, IntegratorError> {
        if start.dim() != params.m {
            return Err(DynamicsError::DimensionMismatch { expected: params.m, got: start.dim() }
                .into());
        }
        if start.u.iter().chain(start.v.iter()).any(|x| !x.is_finite()) {
            return Err(DynamicsError::NonFinite.into());
        }
        Ok(Stepper {
            params: params.clone(),
            scheme,
            u: start.u.clone(),
            v: start.v.clone(),
        })
    }

    /// Current positions.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Current momenta.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Current state as a [`PhaseState`].
    pub fn state(&self) -> PhaseState<f64> {
        PhaseState { u: self.u.clone(), v: self.v.clone() }
    }

    /// Replaces the current state.
    pub fn set_state(&mut self, state: &PhaseState<f64>) -> Result<(), IntegratorError> {
        if state.dim() != self.params.m {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.params.m,
                got: state.dim(),
            }
            .into());
        }
        self.u.copy_from_slice(&state.u);
        self.v.copy_from_slice(&state.v);
        Ok(())
    }

    /// Negates all momenta (time reversal).
    pub fn negate_v(&mut self) {
        for x in &mut self.v {
            *x = -*x;
        }
    }

    /// Acceleration `-dV/du_i = -mu_i u_i + eps S^(k-1) u_i` added into `acc`.
    fn accelerations(&self, acc: &mut [f64]) {
        let s: f64 = self.u.iter().map(|x| x * x).sum();
        let s_pow = s.powi(self.params.k as i32 - 1);
        let eps = self.params.epsilon_f64();
        for i in 0..self.params.m {
            acc[i] = (eps * s_pow - self.params.mu[i]) * self.u[i];
        }
    }

    fn verlet(&mut self, dt: f64, acc: &mut [f64]) {
        self.accelerations(acc);
        let half = 0.5 * dt;
        for i in 0..self.params.m {
            self.v[i] += half * acc[i];
        }
        for i in 0..self.params.m {
            self.u[i] += dt * self.v[i];
        }
        self.accelerations(acc);
        for i in 0..self.params.m {
            self.v[i] += half * acc[i];
        }
    }

    /// Advances one step of size `dt` (negative `dt` integrates backward).
    /// `t_now` is only used to report the failure time on escape.
    pub fn step(&mut self, dt: f64, t_now: f64) -> Result<(), IntegratorError> {
        let mut acc = vec![0.0; self.params.m];
        match self.scheme {
            Scheme::StormerVerlet2 => self.verlet(dt, &mut acc),
            Scheme::Yoshida4 => {
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                let w0 = 1.0 - 2.0 * w1;
                self.verlet(w1 * dt, &mut acc);
                self.verlet(w0 * dt, &mut acc);
                self.verlet(w1 * dt, &mut acc);
            }
        }
        for x in self.u.iter().chain(self.v.iter()) {
            if x.is_nan() {
                return Err(IntegratorError::NonFiniteState { t: t_now });
            }
            if x.abs() > ESCAPE_THRESHOLD {
                return Err(IntegratorError::Escape { t: t_now });
            }
        }
        Ok(())
    }
}

/// Integrates `start` for `cfg.t_end` and returns the recorded samples.
///
/// Samples land at step indices `0, stride, 2*stride, ...` plus the final
/// step; sample times are computed as `index * dt` (not accumulated) so the
/// time grid is exact to roundoff.
pub fn integrate(
    params: &SystemParams,
    start: &PhaseState<f64>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegratorError> {
    let mut stepper = Stepper::new(params, start, cfg.scheme)?;
    let n_steps = cfg.step_count();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut energies = Vec::new();
    let mut record = |step: u64, st: &Stepper| -> Result<(), IntegratorError> {
        let t = step as f64 * cfg.dt;
        let state = st.state();
        let h = hamiltonian_value(params, &state)?;
        times.push(t);
        states.push(state);
        energies.push(h);
        Ok(())
    };
    record(0, &stepper)?;
    for step in 1..=n_steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        stepper.step(cfg.dt, t_prev)?;
        if step % cfg.record_stride as u64 == 0 || step == n_steps {
            record(step, &stepper)?;
        }
    }
    Ok(Trajectory { params: params.clone(), times, states, energies })
}

/// Maximum absolute deviation of the sampled energies from the initial one.
pub fn energy_drift(traj: &Trajectory) -> Result<f64, IntegratorError> {
    let first = *traj.energies.first().ok_or(IntegratorError::EmptyTrajectory)?;
    Ok(traj
        .energies
        .iter()
        .map(|e| (e - first).abs())
        .fold(0.0, f64::max))
}

/// Time-reversibility probe: integrates `n` steps forward, negates `v`,
/// integrates `n` steps more, negates `v` again, and returns the max-norm
/// distance to the starting state.
pub fn reverse_check(
    params: &SystemParams,
    start: &PhaseState<f64>,
    cfg: &IntegratorConfig,
) -> Result<f64, IntegratorError> {
    let mut stepper = Stepper::new(params, start, cfg.scheme)?;
    let n_steps = cfg.step_count();
    for step in 0..n_steps {
        stepper.step(cfg.dt, step as f64 * cfg.dt)?;
    }
    stepper.negate_v();
    for step in 0..n_steps {
        stepper.step(cfg.dt, step as f64 * cfg.dt)?;
    }
    stepper.negate_v();
    let dist = start
        .u
        .iter()
        .zip(stepper.u())
        .chain(start.v.iter().zip(stepper.v()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{eval_observable, poisson_bracket, Observable};

    fn params(k: u32, epsilon: i32, mu: &[f64]) -> SystemParams {
        SystemParams::new(k, epsilon, mu.to_vec()).unwrap()
    }

    fn state(u: &[f64], v: &[f64]) -> PhaseState<f64> {
        PhaseState::new(u.to_vec(), v.to_vec()).unwrap()
    }

    fn cfg(dt: f64, t_end: f64, scheme: Scheme, stride: usize) -> IntegratorConfig {
        IntegratorConfig::new(dt, t_end, scheme, stride).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0, Scheme::StormerVerlet2, 1).is_err());
        assert!(IntegratorConfig::new(1e-3, 1e-4, Scheme::StormerVerlet2, 1).is_err());
        assert!(IntegratorConfig::new(1e-3, 1.0, Scheme::StormerVerlet2, 0).is_err());
        assert!(IntegratorConfig::new(1e-3, 1.0, Scheme::Yoshida4, 10).is_ok());
    }

    #[test]
    fn confining_oscillation_has_tiny_drift() {
        let p = params(2, -1, &[1.0]);
        let x = state(&[0.1], &[0.0]);
        let traj = integrate(&p, &x, &cfg(1e-3, 100.0, Scheme::StormerVerlet2, 100)).unwrap();
        assert!(energy_drift(&traj).unwrap() <= 1e-8);
        // Bounded: the confining potential keeps |u| near its start.
        assert!(traj.states.iter().all(|s| s.u[0].abs() < 1.0));
    }

    #[test]
    fn equilibrium_stays_put() {
        let p = params(2, 1, &[1.0, 2.0]);
        let origin = state(&[0.0, 0.0], &[0.0, 0.0]);
        let traj = integrate(&p, &origin, &cfg(1e-2, 1.0, Scheme::StormerVerlet2, 10)).unwrap();
        assert!(traj
            .states
            .iter()
            .all(|s| s.u.iter().chain(s.v.iter()).all(|&x| x == 0.0)));
        assert_eq!(energy_drift(&traj).unwrap(), 0.0);
    }

    #[test]
    fn long_confining_run_keeps_energy() {
        // eps = -1, k = 3 is confining; start on the h = 0.85 energy level.
        let p = params(3, -1, &[0.1, 1.0]);
        let (u2, v2) = (0.8, 0.2);
        let s = u2 * u2;
        let rest = 0.5 * (v2 * v2 + p.mu[1] * u2 * u2) + s.powi(3) / 6.0;
        let v1 = (2.0 * (0.85 - rest)).sqrt();
        let x = state(&[0.0, u2], &[v1, v2]);
        let traj = integrate(&p, &x, &cfg(1e-3, 1000.0, Scheme::StormerVerlet2, 1000)).unwrap();
        assert!((traj.energies[0] - 0.85).abs() < 1e-12);
        assert!(energy_drift(&traj).unwrap() <= 1e-6);
    }

    #[test]
    fn drift_detects_injected_perturbation() {
        let p = params(2, -1, &[1.0, 2.0]);
        let x = state(&[0.1, 0.2], &[0.0, 0.1]);
        let mut traj = integrate(&p, &x, &cfg(1e-3, 1.0, Scheme::StormerVerlet2, 100)).unwrap();
        let base = energy_drift(&traj).unwrap();
        let idx = traj.states.len() / 2;
        traj.states[idx].u[0] += 0.5;
        traj.energies[idx] = hamiltonian_value(&p, &traj.states[idx]).unwrap();
        let bumped = energy_drift(&traj).unwrap();
        let injected = (traj.energies[idx] - traj.energies[0]).abs();
        assert!(bumped >= injected && injected > base);
    }

    #[test]
    fn reversal_returns_to_start() {
        let p = params(2, -1, &[1.0]);
        let x = state(&[0.1], &[0.0]);
        // 10^4 steps of dt = 1e-3.
        let d = reverse_check(&p, &x, &cfg(1e-3, 10.0, Scheme::StormerVerlet2, 1)).unwrap();
        assert!(d <= 1e-9, "reverse distance {d}");
        // Larger steps accumulate more roundoff but stay reversible.
        let d = reverse_check(&p, &x, &cfg(1e-2, 100.0, Scheme::StormerVerlet2, 1)).unwrap();
        assert!(d <= 1e-7, "reverse distance {d}");
        // Equilibrium is exactly reversible.
        let origin = state(&[0.0], &[0.0]);
        let d = reverse_check(&p, &origin, &cfg(1e-3, 1.0, Scheme::StormerVerlet2, 1)).unwrap();
        assert_eq!(d, 0.0);
        // The Yoshida composition is symmetric, hence also reversible.
        let d = reverse_check(&p, &x, &cfg(1e-3, 10.0, Scheme::Yoshida4, 1)).unwrap();
        assert!(d <= 1e-9, "yoshida reverse distance {d}");
    }

    #[test]
    fn one_step_jacobian_has_unit_determinant() {
        // m = 1: finite-difference Jacobian of a single Verlet step.
        let p = params(2, 1, &[1.3]);
        let x0 = state(&[0.4], &[-0.3]);
        let h = 1e-5;
        let map = |u: f64, v: f64| {
            let mut st = Stepper::new(&p, &state(&[u], &[v]), Scheme::StormerVerlet2).unwrap();
            st.step(1e-2, 0.0).unwrap();
            (st.u()[0], st.v()[0])
        };
        let (up_u, vp_u) = map(x0.u[0] + h, x0.v[0]);
        let (um_u, vm_u) = map(x0.u[0] - h, x0.v[0]);
        let (up_v, vp_v) = map(x0.u[0], x0.v[0] + h);
        let (um_v, vm_v) = map(x0.u[0], x0.v[0] - h);
        let a = (up_u - um_u) / (2.0 * h);
        let b = (up_v - um_v) / (2.0 * h);
        let c = (vp_u - vm_u) / (2.0 * h);
        let d = (vp_v - vm_v) / (2.0 * h);
        let det = a * d - b * c;
        assert!((det - 1.0).abs() <= 1e-8, "det = {det}");
    }

    #[test]
    fn integrable_configurations_conserve_their_integrals() {
        // k = 2, distinct mu: H and the matching deformation variant.
        for (epsilon, obs) in [
            (1, Observable::DeformationCorrected(-0.37)),
            (-1, Observable::Deformation(-0.37)),
        ] {
            let p = params(2, epsilon, &[1.0, 2.0]);
            let x = state(&[0.3, -0.2], &[0.1, 0.4]);
            let traj = integrate(&p, &x, &cfg(1e-3, 20.0, Scheme::StormerVerlet2, 10)).unwrap();
            assert!(energy_drift(&traj).unwrap() <= 1e-6);
            let first = eval_observable(&obs, &p, &traj.states[0]).unwrap();
            let drift = traj
                .states
                .iter()
                .map(|s| (eval_observable(&obs, &p, s).unwrap() - first).abs())
                .fold(0.0, f64::max);
            assert!(drift <= 1e-6, "deformation drift {drift} for eps={epsilon}");
        }

        // k >= 3 with equal mu: the angular family.
        let p = params(3, -1, &[0.7, 0.7, 0.7]);
        let x = state(&[0.3, -0.2, 0.5], &[0.1, 0.4, -0.3]);
        let traj = integrate(&p, &x, &cfg(1e-3, 20.0, Scheme::StormerVerlet2, 10)).unwrap();
        for i in 1..3 {
            let obs = Observable::Angular(i);
            let first = eval_observable(&obs, &p, &traj.states[0]).unwrap();
            let drift = traj
                .states
                .iter()
                .map(|s| (eval_observable(&obs, &p, s).unwrap() - first).abs())
                .fold(0.0, f64::max);
            assert!(drift <= 1e-6, "angular({i}) drift {drift}");
        }
    }

    #[test]
    fn rotated_integrals_transport_across_the_sign_flip() {
        // A quantity conserved for eps = +1, evaluated at (-i u, i v), is
        // conserved along eps = -1 trajectories.
        let p = params(2, -1, &[1.0, 2.0]);
        let x = state(&[0.4, -0.1], &[0.2, 0.3]);
        let traj = integrate(&p, &x, &cfg(1e-3, 10.0, Scheme::StormerVerlet2, 20)).unwrap();
        let obs = Observable::DeformationCorrected(0.25);
        let first = eval_observable(&obs, &p, &traj.states[0].complex_rotated()).unwrap();
        assert!(first.im.abs() <= 1e-12);
        for s in &traj.states {
            let val = eval_observable(&obs, &p, &s.complex_rotated()).unwrap();
            assert!((val - first).norm() <= 1e-6);
        }
    }

    #[test]
    fn no_secular_drift_growth() {
        let p = params(3, -1, &[0.5, 1.0]);
        let x = state(&[0.2, 0.4], &[0.3, -0.1]);
        let short = integrate(&p, &x, &cfg(1e-3, 20.0, Scheme::StormerVerlet2, 100)).unwrap();
        let long = integrate(&p, &x, &cfg(1e-3, 200.0, Scheme::StormerVerlet2, 100)).unwrap();
        let (ds, dl) = (energy_drift(&short).unwrap(), energy_drift(&long).unwrap());
        assert!(dl <= 10.0 * ds.max(1e-14), "short {ds}, long {dl}");
    }

    #[test]
    fn yoshida_is_higher_order_than_verlet() {
        let p = params(2, -1, &[1.0, 3.0]);
        let x = state(&[0.5, 0.2], &[0.1, -0.4]);
        let dv = energy_drift(&integrate(&p, &x, &cfg(1e-2, 10.0, Scheme::StormerVerlet2, 10)).unwrap())
            .unwrap();
        let dy =
            energy_drift(&integrate(&p, &x, &cfg(1e-2, 10.0, Scheme::Yoshida4, 10)).unwrap()).unwrap();
        assert!(dy < dv / 10.0, "verlet drift {dv}, yoshida drift {dy}");
    }

    #[test]
    fn escape_reports_last_finite_time() {
        // eps = +1 with a strong start escapes in finite time.
        let p = params(3, 1, &[1.0]);
        let x = state(&[3.0], &[3.0]);
        match integrate(&p, &x, &cfg(1e-3, 10.0, Scheme::StormerVerlet2, 1)) {
            Err(IntegratorError::Escape { t }) => {
                assert!(t >= 0.0 && t < 10.0);
            }
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_shape_and_determinism() {
        let p = params(2, 1, &[1.0, 2.0]);
        let x = state(&[0.1, 0.2], &[0.0, 0.1]);
        let traj = integrate(&p, &x, &cfg(1e-3, 0.01, Scheme::StormerVerlet2, 5)).unwrap();
        let csv = traj.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,u1,u2,v1,v2,H");
        // Steps 0, 5, 10 recorded.
        assert_eq!(csv.lines().count(), 1 + 3);
        for line in lines {
            assert_eq!(line.split(',').count(), 6);
        }
        let again = integrate(&p, &x, &cfg(1e-3, 0.01, Scheme::StormerVerlet2, 5)).unwrap();
        assert_eq!(csv, again.to_csv_string());
    }

    #[test]
    fn trajectory_energy_matches_flow_derivative_convention() {
        // dI/dt = {H, I}: along a short trajectory the finite-difference
        // rate of Angular(1) matches the bracket value at the midpoint.
        let p = params(2, 1, &[1.0, 2.0]);
        let x = state(&[0.3, 0.5], &[0.2, -0.1]);
        let dt = 1e-4;
        let traj = integrate(&p, &x, &cfg(dt, 2.0 * dt, Scheme::Yoshida4, 1)).unwrap();
        let obs = Observable::Angular(1);
        let i0 = eval_observable(&obs, &p, &traj.states[0]).unwrap();
        let i2 = eval_observable(&obs, &p, &traj.states[2]).unwrap();
        let rate = (i2 - i0) / (2.0 * dt);
        let bracket =
            poisson_bracket(&Observable::Hamiltonian, &obs, &p, &traj.states[1]).unwrap();
        assert!((rate - bracket).abs() <= 1e-6, "rate {rate}, bracket {bracket}");
    }
}
