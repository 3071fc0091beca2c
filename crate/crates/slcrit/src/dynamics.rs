//! The oscillator family, its conserved quantities, and Poisson-bracket machinery.
//!
//! The family of Hamiltonian systems treated by this crate is
//!
//! ```text
//! u'_i = v_i,
//! v'_i = -mu_i u_i + eps (u_1^2 + ... + u_m^2)^(k-1) u_i,      i = 1..m,
//! ```
//!
//! with Hamiltonian
//!
//! ```text
//! H = 1/2 sum_i (v_i^2 + mu_i u_i^2) - eps/(2k) (sum_j u_j^2)^k,
//! ```
//!
//! where `k >= 2` is an integer, `eps` is a sign, and `mu` is a vector of m
//! real frequency parameters. These systems arise as the critical equations
//! for optimizing sums of Dirichlet eigenvalues of a Sturm–Liouville operator
//! over a sphere of potentials (see the `optimize` module, which recovers
//! them numerically).
//!
//! Beyond the Hamiltonian itself this module evaluates two families of
//! closed-form quantities:
//!
//! * `Angular(i)`: the angular-momentum-like combinations
//!   `I_i = u_1 v_{i+1} - u_{i+1} v_1`, conserved whenever all `mu_i` agree;
//! * `Deformation(s)`: a rational function of a spectral parameter `s` built
//!   from the resolvent weights `delta_j = 1/(s - mu_j)`. Writing
//!   `S = sum u_j^2`, `A = S * sum_j delta_j u_j^2`,
//!   `B = (sum_j delta_j u_j^2)(sum_j delta_j v_j^2)`,
//!   `C = (sum_j delta_j u_j v_j)^2` and
//!   `D = 2 sum_j delta_j (v_j^2 + mu_j u_j^2)`, the variant
//!   [`Observable::Deformation`] evaluates `A - B + C + D` and the variant
//!   [`Observable::DeformationCorrected`] evaluates `A - B + C - D`.
//!
//! For `k = 2` exactly one of the two sign choices commutes with `H`: the
//! `+D` form is conserved along `eps = -1` flows and the `-D` form along
//! `eps = +1` flows. Both variants are kept because the `+D` convention is
//! the interface form used elsewhere in this crate; the symbolic derivation
//! of the sign is recorded in `docs/deformation-integral.md`, and the
//! conservation tests in the `integrator` module exercise both.
//!
//! All evaluation is generic over a [`Scalar`] that is either `f64` or
//! `Complex64`. The complex case exists because the substitution
//! `(u, v) -> (-i u, i v)` maps conserved quantities of the `eps = +1` system
//! to conserved quantities of the `eps = -1` system (and flips the `D` sign
//! convention above); see [`PhaseState::complex_rotated`].
//!
//! Poisson brackets follow the convention
//!
//! ```text
//! {F, G} = sum_i (dF/dv_i * dG/du_i - dF/du_i * dG/dv_i),
//! ```
//!
//! under which `dI/dt = {H, I}` along the flow. Gradients of the built-in
//! observables are hand-coded analytic formulas rather than automatic or
//! numerical differentiation, so the finite-difference cross-checks in the
//! tests are genuinely independent.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors produced by dimension checks, parameter validation, and observable
/// evaluation.
#[derive(Debug, Error)]
pub enum DynamicsError {
    /// A state vector length does not match the system dimension.
    #[error("dimension mismatch: params have m = {expected}, state has {got} components")]
    DimensionMismatch { expected: usize, got: usize },
    /// Parameter vector violates a structural invariant.
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
    /// `Angular(i)` requires `m >= 2` and `1 <= i <= m - 1`.
    #[error("angular observable index {index} out of range for m = {m} (need 1 <= i <= m-1)")]
    AngularIndex { index: usize, m: usize },
    /// `Deformation(s)` requires `s` distinct from every frequency.
    #[error("spectral parameter s = {s} coincides with mu[{index}]; resolvent weight is infinite")]
    SpectralPole { s: f64, index: usize },
    /// A state entry is NaN or infinite.
    #[error("non-finite entry in phase state")]
    NonFinite,
    /// Rank computation was asked for zero observables or zero states.
    #[error("independence rank requires at least one observable and one state")]
    EmptyRankInput,
}

/// Scalar field over which states and observables are evaluated: `f64` for
/// real dynamics, `Complex64` for the rotated frames used to transport
/// conserved quantities between the two signs of `eps`.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + Zero
    + One
{
    /// Embeds a real number into the scalar field.
    fn from_re(x: f64) -> Self;
    /// Integer power with non-negative exponent.
    fn powu(self, n: u32) -> Self;
    /// Modulus (absolute value for `f64`, complex norm for `Complex64`).
    fn modulus(self) -> f64;
    /// True when every component is finite.
    fn is_finite_scalar(self) -> bool;
}

impl Scalar for f64 {
    fn from_re(x: f64) -> Self {
        x
    }
    fn powu(self, n: u32) -> Self {
        self.powi(n as i32)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_scalar(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn powu(self, n: u32) -> Self {
        self.powi(n as i32)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_scalar(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Parameters `(m, k, eps, mu)` of one member of the oscillator family.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Degrees of freedom, `>= 1`.
    pub m: usize,
    /// Nonlinearity exponent, `>= 2`.
    pub k: u32,
    /// Sign of the coupling term, `-1` or `+1`.
    pub epsilon: i32,
    /// Frequency parameters, exactly `m` finite entries.
    pub mu: Vec<f64>,
}

impl SystemParams {
    /// Builds parameters with `m` inferred from `mu.len()`, validating all
    /// structural invariants.
    pub fn new(k: u32, epsilon: i32, mu: Vec<f64>) -> Result<Self, DynamicsError> {
        if mu.is_empty() {
            return Err(DynamicsError::InvalidParams(
                "mu must have at least one entry (m >= 1)".into(),
            ));
        }
        if k < 2 {
            return Err(DynamicsError::InvalidParams(format!(
                "nonlinearity exponent k = {k} must be >= 2"
            )));
        }
        if epsilon != 1 && epsilon != -1 {
            return Err(DynamicsError::InvalidParams(format!(
                "epsilon = {epsilon} must be -1 or +1"
            )));
        }
        if let Some(bad) = mu.iter().find(|x| !x.is_finite()) {
            return Err(DynamicsError::InvalidParams(format!(
                "non-finite frequency parameter {bad}"
            )));
        }
        Ok(SystemParams { m: mu.len(), k, epsilon, mu })
    }

    /// The sign `eps` as a float.
    pub fn epsilon_f64(&self) -> f64 {
        f64::from(self.epsilon)
    }
}

/// A point `(u, v)` of phase space over scalar field `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState<T> {
    /// Positions.
    pub u: Vec<T>,
    /// Momenta.
    pub v: Vec<T>,
}

impl<T: Scalar> PhaseState<T> {
    /// Builds a state, checking that `u` and `v` have equal length and all
    /// entries are finite.
    pub fn new(u: Vec<T>, v: Vec<T>) -> Result<Self, DynamicsError> {
        if u.len() != v.len() {
            return Err(DynamicsError::DimensionMismatch { expected: u.len(), got: v.len() });
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite_scalar()) {
            return Err(DynamicsError::NonFinite);
        }
        Ok(PhaseState { u, v })
    }

    /// Number of degrees of freedom this state carries.
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    fn check_dims(&self, params: &SystemParams) -> Result<(), DynamicsError> {
        if self.dim() == params.m {
            Ok(())
        } else {
            Err(DynamicsError::DimensionMismatch { expected: params.m, got: self.dim() })
        }
    }
}

impl PhaseState<f64> {
    /// Applies the substitution `(u, v) -> (-i u, i v)`.
    ///
    /// A quantity conserved by the `eps = +1` flow, evaluated at the rotated
    /// state, is conserved by the `eps = -1` flow with the same `(k, mu)`,
    /// and vice versa. In particular the rotated value of
    /// [`Observable::DeformationCorrected`] equals the unrotated value of
    /// [`Observable::Deformation`].
    pub fn complex_rotated(&self) -> PhaseState<Complex64> {
        let mi = Complex64::new(0.0, -1.0);
        let pi = Complex64::new(0.0, 1.0);
        PhaseState {
            u: self.u.iter().map(|&x| mi * x).collect(),
            v: self.v.iter().map(|&x| pi * x).collect(),
        }
    }
}

/// Closed-form observables with built-in analytic gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// The Hamiltonian `H`.
    Hamiltonian,
    /// `I_i = u_1 v_{i+1} - u_{i+1} v_1`, for `1 <= i <= m - 1`.
    Angular(usize),
    /// The spectral-deformation combination `A - B + C + D` at spectral
    /// parameter `s` (see the module docs for the four terms). Conserved for
    /// `k = 2`, `eps = -1`.
    Deformation(f64),
    /// The sign-corrected combination `A - B + C - D`, conserved for `k = 2`,
    /// `eps = +1`. Obtained by requiring the Poisson bracket with `H` to
    /// vanish identically; see `docs/deformation-integral.md`.
    DeformationCorrected(f64),
}

/// Gradient of a scalar observable with respect to `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    /// Partial derivatives with respect to `u_i`.
    pub du: Vec<T>,
    /// Partial derivatives with respect to `v_i`.
    pub dv: Vec<T>,
}

/// A scalar function of phase space exposing an analytic gradient, the unit
/// of currency of [`poisson_bracket`] and [`independence_rank`].
///
/// Implemented by [`Observable`]; user-defined quantities can participate via
/// [`CustomObservable`].
pub trait Differentiable<T: Scalar> {
    /// Evaluates the observable.
    fn value(&self, params: &SystemParams, state: &PhaseState<T>) -> Result<T, DynamicsError>;
    /// Evaluates the gradient with respect to `(u, v)`.
    fn gradient(
        &self,
        params: &SystemParams,
        state: &PhaseState<T>,
    ) -> Result<Gradient<T>, DynamicsError>;
}

/// Wraps a pair of closures (value, gradient) as a [`Differentiable`], for
/// bracket tests against user-supplied quantities.
pub struct CustomObservable<V, G> {
    /// Value callback.
    pub value_fn: V,
    /// Gradient callback.
    pub gradient_fn: G,
}

impl<T, V, G> Differentiable<T> for CustomObservable<V, G>
where
    T: Scalar,
    V: Fn(&SystemParams, &PhaseState<T>) -> Result<T, DynamicsError>,
    G: Fn(&SystemParams, &PhaseState<T>) -> Result<Gradient<T>, DynamicsError>,
{
    fn value(&self, params: &SystemParams, state: &PhaseState<T>) -> Result<T, DynamicsError> {
        (self.value_fn)(params, state)
    }
    fn gradient(
        &self,
        params: &SystemParams,
        state: &PhaseState<T>,
    ) -> Result<Gradient<T>, DynamicsError> {
        (self.gradient_fn)(params, state)
    }
}

/// Sum of squared positions `S = sum_j u_j^2`.
fn radial_sq<T: Scalar>(state: &PhaseState<T>) -> T {
    let mut s = T::zero();
    for &x in &state.u {
        s += x * x;
    }
    s
}

/// Evaluates `H = 1/2 sum_i (v_i^2 + mu_i u_i^2) - eps/(2k) (sum_j u_j^2)^k`.
pub fn hamiltonian_value<T: Scalar>(
    params: &SystemParams,
    state: &PhaseState<T>,
) -> Result<T, DynamicsError> {
    state.check_dims(params)?;
    let mut quad = T::zero();
    for i in 0..params.m {
        quad += state.v[i] * state.v[i] + T::from_re(params.mu[i]) * state.u[i] * state.u[i];
    }
    let s = radial_sq(state);
    let coupling = T::from_re(params.epsilon_f64() / (2.0 * f64::from(params.k)));
    Ok(T::from_re(0.5) * quad - coupling * s.powu(params.k))
}

/// Evaluates the right-hand side `(u', v')` of the equations of motion:
/// `u'_i = v_i`, `v'_i = -mu_i u_i + eps S^(k-1) u_i`.
pub fn vector_field<T: Scalar>(
    params: &SystemParams,
    state: &PhaseState<T>,
) -> Result<PhaseState<T>, DynamicsError> {
    state.check_dims(params)?;
    let s_pow = radial_sq(state).powu(params.k - 1);
    let eps = T::from_re(params.epsilon_f64());
    let du: Vec<T> = state.v.clone();
    let dv: Vec<T> = (0..params.m)
        .map(|i| eps * s_pow * state.u[i] - T::from_re(params.mu[i]) * state.u[i])
        .collect();
    Ok(PhaseState { u: du, v: dv })
}

/// Resolvent weights `delta_j = 1/(s - mu_j)`, or a pole error if `s` hits a
/// frequency.
fn resolvent_weights(params: &SystemParams, s: f64) -> Result<Vec<f64>, DynamicsError> {
    params
        .mu
        .iter()
        .enumerate()
        .map(|(j, &mu)| {
            if s == mu {
                Err(DynamicsError::SpectralPole { s, index: j })
            } else {
                Ok(1.0 / (s - mu))
            }
        })
        .collect()
}

/// The four building blocks of the deformation observable at weights `delta`:
/// `(A, B, C, D)` per the module docs.
fn deformation_terms<T: Scalar>(
    params: &SystemParams,
    state: &PhaseState<T>,
    delta: &[f64],
) -> (T, T, T, T) {
    let s = radial_sq(state);
    let mut p = T::zero(); // sum delta_j u_j^2
    let mut q = T::zero(); // sum delta_j v_j^2
    let mut r = T::zero(); // sum delta_j u_j v_j
    let mut d = T::zero(); // sum delta_j (v_j^2 + mu_j u_j^2)
    for j in 0..params.m {
        let dj = T::from_re(delta[j]);
        let (uj, vj) = (state.u[j], state.v[j]);
        p += dj * uj * uj;
        q += dj * vj * vj;
        r += dj * uj * vj;
        d += dj * (vj * vj + T::from_re(params.mu[j]) * uj * uj);
    }
    (s * p, p * q, r * r, T::from_re(2.0) * d)
}

/// Evaluates a built-in observable at a state.
pub fn eval_observable<T: Scalar>(
    obs: &Observable,
    params: &SystemParams,
    state: &PhaseState<T>,
) -> Result<T, DynamicsError> {
    state.check_dims(params)?;
    match *obs {
        Observable::Hamiltonian => hamiltonian_value(params, state),
        Observable::Angular(i) => {
            check_angular_index(i, params.m)?;
            Ok(state.u[0] * state.v[i] - state.u[i] * state.v[0])
        }
        Observable::Deformation(s) => {
            let delta = resolvent_weights(params, s)?;
            let (a, b, c, d) = deformation_terms(params, state, &delta);
            Ok(a - b + c + d)
        }
        Observable::DeformationCorrected(s) => {
            let delta = resolvent_weights(params, s)?;
            let (a, b, c, d) = deformation_terms(params, state, &delta);
            Ok(a - b + c - d)
        }
    }
}

fn check_angular_index(i: usize, m: usize) -> Result<(), DynamicsError> {
    if m >= 2 && (1..m).contains(&i) {
        Ok(())
    } else {
        Err(DynamicsError::AngularIndex { index: i, m })
    }
}

impl<T: Scalar> Differentiable<T> for Observable {
    fn value(&self, params: &SystemParams, state: &PhaseState<T>) -> Result<T, DynamicsError> {
        eval_observable(self, params, state)
    }

    fn gradient(
        &self,
        params: &SystemParams,
        state: &PhaseState<T>,
    ) -> Result<Gradient<T>, DynamicsError> {
        state.check_dims(params)?;
        let m = params.m;
        let mut du = vec![T::zero(); m];
        let mut dv = vec![T::zero(); m];
        match *self {
            Observable::Hamiltonian => {
                // dH/du_i = mu_i u_i - eps S^(k-1) u_i, dH/dv_i = v_i.
                let s_pow = radial_sq(state).powu(params.k - 1);
                let eps = T::from_re(params.epsilon_f64());
                for i in 0..m {
                    du[i] = T::from_re(params.mu[i]) * state.u[i] - eps * s_pow * state.u[i];
                    dv[i] = state.v[i];
                }
            }
            Observable::Angular(i) => {
                check_angular_index(i, m)?;
                du[0] = state.v[i];
                du[i] = -state.v[0];
                dv[0] = -state.u[i];
                dv[i] = state.u[0];
            }
            Observable::Deformation(s) | Observable::DeformationCorrected(s) => {
                let delta = resolvent_weights(params, s)?;
                // d_sign = +1 for the +D convention, -1 for the corrected -D.
                let d_sign = if matches!(self, Observable::Deformation(_)) {
                    T::one()
                } else {
                    -T::one()
                };
                let big_s = radial_sq(state);
                let mut p = T::zero();
                let mut q = T::zero();
                let mut r = T::zero();
                for j in 0..m {
                    let dj = T::from_re(delta[j]);
                    p += dj * state.u[j] * state.u[j];
                    q += dj * state.v[j] * state.v[j];
                    r += dj * state.u[j] * state.v[j];
                }
                let two = T::from_re(2.0);
                let four = T::from_re(4.0);
                for i in 0..m {
                    let di = T::from_re(delta[i]);
                    let (ui, vi) = (state.u[i], state.v[i]);
                    // A = S p: dA/du_i = 2 u_i p + 2 S d_i u_i.
                    let a_u = two * ui * p + two * big_s * di * ui;
                    // B = p q: dB/du_i = 2 d_i u_i q, dB/dv_i = 2 p d_i v_i.
                    let b_u = two * di * ui * q;
                    let b_v = two * p * di * vi;
                    // C = r^2: dC/du_i = 2 r d_i v_i, dC/dv_i = 2 r d_i u_i.
                    let c_u = two * r * di * vi;
                    let c_v = two * r * di * ui;
                    // D = 2 sum d_j (v_j^2 + mu_j u_j^2).
                    let d_u = four * di * T::from_re(params.mu[i]) * ui;
                    let d_v = four * di * vi;
                    du[i] = a_u - b_u + c_u + d_sign * d_u;
                    dv[i] = -b_v + c_v + d_sign * d_v;
                }
            }
        }
        Ok(Gradient { du, dv })
    }
}

/// Poisson bracket `{F, G} = sum_i (dF/dv_i dG/du_i - dF/du_i dG/dv_i)`.
///
/// With this sign convention, `dI/dt = {H, I}` along solutions.
pub fn poisson_bracket<T: Scalar>(
    f: &dyn Differentiable<T>,
    g: &dyn Differentiable<T>,
    params: &SystemParams,
    state: &PhaseState<T>,
) -> Result<T, DynamicsError> {
    let gf = f.gradient(params, state)?;
    let gg = g.gradient(params, state)?;
    let mut sum = T::zero();
    for i in 0..params.m {
        sum += gf.dv[i] * gg.du[i] - gf.du[i] * gg.dv[i];
    }
    Ok(sum)
}

/// Maximum, over the supplied states, of the numerical rank of the stacked
/// gradient matrix of the observables.
///
/// Rank is counted as the number of singular values exceeding `1e-10` times
/// the largest singular value at that state.
pub fn independence_rank(
    observables: &[&dyn Differentiable<f64>],
    params: &SystemParams,
    states: &[PhaseState<f64>],
) -> Result<usize, DynamicsError> {
    if observables.is_empty() || states.is_empty() {
        return Err(DynamicsError::EmptyRankInput);
    }
    let mut best = 0usize;
    for state in states {
        let mut rows = Vec::with_capacity(observables.len());
        for obs in observables {
            let g = obs.gradient(params, state)?;
            let mut row = g.du;
            row.extend(g.dv);
            rows.push(row);
        }
        let mat = nalgebra::DMatrix::from_fn(rows.len(), 2 * params.m, |r, c| rows[r][c]);
        let svd = mat.svd(false, false);
        let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = if max_sv == 0.0 {
            0
        } else {
            svd.singular_values.iter().filter(|&&sv| sv > 1e-10 * max_sv).count()
        };
        best = best.max(rank);
    }
    Ok(best)
}
