//! Dirichlet Sturm–Liouville eigenvalues on `[0, 1]`.
//!
//! Solves `-psi'' + q psi = lambda psi` with `psi(0) = psi(1) = 0` for a
//! potential sampled on a uniform grid. The primary path is scaled
//! Prüfer-angle shooting: with `omega = sqrt(max(lambda, 1))` the phase
//! obeys
//!
//! ```text
//! phi' = omega cos^2(phi) + ((lambda - q)/omega) sin^2(phi),  phi(0) = 0,
//! ```
//!
//! and `lambda_i` is the unique root of `phi(1; lambda) = i pi` (the phase
//! at 1 is strictly increasing in `lambda`). Each root is bracketed and
//! bisected; no spurious modes can appear because the phase counts nodes
//! exactly.
//!
//! A dense second-order finite-difference eigensolver
//! ([`finite_difference_eigs`], tridiagonal Sturm-count bisection) is kept
//! alongside as an independent cross-check; it is the method whose
//! second-order grid convergence the tests measure.
//!
//! Eigenfunctions are recovered by integrating the ODE from the left with
//! RK4, then normalized to unit `L^2` norm (composite trapezoid) with
//! positive derivative at 0.

use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Errors from grid construction, eigensolving, and potential file I/O.
#[derive(Debug, Error)]
pub enum SpectralError {
    /// Grid resolution below the supported minimum.
    #[error("grid resolution n = {0} is below the minimum of 16")]
    GridTooCoarse(usize),
    /// A potential sample is NaN or infinite.
    #[error("potential contains a non-finite value")]
    NonFiniteValue,
    /// Norm exponent outside `(1, inf)`.
    #[error("norm exponent p = {0} must be finite and > 1")]
    BadExponent(f64),
    /// Eigenvalue indices are 1-based.
    #[error("eigenvalue index must be >= 1")]
    BadIndex,
    /// Bisection failed to settle (signals a pathological grid).
    #[error("eigenvalue {index} did not converge after {iterations} bisections")]
    NoConvergence { index: usize, iterations: usize },
    /// Two grids that must share a resolution do not.
    #[error("grid resolution mismatch: expected n = {expected}, got n = {got}")]
    GridMismatch { expected: usize, got: usize },
    /// Malformed potential CSV.
    #[error("potential csv: {0}")]
    CsvFormat(String),
    /// File failure.
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A potential sampled at `n + 1` uniform nodes on `[0, 1]`, together with
/// the exponent `p` used for its norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    /// Samples `q(0), q(1/n), ..., q(1)`.
    pub values: Vec<f64>,
    /// Number of grid intervals (so `values.len() == n + 1`).
    pub n: usize,
    /// Exponent for `lp_norm`, in `(1, inf)`.
    pub p: f64,
}

impl PotentialGrid {
    /// Wraps samples, inferring `n` from the length.
    pub fn new(values: Vec<f64>, p: f64) -> Result<Self, SpectralError> {
        if values.len() < 17 {
            return Err(SpectralError::GridTooCoarse(values.len().saturating_sub(1)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFiniteValue);
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(SpectralError::BadExponent(p));
        }
        let n = values.len() - 1;
        Ok(PotentialGrid { values, n, p })
    }

    /// Samples a function at the grid nodes.
    pub fn from_fn(n: usize, p: f64, f: impl Fn(f64) -> f64) -> Result<Self, SpectralError> {
        let values = (0..=n).map(|j| f(j as f64 / n as f64)).collect();
        Self::new(values, p)
    }

    /// The constant potential `q = c`.
    pub fn constant(n: usize, p: f64, c: f64) -> Result<Self, SpectralError> {
        Self::new(vec![c; n + 1], p)
    }

    /// The zero potential.
    pub fn zero(n: usize, p: f64) -> Result<Self, SpectralError> {
        Self::constant(n, p, 0.0)
    }

    /// Grid spacing `1/n`.
    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node abscissa `j/n`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    /// `(int |q|^p dx)^(1/p)` by composite trapezoid.
    pub fn lp_norm(&self) -> f64 {
        let powered: Vec<f64> = self.values.iter().map(|v| v.abs().powf(self.p)).collect();
        trapezoid(&powered, self.dx()).powf(1.0 / self.p)
    }
}

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (interior + 0.5 * (values[0] + values[values.len() - 1]))
}

/// An eigenvalue with its normalized eigenfunction on the grid.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// 1-based eigenvalue index.
    pub index: usize,
    /// The eigenvalue.
    pub lambda: f64,
    /// Samples of the eigenfunction at the grid nodes, unit `L^2` norm,
    /// positive derivative at 0.
    pub eigenfunction: Vec<f64>,
}

impl EigenPair {
    /// Number of interior sign changes (exact zeros are skipped; the final
    /// node is excluded because shooting leaves a stray residual there).
    pub fn node_count(&self) -> usize {
        let interior = &self.eigenfunction[1..self.eigenfunction.len() - 1];
        let mut last_sign = 0i8;
        let mut changes = 0;
        for &v in interior {
            let s = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                continue;
            };
            if last_sign != 0 && s != last_sign {
                changes += 1;
            }
            last_sign = s;
        }
        changes
    }
}

/// Linear interpolation of the potential inside interval `j`.
fn q_at(q: &PotentialGrid, j: usize, frac: f64) -> f64 {
    q.values[j] + frac * (q.values[j + 1] - q.values[j])
}

/// Integrates the scaled Prüfer phase across the grid and returns
/// `phi(1; lambda)`.
pub(crate) fn pruefer_phase(q: &PotentialGrid, lambda: f64) -> f64 {
    let omega = lambda.max(1.0).sqrt();
    let h = q.dx();
    let mut phi = 0.0f64;
    let rhs = |qx: f64, phi: f64| -> f64 {
        let (s, c) = phi.sin_cos();
        omega * c * c + (lambda - qx) / omega * s * s
    };
    for j in 0..q.n {
        let q0 = q_at(q, j, 0.0);
        let qm = q_at(q, j, 0.5);
        let q1 = q_at(q, j, 1.0);
        let k1 = rhs(q0, phi);
        let k2 = rhs(qm, phi + 0.5 * h * k1);
        let k3 = rhs(qm, phi + 0.5 * h * k2);
        let k4 = rhs(q1, phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    phi
}

const MAX_BISECTIONS: usize = 200;
/// Eigenvalue bisection tolerance, relative to the eigenvalue scale.
const LAMBDA_REL_TOL: f64 = 1e-13;

/// Solves `phi(1; lambda) = i pi` by bisection for one index.
fn shoot_eigenvalue(q: &PotentialGrid, index: usize) -> Result<f64, SpectralError> {
    let q_min = q.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let q_max = q.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let target = index as f64 * std::f64::consts::PI;
    let mut lo = q_min;
    let mut hi = (index * index) as f64 * std::f64::consts::PI.powi(2) + q_max + 1.0;
    // Widen if the discrete phase falls slightly short at the analytic
    // upper bound.
    let mut widen = 0;
    while pruefer_phase(q, hi) <= target {
        hi += (index * index) as f64 * 10.0 + 10.0;
        widen += 1;
        if widen > 50 {
            return Err(SpectralError::NoConvergence { index, iterations: widen });
        }
    }
    debug_assert!(pruefer_phase(q, lo) < target);
    for iter in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if pruefer_phase(q, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= LAMBDA_REL_TOL * lo.abs().max(hi.abs()).max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
        if iter + 1 == MAX_BISECTIONS {
            return Err(SpectralError::NoConvergence { index, iterations: MAX_BISECTIONS });
        }
    }
    unreachable!("bisection loop always returns");
}

/// Eigenvalue solve warm-started from a nearby guess (used by the
/// optimizer where successive iterates move each eigenvalue only a
/// little). The bracket grows geometrically around the hint until it
/// straddles the phase target, then ordinary bisection takes over; a bad
/// hint degrades to the cold-start bracket.
pub(crate) fn shoot_eigenvalue_hinted(
    q: &PotentialGrid,
    index: usize,
    hint: f64,
) -> Result<f64, SpectralError> {
    let target = index as f64 * std::f64::consts::PI;
    let mut radius = 1e-3 * hint.abs().max(1.0);
    let (mut lo, mut hi) = (hint - radius, hint + radius);
    let mut grown = 0;
    while !(pruefer_phase(q, lo) < target && pruefer_phase(q, hi) >= target) {
        radius *= 4.0;
        lo = hint - radius;
        hi = hint + radius;
        grown += 1;
        if grown > 20 {
            return shoot_eigenvalue(q, index);
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if pruefer_phase(q, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= LAMBDA_REL_TOL * lo.abs().max(hi.abs()).max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(SpectralError::NoConvergence { index, iterations: MAX_BISECTIONS })
}

/// First `m` Dirichlet eigenvalues, strictly increasing.
pub fn dirichlet_eigs(q: &PotentialGrid, m: usize) -> Result<Vec<f64>, SpectralError> {
    if m == 0 {
        return Err(SpectralError::BadIndex);
    }
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        out.push(shoot_eigenvalue(q, i)?);
    }
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Sum of the first `m` Dirichlet eigenvalues.
pub fn eigen_sum(q: &PotentialGrid, m: usize) -> Result<f64, SpectralError> {
    Ok(dirichlet_eigs(q, m)?.iter().sum())
}

/// The `i`-th eigenvalue with its normalized eigenfunction.
pub fn eigenfunction(q: &PotentialGrid, i: usize) -> Result<EigenPair, SpectralError> {
    if i == 0 {
        return Err(SpectralError::BadIndex);
    }
    let lambda = shoot_eigenvalue(q, i)?;
    Ok(eigenfunction_from_lambda(q, i, lambda))
}

/// Eigenfunction recovery for an already-located eigenvalue (used by the
/// optimizer, which tracks eigenvalues across iterations itself).
pub(crate) fn eigenfunction_from_lambda(q: &PotentialGrid, i: usize, lambda: f64) -> EigenPair {
    // RK4 on (psi, psi') with psi'' = (q - lambda) psi, psi(0) = 0,
    // psi'(0) = 1.
    let h = q.dx();
    let mut psi = vec![0.0f64; q.n + 1];
    let mut y = (0.0f64, 1.0f64);
    let deriv = |qx: f64, y: (f64, f64)| -> (f64, f64) { (y.1, (qx - lambda) * y.0) };
    for j in 0..q.n {
        let q0 = q_at(q, j, 0.0);
        let qm = q_at(q, j, 0.5);
        let q1 = q_at(q, j, 1.0);
        let k1 = deriv(q0, y);
        let k2 = deriv(qm, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
        let k3 = deriv(qm, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
        let k4 = deriv(q1, (y.0 + h * k3.0, y.1 + h * k3.1));
        y = (
            y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        psi[j + 1] = y.0;
    }
    let sq: Vec<f64> = psi.iter().map(|v| v * v).collect();
    let norm = trapezoid(&sq, h).sqrt();
    for v in &mut psi {
        *v /= norm;
    }
    EigenPair { index: i, lambda, eigenfunction: psi }
}

/// Finite-difference (centered two-sided) derivative of `lambda_m` in
/// direction `xi` against the analytic value `int xi E_m^2 dx`.
///
/// Returns `((lambda_m(q + h xi) - lambda_m(q - h xi)) / 2h, int xi E_m^2)`.
pub fn frechet_check(
    q: &PotentialGrid,
    m: usize,
    xi: &PotentialGrid,
    h: f64,
) -> Result<(f64, f64), SpectralError> {
    if xi.n != q.n {
        return Err(SpectralError::GridMismatch { expected: q.n, got: xi.n });
    }
    if m == 0 {
        return Err(SpectralError::BadIndex);
    }
    let shifted = |sign: f64| -> Result<f64, SpectralError> {
        let values: Vec<f64> =
            q.values.iter().zip(&xi.values).map(|(a, b)| a + sign * h * b).collect();
        shoot_eigenvalue(&PotentialGrid::new(values, q.p)?, m)
    };
    let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * h);
    let pair = eigenfunction(q, m)?;
    let integrand: Vec<f64> = xi
        .values
        .iter()
        .zip(&pair.eigenfunction)
        .map(|(xi_j, e_j)| xi_j * e_j * e_j)
        .collect();
    let analytic = trapezoid(&integrand, q.dx());
    Ok((fd, analytic))
}

/// Independent oracle: eigenvalues of the standard second-order
/// finite-difference discretization (tridiagonal matrix over the interior
/// nodes), located by Sturm-count bisection.
pub fn finite_difference_eigs(q: &PotentialGrid, m: usize) -> Result<Vec<f64>, SpectralError> {
    if m == 0 {
        return Err(SpectralError::BadIndex);
    }
    let n = q.n;
    let h = q.dx();
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..n).map(|j| 2.0 * inv_h2 + q.values[j]).collect();
    let off = -inv_h2;
    // Number of eigenvalues of the tridiagonal matrix strictly below x,
    // via the sign count of the LDL^T pivots.
    let count_below = |x: f64| -> usize {
        let mut pivot = diag[0] - x;
        let mut count = usize::from(pivot < 0.0);
        for &d in &diag[1..] {
            let denom = if pivot == 0.0 { f64::MIN_POSITIVE } else { pivot };
            pivot = d - x - off * off / denom;
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    };
    let d_min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let d_max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut lo = d_min - 2.0 * inv_h2;
        let mut hi = d_max + 2.0 * inv_h2;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) >= i {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * lo.abs().max(hi.abs()).max(1.0) {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Reads a potential from CSV with header `x,q`; the abscissas must be the
/// uniform nodes `j/n` in order.
pub fn read_potential_csv<R: BufRead>(reader: R, p: f64) -> Result<PotentialGrid, SpectralError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| SpectralError::CsvFormat("empty file".into()))??;
    if header.trim() != "x,q" {
        return Err(SpectralError::CsvFormat(format!(
            "expected header 'x,q', got '{}'",
            header.trim()
        )));
    }
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(xf), Some(qf), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(SpectralError::CsvFormat(format!(
                "row {}: expected two fields",
                lineno + 2
            )));
        };
        let x: f64 = xf
            .trim()
            .parse()
            .map_err(|_| SpectralError::CsvFormat(format!("row {}: bad x '{xf}'", lineno + 2)))?;
        let qv: f64 = qf
            .trim()
            .parse()
            .map_err(|_| SpectralError::CsvFormat(format!("row {}: bad q '{qf}'", lineno + 2)))?;
        xs.push(x);
        qs.push(qv);
    }
    if xs.len() < 2 {
        return Err(SpectralError::CsvFormat("need at least two rows".into()));
    }
    let n = xs.len() - 1;
    for (j, &x) in xs.iter().enumerate() {
        let expected = j as f64 / n as f64;
        if (x - expected).abs() > 1e-8 {
            return Err(SpectralError::CsvFormat(format!(
                "non-uniform abscissa at row {}: x = {x}, expected {expected}",
                j + 2
            )));
        }
    }
    PotentialGrid::new(qs, p)
}

/// Writes a potential as CSV with header `x,q`.
pub fn write_potential_csv<W: Write>(q: &PotentialGrid, out: &mut W) -> io::Result<()> {
    writeln!(out, "x,q")?;
    for (j, v) in q.values.iter().enumerate() {
        writeln!(out, "{},{}", crate::integrator::fmt_f64(q.x(j)), crate::integrator::fmt_f64(*v))?;
    }
    Ok(())
}

/// Writes eigenvalues as CSV with header `i,lambda` (1-based indices).
pub fn write_eigs_csv<W: Write>(eigs: &[f64], out: &mut W) -> io::Result<()> {
    writeln!(out, "i,lambda")?;
    for (i, lam) in eigs.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, crate::integrator::fmt_f64(*lam))?;
    }
    Ok(())
}
