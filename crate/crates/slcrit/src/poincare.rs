//! Poincaré cross sections on fixed energy levels for two-degree systems.
//!
//! The section plane is `u1 = 0` with coordinates `(u2, v2)`; a point of the
//! plane lifts to the energy level `H = h` by solving for `v1 >= 0`:
//!
//! ```text
//! v1 = sqrt(2h - v2^2 - mu2 u2^2 + (eps/k) u2^(2k)).
//! ```
//!
//! [`compute_section`] integrates each lifted seed with the Verlet scheme,
//! detects sign changes of `u1` in the configured direction, and refines each
//! crossing by bisection on the step fraction until `|u1| <= 1e-9`. Crossing
//! energies stay within `1e-6` of `h` thanks to symplectic drift control;
//! both residual maxima are reported on the output for checking.
//!
//! [`estimate_mle`] quantifies chaos with the two-trajectory Benettin
//! method: a companion trajectory offset by `1e-8` is renormalized back to
//! that distance once per time unit, and the mean log stretching rate
//! estimates the largest Lyapunov exponent. Regular orbits report values at
//! the estimator noise floor; chaotic zones report well above it.
//!
//! Rendering produces a CSV (`seed,idx,u2,v2,t`) and an 800x800 SVG scatter
//! with `v2` horizontal and `u2` vertical, one color per seed. Repeated runs
//! with identical configuration produce byte-identical files.

use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::dynamics::{hamiltonian_value, PhaseState, SystemParams};
use crate::integrator::{fmt_f64, IntegratorError, Scheme, Stepper};

/// Errors from section computation and rendering.
#[derive(Debug, Error)]
pub enum PoincareError {
    /// Sections are defined for two-degree systems only.
    #[error("poincare sections require m = 2, got m = {0}")]
    UnsupportedDimension(usize),
    /// No seed admitted a real lift to the energy level.
    #[error("no seed lifts to the requested energy level")]
    NoLiftableSeed,
    /// Rendering was asked for an empty point set.
    #[error("point set is empty")]
    EmptyPointSet,
    /// Configuration violates an invariant.
    #[error("invalid section configuration: {0}")]
    InvalidConfig(String),
    /// Escape or state failure during integration.
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    /// Invalid state or parameters reported by the dynamics layer.
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    /// File output failure.
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which `u1` sign changes to record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// `u1` passing from negative to positive.
    Increasing,
    /// `u1` passing from positive to negative.
    Decreasing,
    /// Both directions.
    Both,
}

/// Configuration of a section run.
#[derive(Debug, Clone)]
pub struct SectionConfig {
    /// Energy level `h`.
    pub h: f64,
    /// Seed pairs `(u2, v2)` on the section plane.
    pub grid: Vec<(f64, f64)>,
    /// Crossings to record per seed.
    pub crossings_per_seed: usize,
    /// Crossing direction filter.
    pub direction: CrossingDirection,
    /// Integration step size.
    pub dt: f64,
    /// Safety budget: integration steps allowed per seed before giving up.
    pub max_steps_per_seed: u64,
}

impl SectionConfig {
    /// Builds a config with the default per-seed step budget.
    pub fn new(
        h: f64,
        grid: Vec<(f64, f64)>,
        crossings_per_seed: usize,
        direction: CrossingDirection,
        dt: f64,
    ) -> Result<Self, PoincareError> {
        if grid.is_empty() {
            return Err(PoincareError::InvalidConfig("seed grid is empty".into()));
        }
        if crossings_per_seed == 0 {
            return Err(PoincareError::InvalidConfig("crossings_per_seed must be >= 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PoincareError::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        Ok(SectionConfig {
            h,
            grid,
            crossings_per_seed,
            direction,
            dt,
            max_steps_per_seed: 20_000_000,
        })
    }

    /// Overrides the per-seed step budget.
    pub fn with_max_steps(mut self, max_steps_per_seed: u64) -> Self {
        self.max_steps_per_seed = max_steps_per_seed;
        self
    }
}

/// One refined section crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPoint {
    /// Index of the seed in the configured grid.
    pub seed_id: usize,
    /// Crossing counter within the seed, starting at 0.
    pub crossing_index: usize,
    /// Section coordinate `u2` at the crossing.
    pub u2: f64,
    /// Section coordinate `v2` at the crossing.
    pub v2: f64,
    /// Crossing time.
    pub t: f64,
}

/// All crossings of a section run, ordered by seed then crossing index.
#[derive(Debug, Clone)]
pub struct SectionPointSet {
    /// System the section belongs to.
    pub params: SystemParams,
    /// Energy level.
    pub h: f64,
    /// Refined crossings.
    pub points: Vec<SectionPoint>,
    /// Full phase-space state at each crossing, parallel to `points`
    /// (kept so conserved quantities can be evaluated exactly where the
    /// trajectory met the section).
    pub crossing_states: Vec<PhaseState<f64>>,
    /// Seeds whose radicand was negative (no lift); no points emitted.
    pub skipped_seeds: Vec<usize>,
    /// Seeds stopped before reaching the requested crossing count
    /// (escape or step budget).
    pub truncated_seeds: Vec<usize>,
    /// Largest `|u1|` left after refinement over all points.
    pub max_u1_residual: f64,
    /// Largest `|H - h|` over all points.
    pub max_energy_residual: f64,
}

/// Solves the energy relation for `v1 >= 0` at `u1 = 0`; `None` when the
/// radicand is negative (the seed lies outside the energy level).
pub fn lift_to_energy_level(
    params: &SystemParams,
    h: f64,
    u2: f64,
    v2: f64,
) -> Result<Option<PhaseState<f64>>, PoincareError> {
    if params.m != 2 {
        return Err(PoincareError::UnsupportedDimension(params.m));
    }
    let radicand = 2.0 * h - v2 * v2 - params.mu[1] * u2 * u2
        + params.epsilon_f64() / f64::from(params.k) * u2.powi(2 * params.k as i32);
    if radicand < 0.0 {
        return Ok(None);
    }
    Ok(Some(PhaseState { u: vec![0.0, u2], v: vec![radicand.sqrt(), v2] }))
}

/// A uniform seed line for figure reproduction: `n` seeds with `v2 = 0` and
/// `u2` spanning the admissible range of the energy level (the largest `u2`
/// with non-negative radicand, probed by bisection and then shrunk slightly
/// to stay strictly inside).
pub fn default_seed_grid(
    params: &SystemParams,
    h: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>, PoincareError> {
    if params.m != 2 {
        return Err(PoincareError::UnsupportedDimension(params.m));
    }
    if n == 0 || h <= 0.0 {
        return Err(PoincareError::InvalidConfig(
            "seed grid needs n >= 1 and h > 0".into(),
        ));
    }
    let admits = |u2: f64| -> bool {
        matches!(lift_to_energy_level(params, h, u2, 0.0), Ok(Some(_)))
    };
    // Find an inadmissible upper bracket (cap the scan for anti-confining
    // potentials where the level is unbounded).
    let cap = 10.0 * (2.0 * h / params.mu[1].abs().max(0.1)).sqrt().max(1.0);
    let mut hi = 1.0;
    while admits(hi) && hi < cap {
        hi *= 2.0;
    }
    let u2_max = if admits(hi) {
        hi
    } else {
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if admits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok((0..n)
        .map(|i| ((i as f64 + 0.5) / n as f64 * 0.97 * u2_max, 0.0))
        .collect())
}

/// Minimum bisection iterations per crossing.
const MIN_BISECTIONS: usize = 12;
/// Refinement target for `|u1|` (one order tighter than the guarantee).
const U1_TARGET: f64 = 1e-10;

/// Bisection on the sub-step size from `prev` (where `u1` has the opposite
/// sign of one full `dt` step) until `|u1|` is within the target.
/// Returns the refined state and the sub-step.
fn refine_crossing(
    params: &SystemParams,
    prev: &PhaseState<f64>,
    dt: f64,
) -> Result<(PhaseState<f64>, f64), PoincareError> {
    let mut stepper = Stepper::new(params, prev, Scheme::StormerVerlet2)?;
    let mut lo = 0.0f64;
    let mut hi = dt;
    let sign_lo = prev.u[0] < 0.0;
    let mut best: Option<(PhaseState<f64>, f64)> = None;
    for iter in 0..80 {
        let mid = 0.5 * (lo + hi);
        stepper.set_state(prev)?;
        stepper.step(mid, 0.0)?;
        let u1 = stepper.u()[0];
        if best.as_ref().map_or(true, |(s, _)| u1.abs() < s.u[0].abs()) {
            best = Some((stepper.state(), mid));
        }
        if u1.abs() <= U1_TARGET && iter + 1 >= MIN_BISECTIONS {
            break;
        }
        if (u1 < 0.0) == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (state, alpha) = best.expect("bisection always evaluates at least once");
    Ok((state, alpha))
}

/// Integrates every seed of the config and collects refined crossings.
///
/// Seeds are independent and processed in grid order; points are emitted
/// ordered by seed then crossing index, so output bytes are reproducible.
pub fn compute_section(
    params: &SystemParams,
    cfg: &SectionConfig,
) -> Result<SectionPointSet, PoincareError> {
    if params.m != 2 {
        return Err(PoincareError::UnsupportedDimension(params.m));
    }
    let mut points = Vec::new();
    let mut crossing_states = Vec::new();
    let mut skipped = Vec::new();
    let mut truncated = Vec::new();
    let mut max_u1 = 0.0f64;
    let mut max_de = 0.0f64;
    let mut any_lift = false;

    for (seed_id, &(u2, v2)) in cfg.grid.iter().enumerate() {
        let Some(start) = lift_to_energy_level(params, cfg.h, u2, v2)? else {
            skipped.push(seed_id);
            continue;
        };
        any_lift = true;
        let mut stepper = Stepper::new(params, &start, Scheme::StormerVerlet2)?;
        let mut prev = start.clone();
        let mut found = 0usize;
        let mut step: u64 = 0;
        let mut stopped = false;
        while found < cfg.crossings_per_seed {
            if step >= cfg.max_steps_per_seed {
                stopped = true;
                break;
            }
            prev.u.copy_from_slice(stepper.u());
            prev.v.copy_from_slice(stepper.v());
            let t_prev = step as f64 * cfg.dt;
            if stepper.step(cfg.dt, t_prev).is_err() {
                stopped = true;
                break;
            }
            step += 1;
            let new_u1 = stepper.u()[0];
            let crossed = prev.u[0] * new_u1 < 0.0 || (new_u1 == 0.0 && prev.u[0] != 0.0);
            if crossed {
                let upward = new_u1 > prev.u[0];
                let wanted = match cfg.direction {
                    CrossingDirection::Increasing => upward,
                    CrossingDirection::Decreasing => !upward,
                    CrossingDirection::Both => true,
                };
                if wanted {
                    let (refined, alpha) = refine_crossing(params, &prev, cfg.dt)?;
                    let energy = hamiltonian_value(params, &refined)?;
                    max_u1 = max_u1.max(refined.u[0].abs());
                    max_de = max_de.max((energy - cfg.h).abs());
                    points.push(SectionPoint {
                        seed_id,
                        crossing_index: found,
                        u2: refined.u[1],
                        v2: refined.v[1],
                        t: t_prev + alpha,
                    });
                    crossing_states.push(refined);
                    found += 1;
                }
            }
        }
        if stopped {
            truncated.push(seed_id);
        }
    }
    if !any_lift {
        return Err(PoincareError::NoLiftableSeed);
    }
    Ok(SectionPointSet {
        params: params.clone(),
        h: cfg.h,
        points,
        crossing_states,
        skipped_seeds: skipped,
        truncated_seeds: truncated,
        max_u1_residual: max_u1,
        max_energy_residual: max_de,
    })
}

/// Per-seed relative spread of an observable over the seed's section points.
///
/// The observable is evaluated on the stored crossing states; the result
/// maps each seed with points to `std / max(mean |value|, 1e-300)`.
pub fn seed_integral_spread(
    set: &SectionPointSet,
    obs: &crate::dynamics::Observable,
) -> Result<Vec<(usize, f64)>, PoincareError> {
    let mut out = Vec::new();
    let seed_ids: std::collections::BTreeSet<usize> =
        set.points.iter().map(|p| p.seed_id).collect();
    for seed in seed_ids {
        let mut values = Vec::new();
        for (p, state) in set.points.iter().zip(&set.crossing_states) {
            if p.seed_id == seed {
                values.push(crate::dynamics::eval_observable(obs, &set.params, state)?);
            }
        }
        if values.is_empty() {
            continue;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = values.iter().map(|v| v.abs()).sum::<f64>() / n;
        out.push((seed, var.sqrt() / scale.max(1e-300)));
    }
    Ok(out)
}

/// Benettin two-trajectory estimate of the largest Lyapunov exponent.
///
/// The companion starts offset by `1e-8` (spread evenly over all phase-space
/// components) and is renormalized to that distance once per time unit; the
/// estimate is the mean log stretching per unit time.
pub fn estimate_mle(
    params: &SystemParams,
    start: &PhaseState<f64>,
    t_end: f64,
    dt: f64,
) -> Result<f64, PoincareError> {
    if !(dt > 0.0 && dt.is_finite() && t_end >= 1.0) {
        return Err(PoincareError::InvalidConfig(format!(
            "need dt > 0 and t_end >= 1 (renorm interval), got dt = {dt}, t_end = {t_end}"
        )));
    }
    const D0: f64 = 1e-8;
    let m = params.m;
    let per_component = D0 / (2.0 * m as f64).sqrt();
    let mut offset_state = start.clone();
    for x in offset_state.u.iter_mut().chain(offset_state.v.iter_mut()) {
        *x += per_component;
    }
    let mut reference = Stepper::new(params, start, Scheme::StormerVerlet2)?;
    let mut companion = Stepper::new(params, &offset_state, Scheme::StormerVerlet2)?;
    let steps_per_window = (1.0 / dt).round().max(1.0) as u64;
    let windows = t_end.floor() as u64;
    let mut sum_log = 0.0;
    let mut t = 0.0;
    for _ in 0..windows {
        for _ in 0..steps_per_window {
            reference.step(dt, t)?;
            companion.step(dt, t)?;
            t += dt;
        }
        let mut dist_sq = 0.0;
        for i in 0..m {
            dist_sq += (reference.u()[i] - companion.u()[i]).powi(2)
                + (reference.v()[i] - companion.v()[i]).powi(2);
        }
        let dist = dist_sq.sqrt().max(1e-300);
        sum_log += (dist / D0).ln();
        // Pull the companion back to distance D0 along the current
        // separation direction.
        let scale = D0 / dist;
        let mut rescaled = reference.state();
        for i in 0..m {
            rescaled.u[i] += (companion.u()[i] - reference.u()[i]) * scale;
            rescaled.v[i] += (companion.v()[i] - reference.v()[i]) * scale;
        }
        companion.set_state(&rescaled)?;
    }
    Ok(sum_log / windows as f64)
}

/// Writes the point set as CSV with header `seed,idx,u2,v2,t`.
pub fn write_section_csv<W: Write>(set: &SectionPointSet, out: &mut W) -> io::Result<()> {
    writeln!(out, "seed,idx,u2,v2,t")?;
    for p in &set.points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.seed_id,
            p.crossing_index,
            fmt_f64(p.u2),
            fmt_f64(p.v2),
            fmt_f64(p.t)
        )?;
    }
    Ok(())
}

/// Distinct per-seed colors (cycled past twelve seeds).
const SEED_COLORS: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
];

/// Writes an 800x800 SVG scatter of the point set: `v2` on the horizontal
/// axis, `u2` on the vertical axis, one color per seed.
pub fn write_section_svg<W: Write>(set: &SectionPointSet, out: &mut W) -> Result<(), PoincareError> {
    if set.points.is_empty() {
        return Err(PoincareError::EmptyPointSet);
    }
    let (mut v2_min, mut v2_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut u2_min, mut u2_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &set.points {
        v2_min = v2_min.min(p.v2);
        v2_max = v2_max.max(p.v2);
        u2_min = u2_min.min(p.u2);
        u2_max = u2_max.max(p.u2);
    }
    let pad = |min: &mut f64, max: &mut f64| {
        let span = (*max - *min).max(1e-9);
        *min -= 0.05 * span;
        *max += 0.05 * span;
    };
    pad(&mut v2_min, &mut v2_max);
    pad(&mut u2_min, &mut u2_max);
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 60.0;
    let inner = SIZE - 2.0 * MARGIN;
    let x_of = |v2: f64| MARGIN + (v2 - v2_min) / (v2_max - v2_min) * inner;
    let y_of = |u2: f64| SIZE - MARGIN - (u2 - u2_min) / (u2_max - u2_min) * inner;

    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" \
         viewBox=\"0 0 800 800\">"
    )?;
    writeln!(out, "<rect width=\"800\" height=\"800\" fill=\"white\"/>")?;
    writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{inner}\" height=\"{inner}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
    )?;
    writeln!(
        out,
        "<text x=\"400\" y=\"790\" text-anchor=\"middle\" font-size=\"20\">v2</text>"
    )?;
    writeln!(
        out,
        "<text x=\"20\" y=\"400\" text-anchor=\"middle\" font-size=\"20\" \
         transform=\"rotate(-90 20 400)\">u2</text>"
    )?;
    writeln!(
        out,
        "<text x=\"400\" y=\"35\" text-anchor=\"middle\" font-size=\"16\">section u1 = 0, \
         h = {:.6}, k = {}, eps = {:+}</text>",
        set.h, set.params.k, set.params.epsilon
    )?;
    for p in &set.points {
        writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.5\" fill=\"{}\"/>",
            x_of(p.v2),
            y_of(p.u2),
            SEED_COLORS[p.seed_id % SEED_COLORS.len()]
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}

/// Writes `base.csv` and `base.svg` next to each other.
pub fn render(set: &SectionPointSet, base: &Path) -> Result<(), PoincareError> {
    if set.points.is_empty() {
        return Err(PoincareError::EmptyPointSet);
    }
    let mut csv = std::fs::File::create(base.with_extension("csv"))?;
    write_section_csv(set, &mut csv)?;
    let mut svg = std::fs::File::create(base.with_extension("svg"))?;
    write_section_svg(set, &mut svg)?;
    Ok(())
}
