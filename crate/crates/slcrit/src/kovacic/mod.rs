//! Exact rational-function algebra and the degree-two branch of Kovacic's
//! algorithm for `x'' = r(z)x`.
//!
//! The question answered here: does the equation admit a solution
//! `exp(int omega)` whose logarithmic derivative `omega` is algebraic of
//! degree two over the rationals? The decision runs in three steps on exact
//! arithmetic: per-pole integer sets, degree candidates `d`, and an exact
//! linear solve for a monic auxiliary polynomial `P`. An empty candidate
//! list or an unsolvable system certifies impossibility, which is the fact
//! the integrability classifier consumes for the zero-frequency parameter
//! branch.
//!
//! The other solvable branches (rational or degree-one logarithmic
//! derivative, finite groups) are only screened by [`necessary_conditions`];
//! they are never search-completed because the classifier needs just the
//! degree-two refutation together with that screen.
//!
//! Pole locations must be rational: the sets are computed from exact
//! factorization of the denominator over the rationals, and instances with
//! irrational or complex poles are rejected with an explicit error. Every
//! instance produced by [`anve_r`] has its only pole at `z = 0`.

mod parse;
mod poly;
mod ratfn;

pub use parse::ParseError;
pub use poly::RatPoly;
pub use ratfn::{RatFn, RatFnError};

use crate::exact::{format_ratio, int, ratio, sqrt_exact, ExactRatio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KovacicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    RatFn(#[from] RatFnError),
    #[error("nonlinearity exponent must be at least 3, got {0}")]
    ExponentTooSmall(u32),
    #[error("the zero function has no pole data to compute sets from")]
    ZeroFunction,
    #[error("a candidate set element exceeds the machine integer range")]
    SetElementOverflow,
}

/// Parses an expression such as `-3/(32*z^3)` into canonical reduced form.
pub fn parse_ratfn(text: &str) -> Result<RatFn, KovacicError> {
    Ok(parse::parse(text)?)
}

/// Normal-form coefficient of `y'' = a1*y' + a2*y` after the substitution
/// removing the first-order term: `r = a1^2/4 - a1'/2 + a2`, so the equation
/// becomes `x'' = r*x`.
pub fn normal_form(a1: &RatFn, a2: &RatFn) -> RatFn {
    let quarter = RatFn::constant(ratio(1, 4));
    let half = RatFn::constant(ratio(1, 2));
    &(&(&(a1 * a1) * &quarter) - &(&a1.derivative() * &half)) + a2
}

/// First-order form of the variational equation attached to nonlinearity
/// exponent `k` along the single-mode solution: coefficients `(a1, a2)` of
/// `y'' = a1*y' + a2*y` with `a1 = -3/(2z)` and
/// `a2 = k(2z-1)/(8(k-1)^2 z^3)`.
pub fn anve_coefficients(k: u32) -> Result<(RatFn, RatFn), KovacicError> {
    if k < 3 {
        return Err(KovacicError::ExponentTooSmall(k));
    }
    let a1 = RatFn::new(
        RatPoly::constant(int(-3)),
        RatPoly::monomial(int(2), 1),
    )?;
    let kk = int(k as i64);
    let scale = int(8) * (&kk - int(1)).pow(2);
    let a2 = RatFn::new(
        RatPoly::new(vec![-&kk, &kk * int(2)]).scale(&scale.recip()),
        RatPoly::monomial(ExactRatio::one(), 3),
    )?;
    Ok((a1, a2))
}

/// Reduced coefficient `r(z)` of the variational equation for exponent `k`:
/// `r = -((k-3)(3k-1)/(16(k-1)^2 z^2) + k/(8(k-1)^2 z^3))`, the normal form
/// of [`anve_coefficients`].
pub fn anve_r(k: u32) -> Result<RatFn, KovacicError> {
    if k < 3 {
        return Err(KovacicError::ExponentTooSmall(k));
    }
    let kk = int(k as i64);
    let denom_scale = int(16) * (&kk - int(1)).pow(2);
    let lin = (&kk - int(3)) * (&kk * int(3) - int(1));
    let num = RatPoly::new(vec![&kk * int(-2), -lin]).scale(&denom_scale.recip());
    Ok(RatFn::new(num, RatPoly::monomial(ExactRatio::one(), 3))?)
}

/// The three solvable-solution shapes subject to necessary conditions:
/// rational logarithmic derivative (i), algebraic of degree two (ii), all
/// solutions algebraic (iii).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseType {
    One,
    Two,
    Three,
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseType::One => write!(f, "(i)"),
            CaseType::Two => write!(f, "(ii)"),
            CaseType::Three => write!(f, "(iii)"),
        }
    }
}

/// Which solvable shapes survive the pole-order screen.
///
/// Type (i): every pole has even order or order 1, and the order at
/// infinity is even or greater than 2. Type (ii): at least one pole of odd
/// order greater than 2, or of order 2. Type (iii): pole orders at most 2,
/// order at infinity at least 2, and on the partial fractions
/// `sum a_i/(z-c_i)^2 + sum b_j/(z-d_j)` each `sqrt(1+4a_i)` is rational,
/// `sum b_j = 0`, and `sqrt(1+4D)` is rational for `D = sum a_i + sum b_j`.
pub fn necessary_conditions(r: &RatFn) -> Result<BTreeSet<CaseType>, KovacicError> {
    let poles = r.poles()?;
    let inf = r.infinity_order();
    let mut out = BTreeSet::new();

    let inf_even_or_above_two = match inf {
        None => true,
        Some(o) => o % 2 == 0 || o > 2,
    };
    if poles.iter().all(|(_, o)| *o % 2 == 0 || *o == 1) && inf_even_or_above_two {
        out.insert(CaseType::One);
    }

    if poles.iter().any(|(_, o)| (*o % 2 == 1 && *o > 2) || *o == 2) {
        out.insert(CaseType::Two);
    }

    let inf_at_least_two = match inf {
        None => true,
        Some(o) => o >= 2,
    };
    if poles.iter().all(|(_, o)| *o <= 2) && inf_at_least_two {
        let mut alphas = Vec::new();
        let mut beta_sum = ExactRatio::zero();
        for (c, o) in &poles {
            if *o == 2 {
                alphas.push(r.laurent_coeff(c, 2, 2));
            }
            beta_sum += r.laurent_coeff(c, *o, 1);
        }
        let rational_alpha = alphas
            .iter()
            .all(|a| sqrt_exact(&(int(1) + a * int(4))).is_some());
        let delta: ExactRatio = alphas.iter().sum::<ExactRatio>() + &beta_sum;
        if rational_alpha
            && beta_sum.is_zero()
            && sqrt_exact(&(int(1) + delta * int(4))).is_some()
        {
            out.insert(CaseType::Three);
        }
    }
    Ok(out)
}

/// Integer set attached to one finite pole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleSet {
    pub location: ExactRatio,
    pub order: usize,
    pub set: BTreeSet<i64>,
}

/// Step-1 output: one integer set per finite pole, ascending by location,
/// plus the set at infinity and the order there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ESets {
    pub finite: Vec<PoleSet>,
    pub infinity_order: i64,
    pub infinity: BTreeSet<i64>,
}

/// Set for an order-2 pole (or order-2 behavior at infinity) with
/// quadratic coefficient `b`: `{2 + l*sqrt(1+4b) : l = 0, +-2}`
/// intersected with the integers, decided exactly.
fn order_two_set(b: &ExactRatio) -> Result<BTreeSet<i64>, KovacicError> {
    let mut set = BTreeSet::new();
    set.insert(2);
    if let Some(s) = sqrt_exact(&(int(1) + b * int(4))) {
        for cand in [int(2) + &s * int(2), int(2) - &s * int(2)] {
            if cand.is_integer() {
                let v = cand
                    .to_integer()
                    .to_i64()
                    .ok_or(KovacicError::SetElementOverflow)?;
                set.insert(v);
            }
        }
    }
    Ok(set)
}

/// Step 1: the integer sets at every pole and at infinity.
///
/// Order 1 gives `{4}`; order 2 applies the quadratic-coefficient formula;
/// order above 2 gives the order itself. At infinity: order above 2 gives
/// `{0, 2, 4}`, order exactly 2 applies the same formula to the `z^-2`
/// coefficient, order below 2 gives the order itself.
pub fn e_sets(r: &RatFn) -> Result<ESets, KovacicError> {
    if r.is_zero() {
        return Err(KovacicError::ZeroFunction);
    }
    let mut finite = Vec::new();
    for (c, order) in r.poles()? {
        let set = match order {
            1 => BTreeSet::from([4]),
            2 => order_two_set(&r.laurent_coeff(&c, 2, 2))?,
            o => BTreeSet::from([o as i64]),
        };
        finite.push(PoleSet { location: c, order, set });
    }
    let infinity_order = r.infinity_order().expect("nonzero function");
    let infinity = match infinity_order {
        o if o > 2 => BTreeSet::from([0, 2, 4]),
        2 => order_two_set(&r.infinity_z2_coeff())?,
        o => BTreeSet::from([o]),
    };
    Ok(ESets { finite, infinity_order, infinity })
}

/// One pick from the Cartesian product of the step-1 sets, with its degree
/// value `d = (pick_infinity - sum of finite picks)/2`; retained when `d`
/// is a non-negative integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DFamily {
    pub finite: Vec<i64>,
    pub infinity: i64,
    pub d: ExactRatio,
    pub retained: bool,
}

/// Step 2: enumerates every family in canonical order (finite picks
/// lexicographic, infinity pick innermost, each set ascending).
pub fn d_candidates(sets: &ESets) -> Vec<DFamily> {
    let finite_sets: Vec<Vec<i64>> = sets
        .finite
        .iter()
        .map(|p| p.set.iter().copied().collect())
        .collect();
    let inf: Vec<i64> = sets.infinity.iter().copied().collect();
    let mut out = Vec::new();
    let mut picks = vec![0usize; finite_sets.len()];
    loop {
        let finite: Vec<i64> = picks
            .iter()
            .zip(&finite_sets)
            .map(|(&i, s)| s[i])
            .collect();
        for &e_inf in &inf {
            let sum: i64 = finite.iter().sum();
            let d = ratio(e_inf - sum, 2);
            let retained = !d.is_negative() && d.is_integer();
            out.push(DFamily { finite: finite.clone(), infinity: e_inf, d, retained });
        }
        // odometer increment over the finite picks
        let mut i = picks.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            picks[i] += 1;
            if picks[i] < finite_sets[i].len() {
                break;
            }
            picks[i] = 0;
        }
    }
}

/// Outcome of the degree-two search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Case2Outcome {
    /// A retained family admits a monic `P`; `theta` and `p` reconstruct
    /// the quadratic for the logarithmic derivative via
    /// `phi = theta + P'/P` and `w^2 - phi*w + (phi'/2 + phi^2/2 - r) = 0`.
    Possible { family_index: usize, theta: RatFn, p: RatPoly },
    Impossible,
}

/// Full machine-checkable trail of the degree-two decision.
#[derive(Clone, Debug)]
pub struct KovacicCertificate {
    pub r: RatFn,
    pub feasible: BTreeSet<CaseType>,
    /// `None` only for the zero function, which has no pole data.
    pub sets: Option<ESets>,
    pub families: Vec<DFamily>,
    pub outcome: Case2Outcome,
    pub notes: Vec<String>,
}

/// Runs the three steps and assembles the certificate.
///
/// The pole-order screen runs first; when shape (ii) is infeasible the
/// steps that are still well defined (sets and degree candidates) are
/// recorded for the trail but the polynomial search is skipped.
pub fn certify_case2(r: &RatFn) -> Result<KovacicCertificate, KovacicError> {
    let feasible = necessary_conditions(r)?;
    let mut notes = Vec::new();

    if r.is_zero() {
        notes.push(
            "zero function: no pole of order 2 nor of odd order above 2, \
             so a degree-two logarithmic derivative is ruled out by the \
             pole-order screen"
                .into(),
        );
        return Ok(KovacicCertificate {
            r: r.clone(),
            feasible,
            sets: None,
            families: Vec::new(),
            outcome: Case2Outcome::Impossible,
            notes,
        });
    }

    let sets = e_sets(r)?;
    let families = d_candidates(&sets);

    if !feasible.contains(&CaseType::Two) {
        notes.push(
            "pole-order screen: no pole of order 2 nor of odd order above 2, \
             so the degree-two shape cannot occur; polynomial search skipped"
                .into(),
        );
        return Ok(KovacicCertificate {
            r: r.clone(),
            feasible,
            sets: Some(sets),
            families,
            outcome: Case2Outcome::Impossible,
            notes,
        });
    }

    let mut outcome = Case2Outcome::Impossible;
    if families.iter().all(|f| !f.retained) {
        notes.push("no degree candidate d is a non-negative integer".into());
    }
    for (idx, fam) in families.iter().enumerate() {
        if !fam.retained {
            continue;
        }
        let theta = theta_for(&sets, fam);
        let d = fam.d.to_integer().to_usize().expect("small non-negative d");
        match find_monic_p(&theta, r, d) {
            Some(p) => {
                notes.push(format!(
                    "family #{idx}: monic P of degree {d} found"
                ));
                outcome = Case2Outcome::Possible { family_index: idx, theta, p };
                break;
            }
            None => {
                notes.push(format!(
                    "family #{idx}: no monic P of degree {d} exists"
                ));
            }
        }
    }
    Ok(KovacicCertificate {
        r: r.clone(),
        feasible,
        sets: Some(sets),
        families,
        outcome,
        notes,
    })
}

/// `theta = (1/2) sum of picks/(z - pole)` over the finite poles.
fn theta_for(sets: &ESets, fam: &DFamily) -> RatFn {
    let mut theta = RatFn::zero();
    for (pole, &pick) in sets.finite.iter().zip(&fam.finite) {
        let lin = RatPoly::new(vec![-pole.location.clone(), ExactRatio::one()]);
        let term = RatFn::new(RatPoly::constant(ratio(pick, 2)), lin)
            .expect("linear denominator");
        theta = &theta + &term;
    }
    theta
}

/// Step 3: a monic `P` of degree `d` with
/// `P''' + 3 theta P'' + (3 theta^2 + 3 theta' - 4r) P'
///  + (theta'' + 3 theta theta' + theta^3 - 4r theta - 2r') P = 0`,
/// found by an exact linear solve on the unknown coefficients.
fn find_monic_p(theta: &RatFn, r: &RatFn, d: usize) -> Option<RatPoly> {
    let three = RatFn::constant(int(3));
    let four = RatFn::constant(int(4));
    let two = RatFn::constant(int(2));
    let theta_p = theta.derivative();
    let c2 = &three * theta;
    let c1 = &(&(&three * &(theta * theta)) + &(&three * &theta_p)) - &(&four * r);
    let c0 = &(&(&(&theta_p.derivative() + &(&(&three * theta) * &theta_p))
        + &(theta * &(theta * theta)))
        - &(&(&four * r) * theta))
        - &(&two * &r.derivative());

    // images of the monomial basis under the linear operator
    let images: Vec<RatFn> = (0..=d)
        .map(|j| {
            let p = RatPoly::monomial(ExactRatio::one(), j);
            let p1 = p.derivative();
            let p2 = p1.derivative();
            let p3 = p2.derivative();
            let mut acc = RatFn::from_poly(p3);
            acc = &acc + &(&c2 * &RatFn::from_poly(p2));
            acc = &acc + &(&c1 * &RatFn::from_poly(p1));
            &acc + &(&c0 * &RatFn::from_poly(p))
        })
        .collect();

    // scale by the common denominator to work with plain polynomials
    let mut common = RatPoly::one();
    for im in &images {
        common = common.lcm(im.den());
    }
    let numerators: Vec<RatPoly> = images
        .iter()
        .map(|im| {
            let (q, rem) = common.div_rem(im.den());
            debug_assert!(rem.is_zero());
            im.num() * &q
        })
        .collect();

    // rows: coefficients of each power of z; unknowns: p_0..p_{d-1}; the
    // monic constraint moves the z^d image to the right-hand side
    let nrows = numerators
        .iter()
        .filter_map(|n| n.degree())
        .max()
        .map_or(0, |m| m + 1);
    let mut aug = vec![vec![ExactRatio::zero(); d + 1]; nrows];
    for (j, n) in numerators.iter().enumerate().take(d) {
        for (row, entry) in aug.iter_mut().enumerate() {
            entry[j] = n.coeff(row);
        }
    }
    for (row, entry) in aug.iter_mut().enumerate() {
        entry[d] = -numerators[d].coeff(row);
    }

    let solution = solve_exact(aug, d)?;
    let mut coeffs = solution;
    coeffs.push(ExactRatio::one());
    Some(RatPoly::new(coeffs))
}

/// Gaussian elimination over the rationals on an augmented matrix with
/// `cols` unknowns; free variables pin to zero; `None` when inconsistent.
fn solve_exact(mut aug: Vec<Vec<ExactRatio>>, cols: usize) -> Option<Vec<ExactRatio>> {
    let rows = aug.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&i| !aug[i][col].is_zero());
        let Some(pivot) = pivot else { continue };
        aug.swap(rank, pivot);
        let inv = aug[rank][col].clone().recip();
        for x in aug[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != rank && !aug[i][col].is_zero() {
                let factor = aug[i][col].clone();
                for j in 0..=cols {
                    let delta = &aug[rank][j] * &factor;
                    aug[i][j] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    // consistency: rows below the rank must have zero right-hand side
    if aug.iter().skip(rank).any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![ExactRatio::zero(); cols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(row) = pivot {
            x[col] = aug[*row][cols].clone();
        }
    }
    Some(x)
}

impl KovacicCertificate {
    /// The quadratic `w^2 - phi*w + psi = 0` for the logarithmic
    /// derivative, available when the outcome is possible.
    pub fn omega_quadratic(&self) -> Option<(RatFn, RatFn)> {
        let Case2Outcome::Possible { theta, p, .. } = &self.outcome else {
            return None;
        };
        let p_over = RatFn::new(p.derivative(), p.clone()).expect("monic P");
        let phi = theta + &p_over;
        let half = RatFn::constant(ratio(1, 2));
        let psi = &(&(&half * &phi.derivative()) + &(&half * &(&phi * &phi))) - &self.r;
        Some((phi, psi))
    }

    /// Exact check that a root `w` of the reconstructed quadratic solves
    /// the Riccati equation `w' + w^2 = r`, working in the quadratic
    /// extension. Returns `None` when the outcome is impossible.
    pub fn omega_satisfies_riccati(&self) -> Option<bool> {
        let (phi, psi) = self.omega_quadratic()?;
        let disc = &(&phi * &phi) - &(&RatFn::constant(int(4)) * &psi);
        if disc.is_zero() {
            // w = phi/2 is rational; substitute into the Riccati equation
            let w = &RatFn::constant(ratio(1, 2)) * &phi;
            let res = &(&w.derivative() + &(&w * &w)) - &self.r;
            return Some(res.is_zero());
        }
        // implicit differentiation: w' = (phi' w - psi') * (2w - phi)/disc;
        // reduce w^2 = phi*w - psi, then w' + w^2 - r must vanish in both
        // coordinates of the basis {1, w}
        let phi_p = phi.derivative();
        let psi_p = psi.derivative();
        // (phi' w - psi')(2w - phi) = (phi phi' - 2 psi') w + (phi psi' - 2 phi' psi)
        let lin_w = &(&phi * &phi_p) - &(&RatFn::constant(int(2)) * &psi_p);
        let lin_1 = &(&phi * &psi_p) - &(&(&RatFn::constant(int(2)) * &phi_p) * &psi);
        let wprime_w = lin_w.checked_div(&disc).expect("nonzero discriminant");
        let wprime_1 = lin_1.checked_div(&disc).expect("nonzero discriminant");
        // w' + w^2 - r = (w'_w + phi) w + (w'_1 - psi - r)
        let coeff_w = &wprime_w + &phi;
        let coeff_1 = &(&wprime_1 - &psi) - &self.r;
        Some(coeff_w.is_zero() && coeff_1.is_zero())
    }

    /// Structured-text serialization; stable keys, exact values.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        out.push_str("kovacic-case2-certificate\n");
        out.push_str(&format!("r: {}\n", self.r));
        let feas: Vec<String> = self.feasible.iter().map(|t| t.to_string()).collect();
        out.push_str(&format!(
            "feasible-types: {}\n",
            if feas.is_empty() { "none".into() } else { feas.join(" ") }
        ));
        if let Some(sets) = &self.sets {
            for pole in &sets.finite {
                out.push_str(&format!("pole: {}\n", format_ratio(&pole.location)));
                out.push_str(&format!("  order: {}\n", pole.order));
                out.push_str(&format!("  set: {}\n", fmt_set(&pole.set)));
            }
            out.push_str(&format!("infinity-order: {}\n", sets.infinity_order));
            out.push_str(&format!("infinity-set: {}\n", fmt_set(&sets.infinity)));
        }
        for fam in &self.families {
            let finite: Vec<String> = fam.finite.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "family: finite=[{}] infinity={} d={} retained={}\n",
                finite.join(", "),
                fam.infinity,
                format_ratio(&fam.d),
                if fam.retained { "yes" } else { "no" }
            ));
        }
        match &self.outcome {
            Case2Outcome::Impossible => out.push_str("outcome: impossible\n"),
            Case2Outcome::Possible { family_index, theta, p } => {
                out.push_str("outcome: possible\n");
                out.push_str(&format!("  family-index: {family_index}\n"));
                out.push_str(&format!("  theta: {theta}\n"));
                out.push_str(&format!("  p: {p}\n"));
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

fn fmt_set(set: &BTreeSet<i64>) -> String {
    let items: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vals: &[i64]) -> BTreeSet<i64> {
        vals.iter().copied().collect()
    }

    #[test]
    fn normal_form_examples() {
        // a1 = 0 leaves a2 unchanged
        let r0 = parse_ratfn("1/z - 5").unwrap();
        assert_eq!(normal_form(&RatFn::zero(), &r0), r0);
        // a1 = -3/(2z), a2 = 0: r = 9/(16z^2) - 3/(4z^2) = -3/(16z^2)
        let a1 = parse_ratfn("-3/(2*z)").unwrap();
        assert_eq!(
            normal_form(&a1, &RatFn::zero()),
            parse_ratfn("-3/(16*z^2)").unwrap()
        );
    }

    #[test]
    fn reduced_coefficient_matches_first_order_form() {
        for k in 3..=12 {
            let (a1, a2) = anve_coefficients(k).unwrap();
            assert_eq!(normal_form(&a1, &a2), anve_r(k).unwrap(), "k={k}");
        }
    }

    #[test]
    fn reduced_coefficient_frozen_values() {
        assert_eq!(anve_r(3).unwrap(), parse_ratfn("-3/(32*z^3)").unwrap());
        assert_eq!(
            anve_r(4).unwrap(),
            parse_ratfn("-(11/(144*z^2) + 1/(18*z^3))").unwrap()
        );
        assert_eq!(
            anve_r(10).unwrap(),
            parse_ratfn("-(203/(1296*z^2) + 5/(324*z^3))").unwrap()
        );
        assert!(matches!(anve_r(2), Err(KovacicError::ExponentTooSmall(2))));
    }

    #[test]
    fn necessary_condition_screen() {
        let one = RatFn::constant(int(1));
        assert_eq!(
            necessary_conditions(&one).unwrap(),
            BTreeSet::from([CaseType::One])
        );
        let r = parse_ratfn("1/z").unwrap();
        assert_eq!(necessary_conditions(&r).unwrap(), BTreeSet::new());
        let r3 = anve_r(3).unwrap();
        assert_eq!(
            necessary_conditions(&r3).unwrap(),
            BTreeSet::from([CaseType::Two])
        );
        // all-order-2 instance satisfying the partial-fraction tests:
        // r = 2/z^2 has sqrt(1+8) = 3 rational, no residues
        let r = parse_ratfn("2/z^2").unwrap();
        assert!(necessary_conditions(&r)
            .unwrap()
            .contains(&CaseType::Three));
        // nonzero residue sum kills shape (iii)
        let r = parse_ratfn("2/z^2 + 1/(z-1)").unwrap();
        assert!(!necessary_conditions(&r)
            .unwrap()
            .contains(&CaseType::Three));
    }

    #[test]
    fn step1_sets_for_the_reduced_family() {
        let s3 = e_sets(&anve_r(3).unwrap()).unwrap();
        assert_eq!(s3.finite.len(), 1);
        assert_eq!(s3.finite[0].location, int(0));
        assert_eq!(s3.finite[0].set, set(&[3]));
        assert_eq!(s3.infinity_order, 3);
        assert_eq!(s3.infinity, set(&[0, 2, 4]));
        for k in 4..=40 {
            let s = e_sets(&anve_r(k).unwrap()).unwrap();
            assert_eq!(s.finite[0].set, set(&[3]), "k={k}");
            assert_eq!(s.infinity_order, 2, "k={k}");
            assert_eq!(s.infinity, set(&[2]), "k={k}");
        }
    }

    #[test]
    fn step1_order_two_pole_set() {
        // b = -3/16: sqrt(1+4b) = 1/2, candidates {2, 3, 1}
        let r = parse_ratfn("-3/(16*z^2)").unwrap();
        let s = e_sets(&r).unwrap();
        assert_eq!(s.finite[0].set, set(&[1, 2, 3]));
        assert_eq!(s.infinity, set(&[1, 2, 3]));
        // irrational sqrt(1+4b) leaves only the l = 0 element
        let r = parse_ratfn("1/(4*z^2)").unwrap();
        assert_eq!(e_sets(&r).unwrap().finite[0].set, set(&[2]));
    }

    #[test]
    fn step2_candidates() {
        let s3 = e_sets(&anve_r(3).unwrap()).unwrap();
        let fams = d_candidates(&s3);
        let ds: Vec<ExactRatio> = fams.iter().map(|f| f.d.clone()).collect();
        assert_eq!(ds, vec![ratio(-3, 2), ratio(-1, 2), ratio(1, 2)]);
        assert!(fams.iter().all(|f| !f.retained));

        let s4 = e_sets(&anve_r(4).unwrap()).unwrap();
        let fams = d_candidates(&s4);
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].d, ratio(-1, 2));
        assert!(!fams[0].retained);

        // synthetic: {1} at a pole, {3} at infinity gives d = 1 retained
        let sets = ESets {
            finite: vec![PoleSet { location: int(0), order: 1, set: set(&[1]) }],
            infinity_order: 3,
            infinity: set(&[3]),
        };
        let fams = d_candidates(&sets);
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].d, int(1));
        assert!(fams[0].retained);
    }

    #[test]
    fn certificate_impossible_for_the_reduced_family() {
        for k in 3..=40 {
            let cert = certify_case2(&anve_r(k).unwrap()).unwrap();
            assert_eq!(cert.outcome, Case2Outcome::Impossible, "k={k}");
            assert_eq!(cert.feasible, BTreeSet::from([CaseType::Two]), "k={k}");
        }
    }

    #[test]
    fn certificate_zero_function() {
        let cert = certify_case2(&RatFn::zero()).unwrap();
        assert_eq!(cert.outcome, Case2Outcome::Impossible);
        assert!(cert.sets.is_none());
        assert!(!cert.feasible.contains(&CaseType::Two));
    }

    #[test]
    fn certificate_possible_with_verified_quadratic() {
        // classic degree-two instance: r = 1/z - 3/(16 z^2)
        let r = parse_ratfn("1/z - 3/(16*z^2)").unwrap();
        let cert = certify_case2(&r).unwrap();
        let Case2Outcome::Possible { theta, p, .. } = &cert.outcome else {
            panic!("expected a possible outcome, got {:?}", cert.outcome)
        };
        assert_eq!(theta, &parse_ratfn("1/(2*z)").unwrap());
        assert_eq!(p, &RatPoly::one());
        assert_eq!(cert.omega_satisfies_riccati(), Some(true));
    }

    #[test]
    fn certificate_possible_with_nontrivial_p() {
        // r = 5/(16z^2) + 1/(4z): the only retained family has d = 1 and
        // the linear solve pins P = z - 1
        let r = parse_ratfn("5/(16*z^2) + 1/(4*z)").unwrap();
        let cert = certify_case2(&r).unwrap();
        let Case2Outcome::Possible { theta, p, .. } = &cert.outcome else {
            panic!("expected a possible outcome, got {:?}", cert.outcome)
        };
        assert_eq!(theta, &parse_ratfn("-1/(2*z)").unwrap());
        assert_eq!(p, &RatPoly::from_ints(&[-1, 1]));
        assert_eq!(cert.omega_satisfies_riccati(), Some(true));
    }

    #[test]
    fn report_is_stable_and_complete() {
        let cert = certify_case2(&anve_r(3).unwrap()).unwrap();
        let text = cert.to_report();
        assert!(text.contains("pole: 0"));
        assert!(text.contains("set: {3}"));
        assert!(text.contains("infinity-set: {0, 2, 4}"));
        assert!(text.contains("d=-3/2"));
        assert!(text.contains("outcome: impossible"));
        let again = certify_case2(&anve_r(3).unwrap()).unwrap().to_report();
        assert_eq!(text, again);
    }

    #[test]
    fn exactness_round_trips() {
        let samples = [
            "1/z - 3/(16*z^2)",
            "(z^3-2)/(7*z^2+5)",
            "-3/(32*z^3)",
            "z^4 - 1/3",
        ];
        for a in &samples {
            for b in &samples {
                let fa = parse_ratfn(a).unwrap();
                let fb = parse_ratfn(b).unwrap();
                assert_eq!(&(&(&fa + &fb) - &fb), &fa);
                assert_eq!((&fa * &fb).checked_div(&fb).unwrap(), fa);
            }
        }
    }
}
