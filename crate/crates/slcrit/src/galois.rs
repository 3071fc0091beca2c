//! Integrability classification by differential Galois theory.
//!
//! The decision problem: for which `(k, mu)` does the oscillator family of
//! the [`crate::dynamics`] module admit a complete set of meromorphic first
//! integrals? The answer implemented here is exact:
//!
//! * `k = 2` — integrable for every frequency vector (the spectral
//!   deformation family supplies the integrals);
//! * `k >= 3` — integrable exactly when all frequencies agree (the angular
//!   family supplies the integrals).
//!
//! Everything else is non-integrable, and [`classify`] produces a verdict
//! carrying the *reason*: variational equations along a distinguished
//! straight-line solution reduce to hypergeometric form, and solvability of
//! their monodromy is decided by exact arithmetic on the exponent
//! differences
//!
//! ```text
//! rho^2 = (mu2/mu1) / (k-1)^2,   tau = (k+1) / (2(k-1)),   sigma = 1/2.
//! ```
//!
//! Solvability of a second-order hypergeometric equation is characterized by
//! two conditions on `(rho, tau, sigma)` ([`kimura_solvable`]): (i) some
//! signed combination `±rho ± tau ± sigma` is an odd integer, or (ii) the
//! signed triple, in some order, lands in one of the fifteen Schwarz
//! families (a table of base fractions modulo integers, some rows carrying
//! an evenness constraint on the integer offsets).
//!
//! For the oscillator family these conditions distill to an exact membership
//! test on the frequency ratio ([`membership_condition`]): the ratio must lie
//! in
//!
//! ```text
//! { ((k-1) l ± 1)^2 : l in N }  union  { (k-1)^2 (2l+1)^2 / 4 : l in Z }.
//! ```
//!
//! Every element of either set is `>= 1`, with equality only at ratio `1`.
//! Integrability demands the condition for a frequency pair in *both*
//! orders, and the two ratios are reciprocal — hence the contradiction that
//! powers the non-integrability verdicts for distinct nonzero frequencies.
//! When the witness pair contains a zero frequency the ratio argument is
//! unavailable; the verdict instead cites the differential Galois
//! certificate of the [`crate::kovacic`] module on the k-dependent rational
//! normal form [`crate::kovacic::anve_r`].
//!
//! All arithmetic is exact ([`ExactRatio`]); square roots are decided by
//! perfect-square tests, so irrational and complex exponent differences are
//! classified symbolically, never by floating comparison.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dynamics::SystemParams;
use crate::exact::{
    format_ratio, from_f64_exact, int, is_odd_integer, ratio, sqrt_exact, ExactRatio,
};
use crate::kovacic::{anve_r, certify_case2, Case2Outcome};

/// Errors for the exact classification layer.
#[derive(Debug, Error)]
pub enum GaloisError {
    /// Exponent differences are defined for `k >= 3` only.
    #[error("exponent differences require k >= 3, got k = {0}")]
    ExponentTooSmall(u32),
    /// `mu1 = 0` puts a pole in the exponent-difference formulas.
    #[error("exponent differences undefined for mu1 = 0; route zero frequencies to the Kovacic branch")]
    ZeroBaseFrequency,
    /// Classification requires `k >= 2`.
    #[error("classification requires k >= 2, got k = {0}")]
    UnsupportedExponent(u32),
    /// The coupling sign must be `-1` or `+1`.
    #[error("epsilon must be -1 or +1, got {0}")]
    BadSign(i32),
    /// At least one frequency is required.
    #[error("at least one frequency parameter is required")]
    EmptyFrequencies,
    /// The gap-system index must be positive.
    #[error("gap-system index n must be >= 1")]
    ZeroGapIndex,
}

/// The three exponent differences of the hypergeometric reduction, stored
/// unsigned; consumers enumerate sign choices.
///
/// `rho` itself is kept as its square `rho_sq` so that rational, irrational,
/// and complex `rho` are all represented exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTriple {
    /// `rho^2 = (mu2/mu1)/(k-1)^2`; negative when the frequency ratio is
    /// negative (complex `rho`).
    pub rho_sq: ExactRatio,
    /// `tau = (k+1)/(2(k-1))`.
    pub tau: ExactRatio,
    /// `sigma = 1/2`.
    pub sigma: ExactRatio,
}

/// Exact arithmetic class of `rho = sqrt(rho_sq)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoClass {
    /// `rho_sq` is a perfect rational square; carries the non-negative root.
    Rational(ExactRatio),
    /// `rho_sq >= 0` but not a perfect square: `rho` is a real quadratic
    /// irrational.
    Irrational,
    /// `rho_sq < 0`: `rho` is purely imaginary.
    Complex,
}

impl ExponentTriple {
    /// Decides whether `rho` is rational, irrational, or complex — exactly.
    pub fn rho_class(&self) -> RhoClass {
        if self.rho_sq.is_negative() {
            RhoClass::Complex
        } else {
            match sqrt_exact(&self.rho_sq) {
                Some(r) => RhoClass::Rational(r),
                None => RhoClass::Irrational,
            }
        }
    }
}

/// Computes the exponent differences `(rho^2, tau, sigma)` for exponent `k`
/// and frequency pair `(mu1, mu2)`.
pub fn exponent_differences(
    k: u32,
    mu1: &ExactRatio,
    mu2: &ExactRatio,
) -> Result<ExponentTriple, GaloisError> {
    if k < 3 {
        return Err(GaloisError::ExponentTooSmall(k));
    }
    if mu1.is_zero() {
        return Err(GaloisError::ZeroBaseFrequency);
    }
    let km1 = i64::from(k) - 1;
    Ok(ExponentTriple {
        rho_sq: (mu2 / mu1) / int(km1 * km1),
        tau: ratio(i64::from(k) + 1, 2 * km1),
        sigma: ratio(1, 2),
    })
}

/// One slot of a Schwarz-table row: a base fraction taken modulo integers,
/// or a slot accepting an arbitrary complex number.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Frac(i64, i64),
    Arbitrary,
}

struct SchwarzRow {
    slots: [Slot; 3],
    /// When set, the three integer offsets must have even sum.
    parity_even: bool,
}

/// The fifteen Schwarz families: each row lists three exponent-difference
/// slots `base + integer`; rows marked `parity_even` additionally require
/// the sum of the three integer offsets to be even. Row 1's third slot
/// accepts any complex number.
const SCHWARZ_TABLE: [SchwarzRow; 15] = [
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(1, 2), Slot::Arbitrary], parity_even: false },
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(1, 3), Slot::Frac(1, 3)], parity_even: false },
    SchwarzRow { slots: [Slot::Frac(2, 3), Slot::Frac(1, 3), Slot::Frac(1, 3)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(1, 3), Slot::Frac(1, 4)], parity_even: false },
    SchwarzRow { slots: [Slot::Frac(2, 3), Slot::Frac(1, 4), Slot::Frac(1, 4)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(1, 3), Slot::Frac(1, 5)], parity_even: false },
    SchwarzRow { slots: [Slot::Frac(2, 5), Slot::Frac(1, 3), Slot::Frac(1, 3)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(2, 3), Slot::Frac(1, 5), Slot::Frac(1, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(2, 5), Slot::Frac(1, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(3, 5), Slot::Frac(1, 3), Slot::Frac(1, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(2, 5), Slot::Frac(2, 5), Slot::Frac(2, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(2, 3), Slot::Frac(1, 3), Slot::Frac(1, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(4, 5), Slot::Frac(1, 5), Slot::Frac(1, 5)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(1, 2), Slot::Frac(2, 5), Slot::Frac(1, 3)], parity_even: true },
    SchwarzRow { slots: [Slot::Frac(3, 5), Slot::Frac(2, 5), Slot::Frac(1, 3)], parity_even: true },
];

/// All eight sign patterns, the four canonical combinations first.
const SIGN_PATTERNS: [[i8; 3]; 8] = [
    [1, 1, 1],
    [-1, 1, 1],
    [1, -1, 1],
    [1, 1, -1],
    [-1, -1, 1],
    [-1, 1, -1],
    [1, -1, -1],
    [-1, -1, -1],
];

const PERMUTATIONS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Certificate attached to a [`KimuraResult`].
#[derive(Debug, Clone, PartialEq)]
pub enum KimuraCertificate {
    /// Condition (i): `signs = (s1, s2, s3)` with
    /// `s1*rho + s2*tau + s3*sigma = value`, an odd integer.
    OddIntegerCombination {
        /// Signs applied to `(rho, tau, sigma)`.
        signs: [i8; 3],
        /// The odd integer attained.
        value: ExactRatio,
    },
    /// Condition (ii): 1-based Schwarz-table row and the slot assignment
    /// that realizes it.
    SchwarzRow {
        /// Row index, `1..=15`.
        row: usize,
        /// Human-readable assignment `signed-value -> base + (offset)`.
        assignment: String,
    },
    /// Exhaustive failure of both conditions.
    NotSolvable {
        /// Which arithmetic class blocked the search.
        reason: String,
    },
}

/// Outcome of the solvability test.
#[derive(Debug, Clone, PartialEq)]
pub struct KimuraResult {
    /// Whether the monodromy of the hypergeometric equation with these
    /// exponent differences is solvable.
    pub solvable: bool,
    /// Evidence for the outcome.
    pub certificate: KimuraCertificate,
}

/// Condition (i) in isolation: searches the eight sign patterns for an odd
/// integer `s1*rho + s2*tau + s3*sigma`. `rho = None` encodes an irrational
/// or complex `rho`, for which no combination can be an integer.
pub fn odd_integer_combination(
    rho: Option<&ExactRatio>,
    tau: &ExactRatio,
    sigma: &ExactRatio,
) -> Option<([i8; 3], ExactRatio)> {
    let rho = rho?;
    for signs in SIGN_PATTERNS {
        let value = int(i64::from(signs[0])) * rho
            + int(i64::from(signs[1])) * tau
            + int(i64::from(signs[2])) * sigma;
        if is_odd_integer(&value) {
            return Some((signs, value));
        }
    }
    None
}

fn sign_str(s: i8) -> &'static str {
    if s >= 0 {
        "+"
    } else {
        "-"
    }
}

/// Condition (ii): tries every sign pattern and slot permutation against
/// every Schwarz row. Non-rational `rho` (`values[0] = None`) can occupy
/// only an arbitrary slot.
fn schwarz_table_match(
    rho: Option<&ExactRatio>,
    tau: &ExactRatio,
    sigma: &ExactRatio,
) -> Option<(usize, String)> {
    let labels = ["rho", "tau", "sigma"];
    let values: [Option<&ExactRatio>; 3] = [rho, Some(tau), Some(sigma)];
    for (row_idx, row) in SCHWARZ_TABLE.iter().enumerate() {
        for signs in SIGN_PATTERNS {
            for perm in PERMUTATIONS {
                let mut offsets_sum = num_bigint::BigInt::from(0);
                let mut parts: Vec<String> = Vec::with_capacity(3);
                let mut fits = true;
                for (slot_idx, &value_idx) in perm.iter().enumerate() {
                    let sign = signs[value_idx];
                    match (row.slots[slot_idx], values[value_idx]) {
                        (Slot::Arbitrary, _) => {
                            parts.push(format!(
                                "{}{} -> arbitrary",
                                sign_str(sign),
                                labels[value_idx]
                            ));
                        }
                        (Slot::Frac(n, d), Some(x)) => {
                            let signed = int(i64::from(sign)) * x;
                            let diff = &signed - ratio(n, d);
                            if diff.is_integer() {
                                let l = diff.to_integer();
                                parts.push(format!(
                                    "{}{} -> {}/{} + ({})",
                                    sign_str(sign),
                                    labels[value_idx],
                                    n,
                                    d,
                                    l
                                ));
                                offsets_sum += l;
                            } else {
                                fits = false;
                                break;
                            }
                        }
                        (Slot::Frac(..), None) => {
                            fits = false;
                            break;
                        }
                    }
                }
                if fits && (!row.parity_even || offsets_sum.is_even()) {
                    return Some((row_idx + 1, parts.join(", ")));
                }
            }
        }
    }
    None
}

/// Decides solvability of the hypergeometric monodromy for the given
/// exponent differences: condition (i) (odd-integer signed combination) or
/// condition (ii) (membership in a Schwarz family).
pub fn kimura_solvable(triple: &ExponentTriple) -> KimuraResult {
    let class = triple.rho_class();
    let rho_opt = match &class {
        RhoClass::Rational(r) => Some(r),
        RhoClass::Irrational | RhoClass::Complex => None,
    };
    if let Some((signs, value)) = odd_integer_combination(rho_opt, &triple.tau, &triple.sigma) {
        return KimuraResult {
            solvable: true,
            certificate: KimuraCertificate::OddIntegerCombination { signs, value },
        };
    }
    if let Some((row, assignment)) = schwarz_table_match(rho_opt, &triple.tau, &triple.sigma) {
        return KimuraResult {
            solvable: true,
            certificate: KimuraCertificate::SchwarzRow { row, assignment },
        };
    }
    let reason = match class {
        RhoClass::Rational(r) => format!(
            "rho = {} rational: no signed combination is an odd integer and no Schwarz row fits",
            format_ratio(&r)
        ),
        RhoClass::Irrational => format!(
            "rho = sqrt({}) irrational: condition (i) impossible; only arbitrary slots accept \
             rho and the remaining slots reject tau, sigma",
            format_ratio(&triple.rho_sq)
        ),
        RhoClass::Complex => format!(
            "rho^2 = {} < 0, rho imaginary: condition (i) impossible; only arbitrary slots \
             accept rho and the remaining slots reject tau, sigma",
            format_ratio(&triple.rho_sq)
        ),
    };
    KimuraResult { solvable: false, certificate: KimuraCertificate::NotSolvable { reason } }
}

/// Exact membership test for a frequency ratio in
/// `{ ((k-1) l ± 1)^2 : l in N } ∪ { (k-1)^2 (2l+1)^2 / 4 : l in Z }`.
///
/// Decided by a perfect-square test plus divisibility: writing
/// `s = sqrt(ratio) >= 0`, membership holds iff `s` is an integer with
/// `(k-1) | (s-1)` or `(k-1) | (s+1)`, or `2s/(k-1)` is an odd integer.
pub fn membership_condition(k: u32, ratio_value: &ExactRatio) -> bool {
    assert!(k >= 3, "membership condition is defined for k >= 3");
    if ratio_value.is_negative() {
        return false;
    }
    let Some(s) = sqrt_exact(ratio_value) else {
        return false;
    };
    let km1 = int(i64::from(k) - 1);
    if s.is_integer() {
        let s_int = s.to_integer();
        let km1_int = km1.to_integer();
        let down: num_bigint::BigInt = &s_int - 1;
        let up: num_bigint::BigInt = &s_int + 1;
        if (down % &km1_int).is_zero() || (up % &km1_int).is_zero() {
            return true;
        }
    }
    // Second family: 2s/(k-1) an odd (positive) integer.
    is_odd_integer(&(int(2) * &s / &km1))
}

/// Outcome status of a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// A complete set of meromorphic first integrals exists.
    Integrable,
    /// No complete meromorphic integral set exists.
    NonIntegrable,
}

/// Which integrable family applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrableCase {
    /// `k = 2`, any frequencies: the spectral deformation family.
    KEqualsTwo,
    /// `k >= 3`, all frequencies equal: the angular family.
    EqualFrequencies,
}

/// Evidence backing a [`Verdict`].
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Integrable: the applicable case and the named integrals.
    IntegrableFamily {
        /// Which integrable case matched.
        case: IntegrableCase,
        /// Names of `m` functionally independent integrals.
        integrals: Vec<String>,
    },
    /// Non-integrable via the reciprocal-ratio contradiction at a nonzero
    /// witness pair (1-based indices).
    FrequencyRatioObstruction {
        /// Indices `(1, j0)` of the witness frequency pair.
        pair: (usize, usize),
        /// `mu[j0] / mu[1]`.
        forward_ratio: ExactRatio,
        /// `mu[1] / mu[j0]`.
        reverse_ratio: ExactRatio,
        /// Membership of the forward ratio.
        forward_member: bool,
        /// Membership of the reverse ratio.
        reverse_member: bool,
    },
    /// Non-integrable via the degenerate (zero-frequency) branch, certified
    /// by the Kovacic machinery on the k-dependent normal form.
    ZeroFrequencyObstruction {
        /// Indices `(1, j0)` of the witness frequency pair.
        pair: (usize, usize),
        /// 1-based position of the zero frequency inside the pair's indices.
        zero_position: usize,
        /// Outcome of the degree-two Kovacic search (`impossible` expected).
        certificate_outcome: String,
    },
}

/// One checked condition with its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrailEntry {
    /// Stable condition name (kebab-case).
    pub condition: String,
    /// Outcome description.
    pub outcome: String,
}

/// A classification outcome with machine-readable evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// Integrable or not.
    pub status: Status,
    /// Evidence for the status.
    pub witness: Witness,
    /// Ordered list of checked conditions.
    pub trail: Vec<TrailEntry>,
    /// Nonlinearity exponent of the classified system.
    pub k: u32,
    /// Coupling sign of the classified system.
    pub epsilon: i32,
    /// Exact frequency parameters of the classified system.
    pub mu: Vec<ExactRatio>,
}

impl Verdict {
    /// Degrees of freedom.
    pub fn m(&self) -> usize {
        self.mu.len()
    }

    /// Serializes the verdict as a structured text document.
    ///
    /// Schema (stable field names, one `key: value` per line):
    /// `classification-verdict`, `status`, `m`, `k`, `epsilon`, `mu`,
    /// `witness`, repeated `integral` lines (integrable only), repeated
    /// `check` lines in trail order.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        out.push_str("classification-verdict\n");
        out.push_str(&format!(
            "status: {}\n",
            match self.status {
                Status::Integrable => "integrable",
                Status::NonIntegrable => "non-integrable",
            }
        ));
        out.push_str(&format!("m: {}\n", self.m()));
        out.push_str(&format!("k: {}\n", self.k));
        out.push_str(&format!("epsilon: {:+}\n", self.epsilon));
        let mu_list: Vec<String> = self.mu.iter().map(format_ratio).collect();
        out.push_str(&format!("mu: [{}]\n", mu_list.join(", ")));
        match &self.witness {
            Witness::IntegrableFamily { case, integrals } => {
                out.push_str(&format!(
                    "witness: integrable-family case={}\n",
                    match case {
                        IntegrableCase::KEqualsTwo => "k-equals-2",
                        IntegrableCase::EqualFrequencies => "equal-frequencies",
                    }
                ));
                for name in integrals {
                    out.push_str(&format!("integral: {name}\n"));
                }
            }
            Witness::FrequencyRatioObstruction {
                pair,
                forward_ratio,
                reverse_ratio,
                forward_member,
                reverse_member,
            } => {
                out.push_str(&format!(
                    "witness: frequency-ratio-obstruction pair=({},{}) forward-ratio={} \
                     reverse-ratio={} forward-member={} reverse-member={}\n",
                    pair.0,
                    pair.1,
                    format_ratio(forward_ratio),
                    format_ratio(reverse_ratio),
                    yes_no(*forward_member),
                    yes_no(*reverse_member),
                ));
            }
            Witness::ZeroFrequencyObstruction { pair, zero_position, certificate_outcome } => {
                out.push_str(&format!(
                    "witness: zero-frequency-obstruction pair=({},{}) zero-position={} \
                     kovacic-case2={}\n",
                    pair.0, pair.1, zero_position, certificate_outcome,
                ));
            }
        }
        for entry in &self.trail {
            out.push_str(&format!("check: {} -> {}\n", entry.condition, entry.outcome));
        }
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn trail(condition: &str, outcome: String) -> TrailEntry {
    TrailEntry { condition: condition.to_string(), outcome }
}

/// Classifies a system given exact rational frequencies.
///
/// The decision rule is the exact truth table (`k = 2` or all frequencies
/// equal); the trail additionally records the supporting evidence — ratio
/// memberships in both directions for a nonzero witness pair, or the
/// Kovacic certificate for a pair containing zero.
pub fn classify_exact(k: u32, epsilon: i32, mu: &[ExactRatio]) -> Result<Verdict, GaloisError> {
    if k < 2 {
        return Err(GaloisError::UnsupportedExponent(k));
    }
    if epsilon != 1 && epsilon != -1 {
        return Err(GaloisError::BadSign(epsilon));
    }
    if mu.is_empty() {
        return Err(GaloisError::EmptyFrequencies);
    }
    let m = mu.len();
    let mut steps: Vec<TrailEntry> = Vec::new();

    // Rule 1: k = 2 is integrable outright.
    if k == 2 {
        steps.push(trail("k-equals-2", "yes: spectral deformation family applies".into()));
        let mut integrals = vec!["H".to_string()];
        for i in 1..m {
            integrals.push(format!("Deformation(s_{i})"));
        }
        steps.push(trail(
            "conclusion",
            format!("integrable with {m} independent integrals"),
        ));
        return Ok(Verdict {
            status: Status::Integrable,
            witness: Witness::IntegrableFamily { case: IntegrableCase::KEqualsTwo, integrals },
            trail: steps,
            k,
            epsilon,
            mu: mu.to_vec(),
        });
    }
    steps.push(trail("k-equals-2", format!("no (k = {k})")));

    // Rule 2: equal frequencies are integrable via the angular family.
    let witness_j = mu.iter().position(|x| x != &mu[0]);
    match witness_j {
        None => {
            steps.push(trail("equal-frequencies", "yes: all mu agree".into()));
            let mut integrals = vec!["H".to_string()];
            for i in 1..m {
                integrals.push(format!("Angular({i})"));
            }
            steps.push(trail(
                "conclusion",
                format!("integrable with {m} independent integrals"),
            ));
            Ok(Verdict {
                status: Status::Integrable,
                witness: Witness::IntegrableFamily {
                    case: IntegrableCase::EqualFrequencies,
                    integrals,
                },
                trail: steps,
                k,
                epsilon,
                mu: mu.to_vec(),
            })
        }
        Some(j0) => {
            steps.push(trail(
                "equal-frequencies",
                format!("no (mu[{}] != mu[1])", j0 + 1),
            ));
            let pair = (1usize, j0 + 1);
            steps.push(trail(
                "witness-pair",
                format!(
                    "(mu[1], mu[{}]) = ({}, {})",
                    j0 + 1,
                    format_ratio(&mu[0]),
                    format_ratio(&mu[j0])
                ),
            ));
            if !mu[0].is_zero() && !mu[j0].is_zero() {
                nonzero_pair_verdict(k, epsilon, mu, j0, pair, steps)
            } else {
                zero_pair_verdict(k, epsilon, mu, j0, pair, steps)
            }
        }
    }
}

/// Both witness frequencies nonzero: the reciprocal-ratio contradiction.
fn nonzero_pair_verdict(
    k: u32,
    epsilon: i32,
    mu: &[ExactRatio],
    j0: usize,
    pair: (usize, usize),
    mut steps: Vec<TrailEntry>,
) -> Result<Verdict, GaloisError> {
    let forward_ratio = &mu[j0] / &mu[0];
    let reverse_ratio = &mu[0] / &mu[j0];
    match exponent_differences(k, &mu[0], &mu[j0]) {
        Ok(triple) => {
            let desc = match triple.rho_class() {
                RhoClass::Rational(r) => format!("rho = {} rational", format_ratio(&r)),
                RhoClass::Irrational => "rho irrational".to_string(),
                RhoClass::Complex => "rho imaginary (mixed-sign frequencies)".to_string(),
            };
            steps.push(trail(
                "exponent-differences",
                format!(
                    "rho^2 = {}, tau = {}, sigma = {} ({desc})",
                    format_ratio(&triple.rho_sq),
                    format_ratio(&triple.tau),
                    format_ratio(&triple.sigma),
                ),
            ));
        }
        Err(e) => steps.push(trail("exponent-differences", format!("unavailable: {e}"))),
    }
    let forward_member = membership_condition(k, &forward_ratio);
    let reverse_member = membership_condition(k, &reverse_ratio);
    steps.push(trail(
        "ratio-membership-forward",
        format!(
            "mu[{}]/mu[1] = {}: {}",
            pair.1,
            format_ratio(&forward_ratio),
            member_text(forward_member)
        ),
    ));
    steps.push(trail(
        "ratio-membership-reverse",
        format!(
            "mu[1]/mu[{}] = {}: {}",
            pair.1,
            format_ratio(&reverse_ratio),
            member_text(reverse_member)
        ),
    ));
    steps.push(trail(
        "reciprocal-obstruction",
        "every admissible ratio is >= 1 with equality only for equal frequencies; the two \
         ratios are reciprocal, so membership cannot hold in both directions"
            .into(),
    ));
    steps.push(trail(
        "conclusion",
        "non-integrable: variational obstruction at a nonzero frequency pair".into(),
    ));
    Ok(Verdict {
        status: Status::NonIntegrable,
        witness: Witness::FrequencyRatioObstruction {
            pair,
            forward_ratio,
            reverse_ratio,
            forward_member,
            reverse_member,
        },
        trail: steps,
        k,
        epsilon,
        mu: mu.to_vec(),
    })
}

fn member_text(member: bool) -> &'static str {
    if member {
        "member"
    } else {
        "not a member"
    }
}

/// One witness frequency zero: cite the Kovacic certificate on the reduced
/// rational normal form.
fn zero_pair_verdict(
    k: u32,
    epsilon: i32,
    mu: &[ExactRatio],
    j0: usize,
    pair: (usize, usize),
    mut steps: Vec<TrailEntry>,
) -> Result<Verdict, GaloisError> {
    let zero_position = if mu[0].is_zero() { 1 } else { j0 + 1 };
    steps.push(trail(
        "zero-frequency",
        format!(
            "mu[{zero_position}] = 0: the variational equation along the degenerate direction \
             reduces to the k-dependent rational normal form"
        ),
    ));
    let certificate_outcome = match anve_r(k).and_then(|r| certify_case2(&r)) {
        Ok(cert) => {
            let types: Vec<String> = cert.feasible.iter().map(|t| t.to_string()).collect();
            steps.push(trail(
                "kovacic-feasible-types",
                if types.is_empty() { "none".into() } else { types.join(", ") },
            ));
            let outcome = match cert.outcome {
                Case2Outcome::Impossible => "impossible".to_string(),
                Case2Outcome::Possible { family_index, .. } => {
                    format!("possible (family {family_index})")
                }
            };
            steps.push(trail("kovacic-case2", outcome.clone()));
            if outcome == "impossible" {
                steps.push(trail(
                    "conclusion",
                    "non-integrable: remaining Galois case has non-solvable identity component"
                        .into(),
                ));
            } else {
                steps.push(trail(
                    "conclusion",
                    "non-integrable by the frequency truth table; degree-two certificate \
                     unexpectedly possible, see notes"
                        .into(),
                ));
            }
            outcome
        }
        Err(e) => {
            let outcome = format!("error: {e}");
            steps.push(trail("kovacic-case2", outcome.clone()));
            steps.push(trail(
                "conclusion",
                "non-integrable by the frequency truth table (certificate unavailable)".into(),
            ));
            outcome
        }
    };
    Ok(Verdict {
        status: Status::NonIntegrable,
        witness: Witness::ZeroFrequencyObstruction { pair, zero_position, certificate_outcome },
        trail: steps,
        k,
        epsilon,
        mu: mu.to_vec(),
    })
}

/// Classifies a system given floating-point parameters; frequencies are
/// converted to their exact binary rational values.
pub fn classify(params: &SystemParams) -> Result<Verdict, GaloisError> {
    let mu: Vec<ExactRatio> = params
        .mu
        .iter()
        .map(|&x| from_f64_exact(x).expect("SystemParams guarantees finite frequencies"))
        .collect();
    classify_exact(params.k, params.epsilon, &mu)
}

/// Classifies the sign-indefinite gap system with index `n` and frequencies
/// `(mu1, mu2)`:
///
/// ```text
/// u1' = v1,   v1' = -mu1 u1 - u1 (u1^2 - u2^2)^(2n-1),
/// u2' = -v2,  v2' =  mu2 u2 + u2 (u1^2 - u2^2)^(2n-1).
/// ```
///
/// The canonical change of variables `(u1, u2, v1, v2) ->
/// (-u1, -i u2, -v1, i v2)` maps it to the coupled family with
/// `(m = 2, k = 2n, eps = -1)`, which is then classified.
pub fn classify_gap_system(
    n: u32,
    mu1: &ExactRatio,
    mu2: &ExactRatio,
) -> Result<Verdict, GaloisError> {
    if n == 0 {
        return Err(GaloisError::ZeroGapIndex);
    }
    let k = 2 * n;
    let mut verdict = classify_exact(k, -1, &[mu1.clone(), mu2.clone()])?;
    verdict.trail.insert(
        0,
        trail(
            "gap-system-transformation",
            format!(
                "(u1, u2, v1, v2) -> (-u1, -i*u2, -v1, i*v2) maps the indefinite pair system \
                 with index n = {n} to the coupled family (m = 2, k = {k}, eps = -1)"
            ),
        ),
    );
    Ok(verdict)
}

/// Floating-point convenience wrapper for [`classify_gap_system`].
pub fn classify_gap_system_f64(n: u32, mu1: f64, mu2: f64) -> Result<Verdict, GaloisError> {
    let m1 = from_f64_exact(mu1).ok_or(GaloisError::EmptyFrequencies);
    let m2 = from_f64_exact(mu2).ok_or(GaloisError::EmptyFrequencies);
    classify_gap_system(n, &m1?, &m2?)
}

/// The exact truth table behind [`classify`]: integrable iff `k = 2` or all
/// frequencies agree. Exposed for consistency testing.
pub fn truth_table(k: u32, mu: &[ExactRatio]) -> bool {
    k == 2 || mu.iter().all(|x| x == &mu[0])
}
