//! Exact-rational exponent algebra for kinetic-transport Strichartz pairs.
//!
//! Every exponent is carried as its reciprocal in `[0, 1]`, so `∞` is the
//! reciprocal `0` and Hölder conjugation is `1/p ↦ 1 − 1/p`. Nothing in this
//! module touches floating point: the feasibility boundaries are measure-zero
//! sets and only exact comparisons are meaningful.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Exact rational used for every exponent and exponent-derived quantity.
pub type Rat = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error("reciprocal {name} = {value} lies outside [0, 1]")]
    ReciprocalOutOfRange { name: &'static str, value: Rat },
    #[error("dimension N = {0} is not supported here")]
    UnsupportedDimension(u32),
    #[error("{name} = {value} is outside the admissible range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: Rat,
        range: String,
    },
    #[error("triplet {0} is an endpoint; the endpoint Strichartz estimate fails")]
    Endpoint(ExponentTriplet),
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
    #[error("lattice denominator must be positive")]
    ZeroDenominator,
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn int(n: i64) -> Rat {
    Rat::from_integer(n)
}

/// Parses `a/b`, a plain integer, or a decimal literal such as `-0.5`.
pub fn parse_rational(text: &str) -> Result<Rat, ExponentError> {
    let s = text.trim();
    let err = || ExponentError::Parse(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| err())?;
        let d: i64 = den.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(rat(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(int(n));
    }
    // Terminating decimals only; they are exact in base ten.
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').ok_or_else(err)?;
    if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let whole: i64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| err())?
    };
    let scale = 10_i64.pow(frac.len() as u32);
    let frac: i64 = frac.parse().map_err(|_| err())?;
    let value = rat(whole * scale + frac, scale);
    Ok(if neg { -value } else { value })
}

/// Parses an exponent (`p`, not `1/p`) and returns its reciprocal.
/// Accepts `inf`/`infinity`/`∞` for the `L^∞` endpoint.
pub fn parse_exponent(text: &str) -> Result<Rat, ExponentError> {
    let s = text.trim();
    if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
        return Ok(Rat::zero());
    }
    let value = parse_rational(s)?;
    if value < Rat::one() {
        return Err(ExponentError::ParameterOutOfRange {
            name: "exponent",
            value,
            range: "[1, ∞]".into(),
        });
    }
    Ok(value.recip())
}

/// Formats a reciprocal back as an exponent, `inf` for zero.
pub fn format_exponent(inv: Rat) -> String {
    if inv.is_zero() {
        "inf".to_string()
    } else {
        inv.recip().to_string()
    }
}

pub fn to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_unit(name: &'static str, value: Rat) -> Result<Rat, ExponentError> {
    if value.is_negative() || value > Rat::one() {
        Err(ExponentError::ReciprocalOutOfRange { name, value })
    } else {
        Ok(value)
    }
}

fn check_dimension(n: u32) -> Result<i64, ExponentError> {
    if (1..=3).contains(&n) {
        Ok(n as i64)
    } else {
        Err(ExponentError::UnsupportedDimension(n))
    }
}

/// `(1/q, 1/r, 1/p)` for the mixed norm `L^q_t L^r_x L^p_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExponentTriplet {
    inv_q: Rat,
    inv_r: Rat,
    inv_p: Rat,
}

impl ExponentTriplet {
    pub fn new(inv_q: Rat, inv_r: Rat, inv_p: Rat) -> Result<Self, ExponentError> {
        Ok(Self {
            inv_q: check_unit("1/q", inv_q)?,
            inv_r: check_unit("1/r", inv_r)?,
            inv_p: check_unit("1/p", inv_p)?,
        })
    }

    /// Builds a triplet from exponent strings such as `5`, `5/2`, `inf`.
    pub fn parse(q: &str, r: &str, p: &str) -> Result<Self, ExponentError> {
        Self::new(parse_exponent(q)?, parse_exponent(r)?, parse_exponent(p)?)
    }

    pub fn inv_q(&self) -> Rat {
        self.inv_q
    }

    pub fn inv_r(&self) -> Rat {
        self.inv_r
    }

    pub fn inv_p(&self) -> Rat {
        self.inv_p
    }

    /// Reciprocal of the harmonic mean `HM(p, r)`.
    pub fn inv_a(&self) -> Rat {
        harmonic_mean(self.inv_p, self.inv_r)
    }

    /// Hölder conjugate of every component.
    pub fn conjugate(&self) -> Self {
        let one = Rat::one();
        Self {
            inv_q: one - self.inv_q,
            inv_r: one - self.inv_r,
            inv_p: one - self.inv_p,
        }
    }
}

impl fmt::Display for ExponentTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(q, r, p) = ({}, {}, {})",
            format_exponent(self.inv_q),
            format_exponent(self.inv_r),
            format_exponent(self.inv_p)
        )
    }
}

impl Serialize for ExponentTriplet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExponentTriplet", 3)?;
        st.serialize_field("inv_q", &self.inv_q.to_string())?;
        st.serialize_field("inv_r", &self.inv_r.to_string())?;
        st.serialize_field("inv_p", &self.inv_p.to_string())?;
        st.end()
    }
}

/// `1/a = (1/p + 1/r) / 2`.
pub fn harmonic_mean(inv_p: Rat, inv_r: Rat) -> Rat {
    (inv_p + inv_r) / int(2)
}

/// One named inequality (or equality) of the admissibility definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `1/q = (N/2)(1/p − 1/r)`.
    Scaling,
    /// `p*(a) ≤ p`.
    PLowerBound,
    /// `p ≤ a`.
    PUpperBound,
    /// `a ≤ r`.
    RLowerBound,
    /// `r ≤ r*(a)`.
    RUpperBound,
    /// The excluded one-dimensional triplet `(a, ∞, a/2)`.
    OneDimensionalException,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub is_endpoint: bool,
    pub violated_conditions: Vec<Condition>,
    #[serde(serialize_with = "ser_exponent")]
    pub a: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub inv_a: Rat,
}

fn ser_rat<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

// `a` is stored as its reciprocal like every other exponent.
fn ser_exponent<S: Serializer>(inv: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_exponent(*inv))
}

/// Reciprocals of the sharp bounds `p*(a)` and `r*(a)`.
pub fn sharp_bounds(inv_a: Rat, n: u32) -> Result<(Rat, Rat), ExponentError> {
    let nn = int(check_dimension(n)?);
    let one = Rat::one();
    // a ≥ (N+1)/N  ⇔  1/a ≤ N/(N+1)
    if inv_a <= nn / (nn + one) {
        Ok(((nn + one) / nn * inv_a, (nn - one) / nn * inv_a))
    } else {
        Ok((one, int(2) * inv_a - one))
    }
}

/// Checks the kinetic-transport admissibility window for `t` in dimension `n`.
pub fn kt_admissible(t: &ExponentTriplet, n: u32) -> Result<AdmissibilityReport, ExponentError> {
    let nn = int(check_dimension(n)?);
    let inv_a = t.inv_a();
    let (inv_pstar, inv_rstar) = sharp_bounds(inv_a, n)?;
    let mut violated = Vec::new();

    if t.inv_q != nn / int(2) * (t.inv_p - t.inv_r) {
        violated.push(Condition::Scaling);
    }
    if t.inv_p > inv_pstar {
        violated.push(Condition::PLowerBound);
    }
    if t.inv_p < inv_a {
        violated.push(Condition::PUpperBound);
    }
    if t.inv_r > inv_a {
        violated.push(Condition::RLowerBound);
    }
    if t.inv_r < inv_rstar {
        violated.push(Condition::RUpperBound);
    }
    if n == 1 && t.inv_q == inv_a && t.inv_r.is_zero() && t.inv_p == int(2) * inv_a {
        violated.push(Condition::OneDimensionalException);
    }

    let one = Rat::one();
    let endpoint_range = !inv_a.is_zero() && inv_a <= nn / (nn + one);
    let is_endpoint =
        endpoint_range && t.inv_q == inv_a && t.inv_r == inv_rstar && t.inv_p == inv_pstar;

    Ok(AdmissibilityReport {
        admissible: violated.is_empty(),
        is_endpoint,
        violated_conditions: violated,
        a: inv_a,
        inv_a,
    })
}

/// Like [`kt_admissible`], but endpoint triplets are refused. This is the
/// gate used by every operation that relies on a Strichartz estimate.
pub fn require_strichartz_pair(t: &ExponentTriplet, n: u32) -> Result<(), ExponentError> {
    let report = kt_admissible(t, n)?;
    if report.is_endpoint {
        return Err(ExponentError::Endpoint(*t));
    }
    if !report.admissible {
        return Err(ExponentError::ParameterOutOfRange {
            name: "triplet",
            value: t.inv_a(),
            range: format!("KT-admissible (violated {:?})", report.violated_conditions),
        });
    }
    Ok(())
}

/// Solution-space triplet together with the primed dual triplet that carries
/// the collision source term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripletPair {
    pub primal: ExponentTriplet,
    /// `(1/q̃′, 1/r̃′, 1/p̃′)`.
    pub dual_primed: ExponentTriplet,
    #[serde(serialize_with = "ser_rat")]
    pub gamma: Rat,
    /// `1/a` with `a = HM(p, r) = HM(p̃′, r̃′)`.
    #[serde(serialize_with = "ser_rat")]
    pub inv_a: Rat,
    pub primal_report: AdmissibilityReport,
    /// Admissibility of the conjugated dual `(q̃, r̃, p̃)` against the full
    /// window. Only its scaling relation is needed by the contraction
    /// argument, so a window violation is reported rather than rejected.
    pub dual_report: AdmissibilityReport,
}

impl TripletPair {
    /// `(q̃, r̃, p̃)`.
    pub fn dual(&self) -> ExponentTriplet {
        self.dual_primed.conjugate()
    }
}

fn open_interval(
    name: &'static str,
    value: Rat,
    lo: Rat,
    hi: Rat,
) -> Result<(), ExponentError> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(ExponentError::ParameterOutOfRange {
            name,
            value,
            range: format!("({lo}, {hi})"),
        })
    }
}

fn build_pair(
    primal: ExponentTriplet,
    dual_primed: ExponentTriplet,
    gamma: Rat,
    n: u32,
) -> Result<TripletPair, ExponentError> {
    let primal_report = kt_admissible(&primal, n)?;
    if primal_report.is_endpoint {
        return Err(ExponentError::Endpoint(primal));
    }
    let dual_report = kt_admissible(&dual_primed.conjugate(), n)?;
    Ok(TripletPair {
        primal,
        dual_primed,
        gamma,
        inv_a: primal.inv_a(),
        primal_report,
        dual_report,
    })
}

/// Triplets of the small-data global theory, `γ = 2 − N`, `a = N`.
pub fn theorem1_triplets(inv_p: Rat, n: u32) -> Result<TripletPair, ExponentError> {
    if n != 2 && n != 3 {
        return Err(ExponentError::UnsupportedDimension(n));
    }
    let nn = int(n as i64);
    let one = Rat::one();
    open_interval("1/p", inv_p, one / nn, (nn + one) / (nn * nn))?;
    let gamma = int(2) - nn;

    let inv_q = nn * inv_p - one;
    let inv_r = int(2) / nn - inv_p;
    let primal = ExponentTriplet::new(inv_q, inv_r, inv_p)?;

    let dual_primed = ExponentTriplet::new(
        int(2) * inv_q,
        int(2) * inv_r,
        int(2) * inv_p - one - gamma / nn,
    )?;
    let pair = build_pair(primal, dual_primed, gamma, n)?;
    debug_assert_eq!(pair.inv_a, one / nn);
    Ok(pair)
}

/// Triplets of the large-data local theory, `−N < γ < 2 − N`,
/// `1/2 < α < (N+1)/(2N)`.
///
/// The dual time exponent comes from the scaling relation of the dual
/// triplet, which leaves `1/q̃′ − 2/q = β` as the Hölder gain in time.
pub fn theorem2_triplets(alpha: Rat, gamma: Rat, n: u32) -> Result<TripletPair, ExponentError> {
    if n != 2 && n != 3 {
        return Err(ExponentError::UnsupportedDimension(n));
    }
    let nn = int(n as i64);
    let one = Rat::one();
    let two = int(2);
    open_interval("gamma", gamma, -nn, two - nn)?;
    open_interval("alpha", alpha, rat(1, 2), (nn + one) / (two * nn))?;

    let s = (gamma + nn) / nn;
    let inv_q = (two * alpha - one) * (gamma + nn) / two;
    let inv_r = (one - alpha) * s;
    let inv_p = alpha * s;
    let primal = ExponentTriplet::new(inv_q, inv_r, inv_p)?;

    let inv_pt_primed = two * inv_p - one - gamma / nn;
    let inv_rt_primed = two * inv_r;
    let inv_qt = nn / two * ((one - inv_pt_primed) - (one - inv_rt_primed));
    let dual_primed = ExponentTriplet::new(one - inv_qt, inv_rt_primed, inv_pt_primed)?;

    // Strict time condition: 2/q < 1/q̃′ < 1.
    let inv_qt_primed = one - inv_qt;
    if !(two * inv_q < inv_qt_primed && inv_qt_primed < one) {
        return Err(ExponentError::ParameterOutOfRange {
            name: "1/q̃′",
            value: inv_qt_primed,
            range: format!("({}, 1)", two * inv_q),
        });
    }
    let pair = build_pair(primal, dual_primed, gamma, n)?;
    debug_assert_eq!(pair.inv_a, s / two);
    Ok(pair)
}

/// Time-Hölder gain `((2 − N) − γ)/2` of the local theory.
pub fn beta(gamma: Rat, n: u32) -> Result<Rat, ExponentError> {
    let nn = int(check_dimension(n)? as i64);
    let two = int(2);
    open_interval("gamma", gamma, -nn, two - nn)?;
    Ok(((two - nn) - gamma) / two)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// Reduced system of the global theory (both sum relations are equalities).
    Equality,
    /// Reduced system of the local theory (`1/p + 1/r < 2/N`).
    Strict,
}

impl FromStr for ScanMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equality" => Ok(Self::Equality),
            "strict" => Ok(Self::Strict),
            other => Err(format!("unknown mode `{other}` (expected equality|strict)")),
        }
    }
}

/// One lattice point of a feasible region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeasiblePoint {
    pub inv_p: Rat,
    pub inv_r: Rat,
    pub inv_q: Rat,
    pub inv_a: Rat,
}

impl FeasiblePoint {
    fn from_pair(inv_p: Rat, inv_r: Rat, n: i64) -> Self {
        let nn = int(n);
        Self {
            inv_p,
            inv_r,
            inv_q: nn / int(2) * (inv_p - inv_r),
            inv_a: harmonic_mean(inv_p, inv_r),
        }
    }
}

pub const DEFAULT_DENOMINATOR: i64 = 120;

/// Tests one `(1/p, 1/r)` pair against the reduced condition system.
pub fn satisfies_reduced_system(inv_p: Rat, inv_r: Rat, gamma: Rat, n: u32, mode: ScanMode) -> bool {
    let nn = int(n as i64);
    let one = Rat::one();
    let two = int(2);
    let sum = inv_p + inv_r;
    let gap = inv_p - inv_r;

    // 1/p + 1/r = 1 + γ/N: the velocity exponent relation combined with the
    // x-Hölder doubling and the harmonic-mean matching.
    if sum != one + gamma / nn {
        return false;
    }
    // Time relation: equality for the global theory, strict room for T^β.
    let time_ok = match mode {
        ScanMode::Equality => sum == two / nn,
        ScanMode::Strict => sum < two / nn,
    };
    if !time_ok {
        return false;
    }
    // 1/q < 1/2 with 1/q > 0.
    if !(gap > Rat::zero() && gap < one / nn) {
        return false;
    }
    // Dual scaling exponent positive.
    if !(gap < (one + gamma / nn) / two) {
        return false;
    }
    // x-Hölder needs r ≥ 2.
    if inv_r > rat(1, 2) {
        return false;
    }
    // Primal triplet in the admissibility window and not an endpoint.
    let inv_q = nn / two * gap;
    match ExponentTriplet::new(inv_q, inv_r, inv_p).and_then(|t| kt_admissible(&t, n)) {
        Ok(report) => report.admissible && !report.is_endpoint,
        Err(_) => false,
    }
}

/// Brute-force scan of the lattice `{k/D : 0 < k < D}²` of `(1/p, 1/r)`.
pub fn feasibility_scan(
    gamma: Rat,
    n: u32,
    mode: ScanMode,
    denominator: i64,
) -> Result<Vec<FeasiblePoint>, ExponentError> {
    check_dimension(n)?;
    if denominator <= 0 {
        return Err(ExponentError::ZeroDenominator);
    }
    let mut out = Vec::new();
    for kp in 1..denominator {
        let inv_p = rat(kp, denominator);
        for kr in 1..denominator {
            let inv_r = rat(kr, denominator);
            if satisfies_reduced_system(inv_p, inv_r, gamma, n, mode) {
                out.push(FeasiblePoint::from_pair(inv_p, inv_r, n as i64));
            }
        }
    }
    Ok(out)
}

/// Lattice points of the closed-form parameter sets: the global-theory line
/// `1/r = 2/N − 1/p`, `1/N < 1/p < (N+1)/N²` when `γ = 2 − N`, or the
/// local-theory family `1/p = α(γ+N)/N`, `1/r = (1−α)(γ+N)/N`,
/// `1/2 < α < (N+1)/(2N)` when `−N < γ < 2 − N`.
pub fn closed_form_region(
    gamma: Rat,
    n: u32,
    mode: ScanMode,
    denominator: i64,
) -> Result<Vec<FeasiblePoint>, ExponentError> {
    check_dimension(n)?;
    if denominator <= 0 {
        return Err(ExponentError::ZeroDenominator);
    }
    let nn = int(n as i64);
    let one = Rat::one();
    let two = int(2);
    let mut out = Vec::new();
    match mode {
        ScanMode::Equality => {
            if gamma != two - nn || n < 2 {
                return Ok(out);
            }
            for kp in 1..denominator {
                let inv_p = rat(kp, denominator);
                let inv_r = two / nn - inv_p;
                let on_lattice = (inv_r * int(denominator)).is_integer();
                if inv_p > one / nn && inv_p < (nn + one) / (nn * nn) && on_lattice {
                    out.push(FeasiblePoint::from_pair(inv_p, inv_r, n as i64));
                }
            }
        }
        ScanMode::Strict => {
            if !(gamma > -nn && gamma < two - nn) || n < 2 {
                return Ok(out);
            }
            let s = (gamma + nn) / nn;
            for kp in 1..denominator {
                let inv_p = rat(kp, denominator);
                let alpha = inv_p / s;
                let inv_r = (one - alpha) * s;
                let on_lattice = (inv_r * int(denominator)).is_integer();
                if alpha > rat(1, 2) && alpha < (nn + one) / (two * nn) && on_lattice {
                    out.push(FeasiblePoint::from_pair(inv_p, inv_r, n as i64));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(q: &str, r: &str, p: &str) -> ExponentTriplet {
        ExponentTriplet::parse(q, r, p).unwrap()
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_eq!(harmonic_mean(rat(1, 2), rat(1, 2)), rat(1, 2));
        assert_eq!(harmonic_mean(rat(7, 12), rat(5, 12)), rat(1, 2));
        assert_eq!(harmonic_mean(rat(3, 5), rat(2, 5)), rat(1, 2));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("5/2").unwrap(), rat(5, 2));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_exponent("inf").unwrap(), Rat::zero());
        assert!(parse_exponent("1/2").is_err());
    }

    #[test]
    fn reciprocals_outside_unit_interval_rejected() {
        assert!(ExponentTriplet::new(rat(3, 2), rat(1, 2), rat(1, 2)).is_err());
        assert!(ExponentTriplet::new(rat(-1, 2), rat(1, 2), rat(1, 2)).is_err());
    }

    #[test]
    fn admissible_interior_triplet_in_two_dimensions() {
        let report = kt_admissible(&t("5", "5/2", "5/3"), 2).unwrap();
        assert!(report.admissible);
        assert!(!report.is_endpoint);
        assert_eq!(report.a, rat(1, 2));
    }

    #[test]
    fn zero_gap_triplets_admissible() {
        for a in ["1", "3/2", "2", "7", "inf"] {
            let report = kt_admissible(&t("inf", a, a), 2).unwrap();
            assert!(report.admissible, "a = {a}: {report:?}");
        }
    }

    #[test]
    fn endpoint_in_three_dimensions_is_flagged() {
        // a = 2: p* = 3a/4 = 3/2, r* = 3a/2 = 3.
        let report = kt_admissible(&t("2", "3", "3/2"), 3).unwrap();
        assert!(report.admissible);
        assert!(report.is_endpoint);
        assert!(require_strichartz_pair(&t("2", "3", "3/2"), 3).is_err());
    }

    #[test]
    fn one_dimensional_exception() {
        // N = 1, a = 2: (2, ∞, 1). p*(2) = 1, r*(2) = ∞.
        let report = kt_admissible(&t("2", "inf", "1"), 1).unwrap();
        assert!(!report.admissible);
        assert_eq!(
            report.violated_conditions,
            vec![Condition::OneDimensionalException]
        );
    }

    #[test]
    fn scaling_violation_named() {
        let report = kt_admissible(&t("4", "5/2", "5/3"), 2).unwrap();
        assert!(!report.admissible);
        assert!(report.violated_conditions.contains(&Condition::Scaling));
    }

    #[test]
    fn critical_pair_examples() {
        let pair = theorem1_triplets(rat(3, 5), 2).unwrap();
        assert_eq!(
            (pair.primal.inv_q(), pair.primal.inv_r(), pair.primal.inv_p()),
            (rat(1, 5), rat(2, 5), rat(3, 5))
        );
        assert_eq!(
            (
                pair.dual_primed.inv_q(),
                pair.dual_primed.inv_r(),
                pair.dual_primed.inv_p()
            ),
            (rat(2, 5), rat(4, 5), rat(1, 5))
        );
        assert_eq!(pair.inv_a, rat(1, 2));

        let pair = theorem1_triplets(rat(2, 5), 3).unwrap();
        assert_eq!(
            (pair.primal.inv_q(), pair.primal.inv_r(), pair.primal.inv_p()),
            (rat(1, 5), rat(4, 15), rat(2, 5))
        );
        assert_eq!(pair.inv_a, rat(1, 3));
        assert!(pair.dual_report.admissible);

        assert!(theorem1_triplets(rat(1, 2), 2).is_err());
        assert!(theorem1_triplets(rat(3, 4), 2).is_err());
    }

    #[test]
    fn critical_dual_window_reported() {
        // p̃ = 5/4 is below p*(2) = 4/3: the dual meets the scaling relation
        // but not the full window, which the report records.
        let pair = theorem1_triplets(rat(3, 5), 2).unwrap();
        assert!(!pair.dual_report.admissible);
        assert_eq!(
            pair.dual_report.violated_conditions,
            vec![Condition::PLowerBound, Condition::RUpperBound]
        );
        let pair = theorem1_triplets(rat(2, 3), 2).unwrap();
        assert!(pair.dual_report.admissible);
    }

    #[test]
    fn subcritical_pair_examples() {
        let pair = theorem2_triplets(rat(3, 5), int(-2), 3).unwrap();
        assert_eq!(
            (pair.primal.inv_q(), pair.primal.inv_r(), pair.primal.inv_p()),
            (rat(1, 10), rat(2, 15), rat(1, 5))
        );
        assert_eq!(pair.inv_a, rat(1, 6));
        assert!(pair.primal_report.admissible);
        assert!(pair.dual_report.admissible);

        let pair = theorem2_triplets(rat(11, 20), int(-1), 2).unwrap();
        assert_eq!(
            (pair.primal.inv_q(), pair.primal.inv_r(), pair.primal.inv_p()),
            (rat(1, 20), rat(9, 40), rat(11, 40))
        );
        assert_eq!(pair.inv_a, rat(1, 4));
        assert!(pair.dual_report.admissible);

        assert!(theorem2_triplets(rat(1, 2), int(-2), 3).is_err());
        assert!(theorem2_triplets(rat(1, 2), int(-1), 2).is_err());
        assert!(theorem2_triplets(rat(3, 5), int(-1), 3).is_err());
    }

    #[test]
    fn subcritical_time_gain_equals_beta() {
        for (alpha, gamma, n) in [
            (rat(3, 5), int(-2), 3),
            (rat(11, 20), int(-1), 2),
            (rat(5, 8), rat(-1, 2), 2),
        ] {
            let pair = theorem2_triplets(alpha, gamma, n).unwrap();
            let gain = pair.dual_primed.inv_q() - int(2) * pair.primal.inv_q();
            assert_eq!(gain, beta(gamma, n).unwrap());
        }
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(int(-2), 3).unwrap(), rat(1, 2));
        assert_eq!(beta(int(-1), 2).unwrap(), rat(1, 2));
        assert_eq!(beta(rat(-1, 2), 2).unwrap(), rat(1, 4));
        assert!(beta(int(-1), 3).is_err());
        assert!(beta(int(-3), 3).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let scan = feasibility_scan(Rat::zero(), 2, ScanMode::Equality, 120).unwrap();
        assert!(!scan.is_empty());
        for pt in &scan {
            assert!(pt.inv_p > rat(1, 2) && pt.inv_p < rat(3, 4));
            assert_eq!(pt.inv_r, Rat::one() - pt.inv_p);
            assert_eq!(pt.inv_a, rat(1, 2));
        }
        assert_eq!(
            scan,
            closed_form_region(Rat::zero(), 2, ScanMode::Equality, 120).unwrap()
        );
        assert!(feasibility_scan(Rat::zero(), 3, ScanMode::Equality, 120)
            .unwrap()
            .is_empty());

        let strict = feasibility_scan(int(-2), 3, ScanMode::Strict, 120).unwrap();
        assert!(!strict.is_empty());
        assert_eq!(
            strict,
            closed_form_region(int(-2), 3, ScanMode::Strict, 120).unwrap()
        );
    }

    #[test]
    fn scan_mode_parse() {
        assert_eq!("strict".parse::<ScanMode>().unwrap(), ScanMode::Strict);
        assert!("loose".parse::<ScanMode>().is_err());
    }
}
