//! Rényi entropies of edge spectra and the entropy-based bounds on
//! truncation errors and bond dimensions.
//!
//! Notation used below: `ρ` is the non-increasing list of squared Schmidt
//! coefficients of one edge, `M` a bond dimension, `ε(ρ, M)` the weight
//! beyond the first `M` entries, `S_α` the Rényi entropy (natural log).
//!
//! Lower-side bounds use `α > 1`:
//!
//! * error: `ε(ρ, M) >= 1 - (M e^{-S_α})^{1 - 1/α}`
//! * bond dimension: `min{M | ε(ρ, M) <= δ} >= e^{S_α} (1-δ)^{α/(α-1)}`
//!
//! Upper-side bounds use `0 < α < 1`:
//!
//! * error: `ε(ρ, M) <= (e^{S_α} / (M-1))^{1/α - 1}`, valid for
//!   `α >= ε M / (M - 1 - ε)`
//! * bond dimension: `min{M | ε(ρ, M) <= ε} <= e^{S_α} ε^{-α/(1-α)} + 1`

use serde::{Deserialize, Serialize};

use crate::state::SchmidtSpectrum;
use crate::Error;

/// Tolerance used when deciding whether a computed inequality holds.
pub const CHAIN_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-14;

/// Squared Schmidt coefficients of one edge plus the dimension available to them.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution {
    pub edge: usize,
    pub probs: Vec<f64>,
    pub available_dim: usize,
}

impl EdgeDistribution {
    pub fn new(edge: usize, mut probs: Vec<f64>, available_dim: usize) -> Result<Self, Error> {
        validate(&probs, 1e-10)?;
        for p in &mut probs {
            *p = p.max(0.0);
        }
        probs.sort_by(|a, b| b.total_cmp(a));
        while probs.len() > available_dim.max(1) {
            let last = probs.pop().unwrap();
            if last > 1e-14 {
                return Err(Error::BadDistribution(format!(
                    "support exceeds available dimension {available_dim}"
                )));
            }
        }
        Ok(Self { edge, probs, available_dim })
    }

    pub fn from_spectrum(edge: usize, spectrum: &SchmidtSpectrum, available_dim: usize) -> Result<Self, Error> {
        Self::new(edge, spectrum.weights(), available_dim)
    }

    pub fn truncation_error(&self, m: usize) -> f64 {
        self.probs.iter().skip(m).rev().sum()
    }

    /// Smallest `M >= 1` with `ε(ρ, M) <= budget`.
    pub fn min_dim(&self, budget: f64) -> usize {
        min_dim_for(&self.probs, budget)
    }

    pub fn entropy(&self, alpha: f64) -> Result<f64, Error> {
        renyi_entropy(&self.probs, alpha)
    }
}

pub(crate) fn min_dim_for(probs: &[f64], budget: f64) -> usize {
    let len = probs.len().max(1);
    (1..=len)
        .find(|&m| probs.iter().skip(m).rev().sum::<f64>() <= budget)
        .unwrap_or(len)
}

fn validate(probs: &[f64], tol: f64) -> Result<(), Error> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -1e-14) {
        return Err(Error::BadDistribution(format!("entry {p} is negative or not finite")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::BadDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// `S_α(ρ) = ln(Σ ρ^α) / (1 - α)`, with the Shannon limit at `α = 1`.
pub fn renyi_entropy(probs: &[f64], alpha: f64) -> Result<f64, Error> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    validate(probs, SUM_TOL)?;
    let support = probs.iter().copied().filter(|&p| p > 0.0);
    if alpha == 1.0 {
        return Ok(-support.map(|p| p * p.ln()).sum::<f64>());
    }
    let s: f64 = support.map(|p| p.powf(alpha)).sum();
    Ok(s.ln() / (1.0 - alpha))
}

/// The most spread-out distribution with truncation error `delta` at `m`:
/// `(1-δ)/M` on the first `M` entries and `δ/(D-M)` on the rest.
pub fn extremal_spread(m: usize, delta: f64, d: usize) -> Result<Vec<f64>, Error> {
    if m < 1 || m >= d {
        return Err(Error::BadRange(format!("need 1 <= M < D, got M={m}, D={d}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadRange(format!("need 0 <= delta < 1, got {delta}")));
    }
    let head = (1.0 - delta) / m as f64;
    let tail = delta / (d - m) as f64;
    Ok((0..d).map(|k| if k < m { head } else { tail }).collect())
}

/// The three values of `S_α(ρ) <= S_α(ρ') <= ln M + α/(1-α) ln(1-δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadChain {
    pub alpha: f64,
    pub delta: f64,
    pub entropy: f64,
    pub spread_entropy: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn entropy_upper_via_spread(dist: &EdgeDistribution, m: usize, alpha: f64) -> Result<SpreadChain, Error> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange { alpha, range: "(1, inf)" });
    }
    if m < 1 {
        return Err(Error::BadRange("M must be at least 1".into()));
    }
    let delta = dist.truncation_error(m);
    let entropy = dist.entropy(alpha)?;
    let d = dist.available_dim;
    let spread_entropy = if m >= d {
        (d as f64).ln()
    } else {
        renyi_entropy(&extremal_spread(m, delta.min(1.0 - f64::EPSILON), d)?, alpha)?
    };
    let rhs = (m as f64).ln() + alpha / (1.0 - alpha) * (1.0 - delta).ln();
    let holds = entropy <= spread_entropy + CHAIN_TOL && spread_entropy <= rhs + CHAIN_TOL;
    Ok(SpreadChain { alpha, delta, entropy, spread_entropy, rhs, holds })
}

/// `1 - (M e^{-S})^{1 - 1/α}`, clamped at zero; needs `α > 1`.
pub fn error_lower_bound(entropy: f64, m: usize, alpha: f64) -> Result<f64, Error> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange { alpha, range: "(1, inf)" });
    }
    if m < 1 {
        return Err(Error::BadRange("M must be at least 1".into()));
    }
    let exponent = (1.0 - 1.0 / alpha) * ((m as f64).ln() - entropy);
    Ok((1.0 - exponent.exp()).max(0.0))
}

/// Literal `1 - (M / S)^{1 - 1/α}` reading of the lower error bound, kept
/// only to log where it disagrees with [`error_lower_bound`].
pub fn error_lower_bound_literal(entropy: f64, m: usize, alpha: f64) -> Option<f64> {
    (alpha > 1.0 && entropy > 0.0).then(|| 1.0 - (m as f64 / entropy).powf(1.0 - 1.0 / alpha))
}

/// Smallest admissible `α` for the upper bounds at bond dimension `m` and
/// truncation error `eps`, or `None` when the range is empty.
pub fn alpha_threshold(eps: f64, m: usize) -> Option<f64> {
    let denom = m as f64 - 1.0 - eps;
    (m >= 2 && denom > 0.0).then(|| eps * m as f64 / denom).filter(|&a| a < 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Lower bound on the truncation error / approximation accuracy.
    ErrorLower,
    /// Upper bound on the truncation error.
    ErrorUpper,
    /// Lower bound on the bond dimension needed for a target accuracy.
    BondDimLower,
    /// Upper bound on the bond dimension sufficient for a per-edge budget.
    BondDimUpper,
}

impl BoundKind {
    pub fn side(self) -> Side {
        match self {
            BoundKind::ErrorLower | BoundKind::BondDimLower => Side::Lower,
            BoundKind::ErrorUpper | BoundKind::BondDimUpper => Side::Upper,
        }
    }
}

/// One entropy bound evaluated at one Rényi parameter. Invalid evaluations
/// carry no value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub edge: Option<usize>,
    pub alpha: f64,
    pub side: Side,
    pub kind: BoundKind,
    pub value: Option<f64>,
    pub valid: bool,
    pub reason: String,
}

impl BoundEvaluation {
    fn valid(kind: BoundKind, alpha: f64, value: f64, reason: impl Into<String>) -> Self {
        Self { edge: None, alpha, side: kind.side(), kind, value: Some(value), valid: true, reason: reason.into() }
    }

    fn invalid(kind: BoundKind, alpha: f64, reason: impl Into<String>) -> Self {
        Self { edge: None, alpha, side: kind.side(), kind, value: None, valid: false, reason: reason.into() }
    }

    pub fn with_edge(mut self, edge: usize) -> Self {
        self.edge = Some(edge);
        self
    }
}

/// `(e^S / (M-1))^{1/α - 1}`, flagged invalid outside `ε M/(M-1-ε) <= α < 1`.
pub fn error_upper_bound(entropy: f64, m: usize, alpha: f64, eps_hint: f64) -> BoundEvaluation {
    let kind = BoundKind::ErrorUpper;
    if !(alpha > 0.0 && alpha < 1.0) {
        return BoundEvaluation::invalid(kind, alpha, "alpha must lie in (0, 1)");
    }
    if m < 2 {
        return BoundEvaluation::invalid(kind, alpha, format!("bond dimension {m} < 2"));
    }
    match alpha_threshold(eps_hint, m) {
        None => BoundEvaluation::invalid(kind, alpha, format!("empty alpha range for M={m}, eps={eps_hint}")),
        Some(t) if alpha < t => BoundEvaluation::invalid(
            kind,
            alpha,
            format!("alpha below threshold {t} for M={m}, eps={eps_hint}"),
        ),
        Some(t) => {
            let value = ((1.0 / alpha - 1.0) * (entropy - ((m - 1) as f64).ln())).exp();
            BoundEvaluation::valid(kind, alpha, value, format!("alpha >= threshold {t}"))
        }
    }
}

/// `e^S ε^{-α/(1-α)} + 1`.
pub fn bond_dim_upper_bound(entropy: f64, eps: f64, alpha: f64) -> Result<f64, Error> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha, range: "(0, 1)" });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEps(eps));
    }
    Ok((entropy - alpha / (1.0 - alpha) * eps.ln()).exp() + 1.0)
}

/// `e^S (1-δ)^{α/(α-1)}`.
pub fn bond_dim_lower_bound(entropy: f64, delta: f64, alpha: f64) -> Result<f64, Error> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange { alpha, range: "(1, inf)" });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadRange(format!("need 0 <= delta < 1, got {delta}")));
    }
    Ok((entropy + alpha / (alpha - 1.0) * (1.0 - delta).ln()).exp())
}

/// Head-concentrated distribution with `ε(ρ̃, M) = eps` and `ρ̃_M = p`:
/// `1 - ε - (M-1)p`, then `M-1` entries `p`, then as many `p` as fit in
/// `eps` plus one remainder entry.
pub fn majorizing_extremal(m: usize, eps: f64, p: f64) -> Result<Vec<f64>, Error> {
    if m < 1 || !(p > 0.0) || !(eps >= 0.0) {
        return Err(Error::BadRange(format!("need M >= 1, p > 0, eps >= 0 (M={m}, p={p}, eps={eps})")));
    }
    let head = 1.0 - eps - (m - 1) as f64 * p;
    if head < p - 1e-15 {
        return Err(Error::Infeasible(format!(
            "leading entry {head} would be smaller than p={p}"
        )));
    }
    let mut out = vec![head];
    out.extend(std::iter::repeat_n(p, m - 1));
    let full = (eps / p * (1.0 + 1e-12)).floor() as usize;
    out.extend(std::iter::repeat_n(p, full));
    let rest = eps - full as f64 * p;
    if rest > 1e-14 {
        out.push(rest);
    }
    Ok(out)
}

/// True when `a` majorizes `b` (all sorted partial sums of `a` dominate).
pub fn majorizes(a: &[f64], b: &[f64]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let len = a.len().max(b.len());
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..len {
        sa += a.get(k).copied().unwrap_or(0.0);
        sb += b.get(k).copied().unwrap_or(0.0);
        if sa < sb - CHAIN_TOL {
            return false;
        }
    }
    true
}

/// Best entropy bound over an α grid: the largest lower or smallest upper
/// error bound among valid grid points, ties broken towards smaller α.
pub fn optimize_alpha(
    dist: &EdgeDistribution,
    m: usize,
    side: Side,
    grid: &[f64],
) -> Result<BoundEvaluation, Error> {
    let mut best: Option<BoundEvaluation> = None;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for &alpha in &sorted {
        let eval = match side {
            Side::Lower => {
                if !(alpha > 1.0) {
                    continue;
                }
                let s = dist.entropy(alpha)?;
                let v = error_lower_bound(s, m, alpha)?;
                BoundEvaluation::valid(BoundKind::ErrorLower, alpha, v, "alpha > 1")
            }
            Side::Upper => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    continue;
                }
                let s = dist.entropy(alpha)?;
                let e = error_upper_bound(s, m, alpha, dist.truncation_error(m));
                if !e.valid {
                    continue;
                }
                e
            }
        };
        let better = match (&best, eval.value) {
            (None, _) => true,
            (Some(b), Some(v)) => {
                let bv = b.value.unwrap();
                match side {
                    Side::Lower => v > bv + TIE_TOL,
                    Side::Upper => v < bv - TIE_TOL,
                }
            }
            _ => false,
        };
        if better {
            best = Some(eval);
        }
    }
    best.map(|b| b.with_edge(dist.edge)).ok_or(Error::NoValidAlpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn uniform_pair_entropy_is_ln2() {
        for a in [0.25, 0.5, 1.0, 2.0, 7.0] {
            assert!((renyi_entropy(&[0.5, 0.5], a).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
            assert_eq!(renyi_entropy(&[1.0], a).unwrap(), 0.0);
        }
    }

    #[test]
    fn collision_entropy() {
        let s = renyi_entropy(&[0.9, 0.1], 2.0).unwrap();
        assert!((s - 0.19845093872383832).abs() < 1e-15);
    }

    #[test]
    fn entropy_errors() {
        assert!(matches!(renyi_entropy(&[0.5, 0.5], 0.0), Err(Error::NonpositiveAlpha(_))));
        assert!(matches!(renyi_entropy(&[0.5, 0.6], 2.0), Err(Error::BadDistribution(_))));
        assert!(matches!(renyi_entropy(&[1.2, -0.2], 2.0), Err(Error::BadDistribution(_))));
    }

    #[test]
    fn zeros_are_skipped_below_one() {
        let s = renyi_entropy(&[0.5, 0.5, 0.0], 0.5).unwrap();
        assert!((s - LN2).abs() < 1e-15);
    }

    #[test]
    fn spread_examples() {
        let r = extremal_spread(2, 0.1, 4).unwrap();
        let want = [0.45, 0.45, 0.05, 0.05];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-16);
        }
        assert_eq!(extremal_spread(3, 0.0, 5).unwrap()[3], 0.0);
        assert_eq!(extremal_spread(1, 0.5, 2).unwrap(), vec![0.5, 0.5]);
        assert!(extremal_spread(2, 0.1, 2).is_err());
        assert!(extremal_spread(1, 1.0, 3).is_err());
    }

    #[test]
    fn ghz_spread_chain() {
        let dist = EdgeDistribution::new(1, vec![0.5, 0.5], 2).unwrap();
        let c = entropy_upper_via_spread(&dist, 1, 2.0).unwrap();
        assert!((c.entropy - LN2).abs() < 1e-15);
        assert!((c.spread_entropy - LN2).abs() < 1e-15);
        assert!((c.rhs - 1.3862943611198906).abs() < 1e-15);
        assert!(c.holds);
        assert!(entropy_upper_via_spread(&dist, 1, 1.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!(error_lower_bound(3f64.ln(), 3, 2.0).unwrap().abs() < 1e-15);
        let v = error_lower_bound(LN2, 1, 2.0).unwrap();
        assert!((v - 0.2928932188134524).abs() < 1e-15);
        assert!(error_lower_bound(LN2, 1, 0.5).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let e = error_upper_bound(LN2, 2, 0.5, 0.0);
        assert!(e.valid);
        assert!((e.value.unwrap() - 2.0).abs() < 1e-14);

        let s_half = 2.0 * (0.7f64.sqrt() + 0.2f64.sqrt() + 0.1f64.sqrt()).ln();
        assert!((s_half - 0.9401339895397859).abs() < 1e-14);
        let e = error_upper_bound(s_half, 2, 0.5, 0.1);
        assert!(e.valid);
        assert!((e.value.unwrap() - 2.5603244520423254).abs() < 1e-13);

        let e = error_upper_bound(s_half, 2, 0.2, 0.1);
        assert!(!e.valid && e.value.is_none());
        assert!(!error_upper_bound(s_half, 1, 0.5, 0.0).valid);
    }

    #[test]
    fn bond_dim_upper_examples() {
        assert!((bond_dim_upper_bound(LN2, 0.01, 0.5).unwrap() - 201.0).abs() < 1e-10);
        let near_one = bond_dim_upper_bound(LN2, 1.0 - 1e-12, 0.5).unwrap();
        assert!((near_one - 3.0).abs() < 1e-9);
        assert!(matches!(bond_dim_upper_bound(LN2, 0.0, 0.5), Err(Error::BadEps(_))));
        assert!(matches!(bond_dim_upper_bound(LN2, 0.1, 1.5), Err(Error::AlphaOutOfRange { .. })));
    }

    #[test]
    fn majorizing_examples() {
        let r = majorizing_extremal(2, 0.2, 0.2).unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.6, 0.2, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
        let r = majorizing_extremal(3, 0.0, 0.1).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[0] - 0.8).abs() < 1e-15);
        assert!(matches!(majorizing_extremal(3, 0.2, 0.3), Err(Error::Infeasible(_))));
    }

    #[test]
    fn optimize_examples() {
        let dist = EdgeDistribution::new(1, vec![0.5, 0.5], 2).unwrap();
        let best = optimize_alpha(&dist, 2, Side::Lower, &[2.0, 4.0, 1.5]).unwrap();
        assert_eq!(best.alpha, 1.5);
        assert_eq!(best.value, Some(0.0));

        let best = optimize_alpha(&dist, 1, Side::Lower, &[1.5, 2.0, 8.0]).unwrap();
        assert_eq!(best.alpha, 8.0);
        assert!((best.value.unwrap() - (1.0 - 2f64.powf(-7.0 / 8.0))).abs() < 1e-15);
        assert!((best.value.unwrap() - 0.45474613366737116).abs() < 1e-15);

        let dist = EdgeDistribution::new(1, vec![0.7, 0.2, 0.1], 4).unwrap();
        assert!(matches!(
            optimize_alpha(&dist, 2, Side::Upper, &[0.1, 0.2]),
            Err(Error::NoValidAlpha)
        ));
        let best = optimize_alpha(&dist, 2, Side::Upper, &[0.1, 0.5, 0.9]).unwrap();
        assert!(best.valid && best.value.unwrap() >= 0.1);
    }

    #[test]
    fn majorization_order() {
        assert!(majorizes(&[1.0], &[0.5, 0.5]));
        assert!(!majorizes(&[0.5, 0.5], &[1.0]));
        assert!(majorizes(&[0.6, 0.3, 0.1], &[0.5, 0.3, 0.2]));
    }

    #[test]
    fn min_dim_examples() {
        let bell = EdgeDistribution::new(1, vec![0.5, 0.5], 2).unwrap();
        assert_eq!(bell.min_dim(0.4), 2);
        assert_eq!(bell.min_dim(0.6), 1);
        let three = EdgeDistribution::new(1, vec![0.7, 0.2, 0.1], 4).unwrap();
        assert_eq!(three.min_dim(0.25), 2);
        assert_eq!(three.min_dim(0.0), 3);
    }
}
