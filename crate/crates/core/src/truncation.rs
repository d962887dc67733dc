//! Truncating exact TTNS to prescribed bond dimensions.
//!
//! Two schemes are provided:
//!
//! * [`truncate_projector`] slices every bond of the exact TTNS to its first
//!   `M_i` Schmidt directions at once. The result is the unnormalized state
//!   `P_1 P_2 ... P_{n-1} |ψ>` where `P_i` projects the branch of edge `i`
//!   onto its `M_i` leading Schmidt vectors; its squared distance `δ` from
//!   `|ψ>` lies between `max_i ε_i(M_i)` and `sum_i ε_i(M_i)`.
//! * [`truncate_lazy`] truncates during the SVD sweep, so later edges see the
//!   spectra `λ'` of already-truncated states. Here `δ = sum_i ε'_i` exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{min_dim_for, renyi_entropy};
use crate::network::{self, contract, sweep, Ttns, TtnsTensor};
use crate::state::{error_sq, schmidt_decompose, truncation_error, DenseState, SchmidtSpectrum};
use crate::tensor::slice_leading;
use crate::tree::TreeGraph;
use crate::Error;

/// Slack allowed on the sandwich and equality checks.
pub const BOUND_TOL: f64 = 1e-12;

/// Per-edge error budget used to pick bond dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Same budget `ε` on every edge.
    PerEdge(f64),
    /// Total accuracy `δ`, split evenly: `ε = δ / (n - 1)`.
    Total(f64),
    /// Total accuracy split in proportion to each edge's von Neumann entropy
    /// (even split when all entropies vanish).
    TotalEntropyWeighted(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TruncationPlan {
    /// Bond caps `M_i`, indexed by `edge - 1`.
    Caps(Vec<usize>),
    Budget(Budget),
}

impl TruncationPlan {
    pub fn uniform(n_edges: usize, cap: usize) -> Self {
        TruncationPlan::Caps(vec![cap; n_edges])
    }

    /// Caps per edge; budgets are converted with [`min_bond_dims`].
    pub fn resolve(&self, tree: &TreeGraph, spectra: &[SchmidtSpectrum]) -> Result<Vec<usize>, Error> {
        let n_edges = tree.n().saturating_sub(1);
        match self {
            TruncationPlan::Caps(caps) => {
                if caps.len() != n_edges {
                    return Err(Error::PlanShapeMismatch(format!(
                        "{} caps for {n_edges} edges",
                        caps.len()
                    )));
                }
                if let Some(k) = caps.iter().position(|&c| c == 0) {
                    return Err(Error::PlanShapeMismatch(format!("cap on edge {} is 0", k + 1)));
                }
                Ok(caps.clone())
            }
            TruncationPlan::Budget(b) => {
                if spectra.len() != n_edges {
                    return Err(Error::PlanShapeMismatch("spectra do not cover every edge".into()));
                }
                Ok(min_bond_dims(spectra, *b))
            }
        }
    }

    /// Parses `{"caps": {edge: M}}` (or a caps array), `{"eps_per_edge": x}`
    /// or `{"delta_total": x}`. Edges missing from a caps map stay uncapped.
    pub fn from_json(text: &str, n_edges: usize) -> Result<Self, Error> {
        let file: PlanFile = serde_json::from_str(text)?;
        file.into_plan(n_edges)
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            TruncationPlan::Caps(c) => {
                // uncapped edges are left out, matching `from_json`
                let map: BTreeMap<String, usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(_, &m)| m != usize::MAX)
                    .map(|(k, &m)| ((k + 1).to_string(), m))
                    .collect();
                serde_json::json!({ "caps": map })
            }
            TruncationPlan::Budget(Budget::PerEdge(x)) => serde_json::json!({ "eps_per_edge": x }),
            TruncationPlan::Budget(Budget::Total(x)) => serde_json::json!({ "delta_total": x }),
            TruncationPlan::Budget(Budget::TotalEntropyWeighted(x)) => {
                serde_json::json!({ "delta_total": x, "split": "entropy" })
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    caps: Option<CapsSpec>,
    eps_per_edge: Option<f64>,
    delta_total: Option<f64>,
    split: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CapsSpec {
    List(Vec<usize>),
    Map(BTreeMap<String, usize>),
}

impl PlanFile {
    fn into_plan(self, n_edges: usize) -> Result<TruncationPlan, Error> {
        let given = [self.caps.is_some(), self.eps_per_edge.is_some(), self.delta_total.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::PlanShapeMismatch(
                "give exactly one of caps, eps_per_edge, delta_total".into(),
            ));
        }
        if let Some(caps) = self.caps {
            return match caps {
                CapsSpec::List(v) => Ok(TruncationPlan::Caps(v)),
                CapsSpec::Map(m) => {
                    let mut caps = vec![usize::MAX; n_edges];
                    for (k, v) in m {
                        let e: usize = k
                            .parse()
                            .map_err(|_| Error::PlanShapeMismatch(format!("edge key {k:?} is not an integer")))?;
                        if e == 0 || e > n_edges {
                            return Err(Error::PlanShapeMismatch(format!("edge {e} outside 1..={n_edges}")));
                        }
                        caps[e - 1] = v;
                    }
                    Ok(TruncationPlan::Caps(caps))
                }
            };
        }
        let check = |x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(x)
            } else {
                Err(Error::BadEps(x))
            }
        };
        if let Some(x) = self.eps_per_edge {
            return Ok(TruncationPlan::Budget(Budget::PerEdge(check(x)?)));
        }
        let x = check(self.delta_total.unwrap())?;
        match self.split.as_deref() {
            None | Some("even") => Ok(TruncationPlan::Budget(Budget::Total(x))),
            Some("entropy") => Ok(TruncationPlan::Budget(Budget::TotalEntropyWeighted(x))),
            Some(other) => Err(Error::PlanShapeMismatch(format!("unknown split {other:?}"))),
        }
    }
}

/// Smallest bond dimension per edge whose truncation error fits the budget.
pub fn min_bond_dims(spectra: &[SchmidtSpectrum], budget: Budget) -> Vec<usize> {
    let n_edges = spectra.len().max(1) as f64;
    let weights: Vec<Vec<f64>> = spectra.iter().map(|s| s.weights()).collect();
    let per_edge: Vec<f64> = match budget {
        Budget::PerEdge(x) => vec![x; spectra.len()],
        Budget::Total(d) => vec![d / n_edges; spectra.len()],
        Budget::TotalEntropyWeighted(d) => {
            let s: Vec<f64> = weights
                .iter()
                .map(|w| {
                    let total: f64 = w.iter().sum();
                    let p: Vec<f64> = w.iter().map(|x| x / total).collect();
                    renyi_entropy(&p, 1.0).unwrap_or(0.0)
                })
                .collect();
            let sum: f64 = s.iter().sum();
            if sum <= 0.0 {
                vec![d / n_edges; spectra.len()]
            } else {
                s.iter().map(|x| d * x / sum).collect()
            }
        }
    };
    weights.iter().zip(per_edge).map(|(w, b)| min_dim_for(w, b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Projector,
    Lazy,
}

#[derive(Debug, Clone)]
pub struct TruncationResult {
    pub scheme: Scheme,
    pub ttns: Ttns,
    /// Bond dimensions actually used (caps clamped to exact ranks).
    pub bond_dims: Vec<usize>,
    /// `ε_i(M_i)` from the exact spectra of the target state.
    pub eps: Vec<f64>,
    /// Lazy scheme only: `ε'_i(M_i)` from the spectra seen during the sweep.
    pub eps_prime: Option<Vec<f64>>,
    /// `||ψ - ψ_trunc||²`.
    pub delta: f64,
    /// `||ψ_trunc||`; the truncated state is not renormalized.
    pub norm: f64,
    pub state: DenseState,
}

impl TruncationResult {
    pub fn max_eps(&self) -> f64 {
        self.eps.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum_eps(&self) -> f64 {
        self.eps.iter().sum()
    }

    pub fn sum_eps_prime(&self) -> Option<f64> {
        self.eps_prime.as_ref().map(|e| e.iter().sum())
    }

    /// The truncated state scaled to unit norm.
    pub fn renormalized(&self) -> Result<DenseState, Error> {
        self.state.normalized()
    }
}

/// Restricts every bond of an exact TTNS to its leading `M_i` directions.
pub fn truncate_projector(exact: &Ttns, plan: &TruncationPlan) -> Result<TruncationResult, Error> {
    let spectra = exact.spectra.as_ref().ok_or(Error::SpectraUnavailable)?;
    let tree = &exact.tree;
    let caps = plan.resolve(tree, spectra)?;
    let kept: Vec<usize> = caps.iter().zip(&exact.bond_dims).map(|(&c, &m)| c.min(m).max(1)).collect();

    let tensors = exact
        .tensors
        .iter()
        .map(|t| {
            let v = t.vertex;
            let mut shape = vec![t.shape[0]];
            shape.extend(tree.children(v).iter().map(|&c| kept[c - 1]));
            shape.push(if v == tree.root() { 1 } else { kept[v - 1] });
            TtnsTensor { vertex: v, data: slice_leading(&t.data, &t.shape, &shape), shape }
        })
        .collect();
    let ttns = Ttns { tree: tree.clone(), tensors, bond_dims: kept.clone(), spectra: exact.spectra.clone() };

    let original = contract(exact)?;
    let state = contract(&ttns)?;
    let eps = spectra.iter().zip(&kept).map(|(s, &m)| truncation_error(s, m)).collect();
    Ok(TruncationResult {
        scheme: Scheme::Projector,
        delta: error_sq(&original, &state)?,
        norm: state.norm(),
        ttns,
        bond_dims: kept,
        eps,
        eps_prime: None,
        state,
    })
}

/// Dense Schmidt spectra of `state` for every edge of `tree`.
pub fn edge_spectra(state: &DenseState, tree: &TreeGraph) -> Result<Vec<SchmidtSpectrum>, Error> {
    if state.dims() != tree.dims() {
        return Err(Error::DimMismatch(format!("state {:?} vs tree {:?}", state.dims(), tree.dims())));
    }
    tree.edges()
        .map(|i| {
            let mut sp = schmidt_decompose(state, &tree.branch(i)?)?.spectrum;
            sp.edge = Some(i);
            Ok(sp)
        })
        .collect()
}

/// Truncates each edge to its cap during the SVD sweep.
pub fn truncate_lazy(state: &DenseState, tree: &TreeGraph, plan: &TruncationPlan) -> Result<TruncationResult, Error> {
    let exact_spectra = edge_spectra(state, tree)?;
    let caps = plan.resolve(tree, &exact_spectra)?;
    let sw = sweep(state, tree, Some(&caps))?;
    let ttns = Ttns {
        tree: tree.clone(),
        tensors: sw.tensors,
        bond_dims: sw.bond_dims.clone(),
        spectra: Some(sw.spectra),
    };
    let truncated = contract(&ttns)?;
    let eps = exact_spectra.iter().zip(&sw.bond_dims).map(|(s, &m)| truncation_error(s, m)).collect();
    Ok(TruncationResult {
        scheme: Scheme::Lazy,
        delta: error_sq(state, &truncated)?,
        norm: truncated.norm(),
        ttns,
        bond_dims: sw.bond_dims,
        eps,
        eps_prime: Some(sw.discarded),
        state: truncated,
    })
}

/// Outcome of `max_i ε_i <= δ <= sum_i ε_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub delta: f64,
    pub max_eps: f64,
    pub sum_eps: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `δ - max ε`.
    pub lower_slack: f64,
    /// `sum ε - δ`.
    pub upper_slack: f64,
}

impl BoundsCheck {
    pub fn from_parts(eps: &[f64], delta: f64) -> Self {
        let max_eps = eps.iter().copied().fold(0.0, f64::max);
        let sum_eps: f64 = eps.iter().sum();
        Self {
            delta,
            max_eps,
            sum_eps,
            lower_ok: max_eps - BOUND_TOL <= delta,
            upper_ok: delta <= sum_eps + BOUND_TOL,
            lower_slack: delta - max_eps,
            upper_slack: sum_eps - delta,
        }
    }

    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Sandwich check using the exact-spectrum truncation errors.
pub fn verify_sandwich(result: &TruncationResult) -> BoundsCheck {
    BoundsCheck::from_parts(&result.eps, result.delta)
}

/// `E_i(λ_i²) = λ_{i-1}²` residual for an exact chain decomposition.
///
/// On a chain rooted at `n`, vertex `i`'s only child is `i - 1`, so `A_i^σ`
/// is an `M_{i-1} × M_i` matrix and `E_i(ρ) = Σ_σ A_i^σ ρ A_i^σ†` maps
/// edge-`i` weights to edge-`(i-1)` weights. The boundary weights are
/// `λ_0² = λ_n² = [1]`. Returns the largest entry of `|E_i(λ_i²) - λ_{i-1}²|`
/// over `i = 1..=n`.
pub fn mps_channel_check(exact: &Ttns) -> Result<f64, Error> {
    let tree = &exact.tree;
    if !tree.is_linear() {
        return Err(Error::NotLinearTree);
    }
    exact.validate()?;
    let spectra = exact.spectra.as_ref().ok_or(Error::SpectraUnavailable)?;
    let n = tree.n();
    let weights = |edge: usize| -> Vec<f64> {
        if edge == 0 || edge == n {
            vec![1.0]
        } else {
            let m = exact.bond_dim(edge);
            spectra[edge - 1].coefficients[..m].iter().map(|l| l * l).collect()
        }
    };
    let mut worst = 0.0f64;
    for i in 1..=n {
        let t = exact.tensor(i);
        let d = t.shape[0];
        let left = if i == 1 { 1 } else { t.shape[1] };
        let right = t.bond_dim();
        let rho = weights(i);
        let target = weights(i - 1);
        for a in 0..left {
            for b in 0..left {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for s in 0..d {
                    for mu in 0..right {
                        let x = t.data[(s * left + a) * right + mu];
                        let y = t.data[(s * left + b) * right + mu];
                        acc += x * rho[mu] * y.conj();
                    }
                }
                let want = if a == b { target[a] } else { 0.0 };
                worst = worst.max((acc - want).norm());
            }
        }
    }
    Ok(worst)
}

/// `δ <= sum ε <= 2 sum ε` on a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpsBound {
    pub delta: f64,
    pub sum_eps: f64,
    pub doubled_sum_eps: f64,
    pub holds: bool,
}

pub fn mps_vc_bound(result: &TruncationResult) -> Result<MpsBound, Error> {
    if !result.ttns.tree.is_linear() {
        return Err(Error::NotLinearTree);
    }
    let sum_eps = result.sum_eps();
    let doubled = 2.0 * sum_eps;
    Ok(MpsBound {
        delta: result.delta,
        sum_eps,
        doubled_sum_eps: doubled,
        holds: result.delta <= sum_eps + BOUND_TOL && sum_eps <= doubled + BOUND_TOL,
    })
}

/// Canonical-form deviation of a truncated TTNS (generally nonzero at the
/// ancestors of truncated edges).
pub fn truncated_canonical_deviation(result: &TruncationResult) -> f64 {
    network::check_canonical(&result.ttns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::exact_decompose;
    use crate::targets::{make_named, NamedState};

    fn branching_tree() -> TreeGraph {
        let edges = [(7, 5), (7, 6), (6, 3), (6, 4), (3, 1), (3, 2)];
        TreeGraph::from_edge_list(&edges, &[2; 7], Some(7)).unwrap().0
    }

    #[test]
    fn noop_plan_is_exact() {
        let tree = branching_tree();
        let s = make_named(NamedState::Random, &[2; 7], Some(11)).unwrap();
        let exact = exact_decompose(&s, &tree).unwrap();
        let r = truncate_projector(&exact, &TruncationPlan::uniform(6, 64)).unwrap();
        assert!(r.delta < 1e-24);
        assert!(r.eps.iter().all(|&e| e == 0.0));
        let c = verify_sandwich(&r);
        assert!(c.passed());
        let lazy = truncate_lazy(&s, &tree, &TruncationPlan::uniform(6, 64)).unwrap();
        assert!(lazy.eps_prime.unwrap().iter().all(|&e| e < 1e-28));
    }

    #[test]
    fn ghz_caps_one() {
        let tree = branching_tree();
        let s = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let exact = exact_decompose(&s, &tree).unwrap();
        let r = truncate_projector(&exact, &TruncationPlan::uniform(6, 1)).unwrap();
        assert!((r.delta - 0.5).abs() < 1e-12);
        assert!(r.eps.iter().all(|e| (e - 0.5).abs() < 1e-12));
        assert!((r.sum_eps() - 3.0).abs() < 1e-12);
        let nonzero: Vec<usize> = (0..128).filter(|&k| r.state.amplitudes()[k].norm() > 1e-12).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((r.norm - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let c = verify_sandwich(&r);
        assert!(c.passed());
        assert!(c.lower_slack.abs() < 1e-12);
        assert!((c.upper_slack - 2.5).abs() < 1e-12);
        assert!((r.renormalized().unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lazy_ghz_caps_one() {
        let tree = branching_tree();
        let s = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let r = truncate_lazy(&s, &tree, &TruncationPlan::uniform(6, 1)).unwrap();
        let ep = r.eps_prime.clone().unwrap();
        assert!((ep[0] - 0.5).abs() < 1e-12);
        assert!(ep[1..].iter().all(|&e| e.abs() < 1e-12));
        assert!((r.delta - r.sum_eps_prime().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn plan_errors_and_parsing() {
        let tree = branching_tree();
        let s = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let exact = exact_decompose(&s, &tree).unwrap();
        assert!(matches!(
            truncate_projector(&exact, &TruncationPlan::Caps(vec![1; 3])),
            Err(Error::PlanShapeMismatch(_))
        ));
        let p = TruncationPlan::from_json(r#"{"caps": {"1": 2, "3": 1}}"#, 6).unwrap();
        assert_eq!(p, TruncationPlan::Caps(vec![2, usize::MAX, 1, usize::MAX, usize::MAX, usize::MAX]));
        let p = TruncationPlan::from_json(r#"{"delta_total": 0.3}"#, 6).unwrap();
        assert_eq!(p, TruncationPlan::Budget(Budget::Total(0.3)));
        assert!(TruncationPlan::from_json(r#"{"eps_per_edge": 1.5}"#, 6).is_err());
        assert!(TruncationPlan::from_json(r#"{"caps": [1], "delta_total": 0.1}"#, 6).is_err());
        assert!(TruncationPlan::from_json(r#"{"caps": {"9": 1}}"#, 6).is_err());
    }

    #[test]
    fn min_bond_dims_examples() {
        let bell = SchmidtSpectrum::new(Some(1), vec![0.5f64.sqrt(); 2]);
        assert_eq!(min_bond_dims(&[bell.clone()], Budget::PerEdge(0.4)), vec![2]);
        assert_eq!(min_bond_dims(&[bell.clone()], Budget::PerEdge(0.6)), vec![1]);
        let three = SchmidtSpectrum::new(Some(1), vec![0.7f64.sqrt(), 0.2f64.sqrt(), 0.1f64.sqrt()]);
        assert_eq!(min_bond_dims(&[three.clone()], Budget::PerEdge(0.25)), vec![2]);
        // total 0.5 over two edges gives 0.25 each
        assert_eq!(min_bond_dims(&[three.clone(), bell.clone()], Budget::Total(0.5)), vec![2, 2]);
        let w = min_bond_dims(&[three, bell], Budget::TotalEntropyWeighted(0.5));
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn chain_channel_identities() {
        let tree = TreeGraph::chain(&[2; 2]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = num_complex::Complex64::new(0.0, 0.0);
        let bell = DenseState::new(vec![2, 2], vec![z + h, z, z, z + h]).unwrap();
        let exact = exact_decompose(&bell, &tree).unwrap();
        assert!(mps_channel_check(&exact).unwrap() < 1e-14);

        let s = make_named(NamedState::Random, &[2, 3, 2, 2], Some(2)).unwrap();
        let chain = TreeGraph::chain(&[2, 3, 2, 2]).unwrap();
        let mut exact = exact_decompose(&s, &chain).unwrap();
        assert!(mps_channel_check(&exact).unwrap() < 1e-12);
        exact.tensors[1].data[0] += 0.1;
        assert!(mps_channel_check(&exact).unwrap() > 1e-3);

        assert!(matches!(mps_channel_check(&exact_decompose(
            &make_named(NamedState::Ghz, &[2; 7], None).unwrap(),
            &branching_tree()
        ).unwrap()), Err(Error::NotLinearTree)));
    }

    #[test]
    fn ghz_chain_vc_bound() {
        let tree = TreeGraph::chain(&[2; 4]).unwrap();
        let s = make_named(NamedState::Ghz, &[2; 4], None).unwrap();
        let exact = exact_decompose(&s, &tree).unwrap();
        let r = truncate_projector(&exact, &TruncationPlan::uniform(3, 1)).unwrap();
        let b = mps_vc_bound(&r).unwrap();
        assert!((b.delta - 0.5).abs() < 1e-12);
        assert!((b.sum_eps - 1.5).abs() < 1e-12);
        assert!((b.doubled_sum_eps - 3.0).abs() < 1e-12);
        assert!(b.holds);
    }
}
