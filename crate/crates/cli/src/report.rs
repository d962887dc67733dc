//! Certified bounds report for one (state, tree, plan) instance.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use ttns::entropy::{
    alpha_threshold, bond_dim_lower_bound, bond_dim_upper_bound, error_lower_bound, error_lower_bound_literal,
    error_upper_bound,
};
use ttns::io::{encode_state, TreeFile};
use ttns::network::{check_canonical, exact_decompose};
use ttns::truncation::{
    mps_channel_check, mps_vc_bound, truncate_lazy, truncate_projector, BOUND_TOL,
};
use ttns::{BoundEvaluation, BoundKind, DenseState, EdgeDistribution, Relabeling, Side, TreeGraph, TruncationPlan};

use crate::json::{digest_floats, sha256_hex, to_canonical};

/// Spectra longer than this are elided unless the full form is requested.
pub const SPECTRUM_ELIDE_LEN: usize = 64;
const ELIDED_KEEP: usize = 8;
/// Isometry deviation tolerated for an exact decomposition.
pub const CANONICAL_TOL: f64 = 1e-12;
/// Residual tolerated for the chain channel identity.
pub const CHANNEL_TOL: f64 = 1e-12;

pub const DEFAULT_ALPHAS: [f64; 6] = [0.25, 0.5, 0.75, 1.5, 2.0, 4.0];

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SpectrumField {
    Full(Vec<f64>),
    Elided { length: usize, head: Vec<f64>, tail: Vec<f64>, sha256: String },
}

impl SpectrumField {
    fn new(coefficients: &[f64], full: bool) -> Self {
        if full || coefficients.len() <= SPECTRUM_ELIDE_LEN {
            return SpectrumField::Full(coefficients.to_vec());
        }
        let n = coefficients.len();
        SpectrumField::Elided {
            length: n,
            head: coefficients[..ELIDED_KEEP].to_vec(),
            tail: coefficients[n - ELIDED_KEEP..].to_vec(),
            sha256: digest_floats(coefficients),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub tree_digest: String,
    pub state_digest: String,
    pub plan: Value,
    pub n_sites: usize,
    /// Local dimensions in canonical labels.
    pub dims: Vec<usize>,
    /// Original label `k + 1` maps to canonical label `labeling[k]`.
    pub labeling: Vec<usize>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRow {
    pub edge: usize,
    pub parent: usize,
    pub bond_dim_exact: usize,
    pub m_cap: Option<usize>,
    pub m_kept: usize,
    /// Schmidt coefficients of the target state across this edge.
    pub spectrum: SpectrumField,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub lazy_bond_dim: usize,
    /// `S_α` keyed by α.
    pub renyi: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Global {
    pub delta_projector: f64,
    pub delta_lazy: f64,
    pub sum_eps: f64,
    pub max_eps: f64,
    pub sum_eps_prime: f64,
    pub norm_truncated: f64,
    pub norm_truncated_lazy: f64,
    pub canonical_deviation: f64,
    pub rank_cutoff: f64,
}

/// A plain inequality `lhs <= rhs` (up to the bound tolerance).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    fn le(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Check { name: name.into(), lhs, rhs, slack: rhs - lhs, pass: lhs <= rhs + tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    #[serde(flatten)]
    pub eval: BoundEvaluation,
    /// Quantity the bound is compared with.
    pub against: String,
    pub against_value: Option<f64>,
    /// `against - value` for lower bounds, `value - against` for upper ones.
    pub slack: Option<f64>,
    /// Invalid rows pass vacuously.
    pub pass: bool,
}

impl BoundRow {
    fn new(eval: BoundEvaluation, against: &str, against_value: f64) -> Self {
        let (slack, pass) = match eval.value {
            Some(v) if eval.valid => {
                let slack = match eval.side {
                    Side::Lower => against_value - v,
                    Side::Upper => v - against_value,
                };
                let tol = BOUND_TOL * (1.0 + v.abs().max(against_value.abs()));
                (Some(slack), slack >= -tol)
            }
            _ => (None, true),
        };
        BoundRow { eval, against: against.into(), against_value: Some(against_value), slack, pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityProbe {
    pub edge: usize,
    pub cap: usize,
    pub delta_with_cap_plus_one: f64,
    pub increased: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub instance: Instance,
    pub per_edge: Vec<EdgeRow>,
    pub global: Global,
    pub checks: Vec<Check>,
    pub bounds: Vec<BoundRow>,
    /// Logged only; never part of the verdict.
    pub monotonicity: Vec<MonotonicityProbe>,
    pub notes: Vec<String>,
    pub verdict: bool,
}

impl BoundsReport {
    pub fn to_json(&self) -> String {
        to_canonical(self)
    }

    pub fn passed_bounds(&self) -> (usize, usize) {
        let rows = self.checks.iter().map(|c| c.pass).chain(self.bounds.iter().map(|b| b.pass));
        rows.fold((0, 0), |(p, t), ok| (p + ok as usize, t + 1))
    }
}

pub struct CertifyInput<'a> {
    /// Target state in canonical labels.
    pub state: &'a DenseState,
    pub tree: &'a TreeGraph,
    pub relabeling: &'a Relabeling,
    pub plan: &'a TruncationPlan,
    pub alphas: &'a [f64],
    pub full_spectra: bool,
}

fn alpha_key(a: f64) -> String {
    format!("{a}")
}

pub fn tree_digest(tree: &TreeGraph) -> String {
    let tf = TreeFile::canonical(tree, &Relabeling::identity(tree.n()));
    sha256_hex(to_canonical(&tf).as_bytes())
}

pub fn certify(input: &CertifyInput) -> Result<BoundsReport, ttns::Error> {
    let CertifyInput { state, tree, relabeling, plan, alphas, full_spectra } = *input;
    let exact = exact_decompose(state, tree)?;
    let spectra = exact.spectra.clone().expect("exact decomposition stores spectra");
    let caps = plan.resolve(tree, &spectra)?;
    let proj = truncate_projector(&exact, &TruncationPlan::Caps(caps.clone()))?;
    let lazy = truncate_lazy(state, tree, &TruncationPlan::Caps(caps.clone()))?;
    let eps_prime = lazy.eps_prime.clone().unwrap_or_default();

    let mut notes = Vec::new();
    let mut per_edge = Vec::new();
    let mut bounds = Vec::new();
    let mut dists = Vec::new();
    for i in tree.edges() {
        let sp = &spectra[i - 1];
        let dist = EdgeDistribution::from_spectrum(i, sp, tree.available_dim(i)?)?;
        let renyi = alphas.iter().map(|&a| Ok((alpha_key(a), dist.entropy(a)?))).collect::<Result<_, ttns::Error>>()?;
        per_edge.push(EdgeRow {
            edge: i,
            parent: tree.parent(i),
            bond_dim_exact: exact.bond_dim(i),
            m_cap: (caps[i - 1] != usize::MAX).then_some(caps[i - 1]),
            m_kept: proj.bond_dims[i - 1],
            spectrum: SpectrumField::new(&sp.coefficients, full_spectra),
            epsilon: proj.eps[i - 1],
            epsilon_prime: eps_prime.get(i - 1).copied().unwrap_or(0.0),
            lazy_bond_dim: lazy.bond_dims[i - 1],
            renyi,
        });
        dists.push(dist);
    }

    for &alpha in alphas {
        let mut best_lower: Option<f64> = None;
        let mut upper_sum = Some(0.0);
        for (k, dist) in dists.iter().enumerate() {
            let i = k + 1;
            let m = proj.bond_dims[k];
            let eps = proj.eps[k];
            let s = dist.entropy(alpha)?;
            if alpha > 1.0 {
                let v = error_lower_bound(s, m, alpha)?;
                best_lower = Some(best_lower.map_or(v, |b: f64| b.max(v)));
                let eval = lower_eval(BoundKind::ErrorLower, alpha, v, "alpha > 1").with_edge(i);
                bounds.push(BoundRow::new(eval, "epsilon", eps));
                if let Some(lit) = error_lower_bound_literal(s, m, alpha) {
                    if (lit - v).abs() > 1e-9 && lit > eps + BOUND_TOL {
                        notes.push(format!(
                            "edge {i}, alpha {alpha}: literal M/S reading of the lower bound gives {lit:.6e} > epsilon"
                        ));
                    }
                }
                // smallest M reaching the achieved error at this edge
                if eps < 1.0 {
                    let need = dist.min_dim(eps);
                    let v = bond_dim_lower_bound(s, eps, alpha)?;
                    let eval = lower_eval(BoundKind::BondDimLower, alpha, v, "alpha > 1, target = epsilon").with_edge(i);
                    bounds.push(BoundRow::new(eval, "min_bond_dim", need as f64));
                }
            } else if alpha > 0.0 && alpha < 1.0 {
                let eval = error_upper_bound(s, m, alpha, eps).with_edge(i);
                upper_sum = match (upper_sum, eval.valid, eval.value) {
                    (Some(acc), true, Some(v)) => Some(acc + v),
                    _ => None,
                };
                bounds.push(BoundRow::new(eval, "epsilon", eps));
                bounds.push(BoundRow::new(bond_dim_upper_eval(dist, s, eps, alpha).with_edge(i), "min_bond_dim", dist.min_dim(eps) as f64));
            }
        }
        if let Some(v) = best_lower.filter(|_| !dists.is_empty()) {
            let eval = lower_eval(BoundKind::ErrorLower, alpha, v, "max over edges, alpha > 1");
            bounds.push(BoundRow::new(eval.clone(), "delta_projector", proj.delta));
            bounds.push(BoundRow::new(eval, "delta_lazy", lazy.delta));
        }
        if alpha > 0.0 && alpha < 1.0 && !dists.is_empty() {
            let eval = match upper_sum {
                Some(v) => BoundEvaluation {
                    edge: None,
                    alpha,
                    side: Side::Upper,
                    kind: BoundKind::ErrorUpper,
                    value: Some(v),
                    valid: true,
                    reason: "sum over edges, every edge valid".into(),
                },
                None => BoundEvaluation {
                    edge: None,
                    alpha,
                    side: Side::Upper,
                    kind: BoundKind::ErrorUpper,
                    value: None,
                    valid: false,
                    reason: "some edge outside the alpha range".into(),
                },
            };
            bounds.push(BoundRow::new(eval, "delta_projector", proj.delta));
        }
    }

    let canonical_deviation = check_canonical(&exact);
    let mut checks = vec![
        Check::le("sandwich_lower_projector", proj.max_eps(), proj.delta, BOUND_TOL),
        Check::le("sandwich_upper_projector", proj.delta, proj.sum_eps(), BOUND_TOL),
        Check::le("sandwich_lower_lazy", lazy.max_eps(), lazy.delta, BOUND_TOL),
        Check {
            name: "lazy_pythagoras".into(),
            lhs: lazy.delta,
            rhs: lazy.sum_eps_prime().unwrap_or(0.0),
            slack: lazy.sum_eps_prime().unwrap_or(0.0) - lazy.delta,
            pass: (lazy.delta - lazy.sum_eps_prime().unwrap_or(0.0)).abs() <= BOUND_TOL,
        },
        Check::le("canonical_form", canonical_deviation, 0.0, CANONICAL_TOL),
    ];
    if tree.is_linear() && tree.n() >= 2 {
        let residual = mps_channel_check(&exact)?;
        checks.push(Check::le("mps_channel", residual, 0.0, CHANNEL_TOL));
        let vc = mps_vc_bound(&proj)?;
        checks.push(Check::le("mps_sum_vs_doubled", vc.sum_eps, vc.doubled_sum_eps, BOUND_TOL));
    }

    let mut monotonicity = Vec::new();
    for k in 0..caps.len() {
        if proj.bond_dims[k] < exact.bond_dims[k] {
            let mut wider = proj.bond_dims.clone();
            wider[k] += 1;
            let d = truncate_projector(&exact, &TruncationPlan::Caps(wider))?.delta;
            let increased = d > proj.delta + BOUND_TOL;
            if increased {
                notes.push(format!("edge {}: raising the cap increased delta_projector", k + 1));
            }
            monotonicity.push(MonotonicityProbe {
                edge: k + 1,
                cap: proj.bond_dims[k],
                delta_with_cap_plus_one: d,
                increased,
            });
        }
    }

    let verdict = checks.iter().all(|c| c.pass) && bounds.iter().all(|b| b.pass);
    Ok(BoundsReport {
        instance: Instance {
            tree_digest: tree_digest(tree),
            state_digest: sha256_hex(&encode_state(state)),
            plan: plan.to_json(),
            n_sites: tree.n(),
            dims: tree.dims().to_vec(),
            labeling: relabeling.old_to_new.clone(),
            alphas: alphas.to_vec(),
        },
        per_edge,
        global: Global {
            delta_projector: proj.delta,
            delta_lazy: lazy.delta,
            sum_eps: proj.sum_eps(),
            max_eps: proj.max_eps(),
            sum_eps_prime: lazy.sum_eps_prime().unwrap_or(0.0),
            norm_truncated: proj.norm,
            norm_truncated_lazy: lazy.norm,
            canonical_deviation,
            rank_cutoff: ttns::linalg::RANK_CUTOFF,
        },
        checks,
        bounds,
        monotonicity,
        notes,
        verdict,
    })
}

fn lower_eval(kind: BoundKind, alpha: f64, value: f64, reason: &str) -> BoundEvaluation {
    BoundEvaluation { edge: None, alpha, side: kind.side(), kind, value: Some(value), valid: true, reason: reason.into() }
}

/// Upper bond-dimension bound at budget `eps`, flagged by the α range taken
/// at the smallest sufficient bond dimension.
pub fn bond_dim_upper_eval(dist: &EdgeDistribution, entropy: f64, eps: f64, alpha: f64) -> BoundEvaluation {
    let kind = BoundKind::BondDimUpper;
    let invalid = |reason: String| BoundEvaluation {
        edge: None,
        alpha,
        side: Side::Upper,
        kind,
        value: None,
        valid: false,
        reason,
    };
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("budget {eps} outside (0, 1)"));
    }
    let need = dist.min_dim(eps);
    match alpha_threshold(eps, need) {
        Some(t) if alpha >= t => match bond_dim_upper_bound(entropy, eps, alpha) {
            Ok(v) => BoundEvaluation {
                edge: None,
                alpha,
                side: Side::Upper,
                kind,
                value: Some(v),
                valid: true,
                reason: format!("alpha >= threshold {t} at M={need}"),
            },
            Err(e) => invalid(e.to_string()),
        },
        Some(t) => invalid(format!("alpha below threshold {t} at M={need}")),
        None => invalid(format!("empty alpha range at M={need}, eps={eps}")),
    }
}

/// Per-edge entropy table with the bond-dimension bracket at budget `eps`.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub edge: usize,
    pub parent: usize,
    pub branch_size: usize,
    pub renyi: BTreeMap<String, f64>,
    pub min_bond_dim: usize,
    /// Largest valid lower bound over α > 1.
    pub bond_dim_lower: Option<f64>,
    /// Smallest valid upper bound over α < 1.
    pub bond_dim_upper: Option<f64>,
    pub bracket_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub alphas: Vec<f64>,
    pub eps: f64,
    pub state_digest: String,
    pub tree_digest: String,
    pub edges: Vec<ProfileRow>,
    pub max_entropy: BTreeMap<String, f64>,
}

pub fn profile(state: &DenseState, tree: &TreeGraph, alphas: &[f64], eps: f64) -> Result<ProfileReport, ttns::Error> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ttns::Error::BadEps(eps));
    }
    let table = ttns::targets::entropy_profile(state, tree, alphas)?;
    let mut max_entropy: BTreeMap<String, f64> = BTreeMap::new();
    let mut edges = Vec::new();
    for row in &table.edges {
        let i = row.edge;
        let dist = EdgeDistribution::new(i, row.weights.clone(), tree.available_dim(i)?)?;
        let need = dist.min_dim(eps);
        let mut lower: Option<f64> = None;
        let mut upper: Option<f64> = None;
        let mut renyi = BTreeMap::new();
        for (&a, &s) in alphas.iter().zip(&row.entropies) {
            renyi.insert(alpha_key(a), s);
            let e = max_entropy.entry(alpha_key(a)).or_insert(0.0);
            *e = e.max(s);
            if a > 1.0 {
                let v = bond_dim_lower_bound(s, eps, a)?;
                lower = Some(lower.map_or(v, |b: f64| b.max(v)));
            } else if a > 0.0 && a < 1.0 {
                let ev = bond_dim_upper_eval(&dist, s, eps, a);
                if let (true, Some(v)) = (ev.valid, ev.value) {
                    upper = Some(upper.map_or(v, |b: f64| b.min(v)));
                }
            }
        }
        let tol = |x: f64| BOUND_TOL * (1.0 + x.abs());
        let bracket_holds = lower.is_none_or(|l| l <= need as f64 + tol(l))
            && upper.is_none_or(|u| need as f64 <= u + tol(u));
        edges.push(ProfileRow {
            edge: i,
            parent: tree.parent(i),
            branch_size: tree.branch(i)?.len(),
            renyi,
            min_bond_dim: need,
            bond_dim_lower: lower,
            bond_dim_upper: upper,
            bracket_holds,
        });
    }
    Ok(ProfileReport {
        alphas: alphas.to_vec(),
        eps,
        state_digest: sha256_hex(&encode_state(state)),
        tree_digest: tree_digest(tree),
        edges,
        max_entropy,
    })
}

impl ProfileReport {
    pub fn to_json(&self) -> String {
        to_canonical(self)
    }

    /// Aligned-column text table.
    pub fn to_table(&self) -> String {
        let mut header = vec!["edge".to_string(), "|L|".to_string()];
        header.extend(self.alphas.iter().map(|a| format!("S_{a}")));
        header.extend(["M_min".into(), "lower".into(), "upper".into(), "ok".into()]);
        let mut rows = vec![header];
        for e in &self.edges {
            let mut r = vec![e.edge.to_string(), e.branch_size.to_string()];
            r.extend(self.alphas.iter().map(|a| format!("{:.6}", e.renyi[&alpha_key(*a)])));
            r.push(e.min_bond_dim.to_string());
            r.push(e.bond_dim_lower.map_or("-".into(), |v| format!("{v:.3}")));
            r.push(e.bond_dim_upper.map_or("-".into(), |v| format!("{v:.3e}")));
            r.push(if e.bracket_holds { "yes" } else { "NO" }.into());
            rows.push(r);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in rows {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
