//! Target states: named families and ground states of small spin models.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::entropy::renyi_entropy;
use crate::io::TreeFile;
use crate::linalg;
use crate::state::{schmidt_decompose, DenseState};
use crate::tree::{Relabeling, TreeGraph};
use crate::Error;

/// Largest qubit count handed to the dense eigensolver.
pub const MAX_GROUND_STATE_SITES: usize = 16;
/// Gap below which the ground space is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    Product,
    BellPair,
    Ghz,
    W,
    Random,
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "product" => NamedState::Product,
            "bell_pair" | "bell" => NamedState::BellPair,
            "ghz" => NamedState::Ghz,
            "w" => NamedState::W,
            "random" => NamedState::Random,
            other => return Err(Error::BadDims(format!("unknown state family {other:?}"))),
        })
    }
}

/// Normalized member of a named family. `Random` draws complex Gaussian
/// amplitudes from a ChaCha8 stream seeded with `seed` (default 0).
pub fn make_named(kind: NamedState, dims: &[usize], seed: Option<u64>) -> Result<DenseState, Error> {
    let len: usize = dims.iter().product();
    let zero = C64::new(0.0, 0.0);
    let qubits = || {
        if dims.iter().all(|&d| d == 2) {
            Ok(())
        } else {
            Err(Error::BadDims(format!("{kind:?} needs qubits, got {dims:?}")))
        }
    };
    let amps = match kind {
        NamedState::Product => {
            let mut a = vec![zero; len];
            if len > 0 {
                a[0] = C64::new(1.0, 0.0);
            }
            a
        }
        NamedState::BellPair => {
            if dims != [2, 2] {
                return Err(Error::BadDims(format!("bell_pair needs dims [2, 2], got {dims:?}")));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![C64::new(h, 0.0), zero, zero, C64::new(h, 0.0)]
        }
        NamedState::Ghz => {
            qubits()?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut a = vec![zero; len];
            a[0] = C64::new(h, 0.0);
            a[len - 1] += C64::new(h, 0.0);
            a
        }
        NamedState::W => {
            qubits()?;
            let n = dims.len();
            let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
            let mut a = vec![zero; len];
            for k in 0..n {
                a[1 << k] = amp;
            }
            a
        }
        NamedState::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            (0..len)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect()
        }
    };
    DenseState::new(dims.to_vec(), amps)?.normalized()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `H = -Σ_edges J_i Z_a Z_b - Σ_v h_v X_v` (Pauli operators).
    TransverseIsing,
    /// `H = Σ_edges J_i (S^x S^x + S^y S^y + Δ S^z S^z) - Σ_v h_v S^z_v`
    /// (spin-1/2 operators).
    Xxz { delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub tree: TreeGraph,
    pub model: Model,
    /// Coupling per edge, indexed by `edge - 1`.
    pub couplings: Vec<f64>,
    /// Field per vertex, indexed by `vertex - 1`.
    pub fields: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TreeSource {
    Path(String),
    Chain { chain: usize },
    Cayley { cayley: usize, #[serde(default = "default_z")] z: usize },
    File(TreeFile),
}

fn default_z() -> usize {
    3
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Values {
    Scalar(f64),
    Map(BTreeMap<String, f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    model: String,
    tree: TreeSource,
    #[serde(rename = "J", default = "one")]
    j: Values,
    #[serde(default = "zero")]
    h: Values,
    #[serde(default = "one_f")]
    delta: f64,
}

fn one() -> Values {
    Values::Scalar(1.0)
}

fn zero() -> Values {
    Values::Scalar(0.0)
}

fn one_f() -> f64 {
    1.0
}

fn parse_label(key: &str) -> Result<usize, Error> {
    key.trim().parse().map_err(|_| Error::BadRange(format!("bad vertex label {key:?}")))
}

impl HamiltonianSpec {
    /// Parses the JSON form
    /// `{"model": "ising"|"xxz", "tree": ..., "J": ..., "h": ..., "delta": ...}`.
    ///
    /// `tree` is a tree file object, a path (relative to `base`),
    /// `{"chain": n}` or `{"cayley": n, "z": z}`. `J` and `h` are scalars or
    /// maps keyed by original labels: `"a-b"` for an edge, `"v"` for a vertex.
    /// Missing map entries are zero.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<(HamiltonianSpec, Relabeling), Error> {
        let js: SpecJson = serde_json::from_str(text)?;
        let model = match js.model.to_ascii_lowercase().as_str() {
            "ising" | "tfim" | "transverse_ising" => Model::TransverseIsing,
            "xxz" | "heisenberg" => Model::Xxz { delta: js.delta },
            other => return Err(Error::BadRange(format!("unknown model {other:?}"))),
        };
        let (tree, relabeling) = match js.tree {
            TreeSource::Path(p) => {
                let path = base.map_or_else(|| Path::new(&p).to_path_buf(), |b| b.join(&p));
                crate::io::read_tree(&path)?
            }
            TreeSource::Chain { chain } => {
                let t = TreeGraph::chain(&vec![2; chain])?;
                let n = t.n();
                (t, Relabeling::identity(n))
            }
            TreeSource::Cayley { cayley, z } => {
                let t = TreeGraph::cayley(cayley, z, 2)?;
                (t, Relabeling::identity(cayley))
            }
            TreeSource::File(f) => f.build()?,
        };
        let n = tree.n();
        let couplings = match js.j {
            Values::Scalar(j) => vec![j; n - 1],
            Values::Map(m) => {
                let mut c = vec![0.0; n - 1];
                for (key, val) in m {
                    let (a, b) = key
                        .split_once('-')
                        .ok_or_else(|| Error::BadRange(format!("edge key {key:?} is not \"a-b\"")))?;
                    let (a, b) = (parse_label(a)?, parse_label(b)?);
                    if a == 0 || b == 0 || a > n || b > n {
                        return Err(Error::BadRange(format!("edge key {key:?} out of range")));
                    }
                    let (a, b) = (relabeling.new_label(a), relabeling.new_label(b));
                    let child = if tree.parent_of(a) == Some(b) {
                        a
                    } else if tree.parent_of(b) == Some(a) {
                        b
                    } else {
                        return Err(Error::BadRange(format!("{key:?} is not an edge")));
                    };
                    c[child - 1] = val;
                }
                c
            }
        };
        let fields = match js.h {
            Values::Scalar(h) => vec![h; n],
            Values::Map(m) => {
                let mut f = vec![0.0; n];
                for (key, val) in m {
                    let v = parse_label(&key)?;
                    if v == 0 || v > n {
                        return Err(Error::BadRange(format!("vertex {v} out of range")));
                    }
                    f[relabeling.new_label(v) - 1] = val;
                }
                f
            }
        };
        let spec = HamiltonianSpec { tree, model, couplings, fields };
        spec.validate()?;
        Ok((spec, relabeling))
    }

    pub fn uniform(tree: TreeGraph, model: Model, j: f64, h: f64) -> Self {
        let n = tree.n();
        Self { couplings: vec![j; n.saturating_sub(1)], fields: vec![h; n], tree, model }
    }

    fn validate(&self) -> Result<(), Error> {
        let n = self.tree.n();
        if n > MAX_GROUND_STATE_SITES {
            return Err(Error::TooLarge { sites: n, max: MAX_GROUND_STATE_SITES });
        }
        if self.tree.dims().iter().any(|&d| d != 2) {
            return Err(Error::BadDims("spin models need d = 2 on every vertex".into()));
        }
        if self.couplings.len() + 1 != n || self.fields.len() != n {
            return Err(Error::DimMismatch(format!(
                "{} couplings and {} fields for {n} vertices",
                self.couplings.len(),
                self.fields.len()
            )));
        }
        Ok(())
    }

    /// Dense real Hamiltonian in the basis with site 1 most significant and
    /// `|0>` the `Z = +1` state.
    pub fn matrix(&self) -> Result<Mat<f64>, Error> {
        self.validate()?;
        let n = self.tree.n();
        let dim = 1usize << n;
        let bit = |v: usize| 1usize << (n - v);
        let edges = self.tree.edge_pairs();
        let mut h = Mat::<f64>::zeros(dim, dim);
        for s in 0..dim {
            let z = |v: usize| if s & bit(v) == 0 { 1.0 } else { -1.0 };
            let mut diag = 0.0;
            match self.model {
                Model::TransverseIsing => {
                    for (k, &(a, b)) in edges.iter().enumerate() {
                        diag -= self.couplings[k] * z(a) * z(b);
                    }
                    for v in 1..=n {
                        h[(s ^ bit(v), s)] -= self.fields[v - 1];
                    }
                }
                Model::Xxz { delta } => {
                    for (k, &(a, b)) in edges.iter().enumerate() {
                        let j = self.couplings[k];
                        diag += j * delta * 0.25 * z(a) * z(b);
                        if z(a) != z(b) {
                            h[(s ^ bit(a) ^ bit(b), s)] += 0.5 * j;
                        }
                    }
                    for v in 1..=n {
                        diag -= self.fields[v - 1] * 0.5 * z(v);
                    }
                }
            }
            h[(s, s)] += diag;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: DenseState,
    pub energy: f64,
    /// Distance to the next eigenvalue (infinite for a one-dimensional space).
    pub gap: f64,
    /// Set when `gap < DEGENERACY_GAP`; the returned vector is then one
    /// member of the ground space.
    pub degenerate: bool,
    /// `||Hψ - Eψ||`.
    pub residual: f64,
}

/// Lowest eigenvector by dense diagonalization, phase-fixed so the first
/// nonzero amplitude is real and positive.
pub fn ground_state(spec: &HamiltonianSpec) -> Result<GroundState, Error> {
    let h = spec.matrix()?;
    let dim = h.nrows();
    let (vals, vecs) = linalg::symmetric_eigen(&h)?;
    let energy = vals[0];
    let gap = if dim > 1 { vals[1] - vals[0] } else { f64::INFINITY };
    let mut psi: Vec<f64> = (0..dim).map(|i| vecs[(i, 0)]).collect();
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = psi.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
    for x in &mut psi {
        *x *= sign / norm;
    }
    let mut residual = 0.0;
    for i in 0..dim {
        let hv: f64 = (0..dim).map(|j| h[(i, j)] * psi[j]).sum();
        residual += (hv - energy * psi[i]).powi(2);
    }
    let state = DenseState::new(spec.tree.dims().to_vec(), psi.into_iter().map(|x| C64::new(x, 0.0)).collect())?;
    Ok(GroundState { state, energy, gap, degenerate: gap < DEGENERACY_GAP, residual: residual.sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntropies {
    pub edge: usize,
    /// Squared Schmidt coefficients across the edge.
    pub weights: Vec<f64>,
    /// One entry per requested α.
    pub entropies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub alphas: Vec<f64>,
    pub edges: Vec<EdgeEntropies>,
}

impl EntropyProfile {
    pub fn max_entropy(&self) -> f64 {
        self.edges.iter().flat_map(|e| e.entropies.iter().copied()).fold(0.0, f64::max)
    }
}

/// Rényi entropies `S_{α,i}` of every edge cut for every α.
pub fn entropy_profile(state: &DenseState, tree: &TreeGraph, alphas: &[f64]) -> Result<EntropyProfile, Error> {
    if state.dims() != tree.dims() {
        return Err(Error::DimMismatch(format!("state {:?} vs tree {:?}", state.dims(), tree.dims())));
    }
    let norm2 = state.norm_sqr();
    let edges = tree
        .edges()
        .map(|i| {
            let sp = schmidt_decompose(state, &tree.branch(i)?)?.spectrum;
            let weights: Vec<f64> = sp.coefficients.iter().map(|l| l * l / norm2).collect();
            let entropies = alphas.iter().map(|&a| renyi_entropy(&weights, a)).collect::<Result<_, _>>()?;
            Ok(EdgeEntropies { edge: i, weights, entropies })
        })
        .collect::<Result<_, Error>>()?;
    Ok(EntropyProfile { alphas: alphas.to_vec(), edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states() {
        let g = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.amplitudes()[0].re - h).abs() < 1e-16);
        assert!((g.amplitudes()[127].re - h).abs() < 1e-16);
        let w = make_named(NamedState::W, &[2; 3], None).unwrap();
        for k in [1, 2, 4] {
            assert!((w.amplitudes()[k].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        assert!(make_named(NamedState::Ghz, &[2, 3], None).is_err());
        assert!(make_named(NamedState::BellPair, &[2, 2, 2], None).is_err());
        assert!("nope".parse::<NamedState>().is_err());
    }

    #[test]
    fn random_is_seeded() {
        let a = make_named(NamedState::Random, &[2, 3, 2], Some(42)).unwrap();
        let b = make_named(NamedState::Random, &[2, 3, 2], Some(42)).unwrap();
        let c = make_named(NamedState::Random, &[2, 3, 2], Some(43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_normalized());
    }

    #[test]
    fn single_site_field() {
        let (tree, _) = TreeGraph::from_edge_list(&[], &[2], None).unwrap();
        let g = ground_state(&HamiltonianSpec::uniform(tree, Model::TransverseIsing, 0.0, 1.0)).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-14);
        assert!(!g.degenerate);
    }

    #[test]
    fn two_site_ising_is_degenerate_without_field() {
        let tree = TreeGraph::chain(&[2, 2]).unwrap();
        let g = ground_state(&HamiltonianSpec::uniform(tree, Model::TransverseIsing, 1.0, 0.0)).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-14);
        assert!(g.degenerate);
    }

    #[test]
    fn heisenberg_singlet() {
        let tree = TreeGraph::chain(&[2, 2]).unwrap();
        let g = ground_state(&HamiltonianSpec::uniform(tree, Model::Xxz { delta: 1.0 }, 1.0, 0.0)).unwrap();
        assert!((g.energy + 0.75).abs() < 1e-12);
        assert!((g.gap - 1.0).abs() < 1e-12);
        let a = g.state.amplitudes();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a[1].re - h).abs() < 1e-12 && (a[2].re + h).abs() < 1e-12);
        assert!(g.residual < 1e-12);
    }

    #[test]
    fn spec_json() {
        let (spec, _) = HamiltonianSpec::from_json(r#"{"model":"ising","tree":{"cayley":7},"J":1,"h":3}"#, None).unwrap();
        assert_eq!(spec.couplings, vec![1.0; 6]);
        assert_eq!(spec.fields, vec![3.0; 7]);

        let text = r#"{"model":"xxz","delta":0.5,"tree":{"n":3,"dims":[2,2,2],"edges":[[1,2],[2,3]]},
                       "J":{"1-2":2.0,"3-2":5.0},"h":{"1":0.25}}"#;
        let (spec, rel) = HamiltonianSpec::from_json(text, None).unwrap();
        assert_eq!(spec.model, Model::Xxz { delta: 0.5 });
        let c1 = relabeling_child(&spec.tree, rel.new_label(1), rel.new_label(2));
        assert_eq!(spec.couplings[c1 - 1], 2.0);
        assert_eq!(spec.fields[rel.new_label(1) - 1], 0.25);
        assert_eq!(spec.fields.iter().filter(|&&x| x == 0.0).count(), 2);
        assert!(HamiltonianSpec::from_json(r#"{"model":"ising","tree":{"chain":3},"J":{"1-3":1}}"#, None).is_err());
    }

    fn relabeling_child(tree: &TreeGraph, a: usize, b: usize) -> usize {
        if tree.parent_of(a) == Some(b) { a } else { b }
    }

    #[test]
    fn too_large_is_rejected() {
        let tree = TreeGraph::chain(&[2; 17]).unwrap();
        let spec = HamiltonianSpec::uniform(tree, Model::TransverseIsing, 1.0, 1.0);
        assert!(matches!(ground_state(&spec), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn profiles() {
        let tree = TreeGraph::cayley(7, 3, 2).unwrap();
        let p = make_named(NamedState::Product, &[2; 7], None).unwrap();
        let prof = entropy_profile(&p, &tree, &[0.5, 1.0, 2.0]).unwrap();
        assert!(prof.edges.iter().all(|e| e.entropies.iter().all(|s| s.abs() < 1e-12)));
        let g = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let prof = entropy_profile(&g, &tree, &[0.5, 1.0, 2.0]).unwrap();
        for e in &prof.edges {
            for s in &e.entropies {
                assert!((s - std::f64::consts::LN_2).abs() < 1e-12);
            }
        }
    }
}
