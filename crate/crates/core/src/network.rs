//! Tree tensor network states.
//!
//! Vertex `i` carries a tensor with axes `(σ_i, μ_c1, ..., μ_cy, μ_i)`:
//! the physical index, one bond index per child in ascending child label,
//! and its own bond towards the parent. The root's own bond has dimension 1.
//!
//! [`exact_decompose`] splits off one tensor per edge, `i = 1, ..., n-1`.
//! Before step `i` the remainder tensor carries the physical legs of every
//! vertex `>= i` plus one open bond leg for each detached vertex whose
//! parent is still attached. Step `i` groups `σ_i` with the open bonds of
//! the children of `i` into the SVD row index; because children carry
//! smaller labels than their parents, those bonds are always open by then.

use num_complex::Complex64 as C64;

use crate::linalg;
use crate::state::{DenseState, SchmidtSpectrum};
use crate::tensor::{LabeledTensor, Leg};
use crate::tree::TreeGraph;
use crate::Error;

/// Norm tolerance accepted by [`exact_decompose`].
pub const DECOMPOSE_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TtnsTensor {
    pub vertex: usize,
    /// `[d_i, M_c1, ..., M_cy, M_i]`.
    pub shape: Vec<usize>,
    pub data: Vec<C64>,
}

impl TtnsTensor {
    pub fn bond_dim(&self) -> usize {
        *self.shape.last().expect("tensor has at least two axes")
    }

    /// Row count when viewed as a map from the own bond: `d_i · prod M_c`.
    pub fn rows(&self) -> usize {
        self.shape[..self.shape.len() - 1].iter().product()
    }

    fn legs(&self, tree: &TreeGraph) -> Vec<Leg> {
        let v = self.vertex;
        let mut legs = vec![Leg::Phys(v)];
        legs.extend(tree.children(v).iter().map(|&c| Leg::Bond(c)));
        legs.push(Leg::Bond(v));
        legs
    }

    fn labeled(&self, tree: &TreeGraph) -> LabeledTensor {
        LabeledTensor::new(self.legs(tree), self.shape.clone(), self.data.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Ttns {
    pub tree: TreeGraph,
    /// Indexed by `vertex - 1`.
    pub tensors: Vec<TtnsTensor>,
    /// Indexed by `edge - 1`.
    pub bond_dims: Vec<usize>,
    /// Per-edge Schmidt spectra, indexed by `edge - 1`, when known.
    pub spectra: Option<Vec<SchmidtSpectrum>>,
}

impl Ttns {
    pub fn tensor(&self, v: usize) -> &TtnsTensor {
        &self.tensors[v - 1]
    }

    pub fn bond_dim(&self, edge: usize) -> usize {
        self.bond_dims[edge - 1]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    /// Checks tensor shapes against the tree and the bond dimensions.
    pub fn validate(&self) -> Result<(), Error> {
        let tree = &self.tree;
        let n = tree.n();
        if self.tensors.len() != n || self.bond_dims.len() + 1 != n {
            return Err(Error::ShapeInconsistent(format!(
                "{} tensors and {} bonds for {n} vertices",
                self.tensors.len(),
                self.bond_dims.len()
            )));
        }
        for (k, t) in self.tensors.iter().enumerate() {
            let v = k + 1;
            let kids = tree.children(v);
            let bad = |msg: String| Err(Error::ShapeInconsistent(format!("vertex {v}: {msg}")));
            if t.vertex != v {
                return bad(format!("tensor labelled {}", t.vertex));
            }
            if t.shape.len() != kids.len() + 2 {
                return bad(format!("{} axes for {} children", t.shape.len(), kids.len()));
            }
            if t.shape[0] != tree.dim(v) {
                return bad(format!("physical axis {} but site dimension {}", t.shape[0], tree.dim(v)));
            }
            if t.data.len() != t.shape.iter().product::<usize>() {
                return bad(format!("{} entries for shape {:?}", t.data.len(), t.shape));
            }
            for (pos, &c) in kids.iter().enumerate() {
                if t.shape[pos + 1] != self.bond_dims[c - 1] {
                    return bad(format!("child bond {c} has {} vs {}", t.shape[pos + 1], self.bond_dims[c - 1]));
                }
            }
            let own = if v == n { 1 } else { self.bond_dims[v - 1] };
            if t.bond_dim() != own {
                return bad(format!("own bond {} vs {own}", t.bond_dim()));
            }
        }
        Ok(())
    }

    /// Contracts the branch below and including `v`. Legs: physical legs of
    /// the branch in ascending order, then `Bond(v)`.
    pub(crate) fn branch_tensor(&self, v: usize) -> LabeledTensor {
        let mut acc = self.tensor(v).labeled(&self.tree);
        for &c in self.tree.children(v) {
            let child = self.branch_tensor(c);
            acc = acc.contract(&child, Leg::Bond(c));
        }
        let mut order: Vec<Leg> = self.tree.subtree(v).into_iter().map(Leg::Phys).collect();
        order.push(Leg::Bond(v));
        acc.permuted(&order)
    }

    /// States `|l_{i,mu}>` generated by the branch of edge `i`, as a row-major
    /// `(prod_{L(i)} d) × M_i` matrix with sites in ascending order.
    pub fn branch_states(&self, edge: usize) -> Result<(usize, usize, Vec<C64>), Error> {
        self.tree.branch(edge)?;
        self.validate()?;
        let t = self.branch_tensor(edge);
        let m = *t.shape.last().unwrap();
        Ok((t.data.len() / m.max(1), m, t.data))
    }
}

/// Result of one sequential SVD sweep.
pub(crate) struct Sweep {
    pub tensors: Vec<TtnsTensor>,
    pub bond_dims: Vec<usize>,
    /// Full singular value lists per edge.
    pub spectra: Vec<SchmidtSpectrum>,
    /// Discarded squared weight beyond the kept bond dimension, per edge.
    pub discarded: Vec<f64>,
}

/// Splits off tensors for edges `1..n`, keeping `min(rank, cap)` singular
/// values when `caps` is given.
pub(crate) fn sweep(state: &DenseState, tree: &TreeGraph, caps: Option<&[usize]>) -> Result<Sweep, Error> {
    let n = tree.n();
    if state.dims() != tree.dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?} vs tree dims {:?}",
            state.dims(),
            tree.dims()
        )));
    }
    let mut rest = LabeledTensor::new(
        (1..=n).map(Leg::Phys).collect(),
        state.dims().to_vec(),
        state.amplitudes().to_vec(),
    );
    let mut tensors = Vec::with_capacity(n);
    let mut bond_dims = Vec::with_capacity(n.saturating_sub(1));
    let mut spectra = Vec::with_capacity(n.saturating_sub(1));
    let mut discarded = Vec::with_capacity(n.saturating_sub(1));

    for i in tree.edges() {
        let mut row_legs = vec![Leg::Phys(i)];
        row_legs.extend(tree.children(i).iter().map(|&c| Leg::Bond(c)));
        let grouped = rest.front(&row_legs);
        let row_shape = grouped.shape[..row_legs.len()].to_vec();
        let rows: usize = row_shape.iter().product();
        let cols = grouped.data.len() / rows;
        let svd = linalg::svd(rows, cols, &grouped.data)?;
        let rank = linalg::numerical_rank(&svd.s).max(1);
        let keep = match caps {
            Some(c) => rank.min(c[i - 1].max(1)),
            None => rank,
        };
        discarded.push(svd.s[keep..].iter().rev().map(|l| l * l).sum());

        let mut shape = row_shape;
        shape.push(keep);
        tensors.push(TtnsTensor { vertex: i, shape, data: svd.u_columns(keep) });
        bond_dims.push(keep);

        let mut legs = vec![Leg::Bond(i)];
        legs.extend_from_slice(&grouped.legs[row_legs.len()..]);
        let mut shape = vec![keep];
        shape.extend_from_slice(&grouped.shape[row_legs.len()..]);
        rest = LabeledTensor::new(legs, shape, svd.weighted_vh(keep));
        spectra.push(SchmidtSpectrum { edge: Some(i), coefficients: svd.s });
    }

    let mut root_legs = vec![Leg::Phys(n)];
    root_legs.extend(tree.children(n).iter().map(|&c| Leg::Bond(c)));
    let root = rest.permuted(&root_legs);
    let mut shape = root.shape;
    shape.push(1);
    tensors.push(TtnsTensor { vertex: n, shape, data: root.data });

    Ok(Sweep { tensors, bond_dims, spectra, discarded })
}

/// Exact TTNS of a normalized state, canonical with the root as
/// orthogonality center, with per-edge Schmidt spectra attached.
pub fn exact_decompose(state: &DenseState, tree: &TreeGraph) -> Result<Ttns, Error> {
    if state.dims() != tree.dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?} vs tree dims {:?}",
            state.dims(),
            tree.dims()
        )));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > DECOMPOSE_NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let sw = sweep(state, tree, None)?;
    Ok(Ttns {
        tree: tree.clone(),
        tensors: sw.tensors,
        bond_dims: sw.bond_dims,
        spectra: Some(sw.spectra),
    })
}

/// Dense state obtained by summing over all bond indices, leaves first.
pub fn contract(ttns: &Ttns) -> Result<DenseState, Error> {
    ttns.validate()?;
    let root = ttns.branch_tensor(ttns.tree.root());
    DenseState::new(ttns.tree.dims().to_vec(), root.data)
}

/// Largest entry of `|A_i† A_i - 1|` over all non-root tensors.
pub fn check_canonical(ttns: &Ttns) -> f64 {
    let n = ttns.tree.n();
    ttns.tensors
        .iter()
        .filter(|t| t.vertex != n)
        .map(|t| isometry_deviation(t.rows(), t.bond_dim(), &t.data))
        .fold(0.0, f64::max)
}

pub(crate) fn isometry_deviation(rows: usize, m: usize, data: &[C64]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let g: C64 = (0..rows).map(|r| data[r * m + a].conj() * data[r * m + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Stored Schmidt spectrum of edge `edge`.
pub fn spectrum_from_ttns(ttns: &Ttns, edge: usize) -> Result<SchmidtSpectrum, Error> {
    ttns.tree.branch(edge)?;
    let spectra = ttns.spectra.as_ref().ok_or(Error::SpectraUnavailable)?;
    Ok(spectra[edge - 1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{make_named, NamedState};

    fn branching_tree() -> TreeGraph {
        let edges = [(7, 5), (7, 6), (6, 3), (6, 4), (3, 1), (3, 2)];
        TreeGraph::from_edge_list(&edges, &[2; 7], Some(7)).unwrap().0
    }

    #[test]
    fn product_state_has_unit_bonds() {
        let tree = branching_tree();
        let s = DenseState::basis(vec![2; 7], &[0, 1, 0, 1, 1, 0, 0]).unwrap();
        let t = exact_decompose(&s, &tree).unwrap();
        assert!(t.bond_dims.iter().all(|&m| m == 1));
        assert!(contract(&t).unwrap().max_abs_diff(&s).unwrap() < 1e-14);
    }

    #[test]
    fn ghz_has_bond_two_everywhere() {
        let tree = branching_tree();
        let s = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        let t = exact_decompose(&s, &tree).unwrap();
        assert_eq!(t.bond_dims, vec![2; 6]);
        for e in tree.edges() {
            let sp = spectrum_from_ttns(&t, e).unwrap();
            assert_eq!(sp.rank(), 2);
            assert!((sp.coefficients[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
            assert!((sp.coefficients[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        }
        assert!(check_canonical(&t) < 1e-12);
    }

    #[test]
    fn random_state_full_rank_on_branching_tree() {
        let tree = branching_tree();
        let s = make_named(NamedState::Random, &[2; 7], Some(3)).unwrap();
        let t = exact_decompose(&s, &tree).unwrap();
        for e in tree.edges() {
            let l = tree.branch(e).unwrap().len() as u32;
            assert_eq!(t.bond_dim(e), 2usize.pow(l).min(2usize.pow(7 - l)));
        }
        assert_eq!(t.bond_dim(3), 8);
        assert!(contract(&t).unwrap().max_abs_diff(&s).unwrap() < 1e-12);
    }

    #[test]
    fn single_vertex_root_is_state() {
        let (tree, _) = TreeGraph::from_edge_list(&[], &[3], None).unwrap();
        let s = make_named(NamedState::Random, &[3], Some(1)).unwrap();
        let t = exact_decompose(&s, &tree).unwrap();
        assert_eq!(t.tensor(1).shape, vec![3, 1]);
        assert_eq!(t.tensor(1).data, s.amplitudes());
        assert_eq!(check_canonical(&t), 0.0);
    }

    #[test]
    fn trivial_internal_chain_reproduces_leaf() {
        // d = 1 everywhere except the leaf, all bonds 1
        let tree = TreeGraph::chain(&[3, 1, 1, 1]).unwrap();
        let one = C64::new(1.0, 0.0);
        let leaf = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
        let mut tensors = vec![TtnsTensor { vertex: 1, shape: vec![3, 1], data: leaf.clone() }];
        for v in 2..=4 {
            tensors.push(TtnsTensor { vertex: v, shape: vec![1, 1, 1], data: vec![one] });
        }
        let t = Ttns { tree, tensors, bond_dims: vec![1; 3], spectra: None };
        assert_eq!(contract(&t).unwrap().amplitudes(), &leaf[..]);
        assert!(matches!(spectrum_from_ttns(&t, 1), Err(Error::SpectraUnavailable)));
    }

    #[test]
    fn scaled_tensor_breaks_isometry_by_three() {
        let tree = branching_tree();
        let s = make_named(NamedState::Random, &[2; 7], Some(5)).unwrap();
        let mut t = exact_decompose(&s, &tree).unwrap();
        for z in &mut t.tensors[1].data {
            *z *= 2.0;
        }
        assert!((check_canonical(&t) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let tree = branching_tree();
        let s = make_named(NamedState::Ghz, &[2; 7], None).unwrap();
        assert!(matches!(exact_decompose(&s.scaled(1.1), &tree), Err(Error::NotNormalized { .. })));
        let small = make_named(NamedState::Ghz, &[2; 3], None).unwrap();
        assert!(matches!(exact_decompose(&small, &tree), Err(Error::DimMismatch(_))));
        let mut t = exact_decompose(&s, &tree).unwrap();
        t.tensors[0].shape[1] = 3;
        assert!(matches!(contract(&t), Err(Error::ShapeInconsistent(_))));
    }
}
