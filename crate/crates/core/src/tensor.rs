//! Dense row-major tensors with named legs.
//!
//! Legs are either physical (`Phys(v)`, the site index of vertex `v`) or bond
//! legs (`Bond(v)`, the index on the edge pointing towards `v`).

use num_complex::Complex64 as C64;

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    Phys(usize),
    Bond(usize),
}

pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut st = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * shape[k + 1];
    }
    st
}

/// Reorders axes: output axis `k` is input axis `perm[k]`.
pub fn permute(data: &[C64], shape: &[usize], perm: &[usize]) -> Vec<C64> {
    assert_eq!(shape.len(), perm.len());
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return data.to_vec();
    }
    let in_strides = strides(shape);
    let out_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let src_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; shape.len()];
    let mut offset = 0usize;
    for _ in 0..total {
        out.push(data[offset]);
        // odometer increment over the output index
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            offset += src_strides[k];
            if idx[k] < out_shape[k] {
                break;
            }
            offset -= src_strides[k] * idx[k];
            idx[k] = 0;
        }
    }
    out
}

/// Keeps the leading `new_shape[k]` entries of every axis.
pub fn slice_leading(data: &[C64], shape: &[usize], new_shape: &[usize]) -> Vec<C64> {
    assert_eq!(shape.len(), new_shape.len());
    assert!(shape.iter().zip(new_shape).all(|(a, b)| b <= a));
    let st = strides(shape);
    let total: usize = new_shape.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..total {
        let off: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
        out.push(data[off]);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < new_shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LabeledTensor {
    pub legs: Vec<Leg>,
    pub shape: Vec<usize>,
    pub data: Vec<C64>,
}

impl LabeledTensor {
    pub fn new(legs: Vec<Leg>, shape: Vec<usize>, data: Vec<C64>) -> Self {
        assert_eq!(legs.len(), shape.len());
        assert_eq!(data.len(), shape.iter().product::<usize>());
        Self { legs, shape, data }
    }

    pub fn position(&self, leg: Leg) -> Option<usize> {
        self.legs.iter().position(|&l| l == leg)
    }

    pub fn dim(&self, leg: Leg) -> Option<usize> {
        self.position(leg).map(|p| self.shape[p])
    }

    /// Reorders legs into exactly `order` (must be a permutation of `legs`).
    pub fn permuted(&self, order: &[Leg]) -> Self {
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.position(*l).expect("permuted: unknown leg"))
            .collect();
        assert_eq!(perm.len(), self.legs.len(), "permuted: order must cover every leg");
        let shape = perm.iter().map(|&p| self.shape[p]).collect();
        Self { legs: order.to_vec(), shape, data: permute(&self.data, &self.shape, &perm) }
    }

    /// Moves `front` to the leading positions, keeping the remaining legs in
    /// their current relative order.
    pub fn front(&self, front: &[Leg]) -> Self {
        let mut order = front.to_vec();
        order.extend(self.legs.iter().filter(|l| !front.contains(l)));
        self.permuted(&order)
    }

    /// Sums over the shared leg `leg`. Result legs: remaining legs of `self`
    /// followed by remaining legs of `other`.
    pub fn contract(&self, other: &Self, leg: Leg) -> Self {
        let a = {
            let mut order: Vec<Leg> = self.legs.iter().copied().filter(|&l| l != leg).collect();
            order.push(leg);
            self.permuted(&order)
        };
        let b = other.front(&[leg]);
        let k = *a.shape.last().unwrap();
        assert_eq!(k, b.shape[0], "contract: bond dimension mismatch on {leg:?}");
        let m: usize = a.shape[..a.shape.len() - 1].iter().product();
        let n: usize = b.shape[1..].iter().product();
        let data = linalg::matmul(m, k, n, &a.data, &b.data);
        let mut legs = a.legs[..a.legs.len() - 1].to_vec();
        legs.extend_from_slice(&b.legs[1..]);
        let mut shape = a.shape[..a.shape.len() - 1].to_vec();
        shape.extend_from_slice(&b.shape[1..]);
        Self { legs, shape, data }
    }
}
