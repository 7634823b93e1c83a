//! Symmetry blocks of the coupled Hamiltonian.
//!
//! The conserved quantity is the projection of the total angular momentum
//! of atom plus photon, `m̃ = m_j + m_I - n_p`, with `n_p = q` on upper
//! states and 0 on lower ones. Blocks are found as connected components of
//! the nonzero pattern rather than by grouping on `m̃`, since states that
//! share `m̃` can still be unreachable; `m̃` is then attached per component
//! and cross-checked.

use std::collections::VecDeque;

use serde::Serialize;

use crate::angmom::HalfInt;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{BasisState, LabeledMatrix, Manifold};
use crate::scalar::Real;

/// Entries below this fraction of `max |H|` are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-12;

pub fn mtilde(state: &BasisState, q: i32) -> HalfInt {
    let photon = match state.manifold {
        Manifold::Lower => HalfInt::ZERO,
        Manifold::Upper => HalfInt::from_int(q),
    };
    state.m_j + state.m_i - photon
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub mtilde: HalfInt,
    /// Basis indices, ascending.
    pub indices: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    /// Multi-state blocks by descending `m̃`, ties broken by first index.
    pub blocks: Vec<Block>,
    /// Basis indices with no off-diagonal coupling, ascending.
    pub dark_singletons: Vec<usize>,
    /// Reverse Cuthill-McKee ordering of the whole basis.
    pub permutation: Vec<usize>,
}

impl BlockDecomposition {
    /// Index of the block containing `index`, or `None` for a singleton.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.indices.contains(&index))
    }

    pub fn block_with_mtilde(&self, m: HalfInt) -> Option<&Block> {
        self.blocks.iter().find(|b| b.mtilde == m)
    }

    pub fn sizes(&self) -> Vec<(HalfInt, usize)> {
        self.blocks.iter().map(|b| (b.mtilde, b.len())).collect()
    }
}

fn adjacency<T: Real>(m: &Matrix<T>) -> Vec<Vec<usize>> {
    let n = m.rows();
    let cut = T::lit(STRUCTURAL_ZERO) * m.max_abs();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && (m[(i, j)].abs() > cut || m[(j, i)].abs() > cut))
                .collect()
        })
        .collect()
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Partition the basis into connected blocks plus uncoupled singletons.
pub fn decompose<T: Real>(h: &LabeledMatrix<T>, q: i32) -> Result<BlockDecomposition> {
    let adj = adjacency(h.entries());
    let labels = h.labels();
    let mut blocks = Vec::new();
    let mut dark_singletons = Vec::new();
    for comp in components(&adj) {
        if comp.len() == 1 {
            dark_singletons.push(comp[0]);
            continue;
        }
        let m = mtilde(&labels[comp[0]], q);
        if let Some(&bad) = comp.iter().find(|&&i| mtilde(&labels[i], q) != m) {
            return Err(Error::SymmetryViolation(format!(
                "{} (m̃ = {}) and {} (m̃ = {}) are coupled",
                labels[comp[0]],
                m,
                labels[bad],
                mtilde(&labels[bad], q)
            )));
        }
        blocks.push(Block {
            mtilde: m,
            indices: comp,
        });
    }
    blocks.sort_by(|a, b| b.mtilde.cmp(&a.mtilde).then(a.indices[0].cmp(&b.indices[0])));
    Ok(BlockDecomposition {
        blocks,
        dark_singletons,
        permutation: rcm_from_adjacency(&adj),
    })
}

/// Reverse Cuthill-McKee ordering of the nonzero pattern.
///
/// Components are visited in order of their smallest index. Each starts
/// at its minimum-degree vertex, enqueues neighbours by ascending degree
/// then index, and is reversed on its own, so uncoupled vertices keep
/// ascending order.
pub fn rcm_order<T: Real>(m: &Matrix<T>) -> Vec<usize> {
    rcm_from_adjacency(&adjacency(m))
}

fn rcm_from_adjacency(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for comp in components(adj) {
        let start = *comp
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("components are non-empty");
        let mut local = vec![start];
        placed[start] = true;
        let mut head = 0;
        while head < local.len() {
            let v = local[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                placed[w] = true;
                local.push(w);
            }
        }
        local.reverse();
        order.extend(local);
    }
    order
}

/// Half-bandwidth `max |i - j|` over structural nonzeros after permuting.
pub fn bandwidth<T: Real>(m: &Matrix<T>, perm: &[usize]) -> usize {
    let adj = adjacency(m);
    let mut pos = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    adj.iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
        .map(|(i, j)| pos[i].abs_diff(pos[j]))
        .max()
        .unwrap_or(0)
}
