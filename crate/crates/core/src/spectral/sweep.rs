use rayon::prelude::*;
use serde::Serialize;

use super::eigh::{eigh_symmetric, Eigen};
use crate::angmom::HalfInt;
use crate::blocks::{decompose, BlockDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm};
use crate::model::{build_basis, build_hamiltonian, BasisState, SystemSpec};
use crate::scalar::Real;

/// Overlaps closer than this are resolved by energy proximity.
const PAIRING_AMBIGUITY: f64 = 1e-6;
/// Relative eigenvalue spacing below which states count as degenerate.
const DEGENERACY: f64 = 1e-10;

/// A group of basis states diagonalized together: a coupled block or a
/// singleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockInfo {
    pub id: usize,
    pub mtilde: HalfInt,
    pub indices: Vec<usize>,
    pub singleton: bool,
}

/// One eigenvalue tracked continuously over the drive grid.
#[derive(Debug, Clone)]
pub struct Branch<T> {
    pub block: usize,
    /// Position within the block, by energy at the first grid point.
    pub id: usize,
    pub energies: Vec<T>,
    /// Block-local unit eigenvectors, one per grid point.
    pub eigenvectors: Vec<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    Dark,
    Bright,
    ChameleonCandidate,
}

impl BranchTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchTag::Dark => "dark",
            BranchTag::Bright => "bright",
            BranchTag::ChameleonCandidate => "chameleon_candidate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenBranchSet<T> {
    pub omega_grid: Vec<T>,
    pub basis: Vec<BasisState>,
    pub blocks: Vec<BlockInfo>,
    pub branches: Vec<Branch<T>>,
    /// Per-branch tags; probe-dependent tags need [`EigenBranchSet::classify_with_probe`].
    pub classifications: Vec<BranchTag>,
}

impl<T: Real> EigenBranchSet<T> {
    pub fn branches_in_block(&self, block: usize) -> impl Iterator<Item = (usize, &Branch<T>)> {
        self.branches
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.block == block)
    }

    pub fn block_with_mtilde(&self, m: HalfInt) -> Option<&BlockInfo> {
        self.blocks.iter().find(|b| !b.singleton && b.mtilde == m)
    }

    /// Eigenvector of `branch` at grid point `k` embedded in the full basis.
    pub fn full_vector(&self, branch: usize, k: usize) -> Vec<T> {
        let b = &self.branches[branch];
        let mut out = vec![T::zero(); self.basis.len()];
        for (local, &global) in self.blocks[b.block].indices.iter().enumerate() {
            out[global] = b.eigenvectors[k][local];
        }
        out
    }

    /// `|<state|Ψ_branch(Ω_k)>|²` for every grid point.
    pub fn admixture(&self, branch: usize, state: &BasisState) -> Vec<T> {
        let b = &self.branches[branch];
        let pos = self.blocks[b.block]
            .indices
            .iter()
            .position(|&g| self.basis[g] == *state);
        match pos {
            Some(p) => b.eigenvectors.iter().map(|v| v[p] * v[p]).collect(),
            None => vec![T::zero(); self.omega_grid.len()],
        }
    }
}

fn validate_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
        return Err(Error::Precondition("omega grid must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("omega grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Block layout used for sweeping: coupled blocks as returned by
/// [`decompose`], then every singleton. The layout only depends on the
/// zero pattern, which is the same for every `Ω > 0`.
pub fn sweep_layout(spec: &SystemSpec) -> Result<(BlockDecomposition, Vec<BlockInfo>)> {
    let h = build_hamiltonian::<f64>(spec, 1.0)?;
    let decomposition = decompose(&h, spec.polarization_q)?;
    let mut layout: Vec<BlockInfo> = decomposition
        .blocks
        .iter()
        .map(|b| BlockInfo {
            id: 0,
            mtilde: b.mtilde,
            indices: b.indices.clone(),
            singleton: false,
        })
        .collect();
    let basis = h.labels();
    layout.extend(decomposition.dark_singletons.iter().map(|&i| BlockInfo {
        id: 0,
        mtilde: crate::blocks::mtilde(&basis[i], spec.polarization_q),
        indices: vec![i],
        singleton: true,
    }));
    for (id, b) in layout.iter_mut().enumerate() {
        b.id = id;
    }
    Ok((decomposition, layout))
}

/// Diagonalize every block at every grid point and connect eigenvalues
/// into continuous branches.
pub fn sweep<T: Real>(spec: &SystemSpec, omega_grid: &[T]) -> Result<EigenBranchSet<T>> {
    spec.validate()?;
    validate_grid(omega_grid)?;
    let (_, blocks) = sweep_layout(spec)?;

    // independent per grid point; collected in grid order
    let per_point: Vec<Vec<Eigen<T>>> = omega_grid
        .par_iter()
        .map(|&omega| {
            let h = build_hamiltonian(spec, omega)?;
            blocks
                .iter()
                .map(|b| eigh_symmetric(&h.entries().principal(&b.indices)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut branches = Vec::new();
    for block in &blocks {
        let series: Vec<&Eigen<T>> = per_point.iter().map(|p| &p[block.id]).collect();
        branches.extend(track_block(block.id, &series));
    }

    let mut set = EigenBranchSet {
        omega_grid: omega_grid.to_vec(),
        basis: build_basis(spec),
        blocks,
        branches,
        classifications: Vec::new(),
    };
    set.classifications = (0..set.branches.len())
        .map(|b| super::classify::shift_tag(&set, b, &super::ClassifyPolicy::default()))
        .collect();
    Ok(set)
}

fn track_block<T: Real>(block: usize, series: &[&Eigen<T>]) -> Vec<Branch<T>> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let n = first.values.len();
    let mut branches: Vec<Branch<T>> = (0..n)
        .map(|k| Branch {
            block,
            id: k,
            energies: vec![first.values[k]],
            eigenvectors: vec![first.vector(k)],
        })
        .collect();

    for eig in &series[1..] {
        let mut new_vectors: Vec<Vec<T>> = (0..n).map(|k| eig.vector(k)).collect();
        let new_values = &eig.values;

        let old_values: Vec<T> = branches.iter().map(|b| *b.energies.last().unwrap()).collect();
        let scale = old_values
            .iter()
            .chain(new_values)
            .fold(T::one(), |m, &x| m.max(x.abs()));
        let tol = T::lit(DEGENERACY) * scale;

        // degenerate subspaces carry no preferred basis: rotate them toward
        // the states they must connect to on the other side
        let old_clusters = clusters(&old_values, tol);
        {
            let new_refs: Vec<Vec<T>> = new_vectors.clone();
            for c in &old_clusters {
                let current: Vec<Vec<T>> =
                    c.iter().map(|&a| branches[a].eigenvectors.last().unwrap().clone()).collect();
                let aligned = align_subspace(&current, &new_refs);
                for (&a, v) in c.iter().zip(aligned) {
                    *branches[a].eigenvectors.last_mut().unwrap() = v;
                }
            }
        }
        let old_refs: Vec<Vec<T>> =
            branches.iter().map(|b| b.eigenvectors.last().unwrap().clone()).collect();
        for c in clusters(new_values, tol) {
            let current: Vec<Vec<T>> = c.iter().map(|&b| new_vectors[b].clone()).collect();
            let aligned = align_subspace(&current, &old_refs);
            for (&b, v) in c.iter().zip(aligned) {
                new_vectors[b] = v;
            }
        }

        let assignment = greedy_pairing(&old_refs, &old_values, &new_vectors, new_values);
        for (a, b) in assignment.into_iter().enumerate() {
            let mut v = new_vectors[b].clone();
            if dot(&old_refs[a], &v) < T::zero() {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            branches[a].energies.push(new_values[b]);
            branches[a].eigenvectors.push(v);
        }
    }
    branches
}

/// Groups of (sorted-order) indices whose values lie within `tol` of a neighbour.
fn clusters<T: Real>(values: &[T], tol: T) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for &i in &order {
        if let Some(&last) = current.last() {
            if values[i] - values[last] > tol {
                if current.len() > 1 {
                    out.push(std::mem::take(&mut current));
                } else {
                    current.clear();
                }
            }
        }
        current.push(i);
    }
    if current.len() > 1 {
        out.push(current);
    }
    out
}

/// New orthonormal basis of `span(subspace)` built from the projections of
/// the `targets` that overlap it most.
fn align_subspace<T: Real>(subspace: &[Vec<T>], targets: &[Vec<T>]) -> Vec<Vec<T>> {
    let k = subspace.len();
    let project = |t: &Vec<T>| -> Vec<T> {
        let mut p = vec![T::zero(); t.len()];
        for s in subspace {
            let c = dot(s, t);
            for (pi, &si) in p.iter_mut().zip(s) {
                *pi = *pi + c * si;
            }
        }
        p
    };
    let mut candidates: Vec<(T, usize)> = targets
        .iter()
        .enumerate()
        .map(|(i, t)| (subspace.iter().map(|s| dot(s, t).powi(2)).sum::<T>(), i))
        .collect();
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(k);
    let fallback = subspace.iter().cloned();
    let sources = candidates
        .iter()
        .map(|&(_, i)| project(&targets[i]))
        .chain(fallback);
    for mut v in sources {
        if basis.len() == k {
            break;
        }
        for b in &basis {
            let c = dot(b, &v);
            for (vi, &bi) in v.iter_mut().zip(b) {
                *vi = *vi - c * bi;
            }
        }
        let nv = norm(&v);
        if nv > T::lit(1e-6) {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    basis
}

/// `result[a]` is the new-state index continuing old state `a`.
fn greedy_pairing<T: Real>(
    old: &[Vec<T>],
    old_values: &[T],
    new: &[Vec<T>],
    new_values: &[T],
) -> Vec<usize> {
    let n = old.len();
    let overlap: Vec<Vec<T>> = old
        .iter()
        .map(|o| new.iter().map(|w| dot(o, w).abs()).collect())
        .collect();
    let mut old_free = vec![true; n];
    let mut new_free = vec![true; n];
    let mut result = vec![usize::MAX; n];
    for _ in 0..n {
        let mut best = T::neg_infinity();
        for a in (0..n).filter(|&a| old_free[a]) {
            for b in (0..n).filter(|&b| new_free[b]) {
                best = best.max(overlap[a][b]);
            }
        }
        let cut = best - T::lit(PAIRING_AMBIGUITY);
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for a in (0..n).filter(|&a| old_free[a]) {
            for b in (0..n).filter(|&b| new_free[b]) {
                if overlap[a][b] >= cut {
                    candidates.push((a, b));
                }
            }
        }
        if candidates.len() > 1 {
            log::debug!(
                "ambiguous branch pairing among {} candidates (overlap {}), using energy proximity",
                candidates.len(),
                best
            );
        }
        let &(a, b) = candidates
            .iter()
            .min_by(|&&(a1, b1), &&(a2, b2)| {
                let d1 = (old_values[a1] - new_values[b1]).abs();
                let d2 = (old_values[a2] - new_values[b2]).abs();
                d1.partial_cmp(&d2).unwrap().then((a1, b1).cmp(&(a2, b2)))
            })
            .expect("at least one free pair");
        old_free[a] = false;
        new_free[b] = false;
        result[a] = b;
    }
    result
}
