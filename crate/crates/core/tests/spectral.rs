use dressing::angmom::HalfInt;
use dressing::matrix::Matrix;
use dressing::model::{build_hamiltonian, coupling_block, SystemSpec};
use dressing::spectral::{
    admixture_turnover, eigh_symmetric, linear_grid, morris_shore_for_spec, morris_shore_reference,
    sweep, two_level_extrapolation, two_level_reference, BranchTag,
};
use dressing::{Hamiltonian, Scenario};

fn scenario() -> Scenario {
    Scenario::rb87_default()
}

fn ham(spec: &SystemSpec, omega: f64) -> Hamiltonian {
    build_hamiltonian(spec, omega).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn block_energies(spec: &SystemSpec, mt: i32, omega: f64) -> Vec<f64> {
    let set = sweep(spec, &[omega]).unwrap();
    let b = set.block_with_mtilde(HalfInt::from_int(mt)).unwrap().id;
    sorted(set.branches_in_block(b).map(|(_, br)| br.energies[0]).collect())
}

#[test]
fn two_level_reference_examples() {
    assert_eq!(two_level_reference(200.0, 0.0), (-100.0, 100.0));
    assert_eq!(two_level_reference(0.0, 5.0), (0.0, 5.0));
    let (lo, hi) = two_level_reference(3.0f64, 4.0);
    assert!((lo + 0.5).abs() < 1e-15 && (hi - 4.5).abs() < 1e-15);
}

#[test]
fn sweep_invariants_on_default_grid() {
    let s = scenario();
    let grid = s.sweep.grid().unwrap();
    let set = sweep(&s.system, &grid).unwrap();
    assert_eq!(set.branches.len(), 40);

    for (k, &omega) in grid.iter().enumerate() {
        let h = ham(&s.system, omega);
        let trace = h.entries().trace();
        let sum: f64 = set.branches.iter().map(|b| b.energies[k]).sum();
        assert!((sum - trace).abs() <= 1e-9 * trace.abs().max(1.0));

        for block in &set.blocks {
            let members: Vec<usize> = set.branches_in_block(block.id).map(|(i, _)| i).collect();
            let sub = h.entries().principal(&block.indices);
            let n = block.indices.len();
            let v = Matrix::from_fn(n, members.len(), |r, c| set.branches[members[c]].eigenvectors[k][r]);
            let gram = v.transpose().matmul(&v).sub(&Matrix::identity(members.len()));
            assert!(gram.max_abs() <= 1e-9);
            let lambda = Matrix::from_diagonal(
                &members.iter().map(|&m| set.branches[m].energies[k]).collect::<Vec<_>>(),
            );
            let res = sub.matmul(&v).sub(&v.matmul(&lambda)).frobenius_norm();
            assert!(res <= 1e-9 * h.entries().frobenius_norm());
        }
    }

    for b in &set.branches {
        for (k, w) in b.eigenvectors.windows(2).enumerate() {
            let ov: f64 = w[0]
                .iter()
                .zip(&w[1])
                .map(|(x, y)| x * y)
                .sum();
            assert!(ov.abs() >= 0.5, "branch {}/{} jumps at {}", b.block, b.id, grid[k + 1]);
        }
    }
}

#[test]
fn stretched_block_is_exact_two_level() {
    let s = scenario();
    let grid = linear_grid(0.0f64, 800.0, 2.5).unwrap();
    let set = sweep(&s.system, &grid).unwrap();
    let b = set.block_with_mtilde(HalfInt::from_int(3)).unwrap().id;
    let br: Vec<_> = set.branches_in_block(b).map(|(_, x)| x).collect();
    assert_eq!(br.len(), 2);
    for (k, &omega) in grid.iter().enumerate() {
        let (lo, hi) = if br[0].energies[k] < br[1].energies[k] { (0, 1) } else { (1, 0) };
        assert!((br[hi].energies[k] - br[lo].energies[k] - omega).abs() <= 1e-9);
    }
}

#[test]
fn zero_drive_endpoint_reproduces_lande() {
    let s = scenario();
    let set = sweep(&s.system, &[0.0, 1.0]).unwrap();
    let levels: Vec<f64> = s.system.lower.f_levels().iter().map(|&f| s.system.lower.level_energy(f)).collect();
    let upper = s.system.upper_offset().unwrap();
    for b in &set.branches {
        let e = b.energies[0];
        let hit = levels.iter().chain(std::iter::once(&upper)).any(|&l| (e - l).abs() < 1e-10);
        assert!(hit, "{e}");
    }
}

#[test]
fn morris_shore_matches_sweep_when_degenerate() {
    let mut s = scenario().system;
    s.lower.hyperfine_a = 0.0;
    let grid: Vec<f64> = (0..25).map(|k| 13.0 + 31.7 * f64::from(k)).collect();
    let set = sweep(&s, &grid).unwrap();
    for (k, &omega) in grid.iter().enumerate() {
        let full = sorted(set.branches.iter().map(|b| b.energies[k]).collect());
        let ms = morris_shore_for_spec(&s, omega).unwrap();
        for (x, y) in full.iter().zip(&ms) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
    assert!(morris_shore_for_spec(&scenario().system, 100.0f64).is_err());
}

#[test]
fn morris_shore_small_cases() {
    let c = Matrix::from_rows(&[vec![100.0]]);
    assert_eq!(morris_shore_reference(&c, 0.0).unwrap(), vec![-100.0, 100.0]);
    let z = Matrix::<f64>::zeros(3, 2);
    assert_eq!(morris_shore_reference(&z, 7.0).unwrap(), vec![0.0, 0.0, 7.0, 7.0, 7.0]);
    let mut s = scenario().system;
    s.lower.hyperfine_a = 0.0;
    let block = coupling_block::<f64>(&s, 200.0).unwrap();
    let ms = morris_shore_reference(&block, 0.0).unwrap();
    let full = eigh_symmetric(ham(&s, 200.0).entries()).unwrap().values;
    for (x, y) in full.iter().zip(&ms) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn level_repulsion_in_six_state_block() {
    let s = scenario();
    let grid = linear_grid(10.0, 800.0, 10.0).unwrap();
    let set = sweep(&s.system, &grid).unwrap();
    let b = set.block_with_mtilde(HalfInt::from_int(1)).unwrap().id;
    for (k, &omega) in grid.iter().enumerate() {
        let e = sorted(set.branches_in_block(b).map(|(_, x)| x.energies[k]).collect());
        assert_eq!(e.len(), 6);
        for w in e.windows(2) {
            assert!(w[1] - w[0] > 1e-6, "near-degenerate at {omega}");
        }
    }

    let info = set.blocks[b].clone();
    let lines = two_level_extrapolation(&s.system, &info, &[400.0]).unwrap();
    let ext = sorted(lines.iter().map(|l| l.energies[0]).collect());
    let exact = block_energies(&s.system, 1, 400.0);
    assert!(exact[0] < ext[0]);
    assert!(exact[5] > ext[5]);
}

#[test]
fn extrapolation_agrees_to_second_order() {
    let s = scenario();
    let set = sweep(&s.system, &[1.0]).unwrap();
    for mt in [3, 2, 1, 0, -1] {
        let info = set.block_with_mtilde(HalfInt::from_int(mt)).unwrap().clone();
        let err = |omega: f64| {
            let lines = two_level_extrapolation(&s.system, &info, &[omega]).unwrap();
            let ext = sorted(lines.iter().map(|l| l.energies[0]).collect());
            let exact = block_energies(&s.system, mt, omega);
            assert_eq!(ext.len(), exact.len());
            ext.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(2.0), err(1.0), err(0.5));
        // super-linear: err/Ω shrinks as Ω does
        assert!(e2 / 1.0 < 0.75 * e1 / 2.0 || e1 < 1e-12, "m̃={mt}: {e1} {e2}");
        assert!(e3 / 0.5 < 0.75 * e2 / 1.0 || e2 < 1e-12, "m̃={mt}: {e2} {e3}");
    }
}

#[test]
fn resonant_extrapolation_is_symmetric() {
    let s = scenario();
    let set = sweep(&s.system, &[1.0]).unwrap();
    let info = set.block_with_mtilde(HalfInt::from_int(1)).unwrap().clone();
    let f0 = HalfInt::from_int(3);
    let e0 = s.system.lower.level_energy(f0);
    let lines = two_level_extrapolation(&s.system, &info, &[100.0f64]).unwrap();
    let res: Vec<_> = lines.iter().filter(|l| l.f == f0).collect();
    assert_eq!(res.len(), 2);
    assert!(res[0].detuning.abs() < 1e-12);
    assert!((res[0].energies[0] - e0 + (res[1].energies[0] - e0)).abs() < 1e-12);
}

#[test]
fn strong_drive_approaches_linear_asymptote() {
    let s = scenario();
    let a = s.system.lower.hyperfine_a;
    let set = sweep(&s.system, &[1.0]).unwrap();
    let info = set.block_with_mtilde(HalfInt::from_int(1)).unwrap().clone();
    let unit = coupling_block::<f64>(&s.system, 1.0).unwrap();
    let basis = &set.basis;
    let n_low = s.system.lower.dimension();
    let rows: Vec<usize> = info.indices.iter().filter(|&&i| basis[i].is_upper()).map(|&i| i - n_low).collect();
    let cols: Vec<usize> = info.indices.iter().filter(|&&i| !basis[i].is_upper()).copied().collect();
    let c = Matrix::from_fn(rows.len(), cols.len(), |r, k| unit[(rows[r], cols[k])]);
    let ctc = eigh_symmetric(&c.transpose().matmul(&c)).unwrap();
    let mut slopes: Vec<f64> = ctc.values.iter().flat_map(|&v| [-v.sqrt(), v.sqrt()]).collect();
    slopes = sorted(slopes);

    let mut last = f64::INFINITY;
    for factor in [50.0, 100.0, 200.0, 400.0, 800.0] {
        let omega = factor * a;
        let e = block_energies(&s.system, 1, omega);
        let dev = e.iter().zip(&slopes).map(|(x, k)| (x / omega - k).abs()).fold(0.0, f64::max);
        assert!(dev < last, "deviation {dev} did not shrink at {factor}A");
        last = dev;
    }
    assert!(last < 1e-2);
}

#[test]
fn classification_on_default_sweep() {
    let s = scenario();
    let grid = s.sweep.grid().unwrap();
    let mut set = sweep(&s.system, &grid).unwrap();
    let probe = s.probe.probed_lower_state();
    set.classify_with_probe(&probe, &s.classify);

    for b in set.blocks.iter().filter(|b| b.singleton) {
        for (i, _) in set.branches_in_block(b.id) {
            assert_eq!(set.classifications[i], BranchTag::Dark);
        }
    }
    let plus1 = set.block_with_mtilde(HalfInt::from_int(1)).unwrap().id;
    let candidates: Vec<usize> = set
        .branches_in_block(plus1)
        .filter(|&(i, _)| set.classifications[i] == BranchTag::ChameleonCandidate)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(candidates.len(), 1);
    let k = admixture_turnover(&set, candidates[0], &probe, &s.classify).unwrap();
    assert!(grid[k] > 100.0 && grid[k] < 600.0);

    // stretched block with the σ⁺ probe: constant admixture 1/2, never a candidate
    let mut sp = s.probe.clone();
    sp.q = 1;
    let stretched = sp.probed_lower_state();
    set.classify_with_probe(&stretched, &s.classify);
    let plus3 = set.block_with_mtilde(HalfInt::from_int(3)).unwrap().id;
    for (i, _) in set.branches_in_block(plus3) {
        assert_eq!(set.classifications[i], BranchTag::Bright);
        let adm = set.admixture(i, &stretched);
        assert!(adm[1..].iter().all(|x| (x - 0.5).abs() < 1e-12));
    }
}

#[test]
fn sweep_rejects_bad_grids() {
    let s = scenario().system;
    assert!(sweep(&s, &[1.0, 0.5]).is_err());
    assert!(sweep(&s, &[-1.0]).is_err());
    assert!(sweep(&s, &[f64::NAN]).is_err());
    assert!(sweep::<f64>(&s, &[]).unwrap().branches.iter().all(|b| b.energies.is_empty()));
}

#[test]
fn single_precision_sweep_tracks_double() {
    let s = scenario().system;
    let g32: Vec<f32> = vec![0.0, 100.0, 200.0];
    let set32 = sweep(&s, &g32).unwrap();
    let set64 = sweep(&s, &[0.0, 100.0, 200.0]).unwrap();
    for k in 0..3 {
        let a = sorted(set32.branches.iter().map(|b| f64::from(b.energies[k])).collect());
        let b = sorted(set64.branches.iter().map(|b| b.energies[k]).collect());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-3 * y.abs().max(1.0));
        }
    }
}
