use proptest::prelude::*;

use dressing::angmom::{clebsch_gordan, HalfInt};
use dressing::model::{build_hamiltonian, BasisState};
use dressing::spectral::{eigh_symmetric, linear_grid};
use dressing::spectro::{
    dressed_lines, fit_peaks, signal_weight, synthesize_spectrum, trap_omega_distribution,
    FitOptions, GaussianPeak, OmegaDistribution, OmegaModel, ProbeSpec, Spectrum, TrapConfig,
};
use dressing::{Hamiltonian, Scenario};

fn scenario() -> Scenario {
    Scenario::rb87_default()
}

fn ham(s: &Scenario, omega: f64) -> Hamiltonian {
    build_hamiltonian(&s.system, omega).unwrap()
}

fn sample(peaks: &[GaussianPeak<f64>], grid: &[f64]) -> Spectrum<f64> {
    let y = grid.iter().map(|&x| peaks.iter().map(|p| p.eval(x)).sum()).collect();
    Spectrum::new(grid.to_vec(), y).unwrap()
}

#[test]
fn resonant_weight_at_weak_drive() {
    let s = scenario();
    let probe = s.probe.probed_lower_state();
    let lines = dressed_lines(&s.system, &probe, 0.05).unwrap();
    let e0 = s.system.upper_offset().unwrap();
    let resonant: Vec<_> = lines.iter().filter(|l| (l.energy - e0).abs() < 1.0).collect();
    let h = |t| HalfInt::from_twice(t);
    let cg: f64 = clebsch_gordan(h(3), probe.m_j, h(3), probe.m_i, h(6), h(2)).unwrap();
    let want = 0.5 * cg * cg * 0.5;
    assert!((want - 0.05).abs() < 1e-12);
    // the two resonant dressed states carry p ≈ 0.05 each, the third
    // state near resonance carries none
    let mut weights: Vec<f64> = resonant.iter().map(|l| l.weight).collect();
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!((weights[0] - want).abs() < 1e-3 && (weights[1] - want).abs() < 1e-3, "{weights:?}");
}

#[test]
fn weight_zero_cases() {
    let s = scenario();
    let h = ham(&s, 300.0);
    let e = eigh_symmetric(h.entries()).unwrap();
    let probe = s.probe.probed_lower_state();
    let dark = BasisState::upper(HalfInt::from_twice(-5), HalfInt::from_twice(-3));
    let i = h.index_of(&dark).unwrap();
    let k = (0..40).find(|&k| e.vectors[(i, k)].abs() > 0.999).unwrap();
    assert_eq!(signal_weight(&e.vector(k), h.labels(), &probe), 0.0);

    // stretched-block states have no overlap with the σ⁻ target
    let st = BasisState::lower(HalfInt::from_twice(3), HalfInt::from_twice(3));
    let j = h.index_of(&st).unwrap();
    for k in (0..40).filter(|&k| e.vectors[(j, k)].abs() > 0.5) {
        assert_eq!(signal_weight(&e.vector(k), h.labels(), &probe), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_sub_probabilities(omega in 0.0f64..1000.0, q in -1i32..=1) {
        let s = scenario();
        let h = ham(&s, omega);
        let e = eigh_symmetric(h.entries()).unwrap();
        let mut p = s.probe.clone();
        p.q = q;
        let probed = p.probed_lower_state();
        let total: f64 = (0..40).map(|k| signal_weight(&e.vector(k), h.labels(), &probed)).sum();
        prop_assert!(total <= 1.0 + 1e-12);
        for k in 0..40 {
            let w = signal_weight(&e.vector(k), h.labels(), &probed);
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn fit_recovers_separated_peaks(
        c1 in -150.0f64..-60.0, gap in 0.0f64..40.0,
        s1 in 3.0f64..8.0, s2 in 3.0f64..8.0,
        a1 in 0.2f64..2.0, a2 in 0.2f64..2.0,
    ) {
        // separation at least 4 sigma of the wider peak
        let c2 = c1 + 4.0 * s1.max(s2) + 5.0 + gap;
        let truth = [
            GaussianPeak { center: c1, sigma: s1, amplitude: a1 },
            GaussianPeak { center: c2, sigma: s2, amplitude: a2 },
        ];
        let grid = linear_grid(-250.0, 150.0, 0.25).unwrap();
        let r = fit_peaks(&sample(&truth, &grid), &FitOptions::new(2)).unwrap();
        for (got, want) in r.peaks.iter().zip(&truth) {
            prop_assert!(((got.center - want.center) / want.center).abs() < 1e-4);
            prop_assert!(((got.sigma - want.sigma) / want.sigma).abs() < 1e-4);
            prop_assert!(((got.amplitude - want.amplitude) / want.amplitude).abs() < 1e-4);
        }
    }
}

#[test]
fn spectrum_is_linear_in_sample_weights() {
    let s = scenario();
    let grid = linear_grid(-300.0f64, 300.0, 2.0).unwrap();
    let d1 = OmegaDistribution { samples: vec![(1.0, 1.0)], model: OmegaModel::TrapSampled, seed: None };
    let d2 = OmegaDistribution { samples: vec![(0.6, 1.0)], model: OmegaModel::TrapSampled, seed: None };
    let mix = OmegaDistribution {
        samples: vec![(1.0, 0.3), (0.6, 0.7)],
        model: OmegaModel::TrapSampled,
        seed: None,
    };
    let run = |d: &OmegaDistribution| synthesize_spectrum(&s.system, &s.probe, d, 400.0, &grid, true).unwrap();
    let (a, b, m) = (run(&d1), run(&d2), run(&mix));
    for i in 0..grid.len() {
        assert!((m.signal[i] - (0.3 * a.signal[i] + 0.7 * b.signal[i])).abs() < 1e-15);
    }
}

#[test]
fn two_level_spectrum_round_trip() {
    let s = scenario();
    let probe = ProbeSpec::rb87_stretched_ground(1, s.probe.linewidth_mhz);
    let grid = linear_grid(-200.0, 300.0, 0.5).unwrap();
    let spec =
        synthesize_spectrum(&s.system, &probe, &OmegaDistribution::homogeneous(), 200.0, &grid, true).unwrap();
    let r = fit_peaks(&spec, &FitOptions::new(2)).unwrap();
    let e0 = s.system.upper_offset().unwrap();
    assert!((r.peaks[0].center - (e0 - 100.0)).abs() < 0.01);
    assert!((r.peaks[1].center - (e0 + 100.0)).abs() < 0.01);
    assert!((r.peaks[0].amplitude - r.peaks[1].amplitude).abs() < 1e-9);
}

#[test]
fn five_peak_round_trip_matches_block_energies() {
    let s = scenario();
    let grid = s.spectrum.grid().unwrap();
    let lw = s.probe.linewidth_mhz;
    let spec = synthesize_spectrum(
        &s.system,
        &s.probe,
        &OmegaDistribution::homogeneous(),
        400.0,
        &grid,
        true,
    )
    .unwrap();
    let r = fit_peaks(&spec, &FitOptions::new(5)).unwrap();
    let mut lines = dressed_lines(&s.system, &s.probe.probed_lower_state(), 400.0).unwrap();
    assert_eq!(lines.len(), 6);
    lines.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap());
    let mut top: Vec<f64> = lines[..5].iter().map(|l| l.energy).collect();
    top.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (p, e) in r.peaks.iter().zip(&top) {
        assert!((p.center - e).abs() < 0.5 * lw);
        assert!((p.center - e).abs() < 1e-3 * lw, "{} vs {e}", p.center);
    }
}

#[test]
fn narrow_lines_concentrate_at_eigenenergies() {
    let s = scenario();
    let mut probe = s.probe.clone();
    probe.linewidth_mhz = 0.05;
    let grid = linear_grid(-300.0, 300.0, 0.005).unwrap();
    let spec = synthesize_spectrum(&s.system, &probe, &OmegaDistribution::homogeneous(), 400.0, &grid, true).unwrap();
    let lines = dressed_lines(&s.system, &probe.probed_lower_state(), 400.0).unwrap();
    let dx = 0.005;
    let mass: f64 = spec.signal.iter().sum::<f64>() * dx;
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    assert!((mass - total).abs() < 1e-6);
    let mean: f64 = spec.detuning.iter().zip(&spec.signal).map(|(x, y)| x * y).sum::<f64>() * dx / mass;
    let want: f64 = lines.iter().map(|l| l.energy * l.weight).sum::<f64>() / total;
    assert!((mean - want).abs() < 1e-6);
}

#[test]
fn trap_distribution_is_skewed_to_peak() {
    let trap = TrapConfig::default();
    let d = trap_omega_distribution(&trap, 4000, 7).unwrap();
    let wsum: f64 = d.samples.iter().map(|s| s.1).sum();
    assert!((wsum - 1.0).abs() < 1e-12);
    assert!(d.samples.iter().all(|&(f, w)| f > 0.0 && f <= 1.0 && w >= 0.0));
    let upper: f64 = d.samples.iter().filter(|s| s.0 > 0.75).map(|s| s.1).sum();
    let lower: f64 = d.samples.iter().filter(|s| s.0 <= 0.5).map(|s| s.1).sum();
    assert!(upper > 0.5 && upper > 3.0 * lower, "upper {upper}, lower {lower}");

    let again = trap_omega_distribution(&trap, 4000, 7).unwrap();
    assert_eq!(d, again);
    let other = trap_omega_distribution(&trap, 4000, 8).unwrap();
    assert_ne!(d, other);

    let mut cold = trap.clone();
    cold.temperature_uk = 1e-9;
    let c = trap_omega_distribution(&cold, 200, 1).unwrap();
    assert!(c.mean_fraction() > 1.0 - 1e-6);
}

#[test]
fn trap_broadening_pulls_peaks_inward() {
    let s = scenario();
    let grid = s.spectrum.grid().unwrap();
    let d = trap_omega_distribution(&s.trap, 800, s.seed).unwrap();
    let hom = synthesize_spectrum(&s.system, &s.probe, &OmegaDistribution::homogeneous(), 400.0, &grid, true).unwrap();
    let inh = synthesize_spectrum(&s.system, &s.probe, &d, 400.0, &grid, true).unwrap();
    let argmax = |sp: &Spectrum<f64>, lo: f64, hi: f64| {
        let mut best = (0.0, f64::MIN);
        for (&x, &y) in sp.detuning.iter().zip(&sp.signal) {
            if x > lo && x < hi && y > best.1 {
                best = (x, y);
            }
        }
        best.0
    };
    let e0 = s.system.upper_offset().unwrap();
    // strongest peak above resonance moves towards the line centre
    let (h, i) = (argmax(&hom, 100.0, 170.0), argmax(&inh, 60.0, 170.0));
    assert!(i < h && i > e0, "{i} vs {h}");
}

#[test]
fn deterministic_synthesis_is_bit_stable() {
    let s = scenario();
    let grid = linear_grid(-300.0, 300.0, 1.0).unwrap();
    let d = trap_omega_distribution(&s.trap, 300, 11).unwrap();
    let a = synthesize_spectrum(&s.system, &s.probe, &d, 400.0, &grid, true).unwrap();
    let b = synthesize_spectrum(&s.system, &s.probe, &d, 400.0, &grid, true).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fit_precondition_and_invalid_inputs() {
    let s = scenario();
    let mut bad = s.probe.clone();
    bad.linewidth_mhz = 0.0;
    let grid = [0.0, 1.0];
    assert!(synthesize_spectrum(&s.system, &bad, &OmegaDistribution::homogeneous(), 1.0, &grid, true).is_err());
    let mut trap = TrapConfig::default();
    trap.coupling_beam.waist_um = 0.0;
    assert!(trap_omega_distribution(&trap, 10, 1).is_err());
}
