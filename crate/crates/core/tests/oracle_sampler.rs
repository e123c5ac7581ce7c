//! Monte Carlo against exact enumeration on grids small enough to enumerate.

use crit_core::estimators::batch_mean;
use crit_core::lattice::{build_lattice, BoundaryCondition};
use crit_core::oracle::{exact_fk_probabilities, exact_spin_expectations, FkEvent, SmallGraph};
use crit_core::sampler::{critical_constants, sample_chain, Algorithm, SamplerConfig};

fn mc_series(n: usize, bc: BoundaryCondition, alg: Algorithm, seed: u64, samples: usize, f: impl Fn(&crit_core::sampler::Sample<'_>) -> f64) -> Vec<f64> {
    let spec = build_lattice(n, bc).unwrap();
    let cfg = SamplerConfig::new(alg, seed);
    let mut out = Vec::with_capacity(samples);
    sample_chain(&spec, &cfg, samples, |s| {
        out.push(f(s));
        Ok::<(), String>(())
    })
    .unwrap();
    out
}

#[test]
fn minus_boundary_mirrors_plus() {
    let (beta, _) = critical_constants();
    let plus = exact_spin_expectations(&SmallGraph::grid(3, BoundaryCondition::Plus).unwrap(), beta, &[vec![4], vec![0, 8]]).unwrap();
    let minus = exact_spin_expectations(&SmallGraph::grid(3, BoundaryCondition::Minus).unwrap(), beta, &[vec![4], vec![0, 8]]).unwrap();
    assert!((plus.values[0] + minus.values[0]).abs() < 1e-14);
    assert!((plus.values[1] - minus.values[1]).abs() < 1e-14);
    for alg in [Algorithm::SwendsenWang, Algorithm::Wolff] {
        let xs = mc_series(3, BoundaryCondition::Minus, alg, 21, 40_000, |s| s.spins.get(4) as f64);
        let e = batch_mean(&xs);
        assert!(e.z_score(minus.values[0]).abs() < 4.0, "{alg:?}: {e:?} vs {}", minus.values[0]);
    }
}

#[test]
fn wolff_matches_plus_corner_correlation() {
    let (beta, _) = critical_constants();
    let exact = exact_spin_expectations(&SmallGraph::grid(3, BoundaryCondition::Plus).unwrap(), beta, &[vec![0, 8]]).unwrap().values[0];
    let xs = mc_series(3, BoundaryCondition::Plus, Algorithm::Wolff, 22, 40_000, |s| (s.spins.get(0) * s.spins.get(8)) as f64);
    let e = batch_mean(&xs);
    assert!(e.z_score(exact).abs() < 4.0, "{e:?} vs {exact}");
}

#[test]
fn free_grid_connectivity_matches_fk_enumeration() {
    let (_, p) = critical_constants();
    let g = SmallGraph::grid(3, BoundaryCondition::Free).unwrap();
    let exact = exact_fk_probabilities(&g, p, 2.0, &[FkEvent::Connected(0, 8)]).unwrap()[0];
    let xs = mc_series(3, BoundaryCondition::Free, Algorithm::SwendsenWang, 23, 40_000, |s| s.colored.labels().connected(0, 8) as u8 as f64);
    let e = batch_mean(&xs);
    assert!(e.z_score(exact).abs() < 4.0, "{e:?} vs {exact}");
}
