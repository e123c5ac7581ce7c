//! Exact enumeration on tiny graphs: Ising spin measures and FK
//! random-cluster measures, used as ground truth for the sampler and the
//! estimators.
//!
//! The Ising weight of a configuration is `exp(β Σ_e J_e σ_a σ_b + Σ_v h_v σ_v)`;
//! the field is not multiplied by `β`. An optional ghost vertex (index
//! `n_free`) carries a fixed spin.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{build_lattice, BoundaryCondition};
use crate::sampler::{bond_probability, critical_constants};

pub const MAX_FREE_VERTICES: usize = 20;
pub const MAX_FK_EDGES: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallGraph {
    n_free: usize,
    ghost: Option<i8>,
    edges: Vec<(usize, usize, f64)>,
    field: Vec<f64>,
}

impl SmallGraph {
    pub fn new(n_free: usize, ghost: Option<i8>, edges: Vec<(usize, usize, f64)>, field: Vec<f64>) -> Result<Self> {
        if n_free == 0 || n_free > MAX_FREE_VERTICES {
            return invalid(format!("free vertex count {n_free} outside 1..={MAX_FREE_VERTICES}"));
        }
        if !matches!(ghost, None | Some(1) | Some(-1)) {
            return invalid("ghost spin must be +1 or -1");
        }
        if field.len() != n_free {
            return invalid(format!("field has {} entries for {n_free} vertices", field.len()));
        }
        let n_vert = n_free + ghost.is_some() as usize;
        for &(a, b, j) in &edges {
            if a >= n_vert || b >= n_vert || a == b {
                return invalid(format!("bad edge ({a}, {b})"));
            }
            if !j.is_finite() {
                return invalid("non-finite coupling");
            }
        }
        if field.iter().any(|h| !h.is_finite()) {
            return invalid("non-finite field");
        }
        Ok(SmallGraph { n_free, ghost, edges, field })
    }

    /// Unit couplings on an `n × n` grid, numbered like the lattice module.
    pub fn grid(n: usize, boundary: BoundaryCondition) -> Result<Self> {
        let spec = build_lattice(n, boundary)?;
        let edges = (0..spec.edge_count())
            .map(|e| {
                let (a, b) = spec.edge_endpoints(e);
                (a, b, 1.0)
            })
            .collect();
        SmallGraph::new(n * n, boundary.ghost_spin(), edges, vec![0.0; n * n])
    }

    /// One free vertex joined to a `+` ghost by `k` unit edges.
    pub fn star(k: usize) -> Result<Self> {
        SmallGraph::new(1, Some(1), vec![(0, 1, 1.0); k], vec![0.0])
    }

    pub fn with_field(mut self, field: Vec<f64>) -> Result<Self> {
        if field.len() != self.n_free || field.iter().any(|h| !h.is_finite()) {
            return invalid("field must have one finite entry per free vertex");
        }
        self.field = field;
        Ok(self)
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn ghost(&self) -> Option<usize> {
        self.ghost.map(|_| self.n_free)
    }

    pub fn vertex_count(&self) -> usize {
        self.n_free + self.ghost.is_some() as usize
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// Same graph with free vertices relabelled `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_free {
            return invalid("permutation length mismatch");
        }
        let map = |v: usize| if v < self.n_free { perm[v] } else { v };
        let mut field = vec![0.0; self.n_free];
        for (v, &h) in self.field.iter().enumerate() {
            field[perm[v]] = h;
        }
        let edges = self.edges.iter().map(|&(a, b, j)| (map(a), map(b), j)).collect();
        SmallGraph::new(self.n_free, self.ghost, edges, field)
    }

    #[inline]
    fn spin(&self, state: u32, v: usize) -> f64 {
        if v < self.n_free {
            if state >> v & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        } else {
            self.ghost.unwrap_or(1) as f64
        }
    }

    fn log_weight(&self, beta: f64, state: u32) -> f64 {
        let mut e = 0.0;
        for &(a, b, j) in &self.edges {
            e += j * self.spin(state, a) * self.spin(state, b);
        }
        let mut h = 0.0;
        for (v, &f) in self.field.iter().enumerate() {
            h += f * self.spin(state, v);
        }
        beta * e + h
    }

    /// Normalised Gibbs weights of all `2^n_free` states.
    fn gibbs_weights(&self, beta: f64) -> Vec<f64> {
        let states = 1u32 << self.n_free;
        let lw: Vec<f64> = (0..states).map(|s| self.log_weight(beta, s)).collect();
        let max = lw.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let mut w: Vec<f64> = lw.iter().map(|x| (x - max).exp()).collect();
        let z = neumaier(w.iter().copied());
        w.iter_mut().for_each(|x| *x /= z);
        w
    }
}

fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinExpectations {
    /// `⟨Π_{v ∈ obs} σ_v⟩` for each requested observable.
    pub values: Vec<f64>,
    /// Exact law of the free-vertex magnetization `M = Σ σ_v`, sorted by `M`.
    pub magnetization: Vec<(i64, f64)>,
}

/// Exact Gibbs expectations of spin products. Observables may name the
/// ghost, whose spin is fixed.
pub fn exact_spin_expectations(g: &SmallGraph, beta: f64, observables: &[Vec<usize>]) -> Result<SpinExpectations> {
    for obs in observables {
        if obs.iter().any(|&v| v >= g.vertex_count()) {
            return invalid(format!("observable {obs:?} names a vertex outside the graph"));
        }
    }
    let w = g.gibbs_weights(beta);
    let values = observables
        .iter()
        .map(|obs| {
            neumaier(w.iter().enumerate().map(|(s, &p)| p * obs.iter().map(|&v| g.spin(s as u32, v)).product::<f64>()))
        })
        .collect();
    let n = g.n_free as i64;
    let mut law = vec![Vec::new(); g.n_free + 1];
    for (s, &p) in w.iter().enumerate() {
        let ups = (s as u32).count_ones() as usize;
        law[ups].push(p);
    }
    let magnetization = law
        .into_iter()
        .enumerate()
        .map(|(ups, ps)| (2 * ups as i64 - n, neumaier(ps.into_iter())))
        .collect();
    Ok(SpinExpectations { values, magnetization })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FkEvent {
    Connected(usize, usize),
    /// The first vertex is connected to at least one of the listed vertices.
    ConnectedToAny(usize, Vec<usize>),
}

/// Exact random-cluster probabilities `P(ω) ∝ p^{open} (1−p)^{closed} q^{#clusters}`
/// by enumeration of all bond subsets. Edge couplings are ignored.
pub fn exact_fk_probabilities(g: &SmallGraph, p: f64, q: f64, events: &[FkEvent]) -> Result<Vec<f64>> {
    let m = g.edges.len();
    if m > MAX_FK_EDGES {
        return invalid(format!("{m} edges exceed the limit of {MAX_FK_EDGES}"));
    }
    if !(0.0..=1.0).contains(&p) || !(q > 0.0) {
        return invalid(format!("need 0 <= p <= 1 and q > 0, got p = {p}, q = {q}"));
    }
    let nv = g.vertex_count();
    for ev in events {
        let (a, rest) = match ev {
            FkEvent::Connected(a, b) => (*a, std::slice::from_ref(b)),
            FkEvent::ConnectedToAny(a, bs) => (*a, bs.as_slice()),
        };
        if a >= nv || rest.iter().any(|&b| b >= nv) {
            return invalid(format!("event {ev:?} names a vertex outside the graph"));
        }
    }
    // exact integer histograms over (open count, cluster count)
    let cell = |k: usize, nc: usize| k * (nv + 1) + nc;
    let mut total = vec![0u64; (m + 1) * (nv + 1)];
    let mut hits = vec![vec![0u64; total.len()]; events.len()];
    let mut parent = vec![0usize; nv];
    let mut root = vec![0usize; nv];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for mask in 0u32..(1u32 << m) {
        parent.iter_mut().enumerate().for_each(|(i, x)| *x = i);
        let mut nc = nv;
        for (e, &(a, b, _)) in g.edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                    nc -= 1;
                }
            }
        }
        for v in 0..nv {
            root[v] = find(&mut parent, v);
        }
        let c = cell(mask.count_ones() as usize, nc);
        total[c] += 1;
        for (ev, h) in events.iter().zip(hits.iter_mut()) {
            let hit = match ev {
                FkEvent::Connected(a, b) => root[*a] == root[*b],
                FkEvent::ConnectedToAny(a, bs) => bs.iter().any(|&b| root[*a] == root[b]),
            };
            if hit {
                h[c] += 1;
            }
        }
    }
    let weight = |k: usize, nc: usize| p.powi(k as i32) * (1.0 - p).powi((m - k) as i32) * q.powi(nc as i32);
    let sum = |counts: &[u64]| {
        neumaier((0..=m).flat_map(|k| (1..=nv).map(move |nc| (k, nc))).map(|(k, nc)| {
            let n = counts[cell(k, nc)];
            if n == 0 {
                0.0
            } else {
                n as f64 * weight(k, nc)
            }
        }))
    };
    let z = sum(&total);
    Ok(hits.iter().map(|h| sum(h) / z).collect())
}

/// Largest GHS combination
/// `⟨σᵢσⱼσₖ⟩ − ⟨σᵢ⟩⟨σⱼσₖ⟩ − ⟨σⱼ⟩⟨σᵢσₖ⟩ − ⟨σₖ⟩⟨σᵢσⱼ⟩ + 2⟨σᵢ⟩⟨σⱼ⟩⟨σₖ⟩`
/// over all triples of free vertices, repetition allowed.
pub fn ghs_triple_check(g: &SmallGraph, beta: f64) -> Result<f64> {
    if beta < 0.0 || g.edges.iter().any(|e| e.2 < 0.0) || g.field.iter().any(|&h| h < 0.0) {
        return invalid("GHS needs beta >= 0, ferromagnetic couplings and a non-negative field");
    }
    if g.ghost == Some(-1) {
        return invalid("GHS needs a non-negative boundary field; the ghost spin is -1");
    }
    let n = g.n_free;
    let w = g.gibbs_weights(beta);
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n * n];
    let mut m3 = vec![0.0; n * n * n];
    let mut s = vec![0.0; n];
    for (state, &p) in w.iter().enumerate() {
        for (v, x) in s.iter_mut().enumerate() {
            *x = g.spin(state as u32, v);
        }
        for i in 0..n {
            let pi = p * s[i];
            m1[i] += pi;
            for j in 0..n {
                let pij = pi * s[j];
                m2[i * n + j] += pij;
                for k in 0..n {
                    m3[(i * n + j) * n + k] += pij * s[k];
                }
            }
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = m3[(i * n + j) * n + k] - m1[i] * m2[j * n + k] - m1[j] * m2[i * n + k] - m1[k] * m2[i * n + j]
                    + 2.0 * m1[i] * m1[j] * m1[k];
                worst = worst.max(c);
            }
        }
    }
    Ok(worst)
}

/// Random ferromagnetic graph with a non-negative field, for GHS sweeps.
pub fn random_ferromagnet(rng: &mut impl rand::Rng, max_vertices: usize) -> Result<SmallGraph> {
    let n = rng.gen_range(1..=max_vertices.clamp(1, MAX_FREE_VERTICES));
    let ghost = rng.gen_bool(0.5).then_some(1i8);
    let nv = n + ghost.is_some() as usize;
    let mut edges = Vec::new();
    for a in 0..nv {
        for b in a + 1..nv {
            if rng.gen_bool(0.5) {
                edges.push((a, b, rng.gen_range(0.0..1.5)));
            }
        }
    }
    let field = (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
    SmallGraph::new(n, ghost, edges, field)
}

/// `d³/dt³ log E[e^{tM}]` at each `t`, as the third cumulant of the
/// `t`-tilted law of the free-vertex magnetization.
pub fn exact_mgf_concavity(g: &SmallGraph, beta: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let law = exact_spin_expectations(g, beta, &[])?.magnetization;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let lw: Vec<f64> =
                law.iter().map(|&(m, p)| if p > 0.0 { p.ln() + t * m as f64 } else { f64::NEG_INFINITY }).collect();
            let max = lw.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let w: Vec<f64> = lw.iter().map(|x| (x - max).exp()).collect();
            let z = neumaier(w.iter().copied());
            let mean = neumaier(law.iter().zip(&w).map(|(&(m, _), &p)| p * m as f64)) / z;
            neumaier(law.iter().zip(&w).map(|(&(m, _), &p)| p * (m as f64 - mean).powi(3))) / z
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenValue {
    pub graph_id: String,
    pub observable: String,
    pub value: f64,
    pub generator: String,
}

pub const GOLDEN_GENERATOR: &str = "crit oracle";

/// Reference values at `β_c` used by the test suite and the acceptance run.
pub fn golden_values() -> Result<Vec<GoldenValue>> {
    let (beta_c, p_c) = critical_constants();
    debug_assert!((bond_probability(beta_c) - p_c).abs() < 1e-15);
    let mut out = Vec::new();
    let mut push = |graph: &str, obs: &str, value: f64| {
        out.push(GoldenValue {
            graph_id: graph.into(),
            observable: obs.into(),
            value,
            generator: GOLDEN_GENERATOR.into(),
        })
    };

    let free2 = SmallGraph::grid(2, BoundaryCondition::Free)?;
    let e = exact_spin_expectations(&free2, beta_c, &[vec![0, 1], vec![0, 3]])?;
    push("grid2_free", "s0*s1", e.values[0]);
    push("grid2_free", "s0*s3", e.values[1]);
    let fk = exact_fk_probabilities(&free2, p_c, 2.0, &[FkEvent::Connected(0, 1)])?;
    push("grid2_free", "P(0<->1)", fk[0]);

    let plus3 = SmallGraph::grid(3, BoundaryCondition::Plus)?;
    let e = exact_spin_expectations(&plus3, beta_c, &[vec![4], vec![0], vec![0, 8]])?;
    push("grid3_plus", "s4", e.values[0]);
    push("grid3_plus", "s0", e.values[1]);
    push("grid3_plus", "s0*s8", e.values[2]);
    let ghost = plus3.ghost().expect("wired grid has a ghost");
    let boundary: Vec<usize> = [0, 1, 2, 3, 5, 6, 7, 8, ghost].to_vec();
    let fk = exact_fk_probabilities(
        &plus3,
        p_c,
        2.0,
        &[FkEvent::Connected(4, ghost), FkEvent::ConnectedToAny(4, boundary)],
    )?;
    push("grid3_plus", "P(4<->ghost)", fk[0]);
    push("grid3_plus", "P(4<->boundary)", fk[1]);

    let star = SmallGraph::star(4)?;
    let fk = exact_fk_probabilities(&star, p_c, 2.0, &[FkEvent::Connected(0, 1)])?;
    push("star4", "P(0<->ghost)", fk[0]);
    let e = exact_spin_expectations(&star, beta_c, &[vec![0]])?;
    push("star4", "s0", e.values[0]);
    Ok(out)
}

/// Golden values as CSV with 17 significant digits.
pub fn write_golden_csv<W: Write>(values: &[GoldenValue], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["graph_id", "observable", "value", "generator"])?;
    for g in values {
        w.write_record([g.graph_id.as_str(), g.observable.as_str(), &format!("{:.16e}", g.value), g.generator.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::split;
    use rand::seq::SliceRandom;
    use rand::Rng;

    const CENTER_3X3_PLUS: f64 = 0.885837505745223783;
    const CENTER_TO_BOUNDARY_3X3_PLUS: f64 = 0.931201392074045088;

    fn beta_c() -> f64 {
        critical_constants().0
    }

    #[test]
    fn two_by_two_pair_correlation() {
        let g = SmallGraph::grid(2, BoundaryCondition::Free).unwrap();
        let e = exact_spin_expectations(&g, beta_c(), &[vec![0, 1]]).unwrap();
        assert!((e.values[0] - 2f64.sqrt() / 3.0).abs() < 1e-14);
        let b = 4.0 * beta_c();
        assert!((e.values[0] - b.sinh() / (b.cosh() + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn single_spin_in_a_field() {
        for h in [0.0, 0.3, -1.2, 5.0] {
            let g = SmallGraph::new(1, None, vec![], vec![h]).unwrap();
            let e = exact_spin_expectations(&g, 0.7, &[vec![0]]).unwrap();
            assert!((e.values[0] - h.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn three_by_three_plus_center() {
        let g = SmallGraph::grid(3, BoundaryCondition::Plus).unwrap();
        let e = exact_spin_expectations(&g, beta_c(), &[vec![4]]).unwrap();
        assert!((e.values[0] - CENTER_3X3_PLUS).abs() < 1e-14);
        let total: f64 = e.magnetization.iter().map(|m| m.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let mean: f64 = e.magnetization.iter().map(|&(m, p)| m as f64 * p).sum();
        let all: Vec<Vec<usize>> = (0..9).map(|v| vec![v]).collect();
        let sum: f64 = exact_spin_expectations(&g, beta_c(), &all).unwrap().values.iter().sum();
        assert!((mean - sum).abs() < 1e-13);
    }

    #[test]
    fn star_graph_closed_forms() {
        let star = SmallGraph::star(4).unwrap();
        let (beta_c, p_c) = critical_constants();
        let exact = 2.0 * 2f64.sqrt() / 3.0;
        let fk = exact_fk_probabilities(&star, p_c, 2.0, &[FkEvent::Connected(0, 1)]).unwrap();
        let closed = (1.0 - (1.0 - p_c).powi(4)) / (1.0 + (1.0 - p_c).powi(4));
        assert!((fk[0] - closed).abs() < 1e-15);
        assert!((fk[0] - exact).abs() < 1e-14);
        let e = exact_spin_expectations(&star, beta_c, &[vec![0]]).unwrap();
        assert!((e.values[0] - (4.0 * beta_c).tanh()).abs() < 1e-15);
        assert!((e.values[0] - exact).abs() < 1e-14);
    }

    #[test]
    fn full_bonds_connect_everything() {
        let g = SmallGraph::grid(3, BoundaryCondition::Free).unwrap();
        let fk = exact_fk_probabilities(&g, 1.0, 2.0, &[FkEvent::Connected(0, 8), FkEvent::Connected(2, 6)]).unwrap();
        assert_eq!(fk, vec![1.0, 1.0]);
        let fk = exact_fk_probabilities(&g, 0.0, 2.0, &[FkEvent::Connected(0, 8)]).unwrap();
        assert_eq!(fk, vec![0.0]);
    }

    #[test]
    fn edwards_sokal_free_graphs() {
        let (beta_c, p_c) = critical_constants();
        let mut rng = split(3, 0);
        for n in [2, 3] {
            let g = SmallGraph::grid(n, BoundaryCondition::Free).unwrap();
            for _ in 0..4 {
                let x = rng.gen_range(0..n * n);
                let y = rng.gen_range(0..n * n);
                let s = exact_spin_expectations(&g, beta_c, &[vec![x, y]]).unwrap().values[0];
                let f = exact_fk_probabilities(&g, p_c, 2.0, &[FkEvent::Connected(x, y)]).unwrap()[0];
                assert!((s - f).abs() < 1e-12, "n={n} ({x},{y}): {s} vs {f}");
            }
        }
        // off-critical too
        let g = SmallGraph::grid(3, BoundaryCondition::Free).unwrap();
        let beta = 0.2;
        let s = exact_spin_expectations(&g, beta, &[vec![0, 8]]).unwrap().values[0];
        let f = exact_fk_probabilities(&g, bond_probability(beta), 2.0, &[FkEvent::Connected(0, 8)]).unwrap()[0];
        assert!((s - f).abs() < 1e-12);
    }

    #[test]
    fn edwards_sokal_wired_grid() {
        let (beta_c, p_c) = critical_constants();
        let g = SmallGraph::grid(3, BoundaryCondition::Plus).unwrap();
        let fk = exact_fk_probabilities(&g, p_c, 2.0, &[FkEvent::Connected(4, 9), FkEvent::Connected(0, 9)]).unwrap();
        let s = exact_spin_expectations(&g, beta_c, &[vec![4], vec![0]]).unwrap().values;
        assert!((fk[0] - s[0]).abs() < 1e-12);
        assert!((fk[1] - s[1]).abs() < 1e-12);
        assert!((fk[0] - CENTER_3X3_PLUS).abs() < 1e-13);
    }

    #[test]
    fn wired_one_arm_golden() {
        let g = golden_values().unwrap();
        let v = g.iter().find(|v| v.observable == "P(4<->boundary)").unwrap();
        assert!((v.value - CENTER_TO_BOUNDARY_3X3_PLUS).abs() < 1e-13);
    }

    #[test]
    fn minus_ghost_flips_odd_observables() {
        let plus = SmallGraph::grid(3, BoundaryCondition::Plus).unwrap();
        let minus = SmallGraph::grid(3, BoundaryCondition::Minus).unwrap();
        let obs = [vec![4], vec![0, 4], vec![1, 2, 3]];
        let a = exact_spin_expectations(&plus, beta_c(), &obs).unwrap().values;
        let b = exact_spin_expectations(&minus, beta_c(), &obs).unwrap().values;
        assert!((a[0] + b[0]).abs() < 1e-14);
        assert!((a[1] - b[1]).abs() < 1e-14);
        assert!((a[2] + b[2]).abs() < 1e-14);
    }

    #[test]
    fn relabelling_does_not_change_results() {
        let mut rng = split(4, 0);
        let g = SmallGraph::grid(3, BoundaryCondition::Plus)
            .unwrap()
            .with_field((0..9).map(|i| 0.05 * i as f64).collect())
            .unwrap();
        for _ in 0..5 {
            let mut perm: Vec<usize> = (0..9).collect();
            perm.shuffle(&mut rng);
            let h = g.permuted(&perm).unwrap();
            let a = exact_spin_expectations(&g, beta_c(), &[vec![0, 4], vec![7]]).unwrap();
            let b = exact_spin_expectations(&h, beta_c(), &[vec![perm[0], perm[4]], vec![perm[7]]]).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-13);
            }
            for (x, y) in a.magnetization.iter().zip(&b.magnetization) {
                assert_eq!(x.0, y.0);
                assert!((x.1 - y.1).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ghs_examples() {
        let single = SmallGraph::new(1, None, vec![], vec![0.0]).unwrap();
        assert_eq!(ghs_triple_check(&single, 1.0).unwrap(), 0.0);
        let g = SmallGraph::grid(2, BoundaryCondition::Free).unwrap().with_field(vec![0.3; 4]).unwrap();
        assert!(ghs_triple_check(&g, beta_c()).unwrap() <= 1e-12);
        let g = SmallGraph::grid(3, BoundaryCondition::Plus).unwrap();
        assert!(ghs_triple_check(&g, beta_c()).unwrap() <= 1e-12);
    }

    #[test]
    fn ghs_rejects_antiferromagnets() {
        let g = SmallGraph::new(2, None, vec![(0, 1, -1.0)], vec![0.0; 2]).unwrap();
        assert!(ghs_triple_check(&g, 1.0).is_err());
        let g = SmallGraph::new(2, None, vec![(0, 1, 1.0)], vec![0.0, -0.1]).unwrap();
        assert!(ghs_triple_check(&g, 1.0).is_err());
    }

    #[test]
    fn ghs_random_graphs() {
        let mut rng = split(5, 0);
        for _ in 0..100 {
            let g = random_ferromagnet(&mut rng, 7).unwrap();
            assert!(ghs_triple_check(&g, beta_c()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn mgf_third_derivative_closed_form() {
        let b = beta_c();
        let g = SmallGraph::new(1, Some(1), vec![(0, 1, 4.0)], vec![0.0]).unwrap();
        let ts: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        let d = exact_mgf_concavity(&g, b, &ts).unwrap();
        for (t, v) in ts.iter().zip(d) {
            let x = t + 4.0 * b;
            let exact = -2.0 / x.cosh().powi(2) * x.tanh();
            assert!((v - exact).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn mgf_symmetric_free_graph() {
        let g = SmallGraph::grid(3, BoundaryCondition::Free).unwrap();
        assert!(exact_mgf_concavity(&g, beta_c(), &[0.0]).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn mgf_three_by_three_plus_is_concave() {
        let g = SmallGraph::grid(3, BoundaryCondition::Plus).unwrap();
        let ts: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        assert!(exact_mgf_concavity(&g, beta_c(), &ts).unwrap().iter().all(|&v| v <= 1e-9));
    }

    #[test]
    fn size_limits() {
        assert!(SmallGraph::new(21, None, vec![], vec![0.0; 21]).is_err());
        let g = SmallGraph::grid(4, BoundaryCondition::Plus).unwrap();
        assert!(exact_fk_probabilities(&g, 0.5, 2.0, &[]).is_err());
        assert!(SmallGraph::new(2, None, vec![(0, 2, 1.0)], vec![0.0; 2]).is_err());
    }

    #[test]
    fn golden_csv_round_trips() {
        let values = golden_values().unwrap();
        let mut buf = Vec::new();
        write_golden_csv(&values, &mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        for (rec, v) in r.records().zip(&values) {
            let rec = rec.unwrap();
            assert_eq!(&rec[0], v.graph_id);
            assert_eq!(rec[2].parse::<f64>().unwrap(), v.value);
        }
    }
}
