//! Critical Ising spins and coupled FK bonds via cluster dynamics.
//!
//! Both half-steps of the Edwards–Sokal coupling are exposed:
//! [`bonds_from_spins`] opens equal-spin edges with probability
//! `p = 1 − e^{−2β}`, and [`color_clusters`] gives every FK cluster an
//! independent fair sign (the ghost cluster keeps the boundary sign).
//! A Swendsen–Wang sweep is one of each; a Wolff step grows and flips a
//! single cluster.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::clusters::{label_clusters, ClusterLabels};
use crate::error::{invalid, CritError, Result};
use crate::lattice::{BoundaryCondition, LatticeSpec};
use crate::rng::{coin, split, Bernoulli, ChainRng};

/// `(β_c, p_c)` for the square lattice: `ln(1+√2)/2` and `2 − √2`.
pub fn critical_constants() -> (f64, f64) {
    let beta_c = std::f64::consts::SQRT_2.ln_1p() / 2.0;
    (beta_c, 2.0 - std::f64::consts::SQRT_2)
}

/// FK bond probability `1 − e^{−2β}` coupled to Ising at inverse temperature `β`.
pub fn bond_probability(beta: f64) -> f64 {
    -(-2.0 * beta).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
    boundary: BoundaryCondition,
}

impl SpinConfig {
    pub fn uniform(spec: &LatticeSpec, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        SpinConfig { spins: vec![value; spec.site_count()], boundary: spec.boundary() }
    }

    pub fn from_spins(spec: &LatticeSpec, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != spec.site_count() {
            return invalid(format!("expected {} spins, got {}", spec.site_count(), spins.len()));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return invalid("spins must be +1 or -1");
        }
        Ok(SpinConfig { spins, boundary: spec.boundary() })
    }

    pub fn random(spec: &LatticeSpec, rng: &mut impl RngCore) -> Self {
        SpinConfig { spins: (0..spec.site_count()).map(|_| coin(rng)).collect(), boundary: spec.boundary() }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    pub fn get(&self, site: usize) -> i8 {
        self.spins[site]
    }

    /// Spin at a vertex id, the ghost included.
    #[inline]
    pub fn vertex(&self, v: usize) -> i8 {
        if v < self.spins.len() {
            self.spins[v]
        } else {
            self.boundary.ghost_spin().expect("ghost vertex on a free lattice")
        }
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn spin_sum(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    pub fn flip_all(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = -*s);
    }
}

/// Open/closed bit per edge; the cluster weight is fixed at `q = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondConfig {
    open: Vec<bool>,
    p: f64,
}

impl BondConfig {
    pub const Q: f64 = 2.0;

    pub fn from_open(open: Vec<bool>, p: f64) -> Self {
        BondConfig { open, p }
    }

    pub fn open(&self) -> &[bool] {
        &self.open
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }
}

/// FK configuration with a sign per cluster (`ω⁺`, `ω⁻`).
#[derive(Debug, Clone)]
pub struct ColoredBonds {
    bond: BondConfig,
    labels: ClusterLabels,
    cluster_sign: Vec<i8>,
}

impl ColoredBonds {
    pub fn bond(&self) -> &BondConfig {
        &self.bond
    }

    pub fn labels(&self) -> &ClusterLabels {
        &self.labels
    }

    /// Sign of the cluster containing `vertex`.
    #[inline]
    pub fn sign_of(&self, vertex: usize) -> i8 {
        self.cluster_sign[self.labels.root(vertex)]
    }

    pub fn induced_spins(&self, spec: &LatticeSpec) -> SpinConfig {
        SpinConfig {
            spins: (0..spec.site_count()).map(|v| self.sign_of(v)).collect(),
            boundary: spec.boundary(),
        }
    }
}

pub fn bonds_from_spins(spec: &LatticeSpec, spins: &SpinConfig, p: f64, rng: &mut impl RngCore) -> BondConfig {
    let bern = Bernoulli::new(p);
    let n = spec.n_side();
    let s = &spins.spins;
    let mut open = Vec::with_capacity(spec.edge_count());
    // same order as the edge numbering: horizontal, vertical, ghost
    for row in s.chunks_exact(n) {
        for c in 0..n - 1 {
            open.push(bern.sample_if(row[c] == row[c + 1], rng));
        }
    }
    for u in 0..n * (n - 1) {
        open.push(bern.sample_if(s[u] == s[u + n], rng));
    }
    if let Some(g) = spec.boundary().ghost_spin() {
        for &b in spec.ghost_edge_sites() {
            open.push(bern.sample_if(s[b as usize] == g, rng));
        }
    }
    BondConfig { open, p }
}

/// Independent fair sign per cluster, drawn in order of first appearance in
/// site order; the ghost cluster takes the boundary sign.
pub fn color_clusters(spec: &LatticeSpec, bond: BondConfig, rng: &mut impl RngCore) -> ColoredBonds {
    let labels = label_clusters(spec, &bond);
    let mut cluster_sign = vec![0i8; labels.vertex_count()];
    if let Some(g) = spec.boundary().ghost_spin() {
        cluster_sign[labels.root(spec.ghost())] = g;
    }
    for v in 0..spec.site_count() {
        let r = labels.root(v);
        if cluster_sign[r] == 0 {
            cluster_sign[r] = coin(rng);
        }
    }
    ColoredBonds { bond, labels, cluster_sign }
}

/// Coloring read off a spin configuration that is compatible with `bond`
/// (no open edge between unequal spins).
pub fn color_from_spins(spec: &LatticeSpec, bond: BondConfig, spins: &SpinConfig) -> ColoredBonds {
    let labels = label_clusters(spec, &bond);
    let mut cluster_sign = vec![0i8; labels.vertex_count()];
    for v in 0..labels.vertex_count() {
        cluster_sign[labels.root(v)] = spins.vertex(v);
    }
    debug_assert!((0..labels.vertex_count()).all(|v| cluster_sign[labels.root(v)] == spins.vertex(v)));
    ColoredBonds { bond, labels, cluster_sign }
}

/// One Swendsen–Wang sweep; replaces `state` and returns the coupled bonds.
pub fn swendsen_wang_sweep(spec: &LatticeSpec, state: &mut SpinConfig, p: f64, rng: &mut impl RngCore) -> ColoredBonds {
    let bond = bonds_from_spins(spec, state, p, rng);
    let colored = color_clusters(spec, bond, rng);
    for (v, s) in state.spins.iter_mut().enumerate() {
        *s = colored.sign_of(v);
    }
    colored
}

/// Scratch space reused across Wolff steps.
#[derive(Debug, Default)]
pub struct WolffScratch {
    in_cluster: Vec<bool>,
    stack: Vec<usize>,
    members: Vec<usize>,
}

/// One Wolff step from a uniformly random seed site. Returns the number of
/// sites in the grown cluster.
///
/// When the cluster absorbs the ghost, every spin outside the cluster is
/// flipped instead, which keeps the ghost at its boundary sign.
pub fn wolff_step(
    spec: &LatticeSpec,
    state: &mut SpinConfig,
    p: f64,
    rng: &mut impl RngCore,
    scratch: &mut WolffScratch,
) -> usize {
    let nv = spec.vertex_count();
    let n_sites = spec.site_count();
    let n = spec.n_side();
    scratch.in_cluster.clear();
    scratch.in_cluster.resize(nv, false);
    scratch.stack.clear();
    scratch.members.clear();
    let bern = Bernoulli::new(p);
    let seed = (rng.next_u64() % n_sites as u64) as usize;
    let s0 = state.spins[seed];
    scratch.in_cluster[seed] = true;
    scratch.stack.push(seed);
    scratch.members.push(seed);
    let ghost = spec.has_ghost().then(|| spec.ghost());
    let mut has_ghost = false;
    while let Some(u) = scratch.stack.pop() {
        if Some(u) == ghost {
            for &b in spec.ghost_edge_sites() {
                let b = b as usize;
                if !scratch.in_cluster[b] && state.spins[b] == s0 && bern.sample(rng) {
                    scratch.in_cluster[b] = true;
                    scratch.stack.push(b);
                    scratch.members.push(b);
                }
            }
            continue;
        }
        let (r, c) = (u / n, u % n);
        let nbrs = [
            (r > 0).then(|| u - n),
            (r + 1 < n).then(|| u + n),
            (c > 0).then(|| u - 1),
            (c + 1 < n).then(|| u + 1),
        ];
        for w in nbrs {
            let w = match (w, ghost) {
                (Some(w), _) => w,
                (None, Some(g)) => g,
                (None, None) => continue,
            };
            if !scratch.in_cluster[w] && state.vertex(w) == s0 && bern.sample(rng) {
                scratch.in_cluster[w] = true;
                scratch.stack.push(w);
                if w == n_sites {
                    has_ghost = true;
                } else {
                    scratch.members.push(w);
                }
            }
        }
    }
    if has_ghost {
        for (v, s) in state.spins.iter_mut().enumerate() {
            if !scratch.in_cluster[v] {
                *s = -*s;
            }
        }
    } else {
        for &v in &scratch.members {
            state.spins[v] = -state.spins[v];
        }
    }
    scratch.members.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SwendsenWang,
    Wolff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub seed: u64,
    /// Stream index passed to the splitter; chain `i` of a run uses `i`.
    #[serde(default)]
    pub stream: u64,
    #[serde(default = "default_thermalization")]
    pub thermalization_sweeps: usize,
    #[serde(default = "default_decorrelation")]
    pub decorrelation_sweeps: usize,
}

fn default_beta() -> f64 {
    critical_constants().0
}

fn default_thermalization() -> usize {
    100
}

fn default_decorrelation() -> usize {
    2
}

impl SamplerConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        SamplerConfig {
            algorithm,
            beta: default_beta(),
            seed,
            stream: 0,
            thermalization_sweeps: default_thermalization(),
            decorrelation_sweeps: default_decorrelation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return invalid(format!("beta must be non-negative, got {}", self.beta));
        }
        Ok(())
    }
}

/// One retained sample handed to a chain observer.
pub struct Sample<'a> {
    pub index: usize,
    pub spins: &'a SpinConfig,
    pub colored: &'a ColoredBonds,
}

/// Markov chain state for one stream.
pub struct Chain {
    spec: LatticeSpec,
    cfg: SamplerConfig,
    p: f64,
    rng: ChainRng,
    state: SpinConfig,
    scratch: WolffScratch,
    /// Wolff steps per sweep, frozen at the first retained sample.
    wolff_steps: Option<usize>,
    /// Cluster sizes and step count seen before the freeze.
    wolff_tally: (usize, usize),
    last: Option<ColoredBonds>,
}

impl Chain {
    /// Cold start (all spins equal to the boundary sign, `+` when free).
    pub fn new(spec: &LatticeSpec, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let start = spec.boundary().ghost_spin().unwrap_or(1);
        Ok(Chain {
            spec: spec.clone(),
            cfg: cfg.clone(),
            p: bond_probability(cfg.beta),
            rng: split(cfg.seed, cfg.stream),
            state: SpinConfig::uniform(spec, start),
            scratch: WolffScratch::default(),
            wolff_steps: None,
            wolff_tally: (0, 0),
            last: None,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn spins(&self) -> &SpinConfig {
        &self.state
    }

    /// One sweep: a Swendsen–Wang update, or a block of Wolff steps. Until
    /// the first retained sample a Wolff block runs until the grown clusters
    /// total one lattice volume; afterwards its length is fixed to the
    /// average count seen so far, since a size-dependent stopping rule would
    /// bias the retained samples.
    pub fn sweep(&mut self) {
        match self.cfg.algorithm {
            Algorithm::SwendsenWang => {
                self.last = Some(swendsen_wang_sweep(&self.spec, &mut self.state, self.p, &mut self.rng));
            }
            Algorithm::Wolff => {
                match self.wolff_steps {
                    Some(k) => {
                        for _ in 0..k {
                            wolff_step(&self.spec, &mut self.state, self.p, &mut self.rng, &mut self.scratch);
                        }
                    }
                    None => {
                        let mut grown = 0;
                        while grown < self.spec.site_count() {
                            grown += wolff_step(&self.spec, &mut self.state, self.p, &mut self.rng, &mut self.scratch);
                            self.wolff_tally.1 += 1;
                        }
                        self.wolff_tally.0 += grown;
                    }
                }
                self.last = None;
            }
        }
    }

    fn freeze_wolff_steps(&mut self) {
        if self.cfg.algorithm != Algorithm::Wolff || self.wolff_steps.is_some() {
            return;
        }
        if self.wolff_tally.1 == 0 {
            self.sweep();
        }
        let (grown, steps) = self.wolff_tally;
        let k = (self.spec.site_count() * steps).div_ceil(grown.max(1));
        self.wolff_steps = Some(k.max(1));
    }

    pub fn thermalize(&mut self) {
        for _ in 0..self.cfg.thermalization_sweeps {
            self.sweep();
        }
    }

    /// Advances by the decorrelation interval (at least one sweep) and
    /// returns the FK configuration coupled to the current spins.
    pub fn advance(&mut self) -> &ColoredBonds {
        self.freeze_wolff_steps();
        for _ in 0..self.cfg.decorrelation_sweeps.max(1) {
            self.sweep();
        }
        if self.last.is_none() {
            let bond = bonds_from_spins(&self.spec, &self.state, self.p, &mut self.rng);
            self.last = Some(color_from_spins(&self.spec, bond, &self.state));
        }
        self.last.as_ref().expect("coupled bonds present")
    }
}

/// Runs one chain: thermalization, then `n_samples` retained samples, each
/// after `decorrelation_sweeps` sweeps. The observer sees every retained
/// `(spins, colored bonds)` pair; an observer error aborts the chain.
pub fn sample_chain<F, E>(spec: &LatticeSpec, cfg: &SamplerConfig, n_samples: usize, mut observer: F) -> Result<()>
where
    F: FnMut(&Sample<'_>) -> std::result::Result<(), E>,
    E: std::fmt::Display,
{
    if n_samples == 0 {
        return invalid("n_samples must be at least 1");
    }
    let mut chain = Chain::new(spec, cfg)?;
    chain.thermalize();
    for index in 0..n_samples {
        chain.advance();
        let sample = Sample {
            index,
            spins: &chain.state,
            colored: chain.last.as_ref().expect("advance leaves bonds"),
        };
        observer(&sample).map_err(|e| CritError::Observer(e.to_string()))?;
    }
    Ok(())
}
