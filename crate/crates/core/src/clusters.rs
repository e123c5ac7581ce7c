//! Connectivity of FK configurations.
//!
//! [`label_clusters`] runs union-find (union by rank, path compression) over
//! the open edges, ghost edges included. Everything downstream works from the
//! resulting per-vertex root ids: the one-arm event, the annulus crossing of
//! `∂(3Q)`, the block variables `X_i`, `Y_i` and the cutoff magnetization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::RenormScheme;
use crate::lattice::{AnnulusTarget, LatticeSpec, Site, SubSquare};
use crate::sampler::{BondConfig, ColoredBonds};

/// Union-find that links by vertex index (Rem's algorithm with splicing).
///
/// Every parent pointer goes to a smaller index, so roots are cluster
/// minima and a single forward pass flattens the forest.
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    #[inline]
    fn union(&mut self, a: usize, b: usize) {
        let p = &mut self.parent;
        let (mut x, mut y) = (a, b);
        while p[x] != p[y] {
            if p[x] < p[y] {
                std::mem::swap(&mut x, &mut y);
            }
            let px = p[x] as usize;
            if px == x {
                p[x] = p[y];
                return;
            }
            p[x] = p[y];
            x = px;
        }
    }

    fn into_roots(mut self) -> Vec<u32> {
        for v in 0..self.parent.len() {
            self.parent[v] = self.parent[self.parent[v] as usize];
        }
        self.parent
    }
}

/// Cluster structure of one bond configuration.
///
/// `root[v]` is the fully compressed union-find root of vertex `v` (sites,
/// then the ghost when present). Per-cluster data is indexed by root id.
#[derive(Debug, Clone)]
pub struct ClusterLabels {
    root: Vec<u32>,
    size: Vec<u32>,
    touches_ghost: Vec<bool>,
    touches_boundary: Vec<bool>,
    n_sites: usize,
    n_clusters: usize,
}

pub fn label_clusters(spec: &LatticeSpec, bond: &BondConfig) -> ClusterLabels {
    debug_assert_eq!(bond.open().len(), spec.edge_count());
    let nv = spec.vertex_count();
    let mut uf = UnionFind::new(nv);
    let n = spec.n_side();
    let open = bond.open();
    let h = spec.horizontal_edge_count();
    // a closed edge becomes the no-op union(u, u), which avoids a branch
    for (r, row) in open[..h].chunks_exact(n - 1).enumerate() {
        for (c, &o) in row.iter().enumerate() {
            let u = r * n + c;
            uf.union(u, u + o as usize);
        }
    }
    for (u, &o) in open[h..2 * h].iter().enumerate() {
        uf.union(u, u + n * o as usize);
    }
    if spec.has_ghost() {
        let g = spec.ghost();
        for (&b, &o) in spec.ghost_edge_sites().iter().zip(&open[2 * h..]) {
            let b = b as usize;
            uf.union(b, if o { g } else { b });
        }
    }
    let root = uf.into_roots();
    let mut size = vec![0u32; nv];
    let mut touches_ghost = vec![false; nv];
    let mut touches_boundary = vec![false; nv];
    let n_sites = spec.site_count();
    let n = spec.n_side();
    let mut n_clusters = 0;
    for (v, &r) in root.iter().enumerate() {
        let r = r as usize;
        n_clusters += (v == r) as usize;
        if v < n_sites {
            size[r] += 1;
        } else {
            touches_ghost[r] = true;
        }
    }
    for i in 0..n {
        for v in [i, n_sites - n + i, i * n, i * n + n - 1] {
            touches_boundary[root[v] as usize] = true;
        }
    }
    ClusterLabels { root, size, touches_ghost, touches_boundary, n_sites, n_clusters }
}

impl ClusterLabels {
    #[inline]
    pub fn root(&self, vertex: usize) -> usize {
        self.root[vertex] as usize
    }

    pub fn roots(&self) -> &[u32] {
        &self.root
    }

    #[inline]
    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.root[a] == self.root[b]
    }

    /// Number of sites in the cluster of `vertex` (the ghost is not counted).
    pub fn cluster_size(&self, vertex: usize) -> usize {
        self.size[self.root(vertex)] as usize
    }

    /// Number of clusters, the ghost cluster included when present.
    pub fn cluster_count(&self) -> usize {
        self.n_clusters
    }

    pub fn vertex_count(&self) -> usize {
        self.root.len()
    }

    pub fn site_count(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn touches_ghost(&self, vertex: usize) -> bool {
        self.touches_ghost[self.root(vertex)]
    }

    #[inline]
    pub fn touches_boundary(&self, vertex: usize) -> bool {
        self.touches_boundary[self.root(vertex)]
    }

    /// Partition as a canonical label vector: each vertex gets the smallest
    /// vertex id of its cluster.
    pub fn canonical(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.root.len()];
        self.root
            .iter()
            .enumerate()
            .map(|(v, &r)| {
                let f = &mut first[r as usize];
                if *f == usize::MAX {
                    *f = v;
                }
                *f
            })
            .collect()
    }
}

/// Whether the cluster of `site` reaches the domain boundary (a boundary
/// site of the grid, or the ghost).
pub fn one_arm_event(spec: &LatticeSpec, labels: &ClusterLabels, site: Site) -> bool {
    let v = spec.index(site);
    labels.touches_boundary(v) || labels.touches_ghost(v)
}

/// Whether any site of `block` reaches the domain boundary.
pub fn block_one_arm_event(spec: &LatticeSpec, labels: &ClusterLabels, block: &SubSquare) -> bool {
    block
        .sites(spec.n_side())
        .any(|v| labels.touches_boundary(v) || labels.touches_ghost(v))
}

/// Marks the clusters that reach `∂(3Q)` for one block `Q`.
struct CrossingMarks<'a> {
    spec: &'a LatticeSpec,
    labels: &'a ClusterLabels,
    stamp: Vec<u32>,
    current: u32,
    domain_boundary: bool,
}

impl<'a> CrossingMarks<'a> {
    fn new(spec: &'a LatticeSpec, labels: &'a ClusterLabels) -> Self {
        CrossingMarks {
            spec,
            labels,
            stamp: vec![0; labels.vertex_count()],
            current: 0,
            domain_boundary: false,
        }
    }

    fn load(&mut self, target: &AnnulusTarget) {
        self.current += 1;
        for &s in &target.sites {
            self.stamp[self.labels.root(s)] = self.current;
        }
        self.domain_boundary = target.domain_boundary;
    }

    #[inline]
    fn crosses(&self, v: usize) -> bool {
        let r = self.labels.root(v);
        if self.stamp[r] == self.current {
            return true;
        }
        if self.domain_boundary {
            if self.spec.has_ghost() {
                self.labels.touches_ghost[r]
            } else {
                self.labels.touches_boundary[r]
            }
        } else {
            false
        }
    }
}

/// Block statistics for one `ε`-block `B_i` inside a `ρ`-block `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub q_index: usize,
    pub block: SubSquare,
    /// Renormalized signed mass of sites of `B_i` connected to `∂(3Q)`.
    pub x: f64,
    /// `1{B_i ↔ ∂(3Q) in ω⁺} − 1{B_i ↔ ∂(3Q) in ω⁻}`.
    pub y: i8,
}

fn check_scale(spec: &LatticeSpec, inv: usize, what: &str) -> Result<usize> {
    if inv == 0 || !inv.is_power_of_two() || spec.n_side() % inv != 0 {
        return invalid(format!("{what} = 1/{inv} is not a dyadic divisor of n_side {}", spec.n_side()));
    }
    Ok(spec.n_side() / inv)
}

pub fn block_variables(
    spec: &LatticeSpec,
    colored: &ColoredBonds,
    rho_inv: usize,
    eps_inv: usize,
    scheme: &RenormScheme,
) -> Result<Vec<BlockStats>> {
    check_scale(spec, rho_inv, "rho")?;
    let eps_side = check_scale(spec, eps_inv, "epsilon")?;
    if eps_inv < rho_inv {
        return invalid(format!("epsilon 1/{eps_inv} exceeds rho 1/{rho_inv}"));
    }
    let theta = scheme.theta(spec.mesh())?;
    let labels = colored.labels();
    let mut marks = CrossingMarks::new(spec, labels);
    let n = spec.n_side();
    let mut out = Vec::new();
    for (qi, q) in spec.dyadic_blocks(rho_inv)?.iter().enumerate() {
        marks.load(&spec.annulus_target(q)?);
        for b in spec.sub_blocks(q, eps_side)? {
            let mut mass = 0i64;
            let (mut plus, mut minus) = (false, false);
            for v in b.sites(n) {
                if marks.crosses(v) {
                    let s = colored.sign_of(v);
                    mass += s as i64;
                    if s > 0 {
                        plus = true;
                    } else {
                        minus = true;
                    }
                }
            }
            out.push(BlockStats {
                q_index: qi,
                block: b,
                x: theta * mass as f64,
                y: plus as i8 - minus as i8,
            });
        }
    }
    Ok(out)
}

/// Magnetization carried by sites whose cluster crosses the annulus of their
/// own `ρ`-block.
pub fn cutoff_magnetization(
    spec: &LatticeSpec,
    colored: &ColoredBonds,
    rho_inv: usize,
    scheme: &RenormScheme,
) -> Result<f64> {
    let (crossing, _) = cutoff_split(spec, colored, rho_inv)?;
    Ok(scheme.theta(spec.mesh())? * crossing as f64)
}

/// Spin sums `(crossing, non-crossing)` of the annulus decomposition.
pub fn cutoff_split(spec: &LatticeSpec, colored: &ColoredBonds, rho_inv: usize) -> Result<(i64, i64)> {
    check_scale(spec, rho_inv, "rho")?;
    cutoff_split_in(spec, colored, &spec.whole(), rho_inv)
}

/// [`cutoff_split`] restricted to a square window of the grid, tiled by
/// `rho_inv²` blocks. Rings `∂(3Q)` are taken in the full grid, so a window
/// padded by its own side on every edge never needs clipping.
pub fn cutoff_split_in(spec: &LatticeSpec, colored: &ColoredBonds, window: &SubSquare, rho_inv: usize) -> Result<(i64, i64)> {
    if rho_inv == 0 || !rho_inv.is_power_of_two() || window.side % rho_inv != 0 {
        return invalid(format!("rho = 1/{rho_inv} is not a dyadic divisor of the window side {}", window.side));
    }
    let labels = colored.labels();
    let mut marks = CrossingMarks::new(spec, labels);
    let (mut crossing, mut rest) = (0i64, 0i64);
    for q in spec.sub_blocks(window, window.side / rho_inv)? {
        marks.load(&spec.annulus_target(&q)?);
        for v in q.sites(spec.n_side()) {
            let s = colored.sign_of(v) as i64;
            if marks.crosses(v) {
                crossing += s;
            } else {
                rest += s;
            }
        }
    }
    Ok((crossing, rest))
}

/// Per-`Q` sums `(Σ X_i, Σ Y_i)` of a sample's block statistics, ordered by
/// block index.
pub fn block_sums(stats: &[BlockStats]) -> Vec<(f64, f64)> {
    let nq = stats.iter().map(|b| b.q_index + 1).max().unwrap_or(0);
    let mut sums = vec![(0.0, 0.0); nq];
    for b in stats {
        sums[b.q_index].0 += b.x;
        sums[b.q_index].1 += b.y as f64;
    }
    sums
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyFit {
    /// Fitted constant; `None` when `ΣY` vanishes on every observation.
    pub c_hat: Option<f64>,
    /// Minimized empirical `‖ΣX − ĉ β ΣY‖₂`.
    pub discrepancy: f64,
    /// Jackknife standard error of the discrepancy over 32 groups.
    pub stderr: f64,
    pub observations: usize,
}

fn xy_fit_core(obs: &[(f64, f64)], beta: f64) -> (Option<f64>, f64) {
    let n = obs.len() as f64;
    let sxy: f64 = obs.iter().map(|(x, y)| x * y).sum();
    let syy: f64 = obs.iter().map(|(_, y)| y * y).sum();
    let sxx: f64 = obs.iter().map(|(x, _)| x * x).sum();
    if syy == 0.0 || beta == 0.0 {
        return (None, (sxx / n).sqrt());
    }
    let c = sxy / (beta * syy);
    let resid: f64 = obs.iter().map(|(x, y)| (x - c * beta * y).powi(2)).sum();
    (Some(c), (resid / n).sqrt())
}

/// Least-squares fit of `ΣX ≈ c β(ε) ΣY` over observations `(ΣX, ΣY)`, one
/// per (sample, `Q`) pair.
pub fn xy_discrepancy(obs: &[(f64, f64)], beta_eps: f64) -> Result<XyFit> {
    if obs.is_empty() {
        return invalid("no block observations");
    }
    if !(beta_eps.is_finite() && beta_eps > 0.0) {
        return invalid(format!("beta(eps) must be positive, got {beta_eps}"));
    }
    let (c_hat, discrepancy) = xy_fit_core(obs, beta_eps);
    let groups = 32.min(obs.len());
    let stderr = if groups >= 2 {
        let len = obs.len() / groups;
        let reps: Vec<f64> = (0..groups)
            .map(|g| {
                let kept: Vec<(f64, f64)> = obs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i / len.max(1) != g)
                    .map(|(_, o)| *o)
                    .collect();
                xy_fit_core(&kept, beta_eps).1
            })
            .collect();
        crate::estimators::jackknife_stderr(&reps)
    } else {
        f64::NAN
    };
    Ok(XyFit { c_hat, discrepancy, stderr, observations: obs.len() })
}
