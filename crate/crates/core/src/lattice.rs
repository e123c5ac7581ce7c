//! Square grid geometry on the unit square.
//!
//! Sites are indexed row-major, `index = row * n + col`, with the cell of a
//! site being the square of side `1/n` centred at `((col + ½)/n, (row + ½)/n)`.
//! Edges are numbered horizontal first, then vertical, then (for wired
//! boundary conditions) the ghost edges joining each boundary site to the
//! single ghost vertex `n²`, one ghost edge per missing in-grid neighbour.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Plus,
    Minus,
    Free,
}

impl BoundaryCondition {
    pub fn is_wired(self) -> bool {
        !matches!(self, BoundaryCondition::Free)
    }

    /// Spin carried by the ghost vertex, if there is one.
    pub fn ghost_spin(self) -> Option<i8> {
        match self {
            BoundaryCondition::Plus => Some(1),
            BoundaryCondition::Minus => Some(-1),
            BoundaryCondition::Free => None,
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = crate::CritError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(BoundaryCondition::Plus),
            "minus" | "-" => Ok(BoundaryCondition::Minus),
            "free" => Ok(BoundaryCondition::Free),
            other => invalid(format!("unknown boundary condition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub fn new(row: usize, col: usize) -> Self {
        Site { row, col }
    }

    pub fn center(&self, n_side: usize) -> (f64, f64) {
        let n = n_side as f64;
        ((self.col as f64 + 0.5) / n, (self.row as f64 + 0.5) / n)
    }
}

/// Axis-aligned block of `side × side` cells with top-left cell `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubSquare {
    pub row: usize,
    pub col: usize,
    pub side: usize,
}

impl SubSquare {
    pub fn new(row: usize, col: usize, side: usize) -> Self {
        SubSquare { row, col, side }
    }

    /// Region `[x0, x1] × [y0, y1]` in unit-square coordinates.
    pub fn region(&self, n_side: usize) -> [f64; 4] {
        let n = n_side as f64;
        [
            self.col as f64 / n,
            (self.col + self.side) as f64 / n,
            self.row as f64 / n,
            (self.row + self.side) as f64 / n,
        ]
    }

    pub fn contains(&self, site: Site) -> bool {
        site.row >= self.row
            && site.row < self.row + self.side
            && site.col >= self.col
            && site.col < self.col + self.side
    }

    pub fn sites(&self, n_side: usize) -> impl Iterator<Item = usize> + '_ {
        let (r0, c0, s) = (self.row, self.col, self.side);
        (r0..r0 + s).flat_map(move |r| (c0..c0 + s).map(move |c| r * n_side + c))
    }

    pub fn cell_count(&self) -> usize {
        self.side * self.side
    }
}

/// Discrete boundary of the tripled square `3Q`, clipped to the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnulusTarget {
    /// In-grid sites on the inner boundary of `3Q`, sorted.
    pub sites: Vec<usize>,
    /// Set when `3Q` leaves the grid; the domain boundary then stands in for
    /// the clipped part of the ring (the ghost under wired boundary
    /// conditions, the grid edge under free ones).
    pub domain_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    n_side: usize,
    boundary: BoundaryCondition,
    ghost_edge_sites: Vec<u32>,
}

pub fn build_lattice(n_side: usize, boundary: BoundaryCondition) -> Result<LatticeSpec> {
    if n_side < 2 {
        return invalid(format!("n_side must be at least 2, got {n_side}"));
    }
    if n_side > 1 << 15 {
        return invalid(format!("n_side {n_side} too large"));
    }
    let mut ghost_edge_sites = Vec::new();
    if boundary.is_wired() {
        for row in 0..n_side {
            for col in 0..n_side {
                let missing = (row == 0) as usize
                    + (row == n_side - 1) as usize
                    + (col == 0) as usize
                    + (col == n_side - 1) as usize;
                for _ in 0..missing {
                    ghost_edge_sites.push((row * n_side + col) as u32);
                }
            }
        }
    }
    Ok(LatticeSpec { n_side, boundary, ghost_edge_sites })
}

impl LatticeSpec {
    pub fn n_side(&self) -> usize {
        self.n_side
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    /// Mesh as the exact rational `1 / n_side`.
    pub fn mesh_ratio(&self) -> (usize, usize) {
        (1, self.n_side)
    }

    pub fn mesh(&self) -> f64 {
        1.0 / self.n_side as f64
    }

    pub fn site_count(&self) -> usize {
        self.n_side * self.n_side
    }

    /// Sites plus the ghost vertex when the boundary is wired.
    pub fn vertex_count(&self) -> usize {
        self.site_count() + self.has_ghost() as usize
    }

    pub fn has_ghost(&self) -> bool {
        self.boundary.is_wired()
    }

    /// Vertex id of the ghost; only meaningful when `has_ghost()`.
    pub fn ghost(&self) -> usize {
        self.site_count()
    }

    pub fn horizontal_edge_count(&self) -> usize {
        self.n_side * (self.n_side - 1)
    }

    pub fn interior_edge_count(&self) -> usize {
        2 * self.horizontal_edge_count()
    }

    pub fn ghost_edge_count(&self) -> usize {
        self.ghost_edge_sites.len()
    }

    pub fn edge_count(&self) -> usize {
        self.interior_edge_count() + self.ghost_edge_count()
    }

    pub fn site(&self, index: usize) -> Site {
        Site::new(index / self.n_side, index % self.n_side)
    }

    pub fn index(&self, site: Site) -> usize {
        site.row * self.n_side + site.col
    }

    pub fn is_boundary_site(&self, index: usize) -> bool {
        let n = self.n_side;
        let (r, c) = (index / n, index % n);
        r == 0 || c == 0 || r == n - 1 || c == n - 1
    }

    /// Endpoints of edge `e`; the second endpoint of a ghost edge is the ghost.
    #[inline]
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let n = self.n_side;
        let h = self.horizontal_edge_count();
        if e < h {
            let (r, c) = (e / (n - 1), e % (n - 1));
            let u = r * n + c;
            (u, u + 1)
        } else if e < 2 * h {
            let u = e - h;
            (u, u + n)
        } else {
            (self.ghost_edge_sites[e - 2 * h] as usize, self.ghost())
        }
    }

    pub fn ghost_edge_sites(&self) -> &[u32] {
        &self.ghost_edge_sites
    }

    /// In-grid nearest neighbours of a site (2 to 4 of them).
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> {
        let n = self.n_side;
        let (r, c) = (index / n, index % n);
        let up = (r > 0).then(|| index - n);
        let down = (r + 1 < n).then(|| index + n);
        let left = (c > 0).then(|| index - 1);
        let right = (c + 1 < n).then(|| index + 1);
        [up, down, left, right].into_iter().flatten()
    }

    /// Number of ghost edges at a site (0 under free boundary conditions).
    pub fn ghost_bonds(&self, index: usize) -> usize {
        if !self.has_ghost() {
            return 0;
        }
        4 - self.neighbors(index).count()
    }

    pub fn whole(&self) -> SubSquare {
        SubSquare::new(0, 0, self.n_side)
    }

    /// The central site, or the four central sites of an even grid.
    pub fn center_sites(&self) -> Vec<usize> {
        let n = self.n_side;
        let h = n / 2;
        if n % 2 == 1 {
            vec![h * n + h]
        } else {
            vec![(h - 1) * n + h - 1, (h - 1) * n + h, h * n + h - 1, h * n + h]
        }
    }

    fn check_sub_square(&self, q: &SubSquare) -> Result<()> {
        if q.side == 0 {
            return invalid("empty sub-square");
        }
        if q.row + q.side > self.n_side || q.col + q.side > self.n_side {
            return invalid(format!("sub-square {q:?} exceeds a {0}x{0} grid", self.n_side));
        }
        Ok(())
    }

    /// Inner boundary of the concentric square of triple side, clipped.
    pub fn annulus_target(&self, q: &SubSquare) -> Result<AnnulusTarget> {
        self.check_sub_square(q)?;
        let n = self.n_side as isize;
        let s = q.side as isize;
        let r0 = q.row as isize - s;
        let c0 = q.col as isize - s;
        let r1 = q.row as isize + 2 * s - 1;
        let c1 = q.col as isize + 2 * s - 1;
        let domain_boundary = r0 < 0 || c0 < 0 || r1 >= n || c1 >= n;
        let in_grid = |r: isize, c: isize| r >= 0 && c >= 0 && r < n && c < n;
        let mut sites = Vec::new();
        for r in r0.max(0)..=r1.min(n - 1) {
            for c in c0.max(0)..=c1.min(n - 1) {
                let on_ring = r == r0 || r == r1 || c == c0 || c == c1;
                if on_ring && in_grid(r, c) {
                    sites.push((r * n + c) as usize);
                }
            }
        }
        Ok(AnnulusTarget { sites, domain_boundary })
    }

    /// Tiling of the grid by `rho_inv²` blocks of side `n_side / rho_inv`.
    pub fn dyadic_blocks(&self, rho_inv: usize) -> Result<Vec<SubSquare>> {
        if rho_inv == 0 || !rho_inv.is_power_of_two() {
            return invalid(format!("block count per side {rho_inv} is not a power of two"));
        }
        if self.n_side % rho_inv != 0 {
            return invalid(format!("{rho_inv} does not divide n_side = {}", self.n_side));
        }
        let side = self.n_side / rho_inv;
        Ok((0..rho_inv)
            .flat_map(|i| (0..rho_inv).map(move |j| SubSquare::new(i * side, j * side, side)))
            .collect())
    }

    /// Tiling of a block `q` by sub-blocks of side `sub_side`.
    pub fn sub_blocks(&self, q: &SubSquare, sub_side: usize) -> Result<Vec<SubSquare>> {
        self.check_sub_square(q)?;
        if sub_side == 0 || q.side % sub_side != 0 {
            return invalid(format!("sub-block side {sub_side} does not divide {}", q.side));
        }
        let k = q.side / sub_side;
        Ok((0..k)
            .flat_map(|i| {
                (0..k).map(move |j| SubSquare::new(q.row + i * sub_side, q.col + j * sub_side, sub_side))
            })
            .collect())
    }
}
