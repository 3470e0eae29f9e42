//! Periodic N×N lattice, the four partition cases, and the boundary subsystem ∂A.
//!
//! Stars sit on lattice vertices `(row, col)`, spins on edges. A horizontal edge
//! `(row, col, H)` joins stars `(row, col)` and `(row, col + 1)`; a vertical edge
//! `(row, col, V)` joins `(row, col)` and `(row + 1, col)`, all indices mod N.
//!
//! Subsystems are described as sets of plaquettes (faces). Face `(row, col)` is
//! the unit square whose top-left corner is star `(row, col)`. The boundary
//! loops of a face region are closed paths on the real lattice; their vertices
//! are the stars of the set C and their edges are the spins of ∂A.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model variant: decoupled horizontal chains (κ → 0) or the isotropic model (κ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Quasi1d,
    Isotropic2d,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quasi1d" | "quasi-1d" | "1d" => Ok(Variant::Quasi1d),
            "isotropic2d" | "2d" | "isotropic" => Ok(Variant::Isotropic2d),
            other => Err(Error::InvalidConfig(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Quasi1d => "quasi1d",
            Variant::Isotropic2d => "isotropic2d",
        })
    }
}

/// Lattice size, variant and field strength. The sector is fixed to
/// Z₁ = Z₂ = +1 and B_p = +1 for every plaquette.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    n: usize,
    variant: Variant,
    lambda: f64,
}

impl LatticeSpec {
    pub fn new(n: usize, variant: Variant, lambda: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidLattice(format!(
                "N must be even and >= 4, got {n}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidLattice(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { n, variant, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.n, self.variant, lambda)
    }
}

/// One of the four partitions used in the topological combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionCase {
    pub m: u8,
    /// Extension D.
    pub extent: usize,
    /// Thickness d.
    pub thickness: usize,
}

impl PartitionCase {
    pub fn new(m: u8, extent: usize, thickness: usize) -> Result<Self> {
        if !(1..=4).contains(&m) {
            return Err(Error::InvalidPartition(format!(
                "case must be 1..=4, got {m}"
            )));
        }
        if thickness < 1 || extent <= thickness {
            return Err(Error::InvalidPartition(format!(
                "need D > d >= 1, got D={extent} d={thickness}"
            )));
        }
        Ok(Self {
            m,
            extent,
            thickness,
        })
    }

    /// All four cases at fixed (D, d).
    pub fn all(extent: usize, thickness: usize) -> Result<[PartitionCase; 4]> {
        Ok([
            Self::new(1, extent, thickness)?,
            Self::new(2, extent, thickness)?,
            Self::new(3, extent, thickness)?,
            Self::new(4, extent, thickness)?,
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Star {
    pub row: usize,
    pub col: usize,
}

impl Star {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeDir {
    #[serde(rename = "h")]
    Horizontal,
    #[serde(rename = "v")]
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub row: usize,
    pub col: usize,
    pub dir: EdgeDir,
}

impl Edge {
    pub fn horizontal(row: usize, col: usize) -> Self {
        Self {
            row,
            col,
            dir: EdgeDir::Horizontal,
        }
    }

    pub fn vertical(row: usize, col: usize) -> Self {
        Self {
            row,
            col,
            dir: EdgeDir::Vertical,
        }
    }
}

/// The two stars acting on the spin of `edge`, with torus wraparound.
pub fn quasi_spin_edge(edge: Edge, n: usize) -> (Star, Star) {
    let a = Star::new(edge.row % n, edge.col % n);
    let b = match edge.dir {
        EdgeDir::Horizontal => Star::new(edge.row % n, (edge.col + 1) % n),
        EdgeDir::Vertical => Star::new((edge.row + 1) % n, edge.col % n),
    };
    (a, b)
}

/// A closed boundary loop. `stars[i]` is the vertex where `edges[i]` starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub edges: Vec<Edge>,
    pub stars: Vec<Star>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of vertices where the walk turns by 90°.
    pub fn corners(&self) -> usize {
        let m = self.edges.len();
        (0..m)
            .filter(|&i| self.edges[i].dir != self.edges[(i + m - 1) % m].dir)
            .count()
    }

    /// Maximal runs of consecutive horizontal edges along the walk.
    pub fn horizontal_sections(&self) -> usize {
        let m = self.edges.len();
        (0..m)
            .filter(|&i| {
                self.edges[i].dir == EdgeDir::Horizontal
                    && self.edges[(i + m - 1) % m].dir != EdgeDir::Horizontal
            })
            .count()
    }

    pub fn horizontal_length(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.dir == EdgeDir::Horizontal)
            .count()
    }
}

/// A boundary star seen from its horizontal chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainStar {
    pub col: usize,
    pub loop_index: usize,
}

/// The boundary subsystem ∂A of a partition together with its geometric counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub case: Option<PartitionCase>,
    pub lattice_n: usize,
    pub loops: Vec<BoundaryLoop>,
    /// Total spin count L on ∂A.
    pub length: usize,
    /// Number of loops n.
    pub loop_count: usize,
    /// Corner count K.
    pub corners: usize,
    /// Combined horizontal length L′.
    pub horizontal_length: usize,
    /// Number H′ of horizontal sections.
    pub horizontal_sections: usize,
    /// Boundary stars grouped by horizontal chain (row), sorted by column.
    pub chain_segments: BTreeMap<usize, Vec<ChainStar>>,
}

impl BoundaryGeometry {
    /// Builds ∂A from a set of faces on the N×N torus.
    pub fn from_faces(faces: &BTreeSet<(usize, usize)>, n: usize) -> Result<Self> {
        let loops = trace_cell_boundary(faces, n)?
            .into_iter()
            .map(|walk| {
                let edges: Vec<Edge> = walk.iter().map(|&(_, e)| e).collect();
                let stars = walk.iter().map(|&(v, _)| v).collect();
                BoundaryLoop { edges, stars }
            })
            .collect::<Vec<_>>();
        if loops.is_empty() {
            return Err(Error::InvalidPartition("region has no boundary".into()));
        }
        let mut chain_segments: BTreeMap<usize, Vec<ChainStar>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (li, lp) in loops.iter().enumerate() {
            for s in &lp.stars {
                if !seen.insert(*s) {
                    return Err(Error::InvalidPartition(format!(
                        "star ({}, {}) lies on two boundary walks",
                        s.row, s.col
                    )));
                }
                chain_segments.entry(s.row).or_default().push(ChainStar {
                    col: s.col,
                    loop_index: li,
                });
            }
        }
        for v in chain_segments.values_mut() {
            v.sort();
        }
        Ok(Self {
            case: None,
            lattice_n: n,
            length: loops.iter().map(|l| l.len()).sum(),
            loop_count: loops.len(),
            corners: loops.iter().map(|l| l.corners()).sum(),
            horizontal_length: loops.iter().map(|l| l.horizontal_length()).sum(),
            horizontal_sections: loops.iter().map(|l| l.horizontal_sections()).sum(),
            loops,
            chain_segments,
        })
    }

    /// Axis-aligned rectangle of `height × width` faces anchored at star `(row, col)`.
    pub fn rectangle(height: usize, width: usize, anchor: Star, n: usize) -> Result<Self> {
        if height == 0 || width == 0 || height + 2 > n || width + 2 > n {
            return Err(Error::ShapeDoesNotFit(format!(
                "{height}x{width} rectangle on N={n}"
            )));
        }
        let faces = (0..height)
            .flat_map(|r| (0..width).map(move |c| (r, c)))
            .map(|(r, c)| ((anchor.row + r) % n, (anchor.col + c) % n))
            .collect();
        Self::from_faces(&faces, n)
    }

    /// All boundary stars, loop by loop in walk order.
    pub fn boundary_stars(&self) -> Vec<Star> {
        self.loops
            .iter()
            .flat_map(|l| l.stars.iter().copied())
            .collect()
    }

    /// Loop index of every boundary star.
    pub fn star_loops(&self) -> BTreeMap<Star, usize> {
        self.loops
            .iter()
            .enumerate()
            .flat_map(|(li, l)| l.stars.iter().map(move |s| (*s, li)))
            .collect()
    }

    /// Boundary spins as a set of edges.
    pub fn boundary_edges(&self) -> BTreeSet<Edge> {
        self.loops
            .iter()
            .flat_map(|l| l.edges.iter().copied())
            .collect()
    }

    /// Number of admissible boundary products, 2^(L−n), as an exponent.
    pub fn free_spins(&self) -> usize {
        self.length - self.loop_count
    }

    pub fn to_json(&self) -> serde_json::Value {
        let case = self.case;
        serde_json::json!({
            "case": case.map(|c| c.m),
            "D": case.map(|c| c.extent),
            "d": case.map(|c| c.thickness),
            "N": self.lattice_n,
            "L": self.length,
            "n": self.loop_count,
            "K": self.corners,
            "Lp": self.horizontal_length,
            "Hp": self.horizontal_sections,
            "loops": self.loops.iter().map(|l| &l.edges).collect::<Vec<_>>(),
        })
    }
}

/// Face set of partition `case` with its top-left corner at the origin, before
/// placement on the torus.
fn case_faces(case: PartitionCase) -> Vec<(usize, usize)> {
    let (big, d) = (case.extent, case.thickness);
    let in_hole = |r: usize, c: usize| r >= d && r < big - d && c >= d && c < big - d;
    let top_gap = |r: usize, c: usize| r < d && c >= d && c < big - d;
    let bottom_gap = |r: usize, c: usize| r >= big - d && c >= d && c < big - d;
    (0..big)
        .flat_map(|r| (0..big).map(move |c| (r, c)))
        .filter(|&(r, c)| !in_hole(r, c))
        .filter(|&(r, c)| match case.m {
            1 => true,
            2 => !top_gap(r, c),
            3 => !bottom_gap(r, c),
            _ => !top_gap(r, c) && !bottom_gap(r, c),
        })
        .collect()
}

/// Builds ∂A for one partition case, anchored at star (0, 0).
///
/// Case (1) is the square annulus, cases (2) and (3) remove the top or the bottom
/// middle section of the annulus, and case (4) removes both, leaving two
/// vertical d × D strips.
pub fn build_partition(case: PartitionCase, spec: &LatticeSpec) -> Result<BoundaryGeometry> {
    build_partition_at(case, spec.n(), Star::new(0, 0))
}

/// Same as [`build_partition`] with an explicit anchor star.
pub fn build_partition_at(case: PartitionCase, n: usize, anchor: Star) -> Result<BoundaryGeometry> {
    let (big, d) = (case.extent, case.thickness);
    if big < 2 * d + 1 {
        return Err(Error::ShapeDoesNotFit(format!(
            "D={big} d={d}: the hole needs D >= 2d + 1"
        )));
    }
    if big + 2 > n {
        return Err(Error::ShapeDoesNotFit(format!(
            "D={big} needs N >= D + 2 for a one-star margin, got N={n}"
        )));
    }
    let faces = case_faces(case)
        .into_iter()
        .map(|(r, c)| ((anchor.row + r) % n, (anchor.col + c) % n))
        .collect();
    let mut geom = BoundaryGeometry::from_faces(&faces, n)?;
    geom.case = Some(case);
    Ok(geom)
}

/// Traces the boundary of a set of unit cells on the N×N torus into closed walks.
///
/// Cells are addressed by their top-left vertex. Each walk is a list of
/// `(start vertex, edge)` pairs in traversal order.
pub(crate) fn trace_cell_boundary(
    cells: &BTreeSet<(usize, usize)>,
    n: usize,
) -> Result<Vec<Vec<(Star, Edge)>>> {
    let mut count: BTreeMap<Edge, usize> = BTreeMap::new();
    for &(r, c) in cells {
        for e in [
            Edge::horizontal(r, c),
            Edge::horizontal((r + 1) % n, c),
            Edge::vertical(r, c),
            Edge::vertical(r, (c + 1) % n),
        ] {
            *count.entry(e).or_default() += 1;
        }
    }
    let boundary: BTreeSet<Edge> = count
        .into_iter()
        .filter(|&(_, k)| k == 1)
        .map(|(e, _)| e)
        .collect();
    let mut incident: BTreeMap<Star, Vec<Edge>> = BTreeMap::new();
    for &e in &boundary {
        let (a, b) = quasi_spin_edge(e, n);
        incident.entry(a).or_default().push(e);
        incident.entry(b).or_default().push(e);
    }
    if let Some((v, _)) = incident.iter().find(|(_, es)| es.len() != 2) {
        return Err(Error::InvalidPartition(format!(
            "boundary is pinched at star ({}, {})",
            v.row, v.col
        )));
    }
    let mut unused = boundary;
    let mut walks = Vec::new();
    while let Some(&first) = unused.iter().next() {
        let mut walk = Vec::new();
        let (mut at, _) = quasi_spin_edge(first, n);
        let mut edge = first;
        loop {
            unused.remove(&edge);
            walk.push((at, edge));
            let (a, b) = quasi_spin_edge(edge, n);
            at = if a == at { b } else { a };
            let next = incident[&at]
                .iter()
                .copied()
                .find(|&e| e != edge)
                .expect("degree 2");
            if next == first {
                break;
            }
            edge = next;
        }
        walks.push(walk);
    }
    Ok(walks)
}

/// Parity mode for [`enumerate_boundary_products`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMode {
    /// Every subset with an even number of stars on each loop.
    Unpruned,
    /// Additionally even on every horizontal chain.
    ChainEven,
}

/// Iterator over admissible star subsets, as bitmasks over
/// [`BoundaryGeometry::boundary_stars`].
///
/// The admissible subsets form the kernel of a parity-check matrix over GF(2);
/// the iterator walks that kernel in Gray-code order, so consecutive masks
/// differ by one basis vector.
pub struct BoundaryProducts {
    basis: Vec<u64>,
    current: u64,
    index: u64,
    end: u64,
}

impl BoundaryProducts {
    /// Dimension of the kernel; the iterator yields 2^dim masks.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

impl Iterator for BoundaryProducts {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.index >= self.end {
            return None;
        }
        if self.index > 0 {
            self.current ^= self.basis[self.index.trailing_zeros() as usize];
        }
        self.index += 1;
        Some(self.current)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.index) as usize;
        (left, Some(left))
    }
}

/// Basis of {x : popcount(x & c) even for every c in `checks`} over `width` bits.
pub(crate) fn parity_kernel(checks: &[u64], width: usize) -> Vec<u64> {
    let mut rows: Vec<u64> = checks.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let bit = 1u64 << col;
        let Some(p) = (r..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i] & bit != 0 {
                rows[i] ^= rows[r];
            }
        }
        pivots.push(col);
        r += 1;
    }
    (0..width)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = 1u64 << free;
            for (row, &pc) in rows.iter().zip(&pivots) {
                if row >> free & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            v
        })
        .collect()
}

/// Parity checks (one mask per loop, plus one per chain in pruned mode).
pub(crate) fn parity_checks(geom: &BoundaryGeometry, mode: ProductMode) -> Vec<u64> {
    let mut checks = Vec::new();
    let mut chain: BTreeMap<usize, u64> = BTreeMap::new();
    let mut pos = 0;
    for lp in &geom.loops {
        let mut m = 0u64;
        for s in &lp.stars {
            m |= 1 << pos;
            *chain.entry(s.row).or_default() |= 1 << pos;
            pos += 1;
        }
        checks.push(m);
    }
    if mode == ProductMode::ChainEven {
        checks.extend(chain.into_values());
    }
    checks
}

/// Enumerates star subsets with an even number of members on each closed loop.
/// Limited to L ≤ 63.
pub fn enumerate_boundary_products(
    geom: &BoundaryGeometry,
    mode: ProductMode,
) -> Result<BoundaryProducts> {
    if geom.length > 63 {
        return Err(Error::BudgetExceeded {
            count: 1u128 << geom.free_spins().min(127),
            cap: 1 << 62,
        });
    }
    let basis = parity_kernel(&parity_checks(geom, mode), geom.length);
    Ok(BoundaryProducts {
        end: 1u64 << basis.len(),
        basis,
        current: 0,
        index: 0,
    })
}

/// A region of stars (for the Wilson loop) with perimeter and corner counts of
/// its dual boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct StarRegion {
    pub stars: BTreeSet<Star>,
    pub lattice_n: usize,
    /// Spins on the dual boundary, i.e. bonds with exactly one star inside.
    pub perimeter: usize,
    pub corners: usize,
}

impl StarRegion {
    pub fn from_stars(stars: BTreeSet<Star>, n: usize) -> Result<Self> {
        let cells = stars.iter().map(|s| (s.row, s.col)).collect();
        let walks = trace_cell_boundary(&cells, n)?;
        let perimeter = walks.iter().map(|w| w.len()).sum();
        let corners = walks
            .iter()
            .map(|w| {
                let m = w.len();
                (0..m)
                    .filter(|&i| w[i].1.dir != w[(i + m - 1) % m].1.dir)
                    .count()
            })
            .sum();
        Ok(Self {
            stars,
            lattice_n: n,
            perimeter,
            corners,
        })
    }

    /// D×D square of stars anchored at `(row, col)`.
    pub fn square(extent: usize, anchor: Star, n: usize) -> Result<Self> {
        Self::rectangle(extent, extent, anchor, n)
    }

    pub fn rectangle(height: usize, width: usize, anchor: Star, n: usize) -> Result<Self> {
        if height == 0 || width == 0 || height + 2 > n || width + 2 > n {
            return Err(Error::ShapeDoesNotFit(format!(
                "{height}x{width} star region on N={n}"
            )));
        }
        let stars = (0..height)
            .flat_map(|r| (0..width).map(move |c| (r, c)))
            .map(|(r, c)| Star::new((anchor.row + r) % n, (anchor.col + c) % n))
            .collect();
        Self::from_stars(stars, n)
    }

    pub fn contains(&self, s: Star) -> bool {
        self.stars.contains(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(g: &BoundaryGeometry) -> (usize, usize, usize, usize, usize) {
        (
            g.length,
            g.loop_count,
            g.corners,
            g.horizontal_length,
            g.horizontal_sections,
        )
    }

    /// Independent corner counter: walks the vertex sequence and compares
    /// successive displacement vectors.
    fn corners_by_vertex_walk(g: &BoundaryGeometry) -> usize {
        let n = g.lattice_n as i64;
        let wrap = |x: i64| ((x % n) + n + n / 2) % n - n / 2;
        g.loops
            .iter()
            .map(|lp| {
                let m = lp.stars.len();
                (0..m)
                    .filter(|&i| {
                        let a = lp.stars[(i + m - 1) % m];
                        let b = lp.stars[i];
                        let c = lp.stars[(i + 1) % m];
                        let d1 = (
                            wrap(b.row as i64 - a.row as i64),
                            wrap(b.col as i64 - a.col as i64),
                        );
                        let d2 = (
                            wrap(c.row as i64 - b.row as i64),
                            wrap(c.col as i64 - b.col as i64),
                        );
                        d1 != d2
                    })
                    .count()
            })
            .sum()
    }

    #[test]
    fn annulus_matches_figure_four() {
        let spec = LatticeSpec::new(10, Variant::Isotropic2d, 0.0).unwrap();
        let g = build_partition(PartitionCase::new(1, 6, 2).unwrap(), &spec).unwrap();
        assert_eq!(g.loop_count, 2);
        assert_eq!(g.length, 32);
        assert_eq!(g.corners, corners_by_vertex_walk(&g));
        assert_eq!(g.corners, 8);
        for lp in &g.loops {
            assert_eq!(lp.len() % 2, 0);
        }
    }

    #[test]
    fn loop_counts_per_case() {
        for (m, n_loops) in [(1, 2), (2, 1), (3, 1), (4, 2)] {
            let g = build_partition_at(PartitionCase::new(m, 7, 2).unwrap(), 12, Star::new(0, 0))
                .unwrap();
            assert_eq!(g.loop_count, n_loops, "case {m}");
            assert!(g.length >= 4 * g.loop_count);
            assert_eq!(g.corners, corners_by_vertex_walk(&g));
        }
    }

    #[test]
    fn quasi_spin_edges_wrap() {
        assert_eq!(
            quasi_spin_edge(Edge::horizontal(2, 3), 8),
            (Star::new(2, 3), Star::new(2, 4))
        );
        assert_eq!(
            quasi_spin_edge(Edge::vertical(2, 3), 8),
            (Star::new(2, 3), Star::new(3, 3))
        );
        assert_eq!(
            quasi_spin_edge(Edge::horizontal(5, 7), 8),
            (Star::new(5, 7), Star::new(5, 0))
        );
        assert_eq!(
            quasi_spin_edge(Edge::vertical(7, 1), 8),
            (Star::new(7, 1), Star::new(0, 1))
        );
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            build_partition_at(PartitionCase::new(1, 6, 3).unwrap(), 12, Star::new(0, 0)),
            Err(Error::ShapeDoesNotFit(_))
        ));
        assert!(matches!(
            build_partition_at(PartitionCase::new(1, 9, 2).unwrap(), 10, Star::new(0, 0)),
            Err(Error::ShapeDoesNotFit(_))
        ));
        assert!(PartitionCase::new(1, 2, 2).is_err());
        assert!(LatticeSpec::new(7, Variant::Quasi1d, 0.1).is_err());
    }

    #[test]
    fn product_counts() {
        let sq = BoundaryGeometry::rectangle(1, 1, Star::new(1, 1), 6).unwrap();
        assert_eq!(sq.length, 4);
        assert_eq!(
            enumerate_boundary_products(&sq, ProductMode::Unpruned)
                .unwrap()
                .count(),
            8
        );

        let faces = [(1, 1), (1, 4)].into_iter().collect();
        let two = BoundaryGeometry::from_faces(&faces, 8).unwrap();
        assert_eq!(two.loop_count, 2);
        assert_eq!(
            enumerate_boundary_products(&two, ProductMode::Unpruned)
                .unwrap()
                .count(),
            64
        );
    }

    #[test]
    fn unpruned_count_and_loop_parity() {
        let g =
            build_partition_at(PartitionCase::new(2, 3, 1).unwrap(), 6, Star::new(0, 0)).unwrap();
        assert!(g.length <= 16);
        let masks: Vec<u64> = enumerate_boundary_products(&g, ProductMode::Unpruned)
            .unwrap()
            .collect();
        assert_eq!(masks.len(), 1 << g.free_spins());
        let distinct: BTreeSet<_> = masks.iter().collect();
        assert_eq!(distinct.len(), masks.len());
    }

    #[test]
    fn pruned_count_matches_filter() {
        let spec = LatticeSpec::new(10, Variant::Quasi1d, 0.0).unwrap();
        let g = build_partition(PartitionCase::new(2, 4, 1).unwrap(), &spec).unwrap();
        let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
        for (i, s) in g.boundary_stars().iter().enumerate() {
            *rows.entry(s.row).or_default() |= 1 << i;
        }
        let pruned = enumerate_boundary_products(&g, ProductMode::ChainEven)
            .unwrap()
            .count();
        let brute = enumerate_boundary_products(&g, ProductMode::Unpruned)
            .unwrap()
            .filter(|&m| rows.values().all(|&r| (m & r).count_ones() % 2 == 0))
            .count();
        assert_eq!(pruned, brute);
        assert!(pruned < 1 << g.free_spins());
    }

    #[test]
    fn four_case_identities_small() {
        for big in 3..=10 {
            for d in 1..big {
                let Ok(cases) = PartitionCase::all(big, d) else {
                    continue;
                };
                let gs: Vec<_> = cases
                    .iter()
                    .map(|&c| build_partition_at(c, big + 4, Star::new(0, 0)))
                    .collect();
                if gs.iter().any(|g| g.is_err()) {
                    continue;
                }
                let c: Vec<_> = gs.into_iter().map(|g| counts(&g.unwrap())).collect();
                assert_eq!(c[0].0 + c[3].0, c[1].0 + c[2].0);
                assert_eq!(c[0].2 + c[3].2, c[1].2 + c[2].2);
                assert_eq!(c[0].3 + c[3].3, c[1].3 + c[2].3);
                assert_eq!(c[0].4 + c[3].4, c[1].4 + c[2].4);
            }
        }
    }

    #[test]
    fn translation_leaves_counts() {
        let case = PartitionCase::new(3, 7, 2).unwrap();
        let base = counts(&build_partition_at(case, 12, Star::new(0, 0)).unwrap());
        for anchor in [Star::new(5, 9), Star::new(11, 11), Star::new(3, 0)] {
            assert_eq!(counts(&build_partition_at(case, 12, anchor).unwrap()), base);
        }
    }

    #[test]
    fn star_region_square() {
        let r = StarRegion::square(3, Star::new(1, 1), 8).unwrap();
        assert_eq!(r.perimeter, 12);
        assert_eq!(r.corners, 4);
        let mut l_shape = r.stars.clone();
        l_shape.insert(Star::new(4, 1));
        let l = StarRegion::from_stars(l_shape, 8).unwrap();
        assert_eq!(l.perimeter, 14);
        assert_eq!(l.corners, 6);
    }

    #[test]
    fn json_dump_fields() {
        let g =
            build_partition_at(PartitionCase::new(1, 6, 2).unwrap(), 10, Star::new(0, 0)).unwrap();
        let v = g.to_json();
        assert_eq!(v["L"], 32);
        assert_eq!(v["n"], 2);
        assert_eq!(v["case"], 1);
        assert_eq!(v["loops"].as_array().unwrap().len(), 2);
    }
}
