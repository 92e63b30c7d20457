//! Vertex domains and the integer fields that live on them.
//!
//! Three kinds of domain are supported:
//!
//! * a boxed window `[x0,x1] x [y0,y1]` of Z^2,
//! * a cylinder Z^2 / <e> for a nonzero period vector `e`,
//! * a general locally-finite graph with explicit thresholds.
//!
//! Every vertex is either *interior* or part of the *guard band*. Guard-band
//! vertices carry pinned values: smoothing never changes them and the
//! sandpile engine treats them as sinks.

mod field;
mod io;

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use field::IntegerField;
pub use io::{field_to_csv, parse_dump, read_field, write_dump, DomainHeader, FieldDump};

pub type VertexId = usize;

/// Threshold and interior degree of lattice vertices.
pub const LATTICE_THRESHOLD: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxParams {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
    pub guard: i64,
}

/// Which coordinate of a cylinder is the finite (wrapped) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripAxis {
    /// `x` ranges over `[0, |e.0|)`; the long coordinate is `y`.
    X,
    /// `y` ranges over `[0, |e.1|)`; the long coordinate is `x`.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CylinderParams {
    /// Normalized period: the wrapped component is positive.
    pub period: (i64, i64),
    pub axis: StripAxis,
    /// Inclusive range of the long coordinate.
    pub lo: i64,
    pub hi: i64,
    pub guard: i64,
}

impl CylinderParams {
    fn normalize(period: (i64, i64)) -> Result<((i64, i64), StripAxis)> {
        let (a, b) = period;
        if a == 0 && b == 0 {
            return Err(Error::InvalidDomain("cylinder period must be nonzero".into()));
        }
        if a != 0 && a.abs() >= b.abs() {
            let s = a.signum();
            Ok(((a * s, b * s), StripAxis::X))
        } else {
            let s = b.signum();
            Ok(((a * s, b * s), StripAxis::Y))
        }
    }

    /// Width of the wrapped direction.
    pub fn width(&self) -> i64 {
        match self.axis {
            StripAxis::X => self.period.0,
            StripAxis::Y => self.period.1,
        }
    }

    /// Jump of the long coordinate across the wrap seam.
    pub fn skew(&self) -> i64 {
        match self.axis {
            StripAxis::X => self.period.1.abs(),
            StripAxis::Y => self.period.0.abs(),
        }
    }

    /// Canonical representative of `(x, y)` modulo the period.
    pub fn canonical(&self, x: i64, y: i64) -> (i64, i64) {
        let (a, b) = self.period;
        let k = match self.axis {
            StripAxis::X => x.div_euclid(a),
            StripAxis::Y => y.div_euclid(b),
        };
        (x - k * a, y - k * b)
    }

    pub fn long_coord(&self, (x, y): (i64, i64)) -> i64 {
        match self.axis {
            StripAxis::X => y,
            StripAxis::Y => x,
        }
    }

    /// Whether Z^2 / <period> is a simple graph (no loops or double edges).
    pub fn is_simple_period(period: (i64, i64)) -> bool {
        let Ok(((a, b), axis)) = Self::normalize(period) else {
            return false;
        };
        let (w, s) = match axis {
            StripAxis::X => (a, b.abs()),
            StripAxis::Y => (b, a.abs()),
        };
        w >= 3 || (w == 2 && s != 0) || (w == 1 && s >= 2)
    }

    /// Smallest `k >= 1` such that the cylinder of period `k * e` is simple.
    pub fn minimal_multiple(e: (i64, i64)) -> i64 {
        (1..)
            .find(|&k| Self::is_simple_period((k * e.0, k * e.1)))
            .expect("some multiple of a nonzero period is simple")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeKind {
    Box(BoxParams),
    Cylinder(CylinderParams),
    Graph,
}

/// A finite vertex set with neighbor lists, thresholds and an interior flag.
///
/// Vertex ids are row-major over the coordinate ranges for boxes and
/// cylinders. Adjacency is stored in compressed rows for every kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    coords: Vec<(i64, i64)>,
    offsets: Vec<usize>,
    adjacency: Vec<VertexId>,
    thresholds: Vec<i64>,
    interior: Vec<bool>,
}

impl Lattice {
    /// Boxed window `[x0,x1] x [y0,y1]`; vertices within `guard` of the box
    /// edge form the guard band.
    pub fn boxed(x0: i64, x1: i64, y0: i64, y1: i64, guard: i64) -> Result<Arc<Lattice>> {
        if guard < 1 {
            return Err(Error::InvalidDomain("guard band width must be at least 1".into()));
        }
        if x1 - x0 < 2 * guard || y1 - y0 < 2 * guard {
            return Err(Error::InvalidDomain(format!(
                "box [{x0},{x1}]x[{y0},{y1}] has no interior with guard {guard}"
            )));
        }
        let params = BoxParams { x0, x1, y0, y1, guard };
        let mut coords = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                coords.push((x, y));
            }
        }
        let mut lattice = Lattice {
            kind: LatticeKind::Box(params),
            coords,
            offsets: Vec::new(),
            adjacency: Vec::new(),
            thresholds: Vec::new(),
            interior: Vec::new(),
        };
        lattice.build_lattice_adjacency()?;
        Ok(Arc::new(lattice))
    }

    /// Cylinder Z^2 / <period> restricted to long coordinates `[lo, hi]`.
    ///
    /// The wrapped coordinate is the period component with the larger
    /// absolute value. `guard` must be at least the seam skew so that every
    /// interior vertex keeps its four neighbors.
    pub fn cylinder(period: (i64, i64), lo: i64, hi: i64, guard: i64) -> Result<Arc<Lattice>> {
        let (period, axis) = CylinderParams::normalize(period)?;
        let params = CylinderParams { period, axis, lo, hi, guard };
        if !CylinderParams::is_simple_period(period) {
            return Err(Error::InvalidDomain(format!(
                "period {period:?} gives a cylinder with loops or double edges"
            )));
        }
        if guard < params.skew().max(1) {
            return Err(Error::InvalidDomain(format!(
                "guard {guard} is below the seam skew {}",
                params.skew().max(1)
            )));
        }
        if hi - lo < 2 * guard {
            return Err(Error::InvalidDomain(format!(
                "range [{lo},{hi}] has no interior with guard {guard}"
            )));
        }
        let w = params.width();
        let mut coords = Vec::new();
        match axis {
            StripAxis::X => {
                for y in lo..=hi {
                    for x in 0..w {
                        coords.push((x, y));
                    }
                }
            }
            StripAxis::Y => {
                for y in 0..w {
                    for x in lo..=hi {
                        coords.push((x, y));
                    }
                }
            }
        }
        let mut lattice = Lattice {
            kind: LatticeKind::Cylinder(params),
            coords,
            offsets: Vec::new(),
            adjacency: Vec::new(),
            thresholds: Vec::new(),
            interior: Vec::new(),
        };
        lattice.build_lattice_adjacency()?;
        Ok(Arc::new(lattice))
    }

    /// General graph. Non-interior vertices act as the guard band (sinks).
    pub fn graph(
        neighbors: Vec<Vec<VertexId>>,
        thresholds: Vec<i64>,
        interior: Vec<bool>,
    ) -> Result<Arc<Lattice>> {
        let n = neighbors.len();
        if thresholds.len() != n || interior.len() != n {
            return Err(Error::InvalidDomain("graph arrays differ in length".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for (v, list) in neighbors.iter().enumerate() {
            if thresholds[v] <= 0 {
                return Err(Error::InvalidDomain(format!("threshold of {v} must be positive")));
            }
            if list.len() as i64 > thresholds[v] {
                return Err(Error::InvalidDomain(format!(
                    "vertex {v} has more neighbors than its threshold"
                )));
            }
            for (i, &u) in list.iter().enumerate() {
                if u >= n || u == v || list[..i].contains(&u) {
                    return Err(Error::InvalidDomain(format!("bad neighbor {u} of {v}")));
                }
                if !neighbors[u].contains(&v) {
                    return Err(Error::InvalidDomain(format!(
                        "neighbor relation not symmetric between {v} and {u}"
                    )));
                }
            }
            adjacency.extend_from_slice(list);
            offsets.push(adjacency.len());
        }
        Ok(Arc::new(Lattice {
            kind: LatticeKind::Graph,
            coords: Vec::new(),
            offsets,
            adjacency,
            thresholds,
            interior,
        }))
    }

    fn build_lattice_adjacency(&mut self) -> Result<()> {
        let n = self.coords.len();
        self.offsets = Vec::with_capacity(n + 1);
        self.offsets.push(0);
        self.thresholds = vec![LATTICE_THRESHOLD; n];
        self.interior = Vec::with_capacity(n);
        for v in 0..n {
            let (x, y) = self.coords[v];
            let start = self.adjacency.len();
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if let Some(u) = self.vertex_at(x + dx, y + dy) {
                    if u == v || self.adjacency[start..].contains(&u) {
                        return Err(Error::InvalidDomain(format!(
                            "vertex ({x},{y}) has a loop or double edge"
                        )));
                    }
                    self.adjacency.push(u);
                }
            }
            self.offsets.push(self.adjacency.len());
            let inside = match &self.kind {
                LatticeKind::Box(b) => {
                    x >= b.x0 + b.guard
                        && x <= b.x1 - b.guard
                        && y >= b.y0 + b.guard
                        && y <= b.y1 - b.guard
                }
                LatticeKind::Cylinder(c) => {
                    let l = c.long_coord((x, y));
                    l >= c.lo + c.guard && l <= c.hi - c.guard
                }
                LatticeKind::Graph => unreachable!(),
            };
            if inside && self.adjacency.len() - start != 4 {
                return Err(Error::InvalidDomain(format!(
                    "interior vertex ({x},{y}) lacks a neighbor"
                )));
            }
            self.interior.push(inside);
        }
        Ok(())
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.len()
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.interior[v])
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn threshold(&self, v: VertexId) -> i64 {
        self.thresholds[v]
    }

    pub fn max_threshold(&self) -> i64 {
        self.thresholds.iter().copied().max().unwrap_or(0)
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.interior[v]
    }

    /// True for guard-band vertices and for interior vertices next to one.
    pub fn near_guard(&self, v: VertexId) -> bool {
        !self.interior[v] || self.neighbors(v).iter().any(|&u| !self.interior[u])
    }

    pub fn has_coordinates(&self) -> bool {
        !matches!(self.kind, LatticeKind::Graph)
    }

    pub fn coord(&self, v: VertexId) -> Option<(i64, i64)> {
        self.coords.get(v).copied()
    }

    pub fn cylinder_params(&self) -> Option<&CylinderParams> {
        match &self.kind {
            LatticeKind::Cylinder(c) => Some(c),
            _ => None,
        }
    }

    /// The vertex representing the lattice point `(x, y)`, if it lies in
    /// the domain. Cylinder points are reduced modulo the period first.
    pub fn vertex_at(&self, x: i64, y: i64) -> Option<VertexId> {
        match &self.kind {
            LatticeKind::Box(b) => {
                if x < b.x0 || x > b.x1 || y < b.y0 || y > b.y1 {
                    return None;
                }
                let w = (b.x1 - b.x0 + 1) as usize;
                Some((y - b.y0) as usize * w + (x - b.x0) as usize)
            }
            LatticeKind::Cylinder(c) => {
                let (cx, cy) = c.canonical(x, y);
                let l = c.long_coord((cx, cy));
                if l < c.lo || l > c.hi {
                    return None;
                }
                let len = (c.hi - c.lo + 1) as usize;
                let w = c.width() as usize;
                Some(match c.axis {
                    StripAxis::X => (cy - c.lo) as usize * w + cx as usize,
                    StripAxis::Y => cy as usize * len + (cx - c.lo) as usize,
                })
            }
            LatticeKind::Graph => None,
        }
    }

    /// The vertex at `v + e`, if it exists.
    pub fn translate(&self, v: VertexId, e: (i64, i64)) -> Option<VertexId> {
        let (x, y) = self.coord(v)?;
        self.vertex_at(x + e.0, y + e.1)
    }

    /// Squared Euclidean distance; on cylinders the quotient distance.
    pub fn dist_sq(&self, u: VertexId, v: VertexId) -> Option<i64> {
        let (ux, uy) = self.coord(u)?;
        let (vx, vy) = self.coord(v)?;
        let (dx, dy) = (ux - vx, uy - vy);
        match &self.kind {
            LatticeKind::Cylinder(c) => {
                let (a, b) = c.period;
                let k0 = (-(dx * a + dy * b)).div_euclid(a * a + b * b);
                (k0 - 1..=k0 + 2)
                    .map(|k| {
                        let (ex, ey) = (dx + k * a, dy + k * b);
                        ex * ex + ey * ey
                    })
                    .min()
            }
            _ => Some(dx * dx + dy * dy),
        }
    }

    /// Vertices within Euclidean distance `radius` of some vertex of `set`.
    pub fn neighborhood(&self, set: &[VertexId], radius: i64) -> Result<Vec<VertexId>> {
        if !self.has_coordinates() {
            return Err(Error::NoCoordinates);
        }
        let r2 = radius * radius;
        Ok(self
            .vertices()
            .filter(|&v| set.iter().any(|&s| self.dist_sq(v, s).unwrap() <= r2))
            .collect())
    }

    /// Pixel layout for rendering and CSV output: `(width, height, ids)`
    /// with ids row-major from the top row. The top row holds the largest
    /// `y` (boxes, x-strip cylinders) so images keep the usual orientation.
    pub fn raster(&self) -> Option<(usize, usize, Vec<VertexId>)> {
        let (xs, ys): (Vec<i64>, Vec<i64>) = match &self.kind {
            LatticeKind::Box(b) => ((b.x0..=b.x1).collect(), (b.y0..=b.y1).rev().collect()),
            LatticeKind::Cylinder(c) => match c.axis {
                StripAxis::X => ((0..c.width()).collect(), (c.lo..=c.hi).rev().collect()),
                StripAxis::Y => ((c.lo..=c.hi).collect(), (0..c.width()).rev().collect()),
            },
            LatticeKind::Graph => return None,
        };
        let mut ids = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                ids.push(self.vertex_at(x, y)?);
            }
        }
        Some((xs.len(), ys.len(), ids))
    }
}

/// Connected components of `{v : pred(v)}` under the domain adjacency
/// (4-adjacency plus wrap edges on cylinders). Components are listed in
/// order of their smallest vertex; each component is sorted.
pub fn connected_components<P>(domain: &Lattice, pred: P) -> Vec<Vec<VertexId>>
where
    P: Fn(VertexId) -> bool,
{
    let mut seen = vec![false; domain.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in domain.vertices() {
        if seen[start] || !pred(start) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut component = Vec::new();
        while let Some(v) = queue.pop_front() {
            component.push(v);
            for &u in domain.neighbors(v) {
                if !seen[u] && pred(u) {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// Whether `laplacian(f, v) <= 0` on every vertex of `region`.
pub fn is_superharmonic(f: &IntegerField, region: &[VertexId]) -> Result<bool> {
    for &v in region {
        if f.laplacian(v)? > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both sides of the discrete Green identity on the finite region `A`:
///
/// `sum_{v in A \ dA} lap f(v) = sum_{v in dA, w in A \ dA, v~w} (f(v) - f(w))`
///
/// where `dA` are the vertices of `A` with a neighbor outside `A`. On
/// graphs whose thresholds exceed the degree the right side also carries
/// `sum (deg(w) - tau(w)) f(w)` over `A \ dA`; on lattices that term is 0.
pub fn green_identity_check(f: &IntegerField, region: &[VertexId]) -> Result<(i64, i64)> {
    let domain = f.domain();
    let mut in_region = vec![false; domain.len()];
    for &v in region {
        if !domain.is_interior(v) {
            return Err(Error::RegionTouchesGuardBand(v));
        }
        in_region[v] = true;
    }
    let mut lhs = 0;
    let mut rhs = 0;
    for &v in region {
        if domain.neighbors(v).iter().any(|&u| !in_region[u]) {
            continue;
        }
        lhs += f.laplacian(v)?;
        let deg = domain.neighbors(v).len() as i64;
        rhs += (deg - domain.threshold(v)) * f[v];
        for &u in domain.neighbors(v) {
            if domain.neighbors(u).iter().any(|&w| !in_region[w]) {
                rhs += f[u] - f[v];
            }
        }
    }
    Ok((lhs, rhs))
}
