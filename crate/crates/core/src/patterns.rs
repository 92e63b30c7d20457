//! Solitons, triads and nodes as `3 + Laplacian(theta_F)`, and checks of
//! how waves act on them.
//!
//! A soliton is named by its period direction `(p, q)`: it is invariant
//! under translation by `(p, q)` and comes from the edge function with
//! normal `n = (-q, p)`. A wave sent from the side where `n . x >= 0`
//! moves it by `-s`, where `n . s = -1`, i.e. `p' q - p q' = 1` for
//! `s = (p', q')`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{CylinderParams, IntegerField, Lattice, LatticeKind, StripAxis, VertexId};
use crate::plmin::{gcd, minimal_representative, DirectionPair, PLMinFunction};
use crate::sandpile::{wave, SandpileState};
use crate::smoothing::{
    canonical_smoothing, canonical_smoothing_field, grow_and_retry, psi_prime, EdgeProfile,
    ProfileCache, SmoothingOptions, SmoothingResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Soliton { p: i64, q: i64 },
    Triad,
    Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternState {
    pub state: SandpileState,
    pub theta: IntegerField,
    pub kind: PatternKind,
    pub dirs: Option<DirectionPair>,
    /// 1-smoothing steps used to reach `theta`, including the final no-op.
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolitonSpec {
    pub p: i64,
    pub q: i64,
    /// Long half-height of the cylinder; `None` picks a default.
    pub half_height: Option<i64>,
}

impl SolitonSpec {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::NotCoprime(p, q));
        }
        Ok(SolitonSpec { p, q, half_height: None })
    }

    pub fn with_half_height(self, h: i64) -> Self {
        SolitonSpec { half_height: Some(h), ..self }
    }

    /// Normal of the underlying edge function.
    pub fn normal(&self) -> (i64, i64) {
        (-self.q, self.p)
    }

    pub fn edge_function(&self) -> Result<PLMinFunction> {
        let (a, b) = self.normal();
        PLMinFunction::psi_edge(a, b)
    }

    /// How many copies of `(p, q)` make up the cylinder period.
    pub fn multiplicity(&self) -> i64 {
        CylinderParams::minimal_multiple((self.p, self.q))
    }

    pub fn default_half_height(&self) -> i64 {
        4 * (self.p.abs() + self.q.abs()) + 32
    }

    pub fn domain(&self) -> Result<Arc<Lattice>> {
        let k = self.multiplicity();
        let period = (k * self.p, k * self.q);
        let skew = period.0.abs().min(period.1.abs()).max(1);
        let h = self.half_height.unwrap_or_else(|| self.default_half_height());
        Lattice::cylinder(period, -h, h, skew)
    }

    /// The canonical `(p', q')` with `p' q - p q' = 1`.
    pub fn expected_shift(&self) -> (i64, i64) {
        let (n1, n2) = self.normal();
        let (_, x, y) = crate::plmin::ext_gcd(n1, n2);
        // n . (x, y) = 1, so -(x, y) has n . s = -1
        minimal_representative((-x, -y), (self.p, self.q))
    }
}

/// `3 + Laplacian(theta)` on the interior, 3 on the guard band.
pub fn state_from_theta(theta: &IntegerField) -> SandpileState {
    let d = theta.domain();
    theta.map(|v, _| if d.is_interior(v) { 3 + theta.laplacian_unchecked(v) } else { 3 })
}

/// `theta_F` on a cylinder by direct smoothing, or on a box by smoothing
/// the edge-profile minimum of `F`.
pub fn theta_on(
    f: &PLMinFunction,
    domain: &Arc<Lattice>,
    cache: &mut ProfileCache,
    opts: &SmoothingOptions,
) -> Result<SmoothingResult> {
    match domain.kind() {
        LatticeKind::Cylinder(_) => canonical_smoothing(f, domain, opts),
        LatticeKind::Box(_) => canonical_smoothing_field(&psi_prime(f, domain, cache)?, opts),
        LatticeKind::Graph => Err(Error::NoCoordinates),
    }
}

pub fn build_soliton(spec: &SolitonSpec) -> Result<PatternState> {
    let f = spec.edge_function()?;
    let base = spec.half_height.unwrap_or_else(|| spec.default_half_height());
    let (result, _) = grow_and_retry(3, |scale| {
        let domain = spec.with_half_height(base * scale).domain()?;
        canonical_smoothing(&f, &domain, &SmoothingOptions::default())
    })?;
    Ok(PatternState {
        state: state_from_theta(&result.final_field),
        theta: result.final_field,
        kind: PatternKind::Soliton { p: spec.p, q: spec.q },
        dirs: None,
        steps: result.steps,
    })
}

/// The soliton of `spec` drawn on a box by periodic lookup.
pub fn soliton_on_box(spec: &SolitonSpec, x0: i64, x1: i64, y0: i64, y1: i64) -> Result<PatternState> {
    let (a, b) = spec.normal();
    let profile = EdgeProfile::build(a, b, &SmoothingOptions::default())?;
    let domain = Lattice::boxed(x0, x1, y0, y1, 1)?;
    let theta = IntegerField::from_coords(domain, |x, y| profile.value(x, y))?;
    Ok(PatternState {
        state: state_from_theta(&theta),
        theta,
        kind: PatternKind::Soliton { p: spec.p, q: spec.q },
        dirs: None,
        steps: profile.steps(),
    })
}

fn build_on_box(f: &PLMinFunction, half: i64, kind: PatternKind, dirs: DirectionPair) -> Result<PatternState> {
    let mut cache = ProfileCache::default();
    let (result, _) = grow_and_retry(3, |scale| {
        let r = half * scale;
        let domain = Lattice::boxed(-r, r, -r, r, 1)?;
        theta_on(f, &domain, &mut cache, &SmoothingOptions::default())
    })?;
    Ok(PatternState {
        state: state_from_theta(&result.final_field),
        theta: result.final_field,
        kind,
        dirs: Some(dirs),
        steps: result.steps,
    })
}

/// Three solitons meeting at a point, on the box `[-half, half]^2`
/// (grown if the smoothing reaches the guard band).
pub fn build_triad(dirs: &DirectionPair, half: i64) -> Result<PatternState> {
    build_on_box(&PLMinFunction::psi_vertex(dirs)?, half, PatternKind::Triad, *dirs)
}

pub fn build_node(dirs: &DirectionPair, half: i64) -> Result<PatternState> {
    build_on_box(&PLMinFunction::psi_node(dirs)?, half, PatternKind::Node, *dirs)
}

/// `-sum Laplacian(theta)` over one period of the soliton cylinder.
pub fn laplacian_mass_check(spec: &SolitonSpec) -> Result<i64> {
    let ps = build_soliton(spec)?;
    let total: i64 = ps.theta.domain().interior_vertices().map(|v| -ps.theta.laplacian_unchecked(v)).sum();
    let k = spec.multiplicity();
    if total % k != 0 {
        return Err(Error::Precondition(format!("mass {total} is not divisible by {k} periods")));
    }
    Ok(total / k)
}

/// Long coordinate and the range of interior long coordinates.
fn long_layout(domain: &Lattice) -> Result<(CylinderParams, i64, i64)> {
    let c = *domain
        .cylinder_params()
        .ok_or_else(|| Error::Precondition("pattern must live on a cylinder".into()))?;
    Ok((c, c.lo + c.guard, c.hi - c.guard))
}

/// Which end of the long axis lies on the `n . x >= 0` side.
fn wave_side_is_hi(c: &CylinderParams, normal: (i64, i64)) -> bool {
    let unit = match c.axis {
        StripAxis::X => (0, 1),
        StripAxis::Y => (1, 0),
    };
    normal.0 * unit.0 + normal.1 * unit.1 > 0
}

/// Interior vertices whose long coordinate is at least `lo_margin` from
/// the low guard band and `hi_margin` from the high one.
fn comparison_region(domain: &Lattice, lo_margin: i64, hi_margin: i64) -> Result<Vec<VertexId>> {
    let (c, lo, hi) = long_layout(domain)?;
    Ok(domain
        .interior_vertices()
        .filter(|&v| {
            let l = c.long_coord(domain.coord(v).unwrap());
            l >= lo + lo_margin && l <= hi - hi_margin
        })
        .collect())
}

/// `after(x) == before(x + s)` on `region`, wherever `x + s` is interior.
fn matches_shift(after: &IntegerField, before: &IntegerField, s: (i64, i64), region: &[VertexId]) -> bool {
    let d = after.domain();
    let mut compared = 0;
    for &u in region {
        let (x, y) = d.coord(u).unwrap();
        match d.vertex_at(x + s.0, y + s.1) {
            Some(w) if d.is_interior(w) => {
                if after[u] != before[w] {
                    return false;
                }
                compared += 1;
            }
            _ => {}
        }
    }
    compared > 0
}

fn same_class(a: (i64, i64), b: (i64, i64), period: (i64, i64)) -> bool {
    minimal_representative(a, period) == minimal_representative(b, period)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovabilityReport {
    /// Detected shift for a single wave, canonical modulo the period.
    pub shift: (i64, i64),
    pub expected: (i64, i64),
    /// Shift detected after all waves.
    pub total_shift: (i64, i64),
    pub waves: usize,
    pub ok: bool,
    /// The compared region holds 3 everywhere.
    pub background: bool,
}

/// A source vertex on the wave side holding 3 with all neighbors at 3,
/// closest to long coordinate `target`.
fn pick_source(state: &SandpileState, c: &CylinderParams, target: i64) -> Option<VertexId> {
    let d = state.domain();
    d.interior_vertices()
        .filter(|&v| state[v] == 3 && d.neighbors(v).iter().all(|&u| d.is_interior(u) && state[u] == 3))
        .min_by_key(|&v| ((c.long_coord(d.coord(v).unwrap()) - target).abs(), v))
}

fn detect_shift(
    after: &IntegerField,
    before: &IntegerField,
    region: &[VertexId],
    reach: i64,
) -> Option<(i64, i64)> {
    let d = after.domain();
    let c = d.cylinder_params()?;
    let w = c.width();
    let mut found: Vec<(i64, i64)> = Vec::new();
    for a in 0..w {
        for b in -reach..=reach {
            let s = match c.axis {
                StripAxis::X => (a, b),
                StripAxis::Y => (b, a),
            };
            if matches_shift(after, before, s, region) {
                found.push(minimal_representative(s, c.period));
            }
        }
    }
    found.sort_by_key(|&(x, y)| (x.abs() + y.abs(), x < 0, y < 0, x, y));
    found.dedup();
    found.first().copied()
}

/// Sends `waves` waves into the soliton from its `n . x >= 0` side and
/// checks each moves it by the expected shift.
pub fn verify_movable(ps: &PatternState, waves: usize) -> Result<MovabilityReport> {
    let PatternKind::Soliton { p, q } = ps.kind else {
        return Err(Error::Precondition("verify_movable needs a soliton".into()));
    };
    let spec = SolitonSpec::new(p, q)?;
    let d = ps.state.domain();
    let (c, lo, hi) = long_layout(d)?;
    let hi_side = wave_side_is_hi(&c, spec.normal());
    let expected = spec.expected_shift();

    let strip: Vec<i64> = d
        .interior_vertices()
        .filter(|&v| ps.state[v] != 3)
        .map(|v| c.long_coord(d.coord(v).unwrap()))
        .collect();
    let margin = |k: usize| 2 * k as i64 + 3;
    let (lo_m, hi_m) = if hi_side { (2, margin(waves)) } else { (margin(waves), 2) };
    let region = comparison_region(d, lo_m, hi_m)?;
    if region.is_empty() {
        return Err(Error::WindowTooSmall { vertex: 0 });
    }
    if strip.is_empty() || region.iter().all(|&v| ps.state[v] == 3) {
        return Ok(MovabilityReport {
            shift: (0, 0),
            expected,
            total_shift: (0, 0),
            waves,
            ok: false,
            background: true,
        });
    }
    let (smin, smax) = (*strip.iter().min().unwrap(), *strip.iter().max().unwrap());
    let target = if hi_side { (smax + hi) / 2 } else { (smin + lo) / 2 };
    let reach = (waves as i64 + 1) * (p.abs() + q.abs() + 1) + 2;

    let mut state = ps.state.clone();
    let mut first = None;
    for k in 0..waves {
        let v = pick_source(&state, &c, target).ok_or(Error::NoValidSource)?;
        let w = wave(&state, v)?;
        if k == 0 {
            let region1 = comparison_region(d, if hi_side { 2 } else { margin(1) }, if hi_side { margin(1) } else { 2 })?;
            first = detect_shift(&w.result, &state, &region1, reach);
        }
        state = w.result;
    }
    let total = detect_shift(&state, &ps.state, &region, reach);
    let shift = first.unwrap_or((0, 0));
    let total_shift = total.unwrap_or((0, 0));
    let k = waves as i64;
    let ok = first.is_some()
        && total.is_some()
        && same_class(shift, expected, c.period)
        && same_class(total_shift, (k * expected.0, k * expected.1), c.period)
        && matches_shift(&state, &ps.state, (k * expected.0, k * expected.1), &region);
    Ok(MovabilityReport { shift, expected, total_shift, waves, ok, background: false })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveShiftReport {
    pub ok: bool,
    /// Index of the form active at the source.
    pub form: usize,
    pub compared: usize,
    pub mismatches: Vec<VertexId>,
}

/// Sends a wave from `source` into `3 + Laplacian(theta_F)` and compares
/// with `3 + Laplacian(theta_F')`, where `F'` raises the constant of the
/// form active at `source` by one. Vertices within distance 2 of the guard
/// band are skipped.
pub fn verify_wave_coefficient_shift(
    f: &PLMinFunction,
    domain: &Arc<Lattice>,
    source: (i64, i64),
) -> Result<WaveShiftReport> {
    let v = domain
        .vertex_at(source.0, source.1)
        .filter(|&v| domain.is_interior(v))
        .ok_or_else(|| Error::Precondition(format!("source {source:?} is not interior")))?;
    let active = f.active_forms(source.0, source.1);
    let [form] = active[..] else {
        return Err(Error::Precondition(format!("source {source:?} lies on the corner locus")));
    };
    let mut cache = ProfileCache::default();
    let opts = SmoothingOptions::default();
    let theta = theta_on(f, domain, &mut cache, &opts)?.final_field;
    let theta2 = theta_on(&f.with_constant_offset(form, 1)?, domain, &mut cache, &opts)?.final_field;
    let phi = state_from_theta(&theta);
    let target = state_from_theta(&theta2);
    let waved = wave(&phi, v)?.result;
    let region: Vec<VertexId> = domain
        .interior_vertices()
        .filter(|&u| !domain.near_guard(u) && domain.neighbors(u).iter().all(|&w| !domain.near_guard(w)))
        .collect();
    let mismatches: Vec<VertexId> = region.iter().copied().filter(|&u| waved[u] != target[u]).collect();
    Ok(WaveShiftReport { ok: mismatches.is_empty(), form, compared: region.len(), mismatches })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineShapeVerdict {
    /// Equal to the built soliton translated by `offset`.
    IsSoliton { offset: (i64, i64) },
    NotMovable,
    NotLineShaped,
}

/// Compares a line-shaped state on a cylinder with the soliton of the
/// primitive direction `(p, q) / gcd`, up to translation.
pub fn classify_line_shaped(phi: &SandpileState, dir: (i64, i64)) -> Result<LineShapeVerdict> {
    let d = phi.domain();
    let (c, lo, hi) = long_layout(d)?;
    let g = gcd(dir.0, dir.1);
    if g == 0 {
        return Err(Error::Precondition("direction must be nonzero".into()));
    }
    let spec = SolitonSpec::new(dir.0 / g, dir.1 / g)?;
    let (a, b) = c.period;
    let (n1, n2) = spec.normal();
    if n1 * a + n2 * b != 0 {
        return Err(Error::Precondition("cylinder period is not a multiple of the direction".into()));
    }
    let support: Vec<VertexId> = d.interior_vertices().filter(|&v| phi[v] != 3).collect();
    if support.is_empty() || support.iter().any(|&v| d.near_guard(v)) {
        return Ok(LineShapeVerdict::NotLineShaped);
    }
    let f = spec.edge_function()?;
    let theta = canonical_smoothing(&f, d, &SmoothingOptions { strict: false, ..Default::default() })?;
    let reference = state_from_theta(&theta.final_field);
    if reference.domain().interior_vertices().any(|v| reference[v] != 3 && d.near_guard(v)) {
        return Err(Error::WindowTooSmall { vertex: 0 });
    }
    let region: Vec<VertexId> = d.interior_vertices().collect();
    // phi(x) = reference(x - offset)
    let shift = detect_shift_full(phi, &reference, &region, hi - lo);
    Ok(match shift {
        Some(s) => LineShapeVerdict::IsSoliton { offset: minimal_representative((-s.0, -s.1), c.period) },
        None => LineShapeVerdict::NotMovable,
    })
}

/// Like `detect_shift` but every vertex of `region` with an image outside
/// the interior must hold 3.
fn detect_shift_full(
    after: &IntegerField,
    before: &IntegerField,
    region: &[VertexId],
    reach: i64,
) -> Option<(i64, i64)> {
    let d = after.domain();
    let c = d.cylinder_params()?;
    let mut found = Vec::new();
    for a in 0..c.width() {
        for b in -reach..=reach {
            let s = match c.axis {
                StripAxis::X => (a, b),
                StripAxis::Y => (b, a),
            };
            let ok = region.iter().all(|&u| {
                let (x, y) = d.coord(u).unwrap();
                match d.vertex_at(x + s.0, y + s.1) {
                    Some(w) if d.is_interior(w) => after[u] == before[w],
                    _ => after[u] == 3,
                }
            });
            if ok {
                found.push(minimal_representative(s, c.period));
            }
        }
    }
    found.sort_by_key(|&(x, y)| (x.abs() + y.abs(), x < 0, y < 0, x, y));
    found.first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_shift_solves_bezout() {
        for (p, q) in [(1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (3, 4), (-2, 5)] {
            let (pp, qq) = SolitonSpec::new(p, q).unwrap().expected_shift();
            assert_eq!(pp * q - p * qq, 1, "({p},{q})");
        }
        assert_eq!(SolitonSpec::new(1, 3).unwrap().expected_shift(), (0, -1));
        assert_eq!(SolitonSpec::new(1, 0).unwrap().expected_shift(), (0, -1));
    }

    #[test]
    fn horizontal_soliton_is_a_row_of_twos() {
        let ps = build_soliton(&SolitonSpec::new(1, 0).unwrap().with_half_height(10)).unwrap();
        let d = ps.state.domain();
        for v in d.interior_vertices() {
            let (_, y) = d.coord(v).unwrap();
            assert_eq!(ps.state[v], if y == 0 { 2 } else { 3 });
        }
    }

    #[test]
    fn soliton_states_are_in_range() {
        for (p, q) in [(1, 2), (1, 3), (2, 3)] {
            let ps = build_soliton(&SolitonSpec::new(p, q).unwrap()).unwrap();
            assert!(ps.state.values().iter().all(|&s| (0..=3).contains(&s)));
        }
    }

    #[test]
    fn mass_examples() {
        assert_eq!(laplacian_mass_check(&SolitonSpec::new(1, 0).unwrap()).unwrap(), 1);
        assert_eq!(laplacian_mass_check(&SolitonSpec::new(1, 2).unwrap()).unwrap(), 5);
        assert_eq!(laplacian_mass_check(&SolitonSpec::new(1, 3).unwrap()).unwrap(), 10);
    }

    #[test]
    fn movable_small_cases() {
        for (p, q) in [(1, 0), (1, 3)] {
            let ps = build_soliton(&SolitonSpec::new(p, q).unwrap()).unwrap();
            let r = verify_movable(&ps, 1).unwrap();
            assert!(r.ok, "({p},{q}) {r:?}");
        }
    }

    #[test]
    fn background_has_no_shift() {
        let ps = build_soliton(&SolitonSpec::new(1, 3).unwrap()).unwrap();
        let flat = PatternState { state: ps.state.map(|_, _| 3), ..ps };
        let r = verify_movable(&flat, 1).unwrap();
        assert!(r.background && !r.ok);
        assert_eq!(r.shift, (0, 0));
    }

    #[test]
    fn trivial_triad_needs_no_smoothing() {
        let dirs = DirectionPair::new((1, 0), (0, 1), 0, 0).unwrap();
        let ps = build_triad(&dirs, 10).unwrap();
        let f = PLMinFunction::psi_vertex(&dirs).unwrap();
        assert_eq!(ps.theta, f.eval(ps.theta.domain()).unwrap());
        assert_eq!(ps.steps, 1);
    }

    #[test]
    fn classify_recovers_translation() {
        let ps = build_soliton(&SolitonSpec::new(1, 3).unwrap()).unwrap();
        let d = ps.state.domain().clone();
        let shifted = IntegerField::from_coords(d.clone(), |x, y| {
            match d.vertex_at(x - 2, y - 1) {
                Some(w) if d.is_interior(w) => ps.state[w],
                _ => 3,
            }
        })
        .unwrap()
        .map(|v, s| if d.is_interior(v) { s } else { 3 });
        assert_eq!(
            classify_line_shaped(&shifted, (1, 3)).unwrap(),
            LineShapeVerdict::IsSoliton { offset: (2, 1) }
        );
        let flat = ps.state.map(|_, _| 3);
        assert_eq!(classify_line_shaped(&flat, (1, 3)).unwrap(), LineShapeVerdict::NotLineShaped);
    }
}
