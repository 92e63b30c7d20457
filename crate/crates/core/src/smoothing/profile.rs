use std::collections::HashMap;
use std::sync::Arc;

use super::{canonical_smoothing, grow_and_retry, SmoothingOptions};
use crate::error::{Error, Result};
use crate::lattice::{CylinderParams, IntegerField, Lattice};
use crate::plmin::{reduce_edge, PLMinFunction};

/// `theta` of `min(0, P x + Q y)` on Z^2, stored as one period of a
/// cylinder and extended by the unsmoothed function outside it.
#[derive(Debug, Clone)]
pub struct EdgeProfile {
    normal: (i64, i64),
    theta: IntegerField,
    steps: usize,
}

impl EdgeProfile {
    /// Cylinder of long half-height `half` whose period is the smallest
    /// simple multiple of `(Q, -P)`.
    pub fn cylinder_for(p: i64, q: i64, half: i64) -> Result<Arc<Lattice>> {
        let k = CylinderParams::minimal_multiple((q, -p));
        let period = (k * q, -k * p);
        let skew = period.0.abs().min(period.1.abs()).max(1);
        Lattice::cylinder(period, -half, half, skew)
    }

    pub fn default_half_height(p: i64, q: i64) -> i64 {
        4 * (p.abs() + q.abs()) + 8
    }

    pub fn build(p: i64, q: i64, opts: &SmoothingOptions) -> Result<Self> {
        let f = PLMinFunction::psi_edge(p, q)?;
        let strict = SmoothingOptions { strict: true, ..*opts };
        let (result, _) = grow_and_retry(4, |scale| {
            let domain = Self::cylinder_for(p, q, Self::default_half_height(p, q) * scale)?;
            canonical_smoothing(&f, &domain, &strict)
        })?;
        Ok(EdgeProfile { normal: (p, q), theta: result.final_field, steps: result.steps })
    }

    pub fn normal(&self) -> (i64, i64) {
        self.normal
    }

    pub fn theta(&self) -> &IntegerField {
        &self.theta
    }

    /// Number of 1-smoothing steps, including the final no-op step.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn value(&self, x: i64, y: i64) -> i64 {
        match self.theta.domain().vertex_at(x, y) {
            Some(v) => self.theta[v],
            None => 0.min(self.normal.0 * x + self.normal.1 * y),
        }
    }
}

/// Edge profiles keyed by normal, built on first use.
#[derive(Debug, Default)]
pub struct ProfileCache {
    opts: SmoothingOptions,
    profiles: HashMap<(i64, i64), Arc<EdgeProfile>>,
}

impl ProfileCache {
    pub fn new(opts: SmoothingOptions) -> Self {
        ProfileCache { opts, profiles: HashMap::new() }
    }

    pub fn get(&mut self, p: i64, q: i64) -> Result<Arc<EdgeProfile>> {
        if let Some(profile) = self.profiles.get(&(p, q)) {
            return Ok(profile.clone());
        }
        let profile = Arc::new(EdgeProfile::build(p, q, &self.opts)?);
        self.profiles.insert((p, q), profile.clone());
        Ok(profile)
    }
}

/// Minimum over adjacent form pairs `(i, j)` of the canonical smoothing of
/// `min(l_i, l_j)`. Each term is an edge profile composed with the
/// translation from [`reduce_edge`] plus `l_j`.
pub fn psi_prime(
    f: &PLMinFunction,
    domain: &Arc<Lattice>,
    cache: &mut ProfileCache,
) -> Result<IntegerField> {
    if !domain.has_coordinates() {
        return Err(Error::NoCoordinates);
    }
    let forms = f.forms();
    let pairs = f.adjacent_pairs()?;
    if pairs.is_empty() {
        return f.eval(domain);
    }
    let mut terms = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let r = reduce_edge(forms[i], forms[j])?;
        terms.push((forms[j], r.translation, cache.get(r.normal.0, r.normal.1)?));
    }
    IntegerField::from_coords(domain.clone(), |x, y| {
        terms
            .iter()
            .map(|(base, (tx, ty), profile)| base.at(x, y) + profile.value(x + tx, y + ty))
            .min()
            .unwrap()
    })
}
