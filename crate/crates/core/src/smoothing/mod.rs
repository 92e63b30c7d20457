//! The 1-smoothing `S_1`, its iterates `S_n`, and the canonical smoothing
//! `theta_F` reached when an iterate stops changing.
//!
//! `S_1(g) = g - chi_A` where `A` is the largest set of interior vertices
//! for which `g - chi_A` stays superharmonic. Admissible sets are closed
//! under union, so `A` is found by starting from every interior vertex and
//! deleting violators until none remain; the result does not depend on the
//! deletion order.

mod profile;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{IntegerField, Lattice, VertexId};
use crate::plmin::PLMinFunction;

pub use profile::{psi_prime, EdgeProfile, ProfileCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeletionOrder {
    /// FIFO worklist seeded in vertex-id order.
    #[default]
    RowMajor,
    /// Violators picked uniformly at random from the pending set.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingOptions {
    /// Fail with `WindowTooSmall` instead of only recording the violation.
    pub strict: bool,
    /// Cap on 1-smoothing steps; `None` picks a default from the input.
    pub max_iters: Option<usize>,
    pub order: DeletionOrder,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        SmoothingOptions { strict: true, max_iters: None, order: DeletionOrder::RowMajor }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothingResult {
    pub final_field: IntegerField,
    pub steps: usize,
    /// Vertices lowered by each step, in vertex-id order.
    pub change_sets: Vec<Vec<VertexId>>,
    pub stabilized: bool,
    /// First changed vertex found next to the guard band.
    pub guard_violation: Option<VertexId>,
}

/// One 1-smoothing step: returns `g - chi_A` and `A` (sorted).
pub fn smooth_once(g: &IntegerField, order: DeletionOrder) -> Result<(IntegerField, Vec<VertexId>)> {
    if let Some(v) = g.first_subharmonic_vertex() {
        return Err(Error::NotSuperharmonicInput(v));
    }
    let a = maximal_lowerable_set(g, order);
    let mut out = g.clone();
    for &v in &a {
        out[v] -= 1;
    }
    Ok((out, a))
}

fn maximal_lowerable_set(g: &IntegerField, order: DeletionOrder) -> Vec<VertexId> {
    let domain = g.domain();
    let n = domain.len();
    let mut in_a = vec![false; n];
    let mut excess = vec![0i64; n];
    for v in domain.interior_vertices() {
        in_a[v] = true;
    }
    for v in domain.interior_vertices() {
        let inside = domain.neighbors(v).iter().filter(|&&u| in_a[u]).count() as i64;
        excess[v] = g.laplacian_unchecked(v) + domain.threshold(v) - inside;
    }
    let initial: Vec<VertexId> = domain.interior_vertices().filter(|&v| excess[v] > 0).collect();
    let delete = |v: VertexId, in_a: &mut Vec<bool>, excess: &mut Vec<i64>, push: &mut dyn FnMut(VertexId)| {
        in_a[v] = false;
        for &u in domain.neighbors(v) {
            if in_a[u] {
                excess[u] += 1;
                if excess[u] == 1 {
                    push(u);
                }
            }
        }
    };
    match order {
        DeletionOrder::RowMajor => {
            let mut queue: VecDeque<VertexId> = initial.into();
            while let Some(v) = queue.pop_front() {
                if in_a[v] && excess[v] > 0 {
                    delete(v, &mut in_a, &mut excess, &mut |u| queue.push_back(u));
                }
            }
        }
        DeletionOrder::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pending = initial;
            while !pending.is_empty() {
                let v = pending.swap_remove(rng.gen_range(0..pending.len()));
                if in_a[v] && excess[v] > 0 {
                    let mut fresh = Vec::new();
                    delete(v, &mut in_a, &mut excess, &mut |u| fresh.push(u));
                    pending.extend(fresh);
                }
            }
        }
    }
    domain.interior_vertices().filter(|&v| in_a[v]).collect()
}

fn default_cap(domain: &Lattice, f: Option<&PLMinFunction>) -> usize {
    let height = match domain.kind() {
        crate::lattice::LatticeKind::Box(b) => b.y1 - b.y0 + 1,
        crate::lattice::LatticeKind::Cylinder(c) => c.hi - c.lo + 1,
        crate::lattice::LatticeKind::Graph => domain.len() as i64,
    };
    let mass = f
        .and_then(|f| {
            let forms = f.forms();
            let pairs = f.adjacent_pairs().ok()?;
            pairs
                .iter()
                .map(|&(i, j)| {
                    let d = forms[i].sub(&forms[j]);
                    d.p * d.p + d.q * d.q
                })
                .max()
        })
        .unwrap_or(1)
        .max(1);
    (10 * mass * height).max(16) as usize
}

fn iterate(
    start: IntegerField,
    limit: usize,
    until_fixed: bool,
    opts: &SmoothingOptions,
) -> Result<SmoothingResult> {
    let domain = start.domain().clone();
    let mut current = start;
    let mut change_sets = Vec::new();
    let mut guard_violation = None;
    let mut stabilized = false;
    for step in 0..limit {
        let order = match opts.order {
            DeletionOrder::RowMajor => DeletionOrder::RowMajor,
            DeletionOrder::Random(seed) => DeletionOrder::Random(seed.wrapping_add(step as u64)),
        };
        let (next, changed) = smooth_once(&current, order)?;
        if changed.is_empty() {
            change_sets.push(changed);
            stabilized = true;
            break;
        }
        if let Some(&v) = changed.iter().find(|&&v| domain.near_guard(v)) {
            if opts.strict {
                return Err(Error::WindowTooSmall { vertex: v });
            }
            guard_violation.get_or_insert(v);
        }
        change_sets.push(changed);
        current = next;
    }
    if until_fixed && !stabilized && opts.strict {
        return Err(Error::IterationCapExceeded {
            iterations: change_sets.len(),
            last_change_set: change_sets.pop().unwrap_or_default(),
        });
    }
    Ok(SmoothingResult {
        final_field: current,
        steps: change_sets.len(),
        change_sets,
        stabilized,
        guard_violation,
    })
}

/// `S_n(g)`; stops early once a step changes nothing.
pub fn smooth_field_n(g: &IntegerField, n: usize, opts: &SmoothingOptions) -> Result<SmoothingResult> {
    iterate(g.clone(), n, false, opts)
}

pub fn smooth_n(
    f: &PLMinFunction,
    domain: &Arc<Lattice>,
    n: usize,
    opts: &SmoothingOptions,
) -> Result<SmoothingResult> {
    smooth_field_n(&f.eval(domain)?, n, opts)
}

/// Iterates `S_1` from `g` until a step changes nothing.
pub fn canonical_smoothing_field(g: &IntegerField, opts: &SmoothingOptions) -> Result<SmoothingResult> {
    let cap = opts.max_iters.unwrap_or_else(|| default_cap(g.domain(), None));
    iterate(g.clone(), cap, true, opts)
}

/// `theta_F` on the window. The default step cap is
/// `10 * max|grad difference|^2 * window height`.
pub fn canonical_smoothing(
    f: &PLMinFunction,
    domain: &Arc<Lattice>,
    opts: &SmoothingOptions,
) -> Result<SmoothingResult> {
    let cap = opts.max_iters.unwrap_or_else(|| default_cap(domain, Some(f)));
    iterate(f.eval(domain)?, cap, true, &SmoothingOptions { max_iters: Some(cap), ..*opts })
}

/// Runs `run` on windows of scale 1, 2, 4, ... and returns the first
/// result that does not hit the guard band, together with its scale.
pub fn grow_and_retry<T, F>(retries: u32, mut run: F) -> Result<(T, i64)>
where
    F: FnMut(i64) -> Result<T>,
{
    let mut scale = 1;
    let mut attempt = 0;
    loop {
        match run(scale) {
            Err(Error::WindowTooSmall { .. }) if attempt < retries => {
                attempt += 1;
                scale *= 2;
            }
            other => return other.map(|t| (t, scale)),
        }
    }
}
