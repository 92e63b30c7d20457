//! Abelian sandpiles on any domain: topplings, relaxations with odometers,
//! waves, territories, and the identities relating them.
//!
//! Guard-band vertices are sinks: they collect grains and never topple. A
//! relaxation therefore always terminates on a finite domain.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{connected_components, IntegerField, VertexId};

/// Grain counts per vertex. Intermediate states may go negative.
pub type SandpileState = IntegerField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    /// Worklist in discovery order; a popped vertex fires all its legal
    /// topplings at once.
    #[default]
    Fifo,
    /// One toppling at a uniformly random unstable vertex per step.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelaxOptions {
    pub scheduler: Scheduler,
    /// Toppling budget; `None` means `64 * |V| * max threshold`.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxationOutcome {
    pub final_state: SandpileState,
    pub odometer: IntegerField,
    pub topplings: u64,
    pub exhausted: bool,
    pub scheduler: Scheduler,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveRecord {
    pub wave_odometer: IntegerField,
    pub result: SandpileState,
    pub source: VertexId,
}

pub fn first_unstable(phi: &SandpileState) -> Option<VertexId> {
    let d = phi.domain();
    d.interior_vertices().find(|&v| phi[v] >= d.threshold(v))
}

pub fn is_stable(phi: &SandpileState) -> bool {
    first_unstable(phi).is_none()
}

/// `phi + Laplacian(delta_v)`, legal or not.
pub fn topple(phi: &SandpileState, v: VertexId) -> Result<SandpileState> {
    let d = phi.domain();
    if v >= d.len() || !d.is_interior(v) {
        return Err(Error::BoundaryVertex(v));
    }
    let mut out = phi.clone();
    fire(&mut out, v, 1);
    Ok(out)
}

fn fire(phi: &mut IntegerField, v: VertexId, k: i64) {
    let d = phi.domain().clone();
    phi[v] -= k * d.threshold(v);
    for &u in d.neighbors(v) {
        phi[u] += k;
    }
}

/// `phi + Laplacian(h)` with the graph formula at every vertex.
pub fn apply_toppling_function(phi: &SandpileState, h: &IntegerField) -> Result<SandpileState> {
    if !phi.same_domain(h) {
        return Err(Error::DomainMismatch);
    }
    let d = phi.domain();
    Ok(phi.map(|v, x| {
        let s: i64 = d.neighbors(v).iter().map(|&u| h[u]).sum();
        x + s - d.threshold(v) * h[v]
    }))
}

fn default_budget(phi: &SandpileState) -> u64 {
    let d = phi.domain();
    64 * d.len() as u64 * d.max_threshold().max(1) as u64
}

/// Legal topplings until stable or out of budget.
pub fn relax(phi: &SandpileState, opts: &RelaxOptions) -> RelaxationOutcome {
    let budget = opts.budget.unwrap_or_else(|| default_budget(phi));
    let d = phi.domain().clone();
    let mut state = phi.clone();
    let mut odometer = IntegerField::constant(d.clone(), 0);
    let mut topplings = 0u64;
    let unstable = |s: &IntegerField, v: VertexId| d.is_interior(v) && s[v] >= d.threshold(v);
    let mut queued = vec![false; d.len()];
    let mut exhausted = false;
    match opts.scheduler {
        Scheduler::Fifo => {
            let mut queue = VecDeque::new();
            for v in d.interior_vertices().filter(|&v| unstable(&state, v)) {
                queued[v] = true;
                queue.push_back(v);
            }
            while let Some(v) = queue.pop_front() {
                queued[v] = false;
                if !unstable(&state, v) {
                    continue;
                }
                let k = (state[v] / d.threshold(v)).min((budget - topplings) as i64);
                if k == 0 {
                    exhausted = true;
                    break;
                }
                fire(&mut state, v, k);
                odometer[v] += k;
                topplings += k as u64;
                for &u in d.neighbors(v).iter().chain(std::iter::once(&v)) {
                    if !queued[u] && unstable(&state, u) {
                        queued[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        Scheduler::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pending: Vec<VertexId> = d.interior_vertices().filter(|&v| unstable(&state, v)).collect();
            for &v in &pending {
                queued[v] = true;
            }
            while !pending.is_empty() {
                let i = rng.gen_range(0..pending.len());
                let v = pending[i];
                if !unstable(&state, v) {
                    queued[v] = false;
                    pending.swap_remove(i);
                    continue;
                }
                if topplings == budget {
                    exhausted = true;
                    break;
                }
                fire(&mut state, v, 1);
                odometer[v] += 1;
                topplings += 1;
                for &u in d.neighbors(v) {
                    if !queued[u] && unstable(&state, u) {
                        queued[u] = true;
                        pending.push(u);
                    }
                }
            }
        }
    }
    RelaxationOutcome { final_state: state, odometer, topplings, exhausted, scheduler: opts.scheduler }
}

/// Whether `cert >= 0` and `phi + Laplacian(cert)` is stable on the
/// interior, which certifies that `phi` is relaxable.
pub fn check_relaxability_certificate(phi: &SandpileState, cert: &IntegerField) -> Result<bool> {
    if cert.values().iter().any(|&x| x < 0) {
        return Ok(false);
    }
    Ok(is_stable(&apply_toppling_function(phi, cert)?))
}

/// The odometer of `relax(phi)` is at most `cand` pointwise.
pub fn least_action_check(phi: &SandpileState, cand: &IntegerField) -> Result<bool> {
    if cand.values().iter().any(|&x| x < 0) {
        return Err(Error::Precondition("candidate must be nonnegative".into()));
    }
    if !is_stable(&apply_toppling_function(phi, cand)?) {
        return Err(Error::Precondition("phi + Laplacian(candidate) is not stable".into()));
    }
    let out = relax(phi, &RelaxOptions::default());
    if out.exhausted {
        return Err(Error::BudgetExhausted(out.topplings));
    }
    out.odometer.le(cand)
}

/// Wave from any vertex of a stable state: topple `v` once, then relax.
pub fn wave(phi: &SandpileState, v: VertexId) -> Result<WaveRecord> {
    if let Some(u) = first_unstable(phi) {
        return Err(Error::NotStable(u));
    }
    let toppled = topple(phi, v)?;
    let out = relax(&toppled, &RelaxOptions::default());
    if out.exhausted {
        return Err(Error::BudgetExhausted(out.topplings));
    }
    let mut wave_odometer = out.odometer;
    wave_odometer[v] += 1;
    Ok(WaveRecord { wave_odometer, result: out.final_state, source: v })
}

/// Wave from a vertex holding `tau - 1` grains.
pub fn send_wave(phi: &SandpileState, v: VertexId) -> Result<WaveRecord> {
    if let Some(u) = first_unstable(phi) {
        return Err(Error::NotStable(u));
    }
    let d = phi.domain();
    if v >= d.len() || !d.is_interior(v) {
        return Err(Error::BoundaryVertex(v));
    }
    if phi[v] != d.threshold(v) - 1 {
        return Err(Error::SourceNotAtThreshold(v));
    }
    wave(phi, v)
}

/// `n` successive waves from `v`: final state and summed wave odometer.
pub fn send_waves(phi: &SandpileState, v: VertexId, n: usize) -> Result<(SandpileState, IntegerField)> {
    let mut state = phi.clone();
    let mut total = IntegerField::constant(phi.domain().clone(), 0);
    for _ in 0..n {
        let w = wave(&state, v)?;
        total = total.add(&w.wave_odometer)?;
        state = w.result;
    }
    Ok((state, total))
}

/// Connected components of `{v interior : phi(v) = tau(v) - 1}`.
pub fn territories(phi: &SandpileState) -> Result<Vec<Vec<VertexId>>> {
    if let Some(u) = first_unstable(phi) {
        return Err(Error::NotStable(u));
    }
    let d = phi.domain();
    Ok(connected_components(d, |v| d.is_interior(v) && phi[v] == d.threshold(v) - 1))
}

/// Waves from the two ends of a path through `tau - 1` vertices agree.
pub fn wave_source_independence_check(phi: &SandpileState, path: &[VertexId]) -> Result<bool> {
    let d = phi.domain();
    let (Some(&first), Some(&last)) = (path.first(), path.last()) else {
        return Err(Error::Precondition("empty path".into()));
    };
    for w in path.windows(2) {
        if !d.neighbors(w[0]).contains(&w[1]) {
            return Err(Error::Precondition(format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    for &v in path {
        if !d.is_interior(v) || phi[v] != d.threshold(v) - 1 {
            return Err(Error::SourceNotAtThreshold(v));
        }
    }
    Ok(send_wave(phi, first)?.wave_odometer == send_wave(phi, last)?.wave_odometer)
}

/// Relaxing `phi + delta_v` equals `delta_v + W_v^n phi` with
/// `n = H(v)`, and the odometer is the sum of the `n` wave odometers.
pub fn wave_decomposition_check(phi: &SandpileState, v: VertexId) -> Result<(i64, bool)> {
    if let Some(u) = first_unstable(phi) {
        return Err(Error::NotStable(u));
    }
    let d = phi.domain();
    if v >= d.len() || !d.is_interior(v) {
        return Err(Error::BoundaryVertex(v));
    }
    let mut bumped = phi.clone();
    bumped[v] += 1;
    let out = relax(&bumped, &RelaxOptions::default());
    if out.exhausted {
        return Err(Error::BudgetExhausted(out.topplings));
    }
    let n = out.odometer[v];
    let (mut waved, total) = send_waves(phi, v, n as usize)?;
    waved[v] += 1;
    Ok((n, waved == out.final_state && total == out.odometer))
}

/// The summed odometer of `n` waves from `v` is at most `cand`.
pub fn wave_least_action_check(
    phi: &SandpileState,
    v: VertexId,
    n: usize,
    cand: &IntegerField,
) -> Result<bool> {
    if cand.values().iter().any(|&x| x < 0) || cand[v] < n as i64 {
        return Err(Error::Precondition("candidate must be nonnegative and at least n at v".into()));
    }
    if apply_toppling_function(phi, cand)?.values().iter().any(|&x| x < 0) {
        return Err(Error::Precondition("phi + Laplacian(candidate) has negative values".into()));
    }
    let (_, total) = send_waves(phi, v, n)?;
    total.le(cand)
}
