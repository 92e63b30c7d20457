//! Slow, independent reference implementations for small instances.

use crate::error::{Error, Result};
use crate::lattice::{IntegerField, VertexId};
use crate::sandpile::{RelaxationOutcome, SandpileState, Scheduler};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest candidate set that subset search will accept.
    pub max_vertices: usize,
    /// Search nodes (subset search) or topplings (relaxation).
    pub max_steps: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_vertices: 40, max_steps: 50_000_000 }
    }
}

fn check_candidates(g: &IntegerField, candidates: &[VertexId], budget: &OracleBudget) -> Result<()> {
    if candidates.len() > budget.max_vertices {
        return Err(Error::TooLarge(format!(
            "{} candidates exceed the limit of {}",
            candidates.len(),
            budget.max_vertices
        )));
    }
    let d = g.domain();
    for (i, &v) in candidates.iter().enumerate() {
        if v >= d.len() || !d.is_interior(v) {
            return Err(Error::BoundaryVertex(v));
        }
        if candidates[..i].contains(&v) {
            return Err(Error::Precondition(format!("candidate {v} repeated")));
        }
    }
    if let Some(v) = g.first_subharmonic_vertex() {
        return Err(Error::NotSuperharmonicInput(v));
    }
    Ok(())
}

/// Lowers every marked vertex by one.
fn lower(g: &IntegerField, members: &[bool]) -> IntegerField {
    g.map(|v, x| if members[v] { x - 1 } else { x })
}

/// Pointwise minimum over all `g - chi_A` (`A` a subset of `candidates`)
/// that are superharmonic on the interior.
///
/// Depth-first search over include/exclude decisions, including first. A
/// branch is cut when an included vertex cannot become admissible even if
/// every undecided neighbor is included, or when it cannot add anything to
/// the union of admissible sets already found.
pub fn brute_min_superharmonic_step(
    g: &IntegerField,
    candidates: &[VertexId],
    budget: &OracleBudget,
) -> Result<IntegerField> {
    check_candidates(g, candidates, budget)?;
    let d = g.domain();
    let n = d.len();
    let m = candidates.len();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in candidates.iter().enumerate() {
        index[v] = i;
    }
    // need[i]: how many neighbors inside A candidate i requires
    let need: Vec<i64> = candidates
        .iter()
        .map(|&v| g.laplacian_unchecked(v) + d.threshold(v))
        .collect();
    let nbrs: Vec<Vec<usize>> = candidates
        .iter()
        .map(|&v| d.neighbors(v).iter().filter(|&&u| index[u] != usize::MAX).map(|&u| index[u]).collect())
        .collect();

    struct Search<'a> {
        m: usize,
        need: &'a [i64],
        nbrs: &'a [Vec<usize>],
        // 0 undecided, 1 included, 2 excluded
        state: Vec<u8>,
        union: Vec<bool>,
        steps: u64,
        max_steps: u64,
    }

    impl Search<'_> {
        fn viable(&self, i: usize) -> bool {
            let possible = self.nbrs[i].iter().filter(|&&j| self.state[j] != 2).count() as i64;
            possible >= self.need[i]
        }

        fn run(&mut self, k: usize) -> Result<()> {
            self.steps += 1;
            if self.steps > self.max_steps {
                return Err(Error::TooLarge(format!("search exceeded {} nodes", self.max_steps)));
            }
            if (0..self.m).all(|i| self.state[i] == 2 || self.union[i]) {
                return Ok(());
            }
            if k == self.m {
                for i in 0..self.m {
                    if self.state[i] == 1 {
                        self.union[i] = true;
                    }
                }
                return Ok(());
            }
            self.state[k] = 1;
            if self.viable(k) {
                self.run(k + 1)?;
            }
            self.state[k] = 2;
            let ok = self.nbrs[k].iter().all(|&j| self.state[j] != 1 || self.viable(j));
            if ok {
                self.run(k + 1)?;
            }
            self.state[k] = 0;
            Ok(())
        }
    }

    let mut search = Search {
        m,
        need: &need,
        nbrs: &nbrs,
        state: vec![0; m],
        union: vec![false; m],
        steps: 0,
        max_steps: budget.max_steps,
    };
    search.run(0)?;
    let mut members = vec![false; n];
    for (i, &v) in candidates.iter().enumerate() {
        members[v] = search.union[i];
    }
    Ok(lower(g, &members))
}

/// The same minimum by plain enumeration of all `2^m` subsets in Gray-code
/// order. Only for `m <= 24`.
pub fn brute_min_superharmonic_gray(g: &IntegerField, candidates: &[VertexId]) -> Result<IntegerField> {
    let budget = OracleBudget { max_vertices: 24, ..Default::default() };
    check_candidates(g, candidates, &budget)?;
    let d = g.domain();
    let m = candidates.len();
    let mut current = g.clone();
    let mut members = vec![false; d.len()];
    let mut union = vec![false; d.len()];
    let feasible = |f: &IntegerField| f.is_superharmonic_on_interior();
    for step in 1u64..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        let v = candidates[bit];
        members[v] = !members[v];
        current[v] += if members[v] { -1 } else { 1 };
        if feasible(&current) {
            for &u in candidates {
                if members[u] {
                    union[u] = true;
                }
            }
        }
    }
    Ok(lower(g, &union))
}

fn lex_key(phi: &SandpileState, v: VertexId) -> (i64, i64, VertexId) {
    match phi.domain().coord(v) {
        Some((x, y)) => (x, y, v),
        None => (0, 0, v),
    }
}

/// Relaxation that always topples the lexicographically least unstable
/// vertex (by coordinates, or by id on graphs).
pub fn brute_relax(phi: &SandpileState, budget: &OracleBudget) -> Result<RelaxationOutcome> {
    let d = phi.domain().clone();
    let mut order: Vec<VertexId> = d.interior_vertices().collect();
    order.sort_by_key(|&v| lex_key(phi, v));
    let mut state = phi.clone();
    let mut odometer = IntegerField::constant(d.clone(), 0);
    let mut topplings = 0u64;
    while let Some(&v) = order.iter().find(|&&v| state[v] >= d.threshold(v)) {
        if topplings == budget.max_steps {
            return Ok(RelaxationOutcome {
                final_state: state,
                odometer,
                topplings,
                exhausted: true,
                scheduler: Scheduler::Fifo,
            });
        }
        state[v] -= d.threshold(v);
        for &u in d.neighbors(v) {
            state[u] += 1;
        }
        odometer[v] += 1;
        topplings += 1;
    }
    Ok(RelaxationOutcome { final_state: state, odometer, topplings, exhausted: false, scheduler: Scheduler::Fifo })
}

/// Slices `H_k = chi(H >= k)` of `H = F - G`: every partial difference
/// `F - H_m - ... - H_{m-k+1}` is superharmonic, the slices add up to `H`,
/// and their supports are nested.
pub fn slicing_decomposition_check(f: &IntegerField, g: &IntegerField) -> Result<bool> {
    if let Some(v) = f.first_subharmonic_vertex().or_else(|| g.first_subharmonic_vertex()) {
        return Err(Error::NotSuperharmonicInput(v));
    }
    let h = f.sub(g)?;
    if h.values().iter().any(|&x| x < 0) {
        return Err(Error::Precondition("G must not exceed F".into()));
    }
    let m = h.values().iter().copied().max().unwrap_or(0);
    let slices: Vec<IntegerField> = (1..=m).map(|k| h.map(|_, x| i64::from(x >= k))).collect();
    let mut partial = f.clone();
    for k in (0..m as usize).rev() {
        partial = partial.sub(&slices[k])?;
        if !partial.is_superharmonic_on_interior() {
            return Ok(false);
        }
    }
    let mut sum = IntegerField::constant(f.domain().clone(), 0);
    for s in &slices {
        sum = sum.add(s)?;
    }
    let nested = slices.windows(2).all(|w| w[1].le(&w[0]).unwrap_or(false));
    Ok(sum == h && partial == *g && nested)
}
