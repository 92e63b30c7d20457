#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sandsmooth::{AffineForm, IntegerField, Lattice, PLMinFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plmin(rng: &mut ChaCha8Rng, forms: usize, coef: i64) -> PLMinFunction {
    let mut list: Vec<AffineForm> = Vec::new();
    while list.len() < forms {
        let a = AffineForm::new(rng.gen_range(-coef..=coef), rng.gen_range(-coef..=coef), rng.gen_range(-4..=4));
        if !list.contains(&a) {
            list.push(a);
        }
    }
    PLMinFunction::new(list).unwrap()
}

/// Least superharmonic function above `f - n` on the interior that agrees
/// with `f` on the guard band. Plain fixed-point iteration of
/// `G(v) = max(G(v), ceil(sum of neighbors / tau))`.
pub fn majorant_smoothing(f: &IntegerField, n: i64) -> IntegerField {
    let d = f.domain().clone();
    let mut g = f.map(|v, x| if d.is_interior(v) { x - n } else { x });
    loop {
        let mut changed = false;
        for v in d.interior_vertices() {
            let s: i64 = d.neighbors(v).iter().map(|&u| g[u]).sum();
            let need = s.div_euclid(d.threshold(v)) + i64::from(s.rem_euclid(d.threshold(v)) != 0);
            if g[v] < need {
                g[v] = need;
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}

/// A superharmonic field: a random PL min function, optionally pushed
/// down by a random amount of smoothing.
pub fn random_superharmonic(rng: &mut ChaCha8Rng, domain: &Arc<Lattice>) -> IntegerField {
    let k = rng.gen_range(1..=4);
    let f = random_plmin(rng, k, 3).eval(domain).unwrap();
    match rng.gen_range(0..3) {
        0 => f,
        n => majorant_smoothing(&f, n),
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, domain: &Arc<Lattice>, max: i64) -> IntegerField {
    IntegerField::from_fn(domain.clone(), |_| rng.gen_range(0..=max))
}

pub fn random_stable(rng: &mut ChaCha8Rng, domain: &Arc<Lattice>) -> IntegerField {
    IntegerField::from_fn(domain.clone(), |v| if domain.is_interior(v) { rng.gen_range(0..=3) } else { 3 })
}
