//! Minima of finitely many integer affine forms and the predicates used on
//! them: deviation sets, holelessness, and `e`-monotonicity.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{connected_components, IntegerField, Lattice, VertexId};

/// `p*x + q*y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineForm {
    pub p: i64,
    pub q: i64,
    pub c: i64,
}

impl AffineForm {
    pub const fn new(p: i64, q: i64, c: i64) -> Self {
        AffineForm { p, q, c }
    }

    pub fn at(&self, x: i64, y: i64) -> i64 {
        self.p * x + self.q * y + self.c
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        AffineForm::new(self.p - other.p, self.q - other.q, self.c - other.c)
    }

    fn check_periodic(&self, domain: &Lattice) -> Result<()> {
        if let Some(cyl) = domain.cylinder_params() {
            let (a, b) = cyl.period;
            if self.p * a + self.q * b != 0 {
                return Err(Error::NotPeriodic { p: self.p, q: self.q, c: self.c });
            }
        }
        Ok(())
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.p, self.q, self.c)
    }
}

/// `min_i (p_i x + q_i y + c_i)` over a nonempty list of distinct forms.
///
/// Forms are kept in the order given, redundant ones included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLMinFunction {
    forms: Vec<AffineForm>,
}

/// Two unimodular directions with offsets, the data of the standard
/// edge, vertex and node functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionPair {
    pub first: (i64, i64),
    pub second: (i64, i64),
    pub c1: i64,
    pub c2: i64,
}

impl DirectionPair {
    pub fn new(first: (i64, i64), second: (i64, i64), c1: i64, c2: i64) -> Result<Self> {
        for (p, q) in [first, second] {
            if gcd(p, q) != 1 {
                return Err(Error::NotCoprime(p, q));
            }
        }
        let det = first.0 * second.1 - second.0 * first.1;
        if det != 1 {
            return Err(Error::InvalidFunction(format!(
                "directions {first:?}, {second:?} have determinant {det}, expected 1"
            )));
        }
        Ok(DirectionPair { first, second, c1, c2 })
    }
}

impl PLMinFunction {
    pub fn new(forms: Vec<AffineForm>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::InvalidFunction("no forms".into()));
        }
        for (i, f) in forms.iter().enumerate() {
            if forms[..i].contains(f) {
                return Err(Error::InvalidFunction(format!("duplicate form {f}")));
            }
        }
        Ok(PLMinFunction { forms })
    }

    /// `min(0, p x + q y)`.
    pub fn psi_edge(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::NotCoprime(p, q));
        }
        Self::new(vec![AffineForm::new(0, 0, 0), AffineForm::new(p, q, 0)])
    }

    /// `min(0, p1 x + q1 y, p2 x + q2 y + c1)`.
    pub fn psi_vertex(d: &DirectionPair) -> Result<Self> {
        Self::new(vec![
            AffineForm::new(0, 0, 0),
            AffineForm::new(d.first.0, d.first.1, 0),
            AffineForm::new(d.second.0, d.second.1, d.c1),
        ])
    }

    /// `min(0, p1 x + q1 y, p2 x + q2 y + c1, (p1+p2) x + (q1+q2) y + c2)`.
    pub fn psi_node(d: &DirectionPair) -> Result<Self> {
        Self::new(vec![
            AffineForm::new(0, 0, 0),
            AffineForm::new(d.first.0, d.first.1, 0),
            AffineForm::new(d.second.0, d.second.1, d.c1),
            AffineForm::new(d.first.0 + d.second.0, d.first.1 + d.second.1, d.c2),
        ])
    }

    pub fn forms(&self) -> &[AffineForm] {
        &self.forms
    }

    pub fn at(&self, x: i64, y: i64) -> i64 {
        self.forms.iter().map(|f| f.at(x, y)).min().unwrap()
    }

    /// Indices of the forms attaining the minimum at `(x, y)`.
    pub fn active_forms(&self, x: i64, y: i64) -> Vec<usize> {
        let m = self.at(x, y);
        (0..self.forms.len()).filter(|&i| self.forms[i].at(x, y) == m).collect()
    }

    /// Same function with `delta` added to the constant of form `i`.
    pub fn with_constant_offset(&self, i: usize, delta: i64) -> Result<Self> {
        let mut forms = self.forms.clone();
        let f = forms
            .get_mut(i)
            .ok_or_else(|| Error::InvalidFunction(format!("no form with index {i}")))?;
        f.c += delta;
        Self::new(forms)
    }

    /// The pointwise minimum evaluated on every vertex. On cylinders each
    /// form must be invariant under the period.
    pub fn eval(&self, domain: &Arc<Lattice>) -> Result<IntegerField> {
        for f in &self.forms {
            f.check_periodic(domain)?;
        }
        IntegerField::from_coords(domain.clone(), |x, y| self.at(x, y))
    }

    pub fn deviation_set(&self, domain: &Arc<Lattice>) -> Result<Vec<VertexId>> {
        Ok(self.eval(domain)?.deviation_set())
    }

    /// Indices of forms that never attain the minimum on the domain.
    pub fn redundant_forms(&self, domain: &Arc<Lattice>) -> Result<Vec<usize>> {
        if !domain.has_coordinates() {
            return Err(Error::NoCoordinates);
        }
        let mut used = vec![false; self.forms.len()];
        for v in domain.vertices() {
            let (x, y) = domain.coord(v).unwrap();
            for i in self.active_forms(x, y) {
                used[i] = true;
            }
        }
        Ok((0..self.forms.len()).filter(|&i| !used[i]).collect())
    }

    pub fn is_holeless(&self, domain: &Arc<Lattice>, c: i64) -> Result<bool> {
        is_holeless(&self.eval(domain)?, c)
    }

    /// Pairs of forms whose regions share an edge of the tropical curve.
    ///
    /// For four forms the gradients must form a parallelogram; the two
    /// diagonal pairs are excluded.
    pub fn adjacent_pairs(&self) -> Result<Vec<(usize, usize)>> {
        let g: Vec<(i64, i64)> = self.forms.iter().map(|f| (f.p, f.q)).collect();
        match g.len() {
            1 => Ok(vec![]),
            2 => Ok(vec![(0, 1)]),
            3 => Ok(vec![(0, 1), (0, 2), (1, 2)]),
            4 => {
                let pairings = [((0, 3), (1, 2)), ((0, 2), (1, 3)), ((0, 1), (2, 3))];
                let diagonals: Vec<_> = pairings
                    .iter()
                    .filter(|((a, d), (b, c))| {
                        g[*a].0 + g[*d].0 == g[*b].0 + g[*c].0 && g[*a].1 + g[*d].1 == g[*b].1 + g[*c].1
                    })
                    .collect();
                let [&((a, d), (b, c))] = diagonals[..] else {
                    return Err(Error::InvalidFunction(
                        "four gradients do not form a parallelogram".into(),
                    ));
                };
                let mut pairs: Vec<(usize, usize)> = [(a, b), (a, c), (d, b), (d, c)]
                    .into_iter()
                    .map(|(i, j)| (i.min(j), i.max(j)))
                    .collect();
                pairs.sort_unstable();
                Ok(pairs)
            }
            n => Err(Error::InvalidFunction(format!("adjacency of {n} forms is not supported"))),
        }
    }
}

impl fmt::Display for PLMinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, form) in self.forms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{form}")?;
        }
        write!(f, "]")
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1, 0);
    let (mut t0, mut t1) = (0, 1);
    while r1 != 0 {
        let k = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Canonical representative of `base + k*step` over `k` in Z: minimal
/// `|x|+|y|`, then `x >= 0`, then `y >= 0`, then smallest `(x, y)`.
pub fn minimal_representative(base: (i64, i64), step: (i64, i64)) -> (i64, i64) {
    if step == (0, 0) {
        return base;
    }
    let n2 = step.0 * step.0 + step.1 * step.1;
    let k0 = (-(base.0 * step.0 + base.1 * step.1)).div_euclid(n2);
    let at = |k: i64| (base.0 + k * step.0, base.1 + k * step.1);
    let l1 = |(x, y): (i64, i64)| x.abs() + y.abs();
    let reach = 2 * l1(at(k0)) / (step.0.abs() + step.1.abs()) + 2;
    (k0 - reach..=k0 + reach)
        .map(at)
        .min_by_key(|&(x, y)| (l1((x, y)), x < 0, y < 0, x, y))
        .unwrap()
}

/// The reduction of `min(a, b)` for two forms with primitive difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeReduction {
    /// `(P, Q) = (a.p - b.p, a.q - b.q)`.
    pub normal: (i64, i64),
    /// `(p'', q'')` with `P p'' + Q q'' = 1`.
    pub bezout: (i64, i64),
    /// `(a.c - b.c) * (p'', q'')`.
    pub translation: (i64, i64),
}

/// Writes `min(a, b)(x, y) = b(x, y) + min(0, P x' + Q y')` with
/// `(x', y') = (x, y) + translation`.
pub fn reduce_edge(a: AffineForm, b: AffineForm) -> Result<EdgeReduction> {
    let d = a.sub(&b);
    let (g, x0, y0) = ext_gcd(d.p, d.q);
    if g != 1 {
        return Err(Error::NotCoprime(d.p, d.q));
    }
    let bezout = minimal_representative((x0, y0), (d.q, -d.p));
    Ok(EdgeReduction {
        normal: (d.p, d.q),
        bezout,
        translation: (d.c * bezout.0, d.c * bezout.1),
    })
}

/// `f - (p x + q y + c)` pointwise.
pub fn shift_by_linear(f: &IntegerField, form: AffineForm) -> Result<IntegerField> {
    let domain = f.domain();
    if !domain.has_coordinates() {
        return Err(Error::NoCoordinates);
    }
    form.check_periodic(domain)?;
    Ok(f.map(|v, value| {
        let (x, y) = domain.coord(v).unwrap();
        value - form.at(x, y)
    }))
}

fn within(domain: &Lattice, v: VertexId, set: &[VertexId], c2: i64) -> bool {
    set.iter().any(|&s| domain.dist_sq(v, s).unwrap() <= c2)
}

/// Every component of `interior \ D(f)` that stays clear of the guard band
/// lies within Euclidean distance `c` of `D(f)`.
pub fn is_holeless(f: &IntegerField, c: i64) -> Result<bool> {
    let domain = f.domain();
    if !domain.has_coordinates() {
        return Err(Error::NoCoordinates);
    }
    let dev = f.deviation_set();
    let mut in_dev = vec![false; domain.len()];
    for &v in &dev {
        in_dev[v] = true;
    }
    let components = connected_components(domain, |v| domain.is_interior(v) && !in_dev[v]);
    for comp in components {
        if comp.iter().any(|&v| domain.near_guard(v)) {
            continue;
        }
        if comp.iter().any(|&v| !within(domain, v, &dev, c * c)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Conditions (b) and (c) of `e`-monotonicity with constant `c`.
///
/// (b) is checked on every pair `v, v+e` inside the domain. For (c) the
/// walk `v, v-e, v-2e, ...` from each `v` with `f(v) = f(v-e)` stops at the
/// first strict decrease, which must lie within distance `c` of `D(f)`.
/// Walks that leave the domain or end in the guard band are not checked.
pub fn is_e_increasing(f: &IntegerField, e: (i64, i64), c: i64) -> Result<bool> {
    let domain = f.domain();
    if !domain.has_coordinates() {
        return Err(Error::NoCoordinates);
    }
    if e == (0, 0) {
        return Err(Error::Precondition("e must be nonzero".into()));
    }
    for v in domain.vertices() {
        if let Some(u) = domain.translate(v, e) {
            if f[v] > f[u] {
                return Ok(false);
            }
        }
    }
    let dev = f.deviation_set();
    let back = (-e.0, -e.1);
    let max_steps = domain.len();
    for v in domain.vertices() {
        match domain.translate(v, back) {
            Some(u) if f[u] == f[v] => {}
            _ => continue,
        }
        let mut cur = v;
        for _ in 0..max_steps {
            let Some(next) = domain.translate(cur, back) else { break };
            if f[next] < f[cur] {
                if domain.is_interior(next) && !within(domain, next, &dev, c * c) {
                    return Ok(false);
                }
                break;
            }
            cur = next;
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Arc<Lattice> {
        Lattice::boxed(-8, 8, -8, 8, 1).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let d = window();
        let five = PLMinFunction::new(vec![AffineForm::new(0, 0, 5)]).unwrap();
        assert!(five.eval(&d).unwrap().values().iter().all(|&v| v == 5));
        assert_eq!(PLMinFunction::psi_edge(1, 0).unwrap().at(-3, 7), -3);
        let dirs = DirectionPair::new((1, 0), (0, 1), 0, 0).unwrap();
        assert_eq!(PLMinFunction::psi_vertex(&dirs).unwrap().at(-2, -5), -5);
    }

    #[test]
    fn invalid_functions() {
        assert!(PLMinFunction::new(vec![]).is_err());
        let f = AffineForm::new(1, 2, 3);
        assert!(PLMinFunction::new(vec![f, f]).is_err());
        assert_eq!(PLMinFunction::psi_edge(2, 4), Err(Error::NotCoprime(2, 4)));
        assert!(DirectionPair::new((1, 0), (1, 0), 0, 0).is_err());
        assert!(DirectionPair::new((0, 1), (1, 0), 0, 0).is_err());
    }

    #[test]
    fn deviation_sets() {
        let d = window();
        let lin = PLMinFunction::new(vec![AffineForm::new(2, -1, 4)]).unwrap();
        assert!(lin.deviation_set(&d).unwrap().is_empty());
        let edge = PLMinFunction::psi_edge(1, 0).unwrap();
        let dev = edge.deviation_set(&d).unwrap();
        assert_eq!(dev.len(), 15);
        assert!(dev.iter().all(|&v| d.coord(v).unwrap().0 == 0));
    }

    #[test]
    fn cylinder_requires_periodic_forms() {
        let d = Lattice::cylinder((3, -1), -6, 6, 1).unwrap();
        assert!(PLMinFunction::psi_edge(1, 3).unwrap().eval(&d).is_ok());
        assert_eq!(
            PLMinFunction::psi_edge(1, 0).unwrap().eval(&d),
            Err(Error::NotPeriodic { p: 1, q: 0, c: 0 })
        );
    }

    #[test]
    fn holeless_examples() {
        let d = Lattice::boxed(-15, 15, -15, 15, 1).unwrap();
        assert!(PLMinFunction::psi_edge(1, 2).unwrap().is_holeless(&d, 1).unwrap());
        let dirs = DirectionPair::new((1, 0), (0, 1), 0, 0).unwrap();
        assert!(PLMinFunction::psi_vertex(&dirs).unwrap().is_holeless(&d, 1).unwrap());
        let ring = PLMinFunction::new(vec![
            AffineForm::new(0, 0, 0),
            AffineForm::new(1, 0, 10),
            AffineForm::new(-1, 0, 10),
            AffineForm::new(0, 1, 10),
            AffineForm::new(0, -1, 10),
        ])
        .unwrap();
        assert!(!ring.is_holeless(&d, 2).unwrap());
        assert!(ring.is_holeless(&d, 10).unwrap());
    }

    #[test]
    fn monotone_examples() {
        let d = window();
        for (p, q) in [(1, 2), (-1, 3), (2, -1)] {
            let f = PLMinFunction::psi_edge(p, q).unwrap().eval(&d).unwrap();
            for e in [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (2, -1)] {
                let expected = p * e.0 + q * e.1 >= 0;
                assert_eq!(is_e_increasing(&f, e, 4).unwrap(), expected, "{p},{q} {e:?}");
            }
        }
        let x = PLMinFunction::psi_edge(1, 0).unwrap().eval(&d).unwrap();
        assert!(!is_e_increasing(&x, (-1, 0), 4).unwrap());
        let c = IntegerField::constant(d, 3);
        assert!(is_e_increasing(&c, (1, 1), 1).unwrap());
    }

    #[test]
    fn ext_gcd_identity() {
        for a in -12..=12 {
            for b in -12..=12 {
                let (g, x, y) = ext_gcd(a, b);
                assert_eq!(g, gcd(a, b));
                assert_eq!(a * x + b * y, g);
            }
        }
    }

    #[test]
    fn reduce_edge_examples() {
        let r = reduce_edge(AffineForm::new(1, 3, 0), AffineForm::new(0, 0, 0)).unwrap();
        assert_eq!((r.normal, r.translation), ((1, 3), (0, 0)));
        let r = reduce_edge(AffineForm::new(2, 3, 1), AffineForm::new(1, 2, 0)).unwrap();
        assert_eq!(r.normal, (1, 1));
        assert_eq!(r.bezout.0 + r.bezout.1, 1);
        assert_eq!(r.translation, r.bezout);
        let r = reduce_edge(AffineForm::new(1, 0, 0), AffineForm::new(0, 0, 0)).unwrap();
        assert_eq!((r.normal, r.translation), ((1, 0), (0, 0)));
        assert!(reduce_edge(AffineForm::new(2, 2, 0), AffineForm::new(0, 0, 0)).is_err());
    }

    #[test]
    fn reduction_reproduces_two_form_minimum() {
        let pairs = [
            (AffineForm::new(2, 3, 1), AffineForm::new(1, 2, 0)),
            (AffineForm::new(-1, 0, 4), AffineForm::new(1, 3, -2)),
            (AffineForm::new(0, 1, -5), AffineForm::new(-2, -2, 7)),
        ];
        for (a, b) in pairs {
            let r = reduce_edge(a, b).unwrap();
            let (pp, qq) = r.normal;
            for x in -6..=6 {
                for y in -6..=6 {
                    let (xs, ys) = (x + r.translation.0, y + r.translation.1);
                    assert_eq!(a.at(x, y).min(b.at(x, y)), b.at(x, y) + 0.min(pp * xs + qq * ys));
                }
            }
        }
    }

    #[test]
    fn minimal_representative_convention() {
        // p'q - pq' = 1 for (p,q) = (1,3): solutions (0,-1) + k(1,3)
        assert_eq!(minimal_representative((1, 2), (1, 3)), (0, -1));
        assert_eq!(minimal_representative((5, 0), (1, 0)), (0, 0));
        assert_eq!(minimal_representative((3, -3), (1, -1)), (0, 0));
    }

    #[test]
    fn adjacent_pairs_by_form_count() {
        let dirs = DirectionPair::new((1, 0), (0, 1), 0, 2).unwrap();
        assert_eq!(PLMinFunction::psi_edge(1, 2).unwrap().adjacent_pairs().unwrap(), vec![(0, 1)]);
        assert_eq!(PLMinFunction::psi_vertex(&dirs).unwrap().adjacent_pairs().unwrap().len(), 3);
        assert_eq!(
            PLMinFunction::psi_node(&dirs).unwrap().adjacent_pairs().unwrap(),
            vec![(0, 1), (0, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn linear_shift_round_trip() {
        let d = window();
        let f = PLMinFunction::psi_edge(1, 2).unwrap().eval(&d).unwrap();
        let form = AffineForm::new(3, -1, 2);
        let g = shift_by_linear(&f, form).unwrap();
        let back = shift_by_linear(&g, AffineForm::new(-3, 1, -2)).unwrap();
        assert_eq!(back, f);
        assert_eq!(shift_by_linear(&f, AffineForm::new(0, 0, 0)).unwrap(), f);
    }
}
