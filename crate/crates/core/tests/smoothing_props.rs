mod common;

use proptest::prelude::*;
use rand::Rng;

use sandsmooth::oracle::slicing_decomposition_check;
use sandsmooth::smoothing::{
    canonical_smoothing, smooth_field_n, smooth_once, DeletionOrder, EdgeProfile, SmoothingOptions,
};
use sandsmooth::{AffineForm, Lattice, PLMinFunction};

fn lenient() -> SmoothingOptions {
    SmoothingOptions { strict: false, ..Default::default() }
}

#[test]
fn n_smoothing_is_least_superharmonic_majorant() {
    let mut rng = common::rng(21);
    for _ in 0..60 {
        let r = rng.gen_range(4..=9);
        let d = Lattice::boxed(-r, r, -r, r, 1).unwrap();
        let k = rng.gen_range(2..=4);
        let f = common::random_plmin(&mut rng, k, 3).eval(&d).unwrap();
        for n in 0..=4 {
            let got = smooth_field_n(&f, n, &lenient()).unwrap().final_field;
            assert_eq!(got, common::majorant_smoothing(&f, n as i64), "n = {n}");
        }
    }
}

#[test]
fn edge_smoothing_matches_majorant_on_cylinder() {
    for (p, q) in [(1, 2), (1, 3), (2, 3), (3, 4)] {
        let d = EdgeProfile::cylinder_for(p, q, 20).unwrap();
        let f = PLMinFunction::psi_edge(p, q).unwrap().eval(&d).unwrap();
        for n in 1..=6 {
            let got = smooth_field_n(&f, n, &lenient()).unwrap().final_field;
            assert_eq!(got, common::majorant_smoothing(&f, n as i64), "({p},{q}) n = {n}");
        }
    }
}

#[test]
fn slices_of_n_smoothing_decompose() {
    let mut rng = common::rng(22);
    for _ in 0..30 {
        let d = Lattice::boxed(-6, 6, -6, 6, 1).unwrap();
        let f = common::random_plmin(&mut rng, 3, 3).eval(&d).unwrap();
        let n = rng.gen_range(1..=5);
        let g = smooth_field_n(&f, n, &lenient()).unwrap().final_field;
        assert!(slicing_decomposition_check(&f, &g).unwrap());
    }
}

#[test]
fn fixed_points_of_one_step() {
    let d = Lattice::boxed(-10, 10, -10, 10, 1).unwrap();
    let three = PLMinFunction::new(vec![AffineForm::new(1, 0, 0), AffineForm::new(0, 1, 0), AffineForm::new(0, 0, 0)])
        .unwrap()
        .eval(&d)
        .unwrap();
    assert_eq!(smooth_once(&three, DeletionOrder::RowMajor).unwrap().0, three);
    for c in [0, 1, 5] {
        let node = sandsmooth::IntegerField::from_coords(d.clone(), |x, y| x.min(y).min(x + y).min(c)).unwrap();
        let (s1, set) = smooth_once(&node, DeletionOrder::RowMajor).unwrap();
        assert!(set.is_empty(), "c = {c}");
        assert_eq!(s1, node);
    }
}

#[test]
fn canonical_smoothing_stabilizes_on_edges() {
    for (p, q) in [(1, 0), (1, 1), (1, 2), (1, 3), (2, 3), (3, 4), (2, 5), (-1, 4)] {
        let d = EdgeProfile::cylinder_for(p, q, EdgeProfile::default_half_height(p, q)).unwrap();
        let f = PLMinFunction::psi_edge(p, q).unwrap();
        let r = canonical_smoothing(&f, &d, &SmoothingOptions::default()).unwrap();
        assert!(r.stabilized);
        assert!(r.final_field.is_superharmonic_on_interior());
        for w in r.change_sets.windows(2) {
            assert!(!w[0].is_empty() || w[1].is_empty());
        }
    }
}

#[test]
fn deletion_order_does_not_matter() {
    let mut rng = common::rng(23);
    for _ in 0..40 {
        let d = Lattice::boxed(-8, 8, -8, 8, 1).unwrap();
        let f = common::random_superharmonic(&mut rng, &d);
        let a = smooth_once(&f, DeletionOrder::RowMajor).unwrap();
        let b = smooth_once(&f, DeletionOrder::Random(rng.gen())).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_move_by_at_most_one(
        forms in prop::collection::btree_set((-3i64..=3, -3i64..=3, -3i64..=3), 2..=4),
        r in 5i64..=10,
    ) {
        let f = PLMinFunction::new(forms.into_iter().map(|(p, q, c)| AffineForm::new(p, q, c)).collect()).unwrap();
        let d = Lattice::boxed(-r, r, -r, r, 1).unwrap();
        let res = sandsmooth::smoothing::canonical_smoothing(&f, &d, &lenient()).unwrap();
        prop_assert!(res.stabilized);
        let mut cur = f.eval(&d).unwrap();
        for set in &res.change_sets {
            let next = cur.map(|v, x| if set.binary_search(&v).is_ok() { x - 1 } else { x });
            prop_assert!(next.max_abs_diff(&cur).unwrap() <= 1);
            prop_assert!(next.is_superharmonic_on_interior());
            cur = next;
        }
        prop_assert_eq!(cur, res.final_field);
    }

    #[test]
    fn smoothing_never_rises(
        forms in prop::collection::btree_set((-2i64..=2, -2i64..=2, -2i64..=2), 1..=3),
        n in 0usize..=4,
    ) {
        let f = PLMinFunction::new(forms.into_iter().map(|(p, q, c)| AffineForm::new(p, q, c)).collect()).unwrap();
        let d = Lattice::boxed(-6, 6, -6, 6, 1).unwrap();
        let g = f.eval(&d).unwrap();
        let s = smooth_field_n(&g, n, &lenient()).unwrap().final_field;
        prop_assert!(s.le(&g).unwrap());
        prop_assert!(g.zip_with(&s, |a, b| a - b).unwrap().values().iter().all(|&h| h <= n as i64));
    }
}
