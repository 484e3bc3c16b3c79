mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use slab_core::incidence3d::{f_map, pair_line, solution_set, Line3, Point3};
use slab_core::{stabilizer_fast, FieldCtx, Mat2, Point2, PointSet, Sl2};

const FIELDS: [(u32, u32); 8] = [
    (2, 1),
    (3, 1),
    (2, 2),
    (5, 1),
    (7, 1),
    (2, 3),
    (3, 2),
    (11, 1),
];

fn any_field() -> impl Strategy<Value = FieldCtx> {
    prop::sample::select(&FIELDS[..]).prop_map(|(p, r)| common::field(p, r))
}

/// A field together with a random subset of its plane.
fn field_and_set() -> impl Strategy<Value = (FieldCtx, PointSet)> {
    any_field()
        .prop_flat_map(|f| {
            let n = (f.q() * f.q()) as usize;
            (Just(f), prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|(f, bits)| {
            let q = f.q();
            let codes = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i);
            let e = PointSet::from_points(q, codes.map(|c| Point2::unpack(c, q)));
            (f, e)
        })
}

fn sl2_member(f: &FieldCtx, seed: u64) -> Mat2 {
    let g = Sl2::new(f);
    g.nth(seed % g.order())
}

fn stab(f: &FieldCtx, e: &PointSet) -> BTreeSet<Mat2> {
    if e.len_punctured() == 0 {
        Sl2::new(f).iter().unwrap().collect()
    } else {
        stabilizer_fast(f, e).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(f in any_field(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let e = |x: u32| f.elem(u64::from(x % f.q())).unwrap();
        let (a, b, c) = (e(a), e(b), e(c));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert!(f.add(a, f.neg(a)).is_zero());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()).code(), 1);
        }
        prop_assert_eq!(f.frobenius(f.frobenius(a, 1), f.r() - 1), a);
    }

    #[test]
    fn field_matches_oracle(f in any_field(), a in any::<u32>(), b in any::<u32>()) {
        let o = common::Oracle::new(&f);
        let (x, y) = (a % f.q(), b % f.q());
        let (ex, ey) = (f.elem(u64::from(x)).unwrap(), f.elem(u64::from(y)).unwrap());
        prop_assert_eq!(f.add(ex, ey).code(), o.add(x, y));
        prop_assert_eq!(f.mul(ex, ey).code(), o.mul(x, y));
    }

    #[test]
    fn complement_has_same_stabilizer((f, e) in field_and_set()) {
        prop_assert_eq!(stab(&f, &e), stab(&f, &e.complement()));
    }

    #[test]
    fn origin_does_not_matter((f, e) in field_and_set()) {
        prop_assert_eq!(stab(&f, &e.with_origin()), stab(&f, &e.without_origin()));
    }

    #[test]
    fn conjugation_covariance((f, e) in field_and_set(), seed in any::<u64>()) {
        // R_{gE} = g R_E g^-1
        let g = sl2_member(&f, seed);
        let gi = g.inverse(&f);
        let moved = e.image(&f, &g);
        let expected: BTreeSet<Mat2> = stab(&f, &e).iter().map(|h| g.compose(&f, &h.compose(&f, &gi))).collect();
        prop_assert_eq!(stab(&f, &moved), expected);
    }

    #[test]
    fn stabilizer_is_a_subgroup((f, e) in field_and_set(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let s = stab(&f, &e);
        let members: Vec<&Mat2> = s.iter().collect();
        prop_assert!(s.contains(&Mat2::from_codes(1, 0, 0, 1)));
        prop_assert_eq!((Sl2::new(&f).order() as usize) % s.len(), 0);
        let (a, b) = (members[i.index(members.len())], members[j.index(members.len())]);
        prop_assert!(s.contains(&a.compose(&f, b)));
        prop_assert!(s.contains(&a.inverse(&f)));
        prop_assert!(e.is_preserved_by(&f, a));
    }

    #[test]
    fn pair_line_is_image_of_solutions(f in any_field(), x1 in any::<u32>(), y1 in any::<u32>(), x2 in any::<u32>(), y2 in any::<u32>()) {
        let q = f.q();
        let m1 = Point2::from_codes(1 + x1 % (q - 1), y1 % q);
        let m2 = Point2::from_codes(1 + x2 % (q - 1), y2 % q);
        prop_assume!(!(m1.y.is_zero() && m2.y.is_zero()));
        let line = pair_line(&f, m1, m2).unwrap();
        let sols = solution_set(&f, m1, m2).unwrap();
        prop_assert_eq!(sols.len() as u32, q);
        for m in sols.iter() {
            prop_assert_eq!(m.apply(&f, m1), m2);
            prop_assert!(line.contains(&f, f_map(m)));
        }
        let image: BTreeSet<Point3> = sols.iter().map(f_map).collect();
        let on_line: BTreeSet<Point3> = line.points(&f).collect();
        prop_assert_eq!(image, on_line);
    }

    #[test]
    fn line_canonical_form_is_idempotent(f in any_field(), b in any::<[u32; 3]>(), d in any::<[u32; 3]>(), t in any::<u32>(), s in any::<u32>()) {
        let q = f.q();
        let pt = |v: [u32; 3]| Point3::from_codes(v[0] % q, v[1] % q, v[2] % q);
        let (base, dir) = (pt(b), pt(d));
        prop_assume!(!dir.is_zero());
        let line = Line3::new(&f, base, dir).unwrap();
        prop_assert_eq!(Line3::new(&f, line.base(), line.dir()).unwrap(), line);
        // any other base point on the line and any nonzero rescaling of the
        // direction name the same line
        let shift = f.elem(u64::from(t % q)).unwrap();
        let scale = f.elem(u64::from(1 + s % (q - 1))).unwrap();
        let other_base = line.point_at(&f, shift);
        let scaled = Point3([f.mul(scale, dir.0[0]), f.mul(scale, dir.0[1]), f.mul(scale, dir.0[2])]);
        prop_assert_eq!(Line3::new(&f, other_base, scaled).unwrap(), line);
    }
}
