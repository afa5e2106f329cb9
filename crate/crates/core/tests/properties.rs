use geoprog::descent2::{rank_bounds, Budget, RankStatus};
use geoprog::ellcurve::{quartic_twist, Curve, Point};
use geoprog::exactnum::{factor, fmt_rat, fourth_power_free_part, int, parse_rat, rat, rat_int, Int, Rat};
use geoprog::lab::{Lab, Verdict};
use geoprog::progressions::{class2_progression, cq2_family};
use geoprog::store::{CacheKey, CacheRecord, Family, Store};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn any_rat() -> impl Strategy<Value = Rat> {
    (any::<i64>(), 1i64..=i64::MAX).prop_map(|(n, d)| Rat::new(Int::from(n), Int::from(d)))
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

/// Points `k*(1, 2)` on `y^2 = x^3 + 3x`, a curve of rank one.
fn multiples() -> (Curve, Vec<Point>) {
    let c = Curve::bx(rat(3, 1)).unwrap();
    let g = Point::new(rat(1, 1), rat(2, 1));
    let pts = (-4..=4).map(|k| c.mul_scalar(&g, k).unwrap()).collect();
    (c, pts)
}

proptest! {
    #[test]
    fn rationals_round_trip_through_text(q in any_rat()) {
        prop_assert_eq!(parse_rat(&fmt_rat(&q)).unwrap(), q);
    }

    #[test]
    fn factorization_multiplies_back(n in 1i64..=10_000_000) {
        let f = factor(&int(n)).unwrap();
        prop_assert_eq!(f.product(), int(n));
    }

    #[test]
    fn fourth_power_free_part_is_exact(n in 1i64..=10_000_000) {
        let (b, t) = fourth_power_free_part(&int(n)).unwrap();
        prop_assert_eq!(&b * t.pow(4), int(n));
        let f = factor(&b).unwrap();
        prop_assert!(f.primes().all(|p| f.exponent_of(p) < 4));
    }

    #[test]
    fn group_law_is_closed_and_associative(i in 0usize..9, j in 0usize..9, k in 0usize..9) {
        let (c, pts) = multiples();
        let (p, q, r) = (&pts[i], &pts[j], &pts[k]);
        let pq = c.add(p, q).unwrap();
        prop_assert!(c.on_curve(&pq));
        prop_assert_eq!(c.add(&pq, r).unwrap(), c.add(p, &c.add(q, r).unwrap()).unwrap());
        prop_assert_eq!(c.add(p, &c.neg(p)).unwrap(), Point::Infinity);
    }

    #[test]
    fn quartic_twist_keeps_points_on_curve(t in small_rat(), k in 1i64..4) {
        prop_assume!(!t.is_zero());
        let (c, _) = multiples();
        let p = c.mul_scalar(&Point::new(rat(1, 1), rat(2, 1)), k).unwrap();
        let image = Curve::bx(rat(3, 1) * num_traits::pow(t.clone(), 4)).unwrap();
        prop_assert!(image.on_curve(&quartic_twist(&p, &t).unwrap()));
    }

    #[test]
    fn class2_sets_validate(
        u in small_rat(), v in small_rat(), w in small_rat(),
        r in small_rat(), s in small_rat(), u2 in small_rat(), v2 in small_rat(),
    ) {
        if let Ok(ws) = class2_progression(&u, &v, &w, (&r, &s), (&u2, &v2), 4) {
            prop_assert!(ws.validate().is_ok());
        }
    }

    #[test]
    fn cq2_family_values_are_members(q in 2i64..=12, u in -20i64..=20, v in -20i64..=20) {
        if let Ok((a, ws)) = cq2_family(&int(q), &int(u), &int(v), 3) {
            prop_assert!(a.is_positive());
            prop_assert_eq!(ws.q.clone(), rat_int(&int(q * q)));
            prop_assert!(ws.validate().is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rank_bounds_invariant_under_fourth_powers(b in 1i64..=60, t in 2i64..=3) {
        let base = rank_bounds(&int(0), &int(b), Budget::default()).unwrap();
        let twisted = rank_bounds(&int(0), &(int(b) * int(t).pow(4)), Budget::default()).unwrap();
        prop_assert_eq!(base.upper, twisted.upper);
        if base.status == RankStatus::Exact && twisted.status == RankStatus::Exact {
            prop_assert_eq!(base.lower, twisted.lower);
        }
    }

    #[test]
    fn more_budget_never_loses_information(b in 1i64..=200) {
        let small = rank_bounds(&int(0), &int(b), Budget { start: 16, cap: 64 }).unwrap();
        let large = rank_bounds(&int(0), &int(b), Budget::default()).unwrap();
        prop_assert!(large.lower >= small.lower);
        prop_assert!(large.upper <= small.upper);
        prop_assert!(large.lower <= small.upper && small.lower <= large.upper);
    }

    #[test]
    fn records_survive_the_store(b in 1i64..=500) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let r = rank_bounds(&int(0), &int(b), Budget { start: 16, cap: 64 }).unwrap();
        let key = CacheKey::new(Family::Bx, int(0), int(b), "homspace:16..64");
        Store::open(&path).unwrap().put(CacheRecord::from_rank(&key, &r)).unwrap();
        let back = Store::open(&path).unwrap().get(&key).unwrap();
        prop_assert!(back.verify());
        prop_assert_eq!(back.rank(), r);
    }
}

#[test]
fn quotients_two_and_eight_agree() {
    let lab = Lab::new(Budget::default());
    let c2 = lab.compute_cq(&int(2), 50).unwrap();
    let c8 = lab.compute_cq(&int(8), 50).unwrap();
    let members = |t: &geoprog::lab::CqTable| t.members();
    assert_eq!(members(&c2), members(&c8));
    assert_eq!(members(&c2), [int(47)]);
}

#[test]
fn verdicts_are_sound() {
    // fourth powers give curves isomorphic to y^2 = x^3 + 2^i x, all of rank 0
    let lab = Lab::new(Budget::default());
    for a in [1, 16, 81] {
        let m = lab.membership(&int(a), &int(2), Family::Bx).unwrap();
        assert_ne!(m.verdict, Verdict::Member, "a = {a}");
    }
    let m = lab.membership(&int(47), &int(2), Family::Bx).unwrap();
    assert_eq!(m.verdict, Verdict::Member);
    for w in m.witnesses() {
        let c = Curve::bx(rat(47, 1) * num_traits::pow(Rat::from_integer(int(2)), w.0 as usize)).unwrap();
        assert!(c.on_curve(w.1));
        assert!(!w.1.x().unwrap().is_zero());
    }
}
