use num_traits::{Signed, Zero};
use proptest::prelude::*;
use thickset_core::cantor::{cover, membership, AffineMap1D, IfsSet1D, Membership};
use thickset_core::patterns1d::{kap_search, KapVerdict};
use thickset_core::product2d::{difference_hit, normalize_triangle, Triangle};
use thickset_core::scalar::{int, powi, rat, Exact, Interval};

fn small_rat(span: i64) -> impl Strategy<Value = Exact> {
    (-span..span, 1i64..64).prop_map(|(n, d)| rat(n, d))
}

/// Random IFS on `[0, 1]` with 2 or 3 ordered, disjoint branches.
fn ifs() -> impl Strategy<Value = IfsSet1D> {
    prop::collection::vec(1i64..20, 5..=7).prop_map(|w| {
        let k = if w.len() == 7 { 3 } else { 2 };
        // Alternating piece/gap weights normalized to total length 1.
        let parts = &w[..2 * k - 1];
        let total: i64 = parts.iter().sum();
        let mut at = Exact::zero();
        let mut branches = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            let len = rat(*p, total);
            if i % 2 == 0 {
                branches.push(AffineMap1D::new(len.clone(), at.clone()).unwrap());
            }
            at += len;
        }
        IfsSet1D::new(Interval::new(int(0), int(1)).unwrap(), branches).unwrap()
    })
}

fn exact_triangle() -> impl Strategy<Value = [[Exact; 2]; 3]> {
    [
        (small_rat(40), small_rat(40)),
        (small_rat(40), small_rat(40)),
        (small_rat(40), small_rat(40)),
    ]
    .prop_map(|v| v.map(|(x, y)| [x, y]))
}

/// Rotation by a Pythagorean angle, scaling and translation, all exact.
fn similar(t: &[[Exact; 2]; 3], s: &Exact, flip: bool, shift: &[Exact; 2]) -> [[Exact; 2]; 3] {
    let (c, n) = (rat(3, 5), rat(4, 5));
    t.clone().map(|[x, y]| {
        let y = if flip { -y } else { y };
        [
            s * (&c * &x - &n * &y) + &shift[0],
            s * (&n * &x + &c * &y) + &shift[1],
        ]
    })
}

fn area2(t: &[[Exact; 2]; 3]) -> Exact {
    (&t[1][0] - &t[0][0]) * (&t[2][1] - &t[0][1]) - (&t[2][0] - &t[0][0]) * (&t[1][1] - &t[0][1])
}

fn agree(a: &Interval, b: &Interval) -> bool {
    if a.is_point() && b.is_point() {
        a == b
    } else {
        a.overlaps(b)
    }
}

/// Brute force over all nondecreasing triples of depth-`depth` intervals.
fn brute_three_term(set: &IfsSet1D, depth: u32, y_min: &Exact) -> bool {
    let ivs = cover(set, depth).intervals;
    let n = ivs.len();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let (p, q, r) = (&ivs[i], &ivs[j], &ivs[k]);
                let lo = y_min
                    .clone()
                    .max(q.lo() - p.hi())
                    .max(r.lo() - q.hi())
                    .max((r.lo() - p.hi()) / int(2));
                let hi = (q.hi() - p.lo())
                    .min(r.hi() - q.lo())
                    .min((r.hi() - p.lo()) / int(2));
                if lo <= hi {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn triangle_shape_is_similarity_invariant(
        t in exact_triangle(),
        s in (1i64..30, 1i64..30).prop_map(|(n, d)| rat(n, d)),
        flip in any::<bool>(),
        shift in (small_rat(100), small_rat(100)),
    ) {
        prop_assume!(!area2(&t).is_zero());
        let a = normalize_triangle(&Triangle::from_exact(t.clone())).unwrap();
        let img = similar(&t, &s, flip, &[shift.0, shift.1]);
        let b = normalize_triangle(&Triangle::from_exact(img)).unwrap();
        prop_assert!(agree(&a.lambda, &b.lambda), "λ {} vs {}", a.lambda, b.lambda);
        prop_assert!(agree(&a.alpha, &b.alpha), "α {} vs {}", a.alpha, b.alpha);
        prop_assert!(a.lambda.mid() <= rat(1, 2));
    }

    #[test]
    fn covers_are_nested_with_expected_length(set in ifs(), depth in 1u32..5) {
        let coarse = cover(&set, depth - 1);
        let fine = cover(&set, depth);
        prop_assert_eq!(fine.intervals.len(), coarse.intervals.len() * set.branch_count());
        prop_assert!(fine.intervals.iter().all(|iv| coarse.covers(iv)));
        let ratio: Exact = set.branches().iter().map(|b| b.scale.clone()).sum();
        prop_assert_eq!(fine.total_length(), powi(&ratio, depth));
    }

    #[test]
    fn membership_matches_cover(set in ifs(), n in 0i64..=997, depth in 1u32..6) {
        let x = rat(n, 997);
        let inside = cover(&set, depth).contains(&x);
        match membership(&set, &x, depth) {
            Membership::OutAtDepth(_) => prop_assert!(!inside),
            Membership::InCertified | Membership::InCoverAtDepth(_) => prop_assert!(inside),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn three_term_search_agrees_with_brute_force(n in 6i64..30) {
        let eps = rat(n, 60);
        let set = IfsSet1D::middle_cantor(&eps).unwrap();
        let cert = kap_search(&set, 3, 5).unwrap();
        let found = matches!(cert.verdict, KapVerdict::Feasible { .. });
        prop_assert_eq!(found, brute_three_term(&set, 5, &cert.y_min), "ε = {}", eps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn difference_hits_contain_delta(n in 0i64..=1000) {
        let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
        let delta = Interval::point(rat(n, 1000));
        let hit = difference_hit(&set, &delta, 12).unwrap();
        let reach = Interval::new(hit.b.lo() - hit.a.hi(), hit.b.hi() - hit.a.lo()).unwrap();
        prop_assert!(reach.contains(delta.lo()));
        let c = cover(&set, 12);
        prop_assert!(c.covers(&hit.a) && c.covers(&hit.b));
        prop_assert!(!hit.a.lo().is_negative());
    }
}
