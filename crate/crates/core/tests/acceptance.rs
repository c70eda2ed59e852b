//! Exit-gate checks. Each criterion prints one `PASS`/`FAIL` line and the
//! binary exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use thickset_core::ballsys::{
    h_upper, hex_radius, subset_thickness, yavicoli_thickness, BallSystem, Norm,
};
use thickset_core::cantor::{
    certified_thickness, cover, difference_interval, membership, newhouse_thickness, IfsSet1D,
    Membership, ThicknessTag,
};
use thickset_core::patterns1d::{
    check_claim_containment, find_3ap, hausdorff_lower_bound, kap_search, shmerkin_4ap, KapVerdict,
};
use thickset_core::patterns_nd::{
    find_convex_combo_nd, find_triangle_nd, lambda_window, threshold, Mode,
};
use thickset_core::product2d::{find_triangle_in_product, normalize_triangle, Triangle};
use thickset_core::scalar::{exact_string, int, parse_exact, powi, rat, Exact, Interval};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CASES: u32 = 1000;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e(s: &str) -> Exact {
    parse_exact(s).unwrap()
}

fn f(x: &Exact) -> f64 {
    x.to_f64().unwrap()
}

/// Membership in the middle-third set by ternary digit expansion.
fn in_middle_third(x: &Exact) -> bool {
    let (third, two_thirds) = (rat(1, 3), rat(2, 3));
    let mut x = x.clone();
    if x.is_negative() || x > int(1) {
        return false;
    }
    let mut seen = Vec::new();
    loop {
        if x.is_zero() || x == int(1) || x == third || x == two_thirds {
            return true;
        }
        if x > third && x < two_thirds {
            return false;
        }
        if seen.contains(&x) {
            return true;
        }
        seen.push(x.clone());
        x = if x < third {
            &x * int(3)
        } else {
            &x * int(3) - int(2)
        };
    }
}

/// Middle-ε set on `[0, 1]` at level one: both pieces have length `(1−ε)/2`.
fn middle_first_level_ratio(eps: &Exact) -> Exact {
    (int(1) - eps) / int(2) / eps
}

fn thickness_is(set: &IfsSet1D, want: &Exact) -> Outcome {
    let rep = certified_thickness(set).map_err(|e| e.to_string())?;
    ensure(
        rep.tag == ThicknessTag::Stabilized,
        format!("tag {:?}", rep.tag),
    )?;
    ensure(
        &rep.value == want,
        format!(
            "got {}, want {}",
            exact_string(&rep.value),
            exact_string(want)
        ),
    )?;
    Ok(format!("{} Stabilized", exact_string(&rep.value)))
}

fn c1_middle_third() -> Outcome {
    let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
    thickness_is(&set, &middle_first_level_ratio(&rat(1, 3)))
}

fn c2_off_center() -> Outcome {
    let a = rat(3, 10);
    let set = IfsSet1D::off_center(&a).unwrap();
    // Pieces [0, a] and [2a, 1] around the gap (a, 2a).
    let oracle = a.clone().min(int(1) - &a * int(2)) / &a;
    thickness_is(&set, &oracle)
}

fn c3_middle_family() -> Outcome {
    let mut shown = Vec::new();
    for (n, d) in [(1, 5), (1, 4), (1, 3), (2, 5)] {
        let eps = rat(n, d);
        let set = IfsSet1D::middle_cantor(&eps).unwrap();
        thickness_is(&set, &middle_first_level_ratio(&eps))?;
        shown.push(format!(
            "ε={n}/{d}: {}",
            exact_string(&middle_first_level_ratio(&eps))
        ));
    }
    Ok(shown.join(", "))
}

fn c4_three_term() -> Outcome {
    let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
    let w = find_3ap(&set, 20).map_err(|e| e.to_string())?;
    ensure(
        w.c().is_point() && w.c().lo() == &rat(2, 3),
        format!("c = {}", w.c()),
    )?;
    let bound = rat(2, 1) / powi(&int(3), 20);
    ensure(
        w.residual <= bound,
        format!("residual {}", exact_string(&w.residual)),
    )?;
    for p in [int(0), rat(1, 3), rat(2, 3)] {
        ensure(
            in_middle_third(&p),
            format!("{} fails the digit oracle", exact_string(&p)),
        )?;
        ensure(
            membership(&set, &p, 40) == Membership::InCertified,
            format!("{} not certified", exact_string(&p)),
        )?;
    }
    if let Some(pts) = &w.exact_points {
        ensure(
            pts.iter().all(in_middle_third),
            "exact witness fails the digit oracle",
        )?;
        ensure(
            &pts[0] + &pts[2] == &pts[1] * int(2),
            "exact witness is not a progression",
        )?;
    }
    Ok(format!("c = 2/3, residual {}", exact_string(&w.residual)))
}

/// All nondecreasing `k`-tuples of depth-`depth` cover intervals that admit
/// a progression with step at least `y_min`. No pruning between levels.
fn brute_force_kap(set: &IfsSet1D, k: usize, depth: u32, y_min: &Exact) -> bool {
    let ivs = cover(set, depth).intervals;
    let mut idx = vec![0usize; k];
    loop {
        let mut lo = y_min.clone();
        let mut hi: Option<Exact> = None;
        for i in 0..k {
            for j in i + 1..k {
                let n = int((j - i) as i64);
                let a = (ivs[idx[j]].lo() - ivs[idx[i]].hi()) / &n;
                let b = (ivs[idx[j]].hi() - ivs[idx[i]].lo()) / &n;
                lo = lo.max(a);
                hi = Some(match hi {
                    Some(h) => h.min(b),
                    None => b,
                });
            }
        }
        if hi.is_some_and(|h| lo <= h) {
            return true;
        }
        let mut p = k;
        loop {
            if p == 0 {
                return false;
            }
            p -= 1;
            if idx[p] + 1 < ivs.len() {
                idx[p] += 1;
                for q in p + 1..k {
                    idx[q] = idx[p];
                }
                break;
            }
        }
    }
}

fn c5_no_three_term() -> Outcome {
    let set = IfsSet1D::middle_cantor(&rat(2, 5)).unwrap();
    let cert = kap_search(&set, 3, 8).map_err(|e| e.to_string())?;
    let d = match cert.verdict {
        KapVerdict::InfeasibleAtDepth(d) => d,
        other => return Err(format!("verdict {other:?}")),
    };
    let shallow = kap_search(&set, 3, 5).map_err(|e| e.to_string())?;
    let search_feasible = matches!(shallow.verdict, KapVerdict::Feasible { .. });
    let brute = brute_force_kap(&set, 3, 5, &cert.y_min);
    ensure(
        brute == search_feasible,
        format!("brute force {brute} vs search {search_feasible} at depth 5"),
    )?;
    Ok(format!(
        "InfeasibleAtDepth({d}), brute force agrees at depth 5"
    ))
}

fn c6_four_term() -> Outcome {
    let cert = shmerkin_4ap(&rat(1, 3), 12).map_err(|e| e.to_string())?;
    let want = vec![int(0), rat(1, 3), rat(2, 3), int(1)];
    let KapVerdict::Feasible {
        exact_points: Some(pts),
        ..
    } = &cert.verdict
    else {
        return Err(format!("construction gave {:?}", cert.verdict));
    };
    ensure(pts == &want, format!("construction points {pts:?}"))?;
    let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
    for p in pts {
        ensure(
            in_middle_third(p) && membership(&set, p, 40) == Membership::InCertified,
            format!("{} not certified", exact_string(p)),
        )?;
    }
    let search = kap_search(&set, 4, 10).map_err(|e| e.to_string())?;
    let KapVerdict::Feasible { x, y, points, .. } = &search.verdict else {
        return Err(format!("search gave {:?}", search.verdict));
    };
    // The search box must contain a progression whose terms lie in C.
    for (j, iv) in points.iter().enumerate() {
        let term = x.clone() + y.scale(&int(j as i64));
        ensure(term.overlaps(iv), format!("term {j} leaves its interval"))?;
    }
    ensure(
        x.contains(&pts[0]) && y.contains(&(&pts[1] - &pts[0])),
        "search box misses the construction",
    )?;
    Ok("0, 1/3, 2/3, 1 certified; search Feasible and contains it".into())
}

fn c7_off_center_no_four_term() -> Outcome {
    let mut shown = Vec::new();
    for s in ["0.295", "3/10", "0.31"] {
        let a = e(s);
        let lo = &a * int(5) - &a * &a * int(8) + powi(&a, 3) * int(4);
        let hi = &a * int(6) - &a * &a * int(12) + powi(&a, 3) * int(8);
        let three_a = &a * int(3);
        ensure(
            lo < three_a && three_a < hi,
            format!("3a outside the window for a = {s}"),
        )?;
        let set = IfsSet1D::off_center(&a).unwrap();
        let cert = kap_search(&set, 4, 10).map_err(|e| e.to_string())?;
        match cert.verdict {
            KapVerdict::InfeasibleAtDepth(d) if d <= 10 => shown.push(format!("a={s}: depth {d}")),
            other => return Err(format!("a = {s}: {other:?}")),
        }
    }
    Ok(shown.join(", "))
}

fn grid() -> BallSystem {
    BallSystem::grid_ifs(10, rat(19, 200), rat(1, 100), 0).unwrap()
}

fn c8_grid_numbers() -> Outcome {
    let (rho, d) = (rat(19, 200), rat(1, 100));
    let oracle = &rho * (int(1) - &rho) / &d;
    ensure(oracle == e("8.5975"), "oracle arithmetic")?;
    let tau = yavicoli_thickness(&grid())
        .map_err(|e| e.to_string())?
        .lower_bound;
    ensure(tau == Interval::point(oracle.clone()), format!("τ = {tau}"))?;
    let r = &rho * int(2) + &d;
    let thr = threshold(None, &Interval::from_rat(1, 2), &r, Mode::Standard)
        .map_err(|e| e.to_string())?;
    ensure(
        thr == Interval::point(rat(10, 3)),
        format!("threshold {thr}"),
    )?;
    let win = lambda_window(&grid(), &r, Mode::Standard).map_err(|e| e.to_string())?;
    let target = e("0.27938814");
    let dev = (win.lower.mid() - &target).abs() + win.lower.width();
    ensure(dev <= e("1e-6"), format!("window lower end {}", win.lower))?;
    Ok(format!(
        "τ = {}, threshold = {}, λ ≥ {}",
        exact_string(&oracle),
        exact_string(thr.lo()),
        win.lower.describe(10)
    ))
}

fn c9_hex_numbers() -> Outcome {
    let rho = f(&hex_radius());
    ensure(hex_radius() == rat(12179, 100000), "hex radius")?;
    let s3 = 3f64.sqrt();
    let tol = 1e-3;
    let mut shown = Vec::new();
    for (gamma, target) in [(int(1), 7.25137), (rat(99999, 100000), 7.25077)] {
        let sys = BallSystem::hex_packing(gamma.clone()).unwrap();
        let tau = yavicoli_thickness(&sys)
            .map_err(|e| e.to_string())?
            .lower_bound;
        let (lo, hi) = (f(tau.lo()), f(tau.hi()));
        ensure(
            lo - tol <= target && target <= hi + tol,
            format!("γ={gamma}: τ = {tau}"),
        )?;
        shown.push(format!(
            "τ(γ={}) = {}",
            exact_string(&gamma),
            tau.describe(6)
        ));
    }
    let closed = (1.0 + rho) * s3 / (2.0 - s3);
    ensure((closed - 7.25137).abs() < tol, "closed form oracle")?;
    let u = thickset_core::ballsys::hex_uniformity_constant(128);
    let oracle = (2.0 + s3) / s3 * rho;
    ensure(
        (u.to_f64_mid() - 0.26243).abs() <= 1e-4,
        format!("uniformity {u}"),
    )?;
    ensure(
        (u.to_f64_mid() - oracle).abs() <= 1e-12,
        "uniformity oracle",
    )?;
    shown.push(format!("uniformity {}", u.describe(6)));
    Ok(shown.join(", "))
}

fn linf(v: &[Exact]) -> Exact {
    v.iter().map(|x| x.abs()).max().unwrap()
}

fn c10_grid_midpoint() -> Outcome {
    let w = find_convex_combo_nd(&grid(), &rat(1, 2), &rat(1, 5), 8, Mode::Standard, 0)
        .map_err(|e| e.to_string())?;
    ensure(
        w.hypotheses.all_pass(),
        format!("hypotheses {:?}", w.hypotheses.verdict()),
    )?;
    ensure(
        f(w.residual.hi()) <= 1e-6,
        format!("residual {}", w.residual),
    )?;
    let (a, c, b) = (&w.points[0].ball, &w.points[1].ball, &w.points[2].ball);
    let defect: Vec<Exact> = (0..2)
        .map(|i| &c.center[i] - (&a.center[i] + &b.center[i]) / int(2))
        .collect();
    // Worst sup-norm defect over all points of the three balls.
    let worst = linf(&defect) + &c.radius + (&a.radius + &b.radius) / int(2);
    ensure(
        &worst <= w.residual.hi(),
        "midpoint defect exceeds the residual",
    )?;
    Ok(format!(
        "residual {:.3e}, midpoint defect {:.3e}",
        f(w.residual.hi()),
        f(&worst)
    ))
}

fn center_f64(b: &thickset_core::ballsys::Ball) -> (f64, f64) {
    (f(&b.center[0]), f(&b.center[1]))
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

fn c11_hex_equilateral() -> Outcome {
    let sys = BallSystem::hex_packing(rat(99999, 100000)).unwrap();
    let r = e("0.26243");
    let t = Triangle::equilateral(128);
    let shape = normalize_triangle(&t).map_err(|e| e.to_string())?;
    let thr = threshold(Some(&shape.alpha), &shape.lambda, &r, Mode::Standard)
        .map_err(|e| e.to_string())?;
    let oracle = 2.0 / (1.0 - 2.0 * f(&r));
    ensure(
        (thr.to_f64_mid() - oracle).abs() < 1e-12,
        format!("threshold {thr}"),
    )?;
    let w6 = find_triangle_nd(&sys, &t, &r, 6, Mode::Standard, 0).map_err(|e| e.to_string())?;
    ensure(
        w6.hypotheses.all_pass(),
        format!("hypotheses {:?}", w6.hypotheses.verdict()),
    )?;
    let threshold_check = w6
        .hypotheses
        .get("thickness_threshold")
        .ok_or("no threshold check")?;
    ensure(threshold_check.result.is_true(), "threshold check")?;
    let p: Vec<(f64, f64)> = w6.points.iter().map(|p| center_f64(&p.ball)).collect();
    let (xy, xz, yz) = (dist(p[0], p[1]), dist(p[0], p[2]), dist(p[1], p[2]));
    let dev = ((xz / xy) - 1.0).abs().max(((yz / xy) - 1.0).abs());
    ensure(dev <= 1e-4, format!("side ratios deviate by {dev:.3e}"))?;
    let w5 = find_triangle_nd(&sys, &t, &r, 5, Mode::Standard, 0).map_err(|e| e.to_string())?;
    let factor = w6.residual.to_f64_mid() / w5.residual.to_f64_mid();
    ensure(factor <= 0.13, format!("residual factor {factor:.4}"))?;
    Ok(format!(
        "threshold {:.5}, side deviation {dev:.1e}, residual {:.3e}, factor {factor:.5}",
        thr.to_f64_mid(),
        w6.residual.to_f64_mid()
    ))
}

/// `iv` lies in one depth-`d` middle-third cover interval `[k, k+1]/3^d`.
fn in_ternary_cover(iv: &Interval, d: u32) -> bool {
    let scale = powi(&int(3), d);
    let k = (iv.lo() * &scale).floor().to_integer();
    let mut candidates = vec![k.clone()];
    if iv.is_point() {
        candidates.push(k - 1u32);
    }
    candidates.into_iter().any(|k| {
        if k.is_negative() {
            return false;
        }
        let lo = Exact::from(k.clone()) / &scale;
        let hi = (Exact::from(k.clone()) + int(1)) / &scale;
        let digits = k.to_str_radix(3);
        let padded = digits.len() as u32 <= d && !digits.contains('1');
        padded && &lo <= iv.lo() && iv.hi() <= &hi
    })
}

fn c12_product_equilateral() -> Outcome {
    let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
    let t = Triangle::equilateral(128);
    let w = find_triangle_in_product(&set, &t, 40).map_err(|e| e.to_string())?;
    for (i, v) in w.vertices.iter().flatten().enumerate() {
        ensure(
            in_ternary_cover(v, 40),
            format!("coordinate {i} = {v} outside the depth-40 cover"),
        )?;
    }
    let side2 =
        |p: &[Interval; 2], q: &[Interval; 2]| (&p[0] - &q[0]).sqr() + (&p[1] - &q[1]).sqr();
    let [x, y, z] = &w.vertices;
    let (a, b, c) = (side2(x, y), side2(x, z), side2(y, z));
    // |u − v| ≤ 10⁻⁹ as sets, on squared lengths near 4/9.
    let spread = (&a - &b).abs().max(&(&a - &c).abs()).max(&(&b - &c).abs());
    ensure(
        f(spread.hi()) <= 1e-9,
        format!("side spread {}", spread.describe(4)),
    )?;
    ensure(
        f(w.residual.hi()) <= 1e-9,
        format!("residual {}", w.residual),
    )?;
    let l = difference_interval(&set, 10).map_err(|e| e.to_string())?;
    ensure(
        l == Interval::point(int(1)),
        format!("difference reach {l}"),
    )?;
    // Independent: the depth-10 cover of C − C covers [0, 1].
    let ivs = cover(&set, 10).intervals;
    let mut diffs: Vec<(Exact, Exact)> = Vec::with_capacity(ivs.len() * ivs.len());
    for p in &ivs {
        for q in &ivs {
            let lo = q.lo() - p.hi();
            let hi = q.hi() - p.lo();
            if hi.is_positive() {
                diffs.push((lo, hi));
            }
        }
    }
    diffs.sort();
    let mut reach = Exact::zero();
    for (lo, hi) in diffs {
        if lo <= reach && hi > reach {
            reach = hi;
        }
    }
    ensure(
        reach >= int(1),
        format!("difference cover reaches {}", exact_string(&reach)),
    )?;
    Ok(format!(
        "6 coordinates in depth-40 covers, spread {:.1e}, L = 1",
        f(spread.hi())
    ))
}

fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn small_rat() -> impl Strategy<Value = Exact> {
    (-2000i64..2000, 1i64..500).prop_map(|(n, d)| rat(n, d))
}

fn prop_interval_containment() -> Result<(), String> {
    let strat = (
        small_rat(),
        small_rat(),
        0i64..50,
        0i64..50,
        0i64..50,
        0i64..50,
        16u32..96,
    );
    runner()
        .run(&strat, |(x, y, e1, e2, e3, e4, bits)| {
            let ix = Interval::new(&x - rat(e1, 97), &x + rat(e2, 89)).unwrap();
            let iy = Interval::new(&y - rat(e3, 83), &y + rat(e4, 79)).unwrap();
            let checks = [
                (&ix + &iy).contains(&(&x + &y)),
                (&ix - &iy).contains(&(&x - &y)),
                (&ix * &iy).contains(&(&x * &y)),
                ix.sqr().contains(&(&x * &x)),
                ix.abs().contains(&x.abs()),
                ix.round_outward(bits).contains_interval(&ix),
            ];
            prop_assert!(checks.iter().all(|&c| c), "basic ops at x={x}, y={y}");
            if let Ok(q) = ix.div(&iy) {
                prop_assert!(y.is_zero() || q.contains(&(&x / &y)));
            }
            if x.is_positive() {
                let s = Interval::point(x.clone()).sqrt(bits).unwrap();
                prop_assert!(s.lo() * s.lo() <= x && x <= s.hi() * s.hi());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn prop_thickness_invariance() -> Result<(), String> {
    let strat = (
        1i64..60,
        61i64..64,
        prop_oneof![Just(true), Just(false)],
        small_rat(),
        small_rat(),
    );
    runner()
        .run(&strat, |(n, d, middle, mu, nu)| {
            prop_assume!(!mu.is_zero());
            let x = rat(n, d * 2);
            let set = if middle {
                IfsSet1D::middle_cantor(&x)
            } else {
                IfsSet1D::off_center(&(&x / int(2)))
            };
            let Ok(set) = set else { return Ok(()) };
            let img = set.affine_image(&mu, &nu).unwrap();
            // The gap structure maps exactly, so truncated values agree too.
            let a = newhouse_thickness(&set, 6).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let b = newhouse_thickness(&img, 6).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.tag, b.tag);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn prop_claim_containment() -> Result<String, String> {
    let set = IfsSet1D::middle_cantor(&rat(1, 3)).unwrap();
    let mut n = 0;
    for lam in [rat(1, 5), rat(7, 20), rat(1, 2)] {
        for depth in 0..=12 {
            let ok = check_claim_containment(&set, &lam, depth).map_err(|e| e.to_string())?;
            ensure(ok, format!("λ = {}, depth {depth}", exact_string(&lam)))?;
            n += 1;
        }
    }
    Ok(format!("{n} (λ, depth) pairs"))
}

fn norm_f64(v: (f64, f64), norm: Norm) -> f64 {
    match norm {
        Norm::L2 => v.0.hypot(v.1),
        Norm::Linf => v.0.abs().max(v.1.abs()),
    }
}

/// Sampled points of a designated child stay within `2·h_upper(C)` of the
/// two-level cover of `C` inside that child.
fn prop_sampled_h_bound(sys: &BallSystem) -> Result<f64, String> {
    let child = sys.designated().unwrap().0;
    let parent = sys.node(&[child]).map_err(|e| e.to_string())?;
    let mut cover_balls = Vec::new();
    for k in sys.children(&parent) {
        for g in sys.children(&k) {
            cover_balls.push((center_f64(&g.ball), f(&g.ball.radius)));
        }
    }
    let bound = 2.0 * f(h_upper(sys, &[]).map_err(|e| e.to_string())?.hi());
    let (c, rad) = (center_f64(&parent.ball), f(&parent.ball.radius));
    let norm = sys.norm();
    let worst = std::cell::Cell::new(0.0f64);
    runner()
        .run(&(-1.0f64..1.0, -1.0f64..1.0), |(u, v)| {
            prop_assume!(norm_f64((u, v), norm) <= 1.0);
            let x = (c.0 + rad * u, c.1 + rad * v);
            let gap = cover_balls
                .iter()
                .map(|&(q, r)| norm_f64((x.0 - q.0, x.1 - q.1), norm) - r)
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            worst.set(worst.get().max(gap));
            prop_assert!(gap <= bound + 1e-12, "gap {gap} above {bound}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(worst.get() / bound)
}

fn prop_subset_thickness() -> Result<usize, String> {
    let systems = [
        grid(),
        BallSystem::grid_ifs(10, rat(19, 200), rat(1, 100), 7).unwrap(),
        BallSystem::hex_packing(int(1)).unwrap(),
        BallSystem::hex_packing(rat(99999, 100000)).unwrap(),
    ];
    let mut n = 0;
    for sys in &systems {
        let tau = yavicoli_thickness(sys)
            .map_err(|e| e.to_string())?
            .lower_bound;
        let kids = sys.children(&sys.root_node()).len();
        for child in 0..kids {
            if !sys.child_is_isolated(child).map_err(|e| e.to_string())? {
                continue;
            }
            let s = subset_thickness(sys, child).map_err(|e| e.to_string())?;
            ensure(
                s.bound.lo() * int(2) >= *tau.lo(),
                format!("child {child}: {} < τ/2", s.bound),
            )?;
            n += 1;
        }
    }
    Ok(n)
}

fn c13_properties() -> Outcome {
    prop_interval_containment().map_err(|e| format!("interval containment: {e}"))?;
    prop_thickness_invariance().map_err(|e| format!("affine invariance: {e}"))?;
    let claim = prop_claim_containment()?;
    let grid_ratio = prop_sampled_h_bound(&grid()).map_err(|e| format!("sampled h, grid: {e}"))?;
    let hex = BallSystem::hex_packing(rat(99999, 100000)).unwrap();
    let hex_ratio = prop_sampled_h_bound(&hex).map_err(|e| format!("sampled h, hex: {e}"))?;
    let subsets = prop_subset_thickness()?;
    let dim = hausdorff_lower_bound(&Interval::point(int(1)), 128).map_err(|e| e.to_string())?;
    let log_ratio = 2f64.ln() / 3f64.ln();
    ensure(
        (dim.to_f64_mid() - log_ratio).abs() <= 1e-9 && f(&dim.width()) <= 1e-9,
        format!("dimension bound {dim}"),
    )?;
    Ok(format!(
        "{CASES} cases each; {claim}; sampled h ≤ {grid_ratio:.3}·bound (grid), {hex_ratio:.3}·bound (hex); {subsets} subsets"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("middle-third thickness is exactly 1", c1_middle_third),
        ("off-center set thickness is exactly 1", c2_off_center),
        ("middle-ε thickness matches (1-ε)/(2ε)", c3_middle_family),
        (
            "three-term progression in the middle-third set",
            c4_three_term,
        ),
        ("no three-term progression for ε = 2/5", c5_no_three_term),
        (
            "four-term progression in the middle-third set",
            c6_four_term,
        ),
        (
            "no four-term progression in off-center sets",
            c7_off_center_no_four_term,
        ),
        (
            "grid system thickness, threshold and λ-window",
            c8_grid_numbers,
        ),
        ("hexagonal system thickness and uniformity", c9_hex_numbers),
        ("grid midpoint witness", c10_grid_midpoint),
        ("hexagonal equilateral witness", c11_hex_equilateral),
        ("equilateral triangle in C × C", c12_product_equilateral),
        ("property suites", c13_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
