//! Three-point configurations and progressions in thick Cantor sets.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cantor::{certified_thickness, combo_cover};
use crate::cantor::{
    cover_within, membership, newhouse_thickness, require_thick, Cover1D, IfsSet1D, Membership,
    ThicknessReport, ThicknessTag,
};
use crate::error::{Error, Result};
use crate::exec::{self, Budget};
use crate::report::Verdict;
use crate::scalar::{
    exact_string, int, ln, ln2, max_exact, min_exact, rat, serde_exact, Certainty, Exact, Interval,
};

/// Largest first-level gap of a set with hull [0,1], leftmost on ties.
pub fn largest_gap(set: &IfsSet1D) -> Result<(Exact, Exact)> {
    if !set.is_normalized() {
        return Err(Error::invalid(
            "largest_gap expects a set normalized to [0,1]",
        ));
    }
    let mut best: Option<Interval> = None;
    for g in set.first_level_gaps() {
        if best.as_ref().is_none_or(|b| g.width() > b.width()) {
            best = Some(g);
        }
    }
    let g = best.ok_or_else(|| Error::invalid("set has no gap"))?;
    let (a, b) = g.into_bounds();
    Ok((a, b))
}

/// The two intervals `[λk₂, λ]` and `[λk₂ + (1−λ)k₁, λ + (1−λ)k₁]`.
pub fn itilde(lambda: &Exact, k1: &Exact, k2: &Exact) -> Result<[Interval; 2]> {
    check_lambda(lambda)?;
    if !(k1.is_positive() && k1 < k2 && k2 < &int(1)) {
        return Err(Error::invalid("need 0 < k1 < k2 < 1"));
    }
    let mu = int(1) - lambda;
    Ok([
        Interval::new(lambda * k2, lambda.clone())?,
        Interval::new(lambda * k2 + &mu * k1, lambda + &mu * k1)?,
    ])
}

fn check_lambda(lambda: &Exact) -> Result<()> {
    if !lambda.is_positive() || lambda >= &int(1) {
        return Err(Error::invalid(format!(
            "lambda {} outside (0,1)",
            exact_string(lambda)
        )));
    }
    Ok(())
}

/// Branch indices whose images lie left of `k1`, and right of `k2`.
fn split_branches(set: &IfsSet1D, k1: &Exact, k2: &Exact) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for i in 0..set.branch_count() {
        let im = set.branch_image(i);
        if im.hi() <= k1 {
            left.push(i);
        } else if im.lo() >= k2 {
            right.push(i);
        }
    }
    (left, right)
}

fn sub_cover(set: &IfsSet1D, branches: &[usize], depth: u32) -> Cover1D {
    let mut level: Vec<Interval> = branches.iter().map(|&i| set.branch_image(i)).collect();
    for _ in 1..depth.max(1) {
        let next: Vec<Vec<Interval>> = exec::map(&level, |iv| set.children(iv));
        level = next.into_iter().flatten().collect();
    }
    Cover1D {
        depth: depth.max(1),
        intervals: level,
    }
}

/// Checks `Ĩ_λ ⊆ (1−λ)A + λB` on depth-`depth` covers, with
/// `A = C ∩ [0,k₁]` and `B = C ∩ [k₂,1]`.
pub fn check_claim_containment(set: &IfsSet1D, lambda: &Exact, depth: u32) -> Result<bool> {
    check_lambda(lambda)?;
    require_thick(set)?;
    let (set, _, _) = set.normalized();
    let (k1, k2) = largest_gap(&set)?;
    let (left, right) = split_branches(&set, &k1, &k2);
    let a = sub_cover(&set, &left, depth);
    let b = sub_cover(&set, &right, depth);
    let sum = combo_cover(&a, &b, &(int(1) - lambda), lambda);
    let pieces = itilde(lambda, &k1, &k2)?;
    Ok(pieces.iter().all(|p| sum.covers(p)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessPoint {
    pub role: String,
    pub enclosure: Interval,
    pub status: Membership,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigurationWitness1D {
    /// Ordered `a`, `c`, `b`.
    pub points: Vec<WitnessPoint>,
    #[serde(with = "serde_exact")]
    pub lambda: Exact,
    /// Bound on `|(1−λ)a + λb − c|`.
    #[serde(with = "serde_exact")]
    pub residual: Exact,
    pub depth_used: u32,
    pub convention: String,
    /// Set when cover endpoints realize the configuration exactly.
    #[serde(serialize_with = "crate::scalar::serde_opt_exact_vec::serialize")]
    pub exact_points: Option<Vec<Exact>>,
    pub nodes_explored: u64,
}

impl ConfigurationWitness1D {
    pub fn a(&self) -> &Interval {
        &self.points[0].enclosure
    }

    pub fn c(&self) -> &Interval {
        &self.points[1].enclosure
    }

    pub fn b(&self) -> &Interval {
        &self.points[2].enclosure
    }
}

/// First pair `(I, J)` in lexicographic child order that stays compatible
/// with `c ∈ (1−λ)I + λJ` down to `depth`.
#[allow(clippy::too_many_arguments)]
fn combo_dfs(
    set: &IfsSet1D,
    i: Interval,
    j: Interval,
    level: u32,
    depth: u32,
    lambda: &Exact,
    c: &Exact,
    budget: &Budget,
) -> Result<Option<(Interval, Interval)>> {
    budget.spend(1)?;
    let mu = int(1) - lambda;
    let lo = &mu * i.lo() + lambda * j.lo();
    let hi = &mu * i.hi() + lambda * j.hi();
    if c < &lo || c > &hi {
        return Ok(None);
    }
    if level == depth {
        return Ok(Some((i, j)));
    }
    for ci in set.children(&i) {
        for cj in set.children(&j) {
            if let Some(hit) = combo_dfs(set, ci.clone(), cj, level + 1, depth, lambda, c, budget)?
            {
                return Ok(Some(hit));
            }
        }
    }
    Ok(None)
}

struct RawCombo {
    a: Interval,
    b: Interval,
    c: Exact,
}

fn combo_normalized(
    set: &IfsSet1D,
    lambda: &Exact,
    depth: u32,
    budget: &Budget,
) -> Result<RawCombo> {
    let (k1, k2) = largest_gap(set)?;
    let (left, right) = split_branches(set, &k1, &k2);
    let mut starts = Vec::new();
    for &l in &left {
        for &r in &right {
            starts.push((set.branch_image(l), set.branch_image(r)));
        }
    }
    let c = k2.clone();
    let depth = depth.max(1);
    let found = exec::find_map_first(&starts, |(i, j)| {
        match combo_dfs(set, i.clone(), j.clone(), 1, depth, lambda, &c, budget) {
            Ok(Some(hit)) => Some(Ok(hit)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match found {
        Some(Ok((a, b))) => Ok(RawCombo { a, b, c }),
        Some(Err(e)) => Err(e),
        None => Err(Error::unknown(
            "no compatible cover pair survives; refinement exhausted",
        )),
    }
}

fn exact_combo(a: &Interval, b: &Interval, c: &Exact, lambda: &Exact) -> Option<(Exact, Exact)> {
    let mu = int(1) - lambda;
    for x in [a.lo(), a.hi()] {
        for y in [b.lo(), b.hi()] {
            if &(&mu * x + lambda * y) == c {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}

/// Points `a < c < b` of the set with `c = (1−λ)a + λb`, `c` a gap endpoint.
pub fn find_convex_combo(
    set: &IfsSet1D,
    lambda: &Exact,
    depth: u32,
) -> Result<ConfigurationWitness1D> {
    find_convex_combo_with(set, lambda, depth, &Budget::from_env())
}

pub fn find_convex_combo_with(
    set: &IfsSet1D,
    lambda: &Exact,
    depth: u32,
    budget: &Budget,
) -> Result<ConfigurationWitness1D> {
    check_lambda(lambda)?;
    require_thick(set)?;
    let (norm, w, shift) = set.normalized();
    let reflect = lambda < &rat(1, 2);
    let (work, lam) = if reflect {
        (norm.reflected(), int(1) - lambda)
    } else {
        (norm, lambda.clone())
    };
    let raw = combo_normalized(&work, &lam, depth, budget)?;
    let exact = exact_combo(&raw.a, &raw.b, &raw.c, &lam);
    type Back = Box<dyn Fn(&Exact) -> Exact>;
    let back: Back = if reflect {
        let (w, s) = (w.clone(), shift.clone());
        Box::new(move |u: &Exact| &s + &w * (int(1) - u))
    } else {
        let (w, s) = (w.clone(), shift.clone());
        Box::new(move |u: &Exact| &s + &w * u)
    };
    let map_iv = |iv: &Interval| Interval::spanning(back(iv.lo()), back(iv.hi()));
    // Under reflection the right-hand piece of the copy becomes the left one.
    let (a, b) = if reflect {
        (map_iv(&raw.b), map_iv(&raw.a))
    } else {
        (map_iv(&raw.a), map_iv(&raw.b))
    };
    let c = back(&raw.c);
    let exact_points = exact.map(|(x, y)| {
        let (x, y) = (back(&x), back(&y));
        if reflect {
            vec![y, c.clone(), x]
        } else {
            vec![x, c.clone(), y]
        }
    });
    let d = depth.max(1);
    let residual = (int(1) - lambda) * a.width() + lambda * b.width();
    let status_c = membership(set, &c, d);
    Ok(ConfigurationWitness1D {
        points: vec![
            WitnessPoint {
                role: "a".into(),
                status: Membership::InCoverAtDepth(d),
                enclosure: a,
            },
            WitnessPoint {
                role: "c".into(),
                enclosure: Interval::point(c),
                status: status_c,
            },
            WitnessPoint {
                role: "b".into(),
                status: Membership::InCoverAtDepth(d),
                enclosure: b,
            },
        ],
        lambda: lambda.clone(),
        residual,
        depth_used: d,
        convention: "c = (1-lambda)*a + lambda*b".into(),
        exact_points,
        nodes_explored: budget.used(),
    })
}

pub fn find_3ap(set: &IfsSet1D, depth: u32) -> Result<ConfigurationWitness1D> {
    find_convex_combo(set, &rat(1, 2), depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum KapVerdict {
    Feasible {
        /// Feasible starts at `y_mid`, and the feasible step range.
        x: Interval,
        y: Interval,
        #[serde(with = "serde_exact")]
        x_mid: Exact,
        #[serde(with = "serde_exact")]
        y_mid: Exact,
        points: Vec<Interval>,
        #[serde(serialize_with = "crate::scalar::serde_opt_exact_vec::serialize")]
        exact_points: Option<Vec<Exact>>,
        surviving_tuples: usize,
    },
    InfeasibleAtDepth(u32),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KapCertificate {
    pub k: usize,
    pub depth: u32,
    pub verdict: KapVerdict,
    #[serde(with = "serde_exact")]
    pub y_min: Exact,
    pub explored_nodes: u64,
}

/// Exact projection onto `y` of `{x + j·y ∈ I_j for all j, y ≥ y_min}`.
pub fn tuple_step_range(tuple: &[Interval], y_min: &Exact) -> Option<Interval> {
    let mut lo = y_min.clone();
    let mut hi: Option<Exact> = None;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let gap = int((j - i) as i64);
            let a = (tuple[j].lo() - tuple[i].hi()) / &gap;
            let b = (tuple[j].hi() - tuple[i].lo()) / &gap;
            if a > lo {
                lo = a;
            }
            if hi.as_ref().is_none_or(|h| &b < h) {
                hi = Some(b);
            }
        }
    }
    let hi = hi?;
    (lo <= hi).then(|| Interval::new(lo, hi).expect("checked"))
}

fn tuple_x_range(tuple: &[Interval], y: &Exact) -> Option<Interval> {
    let mut acc: Option<Interval> = None;
    for (j, iv) in tuple.iter().enumerate() {
        let s = iv.shift(&-(y * int(j as i64)));
        acc = Some(match acc {
            None => s,
            Some(a) => a.intersection(&s)?,
        });
    }
    acc
}

#[derive(Clone)]
struct Tuple {
    /// Index of the first-level branch each member descends from.
    roots: Vec<usize>,
    ivs: Vec<Interval>,
}

fn tuple_children(set: &IfsSet1D, t: &Tuple) -> Vec<Tuple> {
    let k = t.ivs.len();
    let b = set.branch_count();
    let kids: Vec<Vec<Interval>> = t.ivs.iter().map(|iv| set.children(iv)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        // Members sharing a parent must keep nondecreasing child indices.
        let ordered = (1..k).all(|m| t.ivs[m] != t.ivs[m - 1] || idx[m] >= idx[m - 1]);
        if ordered {
            out.push(Tuple {
                roots: t.roots.clone(),
                ivs: (0..k).map(|m| kids[m][idx[m]].clone()).collect(),
            });
        }
        let mut m = k;
        loop {
            if m == 0 {
                return out;
            }
            m -= 1;
            idx[m] += 1;
            if idx[m] < b {
                break;
            }
            idx[m] = 0;
        }
    }
}

fn first_level_tuples(set: &IfsSet1D, k: usize) -> Vec<Tuple> {
    let b = set.branch_count();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let split = idx.iter().any(|&v| v != idx[0]);
        if split {
            out.push(Tuple {
                roots: idx.clone(),
                ivs: idx.iter().map(|&i| set.branch_image(i)).collect(),
            });
        }
        // Next nondecreasing index vector.
        let mut m = k;
        loop {
            if m == 0 {
                return out;
            }
            m -= 1;
            if idx[m] + 1 < b {
                idx[m] += 1;
                let v = idx[m];
                for slot in idx.iter_mut().skip(m + 1) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Searches for a `k`-term progression among split tuples of cover
/// intervals, breadth first, pruning tuples with an empty step range.
pub fn kap_search(set: &IfsSet1D, k: usize, depth: u32) -> Result<KapCertificate> {
    kap_search_with(set, k, depth, &Budget::from_env())
}

pub fn kap_search_with(
    set: &IfsSet1D,
    k: usize,
    depth: u32,
    budget: &Budget,
) -> Result<KapCertificate> {
    if k < 3 {
        return Err(Error::invalid("kap_search needs k ≥ 3"));
    }
    if depth < 1 {
        return Err(Error::invalid("kap_search needs depth ≥ 1"));
    }
    let (norm, w, shift) = set.normalized();
    let g_min = norm
        .first_level_gaps()
        .iter()
        .map(|g| g.width())
        .min()
        .expect("at least one gap");
    let y_min = &g_min / int(k as i64 - 1);
    let first = first_level_tuples(&norm, k);
    let tested = first.len() as u64;
    let mut frontier: Vec<Tuple> = first
        .into_iter()
        .filter(|t| tuple_step_range(&t.ivs, &y_min).is_some())
        .collect();
    let cert = |verdict, explored| KapCertificate {
        k,
        depth,
        verdict,
        y_min: &y_min * &w,
        explored_nodes: explored,
    };
    if let Err(e) = budget.spend(tested) {
        return Ok(cert(KapVerdict::Unknown(e.to_string()), budget.used()));
    }
    if frontier.is_empty() {
        return Ok(cert(KapVerdict::InfeasibleAtDepth(1), budget.used()));
    }
    for level in 2..=depth {
        let expanded: Vec<Result<Vec<Tuple>>> = exec::map(&frontier, |t| {
            let kids = tuple_children(&norm, t);
            budget.spend(kids.len() as u64)?;
            Ok(kids
                .into_iter()
                .filter(|c| tuple_step_range(&c.ivs, &y_min).is_some())
                .collect())
        });
        let mut next = Vec::new();
        for r in expanded {
            match r {
                Ok(v) => next.extend(v),
                Err(e) => return Ok(cert(KapVerdict::Unknown(e.to_string()), budget.used())),
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return Ok(cert(KapVerdict::InfeasibleAtDepth(level), budget.used()));
        }
    }
    let t = &frontier[0];
    let y = tuple_step_range(&t.ivs, &y_min).expect("frontier tuples are feasible");
    let y_mid = y.mid();
    let x = tuple_x_range(&t.ivs, &y_mid).expect("projection is exact");
    let x_mid = x.mid();
    let to_orig = |u: &Exact| &shift + &w * u;
    let exact_points = exact_progression(set, &t.ivs, k, &to_orig);
    let points = t.ivs.iter().map(|iv| iv.scale(&w).shift(&shift)).collect();
    debug_assert!(t.roots.iter().any(|&r| r != t.roots[0]));
    Ok(cert(
        KapVerdict::Feasible {
            x: x.scale(&w).shift(&shift),
            y: y.scale(&w),
            x_mid: to_orig(&x_mid),
            y_mid: &y_mid * &w,
            points,
            exact_points,
            surviving_tuples: frontier.len(),
        },
        budget.used(),
    ))
}

/// An exact progression through endpoints of the tuple, if one exists.
fn exact_progression(
    set: &IfsSet1D,
    ivs: &[Interval],
    k: usize,
    to_orig: &dyn Fn(&Exact) -> Exact,
) -> Option<Vec<Exact>> {
    for x in [ivs[0].lo(), ivs[0].hi()] {
        for z in [ivs[k - 1].lo(), ivs[k - 1].hi()] {
            let y = (z - x) / int(k as i64 - 1);
            if !y.is_positive() {
                continue;
            }
            let pts: Vec<Exact> = (0..k).map(|j| to_orig(&(x + &y * int(j as i64)))).collect();
            if pts
                .iter()
                .all(|p| membership(set, p, 64) == Membership::InCertified)
            {
                return Some(pts);
            }
        }
    }
    None
}

/// Symmetric 4-term progression `½ ± t`, `½ ± 3t` in the middle-ε set.
///
/// Refines `(C − ½) ∩ ⅓(C − ½)` through pairs of cover intervals of the
/// right half, preferring exact endpoint solutions.
pub fn shmerkin_4ap(epsilon: &Exact, depth: u32) -> Result<KapCertificate> {
    if epsilon > &rat(1, 3) {
        return Err(Error::invalid(
            "the symmetric construction needs epsilon ≤ 1/3",
        ));
    }
    let set = IfsSet1D::middle_cantor(epsilon)?;
    let budget = Budget::from_env();
    let half = rat(1, 2);
    let right = set.branch_image(1);
    // x = ½ + t ∈ I and 3x − 1 = ½ + 3t ∈ J.
    fn t_range(i: &Interval, j: &Interval, half: &Exact) -> Option<Interval> {
        let a = i.shift(&-half);
        let b = j.shift(&-half).scale(&rat(1, 3));
        let r = a.intersection(&b)?;
        r.hi().is_positive().then_some(r)
    }
    fn dfs(
        set: &IfsSet1D,
        i: Interval,
        j: Interval,
        level: u32,
        depth: u32,
        half: &Exact,
        budget: &Budget,
    ) -> Result<Option<(Interval, Interval)>> {
        budget.spend(1)?;
        if t_range(&i, &j, half).is_none() {
            return Ok(None);
        }
        if level == depth {
            return Ok(Some((i, j)));
        }
        for ci in set.children(&i) {
            for cj in set.children(&j) {
                if let Some(hit) = dfs(set, ci.clone(), cj, level + 1, depth, half, budget)? {
                    return Ok(Some(hit));
                }
            }
        }
        Ok(None)
    }
    let d = depth.max(1);
    let hit = dfs(&set, right.clone(), right, 1, d, &half, &budget)?;
    let (i, j) = hit.ok_or_else(|| Error::unknown("no t survives refinement"))?;
    let t = t_range(&i, &j, &half).expect("checked in search");
    let mut exact_t = None;
    for x in [i.lo(), i.hi()] {
        let tt = x - &half;
        let y = &half + &tt * int(3);
        if tt.is_positive() && (&y == j.lo() || &y == j.hi()) {
            exact_t = Some(tt);
            break;
        }
    }
    let prog = |t: &Interval| -> Vec<Interval> {
        [-3, -1, 1, 3]
            .iter()
            .map(|&m| t.scale(&int(m)).shift(&half))
            .collect()
    };
    let (points, exact_points) = match &exact_t {
        Some(tt) => {
            let p = prog(&Interval::point(tt.clone()));
            let e: Vec<Exact> = p.iter().map(|iv| iv.lo().clone()).collect();
            let certified = e
                .iter()
                .all(|x| membership(&set, x, 64) == Membership::InCertified);
            (p, certified.then_some(e))
        }
        None => (prog(&t), None),
    };
    let tt = exact_t
        .clone()
        .map(Interval::point)
        .unwrap_or_else(|| t.clone());
    Ok(KapCertificate {
        k: 4,
        depth: d,
        verdict: KapVerdict::Feasible {
            x: tt.scale(&int(-3)).shift(&half),
            y: tt.scale(&int(2)),
            x_mid: &half - tt.mid() * int(3),
            y_mid: tt.mid() * int(2),
            points,
            exact_points,
            surviving_tuples: 1,
        },
        y_min: Exact::zero(),
        explored_nodes: budget.used(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapLemmaReport1D {
    pub hull_intersect: bool,
    pub interwoven: Certainty,
    pub thickness: [Interval; 2],
    pub thickness_product: Interval,
    pub verdict: Verdict,
}

/// Certified "`inner` does not lie in a gap of `outer`".
fn not_in_gap_of(inner: &IfsSet1D, outer: &IfsSet1D, depth: u32) -> Certainty {
    let h = inner.hull();
    for d in 0..=depth {
        let hits = cover_within(outer, d, h);
        if hits.is_empty() {
            return Certainty::False;
        }
        // Cover endpoints are members of the outer set.
        if hits
            .iter()
            .any(|iv| h.contains(iv.lo()) || h.contains(iv.hi()))
        {
            return Certainty::True;
        }
    }
    Certainty::Unknown
}

fn thickness_enclosure(set: &IfsSet1D) -> Interval {
    match certified_thickness(set) {
        Ok(r) => r.enclosure(),
        Err(_) => match newhouse_thickness(set, crate::cantor::default_thickness_depth(set)) {
            Ok(ThicknessReport {
                value,
                tag: ThicknessTag::Truncated,
                ..
            }) => Interval::new(Exact::zero(), value).expect("nonnegative"),
            Ok(r) => r.enclosure(),
            Err(_) => Interval::new(Exact::zero(), int(1_000_000)).expect("ordered"),
        },
    }
}

/// Hypotheses of the Gap Lemma for two sets: hull overlap, neither inside
/// a gap of the other, and `τ₁τ₂ ≥ 1`.
pub fn gap_lemma_check_1d(c1: &IfsSet1D, c2: &IfsSet1D, depth: u32) -> GapLemmaReport1D {
    let hull_intersect = c1.hull().overlaps(c2.hull());
    let interwoven = not_in_gap_of(c1, c2, depth).and(not_in_gap_of(c2, c1, depth));
    let t1 = thickness_enclosure(c1);
    let t2 = thickness_enclosure(c2);
    let prod = &t1 * &t2;
    let one = Interval::point(int(1));
    let thick = prod.ge(&one);
    let verdict = if !hull_intersect {
        Verdict::Fail("hulls disjoint".into())
    } else if interwoven == Certainty::False {
        Verdict::Fail("one set lies in a gap of the other".into())
    } else if thick == Certainty::False {
        Verdict::Fail(format!("thickness product {} < 1", prod))
    } else if interwoven == Certainty::Unknown {
        Verdict::Unknown(format!("gap structure undecided to depth {depth}"))
    } else if thick == Certainty::Unknown {
        Verdict::Unknown(format!("thickness product {} not certified ≥ 1", prod))
    } else {
        Verdict::HypothesesHold
    };
    GapLemmaReport1D {
        hull_intersect,
        interwoven,
        thickness: [t1, t2],
        thickness_product: prod,
        verdict,
    }
}

/// Enclosure of `log 2 / log(2 + 1/τ)`, increasing in τ.
pub fn hausdorff_lower_bound(tau: &Interval, bits: u32) -> Result<Interval> {
    if !tau.lo().is_positive() {
        return Err(Error::Domain("thickness must be positive".into()));
    }
    let l2 = ln2(bits);
    let at = |t: &Exact| -> Result<Interval> {
        let arg = Interval::point(int(2) + t.recip());
        l2.div(&ln(&arg, bits)?)
    };
    let lo = at(tau.lo())?;
    let hi = if tau.is_point() {
        lo.clone()
    } else {
        at(tau.hi())?
    };
    Interval::new(
        min_exact(lo.lo(), hi.lo()).clone(),
        max_exact(lo.hi(), hi.hi()).clone(),
    )
}

/// The single reflection-symmetric witness check used by tests and the CLI.
pub fn witness_is_consistent(w: &ConfigurationWitness1D) -> bool {
    let mu = int(1) - &w.lambda;
    let comb = w.a().scale(&mu) + w.b().scale(&w.lambda);
    let slack = Interval::new(-w.residual.clone(), w.residual.clone()).expect("residual ≥ 0");
    (comb + slack).overlaps(w.c()) && w.a().hi() < w.b().lo() && !w.residual.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{pow2, powi};

    fn third() -> IfsSet1D {
        IfsSet1D::middle_cantor(&rat(1, 3)).unwrap()
    }

    #[test]
    fn largest_gap_examples() {
        assert_eq!(largest_gap(&third()).unwrap(), (rat(1, 3), rat(2, 3)));
        let oc = IfsSet1D::off_center(&rat(3, 10)).unwrap();
        assert_eq!(largest_gap(&oc).unwrap(), (rat(3, 10), rat(6, 10)));
        let m = IfsSet1D::middle_cantor(&rat(1, 5)).unwrap();
        assert_eq!(largest_gap(&m).unwrap(), (rat(2, 5), rat(3, 5)));
    }

    #[test]
    fn itilde_examples() {
        let [p, q] = itilde(&rat(1, 2), &rat(1, 3), &rat(2, 3)).unwrap();
        assert_eq!(p, Interval::new(rat(1, 3), rat(1, 2)).unwrap());
        assert_eq!(q, Interval::new(rat(1, 2), rat(2, 3)).unwrap());
        assert!(itilde(&rat(1, 2), &rat(1, 2), &rat(1, 2)).is_err());
    }

    #[test]
    fn claim_containment_small_depths() {
        for d in 1..=8 {
            assert!(check_claim_containment(&third(), &rat(1, 2), d).unwrap());
            assert!(check_claim_containment(&third(), &rat(1, 5), d).unwrap());
        }
        let thin = IfsSet1D::middle_cantor(&rat(2, 5)).unwrap();
        assert!(check_claim_containment(&thin, &rat(1, 2), 3).is_err());
    }

    #[test]
    fn three_ap_middle_third() {
        let w = find_3ap(&third(), 20).unwrap();
        assert_eq!(w.c(), &Interval::point(rat(2, 3)));
        assert!(w.residual <= powi(&rat(1, 3), 20) * int(2));
        assert!(witness_is_consistent(&w));
        assert_eq!(w.exact_points, Some(vec![rat(1, 3), rat(2, 3), int(1)]));
    }

    #[test]
    fn combo_below_half_uses_reflection() {
        let lam = rat(1, 3);
        let w = find_convex_combo(&third(), &lam, 12).unwrap();
        assert!(witness_is_consistent(&w));
        assert_eq!(
            w.residual,
            (int(1) - &lam) * w.a().width() + &lam * w.b().width()
        );
        assert_eq!(w.points[1].status, Membership::InCertified);
    }

    #[test]
    fn thin_sets_are_refused() {
        let thin = IfsSet1D::middle_cantor(&rat(2, 5)).unwrap();
        assert!(matches!(find_3ap(&thin, 5), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn shmerkin_examples() {
        let c = shmerkin_4ap(&rat(1, 3), 8).unwrap();
        match c.verdict {
            KapVerdict::Feasible { exact_points, .. } => {
                assert_eq!(
                    exact_points,
                    Some(vec![int(0), rat(1, 3), rat(2, 3), int(1)])
                );
            }
            v => panic!("unexpected {v:?}"),
        }
        let c = shmerkin_4ap(&rat(1, 4), 10).unwrap();
        assert!(matches!(c.verdict, KapVerdict::Feasible { .. }));
        assert!(shmerkin_4ap(&rat(2, 5), 4).is_err());
    }

    #[test]
    fn gap_lemma_examples() {
        let c = third();
        assert!(gap_lemma_check_1d(&c, &c, 6).verdict.holds());
        let far = c.affine_image(&int(1), &int(10)).unwrap();
        assert_eq!(
            gap_lemma_check_1d(&c, &far, 6).verdict,
            Verdict::Fail("hulls disjoint".into())
        );
        let a = c.affine_image(&rat(-1, 2), &int(0)).unwrap();
        for t in [rat(1, 3), rat(1, 2), rat(5, 12)] {
            let b = c.affine_image(&rat(1, 2), &-t).unwrap();
            assert!(gap_lemma_check_1d(&a, &b, 8).verdict.holds());
        }
    }

    #[test]
    fn hausdorff_examples() {
        let h = hausdorff_lower_bound(&Interval::point(int(1)), 128).unwrap();
        let expect = std::f64::consts::LN_2 / 3f64.ln();
        assert!((h.to_f64_mid() - expect).abs() < 1e-12);
        let h = hausdorff_lower_bound(&Interval::point(int(1_000_000)), 128).unwrap();
        assert!(h.lo() > &rat(99, 100));
        let h = hausdorff_lower_bound(&Interval::from_rat(1, 2), 128).unwrap();
        assert!(h.contains(&rat(1, 2)));
        assert!(h.width() < pow2(-100));
        assert!(hausdorff_lower_bound(&Interval::zero(), 64).is_err());
    }
}
