//! Self-similar compact sets on the line.
//!
//! A set is an ordered list of contracting maps `x ↦ s·x + o` acting on a
//! hull interval. Cover intervals are generated from the relative position
//! of each branch image inside the hull, so no maps are composed explicitly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::scalar::{exact_string, int, max_exact, powi, rat, serde_exact, Exact, Interval};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineMap1D {
    #[serde(with = "serde_exact")]
    pub scale: Exact,
    #[serde(with = "serde_exact")]
    pub offset: Exact,
}

impl AffineMap1D {
    pub fn new(scale: Exact, offset: Exact) -> Result<Self> {
        if !scale.is_positive() || scale >= int(1) {
            return Err(Error::invalid(format!(
                "branch scale {} outside (0,1)",
                exact_string(&scale)
            )));
        }
        Ok(AffineMap1D { scale, offset })
    }

    pub fn apply(&self, x: &Exact) -> Exact {
        &self.scale * x + &self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IfsSet1D {
    hull: Interval,
    branches: Vec<AffineMap1D>,
    #[serde(skip)]
    rel: Vec<(Exact, Exact)>,
}

impl IfsSet1D {
    pub fn new(hull: Interval, branches: Vec<AffineMap1D>) -> Result<Self> {
        if hull.is_point() {
            return Err(Error::invalid("hull must have positive length"));
        }
        if branches.len() < 2 {
            return Err(Error::invalid("at least two branches are required"));
        }
        let w = hull.width();
        let mut rel = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let lo = b.apply(hull.lo());
            let hi = b.apply(hull.hi());
            if !hull.contains(&lo) || !hull.contains(&hi) {
                return Err(Error::invalid(format!(
                    "branch {i} maps the hull outside itself"
                )));
            }
            rel.push(((lo - hull.lo()) / &w, (hi - hull.lo()) / &w));
        }
        for i in 1..rel.len() {
            if rel[i - 1].1 >= rel[i].0 {
                return Err(Error::invalid(format!(
                    "branch images {} and {} overlap or are out of order",
                    i - 1,
                    i
                )));
            }
        }
        if !rel[0].0.is_zero() || !rel[rel.len() - 1].1.is_one() {
            return Err(Error::invalid(
                "outer branch images must share the hull endpoints",
            ));
        }
        Ok(IfsSet1D {
            hull,
            branches,
            rel,
        })
    }

    /// Two branches of scale (1−ε)/2 on [0,1].
    pub fn middle_cantor(epsilon: &Exact) -> Result<Self> {
        if !epsilon.is_positive() || epsilon >= &int(1) {
            return Err(Error::invalid(format!(
                "epsilon {} outside (0,1)",
                exact_string(epsilon)
            )));
        }
        let s = (int(1) - epsilon) / int(2);
        let o = (int(1) + epsilon) / int(2);
        IfsSet1D::new(
            Interval::new(int(0), int(1))?,
            vec![
                AffineMap1D::new(s.clone(), int(0))?,
                AffineMap1D::new(s, o)?,
            ],
        )
    }

    /// [0,a] ∪ [2a,1] at the first step, for 0 < a < 1/3.
    pub fn off_center(a: &Exact) -> Result<Self> {
        if !a.is_positive() || a >= &rat(1, 3) {
            return Err(Error::invalid(format!(
                "off-center parameter {} outside (0,1/3)",
                exact_string(a)
            )));
        }
        let two_a = a * int(2);
        IfsSet1D::new(
            Interval::new(int(0), int(1))?,
            vec![
                AffineMap1D::new(a.clone(), int(0))?,
                AffineMap1D::new(int(1) - &two_a, two_a)?,
            ],
        )
    }

    pub fn hull(&self) -> &Interval {
        &self.hull
    }

    pub fn branches(&self) -> &[AffineMap1D] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn max_scale(&self) -> Exact {
        self.branches
            .iter()
            .map(|b| b.scale.clone())
            .max()
            .expect("at least two branches")
    }

    pub fn is_normalized(&self) -> bool {
        self.hull.lo().is_zero() && self.hull.hi().is_one()
    }

    /// Image of the set under `x ↦ μx + ν`.
    pub fn affine_image(&self, mu: &Exact, nu: &Exact) -> Result<Self> {
        if mu.is_zero() {
            return Err(Error::invalid("affine image with zero scale"));
        }
        let hull = Interval::spanning(mu * self.hull.lo() + nu, mu * self.hull.hi() + nu);
        let mut branches: Vec<AffineMap1D> = self
            .branches
            .iter()
            .map(|b| AffineMap1D {
                scale: b.scale.clone(),
                offset: mu * &b.offset + nu * (int(1) - &b.scale),
            })
            .collect();
        if mu.is_negative() {
            branches.reverse();
        }
        IfsSet1D::new(hull, branches)
    }

    /// −C + (lo + hi), which fixes the hull.
    pub fn reflected(&self) -> Self {
        self.affine_image(&int(-1), &(self.hull.lo() + self.hull.hi()))
            .expect("reflection of a valid set is valid")
    }

    /// Copy with hull [0,1], plus the map (scale, shift) sending it back.
    pub fn normalized(&self) -> (Self, Exact, Exact) {
        let w = self.hull.width();
        let shift = self.hull.lo().clone();
        let n = self
            .affine_image(&w.recip(), &(-&shift / &w))
            .expect("normalization of a valid set is valid");
        (n, w, shift)
    }

    pub fn branch_image(&self, i: usize) -> Interval {
        self.child(&self.hull, i)
    }

    /// Image of branch `i` inside the cover interval `iv`.
    pub fn child(&self, iv: &Interval, i: usize) -> Interval {
        let w = iv.width();
        let (a, b) = &self.rel[i];
        Interval::new(iv.lo() + &w * a, iv.lo() + &w * b).expect("ordered endpoints")
    }

    pub fn children(&self, iv: &Interval) -> Vec<Interval> {
        (0..self.rel.len()).map(|i| self.child(iv, i)).collect()
    }

    /// Relative gap lengths between consecutive branch images.
    pub fn relative_gaps(&self) -> Vec<Exact> {
        self.rel.windows(2).map(|w| &w[1].0 - &w[0].1).collect()
    }

    pub fn first_level_gaps(&self) -> Vec<Interval> {
        let kids = self.children(&self.hull);
        kids.windows(2)
            .map(|w| Interval::new(w[0].hi().clone(), w[1].lo().clone()).expect("disjoint"))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover1D {
    pub depth: u32,
    pub intervals: Vec<Interval>,
}

impl Cover1D {
    pub fn contains(&self, x: &Exact) -> bool {
        let i = self.intervals.partition_point(|iv| iv.hi() < x);
        i < self.intervals.len() && self.intervals[i].contains(x)
    }

    /// Whether `iv` lies inside a single merged interval.
    pub fn covers(&self, iv: &Interval) -> bool {
        let i = self.intervals.partition_point(|c| c.hi() < iv.lo());
        i < self.intervals.len() && self.intervals[i].contains_interval(iv)
    }

    pub fn total_length(&self) -> Exact {
        self.intervals.iter().map(|iv| iv.width()).sum()
    }
}

pub fn cover(set: &IfsSet1D, depth: u32) -> Cover1D {
    let mut level = vec![set.hull.clone()];
    for _ in 0..depth {
        let next: Vec<Vec<Interval>> = exec::map(&level, |iv| set.children(iv));
        level = next.into_iter().flatten().collect();
    }
    Cover1D {
        depth,
        intervals: level,
    }
}

/// Depth-`depth` cover intervals meeting `window`, found by pruned descent.
pub fn cover_within(set: &IfsSet1D, depth: u32, window: &Interval) -> Vec<Interval> {
    fn go(set: &IfsSet1D, iv: Interval, left: u32, window: &Interval, out: &mut Vec<Interval>) {
        if !iv.overlaps(window) {
            return;
        }
        if left == 0 {
            out.push(iv);
            return;
        }
        for c in set.children(&iv) {
            go(set, c, left - 1, window, out);
        }
    }
    let mut out = Vec::new();
    go(set, set.hull.clone(), depth, window, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapRecord {
    /// Open interval; only the endpoints are stored.
    pub gap: Interval,
    pub left_bridge: Interval,
    pub right_bridge: Interval,
    pub creation_depth: u32,
}

impl GapRecord {
    pub fn ratio(&self) -> Exact {
        let l = self.left_bridge.width();
        let r = self.right_bridge.width();
        let b = if l <= r { l } else { r };
        b / self.gap.width()
    }
}

fn raw_gaps(set: &IfsSet1D, max_depth: u32) -> Vec<(Interval, u32)> {
    let mut out = Vec::new();
    let mut level = vec![set.hull.clone()];
    for d in 0..max_depth {
        let per: Vec<(Vec<Interval>, Vec<Interval>)> = exec::map(&level, |iv| {
            let kids = set.children(iv);
            let gaps = kids
                .windows(2)
                .map(|w| Interval::new(w[0].hi().clone(), w[1].lo().clone()).expect("disjoint"))
                .collect();
            (kids, gaps)
        });
        let mut next = Vec::with_capacity(level.len() * set.branch_count());
        for (kids, gaps) in per {
            next.extend(kids);
            out.extend(gaps.into_iter().map(|g| (g, d + 1)));
        }
        level = next;
    }
    out
}

/// Every gap created up to `max_depth`, in removal order, with exact bridges.
pub fn enumerate_gaps(set: &IfsSet1D, max_depth: u32) -> Vec<GapRecord> {
    let mut gaps = raw_gaps(set, max_depth);
    gaps.sort_by_cached_key(|(g, _)| (std::cmp::Reverse(g.width()), g.lo().clone()));
    let mut removed: BTreeMap<Exact, Exact> = BTreeMap::new();
    let mut out = Vec::with_capacity(gaps.len());
    for (g, depth) in gaps {
        let left_end = removed
            .range(..g.lo().clone())
            .next_back()
            .map(|(_, hi)| hi.clone())
            .unwrap_or_else(|| set.hull.lo().clone());
        let right_end = removed
            .range(g.hi().clone()..)
            .next()
            .map(|(lo, _)| lo.clone())
            .unwrap_or_else(|| set.hull.hi().clone());
        let left_bridge = Interval::new(left_end, g.lo().clone()).expect("bridge order");
        let right_bridge = Interval::new(g.hi().clone(), right_end).expect("bridge order");
        removed.insert(g.lo().clone(), g.hi().clone());
        out.push(GapRecord {
            gap: g,
            left_bridge,
            right_bridge,
            creation_depth: depth,
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThicknessTag {
    Stabilized,
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThicknessReport {
    #[serde(with = "serde_exact")]
    pub value: Exact,
    pub tag: ThicknessTag,
    pub achieved_by: GapRecord,
    pub max_depth: u32,
    pub gaps_examined: usize,
    pub gaps_certified: usize,
}

impl ThicknessReport {
    /// Certified enclosure: exact when stabilized, `[0, value]` otherwise.
    pub fn enclosure(&self) -> Interval {
        match self.tag {
            ThicknessTag::Stabilized => Interval::point(self.value.clone()),
            ThicknessTag::Truncated => {
                Interval::new(Exact::zero(), self.value.clone()).expect("nonnegative thickness")
            }
        }
    }
}

fn min_certified_ratio(set: &IfsSet1D, depth: u32) -> (Option<GapRecord>, usize, usize) {
    let gaps = enumerate_gaps(set, depth);
    let max_rel = set.relative_gaps().into_iter().max().expect("has gaps");
    let bound = set.hull.width() * powi(&set.max_scale(), depth) * max_rel;
    let mut best: Option<(Exact, GapRecord)> = None;
    let mut certified = 0;
    for g in &gaps {
        if g.gap.width() <= bound {
            continue;
        }
        certified += 1;
        let r = g.ratio();
        if best.as_ref().is_none_or(|(b, _)| &r < b) {
            best = Some((r, g.clone()));
        }
    }
    (best.map(|(_, g)| g), gaps.len(), certified)
}

pub fn newhouse_thickness(set: &IfsSet1D, max_depth: u32) -> Result<ThicknessReport> {
    if max_depth < 2 {
        return Err(Error::invalid("thickness needs max_depth ≥ 2"));
    }
    let (best, examined, certified) = min_certified_ratio(set, max_depth);
    let best = best.ok_or_else(|| Error::unknown("no gap is certified at this depth"))?;
    let value = best.ratio();
    let (prev, _, _) = min_certified_ratio(set, max_depth - 1);
    let tag = match prev {
        Some(p) if p.ratio() == value => ThicknessTag::Stabilized,
        _ => ThicknessTag::Truncated,
    };
    Ok(ThicknessReport {
        value,
        tag,
        achieved_by: best,
        max_depth,
        gaps_examined: examined,
        gaps_certified: certified,
    })
}

/// Deepest level whose gap count stays near 4096.
pub fn default_thickness_depth(set: &IfsSet1D) -> u32 {
    let b = set.branch_count() as f64;
    ((4096f64.ln() / b.ln()).floor() as u32).max(2)
}

/// Thickness at the default depth, required to be stabilized.
pub fn certified_thickness(set: &IfsSet1D) -> Result<ThicknessReport> {
    let rep = newhouse_thickness(set, default_thickness_depth(set))?;
    if rep.tag != ThicknessTag::Stabilized {
        return Err(Error::unknown(format!(
            "thickness did not stabilize by depth {}",
            rep.max_depth
        )));
    }
    Ok(rep)
}

/// Certified `τ ≥ 1`, the hypothesis shared by every 1D witness search.
pub fn require_thick(set: &IfsSet1D) -> Result<ThicknessReport> {
    let rep = certified_thickness(set)?;
    if rep.value < int(1) {
        return Err(Error::hypothesis(format!(
            "thickness {} < 1",
            exact_string(&rep.value)
        )));
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    InCertified,
    InCoverAtDepth(u32),
    OutAtDepth(u32),
}

pub fn membership(set: &IfsSet1D, x: &Exact, depth: u32) -> Membership {
    let mut iv = set.hull.clone();
    if !iv.contains(x) {
        return Membership::OutAtDepth(0);
    }
    for level in 0..=depth {
        if x == iv.lo() || x == iv.hi() {
            return Membership::InCertified;
        }
        if level == depth {
            break;
        }
        match set.children(&iv).into_iter().find(|c| c.contains(x)) {
            Some(c) => iv = c,
            None => return Membership::OutAtDepth(level + 1),
        }
    }
    Membership::InCoverAtDepth(depth)
}

fn merge_sorted<T: Ord + Clone>(a: Vec<(T, T)>, b: Vec<(T, T)>) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let next = if take_a {
            i += 1;
            &a[i - 1]
        } else {
            j += 1;
            &b[j - 1]
        };
        push_merged(&mut out, next.clone());
    }
    out
}

fn push_merged<T: Ord + Clone>(out: &mut Vec<(T, T)>, iv: (T, T)) {
    if let Some(last) = out.last_mut() {
        if iv.0 <= last.1 {
            if iv.1 > last.1 {
                last.1 = iv.1;
            }
            return;
        }
    }
    out.push(iv);
}

fn minkowski<T>(a: &[(T, T)], b: &[(T, T)]) -> Vec<(T, T)>
where
    T: Ord + Clone + Send + Sync + for<'x> std::ops::Add<&'x T, Output = T>,
{
    if a.len() == 1 {
        let (lo, hi) = &a[0];
        let mut out = Vec::with_capacity(b.len());
        for (blo, bhi) in b {
            push_merged(&mut out, (lo.clone() + blo, hi.clone() + bhi));
        }
        return out;
    }
    let (l, r) = a.split_at(a.len() / 2);
    let (x, y) = exec::join(|| minkowski(l, b), || minkowski(r, b));
    merge_sorted(x, y)
}

fn scaled_sorted(c: &Cover1D, k: &Exact) -> Vec<(Exact, Exact)> {
    let mut v: Vec<(Exact, Exact)> = c
        .intervals
        .iter()
        .map(|iv| {
            let s = iv.scale(k);
            s.into_bounds()
        })
        .collect();
    v.sort();
    v
}

fn as_i128(v: &[(Exact, Exact)], den: &BigInt) -> Option<Vec<(i128, i128)>> {
    let conv = |x: &Exact| -> Option<i128> {
        let n = x.numer() * (den / x.denom());
        (n.bits() < 125).then(|| n.to_i128()).flatten()
    };
    v.iter().map(|(a, b)| Some((conv(a)?, conv(b)?))).collect()
}

/// Merged union of `μI + νJ` over every pair of cover intervals.
pub fn combo_cover(a: &Cover1D, b: &Cover1D, mu: &Exact, nu: &Exact) -> Cover1D {
    let depth = a.depth.min(b.depth);
    let sa = scaled_sorted(a, mu);
    let sb = {
        let mut v = scaled_sorted(b, nu);
        let mut merged = Vec::with_capacity(v.len());
        for iv in v.drain(..) {
            push_merged(&mut merged, iv);
        }
        merged
    };
    let mut den = BigInt::one();
    for (x, y) in sa.iter().chain(sb.iter()) {
        den = den.lcm(x.denom()).lcm(y.denom());
        if den.bits() > 90 {
            break;
        }
    }
    let fast = (den.bits() <= 90)
        .then(|| Some((as_i128(&sa, &den)?, as_i128(&sb, &den)?)))
        .flatten();
    let merged: Vec<(Exact, Exact)> = match fast {
        Some((ia, ib)) if !ia.is_empty() && !ib.is_empty() => {
            let d = Exact::from_integer(den.clone());
            minkowski_i128(&ia, &ib)
                .into_iter()
                .map(|(x, y)| {
                    (
                        Exact::from_integer(BigInt::from(x)) / &d,
                        Exact::from_integer(BigInt::from(y)) / &d,
                    )
                })
                .collect()
        }
        _ if sa.is_empty() || sb.is_empty() => Vec::new(),
        _ => minkowski(&sa, &sb),
    };
    Cover1D {
        depth,
        intervals: merged
            .into_iter()
            .map(|(x, y)| Interval::new(x, y).expect("ordered"))
            .collect(),
    }
}

fn minkowski_i128(a: &[(i128, i128)], b: &[(i128, i128)]) -> Vec<(i128, i128)> {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    struct W(i128);
    impl<'x> std::ops::Add<&'x W> for W {
        type Output = W;
        fn add(self, o: &'x W) -> W {
            W(self.0 + o.0)
        }
    }
    let wa: Vec<(W, W)> = a.iter().map(|&(x, y)| (W(x), W(y))).collect();
    let wb: Vec<(W, W)> = b.iter().map(|&(x, y)| (W(x), W(y))).collect();
    minkowski(&wa, &wb)
        .into_iter()
        .map(|(x, y)| (x.0, y.0))
        .collect()
}

/// Largest `L` with `[0, L]` inside the cover of `C − C` at every depth up to
/// `max_depth`, capped at the hull width. Requires certified `τ ≥ 1`.
pub fn difference_interval(set: &IfsSet1D, max_depth: u32) -> Result<Interval> {
    require_thick(set)?;
    let mut l = set.hull.width();
    for d in 1..=max_depth {
        let cv = cover(set, d);
        let diff = combo_cover(&cv, &cv, &int(1), &int(-1));
        let zero = Exact::zero();
        let reach = diff
            .intervals
            .iter()
            .find(|iv| iv.contains(&zero))
            .map(|iv| iv.hi().clone())
            .unwrap_or_else(Exact::zero);
        l = max_exact(&Exact::zero(), if reach < l { &reach } else { &l }).clone();
    }
    Ok(Interval::point(l))
}
