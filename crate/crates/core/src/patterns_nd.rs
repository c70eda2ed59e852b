//! Convex combinations in `R^d` and similar triangles in `R^2` for sets
//! generated by systems of balls.
//!
//! Both pipelines follow the same plan. Two isolated first-generation
//! children `A` and `B` are combined into a ball `D` that lies inside the
//! image of `A × B` under the pattern map, `D` is certified to meet the set,
//! and a ball of the set inside `D` is then matched against pairs of
//! descendants of `A` and `B` level by level.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::ballsys::{
    distance_child_condition, h_upper, r_uniformity_check_at, yavicoli_thickness, Ball, BallSystem,
    Node, Norm,
};
use crate::error::{Error, Result};
use crate::exec::Budget;
use crate::product2d::{normalize_triangle, Triangle};
use crate::report::HypothesesReport;
use crate::scalar::{
    atan, exact_string, format_decimal, int, pi, rat, Certainty, Exact, Interval, DEFAULT_PRECISION,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Standard,
    Appendix,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Mode::Standard),
            "appendix" => Ok(Mode::Appendix),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }

    fn coefficient(self) -> Exact {
        match self {
            Mode::Standard => int(2),
            Mode::Appendix => rat(3, 2),
        }
    }
}

fn check_r(r: &Exact) -> Result<()> {
    if !r.is_positive() || r >= &rat(1, 2) {
        return Err(Error::invalid(format!(
            "r = {} outside (0, 1/2)",
            exact_string(r)
        )));
    }
    Ok(())
}

fn one() -> Interval {
    Interval::point(int(1))
}

/// Thickness needed for the convex-combination (`alpha` absent) or triangle pattern.
pub fn threshold(
    alpha: Option<&Interval>,
    lambda: &Interval,
    r: &Exact,
    mode: Mode,
) -> Result<Interval> {
    let bits = DEFAULT_PRECISION;
    check_r(r)?;
    let low_ok = match alpha {
        None => lambda.lo().is_positive(),
        Some(_) => !lambda.lo().is_negative(),
    };
    if !low_ok || lambda.hi() > &rat(1, 2) {
        return Err(Error::invalid(format!(
            "λ = {} outside (0, 1/2]",
            lambda.describe(8)
        )));
    }
    let k = mode.coefficient();
    let denom = int(1) - r * int(2);
    match alpha {
        None => {
            let num = (one() - lambda).scale(&k);
            num.div(&lambda.scale(&denom))
        }
        Some(a) => {
            if a.lo().is_negative() {
                return Err(Error::invalid("height α must be nonnegative"));
            }
            let a2 = a.sqr();
            let sg2 = &a2 + &(one() - lambda).sqr();
            let sf2 = &a2 + &lambda.sqr();
            let ratio = sg2.div(&sf2)?.round_outward(bits).sqrt(bits)?;
            Ok(ratio.scale(&(k / denom)))
        }
    }
}

/// Convex-combination weights `λ ∈ [lower, 1/2]` admitted by a system's thickness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaWindow {
    pub tau: Interval,
    /// Enclosure of the smallest admissible λ. Every λ at or above its upper end qualifies.
    pub lower: Interval,
    #[serde(with = "crate::scalar::serde_exact")]
    pub upper: Exact,
    pub empty: bool,
}

impl LambdaWindow {
    pub fn admits(&self, lambda: &Exact) -> Certainty {
        if self.empty || lambda > &self.upper || lambda < self.lower.lo() {
            Certainty::False
        } else if lambda >= self.lower.hi() {
            Certainty::True
        } else {
            Certainty::Unknown
        }
    }
}

pub fn lambda_window(sys: &BallSystem, r: &Exact, mode: Mode) -> Result<LambdaWindow> {
    check_r(r)?;
    let tau = yavicoli_thickness(sys)?.lower_bound;
    let k = mode.coefficient();
    let denom = int(1) - r * int(2);
    // threshold ≤ τ  ⇔  λ ≥ k / (τ(1−2r) + k)
    let bound = |t: &Exact| &k / (t * &denom + &k);
    let lower = Interval::spanning(bound(tau.hi()), bound(tau.lo()));
    let empty = lower.lo() > &rat(1, 2);
    Ok(LambdaWindow {
        tau,
        lower,
        upper: rat(1, 2),
        empty,
    })
}

pub type Mat2 = [[Interval; 2]; 2];

/// The linear maps `f = λI + αJ` and `g = −(1−λ)I + αJ`, `J` the quarter turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FgMaps {
    pub alpha: Interval,
    pub lambda: Interval,
    pub s_f: Interval,
    pub s_g: Interval,
    pub theta_f: Interval,
    pub theta_g: Interval,
    pub f: Mat2,
    pub g: Mat2,
}

fn apply_mat(m: &Mat2, p: &[Interval]) -> Vec<Interval> {
    vec![
        &m[0][0] * &p[0] + &m[0][1] * &p[1],
        &m[1][0] * &p[0] + &m[1][1] * &p[1],
    ]
}

impl FgMaps {
    pub fn apply_f(&self, p: &[Interval]) -> Vec<Interval> {
        apply_mat(&self.f, p)
    }

    pub fn apply_g(&self, p: &[Interval]) -> Vec<Interval> {
        apply_mat(&self.g, p)
    }
}

pub fn fg_maps(alpha: &Interval, lambda: &Interval) -> Result<FgMaps> {
    let bits = DEFAULT_PRECISION;
    let zero = Interval::zero();
    let half = Interval::from_rat(1, 2);
    let om = one() - lambda;
    let a2 = alpha.sqr();
    let region = alpha
        .gt(&zero)
        .and(lambda.ge(&zero))
        .and(lambda.le(&half))
        .and((&a2 + &om.sqr()).le(&Interval::point(int(1) + crate::scalar::pow2(-60))));
    match region {
        Certainty::True => {}
        Certainty::False => {
            return Err(Error::invalid(format!(
                "(α, λ) = ({}, {}) outside the normalized triangle region",
                alpha.describe(8),
                lambda.describe(8)
            )))
        }
        Certainty::Unknown => {
            return Err(Error::unknown(
                "region membership of (α, λ) undecided at this precision",
            ))
        }
    }
    let s_f = (&a2 + &lambda.sqr()).round_outward(bits).sqrt(bits)?;
    let s_g = (&a2 + &om.sqr()).round_outward(bits).sqrt(bits)?;
    let theta_f = if lambda.is_point() && lambda.lo().is_zero() {
        pi(bits).scale(&rat(1, 2))
    } else {
        atan(&alpha.div(lambda)?.round_outward(bits), bits)
    };
    let theta_g = atan(&(-alpha).div(&om)?.round_outward(bits), bits) + pi(bits);
    let f = [[lambda.clone(), -alpha], [alpha.clone(), lambda.clone()]];
    let g = [[-&om, -alpha], [alpha.clone(), -&om]];
    Ok(FgMaps {
        alpha: alpha.clone(),
        lambda: lambda.clone(),
        s_f,
        s_g,
        theta_f: theta_f.round_outward(bits),
        theta_g: theta_g.round_outward(bits),
        f,
        g,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskKind {
    ConvexCombo,
    Triangle,
}

/// The ball `D` inside the pattern image of `A × B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiskD {
    pub kind: DiskKind,
    pub center: Vec<Interval>,
    pub radius: Interval,
    /// First-generation children in the roles of `A` and `B`.
    pub children: (usize, usize),
    pub h_root: Interval,
    /// Bound used for the `h` of `C ∩ S_B`.
    pub h_b: Interval,
    /// `D` meets the set: some ball of radius `h_root` fits in `D ∩ S_∅`.
    pub meets_set: Certainty,
}

fn iv_vec(v: &[Exact]) -> Vec<Interval> {
    v.iter().cloned().map(Interval::point).collect()
}

fn iv_norm(v: &[Interval], norm: Norm, bits: u32) -> Result<Interval> {
    match norm {
        Norm::Linf => Ok(v
            .iter()
            .map(Interval::abs)
            .reduce(|a, b| a.max(&b))
            .unwrap_or_else(Interval::zero)),
        Norm::L2 => v
            .iter()
            .map(Interval::sqr)
            .fold(Interval::zero(), |a, b| a + b)
            .round_outward(bits)
            .sqrt(bits),
    }
}

fn iv_sub(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn exact_offset(a: &[Exact], b: &[Exact]) -> Vec<Interval> {
    a.iter()
        .zip(b)
        .map(|(x, y)| Interval::point(x - y))
        .collect()
}

struct Designated {
    a: Node,
    b: Node,
}

fn designated(sys: &BallSystem) -> Result<Designated> {
    let (ia, ib) = sys.designated().ok_or_else(|| {
        Error::hypothesis("system has no pair of isolated first-generation children")
    })?;
    for i in [ia, ib] {
        if !sys.child_is_isolated(i)? {
            return Err(Error::hypothesis(format!(
                "designated child {i} meets a sibling"
            )));
        }
    }
    let kids = sys.children(&sys.root_node());
    Ok(Designated {
        a: kids[ia].clone(),
        b: kids[ib].clone(),
    })
}

fn h_bounds(sys: &BallSystem, pair: (usize, usize), mode: Mode) -> Result<(Interval, Interval)> {
    let h_root = h_upper(sys, &[])?;
    let h_b = match mode {
        Mode::Standard => h_root.scale(&int(2)),
        Mode::Appendix => {
            let ok =
                distance_child_condition(sys, pair.0)?.and(distance_child_condition(sys, pair.1)?);
            if !ok.is_true() {
                return Err(Error::hypothesis(
                    "distance-to-sibling condition for the designated children is not certified",
                ));
            }
            h_root.clone()
        }
    };
    Ok((h_root, h_b))
}

/// A ball of radius `h` fits in `D ∩ S_∅` exactly when the shrunken balls meet.
fn disk_meets(
    sys: &BallSystem,
    center: &[Interval],
    t: &Interval,
    h: &Interval,
) -> Result<Certainty> {
    let root = sys.root();
    let delta = iv_norm(
        &iv_sub(center, &iv_vec(&root.center)),
        sys.norm(),
        DEFAULT_PRECISION,
    )?;
    let slack = Interval::point(root.radius.clone()) + t - &h.scale(&int(2));
    Ok(t.ge(h)
        .and(Interval::point(root.radius.clone()).ge(h))
        .and(delta.le(&slack)))
}

/// Ball inside `λA + (1−λ)B` for the designated pair, `λ ∈ (0, 1/2]`.
pub fn convex_combo_disk(sys: &BallSystem, lambda: &Exact, r: &Exact, mode: Mode) -> Result<DiskD> {
    check_r(r)?;
    if !lambda.is_positive() || lambda > &rat(1, 2) {
        return Err(Error::invalid(format!(
            "λ = {} outside (0, 1/2]",
            exact_string(lambda)
        )));
    }
    let mut d = designated(sys)?;
    if d.a.ball.radius > d.b.ball.radius {
        std::mem::swap(&mut d.a, &mut d.b);
    }
    let pair = (d.a.word[0], d.b.word[0]);
    let (h_root, h_b) = h_bounds(sys, pair, mode)?;
    let om = int(1) - lambda;
    let center: Vec<Interval> =
        d.a.ball
            .center
            .iter()
            .zip(&d.b.ball.center)
            .map(|(x, y)| Interval::point(lambda * x + &om * y))
            .collect();
    let lead = lambda * (int(1) - r * int(2)) * &d.a.ball.radius + &om * &d.b.ball.radius;
    let radius = Interval::point(lead) - &h_b.scale(&om);
    require_positive(&radius)?;
    let meets_set = disk_meets(sys, &center, &radius, &h_root)?;
    Ok(DiskD {
        kind: DiskKind::ConvexCombo,
        center,
        radius,
        children: pair,
        h_root,
        h_b,
        meets_set,
    })
}

fn require_positive(t: &Interval) -> Result<()> {
    match t.gt(&Interval::zero()) {
        Certainty::True => Ok(()),
        Certainty::False => Err(Error::hypothesis(format!(
            "disk radius {} is not positive",
            t.describe(8)
        ))),
        Certainty::Unknown => Err(Error::unknown(format!(
            "sign of disk radius {} undecided",
            t.describe(8)
        ))),
    }
}

fn x_factor(r: &Exact, mode: Mode) -> Exact {
    let denom = int(1) - r * int(2);
    let x = match mode {
        Mode::Standard => int(1) - r * int(2) / &denom,
        Mode::Appendix => rat(7, 4) - rat(3, 4) / &denom,
    };
    if x.is_negative() {
        Exact::zero()
    } else {
        x
    }
}

/// Radius of the ball about the root center that must hold both designated children.
fn enlarged_radius(
    sys: &BallSystem,
    d: &Designated,
    h_root: &Interval,
    s_f: &Interval,
    r: &Exact,
    mode: Mode,
) -> Result<Interval> {
    let t1 = crate::scalar::min_exact(&d.a.ball.radius, &d.b.ball.radius).clone();
    let x = x_factor(r, mode);
    let shave = h_root.scale(&x).div(&s_f.scale(&int(2)))?;
    Ok(Interval::point(&sys.root().radius / int(2) + t1) - shave)
}

/// Ball inside `f(A) − g(B)` for the designated pair of a Euclidean planar system.
pub fn triangle_disk(sys: &BallSystem, maps: &FgMaps, r: &Exact, mode: Mode) -> Result<DiskD> {
    check_r(r)?;
    if sys.norm() != Norm::L2 || sys.dim() != 2 {
        return Err(Error::invalid(
            "triangle search needs a planar Euclidean system",
        ));
    }
    let d = designated(sys)?;
    let pair = (d.a.word[0], d.b.word[0]);
    let (h_root, h_b) = h_bounds(sys, pair, mode)?;
    let c0 = &sys.root().center;
    let ca = exact_offset(&d.a.ball.center, c0);
    let cb = exact_offset(&d.b.ball.center, c0);
    let fc = maps.apply_f(&ca);
    let gc = maps.apply_g(&cb);
    let center: Vec<Interval> = iv_sub(&fc, &gc)
        .iter()
        .zip(c0)
        .map(|(v, o)| v.shift(o).round_outward(DEFAULT_PRECISION))
        .collect();
    let ta = Interval::point(d.a.ball.radius.clone());
    let tb = Interval::point(d.b.ball.radius.clone());
    let k = int(1) - r * int(2);
    let radius = (&maps.s_f.scale(&k) * &ta + &maps.s_g * &tb - &maps.s_g * &h_b)
        .round_outward(DEFAULT_PRECISION);
    require_positive(&radius)?;
    let meets_set = disk_meets(sys, &center, &radius, &h_root)?;
    Ok(DiskD {
        kind: DiskKind::Triangle,
        center,
        radius,
        children: pair,
        h_root,
        h_b,
        meets_set,
    })
}

/// A witness point given as a ball of the system together with its address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessBall {
    pub role: String,
    pub word: Vec<usize>,
    pub ball: Ball,
}

impl WitnessBall {
    fn new(role: &str, n: &Node) -> Self {
        WitnessBall {
            role: role.to_string(),
            word: n.word.clone(),
            ball: n.ball.clone(),
        }
    }

    /// Coordinate box enclosing the ball.
    pub fn enclosure(&self) -> Vec<Interval> {
        self.ball
            .center
            .iter()
            .map(|c| Interval::spanning(c - &self.ball.radius, c + &self.ball.radius))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessNd {
    pub kind: DiskKind,
    pub convention: String,
    #[serde(with = "crate::scalar::serde_exact")]
    pub lambda: Exact,
    pub alpha: Option<Interval>,
    /// `[a, c, b]` for combinations, `[x, y, z]` for triangles.
    pub points: Vec<WitnessBall>,
    /// Bound on the pattern defect over all points of the three balls.
    pub residual: Interval,
    /// Pattern defect evaluated at the three ball centers.
    pub center_defect: Interval,
    /// `|xz|/|xy|` and `|yz|/|xy|` at the centers, triangles only.
    pub side_ratios: Option<[Interval; 2]>,
    pub target_ratios: Option<[Interval; 2]>,
    pub disk: DiskD,
    pub hypotheses: HypothesesReport,
    pub depth: u32,
    pub nodes_explored: u64,
}

impl WitnessNd {
    pub fn point(&self, role: &str) -> Option<&WitnessBall> {
        self.points.iter().find(|p| p.role == role)
    }

    /// Largest deviation of the center side ratios from the target shape.
    pub fn ratio_deviation(&self) -> Option<Interval> {
        let (s, t) = (self.side_ratios.as_ref()?, self.target_ratios.as_ref()?);
        Some((&s[0] - &t[0]).abs().max(&(&s[1] - &t[1]).abs()))
    }
}

/// Linear pattern map `(a, b) ↦ F a + G b` with operator-norm bounds.
struct PatternMap {
    f: Mat2Opt,
    g: Mat2Opt,
    sf: Interval,
    sg: Interval,
}

#[allow(clippy::large_enum_variant)]
enum Mat2Opt {
    Scalar(Exact),
    Full(Mat2),
}

impl Mat2Opt {
    fn apply(&self, v: &[Exact]) -> Vec<Interval> {
        match self {
            Mat2Opt::Scalar(k) => v.iter().map(|x| Interval::point(k * x)).collect(),
            Mat2Opt::Full(m) => apply_mat(m, &iv_vec(v))
                .iter()
                .map(|x| x.round_outward(DEFAULT_PRECISION))
                .collect(),
        }
    }
}

struct Matcher<'a> {
    sys: &'a BallSystem,
    map: PatternMap,
    target: Ball,
    depth: u32,
    budget: &'a Budget,
    bits: u32,
}

impl Matcher<'_> {
    fn reach(&self, ra: &Exact, rb: &Exact) -> Interval {
        self.map.sf.scale(ra) + self.map.sg.scale(rb) + Interval::point(self.target.radius.clone())
    }

    /// Distance from the pattern image of the centers to the target center.
    fn gap(&self, fa: &[Interval], gb: &[Interval]) -> Result<Interval> {
        let img: Vec<Interval> = fa.iter().zip(gb).map(|(x, y)| x + y).collect();
        iv_norm(
            &iv_sub(&img, &iv_vec(&self.target.center)),
            self.sys.norm(),
            self.bits,
        )
    }

    /// Monotone stand-in for [`Self::gap`]: the squared distance under L2.
    fn gap_measure(&self, fa: &[Interval], gb: &[Interval]) -> Interval {
        let diff: Vec<Interval> = fa
            .iter()
            .zip(gb)
            .zip(&self.target.center)
            .map(|((x, y), t)| (x + y).shift(&-t))
            .collect();
        match self.sys.norm() {
            Norm::Linf => diff
                .iter()
                .map(Interval::abs)
                .reduce(|a, b| a.max(&b))
                .unwrap_or_else(Interval::zero),
            Norm::L2 => diff
                .iter()
                .map(Interval::sqr)
                .fold(Interval::zero(), |a, b| a + b)
                .round_outward(self.bits),
        }
    }

    fn search(&self, a: &Node, b: &Node) -> Result<Option<(Node, Node)>> {
        if a.word.len() as u32 >= self.depth {
            return Ok(Some((a.clone(), b.clone())));
        }
        let ka = self.sys.children(a);
        let kb = self.sys.children(b);
        self.budget.spend((ka.len() * kb.len()) as u64)?;
        let fa: Vec<Vec<Interval>> = crate::exec::map(&ka, |n| self.map.f.apply(&n.ball.center));
        let gb: Vec<Vec<Interval>> = crate::exec::map(&kb, |n| self.map.g.apply(&n.ball.center));
        let approx = |v: &Vec<Interval>| v.iter().map(Interval::to_f64_mid).collect::<Vec<f64>>();
        let fa_f: Vec<Vec<f64>> = fa.iter().map(approx).collect();
        let gb_f: Vec<Vec<f64>> = gb.iter().map(approx).collect();
        let tc: Vec<f64> = self
            .target
            .center
            .iter()
            .map(crate::scalar::to_f64)
            .collect();
        let (sf, sg) = (self.map.sf.to_f64_mid(), self.map.sg.to_f64_mid());
        let rt = crate::scalar::to_f64(&self.target.radius);
        // Cheap float screen first; survivors get the interval test.
        let pairs: Vec<(usize, usize)> = (0..ka.len())
            .flat_map(|i| (0..kb.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let d = fa_f[i]
                    .iter()
                    .zip(&gb_f[j])
                    .zip(&tc)
                    .map(|((x, y), t)| x + y - t);
                let gap = match self.sys.norm() {
                    Norm::Linf => d.fold(0f64, |m, v| m.max(v.abs())),
                    Norm::L2 => d.map(|v| v * v).sum::<f64>().sqrt(),
                };
                let reach = sf * crate::scalar::to_f64(&ka[i].ball.radius)
                    + sg * crate::scalar::to_f64(&kb[j].ball.radius)
                    + rt;
                gap <= reach * (1.0 + 1e-6) + 1e-13
            })
            .collect();
        let scored: Vec<Option<(Exact, usize, usize)>> = crate::exec::map(&pairs, |&(i, j)| {
            let gap = self.gap_measure(&fa[i], &gb[j]);
            let reach = self.reach(&ka[i].ball.radius, &kb[j].ball.radius);
            let reach = match self.sys.norm() {
                Norm::Linf => reach,
                Norm::L2 => reach.sqr(),
            };
            match gap.le(&reach) {
                Certainty::False => None,
                _ => Some((gap.mid(), i, j)),
            }
        });
        let mut live: Vec<(Exact, usize, usize)> = scored.into_iter().flatten().collect();
        live.sort_by(|x, y| match x.0.cmp(&y.0) {
            Ordering::Equal => (x.1, x.2).cmp(&(y.1, y.2)),
            o => o,
        });
        for (_, i, j) in live {
            if let Some(hit) = self.search(&ka[i], &kb[j])? {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }
}

/// First ball of the system, in breadth-first order, lying inside `D`,
/// followed down its first children to `depth`.
fn ball_inside_disk(sys: &BallSystem, disk: &DiskD, depth: u32, budget: &Budget) -> Result<Node> {
    let bits = DEFAULT_PRECISION;
    let inside = |n: &Node| -> Result<Certainty> {
        let delta = iv_norm(
            &iv_sub(&iv_vec(&n.ball.center), &disk.center),
            sys.norm(),
            bits,
        )?;
        Ok((delta + Interval::point(n.ball.radius.clone())).le(&disk.radius))
    };
    let meets = |n: &Node| -> Result<bool> {
        let delta = iv_norm(
            &iv_sub(&iv_vec(&n.ball.center), &disk.center),
            sys.norm(),
            bits,
        )?;
        Ok(delta.le(&(&disk.radius + &Interval::point(n.ball.radius.clone()))) != Certainty::False)
    };
    let mut frontier = vec![sys.root_node()];
    let mut found = None;
    'outer: for _ in 0..=depth.max(1) + 8 {
        let mut next = Vec::new();
        for n in &frontier {
            budget.spend(1)?;
            if inside(n)?.is_true() {
                found = Some(n.clone());
                break 'outer;
            }
            if meets(n)? {
                next.push(n.clone());
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next.iter().flat_map(|n| sys.children(n)).collect();
        if frontier.len() > 2_000_000 {
            break;
        }
    }
    let mut node =
        found.ok_or_else(|| Error::unknown("no ball of the system found inside the disk"))?;
    while (node.word.len() as u32) < depth {
        node = sys
            .children(&node)
            .into_iter()
            .next()
            .ok_or_else(|| Error::unknown("tree ends above the requested depth"))?;
    }
    Ok(node)
}

fn push_common(
    rep: &mut HypothesesReport,
    sys: &BallSystem,
    need: &Interval,
    r: &Exact,
    seed: u64,
) -> Result<()> {
    let tau = yavicoli_thickness(sys)?.lower_bound;
    rep.push(
        "thickness_threshold",
        format!(
            "thickness ≥ {} against required {}",
            tau.describe(8),
            need.describe(8)
        ),
        tau.ge(need),
    );
    let mut uni = Certainty::True;
    let mut detail = Vec::new();
    let mut words = vec![vec![]];
    if let Some((a, b)) = sys.designated() {
        words.push(vec![a]);
        words.push(vec![b]);
    }
    for w in &words {
        let u = r_uniformity_check_at(sys, w, r, 256, seed)?;
        uni = uni.and(u.certainty());
        detail.push(format!("{:?}: {:?}", w, u.certainty()));
    }
    rep.push(
        "uniform_density",
        format!("r = {} at {}", format_decimal(r, 6), detail.join(", ")),
        uni,
    );
    let iso = match sys.designated() {
        Some((a, b)) => {
            Certainty::from_bool(a != b && sys.child_is_isolated(a)? && sys.child_is_isolated(b)?)
        }
        None => Certainty::False,
    };
    rep.push(
        "designated_isolated",
        format!("designated pair {:?}", sys.designated()),
        iso,
    );
    Ok(())
}

fn push_distance_condition(rep: &mut HypothesesReport, sys: &BallSystem, mode: Mode) -> Result<()> {
    if mode != Mode::Appendix {
        return Ok(());
    }
    let c = match sys.designated() {
        Some((a, b)) => distance_child_condition(sys, a)?.and(distance_child_condition(sys, b)?),
        None => Certainty::False,
    };
    rep.push(
        "distance_to_siblings",
        "distance from each designated child to the set is below its sibling gap",
        c,
    );
    Ok(())
}

/// Hypotheses for the convex-combination pipeline, λ ∈ (0, 1/2].
pub fn combo_report(
    sys: &BallSystem,
    lambda: &Exact,
    r: &Exact,
    mode: Mode,
    seed: u64,
) -> Result<HypothesesReport> {
    let mut rep = HypothesesReport::default();
    let need = threshold(None, &Interval::point(lambda.clone()), r, mode)?;
    push_common(&mut rep, sys, &need, r, seed)?;
    push_distance_condition(&mut rep, sys, mode)?;
    Ok(rep)
}

fn settle(rep: &HypothesesReport) -> Result<()> {
    match rep.verdict() {
        crate::report::Verdict::HypothesesHold => Ok(()),
        crate::report::Verdict::Fail(m) => Err(Error::hypothesis(m)),
        crate::report::Verdict::Unknown(m) => Err(Error::unknown(m)),
    }
}

fn push_disk(rep: &mut HypothesesReport, disk: &DiskD) {
    rep.push(
        "disk_radius_positive",
        format!("t_D = {}", disk.radius.describe(8)),
        disk.radius.gt(&Interval::zero()),
    );
    rep.push(
        "disk_meets_set",
        format!(
            "t_D = {} against h = {}",
            disk.radius.describe(8),
            disk.h_root.describe(8)
        ),
        disk.meets_set,
    );
}

/// Points `a, b, c` of the set with `c = λa + (1−λ)b`, `λ ∈ (0, 1)`.
pub fn find_convex_combo_nd(
    sys: &BallSystem,
    lambda: &Exact,
    r: &Exact,
    depth: u32,
    mode: Mode,
    seed: u64,
) -> Result<WitnessNd> {
    find_convex_combo_nd_with(sys, lambda, r, depth, mode, seed, &Budget::from_env())
}

#[allow(clippy::too_many_arguments)]
pub fn find_convex_combo_nd_with(
    sys: &BallSystem,
    lambda: &Exact,
    r: &Exact,
    depth: u32,
    mode: Mode,
    seed: u64,
    budget: &Budget,
) -> Result<WitnessNd> {
    let bits = DEFAULT_PRECISION;
    if !lambda.is_positive() || lambda >= &int(1) {
        return Err(Error::invalid(format!(
            "λ = {} outside (0, 1)",
            exact_string(lambda)
        )));
    }
    if depth < 1 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let flipped = lambda > &rat(1, 2);
    let mu = if flipped {
        int(1) - lambda
    } else {
        lambda.clone()
    };
    let mut rep = combo_report(sys, &mu, r, mode, seed)?;
    if flipped {
        rep.note(format!(
            "λ = {} mapped to {} with the roles of a and b exchanged",
            exact_string(lambda),
            exact_string(&mu)
        ));
    }
    settle(&rep)?;
    let disk = convex_combo_disk(sys, &mu, r, mode)?;
    push_disk(&mut rep, &disk);
    settle(&rep)?;
    let z = ball_inside_disk(sys, &disk, depth, budget)?;
    let kids = sys.children(&sys.root_node());
    let (na, nb) = (&kids[disk.children.0], &kids[disk.children.1]);
    let om = int(1) - &mu;
    let matcher = Matcher {
        sys,
        map: PatternMap {
            f: Mat2Opt::Scalar(mu.clone()),
            g: Mat2Opt::Scalar(om.clone()),
            sf: Interval::point(mu.clone()),
            sg: Interval::point(om.clone()),
        },
        target: z.ball.clone(),
        depth,
        budget,
        bits,
    };
    let (a, b) = matcher
        .search(na, nb)?
        .ok_or_else(|| Error::unknown("refinement exhausted without a matching pair"))?;
    let defect = matcher.gap(
        &matcher.map.f.apply(&a.ball.center),
        &matcher.map.g.apply(&b.ball.center),
    )?;
    let reach = matcher.reach(&a.ball.radius, &b.ball.radius);
    let residual = defect.max(&reach) + reach;
    let (a, b) = if flipped { (b, a) } else { (a, b) };
    Ok(WitnessNd {
        kind: DiskKind::ConvexCombo,
        convention: "c = lambda*a + (1-lambda)*b".into(),
        lambda: lambda.clone(),
        alpha: None,
        points: vec![
            WitnessBall::new("a", &a),
            WitnessBall::new("c", &z),
            WitnessBall::new("b", &b),
        ],
        residual: residual.round_outward(bits),
        center_defect: defect,
        side_ratios: None,
        target_ratios: None,
        disk,
        hypotheses: rep,
        depth,
        nodes_explored: budget.used(),
    })
}

/// Hypotheses for the triangle pipeline; also returns the maps for reuse.
pub fn triangle_report(
    sys: &BallSystem,
    t: &Triangle,
    r: &Exact,
    mode: Mode,
    seed: u64,
) -> Result<(HypothesesReport, FgMaps)> {
    let shape = normalize_triangle(t)?;
    if shape.degenerate {
        return Err(Error::invalid(
            "collinear triangle: use the convex-combination search instead",
        ));
    }
    let maps = fg_maps(&shape.alpha, &shape.lambda)?;
    let mut rep = HypothesesReport::default();
    rep.push(
        "euclidean_plane",
        format!("{} norm in dimension {}", sys.norm().name(), sys.dim()),
        Certainty::from_bool(sys.norm() == Norm::L2 && sys.dim() == 2),
    );
    let need = threshold(Some(&shape.alpha), &shape.lambda, r, mode)?;
    push_common(&mut rep, sys, &need, r, seed)?;
    push_distance_condition(&mut rep, sys, mode)?;
    if let Ok(d) = designated(sys) {
        let h_root = h_upper(sys, &[])?;
        let cap = enlarged_radius(sys, &d, &h_root, &maps.s_f, r, mode)?;
        let c0 = &sys.root().center;
        let mut ok = Certainty::True;
        for n in [&d.a, &d.b] {
            let reach = iv_norm(
                &exact_offset(&n.ball.center, c0),
                sys.norm(),
                DEFAULT_PRECISION,
            )? + Interval::point(n.ball.radius.clone());
            ok = ok.and(reach.le(&cap));
        }
        rep.push(
            "designated_in_enlarged_ball",
            format!(
                "both designated children within radius {} of the root center",
                cap.describe(8)
            ),
            ok,
        );
    }
    rep.note(format!(
        "enlarged-ball factor x = max(1 - 2r/(1-2r), 0) = {}; the alternative reading max(2r/(1-2r), 0) = {} gives a smaller ball",
        format_decimal(&x_factor(r, Mode::Standard), 6),
        format_decimal(&{
            let v = r * int(2) / (int(1) - r * int(2));
            if v.is_negative() { Exact::zero() } else { v }
        }, 6)
    ));
    Ok((rep, maps))
}

/// Vertices of a similar copy of `t` in the set of a planar Euclidean system.
pub fn find_triangle_nd(
    sys: &BallSystem,
    t: &Triangle,
    r: &Exact,
    depth: u32,
    mode: Mode,
    seed: u64,
) -> Result<WitnessNd> {
    find_triangle_nd_with(sys, t, r, depth, mode, seed, &Budget::from_env())
}

#[allow(clippy::too_many_arguments)]
pub fn find_triangle_nd_with(
    sys: &BallSystem,
    t: &Triangle,
    r: &Exact,
    depth: u32,
    mode: Mode,
    seed: u64,
    budget: &Budget,
) -> Result<WitnessNd> {
    let bits = DEFAULT_PRECISION;
    if depth < 1 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let (mut rep, maps) = triangle_report(sys, t, r, mode, seed)?;
    settle(&rep)?;
    let disk = triangle_disk(sys, &maps, r, mode)?;
    push_disk(&mut rep, &disk);
    settle(&rep)?;
    let z = ball_inside_disk(sys, &disk, depth, budget)?;
    let kids = sys.children(&sys.root_node());
    let (nx, ny) = (&kids[disk.children.0], &kids[disk.children.1]);
    let neg_g = [
        [-&maps.g[0][0], -&maps.g[0][1]],
        [-&maps.g[1][0], -&maps.g[1][1]],
    ];
    // Centers are taken relative to the root so the maps act linearly about it.
    let c0 = sys.root().center.clone();
    let target = Ball {
        center: z.ball.center.iter().zip(&c0).map(|(x, o)| x - o).collect(),
        radius: z.ball.radius.clone(),
        norm: sys.norm(),
    };
    let rel = |n: &Node| -> Node {
        let mut m = n.clone();
        for (x, o) in m.ball.center.iter_mut().zip(&c0) {
            *x = &*x - o;
        }
        m
    };
    let root_rel = sys.root().center.iter().all(|x| x.is_zero());
    let matcher = Matcher {
        sys,
        map: PatternMap {
            f: Mat2Opt::Full(maps.f.clone()),
            g: Mat2Opt::Full(neg_g),
            sf: maps.s_f.clone(),
            sg: maps.s_g.clone(),
        },
        target,
        depth,
        budget,
        bits,
    };
    if !root_rel {
        return Err(Error::invalid(
            "triangle search expects a system rooted at the origin",
        ));
    }
    let (x, y) = matcher
        .search(&rel(nx), &rel(ny))?
        .ok_or_else(|| Error::unknown("refinement exhausted without a matching pair"))?;
    let defect = matcher.gap(
        &matcher.map.f.apply(&x.ball.center),
        &matcher.map.g.apply(&y.ball.center),
    )?;
    let reach = matcher.reach(&x.ball.radius, &y.ball.radius);
    let residual = defect.max(&reach) + reach;
    let dist = |p: &[Exact], q: &[Exact]| iv_norm(&exact_offset(p, q), Norm::L2, bits);
    let xy = dist(&x.ball.center, &y.ball.center)?;
    let xz = dist(&x.ball.center, &z.ball.center)?;
    let yz = dist(&y.ball.center, &z.ball.center)?;
    let side_ratios = [
        xz.div(&xy)?.round_outward(bits),
        yz.div(&xy)?.round_outward(bits),
    ];
    rep.note("apex z = λx + (1-λ)y + α·J(x - y), J the quarter turn; |yz| = s_f·|xy| and |xz| = s_g·|xy|");
    Ok(WitnessNd {
        kind: DiskKind::Triangle,
        convention: "z = lambda*x + (1-lambda)*y + alpha*J(x-y)".into(),
        lambda: maps.lambda.lo().clone(),
        alpha: Some(maps.alpha.clone()),
        points: vec![
            WitnessBall::new("x", &x),
            WitnessBall::new("y", &y),
            WitnessBall::new("z", &z),
        ],
        residual: residual.round_outward(bits),
        center_defect: defect,
        side_ratios: Some(side_ratios),
        target_ratios: Some([maps.s_g.clone(), maps.s_f.clone()]),
        disk,
        hypotheses: rep,
        depth,
        nodes_explored: budget.used(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballsys::{grid_ifs_example, hex_packing_example};
    use crate::scalar::sqrt3;

    fn grid() -> BallSystem {
        grid_ifs_example(10, rat(19, 200), rat(1, 100), 7).unwrap()
    }

    #[test]
    fn thresholds() {
        let half = Interval::from_rat(1, 2);
        let t = threshold(None, &half, &rat(1, 5), Mode::Standard).unwrap();
        assert_eq!(t, Interval::from_rat(10, 3));
        let t = threshold(None, &half, &rat(1, 5), Mode::Appendix).unwrap();
        assert_eq!(t, Interval::from_rat(5, 2));
        let eq = sqrt3(128).scale(&rat(1, 2));
        let t = threshold(Some(&eq), &half, &rat(1, 5), Mode::Standard).unwrap();
        assert!(t.contains(&rat(10, 3)) && t.width() < crate::scalar::pow2(-100));
        assert!(threshold(None, &half, &rat(1, 2), Mode::Standard).is_err());
    }

    #[test]
    fn grid_window() {
        let w = lambda_window(&grid(), &rat(1, 5), Mode::Standard).unwrap();
        assert_eq!(w.lower, Interval::from_rat(4000, 14317));
        assert!((w.lower.to_f64_mid() - 0.27938814).abs() < 1e-8);
        assert_eq!(w.admits(&rat(3, 10)), Certainty::True);
        assert_eq!(w.admits(&rat(1, 5)), Certainty::False);
    }

    #[test]
    fn fg_map_examples() {
        let eq = fg_maps(&sqrt3(128).scale(&rat(1, 2)), &Interval::from_rat(1, 2)).unwrap();
        assert!(eq.s_f.contains(&int(1)) && eq.s_g.contains(&int(1)));
        let pi3 = pi(128).scale(&rat(1, 3));
        assert!(eq.theta_f.overlaps(&pi3));
        let m = fg_maps(&Interval::from_rat(1, 2), &Interval::from_rat(1, 2)).unwrap();
        assert!((m.s_f.to_f64_mid() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(fg_maps(&Interval::zero(), &Interval::zero()).is_err());
    }

    #[test]
    fn grid_midpoint() {
        let sys = grid();
        let w = find_convex_combo_nd(&sys, &rat(1, 2), &rat(1, 5), 8, Mode::Standard, 1).unwrap();
        assert!(w.hypotheses.all_pass());
        assert!(w.residual.hi() < &rat(1, 1_000_000));
        assert!(w.center_defect.le(&w.residual).is_true());
        assert!(w.disk.radius.to_f64_mid() > 0.06);
        let w = find_convex_combo_nd(&sys, &rat(3, 10), &rat(1, 5), 5, Mode::Standard, 1).unwrap();
        assert!(w.residual.hi() < &rat(1, 10_000));
        let e = find_convex_combo_nd(&sys, &rat(1, 5), &rat(1, 5), 5, Mode::Standard, 1);
        assert!(matches!(e, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn hex_equilateral() {
        let sys = hex_packing_example(rat(99999, 100000)).unwrap();
        let r = rat(26243, 100000);
        let w3 =
            find_triangle_nd(&sys, &Triangle::equilateral(128), &r, 3, Mode::Standard, 1).unwrap();
        let w4 =
            find_triangle_nd(&sys, &Triangle::equilateral(128), &r, 4, Mode::Standard, 1).unwrap();
        assert!(w4.hypotheses.all_pass(), "{:?}", w4.hypotheses);
        let q = w4.residual.hi().clone() / w3.residual.lo().clone();
        assert!(q <= rat(13, 100));
        assert!(w4.ratio_deviation().unwrap().hi() < &rat(1, 1000));
        let line = Triangle::from_exact([[int(0), int(0)], [int(1), int(0)], [int(3), int(0)]]);
        assert!(find_triangle_nd(&sys, &line, &r, 3, Mode::Standard, 1).is_err());
    }
}
