//! Nested systems of closed balls in R^d and their Yavicoli thickness.
//!
//! A system is a finitely branching tree of balls. Nodes are materialised
//! lazily from a generator: a perturbed square grid in the sup norm, a
//! hexagonal circle arrangement in the Euclidean norm, or an explicit tree.
//! All geometric predicates are exact on rational data; Euclidean distances
//! are compared through their squares.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::HypothesesReport;
use crate::scalar::{
    exact_string, int, parse_exact, pow2, rat, serde_exact, serde_exact_vec, sqrt3, sqrt_exact,
    Certainty, Exact, Interval, DEFAULT_PRECISION,
};

pub type Word = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Norm {
    Linf,
    L2,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::Linf => "linf",
            Norm::L2 => "l2",
        }
    }
}

fn sub(a: &[Exact], b: &[Exact]) -> Vec<Exact> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn sum_sq(v: &[Exact]) -> Exact {
    v.iter().fold(Exact::zero(), |acc, x| acc + x * x)
}

fn max_abs(v: &[Exact]) -> Exact {
    v.iter().fold(Exact::zero(), |acc, x| {
        let a = x.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// `‖v‖ ≤ t`, exactly.
pub fn norm_le(v: &[Exact], t: &Exact, norm: Norm) -> bool {
    if t.is_negative() {
        return false;
    }
    match norm {
        Norm::Linf => &max_abs(v) <= t,
        Norm::L2 => sum_sq(v) <= t * t,
    }
}

/// `‖v‖ < t`, exactly.
pub fn norm_lt(v: &[Exact], t: &Exact, norm: Norm) -> bool {
    if !t.is_positive() {
        return false;
    }
    match norm {
        Norm::Linf => &max_abs(v) < t,
        Norm::L2 => sum_sq(v) < t * t,
    }
}

/// Enclosure of `‖v‖`.
pub fn norm_interval(v: &[Exact], norm: Norm, bits: u32) -> Interval {
    match norm {
        Norm::Linf => Interval::point(max_abs(v)),
        Norm::L2 => sqrt_exact(&sum_sq(v), bits).expect("sum of squares is nonnegative"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ball {
    #[serde(with = "serde_exact_vec")]
    pub center: Vec<Exact>,
    #[serde(with = "serde_exact")]
    pub radius: Exact,
    pub norm: Norm,
}

impl Ball {
    pub fn new(center: Vec<Exact>, radius: Exact, norm: Norm) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::invalid("ball center has no coordinates"));
        }
        if radius.is_negative() {
            return Err(Error::invalid(format!(
                "negative radius {}",
                exact_string(&radius)
            )));
        }
        Ok(Ball {
            center,
            radius,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains_point(&self, p: &[Exact]) -> bool {
        norm_le(&sub(p, &self.center), &self.radius, self.norm)
    }

    /// `other ⊆ self`, both measured in `self`'s norm.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        norm_le(
            &sub(&other.center, &self.center),
            &(&self.radius - &other.radius),
            self.norm,
        )
    }

    pub fn meets(&self, other: &Ball) -> bool {
        norm_le(
            &sub(&other.center, &self.center),
            &(&self.radius + &other.radius),
            self.norm,
        )
    }

    pub fn disjoint(&self, other: &Ball) -> bool {
        !self.meets(other)
    }

    /// `dist(self, other) > t`: the balls stay apart after growing both by `t/2`.
    pub fn separated_by_more_than(&self, other: &Ball, t: &Exact) -> bool {
        let reach = &self.radius + &other.radius + t;
        !norm_le(&sub(&other.center, &self.center), &reach, self.norm)
    }

    /// Enclosure of the distance between the two balls (0 when they meet).
    pub fn gap(&self, other: &Ball, bits: u32) -> Interval {
        let d = norm_interval(&sub(&other.center, &self.center), self.norm, bits);
        let g = d.shift(&-(&self.radius + &other.radius));
        g.max(&Interval::zero())
    }

    pub fn scaled(&self, k: &Exact) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: &self.radius * k,
            norm: self.norm,
        }
    }
}

/// Orthogonal matrix with rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orthogonal {
    rows: Vec<Vec<Exact>>,
}

impl Orthogonal {
    pub fn identity(d: usize) -> Self {
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { int(1) } else { int(0) })
                    .collect()
            })
            .collect();
        Orthogonal { rows }
    }

    pub fn new(rows: Vec<Vec<Exact>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("rotation must be a square matrix"));
        }
        for i in 0..d {
            for j in 0..d {
                let dot = (0..d).fold(Exact::zero(), |acc, k| acc + &rows[k][i] * &rows[k][j]);
                let want = if i == j { int(1) } else { int(0) };
                if dot != want {
                    return Err(Error::invalid("matrix is not orthogonal"));
                }
            }
        }
        Ok(Orthogonal { rows })
    }

    /// Planar rotation with cosine `a` and sine `b`, `a² + b² = 1`.
    pub fn planar(a: Exact, b: Exact) -> Result<Self> {
        Orthogonal::new(vec![vec![a.clone(), -b.clone()], vec![b, a]])
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_identity(&self) -> bool {
        *self == Orthogonal::identity(self.dim())
    }

    /// Every row holds a single ±1: the matrix is an isometry of the sup norm too.
    pub fn is_signed_permutation(&self) -> bool {
        self.rows.iter().all(|r| {
            r.iter().filter(|x| !x.is_zero()).count() == 1 && r.iter().all(|x| x.abs() <= int(1))
        })
    }

    pub fn apply(&self, v: &[Exact]) -> Vec<Exact> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .fold(Exact::zero(), |acc, (m, x)| acc + m * x)
            })
            .collect()
    }

    pub fn compose(&self, inner: &Orthogonal) -> Orthogonal {
        let d = self.dim();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d).fold(Exact::zero(), |acc, k| {
                            acc + &self.rows[i][k] * &inner.rows[k][j]
                        })
                    })
                    .collect()
            })
            .collect();
        Orthogonal { rows }
    }
}

/// `x ↦ scale·Q·x + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Similarity {
    pub scale: Exact,
    pub rot: Orthogonal,
    pub shift: Vec<Exact>,
}

impl Similarity {
    pub fn new(scale: Exact, rot: Orthogonal, shift: Vec<Exact>) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::invalid("similarity scale must be positive"));
        }
        if shift.len() != rot.dim() {
            return Err(Error::invalid("similarity shift has the wrong dimension"));
        }
        Ok(Similarity { scale, rot, shift })
    }

    pub fn apply_point(&self, x: &[Exact]) -> Vec<Exact> {
        self.rot
            .apply(x)
            .into_iter()
            .zip(&self.shift)
            .map(|(y, s)| y * &self.scale + s)
            .collect()
    }

    pub fn apply_ball(&self, b: &Ball) -> Ball {
        Ball {
            center: self.apply_point(&b.center),
            radius: &b.radius * &self.scale,
            norm: b.norm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExplicitNode {
    #[serde(with = "serde_exact_vec")]
    pub center: Vec<Exact>,
    #[serde(with = "serde_exact")]
    pub radius: Exact,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    GridIfs {
        n: u32,
        #[serde(with = "serde_exact")]
        rho: Exact,
        #[serde(with = "serde_exact")]
        d: Exact,
        seed: u64,
    },
    HexPacking {
        #[serde(with = "serde_exact")]
        rho: Exact,
        #[serde(with = "serde_exact")]
        gamma: Exact,
    },
    ExplicitTree {
        nodes: Vec<ExplicitNode>,
    },
}

/// One ball of the system with its address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub word: Word,
    pub ball: Ball,
    #[serde(skip)]
    slot: usize,
}

const HEX_DATA: &str = include_str!("../data/hex85.txt");

/// Common radius of the bundled hexagonal arrangement.
pub fn hex_radius() -> Exact {
    rat(12179, 100000)
}

/// Designated pair of the hexagonal arrangement: the center circle and its right neighbour.
pub const HEX_DESIGNATED: (usize, usize) = (0, 1);

pub fn hex_centers() -> &'static [Vec<Exact>] {
    static CENTERS: OnceLock<Vec<Vec<Exact>>> = OnceLock::new();
    CENTERS.get_or_init(|| {
        HEX_DATA
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| parse_exact(t).expect("bundled hex data is well formed"))
                    .collect()
            })
            .collect()
    })
}

/// `(2 − √3)/√3`: farthest-point distance of the hexagonal arrangement, per unit radius.
pub fn hex_gap_constant(bits: u32) -> Interval {
    let two_over = Interval::point(int(2))
        .div(&sqrt3(bits))
        .expect("√3 is positive");
    two_over.shift(&int(-1)).round_outward(bits)
}

/// `(2 + √3)/√3 · ρ`: uniformity constant of the hexagonal arrangement.
pub fn hex_uniformity_constant(bits: u32) -> Interval {
    hex_gap_constant(bits)
        .shift(&int(2))
        .scale(&hex_radius())
        .round_outward(bits)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn word_seed(seed: u64, word: &[usize]) -> u64 {
    let mut h = splitmix(seed);
    for &w in word {
        h = splitmix(h ^ (w as u64).wrapping_add(1));
    }
    splitmix(h ^ word.len() as u64)
}

const PERTURB_STEPS: i64 = 1 << 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallSystem {
    norm: Norm,
    root: Ball,
    generator: Generator,
    rot: Orthogonal,
    designated: Option<(usize, usize)>,
}

impl BallSystem {
    /// `n × n` grid of sup-norm balls of radius `ρ`, spaced `d` apart, with
    /// seeded perturbations strictly below `d/2` at every level.
    pub fn grid_ifs(n: u32, rho: Exact, d: Exact, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("grid needs n ≥ 2"));
        }
        if !rho.is_positive() || !d.is_positive() {
            return Err(Error::invalid("grid radius and spacing must be positive"));
        }
        let nn = int(n as i64);
        if &(&rho * int(2) + &d) * &nn != int(2) {
            return Err(Error::invalid(format!(
                "grid constraint 2ρn + nd = 2 fails: got {}",
                exact_string(&(&(&rho * int(2) + &d) * &nn))
            )));
        }
        let mid = ((n - 1) / 2) as usize;
        let row = mid * n as usize;
        Ok(BallSystem {
            norm: Norm::Linf,
            root: Ball::new(vec![int(0), int(0)], int(1), Norm::Linf)?,
            generator: Generator::GridIfs { n, rho, d, seed },
            rot: Orthogonal::identity(2),
            designated: Some((row + mid, row + mid + 1)),
        })
    }

    /// Hexagonal arrangement of 85 Euclidean discs in the unit disc with the
    /// designated pair shrunk about their centers by `γ`.
    pub fn hex_packing(gamma: Exact) -> Result<Self> {
        if !gamma.is_positive() || gamma > int(1) {
            return Err(Error::invalid(format!(
                "gamma {} outside (0,1]",
                exact_string(&gamma)
            )));
        }
        Ok(BallSystem {
            norm: Norm::L2,
            root: Ball::new(vec![int(0), int(0)], int(1), Norm::L2)?,
            generator: Generator::HexPacking {
                rho: hex_radius(),
                gamma,
            },
            rot: Orthogonal::identity(2),
            designated: Some(HEX_DESIGNATED),
        })
    }

    /// Explicit finite tree; node 0 is the root and children must lie inside parents.
    pub fn explicit(norm: Norm, nodes: Vec<ExplicitNode>) -> Result<Self> {
        let root = nodes
            .first()
            .ok_or_else(|| Error::invalid("explicit tree has no nodes"))?;
        let dim = root.center.len();
        let balls = nodes
            .iter()
            .map(|n| {
                if n.center.len() != dim {
                    return Err(Error::invalid("explicit nodes differ in dimension"));
                }
                Ball::new(n.center.clone(), n.radius.clone(), norm)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut seen = vec![false; nodes.len()];
        seen[0] = true;
        for (i, n) in nodes.iter().enumerate() {
            for &c in &n.children {
                if c <= i || c >= nodes.len() {
                    return Err(Error::invalid(format!(
                        "node {i}: child index {c} must exceed the parent and exist"
                    )));
                }
                if seen[c] {
                    return Err(Error::invalid(format!("node {c} has two parents")));
                }
                seen[c] = true;
                if !balls[i].contains_ball(&balls[c]) {
                    return Err(Error::invalid(format!("node {c} is not inside node {i}")));
                }
            }
        }
        let root_ball = balls[0].clone();
        let mut sys = BallSystem {
            norm,
            root: root_ball,
            generator: Generator::ExplicitTree { nodes },
            rot: Orthogonal::identity(dim),
            designated: None,
        };
        sys.designated = sys.find_isolated_pair();
        Ok(sys)
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn root(&self) -> &Ball {
        &self.root
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn designated(&self) -> Option<(usize, usize)> {
        self.designated
    }

    pub fn is_self_similar(&self) -> bool {
        !matches!(self.generator, Generator::ExplicitTree { .. })
    }

    /// Ratio of child radius to parent radius (largest over the tree for explicit systems).
    pub fn contraction(&self) -> Exact {
        match &self.generator {
            Generator::GridIfs { rho, .. } | Generator::HexPacking { rho, .. } => rho.clone(),
            Generator::ExplicitTree { nodes } => {
                let mut best = Exact::zero();
                for n in nodes {
                    for &c in &n.children {
                        if n.radius.is_positive() {
                            let q = &nodes[c].radius / &n.radius;
                            if q > best {
                                best = q;
                            }
                        }
                    }
                }
                best
            }
        }
    }

    pub fn root_node(&self) -> Node {
        Node {
            word: Vec::new(),
            ball: self.root.clone(),
            slot: 0,
        }
    }

    fn offset_ball(&self, parent: &Node, idx: usize, offset: &[Exact], radius: Exact) -> Node {
        let rotated = if self.rot.is_identity() {
            offset.to_vec()
        } else {
            self.rot.apply(offset)
        };
        let center = parent
            .ball
            .center
            .iter()
            .zip(&rotated)
            .map(|(c, o)| c + &parent.ball.radius * o)
            .collect();
        let mut word = parent.word.clone();
        word.push(idx);
        Node {
            word,
            ball: Ball {
                center,
                radius,
                norm: self.norm,
            },
            slot: 0,
        }
    }

    pub fn children(&self, node: &Node) -> Vec<Node> {
        let r = &node.ball.radius;
        match &self.generator {
            Generator::GridIfs { n, rho, d, seed } => {
                let n = *n as usize;
                let pitch = rho * int(2) + d;
                let first = d / int(2) + rho - int(1);
                let amp = d / int(2) * (int(1) - pow2(-20)) / int(PERTURB_STEPS);
                let mut rng = ChaCha8Rng::seed_from_u64(word_seed(*seed, &node.word));
                let child_r = r * rho;
                let mut out = Vec::with_capacity(n * n);
                for row in 0..n {
                    for col in 0..n {
                        let mut off = Vec::with_capacity(2);
                        for k in [col, row] {
                            let m: i64 = rng.random_range(0..=PERTURB_STEPS);
                            let v = int(2 * m - PERTURB_STEPS);
                            off.push(&first + &pitch * int(k as i64) + &amp * v);
                        }
                        out.push(self.offset_ball(node, row * n + col, &off, child_r.clone()));
                    }
                }
                out
            }
            Generator::HexPacking { rho, gamma } => {
                let base = r * rho;
                hex_centers()
                    .iter()
                    .enumerate()
                    .map(|(j, t)| {
                        let shrink = node.word.is_empty()
                            && (j == HEX_DESIGNATED.0 || j == HEX_DESIGNATED.1);
                        let radius = if shrink { &base * gamma } else { base.clone() };
                        self.offset_ball(node, j, t, radius)
                    })
                    .collect()
            }
            Generator::ExplicitTree { nodes } => nodes[node.slot]
                .children
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let mut word = node.word.clone();
                    word.push(j);
                    Node {
                        word,
                        ball: Ball {
                            center: nodes[c].center.clone(),
                            radius: nodes[c].radius.clone(),
                            norm: self.norm,
                        },
                        slot: c,
                    }
                })
                .collect(),
        }
    }

    pub fn branch_count(&self, node: &Node) -> usize {
        match &self.generator {
            Generator::GridIfs { n, .. } => (*n as usize) * (*n as usize),
            Generator::HexPacking { .. } => hex_centers().len(),
            Generator::ExplicitTree { nodes } => nodes[node.slot].children.len(),
        }
    }

    pub fn node(&self, word: &[usize]) -> Result<Node> {
        let mut cur = self.root_node();
        for (depth, &i) in word.iter().enumerate() {
            let count = self.branch_count(&cur);
            if i >= count {
                return Err(Error::invalid(format!(
                    "word index {i} at depth {depth} exceeds {count} children"
                )));
            }
            cur = self.children(&cur).swap_remove(i);
        }
        Ok(cur)
    }

    /// All nodes of the given depth. Grows like `k^depth`.
    pub fn level(&self, depth: u32) -> Vec<Node> {
        let mut cur = vec![self.root_node()];
        for _ in 0..depth {
            let next: Vec<Vec<Node>> = crate::exec::map(&cur, |n| self.children(n));
            cur = next.into_iter().flatten().collect();
        }
        cur
    }

    /// Image of the system under a similarity. Sup-norm systems accept only
    /// signed permutations.
    pub fn transformed(&self, g: &Similarity) -> Result<Self> {
        if g.rot.dim() != self.dim() {
            return Err(Error::invalid("similarity dimension mismatch"));
        }
        if self.norm == Norm::Linf && !g.rot.is_signed_permutation() {
            return Err(Error::invalid(
                "sup-norm balls stay balls only under signed permutations",
            ));
        }
        let mut out = self.clone();
        out.root = g.apply_ball(&self.root);
        out.rot = g.rot.compose(&self.rot);
        if let Generator::ExplicitTree { nodes } = &mut out.generator {
            for n in nodes.iter_mut() {
                n.center = g.apply_point(&n.center);
                n.radius = &n.radius * &g.scale;
            }
        }
        Ok(out)
    }

    fn find_isolated_pair(&self) -> Option<(usize, usize)> {
        let kids = self.children(&self.root_node());
        let isolated: Vec<usize> = (0..kids.len())
            .filter(|&i| (0..kids.len()).all(|j| j == i || kids[i].ball.disjoint(&kids[j].ball)))
            .collect();
        (isolated.len() >= 2).then(|| (isolated[0], isolated[1]))
    }

    /// True when first-generation child `i` misses every sibling.
    pub fn child_is_isolated(&self, i: usize) -> Result<bool> {
        let kids = self.children(&self.root_node());
        if i >= kids.len() {
            return Err(Error::invalid(format!("no first-generation child {i}")));
        }
        Ok((0..kids.len()).all(|j| j == i || kids[i].ball.disjoint(&kids[j].ball)))
    }

    /// Checks that children lie in parents down to `depth` and that the
    /// designated pair is isolated.
    pub fn validate(&self, depth: u32) -> Result<()> {
        let mut cur = vec![self.root_node()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for n in &cur {
                let kids = self.children(n);
                for k in &kids {
                    if !n.ball.contains_ball(&k.ball) {
                        return Err(Error::invalid(format!(
                            "child {:?} is not inside its parent",
                            k.word
                        )));
                    }
                    if !k.ball.radius.is_positive() {
                        return Err(Error::invalid(format!("child {:?} is degenerate", k.word)));
                    }
                }
                next.extend(kids);
            }
            cur = next;
            if cur.len() > 20_000 {
                break;
            }
        }
        if let Some((a, b)) = self.designated {
            if !self.child_is_isolated(a)? || !self.child_is_isolated(b)? {
                return Err(Error::hypothesis(format!(
                    "designated children {a} and {b} are not disjoint from all siblings"
                )));
            }
        }
        Ok(())
    }

    fn leaves(&self) -> Vec<Ball> {
        match &self.generator {
            Generator::ExplicitTree { nodes } => nodes
                .iter()
                .filter(|n| n.children.is_empty())
                .map(|n| Ball {
                    center: n.center.clone(),
                    radius: n.radius.clone(),
                    norm: self.norm,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn min_child_radius(&self, node: &Node) -> Option<Exact> {
        self.children(node).into_iter().map(|c| c.ball.radius).min()
    }
}

pub fn grid_ifs_example(n: u32, rho: Exact, d: Exact, seed: u64) -> Result<BallSystem> {
    BallSystem::grid_ifs(n, rho, d, seed)
}

pub fn hex_packing_example(gamma: Exact) -> Result<BallSystem> {
    BallSystem::hex_packing(gamma)
}

fn explicit_h_upper(sys: &BallSystem, node: &Node, bits: u32) -> Interval {
    let leaves = sys.leaves();
    let dim = sys.dim();
    let per_axis: i64 = match dim {
        1 | 2 => 16,
        3 => 8,
        _ => 2,
    };
    let r = &node.ball.radius;
    let half = r / int(per_axis);
    // Every point of the ball lies within `reach` of some cell center.
    let reach = match sys.norm {
        Norm::Linf => Interval::point(half.clone()),
        Norm::L2 => sqrt_exact(&(&half * &half * int(dim as i64)), bits).expect("positive"),
    };
    let total = (per_axis as usize).pow(dim as u32);
    let mut worst = Exact::zero();
    for cell in 0..total {
        let mut idx = cell;
        let local: Vec<Exact> = (0..dim)
            .map(|_| {
                let i = (idx % per_axis as usize) as i64;
                idx /= per_axis as usize;
                &half * int(2 * i + 1) - r
            })
            .collect();
        let q: Vec<Exact> = sys
            .rot
            .apply(&local)
            .iter()
            .zip(&node.ball.center)
            .map(|(o, c)| c + o)
            .collect();
        if !norm_le(&sub(&q, &node.ball.center), &(r + reach.hi()), sys.norm) {
            continue;
        }
        let best = leaves
            .iter()
            .map(|l| {
                norm_interval(&sub(&q, &l.center), sys.norm, bits)
                    .shift(&l.radius)
                    .hi()
                    .clone()
            })
            .min();
        if let Some(b) = best {
            if b > worst {
                worst = b;
            }
        }
    }
    Interval::point(worst + reach.hi())
}

/// Certified upper bound on `max_{x ∈ S_I} dist(x, C)`.
pub fn h_upper(sys: &BallSystem, word: &[usize]) -> Result<Interval> {
    h_upper_bits(sys, word, DEFAULT_PRECISION)
}

pub fn h_upper_bits(sys: &BallSystem, word: &[usize], bits: u32) -> Result<Interval> {
    let node = sys.node(word)?;
    let r = &node.ball.radius;
    Ok(match &sys.generator {
        Generator::GridIfs { rho, d, .. } => Interval::point(d * r / (int(1) - rho)),
        Generator::HexPacking { rho, gamma } => {
            let k = hex_gap_constant(bits);
            let tail = k.scale(&(rho * r / (int(1) + rho)));
            if word.is_empty() {
                tail.shift(&((int(1) - gamma) * rho * r))
            } else {
                tail
            }
        }
        Generator::ExplicitTree { .. } => {
            if node.slot == 0 && sys.leaves().is_empty() {
                Interval::point(r * int(2))
            } else {
                explicit_h_upper(sys, &node, bits)
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TailCertificate {
    SelfSimilarClosedForm,
    TruncatedDepth(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordBound {
    pub word: Word,
    pub h_upper: Interval,
    pub ratio_lower: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThicknessReportNd {
    pub lower_bound: Interval,
    pub achieved_word: Word,
    pub h_bounds: Vec<WordBound>,
    pub tail_certificate: TailCertificate,
}

fn ratio_bound(sys: &BallSystem, node: &Node, bits: u32) -> Result<Option<WordBound>> {
    let Some(min_r) = sys.min_child_radius(node) else {
        return Ok(None);
    };
    let h = h_upper_bits(sys, &node.word, bits)?;
    if !h.lo().is_positive() {
        return Ok(None);
    }
    let ratio = Interval::point(min_r).div(&h)?.round_outward(bits);
    Ok(Some(WordBound {
        word: node.word.clone(),
        h_upper: h,
        ratio_lower: ratio,
    }))
}

/// Lower bound on Yavicoli thickness.
///
/// Self-similar generators repeat the same ratio below the first level, so
/// the root and one representative word of each kind settle the infimum.
/// Explicit trees are scanned node by node.
pub fn yavicoli_thickness(sys: &BallSystem) -> Result<ThicknessReportNd> {
    let bits = DEFAULT_PRECISION;
    let mut bounds = Vec::new();
    let tag = match &sys.generator {
        Generator::GridIfs { .. } => {
            bounds.extend(ratio_bound(sys, &sys.root_node(), bits)?);
            TailCertificate::SelfSimilarClosedForm
        }
        Generator::HexPacking { .. } => {
            for w in [vec![], vec![HEX_DESIGNATED.0], vec![2]] {
                bounds.extend(ratio_bound(sys, &sys.node(&w)?, bits)?);
            }
            TailCertificate::SelfSimilarClosedForm
        }
        Generator::ExplicitTree { nodes } => {
            let mut stack = vec![sys.root_node()];
            let mut depth = 0u32;
            while let Some(n) = stack.pop() {
                depth = depth.max(n.word.len() as u32);
                bounds.extend(ratio_bound(sys, &n, bits)?);
                stack.extend(sys.children(&n));
                if bounds.len() > nodes.len() {
                    break;
                }
            }
            TailCertificate::TruncatedDepth(depth)
        }
    };
    let best = bounds
        .iter()
        .min_by(|a, b| a.ratio_lower.lo().cmp(b.ratio_lower.lo()))
        .ok_or_else(|| Error::invalid("system has no internal nodes"))?;
    let lower_bound = bounds
        .iter()
        .skip(1)
        .fold(bounds[0].ratio_lower.clone(), |acc, b| {
            acc.min(&b.ratio_lower)
        });
    Ok(ThicknessReportNd {
        lower_bound,
        achieved_word: best.word.clone(),
        h_bounds: bounds.clone(),
        tail_certificate: tag,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Uniformity {
    CertifiedAnalytic(String),
    Falsified(Ball),
    UnfalsifiedSampled(u32),
}

impl Uniformity {
    pub fn certainty(&self) -> Certainty {
        match self {
            Uniformity::CertifiedAnalytic(_) => Certainty::True,
            Uniformity::Falsified(_) => Certainty::False,
            Uniformity::UnfalsifiedSampled(_) => Certainty::Unknown,
        }
    }
}

fn random_subball(rng: &mut ChaCha8Rng, parent: &Ball, radius: &Exact) -> Ball {
    let slack = &parent.radius - radius;
    let steps: i64 = 1 << 20;
    loop {
        let v: Vec<Exact> = (0..parent.dim())
            .map(|_| rat(rng.random_range(-steps..=steps), steps))
            .collect();
        if !norm_le(&v, &int(1), parent.norm) {
            continue;
        }
        let center = parent
            .center
            .iter()
            .zip(&v)
            .map(|(c, x)| c + &slack * x)
            .collect();
        return Ball {
            center,
            radius: radius.clone(),
            norm: parent.norm,
        };
    }
}

fn analytic_uniformity(sys: &BallSystem, r: &Exact) -> Option<String> {
    match &sys.generator {
        Generator::GridIfs { rho, d, .. } => {
            let need = rho * int(2) + d;
            (r >= &need).then(|| {
                format!(
                    "r ≥ 2ρ + d = {}: a sub-square of that size covers a whole grid cell",
                    exact_string(&need)
                )
            })
        }
        Generator::HexPacking { .. } => {
            let need = hex_uniformity_constant(DEFAULT_PRECISION);
            (r >= need.hi()).then(|| {
                format!(
                    "r ≥ (2+√3)/√3·ρ ∈ {}: every point is within 2ρ/√3 of a disc center",
                    need.describe(8)
                )
            })
        }
        Generator::ExplicitTree { .. } => None,
    }
}

/// Certifies or refutes r-uniform density at and below `word`.
///
/// Generators with a closed-form argument are certified outright. Otherwise
/// a ball of relative radius `r` too small to hold any child is an immediate
/// counterexample, and failing that random sub-balls are tried.
pub fn r_uniformity_check_at(
    sys: &BallSystem,
    word: &[usize],
    r: &Exact,
    samples: u32,
    seed: u64,
) -> Result<Uniformity> {
    if !r.is_positive() || r >= &int(1) {
        return Err(Error::invalid(format!(
            "uniformity constant {} outside (0,1)",
            exact_string(r)
        )));
    }
    if let Some(why) = analytic_uniformity(sys, r) {
        return Ok(Uniformity::CertifiedAnalytic(why));
    }
    let start = sys.node(word)?;
    let mut probe = vec![start.clone()];
    probe.extend(sys.children(&start).into_iter().take(4));
    for n in &probe {
        let Some(min_r) = sys.min_child_radius(n) else {
            continue;
        };
        let rad = r * &n.ball.radius;
        if rad < min_r {
            return Ok(Uniformity::Falsified(Ball {
                center: n.ball.center.clone(),
                radius: rad,
                norm: sys.norm,
            }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0x5EED));
    for s in 0..samples {
        let n = &probe[s as usize % probe.len()];
        let kids = sys.children(n);
        if kids.is_empty() {
            continue;
        }
        let b = random_subball(&mut rng, &n.ball, &(r * &n.ball.radius));
        if !kids.iter().any(|k| b.contains_ball(&k.ball)) {
            return Ok(Uniformity::Falsified(b));
        }
    }
    Ok(Uniformity::UnfalsifiedSampled(samples))
}

pub fn r_uniformity_check(
    sys: &BallSystem,
    r: &Exact,
    samples: u32,
    seed: u64,
) -> Result<Uniformity> {
    r_uniformity_check_at(sys, &[], r, samples, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubsetBoundKind {
    HalfBound,
    FullBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetThickness {
    pub child: usize,
    pub kind: SubsetBoundKind,
    pub bound: Interval,
    /// Upper bound on `max_{x ∈ S_child} dist(x, C ∩ S_child)`.
    pub h_child_upper: Interval,
    /// Smallest distance from the child to a sibling.
    pub sibling_gap: Interval,
    pub child_h_upper: Interval,
}

/// True when `max_{x∈S_child} dist(x,C)` is certified below the distance to every sibling.
pub fn distance_child_condition(sys: &BallSystem, child: usize) -> Result<Certainty> {
    let h = h_upper(sys, &[child])?;
    let kids = sys.children(&sys.root_node());
    if child >= kids.len() {
        return Err(Error::invalid(format!("no first-generation child {child}")));
    }
    let ok = kids
        .iter()
        .enumerate()
        .all(|(j, k)| j == child || kids[child].ball.separated_by_more_than(&k.ball, h.hi()));
    Ok(Certainty::from_bool(ok))
}

/// Thickness bound for `C ∩ S_child` with the system below `child`.
pub fn subset_thickness(sys: &BallSystem, child: usize) -> Result<SubsetThickness> {
    let bits = DEFAULT_PRECISION;
    if !sys.child_is_isolated(child)? {
        return Err(Error::hypothesis(format!("child {child} meets a sibling")));
    }
    let tau = yavicoli_thickness(sys)?.lower_bound;
    let kids = sys.children(&sys.root_node());
    let sibling_gap = kids
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != child)
        .map(|(_, k)| kids[child].ball.gap(&k.ball, bits))
        .reduce(|a, b| a.min(&b))
        .unwrap_or_else(|| Interval::point(int(0)));
    let h_root = h_upper(sys, &[])?;
    let child_h = h_upper(sys, &[child])?;
    let full = distance_child_condition(sys, child)? == Certainty::True;
    if !full && tau.lo() < &int(1) {
        return Err(Error::hypothesis(format!(
            "thickness lower bound {} is below 1",
            tau.describe(8)
        )));
    }
    let (kind, bound) = if full {
        (SubsetBoundKind::FullBound, tau)
    } else {
        (SubsetBoundKind::HalfBound, tau.scale(&rat(1, 2)))
    };
    Ok(SubsetThickness {
        child,
        kind,
        bound,
        h_child_upper: h_root.scale(&int(2)),
        sibling_gap,
        child_h_upper: child_h,
    })
}

/// `Some(true)`: a ball of `sys` inside `region` was found. `Some(false)`:
/// no ball of the given depth meets `region`. `None`: undecided.
pub fn cover_meets_region(sys: &BallSystem, region: &Ball, depth: u32) -> Option<bool> {
    let mut frontier = vec![sys.root_node()];
    let mut visited = 0usize;
    for level in 0..=depth {
        let mut next = Vec::new();
        for n in frontier {
            if region.contains_ball(&n.ball) {
                return Some(true);
            }
            if !region.meets(&n.ball) {
                continue;
            }
            if level < depth {
                visited += 1;
                next.extend(sys.children(&n));
            } else {
                next.push(n);
            }
        }
        if next.is_empty() {
            return Some(false);
        }
        if visited > 50_000 {
            return None;
        }
        frontier = next;
    }
    None
}

/// Checks the four hypotheses of the higher-dimensional gap lemma for a pair of systems.
pub fn gap_lemma_rd_check(
    sys1: &BallSystem,
    sys2: &BallSystem,
    r: &Exact,
    depth: u32,
) -> Result<HypothesesReport> {
    if !r.is_positive() || r >= &rat(1, 2) {
        return Err(Error::invalid(format!(
            "r = {} outside (0, 1/2)",
            exact_string(r)
        )));
    }
    if sys1.norm != sys2.norm || sys1.dim() != sys2.dim() {
        return Err(Error::invalid("systems live in different spaces"));
    }
    let mut rep = HypothesesReport::default();
    let one_minus = int(1) - r * int(2);
    let need = int(1) / (&one_minus * &one_minus);
    let t1 = yavicoli_thickness(sys1)?.lower_bound;
    let t2 = yavicoli_thickness(sys2)?.lower_bound;
    let prod = &t1 * &t2;
    rep.push(
        "thickness_product",
        format!(
            "τ₁·τ₂ ≥ {} against 1/(1-2r)² = {}",
            prod.describe(8),
            crate::scalar::format_decimal(&need, 8)
        ),
        Certainty::from_bool(prod.lo() >= &need),
    );
    let region = Ball {
        center: sys2.root.center.clone(),
        radius: &sys2.root.radius * &one_minus,
        norm: sys2.norm,
    };
    let meets = cover_meets_region(sys1, &region, depth);
    rep.push(
        "root_overlap",
        format!("C₁ against (1-2r)·S₂ using covers to depth {depth}"),
        match meets {
            Some(true) => Certainty::True,
            Some(false) => Certainty::False,
            None => Certainty::Unknown,
        },
    );
    let rr = r * &sys2.root.radius;
    rep.push(
        "radius_ratio",
        format!(
            "rad S₁ = {} against r·rad S₂ = {}",
            exact_string(&sys1.root.radius),
            exact_string(&rr)
        ),
        Certainty::from_bool(sys1.root.radius >= rr),
    );
    for (name, s) in [("uniform_density_1", sys1), ("uniform_density_2", sys2)] {
        let u = r_uniformity_check(s, r, 256, 0)?;
        rep.push(name, format!("{u:?}"), u.certainty());
    }
    Ok(rep)
}
