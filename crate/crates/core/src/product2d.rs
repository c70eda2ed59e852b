//! Similar copies of triangles inside `C × C` for a thick Cantor set `C`.
//!
//! The base of the triangle comes from a convex-combination witness of `C`
//! laid along the first axis; the apex height is a difference `b − a` of
//! two points of `C` on the second axis.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cantor::{
    cover_within, difference_interval, membership, require_thick, IfsSet1D, Membership,
};
use crate::error::{Error, Result};
use crate::exec::Budget;
use crate::patterns1d::{find_convex_combo_with, ConfigurationWitness1D};
use crate::scalar::{int, rat, sqrt3, Certainty, Comparison, Exact, Interval, DEFAULT_PRECISION};

pub type Point2 = [Interval; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Triangle {
    pub vertices: [Point2; 3],
}

fn sub2(p: &Point2, q: &Point2) -> Point2 {
    [&p[0] - &q[0], &p[1] - &q[1]]
}

fn dot2(p: &Point2, q: &Point2) -> Interval {
    &p[0] * &q[0] + &p[1] * &q[1]
}

fn cross2(p: &Point2, q: &Point2) -> Interval {
    &p[0] * &q[1] - &p[1] * &q[0]
}

impl Triangle {
    pub fn new(vertices: [Point2; 3]) -> Self {
        Triangle { vertices }
    }

    pub fn from_exact(pts: [[Exact; 2]; 3]) -> Self {
        let [a, b, c] = pts;
        let p = |v: [Exact; 2]| {
            let [x, y] = v;
            [Interval::point(x), Interval::point(y)]
        };
        Triangle {
            vertices: [p(a), p(b), p(c)],
        }
    }

    /// Unit equilateral triangle with apex `(1/2, √3/2)`.
    pub fn equilateral(bits: u32) -> Self {
        let h = sqrt3(bits).scale(&rat(1, 2));
        Triangle {
            vertices: [
                [Interval::zero(), Interval::zero()],
                [Interval::point(int(1)), Interval::zero()],
                [Interval::from_rat(1, 2), h],
            ],
        }
    }

    fn side_sq(&self, i: usize, j: usize) -> Interval {
        let d = sub2(&self.vertices[j], &self.vertices[i]);
        dot2(&d, &d)
    }

    /// Twice the signed area.
    pub fn signed_area2(&self) -> Interval {
        let u = sub2(&self.vertices[1], &self.vertices[0]);
        let v = sub2(&self.vertices[2], &self.vertices[0]);
        cross2(&u, &v)
    }

    pub fn is_degenerate(&self) -> Certainty {
        let a = self.signed_area2();
        if a.is_point() && a.lo().is_zero() {
            Certainty::True
        } else if a.contains(&Exact::zero()) {
            Certainty::Unknown
        } else {
            Certainty::False
        }
    }
}

/// Shape parameters: longest side scaled to 1, apex at `(λ, α)` over the base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizedTriangle {
    pub alpha: Interval,
    pub lambda: Interval,
    pub degenerate: bool,
    /// Vertex indices playing `x`, `y` (the base) and `z` (the apex).
    pub labels: [usize; 3],
}

impl NormalizedTriangle {
    pub fn alpha_sq(&self) -> Interval {
        self.alpha.sqr()
    }

    /// `α² + (1−λ)² ≤ 1` up to `2⁻⁶⁰`.
    pub fn in_region(&self) -> Certainty {
        let one_minus = Interval::point(int(1)) - &self.lambda;
        let lhs = self.alpha_sq() + one_minus.sqr();
        let cap = Interval::point(int(1) + crate::scalar::pow2(-60));
        lhs.le(&cap)
    }
}

/// Scale-, rotation- and translation-free description of `T`.
pub fn normalize_triangle(t: &Triangle) -> Result<NormalizedTriangle> {
    let sides = [(0, 1, 2), (1, 2, 0), (0, 2, 1)];
    let lens: Vec<Interval> = sides.iter().map(|&(i, j, _)| t.side_sq(i, j)).collect();
    for (k, l) in lens.iter().enumerate() {
        if l.hi().is_zero() {
            let (i, j, _) = sides[k];
            return Err(Error::invalid(format!("vertices {i} and {j} coincide")));
        }
        if !l.lo().is_positive() {
            return Err(Error::unknown("a side length encloses zero"));
        }
    }
    let mut best = 0;
    for k in 1..3 {
        let longer = match lens[k].compare(&lens[best]) {
            Comparison::Greater => true,
            Comparison::Less => false,
            Comparison::Overlapping => lens[k].mid() > lens[best].mid(),
        };
        if longer {
            best = k;
        }
    }
    let (mut p, mut q, o) = sides[best];
    let base = sub2(&t.vertices[q], &t.vertices[p]);
    let apex = sub2(&t.vertices[o], &t.vertices[p]);
    let len2 = &lens[best];
    let mut lambda = dot2(&apex, &base).div(len2)?;
    let cross = cross2(&base, &apex);
    let degenerate = match t.is_degenerate() {
        Certainty::True => true,
        Certainty::False => false,
        Certainty::Unknown => {
            return Err(Error::unknown("collinearity undecided at this precision"))
        }
    };
    let alpha = if degenerate {
        Interval::zero()
    } else {
        cross.abs().div(len2)?
    };
    if lambda.mid() > rat(1, 2) {
        lambda = Interval::point(int(1)) - &lambda;
        std::mem::swap(&mut p, &mut q);
    }
    Ok(NormalizedTriangle {
        alpha,
        lambda,
        degenerate,
        labels: [p, q, o],
    })
}

/// Enclosures `a ∈ I`, `b ∈ J` of cover intervals of `C` with `b − a` able to hit `δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceHit {
    pub a: Interval,
    pub b: Interval,
    pub depth: u32,
    /// Endpoints with `b − a = δ` exactly, when the refinement lands on them.
    #[serde(serialize_with = "crate::scalar::serde_opt_exact_vec::serialize")]
    pub exact: Option<Vec<Exact>>,
}

fn diff_dfs(
    set: &IfsSet1D,
    i: &Interval,
    j: &Interval,
    delta: &Interval,
    level: u32,
    depth: u32,
    budget: &Budget,
) -> Result<Option<(Interval, Interval)>> {
    budget.spend(1)?;
    let spread = Interval::spanning(j.lo() - i.hi(), j.hi() - i.lo());
    if !spread.overlaps(delta) {
        return Ok(None);
    }
    if level == depth {
        return Ok(Some((i.clone(), j.clone())));
    }
    for ci in set.children(i) {
        for cj in set.children(j) {
            if let Some(hit) = diff_dfs(set, &ci, &cj, delta, level + 1, depth, budget)? {
                return Ok(Some(hit));
            }
        }
    }
    Ok(None)
}

/// Leftmost pair of depth-`depth` cover intervals whose difference set meets `δ`.
pub fn difference_hit(set: &IfsSet1D, delta: &Interval, depth: u32) -> Result<DifferenceHit> {
    difference_hit_with(set, delta, depth, &Budget::from_env())
}

pub fn difference_hit_with(
    set: &IfsSet1D,
    delta: &Interval,
    depth: u32,
    budget: &Budget,
) -> Result<DifferenceHit> {
    if delta.lo().is_negative() {
        return Err(Error::invalid("difference must be nonnegative"));
    }
    let l = difference_interval(set, 6)?;
    if delta.lo() > l.hi() {
        return Err(Error::invalid(format!(
            "δ = {} exceeds the certified difference interval [0, {}]",
            delta.describe(8),
            l.describe(8)
        )));
    }
    let hull = set.hull().clone();
    let (a, b) = diff_dfs(set, &hull, &hull, delta, 0, depth, budget)?
        .ok_or_else(|| Error::unknown("difference refinement found no compatible pair"))?;
    let exact = if delta.is_point() {
        let d = delta.lo();
        [a.lo(), a.hi()].iter().find_map(|x| {
            [b.lo(), b.hi()]
                .iter()
                .find(|y| &(**y - *x) == d)
                .map(|y| vec![(*x).clone(), (*y).clone()])
        })
    } else {
        None
    };
    Ok(DifferenceHit { a, b, depth, exact })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductWitness {
    /// Vertices `x`, `y` (base) and `z` (apex), each in `C × C`.
    pub vertices: [Point2; 3],
    pub shape: NormalizedTriangle,
    pub scale: Interval,
    pub delta: Interval,
    pub difference_reach: Interval,
    /// Largest deviation of `|xz|/|xy|` and `|yz|/|xy|` from the target ratios.
    pub residual: Interval,
    pub base: ConfigurationWitness1D,
    pub height: Option<DifferenceHit>,
    pub depth: u32,
}

fn point_or(iv: &Interval) -> Option<&Exact> {
    iv.is_point().then(|| iv.lo())
}

/// Pushes a point of `C` through the first branch `k` times.
fn shrink_into_branch(set: &IfsSet1D, x: &Interval, k: u32) -> Interval {
    let f = &set.branches()[0];
    let mut lo = x.lo().clone();
    let mut hi = x.hi().clone();
    for _ in 0..k {
        lo = f.apply(&lo);
        hi = f.apply(&hi);
    }
    Interval::spanning(lo, hi)
}

/// Three points of `C × C` forming a triangle similar to `T`.
pub fn find_triangle_in_product(
    set: &IfsSet1D,
    t: &Triangle,
    depth: u32,
) -> Result<ProductWitness> {
    find_triangle_in_product_with(set, t, depth, &Budget::from_env())
}

pub fn find_triangle_in_product_with(
    set: &IfsSet1D,
    t: &Triangle,
    depth: u32,
    budget: &Budget,
) -> Result<ProductWitness> {
    let bits = DEFAULT_PRECISION;
    require_thick(set)?;
    let shape = normalize_triangle(t)?;
    let lambda = point_or(&shape.lambda)
        .ok_or_else(|| Error::unknown("foot position λ is not an exact rational"))?
        .clone();
    let base = find_convex_combo_with(set, &lambda, depth, budget)?;
    let (mut a, mut b, mut c) = match &base.exact_points {
        Some(p) => (
            Interval::point(p[0].clone()),
            Interval::point(p[2].clone()),
            Interval::point(p[1].clone()),
        ),
        None => (base.a().clone(), base.b().clone(), base.c().clone()),
    };
    let low = set.hull().lo().clone();
    if shape.degenerate {
        let y0 = Interval::point(low);
        let residual = Interval::point(base.residual.clone());
        return Ok(ProductWitness {
            vertices: [[a, y0.clone()], [b, y0.clone()], [c, y0]],
            shape,
            scale: Interval::zero(),
            delta: Interval::zero(),
            difference_reach: Interval::zero(),
            residual,
            base,
            height: None,
            depth,
        });
    }
    let reach = difference_interval(set, 10)?;
    let span = |a: &Interval, b: &Interval| b - a;
    let mut k = 0;
    let cap = shape.alpha.hi().max(&int(1)).clone();
    while span(&a, &b).hi() * &cap > *reach.lo() {
        k += 1;
        if k > 200 {
            return Err(Error::unknown(
                "could not shrink the base below the difference reach",
            ));
        }
        a = shrink_into_branch(set, &a, 1);
        b = shrink_into_branch(set, &b, 1);
        c = shrink_into_branch(set, &c, 1);
    }
    let scale = span(&a, &b);
    let delta = (&scale * &shape.alpha).round_outward(bits);
    let hit = difference_hit_with(set, &delta, depth, budget)?;
    let (ya, yb) = match &hit.exact {
        Some(e) => (Interval::point(e[0].clone()), Interval::point(e[1].clone())),
        None => (hit.a.clone(), hit.b.clone()),
    };
    let vertices = [[a, ya.clone()], [b, ya], [c, yb]];
    let residual = similarity_residual(&vertices, &shape, bits)?;
    Ok(ProductWitness {
        vertices,
        shape,
        scale,
        delta,
        difference_reach: reach,
        residual,
        base,
        height: Some(hit),
        depth,
    })
}

fn dist(p: &Point2, q: &Point2, bits: u32) -> Result<Interval> {
    let d = sub2(p, q);
    dot2(&d, &d).round_outward(bits).sqrt(bits)
}

/// Enclosure of the worst deviation of side-length ratios from the shape's.
pub fn similarity_residual(
    v: &[Point2; 3],
    shape: &NormalizedTriangle,
    bits: u32,
) -> Result<Interval> {
    let xy = dist(&v[0], &v[1], bits)?;
    let xz = dist(&v[0], &v[2], bits)?;
    let yz = dist(&v[1], &v[2], bits)?;
    let a2 = shape.alpha_sq();
    let lam = &shape.lambda;
    let want_xz = (lam.sqr() + &a2).round_outward(bits).sqrt(bits)?;
    let one_minus = Interval::point(int(1)) - lam;
    let want_yz = (one_minus.sqr() + &a2).round_outward(bits).sqrt(bits)?;
    let e1 = (xz.div(&xy)? - want_xz).abs();
    let e2 = (yz.div(&xy)? - want_yz).abs();
    Ok(e1.max(&e2).round_outward(bits))
}

/// Every coordinate of the witness lies in `C` or in one cover interval of depth `depth`.
pub fn witness_in_covers(set: &IfsSet1D, w: &ProductWitness, depth: u32) -> bool {
    w.vertices.iter().flatten().all(|iv| {
        if iv.is_point() {
            !matches!(membership(set, iv.lo(), depth), Membership::OutAtDepth(_))
        } else {
            cover_within(set, depth, iv)
                .iter()
                .any(|c| c.contains_interval(iv))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third() -> IfsSet1D {
        IfsSet1D::middle_cantor(&rat(1, 3)).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let eq = normalize_triangle(&Triangle::equilateral(96)).unwrap();
        assert_eq!(eq.lambda, Interval::from_rat(1, 2));
        assert!((eq.alpha.to_f64_mid() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let right = Triangle::from_exact([[int(0), int(0)], [int(1), int(0)], [int(0), int(1)]]);
        let n = normalize_triangle(&right).unwrap();
        assert_eq!(n.alpha, Interval::from_rat(1, 2));
        assert_eq!(n.lambda, Interval::from_rat(1, 2));
        let line = Triangle::from_exact([[int(0), int(0)], [int(1), int(0)], [int(2), int(0)]]);
        let n = normalize_triangle(&line).unwrap();
        assert!(n.degenerate);
        assert_eq!(n.alpha, Interval::zero());
        let rep = Triangle::from_exact([[int(0), int(0)], [int(0), int(0)], [int(2), int(0)]]);
        assert!(normalize_triangle(&rep).is_err());
    }

    #[test]
    fn difference_hits() {
        let c = third();
        let h = difference_hit(&c, &Interval::point(int(1)), 8).unwrap();
        assert_eq!(h.exact, Some(vec![int(0), int(1)]));
        let h = difference_hit(&c, &Interval::from_rat(1, 3), 8).unwrap();
        assert_eq!(h.exact, Some(vec![int(0), rat(1, 3)]));
        let d = sqrt3(128).scale(&rat(1, 3));
        let h = difference_hit(&c, &d, 40).unwrap();
        let w = crate::scalar::powi(&rat(1, 3), 40);
        assert!(h.a.width() <= w && h.b.width() <= w);
        assert!(difference_hit(&c, &Interval::from_rat(3, 2), 4).is_err());
    }

    #[test]
    fn equilateral_in_product() {
        let c = third();
        let w = find_triangle_in_product(&c, &Triangle::equilateral(128), 40).unwrap();
        assert!(w.residual.hi() < &rat(1, 1_000_000_000));
        assert!(witness_in_covers(&c, &w, 40));
    }

    #[test]
    fn collinear_and_thin_sets() {
        let c = third();
        let line = Triangle::from_exact([[int(0), int(0)], [rat(1, 2), int(0)], [int(1), int(0)]]);
        let w = find_triangle_in_product(&c, &line, 10).unwrap();
        assert!(w.height.is_none());
        let thin = IfsSet1D::middle_cantor(&rat(2, 5)).unwrap();
        assert!(find_triangle_in_product(&thin, &Triangle::equilateral(64), 10).is_err());
    }
}
