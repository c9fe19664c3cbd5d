//! Exact model of the plane continuum `Y`: a circle arc under the base
//! segment `[-1, 1] x {0}`, and the vertical segments `{-1+2/n} x [0, 1/n]`
//! for `n <= M`. Arcs are polylines with rational vertices; the circle arc is
//! inscribed with 64 segments whose vertices lie exactly on the circle.
//!
//! Points are `(arc, t)` with `t in [0, 1]`. Straight arcs are parametrised
//! proportionally to length; polylines are uniform per segment. Every arc is
//! parametrised outward from the anchor `(-1, 0)`.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::build_f_star;
use crate::error::{Error, Result};
use crate::plmap::PlHomeo;
use crate::rational::{int, rat, round_to_den, serde_rat, sqrt_enclosure, sqrt_lower, sqrt_upper, to_f64, Rational};

/// Number of segments of the inscribed circle polyline.
pub const CIRCLE_SEGMENTS: usize = 64;

/// Bits of precision for square-root enclosures of distances.
pub const SQRT_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "serde_rat")]
    pub x: Rational,
    #[serde(with = "serde_rat")]
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Point {
        Point { x, y }
    }

    pub fn dist_sq(&self, other: &Point) -> Rational {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }

    fn lerp(&self, other: &Point, s: &Rational) -> Point {
        Point {
            x: &self.x + (&other.x - &self.x) * s,
            y: &self.y + (&other.y - &self.y) * s,
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.x), to_f64(&self.y))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub label: String,
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedding {
    Segment,
    /// Interior polyline vertices between the two endpoints.
    Polyline {
        points: Vec<Point>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub id: usize,
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub embedding: Embedding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    Start,
    End,
}

impl End {
    pub fn param(self) -> Rational {
        match self {
            End::Start => int(0),
            End::End => int(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YModel {
    /// Number of vertical segments kept (0 for hand-built models).
    pub m: u32,
    /// Vertex every other vertex is fixed after, in the cascade order.
    pub anchor: usize,
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<Arc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YPoint {
    pub arc: usize,
    #[serde(with = "serde_rat")]
    pub t: Rational,
}

impl YPoint {
    pub fn new(arc: usize, t: Rational) -> YPoint {
        YPoint { arc, t }
    }
}

/// A point of the unit circle with rational coordinates, from the
/// half-angle parameter `s = tan(θ/2)`.
fn circle_point(s: &Rational) -> (Rational, Rational) {
    let s2 = s * s;
    let den = int(1) + &s2;
    ((int(1) - &s2) / &den, (s * int(2)) / den)
}

fn circle_polyline() -> Vec<Point> {
    let den = num_bigint::BigInt::from(1u64 << 20);
    let half = CIRCLE_SEGMENTS / 2;
    let mut left = Vec::with_capacity(half);
    for j in 1..=half {
        let theta = std::f64::consts::PI * j as f64 / CIRCLE_SEGMENTS as f64;
        let s = if j == half {
            int(1)
        } else {
            let approx = Rational::from_float((theta / 2.0).tan()).expect("finite");
            round_to_den(&approx, &den)
        };
        let (c, sn) = circle_point(&s);
        // angle θ measured from (-1, 0) through the lower half plane
        left.push(Point::new(-c, -sn));
    }
    let mut pts = left.clone();
    for j in (1..half).rev() {
        let p = &left[j - 1];
        pts.push(Point::new(-p.x.clone(), p.y.clone()));
    }
    pts
}

/// `-1 + 2/n`.
pub fn branch_x(n: u32) -> Rational {
    int(-1) + rat(2, n as i64)
}

/// Truncated `Y` keeping the vertical segments `n = 1..=m`.
pub fn build_y(m: u32) -> Result<YModel> {
    if m == 0 {
        return Err(Error::NonPositive {
            name: "M",
            value: int(0),
        });
    }
    let mut vertices = vec![Vertex {
        id: 0,
        label: "p~".into(),
        point: Point::new(int(-1), int(0)),
    }];
    // branch points left to right: n = m, m-1, ..., 1
    let base_id = |n: u32| (m - n + 1) as usize;
    for n in (1..=m).rev() {
        vertices.push(Vertex {
            id: base_id(n),
            label: format!("b{n}"),
            point: Point::new(branch_x(n), int(0)),
        });
    }
    let tip_id = |n: u32| (m + n) as usize;
    for n in 1..=m {
        vertices.push(Vertex {
            id: tip_id(n),
            label: format!("t{n}"),
            point: Point::new(branch_x(n), rat(1, n as i64)),
        });
    }

    let mut arcs = vec![Arc {
        id: 0,
        label: "circle".into(),
        start: 0,
        end: base_id(1),
        embedding: Embedding::Polyline {
            points: circle_polyline(),
        },
    }];
    let mut prev = 0usize;
    for n in (1..=m).rev() {
        arcs.push(Arc {
            id: arcs.len(),
            label: format!("h{n}"),
            start: prev,
            end: base_id(n),
            embedding: Embedding::Segment,
        });
        prev = base_id(n);
    }
    for n in 1..=m {
        arcs.push(Arc {
            id: arcs.len(),
            label: format!("v{n}"),
            start: base_id(n),
            end: tip_id(n),
            embedding: Embedding::Segment,
        });
    }
    Ok(YModel {
        m,
        anchor: 0,
        vertices,
        arcs,
    })
}

/// Distance between `p` and the segment `[a, b]`, squared, with the
/// parameter of the nearest point.
pub fn point_segment(p: &Point, a: &Point, b: &Point) -> (Rational, Rational) {
    let abx = &b.x - &a.x;
    let aby = &b.y - &a.y;
    let len2 = &abx * &abx + &aby * &aby;
    if len2.is_zero() {
        return (p.dist_sq(a), int(0));
    }
    let dot = (&p.x - &a.x) * &abx + (&p.y - &a.y) * &aby;
    let s = (dot / len2).max(int(0)).min(int(1));
    let q = a.lerp(b, &s);
    (p.dist_sq(&q), s)
}

fn orient(a: &Point, b: &Point, c: &Point) -> i8 {
    let v = (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x);
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    a.x.clone().min(b.x.clone()) <= p.x
        && p.x <= a.x.clone().max(b.x.clone())
        && a.y.clone().min(b.y.clone()) <= p.y
        && p.y <= a.y.clone().max(b.y.clone())
}

fn boxes_apart(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (a, b, c, d) = (a.to_f64(), b.to_f64(), c.to_f64(), d.to_f64());
    let gap = 1e-9;
    a.0.max(b.0) + gap < c.0.min(d.0)
        || c.0.max(d.0) + gap < a.0.min(b.0)
        || a.1.max(b.1) + gap < c.1.min(d.1)
        || c.1.max(d.1) + gap < a.1.min(b.1)
}

/// Exact closed-segment intersection test.
pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    if boxes_apart(a, b, c, d) {
        return false;
    }
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Squared distance between closed segments.
pub fn segment_distance_sq(a: &Point, b: &Point, c: &Point, d: &Point) -> Rational {
    if segments_intersect(a, b, c, d) {
        return int(0);
    }
    [
        point_segment(a, c, d).0,
        point_segment(b, c, d).0,
        point_segment(c, a, b).0,
        point_segment(d, a, b).0,
    ]
    .into_iter()
    .min()
    .expect("four candidates")
}

/// Squared distance between two polylines.
pub fn polyline_distance_sq(p: &[Point], q: &[Point]) -> Rational {
    let mut best: Option<Rational> = None;
    for a in p.windows(2) {
        for b in q.windows(2) {
            let d = segment_distance_sq(&a[0], &a[1], &b[0], &b[1]);
            if d.is_zero() {
                return d;
            }
            if best.as_ref().is_none_or(|x| &d < x) {
                best = Some(d);
            }
        }
    }
    best.unwrap_or_else(|| p[0].dist_sq(&q[0]))
}

impl YModel {
    pub fn arc(&self, id: usize) -> Result<&Arc> {
        self.arcs
            .get(id)
            .filter(|a| a.id == id)
            .ok_or_else(|| Error::MalformedModel(format!("no arc with id {id}")))
    }

    pub fn vertex(&self, id: usize) -> Result<&Vertex> {
        self.vertices
            .get(id)
            .filter(|v| v.id == id)
            .ok_or_else(|| Error::MalformedModel(format!("no vertex with id {id}")))
    }

    /// Full polyline of an arc, endpoints included.
    pub fn arc_points(&self, id: usize) -> Vec<Point> {
        let arc = &self.arcs[id];
        let mut pts = vec![self.vertices[arc.start].point.clone()];
        if let Embedding::Polyline { points } = &arc.embedding {
            pts.extend(points.iter().cloned());
        }
        pts.push(self.vertices[arc.end].point.clone());
        pts
    }

    pub fn embed(&self, p: &YPoint) -> Point {
        let pts = self.arc_points(p.arc);
        embed_on(&pts, &p.t)
    }

    /// Rational upper bound on the Lipschitz constant of `t -> embed(arc, t)`.
    pub fn upper_lipschitz(&self, id: usize) -> Rational {
        let pts = self.arc_points(id);
        let k = int((pts.len() - 1) as i64);
        pts.windows(2)
            .map(|w| sqrt_upper(&w[0].dist_sq(&w[1]), SQRT_BITS))
            .max()
            .expect("at least one segment")
            * k
    }

    /// Lower bi-Lipschitz constant: `|embed(t) - embed(s)| >= λ |t - s|`.
    ///
    /// Exact for straight arcs. For polylines the minimum ratio over all pairs
    /// of polyline vertices and over single segments, with a 10% margin for
    /// pairs of points between vertices.
    pub fn lower_lipschitz(&self, id: usize) -> Rational {
        let pts = self.arc_points(id);
        let n = pts.len() - 1;
        if n == 1 {
            return sqrt_lower(&pts[0].dist_sq(&pts[1]), SQRT_BITS);
        }
        let k = int(n as i64);
        let mut best: Option<Rational> = None;
        for i in 0..n {
            for j in i + 1..=n {
                let ratio = sqrt_lower(&pts[i].dist_sq(&pts[j]), SQRT_BITS) * &k / int((j - i) as i64);
                if best.as_ref().is_none_or(|b| &ratio < b) {
                    best = Some(ratio);
                }
            }
        }
        best.expect("n >= 2") * rat(9, 10)
    }

    /// Nearest point of an arc: `(t, squared distance)`, smallest `t` on ties.
    pub fn project(&self, id: usize, p: &Point) -> (Rational, Rational) {
        let pts = self.arc_points(id);
        project_on(&pts, p)
    }

    pub fn incident(&self, vertex: usize) -> Vec<(usize, End)> {
        let mut out = Vec::new();
        for a in &self.arcs {
            if a.start == vertex {
                out.push((a.id, End::Start));
            }
            if a.end == vertex {
                out.push((a.id, End::End));
            }
        }
        out
    }

    /// Vertex a point sits on, if any.
    pub fn vertex_of(&self, p: &YPoint) -> Option<usize> {
        let arc = &self.arcs[p.arc];
        if p.t.is_zero() {
            Some(arc.start)
        } else if p.t.is_one() {
            Some(arc.end)
        } else {
            None
        }
    }

    /// Endpoints are stored on the lowest-numbered incident arc.
    pub fn canonical(&self, p: &YPoint) -> YPoint {
        match self.vertex_of(p) {
            Some(v) => {
                let (arc, end) = self.incident(v)[0];
                YPoint::new(arc, end.param())
            }
            None => p.clone(),
        }
    }

    pub fn same_point(&self, p: &YPoint, q: &YPoint) -> bool {
        self.canonical(p) == self.canonical(q)
    }

    /// Sub-polyline of an arc between parameters `t0 <= t1`.
    pub fn piece(&self, id: usize, t0: &Rational, t1: &Rational) -> Vec<Point> {
        let pts = self.arc_points(id);
        let k = pts.len() - 1;
        let kr = int(k as i64);
        let mut out = vec![embed_on(&pts, t0)];
        for (j, p) in pts.iter().enumerate().take(k).skip(1) {
            let tj = int(j as i64) / &kr;
            if t0 < &tj && &tj < t1 {
                out.push(p.clone());
            }
        }
        out.push(embed_on(&pts, t1));
        out
    }

    /// Squared diameter bound from the bounding box of all polyline vertices.
    pub fn diameter_sq_bound(&self) -> Rational {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for a in &self.arcs {
            for p in self.arc_points(a.id) {
                xs.push(p.x);
                ys.push(p.y);
            }
        }
        let span = |v: &Vec<Rational>| v.iter().max().expect("nonempty") - v.iter().min().expect("nonempty");
        let (dx, dy) = (span(&xs), span(&ys));
        &dx * &dx + &dy * &dy
    }
}

pub(crate) fn embed_on(pts: &[Point], t: &Rational) -> Point {
    let k = pts.len() - 1;
    let scaled = t * int(k as i64);
    let j = scaled.floor().to_integer();
    let j = num_traits::ToPrimitive::to_usize(&j).unwrap_or(0).min(k - 1);
    let s = scaled - int(j as i64);
    pts[j].lerp(&pts[j + 1], &s)
}

pub(crate) fn project_on(pts: &[Point], p: &Point) -> (Rational, Rational) {
    let k = int((pts.len() - 1) as i64);
    let mut best: Option<(Rational, Rational)> = None;
    for (j, w) in pts.windows(2).enumerate() {
        let (d, s) = point_segment(p, &w[0], &w[1]);
        let t = (int(j as i64) + s) / &k;
        if best.as_ref().is_none_or(|(_, bd)| &d < bd) {
            best = Some((t, d));
        }
    }
    best.expect("at least one segment")
}

/// Cached polylines and Lipschitz bounds for repeated queries on one model.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub polys: Vec<Vec<Point>>,
    polys_f64: Vec<Vec<(f64, f64)>>,
    pub upper: Vec<Rational>,
    pub lower: Vec<Rational>,
}

impl Geometry {
    pub fn new(model: &YModel) -> Geometry {
        let polys: Vec<Vec<Point>> = model.arcs.iter().map(|a| model.arc_points(a.id)).collect();
        Geometry {
            polys_f64: polys.iter().map(|p| p.iter().map(Point::to_f64).collect()).collect(),
            polys,
            upper: model.arcs.iter().map(|a| model.upper_lipschitz(a.id)).collect(),
            lower: model.arcs.iter().map(|a| model.lower_lipschitz(a.id)).collect(),
        }
    }

    pub fn arcs(&self) -> usize {
        self.polys.len()
    }

    pub fn embed(&self, p: &YPoint) -> Point {
        embed_on(&self.polys[p.arc], &p.t)
    }

    pub fn project(&self, arc: usize, p: &Point) -> (Rational, Rational) {
        project_on(&self.polys[arc], p)
    }

    /// Floating-point `(segment, distance)` of the nearest segment of an arc.
    fn approx_nearest(&self, arc: usize, p: (f64, f64)) -> (usize, f64) {
        self.polys_f64[arc]
            .windows(2)
            .map(|w| {
                let (ax, ay, bx, by) = (w[0].0, w[0].1, w[1].0, w[1].1);
                let (dx, dy) = (bx - ax, by - ay);
                let len2 = dx * dx + dy * dy;
                let s = if len2 > 0.0 {
                    (((p.0 - ax) * dx + (p.1 - ay) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                ((ax + s * dx - p.0).powi(2) + (ay + s * dy - p.1).powi(2)).sqrt()
            })
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (j, d)| if d < best.1 { (j, d) } else { best },
            )
    }

    /// Floating-point distance from a point to an arc, for prefiltering.
    pub fn approx_distance(&self, arc: usize, p: (f64, f64)) -> f64 {
        self.approx_nearest(arc, p).1
    }

    /// Like [`project`](Self::project) but only examines the segments next to
    /// the floating-point nearest one. The returned squared distance is exact
    /// for the returned parameter, and at worst marginally above the true
    /// minimum.
    pub fn project_near(&self, arc: usize, p: &Point) -> (Rational, Rational) {
        let pts = &self.polys[arc];
        let k = pts.len() - 1;
        if k <= 3 {
            return project_on(pts, p);
        }
        let (j, _) = self.approx_nearest(arc, p.to_f64());
        let kr = int(k as i64);
        let mut best: Option<(Rational, Rational)> = None;
        for i in j.saturating_sub(1)..=(j + 1).min(k - 1) {
            let (d, s) = point_segment(p, &pts[i], &pts[i + 1]);
            if best.as_ref().is_none_or(|(_, bd)| &d < bd) {
                best = Some(((int(i as i64) + s) / &kr, d));
            }
        }
        best.expect("at least one segment")
    }
}

/// Euclidean distance between embedded points: exact when rational, otherwise
/// the upper end of an enclosure of width at most `2^-24`.
pub fn y_distance(model: &YModel, p: &YPoint, q: &YPoint) -> Rational {
    y_distance_enclosure(model, p, q).1
}

pub fn y_distance_enclosure(model: &YModel, p: &YPoint, q: &YPoint) -> (Rational, Rational) {
    sqrt_enclosure(&y_distance_sq(model, p, q), SQRT_BITS)
}

pub fn y_distance_sq(model: &YModel, p: &YPoint, q: &YPoint) -> Rational {
    model.embed(p).dist_sq(&model.embed(q))
}

pub fn embed(model: &YModel, p: &YPoint) -> Point {
    model.embed(p)
}

/// A homeomorphism of the model that keeps every arc invariant: one map of
/// `[0, 1]` per arc, fixing both ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct YHomeo {
    pub maps: BTreeMap<usize, PlHomeo>,
}

impl YHomeo {
    pub fn new(model: &YModel, maps: BTreeMap<usize, PlHomeo>) -> Result<YHomeo> {
        let h = YHomeo { maps };
        h.validate(model)?;
        Ok(h)
    }

    pub fn identity(model: &YModel) -> YHomeo {
        YHomeo {
            maps: model.arcs.iter().map(|a| (a.id, PlHomeo::unit_identity())).collect(),
        }
    }

    pub fn validate(&self, model: &YModel) -> Result<()> {
        for a in &model.arcs {
            let f = self
                .maps
                .get(&a.id)
                .ok_or_else(|| Error::MalformedModel(format!("no map for arc {}", a.id)))?;
            if f.domain() != (int(0), int(1)) {
                return Err(Error::DomainMismatch {
                    left: f.domain(),
                    right: (int(0), int(1)),
                });
            }
        }
        if self.maps.len() != model.arcs.len() {
            return Err(Error::MalformedModel("maps for unknown arcs".into()));
        }
        Ok(())
    }

    pub fn on_arc(&self, arc: usize) -> &PlHomeo {
        &self.maps[&arc]
    }

    pub fn apply(&self, p: &YPoint) -> YPoint {
        YPoint::new(p.arc, self.maps[&p.arc].eval(&p.t))
    }

    pub fn apply_inverse(&self, p: &YPoint) -> YPoint {
        YPoint::new(p.arc, self.maps[&p.arc].invert().eval(&p.t))
    }

    pub fn inverse(&self) -> YHomeo {
        YHomeo {
            maps: self.maps.iter().map(|(k, f)| (*k, f.invert())).collect(),
        }
    }
}

pub fn apply(g: &YHomeo, p: &YPoint) -> YPoint {
    g.apply(p)
}

pub fn apply_inverse(g: &YHomeo, p: &YPoint) -> YPoint {
    g.apply_inverse(p)
}

/// `f*_N` on every arc, in the arc's own parameter.
pub fn build_g_star(model: &YModel, depth: u32) -> YHomeo {
    let f = build_f_star(depth);
    YHomeo {
        maps: model.arcs.iter().map(|a| (a.id, f.clone())).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub arcs: usize,
    pub vertices: usize,
    /// Vertex ids in the order they are forced to be fixed, starting at the anchor.
    pub cascade: Vec<usize>,
    pub cascade_labels: Vec<String>,
    pub covering: bool,
    pub free_interiors: bool,
    /// Arc invariance and fixed endpoints are properties of the map
    /// representation, not checked here.
    pub invariance: String,
}

/// Checks that the arcs form a connected graph on the vertex set and meet only
/// at shared endpoints, and reports the order in which vertices get fixed when
/// arcs are peeled off from the anchor.
pub fn check_arc_decomposition(model: &YModel) -> Result<DecompositionReport> {
    let bad = |msg: String| Err(Error::MalformedModel(msg));
    for (i, v) in model.vertices.iter().enumerate() {
        if v.id != i {
            return bad(format!("vertex at position {i} has id {}", v.id));
        }
    }
    for (i, a) in model.arcs.iter().enumerate() {
        if a.id != i {
            return bad(format!("arc at position {i} has id {}", a.id));
        }
        if a.start >= model.vertices.len() || a.end >= model.vertices.len() {
            return bad(format!("arc {i} has an unknown endpoint"));
        }
        if a.start == a.end {
            return bad(format!("arc {i} is a loop"));
        }
    }
    if model.anchor >= model.vertices.len() {
        return bad("anchor is not a vertex".into());
    }
    for v in &model.vertices {
        if model.incident(v.id).is_empty() {
            return bad(format!("vertex {} lies on no arc", v.id));
        }
    }

    // geometry: simple arcs meeting only at shared endpoints
    let polys: Vec<Vec<Point>> = model.arcs.iter().map(|a| model.arc_points(a.id)).collect();
    for (i, p) in polys.iter().enumerate() {
        for w in p.windows(2) {
            if w[0] == w[1] {
                return bad(format!("arc {i} has a degenerate segment"));
            }
        }
        for s in 0..p.len() - 1 {
            for u in s + 1..p.len() - 1 {
                let touching = u == s + 1;
                let hit = segments_intersect(&p[s], &p[s + 1], &p[u], &p[u + 1]);
                if !touching && hit {
                    return bad(format!("arc {i} intersects itself"));
                }
                if touching && folds_back(&p[s + 1], &p[s], &p[u + 1]) {
                    return bad(format!("arc {i} folds back on itself"));
                }
            }
        }
    }
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (ai, aj) = (&model.arcs[i], &model.arcs[j]);
            let shared: Vec<usize> = [ai.start, ai.end]
                .into_iter()
                .filter(|v| *v == aj.start || *v == aj.end)
                .collect();
            for s in polys[i].windows(2) {
                for u in polys[j].windows(2) {
                    if !segments_intersect(&s[0], &s[1], &u[0], &u[1]) {
                        continue;
                    }
                    let ok = shared.iter().any(|&v| {
                        let vp = &model.vertices[v].point;
                        let s_end = [&s[0], &s[1]].into_iter().find(|q| *q == vp);
                        let u_end = [&u[0], &u[1]].into_iter().find(|q| *q == vp);
                        match (s_end, u_end) {
                            (Some(_), Some(_)) => {
                                let so = if &s[0] == vp { &s[1] } else { &s[0] };
                                let uo = if &u[0] == vp { &u[1] } else { &u[0] };
                                !folds_back(vp, so, uo)
                            }
                            _ => false,
                        }
                    });
                    if !ok {
                        return bad(format!("arcs {i} and {j} meet away from a shared endpoint"));
                    }
                }
            }
        }
    }

    // connectivity and cascade order
    let mut seen = vec![false; model.vertices.len()];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([model.anchor]);
    seen[model.anchor] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for (arc, end) in model.incident(v) {
            let a = &model.arcs[arc];
            let other = if end == End::Start { a.end } else { a.start };
            if !seen[other] {
                seen[other] = true;
                queue.push_back(other);
            }
        }
    }
    if order.len() != model.vertices.len() {
        return bad("arcs do not connect all vertices".into());
    }
    Ok(DecompositionReport {
        arcs: model.arcs.len(),
        vertices: model.vertices.len(),
        cascade_labels: order.iter().map(|&v| model.vertices[v].label.clone()).collect(),
        cascade: order,
        covering: true,
        free_interiors: true,
        invariance: "assumed: every map of the model keeps each arc invariant and fixes its endpoints".into(),
    })
}

/// Whether segments `[v, a]` and `[v, b]` overlap beyond `v`.
fn folds_back(v: &Point, a: &Point, b: &Point) -> bool {
    if orient(v, a, b) != 0 {
        return false;
    }
    let dot = (&a.x - &v.x) * (&b.x - &v.x) + (&a.y - &v.y) * (&b.y - &v.y);
    dot.is_positive()
}
