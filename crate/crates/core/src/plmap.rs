//! Piecewise-linear increasing homeomorphisms of a closed interval.
//!
//! A [`PlHomeo`] is stored as matched breakpoint/value lists in canonical
//! form: both lists strictly increasing, first and last points on the
//! diagonal, and no breakpoint collinear with its neighbours. Canonical form
//! makes structural equality coincide with functional equality, so identity
//! laws such as `compose(invert(f), f) == id` can be asserted exactly.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_reprs, int, midpoint, serde_rat, to_reprs, RatRepr, Rational};

/// Direction of the flow on a wandering interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    /// `f(x) > x` inside: points move right, towards `b`.
    R,
    /// `f(x) < x` inside: points move left, towards `a`.
    L,
}

impl Orientation {
    pub fn flip(self) -> Orientation {
        match self {
            Orientation::R => Orientation::L,
            Orientation::L => Orientation::R,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Orientation::R => "R",
            Orientation::L => "L",
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A wandering interval `(a, b)` of some map, tagged with its flow direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedInterval {
    #[serde(with = "serde_rat")]
    pub a: Rational,
    #[serde(with = "serde_rat")]
    pub b: Rational,
    pub orientation: Orientation,
}

impl OrientedInterval {
    pub fn new(a: Rational, b: Rational, orientation: Orientation) -> Self {
        OrientedInterval { a, b, orientation }
    }

    pub fn length(&self) -> Rational {
        &self.b - &self.a
    }

    pub fn midpoint(&self) -> Rational {
        midpoint(&self.a, &self.b)
    }

    /// Strict containment in the open interval.
    pub fn contains(&self, x: &Rational) -> bool {
        &self.a < x && x < &self.b
    }
}

impl std::fmt::Display for OrientedInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.orientation)
    }
}

/// A closed interval `[lo, hi]`, possibly degenerate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClosedInterval {
    #[serde(with = "serde_rat")]
    pub lo: Rational,
    #[serde(with = "serde_rat")]
    pub hi: Rational,
}

impl ClosedInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        ClosedInterval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        ClosedInterval { lo: x.clone(), hi: x }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn intersect(&self, other: &ClosedInterval) -> Option<ClosedInterval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(ClosedInterval { lo, hi })
    }
}

/// Increasing piecewise-linear function from `[xs0, xsN]` onto `[ys0, ysN]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PlFn {
    pub(crate) xs: Vec<Rational>,
    pub(crate) ys: Vec<Rational>,
}

impl PlFn {
    /// Builds from raw knots and removes collinear interior knots.
    /// Caller guarantees both lists are strictly increasing and of equal length >= 2.
    pub(crate) fn from_knots(xs: Vec<Rational>, ys: Vec<Rational>) -> PlFn {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert!(xs.len() >= 2);
        let mut out_x: Vec<Rational> = Vec::with_capacity(xs.len());
        let mut out_y: Vec<Rational> = Vec::with_capacity(ys.len());
        for (x, y) in xs.into_iter().zip(ys) {
            while out_x.len() >= 2 {
                let n = out_x.len();
                let (x0, y0) = (&out_x[n - 2], &out_y[n - 2]);
                let (x1, y1) = (&out_x[n - 1], &out_y[n - 1]);
                let collinear = (y1 - y0) * (&x - x1) == (&y - y1) * (x1 - x0);
                if collinear {
                    out_x.pop();
                    out_y.pop();
                } else {
                    break;
                }
            }
            out_x.push(x);
            out_y.push(y);
        }
        PlFn { xs: out_x, ys: out_y }
    }

    pub(crate) fn lo(&self) -> &Rational {
        &self.xs[0]
    }

    pub(crate) fn hi(&self) -> &Rational {
        self.xs.last().expect("nonempty")
    }

    /// Index `i` of a segment `[xs[i], xs[i+1]]` containing `x`.
    fn segment(&self, x: &Rational) -> usize {
        let p = self.xs.partition_point(|v| v <= x);
        p.saturating_sub(1).min(self.xs.len() - 2)
    }

    pub(crate) fn eval(&self, x: &Rational) -> Rational {
        let i = self.segment(x);
        let (x0, x1) = (&self.xs[i], &self.xs[i + 1]);
        let (y0, y1) = (&self.ys[i], &self.ys[i + 1]);
        if x == x0 {
            return y0.clone();
        }
        if x == x1 {
            return y1.clone();
        }
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }

    pub(crate) fn slope(&self, i: usize) -> Rational {
        (&self.ys[i + 1] - &self.ys[i]) / (&self.xs[i + 1] - &self.xs[i])
    }

    pub(crate) fn invert(&self) -> PlFn {
        PlFn {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// `self ∘ inner`, on the part of `inner`'s domain mapped into `self`'s domain.
    /// Caller guarantees `inner`'s range is inside `self`'s domain.
    pub(crate) fn after(&self, inner: &PlFn) -> PlFn {
        let inv = inner.invert();
        let (rlo, rhi) = (&inner.ys[0], inner.ys.last().expect("nonempty"));
        let mut xs: Vec<Rational> = inner.xs.clone();
        xs.extend(self.xs.iter().filter(|x| rlo < *x && *x < rhi).map(|x| inv.eval(x)));
        xs.sort();
        xs.dedup();
        let ys = xs.iter().map(|x| self.eval(&inner.eval(x))).collect();
        PlFn::from_knots(xs, ys)
    }

    /// Restriction to `[a, b]` inside the domain.
    pub(crate) fn restrict(&self, a: &Rational, b: &Rational) -> PlFn {
        let mut xs = vec![a.clone()];
        xs.extend(self.xs.iter().filter(|x| a < *x && *x < b).cloned());
        xs.push(b.clone());
        let ys = xs.iter().map(|x| self.eval(x)).collect();
        PlFn::from_knots(xs, ys)
    }

    /// Concatenates pieces with matching ends (`prev.hi == next.lo`, values continuous).
    pub(crate) fn concat(pieces: &[PlFn]) -> PlFn {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (k, p) in pieces.iter().enumerate() {
            let skip = usize::from(k > 0);
            xs.extend(p.xs.iter().skip(skip).cloned());
            ys.extend(p.ys.iter().skip(skip).cloned());
        }
        PlFn::from_knots(xs, ys)
    }

    /// Increasing affine bijection `[a0, b0] -> [a1, b1]`.
    pub(crate) fn affine(a0: &Rational, b0: &Rational, a1: &Rational, b1: &Rational) -> PlFn {
        PlFn {
            xs: vec![a0.clone(), b0.clone()],
            ys: vec![a1.clone(), b1.clone()],
        }
    }
}

/// Orientation preserving PL homeomorphism of a closed interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlHomeo {
    f: PlFn,
}

fn check_strictly_increasing(v: &[Rational], what: &str) -> Result<()> {
    if v.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::InvalidMap(format!("{what} not strictly increasing")))
    }
}

impl PlHomeo {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<PlHomeo> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMap("need at least two breakpoints".into()));
        }
        check_strictly_increasing(&breakpoints, "breakpoints")?;
        check_strictly_increasing(&values, "values")?;
        if breakpoints[0] != values[0] || breakpoints.last() != values.last() {
            return Err(Error::InvalidMap("endpoints must be fixed".into()));
        }
        Ok(PlHomeo {
            f: PlFn::from_knots(breakpoints, values),
        })
    }

    pub(crate) fn from_fn(f: PlFn) -> PlHomeo {
        debug_assert_eq!(f.xs[0], f.ys[0]);
        debug_assert_eq!(f.xs.last(), f.ys.last());
        PlHomeo { f }
    }

    pub(crate) fn as_fn(&self) -> &PlFn {
        &self.f
    }

    pub fn identity(lo: Rational, hi: Rational) -> Result<PlHomeo> {
        if lo >= hi {
            return Err(Error::EmptyInterval { a: lo, b: hi });
        }
        Ok(PlHomeo {
            f: PlFn {
                xs: vec![lo.clone(), hi.clone()],
                ys: vec![lo, hi],
            },
        })
    }

    /// The unit-interval identity.
    pub fn unit_identity() -> PlHomeo {
        PlHomeo::identity(int(0), int(1)).expect("0 < 1")
    }

    /// One-breakpoint generator with `(a, b)` an r-interval:
    /// `(a, a), ((a+b)/2, (a+3b)/4), (b, b)`.
    pub fn canonical_r(a: &Rational, b: &Rational) -> Result<PlHomeo> {
        if a >= b {
            return Err(Error::EmptyInterval {
                a: a.clone(),
                b: b.clone(),
            });
        }
        let mid = midpoint(a, b);
        let val = (a + b * int(3)) / int(4);
        Ok(PlHomeo {
            f: PlFn {
                xs: vec![a.clone(), mid, b.clone()],
                ys: vec![a.clone(), val, b.clone()],
            },
        })
    }

    /// Inverse of [`PlHomeo::canonical_r`]; `(a, b)` is an l-interval.
    pub fn canonical_l(a: &Rational, b: &Rational) -> Result<PlHomeo> {
        Ok(PlHomeo::canonical_r(a, b)?.invert())
    }

    pub fn canonical(a: &Rational, b: &Rational, orientation: Orientation) -> Result<PlHomeo> {
        match orientation {
            Orientation::R => PlHomeo::canonical_r(a, b),
            Orientation::L => PlHomeo::canonical_l(a, b),
        }
    }

    pub fn lo(&self) -> &Rational {
        self.f.lo()
    }

    pub fn hi(&self) -> &Rational {
        self.f.hi()
    }

    pub fn domain(&self) -> (Rational, Rational) {
        (self.lo().clone(), self.hi().clone())
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.f.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.f.ys
    }

    pub fn in_domain(&self, x: &Rational) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    /// Checked evaluation.
    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        if !self.in_domain(x) {
            return Err(Error::OutsideDomain {
                point: x.clone(),
                lo: self.lo().clone(),
                hi: self.hi().clone(),
            });
        }
        Ok(self.f.eval(x))
    }

    /// Evaluation without the domain check; `x` must lie in the domain.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.f.eval(x)
    }

    pub fn invert(&self) -> PlHomeo {
        PlHomeo { f: self.f.invert() }
    }

    fn check_same_domain(&self, other: &PlHomeo) -> Result<()> {
        if self.lo() != other.lo() || self.hi() != other.hi() {
            return Err(Error::DomainMismatch {
                left: self.domain(),
                right: other.domain(),
            });
        }
        Ok(())
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &PlHomeo) -> Result<PlHomeo> {
        self.check_same_domain(inner)?;
        Ok(PlHomeo {
            f: self.f.after(&inner.f),
        })
    }

    /// `f^n(x)`; negative `n` iterates the inverse.
    pub fn iterate(&self, x: &Rational, n: i64) -> Result<Rational> {
        if !self.in_domain(x) {
            return self.evaluate(x);
        }
        let map = if n < 0 { self.invert() } else { self.clone() };
        let mut y = x.clone();
        for _ in 0..n.unsigned_abs() {
            y = map.eval(&y);
        }
        Ok(y)
    }

    pub fn is_identity(&self) -> bool {
        self.f.xs.len() == 2
    }

    /// `sup |f - g|` together with `sup |f^-1 - g^-1|`.
    pub fn c0_distance(&self, other: &PlHomeo) -> Result<Rational> {
        self.check_same_domain(other)?;
        let forward = sup_gap(&self.f, &other.f);
        let backward = sup_gap(&self.f.invert(), &other.f.invert());
        Ok(forward.max(backward))
    }

    /// Maximal closed intervals of fixed points, sorted; degenerate entries are isolated points.
    pub fn fixed_set(&self) -> Vec<ClosedInterval> {
        let (xs, ys) = (&self.f.xs, &self.f.ys);
        let mut pieces: Vec<ClosedInterval> = Vec::new();
        let mut push = |iv: ClosedInterval| match pieces.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => pieces.push(iv),
        };
        for i in 0..xs.len() - 1 {
            let d0 = &ys[i] - &xs[i];
            let d1 = &ys[i + 1] - &xs[i + 1];
            match (d0.is_zero(), d1.is_zero()) {
                (true, true) => push(ClosedInterval::new(xs[i].clone(), xs[i + 1].clone())),
                (true, false) => push(ClosedInterval::point(xs[i].clone())),
                (false, true) => push(ClosedInterval::point(xs[i + 1].clone())),
                (false, false) => {
                    if d0.is_positive() != d1.is_positive() {
                        let x = &xs[i] + &d0 * (&xs[i + 1] - &xs[i]) / (&d0 - &d1);
                        push(ClosedInterval::point(x));
                    }
                }
            }
        }
        pieces
    }

    /// Complement components of the fixed set, each tagged with its flow direction.
    pub fn wandering_intervals(&self) -> Vec<OrientedInterval> {
        let fixed = self.fixed_set();
        fixed
            .windows(2)
            .filter(|w| w[0].hi < w[1].lo)
            .map(|w| {
                let (a, b) = (w[0].hi.clone(), w[1].lo.clone());
                let m = midpoint(&a, &b);
                let orientation = if self.f.eval(&m) > m {
                    Orientation::R
                } else {
                    Orientation::L
                };
                OrientedInterval { a, b, orientation }
            })
            .collect()
    }

    /// `A ∘ f ∘ A^-1` with `A` the increasing affine map from the domain onto `[a, b]`.
    pub fn rescale(&self, a: &Rational, b: &Rational) -> Result<PlHomeo> {
        if a >= b {
            return Err(Error::EmptyInterval {
                a: a.clone(),
                b: b.clone(),
            });
        }
        let scale = (b - a) / (self.hi() - self.lo());
        let map = |x: &Rational| a + (x - self.lo()) * &scale;
        Ok(PlHomeo {
            f: PlFn {
                xs: self.f.xs.iter().map(map).collect(),
                ys: self.f.ys.iter().map(map).collect(),
            },
        })
    }

    /// Largest segment slope.
    pub fn max_slope(&self) -> Rational {
        (0..self.f.xs.len() - 1)
            .map(|i| self.f.slope(i))
            .max()
            .expect("at least one segment")
    }

    /// Lipschitz bound `L * alpha` on the oscillation of `f` over any `alpha`-ball.
    pub fn modulus_of_continuity(&self, alpha: &Rational) -> Result<Rational> {
        if !alpha.is_positive() {
            return Err(Error::NonPositive {
                name: "alpha",
                value: alpha.clone(),
            });
        }
        Ok(self.max_slope() * alpha)
    }

    /// Replaces `f` on the invariant subinterval `[a, b]` (both fixed) by `piece`,
    /// a homeomorphism of exactly `[a, b]`.
    pub fn splice(&self, piece: &PlHomeo) -> Result<PlHomeo> {
        let (a, b) = (piece.lo(), piece.hi());
        if !(self.lo() <= a && b <= self.hi()) {
            return Err(Error::OutsideDomain {
                point: if a < self.lo() { a.clone() } else { b.clone() },
                lo: self.lo().clone(),
                hi: self.hi().clone(),
            });
        }
        if &self.f.eval(a) != a || &self.f.eval(b) != b {
            return Err(Error::InvalidMap("splice window endpoints must be fixed".into()));
        }
        let mut pieces = Vec::with_capacity(3);
        if self.lo() < a {
            pieces.push(self.f.restrict(self.lo(), a));
        }
        pieces.push(piece.f.clone());
        if b < self.hi() {
            pieces.push(self.f.restrict(b, self.hi()));
        }
        Ok(PlHomeo {
            f: PlFn::concat(&pieces),
        })
    }

    /// Restriction to an invariant subinterval `[a, b]` with `a`, `b` fixed.
    pub fn restrict(&self, a: &Rational, b: &Rational) -> Result<PlHomeo> {
        if a >= b {
            return Err(Error::EmptyInterval {
                a: a.clone(),
                b: b.clone(),
            });
        }
        if !(self.in_domain(a) && self.in_domain(b)) {
            return Err(Error::OutsideDomain {
                point: if self.in_domain(a) { b.clone() } else { a.clone() },
                lo: self.lo().clone(),
                hi: self.hi().clone(),
            });
        }
        if &self.f.eval(a) != a || &self.f.eval(b) != b {
            return Err(Error::InvalidMap("restriction endpoints must be fixed".into()));
        }
        Ok(PlHomeo {
            f: self.f.restrict(a, b),
        })
    }

    /// `sup |f(x) - x|` over `[a, b]`.
    pub fn max_displacement_on(&self, a: &Rational, b: &Rational) -> Rational {
        let mut pts = vec![a.clone(), b.clone()];
        pts.extend(self.f.xs.iter().filter(|x| a < *x && *x < b).cloned());
        pts.iter().map(|x| (self.f.eval(x) - x).abs()).max().expect("nonempty")
    }
}

/// Max of `|f - g|` over the merged breakpoints (PL differences peak there).
fn sup_gap(f: &PlFn, g: &PlFn) -> Rational {
    let mut pts: Vec<&Rational> = f.xs.iter().chain(g.xs.iter()).collect();
    pts.sort();
    pts.dedup();
    pts.into_iter()
        .map(|x| (f.eval(x) - g.eval(x)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[derive(Serialize, Deserialize)]
struct PlHomeoRepr {
    domain: [RatRepr; 2],
    breakpoints: Vec<RatRepr>,
    values: Vec<RatRepr>,
}

impl Serialize for PlHomeo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlHomeoRepr {
            domain: [RatRepr::from(self.lo()), RatRepr::from(self.hi())],
            breakpoints: to_reprs(&self.f.xs),
            values: to_reprs(&self.f.ys),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlHomeo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PlHomeoRepr::deserialize(d)?;
        let lo = Rational::try_from(&repr.domain[0]).map_err(D::Error::custom)?;
        let hi = Rational::try_from(&repr.domain[1]).map_err(D::Error::custom)?;
        let xs = from_reprs(&repr.breakpoints).map_err(D::Error::custom)?;
        let ys = from_reprs(&repr.values).map_err(D::Error::custom)?;
        if xs.first() != Some(&lo) || xs.last() != Some(&hi) {
            return Err(D::Error::custom("breakpoints must start at lo and end at hi"));
        }
        PlHomeo::new(xs, ys).map_err(D::Error::custom)
    }
}

impl PartialOrd for OrientedInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrientedInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.a, &self.b, self.orientation).cmp(&(&other.a, &other.b, other.orientation))
    }
}

// Free-function forms of the operations.

pub fn evaluate(f: &PlHomeo, x: &Rational) -> Result<Rational> {
    f.evaluate(x)
}

pub fn compose(f: &PlHomeo, g: &PlHomeo) -> Result<PlHomeo> {
    f.compose(g)
}

pub fn invert(f: &PlHomeo) -> PlHomeo {
    f.invert()
}

pub fn iterate(f: &PlHomeo, x: &Rational, n: i64) -> Result<Rational> {
    f.iterate(x, n)
}

pub fn c0_distance(f: &PlHomeo, g: &PlHomeo) -> Result<Rational> {
    f.c0_distance(g)
}

pub fn fixed_set(f: &PlHomeo) -> Vec<ClosedInterval> {
    f.fixed_set()
}

pub fn wandering_intervals(f: &PlHomeo) -> Vec<OrientedInterval> {
    f.wandering_intervals()
}

pub fn canonical_r(a: &Rational, b: &Rational) -> Result<PlHomeo> {
    PlHomeo::canonical_r(a, b)
}

pub fn canonical_l(a: &Rational, b: &Rational) -> Result<PlHomeo> {
    PlHomeo::canonical_l(a, b)
}

pub fn rescale(f: &PlHomeo, a: &Rational, b: &Rational) -> Result<PlHomeo> {
    f.rescale(a, b)
}

pub fn max_slope(f: &PlHomeo) -> Rational {
    f.max_slope()
}

pub fn modulus_of_continuity(f: &PlHomeo, alpha: &Rational) -> Result<Rational> {
    f.modulus_of_continuity(alpha)
}
