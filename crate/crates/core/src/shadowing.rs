//! Pseudo-orbits, exact shadowing sets, empirical shadowing moduli, and the
//! quasi-attractor certificates that glue arc-level shadowing into shadowing
//! on the whole model.

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuum::{polyline_distance_sq, End, Geometry, Point, YHomeo, YModel, YPoint, SQRT_BITS};
use crate::error::{Error, Result};
use crate::par::{all_indexed, map_indexed, Execution};
use crate::plmap::{ClosedInterval, Orientation, PlHomeo};
use crate::random::{grid_den, grid_point, grid_point_closed, trial_rng};
use crate::rational::{
    format_rational, int, midpoint, parse_rational, pow2_inv, serde_rat, sqrt_upper, to_f64, Rational,
};

const TAG_ORBIT: u64 = 0x6f_7262_6974;
const TAG_MODULUS: u64 = 0x6d_6f64_756c_7573;
const TAG_ARC_TRIALS: u64 = 0x6172_6373;
const TAG_GLOBAL_TRIALS: u64 = 0x676c_6f62_616c;

/// Index range `[-back, forward]`; index 0 is the starting point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub back: u32,
    pub forward: u32,
}

impl Window {
    pub fn forward(n: u32) -> Window {
        Window { back: 0, forward: n }
    }

    pub fn len(&self) -> usize {
        (self.back + self.forward + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Points `x_i` for `i` in `start..start + points.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOrbit<P> {
    pub points: Vec<P>,
    pub start: i64,
    /// Bound the generator certified: every jump is strictly below it (or
    /// zero for true orbits).
    pub delta: Rational,
}

impl<P> PseudoOrbit<P> {
    pub fn window(&self) -> Window {
        let back = (-self.start).max(0) as u32;
        Window {
            back,
            forward: (self.points.len() as i64 + self.start - 1).max(0) as u32,
        }
    }

    /// The point at index 0.
    pub fn origin(&self) -> &P {
        &self.points[(-self.start) as usize]
    }
}

/// Row format of orbit CSV files.
pub trait CsvPoint: Sized {
    const HEADER: &'static str;
    fn to_fields(&self) -> String;
    fn from_fields(fields: &[&str]) -> Result<Self>;
}

impl CsvPoint for Rational {
    const HEADER: &'static str = "index,point";

    fn to_fields(&self) -> String {
        format_rational(self)
    }

    fn from_fields(fields: &[&str]) -> Result<Self> {
        match fields {
            [x] => parse_rational(x),
            _ => Err(Error::Parse(format!("expected one coordinate, got {}", fields.len()))),
        }
    }
}

impl CsvPoint for YPoint {
    const HEADER: &'static str = "index,arc,t";

    fn to_fields(&self) -> String {
        format!("{},{}", self.arc, format_rational(&self.t))
    }

    fn from_fields(fields: &[&str]) -> Result<Self> {
        match fields {
            [arc, t] => Ok(YPoint::new(
                arc.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad arc id {arc:?}")))?,
                parse_rational(t)?,
            )),
            _ => Err(Error::Parse(format!("expected arc and t, got {} fields", fields.len()))),
        }
    }
}

impl<P: CsvPoint> PseudoOrbit<P> {
    /// CSV with a `# delta=num/den` comment line and a header row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# delta={}\n{}\n", format_rational(&self.delta), P::HEADER);
        for (i, p) in self.points.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.start + i as i64, p.to_fields()));
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output. Indices must be consecutive and
    /// include 0; a missing delta comment gives `delta = 0`.
    pub fn from_csv(text: &str) -> Result<PseudoOrbit<P>> {
        let mut delta = int(0);
        let mut rows: Vec<(i64, P)> = Vec::new();
        let mut header_seen = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(d) = rest.trim().strip_prefix("delta=") {
                    delta = parse_rational(d)?;
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.replace(' ', "") == P::HEADER {
                    continue;
                }
                return Err(Error::Parse(format!("expected header {:?}", P::HEADER)));
            }
            let fields: Vec<&str> = line.split(',').collect();
            let idx: i64 = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {:?}", fields[0])))?;
            rows.push((idx, P::from_fields(&fields[1..])?));
        }
        if rows.is_empty() {
            return Err(Error::Parse("orbit has no points".into()));
        }
        let start = rows[0].0;
        if rows.iter().enumerate().any(|(i, (idx, _))| *idx != start + i as i64) {
            return Err(Error::Parse("orbit indices must be consecutive".into()));
        }
        if start > 0 || start + (rows.len() as i64) <= 0 {
            return Err(Error::Parse("orbit window must contain index 0".into()));
        }
        Ok(PseudoOrbit {
            points: rows.into_iter().map(|(_, p)| p).collect(),
            start,
            delta,
        })
    }
}

fn sample_orbit(
    f: &PlHomeo,
    f_inv: &PlHomeo,
    delta: &Rational,
    window: Window,
    x0: &Rational,
    rng: &mut ChaCha8Rng,
) -> PseudoOrbit<Rational> {
    let (lo, hi) = f.domain();
    let noisy = |target: Rational, radius: &Rational, rng: &mut ChaCha8Rng| -> Rational {
        if radius.is_zero() {
            return target;
        }
        let den = grid_den(radius, 64);
        grid_point(rng, &(&target - radius), &(&target + radius), &lo, &hi, &den).unwrap_or(target)
    };
    let back_radius = if window.back > 0 { delta / f.max_slope() } else { int(0) };
    let mut back = Vec::with_capacity(window.back as usize);
    let mut cur = x0.clone();
    for _ in 0..window.back {
        cur = noisy(f_inv.eval(&cur), &back_radius, rng);
        back.push(cur.clone());
    }
    back.reverse();
    let mut points = back;
    points.push(x0.clone());
    let mut cur = x0.clone();
    for _ in 0..window.forward {
        cur = noisy(f.eval(&cur), delta, rng);
        points.push(cur.clone());
    }
    PseudoOrbit {
        points,
        start: -(window.back as i64),
        delta: delta.clone(),
    }
}

/// Seeded δ-pseudo-orbit of an interval map. Forward jumps are drawn uniformly
/// from a dyadic grid inside `(f(x) - δ, f(x) + δ)`, backward ones inside
/// `(f⁻¹(x) - δ/L, f⁻¹(x) + δ/L)` with `L` the largest slope, both clipped to
/// the domain. `δ = 0` gives the true orbit.
pub fn generate_pseudo_orbit(
    f: &PlHomeo,
    delta: &Rational,
    window: Window,
    x0: &Rational,
    seed: u64,
) -> Result<PseudoOrbit<Rational>> {
    if delta.is_negative() {
        return Err(Error::NonPositive {
            name: "delta",
            value: delta.clone(),
        });
    }
    f.evaluate(x0)?;
    let mut rng = trial_rng(seed, TAG_ORBIT, 0);
    Ok(sample_orbit(f, &f.invert(), delta, window, x0, &mut rng))
}

/// `max |f(x_i) - x_{i+1}|` over consecutive pairs.
pub fn verify_pseudo_orbit(f: &PlHomeo, orbit: &PseudoOrbit<Rational>) -> Rational {
    orbit
        .points
        .windows(2)
        .map(|w| (f.eval(&w[0]) - &w[1]).abs())
        .max()
        .unwrap_or_else(|| int(0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowingSet {
    pub intervals: Vec<ClosedInterval>,
    #[serde(with = "serde_rat")]
    pub epsilon: Rational,
}

impl ShadowingSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, y: &Rational) -> bool {
        self.intervals.iter().any(|c| c.contains(y))
    }
}

/// Points `y` with `|f^i(y) - x_i| <= ε` for every index of the orbit.
pub fn shadowing_set(f: &PlHomeo, orbit: &PseudoOrbit<Rational>, epsilon: &Rational) -> ShadowingSet {
    shadowing_set_inv(f, &f.invert(), orbit, epsilon)
}

fn shadowing_set_inv(f: &PlHomeo, f_inv: &PlHomeo, orbit: &PseudoOrbit<Rational>, epsilon: &Rational) -> ShadowingSet {
    let (lo, hi) = f.domain();
    let ball = |x: &Rational| ClosedInterval::new((x - epsilon).max(lo.clone()), (x + epsilon).min(hi.clone()));
    let zero = (-orbit.start) as usize;
    let pts = &orbit.points;
    let empty = ShadowingSet {
        intervals: Vec::new(),
        epsilon: epsilon.clone(),
    };

    // forward constraints pulled back to index 0
    let mut u = ball(&pts[pts.len() - 1]);
    for i in (zero..pts.len() - 1).rev() {
        let pre = ClosedInterval::new(f_inv.eval(&u.lo), f_inv.eval(&u.hi));
        match ball(&pts[i]).intersect(&pre) {
            Some(v) => u = v,
            None => return empty,
        }
    }
    // backward constraints pushed forward to index 0
    let mut w = ball(&pts[0]);
    for p in pts.iter().take(zero + 1).skip(1) {
        let img = ClosedInterval::new(f.eval(&w.lo), f.eval(&w.hi));
        match ball(p).intersect(&img) {
            Some(v) => w = v,
            None => return empty,
        }
    }
    match u.intersect(&w) {
        Some(s) => ShadowingSet {
            intervals: vec![s],
            epsilon: epsilon.clone(),
        },
        None => empty,
    }
}

#[derive(Clone, Debug)]
pub struct ModulusConfig {
    pub window: Window,
    /// Grid `ε / 2^k` for `k = 1..=levels`.
    pub levels: u32,
    pub exec: Execution,
}

impl Default for ModulusConfig {
    fn default() -> Self {
        ModulusConfig {
            window: Window::forward(20),
            levels: 12,
            exec: Execution::default(),
        }
    }
}

/// Largest `δ = ε/2^k` for which `trials` random δ-pseudo-orbits are all
/// ε-shadowed, located by bisection over `k`. Zero when even the finest grid
/// value fails.
pub fn estimate_shadowing_modulus(f: &PlHomeo, epsilon: &Rational, trials: usize, seed: u64) -> Result<Rational> {
    estimate_shadowing_modulus_with(f, epsilon, trials, seed, &ModulusConfig::default())
}

pub fn estimate_shadowing_modulus_with(
    f: &PlHomeo,
    epsilon: &Rational,
    trials: usize,
    seed: u64,
    cfg: &ModulusConfig,
) -> Result<Rational> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon.clone(),
        });
    }
    if trials == 0 {
        return Err(Error::NonPositive {
            name: "trials",
            value: int(0),
        });
    }
    let f_inv = f.invert();
    let (lo, hi) = f.domain();
    let passes = |k: u32| {
        let delta = epsilon * pow2_inv(k);
        all_indexed(cfg.exec, trials, |i| {
            let mut rng = trial_rng(seed, TAG_MODULUS + k as u64, i as u64);
            let x0 = grid_point_closed(&mut rng, &lo, &hi, 1 << 16);
            let orbit = sample_orbit(f, &f_inv, &delta, cfg.window, &x0, &mut rng);
            !shadowing_set_inv(f, &f_inv, &orbit, epsilon).is_empty()
        })
    };
    if passes(1) {
        return Ok(epsilon * pow2_inv(1));
    }
    if !passes(cfg.levels) {
        return Ok(int(0));
    }
    let (mut fail, mut pass) = (1, cfg.levels);
    while pass - fail > 1 {
        let mid = (fail + pass) / 2;
        if passes(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    Ok(epsilon * pow2_inv(pass))
}

// ---------------------------------------------------------------------------
// The model Y

/// Random point of `Y` within distance `δ` of `target` (strictly), also
/// satisfying `accept`. Picks uniformly among arcs that come within `δ`,
/// then a dyadic parameter near the nearest point, with exact rejection.
/// Falls back to `target` itself.
fn sample_near(
    model: &YModel,
    geo: &Geometry,
    target: &YPoint,
    delta: &Rational,
    rng: &mut ChaCha8Rng,
    accept: &dyn Fn(&YPoint) -> bool,
) -> YPoint {
    if delta.is_zero() {
        return target.clone();
    }
    let p = geo.embed(target);
    let pf = p.to_f64();
    let df = to_f64(delta);
    let d2 = delta * delta;
    let candidates: Vec<(usize, Rational)> = (0..geo.arcs())
        .filter(|&a| a == target.arc || geo.approx_distance(a, pf) < df * (1.0 + 1e-6) + 1e-12)
        .filter_map(|a| {
            if a == target.arc {
                return Some((a, target.t.clone()));
            }
            let (t, dist) = geo.project_near(a, &p);
            (dist < d2).then_some((a, t))
        })
        .collect();
    for _ in 0..16 {
        let (arc, t) = &candidates[rng.gen_range(0..candidates.len())];
        let w = delta / &geo.lower[*arc];
        let den = grid_den(&w, 64);
        let Some(s) = grid_point(rng, &(t - &w), &(t + &w), &int(0), &int(1), &den) else {
            continue;
        };
        let q = YPoint::new(*arc, s);
        if geo.embed(&q).dist_sq(&p) < d2 && accept(&q) {
            return model.canonical(&q);
        }
    }
    target.clone()
}

#[allow(clippy::too_many_arguments)]
fn sample_y_orbit(
    model: &YModel,
    geo: &Geometry,
    g: &YHomeo,
    g_inv: &YHomeo,
    delta: &Rational,
    window: Window,
    x0: &YPoint,
    rng: &mut ChaCha8Rng,
) -> PseudoOrbit<YPoint> {
    let d2 = delta * delta;
    let mut back = Vec::with_capacity(window.back as usize);
    let mut cur = x0.clone();
    for _ in 0..window.back {
        let next = cur.clone();
        let target_pt = geo.embed(&next);
        let accept = |q: &YPoint| geo.embed(&g.apply(q)).dist_sq(&target_pt) < d2;
        cur = sample_near(model, geo, &g_inv.apply(&next), delta, rng, &accept);
        back.push(cur.clone());
    }
    back.reverse();
    let mut points = back;
    points.push(x0.clone());
    let mut cur = x0.clone();
    for _ in 0..window.forward {
        cur = sample_near(model, geo, &g.apply(&cur), delta, rng, &|_| true);
        points.push(cur.clone());
    }
    PseudoOrbit {
        points,
        start: -(window.back as i64),
        delta: delta.clone(),
    }
}

/// Seeded δ-pseudo-orbit on the model: each jump lands on a random point of
/// `Y` at plane distance `< δ` from the image.
pub fn generate_y_pseudo_orbit(
    model: &YModel,
    g: &YHomeo,
    delta: &Rational,
    window: Window,
    x0: &YPoint,
    seed: u64,
) -> Result<PseudoOrbit<YPoint>> {
    if delta.is_negative() {
        return Err(Error::NonPositive {
            name: "delta",
            value: delta.clone(),
        });
    }
    check_point(model, x0)?;
    let geo = Geometry::new(model);
    let mut rng = trial_rng(seed, TAG_ORBIT, 0);
    Ok(sample_y_orbit(
        model,
        &geo,
        g,
        &g.inverse(),
        delta,
        window,
        x0,
        &mut rng,
    ))
}

fn check_point(model: &YModel, p: &YPoint) -> Result<()> {
    model.arc(p.arc)?;
    if p.t.is_negative() || p.t > int(1) {
        return Err(Error::OutsideDomain {
            point: p.t.clone(),
            lo: int(0),
            hi: int(1),
        });
    }
    Ok(())
}

/// Largest plane jump `|g(x_i) - x_{i+1}|`, as an upper bound.
pub fn verify_y_pseudo_orbit(model: &YModel, g: &YHomeo, orbit: &PseudoOrbit<YPoint>) -> Rational {
    let geo = Geometry::new(model);
    let worst = orbit
        .points
        .windows(2)
        .map(|w| geo.embed(&g.apply(&w[0])).dist_sq(&geo.embed(&w[1])))
        .max()
        .unwrap_or_else(|| int(0));
    sqrt_upper(&worst, SQRT_BITS)
}

/// Cut point of an inward stub: the piece of `arc` between the shared vertex
/// and `cut` is mapped strictly into itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stub {
    pub arc: usize,
    pub vertex: usize,
    pub end: End,
    #[serde(with = "serde_rat")]
    pub cut: Rational,
    /// `g(cut)`, strictly between the vertex and the cut.
    #[serde(with = "serde_rat")]
    pub image: Rational,
}

/// `V = arc ∪ stubs`, an open neighbourhood of the arc in `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub arc: usize,
    pub stubs: Vec<Stub>,
}

/// For every arc meeting `arc` at an endpoint, a cut inside a wandering
/// interval that flows toward the shared vertex, at plane distance `< α`
/// from it. Among admissible cuts (interval midpoints and breakpoints) the
/// one with the largest displacement `|g(c) - c|` wins.
pub fn find_inward_neighborhood(model: &YModel, g: &YHomeo, arc: usize, alpha: &Rational) -> Result<Neighborhood> {
    let geo = Geometry::new(model);
    find_inward_neighborhood_geo(model, &geo, g, arc, alpha)
}

fn find_inward_neighborhood_geo(
    model: &YModel,
    geo: &Geometry,
    g: &YHomeo,
    arc: usize,
    alpha: &Rational,
) -> Result<Neighborhood> {
    if !alpha.is_positive() {
        return Err(Error::NonPositive {
            name: "alpha",
            value: alpha.clone(),
        });
    }
    let a = model.arc(arc)?;
    let alpha_sq = alpha * alpha;
    let mut stubs = Vec::new();
    for v in [a.start, a.end] {
        let vp = model.vertex(v)?.point.clone();
        for (b, end) in model.incident(v) {
            if b == arc {
                continue;
            }
            let f = g.on_arc(b);
            let reach = (alpha / &geo.upper[b]).min(int(1));
            let inward = match end {
                End::Start => Orientation::L,
                End::End => Orientation::R,
            };
            let mut best: Option<(Rational, Rational, Rational)> = None;
            for w in f.wandering_intervals() {
                if w.orientation != inward {
                    continue;
                }
                let (lo, hi) = match end {
                    End::Start => (w.a.clone(), w.b.clone().min(reach.clone())),
                    End::End => (w.a.clone().max(int(1) - &reach), w.b.clone()),
                };
                if lo >= hi {
                    continue;
                }
                let cands = std::iter::once(midpoint(&lo, &hi))
                    .chain(f.breakpoints().iter().filter(|x| &lo < *x && *x < &hi).cloned());
                for c in cands {
                    let image = f.eval(&c);
                    let gain = (&image - &c).abs();
                    let close = geo.embed(&YPoint::new(b, c.clone())).dist_sq(&vp) < alpha_sq;
                    if close && best.as_ref().is_none_or(|(_, _, bg)| &gain > bg) {
                        best = Some((c, image, gain));
                    }
                }
            }
            let (cut, image, _) = best.ok_or(Error::NoInwardStub { arc: b, vertex: v })?;
            let inside = match end {
                End::Start => image.is_positive() && image < cut,
                End::End => image < int(1) && image > cut,
            };
            if !inside {
                return Err(Error::NoInwardStub { arc: b, vertex: v });
            }
            stubs.push(Stub {
                arc: b,
                vertex: v,
                end,
                cut,
                image,
            });
        }
    }
    Ok(Neighborhood { arc, stubs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiAttractorCertificate {
    pub arc: usize,
    #[serde(with = "serde_rat")]
    pub epsilon: Rational,
    /// Every δ₁-pseudo-orbit inside the arc is ε/2-shadowed (empirically).
    #[serde(with = "serde_rat")]
    pub delta1: Rational,
    #[serde(with = "serde_rat")]
    pub alpha: Rational,
    pub neighborhood: Neighborhood,
    #[serde(with = "serde_rat")]
    pub delta: Rational,
    /// Shadowing modulus of the arc map in its own parameter.
    #[serde(with = "serde_rat")]
    pub parameter_modulus: Rational,
    #[serde(with = "serde_rat")]
    pub upper_lipschitz: Rational,
    #[serde(with = "serde_rat")]
    pub lower_lipschitz: Rational,
    /// Plane Lipschitz bound of `g` on the arc and its neighbours.
    #[serde(with = "serde_rat")]
    pub map_lipschitz: Rational,
    /// Squared distance from `clos g(V)` to `Y \ V`.
    #[serde(with = "serde_rat")]
    pub clearance_sq: Rational,
}

#[derive(Clone, Debug)]
pub struct CertificateConfig {
    pub trials: usize,
    pub seed: u64,
    pub modulus: ModulusConfig,
    /// `δ` is searched on `ε / 2^k`, `k = 1..=delta_levels`.
    pub delta_levels: u32,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            trials: 256,
            seed: 0,
            modulus: ModulusConfig::default(),
            delta_levels: 40,
        }
    }
}

pub fn quasi_attractor_certificate(
    model: &YModel,
    g: &YHomeo,
    arc: usize,
    epsilon: &Rational,
) -> Result<QuasiAttractorCertificate> {
    let geo = Geometry::new(model);
    quasi_attractor_certificate_with(model, &geo, g, arc, epsilon, &CertificateConfig::default())
}

/// Runs the certificate chain for one arc `A`:
///
/// * `δ₁ = λ_A · m` where `m` is the empirical modulus of `g|A` at `ε/(2Λ_A)`
///   in the arc parameter, `Λ_A, λ_A` the Lipschitz bounds of the embedding;
/// * `α = min(ε/2, δ₁/3)/2`, halved until `3Kα < δ₁/3` where `K` bounds the
///   plane Lipschitz constant of `g` near `A`;
/// * `V` from [`find_inward_neighborhood`] at `α`;
/// * `δ` the largest `ε/2^k < δ₁/3` with `δ² <= dist²(clos g(V), Y \ V)`.
pub fn quasi_attractor_certificate_with(
    model: &YModel,
    geo: &Geometry,
    g: &YHomeo,
    arc: usize,
    epsilon: &Rational,
    cfg: &CertificateConfig,
) -> Result<QuasiAttractorCertificate> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon.clone(),
        });
    }
    let a = model.arc(arc)?;
    let (upper, lower) = (geo.upper[arc].clone(), geo.lower[arc].clone());
    let eps_param = epsilon / (int(2) * &upper);
    let modulus = estimate_shadowing_modulus_with(
        g.on_arc(arc),
        &eps_param,
        cfg.trials,
        cfg.seed ^ (arc as u64).wrapping_mul(0x9e37_79b9),
        &cfg.modulus,
    )?;
    if modulus.is_zero() {
        return Err(Error::NoAdmissibleDelta {
            arc,
            reason: "the arc map shows no positive shadowing modulus".into(),
        });
    }
    let delta1 = &lower * &modulus;
    let third = &delta1 / int(3);

    let mut near = vec![arc];
    for v in [a.start, a.end] {
        near.extend(model.incident(v).into_iter().map(|(b, _)| b));
    }
    let map_lipschitz = near
        .iter()
        .map(|&b| &geo.upper[b] / &geo.lower[b] * g.on_arc(b).max_slope())
        .max()
        .expect("nonempty");
    let mut alpha = (epsilon / int(2)).min(third.clone()) / int(2);
    while int(3) * &map_lipschitz * &alpha >= third {
        alpha /= int(2);
    }

    let neighborhood = find_inward_neighborhood_geo(model, geo, g, arc, &alpha)?;

    // clos g(V): the arc and the image of each stub
    let mut inside = vec![geo.polys[arc].clone()];
    for s in &neighborhood.stubs {
        inside.push(match s.end {
            End::Start => model.piece(s.arc, &int(0), &s.image),
            End::End => model.piece(s.arc, &s.image, &int(1)),
        });
    }
    // Y \ V: what is left of the stub arcs, and every other arc
    let mut outside = Vec::new();
    for b in &model.arcs {
        if b.id == arc {
            continue;
        }
        let mut lo = int(0);
        let mut hi = int(1);
        let mut touched = false;
        for s in neighborhood.stubs.iter().filter(|s| s.arc == b.id) {
            touched = true;
            match s.end {
                End::Start => lo = s.cut.clone(),
                End::End => hi = s.cut.clone(),
            }
        }
        if !touched {
            outside.push(geo.polys[b.id].clone());
        } else if lo <= hi {
            outside.push(model.piece(b.id, &lo, &hi));
        }
    }
    let clearance_sq = inside
        .iter()
        .flat_map(|p| outside.iter().map(move |q| polyline_distance_sq(p, q)))
        .min()
        .unwrap_or_else(|| model.diameter_sq_bound() + int(1));
    let delta = (1..=cfg.delta_levels)
        .map(|k| epsilon * pow2_inv(k))
        .find(|d| d < &third && d * d <= clearance_sq && d.is_positive())
        .filter(|_| clearance_sq.is_positive())
        .ok_or_else(|| Error::NoAdmissibleDelta {
            arc,
            reason: "clos g(V) is too close to the complement of V".into(),
        })?;

    Ok(QuasiAttractorCertificate {
        arc,
        epsilon: epsilon.clone(),
        delta1,
        alpha,
        neighborhood,
        delta,
        parameter_modulus: modulus,
        upper_lipschitz: upper,
        lower_lipschitz: lower,
        map_lipschitz,
        clearance_sq,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub arc: usize,
    #[serde(with = "serde_rat")]
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDelta {
    #[serde(with = "serde_rat")]
    pub delta: Rational,
    #[serde(with = "serde_rat")]
    pub epsilon: Rational,
    pub cover: Vec<CoverEntry>,
    pub certificates: Vec<QuasiAttractorCertificate>,
    /// `ε` exceeds the diameter of the model, so any point shadows any orbit.
    pub trivial: bool,
}

pub fn global_shadowing_delta(model: &YModel, g: &YHomeo, epsilon: &Rational) -> Result<GlobalDelta> {
    global_shadowing_delta_with(model, g, epsilon, &CertificateConfig::default())
}

/// Certificates for every arc, `δ = min δ_i`, and an exact check that the
/// balls `B_{δ_i}(A_i)` cover a sample of the model.
pub fn global_shadowing_delta_with(
    model: &YModel,
    g: &YHomeo,
    epsilon: &Rational,
    cfg: &CertificateConfig,
) -> Result<GlobalDelta> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon.clone(),
        });
    }
    g.validate(model)?;
    let geo = Geometry::new(model);
    if epsilon * epsilon > model.diameter_sq_bound() {
        let delta = epsilon * pow2_inv(1);
        return Ok(GlobalDelta {
            cover: model
                .arcs
                .iter()
                .map(|a| CoverEntry {
                    arc: a.id,
                    delta: delta.clone(),
                })
                .collect(),
            delta,
            epsilon: epsilon.clone(),
            certificates: Vec::new(),
            trivial: true,
        });
    }
    let mut certificates = Vec::with_capacity(model.arcs.len());
    for a in &model.arcs {
        certificates.push(quasi_attractor_certificate_with(model, &geo, g, a.id, epsilon, cfg)?);
    }
    let cover: Vec<CoverEntry> = certificates
        .iter()
        .map(|c| CoverEntry {
            arc: c.arc,
            delta: c.delta.clone(),
        })
        .collect();
    let mut uncovered = Vec::new();
    for a in &model.arcs {
        for j in 0..=16 {
            let t = Rational::new(j.into(), 16.into());
            let p = geo.embed(&YPoint::new(a.id, t.clone()));
            let hit = cover.iter().any(|c| geo.project(c.arc, &p).1 < &c.delta * &c.delta);
            if !hit {
                uncovered.push(format!("arc {} t={}", a.id, format_rational(&t)));
            }
        }
    }
    if !uncovered.is_empty() {
        return Err(Error::CoverFailure(uncovered));
    }
    let delta = cover.iter().map(|c| c.delta.clone()).min().expect("arcs");
    Ok(GlobalDelta {
        delta,
        epsilon: epsilon.clone(),
        cover,
        certificates,
        trivial: false,
    })
}

/// Point of `arc` whose orbit stays strictly within `ε` of the pseudo-orbit,
/// found through the arc-level shadowing set of the projected orbit and then
/// checked with exact plane distances.
pub fn shadow_on_arc(
    model: &YModel,
    g: &YHomeo,
    orbit: &PseudoOrbit<YPoint>,
    epsilon: &Rational,
    arc: usize,
) -> Option<Rational> {
    let geo = Geometry::new(model);
    shadow_on_arc_geo(model, &geo, g, orbit, epsilon, arc)
}

fn shadow_on_arc_geo(
    model: &YModel,
    geo: &Geometry,
    g: &YHomeo,
    orbit: &PseudoOrbit<YPoint>,
    epsilon: &Rational,
    arc: usize,
) -> Option<Rational> {
    let a = &model.arcs[arc];
    let eps_sq = epsilon * epsilon;
    let embedded: Vec<Point> = orbit.points.iter().map(|p| geo.embed(p)).collect();
    let mut params = Vec::with_capacity(orbit.points.len());
    let mut worst = int(0);
    for (p, e) in orbit.points.iter().zip(&embedded) {
        let on_arc = if p.arc == arc {
            Some(p.t.clone())
        } else {
            match model.vertex_of(p) {
                Some(v) if v == a.start => Some(int(0)),
                Some(v) if v == a.end => Some(int(1)),
                _ => None,
            }
        };
        let (t, d) = match on_arc {
            Some(t) => (t, int(0)),
            None => geo.project_near(arc, e),
        };
        if d >= eps_sq {
            return None;
        }
        worst = worst.max(d);
        params.push(t);
    }
    let margin = epsilon - sqrt_upper(&worst, SQRT_BITS);
    if !margin.is_positive() {
        return None;
    }
    let f = g.on_arc(arc);
    let tol = margin / &geo.upper[arc] * Rational::new(63.into(), 64.into());
    let projected = PseudoOrbit {
        points: params,
        start: orbit.start,
        delta: orbit.delta.clone(),
    };
    let f_inv = f.invert();
    let set = shadowing_set_inv(f, &f_inv, &projected, &tol);
    let s = set.intervals.first()?;
    let y0 = projected.origin().clone().max(s.lo.clone()).min(s.hi.clone());
    let zero = (-orbit.start) as usize;
    let candidates = [y0, midpoint(&s.lo, &s.hi), s.lo.clone(), s.hi.clone()];
    candidates.into_iter().find(|z| {
        let mut fwd = z.clone();
        for (i, e) in embedded.iter().enumerate().skip(zero) {
            if i > zero {
                fwd = f.eval(&fwd);
            }
            if geo.embed(&YPoint::new(arc, fwd.clone())).dist_sq(e) >= eps_sq {
                return false;
            }
        }
        let mut bwd = z.clone();
        for e in embedded[..zero].iter().rev() {
            bwd = f_inv.eval(&bwd);
            if geo.embed(&YPoint::new(arc, bwd.clone())).dist_sq(e) >= eps_sq {
                return false;
            }
        }
        true
    })
}

/// Tries arcs in order of distance from `x_0` and returns the first verified
/// ε-shadowing point.
pub fn shadow_on_model(model: &YModel, g: &YHomeo, orbit: &PseudoOrbit<YPoint>, epsilon: &Rational) -> Option<YPoint> {
    let geo = Geometry::new(model);
    shadow_on_model_geo(model, &geo, g, orbit, epsilon)
}

fn shadow_on_model_geo(
    model: &YModel,
    geo: &Geometry,
    g: &YHomeo,
    orbit: &PseudoOrbit<YPoint>,
    epsilon: &Rational,
) -> Option<YPoint> {
    let x0 = geo.embed(orbit.origin());
    let mut order: Vec<(Rational, usize)> = (0..geo.arcs()).map(|a| (geo.project_near(a, &x0).1, a)).collect();
    order.sort();
    order
        .into_iter()
        .filter(|(d, _)| d < &(epsilon * epsilon))
        .find_map(|(_, arc)| {
            shadow_on_arc_geo(model, geo, g, orbit, epsilon, arc).map(|t| model.canonical(&YPoint::new(arc, t)))
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub trials: usize,
    /// Trial indices with no verified shadowing point.
    pub failures: Vec<usize>,
    /// Largest jump over all sampled orbits, as an upper bound.
    #[serde(with = "serde_rat")]
    pub max_jump: Rational,
}

impl SamplingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn collect_report(results: Vec<(bool, Rational)>) -> SamplingReport {
    let max_sq = results.iter().map(|(_, j)| j.clone()).max().unwrap_or_else(|| int(0));
    SamplingReport {
        trials: results.len(),
        failures: results
            .iter()
            .enumerate()
            .filter(|(_, (ok, _))| !ok)
            .map(|(i, _)| i)
            .collect(),
        max_jump: sqrt_upper(&max_sq, SQRT_BITS),
    }
}

fn max_jump_sq(geo: &Geometry, g: &YHomeo, orbit: &PseudoOrbit<YPoint>) -> Rational {
    orbit
        .points
        .windows(2)
        .map(|w| geo.embed(&g.apply(&w[0])).dist_sq(&geo.embed(&w[1])))
        .max()
        .unwrap_or_else(|| int(0))
}

/// Samples δ-pseudo-orbits (δ from the certificate) starting within `δ` of
/// the certificate's arc and checks each is ε-shadowed by a point of that arc.
pub fn validate_arc_certificate(
    model: &YModel,
    g: &YHomeo,
    cert: &QuasiAttractorCertificate,
    trials: usize,
    window: Window,
    seed: u64,
    exec: Execution,
) -> SamplingReport {
    let geo = Geometry::new(model);
    let g_inv = g.inverse();
    let results = map_indexed(exec, trials, |i| {
        let mut rng = trial_rng(seed, TAG_ARC_TRIALS + cert.arc as u64, i as u64);
        let base = YPoint::new(cert.arc, grid_point_closed(&mut rng, &int(0), &int(1), 1 << 16));
        let x0 = sample_near(model, &geo, &base, &cert.delta, &mut rng, &|_| true);
        let orbit = sample_y_orbit(model, &geo, g, &g_inv, &cert.delta, window, &x0, &mut rng);
        let ok = shadow_on_arc_geo(model, &geo, g, &orbit, &cert.epsilon, cert.arc).is_some();
        (ok, max_jump_sq(&geo, g, &orbit))
    });
    collect_report(results)
}

/// Samples δ-pseudo-orbits from uniformly random starting points of the model
/// and checks each is ε-shadowed somewhere on the model.
#[allow(clippy::too_many_arguments)]
pub fn validate_global_delta(
    model: &YModel,
    g: &YHomeo,
    delta: &Rational,
    epsilon: &Rational,
    trials: usize,
    window: Window,
    seed: u64,
    exec: Execution,
) -> SamplingReport {
    let geo = Geometry::new(model);
    let g_inv = g.inverse();
    let results = map_indexed(exec, trials, |i| {
        let mut rng = trial_rng(seed, TAG_GLOBAL_TRIALS, i as u64);
        let arc = rng.gen_range(0..model.arcs.len());
        let x0 = model.canonical(&YPoint::new(
            arc,
            grid_point_closed(&mut rng, &int(0), &int(1), 1 << 16),
        ));
        let orbit = sample_y_orbit(model, &geo, g, &g_inv, delta, window, &x0, &mut rng);
        let ok = shadow_on_model_geo(model, &geo, g, &orbit, epsilon).is_some();
        (ok, max_jump_sq(&geo, g, &orbit))
    });
    collect_report(results)
}
