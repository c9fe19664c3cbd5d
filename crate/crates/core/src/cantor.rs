//! The ternary construction `f*`, the alternating-chain property `P_ε`,
//! greedy conjugacy building and fixed-point explosions.
//!
//! `f*_N` is the depth-`N` truncation: on every middle-third gap
//! `J(n, k)` of the Cantor construction with `n <= N` it is the canonical
//! generator (r-type for even `n`, l-type for odd `n`) and it is the identity
//! everywhere else.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plmap::{ClosedInterval, Orientation, OrientedInterval, PlFn, PlHomeo};
use crate::rational::{int, midpoint, pow2_inv, serde_rat, Rational};

/// Default bound on `N` for [`p_eps_threshold`].
pub const DEFAULT_THRESHOLD_BOUND: u32 = 6;

/// Index `(n, k)` of the closed interval `J(n,k) = [(3k+1)/3^(n+1), (3k+2)/3^(n+1)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TernaryIndex {
    pub n: u32,
    pub k: u64,
}

impl TernaryIndex {
    pub fn new(n: u32, k: u64) -> Result<TernaryIndex> {
        if n > 39 || k >= 3u64.pow(n) {
            return Err(Error::IndexOutOfRange { n, k });
        }
        Ok(TernaryIndex { n, k })
    }

    pub fn interval(&self) -> (Rational, Rational) {
        let den = Rational::from_integer(num_bigint::BigInt::from(3u64).pow(self.n + 1));
        let k = int(self.k as i64);
        ((&k * int(3) + int(1)) / &den, (&k * int(3) + int(2)) / &den)
    }

    /// Whether `J(n,k)` is a gap of the middle-thirds construction, i.e. not
    /// contained in some `J(m, ·)` with `m < n` (no ternary digit of `k` is 1).
    pub fn is_cantor_gap(&self) -> bool {
        let mut k = self.k;
        for _ in 0..self.n {
            if k % 3 == 1 {
                return false;
            }
            k /= 3;
        }
        true
    }

    /// Orientation `f*` uses on this interval.
    pub fn orientation(&self) -> Orientation {
        if self.n.is_multiple_of(2) {
            Orientation::R
        } else {
            Orientation::L
        }
    }
}

pub fn j_interval(idx: TernaryIndex) -> Result<(Rational, Rational)> {
    TernaryIndex::new(idx.n, idx.k).map(|i| i.interval())
}

/// Gaps `J(n, k)` of the construction with `n <= depth`, sorted left to right.
pub fn f_star_gaps(depth: u32) -> Vec<TernaryIndex> {
    fn walk(n: u32, k: u64, depth: u32, out: &mut Vec<TernaryIndex>) {
        if n > depth {
            return;
        }
        walk(n + 1, 3 * k, depth, out);
        out.push(TernaryIndex { n, k });
        walk(n + 1, 3 * k + 2, depth, out);
    }
    let mut out = Vec::new();
    walk(0, 0, depth, &mut out);
    out
}

/// The wandering intervals `f*_N` is built to have.
pub fn f_star_intervals(depth: u32) -> Vec<OrientedInterval> {
    f_star_gaps(depth)
        .into_iter()
        .map(|idx| {
            let (a, b) = idx.interval();
            OrientedInterval::new(a, b, idx.orientation())
        })
        .collect()
}

/// `f*_N` on `[0, 1]`.
pub fn build_f_star(depth: u32) -> PlHomeo {
    let mut xs = vec![int(0)];
    let mut ys = vec![int(0)];
    for idx in f_star_gaps(depth) {
        let (a, b) = idx.interval();
        let g = PlHomeo::canonical(&a, &b, idx.orientation()).expect("a < b");
        xs.extend(g.breakpoints().iter().cloned());
        ys.extend(g.values().iter().cloned());
    }
    xs.push(int(1));
    ys.push(int(1));
    PlHomeo::from_fn(PlFn::from_knots(xs, ys))
}

/// Alternating chain `J_1 < ... < J_n` certifying `P_ε`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PWitness {
    pub intervals: Vec<OrientedInterval>,
    #[serde(with = "serde_rat")]
    pub epsilon: Rational,
}

impl PWitness {
    /// The smallest `ε` this chain certifies: `max(a_1, 1 - b_n, gaps)`; `P_ε` needs strictly more.
    pub fn required_epsilon(&self) -> Rational {
        chain_cost(&self.intervals)
    }

    /// Re-checks the three defining conditions directly.
    pub fn verify(&self) -> bool {
        let iv = &self.intervals;
        if iv.is_empty() {
            return false;
        }
        let ordered = iv[0].a.is_positive()
            && iv.iter().all(|j| j.a < j.b)
            && iv.windows(2).all(|w| w[0].b < w[1].a)
            && iv.last().map(|j| j.b < int(1)).unwrap_or(false);
        let alternating = iv
            .iter()
            .enumerate()
            .all(|(i, j)| j.orientation == if i % 2 == 0 { Orientation::R } else { Orientation::L });
        ordered && alternating && chain_cost(iv) < self.epsilon
    }
}

fn chain_cost(chain: &[OrientedInterval]) -> Rational {
    let first = chain[0].a.clone();
    let last = int(1) - &chain[chain.len() - 1].b;
    chain
        .windows(2)
        .map(|w| &w[1].a - &w[0].b)
        .chain([first, last])
        .max()
        .expect("nonempty")
}

fn require_unit_domain(f: &PlHomeo) -> Result<()> {
    if f.lo() != &int(0) || f.hi() != &int(1) {
        return Err(Error::DomainMismatch {
            left: f.domain(),
            right: (int(0), int(1)),
        });
    }
    Ok(())
}

fn require_positive(name: &'static str, x: &Rational) -> Result<()> {
    if !x.is_positive() {
        return Err(Error::NonPositive { name, value: x.clone() });
    }
    Ok(())
}

/// Decides `P_ε` for `f` on `[0, 1]`.
///
/// Left-to-right scan over the wandering intervals. An interval is reachable
/// when it can end a valid alternating chain; the best predecessor of a
/// reachable interval is the most recent reachable interval of the opposite
/// orientation that does not touch it (largest right end, hence smallest gap). The first
/// reachable interval with `1 - b < ε` closes the witness, which is then
/// extended greedily by the earliest admissible interval to the right.
pub fn check_p_eps(f: &PlHomeo, epsilon: &Rational) -> Result<Option<PWitness>> {
    require_positive("epsilon", epsilon)?;
    require_unit_domain(f)?;
    let intervals = f.wandering_intervals();
    Ok(greedy_chain(&intervals, epsilon).map(|chain| PWitness {
        intervals: chain,
        epsilon: epsilon.clone(),
    }))
}

fn greedy_chain(intervals: &[OrientedInterval], epsilon: &Rational) -> Option<Vec<OrientedInterval>> {
    let mut pred: Vec<Option<usize>> = vec![None; intervals.len()];
    // reachable intervals of each orientation, in scan order
    let mut reach_r: Vec<usize> = Vec::new();
    let mut reach_l: Vec<usize> = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        let prev = match iv.orientation {
            Orientation::R => &reach_l,
            Orientation::L => &reach_r,
        };
        // Only the immediate neighbour can touch `iv`, so the best strict
        // predecessor is one of the last two.
        let linked = prev
            .iter()
            .rev()
            .take(2)
            .copied()
            .find(|&j| intervals[j].b < iv.a)
            .filter(|&j| &(&iv.a - &intervals[j].b) < epsilon);
        let starts = iv.orientation == Orientation::R && iv.a.is_positive() && &iv.a < epsilon;
        if !starts && linked.is_none() {
            continue;
        }
        pred[i] = if starts { None } else { linked };
        match iv.orientation {
            Orientation::R => reach_r.push(i),
            Orientation::L => reach_l.push(i),
        }
        if iv.b < int(1) && &(int(1) - &iv.b) < epsilon {
            let mut chain = vec![iv.clone()];
            let mut cur = pred[i];
            while let Some(j) = cur {
                chain.push(intervals[j].clone());
                cur = pred[j];
            }
            chain.reverse();
            // Extend to the right with the earliest admissible interval while
            // one exists; this keeps `1 - b_n < ε` and reports maximal chains.
            let mut last = i;
            while let Some(j) = (last + 1..intervals.len()).find(|&j| {
                intervals[j].orientation != intervals[last].orientation
                    && intervals[last].b < intervals[j].a
                    && intervals[j].b < int(1)
                    && &(&intervals[j].a - &intervals[last].b) < epsilon
            }) {
                chain.push(intervals[j].clone());
                last = j;
            }
            return Some(chain);
        }
    }
    None
}

/// `inf { ε : P_ε holds }` for an arbitrary map, by exact min-max over all
/// alternating chains. `None` when no chain exists.
pub fn p_eps_threshold_of(f: &PlHomeo) -> Result<Option<Rational>> {
    require_unit_domain(f)?;
    Ok(minimax_chain(&f.wandering_intervals()))
}

fn minimax_chain(iv: &[OrientedInterval]) -> Option<Rational> {
    // best[i]: min over chains ending at i of max(a_1, internal gaps)
    let mut best: Vec<Option<Rational>> = Vec::with_capacity(iv.len());
    for (i, cur) in iv.iter().enumerate() {
        let mut b: Option<Rational> = (cur.orientation == Orientation::R && cur.a.is_positive()).then(|| cur.a.clone());
        for j in 0..i {
            if iv[j].orientation == cur.orientation || iv[j].b >= cur.a {
                continue;
            }
            if let Some(prev) = &best[j] {
                let gap = &cur.a - &iv[j].b;
                let cand = prev.max(&gap).clone();
                if b.as_ref().is_none_or(|x| &cand < x) {
                    b = Some(cand);
                }
            }
        }
        best.push(b);
    }
    best.iter()
        .zip(iv)
        .filter(|(_, cur)| cur.b < int(1))
        .filter_map(|(b, cur)| b.as_ref().map(|b| b.max(&(int(1) - &cur.b)).clone()))
        .min()
}

/// Threshold of `f*_N`, with the default search bound.
pub fn p_eps_threshold(depth: u32) -> Result<Rational> {
    p_eps_threshold_bounded(depth, DEFAULT_THRESHOLD_BOUND)
}

pub fn p_eps_threshold_bounded(depth: u32, bound: u32) -> Result<Rational> {
    if depth > bound {
        return Err(Error::DepthTooLarge { depth, bound });
    }
    Ok(minimax_chain(&f_star_intervals(depth)).expect("f* always has an r-interval"))
}

/// One matched pair of a conjugacy: a wandering interval of `g` and its target gap of `f*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub source: OrientedInterval,
    pub target: TernaryIndex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub h: PlHomeo,
    pub depth: u32,
    /// Depth `N` of the `f*_N` used for the residual.
    pub reference_depth: u32,
    pub matched: Vec<MatchedPair>,
    /// `c0_distance(h ∘ g, f*_N ∘ h)`.
    #[serde(with = "serde_rat")]
    pub residual: Rational,
}

#[derive(Clone, Debug)]
pub struct ConjugacyConfig {
    /// Each matched piece is built by fundamental domains until the leftover
    /// end regions are shorter than this fraction of the target interval.
    pub end_tolerance: Rational,
}

impl Default for ConjugacyConfig {
    fn default() -> Self {
        ConjugacyConfig {
            end_tolerance: pow2_inv(16),
        }
    }
}

pub fn build_conjugacy(g: &PlHomeo, depth: u32) -> Result<ConjugacyReport> {
    build_conjugacy_with(g, depth, &ConjugacyConfig::default())
}

/// Greedy inductive matching of `g`'s wandering intervals to the gaps of `f*`.
///
/// Round `r` (1-based) looks inside every gap left by the previous rounds for
/// the largest wandering interval of orientation R (if `r - 1` is even) or L,
/// leftmost on ties, and pairs it with the middle third of the matching
/// Cantor interval. Matched pieces get an exact conjugacy with finitely many
/// breakpoints when one exists, otherwise a fundamental-domain conjugacy
/// truncated near the ends; the leftover gaps are mapped affinely.
pub fn build_conjugacy_with(g: &PlHomeo, depth: u32, cfg: &ConjugacyConfig) -> Result<ConjugacyReport> {
    require_unit_domain(g)?;
    if depth == 0 {
        return Err(Error::NonPositive {
            name: "depth",
            value: int(0),
        });
    }
    let wandering = g.wandering_intervals();

    struct Gap {
        lo: Rational,
        hi: Rational,
        level: u32,
        k: u64,
    }
    let mut gaps = vec![Gap {
        lo: int(0),
        hi: int(1),
        level: 0,
        k: 0,
    }];
    let mut matched: Vec<MatchedPair> = Vec::new();
    for round in 1..=depth {
        let level = round - 1;
        let want = if level % 2 == 0 { Orientation::R } else { Orientation::L };
        let mut next = Vec::with_capacity(gaps.len() * 2);
        for gap in &gaps {
            let pick = wandering
                .iter()
                .filter(|w| w.orientation == want && gap.lo <= w.a && w.b <= gap.hi)
                .fold(None::<&OrientedInterval>, |best, w| match best {
                    Some(b) if b.length() >= w.length() => Some(b),
                    _ => Some(w),
                })
                .ok_or_else(|| Error::InsufficientIntervals {
                    round,
                    gap: (gap.lo.clone(), gap.hi.clone()),
                })?;
            matched.push(MatchedPair {
                source: pick.clone(),
                target: TernaryIndex { n: level, k: gap.k },
            });
            next.push(Gap {
                lo: gap.lo.clone(),
                hi: pick.a.clone(),
                level: level + 1,
                k: 3 * gap.k,
            });
            next.push(Gap {
                lo: pick.b.clone(),
                hi: gap.hi.clone(),
                level: level + 1,
                k: 3 * gap.k + 2,
            });
        }
        gaps = next;
    }
    matched.sort_by(|x, y| x.source.a.cmp(&y.source.a));

    let mut pieces: Vec<PlFn> = Vec::with_capacity(matched.len() + gaps.len());
    for gap in &gaps {
        if gap.lo == gap.hi {
            return Err(Error::InsufficientIntervals {
                round: depth + 1,
                gap: (gap.lo.clone(), gap.hi.clone()),
            });
        }
        let den = Rational::from_integer(num_bigint::BigInt::from(3u64).pow(gap.level));
        let (c, d) = (int(gap.k as i64) / &den, int(gap.k as i64 + 1) / &den);
        pieces.push(PlFn::affine(&gap.lo, &gap.hi, &c, &d));
    }
    for pair in &matched {
        let (c, d) = pair.target.interval();
        let target = PlHomeo::canonical(&c, &d, pair.target.orientation())?;
        let source = g.restrict(&pair.source.a, &pair.source.b)?;
        pieces.push(conjugate_piece(&source, &target, &cfg.end_tolerance));
    }
    pieces.sort_by(|x, y| x.lo().cmp(y.lo()));
    let h = PlHomeo::from_fn(PlFn::concat(&pieces));

    let reference_depth = depth - 1;
    let f_star = build_f_star(reference_depth);
    let residual = h.compose(g)?.c0_distance(&f_star.compose(&h)?)?;
    Ok(ConjugacyReport {
        h,
        depth,
        reference_depth,
        matched,
        residual,
    })
}

/// Increasing `h: [a,b] -> [c,d]` with `target ∘ h = h ∘ source`, built by
/// pushing an affine map between fundamental domains through the dynamics.
/// Both maps must be fixed-point free inside with the same orientation.
fn conjugate_piece(source: &PlHomeo, target: &PlHomeo, tol: &Rational) -> PlFn {
    if let Some(h) = exact_piece(source, target) {
        return h;
    }
    let (a, b) = source.domain();
    let (c, d) = target.domain();
    let limit = (&d - &c) * tol;
    let (g, f) = (source.as_fn(), target.as_fn());
    let (g_inv, f_inv) = (g.invert(), f.invert());

    let x0 = midpoint(&a, &b);
    let y0 = midpoint(&c, &d);
    let (x1, y1) = (g.eval(&x0), f.eval(&y0));
    // Fundamental domain, ordered left to right.
    let base = if x0 < x1 {
        PlFn::affine(&x0, &x1, &y0, &y1)
    } else {
        PlFn::affine(&x1, &x0, &y1, &y0)
    };

    // Push forward (h_{k+1} = f ∘ h_k ∘ g^-1) and backward (h_{k-1} = f^-1 ∘ h_k ∘ g).
    let mut pieces = vec![base.clone()];
    for forward in [true, false] {
        let (step_g, step_g_inv, step_f) = if forward { (g, &g_inv, f) } else { (&g_inv, g, &f_inv) };
        let mut cur = base.clone();
        loop {
            let (lo, hi) = (cur.lo().clone(), cur.hi().clone());
            let (nlo, nhi) = (step_g.eval(&lo), step_g.eval(&hi));
            let back = step_g_inv.restrict(&nlo, &nhi);
            let next = step_f.after(&cur.after(&back));
            let moves_right = nlo >= hi;
            // leftover end region in target coordinates
            let rest = if moves_right {
                &d - next.ys.last().expect("nonempty")
            } else {
                &next.ys[0] - &c
            };
            pieces.push(next.clone());
            cur = next;
            if rest <= limit || rest.is_zero() {
                break;
            }
        }
    }
    pieces.sort_by(|x, y| x.lo().cmp(y.lo()));
    let first = pieces.first().expect("nonempty");
    let last = pieces.last().expect("nonempty");
    let head = PlFn::affine(&a, first.lo(), &c, &first.ys[0]);
    let tail = PlFn::affine(last.hi(), &b, last.ys.last().expect("nonempty"), &d);
    let mut all = vec![head];
    all.extend(pieces);
    all.push(tail);
    PlFn::concat(&all)
}

/// A conjugacy with finitely many breakpoints, when one exists.
///
/// Near the repelling end both maps are linear, and the conjugacies that are
/// linear there form the one-parameter family `x -> c + k (x - a)` pushed
/// through the dynamics. Candidate scales `k` send a breakpoint of `source`
/// onto a breakpoint of `target`; a candidate is accepted when the pushed map
/// arrives affine and aimed at the far fixed end, which makes it exact there.
fn exact_piece(source: &PlHomeo, target: &PlHomeo) -> Option<PlFn> {
    let (g, f) = (source.as_fn(), target.as_fn());
    let m = midpoint(g.lo(), g.hi());
    if g.eval(&m) > m {
        exact_piece_repelling_left(g, f)
    } else {
        // h conjugates g to f exactly when it conjugates their inverses
        exact_piece_repelling_left(&g.invert(), &f.invert())
    }
}

const EXACT_PUSH_LIMIT: usize = 4096;

fn exact_piece_repelling_left(g: &PlFn, f: &PlFn) -> Option<PlFn> {
    let (n, m) = (g.xs.len(), f.xs.len());
    if n < 3 || m < 3 {
        return None;
    }
    let (a, c) = (g.lo(), f.lo());
    let (sa, sb) = (g.slope(0), g.slope(n - 2));
    if sa != f.slope(0) || sb != f.slope(m - 2) {
        return None;
    }
    // g and f are linear on [a, za], [zb, b] and [c, wa], [wb, d]
    let (za, zb, wa, wb) = (&g.xs[1], &g.xs[n - 2], &f.xs[1], &f.xs[m - 2]);
    let (g_inv, f_inv) = (g.invert(), f.invert());
    let linearize = |map_inv: &PlFn, lo: &Rational, zone: &Rational, x: &Rational| {
        let (mut y, mut scale) = (x.clone(), int(1));
        while &y > zone {
            y = map_inv.eval(&y);
            scale *= &sa;
        }
        (y - lo) * scale
    };
    let targets: Vec<Rational> = f.xs[1..m - 1].iter().map(|y| linearize(&f_inv, c, wa, y)).collect();
    for beta in &g.xs[1..n - 1] {
        let lb = linearize(&g_inv, a, za, beta);
        for lt in &targets {
            let k = lt / &lb;
            if let Some(h) = push_linear_germ(g, f, &g_inv, &k, za, zb, wa, wb, &sa) {
                return Some(h);
            }
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn push_linear_germ(
    g: &PlFn,
    f: &PlFn,
    g_inv: &PlFn,
    k: &Rational,
    za: &Rational,
    zb: &Rational,
    wa: &Rational,
    wb: &Rational,
    sa: &Rational,
) -> Option<PlFn> {
    let (a, b, c, d) = (g.lo(), g.hi(), f.lo(), f.hi());
    let t = ((za - a) / sa).min((wa - c) / (k * sa));
    let x0 = a + &t;
    let x1 = g.eval(&x0);
    let base = PlFn::affine(&x0, &x1, &(c + k * &t), &(c + k * (&x1 - a)));
    let mut pieces = vec![PlFn::affine(a, &x0, c, &base.ys[0]), base];
    for _ in 0..EXACT_PUSH_LIMIT {
        let cur = pieces.last().expect("nonempty");
        if cur.lo() >= zb && &cur.ys[0] >= wb {
            if cur.xs.len() != 2 {
                return None;
            }
            let (u, v, hu, hv) = (&cur.xs[0], &cur.xs[1], &cur.ys[0], &cur.ys[1]);
            if (d - hu) * (v - u) != (hv - hu) * (b - u) {
                return None;
            }
            let tail = PlFn::affine(v, b, hv, d);
            pieces.push(tail);
            return Some(PlFn::concat(&pieces));
        }
        let (nlo, nhi) = (g.eval(cur.lo()), g.eval(cur.hi()));
        let back = g_inv.restrict(&nlo, &nhi);
        let next = f.after(&cur.after(&back));
        pieces.push(next);
    }
    None
}

/// Replaces `f` on `[p - δ, p + δ]` (inside one component of `fix(f)`) by the
/// canonical generator of the requested orientation.
pub fn explode_fixed_point(f: &PlHomeo, p: &Rational, delta: &Rational, orientation: Orientation) -> Result<PlHomeo> {
    require_positive("delta", delta)?;
    let (lo, hi) = (p - delta, p + delta);
    let window = (lo.clone(), hi.clone());
    let inside = f.fixed_set().iter().any(|c| c.lo <= lo && hi <= c.hi);
    if !inside {
        return Err(Error::NotInsideFixedSet { window });
    }
    f.splice(&PlHomeo::canonical(&lo, &hi, orientation)?)
}

/// Perturbs `f` by explosions into a map with `P_ε` at C0 distance `< ε`.
///
/// Returns `f` unchanged when it already has `P_ε`. Otherwise: wandering
/// intervals shorter than `ε/2` are flattened to the identity; longer ones are
/// trimmed so that a fixed collar separates them from their neighbours; then
/// every fixed component gets the fewest evenly spaced canonical intervals
/// (width at most `ε/4`) that make consecutive chain gaps `< ε` and keep the
/// orientations alternating, starting with R.
pub fn densify_to_p_eps(f: &PlHomeo, epsilon: &Rational) -> Result<PlHomeo> {
    require_positive("epsilon", epsilon)?;
    if check_p_eps(f, epsilon)?.is_some() {
        return Ok(f.clone());
    }
    let half = epsilon / int(2);
    let mut g = f.clone();
    let mut cores: Vec<OrientedInterval> = Vec::new();
    for w in f.wandering_intervals() {
        if w.length() < half {
            g = g.splice(&PlHomeo::identity(w.a.clone(), w.b.clone())?)?;
        } else {
            let original = f.restrict(&w.a, &w.b)?;
            let (piece, core) = trim_with_collars(&original, w.orientation, &half)?;
            g = g.splice(&piece)?;
            cores.push(core);
        }
    }

    let mut prev = Orientation::L;
    let mut lo = int(0);
    let n = cores.len();
    for i in 0..=n {
        let hi = if i < n { cores[i].a.clone() } else { int(1) };
        let next = cores.get(i).map(|c| c.orientation);
        let len = &hi - &lo;
        let need_odd = next.map(|o| o == prev);
        let mut m: i64 = 0;
        loop {
            let parity_ok = match need_odd {
                Some(odd) => (m % 2 == 1) == odd,
                None => true,
            };
            if parity_ok && &len / int(m + 1) < *epsilon {
                break;
            }
            m += 1;
        }
        let spacing = &len / int(m + 1);
        let width = &spacing / int(4);
        let mut orient = prev.flip();
        for j in 1..=m {
            let c = &lo + &spacing * int(j);
            let piece = PlHomeo::canonical(&(&c - &width / int(2)), &(&c + &width / int(2)), orient)?;
            g = g.splice(&piece)?;
            prev = orient;
            orient = orient.flip();
        }
        if let Some(core) = cores.get(i) {
            prev = core.orientation;
            lo = core.b.clone();
        }
    }
    debug_assert!(check_p_eps(&g, epsilon)?.is_some());
    Ok(g)
}

/// Rebuilds an oriented wandering map on `[a, b]` so that it is the identity on
/// collars `[a, a+s]`, `[b-s, b]` and fixed-point free on `(a+s, b-s)`, with
/// C0 distance to the original `< bound`.
fn trim_with_collars(phi: &PlHomeo, orientation: Orientation, bound: &Rational) -> Result<(PlHomeo, OrientedInterval)> {
    let (a, b) = phi.domain();
    let len = &b - &a;
    let mut s = (&len / int(8)).min(bound / int(8));
    for _ in 0..128 {
        if let Some(piece) = collared(phi, orientation, &s) {
            if &piece.c0_distance(phi)? < bound {
                let core = OrientedInterval::new(&a + &s, &b - &s, orientation);
                return Ok((piece, core));
            }
        }
        s /= int(2);
    }
    Err(Error::InvalidMap(
        "could not trim wandering interval within the distance budget".into(),
    ))
}

fn collared(phi: &PlHomeo, orientation: Orientation, s: &Rational) -> Option<PlHomeo> {
    let (a, b) = phi.domain();
    let two_s = s * int(2);
    let f = phi.as_fn();
    let inv = f.invert();
    let (x1, x2) = match orientation {
        Orientation::R => (&a + &two_s, inv.eval(&(&b - &two_s))),
        Orientation::L => (inv.eval(&(&a + &two_s)), &b - &two_s),
    };
    if x1 >= x2 {
        return None;
    }
    let mut xs = vec![a.clone(), &a + s];
    xs.extend(
        std::iter::once(x1.clone())
            .chain(f.xs.iter().filter(|x| &x1 < *x && *x < &x2).cloned())
            .chain(std::iter::once(x2.clone())),
    );
    xs.push(&b - s);
    xs.push(b.clone());
    let ys: Vec<Rational> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if i < 2 || i + 2 >= xs.len() {
                x.clone()
            } else {
                f.eval(x)
            }
        })
        .collect();
    PlHomeo::new(xs, ys).ok()
}

/// Fixed components of `f` of positive length.
pub fn fixed_blocks(f: &PlHomeo) -> Vec<ClosedInterval> {
    f.fixed_set().into_iter().filter(|c| !c.is_degenerate()).collect()
}
