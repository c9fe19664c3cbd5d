//! Seeded samplers.
//!
//! Each trial gets its own ChaCha8 stream derived from `(seed, tag, index)`,
//! so results do not depend on the order in which trials run.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::plmap::{Orientation, PlHomeo};
use crate::rational::{int, rat, Rational};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ splitmix(tag));
    rng.set_stream(index);
    rng
}

/// Smallest power of two `D` with `width * D >= points`.
pub fn grid_den(width: &Rational, points: u64) -> BigInt {
    let mut d = BigInt::from(1);
    let target = int(points as i64);
    while width * Rational::from_integer(d.clone()) < target {
        d <<= 1;
    }
    d
}

/// Uniform grid point `k/den` in the open interval `(lo, hi)` intersected with
/// the closed interval `[clo, chi]`. `None` when no grid point qualifies.
pub fn grid_point(
    rng: &mut ChaCha8Rng,
    lo: &Rational,
    hi: &Rational,
    clo: &Rational,
    chi: &Rational,
    den: &BigInt,
) -> Option<Rational> {
    let d = Rational::from_integer(den.clone());
    // k/den > lo  <=>  k > lo*den ; k/den >= clo  <=>  k >= clo*den
    let open_lo: BigInt = (lo * &d).floor().to_integer() + 1;
    let closed_lo = (clo * &d).ceil().to_integer();
    let open_hi: BigInt = (hi * &d).ceil().to_integer() - 1;
    let closed_hi = (chi * &d).floor().to_integer();
    let kmin = open_lo.max(closed_lo);
    let kmax = open_hi.min(closed_hi);
    if kmin > kmax {
        return None;
    }
    let span = &kmax - &kmin + 1;
    Some(Rational::new(kmin + uniform_below(rng, &span), den.clone()))
}

fn uniform_below(rng: &mut ChaCha8Rng, n: &BigInt) -> BigInt {
    use num_traits::ToPrimitive;
    match n.to_u64() {
        Some(m) => BigInt::from(rng.gen_range(0..m)),
        None => {
            // wide spans: draw 128 random bits and reduce
            let hi: u64 = rng.gen();
            let lo: u64 = rng.gen();
            let wide: BigInt = (BigInt::from(hi) << 64) + BigInt::from(lo);
            wide.mod_floor(n)
        }
    }
}

/// Uniform point of the grid `1/den` inside `[lo, hi]`.
pub fn grid_point_closed(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, den: u64) -> Rational {
    let d = BigInt::from(den);
    let l = lo - rat(1, 1 << 40);
    let h = hi + rat(1, 1 << 40);
    grid_point(rng, &l, &h, lo, hi, &d).unwrap_or_else(|| lo.clone())
}

fn random_knots(rng: &mut ChaCha8Rng, count: usize, den: i64) -> Vec<Rational> {
    let mut ks: Vec<i64> = Vec::with_capacity(count);
    while ks.len() < count {
        let k = rng.gen_range(1..den);
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks.sort_unstable();
    ks.into_iter().map(|k| rat(k, den)).collect()
}

/// Random increasing PL homeomorphism of `[0, 1]` with `1..=max_knots` interior
/// knots on the grid `1/64`. Typically has finitely many fixed points.
pub fn random_generic_map(rng: &mut ChaCha8Rng, max_knots: usize) -> PlHomeo {
    let n = rng.gen_range(1..=max_knots);
    let mut xs = vec![int(0)];
    xs.extend(random_knots(rng, n, 64));
    xs.push(int(1));
    let mut ys = vec![int(0)];
    ys.extend(random_knots(rng, n, 64));
    ys.push(int(1));
    PlHomeo::new(xs, ys).expect("strictly increasing knots")
}

/// Identity with canonical generators planted on a few random disjoint
/// intervals: maps whose fixed set has interior.
pub fn random_exploded_map(rng: &mut ChaCha8Rng, max_pieces: usize) -> PlHomeo {
    let n = rng.gen_range(1..=max_pieces);
    let ends = random_knots(rng, 2 * n, 128);
    let mut f = PlHomeo::unit_identity();
    for pair in ends.chunks(2) {
        let o = if rng.gen_bool(0.5) {
            Orientation::R
        } else {
            Orientation::L
        };
        let g = PlHomeo::canonical(&pair[0], &pair[1], o).expect("a < b");
        f = f.splice(&g).expect("identity window");
    }
    f
}

/// Either kind of random map, chosen by a fair coin.
pub fn random_map(rng: &mut ChaCha8Rng) -> PlHomeo {
    if rng.gen_bool(0.5) {
        random_generic_map(rng, 5)
    } else {
        random_exploded_map(rng, 4)
    }
}

/// Random PL change of coordinates of `[0, 1]` with 1 to 3 interior
/// breakpoints and every slope in `[1/2, 2]`.
pub fn random_coordinate_change(rng: &mut ChaCha8Rng) -> PlHomeo {
    let n = rng.gen_range(1..=3);
    let xs_inner = random_knots(rng, n, 32);
    let mut xs = vec![int(0)];
    xs.extend(xs_inner);
    xs.push(int(1));
    let mut ys = vec![int(0)];
    let (half, two) = (rat(1, 2), int(2));
    for i in 1..=n {
        let dx = &xs[i] - &xs[i - 1];
        let rest = int(1) - &xs[i];
        let lo = (&ys[i - 1] + &dx * &half).max(int(1) - &rest * &two);
        let hi = (&ys[i - 1] + &dx * &two).min(int(1) - &rest * &half);
        ys.push(grid_point_closed(rng, &lo, &hi, 1 << 12));
    }
    ys.push(int(1));
    PlHomeo::new(xs, ys).expect("slopes bounded away from zero")
}
