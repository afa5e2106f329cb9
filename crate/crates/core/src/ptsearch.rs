//! Sieved search for rational points on `y^2 = x^3 + A4 x + A6`.
//!
//! Points are written `x = m/e^2`, `y = n/e^3` with `gcd(m, e) = 1`, so a
//! candidate is a pair `(m, e)` with `m^3 + A4 m e^4 + A6 e^6` a square.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellcurve::{Curve, CurveError, Point};
use crate::exactnum::{factor, int_sqrt_exact, int_valuation, primes_below, Int, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Search `1 <= e <= max_den`.
    pub max_den: u64,
    /// Search `|m| <= max_num`.
    pub max_num: u64,
    pub sieve_primes: Vec<u64>,
    /// Cap on the number of `(m, e)` candidates; lowers `max_den` if needed.
    pub max_candidates: Option<u64>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            max_den: 64,
            max_num: 1 << 16,
            sieve_primes: primes_below(64).into_iter().filter(|&p| p > 2).collect(),
            max_candidates: None,
        }
    }
}

impl SearchParams {
    pub fn new(max_num: u64, max_den: u64) -> Self {
        SearchParams { max_num, max_den, ..SearchParams::default() }
    }

    fn effective_den(&self) -> u64 {
        let per_row = 2 * self.max_num + 1;
        match self.max_candidates {
            Some(c) => self.max_den.min(c / per_row),
            None => self.max_den,
        }
    }
}

/// `r` is a square modulo `m`, for each `r < m`.
fn square_table(m: u64) -> Vec<bool> {
    let mut t = vec![false; m as usize];
    for n in 0..m {
        t[(n * n % m) as usize] = true;
    }
    t
}

fn residue(v: &Int, m: u64) -> u64 {
    v.mod_floor(&Int::from(m)).to_u64().expect("residue fits")
}

fn isqrt_exact_i128(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let mut r = (v as f64).sqrt() as i128;
    while r > 0 && r.checked_mul(r).is_none_or(|s| s > v) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= v) {
        r += 1;
    }
    (r * r == v).then_some(r)
}

fn small(v: &Int) -> Option<i128> {
    v.to_i128().filter(|x| x.unsigned_abs() < 1 << 60)
}

/// Sieve moduli: 64 first, then the given odd primes.
fn moduli(primes: &[u64]) -> Vec<(u64, Vec<bool>)> {
    std::iter::once(64)
        .chain(primes.iter().copied().filter(|&p| p > 2))
        .map(|m| (m, square_table(m)))
        .collect()
}

/// Sieve for `b1 M^4 + a M^2 e^2 + b2 e^4` being a square.
pub struct QuarticSieve {
    b1: Int,
    a: Int,
    b2: Int,
    small: Option<(i128, i128, i128)>,
    moduli: Vec<(u64, Vec<bool>)>,
}

/// Per-`e` residue masks of a [`QuarticSieve`].
pub struct QuarticRow {
    masks: Vec<(u64, Vec<bool>)>,
}

impl QuarticRow {
    pub fn passes(&self, m: u64) -> bool {
        self.masks.iter().all(|(md, t)| t[(m % md) as usize])
    }
}

impl QuarticSieve {
    pub fn new(b1: &Int, a: &Int, b2: &Int) -> Self {
        let primes: Vec<u64> = primes_below(64);
        let small = match (small(b1), small(a), small(b2)) {
            (Some(x), Some(y), Some(z)) => Some((x, y, z)),
            _ => None,
        };
        QuarticSieve { b1: b1.clone(), a: a.clone(), b2: b2.clone(), small, moduli: moduli(&primes) }
    }

    pub fn row(&self, e: u64) -> QuarticRow {
        let masks = self
            .moduli
            .iter()
            .map(|(md, sq)| {
                let md = *md;
                let e2 = (e % md) * (e % md) % md;
                let c4 = residue(&self.b1, md);
                let c2 = residue(&self.a, md) * e2 % md;
                let c0 = residue(&self.b2, md) * (e2 * e2 % md) % md;
                let t = (0..md)
                    .map(|r| {
                        let r2 = r * r % md;
                        let v = (c4 * (r2 * r2 % md) + c2 * r2 + c0) % md;
                        sq[v as usize]
                    })
                    .collect();
                (md, t)
            })
            .collect();
        QuarticRow { masks }
    }

    /// `N` with `N^2 = b1 m^4 + a m^2 e^2 + b2 e^4`, if any.
    pub fn exact_square(&self, m: u64, e: u64) -> Option<Int> {
        if let Some((b1, a, b2)) = self.small {
            let (m2, e2) = ((m as i128) * (m as i128), (e as i128) * (e as i128));
            let v = b1
                .checked_mul(m2 * m2)
                .zip(a.checked_mul(m2 * e2))
                .zip(b2.checked_mul(e2 * e2))
                .and_then(|((x, y), z)| x.checked_add(y)?.checked_add(z));
            if let Some(v) = v {
                return isqrt_exact_i128(v).map(Int::from);
            }
        }
        let (m, e) = (Int::from(m), Int::from(e));
        let (m2, e2) = (&m * &m, &e * &e);
        int_sqrt_exact(&(&self.b1 * &m2 * &m2 + &self.a * &m2 * &e2 + &self.b2 * &e2 * &e2))
    }
}

fn integral_coeffs(c: &Curve) -> Option<(Int, Int)> {
    if !c.a2.is_zero() || !c.a4.is_integer() || !c.a6.is_integer() {
        return None;
    }
    Some((c.a4.to_integer(), c.a6.to_integer()))
}

/// All pairs `(m, n)` with `n >= 0` on one row `e`.
fn search_row(a4: &Int, a6: &Int, e: u64, max_num: u64, mods: &[(u64, Vec<bool>)]) -> Vec<(i64, u64, Int)> {
    let e_int = Int::from(e);
    let e2 = &e_int * &e_int;
    let c1 = a4 * &e2 * &e2;
    let c0 = a6 * &e2 * &e2 * &e2;
    let masks: Vec<(u64, Vec<bool>)> = mods
        .iter()
        .map(|(md, sq)| {
            let md = *md;
            let (k1, k0) = (residue(&c1, md), residue(&c0, md));
            let t = (0..md).map(|r| sq[((r * r % md * r + k1 * r + k0) % md) as usize]).collect();
            (md, t)
        })
        .collect();
    let small = small(&c1).zip(small(&c0));
    let mut out = Vec::new();
    let max = max_num as i64;
    for m in -max..=max {
        if !masks.iter().all(|(md, t)| t[m.rem_euclid(*md as i64) as usize]) {
            continue;
        }
        if (m.unsigned_abs()).gcd(&e) != 1 {
            continue;
        }
        let n = small
            .and_then(|(k1, k0)| {
                let mm = m as i128;
                let v = mm.checked_mul(mm)?.checked_mul(mm)?.checked_add(k1.checked_mul(mm)?)?;
                v.checked_add(k0).map(isqrt_exact_i128)
            })
            .map(|r| r.map(Int::from))
            .unwrap_or_else(|| {
                let mi = Int::from(m);
                int_sqrt_exact(&(&mi * &mi * &mi + &c1 * &mi + &c0))
            });
        if let Some(n) = n {
            out.push((m, e, n));
        }
    }
    out
}

fn sort_points(points: &mut [Point]) {
    points.sort_by(|p, q| {
        p.naive_height()
            .cmp(&q.naive_height())
            .then_with(|| p.x().cmp(&q.x()))
            .then_with(|| p.y().cmp(&q.y()))
    });
}

/// Every point with `x = m/e^2`, `|m| <= M`, `e <= E`, sorted by naive
/// height, then `x`, then `y`. Returns nothing unless `A2 = 0` and the other
/// coefficients are integers.
pub fn search_points(c: &Curve, params: &SearchParams) -> Vec<Point> {
    let Some((a4, a6)) = integral_coeffs(c) else {
        log::warn!("search_points needs an integral short model, got {c}");
        return Vec::new();
    };
    let mods = moduli(&params.sieve_primes);
    let rows: Vec<(i64, u64, Int)> = (1..=params.effective_den())
        .into_par_iter()
        .flat_map_iter(|e| search_row(&a4, &a6, e, params.max_num, &mods))
        .collect();
    let mut points = Vec::new();
    for (m, e, n) in rows {
        let e = Int::from(e);
        let x = Rat::new(Int::from(m), &e * &e);
        let y = Rat::new(n.clone(), &e * &e * &e);
        debug_assert!(c.on_curve(&Point::new(x.clone(), y.clone())));
        if !n.is_zero() {
            points.push(Point::new(x.clone(), -y.clone()));
        }
        points.push(Point::new(x, y));
    }
    sort_points(&mut points);
    points
}

/// Lowest-height infinite-order point with `x != 0` on a curve with `A2 = 0`.
pub fn first_infinite_order(c: &Curve, params: &SearchParams) -> Result<Option<Point>, CurveError> {
    for p in search_points(c, params) {
        if p.x().is_some_and(|x| x.is_zero()) {
            continue;
        }
        if c.is_infinite_order(&p)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Smallest `t > 0` making `t^4 A4` and `t^6 A6` integral.
fn clearing_scale(c: &Curve) -> Int {
    let mut t = Int::from(1);
    let den = c.a4.denom().lcm(c.a6.denom());
    let Ok(fac) = factor(&den) else { return den };
    for (p, _) in &fac.factors {
        let v4 = int_valuation(c.a4.denom(), p) as u64;
        let v6 = int_valuation(c.a6.denom(), p) as u64;
        let k = v4.div_ceil(4).max(v6.div_ceil(6));
        t *= num_traits::pow(p.clone(), k as usize);
    }
    t
}

/// Like [`first_infinite_order`] for any Weierstrass curve, searching on an
/// integral short model and mapping the point back.
pub fn first_infinite_order_any(c: &Curve, params: &SearchParams) -> Result<Option<Point>, CurveError> {
    if integral_coeffs(c).is_some() {
        return first_infinite_order(c, params);
    }
    let (dep, _) = c.depressed();
    let model = dep.twist_by(&Rat::from_integer(clearing_scale(&dep)))?;
    let iso = c.isomorphism_to(&model).expect("twist of the depressed model is isomorphic");
    for p in search_points(&model, params) {
        let q = iso.invert(&p);
        if q.x().is_some_and(|x| x.is_zero()) {
            continue;
        }
        if c.is_infinite_order(&q)? {
            return Ok(Some(q.with_nonneg_y()).filter(|q| !q.is_infinity()));
        }
    }
    Ok(None)
}
