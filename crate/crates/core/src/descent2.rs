//! Rank bounds by descent via 2-isogeny for `y^2 = x^3 + A x^2 + B x`.
//!
//! The curve `E` and its isogenous partner `E': y^2 = x^3 - 2A x^2 + (A^2 - 4B) x`
//! each get a connecting map into `Q*/Q*^2`. A class `b1 | B` is in the image
//! for `E` iff the quartic `N^2 = b1 M^4 + A M^2 e^2 + (B/b1) e^4` has a
//! rational point. Counting locally solvable classes on both sides gives an
//! upper bound for the rank, counting classes with a global point found by
//! the sieved search gives a lower bound:
//!
//! `rank = log2(#im(E) * #im(E')) - 2`.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ellcurve::{quartic_twist, Curve, CurveError, Point};
use crate::exactnum::{factor, int_sqrt_exact, int_valuation, rat_int, Int, NumError, Rat};
use crate::ptsearch::{self, SearchParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescentError {
    #[error("degenerate curve: B(A^2 - 4B) = 0 for A={a}, B={b}")]
    Degenerate { a: Int, b: Int },
    #[error("locally solvable classes do not form a group ({0} classes)")]
    SelmerNotGroup(usize),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// `E: y^2 = x^3 + a x^2 + b x` and `E': y^2 = x^3 + a' x^2 + b' x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyPair {
    pub a: Int,
    pub b: Int,
    pub a_prime: Int,
    pub b_prime: Int,
    pub e: Curve,
    pub e_prime: Curve,
}

pub fn isogenous_pair(a: &Int, b: &Int) -> Result<IsogenyPair, DescentError> {
    let b_prime = a * a - Int::from(4) * b;
    if b.is_zero() || b_prime.is_zero() {
        return Err(DescentError::Degenerate { a: a.clone(), b: b.clone() });
    }
    let a_prime = -Int::from(2) * a;
    let e = Curve::new(rat_int(a), rat_int(b), Rat::zero())?;
    let e_prime = Curve::new(rat_int(&a_prime), rat_int(&b_prime), Rat::zero())?;
    Ok(IsogenyPair { a: a.clone(), b: b.clone(), a_prime, b_prime, e, e_prime })
}

/// The quartic `N^2 = b1 M^4 + a M^2 e^2 + b2 e^4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomSpace {
    pub b1: Int,
    pub b2: Int,
    pub a: Int,
}

impl HomSpace {
    pub fn new(b1: Int, a: Int, b: &Int) -> Self {
        let b2 = b / &b1;
        HomSpace { b1, b2, a }
    }

    pub fn eval(&self, m: &Int, e: &Int) -> Int {
        let m2 = m * m;
        let e2 = e * e;
        &self.b1 * &m2 * &m2 + &self.a * &m2 * &e2 + &self.b2 * &e2 * &e2
    }

    /// Coefficients of the dehomogenized quartic in `x = M/e`, lowest first.
    fn quartic(&self) -> [Int; 5] {
        [self.b2.clone(), Int::zero(), self.a.clone(), Int::zero(), self.b1.clone()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Prime(Int),
}

/// Whether the homogeneous space has a nontrivial point over `Q_p` or `R`.
pub fn local_solvable(hs: &HomSpace, place: &Place) -> bool {
    match place {
        Place::Infinity => real_solvable(hs),
        Place::Prime(p) => qp_solvable(&hs.quartic(), p),
    }
}

fn real_solvable(hs: &HomSpace) -> bool {
    if hs.b1.is_positive() || hs.b2.is_positive() {
        return true;
    }
    // both negative: max of b1 t^2 + a t + b2 over t >= 0
    hs.a.is_positive() && !(&hs.a * &hs.a - Int::from(4) * &hs.b1 * &hs.b2).is_negative()
}

fn eval_quartic(g: &[Int; 5], x: &Int) -> Int {
    let mut acc = Int::zero();
    for c in g.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn eval_quartic_deriv(g: &[Int; 5], x: &Int) -> Int {
    let mut acc = Int::zero();
    for (i, c) in g.iter().enumerate().skip(1).rev() {
        acc = acc * x + c * Int::from(i);
    }
    acc
}

fn jacobi_u64(mut a: u64, mut n: u64) -> i32 {
    a %= n;
    let mut t = 1;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Nonzero `c` is a square in `Q_p`.
fn is_padic_square(c: &Int, p: &Int) -> bool {
    let v = int_valuation(c, p);
    if v % 2 == 1 {
        return false;
    }
    let u = c / num_traits::pow(p.clone(), v as usize);
    if *p == Int::from(2) {
        return u.mod_floor(&Int::from(8)) == Int::one();
    }
    let r = u.mod_floor(p);
    match (r.to_u64(), p.to_u64()) {
        (Some(r), Some(pp)) => jacobi_u64(r, pp) == 1,
        _ => {
            let e = (p - 1u32) / 2u32;
            r.modpow(&e, p).is_one()
        }
    }
}

enum Lemma {
    Soluble,
    Insoluble,
    Refine,
}

/// Decides the residue class `x + p^nu Z_p` where possible.
fn class_status(g: &[Int; 5], p: &Int, x: &Int, nu: u32) -> Lemma {
    let gx = eval_quartic(g, x);
    if gx.is_zero() || is_padic_square(&gx, p) {
        return Lemma::Soluble;
    }
    let lambda = int_valuation(&gx, p) as u64;
    let dgx = eval_quartic_deriv(g, x);
    let nu = nu as u64;
    let mu = if dgx.is_zero() { None } else { Some(int_valuation(&dgx, p) as u64) };
    if let Some(mu) = mu {
        // Newton: a root of g lies within p^(lambda - mu) of x
        if lambda > 2 * mu && lambda - mu >= nu {
            return Lemma::Soluble;
        }
    }
    let slack = if *p == Int::from(2) { 3 } else { 1 };
    let perturbation = match mu {
        Some(mu) => (nu + mu).min(2 * nu),
        None => 2 * nu,
    };
    if perturbation >= lambda + slack {
        // g(x + p^nu t) = g(x)(1 + p^slack z): same square class as g(x)
        Lemma::Insoluble
    } else {
        Lemma::Refine
    }
}

const MAX_PADIC_DEPTH: u32 = 48;

/// Some `x` in `x0 + p^nu Z_p` makes `g(x)` a square in `Q_p`.
fn zp_solvable(g: &[Int; 5], p: &Int, x0: &Int, nu: u32) -> bool {
    if nu > MAX_PADIC_DEPTH {
        log::warn!("p-adic refinement depth exceeded at p={p}; assuming solvable");
        return true;
    }
    let step = num_traits::pow(p.clone(), nu as usize);
    let mut pending = Vec::new();
    let mut r = Int::zero();
    while &r < p {
        let x = x0 + &r * &step;
        match class_status(g, p, &x, nu + 1) {
            Lemma::Soluble => return true,
            Lemma::Refine => pending.push(x),
            Lemma::Insoluble => {}
        }
        r += 1u32;
    }
    pending.into_iter().any(|x| zp_solvable(g, p, &x, nu + 1))
}

fn qp_solvable(g: &[Int; 5], p: &Int) -> bool {
    if zp_solvable(g, p, &Int::zero(), 0) {
        return true;
    }
    let rev = [g[4].clone(), g[3].clone(), g[2].clone(), g[1].clone(), g[0].clone()];
    zp_solvable(&rev, p, &Int::zero(), 1)
}

/// Coprime `(M, e)` with `0 <= M, e <= bound` and `N^2 = b1 M^4 + a M^2 e^2 + b2 e^4`.
pub fn search_homspace(hs: &HomSpace, bound: u64) -> Option<(Int, Int, Int)> {
    search_shell(hs, 0, bound)
}

/// Searches pairs with `lo < max(M, e) <= hi` (plus the degenerate pairs when `lo == 0`).
fn search_shell(hs: &HomSpace, lo: u64, hi: u64) -> Option<(Int, Int, Int)> {
    if lo == 0 {
        for (m, e) in [(1i64, 0i64), (0, 1)] {
            let (m, e) = (Int::from(m), Int::from(e));
            if let Some(n) = int_sqrt_exact(&hs.eval(&m, &e)) {
                return Some((m, e, n));
            }
        }
    }
    let quartic = ptsearch::QuarticSieve::new(&hs.b1, &hs.a, &hs.b2);
    for e in 1..=hi {
        let rows = quartic.row(e);
        let m_start = if e > lo { 1 } else { lo + 1 };
        for m in m_start..=hi {
            if !rows.passes(m) || m.gcd(&e) != 1 {
                continue;
            }
            if let Some(n) = quartic.exact_square(m, e) {
                return Some((Int::from(m), Int::from(e), n));
            }
        }
    }
    None
}

/// Search schedule for homogeneous spaces: bounds double from `start` to `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub start: u64,
    pub cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { start: 1 << 4, cap: 1 << 12 }
    }
}

impl Budget {
    pub fn with_cap(cap: u64) -> Self {
        Budget { start: (1 << 4).min(cap.max(1)), cap }
    }

    /// No search at all; only local information is used.
    pub fn zero() -> Self {
        Budget { start: 0, cap: 0 }
    }

    pub fn descriptor(&self) -> String {
        format!("homspace:{}..{}", self.start, self.cap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankStatus {
    Exact,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankResult {
    pub lower: u32,
    pub upper: u32,
    pub status: RankStatus,
    pub witnesses: Vec<Point>,
    /// Largest homogeneous-space search bound actually used.
    pub budget_used: u64,
}

impl RankResult {
    pub fn is_exact(&self) -> bool {
        self.status == RankStatus::Exact
    }
}

/// Square classes as bit masks over the basis `[-1, p_1, ..., p_k]`.
#[derive(Clone, Debug)]
struct ClassBasis {
    primes: Vec<Int>,
}

impl ClassBasis {
    fn of(n: &Int) -> Result<Self, NumError> {
        Ok(ClassBasis { primes: factor(n)?.primes().cloned().collect() })
    }

    fn value(&self, mask: u64) -> Int {
        let mut v = if mask & 1 == 1 { -Int::one() } else { Int::one() };
        for (i, p) in self.primes.iter().enumerate() {
            if mask >> (i + 1) & 1 == 1 {
                v *= p;
            }
        }
        v
    }

    fn mask(&self, n: &Int) -> u64 {
        let mut m = if n.is_negative() { 1 } else { 0 };
        for (i, p) in self.primes.iter().enumerate() {
            if int_valuation(n, p) % 2 == 1 {
                m |= 1 << (i + 1);
            }
        }
        m
    }

    fn all_masks(&self) -> impl Iterator<Item = u64> {
        0..(1u64 << (self.primes.len() + 1))
    }
}

/// Row-reduced basis of an F2 subspace spanned by masks.
#[derive(Clone, Debug, Default)]
struct Span {
    rows: Vec<u64>,
}

impl Span {
    fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            let top = 63 - r.leading_zeros();
            if v >> top & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let top = 63 - v.leading_zeros();
        for r in self.rows.iter_mut() {
            if *r >> top & 1 == 1 {
                *r ^= v;
            }
        }
        self.rows.push(v);
        self.rows.sort_unstable_by(|a, b| b.cmp(a));
        true
    }

    fn dim(&self) -> u32 {
        self.rows.len() as u32
    }
}

/// One side of the isogeny: curve `y^2 = x^3 + a x^2 + b x`.
struct Side {
    a: Int,
    b: Int,
    basis: ClassBasis,
    selmer: Vec<u64>,
    image: Span,
    /// `(class mask, M, e, N)` for every class found by search.
    found: Vec<(u64, Int, Int, Int)>,
}

fn bad_primes(pair: &IsogenyPair) -> Result<Vec<Int>, NumError> {
    let mut ps: BTreeSet<Int> = BTreeSet::new();
    ps.insert(Int::from(2));
    ps.extend(factor(&pair.b)?.primes().cloned());
    ps.extend(factor(&pair.b_prime)?.primes().cloned());
    Ok(ps.into_iter().collect())
}

impl Side {
    fn new(a: &Int, b: &Int, primes: &[Int]) -> Result<Self, DescentError> {
        let basis = ClassBasis::of(b)?;
        let mut image = Span::default();
        image.insert(basis.mask(b));
        let mut selmer = Vec::new();
        for mask in basis.all_masks() {
            let b1 = basis.value(mask);
            let hs = HomSpace::new(b1, a.clone(), b);
            let trivially = image.contains(mask);
            if trivially
                || (local_solvable(&hs, &Place::Infinity)
                    && primes.iter().all(|p| local_solvable(&hs, &Place::Prime(p.clone()))))
            {
                selmer.push(mask);
            }
        }
        let n = selmer.len();
        let set: BTreeSet<u64> = selmer.iter().copied().collect();
        let closed = n.is_power_of_two()
            && selmer.iter().all(|x| selmer.iter().all(|y| set.contains(&(x ^ y))));
        if !closed {
            return Err(DescentError::SelmerNotGroup(n));
        }
        Ok(Side {
            a: a.clone(),
            b: b.clone(),
            basis,
            selmer,
            image,
            found: Vec::new(),
        })
    }

    fn selmer_dim(&self) -> u32 {
        self.selmer.len().trailing_zeros()
    }

    fn complete(&self) -> bool {
        self.image.dim() == self.selmer_dim()
    }

    fn search_round(&mut self, lo: u64, hi: u64) {
        let pending: Vec<u64> =
            self.selmer.iter().copied().filter(|&m| !self.image.contains(m)).collect();
        for mask in pending {
            if self.image.contains(mask) {
                continue;
            }
            let hs = HomSpace::new(self.basis.value(mask), self.a.clone(), &self.b);
            if let Some((m, e, n)) = search_shell(&hs, lo, hi) {
                self.image.insert(mask);
                self.found.push((mask, m, e, n));
            }
        }
    }

    fn lifted_points(&self) -> Vec<Point> {
        self.found
            .iter()
            .filter(|(_, m, _, _)| !m.is_zero())
            .map(|(mask, m, e, n)| {
                let b1 = rat_int(&self.basis.value(*mask));
                let mr = Rat::new(m.clone(), e.clone());
                let x = &b1 * &mr * &mr;
                let y = &b1 * &mr * Rat::new(n.clone(), e * e);
                Point::new(x, y)
            })
            .collect()
    }
}

/// `E' -> E` dual isogeny: `(x, y) -> (y^2/(4x^2), y (b' - x^2)/(8 x^2))`.
fn dual_isogeny(pair: &IsogenyPair, p: &Point) -> Point {
    match p {
        Point::Affine(x, y) if !x.is_zero() => {
            let x2 = x * x;
            let four = Rat::from_integer(Int::from(4));
            let eight = Rat::from_integer(Int::from(8));
            Point::new(
                y * y / (four * &x2),
                y * (rat_int(&pair.b_prime) - &x2) / (eight * &x2),
            )
        }
        _ => Point::Infinity,
    }
}

/// Largest `t` with `t^2 | a` and `t^4 | b`.
fn minimal_scaling(a: &Int, b: &Int) -> Result<Int, NumError> {
    let fac = factor(b)?;
    let mut t = Int::one();
    for (p, k) in &fac.factors {
        let mut j = k / 4;
        if !a.is_zero() {
            j = j.min(int_valuation(a, p) / 2);
        }
        t *= num_traits::pow(p.clone(), j as usize);
    }
    Ok(t)
}

/// Rank bounds for `y^2 = x^3 + a x^2 + b x` by descent via 2-isogeny.
pub fn rank_bounds(a: &Int, b: &Int, budget: Budget) -> Result<RankResult, DescentError> {
    let original = isogenous_pair(a, b)?;
    let t = minimal_scaling(a, b)?;
    let t2 = &t * &t;
    let (ra, rb) = (a / &t2, b / (&t2 * &t2));
    let pair = isogenous_pair(&ra, &rb)?;
    let primes = bad_primes(&pair)?;

    let mut side = Side::new(&pair.a, &pair.b, &primes)?;
    let mut side_prime = Side::new(&pair.a_prime, &pair.b_prime, &primes)?;
    let upper = side.selmer_dim() + side_prime.selmer_dim() - 2;

    let mut used = 0;
    if budget.cap > 0 {
        let mut lo = 0;
        let mut hi = budget.start.max(1).min(budget.cap);
        loop {
            if side.complete() && side_prime.complete() {
                break;
            }
            side.search_round(lo, hi);
            side_prime.search_round(lo, hi);
            used = hi;
            if hi >= budget.cap {
                break;
            }
            lo = hi;
            hi = (hi * 2).min(budget.cap);
        }
    }
    // torsion classes not yet found can leave the found span below 2
    let lower = (side.image.dim() + side_prime.image.dim()).saturating_sub(2);
    debug_assert!(lower <= upper);

    let mut witnesses: Vec<Point> = side.lifted_points();
    witnesses.extend(side_prime.lifted_points().iter().map(|p| dual_isogeny(&pair, p)));
    let inv_t = Rat::new(t.clone(), Int::one());
    let mut out: Vec<Point> = Vec::new();
    for w in witnesses {
        let w = quartic_twist(&w, &inv_t)?.with_nonneg_y();
        debug_assert!(original.e.on_curve(&w));
        if w.is_infinity() || w.x().is_some_and(|x| x.is_zero()) || out.contains(&w) {
            continue;
        }
        if original.e.is_infinite_order(&w)? {
            out.push(w);
        }
    }
    out.sort_by_key(|p| p.naive_height());

    Ok(RankResult {
        lower,
        upper,
        status: if lower == upper { RankStatus::Exact } else { RankStatus::Undetermined },
        witnesses: out,
        budget_used: used,
    })
}

/// Upper bound reported when no descent was possible.
pub const NO_UPPER_BOUND: u32 = 8;

/// Integer roots of the monic cubic `x^3 + a2 x^2 + a4 x + a6`.
fn integer_roots(a2: &Int, a4: &Int, a6: &Int) -> Result<Vec<Int>, NumError> {
    let f = |x: &Int| x * x * x + a2 * x * x + a4 * x + a6;
    if a6.is_zero() {
        let mut roots = vec![Int::zero()];
        // remaining quadratic x^2 + a2 x + a4
        let disc = a2 * a2 - Int::from(4) * a4;
        if let Some(s) = int_sqrt_exact(&disc) {
            for r in [(-a2 + &s) / 2, (-a2 - &s) / 2] {
                if f(&r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        return Ok(roots);
    }
    let mut divisors = vec![Int::one()];
    for (p, k) in &factor(a6)?.factors {
        let mut next = Vec::with_capacity(divisors.len() * (*k as usize + 1));
        for d in &divisors {
            let mut pk = Int::one();
            for _ in 0..=*k {
                next.push(d * &pk);
                pk *= p;
            }
        }
        divisors = next;
    }
    divisors.sort();
    Ok(divisors.into_iter().flat_map(|d| [d.clone(), -d]).filter(|r| f(r).is_zero()).collect())
}

/// Rank bounds for any `y^2 = x^3 + A2 x^2 + A4 x + A6`. With a rational
/// 2-torsion point the curve is moved to `y^2 = x^3 + A x^2 + B x` and run
/// through [`rank_bounds`]; otherwise only a point search is done and the
/// upper bound is [`NO_UPPER_BOUND`].
pub fn rank_bounds_curve(c: &Curve, budget: Budget) -> Result<RankResult, DescentError> {
    // scale so that t^2 A2, t^4 A4, t^6 A6 are integers
    let mut t = Int::one();
    let den = c.a2.denom().lcm(c.a4.denom()).lcm(c.a6.denom());
    for (p, _) in &factor(&den)?.factors {
        let k = [(&c.a2, 2u32), (&c.a4, 4), (&c.a6, 6)]
            .iter()
            .map(|(q, w)| int_valuation(q.denom(), p).div_ceil(*w))
            .max()
            .unwrap_or(0);
        t *= num_traits::pow(p.clone(), k as usize);
    }
    let t = rat_int(&t);
    let model = c.twist_by(&t)?;
    let (a2, a4, a6) = (model.a2.to_integer(), model.a4.to_integer(), model.a6.to_integer());
    let inv_t = Rat::one() / &t;
    let back = |p: &Point, r: &Int| -> Result<Point, DescentError> {
        let shifted = match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::new(x + rat_int(r), y.clone()),
        };
        Ok(quartic_twist(&shifted, &inv_t)?)
    };
    match integer_roots(&a2, &a4, &a6)?.into_iter().next() {
        Some(r) => {
            let three = Int::from(3);
            let a = &a2 + &three * &r;
            let b = &a4 + Int::from(2) * &a2 * &r + &three * &r * &r;
            let mut res = rank_bounds(&a, &b, budget)?;
            res.witnesses = res.witnesses.iter().map(|p| back(p, &r)).collect::<Result<_, _>>()?;
            Ok(res)
        }
        None => {
            let mut witnesses = Vec::new();
            if budget.cap > 0 {
                if let Some(p) = ptsearch::first_infinite_order_any(c, &fallback_search_params())? {
                    witnesses.push(p);
                }
            }
            Ok(RankResult {
                lower: witnesses.len() as u32,
                upper: NO_UPPER_BOUND,
                status: RankStatus::Undetermined,
                witnesses,
                budget_used: 0,
            })
        }
    }
}

/// Default point-search bounds used as a witness fallback.
pub fn fallback_search_params() -> SearchParams {
    SearchParams { max_num: 2000, max_den: 20, ..SearchParams::default() }
}

/// An infinite-order point with `x != 0`, from descent lifts or a direct
/// point search, keeping the one of smaller naive height. A zero budget
/// searches nothing.
pub fn positive_rank_witness(
    a: &Int,
    b: &Int,
    budget: Budget,
) -> Result<Option<Point>, DescentError> {
    let rank = rank_bounds(a, b, budget)?;
    let curve = Curve::new(rat_int(a), rat_int(b), Rat::zero())?;
    let mut best = rank.witnesses.into_iter().next();
    if budget.cap == 0 {
        return Ok(best);
    }
    if let Some(p) = ptsearch::first_infinite_order_any(&curve, &fallback_search_params())? {
        if best.as_ref().is_none_or(|q| p.naive_height() < q.naive_height()) {
            best = Some(p);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_four_torsion_without_search() {
        let r = rank_bounds(&int(0), &int(4), Budget::zero()).unwrap();
        assert_eq!((r.lower, r.upper, r.status), (0, 0, RankStatus::Exact));
        let r = rank_bounds(&int(0), &int(4), Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (0, 0));
    }

    #[test]
    fn general_models() {
        // y^2 = x^3 + 47x with x -> x - 1, then scaled by 1/2
        let shifted = Curve::new(Rat::from_integer(int(-3)), Rat::from_integer(int(50)), Rat::from_integer(int(-48)))
            .unwrap()
            .twist_by(&rat(1, 2))
            .unwrap();
        let r = rank_bounds_curve(&shifted, Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper, r.status), (1, 1, RankStatus::Exact));
        assert!(r.witnesses.iter().all(|p| shifted.on_curve(p)));
        // y^2 = x^3 - 2 has no rational 2-torsion
        let m = Curve::mordell(Rat::from_integer(int(-2))).unwrap();
        let r = rank_bounds_curve(&m, Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (1, NO_UPPER_BOUND));
        assert!(m.on_curve(&r.witnesses[0]));
        let r = rank_bounds_curve(&Curve::bx(Rat::from_integer(int(257))).unwrap(), Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (0, 2));
    }
    use crate::exactnum::{int, parse_rat, rat};

    fn hs(b1: i64, a: i64, b2: i64) -> HomSpace {
        HomSpace { b1: int(b1), b2: int(b2), a: int(a) }
    }

    /// Residue oracle: `Some(true)` if a primitive residue pair mod p^k has a
    /// value of valuation `< k - slack` that is a square mod p^k (which lifts),
    /// `Some(false)` if no primitive pair has a value that is a square mod p^k.
    fn residue_oracle(h: &HomSpace, p: u64, k: u32) -> Option<bool> {
        let pk = p.pow(k);
        let slack = if p == 2 { 3 } else { 1 };
        let mut squares = vec![false; pk as usize];
        for n in 0..pk {
            squares[(n * n % pk) as usize] = true;
        }
        let modp = |v: &Int| v.mod_floor(&Int::from(pk)).to_u64().unwrap();
        let mut any_square = false;
        for m in 0..pk {
            for e in 0..pk {
                if m % p == 0 && e % p == 0 {
                    continue;
                }
                let v = h.eval(&Int::from(m), &Int::from(e));
                let r = modp(&v);
                if !squares[r as usize] {
                    continue;
                }
                any_square = true;
                if r != 0 {
                    let val = int_valuation(&Int::from(r), &Int::from(p));
                    if val + slack <= k && val.is_multiple_of(2) {
                        // unit part square mod p^(k - val) is enough to lift
                        let u = Int::from(r) / Int::from(p.pow(val));
                        let need = if p == 2 { 8 } else { p };
                        let sq = if p == 2 {
                            u.mod_floor(&Int::from(8)) == Int::one()
                        } else {
                            jacobi_u64(u.mod_floor(&Int::from(need)).to_u64().unwrap(), p) == 1
                        };
                        if sq {
                            return Some(true);
                        }
                    }
                }
            }
        }
        if any_square {
            None
        } else {
            Some(false)
        }
    }

    #[test]
    fn isogenous_pair_examples() {
        let p = isogenous_pair(&int(0), &int(47)).unwrap();
        assert_eq!(p.e_prime, Curve::bx(parse_rat("-188").unwrap()).unwrap());
        let p = isogenous_pair(&int(0), &int(1)).unwrap();
        assert_eq!(p.b_prime, int(-4));
        let p = isogenous_pair(&int(0), &int(94)).unwrap();
        assert_eq!(p.b_prime, int(-376));
        assert!(isogenous_pair(&int(2), &int(1)).is_err());
        assert!(isogenous_pair(&int(2), &int(0)).is_err());
    }

    #[test]
    fn local_examples() {
        assert!(!local_solvable(&hs(-1, 0, -3), &Place::Infinity));
        assert!(!local_solvable(&hs(-1, -5, -3), &Place::Infinity));
        assert!(local_solvable(&hs(-1, 5, -3), &Place::Infinity));
        for p in [2, 3, 5, 7, 47] {
            assert!(local_solvable(&hs(1, 0, 94), &Place::Prime(int(p))));
        }
        let h = hs(2, 0, 47);
        let fast = local_solvable(&h, &Place::Prime(int(47)));
        assert_eq!(residue_oracle(&h, 47, 2), Some(fast));
    }

    #[test]
    fn local_matches_residue_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let mut compared = 0;
        let mut seen_false = 0;
        for _ in 0..400 {
            let p: u64 = [2, 3, 5, 7][rng.gen_range(0..4)];
            let k = match p {
                2 => 7,
                3 => 5,
                5 => 4,
                _ => 3,
            };
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let unit: i64 = rng.gen_range(1..12) * if rng.gen::<bool>() { 1 } else { -1 };
                unit * (p as i64).pow(rng.gen_range(0..2))
            };
            let h = hs(pick(&mut rng), rng.gen_range(-6..6), pick(&mut rng));
            let disc = (&h.a * &h.a - int(4) * &h.b1 * &h.b2) * &h.b1 * &h.b2;
            if disc.is_zero() {
                continue;
            }
            if let Some(expected) = residue_oracle(&h, p, k) {
                assert_eq!(
                    local_solvable(&h, &Place::Prime(int(p as i64))),
                    expected,
                    "{h:?} at {p}"
                );
                compared += 1;
                if !expected {
                    seen_false += 1;
                }
            }
        }
        assert!(compared > 200, "only {compared} decided cases");
        assert!(seen_false > 20, "only {seen_false} insoluble cases");
    }

    #[test]
    fn search_examples() {
        // b1 = B: (M, e) = (0, 1)
        let h = HomSpace::new(int(47), int(0), &int(47));
        assert!(search_homspace(&h, 2).is_some());
        let h = HomSpace::new(int(-1), int(0), &int(1));
        assert!(search_homspace(&h, 200).is_none());
    }

    #[test]
    fn search_matches_brute_force() {
        for (b1, a, b) in [(47, 0, 47), (2, 0, 94), (-1, 0, -188), (-2, 0, -188), (3, 2, 21)] {
            let h = HomSpace::new(int(b1), int(a), &int(b));
            let found = search_homspace(&h, 100);
            let mut brute = None;
            'outer: for e in 0..=100i64 {
                for m in 0..=100i64 {
                    if m.gcd(&e) != 1 {
                        continue;
                    }
                    if let Some(n) = int_sqrt_exact(&h.eval(&int(m), &int(e))) {
                        brute = Some((int(m), int(e), n));
                        break 'outer;
                    }
                }
            }
            assert_eq!(found.is_some(), brute.is_some(), "{h:?}");
            if let Some((m, e, n)) = found {
                assert_eq!(&n * &n, h.eval(&m, &e));
            }
        }
    }

    #[test]
    fn rank_examples() {
        let r = rank_bounds(&int(0), &int(1), Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper, r.status), (0, 0, RankStatus::Exact));
        let r = rank_bounds(&int(0), &int(47), Budget::default()).unwrap();
        assert_eq!((r.lower, r.upper), (1, 1));
        let e = Curve::bx(parse_rat("47").unwrap()).unwrap();
        for w in &r.witnesses {
            assert!(e.on_curve(w));
            assert!(e.is_infinite_order(w).unwrap());
        }
    }

    #[test]
    fn twist_invariance() {
        for (b, t) in [(47i64, 2i64), (94, 3), (5, 2)] {
            let r1 = rank_bounds(&int(0), &int(b), Budget::default()).unwrap();
            let r2 = rank_bounds(&int(0), &(int(b) * int(t).pow(4)), Budget::default()).unwrap();
            assert_eq!((r1.lower, r1.upper), (r2.lower, r2.upper));
            let tw = Rat::from_integer(int(t));
            let img: Vec<Point> =
                r1.witnesses.iter().map(|p| quartic_twist(p, &tw).unwrap().with_nonneg_y()).collect();
            assert_eq!(img, r2.witnesses);
        }
    }

    #[test]
    fn positive_rank_witness_examples() {
        let w = positive_rank_witness(&int(0), &int(3), Budget::default()).unwrap().unwrap();
        assert_eq!(w, Point::new(parse_rat("1").unwrap(), parse_rat("2").unwrap()));
        assert!(positive_rank_witness(&int(0), &int(1), Budget::default()).unwrap().is_none());
    }
}
