//! Exact integers and rationals, factorization, valuations and the
//! solution-level classifier for weighted homogeneous functions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary precision integer.
pub type Int = BigInt;
/// Reduced rational with positive denominator.
pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("zero is not allowed here")]
    Zero,
    #[error("{0} is not prime")]
    NotPrime(Int),
    #[error("value {0} is excluded (must not be -1, 0 or 1)")]
    ExcludedQuotient(Rat),
    #[error("degree must be at least 2, got {0}")]
    BadDegree(u32),
    #[error("{0} is not fourth-power-free")]
    NotFourthPowerFree(Int),
    #[error("{0} must be positive")]
    NotPositive(Int),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parses `"n"`, `"n/d"` (optionally signed) into a reduced rational.
pub fn parse_rat(s: &str) -> Result<Rat, NumError> {
    let s = s.trim();
    let err = || NumError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = Int::from_str(n.trim()).map_err(|_| err())?;
            let d = Int::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rat::new(n, d))
        }
        None => Int::from_str(s).map(Rat::from_integer).map_err(|_| err()),
    }
}

pub fn parse_int(s: &str) -> Result<Int, NumError> {
    Int::from_str(s.trim()).map_err(|_| NumError::Parse(s.to_string()))
}

/// `"n"` for integers, `"n/d"` otherwise.
pub fn fmt_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Integer power of a rational; negative exponents invert.
pub fn rat_pow(q: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

/// Exact square root of a non-negative rational, if it is a square.
pub fn rat_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = int_sqrt_exact(q.numer())?;
    let d = int_sqrt_exact(q.denom())?;
    Some(Rat::new(n, d))
}

pub fn int_sqrt_exact(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact `e`-th root of an integer (sign allowed for odd `e`).
pub fn int_root_exact(n: &Int, e: u32) -> Option<Int> {
    if e == 0 {
        return None;
    }
    if n.is_negative() && e.is_multiple_of(2) {
        return None;
    }
    let r = n.nth_root(e);
    if num_traits::pow(r.clone(), e as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Whether `q` is the `e`-th power of a rational number.
pub fn is_rat_power(q: &Rat, e: u32) -> bool {
    int_root_exact(q.numer(), e).is_some() && int_root_exact(q.denom(), e).is_some()
}

/// Prime factorization of a nonzero integer: `unit * prod p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit: i8,
    pub factors: Vec<(Int, u32)>,
}

impl Factorization {
    pub fn product(&self) -> Int {
        let mut acc = Int::from(self.unit);
        for (p, k) in &self.factors {
            acc *= num_traits::pow(p.clone(), *k as usize);
        }
        acc
    }

    pub fn primes(&self) -> impl Iterator<Item = &Int> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &Int) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, k)| *k)
            .unwrap_or(0)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit < 0 {
            write!(f, "-")?;
        }
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, k)| if *k == 1 { p.to_string() } else { format!("{p}^{k}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn small_primes_upto(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Primes below one million, computed once.
pub fn trial_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| small_primes_upto(TRIAL_LIMIT))
}

/// Primes strictly below `n` (small helper for sieves).
pub fn primes_below(n: u64) -> Vec<u64> {
    if n <= 2 {
        return Vec::new();
    }
    small_primes_upto(n - 1)
}

fn mod_pow(base: &Int, exp: &Int, m: &Int) -> Int {
    base.modpow(exp, m)
}

/// Miller-Rabin with the first 20 prime bases. Deterministic below 3.3e24.
pub fn is_probable_prime(n: &Int) -> bool {
    let two = Int::from(2);
    if *n < two {
        return false;
    }
    for &p in &trial_primes()[..20] {
        let p = Int::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'outer: for &a in &trial_primes()[..20] {
        let a = Int::from(a);
        let mut x = mod_pow(&a, &d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; returns a nontrivial factor of composite `n`.
fn pollard_rho(n: &Int) -> Int {
    if n.is_even() {
        return Int::from(2);
    }
    let mut c = Int::one();
    loop {
        let f = |x: &Int| (x * x + &c) % n;
        let mut y = Int::from(2);
        let mut r: u64 = 1;
        let mut q = Int::one();
        let mut g = Int::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 128u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
        c += 1u32;
    }
}

fn split_into(n: Int, out: &mut Vec<Int>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    if let Some(r) = int_sqrt_exact(&n) {
        split_into(r.clone(), out);
        split_into(r, out);
        return;
    }
    let d = pollard_rho(&n);
    let e = &n / &d;
    split_into(d, out);
    split_into(e, out);
}

/// Factors a nonzero integer by trial division up to 10^6 followed by Pollard rho.
pub fn factor(n: &Int) -> Result<Factorization, NumError> {
    if n.is_zero() {
        return Err(NumError::Zero);
    }
    let unit: i8 = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut factors: Vec<(Int, u32)> = Vec::new();

    if let Some(mut small) = m.to_u64() {
        for &p in trial_primes() {
            if p * p > small {
                break;
            }
            if small % p == 0 {
                let mut k = 0;
                while small % p == 0 {
                    small /= p;
                    k += 1;
                }
                factors.push((Int::from(p), k));
            }
        }
        m = Int::from(small);
        if small > 1 && small <= TRIAL_LIMIT * TRIAL_LIMIT {
            factors.push((m, 1));
            return Ok(Factorization { unit, factors });
        }
    } else {
        for &p in trial_primes() {
            let pb = Int::from(p);
            if &pb * &pb > m {
                break;
            }
            if (&m % &pb).is_zero() {
                let mut k = 0;
                while (&m % &pb).is_zero() {
                    m /= &pb;
                    k += 1;
                }
                factors.push((pb, k));
            }
        }
    }

    if !m.is_one() {
        let bound = Int::from(TRIAL_LIMIT);
        if &bound * &bound > m {
            // no factor below 10^6 and m < 10^12: m is prime
            factors.push((m, 1));
        } else {
            let mut big = Vec::new();
            split_into(m, &mut big);
            big.sort();
            for p in big {
                match factors.last_mut() {
                    Some((q, k)) if *q == p => *k += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Factorization { unit, factors })
}

/// p-adic valuation of a nonzero rational.
pub fn padic_valuation(q: &Rat, p: &Int) -> Result<i64, NumError> {
    if q.is_zero() {
        return Err(NumError::Zero);
    }
    if !is_probable_prime(p) {
        return Err(NumError::NotPrime(p.clone()));
    }
    Ok(int_valuation(q.numer(), p) as i64 - int_valuation(q.denom(), p) as i64)
}

/// Valuation of a nonzero integer at `p` (no primality check).
pub fn int_valuation(n: &Int, p: &Int) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Type of a solution `(a, Q)` for a weighted homogeneous function of degree `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionLevel {
    /// `Q` is a `d`-th power.
    Trivial,
    /// Non-trivial of level `e` with `1 < e < d`, `e | d`.
    Level(u32),
    /// Non-trivial of level 1.
    Proper,
    /// No level in the definition applies (e.g. `Q = 8` with `d = 4`).
    Unleveled,
}

/// Classifies `Q` for degree `d`, returning the largest valid level.
pub fn classify_solution_level(q: &Rat, d: u32) -> Result<SolutionLevel, NumError> {
    if d < 2 {
        return Err(NumError::BadDegree(d));
    }
    if q.is_zero() || q.abs().is_one() {
        return Err(NumError::ExcludedQuotient(q.clone()));
    }
    if is_rat_power(q, d) {
        return Ok(SolutionLevel::Trivial);
    }
    let mut vals: Vec<i64> = Vec::new();
    for part in [q.numer(), q.denom()] {
        if part.abs().is_one() {
            continue;
        }
        let fac = factor(part).expect("nonzero");
        vals.extend(fac.factors.iter().map(|(_, k)| *k as i64));
    }
    for e in (1..d).rev() {
        if !d.is_multiple_of(e) || !is_rat_power(q, e) {
            continue;
        }
        if vals.contains(&(e as i64)) {
            return Ok(if e == 1 {
                SolutionLevel::Proper
            } else {
                SolutionLevel::Level(e)
            });
        }
    }
    Ok(SolutionLevel::Unleveled)
}

/// Writes `a = b * t^4` with `b` fourth-power-free and `t > 0`.
pub fn fourth_power_free_part(a: &Int) -> Result<(Int, Int), NumError> {
    let fac = factor(a)?;
    let mut b = Int::from(fac.unit);
    let mut t = Int::one();
    for (p, k) in &fac.factors {
        b *= num_traits::pow(p.clone(), (k % 4) as usize);
        t *= num_traits::pow(p.clone(), (k / 4) as usize);
    }
    Ok((b, t))
}

/// Writes a positive fourth-power-free `a` as `q1 * q2^2 * q3^3` with the
/// `qi` squarefree and pairwise coprime.
pub fn decompose_124(a: &Int) -> Result<(Int, Int, Int), NumError> {
    if !a.is_positive() {
        return Err(NumError::NotPositive(a.clone()));
    }
    let fac = factor(a)?;
    let (mut q1, mut q2, mut q3) = (Int::one(), Int::one(), Int::one());
    for (p, k) in &fac.factors {
        match k {
            1 => q1 *= p,
            2 => q2 *= p,
            3 => q3 *= p,
            _ => return Err(NumError::NotFourthPowerFree(a.clone())),
        }
    }
    Ok((q1, q2, q3))
}

/// `(p/q, u/v) -> (p q^3, u v^3)`: integral pair with the same membership.
pub fn canonicalize_pair(a: &Rat, q: &Rat) -> Result<(Int, Int), NumError> {
    if a.is_zero() || q.is_zero() {
        return Err(NumError::Zero);
    }
    let a2 = a.numer() * num_traits::pow(a.denom().clone(), 3);
    let q2 = q.numer() * num_traits::pow(q.denom().clone(), 3);
    Ok((a2, q2))
}

/// Squarefree part of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: &Int) -> Result<Int, NumError> {
    let fac = factor(n)?;
    let mut s = Int::from(fac.unit);
    for (p, k) in &fac.factors {
        if k % 2 == 1 {
            s *= p;
        }
    }
    Ok(s)
}
