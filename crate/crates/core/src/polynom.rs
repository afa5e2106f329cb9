//! Dense univariate polynomials over the rationals, resultants and
//! discriminants, and randomized exact identity testing.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactnum::{fmt_rat, Int, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("degree {0} is too small (need at least 2)")]
    DegreeTooSmall(usize),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("too many poles: {resamples} resamples for {trials} trials")]
    TooManyPoles { trials: usize, resamples: usize },
    #[error("sample set of size {support} does not exceed degree bound {bound}")]
    SupportTooSmall { support: u64, bound: u64 },
}

/// Polynomial with coefficients lowest degree first; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Rat::from_integer(Int::from(c))).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Poly::new(vec![Rat::zero(), Rat::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(Int::from(i)))
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(Rat::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Composition `self(other(x))`.
    pub fn compose(&self, other: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * other) + &Poly::constant(c.clone());
        }
        acc
    }

    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly), PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let lc = d.leading();
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Rat::zero(); n - dd];
        for i in (0..n - dd).rev() {
            let c = &rem[i + dd] / &lc;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b nonzero");
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lc = a.leading();
        a.scale(&lc.recip())
    }

    /// Resultant via the Euclidean remainder sequence over the field of rationals.
    pub fn resultant(&self, other: &Poly) -> Rat {
        let (Some(mut m), Some(mut n)) = (self.degree(), other.degree()) else {
            return Rat::zero();
        };
        let mut f = self.clone();
        let mut g = other.clone();
        let mut acc = Rat::one();
        loop {
            if n == 0 {
                return acc * num_traits::pow(g.leading(), m);
            }
            let (_, r) = f.div_rem(&g).expect("g nonzero");
            let Some(k) = r.degree() else {
                return Rat::zero();
            };
            // res(f, g) = (-1)^{mn} lc(g)^{m-k} res(g, r)
            if (m * n) % 2 == 1 {
                acc = -acc;
            }
            acc *= num_traits::pow(g.leading(), m - k);
            f = g;
            g = r;
            m = n;
            n = k;
        }
    }

    /// `Disc(p) = (-1)^{d(d-1)/2} Res(p, p') / lc(p)`.
    pub fn discriminant(&self) -> Result<Rat, PolyError> {
        let d = self.degree().unwrap_or(0);
        if d < 2 {
            return Err(PolyError::DegreeTooSmall(d));
        }
        let res = self.resultant(&self.derivative());
        let sign = if (d * (d - 1) / 2) % 2 == 1 { -Rat::one() } else { Rat::one() };
        Ok(sign * res / self.leading())
    }
}

/// Discriminant in the variable of a polynomial of degree at least 2.
pub fn discriminant_u(p: &Poly) -> Result<Rat, PolyError> {
    p.discriminant()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{}", fmt_rat(&a))?,
                1 if a.is_one() => write!(f, "x")?,
                1 => write!(f, "{}*x", fmt_rat(&a))?,
                _ if a.is_one() => write!(f, "x^{i}")?,
                _ => write!(f, "{}*x^{i}", fmt_rat(&a))?,
            }
        }
        Ok(())
    }
}

/// Univariate rational function kept in lowest terms with a monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc1 {
    num: Poly,
    den: Poly,
}

impl RatFunc1 {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let g = num.gcd(&den);
        let (mut num, _) = num.div_rem(&g)?;
        let (mut den, _) = den.div_rem(&g)?;
        let lc = den.leading().recip();
        num = num.scale(&lc);
        den = den.scale(&lc);
        Ok(RatFunc1 { num, den })
    }

    pub fn poly(p: Poly) -> Self {
        RatFunc1 { num: p, den: Poly::constant(Rat::one()) }
    }

    pub fn constant(c: Rat) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `None` at a pole.
    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn mul(&self, other: &RatFunc1) -> RatFunc1 {
        RatFunc1::new(&self.num * &other.num, &self.den * &other.den).expect("nonzero den")
    }

    pub fn sub(&self, other: &RatFunc1) -> RatFunc1 {
        RatFunc1::new(
            &(&self.num * &other.den) - &(&other.num * &self.den),
            &self.den * &other.den,
        )
        .expect("nonzero den")
    }
}

/// Upper end of the numerator/denominator range used by the random sampler.
pub const SAMPLE_RANGE: u64 = 10_000;

/// Random rational: numerator and denominator uniform in `[1, 10^4]`, uniform sign.
pub fn sample_rat<R: Rng>(rng: &mut R) -> Rat {
    let n: i64 = rng.gen_range(1..=SAMPLE_RANGE as i64);
    let d: i64 = rng.gen_range(1..=SAMPLE_RANGE as i64);
    let s = if rng.gen::<bool>() { 1 } else { -1 };
    Rat::new(Int::from(s * n), Int::from(d))
}

/// Black-box evaluator: `None` signals a pole.
pub type Evaluator<'a> = dyn Fn(&[Rat]) -> Option<Rat> + Sync + 'a;

/// Exact randomized identity test. Both sides are evaluated at `trials`
/// random rational points in `nvars` variables; poles are resampled, and
/// more than `10 * trials` resamples is an error.
pub fn identity_check(
    lhs: &Evaluator<'_>,
    rhs: &Evaluator<'_>,
    nvars: usize,
    trials: usize,
    degree_bound: u64,
    seed: u64,
) -> Result<bool, PolyError> {
    if SAMPLE_RANGE <= degree_bound {
        return Err(PolyError::SupportTooSmall { support: SAMPLE_RANGE, bound: degree_bound });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    log::debug!("identity_check seed={seed} nvars={nvars} trials={trials}");
    let mut done = 0;
    let mut resamples = 0;
    while done < trials {
        let point: Vec<Rat> = (0..nvars).map(|_| sample_rat(&mut rng)).collect();
        match (lhs(&point), rhs(&point)) {
            (Some(l), Some(r)) => {
                if l != r {
                    return Ok(false);
                }
                done += 1;
            }
            _ => {
                resamples += 1;
                if resamples > 10 * trials {
                    return Err(PolyError::TooManyPoles { trials, resamples });
                }
            }
        }
    }
    Ok(true)
}
