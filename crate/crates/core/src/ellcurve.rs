//! Elliptic curves `y^2 = x^3 + A2 x^2 + A4 x + A6` over the rationals.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{fmt_rat, parse_rat, rat_pow, rat_sqrt, Int, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular curve {0}")]
    Singular(String),
    #[error("point {point} is not on {curve}")]
    OffCurve { point: String, curve: String },
    #[error("twist parameter must be nonzero")]
    ZeroTwist,
}

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Curve {
    pub a2: Rat,
    pub a4: Rat,
    pub a6: Rat,
}

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Point {
    Infinity,
    Affine(Rat, Rat),
}

impl Point {
    pub fn new(x: Rat, y: Rat) -> Self {
        Point::Affine(x, y)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&Rat> {
        match self {
            Point::Affine(x, _) => Some(x),
            Point::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&Rat> {
        match self {
            Point::Affine(_, y) => Some(y),
            Point::Infinity => None,
        }
    }

    /// Naive height `max(|num x|, den x)`; zero for the point at infinity.
    pub fn naive_height(&self) -> Int {
        match self {
            Point::Infinity => Int::zero(),
            Point::Affine(x, _) => x.numer().abs().max(x.denom().clone()),
        }
    }

    /// Same point with `y >= 0`.
    pub fn with_nonneg_y(&self) -> Point {
        match self {
            Point::Affine(x, y) if y.is_negative() => Point::Affine(x.clone(), -y),
            p => p.clone(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine(x, y) => write!(f, "({}, {})", fmt_rat(x), fmt_rat(y)),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Infinity => s.serialize_str("O"),
            Point::Affine(x, y) => [fmt_rat(x), fmt_rat(y)].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Inf(String),
            Pair([String; 2]),
        }
        match Raw::deserialize(d)? {
            Raw::Inf(s) if s == "O" => Ok(Point::Infinity),
            Raw::Inf(s) => Err(D::Error::custom(format!("bad point {s:?}"))),
            Raw::Pair([x, y]) => Ok(Point::Affine(
                parse_rat(&x).map_err(D::Error::custom)?,
                parse_rat(&y).map_err(D::Error::custom)?,
            )),
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3")?;
        for (c, m) in [(&self.a2, "x^2"), (&self.a4, "x"), (&self.a6, "")] {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            let a = fmt_rat(&c.abs());
            if m.is_empty() {
                write!(f, " {sign} {a}")?;
            } else if c.abs().is_one() {
                write!(f, " {sign} {m}")?;
            } else {
                write!(f, " {sign} {a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Curve", 3)?;
        st.serialize_field("a2", &fmt_rat(&self.a2))?;
        st.serialize_field("a4", &fmt_rat(&self.a4))?;
        st.serialize_field("a6", &fmt_rat(&self.a6))?;
        st.end()
    }
}

impl Curve {
    pub fn new(a2: Rat, a4: Rat, a6: Rat) -> Result<Self, CurveError> {
        let c = Curve { a2, a4, a6 };
        if c.discriminant().is_zero() {
            return Err(CurveError::Singular(c.to_string()));
        }
        Ok(c)
    }

    /// `y^2 = x^3 + B x`.
    pub fn bx(b: Rat) -> Result<Self, CurveError> {
        Curve::new(Rat::zero(), b, Rat::zero())
    }

    /// `y^2 = x^3 + k`.
    pub fn mordell(k: Rat) -> Result<Self, CurveError> {
        Curve::new(Rat::zero(), Rat::zero(), k)
    }

    /// Discriminant of the cubic `x^3 + A2 x^2 + A4 x + A6`.
    pub fn discriminant(&self) -> Rat {
        let (a, b, c) = (&self.a2, &self.a4, &self.a6);
        let k = |n: i64| Rat::from_integer(Int::from(n));
        a * a * b * b - k(4) * b * b * b - k(4) * a * a * a * c - k(27) * c * c
            + k(18) * a * b * c
    }

    pub fn rhs(&self, x: &Rat) -> Rat {
        ((x + &self.a2) * x + &self.a4) * x + &self.a6
    }

    pub fn on_curve(&self, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => y * y == self.rhs(x),
        }
    }

    pub fn check(&self, p: &Point) -> Result<(), CurveError> {
        if self.on_curve(p) {
            Ok(())
        } else {
            Err(CurveError::OffCurve { point: p.to_string(), curve: self.to_string() })
        }
    }

    pub fn neg(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.clone(), -y),
        }
    }

    /// Chord and tangent addition; inputs are assumed to be on the curve.
    pub fn add_unchecked(&self, p: &Point, r: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p, r) {
            (Point::Infinity, _) => return r.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return Point::Infinity;
            }
            let three = Rat::from_integer(Int::from(3));
            let two = Rat::from_integer(Int::from(2));
            (three * x1 * x1 + &two * &self.a2 * x1 + &self.a4) / (two * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - &self.a2 - x1 - x2;
        let y3 = lambda * (x1 - &x3) - y1;
        Point::Affine(x3, y3)
    }

    pub fn add(&self, p: &Point, r: &Point) -> Result<Point, CurveError> {
        self.check(p)?;
        self.check(r)?;
        Ok(self.add_unchecked(p, r))
    }

    pub fn double(&self, p: &Point) -> Point {
        self.add_unchecked(p, p)
    }

    /// `n * P` by double-and-add; negative `n` negates.
    pub fn mul_scalar(&self, p: &Point, n: i64) -> Result<Point, CurveError> {
        self.check(p)?;
        let mut acc = Point::Infinity;
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        Ok(acc)
    }

    /// Infinite order test using Mazur's bound: a rational torsion point has
    /// order at most 12. With `kP` known for `k <= 6`, `nP = O` for `n <= 12`
    /// is decided by comparing `mP` with `-mP` or `-(m+1)P`.
    pub fn is_infinite_order(&self, p: &Point) -> Result<bool, CurveError> {
        self.check(p)?;
        if p.is_infinity() {
            return Ok(false);
        }
        let mut mult = vec![Point::Infinity, p.clone()];
        for k in 2..=6 {
            let next = self.add_unchecked(&mult[k - 1], p);
            if next.is_infinity() {
                return Ok(false);
            }
            mult.push(next);
        }
        for n in 2..=12usize {
            let m = n / 2;
            let hit = if n % 2 == 0 {
                mult[m] == self.neg(&mult[m])
            } else {
                mult[m + 1] == self.neg(&mult[m])
            };
            if hit {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Image curve of the substitution `(x, y) -> (t^2 x, t^3 y)`.
    pub fn twist_by(&self, t: &Rat) -> Result<Curve, CurveError> {
        if t.is_zero() {
            return Err(CurveError::ZeroTwist);
        }
        Curve::new(
            &self.a2 * rat_pow(t, 2),
            &self.a4 * rat_pow(t, 4),
            &self.a6 * rat_pow(t, 6),
        )
    }

    /// Translates `x` to remove the `x^2` term: returns the depressed curve
    /// and the shift `s` such that `x_new = x + s`.
    pub fn depressed(&self) -> (Curve, Rat) {
        let three = Rat::from_integer(Int::from(3));
        let s = &self.a2 / &three;
        // x = X - s
        let a4 = &self.a4 - &self.a2 * &self.a2 / &three;
        let two = Rat::from_integer(Int::from(2));
        let a6 = two * num_traits::pow(self.a2.clone(), 3) / Rat::from_integer(Int::from(27))
            - &self.a2 * &self.a4 / &three
            + &self.a6;
        (Curve { a2: Rat::zero(), a4, a6 }, s)
    }

    /// Finds a rational isomorphism `(x, y) -> (u^2 x + r, u^3 y)` carrying
    /// `self` onto `other`, if one exists.
    pub fn isomorphism_to(&self, other: &Curve) -> Option<CurveIso> {
        let (d1, s1) = self.depressed();
        let (d2, s2) = other.depressed();
        // need d2.a4 = u^4 d1.a4 and d2.a6 = u^6 d1.a6
        let u2 = match (d1.a4.is_zero(), d1.a6.is_zero()) {
            (false, false) => {
                if d2.a4.is_zero() || d2.a6.is_zero() {
                    return None;
                }
                (&d2.a6 / &d1.a6) / (&d2.a4 / &d1.a4)
            }
            (true, false) => {
                if !d2.a4.is_zero() {
                    return None;
                }
                cube_root_rat(&(&d2.a6 / &d1.a6))?
            }
            (false, true) => {
                if !d2.a6.is_zero() {
                    return None;
                }
                rat_sqrt(&(&d2.a4 / &d1.a4))?
            }
            (true, true) => return None,
        };
        let u = rat_sqrt(&u2)?;
        if rat_pow(&u, 4) * &d1.a4 != d2.a4 || rat_pow(&u, 6) * &d1.a6 != d2.a6 {
            return None;
        }
        // X2 = u^2 (x + s1) - s2
        let r = &u2 * &s1 - &s2;
        Some(CurveIso { u, r })
    }
}

fn cube_root_rat(q: &Rat) -> Option<Rat> {
    let n = crate::exactnum::int_root_exact(q.numer(), 3)?;
    let d = crate::exactnum::int_root_exact(q.denom(), 3)?;
    Some(Rat::new(n, d))
}

/// `(x, y) -> (u^2 x + r, u^3 y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveIso {
    pub u: Rat,
    pub r: Rat,
}

impl CurveIso {
    pub fn apply(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                Point::Affine(&self.u * &self.u * x + &self.r, rat_pow(&self.u, 3) * y)
            }
        }
    }

    pub fn invert(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                Point::Affine((x - &self.r) / (&self.u * &self.u), y / rat_pow(&self.u, 3))
            }
        }
    }
}

/// `(x, y) -> (t^2 x, t^3 y)`, carrying `y^2 = x^3 + a x` to `y^2 = x^3 + a t^4 x`.
pub fn quartic_twist(p: &Point, t: &Rat) -> Result<Point, CurveError> {
    if t.is_zero() {
        return Err(CurveError::ZeroTwist);
    }
    Ok(match p {
        Point::Infinity => Point::Infinity,
        Point::Affine(x, y) => Point::Affine(x * rat_pow(t, 2), y * rat_pow(t, 3)),
    })
}

/// Weights and degree of a weighted homogeneous function:
/// `f(l^w1 x, l^w2 y) = l^d f(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedSig {
    pub w1: i64,
    pub w2: i64,
    pub d: i64,
}

/// `(x Q^{w1 j}, y Q^{w2 j})`; the value of `f` gets multiplied by `Q^{d j}`.
pub fn weighted_lift(sig: WeightedSig, witness: (&Rat, &Rat), q: &Rat, j: i64) -> (Rat, Rat) {
    (
        witness.0 * rat_pow(q, sig.w1 * j),
        witness.1 * rat_pow(q, sig.w2 * j),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_rat, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }
    fn pt(x: &str, y: &str) -> Point {
        Point::new(r(x), r(y))
    }
    fn bx(b: i64) -> Curve {
        Curve::bx(rat(b, 1)).unwrap()
    }

    #[test]
    fn on_curve_examples() {
        let e = bx(47);
        assert!(e.on_curve(&pt("289/25", "5712/125")));
        assert!(e.on_curve(&pt("289/25", "-5712/125")));
        assert!(bx(94).on_curve(&pt("2", "14")));
        let m = Curve::mordell(rat(3, 1)).unwrap();
        assert!(!m.on_curve(&pt("-2", "5")));
        assert!(Curve::mordell(rat(33, 1)).unwrap().on_curve(&pt("-2", "5")));
    }

    #[test]
    fn singular_rejected() {
        assert!(Curve::bx(rat(0, 1)).is_err());
        assert!(Curve::new(rat(0, 1), rat(-3, 1), rat(2, 1)).is_err());
    }

    #[test]
    fn group_law_examples() {
        let e = bx(47);
        let p = pt("289/25", "5712/125");
        assert_eq!(e.add(&p, &Point::Infinity).unwrap(), p);
        assert_eq!(e.add(&pt("0", "0"), &pt("0", "0")).unwrap(), Point::Infinity);
        let m = Curve::mordell(rat(3, 1)).unwrap();
        assert_eq!(m.mul_scalar(&pt("1", "2"), 2).unwrap(), pt("-23/16", "-11/64"));
        assert!(e.add(&pt("1", "1"), &p).is_err());
    }

    #[test]
    fn infinite_order_examples() {
        assert!(!bx(47).is_infinite_order(&pt("0", "0")).unwrap());
        let m = Curve::mordell(rat(3, 1)).unwrap();
        assert!(m.is_infinite_order(&pt("1", "2")).unwrap());
        assert!(bx(94).is_infinite_order(&pt("2", "14")).unwrap());
        // (2, 3) has order 6 on y^2 = x^3 + 1; (2, 4) order 4 on y^2 = x^3 + 4x
        assert!(!Curve::mordell(rat(1, 1)).unwrap().is_infinite_order(&pt("2", "3")).unwrap());
        assert!(!bx(4).is_infinite_order(&pt("2", "4")).unwrap());
    }

    #[test]
    fn twist_examples() {
        let p = pt("1", "2");
        assert_eq!(quartic_twist(&p, &rat(1, 1)).unwrap(), p);
        let q = quartic_twist(&p, &rat(2, 1)).unwrap();
        assert_eq!(q, pt("4", "16"));
        assert!(bx(48).on_curve(&q));
        assert_eq!(quartic_twist(&q, &rat(1, 2)).unwrap(), p);
        assert!(quartic_twist(&p, &rat(0, 1)).is_err());
    }

    #[test]
    fn weighted_lift_examples() {
        let sig = WeightedSig { w1: 2, w2: 3, d: 4 };
        let q = rat(17, 1);
        let (x, y) = weighted_lift(sig, (&rat(1, 1), &rat(2, 1)), &q, 1);
        assert_eq!((x.clone(), y.clone()), (rat(289, 1), rat(9826, 1)));
        let f = (&y * &y - &x * &x * &x) / &x;
        assert_eq!(f, rat(3, 1) * rat_pow(&q, 4));
        let (x0, y0) = weighted_lift(sig, (&rat(1, 1), &rat(2, 1)), &q, 0);
        assert_eq!((x0, y0), (rat(1, 1), rat(2, 1)));
        let hom = WeightedSig { w1: 1, w2: 1, d: 1 };
        assert_eq!(
            weighted_lift(hom, (&rat(3, 1), &rat(5, 1)), &q, 2),
            (rat(3 * 289, 1), rat(5 * 289, 1))
        );
    }

    fn random_points(e: &Curve, base: &[Point], rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| {
                let mut acc = Point::Infinity;
                for b in base {
                    let k: i64 = rng.gen_range(-3..=3);
                    acc = e.add_unchecked(&acc, &e.mul_scalar(b, k).unwrap());
                }
                acc
            })
            .collect()
    }

    #[test]
    fn associativity_on_random_triples() {
        let e = bx(47);
        let gens = [pt("289/25", "5712/125"), pt("0", "0")];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = random_points(&e, &gens, &mut rng, 3);
            let lhs = e.add_unchecked(&e.add_unchecked(&v[0], &v[1]), &v[2]);
            let rhs = e.add_unchecked(&v[0], &e.add_unchecked(&v[1], &v[2]));
            assert_eq!(lhs, rhs);
            assert!(e.on_curve(&lhs));
            assert_eq!(e.add_unchecked(&v[0], &e.neg(&v[0])), Point::Infinity);
        }
    }

    #[test]
    fn twist_is_homomorphism() {
        let e = bx(94);
        let t = rat(3, 2);
        let et = e.twist_by(&t).unwrap();
        let gens = [pt("2", "14"), pt("1504/81", "65800/729")];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = random_points(&e, &gens, &mut rng, 2);
            let sum = e.add_unchecked(&v[0], &v[1]);
            let a = quartic_twist(&sum, &t).unwrap();
            let b = et.add_unchecked(
                &quartic_twist(&v[0], &t).unwrap(),
                &quartic_twist(&v[1], &t).unwrap(),
            );
            assert_eq!(a, b);
            assert!(et.on_curve(&a));
        }
    }

    #[test]
    fn isomorphism_detection() {
        let e = Curve::new(rat(3, 1), rat(-2, 1), rat(5, 1)).unwrap();
        let (dep, s) = e.twist_by(&rat(2, 1)).unwrap().depressed();
        let iso = e.isomorphism_to(&dep).unwrap();
        assert_eq!(iso.u.abs(), rat(2, 1));
        assert_eq!(iso.r, s);
        let p = pt("-1", "3");
        assert!(e.on_curve(&p));
        let probe = e.double(&p);
        assert!(dep.on_curve(&iso.apply(&probe)));
        assert_eq!(iso.invert(&iso.apply(&probe)), probe);
        assert!(bx(47).isomorphism_to(&bx(94)).is_none());
        let t = bx(47).isomorphism_to(&bx(47 * 16)).unwrap();
        assert_eq!(t.u.abs(), rat(2, 1));
        let q = pt("289/25", "5712/125");
        assert!(bx(47 * 16).on_curve(&t.apply(&q)));
    }
}
