//! Explicit witnesses `(x_i, y_i)` with `f(x_i, y_i) = a Q^i`.
//!
//! Every constructor returns a [`WitnessSet`], which replays `f` on all of
//! its witnesses before it is handed out.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::ellcurve::Curve;
use crate::exactnum::{decompose_124, fmt_rat, int_root_exact, rat_int, rat_pow, Int, NumError, Rat};
use crate::polynom::RatFunc1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgressionError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("denominator vanishes at y = {0}")]
    DenominatorZero(String),
    #[error("witness {i} gives {got}, expected {expected}")]
    Invalid { i: i64, expected: String, got: String },
    #[error(transparent)]
    Num(#[from] NumError),
}

type Result<T> = std::result::Result<T, ProgressionError>;

/// Binary form `sum c_k x^(n-k) y^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub coeffs: Vec<Rat>,
}

impl Form {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        Form { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        let n = self.degree() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| c * rat_pow(x, n - k as i64) * rat_pow(y, k as i64))
            .fold(Rat::zero(), |acc, t| acc + t)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coeffs.iter().map(fmt_rat).collect();
        write!(f, "form[{}]", cs.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BihomoVariant {
    /// `(y^2 - x^d)/x`
    Ratio,
    /// `y^2 - x^d`
    Difference,
}

/// The function `f` a witness set refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FDesc {
    /// `A x + B`, ignoring `y`.
    Linear { a: Rat, b: Rat },
    /// `(x g1(y) + g2(y)) / (x h1(y) + h2(y))`.
    Mobius { g1: RatFunc1, g2: RatFunc1, h1: RatFunc1, h2: RatFunc1 },
    /// `u x^2 + v x y + w y^2`.
    Quadratic { u: Rat, v: Rat, w: Rat },
    /// `num(x, y) / den(x, y)` for binary forms.
    FormRatio { num: Form, den: Form },
    Bihomo { d: u32, variant: BihomoVariant },
    /// `x^3 + y^3`.
    CubeSum,
}

impl FDesc {
    pub fn eval(&self, x: &Rat, y: &Rat) -> Option<Rat> {
        match self {
            FDesc::Linear { a, b } => Some(a * x + b),
            FDesc::Mobius { g1, g2, h1, h2 } => {
                let num = x * g1.eval(y)? + g2.eval(y)?;
                let den = x * h1.eval(y)? + h2.eval(y)?;
                (!den.is_zero()).then(|| num / den)
            }
            FDesc::Quadratic { u, v, w } => Some(u * x * x + v * x * y + w * y * y),
            FDesc::FormRatio { num, den } => {
                let d = den.eval(x, y);
                (!d.is_zero()).then(|| num.eval(x, y) / d)
            }
            FDesc::Bihomo { d, variant } => {
                let diff = y * y - rat_pow(x, *d as i64);
                match variant {
                    BihomoVariant::Difference => Some(diff),
                    BihomoVariant::Ratio => (!x.is_zero()).then(|| diff / x),
                }
            }
            FDesc::CubeSum => Some(x * x * x + y * y * y),
        }
    }
}

impl fmt::Display for FDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FDesc::Linear { a, b } => write!(f, "{}*x + {}", fmt_rat(a), fmt_rat(b)),
            FDesc::Mobius { g1, g2, h1, h2 } => write!(
                f,
                "(x*({}) + ({})) / (x*({}) + ({}))",
                RatFuncDisplay(g1),
                RatFuncDisplay(g2),
                RatFuncDisplay(h1),
                RatFuncDisplay(h2)
            ),
            FDesc::Quadratic { u, v, w } => {
                write!(f, "{}*x^2 + {}*x*y + {}*y^2", fmt_rat(u), fmt_rat(v), fmt_rat(w))
            }
            FDesc::FormRatio { num, den } => write!(f, "{num} / {den}"),
            FDesc::Bihomo { d, variant: BihomoVariant::Ratio } => write!(f, "(y^2 - x^{d})/x"),
            FDesc::Bihomo { d, variant: BihomoVariant::Difference } => write!(f, "y^2 - x^{d}"),
            FDesc::CubeSum => write!(f, "x^3 + y^3"),
        }
    }
}

/// Shows a function of `y` in the variable `y`.
struct RatFuncDisplay<'a>(&'a RatFunc1);

impl fmt::Display for RatFuncDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.0.num().to_string().replace('x', "y");
        if self.0.den().degree() == Some(0) {
            write!(f, "{num}")
        } else {
            write!(f, "({num})/({})", self.0.den().to_string().replace('x', "y"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub i: i64,
    pub x: Rat,
    pub y: Rat,
}

/// Witnesses for `G(a, Q) ⊂ V_f` at the listed indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessSet {
    pub f: FDesc,
    pub a: Rat,
    pub q: Rat,
    pub witnesses: Vec<Witness>,
}

impl WitnessSet {
    /// Builds the set and replays `f` on every witness.
    pub fn new(f: FDesc, a: Rat, q: Rat, witnesses: Vec<Witness>) -> Result<Self> {
        let ws = WitnessSet { f, a, q, witnesses };
        ws.validate()?;
        Ok(ws)
    }

    pub fn target(&self, i: i64) -> Rat {
        &self.a * rat_pow(&self.q, i)
    }

    pub fn validate(&self) -> Result<()> {
        for w in &self.witnesses {
            let expected = self.target(w.i);
            let got = self.f.eval(&w.x, &w.y);
            if got.as_ref() != Some(&expected) {
                return Err(ProgressionError::Invalid {
                    i: w.i,
                    expected: fmt_rat(&expected),
                    got: got.map_or_else(|| "undefined".into(), |g| fmt_rat(&g)),
                });
            }
        }
        Ok(())
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Witness", 3)?;
        st.serialize_field("i", &self.i)?;
        st.serialize_field("x", &fmt_rat(&self.x))?;
        st.serialize_field("y", &fmt_rat(&self.y))?;
        st.end()
    }
}

impl Serialize for WitnessSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("WitnessSet", 4)?;
        st.serialize_field("f", &self.f.to_string())?;
        st.serialize_field("a", &fmt_rat(&self.a))?;
        st.serialize_field("q", &fmt_rat(&self.q))?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.end()
    }
}

fn check_quotient(q: &Rat) -> Result<()> {
    if q.is_zero() || q.abs().is_one() {
        return Err(NumError::ExcludedQuotient(q.clone()).into());
    }
    Ok(())
}

/// `v_0 = t`, `v_n = (AT+1) v_(n-1) + BT`, so `f(v_n) = f(t) (AT+1)^n` for `f = Ax + B`.
pub fn linear_progression(a: &Rat, b: &Rat, t: &Rat, big_t: &Rat, n: u32) -> Result<WitnessSet> {
    if a.is_zero() {
        return Err(ProgressionError::Degenerate("A = 0".into()));
    }
    let q = a * big_t + Rat::one();
    check_quotient(&q)?;
    let f = FDesc::Linear { a: a.clone(), b: b.clone() };
    let mut v = t.clone();
    let mut ws = Vec::new();
    for i in 0..=n as i64 {
        ws.push(Witness { i, x: v.clone(), y: Rat::zero() });
        v = &q * &v + b * big_t;
    }
    WitnessSet::new(f, a * t + b, q, ws)
}

/// `y = 0, 1, -1, 2, -2, ...`
fn y_scan() -> impl Iterator<Item = Rat> {
    (0i64..).flat_map(|k| if k == 0 { vec![0] } else { vec![k, -k] }).map(|k| Rat::from_integer(Int::from(k)))
}

const Y_SCAN_LIMIT: usize = 1000;

/// `x` with `f(x, y) = aQ^i` for `f = (x g1 + g2)/(x h1 + h2)`; scans `y` if not given.
#[allow(clippy::too_many_arguments)]
pub fn class1_witness(
    g1: &RatFunc1,
    g2: &RatFunc1,
    h1: &RatFunc1,
    h2: &RatFunc1,
    a: &Rat,
    q: &Rat,
    i: i64,
    y: Option<&Rat>,
) -> Result<(Rat, Rat)> {
    if g1.mul(h2).sub(&h1.mul(g2)).is_zero() {
        return Err(ProgressionError::Degenerate("g1 h2 = h1 g2".into()));
    }
    let target = a * rat_pow(q, i);
    let solve = |y: &Rat| -> Option<Rat> {
        let (vg1, vg2, vh1, vh2) = (g1.eval(y)?, g2.eval(y)?, h1.eval(y)?, h2.eval(y)?);
        let den = &target * &vh1 - &vg1;
        if den.is_zero() || (&vg1 * &vh2 - &vh1 * &vg2).is_zero() {
            return None;
        }
        Some((vg2 - &target * vh2) / den)
    };
    match y {
        Some(y) => solve(y).map(|x| (x, y.clone())).ok_or_else(|| ProgressionError::DenominatorZero(fmt_rat(y))),
        None => y_scan()
            .take(Y_SCAN_LIMIT)
            .find_map(|y| solve(&y).map(|x| (x, y)))
            .ok_or_else(|| ProgressionError::DenominatorZero("every scanned y".into())),
    }
}

/// Class 1 witnesses for `i = 0..=n`.
#[allow(clippy::too_many_arguments)]
pub fn class1_progression(
    g1: &RatFunc1,
    g2: &RatFunc1,
    h1: &RatFunc1,
    h2: &RatFunc1,
    a: &Rat,
    q: &Rat,
    n: u32,
) -> Result<WitnessSet> {
    let mut ws = Vec::new();
    for i in 0..=n as i64 {
        let (x, y) = class1_witness(g1, g2, h1, h2, a, q, i, None)?;
        ws.push(Witness { i, x, y });
    }
    let f = FDesc::Mobius { g1: g1.clone(), g2: g2.clone(), h1: h1.clone(), h2: h2.clone() };
    WitnessSet::new(f, a.clone(), q.clone(), ws)
}

/// `(r + s sqrt(-d))(p + q sqrt(-d))`: `F(r,s) F(p,q) = F(rp - dsq, rq + sp)` for `F = X^2 + dY^2`.
pub fn compose(d: &Rat, a: (&Rat, &Rat), b: (&Rat, &Rat)) -> (Rat, Rat) {
    (a.0 * b.0 - d * a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

pub fn norm_form(d: &Rat, p: (&Rat, &Rat)) -> Rat {
    p.0 * p.0 + d * p.1 * p.1
}

/// Witnesses for `f = u x^2 + v x y + w y^2`, using
/// `u f = (u x + v y / 2)^2 + d y^2` with `d = u w - v^2/4`, so that
/// `a = F(r, s)/u` and `Q = F(u2, v2)` for `F = X^2 + d Y^2`.
pub fn class2_progression(
    u: &Rat,
    v: &Rat,
    w: &Rat,
    seed_a: (&Rat, &Rat),
    seed_q: (&Rat, &Rat),
    n: u32,
) -> Result<WitnessSet> {
    let f = FDesc::Quadratic { u: u.clone(), v: v.clone(), w: w.clone() };
    if u.is_zero() {
        if !w.is_zero() {
            let swapped = class2_progression(w, v, u, seed_a, seed_q, n)?;
            let ws = swapped.witnesses.into_iter().map(|x| Witness { i: x.i, x: x.y, y: x.x }).collect();
            return WitnessSet::new(f, swapped.a, swapped.q, ws);
        }
        if v.is_zero() {
            return Err(ProgressionError::Degenerate("f = 0".into()));
        }
        // f = v x y takes every value
        let a = norm_form(&Rat::one(), seed_a);
        let q = norm_form(&Rat::one(), seed_q);
        check_quotient(&q)?;
        let ws = (0..=n as i64)
            .map(|i| Witness { i, x: &a * rat_pow(&q, i) / v, y: Rat::one() })
            .collect();
        return WitnessSet::new(f, a, q, ws);
    }
    let d = u * w - v * v / Rat::from_integer(Int::from(4));
    let fa = norm_form(&d, seed_a);
    let q = norm_form(&d, seed_q);
    if fa.is_zero() {
        return Err(ProgressionError::Degenerate("F(r, s) = 0".into()));
    }
    check_quotient(&q)?;
    let a = &fa / u;
    let half_v = v / Rat::from_integer(Int::from(2));
    let mut cur = (seed_a.0.clone(), seed_a.1.clone());
    let mut ws = Vec::new();
    for i in 0..=n as i64 {
        let (big_x, big_y) = &cur;
        ws.push(Witness { i, x: (big_x - &half_v * big_y) / u, y: big_y.clone() });
        cur = compose(&d, (&cur.0, &cur.1), seed_q);
    }
    WitnessSet::new(f, a, q, ws)
}

/// `(u Q^i, v Q^i)`; `f = f1/f2` then takes `f(u, v) Q^(i (deg f1 - deg f2))`.
pub fn class3_witness(f1: &Form, f2: &Form, u: &Rat, v: &Rat, q: &Rat, i: i64) -> Result<(Rat, Rat)> {
    let (d1, d2) = (f1.degree() as i64, f2.degree() as i64);
    if (d1 - d2).abs() != 1 {
        return Err(ProgressionError::Degenerate(format!("degrees {d1}, {d2} differ by {}", d1 - d2)));
    }
    if f2.eval(u, v).is_zero() || f1.eval(u, v).is_zero() {
        return Err(ProgressionError::Degenerate("f(u, v) is zero or undefined".into()));
    }
    let s = rat_pow(q, i);
    Ok((u * &s, v * &s))
}

pub fn class3_progression(f1: &Form, f2: &Form, u: &Rat, v: &Rat, q: &Rat, n: u32) -> Result<WitnessSet> {
    check_quotient(q)?;
    let mut ws = Vec::new();
    for i in 0..=n as i64 {
        let (x, y) = class3_witness(f1, f2, u, v, q, i)?;
        ws.push(Witness { i, x, y });
    }
    let f = FDesc::FormRatio { num: f1.clone(), den: f2.clone() };
    let a = f.eval(u, v).expect("checked nonzero denominator");
    let ratio = if f1.degree() > f2.degree() { q.clone() } else { Rat::one() / q };
    WitnessSet::new(f, a, ratio, ws)
}

/// Seeds for [`bihomo_construct`]: `x_i = p_i T`, `y_i = q_i T^((d-1)/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BihomoSeeds {
    pub p0: Rat,
    pub p1: Rat,
    pub q0: Rat,
    pub q1: Rat,
}

/// `T` and `a` solving `f(x_1, y_1) = f(x_0, y_0) * ratio`.
pub fn bihomo_t_and_a(d: u32, variant: BihomoVariant, q: &Rat, s: &BihomoSeeds) -> Result<(Rat, Rat)> {
    let d = d as i64;
    let (p0, p1, q0, q1) = (&s.p0, &s.p1, &s.q0, &s.q1);
    let (num, den) = match variant {
        BihomoVariant::Ratio => {
            let qd = rat_pow(q, d - 1);
            (
                p0 * q1 * q1 - p1 * q0 * q0 * &qd,
                p0 * p1 * (rat_pow(p1, d - 1) - rat_pow(p0, d - 1) * &qd),
            )
        }
        BihomoVariant::Difference => {
            let qd = rat_pow(q, d);
            (&qd * q0 * q0 - q1 * q1, &qd * rat_pow(p0, d) - rat_pow(p1, d))
        }
    };
    if den.is_zero() {
        return Err(ProgressionError::Degenerate("T has zero denominator".into()));
    }
    let t = num / den;
    let a = match variant {
        BihomoVariant::Ratio => {
            if p0.is_zero() {
                return Err(ProgressionError::Degenerate("p0 = 0".into()));
            }
            rat_pow(&t, d - 2) * (q0 * q0 - rat_pow(p0, d) * &t) / p0
        }
        BihomoVariant::Difference => rat_pow(&t, d - 1) * (q0 * q0 - rat_pow(p0, d) * &t),
    };
    if a.is_zero() || t.is_zero() {
        return Err(ProgressionError::Degenerate("seed gives a = 0".into()));
    }
    Ok((t, a))
}

/// Witnesses `i = 0..=n` for `f(X_i, Y_i) = a R^i` where `R = Q^(d-1)` (ratio
/// variant) or `R = Q^d` (difference variant), with
/// `X_i = x_(i mod 2) Q^(2 floor(i/2))`, `Y_i = y_(i mod 2) Q^(d floor(i/2))`.
pub fn bihomo_construct(d: u32, variant: BihomoVariant, q: &Rat, seeds: &BihomoSeeds, n: u32) -> Result<WitnessSet> {
    if d.is_multiple_of(2) || d < 3 {
        return Err(ProgressionError::Degenerate(format!("d = {d} must be odd and at least 3")));
    }
    check_quotient(q)?;
    let (t, a) = bihomo_t_and_a(d, variant, q, seeds)?;
    let m = (d as i64 - 1) / 2;
    let tm = rat_pow(&t, m);
    let base = [(&seeds.p0 * &t, &seeds.q0 * &tm), (&seeds.p1 * &t, &seeds.q1 * &tm)];
    let ws = (0..=n as i64)
        .map(|i| {
            let (x, y) = &base[(i % 2) as usize];
            let k = i / 2;
            Witness { i, x: x * rat_pow(q, 2 * k), y: y * rat_pow(q, d as i64 * k) }
        })
        .collect();
    let ratio = match variant {
        BihomoVariant::Ratio => rat_pow(q, d as i64 - 1),
        BihomoVariant::Difference => rat_pow(q, d as i64),
    };
    WitnessSet::new(FDesc::Bihomo { d, variant }, a, ratio, ws)
}

/// `768 Q^3 (3Q^2-1)^2 (3Q^2+1)^2 (3Q u^2 - v^2)(3Q^3 v^2 - u^2)`.
pub fn cq2_a(q: &Int, u: &Int, v: &Int) -> Int {
    let q2 = q * q;
    let three = Int::from(3);
    let m = &three * &q2 - 1u32;
    let p = &three * &q2 + 1u32;
    Int::from(768) * q * &q2 * &m * &m * &p * &p
        * (&three * q * u * u - v * v)
        * (&three * q * &q2 * v * v - u * u)
}

/// `a(u, v) > 0` with witnesses for `G(a, Q^2) ⊂ V_f`, `f = (y^2 - x^3)/x`, `i = 0..=n`.
pub fn cq2_family(q: &Int, u: &Int, v: &Int, n: u32) -> Result<(Int, WitnessSet)> {
    let three = Int::from(3);
    let inside = (&three * q * u * u - v * v).is_positive() && (&three * q * q * q * v * v - u * u).is_positive();
    if !inside {
        return Err(ProgressionError::Degenerate(format!(
            "v = {v} is not strictly between u/(Q sqrt(3Q)) and sqrt(3Q) u for u = {u}, Q = {q}"
        )));
    }
    let (qr, ur, vr) = (rat_int(q), rat_int(u), rat_int(v));
    let three_q2 = Rat::from_integer(&three * q * q);
    let seeds = BihomoSeeds {
        p0: Rat::new(Int::from(3), Int::from(4)),
        p1: Rat::one() / (Rat::from_integer(Int::from(4)) * &qr),
        q0: Rat::from_integer(three.clone()) * (&three_q2 - Rat::one()) * (&three_q2 + Rat::one()) * &ur,
        q1: (Rat::one() - &three_q2) * (&three_q2 + Rat::one()) * &vr,
    };
    let ws = bihomo_construct(3, BihomoVariant::Ratio, &qr, &seeds, n)?;
    let a = cq2_a(q, u, v);
    if ws.a != rat_int(&a) {
        return Err(ProgressionError::Invalid {
            i: 0,
            expected: a.to_string(),
            got: fmt_rat(&ws.a),
        });
    }
    Ok((a, ws))
}

/// `Q = q1^3 q2^2 q3` for `a = q1 q2^2 q3^3`, making `aQ` a fourth power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KillerProof {
    pub a: Int,
    pub q1: Int,
    pub q2: Int,
    pub q3: Int,
    pub q: Int,
    /// `aQ = root^4`.
    pub root: Int,
    /// `y^2 = x^3 + aQ x` twisted by `1/root`.
    pub twisted: Curve,
}

impl KillerProof {
    /// `aQ = root^4` and the twisted curve is `y^2 = x^3 + x`.
    pub fn verify(&self) -> bool {
        let aq = &self.a * &self.q;
        let e1 = Curve::bx(rat_int(&aq));
        let back = e1.and_then(|c| c.twist_by(&Rat::new(Int::one(), self.root.clone())));
        num_traits::pow(self.root.clone(), 4) == aq
            && back.as_ref() == Ok(&self.twisted)
            && Curve::bx(Rat::one()).as_ref() == Ok(&self.twisted)
    }
}

impl Serialize for KillerProof {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("KillerProof", 7)?;
        st.serialize_field("a", &self.a.to_string())?;
        st.serialize_field("q1", &self.q1.to_string())?;
        st.serialize_field("q2", &self.q2.to_string())?;
        st.serialize_field("q3", &self.q3.to_string())?;
        st.serialize_field("Q", &self.q.to_string())?;
        st.serialize_field("root", &self.root.to_string())?;
        st.serialize_field("twisted", &self.twisted.to_string())?;
        st.end()
    }
}

#[allow(non_snake_case)]
pub fn killer_Q(a: &Int) -> Result<KillerProof> {
    let (q1, q2, q3) = decompose_124(a)?;
    let q = &q1 * &q1 * &q1 * &q2 * &q2 * &q3;
    if q.is_one() {
        return Err(ProgressionError::Degenerate("a = 1 gives Q = 1; aQ is already a fourth power".into()));
    }
    let aq = a * &q;
    let root = int_root_exact(&aq, 4).expect("aQ = (q1 q2 q3)^4");
    let twisted = Curve::bx(rat_int(&aq))
        .and_then(|c| c.twist_by(&Rat::new(Int::one(), root.clone())))
        .map_err(|e| ProgressionError::Degenerate(e.to_string()))?;
    let proof = KillerProof { a: a.clone(), q1, q2, q3, q, root, twisted };
    debug_assert!(proof.verify());
    Ok(proof)
}
