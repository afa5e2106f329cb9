//! Birational maps: the cubic `x^3 + y^3 = A`, quartics with a rational
//! point, and the fixed-`a` construction of progressions for `(y^2 - x^3)/x`.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ellcurve::{Curve, CurveError, Point};
use crate::exactnum::{fmt_rat, is_rat_power, rat_pow, rat_sqrt, Int, Rat};
use crate::polynom::{discriminant_u, identity_check, sample_rat, Evaluator, Poly, PolyError};
use crate::progressions::{
    bihomo_construct, BihomoSeeds, BihomoVariant, FDesc, ProgressionError, Witness, WitnessSet,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BiratError {
    #[error("map undefined at {0}")]
    Undefined(String),
    #[error("point {0} is not on the quartic")]
    OffQuartic(String),
    #[error("constant term {0} is not a nonzero square")]
    NoMarkedPoint(String),
    #[error("singular quartic")]
    Singular,
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Progression(#[from] ProgressionError),
}

type Result<T> = std::result::Result<T, BiratError>;

fn k(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// `y^2 = x^3 - 432 A^2`, birational to `x^3 + y^3 = A`.
pub fn cube_curve(a: &Rat) -> Result<Curve> {
    Ok(Curve::mordell(-k(432) * a * a)?)
}

/// `(X, Y) -> ((36A + Y)/(6X), (36A - Y)/(6X))`.
pub fn weierstrass_to_cubic(a: &Rat, p: &Point) -> Result<(Rat, Rat)> {
    match p {
        Point::Affine(x, y) if !x.is_zero() => {
            let d = k(6) * x;
            Ok(((k(36) * a + y) / &d, (k(36) * a - y) / &d))
        }
        _ => Err(BiratError::Undefined(p.to_string())),
    }
}

/// `(x, y) -> (12A/(x+y), 36A(x-y)/(x+y))`, inverse to [`weierstrass_to_cubic`].
pub fn cubic_to_weierstrass(a: &Rat, x: &Rat, y: &Rat) -> Result<Point> {
    let s = x + y;
    if s.is_zero() {
        return Err(BiratError::Undefined(format!("({}, {})", fmt_rat(x), fmt_rat(y))));
    }
    Ok(Point::new(k(12) * a / &s, k(36) * a * (x - y) / s))
}

/// Clears denominators of cube-sum witnesses `i <= n`: returns `D_n` and
/// `(D_n x_i, D_n y_i)`, whose values are `D_n^3 a Q^i`.
pub fn integer_scale(ws: &WitnessSet, n: i64) -> Result<(Int, WitnessSet)> {
    if ws.f != FDesc::CubeSum {
        return Err(BiratError::Degenerate(format!("integer_scale needs x^3 + y^3, got {}", ws.f)));
    }
    let chosen: Vec<&Witness> = ws.witnesses.iter().filter(|w| w.i <= n).collect();
    if chosen.iter().any(|w| w.x.is_zero() && w.y.is_zero()) {
        return Err(BiratError::Degenerate("zero witness".into()));
    }
    let d = chosen.iter().fold(Int::one(), |acc, w| acc.lcm(w.x.denom()).lcm(w.y.denom()));
    let dr = Rat::from_integer(d.clone());
    let scaled = chosen
        .iter()
        .map(|w| Witness { i: w.i, x: &w.x * &dr, y: &w.y * &dr })
        .collect();
    let out = WitnessSet::new(FDesc::CubeSum, &ws.a * rat_pow(&dr, 3), ws.q.clone(), scaled)?;
    Ok((d, out))
}

/// `Y^2 = c4 u^4 + c3 u^3 + c2 u^2 + c1 u + q^2` with marked point `(0, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuarticCurve {
    /// `c[k]` multiplies `u^k`.
    pub c: [Rat; 5],
    pub q: Rat,
}

impl QuarticCurve {
    /// `q` is the chosen square root of `c0`; its sign picks the marked point.
    pub fn new(c: [Rat; 5], q: Rat) -> Result<Self> {
        if q.is_zero() || &q * &q != c[0] {
            return Err(BiratError::NoMarkedPoint(fmt_rat(&c[0])));
        }
        let poly = Poly::new(c.to_vec());
        if poly.degree() != Some(4) || discriminant_u(&poly)?.is_zero() {
            return Err(BiratError::Singular);
        }
        Ok(QuarticCurve { c, q })
    }

    pub fn with_root_of_c0(c: [Rat; 5]) -> Result<Self> {
        let q = rat_sqrt(&c[0]).ok_or_else(|| BiratError::NoMarkedPoint(fmt_rat(&c[0])))?;
        QuarticCurve::new(c, q)
    }

    pub fn eval(&self, u: &Rat) -> Rat {
        self.c.iter().rev().fold(Rat::zero(), |acc, c| acc * u + c)
    }

    pub fn contains(&self, u: &Rat, v: &Rat) -> bool {
        v * v == self.eval(u)
    }
}

/// Weierstrass model `y^2 = x^3 + A2 x^2 + A4 x + A6` of a [`QuarticCurve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuarticModel {
    pub quartic: QuarticCurve,
    pub curve: Curve,
    a1: Rat,
    a3: Rat,
}

/// Classical model of `v^2 = a u^4 + b u^3 + c u^2 + d u + q^2`:
/// `x = (2q(v+q) + du)/u^2`, `y = (4q^2(v+q) + 2q(du + cu^2) - d^2u^2/(2q))/u^3`
/// on `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`, followed by completing
/// the square in `y`.
pub fn quartic_to_weierstrass(quartic: &QuarticCurve) -> Result<QuarticModel> {
    let [_, d, c, b, a] = &quartic.c;
    let q = &quartic.q;
    let a1 = d / q;
    let a2 = c - d * d / (k(4) * q * q);
    let a3 = k(2) * q * b;
    let a4 = -k(4) * q * q * a;
    let a6 = &a2 * &a4;
    let curve = Curve::new(
        &a2 + &a1 * &a1 / k(4),
        &a4 + &a1 * &a3 / k(2),
        &a6 + &a3 * &a3 / k(4),
    )?;
    Ok(QuarticModel { quartic: quartic.clone(), curve, a1, a3 })
}

impl QuarticModel {
    /// Image of a quartic point; `(0, q)` goes to the point at infinity.
    pub fn forward(&self, u: &Rat, v: &Rat) -> Result<Point> {
        if !self.quartic.contains(u, v) {
            return Err(BiratError::OffQuartic(format!("({}, {})", fmt_rat(u), fmt_rat(v))));
        }
        let [_, d, c, _, _] = &self.quartic.c;
        let q = &self.quartic.q;
        let (x, y) = if u.is_zero() {
            if v == q {
                return Ok(Point::Infinity);
            }
            // limit along the branch through (0, -q)
            let a2 = c - d * d / (k(4) * q * q);
            (-&a2, &self.a1 * &a2 - &self.a3)
        } else {
            let x = (k(2) * q * (v + q) + d * u) / (u * u);
            let y = (k(4) * q * q * (v + q) + k(2) * q * (d * u + c * u * u) - d * d * u * u / (k(2) * q))
                / (u * u * u);
            (x, y)
        };
        let big_y = &y + (&self.a1 * &x + &self.a3) / k(2);
        let p = Point::new(x, big_y);
        debug_assert!(self.curve.on_curve(&p));
        Ok(p)
    }

    pub fn inverse(&self, p: &Point) -> Result<(Rat, Rat)> {
        self.curve.check(p)?;
        let [_, d, c, _, _] = &self.quartic.c;
        let q = &self.quartic.q;
        let (x, big_y) = match p {
            Point::Infinity => return Ok((Rat::zero(), q.clone())),
            Point::Affine(x, y) => (x, y),
        };
        let y = big_y - (&self.a1 * x + &self.a3) / k(2);
        if y.is_zero() {
            return Err(BiratError::Undefined(p.to_string()));
        }
        let u = (k(2) * q * (x + c) - d * d / (k(2) * q)) / &y;
        let v = -q + &u * (&u * x - d) / (k(2) * q);
        debug_assert!(self.quartic.contains(&u, &v));
        Ok((u, v))
    }
}

/// `f1 = a p^3 (p^2+a)^3 v^4`.
pub fn f1(a: &Rat, p: &Rat, v: &Rat) -> Rat {
    a * rat_pow(p, 3) * rat_pow(&(p * p + a), 3) * rat_pow(v, 4)
}

/// `f2 = a p (p^2+a) ((p^2+a) p v^2 - 1)((p^2+a) p v^2 + 1)`.
pub fn f2(a: &Rat, p: &Rat, v: &Rat) -> Rat {
    let s = p * p + a;
    let w = &s * p * v * v;
    a * p * &s * (&w - Rat::one()) * (&w + Rat::one())
}

/// Coefficients in `u` of `F_a(p, v, u)`, lowest first.
pub fn fa_coeffs(a: &Rat, p: &Rat, v: &Rat) -> [Rat; 5] {
    let s = p * p + a;
    let v2 = v * v;
    [
        rat_pow(&s, 6) * rat_pow(v, 6),
        Rat::zero(),
        -k(2) * rat_pow(a, 3) * p * &s * (p * p * &s * &s * &v2 * &v2 - k(2)) * &v2,
        Rat::zero(),
        rat_pow(a, 6) * rat_pow(p, 6) * rat_pow(v, 6),
    ]
}

/// `a^3 p^3 u^2 - (p^2+a)^3`, the factor multiplying `y` on `C_a`.
pub fn ca_factor(a: &Rat, p: &Rat, u: &Rat) -> Rat {
    rat_pow(a, 3) * rat_pow(p, 3) * u * u - rat_pow(&(p * p + a), 3)
}

/// `D_a(p, v) = 2^12 a^18 p^10 (a+p^2)^10 v^20 (p^2(p^2+a)^2 v^4 - 1)^2`.
pub fn da(a: &Rat, p: &Rat, v: &Rat) -> Rat {
    let s = p * p + a;
    let t = p * p * &s * &s * rat_pow(v, 4) - Rat::one();
    k(4096) * rat_pow(a, 18) * rat_pow(p, 10) * rat_pow(&s, 10) * rat_pow(v, 20) * &t * &t
}

/// `Q_a(p, u) = 4 a^2 p (p^2+a) u^2 / (a^3 p^3 u^2 - (p^2+a)^3)^2`.
pub fn q_from_u(a: &Rat, p: &Rat, u: &Rat) -> Result<Rat> {
    let den = ca_factor(a, p, u);
    if den.is_zero() {
        return Err(BiratError::Undefined(format!("u = {}", fmt_rat(u))));
    }
    Ok(k(4) * a * a * p * (p * p + a) * u * u / (&den * &den))
}

/// `g1(v, y) = (y^2 - v^6)/(a v^2)`.
pub fn g1(a: &Rat, v: &Rat, y: &Rat) -> Option<Rat> {
    let den = a * v * v;
    (!den.is_zero()).then(|| (y * y - rat_pow(v, 6)) / den)
}

/// `g2(p, q) = (p^3 + a p)/q^2`.
pub fn g2(a: &Rat, p: &Rat, q: &Rat) -> Option<Rat> {
    (!q.is_zero()).then(|| (rat_pow(p, 3) + a * p) / (q * q))
}

/// `g3(r, s) = a r/(s^2 - r^3)`.
pub fn g3(a: &Rat, r: &Rat, s: &Rat) -> Option<Rat> {
    let den = s * s - rat_pow(r, 3);
    (!den.is_zero()).then(|| a * r / den)
}

/// `(q, r, s)` parameterizing `g2(p, q) = g3(r, s)` by `u`.
pub fn qrs(a: &Rat, p: &Rat, u: &Rat) -> Result<(Rat, Rat, Rat)> {
    if u.is_zero() || a.is_zero() {
        return Err(BiratError::Undefined("u = 0".into()));
    }
    let c = rat_pow(&(p * p + a), 3);
    let m = rat_pow(a, 3) * rat_pow(p, 3) * u * u;
    let q = -(&m - &c) / (k(2) * a * u);
    let r = a * p * (p * p + a);
    let s = (&m + &c) / (k(2) * u);
    Ok((q, r, s))
}

/// Everything attached to `(a, p, v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedAInstance {
    pub a: Rat,
    pub p: Rat,
    pub v: Rat,
    pub f1: Rat,
    pub f2: Rat,
    /// `Y^2 = X (X - f1)(X - f2)`.
    pub curve: Curve,
    /// `Y^2 = F_a(p, v, u)` with `Y = (a^3 p^3 u^2 - (p^2+a)^3) y`.
    pub quartic: QuarticCurve,
    pub r: Rat,
    /// `p (p^2 + a)` is a square: the construction degenerates.
    pub degenerate: bool,
}

pub fn build_fixeda(a: &Rat, p: &Rat, v: &Rat) -> Result<FixedAInstance> {
    let s = p * p + a;
    if a.is_zero() || v.is_zero() || (p * &s).is_zero() {
        return Err(BiratError::Degenerate("need a, v, p (p^2 + a) nonzero".into()));
    }
    if da(a, p, v).is_zero() {
        return Err(BiratError::Singular);
    }
    let ps = p * &s;
    let degenerate = !ps.is_negative() && is_rat_power(&ps, 2);
    if degenerate {
        log::warn!("p(p^2 + a) = {} is a square", fmt_rat(&ps));
    }
    let (e1, e2) = (f1(a, p, v), f2(a, p, v));
    let curve = Curve::new(-(&e1 + &e2), &e1 * &e2, Rat::zero())?;
    let quartic = QuarticCurve::new(fa_coeffs(a, p, v), rat_pow(&s, 3) * rat_pow(v, 3))?;
    Ok(FixedAInstance {
        a: a.clone(),
        p: p.clone(),
        v: v.clone(),
        f1: e1,
        f2: e2,
        curve,
        quartic,
        r: a * &ps,
        degenerate,
    })
}

impl FixedAInstance {
    /// `(u, y)` lies on `C_a`.
    pub fn on_ca(&self, u: &Rat, y: &Rat) -> bool {
        let m = ca_factor(&self.a, &self.p, u);
        &m * &m * y * y == self.quartic.eval(u)
    }

    /// The quartic model and the isomorphism from its Weierstrass model to `E_a(p, v)`.
    pub fn model(&self) -> Result<(QuarticModel, crate::ellcurve::CurveIso)> {
        let model = quartic_to_weierstrass(&self.quartic)?;
        let iso = model
            .curve
            .isomorphism_to(&self.curve)
            .ok_or_else(|| BiratError::Degenerate("quartic model not isomorphic to E_a(p, v)".into()))?;
        Ok((model, iso))
    }

    /// `(u, y)` on `C_a` corresponding to a point of `E_a(p, v)`.
    pub fn point_to_ca(&self, p: &Point) -> Result<(Rat, Rat)> {
        let (model, iso) = self.model()?;
        let (u, big_y) = model.inverse(&iso.invert(p))?;
        let m = ca_factor(&self.a, &self.p, &u);
        if m.is_zero() {
            return Err(BiratError::Undefined(p.to_string()));
        }
        Ok((u, big_y / m))
    }

    /// The point of `E_a(p, v)` corresponding to `(u, y)` on `C_a`.
    pub fn ca_to_point(&self, u: &Rat, y: &Rat) -> Result<Point> {
        let (model, iso) = self.model()?;
        let big_y = ca_factor(&self.a, &self.p, u) * y;
        Ok(iso.apply(&model.forward(u, &big_y)?))
    }
}

/// Witnesses for `f = (y^2 - x^3)/x` and `G(a, Q)` at `i = 1, 2, 3`, `Q = Q_a(p, u)`.
pub fn witnesses_from_point(inst: &FixedAInstance, u: &Rat, y: &Rat) -> Result<WitnessSet> {
    if !inst.on_ca(u, y) {
        return Err(BiratError::OffQuartic(format!("({}, {})", fmt_rat(u), fmt_rat(y))));
    }
    let (a, p) = (&inst.a, &inst.p);
    let big_q = q_from_u(a, p, u)?;
    if big_q.is_zero() {
        return Err(BiratError::Degenerate("Q = 0".into()));
    }
    let (q, r, s) = qrs(a, p, u)?;
    let ws = vec![
        Witness { i: 1, x: &inst.v * &inst.v, y: y.clone() },
        Witness { i: 2, x: p * &big_q, y: &q * rat_pow(&big_q, 2) },
        Witness { i: 3, x: &r * rat_pow(&big_q, 2), y: &s * rat_pow(&big_q, 3) },
    ];
    Ok(WitnessSet::new(FDesc::Bihomo { d: 3, variant: BihomoVariant::Ratio }, a.clone(), big_q, ws)?)
}

/// Outcome of [`cprime_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPrimeReport {
    pub ok: bool,
    /// Values of the two quadrics.
    pub residuals: [Rat; 2],
    /// The three `T` expressions (absent where a denominator vanishes).
    pub t_chain: Vec<Option<Rat>>,
    pub t: Option<Rat>,
    pub a: Option<Rat>,
    pub witnesses: Option<WitnessSet>,
}

impl Serialize for CPrimeReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let opt = |r: &Option<Rat>| r.as_ref().map(fmt_rat);
        let mut st = s.serialize_struct("CPrimeReport", 6)?;
        st.serialize_field("ok", &self.ok)?;
        st.serialize_field("residuals", &[fmt_rat(&self.residuals[0]), fmt_rat(&self.residuals[1])])?;
        st.serialize_field("t_chain", &self.t_chain.iter().map(opt).collect::<Vec<_>>())?;
        st.serialize_field("T", &opt(&self.t))?;
        st.serialize_field("a", &opt(&self.a))?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.end()
    }
}

fn quadric(q: &Rat, p: [&Rat; 3], s: [&Rat; 3]) -> Rat {
    let [p0, p1, p2] = p;
    let [q0, q1, q2] = s;
    p1 * p2 * q * (p1 * p1 * q - p2 * p2) * q0 * q0
        + p0 * p2 * (p2 * p2 - p0 * p0 * q * q) * q1 * q1
        + p0 * p1 * (p0 * p0 * q - p1 * p1) * q2 * q2
}

fn t_link(q: &Rat, p0: &Rat, p1: &Rat, q0: &Rat, q1: &Rat) -> Option<Rat> {
    let den = p0 * p1 * (p1 * p1 - q * p0 * p0);
    (!den.is_zero()).then(|| (p0 * q1 * q1 - q * p1 * q0 * q0) / den)
}

/// Checks `(p, q)` against the two quadrics of `C'_Q` and, when both vanish,
/// derives `T`, `a` and the witnesses `x_i = p_i T`, `y_i = q_i T`.
pub fn cprime_check(big_q: &Rat, p: &[Rat; 4], q: &[Rat; 4]) -> CPrimeReport {
    let residuals = [
        quadric(big_q, [&p[0], &p[1], &p[2]], [&q[0], &q[1], &q[2]]),
        quadric(big_q, [&p[1], &p[2], &p[3]], [&q[1], &q[2], &q[3]]),
    ];
    let t_chain: Vec<Option<Rat>> = (0..3).map(|i| t_link(big_q, &p[i], &p[i + 1], &q[i], &q[i + 1])).collect();
    let ok = residuals.iter().all(Zero::is_zero);
    let mut report = CPrimeReport { ok, residuals, t_chain, t: None, a: None, witnesses: None };
    if !ok {
        return report;
    }
    let t = report.t_chain.iter().flatten().next().cloned();
    let Some(t) = t else { return report };
    if report.t_chain.iter().flatten().any(|x| x != &t) {
        report.ok = false;
        return report;
    }
    let (p0, p1, q0, q1) = (&p[0], &p[1], &q[0], &q[1]);
    let den = p0 * p0 * p1 * p1 * rat_pow(&(p1 * p1 - p0 * p0 * big_q), 2);
    if den.is_zero() {
        report.t = Some(t);
        return report;
    }
    let a = -(rat_pow(p1, 3) * q0 * q0 - rat_pow(p0, 3) * q1 * q1) * (p1 * q0 * q0 * big_q - p0 * q1 * q1) / den;
    let ws: Vec<Witness> = (0..4).map(|i| Witness { i: i as i64, x: &p[i] * &t, y: &q[i] * &t }).collect();
    let set = WitnessSet::new(FDesc::Bihomo { d: 3, variant: BihomoVariant::Ratio }, a.clone(), big_q.clone(), ws);
    report.ok = set.is_ok();
    report.t = Some(t);
    report.a = Some(a);
    report.witnesses = set.ok();
    report
}

/// One identity of the suite with its outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub detail: String,
}

fn report(name: &str, trials: usize, r: std::result::Result<bool, PolyError>) -> IdentityReport {
    IdentityReport {
        name: name.into(),
        passed: r == Ok(true),
        trials,
        detail: match r {
            Ok(true) => "ok".into(),
            Ok(false) => "mismatch".into(),
            Err(e) => e.to_string(),
        },
    }
}

/// Randomized exact checks of the fixed-`a` and `C'_Q` formulas.
pub fn identity_suite(trials: usize, seed: u64) -> Vec<IdentityReport> {
    let mut out = Vec::new();

    // D_a(p, v) = Disc_u F_a(p, v, u); variables (a, p, v)
    let lhs: &Evaluator = &|x: &[Rat]| Some(da(&x[0], &x[1], &x[2]));
    let rhs: &Evaluator = &|x: &[Rat]| discriminant_u(&Poly::new(fa_coeffs(&x[0], &x[1], &x[2]).to_vec())).ok();
    out.push(report("D_a = Disc_u(F_a)", trials, identity_check(lhs, rhs, 3, trials, 60, seed)));

    // g2(p, q(p, u)) = Q_a(p, u) and g3(r, s(p, u)) = Q_a(p, u); variables (a, p, u)
    let qa: &Evaluator = &|x: &[Rat]| q_from_u(&x[0], &x[1], &x[2]).ok();
    let via_g2: &Evaluator = &|x: &[Rat]| {
        let (q, _, _) = qrs(&x[0], &x[1], &x[2]).ok()?;
        g2(&x[0], &x[1], &q)
    };
    let via_g3: &Evaluator = &|x: &[Rat]| {
        let (_, r, s) = qrs(&x[0], &x[1], &x[2]).ok()?;
        g3(&x[0], &r, &s)
    };
    out.push(report("g2(p, q(p,u)) = Q_a(p,u)", trials, identity_check(via_g2, qa, 3, trials, 20, seed + 1)));
    out.push(report("g3(r, s(p,u)) = Q_a(p,u)", trials, identity_check(via_g3, qa, 3, trials, 20, seed + 2)));

    // (g1(v, y) - Q_a(p, u)) a v^2 m^2 = m^2 y^2 - F_a with m = a^3p^3u^2 - (p^2+a)^3;
    // variables (a, p, v, u, y)
    let cleared: &Evaluator = &|x: &[Rat]| {
        let (a, p, v, u, y) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
        let m = ca_factor(a, p, u);
        Some((g1(a, v, y)? - q_from_u(a, p, u).ok()?) * a * v * v * &m * &m)
    };
    let curve_eq: &Evaluator = &|x: &[Rat]| {
        let (a, p, v, u, y) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
        let m = ca_factor(a, p, u);
        let fa = Poly::new(fa_coeffs(a, p, v).to_vec()).eval(u);
        Some(&m * &m * y * y - fa)
    };
    out.push(report("C_a equation <=> g1 = Q_a", trials, identity_check(cleared, curve_eq, 5, trials, 40, seed + 3)));

    // C'_Q on forward-constructed points: bihomo witness sets with ratio R,
    // rescaled by a random T
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 4);
    let mut done = 0;
    let mut attempts = 0;
    let mut failure = None;
    while done < trials && attempts < 10 * trials.max(1) {
        attempts += 1;
        let q = sample_rat(&mut rng);
        let seeds = BihomoSeeds {
            p0: sample_rat(&mut rng),
            p1: sample_rat(&mut rng),
            q0: sample_rat(&mut rng),
            q1: sample_rat(&mut rng),
        };
        let Ok(ws) = bihomo_construct(3, BihomoVariant::Ratio, &q, &seeds, 3) else { continue };
        let t = sample_rat(&mut rng);
        let p: [Rat; 4] = std::array::from_fn(|i| &ws.witnesses[i].x / &t);
        let qq: [Rat; 4] = std::array::from_fn(|i| &ws.witnesses[i].y / &t);
        let rep = cprime_check(&ws.q, &p, &qq);
        let chain_ok = rep.t_chain.iter().all(|x| x.as_ref() == Some(&t));
        if !(rep.ok && chain_ok && rep.a.as_ref() == Some(&ws.a)) {
            failure = Some(format!("R = {}, T = {}", fmt_rat(&ws.q), fmt_rat(&t)));
            break;
        }
        done += 1;
    }
    out.push(IdentityReport {
        name: "C'_Q T-chain and a-formula".into(),
        passed: failure.is_none() && done == trials,
        trials: done,
        detail: failure.unwrap_or_else(|| if done == trials { "ok".into() } else { "too few seeds".into() }),
    });
    out
}
