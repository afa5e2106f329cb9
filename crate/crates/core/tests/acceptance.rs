//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Arithmetic is exact, so every numeric check is an equality; the only
//! tolerances are the wall-clock limits below.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use geoprog::birat::{
    build_fixeda, f1, f2, identity_suite, integer_scale, q_from_u, weierstrass_to_cubic, witnesses_from_point,
};
use geoprog::descent2::{rank_bounds, Budget, RankStatus};
use geoprog::ellcurve::{Curve, Point};
use geoprog::exactnum::{fourth_power_free_part, int, int_root_exact, parse_rat, rat, rat_int, rat_pow, Int, Rat};
use geoprog::lab::{Lab, MStatus, Verdict};
use geoprog::polynom::{Poly, RatFunc1};
use geoprog::progressions::{
    bihomo_construct, class1_progression, class2_progression, class3_progression, cq2_family, killer_Q, BihomoSeeds,
    BihomoVariant, FDesc, Form, WitnessSet,
};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIMIT_1: Duration = Duration::from_secs(5 * 60);
const LIMIT_2: Duration = Duration::from_secs(60);
const LIMIT_3: Duration = Duration::from_secs(10);
const LIMIT_4: Duration = Duration::from_secs(1);
const LIMIT_5: Duration = Duration::from_secs(1);
const LIMIT_6: Duration = Duration::from_secs(5);
const LIMIT_7: Duration = Duration::from_secs(30 * 60);
const LIMIT_8: Duration = Duration::from_secs(30 * 60);
const LIMIT_9: Duration = Duration::from_secs(60);
const LIMIT_10: Duration = Duration::from_secs(60);
const LIMIT_11: Duration = Duration::from_secs(10);

/// Share of `a <= 100` that must be resolved in criterion 7.
const MIN_RESOLVED_C2: f64 = 0.80;
/// Random trials per construction in criterion 9.
const CONSTRUCTION_TRIALS: usize = 100;
/// Random points per identity in criterion 10.
const IDENTITY_TRIALS: usize = 20;
/// Random fourth-power-free `a` in criterion 11.
const KILLER_TRIALS: usize = 50;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn q(s: &str) -> Rat {
    parse_rat(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn pt(x: &str, y: &str) -> Point {
    Point::new(q(x), q(y))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// On the curve, of infinite order, `x != 0`.
fn good_generator(c: &Curve, p: &Point) -> Result<(), String> {
    ensure(c.on_curve(p), || format!("{p:?} not on {c}"))?;
    ensure(p.x().is_some_and(|x| !x.is_zero()), || format!("{p:?} has x = 0"))?;
    ensure(c.is_infinite_order(p).map_err(|e| e.to_string())?, || format!("{p:?} is torsion on {c}"))
}

fn criterion_1() -> Outcome {
    let table: [(u32, &[(&str, &str)]); 4] = [
        (1, &[("289/25", "-5712/125")]),
        (2, &[("2", "14"), ("1504/81", "65800/729")]),
        (1, &[("18", "96")]),
        (1, &[("4716544/18225", "10271916928/2460375")]),
    ];
    let mut got = Vec::new();
    for (i, (rank, gens)) in table.iter().enumerate() {
        let b = int(47 << i);
        let r = rank_bounds(&int(0), &b, Budget::default()).map_err(|e| e.to_string())?;
        ensure(r.lower == *rank && r.upper == *rank, || format!("i={i}: bounds {}..{}, want {rank}", r.lower, r.upper))?;
        let c = Curve::bx(rat_int(&b)).unwrap();
        for (x, y) in gens.iter() {
            good_generator(&c, &pt(x, y)).map_err(|e| format!("i={i}: {e}"))?;
        }
        for w in &r.witnesses {
            good_generator(&c, w).map_err(|e| format!("i={i} witness: {e}"))?;
        }
        got.push(r.lower);
    }
    Ok(format!("ranks {got:?}, all listed generators verified"))
}

fn criterion_2() -> Outcome {
    let r1 = rank_bounds(&int(0), &int(1), Budget::default()).map_err(|e| e.to_string())?;
    ensure((r1.lower, r1.upper, r1.status) == (0, 0, RankStatus::Exact), || format!("y^2 = x^3 + x: {r1:?}"))?;
    let r257 = rank_bounds(&int(0), &int(257), Budget::default()).map_err(|e| e.to_string())?;
    ensure(
        (r257.lower, r257.upper, r257.status) == (0, 2, RankStatus::Undetermined) && r257.witnesses.is_empty(),
        || format!("y^2 = x^3 + 257x: {r257:?}"),
    )?;
    Ok("x^3+x: [0, 0] Exact; x^3+257x: [0, 2] Undetermined, no witnesses".into())
}

fn criterion_3() -> Outcome {
    let (a, p, v) = (rat(3, 1), rat(4, 1), rat(2, 1));
    ensure(f1(&a, &p, &v) == rat(21070848, 1), || "f1(3,4,2)".into())?;
    ensure(f2(&a, &p, &v) == rat(21070620, 1), || "f2(3,4,2)".into())?;
    let inst = build_fixeda(&a, &p, &v).map_err(|e| e.to_string())?;
    let (u, y) = (q("4204567/4146944"), q("-1592941018808/199115595007"));
    ensure(inst.on_ca(&u, &y), || "(u, y) is not on C_3(4, 2)".into())?;
    let gen = pt("732246016/9", "14683034857472/27");
    good_generator(&inst.curve, &gen)?;
    let (u2, y2) = inst.point_to_ca(&gen).map_err(|e| e.to_string())?;
    ensure(u2 == u && (y2 == y || y2 == -y.clone()), || format!("generator maps to ({u2}, {y2})"))?;
    let big_q = q_from_u(&a, &p, &u).map_err(|e| e.to_string())?;
    let expected = rat(19, 1) * rat_pow(&q("476639376/199115595007"), 2);
    ensure(big_q == expected, || format!("Q = {big_q}"))?;
    let ws = witnesses_from_point(&inst, &u, &y).map_err(|e| e.to_string())?;
    let d = "39647020174991643330049";
    let printed: [(i64, Point); 3] = [
        (1, pt("4", "1592941018808/199115595007")),
        (2, pt(&format!("17266067201278872576/{d}"), "78182031219520468152777449472/7894340012397994322915429517465343")),
        (3, {
            let dd = Int::from(39647020174991643330049u128);
            let x = Rat::new(int(57) * Int::from(8633033600639436288u64).pow(2), dd.pow(2));
            let y = Rat::new(
                Int::from(127652133024668050546u128) * Int::from(51798201603836617728u128).pow(2),
                dd.pow(3),
            );
            Point::new(x, y)
        }),
    ];
    for (i, p_i) in &printed {
        let c = Curve::bx(rat(3, 1) * rat_pow(&big_q, *i)).unwrap();
        good_generator(&c, p_i).map_err(|e| format!("P_{i}: {e}"))?;
        let w = ws.witnesses.iter().find(|w| w.i == *i).ok_or("missing witness")?;
        let ours = Point::new(w.x.clone(), w.y.clone());
        ensure(ours == *p_i || ours == c.neg(p_i), || format!("P_{i} differs from the computed witness"))?;
    }
    good_generator(&Curve::bx(rat(3, 1)).unwrap(), &pt("1", "2"))?;
    Ok("f1, f2, C_3(4,2) point, Q = 19(476639376/199115595007)^2 and P_0..P_3 verified".into())
}

fn criterion_4() -> Outcome {
    let pts = [(1, pt("25", "130")), (2, pt("121/25", "8206/125")), (3, pt("49/121", "102830/1331"))];
    for (i, p) in &pts {
        let c = Curve::bx(rat_int(&(int(3) * int(17).pow(*i as u32)))).unwrap();
        good_generator(&c, p).map_err(|e| format!("P_{i}: {e}"))?;
    }
    let e0 = Curve::bx(rat(3, 1)).unwrap();
    ensure(!e0.on_curve(&pt("1", "1")), || "(1, 1) unexpectedly on y^2 = x^3 + 3x".into())?;
    good_generator(&e0, &pt("1", "2"))?;
    Ok("P_1..P_3 verified on y^2 = x^3 + 3*17^i x; printed P_0 = (1, 1) is off the curve, (1, 2) verifies".into())
}

fn criterion_5() -> Outcome {
    let s = [pt("28", "80"), pt("172", "2080"), pt("2353", "113975")];
    let printed = [("37/21", "17/21"), ("449/129", "-71/129"), ("124559/14118", "-103391/14118")];
    let mut ws = Vec::new();
    for (i, (s_i, (px, py))) in s.iter().zip(printed).enumerate() {
        let big_a = rat(6 * 7i64.pow(i as u32), 1);
        let e = Curve::mordell(-rat(432, 1) * &big_a * &big_a).unwrap();
        ensure(e.on_curve(s_i), || format!("S_{i} not on E_{i}"))?;
        let (x, y) = weierstrass_to_cubic(&big_a, s_i).map_err(|e| e.to_string())?;
        ensure(&x * &x * &x + &y * &y * &y == big_a, || format!("P_{i}: x^3 + y^3 != 6*7^{i}"))?;
        ensure(x == q(px) && y == q(py), || format!("P_{i} = ({x}, {y})"))?;
        ws.push(geoprog::progressions::Witness { i: i as i64, x, y });
    }
    let set = WitnessSet::new(FDesc::CubeSum, rat(6, 1), rat(7, 1), ws).map_err(|e| e.to_string())?;
    let (d, scaled) = integer_scale(&set, 2).map_err(|e| e.to_string())?;
    let values: Vec<Rat> = scaled.witnesses.iter().map(|w| &w.x * &w.x * &w.x + &w.y * &w.y * &w.y).collect();
    ensure(scaled.witnesses.iter().all(|w| w.x.is_integer() && w.y.is_integer()), || "non-integer scaled".into())?;
    ensure(values.len() == 3 && values[1] == &values[0] * rat(7, 1) && values[2] == &values[1] * rat(7, 1), || {
        format!("values {values:?} are not a progression of ratio 7")
    })?;
    Ok(format!("P_0..P_2 match; D_2 = {d} gives integer sums of cubes {}, ratio 7", values[0]))
}

fn criterion_6() -> Outcome {
    let table: [&[(&str, &str)]; 6] = [
        &[("-2", "5")],
        &[("1/4", "65/8")],
        &[("4", "14")],
        &[("-2", "-16")],
        &[("16", "68"), ("-8", "4")],
        &[("48217/5041", "-15728083/357911")],
    ];
    let mut on_caption = 0;
    for (i, pts) in table.iter().enumerate() {
        let c = Curve::mordell(rat(33 << i, 1)).unwrap();
        let caption = Curve::mordell(rat(3 << i, 1)).unwrap();
        for (x, y) in pts.iter() {
            let p = pt(x, y);
            good_generator(&c, &p).map_err(|e| format!("i={i}: {e}"))?;
            on_caption += caption.on_curve(&p) as usize;
        }
    }
    ensure(on_caption == 0, || format!("{on_caption} points also lie on the a = 3 curves"))?;
    Ok("all 7 points verify on y^2 = x^3 + 33*2^i; none lies on the captioned a = 3 curves (caption mismatch)".into())
}

fn criterion_7() -> Outcome {
    let expected: BTreeSet<u64> = [47, 69, 77, 79, 89, 94].into();
    let table = Lab::new(Budget::default()).compute_cq(&int(2), 100).map_err(|e| e.to_string())?;
    let members: BTreeSet<u64> = table.members().iter().map(|a| a.try_into().unwrap()).collect();
    ensure(members == expected, || format!("members {members:?}"))?;
    ensure(members.iter().all(|&a| a >= 47), || "member below 47".into())?;
    let resolved = table.rows.iter().filter(|r| r.verdict != Verdict::Undetermined).count();
    let share = resolved as f64 / table.rows.len() as f64;
    ensure(share >= MIN_RESOLVED_C2, || format!("only {resolved}/100 resolved"))?;
    Ok(format!("members {members:?}; {resolved}/100 resolved, unresolved {:?}", table.unresolved()))
}

fn criterion_8() -> Outcome {
    let lab = Lab::new(Budget::default());
    let mut notes = Vec::new();
    for (a, want) in [(47u64, 2u64), (20, 3), (8, 5)] {
        let m = lab.compute_m(&int(a as i64), 20).map_err(|e| e.to_string())?;
        let member = m.member.ok_or_else(|| format!("m({a}): no member found up to 20"))?;
        match m.status {
            MStatus::Exact => ensure(member == want, || format!("m({a}) = {member}, expected {want}"))?,
            MStatus::Bracketed => {
                ensure(a != 47, || "m(47) must be exact".into())?;
                ensure(member >= want && (member == want || m.unresolved.contains(&want)), || {
                    format!("m({a}): member {member} with unresolved {:?} contradicts {want}", m.unresolved)
                })?;
            }
            MStatus::NotFound => return Err(format!("m({a}) not found")),
        }
        notes.push(format!("m({a}) = {member} [{:?}]", m.status));
    }
    Ok(notes.join(", "))
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(Int::from(rng.gen_range(-9i64..=9)), Int::from(rng.gen_range(1i64..=5)))
}

fn nonzero_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let r = small_rat(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

fn small_poly(rng: &mut ChaCha8Rng) -> RatFunc1 {
    let deg = rng.gen_range(0..=2);
    RatFunc1::poly(Poly::new((0..=deg).map(|_| small_rat(rng)).collect()))
}

fn form_value(f: &Form, x: &Rat, y: &Rat) -> Rat {
    let n = f.coeffs.len() as i64 - 1;
    f.coeffs.iter().enumerate().map(|(k, c)| c * rat_pow(x, n - k as i64) * rat_pow(y, k as i64)).sum()
}

/// Value of `f` at `(x, y)` recomputed from the description, without `FDesc::eval`.
fn oracle(f: &FDesc, x: &Rat, y: &Rat) -> Option<Rat> {
    let div = |n: Rat, d: Rat| (!d.is_zero()).then(|| n / d);
    match f {
        FDesc::Linear { a, b } => Some(a * x + b),
        FDesc::Mobius { g1, g2, h1, h2 } => {
            div(x * g1.eval(y)? + g2.eval(y)?, x * h1.eval(y)? + h2.eval(y)?)
        }
        FDesc::Quadratic { u, v, w } => Some(u * x * x + v * x * y + w * y * y),
        FDesc::FormRatio { num, den } => div(form_value(num, x, y), form_value(den, x, y)),
        FDesc::Bihomo { d, variant } => {
            let diff = y * y - rat_pow(x, *d as i64);
            match variant {
                BihomoVariant::Ratio => div(diff, x.clone()),
                BihomoVariant::Difference => Some(diff),
            }
        }
        FDesc::CubeSum => Some(x * x * x + y * y * y),
    }
}

fn replay(ws: &WitnessSet) -> Result<(), String> {
    for w in &ws.witnesses {
        let want = &ws.a * rat_pow(&ws.q, w.i);
        let got = oracle(&ws.f, &w.x, &w.y);
        ensure(got.as_ref() == Some(&want), || format!("{}: i={} gives {got:?}, want {want}", ws.f, w.i))?;
    }
    Ok(())
}

fn run_trials(
    name: &str,
    rng: &mut ChaCha8Rng,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Option<WitnessSet>,
) -> Result<String, String> {
    let mut emitted = 0;
    let mut attempts = 0;
    while emitted < CONSTRUCTION_TRIALS {
        attempts += 1;
        ensure(attempts <= 50 * CONSTRUCTION_TRIALS, || format!("{name}: only {emitted} sets from {attempts} draws"))?;
        if let Some(ws) = make(rng) {
            replay(&ws).map_err(|e| format!("{name}: {e}"))?;
            emitted += 1;
        }
    }
    Ok(format!("{name} {emitted}/{attempts}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0);
    let mut notes = Vec::new();
    notes.push(run_trials("class1", &mut rng, |r| {
        let (g1, g2, h1, h2) = (small_poly(r), small_poly(r), small_poly(r), small_poly(r));
        class1_progression(&g1, &g2, &h1, &h2, &nonzero_rat(r), &nonzero_rat(r), 5).ok()
    })?);
    notes.push(run_trials("class2", &mut rng, |r| {
        let (u, v, w) = (small_rat(r), small_rat(r), small_rat(r));
        let seeds = (small_rat(r), small_rat(r), small_rat(r), small_rat(r));
        class2_progression(&u, &v, &w, (&seeds.0, &seeds.1), (&seeds.2, &seeds.3), 5).ok()
    })?);
    notes.push(run_trials("class3", &mut rng, |r| {
        let d2 = r.gen_range(1..=3);
        let d1 = if r.gen_bool(0.5) { d2 + 1 } else { d2 - 1 };
        let f1 = Form::new((0..=d1).map(|_| small_rat(r)).collect());
        let f2 = Form::new((0..=d2).map(|_| small_rat(r)).collect());
        class3_progression(&f1, &f2, &nonzero_rat(r), &nonzero_rat(r), &nonzero_rat(r), 5).ok()
    })?);
    for d in [3, 5] {
        for variant in [BihomoVariant::Ratio, BihomoVariant::Difference] {
            notes.push(run_trials(&format!("bihomo d={d} {variant:?}"), &mut rng, |r| {
                let seeds = BihomoSeeds { p0: small_rat(r), p1: small_rat(r), q0: small_rat(r), q1: small_rat(r) };
                bihomo_construct(d, variant, &nonzero_rat(r), &seeds, 5).ok()
            })?);
        }
    }
    notes.push(run_trials("cq2", &mut rng, |r| {
        let (qq, u, v) = (int(r.gen_range(2..=12)), int(r.gen_range(-30..=30)), int(r.gen_range(-30..=30)));
        let (a, ws) = cq2_family(&qq, &u, &v, 3).ok()?;
        (rat_int(&a) == ws.a && ws.q == rat_int(&(&qq * &qq))).then_some(ws)
    })?);
    Ok(notes.join(", "))
}

fn criterion_10() -> Outcome {
    let reports = identity_suite(IDENTITY_TRIALS, 0x1d);
    ensure(reports.len() >= 5, || format!("only {} identities", reports.len()))?;
    for r in &reports {
        ensure(r.passed && r.trials >= IDENTITY_TRIALS, || format!("{}: {} ({} trials)", r.name, r.detail, r.trials))?;
    }
    Ok(format!("{} identities x {IDENTITY_TRIALS} points, zero failures", reports.len()))
}

fn criterion_11() -> Outcome {
    let base = rank_bounds(&int(0), &int(1), Budget::default()).map_err(|e| e.to_string())?;
    ensure(base.upper == 0, || "y^2 = x^3 + x is not certified rank 0".into())?;
    let target = Curve::bx(Rat::one()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4b11);
    let mut seen = BTreeSet::new();
    while seen.len() < KILLER_TRIALS {
        let (a, _) = fourth_power_free_part(&int(rng.gen_range(2..=1_000_000))).unwrap();
        if a.is_one() || !seen.insert(a.clone()) {
            continue;
        }
        let proof = killer_Q(&a).map_err(|e| format!("a={a}: {e}"))?;
        let aq = &a * &proof.q;
        ensure(int_root_exact(&aq, 4).is_some(), || format!("a={a}: aQ = {aq} is not a fourth power"))?;
        ensure(proof.twisted == target && proof.verify(), || format!("a={a}: twisted curve {}", proof.twisted))?;
    }
    Ok(format!("{KILLER_TRIALS} values of a: aQ is a fourth power, curve twists to y^2 = x^3 + x of rank 0"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("ranks and generators of y^2 = x^3 + 47*2^i x", LIMIT_1, criterion_1),
        ("rank-0 proof and the 257 transcript", LIMIT_2, criterion_2),
        ("fixed-a worked example a=3, p=4, v=2", LIMIT_3, criterion_3),
        ("(3, 17) witnesses", LIMIT_4, criterion_4),
        ("sums of two cubes, ratio 7", LIMIT_5, criterion_5),
        ("Mordell points for a = 33, Q = 2", LIMIT_6, criterion_6),
        ("initial segment of C_2", LIMIT_7, criterion_7),
        ("m(a) spot checks", LIMIT_8, criterion_8),
        ("construction property suite", LIMIT_9, criterion_9),
        ("identity suite", LIMIT_10, criterion_10),
        ("killer quotient", LIMIT_11, criterion_11),
    ];
    let mut failed = 0;
    for (n, (name, limit, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = t.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed > *limit {
                Err(format!("took {elapsed:.1?}, limit {limit:?} ({msg})"))
            } else {
                Ok(msg)
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2}: {name} [{elapsed:.2?}] {msg}", n + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} [{elapsed:.2?}] {msg}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
