use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use geoprog::birat::{self, build_fixeda, cube_curve, cubic_to_weierstrass, weierstrass_to_cubic, witnesses_from_point};
use geoprog::descent2::{rank_bounds_curve, Budget};
use geoprog::ellcurve::{Curve, Point};
use geoprog::exactnum::{fmt_rat, parse_int, parse_rat, rat_pow, rat_sqrt, Int, Rat};
use geoprog::lab::{average_a, Lab, MStatus};
use geoprog::polynom::{Poly, RatFunc1};
use geoprog::progressions::{
    bihomo_construct, class1_progression, class2_progression, class3_progression, cq2_family, killer_Q, BihomoSeeds,
    BihomoVariant, Form,
};
use geoprog::store::{Family, Store};

/// Above this `amax` the scans need `--long`.
const SHORT_AMAX: u64 = 10_000;

#[derive(Parser)]
#[command(name = "geoprog", version)]
#[command(about = "Geometric progressions in value sets of rational functions")]
struct Cli {
    /// Print JSON instead of tables
    #[arg(long, global = true)]
    json: bool,

    /// Do not read or write the rank cache
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    /// y^2 = x^3 + a Q^i x
    Bx,
    /// y^2 = x^3 + a Q^i
    Mordell,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bx => Family::Bx,
            FamilyArg::Mordell => Family::Mordell,
        }
    }
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn int_arg(s: &str) -> Result<Int, String> {
    parse_int(s).map_err(|e| e.to_string())
}

/// `c0,c1,...` (lowest degree first), optionally `;d0,d1,...` for a denominator.
fn ratfunc_arg(s: &str) -> Result<RatFunc1, String> {
    let poly = |t: &str| -> Result<Poly, String> {
        t.split(',').map(|c| rat_arg(c.trim())).collect::<Result<Vec<_>, _>>().map(Poly::new)
    };
    match s.split_once(';') {
        None => Ok(RatFunc1::poly(poly(s)?)),
        Some((n, d)) => RatFunc1::new(poly(n)?, poly(d)?).map_err(|e| e.to_string()),
    }
}

/// `c0,c1,...` for `sum c_k x^(n-k) y^k`.
fn form_arg(s: &str) -> Result<Form, String> {
    s.split(',').map(|c| rat_arg(c.trim())).collect::<Result<Vec<_>, _>>().map(Form::new)
}

#[derive(Subcommand)]
enum Command {
    /// Check that a point lies on E_i(a, Q) and has infinite order
    VerifyPoint {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        a: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        q: Rat,
        #[arg(long)]
        i: u32,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        x: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        y: Rat,
    },
    /// Rank bounds of y^2 = x^3 + a2 x^2 + a4 x + a6, as JSON
    Rank {
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rat_arg)]
        a2: Rat,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rat_arg)]
        a4: Rat,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rat_arg)]
        a6: Rat,
        /// Largest homogeneous-space search bound
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Decide whether G(a, Q) lies in the value set
    Membership {
        #[arg(long, value_parser = int_arg)]
        a: Int,
        #[arg(long, value_parser = int_arg)]
        q: Int,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Members of C_Q up to amax, with its counting function
    Cq {
        #[arg(long, value_parser = int_arg)]
        q: Int,
        #[arg(long)]
        amax: u64,
        /// CSV `a,verdict`
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV `x,count_confirmed,count_unresolved`
        #[arg(long)]
        counting: Option<PathBuf>,
        /// Allow amax above 10^4
        #[arg(long)]
        long: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Smallest proper quotient m(a)
    Ma {
        #[arg(long, value_parser = int_arg)]
        a: Int,
        #[arg(long)]
        qmax: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Values a <= amax with y^2 = x^3 + a x of positive rank
    Rset {
        #[arg(long)]
        amax: u64,
        /// Also compute m(a) for confirmed a and write `n,a,m,status,average` here
        #[arg(long)]
        m_out: Option<PathBuf>,
        /// Quotient bound used with --m-out
        #[arg(long, default_value_t = 20)]
        qmax: u64,
        #[arg(long)]
        long: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// a <= amax lying in C_Q for every qlo <= Q <= qhi
    Intersect {
        #[arg(long)]
        qlo: u64,
        #[arg(long)]
        qhi: u64,
        #[arg(long)]
        amax: u64,
        #[arg(long)]
        long: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Build witness sets from the explicit constructions, as JSON
    Construct {
        #[command(subcommand)]
        kind: Construct,
    },
    /// The fixed-a curve E_a(p, v) and, with --u, the quotient and witnesses
    Fixeda {
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        a: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        p: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        v: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        u: Option<Rat>,
    },
    /// Map between y^2 = x^3 - 432 A^2 and x^3 + y^3 = A
    Cubicmap {
        #[arg(long = "A", allow_hyphen_values = true, value_parser = rat_arg)]
        big_a: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        x: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        y: Rat,
        /// From the cubic to the Weierstrass curve
        #[arg(long)]
        inverse: bool,
    },
    /// Randomized exact checks of the fixed-a identities
    Identities {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// f = (x g1(y) + g2(y)) / (x h1(y) + h2(y))
    Class1 {
        #[arg(long, allow_hyphen_values = true, value_parser = ratfunc_arg)]
        g1: RatFunc1,
        #[arg(long, allow_hyphen_values = true, value_parser = ratfunc_arg)]
        g2: RatFunc1,
        #[arg(long, allow_hyphen_values = true, value_parser = ratfunc_arg)]
        h1: RatFunc1,
        #[arg(long, allow_hyphen_values = true, value_parser = ratfunc_arg)]
        h2: RatFunc1,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        a: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        q: Rat,
        #[arg(long, default_value_t = 5)]
        n: u32,
    },
    /// f = u x^2 + v x y + w y^2, seeds a ~ (r, s), Q ~ (u2, v2)
    Class2 {
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        u: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        v: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        w: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        r: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        s: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        u2: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        v2: Rat,
        #[arg(long, default_value_t = 5)]
        n: u32,
    },
    /// f = f1(x, y) / f2(x, y) for binary forms of different degree
    Class3 {
        #[arg(long, allow_hyphen_values = true, value_parser = form_arg)]
        f1: Form,
        #[arg(long, allow_hyphen_values = true, value_parser = form_arg)]
        f2: Form,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        u: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        v: Rat,
        #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
        q: Rat,
        #[arg(long, default_value_t = 5)]
        n: u32,
    },
    /// f = (y^2 - x^d)/x or y^2 - x^d from two seed points
    Bihomo(BihomoArgs),
    /// The two-parameter family for f = (y^2 - x^3)/x
    Cq2 {
        #[arg(long, allow_hyphen_values = true, value_parser = int_arg)]
        q: Int,
        #[arg(long, allow_hyphen_values = true, value_parser = int_arg)]
        u: Int,
        #[arg(long, allow_hyphen_values = true, value_parser = int_arg)]
        v: Int,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// The quotient making aQ a fourth power
    Killer {
        #[arg(long, value_parser = int_arg)]
        a: Int,
    },
}

#[derive(Args)]
struct BihomoArgs {
    #[arg(long)]
    d: u32,
    #[arg(long, value_enum, default_value = "ratio")]
    variant: VariantArg,
    #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
    q: Rat,
    #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
    p0: Rat,
    #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
    p1: Rat,
    #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
    q0: Rat,
    #[arg(long, allow_hyphen_values = true, value_parser = rat_arg)]
    q1: Rat,
    #[arg(long, default_value_t = 3)]
    n: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Ratio,
    Difference,
}

/// Wrong or unusable input; exits with the usage code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

struct Ctx {
    json: bool,
    no_cache: bool,
}

impl Ctx {
    fn lab(&self, budget: Option<u64>) -> Result<Lab> {
        let budget = budget.map(Budget::with_cap).unwrap_or_default();
        if self.no_cache {
            return Ok(Lab::new(budget));
        }
        let store = Store::from_env().context("opening the rank cache")?;
        if let Some(p) = store.path() {
            log::info!("cache {} ({} records)", p.display(), store.len());
        }
        Ok(Lab::with_store(budget, store))
    }

    fn emit(&self, value: &Value, human: impl FnOnce() -> String) {
        if self.json {
            say(&format!("{}\n", serde_json::to_string_pretty(value).expect("json")));
        } else {
            say(&human());
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn say(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

fn fmt_point(p: &Point) -> String {
    match p {
        Point::Infinity => "O".into(),
        Point::Affine(x, y) => format!("({}, {})", fmt_rat(x), fmt_rat(y)),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn join(v: &[Int]) -> String {
    v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

fn check_amax(amax: u64, long: bool) -> Result<()> {
    if amax > SHORT_AMAX && !long {
        return Err(usage(format!("amax above {SHORT_AMAX} needs --long")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let ctx = Ctx { json: cli.json, no_cache: cli.no_cache };
    match cli.cmd {
        Command::VerifyPoint { family, a, q, i, x, y } => {
            let coeff = &a * rat_pow(&q, i as i64);
            let curve = match family {
                FamilyArg::Bx => Curve::bx(coeff),
                FamilyArg::Mordell => Curve::mordell(coeff),
            }
            .map_err(|e| usage(e.to_string()))?;
            let p = Point::new(x.clone(), y);
            let on = curve.on_curve(&p);
            let infinite = if on { Some(curve.is_infinite_order(&p)?) } else { None };
            let v = json!({
                "curve": curve.to_string(),
                "point": p,
                "on_curve": on,
                "infinite_order": infinite,
                "x_nonzero": !x.is_zero(),
            });
            ctx.emit(&v, || {
                let order = match infinite {
                    Some(true) => "infinite",
                    Some(false) => "finite",
                    None => "-",
                };
                format!("curve     {curve}\npoint     {}\non_curve  {on}\norder     {order}\n", fmt_point(&p))
            });
            Ok(if on { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Rank { a2, a4, a6, budget } => {
            let curve = Curve::new(a2, a4, a6).map_err(|e| usage(e.to_string()))?;
            let is_bx = curve.a6.is_zero() && curve.a2.is_integer() && curve.a4.is_integer();
            let r = if is_bx {
                ctx.lab(budget)?.rank_bx(&curve.a2.to_integer(), &curve.a4.to_integer(), ctx.lab_budget(budget))?
            } else {
                rank_bounds_curve(&curve, ctx.lab_budget(budget))?
            };
            say(&format!("{}\n", serde_json::to_string_pretty(&r)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Membership { a, q, family, budget } => {
            let lab = ctx.lab(budget)?;
            let m = lab.membership(&a, &q, family.into()).map_err(|e| usage(e.to_string()))?;
            ctx.emit(&serde_json::to_value(&m)?, || {
                let mut s = String::new();
                writeln!(s, "a={} Q={} family={:?}", m.a, m.q, m.family).unwrap();
                writeln!(s, "{:>2}  {:>14}  {:>5}  {:>5}  {:<12}  witness", "i", "coefficient", "lower", "upper", "status")
                    .unwrap();
                for r in &m.per_index {
                    let w = r.rank.witnesses.first().map(fmt_point).unwrap_or_else(|| "-".into());
                    writeln!(
                        s,
                        "{:>2}  {:>14}  {:>5}  {:>5}  {:<12}  {w}",
                        r.i,
                        r.coeff,
                        r.rank.lower,
                        r.rank.upper,
                        format!("{:?}", r.rank.status)
                    )
                    .unwrap();
                }
                if !m.torsion_only.is_empty() {
                    writeln!(s, "torsion-only indices: {:?}", m.torsion_only).unwrap();
                }
                writeln!(s, "verdict: {}", m.verdict).unwrap();
                s
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Cq { q, amax, out, counting, long, budget } => {
            check_amax(amax, long)?;
            let lab = ctx.lab(budget)?;
            let table = lab.compute_cq(&q, amax).map_err(|e| usage(e.to_string()))?;
            if let Some(path) = out {
                let rows = table.rows.iter().map(|r| vec![r.a.to_string(), r.verdict.to_string()]);
                write_csv(&path, &["a", "verdict"], rows)?;
            }
            if let Some(path) = counting {
                let rows = table
                    .counting
                    .iter()
                    .map(|c| vec![c.x.to_string(), c.confirmed.to_string(), c.unresolved.to_string()]);
                write_csv(&path, &["x", "count_confirmed", "count_unresolved"], rows)?;
            }
            let (members, unresolved) = (table.members(), table.unresolved());
            let v = json!({
                "q": q.to_string(),
                "amax": amax,
                "members": members.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                "unresolved": unresolved.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            });
            ctx.emit(&v, || {
                format!(
                    "C_{q} on [1, {amax}]: {} confirmed, {} unresolved\nmembers:    {}\nunresolved: {}\n",
                    members.len(),
                    unresolved.len(),
                    join(&members),
                    join(&unresolved)
                )
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Ma { a, qmax, budget } => {
            let lab = ctx.lab(budget)?;
            let m = lab.compute_m(&a, qmax).map_err(|e| usage(e.to_string()))?;
            ctx.emit(&serde_json::to_value(&m)?, || match (m.status, m.member) {
                (MStatus::Exact, Some(q)) => format!("m({a}) = {q}\n"),
                (MStatus::Bracketed, Some(q)) => format!("m({a}) <= {q}, unresolved Q: {:?}\n", m.unresolved),
                _ => format!("m({a}) > {qmax} or unresolved, unresolved Q: {:?}\n", m.unresolved),
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Rset { amax, m_out, qmax, long, budget } => {
            check_amax(amax, long)?;
            let lab = ctx.lab(budget)?;
            let r = lab.compute_r(amax)?;
            if let Some(path) = m_out {
                let mut rows = Vec::new();
                let mut ms: Vec<Int> = Vec::new();
                // the average is only printed while every m so far is exact
                let mut prefix_ok = true;
                for (n, a) in (1..).zip(&r.confirmed) {
                    let m = lab.compute_m(a, qmax)?;
                    let value = m.member.map(|q| q.to_string()).unwrap_or_default();
                    prefix_ok &= m.status == MStatus::Exact;
                    let avg = match m.member {
                        Some(q) if prefix_ok => {
                            ms.push(Int::from(q));
                            fmt_rat(&average_a(&ms, ms.len())?)
                        }
                        _ => String::new(),
                    };
                    rows.push(vec![n.to_string(), a.to_string(), value, format!("{:?}", m.status), avg]);
                }
                write_csv(&path, &["n", "a", "m", "status", "average"], rows)?;
            }
            ctx.emit(&serde_json::to_value(&r)?, || {
                format!("R on [1, {amax}]:\nconfirmed:  {}\nunresolved: {}\n", join(&r.confirmed), join(&r.unresolved))
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Intersect { qlo, qhi, amax, long, budget } => {
            check_amax(amax, long)?;
            if qlo > qhi || qhi < 2 {
                return Err(usage("need 2 <= qhi and qlo <= qhi"));
            }
            let lab = ctx.lab(budget)?;
            let r = lab.intersections(qlo, qhi, amax)?;
            ctx.emit(&serde_json::to_value(&r)?, || {
                format!(
                    "C_Q for {qlo} <= Q <= {qhi} on [1, {amax}]:\nconfirmed:  {}\nunresolved: {}\n",
                    join(&r.confirmed),
                    join(&r.unresolved)
                )
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct { kind } => {
            let v = construct(kind).map_err(|e| usage(e.to_string()))?;
            say(&format!("{}\n", serde_json::to_string_pretty(&v)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixeda { a, p, v, u } => fixeda(&ctx, a, p, v, u),
        Command::Cubicmap { big_a, x, y, inverse } => {
            let curve = cube_curve(&big_a).map_err(|e| usage(e.to_string()))?;
            if inverse {
                if &x * &x * &x + &y * &y * &y != big_a {
                    eprintln!("({}, {}) is not on x^3 + y^3 = {}", fmt_rat(&x), fmt_rat(&y), fmt_rat(&big_a));
                    return Ok(ExitCode::from(1));
                }
                let p = cubic_to_weierstrass(&big_a, &x, &y)?;
                let v = json!({ "curve": curve.to_string(), "point": p });
                ctx.emit(&v, || format!("{curve}\n{}\n", fmt_point(&p)));
            } else {
                let p = Point::new(x, y);
                if !curve.on_curve(&p) {
                    eprintln!("{} is not on {curve}", fmt_point(&p));
                    return Ok(ExitCode::from(1));
                }
                let (cx, cy) = weierstrass_to_cubic(&big_a, &p)?;
                let v = json!({ "x": fmt_rat(&cx), "y": fmt_rat(&cy), "sum_of_cubes": fmt_rat(&big_a) });
                ctx.emit(&v, || format!("x^3 + y^3 = {}\n({}, {})\n", fmt_rat(&big_a), fmt_rat(&cx), fmt_rat(&cy)));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Identities { trials, seed } => {
            log::info!("identity suite: trials={trials} seed={seed}");
            let reports = birat::identity_suite(trials, seed);
            ctx.emit(&serde_json::to_value(&reports)?, || {
                reports
                    .iter()
                    .map(|r| {
                        let tag = if r.passed { "PASS" } else { "FAIL" };
                        format!("{tag}  {} ({} trials) {}\n", r.name, r.trials, r.detail)
                    })
                    .collect()
            });
            Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

impl Ctx {
    fn lab_budget(&self, budget: Option<u64>) -> Budget {
        budget.map(Budget::with_cap).unwrap_or_default()
    }
}

fn construct(kind: Construct) -> Result<Value> {
    Ok(match kind {
        Construct::Class1 { g1, g2, h1, h2, a, q, n } => {
            serde_json::to_value(class1_progression(&g1, &g2, &h1, &h2, &a, &q, n)?)?
        }
        Construct::Class2 { u, v, w, r, s, u2, v2, n } => {
            serde_json::to_value(class2_progression(&u, &v, &w, (&r, &s), (&u2, &v2), n)?)?
        }
        Construct::Class3 { f1, f2, u, v, q, n } => serde_json::to_value(class3_progression(&f1, &f2, &u, &v, &q, n)?)?,
        Construct::Bihomo(b) => {
            let variant = match b.variant {
                VariantArg::Ratio => BihomoVariant::Ratio,
                VariantArg::Difference => BihomoVariant::Difference,
            };
            let seeds = BihomoSeeds { p0: b.p0, p1: b.p1, q0: b.q0, q1: b.q1 };
            serde_json::to_value(bihomo_construct(b.d, variant, &b.q, &seeds, b.n)?)?
        }
        Construct::Cq2 { q, u, v, n } => {
            let (a, ws) = cq2_family(&q, &u, &v, n)?;
            json!({ "a": a.to_string(), "witnesses": ws })
        }
        Construct::Killer { a } => serde_json::to_value(killer_Q(&a)?)?,
    })
}

fn fixeda(ctx: &Ctx, a: Rat, p: Rat, v: Rat, u: Option<Rat>) -> Result<ExitCode> {
    let inst = build_fixeda(&a, &p, &v).map_err(|e| usage(e.to_string()))?;
    let coeffs: Vec<String> = inst.quartic.c.iter().map(fmt_rat).collect();
    let mut out = json!({
        "a": fmt_rat(&inst.a),
        "p": fmt_rat(&inst.p),
        "v": fmt_rat(&inst.v),
        "f1": fmt_rat(&inst.f1),
        "f2": fmt_rat(&inst.f2),
        "curve": inst.curve.to_string(),
        "quartic": coeffs,
        "r": fmt_rat(&inst.r),
        "degenerate": inst.degenerate,
    });
    let mut code = ExitCode::SUCCESS;
    if let Some(u) = &u {
        let m = birat::ca_factor(&a, &p, u);
        let y = rat_sqrt(&inst.quartic.eval(u)).filter(|_| !m.is_zero()).map(|s| s / &m);
        match y {
            Some(y) => {
                let ws = witnesses_from_point(&inst, u, &y)?;
                out["u"] = json!(fmt_rat(u));
                out["y"] = json!(fmt_rat(&y));
                out["Q"] = json!(fmt_rat(&ws.q));
                out["witnesses"] = serde_json::to_value(&ws)?;
            }
            None => {
                out["u"] = json!(fmt_rat(u));
                out["error"] = json!("no rational point of C_a with this u");
                code = ExitCode::from(1);
            }
        }
    }
    ctx.emit(&out, || {
        let mut s = String::new();
        writeln!(s, "f1 = {}\nf2 = {}", fmt_rat(&inst.f1), fmt_rat(&inst.f2)).unwrap();
        writeln!(s, "E_a: {}", inst.curve).unwrap();
        writeln!(s, "F_a(u) coefficients: {}", coeffs.join(", ")).unwrap();
        if inst.degenerate {
            writeln!(s, "warning: p (p^2 + a) is a square").unwrap();
        }
        if let Some(q) = out.get("Q") {
            writeln!(s, "y = {}\nQ = {}", out["y"].as_str().unwrap_or(""), q.as_str().unwrap_or("")).unwrap();
            for w in out["witnesses"]["witnesses"].as_array().into_iter().flatten() {
                writeln!(s, "  i={} x={} y={}", w["i"], w["x"].as_str().unwrap_or(""), w["y"].as_str().unwrap_or(""))
                    .unwrap();
            }
        } else if u.is_some() {
            writeln!(s, "no rational point of C_a with this u").unwrap();
        }
        s
    });
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
