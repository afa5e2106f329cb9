//! Experiments on the sets `C_Q = {a : a Q^i in V_f for all i}`.
//!
//! Membership of `a` for the quotient `Q` is decided curve by curve: every
//! curve `y^2 = x^3 + a Q^i x` (`i = 0..3`) or `y^2 = x^3 + a Q^i`
//! (`i = 0..5`) must have positive rank. Everything that can stay unresolved
//! is reported as a pair (confirmed, unresolved).

use std::time::Instant;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::birat::{build_fixeda, BiratError};
use crate::descent2::{positive_rank_witness, rank_bounds, Budget, NO_UPPER_BOUND, DescentError, RankResult, RankStatus};
use crate::ellcurve::{Curve, CurveError, Point};
use crate::exactnum::{
    classify_solution_level, fmt_rat, fourth_power_free_part, int_root_exact, is_rat_power, rat_int, Int, NumError,
    Rat, SolutionLevel,
};
use crate::ptsearch::{first_infinite_order, SearchParams};
use crate::store::{ser_int, CacheKey, CacheRecord, Family, Store};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("a must be positive, got {0}")]
    NonPositive(Int),
    #[error("quotient {0} is not {1}-th-power-free")]
    BadQuotient(Int, u32),
    #[error("{a} is not known to be in R (rank bounds {lower}..{upper})")]
    NotInR { a: Int, lower: u32, upper: u32 },
    #[error("need {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Birat(#[from] BiratError),
    #[error("cache: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Verdict {
    Member,
    NonMember,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Member => "Member",
            Verdict::NonMember => "NonMember",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexRank {
    pub i: u32,
    /// The curve coefficient `a Q^i`.
    #[serde(serialize_with = "ser_int")]
    pub coeff: Int,
    pub rank: RankResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipResult {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    #[serde(serialize_with = "ser_int")]
    pub q: Int,
    pub family: Family,
    pub per_index: Vec<IndexRank>,
    pub verdict: Verdict,
    /// Indices whose curve has rank 0 but torsion points with `x != 0`
    /// (`a Q^i = 4 t^4`); these count as failures of the rank criterion.
    pub torsion_only: Vec<u32>,
}

impl MembershipResult {
    fn decide(per_index: &[IndexRank]) -> Verdict {
        if per_index.iter().any(|r| r.rank.upper == 0) {
            Verdict::NonMember
        } else if per_index.iter().all(|r| r.rank.lower >= 1) {
            Verdict::Member
        } else {
            Verdict::Undetermined
        }
    }

    pub fn witnesses(&self) -> Vec<(u32, &Point)> {
        self.per_index.iter().filter_map(|r| r.rank.witnesses.first().map(|w| (r.i, w))).collect()
    }

    /// Short stable digest of the first witness of every index.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (i, w) in self.witnesses() {
            let s = match w {
                Point::Infinity => format!("{i}:O;"),
                Point::Affine(x, y) => format!("{i}:{},{};", fmt_rat(x), fmt_rat(y)),
            };
            for b in s.bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub verdict: Verdict,
    pub digest: String,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub x: u64,
    pub confirmed: u64,
    pub unresolved: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CqTable {
    #[serde(serialize_with = "ser_int")]
    pub q: Int,
    pub rows: Vec<ExperimentRow>,
    pub counting: Vec<CountRow>,
}

impl CqTable {
    pub fn with_verdict(&self, v: Verdict) -> Vec<Int> {
        self.rows.iter().filter(|r| r.verdict == v).map(|r| r.a.clone()).collect()
    }

    pub fn members(&self) -> Vec<Int> {
        self.with_verdict(Verdict::Member)
    }

    pub fn unresolved(&self) -> Vec<Int> {
        self.with_verdict(Verdict::Undetermined)
    }
}

/// Confirmed and unresolved values of some set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Bracket {
    #[serde(serialize_with = "ser_ints")]
    pub confirmed: Vec<Int>,
    #[serde(serialize_with = "ser_ints")]
    pub unresolved: Vec<Int>,
}

fn ser_ints<S: serde::Serializer>(v: &[Int], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|n| n.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MStatus {
    /// Every smaller proper quotient is a NonMember.
    Exact,
    /// A member was found but some smaller quotients are unresolved.
    Bracketed,
    /// No member up to `qmax`.
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MValue {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    /// Smallest confirmed member quotient.
    pub member: Option<u64>,
    /// Smaller quotients left unresolved.
    pub unresolved: Vec<u64>,
    pub status: MStatus,
}

impl MValue {
    pub fn exact(&self) -> Option<u64> {
        (self.status == MStatus::Exact).then_some(self.member).flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ScanOutcome {
    Found {
        #[serde(serialize_with = "ser_int")]
        p0: Int,
        #[serde(serialize_with = "ser_int")]
        v0: Int,
        witness: Point,
    },
    Exhausted {
        tried: usize,
    },
}

/// Curve jobs with a shared cache.
pub struct Lab {
    pub budget: Budget,
    store: Store,
}

impl Lab {
    pub fn new(budget: Budget) -> Self {
        Lab { budget, store: Store::in_memory() }
    }

    pub fn with_store(budget: Budget, store: Store) -> Self {
        Lab { budget, store }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// Point-search bounds used for the Mordell family at this budget.
    pub fn mordell_params(&self) -> SearchParams {
        SearchParams::new(self.budget.cap.saturating_mul(16), (self.budget.cap / 32).max(1))
    }

    /// Cached rank bounds of `y^2 = x^3 + a x^2 + b x`.
    pub fn rank_bx(&self, a: &Int, b: &Int, budget: Budget) -> Result<RankResult> {
        let key = CacheKey::new(Family::Bx, a.clone(), b.clone(), budget.descriptor());
        if let Some(rec) = self.store.get(&key) {
            return Ok(rec.rank());
        }
        let r = rank_bounds(a, b, budget)?;
        self.store.put(CacheRecord::from_rank(&key, &r))?;
        Ok(r)
    }

    /// Search-only result for `y^2 = x^3 + k`: `lower` is 1 when an
    /// infinite-order point was found; no upper bound is computed.
    pub fn rank_mordell(&self, k: &Int) -> Result<RankResult> {
        let params = self.mordell_params();
        let descriptor = format!("ptsearch:{}/{}", params.max_num, params.max_den);
        let key = CacheKey::new(Family::Mordell, Int::zero(), k.clone(), descriptor);
        if let Some(rec) = self.store.get(&key) {
            return Ok(rec.rank());
        }
        let (k0, t) = sixth_power_free_part(k)?;
        let mut witnesses = Vec::new();
        if self.budget.cap > 0 {
            let reduced = Curve::mordell(rat_int(&k0))?;
            if let Some(p) = first_infinite_order(&reduced, &params)? {
                let (x, y) = match &p {
                    Point::Affine(x, y) => (x, y),
                    Point::Infinity => unreachable!("infinite-order point is affine"),
                };
                let t = rat_int(&t);
                witnesses.push(Point::new(x * &t * &t, y * &t * &t * &t));
            }
        }
        let r = RankResult {
            lower: witnesses.len() as u32,
            upper: NO_UPPER_BOUND,
            status: RankStatus::Undetermined,
            witnesses,
            budget_used: params.max_num,
        };
        self.store.put(CacheRecord::from_rank(&key, &r))?;
        Ok(r)
    }

    pub fn membership(&self, a: &Int, q: &Int, family: Family) -> Result<MembershipResult> {
        if !a.is_positive() {
            return Err(LabError::NonPositive(a.clone()));
        }
        let d = match family {
            Family::Bx => 4,
            Family::Mordell => 6,
        };
        if q < &Int::from(2) || !power_free(q, d)? {
            return Err(LabError::BadQuotient(q.clone(), d));
        }
        self.membership_unchecked(a, q, family)
    }

    fn membership_unchecked(&self, a: &Int, q: &Int, family: Family) -> Result<MembershipResult> {
        let n = match family {
            Family::Bx => 4,
            Family::Mordell => 6,
        };
        let coeffs: Vec<Int> = (0..n).map(|i| a * num_traits::pow(q.clone(), i)).collect();
        let per_index = match family {
            Family::Bx => {
                // rank-0 certificates need no search
                let quick = coeffs
                    .iter()
                    .map(|c| self.rank_bx(&Int::zero(), c, Budget::zero()))
                    .collect::<Result<Vec<_>>>()?;
                let ranks = if quick.iter().any(|r| r.upper == 0) {
                    quick
                } else {
                    coeffs
                        .iter()
                        .map(|c| self.rank_bx(&Int::zero(), c, self.budget))
                        .collect::<Result<Vec<_>>>()?
                };
                index_ranks(&coeffs, ranks)
            }
            Family::Mordell => {
                let ranks = coeffs.iter().map(|c| self.rank_mordell(c)).collect::<Result<Vec<_>>>()?;
                index_ranks(&coeffs, ranks)
            }
        };
        let torsion_only = match family {
            Family::Bx => per_index
                .iter()
                .filter(|r| r.rank.upper == 0 && has_order_four_points(&r.coeff))
                .map(|r| r.i)
                .collect(),
            Family::Mordell => Vec::new(),
        };
        let verdict = MembershipResult::decide(&per_index);
        Ok(MembershipResult { a: a.clone(), q: q.clone(), family, per_index, verdict, torsion_only })
    }

    /// Rows for `a = 1..=amax` plus the counting table of `C_Q`.
    pub fn compute_cq(&self, q: &Int, amax: u64) -> Result<CqTable> {
        if q < &Int::from(2) || !power_free(q, 4)? {
            return Err(LabError::BadQuotient(q.clone(), 4));
        }
        let rows = (1..=amax)
            .into_par_iter()
            .map(|a| {
                let t = Instant::now();
                let m = self.membership_unchecked(&Int::from(a), q, Family::Bx)?;
                Ok(ExperimentRow {
                    a: Int::from(a),
                    verdict: m.verdict,
                    digest: m.digest(),
                    millis: t.elapsed().as_millis() as u64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut counting = Vec::with_capacity(rows.len());
        let (mut confirmed, mut unresolved) = (0, 0);
        for (x, row) in (1..).zip(&rows) {
            match row.verdict {
                Verdict::Member => confirmed += 1,
                Verdict::Undetermined => unresolved += 1,
                Verdict::NonMember => {}
            }
            counting.push(CountRow { x, confirmed, unresolved });
        }
        Ok(CqTable { q: q.clone(), rows, counting })
    }

    /// `a <= amax` with `y^2 = x^3 + a x` of positive rank.
    pub fn compute_r(&self, amax: u64) -> Result<Bracket> {
        let ranks = (1..=amax)
            .into_par_iter()
            .map(|a| Ok((a, self.rank_bx(&Int::zero(), &Int::from(a), self.budget)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Bracket::default();
        for (a, r) in ranks {
            if r.lower >= 1 {
                out.confirmed.push(Int::from(a));
            } else if r.upper > 0 {
                out.unresolved.push(Int::from(a));
            }
        }
        Ok(out)
    }

    fn require_in_r(&self, a: &Int) -> Result<()> {
        let r = self.rank_bx(&Int::zero(), a, self.budget)?;
        if r.lower == 0 {
            return Err(LabError::NotInR { a: a.clone(), lower: r.lower, upper: r.upper });
        }
        Ok(())
    }

    /// Smallest proper quotient `Q <= qmax` with `a` in `C_Q`.
    pub fn compute_m(&self, a: &Int, qmax: u64) -> Result<MValue> {
        if !a.is_positive() {
            return Err(LabError::NonPositive(a.clone()));
        }
        self.require_in_r(a)?;
        let mut unresolved = Vec::new();
        for q in 2..=qmax {
            let level = classify_solution_level(&Rat::from_integer(Int::from(q)), 4)?;
            if matches!(level, SolutionLevel::Trivial | SolutionLevel::Level(2)) {
                continue;
            }
            let (reduced, _) = fourth_power_free_part(&Int::from(q))?;
            match self.membership_unchecked(a, &reduced, Family::Bx)?.verdict {
                Verdict::Member => {
                    let status = if unresolved.is_empty() { MStatus::Exact } else { MStatus::Bracketed };
                    return Ok(MValue { a: a.clone(), member: Some(q), unresolved, status });
                }
                Verdict::Undetermined => unresolved.push(q),
                Verdict::NonMember => {}
            }
        }
        Ok(MValue { a: a.clone(), member: None, unresolved, status: MStatus::NotFound })
    }

    /// `a <= amax` lying in `C_Q` for every `qlo <= Q <= qhi`.
    pub fn intersections(&self, qlo: u64, qhi: u64, amax: u64) -> Result<Bracket> {
        let quotients = (qlo.max(2)..=qhi)
            .map(|q| Ok(fourth_power_free_part(&Int::from(q))?.0))
            .collect::<Result<Vec<_>>>()?;
        let verdicts = (1..=amax)
            .into_par_iter()
            .map(|a| {
                let a = Int::from(a);
                let mut all = Verdict::Member;
                for q in &quotients {
                    match self.membership_unchecked(&a, q, Family::Bx)?.verdict {
                        Verdict::NonMember => return Ok((a, Verdict::NonMember)),
                        Verdict::Undetermined => all = Verdict::Undetermined,
                        Verdict::Member => {}
                    }
                }
                Ok((a, all))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Bracket::default();
        for (a, v) in verdicts {
            match v {
                Verdict::Member => out.confirmed.push(a),
                Verdict::Undetermined => out.unresolved.push(a),
                Verdict::NonMember => {}
            }
        }
        Ok(out)
    }

    /// First `(p0, v0)` whose curve `E_a(p0, v0)` has a point of infinite order.
    pub fn conjecture32_scan(&self, a: &Int, pset: &[Int], vset: &[Int]) -> Result<ScanOutcome> {
        self.require_in_r(a)?;
        let mut tried = 0;
        for p0 in pset {
            for v0 in vset {
                let ra = rat_int(a);
                let inst = match build_fixeda(&ra, &rat_int(p0), &rat_int(v0)) {
                    Ok(inst) if !inst.degenerate => inst,
                    Ok(_) | Err(BiratError::Degenerate(_) | BiratError::Singular) => continue,
                    Err(e) => return Err(e.into()),
                };
                tried += 1;
                let (f1, f2) = (inst.f1.to_integer(), inst.f2.to_integer());
                if let Some(witness) = positive_rank_witness(&-(&f1 + &f2), &(&f1 * &f2), self.budget)? {
                    return Ok(ScanOutcome::Found { p0: p0.clone(), v0: v0.clone(), witness });
                }
            }
        }
        Ok(ScanOutcome::Exhausted { tried })
    }
}

fn index_ranks(coeffs: &[Int], ranks: Vec<RankResult>) -> Vec<IndexRank> {
    coeffs
        .iter()
        .zip(ranks)
        .enumerate()
        .map(|(i, (c, rank))| IndexRank { i: i as u32, coeff: c.clone(), rank })
        .collect()
}

/// `n = 4 t^4`, so `y^2 = x^3 + n x` has the points `(2 t^2, +-4 t^3)` of order 4.
fn has_order_four_points(n: &Int) -> bool {
    let four = Int::from(4);
    n.is_positive() && n.is_multiple_of(&four) && int_root_exact(&(n / &four), 4).is_some()
}

fn power_free(n: &Int, d: u32) -> Result<bool> {
    Ok(crate::exactnum::factor(n)?.factors.iter().all(|(_, k)| *k < d))
}

/// `k = k0 t^6` with `k0` sixth-power-free.
fn sixth_power_free_part(k: &Int) -> Result<(Int, Int)> {
    let fac = crate::exactnum::factor(k)?;
    let mut k0 = Int::from(fac.unit);
    let mut t = Int::one();
    for (p, e) in &fac.factors {
        k0 *= num_traits::pow(p.clone(), (e % 6) as usize);
        t *= num_traits::pow(p.clone(), (e / 6) as usize);
    }
    Ok((k0, t))
}

/// `sum_{i <= x} m(a_i) / x` over the first `x` values of `ms`.
pub fn average_a(ms: &[Int], x: usize) -> Result<Rat> {
    if x == 0 || ms.len() < x {
        return Err(LabError::TooFew { need: x.max(1), got: ms.len() });
    }
    let sum: Int = ms[..x].iter().sum();
    Ok(Rat::new(sum, Int::from(x)))
}

/// `p0 (p0^2 + a)` is a rational square.
pub fn degenerate_seed(a: &Int, p0: &Int) -> bool {
    let n = p0 * (p0 * p0 + a);
    !n.is_negative() && is_rat_power(&rat_int(&n), 2)
}
