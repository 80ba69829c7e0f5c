//! Continued fractions: partial quotients, convergents `p_k/q_k`, the
//! denominator set `D(α)`, successors `q⁺`, and the finite inequalities that
//! convergent denominators satisfy.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::circle_arith::fixed::{Fixed, Rotation, Scale};
use crate::circle_arith::RealValue;
use crate::error::{Error, Result};

/// Default number of distinct convergent denominators to compute.
pub const DEFAULT_DEPTH: usize = 40;

/// Upper bound on the floor-invert steps spent looking for a surd's period.
const PERIOD_SEARCH_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: usize,
    pub p: i128,
    pub q: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Periodicity {
    /// Index (into `quotients`, so `a₁` is index 0) where the period starts.
    pub preperiod: usize,
    pub period: Vec<u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxStatus {
    /// Eventually periodic expansion; the bound is exact.
    Periodic,
    /// No period found; the bound covers only the computed quotients.
    DepthLimited,
    /// Finite expansion (rational input).
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxVerdict {
    pub status: ApproxStatus,
    pub max_quotient: Option<u128>,
}

impl ApproxVerdict {
    pub fn is_badly_approximable(&self) -> bool {
        self.status == ApproxStatus::Periodic
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentTable {
    alpha: RealValue,
    a0: i128,
    quotients: Vec<u128>,
    convergents: Vec<Convergent>,
    periodicity: Option<Periodicity>,
    terminated: bool,
}

fn floor_i128(x: &RealValue) -> Result<i128> {
    x.floor().to_i128().ok_or(Error::CoefficientOverflow)
}

struct Expansion {
    a0: i128,
    quotients: Vec<u128>,
    periodicity: Option<Periodicity>,
    terminated: bool,
}

/// Floor-and-invert recursion. Produces at least `min_quotients` quotients
/// (fewer only if the expansion terminates) and, for surds, keeps going
/// until the complete quotients repeat.
fn expand_quotients(alpha: &RealValue, min_quotients: usize) -> Result<Expansion> {
    let a0 = floor_i128(alpha)?;
    let mut x = alpha.checked_sub(&RealValue::integer(a0))?;
    let mut quotients = Vec::new();
    let mut seen: HashMap<RealValue, usize> = HashMap::new();
    let mut periodicity = None;
    let track_period = !alpha.is_rational();
    loop {
        if x.is_zero() {
            return Ok(Expansion {
                a0,
                quotients,
                periodicity,
                terminated: true,
            });
        }
        let complete = x.recip()?;
        if track_period && periodicity.is_none() {
            if let Some(&start) = seen.get(&complete) {
                periodicity = Some(Periodicity {
                    preperiod: start,
                    period: quotients[start..].to_vec(),
                });
            } else {
                seen.insert(complete.clone(), quotients.len());
            }
        }
        let done_quotients = quotients.len() >= min_quotients;
        if done_quotients && (periodicity.is_some() || !track_period) {
            break;
        }
        if done_quotients && quotients.len() >= PERIOD_SEARCH_LIMIT {
            break;
        }
        let a = floor_i128(&complete)?;
        quotients.push(a.to_u128().ok_or(Error::CoefficientOverflow)?);
        x = complete.checked_sub(&RealValue::integer(a))?;
    }
    Ok(Expansion {
        a0,
        quotients,
        periodicity,
        terminated: false,
    })
}

impl ConvergentTable {
    /// Expands `alpha` until `depth` distinct denominators are known.
    ///
    /// Fails with [`Error::RationalExhausted`] when a rational `alpha` runs out
    /// of terms first; use [`ConvergentTable::expand_available`] to accept a
    /// shorter table instead.
    pub fn expand(alpha: &RealValue, depth: usize) -> Result<Self> {
        let table = Self::expand_available(alpha, depth)?;
        let available = table.distinct_denominators();
        if available < depth {
            return Err(Error::RationalExhausted {
                available,
                requested: depth,
            });
        }
        Ok(table)
    }

    pub fn expand_available(alpha: &RealValue, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidDepth { min: 1, got: 0 });
        }
        // `depth` distinct denominators never need more than `depth` quotients
        let exp = expand_quotients(alpha, depth)?;
        let mut convergents = Vec::new();
        let (mut p_prev, mut q_prev) = (1i128, 0u128);
        let (mut p, mut q) = (exp.a0, 1u128);
        convergents.push(Convergent { k: 0, p, q });
        let mut distinct = 1;
        for (i, &a) in exp.quotients.iter().enumerate() {
            if distinct >= depth {
                break;
            }
            let ai = a as i128;
            let p_next = ai
                .checked_mul(p)
                .and_then(|v| v.checked_add(p_prev))
                .ok_or(Error::CoefficientOverflow)?;
            let q_next = a
                .checked_mul(q)
                .and_then(|v| v.checked_add(q_prev))
                .ok_or(Error::CoefficientOverflow)?;
            if q_next > q {
                distinct += 1;
            }
            p_prev = p;
            q_prev = q;
            p = p_next;
            q = q_next;
            convergents.push(Convergent { k: i + 1, p, q });
        }
        let used = convergents.len() - 1;
        let terminated = exp.terminated && used == exp.quotients.len();
        let mut quotients = exp.quotients;
        quotients.truncate(used);
        Ok(ConvergentTable {
            alpha: alpha.clone(),
            a0: exp.a0,
            quotients,
            convergents,
            periodicity: exp.periodicity,
            terminated,
        })
    }

    pub fn alpha(&self) -> &RealValue {
        &self.alpha
    }

    pub fn a0(&self) -> i128 {
        self.a0
    }

    /// Partial quotients `a₁, a₂, …` matching the stored convergents.
    pub fn quotients(&self) -> &[u128] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn periodicity(&self) -> Option<&Periodicity> {
        self.periodicity.as_ref()
    }

    /// True when the expansion of a rational ended within the table.
    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// `D(α)`: strictly increasing convergent denominators (`q₀ = q₁ = 1`
    /// collapses to a single entry), stopping before the first beyond `u64`.
    pub fn denominator_set(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::with_capacity(self.convergents.len());
        for c in &self.convergents {
            let Ok(q) = u64::try_from(c.q) else { break };
            if out.last() != Some(&q) {
                out.push(q);
            }
        }
        out
    }

    /// Number of distinct denominators, including those beyond `u64`.
    pub fn distinct_denominators(&self) -> usize {
        let mut n = 0;
        let mut last = 0u128;
        for c in &self.convergents {
            if c.q != last {
                n += 1;
                last = c.q;
            }
        }
        n
    }

    pub fn contains_denominator(&self, q: u64) -> bool {
        self.denominator_set().binary_search(&q).is_ok()
    }

    pub fn is_badly_approximable(&self) -> ApproxVerdict {
        if self.terminated || self.alpha.is_rational() {
            return ApproxVerdict {
                status: ApproxStatus::NotApplicable,
                max_quotient: self.quotients.iter().copied().max(),
            };
        }
        match &self.periodicity {
            Some(per) => {
                // bounded quotients: the preperiod and one period cover all of them
                let full = expand_quotients(&self.alpha, per.preperiod + per.period.len())
                    .expect("re-expansion of a periodic surd");
                let max = full.quotients[..per.preperiod]
                    .iter()
                    .chain(per.period.iter())
                    .copied()
                    .max();
                ApproxVerdict {
                    status: ApproxStatus::Periodic,
                    max_quotient: max,
                }
            }
            None => ApproxVerdict {
                status: ApproxStatus::DepthLimited,
                max_quotient: self.quotients.iter().copied().max(),
            },
        }
    }

    /// `α mod 1` as a kernel rotation (with `1/2` representable).
    pub(crate) fn rotation(&self) -> Result<Rotation> {
        rotation_for(&self.alpha)
    }
}

pub(crate) fn rotation_for(alpha: &RealValue) -> Result<Rotation> {
    let frac = alpha.reduce_mod_1().into_value();
    let scale = Scale::common(&[&frac, &RealValue::half()])?;
    let alpha = scale.fix(&frac)?;
    Ok(Rotation { scale, alpha })
}

/// `D(α)` of a table.
pub fn denominator_set(table: &ConvergentTable) -> Vec<u64> {
    table.denominator_set()
}

/// `q⁺`, the next denominator after `q` in `D`.
pub fn next_denominator(q: u64, denominators: &[u64]) -> Result<u64> {
    let idx = denominators
        .binary_search(&q)
        .map_err(|_| Error::NotADenominator { q })?;
    denominators
        .get(idx + 1)
        .copied()
        .ok_or(Error::EndOfTable { q })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestApproxRecord {
    pub k: usize,
    pub q: u64,
    pub q_next: u64,
    /// Minimum of `‖nα‖` over `q ≤ n < q_next` (or just `n = q` when equal).
    pub minimum: RealValue,
    pub argmin: u64,
    /// Whether `‖qα‖ > 1/(2 q_next)` was checked (only when `q < q_next`).
    pub lower_bound_checked: bool,
}

/// Exhaustively confirms `min_{q_k ≤ n < q_{k+1}} ‖nα‖ = ‖q_k α‖` and
/// `‖q_k α‖ > 1/(2 q_{k+1})`.
pub fn verify_best_approx(table: &ConvergentTable, k: usize) -> Result<BestApproxRecord> {
    let convs = table.convergents();
    if k + 1 >= convs.len() {
        return Err(Error::EndOfTable {
            q: convs.last().map(|c| c.q as u64).unwrap_or(0),
        });
    }
    let q = u64::try_from(convs[k].q).map_err(|_| Error::CoefficientOverflow)?;
    let q_next = u64::try_from(convs[k + 1].q).map_err(|_| Error::CoefficientOverflow)?;
    let rot = table.rotation()?;
    let scale = &rot.scale;
    let start_value = table.alpha().mul_int(q).reduce_mod_1();
    let start = scale.fix(start_value.value())?;
    let span = q_next.saturating_sub(q).max(1);
    rot.check_walk(start, span)?;
    let mut x = start;
    let mut best: Option<(Fixed, u64)> = None;
    for n in q..q + span {
        let dist = scale.distance_to_integers(x);
        match best {
            Some((b, _)) if scale.cmp(dist, b) != Ordering::Less => {}
            _ => best = Some((dist, n)),
        }
        x = rot.forward(x);
    }
    let (min, argmin) = best.expect("non-empty range");
    if argmin != q {
        return Err(Error::ViolationFound { k, q: argmin });
    }
    let minimum = scale.real(min);
    let lower_bound_checked = q < q_next;
    if lower_bound_checked {
        // ‖qα‖ · 2 q_next > 1
        if minimum.mul_int(2 * q_next).compare(&RealValue::one())? != Ordering::Greater {
            return Err(Error::ViolationFound { k, q });
        }
        // ‖qα‖ < 1/q_next
        if minimum.mul_int(q_next).compare(&RealValue::one())? != Ordering::Less {
            return Err(Error::ViolationFound { k, q });
        }
    }
    Ok(BestApproxRecord {
        k,
        q,
        q_next,
        minimum,
        argmin,
        lower_bound_checked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityRecord {
    /// Indices `k ≥ 1` at which `q_k p_{k−1} − p_k q_{k−1} = (−1)^k` was confirmed.
    pub determinants: usize,
    /// Indices at which `‖q_k α‖ < 1/q_{k+1}` and `1/q⁺ < 1/q_k` were confirmed.
    pub chains: usize,
}

/// Checks the determinant identity at every index and the chain
/// `‖q_k α‖ < 1/q_{k+1}`, `1/q⁺ < 1/q_k` wherever a successor exists, where
/// `q⁺` is the next distinct denominator (`q₀ = q₁ = 1` is not a strict step).
pub fn convergent_identities(table: &ConvergentTable) -> Result<IdentityRecord> {
    let convs = table.convergents();
    let mut record = IdentityRecord {
        determinants: 0,
        chains: 0,
    };
    for w in convs.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let lhs = BigInt::from(cur.q) * prev.p - BigInt::from(cur.p) * BigInt::from(prev.q);
        let sign = if cur.k % 2 == 0 { 1 } else { -1 };
        if lhs != BigInt::from(sign) {
            return Err(Error::ViolationFound {
                k: cur.k,
                q: u64::try_from(cur.q).unwrap_or(u64::MAX),
            });
        }
        record.determinants += 1;
    }
    for (i, c) in convs.iter().enumerate() {
        let Some(next) = convs.get(i + 1) else { break };
        let Some(plus) = convs[i + 1..].iter().find(|n| n.q > c.q) else {
            break;
        };
        let violation = || Error::ViolationFound {
            k: c.k,
            q: u64::try_from(c.q).unwrap_or(u64::MAX),
        };
        let dist = table.alpha().mul_int(c.q).distance_to_integers();
        // ‖q_k α‖ · q_{k+1} < 1
        if dist.mul_int(next.q).compare(&RealValue::one())? != Ordering::Less {
            return Err(violation());
        }
        if plus.q <= c.q {
            return Err(violation());
        }
        record.chains += 1;
    }
    Ok(record)
}

pub fn is_badly_approximable(table: &ConvergentTable) -> ApproxVerdict {
    table.is_badly_approximable()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfDistanceRecord {
    pub q: u64,
    pub minimum: RealValue,
    pub argmin: i64,
}

/// Walks `r − jα` for `|j| < q` in the order `0, −1, 1, −2, 2, …`, reporting
/// the running minimum of `‖r − jα‖` whenever `|j| + 1` reaches one of
/// `targets` (sorted ascending). Strict improvement only, so ties go to the
/// smaller `|j|` and then to negative `j`.
pub(crate) fn scan_distances(
    rot: &Rotation,
    start: Fixed,
    targets: &[u64],
) -> Result<Vec<(Fixed, i64)>> {
    let scale = &rot.scale;
    let Some(&last) = targets.last() else {
        return Ok(Vec::new());
    };
    rot.check_walk(start, last)?;
    let mut out = Vec::with_capacity(targets.len());
    let mut best = (scale.distance_to_integers(start), 0i64);
    let mut plus = start; // r − jα for j ≥ 0
    let mut minus = start; // r + jα for j ≥ 0, i.e. index −j
    let mut next_target = 0;
    let mut radius = 0u64; // |j| covered so far
    loop {
        while next_target < targets.len() && targets[next_target] <= radius + 1 {
            out.push(best);
            next_target += 1;
        }
        if next_target == targets.len() {
            return Ok(out);
        }
        radius += 1;
        minus = rot.forward(minus);
        plus = rot.backward(plus);
        let dm = scale.distance_to_integers(minus);
        if scale.cmp(dm, best.0) == Ordering::Less {
            best = (dm, -(radius as i64));
        }
        let dp = scale.distance_to_integers(plus);
        if scale.cmp(dp, best.0) == Ordering::Less {
            best = (dp, radius as i64);
        }
    }
}

/// Exhaustive `min_{|j|<q} ‖1/2 − jα‖`, checked against `1/(24q)`.
pub fn half_distance_lemma_check(table: &ConvergentTable, q: u64) -> Result<HalfDistanceRecord> {
    half_distance_many(table, &[q]).map(|mut v| v.remove(0))
}

/// The same check for several denominators in one walk.
pub fn half_distance_many(table: &ConvergentTable, qs: &[u64]) -> Result<Vec<HalfDistanceRecord>> {
    for &q in qs {
        if !table.contains_denominator(q) {
            return Err(Error::NotADenominator { q });
        }
    }
    let mut sorted = qs.to_vec();
    sorted.sort_unstable();
    let rot = table.rotation()?;
    let start = rot.scale.fix(&RealValue::half())?;
    let mins = scan_distances(&rot, start, &sorted)?;
    let mut out = Vec::with_capacity(qs.len());
    for (&q, (min, j)) in sorted.iter().zip(mins) {
        let minimum = rot.scale.real(min);
        if minimum.mul_int(24 * q).compare(&RealValue::one())? == Ordering::Less {
            return Err(Error::LemmaViolated { q, j });
        }
        out.push(HalfDistanceRecord {
            q,
            minimum,
            argmin: j,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct TableJson<'a> {
    alpha: &'a RealValue,
    a0: i128,
    quotients: &'a [u128],
    convergents: &'a [Convergent],
    denominators: Vec<u64>,
    badly_approximable: bool,
    approximability: ApproxStatus,
    max_quotient: Option<u128>,
    period: Option<&'a Periodicity>,
    finite: bool,
}

impl Serialize for ConvergentTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let verdict = self.is_badly_approximable();
        TableJson {
            alpha: &self.alpha,
            a0: self.a0,
            quotients: &self.quotients,
            convergents: &self.convergents,
            denominators: self.denominator_set(),
            badly_approximable: verdict.is_badly_approximable(),
            approximability: verdict.status,
            max_quotient: verdict.max_quotient,
            period: self.periodicity.as_ref(),
            finite: self.terminated,
        }
        .serialize(s)
    }
}
