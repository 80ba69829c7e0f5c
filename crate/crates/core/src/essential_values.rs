//! `ε(q)`, `θ(q)`, the period-approximating-sequence detector, and the
//! subgroup of `Z²` generated by what it finds.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cf_engine::{scan_distances, ApproxStatus, ConvergentTable};
use crate::circle_arith::fixed::Fixed;
use crate::circle_arith::{CirclePoint, RealValue};
use crate::cocycle::{CocycleContext, PairValue};
use crate::error::{Error, Result};
use crate::partition::{ConstancyPartition, PartitionOptions};

pub const DEFAULT_WINDOW: usize = 10;

/// Largest denominator whose partition the detector builds by default.
pub const DEFAULT_MAX_Q: u64 = 2_000_000;

/// `1/128`.
pub fn default_delta() -> RealValue {
    RealValue::rational(1, 128).expect("nonzero denominator")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpsilonTheta {
    pub q: u64,
    /// `q · min_{|j|<q} ‖−t − jα‖`.
    pub epsilon: RealValue,
    /// `q · min_{|j|<q} ‖1/2 − t − jα‖`.
    pub theta: RealValue,
    pub i_q: i64,
    pub j_q: i64,
}

impl EpsilonTheta {
    pub fn min(&self) -> &RealValue {
        if self.epsilon <= self.theta {
            &self.epsilon
        } else {
            &self.theta
        }
    }
}

/// `ε(q)`, `θ(q)` with their argmins.
pub fn epsilon_theta(q: u64, ctx: &CocycleContext) -> Result<EpsilonTheta> {
    Ok(epsilon_theta_table(&[q], ctx)?.remove(0))
}

/// `ε`, `θ` for every `q` of `qs`, one orbit walk per quantity.
pub fn epsilon_theta_table(qs: &[u64], ctx: &CocycleContext) -> Result<Vec<EpsilonTheta>> {
    if qs.contains(&0) {
        return Err(Error::PreconditionUnmet("q must be at least 1".into()));
    }
    let mut sorted = qs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let rot = ctx.rotation();
    let scale = &rot.scale;
    let t = ctx.t_fixed();
    let half = Fixed {
        a: scale.denominator() / 2,
        b: 0,
    };
    let starts = [scale.wrap(Fixed { a: 0, b: 0 }.sub(t)), scale.wrap(half.sub(t))];
    let (eps, theta) = rayon::join(
        || scan_distances(rot, starts[0], &sorted),
        || scan_distances(rot, starts[1], &sorted),
    );
    let (eps, theta) = (eps?, theta?);
    Ok(sorted
        .iter()
        .zip(eps.into_iter().zip(theta))
        .map(|(&q, ((e, i), (h, j)))| EpsilonTheta {
            q,
            epsilon: scale.real(e).mul_int(q as i64),
            theta: scale.real(h).mul_int(q as i64),
            i_q: i,
            j_q: j,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub q: u64,
    pub measure: RealValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateValue {
    pub value: PairValue,
    pub evidence: Vec<Evidence>,
    pub min_measure: RealValue,
}

#[derive(Clone, Debug)]
pub struct DetectorOptions {
    pub delta: RealValue,
    pub window: usize,
    /// Also run the even denominators, as a separate sequence.
    pub include_even: bool,
    /// Denominators above this are skipped by the detector.
    pub max_q: u64,
    pub partition: PartitionOptions,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions {
            delta: default_delta(),
            window: DEFAULT_WINDOW,
            include_even: false,
            max_q: DEFAULT_MAX_Q,
            partition: PartitionOptions::default(),
        }
    }
}

/// What one partition contributed to the detector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub q: u64,
    pub interval_count: usize,
    pub dominant: PairValue,
    pub dominant_measure: RealValue,
    /// Threshold applied to right neighbours of the dominant class.
    pub neighbor_threshold: Option<RealValue>,
    pub hits: BTreeMap<PairValue, RealValue>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Detection {
    pub candidates: Vec<CandidateValue>,
    pub even_candidates: Vec<CandidateValue>,
    pub snapshots: Vec<Snapshot>,
}

impl Detection {
    pub fn all_candidates(&self) -> impl Iterator<Item = &CandidateValue> {
        self.candidates.iter().chain(&self.even_candidates)
    }
}

fn min_real<'a>(a: &'a RealValue, b: &'a RealValue) -> &'a RealValue {
    if a <= b {
        a
    } else {
        b
    }
}

fn snapshot(
    q: u64,
    ctx: &CocycleContext,
    opts: &DetectorOptions,
    m: Option<&RealValue>,
) -> Result<Snapshot> {
    let partition = ConstancyPartition::build_with(q, ctx, &opts.partition)?;
    let hist = partition.value_histogram();
    let (dominant, dominant_measure) = hist
        .iter()
        .fold(None::<(&PairValue, &RealValue)>, |best, (v, m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((v, m)),
        })
        .map(|(v, m)| (*v, m.clone()))
        .ok_or_else(|| Error::PreconditionUnmet("empty partition".into()))?;
    let mut hits: BTreeMap<PairValue, RealValue> = hist
        .into_iter()
        .filter(|(_, m)| m >= &opts.delta)
        .collect();
    let cap = RealValue::rational(1, 24)?;
    let neighbor_threshold = m
        .filter(|m| !m.is_zero())
        .map(|m| &opts.delta * min_real(m, &cap));
    if let Some(th) = &neighbor_threshold {
        for class in partition.right_neighbor_classes(dominant) {
            if &class.measure >= th {
                hits.entry(class.value).or_insert(class.measure);
            }
        }
    }
    Ok(Snapshot {
        q,
        interval_count: partition.len(),
        dominant,
        dominant_measure,
        neighbor_threshold,
        hits,
    })
}

/// Classes hit at every one of the last `window` snapshots, with the full
/// run of consecutive hits ending at the last snapshot as evidence.
fn tail_runs(snaps: &[&Snapshot], window: usize) -> Vec<CandidateValue> {
    let Some(last) = snaps.last() else {
        return Vec::new();
    };
    if snaps.len() < window {
        return Vec::new();
    }
    let mut out = Vec::new();
    for value in last.hits.keys() {
        let mut run: Vec<Evidence> = snaps
            .iter()
            .rev()
            .map_while(|s| {
                s.hits.get(value).map(|m| Evidence {
                    q: s.q,
                    measure: m.clone(),
                })
            })
            .collect();
        if run.len() < window {
            continue;
        }
        run.reverse();
        let min_measure = run
            .iter()
            .map(|e| &e.measure)
            .fold(None::<&RealValue>, |acc, m| Some(acc.map_or(m, |a| min_real(a, m))))
            .cloned()
            .expect("nonempty run");
        out.push(CandidateValue {
            value: *value,
            evidence: run,
            min_measure,
        });
    }
    out
}

/// Runs the detector over an increasing sequence of denominators.
///
/// `table` supplies `min{ε(q), θ(q)}` for the neighbour threshold; entries
/// missing from it disable neighbour hits at that `q`.
pub fn run_detector(
    qs: &[u64],
    ctx: &CocycleContext,
    opts: &DetectorOptions,
    table: &[EpsilonTheta],
) -> Result<Detection> {
    if opts.window < 2 {
        return Err(Error::PreconditionUnmet("window must be at least 2".into()));
    }
    if opts.delta.signum() != Ordering::Greater {
        return Err(Error::PreconditionUnmet("delta must be positive".into()));
    }
    if qs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::PreconditionUnmet(
            "denominators must be strictly increasing".into(),
        ));
    }
    let selected: Vec<u64> = qs
        .iter()
        .copied()
        .filter(|&q| q <= opts.max_q && (opts.include_even || q % 2 == 1))
        .collect();
    let mins: BTreeMap<u64, &RealValue> = table.iter().map(|e| (e.q, e.min())).collect();
    let snapshots: Vec<Snapshot> = selected
        .par_iter()
        .map(|&q| snapshot(q, ctx, opts, mins.get(&q).copied()))
        .collect::<Result<_>>()?;
    let odd: Vec<&Snapshot> = snapshots.iter().filter(|s| s.q % 2 == 1).collect();
    let even: Vec<&Snapshot> = snapshots.iter().filter(|s| s.q % 2 == 0).collect();
    Ok(Detection {
        candidates: tail_runs(&odd, opts.window),
        even_candidates: tail_runs(&even, opts.window),
        snapshots,
    })
}

/// Candidate values over `qs`: classes of measure at least `delta` (plus
/// right neighbours of the dominant class) at each of the last `window`
/// denominators.
pub fn detect(qs: &[u64], ctx: &CocycleContext, opts: &DetectorOptions) -> Result<Vec<CandidateValue>> {
    let table = epsilon_theta_table(qs, ctx)?;
    Ok(run_detector(qs, ctx, opts, &table)?.candidates)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubgroupClass {
    TrivialZero,
    Diagonal,
    AntiDiagonal,
    FullG,
    Other,
}

/// A subgroup of `Z²` in lower-triangular normal form: either empty, one
/// vector whose first nonzero coordinate is positive, or `(a, b), (0, e)`
/// with `a, e > 0` and `0 ≤ b < e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupZ2 {
    pub basis: Vec<(i64, i64)>,
    pub classification: SubgroupClass,
}

impl SubgroupZ2 {
    pub fn generated_by(generators: &[(i64, i64)]) -> Result<Self> {
        let basis = normal_form(generators)?;
        let classification = match basis.as_slice() {
            [] => SubgroupClass::TrivialZero,
            [(1, 1)] => SubgroupClass::Diagonal,
            [(1, -1)] => SubgroupClass::AntiDiagonal,
            [(1, 1), (0, 2)] => SubgroupClass::FullG,
            _ => SubgroupClass::Other,
        };
        Ok(SubgroupZ2 {
            basis,
            classification,
        })
    }

    pub fn contains(&self, v: (i64, i64)) -> bool {
        let (x, y) = (v.0 as i128, v.1 as i128);
        match self.basis.as_slice() {
            [] => x == 0 && y == 0,
            [(a, b)] => {
                let (a, b) = (*a as i128, *b as i128);
                x * b == y * a && if a != 0 { x % a == 0 } else { y % b == 0 }
            }
            [(a, b), (_, e)] => {
                let (a, b, e) = (*a as i128, *b as i128, *e as i128);
                x % a == 0 && (y - (x / a) * b) % e == 0
            }
            _ => unreachable!("rank at most 2"),
        }
    }
}

fn overflow<T>(v: Option<T>) -> Result<T> {
    v.ok_or(Error::CoefficientOverflow)
}

fn normal_form(generators: &[(i64, i64)]) -> Result<Vec<(i64, i64)>> {
    // Euclid on the first coordinates, folding every generator into one pivot
    let mut pivot: Option<(i128, i128)> = None;
    let mut e: i128 = 0;
    for &(x, y) in generators {
        let mut v = (x as i128, y as i128);
        let mut p = match pivot {
            Some(p) => p,
            None if v.0 == 0 => {
                e = num_integer::gcd(e, v.1);
                continue;
            }
            None => {
                pivot = Some(v);
                continue;
            }
        };
        while v.0 != 0 {
            let k = p.0 / v.0;
            p = (p.0 - k * v.0, overflow(p.1.checked_sub(overflow(k.checked_mul(v.1))?))?);
            std::mem::swap(&mut p, &mut v);
        }
        e = num_integer::gcd(e, v.1);
        if e != 0 {
            p.1 = p.1.rem_euclid(e);
        }
        pivot = Some(p);
    }
    let to64 = |v: i128| i64::try_from(v).map_err(|_| Error::CoefficientOverflow);
    Ok(match pivot {
        None if e == 0 => Vec::new(),
        None => vec![(0, to64(e)?)],
        Some((a, b)) => {
            let (a, b) = if a < 0 { (-a, -b) } else { (a, b) };
            if e == 0 {
                vec![(to64(a)?, to64(b)?)]
            } else {
                vec![(to64(a)?, to64(b.rem_euclid(e))?), (0, to64(e)?)]
            }
        }
    })
}

/// The subgroup generated by all candidate values.
pub fn close_subgroup(candidates: &[CandidateValue]) -> Result<SubgroupZ2> {
    let gens: Vec<(i64, i64)> = candidates
        .iter()
        .map(|c| (c.value.first, c.value.second))
        .collect();
    SubgroupZ2::generated_by(&gens)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Predicate {
    /// `j` with `t = ⟨jα⟩`, searched for `|j| ≤ J`.
    pub t_in_zalpha: Option<i64>,
    /// `k` with `t = ⟨1/2 + kα⟩`, searched for `|k| ≤ J`.
    pub t_in_zalpha_plus_half: Option<i64>,
    pub search_bound: u64,
    pub badly_approximable: ApproxStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// `t ∈ Zα`: `a(x + t) − a(x)` is bounded.
    ShiftInZalpha,
    /// `t ∈ Zα + 1/2`: combined with `a(x + 1/2) = −a(x)`.
    ShiftInZalphaPlusHalf,
    /// Badly approximable `α`, `t` outside both sets: full group.
    BadlyApproximable,
    /// Full group for almost every `t` only.
    AlmostEvery,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub alpha: RealValue,
    pub t: CirclePoint,
    pub depth: usize,
    pub denominators: Vec<u64>,
    /// Denominators whose partitions fed the detector.
    pub detector_denominators: Vec<u64>,
    pub delta: RealValue,
    pub window: usize,
    pub approximate: bool,
    pub epsilon_theta_table: Vec<EpsilonTheta>,
    pub candidates: Vec<CandidateValue>,
    pub even_candidates: Vec<CandidateValue>,
    pub subgroup: SubgroupZ2,
    pub expected: SubgroupClass,
    pub justification: Justification,
    pub predicate: Predicate,
    pub agreement: bool,
}

/// What the membership tests predict for the group.
pub fn expected_class(ctx: &CocycleContext, status: ApproxStatus) -> (SubgroupClass, Justification) {
    if ctx.t_in_zalpha().is_some() {
        (SubgroupClass::Diagonal, Justification::ShiftInZalpha)
    } else if ctx.t_in_zalpha_plus_half().is_some() {
        (SubgroupClass::AntiDiagonal, Justification::ShiftInZalphaPlusHalf)
    } else if status == ApproxStatus::Periodic {
        (SubgroupClass::FullG, Justification::BadlyApproximable)
    } else {
        (SubgroupClass::FullG, Justification::AlmostEvery)
    }
}

/// Detector over `D(α)` up to `depth`, closed into a subgroup and compared
/// with the exact membership predicate.
pub fn classify(ctx: &CocycleContext, depth: usize, opts: &DetectorOptions) -> Result<ClassificationReport> {
    let table = ConvergentTable::expand_available(ctx.alpha(), depth)?;
    classify_with_table(ctx, &table, opts)
}

pub fn classify_with_table(
    ctx: &CocycleContext,
    table: &ConvergentTable,
    opts: &DetectorOptions,
) -> Result<ClassificationReport> {
    let qs = table.denominator_set();
    let et = epsilon_theta_table(&qs, ctx)?;
    let detection = run_detector(&qs, ctx, opts, &et)?;
    let generators: Vec<CandidateValue> = detection.all_candidates().cloned().collect();
    let subgroup = close_subgroup(&generators)?;
    let detector_denominators = detection.snapshots.iter().map(|s| s.q).collect();
    let status = table.is_badly_approximable().status;
    let (expected, justification) = expected_class(ctx, status);
    Ok(ClassificationReport {
        alpha: ctx.alpha().clone(),
        t: ctx.t().clone(),
        depth: qs.len(),
        denominators: qs,
        detector_denominators,
        delta: opts.delta.clone(),
        window: opts.window,
        approximate: ctx.is_approximate(),
        epsilon_theta_table: et,
        candidates: detection.candidates,
        even_candidates: detection.even_candidates,
        agreement: subgroup.classification == expected,
        subgroup,
        expected,
        justification,
        predicate: Predicate {
            t_in_zalpha: ctx.t_in_zalpha(),
            t_in_zalpha_plus_half: ctx.t_in_zalpha_plus_half(),
            search_bound: ctx.search_bound(),
            badly_approximable: status,
        },
    })
}

/// The last `⌈n/3⌉` entries.
fn tail(table: &[EpsilonTheta]) -> &[EpsilonTheta] {
    let n = table.len();
    &table[n - n.div_ceil(3)..]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimsupReport {
    pub holds_empirically: bool,
    /// `min{ε(q), θ(q)}` minimized over the witnesses.
    pub best_delta: RealValue,
    pub witness_qs: Vec<u64>,
}

/// `min{ε, θ}` over the last third of `D(α)` up to `depth`.
pub fn limsup_criterion(ctx: &CocycleContext, depth: usize) -> Result<LimsupReport> {
    if depth < 3 {
        return Err(Error::InvalidDepth { min: 3, got: depth });
    }
    let table = ConvergentTable::expand_available(ctx.alpha(), depth)?;
    let et = epsilon_theta_table(&table.denominator_set(), ctx)?;
    Ok(limsup_from_table(&et))
}

pub fn limsup_from_table(et: &[EpsilonTheta]) -> LimsupReport {
    let tail = tail(et);
    let best = tail
        .iter()
        .map(EpsilonTheta::min)
        .fold(None::<&RealValue>, |acc, m| Some(acc.map_or(m, |a| min_real(a, m))))
        .cloned()
        .unwrap_or_else(RealValue::zero);
    LimsupReport {
        holds_empirically: best.signum() == Ordering::Greater,
        best_delta: best,
        witness_qs: tail.iter().map(|e| e.q).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stabilization {
    No,
    IqConstant,
    JqConstant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "witness")]
pub enum Membership {
    /// `t = ⟨jα⟩`.
    TInZalpha(i64),
    /// `t = ⟨1/2 + kα⟩`.
    TInZalphaPlusHalf(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecayReport {
    pub argmin_stabilizes: Stabilization,
    pub inferred: Option<Membership>,
    /// Whether the exact membership search agrees with the inference.
    pub confirmed: bool,
    pub witness_qs: Vec<u64>,
}

/// Looks for `ε(q)` or `θ(q)` vanishing with a constant argmin over the last
/// third of `D(α)`.
pub fn decay_diagnosis(ctx: &CocycleContext, depth: usize) -> Result<DecayReport> {
    if depth < 5 {
        return Err(Error::InvalidDepth { min: 5, got: depth });
    }
    let table = ConvergentTable::expand_available(ctx.alpha(), depth)?;
    if !table.is_badly_approximable().is_badly_approximable() {
        return Err(Error::PreconditionUnmet(
            "alpha is not known to be badly approximable".into(),
        ));
    }
    let et = epsilon_theta_table(&table.denominator_set(), ctx)?;
    Ok(decay_from_table(ctx, &et))
}

pub fn decay_from_table(ctx: &CocycleContext, et: &[EpsilonTheta]) -> DecayReport {
    let tail = tail(et);
    let constant = |pick: fn(&EpsilonTheta) -> (&RealValue, i64)| -> Option<i64> {
        let (_, first) = pick(tail.first()?);
        tail.iter()
            .all(|e| {
                let (v, arg) = pick(e);
                v.is_zero() && arg == first
            })
            .then_some(first)
    };
    let (argmin_stabilizes, inferred) = if let Some(i) = constant(|e| (&e.epsilon, e.i_q)) {
        (Stabilization::IqConstant, Some(Membership::TInZalpha(-i)))
    } else if let Some(j) = constant(|e| (&e.theta, e.j_q)) {
        (Stabilization::JqConstant, Some(Membership::TInZalphaPlusHalf(-j)))
    } else {
        (Stabilization::No, None)
    };
    let confirmed = match inferred {
        Some(Membership::TInZalpha(j)) => ctx.t_in_zalpha() == Some(j),
        Some(Membership::TInZalphaPlusHalf(k)) => ctx.t_in_zalpha_plus_half() == Some(k),
        None => ctx.t_in_zalpha().is_none() && ctx.t_in_zalpha_plus_half().is_none(),
    };
    DecayReport {
        argmin_stabilizes,
        inferred,
        confirmed,
        witness_qs: tail.iter().map(|e| e.q).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::DEFAULT_SEARCH_BOUND;

    fn golden() -> RealValue {
        RealValue::new(-1, 1, 2, 5).unwrap()
    }

    fn ctx(t: &RealValue) -> CocycleContext {
        CocycleContext::new(&golden(), t, DEFAULT_SEARCH_BOUND).unwrap()
    }

    fn r(p: i64, q: i64) -> RealValue {
        RealValue::rational(p, q).unwrap()
    }

    /// `q · min ‖r − jα‖` over `|j| < q` with big arithmetic.
    fn brute(q: i64, r0: &RealValue) -> (f64, i64) {
        let mut best: Option<(RealValue, i64)> = None;
        for k in 0..q {
            for j in [-k, k] {
                let d = (r0 - &golden().mul_int(j)).distance_to_integers();
                if best.as_ref().is_none_or(|(b, _)| &d < b) {
                    best = Some((d, j));
                }
            }
        }
        let (d, j) = best.unwrap();
        (d.mul_int(q).to_f64(), j)
    }

    #[test]
    fn epsilon_theta_examples() {
        let c = ctx(&r(1, 3));
        let e = epsilon_theta(1, &c).unwrap();
        assert_eq!((e.epsilon.clone(), e.theta.clone()), (r(1, 3), r(1, 6)));
        assert_eq!((e.i_q, e.j_q), (0, 0));
        let e2 = epsilon_theta(2, &c).unwrap();
        assert!((e2.epsilon.to_f64() - 0.0973).abs() < 1e-4);
        assert_eq!(e2.i_q, 1);

        let three = golden().mul_int(3);
        let c3 = ctx(&three);
        for e in epsilon_theta_table(&[5, 8, 13, 21], &c3).unwrap() {
            assert!(e.epsilon.is_zero());
            assert_eq!(e.i_q, -3);
        }
    }

    #[test]
    fn epsilon_theta_matches_brute_force() {
        for t in [r(1, 3), r(2, 7), golden().div_int(2).unwrap()] {
            let c = ctx(&t);
            let qs = [1u64, 2, 3, 5, 8, 13, 21, 34];
            let neg_t = -c.t().value().clone();
            let half_t = &RealValue::half() - c.t().value();
            for e in epsilon_theta_table(&qs, &c).unwrap() {
                let (ev, i) = brute(e.q as i64, &neg_t);
                let (hv, j) = brute(e.q as i64, &half_t);
                assert!((e.epsilon.to_f64() - ev).abs() < 1e-12);
                assert!((e.theta.to_f64() - hv).abs() < 1e-12);
                assert_eq!((e.i_q, e.j_q), (i, j), "q = {}", e.q);
                assert!(e.epsilon < RealValue::one() && e.theta < RealValue::one());
            }
        }
    }

    #[test]
    fn subgroup_examples() {
        let g = SubgroupZ2::generated_by(&[]).unwrap();
        assert_eq!(g.classification, SubgroupClass::TrivialZero);
        let g = SubgroupZ2::generated_by(&[(1, 1)]).unwrap();
        assert_eq!((g.basis.clone(), g.classification), (vec![(1, 1)], SubgroupClass::Diagonal));
        let g = SubgroupZ2::generated_by(&[(1, 3), (1, 1)]).unwrap();
        assert_eq!(g.basis, vec![(1, 1), (0, 2)]);
        assert_eq!(g.classification, SubgroupClass::FullG);
        let g = SubgroupZ2::generated_by(&[(-3, 3), (1, -1)]).unwrap();
        assert_eq!(g.classification, SubgroupClass::AntiDiagonal);
        let g = SubgroupZ2::generated_by(&[(3, 3)]).unwrap();
        assert_eq!(g.classification, SubgroupClass::Other);
        assert!(g.contains((-6, -6)) && !g.contains((1, 1)));
        let g = SubgroupZ2::generated_by(&[(0, 4), (0, -6)]).unwrap();
        assert_eq!(g.basis, vec![(0, 2)]);
        assert!(g.contains((0, -8)) && !g.contains((1, 0)));
    }

    #[test]
    fn detector_symmetry_for_half() {
        let c = ctx(&RealValue::half());
        let qs = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377];
        let opts = DetectorOptions {
            window: 3,
            include_even: true,
            ..Default::default()
        };
        let table = epsilon_theta_table(&qs, &c).unwrap();
        let det = run_detector(&qs, &c, &opts, &table).unwrap();
        let values: Vec<PairValue> = det.all_candidates().map(|c| c.value).collect();
        assert!(values.contains(&PairValue::new(1, -1)));
        assert!(values.contains(&PairValue::new(-1, 1)));
        for s in &det.snapshots {
            assert!(s.hits.keys().all(|v| v.second == -v.first));
        }
    }

    #[test]
    fn detector_diagonal_for_zero() {
        let c = ctx(&RealValue::zero());
        let qs = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377];
        let opts = DetectorOptions {
            window: 3,
            ..Default::default()
        };
        let found = detect(&qs, &c, &opts).unwrap();
        assert!(!found.is_empty());
        assert!(found.iter().all(|c| c.value.first == c.value.second));
    }

    #[test]
    fn limsup_and_decay() {
        let c = ctx(&r(1, 3));
        let l = limsup_criterion(&c, 15).unwrap();
        assert!(l.holds_empirically);
        let d = decay_diagnosis(&c, 15).unwrap();
        assert_eq!(d.argmin_stabilizes, Stabilization::No);
        assert!(d.confirmed);

        let c = ctx(&golden().mul_int(3));
        assert!(!limsup_criterion(&c, 15).unwrap().holds_empirically);
        let d = decay_diagnosis(&c, 15).unwrap();
        assert_eq!(d.argmin_stabilizes, Stabilization::IqConstant);
        assert_eq!(d.inferred, Some(Membership::TInZalpha(3)));
        assert!(d.confirmed);

        let c = ctx(&(&RealValue::half() + &golden().mul_int(2)));
        let d = decay_diagnosis(&c, 15).unwrap();
        assert_eq!(d.argmin_stabilizes, Stabilization::JqConstant);
        assert_eq!(d.inferred, Some(Membership::TInZalphaPlusHalf(2)));
        assert!(d.confirmed);
    }

    #[test]
    fn decay_needs_badly_approximable() {
        let e = RealValue::rational(2_718_281_828_459_045i64, 1_000_000_000_000_000i64).unwrap();
        let frac = e.reduce_mod_1().into_value();
        let c = CocycleContext::new_truncated(&frac, &r(1, 3), 100).unwrap();
        assert!(matches!(decay_diagnosis(&c, 8), Err(Error::PreconditionUnmet(_))));
    }
}
