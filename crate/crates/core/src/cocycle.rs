//! The step function `f`, the Birkhoff cocycle `a_n(x)` over the rotation
//! `T₀x = x + α`, and the pair cocycle `(a_n(x), a_n(x + t))`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::cf_engine::ConvergentTable;
use crate::circle_arith::fixed::{Fixed, Rotation, Scale};
use crate::circle_arith::{CirclePoint, RealValue};
use crate::error::{Error, Result};
use crate::partition::{ConstancyPartition, PartitionOptions};

/// Default search bound `J` for the membership tests `t ∈ Zα`, `t ∈ Zα + 1/2`.
pub const DEFAULT_SEARCH_BOUND: u64 = 10_000;

/// `(a_n(x), a_n(x + t))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairValue {
    pub first: i64,
    pub second: i64,
}

impl PairValue {
    pub const ZERO: PairValue = PairValue { first: 0, second: 0 };

    pub fn new(first: i64, second: i64) -> Self {
        PairValue { first, second }
    }

    pub fn offset(self, d1: i64, d2: i64) -> Self {
        PairValue::new(self.first + d1, self.second + d2)
    }

    pub fn minus(self, other: PairValue) -> (i64, i64) {
        (self.first - other.first, self.second - other.second)
    }
}

impl fmt::Display for PairValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

impl Serialize for PairValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.first, self.second].serialize(s)
    }
}

/// `f(x) = 1` on `[0, 1/2)`, `−1` on `[1/2, 1)`.
pub fn step(x: &CirclePoint) -> i64 {
    if x.value() < &RealValue::half() {
        1
    } else {
        -1
    }
}

/// Rotation number, shift, and the precomputed exact kernel for both.
#[derive(Clone, Debug)]
pub struct CocycleContext {
    alpha: RealValue,
    t: CirclePoint,
    search_bound: u64,
    t_in_zalpha: Option<i64>,
    t_in_zalpha_half: Option<i64>,
    approximate: bool,
    rot: Rotation,
    t_fixed: Fixed,
}

/// Solves `v ≡ jα (mod 1)` exactly for `|j| ≤ bound`.
fn solve_multiple(alpha: &RealValue, v: &RealValue, bound: u64) -> Option<i64> {
    if alpha.is_rational() {
        // no field coefficient to match: fall back to enumeration
        let bound = bound as i64;
        let mut best: Option<i64> = None;
        for k in 0..=bound {
            for j in [-k, k] {
                if best.is_none() && (v - &alpha.mul_int(j)).reduce_mod_1().value().is_zero() {
                    best = Some(j);
                }
            }
        }
        return best;
    }
    // √d coefficients: v.b / v.c = j · α.b / α.c
    let num: BigInt = v.b() * alpha.c();
    let den: BigInt = v.c() * alpha.b();
    let (j, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return None;
    }
    let j = j.to_i64()?;
    if j.unsigned_abs() > bound {
        return None;
    }
    let residue = v - &alpha.mul_int(j);
    if residue.is_rational() && residue.reduce_mod_1().value().is_zero() {
        Some(j)
    } else {
        None
    }
}

impl CocycleContext {
    /// `alpha` must be irrational in `(0, 1)`; `t` is reduced modulo 1.
    pub fn new(alpha: &RealValue, t: &RealValue, search_bound: u64) -> Result<Self> {
        if alpha.is_rational() {
            return Err(Error::InvalidAlpha);
        }
        Self::build(alpha, t, search_bound, false)
    }

    /// Accepts a rational `alpha` standing in for a truncated irrational;
    /// every result derived from such a context is approximate.
    pub fn new_truncated(alpha: &RealValue, t: &RealValue, search_bound: u64) -> Result<Self> {
        Self::build(alpha, t, search_bound, alpha.is_rational())
    }

    fn build(alpha: &RealValue, t: &RealValue, search_bound: u64, approximate: bool) -> Result<Self> {
        if alpha.signum() != Ordering::Greater || alpha >= &RealValue::one() {
            return Err(Error::InvalidAlpha);
        }
        alpha.common_field(t)?;
        let t = t.reduce_mod_1();
        let t_in_zalpha = solve_multiple(alpha, t.value(), search_bound);
        let shifted = t.value() - &RealValue::half();
        let t_in_zalpha_half = solve_multiple(alpha, &shifted, search_bound);
        let scale = Scale::common(&[alpha, t.value(), &RealValue::half()])?;
        let rot = Rotation {
            alpha: scale.fix(alpha)?,
            scale: scale.clone(),
        };
        let t_fixed = scale.fix(t.value())?;
        Ok(CocycleContext {
            alpha: alpha.clone(),
            t,
            search_bound,
            t_in_zalpha,
            t_in_zalpha_half,
            approximate,
            rot,
            t_fixed,
        })
    }

    pub fn alpha(&self) -> &RealValue {
        &self.alpha
    }

    pub fn t(&self) -> &CirclePoint {
        &self.t
    }

    pub fn search_bound(&self) -> u64 {
        self.search_bound
    }

    /// `Some(j)` with `t = ⟨jα⟩`, `|j| ≤ J`.
    pub fn t_in_zalpha(&self) -> Option<i64> {
        self.t_in_zalpha
    }

    /// `Some(j)` with `t = ⟨1/2 + jα⟩`, `|j| ≤ J`.
    pub fn t_in_zalpha_plus_half(&self) -> Option<i64> {
        self.t_in_zalpha_half
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub(crate) fn rotation(&self) -> &Rotation {
        &self.rot
    }

    pub(crate) fn t_fixed(&self) -> Fixed {
        self.t_fixed
    }

    /// Kernel rotation whose scale also represents `x`.
    fn rotation_with(&self, x: &CirclePoint) -> Result<(Rotation, Fixed, Fixed)> {
        let scale = Scale::common(&[&self.alpha, self.t.value(), &RealValue::half(), x.value()])?;
        let rot = Rotation {
            alpha: scale.fix(&self.alpha)?,
            scale: scale.clone(),
        };
        Ok((rot, scale.fix(x.value())?, scale.fix(self.t.value())?))
    }

    /// `S_n(x)`: how many of `x, x + α, …, x + (n−1)α` fall in `[0, 1/2)`.
    pub fn count_s(&self, n: u64, x: &CirclePoint) -> Result<u64> {
        let (rot, xf, _) = self.rotation_with(x)?;
        rot.check_walk(xf, n)?;
        Ok(rot.count_lower(xf, n))
    }

    /// `a_n(x)` for any integer `n`.
    pub fn birkhoff_a(&self, n: i64, x: &CirclePoint) -> Result<i64> {
        let (rot, xf, _) = self.rotation_with(x)?;
        rot.check_walk(xf, n.unsigned_abs())?;
        Ok(birkhoff_fixed(&rot, n, xf))
    }

    /// `(a_n(x), a_n(x + t))`.
    pub fn pair(&self, n: i64, x: &CirclePoint) -> Result<PairValue> {
        let (rot, xf, tf) = self.rotation_with(x)?;
        let xt = rot.scale.wrap(xf.add(tf));
        rot.check_walk(xf, n.unsigned_abs())?;
        rot.check_walk(xt, n.unsigned_abs())?;
        Ok(PairValue::new(
            birkhoff_fixed(&rot, n, xf),
            birkhoff_fixed(&rot, n, xt),
        ))
    }

    /// `a_n(T₀^m x) − a_{n+m}(x) + a_m(x) = 0`.
    pub fn check_cocycle_identity(&self, m: i64, n: i64, x: &CirclePoint) -> Result<bool> {
        let shifted = x.translate(&self.alpha.mul_int(m))?;
        let lhs = self.birkhoff_a(n, &shifted)? - self.birkhoff_a(n + m, x)? + self.birkhoff_a(m, x)?;
        Ok(lhs == 0)
    }

    /// `|a_n(x + mα) − a_n(x)| ≤ 2m` and `|a_n(x + 1/2 + mα) + a_n(x)| ≤ 2m`.
    pub fn check_shift_bound(&self, m: u64, n: u64, x: &CirclePoint) -> Result<bool> {
        if n <= m {
            return Err(Error::PreconditionUnmet(format!(
                "shift bound needs n > m, got n = {n}, m = {m}"
            )));
        }
        let n = n as i64;
        let shift = self.alpha.mul_int(m);
        let base = self.birkhoff_a(n, x)?;
        let moved = self.birkhoff_a(n, &x.translate(&shift)?)?;
        let half_moved = self.birkhoff_a(n, &x.translate(&(&shift + &RealValue::half()))?)?;
        let bound = 2 * m as i64;
        Ok((moved - base).abs() <= bound && (half_moved + base).abs() <= bound)
    }

    /// Builds the partition of `a_q` alone and returns `max |a_q|`, which the
    /// Denjoy-Koksma inequality caps at 3 for convergent denominators.
    pub fn denjoy_koksma_check(&self, q: u64, table: &ConvergentTable) -> Result<DenjoyKoksmaRecord> {
        if !table.contains_denominator(q) {
            return Err(Error::NotADenominator { q });
        }
        let partition = ConstancyPartition::build_with(
            q,
            self,
            &PartitionOptions {
                shift_families: false,
                ..PartitionOptions::default()
            },
        )?;
        let max = partition
            .values()
            .iter()
            .map(|v| v.first.abs())
            .max()
            .unwrap_or(0);
        if max > 3 {
            return Err(Error::BoundViolated { q, max });
        }
        Ok(DenjoyKoksmaRecord {
            q,
            max_abs: max,
            intervals: partition.len(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DenjoyKoksmaRecord {
    pub q: u64,
    pub max_abs: i64,
    pub intervals: usize,
}

/// Direct summation of `a_n` on kernel points. Negative `n` uses
/// `a_n(x) = −a_{−n}(x + nα)`, i.e. minus the sum of `f(x − iα)` for
/// `1 ≤ i ≤ −n`.
pub(crate) fn birkhoff_fixed(rot: &Rotation, n: i64, x: Fixed) -> i64 {
    match n.cmp(&0) {
        Ordering::Equal => 0,
        Ordering::Greater => {
            let s = rot.count_lower(x, n as u64) as i64;
            2 * s - n
        }
        Ordering::Less => {
            let k = n.unsigned_abs();
            let mut p = x;
            let mut s = 0i64;
            for _ in 0..k {
                p = rot.backward(p);
                s += rot.scale.below_half(p) as i64;
            }
            -(2 * s - k as i64)
        }
    }
}

/// Pair cocycle at a kernel point with `n ≥ 0`, one orbit walk for both coordinates.
pub(crate) fn pair_fixed(rot: &Rotation, n: u64, x: Fixed, t: Fixed) -> PairValue {
    let xt = rot.scale.wrap(x.add(t));
    let (s1, s2) = rot.count_lower_pair(x, xt, n);
    let n = n as i64;
    PairValue::new(2 * s1 as i64 - n, 2 * s2 as i64 - n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> RealValue {
        RealValue::new(-1, 1, 2, 5).unwrap()
    }

    fn ctx(t: RealValue) -> CocycleContext {
        CocycleContext::new(&golden(), &t, DEFAULT_SEARCH_BOUND).unwrap()
    }

    fn pt(p: i64, q: i64) -> CirclePoint {
        RealValue::rational(p, q).unwrap().reduce_mod_1()
    }

    /// Oracle: sum `f` over the orbit with plain big-integer arithmetic.
    fn naive_a(alpha: &RealValue, n: i64, x: &CirclePoint) -> i64 {
        if n >= 0 {
            (0..n)
                .map(|i| step(&x.translate(&alpha.mul_int(i)).unwrap()))
                .sum()
        } else {
            let start = x.translate(&alpha.mul_int(n)).unwrap();
            -naive_a(alpha, -n, &start)
        }
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(&CirclePoint::zero()), 1);
        assert_eq!(step(&pt(1, 2)), -1);
        assert_eq!(step(&golden().reduce_mod_1()), -1);
    }

    #[test]
    fn count_examples() {
        let c = ctx(RealValue::zero());
        assert_eq!(c.count_s(0, &CirclePoint::zero()).unwrap(), 0);
        // 0, .618, .236
        assert_eq!(c.count_s(3, &CirclePoint::zero()).unwrap(), 2);
        for x in [pt(0, 1), pt(1, 2), pt(5, 7), golden().reduce_mod_1()] {
            assert_eq!(c.count_s(1, &x).unwrap() as i64, (step(&x) + 1) / 2);
        }
    }

    #[test]
    fn birkhoff_examples() {
        let c = ctx(RealValue::zero());
        let zero = CirclePoint::zero();
        assert_eq!(c.birkhoff_a(0, &pt(1, 3)).unwrap(), 0);
        assert_eq!(c.birkhoff_a(3, &zero).unwrap(), 1);
        // −a₃(⟨−3α⟩) with ⟨−3α⟩ ≈ 0.1459
        assert_eq!(c.birkhoff_a(-3, &zero).unwrap(), -1);
        for n in -40..40 {
            for x in [pt(0, 1), pt(2, 7), golden().reduce_mod_1()] {
                assert_eq!(c.birkhoff_a(n, &x).unwrap(), naive_a(&golden(), n, &x), "n={n}");
            }
        }
    }

    #[test]
    fn pair_examples() {
        let c = ctx(RealValue::half());
        assert_eq!(c.pair(0, &pt(1, 5)).unwrap(), PairValue::ZERO);
        for n in [1, 2, 7, 13, -4] {
            let v = c.pair(n, &pt(1, 5)).unwrap();
            assert_eq!(v.second, -v.first);
        }
        let c3 = ctx(RealValue::rational(1, 3).unwrap());
        let v = c3.pair(5, &CirclePoint::zero()).unwrap();
        assert!(v.first % 2 != 0 && v.second % 2 != 0);
        assert!(v.first.abs() <= 5 && v.second.abs() <= 5);
    }

    #[test]
    fn identities() {
        let c = ctx(RealValue::rational(1, 3).unwrap());
        let zero = CirclePoint::zero();
        assert!(c.check_cocycle_identity(0, 0, &zero).unwrap());
        assert!(c.check_cocycle_identity(3, 5, &zero).unwrap());
        assert!(c.check_cocycle_identity(-2, 7, &zero).unwrap());
        assert!(c.check_shift_bound(0, 10, &zero).unwrap());
        assert!(c.check_shift_bound(3, 50, &zero).unwrap());
        assert!(c.check_shift_bound(1, 100, &pt(1, 3)).unwrap());
        assert!(c.check_shift_bound(5, 5, &zero).is_err());
    }

    #[test]
    fn membership_flags() {
        let g = golden();
        assert_eq!(ctx(g.mul_int(3)).t_in_zalpha(), Some(3));
        assert_eq!(ctx(g.mul_int(-5)).t_in_zalpha(), Some(-5));
        assert_eq!(ctx(RealValue::zero()).t_in_zalpha(), Some(0));
        assert_eq!(ctx(&RealValue::half() + &g.mul_int(2)).t_in_zalpha_plus_half(), Some(2));
        assert_eq!(ctx(RealValue::half()).t_in_zalpha_plus_half(), Some(0));
        let third = ctx(RealValue::rational(1, 3).unwrap());
        assert_eq!((third.t_in_zalpha(), third.t_in_zalpha_plus_half()), (None, None));
        let far = CocycleContext::new(&g, &g.mul_int(20_000), DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(far.t_in_zalpha(), None);
    }

    #[test]
    fn context_validation() {
        let root2 = RealValue::new(0, 1, 1, 2).unwrap();
        assert!(CocycleContext::new(&RealValue::rational(1, 3).unwrap(), &RealValue::zero(), 10).is_err());
        assert!(CocycleContext::new(&golden(), &root2, 10).is_err());
        assert!(CocycleContext::new(&(&golden() + &RealValue::one()), &RealValue::zero(), 10).is_err());
        let trunc = CocycleContext::new_truncated(&RealValue::rational(618, 1000).unwrap(), &RealValue::zero(), 10).unwrap();
        assert!(trunc.is_approximate());
        assert_eq!(trunc.t_in_zalpha(), Some(0));
    }
}
