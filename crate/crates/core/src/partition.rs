//! Intervals of constancy of `(a_q(x), a_q(x + t))`.
//!
//! `a_q` jumps by `+2` at `⟨−jα⟩` and by `−2` at `⟨1/2 − jα⟩`, `0 ≤ j < q`;
//! `a_q(· + t)` does the same at the points shifted by `−t`. Sorting the `4q`
//! points exactly, merging coincidences, evaluating one interval directly and
//! propagating jumps around the circle yields the whole partition.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cf_engine::ConvergentTable;
use crate::circle_arith::fixed::{Fixed, Rotation, Scale};
use crate::circle_arith::{CirclePoint, RealValue, DEFAULT_DIGITS};
use crate::cocycle::{pair_fixed, CocycleContext, PairValue};
use crate::error::{Error, Result};

/// Largest `q` for which every interval is re-evaluated by default.
pub const FULL_VERIFY_LIMIT: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    /// `⟨−jα⟩`, `+2` on the first coordinate.
    A,
    /// `⟨1/2 − jα⟩`, `−2` on the first coordinate.
    B,
    /// `⟨−t − jα⟩`, `+2` on the second coordinate.
    C,
    /// `⟨1/2 − t − jα⟩`, `−2` on the second coordinate.
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    First,
    Second,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A, Family::B, Family::C, Family::D];

    pub fn coordinate(self) -> Coordinate {
        match self {
            Family::A | Family::B => Coordinate::First,
            Family::C | Family::D => Coordinate::Second,
        }
    }

    pub fn jump(self) -> i64 {
        match self {
            Family::A | Family::C => 2,
            Family::B | Family::D => -2,
        }
    }

    fn jump_vector(self) -> (i8, i8) {
        match self {
            Family::A => (2, 0),
            Family::B => (-2, 0),
            Family::C => (0, 2),
            Family::D => (0, -2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discontinuity {
    pub location: CirclePoint,
    pub coordinate: Coordinate,
    pub jump: i64,
    pub family: Family,
    pub j: u64,
}

/// How intervals are re-checked against direct evaluation of the cocycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verification {
    Off,
    /// Every interval when `q ≤ 10⁴`, otherwise `⌈√q⌉` seeded random intervals.
    Auto { seed: u64 },
    Full,
}

#[derive(Clone, Debug)]
pub struct PartitionOptions {
    /// Include the families of `a_q(· + t)`. Without them the partition is
    /// that of `a_q` alone and pairs are reported as `(a_q, a_q)`.
    pub shift_families: bool,
    pub verification: Verification,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            shift_families: true,
            verification: Verification::Auto { seed: 0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub left: CirclePoint,
    /// Right endpoint reduced mod 1 (the wrapping interval ends at the first breakpoint).
    pub right: CirclePoint,
    pub length: RealValue,
    pub value: PairValue,
}

#[derive(Clone, Debug)]
pub struct ConstancyPartition {
    q: u64,
    scale: Scale,
    breakpoints: Vec<Fixed>,
    jumps: Vec<(i8, i8)>,
    /// Number of discontinuity records landing on each breakpoint.
    multiplicity: Vec<u8>,
    values: Vec<PairValue>,
    merged_count: usize,
    verified_intervals: usize,
}

fn family_offset(ctx: &CocycleContext, family: Family) -> Fixed {
    let scale = &ctx.rotation().scale;
    let half = Fixed {
        a: scale.denominator() / 2,
        b: 0,
    };
    let t = ctx.t_fixed();
    let zero = Fixed { a: 0, b: 0 };
    let raw = match family {
        Family::A => zero,
        Family::B => half,
        Family::C => zero.sub(t),
        Family::D => half.sub(t),
    };
    scale.wrap(raw)
}

/// `⟨−jα⟩` for `0 ≤ j < q`, sorted, each with its `j`.
fn sorted_base_orbit(rot: &Rotation, q: u64) -> Result<Vec<(Fixed, u32)>> {
    let q32 = u32::try_from(q).map_err(|_| Error::CoefficientOverflow)?;
    let zero = Fixed { a: 0, b: 0 };
    rot.check_walk(zero, q)?;
    let mut pts = Vec::with_capacity(q as usize);
    let mut p = zero;
    for j in 0..q32 {
        pts.push((p, j));
        p = rot.backward(p);
    }
    let scale = &rot.scale;
    pts.sort_unstable_by(|x, y| scale.cmp(x.0, y.0));
    Ok(pts)
}

/// Adds `offset ∈ [0,1)` to a sorted orbit, keeping it sorted.
fn rotate_sorted(
    scale: &Scale,
    base: &[(Fixed, u32)],
    offset: Fixed,
    tag: u8,
    out: &mut Vec<(Fixed, u32, u8)>,
) {
    let one_minus = Fixed {
        a: scale.denominator() - offset.a,
        b: -offset.b,
    };
    let split = base.partition_point(|(p, _)| scale.cmp(*p, one_minus) == Ordering::Less);
    let c = scale.denominator();
    for &(p, j) in &base[split..] {
        let v = p.add(offset);
        out.push((Fixed { a: v.a - c, b: v.b }, j, tag));
    }
    for &(p, j) in &base[..split] {
        out.push((p.add(offset), j, tag));
    }
}

/// The orbit `⟨iα⟩`, `0 ≤ i < q`, sorted, so that `a_q(x)` becomes a count
/// of orbit points in the arc `[−x, 1/2 − x)`.
struct OrbitCounter {
    scale: Scale,
    q: u64,
    points: Vec<Fixed>,
}

impl OrbitCounter {
    fn new(rot: &Rotation, q: u64) -> Result<Self> {
        let zero = Fixed { a: 0, b: 0 };
        rot.check_walk(zero, q)?;
        let mut points = Vec::with_capacity(q as usize);
        let mut p = zero;
        for _ in 0..q {
            points.push(p);
            p = rot.forward(p);
        }
        let scale = rot.scale.clone();
        points.sort_unstable_by(|x, y| scale.cmp(*x, *y));
        Ok(OrbitCounter { scale, q, points })
    }

    fn rank(&self, x: Fixed) -> usize {
        self.points
            .partition_point(|p| self.scale.cmp(*p, x) == Ordering::Less)
    }

    /// `a_q(x)` for `x ∈ [0, 1)`.
    fn birkhoff(&self, x: Fixed) -> i64 {
        let half = Fixed {
            a: self.scale.denominator() / 2,
            b: 0,
        };
        let lo = self.scale.wrap(Fixed { a: 0, b: 0 }.sub(x));
        let hi = self.scale.wrap(half.sub(x));
        let (rl, rh) = (self.rank(lo), self.rank(hi));
        let inside = if rl <= rh {
            rh - rl
        } else {
            self.points.len() - rl + rh
        };
        2 * inside as i64 - self.q as i64
    }
}

impl ConstancyPartition {
    pub fn build(q: u64, ctx: &CocycleContext) -> Result<Self> {
        Self::build_with(q, ctx, &PartitionOptions::default())
    }

    pub fn build_with(q: u64, ctx: &CocycleContext, opts: &PartitionOptions) -> Result<Self> {
        if q == 0 {
            return Err(Error::PreconditionUnmet("q must be at least 1".into()));
        }
        let rot = ctx.rotation();
        let scale = &rot.scale;
        let base = sorted_base_orbit(rot, q)?;
        let families: &[Family] = if opts.shift_families {
            &Family::ALL
        } else {
            &[Family::A, Family::B]
        };
        let mut merged: Vec<(Fixed, u32, u8)> = Vec::with_capacity(base.len() * families.len());
        for &fam in families {
            rotate_sorted(scale, &base, family_offset(ctx, fam), fam as u8, &mut merged);
        }
        drop(base);
        // the input is a handful of sorted runs; a stable merge sort exploits them
        merged.sort_by(|x, y| scale.cmp(x.0, y.0));

        let mut breakpoints = Vec::with_capacity(merged.len());
        let mut jumps = Vec::with_capacity(merged.len());
        let mut multiplicity = Vec::with_capacity(merged.len());
        let mut i = 0;
        while i < merged.len() {
            let pos = merged[i].0;
            let mut jump = (0i8, 0i8);
            let mut count = 0u8;
            while i < merged.len() && merged[i].0 == pos {
                let fam = Family::ALL[merged[i].2 as usize];
                let (d1, d2) = fam.jump_vector();
                jump = (jump.0 + d1, jump.1 + d2);
                count = count.saturating_add(1);
                i += 1;
            }
            if !opts.shift_families {
                jump.1 = jump.0;
            }
            if jump != (0, 0) {
                breakpoints.push(pos);
                jumps.push(jump);
                multiplicity.push(count);
            }
        }
        let records = merged.len();
        drop(merged);
        let merged_count = records - breakpoints.len();

        let mut partition = ConstancyPartition {
            q,
            scale: scale.clone(),
            breakpoints,
            jumps,
            multiplicity,
            values: Vec::new(),
            merged_count,
            verified_intervals: 0,
        };
        partition.propagate(ctx, opts)?;
        partition.verify(ctx, opts)?;
        Ok(partition)
    }

    /// Doubled-denominator rotation used for midpoint evaluation.
    fn midpoint_kernel(&self, ctx: &CocycleContext) -> Result<(Rotation, Fixed)> {
        let rot = ctx.rotation();
        let fine = self.scale.refined(2)?;
        let fine_rot = Rotation {
            alpha: fine.lift(&self.scale, rot.alpha)?,
            scale: fine.clone(),
        };
        let t = fine.lift(&self.scale, ctx.t_fixed())?;
        Ok((fine_rot, t))
    }

    /// Midpoint of interval `i` in the doubled scale.
    fn midpoint(&self, fine: &Scale, i: usize) -> Fixed {
        let n = self.breakpoints.len();
        if n == 0 {
            return Fixed {
                a: self.scale.denominator(),
                b: 0,
            };
        }
        let left = self.breakpoints[i];
        let right = if i + 1 < n {
            self.breakpoints[i + 1]
        } else {
            let first = self.breakpoints[0];
            Fixed {
                a: first.a + self.scale.denominator(),
                b: first.b,
            }
        };
        fine.wrap(left.add(right))
    }

    fn direct_value(&self, kernel: &(Rotation, Fixed), i: usize, shift: bool) -> Result<PairValue> {
        let (rot, t) = kernel;
        let mid = self.midpoint(&rot.scale, i);
        rot.check_walk(mid, self.q)?;
        rot.check_walk(rot.scale.wrap(mid.add(*t)), self.q)?;
        let v = pair_fixed(rot, self.q, mid, *t);
        Ok(if shift { v } else { PairValue::new(v.first, v.first) })
    }

    fn propagate(&mut self, ctx: &CocycleContext, opts: &PartitionOptions) -> Result<()> {
        let kernel = self.midpoint_kernel(ctx)?;
        let n = self.breakpoints.len();
        let base = self.direct_value(&kernel, 0, opts.shift_families)?;
        let mut values = Vec::with_capacity(n.max(1));
        values.push(base);
        for i in 1..n {
            let prev = values[i - 1];
            let (d1, d2) = self.jumps[i];
            values.push(prev.offset(d1 as i64, d2 as i64));
        }
        if n > 0 {
            let last = values[n - 1];
            let (d1, d2) = self.jumps[0];
            let wrapped = last.offset(d1 as i64, d2 as i64);
            if wrapped != base {
                return Err(Error::WrapInconsistent {
                    q: self.q,
                    detail: format!("propagated {wrapped} back to the start, expected {base}"),
                });
            }
        }
        self.values = values;
        Ok(())
    }

    fn verify(&mut self, ctx: &CocycleContext, opts: &PartitionOptions) -> Result<()> {
        let n = self.values.len();
        let sampled = matches!(opts.verification, Verification::Auto { .. })
            && self.q > FULL_VERIFY_LIMIT;
        let indices: Vec<usize> = match opts.verification {
            Verification::Off => Vec::new(),
            Verification::Full => (0..n).collect(),
            Verification::Auto { .. } if !sampled => (0..n).collect(),
            Verification::Auto { seed } => {
                let want = ((self.q as f64).sqrt().ceil() as usize).min(n);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.q);
                let mut idx = sample(&mut rng, n, want).into_vec();
                idx.sort_unstable();
                idx
            }
        };
        if indices.is_empty() {
            return Ok(());
        }
        let kernel = self.midpoint_kernel(ctx)?;
        let counter = if sampled {
            Some(OrbitCounter::new(&kernel.0, self.q)?)
        } else {
            None
        };
        for &i in &indices {
            let direct = match &counter {
                Some(c) => {
                    let mid = self.midpoint(&kernel.0.scale, i);
                    let first = c.birkhoff(mid);
                    let second = c.birkhoff(kernel.0.scale.wrap(mid.add(kernel.1)));
                    if opts.shift_families {
                        PairValue::new(first, second)
                    } else {
                        PairValue::new(first, first)
                    }
                }
                None => self.direct_value(&kernel, i, opts.shift_families)?,
            };
            if direct != self.values[i] {
                return Err(Error::WrapInconsistent {
                    q: self.q,
                    detail: format!(
                        "interval {i}: propagated {} but direct evaluation gives {direct}",
                        self.values[i]
                    ),
                });
            }
        }
        self.verified_intervals = indices.len();
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discontinuity records absorbed by coincidences (`4q − breakpoints`).
    pub fn merged_count(&self) -> usize {
        self.merged_count
    }

    pub fn verified_intervals(&self) -> usize {
        self.verified_intervals
    }

    pub fn values(&self) -> &[PairValue] {
        &self.values
    }

    /// Jump vector at the left end of interval `i`.
    pub fn jump_at(&self, i: usize) -> (i64, i64) {
        let (a, b) = self.jumps[i];
        (a as i64, b as i64)
    }

    /// Whether the left endpoint of interval `i` carries more than one discontinuity.
    pub fn is_merged_breakpoint(&self, i: usize) -> bool {
        self.multiplicity[i] > 1
    }

    fn length_fixed(&self, i: usize) -> Fixed {
        let n = self.breakpoints.len();
        if n == 0 {
            return self.scale.integer(1);
        }
        let left = self.breakpoints[i];
        if i + 1 < n {
            self.breakpoints[i + 1].sub(left)
        } else {
            Fixed {
                a: self.breakpoints[0].a + self.scale.denominator() - left.a,
                b: self.breakpoints[0].b - left.b,
            }
        }
    }

    pub fn interval(&self, i: usize) -> Interval {
        let n = self.breakpoints.len();
        if n == 0 {
            return Interval {
                left: CirclePoint::zero(),
                right: CirclePoint::zero(),
                length: RealValue::one(),
                value: self.values[0],
            };
        }
        Interval {
            left: self.scale.point(self.breakpoints[i]),
            right: self.scale.point(self.breakpoints[(i + 1) % n]),
            length: self.scale.real(self.length_fixed(i)),
            value: self.values[i],
        }
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        (0..self.len()).map(|i| self.interval(i))
    }

    /// Exact sum of all interval lengths (always 1 for a sound partition).
    pub fn total_length(&self) -> RealValue {
        let mut acc = (0i128, 0i128);
        for i in 0..self.len() {
            let l = self.length_fixed(i);
            acc = (acc.0 + l.a, acc.1 + l.b);
        }
        self.scale.real(Fixed { a: acc.0, b: acc.1 })
    }

    pub fn min_length(&self) -> RealValue {
        self.extreme_length(Ordering::Less)
    }

    pub fn max_length(&self) -> RealValue {
        self.extreme_length(Ordering::Greater)
    }

    fn extreme_length(&self, want: Ordering) -> RealValue {
        let mut best = self.length_fixed(0);
        for i in 1..self.len() {
            let l = self.length_fixed(i);
            if self.scale.cmp(l, best) == want {
                best = l;
            }
        }
        self.scale.real(best)
    }

    /// Total measure carried by each pair value.
    pub fn value_histogram(&self) -> BTreeMap<PairValue, RealValue> {
        let mut sums: BTreeMap<PairValue, (i128, i128)> = BTreeMap::new();
        for (i, v) in self.values.iter().enumerate() {
            let l = self.length_fixed(i);
            let e = sums.entry(*v).or_insert((0, 0));
            e.0 += l.a;
            e.1 += l.b;
        }
        sums.into_iter()
            .map(|(k, (a, b))| (k, self.scale.real(Fixed { a, b })))
            .collect()
    }

    /// Values on the intervals immediately to the right of those carrying
    /// `dominant`, with the measure of those right neighbours.
    pub fn right_neighbor_classes(&self, dominant: PairValue) -> Vec<NeighborClass> {
        let n = self.len();
        let mut acc: BTreeMap<(PairValue, bool), (i128, i128)> = BTreeMap::new();
        if n < 2 {
            return Vec::new();
        }
        for i in 0..n {
            if self.values[i] != dominant {
                continue;
            }
            let next = (i + 1) % n;
            let key = (self.values[next], self.is_merged_breakpoint(next));
            let l = self.length_fixed(next);
            let e = acc.entry(key).or_insert((0, 0));
            e.0 += l.a;
            e.1 += l.b;
        }
        acc.into_iter()
            .map(|((value, merged), (a, b))| NeighborClass {
                value,
                step: value.minus(dominant),
                merged,
                measure: self.scale.real(Fixed { a, b }),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::PreconditionUnmet(format!("csv output failed: {e}"));
        out.write_record([
            "left",
            "right",
            "length",
            "left_decimal",
            "right_decimal",
            "length_decimal",
            "a_q(x)",
            "a_q(x+t)",
        ])
        .map_err(io)?;
        for iv in self.intervals() {
            out.write_record([
                iv.left.to_string(),
                iv.right.to_string(),
                iv.length.to_string(),
                iv.left.value().to_decimal(DEFAULT_DIGITS),
                iv.right.value().to_decimal(DEFAULT_DIGITS),
                iv.length.to_decimal(DEFAULT_DIGITS),
                iv.value.first.to_string(),
                iv.value.second.to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()
            .map_err(|e| Error::PreconditionUnmet(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

impl Serialize for ConstancyPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            q: u64,
            interval_count: usize,
            merged_count: usize,
            verified_intervals: usize,
            intervals: Vec<Interval>,
        }
        Doc {
            q: self.q,
            interval_count: self.len(),
            merged_count: self.merged_count,
            verified_intervals: self.verified_intervals,
            intervals: self.intervals().collect(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborClass {
    pub value: PairValue,
    /// `value − dominant`.
    pub step: (i64, i64),
    /// Reached across a breakpoint where several discontinuities coincide.
    pub merged: bool,
    pub measure: RealValue,
}

/// All `4q` discontinuity records (before merging), in family order.
pub fn discontinuities(q: u64, ctx: &CocycleContext) -> Result<Vec<Discontinuity>> {
    let mut out = Vec::with_capacity(4 * q as usize);
    let minus_alpha = -ctx.alpha();
    for fam in Family::ALL {
        let start = match fam {
            Family::A => RealValue::zero(),
            Family::B => RealValue::half(),
            Family::C => -ctx.t().value(),
            Family::D => &RealValue::half() - ctx.t().value(),
        };
        let mut p = start.reduce_mod_1();
        for j in 0..q {
            out.push(Discontinuity {
                location: p.clone(),
                coordinate: fam.coordinate(),
                jump: fam.jump(),
                family: fam,
                j,
            });
            p = p.translate(&minus_alpha)?;
        }
    }
    Ok(out)
}

/// Which end of each `i/q` cell is closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOrientation {
    /// `[i/q, (i+1)/q)`, the right convention when `α > p/q`.
    LeftClosed,
    /// `(i/q, (i+1)/q]` taken on the circle, the right convention when `α < p/q`.
    RightClosed,
}

/// Cell index of every orbit point `⟨jα⟩`, `0 ≤ j < q`, or `None` on a collision.
fn cell_occupancy(q: u64, table: &ConvergentTable, orientation: CellOrientation) -> Result<bool> {
    let frac = table.alpha().reduce_mod_1().into_value();
    let scale = Scale::common(&[&frac, &RealValue::half()])?;
    let rot = Rotation {
        alpha: scale.fix(&frac)?,
        scale: scale.clone(),
    };
    let zero = Fixed { a: 0, b: 0 };
    rot.check_walk(zero, q)?;
    let mut hits = vec![false; q as usize];
    let mut p = zero;
    let qi = num_bigint::BigInt::from(q);
    for _ in 0..q {
        let scaled = scale.real(p).mul_int(q);
        let cell = match orientation {
            CellOrientation::LeftClosed => scaled.floor(),
            // ⌈y⌉ − 1 modulo q, so 0 falls in the last cell (q−1)/q..1
            CellOrientation::RightClosed => {
                let ceil = -(-&scaled).floor();
                num_integer::Integer::mod_floor(&(ceil - 1), &qi)
            }
        };
        let idx: usize = match cell.try_into() {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        if idx >= hits.len() || hits[idx] {
            return Ok(false);
        }
        hits[idx] = true;
        p = rot.forward(p);
    }
    Ok(true)
}

/// Orientation under which the cells `i/q` each catch one orbit point: the
/// points `⟨jα⟩` sit within `1/q` of `jp/q` on the side given by the sign of
/// `α − p/q`.
pub fn cell_orientation(q: u64, table: &ConvergentTable) -> Result<CellOrientation> {
    let conv = table
        .convergents()
        .iter()
        .rev()
        .find(|c| c.q == q as u128)
        .ok_or(Error::NotADenominator { q })?;
    let approx = RealValue::rational(conv.p, conv.q)?;
    Ok(match table.alpha().compare(&approx)? {
        Ordering::Less => CellOrientation::RightClosed,
        _ => CellOrientation::LeftClosed,
    })
}

/// Each cell of width `1/q` holds exactly one of `⟨jα⟩`, `0 ≤ j < q`, with
/// cells closed on the side given by [`cell_orientation`].
pub fn uniform_distribution_check(q: u64, table: &ConvergentTable) -> Result<bool> {
    if !table.contains_denominator(q) {
        return Err(Error::NotADenominator { q });
    }
    cell_occupancy(q, table, cell_orientation(q, table)?)
}

/// The same occupancy test with a fixed orientation.
pub fn cell_occupancy_check(q: u64, table: &ConvergentTable, orientation: CellOrientation) -> Result<bool> {
    cell_occupancy(q, table, orientation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::DEFAULT_SEARCH_BOUND;

    fn golden() -> RealValue {
        RealValue::new(-1, 1, 2, 5).unwrap()
    }

    fn ctx(t: RealValue) -> CocycleContext {
        CocycleContext::new(&golden(), &t, DEFAULT_SEARCH_BOUND).unwrap()
    }

    fn r(p: i64, q: i64) -> RealValue {
        RealValue::rational(p, q).unwrap()
    }

    #[test]
    fn orbit_counter_matches_walk() {
        let c = ctx(r(2, 7));
        let p = ConstancyPartition::build_with(
            89,
            &c,
            &PartitionOptions {
                shift_families: true,
                verification: Verification::Off,
            },
        )
        .unwrap();
        let kernel = p.midpoint_kernel(&c).unwrap();
        let counter = OrbitCounter::new(&kernel.0, 89).unwrap();
        for i in 0..p.len() {
            let mid = p.midpoint(&kernel.0.scale, i);
            let walked = p.direct_value(&kernel, i, true).unwrap();
            assert_eq!(counter.birkhoff(mid), walked.first);
            assert_eq!(counter.birkhoff(kernel.0.scale.wrap(mid.add(kernel.1))), walked.second);
        }
    }

    #[test]
    fn sampled_verification_above_limit() {
        let p = ConstancyPartition::build(10_946, &ctx(r(1, 3))).unwrap();
        assert_eq!(p.verified_intervals(), 105);
    }

    #[test]
    fn discontinuity_records() {
        let d = discontinuities(1, &ctx(r(1, 3))).unwrap();
        let locs: Vec<RealValue> = d.iter().map(|x| x.location.value().clone()).collect();
        assert_eq!(locs, vec![r(0, 1), r(1, 2), r(2, 3), r(1, 6)]);
        assert_eq!(d[2].family, Family::C);
        assert_eq!(d[2].coordinate, Coordinate::Second);
        assert_eq!(d[3].jump, -2);
        assert_eq!(discontinuities(7, &ctx(r(1, 3))).unwrap().len(), 28);
    }

    #[test]
    fn coincidences_on_different_coordinates_survive() {
        // t = 1/2: B and C both sit at 1/2 but act on different coordinates
        let p = ConstancyPartition::build(1, &ctx(RealValue::half())).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.merged_count(), 2);
        let ivs: Vec<Interval> = p.intervals().collect();
        assert_eq!(ivs[0].left.value(), &r(0, 1));
        assert_eq!(ivs[0].length, r(1, 2));
        assert_eq!(ivs[0].value, PairValue::new(1, -1));
        assert_eq!(ivs[1].value, PairValue::new(-1, 1));
        assert_eq!(p.jump_at(1), (-2, 2));
        assert!(p.is_merged_breakpoint(1));
    }

    #[test]
    fn degenerate_zero_shift() {
        let p = ConstancyPartition::build(1, &ctx(RealValue::zero())).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.jump_at(0), (2, 2));
        assert_eq!(p.jump_at(1), (-2, -2));
    }

    #[test]
    fn quarter_intervals_for_third() {
        let c = ctx(r(1, 3));
        let p = ConstancyPartition::build(1, &c).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.total_length(), RealValue::one());
        for iv in p.intervals() {
            assert_eq!(iv.value.first.abs(), 1);
            assert_eq!(iv.value.second.abs(), 1);
        }
        // breakpoints 0, 1/6, 1/2, 2/3
        let values: Vec<PairValue> = p.values().to_vec();
        assert_eq!(
            values,
            vec![
                PairValue::new(1, 1),
                PairValue::new(1, -1),
                PairValue::new(-1, -1),
                PairValue::new(-1, 1)
            ]
        );
        let h = p.value_histogram();
        assert_eq!(h.values().fold(RealValue::zero(), |a, b| &a + b), RealValue::one());
        for (v, m) in &h {
            let exact = match (v.first, v.second) {
                (1, 1) => r(1, 6),
                (1, -1) => r(1, 3),
                (-1, -1) => r(1, 6),
                _ => r(1, 3),
            };
            assert_eq!(m, &exact);
        }
    }

    #[test]
    fn golden_thirteen_lengths() {
        let c = ctx(r(1, 3));
        let p = ConstancyPartition::build(13, &c).unwrap();
        assert_eq!(p.len(), 52);
        assert_eq!(p.verified_intervals(), 52);
        assert_eq!(p.total_length(), RealValue::one());
        assert!(p.max_length() < r(2, 13));
        let h = p.value_histogram();
        assert!(h.values().any(|m| m >= &r(1, 16)));
        for k in h.keys() {
            assert!([1, 3].contains(&k.first.abs()) && [1, 3].contains(&k.second.abs()));
        }
    }

    #[test]
    fn right_neighbours() {
        let p = ConstancyPartition::build(1, &ctx(RealValue::half())).unwrap();
        let n = p.right_neighbor_classes(PairValue::new(1, -1));
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].value, PairValue::new(-1, 1));
        assert_eq!(n[0].step, (-2, 2));
        assert!(n[0].merged);

        let p3 = ConstancyPartition::build(1, &ctx(r(1, 3))).unwrap();
        for dom in p3.value_histogram().keys() {
            for nc in p3.right_neighbor_classes(*dom) {
                assert!(!nc.merged);
                assert!(matches!(nc.step, (2, 0) | (-2, 0) | (0, 2) | (0, -2)));
            }
        }
    }

    #[test]
    fn single_coordinate_mode() {
        let c = ctx(r(1, 3));
        let opts = PartitionOptions {
            shift_families: false,
            verification: Verification::Full,
        };
        let p = ConstancyPartition::build_with(13, &c, &opts).unwrap();
        assert_eq!(p.len(), 26);
        assert!(p.values().iter().all(|v| v.first == v.second));
    }

    #[test]
    fn equidistribution_examples() {
        let t = ConvergentTable::expand(&golden(), 8).unwrap();
        assert!(uniform_distribution_check(1, &t).unwrap());
        assert!(uniform_distribution_check(8, &t).unwrap());
        // α < 5/8: 0 and ⟨5α⟩ ≈ 0.090 share [0, 1/8)
        assert_eq!(cell_orientation(8, &t).unwrap(), CellOrientation::RightClosed);
        assert!(!cell_occupancy_check(8, &t, CellOrientation::LeftClosed).unwrap());
        assert_eq!(cell_orientation(13, &t).unwrap(), CellOrientation::LeftClosed);
        assert!(uniform_distribution_check(13, &t).unwrap());
        assert_eq!(
            uniform_distribution_check(6, &t),
            Err(Error::NotADenominator { q: 6 })
        );
    }

    #[test]
    fn csv_has_one_row_per_interval() {
        let p = ConstancyPartition::build(3, &ctx(r(1, 3))).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), p.len() + 1);
    }
}
