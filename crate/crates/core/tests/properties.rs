use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use rotcocycle::cf_engine::{convergent_identities, ConvergentTable};
use rotcocycle::cocycle::{CocycleContext, DEFAULT_SEARCH_BOUND};
use rotcocycle::essential_values::{
    close_subgroup, decay_from_table, detect, epsilon_theta_table, limsup_from_table,
    DetectorOptions, SubgroupZ2,
};
use rotcocycle::partition::{ConstancyPartition, PartitionOptions, Verification};
use rotcocycle::{CirclePoint, RealValue};

const FIELDS: [u64; 6] = [2, 3, 5, 6, 7, 13];

fn golden() -> RealValue {
    RealValue::new(-1, 1, 2, 5).unwrap()
}

fn surd_in(d: u64) -> impl Strategy<Value = RealValue> {
    (-40i64..=40, -12i64..=12, 1i64..=30)
        .prop_map(move |(a, b, c)| RealValue::new(a, b, c, d).unwrap())
}

fn surd() -> impl Strategy<Value = RealValue> {
    prop::sample::select(FIELDS.to_vec()).prop_flat_map(surd_in)
}

fn irrational() -> impl Strategy<Value = RealValue> {
    (prop::sample::select(FIELDS.to_vec()), -40i64..=40, 1i64..=12, 1i64..=30)
        .prop_map(|(d, a, b, c)| RealValue::new(a, b, c, d).unwrap())
}

/// A golden-field point `⟨u/m + vα⟩`, covering the degenerate `t ∈ Zα` and
/// `t ∈ Zα + 1/2` families when `u/m ∈ {0, 1/2}`.
fn golden_point() -> impl Strategy<Value = CirclePoint> {
    (prop::sample::select(vec![1i64, 2, 3, 7, 1009]), any::<u32>(), -30i64..=30).prop_map(
        |(m, u, v)| {
            let u = i64::from(u) % m;
            (&RealValue::rational(u, m).unwrap() + &golden().mul_int(v)).reduce_mod_1()
        },
    )
}

fn ctx_for(t: &CirclePoint) -> CocycleContext {
    CocycleContext::new(&golden(), t.value(), DEFAULT_SEARCH_BOUND).unwrap()
}

fn golden_table(depth: usize) -> ConvergentTable {
    ConvergentTable::expand(&golden(), depth).unwrap()
}

/// `x mod 1` placed in `[0, 1)` by the exact floor.
fn frac(x: &RealValue) -> RealValue {
    x - &RealValue::integer(x.floor())
}

/// `[a₀; a₁, …, a_k]` folded from the back as an exact fraction.
fn evaluate_cf(a0: i128, quotients: &[u128]) -> (BigInt, BigInt) {
    let (mut num, mut den) = (BigInt::one(), BigInt::zero());
    for &a in quotients.iter().rev() {
        let next = BigInt::from(a) * &num + &den;
        den = num;
        num = next;
    }
    (BigInt::from(a0) * &num + &den, num)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_bounds_and_symmetry(x in surd()) {
        let n = x.distance_to_integers();
        prop_assert!(n >= RealValue::zero());
        prop_assert!(n <= RealValue::half());
        prop_assert_eq!(&n, &(-&x).distance_to_integers());
        // ‖x‖ = min(frac, 1 − frac)
        let f = frac(&x);
        let g = &RealValue::one() - &f;
        prop_assert_eq!(n, if f <= g { f } else { g });
    }

    #[test]
    fn reduction_ignores_integer_shifts(x in surd(), k in -1000i64..=1000) {
        let shifted = &x + &RealValue::integer(k);
        prop_assert_eq!(shifted.reduce_mod_1(), x.reduce_mod_1());
        prop_assert_eq!(x.reduce_mod_1().into_value(), frac(&x));
    }

    #[test]
    fn half_of_double_distance(x in surd()) {
        let twice = x.mul_int(2).distance_to_integers();
        prop_assert!(x.distance_to_integers().mul_int(2) >= twice);
    }

    #[test]
    fn compare_is_a_total_order(
        d in prop::sample::select(FIELDS.to_vec()),
        seeds in prop::collection::vec((-40i64..=40, -12i64..=12, 1i64..=30), 3),
    ) {
        let v: Vec<RealValue> = seeds
            .iter()
            .map(|&(a, b, c)| RealValue::new(a, b, c, d).unwrap())
            .collect();
        for x in &v {
            prop_assert_eq!(x.compare(x).unwrap(), Ordering::Equal);
            for y in &v {
                let xy = x.compare(y).unwrap();
                prop_assert_eq!(xy, y.compare(x).unwrap().reverse());
                // the sign of the difference is an independent oracle
                prop_assert_eq!(xy, (x - y).signum());
                if xy == Ordering::Equal {
                    prop_assert_eq!(x, y);
                }
                for z in &v {
                    if xy != Ordering::Greater && y.compare(z).unwrap() != Ordering::Greater {
                        prop_assert_ne!(x.compare(z).unwrap(), Ordering::Greater);
                    }
                }
            }
        }
    }

    #[test]
    fn convergent_recurrences(alpha in irrational()) {
        let table = ConvergentTable::expand_available(&alpha, 14).unwrap();
        let a0 = table.a0();
        let qs = table.quotients();
        for c in table.convergents() {
            let (p, q) = evaluate_cf(a0, &qs[..c.k]);
            prop_assert_eq!(BigInt::from(c.p), p, "k = {}", c.k);
            prop_assert_eq!(BigInt::from(c.q), q, "k = {}", c.k);
        }
        convergent_identities(&table).unwrap();
        if let Some(per) = table.periodicity() {
            for (i, &a) in qs.iter().enumerate().skip(per.preperiod) {
                prop_assert_eq!(a, per.period[(i - per.preperiod) % per.period.len()]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parity_antisymmetry_and_counting(t in golden_point(), x in golden_point(), n in -300i64..=300) {
        let ctx = ctx_for(&t);
        let a = ctx.birkhoff_a(n, &x).unwrap();
        prop_assert_eq!((a - n).rem_euclid(2), 0);
        let half = x.translate(&RealValue::half()).unwrap();
        prop_assert_eq!(ctx.birkhoff_a(n, &half).unwrap(), -a);
        if n >= 0 {
            let s = ctx.count_s(n as u64, &x).unwrap() as i64;
            prop_assert_eq!(a, 2 * s - n);
        }
    }

    #[test]
    fn half_shift_pairs_are_antidiagonal(x in golden_point(), n in -300i64..=300) {
        let ctx = ctx_for(&CirclePoint::new(&RealValue::half()));
        let p = ctx.pair(n, &x).unwrap();
        prop_assert_eq!(p.second, -p.first);
    }

    #[test]
    fn cocycle_identity(t in golden_point(), x in golden_point(), m in -200i64..=200, n in -200i64..=200) {
        prop_assert!(ctx_for(&t).check_cocycle_identity(m, n, &x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_invariants(t in golden_point(), q in 1u64..=400, pick in any::<prop::sample::Index>(), in_d in any::<bool>()) {
        let table = golden_table(20);
        let d: Vec<u64> = table.denominator_set().into_iter().filter(|&q| q <= 400).collect();
        let q = if in_d { d[pick.index(d.len())] } else { q };
        let ctx = ctx_for(&t);
        let opts = PartitionOptions { shift_families: true, verification: Verification::Full };
        let p = ConstancyPartition::build_with(q, &ctx, &opts).unwrap();
        prop_assert_eq!(p.total_length(), RealValue::one());
        prop_assert!(p.len() as u64 <= 4 * q);
        prop_assert_eq!(p.verified_intervals(), p.len());
        let net = (0..p.len()).map(|i| p.jump_at(i)).fold((0, 0), |s, j| (s.0 + j.0, s.1 + j.1));
        prop_assert_eq!(net, (0, 0));
        for iv in p.intervals() {
            // midpoint of the (possibly wrapping) interval, summed directly
            let mid = iv.left.translate(&iv.length.div_int(2).unwrap()).unwrap();
            let qi = q as i64;
            prop_assert_eq!(ctx.birkhoff_a(qi, &mid).unwrap(), iv.value.first);
            prop_assert_eq!(
                ctx.birkhoff_a(qi, &mid.translate(ctx.t().value()).unwrap()).unwrap(),
                iv.value.second
            );
            if q % 2 == 1 && table.contains_denominator(q) {
                prop_assert!([1, 3].contains(&iv.value.first.abs()));
                prop_assert!([1, 3].contains(&iv.value.second.abs()));
            }
        }
        if table.contains_denominator(q) {
            let et = &epsilon_theta_table(&[q], &ctx).unwrap()[0];
            let qi = q as i64;
            prop_assert!(p.max_length() < RealValue::rational(2, qi).unwrap());
            let floor = [
                RealValue::rational(1, 24 * qi).unwrap(),
                et.epsilon.div_int(qi).unwrap(),
                et.theta.div_int(qi).unwrap(),
            ]
            .into_iter()
            .min_by(|a, b| a.compare(b).unwrap())
            .unwrap();
            prop_assert!(p.min_length() >= floor);
            let m = [RealValue::rational(1, 24).unwrap(), et.epsilon.clone(), et.theta.clone()]
                .into_iter()
                .min_by(|a, b| a.compare(b).unwrap())
                .unwrap();
            // |I_i| / |I_j| > m/2 for the extreme pair
            prop_assert!(p.min_length().mul_int(2) > &p.max_length() * &m || m.is_zero());
        }
    }

    #[test]
    fn epsilon_theta_bounds_and_verdicts(t in golden_point()) {
        let ctx = ctx_for(&t);
        let table = golden_table(14);
        let et = epsilon_theta_table(&table.denominator_set(), &ctx).unwrap();
        for e in &et {
            prop_assert!(e.epsilon < RealValue::one(), "q = {}", e.q);
            prop_assert!(e.theta < RealValue::one(), "q = {}", e.q);
            prop_assert!(e.i_q.unsigned_abs() < e.q.max(1) || e.q == 1);
            prop_assert!(e.j_q.unsigned_abs() < e.q.max(1) || e.q == 1);
        }
        let limsup = limsup_from_table(&et);
        let decay = decay_from_table(&ctx, &et);
        prop_assert!(!(limsup.holds_empirically && decay.inferred.is_some()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn candidates_are_odd_and_closed_under_negation(t in golden_point()) {
        let ctx = ctx_for(&t);
        let qs = golden_table(14).denominator_set();
        let opts = DetectorOptions { window: 3, ..DetectorOptions::default() };
        let cands = detect(&qs, &ctx, &opts).unwrap();
        for c in &cands {
            let (a, b) = (c.value.first, c.value.second);
            prop_assert!(a % 2 != 0 && b % 2 != 0);
            prop_assert!(a.abs() <= 3 && b.abs() <= 3);
        }
        let g = close_subgroup(&cands).unwrap();
        for c in &cands {
            prop_assert!(g.contains((-c.value.first, -c.value.second)));
        }
        if ctx.t_in_zalpha_plus_half() == Some(0) {
            for c in &cands {
                prop_assert_eq!(c.value.second, -c.value.first);
            }
        }
    }
}

proptest! {
    #[test]
    fn subgroup_normal_form_is_canonical(
        gens in prop::collection::vec((-9i64..=9, -9i64..=9), 0..5),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        k in -4i64..=4,
    ) {
        let g = SubgroupZ2::generated_by(&gens).unwrap();
        let mut rev = gens.clone();
        rev.reverse();
        prop_assert_eq!(&SubgroupZ2::generated_by(&rev).unwrap(), &g);
        // an elementary row operation keeps the generated group
        if gens.len() >= 2 {
            let (i, j) = (i.index(gens.len()), j.index(gens.len()));
            if i != j {
                let mut moved = gens.clone();
                moved[i] = (moved[i].0 + k * gens[j].0, moved[i].1 + k * gens[j].1);
                prop_assert_eq!(&SubgroupZ2::generated_by(&moved).unwrap(), &g);
            }
        }
        for &(a, b) in &gens {
            prop_assert!(g.contains((a, b)));
            prop_assert!(g.contains((-a, -b)));
        }
        prop_assert_eq!(&SubgroupZ2::generated_by(&g.basis).unwrap(), &g);
    }
}
