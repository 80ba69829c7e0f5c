//! Fixed-denominator kernel for hot loops.
//!
//! All values of one analysis share a field `Q(√d)`, so they can be written
//! over a common denominator `C` as `(A + B√d)/C` with integer `A`, `B`.
//! Orbit walks and sorts then reduce to integer additions and the sign test
//! of `A + B√d`. Coefficients are held in `i128` and every point entering the
//! kernel is bound-checked, so no intermediate product can overflow.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive};

use super::{CirclePoint, RealValue};
use crate::error::{Error, Result};

/// |A| and |B|·⌈√d⌉ stay below this, so differences square safely in i128.
const LIMIT: i128 = 1 << 61;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Fixed {
    pub a: i128,
    pub b: i128,
}

impl Fixed {
    pub fn add(self, o: Fixed) -> Fixed {
        Fixed {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }

    pub fn sub(self, o: Fixed) -> Fixed {
        Fixed {
            a: self.a - o.a,
            b: self.b - o.b,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Scale {
    c: i128,
    d: i128,
    root_ceil: i128,
    field: u64,
}

impl Scale {
    /// Common denominator and field of `values`.
    pub fn common(values: &[&RealValue]) -> Result<Scale> {
        let mut field = 0u64;
        let mut c = BigInt::one();
        for v in values {
            field = match (field, v.d()) {
                (0, d) | (d, 0) => d,
                (f, d) if f == d => f,
                (f, d) => return Err(Error::IncomparableRepresentations(f, d)),
            };
            c = c.lcm(v.c());
        }
        Self::with_denominator(c, field)
    }

    fn with_denominator(c: BigInt, field: u64) -> Result<Scale> {
        let c = c.to_i128().filter(|c| *c < LIMIT).ok_or(Error::CoefficientOverflow)?;
        let d = field as i128;
        let root_ceil = (field as u128).sqrt() as i128 + 1;
        Ok(Scale {
            c,
            d,
            root_ceil,
            field,
        })
    }

    /// Same field with the denominator multiplied by `k`.
    pub fn refined(&self, k: i128) -> Result<Scale> {
        Self::with_denominator(BigInt::from(self.c) * k, self.field)
    }

    pub fn denominator(&self) -> i128 {
        self.c
    }

    pub fn check(&self, f: Fixed) -> Result<Fixed> {
        let ok = f.a.abs() < LIMIT
            && f
                .b
                .abs()
                .checked_mul(self.root_ceil)
                .is_some_and(|v| v < LIMIT);
        if ok {
            Ok(f)
        } else {
            Err(Error::CoefficientOverflow)
        }
    }

    /// Largest |B| a walk may reach while staying inside the kernel range.
    pub fn max_b(&self) -> i128 {
        LIMIT / self.root_ceil
    }

    pub fn fix(&self, v: &RealValue) -> Result<Fixed> {
        let (a, b, c, d) = v.parts();
        if d != 0 && d != self.field {
            return Err(Error::IncomparableRepresentations(d, self.field));
        }
        let big_c = BigInt::from(self.c);
        let (factor, rem) = big_c.div_rem(c);
        if rem != BigInt::from(0) {
            return Err(Error::PreconditionUnmet(format!(
                "denominator {c} does not divide the common scale {}",
                self.c
            )));
        }
        let fa = (a * &factor).to_i128().ok_or(Error::CoefficientOverflow)?;
        let fb = (b * &factor).to_i128().ok_or(Error::CoefficientOverflow)?;
        self.check(Fixed { a: fa, b: fb })
    }

    /// Re-express a point of a coarser scale in this one.
    pub fn lift(&self, from: &Scale, f: Fixed) -> Result<Fixed> {
        debug_assert_eq!(self.c % from.c, 0);
        let k = self.c / from.c;
        let a = f.a.checked_mul(k).ok_or(Error::CoefficientOverflow)?;
        let b = f.b.checked_mul(k).ok_or(Error::CoefficientOverflow)?;
        self.check(Fixed { a, b })
    }

    pub fn real(&self, f: Fixed) -> RealValue {
        RealValue::new(f.a, f.b, self.c, self.field).expect("positive scale")
    }

    pub fn point(&self, f: Fixed) -> CirclePoint {
        CirclePoint(self.real(f))
    }

    /// Integer `n` in this scale.
    pub fn integer(&self, n: i128) -> Fixed {
        Fixed { a: n * self.c, b: 0 }
    }

    /// Sign of `a + b√d`. Callers keep |a| < 2^63 and |b|√d < 2^63.
    #[inline]
    pub fn sign_of(&self, a: i128, b: i128) -> Ordering {
        if b == 0 {
            return a.cmp(&0);
        }
        let sa = a.cmp(&0);
        let sb = b.cmp(&0);
        if sa == Ordering::Equal || sa == sb {
            return if sa == Ordering::Equal { sb } else { sa };
        }
        let lhs = a * a;
        let rhs = b * b * self.d;
        if sa == Ordering::Greater {
            lhs.cmp(&rhs)
        } else {
            rhs.cmp(&lhs)
        }
    }

    #[inline]
    pub fn sign(&self, f: Fixed) -> Ordering {
        self.sign_of(f.a, f.b)
    }

    #[inline]
    pub fn cmp(&self, x: Fixed, y: Fixed) -> Ordering {
        self.sign_of(x.a - y.a, x.b - y.b)
    }

    /// Wraps a value of `[-1, 2)` into `[0, 1)`.
    #[inline]
    pub fn wrap(&self, f: Fixed) -> Fixed {
        if self.sign(f) == Ordering::Less {
            Fixed { a: f.a + self.c, b: f.b }
        } else if self.sign_of(f.a - self.c, f.b) != Ordering::Less {
            Fixed { a: f.a - self.c, b: f.b }
        } else {
            f
        }
    }

    /// `x < 1/2` for `x` already in `[0, 1)`.
    #[inline]
    pub fn below_half(&self, f: Fixed) -> bool {
        self.sign_of(2 * f.a - self.c, 2 * f.b) == Ordering::Less
    }

    /// `min(x, 1 − x)` for `x` in `[0, 1)`.
    #[inline]
    pub fn distance_to_integers(&self, f: Fixed) -> Fixed {
        if self.below_half(f) {
            f
        } else {
            Fixed {
                a: self.c - f.a,
                b: -f.b,
            }
        }
    }
}

/// The rotation `x ↦ x + α` acting on kernel points.
#[derive(Clone, Debug)]
pub(crate) struct Rotation {
    pub scale: Scale,
    pub alpha: Fixed,
}

impl Rotation {
    #[inline]
    pub fn forward(&self, x: Fixed) -> Fixed {
        let y = x.add(self.alpha);
        if self.scale.sign_of(y.a - self.scale.c, y.b) != Ordering::Less {
            Fixed { a: y.a - self.scale.c, b: y.b }
        } else {
            y
        }
    }

    #[inline]
    pub fn backward(&self, x: Fixed) -> Fixed {
        let y = x.sub(self.alpha);
        if self.scale.sign(y) == Ordering::Less {
            Fixed { a: y.a + self.scale.c, b: y.b }
        } else {
            y
        }
    }

    /// Confirms that `steps` forward or backward moves from `x` stay in range.
    pub fn check_walk(&self, x: Fixed, steps: u64) -> Result<()> {
        let reach = (steps as i128)
            .checked_mul(self.alpha.b.abs())
            .and_then(|r| r.checked_add(x.b.abs()))
            .ok_or(Error::CoefficientOverflow)?;
        if reach <= self.scale.max_b() && self.scale.c < LIMIT / 4 {
            Ok(())
        } else {
            Err(Error::CoefficientOverflow)
        }
    }

    /// `S_n(x) = #{0 ≤ i < n : x + iα ∈ [0, 1/2)}` by direct summation.
    pub fn count_lower(&self, x: Fixed, n: u64) -> u64 {
        let mut p = x;
        let mut count = 0u64;
        for _ in 0..n {
            if self.scale.below_half(p) {
                count += 1;
            }
            p = self.forward(p);
        }
        count
    }

    /// Two counts along one orbit walk: for `x` and for `x + t`.
    pub fn count_lower_pair(&self, x: Fixed, xt: Fixed, n: u64) -> (u64, u64) {
        let (mut p, mut r) = (x, xt);
        let (mut c1, mut c2) = (0u64, 0u64);
        for _ in 0..n {
            c1 += self.scale.below_half(p) as u64;
            c2 += self.scale.below_half(r) as u64;
            p = self.forward(p);
            r = self.forward(r);
        }
        (c1, c2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_matches_big_arithmetic() {
        let s = Scale::common(&[&RealValue::new(-1, 1, 2, 5).unwrap()]).unwrap();
        for a in -30i128..30 {
            for b in -15i128..15 {
                let big = RealValue::new(a, b, 1, 5).unwrap().signum();
                assert_eq!(s.sign_of(a, b), big, "{a} {b}");
            }
        }
    }

    #[test]
    fn fix_and_back() {
        let g = RealValue::new(-1, 1, 2, 5).unwrap();
        let third = RealValue::rational(1, 3).unwrap();
        let s = Scale::common(&[&g, &third, &RealValue::half()]).unwrap();
        assert_eq!(s.denominator(), 6);
        assert_eq!(s.real(s.fix(&g).unwrap()), g);
        assert_eq!(s.real(s.fix(&third).unwrap()), third);
        let root2 = RealValue::new(0, 1, 1, 2).unwrap();
        assert!(s.fix(&root2).is_err());
    }

    #[test]
    fn walk_wraps() {
        let g = RealValue::new(-1, 1, 2, 5).unwrap();
        let s = Scale::common(&[&g, &RealValue::half()]).unwrap();
        let rot = Rotation {
            alpha: s.fix(&g).unwrap(),
            scale: s.clone(),
        };
        let mut x = s.integer(0);
        let mut exact = CirclePoint::zero();
        for _ in 0..50 {
            x = rot.forward(x);
            exact = exact.translate(&g).unwrap();
            assert_eq!(s.real(x), *exact.value());
        }
        for _ in 0..50 {
            x = rot.backward(x);
        }
        assert_eq!(x, s.integer(0));
    }
}
