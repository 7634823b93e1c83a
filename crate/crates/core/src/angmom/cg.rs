//! Clebsch-Gordan coefficients from the Racah closed form.
//!
//! Phases follow the Condon-Shortley convention: `<j1 j1; j2 (J-j1) | J J>`
//! is positive. Observable quantities downstream only use squared moduli,
//! so they do not depend on this choice.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::HalfInt;
use crate::error::Result;
use crate::scalar::Real;

/// A Clebsch-Gordan coefficient held exactly as `sign * sqrt(squared)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCg {
    pub negative: bool,
    pub squared: BigRational,
}

impl ExactCg {
    pub fn zero() -> Self {
        Self {
            negative: false,
            squared: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.squared.is_zero()
    }

    pub fn to_real<T: Real>(&self) -> T {
        let mag = self.squared.to_f64().unwrap_or(f64::NAN).sqrt();
        T::lit(if self.negative { -mag } else { mag })
    }
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `<j1 m1; j2 m2 | J M>` in exact form.
///
/// Returns zero when `M != m1 + m2` or the triangle rule fails. Projections
/// that do not belong to their magnitude are an error.
pub fn clebsch_gordan_exact(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<ExactCg> {
    j1.check_projection(m1, "j1")?;
    j2.check_projection(m2, "j2")?;
    j.check_projection(m, "J")?;

    if m1 + m2 != m {
        return Ok(ExactCg::zero());
    }
    let (t1, t2, tj) = (j1.twice(), j2.twice(), j.twice());
    if (t1 + t2 + tj) % 2 != 0 || tj < (t1 - t2).abs() || tj > t1 + t2 {
        return Ok(ExactCg::zero());
    }

    // every quantity below is an integer once the triangle/parity checks pass
    let h = |x: i32| x / 2;
    let (tm1, tm2, tm) = (m1.twice(), m2.twice(), m.twice());
    let a = h(tj + t1 - t2);
    let b = h(tj - t1 + t2);
    let c = h(t1 + t2 - tj);
    let d = h(t1 + t2 + tj) + 1;

    let pre_num = BigInt::from(tj + 1)
        * factorial(a)
        * factorial(b)
        * factorial(c)
        * factorial(h(tj + tm))
        * factorial(h(tj - tm))
        * factorial(h(t1 - tm1))
        * factorial(h(t1 + tm1))
        * factorial(h(t2 - tm2))
        * factorial(h(t2 + tm2));
    let pre = BigRational::new(pre_num, factorial(d));

    let mut sum = BigRational::zero();
    for k in 0..=c {
        let terms = [
            k,
            c - k,
            h(t1 - tm1) - k,
            h(t2 + tm2) - k,
            h(tj - t2 + tm1) + k,
            h(tj - t1 - tm2) + k,
        ];
        if terms.iter().any(|&t| t < 0) {
            continue;
        }
        let den = terms.iter().fold(BigInt::one(), |acc, &t| acc * factorial(t));
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    Ok(ExactCg {
        negative: sum.is_negative(),
        squared: pre * &sum * &sum,
    })
}

/// `<j1 m1; j2 m2 | J M>` as a floating-point value.
pub fn clebsch_gordan<T: Real>(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<T> {
    Ok(clebsch_gordan_exact(j1, m1, j2, m2, j, m)?.to_real())
}
