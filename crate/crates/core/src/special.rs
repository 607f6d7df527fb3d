//! Log-gamma, digamma and trigamma via upward recurrence to `x ≥ 10` followed
//! by the Stirling / Bernoulli asymptotic series, plus a safeguarded Newton
//! inverse of the digamma function.

use crate::error::{Error, Result};
use crate::scalar::Real;

const SHIFT: f64 = 10.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

fn check_domain<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: x.as_f64(),
        })
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    check_domain("ln_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

/// `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    check_domain("digamma", x)?;
    Ok(digamma_unchecked(x))
}

/// `ψ'(x)` for `x > 0`.
pub fn trigamma<T: Real>(x: T) -> Result<T> {
    check_domain("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(SHIFT);
    let mut z = x;
    let mut prod = T::one();
    while z < shift {
        prod *= z;
        z += T::one();
    }
    let zi = z.recip();
    let zi2 = zi * zi;
    // Bernoulli terms B_2k / (2k(2k-1) z^(2k-1))
    let series = zi
        * (T::lit(1.0 / 12.0)
            + zi2
                * (T::lit(-1.0 / 360.0)
                    + zi2
                        * (T::lit(1.0 / 1260.0)
                            + zi2
                                * (T::lit(-1.0 / 1680.0)
                                    + zi2
                                        * (T::lit(1.0 / 1188.0)
                                            + zi2
                                                * (T::lit(-691.0 / 360_360.0)
                                                    + zi2 * T::lit(1.0 / 156.0)))))));
    let stirling = (z - T::lit(0.5)) * z.ln() - z + T::lit(HALF_LN_2PI) + series;
    stirling - prod.ln()
}

pub(crate) fn digamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(SHIFT);
    let mut z = x;
    let mut acc = T::zero();
    while z < shift {
        acc -= z.recip();
        z += T::one();
    }
    let zi2 = (z * z).recip();
    let series = zi2
        * (T::lit(1.0 / 12.0)
            - zi2
                * (T::lit(1.0 / 120.0)
                    - zi2
                        * (T::lit(1.0 / 252.0)
                            - zi2
                                * (T::lit(1.0 / 240.0)
                                    - zi2
                                        * (T::lit(1.0 / 132.0)
                                            - zi2
                                                * (T::lit(691.0 / 32_760.0)
                                                    - zi2 * T::lit(1.0 / 12.0)))))));
    acc + z.ln() - T::lit(0.5) / z - series
}

pub(crate) fn trigamma_unchecked<T: Real>(x: T) -> T {
    let shift = T::lit(SHIFT);
    let mut z = x;
    let mut acc = T::zero();
    while z < shift {
        acc += (z * z).recip();
        z += T::one();
    }
    let zi = z.recip();
    let zi2 = zi * zi;
    let series = zi
        + zi2 * T::lit(0.5)
        + zi2
            * zi
            * (T::lit(1.0 / 6.0)
                - zi2
                    * (T::lit(1.0 / 30.0)
                        - zi2
                            * (T::lit(1.0 / 42.0)
                                - zi2
                                    * (T::lit(1.0 / 30.0)
                                        - zi2
                                            * (T::lit(5.0 / 66.0)
                                                - zi2
                                                    * (T::lit(691.0 / 2730.0)
                                                        - zi2 * T::lit(7.0 / 6.0)))))));
    acc + series
}

/// Result of solving `ψ(x) = target`.
#[derive(Clone, Copy, Debug)]
pub struct DigammaInverse<T> {
    pub value: T,
    pub iterations: usize,
}

/// Solves `ψ(x) = target` for `x > 0` by Newton's method from `start`,
/// falling back to bisection whenever a Newton step leaves the current bracket.
pub fn inverse_digamma<T: Real>(target: T, start: T, tol: T) -> Result<DigammaInverse<T>> {
    if !target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "digamma inversion target must be finite, got {target}"
        )));
    }
    let two = T::lit(2.0);
    let mut x = if start > T::zero() && start.is_finite() {
        start
    } else {
        T::one()
    };
    // bracket [lo, hi] with ψ(lo) ≤ target ≤ ψ(hi)
    let mut lo = x;
    while digamma_unchecked(lo) > target {
        lo /= two;
        if lo < T::min_positive_value() {
            return Err(Error::InvalidParameter(format!(
                "digamma inversion target {target} is below the representable range"
            )));
        }
    }
    let mut hi = x;
    while digamma_unchecked(hi) < target {
        hi *= two;
        if !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "digamma inversion target {target} is above the representable range"
            )));
        }
    }
    for iterations in 1..=200 {
        let f = digamma_unchecked(x) - target;
        if f > T::zero() {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let mut next = x - f / trigamma_unchecked(x);
        if !(next > lo && next < hi) {
            next = (lo + hi) / two;
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.max(T::one()) {
            return Ok(DigammaInverse {
                value: x,
                iterations,
            });
        }
    }
    Err(Error::NotConverged {
        what: "digamma inversion".into(),
        iterations: 200,
    })
}
