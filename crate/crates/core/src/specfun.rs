//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Only the J-family is needed: the radial eigenfunction on the disk is
//! `c1 * J0(sqrt(lambda) r)` (the Y0 coefficient vanishes because Y1 blows up
//! at the origin), and its slope brings in J1.
//!
//! Evaluation strategy: the alternating power series up to the switchover
//! `x = 12`, and Miller's downward three-term recurrence with the
//! `J0 + 2 J2 + 2 J4 + ... = 1` normalization beyond it. At `x = 12` the
//! largest series term is about `4e3`, so cancellation costs at most four
//! digits and the series stays under `1e-12` relative; the recurrence is
//! accurate essentially to machine precision for all larger arguments.

use crate::{Error, Result};

/// Series/recurrence switchover point.
const SERIES_CUTOFF: f64 = 12.0;

/// `J0(x)` for finite `x >= 0`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j0(x))
}

/// `J1(x)` for finite `x >= 0`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j1(x))
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "bessel argument" });
    }
    if x < 0.0 {
        return Err(Error::OutOfRange { what: "bessel argument must be >= 0" });
    }
    Ok(())
}

/// First positive zero of J0, `j_{0,0} = 2.40482555769577...`,
/// found by bisection of the series evaluation on [2, 3].
pub fn first_j0_zero() -> f64 {
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    // J0(2) > 0 > J0(3)
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn j0(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        j0_series(x)
    } else {
        miller(x).0
    }
}

pub(crate) fn j1(x: f64) -> f64 {
    if x <= SERIES_CUTOFF {
        j1_series(x)
    } else {
        miller(x).1
    }
}

/// J0 power series: sum_k (-1)^k (x^2/4)^k / (k!)^2.
fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    loop {
        term *= -q / (k * k);
        sum += term;
        if libm::fabs(term) < 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

/// J1 power series: (x/2) sum_k (-1)^k (x^2/4)^k / (k! (k+1)!).
fn j1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    loop {
        term *= -q / (k * (k + 1.0));
        sum += term;
        if libm::fabs(term) < 1e-18 {
            return 0.5 * x * sum;
        }
        k += 1.0;
    }
}

/// Miller's downward recurrence; returns `(J0(x), J1(x))` for `x > 0`.
///
/// Starts well above the turning point `n ~ x` with arbitrary seed values,
/// recurses `J_{n-1} = (2n/x) J_n - J_{n+1}` down to order zero, and fixes
/// the overall scale with `J0 + 2 sum_{k>=1} J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64) {
    let start = (x as usize + 20 + (6.0 * libm::sqrt(x)) as usize) & !1;
    let mut fnp1 = 0.0_f64;
    let mut fnn = 1e-300_f64;
    let mut norm = 0.0_f64;
    let mut f1 = 0.0_f64;
    for n in (1..=start).rev() {
        let fnm1 = (2.0 * n as f64 / x) * fnn - fnp1;
        fnp1 = fnn;
        fnn = fnm1;
        // after the shift fnp1 holds the unnormalized J_n
        if n % 2 == 0 {
            norm += 2.0 * fnp1;
        }
        if n == 1 {
            f1 = fnp1;
        }
        // rescale to dodge overflow of the unnormalized recurrence
        if libm::fabs(fnn) > 1e200 {
            fnn *= 1e-200;
            fnp1 *= 1e-200;
            norm *= 1e-200;
            f1 *= 1e-200;
        }
    }
    norm += fnn; // J0 term
    (fnn / norm, f1 / norm)
}
