//! Incomplete gamma functions with complex order and positive real
//! argument. Small arguments go through the lower-gamma power series,
//! large ones through the Legendre continued fraction (modified Lentz).

use super::complex::HPComplex;
use super::elementary::{exp, ln};
use super::gamma::gamma;
use super::real::HPReal;
use super::NumericsError;

/// `x^s e^(-x)`, the prefactor shared by both expansions.
fn prefactor(s: &HPComplex, x: &HPReal, work: u32) -> HPComplex {
    let xw = x.with_precision(work);
    let sw = s.with_precision(work);
    let power = sw.mul_real(&ln(&xw)).exp();
    power.mul_real(&exp(&xw.neg()))
}

fn series_limit(work: u32) -> usize {
    10_000 + 40 * work as usize
}

/// Power series for the lower function:
/// `gamma_lower(s,x) = x^s e^(-x) sum_n x^n / (s (s+1) ... (s+n))`.
fn lower_series(s: &HPComplex, x: &HPReal, work: u32) -> Result<HPComplex, NumericsError> {
    let sw = s.with_precision(work);
    let xw = HPComplex::from_real(x.with_precision(work));
    let mut denom = sw.clone();
    if denom.is_zero() {
        return Err(NumericsError::Pole("lower incomplete gamma at s = 0".into()));
    }
    let mut term = denom.recip();
    let mut sum = term.clone();
    let cutoff = -((work as i64) + 8);
    for n in 1..series_limit(work) {
        denom = sw.add(&HPComplex::from_real(HPReal::from_u64(n as u64, work)));
        if denom.is_zero() {
            return Err(NumericsError::Pole("lower incomplete gamma at non-positive integer".into()));
        }
        term = term.mul(&xw).div(&denom);
        sum = sum.add(&term);
        if !term.is_zero() {
            let mag = term.norm2();
            if !mag.is_zero() && mag.magnitude_exp() / 2 < cutoff {
                return Ok(prefactor(s, x, work).mul(&sum));
            }
        } else {
            return Ok(prefactor(s, x, work).mul(&sum));
        }
    }
    Err(NumericsError::Convergence { context: "incomplete gamma series", iterations: series_limit(work) })
}

/// Legendre continued fraction for the upper function via modified Lentz.
fn upper_cf(s: &HPComplex, x: &HPReal, work: u32) -> Result<HPComplex, NumericsError> {
    let sw = s.with_precision(work);
    let xw = x.with_precision(work);
    let tiny = HPComplex::from_real(HPReal::exp2(-2 * work as i64, work));
    let one = HPComplex::one(work);
    let guard = |v: HPComplex| if v.is_zero() { tiny.clone() } else { v };

    // b_0 = x + 1 - s, a_k = -k(k - s), b_k = b_0 + 2k.
    let b0 = HPComplex::from_real(xw.add(&HPReal::one(work))).sub(&sw);
    let mut f = guard(b0.clone());
    let mut c = f.clone();
    let mut d = HPComplex::zero(work);
    let cutoff = HPReal::exp2(-((work as i64) + 8), work);
    for k in 1..series_limit(work) {
        let kr = HPReal::from_u64(k as u64, work);
        let a = HPComplex::from_real(kr.clone()).mul(&HPComplex::from_real(kr.clone()).sub(&sw)).neg();
        let b = b0.add(&HPComplex::from_real(kr.scale2(1)));
        d = guard(b.add(&a.mul(&d))).recip();
        c = guard(b.add(&a.div(&c)));
        let delta = c.mul(&d);
        f = f.mul(&delta);
        let err = delta.sub(&one);
        if err.re.abs() < cutoff && err.im.abs() < cutoff {
            return Ok(prefactor(s, x, work).div(&f));
        }
    }
    Err(NumericsError::Convergence { context: "incomplete gamma continued fraction", iterations: series_limit(work) })
}

/// Whether `s` sits close enough to a pole of gamma that the subtraction
/// `gamma(s) - gamma_lower(s, x)` cancels badly. Both terms blow up like
/// `1/(s + k)` there while the difference stays bounded.
fn near_gamma_pole(s: &HPComplex) -> bool {
    let re = s.re.to_f64();
    let im = s.im.to_f64();
    if re > 0.3 || im.abs() > 0.25 {
        return false;
    }
    (re - re.round()).abs() < 0.25
}

/// Whether the power series is the better-conditioned branch at `(s, x)`.
fn series_preferred(s: &HPComplex, x: &HPReal) -> bool {
    let prec = s.precision().max(x.precision());
    let bound = s.abs().add(&HPReal::one(prec));
    x.with_precision(prec) < bound
}

pub fn lower_incomplete_gamma(s: &HPComplex, x: &HPReal) -> Result<HPComplex, NumericsError> {
    assert!(!x.is_negative(), "incomplete gamma requires x >= 0");
    let prec = s.precision().max(x.precision());
    if x.is_zero() {
        return Ok(HPComplex::zero(prec));
    }
    let work = prec + 48;
    let v = if series_preferred(s, x) {
        lower_series(s, x, work)?
    } else {
        gamma(&s.with_precision(work))?.sub(&upper_cf(s, x, work)?)
    };
    Ok(v.with_precision(prec))
}

pub fn upper_incomplete_gamma(s: &HPComplex, x: &HPReal) -> Result<HPComplex, NumericsError> {
    assert!(!x.is_negative(), "incomplete gamma requires x >= 0");
    let prec = s.precision().max(x.precision());
    let work = prec + 48;
    if x.is_zero() {
        return Ok(gamma(&s.with_precision(work))?.with_precision(prec));
    }
    let v = if series_preferred(s, x) && !near_gamma_pole(s) {
        match gamma(&s.with_precision(work)) {
            Ok(g) => g.sub(&lower_series(s, x, work)?),
            // Near a pole of gamma the subtraction form is unusable, but the
            // continued fraction still converges, just more slowly.
            Err(NumericsError::Pole(_)) => upper_cf(s, x, work)?,
            Err(e) => return Err(e),
        }
    } else {
        upper_cf(s, x, work)?
    };
    Ok(v.with_precision(prec))
}
