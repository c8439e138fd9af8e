//! Complex gamma function via the Spouge series, with reflection for the
//! left half-plane and a recurrence lift so the series only runs where its
//! error bound holds.

use super::complex::HPComplex;
use super::elementary::{exp, pi, pow_int};
use super::real::HPReal;
use super::NumericsError;
use num_traits::ToPrimitive;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct SpougeTable {
    a: u64,
    sqrt_two_pi: HPReal,
    /// `c_k` for `k = 1 .. a-1`.
    coeffs: Vec<HPReal>,
}

static TABLE_CACHE: OnceLock<Mutex<HashMap<u32, Arc<SpougeTable>>>> = OnceLock::new();

fn spouge_table(work: u32) -> Arc<SpougeTable> {
    let cache = TABLE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&work) {
        return t.clone();
    }
    // Error < a^(-1/2) (2pi)^(-(a+1/2)); log2(2pi) = 2.6515 bits per term.
    let a = ((work as f64 + 10.0) / 2.6515).ceil() as u64 + 1;
    let two_pi = pi(work).scale2(1);
    let mut coeffs = Vec::with_capacity((a - 1) as usize);
    let e1 = exp(&HPReal::one(work));
    let mut factorial = HPReal::one(work);
    for k in 1..a {
        // c_k = (-1)^(k-1) (a-k)^(k-1/2) e^(a-k) / (k-1)!
        if k > 1 {
            factorial = factorial.mul(&HPReal::from_u64(k - 1, work));
        }
        let x = HPReal::from_u64(a - k, work);
        let power = pow_int(&x, k as i64).div(&x.sqrt());
        let mut c = power.mul(&pow_int(&e1, (a - k) as i64)).div(&factorial);
        if k % 2 == 0 {
            c = c.neg();
        }
        coeffs.push(c);
    }
    let table = Arc::new(SpougeTable { a, sqrt_two_pi: two_pi.sqrt(), coeffs });
    cache.lock().unwrap().insert(work, table.clone());
    table
}

/// Series evaluation for `Re z >= 1.5`.
fn gamma_spouge(z: &HPComplex, work: u32) -> HPComplex {
    let table = spouge_table(work);
    let w = z.sub(&HPComplex::one(work));
    let mut sum = HPComplex::from_real(table.sqrt_two_pi.clone());
    for (k, c) in table.coeffs.iter().enumerate() {
        let denom = w.add(&HPComplex::from_real(HPReal::from_u64(k as u64 + 1, work)));
        sum = sum.add(&HPComplex::from_real(c.clone()).div(&denom));
    }
    let wa = w.add(&HPComplex::from_real(HPReal::from_u64(table.a, work)));
    let half = HPReal::exp2(-1, work);
    let exponent = w.add(&HPComplex::from_real(half));
    wa.powc(&exponent).mul(&wa.neg().exp()).mul(&sum)
}

/// Whether `z` sits within `2^(-prec/2)` of a pole at a non-positive integer.
fn near_pole(z: &HPComplex, prec: u32) -> bool {
    let tol = HPReal::exp2(-((prec / 2) as i64), prec);
    if !z.im.is_zero() && z.im.abs() >= tol {
        return false;
    }
    let n = z.re.round_int();
    if n.to_i64().map_or(true, |v| v > 0) {
        return false;
    }
    let frac = z.re.sub(&HPReal::from_bigint(&n, prec)).abs();
    frac < tol
}

pub fn gamma(z: &HPComplex) -> Result<HPComplex, NumericsError> {
    let prec = z.precision();
    if near_pole(z, prec) {
        return Err(NumericsError::Pole(format!(
            "gamma pole near re={}",
            z.re.to_decimal_string(8)
        )));
    }
    let work = prec + 48;
    let zw = z.with_precision(work);
    let half = HPReal::exp2(-1, work);
    if zw.re < half {
        // Reflection: gamma(z) = pi / (sin(pi z) gamma(1 - z)).
        let pi_w = pi(work);
        let sin_piz = zw.mul_real(&pi_w).sin();
        if sin_piz.is_zero() {
            return Err(NumericsError::Pole("gamma pole on the real axis".into()));
        }
        let rest = gamma(&HPComplex::one(work).sub(&zw))?;
        let v = HPComplex::from_real(pi_w).div(&sin_piz.mul(&rest));
        return Ok(v.with_precision(prec));
    }
    // Lift into Re z >= 1.5 where the series bound applies.
    let mut shift = HPComplex::one(work);
    let mut base = zw.clone();
    let threshold = HPReal::from_f64(1.5, work);
    while base.re < threshold {
        shift = shift.mul(&base);
        base = base.add(&HPComplex::one(work));
    }
    let g = gamma_spouge(&base, work);
    Ok(g.div(&shift).with_precision(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &HPComplex, b: &HPComplex, bits: i64) {
        let d = a.sub(b);
        let tol = HPReal::exp2(-bits, a.precision());
        assert!(d.re.abs() < tol && d.im.abs() < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn integer_values() {
        let g5 = gamma(&HPComplex::from_f64(5.0, 0.0, 160)).unwrap();
        close(&g5, &HPComplex::from_f64(24.0, 0.0, 160), 140);
        let g1 = gamma(&HPComplex::one(160)).unwrap();
        close(&g1, &HPComplex::one(160), 150);
    }

    #[test]
    fn half_integer_values() {
        let prec = 160;
        let sqrt_pi = pi(prec).sqrt();
        let g = gamma(&HPComplex::from_f64(0.5, 0.0, prec)).unwrap();
        close(&g, &HPComplex::from_real(sqrt_pi.clone()), 145);
        // gamma(-3/2) = 4 sqrt(pi) / 3.
        let gm = gamma(&HPComplex::from_f64(-1.5, 0.0, prec)).unwrap();
        let want = sqrt_pi.mul(&HPReal::from_u64(4, prec)).div(&HPReal::from_u64(3, prec));
        close(&gm, &HPComplex::from_real(want), 140);
    }

    #[test]
    fn recurrence_off_axis() {
        let z = HPComplex::from_f64(0.3, 0.7, 160);
        let left = gamma(&z.add(&HPComplex::one(160))).unwrap();
        let right = z.mul(&gamma(&z).unwrap());
        close(&left, &right, 140);
    }

    #[test]
    fn modulus_on_line_one() {
        // |gamma(1+i)|^2 sinh(pi) = pi.
        let prec = 160;
        let g = gamma(&HPComplex::from_f64(1.0, 1.0, prec)).unwrap();
        let p = pi(prec);
        let ep = exp(&p);
        let sinh_pi = ep.sub(&ep.recip()).scale2(-1);
        let lhs = g.norm2().mul(&sinh_pi);
        assert!(lhs.sub(&p).abs() < HPReal::exp2(-140, prec));
    }

    #[test]
    fn poles_are_rejected() {
        for v in [0.0, -1.0, -2.0, -7.0] {
            let z = HPComplex::from_f64(v, 0.0, 128);
            assert!(matches!(gamma(&z), Err(NumericsError::Pole(_))), "v={v}");
        }
        let nearly = HPComplex::new(
            HPReal::exp2(-100, 128).neg(),
            HPReal::zero(128),
        );
        assert!(gamma(&nearly).is_err());
    }

    #[test]
    fn just_off_the_pole_is_fine() {
        let z = HPComplex::from_f64(-2.5, 0.0, 128);
        assert!(gamma(&z).is_ok());
        let z2 = HPComplex::from_f64(-3.0, 0.5, 128);
        assert!(gamma(&z2).is_ok());
    }
}
