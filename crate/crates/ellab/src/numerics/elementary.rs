//! Elementary transcendental functions on [`HPReal`]: cached constants,
//! exp/ln via argument reduction, trig via mod-pi/2 reduction, arctangent
//! via repeated halving.

use super::real::HPReal;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

static PI_CACHE: OnceLock<Mutex<HashMap<u32, HPReal>>> = OnceLock::new();
static LN2_CACHE: OnceLock<Mutex<HashMap<u32, HPReal>>> = OnceLock::new();

fn cached(
    cache: &'static OnceLock<Mutex<HashMap<u32, HPReal>>>,
    prec: u32,
    compute: impl FnOnce(u32) -> HPReal,
) -> HPReal {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().unwrap().get(&prec) {
        return v.clone();
    }
    let v = compute(prec);
    map.lock().unwrap().insert(prec, v.clone());
    v
}

/// Scaled arctangent of a unit fraction: `round(2^scale * atan(1/n))`.
fn atan_inv_scaled(n: u64, scale: u64) -> BigInt {
    let n2 = BigInt::from(n) * BigInt::from(n);
    let mut term = (BigInt::from(1u8) << scale as usize) / BigInt::from(n);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !term.is_zero() {
        let contrib = &term / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += contrib;
        } else {
            sum -= contrib;
        }
        term /= &n2;
        k += 1;
    }
    sum
}

pub fn pi(prec: u32) -> HPReal {
    cached(&PI_CACHE, prec, |prec| {
        let scale = prec as u64 + 32;
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239).
        let v = atan_inv_scaled(5, scale) * 16 - atan_inv_scaled(239, scale) * 4;
        let r = HPReal::from_bigint(&v, prec);
        r.scale2(-(scale as i64))
    })
}

pub fn ln2(prec: u32) -> HPReal {
    cached(&LN2_CACHE, prec, |prec| {
        let scale = prec as u64 + 32;
        // ln 2 = 2 atanh(1/3) = 2 sum 1/((2k+1) 3^(2k+1)).
        let mut term = (BigInt::from(1u8) << scale as usize) / BigInt::from(3u8);
        let mut sum = BigInt::zero();
        let mut k = 0u64;
        while !term.is_zero() {
            sum += &term / BigInt::from(2 * k + 1);
            term /= BigInt::from(9u8);
            k += 1;
        }
        let r = HPReal::from_bigint(&(sum * 2), prec);
        r.scale2(-(scale as i64))
    })
}

fn value_msb(x: &HPReal) -> i64 {
    x.magnitude_exp()
}

pub fn exp(x: &HPReal) -> HPReal {
    let prec = x.precision();
    if x.is_zero() {
        return HPReal::one(prec);
    }
    let work = prec + 48;
    // Range reduce: x = k ln2 + r with |r| <= ln2/2, then e^x = 2^k e^r.
    let extra = value_msb(x).max(0) as u32;
    let l2 = ln2(work + extra + 16);
    let xw = x.with_precision(work + extra + 16);
    let k = xw.div(&l2).round_int();
    let ki = k.to_i64().expect("exp argument out of range");
    let r = xw.sub(&HPReal::from_bigint(&k, work + extra + 16).mul(&l2)).with_precision(work);
    // Halve 8 times so the Taylor tail shrinks ~8 bits per term.
    let j = 8;
    let rs = r.scale2(-j);
    let mut sum = HPReal::one(work);
    let mut term = HPReal::one(work);
    let mut n = 1u64;
    loop {
        term = term.mul(&rs).div(&HPReal::from_u64(n, work));
        if term.is_zero() || value_msb(&term) < -(work as i64 + 8) {
            break;
        }
        sum = sum.add(&term);
        n += 1;
    }
    let mut v = sum;
    for _ in 0..j {
        v = v.mul(&v);
    }
    v.scale2(ki).with_precision(prec)
}

pub fn ln(x: &HPReal) -> HPReal {
    assert!(x.is_positive(), "ln requires a positive argument");
    let prec = x.precision();
    let work = prec + 48;
    let xw = x.with_precision(work);
    // Split x = m * 2^e with m in [1, 2); near 1 skip the split so the
    // atanh series sees the small argument directly.
    let e = value_msb(&xw);
    let (m, e) = if (-1..=0).contains(&e) {
        (xw.clone(), 0i64)
    } else {
        (xw.scale2(-e), e)
    };
    let one = HPReal::one(work);
    let u = m.sub(&one).div(&m.add(&one));
    // ln m = 2 atanh u = 2 sum u^(2k+1)/(2k+1), |u| < 1/3.
    let mut sum = HPReal::zero(work);
    let mut t = u.clone();
    let u2 = u.mul(&u);
    let mut k = 0u64;
    while !t.is_zero() && value_msb(&t) >= -(work as i64 + 8) {
        sum = sum.add(&t.div(&HPReal::from_u64(2 * k + 1, work)));
        t = t.mul(&u2);
        k += 1;
    }
    let lnm = sum.scale2(1);
    let v = if e == 0 {
        lnm
    } else {
        lnm.add(&HPReal::from_i64(e, work).mul(&ln2(work)))
    };
    v.with_precision(prec)
}

/// Simultaneous sine and cosine.
pub fn sin_cos(x: &HPReal) -> (HPReal, HPReal) {
    let prec = x.precision();
    if x.is_zero() {
        return (HPReal::zero(prec), HPReal::one(prec));
    }
    let extra = value_msb(x).max(0) as u32 + 16;
    let work = prec + 48 + extra;
    let half_pi = pi(work).scale2(-1);
    let xw = x.with_precision(work);
    let q = xw.div(&half_pi).round_int();
    let r = xw.sub(&HPReal::from_bigint(&q, work).mul(&half_pi));
    let (s, c) = sin_cos_taylor(&r, work);
    let quadrant = q.mod_floor(&BigInt::from(4u8)).to_u8().unwrap();
    let (s, c) = match quadrant {
        0 => (s, c),
        1 => (c, s.neg()),
        2 => (s.neg(), c.neg()),
        _ => (c.neg(), s),
    };
    (s.with_precision(prec), c.with_precision(prec))
}

fn sin_cos_taylor(r: &HPReal, work: u32) -> (HPReal, HPReal) {
    // |r| <= pi/4; both alternating series, terms shrink superlinearly.
    let r2 = r.mul(r);
    let mut s = r.clone();
    let mut t = r.clone();
    let mut n = 1u64;
    loop {
        t = t.mul(&r2).div(&HPReal::from_u64((2 * n) * (2 * n + 1), work)).neg();
        if t.is_zero() || value_msb(&t) < -(work as i64 + 8) {
            break;
        }
        s = s.add(&t);
        n += 1;
    }
    let mut c = HPReal::one(work);
    let mut t = HPReal::one(work);
    let mut n = 1u64;
    loop {
        t = t.mul(&r2).div(&HPReal::from_u64((2 * n - 1) * (2 * n), work)).neg();
        if t.is_zero() || value_msb(&t) < -(work as i64 + 8) {
            break;
        }
        c = c.add(&t);
        n += 1;
    }
    (s, c)
}

pub fn atan(x: &HPReal) -> HPReal {
    let prec = x.precision();
    if x.is_zero() {
        return HPReal::zero(prec);
    }
    let work = prec + 48;
    let neg = x.is_negative();
    let mut a = x.abs().with_precision(work);
    let one = HPReal::one(work);
    let invert = a > one;
    if invert {
        a = one.div(&a);
    }
    // atan a = 2 atan(a / (1 + sqrt(1 + a^2))): halve until the Taylor
    // series gains >= 12 bits per term.
    let mut halvings = 0i64;
    while !a.is_zero() && value_msb(&a) >= -6 {
        let root = one.add(&a.mul(&a)).sqrt();
        a = a.div(&one.add(&root));
        halvings += 1;
    }
    let a2 = a.mul(&a);
    let mut sum = a.clone();
    let mut t = a.clone();
    let mut k = 1u64;
    loop {
        t = t.mul(&a2).neg();
        let contrib = t.div(&HPReal::from_u64(2 * k + 1, work));
        if contrib.is_zero() || value_msb(&contrib) < -(work as i64 + 8) {
            break;
        }
        sum = sum.add(&contrib);
        k += 1;
    }
    let mut v = sum.scale2(halvings);
    if invert {
        v = pi(work).scale2(-1).sub(&v);
    }
    if neg {
        v = v.neg();
    }
    v.with_precision(prec)
}

/// Angle of the point `(x, y)` in `(-pi, pi]`.
pub fn atan2(y: &HPReal, x: &HPReal) -> HPReal {
    let prec = y.precision().max(x.precision());
    if x.is_zero() && y.is_zero() {
        return HPReal::zero(prec);
    }
    if x.is_zero() {
        let half_pi = pi(prec).scale2(-1);
        return if y.is_positive() { half_pi } else { half_pi.neg() };
    }
    let base = atan(&y.div(x).with_precision(prec + 16));
    let v = if x.is_positive() {
        base
    } else if y.is_negative() {
        base.sub(&pi(prec + 16))
    } else {
        base.add(&pi(prec + 16))
    };
    v.with_precision(prec)
}

/// Integer power by square-and-multiply.
pub fn pow_int(x: &HPReal, n: i64) -> HPReal {
    let prec = x.precision();
    if n == 0 {
        return HPReal::one(prec);
    }
    let mut base = if n < 0 { x.recip() } else { x.clone() };
    let mut e = n.unsigned_abs();
    let mut acc = HPReal::one(prec);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        base = base.mul(&base);
        e >>= 1;
    }
    acc
}

/// Real power `x^y = exp(y ln x)` for positive `x`.
pub fn pow(x: &HPReal, y: &HPReal) -> HPReal {
    exp(&y.mul(&ln(x)).with_precision(x.precision().max(y.precision())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI_50: &str = "3.1415926535897932384626433832795028841971693993751";
    const E_50: &str = "2.7182818284590452353602874713526624977572470936999";
    const LN2_50: &str = "0.6931471805599453094172321214581765680755001343602";

    fn close(a: &HPReal, b: &HPReal, bits: i64) {
        let d = a.sub(b).abs();
        assert!(d < HPReal::exp2(-bits, a.precision()), "{a:?} vs {b:?}");
    }

    #[test]
    fn pi_digits() {
        let p = pi(200);
        let want = HPReal::from_decimal_str(PI_50, 200).unwrap();
        close(&p, &want, 160);
    }

    #[test]
    fn ln2_digits() {
        let v = ln2(200);
        let want = HPReal::from_decimal_str(LN2_50, 200).unwrap();
        close(&v, &want, 160);
    }

    #[test]
    fn exp_of_one_is_e() {
        let e = exp(&HPReal::one(200));
        let want = HPReal::from_decimal_str(E_50, 200).unwrap();
        close(&e, &want, 160);
    }

    #[test]
    fn exp_ln_round_trip() {
        for v in [0.125f64, 0.9, 1.0, 2.0, 7.5, 1000.0] {
            let x = HPReal::from_f64(v, 160);
            close(&exp(&ln(&x)), &x, 120);
        }
        let big = HPReal::from_u64(10, 160);
        let l = ln(&pow_int(&big, 30));
        close(&exp(&l), &pow_int(&big, 30), 40);
    }

    #[test]
    fn exp_negative_reciprocal() {
        let x = HPReal::from_f64(3.25, 160);
        let p = exp(&x).mul(&exp(&x.neg()));
        close(&p, &HPReal::one(160), 150);
    }

    #[test]
    fn trig_special_values() {
        let prec = 160;
        let p = pi(prec);
        let (s, c) = sin_cos(&p.div(&HPReal::from_u64(6, prec)));
        close(&s, &HPReal::from_f64(0.5, prec), 150);
        let three = HPReal::from_u64(3, prec);
        close(&c.mul(&c), &three.div(&HPReal::from_u64(4, prec)), 148);
        let (s2, c2) = sin_cos(&p.div(&HPReal::from_u64(3, prec)));
        close(&c2, &HPReal::from_f64(0.5, prec), 150);
        close(&s2.mul(&s2), &three.div(&HPReal::from_u64(4, prec)), 148);
    }

    #[test]
    fn pythagorean_identity() {
        for v in [0.1f64, 1.3, 2.9, 4.2, 13.7, -2.5] {
            let (s, c) = sin_cos(&HPReal::from_f64(v, 160));
            close(&s.mul(&s).add(&c.mul(&c)), &HPReal::one(160), 150);
        }
    }

    #[test]
    fn atan_one_is_quarter_pi() {
        let a = atan(&HPReal::one(160));
        close(&a, &pi(160).scale2(-2), 150);
    }

    #[test]
    fn atan_inverts_tan() {
        for v in [0.3f64, 0.9, 2.4, 17.0, -0.7, -5.0] {
            let x = HPReal::from_f64(v, 160);
            let (s, c) = sin_cos(&atan(&x));
            close(&s.div(&c), &x, 140);
        }
    }

    #[test]
    fn atan2_quadrants() {
        let prec = 160;
        let one = HPReal::one(prec);
        let m = |v: &HPReal| v.to_f64();
        assert!((m(&atan2(&one, &one)) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((m(&atan2(&one, &one.neg())) - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((m(&atan2(&one.neg(), &one.neg())) + 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((m(&atan2(&one.neg(), &one)) + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn integer_powers() {
        let x = HPReal::from_f64(1.5, 128);
        close(&pow_int(&x, 4), &HPReal::from_f64(5.0625, 128), 120);
        close(&pow_int(&x, -2).mul(&x).mul(&x), &HPReal::one(128), 120);
    }

    #[test]
    fn real_power() {
        let x = HPReal::from_u64(2, 160);
        let half = HPReal::from_f64(0.5, 160);
        close(&pow(&x, &half), &x.sqrt(), 150);
    }
}
