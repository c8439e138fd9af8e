//! Arbitrary-precision floating-point reals: `sign · mantissa · 2^exp` with
//! the mantissa normalized to exactly `prec` bits.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// An arbitrary-precision real number.
///
/// Nonzero values keep `mant` normalized so its top bit sits at position
/// `prec − 1`; the represented value is `sign · mant · 2^exp`. Arithmetic
/// between operands of different precision rounds to the larger of the two.
#[derive(Clone)]
pub struct HPReal {
    sign: i8,
    mant: BigUint,
    exp: i64,
    prec: u32,
}

impl HPReal {
    pub fn zero(prec: u32) -> Self {
        Self { sign: 0, mant: BigUint::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_u64(1, prec)
    }

    /// `2^k` exactly.
    pub fn exp2(k: i64, prec: u32) -> Self {
        let mut v = Self::one(prec);
        v.exp += k;
        v
    }

    pub fn from_u64(n: u64, prec: u32) -> Self {
        Self::from_biguint(1, BigUint::from(n), 0, prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        let sign = match n.cmp(&0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        Self::from_biguint(sign, BigUint::from(n.unsigned_abs()), 0, prec)
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        let sign = match n.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        };
        Self::from_biguint(sign, n.magnitude().clone(), 0, prec)
    }

    /// Exact ratio of big integers, rounded once.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "division by zero ratio");
        Self::from_bigint(num, prec).div(&Self::from_bigint(den, prec))
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "HPReal::from_f64 requires a finite value");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let sign = if x < 0.0 { -1 } else { 1 };
        let (m, e) = frexp(x.abs());
        // m in [0.5, 1); m * 2^53 is an integer.
        let mant = BigUint::from((m * (1u64 << 53) as f64) as u64);
        Self::from_biguint(sign, mant, e - 53, prec)
    }

    /// Build and normalize from raw parts; `mant` need not be normalized.
    pub(crate) fn from_biguint(sign: i8, mant: BigUint, exp: i64, prec: u32) -> Self {
        let mut v = Self { sign, mant, exp, prec };
        v.normalize();
        v
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() || self.sign == 0 {
            self.sign = 0;
            self.mant = BigUint::zero();
            self.exp = 0;
            return;
        }
        let bits = self.mant.bits();
        let prec = self.prec as u64;
        match bits.cmp(&prec) {
            Ordering::Greater => {
                let shift = bits - prec;
                // Round half-up: inspect the bit just below the kept window.
                let keep_plus = &self.mant >> (shift - 1) as usize;
                let round_up = keep_plus.bit(0);
                let mut kept = keep_plus >> 1usize;
                if round_up {
                    kept += 1u32;
                    if kept.bits() > prec {
                        kept >>= 1usize;
                        self.exp += 1;
                    }
                }
                self.mant = kept;
                self.exp += shift as i64;
            }
            Ordering::Less => {
                let shift = prec - bits;
                self.mant = &self.mant << shift as usize;
                self.exp -= shift as i64;
            }
            Ordering::Equal => {}
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Round (or extend) to a new working precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        Self::from_biguint(self.sign, self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// Position of the most significant bit: value magnitude lies in
    /// `[2^(msb), 2^(msb+1))`. Meaningless for zero.
    fn msb(&self) -> i64 {
        self.exp + self.prec as i64 - 1
    }

    /// `floor(log2 |x|)` for nonzero `x`.
    pub fn magnitude_exp(&self) -> i64 {
        assert!(self.sign != 0, "magnitude of zero");
        self.msb()
    }

    /// Exact signed integer view `sign · mant` with the exponent split off.
    fn signed_mant(&self) -> BigInt {
        let sign = match self.sign {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            _ => Sign::NoSign,
        };
        BigInt::from_biguint(sign, self.mant.clone())
    }

    pub fn neg(&self) -> Self {
        let mut v = self.clone();
        v.sign = -v.sign;
        v
    }

    pub fn abs(&self) -> Self {
        let mut v = self.clone();
        v.sign = v.sign.abs();
        v
    }

    /// Exact scaling by `2^k`.
    pub fn scale2(&self, k: i64) -> Self {
        let mut v = self.clone();
        if v.sign != 0 {
            v.exp += k;
        }
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate_other: bool) -> Self {
        let prec = self.prec.max(other.prec);
        if self.sign == 0 {
            let mut v = other.with_precision(prec);
            if negate_other {
                v.sign = -v.sign;
            }
            return v;
        }
        if other.sign == 0 {
            return self.with_precision(prec);
        }
        // If one operand is negligible at the result precision, adding it can
        // change the result by at most one ulp; skip the huge shift.
        let gap = self.msb() - other.msb();
        if gap > prec as i64 + 2 {
            return self.with_precision(prec);
        }
        if gap < -(prec as i64 + 2) {
            let mut v = other.with_precision(prec);
            if negate_other {
                v.sign = -v.sign;
            }
            return v;
        }
        let e = self.exp.min(other.exp);
        let a = self.signed_mant() << (self.exp - e) as usize;
        let mut b = other.signed_mant() << (other.exp - e) as usize;
        if negate_other {
            b = -b;
        }
        let s = a + b;
        let sign = match s.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        };
        Self::from_biguint(sign, s.magnitude().clone(), e, prec)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.sign == 0 || other.sign == 0 {
            return Self::zero(prec);
        }
        Self::from_biguint(
            self.sign * other.sign,
            &self.mant * &other.mant,
            self.exp + other.exp,
            prec,
        )
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(other.sign != 0, "division by zero");
        let prec = self.prec.max(other.prec);
        if self.sign == 0 {
            return Self::zero(prec);
        }
        let shift = prec as u64 + 2;
        let num = &self.mant << shift as usize;
        let q = num / &other.mant;
        Self::from_biguint(
            self.sign * other.sign,
            q,
            self.exp - other.exp - shift as i64,
            prec,
        )
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec).div(self)
    }

    /// Square root; errors on negative input are the caller's to prevent.
    pub fn sqrt(&self) -> Self {
        assert!(self.sign >= 0, "sqrt of negative value");
        if self.sign == 0 {
            return self.clone();
        }
        let prec = self.prec;
        // Shift so the operand has ~2(prec+2) bits and an even exponent.
        let mut shift = prec as i64 + 4;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let n = &self.mant << shift as usize;
        let root = n.sqrt();
        Self::from_biguint(1, root, (self.exp - shift) / 2, prec)
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        if self.sign != other.sign {
            return self.sign.cmp(&other.sign);
        }
        if self.sign == 0 {
            return Ordering::Equal;
        }
        let mag = {
            let ma = self.msb();
            let mb = other.msb();
            if ma != mb {
                ma.cmp(&mb)
            } else {
                let e = self.exp.min(other.exp);
                let a = &self.mant << (self.exp - e) as usize;
                let b = &other.mant << (other.exp - e) as usize;
                a.cmp(&b)
            }
        };
        if self.sign > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    pub fn min_value(a: &Self, b: &Self) -> Self {
        if a.cmp_value(b) == Ordering::Greater {
            b.clone()
        } else {
            a.clone()
        }
    }

    pub fn max_value(a: &Self, b: &Self) -> Self {
        if a.cmp_value(b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    /// Nearest integer (ties away from zero), as a `BigInt`.
    pub fn round_int(&self) -> BigInt {
        if self.sign == 0 {
            return BigInt::zero();
        }
        if self.exp >= 0 {
            return self.signed_mant() << self.exp as usize;
        }
        let shift = (-self.exp) as u64;
        if shift > self.prec as u64 + 1 {
            return BigInt::zero();
        }
        let half = BigInt::one() << (shift - 1) as usize;
        let d = BigInt::one() << shift as usize;
        let m = BigInt::from_biguint(Sign::Plus, self.mant.clone());
        let q = (m + half).div_floor(&d);
        if self.sign < 0 {
            -q
        } else {
            q
        }
    }

    pub fn floor_int(&self) -> BigInt {
        if self.sign == 0 {
            return BigInt::zero();
        }
        if self.exp >= 0 {
            self.signed_mant() << self.exp as usize
        } else {
            let shift = (-self.exp) as u64;
            if shift > self.prec as u64 + 1 {
                return if self.sign < 0 { -BigInt::one() } else { BigInt::zero() };
            }
            let m = self.signed_mant();
            let d = BigInt::one() << shift as usize;
            m.div_floor(&d)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let bits = self.mant.bits();
        let take = bits.min(53);
        let mut top = (&self.mant >> (bits - take) as usize).to_u64().unwrap();
        let mut e = self.exp + (bits - take) as i64;
        if bits > 53 && self.mant.bit(bits - 54) {
            top += 1;
            if top == 1 << 53 {
                top >>= 1;
                e += 1;
            }
        }
        let mut v = top as f64;
        if e > 1 << 16 {
            v = f64::INFINITY;
        } else if e < -(1 << 16) {
            v = 0.0;
        } else {
            // Stepwise: a single powi builds 2^|e| first, which overflows
            // for |e| > 1023 even when the final product is representable.
            let mut e = e;
            while e > 900 {
                v *= 2f64.powi(900);
                e -= 900;
            }
            while e < -900 {
                v *= 2f64.powi(-900);
                e += 900;
            }
            v *= 2f64.powi(e as i32);
        }
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    /// Parse a decimal literal `[+-]ddd[.ddd][e[+-]k]`.
    pub fn from_decimal_str(s: &str, prec: u32) -> Result<Self, String> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1i8, rest),
            None => (1i8, s.strip_prefix('+').unwrap_or(s)),
        };
        let (digits_part, exp_part) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        let dec_exp: i64 = if exp_part.is_empty() {
            0
        } else {
            exp_part.parse().map_err(|_| format!("bad exponent in {s:?}"))?
        };
        let (int_part, frac_part) = match digits_part.find('.') {
            Some(i) => (&digits_part[..i], &digits_part[i + 1..]),
            None => (digits_part, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("no digits in {s:?}"));
        }
        let all: String = format!("{int_part}{frac_part}");
        if !all.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("invalid number {s:?}"));
        }
        let n: BigInt = all.parse().map_err(|_| format!("invalid number {s:?}"))?;
        let scale = frac_part.len() as i64 - dec_exp;
        let work = prec + 8;
        let num = Self::from_bigint(&n, work);
        let value = if scale > 0 {
            let den = BigInt::from(10u8).pow(scale as u32);
            num.div(&Self::from_bigint(&den, work))
        } else if scale < 0 {
            let f = BigInt::from(10u8).pow((-scale) as u32);
            num.mul(&Self::from_bigint(&f, work))
        } else {
            num
        };
        let mut v = value.with_precision(prec);
        if sign < 0 {
            v = v.neg();
        }
        Ok(v)
    }

    /// Decimal rendering with `digits` significant digits, scientific form.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.sign == 0 {
            return "0".to_string();
        }
        let digits = digits.max(1);
        // Decimal exponent estimate from the binary magnitude.
        let msb = self.msb();
        let mut dec_exp = (msb as f64 * std::f64::consts::LOG10_2).floor() as i64;
        // mantissa_digits = round(|v| * 10^(digits-1-dec_exp)) and fix up the
        // estimate if it lands outside [10^(digits-1), 10^digits).
        loop {
            let shift10 = digits as i64 - 1 - dec_exp;
            let mut num = BigInt::from_biguint(Sign::Plus, self.mant.clone());
            let mut den = BigInt::one();
            if shift10 >= 0 {
                num *= BigInt::from(10u8).pow(shift10 as u32);
            } else {
                den *= BigInt::from(10u8).pow((-shift10) as u32);
            }
            if self.exp >= 0 {
                num <<= self.exp as usize;
            } else {
                den <<= (-self.exp) as usize;
            }
            let q: BigInt = (&num + &den / 2) / &den;
            let lo = BigInt::from(10u8).pow(digits as u32 - 1);
            let hi = BigInt::from(10u8).pow(digits as u32);
            if q < lo && digits > 1 {
                dec_exp -= 1;
                continue;
            }
            if q >= hi {
                dec_exp += 1;
                continue;
            }
            let ds = q.to_string();
            let neg = if self.sign < 0 { "-" } else { "" };
            if ds.len() == 1 {
                return format!("{neg}{ds}e{dec_exp}");
            }
            return format!("{neg}{}.{}e{}", &ds[..1], &ds[1..], dec_exp);
        }
    }
}

/// Decompose a positive finite f64 into (mantissa in [0.5, 1), exponent).
fn frexp(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    if exp_field == 0 {
        // Subnormal: scale up first.
        let scaled = x * 2f64.powi(64);
        let (m, e) = frexp(scaled);
        return (m, e - 64);
    }
    let e = exp_field - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

impl fmt::Debug for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HPReal({} @{}b)", self.to_decimal_string(20), self.prec)
    }
}

impl fmt::Display for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        write!(f, "{}", self.to_decimal_string(digits))
    }
}

impl PartialEq for HPReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for HPReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &HPReal {
            type Output = HPReal;
            fn $method(self, rhs: &HPReal) -> HPReal {
                HPReal::$imp(self, rhs)
            }
        }
        impl std::ops::$trait for HPReal {
            type Output = HPReal;
            fn $method(self, rhs: HPReal) -> HPReal {
                HPReal::$imp(&self, &rhs)
            }
        }
        impl std::ops::$trait<&HPReal> for HPReal {
            type Output = HPReal;
            fn $method(self, rhs: &HPReal) -> HPReal {
                HPReal::$imp(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);
forward_binop!(Div, div, div);

impl std::ops::Neg for &HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal::neg(self)
    }
}

impl std::ops::Neg for HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> HPReal {
        HPReal::from_f64(x, 128)
    }

    #[test]
    fn arithmetic_round_trip() {
        let a = r(3.5);
        let b = r(-1.25);
        assert_eq!((a.add(&b)).to_f64(), 2.25);
        assert_eq!((a.sub(&b)).to_f64(), 4.75);
        assert_eq!((a.mul(&b)).to_f64(), -4.375);
        assert_eq!((a.div(&b)).to_f64(), -2.8);
    }

    #[test]
    fn division_hits_relative_error_bound() {
        let a = HPReal::from_u64(1, 128);
        let b = HPReal::from_u64(3, 128);
        let third = a.div(&b);
        let back = third.mul(&b);
        let err = back.sub(&HPReal::one(128)).abs();
        assert!(err < HPReal::exp2(-126, 128));
    }

    #[test]
    fn sqrt_squares_back() {
        for v in [2u64, 3, 5, 7, 10, 12345] {
            let x = HPReal::from_u64(v, 160);
            let s = x.sqrt();
            let err = s.mul(&s).sub(&x).abs().div(&x);
            assert!(err < HPReal::exp2(-157, 160), "v={v}");
        }
    }

    #[test]
    fn big_shift_add_keeps_larger() {
        let a = HPReal::one(64);
        let tiny = HPReal::exp2(-1000, 64);
        assert_eq!(a.add(&tiny), a);
        assert_eq!(a.sub(&tiny), a);
    }

    #[test]
    fn cancellation_is_exact() {
        let a = r(1.0 + 2f64.powi(-40));
        let b = r(1.0);
        let d = a.sub(&b);
        assert_eq!(d.to_f64(), 2f64.powi(-40));
    }

    #[test]
    fn decimal_round_trip() {
        let x = HPReal::from_decimal_str("3.141592653589793238462643383279", 128).unwrap();
        let s = x.to_decimal_string(30);
        assert_eq!(s, "3.14159265358979323846264338328e0");
        let neg = HPReal::from_decimal_str("-0.5e-3", 128).unwrap();
        assert_eq!(neg.to_f64(), -0.0005);
    }

    #[test]
    fn rounding_carry_propagates() {
        // 2^64 - 1 rounded to 8 bits of precision must carry up to 2^64.
        let v = HPReal::from_biguint(1, BigUint::from(u64::MAX), 0, 8);
        assert_eq!(v.to_f64(), 2f64.powi(64));
    }

    #[test]
    fn floor_and_round() {
        assert_eq!(r(2.75).floor_int(), BigInt::from(2));
        assert_eq!(r(-2.25).floor_int(), BigInt::from(-3));
        assert_eq!(r(2.5000001).round_int(), BigInt::from(3));
        assert_eq!(r(-2.499).round_int(), BigInt::from(-2));
    }

    #[test]
    fn comparisons() {
        assert!(r(1.5) > r(1.25));
        assert!(r(-1.5) < r(1.25));
        assert!(r(-1.5) < r(-1.25));
        assert_eq!(r(0.0).cmp_value(&HPReal::zero(64)), Ordering::Equal);
    }
}
