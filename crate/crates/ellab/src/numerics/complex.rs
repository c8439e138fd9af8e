//! Complex arithmetic over [`HPReal`] pairs, with the transcendental
//! functions needed downstream: exp, ln, sqrt, and arbitrary powers.

use super::elementary::{atan2, exp, ln, sin_cos};
use super::real::HPReal;

#[derive(Clone, Debug, PartialEq)]
pub struct HPComplex {
    pub re: HPReal,
    pub im: HPReal,
}

impl HPComplex {
    pub fn new(re: HPReal, im: HPReal) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(HPReal::zero(prec), HPReal::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::new(HPReal::one(prec), HPReal::zero(prec))
    }

    pub fn i(prec: u32) -> Self {
        Self::new(HPReal::zero(prec), HPReal::one(prec))
    }

    pub fn from_real(re: HPReal) -> Self {
        let prec = re.precision();
        Self::new(re, HPReal::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Self::new(HPReal::from_f64(re, prec), HPReal::from_f64(im, prec))
    }

    pub fn precision(&self) -> u32 {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self::new(self.re.with_precision(prec), self.im.with_precision(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.re.add(&other.re), self.im.add(&other.im))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.re.sub(&other.re), self.im.sub(&other.im))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        Self::new(re, im)
    }

    pub fn mul_real(&self, s: &HPReal) -> Self {
        Self::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn div(&self, other: &Self) -> Self {
        let d = other.norm2();
        assert!(!d.is_zero(), "complex division by zero");
        let re = self.re.mul(&other.re).add(&self.im.mul(&other.im)).div(&d);
        let im = self.im.mul(&other.re).sub(&self.re.mul(&other.im)).div(&d);
        Self::new(re, im)
    }

    pub fn div_real(&self, s: &HPReal) -> Self {
        Self::new(self.re.div(s), self.im.div(s))
    }

    pub fn recip(&self) -> Self {
        Self::one(self.precision()).div(self)
    }

    /// `re^2 + im^2`.
    pub fn norm2(&self) -> HPReal {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> HPReal {
        self.norm2().sqrt()
    }

    /// Argument in `(-pi, pi]`.
    pub fn arg(&self) -> HPReal {
        atan2(&self.im, &self.re)
    }

    pub fn exp(&self) -> Self {
        let r = exp(&self.re);
        let (s, c) = sin_cos(&self.im);
        Self::new(r.mul(&c), r.mul(&s))
    }

    /// Principal branch logarithm.
    pub fn ln(&self) -> Self {
        assert!(!self.is_zero(), "log of zero");
        let prec = self.precision();
        // ln|z| = ln(norm2)/2 avoids squaring error in the sqrt.
        let lr = ln(&self.norm2().with_precision(prec + 16)).scale2(-1);
        Self::new(lr.with_precision(prec), self.arg())
    }

    /// Principal branch square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.precision();
        if self.is_zero() {
            return Self::zero(prec);
        }
        // sqrt(z) = sqrt(r) (cos(t/2) + i sin(t/2)) in polar form.
        let r = self.abs();
        let half_arg = self.arg().scale2(-1);
        let (s, c) = sin_cos(&half_arg);
        let m = r.sqrt();
        Self::new(m.mul(&c), m.mul(&s))
    }

    /// Principal branch power `z^w = exp(w ln z)`.
    pub fn powc(&self, w: &Self) -> Self {
        if w.is_zero() {
            return Self::one(self.precision().max(w.precision()));
        }
        self.ln().mul(w).exp()
    }

    /// Integer power by square-and-multiply.
    pub fn powi(&self, n: i64) -> Self {
        let prec = self.precision();
        if n == 0 {
            return Self::one(prec);
        }
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one(prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Complex sine via the exponential form.
    pub fn sin(&self) -> Self {
        let prec = self.precision();
        let iz = Self::new(self.im.neg(), self.re.clone());
        let a = iz.exp();
        let b = iz.neg().exp();
        let diff = a.sub(&b);
        // (e^{iz} - e^{-iz}) / (2i) = (im + i(-re))/2 of the difference.
        Self::new(diff.im.scale2(-1), diff.re.scale2(-1).neg()).with_precision(prec)
    }
}
