//! Curves y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over an abstract
//! coefficient field, with exact chord-tangent group law. Instantiated by
//! the rationals and by prime fields.
//!
//! All arithmetic here is exact; nothing in this module rounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CurveError {
    #[error("singular equation: discriminant is zero")]
    Singular,
    #[error("parse error in {input:?} at field {position}: {reason}")]
    Parse { input: String, position: usize, reason: String },
    #[error("point {0} does not satisfy the curve equation")]
    NotOnCurve(String),
    #[error("coefficient {0} is not p-integral at {1}")]
    NonIntegral(String, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Exact field operations over a shared context value.
///
/// The context carries the modulus for prime fields; for the rationals it
/// is a unit. Elements are plain data and only meaningful next to their
/// field value.
pub trait Field: Clone + PartialEq + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// None exactly when `a` is zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
    fn square(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }
}

/// The rational numbers; elements are exact fractions in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
}

/// Integers mod a prime, elements reduced to `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        debug_assert!(p >= 2);
        Self { p }
    }

    pub fn reduce_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    pub fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        let (_, digits) = m.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }

    pub fn pow(&self, base: u64, mut e: u64) -> u64 {
        let p = self.p as u128;
        let mut acc = 1u128;
        let mut b = base as u128 % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc as u64
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(*a, self.p - 2))
        }
    }
}

/// Raw coefficient tuple; may be singular (reduction analysis needs those).
#[derive(Debug, Clone, PartialEq)]
pub struct Equation<F: Field> {
    pub a1: F::Elem,
    pub a2: F::Elem,
    pub a3: F::Elem,
    pub a4: F::Elem,
    pub a6: F::Elem,
}

/// The standard derived quantities of an equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants<E> {
    pub b2: E,
    pub b4: E,
    pub b6: E,
    pub b8: E,
    pub c4: E,
    pub c6: E,
    pub disc: E,
}

impl<F: Field> Equation<F> {
    pub fn new(a1: F::Elem, a2: F::Elem, a3: F::Elem, a4: F::Elem, a6: F::Elem) -> Self {
        Self { a1, a2, a3, a4, a6 }
    }

    pub fn from_i64(f: &F, c: [i64; 5]) -> Self {
        Self::new(
            f.from_i64(c[0]),
            f.from_i64(c[1]),
            f.from_i64(c[2]),
            f.from_i64(c[3]),
            f.from_i64(c[4]),
        )
    }

    pub fn invariants(&self, f: &F) -> Invariants<F::Elem> {
        let n = |k: i64| f.from_i64(k);
        let b2 = f.add(&f.square(&self.a1), &f.mul(&n(4), &self.a2));
        let b4 = f.add(&f.mul(&n(2), &self.a4), &f.mul(&self.a1, &self.a3));
        let b6 = f.add(&f.square(&self.a3), &f.mul(&n(4), &self.a6));
        // b8 = a1^2 a6 + 4 a2 a6 - a1 a3 a4 + a2 a3^2 - a4^2
        let b8 = {
            let t1 = f.mul(&f.square(&self.a1), &self.a6);
            let t2 = f.mul(&n(4), &f.mul(&self.a2, &self.a6));
            let t3 = f.mul(&self.a1, &f.mul(&self.a3, &self.a4));
            let t4 = f.mul(&self.a2, &f.square(&self.a3));
            let t5 = f.square(&self.a4);
            f.sub(&f.add(&f.add(&t1, &t2), &t4), &f.add(&t3, &t5))
        };
        let c4 = f.sub(&f.square(&b2), &f.mul(&n(24), &b4));
        // c6 = -b2^3 + 36 b2 b4 - 216 b6
        let c6 = f.sub(
            &f.mul(&n(36), &f.mul(&b2, &b4)),
            &f.add(&f.mul(&b2, &f.square(&b2)), &f.mul(&n(216), &b6)),
        );
        // disc = -b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6
        let disc = {
            let t1 = f.mul(&f.square(&b2), &b8);
            let t2 = f.mul(&n(8), &f.mul(&b4, &f.square(&b4)));
            let t3 = f.mul(&n(27), &f.square(&b6));
            let t4 = f.mul(&n(9), &f.mul(&b2, &f.mul(&b4, &b6)));
            f.sub(&t4, &f.add(&f.add(&t1, &t2), &t3))
        };
        Invariants { b2, b4, b6, b8, c4, c6, disc }
    }

    pub fn is_singular(&self, f: &F) -> bool {
        f.is_zero(&self.invariants(f).disc)
    }
}

impl<E> Invariants<E> {
    pub fn j<F: Field<Elem = E>>(&self, f: &F) -> Option<E> {
        let c4_cubed = f.mul(&self.c4, &f.square(&self.c4));
        f.div(&c4_cubed, &self.disc)
    }
}

/// A point of the curve: the identity, or an affine pair.
pub enum Point<F: Field> {
    Identity,
    Affine { x: F::Elem, y: F::Elem },
}

impl<F: Field> Point<F> {
    pub fn affine(x: F::Elem, y: F::Elem) -> Self {
        Point::Affine { x, y }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Point::Identity)
    }

    pub fn xy(&self) -> Option<(&F::Elem, &F::Elem)> {
        match self {
            Point::Identity => None,
            Point::Affine { x, y } => Some((x, y)),
        }
    }
}

impl<F: Field> Clone for Point<F> {
    fn clone(&self) -> Self {
        match self {
            Point::Identity => Point::Identity,
            Point::Affine { x, y } => Point::Affine { x: x.clone(), y: y.clone() },
        }
    }
}

impl<F: Field> PartialEq for Point<F> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Point::Identity, Point::Identity) => true,
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
                x1 == x2 && y1 == y2
            }
            _ => false,
        }
    }
}

impl<F: Field> fmt::Debug for Point<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Identity => write!(f, "O"),
            Point::Affine { x, y } => write!(f, "({x:?}, {y:?})"),
        }
    }
}

/// A nonsingular equation together with its field and cached invariants.
#[derive(Debug, Clone)]
pub struct Curve<F: Field> {
    field: F,
    eq: Equation<F>,
    inv: Invariants<F::Elem>,
}

impl<F: Field> Curve<F> {
    pub fn new(field: F, eq: Equation<F>) -> Result<Self, CurveError> {
        let inv = eq.invariants(&field);
        if field.is_zero(&inv.disc) {
            return Err(CurveError::Singular);
        }
        Ok(Self { field, eq, inv })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn equation(&self) -> &Equation<F> {
        &self.eq
    }

    pub fn invariants(&self) -> &Invariants<F::Elem> {
        &self.inv
    }

    pub fn j_invariant(&self) -> F::Elem {
        self.inv.j(&self.field).expect("nonsingular curve has a j-invariant")
    }

    pub fn contains(&self, p: &Point<F>) -> bool {
        let f = &self.field;
        let Some((x, y)) = p.xy() else { return true };
        // y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6
        let lhs = f.add(
            &f.square(y),
            &f.mul(y, &f.add(&f.mul(&self.eq.a1, x), &self.eq.a3)),
        );
        let rhs = f.add(
            &f.mul(x, &f.add(&f.square(x), &f.add(&f.mul(&self.eq.a2, x), &self.eq.a4))),
            &self.eq.a6,
        );
        lhs == rhs
    }

    pub fn negate(&self, p: &Point<F>) -> Point<F> {
        let f = &self.field;
        match p {
            Point::Identity => Point::Identity,
            Point::Affine { x, y } => {
                // -(x, y) = (x, -y - a1 x - a3)
                let ny = f.neg(&f.add(y, &f.add(&f.mul(&self.eq.a1, x), &self.eq.a3)));
                Point::Affine { x: x.clone(), y: ny }
            }
        }
    }

    pub fn add(&self, p: &Point<F>, q: &Point<F>) -> Point<F> {
        let f = &self.field;
        let (Some((x1, y1)), Some((x2, y2))) = (p.xy(), q.xy()) else {
            return if p.is_identity() { q.clone() } else { p.clone() };
        };
        let (lambda, nu) = if x1 == x2 {
            if q == &self.negate(p) {
                return Point::Identity;
            }
            // Tangent line at a doubled point.
            let denom = f.add(
                &f.mul(&f.from_i64(2), y1),
                &f.add(&f.mul(&self.eq.a1, x1), &self.eq.a3),
            );
            let di = f.inv(&denom).expect("2P = O handled by the negation test");
            let lam_num = f.sub(
                &f.add(
                    &f.mul(&f.from_i64(3), &f.square(x1)),
                    &f.add(&f.mul(&f.from_i64(2), &f.mul(&self.eq.a2, x1)), &self.eq.a4),
                ),
                &f.mul(&self.eq.a1, y1),
            );
            let nu_num = f.sub(
                &f.add(
                    &f.mul(&self.eq.a4, x1),
                    &f.mul(&f.from_i64(2), &self.eq.a6),
                ),
                &f.add(&f.mul(x1, &f.square(x1)), &f.mul(&self.eq.a3, y1)),
            );
            (f.mul(&lam_num, &di), f.mul(&nu_num, &di))
        } else {
            let di = f.inv(&f.sub(x2, x1)).expect("distinct x-coordinates");
            let lambda = f.mul(&f.sub(y2, y1), &di);
            let nu = f.sub(y1, &f.mul(&lambda, x1));
            (lambda, nu)
        };
        // x3 = lambda^2 + a1 lambda - a2 - x1 - x2
        let x3 = f.sub(
            &f.add(&f.square(&lambda), &f.mul(&self.eq.a1, &lambda)),
            &f.add(&self.eq.a2, &f.add(x1, x2)),
        );
        // y3 = -(lambda + a1) x3 - nu - a3
        let y3 = f.neg(&f.add(
            &f.mul(&f.add(&lambda, &self.eq.a1), &x3),
            &f.add(&nu, &self.eq.a3),
        ));
        Point::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &Point<F>) -> Point<F> {
        self.add(p, p)
    }

    pub fn scalar_mul(&self, m: i64, p: &Point<F>) -> Point<F> {
        if m == 0 || p.is_identity() {
            return Point::Identity;
        }
        let base = if m < 0 { self.negate(p) } else { p.clone() };
        let mut e = m.unsigned_abs();
        let mut acc = Point::Identity;
        let mut cur = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &cur);
            }
            e >>= 1;
            if e > 0 {
                cur = self.double(&cur);
            }
        }
        acc
    }
}

/// Reduce an integral equation over Q mod p. Fails if any coefficient has
/// p in its denominator.
pub fn reduce_mod_p(eq: &Equation<Rationals>, p: u64) -> Result<Equation<PrimeField>, CurveError> {
    let f = PrimeField::new(p);
    let conv = |r: &BigRational, name: &str| -> Result<u64, CurveError> {
        let den = f.reduce_bigint(r.denom());
        let num = f.reduce_bigint(r.numer());
        let di = f
            .inv(&den)
            .ok_or_else(|| CurveError::NonIntegral(name.to_string(), p))?;
        Ok(f.mul(&num, &di))
    };
    Ok(Equation::new(
        conv(&eq.a1, "a1")?,
        conv(&eq.a2, "a2")?,
        conv(&eq.a3, "a3")?,
        conv(&eq.a4, "a4")?,
        conv(&eq.a6, "a6")?,
    ))
}

/// Parsed form of the curve text format: integer coefficients, with an
/// optional "@p" suffix requesting reduction mod p.
#[derive(Debug, Clone)]
pub struct ParsedCurve {
    pub eq: Equation<Rationals>,
    pub reduce_at: Option<u64>,
}

/// Parse "a1,a2,a3,a4,a6" with optional "@p" suffix.
pub fn parse_curve(input: &str) -> Result<ParsedCurve, CurveError> {
    let (coeff_part, at_part) = match input.split_once('@') {
        Some((c, a)) => (c, Some(a)),
        None => (input, None),
    };
    let fields: Vec<&str> = coeff_part.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(CurveError::Parse {
            input: input.to_string(),
            position: fields.len().min(5),
            reason: format!("expected 5 comma-separated integers, got {}", fields.len()),
        });
    }
    let mut c = Vec::with_capacity(5);
    for (i, s) in fields.iter().enumerate() {
        let v: BigInt = s.parse().map_err(|_| CurveError::Parse {
            input: input.to_string(),
            position: i,
            reason: format!("{s:?} is not an integer"),
        })?;
        c.push(BigRational::from_integer(v));
    }
    let reduce_at = match at_part {
        None => None,
        Some(s) => Some(s.trim().parse::<u64>().map_err(|_| CurveError::Parse {
            input: input.to_string(),
            position: 5,
            reason: format!("{s:?} is not a prime modulus"),
        })?),
    };
    let mut it = c.into_iter();
    let eq = Equation::new(
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    Ok(ParsedCurve { eq, reduce_at })
}

/// Parse "x_num/x_den,y_num/y_den", plain "x,y", or "O".
pub fn parse_point(input: &str) -> Result<Point<Rationals>, CurveError> {
    let t = input.trim();
    if t == "O" || t == "o" {
        return Ok(Point::Identity);
    }
    let parts: Vec<&str> = t.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CurveError::Parse {
            input: input.to_string(),
            position: parts.len().min(2),
            reason: "expected \"x,y\" (optionally num/den) or \"O\"".to_string(),
        });
    }
    let frac = |s: &str, pos: usize| -> Result<BigRational, CurveError> {
        let bad = |reason: String| CurveError::Parse {
            input: input.to_string(),
            position: pos,
            reason,
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let num: BigInt = n.trim().parse().map_err(|_| bad(format!("{n:?} is not an integer")))?;
                let den: BigInt = d.trim().parse().map_err(|_| bad(format!("{d:?} is not an integer")))?;
                if den.is_zero() {
                    return Err(bad("zero denominator".to_string()));
                }
                Ok(BigRational::new(num, den))
            }
            None => {
                let num: BigInt = s.parse().map_err(|_| bad(format!("{s:?} is not an integer")))?;
                Ok(BigRational::from_integer(num))
            }
        }
    };
    Ok(Point::affine(frac(parts[0], 0)?, frac(parts[1], 1)?))
}

/// Canonical text form of a rational point, inverse of [`parse_point`].
pub fn format_point(p: &Point<Rationals>) -> String {
    match p {
        Point::Identity => "O".to_string(),
        Point::Affine { x, y } => {
            let part = |r: &BigRational| {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            };
            format!("{},{}", part(x), part(y))
        }
    }
}

/// Canonical text form of integral curve coefficients.
pub fn format_curve(eq: &Equation<Rationals>) -> String {
    let part = |r: &BigRational| {
        if r.denom().is_one() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    };
    format!(
        "{},{},{},{},{}",
        part(&eq.a1),
        part(&eq.a2),
        part(&eq.a3),
        part(&eq.a4),
        part(&eq.a6)
    )
}
