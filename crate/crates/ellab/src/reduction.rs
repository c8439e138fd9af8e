//! Reduction behavior of an integral curve at each prime: per-prime minimal
//! models (p >= 5), the good/split/nonsplit/additive classification with its
//! trace values, and conductor assembly with user overrides for p in {2, 3}.

use crate::pointcount::{count_points, factor_u64, CountError, CountOptions};
use crate::weierstrass::{reduce_mod_p, CurveError, Equation, Field, PrimeField, Rationals};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ReductionError {
    #[error("p = {0} needs the override path; minimal models here cover p >= 5 only")]
    UnsupportedPrime(u64),
    #[error("bad reduction at p = {0} with p in {{2, 3}} requires a user override")]
    NeedsOverride(u64),
    #[error("missing overrides for bad primes {0:?}")]
    MissingOverride(Vec<u64>),
    #[error("coefficient {0} is not an integer")]
    NonIntegralModel(String),
    #[error("cannot factor |disc| = {0}: cofactor exceeds 64 bits")]
    FactorizationFailed(String),
    #[error("conductor exceeds u64")]
    ConductorOverflow,
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Behavior of the reduced curve mod p, with the trace it contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionType {
    Good { ap: i64 },
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionType {
    pub fn ap(&self) -> i64 {
        match self {
            ReductionType::Good { ap } => *ap,
            ReductionType::SplitMultiplicative => 1,
            ReductionType::NonsplitMultiplicative => -1,
            ReductionType::Additive => 0,
        }
    }

    pub fn is_good(&self) -> bool {
        matches!(self, ReductionType::Good { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ReductionType::Good { .. } => "good",
            ReductionType::SplitMultiplicative => "split",
            ReductionType::NonsplitMultiplicative => "nonsplit",
            ReductionType::Additive => "additive",
        }
    }
}

/// User-supplied classification for primes the p >= 5 machinery cannot
/// settle, plus an optional verbatim conductor.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Overrides {
    #[serde(default)]
    pub conductor: Option<u64>,
    #[serde(default)]
    pub primes: BTreeMap<u64, PrimeOverride>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PrimeOverride {
    #[serde(rename = "type")]
    pub kind: String,
    pub exponent: u32,
    pub ap: i64,
}

impl Overrides {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl PrimeOverride {
    pub fn reduction_type(&self) -> Result<ReductionType, ReductionError> {
        match self.kind.as_str() {
            "good" => Ok(ReductionType::Good { ap: self.ap }),
            "split" => Ok(ReductionType::SplitMultiplicative),
            "nonsplit" => Ok(ReductionType::NonsplitMultiplicative),
            "additive" => Ok(ReductionType::Additive),
            other => Err(ReductionError::NonIntegralModel(format!(
                "unknown override type {other:?}"
            ))),
        }
    }
}

/// Conductor N with its per-prime breakdown.
#[derive(Debug, Clone)]
pub struct ConductorData {
    pub n: u64,
    pub exponents: BTreeMap<u64, u32>,
    pub types: BTreeMap<u64, ReductionType>,
    pub overridden: BTreeSet<u64>,
}

fn require_integral(eq: &Equation<Rationals>) -> Result<(), ReductionError> {
    for (name, c) in [
        ("a1", &eq.a1),
        ("a2", &eq.a2),
        ("a3", &eq.a3),
        ("a4", &eq.a4),
        ("a6", &eq.a6),
    ] {
        if !c.denom().is_one() {
            return Err(ReductionError::NonIntegralModel(name.to_string()));
        }
    }
    Ok(())
}

fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0u32;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// A model minimal at p, for p >= 5. If the input is already minimal it is
/// returned unchanged; otherwise the rescaled short model
/// y^2 = x^3 - 27 (c4/p^{4k}) x - 54 (c6/p^{6k}) is produced, which is
/// p-isomorphic to the input and drops val_p(disc) by 12k.
pub fn minimal_at_p(
    eq: &Equation<Rationals>,
    p: u64,
) -> Result<Equation<Rationals>, ReductionError> {
    if p < 5 {
        return Err(ReductionError::UnsupportedPrime(p));
    }
    require_integral(eq)?;
    let f = Rationals;
    let inv = eq.invariants(&f);
    let c4 = inv.c4.numer().clone();
    let c6 = inv.c6.numer().clone();
    let k4 = valuation(&c4, p).map(|v| v / 4);
    let k6 = valuation(&c6, p).map(|v| v / 6);
    let k = match (k4, k6) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("c4 = c6 = 0 only on singular equations"),
    };
    if k == 0 {
        return Ok(eq.clone());
    }
    let scale4 = BigInt::from(p).pow(4 * k);
    let scale6 = BigInt::from(p).pow(6 * k);
    let a4 = BigRational::from_integer(BigInt::from(-27) * (&c4 / &scale4));
    let a6 = BigRational::from_integer(BigInt::from(-54) * (&c6 / &scale6));
    Ok(Equation::new(
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        a4,
        a6,
    ))
}

/// Remainder of polynomial division over F_p; coefficients ascending.
fn poly_rem(a: &[u64], b: &[u64], f: &PrimeField) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    while r.len() > db {
        let dr = r.len() - 1;
        let q = f.mul(&r[dr], &lead_inv);
        for i in 0..=db {
            let t = f.mul(&q, &b[i]);
            r[dr - db + i] = f.sub(&r[dr - db + i], &t);
        }
        while r.len() > 1 && *r.last().unwrap() == 0 {
            r.pop();
        }
        if r.len() == 1 && r[0] == 0 {
            break;
        }
    }
    r
}

/// Monic gcd over F_p.
fn poly_gcd(a: &[u64], b: &[u64], f: &PrimeField) -> Vec<u64> {
    let trim = |v: &mut Vec<u64>| {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    };
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !(y.len() == 1 && y[0] == 0) {
        let r = poly_rem(&x, &y, f);
        x = y;
        y = r;
        trim(&mut y);
    }
    let li = f.inv(x.last().unwrap()).expect("nonzero gcd");
    for c in &mut x {
        *c = f.mul(c, &li);
    }
    x
}

/// The unique singular x-coordinate of a bad reduction mod p (p >= 5),
/// from the multiple root of 4x^3 + b2 x^2 + 2 b4 x + b6.
fn singular_x(eq: &Equation<PrimeField>, f: &PrimeField) -> u64 {
    let inv = eq.invariants(f);
    let cubic = [
        inv.b6,
        f.add(&inv.b4, &inv.b4),
        inv.b2,
        f.from_i64(4),
    ];
    let deriv = [
        f.add(&inv.b4, &inv.b4),
        f.mul(&f.from_i64(2), &inv.b2),
        f.from_i64(12),
    ];
    let g = poly_gcd(&cubic, &deriv, f);
    match g.len() {
        2 => f.neg(&g[0]),
        // (x - x0)^2: monic x^2 + bx + c has x0 = -b/2.
        3 => f.mul(&f.neg(&g[1]), &f.inv(&f.from_i64(2)).expect("odd p")),
        _ => unreachable!("bad reduction has a multiple root"),
    }
}

/// Classification at one prime. For p >= 5 the model is first made
/// p-minimal; bad reduction is then split by the tangent cone at the
/// singular point: discriminant D = b2 + 12 x0 is zero for a cusp, a
/// square for a split node, a non-square for a nonsplit node.
pub fn classify(
    eq: &Equation<Rationals>,
    p: u64,
    copts: &CountOptions,
) -> Result<ReductionType, ReductionError> {
    require_integral(eq)?;
    let f = Rationals;
    if p < 5 {
        let disc = eq.invariants(&f).disc;
        if valuation(disc.numer(), p).map_or(true, |v| v == 0) {
            let count = count_points(&reduce_mod_p(eq, p)?, p, copts)?;
            return Ok(ReductionType::Good { ap: count.a });
        }
        return Err(ReductionError::NeedsOverride(p));
    }
    let min = minimal_at_p(eq, p)?;
    let disc_min = min.invariants(&f).disc;
    if valuation(disc_min.numer(), p).map_or(true, |v| v == 0) {
        let count = count_points(&reduce_mod_p(&min, p)?, p, copts)?;
        return Ok(ReductionType::Good { ap: count.a });
    }
    let fp = PrimeField::new(p);
    let red = reduce_mod_p(&min, p)?;
    let x0 = singular_x(&red, &fp);
    let inv = red.invariants(&fp);
    let d = fp.add(&inv.b2, &fp.mul(&fp.from_i64(12), &x0));
    if d == 0 {
        return Ok(ReductionType::Additive);
    }
    if fp.pow(d, (p - 1) / 2) == 1 {
        Ok(ReductionType::SplitMultiplicative)
    } else {
        Ok(ReductionType::NonsplitMultiplicative)
    }
}

/// Prime factorization of the absolute value of a BigInt, via small trial
/// division and a u64 finish.
fn factor_disc(disc: &BigInt) -> Result<Vec<(u64, u32)>, ReductionError> {
    let mut n = disc.abs();
    debug_assert!(!n.is_zero());
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in crate::pointcount::primes_in(2, 20_000) {
        if n.is_one() {
            break;
        }
        let bp = BigInt::from(p);
        let mut e = 0u32;
        loop {
            let (q, r) = n.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            n = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if !n.is_one() {
        let Some(rest) = n.to_u64() else {
            return Err(ReductionError::FactorizationFailed(n.to_string()));
        };
        for (p, e) in factor_u64(rest) {
            out.push((p, e));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Assemble the conductor. Exponents: 0 good, 1 multiplicative, 2 additive
/// (p >= 5); primes 2 and 3 with bad reduction must come from `overrides`,
/// whose exponents and types are used verbatim. A top-level conductor
/// override replaces the assembled product.
pub fn conductor(
    eq: &Equation<Rationals>,
    overrides: &Overrides,
    copts: &CountOptions,
) -> Result<ConductorData, ReductionError> {
    require_integral(eq)?;
    let disc = eq.invariants(&Rationals).disc.numer().clone();
    let mut exponents = BTreeMap::new();
    let mut types = BTreeMap::new();
    let mut overridden = BTreeSet::new();
    let mut missing = Vec::new();
    for (p, _) in factor_disc(&disc)? {
        if let Some(ov) = overrides.primes.get(&p) {
            exponents.insert(p, ov.exponent);
            types.insert(p, ov.reduction_type()?);
            overridden.insert(p);
            continue;
        }
        match classify(eq, p, copts) {
            Ok(t) => {
                let e = match t {
                    ReductionType::Good { .. } => 0,
                    ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative => 1,
                    ReductionType::Additive => 2,
                };
                if e > 0 {
                    exponents.insert(p, e);
                }
                types.insert(p, t);
            }
            Err(ReductionError::NeedsOverride(q)) => missing.push(q),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(ReductionError::MissingOverride(missing));
    }
    let mut n: u64 = 1;
    for (p, e) in &exponents {
        for _ in 0..*e {
            n = n.checked_mul(*p).ok_or(ReductionError::ConductorOverflow)?;
        }
    }
    if let Some(forced) = overrides.conductor {
        n = forced;
    }
    Ok(ConductorData { n, exponents, types, overridden })
}
