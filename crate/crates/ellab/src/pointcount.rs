//! Counting points of curves over prime fields, traces of Frobenius, and
//! the quadratic form deg(m + n phi) = m^2 + a mn + q n^2 attached to each
//! counted curve.
//!
//! Two counting strategies: an exhaustive quadratic-character scan for
//! small p, and baby-step giant-step order finding inside the Hasse
//! interval for large p. Both agree everywhere they overlap; the sweep
//! entry points exercise that agreement wholesale.

use crate::numerics::{HPComplex, HPReal, PrecisionConfig};
use crate::par;
use crate::weierstrass::{Curve, Equation, Field, Point, PrimeField};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CountError {
    #[error("equation is singular mod {0}")]
    SingularReduction(u64),
    #[error("group order ambiguous mod {p} after {attempts} sampled points")]
    AmbiguousOrder { p: u64, attempts: usize },
    #[error("trace {a} violates |a| <= 2 sqrt({q})")]
    HasseViolation { a: i64, q: u64 },
    #[error("precondition failed: {0}")]
    Precond(String),
}

/// Knobs for [`count_points`]. `exhaustive_threshold` is the largest p
/// still counted by full enumeration; `seed` fixes the BSGS sampling.
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub exhaustive_threshold: u64,
    pub seed: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { exhaustive_threshold: 65537, seed: 0x11A }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Exhaustive,
    Bsgs,
}

/// #E(F_p) together with the trace a = p + 1 - #E(F_p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountResult {
    pub p: u64,
    pub count: u64,
    pub a: i64,
    pub method: CountMethod,
}

/// Number of points of the nonsingular equation over F_p, including the
/// point at infinity.
pub fn count_points(
    eq: &Equation<PrimeField>,
    p: u64,
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    let f = PrimeField::new(p);
    if eq.is_singular(&f) {
        return Err(CountError::SingularReduction(p));
    }
    let (count, method) = if p <= opts.exhaustive_threshold || p <= 3 {
        (count_exhaustive(eq, p), CountMethod::Exhaustive)
    } else {
        (count_bsgs(eq, p, opts)?, CountMethod::Bsgs)
    };
    let a = (p as i128 + 1 - count as i128) as i64;
    debug_assert!((a as i128) * (a as i128) <= 4 * p as i128);
    Ok(CountResult { p, count, a, method })
}

/// Exhaustive count. For odd p, complete the square: the substitution
/// u = 2y + a1 x + a3 is a bijection, and u^2 = 4x^3 + b2 x^2 + 2b4 x + b6,
/// so the y-count at x is the number of square roots of f(x).
fn count_exhaustive(eq: &Equation<PrimeField>, p: u64) -> u64 {
    let f = PrimeField::new(p);
    if p == 2 {
        let mut n = 1u64;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = f.add(&f.square(&y), &f.mul(&y, &f.add(&f.mul(&eq.a1, &x), &eq.a3)));
                let rhs = f.add(
                    &f.mul(&x, &f.add(&f.square(&x), &f.add(&f.mul(&eq.a2, &x), &eq.a4))),
                    &eq.a6,
                );
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        return n;
    }
    let inv = eq.invariants(&f);
    let sqrt_count = sqrt_count_table(p);
    let mut n = 1u64;
    let four = f.from_i64(4);
    let two_b4 = f.add(&inv.b4, &inv.b4);
    for x in 0..p {
        // f(x) = ((4x + b2) x + 2 b4) x + b6
        let mut v = f.add(&f.mul(&four, &x), &inv.b2);
        v = f.add(&f.mul(&v, &x), &two_b4);
        v = f.add(&f.mul(&v, &x), &inv.b6);
        n += sqrt_count[v as usize] as u64;
    }
    n
}

/// Table t[v] = #{u in F_p : u^2 = v}.
fn sqrt_count_table(p: u64) -> Vec<u8> {
    let mut t = vec![0u8; p as usize];
    for u in 0..p {
        t[(u as u128 * u as u128 % p as u128) as usize] += 1;
    }
    t
}

/// Short-form coefficients (A, B) with y^2 = x^3 + Ax + B isomorphic to eq
/// (valid for p >= 5): A = -27 c4, B = -54 c6.
fn short_model(eq: &Equation<PrimeField>, f: &PrimeField) -> (u64, u64) {
    let inv = eq.invariants(f);
    let a = f.mul(&f.from_i64(-27), &inv.c4);
    let b = f.mul(&f.from_i64(-54), &inv.c6);
    (a, b)
}

fn count_bsgs(eq: &Equation<PrimeField>, p: u64, opts: &CountOptions) -> Result<u64, CountError> {
    let f = PrimeField::new(p);
    if p < 5 {
        return Ok(count_exhaustive(eq, p));
    }
    let (a, b) = short_model(eq, &f);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ p);
    let width = 2 * p.isqrt() + 2;
    let lo = (p + 1).saturating_sub(width).max(1);
    let hi = p + 1 + width;
    // Twist by a non-residue g: y^2 = x^3 + A g^2 x + B g^3.
    let g = (2..p).find(|&g| euler_chi(g, p) == -1).expect("p has a non-residue");
    let g2 = f.square(&g);
    let (ad, bd) = (f.mul(&a, &g2), f.mul(&b, &f.mul(&g2, &g)));

    let mut l_curve = 1u64;
    let mut l_twist = 1u64;
    for attempt in 0..40usize {
        let on_twist = attempt % 2 == 1;
        let (ca, cb) = if on_twist { (ad, bd) } else { (a, b) };
        let Some(pt) = random_short_point(ca, cb, p, &mut rng) else { continue };
        let curve = short_curve(ca, cb, f)?;
        let ord = point_order(&curve, &pt, p)?;
        if on_twist {
            l_twist = lcm_u64(l_twist, ord);
        } else {
            l_curve = lcm_u64(l_curve, ord);
        }
        let n1: Vec<u64> = multiples_in(l_curve, lo, hi);
        // #E + #E_twist = 2p + 2, so twist information cuts the same set.
        let n2: Vec<u64> = multiples_in(l_twist, lo, hi)
            .into_iter()
            .map(|m| 2 * p + 2 - m)
            .collect();
        let joint: Vec<u64> = n1.iter().copied().filter(|m| n2.contains(m)).collect();
        if joint.len() == 1 {
            return Ok(joint[0]);
        }
    }
    Err(CountError::AmbiguousOrder { p, attempts: 40 })
}

fn short_curve(a: u64, b: u64, f: PrimeField) -> Result<Curve<PrimeField>, CountError> {
    let eq = Equation::new(0, 0, 0, a, b);
    Curve::new(f, eq).map_err(|_| CountError::SingularReduction(f.p))
}

fn multiples_in(l: u64, lo: u64, hi: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut m = lo.div_ceil(l) * l;
    while m <= hi {
        v.push(m);
        m += l;
    }
    v
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// chi(v) via Euler's criterion; 0 for v = 0.
fn euler_chi(v: u64, p: u64) -> i32 {
    if v % p == 0 {
        return 0;
    }
    let f = PrimeField::new(p);
    if f.pow(v, (p - 1) / 2) == 1 {
        1
    } else {
        -1
    }
}

/// A uniformly random affine point of y^2 = x^3 + ax + b, if the sampled
/// x admits one.
fn random_short_point(
    a: u64,
    b: u64,
    p: u64,
    rng: &mut ChaCha8Rng,
) -> Option<Point<PrimeField>> {
    let f = PrimeField::new(p);
    for _ in 0..64 {
        let x = rng.gen_range(0..p);
        let rhs = f.add(&f.mul(&x, &f.add(&f.square(&x), &a)), &b);
        if rhs == 0 {
            return Some(Point::affine(x, 0));
        }
        if euler_chi(rhs, p) == 1 {
            let mut y = tonelli_shanks(rhs, p);
            if rng.gen_bool(0.5) {
                y = f.neg(&y);
            }
            return Some(Point::affine(x, y));
        }
    }
    None
}

/// Square root mod odd prime p of a known residue.
pub fn tonelli_shanks(n: u64, p: u64) -> u64 {
    debug_assert!(euler_chi(n, p) == 1);
    let f = PrimeField::new(p);
    if p % 4 == 3 {
        return f.pow(n, (p + 1) / 4);
    }
    // p - 1 = q 2^s with q odd
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| euler_chi(z, p) == -1).expect("non-residue exists");
    let mut m = s;
    let mut c = f.pow(z, q);
    let mut t = f.pow(n, q);
    let mut r = f.pow(n, (q + 1) / 2);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = f.mul(&tt, &tt);
            i += 1;
        }
        let mut bsq = c;
        for _ in 0..m - i - 1 {
            bsq = f.mul(&bsq, &bsq);
        }
        m = i;
        c = f.mul(&bsq, &bsq);
        t = f.mul(&t, &c);
        r = f.mul(&r, &bsq);
    }
    r
}

/// Exact order of a point, via BSGS for a multiple inside the Hasse
/// interval followed by prime-by-prime reduction.
fn point_order(
    curve: &Curve<PrimeField>,
    pt: &Point<PrimeField>,
    p: u64,
) -> Result<u64, CountError> {
    let q_pt = scalar_mul_u64(curve, p + 1, pt);
    let w = 2 * p.isqrt() + 2;
    let r = (2 * w).isqrt() + 1;
    let mut baby = std::collections::HashMap::new();
    let mut cur = Point::Identity;
    for j in 0..=r {
        if let Some((x, y)) = cur.xy() {
            baby.entry((*x, *y)).or_insert(j);
        } else if j > 0 {
            // [j]P = O already: order divides j.
            return reduce_order(curve, pt, j);
        }
        cur = curve.add(&cur, pt);
    }
    let giant = scalar_mul_u64(curve, r, pt);
    let giant_neg = curve.negate(&giant);
    // Scan [p+1+t]P = O for t = kr + j', |t| <= w.
    let kmax = w / r + 2;
    let mut walk = q_pt.clone();
    for k in 0..=kmax {
        // walk = Q + [k r]P; test walk = [-j']P i.e. -walk in baby table
        if let Some(n) = match_baby(curve, &walk, &baby, p, k, r, true) {
            return reduce_order(curve, pt, n);
        }
        walk = curve.add(&walk, &giant);
    }
    let mut walk = curve.add(&q_pt, &giant_neg);
    for k in 1..=kmax {
        if let Some(n) = match_baby(curve, &walk, &baby, p, k, r, false) {
            return reduce_order(curve, pt, n);
        }
        walk = curve.add(&walk, &giant_neg);
    }
    Err(CountError::Precond(format!("no annihilator of sampled point in Hasse interval mod {p}")))
}

fn match_baby(
    curve: &Curve<PrimeField>,
    walk: &Point<PrimeField>,
    baby: &std::collections::HashMap<(u64, u64), u64>,
    p: u64,
    k: u64,
    r: u64,
    positive: bool,
) -> Option<u64> {
    let base = p as i128 + 1;
    let kr = (k * r) as i128 * if positive { 1 } else { -1 };
    match walk.xy() {
        None => {
            let n = base + kr;
            (n > 0).then_some(n as u64)
        }
        Some((x, y)) => {
            // walk + [j]P = O for [j]P = -walk = (x, -y - a1 x - a3)
            let neg = curve.negate(walk);
            let (nx, ny) = neg.xy().expect("affine");
            let mut best: Option<i128> = None;
            if let Some(&j) = baby.get(&(*nx, *ny)) {
                let n = base + kr + j as i128;
                if n > 0 {
                    best = Some(n);
                }
            }
            if let Some(&j) = baby.get(&(*x, *y)) {
                // walk = [j]P: annihilated by j - (base + kr)... equivalently
                // [base + kr - j]P = O
                let n = base + kr - j as i128;
                if n > 0 && best.is_none_or(|b| n < b) {
                    best = Some(n);
                }
            }
            best.map(|n| n as u64)
        }
    }
}

fn scalar_mul_u64(curve: &Curve<PrimeField>, mut e: u64, p: &Point<PrimeField>) -> Point<PrimeField> {
    let mut acc = Point::Identity;
    let mut cur = p.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = curve.add(&acc, &cur);
        }
        e >>= 1;
        if e > 0 {
            cur = curve.double(&cur);
        }
    }
    acc
}

/// Exact order of pt given a multiple n with [n]pt = O.
fn reduce_order(
    curve: &Curve<PrimeField>,
    pt: &Point<PrimeField>,
    n: u64,
) -> Result<u64, CountError> {
    if !scalar_mul_u64(curve, n, pt).is_identity() {
        return Err(CountError::Precond(format!("{n} does not annihilate the sampled point")));
    }
    let mut ord = n;
    for (q, _) in factor_u64(n) {
        while ord % q == 0 && scalar_mul_u64(curve, ord / q, pt).is_identity() {
            ord /= q;
        }
    }
    Ok(ord)
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let f = PrimeField::new(n);
    'witness: for w in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(w, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = f.mul(&x, &x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization of a u64 by trial division then Pollard rho.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            push(p, &mut out);
            n /= p;
        }
    }
    let mut d = 7u64;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while d <= 1 << 20 && d * d <= n {
        while n % d == 0 {
            push(d, &mut out);
            n /= d;
        }
        d += wheel[wi];
        wi = (wi + 1) % wheel.len();
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            push(m, &mut out);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out
}

fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n));
    if n % 2 == 0 {
        return 2;
    }
    let f = PrimeField::new(n);
    let mut c = 1u64;
    loop {
        let step = |x: u64| f.add(&f.mul(&x, &x), &c);
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = step(x);
            y = step(step(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// The binary quadratic form deg(m + n phi) = m^2 + a mn + q n^2 attached
/// to Frobenius phi with trace a over F_q. Construction does not validate
/// the Hasse bound; [`FrobeniusForm::hasse_ok`] reports it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusForm {
    pub a: i64,
    pub q: u64,
}

impl FrobeniusForm {
    pub fn from_count(c: &CountResult) -> Self {
        Self { a: c.a, q: c.p }
    }

    pub fn value(&self, m: i64, n: i64) -> i128 {
        let (m, n) = (m as i128, n as i128);
        m * m + self.a as i128 * m * n + self.q as i128 * n * n
    }

    /// Polarization <u, v> = deg(u + v) - deg u - deg v.
    pub fn pairing(&self, u: (i64, i64), v: (i64, i64)) -> i128 {
        self.value(u.0 + v.0, u.1 + v.1) - self.value(u.0, u.1) - self.value(v.0, v.1)
    }

    pub fn hasse_ok(&self) -> bool {
        (self.a as i128) * (self.a as i128) <= 4 * self.q as i128
    }
}

/// Exact comparison data for |<u, v>| <= 2 sqrt(deg u deg v).
#[derive(Debug, Clone, Copy)]
pub struct CsDegReport {
    pub pairing: i128,
    pub deg_u: i128,
    pub deg_v: i128,
    pub holds: bool,
}

/// Cauchy-Schwarz for the degree form, compared in integers:
/// pairing^2 <= 4 deg_u deg_v.
pub fn cauchy_schwarz_deg(form: &FrobeniusForm, u: (i64, i64), v: (i64, i64)) -> CsDegReport {
    let pairing = form.pairing(u, v);
    let deg_u = form.value(u.0, u.1);
    let deg_v = form.value(v.0, v.1);
    let holds = pairing.checked_mul(pairing).is_some_and(|sq| sq <= 4 * deg_u * deg_v);
    CsDegReport { pairing, deg_u, deg_v, holds }
}

/// Roots (alpha, conj alpha) of X^2 - aX + q, which are complex conjugates
/// of absolute value sqrt(q) whenever a^2 < 4q.
pub fn local_lfactor_roots(
    form: &FrobeniusForm,
    cfg: &PrecisionConfig,
) -> Result<(HPComplex, HPComplex), CountError> {
    let a2 = form.a as i128 * form.a as i128;
    let four_q = 4 * form.q as i128;
    if a2 > four_q {
        return Err(CountError::HasseViolation { a: form.a, q: form.q });
    }
    let prec = cfg.working();
    let re = HPReal::from_i64(form.a, prec).scale2(-1);
    let disc = HPReal::from_i64((four_q - a2) as i64, prec);
    let im = disc.sqrt().scale2(-1);
    let alpha = HPComplex::new(re.clone(), im.clone());
    let beta = alpha.conj();
    Ok((alpha, beta))
}

/// Solution counts of x^2 y^2 + x^2 + y^2 = 1 over F_p for p = 1 mod 4.
///
/// `n` enumerates affine pairs (x, y). The affine curve misses exactly
/// four points of its smooth projective model when p = 1 mod 4: two above
/// x = infinity (the quartic v^2 = 1 - x^4 has square leading part there)
/// and two above the roots of x^2 = -1. `completed` = n + 4 is the smooth
/// count p + 1 - (pi + conj pi) with p = pi conj pi in Z[i]; the
/// 2 sqrt(p) defect bound holds for `completed`, not for `n` (p = 13
/// already separates them).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussCount {
    pub p: u64,
    pub n: u64,
    pub completed: u64,
    pub defect: i64,
    pub bound_ok: bool,
}

/// Count solutions of x^2 y^2 + x^2 + y^2 = 1: solving for y^2 gives
/// y^2 (x^2 + 1) = 1 - x^2, empty where x^2 = -1, else a quadratic in y.
pub fn gauss_diary_count(p: u64) -> Result<GaussCount, CountError> {
    if !is_prime_u64(p) {
        return Err(CountError::Precond(format!("{p} is not prime")));
    }
    if p % 4 != 1 {
        return Err(CountError::Precond(format!("{p} is not 1 mod 4")));
    }
    let f = PrimeField::new(p);
    let sqrt_count = sqrt_count_table(p);
    let mut n = 0u64;
    for x in 0..p {
        let x2 = f.mul(&x, &x);
        let denom = f.add(&x2, &1);
        if denom == 0 {
            continue;
        }
        let num = f.sub(&f.one(), &x2);
        let target = f.mul(&num, &f.inv(&denom).expect("nonzero"));
        n += sqrt_count[target as usize] as u64;
    }
    let completed = n + 4;
    let defect = p as i64 + 1 - completed as i64;
    let bound_ok = (defect as i128) * (defect as i128) <= 4 * p as i128;
    Ok(GaussCount { p, n, completed, defect, bound_ok })
}

/// Everything the short-curve survey records per prime: counts for all
/// nonsingular y^2 = x^3 + Ax + B, plus per-curve checks folded into flags.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub p: u64,
    pub curves: u64,
    pub max_abs_a: i64,
    pub hasse_ok: bool,
    /// deg(1 - phi) = value(1, -1) equals #E(F_p) for every curve.
    pub deg_matches_count: bool,
    /// m^2 + a mn + q n^2 >= 0 on the sampled integer box for every curve.
    pub form_nonnegative: bool,
    /// |alpha|^2 agrees with q to 2^-100 relative and beta = conj(alpha).
    pub roots_on_circle: bool,
}

/// Exhaustively count every nonsingular y^2 = x^3 + Ax + B over F_p and
/// run the per-curve trace checks. One squaring table and one character
/// scan are shared across all A, B.
pub fn sweep_short_curves(p: u64, cfg: &PrecisionConfig) -> SweepSummary {
    let f = PrimeField::new(p);
    let mut summary = SweepSummary {
        p,
        curves: 0,
        max_abs_a: 0,
        hasse_ok: true,
        deg_matches_count: true,
        form_nonnegative: true,
        roots_on_circle: true,
    };
    if p == 2 {
        // disc = -16(4A^3 + 27B^2) = 0 mod 2 always; nothing to count.
        return summary;
    }
    let sqrt_count = sqrt_count_table(p);
    // x^3 table reused across all (A, B).
    let cubes: Vec<u64> = (0..p).map(|x| f.mul(&x, &f.mul(&x, &x))).collect();
    let tol = HPReal::exp2(-100, 128);
    for a in 0..p {
        for b in 0..p {
            // disc/16 = -(4A^3 + 27B^2)
            let d = f.add(
                &f.mul(&f.from_i64(4), &f.mul(&a, &f.mul(&a, &a))),
                &f.mul(&f.from_i64(27), &f.mul(&b, &b)),
            );
            if d == 0 {
                continue;
            }
            let mut count = 1u64;
            for x in 0..p {
                let rhs = f.add(&cubes[x as usize], &f.add(&f.mul(&a, &x), &b));
                count += sqrt_count[rhs as usize] as u64;
            }
            summary.curves += 1;
            let trace = p as i64 + 1 - count as i64;
            summary.max_abs_a = summary.max_abs_a.max(trace.abs());
            let form = FrobeniusForm { a: trace, q: p };
            summary.hasse_ok &= form.hasse_ok();
            summary.deg_matches_count &= form.value(1, -1) == count as i128;
            for m in -5i64..=5 {
                for n in -5i64..=5 {
                    summary.form_nonnegative &= form.value(m, n) >= 0;
                }
            }
            summary.roots_on_circle &= roots_check(&form, cfg, &tol);
        }
    }
    summary
}

fn roots_check(form: &FrobeniusForm, cfg: &PrecisionConfig, rel_tol: &HPReal) -> bool {
    let Ok((alpha, beta)) = local_lfactor_roots(form, cfg) else {
        return false;
    };
    if beta != alpha.conj() {
        return false;
    }
    let q = HPReal::from_u64(form.q, cfg.working());
    let diff = alpha.norm2().sub(&q).abs();
    diff.cmp_value(&q.mul(rel_tol)) != std::cmp::Ordering::Greater
}

/// Survey several primes, in parallel when the `parallel` feature is on.
pub fn sweep_primes(primes: &[u64], cfg: &PrecisionConfig) -> Vec<SweepSummary> {
    let cfg = *cfg;
    par::map_vec(primes.to_vec(), move |p| sweep_short_curves(p, &cfg))
}

/// Sequential twin of [`sweep_primes`] for benchmark comparison.
pub fn sweep_primes_seq(primes: &[u64], cfg: &PrecisionConfig) -> Vec<SweepSummary> {
    par::map_vec_seq(primes.to_vec(), |p| sweep_short_curves(p, cfg))
}

/// Primes in [lo, hi).
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..hi).filter(|&n| is_prime_u64(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(p: u64, a: i64, b: i64) -> Equation<PrimeField> {
        let f = PrimeField::new(p);
        Equation::from_i64(&f, [0, 0, 0, a, b])
    }

    #[test]
    fn exhaustive_count_oracles() {
        let opts = CountOptions::default();
        // y^2 = x^3 + x over F_5: points O, (0,0), (2,0), (3,0).
        let r = count_points(&short(5, 1, 0), 5, &opts).unwrap();
        assert_eq!((r.count, r.a), (4, 2));
        assert_eq!(r.method, CountMethod::Exhaustive);
        // y^2 = x^3 + 1 over F_5: 6 points.
        let r = count_points(&short(5, 0, 1), 5, &opts).unwrap();
        assert_eq!((r.count, r.a), (6, 0));
    }

    #[test]
    fn counts_for_reference_curves_small_p() {
        let opts = CountOptions::default();
        let parsed = crate::weierstrass::parse_curve("0,-1,1,-10,-20").unwrap();
        let known = [(2u64, -2i64), (3, -1), (7, -2), (13, 4)];
        for (p, ap) in known {
            let eq = crate::weierstrass::reduce_mod_p(&parsed.eq, p).unwrap();
            let r = count_points(&eq, p, &opts).unwrap();
            assert_eq!(r.a, ap, "p = {p}");
        }
        let parsed = crate::weierstrass::parse_curve("0,0,1,-1,0").unwrap();
        let known = [(2u64, -2i64), (3, -3), (5, -2), (7, -1), (11, -5), (13, -2)];
        for (p, ap) in known {
            let eq = crate::weierstrass::reduce_mod_p(&parsed.eq, p).unwrap();
            let r = count_points(&eq, p, &opts).unwrap();
            assert_eq!(r.a, ap, "p = {p}");
        }
    }

    #[test]
    fn singular_reduction_rejected() {
        let opts = CountOptions::default();
        let r = count_points(&short(5, 0, 0), 5, &opts);
        assert!(matches!(r, Err(CountError::SingularReduction(5))));
    }

    #[test]
    fn bsgs_agrees_with_exhaustive() {
        let mut opts = CountOptions::default();
        for p in [1009u64, 2003, 4001, 9973] {
            for (a, b) in [(1i64, 3i64), (2, 5), (7, 11)] {
                let eq = short(p, a, b);
                opts.exhaustive_threshold = 65537;
                let ex = count_points(&eq, p, &opts).unwrap();
                opts.exhaustive_threshold = 0;
                let bs = count_points(&eq, p, &opts).unwrap();
                assert_eq!(ex.count, bs.count, "p={p} a={a} b={b}");
                assert_eq!(bs.method, CountMethod::Bsgs);
            }
        }
    }

    #[test]
    fn bsgs_handles_general_coefficients() {
        let mut opts = CountOptions::default();
        let f = PrimeField::new(3001);
        let eq = Equation::from_i64(&f, [1, -1, 1, -2, 3]);
        opts.exhaustive_threshold = 65537;
        let ex = count_points(&eq, 3001, &opts).unwrap();
        opts.exhaustive_threshold = 0;
        let bs = count_points(&eq, 3001, &opts).unwrap();
        assert_eq!(ex.count, bs.count);
    }

    #[test]
    fn tonelli_shanks_all_residues() {
        for p in [13u64, 17, 29, 97, 12289] {
            let f = PrimeField::new(p);
            for v in 1..p.min(200) {
                if euler_chi(v, p) == 1 {
                    let r = tonelli_shanks(v, p);
                    assert_eq!(f.mul(&r, &r), v, "sqrt({v}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn miller_rabin_matches_sieve() {
        let mut sieve = vec![true; 10_000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..100 {
            if sieve[i] {
                for j in (i * i..10_000).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for n in 0..10_000u64 {
            assert_eq!(is_prime_u64(n), sieve[n as usize], "n = {n}");
        }
        assert!(is_prime_u64(2_147_483_647));
        assert!(!is_prime_u64(2_147_483_649));
    }

    #[test]
    fn factoring_round_trips() {
        for n in [2u64, 12, 97, 1_000_000_007 * 3, 600_851_475_143, 1 << 40] {
            let fs = factor_u64(n);
            let mut prod = 1u64;
            for (p, e) in &fs {
                assert!(is_prime_u64(*p));
                prod *= p.pow(*e);
            }
            assert_eq!(prod, n);
        }
    }

    #[test]
    fn frobenius_form_identities() {
        let form = FrobeniusForm { a: -2, q: 5 };
        assert_eq!(form.value(1, 0), 1);
        assert_eq!(form.value(0, 1), 5);
        assert_eq!(form.value(1, -1), 1 + 2 + 5);
        assert!(form.hasse_ok());
        // Polarization is symmetric and bilinear on a lattice sample.
        for u in [(1i64, 2i64), (0, 1), (-3, 4)] {
            for v in [(2i64, -1i64), (1, 1)] {
                assert_eq!(form.pairing(u, v), form.pairing(v, u));
                let w = (u.0 + v.0, u.1 + v.1);
                let x = (5i64, -2i64);
                assert_eq!(
                    form.pairing(w, x),
                    form.pairing(u, x) + form.pairing(v, x)
                );
            }
        }
        assert!(!FrobeniusForm { a: 10, q: 1 }.hasse_ok());
    }

    #[test]
    fn degree_cauchy_schwarz() {
        let form = FrobeniusForm { a: 3, q: 7 };
        for u in [(1i64, 0i64), (2, 3), (-1, 4)] {
            for v in [(0i64, 1i64), (5, -2)] {
                let rep = cauchy_schwarz_deg(&form, u, v);
                assert!(rep.holds);
            }
        }
        // Equality at proportional vectors.
        let rep = cauchy_schwarz_deg(&form, (2, 4), (1, 2));
        assert_eq!(rep.pairing * rep.pairing, 4 * rep.deg_u * rep.deg_v);
    }

    #[test]
    fn local_roots_lie_on_sqrt_q_circle() {
        let cfg = PrecisionConfig::new(128, 32);
        let form = FrobeniusForm { a: -2, q: 5 };
        let (alpha, beta) = local_lfactor_roots(&form, &cfg).unwrap();
        assert_eq!(beta, alpha.conj());
        let q = HPReal::from_u64(5, cfg.working());
        let diff = alpha.norm2().sub(&q).abs();
        assert!(diff < HPReal::exp2(-120, cfg.working()));
        // alpha + beta = a, alpha * beta = q.
        let sum = alpha.add(&beta);
        assert!(sum.re.sub(&HPReal::from_i64(-2, cfg.working())).abs() < HPReal::exp2(-120, 64));
        assert!(sum.im.abs().is_zero() || sum.im.abs() < HPReal::exp2(-120, 64));
        let hasse_bad = FrobeniusForm { a: 10, q: 1 };
        assert!(matches!(
            local_lfactor_roots(&hasse_bad, &cfg),
            Err(CountError::HasseViolation { .. })
        ));
    }

    #[test]
    fn gauss_count_small_primes() {
        let g5 = gauss_diary_count(5).unwrap();
        assert_eq!(g5.n, 4);
        assert_eq!(g5.completed, 8);
        assert_eq!(g5.defect, -2);
        assert!(g5.bound_ok);
        // Affine counts and smooth defects: pi + conj pi for the primary
        // Gaussian prime above p (1814 normalization pi = 1 mod (1+i)^3).
        let expect = [(13u64, 4u64, 6i64), (17, 12, 2), (29, 36, -10)];
        for (p, n, defect) in expect {
            let g = gauss_diary_count(p).unwrap();
            assert_eq!(g.n, n, "affine count at {p}");
            assert_eq!(g.defect, defect, "defect at {p}");
            assert!(g.bound_ok, "p = {p}: defect {} too large", g.defect);
            assert_eq!(g.defect % 2, 0);
        }
        assert!(gauss_diary_count(7).is_err());
        assert!(gauss_diary_count(15).is_err());
    }

    #[test]
    fn sweep_small_prime() {
        let cfg = PrecisionConfig::new(128, 32);
        let s = sweep_short_curves(7, &cfg);
        // Nonsingular (A, B) pairs over F_7: 49 minus singular locus.
        assert!(s.curves > 30 && s.curves < 49);
        assert!(s.hasse_ok && s.deg_matches_count && s.form_nonnegative && s.roots_on_circle);
        let both = sweep_primes(&[3, 5], &cfg);
        let seq = sweep_primes_seq(&[3, 5], &cfg);
        assert_eq!(both.len(), 2);
        assert_eq!(both[0].curves, seq[0].curves);
        assert_eq!(both[1].curves, seq[1].curves);
    }

    #[test]
    fn primes_in_range() {
        assert_eq!(primes_in(2, 20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(primes_in(90, 100), vec![97]);
    }
}
