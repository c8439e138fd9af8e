//! Heights on rational points: the naive Weil height, the canonical height
//! computed by the doubling limit, the bilinear pairing it induces, and a
//! generic audit for positive definite quadratic forms on abelian groups.
//!
//! The canonical height is normalized as half the limit of `4^{-n} h(x([2^n]P))`,
//! so the pairing `<P,Q> = hhat(P+Q) - hhat(P) - hhat(Q)` satisfies
//! `<P,P> = 2 hhat(P)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numerics::{ln, HPReal};
use crate::weierstrass::{format_point, Curve, CurveError, Equation, Point, Rationals};

const DEFAULT_N_CAP: u32 = 12;
const DEFAULT_BIT_BUDGET: u64 = 1 << 24;

/// Coordinate size above which the torsion scan is skipped; rational torsion
/// points have small coordinates, so large inputs cannot be torsion.
const TORSION_SCAN_BIT_LIMIT: u64 = 512;

#[derive(Debug, Clone, thiserror::Error)]
pub enum HeightError {
    #[error("the identity has no affine x-coordinate")]
    IdentityPoint,
    #[error("point {0} does not satisfy the curve equation")]
    PointNotOnCurve(String),
    #[error("quadratic form audit failed the {law} law at {witness}")]
    AuditFailure { law: String, witness: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// A canonical height together with an a posteriori error bound and the
/// number of doublings the limit computation spent.
#[derive(Debug, Clone)]
pub struct HeightValue {
    pub value: HPReal,
    pub error_bound: HPReal,
    pub doublings_used: u32,
}

/// A pairing value with the summed error of its three height evaluations.
#[derive(Debug, Clone)]
pub struct PairingValue {
    pub value: HPReal,
    pub error_bound: HPReal,
}

/// Both sides of the height inequality `|hhat(P-Q) - hhat(P) - hhat(Q)| <= 2 sqrt(hhat(P) hhat(Q))`
/// together with the combined error of the evaluations feeding them.
#[derive(Debug, Clone)]
pub struct CsReport {
    pub lhs: HPReal,
    pub rhs: HPReal,
    pub error_bound: HPReal,
    pub holds: bool,
}

fn bits_of(n: &BigInt) -> u64 {
    n.magnitude().bits()
}

/// Weil height of the x-coordinate: `log max(|num|, |den|)` in lowest terms.
pub fn naive_height(p: &Point<Rationals>, prec: u32) -> Result<HPReal, HeightError> {
    let Some((x, _)) = p.xy() else {
        return Err(HeightError::IdentityPoint);
    };
    Ok(log_max_abs(x.numer(), x.denom(), prec))
}

fn log_max_abs(a: &BigInt, b: &BigInt, prec: u32) -> HPReal {
    let am = a.abs();
    let bm = b.abs();
    let m = if am >= bm { am } else { bm };
    if m <= BigInt::one() {
        return HPReal::zero(prec);
    }
    ln(&HPReal::from_ratio(&m, &BigInt::one(), prec))
}

/// Integral b-invariants of an integral model, as used by the duplication
/// polynomials phi(x) = x^4 - b4 x^2 - 2 b6 x - b8, psi(x) = 4x^3 + b2 x^2 + 2 b4 x + b6.
struct BInvariants {
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
}

fn integral_b_invariants(eq: &Equation<Rationals>) -> Option<BInvariants> {
    let int = |r: &BigRational| -> Option<BigInt> {
        if r.denom().is_one() {
            Some(r.numer().clone())
        } else {
            None
        }
    };
    let a1 = int(&eq.a1)?;
    let a2 = int(&eq.a2)?;
    let a3 = int(&eq.a3)?;
    let a4 = int(&eq.a4)?;
    let a6 = int(&eq.a6)?;
    let b2 = &a1 * &a1 + 4 * &a2;
    let b4 = 2 * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + 4 * &a6;
    let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
    Some(BInvariants { b2, b4, b6, b8 })
}

/// Rescale a rational model to an integral one via (x,y) -> (u^2 x, u^3 y).
/// The canonical height is invariant under this isomorphism.
fn integral_model(
    eq: &Equation<Rationals>,
    p: &Point<Rationals>,
) -> Result<(Curve<Rationals>, Point<Rationals>), HeightError> {
    let mut u = BigInt::one();
    for d in [
        eq.a1.denom(),
        eq.a2.denom(),
        eq.a3.denom(),
        eq.a4.denom(),
        eq.a6.denom(),
    ] {
        u = lcm_bigint(&u, d);
    }
    let scale = |r: &BigRational, k: u32| -> BigRational { r * BigRational::from_integer(u.pow(k)) };
    let eq2 = Equation::new(
        scale(&eq.a1, 1),
        scale(&eq.a2, 2),
        scale(&eq.a3, 3),
        scale(&eq.a4, 4),
        scale(&eq.a6, 6),
    );
    let curve = Curve::new(Rationals, eq2)?;
    let p2 = match p.xy() {
        None => Point::Identity,
        Some((x, y)) => Point::affine(
            x * BigRational::from_integer(&u * &u),
            y * BigRational::from_integer(&u * &u * &u),
        ),
    };
    Ok((curve, p2))
}

fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    (a * b).abs() / a.gcd(b)
}

/// Fraction-free determinant of a square integer matrix.
fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut denom = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, r);
            sign = -sign;
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let lik = m[i][k].clone();
            for j in k + 1..n {
                let t = &m[i][j] * &pivot - &lik * &m[k][j];
                m[i][j] = t / &denom;
            }
            m[i][k] = BigInt::zero();
        }
        denom = pivot;
    }
    let d = m.pop().unwrap().pop().unwrap();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Resultant of the duplication polynomials. Any common factor of the
/// homogeneous numerator and denominator at a coprime input divides this,
/// which keeps the per-step gcd cheap. Nonzero on nonsingular curves.
fn duplication_resultant(b: &BInvariants) -> BigInt {
    let phi = [
        BigInt::one(),
        BigInt::zero(),
        -&b.b4,
        -2 * &b.b6,
        -&b.b8,
    ];
    let psi = [BigInt::from(4), b.b2.clone(), 2 * &b.b4, b.b6.clone()];
    let mut m = vec![vec![BigInt::zero(); 7]; 7];
    for (r, row) in m.iter_mut().enumerate().take(3) {
        for (c, coeff) in phi.iter().enumerate() {
            row[r + c] = coeff.clone();
        }
    }
    for (r, row) in m.iter_mut().enumerate().skip(3) {
        for (c, coeff) in psi.iter().enumerate() {
            row[r - 3 + c] = coeff.clone();
        }
    }
    det_bareiss(m)
}

fn gcd_with_small(huge: &BigInt, small: &BigInt) -> BigInt {
    if small.is_zero() {
        return huge.abs();
    }
    (huge % small).gcd(small)
}

/// One duplication step on x = a/b in lowest terms with b > 0.
/// Returns None exactly when the doubled point is the identity.
fn double_x(b_inv: &BInvariants, res: &BigInt, a: &BigInt, b: &BigInt) -> Option<(BigInt, BigInt)> {
    let a2 = a * a;
    let b2 = b * b;
    let ab = a * b;
    let a2b2 = &a2 * &b2;
    let ab3 = &ab * &b2;
    let b4 = &b2 * &b2;
    let num: BigInt = &a2 * &a2 - &b_inv.b4 * &a2b2 - 2 * &b_inv.b6 * &ab3 - &b_inv.b8 * &b4;
    let den: BigInt = 4 * &a2 * &ab + &b_inv.b2 * &a2b2 + 2 * &b_inv.b4 * &ab3 + &b_inv.b6 * &b4;
    if den.is_zero() {
        return None;
    }
    // gcd(num, den) divides res, which is small; reducing the big operands
    // mod the small one first keeps the gcd cost linear in their size.
    let g1 = gcd_with_small(&num, res);
    let g = gcd_with_small(&den, &g1);
    let mut num = num / &g;
    let mut den = den / &g;
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    Some((num, den))
}

/// Uniform bound on |h(x(2Q)) - 4 h(x(Q))| from the duplication coefficients,
/// used for the geometric tail of the limit.
fn drift_margin(b: &BInvariants) -> f64 {
    let mag = |n: &BigInt| -> f64 {
        let bits = bits_of(n) as f64;
        bits * std::f64::consts::LN_2
    };
    let spread = mag(&b.b2)
        .max(mag(&b.b4) + 1.0)
        .max(mag(&b.b6) + 1.0)
        .max(mag(&b.b8))
        .max(0.0);
    2.0 * spread + 16.0f64.ln() * 2.0
}

fn torsion_order(curve: &Curve<Rationals>, p: &Point<Rationals>) -> Option<u32> {
    if p.is_identity() {
        return Some(1);
    }
    if let Some((x, y)) = p.xy() {
        let big = [x.numer(), x.denom(), y.numer(), y.denom()]
            .iter()
            .any(|n| bits_of(n) > TORSION_SCAN_BIT_LIMIT);
        if big {
            return None;
        }
    }
    let mut q = p.clone();
    for m in 2..=12u32 {
        q = curve.add(&q, p);
        if q.is_identity() {
            return Some(m);
        }
    }
    None
}

/// Canonical height with the default doubling cap and coordinate budget.
pub fn canonical_height(
    curve: &Curve<Rationals>,
    p: &Point<Rationals>,
    tol: &HPReal,
) -> Result<HeightValue, HeightError> {
    canonical_height_with(curve, p, tol, DEFAULT_N_CAP, DEFAULT_BIT_BUDGET)
}

/// Canonical height by the doubling limit `(1/2) lim 4^{-n} h(x([2^n]P))`.
///
/// Doubles the x-coordinate exactly until successive scaled estimates agree
/// within `tol/2` (after at least 4 doublings), the cap is reached, or the
/// coordinates exceed `bit_budget`. The latter two return the best estimate
/// with its honest error bound rather than failing. Torsion points resolve
/// to an exact zero.
pub fn canonical_height_with(
    curve: &Curve<Rationals>,
    p: &Point<Rationals>,
    tol: &HPReal,
    n_cap: u32,
    bit_budget: u64,
) -> Result<HeightValue, HeightError> {
    let prec = tol.precision().max(96);
    if p.is_identity() {
        return Ok(exact_zero_height(prec, 0));
    }
    if !curve.contains(p) {
        return Err(HeightError::PointNotOnCurve(format_point(p)));
    }
    if torsion_order(curve, p).is_some() {
        return Ok(exact_zero_height(prec, 0));
    }

    let (icurve, ip) = integral_model(curve.equation(), p)?;
    let b_inv = integral_b_invariants(icurve.equation()).expect("integral model");
    let res = duplication_resultant(&b_inv);
    debug_assert!(!res.is_zero());
    let drift = drift_margin(&b_inv);

    let (x, _) = ip.xy().expect("affine");
    let mut a = x.numer().clone();
    let mut b = x.denom().clone();
    if b.is_negative() {
        a = -a;
        b = -b;
    }

    let mut n = 0u32;
    let mut est = log_max_abs(&a, &b, prec).scale2(-1);
    let mut diff = est.clone();
    // The difference sequence can lull near zero for a step or two while the
    // denominator digits at a bad prime reorganize, then jump again, so a
    // single small difference is not trusted; three in a row are required.
    let mut streak = 0u32;
    // Largest per-doubling correction |h_{k+1} - 4 h_k| seen so far; the tail
    // of the limit is geometric in it. The theoretical margin caps it.
    let mut observed = 0.0f64;
    let tol_gate = tol.scale2(-1);
    loop {
        let over_cap = n >= n_cap;
        let over_budget = bits_of(&a) + bits_of(&b) > bit_budget / 4;
        let converged = n >= 4 && streak >= 3;
        if converged || over_cap || over_budget {
            let margin = drift.min((1.5 * observed).max(0.7));
            let tail = HPReal::from_f64(margin, prec).scale2(-2 * n as i64);
            return Ok(HeightValue {
                value: est,
                error_bound: diff.scale2(1).add(&tail),
                doublings_used: n,
            });
        }
        let Some((na, nb)) = double_x(&b_inv, &res, &a, &b) else {
            return Ok(exact_zero_height(prec, n));
        };
        a = na;
        b = nb;
        n += 1;
        let next = log_max_abs(&a, &b, prec).scale2(-2 * (n as i64) - 1);
        diff = next.sub(&est).abs();
        observed = observed.max(diff.to_f64() * 2.0 * 4.0f64.powi(n as i32));
        if diff.cmp_value(&tol_gate) == std::cmp::Ordering::Less {
            streak += 1;
        } else {
            streak = 0;
        }
        est = next;
    }
}

fn exact_zero_height(prec: u32, doublings: u32) -> HeightValue {
    HeightValue {
        value: HPReal::zero(prec),
        error_bound: HPReal::zero(prec),
        doublings_used: doublings,
    }
}

/// The bilinear pairing `<P,Q> = hhat(P+Q) - hhat(P) - hhat(Q)`.
pub fn nt_pairing(
    curve: &Curve<Rationals>,
    p: &Point<Rationals>,
    q: &Point<Rationals>,
    tol: &HPReal,
) -> Result<PairingValue, HeightError> {
    let sum = curve.add(p, q);
    let h_sum = canonical_height(curve, &sum, tol)?;
    let h_p = canonical_height(curve, p, tol)?;
    let h_q = canonical_height(curve, q, tol)?;
    Ok(PairingValue {
        value: h_sum.value.sub(&h_p.value).sub(&h_q.value),
        error_bound: h_sum
            .error_bound
            .add(&h_p.error_bound)
            .add(&h_q.error_bound),
    })
}

/// Evaluates `|hhat(P-Q) - hhat(P) - hhat(Q)|` against `2 sqrt(hhat(P) hhat(Q))`.
pub fn cauchy_schwarz_ht(
    curve: &Curve<Rationals>,
    p: &Point<Rationals>,
    q: &Point<Rationals>,
    tol: &HPReal,
) -> Result<CsReport, HeightError> {
    let diff = curve.add(p, &curve.negate(q));
    let h_d = canonical_height(curve, &diff, tol)?;
    let h_p = canonical_height(curve, p, tol)?;
    let h_q = canonical_height(curve, q, tol)?;
    let prec = h_p.value.precision();
    let zero = HPReal::zero(prec);
    let clamp = |v: &HPReal| HPReal::max_value(v, &zero);
    let lhs = h_d.value.sub(&h_p.value).sub(&h_q.value).abs();
    let rhs = clamp(&h_p.value).mul(&clamp(&h_q.value)).sqrt().scale2(1);
    let hi = clamp(&h_p.value.add(&h_p.error_bound))
        .mul(&clamp(&h_q.value.add(&h_q.error_bound)))
        .sqrt()
        .scale2(1);
    let lo = clamp(&h_p.value.sub(&h_p.error_bound))
        .mul(&clamp(&h_q.value.sub(&h_q.error_bound)))
        .sqrt()
        .scale2(1);
    let error_bound = h_d
        .error_bound
        .add(&h_p.error_bound)
        .add(&h_q.error_bound)
        .add(&hi.sub(&lo));
    let holds = lhs.cmp_value(&rhs.add(&error_bound)) != std::cmp::Ordering::Greater;
    Ok(CsReport {
        lhs,
        rhs,
        error_bound,
        holds,
    })
}

/// Gram matrix of the pairing on a list of points, with per-entry error
/// bounds. Heights of the points and their pairwise sums are computed in
/// parallel, each one being an independent exact computation.
pub fn pairing_matrix(
    curve: &Curve<Rationals>,
    pts: &[Point<Rationals>],
    tol: &HPReal,
) -> Result<(Vec<Vec<HPReal>>, Vec<Vec<HPReal>>), HeightError> {
    pairing_matrix_inner(curve, pts, tol, true)
}

/// Sequential twin of [`pairing_matrix`] for benchmark comparison.
pub fn pairing_matrix_seq(
    curve: &Curve<Rationals>,
    pts: &[Point<Rationals>],
    tol: &HPReal,
) -> Result<(Vec<Vec<HPReal>>, Vec<Vec<HPReal>>), HeightError> {
    pairing_matrix_inner(curve, pts, tol, false)
}

fn pairing_matrix_inner(
    curve: &Curve<Rationals>,
    pts: &[Point<Rationals>],
    tol: &HPReal,
    parallel: bool,
) -> Result<(Vec<Vec<HPReal>>, Vec<Vec<HPReal>>), HeightError> {
    let k = pts.len();
    let mut jobs: Vec<Point<Rationals>> = pts.to_vec();
    for i in 0..k {
        for j in i..k {
            jobs.push(curve.add(&pts[i], &pts[j]));
        }
    }
    let worker = |pt: Point<Rationals>| canonical_height(curve, &pt, tol);
    let heights = if parallel {
        crate::par::map_vec(jobs, worker)
    } else {
        crate::par::map_vec_seq(jobs, worker)
    };
    let mut heights = heights.into_iter().collect::<Result<Vec<_>, _>>()?;
    let sums = heights.split_off(k);
    let singles = heights;
    let prec = tol.precision().max(96);
    let mut values = vec![vec![HPReal::zero(prec); k]; k];
    let mut errors = vec![vec![HPReal::zero(prec); k]; k];
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            let v = sums[idx]
                .value
                .sub(&singles[i].value)
                .sub(&singles[j].value);
            let e = sums[idx]
                .error_bound
                .add(&singles[i].error_bound)
                .add(&singles[j].error_bound);
            values[i][j] = v.clone();
            values[j][i] = v;
            errors[i][j] = e.clone();
            errors[j][i] = e;
            idx += 1;
        }
    }
    Ok((values, errors))
}

/// A candidate positive definite quadratic form on an abelian group,
/// presented through a finite family of test elements. The pairing is
/// always the derived one, `<a,b> = d(a+b) - d(a) - d(b)`.
pub trait QuadraticFormWitness {
    type Elem: Clone;

    fn elements(&self) -> Vec<Self::Elem>;
    fn zero_elem(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn value(&mut self, a: &Self::Elem) -> Result<HPReal, HeightError>;
    fn tolerance(&self) -> HPReal;
    fn describe(&self, a: &Self::Elem) -> String;
}

/// Counts of the checks a successful audit performed, plus non-fatal
/// observations (small nonzero values that merely look like torsion).
#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub elements_checked: usize,
    pub bilinear_triples: usize,
    pub combos_checked: usize,
    pub warnings: Vec<String>,
}

/// Checks the defining laws of a positive definite quadratic form on the
/// witness elements: symmetry under negation, nonnegativity with the zero
/// case, bilinearity of the derived pairing, and nonnegativity of
/// `<m a + n b, m a + n b>` over the grid m, n in [-5, 5].
pub fn qform_audit<W: QuadraticFormWitness>(w: &mut W) -> Result<AuditReport, HeightError> {
    let mut report = AuditReport::default();
    let tol = w.tolerance();
    let elems = w.elements();

    for e in &elems {
        let d = w.value(e)?;
        let dn = w.value(&w.neg(e))?;
        if d.is_negative() && d.abs().cmp_value(&tol) == std::cmp::Ordering::Greater {
            return Err(HeightError::AuditFailure {
                law: "positivity".into(),
                witness: w.describe(e),
            });
        }
        if d.sub(&dn).abs().cmp_value(&tol.scale2(1)) == std::cmp::Ordering::Greater {
            return Err(HeightError::AuditFailure {
                law: "negation symmetry".into(),
                witness: w.describe(e),
            });
        }
        if w.is_zero(e) {
            if d.abs().cmp_value(&tol) == std::cmp::Ordering::Greater {
                return Err(HeightError::AuditFailure {
                    law: "zero value".into(),
                    witness: w.describe(e),
                });
            }
        } else if d.cmp_value(&tol) != std::cmp::Ordering::Greater {
            report
                .warnings
                .push(format!("{} has near-zero value", w.describe(e)));
        }
        report.elements_checked += 1;
    }

    let pairing = |w: &mut W, a: &W::Elem, b: &W::Elem| -> Result<HPReal, HeightError> {
        let sum = w.add(a, b);
        let dab = w.value(&sum)?;
        let da = w.value(a)?;
        let db = w.value(b)?;
        Ok(dab.sub(&da).sub(&db))
    };

    for a in &elems {
        for b in &elems {
            for c in &elems {
                let ab = w.add(a, b);
                let lhs = pairing(w, &ab, c)?;
                let pac = pairing(w, a, c)?;
                let pbc = pairing(w, b, c)?;
                let rhs = pac.add(&pbc);
                if lhs.sub(&rhs).abs().cmp_value(&tol.scale2(3)) == std::cmp::Ordering::Greater {
                    return Err(HeightError::AuditFailure {
                        law: "bilinearity".into(),
                        witness: format!(
                            "({}, {}, {})",
                            w.describe(a),
                            w.describe(b),
                            w.describe(c)
                        ),
                    });
                }
                report.bilinear_triples += 1;
            }
        }
    }

    // Combination grid in L1 shells, larger m first and positive n before
    // negative, so low-complexity counterexamples are the ones reported.
    let nonzero: Vec<W::Elem> = elems.iter().filter(|e| !w.is_zero(e)).cloned().collect();
    let pairs: Vec<(W::Elem, W::Elem)> = match nonzero.len() {
        0 => Vec::new(),
        1 => vec![(nonzero[0].clone(), nonzero[0].clone())],
        _ => vec![(nonzero[0].clone(), nonzero[1].clone())],
    };
    for (alpha, beta) in &pairs {
        for shell in 0..=10i64 {
            for m in (-5..=5i64).rev() {
                let rest = shell - m.abs();
                if !(0..=5).contains(&rest) {
                    continue;
                }
                let ns: &[i64] = if rest == 0 { &[0] } else { &[rest, -rest] };
                for &n in ns {
                    let ga = scalar_combo(&*w, m, alpha);
                    let gb = scalar_combo(&*w, n, beta);
                    let gamma = w.add(&ga, &gb);
                    let q = pairing(w, &gamma, &gamma)?;
                    if q.is_negative() && q.abs().cmp_value(&tol.scale2(3)) == std::cmp::Ordering::Greater
                    {
                        return Err(HeightError::AuditFailure {
                            law: "combination positivity".into(),
                            witness: format!("(m, n) = ({m}, {n})"),
                        });
                    }
                    report.combos_checked += 1;
                }
            }
        }
    }
    Ok(report)
}

fn scalar_combo<W: QuadraticFormWitness>(w: &W, m: i64, a: &W::Elem) -> W::Elem {
    let mut acc = w.zero_elem();
    let step = if m >= 0 { a.clone() } else { w.neg(a) };
    for _ in 0..m.unsigned_abs() {
        acc = w.add(&acc, &step);
    }
    acc
}

/// An integer binary quadratic form `d(m, n) = sq1 m^2 + cross mn + sq2 n^2`
/// on Z^2. Instantiated by the endomorphism degree form `m^2 + a mn + q n^2`
/// and, for detector tests, by deliberately indefinite forms.
pub struct IntegerPairForm {
    pub sq1: i64,
    pub cross: i64,
    pub sq2: i64,
    prec: u32,
}

impl IntegerPairForm {
    pub fn new(sq1: i64, cross: i64, sq2: i64) -> Self {
        Self {
            sq1,
            cross,
            sq2,
            prec: 96,
        }
    }

    /// Degree form of `m + n phi` for a Frobenius of trace `a` on a curve
    /// over a field of `q` elements.
    pub fn frobenius(a: i64, q: u64) -> Self {
        Self::new(1, a, q as i64)
    }
}

impl QuadraticFormWitness for IntegerPairForm {
    type Elem = (i64, i64);

    fn elements(&self) -> Vec<(i64, i64)> {
        vec![(0, 0), (1, 0), (0, 1)]
    }
    fn zero_elem(&self) -> (i64, i64) {
        (0, 0)
    }
    fn add(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
        (a.0 + b.0, a.1 + b.1)
    }
    fn neg(&self, a: &(i64, i64)) -> (i64, i64) {
        (-a.0, -a.1)
    }
    fn is_zero(&self, a: &(i64, i64)) -> bool {
        *a == (0, 0)
    }
    fn value(&mut self, a: &(i64, i64)) -> Result<HPReal, HeightError> {
        let (m, n) = *a;
        let v = self.sq1 * m * m + self.cross * m * n + self.sq2 * n * n;
        Ok(HPReal::from_i64(v, self.prec))
    }
    fn tolerance(&self) -> HPReal {
        HPReal::zero(self.prec)
    }
    fn describe(&self, a: &(i64, i64)) -> String {
        format!("({}, {})", a.0, a.1)
    }
}

/// The canonical height as a quadratic form on a finite set of rational
/// points. Height evaluations are memoized by the point's text form.
pub struct NeronTateForm<'a> {
    curve: &'a Curve<Rationals>,
    pts: Vec<Point<Rationals>>,
    tol: HPReal,
    cache: HashMap<String, HPReal>,
}

impl<'a> NeronTateForm<'a> {
    pub fn new(curve: &'a Curve<Rationals>, pts: Vec<Point<Rationals>>, tol: HPReal) -> Self {
        Self {
            curve,
            pts,
            tol,
            cache: HashMap::new(),
        }
    }
}

impl QuadraticFormWitness for NeronTateForm<'_> {
    type Elem = Point<Rationals>;

    fn elements(&self) -> Vec<Point<Rationals>> {
        self.pts.clone()
    }
    fn zero_elem(&self) -> Point<Rationals> {
        Point::Identity
    }
    fn add(&self, a: &Point<Rationals>, b: &Point<Rationals>) -> Point<Rationals> {
        self.curve.add(a, b)
    }
    fn neg(&self, a: &Point<Rationals>) -> Point<Rationals> {
        self.curve.negate(a)
    }
    fn is_zero(&self, a: &Point<Rationals>) -> bool {
        a.is_identity()
    }
    fn value(&mut self, a: &Point<Rationals>) -> Result<HPReal, HeightError> {
        // The height depends only on x, which negation preserves.
        let key = match a.xy() {
            None => "O".to_string(),
            Some((x, _)) => format!("{}/{}", x.numer(), x.denom()),
        };
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        // The audit tolerance is coarse, so a reduced coordinate budget
        // keeps heights of large multiples affordable.
        let h = canonical_height_with(self.curve, a, &self.tol, DEFAULT_N_CAP, 1 << 22)?;
        self.cache.insert(key, h.value.clone());
        Ok(h.value)
    }
    fn tolerance(&self) -> HPReal {
        // Audit identities combine several height evaluations, each carrying
        // its own bound near tol.
        self.tol.scale2(3)
    }
    fn describe(&self, a: &Point<Rationals>) -> String {
        format_point(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::parse_point;

    fn curve_37a1() -> Curve<Rationals> {
        let eq = Equation::from_i64(&Rationals, [0, 0, 1, -1, 0]);
        Curve::new(Rationals, eq).unwrap()
    }

    fn curve_11a1() -> Curve<Rationals> {
        let eq = Equation::from_i64(&Rationals, [0, -1, 1, -10, -20]);
        Curve::new(Rationals, eq).unwrap()
    }

    fn tol() -> HPReal {
        HPReal::from_f64(1e-6, 96)
    }

    #[test]
    fn naive_height_base_points() {
        let p0 = parse_point("0,0").unwrap();
        assert!(naive_height(&p0, 96).unwrap().is_zero());
        let p5 = parse_point("5,5").unwrap();
        let h5 = naive_height(&p5, 96).unwrap();
        let want5 = ln(&HPReal::from_u64(5, 96));
        assert!(h5.sub(&want5).abs().to_f64() < 1e-25);
        let pf = parse_point("7/3,1").unwrap();
        let hf = naive_height(&pf, 96).unwrap();
        let want7 = ln(&HPReal::from_u64(7, 96));
        assert!(hf.sub(&want7).abs().to_f64() < 1e-25);
        assert!(matches!(
            naive_height(&Point::Identity, 96),
            Err(HeightError::IdentityPoint)
        ));
    }

    #[test]
    fn x_only_doubling_matches_the_group_law() {
        let curve = curve_37a1();
        let b = integral_b_invariants(curve.equation()).unwrap();
        let res = duplication_resultant(&b);
        assert!(!res.is_zero());
        let mut pt = parse_point("0,0").unwrap();
        let (x0, _) = pt.xy().unwrap();
        let mut a = x0.numer().clone();
        let mut d = x0.denom().clone();
        for _ in 0..6 {
            let (na, nd) = double_x(&b, &res, &a, &d).unwrap();
            pt = curve.double(&pt);
            let (x, _) = pt.xy().unwrap();
            assert_eq!(BigRational::new(na.clone(), nd.clone()), *x);
            a = na;
            d = nd;
        }
    }

    #[test]
    fn identity_and_torsion_have_exact_zero_height() {
        let c11 = curve_11a1();
        let h_id = canonical_height(&c11, &Point::Identity, &tol()).unwrap();
        assert!(h_id.value.is_zero() && h_id.error_bound.is_zero());
        let p = parse_point("5,5").unwrap();
        let h = canonical_height(&c11, &p, &tol()).unwrap();
        assert!(h.value.is_zero());
        assert_eq!(h.doublings_used, 0);
    }

    #[test]
    fn generator_height_matches_the_frozen_value() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let h = canonical_height(&c, &p, &tol()).unwrap();
        let v = h.value.to_f64();
        assert!(
            (v - 0.0255557041199844).abs() < 1e-6,
            "height {v}, {} doublings",
            h.doublings_used
        );
        assert!(h.error_bound.to_f64() < 1e-5);
        assert!(h.doublings_used >= 4);
    }

    #[test]
    fn off_curve_points_are_rejected() {
        let c = curve_37a1();
        let p = parse_point("3,3").unwrap();
        assert!(matches!(
            canonical_height(&c, &p, &tol()),
            Err(HeightError::PointNotOnCurve(_))
        ));
    }

    #[test]
    fn doubling_scales_the_height_by_four() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let p2 = c.double(&p);
        let h1 = canonical_height(&c, &p, &tol()).unwrap();
        let h2 = canonical_height(&c, &p2, &tol()).unwrap();
        let resid = h2.value.sub(&h1.value.scale2(2)).abs();
        let budget = h2.error_bound.add(&h1.error_bound.scale2(2)).to_f64() * 3.0;
        assert!(resid.to_f64() <= budget.max(3e-6), "residual {}", resid.to_f64());
    }

    #[test]
    fn triple_scales_the_height_by_nine() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let p3 = c.scalar_mul(3, &p);
        let h1 = canonical_height(&c, &p, &tol()).unwrap();
        let h3 = canonical_height(&c, &p3, &tol()).unwrap();
        let resid = (h3.value.to_f64() - 9.0 * h1.value.to_f64()).abs();
        assert!(resid <= 1e-5, "residual {resid}");
    }

    #[test]
    fn pairing_base_identities() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let h = canonical_height(&c, &p, &tol()).unwrap().value.to_f64();
        let with_id = nt_pairing(&c, &p, &Point::Identity, &tol()).unwrap();
        assert!(with_id.value.to_f64().abs() <= with_id.error_bound.to_f64() + 1e-9);
        let self_pair = nt_pairing(&c, &p, &p, &tol()).unwrap();
        assert!((self_pair.value.to_f64() - 2.0 * h).abs() <= self_pair.error_bound.to_f64() + 1e-5);
        let anti = nt_pairing(&c, &p, &c.negate(&p), &tol()).unwrap();
        assert!((anti.value.to_f64() + 2.0 * h).abs() <= anti.error_bound.to_f64() + 1e-5);
    }

    #[test]
    fn parallelogram_law_holds() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let q = parse_point("1,0").unwrap();
        let t = tol();
        let hs = [
            canonical_height(&c, &c.add(&p, &q), &t).unwrap(),
            canonical_height(&c, &c.add(&p, &c.negate(&q)), &t).unwrap(),
            canonical_height(&c, &p, &t).unwrap(),
            canonical_height(&c, &q, &t).unwrap(),
        ];
        let resid = hs[0].value.to_f64() + hs[1].value.to_f64()
            - 2.0 * hs[2].value.to_f64()
            - 2.0 * hs[3].value.to_f64();
        assert!(resid.abs() <= 6e-6, "residual {resid}");
    }

    #[test]
    fn cauchy_schwarz_reports() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let q = parse_point("1,0").unwrap();
        let t = tol();
        let general = cauchy_schwarz_ht(&c, &p, &q, &t).unwrap();
        assert!(general.holds);
        let collinear = cauchy_schwarz_ht(&c, &p, &c.double(&p), &t).unwrap();
        assert!(collinear.holds);
        let gap = (collinear.lhs.to_f64() - collinear.rhs.to_f64()).abs();
        assert!(gap <= collinear.error_bound.to_f64() + 1e-5, "gap {gap}");
        let with_id = cauchy_schwarz_ht(&c, &p, &Point::Identity, &t).unwrap();
        assert!(with_id.holds);
        assert!(with_id.lhs.to_f64().abs() <= with_id.error_bound.to_f64() + 1e-9);
        assert!(with_id.rhs.is_zero());
    }

    #[test]
    fn tiny_budget_still_returns_an_honest_estimate() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let h = canonical_height_with(&c, &p, &tol(), 12, 2048).unwrap();
        assert!(h.doublings_used < 12);
        assert!(!h.error_bound.is_zero());
        let err = h.error_bound.to_f64().max(1e-3);
        assert!((h.value.to_f64() - 0.0255557).abs() <= err + 1e-3);
    }

    #[test]
    fn pairing_matrix_is_symmetric_with_quadratic_diagonal() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let p2 = c.double(&p);
        let (vals, errs) = pairing_matrix(&c, &[p.clone(), p2], &tol()).unwrap();
        assert_eq!(vals.len(), 2);
        let h = canonical_height(&c, &p, &tol()).unwrap().value.to_f64();
        assert!((vals[0][0].to_f64() - 2.0 * h).abs() < 1e-4);
        assert!((vals[0][1].to_f64() - vals[1][0].to_f64()).abs() < 1e-12);
        assert!((vals[0][1].to_f64() - 4.0 * h).abs() < 1e-4);
        assert!((vals[1][1].to_f64() - 8.0 * h).abs() < 1e-3);
        assert!(errs[0][1].to_f64() > 0.0);
    }

    #[test]
    fn frobenius_form_passes_the_audit() {
        let mut w = IntegerPairForm::frobenius(2, 5);
        let report = qform_audit(&mut w).unwrap();
        assert_eq!(report.elements_checked, 3);
        assert!(report.bilinear_triples > 0);
        assert!(report.combos_checked > 100);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn neron_tate_form_passes_the_audit() {
        let c = curve_37a1();
        let p = parse_point("0,0").unwrap();
        let pts = vec![
            Point::Identity,
            p.clone(),
            c.double(&p),
            c.negate(&p),
        ];
        let mut w = NeronTateForm::new(&c, pts, HPReal::from_f64(1e-4, 96));
        let report = qform_audit(&mut w).unwrap();
        assert_eq!(report.elements_checked, 4);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn planted_indefinite_form_fails_at_the_smallest_witness() {
        let mut w = IntegerPairForm::new(1, 10, 1);
        let err = qform_audit(&mut w).unwrap_err();
        match err {
            HeightError::AuditFailure { law, witness } => {
                assert_eq!(law, "combination positivity");
                assert_eq!(witness, "(m, n) = (1, -1)");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
