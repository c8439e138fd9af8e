//! Global L-series of a rational Weierstrass model: Dirichlet coefficients
//! assembled from local counts, an Euler product evaluator on its region of
//! absolute convergence, and an entire completed series computed through a
//! two-sided incomplete gamma expansion that converges everywhere.
//!
//! The completed series is evaluated as
//!
//! ```text
//! Lambda(u) = sum_n a_n [ c_n^{-u} Gamma(u, c_n t) + w c_n^{u-2} Gamma(2-u, c_n/t) ]
//! ```
//!
//! with `c_n = 2 pi n / sqrt(N)`. The deformation parameter `t > 0` drops out
//! of the exact sum; evaluating at two values of `t` and asking which sign
//! `w = +-1` keeps the total stable is what pins the sign down numerically.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use crate::numerics::{
    ln, pi, upper_incomplete_gamma, HPComplex, HPReal, NumericsError, PrecisionConfig,
};
use crate::par;
use crate::pointcount::{count_points, is_prime_u64, CountError, CountOptions};
use crate::reduction::{conductor, ConductorData, Overrides, ReductionError};
use crate::weierstrass::{format_curve, reduce_mod_p, CurveError, Equation, Rationals};

#[derive(Debug, Clone, thiserror::Error)]
pub enum LSeriesError {
    /// The Euler product is only evaluated where it converges absolutely
    /// with a usable tail bound.
    #[error("Euler product needs Re s >= 1.6, got {0}")]
    Region(f64),
    /// The coefficient cache is shorter than the truncation point the
    /// requested evaluation needs.
    #[error("coefficient cache too short; extend to n = {0} first")]
    NeedMoreCoeffs(usize),
    /// Neither sign choice stayed stable under the t-deformation at any of
    /// the probe points.
    #[error("sign of the functional equation did not separate")]
    IndeterminateSign,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// One point evaluation together with a rigorous radius: the true value lies
/// within `error_bound` of `value` in absolute value.
#[derive(Debug, Clone)]
pub struct XiValue {
    pub s: HPComplex,
    pub value: HPComplex,
    pub error_bound: HPReal,
}

/// Everything needed to evaluate the series attached to one curve: the
/// conductor with its local data, the functional equation sign, and a
/// growable cache of Dirichlet coefficients.
pub struct LSeriesContext {
    curve: String,
    eq: Equation<Rationals>,
    cond: ConductorData,
    sign: i8,
    /// `coeffs[n - 1]` holds `a_n`.
    coeffs: Vec<i64>,
    ap_cache: BTreeMap<u64, i64>,
    pub cfg: PrecisionConfig,
    copts: CountOptions,
}

struct TwoSided {
    a: HPComplex,
    b: HPComplex,
    err: HPReal,
}

impl LSeriesContext {
    /// Computes the conductor, seeds the bad-prime traces, and determines
    /// the functional equation sign. Fails on non-integral models, on bad
    /// primes below 5 without overrides, and when the sign does not separate.
    pub fn build(
        eq: Equation<Rationals>,
        overrides: &Overrides,
        cfg: PrecisionConfig,
        copts: CountOptions,
    ) -> Result<Self, LSeriesError> {
        Self::build_seeded(eq, overrides, cfg, copts, &[])
    }

    /// [`Self::build`] with traces carried over from an earlier run, seeded
    /// before the sign probe so nothing already known is recounted.
    pub fn build_seeded(
        eq: Equation<Rationals>,
        overrides: &Overrides,
        cfg: PrecisionConfig,
        copts: CountOptions,
        known: &[(u64, i64)],
    ) -> Result<Self, LSeriesError> {
        let cond = conductor(&eq, overrides, &copts)?;
        let mut ap_cache = BTreeMap::new();
        for (&p, ty) in &cond.types {
            ap_cache.insert(p, ty.ap());
        }
        let mut ctx = Self {
            curve: format_curve(&eq),
            eq,
            cond,
            sign: 0,
            coeffs: Vec::new(),
            ap_cache,
            cfg,
            copts,
        };
        ctx.seed_aps(known);
        ctx.sign = ctx.determine_sign()?;
        Ok(ctx)
    }

    pub fn curve_id(&self) -> &str {
        &self.curve
    }

    pub fn equation(&self) -> &Equation<Rationals> {
        &self.eq
    }

    pub fn conductor(&self) -> u64 {
        self.cond.n
    }

    pub fn conductor_data(&self) -> &ConductorData {
        &self.cond
    }

    /// Sign of the functional equation, +1 or -1.
    pub fn root_number(&self) -> i8 {
        self.sign
    }

    /// Coefficients cached so far, `a_1` first.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Trace of Frobenius at a prime, counting on demand. Bad primes come
    /// from the conductor data and cost nothing.
    pub fn ap(&mut self, p: u64) -> Result<i64, LSeriesError> {
        if let Some(&a) = self.ap_cache.get(&p) {
            return Ok(a);
        }
        if !is_prime_u64(p) {
            return Err(CountError::Precond(format!("{p} is not prime")).into());
        }
        let red = reduce_mod_p(&self.eq, p)?;
        let a = count_points(&red, p, &self.copts)?.a;
        self.ap_cache.insert(p, a);
        Ok(a)
    }

    /// Snapshot of every prime trace computed so far, sorted by prime.
    pub fn ap_entries(&self) -> Vec<(u64, i64)> {
        self.ap_cache.iter().map(|(&p, &a)| (p, a)).collect()
    }

    /// Seeds traces computed in an earlier run. Entries violating the Hasse
    /// bound are dropped; bad-prime traces from the conductor data win.
    pub fn seed_aps(&mut self, entries: &[(u64, i64)]) {
        for &(p, a) in entries {
            if (a as i128) * (a as i128) <= 4 * p as i128 {
                self.ap_cache.entry(p).or_insert(a);
            }
        }
    }

    /// Extends the coefficient cache to cover `a_1 .. a_n_max`. Prime traces
    /// are counted (in parallel when enabled), prime powers follow the
    /// recursion `a_{p^{k+1}} = a_p a_{p^k} - p a_{p^{k-1}}` with the `p`
    /// term dropped at primes dividing the conductor, and everything else
    /// fills in multiplicatively.
    pub fn ensure_coeffs(&mut self, n_max: usize) -> Result<(), LSeriesError> {
        self.fill_coeffs(n_max, true)
    }

    /// Sequential twin of [`Self::ensure_coeffs`] for benchmark comparison.
    pub fn ensure_coeffs_seq(&mut self, n_max: usize) -> Result<(), LSeriesError> {
        self.fill_coeffs(n_max, false)
    }

    fn fill_coeffs(&mut self, n_max: usize, parallel: bool) -> Result<(), LSeriesError> {
        if self.coeffs.len() >= n_max {
            return Ok(());
        }
        let mut spf = vec![0usize; n_max + 1];
        for i in 2..=n_max {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n_max {
                    if spf[j] == 0 {
                        spf[j] = i;
                    }
                    j += i;
                }
            }
        }
        let missing: Vec<u64> = (2..=n_max)
            .filter(|&n| spf[n] == n && !self.ap_cache.contains_key(&(n as u64)))
            .map(|n| n as u64)
            .collect();
        let eq = &self.eq;
        let copts = self.copts;
        let worker = |p: u64| -> Result<(u64, i64), LSeriesError> {
            let red = reduce_mod_p(eq, p)?;
            Ok((p, count_points(&red, p, &copts)?.a))
        };
        let counted = if parallel {
            par::map_vec(missing, worker)
        } else {
            par::map_vec_seq(missing, worker)
        };
        for item in counted {
            let (p, a) = item?;
            self.ap_cache.insert(p, a);
        }

        let n_big = self.cond.n;
        let mut c = vec![0i64; n_max + 1];
        c[1] = 1;
        for n in 2..=n_max {
            let p = spf[n];
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            if m > 1 {
                c[n] = c[m] * c[n / m];
                continue;
            }
            let ap = self.ap_cache[&(p as u64)];
            if n == p {
                c[n] = ap;
            } else if n_big % p as u64 == 0 {
                c[n] = ap * c[n / p];
            } else {
                c[n] = ap * c[n / p] - (p as i64) * c[n / (p * p)];
            }
        }
        self.coeffs = c[1..].to_vec();
        Ok(())
    }

    /// Truncation point a `completed_lambda` call at `u` will use.
    pub fn lambda_plan(&self, u: &HPComplex) -> usize {
        plan_cut(self.cond.n, u, 1.0, self.target_log2()).0
    }

    /// Truncation point an `xi` call at `s` will use.
    pub fn xi_plan(&self, s: &HPComplex) -> usize {
        let u = shift_half(s, self.cfg.working());
        self.lambda_plan(&u)
    }

    /// The completed series at `u`, using the cached coefficients as they
    /// stand. Fails with `NeedMoreCoeffs` when the cache cannot cover the
    /// truncation point; `lambda_auto` extends and retries instead.
    pub fn completed_lambda(&self, u: &HPComplex) -> Result<XiValue, LSeriesError> {
        let ts = self.two_sided(u, 1.0)?;
        Ok(self.combine(u, ts))
    }

    pub fn lambda_auto(&mut self, u: &HPComplex) -> Result<XiValue, LSeriesError> {
        match self.completed_lambda(u) {
            Err(LSeriesError::NeedMoreCoeffs(n)) => {
                self.ensure_coeffs(n)?;
                self.completed_lambda(u)
            }
            other => other,
        }
    }

    /// The entire normalization `N^{-1/4} sqrt(2 pi) Lambda(s + 1/2)`, real
    /// on the real axis and symmetric about `s = 1/2`.
    pub fn xi(&self, s: &HPComplex) -> Result<XiValue, LSeriesError> {
        let work = self.cfg.working();
        let u = shift_half(s, work);
        let lam = self.completed_lambda(&u)?;
        Ok(self.scale_to_xi(s, lam))
    }

    pub fn xi_auto(&mut self, s: &HPComplex) -> Result<XiValue, LSeriesError> {
        let work = self.cfg.working();
        let u = shift_half(s, work);
        let lam = self.lambda_auto(&u)?;
        Ok(self.scale_to_xi(s, lam))
    }

    /// [`Self::lambda_auto`] with the cut between the two incomplete gamma
    /// sums moved off center: the first sum integrates from `t`, the second
    /// from `1/t`. Any `t` (clamped into [1/4, 4]) yields the same value
    /// within the reported bound. At `t = 1` the reflection `u <-> 2 - u`
    /// swaps the two sums verbatim, so symmetry checks that want the two
    /// sides to go through genuinely different arithmetic must skew the cut.
    pub fn lambda_skewed(&mut self, u: &HPComplex, t: f64) -> Result<XiValue, LSeriesError> {
        let t = t.clamp(0.25, 4.0);
        let need = plan_cut(self.cond.n, u, t, self.target_log2()).0;
        self.ensure_coeffs(need)?;
        let ts = self.two_sided(u, t)?;
        Ok(self.combine(u, ts))
    }

    /// [`Self::xi_auto`] through a skewed cut; see [`Self::lambda_skewed`].
    pub fn xi_skewed(&mut self, s: &HPComplex, t: f64) -> Result<XiValue, LSeriesError> {
        let work = self.cfg.working();
        let u = shift_half(s, work);
        let lam = self.lambda_skewed(&u, t)?;
        Ok(self.scale_to_xi(s, lam))
    }

    /// Truncated Euler product over primes up to `p_max`, restricted to
    /// Re s >= 1.6 where the tail admits a clean bound. `p_max` must be at
    /// least 11 so the leading tail term is small enough to sum.
    pub fn euler_product(
        &mut self,
        s: &HPComplex,
        p_max: u64,
    ) -> Result<XiValue, LSeriesError> {
        let sigma = s.re.to_f64();
        if !(sigma >= 1.6) {
            return Err(LSeriesError::Region(sigma));
        }
        assert!(p_max >= 11, "p_max below the tail bound's validity floor");
        self.ensure_coeffs(p_max as usize)?;
        let work = self.cfg.working();
        let sw = s.with_precision(work);
        let n_big = self.cond.n;
        let mut acc = HPComplex::one(work);
        let mut factors = 0u32;
        for (&p, &ap) in self.ap_cache.range(..=p_max) {
            let lp = ln(&HPReal::from_u64(p, work));
            let p_ms = sw.mul_real(&lp).neg().exp();
            let ap_term = p_ms.mul_real(&HPReal::from_i64(ap, work));
            let mut factor = HPComplex::one(work).sub(&ap_term);
            if n_big % p != 0 {
                let p1_2s = p_ms.mul(&p_ms).mul_real(&HPReal::from_u64(p, work));
                factor = factor.add(&p1_2s);
            }
            acc = acc.mul(&factor.recip());
            factors += 1;
        }
        // Discarded primes contribute at most exp(tail_log) - 1 relatively:
        // each log-factor is bounded by 1.1 (2 p^{1/2 - sigma} + p^{1 - 2 sigma})
        // and the sum over p > p_max is bounded by the integral over reals.
        let pm = p_max as f64;
        let tail_log = 2.2 * pm.powf(1.5 - sigma) / (sigma - 1.5)
            + 1.1 * pm.powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0);
        let rel = if tail_log < 69.0 { tail_log.exp_m1() } else { 1e30 };
        let mag = acc.abs().with_precision(64);
        let tail_err = mag.mul(&HPReal::from_f64(rel * 1.001, 64));
        let rounding = mag.mul(&HPReal::from_u64(u64::from(factors) + 1, 64))
            .scale2(-(work as i64) + 8);
        Ok(XiValue {
            s: s.clone(),
            value: acc,
            error_bound: tail_err.add(&rounding),
        })
    }

    fn target_log2(&self) -> f64 {
        2.0 - (self.cfg.bits as f64 + self.cfg.guard_bits as f64)
    }

    fn combine(&self, u: &HPComplex, ts: TwoSided) -> XiValue {
        let value = if self.sign >= 0 {
            ts.a.add(&ts.b)
        } else {
            ts.a.sub(&ts.b)
        };
        XiValue { s: u.clone(), value, error_bound: ts.err }
    }

    fn scale_to_xi(&self, s: &HPComplex, lam: XiValue) -> XiValue {
        let work = self.cfg.working();
        let root_n = HPReal::from_u64(self.cond.n, work).sqrt();
        let pref = pi(work).scale2(1).sqrt().div(&root_n.sqrt());
        XiValue {
            s: s.clone(),
            value: lam.value.mul_real(&pref),
            error_bound: lam.error_bound.mul(&pref.with_precision(64)),
        }
    }

    /// Both halves of the deformed expansion at `(u, t)`, with an error
    /// radius covering tail truncation and accumulated rounding that is
    /// valid for `a + w b` under either sign.
    fn two_sided(&self, u: &HPComplex, t: f64) -> Result<TwoSided, LSeriesError> {
        let (n_cut, tail_log2) = plan_cut(self.cond.n, u, t, self.target_log2());
        self.two_sided_with_cut(u, t, n_cut, tail_log2)
    }

    fn two_sided_with_cut(
        &self,
        u: &HPComplex,
        t: f64,
        n_cut: usize,
        tail_log2: f64,
    ) -> Result<TwoSided, LSeriesError> {
        let work = self.cfg.working();
        if n_cut > self.coeffs.len() {
            return Err(LSeriesError::NeedMoreCoeffs(n_cut));
        }
        let uw = u.with_precision(work);
        let u2 = HPComplex::from_f64(2.0, 0.0, work).sub(&uw);
        let c1 = pi(work).scale2(1).div(&HPReal::from_u64(self.cond.n, work).sqrt());
        let tr = HPReal::from_f64(t, work);
        // Terms shrink like e^{-c_1 tau n}, so only their leading bits reach
        // the accumulator. Evaluating term n at a tapered precision keeps the
        // per-term contribution error at the 2^{16-work} scale the rounding
        // budget already covers, while the gamma evaluations get much cheaper
        // deep in the sum.
        let c1f = 2.0 * std::f64::consts::PI / (self.cond.n as f64).sqrt();
        let rate_log2 = c1f * t.min(1.0 / t) / LN_2;
        let mut a_sum = HPComplex::zero(work);
        let mut b_sum = HPComplex::zero(work);
        let mut abs_sum = HPReal::zero(work);
        for n in 1..=n_cut {
            let an = self.coeffs[n - 1];
            if an == 0 {
                continue;
            }
            let drop = (n as f64 - 1.0) * rate_log2;
            let pn = ((work as f64 + 16.0 - drop).ceil() as i64).clamp(64, work as i64) as u32;
            let un = uw.with_precision(pn);
            let u2n = u2.with_precision(pn);
            let nr = HPReal::from_u64(n as u64, pn);
            let cn = c1.with_precision(pn).mul(&nr);
            let ln_cn = ln(&cn);
            let tn = tr.with_precision(pn);
            let term_a = un
                .mul_real(&ln_cn)
                .neg()
                .exp()
                .mul(&upper_incomplete_gamma(&un, &cn.mul(&tn))?);
            let term_b = u2n
                .mul_real(&ln_cn)
                .neg()
                .exp()
                .mul(&upper_incomplete_gamma(&u2n, &cn.div(&tn))?);
            let anr = HPReal::from_i64(an, pn);
            a_sum = a_sum.add(&term_a.mul_real(&anr));
            b_sum = b_sum.add(&term_b.mul_real(&anr));
            abs_sum = abs_sum.add(&anr.abs().mul(&term_a.abs().add(&term_b.abs())));
        }
        let tail = HPReal::exp2(tail_log2.ceil() as i64, 64);
        let rounding = abs_sum.with_precision(64).scale2(-(work as i64) + 8);
        Ok(TwoSided { a: a_sum, b: b_sum, err: tail.add(&rounding) })
    }

    /// Runs the sign probe: at a test point, the combination `a + w b` with
    /// the true sign is invariant under changing `t`, while the wrong sign
    /// shifts by twice the `b`-side variation. Exactly one candidate must
    /// survive; otherwise try the next probe point.
    fn determine_sign(&mut self) -> Result<i8, LSeriesError> {
        let probes = [(0.8, 0.3, 1.1), (1.2, 0.7, 1.25), (0.6, -0.45, 1.15)];
        for (re, im, t2) in probes {
            let u = HPComplex::from_f64(re, im, self.cfg.working());
            let need = plan_cut(self.cond.n, &u, 1.0, self.target_log2())
                .0
                .max(plan_cut(self.cond.n, &u, t2, self.target_log2()).0);
            self.ensure_coeffs(need)?;
            let s1 = self.two_sided(&u, 1.0)?;
            let s2 = self.two_sided(&u, t2)?;
            let tol = s1.err.add(&s2.err).scale2(2);
            let d_plus = s1.a.add(&s1.b).sub(&s2.a.add(&s2.b)).abs();
            let d_minus = s1.a.sub(&s1.b).sub(&s2.a.sub(&s2.b)).abs();
            match (d_plus < tol, d_minus < tol) {
                (true, false) => return Ok(1),
                (false, true) => return Ok(-1),
                _ => continue,
            }
        }
        Err(LSeriesError::IndeterminateSign)
    }
}

fn shift_half(s: &HPComplex, work: u32) -> HPComplex {
    s.with_precision(work)
        .add(&HPComplex::from_real(HPReal::exp2(-1, work)))
}

/// Truncation planning in plain doubles. Per-term bound: `|a_n| <= 2n`, and
/// `|Gamma(s, x)| <= 2 x^{Re s - 1} e^{-x}` once `x` clears `2|Re s| + 4`.
/// Folding in the power prefactors, the `n`-dependence cancels and each term
/// of either side is at most `(4 t^{sigma - 1} / c_1) e^{-c_1 tau n}` with
/// `tau = min(t, 1/t)`, a clean geometric envelope.
fn plan_cut(n_cond: u64, u: &HPComplex, t: f64, target_log2: f64) -> (usize, f64) {
    let sigma = u.re.to_f64();
    let c1 = 2.0 * std::f64::consts::PI / (n_cond as f64).sqrt();
    let tau = t.min(1.0 / t);
    let rate = c1 * tau;
    let k = 3.0 * LN_2 + (sigma - 1.0) * t.ln() - c1.ln();
    let target_ln = target_log2 * LN_2 - 4.0 * LN_2;
    let x_min = 2.0 * sigma.abs().max((2.0 - sigma).abs()).max(1.0) + 4.0;
    let from_decay = ((k - target_ln) / rate).ceil().max(1.0);
    let from_validity = (x_min / rate).ceil();
    let n0 = from_decay.max(from_validity) as usize;
    let rho = (-rate).exp();
    let tail_ln = k - rate * ((n0 + 1) as f64) - (-rho).ln_1p();
    (n0, tail_ln / LN_2)
}

/// Extends the cache and returns `a_1 .. a_n_max`.
pub fn dirichlet_coeffs(
    ctx: &mut LSeriesContext,
    n_max: usize,
) -> Result<&[i64], LSeriesError> {
    ctx.ensure_coeffs(n_max)?;
    Ok(&ctx.coeffs[..n_max])
}

/// Sequential twin of [`dirichlet_coeffs`] for benchmark comparison.
pub fn dirichlet_coeffs_seq(
    ctx: &mut LSeriesContext,
    n_max: usize,
) -> Result<&[i64], LSeriesError> {
    ctx.ensure_coeffs_seq(n_max)?;
    Ok(&ctx.coeffs[..n_max])
}

/// See [`LSeriesContext::euler_product`].
pub fn euler_product(
    ctx: &mut LSeriesContext,
    s: &HPComplex,
    p_max: u64,
) -> Result<XiValue, LSeriesError> {
    ctx.euler_product(s, p_max)
}

/// See [`LSeriesContext::completed_lambda`]; this form does not grow the
/// coefficient cache.
pub fn completed_lambda(ctx: &LSeriesContext, u: &HPComplex) -> Result<XiValue, LSeriesError> {
    ctx.completed_lambda(u)
}

/// Sign of the functional equation as settled at construction.
pub fn root_number(ctx: &LSeriesContext) -> i8 {
    ctx.root_number()
}

/// See [`LSeriesContext::xi`].
pub fn xi(ctx: &LSeriesContext, s: &HPComplex) -> Result<XiValue, LSeriesError> {
    ctx.xi(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_11() -> Equation<Rationals> {
        Equation::from_i64(&Rationals, [0, -1, 1, -10, -20])
    }

    fn curve_37() -> Equation<Rationals> {
        Equation::from_i64(&Rationals, [0, 0, 1, -1, 0])
    }

    fn ctx_for(eq: Equation<Rationals>, bits: u32) -> LSeriesContext {
        LSeriesContext::build(
            eq,
            &Overrides::default(),
            PrecisionConfig::new(bits, 32),
            CountOptions::default(),
        )
        .unwrap()
    }

    fn divisor_count(n: u64) -> u64 {
        (1..=n).filter(|d| n % d == 0).count() as u64
    }

    #[test]
    fn coefficients_match_frozen_expansions() {
        let mut c11 = ctx_for(curve_11(), 64);
        let got = dirichlet_coeffs(&mut c11, 20).unwrap().to_vec();
        let want = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2];
        assert_eq!(got, want);

        let mut c37 = ctx_for(curve_37(), 64);
        let got = dirichlet_coeffs(&mut c37, 20).unwrap().to_vec();
        let want = [1, -2, -3, 2, -2, 6, -1, 0, 6, 4, -5, -6, -2, 2, 6, -4, 0, -12, 0, -4];
        assert_eq!(got, want);
    }

    #[test]
    fn coefficient_growth_stays_below_divisor_bound() {
        let mut ctx = ctx_for(curve_37(), 64);
        let c = dirichlet_coeffs(&mut ctx, 200).unwrap().to_vec();
        for (i, &a) in c.iter().enumerate() {
            let n = (i + 1) as u64;
            let d = divisor_count(n);
            // |a_n| <= d(n) sqrt(n), compared as a_n^2 <= d(n)^2 n exactly.
            assert!(
                (a as i128) * (a as i128) <= (d * d * n) as i128,
                "a_{n} = {a} breaks the divisor bound"
            );
        }
    }

    #[test]
    fn bad_prime_powers_skip_the_p_term() {
        let mut c11 = ctx_for(curve_11(), 64);
        let c = dirichlet_coeffs(&mut c11, 121).unwrap();
        assert_eq!(c[10], 1);
        assert_eq!(c[120], 1);
        let mut c37 = ctx_for(curve_37(), 64);
        let c = dirichlet_coeffs(&mut c37, 74).unwrap();
        assert_eq!(c[36], -1);
        assert_eq!(c[73], 2);
    }

    #[test]
    fn signs_separate_correctly() {
        assert_eq!(ctx_for(curve_11(), 128).root_number(), 1);
        assert_eq!(ctx_for(curve_37(), 128).root_number(), -1);
    }

    #[test]
    fn completed_series_vanishes_at_center_only_for_odd_sign() {
        let mut c37 = ctx_for(curve_37(), 128);
        let u = HPComplex::one(c37.cfg.working());
        let v = c37.lambda_auto(&u).unwrap();
        assert!(v.value.abs() < v.error_bound.scale2(2));

        let mut c11 = ctx_for(curve_11(), 128);
        let v = c11.lambda_auto(&u).unwrap();
        assert!(v.value.abs() > HPReal::exp2(-6, 64));
    }

    #[test]
    fn real_input_gives_real_output() {
        let mut ctx = ctx_for(curve_11(), 128);
        let u = HPComplex::from_f64(1.3, 0.0, ctx.cfg.working());
        let v = ctx.lambda_auto(&u).unwrap();
        assert!(v.value.im.abs() < v.error_bound.scale2(2));
        assert!(v.value.re.is_positive());
    }

    #[test]
    fn reflection_residual_sits_inside_error_bounds() {
        for (eq, w) in [(curve_11(), 1i8), (curve_37(), -1i8)] {
            let mut ctx = ctx_for(eq, 128);
            assert_eq!(ctx.root_number(), w);
            let work = ctx.cfg.working();
            let two = HPComplex::from_f64(2.0, 0.0, work);
            for (re, im) in [(1.0, 0.5), (0.7, -1.0), (1.6, 0.2)] {
                let u = HPComplex::from_f64(re, im, work);
                // The reflected point must be formed in working precision;
                // rounding it through f64 would dwarf the error budget.
                let refl = two.sub(&u);
                let lu = ctx.lambda_auto(&u).unwrap();
                let lr = ctx.lambda_auto(&refl).unwrap();
                let want = if w == 1 { lu.value.clone() } else { lu.value.neg() };
                let resid = lr.value.sub(&want).abs();
                let budget = lu.error_bound.add(&lr.error_bound).scale2(1);
                assert!(resid < budget, "residual {resid:?} at ({re}, {im})");
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let mut ctx = ctx_for(curve_37(), 128);
        let work = ctx.cfg.working();
        let u = HPComplex::from_f64(0.9, 0.6, work);
        let lu = ctx.lambda_auto(&u).unwrap();
        let lc = ctx.lambda_auto(&u.conj()).unwrap();
        let resid = lc.value.sub(&lu.value.conj()).abs();
        assert!(resid < lu.error_bound.add(&lc.error_bound).scale2(1));
    }

    #[test]
    fn xi_is_symmetric_and_real_on_the_real_axis() {
        let mut ctx = ctx_for(curve_11(), 128);
        let work = ctx.cfg.working();
        let s = HPComplex::from_f64(0.3, 0.4, work);
        let s_refl = HPComplex::one(work).sub(&s);
        let a = ctx.xi_auto(&s).unwrap();
        let b = ctx.xi_auto(&s_refl).unwrap();
        // w = +1: xi(1 - s) = xi(s).
        let resid = b.value.sub(&a.value).abs();
        assert!(resid < a.error_bound.add(&b.error_bound).scale2(1));

        let real_s = HPComplex::from_f64(1.0, 0.0, work);
        let v = ctx.xi_auto(&real_s).unwrap();
        assert!(v.value.im.abs() < v.error_bound.scale2(2));
        assert!(v.value.re.is_positive());
    }

    #[test]
    fn euler_region_is_enforced() {
        let mut ctx = ctx_for(curve_11(), 96);
        let s = HPComplex::from_f64(1.2, 0.0, ctx.cfg.working());
        match ctx.euler_product(&s, 100) {
            Err(LSeriesError::Region(sigma)) => assert!((sigma - 1.2).abs() < 1e-12),
            other => panic!("expected region error, got {other:?}"),
        }
    }

    #[test]
    fn euler_product_matches_dirichlet_sum() {
        let mut ctx = ctx_for(curve_11(), 128);
        let work = ctx.cfg.working();
        let s = HPComplex::from_f64(2.0, 0.0, work);
        let ep = ctx.euler_product(&s, 4096).unwrap();

        let coeffs = dirichlet_coeffs(&mut ctx, 4096).unwrap().to_vec();
        let mut direct = HPReal::zero(work);
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let n = (i + 1) as u64;
            let term = HPReal::from_i64(a, work).div(&HPReal::from_u64(n * n, work));
            direct = direct.add(&term);
        }
        // Partial-sum tail: sum_{n > N} d(n) n^{-3/2} <= 2 (ln N + 3.7) / sqrt(N).
        let nf = 4096.0f64;
        let dir_tail = HPReal::from_f64(2.0 * (nf.ln() + 3.7) / nf.sqrt(), 64);
        let diff = ep.value.sub(&HPComplex::from_real(direct)).abs();
        assert!(diff < ep.error_bound.add(&dir_tail));
        assert!(diff < HPReal::from_f64(0.01, 64));
    }

    #[test]
    fn euler_tail_shrinks_with_more_primes() {
        let mut ctx = ctx_for(curve_37(), 96);
        let s = HPComplex::from_f64(2.0, 0.0, ctx.cfg.working());
        let coarse = ctx.euler_product(&s, 256).unwrap();
        let fine = ctx.euler_product(&s, 4096).unwrap();
        assert!(fine.error_bound < coarse.error_bound);
        let drift = coarse.value.sub(&fine.value).abs();
        assert!(drift < coarse.error_bound.add(&fine.error_bound));
    }

    #[test]
    fn strict_evaluation_demands_coefficients_up_front() {
        let mut ctx = ctx_for(curve_11(), 96);
        ctx.cfg = PrecisionConfig::new(256, 32);
        let u = HPComplex::one(ctx.cfg.working());
        let have = ctx.coeffs().len();
        match ctx.completed_lambda(&u) {
            Err(LSeriesError::NeedMoreCoeffs(n)) => assert!(n > have),
            other => panic!("expected a short-cache error, got {other:?}"),
        }
        ctx.lambda_auto(&u).unwrap();
        ctx.completed_lambda(&u).unwrap();
    }

    #[test]
    fn doubling_the_cut_stays_inside_the_reported_bound() {
        let mut ctx = ctx_for(curve_37(), 128);
        let work = ctx.cfg.working();
        let u = HPComplex::from_f64(1.1, 0.4, work);
        let cut = ctx.lambda_plan(&u);
        ctx.ensure_coeffs(2 * cut).unwrap();
        let base = ctx.completed_lambda(&u).unwrap();
        let wide_ts = ctx.two_sided_with_cut(&u, 1.0, 2 * cut, -4000.0).unwrap();
        let wide = ctx.combine(&u, wide_ts);
        let moved = base.value.sub(&wide.value).abs();
        assert!(moved < base.error_bound, "moved {moved:?} vs {:?}", base.error_bound);
    }

    #[test]
    fn planning_grows_with_precision_and_conductor() {
        let c11 = ctx_for(curve_11(), 128);
        let c37 = ctx_for(curve_37(), 128);
        let u = HPComplex::one(128);
        assert!(c37.lambda_plan(&u) > c11.lambda_plan(&u));
        let mut deep = ctx_for(curve_11(), 128);
        deep.cfg = PrecisionConfig::new(256, 32);
        assert!(deep.lambda_plan(&u) > c11.lambda_plan(&u));
    }

    #[test]
    fn skewed_cut_agrees_with_the_symmetric_one() {
        let mut ctx = ctx_for(curve_11(), 96);
        let u = HPComplex::from_f64(0.9, 0.4, ctx.cfg.working());
        let sym = ctx.lambda_auto(&u).unwrap();
        for t in [0.7, 1.3] {
            let skew = ctx.lambda_skewed(&u, t).unwrap();
            let diff = sym.value.sub(&skew.value).abs();
            let budget = sym.error_bound.add(&skew.error_bound);
            assert!(
                diff.cmp_value(&budget) != std::cmp::Ordering::Greater,
                "t = {t}: {} vs {}",
                diff.to_f64(),
                budget.to_f64()
            );
        }
    }
}
