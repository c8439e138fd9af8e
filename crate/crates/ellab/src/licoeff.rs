//! Power-sum coefficients of the completed series pulled back to the unit
//! disk. With `phi(z) = xi(1/(1 - z))`, the logarithmic derivative expands
//! as `phi'(z)/phi(z) = sum_n lambda(n+1) z^n`, and nonnegativity of the
//! `lambda(n)` is equivalent to all zeros of `xi` sitting on the boundary
//! circle. Coefficients are extracted by sampling `phi` on a circle of
//! radius `r` and reading Taylor coefficients off a DFT, then dividing the
//! derivative series by the series itself.
//!
//! Error estimates are empirical by design: each entry carries the larger
//! of a radius-variation check (`r = 0.4` against `r = 0.5`) and a
//! sample-doubling check (`M` against `2M` points), plus the imaginary
//! residue that a real-coefficient series should not have.

use crate::lfunction::{LSeriesContext, LSeriesError};
use crate::numerics::{dft, pi, pow_int, sin_cos, HPComplex, HPReal, NumericsError, PrecisionConfig};
use crate::par;

#[derive(Debug, Clone, thiserror::Error)]
pub enum LiError {
    #[error("sampling plan rejected: {0}")]
    BadPlan(String),
    /// The tail of the Taylor series beyond the sample resolution would
    /// contaminate the requested coefficients above the precision target.
    #[error("aliasing bound 2^{bound_log2:.0} exceeds the 2^{budget_log2:.0} budget; raise the sample count")]
    AliasingBudgetExceeded { bound_log2: f64, budget_log2: f64 },
    /// `|c_0|` sits within four times its own error estimate, so dividing
    /// the series by it would be meaningless.
    #[error("central value too small to normalize against: |c_0| = {0}")]
    CentralValueTooSmall(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    LSeries(#[from] LSeriesError),
}

/// Where and how densely the disk function is sampled.
#[derive(Debug, Clone)]
pub struct DiskSamplingPlan {
    pub radius: f64,
    /// Number of circle samples; a power of two so extraction uses the
    /// fast transform path.
    pub m: usize,
    pub cfg: PrecisionConfig,
}

impl DiskSamplingPlan {
    pub fn new(radius: f64, m: usize, cfg: PrecisionConfig) -> Result<Self, LiError> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(LiError::BadPlan(format!("radius {radius} outside (0, 1)")));
        }
        if m < 8 || !m.is_power_of_two() {
            return Err(LiError::BadPlan(format!("sample count {m} not a power of two >= 8")));
        }
        Ok(Self { radius, m, cfg })
    }

    /// Default plan for extracting `n_max` coefficients: radius 1/2 and
    /// `max(256, 8 n_max)` samples rounded up to a power of two.
    pub fn for_order(n_max: usize, cfg: PrecisionConfig) -> Self {
        let m = 256usize.max(8 * n_max).next_power_of_two();
        Self { radius: 0.5, m, cfg }
    }

    /// Highest Taylor order this plan can extract.
    pub fn max_order(&self) -> usize {
        self.m / 4
    }
}

/// Taylor coefficients of the disk function from one circle, with per-order
/// error estimates (sample error amplified by `r^{-k}` plus the uniform
/// aliasing term) and the largest sampled magnitude.
#[derive(Debug, Clone)]
pub struct TaylorCoeffs {
    pub coeffs: Vec<HPComplex>,
    pub errors: Vec<HPReal>,
    pub max_abs: HPReal,
}

/// The positivity/growth report for `lambda(1..n_max)`.
#[derive(Debug, Clone)]
pub struct LiReport {
    pub lambdas: Vec<HPReal>,
    pub error_estimates: Vec<HPReal>,
    pub all_nonnegative: bool,
    /// Least-squares `(slope, intercept)` of `lambda(n)/n` against `ln n`.
    pub growth_fit: (f64, f64),
}

/// Descriptive expansion of a report: per-row values, positions of negative
/// entries, and the fit with its residual norm.
#[derive(Debug, Clone)]
pub struct GrowthSummary {
    pub rows: Vec<GrowthRow>,
    pub negative_at: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct GrowthRow {
    pub n: usize,
    pub lambda: f64,
    pub per_n: f64,
    /// First difference `lambda(n) - lambda(n-1)`; zero at `n = 1`.
    pub delta: f64,
}

/// `z -> 1/(1 - z)`: sends 0 to 1, -1 to 1/2, and the unit circle minus
/// `z = 1` onto the critical line `Re s = 1/2`.
pub fn disk_map(z: &HPComplex) -> Result<HPComplex, LiError> {
    let one = HPComplex::one(z.precision());
    let den = one.sub(z);
    if den.is_zero() {
        return Err(NumericsError::Pole("disk map at z = 1".into()).into());
    }
    Ok(den.recip())
}

struct CircleSamples {
    values: Vec<HPComplex>,
    max_err: HPReal,
    max_abs: HPReal,
}

/// Evaluates the disk function on `size` equispaced points of radius `r`.
/// Conjugate symmetry halves the work: only the closed upper half is
/// evaluated, the rest is mirrored.
fn sample_circle(
    ctx: &mut LSeriesContext,
    radius: f64,
    size: usize,
) -> Result<CircleSamples, LiError> {
    let work = ctx.cfg.working();
    let half = size / 2;
    let mut need = 0usize;
    for j in 0..=half {
        let th = 2.0 * std::f64::consts::PI * j as f64 / size as f64;
        let (zr, zi) = (radius * th.cos(), radius * th.sin());
        let d2 = (1.0 - zr) * (1.0 - zr) + zi * zi;
        let s_probe = HPComplex::from_f64((1.0 - zr) / d2, zi / d2, 64);
        need = need.max(ctx.xi_plan(&s_probe));
    }
    ctx.ensure_coeffs(need)?;

    let shared: &LSeriesContext = ctx;
    let rw = HPReal::from_f64(radius, work);
    let evals = par::map_vec((0..=half).collect::<Vec<_>>(), |j| -> Result<_, LiError> {
        let theta = pi(work)
            .mul(&HPReal::from_u64(2 * j as u64, work))
            .div(&HPReal::from_u64(size as u64, work));
        let (sn, cs) = sin_cos(&theta);
        let z = HPComplex::new(cs.mul(&rw), sn.mul(&rw));
        let s = disk_map(&z)?;
        Ok(shared.xi(&s)?)
    });

    let mut values = vec![HPComplex::zero(work); size];
    let mut max_err = HPReal::zero(64);
    let mut max_abs = HPReal::zero(64);
    for (j, res) in evals.into_iter().enumerate() {
        let xiv = res?;
        max_err = HPReal::max_value(&max_err, &xiv.error_bound.with_precision(64));
        max_abs = HPReal::max_value(&max_abs, &xiv.value.abs().with_precision(64));
        if j > 0 && j < size - j {
            values[size - j] = xiv.value.conj();
        }
        values[j] = xiv.value;
    }
    Ok(CircleSamples { values, max_err, max_abs })
}

/// Taylor coefficients from one sampled circle: `c_k = r^{-k} F_k / size`
/// where `F` is the forward transform of the samples.
fn extract(
    samples: &CircleSamples,
    radius: f64,
    k_max: usize,
    bits: u32,
) -> Result<TaylorCoeffs, LiError> {
    let size = samples.values.len();
    let work = samples.values[0].precision();
    let max_abs_f = samples.max_abs.to_f64().max(f64::MIN_POSITIVE);
    let bound_log2 =
        max_abs_f.log2() + ((size - k_max) as f64) * radius.log2() - (1.0 - radius).log2();
    let budget_log2 = -(bits as f64);
    if bound_log2 > budget_log2 {
        return Err(LiError::AliasingBudgetExceeded { bound_log2, budget_log2 });
    }
    let alias = HPReal::exp2(bound_log2.ceil() as i64 + 1, 64);

    let spectrum = dft(&samples.values);
    let rw = HPReal::from_f64(radius, work);
    let size_r = HPReal::from_u64(size as u64, work);
    let mut coeffs = Vec::with_capacity(k_max + 1);
    let mut errors = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let amp = pow_int(&rw, -(k as i64));
        coeffs.push(spectrum[k].mul_real(&amp).div_real(&size_r));
        let e = samples.max_err.mul(&amp.with_precision(64)).add(&alias);
        errors.push(e);
    }
    Ok(TaylorCoeffs { coeffs, errors, max_abs: samples.max_abs.clone() })
}

/// Taylor coefficients `c_0 .. c_k_max` of the disk function under `plan`.
pub fn phi_taylor(
    ctx: &mut LSeriesContext,
    plan: &DiskSamplingPlan,
    k_max: usize,
) -> Result<TaylorCoeffs, LiError> {
    if k_max > plan.max_order() {
        return Err(LiError::BadPlan(format!(
            "order {k_max} exceeds plan capacity {}",
            plan.max_order()
        )));
    }
    ctx.cfg = plan.cfg;
    let samples = sample_circle(ctx, plan.radius, plan.m)?;
    extract(&samples, plan.radius, k_max, plan.cfg.bits)
}

/// Coefficients of `phi'/phi` to order `n_max - 1` by formal division:
/// `(m+1) c_{m+1} = sum_{j=0..m} c_j d_{m-j}` solved for `d_m`.
fn log_derivative_series(
    taylor: &TaylorCoeffs,
    n_max: usize,
) -> Result<Vec<HPComplex>, LiError> {
    let c = &taylor.coeffs;
    assert!(c.len() > n_max, "need c_0..c_{n_max} for division");
    let c0_abs = c[0].abs();
    if c0_abs < taylor.errors[0].scale2(2) {
        return Err(LiError::CentralValueTooSmall(format!("{:?}", c0_abs.to_f64())));
    }
    let work = c[0].precision();
    let c0_inv = c[0].recip();
    let mut d: Vec<HPComplex> = Vec::with_capacity(n_max);
    for m in 0..n_max {
        let mut num = c[m + 1].mul_real(&HPReal::from_u64(m as u64 + 1, work));
        for j in 1..=m {
            num = num.sub(&c[j].mul(&d[m - j]));
        }
        d.push(num.mul(&c0_inv));
    }
    Ok(d)
}

/// Full positivity report: primary extraction at `2M` samples, cross-checked
/// against the `M`-sample subset and an alternate-radius run.
pub fn li_coefficients(
    ctx: &mut LSeriesContext,
    plan: &DiskSamplingPlan,
    n_max: usize,
) -> Result<LiReport, LiError> {
    if n_max == 0 || n_max > plan.max_order() {
        return Err(LiError::BadPlan(format!(
            "n_max {n_max} outside 1..={}",
            plan.max_order()
        )));
    }
    ctx.cfg = plan.cfg;
    let bits = plan.cfg.bits;

    // One pass at 2M points; its even-index subset is exactly the M-point
    // circle, so the doubling check costs no extra evaluations.
    let fine = sample_circle(ctx, plan.radius, 2 * plan.m)?;
    let coarse = CircleSamples {
        values: fine.values.iter().step_by(2).cloned().collect(),
        max_err: fine.max_err.clone(),
        max_abs: fine.max_abs.clone(),
    };
    let alt_radius = if plan.radius > 0.45 { 0.4 } else { 0.5 };
    let alt = sample_circle(ctx, alt_radius, plan.m)?;

    let run_fine = extract(&fine, plan.radius, n_max, bits)?;
    let run_coarse = extract(&coarse, plan.radius, n_max, bits)?;
    let run_alt = extract(&alt, alt_radius, n_max, bits)?;

    let d_fine = log_derivative_series(&run_fine, n_max)?;
    let d_coarse = log_derivative_series(&run_coarse, n_max)?;
    let d_alt = log_derivative_series(&run_alt, n_max)?;

    let mut lambdas = Vec::with_capacity(n_max);
    let mut error_estimates = Vec::with_capacity(n_max);
    for m in 0..n_max {
        let doubling = d_fine[m].sub(&d_coarse[m]).abs().with_precision(64);
        let variation = d_fine[m].sub(&d_alt[m]).abs().with_precision(64);
        let residue = d_fine[m].im.abs().with_precision(64);
        let err = HPReal::max_value(&HPReal::max_value(&doubling, &variation), &residue);
        lambdas.push(d_fine[m].re.clone());
        error_estimates.push(err);
    }
    let all_nonnegative = lambdas.iter().all(|l| !l.is_negative());
    let growth_fit = fit_per_n(&lambdas);
    Ok(LiReport { lambdas, error_estimates, all_nonnegative, growth_fit })
}

fn fit_per_n(lambdas: &[HPReal]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let n = (i + 1) as f64;
            (n.ln(), l.to_f64() / n)
        })
        .collect();
    least_squares(&pts)
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-12 {
        return (0.0, if pts.is_empty() { 0.0 } else { sy / n });
    }
    let slope = (n * sxy - sx * sy) / den;
    (slope, (sy - slope * sx) / n)
}

/// Expands a report into plain-number diagnostics.
pub fn growth_diagnostics(report: &LiReport) -> GrowthSummary {
    let mut rows = Vec::with_capacity(report.lambdas.len());
    let mut negative_at = Vec::new();
    let mut prev = 0.0f64;
    for (i, l) in report.lambdas.iter().enumerate() {
        let n = i + 1;
        let lambda = l.to_f64();
        if l.is_negative() {
            negative_at.push(n);
        }
        let delta = if i == 0 { 0.0 } else { lambda - prev };
        rows.push(GrowthRow { n, lambda, per_n: lambda / n as f64, delta });
        prev = lambda;
    }
    let (slope, intercept) = report.growth_fit;
    let residual_norm = rows
        .iter()
        .map(|r| {
            let fitted = slope * (r.n as f64).ln() + intercept;
            (r.per_n - fitted) * (r.per_n - fitted)
        })
        .sum::<f64>()
        .sqrt();
    GrowthSummary { rows, negative_at, slope, intercept, residual_norm }
}

impl LiReport {
    fn decimal_digits(bits: u32) -> usize {
        (bits as f64 * 0.30103) as usize + 2
    }

    /// JSON form used by the command-line dumps.
    pub fn to_json(&self, curve: &str, bits: u32) -> serde_json::Value {
        let digits = Self::decimal_digits(bits);
        let num = |x: &HPReal| -> serde_json::Value {
            x.to_decimal_string(digits)
                .parse::<serde_json::Number>()
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null)
        };
        let g = growth_diagnostics(self);
        serde_json::json!({
            "curve": curve,
            "n_max": self.lambdas.len(),
            "lambdas": self.lambdas.iter().map(&num).collect::<Vec<_>>(),
            "errors": self.error_estimates.iter().map(&num).collect::<Vec<_>>(),
            "all_nonnegative": self.all_nonnegative,
            "growth": {
                "slope": g.slope,
                "intercept": g.intercept,
                "residual_norm": g.residual_norm,
                "negative_at": g.negative_at,
            },
        })
    }

    /// CSV form: header plus one `n,lambda,error` row per coefficient.
    pub fn to_csv(&self, bits: u32) -> String {
        let digits = Self::decimal_digits(bits);
        let mut out = String::from("n,lambda,error\n");
        for (i, (l, e)) in self.lambdas.iter().zip(&self.error_estimates).enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                i + 1,
                l.to_decimal_string(digits),
                e.to_decimal_string(6)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunction::LSeriesContext;
    use crate::pointcount::CountOptions;
    use crate::reduction::Overrides;
    use crate::weierstrass::{Equation, Rationals};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx_11(bits: u32) -> LSeriesContext {
        LSeriesContext::build(
            Equation::from_i64(&Rationals, [0, -1, 1, -10, -20]),
            &Overrides::default(),
            PrecisionConfig::new(bits, 32),
            CountOptions::default(),
        )
        .unwrap()
    }

    fn ctx_37(bits: u32) -> LSeriesContext {
        LSeriesContext::build(
            Equation::from_i64(&Rationals, [0, 0, 1, -1, 0]),
            &Overrides::default(),
            PrecisionConfig::new(bits, 32),
            CountOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn disk_map_base_points() {
        let prec = 160;
        let s = disk_map(&HPComplex::zero(prec)).unwrap();
        assert!(s.sub(&HPComplex::one(prec)).abs() < HPReal::exp2(-150, prec));
        let s = disk_map(&HPComplex::from_f64(-1.0, 0.0, prec)).unwrap();
        assert!(s.sub(&HPComplex::from_f64(0.5, 0.0, prec)).abs() < HPReal::exp2(-150, prec));
        assert!(matches!(
            disk_map(&HPComplex::one(prec)),
            Err(LiError::Numerics(NumericsError::Pole(_)))
        ));
    }

    #[test]
    fn unit_circle_lands_on_the_critical_line() {
        let prec = 160;
        let half = HPReal::exp2(-1, prec);
        for k in [1u64, 2, 3] {
            // theta = k pi / 3 for k = 1, 2; pi/2 via k = 2 of 4.
            let theta = pi(prec).mul(&HPReal::from_u64(k, prec)).div(&HPReal::from_u64(3, prec));
            let (sn, cs) = sin_cos(&theta);
            let z = HPComplex::new(cs, sn);
            let s = disk_map(&z).unwrap();
            assert!(s.re.sub(&half).abs() < HPReal::exp2(-150, prec), "theta {k}pi/3");
        }
    }

    #[test]
    fn critical_line_pulls_back_to_the_unit_circle() {
        let prec = 160;
        let one = HPComplex::one(prec);
        let mut rng = StdRng::seed_from_u64(0x11A);
        for _ in 0..100 {
            let y: f64 = rng.gen_range(0.05..20.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let s = HPComplex::new(HPReal::exp2(-1, prec), HPReal::from_f64(y, prec));
            // z = 1 - 1/s must sit on the unit circle.
            let z = one.sub(&s.recip());
            let dist = z.abs().sub(&HPReal::one(prec)).abs();
            assert!(dist < HPReal::exp2(-140, prec), "y = {y}");
        }
    }

    #[test]
    fn plan_validation() {
        let cfg = PrecisionConfig::default();
        assert!(matches!(DiskSamplingPlan::new(0.5, 48, cfg), Err(LiError::BadPlan(_))));
        assert!(matches!(DiskSamplingPlan::new(1.2, 64, cfg), Err(LiError::BadPlan(_))));
        assert!(matches!(DiskSamplingPlan::new(0.0, 64, cfg), Err(LiError::BadPlan(_))));
        let plan = DiskSamplingPlan::for_order(50, cfg);
        assert_eq!(plan.m, 512);
        assert_eq!(plan.max_order(), 128);
        assert_eq!(plan.radius, 0.5);
    }

    #[test]
    fn tiny_plans_trip_the_aliasing_budget() {
        let mut ctx = ctx_11(128);
        let plan = DiskSamplingPlan::new(0.5, 16, PrecisionConfig::new(128, 32)).unwrap();
        match phi_taylor(&mut ctx, &plan, 4) {
            Err(LiError::AliasingBudgetExceeded { bound_log2, budget_log2 }) => {
                assert!(bound_log2 > budget_log2);
            }
            other => panic!("expected aliasing failure, got {other:?}"),
        }
    }

    #[test]
    fn zeroth_coefficient_is_the_center_value() {
        let mut ctx = ctx_11(96);
        let plan = DiskSamplingPlan::new(0.5, 256, PrecisionConfig::new(96, 32)).unwrap();
        let run = phi_taylor(&mut ctx, &plan, 8).unwrap();
        let center = ctx.xi_auto(&HPComplex::one(ctx.cfg.working())).unwrap();
        let diff = run.coeffs[0].sub(&center.value).abs();
        let budget = run.errors[0].add(&center.error_bound).scale2(1);
        assert!(diff < budget, "c_0 off by {diff:?}");
        // Real Taylor series: imaginary parts stay inside the estimates.
        for (c, e) in run.coeffs.iter().zip(&run.errors) {
            assert!(c.im.abs() < e.scale2(1));
        }
    }

    #[test]
    fn division_reproduces_the_derivative_series() {
        let mut ctx = ctx_11(128);
        let plan = DiskSamplingPlan::new(0.5, 256, PrecisionConfig::new(128, 32)).unwrap();
        let n_max = 8;
        let run = phi_taylor(&mut ctx, &plan, n_max + 1).unwrap();
        let d = log_derivative_series(&run, n_max).unwrap();
        let work = run.coeffs[0].precision();
        for m in 0..n_max {
            // (m+1) c_{m+1} = sum_{j=0..m} c_j d_{m-j}
            let mut conv = HPComplex::zero(work);
            for j in 0..=m {
                conv = conv.add(&run.coeffs[j].mul(&d[m - j]));
            }
            let lhs = run.coeffs[m + 1].mul_real(&HPReal::from_u64(m as u64 + 1, work));
            assert!(lhs.sub(&conv).abs() < HPReal::exp2(-120, work), "order {m}");
        }
    }

    #[test]
    fn pipeline_on_a_rank_zero_curve() {
        let bits = 128;
        let mut ctx = ctx_11(bits);
        let plan = DiskSamplingPlan::for_order(8, PrecisionConfig::new(bits, 32));
        let report = li_coefficients(&mut ctx, &plan, 8).unwrap();
        assert_eq!(report.lambdas.len(), 8);
        assert!(report.all_nonnegative);
        for (l, e) in report.lambdas.iter().zip(&report.error_estimates) {
            assert!(!l.is_negative());
            assert!(*e < HPReal::exp2(-60, 64));
        }

        // Independent check of the leading coefficient by differencing the
        // center value: lambda(1) = xi'(1)/xi(1).
        let work = ctx.cfg.working();
        let h = HPReal::exp2(-(bits as i64) / 3, work);
        let one = HPComplex::one(work);
        let up = ctx.xi_auto(&one.add(&HPComplex::from_real(h.clone()))).unwrap();
        let dn = ctx.xi_auto(&one.sub(&HPComplex::from_real(h.clone()))).unwrap();
        let mid = ctx.xi_auto(&one).unwrap();
        let oracle = up.value.sub(&dn.value).div_real(&h.scale2(1)).div(&mid.value);
        let diff = report.lambdas[0].sub(&oracle.re).abs();
        assert!(diff < HPReal::exp2(-70, work), "lambda(1) off by {diff:?}");
        assert!(diff.to_f64() < 1e-20);
        assert!(oracle.re.is_positive());
    }

    #[test]
    fn pipeline_on_a_rank_one_curve() {
        let mut ctx = ctx_37(128);
        let plan = DiskSamplingPlan::for_order(4, PrecisionConfig::new(128, 32));
        let report = li_coefficients(&mut ctx, &plan, 4).unwrap();
        assert!(report.all_nonnegative);
        assert!(report.lambdas[0].is_positive());
        for e in &report.error_estimates {
            assert!(*e < HPReal::exp2(-60, 64));
        }
    }

    #[test]
    fn growth_detector_flags_synthetic_dips() {
        let mk = |vals: &[f64]| LiReport {
            lambdas: vals.iter().map(|v| HPReal::from_f64(*v, 64)).collect(),
            error_estimates: vals.iter().map(|_| HPReal::exp2(-40, 64)).collect(),
            all_nonnegative: vals.iter().all(|v| *v >= 0.0),
            growth_fit: (0.0, 0.0),
        };
        let clean = growth_diagnostics(&mk(&[0.1, 0.2, 0.3, 0.5, 0.8]));
        assert!(clean.negative_at.is_empty());
        assert_eq!(clean.rows.len(), 5);
        assert!((clean.rows[1].delta - 0.1).abs() < 1e-12);

        let dipped = growth_diagnostics(&mk(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, -0.05, 0.8]));
        assert_eq!(dipped.negative_at, vec![7]);
        assert!(dipped.residual_norm.is_finite());
    }

    #[test]
    fn report_serializes_both_ways() {
        let report = LiReport {
            lambdas: vec![HPReal::from_f64(0.25, 96), HPReal::from_f64(0.5, 96)],
            error_estimates: vec![HPReal::exp2(-50, 64), HPReal::exp2(-48, 64)],
            all_nonnegative: true,
            growth_fit: (0.1, 0.2),
        };
        let j = report.to_json("11a-like", 96);
        assert_eq!(j["curve"], "11a-like");
        assert_eq!(j["n_max"], 2);
        assert!(j["all_nonnegative"].as_bool().unwrap());
        assert!(j["lambdas"].as_array().unwrap().len() == 2);
        let csv = report.to_csv(96);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,lambda,error");
        assert!(lines.next().unwrap().starts_with("1,2.5"), "{csv}");
    }
}
