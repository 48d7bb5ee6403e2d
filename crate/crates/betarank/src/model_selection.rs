//! Model comparison: Kolmogorov–Smirnov statistics and tests, AIC, and the
//! three-way verdict (BRF vs power law vs lognormal).
//!
//! The decisive quantity is the within-family `ΔAIC = AIC_brf − AIC_power_law`
//! from the same regression space; the lognormal AIC is built from a true
//! likelihood and carries a cross-family caveat flag.

use crate::distributions::BrfQuantile;
use crate::error::{Error, Result};
use crate::fitting::{
    fit_dgbd, fit_lognormal, fit_power_law, FitReport, FitSpace, FittedParams, ModelKind,
    RankedSample,
};
use crate::special::normal_cdf;
use serde::Serialize;

/// Reporting floor for p-values; anything smaller serializes as this value.
pub const P_VALUE_FLOOR: f64 = 2.2e-16;

/// Clamp a p-value to the reporting floor.
pub fn floored_p(p: f64) -> f64 {
    p.max(P_VALUE_FLOOR)
}

// ============================================================================
// Kolmogorov–Smirnov
// ============================================================================

/// Exact supremum distance between the empirical CDF of `sample` and a
/// model CDF: `max_i max(|i/n − F(x_i)|, |(i−1)/n − F(x_i)|)` over the
/// sorted sample.
pub fn ks_statistic<F>(sample: &[f64], model_cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if sample.is_empty() {
        return Err(Error::usage("KS statistic needs a non-empty sample"));
    }
    let mut xs = sample.to_vec();
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("sample contains non-finite values".to_string()));
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = model_cdf(x)?;
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((i as f64 / n - f).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail probability `Q(√n·D)` via the alternating
/// series `2 Σ (−1)^(k−1) exp(−2 k² λ²)`, truncated once terms drop below
/// 1e-12.
///
/// When the parameters of the model CDF were estimated from the same sample
/// the value is anti-conservative; the comparison verdict carries that
/// caveat as a flag.
pub fn ks_pvalue(statistic: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&statistic) {
        return Err(Error::domain(format!(
            "KS statistic must lie in [0,1], got {statistic}"
        )));
    }
    if n == 0 {
        return Err(Error::usage("KS p-value needs n ≥ 1"));
    }
    let lambda = (n as f64).sqrt() * statistic;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100_000 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    Ok((2.0 * sum).clamp(0.0, 1.0))
}

// ============================================================================
// AIC
// ============================================================================

/// Akaike information criterion for a fit on `n` observations.
///
/// Regression fits use the Gaussian profile likelihood of the residuals,
/// `AIC = n·ln(rss/n) + 2k` (additive constant dropped); the lognormal uses
/// its negative log-likelihood, `AIC = 2·NLL + 2k`. A zero-residual
/// (degenerate) fit yields the `-inf` sentinel.
pub fn aic(fit: &FitReport, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("AIC needs n ≥ 1"));
    }
    let k = fit.n_params as f64;
    if fit.rss_is_nll {
        return Ok(2.0 * fit.rss + 2.0 * k);
    }
    if fit.rss < 0.0 {
        return Err(Error::domain(format!("negative rss {}", fit.rss)));
    }
    if fit.rss == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(n as f64 * (fit.rss / n as f64).ln() + 2.0 * k)
}

// ============================================================================
// Comparison verdict
// ============================================================================

/// Scores for one candidate model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelScore {
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    pub aic: f64,
    pub degenerate: bool,
    pub converged: bool,
}

/// Outcome of comparing all three models on one sample.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonVerdict {
    pub label: String,
    pub n: usize,
    pub fit_space: FitSpace,
    pub brf: Option<ModelScore>,
    pub power_law: Option<ModelScore>,
    pub lognormal: Option<ModelScore>,
    /// KS of the raw-valued empirical CDF against the normal CDF carrying the
    /// log-fitted (mu, sigma). A scale-mismatched comparison that some
    /// published pipelines compute; reported alongside for cross-checking.
    pub ks_lognormal_rawscale: Option<f64>,
    /// Fitted parameters, kept for downstream reports.
    pub brf_params: Option<FittedParams>,
    pub power_law_params: Option<FittedParams>,
    pub lognormal_params: Option<FittedParams>,
    /// `AIC_brf − AIC_power_law`; negative favors the BRF.
    pub delta_aic_brf_vs_power_law: Option<f64>,
    pub best_by_ks: Option<ModelKind>,
    pub best_by_aic: Option<ModelKind>,
    /// Models that failed to fit, with reasons; comparison proceeds without them.
    pub failures: Vec<(ModelKind, String)>,
    /// The lognormal AIC uses a different likelihood basis than the
    /// regression fits, so cross-family AIC gaps are indicative only.
    pub cross_family_aic_caveat: bool,
    /// KS p-values are anti-conservative: parameters were estimated from
    /// the sample being tested.
    pub ks_pvalue_estimated_params_caveat: bool,
}

/// Fit and score all three models on a ranked sample.
///
/// Per-model failures are recorded and the comparison proceeds with the
/// models that fitted. Requires at least 10 observations.
pub fn compare_models(sample: &RankedSample, space: FitSpace) -> Result<ComparisonVerdict> {
    let n = sample.len();
    if n < 10 {
        return Err(Error::InsufficientData { needed: 10, got: n });
    }

    let mut verdict = ComparisonVerdict {
        label: sample.label().to_string(),
        n,
        fit_space: space,
        brf: None,
        power_law: None,
        lognormal: None,
        ks_lognormal_rawscale: None,
        brf_params: None,
        power_law_params: None,
        lognormal_params: None,
        delta_aic_brf_vs_power_law: None,
        best_by_ks: None,
        best_by_aic: None,
        failures: Vec::new(),
        cross_family_aic_caveat: true,
        ks_pvalue_estimated_params_caveat: true,
    };

    // --- BRF and power law: rank-size regression, CDF from the implied
    //     distribution (rank-size scale converted to quantile scale).
    for (kind, fit_result) in [
        (ModelKind::Brf, fit_dgbd(sample, space, None)),
        (ModelKind::PowerLaw, fit_power_law(sample, space)),
    ] {
        match fit_result.and_then(|fit| score_rank_size_fit(sample, &fit, n).map(|s| (fit, s))) {
            Ok((fit, score)) => match kind {
                ModelKind::Brf => {
                    verdict.brf_params = Some(fit.params);
                    verdict.brf = Some(score);
                }
                ModelKind::PowerLaw => {
                    verdict.power_law_params = Some(fit.params);
                    verdict.power_law = Some(score);
                }
                ModelKind::Lognormal => unreachable!(),
            },
            Err(e) => verdict.failures.push((kind, e.to_string())),
        }
    }

    // --- Lognormal: KS on the log scale against the fitted normal.
    match fit_lognormal(sample.values()) {
        Ok(fit) => {
            let (mu, sigma) = match fit.params {
                FittedParams::Lognormal { mu, sigma } => (mu, sigma),
                _ => unreachable!(),
            };
            if fit.degenerate {
                verdict
                    .failures
                    .push((ModelKind::Lognormal, "zero-variance sample".to_string()));
            } else {
                let logs: Vec<f64> = sample.values().iter().map(|x| x.ln()).collect();
                let ks = ks_statistic(&logs, |z| Ok(normal_cdf(z, mu, sigma)))?;
                let score = ModelScore {
                    ks_statistic: ks,
                    ks_pvalue: ks_pvalue(ks, n)?,
                    aic: aic(&fit, n)?,
                    degenerate: fit.degenerate,
                    converged: fit.converged,
                };
                verdict.ks_lognormal_rawscale = Some(ks_statistic(sample.values(), |x| {
                    Ok(normal_cdf(x, mu, sigma))
                })?);
                verdict.lognormal_params = Some(fit.params);
                verdict.lognormal = Some(score);
            }
        }
        Err(e) => verdict.failures.push((ModelKind::Lognormal, e.to_string())),
    }

    if let (Some(brf), Some(pl)) = (&verdict.brf, &verdict.power_law) {
        verdict.delta_aic_brf_vs_power_law = Some(brf.aic - pl.aic);
    }

    let present = [
        (ModelKind::Brf, &verdict.brf),
        (ModelKind::PowerLaw, &verdict.power_law),
        (ModelKind::Lognormal, &verdict.lognormal),
    ];
    verdict.best_by_ks = present
        .iter()
        .filter_map(|(k, s)| s.as_ref().map(|s| (*k, s.ks_statistic)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(k, _)| k);
    verdict.best_by_aic = present
        .iter()
        .filter_map(|(k, s)| s.as_ref().map(|s| (*k, s.aic)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(k, _)| k);

    Ok(verdict)
}

fn score_rank_size_fit(sample: &RankedSample, fit: &FitReport, n: usize) -> Result<ModelScore> {
    let dgbd = fit
        .params
        .as_dgbd()
        .ok_or_else(|| Error::usage("rank-size score requires DGBD parameters"))?;
    let dist: BrfQuantile = dgbd.distribution();
    let ks = ks_statistic(sample.values(), |x| dist.cdf(x))?;
    Ok(ModelScore {
        ks_statistic: ks,
        ks_pvalue: ks_pvalue(ks, n)?,
        aic: aic(fit, n)?,
        degenerate: fit.degenerate,
        converged: fit.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{rank_sample, NonPositivePolicy};

    // --- ks_statistic ---

    #[test]
    fn quantile_sample_gives_half_over_n() {
        // Sample at the model's own quantile levels (i−0.5)/n: the empirical
        // CDF brackets F(x_i) by exactly 0.5/n on each side. The power-law
        // CDF inverts in closed form, so this is exact.
        let q = BrfQuantile::new(2.0, 0.8, 0.0).unwrap();
        for n in [1usize, 7, 100, 999] {
            let xs: Vec<f64> = (0..n)
                .map(|i| {
                    let u = 1.0 - (i as f64 + 0.5) / n as f64; // F = 1−u
                    q.quantile(u).unwrap()
                })
                .collect();
            let d = ks_statistic(&xs, |x| q.cdf(x)).unwrap();
            assert!(
                (d - 0.5 / n as f64).abs() < 1e-12,
                "n={n}: D = {d}, expected {}",
                0.5 / n as f64
            );
        }
    }

    #[test]
    fn single_point_statistic() {
        let d = ks_statistic(&[5.0], |_| Ok(0.3)).unwrap();
        assert!((d - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_point_enumeration() {
        // F values 0.1 and 0.2; deviations {0.4, 0.1} and {0.8, 0.3}.
        let d = ks_statistic(&[1.0, 2.0], |x| Ok(if x < 1.5 { 0.1 } else { 0.2 })).unwrap();
        assert!((d - 0.8).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_is_usage_error() {
        assert!(matches!(
            ks_statistic(&[], |_| Ok(0.5)),
            Err(Error::Usage(_))
        ));
    }

    // --- ks_pvalue ---

    #[test]
    fn pvalue_limits() {
        assert_eq!(ks_pvalue(0.0, 100).unwrap(), 1.0);
        let p = ks_pvalue(1.0, 1000).unwrap();
        assert!(p < 1e-300, "p = {p}");
        assert!(floored_p(p) == P_VALUE_FLOOR);
    }

    #[test]
    fn pvalue_at_critical_value() {
        // Direct, finer evaluation of the alternating series as the oracle.
        let lambda: f64 = 1.36;
        let mut oracle = 0.0;
        for k in 1..200 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            oracle += sign * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        }
        oracle *= 2.0;

        // pick n, D with sqrt(n)·D = 1.36
        let n = 10_000;
        let d = lambda / (n as f64).sqrt();
        let p = ks_pvalue(d, n).unwrap();
        assert!((p - oracle).abs() < 1e-9);
        assert!((p - 0.049).abs() < 0.002, "p = {p}");
    }

    #[test]
    fn pvalue_rejects_bad_statistic() {
        assert!(ks_pvalue(-0.1, 10).is_err());
        assert!(ks_pvalue(1.1, 10).is_err());
    }

    // --- aic ---

    fn regression_fit(rss: f64, k: usize, n: usize) -> FitReport {
        FitReport {
            model: if k == 3 { ModelKind::Brf } else { ModelKind::PowerLaw },
            params: FittedParams::Dgbd(
                crate::distributions::DgbdParams::new(1.0, 0.5, 0.0, n as u32).unwrap(),
            ),
            rss,
            rss_is_nll: false,
            n_params: k,
            fit_space: FitSpace::Log,
            converged: true,
            iterations: 1,
            degenerate: false,
            n_obs: n,
        }
    }

    #[test]
    fn equal_rss_delta_is_parameter_penalty() {
        let f3 = regression_fit(2.5, 3, 50);
        let f2 = regression_fit(2.5, 2, 50);
        let d = aic(&f3, 50).unwrap() - aic(&f2, 50).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn halving_rss_drops_aic_by_n_ln2() {
        let f1 = regression_fit(4.0, 3, 100);
        let f2 = regression_fit(2.0, 3, 100);
        let drop = aic(&f1, 100).unwrap() - aic(&f2, 100).unwrap();
        assert!((drop - 100.0 * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn zero_rss_is_neg_infinity_sentinel() {
        let f = regression_fit(0.0, 3, 10);
        assert_eq!(aic(&f, 10).unwrap(), f64::NEG_INFINITY);
    }

    // --- compare_models ---

    #[test]
    fn brf_sample_selects_brf() {
        let q = BrfQuantile::new(100.0, 0.7, 0.4).unwrap();
        let xs = q.sample(5000, 314);
        let s = rank_sample(&xs, "brf-synthetic", NonPositivePolicy::Reject).unwrap();
        let v = compare_models(&s, FitSpace::Log).unwrap();
        assert_eq!(v.best_by_ks, Some(ModelKind::Brf), "ks: {:?}", v);
        assert_eq!(v.best_by_aic, Some(ModelKind::Brf));
        assert!(v.delta_aic_brf_vs_power_law.unwrap() < 0.0);
        assert!(v.failures.is_empty());
    }

    #[test]
    fn power_law_sample_keeps_delta_near_penalty() {
        // On data truly drawn from the nested (b = 0) model, the extra BRF
        // parameter can never buy more than its own penalty: rss_brf ≤ rss_pl
        // forces ΔAIC ≤ +2. For the typical draw the b ≥ 0 clamp binds and
        // the two fits coincide, making ΔAIC exactly +2.
        let mut at_penalty = 0;
        for seed in 0..8 {
            let q = BrfQuantile::new(1.0, 0.9, 0.0).unwrap();
            let xs = q.sample(3000, seed);
            let s = rank_sample(&xs, "pl-synthetic", NonPositivePolicy::Reject).unwrap();
            let v = compare_models(&s, FitSpace::Log).unwrap();
            let delta = v.delta_aic_brf_vs_power_law.unwrap();
            assert!(delta <= 2.0 + 1e-9, "seed {seed}: delta = {delta}");
            if (delta - 2.0).abs() < 1e-6 {
                at_penalty += 1;
            }
            // the fitted power law's implied distribution must track its own
            // sample closely (scale conversion sanity)
            let ks_pl = v.power_law.as_ref().unwrap().ks_statistic;
            assert!(ks_pl < 0.05, "seed {seed}: power-law KS = {ks_pl}");
        }
        assert!(at_penalty >= 4, "only {at_penalty}/8 draws sat at the penalty bound");
    }

    #[test]
    fn verdict_records_sample_size_and_caveats() {
        let q = BrfQuantile::new(10.0, 0.5, 0.5).unwrap();
        let xs = q.sample(200, 5);
        let s = rank_sample(&xs, "day", NonPositivePolicy::Reject).unwrap();
        let v = compare_models(&s, FitSpace::Log).unwrap();
        assert_eq!(v.n, 200);
        assert!(v.cross_family_aic_caveat);
        assert!(v.ks_pvalue_estimated_params_caveat);
        assert!(v.ks_lognormal_rawscale.is_some());
        // verdict serializes to JSON
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"best_by_ks\""));
    }

    #[test]
    fn too_small_sample_is_rejected() {
        let s = rank_sample(&[9.0, 8.0, 7.0, 6.0, 5.0], "tiny", NonPositivePolicy::Reject).unwrap();
        assert!(matches!(
            compare_models(&s, FitSpace::Log),
            Err(Error::InsufficientData { needed: 10, .. })
        ));
    }
}
