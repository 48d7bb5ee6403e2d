//! The beta rank function (BRF) distribution family and its competitors.
//!
//! The discrete generalized beta distribution (DGBD) is the rank-size curve
//! `x(r) = A (N+1−r)^b / r^a` on ranks `1..=N`. The BRF distribution is the
//! continuous law defined by the quantile function `x(u) = A (1−u)^b / u^a`
//! on `u ∈ (0,1)`; its log-variable density has a smooth peak with
//! exponential tails of slope `+1/b` (left) and `−1/a` (right). With `b = 0`
//! both reduce to a pure power law.
//!
//! All types are immutable after construction and cheap to copy; sampling
//! takes an explicit seed so concurrent use stays deterministic.

use crate::error::{Error, Result};
use crate::special::ln_beta;
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Bisection tolerance on `u` for CDF inversion.
const CDF_U_TOLERANCE: f64 = 1e-10;
const CDF_MAX_ITER: usize = 200;

/// Treat `a` and `b` as equal below this difference (limit branch of the mode).
const SHAPE_EQ_EPS: f64 = 1e-12;

// ============================================================================
// Parameter sets
// ============================================================================

/// Parameters of the DGBD rank-size curve `x(r) = A (N+1−r)^b / r^a`.
///
/// `a` controls the decay of the high-value (low-rank) end, `b` the decay of
/// the low-value end; `scale` is `A` and `max_rank` is `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgbdParams {
    pub scale: f64,
    pub a: f64,
    pub b: f64,
    pub max_rank: u32,
}

impl DgbdParams {
    pub fn new(scale: f64, a: f64, b: f64, max_rank: u32) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain(format!("scale must be positive, got {scale}")));
        }
        if !(a.is_finite() && a >= 0.0) || !(b.is_finite() && b >= 0.0) {
            return Err(Error::domain(format!(
                "tail exponents must be non-negative, got a={a}, b={b}"
            )));
        }
        if max_rank < 1 {
            return Err(Error::domain("max_rank must be at least 1".to_string()));
        }
        Ok(Self { scale, a, b, max_rank })
    }

    /// Evaluate the rank-size curve at an integer rank in `[1, max_rank]`.
    pub fn eval(&self, rank: u32) -> Result<f64> {
        if rank < 1 || rank > self.max_rank {
            return Err(Error::domain(format!(
                "rank {rank} outside [1, {}]",
                self.max_rank
            )));
        }
        let r = rank as f64;
        let m = (self.max_rank + 1 - rank) as f64;
        Ok(self.scale * m.powf(self.b) / r.powf(self.a))
    }

    /// The continuous BRF distribution whose order statistics follow this
    /// rank-size curve.
    ///
    /// Rank `r` of a ranked sample of size `N` sits at quantile level
    /// `u ≈ r/(N+1)`, so the rank-size scale and the quantile-function scale
    /// differ by a factor `(N+1)^(a−b)`; this method removes it. Use this
    /// (not [`BrfQuantile::from`]) when turning a fitted rank-size curve into
    /// a distribution for CDF, sampling or mode computations.
    pub fn distribution(&self) -> BrfQuantile {
        let n1 = (self.max_rank + 1) as f64;
        BrfQuantile {
            scale: self.scale * n1.powf(self.b - self.a),
            a: self.a,
            b: self.b,
        }
    }
}

/// The BRF distribution, defined by its quantile function
/// `x(u) = A (1−u)^b / u^a` on the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrfQuantile {
    pub scale: f64,
    pub a: f64,
    pub b: f64,
}

/// A competitor model in the comparison protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompetitorModel {
    /// `x(r) ∝ 1/r^exponent`; the `b = 0` specialization of the DGBD.
    PowerLaw { scale: f64, exponent: f64 },
    Lognormal { mu: f64, sigma: f64 },
}

/// Outcome of a moment computation: the BRF has finite moments only of
/// order `n < 1/a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Moment {
    Finite(f64),
    Divergent,
}

impl Moment {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Moment::Divergent)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Divergent => None,
        }
    }
}

// ============================================================================
// BRF distribution
// ============================================================================

impl From<&DgbdParams> for BrfQuantile {
    /// Reinterpret the parameter triple as a quantile function directly
    /// (`max_rank` plays no role in the continuous form).
    fn from(p: &DgbdParams) -> Self {
        BrfQuantile { scale: p.scale, a: p.a, b: p.b }
    }
}

impl BrfQuantile {
    pub fn new(scale: f64, a: f64, b: f64) -> Result<Self> {
        // Same parameter domain as the rank-size form.
        let p = DgbdParams::new(scale, a, b, 1)?;
        Ok(BrfQuantile { scale: p.scale, a: p.a, b: p.b })
    }

    /// `x(u) = A (1−u)^b / u^a`, strictly decreasing on (0,1) when a or b
    /// is positive.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("u must lie in (0,1), got {u}")));
        }
        Ok(self.scale * (1.0 - u).powf(self.b) / u.powf(self.a))
    }

    /// Log of the quantile as a function of u: `z(u) = ln A + b ln(1−u) − a ln u`.
    fn log_quantile(&self, u: f64) -> f64 {
        self.scale.ln() + self.b * (1.0 - u).ln() - self.a * u.ln()
    }

    /// `P(X ≤ t)`, computed as `1 − u*` where `x(u*) = t`.
    ///
    /// Pure power-law (`b = 0`) and pure left-tail (`a = 0`) shapes invert in
    /// closed form; the two-tailed case uses monotone bisection to an
    /// absolute tolerance of 1e-10 in `u`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("cdf requires t > 0, got {t}")));
        }
        if self.a == 0.0 && self.b == 0.0 {
            // Degenerate point mass at the scale.
            return Ok(if t >= self.scale { 1.0 } else { 0.0 });
        }
        if self.b == 0.0 {
            // x = A/u^a  =>  u = (A/t)^(1/a), support [A, ∞).
            let u = (self.scale / t).powf(1.0 / self.a).clamp(0.0, 1.0);
            return Ok(1.0 - u);
        }
        if self.a == 0.0 {
            // x = A(1−u)^b  =>  u = 1 − (t/A)^(1/b), support (0, A].
            let u = (1.0 - (t / self.scale).powf(1.0 / self.b)).clamp(0.0, 1.0);
            return Ok(1.0 - u);
        }

        // Support is (0, ∞): x decreases from +∞ to 0, so a root always
        // brackets between 0 and 1.
        let mut lo = 0.0_f64; // x(lo) > t
        let mut hi = 1.0_f64; // x(hi) < t
        let mut iter = 0;
        while hi - lo > CDF_U_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            let x = self.scale * (1.0 - mid).powf(self.b) / mid.powf(self.a);
            if x > t {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
            if iter >= CDF_MAX_ITER {
                return Err(Error::Numeric(format!(
                    "cdf bisection did not reach tolerance after {CDF_MAX_ITER} iterations"
                )));
            }
        }
        Ok(1.0 - 0.5 * (lo + hi))
    }

    /// Density of `Z = ln X` at `z`.
    ///
    /// With `u` recovered from `z(u) = ln A + b ln(1−u) − a ln u`, the change
    /// of variables gives `f_Z(z) = u(1−u) / (a(1−u) + b·u)`. Defined only
    /// when both tails are present (`a > 0` and `b > 0`).
    pub fn log_density(&self, z: f64) -> Result<f64> {
        self.require_two_tails("log-density")?;
        let u = self.u_from_log(z);
        Ok(u * (1.0 - u) / (self.a * (1.0 - u) + self.b * u))
    }

    // Invert z(u) = z by bisection; z(u) is strictly decreasing with range
    // (−∞, ∞) when a > 0 and b > 0.
    fn u_from_log(&self, z: f64) -> f64 {
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        // 120 halvings put the interval near the f64 resolution of (0,1).
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if self.log_quantile(mid) > z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Location of the peak of [`Self::log_density`], as `(u*, z*)`.
    ///
    /// `u*` solves `(b−a)u² + 2au − a = 0` on (0,1); the `a = b` case takes
    /// the limit `u* = 1/2`.
    pub fn log_mode(&self) -> Result<(f64, f64)> {
        self.require_two_tails("mode")?;
        let u_star = if (self.b - self.a).abs() < SHAPE_EQ_EPS {
            0.5
        } else {
            ((self.a * self.b).sqrt() - self.a) / (self.b - self.a)
        };
        let z_star = self.log_quantile(u_star);
        Ok((u_star, z_star))
    }

    /// Inverse-transform sampling: `x(U)` for i.i.d. uniform `U` on (0,1).
    /// Deterministic for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    /// Sampling from a caller-provided generator (one stream per task keeps
    /// concurrent sampling reproducible).
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.scale * (1.0 - u).powf(self.b) / u.powf(self.a)
            })
            .collect()
    }

    /// `E[X^n] = A^n · B(1 − n·a, 1 + n·b)`, finite exactly when `n·a < 1`.
    pub fn moment(&self, order: f64) -> Result<Moment> {
        if !(order.is_finite() && order > 0.0) {
            return Err(Error::domain(format!(
                "moment order must be positive, got {order}"
            )));
        }
        if order * self.a >= 1.0 {
            return Ok(Moment::Divergent);
        }
        let ln_b = ln_beta(1.0 - order * self.a, 1.0 + order * self.b);
        Ok(Moment::Finite((order * self.scale.ln() + ln_b).exp()))
    }

    fn require_two_tails(&self, what: &str) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 {
            Ok(())
        } else {
            Err(Error::UnsupportedShape(format!(
                "{what} requires both tail exponents positive (a={}, b={})",
                self.a, self.b
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brf(scale: f64, a: f64, b: f64) -> BrfQuantile {
        BrfQuantile::new(scale, a, b).unwrap()
    }

    // --- rank-size evaluation ---

    #[test]
    fn dgbd_eval_power_law_case() {
        let p = DgbdParams::new(1.0, 1.0, 0.0, 10).unwrap();
        assert_eq!(p.eval(2).unwrap(), 0.5);
    }

    #[test]
    fn dgbd_eval_symmetric_midpoint() {
        // (N+1−r) = r at r=2, N=3, so the two powers cancel against a = b.
        let p = DgbdParams::new(2.0, 0.5, 0.5, 3).unwrap();
        assert!((p.eval(2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dgbd_eval_first_rank() {
        let p = DgbdParams::new(3.0, 0.7, 0.4, 100).unwrap();
        assert!((p.eval(1).unwrap() - 3.0 * 100f64.powf(0.4)).abs() < 1e-12);
    }

    #[test]
    fn dgbd_eval_rank_out_of_range() {
        let p = DgbdParams::new(1.0, 1.0, 1.0, 10).unwrap();
        assert!(matches!(p.eval(0), Err(Error::Domain(_))));
        assert!(matches!(p.eval(11), Err(Error::Domain(_))));
    }

    #[test]
    fn dgbd_invalid_params() {
        assert!(DgbdParams::new(0.0, 1.0, 1.0, 10).is_err());
        assert!(DgbdParams::new(1.0, -0.1, 1.0, 10).is_err());
        assert!(DgbdParams::new(1.0, 1.0, f64::NAN, 10).is_err());
        assert!(DgbdParams::new(1.0, 1.0, 1.0, 0).is_err());
    }

    // --- quantile ---

    #[test]
    fn quantile_power_law() {
        assert!((brf(1.0, 1.0, 0.0).quantile(0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_symmetric_median_is_scale() {
        for ab in [0.2, 0.7, 1.3] {
            assert!((brf(5.0, ab, ab).quantile(0.5).unwrap() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_hand_value() {
        // (0.75)^2 / (0.25)^0.5 = 1.125
        assert!((brf(1.0, 0.5, 2.0).quantile(0.25).unwrap() - 1.125).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        let q = brf(1.0, 0.5, 0.5);
        assert!(q.quantile(0.0).is_err());
        assert!(q.quantile(1.0).is_err());
        assert!(q.quantile(-0.1).is_err());
    }

    // --- cdf ---

    #[test]
    fn cdf_power_law_closed_form() {
        assert!((brf(1.0, 1.0, 0.0).cdf(2.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cdf_round_trip_identity() {
        let q = brf(3.0, 0.8, 0.4);
        let t = q.quantile(0.3).unwrap();
        assert!((q.cdf(t).unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn cdf_symmetric_median_at_scale() {
        assert!((brf(1.0, 0.5, 0.5).cdf(1.0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cdf_grid_round_trip() {
        let q = brf(10.0, 1.2, 0.3);
        let mut u = 0.001;
        while u < 0.999 {
            let t = q.quantile(u).unwrap();
            assert!(
                (q.cdf(t).unwrap() - (1.0 - u)).abs() < 1e-8,
                "round trip failed at u={u}"
            );
            u += 0.0121;
        }
    }

    #[test]
    fn cdf_monotone_and_bounded() {
        let q = brf(2.0, 0.6, 1.1);
        let mut prev = 0.0;
        for i in 1..2000 {
            let t = 0.01 * i as f64;
            let f = q.cdf(t).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev - 1e-12, "cdf not nondecreasing at t={t}");
            prev = f;
        }
    }

    #[test]
    fn cdf_rejects_nonpositive() {
        assert!(brf(1.0, 1.0, 1.0).cdf(0.0).is_err());
        assert!(brf(1.0, 1.0, 1.0).cdf(-3.0).is_err());
    }

    // --- log density ---

    #[test]
    fn log_density_symmetric_peak_value() {
        // u = 1/2 at z = ln A, f = (1/4)/(1·1/2 + 1·1/2) ... = 0.25
        for scale in [1.0, 100.0] {
            let q = brf(scale, 1.0, 1.0);
            let f = q.log_density(scale.ln()).unwrap();
            assert!((f - 0.25).abs() < 1e-9, "got {f}");
        }
    }

    #[test]
    fn log_density_requires_both_tails() {
        assert!(matches!(
            brf(1.0, 1.0, 0.0).log_density(0.0),
            Err(Error::UnsupportedShape(_))
        ));
        assert!(matches!(
            brf(1.0, 0.0, 1.0).log_density(0.0),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn log_density_integrates_to_one() {
        // Quadrature oracle: composite Simpson over the effective support.
        let q = brf(2.0, 1.0, 0.7);
        let z_hi = q.log_quantile(1e-9);
        let z_lo = q.log_quantile(1.0 - 1e-9);
        let n = 20_000;
        let h = (z_hi - z_lo) / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let z0 = z_lo + i as f64 * h;
            let zm = z0 + 0.5 * h;
            let z1 = z0 + h;
            let f0 = q.log_density(z0).unwrap();
            let fm = q.log_density(zm).unwrap();
            let f1 = q.log_density(z1).unwrap();
            integral += h / 6.0 * (f0 + 4.0 * fm + f1);
        }
        assert!((integral - 1.0).abs() < 1e-6, "integral = {integral}");
    }

    #[test]
    fn log_density_argmax_matches_mode_formula() {
        // Numeric argmax over a dense u-grid, refined by golden-section.
        for (a, b) in [(1.0, 4.0), (0.3, 0.7), (2.5, 0.4)] {
            let q = brf(1.0, a, b);
            let (u_star, z_star) = q.log_mode().unwrap();
            let (u_hat, _) = grid_argmax_u(&q);
            assert!(
                (u_hat - u_star).abs() < 1e-6,
                "a={a} b={b}: argmax u {u_hat} vs closed form {u_star}"
            );
            // density value should also peak at z_star
            let f_star = q.log_density(z_star).unwrap();
            let f_near = q.log_density(z_star + 0.01).unwrap();
            assert!(f_star >= f_near);
        }
    }

    // Independent argmax of u(1−u)/(a(1−u)+bu) on (0,1).
    fn grid_argmax_u(q: &BrfQuantile) -> (f64, f64) {
        let g = |u: f64| u * (1.0 - u) / (q.a * (1.0 - u) + q.b * u);
        let mut best_u = 0.5;
        let mut best = g(best_u);
        for i in 1..4000 {
            let u = i as f64 / 4000.0;
            let v = g(u);
            if v > best {
                best = v;
                best_u = u;
            }
        }
        // golden-section refinement around the best grid point
        let (mut lo, mut hi) = ((best_u - 3e-4).max(1e-9), (best_u + 3e-4).min(1.0 - 1e-9));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if g(m1) < g(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let u = 0.5 * (lo + hi);
        (u, g(u))
    }

    #[test]
    fn log_mode_symmetric_limit_branch() {
        for ab in [0.1, 1.0, 2.7] {
            let q = brf(7.0, ab, ab);
            let (u, z) = q.log_mode().unwrap();
            assert_eq!(u, 0.5);
            assert!((z - 7.0f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn log_mode_known_roots() {
        let (u, _) = brf(1.0, 1.0, 4.0).log_mode().unwrap();
        assert!((u - 1.0 / 3.0).abs() < 1e-12);
        let (u, _) = brf(1.0, 0.3, 0.7).log_mode().unwrap();
        let expect = (0.21f64.sqrt() - 0.3) / 0.4;
        assert!((u - expect).abs() < 1e-12);
    }

    #[test]
    fn log_mode_requires_both_tails() {
        assert!(brf(1.0, 0.0, 1.0).log_mode().is_err());
        assert!(brf(1.0, 1.0, 0.0).log_mode().is_err());
    }

    #[test]
    fn tail_slopes_match_exponents() {
        // Finite-difference slope of ln f_Z far out on each tail.
        for (a, b) in [(0.5, 1.0), (1.0, 0.5)] {
            let q = brf(1.0, a, b);
            let (_, z_star) = q.log_mode().unwrap();
            let h = 1e-4;
            let slope = |z: f64| {
                let f1 = q.log_density(z + h).unwrap().ln();
                let f0 = q.log_density(z - h).unwrap().ln();
                (f1 - f0) / (2.0 * h)
            };
            let right = slope(z_star + 10.0 * a);
            let left = slope(z_star - 10.0 * b);
            assert!(
                (right + 1.0 / a).abs() < 0.05 / a,
                "right slope {right} vs {}",
                -1.0 / a
            );
            assert!(
                (left - 1.0 / b).abs() < 0.05 / b,
                "left slope {left} vs {}",
                1.0 / b
            );
        }
    }

    // --- sampling ---

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let q = brf(2.0, 0.7, 0.3);
        assert_eq!(q.sample(100, 9), q.sample(100, 9));
        assert_ne!(q.sample(100, 9), q.sample(100, 10));
    }

    #[test]
    fn sample_ks_against_own_cdf() {
        // Kolmogorov 99% critical value is 1.63/sqrt(n); fixed seed.
        let q = brf(5.0, 0.6, 0.9);
        let mut xs = q.sample(1000, 20200426);
        xs.sort_by(|p, r| p.partial_cmp(r).unwrap());
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = q.cdf(x).unwrap();
            d = d.max(((i + 1) as f64 / n - f).abs());
            d = d.max((i as f64 / n - f).abs());
        }
        assert!(d < 0.06, "KS = {d}");
    }

    #[test]
    fn power_law_sample_respects_support() {
        let q = brf(1.0, 1.0, 0.0);
        let xs = q.sample(2000, 3);
        assert!(xs.iter().all(|&x| x >= 1.0));
    }

    // --- moments ---

    #[test]
    fn moment_matches_quadrature() {
        // Oracle: Simpson quadrature of x(u) over u after log substitution.
        let q = brf(1.0, 0.5, 0.0);
        match q.moment(1.0).unwrap() {
            Moment::Finite(m) => {
                assert!((m - 2.0).abs() < 1e-9, "B(0.5,1) should be 2, got {m}");
                let oracle = quadrature_moment(&q, 1.0, 1e-12);
                assert!((m - oracle).abs() < 1e-4, "quadrature {oracle} vs {m}");
            }
            Moment::Divergent => panic!("moment should be finite"),
        }

        let q2 = brf(2.0, 0.4, 0.6);
        if let Moment::Finite(m) = q2.moment(1.5).unwrap() {
            let oracle = quadrature_moment(&q2, 1.5, 1e-12);
            assert!(
                (m - oracle).abs() / m < 1e-4,
                "quadrature {oracle} vs closed form {m}"
            );
        } else {
            panic!("1.5·0.4 < 1, must be finite");
        }
    }

    // ∫ x(u)^n du on (eps, 1−eps), log-spaced near both endpoints.
    fn quadrature_moment(q: &BrfQuantile, order: f64, eps: f64) -> f64 {
        let integrand = |u: f64| q.quantile(u).unwrap().powf(order);
        // substitute u = e^v on (eps, 1/2): ∫ f(e^v) e^v dv
        let mut total = 0.0;
        let (v_lo, v_hi) = (eps.ln(), 0.5f64.ln());
        let n = 40_000;
        let h = (v_hi - v_lo) / n as f64;
        for i in 0..n {
            let v0 = v_lo + i as f64 * h;
            let f = |v: f64| integrand(v.exp()) * v.exp();
            total += h / 6.0 * (f(v0) + 4.0 * f(v0 + 0.5 * h) + f(v0 + h));
        }
        // substitute 1−u = e^w on (1/2, 1−eps)
        for i in 0..n {
            let w0 = v_lo + i as f64 * h;
            let f = |w: f64| integrand(1.0 - w.exp()) * w.exp();
            total += h / 6.0 * (f(w0) + 4.0 * f(w0 + 0.5 * h) + f(w0 + h));
        }
        total
    }

    #[test]
    fn moment_boundary_is_divergent() {
        let q = brf(1.0, 0.5, 0.2);
        assert!(q.moment(2.0).unwrap().is_divergent()); // n·a = 1 exactly
        assert!(q.moment(3.0).unwrap().is_divergent());
        assert!(!q.moment(1.9).unwrap().is_divergent());
    }

    #[test]
    fn degenerate_point_mass_moments() {
        let q = brf(3.0, 0.0, 0.0);
        for n in [1.0, 2.0, 5.5] {
            match q.moment(n).unwrap() {
                Moment::Finite(m) => assert!(
                    (m - 3.0f64.powf(n)).abs() / m < 1e-12,
                    "order {n}: {m}"
                ),
                Moment::Divergent => panic!("point mass has all moments"),
            }
        }
    }

    #[test]
    fn moment_rejects_bad_order() {
        let q = brf(1.0, 0.5, 0.5);
        assert!(q.moment(0.0).is_err());
        assert!(q.moment(-1.0).is_err());
    }

    // --- distribution scale conversion ---

    #[test]
    fn rank_size_and_distribution_scales_differ_by_n_factor() {
        let p = DgbdParams::new(100.0, 0.8, 0.3, 4999).unwrap();
        let d = p.distribution();
        assert!((d.scale - 100.0 * 5000f64.powf(0.3 - 0.8)).abs() < 1e-9);
        assert_eq!((d.a, d.b), (0.8, 0.3));
        // symmetric shapes keep the scale untouched
        let s = DgbdParams::new(10.0, 0.5, 0.5, 999).unwrap();
        assert!((s.distribution().scale - 10.0).abs() < 1e-12);
    }
}
