//! Log-gamma, the Mittag-Leffler function `E_{1/m,1/m}`, the reproducing
//! kernel `K_m`, and its asymptotic envelopes.
//!
//! The kernel of `F²ₘ` is `K_m(z,w) = (m/π) E_{1/m,1/m}(z w̄)`. The evaluator
//! switches between three regimes:
//!
//! * `Series` — compensated, rescaled Taylor summation (small `|z|`, and the
//!   reference path for oracles),
//! * `AsymptoticPrincipal` — `m z^{m-1} e^{z^m}` minus the reciprocal-power
//!   correction series, in the sector `|arg z| ≤ π/(2m)`,
//! * `OscillatorySeries` — the reciprocal-power series alone (plus the
//!   exponential term while `|arg z| ≤ π/m`, where it is still present but
//!   subdominant).
//!
//! Every value is carried as `log_abs` + unit phase so that callers can form
//! ratios of astronomically large kernel values in log space.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::logspace::exp_saturating;
use crate::scalar::{real, Real};
use crate::symbols::{fock_norm_log, FockContext, TaylorFunction};

/// Lanczos g = 7, n = 9 coefficients (Godfrey). Relative error of the
/// reconstructed gamma stays below 3e-15 on the positive axis.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for positive `x`; callers guarantee the domain.
pub(crate) fn ln_gamma<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero());
    let half = real::<T>(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let g = real::<T>(LANCZOS_G);
    let mut acc = real::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += real::<T>(c) / (z + real::<T>(i as f64));
    }
    let t = z + g + half;
    let two_pi = T::PI() + T::PI();
    half * two_pi.ln() + (z + half) * t.ln() - t + acc.ln()
}

/// `ln Γ(x)` with domain checking: `x > 0` required.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// `1/Γ(y)` for arbitrary real `y`; exactly zero at the poles `y = 0, -1, ...`.
pub(crate) fn recip_gamma<T: Real>(y: T) -> T {
    if y <= T::zero() {
        let r = y.round();
        if (y - r).abs() < real::<T>(1e-9) {
            return T::zero();
        }
        // 1/Γ(y) = Γ(1-y) sin(πy) / π
        let pi = T::PI();
        return ((T::one() - y).ln_gamma_pos()).exp() * (pi * y).sin() / pi;
    }
    (-ln_gamma(y)).exp()
}

trait LnGammaPos {
    fn ln_gamma_pos(self) -> Self;
}
impl<T: Real> LnGammaPos for T {
    fn ln_gamma_pos(self) -> Self {
        ln_gamma(self)
    }
}

/// `θ₀(r) = r^{-m/2}/m`, the angular half-width of the kernel's inner window.
pub fn theta0<T: Real>(m: T, r: T) -> T {
    assert!(r > T::zero(), "theta0 requires r > 0");
    r.powf(-m / real::<T>(2.0)) / m
}

/// Which evaluation regime produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBranch {
    Series,
    AsymptoticPrincipal,
    OscillatorySeries,
}

/// A (possibly astronomically large) complex value in log-magnitude form.
#[derive(Debug, Clone, Copy)]
pub struct KernelValue<T> {
    /// Natural log of the magnitude (`-∞` for zero).
    pub log_abs: T,
    /// Unit-modulus direction (zero vector iff the value is zero).
    pub phase: Complex<T>,
    pub branch: KernelBranch,
    /// Heuristic relative error estimate; `1` means "unknown".
    pub est_rel_err: T,
}

impl<T: Real> KernelValue<T> {
    /// The value as an ordinary complex number, saturating at the largest
    /// finite scalar instead of overflowing to infinity.
    pub fn value(&self) -> Complex<T> {
        self.phase * exp_saturating(self.log_abs)
    }

    /// Magnitude, saturating like [`KernelValue::value`].
    pub fn abs(&self) -> T {
        exp_saturating(self.log_abs)
    }

    /// True when the magnitude exceeds the representable range, so `value()`
    /// is clamped and only `log_abs` is meaningful.
    pub fn is_saturated(&self) -> bool {
        self.log_abs >= T::max_value().ln()
    }

    fn rescaled(mut self, log_factor: T) -> Self {
        self.log_abs += log_factor;
        self
    }
}

/// Parameters of the `E_{1/m,1/m}` evaluator.
#[derive(Debug, Clone, Copy)]
pub struct MittagLefflerParams<T> {
    /// Weight exponent, `m ≥ 1`.
    pub m: T,
    /// Relative stop tolerance of the Taylor summation.
    pub series_tol: T,
    /// `|z|` above which the large-argument branches take over.
    pub switch_radius: T,
}

const LGAMMA_CACHE: usize = 4096;
const ALG_TERMS: usize = 64;
const MAX_SERIES_TERMS: usize = 100_000;

/// Evaluator for `E_{1/m,1/m}(z)`, `m ≥ 1`, with per-`m` caches.
#[derive(Debug, Clone)]
pub struct MittagLeffler<T> {
    params: MittagLefflerParams<T>,
    /// `ln Γ((k+1)/m)` for `k = 0..LGAMMA_CACHE`.
    lgamma: Vec<T>,
    /// `1/Γ((1-k)/m)` for `k = 1..=ALG_TERMS` (index `k-1`).
    alg_coeff: Vec<T>,
}

impl<T: Real> MittagLeffler<T> {
    /// Builds an evaluator with the default tolerance and a switch radius
    /// calibrated so the Taylor series is abandoned once its condition number
    /// (max partial term over result) would exceed 1e12 on the worst ray.
    pub fn new(m: T) -> Result<Self> {
        let mut ml = Self::with_params(MittagLefflerParams {
            m,
            series_tol: T::epsilon() * real::<T>(4.0),
            switch_radius: T::infinity(),
        })?;
        ml.params.switch_radius = ml.calibrate_switch_radius();
        Ok(ml)
    }

    /// Builds an evaluator with explicit parameters (no calibration sweep).
    pub fn with_params(params: MittagLefflerParams<T>) -> Result<Self> {
        if !(params.m >= T::one()) {
            return Err(Error::Domain(format!(
                "Mittag-Leffler weight must satisfy m >= 1, got {}",
                params.m
            )));
        }
        if !(params.series_tol > T::zero()) || !(params.switch_radius > T::zero()) {
            return Err(Error::Domain(
                "series_tol and switch_radius must be positive".into(),
            ));
        }
        let m = params.m;
        let lgamma = (0..LGAMMA_CACHE)
            .map(|k| ln_gamma((real::<T>(k as f64) + T::one()) / m))
            .collect();
        let alg_coeff = (1..=ALG_TERMS)
            .map(|k| recip_gamma((T::one() - real::<T>(k as f64)) / m))
            .collect();
        Ok(MittagLeffler {
            params,
            lgamma,
            alg_coeff,
        })
    }

    pub fn params(&self) -> &MittagLefflerParams<T> {
        &self.params
    }

    fn lg(&self, k: usize) -> T {
        if k < self.lgamma.len() {
            self.lgamma[k]
        } else {
            ln_gamma((real::<T>(k as f64) + T::one()) / self.params.m)
        }
    }

    /// Smallest `|z|` (worst ray, `arg z = π`) where the series condition
    /// number crosses 1e12, found by a multiplicative sweep.
    fn calibrate_switch_radius(&self) -> T {
        let limit = real::<T>(1e12).ln();
        let mut s = T::one();
        let growth = real::<T>(1.07);
        let cap = real::<T>(1000.0);
        while s < cap {
            let z = Complex::from_polar(s, T::PI());
            let (kv, max_log_term) = self.series_with_cond(z);
            let log_cond = max_log_term - kv.log_abs;
            if log_cond > limit {
                return s;
            }
            s *= growth;
        }
        cap
    }

    /// Evaluates `E_{1/m,1/m}(z)`, choosing the branch per the sector split.
    pub fn eval(&self, z: Complex<T>) -> KernelValue<T> {
        if z.norm() <= self.params.switch_radius {
            self.eval_series(z)
        } else {
            self.eval_asymptotic(z)
        }
    }

    /// Forces the compensated Taylor summation regardless of `|z|`.
    pub fn eval_series(&self, z: Complex<T>) -> KernelValue<T> {
        self.series_with_cond(z).0
    }

    fn series_with_cond(&self, z: Complex<T>) -> (KernelValue<T>, T) {
        let tol = self.params.series_tol;
        let rescale_at = (T::max_value().ln() * real::<T>(0.5)).exp();
        let rescale_log = rescale_at.ln();

        // term_k = z^k / Γ((k+1)/m), by recurrence through the Γ-ratio.
        let mut term = Complex::new((-self.lg(0)).exp(), T::zero());
        let mut sum = Complex::new(T::zero(), T::zero());
        let mut comp = Complex::new(T::zero(), T::zero());
        let mut scale = T::zero(); // value = (sum) * e^{scale}
        let mut max_log_term = T::neg_infinity();
        let mut small_streak = 0usize;
        let mut k = 0usize;
        loop {
            let t_norm = term.norm();
            if t_norm > T::zero() {
                let lt = t_norm.ln() + scale;
                if lt > max_log_term {
                    max_log_term = lt;
                }
            }
            // Kahan step
            let y = term - comp;
            let s_new = sum + y;
            comp = (s_new - sum) - y;
            sum = s_new;

            if k >= 4 {
                if t_norm <= tol * sum.norm() {
                    small_streak += 1;
                    if small_streak >= 3 {
                        break;
                    }
                } else {
                    small_streak = 0;
                }
            }
            if k + 1 >= MAX_SERIES_TERMS {
                break;
            }
            let ratio = (self.lg(k) - self.lg(k + 1)).exp();
            term = term * z * ratio;
            k += 1;

            if term.norm() > rescale_at || sum.norm() > rescale_at {
                let f = (-rescale_log).exp();
                term = term * f;
                sum = sum * f;
                comp = comp * f;
                scale += rescale_log;
            }
        }

        let norm = sum.norm();
        let (log_abs, phase) = if norm > T::zero() {
            (norm.ln() + scale, sum / norm)
        } else {
            (T::neg_infinity(), Complex::new(T::zero(), T::zero()))
        };
        let log_cond = max_log_term - log_abs;
        let n_factor = real::<T>(8.0) + real::<T>((k as f64).sqrt() * 4.0);
        let est = (n_factor * T::epsilon() * exp_saturating(log_cond) + real::<T>(4.0) * tol)
            .min(T::one());
        (
            KernelValue {
                log_abs,
                phase,
                branch: KernelBranch::Series,
                est_rel_err: est,
            },
            max_log_term,
        )
    }

    /// Large-argument branch: exponential leading term (while present) minus
    /// the reciprocal-power correction series, truncated at its smallest term.
    fn eval_asymptotic(&self, z: Complex<T>) -> KernelValue<T> {
        let m = self.params.m;
        let phi = z.arg().abs();
        let principal = phi <= T::PI() / (real::<T>(2.0) * m) + T::epsilon().sqrt();
        let branch = if principal {
            KernelBranch::AsymptoticPrincipal
        } else {
            KernelBranch::OscillatorySeries
        };

        // exponential part m z^{m-1} e^{z^m}, present while |arg z| <= π/m
        let has_exp = phi <= T::PI() / m + T::epsilon().sqrt();
        let zm = z.powf(m);
        let exp_log = m.ln() + (m - T::one()) * z.norm().ln() + zm.re;
        let exp_arg = (m - T::one()) * z.arg() + zm.im;

        // reciprocal-power series Σ_{k≥1} z^{-k} / Γ((1-k)/m)
        let inv = Complex::new(T::one(), T::zero()) / z;
        let mut p = inv;
        let mut alg = Complex::new(T::zero(), T::zero());
        let mut last_mag = T::infinity();
        let mut first_omitted = T::zero();
        for (idx, &c) in self.alg_coeff.iter().enumerate() {
            if c != T::zero() {
                let term = p * c;
                let mag = term.norm();
                if mag > last_mag {
                    first_omitted = mag;
                    break;
                }
                alg += term;
                last_mag = mag;
                first_omitted = mag;
                if mag <= T::epsilon() * alg.norm() {
                    break;
                }
            }
            if idx + 1 == self.alg_coeff.len() {
                first_omitted = last_mag;
            }
            p *= inv;
        }

        let alg_norm = alg.norm();
        let (log_abs, phase) = if has_exp {
            if alg_norm == T::zero() {
                (exp_log, Complex::from_polar(T::one(), exp_arg))
            } else if exp_log >= alg_norm.ln() {
                let u = Complex::from_polar(T::one(), exp_arg) - alg * (-exp_log).exp();
                let un = u.norm();
                (exp_log + un.ln(), u / un)
            } else {
                let alg_log = alg_norm.ln();
                let dir = alg / alg_norm;
                let v = Complex::from_polar((exp_log - alg_log).exp(), exp_arg) / dir
                    - Complex::new(T::one(), T::zero());
                let vn = v.norm();
                (alg_log + vn.ln(), dir * (v / vn))
            }
        } else if alg_norm > T::zero() {
            (alg_norm.ln(), -alg / alg_norm)
        } else {
            (T::neg_infinity(), Complex::new(T::zero(), T::zero()))
        };

        let est = if log_abs == T::neg_infinity() {
            T::one()
        } else {
            let fo = if first_omitted > T::zero() {
                exp_saturating(first_omitted.ln() - log_abs)
            } else {
                T::zero()
            };
            (fo + real::<T>(8.0) * T::epsilon()).min(T::one())
        };
        KernelValue {
            log_abs,
            phase,
            branch,
            est_rel_err: est,
        }
    }
}

/// Evaluates `E_{1/m,1/m}(z)` through a prepared evaluator.
pub fn mittag_leffler<T: Real>(ml: &MittagLeffler<T>, z: Complex<T>) -> KernelValue<T> {
    ml.eval(z)
}

/// Reproducing kernel `K_m(z,w) = (m/π) E_{1/m,1/m}(z w̄)`.
pub fn kernel<T: Real>(ctx: &FockContext<T>, z: Complex<T>, w: Complex<T>) -> KernelValue<T> {
    let factor = ctx.m().ln() - T::PI().ln();
    ctx.ml().eval(z * w.conj()).rescaled(factor)
}

/// Kernel forced through the Taylor summation; the series-side oracle for
/// asymptotics checks.
pub fn kernel_series<T: Real>(
    ctx: &FockContext<T>,
    z: Complex<T>,
    w: Complex<T>,
) -> KernelValue<T> {
    let factor = ctx.m().ln() - T::PI().ln();
    ctx.ml().eval_series(z * w.conj()).rescaled(factor)
}

/// Leading diagonal asymptotic `(m²/π) x^{2(m-1)} e^{x^{2m}}`, log-scaled.
pub fn kernel_diag_asymptotic_log<T: Real>(ctx: &FockContext<T>, x: T) -> T {
    assert!(x > T::zero(), "kernel_diag_asymptotic requires x > 0");
    let m = ctx.m();
    let two = real::<T>(2.0);
    m.ln() * two - T::PI().ln() + two * (m - T::one()) * x.ln() + x.powf(two * m)
}

/// Leading diagonal asymptotic as a [`KernelValue`] (saturating `value()`).
pub fn kernel_diag_asymptotic<T: Real>(ctx: &FockContext<T>, x: T) -> KernelValue<T> {
    KernelValue {
        log_abs: kernel_diag_asymptotic_log(ctx, x),
        phase: Complex::new(T::one(), T::zero()),
        branch: KernelBranch::AsymptoticPrincipal,
        est_rel_err: T::zero(),
    }
}

/// Outcome of the pointwise bound `|f(z)| ≤ ‖f‖ K_m(z,z)^{1/2}`.
#[derive(Debug, Clone, Copy)]
pub struct PointwiseBound<T> {
    pub lhs_log: T,
    pub rhs_log: T,
    pub pass: bool,
}

/// Checks the reproducing-kernel pointwise bound for a truncated entire
/// function; both sides are compared in log space.
pub fn pointwise_bound_check<T: Real>(
    ctx: &FockContext<T>,
    f: &TaylorFunction<T>,
    z: Complex<T>,
) -> Result<PointwiseBound<T>> {
    let norm_log = fock_norm_log(f, ctx)?;
    let kzz = kernel(ctx, z, z);
    let lhs_log = f.eval(z).norm().ln();
    let rhs_log = norm_log + kzz.log_abs * real::<T>(0.5);
    let slack = (real::<T>(1e-9) + kzz.est_rel_err * real::<T>(2.0)).ln_1p();
    Ok(PointwiseBound {
        lhs_log,
        rhs_log,
        pass: lhs_log <= rhs_log + slack,
    })
}
