//! Berezin transforms, the Berezin product, the lower-bound function
//! `ℬ(z) = ~|v|²(z)·|u(z)|²`, the worst ray, and the `m = 1` closed-form
//! oracles.
//!
//! For `f ∈ F²ₘ` the Berezin transform of `|f|²` is
//! `~|f|²(z) = ∫ |f(w)|² |K_m(w,z)|² dλₘ(w) / K_m(z,z)`. All values are
//! carried in log space; exponential symbols `e^{±g}` are evaluated through
//! `g` directly, never through their truncated Taylor series, which would
//! cancel catastrophically at sweep radii.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::exp_saturating;
use crate::quadrature::{gauss_legendre_nodes, integrate_plane, integrate_polar_log, QuadratureSpec};
use crate::scalar::{from_usize, real, to_f64, Real};
use crate::special_fn::{kernel, theta0};
use crate::symbols::{FockContext, PolynomialSymbol, TaylorFunction};

/// One Berezin transform evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BerezinSample<T> {
    pub z: [T; 2],
    /// `ln ~|f|²(z)`.
    pub log_value: T,
    pub est_rel_err: T,
}

impl<T: Real> BerezinSample<T> {
    /// The transform value itself (≥ 0), saturating on overflow.
    pub fn value(&self) -> T {
        exp_saturating(self.log_value)
    }

    pub fn est_abs_err(&self) -> T {
        self.value() * self.est_rel_err
    }
}

/// Node-count/tolerance knob for Berezin quadrature; counts are scaled
/// internally with the evaluation radius so the kernel peak stays resolved.
#[derive(Debug, Clone, Copy)]
pub struct BerezinQuality<T> {
    pub base_radial: usize,
    pub base_angular: usize,
    pub tol: T,
}

impl<T: Real> Default for BerezinQuality<T> {
    fn default() -> Self {
        BerezinQuality {
            base_radial: 160,
            base_angular: 64,
            tol: real::<T>(1e-9),
        }
    }
}

/// Truncation radius: decay of `|K(w,z)|² e^{-|w|^{2m}}` relative to its
/// peak is `e^{-(r^m - x^m)²}`; the envelope argument adds `|f|²` growth.
/// Errors when the envelope never decays (borderline `d = 2m` symbols whose
/// coefficient makes the defining integral diverge).
fn berezin_rmax<T: Real>(m: T, x: T, growth_log: impl Fn(T) -> T, tol: T) -> Result<T> {
    let l = (T::one() / tol).ln() + real::<T>(30.0);
    let mut r = x.max(T::one()) + real::<T>(0.5);
    loop {
        let gap = (r.powf(m) - x.powf(m)).powi(2) - growth_log(r) - growth_log(x);
        if gap >= l {
            return Ok(r);
        }
        if r > real::<T>(1e4) {
            return Err(Error::DivergentNorm(
                "Berezin integrand envelope never decays below tolerance".into(),
            ));
        }
        r += real::<T>(0.125);
    }
}

fn berezin_spec<T: Real>(
    m: T,
    x: T,
    r_max: T,
    q: &BerezinQuality<T>,
) -> Result<QuadratureSpec<T>> {
    // radial peak width ~ x^{1-m}/m near r = x
    let width = x.max(T::one()).powf(T::one() - m) / m;
    let panels = to_f64(r_max / (width * real::<T>(2.5))).ceil().max(1.0) as usize;
    let n_radial = (panels.clamp(8, 96) * 16).max(q.base_radial);
    // angular peak width ~ √2/(m (x·r)^{m/2}) at r ≈ x
    let theta_w = real::<T>(2.0).sqrt() / (m * x.max(T::one()).powf(m));
    let per = to_f64((T::PI() + T::PI()) / theta_w * real::<T>(6.0)).ceil() as usize;
    let mut n_angular = per.clamp(q.base_angular, 4096);
    if n_angular % 2 == 1 {
        n_angular += 1;
    }
    QuadratureSpec::new(n_radial, n_angular, r_max, q.tol)
}

/// `ln ~|e^{sign·g}|²(z)` by full 2-D log-space quadrature.
pub fn berezin_sq_exp_log<T: Real>(
    g: &PolynomialSymbol<T>,
    sign: T,
    ctx: &FockContext<T>,
    z: Complex<T>,
    q: &BerezinQuality<T>,
) -> Result<BerezinSample<T>> {
    let m = ctx.m();
    let x = z.norm();
    let two_m = real::<T>(2.0) * m;
    let kzz = kernel(ctx, z, z).log_abs;
    let r_max = berezin_rmax(m, x, |r| g.growth_log_envelope(r), q.tol)?;
    let spec = berezin_spec(m, x, r_max, q)?;
    let two = real::<T>(2.0);
    let li = integrate_polar_log(
        |w: Complex<T>| {
            let k = kernel(ctx, w, z);
            two * sign * g.eval(w).re + two * k.log_abs - w.norm().powf(two_m) - kzz
        },
        &spec,
    )?;
    Ok(BerezinSample {
        z: [z.re, z.im],
        log_value: li.log_value,
        est_rel_err: li.est_rel_err,
    })
}

/// Berezin transform of `|f|²` for a truncated Taylor function (the general
/// path used by the oracles; exponential symbols should use
/// [`berezin_sq_exp_log`] instead at large radii).
pub fn berezin_sq<T: Real>(
    f: &TaylorFunction<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    spec: &QuadratureSpec<T>,
) -> Result<BerezinSample<T>> {
    let m = ctx.m();
    let two_m = real::<T>(2.0) * m;
    let kzz = kernel(ctx, z, z).log_abs;
    let two = real::<T>(2.0);
    let li = integrate_polar_log(
        |w: Complex<T>| {
            let fv = f.eval(w).norm();
            if fv == T::zero() {
                return T::neg_infinity();
            }
            let k = kernel(ctx, w, z);
            two * fv.ln() + two * k.log_abs - w.norm().powf(two_m) - kzz
        },
        spec,
    )?;
    Ok(BerezinSample {
        z: [z.re, z.im],
        log_value: li.log_value,
        est_rel_err: li.est_rel_err,
    })
}

/// General Berezin transform `~f(z) = ∫ f(w) |k_z(w)|² dλₘ(w)` of a
/// complex-valued function (used by the fixed-point and consistency checks).
pub fn berezin_transform<T: Real>(
    f: impl Fn(Complex<T>) -> Complex<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    spec: &QuadratureSpec<T>,
) -> Result<Complex<T>> {
    let kzz = kernel(ctx, z, z).log_abs;
    let v = integrate_plane(
        |w: Complex<T>| {
            let k = kernel(ctx, w, z);
            f(w) * (real::<T>(2.0) * k.log_abs - kzz).exp()
        },
        ctx.m(),
        spec,
    )?;
    Ok(v.value)
}

/// `~|u|²(z) · ~|v|²(z)` for truncated Taylor symbols.
pub fn berezin_product<T: Real>(
    u: &TaylorFunction<T>,
    v: &TaylorFunction<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let a = berezin_sq(u, ctx, z, spec)?;
    let b = berezin_sq(v, ctx, z, spec)?;
    Ok(exp_saturating(a.log_value + b.log_value))
}

/// `ln [~|e^g|²(z) · ~|e^{-g}|²(z)]` — condition (3) of the dichotomy.
pub fn berezin_product_exp_log<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    q: &BerezinQuality<T>,
) -> Result<BerezinSample<T>> {
    let a = berezin_sq_exp_log(g, T::one(), ctx, z, q)?;
    let b = berezin_sq_exp_log(g, -T::one(), ctx, z, q)?;
    Ok(BerezinSample {
        z: [z.re, z.im],
        log_value: a.log_value + b.log_value,
        est_rel_err: a.est_rel_err + b.est_rel_err,
    })
}

/// `ln ℬ(z) = ln |e^{g(z)}|² + ln ~|e^{-g}|²(z)`.
pub fn curly_b_log<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    q: &BerezinQuality<T>,
) -> Result<BerezinSample<T>> {
    let v = berezin_sq_exp_log(g, -T::one(), ctx, z, q)?;
    Ok(BerezinSample {
        z: [z.re, z.im],
        log_value: real::<T>(2.0) * g.eval(z).re + v.log_value,
        est_rel_err: v.est_rel_err,
    })
}

/// Windowed variant of `ln ℬ`: the angular integral is restricted to
/// `|θ - arg z| ≤ window_c·θ₀(r|z|)`, the window that drives the
/// lower-bound analysis. Always ≤ the full value.
pub fn curly_b_windowed_log<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    window_c: T,
    q: &BerezinQuality<T>,
) -> Result<T> {
    let m = ctx.m();
    let x = z.norm();
    let phi = z.arg();
    if x <= T::zero() {
        return Err(Error::Domain("windowed ℬ needs z ≠ 0".into()));
    }
    let two = real::<T>(2.0);
    let two_m = two * m;
    let kzz = kernel(ctx, z, z).log_abs;
    let r_max = berezin_rmax(m, x, |r| g.growth_log_envelope(r), q.tol)?;

    let n_r = q
        .base_radial
        .max(16 * (to_f64(r_max * m * x.max(T::one()).powf(m - T::one())).ceil() as usize).clamp(8, 96));
    let radial = gauss_legendre_nodes(T::zero(), r_max, n_r);
    let mut acc = crate::logspace::LogSum::new();
    for &(r, wr) in &radial {
        let half_w = (window_c * theta0(m, (r * x).max(real::<T>(0.25)))).min(T::PI());
        let ang = gauss_legendre_nodes(phi - half_w, phi + half_w, 32);
        for &(th, wt) in &ang {
            let w = Complex::from_polar(r, th);
            let k = kernel(ctx, w, z);
            let lv = -two * g.eval(w).re + two * k.log_abs - r.powf(two_m) - kzz;
            acc.add_log(lv + (wr * r * wt).ln());
        }
    }
    Ok(two * g.eval(z).re + acc.value())
}

/// The direction `φ` of extremal growth: smallest-magnitude solution of
/// `α_d + dφ ≡ 0 (mod 2π)`, ties resolved toward positive `φ`.
pub fn worst_ray<T: Real>(g: &PolynomialSymbol<T>) -> Result<T> {
    let d = g.degree();
    if d == 0 {
        return Err(Error::Domain("worst ray undefined for constant symbols".into()));
    }
    let alpha = g.leading_argument();
    let df = real::<T>(d as f64);
    let two_pi = T::PI() + T::PI();
    let mut best = (-alpha) / df;
    for k in -(d as i64)..=(d as i64) {
        let cand = (two_pi * real::<T>(k as f64) - alpha) / df;
        let better = cand.abs() < best.abs() - real::<T>(1e-15)
            || ((cand.abs() - best.abs()).abs() <= real::<T>(1e-15) && cand > best);
        if better {
            best = cand;
        }
    }
    Ok(best)
}

/// `m = 1` closed form: `~|b e^{āz}|²(z) = |b|² e^{|a|² + 2 Re(ā z)}`.
pub fn closed_form_berezin_m1<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> T {
    (b.norm_sqr().ln() + a.norm_sqr() + real::<T>(2.0) * (a.conj() * z).re).exp()
}

/// A logged sweep along a ray.
#[derive(Debug, Clone, Serialize)]
pub struct RaySweep<T> {
    pub phi: T,
    pub xs: Vec<T>,
    pub log_values: Vec<T>,
    pub est_errs: Vec<T>,
}

impl<T: Real> RaySweep<T> {
    /// CSV rows `(x, log_value, est_err)`.
    pub fn csv_rows(&self) -> Vec<(f64, f64, f64)> {
        self.xs
            .iter()
            .zip(self.log_values.iter().zip(&self.est_errs))
            .map(|(&x, (&lv, &e))| (to_f64(x), to_f64(lv), to_f64(e)))
            .collect()
    }
}

/// Sweeps `ln ℬ` along the worst ray over a radius grid, dropping trailing
/// points whose quadrature error estimate exceeds 10%.
pub fn ray_sweep_curly_b<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    xs: &[T],
    q: &BerezinQuality<T>,
) -> Result<RaySweep<T>> {
    let phi = worst_ray(g)?;
    sweep_ray(xs, phi, |z| curly_b_log(g, ctx, z, q))
}

/// Sweeps `ln (~|u|²·~|v|²)` for `u = e^g`, `v = e^{-g}` along the worst ray.
pub fn ray_sweep_product<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    xs: &[T],
    q: &BerezinQuality<T>,
) -> Result<RaySweep<T>> {
    let phi = worst_ray(g)?;
    sweep_ray(xs, phi, |z| berezin_product_exp_log(g, ctx, z, q))
}

fn sweep_ray<T: Real>(
    xs: &[T],
    phi: T,
    eval: impl Fn(Complex<T>) -> Result<BerezinSample<T>> + Sync,
) -> Result<RaySweep<T>> {
    let samples: Result<Vec<BerezinSample<T>>> = xs
        .par_iter()
        .map(|&x| eval(Complex::from_polar(x, phi)))
        .collect();
    let samples = samples?;
    let mut out = RaySweep {
        phi,
        xs: Vec::new(),
        log_values: Vec::new(),
        est_errs: Vec::new(),
    };
    for (&x, s) in xs.iter().zip(&samples) {
        if s.est_rel_err > real::<T>(0.1) {
            break;
        }
        out.xs.push(x);
        out.log_values.push(s.log_value);
        out.est_errs.push(s.est_rel_err);
    }
    if out.xs.len() < 4 {
        return Err(Error::Quadrature(
            "ray sweep: fewer than 4 radii below the 10% error threshold".into(),
        ));
    }
    Ok(out)
}

/// Geometric radius grid on `[lo, hi]`.
pub fn geometric_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let q = (hi / lo).powf(T::one() / from_usize::<T>(n - 1));
    (0..n).map(|i| lo * q.powf(from_usize::<T>(i))).collect()
}

/// Growth-rate verification of `ln ℬ` along the worst ray.
#[derive(Debug, Clone, Serialize)]
pub struct RateCheckReport<T> {
    pub sweep: RaySweep<T>,
    /// Fitted coefficient `β` in `ln ℬ ≈ β x^p + c` over the top half.
    pub fitted_rate: T,
    pub target_rate: T,
    pub target_exponent: T,
    /// `d ≤ m`: the bounded direction (flatness check instead of a rate).
    pub bounded: bool,
    /// Spread `max - min` of `ln ℬ` over the grid (bounded-branch evidence).
    pub log_spread: T,
    pub pass: bool,
}

/// Fits the growth of `ln ℬ` along the worst ray and compares it against the
/// minimizer-analysis target:
/// `β → 4a²/(1+2a)` with `p = 2m` when `d = 2m`, and
/// `β → a²d²/m²` with `p = 2d-2m` when `m < d < 2m`;
/// for `d ≤ m` the check is flatness of `ln ℬ` (bounded direction).
pub fn rate_check<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    xs: &[T],
    q: &BerezinQuality<T>,
    bounded_spread_tol: T,
) -> Result<RateCheckReport<T>> {
    let m = ctx.m();
    let d = g.degree();
    let df = real::<T>(d as f64);
    let two = real::<T>(2.0);
    let a = g.leading_modulus();
    if df > two * m + real::<T>(1e-9) {
        return Err(Error::Domain(format!(
            "rate_check requires d ≤ 2m (d = {d}, m = {m})"
        )));
    }
    let sweep = ray_sweep_curly_b(g, ctx, xs, q)?;

    let bounded = df <= m + real::<T>(1e-9);
    let lo = sweep
        .log_values
        .iter()
        .fold(T::infinity(), |acc, &v| acc.min(v));
    let hi = sweep
        .log_values
        .iter()
        .fold(T::neg_infinity(), |acc, &v| acc.max(v));
    let log_spread = hi - lo;

    if bounded {
        return Ok(RateCheckReport {
            fitted_rate: T::zero(),
            target_rate: T::zero(),
            target_exponent: T::zero(),
            bounded,
            log_spread,
            pass: log_spread <= bounded_spread_tol,
            sweep,
        });
    }

    let (target_rate, p) = if (df - two * m).abs() < real::<T>(1e-9) {
        // exact minimum of (t-X)² - 2a(X²-t²): -h_min = (4a²/(1+2a))·x^{2m}
        (real::<T>(4.0) * a * a / (T::one() + two * a), two * m)
    } else {
        (a * a * df * df / (m * m), two * df - two * m)
    };

    // least squares of ln ℬ against x^p over the top half of the grid
    let half = sweep.xs.len() / 2;
    let pts: Vec<(T, T)> = sweep.xs[half..]
        .iter()
        .zip(&sweep.log_values[half..])
        .map(|(&x, &lv)| (x.powf(p), lv))
        .collect();
    let (beta, _c) = fit_line(&pts);
    let ratio = beta / target_rate;
    Ok(RateCheckReport {
        fitted_rate: beta,
        target_rate,
        target_exponent: p,
        bounded,
        log_spread,
        pass: ratio >= real::<T>(0.8) && ratio <= real::<T>(1.25),
        sweep,
    })
}

/// Log-log slope of a sweep's log-values over its top half.
pub fn growth_exponent<T: Real>(sweep: &RaySweep<T>) -> T {
    let half = sweep.xs.len() / 2;
    let pts: Vec<(T, T)> = sweep.xs[half..]
        .iter()
        .zip(&sweep.log_values[half..])
        .filter(|(_, &lv)| lv.is_finite() && lv > T::zero())
        .map(|(&x, &lv)| (x.ln(), lv.ln()))
        .collect();
    if pts.len() < 2 {
        return T::zero();
    }
    fit_line(&pts).0
}

fn fit_line<T: Real>(pts: &[(T, T)]) -> (T, T) {
    let n = from_usize::<T>(pts.len());
    let sx = pts.iter().fold(T::zero(), |s, p| s + p.0);
    let sy = pts.iter().fold(T::zero(), |s, p| s + p.1);
    let sxx = pts.iter().fold(T::zero(), |s, p| s + p.0 * p.0);
    let sxy = pts.iter().fold(T::zero(), |s, p| s + p.0 * p.1);
    let denom = n * sxx - sx * sx;
    if denom == T::zero() {
        return (T::zero(), sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::exp_taylor;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(cs: &[(f64, f64)]) -> PolynomialSymbol<f64> {
        PolynomialSymbol::new(cs.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn normalization_constant_function() {
        // ~|1|²(z) = 1 for every z and m (k_z is a unit vector)
        let one = TaylorFunction::new(vec![c(1.0, 0.0)], 0.0);
        for &m in &[1.0f64, 1.5, 2.0] {
            let ctx = FockContext::new(m, 16).unwrap();
            for &z in &[c(0.0, 0.0), c(1.0, -0.5), c(0.4, 2.0)] {
                let r_max = berezin_rmax(m, z.norm(), |_| 0.0, 1e-9).unwrap();
                let spec = QuadratureSpec::new(192, 96, r_max, 1e-9).unwrap();
                let s = berezin_sq(&one, &ctx, z, &spec).unwrap();
                assert!(
                    s.log_value.abs() < 1e-7,
                    "m={m} z={z}: log ~1 = {}",
                    s.log_value
                );
            }
        }
    }

    #[test]
    fn closed_form_oracle_m1() {
        // quadrature Berezin of |e^{āz}|² matches |b|²e^{|a|²+2Re(āz)}
        let ctx = FockContext::new(1.0f64, 80).unwrap();
        let samples = [
            (c(1.0, 0.0), c(0.0, 0.0)),
            (c(1.0, 0.0), c(1.0, 0.0)),
            (c(0.5, -0.5), c(1.2, 0.7)),
            (c(0.0, 0.9), c(-1.5, 0.8)),
            (c(-0.3, 0.4), c(2.0, -1.0)),
        ];
        for &(a, z) in &samples {
            let g = poly(&[(0.0, 0.0), (a.conj().re, a.conj().im)]);
            let f = exp_taylor(&g, 60);
            let r_max = berezin_rmax(1.0, z.norm(), |r| 2.0 * a.norm() * r, 1e-10).unwrap();
            let spec = QuadratureSpec::new(224, 64, r_max, 1e-10).unwrap();
            let got = berezin_sq(&f, &ctx, z, &spec).unwrap();
            let want = closed_form_berezin_m1(a, c(1.0, 0.0), z);
            assert!(
                (got.value() - want).abs() <= 1e-6 * want,
                "a={a} z={z}: got {} want {want}",
                got.value()
            );
            // and the exp-symbol path agrees
            let got2 = berezin_sq_exp_log(&g, 1.0, &ctx, z, &BerezinQuality::default()).unwrap();
            assert!(
                (got2.value() - want).abs() <= 1e-6 * want,
                "exp path: a={a} z={z}: got {} want {want}",
                got2.value()
            );
        }
    }

    #[test]
    fn berezin_sq_trivial_example() {
        // m=1, f=e^z (ā=1), z=0 → e
        let ctx = FockContext::new(1.0f64, 80).unwrap();
        let g = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let f = exp_taylor(&g, 60);
        let spec = QuadratureSpec::new(224, 64, 8.0f64, 1e-10).unwrap();
        let s = berezin_sq(&f, &ctx, c(0.0, 0.0), &spec).unwrap();
        assert_relative_eq!(s.value(), std::f64::consts::E, max_relative = 1e-7);
    }

    #[test]
    fn berezin_product_constant_for_weyl_pair() {
        // m=1, u=e^z, v=e^{-z}: product ≡ e² at every z
        let ctx = FockContext::new(1.0f64, 80).unwrap();
        let g = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        for &z in &[c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)] {
            let s = berezin_product_exp_log(&g, &ctx, z, &BerezinQuality::default()).unwrap();
            assert_relative_eq!(s.value(), (2.0f64).exp(), max_relative = 1e-6);
        }
        // Taylor-function route agrees at moderate z
        let u = exp_taylor(&g, 60);
        let v = exp_taylor(&g.neg(), 60);
        let spec = QuadratureSpec::new(224, 64, 9.0f64, 1e-10).unwrap();
        let p = berezin_product(&u, &v, &ctx, c(0.7, -0.4), &spec).unwrap();
        assert_relative_eq!(p, (2.0f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn cauchy_schwarz_lower_bound() {
        // ~|f|²(z) ≥ |f(z)|²
        let ctx = FockContext::new(2.0f64, 80).unwrap();
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let f = exp_taylor(&g, 60);
        let spec = QuadratureSpec::new(224, 96, 3.6f64, 1e-9).unwrap();
        for &z in &[c(1.0, 0.0), c(0.5, 0.5), c(0.0, 1.2)] {
            let s = berezin_sq(&f, &ctx, z, &spec).unwrap();
            let fz2 = f.eval(z).norm_sqr();
            assert!(
                s.value() * (1.0 + s.est_rel_err) + 1e-12 >= fz2,
                "z={z}: {} < {fz2}",
                s.value()
            );
        }
    }

    #[test]
    fn berezin_fixed_point_on_polynomials() {
        // ~u = u for polynomials of degree ≤ 4
        let ctx = FockContext::new(1.5f64, 16).unwrap();
        let u = |w: Complex64| {
            c(0.3, 0.1) + w * c(1.0, 0.0) + w * w * c(0.0, -0.5) + w * w * w * w * c(0.2, 0.0)
        };
        let spec = QuadratureSpec::new(256, 64, 6.5f64, 1e-10).unwrap();
        for &z in &[c(0.0, 0.0), c(1.0, 0.5), c(-0.8, 1.1)] {
            let got = berezin_transform(u, &ctx, z, &spec).unwrap();
            let want = u(z);
            assert!(
                (got - want).norm() <= 1e-6 * (1.0 + want.norm()),
                "z={z}: got {got} want {want}"
            );
        }
    }

    #[test]
    fn worst_ray_examples() {
        for d in 1..=4usize {
            let g = PolynomialSymbol::monomial(c(1.0, 0.0), d).unwrap();
            assert_eq!(worst_ray(&g).unwrap(), 0.0);
        }
        // g = -z² → π/2 (tie resolved positive)
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]);
        assert_relative_eq!(
            worst_ray(&g).unwrap(),
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-12
        );
        // g = i z³ → -π/6
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 1.0)]);
        assert_relative_eq!(
            worst_ray(&g).unwrap(),
            -std::f64::consts::FRAC_PI_6,
            max_relative = 1e-12
        );
        assert!(worst_ray(&PolynomialSymbol::<f64>::zero()).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(
            closed_form_berezin_m1(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            std::f64::consts::E,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed_form_berezin_m1(c(0.0, 0.0), c(1.0, 0.0), c(2.0, -1.0)),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed_form_berezin_m1(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)),
            (3.0f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn curly_b_trivial_and_linear() {
        // g = 0 → ℬ ≡ 1
        let ctx = FockContext::new(1.5f64, 16).unwrap();
        let q = BerezinQuality::default();
        for &z in &[c(0.5, 0.0), c(0.0, 1.5)] {
            let s = curly_b_log(&PolynomialSymbol::zero(), &ctx, z, &q).unwrap();
            assert!(s.log_value.abs() < 1e-6);
        }
        // m=1, g=z, z=0 → e
        let ctx1 = FockContext::new(1.0f64, 16).unwrap();
        let g = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let s = curly_b_log(&g, &ctx1, c(0.0, 0.0), &q).unwrap();
        assert_relative_eq!(s.value(), std::f64::consts::E, max_relative = 1e-6);
    }

    #[test]
    fn windowed_below_full() {
        let ctx = FockContext::new(2.0f64, 16).unwrap();
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let q = BerezinQuality::default();
        let z = Complex64::from_polar(2.0, worst_ray(&g).unwrap());
        let full = curly_b_log(&g, &ctx, z, &q).unwrap().log_value;
        let windowed = curly_b_windowed_log(&g, &ctx, z, 1.0, &q).unwrap();
        assert!(windowed <= full + 1e-9, "windowed {windowed} > full {full}");
        // the window captures a nontrivial share of the mass on the worst ray
        assert!(windowed > full - 8.0, "window too lossy: {windowed} vs {full}");
    }

    #[test]
    fn rate_check_d_equals_2m_at_m1() {
        // m=1, d=2, a=0.3: ln ℬ = (4a²/(1+2a)) x² + const exactly
        let ctx = FockContext::new(1.0f64, 16).unwrap();
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (0.3, 0.0)]);
        let xs = geometric_grid(1.0f64, 6.0, 10);
        let rep = rate_check(&g, &ctx, &xs, &BerezinQuality::default(), 1e-3).unwrap();
        assert!(!rep.bounded);
        assert_relative_eq!(rep.target_rate, 0.225, max_relative = 1e-12);
        assert!(
            rep.pass,
            "fitted {} vs target {}",
            rep.fitted_rate,
            rep.target_rate
        );
        assert!((rep.fitted_rate / rep.target_rate - 1.0).abs() < 0.1);
    }

    #[test]
    fn rate_check_m_below_d_below_2m() {
        // m=2, d=3, a=1: exponent 2d-2m = 2, coefficient a²d²/m² = 9/4
        let ctx = FockContext::new(2.0f64, 16).unwrap();
        let g = poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let xs = geometric_grid(1.2f64, 4.2, 9);
        let rep = rate_check(&g, &ctx, &xs, &BerezinQuality::default(), 1e-3).unwrap();
        assert!(!rep.bounded);
        assert_relative_eq!(rep.target_rate, 2.25, max_relative = 1e-12);
        assert_relative_eq!(rep.target_exponent, 2.0, max_relative = 1e-12);
        assert!(
            rep.pass,
            "fitted {} vs target {} (ratio {})",
            rep.fitted_rate,
            rep.target_rate,
            rep.fitted_rate / rep.target_rate
        );
    }

    #[test]
    fn rate_check_bounded_direction() {
        // m=1, d=1: ℬ ≡ e^{a²} (constant); spread stays within 1e-3
        let ctx = FockContext::new(1.0f64, 16).unwrap();
        let g = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let xs: Vec<f64> = (0..=8).map(|i| 0.5 + 5.5 * (i as f64) / 8.0).collect();
        let rep = rate_check(&g, &ctx, &xs, &BerezinQuality::default(), 1e-3).unwrap();
        assert!(rep.bounded);
        assert!(rep.pass, "spread {}", rep.log_spread);
        assert!((rep.sweep.log_values[0] - 1.0).abs() < 1e-4); // ℬ = e^{a²}, a=1
    }

    #[test]
    fn product_monotonicity_dichotomy() {
        // u=e^g, v=e^{-g}: product flat for d ≤ m, strictly increasing for d > m
        let ctx = FockContext::new(2.0f64, 16).unwrap();
        let q = BerezinQuality::default();
        let g3 = poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let xs = [1.0f64, 1.5, 2.0, 3.0];
        let sweep = ray_sweep_product(&g3, &ctx, &xs, &q).unwrap();
        let n = sweep.log_values.len();
        assert!(
            sweep.log_values[n - 1] > sweep.log_values[n - 2] + 1.0,
            "product not increasing: {:?}",
            sweep.log_values
        );

        // bounded side: the product is bounded (not constant for m > 1);
        // its fitted growth coefficient against x^{2m} must be negligible
        // next to the unbounded side's 2·(a²d²/m²)
        let g2 = poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let xs2 = [1.0f64, 1.6, 2.2, 2.8, 3.4, 4.0];
        let sweep = ray_sweep_product(&g2, &ctx, &xs2, &q).unwrap();
        let half = sweep.xs.len() / 2;
        let pts: Vec<(f64, f64)> = sweep.xs[half..]
            .iter()
            .zip(&sweep.log_values[half..])
            .map(|(&x, &lv)| (x.powi(4), lv))
            .collect();
        let (beta, _) = fit_line(&pts);
        assert!(beta.abs() < 0.05, "bounded product growth coefficient: {beta}");
    }

    #[test]
    fn ray_sweep_csv_shape() {
        let sweep = RaySweep {
            phi: 0.0f64,
            xs: vec![1.0, 2.0],
            log_values: vec![0.5, 1.5],
            est_errs: vec![1e-8, 2e-8],
        };
        let rows = sweep.csv_rows();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].0, 1.0);
        assert!((rows[1].1 - 1.5).abs() < 1e-15);
    }
}
