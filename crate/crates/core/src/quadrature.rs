//! Quadrature against `dλₘ(z) = e^{-|z|^{2m}} dA(z)`: a composite
//! Gauss-Legendre radial rule crossed with a midpoint angular rule, with
//! closed-form moment oracles and an orthonormality check of the monomial
//! basis.
//!
//! Two entry points:
//! * [`integrate_plane`] — complex-valued integrands against `dλₘ`, for
//!   moderate magnitudes;
//! * [`integrate_polar_log`] — nonnegative integrands supplied as their
//!   natural logarithm, summed with max-shift rescaling; this is the path for
//!   Berezin transforms and Schur integrals whose node values span thousands
//!   of orders of magnitude.
//!
//! Error estimates come from node-doubling comparison; no asymptotic error
//! theory is attempted.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::logspace::LogSum;
use crate::scalar::{from_usize, real, Real};
use crate::special_fn::ln_gamma;
use crate::symbols::FockContext;

/// 16-point Gauss-Legendre rule on [-1, 1] (nodes, weights).
const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.027152459411754037),
    (-0.9445750230732326, 0.062253523938647706),
    (-0.8656312023878318, 0.09515851168249259),
    (-0.755404408355003, 0.12462897125553403),
    (-0.6178762444026438, 0.14959598881657676),
    (-0.45801677765722737, 0.16915651939500262),
    (-0.2816035507792589, 0.1826034150449236),
    (-0.09501250983763745, 0.18945061045506859),
    (0.09501250983763745, 0.18945061045506859),
    (0.2816035507792589, 0.1826034150449236),
    (0.45801677765722737, 0.16915651939500262),
    (0.6178762444026438, 0.14959598881657676),
    (0.755404408355003, 0.12462897125553403),
    (0.8656312023878318, 0.09515851168249259),
    (0.9445750230732326, 0.062253523938647706),
    (0.9894009349916499, 0.027152459411754037),
];

/// Composite 16-point Gauss-Legendre nodes/weights on `[lo, hi]` with at
/// least `n` nodes total (rounded up to whole panels).
pub(crate) fn gauss_legendre_nodes<T: Real>(lo: T, hi: T, n: usize) -> Vec<(T, T)> {
    let panels = n.div_ceil(16).max(1);
    let width = (hi - lo) / from_usize::<T>(panels);
    let half = width * real::<T>(0.5);
    let mut out = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let mid = lo + width * from_usize::<T>(p) + half;
        for &(x, w) in &GL16 {
            out.push((mid + half * real::<T>(x), half * real::<T>(w)));
        }
    }
    out
}

/// Midpoint (periodic trapezoid) angular nodes on `[-π, π)`, weight `2π/n`.
pub(crate) fn angular_nodes<T: Real>(n: usize) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    let step = two_pi / from_usize::<T>(n);
    (0..n)
        .map(|j| -T::PI() + step * (from_usize::<T>(j) + real::<T>(0.5)))
        .collect()
}

/// Node counts, truncation radius and target tolerance of a product rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec<T> {
    pub n_radial: usize,
    pub n_angular: usize,
    pub r_max: T,
    pub tol: T,
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(n_radial: usize, n_angular: usize, r_max: T, tol: T) -> Result<Self> {
        if n_radial < 8 {
            return Err(Error::Config(format!("n_radial must be >= 8, got {n_radial}")));
        }
        if n_angular < 8 || n_angular % 2 != 0 {
            return Err(Error::Config(format!(
                "n_angular must be even and >= 8, got {n_angular}"
            )));
        }
        if !(r_max > T::zero()) || !(tol > T::zero()) {
            return Err(Error::Config("r_max and tol must be positive".into()));
        }
        Ok(QuadratureSpec {
            n_radial,
            n_angular,
            r_max,
            tol,
        })
    }

    /// Default rule for an integrand whose magnitude on `|z| = r` is bounded
    /// by `e^{log_envelope}`: the radius solves
    /// `e^{-r^{2m}} e^{log_envelope} < tol`.
    pub fn with_decay_envelope(m: T, tol: T, log_envelope: T) -> Result<Self> {
        let l = (T::one() / tol).ln() + log_envelope.max(T::zero()) + real::<T>(8.0);
        let r_max = l.powf(T::one() / (real::<T>(2.0) * m));
        Self::new(128, 64, r_max, tol)
    }

    pub fn default_for(m: T) -> Self {
        Self::with_decay_envelope(m, real::<T>(1e-10), T::zero()).expect("valid default spec")
    }

    fn doubled(&self) -> Self {
        QuadratureSpec {
            n_radial: self.n_radial * 2,
            n_angular: self.n_angular * 2,
            r_max: self.r_max,
            tol: self.tol,
        }
    }
}

/// Result of a weighted plane integral.
#[derive(Debug, Clone, Copy)]
pub struct PlanarIntegral<T> {
    pub value: Complex<T>,
    pub est_abs_err: T,
    /// (radial, angular) node counts of the fine pass.
    pub nodes_used: (usize, usize),
}

fn plane_pass<T: Real, F>(f: &F, m: T, spec: &QuadratureSpec<T>) -> Result<Complex<T>>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let radial = gauss_legendre_nodes(T::zero(), spec.r_max, spec.n_radial);
    let thetas = angular_nodes::<T>(spec.n_angular);
    let dtheta = (T::PI() + T::PI()) / from_usize::<T>(spec.n_angular);
    let two_m = real::<T>(2.0) * m;
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(r, wr) in &radial {
        let weight = wr * r * (-r.powf(two_m)).exp() * dtheta;
        if weight == T::zero() {
            continue;
        }
        let mut ring = Complex::new(T::zero(), T::zero());
        for &th in &thetas {
            let z = Complex::from_polar(r, th);
            let v = f(z);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Quadrature(format!(
                    "integrand non-finite at node z = {z}"
                )));
            }
            ring += v;
        }
        acc += ring * weight;
    }
    Ok(acc)
}

/// `∫_ℂ f(z) e^{-|z|^{2m}} dA(z)` over the truncated disk `|z| ≤ r_max`,
/// with a node-doubling error estimate.
pub fn integrate_plane<T: Real, F>(
    f: F,
    m: T,
    spec: &QuadratureSpec<T>,
) -> Result<PlanarIntegral<T>>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let coarse = plane_pass(&f, m, spec)?;
    let fine_spec = spec.doubled();
    let fine = plane_pass(&f, m, &fine_spec)?;
    Ok(PlanarIntegral {
        value: fine,
        est_abs_err: (fine - coarse).norm(),
        nodes_used: (fine_spec.n_radial, fine_spec.n_angular),
    })
}

/// Result of a log-space polar integral.
#[derive(Debug, Clone, Copy)]
pub struct LogIntegral<T> {
    /// `ln ∫ exp(f_log) dA`.
    pub log_value: T,
    /// Node-doubling discrepancy of the log value (≈ relative error).
    pub est_rel_err: T,
    pub nodes_used: (usize, usize),
}

fn polar_log_pass<T: Real, F>(f_log: &F, spec: &QuadratureSpec<T>) -> Result<T>
where
    F: Fn(Complex<T>) -> T,
{
    let radial = gauss_legendre_nodes(T::zero(), spec.r_max, spec.n_radial);
    let thetas = angular_nodes::<T>(spec.n_angular);
    let dtheta = (T::PI() + T::PI()) / from_usize::<T>(spec.n_angular);
    let mut acc = LogSum::new();
    for &(r, wr) in &radial {
        let log_weight = wr.ln() + r.ln() + dtheta.ln();
        for &th in &thetas {
            let z = Complex::from_polar(r, th);
            let lv = f_log(z);
            if lv.is_nan() || lv == T::infinity() {
                return Err(Error::Quadrature(format!(
                    "log-integrand invalid ({lv}) at node z = {z}"
                )));
            }
            acc.add_log(lv + log_weight);
        }
    }
    Ok(acc.value())
}

/// `ln ∫_{|z| ≤ r_max} exp(f_log(z)) dA(z)` for nonnegative integrands given
/// in log form; immune to overflow of individual node values.
pub fn integrate_polar_log<T: Real, F>(f_log: F, spec: &QuadratureSpec<T>) -> Result<LogIntegral<T>>
where
    F: Fn(Complex<T>) -> T,
{
    let coarse = polar_log_pass(&f_log, spec)?;
    let fine_spec = spec.doubled();
    let fine = polar_log_pass(&f_log, &fine_spec)?;
    Ok(LogIntegral {
        log_value: fine,
        est_rel_err: (fine - coarse).abs(),
        nodes_used: (fine_spec.n_radial, fine_spec.n_angular),
    })
}

/// `ln ∫_ℂ |z|^{2k} dλₘ = ln[(π/m) Γ((k+1)/m)]`, the log squared monomial norm.
pub fn moment_log<T: Real>(m: T, k: usize) -> T {
    T::PI().ln() - m.ln() + ln_gamma((from_usize::<T>(k) + T::one()) / m)
}

/// `(π/m) Γ((k+1)/m) = ∫_ℂ |z|^{2k} dλₘ`, the squared monomial norm `h_k`.
pub fn moment<T: Real>(m: T, k: usize) -> T {
    moment_log(m, k).exp()
}

/// Gram matrix of the normalized monomials `e_k = z^k/√h_k` under quadrature,
/// with its deviation from the identity.
#[derive(Debug, Clone)]
pub struct GramReport<T> {
    pub entries: Vec<Vec<Complex<T>>>,
    pub max_offdiag: T,
    pub max_diag_dev: T,
}

pub fn gram_matrix<T: Real>(
    ctx: &FockContext<T>,
    kmax: usize,
    spec: &QuadratureSpec<T>,
) -> Result<GramReport<T>> {
    if kmax < 1 {
        return Err(Error::Config("gram_matrix requires kmax >= 1".into()));
    }
    let n = kmax + 1;
    let mut entries = vec![vec![Complex::new(T::zero(), T::zero()); n]; n];
    let mut max_offdiag = T::zero();
    let mut max_diag_dev = T::zero();
    for j in 0..n {
        for k in j..n {
            let norm = ((ctx.log_h(j) + ctx.log_h(k)) * real::<T>(-0.5)).exp();
            let integral = integrate_plane(
                |z: Complex<T>| z.powu(j as u32) * z.powu(k as u32).conj() * norm,
                ctx.m(),
                spec,
            )?;
            entries[j][k] = integral.value;
            entries[k][j] = integral.value.conj();
            if j == k {
                max_diag_dev = max_diag_dev.max((integral.value.re - T::one()).abs());
            } else {
                max_offdiag = max_offdiag.max(integral.value.norm());
            }
        }
    }
    Ok(GramReport {
        entries,
        max_offdiag,
        max_diag_dev,
    })
}
