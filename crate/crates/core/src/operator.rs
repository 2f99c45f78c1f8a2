//! Finite sections of the Toeplitz product `T_u T_v̄`, matrix-free spectral
//! norm estimation, the Schur-test kernel and bound, and the Sarason
//! two-variable function with its stress-test points.
//!
//! In the orthonormal monomial basis `e_k = z^k/√h_k` the compression
//! `P_N T_u T_v̄ P_N` has the exact entries
//!
//! ```text
//! A_{jk} = Σ_{l=0}^{min(j,k)} u_{j-l} · conj(v_{k-l}) · √(h_j h_k)/h_l
//! ```
//!
//! (finite sums, no quadrature). Nested compressions never decrease the
//! largest singular value, so the curve `σ(N)` is boundedness evidence from
//! below; the Schur bound is a certified upper bound.

use num_complex::Complex;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::log_add_exp;
use crate::quadrature::{integrate_polar_log, LogIntegral, QuadratureSpec};
use crate::scalar::{from_usize, real, to_f64, Real};
use crate::special_fn::{kernel, KernelValue};
use crate::symbols::{exp_taylor, FockContext, PolynomialSymbol, TaylorFunction};

/// Exact `N×N` section of `T_u T_v̄` in the orthonormal monomial basis.
#[derive(Debug, Clone)]
pub struct CompressionMatrix<T> {
    n: usize,
    /// Row-major entries `A_{jk}`, `j` row / `k` column.
    data: Vec<Complex<T>>,
    /// Log of the largest intermediate term met anywhere in the assembly;
    /// rounding noise in the entries scales with it.
    term_peak_log: T,
    /// Log of the largest entry magnitude.
    entry_peak_log: T,
}

impl<T: Real> CompressionMatrix<T> {
    /// Assembles the section. Every term is combined through its
    /// log-magnitude so the `√(h_j h_k)/h_l` factors never overflow.
    pub fn build(
        u: &TaylorFunction<T>,
        v: &TaylorFunction<T>,
        ctx: &FockContext<T>,
        n: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("compression dimension must be positive".into()));
        }
        if u.truncation() + 1 < n || v.truncation() + 1 < n {
            return Err(Error::Config(format!(
                "symbol truncations ({}, {}) too short for N = {n}",
                u.truncation(),
                v.truncation()
            )));
        }
        let log_h: Vec<T> = (0..n).map(|k| ctx.log_h(k)).collect();
        let half = real::<T>(0.5);
        let rows: Vec<(Vec<Complex<T>>, T, T)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut row = Vec::with_capacity(n);
                let mut term_peak = T::neg_infinity();
                let mut entry_peak = T::neg_infinity();
                for k in 0..n {
                    let lmax_terms = j.min(k);
                    // pass 1: largest term log-magnitude
                    let mut max_log = T::neg_infinity();
                    for l in 0..=lmax_terms {
                        let cu = u.coeffs[j - l].norm();
                        let cv = v.coeffs[k - l].norm();
                        if cu == T::zero() || cv == T::zero() {
                            continue;
                        }
                        let lt = cu.ln() + cv.ln() + half * (log_h[j] + log_h[k]) - log_h[l];
                        if lt > max_log {
                            max_log = lt;
                        }
                    }
                    if max_log == T::neg_infinity() {
                        row.push(Complex::new(T::zero(), T::zero()));
                        continue;
                    }
                    // pass 2: phase-weighted sum relative to the max
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for l in 0..=lmax_terms {
                        let a = u.coeffs[j - l];
                        let b = v.coeffs[k - l].conj();
                        let an = a.norm();
                        let bn = b.norm();
                        if an == T::zero() || bn == T::zero() {
                            continue;
                        }
                        let lt = an.ln() + bn.ln() + half * (log_h[j] + log_h[k]) - log_h[l];
                        let dir = (a / an) * (b / bn);
                        acc += dir * (lt - max_log).exp();
                    }
                    let an = acc.norm();
                    term_peak = term_peak.max(max_log);
                    if an > T::zero() {
                        entry_peak = entry_peak.max(an.ln() + max_log);
                    }
                    row.push(acc * crate::logspace::exp_saturating(max_log));
                }
                (row, term_peak, entry_peak)
            })
            .collect();
        let mut data = Vec::with_capacity(n * n);
        let mut term_peak = T::neg_infinity();
        let mut entry_peak = T::neg_infinity();
        for (row, tp, ep) in rows {
            data.extend(row);
            term_peak = term_peak.max(tp);
            entry_peak = entry_peak.max(ep);
        }
        Ok(CompressionMatrix {
            n,
            data,
            term_peak_log: term_peak,
            entry_peak_log: entry_peak,
        })
    }

    /// Wraps raw row-major entries (test oracles, synthetic matrices).
    pub fn from_raw(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Config("entry count must be n²".into()));
        }
        Ok(CompressionMatrix {
            n,
            data,
            term_peak_log: T::neg_infinity(),
            entry_peak_log: T::neg_infinity(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex<T> {
        self.data[j * self.n + k]
    }

    /// Log-magnitude lost to cancellation at the matrix scale.
    pub fn max_cancellation_log(&self) -> T {
        (self.term_peak_log - self.entry_peak_log).max(T::zero())
    }

    /// Absolute noise floor for singular-value estimates: rounding errors of
    /// size `ε·(largest term)` spread over `n²` entries. Estimates within an
    /// order of magnitude of this floor are untrustworthy.
    pub fn sigma_noise_floor(&self) -> T {
        if self.term_peak_log == T::neg_infinity() {
            return T::zero();
        }
        crate::logspace::exp_saturating(
            self.term_peak_log + T::epsilon().ln() + from_usize::<T>(self.n).ln(),
        )
    }

    /// The leading `n×n` sub-section (compressions are nested).
    pub fn leading(&self, n: usize) -> CompressionMatrix<T> {
        assert!(n <= self.n);
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            data.extend_from_slice(&self.data[j * self.n..j * self.n + n]);
        }
        CompressionMatrix {
            n,
            data,
            term_peak_log: self.term_peak_log,
            entry_peak_log: self.entry_peak_log,
        }
    }

    fn matvec(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        for j in 0..self.n {
            let mut acc = Complex::new(T::zero(), T::zero());
            let row = &self.data[j * self.n..(j + 1) * self.n];
            for (a, xi) in row.iter().zip(x) {
                acc += a * xi;
            }
            out[j] = acc;
        }
    }

    fn matvec_adjoint(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        for item in out.iter_mut() {
            *item = Complex::new(T::zero(), T::zero());
        }
        for j in 0..self.n {
            let row = &self.data[j * self.n..(j + 1) * self.n];
            let xj = x[j];
            for (k, a) in row.iter().enumerate() {
                out[k] += a.conj() * xj;
            }
        }
    }
}

/// Power-iteration outcome for the largest singular value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerIterResult<T> {
    pub sigma: T,
    pub iterations: usize,
    /// False when the Rayleigh quotient failed to settle within `max_iter`;
    /// `sigma` is then the best value seen.
    pub converged: bool,
}

/// Largest singular value of `A` via power iteration on `A·A*`
/// (matrix-vector products only), deterministic for a given seed.
pub fn operator_norm_lower<T: Real>(
    a: &CompressionMatrix<T>,
    tol: T,
    max_iter: usize,
    seed: u64,
) -> PowerIterResult<T> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Uniform::new(-0.5f64, 0.5);
    let base = (from_usize::<T>(n)).sqrt().recip();
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|_| {
            let dr = real::<T>(jitter.sample(&mut rng) * 1e-3);
            let di = real::<T>(jitter.sample(&mut rng) * 1e-3);
            Complex::new(base + dr, di)
        })
        .collect();
    normalize(&mut x);
    let mut y = vec![Complex::new(T::zero(), T::zero()); n];
    let mut xn = vec![Complex::new(T::zero(), T::zero()); n];
    let mut sigma_prev = T::zero();
    for it in 1..=max_iter {
        a.matvec(&x, &mut y);
        let sigma = norm2(&y);
        if sigma == T::zero() {
            return PowerIterResult {
                sigma: T::zero(),
                iterations: it,
                converged: true,
            };
        }
        a.matvec_adjoint(&y, &mut xn);
        std::mem::swap(&mut x, &mut xn);
        normalize(&mut x);
        if (sigma - sigma_prev).abs() <= tol * sigma {
            return PowerIterResult {
                sigma,
                iterations: it,
                converged: true,
            };
        }
        sigma_prev = sigma;
    }
    PowerIterResult {
        sigma: sigma_prev,
        iterations: max_iter,
        converged: false,
    }
}

fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter()
        .map(|c| c.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

fn normalize<T: Real>(x: &mut [Complex<T>]) {
    let n = norm2(x);
    if n > T::zero() {
        for c in x.iter_mut() {
            *c = *c / n;
        }
    }
}

/// Growth verdict of a norm curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveVerdict {
    BoundedConsistent,
    UnboundedConsistent,
    Inconclusive,
}

/// Compression norms `σ(N)` over increasing dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct NormCurve<T> {
    pub ns: Vec<usize>,
    pub sigmas: Vec<T>,
    pub verdict: CurveVerdict,
    /// `σ(N_max)/σ(N_ref)` over the largest 4× dimension span available.
    pub growth_ratio: T,
    /// Absolute noise floor of the largest section's entries; sigmas within
    /// an order of magnitude of it are untrustworthy.
    pub noise_floor: T,
}

/// Computes `σ(N)` for `u = e^g`, `v = e^{-g}` at each requested dimension,
/// with the plateau/blow-up verdict at the supplied thresholds.
pub fn norm_growth_curve<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    ns: &[usize],
    plateau: T,
    blowup: T,
    seed: u64,
) -> Result<NormCurve<T>> {
    if ns.is_empty() {
        return Err(Error::Config("norm curve needs at least one dimension".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().unwrap();
    let u = exp_taylor(g, n_max);
    let v = exp_taylor(&g.neg(), n_max);
    let full = CompressionMatrix::build(&u, &v, ctx, n_max)?;
    let sigmas: Vec<T> = ns
        .iter()
        .map(|&n| {
            let section = full.leading(n);
            operator_norm_lower(&section, real::<T>(1e-10), 10_000, seed).sigma
        })
        .collect();

    // reference dimension: largest listed N with N ≤ N_max/4, else the smallest
    let n_ref_idx = ns.iter().rposition(|&n| n * 4 <= n_max).unwrap_or(0);
    let growth_ratio = sigmas[sigmas.len() - 1] / sigmas[n_ref_idx];
    let verdict = if growth_ratio < plateau {
        CurveVerdict::BoundedConsistent
    } else if growth_ratio > blowup {
        CurveVerdict::UnboundedConsistent
    } else {
        CurveVerdict::Inconclusive
    };
    Ok(NormCurve {
        ns,
        sigmas,
        verdict,
        growth_ratio,
        noise_floor: full.sigma_noise_floor(),
    })
}

/// `ln H_g(z,w)` with
/// `H_g(z,w) = |K_m(z,w)| e^{-½(|z|^{2m}+|w|^{2m}) + Re(g(z)-g(w))}`.
pub fn schur_h_log<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    w: Complex<T>,
) -> T {
    let two_m = real::<T>(2.0) * ctx.m();
    let half = real::<T>(0.5);
    let k = kernel(ctx, z, w);
    k.log_abs - half * (z.norm().powf(two_m) + w.norm().powf(two_m)) + g.eval(z).re - g.eval(w).re
}

/// The Schur kernel `H_g(z,w)` itself (bounded; safe to exponentiate).
pub fn schur_h<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    w: Complex<T>,
) -> T {
    schur_h_log(g, ctx, z, w).exp()
}

/// Truncation radius for `∫ H_{±g}(x,·) dA`: past the peak at `r ≈ x` the
/// integrand decays like `e^{-½(r^m - x^m)² + a(x^d + r^d)}`.
fn schur_rmax<T: Real>(m: T, x: T, g: &PolynomialSymbol<T>, tol: T) -> T {
    let l = (T::one() / tol).ln() + real::<T>(24.0);
    let half = real::<T>(0.5);
    let mut r = x.max(T::one()) + T::one();
    loop {
        let gap = half * (r.powf(m) - x.powf(m)).powi(2)
            - half * g.growth_log_envelope(r)
            - half * g.growth_log_envelope(x);
        if gap >= l || r > real::<T>(1e4) {
            return r;
        }
        r += real::<T>(0.25);
    }
}

/// `∫_ℂ (H_g + H_{-g})(x, w) dA(w)` by log-space quadrature.
pub fn schur_integral<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    x: T,
    spec_nodes: (usize, usize),
    tol: T,
) -> Result<LogIntegral<T>> {
    let gneg = g.neg();
    let r_max = schur_rmax(ctx.m(), x, g, tol);
    let spec = QuadratureSpec::new(spec_nodes.0, spec_nodes.1, r_max, tol)?;
    let zx = Complex::new(x, T::zero());
    integrate_polar_log(
        |w| log_add_exp(schur_h_log(g, ctx, zx, w), schur_h_log(&gneg, ctx, zx, w)),
        &spec,
    )
}

/// Schur-test report: the `x`-grid sweep for the given symbol and the
/// `(C₁, C₂)` fit over a sweep of the leading modulus.
#[derive(Debug, Clone, Serialize)]
pub struct SchurReport<T> {
    pub grid: Vec<T>,
    pub h_values: Vec<T>,
    pub sup_value: T,
    pub fitted_c1: T,
    pub fitted_c2: T,
    /// Largest quadrature est_rel_err seen; > 0.1 flags saturation.
    pub max_est_rel_err: T,
}

/// Sensible default radius grid for the Schur sweep.
pub fn default_schur_grid<T: Real>(m: T, a: T, d: usize) -> Vec<T> {
    let exp = real::<T>(2.0) * m - real::<T>(d as f64);
    let x_hi = if exp > T::zero() && a > T::zero() {
        (real::<T>(6.0) * a).powf(T::one() / exp).max(real::<T>(3.0))
    } else {
        real::<T>(3.0)
    } + real::<T>(2.0);
    let n = 14usize;
    (0..=n)
        .map(|i| x_hi * from_usize::<T>(i) / from_usize::<T>(n))
        .collect()
}

/// Schur bound for a ray symbol `a z^d` (`a = |a_d|` after rotation
/// reduction): `sup_x ∫ (H_g + H_{-g})(x,·) dA` over the grid, plus the
/// `(C₁, C₂)` fit of `ln sup ≤ ln C₁ + C₂ a²` over a leading-modulus sweep.
/// The sup is a certified upper bound for `‖T_u T_v̄‖`.
pub fn schur_bound<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    grid: &[T],
    spec_nodes: (usize, usize),
    tol: T,
) -> Result<SchurReport<T>> {
    if grid.is_empty() {
        return Err(Error::Config("schur_bound needs a nonempty grid".into()));
    }
    let d = g.degree();
    let a = g.leading_modulus();
    let ray = PolynomialSymbol::monomial(Complex::new(a, T::zero()), d)?;

    let sweep_one = |sym: &PolynomialSymbol<T>| -> Result<(Vec<T>, T, T)> {
        let mut vals = Vec::with_capacity(grid.len());
        let mut sup = T::neg_infinity();
        let mut max_est = T::zero();
        for &x in grid {
            let li = schur_integral(sym, ctx, x, spec_nodes, tol)?;
            vals.push(li.log_value.exp());
            sup = sup.max(li.log_value);
            max_est = max_est.max(li.est_rel_err);
        }
        Ok((vals, sup, max_est))
    };

    let (h_values, sup_log, mut max_est) = sweep_one(&ray)?;

    // (C1, C2) fit over a sweep of the leading modulus
    let (fitted_c1, fitted_c2) = if a > T::zero() {
        let mut pts = Vec::new();
        for &f in &[0.25, 0.5, 0.75, 1.0] {
            let af = a * real::<T>(f);
            let sym = PolynomialSymbol::monomial(Complex::new(af, T::zero()), d)?;
            let (_, s, e) = sweep_one(&sym)?;
            max_est = max_est.max(e);
            pts.push((af * af, s));
        }
        let (slope, intercept) = least_squares(&pts);
        (intercept.exp(), slope)
    } else {
        (sup_log.exp(), T::zero())
    };

    Ok(SchurReport {
        grid: grid.to_vec(),
        h_values,
        sup_value: sup_log.exp(),
        fitted_c1,
        fitted_c2,
        max_est_rel_err: max_est,
    })
}

/// Log of the Schur upper bound for a general polynomial symbol, assembled
/// from monomial bounds through `H_{g₁+g₂} ≤ √(H_{2g₁} H_{2g₂})` and
/// rotation invariance. Constant terms cancel and are ignored.
pub fn schur_bound_log_general<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    spec_nodes: (usize, usize),
    tol: T,
) -> Result<T> {
    let monomials: Vec<(usize, T)> = g
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.norm() > T::zero())
        .map(|(dd, c)| (dd, c.norm()))
        .collect();
    if monomials.is_empty() {
        let grid = default_schur_grid(ctx.m(), T::zero(), 0);
        let rep = schur_bound(&PolynomialSymbol::zero(), ctx, &grid, spec_nodes, tol)?;
        return Ok(rep.sup_value.ln());
    }
    // Repeated Cauchy-Schwarz splitting doubles the coefficient of each
    // remaining part: bound(g₁ + rest) ≤ ½[bound(2g₁) + bound(2·rest)] in logs.
    fn go<T: Real>(
        parts: &[(usize, T)],
        scale: T,
        ctx: &FockContext<T>,
        spec_nodes: (usize, usize),
        tol: T,
    ) -> Result<T> {
        if parts.len() == 1 {
            let (d, a) = parts[0];
            let a_sc = a * scale;
            let sym = PolynomialSymbol::monomial(Complex::new(a_sc, T::zero()), d)?;
            let grid = default_schur_grid(ctx.m(), a_sc, d);
            let rep = schur_bound(&sym, ctx, &grid, spec_nodes, tol)?;
            return Ok(rep.sup_value.ln());
        }
        let two = real::<T>(2.0);
        let half = real::<T>(0.5);
        let head = go(&parts[..1], scale * two, ctx, spec_nodes, tol)?;
        let rest = go(&parts[1..], scale * two, ctx, spec_nodes, tol)?;
        Ok(half * (head + rest))
    }
    go(&monomials, T::one(), ctx, spec_nodes, tol)
}

fn least_squares<T: Real>(pts: &[(T, T)]) -> (T, T) {
    let n = from_usize::<T>(pts.len());
    let sx = pts.iter().fold(T::zero(), |a, p| a + p.0);
    let sy = pts.iter().fold(T::zero(), |a, p| a + p.1);
    let sxx = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.0);
    let sxy = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.1);
    let denom = n * sxx - sx * sx;
    if denom == T::zero() {
        return (T::zero(), sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// The Sarason function
/// `F(z,w) = c̄ e^{g(z) - conj(g(w))} K_m(z,w) / √(K_m(z,z) K_m(w,w))`,
/// carried in log-magnitude form (`|F(z,z)| = |c|` identically).
pub fn sarason_f<T: Real>(
    g: &PolynomialSymbol<T>,
    c: Complex<T>,
    ctx: &FockContext<T>,
    z: Complex<T>,
    w: Complex<T>,
) -> KernelValue<T> {
    let kzw = kernel(ctx, z, w);
    let kzz = kernel(ctx, z, z);
    let kww = kernel(ctx, w, w);
    let half = real::<T>(0.5);
    let expo = g.eval(z) - g.eval(w).conj();
    let log_abs = c.norm().ln() + expo.re + kzw.log_abs - half * (kzz.log_abs + kww.log_abs);
    let phase = if c.norm() > T::zero() && kzw.phase.norm() > T::zero() {
        (c.conj() / c.norm()) * Complex::from_polar(T::one(), expo.im) * kzw.phase
    } else {
        Complex::new(T::zero(), T::zero())
    };
    KernelValue {
        log_abs,
        phase,
        branch: kzw.branch,
        est_rel_err: (kzw.est_rel_err + half * (kzz.est_rel_err + kww.est_rel_err)).min(T::one()),
    }
}

/// The stress points of the boundedness argument: both on the ray where
/// `e^{g}` is purely oscillatory, separated by an angle inside the kernel's
/// inner window `θ₀`.
pub fn lemma3_points<T: Real>(
    g: &PolynomialSymbol<T>,
    m: T,
    x: T,
    window_c: T,
) -> Result<(Complex<T>, Complex<T>)> {
    let d = g.degree();
    if d == 0 {
        return Err(Error::Domain("stress points need deg g >= 1".into()));
    }
    let df = real::<T>(d as f64);
    let alpha = g.leading_argument();
    let base = T::PI() / (real::<T>(2.0) * df);
    let z = Complex::from_polar(x, base - alpha / df);
    let w = Complex::from_polar(
        x,
        base - (alpha + window_c / (real::<T>(2.0) * m * x.powf(m))) / df,
    );
    Ok((z, w))
}

/// `ln sup` of `|F|` over the two orderings of the stress points at radius
/// `x`; the unbounded direction shows up as growth of this quantity in `x`.
pub fn sarason_stress_log_abs<T: Real>(
    g: &PolynomialSymbol<T>,
    c: Complex<T>,
    ctx: &FockContext<T>,
    x: T,
    window_c: T,
) -> Result<T> {
    let (z, w) = lemma3_points(g, ctx.m(), x, window_c)?;
    let a = sarason_f(g, c, ctx, z, w).log_abs;
    let b = sarason_f(g, c, ctx, w, z).log_abs;
    Ok(a.max(b))
}

/// Exact operator norm `e^{|a|²/2}` of `T_u T_v̄` for `u = e^{āz}`,
/// `v = e^{-āz}` on the classical Fock space (`m = 1`).
pub fn weyl_norm_m1<T: Real>(a: Complex<T>) -> T {
    (a.norm_sqr() * real::<T>(0.5)).exp()
}

/// CSV rows (`parameter,value,est_err`) for a norm curve.
pub fn norm_curve_csv<T: Real>(curve: &NormCurve<T>) -> Vec<(f64, f64, f64)> {
    curve
        .ns
        .iter()
        .zip(&curve.sigmas)
        .map(|(&n, &s)| (n as f64, to_f64(s), 0.0))
        .collect()
}
