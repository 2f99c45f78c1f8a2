//! Polynomial symbols `g`, Taylor coefficients of `e^{±g}`, Fock norms,
//! membership diagnostics, and the Hardy norm of the boundedness estimate.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::logspace::LogSum;
use crate::scalar::{real, Real};
use crate::special_fn::{ln_gamma, MittagLeffler};

/// A polynomial symbol `g(z) = a₀ + a₁ z + ... + a_d z^d` with `a_d ≠ 0`
/// unless `g ≡ 0`. Coefficients are stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSymbol<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> PolynomialSymbol<T> {
    /// Builds a symbol, trimming trailing (numerically zero) coefficients.
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("symbol coefficients must be finite".into()));
        }
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(T::zero(), T::zero()));
        }
        Ok(PolynomialSymbol { coeffs })
    }

    pub fn zero() -> Self {
        PolynomialSymbol {
            coeffs: vec![Complex::new(T::zero(), T::zero())],
        }
    }

    /// Monomial `a z^d`.
    pub fn monomial(a: Complex<T>, d: usize) -> Result<Self> {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); d + 1];
        coeffs[d] = a;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == T::zero()
    }

    /// Leading modulus `a = |a_d|`.
    pub fn leading_modulus(&self) -> T {
        self.coeffs[self.degree()].norm()
    }

    /// Leading argument `α_d = arg(a_d)`.
    pub fn leading_argument(&self) -> T {
        self.coeffs[self.degree()].arg()
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn neg(&self) -> Self {
        PolynomialSymbol {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// The rotated symbol `g ∘ U_θ` with `U_θ(z) = e^{iθ} z`.
    pub fn rotate(&self, theta: T) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (j, c) in self.coeffs.iter().enumerate() {
            let ph = Complex::from_polar(T::one(), theta * real::<T>(j as f64));
            coeffs.push(c * ph);
        }
        PolynomialSymbol { coeffs }
    }

    /// `Σ 2 |a_j| r^j` — a log-envelope for `|e^{±g}|²` on `|z| = r`.
    pub fn growth_log_envelope(&self, r: T) -> T {
        let two = real::<T>(2.0);
        let mut acc = T::zero();
        let mut p = T::one();
        for c in &self.coeffs {
            acc += two * c.norm() * p;
            p *= r;
        }
        acc
    }
}

/// Hardy-space norm on the unit disc: `‖g‖_{H²} = √(Σ |a_j|²)`.
pub fn hardy_norm<T: Real>(g: &PolynomialSymbol<T>) -> T {
    g.coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Shared per-`m` state: the weight exponent, cached squared monomial norms
/// `h_k = (π/m) Γ((k+1)/m)`, and the kernel evaluator.
#[derive(Debug, Clone)]
pub struct FockContext<T> {
    m: T,
    log_h: Vec<T>,
    ml: MittagLeffler<T>,
}

impl<T: Real> FockContext<T> {
    /// Builds a context with `h_k` cached for `k ≤ trunc_n`.
    pub fn new(m: T, trunc_n: usize) -> Result<Self> {
        if !(m >= T::one()) || !m.is_finite() {
            return Err(Error::Domain(format!("weight exponent must satisfy m >= 1, got {m}")));
        }
        let ml = MittagLeffler::new(m)?;
        let log_pi_over_m = T::PI().ln() - m.ln();
        let log_h = (0..=trunc_n)
            .map(|k| log_pi_over_m + ln_gamma((real::<T>(k as f64) + T::one()) / m))
            .collect();
        Ok(FockContext { m, log_h, ml })
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn trunc_n(&self) -> usize {
        self.log_h.len() - 1
    }

    pub fn ml(&self) -> &MittagLeffler<T> {
        &self.ml
    }

    /// `ln h_k`, extending the cache formula beyond the stored range.
    pub fn log_h(&self, k: usize) -> T {
        if k < self.log_h.len() {
            self.log_h[k]
        } else {
            T::PI().ln() - self.m.ln() + ln_gamma((real::<T>(k as f64) + T::one()) / self.m)
        }
    }

    /// `h_k` (may overflow to infinity for very large `k`; use [`Self::log_h`]).
    pub fn h(&self, k: usize) -> T {
        self.log_h(k).exp()
    }
}

/// Truncated Taylor coefficients of an entire function.
#[derive(Debug, Clone)]
pub struct TaylorFunction<T> {
    pub coeffs: Vec<Complex<T>>,
    /// Declared bound on the squared-norm tail `Σ_{k>N} |c_k|² h_k`.
    pub declared_tail_bound: T,
}

impl<T: Real> TaylorFunction<T> {
    pub fn new(coeffs: Vec<Complex<T>>, declared_tail_bound: T) -> Self {
        TaylorFunction {
            coeffs,
            declared_tail_bound,
        }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Coefficient-wise Cauchy product truncated to the shorter extent.
    pub fn cauchy_product(&self, other: &TaylorFunction<T>) -> TaylorFunction<T> {
        let n = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TaylorFunction::new(out, T::zero())
    }
}

/// Taylor coefficients of `e^g` through degree `N` via the derivative
/// recurrence `(n+1) c_{n+1} = Σ_{j=1}^{d} j a_j c_{n+1-j}`, `c₀ = e^{a₀}`.
pub fn exp_taylor<T: Real>(g: &PolynomialSymbol<T>, n: usize) -> TaylorFunction<T> {
    let d = g.degree();
    let a = g.coeffs();
    let mut c = Vec::with_capacity(n + 1);
    c.push(a[0].exp());
    for k in 0..n {
        // c_{k+1} = (1/(k+1)) Σ_{j=1}^{min(d,k+1)} j a_j c_{k+1-j}
        let mut s = Complex::new(T::zero(), T::zero());
        let jmax = d.min(k + 1);
        for j in 1..=jmax {
            s += a[j] * c[k + 1 - j] * real::<T>(j as f64);
        }
        c.push(s / real::<T>((k + 1) as f64));
    }
    TaylorFunction::new(c, T::zero())
}

/// Adaptive truncation: grows `N` until `|c_N|² h_N` stays below
/// `1e-18 ×` the running squared norm for 5 consecutive indices.
/// The declared tail bound is 10× the final block sum.
pub fn exp_taylor_auto<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    n_cap: usize,
) -> Result<TaylorFunction<T>> {
    let f = exp_taylor(g, n_cap);
    let thresh = real::<T>(1e-18);
    let mut norm_sq = LogSum::new();
    let mut streak = 0usize;
    let mut cut = None;
    for (k, c) in f.coeffs.iter().enumerate() {
        let lterm = real::<T>(2.0) * c.norm().ln() + ctx.log_h(k);
        norm_sq.add_log(lterm);
        if k > g.degree() && lterm < norm_sq.value() + thresh.ln() {
            streak += 1;
            if streak >= 5 {
                cut = Some(k);
                break;
            }
        } else {
            streak = 0;
        }
    }
    let Some(cut) = cut else {
        return Err(Error::DivergentNorm(format!(
            "exp_taylor_auto: no stable truncation for deg-{} symbol within N = {}",
            g.degree(),
            n_cap
        )));
    };
    let mut tail = LogSum::new();
    for k in (cut.saturating_sub(4))..=cut {
        tail.add_log(real::<T>(2.0) * f.coeffs[k].norm().ln() + ctx.log_h(k));
    }
    let bound = real::<T>(10.0) * tail.value().exp();
    Ok(TaylorFunction::new(
        f.coeffs[..=cut].to_vec(),
        bound,
    ))
}

/// `ln ‖f‖` with `‖f‖² = Σ_{k≤N} |c_k|² h_k`.
pub fn fock_norm_log<T: Real>(f: &TaylorFunction<T>, ctx: &FockContext<T>) -> Result<T> {
    let mut s = LogSum::new();
    for (k, c) in f.coeffs.iter().enumerate() {
        let n = c.norm();
        if !n.is_finite() {
            return Err(Error::DivergentNorm(format!("non-finite coefficient at k={k}")));
        }
        if n > T::zero() {
            s.add_log(real::<T>(2.0) * n.ln() + ctx.log_h(k));
        }
    }
    Ok(s.value() * real::<T>(0.5))
}

/// `‖f‖` in the ordinary scale (see [`fock_norm_log`] for the log variant).
pub fn fock_norm<T: Real>(f: &TaylorFunction<T>, ctx: &FockContext<T>) -> Result<T> {
    Ok(fock_norm_log(f, ctx)?.exp())
}

/// Membership verdict for `e^g ∈ F²ₘ`.
#[derive(Debug, Clone)]
pub struct MembershipReport<T> {
    /// `Some(false)` when `deg g > 2m` (order obstruction), `Some(true)` when
    /// `deg g < 2m`; `None` on the borderline `deg g = 2m`, where the report
    /// carries numbers but no verdict.
    pub in_space: Option<bool>,
    /// `(N, ln ‖e^g‖_N)` partial norms at N = 16, 32, 64, 128.
    pub partial_log_norms: Vec<(usize, T)>,
    /// Partial-norm ratio across a doubling exceeded 1.5.
    pub divergent: bool,
}

/// Order-obstruction test plus partial-norm diagnostics for `e^g`.
pub fn membership_test<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
) -> MembershipReport<T> {
    let two_m = real::<T>(2.0) * ctx.m();
    let d = real::<T>(g.degree() as f64);
    let eps = real::<T>(1e-12);

    let in_space = if g.is_zero() || d < two_m - eps {
        Some(true)
    } else if d > two_m + eps {
        Some(false)
    } else {
        None
    };

    let mut partial = Vec::new();
    let mut divergent = false;
    if in_space != Some(false) {
        let mut prev: Option<T> = None;
        let f = exp_taylor(g, 128);
        for &n in &[16usize, 32, 64, 128] {
            let head = TaylorFunction::new(f.coeffs[..=n].to_vec(), T::zero());
            let ln_norm = match fock_norm_log(&head, ctx) {
                Ok(v) => v,
                Err(_) => {
                    divergent = true;
                    break;
                }
            };
            if let Some(p) = prev {
                if (ln_norm - p).exp() > real::<T>(1.5) {
                    divergent = true;
                }
            }
            prev = Some(ln_norm);
            partial.push((n, ln_norm));
        }
    }
    MembershipReport {
        in_space,
        partial_log_norms: partial,
        divergent,
    }
}
