//! The boundedness classifier: the degree test `deg g ≤ m` decides the
//! verdict, and four independent numerical probes (compression norm curve,
//! Berezin product ray sweep, Schur upper bound, Sarason stress points) are
//! gathered as an evidence bundle with a consistency flag.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::berezin::{growth_exponent, ray_sweep_product, BerezinQuality, RaySweep};
use crate::error::Result;
use crate::operator::{
    norm_growth_curve, sarason_stress_log_abs, schur_bound_log_general, CurveVerdict, NormCurve,
};
use crate::scalar::{real, to_f64, Real};
use crate::symbols::{membership_test, FockContext, PolynomialSymbol};

/// Calibrated decision thresholds (checked into the repo as configuration).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    /// Norm-curve ratio below which the curve counts as a plateau.
    pub plateau_ratio: f64,
    /// Norm-curve ratio above which the curve counts as blow-up.
    pub blowup_ratio: f64,
    /// Berezin-product log growth over the sweep below which the product
    /// counts as bounded.
    pub product_flat_log: f64,
    /// Berezin-product log growth above which it counts as unbounded.
    pub product_growth_log: f64,
    /// Sarason stress-point log growth over the radius span that counts as
    /// unbounded evidence.
    pub f_stress_growth_log: f64,
    /// Accepted band of fitted/target for growth-rate checks.
    pub rate_ratio_lo: f64,
    pub rate_ratio_hi: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            plateau_ratio: 1.05,
            blowup_ratio: 5.0,
            product_flat_log: 0.5,
            product_growth_log: 2.0,
            f_stress_growth_log: 0.3,
            rate_ratio_lo: 0.8,
            rate_ratio_hi: 1.25,
        }
    }
}

/// The dichotomy verdict, decided by the degree test alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremVerdict {
    Bounded,
    Unbounded,
    /// `e^{±g}` fails the membership test, so the dichotomy does not apply.
    NotApplicable,
}

/// The gathered numerical probes.
#[derive(Debug, Clone, Serialize)]
pub struct Evidence<T> {
    pub norm_curve: NormCurve<T>,
    pub berezin_ray: Option<RaySweep<T>>,
    /// Log growth of the Berezin product across the sweep.
    pub product_log_growth: Option<T>,
    /// Log-log growth exponent of the product sweep.
    pub product_exponent: Option<T>,
    /// Certified Schur upper bound (log), gathered on the bounded side.
    pub schur_sup_log: Option<T>,
    /// `(x, ln sup |F|)` at the stress points.
    pub f_stress: Vec<(T, T)>,
}

/// Classifier output: verdict, evidence bundle, consistency.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifierVerdict<T> {
    pub theorem_verdict: TheoremVerdict,
    /// Membership status of `e^{±g}`: `Some(true/false)` or `None` on the
    /// borderline `deg g = 2m`.
    pub membership: Option<bool>,
    pub evidence: Evidence<T>,
    pub consistent: bool,
    pub notes: Vec<String>,
}

/// Runs the full classifier for the symbol pair `u = e^g`, `v = ce^{-g}`
/// (the constant `c` rescales the operator and does not affect boundedness).
pub fn classify<T: Real>(
    g: &PolynomialSymbol<T>,
    ctx: &FockContext<T>,
    thresholds: &Thresholds,
    seed: u64,
) -> Result<ClassifierVerdict<T>> {
    let m = ctx.m();
    let d = real::<T>(g.degree() as f64);
    let mut notes = Vec::new();

    let membership = membership_test(g, ctx).in_space;
    if membership == Some(false) {
        notes.push("symbol not in space: deg g > 2m".to_string());
        return Ok(ClassifierVerdict {
            theorem_verdict: TheoremVerdict::NotApplicable,
            membership,
            evidence: Evidence {
                norm_curve: NormCurve {
                    ns: vec![],
                    sigmas: vec![],
                    verdict: CurveVerdict::Inconclusive,
                    growth_ratio: T::one(),
                    noise_floor: T::zero(),
                },
                berezin_ray: None,
                product_log_growth: None,
                product_exponent: None,
                schur_sup_log: None,
                f_stress: vec![],
            },
            consistent: true,
            notes,
        });
    }
    if membership.is_none() {
        notes.push("membership borderline: deg g = 2m, reporting without a verdict".to_string());
    }

    let bounded = d <= m + real::<T>(1e-9) || g.is_zero();
    let theorem_verdict = if bounded {
        TheoremVerdict::Bounded
    } else {
        TheoremVerdict::Unbounded
    };

    // (1) compression norm curve
    let ns = [16usize, 24, 32, 48, 64, 96];
    let curve = norm_growth_curve(
        g,
        ctx,
        &ns,
        real::<T>(thresholds.plateau_ratio),
        real::<T>(thresholds.blowup_ratio),
        seed,
    )?;
    // A plateau contradicts an unbounded verdict and vice versa; sustained
    // growth short of the calibrated blow-up factor still counts as
    // non-contradicting evidence for the unbounded side.
    let curve_consistent = if bounded {
        curve.verdict == CurveVerdict::BoundedConsistent
    } else {
        curve.growth_ratio > real::<T>(thresholds.plateau_ratio)
    };
    if curve.noise_floor * real::<T>(10.0) > *curve.sigmas.last().unwrap() {
        notes.push(format!(
            "norm curve near its noise floor ({} vs sigma {})",
            to_f64(curve.noise_floor),
            to_f64(*curve.sigmas.last().unwrap())
        ));
    }

    // (3) Berezin product along the worst ray
    let q = BerezinQuality::default();
    let (berezin_ray, product_log_growth, product_exponent, product_consistent) =
        if g.degree() == 0 {
            // constant symbols: product identically 1, trivially bounded
            (None, Some(T::zero()), Some(T::zero()), bounded)
        } else {
            let x_hi = (real::<T>(6.0) / m).max(real::<T>(3.0));
            let xs: Vec<T> = (0..8)
                .map(|i| T::one() + (x_hi - T::one()) * real::<T>(i as f64) / real::<T>(7.0))
                .collect();
            match ray_sweep_product(g, ctx, &xs, &q) {
                Ok(sweep) => {
                    let growth = *sweep.log_values.last().unwrap() - sweep.log_values[0];
                    let expo = growth_exponent(&sweep);
                    let ok = if bounded {
                        growth.abs() <= real::<T>(thresholds.product_flat_log)
                    } else {
                        growth >= real::<T>(thresholds.product_growth_log)
                    };
                    (Some(sweep), Some(growth), Some(expo), ok)
                }
                Err(e) => {
                    notes.push(format!("berezin sweep unavailable: {e}"));
                    (None, None, None, true)
                }
            }
        };

    // (upper bound) Schur test, meaningful on the bounded side
    let schur_sup_log = if bounded {
        match schur_bound_log_general(g, ctx, (96, 48), real::<T>(1e-7)) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("schur bound unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };
    let schur_consistent = match schur_sup_log {
        Some(v) => v.is_finite(),
        None => true,
    };

    // (2)-adjacent: Sarason stress points
    let mut f_stress = Vec::new();
    let mut stress_consistent = true;
    if g.degree() >= 1 {
        let c1 = Complex::new(T::one(), T::zero());
        for &x in &[real::<T>(4.0), real::<T>(8.0), real::<T>(12.0)] {
            let v = sarason_stress_log_abs(g, c1, ctx, x, T::one())?;
            f_stress.push((x, v));
        }
        let span = f_stress.last().unwrap().1 - f_stress[0].1;
        stress_consistent = if bounded {
            span < real::<T>(thresholds.f_stress_growth_log)
        } else {
            span >= real::<T>(thresholds.f_stress_growth_log)
        };
    }

    let consistent =
        curve_consistent && product_consistent && schur_consistent && stress_consistent;
    if !curve_consistent {
        notes.push(format!(
            "norm curve verdict {:?} (ratio {}) disagrees with the degree test",
            curve.verdict,
            to_f64(curve.growth_ratio)
        ));
    }
    if !product_consistent {
        notes.push("berezin product growth disagrees with the degree test".to_string());
    }
    if !stress_consistent {
        notes.push("sarason stress-point growth disagrees with the degree test".to_string());
    }

    Ok(ClassifierVerdict {
        theorem_verdict,
        membership,
        evidence: Evidence {
            norm_curve: curve,
            berezin_ray,
            product_log_growth,
            product_exponent,
            schur_sup_log,
            f_stress,
        },
        consistent,
        notes,
    })
}
