//! Subcommand execution.

use focklab_core::asymptotics::{
    envelope_verify, hx, hx_analyze, hx_d1, hx_d2, laplace_estimate, laplace_quadrature_log,
    rate_verify, LaplaceProblem, LemmaId,
};
use focklab_core::berezin::{
    berezin_product_exp_log, berezin_sq_exp_log, geometric_grid, ray_sweep_curly_b,
    ray_sweep_product, worst_ray, BerezinQuality,
};
use focklab_core::classify::{classify, TheoremVerdict};
use focklab_core::operator::{default_schur_grid, norm_growth_curve, schur_bound, weyl_norm_m1};
use focklab_core::special_fn::{kernel, MittagLeffler};
use focklab_core::symbols::FockContext;
use focklab_core::{Error, Result};
use serde_json::json;

use crate::config::{parse_complex, parse_dims, parse_points, parse_symbol, Cli, Command};
use crate::reports::{
    complex_pair, envelope, symbol_pairs, to_value, write_curve, write_report,
};

/// Executes the parsed configuration; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            let diag = json!({
                "schema": 1,
                "error": e.to_string(),
            });
            eprintln!("{}", serde_json::to_string_pretty(&diag).unwrap());
            1
        }
    }
}

fn load_thresholds(cli: &Cli) -> Result<focklab_core::classify::Thresholds> {
    match &cli.thresholds {
        None => Ok(crate::thresholds()),
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("read {}: {e}", path.display())))?;
            toml::from_str(&raw).map_err(|e| Error::Config(format!("parse thresholds: {e}")))
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let name = cli
        .name
        .clone()
        .unwrap_or_else(|| cli.command.default_name().to_string());
    let dir = cli.out.clone();
    let seed = cli.seed;

    match &cli.command {
        Command::MlEval { m, z, series_only } => {
            let z = parse_complex(z)?;
            let ml = MittagLeffler::new(*m)?;
            let kv = if *series_only {
                ml.eval_series(z)
            } else {
                ml.eval(z)
            };
            let cfg = json!({
                "m": m, "z": complex_pair(z), "series_only": series_only, "seed": seed,
            });
            let result = json!({
                "value": complex_pair(kv.value()),
                "log_abs": kv.log_abs,
                "arg": kv.phase.arg(),
                "branch": to_value(&kv.branch),
                "est_rel_err": kv.est_rel_err,
                "switch_radius": ml.params().switch_radius,
            });
            write_report(&dir, &name, &envelope("ml-eval", cfg, result))?;
            Ok(0)
        }

        Command::Kernel { m, z, w } => {
            let z = parse_complex(z)?;
            let w = parse_complex(w)?;
            let ctx = FockContext::new(*m, 64)?;
            let kv = kernel(&ctx, z, w);
            let hermitian = kernel(&ctx, w, z);
            let cfg = json!({"m": m, "z": complex_pair(z), "w": complex_pair(w), "seed": seed});
            let result = json!({
                "value": complex_pair(kv.value()),
                "log_abs": kv.log_abs,
                "branch": to_value(&kv.branch),
                "est_rel_err": kv.est_rel_err,
                "hermitian_residual": (kv.value() - hermitian.value().conj()).norm(),
            });
            write_report(&dir, &name, &envelope("kernel", cfg, result))?;
            Ok(0)
        }

        Command::Berezin {
            m,
            g,
            z,
            x_max,
            points,
        } => {
            let sym = parse_symbol(g)?;
            let ctx = FockContext::new(*m, 192)?;
            let q = BerezinQuality {
                base_radial: cli.n_radial.unwrap_or(160),
                base_angular: cli.n_angular.unwrap_or(64),
                tol: cli.tol.unwrap_or(1e-9),
            };
            let cfg = json!({
                "m": m, "g": symbol_pairs(&sym), "seed": seed,
                "n_radial": q.base_radial, "n_angular": q.base_angular, "tol": q.tol,
            });
            if let Some(zlist) = z {
                let pts = parse_points(zlist)?;
                let mut rows = Vec::new();
                let mut samples = Vec::new();
                for zp in pts {
                    let up = berezin_sq_exp_log(&sym, 1.0, &ctx, zp, &q)?;
                    let vp = berezin_sq_exp_log(&sym, -1.0, &ctx, zp, &q)?;
                    let prod = berezin_product_exp_log(&sym, &ctx, zp, &q)?;
                    rows.push((zp.norm(), prod.log_value, prod.est_rel_err));
                    samples.push(json!({
                        "z": complex_pair(zp),
                        "log_u_sq": up.log_value,
                        "log_v_sq": vp.log_value,
                        "log_product": prod.log_value,
                        "est_rel_err": prod.est_rel_err,
                    }));
                }
                let result = json!({"points": samples});
                write_report(&dir, &name, &envelope("berezin", cfg, result))?;
                write_curve(&dir, &name, &rows)?;
            } else {
                let hi = x_max.unwrap_or_else(|| (6.0 / m).max(3.0));
                let xs = geometric_grid(1.0, hi, (*points).max(4));
                let product = ray_sweep_product(&sym, &ctx, &xs, &q)?;
                let curly = ray_sweep_curly_b(&sym, &ctx, &xs, &q)?;
                let result = json!({
                    "worst_ray": worst_ray(&sym)?,
                    "product_sweep": to_value(&product),
                    "curly_b_sweep": to_value(&curly),
                });
                write_report(&dir, &name, &envelope("berezin", cfg, result))?;
                write_curve(&dir, &name, &product.csv_rows())?;
            }
            Ok(0)
        }

        Command::CompressNorm { m, g, n, ns } => {
            let sym = parse_symbol(g)?;
            let ctx = FockContext::new(*m, (*n).max(64) * 2)?;
            let dims: Vec<usize> = match ns {
                Some(list) => parse_dims(list)?,
                None => {
                    let mut v: Vec<usize> =
                        [16, 24, 32, 48, 64, 96].iter().copied().filter(|&k| k < *n).collect();
                    v.push(*n);
                    v
                }
            };
            let th = load_thresholds(cli)?;
            let curve = norm_growth_curve(
                &sym,
                &ctx,
                &dims,
                th.plateau_ratio,
                th.blowup_ratio,
                seed,
            )?;
            let sigma_n = *curve.sigmas.last().unwrap();
            let mut result = json!({
                "curve": to_value(&curve),
                "sigma": sigma_n,
            });
            // exact reference on the classical Fock space for linear symbols
            if (*m - 1.0).abs() < 1e-12 && sym.degree() == 1 {
                let exact = weyl_norm_m1(sym.coeffs()[1].conj());
                result["weyl_exact"] = json!(exact);
                result["sigma_over_exact"] = json!(sigma_n / exact);
            }
            let cfg = json!({"m": m, "g": symbol_pairs(&sym), "N": n, "ns": curve.ns, "seed": seed});
            write_report(&dir, &name, &envelope("compress-norm", cfg, result))?;
            let rows: Vec<(f64, f64, f64)> = curve
                .ns
                .iter()
                .zip(&curve.sigmas)
                .map(|(&k, &s)| (k as f64, s, 0.0))
                .collect();
            write_curve(&dir, &name, &rows)?;
            Ok(0)
        }

        Command::Schur { m, g } => {
            let sym = parse_symbol(g)?;
            let ctx = FockContext::new(*m, 64)?;
            let grid = default_schur_grid(*m, sym.leading_modulus(), sym.degree());
            let nodes = (
                cli.n_radial.unwrap_or(96),
                cli.n_angular.unwrap_or(48),
            );
            let rep = schur_bound(&sym, &ctx, &grid, nodes, cli.tol.unwrap_or(1e-8))?;
            let cfg = json!({"m": m, "g": symbol_pairs(&sym), "seed": seed,
                             "n_radial": nodes.0, "n_angular": nodes.1});
            write_report(&dir, &name, &envelope("schur", cfg, to_value(&rep)))?;
            let rows: Vec<(f64, f64, f64)> = rep
                .grid
                .iter()
                .zip(&rep.h_values)
                .map(|(&x, &h)| (x, h, h * rep.max_est_rel_err))
                .collect();
            write_curve(&dir, &name, &rows)?;
            Ok(0)
        }

        Command::Classify { m, g } => {
            let sym = parse_symbol(g)?;
            let ctx = FockContext::new(*m, 192)?;
            let th = load_thresholds(cli)?;
            let verdict = classify(&sym, &ctx, &th, seed)?;
            let cfg = json!({
                "m": m, "g": symbol_pairs(&sym), "seed": seed,
                "thresholds": to_value(&th),
            });
            write_report(&dir, &name, &envelope("classify", cfg, to_value(&verdict)))?;
            let rows: Vec<(f64, f64, f64)> = verdict
                .evidence
                .norm_curve
                .ns
                .iter()
                .zip(&verdict.evidence.norm_curve.sigmas)
                .map(|(&k, &s)| (k as f64, s, 0.0))
                .collect();
            write_curve(&dir, &name, &rows)?;
            if verdict.theorem_verdict != TheoremVerdict::NotApplicable && !verdict.consistent {
                return Ok(2);
            }
            Ok(0)
        }

        Command::LaplaceCheck {
            m,
            d,
            a,
            c0,
            x_max,
            points,
        } => {
            let xs: Vec<f64> = geometric_grid(x_max / 8.0, *x_max, (*points).max(3));
            let rate = rate_verify(*m, *d, *a, &xs)?;
            let x_top = *xs.last().unwrap();
            let analysis = hx_analyze(*m, *d, *a, *c0, x_top)?;
            let (mm, dd, aa, cc, xx) = (*m, *d, *a, *c0, x_top);
            let amplitude = |_: f64| 1.0;
            let phase = move |r: f64| hx(mm, dd, aa, cc, xx, r);
            let phase_d1 = move |r: f64| hx_d1(mm, dd, aa, cc, xx, r);
            let phase_d2 = move |r: f64| hx_d2(mm, dd, aa, cc, xx, r);
            let problem = LaplaceProblem {
                amplitude: &amplitude,
                phase: &phase,
                phase_d1: &phase_d1,
                phase_d2: &phase_d2,
                domain: (x_top * 1e-3, x_top * 5.0),
            };
            let lap = laplace_estimate(&problem)?;
            let direct = laplace_quadrature_log(&problem, 2048);
            let cfg = json!({"m": m, "d": d, "a": a, "C": c0, "xs": xs, "seed": seed});
            let result = json!({
                "rate": to_value(&rate),
                "hx_at_top": to_value(&analysis),
                "laplace_log_value": lap.log_value,
                "quadrature_log_value": direct,
                "laplace_rel_gap": (lap.log_value - direct).abs(),
            });
            write_report(&dir, &name, &envelope("laplace-check", cfg, result))?;
            let rows: Vec<(f64, f64, f64)> = rate
                .xs
                .iter()
                .zip(&rate.h_ratios)
                .map(|(&x, &h)| (x, h, (h - 1.0).abs()))
                .collect();
            write_curve(&dir, &name, &rows)?;
            Ok(0)
        }

        Command::Envelope { lemma, m } => {
            let id: LemmaId = lemma.parse()?;
            let rep = envelope_verify(id, *m)?;
            let cfg = json!({"lemma": to_value(&id), "m": m, "seed": seed});
            write_report(&dir, &name, &envelope("envelope", cfg, to_value(&rep)))?;
            let rows: Vec<(f64, f64, f64)> = rep
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| (i as f64, p.ratio, 0.0))
                .collect();
            write_curve(&dir, &name, &rows)?;
            Ok(0)
        }
    }
}
