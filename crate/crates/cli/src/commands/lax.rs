use hierlab::flows::{evolve, Scheme};
use hierlab::lax::{
    asymptotic_residual, decay_exponent, matrix_wn_crosscheck, rmatrix_residual, zero_curvature_residual,
    LaxContext,
};
use num_complex::Complex64;
use serde::Serialize;

use super::Context;
use crate::error::CliResult;
use crate::output::Checks;
use crate::plot::Series;

#[derive(Serialize)]
struct AsymptoticRow {
    lambda: f64,
    p_re: f64,
    p_im: f64,
    residual: f64,
}

#[derive(Serialize)]
struct TraceRow {
    time: f64,
    trace_re: f64,
    trace_im: f64,
    drift: f64,
}

pub fn lax(ctx: &Context) -> CliResult<()> {
    let lc = &ctx.cfg.lax;
    let tol = ctx.cfg.tolerances;
    let kappa = ctx.kappa();
    let table = ctx.table(ctx.cfg.n_max.max(lc.k).max(3))?;
    let phi = ctx.cfg.initial_state()?;
    let mut checks = Checks::default();

    let (mut det, mut inv, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    for &lam in &lc.identity_lambdas {
        let c = LaxContext::conjugate_pair(&phi, kappa, lam)?;
        det = det.max(c.monodromy()?.det_error());
        inv = inv.max(c.involution_residual()?);
        norm = norm.max(c.normalization_residual()?);
    }
    checks.at_most("|det T - 1|", det, tol.lax_identity);
    checks.at_most("involution residual", inv, tol.lax_identity);
    checks.at_most("normalization residual", norm, tol.lax_identity);

    let fc = ctx.cfg.flow;
    let traj = evolve(&table, fc.n, &phi, fc.dt, fc.steps, fc.scheme, fc.stride)?;
    let traces = traj
        .states
        .iter()
        .map(|s| LaxContext::conjugate_pair(s, kappa, lc.trace_lambda)?.monodromy_trace())
        .collect::<hierlab::Result<Vec<Complex64>>>()?;
    let rows: Vec<TraceRow> = traj
        .times
        .iter()
        .zip(&traces)
        .map(|(&time, f)| TraceRow {
            time,
            trace_re: f.re,
            trace_im: f.im,
            drift: (f - traces[0]).norm() / (1.0 + traces[0].norm()),
        })
        .collect();
    ctx.out.write_csv("trace.csv", &rows)?;
    let drift = rows.iter().map(|r| r.drift).fold(0.0, f64::max);
    checks.at_most(format!("monodromy trace drift at λ={}", lc.trace_lambda), drift, tol.trace_drift);

    let zc = |dt: f64| -> CliResult<f64> {
        let steps = (lc.curvature_time / dt).round() as usize;
        let tr = evolve(&table, 3, &phi, dt, steps, Scheme::Strang, 1)?;
        Ok(zero_curvature_residual(&tr, lc.curvature_lambda)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(0.0, f64::max))
    };
    let [dt0, dt1] = lc.curvature_dts;
    let (coarse, fine) = (zc(dt0)?, zc(dt1)?);
    checks.at_most(format!("zero-curvature residual at dt={dt0} and {dt1}"), coarse.max(fine), tol.zero_curvature);
    checks.at_least("zero-curvature refinement factor", coarse / fine, lc.min_refinement);

    let mass = table.invariant(1, &phi)?;
    let normed = if mass > 0.0 {
        phi.scale(Complex64::new((0.5 / mass).sqrt(), 0.0))
    } else {
        phi.clone()
    };
    let top = lc.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c = LaxContext::conjugate_pair(&normed, kappa, top)?;
    let pts = asymptotic_residual(&c, &table, &lc.lambdas, lc.k)?;
    let rows: Vec<AsymptoticRow> = pts
        .iter()
        .map(|p| AsymptoticRow {
            lambda: p.lambda,
            p_re: p.p.re,
            p_im: p.p.im,
            residual: p.residual,
        })
        .collect();
    ctx.out.write_csv("asymptotic.csv", &rows)?;
    ctx.plot(
        "asymptotic.svg",
        &format!("quasi-momentum remainder, K={}", lc.k),
        "λ",
        "residual",
        &[Series {
            label: format!("K={}", lc.k),
            points: rows.iter().map(|r| (r.lambda, r.residual)).collect(),
        }],
        true,
    );
    if pts.len() >= 2 && pts.iter().all(|p| p.residual > 0.0) {
        checks.at_most(format!("decay exponent for K={}", lc.k), decay_exponent(&pts), lc.max_decay_exponent);
    }

    let wn_ok = matrix_wn_crosscheck(&table, table.n_max()).is_ok();
    checks.at_most("matrix W_n vs scalar w_n mismatch", if wn_ok { 0.0 } else { 1.0 }, 0.5);

    let [l, m] = lc.rmatrix;
    let c = LaxContext::conjugate_pair(&phi, kappa, l)?;
    checks.at_most(
        format!("r-matrix residual ({l}, {m})"),
        rmatrix_residual(&c, Complex64::new(m, 0.0))?,
        tol.rmatrix,
    );

    ctx.out.write_csv("lax_checks.csv", checks.rows())?;
    checks.finish()
}
