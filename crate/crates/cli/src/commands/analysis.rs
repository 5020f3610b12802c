use hierlab::poisson::{bracket_l2, bracket_l2_v, fd_directional};
use hierlab::{omega_l2, GridFunction};
use num_complex::Complex64;
use serde::Serialize;

use super::Context;
use crate::error::CliResult;
use crate::output::Checks;

#[derive(Serialize)]
struct InvariantRow {
    n: usize,
    value: f64,
}

pub fn invariants(ctx: &Context) -> CliResult<()> {
    let table = ctx.table(ctx.cfg.n_max)?;
    let phi = ctx.cfg.initial_state()?;
    let rows = (1..=ctx.cfg.n_max)
        .map(|n| Ok(InvariantRow { n, value: table.invariant(n, &phi)? }))
        .collect::<CliResult<Vec<_>>>()?;
    for r in &rows {
        println!("I_{} = {:.15e}", r.n, r.value);
    }
    ctx.out.write_csv("invariants.csv", &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct GradRow {
    trial: usize,
    n: usize,
    fd: f64,
    exact: f64,
    error: f64,
    limit: f64,
}

fn random(ctx: &Context, index: u64, cutoff: usize, amplitude: f64) -> CliResult<GridFunction> {
    Ok(GridFunction::random_band_limited(ctx.cfg.grid()?, cutoff, ctx.seed(index), amplitude)?)
}

pub fn gradcheck(ctx: &Context) -> CliResult<()> {
    let gc = ctx.cfg.gradcheck;
    let tol = ctx.cfg.tolerances.gradient;
    let table = ctx.table(ctx.cfg.n_max)?;
    let k = ctx.kappa().value();
    let mut rows = Vec::new();
    let mut closed_form = 0.0f64;
    for trial in 0..gc.trials {
        let phi = random(ctx, 2 * trial as u64, gc.cutoff, gc.amplitude)?;
        let delta = random(ctx, 2 * trial as u64 + 1, gc.cutoff, gc.amplitude)?;
        for n in 1..=ctx.cfg.n_max {
            let fd = fd_directional(|p| Ok(Complex64::new(table.invariant(n, p)?, 0.0)), &phi, &delta, gc.h)?.re;
            let exact = omega_l2(&table.grad_s(n, &phi)?, &delta)?;
            let inv = table.invariant(n, &phi)?;
            rows.push(GradRow {
                trial,
                n,
                fd,
                exact,
                error: (fd - exact).abs() / (1.0 + inv.abs()),
                limit: tol,
            });
        }
        if ctx.cfg.n_max >= 4 {
            let dens = phi.map(|z| Complex64::new(z.norm_sqr(), 0.0));
            let nls = phi
                .spectral_derivative(2)
                .scale(Complex64::new(0.0, 1.0))
                .sub(&dens.mul(&phi)?.scale(Complex64::new(0.0, 2.0 * k)))?;
            let mkdv = phi
                .spectral_derivative(3)
                .sub(&dens.mul(&phi.spectral_derivative(1))?.scale(Complex64::new(6.0 * k, 0.0)))?;
            for (n, want) in [(3, nls), (4, mkdv)] {
                let got = table.grad_s(n, &phi)?;
                closed_form = closed_form.max(got.max_abs_diff(&want)? / want.sup_norm().max(f64::MIN_POSITIVE));
            }
        }
    }
    ctx.out.write_csv("gradcheck.csv", &rows)?;
    let mut checks = Checks::default();
    let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    checks.at_most("finite difference vs symplectic gradient", worst, tol);
    if ctx.cfg.n_max >= 4 {
        checks.at_most("grad_s I3, I4 vs closed forms (relative)", closed_form, 1e-9);
    }
    checks.finish()
}

#[derive(Serialize)]
struct BracketRow {
    kind: &'static str,
    trial: usize,
    n: usize,
    m: usize,
    value_re: f64,
    value_im: f64,
    scale: f64,
    normalized: f64,
}

pub fn involution(ctx: &Context) -> CliResult<()> {
    let ic = &ctx.cfg.involution;
    let pairs = ic.pairs.resolve(ctx.cfg.n_max)?;
    let table = ctx.table(ctx.cfg.n_max)?;
    let mut rows = Vec::new();
    for trial in 0..ic.trials {
        let base = 3 * trial as u64;
        let phi = random(ctx, base, ic.cutoff, ic.amplitude)?;
        let a = random(ctx, base + 1, ic.cutoff, ic.amplitude)?;
        let b = random(ctx, base + 2, ic.cutoff, ic.amplitude)?;
        for &(n, m) in &pairs {
            for (kind, r) in [
                ("l2", bracket_l2(&table, n, m, &phi)?),
                ("l2v", bracket_l2_v(&table, n, m, &a, &b)?),
            ] {
                rows.push(BracketRow {
                    kind,
                    trial,
                    n,
                    m,
                    value_re: r.value.re,
                    value_im: r.value.im,
                    scale: r.scale,
                    normalized: r.normalized,
                });
            }
        }
    }
    ctx.out.write_csv("involution.csv", &rows)?;
    let mut checks = Checks::default();
    for kind in ["l2", "l2v"] {
        let worst = rows
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.normalized)
            .fold(0.0, f64::max);
        checks.at_most(format!("max normalized bracket ({kind})"), worst, ctx.cfg.tolerances.involution);
    }
    checks.finish()
}

pub fn dump_tables(ctx: &Context) -> CliResult<()> {
    let table = ctx.table(ctx.cfg.n_max)?;
    let mut text = table.dump_json();
    text.push('\n');
    let path = ctx.out.write_bytes("tables.json", text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}
