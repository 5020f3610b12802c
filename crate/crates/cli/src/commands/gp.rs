use hierlab::flows::{evolve, Scheme};
use hierlab::gp::{
    factorized_energy, gp3_residual, gp4_residual, mixed_energy, w3_spot_check, w4_spot_check,
    xhn_factorized_residual,
};
use hierlab::GridFunction;
use serde::Serialize;

use super::Context;
use crate::error::CliResult;
use crate::output::Checks;
use crate::plot::Series;

#[derive(Serialize)]
struct ResidualRow {
    dt: f64,
    time: f64,
    residual: f64,
}

pub fn gp_check(ctx: &Context) -> CliResult<()> {
    let tol = ctx.cfg.tolerances;
    let gc = ctx.cfg.gp;
    let n_max = ctx.cfg.n_max.max(4);
    let table = ctx.table(n_max)?;
    let grid = ctx.cfg.grid()?;
    let phi = ctx.cfg.initial_state()?;
    let other = GridFunction::random_band_limited(grid, 6, ctx.seed(1), 0.8)?;
    let mut checks = Checks::default();

    let (mut fac, mut mixed) = (0.0f64, 0.0f64);
    for n in 1..=ctx.cfg.n_max {
        let inv = table.invariant(n, &phi)?;
        fac = fac.max((factorized_energy(&table, n, &phi)? - inv).abs() / inv.abs().max(1.0));
        let ibn = table.i_bn(n, &phi, &other)?;
        mixed = mixed.max((mixed_energy(&table, n, &phi, &other)? - ibn).abs() / ibn.abs().max(1.0));
    }
    checks.at_most("factorized energy vs I_n", fac, tol.energy);
    checks.at_most("mixed energy vs I_b,n", mixed, tol.energy);
    checks.at_most("W3 two-particle spot check", w3_spot_check(&table, &phi)?.relative_error(), tol.spot_check);
    checks.at_most("W4 two-particle spot check", w4_spot_check(&table, &phi)?.relative_error(), tol.spot_check);

    let mut worst = 0.0f64;
    for n in 1..=4 {
        let rhs = table.grad_s(n, &phi)?;
        for k in 1..=2 {
            worst = worst.max(xhn_factorized_residual(&table, n, k, &phi, &rhs)? / (1.0 + rhs.sup_norm()));
        }
    }
    checks.at_most("vector-field kernel vs Leibniz kernel", worst, tol.xhn);

    let data = GridFunction::random_band_limited(grid, gc.cutoff, ctx.seed(2), gc.amplitude)?;
    for (n, scheme, limit, name) in [(3, Scheme::Strang, tol.gp3, "gp3"), (4, Scheme::Ifrk4, tol.gp4, "gp4")] {
        let mut rows = Vec::new();
        let mut peaks = Vec::new();
        for dt in gc.dts {
            let steps = (gc.time / dt).round() as usize;
            let tr = evolve(&table, n, &data, dt, steps, scheme, 1)?;
            let res = if n == 3 { gp3_residual(&tr)? } else { gp4_residual(&tr)? };
            peaks.push(res.iter().map(|r| r.1).fold(0.0, f64::max));
            rows.extend(res.into_iter().map(|(time, residual)| ResidualRow { dt, time, residual }));
        }
        ctx.out.write_csv(&format!("{name}.csv"), &rows)?;
        let series: Vec<Series> = gc
            .dts
            .iter()
            .map(|&dt| Series {
                label: format!("dt={dt}"),
                points: rows.iter().filter(|r| r.dt == dt).map(|r| (r.time, r.residual)).collect(),
            })
            .collect();
        ctx.plot(&format!("{name}.svg"), &format!("{name} residual"), "t", "sup residual", &series, true);
        checks.at_most(format!("{name} residual at dt={}", gc.dts[0]), peaks[0], limit);
        checks.at_least(format!("{name} refinement factor"), peaks[0] / peaks[1], gc.min_refinement);
    }

    ctx.out.write_csv("gp_checks.csv", checks.rows())?;
    checks.finish()
}
