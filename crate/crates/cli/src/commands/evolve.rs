use hierlab::flows::{conservation_report, evolve as run_flow, max_drift, Scheme};

use super::Context;
use crate::error::CliResult;
use crate::output::Checks;
use crate::plot::Series;

pub fn evolve(ctx: &Context) -> CliResult<()> {
    let fc = ctx.cfg.flow;
    let n_max = ctx.cfg.n_max.max(fc.n);
    let table = ctx.table(n_max)?;
    let phi = ctx.cfg.initial_state()?;
    let traj = run_flow(&table, fc.n, &phi, fc.dt, fc.steps, fc.scheme, fc.stride)?;
    let list: Vec<usize> = (1..=ctx.cfg.n_max).collect();
    let rows = conservation_report(&table, &traj, &list)?;
    ctx.out.write_csv("conservation.csv", &rows)?;
    let last = traj.states.last().expect("trajectory keeps the initial state");
    ctx.out.write_bytes("final_state.json", format!("{}\n", last.to_state().to_json()).as_bytes())?;

    let series: Vec<Series> = list
        .iter()
        .map(|&n| Series {
            label: format!("I{n}"),
            points: rows.iter().filter(|r| r.n == n).map(|r| (r.time, r.drift)).collect(),
        })
        .collect();
    ctx.plot("conservation.svg", "relative drift of I_n", "t", "drift", &series, true);

    let tol = match fc.scheme {
        Scheme::Strang => ctx.cfg.tolerances.conservation_strang,
        Scheme::Ifrk4 => ctx.cfg.tolerances.conservation_ifrk4,
    };
    let mut checks = Checks::default();
    for &n in &list {
        checks.at_most(format!("drift of I{n}"), max_drift(&rows, n), tol);
    }
    checks.finish()
}
