//! Quasi-momentum along real spectral-parameter sweeps and its large-λ
//! expansion in the conserved functionals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::{check_branch, LaxContext};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyTable;

/// Minimal distance of `F/2` from `±1` accepted at a reported point.
pub const BRANCH_GUARD: f64 = 1e-6;

/// Largest phase advance `L Δλ` between consecutive sweep nodes.
const MAX_PHASE_STEP: f64 = 0.05;

fn nearest_candidate(principal: Complex64, prediction: Complex64) -> Complex64 {
    [principal, -principal]
        .into_iter()
        .map(|a| {
            let j = ((prediction - a).re / (2.0 * PI)).round();
            a + 2.0 * PI * j
        })
        .min_by(|x, y| (x - prediction).norm().total_cmp(&(y - prediction).norm()))
        .expect("two candidates")
}

/// Continuous quasi-momentum at the requested real `λ` values.
///
/// The branch is fixed near `-λL` at a seed just above the largest target,
/// where `λL` is an odd multiple of `π/2`. From there the sweep walks down
/// in small steps, each time picking the `arccos` translate closest to a
/// linear extrapolation of the previous points.
pub fn quasimomentum_sweep(ctx: &LaxContext, lambdas: &[f64]) -> Result<Vec<(f64, Complex64)>> {
    if lambdas.is_empty() {
        return Ok(vec![]);
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("sweep values must be finite".into()));
    }
    let l = ctx.grid().half_period();
    let mut targets: Vec<f64> = lambdas.to_vec();
    targets.sort_by(|a, b| b.total_cmp(a));
    targets.dedup();
    let top = targets[0];
    let seed = ((top * l / PI - 0.5).floor() + 1.5) * PI / l;

    // node list: (λ, is_target)
    let mut nodes = vec![(seed, false)];
    let mut prev = seed;
    for &t in &targets {
        let pieces = (((prev - t) * l / MAX_PHASE_STEP).ceil() as usize).max(1);
        for i in 1..pieces {
            nodes.push((prev - (prev - t) * i as f64 / pieces as f64, false));
        }
        nodes.push((t, true));
        prev = t;
    }

    let halves: Vec<Complex64> = nodes
        .par_iter()
        .map(|&(lam, _)| ctx.with_lambda(Complex64::new(lam, 0.0)).monodromy_trace().map(|f| f / 2.0))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(targets.len());
    let mut history: Vec<(f64, Complex64)> = Vec::with_capacity(nodes.len());
    for (&(lam, is_target), &half) in nodes.iter().zip(&halves) {
        if is_target {
            check_branch(lam, half)?;
        }
        let principal = half.acos();
        let prediction = match history.as_slice() {
            [] => Complex64::new(-lam * l, 0.0),
            [.., (l1, p1)] if history.len() == 1 => p1 + (l1 - lam) * l,
            [.., (l0, p0), (l1, p1)] => p1 + (p1 - p0) * ((lam - l1) / (l1 - l0)),
            _ => unreachable!(),
        };
        let p = nearest_candidate(principal, prediction);
        history.push((lam, p));
        if is_target {
            out.push((lam, p));
        }
    }
    // report in the caller's order
    lambdas
        .iter()
        .map(|&lam| {
            out.iter()
                .find(|(t, _)| *t == lam)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("lost sweep point {lam}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPoint {
    pub lambda: f64,
    pub p: Complex64,
    pub residual: f64,
}

/// `|p(λ) + λL - κ Σ_{k≤K} Ĩ_k(ψ1, ψ2) / λ^k|` along a sweep.
pub fn asymptotic_residual(
    ctx: &LaxContext,
    table: &HierarchyTable,
    lambdas: &[f64],
    order: usize,
) -> Result<Vec<AsymptoticPoint>> {
    if let Some(bad) = lambdas.iter().find(|l| l.abs() < 10.0) {
        return Err(Error::InvalidArgument(format!(
            "asymptotic comparison needs |λ| >= 10, got {bad}"
        )));
    }
    if order > table.n_max() {
        return Err(Error::OutOfRange {
            what: "K",
            value: order as i64,
            allowed: format!("0..={}", table.n_max()),
        });
    }
    if table.kappa() != ctx.kappa() {
        return Err(Error::InvalidArgument("table and context use different kappa".into()));
    }
    let coeffs: Vec<Complex64> = (1..=order)
        .map(|k| table.itilde(k, ctx.psi1(), ctx.psi2()))
        .collect::<Result<_>>()?;
    let l = ctx.grid().half_period();
    let kap = ctx.kappa().value();
    let sweep = quasimomentum_sweep(ctx, lambdas)?;
    Ok(sweep
        .into_iter()
        .map(|(lambda, p)| {
            let series: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, ck)| ck * kap / lambda.powi(i as i32 + 1))
                .sum();
            AsymptoticPoint {
                lambda,
                p,
                residual: (p + lambda * l - series).norm(),
            }
        })
        .collect())
}

/// Least-squares slope of `ln residual` against `ln λ`.
pub fn decay_exponent(points: &[AsymptoticPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.lambda.abs().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.residual.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
