//! Zero-curvature residual along flow trajectories and the quadratic
//! r-matrix bracket of transition matrices.

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::{inverse2, max_abs, sigma_minus, sigma_plus, u_of, v_of, LaxContext, Mat2};
use crate::error::{Error, Result};
use crate::flows::Trajectory;
use crate::grid::GridFunction;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sup_x max-entry |∂t U - ∂x V + [U, V]|` at every interior snapshot of an
/// NLS trajectory, with a centered time difference.
pub fn zero_curvature_residual(traj: &Trajectory, lambda: f64) -> Result<Vec<(f64, f64)>> {
    if traj.n != 3 {
        return Err(Error::InvalidArgument(format!(
            "zero-curvature pair matches flow 3, trajectory has n={}",
            traj.n
        )));
    }
    if traj.stride != 1 {
        return Err(Error::StrideTooCoarse { stride: traj.stride });
    }
    if traj.states.len() < 3 {
        return Err(Error::InvalidArgument("need at least three snapshots".into()));
    }
    let kappa = traj.kappa;
    let lam = Complex64::new(lambda, 0.0);
    let grid = traj.grid;
    let n = grid.n();
    let two_dt = 2.0 * traj.dt;
    let mut out = Vec::with_capacity(traj.states.len() - 2);
    for i in 1..traj.states.len() - 1 {
        let phi = &traj.states[i];
        let bar = phi.conj();
        let d1 = phi.spectral_derivative(1);
        let d2 = bar.spectral_derivative(1);
        let before = &traj.states[i - 1];
        let after = &traj.states[i + 1];
        let u: Vec<Mat2> = (0..n)
            .map(|j| u_of(kappa, lam, phi.values()[j], bar.values()[j]))
            .collect();
        let v: Vec<Mat2> = (0..n)
            .map(|j| v_of(kappa, lam, phi.values()[j], bar.values()[j], d1.values()[j], d2.values()[j]))
            .collect();
        let mut dv = [[None, None], [None, None]];
        for (r, row) in dv.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                let entry = GridFunction::new(grid, v.iter().map(|m| m[(r, c)]).collect())?;
                *slot = Some(entry.spectral_derivative(1));
            }
        }
        let mut sup = 0.0f64;
        for j in 0..n {
            let ut = (u_of(kappa, lam, after.values()[j], after.values()[j].conj())
                - u_of(kappa, lam, before.values()[j], before.values()[j].conj()))
                / Complex64::new(two_dt, 0.0);
            let vx = Mat2::from_fn(|r, c| dv[r][c].as_ref().expect("filled").values()[j]);
            let comm = u[j] * v[j] - v[j] * u[j];
            sup = sup.max(max_abs(&(ut - vx + comm)));
        }
        out.push((traj.times[i], sup));
    }
    Ok(out)
}

/// Both sides of the r-matrix identity for `T(L, -L)` at `λ` (from the
/// context) and `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrixSides {
    pub lhs: Matrix4<Complex64>,
    pub rhs: Matrix4<Complex64>,
}

impl RMatrixSides {
    /// `max|LHS - RHS| / max|LHS + RHS|`.
    pub fn normalized_residual(&self) -> f64 {
        let den = max_abs(&(self.lhs + self.rhs));
        let num = max_abs(&(self.lhs - self.rhs));
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// Swap operator on `C² ⊗ C²`.
pub fn permutation() -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| {
        let (i, j) = (c / 2, c % 2);
        if r == 2 * j + i {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Transition matrices `T(z_k, -L)` at every sub-step node.
fn partial_transports(props: &[Mat2]) -> Vec<Mat2> {
    let mut out = Vec::with_capacity(props.len() + 1);
    let mut t = Mat2::identity();
    out.push(t);
    for m in props {
        t = m * t;
        out.push(t);
    }
    out
}

/// Quadrature of the variational-derivative bracket (left side) and the
/// commutator `-[r(λ-μ), T(λ) ⊗ T(μ)]` with `r = -κ P / (λ-μ)`.
pub fn rmatrix_sides(ctx: &LaxContext, mu: Complex64) -> Result<RMatrixSides> {
    let lambda = ctx.lambda();
    if lambda == mu {
        return Err(Error::InvalidArgument("r-matrix check needs λ ≠ μ".into()));
    }
    let kap = ctx.kappa().value();
    let ctx_mu = ctx.with_lambda(mu);
    let tl = partial_transports(&ctx.substep_propagators());
    let tm = partial_transports(&ctx_mu.substep_propagators());
    let m = tl.len() - 1;
    let full_l = tl[m];
    let full_m = tm[m];
    let h = ctx.grid().spacing() / ctx.substeps() as f64;
    let sm = sigma_minus();
    let sp = sigma_plus();
    let mut lhs = Matrix4::<Complex64>::zeros();
    for k in 0..=m {
        let w = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let left_l = full_l * inverse2(&tl[k]);
        let left_m = full_m * inverse2(&tm[k]);
        let a_l = left_l * sm * tl[k];
        let b_l = left_l * sp * tl[k];
        let a_m = left_m * sm * tm[k];
        let b_m = left_m * sp * tm[k];
        let term = a_l.kronecker(&b_m) - b_l.kronecker(&a_m);
        lhs += term * Complex64::new(w * h / 3.0, 0.0);
    }
    lhs *= -I * kap;
    let tt = full_l.kronecker(&full_m);
    let p = permutation();
    let rhs = (p * tt - tt * p) * (Complex64::new(kap, 0.0) / (lambda - mu));
    let sides = RMatrixSides { lhs, rhs };
    if !sides.lhs.iter().chain(sides.rhs.iter()).all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("r-matrix sides"));
    }
    Ok(sides)
}

/// Normalized residual of the r-matrix identity.
pub fn rmatrix_residual(ctx: &LaxContext, mu: Complex64) -> Result<f64> {
    Ok(rmatrix_sides(ctx, mu)?.normalized_residual())
}
