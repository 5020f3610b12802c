//! Residuals of the third and fourth GP hierarchies on factorized states
//! along flow trajectories, and the kernel form of the Hamiltonian vector
//! field.

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::{factorized_kernel, kernel_grid, Axis, DensityKernel};
use crate::error::{Error, Result};
use crate::flows::Trajectory;
use crate::grid::GridFunction;
use crate::hierarchy::HierarchyTable;
use crate::kappa::Kappa;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_trajectory(traj: &Trajectory, n: usize) -> Result<()> {
    if traj.n != n {
        return Err(Error::InvalidArgument(format!(
            "residual needs a flow-{n} trajectory, got n={}",
            traj.n
        )));
    }
    if traj.stride != 1 {
        return Err(Error::StrideTooCoarse { stride: traj.stride });
    }
    if traj.states.len() < 3 {
        return Err(Error::InvalidArgument("need at least three snapshots".into()));
    }
    Ok(())
}

/// The three snapshots around one interior time, moved to the kernel grid.
struct Stencil {
    before: DensityKernel,
    after: DensityKernel,
    gamma1: DensityKernel,
    gamma2: DensityKernel,
    dt: f64,
}

impl Stencil {
    fn new(before: &GridFunction, now: &GridFunction, after: &GridFunction, dt: f64) -> Result<Self> {
        let grid = kernel_grid(now.grid(), 2)?;
        let now = now.resample(grid)?;
        Ok(Self {
            before: factorized_kernel(&before.resample(grid)?, 1)?,
            after: factorized_kernel(&after.resample(grid)?, 1)?,
            gamma1: factorized_kernel(&now, 1)?,
            gamma2: factorized_kernel(&now, 2)?,
            dt,
        })
    }

    fn time_derivative(&self) -> Result<DensityKernel> {
        Ok(self.after.sub(&self.before)?.scale(real(0.5 / self.dt)))
    }
}

/// Kernel of `i∂tγ1 + [Δ, γ1] - 2κ (B⁺ - B⁻)(γ2)` from three consecutive
/// NLS states spaced by `dt`.
pub fn gp3_residual_kernel(
    before: &GridFunction,
    now: &GridFunction,
    after: &GridFunction,
    dt: f64,
    kappa: Kappa,
) -> Result<DensityKernel> {
    let s = Stencil::new(before, now, after, dt)?;
    let contraction = s.gamma2.contract_plus()?.sub(&s.gamma2.contract_minus()?)?;
    s.time_derivative()?
        .scale(I)
        .add(&s.gamma1.laplacian_commutator()?)?
        .sub(&contraction.scale(real(2.0 * kappa.value())))
}

/// Kernel of `∂tγ1 - (∂³_x + ∂³_{x'})γ1 + 6κ (B⁺(∂_{x_1}γ2) + B⁻(∂_{x'_1}γ2))`
/// from three consecutive mKdV states spaced by `dt`.
pub fn gp4_residual_kernel(
    before: &GridFunction,
    now: &GridFunction,
    after: &GridFunction,
    dt: f64,
    kappa: Kappa,
) -> Result<DensityKernel> {
    let s = Stencil::new(before, now, after, dt)?;
    let dispersion = s
        .gamma1
        .derivative(Axis::Ket(0), 3)?
        .add(&s.gamma1.derivative(Axis::Bra(0), 3)?)?;
    let plus = s.gamma2.derivative(Axis::Ket(0), 1)?.contract_plus()?;
    let minus = s.gamma2.derivative(Axis::Bra(0), 1)?.contract_minus()?;
    s.time_derivative()?
        .sub(&dispersion)?
        .add(&plus.add(&minus)?.scale(real(6.0 * kappa.value())))
}

type KernelFn = fn(&GridFunction, &GridFunction, &GridFunction, f64, Kappa) -> Result<DensityKernel>;

fn residual_series(traj: &Trajectory, n: usize, f: KernelFn) -> Result<Vec<(f64, f64)>> {
    check_trajectory(traj, n)?;
    (1..traj.states.len() - 1)
        .into_par_iter()
        .map(|i| {
            let r = f(&traj.states[i - 1], &traj.states[i], &traj.states[i + 1], traj.dt, traj.kappa)?;
            Ok((traj.times[i], r.sup_norm()))
        })
        .collect()
}

/// Sup-norm of the third GP hierarchy residual at `ℓ = 1` for every
/// interior snapshot of an NLS trajectory.
pub fn gp3_residual(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    residual_series(traj, 3, gp3_residual_kernel)
}

/// Sup-norm of the fourth GP hierarchy residual at `ℓ = 1` for every
/// interior snapshot of an mKdV trajectory.
pub fn gp4_residual(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    residual_series(traj, 4, gp4_residual_kernel)
}

/// `Σ_α` of the factorized kernel with slot `α` differentiated: `f` placed
/// in ket `α` plus `f` placed in bra `α`.
fn leibniz_kernel(phi: &GridFunction, f: &GridFunction, k: usize) -> Result<DensityKernel> {
    let mut acc: Option<DensityKernel> = None;
    for alpha in 0..k {
        let mut kets = vec![phi; k];
        kets[alpha] = f;
        let bras = vec![phi; k];
        let ket_term = DensityKernel::product(&kets, &bras)?;
        let kets = vec![phi; k];
        let mut bras = vec![phi; k];
        bras[alpha] = f;
        let bra_term = DensityKernel::product(&kets, &bras)?;
        let term = ket_term.add(&bra_term)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("k must be positive".into()))
}

/// Sup-norm difference between the Hamiltonian vector field of `H_n` at
/// `Γ = |φ^{⊗k}⟩⟨φ^{⊗k}|` (assembled from the two variational derivatives)
/// and the Leibniz derivative of `Γ` with `dφ/dt = rhs_phi`.
pub fn xhn_factorized_residual(
    table: &HierarchyTable,
    n: usize,
    k: usize,
    phi: &GridFunction,
    rhs_phi: &GridFunction,
) -> Result<f64> {
    phi.grid().check_same(rhs_phi.grid())?;
    let grid = kernel_grid(phi.grid(), k)?;
    let bar = phi.conj();
    let s = table
        .grad1_eval(n, phi, &bar)?
        .conj()
        .add(&table.grad2bar_eval(n, phi, &bar)?)?;
    let slot = s.scale(Complex64::new(0.0, -0.5)).resample(grid)?;
    let phi_k = phi.resample(grid)?;
    let field = leibniz_kernel(&phi_k, &slot, k)?;
    let leibniz = leibniz_kernel(&phi_k, &rhs_phi.resample(grid)?, k)?;
    field.max_abs_diff(&leibniz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{evolve, Scheme};
    use crate::grid::PeriodicGrid;

    fn both() -> [Kappa; 2] {
        [Kappa::Defocusing, Kappa::Focusing]
    }

    #[test]
    fn zero_field_has_zero_residuals() {
        let g = PeriodicGrid::standard();
        for kappa in both() {
            let t = HierarchyTable::build(4, kappa).unwrap();
            let zero = GridFunction::zeros(g);
            let tr = evolve(&t, 3, &zero, 1e-3, 3, Scheme::Strang, 1).unwrap();
            assert!(gp3_residual(&tr).unwrap().iter().all(|(_, r)| *r == 0.0));
            let tr = evolve(&t, 4, &zero, 1e-3, 3, Scheme::Ifrk4, 1).unwrap();
            assert!(gp4_residual(&tr).unwrap().iter().all(|(_, r)| *r == 0.0));
            assert_eq!(xhn_factorized_residual(&t, 3, 2, &zero, &zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn plane_wave_nls_solves_gp3() {
        let g = PeriodicGrid::standard();
        for kappa in both() {
            let t = HierarchyTable::build(3, kappa).unwrap();
            let wave = GridFunction::plane_wave(g, Complex64::new(0.6, -0.2), 2);
            let tr = evolve(&t, 3, &wave, 1e-3, 20, Scheme::Strang, 1).unwrap();
            let worst = gp3_residual(&tr).unwrap().into_iter().map(|(_, r)| r).fold(0.0, f64::max);
            assert!(worst <= 1e-4, "{worst}");
        }
    }

    #[test]
    fn trajectory_preconditions() {
        let g = PeriodicGrid::standard();
        let t = HierarchyTable::build(4, Kappa::Defocusing).unwrap();
        let zero = GridFunction::zeros(g);
        let coarse = evolve(&t, 3, &zero, 1e-3, 4, Scheme::Strang, 2).unwrap();
        assert!(matches!(gp3_residual(&coarse), Err(Error::StrideTooCoarse { stride: 2 })));
        let wrong = evolve(&t, 4, &zero, 1e-3, 4, Scheme::Ifrk4, 1).unwrap();
        assert!(gp3_residual(&wrong).is_err());
    }

    #[test]
    fn residual_kernels_keep_adjoint_symmetry() {
        let g = PeriodicGrid::standard();
        for kappa in both() {
            let t = HierarchyTable::build(4, kappa).unwrap();
            let phi = GridFunction::random_band_limited(g, 2, 6, 0.5).unwrap();
            let tr = evolve(&t, 3, &phi, 1e-3, 2, Scheme::Strang, 1).unwrap();
            let r3 = gp3_residual_kernel(&tr.states[0], &tr.states[1], &tr.states[2], tr.dt, kappa).unwrap();
            // i × (self-adjoint) is anti-self-adjoint
            assert!(r3.add(&r3.adjoint()).unwrap().sup_norm() < 1e-9);
            let tr = evolve(&t, 4, &phi, 1e-3, 2, Scheme::Ifrk4, 1).unwrap();
            let r4 = gp4_residual_kernel(&tr.states[0], &tr.states[1], &tr.states[2], tr.dt, kappa).unwrap();
            assert!(r4.sub(&r4.adjoint()).unwrap().sup_norm() < 1e-9);
        }
    }

    #[test]
    fn vector_field_kernel_matches_leibniz() {
        let g = PeriodicGrid::standard();
        for kappa in both() {
            let t = HierarchyTable::build(3, kappa).unwrap();
            let phi = GridFunction::random_band_limited(g, 3, 12, 0.8).unwrap();
            for k in 1..=2 {
                let rhs = t.grad_s(3, &phi).unwrap();
                let r = xhn_factorized_residual(&t, 3, k, &phi, &rhs).unwrap();
                assert!(r <= 1e-10 * rhs.sup_norm().max(1.0), "k={k}: {r}");
                // phase rotation: ket and bra contributions cancel
                let rot = t.grad_s(1, &phi).unwrap();
                assert!(xhn_factorized_residual(&t, 1, k, &phi, &rot).unwrap() <= 1e-12);
                let field = leibniz_kernel(&phi.resample(kernel_grid(&g, k).unwrap()).unwrap(), &rot.resample(kernel_grid(&g, k).unwrap()).unwrap(), k).unwrap();
                assert!(field.sup_norm() <= 1e-12);
            }
            let wrong = t.grad_s(2, &phi).unwrap();
            assert!(xhn_factorized_residual(&t, 3, 2, &phi, &wrong).unwrap() > 1e-3);
        }
    }
}
