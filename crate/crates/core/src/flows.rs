//! Time integration of `d phi / dt = grad_s I_n(phi)`.
//!
//! The linear part `-i k^{n-1}` is taken from the symbolic table and
//! propagated exactly in Fourier space; the remainder is integrated by
//! Strang splitting (n = 3 only) or by integrating-factor RK4.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffpoly::{DerivativeCache, DiffPoly, MonomialKey};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, PeriodicGrid};
use crate::hierarchy::HierarchyTable;
use crate::kappa::Kappa;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Growth factor of the sup-norm that aborts a run.
pub const BLOW_UP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Strang,
    Ifrk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Strang => "strang",
            Scheme::Ifrk4 => "ifrk4",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strang" => Ok(Scheme::Strang),
            "ifrk4" => Ok(Scheme::Ifrk4),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: PeriodicGrid,
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    pub n: usize,
    pub kappa: Kappa,
    pub scheme: Scheme,
    pub dt: f64,
    pub stride: usize,
}

impl Trajectory {
    /// Time between consecutive snapshots.
    pub fn snapshot_interval(&self) -> f64 {
        self.dt * self.stride as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRow {
    pub time: f64,
    pub n: usize,
    pub value: f64,
    pub drift: f64,
}

/// Right-hand side of the n-th flow.
pub fn rhs(table: &HierarchyTable, n: usize, phi: &GridFunction) -> Result<GridFunction> {
    table.grad_s(n, phi)
}

/// Fourier symbol `-i k^{n-1}` of the linear part, per FFT bin.
pub fn linear_symbol(grid: &PeriodicGrid, n: usize) -> Vec<Complex64> {
    let p = (n - 1) as i32;
    let nyquist = grid.n() / 2;
    (0..grid.n())
        .map(|j| {
            if p % 2 == 1 && j == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                -I * grid.wavenumber(j).powi(p)
            }
        })
        .collect()
}

/// A flow ready to be stepped: exact linear propagator plus the symbolic
/// nonlinear remainder.
#[derive(Debug, Clone)]
pub struct Flow {
    n: usize,
    kappa: Kappa,
    grid: PeriodicGrid,
    symbol: Vec<Complex64>,
    nonlinear: DiffPoly,
}

impl Flow {
    pub fn new(table: &HierarchyTable, n: usize, grid: PeriodicGrid) -> Result<Self> {
        let (coeff, order) = table.linear_part(n)?;
        // c (ik)^{n-1} must equal -i k^{n-1}
        let expected = -I * (-I).powu(order);
        if order as usize != n - 1 || coeff != expected {
            return Err(Error::SymbolicMismatch(format!(
                "linear part of flow {n} is {coeff} d^{order}, expected {expected} d^{}",
                n - 1
            )));
        }
        Ok(Self {
            n,
            kappa: table.kappa(),
            grid,
            symbol: linear_symbol(&grid, n),
            nonlinear: table.nonlinear_part(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn propagator(&self, t: f64) -> Vec<Complex64> {
        self.symbol.iter().map(|s| (s * t).exp()).collect()
    }

    /// Nonlinear part of the right-hand side.
    pub fn nonlinear_rhs(&self, phi: &GridFunction) -> GridFunction {
        if self.nonlinear.is_zero() {
            return GridFunction::zeros(self.grid);
        }
        let mut cache = DerivativeCache::new(phi, &phi.conj()).expect("same grid");
        self.nonlinear.evaluate_cached(&mut cache)
    }

    fn check_nls_nonlinearity(&self) -> Result<()> {
        let expected = DiffPoly::monomial(
            -2.0 * I * self.kappa.value(),
            MonomialKey::new(vec![0, 0], vec![0]),
        );
        if self.nonlinear != expected {
            return Err(Error::SymbolicMismatch(format!(
                "nonlinear part of flow 3 is {}, expected {expected}",
                self.nonlinear
            )));
        }
        Ok(())
    }

    fn strang_step(&self, phi: &GridFunction, half: &[Complex64], dt: f64) -> GridFunction {
        let a = phi.apply_multiplier(half);
        let rate = -2.0 * self.kappa.value() * dt;
        let b = a.map(|z| z * Complex64::new(0.0, rate * z.norm_sqr()).exp());
        b.apply_multiplier(half)
    }

    fn ifrk4_step(&self, phi: &GridFunction, half: &[Complex64], full: &[Complex64], dt: f64) -> GridFunction {
        let s = Complex64::new(dt, 0.0);
        let h = Complex64::new(0.5, 0.0);
        let a = self.nonlinear_rhs(phi).scale(s);
        let e_phi = phi.apply_multiplier(half);
        let b = self
            .nonlinear_rhs(&phi.axpy(h, &a).unwrap().apply_multiplier(half))
            .scale(s);
        let c = self.nonlinear_rhs(&e_phi.axpy(h, &b).unwrap()).scale(s);
        let e2_phi = phi.apply_multiplier(full);
        let d = self
            .nonlinear_rhs(&e2_phi.add(&c.apply_multiplier(half)).unwrap())
            .scale(s);
        let bc = b.add(&c).unwrap().scale(Complex64::new(2.0, 0.0));
        let inc = a
            .apply_multiplier(full)
            .add(&bc.apply_multiplier(half))
            .unwrap()
            .add(&d)
            .unwrap();
        e2_phi.axpy(Complex64::new(1.0 / 6.0, 0.0), &inc).unwrap()
    }
}

/// Integrates the n-th flow for `steps` steps of size `dt`, keeping every
/// `stride`-th state (including the initial one).
pub fn evolve(
    table: &HierarchyTable,
    n: usize,
    phi0: &GridFunction,
    dt: f64,
    steps: usize,
    scheme: Scheme,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt={dt} must be positive")));
    }
    if stride == 0 || !steps.is_multiple_of(stride) {
        return Err(Error::InvalidArgument(format!(
            "stride {stride} must be positive and divide the step count {steps}"
        )));
    }
    if scheme == Scheme::Strang && n != 3 {
        return Err(Error::SchemeMismatch {
            scheme: scheme.name(),
            n,
        });
    }
    let grid = *phi0.grid();
    let flow = Flow::new(table, n, grid)?;
    if scheme == Scheme::Strang {
        flow.check_nls_nonlinearity()?;
    }
    let half = flow.propagator(0.5 * dt);
    let full = flow.propagator(dt);
    let sup0 = phi0.sup_norm();
    let mut phi = phi0.clone();
    let mut times = vec![0.0];
    let mut states = vec![phi0.clone()];
    for step in 1..=steps {
        phi = match scheme {
            Scheme::Strang => flow.strang_step(&phi, &half, dt),
            Scheme::Ifrk4 => flow.ifrk4_step(&phi, &half, &full, dt),
        };
        let sup = phi.sup_norm();
        if !phi.is_finite() {
            return Err(Error::NonFinite("flow state"));
        }
        if sup > BLOW_UP_FACTOR * sup0 && sup0 > 0.0 {
            return Err(Error::BlowUp {
                step,
                time: step as f64 * dt,
                sup,
            });
        }
        if step % stride == 0 {
            times.push(step as f64 * dt);
            states.push(phi.clone());
        }
    }
    Ok(Trajectory {
        grid,
        times,
        states,
        n,
        kappa: table.kappa(),
        scheme,
        dt,
        stride,
    })
}

/// `I_n` on every snapshot with drift `|I_n(t) - I_n(0)| / (1 + |I_n(0)|)`.
pub fn conservation_report(
    table: &HierarchyTable,
    traj: &Trajectory,
    n_list: &[usize],
) -> Result<Vec<ConservationRow>> {
    let values: Vec<Vec<f64>> = n_list
        .par_iter()
        .map(|&n| {
            traj.states
                .iter()
                .map(|s| table.invariant(n, s))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(n_list.len() * traj.times.len());
    for (i, &t) in traj.times.iter().enumerate() {
        for (col, &n) in n_list.iter().enumerate() {
            let v0 = values[col][0];
            let v = values[col][i];
            rows.push(ConservationRow {
                time: t,
                n,
                value: v,
                drift: (v - v0).abs() / (1.0 + v0.abs()),
            });
        }
    }
    Ok(rows)
}

/// Largest drift per functional index.
pub fn max_drift(rows: &[ConservationRow], n: usize) -> f64 {
    rows.iter()
        .filter(|r| r.n == n)
        .map(|r| r.drift)
        .fold(0.0, f64::max)
}
