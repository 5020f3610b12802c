//! Graded recursion tables for the conserved densities and their gradients.
//!
//! `w_1 = u`, and `w_{n+1}^{(k)} = -i d w_n^{(k)} + kappa sum_m sum_{l+j=k}
//! v w_m^{(l)} w_{n-m}^{(j)}`. Evaluating with `u = phi`, `v = conj(phi)`
//! gives the conserved densities `conj(phi) w_n`.

use num_complex::Complex64;
use serde::Serialize;

use crate::diffpoly::{Class, DerivativeCache, DiffPoly};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kappa::Kappa;

pub const MAX_ORDER: usize = 10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest `k` with a nonzero `w_n^{(k)}`.
pub fn k_cutoff(n: usize) -> usize {
    if n % 2 == 1 {
        n.div_ceil(2)
    } else {
        n / 2
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyTable {
    n_max: usize,
    kappa: Kappa,
    // wk[n][k], both 1-based; index 0 unused
    wk: Vec<Vec<DiffPoly>>,
    w: Vec<DiffPoly>,
    grad1: Vec<DiffPoly>,
    grad2bar: Vec<DiffPoly>,
}

impl HierarchyTable {
    pub fn build(n_max: usize, kappa: Kappa) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&n_max) {
            return Err(Error::OutOfRange {
                what: "n_max",
                value: n_max as i64,
                allowed: format!("1..={MAX_ORDER}"),
            });
        }
        let kap = kappa.complex();
        let mut wk: Vec<Vec<DiffPoly>> = vec![vec![]; n_max + 1];
        wk[1] = vec![DiffPoly::zero(), DiffPoly::u(0)];
        for n in 1..n_max {
            let kmax = k_cutoff(n + 1);
            let mut next = vec![DiffPoly::zero(); kmax + 1];
            for (k, slot) in next.iter_mut().enumerate().skip(1) {
                let mut acc = match wk[n].get(k) {
                    Some(p) => p.d_dx().scale(-I),
                    None => DiffPoly::zero(),
                };
                for m in 1..n {
                    for l in 1..k {
                        let j = k - l;
                        let (Some(a), Some(b)) = (wk[m].get(l), wk[n - m].get(j)) else {
                            continue;
                        };
                        if a.is_zero() || b.is_zero() {
                            continue;
                        }
                        acc = acc.add(&DiffPoly::v(0).mul(a).mul(b).scale(kap));
                    }
                }
                *slot = acc;
            }
            wk[n + 1] = next;
        }
        let w: Vec<DiffPoly> = wk
            .iter()
            .map(|row| row.iter().fold(DiffPoly::zero(), |s, p| s.add(p)))
            .collect();
        let mut grad1 = vec![DiffPoly::zero()];
        let mut grad2bar = vec![DiffPoly::zero()];
        for wn in w.iter().skip(1) {
            let density = DiffPoly::v(0).mul(wn);
            grad1.push(density.euler_derivative(Class::U));
            grad2bar.push(density.euler_derivative(Class::V));
        }
        let table = Self {
            n_max,
            kappa,
            wk,
            w,
            grad1,
            grad2bar,
        };
        table.check_structure()?;
        debug_assert!(table.collapsed_recursion_holds());
        Ok(table)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// `w_n^{(k)}`; zero for `k` beyond the cutoff.
    pub fn wk(&self, n: usize, k: usize) -> Result<DiffPoly> {
        self.check_n(n)?;
        if k == 0 {
            return Err(Error::OutOfRange {
                what: "k",
                value: 0,
                allowed: ">= 1".into(),
            });
        }
        Ok(self.wk[n].get(k).cloned().unwrap_or_default())
    }

    pub fn w(&self, n: usize) -> Result<&DiffPoly> {
        self.check_n(n)?;
        Ok(&self.w[n])
    }

    /// Euler derivative of `v w_n` in the `u` class.
    pub fn grad1(&self, n: usize) -> Result<&DiffPoly> {
        self.check_n(n)?;
        Ok(&self.grad1[n])
    }

    /// Euler derivative of `v w_n` in the `v` class.
    pub fn grad2bar(&self, n: usize) -> Result<&DiffPoly> {
        self.check_n(n)?;
        Ok(&self.grad2bar[n])
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            Err(Error::OutOfRange {
                what: "n",
                value: n as i64,
                allowed: format!("1..={}", self.n_max),
            })
        } else {
            Ok(())
        }
    }

    /// Vanishing thresholds, slot counts, derivative order and coefficient
    /// parity of every graded component.
    pub fn check_structure(&self) -> Result<()> {
        for n in 1..=self.n_max {
            for (k, p) in self.wk[n].iter().enumerate().skip(1) {
                if k > k_cutoff(n) && !p.is_zero() {
                    return Err(Error::SymbolicMismatch(format!(
                        "w_{n}^({k}) should vanish"
                    )));
                }
                if k <= k_cutoff(n) && p.is_zero() {
                    return Err(Error::SymbolicMismatch(format!(
                        "w_{n}^({k}) unexpectedly vanishes"
                    )));
                }
                for (key, coeff) in p.terms() {
                    let order = (n - 1) as i64 - 2 * (k as i64 - 1);
                    if key.u_degree() != k
                        || key.v_degree() != k - 1
                        || key.total_order() as i64 != order
                    {
                        return Err(Error::SymbolicMismatch(format!(
                            "w_{n}^({k}) has a monomial with bad bookkeeping: {key:?}"
                        )));
                    }
                    let parity_ok = if n % 2 == 1 {
                        coeff.im == 0.0
                    } else {
                        coeff.re == 0.0
                    };
                    if !parity_ok {
                        return Err(Error::SymbolicMismatch(format!(
                            "w_{n}^({k}) coefficient {coeff} has the wrong parity"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the ungraded recursion and compares with the summed table.
    pub fn collapsed_recursion_holds(&self) -> bool {
        let kap = self.kappa.complex();
        let mut w = vec![DiffPoly::zero(), DiffPoly::u(0)];
        for n in 1..self.n_max {
            let mut acc = w[n].d_dx().scale(-I);
            for m in 1..n {
                acc = acc.add(&DiffPoly::v(0).mul(&w[m]).mul(&w[n - m]).scale(kap));
            }
            w.push(acc);
        }
        w.iter().zip(&self.w).skip(1).all(|(a, b)| a == b)
    }

    pub fn w_eval(&self, n: usize, psi1: &GridFunction, psi2: &GridFunction) -> Result<GridFunction> {
        self.w(n)?.evaluate(psi1, psi2)
    }

    /// `∫ psi2 w_n(psi1, psi2) dx`.
    pub fn itilde(&self, n: usize, psi1: &GridFunction, psi2: &GridFunction) -> Result<Complex64> {
        let wn = self.w_eval(n, psi1, psi2)?;
        Ok(psi2.mul(&wn)?.integrate())
    }

    /// Real conserved functional `I_n(phi)`.
    pub fn invariant(&self, n: usize, phi: &GridFunction) -> Result<f64> {
        let z = self.itilde(n, phi, &phi.conj())?;
        real_part(n, z)
    }

    /// Graded component `∫ phi_v w_n^{(k)}(phi_u, phi_v) dx`.
    pub fn ink(&self, n: usize, k: usize, phi_u: &GridFunction, phi_v: &GridFunction) -> Result<Complex64> {
        let p = self.wk(n, k)?;
        phi_u.grid().check_same(phi_v.grid())?;
        if p.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(phi_v.mul(&p.evaluate(phi_u, phi_v)?)?.integrate())
    }

    pub fn grad1_eval(&self, n: usize, psi1: &GridFunction, psi2: &GridFunction) -> Result<GridFunction> {
        self.grad1(n)?.evaluate(psi1, psi2)
    }

    pub fn grad2bar_eval(&self, n: usize, psi1: &GridFunction, psi2: &GridFunction) -> Result<GridFunction> {
        self.grad2bar(n)?.evaluate(psi1, psi2)
    }

    /// Symplectic gradient, computed through both variational derivatives.
    pub fn grad_s(&self, n: usize, phi: &GridFunction) -> Result<GridFunction> {
        self.check_n(n)?;
        let mut cache = DerivativeCache::new(phi, &phi.conj())?;
        let via1 = self.grad1[n].evaluate_cached(&mut cache).conj().scale(-I);
        let via2 = self.grad2bar[n].evaluate_cached(&mut cache).scale(-I);
        let diff = via1.max_abs_diff(&via2)?;
        let scale = via1.sup_norm().max(via2.sup_norm());
        if diff > 1e-9 * scale {
            return Err(Error::GradientMismatch { n, diff, scale });
        }
        Ok(via2)
    }

    /// Symmetrized two-function functional `I_{b,n}`.
    pub fn i_bn(&self, n: usize, phi1: &GridFunction, phi2: &GridFunction) -> Result<f64> {
        let a = self.itilde(n, phi1, &phi2.conj())?;
        let b = self.itilde(n, phi2, &phi1.conj())?;
        real_part(n, 0.5 * (a + b))
    }

    /// Linear part of `grad_s I_n` as `(c, p)` meaning `c * d^p phi`.
    pub fn linear_part(&self, n: usize) -> Result<(Complex64, u32)> {
        let lin = self
            .grad2bar(n)?
            .filter(|k| k.u_degree() == 1 && k.v_degree() == 0)
            .scale(-I);
        let terms: Vec<_> = lin.terms().collect();
        match terms.as_slice() {
            [(key, &coeff)] => Ok((coeff, key.u_orders()[0])),
            _ => Err(Error::SymbolicMismatch(format!(
                "linear part of grad_s I_{n} is not a single monomial: {lin}"
            ))),
        }
    }

    /// Nonlinear part of `grad_s I_n`, as a polynomial in `(phi, conj(phi))`.
    pub fn nonlinear_part(&self, n: usize) -> Result<DiffPoly> {
        Ok(self
            .grad2bar(n)?
            .filter(|k| !(k.u_degree() == 1 && k.v_degree() == 0))
            .scale(-I))
    }

    /// JSON list of `{n, k, terms}` for every nonzero graded component.
    pub fn dump_json(&self) -> String {
        let mut entries = Vec::new();
        for n in 1..=self.n_max {
            for (k, p) in self.wk[n].iter().enumerate().skip(1) {
                if p.is_zero() {
                    continue;
                }
                let terms = p
                    .terms()
                    .map(|(key, c)| TermDump {
                        coeff_re: c.re,
                        coeff_im: c.im,
                        u_orders: key.u_orders().to_vec(),
                        v_orders: key.v_orders().to_vec(),
                    })
                    .collect();
                entries.push(EntryDump { n, k, terms });
            }
        }
        serde_json::to_string_pretty(&entries).expect("table serialization cannot fail")
    }
}

#[derive(Serialize)]
struct TermDump {
    coeff_re: f64,
    coeff_im: f64,
    u_orders: Vec<u32>,
    v_orders: Vec<u32>,
}

#[derive(Serialize)]
struct EntryDump {
    n: usize,
    k: usize,
    terms: Vec<TermDump>,
}

fn real_part(n: usize, z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
        Err(Error::ImaginaryResidue { n, re: z.re, im: z.im })
    } else {
        Ok(z.re)
    }
}
