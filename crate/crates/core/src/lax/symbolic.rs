//! Matrix-valued coefficients `W_n` of the large-λ expansion, built
//! symbolically and compared with the scalar densities.

use num_complex::Complex64;

use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyTable;
use crate::kappa::Kappa;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `2x2` matrix of differential polynomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatPoly(pub [[DiffPoly; 2]; 2]);

impl MatPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn entry(&self, row: usize, col: usize) -> &DiffPoly {
        &self.0[row][col]
    }

    pub fn add(&self, other: &MatPoly) -> MatPoly {
        let mut out = MatPoly::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c].add(&other.0[r][c]);
            }
        }
        out
    }

    pub fn mul(&self, other: &MatPoly) -> MatPoly {
        let mut out = MatPoly::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0]
                    .mul(&other.0[0][c])
                    .add(&self.0[r][1].mul(&other.0[1][c]));
            }
        }
        out
    }

    pub fn d_dx(&self) -> MatPoly {
        let mut out = MatPoly::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c].d_dx();
            }
        }
        out
    }

    /// `s σ3 M`.
    fn sigma3_scaled(&self, s: Complex64) -> MatPoly {
        let mut out = self.clone();
        for c in 0..2 {
            out.0[0][c] = self.0[0][c].scale(s);
            out.0[1][c] = self.0[1][c].scale(-s);
        }
        out
    }

    pub fn is_off_diagonal(&self) -> bool {
        self.0[0][0].is_zero() && self.0[1][1].is_zero()
    }
}

/// `U0 = √κ [[0, v], [u, 0]]`.
pub fn u0_symbolic(kappa: Kappa) -> MatPoly {
    let s = kappa.sqrt();
    let mut m = MatPoly::zero();
    m.0[0][1] = DiffPoly::v(0).scale(s);
    m.0[1][0] = DiffPoly::u(0).scale(s);
    m
}

#[derive(Debug, Clone)]
pub struct MatrixWnTable {
    pub kappa: Kappa,
    /// `w[n - 1]` holds `W_n`.
    pub w: Vec<MatPoly>,
}

impl MatrixWnTable {
    pub fn build(kappa: Kappa, n_max: usize) -> Self {
        let u0 = u0_symbolic(kappa);
        let mut w: Vec<MatPoly> = vec![u0.sigma3_scaled(-I)];
        for n in 1..n_max {
            // 1-based: W_n is w[n-1]
            let mut acc = w[n - 1].d_dx();
            for k in 1..n {
                acc = acc.add(&w[k - 1].mul(&u0).mul(&w[n - k - 1]));
            }
            w.push(acc.sigma3_scaled(I));
        }
        Self { kappa, w }
    }

    pub fn get(&self, n: usize) -> Option<&MatPoly> {
        n.checked_sub(1).and_then(|i| self.w.get(i))
    }
}

/// Builds `W_1..W_{n_max}` and checks that each is off-diagonal with
/// `(W_n)_{21} / (i√κ)` equal to the scalar `w_n`.
pub fn matrix_wn_crosscheck(table: &HierarchyTable, n_max: usize) -> Result<MatrixWnTable> {
    if n_max == 0 || n_max > table.n_max() {
        return Err(Error::OutOfRange {
            what: "n_max",
            value: n_max as i64,
            allowed: format!("1..={}", table.n_max()),
        });
    }
    let kappa = table.kappa();
    let mats = MatrixWnTable::build(kappa, n_max);
    let inv = Complex64::new(1.0, 0.0) / (I * kappa.sqrt());
    for (i, m) in mats.w.iter().enumerate() {
        let n = i + 1;
        if !m.is_off_diagonal() {
            return Err(Error::SymbolicMismatch(format!("W_{n} has a diagonal part")));
        }
        let scalar = m.entry(1, 0).scale(inv);
        let expected = table.w(n)?;
        if &scalar != expected {
            return Err(Error::SymbolicMismatch(format!(
                "W_{n} lower entry gives {scalar}, recursion gives {expected}"
            )));
        }
    }
    Ok(mats)
}
