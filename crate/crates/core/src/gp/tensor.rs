//! Symmetric tensors in `(C^d)^{⊗n}` and their decomposition into powers
//! `β^{⊗n}` through evaluation of homogeneous polynomials.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

/// Size guard on `d^n`.
pub const MAX_ENTRIES: usize = 10_000;

/// Largest accepted condition number of the evaluation system.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Point draws before giving up on a singular system.
pub const RESEEDS: usize = 5;

const DEFAULT_SEED: u64 = 0x5eed;
const MAX_DIM: usize = 4;
const MAX_ORDER: usize = 4;

/// Entries of an order-`n` tensor over `C^d`, row-major in the indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    d: usize,
    n: usize,
    entries: Vec<Complex64>,
}

fn size(d: usize, n: usize) -> Result<usize> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("tensor needs d, n >= 1 (got d={d}, n={n})")));
    }
    match d.checked_pow(n as u32) {
        Some(s) if s <= MAX_ENTRIES => Ok(s),
        _ => Err(Error::TooLarge(format!("d^n = {d}^{n} exceeds {MAX_ENTRIES} entries"))),
    }
}

impl SymTensor {
    pub fn new(d: usize, n: usize, entries: Vec<Complex64>) -> Result<Self> {
        let len = size(d, n)?;
        if entries.len() != len {
            return Err(Error::InvalidArgument(format!(
                "order-{n} tensor over C^{d} needs {len} entries, got {}",
                entries.len()
            )));
        }
        Ok(Self { d, n, entries })
    }

    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        let len = size(d, n)?;
        Ok(Self {
            d,
            n,
            entries: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// `v^{⊗n}`.
    pub fn power(v: &[Complex64], n: usize) -> Result<Self> {
        let mut t = Self::zeros(v.len(), n)?;
        for flat in 0..t.entries.len() {
            t.entries[flat] = t.multi_index(flat).iter().map(|&i| v[i]).product();
        }
        Ok(t)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % self.d;
            rest /= self.d;
        }
        idx
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.d + i)
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.entries[self.flat_index(idx)]
    }

    /// Largest deviation of an entry from the entry at its sorted index.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.entries.len())
            .map(|flat| {
                let mut idx = self.multi_index(flat);
                idx.sort_unstable();
                (self.entries[flat] - self.get(&idx)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SymTensor) -> Result<f64> {
        if (self.d, self.n) != (other.d, other.n) {
            return Err(Error::InvalidArgument("tensor shapes differ".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add_scaled(&mut self, s: Complex64, other: &SymTensor) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += s * b;
        }
    }
}

/// Average over all permutations of the index positions.
pub fn symmetrize(t: &SymTensor) -> Result<SymTensor> {
    size(t.d, t.n)?;
    // every position permutation visits each element of an index orbit
    // equally often, so the average is the orbit mean
    let mut orbits: BTreeMap<Vec<usize>, (Complex64, usize)> = BTreeMap::new();
    for flat in 0..t.entries.len() {
        let mut idx = t.multi_index(flat);
        idx.sort_unstable();
        let e = orbits.entry(idx).or_insert((Complex64::new(0.0, 0.0), 0));
        e.0 += t.entries[flat];
        e.1 += 1;
    }
    let mut out = t.clone();
    for flat in 0..out.entries.len() {
        let mut idx = t.multi_index(flat);
        idx.sort_unstable();
        let (sum, count) = orbits[&idx];
        out.entries[flat] = sum / count as f64;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rank1Term {
    pub coeff: Complex64,
    pub vector: Vec<Complex64>,
}

/// `Σ a_j β_j^{⊗n}`.
pub fn reconstruct(terms: &[Rank1Term], d: usize, n: usize) -> Result<SymTensor> {
    let mut out = SymTensor::zeros(d, n)?;
    for term in terms {
        if term.vector.len() != d {
            return Err(Error::InvalidArgument(format!(
                "term vector has length {}, expected {d}",
                term.vector.len()
            )));
        }
        out.add_scaled(term.coeff, &SymTensor::power(&term.vector, n)?);
    }
    Ok(out)
}

/// Sorted index tuples of length `n` over `0..d`, one per monomial of
/// degree `n` in `d` variables.
fn monomials(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn extend(d: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            extend(d, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(d, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Decomposition with the default point seed.
pub fn sym_rank1_decompose(t: &SymTensor) -> Result<Vec<Rank1Term>> {
    sym_rank1_decompose_seeded(t, DEFAULT_SEED)
}

/// Writes the polynomial `Σ T_i x_{i_1}..x_{i_n}` as `Σ_j a_j (β_j·x)^n`
/// with one generic point per monomial. Matching coefficients monomial by
/// monomial gives `Σ_j a_j β_j^α = T_α`, since the multinomial factors
/// agree on both sides.
pub fn sym_rank1_decompose_seeded(t: &SymTensor, seed: u64) -> Result<Vec<Rank1Term>> {
    if t.d > MAX_DIM || t.n > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "d or n",
            value: t.d.max(t.n) as i64,
            allowed: format!("d <= {MAX_DIM}, n <= {MAX_ORDER}"),
        });
    }
    let scale = t.max_abs();
    let defect = t.symmetry_defect();
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "tensor is not symmetric (defect {defect:e}); symmetrize it first"
        )));
    }
    let basis = monomials(t.d, t.n);
    let m = basis.len();
    let rhs = DMatrix::from_iterator(m, 1, basis.iter().map(|a| t.get(a)));
    for attempt in 0..RESEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let points: Vec<Vec<Complex64>> = (0..m)
            .map(|_| {
                (0..t.d)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        let system = DMatrix::from_fn(m, m, |r, c| basis[r].iter().map(|&i| points[c][i]).product());
        if condition_number(&system) > CONDITION_LIMIT {
            continue;
        }
        let Some(coeffs) = system.lu().solve(&rhs) else {
            continue;
        };
        let terms: Vec<Rank1Term> = points
            .into_iter()
            .zip(coeffs.iter())
            .map(|(vector, &coeff)| Rank1Term { coeff, vector })
            .collect();
        let diff = reconstruct(&terms, t.d, t.n)?.max_abs_diff(t)?;
        let tol = 1e-8 * scale.max(f64::MIN_POSITIVE);
        if scale > 0.0 && diff > tol {
            return Err(Error::IdentityViolation {
                what: "rank-one reconstruction".into(),
                diff,
                tol,
            });
        }
        return Ok(terms);
    }
    Err(Error::SingularSystem { attempts: RESEEDS })
}
