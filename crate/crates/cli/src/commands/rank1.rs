use hierlab::gp::{reconstruct, sym_rank1_decompose, symmetrize, SymTensor};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::Checks;

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct TermOut {
    coeff: ComplexOut,
    vector: Vec<ComplexOut>,
}

#[derive(Serialize)]
struct Decomposition {
    terms: Vec<TermOut>,
}

/// Symmetric tensor with uniform entries in the unit square, drawn from
/// the run seed.
fn seeded_tensor(d: usize, n: usize, seed: u64) -> CliResult<SymTensor> {
    let len = d
        .checked_pow(n as u32)
        .ok_or_else(|| CliError::Config(format!("d^n = {d}^{n} overflows")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Ok(symmetrize(&SymTensor::new(d, n, raw)?)?)
}

pub fn rank1(ctx: &Context) -> CliResult<()> {
    let rc = &ctx.cfg.rank1;
    let tensor = match &rc.entries {
        Some(entries) => SymTensor::new(rc.d, rc.n, entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())?,
        None => seeded_tensor(rc.d, rc.n, ctx.seed(0))?,
    };
    let terms = sym_rank1_decompose(&tensor)?;
    let back = reconstruct(&terms, rc.d, rc.n)?;
    let scale = tensor.max_abs();
    let err = if scale > 0.0 { back.max_abs_diff(&tensor)? / scale } else { back.max_abs() };
    let out = Decomposition {
        terms: terms
            .into_iter()
            .map(|t| TermOut {
                coeff: t.coeff.into(),
                vector: t.vector.into_iter().map(Into::into).collect(),
            })
            .collect(),
    };
    ctx.out.write_json("rank1.json", &out)?;
    println!("{} terms", out.terms.len());
    let mut checks = Checks::default();
    checks.at_most("relative reconstruction error", err, ctx.cfg.tolerances.rank1);
    checks.finish()
}
