//! Acceptance suite: seven numbered criteria, one PASS/FAIL line each.
//! Runs as a plain binary so the verdict lines always reach the output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use hierlab::flows::{conservation_report, evolve, max_drift, Scheme};
use hierlab::gp::{
    factorized_energy, gp3_residual, gp4_residual, mixed_energy, reconstruct, sym_rank1_decompose, symmetrize,
    w3_spot_check, w4_spot_check, xhn_factorized_residual, Rank1Term, SymTensor,
};
use hierlab::lax::{
    asymptotic_residual, decay_exponent, matrix_wn_crosscheck, rmatrix_residual, zero_curvature_residual,
    LaxContext,
};
use hierlab::poisson::{bracket_l2, bracket_l2_v, fd_directional};
use hierlab::{omega_l2, DiffPoly, GridFunction, HierarchyTable, Kappa, MonomialKey, PeriodicGrid};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KAPPAS: [Kappa; 2] = [Kappa::Defocusing, Kappa::Focusing];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Collects measured quantities against their limits.
#[derive(Default)]
struct Report {
    lines: Vec<String>,
    failed: bool,
}

impl Report {
    fn at_most(&mut self, what: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.failed |= !ok;
        self.lines.push(format!(
            "    {} {what}: {value:.3e} (limit {limit:.1e})",
            if ok { "ok  " } else { "FAIL" }
        ));
    }

    fn at_least(&mut self, what: &str, value: f64, limit: f64) {
        let ok = value >= limit;
        self.failed |= !ok;
        self.lines.push(format!(
            "    {} {what}: {value:.3} (need >= {limit})",
            if ok { "ok  " } else { "FAIL" }
        ));
    }

    fn holds(&mut self, what: &str, ok: bool) {
        self.failed |= !ok;
        self.lines.push(format!("    {} {what}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn grid() -> PeriodicGrid {
    PeriodicGrid::standard()
}

fn random_state(seed: u64, cutoff: usize, amplitude: f64) -> GridFunction {
    GridFunction::random_band_limited(grid(), cutoff, seed, amplitude).unwrap()
}

// Data follow the CLI defaults: run seed 0, so the i-th derived seed is i,
// and the configured state is drawn with the run seed itself.
const STATE_CUTOFF: usize = 3;
const STATE_AMPLITUDE: f64 = 0.5;

fn default_state() -> GridFunction {
    random_state(0, STATE_CUTOFF, STATE_AMPLITUDE)
}

fn rel_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.max_abs_diff(b).unwrap() / b.sup_norm().max(f64::MIN_POSITIVE)
}

fn mono(coeff: Complex64, u: &[u32], v: &[u32]) -> DiffPoly {
    DiffPoly::monomial(coeff, MonomialKey::new(u.to_vec(), v.to_vec()))
}

fn structure(r: &mut Report) {
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(8, kappa).unwrap();
        r.holds(&format!("κ={k}: graded structure for n <= 8"), t.check_structure().is_ok());
        r.holds(&format!("κ={k}: graded sum obeys the collapsed recursion"), t.collapsed_recursion_holds());
        let w3 = mono(c(-1.0, 0.0), &[2], &[]).add(&mono(c(k, 0.0), &[0, 0], &[0]));
        r.holds(&format!("κ={k}: w3 = -u'' + κ v u²"), t.w(3).unwrap() == &w3);
        let w4 = mono(c(0.0, 1.0), &[3], &[])
            .add(&mono(c(0.0, -k), &[0, 0], &[1]))
            .add(&mono(c(0.0, -4.0 * k), &[0, 1], &[0]));
        r.holds(&format!("κ={k}: w4 = i u''' - iκ u² v' - 4iκ u v u'"), t.w(4).unwrap() == &w4);
    }
}

fn gradients(r: &mut Report) {
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(6, kappa).unwrap();
        let mut worst = 0.0f64;
        let mut worst3 = 0.0f64;
        let mut worst4 = 0.0f64;
        for trial in 0..10u64 {
            let phi = random_state(2 * trial, 8, 0.8);
            let delta = random_state(2 * trial + 1, 8, 0.8);
            for n in 1..=6 {
                let fd = fd_directional(|p| Ok(c(t.invariant(n, p)?, 0.0)), &phi, &delta, 1e-4).unwrap();
                let exact = omega_l2(&t.grad_s(n, &phi).unwrap(), &delta).unwrap();
                let inv = t.invariant(n, &phi).unwrap();
                worst = worst.max((fd.re - exact).abs() / (1.0 + inv.abs()));
            }
            let dens = phi.map(|z| c(z.norm_sqr(), 0.0));
            let nls = phi
                .spectral_derivative(2)
                .scale(c(0.0, 1.0))
                .sub(&dens.mul(&phi).unwrap().scale(c(0.0, 2.0 * k)))
                .unwrap();
            worst3 = worst3.max(rel_diff(&t.grad_s(3, &phi).unwrap(), &nls));
            let mkdv = phi
                .spectral_derivative(3)
                .sub(&dens.mul(&phi.spectral_derivative(1)).unwrap().scale(c(6.0 * k, 0.0)))
                .unwrap();
            worst4 = worst4.max(rel_diff(&t.grad_s(4, &phi).unwrap(), &mkdv));
        }
        r.at_most(&format!("κ={k}: FD vs ω(grad_s I_n, δφ), n <= 6, relative to 1+|I_n|"), worst, 1e-6);
        r.at_most(&format!("κ={k}: grad_s I3 vs i φ'' - 2iκ|φ|²φ"), worst3, 1e-9);
        r.at_most(&format!("κ={k}: grad_s I4 vs φ''' - 6κ|φ|²φ'"), worst4, 1e-9);
    }
}

fn involution(r: &mut Report) {
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(6, kappa).unwrap();
        let mut worst = 0.0f64;
        let mut worst_v = 0.0f64;
        for trial in 0..10u64 {
            let phi = random_state(3 * trial, 10, 1.0);
            let a = random_state(3 * trial + 1, 10, 1.0);
            let b = random_state(3 * trial + 2, 10, 1.0);
            for n in 1..=6 {
                for m in n + 1..=6 {
                    worst = worst.max(bracket_l2(&t, n, m, &phi).unwrap().normalized);
                    worst_v = worst_v.max(bracket_l2_v(&t, n, m, &a, &b).unwrap().normalized);
                }
            }
        }
        r.at_most(&format!("κ={k}: max normalized {{I_n, I_m}}"), worst, 1e-6);
        r.at_most(&format!("κ={k}: max normalized {{I_b,n, I_b,m}} on pairs"), worst_v, 1e-6);
    }
}

fn conservation(r: &mut Report) {
    let all: Vec<usize> = (1..=6).collect();
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(6, kappa).unwrap();
        let phi = default_state();
        let tr = evolve(&t, 3, &phi, 1e-3, 1000, Scheme::Strang, 50).unwrap();
        let rows = conservation_report(&t, &tr, &all).unwrap();
        let drift = all.iter().map(|&n| max_drift(&rows, n)).fold(0.0, f64::max);
        r.at_most(&format!("κ={k}: strang n=3, T=1: max drift of I1..I6"), drift, 1e-6);

        let tr = evolve(&t, 4, &phi, 2e-4, 1250, Scheme::Ifrk4, 50).unwrap();
        let rows = conservation_report(&t, &tr, &all).unwrap();
        let drift = all.iter().map(|&n| max_drift(&rows, n)).fold(0.0, f64::max);
        r.at_most(&format!("κ={k}: ifrk4 n=4, T=0.25: max drift of I1..I6"), drift, 1e-5);

        let amp = c(0.8, 0.3);
        let m = 2.0;
        let wave = GridFunction::plane_wave(grid(), amp, 2);
        let omega3 = m * m + 2.0 * k * amp.norm_sqr();
        let want = wave.scale(c(0.0, -omega3).exp());
        for scheme in [Scheme::Strang, Scheme::Ifrk4] {
            let tr = evolve(&t, 3, &wave, 1e-3, 1000, scheme, 1000).unwrap();
            r.at_most(
                &format!("κ={k}: {} plane-wave NLS error at T=1", scheme.name()),
                rel_diff(tr.states.last().unwrap(), &want),
                1e-6,
            );
        }
        // φ' = φ''' - 6κ|φ|²φ' on e^{imx}: rate -i(m³ + 6κ|A|²m)
        let rate = m.powi(3) + 6.0 * k * amp.norm_sqr() * m;
        let want = wave.scale(c(0.0, -rate * 0.25).exp());
        let tr = evolve(&t, 4, &wave, 2e-4, 1250, Scheme::Ifrk4, 1250).unwrap();
        r.at_most(
            &format!("κ={k}: ifrk4 plane-wave mKdV error at T=0.25"),
            rel_diff(tr.states.last().unwrap(), &want),
            1e-6,
        );
    }
}

fn lax(r: &mut Report) {
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(6, kappa).unwrap();
        let phi = default_state();

        let mut det = 0.0f64;
        let mut inv = 0.0f64;
        let mut norm = 0.0f64;
        for lam in [-3.3, 0.7, 2.0, 5.0, 11.5] {
            let ctx = LaxContext::conjugate_pair(&phi, kappa, lam).unwrap();
            det = det.max(ctx.monodromy().unwrap().det_error());
            inv = inv.max(ctx.involution_residual().unwrap());
            norm = norm.max(ctx.normalization_residual().unwrap());
        }
        r.at_most(&format!("κ={k}: |det T - 1|"), det, 1e-8);
        r.at_most(&format!("κ={k}: involution residual"), inv, 1e-8);
        r.at_most(&format!("κ={k}: normalization residual"), norm, 1e-8);

        let tr = evolve(&t, 3, &phi, 1e-3, 1000, Scheme::Strang, 50).unwrap();
        let traces: Vec<Complex64> = tr
            .states
            .iter()
            .map(|s| LaxContext::conjugate_pair(s, kappa, 5.0).unwrap().monodromy_trace().unwrap())
            .collect();
        let drift = traces.iter().map(|f| (f - traces[0]).norm()).fold(0.0, f64::max) / (1.0 + traces[0].norm());
        r.at_most(&format!("κ={k}: monodromy trace drift at λ=5 along NLS, T=1"), drift, 1e-5);

        let zc = |dt: f64| {
            let steps = (0.02 / dt).round() as usize;
            let tr = evolve(&t, 3, &phi, dt, steps, Scheme::Strang, 1).unwrap();
            zero_curvature_residual(&tr, 2.0)
                .unwrap()
                .into_iter()
                .map(|(_, v)| v)
                .fold(0.0, f64::max)
        };
        let coarse = zc(1e-3);
        let fine = zc(5e-4);
        r.at_most(&format!("κ={k}: zero-curvature residual, dt=1e-3 and 5e-4"), coarse.max(fine), 1e-4);
        r.at_least(&format!("κ={k}: zero-curvature refinement factor (dt halved)"), coarse / fine, 3.5);

        let m = t.invariant(1, &phi).unwrap();
        let normed = phi.scale(c((0.5 / m).sqrt(), 0.0));
        let ctx = LaxContext::conjugate_pair(&normed, kappa, 20.0).unwrap();
        let pts = asymptotic_residual(&ctx, &t, &[20.0, 40.0, 80.0], 3).unwrap();
        r.at_most(&format!("κ={k}: decay exponent of the K=3 remainder"), decay_exponent(&pts), -3.5);

        r.holds(&format!("κ={k}: matrix W_n lower entries equal w_n for n <= 6"), matrix_wn_crosscheck(&t, 6).is_ok());

        let ctx = LaxContext::conjugate_pair(&phi, kappa, 2.0).unwrap();
        r.at_most(&format!("κ={k}: r-matrix normalized residual (2, 5)"), rmatrix_residual(&ctx, c(5.0, 0.0)).unwrap(), 1e-5);
    }
}

fn gp(r: &mut Report) {
    for kappa in KAPPAS {
        let k = kappa.value();
        let t = HierarchyTable::build(6, kappa).unwrap();
        let phi = default_state();
        let other = random_state(1, 6, 0.8);
        let mut worst = 0.0f64;
        let mut worst_mixed = 0.0f64;
        for n in 1..=6 {
            let inv = t.invariant(n, &phi).unwrap();
            worst = worst.max((factorized_energy(&t, n, &phi).unwrap() - inv).abs() / inv.abs().max(1.0));
            let ibn = t.i_bn(n, &phi, &other).unwrap();
            worst_mixed = worst_mixed.max((mixed_energy(&t, n, &phi, &other).unwrap() - ibn).abs() / ibn.abs().max(1.0));
        }
        r.at_most(&format!("κ={k}: factorized energy vs I_n, n <= 6"), worst, 1e-10);
        r.at_most(&format!("κ={k}: mixed energy vs I_b,n, n <= 6"), worst_mixed, 1e-10);

        r.at_most(&format!("κ={k}: W3 two-particle spot check"), w3_spot_check(&t, &phi).unwrap().relative_error(), 1e-8);
        r.at_most(&format!("κ={k}: W4 two-particle spot check"), w4_spot_check(&t, &phi).unwrap().relative_error(), 1e-8);

        let data = random_state(2, 2, 0.5);
        let gp_run = |n: usize, scheme: Scheme, dt: f64| {
            let steps = (0.01 / dt).round() as usize;
            let tr = evolve(&t, n, &data, dt, steps, scheme, 1).unwrap();
            let res = if n == 3 { gp3_residual(&tr) } else { gp4_residual(&tr) };
            res.unwrap().into_iter().map(|(_, v)| v).fold(0.0, f64::max)
        };
        let (c3, f3) = (gp_run(3, Scheme::Strang, 1e-3), gp_run(3, Scheme::Strang, 5e-4));
        r.at_most(&format!("κ={k}: GP3 residual, dt=1e-3"), c3, 1e-4);
        r.at_least(&format!("κ={k}: GP3 refinement factor (dt halved)"), c3 / f3, 3.5);
        let (c4, f4) = (gp_run(4, Scheme::Ifrk4, 1e-3), gp_run(4, Scheme::Ifrk4, 5e-4));
        r.at_most(&format!("κ={k}: GP4 residual, dt=1e-3"), c4, 1e-3);
        r.at_least(&format!("κ={k}: GP4 refinement factor (dt halved)"), c4 / f4, 3.5);

        let mut worst_x = 0.0f64;
        for n in 1..=4 {
            let rhs = t.grad_s(n, &phi).unwrap();
            for kk in 1..=2 {
                let res = xhn_factorized_residual(&t, n, kk, &phi, &rhs).unwrap();
                worst_x = worst_x.max(res / (1.0 + rhs.sup_norm()));
            }
        }
        r.at_most(&format!("κ={k}: vector-field kernel vs Leibniz kernel, n <= 4, k <= 2"), worst_x, 1e-10);
    }
}

fn tensors(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = rng.random_range(1..=4usize);
        let n = rng.random_range(1..=4usize);
        let raw: Vec<Complex64> = (0..d.pow(n as u32))
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let tensor = symmetrize(&SymTensor::new(d, n, raw).unwrap()).unwrap();
        let terms = sym_rank1_decompose(&tensor).unwrap();
        let back = reconstruct(&terms, d, n).unwrap();
        worst = worst.max(back.max_abs_diff(&tensor).unwrap() / tensor.max_abs());
    }
    r.at_most("50 random symmetric tensors, d, n <= 4: relative reconstruction error", worst, 1e-8);

    let mut worst_oracle = 0.0f64;
    for _ in 0..10 {
        let a = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let sym = &a + a.transpose();
        let tensor = SymTensor::new(3, 2, sym.iter().map(|&x| c(x, 0.0)).collect()).unwrap();
        let eig = SymmetricEigen::new(sym);
        let oracle: Vec<Rank1Term> = (0..3)
            .map(|i| Rank1Term {
                coeff: c(eig.eigenvalues[i], 0.0),
                vector: eig.eigenvectors.column(i).iter().map(|&x| c(x, 0.0)).collect(),
            })
            .collect();
        let from_eig = reconstruct(&oracle, 3, 2).unwrap();
        let ours = reconstruct(&sym_rank1_decompose(&tensor).unwrap(), 3, 2).unwrap();
        worst_oracle = worst_oracle.max(ours.max_abs_diff(&from_eig).unwrap() / tensor.max_abs());
    }
    r.at_most("d=3, n=2: decomposition vs eigen-decomposition oracle", worst_oracle, 1e-8);
}

type Criterion = fn(&mut Report);

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("structure", structure),
        ("gradients", gradients),
        ("involution", involution),
        ("conservation", conservation),
        ("lax", lax),
        ("gp", gp),
        ("tensors", tensors),
    ];
    let mut all_ok = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut report = Report::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut report)));
        let ok = outcome.is_ok() && !report.failed;
        all_ok &= ok;
        for line in &report.lines {
            println!("{line}");
        }
        if outcome.is_err() {
            println!("    FAIL criterion aborted by a panic");
        }
        println!(
            "criterion {} ({name}): {} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
