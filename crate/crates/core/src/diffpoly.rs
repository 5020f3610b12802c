//! Differential polynomials in two function slots `u` and `v`.
//!
//! A monomial is `c * prod_i d^{a_i} u * prod_j d^{b_j} v`, stored by the
//! sorted multisets `{a_i}` and `{b_j}`. Every slot of a class is evaluated
//! with the same function, so only the multisets matter.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::GridFunction;

/// Which function slot a derivative or an Euler operator refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    U,
    V,
}

/// Canonical monomial key: sorted derivative orders per class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialKey {
    u_orders: Vec<u32>,
    v_orders: Vec<u32>,
}

impl MonomialKey {
    pub fn new(mut u_orders: Vec<u32>, mut v_orders: Vec<u32>) -> Self {
        u_orders.sort_unstable();
        v_orders.sort_unstable();
        Self { u_orders, v_orders }
    }

    pub fn u_orders(&self) -> &[u32] {
        &self.u_orders
    }

    pub fn v_orders(&self) -> &[u32] {
        &self.v_orders
    }

    pub fn orders(&self, class: Class) -> &[u32] {
        match class {
            Class::U => &self.u_orders,
            Class::V => &self.v_orders,
        }
    }

    /// Number of `u` slots.
    pub fn u_degree(&self) -> usize {
        self.u_orders.len()
    }

    /// Number of `v` slots.
    pub fn v_degree(&self) -> usize {
        self.v_orders.len()
    }

    /// Sum of all derivative orders.
    pub fn total_order(&self) -> u32 {
        self.u_orders.iter().chain(&self.v_orders).sum()
    }

    fn product(&self, other: &MonomialKey) -> MonomialKey {
        let mut u = self.u_orders.clone();
        u.extend_from_slice(&other.u_orders);
        let mut v = self.v_orders.clone();
        v.extend_from_slice(&other.v_orders);
        MonomialKey::new(u, v)
    }

    fn with_bumped(&self, class: Class, slot: usize) -> MonomialKey {
        let mut k = self.clone();
        match class {
            Class::U => k.u_orders[slot] += 1,
            Class::V => k.v_orders[slot] += 1,
        }
        MonomialKey::new(k.u_orders, k.v_orders)
    }

    fn without(&self, class: Class, slot: usize) -> MonomialKey {
        let mut k = self.clone();
        match class {
            Class::U => {
                k.u_orders.remove(slot);
            }
            Class::V => {
                k.v_orders.remove(slot);
            }
        }
        k
    }

    fn swapped(&self) -> MonomialKey {
        MonomialKey {
            u_orders: self.v_orders.clone(),
            v_orders: self.u_orders.clone(),
        }
    }
}

/// A single term with its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMonomial {
    pub coeff: Complex64,
    pub key: MonomialKey,
}

/// Finite sum of monomials with nonzero coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffPoly {
    terms: BTreeMap<MonomialKey, Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Complex64) -> Self {
        Self::monomial(value, MonomialKey::new(vec![], vec![]))
    }

    pub fn monomial(coeff: Complex64, key: MonomialKey) -> Self {
        let mut p = Self::zero();
        p.insert(key, coeff);
        p
    }

    /// `d^order u`.
    pub fn u(order: u32) -> Self {
        Self::monomial(c(1.0, 0.0), MonomialKey::new(vec![order], vec![]))
    }

    /// `d^order v`.
    pub fn v(order: u32) -> Self {
        Self::monomial(c(1.0, 0.0), MonomialKey::new(vec![], vec![order]))
    }

    pub fn slot(class: Class, order: u32) -> Self {
        match class {
            Class::U => Self::u(order),
            Class::V => Self::v(order),
        }
    }

    /// Adds `coeff` to the term at `key`, dropping it if the sum is zero.
    pub fn insert(&mut self, key: MonomialKey, coeff: Complex64) {
        if coeff == c(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = *e.get() + coeff;
                if sum == c(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &MonomialKey) -> Complex64 {
        self.terms.get(key).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &Complex64)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<DiffMonomial> {
        self.terms
            .iter()
            .map(|(k, &coeff)| DiffMonomial {
                coeff,
                key: k.clone(),
            })
            .collect()
    }

    /// Highest derivative order appearing on the given class, if any slot of
    /// that class is present.
    pub fn max_order(&self, class: Class) -> Option<u32> {
        self.terms
            .keys()
            .flat_map(|k| k.orders(class).iter().copied())
            .max()
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (k, &v) in &other.terms {
            out.insert(k.clone(), v);
        }
        out
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (k, &v) in &other.terms {
            out.insert(k.clone(), -v);
        }
        out
    }

    pub fn neg(&self) -> DiffPoly {
        self.scale(c(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (k, &v) in &self.terms {
            out.insert(k.clone(), v * s);
        }
        out
    }

    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                out.insert(ka.product(kb), ca * cb);
            }
        }
        out
    }

    /// Total `x`-derivative by the Leibniz rule.
    pub fn d_dx(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (k, &coeff) in &self.terms {
            for class in [Class::U, Class::V] {
                for slot in 0..k.orders(class).len() {
                    out.insert(k.with_bumped(class, slot), coeff);
                }
            }
        }
        out
    }

    pub fn d_dx_n(&self, times: u32) -> DiffPoly {
        (0..times).fold(self.clone(), |p, _| p.d_dx())
    }

    /// Variational derivative with respect to one class:
    /// `sum_a (-d)^a dP/d(d^a w)`, where `w` is `u` or `v`.
    pub fn euler_derivative(&self, class: Class) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (k, &coeff) in &self.terms {
            let orders = k.orders(class);
            let mut slot = 0;
            while slot < orders.len() {
                let a = orders[slot];
                let mult = orders[slot..].iter().take_while(|&&o| o == a).count();
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                let cofactor = DiffPoly::monomial(coeff * (mult as f64 * sign), k.without(class, slot));
                out = out.add(&cofactor.d_dx_n(a));
                slot += mult;
            }
        }
        out
    }

    /// Exchanges the roles of `u` and `v`.
    pub fn swap_classes(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (k, &v) in &self.terms {
            out.insert(k.swapped(), v);
        }
        out
    }

    pub fn conj_coeffs(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (k, &v) in &self.terms {
            out.insert(k.clone(), v.conj());
        }
        out
    }

    /// Keeps only monomials satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&MonomialKey) -> bool) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }

    /// Evaluates on the grid with spectral derivatives.
    pub fn evaluate(&self, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        let mut cache = DerivativeCache::new(u, v)?;
        Ok(self.evaluate_cached(&mut cache))
    }

    /// Evaluation reusing derivatives already held by `cache`.
    pub fn evaluate_cached(&self, cache: &mut DerivativeCache) -> GridFunction {
        let n = cache.u.len();
        let mut acc = vec![c(0.0, 0.0); n];
        let mut term = vec![c(0.0, 0.0); n];
        for (k, &coeff) in &self.terms {
            term.iter_mut().for_each(|t| *t = coeff);
            for class in [Class::U, Class::V] {
                for &a in k.orders(class) {
                    let d = cache.derivative(class, a);
                    for (t, x) in term.iter_mut().zip(d.values()) {
                        *t *= x;
                    }
                }
            }
            for (s, t) in acc.iter_mut().zip(&term) {
                *s += t;
            }
        }
        GridFunction::new(*cache.u.grid(), acc).expect("length matches grid")
    }
}

/// Spectral derivatives of a `(u, v)` pair, computed on demand.
#[derive(Debug, Clone)]
pub struct DerivativeCache {
    u: GridFunction,
    v: GridFunction,
    du: Vec<Option<GridFunction>>,
    dv: Vec<Option<GridFunction>>,
}

impl DerivativeCache {
    pub fn new(u: &GridFunction, v: &GridFunction) -> Result<Self> {
        u.grid().check_same(v.grid())?;
        Ok(Self {
            u: u.clone(),
            v: v.clone(),
            du: vec![Some(u.clone())],
            dv: vec![Some(v.clone())],
        })
    }

    pub fn derivative(&mut self, class: Class, order: u32) -> &GridFunction {
        let (base, store) = match class {
            Class::U => (&self.u, &mut self.du),
            Class::V => (&self.v, &mut self.dv),
        };
        let idx = order as usize;
        if store.len() <= idx {
            store.resize(idx + 1, None);
        }
        if store[idx].is_none() {
            store[idx] = Some(base.spectral_derivative(order));
        }
        store[idx].as_ref().expect("filled above")
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::add(self, rhs)
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::sub(self, rhs)
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        DiffPoly::mul(self, rhs)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly::neg(self)
    }
}

fn fmt_coeff(z: Complex64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{}", z.re),
        (true, false) => format!("{}i", z.im),
        _ => format!("({}{:+}i)", z.re, z.im),
    }
}

fn fmt_slot(name: &str, order: u32) -> String {
    match order {
        0 => name.to_string(),
        1 => format!("d{name}"),
        a => format!("d{a}{name}"),
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, &coeff)| {
                let mut s = fmt_coeff(coeff);
                for &a in &k.u_orders {
                    s.push('*');
                    s.push_str(&fmt_slot("u", a));
                }
                for &b in &k.v_orders {
                    s.push('*');
                    s.push_str(&fmt_slot("v", b));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random polynomial with small integer coefficients.
    pub(crate) fn random_poly(seed: u64, terms: usize, max_order: u32, max_deg: usize) -> DiffPoly {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = DiffPoly::zero();
        for _ in 0..terms {
            let nu = rng.random_range(0..=max_deg);
            let nv = rng.random_range(usize::from(nu == 0)..=max_deg);
            let u = (0..nu).map(|_| rng.random_range(0..=max_order)).collect();
            let v = (0..nv).map(|_| rng.random_range(0..=max_order)).collect();
            let re = rng.random_range(-3i32..=3) as f64;
            let im = rng.random_range(-3i32..=3) as f64;
            p.insert(MonomialKey::new(u, v), c(re, im));
        }
        p
    }

    fn key(u: &[u32], v: &[u32]) -> MonomialKey {
        MonomialKey::new(u.to_vec(), v.to_vec())
    }

    #[test]
    fn addition_examples() {
        let u = DiffPoly::u(0);
        assert_eq!(u.add(&DiffPoly::zero()), u);
        assert!(u.add(&u.neg()).is_zero());
        let p = u.add(&DiffPoly::u(1).scale(c(0.0, 1.0)));
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(&key(&[1], &[])), c(0.0, 1.0));
    }

    #[test]
    fn multiplication_examples() {
        let uv = DiffPoly::u(0).mul(&DiffPoly::v(0));
        assert_eq!(uv, DiffPoly::monomial(c(1.0, 0.0), key(&[0], &[0])));
        let p = DiffPoly::u(0).mul(&DiffPoly::u(1).scale(c(0.0, -1.0)));
        assert_eq!(p, DiffPoly::monomial(c(0.0, -1.0), key(&[0, 1], &[])));
        for s in 0..20 {
            let a = random_poly(s, 3, 3, 3);
            let b = random_poly(s + 100, 3, 3, 3);
            assert_eq!(a.mul(&b), b.mul(&a));
        }
    }

    #[test]
    fn derivative_examples() {
        let uv = DiffPoly::u(0).mul(&DiffPoly::v(0));
        let expected = DiffPoly::u(1)
            .mul(&DiffPoly::v(0))
            .add(&DiffPoly::u(0).mul(&DiffPoly::v(1)));
        assert_eq!(uv.d_dx(), expected);
        assert!(DiffPoly::zero().d_dx().is_zero());
        let u2 = DiffPoly::u(0).mul(&DiffPoly::u(0));
        assert_eq!(u2.d_dx(), DiffPoly::monomial(c(2.0, 0.0), key(&[0, 1], &[])));
        assert!(DiffPoly::constant(c(3.0, 0.0)).d_dx().is_zero());
    }

    #[test]
    fn euler_examples() {
        let p = DiffPoly::v(0).mul(&DiffPoly::u(1));
        assert_eq!(p.euler_derivative(Class::U), DiffPoly::v(1).neg());
        let uv = DiffPoly::v(0).mul(&DiffPoly::u(0));
        assert_eq!(uv.euler_derivative(Class::V), DiffPoly::u(0));
        assert_eq!(uv.euler_derivative(Class::U), DiffPoly::v(0));
        // d/du of u^2 v is 2uv
        let u2v = DiffPoly::u(0).mul(&DiffPoly::u(0)).mul(&DiffPoly::v(0));
        assert_eq!(
            u2v.euler_derivative(Class::U),
            DiffPoly::monomial(c(2.0, 0.0), key(&[0], &[0]))
        );
    }

    #[test]
    fn evaluation_examples() {
        let g = PeriodicGrid::standard();
        let e = GridFunction::plane_wave(g, c(1.0, 0.0), 3);
        let zero = GridFunction::zeros(g);
        assert!(DiffPoly::u(0).evaluate(&e, &zero).unwrap().max_abs_diff(&e).unwrap() < 1e-15);
        let e1 = GridFunction::plane_wave(g, c(1.0, 0.0), 1);
        let p = DiffPoly::u(1).scale(c(0.0, -1.0));
        assert!(p.evaluate(&e1, &zero).unwrap().max_abs_diff(&e1).unwrap() < 1e-12);
        // kappa u^2 v at a plane wave is kappa |A|^2 phi
        let a = c(0.6, -0.3);
        for kappa in [1.0, -1.0] {
            let phi = GridFunction::plane_wave(g, a, 2);
            let q = DiffPoly::monomial(c(kappa, 0.0), key(&[0, 0], &[0]));
            let got = q.evaluate(&phi, &phi.conj()).unwrap();
            let want = phi.scale(c(kappa * a.norm_sqr(), 0.0));
            assert!(got.max_abs_diff(&want).unwrap() < 1e-14);
        }
        let other = PeriodicGrid::new(128, std::f64::consts::PI).unwrap();
        assert!(DiffPoly::u(0).evaluate(&e, &GridFunction::zeros(other)).is_err());
    }

    #[test]
    fn density_euler_gives_conjugate() {
        let g = PeriodicGrid::standard();
        let phi = GridFunction::random_band_limited(g, 8, 11, 1.0).unwrap();
        let uv = DiffPoly::u(0).mul(&DiffPoly::v(0));
        let grad = uv.euler_derivative(Class::U).evaluate(&phi, &phi.conj()).unwrap();
        assert!(grad.max_abs_diff(&phi.conj()).unwrap() < 1e-15);
    }

    #[test]
    fn homogeneity() {
        let g = PeriodicGrid::standard();
        let u = GridFunction::random_band_limited(g, 6, 1, 1.0).unwrap();
        let v = GridFunction::random_band_limited(g, 6, 2, 1.0).unwrap();
        let p = DiffPoly::u(0)
            .mul(&DiffPoly::u(2))
            .mul(&DiffPoly::v(1))
            .add(&DiffPoly::u(1).mul(&DiffPoly::u(1)).scale(c(0.0, 2.0)));
        let s = c(0.7, 0.4);
        let lhs = p.evaluate(&u.scale(s), &v).unwrap();
        let rhs = p.evaluate(&u, &v).unwrap().scale(s * s);
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * rhs.sup_norm());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn leibniz(seed in 0u64..100_000) {
                let a = random_poly(seed, 5, 3, 3);
                let b = random_poly(seed ^ 0xabcdef, 5, 3, 3);
                let lhs = a.mul(&b).d_dx();
                let rhs = a.d_dx().mul(&b).add(&a.mul(&b.d_dx()));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn negation_cancels(seed in 0u64..100_000) {
                let a = random_poly(seed, 5, 3, 3);
                prop_assert!(a.add(&a.neg()).is_zero());
            }

            #[test]
            fn null_integral(seed in 0u64..100_000) {
                let g = PeriodicGrid::standard();
                let p = random_poly(seed, 5, 3, 3);
                let u = GridFunction::random_band_limited(g, 6, seed, 1.0).unwrap();
                let v = GridFunction::random_band_limited(g, 6, seed + 1, 1.0).unwrap();
                let integrand = p.d_dx().evaluate(&u, &v).unwrap();
                let bound = 1e-10 * integrand.l2_norm().max(f64::MIN_POSITIVE);
                prop_assert!(integrand.integrate().norm() <= bound);
            }

            #[test]
            fn variational_consistency(seed in 0u64..100_000, class_u in any::<bool>()) {
                let g = PeriodicGrid::standard();
                let p = random_poly(seed, 4, 3, 3);
                let u = GridFunction::random_band_limited(g, 6, seed, 1.0).unwrap();
                let v = GridFunction::random_band_limited(g, 6, seed + 7, 1.0).unwrap();
                let d = GridFunction::random_band_limited(g, 6, seed + 13, 1.0).unwrap();
                let h = 1e-4;
                let class = if class_u { Class::U } else { Class::V };
                let functional = |eps: f64| {
                    let shift = d.scale(c(eps, 0.0));
                    let (uu, vv) = match class {
                        Class::U => (u.add(&shift).unwrap(), v.clone()),
                        Class::V => (u.clone(), v.add(&shift).unwrap()),
                    };
                    p.evaluate(&uu, &vv).unwrap().integrate()
                };
                let fd = (functional(h) - functional(-h)) / (2.0 * h);
                let grad = p.euler_derivative(class).evaluate(&u, &v).unwrap();
                let exact = d.mul(&grad).unwrap().integrate();
                prop_assert!((fd - exact).norm() <= 1e-6 * (1.0 + exact.norm()));
            }
        }
    }
}
