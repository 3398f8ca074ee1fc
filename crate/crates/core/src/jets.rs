//! Truncated power series ("jets") over real or complex coefficients.
//!
//! A jet stores `c_0 + c_1 x + … + c_n x^n` with `n ≤ MAX_ORDER` and a
//! variable tag. Arithmetic truncates at the jet order; mixing tags or
//! orders is an error (`try_*`) or a panic (operator sugar).
//!
//! Square roots and logarithms never pick a principal branch on their own:
//! the caller passes the value of the constant term.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// One spare order beyond the θ³ terms guards cancellation in k₁ extraction.
pub const MAX_ORDER: usize = 4;
const N: usize = MAX_ORDER + 1;

/// Relative tolerance for checking caller-supplied branch values.
const BRANCH_TOL: f64 = 1e-8;

pub trait Coefficient:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conjugate(self) -> Self;
    fn exponential(self) -> Self;
    fn finite(self) -> bool;
}

impl Coefficient for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conjugate(self) -> Self {
        self
    }
    fn exponential(self) -> Self {
        self.exp()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Coefficient for C64 {
    const ZERO: Self = C64::new(0.0, 0.0);
    const ONE: Self = C64::new(1.0, 0.0);
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn exponential(self) -> Self {
        self.exp()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

/// Name of the expansion variable, e.g. `θ` or `m+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub &'static str);

impl Var {
    pub const THETA: Var = Var("θ");
    pub const M_PLUS_1: Var = Var("m+1");
    pub const S: Var = Var("s");
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T: Coefficient = C64> {
    c: [T; N],
    order: usize,
    var: Var,
}

pub type RealJet = Jet<f64>;

fn negligible<T: Coefficient>(x: T, scale: f64) -> bool {
    x.modulus() <= 4.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

impl<T: Coefficient> Jet<T> {
    pub fn new(var: Var, order: usize, coeffs: &[T]) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::JetOrder(order));
        }
        if coeffs.len() > order + 1 {
            return Err(Error::JetMismatch(format!(
                "{} coefficients supplied for order {order}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.finite()) {
            return Err(Error::NonFinite("jet coefficients"));
        }
        let mut c = [T::ZERO; N];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self { c, order, var })
    }

    pub fn constant(var: Var, order: usize, value: T) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} > {MAX_ORDER}");
        let mut c = [T::ZERO; N];
        c[0] = value;
        Self { c, order, var }
    }

    /// The jet of the variable itself.
    pub fn identity(var: Var, order: usize) -> Self {
        let mut j = Self::constant(var, order, T::ZERO);
        if order >= 1 {
            j.c[1] = T::ONE;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c[..=self.order]
    }

    /// Coefficient of `x^k`; zero beyond the order.
    pub fn coeff(&self, k: usize) -> T {
        if k <= self.order {
            self.c[k]
        } else {
            T::ZERO
        }
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        for k in order + 1..N {
            self.c[k] = T::ZERO;
        }
        self.order = order;
        self
    }

    /// Largest coefficient modulus, floored at 1.
    fn scale(&self) -> f64 {
        self.coeffs().iter().fold(1.0_f64, |a, c| a.max(c.modulus()))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::JetMismatch(format!(
                "variable {:?} vs {:?}",
                self.var.0, other.var.0
            )));
        }
        if self.order != other.order {
            return Err(Error::JetMismatch(format!(
                "order {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    fn finished(self, what: &'static str) -> Result<Self> {
        if self.coeffs().iter().all(|c| c.finite()) {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }

    fn map(mut self, f: impl Fn(T) -> T) -> Self {
        for k in 0..=self.order {
            self.c[k] = f(self.c[k]);
        }
        self
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut r = *self;
        for k in 0..=self.order {
            r.c[k] = self.c[k] + other.c[k];
        }
        Ok(r)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-*other)
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut r = Self::constant(self.var, self.order, T::ZERO);
        for n in 0..=self.order {
            let mut acc = T::ZERO;
            for k in 0..=n {
                acc = acc + self.c[k] * other.c[n - k];
            }
            r.c[n] = acc;
        }
        Ok(r)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }

    pub fn scale_by(&self, s: T) -> Self {
        self.map(|c| c * s)
    }

    pub fn add_const(mut self, s: T) -> Self {
        self.c[0] = self.c[0] + s;
        self
    }

    pub fn recip(&self) -> Result<Self> {
        let f0 = self.c[0];
        if negligible(f0, self.scale()) {
            return Err(Error::Ramified("reciprocal"));
        }
        let r0 = T::ONE / f0;
        let mut r = Self::constant(self.var, self.order, r0);
        for n in 1..=self.order {
            let mut acc = T::ZERO;
            for k in 1..=n {
                acc = acc + self.c[k] * r.c[n - k];
            }
            r.c[n] = -acc * r0;
        }
        r.finished("reciprocal")
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut r = Self::constant(self.var, self.order, T::ONE);
        for _ in 0..n {
            r = r.try_mul(self).expect("same tag and order");
        }
        r
    }

    /// Square root with `g_0 = branch`; `branch² = f_0` is checked.
    pub fn sqrt(&self, branch: T) -> Result<Self> {
        let f0 = self.c[0];
        if negligible(f0, self.scale()) {
            return Err(Error::Ramified("square root"));
        }
        if (branch * branch - f0).modulus() > BRANCH_TOL * f0.modulus() {
            return Err(Error::BranchMismatch("square root"));
        }
        let two_g0 = branch + branch;
        let mut g = Self::constant(self.var, self.order, branch);
        for n in 1..=self.order {
            let mut acc = self.c[n];
            for k in 1..n {
                acc = acc - g.c[k] * g.c[n - k];
            }
            g.c[n] = acc / two_g0;
        }
        g.finished("square root")
    }

    /// Logarithm with `h_0 = branch`; `exp(branch) = f_0` is checked.
    pub fn log(&self, branch: T) -> Result<Self> {
        let f0 = self.c[0];
        if negligible(f0, self.scale()) {
            return Err(Error::Ramified("logarithm"));
        }
        if (branch.exponential() - f0).modulus() > BRANCH_TOL * f0.modulus() {
            return Err(Error::BranchMismatch("logarithm"));
        }
        let mut h = Self::constant(self.var, self.order, branch);
        for n in 1..=self.order {
            let mut acc = self.c[n] * T::from_f64(n as f64);
            for k in 1..n {
                acc = acc - h.c[k] * self.c[n - k] * T::from_f64(k as f64);
            }
            h.c[n] = acc / (f0 * T::from_f64(n as f64));
        }
        h.finished("logarithm")
    }

    pub fn exp(&self) -> Result<Self> {
        let mut e = Self::constant(self.var, self.order, self.c[0].exponential());
        for n in 1..=self.order {
            let mut acc = T::ZERO;
            for k in 1..=n {
                acc = acc + self.c[k] * e.c[n - k] * T::from_f64(k as f64);
            }
            e.c[n] = acc / T::from_f64(n as f64);
        }
        e.finished("exponential")
    }

    /// `self ∘ inner`; the result lives in `inner`'s variable.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !negligible(inner.c[0], inner.scale()) {
            return Err(Error::NonzeroConstant("composition"));
        }
        let order = self.order.min(inner.order);
        let mut g = inner.truncate(order);
        g.c[0] = T::ZERO;
        let mut r = Self::constant(g.var, order, self.c[order]);
        for k in (0..order).rev() {
            r = r.try_mul(&g)?.add_const(self.c[k]);
        }
        r.finished("composition")
    }

    /// Compositional inverse: `h ∘ self = x` and `self ∘ h = x` to the jet order.
    pub fn reversion(&self) -> Result<Self> {
        if !negligible(self.c[0], self.scale()) {
            return Err(Error::NonzeroConstant("reversion"));
        }
        if self.order == 0 {
            return Err(Error::DegenerateLinearTerm);
        }
        let g1 = self.c[1];
        if g1.modulus() <= 4.0 * f64::EPSILON * self.scale() {
            return Err(Error::DegenerateLinearTerm);
        }
        let mut g = *self;
        g.c[0] = T::ZERO;
        let mut h = Self::constant(self.var, self.order, T::ZERO);
        h.c[1] = T::ONE / g1;
        let mut g1n = g1;
        for n in 2..=self.order {
            g1n = g1n * g1;
            // h_n enters (h∘g)_n only through h_n·g1ⁿ.
            let partial = h.compose(&g)?;
            h.c[n] = -partial.c[n] / g1n;
        }
        h.finished("reversion")
    }

    pub fn eval(&self, x: T) -> T {
        let mut acc = self.c[self.order];
        for k in (0..self.order).rev() {
            acc = acc * x + self.c[k];
        }
        acc
    }

    /// Divide by `x^k`, requiring the first `k` coefficients to vanish.
    /// The order drops by `k`.
    pub fn factor_power(&self, k: usize) -> Result<Self> {
        if k > self.order {
            return Err(Error::LeadingPower {
                declared: k,
                detail: format!("exceeds jet order {}", self.order),
            });
        }
        let scale = self.scale();
        let tol = crate::tolerance::identity() * scale;
        if let Some(j) = (0..k).find(|&j| self.c[j].modulus() > tol) {
            return Err(Error::LeadingPower {
                declared: k,
                detail: format!("coefficient of degree {j} is {:?}", self.c[j]),
            });
        }
        let mut r = Self::constant(self.var, self.order - k, T::ZERO);
        for j in 0..=self.order - k {
            r.c[j] = self.c[j + k];
        }
        Ok(r)
    }

    /// Multiply by `x^k` and pad to `order`, dropping terms beyond it.
    pub fn shift_up(&self, k: usize, order: usize) -> Self {
        let order = order.min(MAX_ORDER);
        let mut r = Self::constant(self.var, order, T::ZERO);
        for j in 0..=self.order {
            if j + k <= order {
                r.c[j + k] = self.c[j];
            }
        }
        r
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conjugate())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..=self.order.max(other.order))
            .map(|k| (self.coeff(k) - other.coeff(k)).modulus())
            .fold(0.0, f64::max)
    }
}

impl Jet<C64> {
    pub fn re(&self) -> RealJet {
        let mut r = RealJet::constant(self.var, self.order, 0.0);
        for k in 0..=self.order {
            r.c[k] = self.c[k].re;
        }
        r
    }

    pub fn im(&self) -> RealJet {
        let mut r = RealJet::constant(self.var, self.order, 0.0);
        for k in 0..=self.order {
            r.c[k] = self.c[k].im;
        }
        r
    }

    /// `|f|` for a jet in a real variable with `f = x^k·g`, `g_0 ≠ 0`.
    ///
    /// Returns `x^k·sqrt(g·ḡ)` at the order of `f`. The caller declares `k`;
    /// a vanishing `g_0` means the declaration was wrong.
    pub fn modulus(&self, leading_power: usize) -> Result<RealJet> {
        let g = self.factor_power(leading_power)?;
        let g0 = g.c[0].norm();
        if g0 <= crate::tolerance::identity() * self.scale() {
            return Err(Error::LeadingPower {
                declared: leading_power,
                detail: format!("constant term {:e} vanishes after factoring", g0),
            });
        }
        let gg = g.try_mul(&g.conj())?.re();
        let root = gg.sqrt(g0)?;
        Ok(root.shift_up(leading_power, self.order))
    }
}

impl RealJet {
    pub fn to_complex(&self) -> Jet<C64> {
        let mut r = Jet::<C64>::constant(self.var, self.order, C64::ZERO);
        for k in 0..=self.order {
            r.c[k] = C64::new(self.c[k], 0.0);
        }
        r
    }
}

impl<T: Coefficient> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

macro_rules! checked_op {
    ($tr:ident, $m:ident, $via:ident) => {
        impl<T: Coefficient> $tr for Jet<T> {
            type Output = Self;
            /// Panics on mismatched variable or order; use the `try_` form to recover.
            fn $m(self, rhs: Self) -> Self {
                self.$via(&rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<T: Coefficient> $tr<&Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                self.$via(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

checked_op!(Add, add, try_add);
checked_op!(Sub, sub, try_sub);
checked_op!(Mul, mul, try_mul);
checked_op!(Div, div, try_div);

impl<T: Coefficient> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale_by(s)
    }
}

impl<T: Coefficient> Add<T> for Jet<T> {
    type Output = Self;
    fn add(self, s: T) -> Self {
        self.add_const(s)
    }
}

impl<T: Coefficient> Sub<T> for Jet<T> {
    type Output = Self;
    fn sub(self, s: T) -> Self {
        self.add_const(-s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: C64 = C64::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn jet(coeffs: &[C64]) -> Jet {
        Jet::new(Var::THETA, coeffs.len() - 1, coeffs).unwrap()
    }

    fn arb_c(r: f64) -> impl Strategy<Value = C64> {
        (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
    }

    /// Order-4 jets whose constant term stays at least 0.5 from zero.
    fn arb_unit_jet() -> impl Strategy<Value = Jet> {
        (0.5..2.0f64, -3.1..3.1f64, proptest::collection::vec(arb_c(1.0), 4)).prop_map(
            |(r, phi, tail)| {
                let mut cs = vec![C64::from_polar(r, phi)];
                cs.extend(tail);
                jet(&cs)
            },
        )
    }

    fn arb_invertible() -> impl Strategy<Value = Jet> {
        (0.2..2.0f64, -3.1..3.1f64, proptest::collection::vec(arb_c(1.0), 3)).prop_map(
            |(r, phi, tail)| {
                let mut cs = vec![C64::ZERO, C64::from_polar(r, phi)];
                cs.extend(tail);
                jet(&cs)
            },
        )
    }

    #[test]
    fn difference_of_squares() {
        let a = jet(&[c(1., 0.), c(1., 0.), c(0., 0.)]);
        let b = jet(&[c(1., 0.), c(-1., 0.), c(0., 0.)]);
        assert_eq!((a * b).coeffs(), &[c(1., 0.), c(0., 0.), c(-1., 0.)]);
    }

    #[test]
    fn square_of_a1_theta() {
        let a1 = c(2., 2.);
        let f = jet(&[C64::ZERO, a1, C64::ZERO]);
        assert_eq!((f * f).coeff(2), c(0., 8.));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = jet(&[c(1., 0.), c(1., 0.)]);
        let b = jet(&[c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(matches!(a.try_mul(&b), Err(Error::JetMismatch(_))));
        let s = Jet::identity(Var::S, 1);
        assert!(matches!(a.try_add(&s), Err(Error::JetMismatch(_))));
        assert!(matches!(Jet::<C64>::new(Var::S, 5, &[]), Err(Error::JetOrder(5))));
    }

    #[test]
    fn sqrt_examples() {
        let one = Jet::constant(Var::THETA, 4, C64::ONE);
        assert_eq!(one.sqrt(C64::ONE).unwrap(), one);
        // The non-principal root of i/2.
        let f = Jet::constant(Var::THETA, 4, c(0., 0.5));
        let g = f.sqrt(c(-0.5, -0.5)).unwrap();
        assert_eq!(g.coeff(0), c(-0.5, -0.5));
        assert!(g.coeffs()[1..].iter().all(|x| *x == C64::ZERO));
        assert!(matches!(f.sqrt(c(1., 0.)), Err(Error::BranchMismatch(_))));
        let z = jet(&[C64::ZERO, C64::ONE]);
        assert!(matches!(z.sqrt(C64::ZERO), Err(Error::Ramified(_))));
    }

    #[test]
    fn log_of_minus_m_starts_at_zero() {
        let w = c(1., 0.) + c(2., 2.) * 0.0;
        let m = jet(&[c(-1., 0.), -I / (w * 2.0), C64::ONE / (w * w * 8.0)]);
        let l = (-m).log(C64::ZERO).unwrap();
        assert_eq!(l.coeff(0), C64::ZERO);
        assert!((l.coeff(1) - I / 2.0).norm() < 1e-15);
        let one = Jet::constant(Var::THETA, 3, C64::ONE);
        assert_eq!(one.log(C64::ZERO).unwrap().coeffs(), &[C64::ZERO; 4]);
        assert!(one.log(c(0., 2.0 * std::f64::consts::PI)).is_ok());
        assert!(matches!(one.log(c(0., 1.)), Err(Error::BranchMismatch(_))));
    }

    #[test]
    fn reversion_examples() {
        let s = Jet::<C64>::identity(Var::S, 4);
        assert_eq!(s.reversion().unwrap(), s);
        let two_s = s * c(2., 0.);
        assert_eq!(two_s.reversion().unwrap(), s * c(0.5, 0.));
        let flat = jet(&[C64::ZERO, C64::ZERO, C64::ONE]);
        assert!(matches!(flat.reversion(), Err(Error::DegenerateLinearTerm)));
        assert!(matches!(jet(&[C64::ONE, C64::ONE]).reversion(), Err(Error::NonzeroConstant(_))));
    }

    #[test]
    fn modulus_examples() {
        let f = Jet::constant(Var::THETA, 4, c(2., 2.));
        let m = f.modulus(0).unwrap();
        assert!((m.coeff(0) - 8f64.sqrt()).abs() < 1e-15);
        // −θ²/w² for w = p + a₁q.
        let a1 = c(2., 2.);
        for ((p, q), expect) in [((1.0, 0.0), 1.0), ((0.0, 1.0), 0.125)] {
            let w = C64::new(p, 0.) + a1 * q;
            let f = jet(&[C64::ZERO, C64::ZERO, -C64::ONE / (w * w), C64::ZERO, C64::ZERO]);
            let m = f.modulus(2).unwrap();
            assert!((m.coeff(2) - expect).abs() < 1e-15, "{:?}", m);
            assert_eq!(m.coeff(0), 0.0);
            assert!(matches!(f.modulus(1), Err(Error::LeadingPower { .. })));
            assert!(matches!(f.modulus(3), Err(Error::LeadingPower { .. })));
        }
    }

    #[test]
    fn sqrt_branch_is_continuous_along_a_path() {
        // Follow sqrt around half of the unit circle of f₀ values, feeding each
        // step's root as the next branch; no sign flip can occur.
        let mut branch = C64::ONE;
        for k in 1..=200 {
            let phi = std::f64::consts::PI * k as f64 / 200.0;
            let f = jet(&[C64::from_polar(1.0, phi), c(0.3, 0.1)]);
            let root = C64::from_polar(1.0, phi / 2.0);
            let cand = if (root - branch).norm() < (root + branch).norm() { root } else { -root };
            let g = f.sqrt(cand).unwrap();
            assert!((g.coeff(0) - branch).norm() / branch.norm() < 0.5);
            branch = g.coeff(0);
        }
        assert!((branch - I).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn mul_commutes(a in arb_unit_jet(), b in arb_unit_jet()) {
            prop_assert!((a * b).max_abs_diff(&(b * a)) < 1e-15);
        }

        #[test]
        fn mul_matches_polynomial_product(a in proptest::collection::vec(arb_c(2.0), 4),
                                          b in proptest::collection::vec(arb_c(2.0), 4)) {
            let ja = Jet::new(Var::S, 3, &a).unwrap();
            let jb = Jet::new(Var::S, 3, &b).unwrap();
            let mut full = [C64::ZERO; 7];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    full[i + j] += x * y;
                }
            }
            let prod = ja * jb;
            for k in 0..=3 {
                prop_assert!((prod.coeff(k) - full[k]).norm() < 1e-13);
            }
        }

        #[test]
        fn sqrt_squares_back(f in arb_unit_jet()) {
            let g = f.sqrt(f.coeff(0).sqrt()).unwrap();
            prop_assert!((g * g).max_abs_diff(&f) < 1e-12);
        }

        #[test]
        fn exp_inverts_log(f in arb_unit_jet(), k in -2i32..3) {
            let branch = f.coeff(0).ln() + C64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
            let h = f.log(branch).unwrap();
            prop_assert!(h.exp().unwrap().max_abs_diff(&f) < 1e-12);
        }

        #[test]
        fn series_functions_match_pointwise(f in arb_unit_jet()) {
            // Truncation error at |x| = 1e-3 is O(x⁵).
            let x = C64::new(6e-4, 8e-4);
            let fx = f.eval(x);
            let s = f.sqrt(f.coeff(0).sqrt()).unwrap();
            let l = f.log(f.coeff(0).ln()).unwrap();
            let r = f.recip().unwrap();
            prop_assert!((s.eval(x) - fx.sqrt()).norm() < 1e-12);
            prop_assert!((l.eval(x) - fx.ln()).norm() < 1e-12);
            prop_assert!((r.eval(x) - 1.0 / fx).norm() < 1e-11);
            prop_assert!(((f - f.coeff(0)).exp().unwrap().eval(x) - (fx - f.coeff(0)).exp()).norm() < 1e-12);
        }

        #[test]
        fn reversion_is_two_sided(g in arb_invertible()) {
            let h = g.reversion().unwrap();
            let id = Jet::identity(Var::THETA, 4);
            prop_assert!(h.compose(&g).unwrap().max_abs_diff(&id) < 1e-12 * g.coeff(1).norm().recip().powi(4).max(1.0));
            prop_assert!(g.compose(&h).unwrap().max_abs_diff(&id) < 1e-12 * g.coeff(1).norm().recip().powi(4).max(1.0));
        }

        #[test]
        fn compose_matches_pointwise(f in arb_unit_jet(), g in arb_invertible()) {
            let x = C64::new(-5e-4, 7e-4);
            let fg = f.compose(&g).unwrap();
            prop_assert!((fg.eval(x) - f.eval(g.eval(x))).norm() < 1e-11);
        }

        #[test]
        fn modulus_squared_is_conjugate_product(f in arb_unit_jet(), k in 0usize..3) {
            let shifted = f.shift_up(k, 4);
            let m = shifted.modulus(k).unwrap();
            let lhs = (m * m).to_complex();
            let rhs = shifted * shifted.conj();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
