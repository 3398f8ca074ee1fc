//! Explicit SL(2,C) holonomy family of the Whitehead link group.
//!
//! Generators α, β, γ map to
//!
//! ```text
//! A = [[x, 1], [0, 1/x]]     B = [[x, 0], [y, 1/x]]
//! C = [[−x(x²y² + x²(x²−3)y − (x²−1)²)/(z·w), z], [z·y, z(1−x²)/x]]
//! ```
//!
//! with `w = (x²y − x² + 1)(x²y + (x²−1)²)` and `z² = x²(1 − x² − y)/w`.
//! The complete structure sits at `(x, y) = (−1, 2i)` with `z = −(1+i)/2`,
//! the non-principal root of `i/2`; `z` is continued from there.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtendedComplex {
    Finite(C64),
    Infinity,
}

impl From<C64> for ExtendedComplex {
    fn from(z: C64) -> Self {
        ExtendedComplex::Finite(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusMatrix {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MobiusMatrix {
    pub const IDENTITY: MobiusMatrix = MobiusMatrix {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse via the adjugate, divided by the determinant.
    pub fn inv(&self) -> Self {
        let det = self.det();
        Self { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inv() } else { *self };
        (0..n.unsigned_abs()).fold(Self::IDENTITY, |acc, _| acc.mul(&base))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d]
            .iter()
            .fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn apply(&self, w: ExtendedComplex) -> ExtendedComplex {
        use ExtendedComplex::*;
        match w {
            Infinity => {
                if self.c == C64::new(0.0, 0.0) {
                    Infinity
                } else {
                    Finite(self.a / self.c)
                }
            }
            Finite(z) => {
                let den = self.c * z + self.d;
                if den == C64::new(0.0, 0.0) {
                    Infinity
                } else {
                    Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// The two fixed points on the sphere (equal for parabolic elements).
    pub fn fixed_points(&self) -> (ExtendedComplex, ExtendedComplex) {
        use ExtendedComplex::*;
        let zero = C64::new(0.0, 0.0);
        if self.c == zero {
            // z ↦ (a z + b)/d fixes ∞ and b/(d − a).
            let dd = self.d - self.a;
            return if dd == zero { (Infinity, Infinity) } else { (Infinity, Finite(self.b / dd)) };
        }
        // c z² + (d − a) z − b = 0.
        let disc = ((self.d - self.a) * (self.d - self.a) + 4.0 * self.b * self.c).sqrt();
        let two_c = 2.0 * self.c;
        (Finite((self.a - self.d + disc) / two_c), Finite((self.a - self.d - disc) / two_c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
    C,
    CInv,
}

use Letter::*;

pub const WORD_M1: &[Letter] = &[C];
pub const WORD_L1: &[Letter] = &[A, BInv, AInv, B];
pub const WORD_M2: &[Letter] = &[A];
pub const WORD_L2: &[Letter] = &[C, AInv, CInv, A, BInv, A];

/// Relators as (left, right) pairs: A·C = C·B and C·A·B·A⁻¹ = A·B⁻¹·A·B·A⁻¹·C.
pub const RELATIONS: [(&[Letter], &[Letter]); 2] = [
    (&[A, C], &[C, B]),
    (&[C, A, B, AInv], &[A, BInv, A, B, AInv, C]),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WhHolonomy {
    pub x: C64,
    pub y: C64,
    pub w: C64,
    pub z: C64,
    pub a: MobiusMatrix,
    pub b: MobiusMatrix,
    pub c: MobiusMatrix,
}

pub const BASE_X: C64 = C64::new(-1.0, 0.0);
pub const BASE_Y: C64 = C64::new(0.0, 2.0);
pub const BASE_Z: C64 = C64::new(-0.5, -0.5);

fn w_of(x: C64, y: C64) -> C64 {
    let x2 = x * x;
    (x2 * y - x2 + 1.0) * (x2 * y + (x2 - 1.0) * (x2 - 1.0))
}

fn z_squared(x: C64, y: C64) -> Result<C64> {
    let w = w_of(x, y);
    if w.norm() <= 1e-300 {
        return Err(Error::HolonomyDomain("w = 0"));
    }
    Ok(x * x * (1.0 - x * x - y) / w)
}

/// Continue `z` along the segment from the base point, refining until no step
/// changes `z` by more than a quarter of its size.
fn continue_z(x: C64, y: C64) -> Result<C64> {
    let mut steps = 8usize;
    'refine: while steps <= 4096 {
        let n = steps;
        let mut z = BASE_Z;
        for k in 1..=n {
            let t = k as f64 / n as f64;
            let z2 = z_squared(BASE_X + (x - BASE_X) * t, BASE_Y + (y - BASE_Y) * t)?;
            if z2.norm() <= 1e-300 {
                return Err(Error::BranchContinuation("z² vanishes on the path".into()));
            }
            let root = z2.sqrt();
            let next = if (root - z).norm() <= (root + z).norm() { root } else { -root };
            if (next - z).norm() > 0.25 * z.norm() {
                steps *= 2;
                continue 'refine;
            }
            z = next;
        }
        return Ok(z);
    }
    Err(Error::BranchContinuation(format!("z not continuable to (x, y) = ({x}, {y})")))
}

pub fn build_representation(x: C64, y: C64) -> Result<WhHolonomy> {
    if x.norm() <= 1e-300 {
        return Err(Error::HolonomyDomain("x = 0"));
    }
    let w = w_of(x, y);
    if w.norm() <= 1e-300 {
        return Err(Error::HolonomyDomain("w = 0"));
    }
    let z = continue_z(x, y)?;
    let x2 = x * x;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let a = MobiusMatrix::new(x, one, zero, 1.0 / x);
    let b = MobiusMatrix::new(x, zero, y, 1.0 / x);
    let c11 = -x * (x2 * y * y + x2 * (x2 - 3.0) * y - (x2 - 1.0) * (x2 - 1.0)) / (z * w);
    let c = MobiusMatrix::new(c11, z, z * y, z * (1.0 - x2) / x);
    let rep = WhHolonomy { x, y, w, z, a, b, c };
    if [rep.a, rep.b, rep.c].iter().any(|m| ![m.a, m.b, m.c, m.d].iter().all(|e| e.is_finite())) {
        return Err(Error::NonFinite("holonomy matrices"));
    }
    Ok(rep)
}

impl WhHolonomy {
    pub fn letter(&self, l: Letter) -> MobiusMatrix {
        match l {
            A => self.a,
            AInv => self.a.inv(),
            B => self.b,
            BInv => self.b.inv(),
            C => self.c,
            CInv => self.c.inv(),
        }
    }

    /// Left-to-right product of the word's letters.
    pub fn word(&self, w: &[Letter]) -> MobiusMatrix {
        w.iter().fold(MobiusMatrix::IDENTITY, |acc, &l| acc.mul(&self.letter(l)))
    }

    /// Largest entrywise defect over the two group relations.
    pub fn relation_residual(&self) -> f64 {
        RELATIONS
            .iter()
            .map(|(l, r)| self.word(l).max_abs_diff(&self.word(r)))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeripheralMatrices {
    pub m1: MobiusMatrix,
    pub l1: MobiusMatrix,
    pub m2: MobiusMatrix,
    pub l2: MobiusMatrix,
}

pub fn peripheral_matrices(rep: &WhHolonomy) -> PeripheralMatrices {
    PeripheralMatrices {
        m1: rep.word(WORD_M1),
        l1: rep.word(WORD_L1),
        m2: rep.word(WORD_M2),
        l2: rep.word(WORD_L2),
    }
}

pub fn l2_eigenvalue(x: C64, y: C64) -> Result<C64> {
    let x2 = x * x;
    let den = x2 + y - 1.0;
    if den.norm() <= 1e-300 {
        return Err(Error::HolonomyDomain("−1 + x² + y = 0"));
    }
    Ok((x2 - x2 * y - 1.0) / den)
}

/// `tr ρ(αγα⁻¹γ⁻¹) − 2`, which equals `−y` on this family.
pub fn commutator_trace_minus2(_x: C64, y: C64) -> C64 {
    -y
}

/// The same quantity written through the second cusp's eigenvalues:
/// `−(m₂² − 1)(1 − l₂)/(l₂ + m₂²)`.
pub fn commutator_trace_from_eigenvalues(m2: C64, l2: C64) -> Result<C64> {
    let den = l2 + m2 * m2;
    if den.norm() <= 1e-300 {
        return Err(Error::HolonomyDomain("l₂ + m₂² = 0"));
    }
    Ok(-(m2 * m2 - 1.0) * (1.0 - l2) / den)
}

/// Family parameters `(x, y)` of the representation with eigenvalues `(m₂, l₂)`.
pub fn parameters_from_eigenvalues(m2: C64, l2: C64) -> Result<(C64, C64)> {
    Ok((m2, -commutator_trace_from_eigenvalues(m2, l2)?))
}

/// Residuals of the two relations between `(m₁, l₁)` and `(m₂, l₂)` obtained
/// from `tr²ρ(𝓜₁)` and `tr ρ(𝓛₁)`.
pub fn cusp_relation_residuals(m1: C64, l1: C64, m2: C64, l2: C64) -> Result<(C64, C64)> {
    let small = |z: C64| z.norm() <= 1e-12;
    let m22 = m2 * m2;
    if small(l2 + m22) {
        return Err(Error::HolonomyDomain("l₂ + m₂² = 0"));
    }
    if small(m22 - 1.0) {
        return Err(Error::HolonomyDomain("m₂² = 1"));
    }
    if small(l2) || small(m1) || small(l1) {
        return Err(Error::HolonomyDomain("zero eigenvalue"));
    }
    let m24 = m22 * m22;
    let m26 = m24 * m22;
    let m28 = m24 * m24;
    let lm = l2 + m22;
    let tm = m1 + 1.0 / m1;
    let r1 = tm * tm - (1.0 + l2) * (1.0 + l2) * (m24 - l2) / (l2 * lm * (m22 - 1.0));
    let num = l2 * l2 * (1.0 + m24) + l2 * (-1.0 + 2.0 * m22 + 2.0 * m24 + 2.0 * m26 - m28) + m24 + m28;
    let r2 = (l1 + 1.0 / l1) - num / (m22 * lm * lm);
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn arb_near_base(r: f64) -> impl Strategy<Value = (C64, C64)> {
        (0.0..r, -3.2..3.2f64, 0.0..r, -3.2..3.2f64).prop_map(|(a, p, b, q)| {
            (BASE_X + C64::from_polar(a, p), BASE_Y + C64::from_polar(b, q))
        })
    }

    #[test]
    fn base_representation_matches_closed_form() {
        let rep = build_representation(BASE_X, BASE_Y).unwrap();
        assert!((rep.w - c(-4.0, 0.0)).norm() < 1e-15);
        assert!((rep.z - BASE_Z).norm() < 1e-15);
        let expect_c = MobiusMatrix::new(c(-2.0, 0.0), BASE_Z, c(1.0, -1.0), c(0.0, 0.0));
        assert!(rep.c.max_abs_diff(&expect_c) < 1e-15);
        assert!(rep.a.max_abs_diff(&MobiusMatrix::new(c(-1., 0.), c(1., 0.), c(0., 0.), c(-1., 0.))) < 1e-15);
        assert!(rep.b.max_abs_diff(&MobiusMatrix::new(c(-1., 0.), c(0., 0.), c(0., 2.), c(-1., 0.))) < 1e-15);
        let p = peripheral_matrices(&rep);
        assert!((p.m1.trace() + 2.0).norm() < 1e-14);
        assert!((p.m2.trace() + 2.0).norm() < 1e-14);
        assert!(rep.relation_residual() < 1e-14);
    }

    #[test]
    fn l2_spot_values() {
        assert!((l2_eigenvalue(BASE_X, BASE_Y).unwrap() + 1.0).norm() < 1e-15);
        for x in [c(0.3, 0.2), c(-1.2, 0.1), c(2.0, 0.0)] {
            assert!((l2_eigenvalue(x, c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        }
        assert!(l2_eigenvalue(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn commutator_trace_at_base() {
        assert_eq!(commutator_trace_minus2(BASE_X, BASE_Y), c(0.0, -2.0));
    }

    #[test]
    fn singular_inputs_are_rejected() {
        assert!(matches!(build_representation(c(0.0, 0.0), BASE_Y), Err(Error::HolonomyDomain(_))));
        // x²y − x² + 1 = 0 at x = 1 + 0i, y = 0.
        let err = build_representation(c(1.0, 0.0), c(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::HolonomyDomain(_) | Error::BranchContinuation(_)));
        let m = c(0.9, 0.1);
        assert!(matches!(
            cusp_relation_residuals(m, m, c(-1.0, 0.0), c(-1.1, 0.1)),
            Err(Error::HolonomyDomain(_))
        ));
    }

    #[test]
    fn mobius_action_and_fixed_points() {
        let m = MobiusMatrix::new(c(2.0, 1.0), c(1.0, 0.0), c(0.5, -0.5), c(1.0, 1.0));
        let (p, q) = m.fixed_points();
        for f in [p, q] {
            let ExtendedComplex::Finite(z) = f else { panic!() };
            let ExtendedComplex::Finite(img) = m.apply(f) else { panic!() };
            assert!((img - z).norm() < 1e-13);
        }
        let a = MobiusMatrix::new(c(-1.1, 0.1), c(1.0, 0.0), c(0.0, 0.0), 1.0 / c(-1.1, 0.1));
        let (p, q) = a.fixed_points();
        assert_eq!(p, ExtendedComplex::Infinity);
        let (ExtendedComplex::Finite(q), ExtendedComplex::Finite(aq)) = (q, a.apply(q)) else { panic!() };
        assert!((aq - q).norm() < 1e-13);
        assert!(m.pow(3).max_abs_diff(&m.mul(&m).mul(&m)) < 1e-13);
        assert!(m.pow(-2).mul(&m.pow(2)).max_abs_diff(&MobiusMatrix::IDENTITY) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn family_invariants((x, y) in arb_near_base(0.2)) {
            let rep = build_representation(x, y).unwrap();
            prop_assert!((rep.z * rep.z - z_squared(x, y).unwrap()).norm() < 1e-12);
            prop_assert!(rep.relation_residual() < 1e-11);
            let p = peripheral_matrices(&rep);
            for m in [rep.a, rep.b, rep.c, p.m1, p.l1, p.m2, p.l2] {
                prop_assert!((m.det() - 1.0).norm() < 1e-12);
            }
            prop_assert!(p.l2.c.norm() < 1e-11);
            prop_assert!(p.m2.mul(&p.l2).max_abs_diff(&p.l2.mul(&p.m2)) < 1e-10);
            prop_assert!((p.m2.trace() - (x + 1.0 / x)).norm() < 1e-10);
            let l2 = l2_eigenvalue(x, y).unwrap();
            prop_assert!((p.l2.a - l2).norm() < 1e-10);
            prop_assert!((p.l2.d - 1.0 / l2).norm() < 1e-10);
        }

        #[test]
        fn commutator_identities((x, y) in arb_near_base(0.2)) {
            let rep = build_representation(x, y).unwrap();
            let t = commutator_trace_minus2(x, y);
            let comm = rep.word(&[A, C, AInv, CInv]).trace() - 2.0;
            prop_assert!((comm - t).norm() < 1e-10);
            let ab = rep.word(&[A, BInv]).trace() - 2.0;
            prop_assert!((ab - t).norm() < 1e-10);
            let l2 = l2_eigenvalue(x, y).unwrap();
            prop_assert!((commutator_trace_from_eigenvalues(x, l2).unwrap() - t).norm() < 1e-10);
            let (x2, y2) = parameters_from_eigenvalues(x, l2).unwrap();
            prop_assert!((x2 - x).norm() < 1e-12 && (y2 - y).norm() < 1e-10);
        }

        #[test]
        fn trace_relations_hold_on_the_family((x, y) in arb_near_base(0.2)) {
            let rep = build_representation(x, y).unwrap();
            let p = peripheral_matrices(&rep);
            // Eigenvalues of the parabolic-near M1 and L1 from their traces.
            let eig = |m: &MobiusMatrix| {
                let t = m.trace();
                let s = (t * t - 4.0).sqrt();
                (t + s) / 2.0
            };
            let (m1, l1) = (eig(&p.m1), eig(&p.l1));
            let l2 = p.l2.a;
            if (x * x - 1.0).norm() > 1e-3 {
                let (r1, r2) = cusp_relation_residuals(m1, l1, x, l2).unwrap();
                prop_assert!(r1.norm() < 1e-9 && r2.norm() < 1e-9, "{} {}", r1, r2);
                let (s1, s2) = cusp_relation_residuals(1.0 / m1, 1.0 / l1, x, l2).unwrap();
                prop_assert!((s1 - r1).norm() < 1e-12 && (s2 - r2).norm() < 1e-12);
            }
        }
    }
}
