//! Independent oracles shared by the integration targets.
#![allow(dead_code, clippy::needless_range_loop)]

use conetube::holonomy::{build_representation, parameters_from_eigenvalues, ExtendedComplex, MobiusMatrix};
use conetube::surgery::ConeStructure;
use conetube::tube::line_distance;
use conetube::{Result, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tube radius as half the distance between the axis of α and its image
/// under γ⁻¹, using the explicit matrices of the family.
pub fn radius_from_axes(st: &ConeStructure) -> Result<f64> {
    let (x, y) = parameters_from_eigenvalues(st.eigenvalues.m2, st.eigenvalues.l2)?;
    let rep = build_representation(x, y)?;
    let (p, q) = rep.a.fixed_points();
    let g = rep.c.inv();
    Ok(line_distance(p, q, g.apply(p), g.apply(q))? / 2.0)
}

/// Translation length of `M₂^r L₂^s`, from its (upper-triangular) eigenvalue.
pub fn core_length_from_matrices(st: &ConeStructure, r: i64, s: i64) -> Result<f64> {
    let (x, y) = parameters_from_eigenvalues(st.eigenvalues.m2, st.eigenvalues.l2)?;
    let rep = build_representation(x, y)?;
    let core = rep.a.pow(r).mul(&rep.word(conetube::holonomy::WORD_L2).pow(s));
    Ok((2.0 * core.a.ln()).re.abs())
}

/// Least squares `y ≈ a + b·x²`; returns `(a, b)`.
pub fn fit_even_quadratic(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let u: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let su: f64 = u.iter().sum();
    let suu: f64 = u.iter().map(|v| v * v).sum();
    let sy: f64 = ys.iter().sum();
    let suy: f64 = u.iter().zip(ys).map(|(a, b)| a * b).sum();
    let det = n * suu - su * su;
    ((suu * sy - su * suy) / det, (n * suy - su * sy) / det)
}

pub fn apply(g: &MobiusMatrix, z: C64) -> ExtendedComplex {
    g.apply(ExtendedComplex::Finite(z))
}

/// Deterministic unit-determinant matrix from four complex entries.
pub fn normalize(a: C64, b: C64, cc: C64, d: C64) -> Option<MobiusMatrix> {
    let det = a * d - b * cc;
    if det.norm() < 1e-2 {
        return None;
    }
    let k = det.sqrt();
    Some(MobiusMatrix::new(a / k, b / k, cc / k, d / k))
}

/// Least squares `y ≈ a + b·x² + c·x⁴`; returns `(a, b, c)`.
pub fn fit_even_quartic(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let mut m = [[0.0; 4]; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let basis = [1.0, x * x, x.powi(4)];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            m[i][3] += basis[i] * y;
        }
    }
    // Gauss–Jordan on the 3×3 normal equations.
    for k in 0..3 {
        let piv = (k..3).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, piv);
        for i in 0..3 {
            if i != k {
                let f = m[i][k] / m[k][k];
                for j in k..4 {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    (m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2])
}
