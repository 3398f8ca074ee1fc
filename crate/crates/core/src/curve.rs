//! Geometric curves `l(m)` through `(m⁰, l⁰) ∈ {±1}²`.
//!
//! Coefficients follow the factorial convention
//! `l = l⁰ + a₁Δ + (a₂/2)Δ² + (a₃/6)Δ³`, `Δ = m − m⁰`.
//! They come either from an explicit polynomial `A(l, m)` (implicit
//! differentiation by jet substitution) or from a sampled parameterization
//! `s ↦ (m(s), l(s))` (complex-step differences, Richardson extrapolation,
//! then series reversion).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, Var, MAX_ORDER};
use crate::parallel::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    Polynomial,
    Sampled,
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricCurve {
    pub m0: Sign,
    pub l0: Sign,
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
    pub source: CurveSource,
}

impl GeometricCurve {
    pub fn new(m0: Sign, l0: Sign, a: [C64; 3]) -> Self {
        Self { m0, l0, a1: a[0], a2: a[1], a3: a[2], source: CurveSource::Given }
    }

    /// The curve of the Whitehead link complement's second cusp with the
    /// first cusp complete: `(2+2i, 2−6i, −12)` at `(−1, −1)`.
    pub fn whitehead() -> Self {
        Self::new(Sign::Minus, Sign::Minus, [C64::new(2.0, 2.0), C64::new(2.0, -6.0), C64::new(-12.0, 0.0)])
    }

    pub fn coefficients(&self) -> [C64; 3] {
        [self.a1, self.a2, self.a3]
    }

    /// `l − l⁰` as a jet in `Δ = m − m⁰` (order 3).
    pub fn series(&self) -> Jet {
        Jet::new(Var::M_PLUS_1, 3, &[C64::new(0.0, 0.0), self.a1, self.a2 / 2.0, self.a3 / 6.0])
            .expect("finite coefficients")
    }

    pub fn involution_defect(&self) -> C64 {
        involution_defect(self)
    }
}

/// `a₂ + m⁰a₁ − l⁰a₁²`; vanishes for curves symmetric under `(l, m) ↦ (1/l, 1/m)`.
pub fn involution_defect(c: &GeometricCurve) -> C64 {
    c.a2 + c.m0.value() * c.a1 - c.l0.value() * c.a1 * c.a1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Term {
    dl: u32,
    dm: u32,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermFile {
    terms: Vec<Term>,
}

/// Polynomial in `(l, m)` keyed by `(deg_l, deg_m)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), C64>,
}

impl BivariatePolynomial {
    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), C64)>) -> Self {
        let mut p = Self::default();
        for (k, c) in terms {
            *p.terms.entry(k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        p.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        p
    }

    fn real(terms: &[(u32, u32, f64)]) -> Self {
        Self::new(terms.iter().map(|&(dl, dm, c)| ((dl, dm), C64::new(c, 0.0))))
    }

    /// `−l + l² + 4lm² + m⁴ − lm⁴`, the geometric factor at `(−1, −1)` for the
    /// Whitehead link's second cusp with the first cusp complete.
    pub fn whitehead() -> Self {
        Self::real(&[(1, 0, -1.0), (2, 0, 1.0), (1, 2, 4.0), (0, 4, 1.0), (1, 4, -1.0)])
    }

    /// The widely reproduced form `−l + l² + 4lm + m⁴ − lm⁴`, which does not
    /// vanish at `(−1, −1)` (its value there is 8).
    pub fn whitehead_misprint() -> Self {
        Self::real(&[(1, 0, -1.0), (2, 0, 1.0), (1, 1, 4.0), (0, 4, 1.0), (1, 4, -1.0)])
    }

    /// `lm⁸ − lm⁶ − (l² + 2l + 1)m⁴ − lm² + l` (figure-eight knot).
    pub fn figure_eight() -> Self {
        Self::real(&[
            (1, 8, 1.0),
            (1, 6, -1.0),
            (2, 4, -1.0),
            (1, 4, -2.0),
            (0, 4, -1.0),
            (1, 2, -1.0),
            (1, 0, 1.0),
        ])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TermFile = serde_json::from_str(s).map_err(|e| Error::Polynomial(e.to_string()))?;
        if f.terms.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(Error::Polynomial("non-finite coefficient".into()));
        }
        if f.terms.is_empty() {
            return Err(Error::Polynomial("no terms".into()));
        }
        Ok(Self::new(f.terms.iter().map(|t| ((t.dl, t.dm), C64::new(t.re, t.im)))))
    }

    pub fn to_json(&self) -> String {
        let terms = self
            .terms
            .iter()
            .map(|(&(dl, dm), c)| Term { dl, dm, re: c.re, im: c.im })
            .collect();
        serde_json::to_string_pretty(&TermFile { terms }).expect("plain data")
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), C64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    fn scale(&self) -> f64 {
        self.terms.values().fold(1.0_f64, |a, c| a.max(c.norm()))
    }

    pub fn eval(&self, l: C64, m: C64) -> C64 {
        self.terms
            .iter()
            .map(|(&(dl, dm), c)| c * l.powu(dl) * m.powu(dm))
            .sum()
    }

    pub fn eval_jet(&self, l: &Jet, m: &Jet) -> Result<Jet> {
        let max_l = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_m = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let one = Jet::constant(l.var(), l.order(), C64::new(1.0, 0.0));
        let mut lp = vec![one];
        for k in 0..max_l as usize {
            lp.push(lp[k].try_mul(l)?);
        }
        let mut mp = vec![one];
        for k in 0..max_m as usize {
            mp.push(mp[k].try_mul(m)?);
        }
        let mut acc = Jet::constant(l.var(), l.order(), C64::new(0.0, 0.0));
        for (&(dl, dm), &c) in &self.terms {
            acc = acc.try_add(&lp[dl as usize].try_mul(&mp[dm as usize])?.scale_by(c))?;
        }
        Ok(acc)
    }

    /// Coefficient of `XⁱYʲ` in `A(l⁰ + X, m⁰ + Y)`.
    fn taylor(&self, l0: f64, m0: f64, i: u32, j: u32) -> C64 {
        let binom = |n: u32, k: u32| (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64);
        self.terms
            .iter()
            .filter(|(&(dl, dm), _)| dl >= i && dm >= j)
            .map(|(&(dl, dm), c)| {
                c * binom(dl, i) * l0.powi((dl - i) as i32) * binom(dm, j) * m0.powi((dm - j) as i32)
            })
            .sum()
    }
}

fn curve_jets(m0: Sign, l0: Sign, c: &[C64; 4]) -> (Jet, Jet) {
    let d = Jet::identity(Var::M_PLUS_1, MAX_ORDER);
    let m = d.add_const(C64::new(m0.value(), 0.0));
    let l = Jet::new(Var::M_PLUS_1, MAX_ORDER, &[C64::new(l0.value(), 0.0), c[1], c[2], c[3]])
        .expect("finite");
    (l, m)
}

/// Largest coefficient through `through_order` of `A(l(m), m)` as a jet in `m − m⁰`.
pub fn substitution_residual(a: &BivariatePolynomial, curve: &GeometricCurve, through_order: usize) -> Result<f64> {
    let c = [C64::new(0.0, 0.0), curve.a1, curve.a2 / 2.0, curve.a3 / 6.0];
    let (l, m) = curve_jets(curve.m0, curve.l0, &c);
    let e = a.eval_jet(&l, &m)?;
    Ok((0..=through_order.min(MAX_ORDER)).map(|k| e.coeff(k).norm()).fold(0.0, f64::max))
}

fn relative_distance(a: C64, hint: C64) -> f64 {
    (a - hint).norm() / hint.norm().max(f64::MIN_POSITIVE)
}

/// Branch coefficients by implicit differentiation of `A(l(m), m) = 0`.
pub fn expand_from_polynomial(a: &BivariatePolynomial, m0: Sign, l0: Sign, a1_hint: C64) -> Result<GeometricCurve> {
    let (lv, mv) = (l0.value(), m0.value());
    let value = a.eval(C64::new(lv, 0.0), C64::new(mv, 0.0));
    if !(value.norm() < 1e-10) {
        return Err(Error::NotARoot(value.norm()));
    }
    let small = |z: C64| z.norm() <= 1e-10 * a.scale();
    let (al, am) = (a.taylor(lv, mv, 1, 0), a.taylor(lv, mv, 0, 1));

    // `shift` = order at which c_n first appears linearly (n + shift).
    let (a1, shift) = if !small(al) {
        let a1 = -am / al;
        if relative_distance(a1, a1_hint) > 0.5 {
            return Err(Error::NoBranchMatchesHint(format!("only branch has slope {a1}")));
        }
        (a1, 0)
    } else if !small(am) {
        return Err(Error::BranchSlopeDefect("∂A/∂l vanishes while ∂A/∂m does not: no branch l(m)"));
    } else {
        // Both partials vanish: slopes solve A₂₀a² + A₁₁a + A₀₂ = 0.
        let (q2, q1, q0) = (a.taylor(lv, mv, 2, 0), a.taylor(lv, mv, 1, 1), a.taylor(lv, mv, 0, 2));
        if small(q2) {
            return Err(Error::BranchSlopeDefect("quadratic branch equation has a vertical tangent"));
        }
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if small(disc) {
            return Err(Error::BranchSlopeDefect("quadratic branch equation has a double root"));
        }
        let sq = disc.sqrt();
        let roots = [(-q1 + sq) / (2.0 * q2), (-q1 - sq) / (2.0 * q2)];
        let near: Vec<C64> = roots.into_iter().filter(|r| relative_distance(*r, a1_hint) <= 0.5).collect();
        match near.as_slice() {
            [r] => (*r, 1),
            [] => return Err(Error::NoBranchMatchesHint(format!("candidate slopes {} and {}", roots[0], roots[1]))),
            _ => return Err(Error::NoBranchMatchesHint("hint is ambiguous between the two branches".into())),
        }
    };

    let zero = C64::new(0.0, 0.0);
    let mut c = [zero, a1, zero, zero];
    for n in 2..=3 {
        let k = n + shift;
        c[n] = zero;
        let (l, m) = curve_jets(m0, l0, &c);
        let e0 = a.eval_jet(&l, &m)?.coeff(k);
        c[n] = C64::new(1.0, 0.0);
        let (l, m) = curve_jets(m0, l0, &c);
        let slope = a.eval_jet(&l, &m)?.coeff(k) - e0;
        if small(slope) {
            return Err(Error::BranchSlopeDefect("triangular system is singular"));
        }
        c[n] = -e0 / slope;
    }
    Ok(GeometricCurve {
        m0,
        l0,
        a1,
        a2: c[2] * 2.0,
        a3: c[3] * 6.0,
        source: CurveSource::Polynomial,
    })
}

/// A parameterized curve `s ↦ (m(s), l(s))`.
///
/// Samplers must be reentrant: stencil points are evaluated concurrently.
pub trait CurveSampler: Sync {
    fn sample(&self, s: C64) -> Result<(C64, C64)>;
}

impl<F> CurveSampler for F
where
    F: Fn(C64) -> Result<(C64, C64)> + Sync,
{
    fn sample(&self, s: C64) -> Result<(C64, C64)> {
        self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    /// Step moduli, each half the previous.
    pub steps: [f64; 3],
    /// Rotation of the stencil in the s-plane, radians.
    pub rotation: f64,
    /// Required agreement of successive extrapolants (relative to max(1, |c|)).
    pub agreement: f64,
    pub execution: Execution,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { steps: [1e-2, 5e-3, 2.5e-3], rotation: 0.0, agreement: 1e-6, execution: Execution::default() }
    }
}

impl StencilConfig {
    pub fn with_rotation(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }
}

/// Taylor coefficients 1..=3 from four samples `f(h·iʲ)`.
fn four_point(samples: &[C64], h: C64) -> [C64; 3] {
    let i = C64::new(0.0, 1.0);
    let mut out = [C64::new(0.0, 0.0); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let k = k + 1;
        let mut acc = C64::new(0.0, 0.0);
        for (j, f) in samples.iter().enumerate() {
            acc += f * i.powi(-((j * k) as i32));
        }
        *slot = acc / (4.0 * h.powi(k as i32));
    }
    out
}

/// Taylor coefficients of `m(s)` and `l(s)` at 0 through order 3.
pub fn sample_derivatives<S: CurveSampler + ?Sized>(sampler: &S, cfg: &StencilConfig) -> Result<(Jet, Jet)> {
    let center = sampler.sample(C64::new(0.0, 0.0))?;
    let i = C64::new(0.0, 1.0);
    let rot = C64::from_polar(1.0, cfg.rotation);
    let nodes: Vec<C64> = cfg
        .steps
        .iter()
        .flat_map(|&h| (0..4).map(move |j| rot * h * i.powi(j)))
        .collect();
    let values = parallel::map(cfg.execution, &nodes, |&s| sampler.sample(s));
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;

    let mut level = Vec::new();
    for (lvl, &h) in cfg.steps.iter().enumerate() {
        let chunk = &values[4 * lvl..4 * lvl + 4];
        let ms: Vec<C64> = chunk.iter().map(|v| v.0).collect();
        let ls: Vec<C64> = chunk.iter().map(|v| v.1).collect();
        let hh = rot * h;
        let (dm, dl) = (four_point(&ms, hh), four_point(&ls, hh));
        level.push([dm[0], dm[1], dm[2], dl[0], dl[1], dl[2]]);
    }
    // Leading errors are h⁴ and h⁸ with halving steps.
    let rich = |a: &[C64; 6], b: &[C64; 6], f: f64| -> [C64; 6] {
        std::array::from_fn(|k| (b[k] * f - a[k]) / (f - 1.0))
    };
    let r1 = rich(&level[0], &level[1], 16.0);
    let r1b = rich(&level[1], &level[2], 16.0);
    for k in 0..6 {
        let gap = (r1[k] - r1b[k]).norm();
        if gap > cfg.agreement * r1b[k].norm().max(1.0) {
            return Err(Error::StencilNotConverged(format!(
                "coefficient {k}: successive extrapolants differ by {gap:.3e}"
            )));
        }
    }
    let r2 = rich(&r1, &r1b, 256.0);
    let m = Jet::new(Var::S, 3, &[center.0, r2[0], r2[1], r2[2]])?;
    let l = Jet::new(Var::S, 3, &[center.1, r2[3], r2[4], r2[5]])?;
    Ok((m, l))
}

/// Branch coefficients from a sampled parameterization.
pub fn expand_from_samples<S: CurveSampler + ?Sized>(
    sampler: &S,
    m0: Sign,
    l0: Sign,
    cfg: &StencilConfig,
) -> Result<GeometricCurve> {
    let (m, l) = sample_derivatives(sampler, cfg)?;
    let (mc, lc) = (m.coeff(0), l.coeff(0));
    if (mc - m0.value()).norm() > 1e-8 || (lc - l0.value()).norm() > 1e-8 {
        return Err(Error::Sampler(format!("sampler(0) = ({mc}, {lc}) is not the base point")));
    }
    if m.coeff(1).norm() < 1e-8 {
        return Err(Error::DegenerateLinearTerm);
    }
    let s_of_delta = (m - mc).reversion()?;
    let l_of_delta = (l - lc).compose(&s_of_delta)?;
    Ok(GeometricCurve {
        m0,
        l0,
        a1: l_of_delta.coeff(1),
        a2: l_of_delta.coeff(2) * 2.0,
        a3: l_of_delta.coeff(3) * 6.0,
        source: CurveSource::Sampled,
    })
}
