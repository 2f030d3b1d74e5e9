//! Fresnel reflection coefficients of planar layer stacks and the parallel
//! Green's function g∥ of the thermal near field above them.
//!
//! Reflection amplitudes are propagated together with their complements
//! `1 - R` and `1 + R`. Good conductors and superconductors give |R| within
//! 1e-10 of unity, and the dissipative signal lives entirely in those
//! complements, so they are never formed by subtraction.
//!
//! Normalisation: `W = √(ε − u²)` is dimensionless and the phase acquired in a
//! layer of physical thickness `t` is `exp(2i·k·W·t)` with `k = ω/c`. This is
//! the only dimensionally consistent reading of the textbook three- and
//! four-layer expressions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::materials::{permittivity, MaterialModel};
use crate::physcore::wavenumber;
use crate::quadrature;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Thickness {
    Finite(f64),
    Bulk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: MaterialModel,
    pub thickness: Thickness,
}

impl Layer {
    pub fn finite(material: MaterialModel, thickness: f64) -> Self {
        Self { material, thickness: Thickness::Finite(thickness) }
    }

    pub fn bulk(material: MaterialModel) -> Self {
        Self { material, thickness: Thickness::Bulk }
    }
}

/// Layers listed top to bottom below an implicit vacuum half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::invalid("layer stack is empty"));
        };
        if last.thickness != Thickness::Bulk {
            return Err(Error::invalid("bottom layer of a stack must be bulk"));
        }
        for (i, layer) in layers[..layers.len() - 1].iter().enumerate() {
            match layer.thickness {
                Thickness::Bulk => return Err(Error::invalid(format!("layer {i} is bulk but not at the bottom"))),
                Thickness::Finite(t) if !(t > 0.0) => {
                    return Err(Error::invalid(format!("layer {i} has non-positive thickness {t}")))
                }
                _ => {}
            }
        }
        for layer in &layers {
            layer.material.validate()?;
        }
        Ok(Self { layers })
    }

    /// A single semi-infinite medium below vacuum.
    pub fn half_space(material: MaterialModel) -> Self {
        Self::new(vec![Layer::bulk(material)]).expect("bulk layer")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Permittivities of every medium at (ω, T), the vacuum half-space first.
    pub fn permittivities(&self, omega: f64, temperature: f64) -> Result<Vec<Complex64>> {
        let mut eps = Vec::with_capacity(self.layers.len() + 1);
        eps.push(ONE);
        for layer in &self.layers {
            eps.push(permittivity(&layer.material, omega, temperature)?);
        }
        Ok(eps)
    }

    fn thicknesses(&self) -> Vec<f64> {
        self.layers
            .iter()
            .map(|l| match l.thickness {
                Thickness::Finite(t) => t,
                Thickness::Bulk => f64::INFINITY,
            })
            .collect()
    }
}

/// `√z` on the branch with Im ≥ 0 (Re ≥ 0 when Im = 0).
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let w = if x == 0.0 && y == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let t = ((x.abs() + x.hypot(y)) * 0.5).sqrt();
        if x >= 0.0 {
            Complex64::new(t, y / (2.0 * t))
        } else {
            Complex64::new(y.abs() / (2.0 * t), t.copysign(y))
        }
    };
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        -w
    } else {
        w
    }
}

/// `exp(z) − 1` without cancellation for small |z|.
pub fn expm1_complex(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin, x.exp() * y.sin())
}

/// A reflection amplitude with its complements carried at full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub r: Complex64,
    pub one_minus: Complex64,
    pub one_plus: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackReflection {
    pub s: Reflection,
    pub p: Reflection,
}

fn interface_w(eps_a: Complex64, eps_b: Complex64, w_a: Complex64, w_b: Complex64, u2: f64) -> Result<StackReflection> {
    let degenerate = || Error::Degenerate { eps_a, eps_b, u: u2.sqrt() };
    let den_s = w_a + w_b;
    let den_p = eps_b * w_a + eps_a * w_b;
    if den_s.norm() == 0.0 || den_p.norm() == 0.0 || !den_s.is_finite() || !den_p.is_finite() {
        return Err(degenerate());
    }
    // (W_a − W_b) = (ε_a − ε_b)/(W_a + W_b), and the p numerator factors likewise.
    let s =
        Reflection { r: (eps_a - eps_b) / (den_s * den_s), one_minus: 2.0 * w_b / den_s, one_plus: 2.0 * w_a / den_s };
    let p = Reflection {
        r: (eps_b - eps_a) * (eps_a * eps_b - u2 * (eps_a + eps_b)) / (den_p * den_p),
        one_minus: 2.0 * eps_a * w_b / den_p,
        one_plus: 2.0 * eps_b * w_a / den_p,
    };
    if !s.r.is_finite() || !p.r.is_finite() {
        return Err(degenerate());
    }
    Ok(StackReflection { s, p })
}

/// Two-medium Fresnel coefficients (Rs, Rp) for a wave incident from `eps_a`.
pub fn fresnel_interface(eps_a: Complex64, eps_b: Complex64, u: f64) -> Result<(Complex64, Complex64)> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("u must be non-negative, got {u}")));
    }
    let u2 = u * u;
    let w_a = branch_sqrt(eps_a - u2);
    let w_b = branch_sqrt(eps_b - u2);
    let r = interface_w(eps_a, eps_b, w_a, w_b, u2)?;
    Ok((r.s.r, r.p.r))
}

/// Add a finite layer on top of an already reduced lower stack.
fn cover(top: Reflection, below: Reflection, phase: Complex64, one_minus_phase: Complex64) -> Option<Reflection> {
    let one_minus_re = one_minus_phase + phase * below.one_minus;
    let one_plus_re = one_minus_phase + phase * below.one_plus;
    let den = 0.5 * (top.one_plus * one_plus_re + top.one_minus * one_minus_re);
    if den.norm() == 0.0 || !den.is_finite() {
        return None;
    }
    Some(Reflection {
        r: (top.r + below.r * phase) / den,
        one_minus: top.one_minus * one_minus_re / den,
        one_plus: top.one_plus * one_plus_re / den,
    })
}

/// Reflection of a stack described by permittivities (vacuum first), finite
/// thicknesses for the intermediate media, and the vacuum normal component
/// `w_top` supplied by the caller for precision near u = 1.
pub(crate) fn stack_reflection(
    eps: &[Complex64],
    thickness: &[f64],
    u2: f64,
    w_top: Complex64,
    k: f64,
) -> Result<StackReflection> {
    let n = eps.len();
    debug_assert!(n >= 2 && thickness.len() == n - 1);
    let w: Vec<Complex64> = (0..n).map(|j| if j == 0 { w_top } else { branch_sqrt(eps[j] - u2) }).collect();
    let mut acc = interface_w(eps[n - 2], eps[n - 1], w[n - 2], w[n - 1], u2)?;
    for j in (1..n - 1).rev() {
        let top = interface_w(eps[j - 1], eps[j], w[j - 1], w[j], u2)?;
        let z = 2.0 * I * k * w[j] * thickness[j - 1];
        let phase = z.exp();
        let one_minus_phase = -expm1_complex(z);
        let degenerate = || Error::Degenerate { eps_a: eps[j - 1], eps_b: eps[j], u: u2.sqrt() };
        acc = StackReflection {
            s: cover(top.s, acc.s, phase, one_minus_phase).ok_or_else(degenerate)?,
            p: cover(top.p, acc.p, phase, one_minus_phase).ok_or_else(degenerate)?,
        };
    }
    Ok(acc)
}

/// Full reflection record of `stack` at in-plane wavenumber `u` (units of k).
pub fn fresnel_stack_detailed(stack: &LayerStack, u: f64, omega: f64, temperature: f64) -> Result<StackReflection> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("u must be non-negative, got {u}")));
    }
    let eps = stack.permittivities(omega, temperature)?;
    let u2 = u * u;
    stack_reflection(&eps, &stack.thicknesses(), u2, branch_sqrt(ONE - u2), wavenumber(omega))
}

/// (Rs, Rp) of a layered stack below vacuum.
pub fn fresnel_stack(stack: &LayerStack, u: f64, omega: f64, temperature: f64) -> Result<(Complex64, Complex64)> {
    let r = fresnel_stack_detailed(stack, u, omega, temperature)?;
    Ok((r.s.r, r.p.r))
}

fn plain_interface(eps_a: Complex64, eps_b: Complex64, u2: f64) -> [Complex64; 2] {
    let wa = branch_sqrt(eps_a - u2);
    let wb = branch_sqrt(eps_b - u2);
    [(wa - wb) / (wa + wb), (eps_b * wa - eps_a * wb) / (eps_b * wa + eps_a * wb)]
}

/// Closed-form A|B|C reflection with B of thickness `t_b` (bulk A and C),
/// written out directly rather than through the recursion.
pub fn fresnel_three_layer(
    eps_a: Complex64,
    eps_b: Complex64,
    t_b: f64,
    eps_c: Complex64,
    u: f64,
    k: f64,
) -> [Complex64; 2] {
    let u2 = u * u;
    let e = (2.0 * I * k * branch_sqrt(eps_b - u2) * t_b).exp();
    let ab = plain_interface(eps_a, eps_b, u2);
    let ba = plain_interface(eps_b, eps_a, u2);
    let bc = plain_interface(eps_b, eps_c, u2);
    [0, 1].map(|i| (ab[i] + bc[i] * e) / (1.0 - ba[i] * bc[i] * e))
}

/// Closed-form A|B|C|D reflection including the transmission factor of the
/// A|B|C sub-stack.
#[allow(clippy::too_many_arguments)]
pub fn fresnel_four_layer(
    eps_a: Complex64,
    eps_b: Complex64,
    t_b: f64,
    eps_c: Complex64,
    t_c: f64,
    eps_d: Complex64,
    u: f64,
    k: f64,
) -> [Complex64; 2] {
    let u2 = u * u;
    let e_b = (2.0 * I * k * branch_sqrt(eps_b - u2) * t_b).exp();
    let e_c = (2.0 * I * k * branch_sqrt(eps_c - u2) * t_c).exp();
    let abc = fresnel_three_layer(eps_a, eps_b, t_b, eps_c, u, k);
    let cba = fresnel_three_layer(eps_c, eps_b, t_b, eps_a, u, k);
    let ab = plain_interface(eps_a, eps_b, u2);
    let ba = plain_interface(eps_b, eps_a, u2);
    let bc = plain_interface(eps_b, eps_c, u2);
    let cb = plain_interface(eps_c, eps_b, u2);
    let cd = plain_interface(eps_c, eps_d, u2);
    [0, 1].map(|i| {
        let transmission = (e_b - ab[i] * cb[i]) / (1.0 - ba[i] * bc[i] * e_b);
        (abc[i] + transmission * cd[i] * e_c) / (1.0 - cba[i] * cd[i] * e_c)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensResult {
    /// g∥.
    pub g_parallel: f64,
    /// 1 + g∥, evaluated without cancellation.
    pub enhancement: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Quadrature controls for [`greens_parallel_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensOptions {
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for GreensOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, max_evaluations: 2_000_000 }
    }
}

/// g∥ above `stack` at ion height `d` with the default evaluation budget.
pub fn greens_parallel(stack: &LayerStack, omega: f64, temperature: f64, d: f64, rel_tol: f64) -> Result<GreensResult> {
    greens_parallel_with(stack, omega, temperature, d, GreensOptions { rel_tol, ..GreensOptions::default() })
}

/// g∥ = (3/4)·Re ∫₀^∞ (u/v)·e^{2ikdv}·[Rs + (u² − 1)Rp] du.
///
/// The propagating range u ∈ [0, 1] is integrated in θ with u = sin θ, which
/// removes the 1/v endpoint singularity; the free-space part is folded in
/// analytically so that 1 + g∥ keeps full precision above near-perfect
/// mirrors. The evanescent range is integrated in t = √(u² − 1) on
/// geometrically growing panels out to t_max = max(20/(kd), 10·√|ε|max).
pub fn greens_parallel_with(
    stack: &LayerStack,
    omega: f64,
    temperature: f64,
    d: f64,
    opts: GreensOptions,
) -> Result<GreensResult> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("ion height must be positive, got {d}")));
    }
    if !(1e-10..=1e-2).contains(&opts.rel_tol) {
        return Err(Error::domain(format!("rel_tol {} outside [1e-10, 1e-2]", opts.rel_tol)));
    }
    let eps = stack.permittivities(omega, temperature)?;
    if eps.iter().all(|&e| e == ONE) {
        return Ok(GreensResult { g_parallel: 0.0, enhancement: 1.0, abs_error_estimate: 0.0, evaluations: 0 });
    }
    let thickness = stack.thicknesses();
    let k = wavenumber(omega);
    let kd = k * d;

    let mut failure: Option<Error> = None;
    let propagating = quadrature::integrate(
        |theta| {
            let (u, v) = theta.sin_cos();
            match stack_reflection(&eps, &thickness, u * u, Complex64::new(v, 0.0), k) {
                Ok(r) => {
                    let z = 2.0 * I * kd * v;
                    let e = z.exp();
                    let inner = e * r.s.one_plus + e * (v * v) * r.p.one_minus - expm1_complex(z) * (1.0 + v * v);
                    u * inner.re
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::NAN
                }
            }
        },
        &[0.0, 0.5 * FRAC_PI_2, FRAC_PI_2],
        opts.rel_tol,
        0.0,
        opts.max_evaluations / 2,
    );
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let propagating = propagating?;

    let eps_max = eps.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let t_max = (20.0 / kd).max(10.0 * eps_max.sqrt());
    let mut breakpoints = vec![0.0];
    let mut edge = 1.0;
    while edge < t_max {
        breakpoints.push(edge);
        edge *= 2.0;
    }
    breakpoints.push(t_max);
    let evanescent = quadrature::integrate(
        |t| {
            let decay = (-2.0 * kd * t).exp();
            if decay == 0.0 {
                return 0.0;
            }
            match stack_reflection(&eps, &thickness, 1.0 + t * t, Complex64::new(0.0, t), k) {
                Ok(r) => decay * (r.s.r.im - t * t * r.p.one_minus.im),
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::NAN
                }
            }
        },
        &breakpoints,
        opts.rel_tol,
        0.0,
        opts.max_evaluations - propagating.evaluations,
    );
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let evanescent = evanescent?;

    let prop = 0.75 * propagating.value;
    let evan = 0.75 * evanescent.value;
    Ok(GreensResult {
        g_parallel: (prop - 1.0) + evan,
        enhancement: prop + evan,
        abs_error_estimate: 0.75 * (propagating.abs_error + evanescent.abs_error),
        evaluations: propagating.evaluations + evanescent.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{ResistivityTable, TwoFluid};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI * 1.0e6;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn branch_choice() {
        assert_eq!(branch_sqrt(c(-4.0, 0.0)), c(0.0, 2.0));
        assert_eq!(branch_sqrt(c(4.0, 0.0)), c(2.0, 0.0));
        assert_eq!(branch_sqrt(c(-4.0, -0.0)), c(0.0, 2.0));
        let w = branch_sqrt(c(1.0, -1.0));
        assert!(w.im >= 0.0);
        assert_relative_eq!((w * w - c(1.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
        let tiny = branch_sqrt(c(-1e17, 1e9));
        assert_relative_eq!(tiny.re, 1e9 / (2.0 * 1e17f64.sqrt()), max_relative = 1e-14);
    }

    #[test]
    fn expm1_small_argument() {
        let z = c(1e-12, 2e-12);
        let e = expm1_complex(z);
        assert_relative_eq!(e.re, 1e-12, max_relative = 1e-9);
        assert_relative_eq!(e.im, 2e-12, max_relative = 1e-9);
    }

    #[test]
    fn zero_contrast_interface() {
        let (rs, rp) = fresnel_interface(c(3.0, 0.5), c(3.0, 0.5), 0.7).unwrap();
        assert_eq!(rs, c(0.0, 0.0));
        assert_eq!(rp, c(0.0, 0.0));
    }

    #[test]
    fn perfect_conductor_limit() {
        let (rs, rp) = fresnel_interface(c(1.0, 0.0), c(-1e12, 0.0), 0.0).unwrap();
        assert!((rs - c(-1.0, 0.0)).norm() < 1e-5);
        assert!((rp - c(1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn sapphire_normal_incidence() {
        let (rs, _) = fresnel_interface(c(1.0, 0.0), c(10.0, 1e-5), 0.0).unwrap();
        let expected = (1.0 - 10f64.sqrt()) / (1.0 + 10f64.sqrt());
        assert!((rs.re - expected).abs() < 1e-6);
        assert!((rs.re + 0.5195).abs() < 1e-4);
    }

    #[test]
    fn complements_match_direct_values() {
        let r = interface_w(ONE, c(5.0, 2.0), branch_sqrt(c(1.0 - 0.25, 0.0)), branch_sqrt(c(5.0 - 0.25, 2.0)), 0.25)
            .unwrap();
        for refl in [r.s, r.p] {
            assert!(close(refl.one_minus, ONE - refl.r, 1e-14));
            assert!(close(refl.one_plus, ONE + refl.r, 1e-14));
        }
    }

    fn random_eps(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.random_range(-30.0..30.0), rng.random_range(0.0..30.0))
    }

    #[test]
    fn recursion_matches_three_and_four_layer_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = 1.0;
        for _ in 0..1000 {
            let (ea, eb, ec, ed) = (ONE, random_eps(&mut rng), random_eps(&mut rng), random_eps(&mut rng));
            let u: f64 = rng.random_range(0.0..4.0);
            let (tb, tc) = (rng.random_range(0.01..1.0), rng.random_range(0.01..1.0));
            let u2 = u * u;
            let w_top = branch_sqrt(ONE - u2);
            let three = stack_reflection(&[ea, eb, ec], &[tb, f64::INFINITY], u2, w_top, k).unwrap();
            let expected = fresnel_three_layer(ea, eb, tb, ec, u, k);
            assert!(close(three.s.r, expected[0], 1e-12), "{} vs {}", three.s.r, expected[0]);
            assert!(close(three.p.r, expected[1], 1e-12), "{} vs {}", three.p.r, expected[1]);
            let four = stack_reflection(&[ea, eb, ec, ed], &[tb, tc, f64::INFINITY], u2, w_top, k).unwrap();
            let expected = fresnel_four_layer(ea, eb, tb, ec, tc, ed, u, k);
            assert!(close(four.s.r, expected[0], 1e-12), "{} vs {}", four.s.r, expected[0]);
            assert!(close(four.p.r, expected[1], 1e-12), "{} vs {}", four.p.r, expected[1]);
        }
    }

    #[test]
    fn vanishing_and_opaque_middle_layers() {
        let (ea, eb, ec) = (ONE, c(4.0, 3.0), c(9.0, 0.5));
        let k = 1.0;
        for u in [0.0, 0.5, 0.99, 1.5, 7.0] {
            let u2: f64 = u * u;
            let w_top = branch_sqrt(ONE - u2);
            let two = stack_reflection(&[ea, ec], &[f64::INFINITY], u2, w_top, k).unwrap();
            let thin = stack_reflection(&[ea, eb, ec], &[1e-14, f64::INFINITY], u2, w_top, k).unwrap();
            assert!(close(thin.s.r, two.s.r, 1e-10));
            assert!(close(thin.p.r, two.p.r, 1e-10));

            let decay = 1.0 / (k * branch_sqrt(eb - u2).im);
            let opaque = stack_reflection(&[ea, eb, ec], &[10.0 * decay, f64::INFINITY], u2, w_top, k).unwrap();
            let ab = stack_reflection(&[ea, eb], &[f64::INFINITY], u2, w_top, k).unwrap();
            assert!((opaque.s.r - ab.s.r).norm() < 1e-8);
            assert!((opaque.p.r - ab.p.r).norm() < 1e-8);
        }
    }

    #[test]
    fn identical_bottom_layers_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (eb, ec) = (random_eps(&mut rng), random_eps(&mut rng));
            let u: f64 = rng.random_range(0.0..4.0);
            let (tb, tc) = (rng.random_range(0.01..1.0), rng.random_range(0.01..1.0));
            let four = fresnel_four_layer(ONE, eb, tb, ec, tc, ec, u, 1.0);
            let three = fresnel_three_layer(ONE, eb, tb, ec, u, 1.0);
            assert!(close(four[0], three[0], 1e-10));
            assert!(close(four[1], three[1], 1e-10));
        }
    }

    #[test]
    fn stack_validation() {
        assert!(LayerStack::new(vec![]).is_err());
        assert!(LayerStack::new(vec![Layer::finite(MaterialModel::Vacuum, 1e-6)]).is_err());
        assert!(LayerStack::new(vec![Layer::bulk(MaterialModel::Vacuum), Layer::bulk(MaterialModel::Vacuum)]).is_err());
        assert!(LayerStack::new(vec![Layer::finite(MaterialModel::Vacuum, 0.0), Layer::bulk(MaterialModel::Vacuum)])
            .is_err());
    }

    #[test]
    fn vacuum_stack_has_no_green_function() {
        let stack =
            LayerStack::new(vec![Layer::finite(MaterialModel::Vacuum, 1e-6), Layer::bulk(MaterialModel::Vacuum)])
                .unwrap();
        let g = greens_parallel(&stack, OMEGA, 100.0, 225e-6, 1e-6).unwrap();
        assert_eq!(g.g_parallel, 0.0);
        assert_eq!(g.enhancement, 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let stack = LayerStack::half_space(MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 1e-6 });
        assert!(greens_parallel(&stack, OMEGA, 100.0, 0.0, 1e-6).is_err());
        assert!(greens_parallel(&stack, OMEGA, 100.0, 1e-4, 1e-1).is_err());
        assert!(greens_parallel(&stack, OMEGA, 100.0, 1e-4, 1e-12).is_err());
    }

    fn conductor(sigma: f64) -> MaterialModel {
        MaterialModel::Conductor {
            rho: ResistivityTable::new("const", vec![(1.0, 1.0 / sigma), (400.0, 1.0 / sigma)]).unwrap(),
        }
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn quasi_static_distance_exponent() {
        let stack = LayerStack::half_space(conductor(1e6));
        let ds = [10e-6, 20e-6, 40e-6, 70e-6, 100e-6];
        let gs: Vec<f64> =
            ds.iter().map(|&d| greens_parallel(&stack, OMEGA, 300.0, d, 1e-8).unwrap().g_parallel).collect();
        let s = slope(&ds, &gs);
        assert!((s + 3.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn gold_at_room_temperature_leaves_quasi_static_regime() {
        // the 300 K skin depth (≈75 µm) is comparable to d here, which bends the exponent
        let stack = LayerStack::half_space(MaterialModel::Conductor { rho: ResistivityTable::gold() });
        let ds = [10e-6, 20e-6, 40e-6, 70e-6, 100e-6];
        let gs: Vec<f64> =
            ds.iter().map(|&d| greens_parallel(&stack, OMEGA, 300.0, d, 1e-8).unwrap().g_parallel).collect();
        let s = slope(&ds, &gs);
        assert!(s > -2.9 && s < -2.4, "{s}");
        let ds = [1e-6, 2e-6, 4e-6, 7e-6, 10e-6];
        let gs: Vec<f64> =
            ds.iter().map(|&d| greens_parallel(&stack, OMEGA, 300.0, d, 1e-8).unwrap().g_parallel).collect();
        assert!((slope(&ds, &gs) + 3.0).abs() < 0.1);
    }

    #[test]
    fn conductivity_exponent() {
        let sigmas = [1e4, 3e4, 1e5, 3e5, 1e6];
        let gs: Vec<f64> = sigmas
            .iter()
            .map(|&s| {
                greens_parallel(&LayerStack::half_space(conductor(s)), OMEGA, 300.0, 10e-6, 1e-8).unwrap().g_parallel
            })
            .collect();
        let s = slope(&sigmas, &gs);
        assert!((s + 1.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn error_estimate_is_honest() {
        let stack = LayerStack::new(vec![
            Layer::finite(MaterialModel::TwoFluidSc(TwoFluid::ybco(300e-9)), 300e-9),
            Layer::bulk(MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 1e-6 }),
        ])
        .unwrap();
        for t in [40.0, 120.0] {
            let mut tol = 1e-3;
            let mut prev = greens_parallel(&stack, OMEGA, t, 225e-6, tol).unwrap();
            while tol > 1e-8 {
                tol /= 2.0;
                let next = greens_parallel(&stack, OMEGA, t, 225e-6, tol).unwrap();
                let change = (next.enhancement - prev.enhancement).abs();
                assert!(
                    change <= prev.abs_error_estimate.max(1e-15 * prev.enhancement.abs()),
                    "T={t} tol={tol}: {change} > {}",
                    prev.abs_error_estimate
                );
                prev = next;
            }
        }
    }

    /// Reference: the textbook integrand on a single mapped domain
    /// u = x/(1 − x) with uniform panels in x and no analytic rewriting.
    fn reference_g(eps_b: Complex64, kd: f64) -> f64 {
        let f = |x: f64| {
            let u = x / (1.0 - x);
            let du = 1.0 / ((1.0 - x) * (1.0 - x));
            let u2 = u * u;
            let v = branch_sqrt(c(1.0 - u2, 0.0));
            if v.norm() == 0.0 {
                return 0.0;
            }
            let (rs, rp) = fresnel_interface(ONE, eps_b, u).unwrap();
            let val = u / v * (2.0 * I * kd * v).exp() * (rs + (u2 - 1.0) * rp);
            val.re * du
        };
        let mut bps: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
        bps.push(1.0 - 1e-9);
        0.75 * quadrature::integrate(f, &bps, 1e-10, 0.0, 5_000_000).unwrap().value
    }

    #[test]
    fn split_domain_matches_single_domain_reference() {
        // `expected` from a 30-digit tanh-sinh evaluation of the unsplit integral
        for (eps_b, kd, expected) in [
            (c(4.0, 1.0), 0.5, 0.198_859_635_924_831_9),
            (c(10.0, 0.2), 0.2, 0.852_714_483_994_321_8),
            (c(-3.0, 2.0), 1.0, 0.456_469_343_284_871_8),
        ] {
            let k = OMEGA / crate::physcore::C_LIGHT;
            let d = kd / k;
            let stack = LayerStack::new(vec![Layer::bulk(MaterialModel::Vacuum)]).unwrap();
            // bypass material models: evaluate the split integral through the private pieces
            let _ = stack;
            let eps = [ONE, eps_b];
            let th = [f64::INFINITY];
            let prop = quadrature::integrate(
                |theta| {
                    let (u, v) = theta.sin_cos();
                    let r = stack_reflection(&eps, &th, u * u, c(v, 0.0), k).unwrap();
                    let z = 2.0 * I * kd * v;
                    let e = z.exp();
                    u * (e * r.s.one_plus + e * (v * v) * r.p.one_minus - expm1_complex(z) * (1.0 + v * v)).re
                },
                &[0.0, FRAC_PI_2],
                1e-10,
                0.0,
                1_000_000,
            )
            .unwrap();
            let evan = quadrature::integrate(
                |t| {
                    let r = stack_reflection(&eps, &th, 1.0 + t * t, c(0.0, t), k).unwrap();
                    (-2.0 * kd * t).exp() * (r.s.r.im - t * t * r.p.one_minus.im)
                },
                &[0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
                1e-10,
                0.0,
                1_000_000,
            )
            .unwrap();
            let split = 0.75 * (prop.value + evan.value) - 1.0;
            assert!((split - expected).abs() < 1e-9, "{split} vs {expected}");
            let reference = reference_g(eps_b, kd);
            // √(1 − u²) near u = 1 costs the reference about half its digits
            assert!((split - reference).abs() < 1e-6 * reference.abs(), "{split} vs {reference}");
            let _ = d;
        }
    }
}
