//! Patch-potential noise above a gapless grounded plane.
//!
//! Each square patch of the chip surface is an independent voltage
//! fluctuator. A patch of area A centred at offset (Δa, Δb) from the point
//! below the ion, at ion height h, produces the axial field kernel
//! K = 3·h·Δa·A / (2π·R⁵), R² = Δa² + Δb² + h², which is the axial
//! derivative of the Dirichlet potential Φ = (h/2π)∫ V/R³ dA. The noise of a
//! region is proportional to its weight times Σ K².

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

/// Axis-aligned rectangle in the chip plane, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Self { x_min, x_max, y_min, y_max };
        if !(x_max > x_min && y_max > y_min) || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!("degenerate rectangle {r:?}")));
        }
        Ok(r)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x_min: self.x_min.max(other.x_min),
            x_max: self.x_max.min(other.x_max),
            y_min: self.y_min.max(other.y_min),
            y_max: self.y_max.min(other.y_max),
        };
        (r.x_max > r.x_min && r.y_max > r.y_min).then_some(r)
    }
}

/// A rectangle of surface with fluctuation weight f. Regions sharing a
/// label form one material group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRegion {
    pub label: String,
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonPose {
    /// Position in the chip plane directly below the ion.
    pub xy: [f64; 2],
    pub height: f64,
    /// Unit vector of the axial direction in the chip plane.
    pub axial: [f64; 2],
}

impl IonPose {
    pub fn new(xy: [f64; 2], height: f64, axial: [f64; 2]) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::invalid(format!("ion height must be positive, got {height}")));
        }
        let norm = axial[0].hypot(axial[1]);
        if !((norm - 1.0).abs() < 1e-9) {
            return Err(Error::invalid(format!("axial direction must be a unit vector, |a| = {norm}")));
        }
        Ok(Self { xy, height, axial })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchScene {
    pub regions: Vec<PlaneRegion>,
    pub ion: IonPose,
    /// Label of the group whose weight is scaled by the ratio passed to [`zeta`].
    pub target: String,
}

impl PatchScene {
    pub fn new(regions: Vec<PlaneRegion>, ion: IonPose, target: impl Into<String>) -> Result<Self> {
        let target = target.into();
        for r in &regions {
            if !(r.weight >= 0.0) {
                return Err(Error::invalid(format!("region `{}` has negative weight", r.label)));
            }
        }
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                if a.rect.intersect(&b.rect).is_some() {
                    return Err(Error::invalid(format!("regions `{}` and `{}` overlap", a.label, b.label)));
                }
            }
        }
        if !regions.iter().any(|r| r.label == target) {
            return Err(Error::invalid(format!("no region labelled `{target}`")));
        }
        if regions.iter().all(|r| r.label == target) {
            return Err(Error::invalid("scene needs at least one region outside the target group"));
        }
        Ok(Self { regions, ion, target })
    }

    /// A `window` of one material centred in a square `chip` of another,
    /// with the remainder split into four disjoint rectangles.
    pub fn window_in_chip(
        window_label: &str,
        window: Rect,
        chip_label: &str,
        chip: Rect,
        ion: IonPose,
    ) -> Result<Self> {
        let mut regions = vec![PlaneRegion { label: window_label.into(), rect: window, weight: 1.0 }];
        let pieces = [
            (chip.x_min, window.x_min, chip.y_min, chip.y_max),
            (window.x_max, chip.x_max, chip.y_min, chip.y_max),
            (window.x_min, window.x_max, chip.y_min, window.y_min),
            (window.x_min, window.x_max, window.y_max, chip.y_max),
        ];
        for (x0, x1, y0, y1) in pieces {
            if x1 > x0 && y1 > y0 {
                regions.push(PlaneRegion { label: chip_label.into(), rect: Rect::new(x0, x1, y0, y1)?, weight: 1.0 });
            }
        }
        Self::new(regions, ion, window_label)
    }

    /// The reference chip: a 740 × 580 µm² exposed YBCO window centred below
    /// the ion in a 10 × 10 mm² gold chip, axial direction along the 740 µm
    /// side, ion height 225 µm.
    pub fn reference_chip() -> Self {
        let ion = IonPose::new([0.0, 0.0], 225e-6, [1.0, 0.0]).expect("static pose");
        Self::window_in_chip(
            "YBCO",
            Rect::new(-370e-6, 370e-6, -290e-6, 290e-6).expect("static"),
            "Au",
            Rect::new(-5e-3, 5e-3, -5e-3, 5e-3).expect("static"),
            ion,
        )
        .expect("static scene")
    }
}

/// ∂Φ/∂a at the ion for a patch at unit potential: 3·h·Δa·A/(2π·R⁵).
pub fn axial_patch_kernel(patch_center: [f64; 2], patch_area: f64, ion: &IonPose) -> f64 {
    let dx = patch_center[0] - ion.xy[0];
    let dy = patch_center[1] - ion.xy[1];
    let da = dx * ion.axial[0] + dy * ion.axial[1];
    let h = ion.height;
    let r2 = dx * dx + dy * dy + h * h;
    3.0 * h * da * patch_area / (2.0 * PI * r2 * r2 * r2.sqrt())
}

/// Squared kernel density k² with K = k·A.
fn kernel_density_sq(x: f64, y: f64, ion: &IonPose) -> f64 {
    let k = axial_patch_kernel([x, y], 1.0, ion);
    k * k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SumMode {
    /// Direct sum over every patch.
    Exact,
    /// Direct sum within `near_half_width` of the ion, p²·∫k² dA beyond.
    Hierarchical { near_half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    pub patch_size: f64,
    pub mode: SumMode,
    /// Maximum number of directly summed patches.
    pub patch_budget: u64,
}

impl Default for PatchOptions {
    fn default() -> Self {
        Self { patch_size: 1e-6, mode: SumMode::Hierarchical { near_half_width: 1e-3 }, patch_budget: 120_000_000 }
    }
}

/// Number of tiles of width `p` covering `[lo, hi]` from `lo`, with the last
/// one possibly partial.
fn tile_count(lo: f64, hi: f64, p: f64) -> u64 {
    let n = ((hi - lo) / p).ceil();
    // guard against 1 ulp overshoot producing an empty sliver tile
    let n = if lo + (n - 1.0) * p >= hi { n - 1.0 } else { n };
    n.max(1.0) as u64
}

/// Tile index range `[i0, i1)` along one axis of a grid anchored at `lo`
/// covering `[a, b]` within the region.
fn tile_span(lo: f64, p: f64, n: u64, a: f64, b: f64) -> (u64, u64) {
    let i0 = (((a - lo) / p).floor().max(0.0) as u64).min(n);
    let i1 = (((b - lo) / p).ceil().max(0.0) as u64).min(n);
    (i0, i1)
}

fn tile_edges(lo: f64, hi: f64, p: f64, i: u64) -> (f64, f64) {
    let a = lo + i as f64 * p;
    let b = (lo + (i + 1) as f64 * p).min(hi);
    (a, b)
}

/// Σ K² over tiles `[ix0, ix1) × [iy0, iy1)` of the region's grid. Rows are
/// summed in parallel and reduced in index order, so the result does not
/// depend on the thread count.
fn direct_sum(rect: &Rect, p: f64, ion: &IonPose, ix: (u64, u64), iy: (u64, u64)) -> f64 {
    let nx = tile_count(rect.x_min, rect.x_max, p);
    let ny = tile_count(rect.y_min, rect.y_max, p);
    let rows: Vec<f64> = (iy.0..iy.1)
        .into_par_iter()
        .map(|j| {
            let (y0, y1) = tile_edges(rect.y_min, rect.y_max, p, j);
            debug_assert!(j < ny);
            let yc = 0.5 * (y0 + y1);
            let mut acc = 0.0;
            for i in ix.0..ix.1 {
                debug_assert!(i < nx);
                let (x0, x1) = tile_edges(rect.x_min, rect.x_max, p, i);
                let k = axial_patch_kernel([0.5 * (x0 + x1), yc], (x1 - x0) * (y1 - y0), ion);
                acc += k * k;
            }
            acc
        })
        .collect();
    pairwise_sum(&rows)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Breakpoints for integrating across `[lo, hi]` with a peak near `c`:
/// geometric spacing in distance from `c` at scale `h`.
fn peaked_breakpoints(lo: f64, hi: f64, c: f64, h: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    if c > lo && c < hi {
        pts.push(c);
    }
    let mut s = 0.25 * h;
    while s < (hi - lo) + (c - lo).abs() + (hi - c).abs() {
        for x in [c - s, c + s] {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
        s *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// ∫∫_rect k² dA by nested adaptive quadrature.
pub fn kernel_sq_integral(rect: &Rect, ion: &IonPose) -> Result<f64> {
    let h = ion.height;
    let ybp = peaked_breakpoints(rect.y_min, rect.y_max, ion.xy[1], h);
    let xbp = peaked_breakpoints(rect.x_min, rect.x_max, ion.xy[0], h);
    let mut failure = None;
    let outer = quadrature::integrate(
        |x| match quadrature::integrate(|y| kernel_density_sq(x, y, ion), &ybp, 1e-11, 0.0, 200_000) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &xbp,
        1e-10,
        0.0,
        200_000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Σ K² over the tiling of `region` by squares of side `patch_size`
/// anchored at its (x_min, y_min) corner.
pub fn region_noise_integral(region: &PlaneRegion, ion: &IonPose, opts: &PatchOptions) -> Result<f64> {
    let p = opts.patch_size;
    if !(p > 0.0) {
        return Err(Error::domain(format!("patch size must be positive, got {p}")));
    }
    if region.weight == 0.0 {
        return Ok(0.0);
    }
    let rect = &region.rect;
    let nx = tile_count(rect.x_min, rect.x_max, p);
    let ny = tile_count(rect.y_min, rect.y_max, p);
    match opts.mode {
        SumMode::Exact => {
            let patches = nx.saturating_mul(ny);
            if patches > opts.patch_budget {
                return Err(Error::PatchBudget { patches, budget: opts.patch_budget });
            }
            Ok(direct_sum(rect, p, ion, (0, nx), (0, ny)))
        }
        SumMode::Hierarchical { near_half_width } => {
            let w = near_half_width;
            let [cx, cy] = ion.xy;
            let ix = tile_span(rect.x_min, p, nx, cx - w, cx + w);
            let iy = tile_span(rect.y_min, p, ny, cy - w, cy + w);
            if ix.0 >= ix.1 || iy.0 >= iy.1 {
                return Ok(p * p * kernel_sq_integral(rect, ion)?);
            }
            let patches = (ix.1 - ix.0).saturating_mul(iy.1 - iy.0);
            if patches > opts.patch_budget {
                return Err(Error::PatchBudget { patches, budget: opts.patch_budget });
            }
            let near = direct_sum(rect, p, ion, ix, iy);
            // snapped near box in physical coordinates
            let bx0 = tile_edges(rect.x_min, rect.x_max, p, ix.0).0;
            let bx1 = tile_edges(rect.x_min, rect.x_max, p, ix.1 - 1).1;
            let by0 = tile_edges(rect.y_min, rect.y_max, p, iy.0).0;
            let by1 = tile_edges(rect.y_min, rect.y_max, p, iy.1 - 1).1;
            let far = [
                (rect.x_min, bx0, rect.y_min, rect.y_max),
                (bx1, rect.x_max, rect.y_min, rect.y_max),
                (bx0, bx1, rect.y_min, by0),
                (bx0, bx1, by1, rect.y_max),
            ];
            let mut far_sum = 0.0;
            for (x0, x1, y0, y1) in far {
                if x1 > x0 && y1 > y0 {
                    far_sum += kernel_sq_integral(&Rect { x_min: x0, x_max: x1, y_min: y0, y_max: y1 }, ion)?;
                }
            }
            Ok(near + p * p * far_sum)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionIntegral {
    pub label: String,
    pub weight: f64,
    pub kernel_sq_sum: f64,
}

/// Per-region Σ K² of a scene; ζ for any weight ratio follows in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneIntegrals {
    pub target: String,
    pub regions: Vec<RegionIntegral>,
    pub patch_size: f64,
}

impl SceneIntegrals {
    /// (Σ w·I over the target group, Σ w·I over the rest).
    fn split(&self) -> (f64, f64) {
        let mut t = 0.0;
        let mut rest = 0.0;
        for r in &self.regions {
            if r.label == self.target {
                t += r.weight * r.kernel_sq_sum;
            } else {
                rest += r.weight * r.kernel_sq_sum;
            }
        }
        (t, rest)
    }

    pub fn zeta(&self, f_ratio: f64) -> Result<ZetaResult> {
        if !(f_ratio >= 0.0) {
            return Err(Error::domain(format!("weight ratio must be non-negative, got {f_ratio}")));
        }
        let (t, rest) = self.split();
        let num = f_ratio * t;
        let den = num + rest;
        if !(den > 0.0) {
            return Err(Error::invalid("all region integrals vanish"));
        }
        Ok(ZetaResult { zeta: num / den, region_integrals: self.regions.clone(), patch_size_used: self.patch_size })
    }

    /// Weight ratio giving noise fraction `target_zeta`.
    pub fn zeta_inverse(&self, target_zeta: f64) -> Result<f64> {
        if !(target_zeta > 0.0 && target_zeta < 1.0) {
            return Err(Error::domain(format!("target ζ must lie in (0, 1), got {target_zeta}")));
        }
        let (t, rest) = self.split();
        if !(t > 0.0 && rest > 0.0) {
            return Err(Error::invalid("ζ inverse needs non-vanishing target and background integrals"));
        }
        Ok(target_zeta / (1.0 - target_zeta) * rest / t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub zeta: f64,
    pub region_integrals: Vec<RegionIntegral>,
    pub patch_size_used: f64,
}

pub fn scene_integrals(scene: &PatchScene, opts: &PatchOptions) -> Result<SceneIntegrals> {
    let regions = scene
        .regions
        .iter()
        .map(|r| {
            Ok(RegionIntegral {
                label: r.label.clone(),
                weight: r.weight,
                kernel_sq_sum: region_noise_integral(r, &scene.ion, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SceneIntegrals { target: scene.target.clone(), regions, patch_size: opts.patch_size })
}

/// Noise fraction of the target group with its weight scaled by `f_ratio`.
pub fn zeta(scene: &PatchScene, f_ratio: f64, opts: &PatchOptions) -> Result<ZetaResult> {
    scene_integrals(scene, opts)?.zeta(f_ratio)
}

pub fn zeta_inverse(scene: &PatchScene, target_zeta: f64, opts: &PatchOptions) -> Result<f64> {
    scene_integrals(scene, opts)?.zeta_inverse(target_zeta)
}
