//! Density, smoothing, support region, losses and the analytic gradient of
//! the total objective with respect to the trainable logits.
//!
//! All reductions run sequentially in ascending cell order so that results do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::sigmoid;
use crate::grid::GridSpec;
use crate::masks::{CellClass, DomainMasks};

/// Added to the support-area denominator of the centering loss.
pub const DIV_GUARD: f64 = 1e-8;
/// Below this total mass the center of mass is undefined.
pub const MIN_MASS: f64 = 1e-12;

pub const DEFAULT_LAMBDA_MASS: f64 = 100.0;
pub const DEFAULT_SHARPNESS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub lambda_mass: f64,
    /// Slope `k` of the soft support membership `sigmoid(k * (rho~ - 0.5))`.
    pub sharpness: f64,
    /// 3x3x3 box smoothing on the optimization domain. Disabling it is only
    /// meant for ablation runs.
    pub smoothing: bool,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        Self { lambda_mass: DEFAULT_LAMBDA_MASS, sharpness: DEFAULT_SHARPNESS, smoothing: true }
    }
}

impl ObjectiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_mass >= 0.0 && self.lambda_mass.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda_mass must be finite and >= 0, got {}",
                self.lambda_mass
            )));
        }
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sharpness must be positive, got {}",
                self.sharpness
            )));
        }
        Ok(())
    }
}

pub fn density(theta: &[f64]) -> Vec<f64> {
    theta.par_iter().map(|&t| sigmoid(t)).collect()
}

/// Unnormalized 3x3x3 box sum with zero padding outside the grid.
///
/// The stencil is symmetric, so the same routine is its own adjoint.
pub(crate) fn box_sum(values: &[f64], spec: &GridSpec) -> Vec<f64> {
    let n = spec.resolution();
    let layer = n * n;

    let mut along_x = vec![0.0; values.len()];
    along_x.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
        let src = &values[row * n..(row + 1) * n];
        for x in 0..n {
            let mut s = src[x];
            if x > 0 {
                s += src[x - 1];
            }
            if x + 1 < n {
                s += src[x + 1];
            }
            out[x] = s;
        }
    });

    let mut along_y = vec![0.0; values.len()];
    along_y.par_chunks_mut(layer).enumerate().for_each(|(z, out)| {
        let src = &along_x[z * layer..(z + 1) * layer];
        for y in 0..n {
            for x in 0..n {
                let i = x + y * n;
                let mut s = src[i];
                if y > 0 {
                    s += src[i - n];
                }
                if y + 1 < n {
                    s += src[i + n];
                }
                out[i] = s;
            }
        }
    });

    let mut along_z = vec![0.0; values.len()];
    along_z.par_chunks_mut(layer).enumerate().for_each(|(z, out)| {
        for (i, o) in out.iter_mut().enumerate() {
            let idx = z * layer + i;
            let mut s = along_y[idx];
            if z > 0 {
                s += along_y[idx - layer];
            }
            if z + 1 < n {
                s += along_y[idx + layer];
            }
            *o = s;
        }
    });
    along_z
}

/// Smoothed density with the box kernel enabled.
pub fn smooth(rho: &[f64], masks: &DomainMasks) -> Vec<f64> {
    smooth_with(rho, masks, true)
}

/// Smoothed density `rho~`: equal to `rho` on the boundary shell, the 27-cell
/// box average on the optimization domain and zero elsewhere. Exterior cells
/// and cells beyond the grid enter the average as zero.
pub fn smooth_with(rho: &[f64], masks: &DomainMasks, enabled: bool) -> Vec<f64> {
    let classes = masks.classes();
    if !enabled {
        return rho
            .par_iter()
            .zip(classes.par_iter())
            .map(|(&r, c)| if c.carries_density() { r } else { 0.0 })
            .collect();
    }
    let contributing: Vec<f64> = rho
        .par_iter()
        .zip(classes.par_iter())
        .map(|(&r, c)| if c.carries_density() { r } else { 0.0 })
        .collect();
    let summed = box_sum(&contributing, masks.spec());
    rho.par_iter()
        .zip(summed.par_iter())
        .zip(classes.par_iter())
        .map(|((&r, &s), c)| match c {
            CellClass::Boundary => r,
            CellClass::Interior | CellClass::Basal => s / 27.0,
            CellClass::Exterior => 0.0,
        })
        .collect()
}

/// Ground-layer contact region.
///
/// Holds every bottom-layer cell that can carry density together with its
/// soft membership weight; hard members are the cells with `rho~ > 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportRegion {
    pub layer: usize,
    pub cells: Vec<usize>,
    pub points: Vec<[f64; 2]>,
    pub densities: Vec<f64>,
    pub weights: Vec<f64>,
    pub hard: Vec<bool>,
    pub cell_area: f64,
}

impl SupportRegion {
    pub fn soft_area(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.cell_area
    }

    pub fn hard_area(&self) -> f64 {
        self.hard.iter().filter(|&&h| h).count() as f64 * self.cell_area
    }

    pub fn hard_count(&self) -> usize {
        self.hard.iter().filter(|&&h| h).count()
    }

    pub fn hard_points(&self) -> Vec<[f64; 2]> {
        self.points.iter().zip(&self.hard).filter(|(_, &h)| h).map(|(p, _)| *p).collect()
    }

    /// Area centroid of the hard member set.
    pub fn centroid(&self) -> Option<[f64; 2]> {
        let pts = self.hard_points();
        if pts.is_empty() {
            return None;
        }
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        Some([sx / k, sy / k])
    }
}

/// Builds the support region without checking for emptiness.
pub fn soft_support(rho_t: &[f64], masks: &DomainMasks, sharpness: f64) -> SupportRegion {
    let spec = masks.spec();
    let n = spec.resolution();
    let z = masks.z_min();
    let mut region = SupportRegion {
        layer: z,
        cells: Vec::new(),
        points: Vec::new(),
        densities: Vec::new(),
        weights: Vec::new(),
        hard: Vec::new(),
        cell_area: spec.cell_area(),
    };
    for y in 0..n {
        for x in 0..n {
            let idx = spec.index(x, y, z);
            if !masks.class(idx).carries_density() {
                continue;
            }
            let r = rho_t[idx];
            region.cells.push(idx);
            region.points.push([spec.axis_center(x), spec.axis_center(y)]);
            region.densities.push(r);
            region.weights.push(sigmoid(sharpness * (r - 0.5)));
            region.hard.push(r > 0.5);
        }
    }
    region
}

/// Support region with the emptiness check applied.
pub fn support_region(rho_t: &[f64], masks: &DomainMasks, sharpness: f64) -> Result<SupportRegion> {
    if !(sharpness > 0.0) {
        return Err(Error::InvalidConfig("sharpness must be positive".into()));
    }
    let region = soft_support(rho_t, masks, sharpness);
    if region.hard_count() == 0 && region.weights.iter().sum::<f64>() < 1e-8 {
        return Err(Error::EmptySupport);
    }
    Ok(region)
}

/// Density-weighted center of mass over cell centers.
pub fn mass_center(rho_t: &[f64], spec: &GridSpec) -> Result<[f64; 3]> {
    let dv = spec.cell_volume();
    let mut mass = 0.0;
    let mut moment = [0.0; 3];
    for (idx, &r) in rho_t.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let p = spec.center_of(idx);
        let m = r * dv;
        mass += m;
        for a in 0..3 {
            moment[a] += p[a] * m;
        }
    }
    if !(mass > MIN_MASS) {
        return Err(Error::ZeroMass);
    }
    Ok([moment[0] / mass, moment[1] / mass, moment[2] / mass])
}

/// Mean planar distance from support cells to the projected center of mass,
/// weighted by soft membership.
pub fn loss_center(support: &SupportRegion, c: [f64; 3]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, &w) in support.points.iter().zip(&support.weights) {
        let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        num += w * d * support.cell_area;
        den += w * support.cell_area;
    }
    num / (den + DIV_GUARD)
}

pub fn loss_region(support: &SupportRegion) -> f64 {
    -support.soft_area()
}

pub fn loss_z(c: [f64; 3]) -> f64 {
    c[2]
}

pub fn loss_mass(rho_t: &[f64], spec: &GridSpec) -> f64 {
    rho_t.iter().sum::<f64>() * spec.cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_center: f64,
    pub l_region: f64,
    pub l_z: f64,
    pub l_phy: f64,
    pub l_mass: f64,
    pub l_total: f64,
    pub c: [f64; 3],
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        [self.l_center, self.l_region, self.l_z, self.l_mass, self.l_total]
            .iter()
            .chain(self.c.iter())
            .all(|v| v.is_finite())
    }
}

/// Intermediate quantities shared by the loss and its gradient.
struct Forward {
    rho: Vec<f64>,
    support: SupportRegion,
    mass: f64,
    c: [f64; 3],
    breakdown: LossBreakdown,
}

fn check_shape(theta: &[f64], masks: &DomainMasks) -> Result<()> {
    if theta.len() != masks.spec().len() {
        return Err(Error::SizeMismatch { expected: masks.spec().len(), actual: theta.len() });
    }
    Ok(())
}

fn forward(theta: &[f64], masks: &DomainMasks, params: &ObjectiveParams) -> Result<Forward> {
    check_shape(theta, masks)?;
    params.validate()?;
    let spec = masks.spec();
    let rho = density(theta);
    let rho_t = smooth_with(&rho, masks, params.smoothing);
    let support = soft_support(&rho_t, masks, params.sharpness);
    let c = mass_center(&rho_t, spec)?;
    let l_mass = loss_mass(&rho_t, spec);
    let l_center = loss_center(&support, c);
    let l_region = loss_region(&support);
    let l_z = loss_z(c);
    let l_phy = l_center + l_region + l_z;
    let breakdown = LossBreakdown {
        l_center,
        l_region,
        l_z,
        l_phy,
        l_mass,
        l_total: l_phy + params.lambda_mass * l_mass,
        c,
    };
    Ok(Forward { rho, support, mass: l_mass, c, breakdown })
}

/// `L_total = L_center + L_region + L_z + lambda_mass * L_mass`.
pub fn total_loss(theta: &[f64], masks: &DomainMasks, params: &ObjectiveParams) -> Result<LossBreakdown> {
    Ok(forward(theta, masks, params)?.breakdown)
}

/// Smoothed density for a logit field.
pub fn smoothed_density(theta: &[f64], masks: &DomainMasks, smoothing: bool) -> Vec<f64> {
    smooth_with(&density(theta), masks, smoothing)
}

#[derive(Debug, Clone)]
pub struct Gradient {
    pub breakdown: LossBreakdown,
    /// One entry per grid cell; zero outside the optimization domain.
    pub grad: Vec<f64>,
}

/// Loss and analytic gradient with respect to every trainable logit.
pub fn grad_total(theta: &[f64], masks: &DomainMasks, params: &ObjectiveParams) -> Result<Gradient> {
    let fwd = forward(theta, masks, params)?;
    let spec = masks.spec();
    let classes = masks.classes();
    let dv = spec.cell_volume();
    let c = fwd.c;
    let support = &fwd.support;
    let da = support.cell_area;

    // d L_center / d c_xy and the shared denominator.
    let den = support.soft_area() + DIV_GUARD;
    let mut g_cx = 0.0;
    let mut g_cy = 0.0;
    let mut dists = Vec::with_capacity(support.points.len());
    for (p, &w) in support.points.iter().zip(&support.weights) {
        let dx = c[0] - p[0];
        let dy = c[1] - p[1];
        let d = (dx * dx + dy * dy).sqrt();
        dists.push(d);
        if d > 0.0 {
            g_cx += w * da * dx / d;
            g_cy += w * da * dy / d;
        }
    }
    g_cx /= den;
    g_cy /= den;

    // Upstream gradient with respect to rho~: mass term plus the center of
    // mass chain for L_z and L_center.
    let scale = dv / fwd.mass;
    let lambda = params.lambda_mass;
    let mut g_tilde: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            if !classes[idx].is_trainable() {
                return 0.0;
            }
            let p = spec.center_of(idx);
            lambda * dv
                + scale * ((p[2] - c[2]) + g_cx * (p[0] - c[0]) + g_cy * (p[1] - c[1]))
        })
        .collect();

    // Soft-membership terms on the ground layer.
    let l_center = fwd.breakdown.l_center;
    for (s, &idx) in support.cells.iter().enumerate() {
        if !classes[idx].is_trainable() {
            continue;
        }
        let w = support.weights[s];
        let dw = params.sharpness * w * (1.0 - w);
        let d_center = da * (dists[s] - l_center) / den;
        g_tilde[idx] += (d_center - da) * dw;
    }

    // Back through smoothing, then through the sigmoid.
    let g_rho = if params.smoothing {
        let scaled: Vec<f64> = g_tilde.par_iter().map(|g| g / 27.0).collect();
        box_sum(&scaled, spec)
    } else {
        g_tilde
    };
    let rho = &fwd.rho;
    let grad = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            if classes[idx].is_trainable() {
                rho[idx] * (1.0 - rho[idx]) * g_rho[idx]
            } else {
                0.0
            }
        })
        .collect();

    Ok(Gradient { breakdown: fwd.breakdown, grad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Occupancy;
    use crate::masks::derive_masks;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn all_trainable_masks(n: usize) -> DomainMasks {
        let spec = GridSpec::new(n).unwrap();
        DomainMasks::from_classes(spec, {
            let mut v = vec![CellClass::Interior; spec.len()];
            v[0] = CellClass::Boundary;
            v
        })
        .unwrap()
    }

    #[test]
    fn density_closed_forms() {
        let r = density(&[0.0, 8.0, -8.0]);
        assert_eq!(r[0], 0.5);
        assert!(close(r[1], 0.999_664_649_869_533_6, 1e-15));
        assert!(close(r[2], 3.353_501_304_664_781e-4, 1e-17));
    }

    #[test]
    fn smoothing_constant_field_is_preserved() {
        let masks = all_trainable_masks(6);
        let spec = *masks.spec();
        let rho = vec![0.3; spec.len()];
        let rt = smooth(&rho, &masks);
        let idx = spec.index(2, 3, 2);
        assert!(close(rt[idx], 0.3, 1e-15));
    }

    #[test]
    fn smoothing_single_spike() {
        let masks = all_trainable_masks(6);
        let spec = *masks.spec();
        let mut rho = vec![0.0; spec.len()];
        let idx = spec.index(3, 3, 3);
        rho[idx] = 1.0;
        let rt = smooth(&rho, &masks);
        assert!(close(rt[idx], 1.0 / 27.0, 1e-16));
        assert!(close(rt[spec.index(4, 4, 4)], 1.0 / 27.0, 1e-16));
        assert_eq!(rt[spec.index(5, 5, 5)], 0.0);
    }

    #[test]
    fn boundary_bypasses_kernel() {
        let spec = GridSpec::new(6).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p.iter().all(|c| c.abs() < 0.2)).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let b = (0..spec.len()).find(|&i| masks.class(i) == CellClass::Boundary).unwrap();
        let mut rho = vec![0.0; spec.len()];
        rho[b] = 0.9;
        let rt = smooth(&rho, &masks);
        assert_eq!(rt[b], 0.9);
    }

    #[test]
    fn exterior_cells_are_zero() {
        let spec = GridSpec::new(8).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p.iter().all(|c| c.abs() < 0.2)).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let rho = vec![0.7; spec.len()];
        for enabled in [true, false] {
            let rt = smooth_with(&rho, &masks, enabled);
            for i in 0..spec.len() {
                if masks.class(i) == CellClass::Exterior {
                    assert_eq!(rt[i], 0.0);
                }
            }
        }
    }

    fn bottom_layer_masks(n: usize) -> DomainMasks {
        // Full bottom layer occupied; every cell is boundary.
        let spec = GridSpec::new(n).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p[2] < -0.5 + 1.0 / n as f64).unwrap();
        derive_masks(&occ, 1).unwrap()
    }

    #[test]
    fn full_bottom_layer_support_area() {
        let masks = bottom_layer_masks(4);
        let spec = *masks.spec();
        let rt = vec![1.0; spec.len()];
        let s = support_region(&rt, &masks, 10.0).unwrap();
        assert_eq!(s.hard_count(), 16);
        assert!(close(s.hard_area(), 16.0 * spec.cell_area(), 1e-15));
        assert!(close(s.centroid().unwrap()[0], 0.0, 1e-15));
    }

    #[test]
    fn half_density_is_not_a_hard_member() {
        let masks = bottom_layer_masks(4);
        let spec = *masks.spec();
        let mut rt = vec![0.0; spec.len()];
        rt[0] = 0.5;
        let s = soft_support(&rt, &masks, 10.0);
        assert_eq!(s.weights[0], 0.5);
        assert!(!s.hard[0]);
    }

    #[test]
    fn soft_weights_closed_form() {
        let masks = bottom_layer_masks(4);
        let spec = *masks.spec();
        let mut rt = vec![0.0; spec.len()];
        rt[0] = 0.9;
        rt[1] = 0.1;
        let s = soft_support(&rt, &masks, 10.0);
        assert!(close(s.weights[0], 0.982_013_790_037_908_5, 1e-12));
        assert!(close(s.weights[1], 0.017_986_209_962_091_56, 1e-12));
    }

    #[test]
    fn empty_support_is_reported() {
        let masks = bottom_layer_masks(4);
        let spec = *masks.spec();
        let rt = vec![0.0; spec.len()];
        assert!(matches!(support_region(&rt, &masks, 1e3), Err(Error::EmptySupport)));
    }

    #[test]
    fn mass_center_cases() {
        let spec = GridSpec::new(4).unwrap();
        let c = mass_center(&vec![1.0; spec.len()], &spec).unwrap();
        for v in c {
            assert!(v.abs() < 1e-15);
        }
        let spec = GridSpec::new(10).unwrap();
        let mut rt = vec![0.0; spec.len()];
        rt[spec.index(5, 5, 5)] = 1.0; // z = 0.05
        rt[spec.index(5, 5, 7)] = 3.0; // z = 0.25
        let c = mass_center(&rt, &spec).unwrap();
        assert!(close(c[2], (0.05 + 3.0 * 0.25) / 4.0, 1e-15));
        assert!(matches!(mass_center(&vec![0.0; spec.len()], &spec), Err(Error::ZeroMass)));
    }

    #[test]
    fn height_loss_top_and_bottom() {
        let spec = GridSpec::new(4).unwrap();
        let top: Vec<f64> = (0..spec.len()).map(|i| (spec.coords(i)[2] == 3) as u8 as f64).collect();
        let bottom: Vec<f64> = (0..spec.len()).map(|i| (spec.coords(i)[2] == 0) as u8 as f64).collect();
        assert!(close(loss_z(mass_center(&top, &spec).unwrap()), 0.375, 1e-15));
        assert!(close(loss_z(mass_center(&bottom, &spec).unwrap()), -0.375, 1e-15));
    }

    fn support_with(points: Vec<[f64; 2]>, weights: Vec<f64>, cell_area: f64) -> SupportRegion {
        let k = points.len();
        SupportRegion {
            layer: 0,
            cells: (0..k).collect(),
            densities: vec![1.0; k],
            hard: vec![true; k],
            points,
            weights,
            cell_area,
        }
    }

    #[test]
    fn center_loss_cases() {
        let s = support_with(vec![[0.1, 0.2]], vec![1.0], 0.01);
        assert_eq!(loss_center(&s, [0.1, 0.2, 0.0]), 0.0);
        let s = support_with(vec![[-0.3, 0.0], [0.3, 0.0]], vec![0.7, 0.7], 0.01);
        let l = loss_center(&s, [0.0, 0.0, 0.2]);
        assert!(close(l, 0.3 * 0.014 / (0.014 + DIV_GUARD), 1e-15));
        assert!(close(l, 0.3, 1e-6));
    }

    #[test]
    fn region_loss_cases() {
        let s = support_with(vec![[0.0, 0.0]; 16], vec![1.0; 16], 1.0 / 16.0);
        assert_eq!(loss_region(&s), -1.0);
        let s = support_with(vec![], vec![], 1.0 / 16.0);
        assert_eq!(loss_region(&s), 0.0);
        let s = support_with(vec![[0.0, 0.0]; 2], vec![0.25, 0.75], 1.0 / 16.0);
        assert_eq!(loss_region(&s), -0.0625);
    }

    #[test]
    fn mass_loss_cases() {
        let spec = GridSpec::new(4).unwrap();
        assert_eq!(loss_mass(&vec![1.0; 64], &spec), 1.0);
        assert_eq!(loss_mass(&vec![0.0; 64], &spec), 0.0);
        let half: Vec<f64> = (0..64).map(|i| (i < 32) as u8 as f64).collect();
        assert_eq!(loss_mass(&half, &spec), 0.5);
    }

    #[test]
    fn region_loss_strictly_monotone_in_bottom_density() {
        let masks = bottom_layer_masks(4);
        let spec = *masks.spec();
        let mut rt = vec![0.3; spec.len()];
        let before = loss_region(&soft_support(&rt, &masks, 10.0));
        rt[5] += 0.1;
        let after = loss_region(&soft_support(&rt, &masks, 10.0));
        assert!(after < before);
    }

    #[test]
    fn zero_lambda_total_equals_physical() {
        let spec = GridSpec::new(8).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p[2] < 0.0).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let theta: Vec<f64> = (0..spec.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let params = ObjectiveParams { lambda_mass: 0.0, ..Default::default() };
        let b = total_loss(&theta, &masks, &params).unwrap();
        assert_eq!(b.l_total, b.l_phy);
        assert!(b.l_region <= 0.0);
        assert!(b.l_mass >= 0.0);
    }

    #[test]
    fn frozen_cells_have_zero_gradient() {
        let spec = GridSpec::new(8).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p[2] < 0.0 && p[0].abs() < 0.3).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let theta: Vec<f64> = (0..spec.len()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let g = grad_total(&theta, &masks, &ObjectiveParams::default()).unwrap();
        for i in 0..spec.len() {
            if !masks.class(i).is_trainable() {
                assert_eq!(g.grad[i], 0.0);
            }
        }
    }

    #[test]
    fn mass_only_gradient_matches_hand_chain_rule() {
        let spec = GridSpec::new(8).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p[2] < 0.2 && p[0].abs() < 0.3 && p[1].abs() < 0.3).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let field = crate::field::init_theta(&masks, 8.0).unwrap();
        let with = |lambda| {
            let p = ObjectiveParams { lambda_mass: lambda, ..Default::default() };
            grad_total(field.theta(), &masks, &p).unwrap().grad
        };
        let g100 = with(100.0);
        let g0 = with(0.0);
        let rho = sigmoid(-8.0);
        let n = spec.resolution() as i64;
        for idx in masks.trainable_indices() {
            let [x, y, z] = spec.coords(idx).map(|v| v as i64);
            let mut count = 0;
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (a, b, c) = (x + dx, y + dy, z + dz);
                        if [a, b, c].iter().all(|&v| v >= 0 && v < n)
                            && masks.class(spec.index(a as usize, b as usize, c as usize)).is_trainable()
                        {
                            count += 1;
                        }
                    }
                }
            }
            let expected = 100.0 * spec.cell_volume() * (count as f64 / 27.0) * rho * (1.0 - rho);
            let got = g100[idx] - g0[idx];
            assert!(expected > 0.0);
            assert!((got - expected).abs() <= 1e-12 * expected.abs() + 1e-20, "{got} vs {expected}");
        }
    }
}
