//! The parameter field `theta` and its initialization.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::masks::{CellClass, DomainMasks};

pub const DEFAULT_THETA_SAT: f64 = 8.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-cell logits. Only interior and basal cells are trainable; boundary
/// cells stay at `+theta_sat` for the whole run. Exterior cells hold
/// `-theta_sat` as a placeholder, their smoothed density is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    spec: GridSpec,
    theta: Vec<f64>,
    theta_sat: f64,
}

impl DensityField {
    pub fn new(spec: GridSpec, theta: Vec<f64>, theta_sat: f64) -> Result<Self> {
        if theta.len() != spec.len() {
            return Err(Error::SizeMismatch { expected: spec.len(), actual: theta.len() });
        }
        Ok(Self { spec, theta, theta_sat })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn theta_sat(&self) -> f64 {
        self.theta_sat
    }

    /// `rho = sigmoid(theta)` for every cell.
    pub fn density(&self) -> Vec<f64> {
        crate::objective::density(&self.theta)
    }
}

/// Initializes the field so that the surface shell is solid and everything
/// else starts empty.
pub fn init_theta(masks: &DomainMasks, theta_sat: f64) -> Result<DensityField> {
    if !(theta_sat > 0.0 && theta_sat.is_finite()) {
        return Err(Error::InvalidConfig(format!("theta_sat must be positive, got {theta_sat}")));
    }
    let theta = masks
        .classes()
        .iter()
        .map(|c| match c {
            CellClass::Boundary => theta_sat,
            _ => -theta_sat,
        })
        .collect();
    DensityField::new(*masks.spec(), theta, theta_sat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Occupancy;
    use crate::masks::derive_masks;

    #[test]
    fn init_values() {
        let spec = GridSpec::new(8).unwrap();
        let occ = Occupancy::from_fn(spec, |p| p.iter().all(|c| c.abs() < 0.25)).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        let f = init_theta(&masks, 8.0).unwrap();
        let rho = f.density();
        for i in 0..spec.len() {
            match masks.class(i) {
                CellClass::Boundary => {
                    assert_eq!(f.theta()[i], 8.0);
                    assert!((rho[i] - 0.999_664_649).abs() < 1e-8);
                }
                _ => {
                    assert_eq!(f.theta()[i], -8.0);
                    assert!((rho[i] - 3.353_501_3e-4).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn non_positive_saturation_rejected() {
        let spec = GridSpec::new(4).unwrap();
        let occ = Occupancy::new(spec, vec![true; 64]).unwrap();
        let masks = derive_masks(&occ, 2).unwrap();
        assert!(init_theta(&masks, 0.0).is_err());
        assert!(init_theta(&masks, -1.0).is_err());
    }
}
