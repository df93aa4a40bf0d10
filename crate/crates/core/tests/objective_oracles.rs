use hollowfield::field::{init_theta, sigmoid};
use hollowfield::grid::{GridSpec, Occupancy};
use hollowfield::masks::{derive_masks, CellClass, DomainMasks};
use hollowfield::objective::{
    loss_center, mass_center, smoothed_density, soft_support, total_loss, ObjectiveParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct 27-neighbor loop.
fn smooth_oracle(theta: &[f64], masks: &DomainMasks) -> Vec<f64> {
    let spec = *masks.spec();
    let n = spec.resolution() as i64;
    let rho: Vec<f64> = theta.iter().map(|&t| 1.0 / (1.0 + (-t).exp())).collect();
    (0..spec.len())
        .map(|idx| match masks.class(idx) {
            CellClass::Exterior => 0.0,
            CellClass::Boundary => rho[idx],
            _ => {
                let [x, y, z] = spec.coords(idx).map(|v| v as i64);
                let mut s = 0.0;
                for dz in -1..=1 {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            let (a, b, c) = (x + dx, y + dy, z + dz);
                            if a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n {
                                continue;
                            }
                            let j = spec.index(a as usize, b as usize, c as usize);
                            if masks.class(j) != CellClass::Exterior {
                                s += rho[j];
                            }
                        }
                    }
                }
                s / 27.0
            }
        })
        .collect()
}

#[test]
fn mass_center_matches_direct_summation() {
    let spec = GridSpec::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let rho: Vec<f64> = (0..64).map(|_| rng.gen()).collect();
        let total: f64 = rho.iter().sum();
        let mut expected = [0.0; 3];
        for (i, r) in rho.iter().enumerate() {
            let [x, y, z] = spec.coords(i);
            for (a, v) in [x, y, z].into_iter().enumerate() {
                expected[a] += (-0.5 + (v as f64 + 0.5) / 4.0) * r;
            }
        }
        let c = mass_center(&rho, &spec).unwrap();
        for a in 0..3 {
            assert!((c[a] - expected[a] / total).abs() < 1e-12);
        }
    }
}

fn bottom_layer_masks(n: usize) -> DomainMasks {
    let spec = GridSpec::new(n).unwrap();
    let occ = Occupancy::from_fn(spec, |p| p[2] < 0.0).unwrap();
    derive_masks(&occ, 2).unwrap()
}

#[test]
fn center_loss_matches_weighted_sum() {
    let masks = bottom_layer_masks(6);
    let spec = *masks.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let rho_t: Vec<f64> = (0..spec.len()).map(|_| rng.gen()).collect();
        let c = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), 0.0];
        let support = soft_support(&rho_t, &masks, 10.0);
        let da = 1.0 / 36.0;
        let (mut num, mut den) = (0.0, 0.0);
        for y in 0..6 {
            for x in 0..6 {
                let w = sigmoid(10.0 * (rho_t[spec.index(x, y, 0)] - 0.5));
                let d = ((spec.axis_center(x) - c[0]).powi(2) + (spec.axis_center(y) - c[1]).powi(2)).sqrt();
                num += w * d * da;
                den += w * da;
            }
        }
        assert!((loss_center(&support, c) - num / (den + 1e-8)).abs() < 1e-12);
    }
}

#[test]
fn total_loss_matches_termwise_recomputation() {
    let spec = GridSpec::new(8).unwrap();
    let occ = Occupancy::from_fn(spec, |p| p[2] < 0.0).unwrap();
    let masks = derive_masks(&occ, 2).unwrap();
    let mut theta = init_theta(&masks, 8.0).unwrap().theta().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for idx in masks.trainable_indices() {
        theta[idx] = rng.gen_range(-5.0..5.0);
    }
    let rho_t = smooth_oracle(&theta, &masks);
    let reference = smoothed_density(&theta, &masks, true);
    for (a, b) in rho_t.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-15);
    }

    let (dv, da) = (1.0 / 512.0, 1.0 / 64.0);
    let mass: f64 = rho_t.iter().sum::<f64>() * dv;
    let mut c = [0.0; 3];
    for (i, r) in rho_t.iter().enumerate() {
        let p = spec.center_of(i);
        for a in 0..3 {
            c[a] += p[a] * r * dv / mass;
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for y in 0..8 {
        for x in 0..8 {
            let w = sigmoid(10.0 * (rho_t[spec.index(x, y, 0)] - 0.5));
            let d = ((spec.axis_center(x) - c[0]).powi(2) + (spec.axis_center(y) - c[1]).powi(2)).sqrt();
            num += w * d * da;
            den += w * da;
        }
    }
    let l_center = num / (den + 1e-8);
    let l_region = -den;
    let expected = l_center + l_region + c[2] + 100.0 * mass;

    let b = total_loss(&theta, &masks, &ObjectiveParams::default()).unwrap();
    assert!((b.l_total - expected).abs() < 1e-12, "{} vs {expected}", b.l_total);
    assert!((b.l_mass - mass).abs() < 1e-12);

    let doubled = total_loss(&theta, &masks, &ObjectiveParams { lambda_mass: 200.0, ..ObjectiveParams::default() }).unwrap();
    assert!((doubled.l_total - b.l_total - 100.0 * b.l_mass).abs() < 1e-12);
}

#[test]
fn sharp_soft_area_approaches_hard_area() {
    let masks = bottom_layer_masks(6);
    let spec = *masks.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let rho_t: Vec<f64> = (0..spec.len())
            .map(|_| loop {
                let r: f64 = rng.gen();
                if (r - 0.5).abs() > 1e-3 {
                    break r;
                }
            })
            .collect();
        let support = soft_support(&rho_t, &masks, 1e3);
        assert!((support.soft_area() - support.hard_area()).abs() <= spec.cell_area() / 2.0);
    }
}
