use hollowfield::field::init_theta;
use hollowfield::grid::{GridSpec, Occupancy};
use hollowfield::masks::{derive_masks, CellClass};
use hollowfield::mesh::icosphere;
use hollowfield::metrics::chamfer_distance;
use hollowfield::objective::{smoothed_density, soft_support, total_loss, ObjectiveParams};
use hollowfield::optimizer::{optimize, OptimConfig};
use proptest::prelude::*;

fn occupancy_strategy() -> impl Strategy<Value = Occupancy> {
    (6usize..10, any::<u64>()).prop_filter_map("non-empty", |(n, seed)| {
        use rand::{Rng, SeedableRng};
        let spec = GridSpec::new(n).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let fill = rng.gen_range(0.2..0.9);
        let cells = (0..spec.len()).map(|_| rng.gen_bool(fill)).collect();
        Occupancy::new(spec, cells).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn masks_partition_the_domain(occ in occupancy_strategy(), eps in 1usize..4) {
        let masks = derive_masks(&occ, eps).unwrap();
        let spec = *occ.spec();
        for idx in 0..spec.len() {
            let class = masks.class(idx);
            prop_assert_eq!(class.in_object(), occ.get(idx));
            if class == CellClass::Basal {
                let z = spec.coords(idx)[2];
                prop_assert!(z >= occ.z_min() && z <= occ.z_min() + eps);
            }
        }
        let counts: usize = [CellClass::Exterior, CellClass::Boundary, CellClass::Interior, CellClass::Basal]
            .iter()
            .map(|&c| masks.count(c))
            .sum();
        prop_assert_eq!(counts, spec.len());
    }

    #[test]
    fn boundary_logits_never_move(occ in occupancy_strategy(), lambda in 0.0f64..200.0, smoothing in any::<bool>()) {
        let masks = derive_masks(&occ, 2).unwrap();
        let field = init_theta(&masks, 8.0).unwrap();
        let config = OptimConfig { steps: 15, lambda_mass: lambda, smoothing, ..OptimConfig::default() };
        let (out, _) = optimize(&field, &masks, &config).unwrap();
        for idx in 0..occ.spec().len() {
            if !masks.class(idx).is_trainable() {
                prop_assert_eq!(out.theta()[idx].to_bits(), field.theta()[idx].to_bits());
            }
        }
    }

    #[test]
    fn loss_identities(occ in occupancy_strategy(), seed in any::<u64>(), lambda in 0.0f64..500.0) {
        use rand::{Rng, SeedableRng};
        let masks = derive_masks(&occ, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut theta = init_theta(&masks, 8.0).unwrap().theta().to_vec();
        for idx in masks.trainable_indices() {
            theta[idx] = rng.gen_range(-4.0..4.0);
        }
        let params = ObjectiveParams { lambda_mass: lambda, ..ObjectiveParams::default() };
        let b = total_loss(&theta, &masks, &params).unwrap();
        prop_assert_eq!(b.l_phy, b.l_center + b.l_region + b.l_z);
        prop_assert_eq!(b.l_total, b.l_phy + lambda * b.l_mass);
        prop_assert!(b.l_mass >= 0.0);
        prop_assert!(b.l_region <= 0.0);

        let rho_t = smoothed_density(&theta, &masks, true);
        let support = soft_support(&rho_t, &masks, params.sharpness);
        for (w, h) in support.weights.iter().zip(&support.hard) {
            prop_assert_eq!(*h, *w > 0.5);
        }
        for idx in 0..rho_t.len() {
            if masks.class(idx) == CellClass::Exterior {
                prop_assert_eq!(rho_t[idx], 0.0);
            }
        }
    }

    #[test]
    fn inversion_is_an_involution(subdiv in 0usize..3, r in 0.05f64..0.5) {
        let mesh = icosphere([0.0; 3], r, subdiv);
        let inv = mesh.inverted();
        prop_assert_eq!(&inv.inverted().triangles, &mesh.triangles);
        prop_assert!((inv.signed_volume() + mesh.signed_volume()).abs() < 1e-15);
    }

    #[test]
    fn chamfer_is_symmetric(
        a in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..60),
        b in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..60),
    ) {
        prop_assert_eq!(chamfer_distance(&a, &b).unwrap(), chamfer_distance(&b, &a).unwrap());
        prop_assert_eq!(chamfer_distance(&a, &a).unwrap(), 0.0);
    }
}
