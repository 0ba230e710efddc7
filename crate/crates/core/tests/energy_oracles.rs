use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tphase::coefficients::{gamma1, gamma2, gamma2_jet, interp3, CoefficientMode};
use tphase::energy::{
    change_of_variables, energy_degenerate, energy_matching, energy_nondegenerate, pin_cross_weights,
    potential_forms_discrepancy, PotentialMode, TripleWell,
};
use tphase::experiments::{labels_to_concentrations, periodic_distance, random_label_state, smooth_random_field};
use tphase::grid::{Grid2D, ScalarField, Spectral};
use tphase::params::{derive_capillary, PotentialParams, SurfaceTensions};
use tphase::scalar::tension_weight;

const K: f64 = 1.060_660_171_779_821_2; // 3 / (2 sqrt 2)

fn strip(nx: usize) -> Grid2D<f64> {
    Grid2D::new(nx, 8, 1.0, 0.25).unwrap()
}

/// Two interfaces at x = 1/4 and x = 3/4 with profile `tanh(s / w)`.
fn interface_pair(g: Grid2D<f64>, w: f64) -> ScalarField<f64> {
    ScalarField::from_fn(g, |x, _| (periodic_distance(x - 0.25, 1.0) / w).tanh())
}

#[test]
fn weight_constant() {
    assert!((tension_weight::<f64>() - K).abs() < 1e-15);
}

#[test]
fn binary_label_energy_is_the_tension() {
    let eps = 0.02;
    let g = strip(512);
    let sp = Spectral::new(g);
    let w = std::f64::consts::SQRT_2 * eps;
    let phi = interface_pair(g, w);
    let psi = ScalarField::constant(g, 1.0);
    for sigma12 in [0.5, 1.0, 3.0] {
        let sigmas = SurfaceTensions::new(sigma12, 1.0, 1.0);
        for mode in [CoefficientMode::consistent(3.0 + eps), CoefficientMode::inconsistent()] {
            let e = energy_degenerate(&sp, &phi, &psi, &sigmas, &mode, eps).unwrap();
            // Independent quadrature of the analytic profile: gamma1(1) = K sigma12.
            let quad: f64 = (0..g.nx())
                .map(|i| {
                    let s = periodic_distance(g.x(i) - 0.25, 1.0);
                    let t = (s / w).tanh();
                    let slope = (1.0 - t * t) / w;
                    K * sigma12 * (0.5 * eps * slope * slope + 0.25 * (t * t - 1.0).powi(2) / eps)
                })
                .sum::<f64>()
                * g.hx()
                * g.ly();
            assert!((e.total - quad).abs() < 1e-8 * quad, "{} vs {quad}", e.total);
            let per_interface = e.total / (2.0 * g.ly());
            assert!((per_interface - sigma12).abs() < 0.02 * sigma12, "{per_interface}");
            // Equipartition at equilibrium.
            assert!((e.gradient - e.potential).abs() < 1e-3 * e.total);
        }
    }
}

#[test]
fn binary_concentration_energy_is_the_tension() {
    let eps = 0.02;
    let g = strip(512);
    let sp = Spectral::new(g);
    let sigmas = SurfaceTensions::new(1.5_f64, 1.0, 1.0);
    let c = interface_pair(g, 0.5 * eps).map(|p| 0.5 * (1.0 + p));
    let d = c.map(|v| 1.0 - v);
    for mode in [
        PotentialMode::Natural,
        PotentialMode::Consistent(PotentialParams {
            sigma: sigmas.capillary_raw(),
            lambda: 2.0,
        }),
    ] {
        let e = energy_nondegenerate(&sp, &c, &d, &sigmas, mode, eps).unwrap();
        let per_interface = e.total / (2.0 * g.ly());
        assert!((per_interface - 1.5).abs() < 0.02 * 1.5, "{per_interface}");
    }
}

#[test]
fn matching_energy_is_concentration_energy_of_mapped_state() {
    let g = Grid2D::new(32, 32, 1.0, 1.0).unwrap();
    let sp = Spectral::new(g);
    let sigmas = SurfaceTensions::new(1.0_f64, 1.4, 0.8);
    let potentials = [
        PotentialMode::Natural,
        PotentialMode::Consistent(PotentialParams {
            sigma: sigmas.capillary_raw(),
            lambda: 0.0,
        }),
        PotentialMode::Consistent(PotentialParams {
            sigma: [0.3, -0.2, 1.1],
            lambda: 5.0,
        }),
    ];
    for seed in 0..100 {
        let (phi, psi) = random_label_state(g, seed);
        let (c, d) = labels_to_concentrations(&phi, &psi);
        let p = potentials[seed as usize % 3];
        let a = energy_matching(&sp, &phi, &psi, &sigmas, p, 0.05).total;
        let b = energy_nondegenerate(&sp, &c, &d, &sigmas, p, 0.05).unwrap().total;
        assert!((a - b).abs() < 1e-10 * b.abs(), "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn change_of_variables_on_fields_matches_pointwise() {
    let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi: ScalarField<f64> = smooth_random_field(g, &mut rng, 3, 0.0, 0.9);
    let psi = smooth_random_field(g, &mut rng, 3, 0.0, 0.9);
    let (c, d) = labels_to_concentrations(&phi, &psi);
    for k in 0..g.len() {
        let (cc, dd) = change_of_variables(phi.data()[k], psi.data()[k]);
        assert_eq!((cc, dd), (c.data()[k], d.data()[k]));
        let e = 1.0 - cc - dd;
        assert!((e - 0.5 * (1.0 - psi.data()[k])).abs() < 1e-15);
    }
}

#[test]
fn potential_written_in_labels_agrees() {
    let sigmas = SurfaceTensions::new(1.0_f64, 2.0, 1.5);
    assert!(potential_forms_discrepancy(&sigmas, PotentialMode::Natural, 2500) < 1e-14);
    let consistent = PotentialMode::Consistent(PotentialParams {
        sigma: sigmas.capillary_raw(),
        lambda: 0.7,
    });
    assert!(potential_forms_discrepancy(&sigmas, consistent, 2500) < 1e-14);
    let pinned = pin_cross_weights(&sigmas, 0.7, 2500);
    assert!((pinned.scale - 1.0).abs() < 1e-12);
    assert!(pinned.residual < 1e-13);
}

#[test]
fn triple_well_vanishes_at_pure_phases_and_is_binary_on_edges() {
    let sigmas = SurfaceTensions::new(1.0_f64, 2.0, 1.5);
    let w = TripleWell::new(
        sigmas,
        PotentialMode::Consistent(PotentialParams {
            sigma: sigmas.capillary_raw(),
            lambda: 3.0,
        }),
    );
    for (c1, c2, c3) in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)] {
        assert_eq!(w.value(c1, c2, c3), 0.0);
    }
    for k in 0..=20 {
        let s = k as f64 / 20.0;
        let binary = s * s * (1.0 - s) * (1.0 - s);
        assert!((w.value(s, 1.0 - s, 0.0) - binary).abs() < 1e-15);
        assert!((w.value(s, 0.0, 1.0 - s) - 2.0 * binary).abs() < 1e-15);
        assert!((w.value(0.0, s, 1.0 - s) - 1.5 * binary).abs() < 1e-15);
    }
}

#[test]
fn capillary_coefficients() {
    let c = derive_capillary(&SurfaceTensions::uniform(1.0_f64)).unwrap();
    assert_eq!(c.chi, [1.0, 1.0, 1.0]);
    assert!((c.chi0 - 1.0 / 3.0).abs() < 1e-15);
    let c = derive_capillary(&SurfaceTensions::new(1.0_f64, 2.0, 1.5)).unwrap();
    assert_eq!(c.chi, [1.5, 0.5, 2.5]);
    let harmonic = 1.0 / (1.0 / 1.5 + 1.0 / 0.5 + 1.0 / 2.5);
    assert!((c.chi0 - harmonic).abs() < 1e-15);
    let spread = SurfaceTensions::new(3.0_f64, 1.0, 1.0);
    assert_eq!(derive_capillary(&spread).unwrap().chi[2], -1.0);
    assert!(spread.is_restricted());
    assert!(derive_capillary(&SurfaceTensions::new(2.0_f64, 1.0, 1.0)).is_err());
}

#[test]
fn gamma_end_values_and_flatness() {
    for (s13, s23) in [(2.0_f64, 1.0_f64), (1.0, 2.0), (0.7, 0.7)] {
        let mode = CoefficientMode::consistent(3.01);
        let top = gamma2_jet(1.0, s13, s23, &mode).unwrap();
        let bottom = gamma2_jet(-1.0, s13, s23, &mode).unwrap();
        assert!((top.value - K * s13).abs() < 1e-12);
        assert!((bottom.value - K * s23).abs() < 1e-12);
        assert!(top.d1.abs() < 1e-12 && bottom.d1.abs() < 1e-12);
        if s13 != s23 {
            assert!(top.d2 > 0.0 && bottom.d2 > 0.0);
        }
    }
    let mode = CoefficientMode::consistent(3.05);
    for k in 0..=200 {
        let phi = -1.0 + k as f64 / 100.0;
        assert!((gamma2(phi, 0.7, 0.7, &mode).unwrap() - K * 0.7).abs() < 1e-12);
    }
    assert!((gamma1(1.0, 2.0, &mode) - K * 2.0).abs() < 1e-12);
    assert!(gamma1(-1.0, 2.0, &mode).abs() < 1e-12);
}

/// Largest `gamma2 - K max(s13, s23)` by golden-section search over the
/// distance `u` from the larger end.
fn excess(e: f64) -> f64 {
    let mode = CoefficientMode::consistent(3.0 + e);
    let f = |u: f64| gamma2(1.0 - u, 2.0, 1.0, &mode).unwrap();
    let (mut a, mut b) = (0.0, e);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    f(0.5 * (a + b)) - 2.0 * K
}

#[test]
fn max_value_expansion_is_fourth_order() {
    let err = |e: f64| (excess(e) - K * e.powi(3) / 108.0).abs();
    let ratio = err(0.01) / err(0.005);
    assert!((8.0..=32.0).contains(&ratio), "{ratio}");
    assert!(excess(0.01) > 0.0);
}

#[test]
fn interp3_hits_corners_and_is_flat_there() {
    let (b1, b2, b3) = (0.3_f64, 1.7, 2.2);
    let a = 3.05_f64;
    assert!((interp3(1.0, 1.0, b1, b2, b3, a) - b1).abs() < 1e-14);
    assert!((interp3(-1.0, 1.0, b1, b2, b3, a) - b2).abs() < 1e-14);
    for phi in [-1.0_f64, -0.3, 0.4, 1.0] {
        assert!((interp3(phi, -1.0, b1, b2, b3, a) - b3).abs() < 1e-14);
    }
    let h = 1e-6;
    for (p, q) in [(1.0_f64, 1.0_f64), (-1.0, 1.0)] {
        let dp = (interp3(p - h * p, q, b1, b2, b3, a) - interp3(p, q, b1, b2, b3, a)) / h;
        let dq = (interp3(p, q - h, b1, b2, b3, a) - interp3(p, q, b1, b2, b3, a)) / h;
        assert!(dp.abs() < 1e-4 && dq.abs() < 1e-4, "{dp} {dq}");
    }
}
