//! `check`: analytic identities and discretisation self-tests for the
//! configured tensions, printed as a table and saved as `check.csv`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tphase::coefficients::{gamma2_jet, CoefficientMode};
use tphase::config::Config;
use tphase::dynamics::{concentration_chemical_potentials, ModelEnergy, Simulation};
use tphase::energy::{
    change_of_variables, energy_matching, energy_nondegenerate, pin_cross_weights, potential_forms_discrepancy,
    PotentialMode,
};
use tphase::experiments::{inverse_change, labels_to_concentrations, random_label_state, smooth_random_field};
use tphase::grid::{ScalarField, Spectral};
use tphase::params::{derive_capillary, SurfaceTensions};
use tphase::scalar::tension_weight;

use crate::commands::{Failure, Options, Session};

/// One line of the report. `tolerance: None` marks an informational value.
#[derive(Clone, Debug)]
pub struct Item {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Item {
    fn bound(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: Some(tolerance),
            pass: value.is_finite() && value <= tolerance,
        }
    }

    fn flag(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: None,
            pass,
        }
    }

    fn info(name: impl Into<String>, value: f64) -> Self {
        Self::flag(name, value, true)
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{},{}",
            self.name,
            self.value,
            self.tolerance.map_or(String::new(), |t| format!("{t:e}")),
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

const CSV_HEADER: &str = "identity,value,tolerance,status";

pub fn check(config_path: &Path, opts: &Options) -> Result<(), Failure> {
    let session = Session::open("check", config_path, opts, |c| c.model_spec().map(|_| ()).map_err(Into::into))?;
    let result = check_inner(&session);
    session.close(result)
}

fn check_inner(s: &Session) -> Result<(), Failure> {
    let items = run_checks(&s.config)?;
    let width = items.iter().map(|i| i.name.len()).max().unwrap_or(0);
    for i in &items {
        let tol = i.tolerance.map_or("-".to_owned(), |t| format!("< {t:e}"));
        let status = if i.pass { "ok" } else { "FAIL" };
        println!("{:width$}  {:>24.16e}  {:>10}  {}", i.name, i.value, tol, status);
    }
    let rows: Vec<String> = items.iter().map(Item::csv_row).collect();
    s.dir.write_csv("check.csv", CSV_HEADER, &rows)?;
    let failed: Vec<&str> = items.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::CheckFailed(failed.join(", ")))
    }
}

/// Every identity of the report for the tensions and `epsilon` of `config`.
pub fn run_checks(config: &Config) -> Result<Vec<Item>, Failure> {
    let spec = config.model_spec()?;
    let sigmas = spec.sigmas;
    let alpha = spec.numerics.alpha;
    let mut items = Vec::new();

    match derive_capillary(&sigmas) {
        Ok(cap) => {
            let [x1, x2, x3] = cap.chi;
            let target = 1.0 / (1.0 / x1 + 1.0 / x2 + 1.0 / x3);
            items.push(Item::bound("chi0 harmonic identity", (cap.chi0 - target).abs() / target, 1e-14));
            let sum = [x1 + x2, x1 + x3, x2 + x3];
            let pairs = [sigmas.sigma12, sigmas.sigma13, sigmas.sigma23];
            let worst = (0..3).map(|k| (sum[k] - 2.0 * pairs[k]).abs()).fold(0.0, f64::max);
            items.push(Item::bound("chi_i + chi_j = 2 sigma_ij", worst, 1e-12));
        }
        Err(_) => items.push(Item::flag("capillary coefficients positive", 0.0, true)),
    }

    coefficient_items(&sigmas, alpha, &mut items);
    items.push(expansion_item(&sigmas));
    gradient_items(config, &mut items)?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let phi: f64 = rng.gen_range(-1.0..=1.0);
        let psi: f64 = rng.gen_range(-1.0 + 1e-3..=1.0);
        let (c, d) = change_of_variables(phi, psi);
        let (p, q) = inverse_change(c, d, 1e-12).map_err(|e| Failure::CheckFailed(e.to_string()))?;
        worst = worst.max((p - phi).abs()).max((q - psi).abs());
    }
    items.push(Item::bound("change of variables round trip", worst, 1e-12));

    let lambda = config.model.lambda;
    items.push(Item::info(
        "natural vs label potential discrepancy",
        potential_forms_discrepancy(&sigmas, PotentialMode::Natural, 2500),
    ));
    let pinned = pin_cross_weights(&sigmas, lambda, 2500);
    items.push(Item::info("pinned cross-weight scale t", pinned.scale));
    for (k, w) in pinned.params.sigma.iter().enumerate() {
        items.push(Item::info(format!("pinned Sigma_{}", k + 1), *w));
    }
    items.push(Item::info("pinned Lambda", pinned.params.lambda));
    items.push(Item::bound("pinned potential residual", pinned.residual, 1e-12));

    if !sigmas.is_restricted() {
        items.push(bridge_item(&sigmas, PotentialMode::Consistent(pinned.params)));
    }
    Ok(items)
}

fn coefficient_items(sigmas: &SurfaceTensions<f64>, alpha: f64, items: &mut Vec<Item>) {
    let k = tension_weight::<f64>();
    let mode = CoefficientMode::consistent(alpha);
    let (s13, s23) = (sigmas.sigma13, sigmas.sigma23);
    let jet = |phi: f64, a: f64, b: f64| gamma2_jet(phi, a, b, &mode).expect("consistent mode accepts any tensions");
    let (top, bottom) = (jet(1.0, s13, s23), jet(-1.0, s13, s23));
    items.push(Item::bound("gamma2(1) - 3/(2 sqrt 2) sigma13", (top.value - k * s13).abs(), 1e-12));
    items.push(Item::bound("gamma2(-1) - 3/(2 sqrt 2) sigma23", (bottom.value - k * s23).abs(), 1e-12));
    items.push(Item::bound("gamma2'(+-1)", top.d1.abs().max(bottom.d1.abs()), 1e-12));
    let curv = top.d2.min(bottom.d2);
    if s13 != s23 {
        items.push(Item::flag("min gamma2''(+-1) (must be > 0)", curv, curv > 0.0));
    } else {
        items.push(Item::info("min gamma2''(+-1) (zero for equal tensions)", curv));
    }
    let flat = (0..=2000)
        .map(|i| -1.0 + i as f64 / 1000.0)
        .map(|phi| (jet(phi, s13, s13).value - k * s13).abs())
        .fold(0.0, f64::max);
    items.push(Item::bound("gamma2 constant when sigma13 = sigma23", flat, 1e-12));
    let inconsistent = CoefficientMode::inconsistent();
    if s13 == s23 {
        let v = gamma2_jet(0.3, s13, s23, &inconsistent).map_or(f64::NAN, |j| j.value);
        items.push(Item::bound("inconsistent gamma2 - 3/(2 sqrt 2) sigma13", (v - k * s13).abs(), 1e-12));
    }
}

/// Largest `gamma2` for `alpha = 3 + e` found by golden-section search near
/// the larger end value, minus that end value.
pub fn gamma2_excess(s13: f64, s23: f64, e: f64) -> f64 {
    let mode = CoefficientMode::consistent(3.0 + e);
    let k = tension_weight::<f64>();
    let (end, sign) = if s13 >= s23 { (1.0, -1.0) } else { (-1.0, 1.0) };
    let f = |u: f64| gamma2_jet(end + sign * u, s13, s23, &mode).expect("consistent").value;
    let (mut a, mut b) = (0.0, e.max(1e-3));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    f(0.5 * (a + b)) - k * s13.max(s23)
}

/// Error ratio of the cubic max-value expansion under halving `alpha - 3`.
/// Uses the configured tensions when they differ, else `(2, 1)`.
pub fn expansion_error_ratio(sigmas: &SurfaceTensions<f64>) -> f64 {
    let (s13, s23) = if sigmas.sigma13 != sigmas.sigma23 {
        (sigmas.sigma13, sigmas.sigma23)
    } else {
        (2.0, 1.0)
    };
    let k = tension_weight::<f64>();
    let err = |e: f64| (gamma2_excess(s13, s23, e) - k * (s23 - s13).abs() * e.powi(3) / 108.0).abs();
    err(0.01) / err(0.005)
}

fn expansion_item(sigmas: &SurfaceTensions<f64>) -> Item {
    let r = expansion_error_ratio(sigmas);
    Item::flag("max gamma2 expansion error ratio (8..32)", r, (8.0..=32.0).contains(&r))
}

/// Central-difference directional derivatives of the discrete energy against
/// `∫ zeta . v` for random smooth states and directions on a 32^2 grid.
fn gradient_items(config: &Config, items: &mut Vec<Item>) -> Result<(), Failure> {
    let mut spec = config.model_spec()?;
    spec.numerics.nx = 32;
    spec.numerics.ny = 32;
    let sim = Simulation::new(spec)?;
    let grid = *sim.grid();
    let sp: &Spectral<f64> = sim.spectral();
    let eps = spec.numerics.epsilon;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (phi, psi) = random_label_state(grid, seed);
        let (u, v) = if spec.kind.is_degenerate() {
            (phi, psi)
        } else {
            labels_to_concentrations(&phi, &psi)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let du = smooth_random_field(grid, &mut rng, 3, 0.0, 1.0);
        let dv = smooth_random_field(grid, &mut rng, 3, 0.0, 1.0);
        let energy = |a: &ScalarField<f64>, b: &ScalarField<f64>| sim.energy(a, b).total;
        // Fourth-order stencil: a second-order one at small h loses digits
        // to round-off when the direction is nearly orthogonal to the gradient.
        let h = 1e-3;
        let shifted = |t: f64| {
            let a = u.zip_map(&du, |x, y| x + t * y);
            let b = v.zip_map(&dv, |x, y| x + t * y);
            energy(&a, &b)
        };
        let fd = (8.0 * (shifted(h) - shifted(-h)) - (shifted(2.0 * h) - shifted(-2.0 * h))) / (12.0 * h);
        let (z1, z2) = match sim.model_energy() {
            ModelEnergy::Label(_) => {
                let z = sim.chemical_potentials(&u, &v);
                (z.first, z.second)
            }
            ModelEnergy::Concentration(e) => {
                // Derivative along (c, d) with the third component slaved.
                let z = concentration_chemical_potentials(sp, e, &u, &v, eps);
                (
                    z.pair.first.zip_map(&z.third, |a, b| a - b),
                    z.pair.second.zip_map(&z.third, |a, b| a - b),
                )
            }
        };
        let analytic = z1.zip_map(&du, |a, b| a * b).integrate() + z2.zip_map(&dv, |a, b| a * b).integrate();
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-300));
    }
    items.push(Item::bound(format!("{} chemical potential vs energy FD", spec.kind.name()), worst, 1e-6));
    Ok(())
}

/// Label form of the concentration energy against the concentration energy
/// of the mapped state.
fn bridge_item(sigmas: &SurfaceTensions<f64>, potential: PotentialMode<f64>) -> Item {
    let grid = tphase::Grid::new(32, 32, 1.0, 1.0).expect("fixed grid");
    let sp = Spectral::new(grid);
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let (phi, psi) = random_label_state(grid, 500 + seed);
        let (c, d) = labels_to_concentrations(&phi, &psi);
        let a = energy_matching(&sp, &phi, &psi, sigmas, potential, 0.05).total;
        let b = energy_nondegenerate(&sp, &c, &d, sigmas, potential, 0.05)
            .map_or(f64::NAN, |e| e.total);
        worst = worst.max((a - b).abs() / b.abs());
    }
    Item::bound("label vs concentration energy (bridge)", worst, 1e-10)
}
