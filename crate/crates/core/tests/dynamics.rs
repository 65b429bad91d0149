use std::f64::consts::PI;

use bbm_core::dynamics::{
    evolve, linear_evolve, ForcingSpec, Integrator, SolverConfig, SpatialProfile, TemporalProfile, Trajectory, Variant,
};
use bbm_core::spectral::{i_h1_norm, i_operator, Grid, ImethodParams, SpectralField};

fn grid() -> Grid {
    Grid::new(256, 32.0 * PI).unwrap()
}

fn bump(g: &Grid, amplitude: f64, center: f64, width: f64) -> SpectralField {
    SpectralField::from_fn(g, |x| amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp())
}

fn forcing(amplitude: f64, temporal: TemporalProfile) -> ForcingSpec {
    ForcingSpec::new(amplitude, SpatialProfile::Gaussian { sigma: 2.0, center: 0.0 }, temporal).unwrap()
}

fn final_state(u0: &SpectralField, f: &ForcingSpec, t1: f64, cfg: &SolverConfig) -> SpectralField {
    evolve(u0, f, 0.0, t1, cfg).unwrap().last().clone()
}

/// `log2(|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}|)` at `t1`.
fn richardson_order(integrator: Integrator, dt: f64) -> f64 {
    let g = grid();
    let u0 = bump(&g, 1.0, 0.0, 2.0);
    let f = forcing(0.1, TemporalProfile::Cosine { period: 2.0 });
    let run = |h: f64| {
        let cfg = SolverConfig::new(h).unwrap().with_integrator(integrator);
        final_state(&u0, &f, 4.0, &cfg)
    };
    let (a, b, c) = (run(dt), run(dt / 2.0), run(dt / 4.0));
    ((&a - &b).sobolev_norm(0.5) / (&b - &c).sobolev_norm(0.5)).log2()
}

#[test]
fn linear_runs_match_closed_forms() {
    let g = grid();
    let u0 = bump(&g, 0.5, 3.0, 1.5);
    for (variant, temporal) in [
        (Variant::BbmDamped, TemporalProfile::Cosine { period: 2.0 }),
        (Variant::BbmDamped, TemporalProfile::Constant),
        (Variant::BbmBurgersTorus, TemporalProfile::Cosine { period: 2.0 }),
    ] {
        let f = forcing(0.3, temporal);
        for integrator in [Integrator::ExpEuler, Integrator::ExpRk2, Integrator::Etdrk4] {
            let cfg = SolverConfig::new(0.05)
                .unwrap()
                .with_integrator(integrator)
                .with_variant(variant)
                .with_stride(20)
                .linear_only();
            let traj = evolve(&u0, &f, 0.0, 20.0, &cfg).unwrap();
            for (i, snap) in traj.snapshots().iter().enumerate() {
                let exact = linear_evolve(&u0, &f, traj.time(i), variant).unwrap();
                let err = (snap - &exact).sobolev_norm(0.5);
                assert!(err < 1e-10, "{variant:?} {integrator:?} t = {}: {err:e}", traj.time(i));
            }
        }
    }
}

#[test]
fn exp_rk2_is_second_order() {
    let order = richardson_order(Integrator::ExpRk2, 0.04);
    assert!(order >= 1.9, "order {order}");
}

#[test]
fn etdrk4_is_fourth_order() {
    let order = richardson_order(Integrator::Etdrk4, 0.2);
    assert!(order >= 3.7, "order {order}");
}

#[test]
fn exp_euler_is_first_order() {
    let order = richardson_order(Integrator::ExpEuler, 0.02);
    assert!((0.9..1.3).contains(&order), "order {order}");
}

/// Max over interior samples of the energy-identity residual
/// `dE/dt + 2E + 2 (I_N (u u_x), I_N u) - 2 (I_N f, I_N u)`, `E = ||I_N u||^2_{H^1}`,
/// with a central difference for `dE/dt`, relative to `max E`.
fn energy_residual(traj: &Trajectory, f: &ForcingSpec, params: &ImethodParams) -> f64 {
    let g = traj.grid().clone();
    let energy = traj.norms(|u| i_h1_norm(u, params).powi(2));
    let scale = energy.iter().copied().fold(0.0, f64::max);
    let h = traj.dt();
    (1..traj.len() - 1)
        .map(|i| {
            let u = traj.snapshot(i);
            let iu = i_operator(u, params);
            let flux = i_operator(&u.square(true).derivative().scaled(0.5), params);
            let force = i_operator(&f.snapshot(&g, traj.time(i)), params);
            let de = (energy[i + 1] - energy[i - 1]) / (2.0 * h);
            let r = de + 2.0 * energy[i] + 2.0 * flux.inner(&iu).unwrap() - 2.0 * force.inner(&iu).unwrap();
            r.abs() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn energy_identity_residual_is_second_order() {
    let g = grid();
    let u0 = bump(&g, 1.0, 0.0, 2.0);
    let f = forcing(0.1, TemporalProfile::Cosine { period: 2.0 });
    let params = ImethodParams::new(0.5, 4.0).unwrap();
    let residual = |dt: f64| {
        let cfg = SolverConfig::new(dt).unwrap();
        energy_residual(&evolve(&u0, &f, 0.0, 4.0, &cfg).unwrap(), &f, &params)
    };
    let coarse = residual(0.02);
    let fine = residual(0.01);
    assert!(fine < 1e-3, "residual {fine:e}");
    assert!(coarse / fine > 3.5, "ratio {}", coarse / fine);
}
