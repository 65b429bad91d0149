use std::f64::consts::PI;

use bbm_core::spectral::{Grid, ImethodParams, SpectralField};
use bbm_core::verification::{
    adversarial_triples, bilinear_ratio, equivalence_ratios, sample_fields, sample_mixture, sample_trajectories,
    trilinear_form, trilinear_form_quadrature, trilinear_ratio, verify_equivalence, EquivalenceThresholds,
    SpectrumProfile, Triple,
};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(256, PI).unwrap()
}

fn field(seed: u64) -> SpectralField {
    let profile = SpectrumProfile::PowerLaw { alpha: 1.0, max_xi: 64.0 };
    sample_fields(seed, 1, &grid(), &profile).unwrap().remove(0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn equivalence_reports_are_deterministic() {
    let g = grid();
    let profiles = [
        SpectrumProfile::PowerLaw { alpha: 1.0, max_xi: 64.0 },
        SpectrumProfile::LocalizedBump { center_xi: 16.0, width_xi: 2.0 },
    ];
    let run = || {
        let fields = sample_mixture(5, 20, &g, &profiles).unwrap();
        verify_equivalence(&fields, 0.25, &[8.0, 16.0, 32.0, 64.0], &EquivalenceThresholds::default()).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.worst_ratio.to_bits(), b.worst_ratio.to_bits());
    assert_eq!(a.summary(), b.summary());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn equivalence_ratios_are_homogeneous(seed in any::<u64>(), lambda in 1e-3f64..1e3, ell in 0.0f64..1.0) {
        let g = field(seed);
        let (lo, hi) = equivalence_ratios(&g, ell, 16.0).unwrap();
        let (lo_s, hi_s) = equivalence_ratios(&g.scaled(-lambda), ell, 16.0).unwrap();
        prop_assert!(close(lo, lo_s, 1e-12) && close(hi, hi_s, 1e-12));
    }

    #[test]
    fn trilinear_ratio_is_homogeneous(seed in any::<u64>(), a in 1e-2f64..1e2, b in 1e-2f64..1e2, c in 1e-2f64..1e2) {
        let t = adversarial_triples(seed, 1, &grid(), 16.0).remove(0);
        let params = ImethodParams::new(0.5, 16.0).unwrap();
        let scaled = Triple { u: t.u.scaled(a), v: t.v.scaled(-b), w: t.w.scaled(c) };
        let r = trilinear_ratio(&t, &params).unwrap();
        let r_s = trilinear_ratio(&scaled, &params).unwrap();
        prop_assert!(close(r, r_s, 1e-12), "{} vs {}", r, r_s);
    }

    #[test]
    fn trilinear_form_two_ways(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), n in 4.0f64..64.0) {
        let params = ImethodParams::new(0.25, n).unwrap();
        let (u, v, w) = (field(s1), field(s2), field(s3));
        let spectral = trilinear_form(&u, &v, &w, &params).unwrap();
        let physical = trilinear_form_quadrature(&u, &v, &w, &params).unwrap();
        let scale = u.sobolev_norm(1.0) * v.sobolev_norm(1.0) * w.sobolev_norm(1.0);
        prop_assert!((spectral - physical).abs() <= 1e-10 * scale);
    }
}

#[test]
fn bilinear_ratio_is_homogeneous() {
    let g = Grid::new(64, PI).unwrap();
    let profile = SpectrumProfile::PowerLaw { alpha: 1.0, max_xi: 8.0 };
    let trajs = sample_trajectories(9, 2, &g, &profile, 0.05, 2.0).unwrap();
    let params = ImethodParams::new(0.5, 4.0).unwrap();
    let base = bilinear_ratio(&trajs[0], &trajs[1], &params, 2.0).unwrap();
    let scaled = bilinear_ratio(
        &trajs[0].map(|s| s.scaled(7.0)),
        &trajs[1].map(|s| s.scaled(0.01)),
        &params,
        2.0,
    )
    .unwrap();
    assert!(close(base.ratio, scaled.ratio, 1e-12), "{base:?} vs {scaled:?}");
}
