use coboson::branching::{f2_closed, f2_spectral_auto, f2_time_domain_auto};
use coboson::dynamics::{localized, p12_closed, SiteNetwork, TwoSiteSystem};
use coboson::Complex;
use proptest::prelude::*;

fn two_site() -> impl Strategy<Value = TwoSiteSystem<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, 0.05f64..2.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_map(|(w1, w2, v, g1, g2)| TwoSiteSystem::new(w1, w2, v, g1, g2).unwrap())
        .prop_filter("away from the exceptional point", |s| s.abs_omega() > 1e-3 * s.coupling)
}

fn start() -> [Complex<f64>; 2] {
    [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_propagator(sys in two_site()) {
        let traj = sys.propagate(start(), 20.0, 0.1).unwrap();
        for (k, &t) in traj.times().iter().enumerate() {
            let d = (p12_closed(&sys, t).unwrap() - traj.populations(k)[1]).abs();
            prop_assert!(d < 1e-8, "t={t} diff={d}");
        }
    }

    #[test]
    fn norm_never_grows(sys in two_site()) {
        let traj = sys.propagate(start(), 15.0, 0.25).unwrap();
        for w in traj.total_norm().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn hermitian_limit_conserves_probability(w0 in -2.0f64..2.0, v in 0.0f64..2.0) {
        let sys = TwoSiteSystem::new(0.0, w0, v, 0.0, 0.0).unwrap();
        let traj = sys.propagate(start(), 20.0, 0.2).unwrap();
        for &n in traj.total_norm() {
            prop_assert!((n - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn branching_methods_agree(w0 in 0.0f64..2.0, v in 0.1f64..3.0, d1 in 0.02f64..0.5, d2 in 0.02f64..0.5) {
        let sys = TwoSiteSystem::new(0.0, w0, v, d1, d2).unwrap();
        let closed = f2_closed(&sys).unwrap();
        let time = f2_time_domain_auto(&sys, 1e-8).unwrap();
        let spectral = f2_spectral_auto(&sys, 1e-8).unwrap();
        prop_assert!((closed - time.value).abs() < 1e-6);
        prop_assert!((closed - spectral.value).abs() < spectral.error.max(1e-6));
        prop_assert!((0.0..=1.0).contains(&closed));
    }

    #[test]
    fn two_site_network_tracks_closed_form(sys in two_site()) {
        let net = SiteNetwork::from_two_site(&sys);
        let traj = net.propagate(&localized(2, 0).unwrap(), 10.0, 0.5).unwrap();
        for (k, &t) in traj.times().iter().enumerate() {
            prop_assert!((traj.populations(k)[1] - p12_closed(&sys, t).unwrap()).abs() < 1e-8);
        }
    }
}
