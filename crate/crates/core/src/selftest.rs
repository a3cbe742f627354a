//! Randomized agreement checks between the fast routines and their
//! independent references, reproducible from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branching::{f2_closed, f2_spectral_auto, f2_time_domain_auto, network_branching_auto, BranchingOptions};
use crate::coboson::{chi, chi_ratio, purity_bounds, SchmidtSpectrum};
use crate::dynamics::{localized, p12_closed, SiteNetwork, TwoSiteSystem};
use crate::oracle::brute_force_chi;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    /// Largest observed violation, in the check's own units.
    pub worst: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.limit
    }
}

pub fn random_spectrum(rng: &mut impl Rng, max_modes: usize) -> SchmidtSpectrum<f64> {
    let j = rng.gen_range(1..=max_modes);
    let w: Vec<f64> = (0..j).map(|_| rng.gen_range(1e-3..1.0)).collect();
    SchmidtSpectrum::from_weights(&w).expect("positive weights")
}

/// Two-site parameters at least `1e-3` (relative) away from an exceptional point.
pub fn random_two_site(rng: &mut impl Rng) -> TwoSiteSystem<f64> {
    loop {
        let sys = TwoSiteSystem::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.05..2.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        )
        .expect("valid parameters");
        if sys.abs_omega() > 1e-3 * (2.0 * sys.coupling) {
            return sys;
        }
    }
}

pub fn random_network(rng: &mut impl Rng, max_sites: usize) -> SiteNetwork<f64> {
    let m = rng.gen_range(2..=max_sites);
    let energies = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut decays: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..0.5)).collect();
    decays[0] = rng.gen_range(0.0..0.5);
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            // a chain keeps every site connected
            let v = if j == i + 1 {
                rng.gen_range(0.2..1.0)
            } else if rng.gen_bool(0.3) {
                rng.gen_range(0.0..0.5)
            } else {
                0.0
            };
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    SiteNetwork::new(energies, decays, c).expect("valid network")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn run_selftest(seed: u64, cases: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..cases {
        let s = random_spectrum(&mut rng, 12);
        for n in 0..=6.min(s.mode_count()) {
            worst = worst.max(rel(chi(&s, n), brute_force_chi(&s, n)?));
        }
    }
    checks.push(Check {
        name: "chi matches subset enumeration (relative)",
        cases,
        worst,
        limit: 1e-12,
    });

    let mut worst = 0.0f64;
    for _ in 0..cases {
        let s = random_spectrum(&mut rng, 40);
        let mut prev = f64::INFINITY;
        for n in 1..s.mode_count() {
            let r = chi_ratio(&s, n)?;
            let (lo, hi) = purity_bounds(&s, n)?;
            worst = worst.max(lo - r).max(r - hi).max(r - prev);
            prev = r;
        }
    }
    checks.push(Check {
        name: "purity bounds and monotone chi ratio (violation)",
        cases,
        worst,
        limit: 1e-12,
    });

    let mut worst = 0.0f64;
    let init = [num_complex::Complex::new(1.0, 0.0), num_complex::Complex::new(0.0, 0.0)];
    for _ in 0..cases {
        let sys = random_two_site(&mut rng);
        let traj = sys.propagate(init, 20.0, 0.05)?;
        for (k, &t) in traj.times().iter().enumerate() {
            worst = worst.max((p12_closed(&sys, t)? - traj.populations(k)[1]).abs());
        }
    }
    checks.push(Check {
        name: "closed-form P12 matches propagator (absolute)",
        cases,
        worst,
        limit: 1e-8,
    });

    let (mut worst_time, mut worst_energy) = (0.0f64, f64::NEG_INFINITY);
    let n_branch = cases.div_ceil(4);
    for _ in 0..n_branch {
        let sys = TwoSiteSystem::<f64>::new(
            0.0,
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.02..0.5),
            rng.gen_range(0.02..0.5),
        )?;
        let closed = f2_closed(&sys)?;
        let time = f2_time_domain_auto(&sys, 1e-8)?;
        let spectral = f2_spectral_auto(&sys, 1e-8)?;
        worst_time = worst_time.max((closed - time.value).abs());
        worst_energy = worst_energy.max((closed - spectral.value).abs() - spectral.error.max(1e-6));
    }
    checks.push(Check {
        name: "branching time integral matches closed form (absolute)",
        cases: n_branch,
        worst: worst_time,
        limit: 1e-6,
    });
    checks.push(Check {
        name: "branching energy integral within its reported error (excess)",
        cases: n_branch,
        worst: worst_energy,
        limit: 0.0,
    });

    let mut worst = 0.0f64;
    let n_net = cases.div_ceil(10);
    for _ in 0..n_net {
        let net = random_network(&mut rng, 6);
        let init = localized(net.site_count(), 0)?;
        let res = network_branching_auto(&net, &init, None, 1e5, &BranchingOptions::default())?;
        worst = worst.max((res.total() - 1.0).abs());
    }
    checks.push(Check {
        name: "network fractions plus survival sum to one (absolute)",
        cases: n_net,
        worst,
        limit: 1e-6,
    });

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_selftest_passes_and_is_reproducible() {
        let a = run_selftest(7, 12).unwrap();
        assert!(a.iter().all(Check::passed), "{a:?}");
        let b = run_selftest(7, 12).unwrap();
        assert_eq!(a, b);
    }
}
