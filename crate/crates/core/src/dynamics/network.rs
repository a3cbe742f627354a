use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

use super::two_site::{check_normalized, grid_steps, TwoSiteSystem};
use super::Trajectory;

/// Target `h ‖H‖` for the fixed RK4 step.
const STEP_SCALE: f64 = 0.005;

/// `M` coupled sites with individual energies and decay rates.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteNetwork<T> {
    energies: Vec<T>,
    decays: Vec<T>,
    /// Row-major `M×M`, symmetric with zero diagonal.
    couplings: Vec<T>,
}

impl<T: Real> SiteNetwork<T> {
    pub fn new(energies: Vec<T>, decays: Vec<T>, couplings: Vec<Vec<T>>) -> Result<Self> {
        let m = energies.len();
        if m == 0 {
            return Err(Error::validation("energies", "at least one site"));
        }
        if decays.len() != m {
            return Err(Error::validation(
                "decays",
                format!("one decay rate per site ({m}, got {})", decays.len()),
            ));
        }
        if couplings.len() != m || couplings.iter().any(|row| row.len() != m) {
            return Err(Error::validation("couplings", format!("a {m}x{m} matrix")));
        }
        if let Some((i, e)) = energies.iter().enumerate().find(|(_, e)| !e.is_finite()) {
            return Err(Error::validation(format!("energies[{i}]"), format!("a finite value (got {e})")));
        }
        if let Some((i, g)) = decays
            .iter()
            .enumerate()
            .find(|(_, g)| !g.is_finite() || **g < T::zero())
        {
            return Err(Error::validation(format!("decays[{i}]"), format!("decays[{i}] >= 0 (got {g})")));
        }
        let tol = T::lit(1e-12);
        let mut flat = vec![T::zero(); m * m];
        for i in 0..m {
            if couplings[i][i] != T::zero() {
                return Err(Error::validation(
                    format!("couplings[{i}][{i}]"),
                    "a zero diagonal",
                ));
            }
            for j in 0..m {
                let (a, b) = (couplings[i][j], couplings[j][i]);
                if !a.is_finite() {
                    return Err(Error::validation(format!("couplings[{i}][{j}]"), "a finite value"));
                }
                if (a - b).abs() > tol * T::one().max(a.abs()).max(b.abs()) {
                    return Err(Error::validation(
                        format!("couplings[{i}][{j}]"),
                        format!("a symmetric matrix (couplings[{j}][{i}] = {b}, got {a})"),
                    ));
                }
                flat[i * m + j] = (a + b) * T::half();
            }
        }
        Ok(Self {
            energies,
            decays,
            couplings: flat,
        })
    }

    /// The two-site system as a 2-node network.
    pub fn from_two_site(sys: &TwoSiteSystem<T>) -> Self {
        let v = sys.coupling;
        Self {
            energies: vec![sys.omega1, sys.omega2],
            decays: vec![sys.gamma1, sys.gamma2],
            couplings: vec![T::zero(), v, v, T::zero()],
        }
    }

    pub fn site_count(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn decays(&self) -> &[T] {
        &self.decays
    }

    pub fn coupling(&self, i: usize, j: usize) -> T {
        self.couplings[i * self.site_count() + j]
    }

    /// Generator with the mean site energy removed (a global phase).
    fn shifted_generator(&self) -> Vec<Complex<T>> {
        let m = self.site_count();
        let mean = self.energies.iter().fold(T::zero(), |a, &e| a + e) / T::from_usize_lossy(m);
        let mut h: Vec<Complex<T>> = self
            .couplings
            .iter()
            .map(|&c| Complex::new(c, T::zero()))
            .collect();
        for k in 0..m {
            h[k * m + k] = Complex::new(self.energies[k] - mean, -self.decays[k] * T::half());
        }
        h
    }
}

/// Controls for the fixed-step network integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions<T> {
    /// Upper bound on the internal RK4 step; by default chosen from `‖H‖`.
    pub max_step: Option<T>,
    /// Accepted population error per unit time, estimated by step halving.
    pub tolerance_per_time: T,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            max_step: None,
            tolerance_per_time: T::lit(1e-9),
        }
    }
}

/// Classical RK4 on `ψ' = -iHψ` augmented with the per-site loss
/// accumulators `q_k' = γ_k |ψ_k|²`.
pub(crate) struct Rk4<T> {
    m: usize,
    h: Vec<Complex<T>>,
    gamma: Vec<T>,
    k_psi: [Vec<Complex<T>>; 4],
    k_q: [Vec<T>; 4],
    tmp: Vec<Complex<T>>,
}

impl<T: Real> Rk4<T> {
    pub(crate) fn new(net: &SiteNetwork<T>) -> Self {
        let m = net.site_count();
        Self {
            m,
            h: net.shifted_generator(),
            gamma: net.decays.clone(),
            k_psi: std::array::from_fn(|_| vec![Complex::new(T::zero(), T::zero()); m]),
            k_q: std::array::from_fn(|_| vec![T::zero(); m]),
            tmp: vec![Complex::new(T::zero(), T::zero()); m],
        }
    }

    /// Infinity norm of the shifted generator.
    pub(crate) fn generator_norm(&self) -> T {
        (0..self.m)
            .map(|r| {
                self.h[r * self.m..(r + 1) * self.m]
                    .iter()
                    .fold(T::zero(), |a, c| a + c.norm())
            })
            .fold(T::zero(), T::max)
    }

    fn deriv(h: &[Complex<T>], gamma: &[T], m: usize, psi: &[Complex<T>], dpsi: &mut [Complex<T>], dq: &mut [T]) {
        for r in 0..m {
            let row = &h[r * m..(r + 1) * m];
            let acc = row
                .iter()
                .zip(psi)
                .fold(Complex::new(T::zero(), T::zero()), |a, (&x, &y)| a + x * y);
            // -i * acc
            dpsi[r] = Complex::new(acc.im, -acc.re);
            dq[r] = gamma[r] * psi[r].norm_sqr();
        }
    }

    pub(crate) fn step(&mut self, psi: &mut [Complex<T>], q: &mut [T], dt: T) {
        let m = self.m;
        let half = dt * T::half();
        let sixth = dt / T::lit(6.0);
        let [k1, k2, k3, k4] = &mut self.k_psi;
        let [q1, q2, q3, q4] = &mut self.k_q;
        let tmp = &mut self.tmp;

        Self::deriv(&self.h, &self.gamma, m, psi, k1, q1);
        for i in 0..m {
            tmp[i] = psi[i] + k1[i] * half;
        }
        Self::deriv(&self.h, &self.gamma, m, tmp, k2, q2);
        for i in 0..m {
            tmp[i] = psi[i] + k2[i] * half;
        }
        Self::deriv(&self.h, &self.gamma, m, tmp, k3, q3);
        for i in 0..m {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        Self::deriv(&self.h, &self.gamma, m, tmp, k4, q4);
        let two = T::two();
        for i in 0..m {
            psi[i] += (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth;
            q[i] += (q1[i] + q2[i] * two + q3[i] * two + q4[i]) * sixth;
        }
    }
}

/// Internal steps per output interval `dt`.
pub(crate) fn substeps_for<T: Real>(dt: T, norm: T, options: &IntegratorOptions<T>) -> usize {
    let mut h = if norm > T::zero() {
        T::lit(STEP_SCALE) / norm
    } else {
        dt
    };
    if let Some(cap) = options.max_step {
        h = h.min(cap);
    }
    (dt / h).ceil().to_usize().unwrap_or(1).max(1)
}

fn sample_populations<T: Real>(
    net: &SiteNetwork<T>,
    initial: &[Complex<T>],
    samples: usize,
    dt: T,
    substeps: usize,
) -> Trajectory<T> {
    let mut rk = Rk4::new(net);
    let mut psi = initial.to_vec();
    let mut q = vec![T::zero(); net.site_count()];
    let h = dt / T::from_usize_lossy(substeps);
    let mut traj = Trajectory::with_capacity(net.site_count(), samples + 1);
    traj.push(T::zero(), psi.iter().map(|c| c.norm_sqr()).collect());
    for k in 1..=samples {
        for _ in 0..substeps {
            rk.step(&mut psi, &mut q, h);
        }
        traj.push(T::from_usize_lossy(k) * dt, psi.iter().map(|c| c.norm_sqr()).collect());
    }
    traj
}

impl<T: Real> SiteNetwork<T> {
    /// Fixed-step RK4 propagation with default [`IntegratorOptions`].
    pub fn propagate(&self, initial: &[Complex<T>], t_max: T, dt: T) -> Result<Trajectory<T>> {
        self.propagate_with(initial, t_max, dt, &IntegratorOptions::default())
    }

    /// Integrates at `n` and `2n` internal steps per sample and accepts the
    /// finer run when the halving estimate `max |P_n - P_2n| / 15` is within
    /// `tolerance_per_time · max(t_max, 1)`.
    pub fn propagate_with(
        &self,
        initial: &[Complex<T>],
        t_max: T,
        dt: T,
        options: &IntegratorOptions<T>,
    ) -> Result<Trajectory<T>> {
        if initial.len() != self.site_count() {
            return Err(Error::domain(format!(
                "initial state has {} amplitudes for {} sites",
                initial.len(),
                self.site_count()
            )));
        }
        check_normalized(initial)?;
        let samples = grid_steps(t_max, dt)?;
        let norm = Rk4::new(self).generator_norm();
        let n = substeps_for(dt, norm, options);
        let coarse = sample_populations(self, initial, samples, dt, n);
        let fine = sample_populations(self, initial, samples, dt, 2 * n);
        let estimate = coarse.max_population_deviation(&fine) / T::lit(15.0);
        let bound = options.tolerance_per_time * t_max.max(T::one());
        if estimate > bound {
            let h = dt / T::from_usize_lossy(2 * n);
            let recommended = h * (bound / estimate).powf(T::lit(0.25)) * T::half();
            return Err(Error::Accuracy {
                message: format!(
                    "step-halving check failed: estimated population error {:e} exceeds {:e}",
                    estimate.to_f64_lossy(),
                    bound.to_f64_lossy()
                ),
                recommended: recommended.to_f64_lossy(),
            });
        }
        Ok(fine)
    }
}

/// Amplitude vector localized on one site.
pub fn localized<T: Real>(sites: usize, site: usize) -> Result<Vec<Complex<T>>> {
    if site >= sites {
        return Err(Error::validation(
            "initial_site",
            format!("an index below the site count {sites} (got {site})"),
        ));
    }
    let mut v = vec![Complex::new(T::zero(), T::zero()); sites];
    v[site] = Complex::new(T::one(), T::zero());
    Ok(v)
}
