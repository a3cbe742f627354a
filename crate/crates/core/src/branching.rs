//! Decay branching fractions: the share of an initially localized excitation
//! that leaves through each site's decay channel.
//!
//! For two sites the fraction through channel 2 is available three ways: an
//! algebraic closed form, the time integral `γ₂ ∫ P₁₂ dt`, and the energy
//! integral `γ₂ ∫ |G₁₂(E)|² dE / 2π` of the retarded Green's function. The
//! last two are linked by Parseval's theorem.

use crate::dynamics::{amplitudes_closed, p12_closed, substeps_for, IntegratorOptions, Rk4, SiteNetwork, TwoSiteSystem};
use crate::error::{Error, Result};
use crate::scalar::{gauss_legendre, Complex, Real};

/// A numerical integral with an error estimate that includes truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// Per-channel branching fractions of a network.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingResult<T> {
    pub fractions: Vec<T>,
    /// `‖ψ(horizon)‖²`, the weight that has not decayed yet.
    pub survival: T,
    pub horizon: T,
    /// Step-halving estimate of the integration error in any fraction.
    pub error_estimate: T,
}

impl<T: Real> BranchingResult<T> {
    /// `Σ F_k + survival`, one up to integration error.
    pub fn total(&self) -> T {
        self.fractions.iter().fold(self.survival, |a, &f| a + f)
    }
}

/// `F₂ = (1 + γ₂/γ₁) V² / (ω0² + γ_d² (1 + 4V²/(γ₁γ₂)))`.
pub fn f2_closed<T: Real>(sys: &TwoSiteSystem<T>) -> Result<T> {
    if sys.gamma1 <= T::zero() {
        return Err(Error::ChannelClosed(format!(
            "closed-form F2 needs gamma1 > 0 (got {})",
            sys.gamma1
        )));
    }
    if sys.gamma2 <= T::zero() {
        return Err(Error::ChannelClosed(format!(
            "closed-form F2 needs gamma2 > 0 (got {})",
            sys.gamma2
        )));
    }
    let (g1, g2) = (sys.gamma1, sys.gamma2);
    let v2 = sys.coupling * sys.coupling;
    let w = sys.omega0();
    let gd = sys.gamma_mean();
    Ok((T::one() + g2 / g1) * v2 / (w * w + gd * gd * (T::one() + T::lit(4.0) * v2 / (g2 * g1))))
}

fn require_decay<T: Real>(sys: &TwoSiteSystem<T>) -> Result<()> {
    if sys.gamma_mean() <= T::zero() {
        Err(Error::domain(
            "branching integrals diverge without decay (gamma1 + gamma2 = 0)",
        ))
    } else {
        Ok(())
    }
}

fn transfer_probability<T: Real>(sys: &TwoSiteSystem<T>, t: T) -> T {
    match p12_closed(sys, t) {
        Ok(p) => p,
        Err(_) => amplitudes_closed(sys, t)[1].norm_sqr(),
    }
}

fn remaining_norm<T: Real>(sys: &TwoSiteSystem<T>, t: T) -> T {
    let [a, b] = amplitudes_closed(sys, t);
    a.norm_sqr() + b.norm_sqr()
}

/// `γ₂ ∫₀^horizon P₁₂(t) dt` by composite Gauss-Legendre quadrature.
///
/// The tail beyond the horizon is bounded by the undecayed norm
/// `‖ψ(horizon)‖²`, since every later loss, through either channel, comes out
/// of it. If that bound exceeds `tol` an accuracy error suggests a longer
/// horizon.
pub fn f2_time_domain<T: Real>(sys: &TwoSiteSystem<T>, horizon: T, tol: T) -> Result<Estimate<T>> {
    require_decay(sys)?;
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::validation("horizon", format!("horizon > 0 (got {horizon})")));
    }
    if sys.coupling == T::zero() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let tail = remaining_norm(sys, horizon);
    if tail > tol {
        let rate = sys.slowest_population_decay();
        let extra = if rate > T::zero() {
            (tail / tol).ln() / rate
        } else {
            horizon
        };
        return Err(Error::Accuracy {
            message: format!(
                "horizon {horizon} leaves undecayed weight {:e} above tolerance {:e}",
                tail.to_f64_lossy(),
                tol.to_f64_lossy()
            ),
            recommended: (horizon + extra).to_f64_lossy(),
        });
    }
    let om = sys.omega();
    let freq = om.re.abs() + om.im.abs() + sys.gamma_mean();
    let panels = (horizon * freq / T::lit(1.5)).ceil().to_usize().unwrap_or(1).max(8);
    let f = |t: T| transfer_probability(sys, t);
    let coarse = gauss_legendre_composite(&f, horizon, panels);
    let fine = gauss_legendre_composite(&f, horizon, 2 * panels);
    Ok(Estimate {
        value: sys.gamma2 * fine,
        error: sys.gamma2 * (fine - coarse).abs() + tail,
    })
}

/// [`f2_time_domain`] with the horizon grown until the tail bound meets `tol`.
pub fn f2_time_domain_auto<T: Real>(sys: &TwoSiteSystem<T>, tol: T) -> Result<Estimate<T>> {
    require_decay(sys)?;
    let rate = sys.slowest_population_decay();
    if rate <= T::zero() {
        return Err(Error::domain("population does not decay; the time integral diverges"));
    }
    let mut horizon = (T::one() / tol).ln() / rate;
    for _ in 0..8 {
        match f2_time_domain(sys, horizon, tol) {
            Err(Error::Accuracy { recommended, .. }) => {
                horizon = T::lit(recommended).max(horizon * T::lit(1.5));
            }
            other => return other,
        }
    }
    f2_time_domain(sys, horizon, tol)
}

fn gauss_legendre_composite<T: Real>(f: &impl Fn(T) -> T, end: T, panels: usize) -> T {
    let rule = gauss_legendre::<T>(8);
    let w = end / T::from_usize_lossy(panels);
    let half = w * T::half();
    let mut total = T::zero();
    for p in 0..panels {
        let mid = (T::from_usize_lossy(p) + T::half()) * w;
        let panel = rule
            .iter()
            .fold(T::zero(), |acc, &(x, wt)| acc + wt * f(mid + half * x));
        total += panel * half;
    }
    total
}

/// `|G₁₂(E)|²` for the retarded Green's function of the two-site generator.
pub fn green_12_sq<T: Real>(sys: &TwoSiteSystem<T>, energy: T) -> T {
    let a = Complex::new(energy - sys.omega1, sys.gamma1 * T::half());
    let b = Complex::new(energy - sys.omega2, sys.gamma2 * T::half());
    let v2 = sys.coupling * sys.coupling;
    let det = a * b - Complex::new(v2, T::zero());
    v2 / det.norm_sqr()
}

/// `γ₂ ∫ |G₁₂(E)|² dE / 2π` by composite Simpson over `[c - e_span, c + e_span]`,
/// `c` the mean site energy.
///
/// The error estimate adds the Simpson halving difference to the bound
/// `2V² / (3 (e_span - R)³)` on the truncated tails, where `R` bounds the
/// distance of the poles from `c`.
pub fn f2_spectral<T: Real>(sys: &TwoSiteSystem<T>, e_span: T, n_points: usize) -> Result<Estimate<T>> {
    require_decay(sys)?;
    if n_points < 1000 {
        return Err(Error::validation("n_points", format!("n_points >= 1000 (got {n_points})")));
    }
    if !(e_span > T::zero()) || !e_span.is_finite() {
        return Err(Error::validation("e_span", format!("e_span > 0 (got {e_span})")));
    }
    if sys.coupling == T::zero() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    // intervals a multiple of 4 so the half-resolution rule is also Simpson
    let intervals = (n_points - 1).div_ceil(4) * 4;
    let centre = (sys.omega1 + sys.omega2) * T::half();
    let h = T::two() * e_span / T::from_usize_lossy(intervals);
    let start = centre - e_span;
    let values: Vec<T> = (0..=intervals)
        .map(|k| green_12_sq(sys, start + h * T::from_usize_lossy(k)))
        .collect();
    let fine = simpson(&values, h);
    let coarse_values: Vec<T> = values.iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse_values, h * T::two());

    let reach = sys.abs_omega() * T::half() + sys.gamma_mean() * T::half() + sys.omega0().abs() * T::half();
    let tail = if e_span > reach {
        let gap = e_span - reach;
        T::two() * sys.coupling * sys.coupling / (T::lit(3.0) * gap * gap * gap)
    } else {
        T::infinity()
    };
    let scale = sys.gamma2 / (T::two() * T::PI());
    Ok(Estimate {
        value: scale * fine,
        error: scale * ((fine - coarse).abs() + tail),
    })
}

/// Chooses `e_span` and the point count for [`f2_spectral`] from the pole
/// positions so that the tail bound is below `tol/2` and the grid resolves
/// the narrowest resonance.
pub fn spectral_resolution<T: Real>(sys: &TwoSiteSystem<T>, tol: T) -> (T, usize) {
    let reach = sys.abs_omega() * T::half() + sys.gamma_mean() * T::half() + sys.omega0().abs() * T::half();
    let v2 = sys.coupling * sys.coupling;
    let scale = sys.gamma2 / (T::two() * T::PI());
    let gap = (scale * T::two() * v2 / (T::lit(3.0) * tol * T::half())).cbrt();
    let floor = T::lit(20.0)
        * sys
            .omega0()
            .abs()
            .max(sys.coupling)
            .max(sys.gamma_mean());
    let span = (reach + gap).max(floor);
    let width = (sys.slowest_population_decay() * T::half()).max(T::epsilon());
    let h = width / T::lit(16.0);
    let points = (T::two() * span / h)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .clamp(1001, 8_000_001);
    (span, points)
}

/// [`f2_spectral`] with [`spectral_resolution`] settings.
pub fn f2_spectral_auto<T: Real>(sys: &TwoSiteSystem<T>, tol: T) -> Result<Estimate<T>> {
    require_decay(sys)?;
    let (span, points) = spectral_resolution(sys, tol);
    f2_spectral(sys, span, points)
}

fn simpson<T: Real>(values: &[T], h: T) -> T {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut odd = T::zero();
    let mut even = T::zero();
    for (k, &v) in values.iter().enumerate().take(n).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / T::lit(3.0) * (values[0] + values[n] + T::lit(4.0) * odd + T::two() * even)
}

/// Options for [`network_branching_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchingOptions<T> {
    pub integrator: IntegratorOptions<T>,
    /// Largest acceptable loss still to come after the horizon.
    pub tolerance: T,
}

impl<T: Real> Default for BranchingOptions<T> {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            tolerance: T::lit(1e-6),
        }
    }
}

struct LossRun<T> {
    losses: Vec<T>,
    /// survival at horizon/2, 3·horizon/4 and horizon
    checkpoints: [T; 3],
}

fn integrate_losses<T: Real>(net: &SiteNetwork<T>, initial: &[Complex<T>], horizon: T, steps: usize) -> LossRun<T> {
    let mut rk = Rk4::new(net);
    let mut psi = initial.to_vec();
    let mut q = vec![T::zero(); net.site_count()];
    let h = horizon / T::from_usize_lossy(steps);
    let mut checkpoints = [T::zero(); 3];
    let survival = |psi: &[Complex<T>]| psi.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
    for k in 1..=steps {
        rk.step(&mut psi, &mut q, h);
        if k == steps / 2 {
            checkpoints[0] = survival(&psi);
        } else if k == 3 * steps / 4 {
            checkpoints[1] = survival(&psi);
        }
    }
    checkpoints[2] = survival(&psi);
    LossRun {
        losses: q,
        checkpoints,
    }
}

/// Per-site fractions `F_k = γ_k ∫₀^horizon |ψ_k|² dt` with default options.
pub fn network_branching<T: Real>(net: &SiteNetwork<T>, initial: &[Complex<T>], horizon: T) -> Result<BranchingResult<T>> {
    network_branching_with(net, initial, horizon, &BranchingOptions::default())
}

/// Integrates the losses alongside the amplitudes so that
/// `Σ F_k + ‖ψ(horizon)‖² = 1` holds up to the RK4 error.
///
/// Convergence in the horizon is judged from the survival at `H/2`, `3H/4`
/// and `H`: the remaining loss is extrapolated geometrically, and a horizon
/// that leaves more than `tolerance` of it still to come is an accuracy
/// error carrying a suggested horizon. Survival that has stopped decreasing
/// (a dark subspace) is reported, not treated as an error.
pub fn network_branching_with<T: Real>(
    net: &SiteNetwork<T>,
    initial: &[Complex<T>],
    horizon: T,
    options: &BranchingOptions<T>,
) -> Result<BranchingResult<T>> {
    if initial.len() != net.site_count() {
        return Err(Error::domain(format!(
            "initial state has {} amplitudes for {} sites",
            initial.len(),
            net.site_count()
        )));
    }
    crate::dynamics::check_normalized(initial)?;
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::validation("horizon", format!("horizon > 0 (got {horizon})")));
    }
    let norm = Rk4::new(net).generator_norm();
    let steps = substeps_for(horizon, norm, &options.integrator).div_ceil(4) * 4;
    let coarse = integrate_losses(net, initial, horizon, steps);
    let fine = integrate_losses(net, initial, horizon, 2 * steps);

    let diff = coarse
        .losses
        .iter()
        .zip(&fine.losses)
        .map(|(a, b)| (*a - *b).abs())
        .chain(std::iter::once((coarse.checkpoints[2] - fine.checkpoints[2]).abs()))
        .fold(T::zero(), T::max);
    let error_estimate = diff / T::lit(15.0);
    let bound = options.integrator.tolerance_per_time * horizon.max(T::one());
    if error_estimate > bound {
        return Err(Error::Accuracy {
            message: format!(
                "step-halving check failed: estimated error {:e} exceeds {:e}",
                error_estimate.to_f64_lossy(),
                bound.to_f64_lossy()
            ),
            recommended: (horizon / T::from_usize_lossy(4 * steps)).to_f64_lossy(),
        });
    }

    let [s_half, s_three_q, s_end] = fine.checkpoints;
    let tol = options.tolerance;
    if s_end > tol {
        let d1 = s_half - s_three_q;
        let d2 = s_three_q - s_end;
        if d2 > tol * T::lit(0.1) {
            let quarter = horizon * T::lit(0.25);
            let q = if d1 > T::zero() { d2 / d1 } else { T::one() };
            let suggested = if q < T::one() {
                let remaining = d2 * q / (T::one() - q);
                if remaining > tol {
                    Some(horizon + quarter * (remaining / tol).ln() / (T::one() / q).ln())
                } else {
                    None
                }
            } else {
                Some(horizon * T::two())
            };
            if let Some(h) = suggested {
                return Err(Error::Accuracy {
                    message: format!(
                        "horizon {horizon} too short: survival {:e} still decaying",
                        s_end.to_f64_lossy()
                    ),
                    recommended: h.max(horizon * T::lit(1.25)).to_f64_lossy(),
                });
            }
        }
    }

    Ok(BranchingResult {
        fractions: fine.losses,
        survival: s_end,
        horizon,
        error_estimate,
    })
}

/// [`network_branching_with`] starting from `initial_horizon` (or `20/max γ`)
/// and following the suggested horizon until converged or `max_horizon`.
pub fn network_branching_auto<T: Real>(
    net: &SiteNetwork<T>,
    initial: &[Complex<T>],
    initial_horizon: Option<T>,
    max_horizon: T,
    options: &BranchingOptions<T>,
) -> Result<BranchingResult<T>> {
    let gmax = net.decays().iter().fold(T::zero(), |a, &g| a.max(g));
    let mut horizon = initial_horizon.unwrap_or_else(|| {
        if gmax > T::zero() {
            T::lit(20.0) / gmax
        } else {
            T::one()
        }
    });
    loop {
        match network_branching_with(net, initial, horizon, options) {
            Err(Error::Accuracy { recommended, message }) if message.starts_with("horizon") => {
                if horizon >= max_horizon {
                    return Err(Error::Accuracy { message, recommended });
                }
                horizon = T::lit(recommended).min(max_horizon);
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::localized;

    fn sys(w0: f64, v: f64, g1: f64, g2: f64) -> TwoSiteSystem<f64> {
        TwoSiteSystem::new(0.0, w0, v, g1, g2).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(f2_closed(&sys(0.3, 0.0, 0.1, 0.2)).unwrap(), 0.0);
        let big = f2_closed(&sys(0.0, 1e6, 0.3, 0.3)).unwrap();
        assert!((big - 0.5).abs() < 1e-9);
        let s = sys(0.5, 1.0, 0.1, 0.1);
        assert!((f2_closed(&s).unwrap() - 2.0 / 4.26).abs() < 1e-15);
        assert_eq!(f2_closed(&sys(0.0, 1.0, 0.0, 0.1)).unwrap_err().code(), "channel_closed");
        assert_eq!(f2_closed(&sys(0.0, 1.0, 0.1, 0.0)).unwrap_err().code(), "channel_closed");
    }

    #[test]
    fn time_domain_examples() {
        let s = sys(0.5, 1.0, 0.1, 0.1);
        let est = f2_time_domain_auto(&s, 1e-9).unwrap();
        assert!((est.value - 2.0 / 4.26).abs() < 1e-8, "{est:?}");
        assert!(est.error < 1e-8);
        assert_eq!(f2_time_domain(&sys(0.5, 0.0, 0.1, 0.1), 10.0, 1e-6).unwrap().value, 0.0);
        assert_eq!(f2_time_domain(&sys(0.5, 1.0, 0.0, 0.0), 10.0, 1e-6).unwrap_err().code(), "domain");
        match f2_time_domain(&s, 5.0, 1e-6) {
            Err(Error::Accuracy { recommended, .. }) => assert!(recommended > 5.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn time_domain_handles_closed_first_channel() {
        // γ1 = 0: everything eventually leaves through channel 2.
        let s = sys(0.0, 1.0, 0.0, 0.4);
        let est = f2_time_domain_auto(&s, 1e-9).unwrap();
        assert!((est.value - 1.0).abs() < 1e-7, "{est:?}");
        let spec = f2_spectral_auto(&s, 1e-8).unwrap();
        assert!((spec.value - est.value).abs() < 1e-6_f64.max(spec.error));
    }

    #[test]
    fn spectral_examples() {
        let s = sys(0.0, 1.0, 0.1, 0.1);
        let est = f2_spectral_auto(&s, 1e-8).unwrap();
        let expect = 2.0 / (0.01 + 4.0);
        assert!((est.value - expect).abs() < 1e-6, "{est:?}");
        assert!((est.value - expect).abs() <= est.error.max(1e-6));
        assert_eq!(f2_spectral(&sys(0.0, 0.0, 0.1, 0.1), 100.0, 2000).unwrap().value, 0.0);
        assert!(f2_spectral(&s, 100.0, 10).is_err());
        assert!(f2_spectral(&sys(0.0, 1.0, 0.0, 0.0), 100.0, 2000).is_err());
    }

    #[test]
    fn green_function_inverts_resolvent() {
        let s = sys(0.4, 0.8, 0.2, 0.6);
        let e = 0.37;
        let a = Complex::new(e - s.omega1, s.gamma1 / 2.0);
        let b = Complex::new(e - s.omega2, s.gamma2 / 2.0);
        let v = Complex::new(-s.coupling, 0.0);
        // off-diagonal of the inverse of [[a, v], [v, b]]
        let g12 = -v / (a * b - v * v);
        assert!((g12.norm_sqr() - green_12_sq(&s, e)).abs() < 1e-15);
    }

    #[test]
    fn network_examples() {
        let s = sys(0.5, 1.0, 0.1, 0.1);
        let net = SiteNetwork::from_two_site(&s);
        let init = localized(2, 0).unwrap();
        let res = network_branching_auto(&net, &init, None, 1e4, &BranchingOptions::default()).unwrap();
        assert!((res.fractions[1] - f2_closed(&s).unwrap()).abs() < 1e-6, "{res:?}");
        assert!((res.total() - 1.0).abs() < 1e-6);

        let dark = SiteNetwork::<f64>::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let res = network_branching(&dark, &init, 10.0).unwrap();
        assert_eq!(res.fractions, vec![0.0, 0.0]);
        assert!((res.survival - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chain_drains_through_single_sink() {
        let c = vec![
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ];
        let net = SiteNetwork::<f64>::new(vec![0.0; 3], vec![0.0, 0.0, 0.5], c).unwrap();
        let init = localized(3, 0).unwrap();
        let res = network_branching_auto(&net, &init, None, 1e4, &BranchingOptions::default()).unwrap();
        assert!((res.fractions[2] - 1.0).abs() < 1e-5, "{res:?}");
        assert!((res.total() - 1.0).abs() < 1e-6);
        let short = network_branching(&net, &init, 5.0);
        assert_eq!(short.unwrap_err().code(), "accuracy");
    }
}
