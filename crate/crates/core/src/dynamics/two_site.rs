use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

use super::Trajectory;

/// Effective non-Hermitian model of two coupled boson states.
///
/// The generator is
///
/// ```text
/// H = [ ω1 - iγ1/2      V       ]
///     [     V       ω2 - iγ2/2  ]
/// ```
///
/// so that `|ψ_k|²` decays at rate `γ_k` in the absence of coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSiteSystem<T> {
    pub omega1: T,
    pub omega2: T,
    pub coupling: T,
    pub gamma1: T,
    pub gamma2: T,
}

/// Dynamical regime of the degenerate two-site system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Coherent,
    Incoherent,
    Exceptional,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Coherent => "coherent",
            Regime::Incoherent => "incoherent",
            Regime::Exceptional => "exceptional",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime plus a flag set when `ω0 ≠ 0`. Detuned systems are classified by
/// the sign of `Re Ω²`, which has no exceptional point behind it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegimeClass {
    pub regime: Regime,
    pub detuned: bool,
}

/// Outcome of solving `Ω = 0` for the coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpSearch<T> {
    /// Critical coupling `V_c = |γ̄|/2`.
    Found(T),
    /// `ω0 γ̄ ≠ 0`: real and imaginary parts of `Ω²` cannot vanish together.
    Detuned,
    /// `γ̄ = 0`: no non-Hermitian splitting to cancel.
    Hermitian,
}

impl<T: Real> EpSearch<T> {
    pub fn reason(&self) -> Option<&'static str> {
        match self {
            EpSearch::Found(_) => None,
            EpSearch::Detuned => Some("detuned"),
            EpSearch::Hermitian => Some("hermitian"),
        }
    }
}

fn check_finite<T: Real>(key: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("a finite value (got {v})")))
    }
}

fn check_non_negative<T: Real>(key: &str, v: T) -> Result<()> {
    if v.is_finite() && v >= T::zero() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{key} >= 0 (got {v})")))
    }
}

impl<T: Real> TwoSiteSystem<T> {
    pub fn new(omega1: T, omega2: T, coupling: T, gamma1: T, gamma2: T) -> Result<Self> {
        check_finite("omega1", omega1)?;
        check_finite("omega2", omega2)?;
        check_non_negative("coupling", coupling)?;
        check_non_negative("gamma1", gamma1)?;
        check_non_negative("gamma2", gamma2)?;
        Ok(Self {
            omega1,
            omega2,
            coupling,
            gamma1,
            gamma2,
        })
    }

    /// Decay rates from bosonic deviations, `γ_i = Δ_i δ_i`.
    pub fn from_deviations(
        omega1: T,
        omega2: T,
        coupling: T,
        scales: (T, T),
        deviations: (T, T),
    ) -> Result<Self> {
        check_non_negative("scale1", scales.0)?;
        check_non_negative("scale2", scales.1)?;
        check_non_negative("delta1", deviations.0)?;
        check_non_negative("delta2", deviations.1)?;
        Self::new(
            omega1,
            omega2,
            coupling,
            scales.0 * deviations.0,
            scales.1 * deviations.1,
        )
    }

    /// `ω0 = ω2 - ω1`.
    pub fn omega0(&self) -> T {
        self.omega2 - self.omega1
    }

    /// `γ_d = (γ1 + γ2)/2`.
    pub fn gamma_mean(&self) -> T {
        (self.gamma1 + self.gamma2) * T::half()
    }

    /// `γ̄_d = (γ2 - γ1)/2`.
    pub fn gamma_half_diff(&self) -> T {
        (self.gamma2 - self.gamma1) * T::half()
    }

    /// `Ω² = 4V² + (ω0 - iγ̄)²`, assembled from real parts so that it is exact
    /// whenever its inputs are.
    pub fn omega_sq(&self) -> Complex<T> {
        let w = self.omega0();
        let g = self.gamma_half_diff();
        let four = T::lit(4.0);
        Complex::new(
            four * self.coupling * self.coupling + w * w - g * g,
            -T::two() * w * g,
        )
    }

    /// `Ω` on the branch with `Re Ω ≥ 0` (and `Im Ω ≥ 0` when `Re Ω = 0`).
    pub fn omega(&self) -> Complex<T> {
        let mut om = self.omega_sq().sqrt();
        if om.re < T::zero() || (om.re == T::zero() && om.im < T::zero()) {
            om = -om;
        }
        if om.re == T::zero() && om.im == T::zero() {
            om = Complex::new(T::zero(), T::zero());
        }
        om
    }

    pub fn abs_omega(&self) -> T {
        self.omega_sq().norm().sqrt()
    }

    /// `μ = (ω1 + ω2)/2 - iγ_d/2`, the centre of the eigenvalue pair.
    pub fn mean_eigenvalue(&self) -> Complex<T> {
        Complex::new(
            (self.omega1 + self.omega2) * T::half(),
            -self.gamma_mean() * T::half(),
        )
    }

    fn energy_scale(&self) -> T {
        (T::two() * self.coupling)
            .max(self.omega0().abs())
            .max(self.gamma_half_diff().abs())
    }

    /// `|Ω|` below which the system is treated as sitting on an exceptional point.
    pub fn ep_tolerance(&self) -> T {
        let rel = T::lit(1e-8).max(T::epsilon().sqrt() * T::half());
        rel * self.energy_scale()
    }

    pub fn is_exceptional(&self) -> bool {
        self.coupling > T::zero() && self.abs_omega() <= self.ep_tolerance()
    }

    /// Dense generator `H_eff`.
    pub fn generator(&self) -> [[Complex<T>; 2]; 2] {
        let v = Complex::new(self.coupling, T::zero());
        [
            [Complex::new(self.omega1, -self.gamma1 * T::half()), v],
            [v, Complex::new(self.omega2, -self.gamma2 * T::half())],
        ]
    }

    /// Slowest decay rate of any population component, `γ_d - |Ω_i|`.
    pub fn slowest_population_decay(&self) -> T {
        (self.gamma_mean() - self.omega().im.abs()).max(T::zero())
    }
}

/// Closed-form transfer probability
/// `P₁₂(t) = (2V²/|Ω|²) e^{-γ_d t} (cosh Ω_i t - cos Ω_r t)`.
///
/// Evaluated as `(4V²/|Ω|²) e^{-γ_d t} (sinh²(Ω_i t/2) + sin²(Ω_r t/2))`, which
/// avoids the cancellation between `cosh` and `cos` for small `|Ω| t`.
pub fn p12_closed<T: Real>(sys: &TwoSiteSystem<T>, t: T) -> Result<T> {
    check_time(t)?;
    if sys.coupling == T::zero() || t == T::zero() {
        return Ok(T::zero());
    }
    if sys.is_exceptional() {
        return Err(Error::ExceptionalPoint {
            abs_omega: sys.abs_omega().to_f64_lossy(),
        });
    }
    let om = sys.omega();
    let half_t = t * T::half();
    let sh = (om.im * half_t).sinh();
    let sn = (om.re * half_t).sin();
    let v = sys.coupling;
    let abs_sq = sys.omega_sq().norm();
    Ok(T::lit(4.0) * v * v / abs_sq * (-sys.gamma_mean() * t).exp() * (sh * sh + sn * sn))
}

/// `Ω → 0` limit of [`p12_closed`]: `V² t² e^{-γ_d t}`.
pub fn ep_limit<T: Real>(sys: &TwoSiteSystem<T>, t: T) -> Result<T> {
    check_time(t)?;
    if sys.abs_omega() > sys.ep_tolerance() {
        return Err(Error::domain(format!(
            "ep_limit requires an exceptional point; |Omega| = {:e} exceeds tolerance {:e}",
            sys.abs_omega().to_f64_lossy(),
            sys.ep_tolerance().to_f64_lossy()
        )));
    }
    let v = sys.coupling;
    Ok(v * v * t * t * (-sys.gamma_mean() * t).exp())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be finite and >= 0 (got {t})")))
    }
}

/// `sin z / z` with a series near the origin.
fn sinc<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1e-4) {
        let z2 = z * z;
        Complex::new(T::one(), T::zero()) - z2 / T::lit(6.0) + z2 * z2 / T::lit(120.0)
    } else {
        z.sin() / z
    }
}

/// Closed-form amplitudes for `ψ(0) = (1, 0)`, via the 2×2 identity
/// `exp(-iHt) = e^{-iμt} [cos(Ωt/2) - i t sinc(Ωt/2) (H - μ)]`. Valid on and
/// off the exceptional point.
pub fn amplitudes_closed<T: Real>(sys: &TwoSiteSystem<T>, t: T) -> [Complex<T>; 2] {
    let i = Complex::new(T::zero(), T::one());
    let om = sys.omega();
    let half = om * (t * T::half());
    let phase = (-i * sys.mean_eigenvalue() * t).exp();
    let c = half.cos();
    let s = sinc(half) * t;
    // H - μ has diagonal (-d, d) with d = (ω0 - iγ̄)/2
    let d = Complex::new(sys.omega0(), -sys.gamma_half_diff()) * T::half();
    let v = Complex::new(sys.coupling, T::zero());
    [phase * (c + i * s * d), phase * (-i * s * v)]
}

/// Classifies the exchange regime: coherent iff `2V > |γ̄|`.
pub fn classify_regime<T: Real>(sys: &TwoSiteSystem<T>) -> RegimeClass {
    let two_v = T::two() * sys.coupling;
    let g = sys.gamma_half_diff().abs();
    let w = sys.omega0();
    let detuned = w != T::zero();
    let tol = T::lit(1e-12);
    let regime = if !detuned {
        let scale = two_v.max(g);
        if (two_v - g).abs() <= tol * scale {
            Regime::Exceptional
        } else if two_v > g {
            Regime::Coherent
        } else {
            Regime::Incoherent
        }
    } else {
        let lhs = two_v * two_v + w * w;
        let rhs = g * g;
        if (lhs - rhs).abs() <= tol * lhs.max(rhs) {
            Regime::Exceptional
        } else if lhs > rhs {
            Regime::Coherent
        } else {
            Regime::Incoherent
        }
    };
    RegimeClass { regime, detuned }
}

/// Solves `Ω = 0` for `V`.
pub fn find_exceptional_point<T: Real>(gamma1: T, gamma2: T, omega0: T) -> Result<EpSearch<T>> {
    check_non_negative("gamma1", gamma1)?;
    check_non_negative("gamma2", gamma2)?;
    check_finite("omega0", omega0)?;
    let g = (gamma2 - gamma1) * T::half();
    if g == T::zero() {
        Ok(EpSearch::Hermitian)
    } else if omega0 != T::zero() {
        Ok(EpSearch::Detuned)
    } else {
        Ok(EpSearch::Found(g.abs() * T::half()))
    }
}

fn sort_pair<T: Real>(a: Complex<T>, b: Complex<T>) -> (Complex<T>, Complex<T>) {
    let a_first = a.re < b.re || (a.re == b.re && a.im <= b.im);
    if a_first {
        (a, b)
    } else {
        (b, a)
    }
}

/// Eigenvalues `μ ± Ω/2`, ordered by real then imaginary part.
pub fn eigenvalues<T: Real>(sys: &TwoSiteSystem<T>) -> (Complex<T>, Complex<T>) {
    let mu = sys.mean_eigenvalue();
    let half = sys.omega() * T::half();
    sort_pair(mu + half, mu - half)
}

/// Unnormalized right eigenvectors `(V, d ± Ω/2)` for eigenvalues `μ ± Ω/2`.
fn right_eigenvectors<T: Real>(sys: &TwoSiteSystem<T>) -> [[Complex<T>; 2]; 2] {
    let v = Complex::new(sys.coupling, T::zero());
    let d = Complex::new(sys.omega0(), -sys.gamma_half_diff()) * T::half();
    let half = sys.omega() * T::half();
    [[v, d + half], [v, d - half]]
}

/// Modulus of the normalized overlap of the two right eigenvectors: `0` for
/// orthogonal eigenvectors, `1` when they coalesce.
pub fn eigenvector_coalescence<T: Real>(sys: &TwoSiteSystem<T>) -> T {
    if sys.coupling == T::zero() {
        return T::zero();
    }
    let [a, b] = right_eigenvectors(sys);
    let dot = a[0].conj() * b[0] + a[1].conj() * b[1];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    (dot.norm() / (na * nb)).min(T::one())
}

/// One cell of an exceptional-point scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpScanRow<T> {
    pub coupling: T,
    pub gamma_diff: T,
    pub abs_omega_sq: T,
    pub regime: Regime,
    pub coalescence: T,
}

/// System with prescribed `γ̄` and the smallest non-negative rates realizing it.
pub fn system_for_gamma_diff<T: Real>(coupling: T, gamma_diff: T, omega0: T) -> Result<TwoSiteSystem<T>> {
    let (g1, g2) = if gamma_diff >= T::zero() {
        (T::zero(), T::two() * gamma_diff)
    } else {
        (-T::two() * gamma_diff, T::zero())
    };
    TwoSiteSystem::new(T::zero(), omega0, coupling, g1, g2)
}

fn check_increasing<T: Real>(key: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation(key, "a non-empty grid"));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(key, "a strictly increasing grid of finite values"));
    }
    Ok(())
}

/// Maps `|Ω|²`, regime and eigenvector coalescence over a `(V, γ̄)` grid.
/// Rows are ordered with `V` outermost.
pub fn ep_scan<T: Real>(v_grid: &[T], gamma_diff_grid: &[T], omega0: T) -> Result<Vec<EpScanRow<T>>> {
    check_increasing("v", v_grid)?;
    check_increasing("gamma_diff", gamma_diff_grid)?;
    check_finite("omega0", omega0)?;
    let mut rows = Vec::with_capacity(v_grid.len() * gamma_diff_grid.len());
    for &v in v_grid {
        for &g in gamma_diff_grid {
            rows.push(ep_scan_cell(v, g, omega0)?);
        }
    }
    Ok(rows)
}

/// A single cell of [`ep_scan`].
pub fn ep_scan_cell<T: Real>(coupling: T, gamma_diff: T, omega0: T) -> Result<EpScanRow<T>> {
    let sys = system_for_gamma_diff(coupling, gamma_diff, omega0)?;
    Ok(EpScanRow {
        coupling,
        gamma_diff,
        abs_omega_sq: sys.omega_sq().norm(),
        regime: classify_regime(&sys).regime,
        coalescence: eigenvector_coalescence(&sys),
    })
}

/// Number of grid intervals covering `[0, t_max]` at spacing `dt`.
pub(crate) fn grid_steps<T: Real>(t_max: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::validation("dt", format!("dt > 0 (got {dt})")));
    }
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::validation("t_max", format!("t_max >= 0 (got {t_max})")));
    }
    let ratio = t_max / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= T::lit(1e-9) * nearest.max(T::one()) {
        nearest
    } else {
        ratio.floor()
    };
    steps
        .to_usize()
        .ok_or_else(|| Error::validation("dt", "a grid with a representable number of steps"))
}

pub(crate) fn check_normalized<T: Real>(psi: &[Complex<T>]) -> Result<()> {
    let norm = psi.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    if (norm - T::one()).abs() > tol || !norm.is_finite() {
        return Err(Error::domain(format!(
            "initial amplitudes must be normalized (|psi|^2 = {norm})"
        )));
    }
    Ok(())
}

impl<T: Real> TwoSiteSystem<T> {
    /// Propagates `initial` by exact diagonalization of the 2×2 generator.
    ///
    /// Within the exceptional-point tolerance the generator is defective and
    /// the Jordan-form propagator `e^{-iμt} (1 - i t (H - μ))` is used.
    pub fn propagate(&self, initial: [Complex<T>; 2], t_max: T, dt: T) -> Result<Trajectory<T>> {
        check_normalized(&initial)?;
        let steps = grid_steps(t_max, dt)?;
        let evolve = self.evolution(initial);
        let mut traj = Trajectory::with_capacity(2, steps + 1);
        for k in 0..=steps {
            let t = T::from_usize_lossy(k) * dt;
            let psi = if k == 0 { initial } else { evolve(t) };
            traj.push(t, psi.iter().map(|c| c.norm_sqr()).collect());
        }
        Ok(traj)
    }

    /// Amplitudes at a single time.
    pub fn amplitudes(&self, initial: [Complex<T>; 2], t: T) -> Result<[Complex<T>; 2]> {
        check_normalized(&initial)?;
        check_time(t)?;
        Ok(self.evolution(initial)(t))
    }

    fn evolution(&self, initial: [Complex<T>; 2]) -> impl Fn(T) -> [Complex<T>; 2] + '_ {
        let i = Complex::new(T::zero(), T::one());
        let h = self.generator();
        let mu = self.mean_eigenvalue();
        enum Mode<T> {
            Diagonal,
            Jordan,
            Eigen {
                lambdas: [Complex<T>; 2],
                vectors: [[Complex<T>; 2]; 2],
                coeffs: [Complex<T>; 2],
            },
        }
        let mode = if self.coupling == T::zero() {
            Mode::Diagonal
        } else if self.abs_omega() <= self.ep_tolerance() {
            Mode::Jordan
        } else {
            let half = self.omega() * T::half();
            let lambdas = [mu + half, mu - half];
            // (H - λ) v = 0  =>  v = (V, λ - h11)
            let vectors = [
                [h[0][1], lambdas[0] - h[0][0]],
                [h[0][1], lambdas[1] - h[0][0]],
            ];
            // Solve c0 v0 + c1 v1 = ψ0 with Cramer's rule on U = [v0 v1].
            let det = vectors[0][0] * vectors[1][1] - vectors[1][0] * vectors[0][1];
            let c0 = (initial[0] * vectors[1][1] - vectors[1][0] * initial[1]) / det;
            let c1 = (vectors[0][0] * initial[1] - initial[0] * vectors[0][1]) / det;
            Mode::Eigen {
                lambdas,
                vectors,
                coeffs: [c0, c1],
            }
        };
        move |t: T| match &mode {
            Mode::Diagonal => [
                initial[0] * (-i * h[0][0] * t).exp(),
                initial[1] * (-i * h[1][1] * t).exp(),
            ],
            Mode::Jordan => {
                let phase = (-i * mu * t).exp();
                let a = [h[0][0] - mu, h[0][1]];
                let b = [h[1][0], h[1][1] - mu];
                let it = i * t;
                [
                    phase * (initial[0] - it * (a[0] * initial[0] + a[1] * initial[1])),
                    phase * (initial[1] - it * (b[0] * initial[0] + b[1] * initial[1])),
                ]
            }
            Mode::Eigen {
                lambdas,
                vectors,
                coeffs,
            } => {
                let e0 = coeffs[0] * (-i * lambdas[0] * t).exp();
                let e1 = coeffs[1] * (-i * lambdas[1] * t).exp();
                [
                    e0 * vectors[0][0] + e1 * vectors[1][0],
                    e0 * vectors[0][1] + e1 * vectors[1][1],
                ]
            }
        }
    }
}
