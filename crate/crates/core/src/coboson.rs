//! Composite-boson statistics derived from a Schmidt spectrum.
//!
//! A pair wavefunction with Schmidt coefficients `λ_j` defines the
//! normalization factors `χ_N = N! e_N(λ)` of the `N`-pair state, where `e_N`
//! is the elementary symmetric polynomial. Every deviation-from-bosonic
//! measure here is a function of consecutive ratios of these factors.

use crate::error::{Error, Result};
use crate::scalar::{log_add_exp, Real};

/// Above this many modes the `χ` recurrence runs in log space.
const LOG_SPACE_MODE_THRESHOLD: usize = 300;

/// Normalized Schmidt coefficients in non-increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum<T> {
    coefficients: Vec<T>,
}

impl<T: Real> SchmidtSpectrum<T> {
    /// Builds a spectrum from raw non-negative weights, normalizing them to sum
    /// to one. Weights are sorted before summation, so any permutation of the
    /// same input yields a bit-identical spectrum.
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("spectrum needs at least one weight"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < T::zero())
        {
            return Err(Error::domain(format!(
                "weight {i} = {w} must be finite and non-negative"
            )));
        }
        let mut sorted = weights.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
        let total = sorted.iter().fold(T::zero(), |acc, &w| acc + w);
        if total <= T::zero() {
            return Err(Error::domain("spectrum weights sum to zero"));
        }
        let coefficients = sorted.into_iter().map(|w| w / total).collect();
        Ok(Self { coefficients })
    }

    /// `J` equally weighted modes.
    pub fn uniform(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::domain("uniform spectrum needs at least one mode"));
        }
        let w = T::one() / T::from_usize_lossy(modes);
        Ok(Self {
            coefficients: vec![w; modes],
        })
    }

    /// Parses one weight per line; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let value: f64 = line.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                column: raw.find(line).map_or(1, |c| c + 1),
                message: format!("expected a non-negative number, found `{line}`"),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Parse {
                    line: idx + 1,
                    column: 1,
                    message: format!("weight `{line}` must be finite and non-negative"),
                });
            }
            weights.push(T::lit(value));
        }
        Self::from_weights(&weights)
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn mode_count(&self) -> usize {
        self.coefficients.len()
    }

    /// `P = Σ λ_j²`.
    pub fn purity(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |acc, &l| acc + l * l)
    }

    /// `K = 1 / P`, the effective number of occupied modes.
    pub fn schmidt_number(&self) -> T {
        T::one() / self.purity()
    }
}

/// `ln χ_k` for `k = 0..=kmax`, with `-inf` standing for an exact zero.
#[derive(Clone, Debug)]
struct ChiTable<T> {
    log_chi: Vec<T>,
}

impl<T: Real> ChiTable<T> {
    fn build(lambda: &[T], kmax: usize) -> Self {
        let top = kmax.min(lambda.len());
        let mut log_chi = if lambda.len() > LOG_SPACE_MODE_THRESHOLD {
            Self::log_recurrence(lambda, top)
        } else {
            let linear = Self::linear_recurrence(lambda, top);
            let floor = T::min_positive_value() / T::epsilon();
            if linear.iter().any(|&c| c < floor) {
                Self::log_recurrence(lambda, top)
            } else {
                linear.into_iter().map(T::ln).collect()
            }
        };
        log_chi.resize(kmax + 1, T::neg_infinity());
        // χ_0 = 1 (empty product) and χ_1 = Σλ = 1 hold exactly.
        log_chi[0] = T::zero();
        if kmax >= 1 {
            log_chi[1] = T::zero();
        }
        Self { log_chi }
    }

    /// `χ_k^{(j)} = χ_k^{(j-1)} + k λ_j χ_{k-1}^{(j-1)}`: the prefix recurrence
    /// for `e_k` scaled by `k!`. Every term is non-negative and bounded by one.
    fn linear_recurrence(lambda: &[T], top: usize) -> Vec<T> {
        let mut chi = vec![T::zero(); top + 1];
        chi[0] = T::one();
        for (j, &l) in lambda.iter().enumerate() {
            for k in (1..=top.min(j + 1)).rev() {
                let prev = chi[k - 1];
                chi[k] += T::from_usize_lossy(k) * l * prev;
            }
        }
        chi
    }

    fn log_recurrence(lambda: &[T], top: usize) -> Vec<T> {
        let mut log_chi = vec![T::neg_infinity(); top + 1];
        log_chi[0] = T::zero();
        let log_k: Vec<T> = (0..=top).map(|k| T::from_usize_lossy(k).ln()).collect();
        for (j, &l) in lambda.iter().enumerate() {
            if l == T::zero() {
                continue;
            }
            let log_l = l.ln();
            for k in (1..=top.min(j + 1)).rev() {
                let term = log_k[k] + log_l + log_chi[k - 1];
                log_chi[k] = log_add_exp(log_chi[k], term);
            }
        }
        log_chi
    }

    fn kmax(&self) -> usize {
        self.log_chi.len() - 1
    }

    fn chi(&self, k: usize) -> T {
        self.log_chi[k].exp()
    }

    fn is_zero(&self, k: usize) -> bool {
        self.log_chi[k] == T::neg_infinity()
    }

    /// `χ_{k+1} / χ_k`.
    fn ratio(&self, k: usize) -> Result<T> {
        if self.is_zero(k) {
            return Err(Error::domain(format!(
                "chi_{k} = 0 (more pairs than Schmidt modes); the ratio chi_{}/chi_{k} is undefined",
                k + 1
            )));
        }
        Ok((self.log_chi[k + 1] - self.log_chi[k]).exp())
    }

    fn ideality_alpha(&self, n: usize) -> Result<T> {
        require_positive_pairs(n)?;
        Ok(self.ratio(n - 1)?.sqrt())
    }

    fn pair_number_mean(&self, n: usize) -> Result<T> {
        require_positive_pairs(n)?;
        let r = self.ratio(n)?;
        Ok(T::one() + T::from_usize_lossy(n - 1) * r)
    }

    fn commutator_mean(&self, n: usize) -> Result<T> {
        require_positive_pairs(n)?;
        Ok(T::two() * self.ratio(n)? - T::one())
    }

    fn fragment_norm(&self, n: usize) -> Result<T> {
        require_positive_pairs(n)?;
        let lower = self.ratio(n - 1)?;
        let upper = self.ratio(n)?;
        Ok(T::one() - upper - T::from_usize_lossy(n) * (lower - upper))
    }
}

fn require_positive_pairs(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("pair number n must be at least 1"))
    } else {
        Ok(())
    }
}

/// `χ_n = n! e_n(λ)`; exactly zero when `n > J`.
pub fn chi<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> T {
    ChiTable::build(spectrum.coefficients(), n).chi(n)
}

/// `χ_{n+1} / χ_n`, the degree of ideal bosonization at `n` pairs.
pub fn chi_ratio<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    require_positive_pairs(n)?;
    ChiTable::build(spectrum.coefficients(), n + 1).ratio(n)
}

/// `α_n = sqrt(χ_n / χ_{n-1})`.
pub fn ideality_alpha<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    ChiTable::build(spectrum.coefficients(), n).ideality_alpha(n)
}

/// `1 + (n - 1) χ_{n+1}/χ_n`.
///
/// This is the expression for the pair-number mean in its commonly quoted
/// form; note that it does not reduce to `n` for the literal number operator.
pub fn pair_number_mean<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    ChiTable::build(spectrum.coefficients(), n + 1).pair_number_mean(n)
}

/// `⟨n|[B, B†]|n⟩ = 2 χ_{n+1}/χ_n - 1`: `+1` for ideal bosons, `-1` for a
/// single hard-core mode.
pub fn commutator_mean<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    ChiTable::build(spectrum.coefficients(), n + 1).commutator_mean(n)
}

/// Norm of the fragment state, `1 - r_n - n (r_{n-1} - r_n)` with
/// `r_k = χ_{k+1}/χ_k`. Returned unclamped; see [`clamp_unit`] for reporting.
pub fn fragment_norm<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<T> {
    ChiTable::build(spectrum.coefficients(), n + 1).fragment_norm(n)
}

/// Bounds `(1 - P n, 1 - P)` that always bracket `χ_{n+1}/χ_n`.
pub fn purity_bounds<T: Real>(spectrum: &SchmidtSpectrum<T>, n: usize) -> Result<(T, T)> {
    require_positive_pairs(n)?;
    let p = spectrum.purity();
    Ok((T::one() - p * T::from_usize_lossy(n), T::one() - p))
}

/// Clamps a raw measure into `[0, 1]` for display.
pub fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// A spectrum together with a pair count and its cached `χ_0..=χ_{N+1}`.
#[derive(Clone, Debug)]
pub struct CobosonEnsemble<T> {
    spectrum: SchmidtSpectrum<T>,
    pair_count: usize,
    table: ChiTable<T>,
}

/// All ratio-derived measures of an ensemble at its own pair count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleMeasures<T> {
    pub chi_ratio: T,
    pub lower_bound: T,
    pub upper_bound: T,
    pub ideality_alpha: T,
    pub pair_number_mean: T,
    pub commutator_mean: T,
    pub fragment_norm: T,
}

impl<T: Real> CobosonEnsemble<T> {
    pub fn new(spectrum: SchmidtSpectrum<T>, pair_count: usize) -> Result<Self> {
        require_positive_pairs(pair_count)?;
        let table = ChiTable::build(spectrum.coefficients(), pair_count + 1);
        Ok(Self {
            spectrum,
            pair_count,
            table,
        })
    }

    pub fn spectrum(&self) -> &SchmidtSpectrum<T> {
        &self.spectrum
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    fn check_cached(&self, k: usize) -> Result<()> {
        if k > self.table.kmax() {
            Err(Error::domain(format!(
                "index {k} exceeds the cached chi table (pair count {})",
                self.pair_count
            )))
        } else {
            Ok(())
        }
    }

    /// Cached `χ_k` for `k ≤ N + 1`.
    pub fn chi(&self, k: usize) -> Result<T> {
        self.check_cached(k)?;
        Ok(self.table.chi(k))
    }

    /// Cached `ln χ_k`, `-inf` when `χ_k = 0`. Finite even where `χ_k`
    /// itself underflows.
    pub fn log_chi(&self, k: usize) -> Result<T> {
        self.check_cached(k)?;
        Ok(self.table.log_chi[k])
    }

    /// `χ_{k+1} / χ_k` for `1 ≤ k ≤ N`.
    pub fn chi_ratio(&self, k: usize) -> Result<T> {
        require_positive_pairs(k)?;
        self.check_cached(k + 1)?;
        self.table.ratio(k)
    }

    pub fn measures(&self) -> Result<EnsembleMeasures<T>> {
        let n = self.pair_count;
        let (lower_bound, upper_bound) = purity_bounds(&self.spectrum, n)?;
        Ok(EnsembleMeasures {
            chi_ratio: self.table.ratio(n)?,
            lower_bound,
            upper_bound,
            ideality_alpha: self.table.ideality_alpha(n)?,
            pair_number_mean: self.table.pair_number_mean(n)?,
            commutator_mean: self.table.commutator_mean(n)?,
            fragment_norm: self.table.fragment_norm(n)?,
        })
    }
}

/// Quantum-dot confinement expressed as the ratio `r = a_B / L` of exciton
/// Bohr radius to dot size. `r = 0` is the ideal-boson limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumDotGeometry<T> {
    bohr_ratio: T,
}

impl<T: Real> QuantumDotGeometry<T> {
    pub fn new(bohr_ratio: T) -> Result<Self> {
        if !bohr_ratio.is_finite() || bohr_ratio < T::zero() {
            return Err(Error::validation(
                "bohr_ratio",
                format!("a finite value >= 0 (got {bohr_ratio})"),
            ));
        }
        Ok(Self { bohr_ratio })
    }

    pub fn bohr_ratio(&self) -> T {
        self.bohr_ratio
    }

    /// Largest `n` with `2 (n - 1) r² < 1`; `None` when unbounded (`r = 0`).
    pub fn max_pairs(&self) -> Option<usize> {
        let r2 = self.bohr_ratio * self.bohr_ratio;
        if r2 == T::zero() {
            return None;
        }
        let limit = (T::one() / (T::two() * r2)).ceil().to_usize()?;
        let mut n = limit.max(1);
        while n > 1 && !self.admits(n) {
            n -= 1;
        }
        while self.admits(n + 1) {
            n += 1;
        }
        Some(n)
    }

    fn admits(&self, n: usize) -> bool {
        let r2 = self.bohr_ratio * self.bohr_ratio;
        T::two() * T::from_usize_lossy(n.saturating_sub(1)) * r2 < T::one()
    }

    /// `α_n² = n (1 - 2 (n - 1) r²)`.
    fn alpha_sq(&self, n: usize) -> T {
        let r2 = self.bohr_ratio * self.bohr_ratio;
        T::from_usize_lossy(n) * (T::one() - T::two() * T::from_usize_lossy(n.saturating_sub(1)) * r2)
    }
}

/// Zero-delay second-order correlation `g₂(0) = α²_{n-1} α²_n / n²` of `n`
/// excitons in a quantum dot.
pub fn qdot_g2_zero<T: Real>(n: usize, geom: &QuantumDotGeometry<T>) -> Result<T> {
    if n < 2 {
        return Err(Error::domain(format!("qdot correlator needs n >= 2 (got {n})")));
    }
    if !geom.admits(n) {
        let max = geom.max_pairs().unwrap_or(usize::MAX);
        return Err(Error::domain(format!(
            "n = {n} violates 2(n-1)r^2 < 1 for r = {}; the maximum admissible n is {max}",
            geom.bohr_ratio
        )));
    }
    let nn = T::from_usize_lossy(n);
    Ok(geom.alpha_sq(n - 1) * geom.alpha_sq(n) / (nn * nn))
}

/// `δ = 1 - g₂(0)`.
pub fn bosonic_deviation<T: Real>(n: usize, geom: &QuantumDotGeometry<T>) -> Result<T> {
    Ok(T::one() - qdot_g2_zero(n, geom)?)
}

/// Degree of binding `α_d = 1 - E_c / E_b`.
pub fn binding_deviation<T: Real>(e_c: T, e_b: T) -> Result<T> {
    if !(e_b > T::zero()) || !e_b.is_finite() {
        return Err(Error::domain(format!("binding energy e_b must be > 0 (got {e_b})")));
    }
    if !(e_c >= T::zero() && e_c <= e_b) {
        return Err(Error::domain(format!(
            "pair binding energy e_c must lie in [0, e_b] (got {e_c}, e_b = {e_b})"
        )));
    }
    Ok(T::one() - e_c / e_b)
}

/// Ionization degree `α_i = 1 - n_b / n_f` of an electron-hole plasma.
pub fn ionization_degree<T: Real>(n_b: T, n_f: T) -> Result<T> {
    if !(n_f > T::zero()) || !n_f.is_finite() {
        return Err(Error::domain(format!("free-carrier density n_f must be > 0 (got {n_f})")));
    }
    if !(n_b >= T::zero() && n_b <= n_f) {
        return Err(Error::domain(format!(
            "bound density n_b must lie in [0, n_f] (got {n_b}, n_f = {n_f})"
        )));
    }
    Ok(T::one() - n_b / n_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(w: &[f64]) -> SchmidtSpectrum<f64> {
        SchmidtSpectrum::from_weights(w).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn construction_normalizes_and_sorts() {
        let s = spec(&[2.0, 5.0, 3.0]);
        assert_eq!(s.coefficients(), &[0.5, 0.3, 0.2]);
        assert_eq!(s.mode_count(), 3);
        assert!(SchmidtSpectrum::<f64>::from_weights(&[]).is_err());
        assert!(SchmidtSpectrum::from_weights(&[1.0, -0.1]).is_err());
        assert!(SchmidtSpectrum::from_weights(&[0.0, 0.0]).is_err());
        assert!(SchmidtSpectrum::from_weights(&[f64::NAN]).is_err());
    }

    #[test]
    fn parse_skips_comments_and_reports_lines() {
        let s = SchmidtSpectrum::<f64>::parse("# weights\n5\n\n3 # second\n2\n").unwrap();
        assert_eq!(s.coefficients(), &[0.5, 0.3, 0.2]);
        match SchmidtSpectrum::<f64>::parse("1\nabc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SchmidtSpectrum::<f64>::parse("1\n-2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn purity_and_schmidt_number() {
        close(spec(&[1.0]).purity(), 1.0, 0.0);
        close(spec(&[0.5, 0.5]).purity(), 0.5, 0.0);
        close(spec(&[0.5, 0.3, 0.2]).purity(), 0.38, 1e-15);
        close(spec(&[1.0]).schmidt_number(), 1.0, 0.0);
        close(spec(&[1.0, 1.0]).schmidt_number(), 2.0, 0.0);
        close(spec(&[0.5, 0.3, 0.2]).schmidt_number(), 1.0 / 0.38, 1e-14);
    }

    #[test]
    fn chi_examples() {
        let u4 = SchmidtSpectrum::<f64>::uniform(4).unwrap();
        close(chi(&u4, 2), 0.75, 1e-15);
        assert_eq!(chi(&spec(&[1.0]), 2), 0.0);
        let s = spec(&[0.5, 0.3, 0.2]);
        assert_eq!(chi(&s, 0), 1.0);
        assert_eq!(chi(&s, 1), 1.0);
        // 3! * 0.5*0.3*0.2
        close(chi(&s, 3), 0.18, 1e-15);
        assert_eq!(chi(&s, 4), 0.0);
    }

    #[test]
    fn chi_ratio_examples() {
        let u10 = SchmidtSpectrum::<f64>::uniform(10).unwrap();
        close(chi_ratio(&u10, 3).unwrap(), 0.7, 1e-14);
        assert_eq!(chi_ratio(&spec(&[1.0]), 1).unwrap(), 0.0);
        close(chi_ratio(&spec(&[0.5, 0.3, 0.2]), 2).unwrap(), 0.18 / 0.62, 1e-14);
        assert!(chi_ratio(&spec(&[1.0]), 2).is_err());
        assert!(chi_ratio(&u10, 0).is_err());
    }

    #[test]
    fn derived_measure_examples() {
        let u4 = SchmidtSpectrum::<f64>::uniform(4).unwrap();
        let one = spec(&[1.0]);
        let s = spec(&[0.5, 0.3, 0.2]);

        assert_eq!(ideality_alpha(&s, 1).unwrap(), 1.0);
        close(ideality_alpha(&u4, 2).unwrap(), 0.75f64.sqrt(), 1e-15);
        assert_eq!(ideality_alpha(&one, 2).unwrap(), 0.0);

        assert_eq!(pair_number_mean(&s, 1).unwrap(), 1.0);
        close(pair_number_mean(&u4, 2).unwrap(), 1.5, 1e-15);
        assert_eq!(pair_number_mean(&one, 2).unwrap_err().code(), "domain");
        assert_eq!(pair_number_mean(&one, 1).unwrap(), 1.0);

        assert_eq!(commutator_mean(&one, 1).unwrap(), -1.0);
        close(commutator_mean(&u4, 2).unwrap(), 0.0, 1e-15);

        assert_eq!(fragment_norm(&s, 1).unwrap(), 0.0);
        close(fragment_norm(&u4, 3).unwrap(), 0.0, 1e-14);
        let r2 = 0.18 / 0.62;
        close(fragment_norm(&s, 2).unwrap(), 1.0 - r2 - 2.0 * (0.62 - r2), 1e-14);
    }

    #[test]
    fn pair_number_mean_at_single_mode_limit() {
        // χ_2 = 0 for one mode, so the ratio at n = 1 vanishes.
        let one = spec(&[1.0]);
        assert_eq!(chi_ratio(&one, 1).unwrap(), 0.0);
        assert_eq!(pair_number_mean(&one, 1).unwrap(), 1.0);
    }

    #[test]
    fn purity_bound_examples() {
        let u10 = SchmidtSpectrum::<f64>::uniform(10).unwrap();
        let (lo, hi) = purity_bounds(&u10, 3).unwrap();
        close(lo, 0.7, 1e-15);
        close(hi, 0.9, 1e-15);
        assert_eq!(purity_bounds(&spec(&[1.0]), 1).unwrap(), (0.0, 0.0));
        let (lo, hi) = purity_bounds(&spec(&[0.5, 0.3, 0.2]), 2).unwrap();
        close(lo, 0.24, 1e-15);
        close(hi, 0.62, 1e-15);
    }

    #[test]
    fn log_space_path_agrees_with_closed_form() {
        // J above the log-space threshold: uniform ratio is 1 - n/J.
        let j = 4096;
        let u = SchmidtSpectrum::<f64>::uniform(j).unwrap();
        for n in 1..6 {
            close(chi_ratio(&u, n).unwrap(), 1.0 - n as f64 / j as f64, 1e-12);
        }
        // Deep in the tail chi itself underflows but the ratio does not.
        let small = SchmidtSpectrum::<f64>::uniform(200).unwrap();
        let ens = CobosonEnsemble::new(small, 190).unwrap();
        assert!(ens.log_chi(190).unwrap().is_finite());
        close(ens.chi_ratio(190).unwrap(), 1.0 - 190.0 / 200.0, 1e-10);
    }

    #[test]
    fn ensemble_matches_free_functions() {
        let s = spec(&[0.4, 0.25, 0.2, 0.1, 0.05]);
        let ens = CobosonEnsemble::new(s.clone(), 3).unwrap();
        let m = ens.measures().unwrap();
        assert_eq!(m.chi_ratio, chi_ratio(&s, 3).unwrap());
        assert_eq!(m.fragment_norm, fragment_norm(&s, 3).unwrap());
        assert_eq!(m.commutator_mean, 2.0 * m.chi_ratio - 1.0);
        assert_eq!(ens.chi(0).unwrap(), 1.0);
        assert_eq!(ens.chi(1).unwrap(), 1.0);
        assert!(ens.chi(5).is_err());
        assert!(ens.chi_ratio(4).is_err());
        assert!(CobosonEnsemble::new(s, 0).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let s = SchmidtSpectrum::<f32>::from_weights(&[0.5, 0.3, 0.2]).unwrap();
        assert!((chi_ratio(&s, 2).unwrap() - 0.290_322_6).abs() < 1e-6);
        assert!((s.purity() - 0.38).abs() < 1e-6);
    }

    #[test]
    fn qdot_examples() {
        let ideal = QuantumDotGeometry::new(0.0f64).unwrap();
        assert_eq!(qdot_g2_zero(2, &ideal).unwrap(), 0.5);
        assert_eq!(bosonic_deviation(2, &ideal).unwrap(), 0.5);
        let g = QuantumDotGeometry::new(0.1f64).unwrap();
        close(qdot_g2_zero(2, &g).unwrap(), 0.49, 1e-15);
        close(bosonic_deviation(2, &g).unwrap(), 0.51, 1e-15);
        for n in [2usize, 10, 1000, 100_000] {
            assert_eq!(qdot_g2_zero(n, &ideal).unwrap(), (n as f64 - 1.0) / n as f64);
        }
        assert!(qdot_g2_zero(1, &g).is_err());
    }

    #[test]
    fn qdot_validity_domain() {
        // r = 0.1: 2(n-1)/100 < 1  <=>  n < 51
        let g = QuantumDotGeometry::new(0.1f64).unwrap();
        assert_eq!(g.max_pairs(), Some(50));
        assert!(qdot_g2_zero(50, &g).is_ok());
        let err = qdot_g2_zero(51, &g).unwrap_err();
        assert!(err.to_string().contains("maximum admissible n is 50"), "{err}");
        assert_eq!(QuantumDotGeometry::new(0.0f64).unwrap().max_pairs(), None);
        assert!(QuantumDotGeometry::new(-0.1f64).is_err());
    }

    #[test]
    fn deviation_increases_with_bohr_ratio() {
        for n in [2usize, 5, 20] {
            let mut last = f64::NEG_INFINITY;
            for i in 0..200 {
                let r = 0.0005 * i as f64;
                let g = QuantumDotGeometry::new(r).unwrap();
                let d = bosonic_deviation(n, &g).unwrap();
                assert!(i == 0 || d > last, "n={n} r={r}");
                last = d;
            }
        }
    }

    #[test]
    fn binding_and_ionization() {
        assert_eq!(binding_deviation(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(binding_deviation(0.0, 10.0).unwrap(), 1.0);
        assert_eq!(binding_deviation(2.5, 10.0).unwrap(), 0.75);
        assert!(binding_deviation(1.0, 0.0).is_err());
        assert!(binding_deviation(11.0, 10.0).is_err());
        assert!(binding_deviation(-1.0, 10.0).is_err());

        assert_eq!(ionization_degree(4.0, 4.0).unwrap(), 0.0);
        assert_eq!(ionization_degree(0.0, 4.0).unwrap(), 1.0);
        assert_eq!(ionization_degree(3.0, 4.0).unwrap(), 0.25);
        assert!(ionization_degree(5.0, 4.0).is_err());
        assert!(ionization_degree(1.0, -4.0).is_err());
    }
}
