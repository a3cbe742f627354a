use crate::scalar::Real;

/// Populations sampled on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    sites: usize,
    times: Vec<T>,
    populations: Vec<T>,
    norm: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub(crate) fn with_capacity(sites: usize, samples: usize) -> Self {
        Self {
            sites,
            times: Vec::with_capacity(samples),
            populations: Vec::with_capacity(samples * sites),
            norm: Vec::with_capacity(samples),
        }
    }

    pub(crate) fn push(&mut self, t: T, populations: Vec<T>) {
        debug_assert_eq!(populations.len(), self.sites);
        let total = populations.iter().fold(T::zero(), |acc, &p| acc + p);
        self.times.push(t);
        self.populations.extend(populations);
        self.norm.push(total);
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Site populations at sample `k`.
    pub fn populations(&self, k: usize) -> &[T] {
        &self.populations[k * self.sites..(k + 1) * self.sites]
    }

    /// Population of one site across the whole grid.
    pub fn site(&self, site: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |k| self.populations[k * self.sites + site])
    }

    /// `Σ_k |ψ_k(t)|²` at every sample.
    pub fn total_norm(&self) -> &[T] {
        &self.norm
    }

    /// `P₁₁ - P₁₂` for two-site trajectories.
    pub fn population_difference(&self) -> Option<Vec<T>> {
        (self.sites == 2).then(|| {
            (0..self.len())
                .map(|k| {
                    let p = self.populations(k);
                    p[0] - p[1]
                })
                .collect()
        })
    }

    /// Largest absolute population difference against another trajectory on
    /// the same grid.
    pub fn max_population_deviation(&self, other: &Self) -> T {
        assert_eq!(self.sites, other.sites, "site counts differ");
        assert_eq!(self.len(), other.len(), "grid lengths differ");
        self.populations
            .iter()
            .zip(&other.populations)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}
