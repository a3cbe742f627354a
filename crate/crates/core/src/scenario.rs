//! Scenario documents: a JSON description of one computation or parameter
//! sweep, strict about unknown keys, plus the built-in figure presets.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::coboson::{QuantumDotGeometry, SchmidtSpectrum};
use crate::dynamics::SiteNetwork;
use crate::error::{Error, Result};
use crate::scalar::linspace;

/// Newest document version this loader understands.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    CobosonSweep,
    Tunnel,
    EpScan,
    BranchingSweep,
    Network,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::CobosonSweep => "coboson_sweep",
            Kind::Tunnel => "tunnel",
            Kind::EpScan => "ep_scan",
            Kind::BranchingSweep => "branching_sweep",
            Kind::Network => "network",
        }
    }

    /// Parameters that may be given as a sweep axis instead of a fixed value.
    pub fn sweepable(self) -> &'static [&'static str] {
        match self {
            Kind::CobosonSweep => &["n", "r"],
            Kind::Tunnel => &["omega0", "v", "gamma1", "gamma2", "delta1", "delta2"],
            Kind::EpScan => &["v", "gamma_diff", "omega0"],
            Kind::BranchingSweep => &["delta1", "delta2", "omega0", "v"],
            Kind::Network => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Destination file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Evenly spaced values, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range(Range),
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range(r) => linspace(r.start, r.stop, r.count),
            Grid::Values(v) => v.clone(),
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        match self {
            Grid::Range(r) => {
                if !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(Error::validation(key, "finite start and stop"));
                }
                if r.count == 0 {
                    return Err(Error::validation(key, "count >= 1"));
                }
                if r.count == 1 && r.start != r.stop {
                    return Err(Error::validation(key, "start == stop when count == 1"));
                }
            }
            Grid::Values(v) => {
                if v.is_empty() {
                    return Err(Error::validation(key, "at least one value"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::validation(key, "finite values"));
                }
            }
        }
        Ok(())
    }
}

/// One named sweep axis. The first axis of a scenario is the outermost loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub grid: Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CobosonModel {
    /// Measures of an explicit Schmidt spectrum.
    Spectrum,
    /// Quantum-dot `g₂(0)` and `δ` from the Bohr-radius ratio `r`.
    Qdot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CobosonParams {
    pub model: CobosonModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    #[default]
    Absolute,
    /// Multiples of `t₀ = 1/|Ω₀|`, with `Ω₀` evaluated at equal decay rates.
    T0,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelParams {
    #[serde(default)]
    pub omega1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default = "one")]
    pub scale1: f64,
    #[serde(default = "one")]
    pub scale2: f64,
    pub t_max: f64,
    pub dt: f64,
    #[serde(default)]
    pub time_unit: TimeUnit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpScanParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_diff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
}

fn default_branching_tolerance() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchingParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default = "one")]
    pub scale1: f64,
    #[serde(default = "one")]
    pub scale2: f64,
    /// Accuracy target for the time-domain and spectral integrals.
    #[serde(default = "default_branching_tolerance")]
    pub tolerance: f64,
}

fn default_initial_site() -> usize {
    1
}

fn default_max_horizon() -> f64 {
    1e5
}

fn default_network_tolerance() -> f64 {
    1e-7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkParams {
    pub energies: Vec<f64>,
    pub decays: Vec<f64>,
    pub couplings: Vec<Vec<f64>>,
    /// 1-based index of the initially excited site.
    #[serde(default = "default_initial_site")]
    pub initial_site: usize,
    pub t_max: f64,
    pub dt: f64,
    /// Branching integration horizon; grown automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_max_horizon")]
    pub max_horizon: f64,
    /// Largest acceptable loss still to come after the horizon.
    #[serde(default = "default_network_tolerance")]
    pub tolerance: f64,
    /// Free text echoed into the result metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    CobosonSweep(CobosonParams),
    Tunnel(TunnelParams),
    EpScan(EpScanParams),
    BranchingSweep(BranchingParams),
    Network(NetworkParams),
}

impl Params {
    pub fn kind(&self) -> Kind {
        match self {
            Params::CobosonSweep(_) => Kind::CobosonSweep,
            Params::Tunnel(_) => Kind::Tunnel,
            Params::EpScan(_) => Kind::EpScan,
            Params::BranchingSweep(_) => Kind::BranchingSweep,
            Params::Network(_) => Kind::Network,
        }
    }

    /// Fixed value of a sweepable parameter.
    pub fn scalar(&self, key: &str) -> Option<f64> {
        match (self, key) {
            (Params::CobosonSweep(p), "n") => p.n,
            (Params::CobosonSweep(p), "r") => p.r,
            (Params::Tunnel(p), "omega0") => p.omega0,
            (Params::Tunnel(p), "v") => p.v,
            (Params::Tunnel(p), "gamma1") => p.gamma1,
            (Params::Tunnel(p), "gamma2") => p.gamma2,
            (Params::Tunnel(p), "delta1") => p.delta1,
            (Params::Tunnel(p), "delta2") => p.delta2,
            (Params::EpScan(p), "v") => p.v,
            (Params::EpScan(p), "gamma_diff") => p.gamma_diff,
            (Params::EpScan(p), "omega0") => p.omega0,
            (Params::BranchingSweep(p), "delta1") => p.delta1,
            (Params::BranchingSweep(p), "delta2") => p.delta2,
            (Params::BranchingSweep(p), "omega0") => p.omega0,
            (Params::BranchingSweep(p), "v") => p.v,
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub version: u32,
    pub params: Params,
    pub sweep: Vec<Axis>,
    pub output: Output,
}

#[derive(Deserialize)]
struct Header {
    version: Option<u32>,
    kind: Option<Kind>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document<P> {
    version: u32,
    kind: Kind,
    params: P,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    sweep: IndexMap<String, Grid>,
    #[serde(default)]
    output: Output,
}

fn parse_as<P: for<'de> Deserialize<'de>>(text: &str) -> Result<(P, Vec<Axis>, Output)> {
    let doc: Document<P> = serde_json::from_str(text)?;
    let sweep = doc
        .sweep
        .into_iter()
        .map(|(name, grid)| Axis { name, grid })
        .collect();
    Ok((doc.params, sweep, doc.output))
}

/// A single grid point: fixed parameters overlaid with one value per axis.
#[derive(Clone, Debug)]
pub struct Cell<'a> {
    params: &'a Params,
    axes: &'a [Axis],
    values: Vec<f64>,
}

impl Cell<'_> {
    pub fn get(&self, key: &str) -> Option<f64> {
        match self.axes.iter().position(|a| a.name == key) {
            Some(i) => Some(self.values[i]),
            None => self.params.scalar(key),
        }
    }

    /// Axis values in axis order.
    pub fn axis_values(&self) -> &[f64] {
        &self.values
    }

    /// A whole-number parameter; range grids may land a rounding error away.
    pub(crate) fn require_integer(&self, key: &str, min: usize) -> Result<usize> {
        let x = self.require(key)?;
        let k = x.round();
        if (x - k).abs() > 1e-9 * k.abs().max(1.0) || k < min as f64 {
            return Err(Error::validation(key, format!("an integer {key} >= {min} (got {x})")));
        }
        Ok(k as usize)
    }

    pub(crate) fn require(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::validation(key, "a value in params or sweep"))
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let header: Header = serde_json::from_str(text)?;
        let version = header
            .version
            .ok_or_else(|| Error::validation("version", "a version field"))?;
        if version == 0 || version > FORMAT_VERSION {
            return Err(Error::validation(
                "version",
                format!("version between 1 and {FORMAT_VERSION} (got {version})"),
            ));
        }
        let kind = header
            .kind
            .ok_or_else(|| Error::validation("kind", "a kind field"))?;
        let (params, sweep, output) = match kind {
            Kind::CobosonSweep => {
                let (p, s, o) = parse_as(text)?;
                (Params::CobosonSweep(p), s, o)
            }
            Kind::Tunnel => {
                let (p, s, o) = parse_as(text)?;
                (Params::Tunnel(p), s, o)
            }
            Kind::EpScan => {
                let (p, s, o) = parse_as(text)?;
                (Params::EpScan(p), s, o)
            }
            Kind::BranchingSweep => {
                let (p, s, o) = parse_as(text)?;
                (Params::BranchingSweep(p), s, o)
            }
            Kind::Network => {
                let (p, s, o) = parse_as(text)?;
                (Params::Network(p), s, o)
            }
        };
        let scenario = Scenario {
            version,
            params,
            sweep,
            output,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> Kind {
        self.params.kind()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        fn doc<P: Serialize>(s: &Scenario, params: &P) -> serde_json::Value {
            let d = Document {
                version: s.version,
                kind: s.kind(),
                params,
                sweep: s
                    .sweep
                    .iter()
                    .map(|a| (a.name.clone(), a.grid.clone()))
                    .collect(),
                output: s.output.clone(),
            };
            serde_json::to_value(d).expect("scenario serializes")
        }
        match &self.params {
            Params::CobosonSweep(p) => doc(self, p),
            Params::Tunnel(p) => doc(self, p),
            Params::EpScan(p) => doc(self, p),
            Params::BranchingSweep(p) => doc(self, p),
            Params::Network(p) => doc(self, p),
        }
    }

    /// Pretty-printed document that [`Scenario::from_json`] reads back unchanged.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("scenario serializes")
    }

    /// Every grid point, first axis outermost.
    pub fn cells(&self) -> Vec<Cell<'_>> {
        let grids: Vec<Vec<f64>> = self.sweep.iter().map(|a| a.grid.values()).collect();
        let total: usize = grids.iter().map(Vec::len).product();
        let mut cells = Vec::with_capacity(total);
        let mut idx = vec![0usize; grids.len()];
        for _ in 0..total {
            cells.push(Cell {
                params: &self.params,
                axes: &self.sweep,
                values: idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect(),
            });
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < grids[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        cells
    }

    /// Checks structure and every statically known precondition, cell by cell.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind();
        if self.sweep.len() > 2 {
            return Err(Error::validation("sweep", "at most two axes"));
        }
        for axis in &self.sweep {
            if !kind.sweepable().contains(&axis.name.as_str()) {
                return Err(Error::validation(
                    format!("sweep.{}", axis.name),
                    format!(
                        "one of the sweepable {} parameters [{}]",
                        kind.as_str(),
                        kind.sweepable().join(", ")
                    ),
                ));
            }
            if self.params.scalar(&axis.name).is_some() {
                return Err(Error::validation(
                    format!("params.{}", axis.name),
                    "a parameter to be either fixed or swept, not both",
                ));
            }
            axis.grid.validate(&format!("sweep.{}", axis.name))?;
        }
        match &self.params {
            Params::CobosonSweep(p) => self.validate_coboson(p),
            Params::Tunnel(p) => self.validate_tunnel(p),
            Params::EpScan(_) => self.validate_ep_scan(),
            Params::BranchingSweep(p) => self.validate_branching(p),
            Params::Network(p) => validate_network(p),
        }
    }

    fn validate_coboson(&self, p: &CobosonParams) -> Result<()> {
        let sources = [p.weights.is_some(), p.uniform_modes.is_some(), p.spectrum_file.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        let known_modes = match p.model {
            CobosonModel::Spectrum => {
                if sources != 1 {
                    return Err(Error::validation(
                        "params",
                        "exactly one of weights, uniform_modes or spectrum_file",
                    ));
                }
                if let Some(w) = &p.weights {
                    let spec = SchmidtSpectrum::from_weights(w)
                        .map_err(|e| Error::validation("weights", e.to_string()))?;
                    Some(spec.coefficients().iter().filter(|&&l| l > 0.0).count())
                } else if let Some(j) = p.uniform_modes {
                    if j == 0 {
                        return Err(Error::validation("uniform_modes", "uniform_modes >= 1"));
                    }
                    Some(j)
                } else {
                    None
                }
            }
            CobosonModel::Qdot => {
                if sources != 0 {
                    return Err(Error::validation(
                        "params",
                        "no spectrum source for the qdot model",
                    ));
                }
                None
            }
        };
        if p.model == CobosonModel::Spectrum && (p.r.is_some() || self.sweep.iter().any(|a| a.name == "r")) {
            return Err(Error::validation("r", "the qdot model (r is unused for spectra)"));
        }
        let min_n = if p.model == CobosonModel::Qdot { 2 } else { 1 };
        for cell in self.cells() {
            let n = cell.require_integer("n", min_n)?;
            if let Some(j) = known_modes {
                if n > j {
                    return Err(Error::validation(
                        "n",
                        format!("n <= {j}, the number of occupied modes (got {n})"),
                    ));
                }
            }
            if p.model == CobosonModel::Qdot {
                let r = cell.require("r")?;
                let geom = QuantumDotGeometry::new(r)
                    .map_err(|_| Error::validation("r", format!("r >= 0 (got {r})")))?;
                if 2.0 * (n as f64 - 1.0) * r * r >= 1.0 {
                    return Err(Error::validation(
                        "n",
                        format!(
                            "2(n-1)r^2 < 1 (got n = {n}, r = {r}; the maximum admissible n is {})",
                            geom.max_pairs().unwrap_or(usize::MAX)
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_tunnel(&self, p: &TunnelParams) -> Result<()> {
        finite("omega1", p.omega1)?;
        non_negative("scale1", p.scale1)?;
        non_negative("scale2", p.scale2)?;
        if !(p.dt > 0.0) || !p.dt.is_finite() {
            return Err(Error::validation("dt", format!("dt > 0 (got {})", p.dt)));
        }
        non_negative("t_max", p.t_max)?;
        if p.t_max / p.dt > 1e8 {
            return Err(Error::validation("dt", "at most 1e8 time steps"));
        }
        for cell in self.cells() {
            finite("omega0", cell.require("omega0")?)?;
            let v = cell.require("v")?;
            non_negative("v", v)?;
            for site in ["1", "2"] {
                let (g, d) = (format!("gamma{site}"), format!("delta{site}"));
                match (cell.get(&g), cell.get(&d)) {
                    (Some(x), None) => non_negative(&g, x)?,
                    (None, Some(x)) => non_negative(&d, x)?,
                    _ => {
                        return Err(Error::validation(
                            &g,
                            format!("exactly one of {g} and {d}"),
                        ))
                    }
                }
            }
            if p.time_unit == TimeUnit::T0 && v == 0.0 && cell.require("omega0")? == 0.0 {
                return Err(Error::validation(
                    "time_unit",
                    "a non-zero reference splitting (v > 0 or omega0 != 0) for t0 units",
                ));
            }
        }
        Ok(())
    }

    fn validate_ep_scan(&self) -> Result<()> {
        for cell in self.cells() {
            non_negative("v", cell.require("v")?)?;
            finite("gamma_diff", cell.require("gamma_diff")?)?;
            finite("omega0", cell.get("omega0").unwrap_or(0.0))?;
        }
        Ok(())
    }

    fn validate_branching(&self, p: &BranchingParams) -> Result<()> {
        non_negative("scale1", p.scale1)?;
        non_negative("scale2", p.scale2)?;
        if !(p.tolerance > 0.0 && p.tolerance < 1.0) {
            return Err(Error::validation(
                "tolerance",
                format!("0 < tolerance < 1 (got {})", p.tolerance),
            ));
        }
        for cell in self.cells() {
            let d1 = cell.require("delta1")?;
            let d2 = cell.require("delta2")?;
            non_negative("delta1", d1)?;
            non_negative("delta2", d2)?;
            finite("omega0", cell.require("omega0")?)?;
            non_negative("v", cell.require("v")?)?;
            if p.scale1 * d1 + p.scale2 * d2 <= 0.0 {
                return Err(Error::validation(
                    "delta2",
                    "at least one open decay channel (scale1*delta1 + scale2*delta2 > 0)",
                ));
            }
        }
        Ok(())
    }
}

fn validate_network(p: &NetworkParams) -> Result<()> {
    let net = SiteNetwork::new(p.energies.clone(), p.decays.clone(), p.couplings.clone())?;
    let m = net.site_count();
    if p.initial_site == 0 || p.initial_site > m {
        return Err(Error::validation(
            "initial_site",
            format!("1 <= initial_site <= {m} (got {})", p.initial_site),
        ));
    }
    if !(p.dt > 0.0) || !p.dt.is_finite() {
        return Err(Error::validation("dt", format!("dt > 0 (got {})", p.dt)));
    }
    non_negative("t_max", p.t_max)?;
    if let Some(h) = p.horizon {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::validation("horizon", format!("horizon > 0 (got {h})")));
        }
    }
    if !(p.max_horizon > 0.0) || !p.max_horizon.is_finite() {
        return Err(Error::validation("max_horizon", "a finite max_horizon > 0"));
    }
    if !(p.tolerance > 0.0 && p.tolerance < 1.0) {
        return Err(Error::validation("tolerance", format!("0 < tolerance < 1 (got {})", p.tolerance)));
    }
    Ok(())
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("a finite value (got {v})")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{key} >= 0 (got {v})")))
    }
}

pub const PRESETS: [&str; 6] = ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fmo_demo"];

fn range(start: f64, stop: f64, count: usize) -> Grid {
    Grid::Range(Range { start, stop, count })
}

fn axis(name: &str, grid: Grid) -> Axis {
    Axis {
        name: name.to_string(),
        grid,
    }
}

/// Built-in scenarios for the published figures and a network demo.
pub fn preset(name: &str) -> Result<Scenario> {
    let (params, sweep) = match name {
        "fig1" => (
            Params::CobosonSweep(CobosonParams {
                model: CobosonModel::Qdot,
                weights: None,
                uniform_modes: None,
                spectrum_file: None,
                n: None,
                r: None,
            }),
            vec![
                axis("r", Grid::Values(vec![0.01, 0.03, 0.05, 0.07])),
                axis("n", range(2.0, 100.0, 99)),
            ],
        ),
        "fig2a" => (
            Params::Tunnel(TunnelParams {
                omega1: 0.0,
                omega0: Some(0.0),
                v: None,
                gamma1: None,
                gamma2: None,
                delta1: Some(0.1),
                delta2: Some(0.1),
                scale1: 1.0,
                scale2: 1.0,
                t_max: 40.0,
                dt: 0.1,
                time_unit: TimeUnit::T0,
            }),
            vec![axis("v", range(0.2, 2.0, 10))],
        ),
        "fig2b" => (
            Params::Tunnel(TunnelParams {
                omega1: 0.0,
                omega0: Some(0.0),
                v: Some(1.0),
                gamma1: None,
                gamma2: None,
                delta1: Some(0.0),
                delta2: None,
                scale1: 1.0,
                scale2: 1.0,
                t_max: 40.0,
                dt: 0.1,
                time_unit: TimeUnit::T0,
            }),
            vec![axis("delta2", range(0.0, 1.0, 11))],
        ),
        "fig3a" => (
            Params::BranchingSweep(BranchingParams {
                delta1: None,
                delta2: None,
                omega0: Some(0.5),
                v: Some(1.0),
                scale1: 1.0,
                scale2: 1.0,
                tolerance: default_branching_tolerance(),
            }),
            vec![
                axis("delta1", range(0.02, 0.5, 13)),
                axis("delta2", range(0.02, 0.5, 13)),
            ],
        ),
        "fig3b" => (
            Params::BranchingSweep(BranchingParams {
                delta1: Some(0.1),
                delta2: None,
                omega0: None,
                v: Some(5.0),
                scale1: 1.0,
                scale2: 1.0,
                tolerance: default_branching_tolerance(),
            }),
            vec![
                axis("omega0", range(0.0, 2.0, 21)),
                axis("delta2", range(0.02, 0.5, 13)),
            ],
        ),
        "fmo_demo" => (Params::Network(fmo_demo()), Vec::new()),
        other => {
            return Err(Error::validation(
                "preset",
                format!("one of {} (got `{other}`)", PRESETS.join(", ")),
            ))
        }
    };
    let scenario = Scenario {
        version: FORMAT_VERSION,
        params,
        sweep,
        output: Output::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Two three-site rings joined by a single bridge, with a dissipative
/// reaction-centre site on the second ring.
fn fmo_demo() -> NetworkParams {
    let m = 6;
    let mut c = vec![vec![0.0; m]; m];
    let mut link = |i: usize, j: usize, v: f64| {
        c[i][j] = v;
        c[j][i] = v;
    };
    for ring in [[0, 1, 2], [3, 4, 5]] {
        link(ring[0], ring[1], 1.0);
        link(ring[1], ring[2], 1.0);
        link(ring[0], ring[2], 1.0);
    }
    link(2, 3, 0.3);
    NetworkParams {
        energies: vec![0.0, 0.35, -0.2, 0.15, -0.3, 0.25],
        decays: vec![0.01, 0.01, 0.01, 0.01, 0.01, 0.5],
        couplings: c,
        initial_site: 1,
        t_max: 50.0,
        dt: 0.25,
        horizon: None,
        max_horizon: default_max_horizon(),
        tolerance: default_network_tolerance(),
        note: Some("illustrative parameters, not fitted to measured FMO data".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TUNNEL: &str = r#"{
        "version": 1,
        "kind": "tunnel",
        "params": {"omega0": 0, "v": 1, "gamma1": 0.1, "gamma2": 0.1, "t_max": 10, "dt": 0.1}
    }"#;

    #[test]
    fn minimal_tunnel_fills_defaults() {
        let s = Scenario::from_json(TUNNEL).unwrap();
        let Params::Tunnel(p) = &s.params else { panic!() };
        assert_eq!(p.omega1, 0.0);
        assert_eq!(p.scale1, 1.0);
        assert_eq!(p.time_unit, TimeUnit::Absolute);
        assert_eq!(s.output, Output::default());
        assert_eq!(s.cells().len(), 1);
    }

    #[test]
    fn negative_rate_names_constraint() {
        let doc = TUNNEL.replace("\"gamma1\": 0.1", "\"gamma1\": -0.1");
        let err = Scenario::from_json(&doc).unwrap_err();
        assert_eq!(err.code(), "validation");
        assert!(err.to_string().contains("gamma1 >= 0"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let doc = TUNNEL.replace("\"v\": 1", "\"vv\": 1");
        let err = Scenario::from_json(&doc).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("vv"));
            }
            other => panic!("{other:?}"),
        }
        let doc = TUNNEL.replace("\"version\": 1,", "\"version\": 1, \"extra\": true,");
        assert_eq!(Scenario::from_json(&doc).unwrap_err().code(), "parse");
        assert_eq!(Scenario::from_json("{\"version\": 1,").unwrap_err().code(), "parse");
    }

    #[test]
    fn version_checks() {
        let newer = TUNNEL.replace("\"version\": 1", "\"version\": 2");
        assert!(Scenario::from_json(&newer).unwrap_err().to_string().contains("version"));
        let missing = TUNNEL.replace("\"version\": 1,", "");
        assert_eq!(Scenario::from_json(&missing).unwrap_err().code(), "validation");
    }

    #[test]
    fn missing_and_doubled_parameters() {
        let doc = TUNNEL.replace("\"v\": 1, ", "");
        let err = Scenario::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("`v`"), "{err}");
        let both = TUNNEL.replace("\"gamma1\": 0.1", "\"gamma1\": 0.1, \"delta1\": 0.1");
        assert!(Scenario::from_json(&both).is_err());
        let swept = TUNNEL.replace("\"dt\": 0.1}", "\"dt\": 0.1}, \"sweep\": {\"v\": [1, 2]}");
        assert!(Scenario::from_json(&swept).unwrap_err().to_string().contains("not both"));
        let bad_axis = TUNNEL.replace("\"dt\": 0.1}", "\"dt\": 0.1}, \"sweep\": {\"dt\": [1, 2]}");
        assert!(Scenario::from_json(&bad_axis).is_err());
    }

    #[test]
    fn cells_iterate_first_axis_outermost() {
        let s = preset("fig3a").unwrap();
        let cells = s.cells();
        assert_eq!(cells.len(), 169);
        assert_eq!(cells[0].axis_values(), &[0.02, 0.02]);
        assert_eq!(cells[1].get("delta2"), Some(0.06));
        assert_eq!(cells[13].get("delta1"), Some(0.06));
        assert_eq!(cells[5].get("omega0"), Some(0.5));
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            let text = s.to_json();
            let back = Scenario::from_json(&text).unwrap();
            assert_eq!(back, s, "{name}");
            assert_eq!(back.to_json(), text);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn sweep_order_is_preserved() {
        let s = preset("fig3b").unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back.sweep[0].name, "omega0");
        assert_eq!(back.sweep[1].name, "delta2");
    }

    #[test]
    fn qdot_validity_limit_is_reported() {
        let doc = r#"{"version": 1, "kind": "coboson_sweep",
            "params": {"model": "qdot", "r": 0.5},
            "sweep": {"n": {"start": 2, "stop": 4, "count": 3}}}"#;
        let err = Scenario::from_json(doc).unwrap_err();
        assert!(err.to_string().contains("maximum admissible n is 2"), "{err}");
    }

    #[test]
    fn spectrum_sources() {
        let ok = r#"{"version": 1, "kind": "coboson_sweep",
            "params": {"model": "spectrum", "weights": [3, 1], "n": 2}}"#;
        assert!(Scenario::from_json(ok).is_ok());
        let too_many = ok.replace("\"n\": 2", "\"n\": 3");
        assert!(Scenario::from_json(&too_many).unwrap_err().to_string().contains("occupied"));
        let two = ok.replace("\"n\": 2", "\"n\": 2, \"uniform_modes\": 4");
        assert!(Scenario::from_json(&two).is_err());
    }

    #[test]
    fn range_grid_validation() {
        let doc = TUNNEL.replace("\"v\": 1, ", "").replace(
            "\"dt\": 0.1}",
            "\"dt\": 0.1}, \"sweep\": {\"v\": {\"start\": 0, \"stop\": 1, \"count\": 0}}",
        );
        assert!(Scenario::from_json(&doc).unwrap_err().to_string().contains("count"));
    }
}
