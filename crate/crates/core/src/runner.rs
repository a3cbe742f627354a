//! Executes scenarios into tables and writes them as CSV or JSON.

use std::io::Write;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::branching::{f2_closed, f2_spectral_auto, f2_time_domain_auto, network_branching_auto, BranchingOptions};
use crate::coboson::{qdot_g2_zero, CobosonEnsemble, QuantumDotGeometry, SchmidtSpectrum};
use crate::dynamics::{ep_scan_cell, localized, SiteNetwork, TwoSiteSystem};
use crate::error::{Error, Result};
use crate::scenario::{
    BranchingParams, Cell, CobosonModel, CobosonParams, Format, NetworkParams, Params, Scenario, TimeUnit,
    TunnelParams,
};

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Number(f64),
    Int(i64),
    Text(String),
    Empty,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Entry>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric entries of one column; `None` for non-numeric cells.
    pub fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match r[i] {
                Entry::Number(x) => Some(x),
                Entry::Int(k) => Some(k as f64),
                _ => None,
            })
            .collect()
    }
}

/// Result of running a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub table: Table,
    /// Per-site branching table of a network run.
    pub branching: Option<Table>,
    pub error_estimates: Map<String, Value>,
    pub notes: Vec<String>,
}

/// Worker-thread count from an explicit request, else `COBOSON_THREADS`, else
/// all available cores.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("COBOSON_THREADS").ok()?.trim().parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps cells to row blocks on up to `threads` workers, keeping cell order.
/// The first failing cell in grid order decides the error.
fn map_cells<F>(cells: &[Cell<'_>], threads: usize, f: F) -> Result<Vec<Vec<Entry>>>
where
    F: Fn(&Cell<'_>) -> Result<Vec<Vec<Entry>>> + Sync,
{
    let blocks: Vec<Result<Vec<Vec<Entry>>>> = if threads <= 1 {
        cells.iter().map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(&f).collect())
    };
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

fn num(x: f64) -> Entry {
    Entry::Number(x)
}

pub fn run(scenario: &Scenario, threads: usize) -> Result<Report> {
    let cells = scenario.cells();
    let mut report = match &scenario.params {
        Params::CobosonSweep(p) => run_coboson(p, &cells, threads)?,
        Params::Tunnel(p) => run_tunnel(scenario, p, &cells, threads)?,
        Params::EpScan(_) => {
            let mut table = Table::new(cols(&["v", "gamma_diff", "abs_omega_sq", "regime", "coalescence"]));
            table.rows = map_cells(&cells, threads, |c| {
                let row = ep_scan_cell(c.require("v")?, c.require("gamma_diff")?, c.get("omega0").unwrap_or(0.0))?;
                Ok(vec![vec![
                    num(row.coupling),
                    num(row.gamma_diff),
                    num(row.abs_omega_sq),
                    Entry::Text(row.regime.to_string()),
                    num(row.coalescence),
                ]])
            })?;
            plain(table)
        }
        Params::BranchingSweep(p) => run_branching(p, &cells, threads)?,
        Params::Network(p) => run_network(p)?,
    };
    check_finite(&report.table)?;
    if let Some(b) = &report.branching {
        check_finite(b)?;
    }
    report.notes.sort();
    Ok(report)
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn plain(table: Table) -> Report {
    Report {
        table,
        branching: None,
        error_estimates: Map::new(),
        notes: Vec::new(),
    }
}

fn check_finite(table: &Table) -> Result<()> {
    for (k, row) in table.rows.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            if let Entry::Number(x) = e {
                if !x.is_finite() {
                    return Err(Error::Domain(format!(
                        "non-finite result in row {k}, column `{}`",
                        table.columns[c]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn run_coboson(p: &CobosonParams, cells: &[Cell<'_>], threads: usize) -> Result<Report> {
    match p.model {
        CobosonModel::Qdot => {
            let mut table = Table::new(cols(&["n", "r", "g2", "delta"]));
            table.rows = map_cells(cells, threads, |c| {
                let n = c.require_integer("n", 2)?;
                let r = c.require("r")?;
                let g2 = qdot_g2_zero(n, &QuantumDotGeometry::new(r)?)?;
                Ok(vec![vec![Entry::Int(n as i64), num(r), num(g2), num(1.0 - g2)]])
            })?;
            Ok(plain(table))
        }
        CobosonModel::Spectrum => {
            let spectrum = if let Some(w) = &p.weights {
                SchmidtSpectrum::from_weights(w)?
            } else if let Some(j) = p.uniform_modes {
                SchmidtSpectrum::uniform(j)?
            } else {
                let path = p.spectrum_file.as_deref().unwrap_or_default();
                SchmidtSpectrum::parse(&std::fs::read_to_string(path)?)?
            };
            let mut table = Table::new(cols(&["n", "chi_ratio", "lower", "upper", "fragment_norm"]));
            table.rows = map_cells(cells, threads, |c| {
                let n = c.require_integer("n", 1)?;
                let m = CobosonEnsemble::new(spectrum.clone(), n)?.measures()?;
                Ok(vec![vec![
                    Entry::Int(n as i64),
                    num(m.chi_ratio),
                    num(m.lower_bound),
                    num(m.upper_bound),
                    num(m.fragment_norm),
                ]])
            })?;
            let mut report = plain(table);
            report
                .error_estimates
                .insert("purity".into(), json!(spectrum.purity()));
            Ok(report)
        }
    }
}

fn rate(c: &Cell<'_>, site: u8, scale: f64) -> Result<f64> {
    match c.get(&format!("gamma{site}")) {
        Some(g) => Ok(g),
        None => Ok(scale * c.require(&format!("delta{site}"))?),
    }
}

/// `t₀ = 1/|Ω₀|` for the cell's coupling and detuning at equal decay rates.
fn reference_time(v: f64, omega0: f64) -> f64 {
    1.0 / (4.0 * v * v + omega0 * omega0).sqrt()
}

fn run_tunnel(scenario: &Scenario, p: &TunnelParams, cells: &[Cell<'_>], threads: usize) -> Result<Report> {
    let mut columns: Vec<String> = scenario.sweep.iter().map(|a| a.name.clone()).collect();
    columns.extend(cols(&["t", "p11", "p12", "delta_p", "norm"]));
    let mut table = Table::new(columns);
    let initial = [num_complex::Complex::new(1.0, 0.0), num_complex::Complex::new(0.0, 0.0)];
    table.rows = map_cells(cells, threads, |c| {
        let omega0 = c.require("omega0")?;
        let v = c.require("v")?;
        let sys = TwoSiteSystem::new(p.omega1, p.omega1 + omega0, v, rate(c, 1, p.scale1)?, rate(c, 2, p.scale2)?)?;
        let unit = match p.time_unit {
            TimeUnit::Absolute => 1.0,
            TimeUnit::T0 => reference_time(v, omega0),
        };
        let traj = sys.propagate(initial, p.t_max * unit, p.dt * unit)?;
        let prefix: Vec<Entry> = c.axis_values().iter().map(|&x| num(x)).collect();
        Ok((0..traj.len())
            .map(|k| {
                let pop = traj.populations(k);
                let mut row = prefix.clone();
                row.extend([
                    num(traj.times()[k] / unit),
                    num(pop[0]),
                    num(pop[1]),
                    num(pop[0] - pop[1]),
                    num(traj.total_norm()[k]),
                ]);
                row
            })
            .collect())
    })?;
    let mut report = plain(table);
    if p.time_unit == TimeUnit::T0 {
        report
            .notes
            .push("t in units of t0 = 1/|Omega0| evaluated at equal decay rates".into());
    }
    Ok(report)
}

fn run_branching(p: &BranchingParams, cells: &[Cell<'_>], threads: usize) -> Result<Report> {
    let mut table = Table::new(cols(&[
        "delta1",
        "delta2",
        "omega0",
        "v",
        "f2_closed",
        "f2_time",
        "f2_spectral",
    ]));
    let mut errs = Vec::with_capacity(cells.len());
    let rows = map_cells(cells, threads, |c| {
        let (d1, d2) = (c.require("delta1")?, c.require("delta2")?);
        let (omega0, v) = (c.require("omega0")?, c.require("v")?);
        let sys = TwoSiteSystem::from_deviations(0.0, omega0, v, (p.scale1, p.scale2), (d1, d2))?;
        let closed = match f2_closed(&sys) {
            Ok(x) => num(x),
            Err(Error::ChannelClosed(_)) => Entry::Empty,
            Err(e) => return Err(e),
        };
        let time = f2_time_domain_auto(&sys, p.tolerance)?;
        let spectral = f2_spectral_auto(&sys, p.tolerance)?;
        Ok(vec![vec![
            num(d1),
            num(d2),
            num(omega0),
            num(v),
            closed,
            num(time.value),
            num(spectral.value),
            num(time.error),
            num(spectral.error),
        ]])
    })?;
    for mut row in rows {
        let spectral_err = row.pop();
        let time_err = row.pop();
        if let (Some(Entry::Number(a)), Some(Entry::Number(b))) = (time_err, spectral_err) {
            errs.push((a, b));
        }
        table.rows.push(row);
    }
    let mut report = plain(table);
    let max = |f: fn(&(f64, f64)) -> f64| errs.iter().map(f).fold(0.0, f64::max);
    report.error_estimates.insert("f2_time_max".into(), json!(max(|e| e.0)));
    report.error_estimates.insert("f2_spectral_max".into(), json!(max(|e| e.1)));
    Ok(report)
}

fn run_network(p: &NetworkParams) -> Result<Report> {
    let net = SiteNetwork::new(p.energies.clone(), p.decays.clone(), p.couplings.clone())?;
    let m = net.site_count();
    let initial = localized(m, p.initial_site - 1)?;
    let traj = net.propagate(&initial, p.t_max, p.dt)?;
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=m).map(|i| format!("p_{i}")));
    columns.push("norm".into());
    let mut table = Table::new(columns);
    for k in 0..traj.len() {
        let mut row = vec![num(traj.times()[k])];
        row.extend(traj.populations(k).iter().map(|&x| num(x)));
        row.push(num(traj.total_norm()[k]));
        table.rows.push(row);
    }
    let options = BranchingOptions {
        tolerance: p.tolerance,
        ..BranchingOptions::default()
    };
    let res = network_branching_auto(&net, &initial, p.horizon, p.max_horizon, &options)?;
    let mut branching = Table::new(cols(&["site", "fraction"]));
    for (i, &f) in res.fractions.iter().enumerate() {
        branching.rows.push(vec![Entry::Int(i as i64 + 1), num(f)]);
    }
    branching.rows.push(vec![Entry::Text("survival".into()), num(res.survival)]);
    let mut report = plain(table);
    report.branching = Some(branching);
    report.error_estimates.insert("branching".into(), json!(res.error_estimate));
    report.error_estimates.insert("horizon".into(), json!(res.horizon));
    report
        .error_estimates
        .insert("sum_rule_residual".into(), json!((res.total() - 1.0).abs()));
    report.notes.extend(p.note.clone());
    Ok(report)
}

/// Twelve significant digits in scientific notation, `-0` folded to `0`.
pub fn format_number(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

fn csv_field(e: &Entry) -> String {
    match e {
        Entry::Number(x) => format_number(*x),
        Entry::Int(k) => k.to_string(),
        Entry::Text(s) => s.clone(),
        Entry::Empty => String::new(),
    }
}

fn write_table_csv(table: &Table, out: &mut impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_field)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv: {other:?}")),
    }
}

/// The result table; a network's branching table follows after a blank line.
pub fn write_csv(report: &Report, out: &mut impl Write) -> Result<()> {
    write_table_csv(&report.table, out)?;
    if let Some(b) = &report.branching {
        out.write_all(b"\n")?;
        write_table_csv(b, out)?;
    }
    Ok(())
}

fn json_rows(table: &Table) -> Value {
    Value::Array(
        table
            .rows
            .iter()
            .map(|r| {
                Value::Array(
                    r.iter()
                        .map(|e| match e {
                            Entry::Number(x) => json!(x + 0.0),
                            Entry::Int(k) => json!(k),
                            Entry::Text(s) => json!(s),
                            Entry::Empty => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn to_json(scenario: &Scenario, report: &Report) -> Value {
    let mut doc = json!({
        "scenario": scenario.to_json_value(),
        "columns": report.table.columns,
        "rows": json_rows(&report.table),
        "metadata": {
            "tool_version": env!("CARGO_PKG_VERSION"),
            "runtime": {
                "scalar": "f64",
                "number_format": "12 significant digits (csv)",
                "network_integrator": "fixed-step rk4 with step-halving check",
            },
            "error_estimates": report.error_estimates,
            "notes": report.notes,
        },
    });
    if let Some(b) = &report.branching {
        doc["branching"] = json!({"columns": b.columns, "rows": json_rows(b)});
    }
    doc
}

pub fn write_json(scenario: &Scenario, report: &Report, out: &mut impl Write) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_json(scenario, report)).expect("json serializes");
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_report(scenario: &Scenario, report: &Report, format: Format, out: &mut impl Write) -> Result<()> {
    match format {
        Format::Csv => write_csv(report, out),
        Format::Json => write_json(scenario, report, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.469484), "4.69484000000e-1");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(1.0), "1.00000000000e0");
    }

    #[test]
    fn fig1_spot() {
        let s = preset("fig1").unwrap();
        let r = run(&s, 1).unwrap();
        assert_eq!(r.table.rows.len(), 4 * 99);
        assert_eq!(r.table.rows[0][0], Entry::Int(2));
        let delta = r.table.numbers("delta");
        assert!((delta[0].unwrap() - 0.5001).abs() < 1e-4);
    }

    #[test]
    fn fig3a_csv_is_thread_independent() {
        let s = preset("fig3a").unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&run(&s, 1).unwrap(), &mut a).unwrap();
        write_csv(&run(&s, 4).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("delta1,delta2,omega0,v,f2_closed,f2_time,f2_spectral\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn closed_channel_leaves_cell_empty() {
        let doc = r#"{"version": 1, "kind": "branching_sweep",
            "params": {"delta1": 0, "delta2": 0.3, "omega0": 0.2, "v": 1}}"#;
        let s = Scenario::from_json(doc).unwrap();
        let r = run(&s, 1).unwrap();
        assert_eq!(r.table.rows[0][4], Entry::Empty);
        let mut out = Vec::new();
        write_csv(&r, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains(",,"));
        let j = to_json(&s, &r);
        assert!(j["rows"][0][4].is_null());
    }

    #[test]
    fn network_report_has_branching_footer() {
        let r = run(&preset("fmo_demo").unwrap(), 1).unwrap();
        let b = r.branching.as_ref().unwrap();
        assert_eq!(b.rows.len(), 7);
        assert_eq!(b.rows[6][0], Entry::Text("survival".into()));
        let total: f64 = b.numbers("fraction").iter().map(|x| x.unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        assert_eq!(r.table.columns.len(), 8);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn tunnel_sweep_prepends_axis_columns() {
        let r = run(&preset("fig2a").unwrap(), 2).unwrap();
        assert_eq!(r.table.columns[..2], ["v".to_string(), "t".to_string()]);
        assert_eq!(r.table.rows.len(), 10 * 401);
        for row in r.table.rows.iter().step_by(401) {
            assert_eq!(row[1], Entry::Number(0.0));
            assert_eq!(row[4], Entry::Number(1.0));
        }
    }
}
