use std::fmt;
use std::io;

use qlatwit_core::bosonic::{
    embed_qubit_chain_into, heisenberg_ground_state, lattice_spin, qubit_singlet_chain,
    top_shell_weight, Coupling, FockLatticeSpec,
};
use qlatwit_core::channels::{
    decoherence_experiment, witness_threshold, ChannelKind, MAX_EXPERIMENT_SITES,
};
use qlatwit_core::criteria::{
    anticommutator_moments, best_spin_squeezing, collective_uncertainty_criterion,
    moment_indistinguishability, moment_matching_separable_state, squared_criterion,
    variance_x_criterion, witness_criterion, CriterionReport, Direction, MomentComparison,
};
use qlatwit_core::optimize::{
    optimize_pulse, pulse_unitarity_error, pulsed_state, violation_ratio, OptimizerConfig,
    PulseParams, MAX_PULSE_SITES,
};
use qlatwit_core::qcore::{moment, LinearOperator};
use qlatwit_core::spinchain::{
    chain_spin, cluster_state, saturating_product_state, ChainSpec, ClusterSpec,
};
use qlatwit_core::{Axis, CollectiveSpin};
use qlatwit_core::{MaximallyMixed, QuantumState};
use serde_json::{json, Value};

use crate::output::{Cell, Outcome, Plot, Table};

/// Largest chain for which full witness tables are produced (`2^12` amplitudes).
pub const MAX_WITNESS_SITES: usize = 12;
/// Density-matrix moment comparisons stop here.
pub const MAX_MOMENT_SITES: usize = 9;
pub const MAX_MOMENT_ORDER: u32 = 12;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments; exit code 2.
    Usage(String),
    Core(qlatwit_core::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<qlatwit_core::Error> for CliError {
    fn from(e: qlatwit_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: String) -> Result<T> {
    Err(CliError::Usage(msg))
}

fn even_in_range(command: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if !n.is_multiple_of(2) || n < lo || n > hi {
        return usage(format!(
            "{command} needs an even --n between {lo} and {hi}, got {n}"
        ));
    }
    Ok(())
}

fn in_range(command: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if n < lo || n > hi {
        return usage(format!(
            "{command} needs --n between {lo} and {hi}, got {n}"
        ));
    }
    Ok(())
}

const REPORT_HEADER: [&str; 6] = ["name", "value", "bound", "violated", "margin", "status"];

fn report_row(r: &CriterionReport) -> Vec<Cell> {
    vec![
        r.name.as_str().into(),
        r.value.into(),
        r.bound.into(),
        r.violated.into(),
        r.margin.into(),
        status_label(r).into(),
    ]
}

fn scalar_row(name: &str, value: impl Into<Cell>) -> Vec<Cell> {
    vec![
        name.into(),
        value.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]
}

fn status_label(r: &CriterionReport) -> &'static str {
    if r.is_defined() {
        "evaluated"
    } else {
        "undefined"
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

fn chain_criteria<S: QuantumState + ?Sized>(state: &S) -> Result<Vec<CriterionReport>> {
    Ok(vec![
        witness_criterion(state)?,
        squared_criterion(state)?,
        variance_x_criterion(state)?,
    ])
}

/// Witness, squared and variance criteria on the cluster state, the
/// saturating product state and the totally mixed state.
pub fn cluster_witness(n: usize) -> Result<Outcome> {
    even_in_range("cluster-witness", n, 2, MAX_WITNESS_SITES)?;
    let chain = ChainSpec::even(n)?;
    let evaluated = [
        (
            "cluster",
            chain_criteria(&cluster_state(&ClusterSpec::uniform(chain))?)?,
        ),
        (
            "saturating_product",
            chain_criteria(&saturating_product_state(&chain)?)?,
        ),
        (
            "totally_mixed",
            chain_criteria(&MaximallyMixed::new(chain.space()))?,
        ),
    ];
    let mut header = vec!["state"];
    header.extend(REPORT_HEADER);
    let mut table = Table::new(&header);
    let mut states = Vec::new();
    let mut summary = Vec::new();
    for (label, reports) in &evaluated {
        for r in reports {
            let mut row = vec![Cell::from(*label)];
            row.extend(report_row(r));
            table.push(row);
            summary.push(format!("{label}: {r}"));
        }
        states.push(json!({ "state": label, "criteria": reports }));
    }
    let results = json!({
        "n": n,
        "witness_bound": n as f64 / 2.0,
        "witness_maximum": n as f64,
        "states": states,
    });
    let mut out = Outcome::new(json!({ "n": n }), results, table);
    out.summary = summary;
    Ok(out)
}

fn p_grid(p_min: f64, p_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![p_min];
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                p_max
            } else {
                p_min + (p_max - p_min) * i as f64 / last
            }
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// First grid interval where `margin` changes sign, linearly interpolated.
fn grid_crossing(ps: &[f64], margins: &[f64]) -> Option<f64> {
    for i in 0..ps.len().saturating_sub(1) {
        let (a, b) = (margins[i], margins[i + 1]);
        if a <= 0.0 && b > 0.0 {
            return Some(ps[i] + (ps[i + 1] - ps[i]) * (-a) / (b - a));
        }
    }
    None
}

pub fn decoherence_scan(n: usize, p_min: f64, p_max: f64, steps: usize) -> Result<Outcome> {
    even_in_range("decoherence-scan", n, 2, MAX_EXPERIMENT_SITES)?;
    if !(p_min.is_finite() && p_max.is_finite() && 0.0 <= p_min && p_min <= p_max && p_max <= 1.0) {
        return usage(format!(
            "decoherence-scan needs 0 <= --p-min <= --p-max <= 1, got {p_min} and {p_max}"
        ));
    }
    if steps == 0 {
        return usage("decoherence-scan needs --steps of at least 1".to_string());
    }
    if steps == 1 && p_min != p_max {
        return usage("a single step needs --p-min equal to --p-max".to_string());
    }
    let ps = p_grid(p_min, p_max, steps);
    let reports = ps
        .iter()
        .map(|&p| decoherence_experiment(n, p))
        .collect::<qlatwit_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&["p", "value", "bound", "violated", "margin"]);
    let mut rows = Vec::new();
    for (&p, r) in ps.iter().zip(&reports) {
        table.push(vec![
            p.into(),
            r.value.into(),
            r.bound.into(),
            r.violated.into(),
            r.margin.into(),
        ]);
        rows.push(json!({
            "p": p,
            "value": r.value,
            "bound": r.bound,
            "violated": r.violated,
            "margin": r.margin,
        }));
    }
    let per_site: Vec<(f64, f64)> = ps
        .iter()
        .zip(&reports)
        .map(|(&p, r)| (p, r.value / n as f64))
        .collect();
    let slope = fitted_slope(&per_site);
    let margins: Vec<f64> = reports.iter().map(|r| r.margin).collect();
    let crossing = grid_crossing(&ps, &margins);
    let threshold = witness_threshold(n, ChannelKind::PhaseFlip)?;
    let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.12}"));
    let results = json!({
        "n": n,
        "channel": ChannelKind::PhaseFlip.label(),
        "rows": rows,
        "slope_per_site": slope,
        "crossing_p": crossing,
        "threshold_p": threshold,
    });
    let config = json!({ "n": n, "p_min": p_min, "p_max": p_max, "steps": steps });
    let mut out = Outcome::new(config, results, table);
    out.summary = vec![
        format!("fitted slope of value/n: {}", show(slope)),
        format!("grid crossing p: {}", show(crossing)),
        format!("bisected threshold p: {}", show(threshold)),
    ];
    out.plots.push(Plot {
        name: "witness",
        columns: ["p", "value_per_site"],
        points: per_site,
    });
    Ok(out)
}

/// `<J_x²> + <J_y²> + <J_z²>` from the collective components.
fn total_spin_squared<S: QuantumState + ?Sized>(
    spin: &CollectiveSpin<LinearOperator>,
    state: &S,
) -> Result<f64> {
    let mut acc = 0.0;
    for axis in Axis::ALL {
        acc += moment(spin.axis(axis), state, 2)?;
    }
    Ok(acc)
}

fn lattice_for(command: &str, n: usize, cutoff: usize) -> Result<FockLatticeSpec> {
    if cutoff < 1 {
        return usage(format!("{command} needs --cutoff of at least 1"));
    }
    Ok(FockLatticeSpec::new(n, cutoff)?)
}

/// Collective uncertainty and related numbers for a unit-filled chain of
/// adjacent singlets.
pub fn singlet_suite(n: usize, cutoff: usize) -> Result<Outcome> {
    even_in_range("singlet-suite", n, 2, usize::MAX)?;
    let lattice = lattice_for("singlet-suite", n, cutoff)?;
    let qubits = qubit_singlet_chain(n / 2)?;
    let state = embed_qubit_chain_into(&qubits, &lattice)?;
    let spin = lattice_spin(&lattice)?;
    let uncertainty = collective_uncertainty_criterion(&spin, &state)?;
    let squeezing = best_spin_squeezing(&spin, &state)?;
    let j2 = total_spin_squared(&spin, &state)?;
    let chain_value =
        collective_uncertainty_criterion(&chain_spin(&ChainSpec::new(n)?)?, &qubits)?.value;

    let mut table = Table::new(&REPORT_HEADER);
    table.push(report_row(&uncertainty));
    table.push(report_row(&squeezing));
    table.push(scalar_row("total_spin_squared", j2));
    table.push(scalar_row("qubit_chain_uncertainty", chain_value));
    let results = json!({
        "n": n,
        "pairs": n / 2,
        "cutoff": cutoff,
        "dimension": lattice.space().dim(),
        "criteria": [uncertainty, squeezing],
        "total_spin_squared": j2,
        "qubit_chain_uncertainty": chain_value,
    });
    let mut out = Outcome::new(json!({ "n": n, "cutoff": cutoff }), results, table);
    out.summary = vec![uncertainty.to_string(), squeezing.to_string()];
    Ok(out)
}

/// Ground state of the open Heisenberg chain in the unit-filled sector.
pub fn heisenberg(n: usize, cutoff: usize, coupling: Coupling) -> Result<Outcome> {
    in_range("heisenberg", n, 2, usize::MAX)?;
    let lattice = lattice_for("heisenberg", n, cutoff)?;
    let gs = heisenberg_ground_state(&lattice, coupling)?;
    let spin = lattice_spin(&lattice)?;
    let uncertainty = collective_uncertainty_criterion(&spin, &gs.state)?;
    let squeezing = best_spin_squeezing(&spin, &gs.state)?;
    let j2 = total_spin_squared(&spin, &gs.state)?;
    let top = top_shell_weight(&lattice, &gs.state)?;
    let singlet_fidelity = if n.is_multiple_of(2) {
        let singlets = embed_qubit_chain_into(&qubit_singlet_chain(n / 2)?, &lattice)?;
        Some(singlets.fidelity(&gs.state)?)
    } else {
        None
    };

    let mut table = Table::new(&REPORT_HEADER);
    table.push(report_row(&uncertainty));
    table.push(report_row(&squeezing));
    table.push(scalar_row("energy", gs.energy));
    table.push(scalar_row("gap", gs.gap));
    table.push(scalar_row("total_spin_squared", j2));
    table.push(scalar_row("top_shell_weight", top));
    if let Some(f) = singlet_fidelity {
        table.push(scalar_row("singlet_chain_fidelity", f));
    }
    let results = json!({
        "n": n,
        "cutoff": cutoff,
        "coupling": coupling,
        "dimension": lattice.space().dim(),
        "energy": gs.energy,
        "gap": gs.gap,
        "degenerate": gs.degenerate,
        "criteria": [uncertainty, squeezing],
        "total_spin_squared": j2,
        "top_shell_weight": top,
        "singlet_chain_fidelity": singlet_fidelity,
    });
    let config = json!({ "n": n, "cutoff": cutoff, "coupling": coupling });
    let mut out = Outcome::new(config, results, table);
    out.summary = vec![
        uncertainty.to_string(),
        format!("energy {:.12} gap {:.12}", gs.energy, gs.gap),
    ];
    if gs.degenerate {
        out.summary
            .push("ground level is degenerate; one ground vector was used".to_string());
    }
    Ok(out)
}

fn comparison_json(cmp: &MomentComparison) -> Value {
    json!({
        "entries": cmp.entries,
        "max_difference": cmp.max_difference,
        "indistinguishable": cmp.indistinguishable,
        "first_difference": cmp.first_difference(),
    })
}

fn push_comparison(table: &mut Table, label: &str, cmp: &MomentComparison) {
    for e in &cmp.entries {
        table.push(vec![
            label.into(),
            e.axis.clone().into(),
            e.order.into(),
            e.value_a.into(),
            e.value_b.into(),
            e.difference.into(),
        ]);
    }
}

const AXIS_LABELS: [&str; 3] = ["x", "y", "z"];

/// Moments of the cluster state against the totally mixed state, and the
/// first and second moments of a separable state built to match the cluster.
pub fn moments_compare(n: usize, max_order: u32) -> Result<Outcome> {
    in_range("moments-compare", n, 2, MAX_MOMENT_SITES)?;
    if !(1..=MAX_MOMENT_ORDER).contains(&max_order) {
        return usage(format!(
            "moments-compare needs --max-order between 1 and {MAX_MOMENT_ORDER}, got {max_order}"
        ));
    }
    let chain = ChainSpec::new(n)?;
    let spin = chain_spin(&chain)?;
    let cluster = cluster_state(&ClusterSpec::uniform(chain))?;
    let axes = [Direction::X, Direction::Y, Direction::Z];
    let mixed = MaximallyMixed::new(chain.space());
    let vs_mixed = moment_indistinguishability(&spin, &cluster, &mixed, &axes, max_order)?;

    let mut table = Table::new(&[
        "comparison",
        "axis",
        "order",
        "value_a",
        "value_b",
        "difference",
    ]);
    push_comparison(&mut table, "cluster_vs_mixed", &vs_mixed);
    let mut summary = vec![format!(
        "cluster vs mixed up to order {max_order}: max difference {:.3e}",
        vs_mixed.max_difference
    )];
    let separable = if n >= 4 {
        let rho_s = moment_matching_separable_state(n)?;
        let vs_cluster = moment_indistinguishability(&spin, &rho_s, &cluster, &axes, 2)?;
        let a_sep = anticommutator_moments(&spin, &rho_s)?;
        let a_cluster = anticommutator_moments(&spin, &cluster)?;
        push_comparison(&mut table, "separable_vs_cluster", &vs_cluster);
        for k in 0..3 {
            for l in k..3 {
                table.push(vec![
                    "anticommutator".into(),
                    format!("{}{}", AXIS_LABELS[k], AXIS_LABELS[l]).into(),
                    2u32.into(),
                    a_sep[k][l].into(),
                    a_cluster[k][l].into(),
                    (a_sep[k][l] - a_cluster[k][l]).abs().into(),
                ]);
            }
        }
        summary.push(format!(
            "separable vs cluster first and second moments: max difference {:.3e}",
            vs_cluster.max_difference
        ));
        summary.push(format!("A_zx of the separable state: {:.12}", a_sep[2][0]));
        json!({
            "moments": comparison_json(&vs_cluster),
            "anticommutators_separable": a_sep,
            "anticommutators_cluster": a_cluster,
            "a_zx": a_sep[2][0],
        })
    } else {
        summary.push("separable comparison needs n >= 4; skipped".to_string());
        Value::Null
    };
    let results = json!({
        "n": n,
        "max_order": max_order,
        "cluster_vs_mixed": comparison_json(&vs_mixed),
        "separable_vs_cluster": separable,
    });
    let config = json!({ "n": n, "max_order": max_order });
    let mut out = Outcome::new(config, results, table);
    out.summary = summary;
    Ok(out)
}

pub struct PulseRequest {
    pub n: usize,
    pub params: PulseParams,
    /// `(budget, seed)` when optimizing.
    pub optimize: Option<(usize, u64)>,
}

fn pulse_point(chain: &ChainSpec, params: PulseParams) -> Result<(f64, CriterionReport, f64)> {
    let spin = chain_spin(chain)?;
    let state = pulsed_state(chain, params)?;
    Ok((
        violation_ratio(&spin, &state)?,
        collective_uncertainty_criterion(&spin, &state)?,
        pulse_unitarity_error(chain, params)?,
    ))
}

fn params_rows(table: &mut Table, prefix: &str, p: PulseParams) {
    for (name, v) in ["theta_xx", "theta_yy", "theta_z"].iter().zip(p.to_array()) {
        table.push(scalar_row(&format!("{prefix}{name}"), v));
    }
}

/// Violation ratio of a pulsed product state, optionally after optimizing the
/// pulse angles.
pub fn pulse(req: &PulseRequest) -> Result<Outcome> {
    in_range("pulse", req.n, 2, MAX_PULSE_SITES)?;
    let chain = ChainSpec::new(req.n)?;
    let mut table = Table::new(&REPORT_HEADER);
    let mut config =
        json!({ "n": req.n, "params": req.params, "optimize": req.optimize.is_some() });
    let Some((budget, seed)) = req.optimize else {
        let (ratio, report, unitarity) = pulse_point(&chain, req.params)?;
        params_rows(&mut table, "", req.params);
        table.push(scalar_row("ratio", ratio));
        table.push(report_row(&report));
        table.push(scalar_row("unitarity_error", unitarity));
        let results = json!({
            "n": req.n,
            "params": req.params,
            "ratio": ratio,
            "criterion": report,
            "unitarity_error": unitarity,
        });
        let mut out = Outcome::new(config, results, table);
        out.summary = vec![format!("ratio {ratio:.12}"), report.to_string()];
        return Ok(out);
    };
    if budget < 1 {
        return usage("pulse needs --budget of at least 1".to_string());
    }
    config["budget"] = json!(budget);
    config["seed"] = json!(seed);
    let cfg = OptimizerConfig::new(budget, seed);
    let best = optimize_pulse(&chain, req.params, &cfg)?;
    let (ratio, report, unitarity) = pulse_point(&chain, best.params)?;
    params_rows(&mut table, "initial_", req.params);
    table.push(scalar_row("initial_ratio", best.initial_ratio));
    params_rows(&mut table, "", best.params);
    table.push(scalar_row("ratio", ratio));
    table.push(report_row(&report));
    table.push(scalar_row("unitarity_error", unitarity));
    table.push(scalar_row("evaluations", best.evaluations));
    let results = json!({
        "n": req.n,
        "initial_params": req.params,
        "initial_ratio": best.initial_ratio,
        "params": best.params,
        "ratio": ratio,
        "criterion": report,
        "unitarity_error": unitarity,
        "evaluations": best.evaluations,
        "optimizer": cfg,
    });
    let mut out = Outcome::new(config, results, table);
    out.summary = vec![
        format!("initial ratio {:.12}", best.initial_ratio),
        format!(
            "optimized ratio {ratio:.12} after {} evaluations",
            best.evaluations
        ),
    ];
    out.plots.push(Plot {
        name: "trace",
        columns: ["iteration", "ratio"],
        points: best
            .trace
            .iter()
            .map(|t| (t.iteration as f64, t.ratio))
            .collect(),
    });
    out.trace = Some(best.trace.iter().map(to_value).collect());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_ends() {
        let g = p_grid(0.5, 1.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[10], 1.0);
        assert_eq!(p_grid(0.7, 0.7, 1), vec![0.7]);
    }

    #[test]
    fn slope_and_crossing_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert!((fitted_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(fitted_slope(&[(1.0, 2.0)]), None);
        let c = grid_crossing(&[0.0, 1.0, 2.0], &[-1.0, -0.5, 0.5]).unwrap();
        assert!((c - 1.5).abs() < 1e-15);
        assert_eq!(grid_crossing(&[0.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn odd_chain_is_a_usage_error() {
        let err = cluster_witness(5).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("even"));
    }
}
