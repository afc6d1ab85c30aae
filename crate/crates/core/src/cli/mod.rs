//! Command-line front end.
//!
//! Energies given on the command line and written to files are in the
//! global frame of the chain (zero at the bottom of the deepest well).
//! Wavefunction positions are pair-local: shallow well on the left, the
//! pair's midpoint at x = 0.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::cascade::{solve_cascade, CascadeReport, ReferenceValues, SCHEMA_VERSION};
use crate::dynamics::{decay_time, first_maximum_time, tunneling_time, ResonantPair};
use crate::eigensolver::{
    calibrate_depth, calibrate_distance, solve_window, CalibrationOptions, DepthRole, Diagnostics,
    Level,
};
use crate::error::{Error, Result};
use crate::oracle::{fd_bound_levels, FdConfig};
use crate::potential::{cascade_profile, pair_profile, WellPair, CASCADE_WELLS};
use crate::quantities::PhysicalConstants;
use crate::transcendental::{self, SideValue};
use crate::wavefunctions::build_wavefunction;

use config::{parse_config, Format, RunConfig};
use output::{num, write_csv, write_json};

#[derive(Debug, Parser)]
#[command(
    name = "tunnelcascade",
    version,
    about = "Bound states and tunneling times of asymmetric double-well chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(long, short)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairArg {
    /// 1..3 for the active pairs, 4 for the closing pair.
    #[arg(long, default_value_t = 1)]
    pub pair: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    Distance,
    ShallowDepth,
    DeepDepth,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound states of one pair.
    SolvePair {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        pair: PairArg,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: Option<f64>,
    },
    /// Tabulates both sides of the matching equation.
    ScanPair {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        pair: PairArg,
        #[arg(long)]
        emin: f64,
        #[arg(long)]
        emax: f64,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Compares a pair's levels with the finite-difference spectrum.
    Oracle {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        pair: PairArg,
        /// Richardson extrapolation, overriding the config.
        #[arg(long)]
        extrapolate: bool,
    },
    /// Tunneling and decay times of a doublet.
    Times {
        /// Optional; supplies constants and output settings.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, requires = "e_minus", conflicts_with = "from")]
        e_plus: Option<f64>,
        #[arg(long, requires = "e_plus")]
        e_minus: Option<f64>,
        /// JSON written by solve-pair.
        #[arg(long, requires = "lower")]
        from: Option<PathBuf>,
        /// Index of the doublet's lower level in that file.
        #[arg(long)]
        lower: Option<usize>,
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// Gap for the decay-time estimate, eV.
        #[arg(long)]
        decay_gap: Option<f64>,
    },
    /// Full four-well schedule and report.
    Cascade {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write profile.csv.
        #[arg(long)]
        emit_profile: bool,
        /// Also write scan_pair<i>.csv around each doublet.
        #[arg(long)]
        emit_scan: bool,
        /// Check each splitting against the finite-difference oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Fits one geometric parameter of a pair to target levels.
    Calibrate {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        pair: PairArg,
        /// Comma-separated global energies; defaults to the published doublet.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Vary::Distance)]
        vary: Vary,
        /// Search range "lo,hi" (Å or eV).
        #[arg(long, value_delimiter = ',')]
        range: Vec<f64>,
    },
    /// Samples one eigenfunction.
    Wavefunction {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        pair: PairArg,
        /// Level index within the pair, 0 = lowest.
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
}

/// A pair pulled out of the chain, with its place in the global frame.
struct SelectedPair {
    number: usize,
    name: String,
    labels: [String; 2],
    pair: WellPair,
    offset: f64,
}

fn select_pair(cfg: &RunConfig, number: usize) -> Result<SelectedPair> {
    let w = &cfg.wells;
    let (i, j) = match number {
        n @ 1..=3 => (n - 1, n),
        4 => (CASCADE_WELLS - 1, 0),
        n => {
            return Err(Error::Config(format!(
                "--pair must be 1, 2, 3 or 4, got {n}"
            )))
        }
    };
    let pair = if number == 4 {
        w.closing_pair()?
            .ok_or_else(|| Error::Config("pair 4 needs wells.closing_distance".into()))?
    } else {
        w.pair(i)?
    };
    Ok(SelectedPair {
        number,
        name: format!("{}-{}", i + 1, j + 1),
        labels: [w.labels[i].clone(), w.labels[j].clone()],
        pair,
        offset: w.pair_offset(i, j),
    })
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Domain(format!("output: {e}"))
}

#[derive(Serialize)]
struct LevelRecord {
    index: usize,
    #[serde(rename = "energy_eV")]
    energy: f64,
    #[serde(rename = "local_energy_eV")]
    local_energy: f64,
    regime: transcendental::Regime,
    residual: f64,
}

fn level_records(levels: &[Level], offset: f64) -> Vec<LevelRecord> {
    levels
        .iter()
        .map(|l| LevelRecord {
            index: l.index,
            energy: l.energy + offset,
            local_energy: l.energy,
            regime: l.regime,
            residual: l.residual,
        })
        .collect()
}

#[derive(Serialize)]
struct SolvePairOutput<'a> {
    schema_version: u32,
    pair: String,
    wells: &'a [String; 2],
    geometry: WellPair,
    #[serde(rename = "offset_eV")]
    offset: f64,
    config: &'a crate::eigensolver::SolverConfig,
    levels: Vec<LevelRecord>,
    diagnostics: Diagnostics,
}

fn solve_pair_cmd(
    cfg: &RunConfig,
    number: usize,
    emin: Option<f64>,
    emax: Option<f64>,
) -> Result<()> {
    let consts = cfg.physical_constants()?;
    let sel = select_pair(cfg, number)?;
    let lo = emin.map_or(0.0, |e| e - sel.offset);
    let hi = emax.map_or(sel.pair.deep_depth(), |e| e - sel.offset);
    let sol = solve_window(&sel.pair, &cfg.solver, &consts, lo, hi)?;
    let out = SolvePairOutput {
        schema_version: SCHEMA_VERSION,
        pair: sel.name.clone(),
        wells: &sel.labels,
        geometry: sel.pair,
        offset: sel.offset,
        config: &cfg.solver,
        levels: level_records(&sol.levels, sel.offset),
        diagnostics: sol.diagnostics,
    };
    if cfg.output.wants(Format::Json) {
        write_json(
            &cfg.out_dir(),
            &format!("solve_pair{}.json", sel.number),
            &out,
        )
        .map_err(io_err)?;
    }
    if cfg.output.wants(Format::Table) {
        println!(
            "pair {} ({}-{}), L = {} Å",
            sel.name,
            sel.labels[0],
            sel.labels[1],
            sel.pair.distance()
        );
        println!(
            "{:>5} {:>14} {:>14} {:>6} {:>10}",
            "n", "E (eV)", "local (eV)", "regime", "residual"
        );
        for l in &out.levels {
            println!(
                "{:>5} {:>14.9} {:>14.9} {:>6} {:>10.2e}",
                l.index, l.energy, l.local_energy, l.regime, l.residual
            );
        }
        if !out.diagnostics.rejected_brackets.is_empty() {
            println!(
                "{} bracket(s) rejected",
                out.diagnostics.rejected_brackets.len()
            );
        }
    }
    Ok(())
}

fn side_cell(v: SideValue) -> String {
    v.value().map(num).unwrap_or_default()
}

fn scan_rows(
    sel: &SelectedPair,
    emin: f64,
    emax: f64,
    step: f64,
    consts: &PhysicalConstants,
) -> Result<Vec<[String; 6]>> {
    let points = transcendental::scan(
        &sel.pair,
        emin - sel.offset,
        emax - sel.offset,
        step,
        consts,
    )?;
    Ok(points
        .iter()
        .map(|p| {
            [
                num(p.energy + sel.offset),
                side_cell(p.lhs),
                side_cell(p.rhs),
                side_cell(p.mismatch()),
                p.regime.label().to_string(),
                u8::from(p.is_pole()).to_string(),
            ]
        })
        .collect())
}

const SCAN_HEADER: [&str; 6] = ["E_eV", "lhs", "rhs", "mismatch", "regime", "pole_flag"];

fn scan_pair_cmd(cfg: &RunConfig, number: usize, emin: f64, emax: f64, step: f64) -> Result<()> {
    let consts = cfg.physical_constants()?;
    let sel = select_pair(cfg, number)?;
    let rows = scan_rows(&sel, emin, emax, step, &consts)?;
    let path = write_csv(
        &cfg.out_dir(),
        &format!("scan_pair{}.csv", sel.number),
        &SCAN_HEADER,
        &rows,
    )
    .map_err(io_err)?;
    if cfg.output.wants(Format::Table) {
        println!("{} points written to {}", rows.len(), path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    index: usize,
    #[serde(rename = "exact_eV")]
    exact: f64,
    #[serde(rename = "oracle_eV")]
    oracle: f64,
    #[serde(rename = "difference_eV")]
    difference: f64,
}

fn oracle_cmd(cfg: &RunConfig, number: usize, extrapolate: bool) -> Result<()> {
    let consts = cfg.physical_constants()?;
    let sel = select_pair(cfg, number)?;
    let fd = FdConfig {
        extrapolate: extrapolate || cfg.oracle.extrapolate,
        ..cfg.oracle
    };
    let exact = solve_window(&sel.pair, &cfg.solver, &consts, 0.0, sel.pair.deep_depth())?.levels;
    let spectrum = fd_bound_levels(&pair_profile(&sel.pair), &fd, &consts)?;
    let rows: Vec<OracleRow> = exact
        .iter()
        .zip(&spectrum.levels)
        .map(|(l, f)| OracleRow {
            index: l.index,
            exact: l.energy + sel.offset,
            oracle: f + sel.offset,
            difference: f - l.energy,
        })
        .collect();
    let worst = rows.iter().map(|r| r.difference.abs()).fold(0.0, f64::max);
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "pair": sel.name,
        "oracle": fd,
        "exact_count": exact.len(),
        "oracle_count": spectrum.levels.len(),
        "max_difference_eV": worst,
        "levels": rows,
    });
    if cfg.output.wants(Format::Json) {
        write_json(
            &cfg.out_dir(),
            &format!("oracle_pair{}.json", sel.number),
            &out,
        )
        .map_err(io_err)?;
    }
    if cfg.output.wants(Format::Table) {
        println!(
            "{:>5} {:>14} {:>14} {:>11}",
            "n", "exact (eV)", "oracle (eV)", "diff (eV)"
        );
        for r in &rows {
            println!(
                "{:>5} {:>14.9} {:>14.9} {:>11.2e}",
                r.index, r.exact, r.oracle, r.difference
            );
        }
        println!(
            "levels: {} exact, {} oracle; max |diff| {:.2e} eV",
            exact.len(),
            spectrum.levels.len(),
            worst
        );
    }
    Ok(())
}

fn doublet_from_file(path: &Path, lower: usize) -> Result<ResonantPair> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let energy = |i: usize| {
        v["levels"][i]["energy_eV"]
            .as_f64()
            .ok_or_else(|| Error::Config(format!("{}: no levels[{i}].energy_eV", path.display())))
    };
    ResonantPair::new(energy(lower + 1)?, energy(lower)?)
}

#[allow(clippy::too_many_arguments)]
fn times_cmd(
    config: Option<&Path>,
    e_plus: Option<f64>,
    e_minus: Option<f64>,
    from: Option<&Path>,
    lower: Option<usize>,
    k: u32,
    decay_gap: Option<f64>,
) -> Result<()> {
    let cfg = config.map(load).transpose()?;
    let consts = cfg
        .as_ref()
        .map_or(Ok(PhysicalConstants::codata2018()), |c| {
            c.physical_constants()
        })?;
    let doublet = match (e_plus, e_minus, from, lower) {
        (Some(p), Some(m), _, _) => ResonantPair::new(p, m)?,
        (_, _, Some(f), Some(i)) => doublet_from_file(f, i)?,
        _ => {
            return Err(Error::Config(
                "give --e-plus and --e-minus, or --from and --lower".into(),
            ))
        }
    };
    let t = tunneling_time(&doublet, k, &consts)?;
    let decay = decay_gap.map(|g| decay_time(g, &consts)).transpose()?;
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "doublet": doublet,
        "splitting_eV": doublet.splitting(),
        "k": k,
        "tunneling_time_s": t,
        "tunneling_time_ps": t * 1e12,
        "first_maximum_s": first_maximum_time(&doublet, &consts)?,
        "decay_gap_eV": decay_gap,
        "decay_time_s": decay,
        "tunneling_to_decay_ratio": decay.map(|d| t / d),
    });
    match &cfg {
        Some(c) => {
            if c.output.wants(Format::Json) {
                write_json(&c.out_dir(), "times.json", &out).map_err(io_err)?;
            }
            if c.output.wants(Format::Table) {
                print!("{}", times_table(&doublet, k, t, decay));
            }
        }
        None => print!("{}", output::to_json(&out).map_err(io_err)?),
    }
    Ok(())
}

fn times_table(d: &ResonantPair, k: u32, t: f64, decay: Option<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "E+ = {:.9} eV, E- = {:.9} eV, splitting {:.3e} eV",
        d.e_plus,
        d.e_minus,
        d.splitting()
    );
    let _ = writeln!(
        s,
        "tunneling time (k = {k}): {:.6e} s = {:.6} ps",
        t,
        t * 1e12
    );
    if let Some(dt) = decay {
        let _ = writeln!(s, "decay time: {dt:.6e} s, ratio {:.1}", t / dt);
    }
    s
}

fn cascade_table(r: &CascadeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "wells");
    for w in &r.wells {
        let _ = writeln!(
            s,
            "  {:<6} depth {:>7.4} eV  floor {:>7.4} eV  relaxed level {:>11.6} eV (pair {})",
            w.label, w.depth, w.floor, w.ground, w.ground_from
        );
    }
    let a = &r.absorption;
    let _ = writeln!(
        s,
        "absorption  {:.6} -> {:.6} eV  dE {:.6} eV  {:.2} nm",
        a.ground, a.excited, a.delta_e, a.wavelength_nm
    );
    let _ = writeln!(s, "steps");
    for (st, res) in r.steps.iter().zip(&r.resonances) {
        let _ = writeln!(
            s,
            "  {}->{}  doublet {:.6}/{:.6} eV  T {:.4} ps  decay {:.6} eV ({:.3e} s)  ratio {:.1}{}",
            st.from_site,
            st.to_site,
            st.resonance.e_minus,
            st.resonance.e_plus,
            st.tunneling_time_ps,
            st.decay_gap,
            st.decay_time,
            st.tunneling_to_decay_ratio,
            res.oracle_splitting
                .map(|o| format!("  oracle splitting {:.4e} eV", o.value))
                .unwrap_or_default()
        );
    }
    let _ = writeln!(s, "{}", r.tunneling_vs_decay.note);
    let _ = writeln!(s, "comparison with measured steps");
    for c in &r.comparison.experiment {
        let _ = writeln!(
            s,
            "  step {}  model {:.4} ps vs {} ps (ratio {:.3}, same order: {})  {:.3}->{:.3} eV vs {:.2}->{:.2} eV",
            c.step,
            c.model_time_ps,
            c.experiment_time_ps,
            c.time_ratio,
            c.same_order,
            c.model_from,
            c.model_to,
            c.experiment_from,
            c.experiment_to
        );
    }
    s
}

fn cascade_cmd(cfg: &RunConfig, emit_profile: bool, emit_scan: bool, oracle: bool) -> Result<()> {
    let consts = cfg.physical_constants()?;
    let report = solve_cascade(
        &cfg.wells,
        &cfg.solver,
        &cfg.cascade,
        oracle.then_some(&cfg.oracle),
        &consts,
    )?;
    let dir = cfg.out_dir();
    if cfg.output.wants(Format::Json) {
        write_json(&dir, "report.json", &report).map_err(io_err)?;
    }
    if emit_profile {
        let rows: Vec<[String; 2]> = cascade_profile(&cfg.wells)?
            .vertices()
            .into_iter()
            .map(|(x, v)| [num(x), num(v)])
            .collect();
        write_csv(&dir, "profile.csv", &["x_A", "V_eV"], &rows).map_err(io_err)?;
    }
    if emit_scan {
        for (k, res) in report.resonances.iter().enumerate() {
            let sel = select_pair(cfg, k + 1)?;
            let w = cfg.cascade.resonance_window;
            let rows = scan_rows(&sel, res.incoming - w, res.incoming + w, 1e-5, &consts)?;
            write_csv(
                &dir,
                &format!("scan_pair{}.csv", k + 1),
                &SCAN_HEADER,
                &rows,
            )
            .map_err(io_err)?;
        }
    }
    if cfg.output.wants(Format::Table) {
        print!("{}", cascade_table(&report));
    }
    Ok(())
}

fn calibrate_cmd(
    cfg: &RunConfig,
    number: usize,
    targets: &[f64],
    vary: Vary,
    range: &[f64],
) -> Result<()> {
    if !range.is_empty() && range.len() != 2 {
        return Err(Error::Config(format!(
            "--range takes two values lo,hi, got {}",
            range.len()
        )));
    }
    let consts = cfg.physical_constants()?;
    let sel = select_pair(cfg, number)?;
    let targets: Vec<f64> = if targets.is_empty() {
        let reference = ReferenceValues::published();
        let (lo, hi) = *reference
            .doublets
            .get(number - 1)
            .ok_or_else(|| Error::Config("--targets is required for pair 4".into()))?;
        vec![lo, hi]
    } else {
        targets.to_vec()
    };
    let local: Vec<f64> = targets.iter().map(|t| t - sel.offset).collect();
    let p = sel.pair;
    let range = match (range, vary) {
        ([lo, hi], _) => (*lo, *hi),
        (_, Vary::Distance) => (60.0, 65.0),
        (_, Vary::ShallowDepth) => (
            0.5 * p.shallow_depth(),
            p.deep_depth().min(1.5 * p.shallow_depth()),
        ),
        (_, Vary::DeepDepth) => (
            p.deep_depth().max(p.shallow_depth() * 1.001),
            1.5 * p.deep_depth(),
        ),
    };
    let cal = match vary {
        Vary::Distance => calibrate_distance(
            &p,
            &local,
            range,
            &cfg.solver,
            &CalibrationOptions::distance(),
            &consts,
        )?,
        Vary::ShallowDepth => calibrate_depth(
            &p,
            DepthRole::Deep,
            &local,
            range,
            &cfg.solver,
            &CalibrationOptions::depth(),
            &consts,
        )?,
        Vary::DeepDepth => calibrate_depth(
            &p,
            DepthRole::Shallow,
            &local,
            range,
            &cfg.solver,
            &CalibrationOptions::depth(),
            &consts,
        )?,
    };
    // calibrate_depth reports levels relative to the moved barrier top
    let shift = if vary == Vary::DeepDepth {
        cal.value - p.deep_depth()
    } else {
        0.0
    };
    let matched: Vec<f64> = cal.matched.iter().map(|m| m - shift + sel.offset).collect();
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "pair": sel.name,
        "vary": format!("{vary:?}"),
        "range": range,
        "value": cal.value,
        "misfit_eV": cal.misfit,
        "targets_eV": targets,
        "matched_eV": matched,
        "geometry": cal.pair,
    });
    if cfg.output.wants(Format::Json) {
        write_json(
            &cfg.out_dir(),
            &format!("calibrate_pair{}.json", sel.number),
            &out,
        )
        .map_err(io_err)?;
    }
    if cfg.output.wants(Format::Table) {
        println!(
            "pair {}: {vary:?} = {:.6} (misfit {:.3e} eV); matched {:?} eV",
            sel.name, cal.value, cal.misfit, matched
        );
    }
    Ok(())
}

fn wavefunction_cmd(cfg: &RunConfig, number: usize, level: usize, points: usize) -> Result<()> {
    let consts = cfg.physical_constants()?;
    let sel = select_pair(cfg, number)?;
    let levels = solve_window(&sel.pair, &cfg.solver, &consts, 0.0, sel.pair.deep_depth())?.levels;
    let lv = levels.get(level).ok_or_else(|| {
        Error::Config(format!(
            "pair {} has {} levels; --level {level} is out of range",
            sel.name,
            levels.len()
        ))
    })?;
    let wf = build_wavefunction(&sel.pair, lv, &consts)?;
    // pair-local order: shallow well first
    let (shallow, deep) =
        if cfg.wells.depths[sel_index(&sel, 0)] < cfg.wells.depths[sel_index(&sel, 1)] {
            (&sel.labels[0], &sel.labels[1])
        } else {
            (&sel.labels[1], &sel.labels[0])
        };
    let stem = format!("wavefunction_{shallow}-{deep}_{level}");
    let dir = cfg.out_dir();
    if cfg.output.wants(Format::Csv) {
        let rows: Vec<[String; 2]> = wf
            .sample(points)
            .into_iter()
            .map(|(x, p)| [num(x), num(p)])
            .collect();
        write_csv(&dir, &format!("{stem}.csv"), &["x_A", "psi"], &rows).map_err(io_err)?;
    }
    if cfg.output.wants(Format::Json) {
        let out = json!({
            "schema_version": SCHEMA_VERSION,
            "pair": sel.name,
            "energy_global_eV": wf.energy + sel.offset,
            "wavefunction": wf,
            "node_count": wf.node_count(),
            "region_probabilities": wf.region_probabilities(),
            "matching_residuals": wf.matching_residuals(),
        });
        write_json(&dir, &format!("{stem}.json"), &out).map_err(io_err)?;
    }
    if cfg.output.wants(Format::Table) {
        let [p2, p3, p4] = wf.region_probabilities();
        println!(
            "pair {} level {level}: E = {:.9} eV, nodes {}, probability {shallow} {p2:.4} barrier {p3:.4} {deep} {p4:.4}",
            sel.name,
            wf.energy + sel.offset,
            wf.node_count()
        );
    }
    Ok(())
}

fn sel_index(sel: &SelectedPair, side: usize) -> usize {
    match (sel.number, side) {
        (4, 0) => CASCADE_WELLS - 1,
        (4, _) => 0,
        (n, s) => n - 1 + s,
    }
}

/// Runs one parsed command.
pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::SolvePair {
            config,
            pair,
            emin,
            emax,
        } => solve_pair_cmd(&load(&config.config)?, pair.pair, *emin, *emax),
        Command::ScanPair {
            config,
            pair,
            emin,
            emax,
            step,
        } => scan_pair_cmd(&load(&config.config)?, pair.pair, *emin, *emax, *step),
        Command::Oracle {
            config,
            pair,
            extrapolate,
        } => oracle_cmd(&load(&config.config)?, pair.pair, *extrapolate),
        Command::Times {
            config,
            e_plus,
            e_minus,
            from,
            lower,
            k,
            decay_gap,
        } => times_cmd(
            config.as_deref(),
            *e_plus,
            *e_minus,
            from.as_deref(),
            *lower,
            *k,
            *decay_gap,
        ),
        Command::Cascade {
            config,
            emit_profile,
            emit_scan,
            oracle,
        } => cascade_cmd(&load(&config.config)?, *emit_profile, *emit_scan, *oracle),
        Command::Calibrate {
            config,
            pair,
            targets,
            vary,
            range,
        } => calibrate_cmd(&load(&config.config)?, pair.pair, targets, *vary, range),
        Command::Wavefunction {
            config,
            pair,
            level,
            points,
        } => wavefunction_cmd(&load(&config.config)?, pair.pair, *level, *points),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Geometry(_) => "geometry",
        Error::Config(_) => "config",
        Error::Pole { .. } => "pole",
        Error::CalibrationFailed { .. } => "calibration_failed",
        Error::ResonanceNotFound { .. } => "resonance_not_found",
        Error::NotAnEigenvalue(..) => "not_an_eigenvalue",
        Error::Oracle(_) => "oracle",
    }
}

/// Exit code for an error: 2 for bad input, 1 for failed computations.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        1
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": error_kind(&e), "message": e.to_string() })
            );
            exit_code(&e)
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
