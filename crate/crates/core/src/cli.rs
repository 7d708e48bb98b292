//! Subcommand execution for the `tunnelsplit` binary.
//!
//! Each subcommand writes its CSV files, the materialized config
//! (`config.json`) and `metadata.json` into the output directory. Failures
//! write `error.json` and map to exit codes 2 (schema), 3 (numerical
//! invariant) or 4 (internal fault).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::clocks::{clock_times, hartman_sweep, strictly_increasing, ClockResult};
use crate::config::{parse_config, ConfigError, RunConfig};
use crate::error::Error;
use crate::field::anchored_grid;
use crate::oracle::{compare_fields, crank_nicolson_propagate, gaussian_initial, GridSpec};
use crate::packet::{diagnostics, Synthesizer};
use crate::splitting::{build_decomposition, exact_derivative_jump, Component, Parity};
use crate::stationary::{solve_full, EnergyMode};

/// Unitarity tolerance applied by `stationary`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance on `|A_tr^In|² − T`, `|A_ref^In|² − R` and the component sum.
pub const DECOMPOSITION_TOL: f64 = 1e-10;
/// Crank–Nicolson norm drift tolerance.
pub const CN_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Stationary,
    Decompose,
    Evolve,
    Diagnostics,
    OracleCheck,
    Clock,
    HartmanSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stationary => "stationary",
            Command::Decompose => "decompose",
            Command::Evolve => "evolve",
            Command::Diagnostics => "diagnostics",
            Command::OracleCheck => "oracle-check",
            Command::Clock => "clock",
            Command::HartmanSweep => "hartman-sweep",
        }
    }
}

/// Why a run did not succeed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunFailure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{operation}: {error}")]
    Numerical { operation: String, error: Error },
    #[error("{operation}: {message}")]
    Invariant { operation: String, message: String },
    #[error("internal fault: {0}")]
    Internal(String),
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Config(_) => 2,
            RunFailure::Numerical { .. } | RunFailure::Invariant { .. } => 3,
            RunFailure::Internal(_) => 4,
        }
    }

    fn record(&self) -> Value {
        let (kind, operation, path) = match self {
            RunFailure::Config(ConfigError::Schema { path, .. }) => ("schema", None, Some(path.clone())),
            RunFailure::Config(ConfigError::Io(_)) => ("io", None, None),
            RunFailure::Numerical { operation, .. } => ("numerical", Some(operation.clone()), None),
            RunFailure::Invariant { operation, .. } => ("invariant", Some(operation.clone()), None),
            RunFailure::Internal(_) => ("internal", None, None),
        };
        let variant = match self {
            RunFailure::Numerical { error, .. } => Some(format!("{error:?}")),
            _ => None,
        };
        json!({
            "kind": kind,
            "exit_code": self.exit_code(),
            "operation": operation,
            "path": path,
            "error": variant,
            "message": self.to_string(),
        })
    }
}

fn numerical(operation: &str) -> impl FnOnce(Error) -> RunFailure + '_ {
    move |error| RunFailure::Numerical {
        operation: operation.to_string(),
        error,
    }
}

fn internal<E: std::fmt::Display>(e: E) -> RunFailure {
    RunFailure::Internal(e.to_string())
}

fn missing(path: &str, message: &str) -> RunFailure {
    RunFailure::Config(ConfigError::Schema {
        path: path.into(),
        message: message.into(),
    })
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunFailure> {
    let mut w = BufWriter::new(File::create(path).map_err(internal)?);
    writeln!(w, "{}", header.join(",")).map_err(internal)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(internal)?;
    }
    w.flush().map_err(internal)
}

fn nums(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| fmt_f64(v)).collect()
}

/// What a successful subcommand produced.
struct Produced {
    files: Vec<String>,
    report: Value,
    /// Set when the outputs were written but an invariant check failed.
    failure: Option<RunFailure>,
}

fn produced(files: &[&str], report: Value) -> Produced {
    Produced {
        files: files.iter().map(|s| s.to_string()).collect(),
        report,
        failure: None,
    }
}

/// Parses the config, applies the overrides and runs one subcommand.
/// Returns the process exit code.
pub fn main_with(cmd: Command, config: &Path, out: Option<PathBuf>, workers: Option<usize>) -> i32 {
    let fallback_out = out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match parse_config(config) {
        Ok(c) => c,
        Err(e) => return report_failure(&fallback_out, &RunFailure::Config(e)),
    };
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let mut cfg = cfg;
    if let Some(w) = workers {
        if w == 0 {
            return report_failure(&out_dir, &missing("workers", "must be at least 1"));
        }
        cfg.workers = w;
    }
    cfg.output_dir = out_dir.display().to_string();
    match run(cmd, &cfg, &out_dir) {
        Ok(()) => 0,
        Err(f) => report_failure(&out_dir, &f),
    }
}

fn report_failure(out_dir: &Path, failure: &RunFailure) -> i32 {
    eprintln!("error: {failure}");
    if fs::create_dir_all(out_dir).is_ok() {
        if let Ok(text) = serde_json::to_string_pretty(&failure.record()) {
            let _ = fs::write(out_dir.join("error.json"), text + "\n");
        }
    }
    failure.exit_code()
}

/// Runs `cmd` on a pool of `cfg.workers` threads and writes every artifact
/// into `out_dir`.
pub fn run(cmd: Command, cfg: &RunConfig, out_dir: &Path) -> Result<(), RunFailure> {
    let start = Instant::now();
    fs::create_dir_all(out_dir).map_err(internal)?;
    let _ = fs::remove_file(out_dir.join("error.json"));
    let echo = serde_json::to_string_pretty(cfg).map_err(internal)?;
    fs::write(out_dir.join("config.json"), echo + "\n").map_err(internal)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(internal)?;
    let result = pool.install(|| match cmd {
        Command::Stationary => run_stationary(cfg, out_dir),
        Command::Decompose => run_decompose(cfg, out_dir),
        Command::Evolve => run_evolve(cfg, out_dir),
        Command::Diagnostics => run_diagnostics(cfg, out_dir),
        Command::OracleCheck => run_oracle(cfg, out_dir),
        Command::Clock => run_clock(cfg, out_dir),
        Command::HartmanSweep => run_hartman(cfg, out_dir),
    })?;

    let meta = json!({
        "subcommand": cmd.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "workers": cfg.workers,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "config": "config.json",
        "outputs": result.files,
        "tolerances": {
            "unitarity": UNITARITY_TOL,
            "decomposition": DECOMPOSITION_TOL,
            "midpoint_parity": crate::splitting::PARITY_TOL,
            "oddness": crate::splitting::ODDNESS_TOL,
            "cn_norm_drift": CN_NORM_TOL,
            "oracle_l2": cfg.resolved_oracle().map(|o| o.tolerance),
            "zero_flux": crate::clocks::ZERO_FLUX_TOL,
        },
        "report": result.report,
        "status": if result.failure.is_some() { "invariant_failed" } else { "ok" },
    });
    let text = serde_json::to_string_pretty(&meta).map_err(internal)?;
    fs::write(out_dir.join("metadata.json"), text + "\n").map_err(internal)?;
    match result.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn energies(cfg: &RunConfig) -> Result<&[f64], RunFailure> {
    if cfg.energies.is_empty() {
        return Err(missing("energies", "this subcommand needs at least one energy (or a packet)"));
    }
    Ok(&cfg.energies)
}

fn run_stationary(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let spec = cfg.potential_spec();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &e in energies(cfg)? {
        let mode = EnergyMode::new(e).map_err(numerical("stationary"))?;
        let amp = solve_full(&spec, mode).map_err(numerical("solve_full"))?;
        let residual = (amp.transmission + amp.reflection - 1.0).abs();
        worst = worst.max(residual);
        rows.push(nums(&[
            e,
            mode.k(),
            amp.transmission,
            amp.reflection,
            amp.transmitted.re,
            amp.transmitted.im,
            amp.reflected.re,
            amp.reflected.im,
            residual,
        ]));
    }
    write_csv(
        &out.join("stationary.csv"),
        &["E", "k", "T", "R", "Re_t", "Im_t", "Re_r", "Im_r", "unitarity_residual"],
        &rows,
    )?;
    let mut p = produced(&["stationary.csv"], json!({ "max_unitarity_residual": worst }));
    if worst >= UNITARITY_TOL {
        p.failure = Some(RunFailure::Invariant {
            operation: "solve_full".into(),
            message: format!("|T + R - 1| = {worst:e} exceeds {UNITARITY_TOL:e}"),
        });
    }
    Ok(p)
}

fn run_decompose(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let spec = cfg.potential_spec();
    let e = energies(cfg)?[0];
    let mode = EnergyMode::new(e).map_err(numerical("decompose"))?;
    let g = cfg.decompose_grid.expect("materialized with the energies");
    let x = anchored_grid(g.x_min, g.x_max, g.h, spec.midpoint());
    let dec = build_decomposition(&spec, mode, &x).map_err(numerical("build_decomposition"))?;

    let comps = [Component::Full, Component::WholeTr, Component::WholeRef, Component::Tr, Component::Ref];
    let rows: Vec<Vec<String>> = (0..x.len())
        .map(|i| {
            let mut r = vec![fmt_f64(x[i])];
            for c in comps {
                let z = dec.field(c)[i];
                r.push(fmt_f64(z.re));
                r.push(fmt_f64(z.im));
            }
            r
        })
        .collect();
    write_csv(
        &out.join("decompose.csv"),
        &["x", "Re_full", "Im_full", "Re_TR", "Im_TR", "Re_REF", "Im_REF", "Re_tr", "Im_tr", "Re_ref", "Im_ref"],
        &rows,
    )?;
    let rejected: Vec<Vec<String>> = (0..x.len())
        .map(|i| nums(&[x[i], dec.rejected_ref[i].re, dec.rejected_ref[i].im]))
        .collect();
    write_csv(&out.join("decompose_rejected.csv"), &["x", "Re_REF_even", "Im_REF_even"], &rejected)?;

    let amp = dec.amplitudes();
    let split = dec.split();
    let other = dec.states.rejected();
    let scale = dec.full.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let sum_residual = (0..x.len())
        .map(|i| (dec.whole_tr[i] + dec.whole_ref[i] - dec.full[i]).norm())
        .chain((0..x.len()).map(|i| (dec.tr[i] + dec.ref_[i] - dec.full[i]).norm()))
        .fold(0.0, f64::max);
    let (jump_tr, jump_ref) = exact_derivative_jump(&dec.states);
    let t_err = (split.tr_in.norm_sqr() - amp.transmission).abs();
    let r_err = (split.ref_in.norm_sqr() - amp.reflection).abs();
    let parity = match split.parity {
        Parity::Odd => 1.0,
        Parity::Even => -1.0,
        Parity::Undetermined => 0.0,
    };
    write_csv(
        &out.join("decompose_invariants.csv"),
        &[
            "E", "T", "R", "Re_A_tr_in", "Im_A_tr_in", "Re_A_ref_in", "Im_A_ref_in", "root_sign", "parity",
            "midpoint_residual", "rejected_Re_A_tr_in", "rejected_Im_A_tr_in", "rejected_midpoint_residual",
            "oddness_residual", "max_sum_residual", "Re_jump_tr", "Im_jump_tr", "Re_jump_ref", "Im_jump_ref",
        ],
        &[nums(&[
            e,
            amp.transmission,
            amp.reflection,
            split.tr_in.re,
            split.tr_in.im,
            split.ref_in.re,
            split.ref_in.im,
            f64::from(split.root_sign),
            parity,
            dec.states.midpoint_residual(),
            other.tr_in.re,
            other.tr_in.im,
            dec.states.rejected_midpoint_residual(),
            dec.oddness_residual,
            sum_residual,
            jump_tr.re,
            jump_tr.im,
            jump_ref.re,
            jump_ref.im,
        ])],
    )?;
    let mut p = produced(
        &["decompose.csv", "decompose_rejected.csv", "decompose_invariants.csv"],
        json!({
            "max_sum_residual": sum_residual,
            "weight_error_tr": t_err,
            "weight_error_ref": r_err,
            "midpoint_residual": dec.states.midpoint_residual(),
            "oddness_residual": dec.oddness_residual,
        }),
    );
    if sum_residual >= DECOMPOSITION_TOL * scale || t_err >= DECOMPOSITION_TOL || r_err >= DECOMPOSITION_TOL {
        p.failure = Some(RunFailure::Invariant {
            operation: "build_decomposition".into(),
            message: format!("sum residual {sum_residual:e}, weight errors {t_err:e} / {r_err:e}"),
        });
    }
    Ok(p)
}

struct PacketRun {
    synth: Synthesizer,
    x: Vec<f64>,
    times: Vec<f64>,
}

fn packet_run(cfg: &RunConfig) -> Result<PacketRun, RunFailure> {
    let spec = cfg.potential_spec();
    let packet = cfg
        .packet_spec()
        .ok_or_else(|| missing("packet", "this subcommand needs a packet"))?;
    let synth = Synthesizer::with_span(&spec, packet, cfg.spectral.n_k, cfg.spectral.span_sigmas)
        .map_err(numerical("synthesize"))?;
    let g = cfg.grid.expect("materialized with the packet");
    let x = anchored_grid(g.x_min, g.x_max, g.h, spec.midpoint());
    let times = cfg.times.clone().expect("materialized with the packet");
    Ok(PacketRun { synth, x, times })
}

fn run_evolve(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let run = packet_run(cfg)?;
    let fields = run.synth.evolve(&run.x, &run.times);
    let mut rows = Vec::with_capacity(fields.len() * run.x.len());
    let mut worst: f64 = 0.0;
    for f in &fields {
        worst = worst.max(f.sum_residual());
        for i in 0..f.x.len() {
            rows.push(nums(&[
                f.t,
                f.x[i],
                f.full[i].re,
                f.full[i].im,
                f.tr[i].re,
                f.tr[i].im,
                f.ref_[i].re,
                f.ref_[i].im,
            ]));
        }
    }
    write_csv(
        &out.join("evolve.csv"),
        &["t", "x", "Re_full", "Im_full", "Re_tr", "Im_tr", "Re_ref", "Im_ref"],
        &rows,
    )?;
    Ok(produced(&["evolve.csv"], json!({ "max_sum_residual": worst })))
}

fn run_diagnostics(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let run = packet_run(cfg)?;
    let diag = diagnostics(&run.synth, &run.x, &run.times, cfg.diagnostics.continuity_dt)
        .map_err(numerical("diagnostics"))?;
    let rows: Vec<Vec<String>> = diag
        .iter()
        .map(|r| {
            nums(&[
                r.t,
                r.norms.tr,
                r.norms.ref_,
                r.overlap.re,
                r.overlap.im,
                r.full.xbar,
                r.full.pbar,
                r.full.var_x,
                r.tr.xbar,
                r.ref_.map_or(f64::NAN, |m| m.xbar),
                r.continuity_residual,
            ])
        })
        .collect();
    write_csv(
        &out.join("diagnostics.csv"),
        &[
            "t", "T", "R", "Re_overlap", "Im_overlap", "xbar_full", "pbar_full", "varx_full", "xbar_tr", "xbar_ref",
            "continuity_residual",
        ],
        &rows,
    )?;
    let t0 = diag[0].norms.tr;
    let report = json!({
        "spectral_T": run.synth.spectral_transmission(),
        "max_abs_T_plus_R_minus_1": diag.iter().map(|r| (r.norms.tr + r.norms.ref_ - 1.0).abs()).fold(0.0, f64::max),
        "max_abs_T_minus_T0": diag.iter().map(|r| (r.norms.tr - t0).abs()).fold(0.0, f64::max),
        "max_abs_Re_overlap": diag.iter().map(|r| r.overlap.re.abs()).fold(0.0, f64::max),
        "final_abs_overlap": diag.last().map(|r| r.overlap.norm()),
        "max_sum_residual": diag.iter().map(|r| r.sum_residual).fold(0.0, f64::max),
    });
    Ok(produced(&["diagnostics.csv"], report))
}

fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let spec = cfg.potential_spec();
    let packet = cfg
        .packet_spec()
        .ok_or_else(|| missing("packet", "oracle-check needs a packet"))?;
    let o = cfg.resolved_oracle().expect("materialized with the packet");
    let t_max = o.times.iter().copied().fold(0.0, f64::max);
    let grid = GridSpec::with_spacing(o.x_min, o.x_max, o.h, o.dt, t_max).map_err(numerical("oracle grid"))?;
    let steps: Vec<usize> = o.times.iter().map(|t| (t / o.dt).round() as usize).collect();
    let x = grid.x();
    let run = crank_nicolson_propagate(&spec, &gaussian_initial(&packet, &x), &grid, &steps)
        .map_err(numerical("crank_nicolson_propagate"))?;
    let synth = Synthesizer::with_span(&spec, packet, cfg.spectral.n_k, cfg.spectral.span_sigmas)
        .map_err(numerical("synthesize"))?;

    let mut per_time = Vec::new();
    let (mut l2_max, mut linf_max): (f64, f64) = (0.0, 0.0);
    for (t, cn) in &run.snapshots {
        let sp = synth.synthesize(Component::Full, *t, &x);
        let (l2, linf) = compare_fields(&sp, cn).map_err(numerical("compare_fields"))?;
        l2_max = l2_max.max(l2);
        linf_max = linf_max.max(linf);
        per_time.push(nums(&[*t, l2, linf]));
    }
    let pass = l2_max < o.tolerance && run.norm_drift < CN_NORM_TOL;
    let mut row = nums(&[t_max, l2_max, linf_max]);
    row.push(if pass { "pass" } else { "fail" }.to_string());
    write_csv(&out.join("oracle_check.csv"), &["t_max", "l2", "linf", "pass"], &[row])?;
    write_csv(&out.join("oracle_check_times.csv"), &["t", "l2", "linf"], &per_time)?;
    let mut p = produced(
        &["oracle_check.csv", "oracle_check_times.csv"],
        json!({ "norm_drift": run.norm_drift, "wall_mass": run.wall_mass, "pass": pass }),
    );
    if !pass {
        p.failure = Some(RunFailure::Invariant {
            operation: "oracle-check".into(),
            message: format!(
                "l2 {l2_max:e} (tolerance {:e}), norm drift {:e}",
                o.tolerance, run.norm_drift
            ),
        });
    }
    Ok(p)
}

const CLOCK_HEADER: [&str; 8] = [
    "E",
    "L",
    "tau_dwell_tr",
    "tau_dwell_ref",
    "tau_larmor_tr",
    "tau_larmor_ref",
    "omega_min",
    "residual",
];

fn clock_row(width: f64, r: &ClockResult) -> Vec<String> {
    nums(&[
        r.energy,
        width,
        r.tau_dwell_tr,
        r.tau_dwell_ref.unwrap_or(f64::NAN),
        r.larmor_tr.extrapolated,
        r.larmor_ref.as_ref().map_or(f64::NAN, |l| l.extrapolated),
        r.larmor_tr.omega_min(),
        *r.larmor_tr.residuals.last().unwrap(),
    ])
}

fn run_clock(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let spec = cfg.potential_spec();
    let mut rows = Vec::new();
    let mut failure = None;
    for &e in energies(cfg)? {
        let mode = EnergyMode::new(e).map_err(numerical("clock"))?;
        let r = clock_times(&spec, mode, &cfg.clock).map_err(numerical("larmor_times"))?;
        if let Err(err) = r.check_invariants() {
            failure.get_or_insert(RunFailure::Numerical {
                operation: "clock".into(),
                error: err,
            });
        }
        rows.push(clock_row(spec.width(), &r));
    }
    write_csv(&out.join("clock.csv"), &CLOCK_HEADER, &rows)?;
    let mut p = produced(&["clock.csv"], json!({}));
    p.failure = failure;
    Ok(p)
}

fn run_hartman(cfg: &RunConfig, out: &Path) -> Result<Produced, RunFailure> {
    let h = &cfg.hartman;
    let sweep = hartman_sweep(h.v0, h.energy, &h.kappa_l, &cfg.clock).map_err(numerical("hartman_sweep"))?;
    let rows: Vec<Vec<String>> = sweep.iter().map(|r| clock_row(r.width, &r.clock)).collect();
    write_csv(&out.join("hartman.csv"), &CLOCK_HEADER, &rows)?;
    let dwell: Vec<f64> = sweep.iter().map(|r| r.clock.tau_dwell_tr).collect();
    let larmor: Vec<f64> = sweep.iter().map(|r| r.clock.larmor_tr.extrapolated).collect();
    Ok(produced(
        &["hartman.csv"],
        json!({
            "kappa_l": h.kappa_l,
            "dwell_tr_strictly_increasing": strictly_increasing(&dwell),
            "larmor_tr_strictly_increasing": strictly_increasing(&larmor),
        }),
    ))
}
