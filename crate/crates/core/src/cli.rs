//! Command-line front end. [`run`] never panics on bad input; failures end in a
//! nonzero exit code and a JSON error record on stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bloch::{build_liouvillian, evolve_with, steady_state, steady_state_limit, DensityMatrix, Tolerances};
use crate::config;
use crate::dressed::{bright_states, dark_states, eigensystem, interaction_hamiltonian};
use crate::error::{Result, TripodError};
use crate::gate::{
    absorption_scan, conditional_phase, conditional_phase_alt, fig2_fields, fig2_range, gate_error_mc, histogram,
    truth_table, NoiseModel,
};
use crate::params::{AtomParams, Beam, Convention, SystemParams, C64};
use crate::propagation::{
    coefficients, default_pulses, default_tau, erf_factor, nonlinear_phase, propagate, zeta, Line, PropagateOptions,
};
use crate::quantum_phase::{coherent_expectation, default_delta_omega, phases_from, CoherentInput};
use crate::susceptibility::{cubic_prefactor, linear_cores, linear_prefactor, lineshape_cores, susceptibilities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Si,
    Gaussian,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Si => Convention::Si,
            ConventionArg::Gaussian => Convention::Gaussian,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tripod", version, about = "Tripod-atom EIT cross-Kerr phase gate calculations")]
struct Cli {
    /// JSON parameter file (defaults to the built-in reference set)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, written atomically (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Eigenstates of the interaction Hamiltonian
    Dressed,
    /// Steady-state density matrix
    BlochSteady {
        /// Fail on a degenerate steady state instead of taking the γ_d → 0⁺ limit
        #[arg(long)]
        exact: bool,
    },
    /// Master-equation time evolution (times in 1/γ)
    BlochEvolve {
        #[arg(long, default_value_t = 100.0)]
        t_final: f64,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        /// `mixed` or a basis index 0..3
        #[arg(long, default_value = "mixed")]
        initial: String,
    },
    /// χ⁽¹⁾ and χ⁽³⁾ for both beams, or a scan over δ₁
    Susceptibility {
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = -20.0)]
        from: f64,
        #[arg(long, default_value_t = 20.0)]
        to: f64,
        #[arg(long, default_value_t = 201)]
        count: usize,
    },
    /// Group indices, velocities, windows, β, κ, η
    Coeffs,
    /// Split-step envelope propagation through the medium
    Propagate {
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        /// Pulse duration τ in s (default 10/min Δω_tr)
        #[arg(long)]
        tau: Option<f64>,
        /// Time window in s (default 20τ)
        #[arg(long)]
        window: Option<f64>,
        #[arg(long, default_value_t = 3)]
        snapshots: usize,
        #[arg(long)]
        no_loss: bool,
        #[arg(long)]
        no_dispersion: bool,
    },
    /// Quantum phases Φ and coherent-state expectation values
    QuantumPhase {
        /// `re` or `re,im`
        #[arg(long, default_value = "1")]
        alpha_p: String,
        #[arg(long, default_value = "1")]
        alpha_t: String,
        /// rad/s (default min Δω_tr)
        #[arg(long)]
        delta_omega: Option<f64>,
    },
    /// Truth table and conditional phase
    Gate {
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Monte Carlo gate error under intensity noise
    GateMc {
        #[arg(long, default_value_t = 0.01)]
        level: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Scaled probe absorption against γ_d on [0, 0.1γ]
    Fig2 {
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Use the loaded detunings and Rabi frequencies instead of δ = 0, Ω_P = Ω_T = 1, Ω = 4.5
        #[arg(long)]
        use_config: bool,
    },
    /// One row of headline quantities per value of a parameter
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        count: usize,
    },
}

enum Cell {
    Num(f64),
    Text(String),
}

struct Table {
    columns: Vec<(String, String)>,
    rows: Vec<Vec<Cell>>,
    notes: Vec<String>,
}

impl Table {
    fn new(columns: &[(&str, &str)]) -> Self {
        Table {
            columns: columns.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(Cell::Num).collect());
    }
}

enum Output {
    Json(Value),
    Table(Table),
}

fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn render(out: Output, format: Format) -> String {
    match (out, format) {
        (Output::Json(v), Format::Json) => serde_json::to_string_pretty(&v).expect("json") + "\n",
        (Output::Table(t), Format::Csv) => {
            let mut s = String::new();
            let units: Vec<String> = t.columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect();
            s += &format!("# units: {}\n", units.join(", "));
            for n in &t.notes {
                s += &format!("# {n}\n");
            }
            s += &t.columns.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(",");
            s.push('\n');
            for r in &t.rows {
                let cells: Vec<String> = r
                    .iter()
                    .map(|c| match c {
                        Cell::Num(x) => num(*x),
                        Cell::Text(x) => x.clone(),
                    })
                    .collect();
                s += &cells.join(",");
                s.push('\n');
            }
            s
        }
        (Output::Table(t), Format::Json) => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    Value::Array(
                        r.iter()
                            .map(|c| match c {
                                Cell::Num(x) => json!(x),
                                Cell::Text(x) => json!(x),
                            })
                            .collect(),
                    )
                })
                .collect();
            let v = json!({
                "columns": t.columns.iter().map(|c| &c.0).collect::<Vec<_>>(),
                "units": t.columns.iter().map(|c| &c.1).collect::<Vec<_>>(),
                "notes": t.notes,
                "rows": rows,
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        (Output::Json(v), Format::Csv) => {
            let mut t = Table::new(&[("key", "-"), ("value", "see key")]);
            let mut flat = Vec::new();
            flatten(&v, "", &mut flat);
            for (k, x) in flat {
                t.rows.push(vec![Cell::Text(k), Cell::Text(x)]);
            }
            render(Output::Table(t), Format::Csv)
        }
    }
}

fn flatten(v: &Value, prefix: &str, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(x, &key(k), out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(x, &key(&i.to_string()), out)),
        Value::String(s) => out.push((prefix.to_string(), s.replace(',', ";"))),
        Value::Null => out.push((prefix.to_string(), "nan".into())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| TripodError::Config(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(data).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn c64(v: C64) -> Value {
    json!([v.re, v.im])
}

fn parse_complex(s: &str) -> Result<C64> {
    let bad = || TripodError::Config(format!("cannot parse complex amplitude '{s}' (use re or re,im)"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let f = |x: &str| x.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => Ok(C64::new(f(re)?, 0.0)),
        [re, im] => Ok(C64::new(f(re)?, f(im)?)),
        _ => Err(bad()),
    }
}

fn rho_json(rho: &DensityMatrix) -> Value {
    let rows: Vec<Value> = (0..4).map(|i| Value::Array((0..4).map(|j| c64(rho.get(i, j))).collect())).collect();
    json!({
        "rho": rows,
        "populations": (0..4).map(|j| rho.population(j)).collect::<Vec<_>>(),
        "trace": rho.trace().re,
    })
}

fn field_unit(c: Convention) -> &'static str {
    match c {
        Convention::Si => "V/m",
        Convention::Gaussian => "statV/cm",
    }
}

fn resolve_tau(p: &SystemParams, tau: Option<f64>) -> Result<f64> {
    match tau {
        Some(t) => Ok(t),
        None => Ok(default_tau(&coefficients(p)?)),
    }
}

fn linspace(from: f64, to: f64, count: usize) -> Vec<f64> {
    match count {
        1 => vec![from],
        n => (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn dressed(p: &SystemParams) -> Result<Output> {
    let h = interaction_hamiltonian(&p.fields, &p.atom);
    let states = eigensystem(&h)?;
    let a = &p.atom;
    let mut v = json!({
        "hamiltonian_norm": h.norm(),
        "states": states,
        "dark_count": states.iter().filter(|s| s.is_dark).count(),
    });
    if a.delta1 == 0.0 && a.delta2 == 0.0 && a.delta3 == 0.0 {
        v["closed_form"] = json!({ "dark": dark_states(&p.fields)?, "bright": bright_states(&p.fields)? });
    }
    Ok(Output::Json(v))
}

fn bloch_evolve(p: &SystemParams, t_final: f64, dt: f64, initial: &str) -> Result<Output> {
    let rho0 = match initial {
        "mixed" => DensityMatrix::maximally_mixed(),
        s => match s.parse::<usize>() {
            Ok(j) if j < 4 => DensityMatrix::basis(j),
            _ => return Err(TripodError::Config(format!("--initial must be 'mixed' or 0..3, got '{s}'"))),
        },
    };
    let traj = evolve_with(&build_liouvillian(&p.atom, &p.fields)?, &rho0, t_final, dt, Tolerances::default())?;
    let mut t = Table::new(&[
        ("t", "1/gamma"),
        ("rho00", "-"),
        ("rho11", "-"),
        ("rho22", "-"),
        ("rho33", "-"),
        ("re_rho10", "-"),
        ("im_rho10", "-"),
        ("re_rho30", "-"),
        ("im_rho30", "-"),
    ]);
    for (time, r) in traj {
        let (a, b) = (r.get(1, 0), r.get(3, 0));
        t.push(vec![time, r.population(0), r.population(1), r.population(2), r.population(3), a.re, a.im, b.re, b.im]);
    }
    Ok(Output::Table(t))
}

fn susceptibility_scan(p: &SystemParams, from: f64, to: f64, count: usize) -> Result<Output> {
    if count == 0 {
        return Err(TripodError::Config("--count must be >= 1".into()));
    }
    let g = p.gamma_si()?;
    let conv = p.convention;
    let k1 = [Beam::Probe, Beam::Trigger].map(|b| linear_prefactor(&p.medium, b, conv, g));
    let k3 = cubic_prefactor(&p.medium, conv, g);
    let mut t = Table::new(&[
        ("delta1", "gamma"),
        ("re_chi1_p", conv.label()),
        ("im_chi1_p", conv.label()),
        ("re_chi1_t", conv.label()),
        ("im_chi1_t", conv.label()),
        ("re_chi3_p", conv.label()),
        ("im_chi3_p", conv.label()),
        ("re_chi3_t", conv.label()),
        ("im_chi3_t", conv.label()),
    ]);
    t.notes.push(format!(
        "delta2 = {}, delta3 = {}, gamma_d = {}; nan marks a pole or the delta1 = delta3 degeneracy",
        p.atom.delta2, p.atom.delta3, p.atom.gamma_d
    ));
    for d1 in linspace(from, to, count) {
        let atom = AtomParams { delta1: d1, ..p.atom };
        let (lp, lt) = linear_cores(&crate::params::complex_detunings(&atom), p.fields.omega_pump, p.transcription)
            .map(|(a, b)| (a * k1[0], b * k1[1]))
            .unwrap_or((C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN)));
        let (cp, ct) = lineshape_cores(&atom, p.fields.omega_pump, p.transcription)
            .map(|c| (c.cub_p * k3, c.cub_t * k3))
            .unwrap_or((C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN)));
        t.push(vec![d1, lp.re, lp.im, lt.re, lt.im, cp.re, cp.im, ct.re, ct.im]);
    }
    Ok(Output::Table(t))
}

fn coeffs(p: &SystemParams) -> Result<Output> {
    let c = coefficients(p)?;
    let tau = default_tau(&c);
    let l = p.medium.length;
    let (zp, zt) = (zeta(l, c.vg_p, c.vg_t, tau), zeta(l, c.vg_t, c.vg_p, tau));
    Ok(Output::Json(json!({
        "coefficients": c,
        "units": {
            "vg": "m/s", "dwtr": "rad/s", "beta": "s^2/m", "kappa": "1/m", "eta": "literal l*g_P^2*g_T^2*N/(2*pi*c^2) times core/gamma^3",
        },
        "default_tau_s": tau,
        "zeta_p": zp,
        "zeta_t": zt,
        "erf_factor_p": erf_factor(zp),
        "erf_factor_t": erf_factor(zt),
        "vg_mismatch": (c.vg_p - c.vg_t).abs() / c.vg_p,
    })))
}

#[allow(clippy::too_many_arguments)]
fn propagate_cmd(
    p: &SystemParams,
    steps: usize,
    points: usize,
    tau: Option<f64>,
    window: Option<f64>,
    snapshots: usize,
    no_loss: bool,
    no_dispersion: bool,
) -> Result<Output> {
    let conv = p.convention;
    let c = coefficients(p)?;
    let tau = tau.unwrap_or_else(|| default_tau(&c));
    let pulses = default_pulses(p, tau);
    let line = Line::from_system(p, &c, conv)?;
    let amps = [pulses[0].peak_field(p, conv)?, pulses[1].peak_field(p, conv)?];
    let mut o = PropagateOptions::new(steps, points, window.unwrap_or(20.0 * tau));
    o.snapshots = snapshots;
    o.include_loss = !no_loss;
    o.include_dispersion = !no_dispersion;
    let g = propagate(&line, &pulses, amps, &o)?;
    let fu = field_unit(conv);
    let mut t = Table::new(&[
        ("z", "m"),
        ("t", "s"),
        ("re_ep", fu),
        ("im_ep", fu),
        ("re_et", fu),
        ("im_et", fu),
        ("phase_p", "rad"),
        ("phase_t", "rad"),
    ]);
    t.notes.push(format!(
        "retarded time t' = t - z/vg_p; tau = {tau}; dz = {}; dt = {}; phase per step = {}",
        g.dz, g.dt, g.phase_per_step
    ));
    for (s, &z) in g.z.iter().enumerate() {
        for (k, &time) in g.t.iter().enumerate() {
            let (a, b) = (g.e_p[s][k], g.e_t[s][k]);
            t.push(vec![z, time, a.re, a.im, b.re, b.im, a.arg(), b.arg()]);
        }
    }
    Ok(Output::Table(t))
}

fn quantum_phase_cmd(p: &SystemParams, ap: &str, at: &str, dw: Option<f64>) -> Result<Output> {
    let c = coefficients(p)?;
    let dw = match dw {
        Some(v) => v,
        None => default_delta_omega(&c)?,
    };
    let q = phases_from(&c, dw)?;
    let input = CoherentInput { alpha_p: parse_complex(ap)?, alpha_t: parse_complex(at)?, delta_omega: dw };
    let r = coherent_expectation(&input, q.phi_p, q.phi_t)?;
    Ok(Output::Json(json!({
        "delta_omega_rad_per_s": dw,
        "phi_p": q.phi_p,
        "phi_t": q.phi_t,
        "nonlinear_absorption_p": q.nonlinear_absorption_p,
        "nonlinear_absorption_t": q.nonlinear_absorption_t,
        "alpha_p": c64(input.alpha_p),
        "alpha_t": c64(input.alpha_t),
        "mean_e_p": c64(r.mean_e_p),
        "mean_e_t": c64(r.mean_e_t),
        "damping_p": r.damping_p,
        "damping_t": r.damping_t,
    })))
}

fn gate_cmd(p: &SystemParams, tau: Option<f64>) -> Result<Output> {
    let tau = resolve_tau(p, tau)?;
    let t = truth_table(p, &default_pulses(p, tau), p.convention)?;
    let (alt, ratio) = conditional_phase_alt(&t);
    let entries: Vec<Value> = t
        .entries
        .iter()
        .map(|e| {
            json!({
                "pol_p": e.pol_p.label(), "pol_t": e.pol_t.label(),
                "phase": e.total, "vacuum": e.vacuum, "linear": e.linear, "nonlinear": e.nonlinear,
            })
        })
        .collect();
    Ok(Output::Json(json!({
        "convention": p.convention.label(),
        "tau_s": tau,
        "sign": "basis states acquire exp(-i*phase)",
        "truth_table": entries,
        "phases": t.phases,
        "conditional_phase": conditional_phase(&t),
        "conditional_phase_other_convention": alt,
        "convention_ratio": ratio,
    })))
}

fn gate_mc_cmd(
    p: &SystemParams,
    level: f64,
    samples: usize,
    bins: usize,
    tau: Option<f64>,
    format: Format,
) -> Result<Output> {
    let tau = resolve_tau(p, tau)?;
    let noise = NoiseModel::new(level, samples, p.seed);
    let r = gate_error_mc(&noise, p, &default_pulses(p, tau), p.convention)?;
    let hist = histogram(&r.dphi, bins);
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(&r).expect("json");
            v["convention"] = json!(p.convention.label());
            v["tau_s"] = json!(tau);
            v["histogram"] = json!(hist);
            Ok(Output::Json(v))
        }
        Format::Csv => {
            let mut t = Table::new(&[("dphi", "rad"), ("count", "-")]);
            t.notes.push(format!(
                "level = {}, samples = {}, seed = {}, convention = {}, nominal_phase = {}",
                r.level,
                r.samples,
                r.seed,
                p.convention.label(),
                r.nominal_phase
            ));
            t.notes.push(format!(
                "error = {}, std_error = {}, ci95 = [{}; {}], error_uncorrected = {}, failed = {}",
                r.error, r.std_error, r.ci95[0], r.ci95[1], r.error_uncorrected, r.failed
            ));
            for (c, n) in hist {
                t.push(vec![c, n as f64]);
            }
            Ok(Output::Table(t))
        }
    }
}

fn fig2(p: &SystemParams, points: usize, use_config: bool) -> Result<Output> {
    let (atom, fields) = if use_config { (p.atom, p.fields) } else { (AtomParams::resonant(0.0), fig2_fields()) };
    let scan = absorption_scan(&fig2_range(points), &atom, &fields)?;
    let mut t = Table::new(&[("gamma_d", "gamma"), ("absorption", "scaled to range maximum")]);
    t.notes.push(format!(
        "probe Im chi1 at delta = ({}, {}, {}), omega_p = {}, omega_t = {}, omega = {}",
        atom.delta1, atom.delta2, atom.delta3, fields.omega_p, fields.omega_t, fields.omega_pump
    ));
    for (g, a) in scan {
        t.push(vec![g, a]);
    }
    Ok(Output::Table(t))
}

fn sweep_row(q: &SystemParams) -> Result<Vec<f64>> {
    let s = susceptibilities(q)?;
    let c = coefficients(q)?;
    let pulses = default_pulses(q, default_tau(&c));
    let np = nonlinear_phase(Beam::Probe, q, &c, &pulses, q.convention)?.phi;
    let nt = nonlinear_phase(Beam::Trigger, q, &c, &pulses, q.convention)?.phi;
    Ok(vec![
        s.chi1_p.re,
        s.chi1_p.im,
        s.chi3_p.re,
        s.chi3_p.im,
        s.chi3_t.re,
        s.chi3_t.im,
        c.vg_p,
        c.vg_t,
        np,
        nt,
        np + nt,
    ])
}

fn sweep(p: &SystemParams, param: &str, from: f64, to: f64, count: usize) -> Result<Output> {
    config::check_path(param)?;
    if count == 0 {
        return Err(TripodError::Config("--count must be >= 1".into()));
    }
    let values = linspace(from, to, count);
    // every value is checked before any computation starts
    let params: Vec<SystemParams> =
        values.iter().map(|v| config::set_value(p, param, json!(v))).collect::<Result<_>>()?;
    let conv = p.convention.label();
    let mut t = Table::new(&[
        (param, "as configured"),
        ("re_chi1_p", conv),
        ("im_chi1_p", conv),
        ("re_chi3_p", conv),
        ("im_chi3_p", conv),
        ("re_chi3_t", conv),
        ("im_chi3_t", conv),
        ("vg_p", "m/s"),
        ("vg_t", "m/s"),
        ("phi_nlin_p", "rad"),
        ("phi_nlin_t", "rad"),
        ("conditional_phase", "rad"),
        ("error", "-"),
    ]);
    let rows: Vec<Result<Vec<f64>>> = params.par_iter().map(sweep_row).collect();
    for (v, r) in values.iter().zip(rows) {
        let (nums, err) = match r {
            Ok(x) => (x, String::new()),
            Err(e) => (vec![f64::NAN; 11], e.kind().to_string()),
        };
        let mut row = vec![Cell::Num(*v)];
        row.extend(nums.into_iter().map(Cell::Num));
        row.push(Cell::Text(err));
        t.rows.push(row);
    }
    Ok(Output::Table(t))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut p = config::load(cli.config.as_deref())?;
    if let Some(c) = cli.convention {
        p.convention = c.into();
    }
    if let Some(s) = cli.seed {
        p.seed = s;
    }
    let (out, default_format) = match cli.cmd {
        Cmd::Dressed => (dressed(&p)?, Format::Json),
        Cmd::BlochSteady { exact } => {
            let rho = if exact { steady_state(&p.atom, &p.fields)? } else { steady_state_limit(&p.atom, &p.fields)? };
            (Output::Json(rho_json(&rho)), Format::Json)
        }
        Cmd::BlochEvolve { t_final, dt, initial } => (bloch_evolve(&p, t_final, dt, &initial)?, Format::Csv),
        Cmd::Susceptibility { scan: true, from, to, count } => (susceptibility_scan(&p, from, to, count)?, Format::Csv),
        Cmd::Susceptibility { .. } => {
            (Output::Json(serde_json::to_value(susceptibilities(&p)?).expect("json")), Format::Json)
        }
        Cmd::Coeffs => (coeffs(&p)?, Format::Json),
        Cmd::Propagate { steps, points, tau, window, snapshots, no_loss, no_dispersion } => {
            (propagate_cmd(&p, steps, points, tau, window, snapshots, no_loss, no_dispersion)?, Format::Csv)
        }
        Cmd::QuantumPhase { alpha_p, alpha_t, delta_omega } => {
            (quantum_phase_cmd(&p, &alpha_p, &alpha_t, delta_omega)?, Format::Json)
        }
        Cmd::Gate { tau } => (gate_cmd(&p, tau)?, Format::Json),
        Cmd::GateMc { level, samples, bins, tau } => {
            let f = cli.format.unwrap_or(Format::Json);
            (gate_mc_cmd(&p, level, samples, bins, tau, f)?, f)
        }
        Cmd::Fig2 { points, use_config } => (fig2(&p, points, use_config)?, Format::Csv),
        Cmd::Sweep { param, from, to, count } => (sweep(&p, &param, from, to, count)?, Format::Csv),
    };
    let text = render(out, cli.format.unwrap_or(default_format));
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()).map_err(|e| TripodError::Numerical(format!("stdout: {e}"))),
    }
}

fn error_record(kind: &str, message: &str, code: i32) -> String {
    json!({ "error": { "kind": kind, "message": message, "exit_code": code } }).to_string()
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = writeln!(stderr, "{}", error_record("usage", e.to_string().trim(), 2));
            return 2;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "{}", error_record(e.kind(), &e.to_string(), code));
            code
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
