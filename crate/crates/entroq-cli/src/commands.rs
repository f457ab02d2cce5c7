//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use entroq_core::channel::PauliChannel;
use entroq_core::circuits::AnsatzSpec;
use entroq_core::divergence::{
    f_divergence, ft_divergence_exact, petz_renyi, quasi_entropy, relative_entropy, DivergenceValue,
};
use entroq_core::error::{Error, Result};
use entroq_core::experiments::{
    gradient_scaling, superadditivity_scan, GaConfig, GradScalingRecord, LossKind, ScanMode,
};
use entroq_core::io::{load_matrix, load_state};
use entroq_core::quad::{eval_hm, eval_rm, grj_rule, FixedEnd, QuadratureRule, WeightKind};
use entroq_core::states::{random_mixed_state, validate_state, DensityMatrix};
use entroq_core::vqa::{
    estimate_ft, estimate_petz, estimate_relative_entropy, EstimationReport, FtConfig, FtResult,
};
use entroq_net::{distributed_estimate, serve_device, DeviceRole, EstimateKind};

use crate::manifest::{effective_seed, write_json, write_manifest, write_text};

#[derive(Subcommand)]
pub enum Command {
    /// Build a Gauss-Radau-Jacobi rule and tabulate its approximation error.
    Quadrature(QuadratureArgs),
    /// Evaluate an exact divergence oracle on two state files.
    Oracle(OracleArgs),
    /// Run a variational estimation, locally or against remote devices.
    Estimate(Box<EstimateArgs>),
    /// Gradient-scaling study over qubit counts and layers.
    BpScan(BpScanArgs),
    /// Superadditivity scan over a grid of Pauli channels.
    SuperaddScan(SuperaddArgs),
    /// Host one state as a sampling device.
    Serve(ServeArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Quadrature(args) => cmd_quadrature(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Estimate(args) => cmd_estimate(*args),
        Command::BpScan(args) => cmd_bp_scan(args),
        Command::SuperaddScan(args) => cmd_superadd_scan(args),
        Command::Serve(args) => cmd_serve(args),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedEndArg {
    Zero,
    One,
}

impl From<FixedEndArg> for FixedEnd {
    fn from(v: FixedEndArg) -> Self {
        match v {
            FixedEndArg::Zero => FixedEnd::Zero,
            FixedEndArg::One => FixedEnd::One,
        }
    }
}

// ---------------------------------------------------------------------------
// quadrature

#[derive(Args, Serialize)]
pub struct QuadratureArgs {
    /// Node count.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Which endpoint carries the fixed node.
    #[arg(long, value_enum, default_value = "one")]
    pub fixed_end: FixedEndArg,
    /// Jacobi exponent parameter; omit for the uniform (logarithm) weight.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Evaluation grid for the error table: start, stop, points.
    #[arg(long, num_args = 3, default_values_t = [0.1, 10.0, 100.0])]
    pub x_grid: Vec<f64>,
    #[arg(long, default_value = "out/quadrature")]
    pub out: PathBuf,
}

fn cmd_quadrature(args: QuadratureArgs) -> Result<()> {
    let kind = match args.alpha {
        Some(alpha) => WeightKind::Jacobi { alpha },
        None => WeightKind::Uniform,
    };
    let rule = grj_rule(args.m, args.fixed_end.into(), kind)?;
    write_manifest(&args.out, "quadrature", 0, &args)?;
    write_json(&args.out, "rule.json", &rule_json(&rule))?;

    let (start, stop, points) = (args.x_grid[0], args.x_grid[1], args.x_grid[2] as usize);
    let mut csv = String::from("x,exact,approx,error\n");
    for k in 0..points {
        let x = start + (stop - start) * k as f64 / (points.max(2) - 1) as f64;
        let (exact, approx) = match kind {
            WeightKind::Uniform => (x.log2(), eval_rm(&rule, x)?),
            WeightKind::Jacobi { alpha } => (x.powf(1.0 - alpha), eval_hm(&rule, x)?),
        };
        writeln!(csv, "{x},{exact},{approx},{}", approx - exact).expect("string write");
    }
    write_text(&args.out, "error.csv", &csv)?;
    println!("wrote rule.json and error.csv to {}", args.out.display());
    Ok(())
}

/// CLI rule emission: flat fields with `alpha` null for the uniform weight.
#[derive(Serialize)]
struct RuleJson {
    m: usize,
    fixed_end: FixedEnd,
    alpha: Option<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule_json(rule: &QuadratureRule) -> RuleJson {
    RuleJson {
        m: rule.m,
        fixed_end: rule.fixed_end,
        alpha: rule.alpha(),
        nodes: rule.nodes.clone(),
        weights: rule.weights.clone(),
    }
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Relent,
    Petz,
    Quasi,
    Ft,
    F0,
}

#[derive(Args, Serialize)]
pub struct OracleArgs {
    /// First state file (matrix JSON).
    #[arg(long)]
    pub rho: PathBuf,
    /// Second state file (matrix JSON). Loaded as a PSD operator, so the
    /// relaxed-trace second arguments of the channel study work too.
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Optional output directory; the result always prints to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleOutput {
    value: f64,
    finite: bool,
    kind: OracleKind,
    params: serde_json::Value,
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let rho = load_state(&args.rho)?;
    let sigma_matrix = load_matrix(&args.sigma)?;
    let sigma = match validate_state(&sigma_matrix) {
        Ok(state) => state,
        Err(_) => DensityMatrix::psd_operator(sigma_matrix)?,
    };
    let need_alpha = || {
        args.alpha
            .ok_or_else(|| Error::Validation("this oracle needs --alpha".into()))
    };
    let value: DivergenceValue = match args.kind {
        OracleKind::Relent => relative_entropy(&rho, &sigma)?,
        OracleKind::Petz => petz_renyi(&rho, &sigma, need_alpha()?)?,
        OracleKind::Quasi => quasi_entropy(&rho, &sigma, need_alpha()?)?,
        OracleKind::Ft => {
            let t = args
                .t
                .ok_or_else(|| Error::Validation("the f_t oracle needs --t".into()))?;
            ft_divergence_exact(&rho, &sigma, t)?
        }
        OracleKind::F0 => f_divergence(&rho, &sigma, |x| x - 1.0, -1.0)?,
    };
    let output = OracleOutput {
        value: value.value,
        finite: value.finite,
        kind: args.kind,
        params: serde_json::json!({ "alpha": args.alpha, "t": args.t }),
    };
    println!("{}", serde_json::to_string(&output)?);
    if let Some(dir) = &args.out {
        write_manifest(dir, "oracle", 0, &args)?;
        write_json(dir, "oracle.json", &output)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKindArg {
    Ft,
    Relent,
    Petz,
}

/// Flags of the estimate command. Optional fields may come from a JSON
/// config file (`--config`); explicit flags win.
#[derive(Args, Serialize, Deserialize, Clone)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub kind: EstimateKindArg,
    /// JSON file with default values for the optional flags below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub rho: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Generate the pair from this seed instead of loading files
    /// (rho uses the seed itself, sigma the seed plus one).
    #[arg(long)]
    pub seed_states: Option<u64>,
    /// With --seed-states: make sigma identical to rho.
    #[arg(long, default_value_t = false)]
    pub equal_states: bool,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Rank of generated states (defaults to full rank).
    #[arg(long)]
    pub rank: Option<usize>,

    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub fixed_end: Option<FixedEndArg>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = false)]
    pub adaptive: bool,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub rank_cap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, default_value_t = false)]
    pub distributed: bool,
    #[arg(long)]
    pub rho_addr: Option<String>,
    #[arg(long)]
    pub sigma_addr: Option<String>,

    #[arg(long, default_value = "out/estimate")]
    pub out: PathBuf,
}

fn merge_config(args: &mut EstimateArgs) -> Result<()> {
    let Some(path) = &args.config else {
        return Ok(());
    };
    let text = std::fs::read_to_string(path)?;
    let defaults: EstimateArgs = serde_json::from_str(&text)?;
    macro_rules! fill {
        ($($field:ident),*) => {
            $(if args.$field.is_none() { args.$field = defaults.$field.clone(); })*
        };
    }
    fill!(
        rho,
        sigma,
        seed_states,
        qubits,
        rank,
        t,
        alpha,
        m,
        fixed_end,
        shots,
        k,
        lr,
        restarts,
        rank_cap,
        seed,
        rho_addr,
        sigma_addr
    );
    args.adaptive |= defaults.adaptive;
    args.equal_states |= defaults.equal_states;
    args.distributed |= defaults.distributed;
    Ok(())
}

fn load_pair(args: &EstimateArgs) -> Result<(DensityMatrix, DensityMatrix)> {
    match (&args.rho, &args.sigma, args.seed_states) {
        (Some(r), Some(s), _) => Ok((load_state(r)?, load_state(s)?)),
        (None, None, Some(seed)) => {
            let qubits = args
                .qubits
                .ok_or_else(|| Error::Validation("--seed-states needs --qubits".into()))?;
            let rank = args.rank.unwrap_or(1 << qubits);
            let rho = random_mixed_state(qubits, rank, seed)?;
            let sigma_seed = if args.equal_states { seed } else { seed + 1 };
            let sigma = random_mixed_state(qubits, rank, sigma_seed)?;
            Ok((rho, sigma))
        }
        _ => Err(Error::Validation(
            "provide either --rho and --sigma files or --seed-states".into(),
        )),
    }
}

fn estimate_config(args: &EstimateArgs, n_qubits: usize, seed: u64) -> FtConfig {
    let mut config = FtConfig::exact_defaults(n_qubits, seed);
    config.iterations = args.k.unwrap_or(if n_qubits >= 2 { 200 } else { 300 });
    config.learning_rate = args.lr.unwrap_or(0.1);
    config.shots = args.shots.unwrap_or(0);
    config.adaptive_lr = args.adaptive;
    config.restarts = args.restarts.unwrap_or(4);
    config.rank_cap = args.rank_cap;
    config.u_ansatz = AnsatzSpec::default_for(n_qubits);
    config.v_ansatz = AnsatzSpec::default_for(n_qubits);
    config
}

fn trace_csv(node: &FtResult) -> String {
    let mut csv = String::from("iteration,loss,lr\n");
    for (k, (loss, lr)) in node.loss_trace.iter().zip(&node.lr_trace).enumerate() {
        writeln!(csv, "{k},{loss},{lr}").expect("string write");
    }
    csv
}

fn write_report(dir: &Path, report: &EstimationReport) -> Result<()> {
    write_json(dir, "report.json", report)?;
    for (j, node) in report.per_node.iter().enumerate() {
        write_text(dir, &format!("trace_node_{j}.csv"), &trace_csv(node))?;
    }
    Ok(())
}

fn cmd_estimate(mut args: EstimateArgs) -> Result<()> {
    merge_config(&mut args)?;
    let seed = effective_seed(args.seed.unwrap_or(7));
    let fixed_end: FixedEnd = args.fixed_end.unwrap_or(FixedEndArg::One).into();
    let m = args.m.unwrap_or(6);

    if args.distributed {
        return cmd_estimate_distributed(&args, seed, fixed_end, m);
    }

    let (rho, sigma) = load_pair(&args)?;
    let config = estimate_config(&args, rho.n_qubits(), seed);
    write_manifest(&args.out, "estimate", seed, &args)?;

    let report = match args.kind {
        EstimateKindArg::Ft => {
            let t = args
                .t
                .ok_or_else(|| Error::Validation("ft estimation needs --t".into()))?;
            let node = estimate_ft(&rho, &sigma, t, &config)?;
            println!("D_ft estimate at t={t}: {}", node.value);
            write_json(&args.out, "report.json", &node)?;
            write_text(&args.out, "trace_node_0.csv", &trace_csv(&node))?;
            return Ok(());
        }
        EstimateKindArg::Relent => {
            let rule = grj_rule(m, fixed_end, WeightKind::Uniform)?;
            estimate_relative_entropy(&rho, &sigma, &config, &rule)?
        }
        EstimateKindArg::Petz => {
            let alpha = args
                .alpha
                .ok_or_else(|| Error::Validation("petz estimation needs --alpha".into()))?;
            if alpha == 2.0 {
                println!("alpha = 2: single-node path, no quadrature");
                estimate_petz(&rho, &sigma, 2.0, &config, None)?
            } else {
                let rule = grj_rule(m, fixed_end, WeightKind::Jacobi { alpha })?;
                estimate_petz(&rho, &sigma, alpha, &config, Some(&rule))?
            }
        }
    };
    // States generated or loaded locally: embed the exact oracle next to
    // the estimate.
    let oracle = match args.kind {
        EstimateKindArg::Relent => relative_entropy(&rho, &sigma)?,
        EstimateKindArg::Petz => petz_renyi(&rho, &sigma, args.alpha.expect("checked above"))?,
        EstimateKindArg::Ft => unreachable!("handled earlier"),
    };
    let summary = EstimateSummary {
        aggregate: report.aggregate,
        oracle: oracle.value,
        relative_error: (report.aggregate - oracle.value).abs() / oracle.value.abs(),
    };
    println!(
        "aggregate estimate: {} (oracle {}, relative error {:.4}%)",
        report.aggregate,
        oracle.value,
        summary.relative_error * 100.0
    );
    write_json(&args.out, "summary.json", &summary)?;
    write_report(&args.out, &report)
}

#[derive(Serialize)]
struct EstimateSummary {
    aggregate: f64,
    oracle: f64,
    relative_error: f64,
}

fn cmd_estimate_distributed(
    args: &EstimateArgs,
    seed: u64,
    fixed_end: FixedEnd,
    m: usize,
) -> Result<()> {
    let (rho_addr, sigma_addr) = match (&args.rho_addr, &args.sigma_addr) {
        (Some(r), Some(s)) => (r.clone(), s.clone()),
        _ => {
            return Err(Error::Validation(
                "--distributed needs --rho-addr and --sigma-addr".into(),
            ))
        }
    };
    let qubits = args
        .qubits
        .ok_or_else(|| Error::Validation("--distributed needs --qubits".into()))?;
    let config = estimate_config(args, qubits, seed);
    let kind = match args.kind {
        EstimateKindArg::Ft => EstimateKind::Ft {
            t: args
                .t
                .ok_or_else(|| Error::Validation("ft estimation needs --t".into()))?,
        },
        EstimateKindArg::Relent => EstimateKind::Relent { m, fixed_end },
        EstimateKindArg::Petz => EstimateKind::Petz {
            alpha: args
                .alpha
                .ok_or_else(|| Error::Validation("petz estimation needs --alpha".into()))?,
            m,
            fixed_end,
        },
    };
    write_manifest(&args.out, "estimate", seed, args)?;
    let result = distributed_estimate(&config, &rho_addr, &sigma_addr, qubits, &kind)?;
    println!(
        "aggregate estimate: {} ({} rho requests, {} sigma requests)",
        result.report.aggregate, result.rho_requests, result.sigma_requests
    );
    write_json(&args.out, "distributed.json", &result)?;
    write_report(&args.out, &result.report)
}

// ---------------------------------------------------------------------------
// bp-scan

#[derive(Args, Serialize)]
pub struct BpScanArgs {
    #[arg(long, default_value_t = 2)]
    pub qubits_min: usize,
    #[arg(long, default_value_t = 5)]
    pub qubits_max: usize,
    #[arg(long, default_value_t = 5)]
    pub layers: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "out/bp-scan")]
    pub out: PathBuf,
}

fn cmd_bp_scan(args: BpScanArgs) -> Result<()> {
    let seed = effective_seed(args.seed);
    write_manifest(&args.out, "bp-scan", seed, &args)?;

    let mut records: Vec<GradScalingRecord> = Vec::new();
    for kind in [LossKind::L1, LossKind::L2] {
        for qubits in args.qubits_min..=args.qubits_max {
            records.push(gradient_scaling(
                kind,
                qubits,
                args.layers,
                args.samples,
                seed,
            )?);
        }
    }

    // Per (loss, group), the normalization divides by the maximum over the
    // qubit sweep, mirroring the normalized plot vectors.
    let mut csv = String::from("loss,qubits,layers,samples,group,mean_abs_grad,normalized\n");
    for kind in [LossKind::L1, LossKind::L2] {
        let subset: Vec<&GradScalingRecord> =
            records.iter().filter(|r| r.loss_kind == kind).collect();
        let group_names: Vec<String> = subset[0].groups.iter().map(|g| g.name.clone()).collect();
        for name in &group_names {
            let max = subset
                .iter()
                .flat_map(|r| r.groups.iter())
                .filter(|g| &g.name == name)
                .map(|g| g.mean_abs)
                .fold(0.0f64, f64::max)
                .max(1e-300);
            for record in &subset {
                let group = record.groups.iter().find(|g| &g.name == name).unwrap();
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    match kind {
                        LossKind::L1 => "l1",
                        LossKind::L2 => "l2",
                    },
                    record.n_qubits,
                    record.layers,
                    record.samples,
                    name,
                    group.mean_abs,
                    group.mean_abs / max
                )
                .expect("string write");
            }
        }
    }
    write_text(&args.out, "gradients.csv", &csv)?;
    write_json(&args.out, "records.json", &records)?;
    println!("wrote gradients.csv to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// superadd-scan

#[derive(Args, Serialize)]
pub struct SuperaddArgs {
    /// Step of the (p1, p2, p3) grid.
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    /// Upper bound of each error probability.
    #[arg(long, default_value_t = 0.2)]
    pub p_max: f64,
    /// Estimate coherent information variationally instead of exactly.
    #[arg(long, default_value_t = false)]
    pub vqa: bool,
    #[arg(long, default_value_t = 40)]
    pub population: usize,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "out/superadd")]
    pub out: PathBuf,
}

fn cmd_superadd_scan(args: SuperaddArgs) -> Result<()> {
    let seed = effective_seed(args.seed);
    write_manifest(&args.out, "superadd-scan", seed, &args)?;

    let mut grid = Vec::new();
    let steps = (args.p_max / args.grid_step).round() as usize;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let (p1, p2, p3) = (
                    i as f64 * args.grid_step,
                    j as f64 * args.grid_step,
                    k as f64 * args.grid_step,
                );
                if p1 + p2 + p3 <= 1.0 {
                    grid.push(PauliChannel::from_error_probs(p1, p2, p3)?);
                }
            }
        }
    }

    let ga = GaConfig {
        population: args.population,
        generations: args.generations,
        seed,
        ..GaConfig::default()
    };
    let mode = if args.vqa {
        let mut config = FtConfig::exact_defaults(4, seed);
        config.iterations = 60;
        ScanMode::Vqa {
            config: Box::new(config),
            rule_m: 6,
        }
    } else {
        ScanMode::Exact
    };
    let rows = superadditivity_scan(&grid, &mode, &ga)?;

    let mut csv = String::from("p1,p2,p3,gap,confirmed\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{},{},{}",
            row.p1, row.p2, row.p3, row.gap, row.confirmed
        )
        .expect("string write");
    }
    write_text(&args.out, "scan.csv", &csv)?;
    let found = rows.iter().filter(|r| r.confirmed).count();
    println!(
        "scanned {} channels, {found} confirmed superadditive; wrote scan.csv to {}",
        rows.len(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// serve

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Rho,
    Sigma,
}

#[derive(Args)]
pub struct ServeArgs {
    /// State file to host (matrix JSON).
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub bind: String,
    /// Which divergence argument this device plays, fixing the families it
    /// serves.
    #[arg(long, value_enum)]
    pub role: RoleArg,
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let state = load_state(&args.state)?;
    let role = match args.role {
        RoleArg::Rho => DeviceRole::Rho,
        RoleArg::Sigma => DeviceRole::Sigma,
    };
    let handle = serve_device(state, role, args.bind.as_str())?;
    println!("serving {:?} device on {}", role, handle.addr);
    // Park until interrupted; the handle keeps the accept loop alive.
    loop {
        std::thread::park();
    }
}
