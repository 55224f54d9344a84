use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cellident_core::harness::{
    self, build_pulse_set, load_trace, pre_pulse_rest_voltage, run_stage, save_trace, to_json, twin_for_stage,
    write_config, write_file, write_stage, DegradationStage, RunConfig, StageInput, StageReport,
};
use cellident_core::identify::{
    build_sso_schedule, derive_macro, fit_aging, identify_quasi_static, solve_stoich_limits, sso_identify,
    AgingObservation, StaticIdentified,
};
use cellident_core::model::init_state;
use cellident_core::profiles::{find_stoich_for_ocv, CurrentProfile};
use cellident_core::sensitivity::{assign, build_sensitivity_matrix};

#[derive(Parser)]
#[command(name = "cellident", version, about = "Electrochemical parameter identification for lithium-ion cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed (and CELLIDENT_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct StageArg {
    /// Degradation stage of the synthetic cell, in cycles.
    #[arg(long, default_value_t = 0)]
    stage: u32,
    /// Measurement noise, V.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the quasi-static test on a reference stage.
    GenStatic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: StageArg,
    },
    /// Simulate the pulse test on a reference stage.
    GenDynamic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: StageArg,
    },
    /// Fit initial stoichiometries and active-material fractions to a
    /// quasi-static trace.
    IdentifyStatic {
        #[command(flatten)]
        common: Common,
        /// Trace file (time_s,current_A,voltage_V).
        #[arg(long)]
        trace: PathBuf,
    },
    /// Sensitivity matrix of the transport parameters on a reference stage.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: StageArg,
        /// Base sample count.
        #[arg(long = "M", alias = "m")]
        m: Option<usize>,
    },
    /// Stepwise transport identification from pulse traces, with the
    /// composition of the cell taken as known.
    IdentifyDynamic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: StageArg,
        /// Pulse traces; a reference stage is simulated when omitted.
        #[arg(long = "pulse")]
        pulses: Vec<PathBuf>,
        #[arg(long = "M", alias = "m")]
        m: Option<usize>,
    },
    /// Stoichiometry window, capacity and SOC-OCV curve from a static fit.
    DeriveMacro {
        #[command(flatten)]
        common: Common,
        /// `static.json` written by identify-static.
        #[arg(long)]
        static_result: PathBuf,
    },
    /// Fit the aging correlations to a history of aged states.
    FitAging {
        #[command(flatten)]
        common: Common,
        /// JSON array of observations; the reference stage table when omitted.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Full pipeline on synthetic data for the listed stages.
    Twin {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cycle counts.
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<u32>>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long = "M", alias = "m")]
        m: Option<usize>,
        /// Also run the single joint search for comparison.
        #[arg(long)]
        baseline: bool,
    },
    /// Full pipeline on measured traces named in the config.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Summarize the results of a previous run.
    Report {
        /// Directory written by `twin` or `run`.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let mut c = RunConfig::default();
            c.apply_env()?;
            c
        }
    };
    if let Some(s) = common.seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn apply_stage(cfg: &mut RunConfig, s: &StageArg) -> Result<()> {
    if let Some(sigma) = s.sigma {
        if !(sigma >= 0.0) {
            bail!("noise sigma must be non-negative");
        }
        cfg.harness.noise_sigma = sigma;
    }
    DegradationStage::at(s.stage)?;
    Ok(())
}

fn gen_static(common: &Common, s: &StageArg) -> Result<()> {
    let mut cfg = load_config(common)?;
    apply_stage(&mut cfg, s)?;
    let twin = twin_for_stage(&cfg, s.stage)?;
    write_config(&common.out, &cfg)?;
    save_trace(&twin.quasi_static, &common.out.join("quasi_static.csv"))?;
    write_file(&common.out.join("truth.json"), &to_json(&twin.truth))?;
    println!("wrote {} samples to {}", twin.quasi_static.len(), common.out.join("quasi_static.csv").display());
    Ok(())
}

fn gen_dynamic(common: &Common, s: &StageArg) -> Result<()> {
    let mut cfg = load_config(common)?;
    apply_stage(&mut cfg, s)?;
    let twin = twin_for_stage(&cfg, s.stage)?;
    write_config(&common.out, &cfg)?;
    for (k, t) in twin.pulses.iter().enumerate() {
        save_trace(t, &common.out.join(format!("pulse_{}.csv", k + 1)))?;
    }
    write_file(&common.out.join("truth.json"), &to_json(&twin.truth))?;
    println!("wrote {} pulse traces to {}", twin.pulses.len(), common.out.display());
    Ok(())
}

fn identify_static(common: &Common, trace: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    let measured = load_trace(trace)?;
    let profile = CurrentProfile::from_trace(&measured, "quasi-static")?;
    let start = find_stoich_for_ocv(&cfg.cell, cfg.profiles.quasi_static.start_ocv)?;
    let nominal = cellident_core::identify::StaticTargets {
        stoich_neg_t0: start.neg,
        stoich_pos_t0: start.pos,
        eps_s_neg: cfg.cell.composition.eps_s_neg,
        eps_s_pos: cfg.cell.composition.eps_s_pos,
    };
    let id = identify_quasi_static(&measured, &profile, &cfg.cell, &nominal, &cfg.solvers.quasi_static)?;
    write_config(&common.out, &cfg)?;
    write_file(&common.out.join("static.json"), &to_json(&id))?;
    if id.poor_fit {
        eprintln!("warning: poor fit, RMSE {:.3e} V", id.rmse);
    }
    println!(
        "stoich_neg_t0 {:.5}  stoich_pos_t0 {:.5}  eps_s_neg {:.5}  eps_s_pos {:.5}  rmse {:.3e} V",
        id.stoich_neg_t0, id.stoich_pos_t0, id.eps_s_neg, id.eps_s_pos, id.rmse
    );
    Ok(())
}

fn sensitivity(common: &Common, s: &StageArg, m: Option<usize>) -> Result<()> {
    let mut cfg = load_config(common)?;
    apply_stage(&mut cfg, s)?;
    if let Some(m) = m {
        cfg.sensitivity.m = m;
    }
    let twin = twin_for_stage(&cfg, s.stage)?;
    let input = StageInput::from_twin(&twin);
    let set = build_pulse_set(&cfg, &input)?;
    let start = twin.truth.pulse_start;
    let init = init_state(&twin.truth.params, start.neg, start.pos)?;
    let sens = build_sensitivity_matrix(&set, &cfg.sensitivity.space, &twin.truth.params, &init, cfg.sensitivity.m)?;
    let a = assign(&sens, cfg.sensitivity.drop_threshold);
    write_config(&common.out, &cfg)?;
    write_file(&common.out.join("sensitivity.csv"), &sens.to_csv())?;
    write_file(&common.out.join("assignment.json"), &to_json(&a))?;
    let rows: Vec<&str> = sens.params.iter().map(|p| p.name()).collect();
    let cols: Vec<String> = (1..=3 * sens.pulses).map(|j| format!("z{j}")).collect();
    write_file(
        &common.out.join("sensitivity.svg"),
        &harness::heatmap_svg("Total-effect indices", &rows, &cols, &sens.s),
    )?;
    print!("{}", sens.to_csv());
    println!("instantaneous: {:?}\ntransport: {:?}\ndropped: {:?}", a.instantaneous, a.transport, a.dropped);
    Ok(())
}

fn identify_dynamic(common: &Common, s: &StageArg, pulses: &[PathBuf], m: Option<usize>) -> Result<()> {
    let mut cfg = load_config(common)?;
    apply_stage(&mut cfg, s)?;
    if let Some(m) = m {
        cfg.sensitivity.m = m;
    }
    let (input, params) = if pulses.is_empty() {
        let twin = twin_for_stage(&cfg, s.stage)?;
        (StageInput::from_twin(&twin), twin.truth.params)
    } else {
        let mut profiles = Vec::new();
        let mut traces = Vec::new();
        for p in pulses {
            let t = load_trace(p)?;
            profiles.push(CurrentProfile::from_trace(&t, &p.display().to_string())?);
            traces.push(t);
        }
        let input = StageInput {
            label: "measured".into(),
            quasi_static_profile: profiles[0].clone(),
            quasi_static: traces[0].clone(),
            pulse_profiles: profiles,
            pulses: traces,
            truth: None,
        };
        (input, cfg.cell.clone())
    };
    let rest = pre_pulse_rest_voltage(&input.pulse_profiles, &input.pulses)?;
    let start = find_stoich_for_ocv(&params, rest)?;
    let init = init_state(&params, start.neg, start.pos)?;
    let set = build_pulse_set(&cfg, &input)?;
    let sens = build_sensitivity_matrix(&set, &cfg.sensitivity.space, &params, &init, cfg.sensitivity.m)?;
    let a = assign(&sens, cfg.sensitivity.drop_threshold);
    let schedule = build_sso_schedule(&sens, &a)?;
    let result = sso_identify(&set, &init, &schedule, &cfg.sensitivity.space, &params, &cfg.sso)
        .map_err(|f| anyhow::anyhow!("{f}"))?;
    write_config(&common.out, &cfg)?;
    write_file(&common.out.join("sensitivity.csv"), &sens.to_csv())?;
    write_file(&common.out.join("identification.json"), &to_json(&result))?;
    write_file(&common.out.join("timing.json"), &to_json(&result.step_seconds))?;
    for e in &result.estimates {
        let truth = input.truth.as_ref().map(|t| e.param.get(&t.params.transport));
        match truth {
            Some(t) if e.identified => println!(
                "{:24} {:.6e}  truth {:.6e}  error {:.2}%",
                e.param.name(),
                e.value,
                t,
                100.0 * harness::relative_error(e.value, t)
            ),
            _ => println!("{:24} {:.6e}{}", e.param.name(), e.value, if e.identified { "" } else { "  (fixed)" }),
        }
    }
    Ok(())
}

fn derive_macro_cmd(common: &Common, path: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let id: StaticIdentified = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let t = id.targets();
    let p = &cfg.profiles;
    let lim = solve_stoich_limits(&t, &cfg.cell, p.v_min, p.v_max)?;
    let mac = derive_macro(&lim, &t, &cfg.cell, p.v_min, p.v_max);
    write_config(&common.out, &cfg)?;
    write_file(&common.out.join("limits.json"), &to_json(&lim))?;
    write_file(&common.out.join("ocv.csv"), &mac.to_csv())?;
    let series = harness::Series { label: "OCV", x: &mac.soc, y: &mac.ocv };
    write_file(&common.out.join("ocv.svg"), &harness::line_plot_svg("SOC-OCV", "SOC", "OCV (V)", &[series]))?;
    println!("capacity {:.1} mAh", mac.capacity_mah);
    println!(
        "negative window [{:.5}, {:.5}]  positive window [{:.5}, {:.5}]",
        lim.stoich_neg_min, lim.stoich_neg_max, lim.stoich_pos_min, lim.stoich_pos_max
    );
    Ok(())
}

fn fit_aging_cmd(common: &Common, history: Option<&Path>) -> Result<()> {
    let cfg = load_config(common)?;
    let (sp, sn) = (cfg.solvers.aging.sigma_f0_pos, cfg.solvers.aging.sigma_f0_neg);
    let hist: Vec<AgingObservation> = match history {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => DegradationStage::aging_history(sp, sn),
    };
    let fit = fit_aging(&hist, sp, sn)?;
    write_config(&common.out, &cfg)?;
    write_file(&common.out.join("aging.json"), &to_json(&fit))?;
    let c = &fit.coefficients;
    println!(
        "k_f_pos {:.4e} nm  k_f_neg {:.4e} nm  k_e_neg {:.4}  b_e_neg {:.4}",
        c.k_f_pos, c.k_f_neg, c.k_e_neg, c.b_e_neg
    );
    Ok(())
}

fn print_summary(r: &StageReport) {
    let c = &r.composition;
    println!(
        "[{}] capacity {:.1} mAh, overall RMSE {:.3e} V, evaluations {}",
        r.label, c.macro_chars.capacity_mah, r.overall_rmse, r.identification.evaluations
    );
    for e in r.static_errors.iter().chain(&r.transport_errors) {
        println!("    {:24} {:.6e}  truth {:.6e}  error {:.3}%", e.name, e.estimate, e.truth, 100.0 * e.relative_error);
    }
    for p in &r.profile_rmse {
        println!("    rmse {:16} {:.3e} V", p.label, p.rmse);
    }
    for f in &r.flags {
        println!("    note: {f}");
    }
    if let Some(b) = &r.baseline {
        match b.evaluation_ratio() {
            Some(x) => println!("    joint search matched after {} evaluations (ratio {:.2})", b.evaluations_to_match.unwrap(), x),
            None => println!("    joint search did not match within {} evaluations", b.budget),
        }
    }
}

fn twin(common: &Common, stages: Option<&[u32]>, sigma: Option<f64>, m: Option<usize>, baseline: bool) -> Result<()> {
    let mut cfg = load_config(common)?;
    if let Some(s) = stages {
        cfg.harness.stages = s.to_vec();
    }
    if let Some(s) = sigma {
        if !(s >= 0.0) {
            bail!("noise sigma must be non-negative");
        }
        cfg.harness.noise_sigma = s;
    }
    if let Some(m) = m {
        cfg.sensitivity.m = m;
    }
    cfg.harness.baseline |= baseline;
    for &c in &cfg.harness.stages {
        DegradationStage::at(c)?;
    }
    write_config(&common.out, &cfg)?;
    for &c in &cfg.harness.stages {
        let data = twin_for_stage(&cfg, c)?;
        let input = StageInput::from_twin(&data);
        let (report, timing) = run_stage(&cfg, &input).with_context(|| format!("stage {c}"))?;
        let dir = common.out.join(&input.label);
        write_stage(&dir, &input, &report, &timing)?;
        print_summary(&report);
        println!("    {:.1} s, written to {}", timing.total_s, dir.display());
    }
    Ok(())
}

fn run_measured(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let Some(paths) = &cfg.harness.measured else {
        bail!("the config names no measured traces (harness.measured)");
    };
    let input = StageInput::from_files(paths)?;
    let (report, timing) = run_stage(&cfg, &input)?;
    write_config(&common.out, &cfg)?;
    let dir = common.out.join(&input.label);
    write_stage(&dir, &input, &report, &timing)?;
    print_summary(&report);
    Ok(())
}

fn report(dir: &Path) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("results.json").is_file())
        .collect();
    entries.sort();
    if entries.is_empty() {
        bail!("no results.json under {}", dir.display());
    }
    let mut csv = String::from("stage,capacity_mah,overall_rmse_v,max_static_error,max_transport_error,evaluations\n");
    for e in &entries {
        let path = e.join("results.json");
        let text = std::fs::read_to_string(&path)?;
        let r: StageReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        print_summary(&r);
        let max = |v: &[harness::ParamError]| v.iter().map(|e| e.relative_error).fold(f64::NAN, f64::max);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label,
            r.composition.macro_chars.capacity_mah,
            r.overall_rmse,
            max(&r.static_errors),
            max(&r.transport_errors),
            r.identification.evaluations
        ));
    }
    write_file(&dir.join("summary.csv"), &csv)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenStatic { common, stage } => gen_static(&common, &stage),
        Command::GenDynamic { common, stage } => gen_dynamic(&common, &stage),
        Command::IdentifyStatic { common, trace } => identify_static(&common, &trace),
        Command::Sensitivity { common, stage, m } => sensitivity(&common, &stage, m),
        Command::IdentifyDynamic { common, stage, pulses, m } => identify_dynamic(&common, &stage, &pulses, m),
        Command::DeriveMacro { common, static_result } => derive_macro_cmd(&common, &static_result),
        Command::FitAging { common, history } => fit_aging_cmd(&common, history.as_deref()),
        Command::Twin { common, stages, sigma, m, baseline } => twin(&common, stages.as_deref(), sigma, m, baseline),
        Command::Run { common } => run_measured(&common),
        Command::Report { dir } => report(&dir),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
