//! Command-line surface of the magnonics toolkit: synthetic sweep
//! generation, the individual analysis stages, and the full pipeline.
//!
//! Exit codes: 0 success, 2 parse/config errors, 3 fit failures, 4 partial
//! completion, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use magnonics::constants::hz_to_angular;
use magnonics::error::Error as MagError;
use magnonics::fit::{
    fit_dispersion, fit_polariton_cut, fit_resonator, fit_tls_surface, FitOptions,
    PolaritonFixed, PolaritonOptions, ResonatorOptions, TlsSample,
};
use magnonics::io::{
    emit_plot_data, load_config, load_report, load_sweep, save_report, save_sweep,
    write_summary, Config, SimulateConfig,
};
use magnonics::physics::magnon_dispersion;
use magnonics::sweep::{
    excitation_ratio_curve, exclusion_from_dispersion, normalize_baseline,
    preliminary_normalization, reference_index, run_pipeline, track_minima, BranchTrace,
    PipelineInput, RatioOptions, Sweep, SweepMeta, TrackOptions,
};
use magnonics::synth::generate_sweep;

#[derive(Parser)]
#[command(
    name = "magnonics",
    about = "Cavity magnon polariton spectroscopy toolkit",
    version
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input files (sweeps, tables, or report bundles, per subcommand).
    #[arg(long, global = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    output: PathBuf,
    /// Random seed override for `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic sweep files from the [simulate] config section.
    Simulate,
    /// Baseline-normalize sweeps (rough track + preliminary dispersion for
    /// the exclusion windows).
    Normalize,
    /// Track branch minima of each input sweep into a TSV trace table.
    Track,
    /// Fit the cavity resonance on one cut of the input sweep.
    FitResonator,
    /// Track and fit the avoided crossing of the input sweep.
    FitCrossing,
    /// Fit a single polariton cut (requires resonator.json and
    /// dispersion.json from earlier stages in the output directory).
    FitCut {
        /// Bias current of the cut; defaults to the degeneracy current.
        #[arg(long)]
        current: Option<f64>,
        /// Also free the coupling strength.
        #[arg(long)]
        free_g: bool,
    },
    /// Fit the TLS loss-tangent surface from a linewidth TSV
    /// (columns: temperature_k power_dbm kappa_m_hwhm_hz sigma_hz).
    FitTls,
    /// Excitation-ratio curves of each input sweep.
    Ratios,
    /// Run the full staged analysis and write the report bundle.
    Pipeline,
    /// Re-emit plot tables and a text summary from a report bundle.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Map error causes onto the documented exit codes.
fn classify(err: &anyhow::Error) -> u8 {
    if let Some(mag) = err.downcast_ref::<MagError>() {
        return match mag {
            MagError::SweepFile(_) | MagError::Config(_) | MagError::InvalidParam(_) => 2,
            MagError::Fit(_) => 3,
            MagError::NonFinite(_) | MagError::Sweep(_) | MagError::Pipeline(_) => 3,
            MagError::Io(_) => 1,
        };
    }
    1
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    std::fs::create_dir_all(&cli.output)
        .with_context(|| format!("creating output directory {}", cli.output.display()))?;
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Simulate => simulate(cli, &config),
        Command::Normalize => normalize(cli, &config),
        Command::Track => track(cli, &config),
        Command::FitResonator => fit_resonator_cmd(cli, &config),
        Command::FitCrossing => fit_crossing(cli, &config),
        Command::FitCut { current, free_g } => fit_cut(cli, &config, *current, *free_g),
        Command::FitTls => fit_tls(cli, &config),
        Command::Ratios => ratios(cli, &config),
        Command::Pipeline => pipeline(cli, &config),
        Command::Report => report(cli),
    }
}

fn sweep_inputs(cli: &Cli) -> anyhow::Result<Vec<(PathBuf, Sweep)>> {
    if cli.input.is_empty() {
        bail!("no --input files given");
    }
    let mut out = Vec::new();
    for path in &cli.input {
        let sweep = load_sweep(path).with_context(|| format!("loading {}", path.display()))?;
        out.push((path.clone(), sweep));
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn simulate(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sim: &SimulateConfig = config
        .simulate
        .as_ref()
        .ok_or_else(|| anyhow!(MagError::Config("missing [simulate] section".into())))?;
    let base_seed = cli.seed.unwrap_or(sim.seed);
    let (freq, currents) = sim.axes.axes()?;
    let mut written = 0usize;
    let mut index = 0u64;
    for &t in &sim.campaign.temperatures_k {
        for &p in &sim.campaign.powers_dbm {
            let truth = sim.truth_spec(base_seed.wrapping_add(index))?;
            let label = format!("T{:.4}K_P{:+.1}dBm", t, p);
            let mut meta = SweepMeta::new(t, p, sim.attenuation_db);
            meta.tags.insert("label".into(), label.clone());
            let sweep = generate_sweep(&truth, &freq, &currents, meta)?;
            let path = cli.output.join(format!("{label}.sweep"));
            save_sweep(&sweep, &path)?;
            if cli.verbose {
                eprintln!("wrote {}", path.display());
            }
            written += 1;
            index += 1;
        }
    }
    if sim.campaign.resonator {
        let truth = sim.truth_spec(base_seed.wrapping_add(1_000_000))?;
        let t = sim.campaign.temperatures_k[0];
        let p = sim.campaign.powers_dbm[0];
        let mut meta = SweepMeta::new(t, p, sim.attenuation_db);
        meta.tags.insert("label".into(), "resonator".into());
        meta.tags.insert("role".into(), "resonator".into());
        let sweep = generate_sweep(&truth, &freq, &[sim.campaign.resonator_current_a], meta)?;
        let path = cli.output.join("resonator.sweep");
        save_sweep(&sweep, &path)?;
        written += 1;
    }
    // The resolved truth is stored next to the data for round-trip scoring.
    let mut resolved = sim.clone();
    resolved.seed = base_seed;
    let truth_toml = toml::to_string_pretty(&resolved)
        .map_err(|e| anyhow!("serializing truth spec: {e}"))?;
    std::fs::write(cli.output.join("truth.toml"), truth_toml)?;
    println!("simulate: wrote {written} sweep files to {}", cli.output.display());
    Ok(ExitCode::SUCCESS)
}

/// Cavity parameters for the standalone stage commands: a resonator.json
/// left by `fit-resonator` in the output directory wins, then the config
/// override, then a generic guess.
fn cavity_for_stages(
    cli: &Cli,
    config: &Config,
) -> anyhow::Result<magnonics::physics::CavityParams> {
    let json_path = cli.output.join("resonator.json");
    if json_path.exists() {
        let v = read_json(&json_path)?;
        let grab = |key: &str| -> anyhow::Result<f64> {
            v.get(key)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| anyhow!(MagError::Config(format!("missing {key}"))))
        };
        return Ok(magnonics::physics::CavityParams::new(
            hz_to_angular(grab("f_r_hz")?),
            hz_to_angular(grab("kappa_c_hwhm_hz")?),
            hz_to_angular(grab("kappa_i_hwhm_hz")?),
        )?);
    }
    if let Some(o) = &config.pipeline.cavity_override {
        return Ok(magnonics::physics::CavityParams::new(
            hz_to_angular(o.f_r_hz),
            hz_to_angular(o.kappa_c_hwhm_hz),
            hz_to_angular(o.kappa_i_hwhm_hz),
        )?);
    }
    // Generic fallback so `normalize` stays usable on its own.
    Ok(magnonics::physics::CavityParams::new(
        hz_to_angular(5.24e9),
        hz_to_angular(0.57e6),
        hz_to_angular(0.43e6),
    )?)
}

fn normalize(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let crossing: Vec<Sweep> = sweeps.iter().map(|(_, s)| s.clone()).collect();
    let cav = cavity_for_stages(cli, config)?;
    let ref_idx = reference_index(&crossing);
    let (cal, _, tail, notes) =
        preliminary_normalization(&crossing, ref_idx, &cav, &config.pipeline)?;
    for note in &notes {
        eprintln!("note: {note}");
    }
    for (path, sweep) in &sweeps {
        let windows = exclusion_from_dispersion(
            &cal,
            cav.kappa_l(),
            sweep.current_a(),
            config.pipeline.exclusion_half_width_kappa_l,
        );
        let normalized = normalize_baseline(
            sweep,
            &windows,
            config.pipeline.baseline_weighting,
            Some(&tail),
        )?;
        let out = cli.output.join(format!("{}_normalized.sweep", stem(path)));
        save_sweep(&normalized, &out)?;
        if cli.verbose {
            eprintln!("wrote {}", out.display());
        }
    }
    println!("normalize: {} sweeps", sweeps.len());
    Ok(ExitCode::SUCCESS)
}

fn write_traces(path: &Path, traces: &[BranchTrace]) -> anyhow::Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "# current_a\tf_plus_hz\tf_minus_hz\tdepth_plus\tdepth_minus")?;
    for t in traces {
        writeln!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            t.current_a, t.omega_plus_hz, t.omega_minus_hz, t.depth_plus, t.depth_minus
        )?;
    }
    Ok(())
}

fn track(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let opts = TrackOptions {
        depth_threshold_sigmas: config.pipeline.track_depth_sigmas,
        ..TrackOptions::default()
    };
    for (path, sweep) in &sweeps {
        let result = track_minima(sweep, &opts)?;
        let out = cli.output.join(format!("{}_traces.tsv", stem(path)));
        write_traces(&out, &result.traces)?;
        if cli.verbose {
            for (col, reason) in &result.skipped {
                eprintln!("{}: column {col} skipped: {reason}", path.display());
            }
        }
        println!(
            "track: {} -> {} columns traced, {} skipped",
            path.display(),
            result.traces.len(),
            result.skipped.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn fit_resonator_cmd(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let (path, sweep) = &sweeps[0];
    let col = config
        .pipeline
        .resonator_current_a
        .map_or(0, |c| sweep.nearest_column(c));
    let opts = ResonatorOptions {
        regime: config.pipeline.resonator_regime,
        ..ResonatorOptions::default()
    };
    let (cav, fit) = fit_resonator(&sweep.cut(col), &opts)?;
    let report = serde_json::json!({
        "input": path.display().to_string(),
        "current_a": sweep.current_a()[col],
        "f_r_hz": cav.omega_r() / magnonics::constants::TWO_PI,
        "kappa_c_hwhm_hz": cav.kappa_c() / magnonics::constants::TWO_PI,
        "kappa_i_hwhm_hz": cav.kappa_i() / magnonics::constants::TWO_PI,
        "kappa_l_hwhm_hz": cav.kappa_l() / magnonics::constants::TWO_PI,
        "q_c": cav.q_c(),
        "q_i": cav.q_i(),
        "q_l": cav.q_l(),
        "converged": fit.converged,
        "n_iter": fit.n_iter,
        "residual_norm": fit.residual_norm,
    });
    let out = cli.output.join("resonator.json");
    std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "fit-resonator: Q_l = {:.0}, f_r = {:.0} Hz -> {}",
        cav.q_l(),
        cav.omega_r() / magnonics::constants::TWO_PI,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn fit_crossing(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let (path, sweep) = &sweeps[0];
    let opts = TrackOptions {
        depth_threshold_sigmas: config.pipeline.track_depth_sigmas,
        ..TrackOptions::default()
    };
    let tracked = track_minima(sweep, &opts)?;
    let points: Vec<_> = tracked.traces.iter().map(|t| t.to_branch_point()).collect();
    let (cal, fit, diag) = fit_dispersion(&points, FitOptions::default())?;
    write_traces(
        &cli.output.join(format!("{}_traces.tsv", stem(path))),
        &tracked.traces,
    )?;
    let hz = magnonics::constants::TWO_PI;
    let report = serde_json::json!({
        "input": path.display().to_string(),
        "f_r_bare_hz": cal.omega_r_bare / hz,
        "f_m_zero_hz": cal.omega_m_zero / hz,
        "slope_hz_per_a": cal.slope / hz,
        "g_hz": cal.g / hz,
        "crossing_current_a": diag.crossing_current_a,
        "crossing_in_span": diag.crossing_in_span,
        "converged": fit.converged,
        "n_iter": fit.n_iter,
        "residual_norm": fit.residual_norm,
    });
    let out = cli.output.join("dispersion.json");
    std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "fit-crossing: g = {:.0} Hz, crossing at {:.4} A -> {}",
        cal.g / hz,
        diag.crossing_current_a,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn read_json(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow!(MagError::Config(format!("{}: {e}", path.display()))))
}

fn fit_cut(
    cli: &Cli,
    config: &Config,
    current: Option<f64>,
    free_g: bool,
) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let (path, sweep) = &sweeps[0];
    let resonator = read_json(&cli.output.join("resonator.json"))?;
    let dispersion = read_json(&cli.output.join("dispersion.json"))?;
    let grab = |v: &serde_json::Value, key: &str| -> anyhow::Result<f64> {
        v.get(key)
            .and_then(|x| x.as_f64())
            .ok_or_else(|| anyhow!(MagError::Config(format!("missing {key}"))))
    };
    let kappa_c = hz_to_angular(grab(&resonator, "kappa_c_hwhm_hz")?);
    let kappa_l = hz_to_angular(grab(&resonator, "kappa_l_hwhm_hz")?);
    let cal = magnonics::physics::DispersionCal::new(
        hz_to_angular(grab(&dispersion, "f_r_bare_hz")?),
        hz_to_angular(grab(&dispersion, "f_m_zero_hz")?),
        hz_to_angular(grab(&dispersion, "slope_hz_per_a")?),
        hz_to_angular(grab(&dispersion, "g_hz")?),
    )?;
    let target = current.unwrap_or_else(|| cal.degeneracy_current());
    let col = sweep.nearest_column(target);
    let cut = sweep.cut(col);
    let fixed = PolaritonFixed {
        omega_r: cal.omega_r_bare,
        kappa_c,
        kappa_l,
        g: cal.g,
    };
    let opts = PolaritonOptions {
        free_g,
        baseline_degree: config.pipeline.cut_baseline_degree,
        omega_m_init: Some(magnon_dispersion(sweep.current_a()[col], &cal)),
        kappa_m_init: hz_to_angular(config.pipeline.kappa_m_init_hz),
        kappa_m_floor: hz_to_angular(config.pipeline.kappa_m_floor_hz),
        ..Default::default()
    };
    let (mag, fit) = fit_polariton_cut(&cut, &fixed, &opts)?;
    let hz = magnonics::constants::TWO_PI;
    let sigma_hz = fit.sigma.as_ref().map(|s| s[1] / hz);
    let report = serde_json::json!({
        "input": path.display().to_string(),
        "current_a": sweep.current_a()[col],
        "f_m_hz": mag.omega_m() / hz,
        "kappa_m_hwhm_hz": mag.kappa_m() / hz,
        "kappa_m_sigma_hz": sigma_hz,
        "g_hz": mag.g() / hz,
        "g_freed": free_g,
        "converged": fit.converged,
        "n_iter": fit.n_iter,
        "residual_norm": fit.residual_norm,
    });
    let out = cli.output.join("cut.json");
    std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "fit-cut: kappa_m = {:.0} Hz (HWHM) at {:.4} A -> {}",
        mag.kappa_m() / hz,
        sweep.current_a()[col],
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn fit_tls(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    if cli.input.is_empty() {
        bail!("no --input table given");
    }
    let text = std::fs::read_to_string(&cli.input[0])?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| {
                anyhow!(MagError::Config(format!(
                    "{}:{}: {e}",
                    cli.input[0].display(),
                    lineno + 1
                )))
            })?;
        if fields.len() < 4 {
            bail!(MagError::Config(format!(
                "{}:{}: need 4 columns (T_K P_dBm kappa_m_hz sigma_hz)",
                cli.input[0].display(),
                lineno + 1
            )));
        }
        samples.push(TlsSample {
            temperature_k: fields[0],
            power_dbm: fields[1],
            kappa_m: hz_to_angular(fields[2]),
            sigma: hz_to_angular(fields[3]),
        });
    }
    let omega_ref = hz_to_angular(config.pipeline.tls_f_ref_hz.unwrap_or(5.239e9));
    let (params, fit) = fit_tls_surface(&samples, omega_ref, FitOptions::default())?;
    let hz = magnonics::constants::TWO_PI;
    let report = serde_json::json!({
        "kappa_0_hwhm_hz": params.kappa_0 / hz,
        "p_c_dbm": fit.params[1],
        "kappa_off_hwhm_hz": params.kappa_off / hz,
        "f_ref_hz": omega_ref / hz,
        "sigma": fit.sigma.as_ref().map(|s| serde_json::json!({
            "kappa_0_hz": s[0] / hz,
            "p_c_db": s[1],
            "kappa_off_hz": s[2] / hz,
        })),
        "converged": fit.converged,
        "n_iter": fit.n_iter,
        "residual_norm": fit.residual_norm,
    });
    let out = cli.output.join("tls.json");
    std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "fit-tls: kappa_0 = {:.0} Hz, P_c = {:.1} dBm, kappa_off = {:.0} Hz -> {}",
        params.kappa_0 / hz,
        fit.params[1],
        params.kappa_off / hz,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn ratios(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let resonator = read_json(&cli.output.join("resonator.json"))?;
    let dispersion = read_json(&cli.output.join("dispersion.json"))?;
    let grab = |v: &serde_json::Value, key: &str| -> anyhow::Result<f64> {
        v.get(key)
            .and_then(|x| x.as_f64())
            .ok_or_else(|| anyhow!(MagError::Config(format!("missing {key}"))))
    };
    let cav = magnonics::physics::CavityParams::new(
        hz_to_angular(grab(&resonator, "f_r_hz")?),
        hz_to_angular(grab(&resonator, "kappa_c_hwhm_hz")?),
        hz_to_angular(grab(&resonator, "kappa_i_hwhm_hz")?),
    )?;
    let cal = magnonics::physics::DispersionCal::new(
        hz_to_angular(grab(&dispersion, "f_r_bare_hz")?),
        hz_to_angular(grab(&dispersion, "f_m_zero_hz")?),
        hz_to_angular(grab(&dispersion, "slope_hz_per_a")?),
        hz_to_angular(grab(&dispersion, "g_hz")?),
    )?;
    let opts = RatioOptions {
        regime: config.pipeline.ratio_regime,
        window_half_width_hz: config.pipeline.ratio_window_half_width_hz,
        ..RatioOptions::default()
    };
    use std::io::Write;
    for (path, sweep) in &sweeps {
        let shares = excitation_ratio_curve(sweep, &cal, &cav, &opts)?;
        let out = cli.output.join(format!("{}_shares.tsv", stem(path)));
        let mut f = std::fs::File::create(&out)?;
        writeln!(f, "# current_a\tmagnon_share\tphoton_share")?;
        for point in shares.iter().flatten() {
            writeln!(
                f,
                "{}\t{}\t{}",
                point.current_a, point.magnon_share, point.photon_share
            )?;
        }
        println!("ratios: {} -> {}", path.display(), out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn pipeline(cli: &Cli, config: &Config) -> anyhow::Result<ExitCode> {
    let sweeps = sweep_inputs(cli)?;
    let mut crossing = Vec::new();
    let mut resonator = None;
    for (path, sweep) in sweeps {
        if sweep.meta.tags.get("role").map(String::as_str) == Some("resonator") {
            resonator = Some(sweep);
        } else {
            let mut sweep = sweep;
            sweep
                .meta
                .tags
                .entry("label".into())
                .or_insert_with(|| stem(&path));
            crossing.push(sweep);
        }
    }
    let mut pipeline_config = config.pipeline.clone();
    if pipeline_config.seed.is_none() {
        pipeline_config.seed = cli.seed;
    }
    let input = PipelineInput {
        crossing,
        resonator,
    };
    let bundle = run_pipeline(&input, &pipeline_config)?;
    save_report(&bundle, &cli.output.join("report.json"))?;
    write_summary(&bundle, &cli.output.join("summary.txt"))?;
    emit_plot_data(&bundle, Some(&input.crossing), &cli.output.join("plots"))?;
    if cli.verbose {
        for w in &bundle.warnings {
            eprintln!("warning: {w}");
        }
    }
    println!(
        "pipeline: {} linewidth rows, {} fits, tls {} -> {}",
        bundle.linewidths.len(),
        bundle.fits.len(),
        if bundle.tls.is_some() { "ok" } else { "skipped" },
        cli.output.join("report.json").display()
    );
    if bundle.partial {
        println!("pipeline: completed partially; see warnings in the report");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(cli: &Cli) -> anyhow::Result<ExitCode> {
    if cli.input.is_empty() {
        bail!("no --input report given");
    }
    let bundle = load_report(&cli.input[0])?;
    write_summary(&bundle, &cli.output.join("summary.txt"))?;
    let written = emit_plot_data(&bundle, None, &cli.output.join("plots"))?;
    println!(
        "report: {} plot tables -> {}",
        written.len(),
        cli.output.join("plots").display()
    );
    if bundle.partial {
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}
