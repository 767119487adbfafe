use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pulse_jcm::config::ScenarioConfig;
use pulse_jcm::pipelines::{self, FIG4_GAMMA_REFL};
use pulse_jcm::{AppError, Result};
use pulse_jcm_core::models::FieldStateSpec;
use pulse_jcm_core::Complex;

#[derive(Parser)]
#[command(name = "pulse-jcm", version, about = "Two-level emitter driven by a traveling quantum pulse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its CSV/JSON pair.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Parse and check a scenario file; print the resolved config.
    Validate { config: PathBuf },
    /// Rabi oscillations with a 20-photon pulse: reference, JCM-I, JCM-II, JCM-III.
    Fig3 {
        #[arg(long, default_value = "out/fig3")]
        out_dir: PathBuf,
    },
    /// Two-photon subtraction: fidelity sweep over τ and γ′ plus the optimal dynamics.
    Fig4 {
        #[arg(long, default_value_t = 0.15)]
        tau_min: f64,
        #[arg(long, default_value_t = 0.9)]
        tau_max: f64,
        #[arg(long, default_value_t = 31)]
        tau_steps: usize,
        #[arg(long, value_delimiter = ',', default_values_t = FIG4_GAMMA_REFL.to_vec())]
        gamma_refl: Vec<f64>,
        /// Time bins of the oracle run used for the output modes.
        #[arg(long, default_value_t = 2000)]
        bins: usize,
        #[arg(long, default_value = "out/fig4")]
        out_dir: PathBuf,
    },
    /// Fock against coherent input of equal mean photon number.
    Collapse {
        #[arg(long, default_value_t = 20)]
        photons: usize,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Use a coherent input of mean `photons` as the primary field.
        #[arg(long)]
        coherent: bool,
        #[arg(long, default_value = "out/collapse")]
        out_dir: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out_dir } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let out = pulse_jcm::run_scenario(&cfg, out_dir.as_deref())?;
            let d = &out.run.summary.diagnostics;
            println!("wrote {} and {}", out.csv.display(), out.json.display());
            println!(
                "max |tr ρ − 1| = {:.3e}, min eigenvalue = {:.3e}, {} steps",
                d.max_trace_deviation, d.min_eigenvalue, d.accepted_steps
            );
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            print!("{}", cfg.to_toml());
            println!("# hash {}", cfg.content_hash());
        }
        Command::Fig3 { out_dir } => {
            let suite = pipelines::fig3_suite(&out_dir)?;
            println!("{}", serde_json::to_string_pretty(&suite.anchors).expect("serializable"));
        }
        Command::Fig4 { tau_min, tau_max, tau_steps, gamma_refl, bins, out_dir } => {
            if !(tau_min > 0.0 && tau_max > tau_min) || tau_steps < 2 {
                return Err(AppError::invalid("tau range: need 0 < tau-min < tau-max and tau-steps >= 2"));
            }
            let sweep = pipelines::fig4_sweep(&pipelines::linspace(tau_min, tau_max, tau_steps), &gamma_refl)?;
            sweep.write(&out_dir)?;
            for o in &sweep.optima {
                println!(
                    "gamma_refl {:<5} tau* {:.4} fidelity {:.6}{}",
                    o.gamma_refl,
                    o.point.tau,
                    o.point.fidelity,
                    if o.interior { "" } else { " (grid edge)" }
                );
            }
            let best = sweep
                .optima
                .iter()
                .min_by(|a, b| a.gamma_refl.total_cmp(&b.gamma_refl))
                .expect("non-empty sweep");
            pipelines::fig4_panel_a(best.point.tau, bins, &out_dir)?;
            println!("wrote {}", out_dir.display());
        }
        Command::Collapse { photons, tau, coherent, out_dir } => {
            let field = if coherent {
                FieldStateSpec::Coherent(Complex::new((photons as f64).sqrt(), 0.0))
            } else {
                FieldStateSpec::Fock(photons)
            };
            let r = pipelines::collapse_revival_experiment(&field, tau)?;
            r.write(&out_dir)?;
            println!("Fock JCM-I vs JCM-III: sup |ΔP_e| = {:.3e}", r.fock_vs_ip);
            println!("coherent vs classical: sup |ΔP_e| = {:.3e}", r.coherent_vs_classical);
            println!("revival: Fock {:?}, coherent {:?}", r.fock_revival, r.coherent_revival);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
