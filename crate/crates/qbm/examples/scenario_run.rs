//! Run a small scenario from config text and write its outputs.
use qbm::scenario::{emit_outputs, run_scenario, ScenarioConfig};

const CONFIG: &str = r#"
schema = 1
name = "demo"
omega_ghz = 1.0
gamma_ghz = 0.1
cutoff_ghz = 100.0
exponent = 1
temperature_mk = 20.0
drive = "none"
drive_amplitude = 0.0
drive_frequency_ghz = 0.0
drive_phase = 0.0
initial = "bloch:1.5707963267948966,0"
t_max_ns = 4.0
output_points = 81
spacing = "linear"
t_min_ns = 0.001
grid_step_ns = 0.001
fock_cutoff = 40
leakage_samples = 64
markov_mls = true
bloch_rwa = true
greens_dump = false
csv_only = false
out_dir = "out/demo"
"#;

fn main() -> qbm::Result<()> {
    let cfg = ScenarioConfig::from_toml(CONFIG)?;
    let results = run_scenario(&cfg)?;
    let last = results.exact.last().expect("at least two output times");
    println!("t={:.2} σ=({:.4}, {:.4}, {:.4}) leakage_min={:.4}", last.t, last.block.sx, last.block.sy, last.block.sz, last.leakage_min_exact);
    for path in emit_outputs(&results, &cfg.out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
