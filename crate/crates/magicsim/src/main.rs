//! Command-line surface: compute channel magic monotones, run the static
//! and dynamic quasiprobability simulators, manage catalogue caches, and
//! regenerate the reference result tables as CSV.
//!
//! Determinism contract: everything written to stdout or `--out` depends
//! only on the inputs and `--seed` — never on `--jobs` or wall time.
//! Timings and progress go to stderr.

use clap::{Parser, Subcommand, ValueEnum};
use magicsim::channel::{self, KrausChannel};
use magicsim::error::{Error, Result};
use magicsim::sim::{self, CircuitSpec};
use magicsim::{catalog, monotones};
use serde::Deserialize;
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "magicsim", version, about = "Magic monotones and quasiprobability simulators for quantum channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Directory for stabiliser catalogue cache files (wins over the
    /// MAGIC_CACHE_DIR environment variable).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Cap on worker threads (default: all cores). Results are identical
    /// for every value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output file (monotone/simulate) or directory (reproduce).
    /// Defaults to stdout / ./reproduce.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for monotone and simulate reports.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// JSON config file supplying defaults for the global options
    /// (cache_dir, jobs, out, format); explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    Rphi,
    Cap,
    Rstar,
    Rcpr,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    A1,
    A2,
    A3,
    T1,
    Multicontrol,
    Regularised,
    Ampdamp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CacheAction {
    Build,
    Verify,
    Info,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute magic monotones of a channel read from a JSON file.
    Monotone {
        /// Channel description (JSON).
        #[arg(long)]
        channel: PathBuf,
        /// Which monotone(s) to compute.
        #[arg(long, value_enum, default_value = "all")]
        measure: Measure,
        /// Enable experimental large cases (2-qubit CPR basis, n = 5 diagonal).
        #[arg(long)]
        extended: bool,
    },
    /// Run a quasiprobability Monte Carlo simulation of a circuit.
    Simulate {
        /// Circuit description (JSON).
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "static")]
        method: Method,
        /// Sample count; defaults to the Hoeffding forecast for (δ, ε).
        #[arg(long)]
        samples: Option<u64>,
        /// Additive accuracy target δ.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Failure probability ε.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Group runs of consecutive diagonal elements into blocks of at
        /// most this many qubits before simulating (0 = off).
        #[arg(long, default_value_t = 0)]
        block: usize,
    },
    /// Regenerate a reference result table as CSV file(s).
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        /// Multiplier on grid densities for sweep-style targets.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Include the n = 5 columns (slow; prints a runtime warning).
        #[arg(long)]
        extended: bool,
    },
    /// Build, verify, or describe on-disk stabiliser catalogue caches.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
        /// Catalogue width in qubits.
        #[arg(long)]
        n: usize,
    },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    cache_dir: Option<PathBuf>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    format: Option<String>,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let cache_dir = cli.cache_dir.or(file_cfg.cache_dir);
    let jobs = cli.jobs.or(file_cfg.jobs);
    let out = cli.out.or(file_cfg.out);
    let format = match (cli.format, file_cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("csv")) => Format::Csv,
        (None, Some("json")) => Format::Json,
        (None, Some(other)) => return Err(Error::Parse(format!("config format: unknown value {other:?}"))),
        (None, None) => Format::Csv,
    };

    if let Some(dir) = &cache_dir {
        // The library resolves the catalogue cache through this variable.
        std::env::set_var("MAGIC_CACHE_DIR", dir);
    }
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;
    }

    match cli.cmd {
        Cmd::Monotone { channel, measure, extended } => {
            cmd_monotone(&channel, measure, extended, format, out.as_deref())
        }
        Cmd::Simulate { circuit, method, samples, delta, epsilon, seed, block } => {
            cmd_simulate(&circuit, method, samples, delta, epsilon, seed, block, format, out.as_deref())
        }
        Cmd::Reproduce { target, scale, extended } => {
            let dir = out.unwrap_or_else(|| PathBuf::from("reproduce"));
            cmd_reproduce(target, scale, extended, &dir)
        }
        Cmd::Cache { action, n } => {
            let dir = cache_dir
                .or_else(|| std::env::var_os("MAGIC_CACHE_DIR").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("cache"));
            cmd_cache(action, n, &dir)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// monotone
// ---------------------------------------------------------------------------

struct MeasureRow {
    name: &'static str,
    value: f64,
    iterations: Option<usize>,
    duality_gap: Option<f64>,
}

fn cmd_monotone(
    path: &Path,
    measure: Measure,
    extended: bool,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let ch = channel::channel_from_json(&text)?;
    if ch.diagonal && ch.n == 5 && !extended {
        return Err(Error::Limit(
            "5-qubit diagonal channels are slow; rerun with --extended".into(),
        ));
    }
    let want = |m: Measure| measure == m || measure == Measure::All;
    let mut rows: Vec<MeasureRow> = Vec::new();
    let t0 = Instant::now();

    if want(Measure::Rphi) {
        let r = monotones::choi_robustness(&ch)?;
        rows.push(MeasureRow {
            name: "rphi",
            value: r.value,
            iterations: Some(r.decomposition.stats.iterations),
            duality_gap: Some(r.decomposition.stats.duality_gap),
        });
    }
    if want(Measure::Cap) {
        let c = monotones::magic_capacity(&ch)?;
        rows.push(MeasureRow { name: "cap", value: c.value, iterations: None, duality_gap: None });
    }
    if want(Measure::Rstar) {
        let r = monotones::channel_robustness(&ch)?;
        rows.push(MeasureRow {
            name: "rstar",
            value: r.value,
            iterations: Some(r.decomposition.stats.iterations),
            duality_gap: Some(r.decomposition.stats.duality_gap),
        });
    }
    // R_CPR is defined for 1-qubit channels (2-qubit behind --extended);
    // under `all` it is skipped where unsupported rather than failing.
    let cpr_supported = ch.n == 1 || (ch.n == 2 && extended);
    if measure == Measure::Rcpr || (measure == Measure::All && cpr_supported) {
        let r = monotones::r_cpr(&ch, extended)?;
        rows.push(MeasureRow {
            name: "rcpr",
            value: r.value,
            iterations: Some(r.stats.iterations),
            duality_gap: Some(r.stats.duality_gap),
        });
    }
    eprintln!("computed {} measure(s) in {} ms", rows.len(), t0.elapsed().as_millis());

    let text = match format {
        Format::Csv => {
            let mut s = String::from("measure,value,iterations,duality_gap\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{:.6},{},{}\n",
                    r.name,
                    r.value,
                    r.iterations.map_or(String::new(), |v| v.to_string()),
                    r.duality_gap.map_or(String::new(), |v| format!("{v:.3e}")),
                ));
            }
            s
        }
        Format::Json => {
            let measures: serde_json::Map<String, serde_json::Value> = rows
                .iter()
                .map(|r| {
                    (
                        r.name.to_string(),
                        json!({
                            "value": round6(r.value),
                            "iterations": r.iterations,
                            "duality_gap": r.duality_gap,
                        }),
                    )
                })
                .collect();
            let doc = json!({ "qubits": ch.n, "diagonal": ch.diagonal, "measures": measures });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    };
    emit(out, &text)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    method: Method,
    samples: Option<u64>,
    delta: f64,
    epsilon: f64,
    seed: u64,
    block: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let mut circuit = CircuitSpec::from_json(&text)?;
    if block > 0 {
        let before = circuit.elements.len();
        circuit = sim::block_diagonal_elements(&circuit, block)?;
        eprintln!("blocking: {before} -> {} elements", circuit.elements.len());
    }

    let decomps = sim::precompute_static(&circuit)?;
    let l1_forecast = sim::static_l1_total(&decomps);
    let forecast_n = sim::required_samples(l1_forecast, delta, epsilon)?;
    let n_samples = samples.unwrap_or(forecast_n);

    let result = match method {
        Method::Static => sim::static_simulate(&circuit, &decomps, n_samples, seed)?,
        Method::Dynamic => {
            let (res, stats) = sim::dynamic_simulate(&circuit, n_samples, seed)?;
            eprintln!(
                "dynamic: max step robustness {:.6}, {} LP solves, {} memo hits",
                stats.max_step_r, stats.lp_solves, stats.memo_hits
            );
            res
        }
    };
    eprintln!(
        "estimate {:.6} ± {:.6} from {} samples in {} ms",
        result.estimate, result.stderr, result.n_samples, result.runtime_ms
    );

    // The report deliberately omits wall time so identical (input, seed)
    // runs are byte-identical regardless of --jobs or machine load.
    let text = match format {
        Format::Csv => format!(
            "method,estimate,stderr,n_samples,l1_total,forecast_n,delta,epsilon,seed\n{},{:.6},{:.6},{},{:.6},{},{},{},{}\n",
            result.method,
            result.estimate,
            result.stderr,
            result.n_samples,
            result.l1_total,
            forecast_n,
            delta,
            epsilon,
            seed
        ),
        Format::Json => {
            let doc = json!({
                "method": result.method,
                "estimate": round6(result.estimate),
                "stderr": round6(result.stderr),
                "n_samples": result.n_samples,
                "l1_total": round6(result.l1_total),
                "forecast_n": forecast_n,
                "delta": delta,
                "epsilon": epsilon,
                "seed": seed,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
    };
    emit(out, &text)
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

fn write_csv(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(3)
}

fn cmd_reproduce(target: Target, scale: f64, extended: bool, dir: &Path) -> Result<()> {
    if extended {
        eprintln!("warning: --extended enables 5-qubit columns; expect a long runtime");
    }
    match target {
        Target::A1 => reproduce_a1(extended, dir),
        Target::A2 => reproduce_a2(dir),
        Target::A3 => reproduce_a3(extended, dir),
        Target::T1 => reproduce_t1(scale, extended, dir),
        Target::Multicontrol => reproduce_multicontrol(extended, dir),
        Target::Regularised => reproduce_regularised(scale, dir),
        Target::Ampdamp => reproduce_ampdamp(scale, dir),
    }
}

/// Pure stabiliser state counts by qubit number (exact enumeration).
fn reproduce_a1(extended: bool, dir: &Path) -> Result<()> {
    let max_n = if extended { 5 } else { 4 };
    let mut s = String::from("n,states\n");
    for n in 1..=max_n {
        let cat = catalog::enumerate_states(n)?;
        s.push_str(&format!("{n},{}\n", cat.num_states()));
    }
    write_csv(dir, "a1_state_counts.csv", &s)
}

/// Affine subspace counts of F2^n (total and non-trivial, i.e. dimension ≥ 1).
fn reproduce_a2(dir: &Path) -> Result<()> {
    let mut s = String::from("n,total,nontrivial\n");
    for n in 1..=5 {
        let spaces = catalog::enumerate_affine(n)?;
        let nontrivial = spaces.iter().filter(|sp| sp.k >= 1).count();
        s.push_str(&format!("{n},{},{nontrivial}\n", spaces.len()));
    }
    write_csv(dir, "a2_affine_counts.csv", &s)
}

/// Robustness ladder for the multicontrol-T gate: the k-th row is the
/// robustness of magic of M_{2,k} applied to |+>^k.
fn reproduce_a3(extended: bool, dir: &Path) -> Result<()> {
    let max_k = if extended { 5 } else { 4 };
    let mut s = String::from("k,robustness\n");
    for k in 1..=max_k {
        let ch = channel::multicontrol_phase(2, k)?;
        let r = monotones::robustness_of_magic(&ch.on_plus())?;
        s.push_str(&format!("{k},{:.6}\n", r.value));
        eprintln!("a3 k={k}: {:.6}", r.value);
    }
    write_csv(dir, "a3_multicontrol_t.csv", &s)
}

fn monotone_triple(ch: &KrausChannel) -> Result<(f64, f64, f64)> {
    let rphi = monotones::choi_robustness(ch)?.value;
    let cap = monotones::magic_capacity(ch)?.value;
    let rstar = monotones::channel_robustness(ch)?.value;
    Ok((rphi, cap, rstar))
}

/// Tightness of R(Φ) ≤ C ≤ R* for diagonal gate families: multicontrol
/// phase gates and random phase gates.
fn reproduce_t1(scale: f64, extended: bool, dir: &Path) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-5;
    let max_n = if extended { 5 } else { 4 };
    let mut s = String::from("family,t,seed,n,rphi,cap,rstar,rphi_eq_cap,cap_eq_rstar\n");
    for t in [0u32, 2] {
        for n in 2..=max_n {
            let ch = channel::multicontrol_phase(t, n)?;
            let (rphi, cap, rstar) = monotone_triple(&ch)?;
            s.push_str(&format!(
                "multicontrol,{t},,{n},{rphi:.6},{cap:.6},{rstar:.6},{},{}\n",
                eq(rphi, cap),
                eq(cap, rstar)
            ));
            eprintln!("t1 multicontrol t={t} n={n}: {rphi:.6} {cap:.6} {rstar:.6}");
        }
    }
    let gates_per_n = scaled(3, scale);
    for n in 2..=3usize {
        for g in 0..gates_per_n {
            let seed = 1000 * n as u64 + g as u64;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let phases: Vec<f64> =
                (0..1usize << n).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
            let ch = channel::diagonal_unitary(&phases)?;
            let (rphi, cap, rstar) = monotone_triple(&ch)?;
            s.push_str(&format!(
                "random_phase,,{seed},{n},{rphi:.6},{cap:.6},{rstar:.6},{},{}\n",
                eq(rphi, cap),
                eq(cap, rstar)
            ));
            eprintln!("t1 random n={n} seed={seed}: {rphi:.6} {cap:.6} {rstar:.6}");
        }
    }
    write_csv(dir, "t1_tightness.csv", &s)
}

/// R(Φ), C, R* against qubit count for the multicontrol phase gate
/// families t = 0 (Z-like), 1 (S-like), 2 (T-like).
fn reproduce_multicontrol(extended: bool, dir: &Path) -> Result<()> {
    let max_n = if extended { 5 } else { 4 };
    let mut s = String::from("t,n,rphi,cap,rstar\n");
    for t in [0u32, 1, 2] {
        for n in 1..=max_n {
            let ch = channel::multicontrol_phase(t, n)?;
            let (rphi, cap, rstar) = monotone_triple(&ch)?;
            s.push_str(&format!("{t},{n},{rphi:.6},{cap:.6},{rstar:.6}\n"));
            eprintln!("multicontrol t={t} n={n}: {rphi:.6} {cap:.6} {rstar:.6}");
        }
    }
    write_csv(dir, "multicontrol_monotones.csv", &s)
}

/// Normalised channel robustness [R*(U(θ)^{⊗n})]^{1/n} for Z-rotations.
fn reproduce_regularised(scale: f64, dir: &Path) -> Result<()> {
    let thetas = grid(0.0, std::f64::consts::FRAC_PI_4, scaled(9, scale));
    let mut s = String::from("theta,n,rstar,normalised\n");
    for &theta in &thetas {
        let u = channel::z_rotation(theta);
        let mut block = u.clone();
        for n in 1..=4usize {
            if n > 1 {
                block = KrausChannel::tensor(&block, &u)?;
            }
            let r = monotones::channel_robustness(&block)?.value;
            let normalised = r.powf(1.0 / n as f64);
            s.push_str(&format!("{theta:.6},{n},{r:.6},{normalised:.6}\n"));
            eprintln!("regularised θ={theta:.4} n={n}: {normalised:.6}");
        }
    }
    write_csv(dir, "regularised_z_rotation.csv", &s)
}

/// Amplitude damping composed with X-rotations:
/// (a) C/R*/R_CPR against θ for both operation orders at p = 0.1,
/// (b) R*(U∘Λ_p) against p at θ = π/8,
/// (c) R(Φ) against R* at p = 0.1.
fn reproduce_ampdamp(scale: f64, dir: &Path) -> Result<()> {
    let p = 0.1;
    let lam = channel::amplitude_damping(p)?;
    let thetas = grid(0.0, std::f64::consts::FRAC_PI_4, scaled(13, scale));

    let mut a = String::from(
        "theta,cap_noise_after,rstar_noise_after,rcpr_noise_after,cap_noise_before,rstar_noise_before,rcpr_noise_before\n",
    );
    let mut c = String::from("theta,order,rphi,rstar\n");
    for &theta in &thetas {
        let u = channel::x_rotation(theta);
        // noise after the rotation: Λ_p ∘ U(θ)
        let lu = KrausChannel::compose(&lam, &u)?;
        // noise before the rotation: U(θ) ∘ Λ_p
        let ul = KrausChannel::compose(&u, &lam)?;
        let (rphi_lu, cap_lu, rstar_lu) = monotone_triple(&lu)?;
        let (rphi_ul, cap_ul, rstar_ul) = monotone_triple(&ul)?;
        let rcpr_lu = monotones::r_cpr(&lu, false)?.value;
        let rcpr_ul = monotones::r_cpr(&ul, false)?.value;
        a.push_str(&format!(
            "{theta:.6},{cap_lu:.6},{rstar_lu:.6},{rcpr_lu:.6},{cap_ul:.6},{rstar_ul:.6},{rcpr_ul:.6}\n"
        ));
        c.push_str(&format!("{theta:.6},noise_after,{rphi_lu:.6},{rstar_lu:.6}\n"));
        c.push_str(&format!("{theta:.6},noise_before,{rphi_ul:.6},{rstar_ul:.6}\n"));
        eprintln!("ampdamp θ={theta:.4}: R* after={rstar_lu:.6} before={rstar_ul:.6}");
    }
    write_csv(dir, "ampdamp_orderings.csv", &a)?;
    write_csv(dir, "ampdamp_choi_vs_star.csv", &c)?;

    let theta = std::f64::consts::FRAC_PI_8;
    let u = channel::x_rotation(theta);
    let mut b = String::from("p,rstar_noise_before\n");
    for &pv in &grid(0.0, 0.5, scaled(11, scale)) {
        let lam_p = channel::amplitude_damping(pv)?;
        let ul = KrausChannel::compose(&u, &lam_p)?;
        let r = monotones::channel_robustness(&ul)?.value;
        b.push_str(&format!("{pv:.6},{r:.6}\n"));
        eprintln!("ampdamp p={pv:.3}: R*={r:.6}");
    }
    write_csv(dir, "ampdamp_p_sweep.csv", &b)
}

// ---------------------------------------------------------------------------
// cache
// ---------------------------------------------------------------------------

fn cmd_cache(action: CacheAction, n: usize, dir: &Path) -> Result<()> {
    if n == 0 || n > 5 {
        return Err(Error::Limit("cache widths 1..=5 are supported".into()));
    }
    match action {
        CacheAction::Build => {
            let t0 = Instant::now();
            let path = catalog::cache_write(dir, n)?;
            println!(
                "built {} ({} states, {} ms)",
                path.display(),
                catalog::stabilizer_state_count(n),
                t0.elapsed().as_millis()
            );
        }
        CacheAction::Verify => {
            let forms = catalog::cache_read(dir, n)?;
            println!(
                "ok: {} holds {} states (checksum verified)",
                catalog::cache_path(dir, n).display(),
                forms.len()
            );
        }
        CacheAction::Info => {
            let spaces = catalog::enumerate_affine(n)?;
            let path = catalog::cache_path(dir, n);
            let cached = if path.exists() { "present" } else { "absent" };
            println!(
                "n={n}: {} states, {} affine spaces ({} non-trivial); cache file {} ({cached})",
                catalog::stabilizer_state_count(n),
                spaces.len(),
                spaces.iter().filter(|s| s.k >= 1).count(),
                path.display()
            );
        }
    }
    Ok(())
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}
