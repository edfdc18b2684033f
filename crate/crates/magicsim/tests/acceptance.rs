//! End-to-end acceptance suite: one pass/fail line per criterion.
//!
//! Run verbosely with
//!   cargo test --release --test acceptance -- --nocapture
//! Set MAGIC_ACCEPT_EXTENDED=1 to additionally run the 5-qubit checks
//! (several extra minutes of catalogue enumeration and LP time).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use magicsim::channel::{self, KrausChannel};
use magicsim::linalg::outer;
use magicsim::{catalog, fattal, monotones, sim};
use rand::rngs::StdRng;
use rand::SeedableRng;

type CheckResult = std::result::Result<(), String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn extended() -> bool {
    std::env::var_os("MAGIC_ACCEPT_EXTENDED").is_some()
}

// ---------------------------------------------------------------------------
// 1. stabiliser state counts
// ---------------------------------------------------------------------------

fn c01_state_counts() -> CheckResult {
    let t0 = Instant::now();
    let expected = [6u64, 60, 1080, 36720];
    for (n, &want) in (1..=4).zip(&expected) {
        let cat = catalog::enumerate_states(n).map_err(err)?;
        check!(
            cat.num_states() as u64 == want && catalog::stabilizer_state_count(n) == want,
            "n={n}: got {} states, want {want}",
            cat.num_states()
        );
    }
    let dt = t0.elapsed();
    check!(dt.as_secs() < 60, "n ≤ 4 enumeration took {dt:?} (limit 60 s)");
    if extended() {
        let t5 = Instant::now();
        let cat = catalog::enumerate_states(5).map_err(err)?;
        check!(
            cat.num_states() == 2_423_520,
            "n=5: got {} states, want 2423520",
            cat.num_states()
        );
        check!(t5.elapsed().as_secs() < 1800, "n=5 enumeration over 30 min");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 2. affine subspace counts
// ---------------------------------------------------------------------------

fn c02_affine_counts() -> CheckResult {
    let t0 = Instant::now();
    let expected = [(11usize, 7usize), (51, 43), (307, 291), (2451, 2419)];
    for (n, &(total, nontrivial)) in (2..=5).zip(&expected) {
        let spaces = catalog::enumerate_affine(n).map_err(err)?;
        let nt = spaces.iter().filter(|s| s.k >= 1).count();
        check!(
            spaces.len() == total && nt == nontrivial,
            "n={n}: got {}/{nt}, want {total}/{nontrivial}",
            spaces.len()
        );
    }
    let dt = t0.elapsed();
    check!(dt.as_secs() < 10, "affine enumeration took {dt:?} (limit 10 s)");
    Ok(())
}

// ---------------------------------------------------------------------------
// 3. robustness of the T state, with a validated dual witness
// ---------------------------------------------------------------------------

fn c03_t_state_robustness() -> CheckResult {
    let t = channel::t_state();
    let rho = outer(&t, &t);
    let r = monotones::robustness_of_magic(&rho).map_err(err)?;
    let sqrt2 = 2f64.sqrt();
    check!(
        (r.value - sqrt2).abs() <= 1e-6,
        "R(|T⟩) = {} ≠ √2 ± 1e-6",
        r.value
    );
    check!(
        r.decomposition.stats.duality_gap <= 1e-7,
        "duality gap {} > 1e-7",
        r.decomposition.stats.duality_gap
    );
    let cat = monotones::shared_catalog(1).map_err(err)?;
    for i in 0..cat.num_states() {
        let v = cat.state(i).to_dense().map_err(err)?;
        let w = r.witness.evaluate(&outer(&v, &v));
        check!(w <= 1e-7, "witness value {w} > 1e-7 on stabiliser state {i}");
    }
    let wt = r.witness.evaluate(&rho);
    check!(
        wt > 0.0 && (wt - (r.value - 1.0)).abs() <= 1e-6,
        "witness on |T⟩ gives {wt}, want R−1 = {}",
        r.value - 1.0
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 4. failure of Choi-robustness submultiplicativity under composition
// ---------------------------------------------------------------------------

fn c04_composition_counterexample() -> CheckResult {
    let e1 = channel::zoo::e1();
    let e2 = channel::zoo::e2();
    let r1 = monotones::choi_robustness(&e1).map_err(err)?.value;
    let r2 = monotones::choi_robustness(&e2).map_err(err)?.value;
    let r21 = monotones::choi_robustness(&KrausChannel::compose(&e2, &e1).map_err(err)?)
        .map_err(err)?
        .value;
    check!((r2 - 1.207).abs() <= 1e-3, "R(Φ_E2) = {r2}, want 1.207 ± 1e-3");
    check!((r21 - 1.414).abs() <= 1e-3, "R(Φ_E2∘E1) = {r21}, want 1.414 ± 1e-3");
    check!(
        r21 > r1 * r2,
        "no violation: R(Φ_E2∘E1) = {r21} ≤ {r1}·{r2} = {}",
        r1 * r2
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 5. conditional-Hadamard channel: free for R*, cost 2 for Clifford+reset
// ---------------------------------------------------------------------------

fn c05_conditional_hadamard() -> CheckResult {
    let lh = channel::hadamard_conditional();
    let rstar = monotones::channel_robustness(&lh).map_err(err)?.value;
    check!((rstar - 1.0).abs() <= 1e-7, "R*(Λ_H) = {rstar}, want 1 ± 1e-7");
    let rcpr = monotones::r_cpr(&lh, false).map_err(err)?.value;
    check!((rcpr - 2.0).abs() <= 1e-6, "R_CPR(Λ_H) = {rcpr}, want 2 ± 1e-6");
    let (sp, _) = monotones::is_completely_stabiliser_preserving(&lh).map_err(err)?;
    check!(sp, "Λ_H not recognised as completely stabiliser preserving");
    Ok(())
}

// ---------------------------------------------------------------------------
// 6. capacity of the T-basis measurement needs an entangled input
// ---------------------------------------------------------------------------

fn c06_measure_t_capacity() -> CheckResult {
    let et = channel::measure_t();
    let cap = monotones::magic_capacity(&et).map_err(err)?;
    let sqrt2 = 2f64.sqrt();
    check!(
        (cap.value - sqrt2).abs() <= 1e-6,
        "C(E_T) = {}, want √2 ± 1e-6",
        cap.value
    );
    let nf = fattal::fattal_normal_form(&cap.argmax_state, &[0]).map_err(err)?;
    check!(
        !nf.pairs.is_empty(),
        "capacity argmax input is a product state across the 0|1 cut"
    );
    // Unentangled (single-qubit) inputs never leave the stabiliser polytope.
    let cat1 = monotones::shared_catalog(1).map_err(err)?;
    let mut max1 = 0.0f64;
    for i in 0..cat1.num_states() {
        let v = cat1.state(i).to_dense().map_err(err)?;
        let out = et.apply(&outer(&v, &v));
        max1 = max1.max(monotones::robustness_of_magic(&out).map_err(err)?.value);
    }
    check!(
        (max1 - 1.0).abs() <= 1e-7,
        "max single-qubit-input robustness = {max1}, want 1 ± 1e-7"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 7. R(Φ) = C = R* for third-level diagonal gates
// ---------------------------------------------------------------------------

fn c07_diagonal_equality() -> CheckResult {
    let cases: Vec<(&str, KrausChannel)> = vec![
        ("T", channel::t_gate()),
        ("CZ", channel::multicontrol_phase(0, 2).map_err(err)?),
        ("CCZ", channel::multicontrol_phase(0, 3).map_err(err)?),
        ("CS", channel::multicontrol_phase(1, 2).map_err(err)?),
    ];
    for (name, ch) in &cases {
        let rphi = monotones::choi_robustness(ch).map_err(err)?.value;
        let cap = monotones::magic_capacity(ch).map_err(err)?.value;
        let rstar = monotones::channel_robustness(ch).map_err(err)?.value;
        check!(
            (rphi - cap).abs() <= 1e-5 && (cap - rstar).abs() <= 1e-5,
            "{name}: R(Φ)={rphi:.7} C={cap:.7} R*={rstar:.7} not equal within 1e-5"
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 8. multicontrol phase-gate ladder and capacity plateau
// ---------------------------------------------------------------------------

fn c08_multicontrol_ladder() -> CheckResult {
    let expected = [1.414f64, 1.849, 2.195, 2.264];
    for (k, &want) in (1..=4).zip(&expected) {
        let ch = channel::multicontrol_phase(2, k).map_err(err)?;
        let r = monotones::robustness_of_magic(&ch.on_plus()).map_err(err)?.value;
        check!((r - want).abs() <= 1e-3, "k={k}: R = {r:.6}, want {want} ± 1e-3");
    }
    let m24 = channel::multicontrol_phase(2, 4).map_err(err)?;
    let cap = monotones::magic_capacity(&m24).map_err(err)?.value;
    check!((cap - 2.264).abs() <= 1e-3, "C(M_2,4) = {cap:.6}, want 2.264 ± 1e-3");
    if extended() {
        let m25 = channel::multicontrol_phase(2, 5).map_err(err)?;
        let r5 = monotones::robustness_of_magic(&m25.on_plus()).map_err(err)?.value;
        check!((r5 - 2.195).abs() <= 1e-3, "k=5: R = {r5:.6}, want 2.195 ± 1e-3");
        let cap5 = monotones::magic_capacity(&m25).map_err(err)?.value;
        let rstar5 = monotones::channel_robustness(&m25).map_err(err)?.value;
        check!(
            cap5 < rstar5 - 1e-5,
            "n=5: C = {cap5:.6} not strictly below R* = {rstar5:.6}"
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 9. sandwich and structural properties on random channels
// ---------------------------------------------------------------------------

fn mix(a: &KrausChannel, b: &KrausChannel, lambda: f64) -> KrausChannel {
    let mut kraus = Vec::new();
    for k in &a.kraus {
        kraus.push(k.mapv(|z| z * lambda.sqrt()));
    }
    for k in &b.kraus {
        kraus.push(k.mapv(|z| z * (1.0 - lambda).sqrt()));
    }
    KrausChannel::new(a.n, kraus).unwrap()
}

fn c09_property_suite() -> CheckResult {
    let t0 = Instant::now();
    let eps = 1e-6;
    let mut rng = StdRng::seed_from_u64(0xACCE97);
    let mut pool: Vec<KrausChannel> = Vec::new();
    for i in 0..200 {
        let ch = channel::random_channel(&mut rng, 1, 2);
        let rphi = monotones::choi_robustness(&ch).map_err(err)?.value;
        let cap = monotones::magic_capacity(&ch).map_err(err)?.value;
        let rstar = monotones::channel_robustness(&ch).map_err(err)?.value;
        check!(
            rphi - eps <= cap && cap <= rstar + eps,
            "channel {i}: sandwich violated — R(Φ)={rphi:.8} C={cap:.8} R*={rstar:.8}"
        );
        if pool.len() < 20 {
            pool.push(ch);
        }
    }

    // Monotonicity under Clifford pre/post-processing.
    let cliffords = [vec![("h", 0usize)], vec![("s", 0)], vec![("h", 0), ("s", 0)]];
    for (i, ch) in pool.iter().take(10).enumerate() {
        let rstar = monotones::channel_robustness(ch).map_err(err)?.value;
        let gates = &cliffords[i % cliffords.len()];
        let gate_list: Vec<magicsim::tableau::Gate> = gates
            .iter()
            .map(|&(g, q)| match g {
                "h" => magicsim::tableau::Gate::H(q),
                _ => magicsim::tableau::Gate::S(q),
            })
            .collect();
        let cl = channel::clifford_unitary(&gate_list, 1).map_err(err)?;
        let post = monotones::channel_robustness(&KrausChannel::compose(&cl, ch).map_err(err)?)
            .map_err(err)?
            .value;
        let pre = monotones::channel_robustness(&KrausChannel::compose(ch, &cl).map_err(err)?)
            .map_err(err)?
            .value;
        check!(
            post <= rstar + eps && pre <= rstar + eps,
            "channel {i}: Clifford composition raised R* ({rstar:.8} → post {post:.8} / pre {pre:.8})"
        );
    }

    // Convexity of all three measures on two-channel mixtures.
    for i in 0..5 {
        let (a, b) = (&pool[2 * i], &pool[2 * i + 1]);
        let m = mix(a, b, 0.5);
        for (name, f) in [
            ("R(Φ)", &(|c: &KrausChannel| {
                monotones::choi_robustness(c).map(|r| r.value)
            }) as &dyn Fn(&KrausChannel) -> magicsim::Result<f64>),
            ("C", &|c: &KrausChannel| monotones::magic_capacity(c).map(|r| r.value)),
            ("R*", &|c: &KrausChannel| {
                monotones::channel_robustness(c).map(|r| r.value)
            }),
        ] {
            let va = f(a).map_err(err)?;
            let vb = f(b).map_err(err)?;
            let vm = f(&m).map_err(err)?;
            check!(
                vm <= 0.5 * va + 0.5 * vb + eps,
                "mixture {i}: {name} not convex ({vm:.8} > avg of {va:.8}, {vb:.8})"
            );
        }
    }

    // Submultiplicativity of R* and C under composition.
    for i in 0..10 {
        let (a, b) = (&pool[i], &pool[(i + 7) % pool.len()]);
        let comp = KrausChannel::compose(b, a).map_err(err)?;
        let rs = monotones::channel_robustness(&comp).map_err(err)?.value;
        let ra = monotones::channel_robustness(a).map_err(err)?.value;
        let rb = monotones::channel_robustness(b).map_err(err)?.value;
        check!(
            rs <= ra * rb + eps,
            "pair {i}: R*(b∘a) = {rs:.8} > {ra:.8}·{rb:.8}"
        );
        let cs = monotones::magic_capacity(&comp).map_err(err)?.value;
        let ca = monotones::magic_capacity(a).map_err(err)?.value;
        let cb = monotones::magic_capacity(b).map_err(err)?.value;
        check!(cs <= ca * cb + eps, "pair {i}: C(b∘a) = {cs:.8} > {ca:.8}·{cb:.8}");
    }

    // Identity invariance: padding with an idle qubit leaves R* unchanged.
    for (name, ch) in [
        ("T", channel::t_gate()),
        ("random", pool[3].clone()),
    ] {
        let rstar = monotones::channel_robustness(&ch).map_err(err)?.value;
        let padded = KrausChannel::tensor(&ch, &KrausChannel::identity(1)).map_err(err)?;
        let rstar2 = monotones::channel_robustness(&padded).map_err(err)?.value;
        check!(
            (rstar - rstar2).abs() <= eps,
            "{name}: R*(E⊗1) = {rstar2:.8} ≠ R*(E) = {rstar:.8}"
        );
    }

    let dt = t0.elapsed();
    check!(dt.as_secs() < 900, "property suite took {dt:?} (limit 15 min)");
    Ok(())
}

// ---------------------------------------------------------------------------
// 10. simulator statistical correctness on a 3-element circuit
// ---------------------------------------------------------------------------

const TEST_CIRCUIT: &str = r#"{
  "n": 1,
  "elements": [
    {"channel": {"kind": "named", "name": "clifford_unitary", "n": 1,
                 "params": {"gates": [["h", 0]]}}, "qubits": [0]},
    {"channel": {"kind": "named", "name": "t_gate"}, "qubits": [0]},
    {"channel": {"kind": "named", "name": "amplitude_damping",
                 "params": {"p": 0.2}}, "qubits": [0]}
  ],
  "observable": "Z"
}"#;

fn c10_simulator_correctness() -> CheckResult {
    let circuit = sim::CircuitSpec::from_json(TEST_CIRCUIT).map_err(err)?;
    let oracle = sim::exact_expectation(&circuit).map_err(err)?;
    let decomps = sim::precompute_static(&circuit).map_err(err)?;
    let l1 = sim::static_l1_total(&decomps);
    let mut product = 1.0f64;
    for el in &circuit.elements {
        product *= monotones::channel_robustness(&el.channel).map_err(err)?.value;
    }
    check!(
        (l1 - product).abs() <= 1e-6,
        "ℓ1 forecast {l1:.8} ≠ ∏R* = {product:.8}"
    );
    let n = sim::required_samples(l1, 0.1, 0.05).map_err(err)?;
    let mut static_hits = 0;
    let mut dynamic_hits = 0;
    for seed in 0..20u64 {
        let s = sim::static_simulate(&circuit, &decomps, n, seed).map_err(err)?;
        if (s.estimate - oracle).abs() <= 0.1 {
            static_hits += 1;
        }
        let (d, _) = sim::dynamic_simulate(&circuit, n, seed).map_err(err)?;
        if (d.estimate - oracle).abs() <= 0.1 {
            dynamic_hits += 1;
        }
    }
    check!(
        static_hits >= 19,
        "static: only {static_hits}/20 seeds within δ=0.1 of oracle {oracle:.6}"
    );
    check!(
        dynamic_hits >= 19,
        "dynamic: only {dynamic_hits}/20 seeds within δ=0.1 of oracle {oracle:.6}"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 11. exponential separation: free circuit vs Clifford+reset forecast
// ---------------------------------------------------------------------------

fn c11_exponential_separation() -> CheckResult {
    let mut elements = String::new();
    for i in 0..10 {
        if i > 0 {
            elements.push(',');
        }
        elements.push_str(
            r#"{"channel": {"kind": "named", "name": "hadamard_conditional"}, "qubits": [0]}"#,
        );
    }
    let json = format!(r#"{{"n": 1, "elements": [{elements}], "observable": "Z"}}"#);
    let circuit = sim::CircuitSpec::from_json(&json).map_err(err)?;
    let t0 = Instant::now();
    let decomps = sim::precompute_static(&circuit).map_err(err)?;
    let l1 = sim::static_l1_total(&decomps);
    check!(l1 == 1.0, "ℓ1 = {l1}, want exactly 1");
    let n = sim::required_samples(l1, 0.1, 0.05).map_err(err)?;
    let res = sim::static_simulate(&circuit, &decomps, n, 0).map_err(err)?;
    let dt = t0.elapsed();
    check!(
        res.estimate == 1.0 && res.stderr == 0.0,
        "expected exact zero-variance estimate 1.0, got {} ± {}",
        res.estimate,
        res.stderr
    );
    check!(dt.as_millis() < 1000, "free circuit took {dt:?} (limit 1 s)");
    let rcpr = monotones::r_cpr(&channel::hadamard_conditional(), false)
        .map_err(err)?
        .value;
    let forecast = rcpr.powi(10).powi(2);
    check!(
        (forecast / 4f64.powi(10) - 1.0).abs() <= 1e-6,
        "Clifford+reset sample forecast scaling {forecast:.3e} ≠ 4^10"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 12. amplitude damping vs X-rotation ordering (frozen baselines)
// ---------------------------------------------------------------------------

fn c12_amplitude_damping_ordering() -> CheckResult {
    let u = channel::x_rotation(std::f64::consts::FRAC_PI_8);
    let lam = channel::amplitude_damping(0.1).map_err(err)?;
    // "after": noise applied after the rotation (Λ∘U); "before": U∘Λ.
    let after = KrausChannel::compose(&lam, &u).map_err(err)?;
    let before = KrausChannel::compose(&u, &lam).map_err(err)?;

    let rstar_after = monotones::channel_robustness(&after).map_err(err)?.value;
    let rstar_before = monotones::channel_robustness(&before).map_err(err)?.value;
    let rcpr_after = monotones::r_cpr(&after, false).map_err(err)?.value;
    let rcpr_before = monotones::r_cpr(&before, false).map_err(err)?.value;
    let cap_after = monotones::magic_capacity(&after).map_err(err)?.value;
    let cap_before = monotones::magic_capacity(&before).map_err(err)?.value;
    let rphi_before = monotones::choi_robustness(&before).map_err(err)?.value;

    check!(
        rstar_before < rstar_after && rstar_after <= rcpr_after + 1e-9,
        "ordering violated: R*(U∘Λ)={rstar_before:.6} R*(Λ∘U)={rstar_after:.6} R_CPR(Λ∘U)={rcpr_after:.6}"
    );
    check!(
        rcpr_before > rstar_before,
        "R_CPR(U∘Λ)={rcpr_before:.6} not above R*(U∘Λ)={rstar_before:.6}"
    );
    // Frozen regression baselines (first verified run).
    let baselines = [
        ("R*(Λ∘U)", rstar_after, 1.441641),
        ("R*(U∘Λ)", rstar_before, 1.414214),
        ("R_CPR(Λ∘U)", rcpr_after, 1.441641),
        ("R_CPR(U∘Λ)", rcpr_before, 1.483062),
        ("C(Λ∘U)", cap_after, 1.441641),
        ("C(U∘Λ)", cap_before, 1.414214),
        ("R(Φ_{U∘Λ})", rphi_before, 1.377927),
    ];
    for (name, got, want) in baselines {
        check!(
            (got - want).abs() <= 1e-4,
            "{name} = {got:.6} drifted from frozen baseline {want}"
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 13. strict submultiplicativity of normalised channel robustness
// ---------------------------------------------------------------------------

fn c13_regularised_submultiplicativity() -> CheckResult {
    let u = channel::z_rotation(std::f64::consts::FRAC_PI_8);
    let r1 = monotones::channel_robustness(&u).map_err(err)?.value;
    let uu = KrausChannel::tensor(&u, &u).map_err(err)?;
    let r2 = monotones::channel_robustness(&uu).map_err(err)?.value;
    let normalised = r2.sqrt();
    check!(
        normalised <= r1 - 1e-4,
        "[R*(U⊗U)]^1/2 = {normalised:.6} not strictly below R*(U) = {r1:.6}"
    );
    // Frozen regression baselines (first verified run).
    check!((r1 - 1.414214).abs() <= 1e-4, "R*(U) = {r1:.6} drifted from 1.414214");
    check!(
        (normalised - 1.321948).abs() <= 1e-4,
        "[R*(U⊗U)]^1/2 = {normalised:.6} drifted from 1.321948"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// 14. byte-identical CLI output across reruns and worker counts
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_magicsim"))
        .args(args)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!(
            "{:?} failed ({}): {}",
            args,
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn c14_cli_determinism() -> CheckResult {
    let dir = std::env::temp_dir().join("magicsim-acceptance");
    std::fs::create_dir_all(&dir).map_err(err)?;
    let ch_path = dir.join("t.json");
    std::fs::write(&ch_path, r#"{"kind": "named", "name": "t_gate"}"#).map_err(err)?;
    let circ_path = dir.join("circ.json");
    std::fs::write(&circ_path, TEST_CIRCUIT).map_err(err)?;
    let ch = ch_path.to_str().unwrap();
    let circ = circ_path.to_str().unwrap();

    let mono = ["monotone", "--channel", ch, "--measure", "rstar"];
    let m1 = run_cli(&[&mono[..], &["--jobs", "1"]].concat())?;
    let m2 = run_cli(&[&mono[..], &["--jobs", "2"]].concat())?;
    let m1b = run_cli(&[&mono[..], &["--jobs", "1"]].concat())?;
    check!(m1 == m2, "monotone output differs between --jobs 1 and --jobs 2");
    check!(m1 == m1b, "monotone output differs between reruns");

    let simc = [
        "simulate", "--circuit", circ, "--method", "static", "--samples", "400", "--seed", "7",
    ];
    let s1 = run_cli(&[&simc[..], &["--jobs", "1"]].concat())?;
    let s2 = run_cli(&[&simc[..], &["--jobs", "2"]].concat())?;
    let s1b = run_cli(&[&simc[..], &["--jobs", "1"]].concat())?;
    check!(s1 == s2, "simulate output differs between --jobs 1 and --jobs 2");
    check!(s1 == s1b, "simulate output differs between reruns");
    Ok(())
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance() {
    let criteria: Vec<(&str, Box<dyn Fn() -> CheckResult>)> = vec![
        ("stabiliser state counts", Box::new(c01_state_counts)),
        ("affine subspace counts", Box::new(c02_affine_counts)),
        ("T-state robustness and witness", Box::new(c03_t_state_robustness)),
        ("composition counterexample", Box::new(c04_composition_counterexample)),
        ("conditional-Hadamard monotones", Box::new(c05_conditional_hadamard)),
        ("T-measurement capacity", Box::new(c06_measure_t_capacity)),
        ("diagonal-gate measure equality", Box::new(c07_diagonal_equality)),
        ("multicontrol phase ladder", Box::new(c08_multicontrol_ladder)),
        ("sandwich and property suite", Box::new(c09_property_suite)),
        ("simulator statistical correctness", Box::new(c10_simulator_correctness)),
        ("exponential separation demo", Box::new(c11_exponential_separation)),
        ("damping/rotation ordering baselines", Box::new(c12_amplitude_damping_ordering)),
        ("regularised submultiplicativity", Box::new(c13_regularised_submultiplicativity)),
        ("CLI determinism", Box::new(c14_cli_determinism)),
    ];

    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let dt = t0.elapsed();
        match outcome {
            Ok(()) => println!("criterion {:2}: pass — {name} ({dt:.2?})", i + 1),
            Err(msg) => {
                println!("criterion {:2}: FAIL — {name} ({dt:.2?}): {msg}", i + 1);
                failures.push(format!("criterion {}: {msg}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "{} criteria failed:\n{}", failures.len(), failures.join("\n"));
}
