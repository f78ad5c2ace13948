//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlmeas::experiments::{
    preset, run_hardy_signaling, run_product_rule, run_reliability, ExperimentParams,
};
use nlmeas::protocol::{
    flipped_pointer, measure_nonlocal, modular_sum_check, prepare_pointer, projective_oracle,
    run_protocol, CouplingSpec, ReadoutPhase, Sign,
};
use nlmeas::qstate::{SpinAxis, SystemState};
use nlmeas::random;
use nlmeas::sampler::{compare_counts, Distribution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol
}

fn exact_params() -> ExperimentParams {
    ExperimentParams {
        sample: false,
        ..ExperimentParams::default()
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let note = format!("{:.3}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    match result {
        Ok(d) if elapsed < limit => Ok(format!("{d}; {note}")),
        Ok(d) => Err(format!("{d}; too slow: {note}")),
        Err(d) => Err(format!("{d}; {note}")),
    }
}

fn reliability_exact() -> Outcome {
    timed(Duration::from_secs(1), || {
        let r = run_reliability(&exact_params()).map_err(|e| e.to_string())?;
        let p = |s: &str, l: &str| {
            r.section(s)
                .and_then(|s| s.value("outcome", l))
                .unwrap_or(f64::NAN)
        };
        let values = [
            (p("psi1", "+1"), 1.0),
            (p("psi2", "-1"), 1.0),
            (p("psi3", "+1"), 0.7),
            (p("psi3", "-1"), 0.3),
        ];
        check(
            values.iter().all(|&(a, e)| within(a, e, 1e-10)),
            format!(
                "psi1 P(+1)={} psi2 P(-1)={} psi3 P(+1)={} P(-1)={}",
                values[0].0, values[1].0, values[2].0, values[3].0
            ),
        )
    })
}

fn reliability_sampled() -> Outcome {
    timed(Duration::from_secs(5), || {
        let params = ExperimentParams::default();
        let r = run_reliability(&params).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for s in &r.sections {
            let exact: Vec<f64> = s
                .block("ports")
                .unwrap()
                .entries
                .iter()
                .map(|q| q.value)
                .collect();
            let table = s.table("ports").unwrap();
            for (p, &n) in exact.iter().zip(table.counts()) {
                if *p < 1e-14 && n != 0 {
                    return Err(format!("{}: impossible port has {n} counts", s.label));
                }
            }
            let dist =
                Distribution::new(table.labels().to_vec(), exact).map_err(|e| e.to_string())?;
            let cmp = compare_counts(table, &dist).map_err(|e| e.to_string())?;
            worst = worst.max(cmp.max_abs_z);
        }
        check(
            worst <= 4.0,
            format!("{} shots per state, max |z| = {worst:.3}", params.shots),
        )
    })
}

/// Random joint eigenstate of a random axis pair with a random eigenvalue.
fn random_eigen(rng: &mut ChaCha8Rng) -> (SystemState, CouplingSpec, Sign) {
    let (a, b) = (random::axis(rng), random::axis(rng));
    let sign = if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    };
    (
        random::product_eigenstate(rng, &a, &b, sign),
        CouplingSpec::nonlocal(a, b),
        sign,
    )
}

fn nondemolition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_fid, mut worst_pur) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (state, spec, sign) = random_eigen(&mut rng);
        let run = run_protocol(&state, &spec, ReadoutPhase::default());
        let post = run
            .result
            .branch(sign)
            .post_system
            .as_ref()
            .ok_or("eigenvalue branch missing")?;
        worst_fid = worst_fid.max((post.fidelity(&state) - 1.0).abs());
        worst_pur = worst_pur.max((run.pre_readout_purity() - 1.0).abs());
    }
    check(
        worst_fid <= 1e-10 && worst_pur <= 1e-10,
        format!("200 eigenstates: max |1-F| = {worst_fid:.2e}, max |1-purity| = {worst_pur:.2e}"),
    )
}

fn pointer_mapping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut seen = [0usize; 2];
    for _ in 0..200 {
        let (state, spec, sign) = random_eigen(&mut rng);
        let run = run_protocol(&state, &spec, ReadoutPhase::default());
        let pointer = run.coupled.pointer_factor().map_err(|e| e.to_string())?;
        let target = match sign {
            Sign::Plus => prepare_pointer(),
            Sign::Minus => flipped_pointer(),
        };
        seen[(sign == Sign::Minus) as usize] += 1;
        worst = worst.max((pointer.fidelity(&target) - 1.0).abs());
    }
    check(
        worst <= 1e-12 && seen.iter().all(|&n| n > 0),
        format!(
            "{} (+1 -> Psi+) and {} (-1 -> Psi-) cases, max |1-F| = {worst:.2e}",
            seen[0], seen[1]
        ),
    )
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `⟨post|P±|singlet⟩` with `P± = (1 ± σ_x⊗σ_y)/2` written out by hand.
fn product_rule_oracle() -> (f64, f64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)];
    let sx = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
    let sy = [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
    let up_y = [c(h, 0.0), c(0.0, h)];
    let up_x = [c(h, 0.0), c(h, 0.0)];
    let post: Vec<Complex64> = (0..4).map(|i| up_y[i >> 1] * up_x[i & 1]).collect();
    let branch = |sign: f64| -> f64 {
        let projected: Vec<Complex64> = (0..4)
            .map(|r| {
                let o: Complex64 = (0..4)
                    .map(|k| sx[r >> 1][k >> 1] * sy[r & 1][k & 1] * singlet[k])
                    .sum();
                (singlet[r] + o * sign) * 0.5
            })
            .collect();
        post.iter()
            .zip(&projected)
            .map(|(p, v)| p.conj() * v)
            .sum::<Complex64>()
            .norm_sqr()
    };
    (branch(1.0), branch(-1.0))
}

fn product_rule() -> Outcome {
    let post = preset("up_y_up_x").map_err(|e| e.to_string())?;
    let r = run_product_rule(&exact_params(), &post).map_err(|e| e.to_string())?;
    let (oracle_plus, oracle_minus) = product_rule_oracle();
    let mut notes = Vec::new();
    let mut ok = true;
    for label in ["a", "b", "c"] {
        let s = r.section(label).ok_or("missing section")?;
        let cond = s.value("conditional", "-1").unwrap_or(f64::NAN);
        let accepted = s.postselection.map(|p| p.probability).unwrap_or(f64::NAN);
        ok &= within(cond, 1.0, 1e-12) && within(accepted, 0.25, 1e-10);
        notes.push(format!("{label}: P(-1|post)={cond} P(post)={accepted}"));
    }
    let a = r.section("a").unwrap();
    let joint_plus = a.value("joint", "+1").unwrap_or(f64::NAN);
    let joint_minus = a.value("joint", "-1").unwrap_or(f64::NAN);
    ok &= joint_plus < 1e-14 && oracle_plus < 1e-14;
    ok &= within(joint_minus, oracle_minus, 1e-10) && within(oracle_minus, 0.25, 1e-10);
    notes.push(format!(
        "+1&post={joint_plus:.1e} (oracle {oracle_plus:.1e})"
    ));
    check(ok, notes.join(", "))
}

fn hardy() -> Outcome {
    let r = run_hardy_signaling(&exact_params()).map_err(|e| e.to_string())?;
    let found = |s: &str| {
        r.section(s)
            .and_then(|s| s.value("bob", "found"))
            .unwrap_or(f64::NAN)
    };
    let (zero, one) = (found("alice_0"), found("alice_1"));
    check(
        within(zero, 1.0, 1e-12) && within(one, 0.5, 1e-12),
        format!("Bob re-finds his state: Alice |0> -> {zero}, Alice |1> -> {one}"),
    )
}

fn oracle_equivalence() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut worst_p, mut worst_f) = (0.0f64, 0.0f64);
        for _ in 0..1000 {
            let state: SystemState = random::ket(&mut rng);
            let spec = CouplingSpec::nonlocal(random::axis(&mut rng), random::axis(&mut rng));
            let pointer = measure_nonlocal(&state, &spec, ReadoutPhase::default())
                .map_err(|e| e.to_string())?;
            let oracle = projective_oracle(&state, &spec).map_err(|e| e.to_string())?;
            for sign in Sign::BOTH {
                let (p, o) = (pointer.branch(sign), oracle.branch(sign));
                worst_p = worst_p.max((p.probability - o.probability).abs());
                if let (Some(a), Some(b)) = (&p.post_system, &o.post_system) {
                    worst_f = worst_f.max((a.fidelity(b) - 1.0).abs());
                }
            }
        }
        check(
            worst_p <= 1e-10 && worst_f <= 1e-10,
            format!("1000 instances: max |dP| = {worst_p:.2e}, max |1-F| = {worst_f:.2e}"),
        )
    })
}

fn phi_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let state: SystemState = random::ket(&mut rng);
        let spec = CouplingSpec::nonlocal(random::axis(&mut rng), random::axis(&mut rng));
        let reference = run_protocol(&state, &spec, ReadoutPhase::default()).result;
        for k in 0..17 {
            let phi = ReadoutPhase::new(std::f64::consts::TAU * k as f64 / 16.0).unwrap();
            let r = run_protocol(&state, &spec, phi).result;
            for sign in Sign::BOTH {
                worst = worst.max((r.probability(sign) - reference.probability(sign)).abs());
            }
        }
    }
    check(
        worst <= 1e-10,
        format!("50 states x 17 phases: max deviation {worst:.2e}"),
    )
}

fn modular_sum() -> Outcome {
    let rows = modular_sum_check();
    let zz = CouplingSpec::nonlocal(SpinAxis::Z, SpinAxis::Z);
    let mut ok = rows.len() == 4 && rows.iter().all(|r| r.holds());
    for (k, row) in rows.iter().enumerate() {
        let m = measure_nonlocal(&SystemState::basis(k), &zz, ReadoutPhase::default())
            .map_err(|e| e.to_string())?;
        let sign = if row.product == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        };
        ok &= within(m.probability(sign), 1.0, 1e-12);
    }
    let text: Vec<String> = rows
        .iter()
        .map(|r| format!("({},{})->{}", r.a.value(), r.b.value(), r.modular))
        .collect();
    check(ok, text.join(" "))
}

fn without_duration(json: &[u8]) -> String {
    String::from_utf8_lossy(json)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"duration_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cli_determinism() -> Outcome {
    let flags: [&[&str]; 3] = [
        &["reliability", "--shots", "20000", "--seed", "11"],
        &[
            "product-rule",
            "--shots",
            "50000",
            "--seed",
            "7",
            "--visibility",
            "0.9",
        ],
        &["nondemolition", "--shots", "5000", "--phi", "0.4"],
    ];
    for args in flags {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_nlmeas"))
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let (first, second) = (run()?, run()?);
        if !first.status.success() || !second.status.success() {
            return Err(format!("{args:?} exited with {}", first.status));
        }
        if without_duration(&first.stdout) != without_duration(&second.stdout) {
            return Err(format!("{args:?} produced different reports"));
        }
    }
    Ok(format!(
        "{} flag sets, identical JSON apart from duration_ms",
        flags.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("reliability, exact", reliability_exact),
        ("reliability, sampled", reliability_sampled),
        ("nondemolition", nondemolition),
        ("pointer Bell-state mapping", pointer_mapping),
        ("product-rule failure", product_rule),
        ("Hardy signaling", hardy),
        ("oracle equivalence", oracle_equivalence),
        ("phi invariance", phi_invariance),
        ("modular-sum identity", modular_sum),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
