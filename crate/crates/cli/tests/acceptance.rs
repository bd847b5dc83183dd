//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

use cweth_core::curve::{generator_g, Point};
use cweth_core::dhenc::{decrypt_balance, encrypt_amount, encrypt_new_sender_balance, DhBalance, DhEntry};
use cweth_core::elgamal::{aggregate, commit_balance, verify_opening, AMOUNT_LIMIT};
use cweth_core::hashing::{keccak256, poseidon2};
use cweth_core::statements::Violation;
use cweth_core::testing::{honest_reports, run_random_scenario, tamper_matrix};
use cweth_core::{Amount, Fl, Fq};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn point(x: &str, y: &str) -> Point {
    Point::new(Fq::from_str(x).unwrap(), Fq::from_str(y).unwrap()).unwrap()
}

fn big(s: &str) -> BigUint {
    s.parse().unwrap()
}

fn amount(rng: &mut ChaCha20Rng, max: u128) -> Amount {
    Amount::new(rng.gen_range(0..max)).unwrap()
}

fn nonzero(rng: &mut ChaCha20Rng) -> Fl {
    loop {
        let s = Fl::random(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

fn curve_conformance() -> Outcome {
    let start = Instant::now();
    let base8 = point(
        "5299619240641551281634865583518297030282874472190772894086521144482721001553",
        "16950150798460657717958625567821834550301663161624707787222815936182638968203",
    );
    let full = point(
        "995203441582195749578291179787384436505546430278305826713579947235728471134",
        "5472060717959818805561601436314318772137091100104008585924551046643952123905",
    );
    let p1 = point(
        "17777552123799933955779906779655732241715742912184938656739573121738514868268",
        "2626589144620713026669568689430873010625803728049924121243784502389097019475",
    );
    let l = big("2736030358979909402780800718157159386076813972158567259200215660948447373041");

    let mut failures = Vec::new();
    if generator_g() != base8 {
        failures.push("generator");
    }
    if Fl::modulus() != l || !base8.mul_uint(&l).is_identity() || full.mul_uint(&l).is_identity() {
        failures.push("subgroup order");
    }
    let vectors = [
        (p1, big("1"), p1),
        (
            p1,
            big("2"),
            point(
                "6890855772600357754907169075114257697580319025794532037257385534741338397365",
                "4338620300185947561074059802482547481416142213883829469920100239455078257889",
            ),
        ),
        (
            p1,
            big("14035240266687799601661095864649209771790948434046947201833777492504781204499"),
            point(
                "17070357974431721403481313912716834497662307308519659060910483826664480189605",
                "4014745322800118607127020275658861516666525056516280575712425373174125159339",
            ),
        ),
        (full, big("8"), base8),
        (base8, l.clone(), Point::IDENTITY),
    ];
    let matched = vectors.iter().filter(|(p, k, want)| p.mul_uint(k) == *want).count();
    if matched != vectors.len() {
        failures.push("scalar multiplication");
    }
    let (fast, time) = within(Duration::from_secs(5), start);
    outcome(
        failures.is_empty() && fast,
        format!("{matched}/{} scalar vectors, failures {failures:?}, {time}", vectors.len()),
    )
}

fn homomorphism() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x4801);
    let mut bad = 0;
    for _ in 0..1000 {
        let pk = generator_g().scalar_mul(&nonzero(&mut rng));
        let (b1, b2) = (amount(&mut rng, AMOUNT_LIMIT / 2), amount(&mut rng, AMOUNT_LIMIT / 2));
        let (r1, r2) = (Fl::random(&mut rng), Fl::random(&mut rng));
        let lhs = aggregate(&commit_balance(b1, &r1, &pk), &commit_balance(b2, &r2, &pk));
        let rhs = commit_balance(b1.checked_add(b2).unwrap(), &(r1 + r2), &pk);
        bad += usize::from(lhs != rhs);
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    outcome(bad == 0 && fast, format!("1000 cases, {bad} mismatches, {time}"))
}

fn opening_identity() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0x0931);
    let (mut false_rejects, mut false_accepts) = (0, 0);
    for _ in 0..1000 {
        let sk = nonzero(&mut rng);
        let pk = generator_g().scalar_mul(&sk);
        let b = amount(&mut rng, AMOUNT_LIMIT);
        let c = commit_balance(b, &Fl::random(&mut rng), &pk);
        false_rejects += usize::from(!verify_opening(&c, b, &sk));
        let delta = rng.gen_range(1..AMOUNT_LIMIT);
        let perturbed = Amount::new((b.value() + delta) % AMOUNT_LIMIT).unwrap();
        false_accepts += usize::from(verify_opening(&c, perturbed, &sk));
    }
    outcome(
        false_rejects == 0 && false_accepts == 0,
        format!("1000 round trips, 1000 perturbed; {false_rejects} false rejects, {false_accepts} false accepts"),
    )
}

fn dh_round_trip() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0xd4);
    let mut bad = 0;
    let mut max_entries = 0;
    for i in 0..1000 {
        let sk = nonzero(&mut rng);
        let pk = generator_g().scalar_mul(&sk);
        let start = amount(&mut rng, 1 << 80);
        let n0 = Fq::random(&mut rng);
        let mut bal = DhBalance::reset(encrypt_new_sender_balance(start, Amount::ZERO, &sk, n0).unwrap(), pk, n0);
        let mut sum = start.value();
        // Cover the upper bound explicitly.
        let senders = if i % 100 == 0 { 49 } else { rng.gen_range(0..=49) };
        for _ in 0..senders {
            let sk_s = nonzero(&mut rng);
            let a = amount(&mut rng, 1 << 80);
            let n = Fq::random(&mut rng);
            bal.credit(
                encrypt_amount(a, &sk_s, &pk, n).unwrap(),
                DhEntry { sender_pk: generator_g().scalar_mul(&sk_s), nonce: n },
            );
            sum += a.value();
        }
        max_entries = max_entries.max(bal.entries.len());
        bad += usize::from(decrypt_balance(&sk, &bal).map(|v| v.value()) != Ok(sum));
    }
    outcome(
        bad == 0 && max_entries == 50,
        format!("1000 cycles, up to {max_entries} entries, {bad} mismatches"),
    )
}

fn tamper() -> Outcome {
    let required = [
        "K1", "K2", "K3", "K4", "K5", "T1", "T2", "T3", "T4", "T5", "T6", "W1", "W2", "W3", "W4",
    ];
    let honest_ok = honest_reports(0x7a).iter().all(|r| r.accepted && r.violations.is_empty());
    let cases = tamper_matrix(0x7a);
    let isolated: Vec<&Violation> = cases
        .iter()
        .filter(|c| !c.report.accepted && c.report.violations == vec![c.target])
        .map(|c| &c.target)
        .collect();
    let covered = required
        .iter()
        .all(|k| isolated.iter().any(|v| v.constraint() == *k));
    let stray: Vec<&str> = cases
        .iter()
        .filter(|c| c.report.violations != vec![c.target])
        .map(|c| c.target.code())
        .collect();
    outcome(
        honest_ok && covered && stray.is_empty(),
        format!(
            "{} targeted tampers over {} constraints, stray {stray:?}, honest accepted {honest_ok}",
            cases.len(),
            required.len()
        ),
    )
}

fn ledger_oracle(report: &cweth_core::testing::ScenarioReport, elapsed: Duration) -> Outcome {
    let clean = report.unexpected_errors.is_empty()
        && report.decrypt_mismatches == 0
        && report.opening_failures == 0
        && report.conservation_failures == 0
        && report.rejection_safety_failures == 0
        && report.ops == 200;
    outcome(
        clean && elapsed < Duration::from_secs(120),
        format!(
            "{} ops ({} deposit, {} transfer, {} withdraw, {} rollover), decrypt {} / opening {} / conservation {} failures, {} rejection probes, {:.2}s of 120s",
            report.ops,
            report.deposits,
            report.transfers,
            report.withdrawals,
            report.rollovers,
            report.decrypt_mismatches,
            report.opening_failures,
            report.conservation_failures,
            report.rejection_probes,
            elapsed.as_secs_f64()
        ),
    )
}

fn sender_reset(report: &cweth_core::testing::ScenarioReport) -> Outcome {
    outcome(
        report.spend_ops > 0 && report.reset_violations == 0,
        format!("{} spend ops, {} with more than one entry", report.spend_ops, report.reset_violations),
    )
}

fn run_script(script: &Path, state: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cweth"))
        .arg("--state")
        .arg(state)
        .arg("run")
        .arg(script)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stdout).into_owned());
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["initial_deposit.json", "confidential_transfer.json"] {
        let script = scenarios.join(name);
        let (s1, s2) = (dir.path().join(format!("1-{name}")), dir.path().join(format!("2-{name}")));
        match (run_script(&script, &s1), run_script(&script, &s2)) {
            (Ok(r1), Ok(r2)) => {
                let same = std::fs::read(&s1).unwrap() == std::fs::read(&s2).unwrap() && r1 == r2;
                let report: Value = serde_json::from_slice(&r1).unwrap();
                pass &= same && report["passed"] == true;
                details.push(format!("{name}: identical {same}, assertions passed {}", report["passed"]));
            }
            (a, b) => {
                pass = false;
                details.push(format!("{name}: {:?}", a.err().or(b.err())));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn hex_bytes(v: &Value) -> Vec<u8> {
    hex::decode(v.as_str().unwrap().trim_start_matches("0x")).unwrap()
}

fn known_answers() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let load = |name: &str| -> Vec<Value> {
        serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
    };
    let fq = |v: &Value| Fq::from_str(v.as_str().unwrap()).unwrap();
    let poseidon = load("poseidon_kat.json");
    let keccak = load("keccak_kat.json");
    let p_ok = poseidon
        .iter()
        .filter(|c| poseidon2(fq(&c["a"]), fq(&c["b"])) == fq(&c["out"]))
        .count();
    let k_ok = keccak
        .iter()
        .filter(|c| keccak256(&hex_bytes(&c["input"])).as_bytes().to_vec() == hex_bytes(&c["digest"]))
        .count();
    outcome(
        p_ok == poseidon.len() && k_ok == keccak.len() && p_ok >= 5 && k_ok >= 5,
        format!("poseidon {p_ok}/{}, keccak {k_ok}/{}", poseidon.len(), keccak.len()),
    )
}

fn main() {
    let mut results: Vec<(u8, &str, Outcome)> = vec![
        (1, "curve conformance", curve_conformance()),
        (2, "commitment homomorphism", homomorphism()),
        (3, "opening identity", opening_identity()),
        (4, "DH round trip", dh_round_trip()),
        (5, "verifier tamper matrix", tamper()),
    ];
    let start = Instant::now();
    let scenario = run_random_scenario(0x6c6564676572, 5, 200);
    let elapsed = start.elapsed();
    results.push((6, "ledger/oracle equivalence", ledger_oracle(&scenario, elapsed)));
    results.push((7, "sender reset", sender_reset(&scenario)));
    results.push((8, "determinism", determinism()));
    results.push((9, "known-answer files", known_answers()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} [{n}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
