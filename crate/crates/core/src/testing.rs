//! Test support: a cleartext mirror of the ledger, a seeded random
//! scenario driver, and a per-constraint tamper matrix for the verifier.
//!
//! Compiled only for tests or with the `test-support` feature.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::curve::{generator_g, Fl, Fq, Point};
use crate::dhenc::encrypt_value;
use crate::elgamal::{commit_scalar, commit_scalar_sender, verify_opening, Amount, AMOUNT_LIMIT};
use crate::hashing::keccak256;
use crate::kdf::{derive_keypair, EthAddress, KeyPair, TestSigner};
use crate::ledger::{build_deposit, build_transfer, build_withdraw, LedgerError, LedgerState};
use crate::statements::{
    verify_deposit, verify_transfer, verify_withdraw, DepositStatement, DepositWitness,
    TransferStatement, TransferWitness, VerificationReport, Violation, WithdrawStatement,
    WithdrawWitness,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleBalance {
    pub pending: u128,
    pub actual: u128,
}

/// Mirrors every accepted transition in cleartext.
#[derive(Debug, Clone, Default)]
pub struct PlaintextOracle {
    pub balances: BTreeMap<EthAddress, OracleBalance>,
}

impl PlaintextOracle {
    pub fn get(&self, addr: &EthAddress) -> OracleBalance {
        self.balances.get(addr).copied().unwrap_or_default()
    }

    pub fn deposit(&mut self, addr: EthAddress, amount: u128) {
        self.balances.entry(addr).or_default().actual += amount;
    }

    pub fn transfer(&mut self, from: EthAddress, to: EthAddress, amount: u128, auto_rollover: bool) {
        self.balances.entry(from).or_default().actual -= amount;
        self.balances.entry(to).or_default().pending += amount;
        if auto_rollover {
            self.rollover(from);
        }
    }

    pub fn withdraw(&mut self, addr: EthAddress, amount: u128) {
        self.balances.entry(addr).or_default().actual -= amount;
    }

    pub fn rollover(&mut self, addr: EthAddress) {
        let b = self.balances.entry(addr).or_default();
        b.actual += std::mem::take(&mut b.pending);
    }

    pub fn total(&self) -> u128 {
        self.balances.values().map(|b| b.pending + b.actual).sum()
    }
}

/// A named participant with a deterministic address and key pair.
#[derive(Debug, Clone)]
pub struct Actor {
    pub name: String,
    pub address: EthAddress,
    pub keypair: KeyPair,
}

impl Actor {
    pub fn new(name: &str, seed: &[u8], contract: &EthAddress) -> Self {
        let mut tag = seed.to_vec();
        tag.extend_from_slice(b"actor:");
        tag.extend_from_slice(name.as_bytes());
        let digest = keccak256(&tag);
        let mut addr = [0u8; 20];
        addr.copy_from_slice(&digest.as_bytes()[12..]);
        let mut signer_seed = seed.to_vec();
        signer_seed.extend_from_slice(b"signer:");
        signer_seed.extend_from_slice(name.as_bytes());
        let keypair = derive_keypair(&TestSigner::new(signer_seed), contract)
            .expect("test signer never fails");
        Actor {
            name: name.to_string(),
            address: EthAddress::new(addr),
            keypair,
        }
    }
}

/// Failure counters from [`run_random_scenario`]; all zero on success.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScenarioReport {
    pub ops: usize,
    pub deposits: usize,
    pub transfers: usize,
    pub withdrawals: usize,
    pub rollovers: usize,
    pub decrypt_mismatches: usize,
    pub opening_failures: usize,
    pub conservation_failures: usize,
    pub spend_ops: usize,
    pub reset_violations: usize,
    pub rejection_probes: usize,
    pub rejection_safety_failures: usize,
    pub unexpected_errors: Vec<String>,
}

const SCENARIO_CONTRACT: EthAddress = EthAddress::new([0xce; 20]);

/// Drives `ops` random operations over `accounts` actors and checks, after
/// every operation and for every account: decryption equals the oracle,
/// both commitments open to the decrypted values, total supply matches,
/// and every spend leaves a single self-owned DH entry. Every fifth step
/// also submits a proof that must be rejected and checks the state is
/// untouched.
pub fn run_random_scenario(seed: u64, accounts: usize, ops: usize) -> ScenarioReport {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ledger_seed = [0u8; 32];
    rng.fill(&mut ledger_seed);
    let mut state = LedgerState::new(ledger_seed);
    let mut oracle = PlaintextOracle::default();
    let actors: Vec<Actor> = (0..accounts)
        .map(|i| Actor::new(&format!("actor{i}"), &seed.to_be_bytes(), &SCENARIO_CONTRACT))
        .collect();
    let mut report = ScenarioReport::default();

    for step in 0..ops {
        let i = rng.gen_range(0..accounts);
        let actor = &actors[i];
        let registered = state.registered_key(&actor.address).is_some();
        let kind = if registered { rng.gen_range(0..10) } else { 0 };
        let actual = oracle.get(&actor.address).actual;
        let mut spend = false;

        let result: Result<(), LedgerError> = match kind {
            0..=2 => {
                let amount = random_amount(&mut rng, 1_000_000);
                report.deposits += 1;
                spend = true;
                let mut nonce_rng = state.take_rng();
                build_deposit(&actor.keypair, &state, &actor.address, amount, &mut nonce_rng)
                    .and_then(|p| state.deposit(actor.address, actor.keypair.pk, amount, &p))
                    .map(|_| oracle.deposit(actor.address, amount.value()))
            }
            3..=6 => {
                let receivers: Vec<&Actor> = actors
                    .iter()
                    .filter(|a| a.address != actor.address && state.registered_key(&a.address).is_some())
                    .collect();
                if receivers.is_empty() {
                    report.rollovers += 1;
                    state.rollover(actor.address).map(|_| oracle.rollover(actor.address))
                } else {
                    let to = receivers[rng.gen_range(0..receivers.len())];
                    let amount = spend_amount(&mut rng, actual);
                    report.transfers += 1;
                    spend = true;
                    let mut nonce_rng = state.take_rng();
                    build_transfer(&actor.keypair, &state, &actor.address, &to.address, amount, &mut nonce_rng)
                        .and_then(|p| state.transfer(actor.address, to.address, &p, false))
                        .map(|_| oracle.transfer(actor.address, to.address, amount.value(), false))
                }
            }
            7 => {
                let amount = spend_amount(&mut rng, actual);
                report.withdrawals += 1;
                spend = true;
                let mut nonce_rng = state.take_rng();
                build_withdraw(&actor.keypair, &state, &actor.address, &actor.address, amount, &mut nonce_rng)
                    .and_then(|p| state.withdraw(actor.address, &p))
                    .map(|_| oracle.withdraw(actor.address, amount.value()))
            }
            _ => {
                report.rollovers += 1;
                state.rollover(actor.address).map(|_| oracle.rollover(actor.address))
            }
        };
        report.ops += 1;
        if let Err(e) = result {
            report.unexpected_errors.push(format!("step {step}: {e}"));
            continue;
        }

        if spend {
            report.spend_ops += 1;
            let entries = &state.balance(&actor.address).expect("registered").actual_dh.entries;
            if entries.len() != 1 || entries[0].sender_pk != actor.keypair.pk {
                report.reset_violations += 1;
            }
        }

        check_all(&state, &oracle, &actors, &mut report);

        if step % 5 == 4 {
            probe_rejection(&mut state, &actors, &mut rng, &mut report);
        }
    }
    report
}

fn random_amount(rng: &mut ChaCha20Rng, max: u128) -> Amount {
    let v = if rng.gen_bool(0.1) { 0 } else { rng.gen_range(0..=max) };
    Amount::new(v).expect("small amount")
}

fn spend_amount(rng: &mut ChaCha20Rng, actual: u128) -> Amount {
    let v = match rng.gen_range(0..10) {
        0 => 0,
        1 => actual,
        _ => rng.gen_range(0..=actual),
    };
    Amount::new(v).expect("bounded by balance")
}

fn check_all(state: &LedgerState, oracle: &PlaintextOracle, actors: &[Actor], report: &mut ScenarioReport) {
    for actor in actors {
        if state.registered_key(&actor.address).is_none() {
            continue;
        }
        let expected = oracle.get(&actor.address);
        match state.decrypt_account(&actor.keypair, &actor.address) {
            Ok((pending, actual)) => {
                if (pending.value(), actual.value()) != (expected.pending, expected.actual) {
                    report.decrypt_mismatches += 1;
                }
                let bal = state.balance(&actor.address).expect("registered");
                if !verify_opening(&bal.pending_commitment, pending, &actor.keypair.sk)
                    || !verify_opening(&bal.actual_commitment, actual, &actor.keypair.sk)
                {
                    report.opening_failures += 1;
                }
            }
            Err(_) => report.decrypt_mismatches += 1,
        }
    }
    if state.total_wrapped.value() != oracle.total() {
        report.conservation_failures += 1;
    }
}

/// Submits an overspending transfer or withdrawal and a stale one, and
/// checks each is rejected without mutating state.
fn probe_rejection(state: &mut LedgerState, actors: &[Actor], rng: &mut ChaCha20Rng, report: &mut ScenarioReport) {
    let registered: Vec<&Actor> = actors
        .iter()
        .filter(|a| state.registered_key(&a.address).is_some())
        .collect();
    let actor = registered[rng.gen_range(0..registered.len())];
    let mut nonce_rng = state.take_rng();
    let before = state.clone();

    let mut proof = build_withdraw(&actor.keypair, state, &actor.address, &actor.address, Amount::ZERO, &mut nonce_rng)
        .expect("zero withdrawal always builds");
    proof.witness.balance += 1;
    report.rejection_probes += 1;
    if state.withdraw(actor.address, &proof).is_ok() || *state != before {
        report.rejection_safety_failures += 1;
    }

    let mut stale = proof.clone();
    stale.witness.balance -= 1;
    stale.statement.balance_commitment = commit_scalar(Fl::ZERO, &Fl::ONE, &actor.keypair.pk);
    report.rejection_probes += 1;
    match state.withdraw(actor.address, &stale) {
        Err(LedgerError::StaleCommitment) if *state == before => {}
        _ => report.rejection_safety_failures += 1,
    }
}

/// One targeted tamper and the verifier's verdict on it.
#[derive(Debug, Clone)]
pub struct TamperCase {
    pub target: Violation,
    pub report: VerificationReport,
}

struct Keys {
    sk: Fl,
    pk: Point,
    other_pk: Point,
    receiver_pk: Point,
}

fn self_ct(value: Fq, sk: &Fl, n: Fq) -> Fq {
    encrypt_value(value, sk, &generator_g().scalar_mul(sk), n).expect("nonzero key")
}

fn deposit_case(k: &Keys, prior: u128, amount: u128, r0: Fl, r: Fl, n: Fq) -> (DepositStatement, DepositWitness) {
    let st = DepositStatement {
        pk: k.pk,
        amount,
        balance_commitment: commit_scalar(Fl::from(prior), &r0, &k.pk),
        amount_commitment: commit_scalar(Fl::from(amount), &r, &k.pk),
        new_encrypted_balance: self_ct(Fq::from(prior) + Fq::from(amount), &k.sk, n),
        encryption_nonce: n,
    };
    let w = DepositWitness { sk: k.sk, prior_balance: prior, commitment_nonce: r };
    (st, w)
}

fn transfer_case(k: &Keys, balance: u128, amount: u128, nonces: (Fl, Fl, Fl, Fq, Fq)) -> (TransferStatement, TransferWitness) {
    let (r0, rs, rr, ns, nr) = nonces;
    let st = TransferStatement {
        sender_pk: k.pk,
        receiver_pk: k.receiver_pk,
        sender_balance_commitment: commit_scalar(Fl::from(balance), &r0, &k.pk),
        sender_amount_commitment: commit_scalar_sender(Fl::from(amount), &rs, &k.pk),
        receiver_amount_commitment: commit_scalar(Fl::from(amount), &rr, &k.receiver_pk),
        new_sender_encrypted_balance: self_ct(Fq::from(balance) - Fq::from(amount), &k.sk, ns),
        sender_nonce: ns,
        receiver_encrypted_amount: encrypt_value(Fq::from(amount), &k.sk, &k.receiver_pk, nr).expect("valid keys"),
        receiver_nonce: nr,
    };
    let w = TransferWitness {
        sk_s: k.sk,
        sender_balance: balance,
        amount,
        sender_commit_nonce: rs,
        receiver_commit_nonce: rr,
    };
    (st, w)
}

fn withdraw_case(k: &Keys, balance: u128, amount: u128, r0: Fl, r: Fl, n: Fq) -> (WithdrawStatement, WithdrawWitness) {
    let st = WithdrawStatement {
        pk: k.pk,
        receiver_address: EthAddress::new([0x77; 20]),
        amount,
        balance_commitment: commit_scalar(Fl::from(balance), &r0, &k.pk),
        amount_commitment: commit_scalar_sender(Fl::from(amount), &r, &k.pk),
        new_encrypted_balance: self_ct(Fq::from(balance) - Fq::from(amount), &k.sk, n),
        encryption_nonce: n,
    };
    let w = WithdrawWitness { sk: k.sk, balance, commitment_nonce: r };
    (st, w)
}

/// Honest deposit, transfer and withdraw reports, in that order.
pub fn honest_reports(seed: u64) -> [VerificationReport; 3] {
    let (k, mut rng) = tamper_keys(seed);
    let nonces = (Fl::random(&mut rng), Fl::random(&mut rng), Fl::random(&mut rng));
    let (n1, n2) = (Fq::random(&mut rng), Fq::random(&mut rng));
    let (ds, dw) = deposit_case(&k, 1000, 250, nonces.0, nonces.1, n1);
    let (ts, tw) = transfer_case(&k, 1000, 300, (nonces.0, nonces.1, nonces.2, n1, n2));
    let (ws, ww) = withdraw_case(&k, 1000, 400, nonces.2, nonces.0, n2);
    [verify_deposit(&ds, &dw), verify_transfer(&ts, &tw), verify_withdraw(&ws, &ww)]
}

fn tamper_keys(seed: u64) -> (Keys, ChaCha20Rng) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = Fl::random(&mut rng);
    let g = generator_g();
    let keys = Keys {
        sk,
        pk: g.scalar_mul(&sk),
        other_pk: g.scalar_mul(&(sk + Fl::ONE)),
        receiver_pk: g.scalar_mul(&Fl::random(&mut rng)),
    };
    (keys, rng)
}

/// For every violation code, a statement/witness pair that is honest
/// except for one targeted change (dependent values recomputed so that
/// only the target constraint can fail).
pub fn tamper_matrix(seed: u64) -> Vec<TamperCase> {
    let (k, mut rng) = tamper_keys(seed);
    let (r0, r1, r2) = (Fl::random(&mut rng), Fl::random(&mut rng), Fl::random(&mut rng));
    let (n1, n2) = (Fq::random(&mut rng), Fq::random(&mut rng));
    let big = AMOUNT_LIMIT;
    let mut cases = Vec::new();
    let mut push = |target, report| cases.push(TamperCase { target, report });

    // Deposit: prior 1000, amount 250.
    let (mut st, w) = deposit_case(&k, 1000, 250, r0, r1, n1);
    st.pk = k.other_pk;
    st.amount_commitment = commit_scalar(Fl::from(250u64), &r1, &k.other_pk);
    push(Violation::K1KeyMismatch, verify_deposit(&st, &w));

    let (mut st, w) = deposit_case(&k, 1000, 250, r0, r1, n1);
    st.balance_commitment = commit_scalar(Fl::from(1001u64), &r0, &k.pk);
    push(Violation::K2BalanceOpening, verify_deposit(&st, &w));

    let (mut st, w) = deposit_case(&k, 1000, 250, r0, r1, n1);
    st.amount = 251;
    st.new_encrypted_balance = self_ct(Fq::from(1251u64), &k.sk, n1);
    push(Violation::K3AmountCommitment, verify_deposit(&st, &w));

    let (mut st, w) = deposit_case(&k, 1000, 250, r0, r1, n1);
    st.new_encrypted_balance += Fq::ONE;
    push(Violation::K4BalanceEncryption, verify_deposit(&st, &w));

    let (st, w) = deposit_case(&k, big - 1, 1, r0, r1, n1);
    push(Violation::K5Range, verify_deposit(&st, &w));

    // Transfer: balance 1000, amount 300.
    let nonces = (r0, r1, r2, n1, n2);
    let (mut st, w) = transfer_case(&k, 1000, 300, nonces);
    st.sender_pk = k.other_pk;
    st.sender_amount_commitment = commit_scalar_sender(Fl::from(300u64), &r1, &k.other_pk);
    push(Violation::T1KeyMismatch, verify_transfer(&st, &w));

    let (mut st, w) = transfer_case(&k, 1000, 300, nonces);
    st.sender_balance_commitment = commit_scalar(Fl::from(1001u64), &r0, &k.pk);
    push(Violation::T2BalanceOpening, verify_transfer(&st, &w));

    let (st, w) = transfer_case(&k, 1000, 1200, nonces);
    push(Violation::T2Overspend, verify_transfer(&st, &w));

    let (st, w) = transfer_case(&k, big + 5, big, nonces);
    push(Violation::T2Range, verify_transfer(&st, &w));

    let (st, mut w) = transfer_case(&k, 1000, 300, nonces);
    w.sender_commit_nonce += Fl::ONE;
    push(Violation::T3SenderCommitment, verify_transfer(&st, &w));

    let (st, mut w) = transfer_case(&k, 1000, 300, nonces);
    w.receiver_commit_nonce += Fl::ONE;
    push(Violation::T4ReceiverCommitment, verify_transfer(&st, &w));

    let (mut st, w) = transfer_case(&k, 1000, 300, nonces);
    st.new_sender_encrypted_balance += Fq::ONE;
    push(Violation::T5SenderBalanceEncryption, verify_transfer(&st, &w));

    let (mut st, w) = transfer_case(&k, 1000, 300, nonces);
    st.receiver_encrypted_amount = encrypt_value(Fq::from(301u64), &k.sk, &k.receiver_pk, n2).unwrap();
    push(Violation::T6ReceiverAmountEncryption, verify_transfer(&st, &w));

    // Withdraw: balance 1000, amount 400.
    let (mut st, w) = withdraw_case(&k, 1000, 400, r0, r1, n1);
    st.pk = k.other_pk;
    st.amount_commitment = commit_scalar_sender(Fl::from(400u64), &r1, &k.other_pk);
    push(Violation::W1KeyMismatch, verify_withdraw(&st, &w));

    let (mut st, w) = withdraw_case(&k, 1000, 400, r0, r1, n1);
    st.balance_commitment = commit_scalar(Fl::from(1001u64), &r0, &k.pk);
    push(Violation::W2BalanceOpening, verify_withdraw(&st, &w));

    let (st, w) = withdraw_case(&k, 1000, 1200, r0, r1, n1);
    push(Violation::W2Overspend, verify_withdraw(&st, &w));

    let (st, w) = withdraw_case(&k, big + 5, big, r0, r1, n1);
    push(Violation::W2Range, verify_withdraw(&st, &w));

    let (st, mut w) = withdraw_case(&k, 1000, 400, r0, r1, n1);
    w.commitment_nonce += Fl::ONE;
    push(Violation::W3AmountCommitment, verify_withdraw(&st, &w));

    let (mut st, w) = withdraw_case(&k, 1000, 400, r0, r1, n1);
    st.new_encrypted_balance += Fq::ONE;
    push(Violation::W4BalanceEncryption, verify_withdraw(&st, &w));

    cases
}
