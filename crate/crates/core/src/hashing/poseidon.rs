//! Poseidon permutation, width 3 (capacity 1, rate 2), x^5 S-box,
//! 8 full and 57 partial rounds over the BN254 scalar field.
//!
//! Constants come from `data/poseidon_t3.json`; the same set can be
//! regenerated with [`PoseidonParams::generate`].

use std::sync::OnceLock;

use serde::Deserialize;

use crate::curve::Fq;

const PARAMS_JSON: &str = include_str!("../../data/poseidon_t3.json");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct PoseidonParams {
    pub t: usize,
    pub full_rounds: usize,
    pub partial_rounds: usize,
    pub alpha: u64,
    pub round_constants: Vec<Fq>,
    pub mds: [[Fq; 3]; 3],
}

impl PoseidonParams {
    /// The shipped parameter asset.
    pub fn standard() -> &'static PoseidonParams {
        static PARAMS: OnceLock<PoseidonParams> = OnceLock::new();
        PARAMS.get_or_init(|| {
            let params: PoseidonParams =
                serde_json::from_str(PARAMS_JSON).expect("bundled Poseidon parameters parse");
            assert_eq!(params.t, 3);
            assert_eq!(
                params.round_constants.len(),
                params.t * (params.full_rounds + params.partial_rounds)
            );
            params
        })
    }

    pub fn permute(&self, state: &mut [Fq; 3]) {
        let half_full = self.full_rounds / 2;
        for round in 0..self.full_rounds + self.partial_rounds {
            for (i, s) in state.iter_mut().enumerate() {
                *s += self.round_constants[round * 3 + i];
            }
            if round < half_full || round >= half_full + self.partial_rounds {
                for s in state.iter_mut() {
                    *s = s.pow(self.alpha);
                }
            } else {
                state[0] = state[0].pow(self.alpha);
            }
            let mut mixed = [Fq::ZERO; 3];
            for (i, out) in mixed.iter_mut().enumerate() {
                for (j, s) in state.iter().enumerate() {
                    *out += self.mds[i][j] * *s;
                }
            }
            *state = mixed;
        }
    }
}

/// Hashes two field elements: permute `(0, a, b)`, return the first lane.
pub fn poseidon2(a: Fq, b: Fq) -> Fq {
    let mut state = [Fq::ZERO, a, b];
    PoseidonParams::standard().permute(&mut state);
    state[0]
}
