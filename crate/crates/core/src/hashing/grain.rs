//! The Grain LFSR that derives Poseidon round constants and the MDS matrix.

use num_bigint::BigUint;

use crate::curve::Fq;

use super::PoseidonParams;

/// 80-bit self-shrinking LFSR seeded with the instance description
/// (field type, S-box type, field size, width, round counts).
pub struct GrainLfsr {
    state: [bool; 80],
}

impl GrainLfsr {
    pub fn new(field_size: u16, width: u16, full_rounds: u16, partial_rounds: u16) -> Self {
        let mut bits = Vec::with_capacity(80);
        let mut push = |value: u64, width: usize| {
            bits.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
        };
        // field = 1 (prime field), sbox = 0 (x^alpha)
        push(1, 2);
        push(0, 4);
        push(field_size.into(), 12);
        push(width.into(), 12);
        push(full_rounds.into(), 10);
        push(partial_rounds.into(), 10);
        push((1 << 30) - 1, 30);
        let mut lfsr = GrainLfsr {
            state: bits.try_into().expect("80 seed bits"),
        };
        for _ in 0..160 {
            lfsr.step();
        }
        lfsr
    }

    fn step(&mut self) -> bool {
        let s = &self.state;
        let bit = s[62] ^ s[51] ^ s[38] ^ s[23] ^ s[13] ^ s[0];
        self.state.copy_within(1.., 0);
        self.state[79] = bit;
        bit
    }

    /// Next output bit of the shrinking generator: draw pairs until the
    /// first bit of the pair is set, emit the second.
    pub fn next_bit(&mut self) -> bool {
        loop {
            let keep = self.step();
            let bit = self.step();
            if keep {
                return bit;
            }
        }
    }

    pub fn next_uint(&mut self, bits: usize) -> BigUint {
        let mut v = BigUint::default();
        for _ in 0..bits {
            v <<= 1u8;
            if self.next_bit() {
                v += 1u8;
            }
        }
        v
    }
}

impl PoseidonParams {
    /// Regenerates the width-3 parameter set from scratch: round constants by
    /// rejection sampling, then a Cauchy MDS matrix `1 / (x_i + y_j)`.
    pub fn generate(full_rounds: usize, partial_rounds: usize) -> PoseidonParams {
        const T: usize = 3;
        let field_size = 254;
        let q = Fq::modulus();
        let mut lfsr = GrainLfsr::new(field_size as u16, T as u16, full_rounds as u16, partial_rounds as u16);

        let mut round_constants = Vec::with_capacity((full_rounds + partial_rounds) * T);
        while round_constants.len() < (full_rounds + partial_rounds) * T {
            let v = lfsr.next_uint(field_size);
            if v < q {
                round_constants.push(Fq::from_biguint(&v));
            }
        }

        let mds = loop {
            let xs_ys: Vec<Fq> = (0..2 * T)
                .map(|_| Fq::from_biguint(&lfsr.next_uint(field_size)))
                .collect();
            let distinct = (0..xs_ys.len()).all(|i| !xs_ys[i + 1..].contains(&xs_ys[i]));
            if !distinct {
                continue;
            }
            let (xs, ys) = xs_ys.split_at(T);
            let mut m = [[Fq::ZERO; T]; T];
            let mut ok = true;
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    match (*x + *y).inverse() {
                        Some(inv) => m[i][j] = inv,
                        None => ok = false,
                    }
                }
            }
            if ok {
                break m;
            }
        };

        PoseidonParams {
            t: T,
            full_rounds,
            partial_rounds,
            alpha: 5,
            round_constants,
            mds,
        }
    }
}
