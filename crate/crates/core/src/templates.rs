//! Ready-made rounds: Feistel, FOX, the fully linear round, and generalized
//! Feistel networks of Types 1 and 3.
//!
//! Unless a core is supplied, templates get a seeded random bijective table
//! under the xor-pre key rule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::keyed_map::{KeyRule, KeyedMap};
use crate::multibranch::{Branch, MultiBranchParts, MultiBranchSpec};
use crate::perpgen::{gen_random_pair, PerpPair};
use crate::sandwich::{Dims, SchemeSpec};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn need_word(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("word size must be at least 1".into()));
    }
    Ok(())
}

/// Seeded random table; a permutation when `d1 == d2`.
pub fn random_core(d1: usize, d2: usize, seed: u64) -> Result<KeyedMap> {
    let mut r = rng(seed);
    if d1 == d2 {
        KeyedMap::random_permutation(d1, KeyRule::XorPre, &mut r)
    } else {
        KeyedMap::random(d1, d2, KeyRule::XorPre, &mut r)
    }
}

fn core_or_default(core: Option<KeyedMap>, d1: usize, d2: usize, seed: u64) -> Result<KeyedMap> {
    match core {
        Some(c) => Ok(c),
        None => random_core(d1, d2, seed),
    }
}

/// `N x N` block rotation: block row `i` has `I` at block column `i + 1 mod N`.
pub fn block_rotation(n: usize, words: usize) -> BitMatrix {
    let pattern: Vec<Vec<u8>> = (0..words)
        .map(|i| (0..words).map(|j| (j == (i + 1) % words) as u8).collect())
        .collect();
    let rows: Vec<&[u8]> = pattern.iter().map(Vec::as_slice).collect();
    BitMatrix::from_block_pattern(n, &rows)
}

/// A single block row selecting block `k` of `words`.
fn block_selector(n: usize, words: usize, k: usize) -> BitMatrix {
    let row: Vec<u8> = (0..words).map(|j| (j == k) as u8).collect();
    BitMatrix::from_block_pattern(n, &[&row])
}

/// `A = [I 0]`, `B = [0 I]`, `T` the block swap: `(x0, x1) -> (x1 + f(x0), x0)`.
pub fn feistel(n: usize, core: Option<KeyedMap>, seed: u64) -> Result<SchemeSpec> {
    need_word(n)?;
    SchemeSpec::from_matrices(
        Dims::new(n, 2, 1, 1),
        block_selector(n, 2, 0),
        block_selector(n, 2, 1),
        block_rotation(n, 2),
        core_or_default(core, n, n, seed)?,
    )
}

/// The FOX / Lai–Massey skeleton on `(L0, L1, R0, R1)` with `B = A`.
pub fn fox(n: usize, core: Option<KeyedMap>, seed: u64) -> Result<SchemeSpec> {
    need_word(n)?;
    let a = BitMatrix::from_block_pattern(n, &[&[1, 0, 1, 0], &[0, 1, 0, 1]]);
    let t = BitMatrix::from_block_pattern(
        n,
        &[&[0, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]],
    );
    SchemeSpec::from_matrices(
        Dims::new(n, 4, 2, 2),
        a.clone(),
        a,
        t,
        core_or_default(core, 2 * n, 2 * n, seed)?,
    )
}

/// Type-1 generalized Feistel on `words` blocks: `A` reads block 0, `B`
/// writes block 1, `T` rotates the blocks.
pub fn gfn_type1(n: usize, words: usize, core: Option<KeyedMap>, seed: u64) -> Result<SchemeSpec> {
    need_word(n)?;
    if words < 2 {
        return Err(Error::Argument(
            "a Type-1 network needs at least 2 blocks".into(),
        ));
    }
    SchemeSpec::from_matrices(
        Dims::new(n, words, 1, 1),
        block_selector(n, words, 0),
        block_selector(n, words, 1),
        block_rotation(n, words),
        core_or_default(core, n, n, seed)?,
    )
}

/// Type-3 generalized Feistel as three branches over three copies of a
/// `words`-block state mixed by `diag(T, T, T)`, `T` the Type-1 rotation.
/// Branch `j` reads block `j` of copy `j` and writes the next block of the
/// same copy.
pub fn gfn_type3(
    n: usize,
    words: usize,
    cores: Option<[KeyedMap; 3]>,
    seed: u64,
) -> Result<MultiBranchSpec> {
    need_word(n)?;
    if words < 2 {
        return Err(Error::Argument(
            "a Type-3 network needs at least 2 blocks per copy".into(),
        ));
    }
    let cores = match cores {
        Some(c) => c,
        None => [
            random_core(n, n, seed)?,
            random_core(n, n, seed.wrapping_add(1))?,
            random_core(n, n, seed.wrapping_add(2))?,
        ],
    };
    let total = 3 * words;
    let branches = cores
        .into_iter()
        .enumerate()
        .map(|(j, core)| Branch {
            a: block_selector(n, total, j * words + j % words),
            b: block_selector(n, total, j * words + (j + 1) % words),
            core,
        })
        .collect();
    MultiBranchSpec::new(MultiBranchParts {
        n,
        words,
        copies: 3,
        t_base: block_rotation(n, words),
        branches,
    })
}

/// `F_k(x) = C x + D k` for a round whose core is linear.
#[derive(Clone, Debug)]
pub struct LinearClosedForm {
    pub c: BitMatrix,
    pub d: BitMatrix,
    c_inv: BitMatrix,
    pub dims: Dims,
}

impl LinearClosedForm {
    /// `C = T(I + B^t S A)`, `D = T B^t` from a spec whose core is `S x + k`.
    pub fn from_spec(spec: &SchemeSpec) -> Result<Self> {
        if spec.core().rule() != KeyRule::SwapPlusKey {
            return Err(Error::Precondition(
                "closed form needs the swap-plus-key rule".into(),
            ));
        }
        let (s, offset) = spec
            .core()
            .as_affine()
            .ok_or_else(|| Error::Precondition("core table is not affine".into()))?;
        if !offset.is_zero() {
            return Err(Error::Precondition(
                "core table is affine but not linear".into(),
            ));
        }
        let bt = spec.b().transpose();
        let inner = bt
            .mul(&s)?
            .mul(spec.a())?
            .add(&BitMatrix::identity(spec.dims().state_bits()))?;
        let c = spec.t().mul(&inner)?;
        let c_inv = c.invert()?;
        Ok(LinearClosedForm {
            d: spec.t().mul(&bt)?,
            c,
            c_inv,
            dims: spec.dims(),
        })
    }

    /// `C^ℓ x + Σ_i C^i D k_{ℓ-1-i}`.
    pub fn endpoint(&self, x: &BitVector, keys: &[BitVector]) -> Result<BitVector> {
        let l = keys.len();
        let mut acc = self.c.pow(l)?.mul_vec(x)?;
        let mut ci = BitMatrix::identity(self.c.rows());
        for i in 0..l {
            acc.xor_assign(&ci.mul(&self.d)?.mul_vec(&keys[l - 1 - i])?);
            ci = ci.mul(&self.c)?;
        }
        Ok(acc)
    }

    /// `x_a + x_b = C^{-ℓ}(y_a + y_b)` for two encryptions under the same keys.
    pub fn recover_difference(
        &self,
        ya: &BitVector,
        yb: &BitVector,
        rounds: usize,
    ) -> Result<BitVector> {
        self.c_inv.pow(rounds)?.mul_vec(&ya.xor(yb))
    }
}

/// The fully linear round: core `S x + k` with `S` the coordinate reversal of
/// `n` bits (the swap for `n = 2`), `N_i = N_o = 1`. `T` defaults to the block
/// rotation.
pub fn linear_case(
    n: usize,
    words: usize,
    pair: PerpPair,
    t: Option<BitMatrix>,
) -> Result<(SchemeSpec, LinearClosedForm)> {
    need_word(n)?;
    if pair.a.rows() != n || pair.b.rows() != n || pair.a.cols() != n * words {
        return Err(Error::Validation(format!(
            "pair must be {n}x{} matrices, got A {}x{} and B {}x{}",
            n * words,
            pair.a.rows(),
            pair.a.cols(),
            pair.b.rows(),
            pair.b.cols()
        )));
    }
    let spec = SchemeSpec::from_matrices(
        Dims::new(n, words, 1, 1),
        pair.a,
        pair.b,
        t.unwrap_or_else(|| block_rotation(n, words)),
        KeyedMap::swap(n)?,
    )?;
    let closed = LinearClosedForm::from_spec(&spec)?;
    Ok((spec, closed))
}

/// A random perpendicular pair of `n x nN` matrices for [`linear_case`].
pub fn linear_pair(n: usize, words: usize, seed: u64) -> Result<PerpPair> {
    gen_random_pair(n, n, n * words, &mut rng(seed))
}

/// A random validated round: random perpendicular pair, random invertible
/// `T`, and [`random_core`].
pub fn random_scheme(dims: Dims, seed: u64) -> Result<SchemeSpec> {
    let mut r = rng(seed);
    let width = dims.state_bits();
    let pair = gen_random_pair(dims.core_in_bits(), dims.core_out_bits(), width, &mut r)?;
    let t = BitMatrix::random_invertible(width, &mut r);
    let core = random_core(dims.core_in_bits(), dims.core_out_bits(), seed ^ 0x5eed)?;
    SchemeSpec::from_matrices(dims, pair.a, pair.b, t, core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perpgen::is_self_dual_pair;
    use crate::trails::{kernel_chain, ChainMode};

    fn blocks(x: u64, n: usize, count: usize) -> Vec<u64> {
        (0..count)
            .map(|i| (x >> (i * n)) & ((1 << n) - 1))
            .collect()
    }

    fn join(parts: &[u64], n: usize) -> u64 {
        parts
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (p << (i * n)))
    }

    #[test]
    fn feistel_matches_closed_form() {
        for n in 1..=3 {
            let spec = feistel(n, None, 7).unwrap();
            let round = spec.packed().unwrap();
            for k in 0..1u64 << n {
                let key = spec.prepare_key(&BitVector::from_u64(n, k)).unwrap();
                for x in 0..1u64 << (2 * n) {
                    let b = blocks(x, n, 2);
                    let f = spec.core().eval(b[0], &key);
                    assert_eq!(round.forward(x, &key), join(&[b[1] ^ f, b[0]], n));
                }
            }
        }
    }

    #[test]
    fn fox_matches_closed_form() {
        for n in 1..=2 {
            let spec = fox(n, None, 9).unwrap();
            assert!(is_self_dual_pair(spec.a(), spec.b()));
            let round = spec.packed().unwrap();
            let key = spec.prepare_key(&BitVector::from_u64(2 * n, 1)).unwrap();
            for x in 0..1u64 << (4 * n) {
                let [l0, l1, r0, r1] = blocks(x, n, 4)[..] else {
                    unreachable!()
                };
                let z = spec.core().eval(join(&[l0 ^ r0, l1 ^ r1], n), &key);
                let (z0, z1) = (z & ((1 << n) - 1), z >> n);
                let expect = join(&[z1 ^ l1, z0 ^ z1 ^ l0 ^ l1, z0 ^ r0, z1 ^ r1], n);
                assert_eq!(round.forward(x, &key), expect);
            }
        }
    }

    #[test]
    fn type1_matrices_and_chain() {
        let spec = gfn_type1(1, 4, None, 0).unwrap();
        assert_eq!(spec.a(), &BitMatrix::from_strs(&["1000"]).unwrap());
        assert_eq!(spec.b(), &BitMatrix::from_strs(&["0100"]).unwrap());
        assert_eq!(
            spec.t(),
            &BitMatrix::from_strs(&["0100", "0010", "0001", "1000"]).unwrap()
        );
        let chain = kernel_chain(&spec, 5, ChainMode::Differential).unwrap();
        assert_eq!(chain.dims(), vec![3, 2, 1, 0, 0]);
    }

    #[test]
    fn type3_selectors() {
        let spec = gfn_type3(1, 4, None, 0).unwrap();
        let expect = [
            ("100000000000", "010000000000"),
            ("000001000000", "000000100000"),
            ("000000000010", "000000000001"),
        ];
        for (br, (a, b)) in spec.branches().iter().zip(expect) {
            assert_eq!(br.a, BitMatrix::from_strs(&[a]).unwrap());
            assert_eq!(br.b, BitMatrix::from_strs(&[b]).unwrap());
        }
    }

    #[test]
    fn linear_case_closed_form() {
        let pair = linear_pair(2, 3, 11).unwrap();
        let (spec, closed) = linear_case(2, 3, pair, None).unwrap();
        let mut r = rng(1);
        for _ in 0..20 {
            let x = BitVector::from_u64(6, rand::Rng::random_range(&mut r, 0..64));
            let keys: Vec<BitVector> = (0..3)
                .map(|_| BitVector::from_u64(2, rand::Rng::random_range(&mut r, 0..4)))
                .collect();
            let trace = spec.iterate(&keys, &x).unwrap();
            assert_eq!(&closed.endpoint(&x, &keys).unwrap(), trace.last().unwrap());
            assert_eq!(
                closed.endpoint(&x, &keys[..1]).unwrap(),
                spec.round_forward(&keys[0], &x).unwrap()
            );
        }
    }

    #[test]
    fn random_schemes_validate() {
        for seed in 0..20 {
            let spec = random_scheme(Dims::new(2, 4, 1, 2), seed).unwrap();
            assert_eq!(spec.dims().state_bits(), 8);
        }
    }
}
