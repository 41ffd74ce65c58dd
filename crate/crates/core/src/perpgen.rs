//! Generators for perpendicular full-rank pairs `(A, B)` with `A B^t = 0`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape, Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Full attempts at drawing full-rank matrices before giving up.
pub const RETRY_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    CoordinateSplit,
    Systematic,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerpPair {
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub provenance: Provenance,
}

impl PerpPair {
    /// Checks perpendicularity and both rank conditions.
    pub fn new(a: BitMatrix, b: BitMatrix, provenance: Provenance) -> Result<Self> {
        if a.cols() != b.cols() {
            return Err(shape(format!(
                "A has {} columns, B has {}",
                a.cols(),
                b.cols()
            )));
        }
        if !a.mul(&b.transpose())?.is_zero() {
            return Err(Error::Perpendicularity { i: 1, j: 1 });
        }
        for m in [&a, &b] {
            let rank = m.rank();
            if rank != m.rows() {
                return Err(Error::RankDeficient {
                    rows: m.rows(),
                    rank,
                });
            }
        }
        Ok(PerpPair { a, b, provenance })
    }

    /// Equal row spaces; then `ker A = ker B` and the differential and linear
    /// kernel chains coincide when the same `T` is used for both.
    pub fn is_self_dual(&self) -> bool {
        is_self_dual_pair(&self.a, &self.b)
    }
}

pub fn is_self_dual_pair(a: &BitMatrix, b: &BitMatrix) -> bool {
    a.cols() == b.cols() && a.row_space() == b.row_space()
}

/// Coordinate split over `l = l1 + l2` coordinates with the zero set `j_set`
/// (0-based, `|J| = l2`): rows of `A` vanish on `J`, rows of `B` vanish off it.
/// Rows are drawn without replacement from the nonzero vectors of each side.
pub fn gen_coordinate_split_with<R: Rng + ?Sized>(
    l1: usize,
    l2: usize,
    rows_a: usize,
    rows_b: usize,
    j_set: &[usize],
    rng: &mut R,
) -> Result<PerpPair> {
    let l = l1 + l2;
    if l1 == 0 || l2 == 0 || l > 63 {
        return Err(Error::Argument(format!(
            "need l1, l2 > 0 and l1 + l2 <= 63, got {l1}, {l2}"
        )));
    }
    let mut in_j = vec![false; l];
    for &j in j_set {
        if j >= l || in_j[j] {
            return Err(Error::Argument(format!(
                "bad index set {j_set:?} for l = {l}"
            )));
        }
        in_j[j] = true;
    }
    if j_set.len() != l2 {
        return Err(Error::Argument(format!(
            "index set has {} entries, expected l2 = {l2}",
            j_set.len()
        )));
    }
    if rows_a > 1 << l1 || rows_b > 1 << l2 {
        return Err(Error::Argument(format!(
            "rows_a <= 2^l1 and rows_b <= 2^l2 required, got {rows_a}, {rows_b}"
        )));
    }
    let free_a: Vec<usize> = (0..l).filter(|&j| !in_j[j]).collect();
    let free_b: Vec<usize> = (0..l).filter(|&j| in_j[j]).collect();

    // The i-th nonzero vector supported on `free`.
    let embed = |free: &[usize], code: u64| {
        let mut v = BitVector::zeros(l);
        for (bit, &j) in free.iter().enumerate() {
            if (code >> bit) & 1 == 1 {
                v.set(j, true);
            }
        }
        v
    };
    let draw = |free: &[usize], rows: usize, rng: &mut R| -> Option<BitMatrix> {
        let pool = (1usize << free.len()) - 1;
        if rows > pool {
            return None;
        }
        let picked: Vec<BitVector> = sample(rng, pool, rows)
            .into_iter()
            .map(|i| embed(free, i as u64 + 1))
            .collect();
        Some(BitMatrix::from_rows(l, &picked).expect("rows have width l"))
    };

    let (mut best_a, mut best_b) = (0, 0);
    let mut attempts = 0;
    for _ in 0..RETRY_BUDGET {
        let (Some(a), Some(b)) = (draw(&free_a, rows_a, rng), draw(&free_b, rows_b, rng)) else {
            // The zero vector would be forced into the matrix.
            best_a = rows_a.min(l1);
            best_b = rows_b.min(l2);
            break;
        };
        attempts += 1;
        let (ra, rb) = (a.rank(), b.rank());
        best_a = best_a.max(ra);
        best_b = best_b.max(rb);
        if ra == rows_a && rb == rows_b {
            debug_assert!(a.mul(&b.transpose()).unwrap().is_zero());
            return PerpPair::new(a, b, Provenance::CoordinateSplit);
        }
    }
    Err(Error::Generation {
        attempts,
        rows_a,
        rows_b,
        best_rank_a: best_a,
        best_rank_b: best_b,
    })
}

/// Coordinate split with a seeded random choice of `J`.
pub fn gen_coordinate_split(
    l1: usize,
    l2: usize,
    rows_a: usize,
    rows_b: usize,
    seed: u64,
) -> Result<PerpPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if l1 + l2 == 0 || l1 + l2 > 63 {
        return Err(Error::Argument(format!(
            "need 0 < l1 + l2 <= 63, got {}",
            l1 + l2
        )));
    }
    let mut j_set = sample(&mut rng, l1 + l2, l2).into_vec();
    j_set.sort_unstable();
    gen_coordinate_split_with(l1, l2, rows_a, rows_b, &j_set, &mut rng)
}

/// `A = [I_k | M]`, `B = [M^t | I_{l-k}]`; `M` is random (seeded) when absent.
pub fn gen_systematic_pair(
    k: usize,
    l: usize,
    m: Option<BitMatrix>,
    seed: u64,
) -> Result<PerpPair> {
    if k == 0 || k >= l {
        return Err(shape(format!(
            "systematic pair needs 0 < k < l, got k={k}, l={l}"
        )));
    }
    let m = match m {
        Some(m) if m.rows() != k || m.cols() != l - k => {
            return Err(shape(format!(
                "M is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                k,
                l - k
            )))
        }
        Some(m) => m,
        None => BitMatrix::random(k, l - k, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let a = BitMatrix::identity(k).hstack(&m)?;
    let b = m.transpose().hstack(&BitMatrix::identity(l - k))?;
    PerpPair::new(a, b, Provenance::Systematic)
}

/// Random perpendicular pair with `rows_a + rows_b <= width`: a systematic pair
/// whose parity check is randomly compressed, then mixed by a random column
/// change `A Q`, `B Q^{-t}`.
pub fn gen_random_pair<R: Rng + ?Sized>(
    rows_a: usize,
    rows_b: usize,
    width: usize,
    rng: &mut R,
) -> Result<PerpPair> {
    if rows_a == 0 || rows_b == 0 || rows_a + rows_b > width {
        return Err(shape(format!(
            "need positive rows with rows_a + rows_b <= width, got {rows_a} + {rows_b} vs {width}"
        )));
    }
    let m = BitMatrix::random(rows_a, width - rows_a, rng);
    let a = BitMatrix::identity(rows_a).hstack(&m)?;
    let h = m.transpose().hstack(&BitMatrix::identity(width - rows_a))?;
    let compress = loop {
        let r = BitMatrix::random(rows_b, width - rows_a, rng);
        if r.rank() == rows_b {
            break r;
        }
    };
    let b = compress.mul(&h)?;
    let q = BitMatrix::random_invertible(width, rng);
    let q_inv_t = q.invert()?.transpose();
    PerpPair::new(a.mul(&q)?, b.mul(&q_inv_t)?, Provenance::User)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_strs(rows).unwrap()
    }

    #[test]
    fn minimal_coordinate_split() {
        // l1 = l2 = 1, J = {2} (1-based) -> index 1.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = gen_coordinate_split_with(1, 1, 1, 1, &[1], &mut rng).unwrap();
        assert_eq!(p.a, m(&["10"]));
        assert_eq!(p.b, m(&["01"]));
        assert!(p.a.mul(&p.b.transpose()).unwrap().is_zero());
    }

    #[test]
    fn full_row_count_forces_failure() {
        let err = gen_coordinate_split(2, 1, 4, 1, 7).unwrap_err();
        assert!(
            matches!(err, Error::Generation { best_rank_a: 2, .. }),
            "{err}"
        );
        // more rows than the dimension of W can never be full rank
        let err = gen_coordinate_split(2, 1, 3, 1, 7).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Generation {
                    attempts: RETRY_BUDGET,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn coordinate_split_is_reproducible() {
        let p1 = gen_coordinate_split(2, 1, 2, 1, 42).unwrap();
        let p2 = gen_coordinate_split(2, 1, 2, 1, 42).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.a.rank(), 2);
        assert_eq!(p1.b.rank(), 1);
        assert!(p1.a.mul(&p1.b.transpose()).unwrap().is_zero());
    }

    #[test]
    fn systematic_examples() {
        let p = gen_systematic_pair(1, 2, Some(m(&["0"])), 0).unwrap();
        assert_eq!((p.a.clone(), p.b.clone()), (m(&["10"]), m(&["01"])));
        assert!(!p.is_self_dual());

        let p = gen_systematic_pair(2, 4, Some(BitMatrix::identity(2)), 0).unwrap();
        assert_eq!(p.a, p.b);
        assert!(p.is_self_dual());

        assert!(gen_systematic_pair(2, 2, None, 0).is_err());
        assert!(gen_systematic_pair(1, 3, Some(m(&["1"])), 0).is_err());
    }

    #[test]
    fn systematic_random_is_perpendicular() {
        for seed in 0..100 {
            let p = gen_systematic_pair(3, 7, None, seed).unwrap();
            assert!(p.a.mul(&p.b.transpose()).unwrap().is_zero());
            for row in p.b.row_vectors() {
                assert!(p.a.mul_vec(&row).unwrap().is_zero());
            }
            assert_eq!(p.b.rank(), 7 - p.a.rank());
            assert_eq!(p.b.row_space(), p.a.kernel());
        }
    }

    #[test]
    fn self_dual_iff_m_mt_is_identity() {
        for seed in 0..64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mm = BitMatrix::random(2, 2, &mut rng);
            let p = gen_systematic_pair(2, 4, Some(mm.clone()), 0).unwrap();
            let orth = mm.mul(&mm.transpose()).unwrap().is_identity();
            assert_eq!(p.is_self_dual(), orth, "M = {mm:?}");
        }
    }

    #[test]
    fn fox_pair_is_self_dual() {
        let a = BitMatrix::from_block_pattern(2, &[&[1, 0, 1, 0], &[0, 1, 0, 1]]);
        let p = PerpPair::new(a.clone(), a, Provenance::User).unwrap();
        assert!(p.is_self_dual());
    }

    #[test]
    fn random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = gen_random_pair(3, 2, 7, &mut rng).unwrap();
            assert_eq!((p.a.rank(), p.b.rank()), (3, 2));
        }
        assert!(gen_random_pair(4, 4, 7, &mut rng).is_err());
    }
}
