//! One sandwich round `F_k(x) = T(x + B^t f_k(A x))`, its inverse and iteration.

use std::fmt;

use crate::error::{shape, Error, Result};
use crate::gf2::{
    apply_row_masks, combine_row_masks, BitMatrix, BitVector, RightInverse, Subspace,
};
use crate::keyed_map::{KeyedMap, RoundKey};

/// Word size and word counts of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    /// Word size in bits.
    pub n: usize,
    /// Words in the state.
    pub words: usize,
    /// Words entering the nonlinear core.
    pub words_in: usize,
    /// Words leaving the nonlinear core.
    pub words_out: usize,
}

impl Dims {
    pub fn new(n: usize, words: usize, words_in: usize, words_out: usize) -> Self {
        Dims {
            n,
            words,
            words_in,
            words_out,
        }
    }

    pub fn state_bits(&self) -> usize {
        self.n * self.words
    }

    pub fn core_in_bits(&self) -> usize {
        self.n * self.words_in
    }

    pub fn core_out_bits(&self) -> usize {
        self.n * self.words_out
    }
}

/// The linear layers shared by single- and multi-branch rounds: compression
/// `A`, expansion `B` and the mixing map `T`.
pub trait LinearLayers {
    fn word_bits(&self) -> usize;
    fn compression(&self) -> &BitMatrix;
    fn expansion(&self) -> &BitMatrix;
    fn mixing(&self) -> &BitMatrix;
    fn mixing_inverse(&self) -> &BitMatrix;

    fn state_bits(&self) -> usize {
        self.mixing().rows()
    }
}

/// Unvalidated ingredients of a round.
#[derive(Clone, Debug)]
pub struct SchemeParts {
    pub dims: Dims,
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub t: BitMatrix,
    pub core: KeyedMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Runs every structural check on a round. Shape failures short-circuit the
/// algebraic checks that depend on them.
pub fn validate(parts: &SchemeParts) -> ValidationReport {
    let mut r = ValidationReport::default();
    let d = parts.dims;
    let dims_ok = d.n > 0
        && d.words_in > 0
        && d.words_in <= d.words
        && d.words_out > 0
        && d.words_out <= d.words;
    r.push(
        "dimensions",
        dims_ok,
        format!(
            "n={} N={} Ni={} No={} (need n>0, 0<Ni<=N, 0<No<=N)",
            d.n, d.words, d.words_in, d.words_out
        ),
    );

    let (nn, ni, no) = (d.state_bits(), d.core_in_bits(), d.core_out_bits());
    let shape_check = |m: &BitMatrix, rows: usize| {
        (
            m.rows() == rows && m.cols() == nn,
            format!("{}x{}, expected {}x{}", m.rows(), m.cols(), rows, nn),
        )
    };
    let (a_ok, a_msg) = shape_check(&parts.a, ni);
    let (b_ok, b_msg) = shape_check(&parts.b, no);
    let (t_ok, t_msg) = shape_check(&parts.t, nn);
    r.push("A shape", a_ok, a_msg);
    r.push("B shape", b_ok, b_msg);
    r.push("T shape", t_ok, t_msg);

    let core = &parts.core;
    r.push(
        "core widths",
        core.input_bits() == ni && core.output_bits() == no,
        format!(
            "f maps {} -> {} bits, expected {} -> {}",
            core.input_bits(),
            core.output_bits(),
            ni,
            no
        ),
    );

    if a_ok {
        let rank = parts.a.rank();
        r.push("rank A", rank == ni, format!("rank {rank} of {ni} rows"));
    }
    if b_ok {
        let rank = parts.b.rank();
        r.push("rank B", rank == no, format!("rank {rank} of {no} rows"));
    }
    if t_ok {
        let rank = parts.t.rank();
        r.push("T invertible", rank == nn, format!("rank {rank} of {nn}"));
    }
    if a_ok && b_ok {
        let prod = parts.a.mul(&parts.b.transpose()).expect("shapes checked");
        let ones = (0..prod.rows())
            .map(|i| prod.row(i).count_ones())
            .sum::<usize>();
        r.push(
            "A B^t = 0",
            prod.is_zero(),
            if prod.is_zero() {
                "perpendicular".to_string()
            } else {
                format!("A B^t != 0 ({ones} nonzero entries)")
            },
        );
    }
    r
}

/// Row masks for rounds whose state fits in one machine word.
#[derive(Clone, Debug)]
struct Masks {
    a: Vec<u64>,
    b: Vec<u64>,
    t: Vec<u64>,
    t_inv: Vec<u64>,
}

/// Word-packed evaluator for states of at most 64 bits; the workhorse of the
/// exhaustive sweeps.
#[derive(Clone, Copy)]
pub struct PackedRound<'a> {
    masks: &'a Masks,
    core: &'a KeyedMap,
}

impl PackedRound<'_> {
    #[inline]
    pub fn forward(&self, x: u64, key: &RoundKey) -> u64 {
        let u = apply_row_masks(&self.masks.a, x);
        let y = self.core.eval(u, key);
        apply_row_masks(&self.masks.t, x ^ combine_row_masks(&self.masks.b, y))
    }

    #[inline]
    pub fn inverse(&self, y: u64, key: &RoundKey) -> u64 {
        let z = apply_row_masks(&self.masks.t_inv, y);
        let u = apply_row_masks(&self.masks.a, z);
        z ^ combine_row_masks(&self.masks.b, self.core.eval(u, key))
    }

    #[inline]
    pub fn compress(&self, x: u64) -> u64 {
        apply_row_masks(&self.masks.a, x)
    }
}

/// A validated round. Construction runs [`validate`] and caches `T^{-1}`, the
/// right inverses of `A` and `B` and the subspaces the analyses need.
#[derive(Clone, Debug)]
pub struct SchemeSpec {
    dims: Dims,
    a: BitMatrix,
    b: BitMatrix,
    t: BitMatrix,
    t_inv: BitMatrix,
    t_transpose: BitMatrix,
    core: KeyedMap,
    right_a: RightInverse,
    right_b: RightInverse,
    row_space_a: Subspace,
    row_space_b: Subspace,
    masks: Option<Masks>,
}

impl SchemeSpec {
    pub fn new(parts: SchemeParts) -> Result<Self> {
        let report = validate(&parts);
        if !report.is_valid() {
            let why: Vec<String> = report
                .failures()
                .map(|c| format!("{} ({})", c.name, c.detail))
                .collect();
            return Err(Error::Validation(why.join("; ")));
        }
        let SchemeParts {
            dims,
            a,
            b,
            t,
            core,
        } = parts;
        let t_inv = t.invert()?;
        let right_a = a.right_inverse(true)?;
        let right_b = b.right_inverse(true)?;
        let masks = (dims.state_bits() <= 64).then(|| Masks {
            a: a.row_masks(),
            b: b.row_masks(),
            t: t.row_masks(),
            t_inv: t_inv.row_masks(),
        });
        Ok(SchemeSpec {
            dims,
            row_space_a: a.row_space(),
            row_space_b: b.row_space(),
            t_transpose: t.transpose(),
            a,
            b,
            t,
            t_inv,
            core,
            right_a,
            right_b,
            masks,
        })
    }

    pub fn from_matrices(
        dims: Dims,
        a: BitMatrix,
        b: BitMatrix,
        t: BitMatrix,
        core: KeyedMap,
    ) -> Result<Self> {
        Self::new(SchemeParts {
            dims,
            a,
            b,
            t,
            core,
        })
    }

    pub fn parts(&self) -> SchemeParts {
        SchemeParts {
            dims: self.dims,
            a: self.a.clone(),
            b: self.b.clone(),
            t: self.t.clone(),
            core: self.core.clone(),
        }
    }

    /// Same linear layers with a different core.
    pub fn with_core(&self, core: KeyedMap) -> Result<Self> {
        let mut parts = self.parts();
        parts.core = core;
        Self::new(parts)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn a(&self) -> &BitMatrix {
        &self.a
    }

    pub fn b(&self) -> &BitMatrix {
        &self.b
    }

    pub fn t(&self) -> &BitMatrix {
        &self.t
    }

    pub fn t_inverse(&self) -> &BitMatrix {
        &self.t_inv
    }

    pub fn t_transpose(&self) -> &BitMatrix {
        &self.t_transpose
    }

    pub fn core(&self) -> &KeyedMap {
        &self.core
    }

    pub fn right_inverse_a(&self) -> &RightInverse {
        &self.right_a
    }

    pub fn right_inverse_b(&self) -> &RightInverse {
        &self.right_b
    }

    pub fn row_space_a(&self) -> &Subspace {
        &self.row_space_a
    }

    pub fn row_space_b(&self) -> &Subspace {
        &self.row_space_b
    }

    pub fn key_bits(&self) -> usize {
        self.core.key_bits()
    }

    pub fn prepare_key(&self, key: &BitVector) -> Result<RoundKey> {
        self.core.prepare_key(key)
    }

    /// Packed evaluator, available when the state has at most 64 bits.
    pub fn packed(&self) -> Result<PackedRound<'_>> {
        let masks = self.masks.as_ref().ok_or_else(|| {
            Error::Resource(format!(
                "packed evaluation needs a state of at most 64 bits, have {}",
                self.dims.state_bits()
            ))
        })?;
        Ok(PackedRound {
            masks,
            core: &self.core,
        })
    }

    fn check_state(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.dims.state_bits() {
            return Err(shape(format!(
                "state has {} bits, expected {}",
                x.len(),
                self.dims.state_bits()
            )));
        }
        Ok(())
    }

    /// `T(x + B^t f_k(A x))`.
    pub fn round_forward(&self, key: &BitVector, x: &BitVector) -> Result<BitVector> {
        self.check_state(x)?;
        let y = self.core.eval_vec(&self.a.mul_vec(x)?, key)?;
        let mut s = self.b.transpose().mul_vec(&y)?;
        s.xor_assign(x);
        self.t.mul_vec(&s)
    }

    /// `T^{-1} y + B^t f_k(A T^{-1} y)`; exact even when `f_k` is not injective.
    pub fn round_inverse(&self, key: &BitVector, y: &BitVector) -> Result<BitVector> {
        self.check_state(y)?;
        let z = self.t_inv.mul_vec(y)?;
        let f = self.core.eval_vec(&self.a.mul_vec(&z)?, key)?;
        let mut x = self.b.transpose().mul_vec(&f)?;
        x.xor_assign(&z);
        Ok(x)
    }

    /// The trace `x, F_{k0}(x), F_{k1}(F_{k0}(x)), ...` of length `keys.len() + 1`.
    pub fn iterate(&self, keys: &[BitVector], x: &BitVector) -> Result<Vec<BitVector>> {
        self.check_state(x)?;
        let mut trace = Vec::with_capacity(keys.len() + 1);
        trace.push(x.clone());
        for k in keys {
            let next = self.round_forward(k, trace.last().expect("non-empty"))?;
            trace.push(next);
        }
        Ok(trace)
    }

    /// Undoes [`iterate`](Self::iterate): applies inverse rounds with the keys in reverse.
    pub fn decrypt(&self, keys: &[BitVector], y: &BitVector) -> Result<BitVector> {
        keys.iter()
            .rev()
            .try_fold(y.clone(), |acc, k| self.round_inverse(k, &acc))
    }
}

impl LinearLayers for SchemeSpec {
    fn word_bits(&self) -> usize {
        self.dims.n
    }

    fn compression(&self) -> &BitMatrix {
        &self.a
    }

    fn expansion(&self) -> &BitMatrix {
        &self.b
    }

    fn mixing(&self) -> &BitMatrix {
        &self.t
    }

    fn mixing_inverse(&self) -> &BitMatrix {
        &self.t_inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyed_map::KeyRule;

    fn feistel(n: usize, core: KeyedMap) -> SchemeSpec {
        SchemeSpec::from_matrices(
            Dims::new(n, 2, 1, 1),
            BitMatrix::from_block_pattern(n, &[&[1, 0]]),
            BitMatrix::from_block_pattern(n, &[&[0, 1]]),
            BitMatrix::from_block_pattern(n, &[&[0, 1], &[1, 0]]),
            core,
        )
        .unwrap()
    }

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn validate_rejects_non_perpendicular() {
        let parts = SchemeParts {
            dims: Dims::new(1, 2, 1, 1),
            a: BitMatrix::from_strs(&["10"]).unwrap(),
            b: BitMatrix::from_strs(&["11"]).unwrap(),
            t: BitMatrix::identity(2),
            core: KeyedMap::identity(1, KeyRule::None).unwrap(),
        };
        let report = validate(&parts);
        assert!(!report.is_valid());
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert_eq!(failed, vec!["A B^t = 0"]);
        let err = SchemeSpec::new(parts).unwrap_err().to_string();
        assert!(err.contains("A B^t != 0"), "{err}");
    }

    #[test]
    fn self_dual_one_one_is_perpendicular() {
        let parts = SchemeParts {
            dims: Dims::new(1, 2, 1, 1),
            a: BitMatrix::from_strs(&["11"]).unwrap(),
            b: BitMatrix::from_strs(&["11"]).unwrap(),
            t: BitMatrix::identity(2),
            core: KeyedMap::identity(1, KeyRule::None).unwrap(),
        };
        assert!(validate(&parts).is_valid());
    }

    #[test]
    fn validate_reports_rank_and_widths() {
        let parts = SchemeParts {
            dims: Dims::new(1, 3, 2, 1),
            a: BitMatrix::from_strs(&["110", "110"]).unwrap(),
            b: BitMatrix::from_strs(&["001"]).unwrap(),
            t: BitMatrix::identity(3),
            core: KeyedMap::identity(1, KeyRule::None).unwrap(),
        };
        let report = validate(&parts);
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert_eq!(failed, vec!["core widths", "rank A"]);
    }

    #[test]
    fn feistel_closed_form() {
        // f_k(u) = u + k at n = 1: (x0, x1) -> (x1 + x0 + k, x0)
        let spec = feistel(1, KeyedMap::identity(1, KeyRule::XorPre).unwrap());
        for x in 0..4u64 {
            for k in 0..2u64 {
                let (x0, x1) = (x & 1, x >> 1);
                let y = spec
                    .round_forward(&BitVector::from_u64(1, k), &BitVector::from_u64(2, x))
                    .unwrap();
                assert_eq!(y.to_u64(), (x1 ^ x0 ^ k) | (x0 << 1));
                let back = spec.round_inverse(&BitVector::from_u64(1, k), &y).unwrap();
                assert_eq!(back.to_u64(), x);
            }
        }
    }

    #[test]
    fn zero_core_is_linear() {
        let spec = feistel(2, KeyedMap::zero(2, 2, KeyRule::XorPre).unwrap());
        let k = bv("11");
        for x in 0..16u64 {
            let xv = BitVector::from_u64(4, x);
            let y = spec.round_forward(&k, &xv).unwrap();
            assert_eq!(y, spec.t().mul_vec(&xv).unwrap());
            assert_eq!(spec.round_inverse(&k, &y).unwrap(), xv);
            assert_eq!(
                spec.round_inverse(&k, &xv).unwrap(),
                spec.t_inverse().mul_vec(&xv).unwrap()
            );
        }
    }

    #[test]
    fn iterate_trace_and_decrypt() {
        let spec = feistel(1, KeyedMap::identity(1, KeyRule::XorPre).unwrap());
        let x = bv("10");
        assert_eq!(spec.iterate(&[], &x).unwrap(), vec![x.clone()]);
        // Two rounds with f_k(u) = u + k:
        // (x0,x1) -> (x0+x1+k0, x0) -> (x0+x1+k0 + x0 + k1, x0+x1+k0) = (x1+k0+k1, x0+x1+k0)
        let keys = [bv("1"), bv("0")];
        for s in 0..4u64 {
            let xv = BitVector::from_u64(2, s);
            let trace = spec.iterate(&keys, &xv).unwrap();
            assert_eq!(trace.len(), 3);
            let (x0, x1) = (s & 1, s >> 1);
            let expect = (x1 ^ 1) | ((x0 ^ x1 ^ 1) << 1);
            assert_eq!(trace[2].to_u64(), expect);
            assert_eq!(spec.decrypt(&keys, &trace[2]).unwrap(), xv);
        }
    }

    #[test]
    fn width_errors() {
        let spec = feistel(1, KeyedMap::identity(1, KeyRule::XorPre).unwrap());
        assert!(matches!(
            spec.round_forward(&bv("1"), &bv("101")),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            spec.round_forward(&bv("11"), &bv("10")),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn packed_matches_generic() {
        let core = KeyedMap::from_fn(3, 3, KeyRule::XorPrePost, |x| (x * 5 + 3) % 8).unwrap();
        let spec = feistel(3, core);
        let packed = spec.packed().unwrap();
        let key = bv("101011");
        let rk = spec.prepare_key(&key).unwrap();
        for x in 0..64u64 {
            let xv = BitVector::from_u64(6, x);
            let y = spec.round_forward(&key, &xv).unwrap();
            assert_eq!(packed.forward(x, &rk), y.to_u64());
            assert_eq!(packed.inverse(y.to_u64(), &rk), x);
        }
    }

    #[test]
    fn compressed_input_survives_the_round() {
        // A T^{-1} F(x) = A x
        let core = KeyedMap::from_fn(2, 2, KeyRule::XorPre, |x| x * x % 4).unwrap();
        let spec = feistel(2, core);
        let k = bv("01");
        for x in 0..16u64 {
            let xv = BitVector::from_u64(4, x);
            let y = spec.round_forward(&k, &xv).unwrap();
            let lhs = spec
                .a()
                .mul_vec(&spec.t_inverse().mul_vec(&y).unwrap())
                .unwrap();
            assert_eq!(lhs, spec.a().mul_vec(&xv).unwrap());
        }
    }
}
