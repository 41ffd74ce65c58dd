//! Rounds with several nonlinear branches sharing one block-diagonal mixing map:
//! `T̄ (x + Σ_j B_j^t f_j(A_j x))` with `T̄ = diag(T, ..., T)`.

use crate::error::{shape, Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::keyed_map::KeyedMap;
use crate::sandwich::{LinearLayers, SchemeSpec};

#[derive(Clone, Debug)]
pub struct Branch {
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub core: KeyedMap,
}

#[derive(Clone, Debug)]
pub struct MultiBranchParts {
    /// Word size in bits.
    pub n: usize,
    /// Words per copy of the base mixing map.
    pub words: usize,
    /// Number of diagonal copies of `t_base`.
    pub copies: usize,
    pub t_base: BitMatrix,
    pub branches: Vec<Branch>,
}

/// A validated multi-branch round. Every `A_i` is perpendicular to every `B_j`,
/// which is what makes the branch sum invertible.
#[derive(Clone, Debug)]
pub struct MultiBranchSpec {
    n: usize,
    words: usize,
    copies: usize,
    t_base: BitMatrix,
    t_bar: BitMatrix,
    t_bar_inv: BitMatrix,
    branches: Vec<Branch>,
    stacked_a: BitMatrix,
    stacked_b: BitMatrix,
}

impl MultiBranchSpec {
    pub fn new(parts: MultiBranchParts) -> Result<Self> {
        let MultiBranchParts {
            n,
            words,
            copies,
            t_base,
            branches,
        } = parts;
        if n == 0 || words == 0 || copies == 0 || branches.is_empty() {
            return Err(Error::Validation(
                "need n, N, copies and branch count all positive".into(),
            ));
        }
        if t_base.rows() != n * words || !t_base.is_square() {
            return Err(Error::Validation(format!(
                "T shape {}x{}, expected {}x{}",
                t_base.rows(),
                t_base.cols(),
                n * words,
                n * words
            )));
        }
        let t_bar = BitMatrix::block_diag(&vec![&t_base; copies]);
        let t_bar_inv = t_bar
            .invert()
            .map_err(|e| Error::Validation(format!("T invertible ({e})")))?;
        let width = t_bar.rows();
        for (j, br) in branches.iter().enumerate() {
            let label = j + 1;
            if br.a.cols() != width || br.b.cols() != width {
                return Err(Error::Validation(format!(
                    "branch {label}: A_{label} and B_{label} need {width} columns"
                )));
            }
            if br.a.rank() != br.a.rows() {
                return Err(Error::Validation(format!(
                    "branch {label}: rank A_{label} = {} of {} rows",
                    br.a.rank(),
                    br.a.rows()
                )));
            }
            if br.b.rank() != br.b.rows() {
                return Err(Error::Validation(format!(
                    "branch {label}: rank B_{label} = {} of {} rows",
                    br.b.rank(),
                    br.b.rows()
                )));
            }
            if br.core.input_bits() != br.a.rows() || br.core.output_bits() != br.b.rows() {
                return Err(Error::Validation(format!(
                    "branch {label}: core maps {} -> {} bits, expected {} -> {}",
                    br.core.input_bits(),
                    br.core.output_bits(),
                    br.a.rows(),
                    br.b.rows()
                )));
            }
        }
        for (i, bi) in branches.iter().enumerate() {
            for (j, bj) in branches.iter().enumerate() {
                if !bi.a.mul(&bj.b.transpose())?.is_zero() {
                    return Err(Error::Perpendicularity { i: i + 1, j: j + 1 });
                }
            }
        }
        let stacked = |pick: fn(&Branch) -> &BitMatrix| {
            branches
                .iter()
                .skip(1)
                .try_fold(pick(&branches[0]).clone(), |acc, br| acc.vstack(pick(br)))
        };
        let stacked_a = stacked(|b| &b.a)?;
        let stacked_b = stacked(|b| &b.b)?;
        Ok(MultiBranchSpec {
            n,
            words,
            copies,
            t_base,
            t_bar,
            t_bar_inv,
            branches,
            stacked_a,
            stacked_b,
        })
    }

    /// The single-branch round seen as a multi-branch round with one copy.
    pub fn from_single(spec: &SchemeSpec) -> Result<Self> {
        Self::new(MultiBranchParts {
            n: spec.dims().n,
            words: spec.dims().words,
            copies: 1,
            t_base: spec.t().clone(),
            branches: vec![Branch {
                a: spec.a().clone(),
                b: spec.b().clone(),
                core: spec.core().clone(),
            }],
        })
    }

    pub fn parts(&self) -> MultiBranchParts {
        MultiBranchParts {
            n: self.n,
            words: self.words,
            copies: self.copies,
            t_base: self.t_base.clone(),
            branches: self.branches.clone(),
        }
    }

    pub fn word_size(&self) -> usize {
        self.n
    }

    pub fn words_per_copy(&self) -> usize {
        self.words
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn t_base(&self) -> &BitMatrix {
        &self.t_base
    }

    pub fn t_bar(&self) -> &BitMatrix {
        &self.t_bar
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn state_bits(&self) -> usize {
        self.t_bar.rows()
    }

    fn check(&self, keys: &[BitVector], x: &BitVector) -> Result<()> {
        if keys.len() != self.branches.len() {
            return Err(Error::Argument(format!(
                "{} branch keys given, need {}",
                keys.len(),
                self.branches.len()
            )));
        }
        if x.len() != self.state_bits() {
            return Err(shape(format!(
                "state has {} bits, expected {}",
                x.len(),
                self.state_bits()
            )));
        }
        Ok(())
    }

    fn branch_sum(&self, keys: &[BitVector], x: &BitVector) -> Result<BitVector> {
        let mut acc = BitVector::zeros(self.state_bits());
        for (br, k) in self.branches.iter().zip(keys) {
            let y = br.core.eval_vec(&br.a.mul_vec(x)?, k)?;
            acc.xor_assign(&br.b.transpose().mul_vec(&y)?);
        }
        Ok(acc)
    }

    pub fn forward(&self, keys: &[BitVector], x: &BitVector) -> Result<BitVector> {
        self.check(keys, x)?;
        let mut s = self.branch_sum(keys, x)?;
        s.xor_assign(x);
        self.t_bar.mul_vec(&s)
    }

    pub fn inverse(&self, keys: &[BitVector], y: &BitVector) -> Result<BitVector> {
        self.check(keys, y)?;
        let z = self.t_bar_inv.mul_vec(y)?;
        let mut x = self.branch_sum(keys, &z)?;
        x.xor_assign(&z);
        Ok(x)
    }
}

impl LinearLayers for MultiBranchSpec {
    fn word_bits(&self) -> usize {
        self.n
    }

    fn compression(&self) -> &BitMatrix {
        &self.stacked_a
    }

    fn expansion(&self) -> &BitMatrix {
        &self.stacked_b
    }

    fn mixing(&self) -> &BitMatrix {
        &self.t_bar
    }

    fn mixing_inverse(&self) -> &BitMatrix {
        &self.t_bar_inv
    }
}
