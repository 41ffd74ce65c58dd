//! The keyed nonlinear core `f_k`: a lookup table plus a key-incorporation rule.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Largest input width for which a full table is held in memory.
pub const MAX_TABLE_BITS: usize = 24;

/// How the round key enters the table lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyRule {
    /// `f(x)`, no key.
    None,
    /// `f(x + k)` with a `d1`-bit key.
    XorPre,
    /// `f(x + k1) + k2` with `k = k1 | k2`, `d1 + d2` bits.
    XorPrePost,
    /// `S(x) + k` where the table holds a linear map such as a coordinate swap;
    /// `d1 = d2` key bits.
    SwapPlusKey,
}

impl KeyRule {
    pub fn name(self) -> &'static str {
        match self {
            KeyRule::None => "none",
            KeyRule::XorPre => "xor-pre",
            KeyRule::XorPrePost => "xor-pre-post",
            KeyRule::SwapPlusKey => "swap-plus-key",
        }
    }

    pub fn key_bits(self, d1: usize, d2: usize) -> usize {
        match self {
            KeyRule::None => 0,
            KeyRule::XorPre => d1,
            KeyRule::XorPrePost => d1 + d2,
            KeyRule::SwapPlusKey => d2,
        }
    }
}

impl FromStr for KeyRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => KeyRule::None,
            "xor-pre" => KeyRule::XorPre,
            "xor-pre-post" => KeyRule::XorPrePost,
            "swap-plus-key" => KeyRule::SwapPlusKey,
            other => return Err(Error::Argument(format!("unknown key rule '{other}'"))),
        })
    }
}

impl fmt::Display for KeyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A key split into its input and output masks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundKey {
    pub pre: u64,
    pub post: u64,
}

/// Vectorial map GF(2)^d1 -> GF(2)^d2 given by its table. Entry `i` is the
/// output for the input whose coordinate `j` is bit `j` of `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KeyedMap {
    d1: usize,
    d2: usize,
    table: Vec<u64>,
    rule: KeyRule,
}

impl KeyedMap {
    pub fn new(d1: usize, d2: usize, table: Vec<u64>, rule: KeyRule) -> Result<Self> {
        if d1 > MAX_TABLE_BITS {
            return Err(Error::Resource(format!(
                "table input width {d1} exceeds {MAX_TABLE_BITS} bits"
            )));
        }
        if d2 > 64 {
            return Err(Error::Argument(format!(
                "output width {d2} exceeds 64 bits"
            )));
        }
        if table.len() != 1 << d1 {
            return Err(Error::Argument(format!(
                "table has {} entries, expected 2^{d1}",
                table.len()
            )));
        }
        let limit = crate::gf2::mask(d2);
        if let Some(i) = table.iter().position(|&y| y & !limit != 0) {
            return Err(Error::Argument(format!(
                "table entry {i} does not fit in {d2} bits"
            )));
        }
        if rule == KeyRule::SwapPlusKey && d1 != d2 {
            return Err(Error::Argument(format!(
                "swap-plus-key needs d1 = d2, got {d1} and {d2}"
            )));
        }
        Ok(KeyedMap {
            d1,
            d2,
            table,
            rule,
        })
    }

    pub fn from_fn(d1: usize, d2: usize, rule: KeyRule, f: impl Fn(u64) -> u64) -> Result<Self> {
        if d1 > MAX_TABLE_BITS {
            return Err(Error::Resource(format!(
                "table input width {d1} exceeds {MAX_TABLE_BITS} bits"
            )));
        }
        Self::new(d1, d2, (0..1u64 << d1).map(f).collect(), rule)
    }

    pub fn zero(d1: usize, d2: usize, rule: KeyRule) -> Result<Self> {
        Self::from_fn(d1, d2, rule, |_| 0)
    }

    pub fn identity(d: usize, rule: KeyRule) -> Result<Self> {
        Self::from_fn(d, d, rule, |x| x)
    }

    /// The coordinate reversal `x_j -> x_{d-1-j}`; for two coordinates this is
    /// the swap `(x0, x1) -> (x1, x0)`.
    pub fn swap(d: usize) -> Result<Self> {
        Self::from_fn(d, d, KeyRule::SwapPlusKey, |x| {
            (0..d).fold(0, |acc, j| acc | (((x >> j) & 1) << (d - 1 - j)))
        })
    }

    pub fn random<R: Rng + ?Sized>(
        d1: usize,
        d2: usize,
        rule: KeyRule,
        rng: &mut R,
    ) -> Result<Self> {
        let m = crate::gf2::mask(d2);
        Self::from_fn(d1, d2, rule, |_| 0).map(|mut k| {
            k.table
                .iter_mut()
                .for_each(|y| *y = rng.random::<u64>() & m);
            k
        })
    }

    pub fn random_permutation<R: Rng + ?Sized>(
        d: usize,
        rule: KeyRule,
        rng: &mut R,
    ) -> Result<Self> {
        let mut table: Vec<u64> = (0..1u64 << d).collect();
        table.shuffle(rng);
        Self::new(d, d, table, rule)
    }

    pub fn input_bits(&self) -> usize {
        self.d1
    }

    pub fn output_bits(&self) -> usize {
        self.d2
    }

    pub fn rule(&self) -> KeyRule {
        self.rule
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn key_bits(&self) -> usize {
        self.rule.key_bits(self.d1, self.d2)
    }

    pub fn is_permutation(&self) -> bool {
        if self.d1 != self.d2 {
            return false;
        }
        let mut seen = vec![false; self.table.len()];
        self.table
            .iter()
            .all(|&y| !std::mem::replace(&mut seen[y as usize], true))
    }

    pub fn prepare_key(&self, key: &BitVector) -> Result<RoundKey> {
        if key.len() != self.key_bits() {
            return Err(Error::Argument(format!(
                "key has {} bits, rule {} needs {}",
                key.len(),
                self.rule,
                self.key_bits()
            )));
        }
        let packed = |v: BitVector| -> Result<u64> {
            if v.len() > 64 {
                return Err(Error::Argument("key part wider than 64 bits".into()));
            }
            Ok(v.to_u64())
        };
        Ok(match self.rule {
            KeyRule::None => RoundKey::default(),
            KeyRule::XorPre => RoundKey {
                pre: packed(key.clone())?,
                post: 0,
            },
            KeyRule::XorPrePost => RoundKey {
                pre: packed(key.slice(0, self.d1))?,
                post: packed(key.slice(self.d1, self.d1 + self.d2))?,
            },
            KeyRule::SwapPlusKey => RoundKey {
                pre: 0,
                post: packed(key.clone())?,
            },
        })
    }

    /// Key with every bit zero.
    pub fn zero_key(&self) -> BitVector {
        BitVector::zeros(self.key_bits())
    }

    #[inline]
    pub fn eval(&self, x: u64, key: &RoundKey) -> u64 {
        self.table[(x ^ key.pre) as usize] ^ key.post
    }

    pub fn eval_vec(&self, x: &BitVector, key: &BitVector) -> Result<BitVector> {
        if x.len() != self.d1 {
            return Err(Error::Shape(format!(
                "core input has {} bits, expected {}",
                x.len(),
                self.d1
            )));
        }
        let k = self.prepare_key(key)?;
        Ok(BitVector::from_u64(self.d2, self.eval(x.to_u64(), &k)))
    }

    /// The table with the key folded in.
    pub fn keyed_table(&self, key: &RoundKey) -> Vec<u64> {
        (0..self.table.len() as u64)
            .map(|x| self.eval(x, key))
            .collect()
    }

    /// `(S, c)` with `table[x] = S x + c` for every `x`, when the table is affine.
    pub fn as_affine(&self) -> Option<(BitMatrix, BitVector)> {
        let c = self.table[0];
        let cols: Vec<u64> = (0..self.d1).map(|j| self.table[1 << j] ^ c).collect();
        let s = BitMatrix::from_fn(self.d2, self.d1, |i, j| (cols[j] >> i) & 1 == 1);
        let linear_ok = self.table.iter().enumerate().all(|(x, &y)| {
            let lin = crate::gf2::combine_row_masks(&cols, x as u64);
            y == lin ^ c
        });
        linear_ok.then(|| (s, BitVector::from_u64(self.d2, c)))
    }

    /// `nlmap v1` text: header, `d1`, `d2`, `key_rule`, then one output per line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "nlmap v1\nd1 {}\nd2 {}\nkey_rule {}\n",
            self.d1, self.d2, self.rule
        );
        for &y in &self.table {
            s.push_str(&BitVector::from_u64(self.d2, y).to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
        };
        let (ln, header) = next("header")?;
        if header != "nlmap v1" {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected 'nlmap v1', got '{header}'"),
            });
        }
        let d1: usize = parse_field(next("d1")?, "d1")?;
        let d2: usize = parse_field(next("d2")?, "d2")?;
        let rule: KeyRule = parse_field(next("key_rule")?, "key_rule")?;
        if d1 > MAX_TABLE_BITS {
            return Err(Error::Resource(format!(
                "table input width {d1} exceeds {MAX_TABLE_BITS} bits"
            )));
        }
        let mut table = Vec::with_capacity(1 << d1);
        for i in 0..1usize << d1 {
            let (ln, line) = next(&format!("table entry {i}"))?;
            let v = BitVector::parse_exact(line, d2).map_err(|e| Error::Parse {
                line: ln,
                msg: e.to_string(),
            })?;
            table.push(v.to_u64());
        }
        if let Some((ln, extra)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(Error::Parse {
                line: ln,
                msg: format!("trailing content '{extra}'"),
            });
        }
        KeyedMap::new(d1, d2, table, rule)
    }
}

/// Parses a `name value` line.
pub(crate) fn parse_field<T: FromStr>((line, text): (usize, &str), name: &str) -> Result<T> {
    let value = text
        .strip_prefix(name)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected '{name} <value>', got '{text}'"),
        })?;
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value '{value}' for {name}"),
    })
}
