//! Exact difference-distribution and correlation tables, the whole-round
//! reductions to the core's tables, and brute-force oracles over all states.
//!
//! Conventions: `D[u][v] = #{x : f(x + u) + f(x) = v}` and
//! `Λ[u][v] = Σ_x (-1)^{v·f(x) + u·x}`, both over the `2^d1` inputs of `f`.

use std::fmt;
use std::sync::OnceLock;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf2::{mask, BitVector};
use crate::keyed_map::{KeyedMap, RoundKey};
use crate::sandwich::SchemeSpec;

/// Default input width above which whole tables are refused.
pub const DEFAULT_LIMIT_BITS: usize = 20;
/// Whole tables hold at most `2^TABLE_ENTRY_BITS` entries.
pub const TABLE_ENTRY_BITS: usize = 24;
/// Default state width for the brute-force oracles.
pub const DEFAULT_ORACLE_BITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    Differential,
    Correlation,
}

impl SpectrumKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Differential => "differential",
            SpectrumKind::Correlation => "correlation",
        }
    }
}

/// A full `2^d1 x 2^d2` table, row `u`, column `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumTable {
    pub kind: SpectrumKind,
    pub d1: usize,
    pub d2: usize,
    entries: Vec<i32>,
}

impl SpectrumTable {
    pub fn get(&self, u: u64, v: u64) -> i32 {
        self.entries[((u as usize) << self.d2) | v as usize]
    }

    pub fn row(&self, u: u64) -> &[i32] {
        let w = 1usize << self.d2;
        &self.entries[u as usize * w..(u as usize + 1) * w]
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    /// The entry as a fraction of `2^d1`.
    pub fn value(&self, u: u64, v: u64) -> Dyadic {
        Dyadic::new(self.get(u, v), self.d1 as u32)
    }

    /// Largest entry (absolute value for correlations) over rows `u != 0` in
    /// column `v`, or over columns `v != 0` in row `u`; see callers.
    pub fn max_abs_where(&self, mut keep: impl FnMut(u64, u64) -> bool) -> i32 {
        let w = 1u64 << self.d2;
        let mut best = 0;
        for (i, &e) in self.entries.iter().enumerate() {
            let (u, v) = (i as u64 / w, i as u64 % w);
            if keep(u, v) {
                best = best.max(e.abs());
            }
        }
        best
    }

    /// Violations of the structural identities every table of its kind obeys.
    pub fn invariant_violations(&self) -> Vec<String> {
        let full = 1i64 << self.d1;
        let mut bad = Vec::new();
        let rows = 1u64 << self.d1;
        match self.kind {
            SpectrumKind::Differential => {
                if self.get(0, 0) as i64 != full {
                    bad.push(format!("D[0][0] = {}, expected {full}", self.get(0, 0)));
                }
                for u in 0..rows {
                    let row = self.row(u);
                    let sum: i64 = row.iter().map(|&e| e as i64).sum();
                    if sum != full {
                        bad.push(format!("row {u} sums to {sum}, expected {full}"));
                    }
                    if let Some(v) = row.iter().position(|&e| e < 0 || e as i64 > full) {
                        bad.push(format!("D[{u}][{v}] = {} out of range", row[v]));
                    }
                    if u != 0 {
                        if let Some(v) = row.iter().position(|&e| e % 2 != 0) {
                            bad.push(format!("D[{u}][{v}] = {} is odd", row[v]));
                        }
                    }
                }
            }
            SpectrumKind::Correlation => {
                if self.get(0, 0) as i64 != full {
                    bad.push(format!("L[0][0] = {}, expected {full}", self.get(0, 0)));
                }
                if let Some(i) = self.entries.iter().position(|&e| (e as i64).abs() > full) {
                    bad.push(format!("entry {i} = {} exceeds 2^d1", self.entries[i]));
                }
                for v in 0..1u64 << self.d2 {
                    let energy: i64 = (0..rows).map(|u| (self.get(u, v) as i64).pow(2)).sum();
                    if energy != full * full {
                        bad.push(format!(
                            "column {v}: sum of squares {energy}, expected {}",
                            full * full
                        ));
                    }
                }
            }
        }
        bad
    }

    /// Header `u,0,1,...` then one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u");
        for v in 0..1u64 << self.d2 {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        for u in 0..1u64 << self.d1 {
            out.push_str(&csv_row(u, self.row(u)));
        }
        out
    }
}

pub fn csv_row(u: u64, row: &[i32]) -> String {
    let mut line = u.to_string();
    for e in row {
        line.push(',');
        line.push_str(&e.to_string());
    }
    line.push('\n');
    line
}

fn check_table_limits(map: &KeyedMap, limit_bits: usize, whole: bool) -> Result<()> {
    let (d1, d2) = (map.input_bits(), map.output_bits());
    if d1 > limit_bits {
        return Err(Error::Resource(format!(
            "input width {d1} exceeds the limit of {limit_bits} bits; raise the limit or query single rows"
        )));
    }
    let entry_bits = if whole { d1 + d2 } else { d2 };
    if entry_bits > TABLE_ENTRY_BITS {
        return Err(Error::Resource(format!(
            "table would hold 2^{entry_bits} entries (limit 2^{TABLE_ENTRY_BITS}); {}",
            if whole {
                "query single rows instead"
            } else {
                "query single entries instead"
            }
        )));
    }
    Ok(())
}

fn check_index(name: &str, value: u64, bits: usize) -> Result<()> {
    if value & !mask(bits) != 0 {
        return Err(Error::Argument(format!(
            "{name} = {value} does not fit in {bits} bits"
        )));
    }
    Ok(())
}

fn fill_ddt_row(keyed: &[u64], u: u64, row: &mut [i32]) {
    row.fill(0);
    for (x, &y) in keyed.iter().enumerate() {
        row[(keyed[x ^ u as usize] ^ y) as usize] += 1;
    }
}

fn fill_lat_row(keyed: &[u64], u: u64, row: &mut [i32]) {
    row.fill(0);
    for (x, &y) in keyed.iter().enumerate() {
        let sign = ((x as u64 & u).count_ones() & 1) as i32;
        row[y as usize] += 1 - 2 * sign;
    }
    walsh_hadamard(row);
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `out[v] = Σ_y in[y] (-1)^{v·y}`.
pub fn walsh_hadamard(v: &mut [i32]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

pub fn ddt(
    map: &KeyedMap,
    key: &RoundKey,
    limit_bits: usize,
    exec: Execution,
) -> Result<SpectrumTable> {
    check_table_limits(map, limit_bits, true)?;
    let keyed = map.keyed_table(key);
    let (d1, d2) = (map.input_bits(), map.output_bits());
    let mut entries = vec![0i32; 1 << (d1 + d2)];
    exec.fill_chunks(&mut entries, 1 << d2, |u, row| {
        fill_ddt_row(&keyed, u as u64, row)
    });
    Ok(SpectrumTable {
        kind: SpectrumKind::Differential,
        d1,
        d2,
        entries,
    })
}

pub fn lat(
    map: &KeyedMap,
    key: &RoundKey,
    limit_bits: usize,
    exec: Execution,
) -> Result<SpectrumTable> {
    check_table_limits(map, limit_bits, true)?;
    let keyed = map.keyed_table(key);
    let (d1, d2) = (map.input_bits(), map.output_bits());
    let mut entries = vec![0i32; 1 << (d1 + d2)];
    exec.fill_chunks(&mut entries, 1 << d2, |u, row| {
        fill_lat_row(&keyed, u as u64, row)
    });
    Ok(SpectrumTable {
        kind: SpectrumKind::Correlation,
        d1,
        d2,
        entries,
    })
}

/// Row `u` of the difference table.
pub fn ddt_row(map: &KeyedMap, key: &RoundKey, u: u64) -> Result<Vec<i32>> {
    check_table_limits(map, usize::MAX, false)?;
    check_index("u", u, map.input_bits())?;
    let mut row = vec![0; 1 << map.output_bits()];
    fill_ddt_row(&map.keyed_table(key), u, &mut row);
    Ok(row)
}

/// Row `u` of the correlation table.
pub fn lat_row(map: &KeyedMap, key: &RoundKey, u: u64) -> Result<Vec<i32>> {
    check_table_limits(map, usize::MAX, false)?;
    check_index("u", u, map.input_bits())?;
    let mut row = vec![0; 1 << map.output_bits()];
    fill_lat_row(&map.keyed_table(key), u, &mut row);
    Ok(row)
}

/// `D[u][v]` by a single pass over the inputs.
pub fn diff_count(map: &KeyedMap, key: &RoundKey, u: u64, v: u64) -> i64 {
    (0..1u64 << map.input_bits())
        .filter(|&x| map.eval(x ^ u, key) ^ map.eval(x, key) == v)
        .count() as i64
}

/// `Λ[u][v]` by a single pass over the inputs.
pub fn walsh_sum(map: &KeyedMap, key: &RoundKey, u: u64, v: u64) -> i64 {
    (0..1u64 << map.input_bits())
        .map(|x| {
            let bit = ((map.eval(x, key) & v).count_ones() + (x & u).count_ones()) & 1;
            1 - 2 * bit as i64
        })
        .sum()
}

/// A whole-round coefficient expressed through the core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCoefficient {
    pub value: Dyadic,
    /// Whether the rowspace condition held.
    pub active: bool,
    /// The pair looked up in the core's table, when active.
    pub core_pair: Option<(BitVector, BitVector)>,
}

impl fmt::Display for ReducedCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} active={}", self.value.exact_string(), self.active)?;
        if let Some((u, v)) = &self.core_pair {
            write!(f, " core=({u},{v})")?;
        }
        Ok(())
    }
}

/// Evaluates the reductions for one round key, caching the core's tables once
/// they are first needed.
pub struct Reducer<'a> {
    spec: &'a SchemeSpec,
    key: RoundKey,
    ddt: OnceLock<SpectrumTable>,
    lat: OnceLock<SpectrumTable>,
}

impl<'a> Reducer<'a> {
    pub fn new(spec: &'a SchemeSpec, key: &BitVector) -> Result<Self> {
        Ok(Reducer {
            spec,
            key: spec.prepare_key(key)?,
            ddt: OnceLock::new(),
            lat: OnceLock::new(),
        })
    }

    fn tables_fit(&self) -> bool {
        let core = self.spec.core();
        core.input_bits() + core.output_bits() <= 16
    }

    fn core_diff(&self, u: u64, v: u64) -> i64 {
        if self.tables_fit() {
            let t = self.ddt.get_or_init(|| {
                ddt(
                    self.spec.core(),
                    &self.key,
                    usize::MAX,
                    Execution::Sequential,
                )
                .expect("fits")
            });
            t.get(u, v) as i64
        } else {
            diff_count(self.spec.core(), &self.key, u, v)
        }
    }

    fn core_corr(&self, u: u64, v: u64) -> i64 {
        if self.tables_fit() {
            let t = self.lat.get_or_init(|| {
                lat(
                    self.spec.core(),
                    &self.key,
                    usize::MAX,
                    Execution::Sequential,
                )
                .expect("fits")
            });
            t.get(u, v) as i64
        } else {
            walsh_sum(self.spec.core(), &self.key, u, v)
        }
    }

    fn check(&self, alpha: &BitVector, beta: &BitVector) -> Result<()> {
        let bits = self.spec.dims().state_bits();
        if alpha.len() != bits || beta.len() != bits {
            return Err(Error::Shape(format!(
                "alpha and beta need {bits} bits, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(())
    }

    /// `δ_F(α, β)`: zero unless `α + T^{-1}β ∈ rowsp(B)`, else
    /// `δ_f(Aα, R_B^t(α + T^{-1}β))`.
    pub fn diff(&self, alpha: &BitVector, beta: &BitVector) -> Result<ReducedCoefficient> {
        self.check(alpha, beta)?;
        let spec = self.spec;
        let mut w = spec.t_inverse().mul_vec(beta)?;
        w.xor_assign(alpha);
        if !spec.row_space_b().contains(&w) {
            return Ok(inactive());
        }
        let v = spec.right_inverse_b().apply_transpose(&w);
        assert_eq!(spec.b().transpose().mul_vec(&v)?, w, "B^t R_B^t w != w");
        let u = spec.a().mul_vec(alpha)?;
        let count = self.core_diff(u.to_u64(), v.to_u64());
        Ok(ReducedCoefficient {
            value: Dyadic::new(count, spec.core().input_bits() as u32),
            active: true,
            core_pair: Some((u, v)),
        })
    }

    /// `λ_F(α, β)`: zero unless `α + T^t β ∈ rowsp(A)`, else `λ_f(a, b)` with
    /// `a = R_A^t(α + T^t β)` and `b = B T^t β`.
    pub fn corr(&self, alpha: &BitVector, beta: &BitVector) -> Result<ReducedCoefficient> {
        self.check(alpha, beta)?;
        let spec = self.spec;
        let tb = spec.t_transpose().mul_vec(beta)?;
        let w = tb.xor(alpha);
        if !spec.row_space_a().contains(&w) {
            return Ok(inactive());
        }
        let a = spec.right_inverse_a().apply_transpose(&w);
        assert_eq!(spec.a().transpose().mul_vec(&a)?, w, "A^t R_A^t w != w");
        let b = spec.b().mul_vec(&tb)?;
        let sum = self.core_corr(a.to_u64(), b.to_u64());
        Ok(ReducedCoefficient {
            value: Dyadic::new(sum, spec.core().input_bits() as u32),
            active: true,
            core_pair: Some((a, b)),
        })
    }
}

fn inactive() -> ReducedCoefficient {
    ReducedCoefficient {
        value: Dyadic::zero(),
        active: false,
        core_pair: None,
    }
}

pub fn reduce_diff(
    spec: &SchemeSpec,
    key: &BitVector,
    alpha: &BitVector,
    beta: &BitVector,
) -> Result<ReducedCoefficient> {
    Reducer::new(spec, key)?.diff(alpha, beta)
}

pub fn reduce_corr(
    spec: &SchemeSpec,
    key: &BitVector,
    alpha: &BitVector,
    beta: &BitVector,
) -> Result<ReducedCoefficient> {
    Reducer::new(spec, key)?.corr(alpha, beta)
}

/// The round as a table over all states.
fn round_table(
    spec: &SchemeSpec,
    key: &BitVector,
    limit_bits: usize,
    exec: Execution,
) -> Result<Vec<u64>> {
    let bits = spec.dims().state_bits();
    if bits > limit_bits.min(TABLE_ENTRY_BITS) {
        return Err(Error::Resource(format!(
            "state width {bits} exceeds the oracle limit of {} bits",
            limit_bits.min(TABLE_ENTRY_BITS)
        )));
    }
    let round = spec.packed()?;
    let k = spec.prepare_key(key)?;
    Ok(exec.map(1 << bits, |x| round.forward(x as u64, &k)))
}

fn state_arg(spec: &SchemeSpec, v: &BitVector) -> Result<u64> {
    let bits = spec.dims().state_bits();
    if v.len() != bits {
        return Err(Error::Shape(format!(
            "expected {bits} bits, got {}",
            v.len()
        )));
    }
    Ok(v.to_u64())
}

/// `δ_F(α, β)` counted directly over all states.
pub fn brute_diff(
    spec: &SchemeSpec,
    key: &BitVector,
    alpha: &BitVector,
    beta: &BitVector,
    limit_bits: usize,
) -> Result<Dyadic> {
    let (a, b) = (state_arg(spec, alpha)?, state_arg(spec, beta)?);
    let f = round_table(spec, key, limit_bits, Execution::Sequential)?;
    let count = (0..f.len())
        .filter(|&x| f[x ^ a as usize] ^ f[x] == b)
        .count();
    Ok(Dyadic::new(count as i64, f.len().trailing_zeros()))
}

/// `λ_F(α, β)` summed directly over all states.
pub fn brute_corr(
    spec: &SchemeSpec,
    key: &BitVector,
    alpha: &BitVector,
    beta: &BitVector,
    limit_bits: usize,
) -> Result<Dyadic> {
    let (a, b) = (state_arg(spec, alpha)?, state_arg(spec, beta)?);
    let f = round_table(spec, key, limit_bits, Execution::Sequential)?;
    Ok(Dyadic::new(naive_walsh(&f, a, b), f.len().trailing_zeros()))
}

fn naive_walsh(f: &[u64], a: u64, b: u64) -> i64 {
    f.iter()
        .enumerate()
        .map(|(x, &y)| 1 - 2 * (((x as u64 & a).count_ones() + (y & b).count_ones()) & 1) as i64)
        .sum()
}

/// The whole-round difference table, rows `α`, columns `β`, by direct counting.
pub fn brute_ddt(
    spec: &SchemeSpec,
    key: &BitVector,
    limit_bits: usize,
    exec: Execution,
) -> Result<SpectrumTable> {
    let f = round_table(spec, key, limit_bits.min(TABLE_ENTRY_BITS / 2), exec)?;
    let bits = spec.dims().state_bits();
    let mut entries = vec![0i32; 1 << (2 * bits)];
    exec.fill_chunks(&mut entries, 1 << bits, |a, row| {
        fill_ddt_row(&f, a as u64, row)
    });
    Ok(SpectrumTable {
        kind: SpectrumKind::Differential,
        d1: bits,
        d2: bits,
        entries,
    })
}

/// The whole-round correlation table by the naive double sum (no transform).
pub fn brute_lat(
    spec: &SchemeSpec,
    key: &BitVector,
    limit_bits: usize,
    exec: Execution,
) -> Result<SpectrumTable> {
    let f = round_table(spec, key, limit_bits.min(TABLE_ENTRY_BITS / 2), exec)?;
    let bits = spec.dims().state_bits();
    let mut entries = vec![0i32; 1 << (2 * bits)];
    exec.fill_chunks(&mut entries, 1 << bits, |a, row| {
        for (b, e) in row.iter_mut().enumerate() {
            *e = naive_walsh(&f, a as u64, b as u64) as i32;
        }
    });
    Ok(SpectrumTable {
        kind: SpectrumKind::Correlation,
        d1: bits,
        d2: bits,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub alpha: u64,
    pub beta: u64,
    pub reduced: Dyadic,
    pub brute: Dyadic,
}

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub state_bits: usize,
    pub pairs: u64,
    pub diff_mismatches: Vec<Mismatch>,
    pub corr_mismatches: Vec<Mismatch>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.diff_mismatches.is_empty() && self.corr_mismatches.is_empty()
    }
}

/// Compares both reductions with the brute-force tables on every `(α, β)`.
pub fn oracle_check(
    spec: &SchemeSpec,
    key: &BitVector,
    limit_bits: usize,
    exec: Execution,
) -> Result<OracleReport> {
    let bits = spec.dims().state_bits();
    let brute_d = brute_ddt(spec, key, limit_bits, exec)?;
    let brute_l = brute_lat(spec, key, limit_bits, exec)?;
    let reducer = Reducer::new(spec, key)?;
    let per_alpha = exec.map(1 << bits, |a| {
        let alpha = BitVector::from_u64(bits, a as u64);
        let mut dm = Vec::new();
        let mut cm = Vec::new();
        for b in 0..1u64 << bits {
            let beta = BitVector::from_u64(bits, b);
            let rd = reducer.diff(&alpha, &beta).expect("shapes match").value;
            let bd = brute_d.value(a as u64, b);
            if rd != bd {
                dm.push(Mismatch {
                    alpha: a as u64,
                    beta: b,
                    reduced: rd,
                    brute: bd,
                });
            }
            let rc = reducer.corr(&alpha, &beta).expect("shapes match").value;
            let bc = brute_l.value(a as u64, b);
            if rc != bc {
                cm.push(Mismatch {
                    alpha: a as u64,
                    beta: b,
                    reduced: rc,
                    brute: bc,
                });
            }
        }
        (dm, cm)
    });
    let mut report = OracleReport {
        state_bits: bits,
        pairs: 1 << (2 * bits),
        ..Default::default()
    };
    for (dm, cm) in per_alpha {
        report.diff_mismatches.extend(dm);
        report.corr_mismatches.extend(cm);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;
    use crate::keyed_map::KeyRule;
    use crate::sandwich::Dims;

    const NO_KEY: RoundKey = RoundKey { pre: 0, post: 0 };

    /// `x -> x^3` in GF(2^3) modulo `x^3 + x + 1`.
    fn cube() -> KeyedMap {
        let mul = |a: u64, b: u64| {
            let mut r = 0;
            for i in 0..3 {
                if (b >> i) & 1 == 1 {
                    r ^= a << i;
                }
            }
            for i in (3..5).rev() {
                if (r >> i) & 1 == 1 {
                    r ^= 0b1011 << (i - 3);
                }
            }
            r
        };
        KeyedMap::from_fn(3, 3, KeyRule::XorPre, |x| mul(mul(x, x), x)).unwrap()
    }

    fn feistel1() -> SchemeSpec {
        SchemeSpec::from_matrices(
            Dims::new(1, 2, 1, 1),
            BitMatrix::from_strs(&["10"]).unwrap(),
            BitMatrix::from_strs(&["01"]).unwrap(),
            BitMatrix::from_strs(&["01", "10"]).unwrap(),
            KeyedMap::identity(1, KeyRule::XorPre).unwrap(),
        )
        .unwrap()
    }

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn identity_tables() {
        let id = KeyedMap::identity(2, KeyRule::None).unwrap();
        let d = ddt(&id, &NO_KEY, 20, Execution::Sequential).unwrap();
        let l = lat(&id, &NO_KEY, 20, Execution::Sequential).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(d.get(u, v), if u == v { 4 } else { 0 });
                assert_eq!(l.get(u, v), if u == v { 4 } else { 0 });
            }
        }
    }

    #[test]
    fn swap_ddt_is_a_permutation_matrix() {
        let s = KeyedMap::swap(2).unwrap();
        let k = s.prepare_key(&bv("10")).unwrap();
        let d = ddt(&s, &k, 20, Execution::Sequential).unwrap();
        for u in 0..4u64 {
            let su = ((u & 1) << 1) | (u >> 1);
            for v in 0..4 {
                assert_eq!(d.get(u, v), if v == su { 4 } else { 0 });
            }
        }
    }

    #[test]
    fn constant_map_lat() {
        let c = KeyedMap::from_fn(2, 2, KeyRule::None, |_| 0b10).unwrap();
        let l = lat(&c, &NO_KEY, 20, Execution::Sequential).unwrap();
        for u in 0..4u64 {
            for v in 0..4u64 {
                let expect = if u == 0 {
                    if (v & 0b10).count_ones() == 1 {
                        -4
                    } else {
                        4
                    }
                } else {
                    0
                };
                assert_eq!(l.get(u, v), expect, "u={u} v={v}");
            }
        }
    }

    #[test]
    fn cube_map_spectra() {
        let f = cube();
        assert!(f.is_permutation());
        let d = ddt(&f, &NO_KEY, 20, Execution::Sequential).unwrap();
        assert_eq!(d.max_abs_where(|u, _| u != 0), 2);
        let l = lat(&f, &NO_KEY, 20, Execution::Sequential).unwrap();
        for v in 1..8 {
            assert_eq!((0..8).map(|u| (l.get(u, v) as i64).pow(2)).sum::<i64>(), 64);
        }
        assert!(d.invariant_violations().is_empty());
        assert!(l.invariant_violations().is_empty());
    }

    #[test]
    fn single_entries_and_rows_agree_with_tables() {
        let f = cube();
        let k = f.prepare_key(&bv("101")).unwrap();
        let d = ddt(&f, &k, 20, Execution::Parallel).unwrap();
        let l = lat(&f, &k, 20, Execution::Parallel).unwrap();
        for u in 0..8 {
            assert_eq!(ddt_row(&f, &k, u).unwrap(), d.row(u));
            assert_eq!(lat_row(&f, &k, u).unwrap(), l.row(u));
            for v in 0..8 {
                assert_eq!(diff_count(&f, &k, u, v), d.get(u, v) as i64);
                assert_eq!(walsh_sum(&f, &k, u, v), l.get(u, v) as i64);
            }
        }
    }

    #[test]
    fn limits_are_enforced() {
        let f = KeyedMap::zero(6, 2, KeyRule::None).unwrap();
        let err = ddt(&f, &NO_KEY, 5, Execution::Sequential).unwrap_err();
        assert!(
            matches!(err, Error::Resource(ref m) if m.contains("single rows")),
            "{err}"
        );
        assert!(lat(&f, &NO_KEY, 5, Execution::Sequential).is_err());
        assert!(ddt_row(&f, &NO_KEY, 64).is_err());
    }

    #[test]
    fn feistel_reduction_examples() {
        let spec = feistel1();
        let k = bv("1");
        let zero = reduce_diff(&spec, &k, &bv("00"), &bv("00")).unwrap();
        assert!(zero.active);
        assert_eq!(zero.value, Dyadic::one());
        assert_eq!(
            reduce_corr(&spec, &k, &bv("00"), &bv("00")).unwrap().value,
            Dyadic::one()
        );

        let r = reduce_diff(&spec, &k, &bv("01"), &bv("10")).unwrap();
        assert!(r.active);
        assert_eq!(r.value, Dyadic::one());
        assert_eq!(r.core_pair, Some((bv("0"), bv("0"))));
        assert_eq!(
            brute_diff(&spec, &k, &bv("01"), &bv("10"), 20).unwrap(),
            Dyadic::one()
        );

        let r = reduce_diff(&spec, &k, &bv("01"), &bv("01")).unwrap();
        assert!(!r.active);
        assert!(r.value.is_zero());
        assert!(brute_diff(&spec, &k, &bv("01"), &bv("01"), 20)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn feistel_full_oracle() {
        let spec = feistel1();
        for k in ["0", "1"] {
            let report = oracle_check(&spec, &bv(k), 20, Execution::Sequential).unwrap();
            assert_eq!(report.pairs, 16);
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn brute_rows_sum_to_one() {
        let spec = feistel1();
        let t = brute_ddt(&spec, &bv("1"), 20, Execution::Sequential).unwrap();
        assert!(t.invariant_violations().is_empty());
        let l = brute_lat(&spec, &bv("1"), 20, Execution::Sequential).unwrap();
        assert!(l.invariant_violations().is_empty());
    }

    #[test]
    fn fox_corr_oracle() {
        let a = BitMatrix::from_strs(&["1010", "0101"]).unwrap();
        let t = BitMatrix::from_strs(&["0100", "1100", "0010", "0001"]).unwrap();
        let core = KeyedMap::new(2, 2, vec![2, 0, 3, 1], KeyRule::XorPre).unwrap();
        let spec = SchemeSpec::from_matrices(Dims::new(1, 4, 2, 2), a.clone(), a, t, core).unwrap();
        let report = oracle_check(&spec, &bv("01"), 20, Execution::Parallel).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn oracle_limit() {
        let spec = feistel1();
        assert!(matches!(
            brute_diff(&spec, &bv("1"), &bv("00"), &bv("00"), 1),
            Err(Error::Resource(_))
        ));
    }
}
