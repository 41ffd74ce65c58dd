//! Kernel chains, deterministic trails along the orbit of `T`, core maxima and
//! round-count reports.
//!
//! The differential chain is `S_i = ∩_{j<=i} T^j ker A`, the linear chain
//! `∩_{j<=i} (T^t)^j ker B`. For a chain of length `ℓ` the reports give
//! `M` from `n(N - M) = dim S_{ℓ-1}` and the exponent `codim S_{ℓ-1} / (n N_i)`
//! (`N_o` for the linear chain), which never exceeds `ℓ`.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf2::{BitMatrix, BitVector, Subspace};
use crate::keyed_map::{KeyedMap, RoundKey};
use crate::sandwich::{LinearLayers, SchemeSpec};
use crate::spectra::{diff_count, walsh_sum, Reducer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainMode {
    Differential,
    Linear,
}

impl ChainMode {
    pub fn name(self) -> &'static str {
        match self {
            ChainMode::Differential => "diff",
            ChainMode::Linear => "lin",
        }
    }
}

/// A nonnegative fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = num.gcd(&den);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelChain {
    pub mode: ChainMode,
    pub word_bits: usize,
    pub state_bits: usize,
    /// Bits entering the core (`n N_i`) or leaving it (`n N_o`).
    pub core_bits: usize,
    /// `S_0, ..., S_{ℓ-1}`.
    pub subspaces: Vec<Subspace>,
}

impl KernelChain {
    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subspaces.iter().map(Subspace::dim).collect()
    }

    pub fn last(&self) -> &Subspace {
        self.subspaces.last().expect("chains have length >= 1")
    }

    /// Dimension of `S_{ℓ-1}` for the prefix of length `rounds`.
    pub fn dim_at(&self, rounds: usize) -> usize {
        self.subspaces[rounds - 1].dim()
    }

    pub fn codim_at(&self, rounds: usize) -> usize {
        self.state_bits - self.dim_at(rounds)
    }

    /// `M` (or `M*`) in words, from `n(N - M) = dim S_{ℓ-1}`.
    pub fn m_at(&self, rounds: usize) -> Fraction {
        Fraction::new(self.codim_at(rounds) as u64, self.word_bits as u64)
    }

    pub fn m(&self) -> Fraction {
        self.m_at(self.len())
    }

    /// `codim S_{ℓ-1} / (n N_i)`.
    pub fn exponent_at(&self, rounds: usize) -> Fraction {
        Fraction::new(self.codim_at(rounds) as u64, self.core_bits as u64)
    }

    pub fn exponent(&self) -> Fraction {
        self.exponent_at(self.len())
    }

    pub fn is_monotone(&self) -> bool {
        self.subspaces
            .windows(2)
            .all(|w| w[1].is_subspace_of(&w[0]) && w[1].dim() <= w[0].dim())
    }

    /// `codim S_{r-1} <= r n N_i` for every prefix length `r`.
    pub fn codim_inequality_holds(&self) -> bool {
        (1..=self.len()).all(|r| self.codim_at(r) <= r * self.core_bits)
    }
}

/// The linear map and base kernel of a chain.
fn chain_parts<L: LinearLayers + ?Sized>(
    layers: &L,
    mode: ChainMode,
) -> (Subspace, BitMatrix, usize) {
    match mode {
        ChainMode::Differential => (
            layers.compression().kernel(),
            layers.mixing().clone(),
            layers.compression().rows(),
        ),
        ChainMode::Linear => (
            layers.expansion().kernel(),
            layers.mixing().transpose(),
            layers.expansion().rows(),
        ),
    }
}

pub fn kernel_chain<L: LinearLayers + ?Sized>(
    layers: &L,
    rounds: usize,
    mode: ChainMode,
) -> Result<KernelChain> {
    if rounds == 0 {
        return Err(Error::Argument("a chain needs at least one round".into()));
    }
    let (base, map, core_bits) = chain_parts(layers, mode);
    let mut subspaces = Vec::with_capacity(rounds);
    let mut image = base.clone();
    let mut current = base;
    subspaces.push(current.clone());
    for _ in 1..rounds {
        image = image.image(&map)?;
        current = current.intersect(&image)?;
        subspaces.push(current.clone());
    }
    Ok(KernelChain {
        mode,
        word_bits: layers.word_bits(),
        state_bits: layers.state_bits(),
        core_bits,
        subspaces,
    })
}

/// `ker A ∩ ker(T + I)`: differences fixed by the round's linear part.
pub fn fixed_points<L: LinearLayers + ?Sized>(layers: &L) -> Result<Subspace> {
    fixed_for(layers, ChainMode::Differential)
}

/// `ker B ∩ ker(T^t + I)`, the linear analogue.
pub fn fixed_points_linear<L: LinearLayers + ?Sized>(layers: &L) -> Result<Subspace> {
    fixed_for(layers, ChainMode::Linear)
}

fn fixed_for<L: LinearLayers + ?Sized>(layers: &L, mode: ChainMode) -> Result<Subspace> {
    let (base, map, _) = chain_parts(layers, mode);
    let moved = map.add(&BitMatrix::identity(map.rows()))?;
    base.intersect(&moved.kernel())
}

/// Which keys the core maxima range over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeySelection {
    Explicit(Vec<BitVector>),
    /// Every key, up to [`MAX_EXHAUSTIVE_KEY_BITS`].
    Exhaustive,
    /// The zero key alone. Every key rule only translates the table's input
    /// or output, which leaves `δ(u, 0)` and `|λ(0, w)|` unchanged, so this
    /// equals the maximum over all keys.
    Auto,
}

pub const MAX_EXHAUSTIVE_KEY_BITS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyScope {
    Explicit(usize),
    Exhaustive(u64),
    KeyInvariant,
}

impl fmt::Display for KeyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyScope::Explicit(n) => write!(f, "{n} listed keys"),
            KeyScope::Exhaustive(n) => write!(f, "all {n} keys"),
            KeyScope::KeyInvariant => f.write_str("all keys (key-invariant)"),
        }
    }
}

/// `δ = max δ_f(u, 0)` over nonzero `u` and `λ = max |λ_f(0, w)|` over
/// nonzero `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreMaxima {
    pub delta: Dyadic,
    pub lambda: Dyadic,
    pub scope: KeyScope,
}

/// `D[u][0]` for every `u`, from the collisions of the keyed table.
fn zero_output_column(keyed: &[u64]) -> Vec<i64> {
    let mut order: Vec<usize> = (0..keyed.len()).collect();
    order.sort_unstable_by_key(|&x| keyed[x]);
    let mut col = vec![0i64; keyed.len()];
    for bucket in order.chunk_by(|&x, &y| keyed[x] == keyed[y]) {
        for &x in bucket {
            for &y in bucket {
                col[x ^ y] += 1;
            }
        }
    }
    col
}

fn maxima_for_key(core: &KeyedMap, key: &RoundKey) -> (i64, i64) {
    let keyed = core.keyed_table(key);
    let delta = zero_output_column(&keyed)
        .into_iter()
        .skip(1)
        .max()
        .unwrap_or(0);
    let mut row = crate::spectra::lat_row(core, key, 0).expect("row fits");
    row[0] = 0;
    let lambda = row.into_iter().map(|e| (e as i64).abs()).max().unwrap_or(0);
    (delta, lambda)
}

pub fn core_maxima(core: &KeyedMap, keys: &KeySelection, exec: Execution) -> Result<CoreMaxima> {
    let (list, scope): (Vec<RoundKey>, KeyScope) = match keys {
        KeySelection::Explicit(ks) => {
            if ks.is_empty() {
                return Err(Error::Argument("empty key list".into()));
            }
            let prepared = ks
                .iter()
                .map(|k| core.prepare_key(k))
                .collect::<Result<_>>()?;
            (prepared, KeyScope::Explicit(ks.len()))
        }
        KeySelection::Exhaustive => {
            let bits = core.key_bits();
            if bits > MAX_EXHAUSTIVE_KEY_BITS {
                return Err(Error::Resource(format!(
                    "{bits} key bits exceed the exhaustive limit of {MAX_EXHAUSTIVE_KEY_BITS}"
                )));
            }
            let prepared = (0..1u64 << bits)
                .map(|k| core.prepare_key(&BitVector::from_u64(bits, k)))
                .collect::<Result<_>>()?;
            (prepared, KeyScope::Exhaustive(1 << bits))
        }
        KeySelection::Auto => (vec![RoundKey::default()], KeyScope::KeyInvariant),
    };
    let per_key = exec.map(list.len(), |i| maxima_for_key(core, &list[i]));
    let d1 = core.input_bits() as u32;
    let delta = per_key.iter().map(|p| p.0).max().unwrap_or(0);
    let lambda = per_key.iter().map(|p| p.1).max().unwrap_or(0);
    Ok(CoreMaxima {
        delta: Dyadic::new(delta, d1),
        lambda: Dyadic::new(lambda, d1),
        scope,
    })
}

#[derive(Clone, Debug)]
pub struct TrailStep {
    pub input: BitVector,
    pub output: BitVector,
    /// The whole-round coefficient from the reduction.
    pub coefficient: Dyadic,
    /// Core pair reported by the reduction.
    pub core_pair: Option<(BitVector, BitVector)>,
    /// Direct lookup in the core's table at `(A α_j, 0)` or `(0, B α_j)`.
    pub table_value: Dyadic,
    /// Whether the core sees a nonzero input (or mask).
    pub active: bool,
}

#[derive(Clone, Debug)]
pub struct TrailReport {
    pub mode: ChainMode,
    pub alphas: Vec<BitVector>,
    pub steps: Vec<TrailStep>,
    pub product: Dyadic,
    pub active_count: usize,
    /// `δ` or `λ` from the core maxima.
    pub max: Dyadic,
    pub exponent: Fraction,
    /// `max^active_count`.
    pub active_bound: Dyadic,
    pub active_bound_holds: bool,
    /// `|product| <= max^exponent`, compared exactly.
    pub chain_bound_holds: bool,
}

impl TrailReport {
    /// Whether every step's reduction equals its table lookup.
    pub fn identity_holds(&self) -> bool {
        self.steps.iter().all(|s| s.coefficient == s.table_value)
            && self.product
                == self
                    .steps
                    .iter()
                    .fold(Dyadic::one(), |acc, s| acc.mul(&s.table_value))
    }
}

impl fmt::Display for TrailReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.mode {
            ChainMode::Differential => "delta",
            ChainMode::Linear => "lambda",
        };
        writeln!(f, "mode {}", self.mode.name())?;
        writeln!(
            f,
            "step,alpha_in,alpha_out,active,coefficient,table,core_pair"
        )?;
        for (j, s) in self.steps.iter().enumerate() {
            let pair = s
                .core_pair
                .as_ref()
                .map(|(u, v)| format!("({u};{v})"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{j},{},{},{},{},{},{pair}",
                s.input,
                s.output,
                s.active,
                s.coefficient.exact_string(),
                s.table_value.exact_string()
            )?;
        }
        writeln!(
            f,
            "product {} ~ {:e}",
            self.product.exact_string(),
            self.product.to_f64()
        )?;
        writeln!(f, "active rounds {}", self.active_count)?;
        writeln!(f, "{sym} {}", self.max.exact_string())?;
        writeln!(
            f,
            "active-round bound {sym}^{} = {} holds={}",
            self.active_count,
            self.active_bound.exact_string(),
            self.active_bound_holds
        )?;
        write!(
            f,
            "chain bound {sym}^({}) ~ {:e} holds={}",
            self.exponent,
            self.max.to_f64().powf(self.exponent.to_f64()),
            self.chain_bound_holds
        )
    }
}

fn check_keys(spec: &SchemeSpec, keys: &[BitVector]) -> Result<()> {
    if keys.is_empty() {
        return Err(Error::Argument(
            "a trail needs at least one round key".into(),
        ));
    }
    if let Some(k) = keys.iter().find(|k| k.len() != spec.key_bits()) {
        return Err(Error::Argument(format!(
            "round key has {} bits, need {}",
            k.len(),
            spec.key_bits()
        )));
    }
    Ok(())
}

fn finish(
    spec: &SchemeSpec,
    mode: ChainMode,
    alphas: Vec<BitVector>,
    steps: Vec<TrailStep>,
    maxima: &CoreMaxima,
) -> Result<TrailReport> {
    let product = steps
        .iter()
        .fold(Dyadic::one(), |acc, s| acc.mul(&s.coefficient));
    let active_count = steps.iter().filter(|s| s.active).count();
    let max = match mode {
        ChainMode::Differential => maxima.delta.clone(),
        ChainMode::Linear => maxima.lambda.clone(),
    };
    let exponent = kernel_chain(spec, steps.len(), mode)?.exponent();
    let active_bound = max.pow(active_count as u32);
    let magnitude = product.abs();
    Ok(TrailReport {
        mode,
        alphas,
        active_bound_holds: magnitude <= active_bound,
        chain_bound_holds: magnitude.le_fractional_power(
            &max,
            exponent.num as u32,
            exponent.den as u32,
        ),
        steps,
        product,
        active_count,
        max,
        exponent,
        active_bound,
    })
}

/// `α_j = T^j α_0` with `α_0 ∈ ker A`, one step per key.
pub fn build_diff_trail(
    spec: &SchemeSpec,
    alpha0: &BitVector,
    keys: &[BitVector],
    maxima: &CoreMaxima,
) -> Result<TrailReport> {
    check_keys(spec, keys)?;
    if !spec.a().mul_vec(alpha0)?.is_zero() {
        return Err(Error::Precondition("alpha0 is not in ker A".into()));
    }
    let mut alphas = vec![alpha0.clone()];
    let mut steps = Vec::with_capacity(keys.len());
    for key in keys {
        let input = alphas.last().expect("non-empty").clone();
        let output = spec.t().mul_vec(&input)?;
        let red = Reducer::new(spec, key)?.diff(&input, &output)?;
        let u = spec.a().mul_vec(&input)?;
        let k = spec.prepare_key(key)?;
        let table_value = Dyadic::new(
            diff_count(spec.core(), &k, u.to_u64(), 0),
            spec.core().input_bits() as u32,
        );
        steps.push(TrailStep {
            active: !u.is_zero(),
            input,
            output: output.clone(),
            coefficient: red.value,
            core_pair: red.core_pair,
            table_value,
        });
        alphas.push(output);
    }
    finish(spec, ChainMode::Differential, alphas, steps, maxima)
}

/// `α_j = (T^t)^{-j} α_0` with `α_0 ∈ ker B`, one step per key.
pub fn build_lin_trail(
    spec: &SchemeSpec,
    alpha0: &BitVector,
    keys: &[BitVector],
    maxima: &CoreMaxima,
) -> Result<TrailReport> {
    check_keys(spec, keys)?;
    if !spec.b().mul_vec(alpha0)?.is_zero() {
        return Err(Error::Precondition("alpha0 is not in ker B".into()));
    }
    let step = spec.t_inverse().transpose();
    let mut alphas = vec![alpha0.clone()];
    let mut steps = Vec::with_capacity(keys.len());
    for key in keys {
        let input = alphas.last().expect("non-empty").clone();
        let output = step.mul_vec(&input)?;
        let red = Reducer::new(spec, key)?.corr(&input, &output)?;
        let w = spec.b().mul_vec(&input)?;
        let k = spec.prepare_key(key)?;
        let table_value = Dyadic::new(
            walsh_sum(spec.core(), &k, 0, w.to_u64()),
            spec.core().input_bits() as u32,
        );
        steps.push(TrailStep {
            active: !w.is_zero(),
            input,
            output: output.clone(),
            coefficient: red.value,
            core_pair: red.core_pair,
            table_value,
        });
        alphas.push(output);
    }
    finish(spec, ChainMode::Linear, alphas, steps, maxima)
}

/// One mode's numbers for a given round count.
#[derive(Clone, Debug)]
pub struct ModeRow {
    pub dim: usize,
    pub m: Fraction,
    pub exponent: Fraction,
    /// The chain has reached the fixed-point floor at this round count.
    pub collapsed: bool,
    /// This is the first round count at which it has.
    pub first_collapse: bool,
}

#[derive(Clone, Debug)]
pub struct RoundRow {
    pub rounds: usize,
    pub diff: ModeRow,
    pub lin: ModeRow,
}

#[derive(Clone, Debug)]
pub struct RoundsReport {
    pub rows: Vec<RoundRow>,
    pub fixed_dim: usize,
    pub fixed_dim_linear: usize,
    pub maxima: Option<CoreMaxima>,
}

impl RoundsReport {
    pub fn collapse_round(&self, mode: ChainMode) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.mode(mode).first_collapse)
            .map(|r| r.rounds)
    }

    /// Columns: `rounds`, then per selected mode `dim, M, exponent,
    /// bound_exact, bound_approx, collapsed`, prefixed `diff_` or `lin_`.
    pub fn to_csv(&self, modes: &[ChainMode]) -> String {
        let mut out = String::from("rounds");
        for m in modes {
            let p = m.name();
            out.push_str(&format!(
                ",{p}_dim,{p}_M,{p}_exponent,{p}_bound_exact,{p}_bound_approx,{p}_collapsed"
            ));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.rounds.to_string());
            for &m in modes {
                let row = r.mode(m);
                let (exact, approx) = self.bound(row, m);
                out.push_str(&format!(
                    ",{},{},{},{exact},{approx},{}",
                    row.dim, row.m, row.exponent, row.collapsed
                ));
            }
            out.push('\n');
        }
        out
    }

    fn bound(&self, row: &ModeRow, mode: ChainMode) -> (String, String) {
        match &self.maxima {
            None => ("-".into(), "-".into()),
            Some(m) => {
                let base = match mode {
                    ChainMode::Differential => &m.delta,
                    ChainMode::Linear => &m.lambda,
                };
                (
                    format!("({})^({})", base.exact_string(), row.exponent),
                    format!("{:e}", base.to_f64().powf(row.exponent.to_f64())),
                )
            }
        }
    }

    pub fn render_text(&self, modes: &[ChainMode]) -> String {
        let mut out = String::new();
        if let Some(m) = &self.maxima {
            out.push_str(&format!(
                "delta {} lambda {} over {}\n",
                m.delta.exact_string(),
                m.lambda.exact_string(),
                m.scope
            ));
        }
        out.push_str(&format!(
            "fixed-point floor: diff dim {}, lin dim {}\n",
            self.fixed_dim, self.fixed_dim_linear
        ));
        out.push_str(&format!("{:>6}", "rounds"));
        for m in modes {
            out.push_str(&format!(
                " | {:>4} {:>5} {:>6} {:>22} {:>10}",
                format!("{}", m.name()),
                "dim",
                "M",
                "exponent",
                "bound"
            ));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{:>6}", r.rounds));
            let mut notes = Vec::new();
            for &m in modes {
                let row = r.mode(m);
                let (exact, approx) = self.bound(row, m);
                out.push_str(&format!(
                    " | {:>4} {:>5} {:>6} {:>22} {:>10}",
                    "",
                    row.dim,
                    row.m.to_string(),
                    format!("{} {}", row.exponent, exact),
                    approx
                ));
                if row.first_collapse {
                    notes.push(format!("{} collapse", m.name()));
                }
            }
            if !notes.is_empty() {
                out.push_str(&format!("  <- {}", notes.join(", ")));
            }
            out.push('\n');
        }
        out
    }
}

impl RoundRow {
    pub fn mode(&self, mode: ChainMode) -> &ModeRow {
        match mode {
            ChainMode::Differential => &self.diff,
            ChainMode::Linear => &self.lin,
        }
    }
}

impl fmt::Display for RoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text(&[ChainMode::Differential, ChainMode::Linear]))
    }
}

pub fn min_rounds_report<L: LinearLayers + ?Sized>(
    layers: &L,
    max_rounds: usize,
    maxima: Option<CoreMaxima>,
) -> Result<RoundsReport> {
    let diff = kernel_chain(layers, max_rounds, ChainMode::Differential)?;
    let lin = kernel_chain(layers, max_rounds, ChainMode::Linear)?;
    let fixed_dim = fixed_points(layers)?.dim();
    let fixed_dim_linear = fixed_points_linear(layers)?.dim();
    let row = |chain: &KernelChain, floor: usize, r: usize| {
        let collapsed = chain.dim_at(r) == floor;
        ModeRow {
            dim: chain.dim_at(r),
            m: chain.m_at(r),
            exponent: chain.exponent_at(r),
            collapsed,
            first_collapse: collapsed && (r == 1 || chain.dim_at(r - 1) != floor),
        }
    };
    let rows = (1..=max_rounds)
        .map(|r| RoundRow {
            rounds: r,
            diff: row(&diff, fixed_dim, r),
            lin: row(&lin, fixed_dim_linear, r),
        })
        .collect();
    Ok(RoundsReport {
        rows,
        fixed_dim,
        fixed_dim_linear,
        maxima,
    })
}
