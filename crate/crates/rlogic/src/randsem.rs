//! Random expansion semantics.
//!
//! A [`RandomSpace`] is a base structure together with a disjoint "random"
//! vocabulary; the space of expansions interpreting those symbols carries
//! the uniform distribution, one fair bit per relation position. This
//! module computes satisfaction probabilities over that space (exactly by
//! bit enumeration, or by seeded Monte Carlo sampling), classifies formulas
//! against probability gaps, evaluates gap-based queries, and widens gaps
//! by amplification over independently renamed copies.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::Bits;
use crate::logic::{Assignment, EvalError, EvalOptions, Formula, LogicError};
use crate::structure::{
    tuple_unrank, RelationSymbol, Renaming, Structure, StructureError, Vocabulary,
};

/// Exact probabilities are rationals with a power-of-two denominator.
pub type Prob = Ratio<BigInt>;

/// Helper for building exact rationals.
pub fn prob(numer: i64, denom: i64) -> Prob {
    Ratio::new(BigInt::from(numer), BigInt::from(denom))
}

/// Default cap on the number of random bits for exact enumeration.
pub const DEFAULT_EXACT_CAP: u32 = 24;

/// Default Monte Carlo accuracy (`epsilon`) and confidence (`delta`).
pub const DEFAULT_MC_EPSILON: f64 = 0.02;
pub const DEFAULT_MC_DELTA: f64 = 0.001;

#[derive(Debug, Error)]
pub enum RandsemError {
    #[error("random vocabulary shares symbol `{0}` with the base structure")]
    VocabNotDisjoint(String),
    #[error("bit budget {budget} exceeds the exact-enumeration cap {cap}; use Monte Carlo estimation instead")]
    BudgetExceeded { budget: u128, cap: u32 },
    #[error("epsilon and delta must lie strictly between 0 and 1 (got epsilon={epsilon}, delta={delta})")]
    InvalidEpsilonDelta { epsilon: f64, delta: f64 },
    #[error("amplification needs 1 <= l <= n, got n={n}, l={l}")]
    InvalidAmplification { n: usize, l: usize },
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A base structure with a disjoint random vocabulary: the uniform
/// probability space of all expansions interpreting the random symbols.
#[derive(Debug, Clone)]
pub struct RandomSpace {
    base: Structure,
    random_vocab: Vocabulary,
}

impl RandomSpace {
    pub fn new(base: Structure, random_vocab: Vocabulary) -> Result<RandomSpace, RandsemError> {
        for sym in random_vocab.iter() {
            if base.vocabulary().contains(&sym.name) {
                return Err(RandsemError::VocabNotDisjoint(sym.name.clone()));
            }
        }
        Ok(RandomSpace { base, random_vocab })
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn random_vocabulary(&self) -> &Vocabulary {
        &self.random_vocab
    }

    /// Total number of random bits: the sum of `n^arity` over the random
    /// symbols.
    pub fn bit_budget(&self) -> u128 {
        let n = self.base.universe_size() as u128;
        self.random_vocab
            .iter()
            .map(|sym| n.pow(sym.arity as u32))
            .sum()
    }

    /// Materialise the expansion encoded by a bitstring. Bits are laid out
    /// relation by relation in declaration order, tuples by lexicographic
    /// rank (most significant component first).
    pub fn expansion_from_bits(&self, bits: &Bits) -> Result<Structure, RandsemError> {
        assert_eq!(bits.len() as u128, self.bit_budget());
        let n = self.base.universe_size();
        let mut cursor = 0usize;
        let mut new = BTreeMap::new();
        for sym in self.random_vocab.iter() {
            let size = (n as u64).pow(sym.arity as u32) as usize;
            let tuples = (0..size)
                .filter(|&local| bits.get(cursor + local))
                .map(|local| tuple_unrank(local as u64, n, sym.arity))
                .collect();
            new.insert(sym.name.clone(), (sym.arity, tuples));
            cursor += size;
        }
        Ok(self.base.expand(new)?)
    }
}

/// A satisfaction probability together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbEstimate {
    Exact {
        value: Prob,
        bit_budget: u32,
    },
    MonteCarlo {
        value: f64,
        samples: u64,
        epsilon: f64,
        delta: f64,
        seed: u64,
    },
}

impl ProbEstimate {
    pub fn value_f64(&self) -> f64 {
        match self {
            ProbEstimate::Exact { value, .. } => value.to_f64().unwrap_or(f64::NAN),
            ProbEstimate::MonteCarlo { value, .. } => *value,
        }
    }

    pub fn exact_value(&self) -> Option<&Prob> {
        match self {
            ProbEstimate::Exact { value, .. } => Some(value),
            ProbEstimate::MonteCarlo { .. } => None,
        }
    }
}

impl Serialize for ProbEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ProbEstimate::Exact { value, bit_budget } => {
                let mut s = serializer.serialize_struct("ProbEstimate", 3)?;
                s.serialize_field("method", "exact")?;
                s.serialize_field("value", &value.to_string())?;
                s.serialize_field("bit_budget", bit_budget)?;
                s.end()
            }
            ProbEstimate::MonteCarlo {
                value,
                samples,
                epsilon,
                delta,
                seed,
            } => {
                let mut s = serializer.serialize_struct("ProbEstimate", 6)?;
                s.serialize_field("method", "monte-carlo")?;
                s.serialize_field("value", value)?;
                s.serialize_field("samples", samples)?;
                s.serialize_field("epsilon", epsilon)?;
                s.serialize_field("delta", delta)?;
                s.serialize_field("seed", seed)?;
                s.end()
            }
        }
    }
}

/// An `(alpha, beta]` probability gap: a formula respects the gap when its
/// satisfaction probability is at most `alpha` or strictly above `beta` on
/// every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSpec {
    pub alpha: Prob,
    pub beta: Prob,
}

impl GapSpec {
    pub fn new(alpha: Prob, beta: Prob) -> Result<GapSpec, RandsemError> {
        if alpha.is_negative() || alpha > beta || beta > Prob::one() {
            return Err(RandsemError::InfeasibleParameters(format!(
                "need 0 <= alpha <= beta <= 1, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(GapSpec { alpha, beta })
    }
}

/// Outcome of classifying one instance against a gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapClass {
    /// Probability at most alpha (exactly, or with Monte Carlo margin).
    Low,
    /// Probability strictly above beta.
    High,
    /// Exact probability strictly inside the gap.
    Violation,
    /// Monte Carlo interval straddles the gap boundaries.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapOutcome {
    pub class: GapClass,
    pub estimate: ProbEstimate,
}

/// How to obtain probabilities.
#[derive(Debug, Clone, Copy)]
pub enum ProbMode {
    Exact {
        cap: u32,
    },
    MonteCarlo {
        epsilon: f64,
        delta: f64,
        seed: u64,
    },
    /// Exact when the bit budget permits, Monte Carlo otherwise.
    Auto {
        cap: u32,
        epsilon: f64,
        delta: f64,
        seed: u64,
    },
}

impl Default for ProbMode {
    fn default() -> ProbMode {
        ProbMode::Auto {
            cap: DEFAULT_EXACT_CAP,
            epsilon: DEFAULT_MC_EPSILON,
            delta: DEFAULT_MC_DELTA,
            seed: 0,
        }
    }
}

/// Hoeffding sample count: `ceil(ln(2/delta) / (2 epsilon^2))`.
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> Result<u64, RandsemError> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(RandsemError::InvalidEpsilonDelta { epsilon, delta });
    }
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// A deterministic per-sample generator: the bits of sample `index` depend
/// only on `(seed, index)`, so estimates are independent of evaluation
/// order and worker count.
pub(crate) fn sample_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut state = splitmix64(seed) ^ splitmix64(index.wrapping_add(0x9E3779B97F4A7C15));
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

pub(crate) struct Prepared {
    pub(crate) cs: crate::logic::CompiledStructure,
    pub(crate) cf: crate::logic::CompiledFormula,
    pub(crate) vars: Vec<usize>,
    pub(crate) sets: Vec<u64>,
}

impl Prepared {
    pub(crate) fn run(&mut self) -> bool {
        self.cf.run(&self.cs, &self.vars, &self.sets)
    }
}

pub(crate) fn prepare(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
    options: EvalOptions,
) -> Result<Prepared, RandsemError> {
    let mut cs = crate::logic::compile_structure(space.base());
    cs.append_random(space.random_vocabulary());
    let cf = crate::logic::compile_formula(f, &cs, options)?;
    cf.check_set_cap(&cs)?;
    let (vars, sets) = crate::logic::bindings_from_assignment(&cf, asg, cs.n())?;
    Ok(Prepared { cs, cf, vars, sets })
}

/// Exact satisfaction probability by enumerating all `2^B` expansions.
pub fn exact_probability(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
) -> Result<ProbEstimate, RandsemError> {
    exact_probability_capped(space, f, asg, DEFAULT_EXACT_CAP)
}

pub fn exact_probability_capped(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
    cap: u32,
) -> Result<ProbEstimate, RandsemError> {
    let budget = space.bit_budget();
    if budget > cap as u128 || budget > 63 {
        return Err(RandsemError::BudgetExceeded { budget, cap });
    }
    let b = budget as u32;
    let mut p = prepare(space, f, asg, EvalOptions::default())?;
    let mut buffer = Bits::zeros(b as usize);
    let mut count: u64 = 0;
    for code in 0..(1u64 << b) {
        buffer.overwrite_u64(code);
        p.cs.write_random_bits(&buffer);
        if p.run() {
            count += 1;
        }
    }
    Ok(ProbEstimate::Exact {
        value: Prob::new(BigInt::from(count), BigInt::from(1u64 << b)),
        bit_budget: b,
    })
}

/// Monte Carlo estimate with Hoeffding sample sizing: the result is within
/// `epsilon` of the true probability with confidence `1 - delta`, and is
/// bit-for-bit reproducible from `(seed, inputs)` alone.
pub fn mc_probability(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<ProbEstimate, RandsemError> {
    let samples = hoeffding_samples(epsilon, delta)?;
    let hits = mc_count(space, f, asg, samples, seed)?;
    Ok(ProbEstimate::MonteCarlo {
        value: hits as f64 / samples as f64,
        samples,
        epsilon,
        delta,
        seed,
    })
}

/// Number of satisfying samples among `samples` seeded draws.
pub fn mc_count(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
    samples: u64,
    seed: u64,
) -> Result<u64, RandsemError> {
    let p = prepare(space, f, asg, EvalOptions::default())?;
    let hits = (0..samples)
        .into_par_iter()
        .map_init(
            || p.cs.clone(),
            |cs, index| {
                let mut rng = sample_rng(seed, index);
                cs.fill_random(|| rng.next_u64());
                u64::from(p.cf.run(cs, &p.vars, &p.sets))
            },
        )
        .sum();
    Ok(hits)
}

fn probability_for_mode(
    space: &RandomSpace,
    f: &Formula,
    asg: &Assignment,
    mode: ProbMode,
) -> Result<ProbEstimate, RandsemError> {
    match mode {
        ProbMode::Exact { cap } => exact_probability_capped(space, f, asg, cap),
        ProbMode::MonteCarlo {
            epsilon,
            delta,
            seed,
        } => mc_probability(space, f, asg, epsilon, delta, seed),
        ProbMode::Auto {
            cap,
            epsilon,
            delta,
            seed,
        } => {
            if space.bit_budget() <= cap as u128 {
                exact_probability_capped(space, f, asg, cap)
            } else {
                mc_probability(space, f, asg, epsilon, delta, seed)
            }
        }
    }
}

fn classify(estimate: &ProbEstimate, gap: &GapSpec) -> GapClass {
    match estimate {
        ProbEstimate::Exact { value, .. } => {
            if *value <= gap.alpha {
                GapClass::Low
            } else if *value > gap.beta {
                GapClass::High
            } else {
                GapClass::Violation
            }
        }
        ProbEstimate::MonteCarlo { value, epsilon, .. } => {
            let alpha = gap.alpha.to_f64().unwrap_or(0.0);
            let beta = gap.beta.to_f64().unwrap_or(1.0);
            if value + epsilon <= alpha {
                GapClass::Low
            } else if value - epsilon > beta {
                GapClass::High
            } else {
                GapClass::Inconclusive
            }
        }
    }
}

/// Classify a formula's satisfaction probability against a gap on each
/// instance.
pub fn check_gap(
    instances: &[(RandomSpace, Assignment)],
    f: &Formula,
    gap: &GapSpec,
    mode: ProbMode,
) -> Result<Vec<GapOutcome>, RandsemError> {
    instances
        .iter()
        .map(|(space, asg)| {
            let estimate = probability_for_mode(space, f, asg, mode)?;
            Ok(GapOutcome {
                class: classify(&estimate, gap),
                estimate,
            })
        })
        .collect()
}

/// Result of a gap-semantics query: the tuples whose satisfaction
/// probability clears `beta`, plus any tuples whose probability lands
/// inside the gap (which a gapped formula must never do).
#[derive(Debug, Clone, Serialize)]
pub struct BpQueryResult {
    pub selected: Vec<Vec<usize>>,
    pub flagged: Vec<(Vec<usize>, ProbEstimate)>,
}

/// Evaluate the query semantics of a formula over a random space: a tuple
/// is selected when its satisfaction probability is strictly above
/// `gap.beta`.
pub fn bp_query(
    space: &RandomSpace,
    f: &Formula,
    gap: &GapSpec,
    mode: ProbMode,
) -> Result<BpQueryResult, RandsemError> {
    let (free_fo, free_so) = f.free_vars();
    if let Some(name) = free_so.into_iter().next() {
        return Err(RandsemError::Eval(EvalError::SetVariableInQuery(name)));
    }
    let names: Vec<String> = free_fo.into_iter().collect();
    let n = space.base().universe_size();
    let k = names.len();
    let mut selected = Vec::new();
    let mut flagged = Vec::new();
    let mut tuple = vec![0usize; k];
    loop {
        let mut asg = Assignment::new();
        for (name, &value) in names.iter().zip(&tuple) {
            asg = asg.bind(name.clone(), value);
        }
        let estimate = probability_for_mode(space, f, &asg, mode)?;
        match classify(&estimate, gap) {
            GapClass::High => selected.push(tuple.clone()),
            GapClass::Low => {}
            GapClass::Violation | GapClass::Inconclusive => flagged.push((tuple.clone(), estimate)),
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(BpQueryResult { selected, flagged });
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// Name of the `i`-th independent copy of a random symbol (1-based).
pub fn copy_symbol_name(name: &str, i: usize) -> String {
    format!("{name}_{i}")
}

/// Build the threshold combination of `n` independently renamed copies: the
/// returned formula holds when at least `l` of the copies hold. The new
/// random vocabulary lists copy 1's symbols, then copy 2's, and so on; each
/// copy's bits are therefore contiguous in the expansion layout.
pub fn amplify(
    f: &Formula,
    rho: &Vocabulary,
    n: usize,
    l: usize,
) -> Result<(Formula, Vocabulary), RandsemError> {
    if l == 0 || l > n {
        return Err(RandsemError::InvalidAmplification { n, l });
    }
    let formula_vocab = f.vocabulary()?;
    let mut copies = Vec::with_capacity(n);
    let mut new_symbols = Vec::new();
    for i in 1..=n {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for sym in formula_vocab.iter() {
            if !rho.contains(&sym.name) {
                pairs.push((sym.name.clone(), sym.name.clone()));
            }
        }
        for sym in rho.iter() {
            let target = copy_symbol_name(&sym.name, i);
            new_symbols.push(RelationSymbol::new(&target, sym.arity));
            pairs.push((sym.name.clone(), target));
        }
        let renaming = Renaming::new(pairs)?;
        copies.push(f.rename_symbols(&renaming)?);
    }
    let disjuncts = (0..n)
        .combinations(l)
        .map(|subset| Formula::and_all(subset.into_iter().map(|i| copies[i].clone())));
    let amplified = Formula::or_all(disjuncts);
    Ok((amplified, Vocabulary::new(new_symbols)?))
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Exact upper tail `P(Bin(n, p) >= l)`.
pub fn binomial_tail_ge(n: u64, l: u64, p: &Prob) -> Prob {
    let q = Prob::one() - p;
    let mut total = Prob::zero();
    for j in l..=n {
        let term =
            Prob::from(binomial(n, j)) * pow_ratio(p, j as usize) * pow_ratio(&q, (n - j) as usize);
        total += term;
    }
    total
}

/// `p^e` by repeated multiplication.
pub fn pow_ratio(p: &Prob, e: usize) -> Prob {
    let mut out = Prob::one();
    for _ in 0..e {
        out *= p.clone();
    }
    out
}

/// Choose `(n, l)` so that the "at least l of n copies" combination turns an
/// `(alpha, beta]` gap into an `(alpha_target, beta_target]` gap: a
/// Bernoulli(alpha) sum reaches `l` with probability at most `alpha_target`
/// while a Bernoulli(beta) sum reaches `l` with probability at least
/// `beta_target`. The threshold is the majority count at the gap midpoint,
/// `l = ceil(n (alpha + beta) / 2)`; `n` starts from the Hoeffding estimate
/// and grows until the exact binomial tails meet the targets. For one-sided
/// gaps (`alpha = 0`) the threshold is 1 and only the beta condition
/// applies.
pub fn amplification_plan(
    alpha: &Prob,
    beta: &Prob,
    alpha_target: &Prob,
    beta_target: &Prob,
) -> Result<(usize, usize), RandsemError> {
    let one = Prob::one();
    if alpha.is_negative() || alpha >= beta || *beta >= one {
        return Err(RandsemError::InfeasibleParameters(format!(
            "need 0 <= alpha < beta < 1, got alpha={alpha}, beta={beta}"
        )));
    }
    if alpha_target >= beta_target || *beta_target >= one || alpha_target.is_negative() {
        return Err(RandsemError::InfeasibleParameters(format!(
            "need 0 <= alpha_target < beta_target < 1, got {alpha_target}, {beta_target}"
        )));
    }
    if alpha.is_zero() {
        for n in 1..=100_000usize {
            let miss = pow_ratio(&(one.clone() - beta), n);
            if one.clone() - miss > *beta_target {
                return Ok((n, 1));
            }
        }
        return Err(RandsemError::InfeasibleParameters(
            "no feasible copy count below 100000".into(),
        ));
    }
    if alpha_target.is_zero() {
        return Err(RandsemError::InfeasibleParameters(
            "alpha_target = 0 is unattainable from alpha > 0".into(),
        ));
    }
    let mid = (alpha + beta) / Prob::from(BigInt::from(2));
    let a = alpha.to_f64().unwrap();
    let b = beta.to_f64().unwrap();
    let t = (a + b) / 2.0;
    let at = alpha_target.to_f64().unwrap();
    let bt = beta_target.to_f64().unwrap();
    let n_alpha = (1.0 / at).ln() / (2.0 * (t - a) * (t - a));
    let n_beta = (1.0 / (1.0 - bt)).ln() / (2.0 * (b - t) * (b - t));
    let start = n_alpha.max(n_beta).max(1.0).ceil() as usize;
    for n in start..start + 10_000 {
        let l = ratio_ceil(&(mid.clone() * Prob::from(BigInt::from(n as i64))));
        if l == 0 || l > n {
            continue;
        }
        let low_tail = binomial_tail_ge(n as u64, l as u64, alpha);
        let high_tail = binomial_tail_ge(n as u64, l as u64, beta);
        if low_tail <= *alpha_target && high_tail >= *beta_target {
            return Ok((n, l));
        }
    }
    Err(RandsemError::InfeasibleParameters(
        "no feasible copy count near the Hoeffding estimate".into(),
    ))
}

fn ratio_ceil(r: &Prob) -> usize {
    let (num, den) = (r.numer(), r.denom());
    let div = num / den;
    let exact = &div * den == *num;
    let ceil = if exact { div } else { div + BigInt::one() };
    ceil.to_usize().unwrap_or(usize::MAX)
}
