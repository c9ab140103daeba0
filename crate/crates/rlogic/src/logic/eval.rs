//! Guard-aware formula evaluation.
//!
//! Structures are compiled once into dense (or sparse) rank-indexed
//! relations plus adjacency indexes, formulas into slot-addressed trees.
//! Quantifiers whose body starts with an atomic conjunct over the bound
//! variable enumerate only the candidates delivered by that atom's index;
//! with guards disabled the evaluator enumerates the full universe, which
//! serves as the independent oracle for the guarded mode.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::Formula;
use crate::bits::Bits;
use crate::structure::{tuple_rank, Structure, Vocabulary};

/// Relations up to this many positions are stored as dense bitsets.
const DENSE_CAP: u64 = 1 << 26;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("free variable `{0}` is not bound in the assignment")]
    UnboundVariable(String),
    #[error("free set variable `{0}` is not bound in the assignment")]
    UnboundSetVariable(String),
    #[error("assignment binds `{var}` to {value}, outside the universe 0..{n}")]
    AssignmentOutOfRange { var: String, value: usize, n: usize },
    #[error("relation `{0}` is not interpreted by the structure (or has a different arity)")]
    VocabularyMismatch(String),
    #[error("set quantification over a universe of size {n} exceeds the cap {cap}; raise `set_quantifier_cap` to override")]
    SetQuantifierCap { n: usize, cap: usize },
    #[error("set variables require a universe of at most 64 elements, got {0}")]
    SetUniverseTooLarge(usize),
    #[error("query requires only element free variables, found set variable `{0}`")]
    SetVariableInQuery(String),
    #[error("formula defines {witnesses} elements instead of exactly one")]
    NotADefinition { witnesses: usize },
    #[error("expected a formula with exactly {expected} free variables, found {found}")]
    WrongFreeVariableCount { expected: usize, found: usize },
}

/// Bindings for the free variables of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    vars: BTreeMap<String, usize>,
    sets: BTreeMap<String, BTreeSet<usize>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn bind(mut self, var: impl Into<String>, value: usize) -> Assignment {
        self.vars.insert(var.into(), value);
        self
    }

    pub fn bind_set(
        mut self,
        var: impl Into<String>,
        value: impl IntoIterator<Item = usize>,
    ) -> Assignment {
        self.sets.insert(var.into(), value.into_iter().collect());
        self
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.vars.get(var).copied()
    }

    pub fn vars(&self) -> &BTreeMap<String, usize> {
        &self.vars
    }
}

/// Evaluation controls.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Maximum universe size for `Exists`/`Forall` set quantifiers.
    pub set_quantifier_cap: usize,
    /// Use index-backed candidate enumeration for guarded quantifiers.
    pub guards: bool,
}

impl Default for EvalOptions {
    fn default() -> EvalOptions {
        EvalOptions {
            set_quantifier_cap: 20,
            guards: true,
        }
    }
}

impl EvalOptions {
    pub fn naive() -> EvalOptions {
        EvalOptions {
            guards: false,
            ..EvalOptions::default()
        }
    }
}

enum RelData {
    Dense(Bits),
    Sparse(BTreeSet<Vec<usize>>),
}

pub(crate) struct CompiledRel {
    arity: usize,
    strides: Vec<u64>,
    data: RelData,
    support: Option<Vec<usize>>,
    by_first: Option<Vec<Vec<usize>>>,
    by_second: Option<Vec<Vec<usize>>>,
}

impl CompiledRel {
    fn from_tuples(
        n: usize,
        arity: usize,
        tuples: &BTreeSet<Vec<usize>>,
        index: bool,
    ) -> CompiledRel {
        let size = (n as u64).checked_pow(arity as u32).unwrap_or(u64::MAX);
        let strides = strides_for(n, arity);
        let data = if size <= DENSE_CAP {
            let mut bits = Bits::zeros(size as usize);
            for t in tuples {
                bits.set(tuple_rank(t, n) as usize, true);
            }
            RelData::Dense(bits)
        } else {
            RelData::Sparse(tuples.clone())
        };
        let mut rel = CompiledRel {
            arity,
            strides,
            data,
            support: None,
            by_first: None,
            by_second: None,
        };
        if index {
            match arity {
                1 => rel.support = Some(tuples.iter().map(|t| t[0]).collect()),
                2 => {
                    let mut by_first = vec![Vec::new(); n];
                    let mut by_second = vec![Vec::new(); n];
                    for t in tuples {
                        by_first[t[0]].push(t[1]);
                        by_second[t[1]].push(t[0]);
                    }
                    rel.by_first = Some(by_first);
                    rel.by_second = Some(by_second);
                }
                _ => {}
            }
        }
        rel
    }

    fn zeroed(n: usize, arity: usize) -> CompiledRel {
        let size = (n as u64).checked_pow(arity as u32).unwrap_or(u64::MAX);
        assert!(
            size <= DENSE_CAP,
            "random relation with {size} positions exceeds the dense representation cap"
        );
        CompiledRel {
            arity,
            strides: strides_for(n, arity),
            data: RelData::Dense(Bits::zeros(size as usize)),
            support: None,
            by_first: None,
            by_second: None,
        }
    }

    pub(crate) fn position_count(&self) -> usize {
        match &self.data {
            RelData::Dense(b) => b.len(),
            RelData::Sparse(_) => unreachable!("random relations are always dense"),
        }
    }
}

fn strides_for(n: usize, arity: usize) -> Vec<u64> {
    (0..arity)
        .map(|i| (n as u64).pow((arity - 1 - i) as u32))
        .collect()
}

/// A structure lowered to rank-indexed relations, with optional extra
/// "random" relations whose bits are rewritten between evaluations.
pub(crate) struct CompiledStructure {
    n: usize,
    names: Vec<(String, usize)>,
    rels: Vec<CompiledRel>,
    first_random: usize,
}

impl Clone for CompiledStructure {
    fn clone(&self) -> Self {
        CompiledStructure {
            n: self.n,
            names: self.names.clone(),
            rels: self
                .rels
                .iter()
                .map(|r| CompiledRel {
                    arity: r.arity,
                    strides: r.strides.clone(),
                    data: match &r.data {
                        RelData::Dense(b) => RelData::Dense(b.clone()),
                        RelData::Sparse(s) => RelData::Sparse(s.clone()),
                    },
                    support: r.support.clone(),
                    by_first: r.by_first.clone(),
                    by_second: r.by_second.clone(),
                })
                .collect(),
            first_random: self.first_random,
        }
    }
}

impl CompiledStructure {
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    fn index_of(&self, name: &str, arity: usize) -> Option<usize> {
        self.names
            .iter()
            .position(|(n, a)| n == name && *a == arity)
    }

    /// Append zeroed relations for a disjoint random vocabulary.
    pub(crate) fn append_random(&mut self, vocab: &Vocabulary) {
        for sym in vocab.iter() {
            self.names.push((sym.name.clone(), sym.arity));
            self.rels.push(CompiledRel::zeroed(self.n, sym.arity));
        }
    }

    /// Total number of bit positions across the random relations.
    pub(crate) fn random_bit_len(&self) -> usize {
        self.rels[self.first_random..]
            .iter()
            .map(|r| r.position_count())
            .sum()
    }

    /// Overwrite the random relations from a bitstring laid out relation by
    /// relation (declaration order), tuples by lexicographic rank.
    pub(crate) fn write_random_bits(&mut self, bits: &Bits) {
        debug_assert_eq!(bits.len(), self.random_bit_len());
        let mut cursor = 0;
        for rel in &mut self.rels[self.first_random..] {
            let size = rel.position_count();
            if let RelData::Dense(dense) = &mut rel.data {
                for local in 0..size {
                    dense.set(local, bits.get(cursor + local));
                }
            }
            cursor += size;
        }
    }

    /// Fill the random relations from a word stream (Monte Carlo fast path).
    pub(crate) fn fill_random(&mut self, mut next_word: impl FnMut() -> u64) {
        for rel in &mut self.rels[self.first_random..] {
            if let RelData::Dense(dense) = &mut rel.data {
                dense.fill_from(&mut next_word);
            }
        }
    }
}

pub(crate) fn compile_structure(s: &Structure) -> CompiledStructure {
    let n = s.universe_size();
    let names: Vec<_> = s
        .vocabulary()
        .iter()
        .map(|sym| (sym.name.clone(), sym.arity))
        .collect();
    let rels = s
        .vocabulary()
        .iter()
        .enumerate()
        .map(|(i, sym)| CompiledRel::from_tuples(n, sym.arity, s.relation_by_index(i), true))
        .collect();
    CompiledStructure {
        n,
        names,
        rels,
        first_random: s.vocabulary().len(),
    }
}

#[derive(Clone, Copy)]
enum GuardArg {
    Target,
    Bound(usize),
}

enum Guard {
    Rel { rel: usize, args: Vec<GuardArg> },
    Set { set: usize },
}

enum Node {
    Atom {
        rel: usize,
        args: Vec<usize>,
    },
    Eq(usize, usize),
    SetMember {
        set: usize,
        elem: usize,
    },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists {
        slot: usize,
        guard: Option<Guard>,
        body: Box<Node>,
    },
    Forall {
        slot: usize,
        guard: Option<Guard>,
        body: Box<Node>,
    },
    CountingExists {
        min: usize,
        slot: usize,
        guard: Option<Guard>,
        body: Box<Node>,
    },
    ExistsSet {
        slot: usize,
        body: Box<Node>,
    },
    ForallSet {
        slot: usize,
        body: Box<Node>,
    },
    Rescher {
        slots: Vec<usize>,
        left: Box<Node>,
        right: Box<Node>,
    },
}

pub(crate) struct CompiledFormula {
    root: Node,
    var_slots: usize,
    set_slots: usize,
    /// Free element variables in name order, with their slots.
    free_vars: Vec<(String, usize)>,
    free_sets: Vec<(String, usize)>,
    options: EvalOptions,
}

struct Compiler<'a> {
    cs: &'a CompiledStructure,
    var_scope: Vec<(String, usize)>,
    set_scope: Vec<(String, usize)>,
    var_slots: usize,
    set_slots: usize,
    uses_sets: bool,
}

impl<'a> Compiler<'a> {
    fn var_slot(&self, name: &str) -> Option<usize> {
        self.var_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, s)| s)
    }

    fn set_slot(&self, name: &str) -> Option<usize> {
        self.set_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, s)| s)
    }

    fn fresh_var(&mut self, name: &str) -> usize {
        let slot = self.var_slots;
        self.var_slots += 1;
        self.var_scope.push((name.to_string(), slot));
        slot
    }

    fn fresh_set(&mut self, name: &str) -> usize {
        let slot = self.set_slots;
        self.set_slots += 1;
        self.set_scope.push((name.to_string(), slot));
        slot
    }

    fn compile(&mut self, f: &Formula) -> Result<Node, EvalError> {
        Ok(match f {
            Formula::Atom { rel, args } => {
                let rel_idx = self
                    .cs
                    .index_of(rel, args.len())
                    .ok_or_else(|| EvalError::VocabularyMismatch(rel.clone()))?;
                let slots = args
                    .iter()
                    .map(|a| {
                        self.var_slot(a)
                            .ok_or_else(|| EvalError::UnboundVariable(a.clone()))
                    })
                    .collect::<Result<_, _>>()?;
                Node::Atom {
                    rel: rel_idx,
                    args: slots,
                }
            }
            Formula::Eq(x, y) => Node::Eq(
                self.var_slot(x)
                    .ok_or_else(|| EvalError::UnboundVariable(x.clone()))?,
                self.var_slot(y)
                    .ok_or_else(|| EvalError::UnboundVariable(y.clone()))?,
            ),
            Formula::SetMember { set, element } => {
                self.uses_sets = true;
                Node::SetMember {
                    set: self
                        .set_slot(set)
                        .ok_or_else(|| EvalError::UnboundSetVariable(set.clone()))?,
                    elem: self
                        .var_slot(element)
                        .ok_or_else(|| EvalError::UnboundVariable(element.clone()))?,
                }
            }
            Formula::Not(x) => Node::Not(Box::new(self.compile(x)?)),
            Formula::And(a, b) => Node::And(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Or(a, b) => Node::Or(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Implies(a, b) => {
                Node::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?))
            }
            Formula::Iff(a, b) => Node::Iff(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Exists { var, body } => {
                let (slot, guard, body) = self.compile_scoped(var, body, false)?;
                Node::Exists { slot, guard, body }
            }
            Formula::Forall { var, body } => {
                let (slot, guard, body) = self.compile_scoped(var, body, true)?;
                Node::Forall { slot, guard, body }
            }
            Formula::CountingExists { min, var, body } => {
                let (slot, guard, body) = self.compile_scoped(var, body, false)?;
                Node::CountingExists {
                    min: *min,
                    slot,
                    guard,
                    body,
                }
            }
            Formula::ExistsSet { var, body } => {
                self.uses_sets = true;
                let slot = self.fresh_set(var);
                let body = Box::new(self.compile(body)?);
                self.set_scope.pop();
                Node::ExistsSet { slot, body }
            }
            Formula::ForallSet { var, body } => {
                self.uses_sets = true;
                let slot = self.fresh_set(var);
                let body = Box::new(self.compile(body)?);
                self.set_scope.pop();
                Node::ForallSet { slot, body }
            }
            Formula::Rescher { vars, left, right } => {
                let depth = self.var_scope.len();
                let slots: Vec<_> = vars.iter().map(|v| self.fresh_var(v)).collect();
                let left = Box::new(self.compile(left)?);
                let right = Box::new(self.compile(right)?);
                self.var_scope.truncate(depth);
                Node::Rescher { slots, left, right }
            }
        })
    }

    fn compile_scoped(
        &mut self,
        var: &str,
        body: &Formula,
        from_antecedent: bool,
    ) -> Result<(usize, Option<Guard>, Box<Node>), EvalError> {
        let slot = self.fresh_var(var);
        let guard_src = if from_antecedent {
            match body {
                Formula::Implies(ante, _) => Some(ante.as_ref()),
                _ => None,
            }
        } else {
            Some(body)
        };
        let guard = guard_src.and_then(|g| self.find_guard(g, var));
        let compiled = Box::new(self.compile(body)?);
        self.var_scope.pop();
        Ok((slot, guard, compiled))
    }

    /// First positive atomic conjunct mentioning `var`, if any. The guard is
    /// only a candidate generator; the atom is still part of the body.
    fn find_guard(&self, f: &Formula, var: &str) -> Option<Guard> {
        match f {
            Formula::And(a, b) => self.find_guard(a, var).or_else(|| self.find_guard(b, var)),
            Formula::Atom { rel, args } if args.iter().any(|a| a == var) => {
                let rel_idx = self.cs.index_of(rel, args.len())?;
                let guard_args = args
                    .iter()
                    .map(|a| {
                        if a == var {
                            Some(GuardArg::Target)
                        } else {
                            self.var_slot(a).map(GuardArg::Bound)
                        }
                    })
                    .collect::<Option<Vec<_>>>()?;
                Some(Guard::Rel {
                    rel: rel_idx,
                    args: guard_args,
                })
            }
            Formula::SetMember { set, element } if element == var => {
                self.set_slot(set).map(|s| Guard::Set { set: s })
            }
            _ => None,
        }
    }
}

pub(crate) fn compile_formula(
    f: &Formula,
    cs: &CompiledStructure,
    options: EvalOptions,
) -> Result<CompiledFormula, EvalError> {
    let (free_fo, free_so) = f.free_vars();
    if (!free_so.is_empty() || formula_uses_sets(f)) && cs.n > 64 {
        return Err(EvalError::SetUniverseTooLarge(cs.n));
    }
    let mut compiler = Compiler {
        cs,
        var_scope: Vec::new(),
        set_scope: Vec::new(),
        var_slots: 0,
        set_slots: 0,
        uses_sets: false,
    };
    let free_vars: Vec<(String, usize)> = free_fo
        .iter()
        .map(|name| (name.clone(), compiler.fresh_var(name)))
        .collect();
    let free_sets: Vec<(String, usize)> = free_so
        .iter()
        .map(|name| (name.clone(), compiler.fresh_set(name)))
        .collect();
    let root = compiler.compile(f)?;
    Ok(CompiledFormula {
        root,
        var_slots: compiler.var_slots,
        set_slots: compiler.set_slots,
        free_vars,
        free_sets,
        options,
    })
}

fn formula_uses_sets(f: &Formula) -> bool {
    match f {
        Formula::SetMember { .. } | Formula::ExistsSet { .. } | Formula::ForallSet { .. } => true,
        Formula::Atom { .. } | Formula::Eq(..) => false,
        Formula::Not(x) => formula_uses_sets(x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            formula_uses_sets(a) || formula_uses_sets(b)
        }
        Formula::Exists { body, .. }
        | Formula::Forall { body, .. }
        | Formula::CountingExists { body, .. } => formula_uses_sets(body),
        Formula::Rescher { left, right, .. } => formula_uses_sets(left) || formula_uses_sets(right),
    }
}

struct Env {
    vars: Vec<usize>,
    sets: Vec<u64>,
}

enum Cand<'a> {
    All,
    List(&'a [usize]),
    Owned(Vec<usize>),
}

impl CompiledFormula {
    /// Evaluate with free variables bound positionally (name order).
    pub(crate) fn run(
        &self,
        cs: &CompiledStructure,
        var_values: &[usize],
        set_values: &[u64],
    ) -> bool {
        debug_assert_eq!(var_values.len(), self.free_vars.len());
        debug_assert_eq!(set_values.len(), self.free_sets.len());
        let mut env = Env {
            vars: vec![usize::MAX; self.var_slots],
            sets: vec![0; self.set_slots],
        };
        for ((_, slot), &value) in self.free_vars.iter().zip(var_values) {
            env.vars[*slot] = value;
        }
        for ((_, slot), &value) in self.free_sets.iter().zip(set_values) {
            env.sets[*slot] = value;
        }
        eval_node(&self.root, cs, &mut env, self.options)
    }

    pub(crate) fn check_set_cap(&self, cs: &CompiledStructure) -> Result<(), EvalError> {
        // Enumerating 2^n subsets: the cap is configurable, the u64 mask
        // representation bounds it at 63 regardless.
        if node_has_set_quantifier(&self.root)
            && (cs.n > self.options.set_quantifier_cap || cs.n > 63)
        {
            return Err(EvalError::SetQuantifierCap {
                n: cs.n,
                cap: self.options.set_quantifier_cap.min(63),
            });
        }
        Ok(())
    }
}

fn node_has_set_quantifier(node: &Node) -> bool {
    match node {
        Node::ExistsSet { .. } | Node::ForallSet { .. } => true,
        Node::Atom { .. } | Node::Eq(..) | Node::SetMember { .. } => false,
        Node::Not(x) => node_has_set_quantifier(x),
        Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) | Node::Iff(a, b) => {
            node_has_set_quantifier(a) || node_has_set_quantifier(b)
        }
        Node::Exists { body, .. }
        | Node::Forall { body, .. }
        | Node::CountingExists { body, .. } => node_has_set_quantifier(body),
        Node::Rescher { left, right, .. } => {
            node_has_set_quantifier(left) || node_has_set_quantifier(right)
        }
    }
}

fn candidates<'a>(
    guard: &Option<Guard>,
    cs: &'a CompiledStructure,
    env: &Env,
    options: EvalOptions,
) -> Cand<'a> {
    if !options.guards {
        return Cand::All;
    }
    match guard {
        None => Cand::All,
        Some(Guard::Set { set }) => {
            let mask = env.sets[*set];
            Cand::Owned((0..cs.n).filter(|&e| (mask >> e) & 1 == 1).collect())
        }
        Some(Guard::Rel { rel, args }) => {
            let r = &cs.rels[*rel];
            match (r.arity, args.as_slice()) {
                (1, [GuardArg::Target]) => match &r.support {
                    Some(s) => Cand::List(s),
                    None => Cand::All,
                },
                (2, [GuardArg::Target, GuardArg::Bound(s)]) => match &r.by_second {
                    Some(idx) if env.vars[*s] < idx.len() => Cand::List(&idx[env.vars[*s]]),
                    _ => Cand::All,
                },
                (2, [GuardArg::Bound(s), GuardArg::Target]) => match &r.by_first {
                    Some(idx) if env.vars[*s] < idx.len() => Cand::List(&idx[env.vars[*s]]),
                    _ => Cand::All,
                },
                _ => Cand::All,
            }
        }
    }
}

fn eval_node(node: &Node, cs: &CompiledStructure, env: &mut Env, options: EvalOptions) -> bool {
    match node {
        Node::Atom { rel, args } => {
            let r = &cs.rels[*rel];
            match &r.data {
                RelData::Dense(bits) => {
                    let mut rank = 0u64;
                    for (a, s) in args.iter().zip(&r.strides) {
                        rank += env.vars[*a] as u64 * s;
                    }
                    bits.get(rank as usize)
                }
                RelData::Sparse(set) => {
                    let tuple: Vec<usize> = args.iter().map(|a| env.vars[*a]).collect();
                    set.contains(tuple.as_slice())
                }
            }
        }
        Node::Eq(x, y) => env.vars[*x] == env.vars[*y],
        Node::SetMember { set, elem } => (env.sets[*set] >> env.vars[*elem]) & 1 == 1,
        Node::Not(x) => !eval_node(x, cs, env, options),
        Node::And(a, b) => eval_node(a, cs, env, options) && eval_node(b, cs, env, options),
        Node::Or(a, b) => eval_node(a, cs, env, options) || eval_node(b, cs, env, options),
        Node::Implies(a, b) => !eval_node(a, cs, env, options) || eval_node(b, cs, env, options),
        Node::Iff(a, b) => eval_node(a, cs, env, options) == eval_node(b, cs, env, options),
        Node::Exists { slot, guard, body } => {
            let found = match candidates(guard, cs, env, options) {
                Cand::All => (0..cs.n).any(|v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
                Cand::List(list) => list.iter().any(|&v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
                Cand::Owned(list) => list.into_iter().any(|v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
            };
            env.vars[*slot] = usize::MAX;
            found
        }
        Node::Forall { slot, guard, body } => {
            // Elements outside the guard's extension falsify the antecedent,
            // so only guard candidates need checking.
            let ok = match candidates(guard, cs, env, options) {
                Cand::All => (0..cs.n).all(|v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
                Cand::List(list) => list.iter().all(|&v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
                Cand::Owned(list) => list.into_iter().all(|v| {
                    env.vars[*slot] = v;
                    eval_node(body, cs, env, options)
                }),
            };
            env.vars[*slot] = usize::MAX;
            ok
        }
        Node::CountingExists {
            min,
            slot,
            guard,
            body,
        } => {
            let mut count = 0usize;
            let mut check = |v: usize, env: &mut Env| {
                env.vars[*slot] = v;
                if eval_node(body, cs, env, options) {
                    count += 1;
                }
                count >= *min
            };
            let reached = match candidates(guard, cs, env, options) {
                Cand::All => (0..cs.n).any(|v| check(v, env)),
                Cand::List(list) => list.iter().any(|&v| check(v, env)),
                Cand::Owned(list) => list.into_iter().any(|v| check(v, env)),
            };
            env.vars[*slot] = usize::MAX;
            reached
        }
        Node::ExistsSet { slot, body } => {
            let total: u64 = 1u64 << cs.n;
            let mut found = false;
            for mask in 0..total {
                env.sets[*slot] = mask;
                if eval_node(body, cs, env, options) {
                    found = true;
                    break;
                }
            }
            env.sets[*slot] = 0;
            found
        }
        Node::ForallSet { slot, body } => {
            let total: u64 = 1u64 << cs.n;
            let mut ok = true;
            for mask in 0..total {
                env.sets[*slot] = mask;
                if !eval_node(body, cs, env, options) {
                    ok = false;
                    break;
                }
            }
            env.sets[*slot] = 0;
            ok
        }
        Node::Rescher { slots, left, right } => {
            let left_count = count_tuples(left, slots, cs, env, options, None);
            // The right side can stop as soon as it matches the left count.
            let right_count = count_tuples(right, slots, cs, env, options, Some(left_count));
            for &s in slots {
                env.vars[s] = usize::MAX;
            }
            left_count <= right_count
        }
    }
}

fn count_tuples(
    body: &Node,
    slots: &[usize],
    cs: &CompiledStructure,
    env: &mut Env,
    options: EvalOptions,
    stop_at: Option<u64>,
) -> u64 {
    let k = slots.len();
    let mut tuple = vec![0usize; k];
    let mut count = 0u64;
    'outer: loop {
        for (i, &s) in slots.iter().enumerate() {
            env.vars[s] = tuple[i];
        }
        if eval_node(body, cs, env, options) {
            count += 1;
            if let Some(stop) = stop_at {
                if count >= stop {
                    break 'outer;
                }
            }
        }
        // Odometer increment.
        let mut i = k;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < cs.n {
                break;
            }
            tuple[i] = 0;
        }
    }
    count
}

fn set_to_mask(name: &str, set: &BTreeSet<usize>, n: usize) -> Result<u64, EvalError> {
    let mut mask = 0u64;
    for &e in set {
        if e >= n {
            return Err(EvalError::AssignmentOutOfRange {
                var: name.to_string(),
                value: e,
                n,
            });
        }
        mask |= 1 << e;
    }
    Ok(mask)
}

pub(crate) fn bindings_from_assignment(
    cf: &CompiledFormula,
    asg: &Assignment,
    n: usize,
) -> Result<(Vec<usize>, Vec<u64>), EvalError> {
    let mut vars = Vec::with_capacity(cf.free_vars.len());
    for (name, _) in &cf.free_vars {
        let value = asg
            .vars
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
        if value >= n {
            return Err(EvalError::AssignmentOutOfRange {
                var: name.clone(),
                value,
                n,
            });
        }
        vars.push(value);
    }
    let mut sets = Vec::with_capacity(cf.free_sets.len());
    for (name, _) in &cf.free_sets {
        let set = asg
            .sets
            .get(name)
            .ok_or_else(|| EvalError::UnboundSetVariable(name.clone()))?;
        sets.push(set_to_mask(name, set, n)?);
    }
    Ok((vars, sets))
}

/// Tarskian truth of `f` in `s` under `asg`, with default options.
pub fn evaluate(s: &Structure, f: &Formula, asg: &Assignment) -> Result<bool, EvalError> {
    evaluate_with(s, f, asg, EvalOptions::default())
}

pub fn evaluate_with(
    s: &Structure,
    f: &Formula,
    asg: &Assignment,
    options: EvalOptions,
) -> Result<bool, EvalError> {
    let cs = compile_structure(s);
    let cf = compile_formula(f, &cs, options)?;
    cf.check_set_cap(&cs)?;
    let (vars, sets) = bindings_from_assignment(&cf, asg, cs.n)?;
    Ok(cf.run(&cs, &vars, &sets))
}

/// All bindings of the free element variables (in name order) that make `f`
/// true in `s`.
pub fn query(s: &Structure, f: &Formula) -> Result<BTreeSet<Vec<usize>>, EvalError> {
    query_with(s, f, EvalOptions::default())
}

pub fn query_with(
    s: &Structure,
    f: &Formula,
    options: EvalOptions,
) -> Result<BTreeSet<Vec<usize>>, EvalError> {
    let cs = compile_structure(s);
    let cf = compile_formula(f, &cs, options)?;
    cf.check_set_cap(&cs)?;
    if let Some((name, _)) = cf.free_sets.first() {
        return Err(EvalError::SetVariableInQuery(name.clone()));
    }
    let k = cf.free_vars.len();
    let mut out = BTreeSet::new();
    let mut tuple = vec![0usize; k];
    loop {
        if cf.run(&cs, &tuple, &[]) {
            out.insert(tuple.clone());
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < cs.n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// The unique element a one-free-variable formula defines, if any.
pub fn element_defined_by(s: &Structure, f: &Formula) -> Result<usize, EvalError> {
    let (fo, _) = f.free_vars();
    if fo.len() != 1 {
        return Err(EvalError::WrongFreeVariableCount {
            expected: 1,
            found: fo.len(),
        });
    }
    let witnesses = query(s, f)?;
    if witnesses.len() != 1 {
        return Err(EvalError::NotADefinition {
            witnesses: witnesses.len(),
        });
    }
    Ok(witnesses.first().unwrap()[0])
}

/// Whether a two-free-variable formula defines a linear order on the
/// universe: reflexive, transitive, antisymmetric and total.
pub fn defines_linear_order(s: &Structure, f: &Formula) -> Result<bool, EvalError> {
    let (fo, _) = f.free_vars();
    if fo.len() != 2 {
        return Err(EvalError::WrongFreeVariableCount {
            expected: 2,
            found: fo.len(),
        });
    }
    let pairs = query(s, f)?;
    let n = s.universe_size();
    let holds = |a: usize, b: usize| pairs.contains([a, b].as_slice());
    for a in 0..n {
        if !holds(a, a) {
            return Ok(false);
        }
        for b in 0..n {
            if !holds(a, b) && !holds(b, a) {
                return Ok(false);
            }
            if a != b && holds(a, b) && holds(b, a) {
                return Ok(false);
            }
            for c in 0..n {
                if holds(a, b) && holds(b, c) && !holds(a, c) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
