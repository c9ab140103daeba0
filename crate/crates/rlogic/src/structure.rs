//! Finite relational structures over canonical universes `0..n`.
//!
//! A [`Structure`] owns a [`Vocabulary`] (relation symbols in declaration
//! order) and one tuple set per symbol. The distinguished symbols `leq`,
//! `plus` and `times` are built-ins: whenever they occur, their relations
//! must equal the arithmetic relations on `0..n` exactly, so "isomorphic to
//! the canonical arithmetic structure" becomes literal equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Names of the distinguished arithmetic relation symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Leq,
    Plus,
    Times,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Leq => "leq",
            Builtin::Plus => "plus",
            Builtin::Times => "times",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Leq => 2,
            Builtin::Plus | Builtin::Times => 3,
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "leq" => Some(Builtin::Leq),
            "plus" => Some(Builtin::Plus),
            "times" => Some(Builtin::Times),
            _ => None,
        }
    }

    /// The canonical relation on the universe `0..n`.
    pub fn relation(self, n: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        match self {
            Builtin::Leq => {
                for a in 0..n {
                    for b in a..n {
                        out.insert(vec![a, b]);
                    }
                }
            }
            Builtin::Plus => {
                for a in 0..n {
                    for b in 0..n.saturating_sub(a) {
                        out.insert(vec![a, b, a + b]);
                    }
                }
            }
            Builtin::Times => {
                for a in 0..n {
                    for b in 0..n {
                        if a * b < n {
                            out.insert(vec![a, b, a * b]);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("universe must have at least one element")]
    EmptyUniverse,
    #[error("relation symbol `{0}` has arity 0; only arity >= 1 is supported")]
    ZeroArity(String),
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("built-in symbol `{name}` must have arity {expected}, got {got}")]
    BuiltinArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("missing relation for symbol `{0}`")]
    MissingRelation(String),
    #[error("relation `{0}` has no matching vocabulary symbol")]
    UnknownRelation(String),
    #[error("tuple {tuple:?} in `{name}` does not match arity {arity}")]
    TupleArity {
        name: String,
        tuple: Vec<usize>,
        arity: usize,
    },
    #[error("tuple {tuple:?} in `{name}` is out of range for universe size {n}")]
    TupleRange {
        name: String,
        tuple: Vec<usize>,
        n: usize,
    },
    #[error("built-in `{0}` does not equal the canonical arithmetic relation")]
    BuiltinMismatch(String),
    #[error("symbol `{0}` already present in the vocabulary")]
    SymbolClash(String),
    #[error("`{0}` is not a subset of the structure's vocabulary")]
    NotASubVocabulary(String),
    #[error("renaming is not defined on symbol `{0}`")]
    RenamingDomain(String),
    #[error("renaming source does not match the structure's vocabulary")]
    RenamingSourceMismatch,
    #[error("renaming is not injective: `{0}` appears twice as a target")]
    RenamingNotInjective(String),
    #[error("permutation must be a bijection on 0..{0}")]
    BadPermutation(usize),
}

/// A relation symbol: a name together with a fixed arity >= 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> RelationSymbol {
        RelationSymbol {
            name: name.into(),
            arity,
        }
    }
}

/// A finite set of relation symbols, kept in declaration order.
///
/// Declaration order is semantically relevant: the bit layout of random
/// expansions enumerates symbols in this order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    symbols: Vec<RelationSymbol>,
}

impl Vocabulary {
    pub fn empty() -> Vocabulary {
        Vocabulary::default()
    }

    pub fn new(symbols: Vec<RelationSymbol>) -> Result<Vocabulary, StructureError> {
        let mut seen = BTreeSet::new();
        for sym in &symbols {
            if sym.arity == 0 {
                return Err(StructureError::ZeroArity(sym.name.clone()));
            }
            if !seen.insert(sym.name.clone()) {
                return Err(StructureError::DuplicateSymbol(sym.name.clone()));
            }
            if let Some(b) = Builtin::from_name(&sym.name) {
                if sym.arity != b.arity() {
                    return Err(StructureError::BuiltinArity {
                        name: sym.name.clone(),
                        expected: b.arity(),
                        got: sym.arity,
                    });
                }
            }
        }
        Ok(Vocabulary { symbols })
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn parse(pairs: &[(&str, usize)]) -> Result<Vocabulary, StructureError> {
        Vocabulary::new(
            pairs
                .iter()
                .map(|&(n, a)| RelationSymbol::new(n, a))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn iter(&self) -> impl Iterator<Item = &RelationSymbol> {
        self.symbols.iter()
    }

    pub fn get(&self, name: &str) -> Option<&RelationSymbol> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Subset check by name *and* arity.
    pub fn is_subset_of(&self, other: &Vocabulary) -> bool {
        self.symbols
            .iter()
            .all(|s| other.get(&s.name).map(|o| o.arity) == Some(s.arity))
    }

    pub fn is_disjoint_from(&self, other: &Vocabulary) -> bool {
        self.symbols.iter().all(|s| !other.contains(&s.name))
    }

    /// Concatenation, preserving declaration order. Fails on name clashes.
    pub fn union(&self, other: &Vocabulary) -> Result<Vocabulary, StructureError> {
        let mut symbols = self.symbols.clone();
        for sym in &other.symbols {
            if self.contains(&sym.name) {
                return Err(StructureError::SymbolClash(sym.name.clone()));
            }
            symbols.push(sym.clone());
        }
        Vocabulary::new(symbols)
    }
}

/// An arity-preserving bijection between two vocabularies, given as
/// `(source, target)` name pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Renaming {
    pairs: Vec<(String, String)>,
}

impl Renaming {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Renaming, StructureError> {
        let mut sources = BTreeSet::new();
        let mut targets = BTreeSet::new();
        for (src, tgt) in &pairs {
            if !sources.insert(src.clone()) {
                return Err(StructureError::DuplicateSymbol(src.clone()));
            }
            if !targets.insert(tgt.clone()) {
                return Err(StructureError::RenamingNotInjective(tgt.clone()));
            }
        }
        Ok(Renaming { pairs })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Renaming, StructureError> {
        Renaming::new(
            pairs
                .iter()
                .map(|&(s, t)| (s.to_string(), t.to_string()))
                .collect(),
        )
    }

    /// The identity renaming on a vocabulary.
    pub fn identity(vocab: &Vocabulary) -> Renaming {
        Renaming {
            pairs: vocab
                .iter()
                .map(|s| (s.name.clone(), s.name.clone()))
                .collect(),
        }
    }

    pub fn target(&self, source: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(s, _)| s == source)
            .map(|(_, t)| t.as_str())
    }

    pub fn inverse(&self) -> Renaming {
        Renaming {
            pairs: self
                .pairs
                .iter()
                .map(|(s, t)| (t.clone(), s.clone()))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// True when the source names are exactly `vocab`'s names.
    pub fn covers_exactly(&self, vocab: &Vocabulary) -> bool {
        self.pairs.len() == vocab.len() && self.pairs.iter().all(|(s, _)| vocab.contains(s))
    }
}

/// A finite relational structure with universe `0..universe_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    universe_size: usize,
    vocab: Vocabulary,
    /// One tuple set per vocabulary symbol, in declaration order.
    relations: Vec<BTreeSet<Vec<usize>>>,
}

impl Structure {
    /// Build and validate a structure from a symbol -> tuple-set map.
    pub fn new(
        universe_size: usize,
        vocab: Vocabulary,
        mut relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ) -> Result<Structure, StructureError> {
        if universe_size == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        let mut ordered = Vec::with_capacity(vocab.len());
        for sym in vocab.iter() {
            let tuples = relations
                .remove(&sym.name)
                .ok_or_else(|| StructureError::MissingRelation(sym.name.clone()))?;
            for tuple in &tuples {
                if tuple.len() != sym.arity {
                    return Err(StructureError::TupleArity {
                        name: sym.name.clone(),
                        tuple: tuple.clone(),
                        arity: sym.arity,
                    });
                }
                if tuple.iter().any(|&x| x >= universe_size) {
                    return Err(StructureError::TupleRange {
                        name: sym.name.clone(),
                        tuple: tuple.clone(),
                        n: universe_size,
                    });
                }
            }
            if let Some(b) = Builtin::from_name(&sym.name) {
                if tuples != b.relation(universe_size) {
                    return Err(StructureError::BuiltinMismatch(sym.name.clone()));
                }
            }
            ordered.push(tuples);
        }
        if let Some(extra) = relations.keys().next() {
            return Err(StructureError::UnknownRelation(extra.clone()));
        }
        Ok(Structure {
            universe_size,
            vocab,
            relations: ordered,
        })
    }

    /// The structure with universe `0..n` and empty vocabulary.
    pub fn empty(n: usize) -> Result<Structure, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        Ok(Structure {
            universe_size: n,
            vocab: Vocabulary::empty(),
            relations: Vec::new(),
        })
    }

    /// The canonical arithmetic structure on `0..n`, restricted to the
    /// requested built-in symbols.
    pub fn arithmetic(n: usize, which: &[Builtin]) -> Result<Structure, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        let mut symbols = Vec::new();
        let mut relations = Vec::new();
        for &b in which {
            if seen.insert(b) {
                symbols.push(RelationSymbol::new(b.name(), b.arity()));
                relations.push(b.relation(n));
            }
        }
        Ok(Structure {
            universe_size: n,
            vocab: Vocabulary::new(symbols)?,
            relations,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.vocab.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relation_by_index(&self, index: usize) -> &BTreeSet<Vec<usize>> {
        &self.relations[index]
    }

    pub fn contains(&self, name: &str, tuple: &[usize]) -> bool {
        self.relation(name)
            .map(|r| r.contains(tuple))
            .unwrap_or(false)
    }

    /// Expansion by new relations over the same universe.
    pub fn expand(
        &self,
        new_relations: BTreeMap<String, (usize, BTreeSet<Vec<usize>>)>,
    ) -> Result<Structure, StructureError> {
        let mut symbols = self.vocab.symbols().to_vec();
        let mut map: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for (sym, rel) in self.vocab.iter().zip(&self.relations) {
            map.insert(sym.name.clone(), rel.clone());
        }
        for (name, (arity, tuples)) in new_relations {
            if self.vocab.contains(&name) {
                return Err(StructureError::SymbolClash(name));
            }
            symbols.push(RelationSymbol::new(&name, arity));
            map.insert(name, tuples);
        }
        Structure::new(self.universe_size, Vocabulary::new(symbols)?, map)
    }

    /// Restriction to a sub-vocabulary (same universe, relations forgotten).
    pub fn restrict(&self, sigma: &Vocabulary) -> Result<Structure, StructureError> {
        for sym in sigma.iter() {
            match self.vocab.get(&sym.name) {
                Some(own) if own.arity == sym.arity => {}
                _ => return Err(StructureError::NotASubVocabulary(sym.name.clone())),
            }
        }
        let relations = sigma
            .iter()
            .map(|sym| self.relations[self.vocab.index_of(&sym.name).unwrap()].clone())
            .collect();
        Ok(Structure {
            universe_size: self.universe_size,
            vocab: sigma.clone(),
            relations,
        })
    }

    /// Carry the relations over to renamed symbols; the renaming's source
    /// must be exactly this structure's vocabulary.
    pub fn rename(&self, renaming: &Renaming) -> Result<Structure, StructureError> {
        if !renaming.covers_exactly(&self.vocab) {
            return Err(StructureError::RenamingSourceMismatch);
        }
        let mut symbols = Vec::with_capacity(self.vocab.len());
        for sym in self.vocab.iter() {
            let target = renaming
                .target(&sym.name)
                .ok_or_else(|| StructureError::RenamingDomain(sym.name.clone()))?;
            symbols.push(RelationSymbol::new(target, sym.arity));
        }
        let mut map = BTreeMap::new();
        for (sym, rel) in symbols.iter().zip(&self.relations) {
            map.insert(sym.name.clone(), rel.clone());
        }
        Structure::new(self.universe_size, Vocabulary::new(symbols)?, map)
    }

    /// The isomorphic image of this structure under a permutation of the
    /// universe (used by isomorphism-invariance tests).
    pub fn apply_permutation(&self, perm: &[usize]) -> Result<Structure, StructureError> {
        let n = self.universe_size;
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(StructureError::BadPermutation(n));
        }
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .map(|t| t.iter().map(|&x| perm[x]).collect::<Vec<_>>())
                    .collect::<BTreeSet<_>>()
            })
            .collect();
        Ok(Structure {
            universe_size: n,
            vocab: self.vocab.clone(),
            relations,
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "universe 0..{};", self.universe_size)?;
        for (sym, rel) in self.vocab.iter().zip(&self.relations) {
            write!(f, " {}/{}: {} tuples;", sym.name, sym.arity, rel.len())?;
        }
        Ok(())
    }
}

/// Rank of a tuple over `0..n` in lexicographic order, most significant
/// component first. This order is a cross-module contract: random-expansion
/// bit layouts and the pseudorandom generator both key bits by it.
pub fn tuple_rank(tuple: &[usize], n: usize) -> u64 {
    let mut rank = 0u64;
    for &t in tuple {
        rank = rank * n as u64 + t as u64;
    }
    rank
}

/// Inverse of [`tuple_rank`].
pub fn tuple_unrank(mut rank: u64, n: usize, arity: usize) -> Vec<usize> {
    let mut tuple = vec![0usize; arity];
    for slot in tuple.iter_mut().rev() {
        *slot = (rank % n as u64) as usize;
        rank /= n as u64;
    }
    tuple
}

/// On-disk representation of a structure (`universe`, `vocab`, `relations`).
#[derive(Debug, Serialize, Deserialize)]
pub struct StructureFile {
    pub universe: usize,
    pub vocab: Vec<RelationSymbol>,
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl StructureFile {
    pub fn from_structure(s: &Structure) -> StructureFile {
        StructureFile {
            universe: s.universe_size(),
            vocab: s.vocabulary().symbols().to_vec(),
            relations: s
                .vocabulary()
                .iter()
                .map(|sym| {
                    (
                        sym.name.clone(),
                        s.relation(&sym.name)
                            .unwrap()
                            .iter()
                            .cloned()
                            .collect::<Vec<_>>(),
                    )
                })
                .collect(),
        }
    }

    pub fn into_structure(self) -> Result<Structure, StructureError> {
        let vocab = Vocabulary::new(self.vocab)?;
        let relations = self
            .relations
            .into_iter()
            .map(|(name, tuples)| (name, tuples.into_iter().collect::<BTreeSet<_>>()))
            .collect();
        Structure::new(self.universe, vocab, relations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(tuples: &[&[usize]]) -> BTreeSet<Vec<usize>> {
        tuples.iter().map(|t| t.to_vec()).collect()
    }

    #[test]
    fn empty_structure_basics() {
        let s1 = Structure::empty(1).unwrap();
        assert_eq!(s1.universe_size(), 1);
        assert!(s1.vocabulary().is_empty());

        let s5 = Structure::empty(5).unwrap();
        assert_eq!(s5.universe_size(), 5);

        assert!(matches!(
            Structure::empty(0),
            Err(StructureError::EmptyUniverse)
        ));
    }

    #[test]
    fn arithmetic_plus_examples() {
        let n3 = Structure::arithmetic(3, &[Builtin::Plus]).unwrap();
        assert!(n3.contains("plus", &[1, 1, 2]));
        // (2, 2, c) has no completion: 4 is out of range.
        for c in 0..3 {
            assert!(!n3.contains("plus", &[2, 2, c]));
        }

        // Brute-force count over all triples in [0,4)^3.
        let n4 = Structure::arithmetic(4, &[Builtin::Plus]).unwrap();
        let mut count = 0;
        for a in 0..4usize {
            for b in 0..4usize {
                for c in 0..4usize {
                    if a + b == c {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 10);
        assert_eq!(n4.relation("plus").unwrap().len(), 10);
    }

    #[test]
    fn builtin_sizes_match_closed_forms() {
        for n in 1..=64usize {
            let s = Structure::arithmetic(n, &[Builtin::Leq, Builtin::Plus]).unwrap();
            assert_eq!(s.relation("leq").unwrap().len(), n * (n + 1) / 2, "n={n}");
            assert_eq!(s.relation("plus").unwrap().len(), n * (n + 1) / 2, "n={n}");
        }
    }

    #[test]
    fn expand_and_errors() {
        let s2 = Structure::empty(2).unwrap();
        let mut new = BTreeMap::new();
        new.insert("R".to_string(), (1, rel(&[&[0]])));
        let expanded = s2.expand(new).unwrap();
        assert!(expanded.contains("R", &[0]));
        assert!(!expanded.contains("R", &[1]));

        // Identity expansion.
        let same = s2.expand(BTreeMap::new()).unwrap();
        assert_eq!(same, s2);

        // A built-in must equal the canonical relation; {(0,1)} misses the
        // reflexive pairs of leq on two elements.
        let mut bad = BTreeMap::new();
        bad.insert("leq".to_string(), (2, rel(&[&[0, 1]])));
        assert!(matches!(
            s2.expand(bad),
            Err(StructureError::BuiltinMismatch(_))
        ));

        // Out-of-range tuple.
        let mut oor = BTreeMap::new();
        oor.insert("Q".to_string(), (1, rel(&[&[7]])));
        assert!(matches!(
            s2.expand(oor),
            Err(StructureError::TupleRange { .. })
        ));

        // Name clash.
        let mut clash = BTreeMap::new();
        clash.insert("R".to_string(), (1, rel(&[])));
        assert!(matches!(
            expanded.expand(clash),
            Err(StructureError::SymbolClash(_))
        ));
    }

    #[test]
    fn restrict_behaviour() {
        let n4 = Structure::arithmetic(4, &[Builtin::Leq, Builtin::Plus]).unwrap();
        let leq_only = n4
            .restrict(&Vocabulary::parse(&[("leq", 2)]).unwrap())
            .unwrap();
        assert_eq!(leq_only.vocabulary().len(), 1);
        assert_eq!(
            leq_only.relation("leq"),
            Structure::arithmetic(4, &[Builtin::Leq])
                .unwrap()
                .relation("leq")
        );

        // Restriction to the full vocabulary is the identity.
        assert_eq!(n4.restrict(n4.vocabulary()).unwrap(), n4);

        let s2 = Structure::empty(2).unwrap();
        assert!(matches!(
            s2.restrict(&Vocabulary::parse(&[("R", 1)]).unwrap()),
            Err(StructureError::NotASubVocabulary(_))
        ));
    }

    #[test]
    fn rename_roundtrip() {
        let s2 = Structure::empty(2).unwrap();
        let mut new = BTreeMap::new();
        new.insert("R".to_string(), (2, rel(&[&[0, 1]])));
        let a = s2.expand(new).unwrap();

        let r = Renaming::from_pairs(&[("R", "Rp")]).unwrap();
        let b = a.rename(&r).unwrap();
        assert!(b.contains("Rp", &[0, 1]));
        assert!(b.relation("R").is_none());

        // Identity renaming gives an equal structure.
        assert_eq!(a.rename(&Renaming::identity(a.vocabulary())).unwrap(), a);

        // Renaming there and back recovers the original.
        assert_eq!(b.rename(&r.inverse()).unwrap(), a);

        // Source vocabulary mismatch.
        let bad = Renaming::from_pairs(&[("Q", "Qp")]).unwrap();
        assert!(matches!(
            a.rename(&bad),
            Err(StructureError::RenamingSourceMismatch)
        ));
    }

    #[test]
    fn restrict_after_expand_is_identity() {
        let n3 = Structure::arithmetic(3, &[Builtin::Leq]).unwrap();
        let mut new = BTreeMap::new();
        new.insert("R".to_string(), (1, rel(&[&[2]])));
        let expanded = n3.expand(new).unwrap();
        assert_eq!(expanded.restrict(n3.vocabulary()).unwrap(), n3);
    }

    #[test]
    fn validation_rejects_out_of_range_exhaustively() {
        // Every tuple with any component >= n is rejected, checked over all
        // unary tuples up to 8 on a 4-element universe.
        let s = Structure::empty(4).unwrap();
        for x in 0..8usize {
            let mut new = BTreeMap::new();
            new.insert("U".to_string(), (1, rel(&[&[x]])));
            let got = s.expand(new);
            assert_eq!(got.is_ok(), x < 4, "x={x}");
        }
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for n in 1..=5usize {
            for arity in 1..=3usize {
                let total = (n as u64).pow(arity as u32);
                for r in 0..total {
                    let t = tuple_unrank(r, n, arity);
                    assert_eq!(tuple_rank(&t, n), r);
                }
            }
        }
        // Most significant component first.
        assert_eq!(tuple_rank(&[1, 0], 3), 3);
        assert_eq!(tuple_rank(&[0, 1], 3), 1);
    }

    #[test]
    fn structure_file_roundtrip() {
        let n3 = Structure::arithmetic(3, &[Builtin::Leq]).unwrap();
        let mut new = BTreeMap::new();
        new.insert("R".to_string(), (2, rel(&[&[0, 2], &[1, 1]])));
        let a = n3.expand(new).unwrap();
        let json = serde_json::to_string(&StructureFile::from_structure(&a)).unwrap();
        let back: StructureFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_structure().unwrap(), a);
    }

    #[test]
    fn vocabulary_builtin_arity_enforced() {
        assert!(matches!(
            Vocabulary::parse(&[("leq", 3)]),
            Err(StructureError::BuiltinArity { .. })
        ));
        assert!(Vocabulary::parse(&[("leq", 2), ("plus", 3)]).is_ok());
    }
}
