//! Formula syntax and semantics: first-order logic with counting
//! quantifiers, monadic set quantifiers and the Rescher cardinality
//! quantifier, over the structures of [`crate::structure`].
//!
//! The concrete grammar lives in [`parse()`], the evaluator in [`evaluate()`].

mod eval;
mod parse;

pub(crate) use eval::{
    bindings_from_assignment, compile_formula, compile_structure, CompiledFormula,
    CompiledStructure,
};
pub use eval::{
    defines_linear_order, element_defined_by, evaluate, evaluate_with, query, query_with,
    Assignment, EvalError, EvalOptions,
};
pub use parse::{parse, parse_in, ParseError};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::structure::{Renaming, Vocabulary};

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("symbol `{symbol}` is used with arities {first} and {second}")]
    ArityConflict {
        symbol: String,
        first: usize,
        second: usize,
    },
    #[error(
        "relation symbol `{0}` starts with X, Y or Z; those names are reserved for set variables"
    )]
    ReservedSymbolName(String),
    #[error("renaming is not defined on symbol `{0}`")]
    RenamingDomain(String),
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
}

/// Abstract syntax of formulas.
///
/// Variables are plain strings: lowercase names are element variables,
/// names starting with `X`, `Y` or `Z` are monadic set variables. Scoping is
/// by name with the usual shadowing rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `R(x1, ..., xk)`
    Atom {
        rel: String,
        args: Vec<String>,
    },
    /// `x = y`
    Eq(String, String),
    /// `X(x)` for a set variable `X`
    SetMember {
        set: String,
        element: String,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists {
        var: String,
        body: Box<Formula>,
    },
    Forall {
        var: String,
        body: Box<Formula>,
    },
    /// `exists>= min var. body`, with `min >= 1`
    CountingExists {
        min: usize,
        var: String,
        body: Box<Formula>,
    },
    ExistsSet {
        var: String,
        body: Box<Formula>,
    },
    ForallSet {
        var: String,
        body: Box<Formula>,
    },
    /// `J x1 .. xk. (left) (right)`: true when the number of tuples
    /// satisfying `left` is at most the number satisfying `right`.
    Rescher {
        vars: Vec<String>,
        left: Box<Formula>,
        right: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(rel: impl Into<String>, args: &[&str]) -> Formula {
        Formula::Atom {
            rel: rel.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn eq(x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::Eq(x.into(), y.into())
    }

    pub fn set_member(set: impl Into<String>, element: impl Into<String>) -> Formula {
        Formula::SetMember {
            set: set.into(),
            element: element.into(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn counting_exists(min: usize, var: impl Into<String>, body: Formula) -> Formula {
        assert!(min >= 1, "counting quantifier needs a threshold >= 1");
        Formula::CountingExists {
            min,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn exists_set(var: impl Into<String>, body: Formula) -> Formula {
        Formula::ExistsSet {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn forall_set(var: impl Into<String>, body: Formula) -> Formula {
        Formula::ForallSet {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn rescher(vars: &[&str], left: Formula, right: Formula) -> Formula {
        assert!(
            !vars.is_empty(),
            "Rescher quantifier binds at least one variable"
        );
        Formula::Rescher {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Right-folded conjunction of a non-empty sequence.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<_> = parts.into_iter().collect();
        assert!(!parts.is_empty(), "and_all needs at least one conjunct");
        let mut acc = parts.pop().unwrap();
        while let Some(f) = parts.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// Right-folded disjunction of a non-empty sequence.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<_> = parts.into_iter().collect();
        assert!(!parts.is_empty(), "or_all needs at least one disjunct");
        let mut acc = parts.pop().unwrap();
        while let Some(f) = parts.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    /// Free element variables and free set variables.
    pub fn free_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut fo = BTreeSet::new();
        let mut so = BTreeSet::new();
        let mut bound_fo = Vec::new();
        let mut bound_so = Vec::new();
        collect_free(self, &mut bound_fo, &mut bound_so, &mut fo, &mut so);
        (fo, so)
    }

    /// Maximum quantifier nesting depth. The counting and Rescher
    /// quantifiers count as one level over their whole bound tuple.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) | Formula::SetMember { .. } => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Exists { body, .. }
            | Formula::Forall { body, .. }
            | Formula::CountingExists { body, .. }
            | Formula::ExistsSet { body, .. }
            | Formula::ForallSet { body, .. } => 1 + body.quantifier_rank(),
            Formula::Rescher { left, right, .. } => {
                1 + left.quantifier_rank().max(right.quantifier_rank())
            }
        }
    }

    /// The relation symbols occurring in the formula, in order of first
    /// occurrence. Fails on conflicting arities or reserved names.
    pub fn vocabulary(&self) -> Result<Vocabulary, LogicError> {
        let mut seen: Vec<(String, usize)> = Vec::new();
        collect_symbols(self, &mut seen)?;
        Ok(Vocabulary::new(
            seen.into_iter()
                .map(|(name, arity)| crate::structure::RelationSymbol::new(name, arity))
                .collect(),
        )?)
    }

    /// Replace every atom's relation symbol through `renaming`; the renaming
    /// must be defined on all symbols of the formula.
    pub fn rename_symbols(&self, renaming: &Renaming) -> Result<Formula, LogicError> {
        let out = match self {
            Formula::Atom { rel, args } => Formula::Atom {
                rel: renaming
                    .target(rel)
                    .ok_or_else(|| LogicError::RenamingDomain(rel.clone()))?
                    .to_string(),
                args: args.clone(),
            },
            Formula::Eq(..) | Formula::SetMember { .. } => self.clone(),
            Formula::Not(f) => Formula::not(f.rename_symbols(renaming)?),
            Formula::And(a, b) => {
                Formula::and(a.rename_symbols(renaming)?, b.rename_symbols(renaming)?)
            }
            Formula::Or(a, b) => {
                Formula::or(a.rename_symbols(renaming)?, b.rename_symbols(renaming)?)
            }
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_symbols(renaming)?, b.rename_symbols(renaming)?)
            }
            Formula::Iff(a, b) => {
                Formula::iff(a.rename_symbols(renaming)?, b.rename_symbols(renaming)?)
            }
            Formula::Exists { var, body } => {
                Formula::exists(var.clone(), body.rename_symbols(renaming)?)
            }
            Formula::Forall { var, body } => {
                Formula::forall(var.clone(), body.rename_symbols(renaming)?)
            }
            Formula::CountingExists { min, var, body } => Formula::CountingExists {
                min: *min,
                var: var.clone(),
                body: Box::new(body.rename_symbols(renaming)?),
            },
            Formula::ExistsSet { var, body } => {
                Formula::exists_set(var.clone(), body.rename_symbols(renaming)?)
            }
            Formula::ForallSet { var, body } => {
                Formula::forall_set(var.clone(), body.rename_symbols(renaming)?)
            }
            Formula::Rescher { vars, left, right } => Formula::Rescher {
                vars: vars.clone(),
                left: Box::new(left.rename_symbols(renaming)?),
                right: Box::new(right.rename_symbols(renaming)?),
            },
        };
        Ok(out)
    }

    /// Rewrite atoms bottom-up: `f` returns `Some(replacement)` to substitute
    /// an atom, `None` to keep it.
    pub fn map_atoms(&self, f: &mut impl FnMut(&str, &[String]) -> Option<Formula>) -> Formula {
        match self {
            Formula::Atom { rel, args } => f(rel, args).unwrap_or_else(|| self.clone()),
            Formula::Eq(..) | Formula::SetMember { .. } => self.clone(),
            Formula::Not(x) => Formula::not(x.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Iff(a, b) => Formula::iff(a.map_atoms(f), b.map_atoms(f)),
            Formula::Exists { var, body } => Formula::exists(var.clone(), body.map_atoms(f)),
            Formula::Forall { var, body } => Formula::forall(var.clone(), body.map_atoms(f)),
            Formula::CountingExists { min, var, body } => Formula::CountingExists {
                min: *min,
                var: var.clone(),
                body: Box::new(body.map_atoms(f)),
            },
            Formula::ExistsSet { var, body } => Formula::exists_set(var.clone(), body.map_atoms(f)),
            Formula::ForallSet { var, body } => Formula::forall_set(var.clone(), body.map_atoms(f)),
            Formula::Rescher { vars, left, right } => Formula::Rescher {
                vars: vars.clone(),
                left: Box::new(left.map_atoms(f)),
                right: Box::new(right.map_atoms(f)),
            },
        }
    }

    /// Every variable name occurring anywhere (free or bound).
    pub fn all_variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_names(self, &mut out);
        out
    }
}

fn collect_free(
    f: &Formula,
    bound_fo: &mut Vec<String>,
    bound_so: &mut Vec<String>,
    fo: &mut BTreeSet<String>,
    so: &mut BTreeSet<String>,
) {
    match f {
        Formula::Atom { args, .. } => {
            for a in args {
                if !bound_fo.iter().any(|b| b == a) {
                    fo.insert(a.clone());
                }
            }
        }
        Formula::Eq(x, y) => {
            for a in [x, y] {
                if !bound_fo.iter().any(|b| b == a) {
                    fo.insert(a.clone());
                }
            }
        }
        Formula::SetMember { set, element } => {
            if !bound_so.iter().any(|b| b == set) {
                so.insert(set.clone());
            }
            if !bound_fo.iter().any(|b| b == element) {
                fo.insert(element.clone());
            }
        }
        Formula::Not(x) => collect_free(x, bound_fo, bound_so, fo, so),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound_fo, bound_so, fo, so);
            collect_free(b, bound_fo, bound_so, fo, so);
        }
        Formula::Exists { var, body }
        | Formula::Forall { var, body }
        | Formula::CountingExists { var, body, .. } => {
            bound_fo.push(var.clone());
            collect_free(body, bound_fo, bound_so, fo, so);
            bound_fo.pop();
        }
        Formula::ExistsSet { var, body } | Formula::ForallSet { var, body } => {
            bound_so.push(var.clone());
            collect_free(body, bound_fo, bound_so, fo, so);
            bound_so.pop();
        }
        Formula::Rescher { vars, left, right } => {
            let depth = bound_fo.len();
            bound_fo.extend(vars.iter().cloned());
            collect_free(left, bound_fo, bound_so, fo, so);
            collect_free(right, bound_fo, bound_so, fo, so);
            bound_fo.truncate(depth);
        }
    }
}

fn collect_symbols(f: &Formula, seen: &mut Vec<(String, usize)>) -> Result<(), LogicError> {
    match f {
        Formula::Atom { rel, args } => {
            if matches!(rel.chars().next(), Some('X' | 'Y' | 'Z')) {
                return Err(LogicError::ReservedSymbolName(rel.clone()));
            }
            match seen.iter().find(|(name, _)| name == rel) {
                Some(&(_, arity)) if arity != args.len() => {
                    return Err(LogicError::ArityConflict {
                        symbol: rel.clone(),
                        first: arity,
                        second: args.len(),
                    })
                }
                Some(_) => {}
                None => seen.push((rel.clone(), args.len())),
            }
        }
        Formula::Eq(..) | Formula::SetMember { .. } => {}
        Formula::Not(x) => collect_symbols(x, seen)?,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_symbols(a, seen)?;
            collect_symbols(b, seen)?;
        }
        Formula::Exists { body, .. }
        | Formula::Forall { body, .. }
        | Formula::CountingExists { body, .. }
        | Formula::ExistsSet { body, .. }
        | Formula::ForallSet { body, .. } => collect_symbols(body, seen)?,
        Formula::Rescher { left, right, .. } => {
            collect_symbols(left, seen)?;
            collect_symbols(right, seen)?;
        }
    }
    Ok(())
}

fn collect_names(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
        Formula::Eq(x, y) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        Formula::SetMember { set, element } => {
            out.insert(set.clone());
            out.insert(element.clone());
        }
        Formula::Not(x) => collect_names(x, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        Formula::Exists { var, body }
        | Formula::Forall { var, body }
        | Formula::CountingExists { var, body, .. }
        | Formula::ExistsSet { var, body }
        | Formula::ForallSet { var, body } => {
            out.insert(var.clone());
            collect_names(body, out);
        }
        Formula::Rescher { vars, left, right } => {
            out.extend(vars.iter().cloned());
            collect_names(left, out);
            collect_names(right, out);
        }
    }
}

// Printing. Binders bind loosest (scope extends maximally right), then
// `<->`, `->` (right associative), `|`, `&`, `!`. Parentheses are inserted
// exactly where re-parsing needs them.
const LVL_BINDER: u8 = 0;
const LVL_IFF: u8 = 1;
const LVL_IMPLIES: u8 = 2;
const LVL_OR: u8 = 3;
const LVL_AND: u8 = 4;
const LVL_NOT: u8 = 5;
const LVL_ATOM: u8 = 6;

fn write_formula(f: &Formula, min_level: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let level = match f {
        Formula::Exists { .. }
        | Formula::Forall { .. }
        | Formula::CountingExists { .. }
        | Formula::ExistsSet { .. }
        | Formula::ForallSet { .. } => LVL_BINDER,
        Formula::Iff(..) => LVL_IFF,
        Formula::Implies(..) => LVL_IMPLIES,
        Formula::Or(..) => LVL_OR,
        Formula::And(..) => LVL_AND,
        Formula::Not(..) => LVL_NOT,
        Formula::Atom { .. }
        | Formula::Eq(..)
        | Formula::SetMember { .. }
        | Formula::Rescher { .. } => LVL_ATOM,
    };
    if level < min_level {
        out.write_str("(")?;
        write_formula(f, LVL_BINDER, out)?;
        return out.write_str(")");
    }
    match f {
        Formula::Atom { rel, args } => write!(out, "{}({})", rel, args.join(", ")),
        Formula::Eq(x, y) => write!(out, "{x} = {y}"),
        Formula::SetMember { set, element } => write!(out, "{set}({element})"),
        Formula::Not(x) => {
            out.write_str("!")?;
            write_formula(x, LVL_NOT, out)
        }
        Formula::And(a, b) => {
            write_formula(a, LVL_AND, out)?;
            out.write_str(" & ")?;
            write_formula(b, LVL_AND + 1, out)
        }
        Formula::Or(a, b) => {
            write_formula(a, LVL_OR, out)?;
            out.write_str(" | ")?;
            write_formula(b, LVL_OR + 1, out)
        }
        Formula::Implies(a, b) => {
            write_formula(a, LVL_IMPLIES + 1, out)?;
            out.write_str(" -> ")?;
            write_formula(b, LVL_IMPLIES, out)
        }
        Formula::Iff(a, b) => {
            write_formula(a, LVL_IFF + 1, out)?;
            out.write_str(" <-> ")?;
            write_formula(b, LVL_IFF, out)
        }
        Formula::Exists { var, body } => {
            write!(out, "exists {var}. ")?;
            write_formula(body, LVL_BINDER, out)
        }
        Formula::Forall { var, body } => {
            write!(out, "forall {var}. ")?;
            write_formula(body, LVL_BINDER, out)
        }
        Formula::CountingExists { min, var, body } => {
            write!(out, "exists>= {min} {var}. ")?;
            write_formula(body, LVL_BINDER, out)
        }
        Formula::ExistsSet { var, body } => {
            write!(out, "Exists {var}. ")?;
            write_formula(body, LVL_BINDER, out)
        }
        Formula::ForallSet { var, body } => {
            write!(out, "Forall {var}. ")?;
            write_formula(body, LVL_BINDER, out)
        }
        Formula::Rescher { vars, left, right } => {
            write!(out, "J {}. (", vars.join(" "))?;
            write_formula(left, LVL_BINDER, out)?;
            out.write_str(") (")?;
            write_formula(right, LVL_BINDER, out)?;
            out.write_str(")")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, LVL_BINDER, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_examples() {
        // forall y. leq(x, y): x free.
        let f = Formula::forall("y", Formula::atom("leq", &["x", "y"]));
        let (fo, so) = f.free_vars();
        assert_eq!(fo.into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
        assert!(so.is_empty());

        // A sentence has no free variables.
        let s = Formula::exists("x", Formula::atom("R", &["x"]));
        let (fo, so) = s.free_vars();
        assert!(fo.is_empty() && so.is_empty());

        // X(x) & exists x. X(x): the outer x is free, X is a free set variable.
        let g = Formula::and(
            Formula::set_member("X", "x"),
            Formula::exists("x", Formula::set_member("X", "x")),
        );
        let (fo, so) = g.free_vars();
        assert_eq!(fo.into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
        assert_eq!(so.into_iter().collect::<Vec<_>>(), vec!["X".to_string()]);
    }

    #[test]
    fn quantifier_rank_examples() {
        assert_eq!(Formula::atom("R", &["x"]).quantifier_rank(), 0);
        let phi0 = Formula::forall("y", Formula::atom("leq", &["x", "y"]));
        assert_eq!(phi0.quantifier_rank(), 1);
        let j = Formula::rescher(
            &["a", "b"],
            Formula::atom("R", &["a", "b"]),
            Formula::atom("S", &["a", "b"]),
        );
        assert_eq!(j.quantifier_rank(), 1);
        assert_eq!(
            Formula::counting_exists(2, "x", Formula::atom("R", &["x"])).quantifier_rank(),
            1
        );
    }

    #[test]
    fn vocabulary_collection_and_conflicts() {
        let f = Formula::and(Formula::atom("E", &["x", "y"]), Formula::atom("P", &["x"]));
        let v = f.vocabulary().unwrap();
        assert_eq!(v.symbols()[0].name, "E");
        assert_eq!(v.symbols()[1].name, "P");

        let bad = Formula::and(Formula::atom("R", &["x"]), Formula::atom("R", &["x", "y"]));
        assert!(matches!(
            bad.vocabulary(),
            Err(LogicError::ArityConflict { .. })
        ));

        let reserved = Formula::atom("Xray", &["x"]);
        assert!(matches!(
            reserved.vocabulary(),
            Err(LogicError::ReservedSymbolName(_))
        ));
    }

    #[test]
    fn rename_symbols_examples() {
        let f = Formula::exists("x", Formula::atom("R", &["x"]));
        let r = Renaming::from_pairs(&[("R", "Rp")]).unwrap();
        assert_eq!(
            f.rename_symbols(&r).unwrap(),
            Formula::exists("x", Formula::atom("Rp", &["x"]))
        );
        // Identity renaming keeps the formula intact.
        let id = Renaming::from_pairs(&[("R", "R")]).unwrap();
        assert_eq!(f.rename_symbols(&id).unwrap(), f);
        // Symbols outside the renaming's domain are an error.
        let other = Renaming::from_pairs(&[("Q", "Qp")]).unwrap();
        assert!(f.rename_symbols(&other).is_err());
    }

    #[test]
    fn display_examples() {
        assert_eq!(Formula::eq("x", "y").to_string(), "x = y");
        let nested = Formula::forall("x", Formula::exists("y", Formula::atom("E", &["x", "y"])));
        assert_eq!(nested.to_string(), "forall x. exists y. E(x, y)");
        let j = Formula::rescher(
            &["x1", "x2"],
            Formula::atom("R", &["x", "x1", "x2"]),
            Formula::atom("R", &["y", "x1", "x2"]),
        );
        assert_eq!(j.to_string(), "J x1 x2. (R(x, x1, x2)) (R(y, x1, x2))");
        // A binder on the left of a connective is parenthesised.
        let f = Formula::and(
            Formula::forall("x", Formula::atom("P", &["x"])),
            Formula::atom("Q", &["y"]),
        );
        assert_eq!(f.to_string(), "(forall x. P(x)) & Q(y)");
    }
}
