//! Programmatic builders for the workbench's formula corpus.
//!
//! Each builder returns a plain [`Formula`] over the vocabulary of the
//! structure family it targets. Helper predicates are assembled with
//! explicitly chosen bound-variable names so that nesting never captures a
//! parameter; shadowing of helper-internal names is fine.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logic::Formula;
use crate::structure::Vocabulary;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("expected a formula with exactly one free element variable, found {0}")]
    NotUnary(usize),
    #[error("subset index {index} is out of range for {k} random relations")]
    SubsetOutOfRange { index: usize, k: usize },
    #[error("the subset family must be nonempty and duplicate-free")]
    BadFamily,
    #[error("expected a purely existential second-order prefix over a first-order body")]
    NotSigma11,
    #[error("symbol `{0}` is already used by the body; cannot introduce it as a random relation")]
    NameClash(String),
}

fn var(name: &str) -> String {
    name.to_string()
}

/// `phi_ith(i)` defines element `i` on every ordered structure with more
/// than `i` elements, using the three variable names `x`, `y`, `z`: element
/// 0 is the `leq`-minimum and element i+1 is the immediate successor of
/// element i.
pub fn phi_ith(i: usize) -> Formula {
    phi_ith_with_names(i, ["x", "y", "z"])
}

/// Same formula over custom variable names (the first is the free one).
pub fn phi_ith_with_names(i: usize, names: [&str; 3]) -> Formula {
    build_ith(i, 0, &names.map(var), &|a, b| Formula::atom("leq", &[a, b]))
}

/// The element-defining formula for additive vocabularies: the order is
/// expressed through `plus`, with `sum` naming the addition witness.
pub fn phi_ith_plus_with_names(i: usize, names: [&str; 3], sum: &str) -> Formula {
    let sum = sum.to_string();
    build_ith(i, 0, &names.map(var), &move |a, b| {
        Formula::exists(sum.clone(), Formula::atom("plus", &[a, &sum, b]))
    })
}

fn build_ith(
    i: usize,
    first: usize,
    names: &[String; 3],
    le: &dyn Fn(&str, &str) -> Formula,
) -> Formula {
    let vf = names[first].as_str();
    let vn = names[(first + 1) % 3].as_str();
    let vt = names[(first + 2) % 3].as_str();
    if i == 0 {
        return Formula::forall(vn, le(vf, vn));
    }
    let prev = build_ith(i - 1, (first + 1) % 3, names, le);
    Formula::exists(
        vn,
        Formula::forall(
            vt,
            Formula::and_all([
                prev,
                Formula::not(Formula::eq(vf, vn)),
                le(vn, vf),
                Formula::implies(
                    Formula::and(le(vn, vt), le(vt, vf)),
                    Formula::or(Formula::eq(vn, vt), Formula::eq(vf, vt)),
                ),
            ]),
        ),
    )
}

/// The random vocabulary `R1..Rk`, all unary.
pub fn pattern_vocabulary(k: usize) -> Vocabulary {
    Vocabulary::new(
        (1..=k)
            .map(|i| crate::structure::RelationSymbol::new(format!("R{i}"), 1))
            .collect(),
    )
    .unwrap()
}

/// There is an isolated vertex whose random bit pattern is exactly `s`
/// (`s` holds the 0-based indices of the positive relations among
/// `R1..Rk`). On a graph with one isolated vertex the sentence has
/// satisfaction probability `2^-k`.
pub fn psi_s(k: usize, s: &BTreeSet<usize>) -> Result<Formula, CorpusError> {
    if let Some(&bad) = s.iter().find(|&&i| i >= k) {
        return Err(CorpusError::SubsetOutOfRange { index: bad, k });
    }
    let mut parts = vec![Formula::forall(
        "y",
        Formula::not(Formula::atom("E", &["x", "y"])),
    )];
    for i in 0..k {
        let atom = Formula::atom(format!("R{}", i + 1), &["x"]);
        parts.push(if s.contains(&i) {
            atom
        } else {
            Formula::not(atom)
        });
    }
    Ok(Formula::exists("x", Formula::and_all(parts)))
}

/// Disjunction of [`psi_s`] over a family of distinct subsets; on a graph
/// with one isolated vertex its probability is `|family| * 2^-k`.
pub fn psi_family(k: usize, family: &[BTreeSet<usize>]) -> Result<Formula, CorpusError> {
    if family.is_empty() {
        return Err(CorpusError::BadFamily);
    }
    let distinct: BTreeSet<&BTreeSet<usize>> = family.iter().collect();
    if distinct.len() != family.len() {
        return Err(CorpusError::BadFamily);
    }
    let parts = family
        .iter()
        .map(|s| psi_s(k, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Formula::or_all(parts))
}

/// A fair coin: the random bit `R0` on the element defined by `element_def`
/// is set. Exactly half of all expansions satisfy it.
pub fn coin_formula(element_def: &Formula) -> Result<Formula, CorpusError> {
    let (fo, so) = element_def.free_vars();
    if fo.len() != 1 || !so.is_empty() {
        return Err(CorpusError::NotUnary(fo.len()));
    }
    let pivot = fo.into_iter().next().unwrap();
    Ok(Formula::exists(
        pivot.clone(),
        Formula::and(Formula::atom("R0", &[pivot.as_str()]), element_def.clone()),
    ))
}

/// Turn an existential second-order sentence into a randomised first-order
/// one: strip the leading `Exists X.` prefix, replace each set membership
/// by a fresh unary random relation (`R1`, `R2`, ... in prefix order), and
/// disjoin the [`coin_formula`] of `element_def`. Returns the sentence and
/// its random vocabulary (`R0` plus the guessed relations).
pub fn pfo_from_sigma11(
    sigma11: &Formula,
    element_def: &Formula,
) -> Result<(Formula, Vocabulary), CorpusError> {
    let mut body = sigma11;
    let mut set_vars = Vec::new();
    while let Formula::ExistsSet { var, body: inner } = body {
        set_vars.push(var.clone());
        body = inner;
    }
    let (_, free_sets) = body.free_vars();
    if free_sets.iter().any(|s| !set_vars.contains(s)) || has_set_quantifier(body) {
        return Err(CorpusError::NotSigma11);
    }
    let vocab = body.vocabulary().map_err(|_| CorpusError::NotSigma11)?;
    let mut symbols = vec![crate::structure::RelationSymbol::new("R0", 1)];
    for i in 1..=set_vars.len() {
        symbols.push(crate::structure::RelationSymbol::new(format!("R{i}"), 1));
    }
    for sym in &symbols {
        if vocab.contains(&sym.name) {
            return Err(CorpusError::NameClash(sym.name.clone()));
        }
    }
    let guessed = substitute_set_vars(body, &set_vars);
    let coin = coin_formula(element_def)?;
    Ok((
        Formula::or(coin, guessed),
        Vocabulary::new(symbols).expect("fresh symbols are distinct"),
    ))
}

fn has_set_quantifier(f: &Formula) -> bool {
    match f {
        Formula::ExistsSet { .. } | Formula::ForallSet { .. } => true,
        Formula::Atom { .. } | Formula::Eq(..) | Formula::SetMember { .. } => false,
        Formula::Not(x) => has_set_quantifier(x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            has_set_quantifier(a) || has_set_quantifier(b)
        }
        Formula::Exists { body, .. }
        | Formula::Forall { body, .. }
        | Formula::CountingExists { body, .. } => has_set_quantifier(body),
        Formula::Rescher { left, right, .. } => {
            has_set_quantifier(left) || has_set_quantifier(right)
        }
    }
}

fn substitute_set_vars(f: &Formula, set_vars: &[String]) -> Formula {
    match f {
        Formula::SetMember { set, element } => match set_vars.iter().position(|v| v == set) {
            Some(i) => Formula::atom(format!("R{}", i + 1), &[element.as_str()]),
            None => f.clone(),
        },
        Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(x) => Formula::not(substitute_set_vars(x, set_vars)),
        Formula::And(a, b) => Formula::and(
            substitute_set_vars(a, set_vars),
            substitute_set_vars(b, set_vars),
        ),
        Formula::Or(a, b) => Formula::or(
            substitute_set_vars(a, set_vars),
            substitute_set_vars(b, set_vars),
        ),
        Formula::Implies(a, b) => Formula::implies(
            substitute_set_vars(a, set_vars),
            substitute_set_vars(b, set_vars),
        ),
        Formula::Iff(a, b) => Formula::iff(
            substitute_set_vars(a, set_vars),
            substitute_set_vars(b, set_vars),
        ),
        Formula::Exists { var, body } => {
            Formula::exists(var.clone(), substitute_set_vars(body, set_vars))
        }
        Formula::Forall { var, body } => {
            Formula::forall(var.clone(), substitute_set_vars(body, set_vars))
        }
        Formula::CountingExists { min, var, body } => Formula::CountingExists {
            min: *min,
            var: var.clone(),
            body: Box::new(substitute_set_vars(body, set_vars)),
        },
        Formula::ExistsSet { var, body } => {
            Formula::exists_set(var.clone(), substitute_set_vars(body, set_vars))
        }
        Formula::ForallSet { var, body } => {
            Formula::forall_set(var.clone(), substitute_set_vars(body, set_vars))
        }
        Formula::Rescher { vars, left, right } => Formula::Rescher {
            vars: vars.clone(),
            left: Box::new(substitute_set_vars(left, set_vars)),
            right: Box::new(substitute_set_vars(right, set_vars)),
        },
    }
}

// Predicates over the Boolean-algebra-augmented CFI structures. All of them
// are ordinary first-order formulas over {E, sim, less, sqsubseteq, P, O}
// plus the binary random relation R.

/// `v` is an atom of the algebra: a P-element with exactly one proper
/// predecessor in the subset order (necessarily the bottom).
fn atom_at(v: &str) -> Formula {
    Formula::and_all([
        Formula::atom("P", &[v]),
        Formula::exists(
            "ab",
            Formula::and_all([
                Formula::atom("sqsubseteq", &["ab", v]),
                Formula::not(Formula::eq("ab", v)),
                Formula::forall(
                    "ac",
                    Formula::implies(
                        Formula::and(
                            Formula::atom("sqsubseteq", &["ac", v]),
                            Formula::not(Formula::eq("ac", v)),
                        ),
                        Formula::eq("ac", "ab"),
                    ),
                ),
            ]),
        ),
    ])
}

/// The atom detector with free variable `x`.
pub fn atom_formula() -> Formula {
    atom_at("x")
}

/// `v` is an edge-pair node: adjacent to its cross partner, which sits in
/// the same equivalence class (centre neighbours never do).
fn pair_node_at(v: &str) -> Formula {
    Formula::exists(
        "pn",
        Formula::and(
            Formula::atom("E", &[v, "pn"]),
            Formula::atom("sim", &[v, "pn"]),
        ),
    )
}

fn centre_node_at(v: &str) -> Formula {
    Formula::and(
        Formula::not(Formula::atom("P", &[v])),
        Formula::not(pair_node_at(v)),
    )
}

/// `v1` and `v2` are pair nodes of the same edge group: equivalent, and
/// their centre neighbours are equivalent (the two groups of an edget have
/// their centres in different gadgets).
fn same_group_at(v1: &str, v2: &str) -> Formula {
    Formula::and_all([
        Formula::atom("sim", &[v1, v2]),
        pair_node_at(v1),
        pair_node_at(v2),
        Formula::exists(
            "sa",
            Formula::and_all([
                Formula::atom("E", &[v1, "sa"]),
                centre_node_at("sa"),
                Formula::exists(
                    "sb",
                    Formula::and_all([
                        Formula::atom("E", &[v2, "sb"]),
                        centre_node_at("sb"),
                        Formula::atom("sim", &["sa", "sb"]),
                    ]),
                ),
            ]),
        ),
    ])
}

/// The m-bit number R assigns `v1` is lexicographically smaller than the
/// one it assigns `v2`: bits are read along the atom order, so the witness
/// atom is the least-ordered atom where the bits differ.
fn num_lt_at(v1: &str, v2: &str) -> Formula {
    Formula::exists(
        "nz",
        Formula::and_all([
            Formula::atom("P", &["nz"]),
            Formula::not(Formula::atom("R", &[v1, "nz"])),
            Formula::atom("R", &[v2, "nz"]),
            Formula::forall(
                "nw",
                Formula::implies(
                    Formula::atom("less", &["nw", "nz"]),
                    Formula::iff(
                        Formula::atom("R", &[v1, "nw"]),
                        Formula::atom("R", &[v2, "nw"]),
                    ),
                ),
            ),
            atom_at("nz"),
        ]),
    )
}

fn xi_at(v: &str) -> Formula {
    Formula::exists(
        "xp",
        Formula::and(same_group_at(v, "xp"), num_lt_at(v, "xp")),
    )
}

/// The representative picker: `xi` holds for the member of an edge group
/// whose R-derived atom-set number is lexicographically smaller. When the
/// numbers differ in every group it selects exactly one node per group;
/// tied groups select nobody.
pub fn xi() -> Formula {
    xi_at("x")
}

/// Every edge group carries two distinguishable numbers.
pub fn xi_success_formula() -> Formula {
    Formula::forall(
        "gx",
        Formula::implies(
            pair_node_at("gx"),
            Formula::exists(
                "dp",
                Formula::and_all([
                    same_group_at("gx", "dp"),
                    Formula::not(Formula::eq("gx", "dp")),
                    Formula::or(num_lt_at("gx", "dp"), num_lt_at("dp", "gx")),
                ]),
            ),
        ),
    )
}

/// The edget linked to atom `z` is twisted relative to the xi-choice: some
/// chosen node's cross partner is unchosen.
fn twisted_at(z: &str) -> Formula {
    Formula::exists(
        "tx",
        Formula::and_all([
            Formula::atom("sim", &["tx", z]),
            xi_at("tx"),
            Formula::exists(
                "ty",
                Formula::and_all([
                    Formula::atom("E", &["tx", "ty"]),
                    Formula::atom("sim", &["ty", z]),
                    Formula::not(xi_at("ty")),
                ]),
            ),
        ]),
    )
}

/// The centre group linked to atom `z` has an odd number of chosen
/// neighbours (its nodes have three pair-node neighbours each, so odd means
/// exactly one or all three).
fn odd_centre_at(z: &str) -> Formula {
    let exactly_one = Formula::exists(
        "ou",
        Formula::and_all([
            Formula::atom("E", &["oc", "ou"]),
            xi_at("ou"),
            Formula::forall(
                "ov",
                Formula::implies(
                    Formula::and(Formula::atom("E", &["oc", "ov"]), xi_at("ov")),
                    Formula::eq("ov", "ou"),
                ),
            ),
        ]),
    );
    let all_three = Formula::forall(
        "oa",
        Formula::implies(Formula::atom("E", &["oc", "oa"]), xi_at("oa")),
    );
    Formula::exists(
        "oc",
        Formula::and_all([
            Formula::atom("sim", &["oc", z]),
            centre_node_at("oc"),
            Formula::or(exactly_one, all_three),
        ]),
    )
}

fn marked_at(z: &str) -> Formula {
    Formula::and(atom_at(z), Formula::or(twisted_at(z), odd_centre_at(z)))
}

/// The twistedness sentence over Boolean-algebra-augmented CFI structures
/// with a binary random relation R: the xi-choice distinguishes both
/// members of every edge group, and the algebra element collecting exactly
/// the atoms of odd centre groups and twisted edgets (relative to that
/// choice) has odd cardinality. Conditional on the choice succeeding, the
/// verdict equals the structure's twist parity; failures reject.
pub fn tcfi_sentence() -> Formula {
    Formula::and(
        xi_success_formula(),
        Formula::exists(
            "w",
            Formula::and_all([
                Formula::atom("P", &["w"]),
                Formula::not(Formula::atom("O", &["w"])),
                Formula::forall(
                    "z",
                    Formula::implies(
                        atom_at("z"),
                        Formula::iff(Formula::atom("sqsubseteq", &["z", "w"]), marked_at("z")),
                    ),
                ),
            ]),
        ),
    )
}

/// The random binary relation, viewed as mapping each non-P element to a
/// subset of the P-part, is injective.
pub fn phi_inj() -> Formula {
    Formula::forall(
        "x",
        Formula::forall(
            "y",
            Formula::or_all([
                Formula::eq("x", "y"),
                Formula::atom("P", &["x"]),
                Formula::atom("P", &["y"]),
                Formula::exists(
                    "z",
                    Formula::and(
                        Formula::atom("P", &["z"]),
                        Formula::not(Formula::iff(
                            Formula::atom("R", &["x", "z"]),
                            Formula::atom("R", &["y", "z"]),
                        )),
                    ),
                ),
            ]),
        ),
    )
}

/// `a <= b` over an additive structure: some d with a + d = b.
fn le_plus(a: &str, b: &str, d: &str) -> Formula {
    Formula::exists(d, Formula::atom("plus", &[a, d, b]))
}

/// `v <= 3n`, expressed through addition; when 3n overflows the universe
/// the whole window is in range, so the bound holds vacuously.
fn le_triple(v: &str, n: &str) -> Formula {
    let in_range = Formula::exists(
        "t2",
        Formula::and(
            Formula::atom("plus", &[n, n, "t2"]),
            Formula::exists(
                "t3",
                Formula::and(
                    Formula::atom("plus", &["t2", n, "t3"]),
                    le_plus(v, "t3", "s1"),
                ),
            ),
        ),
    );
    let overflow = Formula::not(Formula::exists(
        "t2",
        Formula::and(
            Formula::atom("plus", &[n, n, "t2"]),
            Formula::exists("t3", Formula::atom("plus", &["t2", n, "t3"])),
        ),
    ));
    Formula::or(in_range, overflow)
}

fn in_window(v: &str, n: &str) -> Formula {
    Formula::and(le_plus(n, v, "s1"), le_triple(v, n))
}

/// The predicate P is sparse: no window `{n, ..., 3n}` contains two
/// distinct P-elements. Order and tripling are expressed via `plus`.
pub fn phi_sparse() -> Formula {
    Formula::forall(
        "q1",
        Formula::forall(
            "q2",
            Formula::forall(
                "nb",
                Formula::implies(
                    Formula::and_all([
                        Formula::atom("P", &["q1"]),
                        Formula::atom("P", &["q2"]),
                        in_window("q1", "nb"),
                        in_window("q2", "nb"),
                    ]),
                    Formula::eq("q1", "q2"),
                ),
            ),
        ),
    )
}

/// Every subset of P is the R-pattern of some element: the empty pattern is
/// realised and realised patterns are closed under toggling one P-element,
/// which reaches the whole hypercube.
pub fn coverage_formula() -> Formula {
    let empty = Formula::exists(
        "a0",
        Formula::forall(
            "aq",
            Formula::implies(
                Formula::atom("P", &["aq"]),
                Formula::not(Formula::atom("R", &["a0", "aq"])),
            ),
        ),
    );
    let step = Formula::forall(
        "b0",
        Formula::forall(
            "bq",
            Formula::implies(
                Formula::atom("P", &["bq"]),
                Formula::exists(
                    "b1",
                    Formula::and(
                        Formula::not(Formula::iff(
                            Formula::atom("R", &["b0", "bq"]),
                            Formula::atom("R", &["b1", "bq"]),
                        )),
                        Formula::forall(
                            "bu",
                            Formula::implies(
                                Formula::and(
                                    Formula::atom("P", &["bu"]),
                                    Formula::not(Formula::eq("bu", "bq")),
                                ),
                                Formula::iff(
                                    Formula::atom("R", &["b0", "bu"]),
                                    Formula::atom("R", &["b1", "bu"]),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    );
    Formula::and(empty, step)
}

fn min_p_at(q: &str) -> Formula {
    Formula::and(
        Formula::atom("P", &[q]),
        Formula::forall(
            "mu",
            Formula::implies(Formula::atom("P", &["mu"]), le_plus(q, "mu", "s2")),
        ),
    )
}

fn max_p_at(q: &str) -> Formula {
    Formula::and(
        Formula::atom("P", &[q]),
        Formula::forall(
            "mu",
            Formula::implies(Formula::atom("P", &["mu"]), le_plus("mu", q, "s2")),
        ),
    )
}

/// `q2` is the successor of `q1` inside P.
fn succ_p_at(q1: &str, q2: &str) -> Formula {
    Formula::and_all([
        Formula::atom("P", &[q1]),
        Formula::atom("P", &[q2]),
        le_plus(q1, q2, "s2"),
        Formula::not(Formula::eq(q1, q2)),
        Formula::forall(
            "su",
            Formula::implies(
                Formula::and_all([
                    Formula::atom("P", &["su"]),
                    le_plus(q1, "su", "s3"),
                    Formula::not(Formula::eq("su", q1)),
                ]),
                le_plus(q2, "su", "s3"),
            ),
        ),
    ])
}

/// |P| is even, decided through the random relation: some element's
/// R-pattern omits the minimum of P, alternates along consecutive
/// P-elements, and contains the maximum. Such a pattern exists exactly for
/// even |P| (and is realised whenever the patterns cover all subsets).
pub fn evenness_formula() -> Formula {
    Formula::exists(
        "ea",
        Formula::and_all([
            Formula::forall(
                "eq",
                Formula::implies(
                    min_p_at("eq"),
                    Formula::not(Formula::atom("R", &["ea", "eq"])),
                ),
            ),
            Formula::forall(
                "eq",
                Formula::forall(
                    "er",
                    Formula::implies(
                        succ_p_at("eq", "er"),
                        Formula::not(Formula::iff(
                            Formula::atom("R", &["ea", "eq"]),
                            Formula::atom("R", &["ea", "er"]),
                        )),
                    ),
                ),
            ),
            Formula::forall(
                "eq",
                Formula::implies(max_p_at("eq"), Formula::atom("R", &["ea", "eq"])),
            ),
        ]),
    )
}

/// The count-comparison order induced by a 6-ary random relation: `x` below
/// `y` when `R x . . . . .` has at most as many witnesses as `R y . . . . .`.
pub fn rescher_order() -> Formula {
    let vars = ["x1", "x2", "x3", "x4", "x5"];
    let mut left_args = vec!["x"];
    left_args.extend(vars);
    let mut right_args = vec!["y"];
    right_args.extend(vars);
    Formula::rescher(
        &vars,
        Formula::atom("R", &left_args),
        Formula::atom("R", &right_args),
    )
}

/// A catalogue entry: a named builder with its default-parameter instance.
pub struct CorpusEntry {
    pub name: &'static str,
    pub parameters: &'static str,
    pub family: &'static str,
    pub vocabulary: &'static [(&'static str, usize)],
    pub build_default: fn() -> Formula,
}

/// The named corpus, with default parameters where builders take any.
pub fn entries() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "phi_ith",
            parameters: "i (default 2)",
            family: "ordered structures",
            vocabulary: &[("leq", 2)],
            build_default: || phi_ith(2),
        },
        CorpusEntry {
            name: "psi_s",
            parameters: "k, subset (default k=2, {0})",
            family: "graphs with one isolated vertex",
            vocabulary: &[("E", 2), ("R1", 1), ("R2", 1)],
            build_default: || psi_s(2, &BTreeSet::from([0])).unwrap(),
        },
        CorpusEntry {
            name: "psi_family",
            parameters: "k, subsets (default k=2, {{0},{1}})",
            family: "graphs with one isolated vertex",
            vocabulary: &[("E", 2), ("R1", 1), ("R2", 1)],
            build_default: || psi_family(2, &[BTreeSet::from([0]), BTreeSet::from([1])]).unwrap(),
        },
        CorpusEntry {
            name: "coin",
            parameters: "element definition (default phi_ith(0))",
            family: "ordered structures",
            vocabulary: &[("R0", 1), ("leq", 2)],
            build_default: || coin_formula(&phi_ith(0)).unwrap(),
        },
        CorpusEntry {
            name: "atom",
            parameters: "none",
            family: "Boolean-algebra structures",
            vocabulary: &[("P", 1), ("sqsubseteq", 2)],
            build_default: atom_formula,
        },
        CorpusEntry {
            name: "xi",
            parameters: "none",
            family: "augmented CFI structures + binary R",
            vocabulary: &[
                ("sim", 2),
                ("E", 2),
                ("P", 1),
                ("R", 2),
                ("less", 2),
                ("sqsubseteq", 2),
            ],
            build_default: xi,
        },
        CorpusEntry {
            name: "tcfi_sentence",
            parameters: "none",
            family: "augmented CFI structures + binary R",
            vocabulary: &[
                ("sim", 2),
                ("E", 2),
                ("P", 1),
                ("R", 2),
                ("less", 2),
                ("sqsubseteq", 2),
                ("O", 1),
            ],
            build_default: tcfi_sentence,
        },
        CorpusEntry {
            name: "phi_inj",
            parameters: "none",
            family: "matched orders + binary R",
            vocabulary: &[("P", 1), ("R", 2)],
            build_default: phi_inj,
        },
        CorpusEntry {
            name: "phi_sparse",
            parameters: "none",
            family: "additive structures",
            vocabulary: &[("P", 1), ("plus", 3)],
            build_default: phi_sparse,
        },
        CorpusEntry {
            name: "coverage",
            parameters: "none",
            family: "additive structures + binary R",
            vocabulary: &[("P", 1), ("R", 2)],
            build_default: coverage_formula,
        },
        CorpusEntry {
            name: "evenness",
            parameters: "none",
            family: "additive structures + binary R",
            vocabulary: &[("P", 1), ("R", 2), ("plus", 3)],
            build_default: evenness_formula,
        },
        CorpusEntry {
            name: "rescher_order",
            parameters: "none",
            family: "any structure + 6-ary R",
            vocabulary: &[("R", 6)],
            build_default: rescher_order,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{
        builtin_base_graph, gen_cfi, gen_sparse_additive, gen_tcfi, twist_parity, BaseGraphName,
        CfiSpec, SparseSet,
    };
    use crate::logic::{element_defined_by, evaluate, parse, query, Assignment};
    use crate::randsem::{exact_probability, prob, RandomSpace};
    use crate::structure::{Builtin, Structure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn phi_ith_defines_the_right_elements() {
        let n5 = Structure::arithmetic(5, &[Builtin::Leq]).unwrap();
        assert_eq!(element_defined_by(&n5, &phi_ith(0)).unwrap(), 0);
        assert_eq!(element_defined_by(&n5, &phi_ith(2)).unwrap(), 2);
        assert_eq!(element_defined_by(&n5, &phi_ith(3)).unwrap(), 3);
    }

    #[test]
    fn phi_ith_uses_three_variables() {
        assert_eq!(phi_ith(7).all_variable_names().len(), 3);
        assert_eq!(phi_ith(0).quantifier_rank(), 1);
        assert_eq!(phi_ith(1).quantifier_rank(), 3);
    }

    #[test]
    fn phi_ith_elements_distinct() {
        for n in 2..=8usize {
            let s = Structure::arithmetic(n, &[Builtin::Leq]).unwrap();
            let defined: Vec<usize> = (0..n)
                .map(|i| element_defined_by(&s, &phi_ith(i)).unwrap())
                .collect();
            assert_eq!(defined, (0..n).collect::<Vec<_>>());
        }
    }

    fn one_isolated_graph() -> Structure {
        let mut rels = BTreeMap::new();
        rels.insert(
            "E".to_string(),
            (2usize, [vec![1, 2], vec![2, 1]].into_iter().collect()),
        );
        Structure::empty(3).unwrap().expand(rels).unwrap()
    }

    #[test]
    fn psi_probabilities() {
        let graph = one_isolated_graph();
        for s in [
            BTreeSet::new(),
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            BTreeSet::from([0, 1]),
        ] {
            let f = psi_s(2, &s).unwrap();
            let space = RandomSpace::new(graph.clone(), pattern_vocabulary(2)).unwrap();
            let p = exact_probability(&space, &f, &Assignment::new()).unwrap();
            assert_eq!(p.exact_value().unwrap(), &prob(1, 4), "{s:?}");
        }

        // All four subsets together are certain.
        let all: Vec<BTreeSet<usize>> = vec![
            BTreeSet::new(),
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            BTreeSet::from([0, 1]),
        ];
        let f = psi_family(2, &all).unwrap();
        let space = RandomSpace::new(graph.clone(), pattern_vocabulary(2)).unwrap();
        let p = exact_probability(&space, &f, &Assignment::new()).unwrap();
        assert_eq!(p.exact_value().unwrap(), &prob(1, 1));

        // Three subsets: probability 3/4.
        let f = psi_family(2, &all[..3]).unwrap();
        let p = exact_probability(&space, &f, &Assignment::new()).unwrap();
        assert_eq!(p.exact_value().unwrap(), &prob(3, 4));

        assert!(psi_s(2, &BTreeSet::from([5])).is_err());
        assert!(psi_family(2, &[]).is_err());
        assert!(psi_family(2, &[BTreeSet::new(), BTreeSet::new()]).is_err());
    }

    #[test]
    fn coin_is_fair_and_sigma11_substitution_works() {
        let n3 = Structure::arithmetic(3, &[Builtin::Leq]).unwrap();
        let coin = coin_formula(&phi_ith(0)).unwrap();
        let space = RandomSpace::new(n3, Vocabulary::parse(&[("R0", 1)]).unwrap()).unwrap();
        let p = exact_probability(&space, &coin, &Assignment::new()).unwrap();
        assert_eq!(p.exact_value().unwrap(), &prob(1, 2));

        // A trivially true body gives probability 1.
        let taut = parse("forall t. t = t").unwrap();
        let (f, rho) = pfo_from_sigma11(&taut, &phi_ith(0)).unwrap();
        let n2 = Structure::arithmetic(2, &[Builtin::Leq]).unwrap();
        let space = RandomSpace::new(n2.clone(), rho).unwrap();
        let p = exact_probability(&space, &f, &Assignment::new()).unwrap();
        assert_eq!(p.exact_value().unwrap(), &prob(1, 1));

        // Guessing one monadic set: Pr(coin or forall x. R1(x)) on two
        // ordered elements = 1/2 + 1/4 - 1/8.
        let sigma = parse("Exists X. forall x. X(x)").unwrap();
        let (f, rho) = pfo_from_sigma11(&sigma, &phi_ith(0)).unwrap();
        assert_eq!(rho.len(), 2);
        let space = RandomSpace::new(n2, rho).unwrap();
        let p = exact_probability(&space, &f, &Assignment::new()).unwrap();
        assert_eq!(p.exact_value().unwrap(), &prob(5, 8));
        assert!(p.exact_value().unwrap() >= &prob(1, 2));

        // Not a purely existential prefix.
        let bad = parse("Forall X. exists x. X(x)").unwrap();
        assert!(pfo_from_sigma11(&bad, &phi_ith(0)).is_err());
        assert!(coin_formula(&parse("leq(x, y)").unwrap()).is_err());
    }

    #[test]
    fn atom_formula_finds_exactly_the_atoms() {
        let spec = CfiSpec::new(builtin_base_graph(BaseGraphName::Theta), BTreeSet::new()).unwrap();
        let s = gen_tcfi(&spec).unwrap();
        let atoms = query(&s, &atom_formula()).unwrap();
        let base = 20usize;
        let expected: BTreeSet<Vec<usize>> = (0..5).map(|i| vec![base + (1usize << i)]).collect();
        assert_eq!(atoms, expected);
    }

    /// Expand a tcfi structure with an explicit R: `numbers[node]` holds the
    /// node's atom mask (bit i set = R(node, atom_i)).
    fn with_numbers(s: &Structure, cfi_nodes: usize, numbers: &BTreeMap<usize, u32>) -> Structure {
        let base = cfi_nodes;
        let mut tuples = BTreeSet::new();
        for (&node, &mask) in numbers {
            for i in 0..32 {
                if mask >> i & 1 == 1 {
                    tuples.insert(vec![node, base + (1 << i)]);
                }
            }
        }
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), (2usize, tuples));
        s.expand(rels).unwrap()
    }

    /// The 12 pair nodes of a theta-based structure with per-group distinct
    /// numbers; a-nodes (even offsets) get the lexicographically smaller one.
    fn theta_distinct_numbers() -> BTreeMap<usize, u32> {
        let mut numbers = BTreeMap::new();
        for u in 0..2usize {
            for slot in 0..3usize {
                let a = 10 * u + 4 + 2 * slot;
                numbers.insert(a, 0);
                numbers.insert(a + 1, 1 << (u + slot));
            }
        }
        numbers
    }

    #[test]
    fn xi_selects_one_node_per_group() {
        let spec = CfiSpec::new(builtin_base_graph(BaseGraphName::Theta), BTreeSet::new()).unwrap();
        let s = gen_tcfi(&spec).unwrap();
        let expanded = with_numbers(&s, 20, &theta_distinct_numbers());
        let selected = query(&expanded, &xi()).unwrap();
        // Exactly the six a-nodes, one per edge group.
        let expected: BTreeSet<Vec<usize>> = (0..2)
            .flat_map(|u| (0..3).map(move |slot| vec![10 * u + 4 + 2 * slot]))
            .collect();
        assert_eq!(selected, expected);
        assert!(evaluate(&expanded, &xi_success_formula(), &Assignment::new()).unwrap());
    }

    #[test]
    fn xi_rejects_ties() {
        let spec = CfiSpec::new(builtin_base_graph(BaseGraphName::Theta), BTreeSet::new()).unwrap();
        let s = gen_tcfi(&spec).unwrap();
        let mut numbers = theta_distinct_numbers();
        // Give one group identical numbers.
        numbers.insert(4, 7);
        numbers.insert(5, 7);
        let expanded = with_numbers(&s, 20, &numbers);
        let selected = query(&expanded, &xi()).unwrap();
        assert!(!selected.contains(&vec![4]) && !selected.contains(&vec![5]));
        assert_eq!(selected.len(), 5);
        assert!(!evaluate(&expanded, &xi_success_formula(), &Assignment::new()).unwrap());
    }

    #[test]
    fn xi_never_selects_two_per_group() {
        // Random number assignments, ties included: a group selects its
        // lexicographically smaller member or nobody, never both.
        let spec = CfiSpec::new(builtin_base_graph(BaseGraphName::Theta), BTreeSet::new()).unwrap();
        let s = gen_tcfi(&spec).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..40 {
            let mut numbers = BTreeMap::new();
            for u in 0..2usize {
                for slot in 0..3usize {
                    let a = 10 * u + 4 + 2 * slot;
                    // Small range to make ties likely.
                    numbers.insert(a, rng.gen_range(0..4u32));
                    numbers.insert(a + 1, rng.gen_range(0..4u32));
                }
            }
            let expanded = with_numbers(&s, 20, &numbers);
            let selected = query(&expanded, &xi()).unwrap();
            for u in 0..2usize {
                for slot in 0..3usize {
                    let a = 10 * u + 4 + 2 * slot;
                    let picked = [a, a + 1]
                        .iter()
                        .filter(|&&v| selected.contains(&vec![v]))
                        .count();
                    assert!(picked <= 1, "group ({u},{slot}) selected {picked}");
                }
            }
        }
    }

    #[test]
    fn tcfi_sentence_tracks_twist_parity() {
        let theta = builtin_base_graph(BaseGraphName::Theta);
        let numbers = theta_distinct_numbers();
        for twist_mask in 0..8usize {
            let twist: BTreeSet<usize> = (0..3).filter(|i| twist_mask >> i & 1 == 1).collect();
            let spec = CfiSpec::new(theta.clone(), twist).unwrap();
            let s = gen_tcfi(&spec).unwrap();
            let expanded = with_numbers(&s, 20, &numbers);
            let verdict = evaluate(&expanded, &tcfi_sentence(), &Assignment::new()).unwrap();
            let parity = twist_parity(&gen_cfi(&spec).unwrap()).unwrap();
            assert_eq!(verdict, parity == 1, "twists {twist_mask:b}");
        }
    }

    #[test]
    fn phi_inj_on_tiny_instances() {
        // One non-P element: injectivity is vacuous.
        let mut rels = BTreeMap::new();
        rels.insert("P".to_string(), (1usize, BTreeSet::from([vec![0]])));
        rels.insert("R".to_string(), (2usize, BTreeSet::new()));
        let s = Structure::empty(2).unwrap().expand(rels).unwrap();
        assert!(evaluate(&s, &phi_inj(), &Assignment::new()).unwrap());

        // Two non-P elements with equal patterns: not injective.
        let mut rels = BTreeMap::new();
        rels.insert("P".to_string(), (1usize, BTreeSet::from([vec![0]])));
        rels.insert("R".to_string(), (2usize, BTreeSet::new()));
        let s = Structure::empty(3).unwrap().expand(rels).unwrap();
        assert!(!evaluate(&s, &phi_inj(), &Assignment::new()).unwrap());
    }

    #[test]
    fn phi_sparse_agrees_with_is_sparse() {
        use crate::generators::is_sparse;
        // All nonempty subsets of [1, 8] here; the exhaustive [1, 16] sweep
        // lives in the acceptance suite.
        for mask in 1u32..(1 << 8) {
            let q: SparseSet = (0..8)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            let s = gen_sparse_additive(&q).unwrap();
            let verdict = evaluate(&s, &phi_sparse(), &Assignment::new()).unwrap();
            assert_eq!(verdict, is_sparse(&q), "{q:?}");
        }
    }

    fn additive_with_r(q: &SparseSet, patterns: &[(usize, &[usize])]) -> Structure {
        let s = gen_sparse_additive(q).unwrap();
        let mut tuples = BTreeSet::new();
        for &(a, qs) in patterns {
            for &b in qs {
                tuples.insert(vec![a, b]);
            }
        }
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), (2usize, tuples));
        s.expand(rels).unwrap()
    }

    #[test]
    fn coverage_and_evenness_on_explicit_patterns() {
        // Q = {1, 4}: patterns realise all four subsets.
        let q = SparseSet::from([1, 4]);
        let s = additive_with_r(&q, &[(0, &[]), (1, &[1]), (2, &[4]), (3, &[1, 4])]);
        assert!(evaluate(&s, &coverage_formula(), &Assignment::new()).unwrap());
        assert!(evaluate(&s, &evenness_formula(), &Assignment::new()).unwrap());

        // Missing one subset: coverage fails.
        let s = additive_with_r(&q, &[(0, &[]), (1, &[1]), (2, &[4])]);
        assert!(!evaluate(&s, &coverage_formula(), &Assignment::new()).unwrap());

        // Q = {1, 4, 13}: all eight subsets realised, but |Q| is odd.
        let q = SparseSet::from([1, 4, 13]);
        let subsets: Vec<Vec<usize>> = vec![
            vec![],
            vec![1],
            vec![4],
            vec![13],
            vec![1, 4],
            vec![1, 13],
            vec![4, 13],
            vec![1, 4, 13],
        ];
        let patterns: Vec<(usize, &[usize])> = subsets
            .iter()
            .enumerate()
            .map(|(a, qs)| (a, qs.as_slice()))
            .collect();
        let s = additive_with_r(&q, &patterns);
        assert!(evaluate(&s, &coverage_formula(), &Assignment::new()).unwrap());
        assert!(!evaluate(&s, &evenness_formula(), &Assignment::new()).unwrap());
    }

    #[test]
    fn coverage_matches_bruteforce_over_samples() {
        let q = SparseSet::from([1, 4]);
        let base = gen_sparse_additive(&q).unwrap();
        let n = base.universe_size();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for trial in 0..50 {
            let mut tuples = BTreeSet::new();
            for a in 0..n {
                for b in 0..n {
                    if rng.gen_bool(0.5) {
                        tuples.insert(vec![a, b]);
                    }
                }
            }
            let mut rels = BTreeMap::new();
            rels.insert("R".to_string(), (2usize, tuples.clone()));
            let s = base.expand(rels).unwrap();
            // Brute force: collect the realised subsets of Q.
            let realised: BTreeSet<Vec<usize>> = (0..n)
                .map(|a| {
                    q.iter()
                        .filter(|&&b| tuples.contains(&vec![a, b]))
                        .copied()
                        .collect::<Vec<usize>>()
                })
                .collect();
            let covered = realised.len() == 4;
            let verdict = evaluate(&s, &coverage_formula(), &Assignment::new()).unwrap();
            assert_eq!(verdict, covered, "trial {trial}");
        }
    }

    #[test]
    fn rescher_order_behaviour() {
        use crate::logic::defines_linear_order;
        // Full relation: all counts equal, total preorder but not a linear
        // order.
        let n = 2usize;
        let full: BTreeSet<Vec<usize>> = {
            let mut out = BTreeSet::new();
            let mut t = vec![0usize; 6];
            loop {
                out.insert(t.clone());
                let mut i = 6;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    t[i] += 1;
                    if t[i] < n {
                        break;
                    }
                    t[i] = 0;
                }
                if t.iter().all(|&x| x == 0) {
                    break;
                }
            }
            out
        };
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), (6usize, full));
        let s = Structure::empty(n).unwrap().expand(rels).unwrap();
        assert!(!defines_linear_order(&s, &rescher_order()).unwrap());

        // Distinct counts on three elements: a linear order.
        let mut tuples = BTreeSet::new();
        tuples.insert(vec![1, 0, 0, 0, 0, 0]);
        tuples.insert(vec![2, 0, 0, 0, 0, 0]);
        tuples.insert(vec![2, 0, 0, 0, 0, 1]);
        let mut rels = BTreeMap::new();
        rels.insert("R".to_string(), (6usize, tuples));
        let s = Structure::empty(3).unwrap().expand(rels).unwrap();
        assert!(defines_linear_order(&s, &rescher_order()).unwrap());
        // And the order is count order: 0 < 1 < 2.
        let pairs = query(&s, &rescher_order()).unwrap();
        assert!(pairs.contains(&vec![0, 2]) && !pairs.contains(&vec![2, 0]));
    }

    #[test]
    fn corpus_round_trips_and_vocabularies() {
        for entry in entries() {
            let f = (entry.build_default)();
            let printed = f.to_string();
            let reparsed =
                parse(&printed).unwrap_or_else(|e| panic!("{}: {printed}: {e}", entry.name));
            assert_eq!(reparsed, f, "{}", entry.name);

            let declared: BTreeSet<(String, usize)> = entry
                .vocabulary
                .iter()
                .map(|&(n, a)| (n.to_string(), a))
                .collect();
            let actual: BTreeSet<(String, usize)> = f
                .vocabulary()
                .unwrap()
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect();
            assert_eq!(actual, declared, "{}", entry.name);
        }
    }
}
