//! Cross-module property tests: isomorphism invariance of evaluation,
//! renaming-paired evaluation, and experiment-level determinism.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rlogic::experiments::{run_birthday, run_rescher, BirthdayParams};
use rlogic::generators::MatchingBaSpec;
use rlogic::logic::{evaluate, parse, query, Assignment, Formula};
use rlogic::structure::{Renaming, Structure};

fn random_structure(rng: &mut ChaCha12Rng, n: usize) -> Structure {
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(0.35) {
                edges.insert(vec![a, b]);
            }
        }
    }
    let mut points = BTreeSet::new();
    for a in 0..n {
        if rng.gen_bool(0.5) {
            points.insert(vec![a]);
        }
    }
    let mut rels = BTreeMap::new();
    rels.insert("E".to_string(), (2usize, edges));
    rels.insert("P".to_string(), (1usize, points));
    Structure::empty(n).unwrap().expand(rels).unwrap()
}

fn random_formula(rng: &mut ChaCha12Rng, depth: usize) -> Formula {
    let vars = ["x", "y", "z"];
    let var = |rng: &mut ChaCha12Rng| vars[rng.gen_range(0..vars.len())];
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => Formula::atom("E", &[var(rng), var(rng)]),
            1 => Formula::atom("P", &[var(rng)]),
            _ => Formula::eq(var(rng), var(rng)),
        };
    }
    match rng.gen_range(0..8) {
        0 => Formula::not(random_formula(rng, depth - 1)),
        1 => Formula::and(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        2 => Formula::or(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        3 => Formula::implies(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        4 => Formula::exists(var(rng), random_formula(rng, depth - 1)),
        5 => Formula::forall(var(rng), random_formula(rng, depth - 1)),
        6 => Formula::counting_exists(
            rng.gen_range(1..3),
            var(rng),
            random_formula(rng, depth - 1),
        ),
        _ => Formula::rescher(
            &[var(rng)],
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
    }
}

#[test]
fn evaluation_is_isomorphism_invariant() {
    // For vocabularies without built-ins, permuting the structure and the
    // assignment together never changes the verdict.
    let mut rng = ChaCha12Rng::seed_from_u64(0x150);
    for trial in 0..100 {
        let n = rng.gen_range(2..=6usize);
        let s = random_structure(&mut rng, n);
        let depth = rng.gen_range(1..4);
        let f = random_formula(&mut rng, depth);

        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let image = s.apply_permutation(&perm).unwrap();

        let (free, _) = f.free_vars();
        let mut asg = Assignment::new();
        let mut mapped = Assignment::new();
        for v in free {
            let value = rng.gen_range(0..n);
            asg = asg.bind(v.clone(), value);
            mapped = mapped.bind(v, perm[value]);
        }
        let original = evaluate(&s, &f, &asg).unwrap();
        let permuted = evaluate(&image, &f, &mapped).unwrap();
        assert_eq!(original, permuted, "trial {trial}: {f}");
    }
}

#[test]
fn query_commutes_with_permutation() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x151);
    let f = parse("exists y. E(x, y) & P(y)").unwrap();
    for _ in 0..25 {
        let n = rng.gen_range(2..=6usize);
        let s = random_structure(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let image = s.apply_permutation(&perm).unwrap();
        let direct = query(&s, &f).unwrap();
        let through_image: BTreeSet<Vec<usize>> = query(&image, &f)
            .unwrap()
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|x| perm.iter().position(|&p| p == x).unwrap())
                    .collect()
            })
            .collect();
        assert_eq!(direct, through_image);
    }
}

#[test]
fn renamed_formulas_evaluate_on_renamed_structures() {
    // Evaluating a formula on a structure equals evaluating its renamed
    // form on the renamed structure, over 50 random cases.
    let mut rng = ChaCha12Rng::seed_from_u64(0x152);
    let renaming = Renaming::from_pairs(&[("E", "F"), ("P", "Q")]).unwrap();
    for trial in 0..50 {
        let n = rng.gen_range(2..=5usize);
        let s = random_structure(&mut rng, n);
        let depth = rng.gen_range(1..4);
        let f = random_formula(&mut rng, depth);
        let (free, _) = f.free_vars();
        let mut asg = Assignment::new();
        for v in free {
            asg = asg.bind(v, rng.gen_range(0..n));
        }
        let renamed_structure = s.rename(&renaming).unwrap();
        let renamed_formula = f.rename_symbols(&renaming).unwrap();
        assert_eq!(
            evaluate(&s, &f, &asg).unwrap(),
            evaluate(&renamed_structure, &renamed_formula, &asg).unwrap(),
            "trial {trial}: {f}"
        );
    }
}

#[test]
fn experiments_reproduce_bit_for_bit() {
    let a = run_rescher(&[3], 400, 9).unwrap();
    let b = run_rescher(&[3], 400, 9).unwrap();
    assert_eq!(a.checks, b.checks);
    assert_eq!(a.parameters, b.parameters);
}

#[test]
fn sample_scaling_leaves_analytic_records_unchanged() {
    // More samples narrow the Monte Carlo error terms; the analytic regime
    // records must be byte-identical across sample counts.
    let params = BirthdayParams::default();
    let specs = [MatchingBaSpec::new(3, 2).unwrap()];
    let small = run_birthday(&params, &specs, 200, 4).unwrap();
    let large = run_birthday(&params, &specs, 800, 4).unwrap();
    for id in ["birthday.regime_low", "birthday.regime_high"] {
        let a = small.checks.iter().find(|c| c.id == id).unwrap();
        let b = large.checks.iter().find(|c| c.id == id).unwrap();
        assert_eq!(a, b, "{id}");
    }
}
