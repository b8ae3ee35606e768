//! Randomized invariants of the calculus and the program code, checked
//! against an independent reference interpreter over `BigUint`.

use std::collections::HashSet;

use kolmo::codec::{
    decode_program, decode_term, encode_term, Bits, Program, ProgramCounts, TermGenerator,
};
use kolmo::recfun::{eval, eval_with, EvalOptions, EvalOutcome, Node, Term, UndefinedReason};
use kolmo::Nat;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// A random well-formed term of `arity` and nesting depth at most `depth`.
fn random_term(rng: &mut Pcg64, arity: usize, depth: u32, with_mu: bool) -> Term {
    let leaf = |rng: &mut Pcg64| match arity {
        0 => Term::constant(rng.random_range(0u64..4)),
        1 if rng.random_bool(0.5) => Term::succ(),
        _ => Term::proj(rng.random_range(1..=arity), arity).unwrap(),
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.random_range(0..5) {
        0 | 1 => {
            let n = rng.random_range(1..=3);
            let outer = random_term(rng, n, depth - 1, with_mu);
            let inners = (0..n)
                .map(|_| random_term(rng, arity, depth - 1, with_mu))
                .collect();
            Term::compose(outer, inners).unwrap()
        }
        2 if arity >= 1 => {
            let base = random_term(rng, arity - 1, depth - 1, with_mu);
            let step = random_term(rng, arity + 1, depth - 1, with_mu);
            Term::prim_rec(base, step).unwrap()
        }
        3 if with_mu => Term::mu(random_term(rng, arity + 1, depth - 1, with_mu)).unwrap(),
        _ => leaf(rng),
    }
}

/// Reference interpreter: direct recursion, no shortcuts, same step costs.
/// `None` means the fuel ran out.
struct Reference {
    fuel: u64,
}

impl Reference {
    fn tick(&mut self, n: u64) -> Option<()> {
        self.fuel = self.fuel.checked_sub(n)?;
        Some(())
    }

    fn run(&mut self, t: &Term, x: &[BigUint]) -> Option<BigUint> {
        self.tick(1)?;
        match t.node() {
            Node::Const(k) => Some(k.to_biguint()),
            Node::Succ => {
                self.tick(1)?;
                Some(&x[0] + 1u32)
            }
            Node::Proj { index, .. } => Some(x[index - 1].clone()),
            Node::Compose { outer, inners } => {
                let mid = inners
                    .iter()
                    .map(|g| self.run(g, x))
                    .collect::<Option<Vec<_>>>()?;
                self.run(outer, &mid)
            }
            Node::PrimRec { base, step } => {
                let (xs, y) = x.split_at(x.len() - 1);
                let mut acc = self.run(base, xs)?;
                let mut i = BigUint::ZERO;
                while i < y[0] {
                    let mut args = xs.to_vec();
                    args.push(i.clone());
                    args.push(acc);
                    acc = self.run(step, &args)?;
                    i += 1u32;
                }
                Some(acc)
            }
            Node::Mu { body } => {
                let mut z = BigUint::from(1u32);
                loop {
                    self.tick(1)?;
                    let mut args = x.to_vec();
                    args.push(z.clone());
                    if self.run(body, &args)? == BigUint::ZERO {
                        return Some(z);
                    }
                    z += 1u32;
                }
            }
        }
    }
}

fn nats(x: &[u64]) -> Vec<Nat> {
    x.iter().map(|&v| Nat::from(v)).collect()
}

fn bigs(x: &[u64]) -> Vec<BigUint> {
    x.iter().map(|&v| BigUint::from(v)).collect()
}

fn term_and_args(seed: u64, depth: u32, with_mu: bool) -> (Term, Vec<u64>) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let arity = rng.random_range(0..=3);
    let t = random_term(&mut rng, arity, depth, with_mu);
    let args = (0..arity).map(|_| rng.random_range(0..=8)).collect();
    (t, args)
}

fn largest_constant(t: &Term) -> BigUint {
    match t.node() {
        Node::Const(k) => k.to_biguint(),
        Node::Succ | Node::Proj { .. } => BigUint::ZERO,
        Node::Compose { outer, inners } => inners
            .iter()
            .map(largest_constant)
            .fold(largest_constant(outer), BigUint::max),
        Node::PrimRec { base, step } => largest_constant(base).max(largest_constant(step)),
        Node::Mu { body } => largest_constant(body),
    }
}

const BUDGET: u64 = 5_000;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn matches_reference_without_mu(seed in any::<u64>()) {
        let (t, x) = term_and_args(seed, 4, false);
        let mut reference = Reference { fuel: BUDGET };
        let expected = reference.run(&t, &bigs(&x));
        for accelerate in [true, false] {
            let got = eval_with(&t, &nats(&x), BUDGET, EvalOptions { accelerate }).unwrap();
            match (&got, &expected) {
                (EvalOutcome::Value { value, steps }, Some(v)) => {
                    prop_assert_eq!(&value.to_biguint(), v, "{}", t);
                    prop_assert_eq!(*steps, BUDGET - reference.fuel);
                }
                (EvalOutcome::BudgetExhausted { .. }, None) => {}
                _ => prop_assert!(false, "{} on {:?}: {:?} vs {:?}", t, x, got, expected),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn mu_returns_least_positive_root(seed in any::<u64>()) {
        let (t, x) = term_and_args(seed, 3, true);
        let got = eval(&t, &nats(&x), BUDGET).unwrap();
        let mut reference = Reference { fuel: BUDGET };
        let expected = reference.run(&t, &bigs(&x));
        match got {
            EvalOutcome::Value { value, steps } => {
                prop_assert_eq!(Some(value.to_biguint()), expected);
                prop_assert_eq!(steps, BUDGET - reference.fuel);
            }
            // a search whose body ignores z never finds a root at any budget
            EvalOutcome::Undefined { reason: UndefinedReason::NoRoot, .. } => {
                let mut bigger = Reference { fuel: 20 * BUDGET };
                prop_assert_eq!(bigger.run(&t, &bigs(&x)), None);
            }
            EvalOutcome::BudgetExhausted { .. } => prop_assert_eq!(expected, None),
            EvalOutcome::Undefined { .. } => prop_assert!(false, "unexpected {:?}", got),
        }
    }

    #[test]
    fn budgets_are_monotone(seed in any::<u64>(), extra in 1u64..10_000) {
        let (t, x) = term_and_args(seed, 3, true);
        let x = nats(&x);
        let low = eval(&t, &x, BUDGET).unwrap();
        let high = eval(&t, &x, BUDGET + extra).unwrap();
        match &low {
            EvalOutcome::Value { steps, .. } => {
                prop_assert_eq!(&high, &low);
                prop_assert_eq!(&eval(&t, &x, *steps).unwrap(), &low);
                if *steps > 1 {
                    prop_assert!(eval(&t, &x, steps - 1).unwrap().is_exhausted());
                }
            }
            EvalOutcome::Undefined { .. } => prop_assert_eq!(&high, &low),
            EvalOutcome::BudgetExhausted { steps } => {
                prop_assert_eq!(*steps, BUDGET);
                prop_assert!(eval(&t, &x, BUDGET / 2).unwrap().is_exhausted());
            }
        }
    }

    #[test]
    fn outputs_grow_at_most_one_per_step(seed in any::<u64>()) {
        let (t, x) = term_and_args(seed, 4, true);
        if let EvalOutcome::Value { value, steps } = eval(&t, &nats(&x), BUDGET).unwrap() {
            let base = largest_constant(&t).max(BigUint::from(x.iter().copied().max().unwrap_or(0)));
            prop_assert!(value.to_biguint() <= base + steps, "{}", t);
        }
    }

    #[test]
    fn closed_terms_round_trip(seed in any::<u64>()) {
        let mut rng = Pcg64::seed_from_u64(seed);
        let t = random_term(&mut rng, 0, 6, true);
        let p = encode_term(&t);
        prop_assert_eq!(decode_program(&p).unwrap(), t.clone());
        let again = Program::from_index(&p.index());
        prop_assert_eq!(again.bits.clone(), p.bits.clone());
        prop_assert_eq!(decode_term(&again.bits).unwrap(), t);
    }

    #[test]
    fn encoding_is_injective(a in any::<u64>(), b in any::<u64>()) {
        let ta = random_term(&mut Pcg64::seed_from_u64(a), 0, 5, true);
        let tb = random_term(&mut Pcg64::seed_from_u64(b), 0, 5, true);
        prop_assert_eq!(ta == tb, encode_term(&ta).bits == encode_term(&tb).bits);
    }
}

fn is_program(bits: &Bits) -> bool {
    decode_program(&Program { bits: bits.clone() }).is_ok()
}

#[test]
fn valid_programs_are_prefix_free() {
    let mut valid: HashSet<Vec<bool>> = HashSet::new();
    for len in 0..=14 {
        for bits in Bits::all_of_length(len) {
            if is_program(&bits) {
                valid.insert(bits.as_slice().to_vec());
            }
        }
    }
    assert!(!valid.is_empty());
    for p in &valid {
        for cut in 0..p.len() {
            assert!(!valid.contains(&p[..cut]), "prefix of {p:?} is valid");
        }
    }
}

#[test]
fn kraft_partial_sums() {
    let counts = ProgramCounts::new(20);
    let mut generator = TermGenerator::new(20);
    let mut sum = 0.0f64;
    for len in 0..=20 {
        let c = counts.programs(len);
        if len <= 16 {
            let brute = Bits::all_of_length(len).filter(is_program).count();
            assert_eq!(c, brute as u128, "length {len}");
        }
        assert_eq!(generator.terms(0, len).len() as u128, c);
        sum += c as f64 / 2f64.powi(len as i32);
        assert!(sum <= 1.0, "partial sum {sum} at length {len}");
    }
}

#[test]
fn index_numbering_is_a_bijection() {
    for m in 1u64..=100_000 {
        let p = Program::from_index_u64(m);
        assert_eq!(p.index_u64(), Some(m));
        if let Ok(t) = decode_program(&p) {
            assert_eq!(encode_term(&t).index_u64(), Some(m));
        }
    }
}
