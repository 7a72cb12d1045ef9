//! Shared helpers for integration tests: a seeded random-network corpus and
//! small construction shortcuts.

use bnctrl_core::builder::ModelContext;
use bnctrl_core::cnf::ClauseSet;
use bnctrl_core::dynamics::ControlVector;
use bnctrl_core::expr::{BoolExpr, GeneId};
use bnctrl_core::network::{augment_phenotype, BooleanNetwork};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Deterministic random augmented network: `n` genes (random 4..=8 unless
/// overridden), each transition formula a random and/or combination of up to
/// three input literals, and a random one- or two-literal phenotype. All
/// genes are controllable.
pub fn random_augmented(seed: u64, n_override: Option<usize>) -> BooleanNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_override.unwrap_or_else(|| rng.gen_range(4..=8));
    let names: Vec<String> = (1..=n).map(|i| format!("g{i}")).collect();

    let literal = |rng: &mut ChaCha8Rng, g: usize| -> BoolExpr {
        let v = BoolExpr::Var(GeneId(g));
        if rng.gen_bool(0.5) {
            BoolExpr::Not(Box::new(v))
        } else {
            v
        }
    };
    let combine = |rng: &mut ChaCha8Rng, lits: Vec<BoolExpr>| -> BoolExpr {
        let mut it = lits.into_iter();
        let mut acc = it.next().unwrap();
        for next in it {
            acc = if rng.gen_bool(0.5) {
                BoolExpr::And(vec![acc, next])
            } else {
                BoolExpr::Or(vec![acc, next])
            };
        }
        acc
    };

    let transitions: Vec<BoolExpr> = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3usize.min(n));
            let inputs = rand::seq::index::sample(&mut rng, n, k).into_vec();
            let lits: Vec<BoolExpr> = inputs.iter().map(|g| literal(&mut rng, *g)).collect();
            combine(&mut rng, lits)
        })
        .collect();

    let k = rng.gen_range(1..=2usize.min(n));
    let inputs = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let lits: Vec<BoolExpr> = inputs.iter().map(|g| literal(&mut rng, *g)).collect();
    let phenotype = combine(&mut rng, lits);

    let bn = BooleanNetwork::new(names, transitions, vec![true; n]);
    augment_phenotype(&bn, phenotype).unwrap()
}

pub fn context_of(bn: BooleanNetwork) -> ModelContext {
    let clauses = ClauseSet::from_network(&bn).unwrap();
    ModelContext::new(bn, clauses)
}

// Not every test target that includes this module uses every helper.
#[allow(dead_code)]
pub fn sorted(mut v: Vec<ControlVector>) -> Vec<ControlVector> {
    v.sort();
    v
}

/// All controls fixing any subset of `genes` to any values (3^|genes| total),
/// the empty control first.
pub fn all_exclusive_controls(genes: &[GeneId]) -> Vec<ControlVector> {
    let mut out = Vec::new();
    let n = genes.len();
    let total = 3usize.pow(n as u32);
    for mut code in 0..total {
        let mut fixes = Vec::new();
        for g in genes {
            match code % 3 {
                0 => {}
                1 => fixes.push((*g, false)),
                2 => fixes.push((*g, true)),
                _ => unreachable!(),
            }
            code /= 3;
        }
        out.push(ControlVector::from_pairs(fixes));
    }
    out
}
