use num_traits::{One, Zero};

use toylocal::bell::bell_measurement;
use toylocal::bundled::{self, preparation_p, preparation_p_prime};
use toylocal::cloning::*;
use toylocal::rng::seeded;
use toylocal::stats::within_binomial_confidence;
use toylocal::theory::*;
use toylocal::Prob;

fn v(x: u8) -> ParticleState {
    ParticleState::new(x).unwrap()
}

// ---- independent exact oracle -------------------------------------------

fn block_of(m: &Measurement, x: &[u8]) -> usize {
    let st = SystemState::from_values(x).unwrap();
    m.outcome_sets()
        .iter()
        .position(|s| s.rows().contains(&st))
        .unwrap()
}

fn walk(node: &StrategyNode, state: Vec<u8>, w: Prob, prep: &Measurement, r: usize) -> Prob {
    match node {
        StrategyNode::Leaf([i, j]) => {
            if block_of(prep, &[state[i - 1]]) == r && block_of(prep, &[state[j - 1]]) == r {
                w
            } else {
                Prob::zero()
            }
        }
        StrategyNode::Node(a) => {
            let t = &a.target_particles;
            match &a.action {
                AliceAction::Manipulate(u) => {
                    let mut next = state.clone();
                    next[t[0] - 1] = u.table()[state[t[0] - 1] as usize];
                    walk(&a.children_by_outcome[0], next, w, prep, r)
                }
                AliceAction::Measure(m) => {
                    let proj: Vec<u8> = t.iter().map(|&i| state[i - 1]).collect();
                    let c = block_of(m, &proj);
                    let rows = m.outcome_sets()[c].rows();
                    let share = w / Prob::from_integer(rows.len() as i64);
                    rows.iter()
                        .map(|row| {
                            let mut next = state.clone();
                            for (&i, val) in t.iter().zip(row.values()) {
                                next[i - 1] = val;
                            }
                            walk(&a.children_by_outcome[c], next, share, prep, r)
                        })
                        .sum()
                }
            }
        }
    }
}

fn oracle(s: &CloningStrategy, preps: &[Measurement]) -> Prob {
    let n = s.num_particles();
    let mut total = Prob::zero();
    let w_prep = Prob::new(1, preps.len() as i64);
    for p in preps {
        for x in 0..4u8 {
            let r = block_of(p, &[x]);
            let rows = p.outcome_sets()[r].rows();
            for row in rows {
                for anc in 0..4usize.pow(n as u32 - 1) {
                    let mut state = vec![row.values()[0]];
                    state.extend(SystemState::from_index(anc, n - 1).values());
                    let w = w_prep
                        / 4
                        / Prob::from_integer(rows.len() as i64)
                        / Prob::from_integer(4i64.pow(n as u32 - 1));
                    total += walk(s.tree(), state, w, p, r);
                }
            }
        }
    }
    total
}

fn leaves(n: usize) -> Vec<StrategyNode> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                out.push(StrategyNode::leaf(i, j));
            }
        }
    }
    out
}

/// Every tree over `catalog` with at most `depth` actions on any path.
fn all_trees(n: usize, depth: usize, catalog: &Catalog) -> Vec<StrategyNode> {
    let mut out = leaves(n);
    if depth == 0 {
        return out;
    }
    let sub = all_trees(n, depth - 1, catalog);
    for e in &catalog.entries {
        let k = match &e.action {
            AliceAction::Manipulate(_) => 1,
            AliceAction::Measure(m) => m.num_outcomes(),
        };
        let mut idx = vec![0usize; k];
        loop {
            out.push(StrategyNode::Node(Box::new(ActionNode {
                action: e.action.clone(),
                target_particles: e.targets.clone(),
                children_by_outcome: idx.iter().map(|&i| sub[i].clone()).collect(),
            })));
            let mut pos = 0;
            while pos < k {
                idx[pos] += 1;
                if idx[pos] < sub.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
    }
    out
}

fn brute_force_max(n: usize, depth: usize, catalog: &Catalog, preps: &[Measurement]) -> Prob {
    all_trees(n, depth, catalog)
        .into_iter()
        .map(|t| oracle(&CloningStrategy::new(n, t).unwrap(), preps))
        .max()
        .unwrap()
}

// ---- search -------------------------------------------------------------

#[test]
fn untouched_pair_value() {
    // Peter's particle always passes; an ancilla lands in his block half the
    // time.
    let preps = [preparation_p()];
    assert_eq!(
        oracle(&CloningStrategy::null(2).unwrap(), &preps),
        Prob::new(1, 2)
    );
    let out = search_strategies(&SearchConfig::new(2, 0, preps.to_vec())).unwrap();
    assert_eq!(out.max_pass_probability, Prob::new(1, 2));
}

#[test]
fn search_matches_brute_force_at_depth_one() {
    let preps = vec![preparation_p(), preparation_p_prime()];
    for n in [2, 3] {
        let out = search_strategies(&SearchConfig::new(n, 1, preps.clone())).unwrap();
        let brute = brute_force_max(n, 1, &Catalog::default_for(n), &preps);
        assert_eq!(out.max_pass_probability, brute, "n = {n}");
        assert_eq!(oracle(&out.strategy, &preps), out.max_pass_probability);
        assert!(brute < Prob::one());
    }
}

#[test]
fn search_matches_brute_force_at_depth_two() {
    let preps = vec![preparation_p(), preparation_p_prime()];
    let mut ms = vec![bundled::single_a()];
    ms.push(bundled::single_b());
    let mut catalog = Catalog::from_measurements(&ms, 2, false);
    catalog.entries.push(CatalogEntry {
        action: AliceAction::Manipulate(rotation(1).unwrap()),
        targets: vec![2],
    });
    let brute = brute_force_max(2, 2, &catalog, &preps);
    let mut config = SearchConfig::new(2, 2, preps.clone());
    config.catalog = Some(catalog);
    let out = search_strategies(&config).unwrap();
    assert_eq!(out.max_pass_probability, brute);
    assert_eq!(oracle(&out.strategy, &preps), brute);
}

#[test]
fn no_perfect_cloning_in_the_searched_spaces() {
    for n in [2, 3] {
        for depth in 0..=2 {
            for preps in [
                vec![preparation_p()],
                vec![preparation_p(), preparation_p_prime()],
            ] {
                let out = search_strategies(&SearchConfig::new(n, depth, preps.clone())).unwrap();
                assert!(out.max_pass_probability < Prob::one(), "n={n} D={depth}");
                assert_eq!(
                    exact_pass_probability(&out.strategy, &preps, ChallengeMode::Clone).unwrap(),
                    out.max_pass_probability
                );
            }
        }
    }
}

#[test]
fn exact_and_empirical_agree() {
    let preps = vec![preparation_p(), preparation_p_prime()];
    let out = search_strategies(&SearchConfig::new(2, 2, preps.clone())).unwrap();
    let res = run_challenge(
        &out.strategy,
        &preps,
        &ChallengeConfig {
            trials: 10_000,
            seed: 77,
            ..ChallengeConfig::default()
        },
    )
    .unwrap();
    let p = toylocal::prob::to_f64(&out.max_pass_probability);
    assert!(
        within_binomial_confidence(res.passes, res.trials, p, 0.99),
        "{} vs {p}",
        res.pass_rate_f64
    );
    assert_eq!(res.locality_violations, 0);

    let null = CloningStrategy::null(2).unwrap();
    let exact = exact_pass_probability(&null, &preps, ChallengeMode::Clone).unwrap();
    assert_eq!(exact, oracle(&null, &preps));
    let res = run_challenge(
        &null,
        &preps,
        &ChallengeConfig {
            seed: 5,
            ..ChallengeConfig::default()
        },
    )
    .unwrap();
    assert!(res.pass_rate < Prob::one());
    assert!(within_binomial_confidence(
        res.passes,
        res.trials,
        toylocal::prob::to_f64(&exact),
        0.99
    ));
}

// ---- certificate --------------------------------------------------------

fn has_diagonal(c: &OutcomeSet, cols: (usize, usize), t: ParticleState) -> bool {
    c.rows()
        .iter()
        .any(|r| r.particles()[cols.0 - 1] == t && r.particles()[cols.1 - 1] == t)
}

fn check_floor(c: &OutcomeSet) -> usize {
    let w = c.num_particles();
    let mut checked = 0;
    for a in 1..=w {
        for b in 1..=w {
            if a == b {
                continue;
            }
            for t in ParticleState::ALL {
                let cert = failure_certificate(c, (a, b), t).unwrap();
                if has_diagonal(c, (a, b), t) {
                    assert!(cert >= Prob::new(1, 4), "{cert} for {:?}", c.rows());
                    checked += 1;
                } else {
                    assert_eq!(cert, Prob::one());
                }
            }
        }
    }
    checked
}

#[test]
fn certificate_floor() {
    let mut fixed: Vec<OutcomeSet> = bell_measurement().outcome_sets().to_vec();
    for (_, m) in bundled::all() {
        fixed.extend(m.outcome_sets().iter().cloned());
    }
    for m in enumerate_valid_measurements(2, MeasurementFamily::ProductsAndCosets).unwrap() {
        fixed.extend(m.outcome_sets().iter().cloned());
    }
    for c in &fixed {
        check_floor(c);
    }

    let sampler = OutcomeSetSampler::new(2, 4).unwrap();
    let mut rng = seeded(31);
    let mut with_diagonal = 0;
    for _ in 0..1_500 {
        let c = sampler.sample(&mut rng);
        assert!(validate_outcome_set(c.rows()).unwrap().is_valid());
        if check_floor(&c) > 0 {
            with_diagonal += 1;
        }
    }
    assert!(with_diagonal >= 1_000, "{with_diagonal}");
}

#[test]
fn certificate_matches_branch_frequencies() {
    // measure the pair with particle 1 and an ancilla, hand both back
    let b = bell_measurement();
    let tree = StrategyNode::measure(vec![1, 2], b.clone(), vec![StrategyNode::leaf(1, 2); 4]);
    let strategy = CloningStrategy::new(2, tree).unwrap();
    let res = run_challenge(
        &strategy,
        &[preparation_p(), preparation_p_prime()],
        &ChallengeConfig {
            trials: 10_000,
            seed: 123,
            ..ChallengeConfig::default()
        },
    )
    .unwrap();
    assert_eq!(res.branches.len(), 4);
    assert_eq!(res.locality_violations, 0);
    for branch in &res.branches {
        let r = branch.path[0];
        let c = b.outcome_set(r).unwrap();
        for t in 0..4u8 {
            let tally = branch.copy_by_input[t as usize];
            let cert = failure_certificate(c, (1, 2), v(t)).unwrap();
            assert!(
                within_binomial_confidence(
                    tally.mismatches,
                    tally.reached,
                    toylocal::prob::to_f64(&cert),
                    0.99
                ),
                "branch {r}, input {t}: {}/{} vs {cert}",
                tally.mismatches,
                tally.reached
            );
        }
    }
}

#[test]
fn unavailable_particles_are_rejected() {
    let json = r#"{"num_particles":2,"tree":{"node":{"action":{"manipulate":[1,2,3,0]},"target_particles":[3],"children_by_outcome":[{"leaf":[1,2]}]}}}"#;
    assert!(serde_json::from_str::<CloningStrategy>(json).is_err());
    let ok = json.replace("[3]", "[2]");
    let s: CloningStrategy = serde_json::from_str(&ok).unwrap();
    assert_eq!(s.depth(), 1);
}
