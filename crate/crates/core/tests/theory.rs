use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;

use toylocal::bell::bell_measurement;
use toylocal::bundled;
use toylocal::rng::seeded;
use toylocal::stats::chi_square_uniform;
use toylocal::theory::*;
use toylocal::Prob;

fn s(values: &[u8]) -> SystemState {
    SystemState::from_values(values).unwrap()
}

/// Outcome lookup by scanning rows, independent of the lookup table.
fn scan_outcome(m: &Measurement, x: &SystemState) -> Vec<usize> {
    m.outcome_sets()
        .iter()
        .enumerate()
        .filter(|(_, set)| set.rows().contains(x))
        .map(|(r, _)| r)
        .collect()
}

/// Relabels particle `i` by `maps[i]` in every row. Validity is preserved.
fn relabel(m: &Measurement, maps: &[Bijection]) -> Measurement {
    let outcomes = m
        .outcome_sets()
        .iter()
        .map(|set| {
            set.rows()
                .iter()
                .map(|row| {
                    let vals = row
                        .particles()
                        .iter()
                        .zip(maps)
                        .map(|(&p, u)| u.apply(p))
                        .collect();
                    SystemState::new(vals).unwrap()
                })
                .collect()
        })
        .collect();
    Measurement::from_outcomes(m.num_particles(), outcomes).unwrap()
}

fn pool() -> Vec<Measurement> {
    let mut ms = enumerate_valid_measurements(1, MeasurementFamily::Exhaustive).unwrap();
    ms.extend(enumerate_valid_measurements(2, MeasurementFamily::ProductsAndCosets).unwrap());
    ms.push(bell_measurement());
    ms.extend(bundled::all().into_iter().map(|(_, m)| m));
    ms
}

// Oracle: all functions {0,1,2,3} -> block labels, canonicalized, blocks of
// size >= 2.
#[test]
fn single_particle_enumeration_matches_oracle() {
    let mut oracle = std::collections::BTreeSet::new();
    for code in 0..256u32 {
        let labels: Vec<u32> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
        let mut blocks: BTreeMap<u32, Vec<u8>> = BTreeMap::new();
        for (v, &l) in labels.iter().enumerate() {
            blocks.entry(l).or_default().push(v as u8);
        }
        if blocks.values().all(|b| b.len() >= 2) {
            let mut part: Vec<Vec<u8>> = blocks.into_values().collect();
            part.sort();
            oracle.insert(part);
        }
    }
    assert_eq!(oracle.len(), 4);

    let got = enumerate_valid_measurements(1, MeasurementFamily::Exhaustive).unwrap();
    let got: std::collections::BTreeSet<Vec<Vec<u8>>> = got
        .iter()
        .map(|m| {
            let mut part: Vec<Vec<u8>> = m
                .outcome_sets()
                .iter()
                .map(|set| {
                    let mut b: Vec<u8> = set.rows().iter().map(|r| r.values()[0]).collect();
                    b.sort();
                    b
                })
                .collect();
            part.sort();
            part
        })
        .collect();
    assert_eq!(got, oracle);
}

#[test]
fn every_pooled_measurement_partitions_the_state_space() {
    for m in pool() {
        assert!(validate_measurement(&m.to_def()).unwrap().is_valid());
        for x in SystemState::all(m.num_particles()) {
            let hits = scan_outcome(&m, &x);
            assert_eq!(hits.len(), 1, "{x} in {hits:?}");
            assert_eq!(find_outcome(&m, &x).unwrap(), hits[0]);
        }
    }
}

#[test]
fn rejected_partitions_are_exactly_the_invalid_ones() {
    // every set partition of the one-particle space; the oracle checks block
    // sizes directly
    for blocks in set_partitions(4) {
        let outcomes: Vec<Vec<SystemState>> = blocks
            .iter()
            .map(|b| b.iter().map(|&v| s(&[v as u8])).collect())
            .collect();
        let def = MeasurementDef {
            num_particles: 1,
            outcomes,
        };
        let ok = blocks.iter().all(|b| b.len() >= 2);
        assert_eq!(
            validate_measurement(&def).unwrap().is_valid(),
            ok,
            "{blocks:?}"
        );
    }
}

#[test]
fn corrupted_variants_name_the_rule() {
    let bell = bell_measurement().to_def();

    let mut dup = bell.clone();
    let first = dup.outcomes[0][0].clone();
    dup.outcomes[0].push(first);
    let v = validate_measurement(&dup).unwrap();
    assert!(matches!(
        v.violation(),
        Some(Violation::DuplicateRow { .. })
    ));
    assert_eq!(v.violation().unwrap().rule(), Rule::Partition);

    let single = MeasurementDef {
        num_particles: 1,
        outcomes: vec![vec![s(&[0])], vec![s(&[1]), s(&[2]), s(&[3])]],
    };
    let v = validate_measurement(&single).unwrap();
    assert_eq!(v.violation().unwrap().rule(), Rule::Column);
    assert!(v.violation().unwrap().to_string().contains("postulate 5"));

    // moving (0,0) into the outcome-1 set leaves values 1, 2, 3 on 1 of 5
    // rows in its first column
    let mut rare = bell.clone();
    let moved = rare.outcomes[0].remove(0);
    rare.outcomes[1].push(moved);
    let v = validate_measurement(&rare).unwrap();
    assert!(matches!(
        v.violation(),
        Some(Violation::RareValue {
            outcome: Some(1),
            column: 1,
            count: 1,
            rows: 5,
            ..
        })
    ));
    assert!(v.violation().unwrap().to_string().contains("postulate 5"));

    let mut missing = bell.clone();
    missing.outcomes.pop();
    let v = validate_measurement(&missing).unwrap();
    assert!(matches!(v.violation(), Some(Violation::Missing { .. })));
    assert!(v.violation().unwrap().to_string().contains("postulate 2"));
}

#[test]
fn no_certainty_after_any_outcome() {
    let mut ms = enumerate_valid_measurements(1, MeasurementFamily::Exhaustive).unwrap();
    ms.push(bell_measurement());
    let quarter = Prob::new(1, 4);
    for m in &ms {
        for r in 0..m.num_outcomes() {
            let post = posterior_mixture(m, r).unwrap();
            for column in 1..=m.num_particles() {
                let marginal = post.marginal(column).unwrap();
                let big = marginal.iter().filter(|&&p| p >= quarter).count();
                assert!(big >= 2, "outcome {r}, column {column}: {marginal:?}");
            }
        }
    }
}

#[test]
fn post_measurement_rows_are_uniform() {
    let m = bell_measurement();
    let x = s(&[2, 3]);
    let r = find_outcome(&m, &x).unwrap();
    let rows = m.outcome_sets()[r].rows().to_vec();
    let mut rng = seeded(2024);
    let mut counts = vec![0u64; rows.len()];
    for _ in 0..10_000 {
        let (got, post) = measure(&m, &x, &mut rng).unwrap();
        assert_eq!(got, r);
        counts[rows.iter().position(|row| *row == post).unwrap()] += 1;
    }
    assert!(chi_square_uniform(&counts).accepts(0.001), "{counts:?}");
}

#[test]
fn bayes_consistency_on_a_rational_grid() {
    // priors with support up to 4 and weights in 1..=3 (normalized)
    let ms = enumerate_valid_measurements(1, MeasurementFamily::Exhaustive).unwrap();
    let mut priors = Vec::new();
    for mask in 1u32..16 {
        let support: Vec<u8> = (0..4).filter(|v| mask & (1 << v) != 0).collect();
        for code in 0..3u32.pow(support.len() as u32) {
            let weights: Vec<i64> = (0..support.len())
                .map(|i| (code / 3u32.pow(i as u32) % 3) as i64 + 1)
                .collect();
            priors.push((support.clone(), weights));
        }
    }
    for m in &ms {
        for (support, weights) in &priors {
            let total: i64 = weights.iter().sum();
            let prior = Mixture::from_weights(
                support
                    .iter()
                    .zip(weights)
                    .map(|(&v, &w)| (s(&[v]), Prob::new(w, total)))
                    .collect(),
            )
            .unwrap();

            // joint over (pre, outcome, post)
            let mut joint: BTreeMap<(u8, usize, u8), Prob> = BTreeMap::new();
            for (&v, &w) in support.iter().zip(weights) {
                let r = scan_outcome(m, &s(&[v]))[0];
                let rows = m.outcome_sets()[r].rows();
                for row in rows {
                    *joint
                        .entry((v, r, row.values()[0]))
                        .or_insert_with(Prob::zero) +=
                        Prob::new(w, total) / Prob::from_integer(rows.len() as i64);
                }
            }
            for r in 0..m.num_outcomes() {
                let p_r: Prob = joint
                    .iter()
                    .filter(|(k, _)| k.1 == r)
                    .map(|(_, p)| *p)
                    .sum();
                match retrodict(&prior, m, r) {
                    Err(TheoryError::OutcomeImpossible) => assert!(p_r.is_zero()),
                    Err(e) => panic!("{e}"),
                    Ok(pre) => {
                        for v in 0..4u8 {
                            let pv: Prob = joint
                                .iter()
                                .filter(|(k, _)| k.0 == v && k.1 == r)
                                .map(|(_, p)| *p)
                                .sum();
                            assert_eq!(pre.probability(&s(&[v])), pv / p_r);
                        }
                        let post = posterior_mixture(m, r).unwrap();
                        for v in 0..4u8 {
                            let pv: Prob = joint
                                .iter()
                                .filter(|(k, _)| k.2 == v && k.1 == r)
                                .map(|(_, p)| *p)
                                .sum();
                            assert_eq!(post.probability(&s(&[v])), pv / p_r);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn retrodiction_worked_example() {
    let prior = Mixture::uniform(vec![s(&[0]), s(&[1])]).unwrap();
    let b = bundled::single_b();
    assert_eq!(retrodict(&prior, &b, 0).unwrap(), Mixture::point(s(&[1])));
    assert_eq!(
        posterior_mixture(&b, 0).unwrap(),
        Mixture::uniform(vec![s(&[1]), s(&[2])]).unwrap()
    );
    assert_eq!(
        retrodict(&Mixture::point(s(&[0])), &b, 0).unwrap_err(),
        TheoryError::OutcomeImpossible
    );
}

#[test]
fn rotation_group_law() {
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(
                rotation(a).unwrap().compose(&rotation(b).unwrap()),
                rotation((a + b) % 4).unwrap()
            );
        }
        assert_eq!(rotation(a).unwrap().table().iter().sum::<u8>(), 6);
    }
}

fn arb_triple() -> impl Strategy<Value = (Measurement, SystemState, u64)> {
    let ms = pool();
    let n = ms.len();
    (
        0..n,
        prop::array::uniform2(0..24usize),
        any::<u64>(),
        any::<u16>(),
    )
        .prop_map(move |(i, maps, seed, idx)| {
            let all = Bijection::all();
            let m = &ms[i];
            let k = m.num_particles();
            let m = relabel(m, &[all[maps[0]], all[maps[1]]][..k]);
            let x = SystemState::from_index(idx as usize % 4usize.pow(k as u32), k);
            (m, x, seed)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn remeasurement_repeats((m, x, seed) in arb_triple()) {
        let mut rng = seeded(seed);
        let (r, post) = measure(&m, &x, &mut rng).unwrap();
        prop_assert_eq!(find_outcome(&m, &post).unwrap(), r);
        let (again, _) = measure(&m, &post, &mut rng).unwrap();
        prop_assert_eq!(again, r);
        prop_assert!(m.outcome_sets()[r].rows().contains(&post));
    }

    #[test]
    fn mixture_sampling_stays_in_support(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = seeded(seed);
        let states: Vec<SystemState> = (0..k).map(|v| s(&[v as u8])).collect();
        let mix = Mixture::uniform(states.clone()).unwrap();
        let draw = mix.sample(&mut rng);
        prop_assert!(states.contains(&draw));
    }
}
