use num_traits::{One, Zero};
use serde::Serialize;

use super::challenge::ChallengeMode;
use super::exact::{apply_action, initial_distribution, leaf_value, Dist};
use super::strategy::{ActionNode, AliceAction, StrategyNode};
use super::{CloningError, CloningStrategy};
use crate::bell::bell_measurement;
use crate::prob::{self, Prob};
use crate::theory::{enumerate_valid_measurements, rotation, Measurement, MeasurementFamily};

pub const MAX_SEARCH_PARTICLES: usize = 3;
pub const MAX_SEARCH_DEPTH: usize = 2;
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// One action Alice may take at a decision node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub action: AliceAction,
    /// 1-based particle indices.
    pub targets: Vec<usize>,
}

/// The action set a search ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Every measurement in `measurements` on every ordered tuple of distinct
    /// particles of matching size, plus (optionally) all four rotations on
    /// every particle. Alice's particles all sit in her lab, so every tuple is
    /// co-located.
    pub fn from_measurements(measurements: &[Measurement], n: usize, rotations: bool) -> Self {
        let mut entries = Vec::new();
        for m in measurements {
            for targets in ordered_tuples(n, m.num_particles()) {
                entries.push(CatalogEntry {
                    action: AliceAction::Measure(m.clone()),
                    targets,
                });
            }
        }
        if rotations {
            for particle in 1..=n {
                for k in 0..4 {
                    entries.push(CatalogEntry {
                        action: AliceAction::Manipulate(rotation(k).expect("k < 4")),
                        targets: vec![particle],
                    });
                }
            }
        }
        Catalog { entries }
    }

    /// The four canonical one-particle measurements on each particle, the
    /// pair measurement on each ordered pair, and all rotations.
    pub fn default_for(n: usize) -> Self {
        let mut ms = enumerate_valid_measurements(1, MeasurementFamily::Exhaustive)
            .expect("one-particle enumeration");
        ms.push(bell_measurement());
        Self::from_measurements(&ms, n, true)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn ordered_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for prefix in ordered_tuples(n, k - 1) {
        for i in 1..=n {
            if !prefix.contains(&i) {
                let mut t = prefix.clone();
                t.push(i);
                out.push(t);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub num_particles: usize,
    pub depth: usize,
    /// `None` selects [`Catalog::default_for`].
    pub catalog: Option<Catalog>,
    pub preparations: Vec<Measurement>,
    pub node_budget: u64,
    pub mode: ChallengeMode,
}

impl SearchConfig {
    pub fn new(num_particles: usize, depth: usize, preparations: Vec<Measurement>) -> Self {
        SearchConfig {
            num_particles,
            depth,
            catalog: None,
            preparations,
            node_budget: DEFAULT_NODE_BUDGET,
            mode: ChallengeMode::Clone,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub strategy: CloningStrategy,
    #[serde(with = "prob::as_string")]
    pub max_pass_probability: Prob,
    /// Decision nodes evaluated (counted against the budget).
    pub nodes_evaluated: u64,
}

struct Searcher<'a> {
    catalog: &'a Catalog,
    preparations: &'a [Measurement],
    n: usize,
    mode: ChallengeMode,
    budget: u64,
    nodes: u64,
}

impl Searcher<'_> {
    /// Optimal subtree for the sub-distribution `dist` with `depth` actions
    /// left. Branch choices are independent given the outcomes seen so far,
    /// so optimal trees are assembled from optimal subtrees; this covers the
    /// same space as enumerating every tree.
    fn best(&mut self, dist: &Dist, depth: usize) -> Result<(Prob, StrategyNode), CloningError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(CloningError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let mass: Prob = dist.values().copied().sum();

        let mut best: Option<(Prob, StrategyNode)> = None;
        for pair in ordered_tuples(self.n, 2) {
            let pair = [pair[0], pair[1]];
            let v = leaf_value(dist, self.preparations, pair, self.n, self.mode);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, StrategyNode::Leaf(pair)));
            }
        }
        if depth == 0 {
            return Ok(best.expect("at least one leaf"));
        }

        for entry in &self.catalog.entries {
            if best.as_ref().is_some_and(|(b, _)| *b == mass) {
                break;
            }
            let parts = apply_action(dist, &entry.action, &entry.targets, self.n);
            let mut total = Prob::zero();
            let mut children = Vec::with_capacity(parts.len());
            for part in &parts {
                if part.is_empty() {
                    children.push(StrategyNode::leaf(1, 2));
                    continue;
                }
                let (v, child) = self.best(part, depth - 1)?;
                total += v;
                children.push(child);
            }
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((
                    total,
                    StrategyNode::Node(Box::new(ActionNode {
                        action: entry.action.clone(),
                        target_particles: entry.targets.clone(),
                        children_by_outcome: children,
                    })),
                ));
            }
        }
        Ok(best.expect("at least one leaf"))
    }
}

/// Finds a strategy with the largest exact pass probability among all
/// decision trees over the catalog with at most `depth` actions per path.
pub fn search_strategies(config: &SearchConfig) -> Result<SearchOutcome, CloningError> {
    let n = config.num_particles;
    if !(2..=MAX_SEARCH_PARTICLES).contains(&n) {
        return Err(CloningError::UnsupportedSearch(format!(
            "Alice must hold 2..={MAX_SEARCH_PARTICLES} particles, got {n}"
        )));
    }
    if config.depth > MAX_SEARCH_DEPTH {
        return Err(CloningError::UnsupportedSearch(format!(
            "depth {} exceeds {MAX_SEARCH_DEPTH}",
            config.depth
        )));
    }
    if config.preparations.is_empty() {
        return Err(CloningError::NoPreparations);
    }
    if config.preparations.iter().any(|p| p.num_particles() != 1) {
        return Err(CloningError::PreparationArity);
    }
    let default_catalog;
    let catalog = match &config.catalog {
        Some(c) => c,
        None => {
            default_catalog = Catalog::default_for(n);
            &default_catalog
        }
    };
    for e in &catalog.entries {
        if e.targets.iter().any(|&t| t == 0 || t > n) {
            return Err(CloningError::UnavailableParticle {
                index: e.targets.iter().copied().max().unwrap_or(0),
                available: n,
            });
        }
    }

    let mut searcher = Searcher {
        catalog,
        preparations: &config.preparations,
        n,
        mode: config.mode,
        budget: config.node_budget,
        nodes: 0,
    };
    let dist = initial_distribution(&config.preparations, n);
    let (value, tree) = searcher.best(&dist, config.depth)?;
    debug_assert!(value <= Prob::one());
    Ok(SearchOutcome {
        strategy: CloningStrategy::new(n, tree)?,
        max_pass_probability: value,
        nodes_evaluated: searcher.nodes,
    })
}
