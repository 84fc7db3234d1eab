use serde::{Deserialize, Serialize};

use super::CloningError;
use crate::theory::{Bijection, Measurement};

/// What Alice does at an internal node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceAction {
    /// Apply a bijection to the single target particle.
    Manipulate(Bijection),
    /// Measure the target particles (in order) jointly.
    Measure(Measurement),
}

/// A decision tree node. JSON: `{"leaf": [i, j]}` or
/// `{"node": {"action": …, "target_particles": […], "children_by_outcome": […]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyNode {
    /// 1-based indices of the particles handed back, original first.
    Leaf([usize; 2]),
    Node(Box<ActionNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionNode {
    pub action: AliceAction,
    pub target_particles: Vec<usize>,
    /// One child per measurement outcome; exactly one after a manipulation.
    pub children_by_outcome: Vec<StrategyNode>,
}

impl StrategyNode {
    pub fn leaf(first: usize, second: usize) -> Self {
        StrategyNode::Leaf([first, second])
    }

    pub fn manipulate(particle: usize, u: Bijection, next: StrategyNode) -> Self {
        StrategyNode::Node(Box::new(ActionNode {
            action: AliceAction::Manipulate(u),
            target_particles: vec![particle],
            children_by_outcome: vec![next],
        }))
    }

    pub fn measure(targets: Vec<usize>, m: Measurement, children: Vec<StrategyNode>) -> Self {
        StrategyNode::Node(Box::new(ActionNode {
            action: AliceAction::Measure(m),
            target_particles: targets,
            children_by_outcome: children,
        }))
    }

    /// Number of actions on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            StrategyNode::Leaf(_) => 0,
            StrategyNode::Node(n) => {
                1 + n
                    .children_by_outcome
                    .iter()
                    .map(StrategyNode::depth)
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    fn check(&self, n: usize) -> Result<(), CloningError> {
        let in_range = |index: usize| {
            if index == 0 || index > n {
                Err(CloningError::UnavailableParticle {
                    index,
                    available: n,
                })
            } else {
                Ok(())
            }
        };
        match self {
            StrategyNode::Leaf([a, b]) => {
                in_range(*a)?;
                in_range(*b)?;
                if a == b {
                    return Err(CloningError::MalformedStrategy(format!(
                        "leaf returns particle {a} twice"
                    )));
                }
                Ok(())
            }
            StrategyNode::Node(node) => {
                for t in &node.target_particles {
                    in_range(*t)?;
                }
                let targets = &node.target_particles;
                if (1..targets.len()).any(|i| targets[..i].contains(&targets[i])) {
                    return Err(CloningError::MalformedStrategy(
                        "repeated target particle".into(),
                    ));
                }
                let (arity, branches) = match &node.action {
                    AliceAction::Manipulate(_) => (1, 1),
                    AliceAction::Measure(m) => (m.num_particles(), m.num_outcomes()),
                };
                if targets.len() != arity {
                    return Err(CloningError::MalformedStrategy(format!(
                        "action needs {arity} target particles, got {}",
                        targets.len()
                    )));
                }
                if node.children_by_outcome.len() != branches {
                    return Err(CloningError::MalformedStrategy(format!(
                        "action has {branches} outcomes but {} children",
                        node.children_by_outcome.len()
                    )));
                }
                node.children_by_outcome.iter().try_for_each(|c| c.check(n))
            }
        }
    }
}

/// A validated decision tree for Alice, who holds `num_particles` particles:
/// particle 1 is the one received from Peter, the rest are ancillas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StrategyFile", into = "StrategyFile")]
pub struct CloningStrategy {
    num_particles: usize,
    tree: StrategyNode,
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    num_particles: usize,
    tree: StrategyNode,
}

impl CloningStrategy {
    pub fn new(num_particles: usize, tree: StrategyNode) -> Result<Self, CloningError> {
        if !(2..=crate::theory::N_MAX).contains(&num_particles) {
            return Err(CloningError::MalformedStrategy(format!(
                "Alice must hold between 2 and {} particles",
                crate::theory::N_MAX
            )));
        }
        tree.check(num_particles)?;
        Ok(CloningStrategy {
            num_particles,
            tree,
        })
    }

    /// Return the received particle and the first ancilla untouched.
    pub fn null(num_particles: usize) -> Result<Self, CloningError> {
        Self::new(num_particles, StrategyNode::leaf(1, 2))
    }

    pub fn num_particles(&self) -> usize {
        self.num_particles
    }

    pub fn tree(&self) -> &StrategyNode {
        &self.tree
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }
}

impl TryFrom<StrategyFile> for CloningStrategy {
    type Error = CloningError;

    fn try_from(f: StrategyFile) -> Result<Self, Self::Error> {
        CloningStrategy::new(f.num_particles, f.tree)
    }
}

impl From<CloningStrategy> for StrategyFile {
    fn from(s: CloningStrategy) -> Self {
        StrategyFile {
            num_particles: s.num_particles,
            tree: s.tree,
        }
    }
}
