use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use super::SynthError;
use crate::context::Context;
use crate::formula::Valuation;
use crate::game::{DeductiveGame, EvaluatedExperiment, ExperimentInstance};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Internal {
        experiment: ExperimentInstance,
        /// `(outcome index, child)`, ascending by outcome.
        children: Vec<(usize, NodeId)>,
    },
    Leaf {
        valuation: Valuation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    root: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub worst: u64,
    pub avg: Ratio<u64>,
}

impl ComplexityReport {
    pub fn avg_decimal(&self, places: u32) -> String {
        format_decimal(self.avg, places)
    }
}

/// Rounds half-up to `places` decimals.
pub fn format_decimal(r: Ratio<u64>, places: u32) -> String {
    let scale = 10u128.pow(places);
    let (n, d) = (*r.numer() as u128, *r.denom() as u128);
    let scaled = (n * scale * 2 + d) / (2 * d);
    let int = scaled / scale;
    if places == 0 {
        return int.to_string();
    }
    format!("{int}.{:0width$}", scaled % scale, width = places as usize)
}

#[derive(Serialize)]
struct JsonNode<'a> {
    node_id: NodeId,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<Vec<&'a str>>,
    children: BTreeMap<String, NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valuation: Option<Vec<&'a str>>,
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl DecisionTree {
    pub fn leaf(valuation: Valuation) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { valuation }],
            root: 0,
        }
    }

    /// Builds from nodes; `root` must index into `nodes`.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Self {
        assert!(root < nodes.len(), "root out of range");
        DecisionTree { nodes, root }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn child(&self, id: NodeId, outcome: usize) -> Option<NodeId> {
        match &self.nodes[id] {
            Node::Internal { children, .. } => children.iter().find(|(o, _)| *o == outcome).map(|&(_, c)| c),
            Node::Leaf { .. } => None,
        }
    }

    /// `λ_v`: the evaluated experiments along the play against `secret`.
    pub fn simulate(&self, game: &DeductiveGame, secret: &Valuation) -> Result<Vec<EvaluatedExperiment>, SynthError> {
        let mut path = Vec::new();
        let mut at = self.root;
        loop {
            match &self.nodes[at] {
                Node::Leaf { valuation } => {
                    if valuation != secret {
                        return Err(SynthError::MalformedTree(format!(
                            "play ends at leaf {} instead of {}",
                            game.describe_valuation(valuation),
                            game.describe_valuation(secret)
                        )));
                    }
                    return Ok(path);
                }
                Node::Internal { experiment, .. } => {
                    let ev = game
                        .evaluate_experiment(experiment, secret)
                        .map_err(|e| SynthError::MalformedTree(e.to_string()))?;
                    at = self.child(at, ev.outcome).ok_or_else(|| {
                        SynthError::MalformedTree(format!(
                            "no child for outcome `{}` of {}",
                            game.outcome_label(&ev),
                            game.instance_name(experiment)
                        ))
                    })?;
                    path.push(ev);
                    if path.len() > self.nodes.len() {
                        return Err(SynthError::MalformedTree("cycle".into()));
                    }
                }
            }
        }
    }

    /// `C_worst` and `C_avg`, checking that the leaves partition `Val(φ0)`.
    pub fn complexity(&self, ctx: &Context) -> Result<ComplexityReport, SynthError> {
        let space = ctx.space();
        let leaves = self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count();
        if leaves != space.len() {
            return Err(SynthError::MalformedTree(format!(
                "{leaves} leaves for {} codes",
                space.len()
            )));
        }
        let mut worst = 0u64;
        let mut total = 0u64;
        for code in space.codes() {
            let d = self.simulate(ctx.game(), code)?.len() as u64;
            worst = worst.max(d);
            total += d;
        }
        Ok(ComplexityReport {
            worst,
            avg: Ratio::new(total, space.len() as u64),
        })
    }

    /// Depth of every node, indexed by id.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if let Node::Internal { children, .. } = &self.nodes[id] {
                for &(_, c) in children {
                    depth[c] = depth[id] + 1;
                    stack.push(c);
                }
            }
        }
        depth
    }

    fn child_keys(game: &DeductiveGame, e: &ExperimentInstance, children: &[(usize, NodeId)]) -> Vec<String> {
        let labels: Vec<&str> = children
            .iter()
            .map(|&(o, _)| game.experiment(e.experiment).outcomes[o].label.as_str())
            .collect();
        labels
            .iter()
            .zip(children)
            .map(|(l, &(o, _))| {
                if labels.iter().filter(|x| *x == l).count() > 1 {
                    format!("{l}#{o}")
                } else {
                    l.to_string()
                }
            })
            .collect()
    }

    pub fn to_json(&self, game: &DeductiveGame) -> String {
        let nodes: Vec<JsonNode> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| match n {
                Node::Internal { experiment, children } => JsonNode {
                    node_id: id,
                    kind: "experiment",
                    experiment: Some(&game.experiment(experiment.experiment).name),
                    params: Some(experiment.params.iter().map(|p| game.param_name(*p)).collect()),
                    children: Self::child_keys(game, experiment, children)
                        .into_iter()
                        .zip(children.iter().map(|&(_, c)| c))
                        .collect(),
                    valuation: None,
                },
                Node::Leaf { valuation } => JsonNode {
                    node_id: id,
                    kind: "leaf",
                    experiment: None,
                    params: None,
                    children: BTreeMap::new(),
                    valuation: Some(valuation.true_vars().map(|v| game.var_name(v)).collect()),
                },
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "root": self.root, "nodes": nodes }))
            .expect("tree serializes")
    }

    pub fn to_dot(&self, game: &DeductiveGame) -> String {
        let mut s = String::from("digraph strategy {\n  node [fontname=\"monospace\"];\n");
        for (id, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Internal { experiment, children } => {
                    let _ = writeln!(
                        s,
                        "  n{id} [shape=box, label=\"{}\"];",
                        dot_escape(&game.instance_name(experiment))
                    );
                    for (key, &(_, c)) in Self::child_keys(game, experiment, children).iter().zip(children) {
                        let _ = writeln!(s, "  n{id} -> n{c} [label=\"{}\"];", dot_escape(key));
                    }
                }
                Node::Leaf { valuation } => {
                    let _ = writeln!(
                        s,
                        "  n{id} [shape=ellipse, label=\"{}\"];",
                        dot_escape(&game.describe_valuation(valuation))
                    );
                }
            }
        }
        s.push_str("}\n");
        s
    }
}
