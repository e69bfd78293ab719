//! Clause graphs, node features and spectral positional encodings: the
//! input representation of the clause scorer.
//!
//! A clause becomes a DAG with a clause root, one literal node per literal,
//! one term node per argument occurrence and one shared node per variable.
//! Nodes of the scored clause, the goal clause and the negated conjecture
//! clauses are concatenated in that priority order and truncated at
//! [`MAX_NODES`].

mod hash;
mod spectral;

use std::collections::HashMap;
use std::collections::VecDeque;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::fol::{Clause, SymbolId, SymbolTable, Term, VarId};

pub use hash::{hash_vector, HASH_DIM};
pub use spectral::{laplacian_eigen, spectral_encoding, Eigen, SPECTRAL_DIM, SPECTRAL_NODE_CAP};

/// Maximum number of nodes given to the scorer.
pub const MAX_NODES: usize = 128;

const ROLE_OFFSET: usize = 0;
const TYPE_OFFSET: usize = 3;
const POLARITY_OFFSET: usize = 8;
const SYMBOL_OFFSET: usize = 10;
const SLOT_OFFSET: usize = SYMBOL_OFFSET + HASH_DIM;

/// Per-node feature dimension: role (3), node type (5), polarity (2),
/// symbol hash and argument slot hash.
pub const FEATURE_DIM: usize = SLOT_OFFSET + HASH_DIM;

/// Which clause of the scorer input a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphRole {
    /// The clause being scored.
    Scored,
    /// The goal clause.
    Goal,
    /// A negated conjecture clause.
    Conjecture,
}

impl GraphRole {
    fn index(self) -> usize {
        match self {
            GraphRole::Scored => 0,
            GraphRole::Goal => 1,
            GraphRole::Conjecture => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    Clause,
    Literal,
    AtomicTerm,
    VariableTerm,
    Variable,
}

impl NodeType {
    fn index(self) -> usize {
        match self {
            NodeType::Clause => 0,
            NodeType::Literal => 1,
            NodeType::AtomicTerm => 2,
            NodeType::VariableTerm => 3,
            NodeType::Variable => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeType,
    /// Sign of the enclosing literal; `None` for clause and variable nodes.
    pub positive: Option<bool>,
    /// Predicate of a literal node or function/constant of an atomic term.
    pub symbol: Option<SymbolId>,
    /// Enclosing symbol and 1-based argument position of a term node.
    pub slot: Option<(SymbolId, usize)>,
    /// Variable of variable-term and variable nodes.
    pub var: Option<VarId>,
}

/// DAG of one clause; nodes are in level order (breadth first from the
/// root, children in argument order), edges point from parent to child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseGraph {
    pub role: GraphRole,
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
}

impl ClauseGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Builds the graph of `c`. The empty clause is a single clause node.
pub fn build_graph(c: &Clause, role: GraphRole) -> ClauseGraph {
    let mut nodes = vec![Node {
        kind: NodeType::Clause,
        positive: None,
        symbol: None,
        slot: None,
        var: None,
    }];
    let mut edges = Vec::new();
    let mut var_nodes: HashMap<VarId, usize> = HashMap::new();
    // (node, polarity, symbol whose arguments follow, arguments)
    let mut queue: VecDeque<(usize, bool, SymbolId, &[Term])> = VecDeque::new();

    for lit in c.literals() {
        let id = nodes.len();
        nodes.push(Node {
            kind: NodeType::Literal,
            positive: Some(lit.positive),
            symbol: Some(lit.pred),
            slot: None,
            var: None,
        });
        edges.push((0, id));
        queue.push_back((id, lit.positive, lit.pred, &lit.args));
    }
    while let Some((parent, positive, sym, args)) = queue.pop_front() {
        for (i, arg) in args.iter().enumerate() {
            let id = nodes.len();
            edges.push((parent, id));
            match arg {
                Term::App(f, sub) => {
                    nodes.push(Node {
                        kind: NodeType::AtomicTerm,
                        positive: Some(positive),
                        symbol: Some(*f),
                        slot: Some((sym, i + 1)),
                        var: None,
                    });
                    queue.push_back((id, positive, *f, sub));
                }
                Term::Var(v) => {
                    nodes.push(Node {
                        kind: NodeType::VariableTerm,
                        positive: Some(positive),
                        symbol: None,
                        slot: Some((sym, i + 1)),
                        var: Some(*v),
                    });
                    let var_node = *var_nodes.entry(*v).or_insert_with(|| {
                        nodes.push(Node {
                            kind: NodeType::Variable,
                            positive: None,
                            symbol: None,
                            slot: None,
                            var: Some(*v),
                        });
                        nodes.len() - 1
                    });
                    edges.push((id, var_node));
                }
            }
        }
    }
    ClauseGraph { role, nodes, edges }
}

/// Seed of the argument-slot hash for argument `index` (1-based) of `symbol`.
pub fn slot_seed(symbol: &str, index: usize) -> String {
    format!("{symbol}#{index}")
}

/// Feature matrix (`nodes × FEATURE_DIM`) of a graph.
pub fn node_features(g: &ClauseGraph, symbols: &SymbolTable) -> Array2<f64> {
    let mut out = Array2::zeros((g.len(), FEATURE_DIM));
    for (i, node) in g.nodes.iter().enumerate() {
        let mut row = out.row_mut(i);
        row[ROLE_OFFSET + g.role.index()] = 1.0;
        row[TYPE_OFFSET + node.kind.index()] = 1.0;
        if let Some(positive) = node.positive {
            row[POLARITY_OFFSET + usize::from(!positive)] = 1.0;
        }
        if let Some(sym) = node.symbol {
            let h = hash_vector(symbols.name(sym));
            row.slice_mut(s![SYMBOL_OFFSET..SYMBOL_OFFSET + HASH_DIM])
                .assign(&ndarray::ArrayView1::from(&h[..]));
        }
        if let Some((sym, index)) = node.slot {
            let h = hash_vector(&slot_seed(symbols.name(sym), index));
            row.slice_mut(s![SLOT_OFFSET..SLOT_OFFSET + HASH_DIM])
                .assign(&ndarray::ArrayView1::from(&h[..]));
        }
    }
    out
}

/// Scorer input: node features and spectral encodings of at most
/// [`MAX_NODES`] nodes. The scored clause's root is row `root`.
///
/// Rows at or beyond `valid` are padding and never reach the scorer.
#[derive(Clone, Debug, PartialEq)]
pub struct ClauseGraphInput {
    pub features: Array2<f64>,
    pub spectral: Array2<f64>,
    pub root: usize,
    pub valid: usize,
}

impl ClauseGraphInput {
    pub fn num_nodes(&self) -> usize {
        self.valid
    }

    /// Copy extended with zero rows up to `rows` total.
    pub fn padded(&self, rows: usize) -> ClauseGraphInput {
        let rows = rows.max(self.features.nrows());
        let mut features = Array2::zeros((rows, FEATURE_DIM));
        let mut spectral = Array2::zeros((rows, SPECTRAL_DIM));
        let n = self.features.nrows();
        features.slice_mut(s![..n, ..]).assign(&self.features);
        spectral.slice_mut(s![..n, ..]).assign(&self.spectral);
        ClauseGraphInput {
            features,
            spectral,
            root: self.root,
            valid: self.valid,
        }
    }
}

/// Features and spectral encodings of one whole clause graph, ready to be
/// placed into scorer inputs.
#[derive(Clone, Debug)]
pub struct Encoded {
    features: Array2<f64>,
    spectral: Array2<f64>,
}

impl Encoded {
    pub fn num_nodes(&self) -> usize {
        self.features.nrows()
    }
}

pub fn encode(c: &Clause, role: GraphRole, symbols: &SymbolTable) -> Encoded {
    let g = build_graph(c, role);
    Encoded {
        features: node_features(&g, symbols),
        spectral: spectral_encoding(&g),
    }
}

/// Precomputed goal and conjecture graphs, reused for every scored clause
/// of the same context.
#[derive(Clone, Debug)]
pub struct InputContext {
    parts: Vec<Encoded>,
}

impl InputContext {
    /// Encodes `goal` and the conjecture clauses; graphs that could never
    /// fit are skipped.
    pub fn new(goal: &Clause, conjecture: &[Clause], symbols: &SymbolTable) -> Self {
        let mut parts = Vec::new();
        // The scored clause contributes at least its root.
        let mut budget = MAX_NODES - 1;
        let mut push = |c: &Clause, role| {
            if budget > 0 {
                let e = encode(c, role, symbols);
                budget = budget.saturating_sub(e.features.nrows());
                parts.push(e);
            }
        };
        push(goal, GraphRole::Goal);
        for c in conjecture {
            push(c, GraphRole::Conjecture);
        }
        InputContext { parts }
    }

    /// Assembles the input for scored clause `x`.
    pub fn assemble(&self, x: &Clause, symbols: &SymbolTable) -> ClauseGraphInput {
        self.assemble_encoded(&encode(x, GraphRole::Scored, symbols))
    }

    /// Assembles the input for a scored clause encoded with
    /// [`GraphRole::Scored`].
    pub fn assemble_encoded(&self, xe: &Encoded) -> ClauseGraphInput {
        let parts = std::iter::once(xe).chain(&self.parts);
        let total: usize = std::iter::once(xe)
            .chain(&self.parts)
            .map(|e| e.features.nrows())
            .sum::<usize>()
            .min(MAX_NODES);
        let mut features = Array2::zeros((total, FEATURE_DIM));
        let mut spectral = Array2::zeros((total, SPECTRAL_DIM));
        let mut row = 0;
        for e in parts {
            let take = e.features.nrows().min(total - row);
            if take == 0 {
                break;
            }
            features
                .slice_mut(s![row..row + take, ..])
                .assign(&e.features.slice(s![..take, ..]));
            spectral
                .slice_mut(s![row..row + take, ..])
                .assign(&e.spectral.slice(s![..take, ..]));
            row += take;
        }
        ClauseGraphInput {
            features,
            spectral,
            root: 0,
            valid: total,
        }
    }
}

/// Builds the scorer input for `x` against goal `g` and the negated
/// conjecture clauses.
pub fn assemble_input(x: &Clause, g: &Clause, conjecture: &[Clause], symbols: &SymbolTable) -> ClauseGraphInput {
    InputContext::new(g, conjecture, symbols).assemble(x, symbols)
}
