//! Line-based description of a sorter network.
//!
//! ```text
//! # two-level tree built by hand
//! stage s1 theta=0.7853981633974483 phi=0
//! stage s2 theta=1.1780972450961724 phi=0
//! route s1.A -> s2
//! ```
//!
//! `tree <depth>` on its own builds the standard residue tree instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use super::{cascade_build, sagnac_transfer_in, CascadeInput, CascadeNode, PortFrame, SagnacStage};
use crate::error::{Error, Result};
use crate::modes::io::parse_num;
use crate::modes::{oam_phase, LGIndex, ModeExpansion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    A,
    B,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::A => "A",
            Port::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    pub name: String,
    pub stage: SagnacStage,
}

/// Validated acyclic network with a single entry stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<NetworkNode>,
    routes: BTreeMap<(usize, Port), usize>,
    leaf_labels: BTreeMap<(usize, Port), String>,
    root: usize,
}

impl Network {
    pub fn new(nodes: Vec<NetworkNode>, routes: Vec<((String, Port), String)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidNetwork("no stages".into()));
        }
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.name.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "stage {} defined twice",
                    n.name
                )));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown stage {name}")))
        };
        let mut edges = BTreeMap::new();
        let mut has_parent = BTreeSet::new();
        for ((parent, port), child) in &routes {
            let p = lookup(parent)?;
            let c = lookup(child)?;
            if edges.insert((p, *port), c).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "port {parent}.{port} routed twice"
                )));
            }
            if !has_parent.insert(c) {
                return Err(Error::InvalidNetwork(format!(
                    "stage {child} has more than one input"
                )));
            }
        }
        let roots: Vec<usize> = (0..nodes.len())
            .filter(|i| !has_parent.contains(i))
            .collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::InvalidNetwork("network is cyclic".into())),
            _ => {
                let names: Vec<&str> = roots.iter().map(|&i| nodes[i].name.as_str()).collect();
                return Err(Error::InvalidNetwork(format!(
                    "several entry stages: {}",
                    names.join(", ")
                )));
            }
        };
        // Every stage has at most one input, so the graph is a forest plus
        // possible cycles; walking from the root must reach every stage.
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                return Err(Error::InvalidNetwork("network is cyclic".into()));
            }
            for port in [Port::A, Port::B] {
                if let Some(&c) = edges.get(&(s, port)) {
                    stack.push(c);
                }
            }
        }
        if seen.len() != nodes.len() {
            return Err(Error::InvalidNetwork("network is cyclic".into()));
        }
        let mut leaf_labels = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            for port in [Port::A, Port::B] {
                if !edges.contains_key(&(i, port)) {
                    leaf_labels.insert((i, port), format!("{}.{}", n.name, port));
                }
            }
        }
        Ok(Network {
            nodes,
            routes: edges,
            leaf_labels,
            root,
        })
    }

    /// The residue tree as a network; leaves are labelled "r mod 2^depth".
    pub fn from_cascade(tree: &CascadeNode) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut routes = Vec::new();
        let mut labels = Vec::new();
        flatten(tree, &mut nodes, &mut routes, &mut labels);
        let mut net = Network::new(nodes, routes)?;
        for (stage, port, label) in labels {
            let i = net
                .nodes
                .iter()
                .position(|n| n.name == stage)
                .expect("flattened stage");
            net.leaf_labels.insert((i, port), label);
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn root(&self) -> &NetworkNode {
        &self.nodes[self.root]
    }

    /// Leaf labels in depth-first order, port A before port B.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk_leaves(self.root, &mut out);
        out
    }

    fn walk_leaves(&self, s: usize, out: &mut Vec<String>) {
        for port in [Port::A, Port::B] {
            match self.routes.get(&(s, port)) {
                Some(&c) => self.walk_leaves(c, out),
                None => out.push(self.leaf_labels[&(s, port)].clone()),
            }
        }
    }
}

fn stage_name(residue: u32, modulus: u32) -> String {
    format!("s{modulus}_{residue}")
}

fn flatten(
    node: &CascadeNode,
    nodes: &mut Vec<NetworkNode>,
    routes: &mut Vec<((String, Port), String)>,
    labels: &mut Vec<(String, Port, String)>,
) {
    let CascadeNode::Stage {
        stage,
        residue,
        modulus,
        port_a,
        port_b,
    } = node
    else {
        return;
    };
    let name = stage_name(*residue, *modulus);
    nodes.push(NetworkNode {
        name: name.clone(),
        stage: *stage,
    });
    for (port, child) in [(Port::A, port_a), (Port::B, port_b)] {
        match child.as_ref() {
            CascadeNode::Leaf { residue, modulus } => {
                labels.push((name.clone(), port, format!("{residue} mod {modulus}")))
            }
            CascadeNode::Stage {
                residue, modulus, ..
            } => {
                routes.push(((name.clone(), port), stage_name(*residue, *modulus)));
                flatten(child, nodes, routes, labels);
            }
        }
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut nodes = Vec::new();
    let mut routes = Vec::new();
    let mut tree: Option<(usize, u32)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "stage" => {
                if words.len() != 4 {
                    return Err(Error::parse(
                        line_no,
                        "expected `stage <name> theta=<rad> phi=<rad>`",
                    ));
                }
                let theta = keyed(words[2], "theta", line_no)?;
                let phi = keyed(words[3], "phi", line_no)?;
                let stage = SagnacStage::new(theta, phi)
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                nodes.push(NetworkNode {
                    name: words[1].to_string(),
                    stage,
                });
            }
            "tree" => {
                if words.len() != 2 {
                    return Err(Error::parse(line_no, "expected `tree <depth>`"));
                }
                if tree.is_some() {
                    return Err(Error::parse(line_no, "tree given twice"));
                }
                tree = Some((line_no, parse_num(words[1], line_no, "depth")?));
            }
            "route" => {
                if words.len() != 4 || words[2] != "->" {
                    return Err(Error::parse(
                        line_no,
                        "expected `route <parent>.<A|B> -> <child>`",
                    ));
                }
                let (parent, port) = words[1]
                    .rsplit_once('.')
                    .ok_or_else(|| Error::parse(line_no, "route source must be <stage>.<A|B>"))?;
                let port = match port {
                    "A" => Port::A,
                    "B" => Port::B,
                    other => return Err(Error::parse(line_no, format!("unknown port {other}"))),
                };
                routes.push(((parent.to_string(), port), words[3].to_string()));
            }
            other => return Err(Error::parse(line_no, format!("unknown directive {other}"))),
        }
    }
    if let Some((line_no, depth)) = tree {
        if !nodes.is_empty() || !routes.is_empty() {
            return Err(Error::parse(
                line_no,
                "tree cannot be combined with stage or route lines",
            ));
        }
        let t = cascade_build(depth).map_err(|e| Error::parse(line_no, e.to_string()))?;
        return Network::from_cascade(&t);
    }
    Network::new(nodes, routes)
}

fn keyed(word: &str, key: &str, line_no: usize) -> Result<f64> {
    let value = word
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::parse(line_no, format!("expected {key}=<value>, got {word}")))?;
    parse_num(value, line_no, key)
}

/// Power fraction at every leaf of the network, in [`Network::leaf_labels`] order.
pub fn route_network(net: &Network, input: &CascadeInput) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    match input {
        CascadeInput::Lg(idx) => route_lg(net, net.root, *idx, 1.0, &mut out),
        CascadeInput::Expansion(e) => {
            let total = e.norm_sqr();
            if !(total > 0.0) {
                return Err(Error::ZeroInput);
            }
            route_expansion(net, net.root, e, total, &mut out)?;
        }
    }
    Ok(out)
}

fn route_lg(net: &Network, s: usize, idx: LGIndex, power: f64, out: &mut Vec<(String, f64)>) {
    let st = net.nodes[s].stage;
    let z = Complex64::from_polar(1.0, st.phi()) * oam_phase(idx, -2.0 * st.omega());
    let one = Complex64::new(1.0, 0.0);
    let split = [
        (Port::A, (one + z).norm_sqr() / 4.0),
        (Port::B, (one - z).norm_sqr() / 4.0),
    ];
    for (port, p) in split {
        match net.routes.get(&(s, port)) {
            Some(&c) => route_lg(net, c, idx, power * p, out),
            None => out.push((net.leaf_labels[&(s, port)].clone(), power * p)),
        }
    }
}

fn route_expansion(
    net: &Network,
    s: usize,
    e: &ModeExpansion,
    total: f64,
    out: &mut Vec<(String, f64)>,
) -> Result<()> {
    let pair = sagnac_transfer_in(e, &net.nodes[s].stage, PortFrame::Exit)?;
    for (port, branch) in [(Port::A, &pair.port_a), (Port::B, &pair.port_b)] {
        match net.routes.get(&(s, port)) {
            Some(&c) => route_expansion(net, c, branch, total, out)?,
            None => out.push((
                net.leaf_labels[&(s, port)].clone(),
                branch.norm_sqr() / total,
            )),
        }
    }
    Ok(())
}
