use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use super::NetsimError;

pub const DEFAULT_ATTENUATION: f64 = 0.21;

const ALLPASS4: &str = include_str!("../../data/topologies/allpass4.toml");
const METRO_RELAY: &str = include_str!("../../data/topologies/metro-relay.toml");
const METRO_ALLPASS: &str = include_str!("../../data/topologies/metro-allpass.toml");
const RELAY_STAR: &str = include_str!("../../data/topologies/relay-star.toml");

pub fn builtin(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".toml") {
        "allpass4" => Some(ALLPASS4),
        "metro-relay" => Some(METRO_RELAY),
        "metro-allpass" => Some(METRO_ALLPASS),
        "relay-star" => Some(RELAY_STAR),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    User,
    OpticalSwitch,
    TrustedRelay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QkdRole {
    Transmitter,
    Receiver,
    #[default]
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub role: QkdRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub a: String,
    pub b: String,
    pub length_km: f64,
    #[serde(default = "default_attenuation")]
    pub attenuation_db_per_km: f64,
}

fn default_attenuation() -> f64 {
    DEFAULT_ATTENUATION
}

impl Segment {
    pub fn loss_db(&self) -> f64 {
        self.length_km * self.attenuation_db_per_km
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    name: String,
    #[serde(rename = "node")]
    nodes: Vec<Node>,
    #[serde(rename = "segment", default)]
    segments: Vec<Segment>,
}

/// Users, optical switches and trusted relays joined by fiber segments.
#[derive(Debug, Clone)]
pub struct Topology {
    pub name: String,
    nodes: Vec<Node>,
    segments: Vec<Segment>,
    index: BTreeMap<String, NodeIndex>,
    graph: UnGraph<usize, usize>,
}

/// A point-to-point QKD link between two trusted endpoints, possibly passing
/// through optical switches.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub a: String,
    pub b: String,
    pub length_km: f64,
    pub loss_db: f64,
    pub switches: Vec<String>,
}

impl Hop {
    pub fn label(&self) -> String {
        format!("{}-{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Every node along the path, endpoints included.
    pub path: Vec<String>,
    pub hops: Vec<Hop>,
    pub length_km: f64,
    pub loss_db: f64,
}

impl Route {
    pub fn relays(&self) -> Vec<String> {
        self.hops.iter().skip(1).map(|h| h.a.clone()).collect()
    }

    pub fn switches(&self) -> BTreeSet<String> {
        self.hops.iter().flat_map(|h| h.switches.iter().cloned()).collect()
    }
}

impl Topology {
    pub fn parse(text: &str) -> Result<Self, NetsimError> {
        let f: TopologyFile = toml::from_str(text).map_err(|e| NetsimError::Config(e.to_string()))?;
        Self::new(f.name, f.nodes, f.segments)
    }

    pub fn load(name_or_path: &str) -> Result<Self, NetsimError> {
        if let Some(t) = builtin(name_or_path) {
            return Self::parse(t);
        }
        let text = std::fs::read_to_string(Path::new(name_or_path))
            .map_err(|e| NetsimError::Config(format!("{name_or_path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn new(name: impl Into<String>, nodes: Vec<Node>, segments: Vec<Segment>) -> Result<Self, NetsimError> {
        let mut graph = UnGraph::new_undirected();
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), graph.add_node(i)).is_some() {
                return Err(NetsimError::Config(format!("duplicate node {}", n.id)));
            }
        }
        for (i, s) in segments.iter().enumerate() {
            let (Some(&a), Some(&b)) = (index.get(&s.a), index.get(&s.b)) else {
                return Err(NetsimError::Config(format!("segment {}-{} references an unknown node", s.a, s.b)));
            };
            if a == b || !(0.0..).contains(&s.length_km) || !(0.0..).contains(&s.attenuation_db_per_km) {
                return Err(NetsimError::Config(format!("bad segment {}-{}", s.a, s.b)));
            }
            graph.add_edge(a, b, i);
        }
        Ok(Topology { name: name.into(), nodes, segments, index, graph })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[self.graph[i]])
    }

    pub fn users(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::User)
    }

    /// No trusted relays: every pair is joined through switches only.
    pub fn is_all_pass(&self) -> bool {
        self.nodes.iter().all(|n| n.kind != NodeKind::TrustedRelay)
    }

    /// Lowest-loss path from `a` to `b`. Users never carry transit traffic.
    /// Links are split into hops at trusted relays; switch legs add up.
    pub fn path_resolve(&self, a: &str, b: &str) -> Result<Route, NetsimError> {
        if a == b {
            return Err(NetsimError::SameEndpoint(a.to_owned()));
        }
        let lookup = |id: &str| self.index.get(id).copied().ok_or_else(|| NetsimError::UnknownNode(id.to_owned()));
        let (ia, ib) = (lookup(a)?, lookup(b)?);
        for i in [ia, ib] {
            if self.nodes[self.graph[i]].kind == NodeKind::OpticalSwitch {
                return Err(NetsimError::Config(format!("{} is a switch, not an endpoint", self.nodes[self.graph[i]].id)));
            }
        }
        // Edges into a user other than the target are made impassable.
        let blocked = f64::INFINITY;
        let (_, path) = astar(
            &self.graph,
            ia,
            |n| n == ib,
            |e| {
                use petgraph::visit::EdgeRef;
                let s = &self.segments[*e.weight()];
                let (x, y) = (e.source(), e.target());
                let into_user = |n: NodeIndex| n != ia && n != ib && self.nodes[self.graph[n]].kind == NodeKind::User;
                if into_user(x) || into_user(y) {
                    blocked
                } else {
                    s.loss_db()
                }
            },
            |_| 0.0,
        )
        .ok_or_else(|| NetsimError::NoRoute(a.to_owned(), b.to_owned()))?;
        let ids: Vec<String> = path.iter().map(|&i| self.nodes[self.graph[i]].id.clone()).collect();
        for w in path.windows(3) {
            if self.nodes[self.graph[w[1]]].kind == NodeKind::User {
                return Err(NetsimError::NoRoute(a.to_owned(), b.to_owned()));
            }
        }

        let mut hops = Vec::new();
        let mut cur = Hop { a: ids[0].clone(), b: String::new(), length_km: 0.0, loss_db: 0.0, switches: vec![] };
        for (k, w) in path.windows(2).enumerate() {
            let e = self.graph.find_edge(w[0], w[1]).expect("edge on path");
            let s = &self.segments[self.graph[e]];
            cur.length_km += s.length_km;
            cur.loss_db += s.loss_db();
            let next = &self.nodes[self.graph[w[1]]];
            match next.kind {
                NodeKind::OpticalSwitch => cur.switches.push(next.id.clone()),
                _ => {
                    cur.b = ids[k + 1].clone();
                    let start = cur.b.clone();
                    hops.push(std::mem::replace(
                        &mut cur,
                        Hop { a: start, b: String::new(), length_km: 0.0, loss_db: 0.0, switches: vec![] },
                    ));
                }
            }
        }
        Ok(Route {
            length_km: hops.iter().map(|h| h.length_km).sum(),
            loss_db: hops.iter().map(|h| h.loss_db).sum(),
            path: ids,
            hops,
        })
    }
}

/// Occupancy of optical switches over simulated time.
#[derive(Debug, Clone, Default)]
pub struct SwitchLedger {
    busy_until: BTreeMap<String, f64>,
}

impl SwitchLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Earliest time at or after `t` when all switches on `route` are free.
    pub fn earliest_start(&self, route: &Route, t: f64) -> f64 {
        route.switches().iter().filter_map(|s| self.busy_until.get(s)).fold(t, |acc, &u| acc.max(u))
    }

    /// Reserves every switch of `route` for `[start, start + duration)`.
    pub fn acquire(&mut self, route: &Route, start: f64, duration: f64) -> Result<(), NetsimError> {
        for s in route.switches() {
            if self.busy_until.get(&s).is_some_and(|&u| u > start) {
                return Err(NetsimError::SwitchBusy(s));
            }
        }
        for s in route.switches() {
            self.busy_until.insert(s, start + duration);
        }
        Ok(())
    }
}
