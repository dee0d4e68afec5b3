//! Weighted graphs, their loaders, and the bridge to min-plus matrices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tropical::{kleene_star, TropicalMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// A weighted graph whose nodes carry external labels.
///
/// Edges are deduplicated on insertion: a repeated pair keeps the smaller
/// weight. Undirected graphs store each edge once.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_slot: HashMap<(usize, usize), usize>,
    directed: bool,
}

impl Graph {
    pub fn new(directed: bool) -> Self {
        Graph {
            labels: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            edge_slot: HashMap::new(),
            directed,
        }
    }

    /// Returns the dense index of `label`, registering it if unseen.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    pub fn add_edge(&mut self, source: usize, target: usize, weight: f64) -> Result<()> {
        let n = self.labels.len();
        if source >= n || target >= n {
            return Err(Error::Domain(format!(
                "edge ({source}, {target}) references a node outside 0..{n}"
            )));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::Domain(format!(
                "edge weight {weight} must be finite and non-negative"
            )));
        }
        let key = if self.directed {
            (source, target)
        } else {
            (source.min(target), source.max(target))
        };
        match self.edge_slot.get(&key) {
            Some(&slot) => {
                let e = &mut self.edges[slot];
                e.weight = e.weight.min(weight);
            }
            None => {
                self.edge_slot.insert(key, self.edges.len());
                self.edges.push(Edge {
                    source,
                    target,
                    weight,
                });
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// 0/1 adjacency matrix (self-loops ignored), as used by the classical
    /// baselines.
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.node_count();
        let mut a = vec![vec![0.0; n]; n];
        for e in &self.edges {
            if e.source == e.target {
                continue;
            }
            a[e.source][e.target] = 1.0;
            if !self.directed {
                a[e.target][e.source] = 1.0;
            }
        }
        a
    }

    /// Render in the edge-list format accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        // Reloading registers labels in first-appearance order. When the
        // edges alone would not reproduce our order (or miss isolated nodes),
        // declare every node up front with a zero-weight self-loop.
        let mut seen = vec![false; self.labels.len()];
        let mut order = Vec::with_capacity(self.labels.len());
        for e in &self.edges {
            for v in [e.source, e.target] {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
        }
        if order.len() != self.labels.len() || order.iter().enumerate().any(|(k, &v)| k != v) {
            for label in &self.labels {
                out.push_str(&format!("{label} {label} 0\n"));
            }
        }
        for e in &self.edges {
            out.push_str(&format!(
                "{} {} {}\n",
                self.labels[e.source], self.labels[e.target], e.weight
            ));
        }
        out
    }
}

/// Parse a whitespace-separated edge list `u v [w]`; `#` starts a comment
/// and a missing weight defaults to 1.
pub fn load_edge_list(text: &str, directed: bool) -> Result<Graph> {
    let mut g = Graph::new(directed);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let weight = match fields.len() {
            2 => 1.0,
            3 => fields[2].parse::<f64>().map_err(|_| {
                Error::parse(lineno + 1, format!("cannot parse weight {:?}", fields[2]))
            })?,
            k => {
                return Err(Error::parse(
                    lineno + 1,
                    format!("expected `u v [w]`, found {k} fields"),
                ))
            }
        };
        if weight.is_nan() || !weight.is_finite() {
            return Err(Error::parse(lineno + 1, "weight must be a finite number"));
        }
        if weight < 0.0 {
            return Err(Error::Domain(format!(
                "negative weight {weight} on line {}",
                lineno + 1
            )));
        }
        let u = g.add_node(fields[0]);
        let v = g.add_node(fields[1]);
        g.add_edge(u, v, weight)?;
    }
    Ok(g)
}

#[derive(Debug)]
enum GmlValue {
    Atom(String),
    List(Vec<(String, GmlValue)>, usize),
}

struct GmlTokens<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    line: usize,
}

impl<'a> GmlTokens<'a> {
    fn new(text: &'a str) -> Self {
        GmlTokens {
            chars: text.char_indices().peekable(),
            text,
            line: 1,
        }
    }

    /// Next token with the line it started on.
    fn next_token(&mut self) -> Result<Option<(String, usize)>> {
        loop {
            match self.chars.peek().copied() {
                None => return Ok(None),
                Some((_, '\n')) => {
                    self.line += 1;
                    self.chars.next();
                }
                Some((_, c)) if c.is_whitespace() => {
                    self.chars.next();
                }
                Some((_, '#')) => {
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                Some((_, '[')) | Some((_, ']')) => {
                    let (_, c) = self.chars.next().unwrap();
                    return Ok(Some((c.to_string(), self.line)));
                }
                Some((_, '"')) => {
                    let start_line = self.line;
                    self.chars.next();
                    let mut s = String::new();
                    loop {
                        match self.chars.next() {
                            None => return Err(Error::parse(start_line, "unterminated string")),
                            Some((_, '"')) => break,
                            Some((_, c)) => {
                                if c == '\n' {
                                    self.line += 1;
                                }
                                s.push(c);
                            }
                        }
                    }
                    return Ok(Some((s, start_line)));
                }
                Some((start, _)) => {
                    let mut end = self.text.len();
                    while let Some(&(i, c)) = self.chars.peek() {
                        if c.is_whitespace() || c == '[' || c == ']' || c == '"' {
                            end = i;
                            break;
                        }
                        self.chars.next();
                    }
                    return Ok(Some((self.text[start..end].to_string(), self.line)));
                }
            }
        }
    }
}

fn parse_gml_list(tokens: &mut GmlTokens<'_>, open_line: Option<usize>) -> Result<Vec<(String, GmlValue)>> {
    let mut items = Vec::new();
    loop {
        let Some((key, line)) = tokens.next_token()? else {
            return match open_line {
                Some(l) => Err(Error::parse(l, "unbalanced `[`: list is never closed")),
                None => Ok(items),
            };
        };
        if key == "]" {
            return match open_line {
                Some(_) => Ok(items),
                None => Err(Error::parse(line, "unbalanced `]`")),
            };
        }
        if key == "[" {
            return Err(Error::parse(line, "`[` without a preceding key"));
        }
        let Some((value, vline)) = tokens.next_token()? else {
            return Err(Error::parse(line, format!("key `{key}` has no value")));
        };
        let value = match value.as_str() {
            "[" => GmlValue::List(parse_gml_list(tokens, Some(vline))?, vline),
            "]" => return Err(Error::parse(vline, format!("key `{key}` has no value"))),
            _ => GmlValue::Atom(value),
        };
        items.push((key, value));
    }
}

fn gml_atom<'v>(items: &'v [(String, GmlValue)], key: &str) -> Option<&'v str> {
    items.iter().find_map(|(k, v)| match v {
        GmlValue::Atom(s) if k == key => Some(s.as_str()),
        _ => None,
    })
}

/// Parse the subset of GML made of `graph [ node [ id N ] edge [ source N
/// target N value W ] ]`. Other attributes are skipped.
pub fn load_gml_subset(text: &str) -> Result<Graph> {
    let mut tokens = GmlTokens::new(text);
    let top = parse_gml_list(&mut tokens, None)?;
    let (graph_items, graph_line) = top
        .iter()
        .find_map(|(k, v)| match v {
            GmlValue::List(items, line) if k == "graph" => Some((items, *line)),
            _ => None,
        })
        .ok_or_else(|| Error::parse(1, "no `graph [ ... ]` block"))?;

    let directed = match gml_atom(graph_items, "directed") {
        Some(s) => s.trim() == "1",
        None => false,
    };
    let mut g = Graph::new(directed);

    for (key, value) in graph_items {
        if key != "node" {
            continue;
        }
        let GmlValue::List(items, line) = value else {
            return Err(Error::parse(graph_line, "`node` must be a list"));
        };
        let id = gml_atom(items, "id").ok_or_else(|| Error::parse(*line, "node without id"))?;
        if g.index_of(id).is_some() {
            return Err(Error::parse(*line, format!("duplicate node id {id}")));
        }
        g.add_node(id);
    }
    for (key, value) in graph_items {
        if key != "edge" {
            continue;
        }
        let GmlValue::List(items, line) = value else {
            return Err(Error::parse(graph_line, "`edge` must be a list"));
        };
        let endpoint = |name: &str| -> Result<usize> {
            let id = gml_atom(items, name)
                .ok_or_else(|| Error::parse(*line, format!("edge without {name}")))?;
            g.index_of(id)
                .ok_or_else(|| Error::parse(*line, format!("edge {name} references unknown id {id}")))
        };
        let (s, t) = (endpoint("source")?, endpoint("target")?);
        let weight = match gml_atom(items, "value") {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::parse(*line, format!("cannot parse edge value {v:?}")))?,
            None => 1.0,
        };
        if weight < 0.0 {
            return Err(Error::Domain(format!(
                "negative edge value {weight} near line {line}"
            )));
        }
        g.add_edge(s, t, weight)?;
    }
    Ok(g)
}

/// The min-plus matrix whose precedence graph is `g`: zero diagonal, edge
/// weights where edges exist, `inf` elsewhere. Self-loops are dropped.
pub fn graph_to_tropical(g: &Graph) -> TropicalMatrix {
    let n = g.node_count();
    let mut a = TropicalMatrix::identity(n);
    for e in g.edges() {
        if e.source == e.target {
            continue;
        }
        let w = e.weight.min(a.get(e.source, e.target));
        a.set_raw(e.source, e.target, w);
        if !g.is_directed() {
            a.set_raw(e.target, e.source, w);
        }
    }
    a
}

/// All-pairs minimal path weights of `g`.
pub fn shortest_path_matrix(g: &Graph) -> Result<TropicalMatrix> {
    kleene_star(&graph_to_tropical(g))
}

/// Largest number of vertex sequences [`oracle_min_path_fixed_length`] will
/// enumerate (7 nodes, 5 edges).
pub const ORACLE_PATH_BUDGET: u128 = 7u128.pow(4);

/// Minimal weight over every walk of exactly `len` edges from `i` to `j` in
/// the precedence graph of `a`, by exhaustive enumeration.
pub fn oracle_min_path_fixed_length(
    a: &TropicalMatrix,
    i: usize,
    j: usize,
    len: usize,
) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape("the path oracle needs a square matrix".into()));
    }
    let n = a.rows();
    if i >= n || j >= n {
        return Err(Error::Shape(format!("endpoint out of range for {n} nodes")));
    }
    if len == 0 {
        return Ok(if i == j { 0.0 } else { f64::INFINITY });
    }
    let paths = (n as u128).pow(len as u32 - 1);
    if len > 5 || paths > ORACLE_PATH_BUDGET {
        return Err(Error::OracleBudget {
            paths,
            budget: ORACLE_PATH_BUDGET,
        });
    }
    let mut inner = vec![0usize; len - 1];
    let mut best = f64::INFINITY;
    loop {
        let mut prev = i;
        let mut weight = 0.0;
        for &v in inner.iter().chain(std::iter::once(&j)) {
            weight += a.get(prev, v);
            prev = v;
        }
        best = best.min(weight);
        // odometer increment over the intermediate vertices
        let mut pos = 0;
        loop {
            if pos == inner.len() {
                return Ok(best);
            }
            inner[pos] += 1;
            if inner[pos] < n {
                break;
            }
            inner[pos] = 0;
            pos += 1;
        }
    }
}
