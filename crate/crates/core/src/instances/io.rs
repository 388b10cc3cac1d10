//! Line-oriented text formats for instances and hierarchies.
//!
//! ```text
//! khier-instance v1
//! kind tree|graph|table
//! root <vertex>
//! edge <u> <v> <cost>
//! member <vertex> <weight>
//! mcast <cost> <member>...
//! ```
//!
//! ```text
//! khier-hierarchy v1
//! node #<id> <child>...
//! leaf <member>
//! ```
//!
//! In instance files `#` starts a comment anywhere. In hierarchy files `#id`
//! tokens name nodes, so a comment is a line whose first token starts with
//! `#` or anything after a lone `#` token. Children that are nodes must be
//! defined on a later line; the first node line is the root. `leaf` is only
//! for hierarchies made of one member.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::model::{validate_hierarchy, Hierarchy, Instance, MemberId, Node, NodeId, Severity, VertexId, Weights};
use crate::multicast::{CostTable, Edge, Network, RoutingNetwork};

pub const INSTANCE_HEADER: &str = "khier-instance v1";
pub const HIERARCHY_HEADER: &str = "khier-hierarchy v1";

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

#[derive(Debug)]
struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn err(&self, token: usize, message: impl Into<String>) -> ParseError {
        let column = self.tokens.get(token).map_or(1, |t| t.column);
        ParseError::new(self.number, column, message)
    }

    fn expect_len(&self, n: usize, usage: &str) -> Result<(), ParseError> {
        if self.tokens.len() != n {
            let at = self.tokens.len().min(n);
            return Err(self.err(at, format!("expected `{usage}`")));
        }
        Ok(())
    }

    fn number_at(&self, i: usize, what: &str) -> Result<u64, ParseError> {
        self.tokens[i]
            .text
            .parse::<u64>()
            .map_err(|_| self.err(i, format!("{what} must be a non-negative integer, got `{}`", self.tokens[i].text)))
    }

    fn vertex_at(&self, i: usize) -> Result<VertexId, ParseError> {
        VertexId::new(self.tokens[i].text).map_err(|e| self.err(i, e.to_string()))
    }

    fn member_at(&self, i: usize) -> Result<MemberId, ParseError> {
        MemberId::new(self.tokens[i].text).map_err(|e| self.err(i, e.to_string()))
    }
}

fn tokenize(text: &str, hash_comments: bool) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let mut tokens = Vec::new();
        let mut start = None;
        let mut column = 0;
        let chars = raw.char_indices();
        let mut col_of_start = 0;
        for (pos, ch) in chars {
            column += 1;
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        text: &raw[s..pos],
                        column: col_of_start,
                    });
                }
                continue;
            }
            if start.is_none() {
                if hash_comments && ch == '#' {
                    break;
                }
                start = Some(pos);
                col_of_start = column;
            }
        }
        if let Some(s) = start {
            tokens.push(Token {
                text: &raw[s..],
                column: col_of_start,
            });
        }
        if !hash_comments {
            if let Some(cut) = tokens.iter().position(|t| t.text == "#") {
                tokens.truncate(cut);
            }
            if tokens.first().is_some_and(|t| t.text.starts_with('#')) {
                tokens.clear();
            }
        }
        if !tokens.is_empty() {
            lines.push(Line { number: i + 1, tokens });
        }
    }
    lines
}

fn expect_header(lines: &[Line<'_>], header: &str) -> Result<(), ParseError> {
    let Some(first) = lines.first() else {
        return Err(ParseError::new(1, 1, format!("empty file, expected `{header}`")));
    };
    let text: Vec<&str> = first.tokens.iter().map(|t| t.text).collect();
    if text.join(" ") != header {
        return Err(first.err(0, format!("expected header `{header}`")));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Tree,
    Graph,
    Table,
}

/// Parses an instance file and validates the instance.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let lines = tokenize(text, true);
    expect_header(&lines, INSTANCE_HEADER)?;
    let mut kind: Option<(Kind, usize)> = None;
    let mut root: Option<VertexId> = None;
    let mut edges = Vec::new();
    let mut edge_keys = BTreeSet::new();
    let mut members: BTreeMap<MemberId, (u64, usize)> = BTreeMap::new();
    let mut mcast: Vec<(Vec<MemberId>, u64, usize)> = Vec::new();
    let mut seen_subsets = BTreeSet::new();

    for line in &lines[1..] {
        let keyword = line.tokens[0].text;
        match keyword {
            "kind" => {
                line.expect_len(2, "kind tree|graph|table")?;
                if kind.is_some() {
                    return Err(line.err(0, "kind given twice").into());
                }
                let k = match line.tokens[1].text {
                    "tree" => Kind::Tree,
                    "graph" => Kind::Graph,
                    "table" => Kind::Table,
                    other => return Err(line.err(1, format!("unknown kind `{other}`")).into()),
                };
                kind = Some((k, line.number));
            }
            "root" => {
                line.expect_len(2, "root <vertex>")?;
                if root.is_some() {
                    return Err(line.err(0, "root given twice").into());
                }
                root = Some(line.vertex_at(1)?);
            }
            "edge" => {
                line.expect_len(4, "edge <u> <v> <cost>")?;
                match kind {
                    None => return Err(line.err(0, "edge before kind").into()),
                    Some((Kind::Table, _)) => return Err(line.err(0, "edge in a table instance").into()),
                    _ => {}
                }
                let (u, v) = (line.vertex_at(1)?, line.vertex_at(2)?);
                let cost = line.number_at(3, "edge cost")?;
                if u == v {
                    return Err(line.err(2, format!("self-loop at {u}")).into());
                }
                let key = if u < v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
                if !edge_keys.insert(key) {
                    return Err(line.err(1, format!("duplicate edge {u} {v}")).into());
                }
                edges.push(Edge::new(u, v, cost));
            }
            "member" => {
                line.expect_len(3, "member <vertex> <weight>")?;
                let m = line.member_at(1)?;
                let w = line.number_at(2, "weight")?;
                if w == 0 {
                    return Err(line.err(2, "weight must be at least 1").into());
                }
                if members.insert(m.clone(), (w, line.number)).is_some() {
                    return Err(line.err(1, format!("member {m} declared twice")).into());
                }
            }
            "mcast" => {
                if line.tokens.len() < 3 {
                    return Err(line.err(line.tokens.len(), "expected `mcast <cost> <member>...`").into());
                }
                match kind {
                    None => return Err(line.err(0, "mcast before kind").into()),
                    Some((Kind::Table, _)) => {}
                    _ => return Err(line.err(0, "mcast outside a table instance").into()),
                }
                let cost = line.number_at(1, "multicast cost")?;
                let mut set = (2..line.tokens.len()).map(|i| line.member_at(i)).collect::<Result<Vec<_>, _>>()?;
                set.sort();
                if set.windows(2).any(|p| p[0] == p[1]) {
                    return Err(line.err(2, "member repeated in subset").into());
                }
                if !seen_subsets.insert(set.clone()) {
                    return Err(line.err(2, "subset listed twice").into());
                }
                mcast.push((set, cost, line.number));
            }
            other => return Err(line.err(0, format!("unknown directive `{other}`")).into()),
        }
    }

    let end = lines.last().map_or(1, |l| l.number);
    let (kind, kind_line) = kind.ok_or_else(|| ParseError::new(end, 1, "missing `kind` line"))?;
    let root = root.ok_or_else(|| ParseError::new(end, 1, "missing `root` line"))?;
    if members.is_empty() {
        return Err(ParseError::new(end, 1, "no members").into());
    }
    let at_kind = |e: Error| -> Error { ParseError::new(kind_line, 1, e.to_string()).into() };

    let network = match kind {
        Kind::Tree | Kind::Graph => {
            let vertices: Vec<VertexId> = std::iter::once(root.clone()).chain(members.keys().map(MemberId::vertex)).collect();
            let net = Network::new(vertices, edges).map_err(at_kind)?;
            if kind == Kind::Tree {
                RoutingNetwork::Tree(net)
            } else {
                RoutingNetwork::Graph(net)
            }
        }
        Kind::Table => {
            for (set, _, number) in &mcast {
                if let Some(m) = set.iter().find(|m| !members.contains_key(*m)) {
                    return Err(ParseError::new(*number, 1, format!("mcast names undeclared member {m}")).into());
                }
            }
            RoutingNetwork::Table(CostTable::new(mcast.into_iter().map(|(s, c, _)| (s, c))).map_err(at_kind)?)
        }
    };
    let weights = Weights::new(members.into_iter().map(|(m, (w, _))| (m, w)));
    Instance::new(weights, network, root).map_err(at_kind)
}

/// Canonical text of an instance: edges in stored order, members and
/// table subsets sorted.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{INSTANCE_HEADER}");
    let _ = writeln!(out, "kind {}", instance.network().kind());
    let _ = writeln!(out, "root {}", instance.controller());
    match instance.network() {
        RoutingNetwork::Tree(net) | RoutingNetwork::Graph(net) => {
            for e in net.edges() {
                let _ = writeln!(out, "edge {} {} {}", e.u, e.v, e.cost);
            }
        }
        RoutingNetwork::Table(_) => {}
    }
    for (m, w) in instance.weights().iter() {
        let _ = writeln!(out, "member {m} {w}");
    }
    if let RoutingNetwork::Table(table) = instance.network() {
        for (set, cost) in table.entries() {
            let _ = write!(out, "mcast {cost}");
            for m in set {
                let _ = write!(out, " {m}");
            }
            out.push('\n');
        }
    }
    out
}

/// Parses a hierarchy file. Structure only; see [`parse_hierarchy_for`] to
/// also check members against an instance.
pub fn parse_hierarchy(text: &str) -> Result<Hierarchy> {
    Ok(parse_hierarchy_inner(text, None)?.0)
}

/// Parses a hierarchy file and validates it against `instance`.
pub fn parse_hierarchy_for(text: &str, instance: &Instance) -> Result<Hierarchy> {
    let members = instance.members();
    let (h, _) = parse_hierarchy_inner(text, Some(&members))?;
    if let Some(v) = validate_hierarchy(&h, instance).into_iter().find(|v| v.severity == Severity::Error) {
        return Err(Error::InvalidInstance(v.message));
    }
    Ok(h)
}

fn parse_hierarchy_inner(text: &str, known: Option<&[MemberId]>) -> Result<(Hierarchy, usize)> {
    let lines = tokenize(text, false);
    expect_header(&lines, HIERARCHY_HEADER)?;
    let body = &lines[1..];
    let Some(first) = body.first() else {
        let end = lines[0].number;
        return Err(ParseError::new(end, 1, "no node lines").into());
    };

    if first.tokens[0].text == "leaf" {
        first.expect_len(2, "leaf <member>")?;
        if let Some(extra) = body.get(1) {
            return Err(extra.err(0, "a `leaf` hierarchy has exactly one line").into());
        }
        let m = first.member_at(1)?;
        check_known(first, 1, &m, known)?;
        return Ok((Hierarchy::leaf(m), 1));
    }

    // Pass 1: node ids and their defining line.
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, line) in body.iter().enumerate() {
        match line.tokens[0].text {
            "node" => {}
            "leaf" => return Err(line.err(0, "`leaf` only allowed as the sole line").into()),
            other => return Err(line.err(0, format!("unknown directive `{other}`")).into()),
        }
        if line.tokens.len() < 3 {
            return Err(line.err(line.tokens.len(), "expected `node #<id> <child>...`").into());
        }
        let id = line.tokens[1].text;
        if !id.starts_with('#') || id.len() == 1 {
            return Err(line.err(1, format!("node id must look like `#<id>`, got `{id}`")).into());
        }
        if index.insert(id, i).is_some() {
            return Err(line.err(1, format!("node {id} defined twice")).into());
        }
    }

    // Internal nodes occupy arena slots 0..k in line order; leaves follow.
    let mut nodes: Vec<Node> = vec![Node::Internal(Vec::new()); body.len()];
    let mut referenced = vec![false; body.len()];
    let mut seen_members = BTreeSet::new();
    for (i, line) in body.iter().enumerate() {
        let mut children = Vec::with_capacity(line.tokens.len() - 2);
        for t in 2..line.tokens.len() {
            let text = line.tokens[t].text;
            if text.starts_with('#') {
                let Some(&j) = index.get(text) else {
                    return Err(line.err(t, format!("undeclared node {text}")).into());
                };
                if j <= i {
                    return Err(line.err(t, format!("node {text} must be defined on a later line")).into());
                }
                if std::mem::replace(&mut referenced[j], true) {
                    return Err(line.err(t, format!("node {text} has two parents")).into());
                }
                children.push(NodeId(j));
            } else {
                let m = line.member_at(t)?;
                check_known(line, t, &m, known)?;
                if !seen_members.insert(m.clone()) {
                    return Err(line.err(t, format!("member {m} appears twice")).into());
                }
                nodes.push(Node::Leaf(m));
                children.push(NodeId(nodes.len() - 1));
            }
        }
        nodes[i] = Node::Internal(children);
    }
    if let Some(j) = (1..body.len()).find(|&j| !referenced[j]) {
        return Err(body[j].err(1, format!("node {} is not reachable from the root", body[j].tokens[1].text)).into());
    }
    Ok((Hierarchy::from_nodes(nodes, NodeId(0)), body.len()))
}

fn check_known(line: &Line<'_>, t: usize, m: &MemberId, known: Option<&[MemberId]>) -> Result<(), ParseError> {
    match known {
        Some(ms) if ms.binary_search(m).is_err() => Err(line.err(t, format!("unknown member {m}"))),
        _ => Ok(()),
    }
}

/// Canonical text of a hierarchy: internal nodes numbered in preorder,
/// child order kept.
pub fn write_hierarchy(h: &Hierarchy) -> Result<String> {
    let order = h.preorder()?;
    let mut out = String::new();
    let _ = writeln!(out, "{HIERARCHY_HEADER}");
    if let Node::Leaf(m) = h.node(h.root()) {
        let _ = writeln!(out, "leaf {m}");
        return Ok(out);
    }
    let mut number = HashMap::new();
    for &u in &order {
        if !h.is_leaf(u) {
            let next = number.len();
            number.insert(u, next);
        }
    }
    for &u in &order {
        if let Node::Internal(children) = h.node(u) {
            let _ = write!(out, "node #{}", number[&u]);
            for c in children {
                match h.node(*c) {
                    Node::Leaf(m) => {
                        let _ = write!(out, " {m}");
                    }
                    Node::Internal(_) => {
                        let _ = write!(out, " #{}", number[c]);
                    }
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mid, vid};

    const MINIMAL: &str = "khier-instance v1\nkind tree\nroot r\nedge r a 3\nmember a 2\n";

    fn parse_err(r: Result<impl std::fmt::Debug>) -> ParseError {
        match r {
            Err(Error::Parse(p)) => p,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_instance() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.controller(), &vid("r"));
        assert_eq!(inst.weights().get(&mid("a")), Some(2));
        assert_eq!(write_instance(&inst), MINIMAL);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# leading\nkhier-instance v1  # header\n\nkind graph\nroot r\nedge r a 1 # cheap\nmember a 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.network().kind(), "graph");
    }

    #[test]
    fn duplicate_edge_names_line() {
        let text = "khier-instance v1\nkind graph\nroot r\nedge r a 1\nedge a r 2\nmember a 1\n";
        let e = parse_err(parse_instance(text));
        assert_eq!((e.line, e.column), (5, 6));
        assert!(e.message.contains("duplicate edge"));
    }

    #[test]
    fn instance_errors() {
        let bad_kind = "khier-instance v1\nkind forest\n";
        assert_eq!(parse_err(parse_instance(bad_kind)).line, 2);
        let disconnected = "khier-instance v1\nkind graph\nroot r\nedge r a 1\nedge b c 1\nmember a 1\nmember c 1\n";
        let e = parse_err(parse_instance(disconnected));
        assert!(e.message.contains("disconnected"), "{e}");
        assert_eq!(e.line, 2);
        let zero = "khier-instance v1\nkind tree\nroot r\nedge r a 1\nmember a 0\n";
        assert_eq!(parse_err(parse_instance(zero)).column, 10);
        let header = "khier-instance v2\n";
        assert_eq!(parse_err(parse_instance(header)).line, 1);
        let cycle = "khier-instance v1\nkind tree\nroot r\nedge r a 1\nedge a b 1\nedge b r 1\nmember a 1\n";
        assert!(parse_instance(cycle).is_err());
        let undeclared = "khier-instance v1\nkind table\nroot r\nmember a 1\nmcast 3 a b\n";
        assert_eq!(parse_err(parse_instance(undeclared)).line, 5);
    }

    #[test]
    fn table_round_trip() {
        let text = "khier-instance v1\nkind table\nroot r\nmember a 1\nmember b 2\nmcast 2 a\nmcast 3 b a\n";
        let inst = parse_instance(text).unwrap();
        let written = write_instance(&inst);
        assert!(written.contains("mcast 3 a b"));
        assert_eq!(parse_instance(&written).unwrap(), inst);
    }

    #[test]
    fn hierarchy_basic() {
        let h = parse_hierarchy("khier-hierarchy v1\nnode #0 a b\n").unwrap();
        let expected = Hierarchy::combine(vec![Hierarchy::leaf(mid("a")), Hierarchy::leaf(mid("b"))]).unwrap();
        assert_eq!(h, expected);
        assert_eq!(write_hierarchy(&h).unwrap(), "khier-hierarchy v1\nnode #0 a b\n");
    }

    #[test]
    fn hierarchy_nested_and_comments() {
        let text = "khier-hierarchy v1\n# a comment line\nnode #k2 #k4 c # trailing\nnode #k4 a b\n";
        let h = parse_hierarchy(text).unwrap();
        assert_eq!(h.leaf_count().unwrap(), 3);
        assert_eq!(write_hierarchy(&h).unwrap(), "khier-hierarchy v1\nnode #0 #1 c\nnode #1 a b\n");
        let single = parse_hierarchy("khier-hierarchy v1\nleaf a\n").unwrap();
        assert_eq!(single, Hierarchy::leaf(mid("a")));
        assert_eq!(write_hierarchy(&single).unwrap(), "khier-hierarchy v1\nleaf a\n");
    }

    #[test]
    fn hierarchy_errors() {
        let undeclared = parse_err(parse_hierarchy("khier-hierarchy v1\nnode #0 a #9\n"));
        assert_eq!((undeclared.line, undeclared.column), (2, 11));
        assert!(undeclared.message.contains("#9"));
        let backwards = "khier-hierarchy v1\nnode #0 #1\nnode #1 a #0\n";
        assert!(parse_err(parse_hierarchy(backwards)).message.contains("later line"));
        let orphan = "khier-hierarchy v1\nnode #0 a\nnode #1 b\n";
        assert_eq!(parse_err(parse_hierarchy(orphan)).line, 3);
        let twice = "khier-hierarchy v1\nnode #0 a a\n";
        assert!(parse_hierarchy(twice).is_err());
        let empty_node = "khier-hierarchy v1\nnode #0\n";
        assert!(parse_hierarchy(empty_node).is_err());
    }

    #[test]
    fn hierarchy_against_instance() {
        let inst = parse_instance("khier-instance v1\nkind graph\nroot r\nedge r a 1\nedge r b 1\nmember a 1\nmember b 1\n").unwrap();
        assert!(parse_hierarchy_for("khier-hierarchy v1\nnode #0 a b\n", &inst).is_ok());
        let unknown = parse_err(parse_hierarchy_for("khier-hierarchy v1\nnode #0 a z\n", &inst));
        assert!(unknown.message.contains("unknown member z"));
        let missing = parse_hierarchy_for("khier-hierarchy v1\nnode #0 a\n", &inst);
        assert!(matches!(missing, Err(Error::InvalidInstance(_))));
    }
}
