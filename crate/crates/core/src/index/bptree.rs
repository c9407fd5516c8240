use super::KeyRange;

#[derive(Debug, Clone, PartialEq)]
enum NodeKind {
    /// Entries `start..end` of the leaf chain.
    Leaf,
    Internal(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    kind: NodeKind,
    start: usize,
    end: usize,
    min: f64,
    max: f64,
}

/// Bulk-loaded B⁺-tree over one column.
///
/// Leaves hold contiguous runs of the globally sorted `(key, rid)` chain, so a
/// subtree always covers a contiguous slice of entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BPlusTreeIndex {
    pub column: String,
    pub order: usize,
    entries: Vec<(f64, usize)>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

/// Node visits of one probe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeStats {
    pub nodes_visited: usize,
    /// Subtrees taken without looking at their entries.
    pub wholesale: usize,
    /// Leaf entries compared against the range.
    pub entries_checked: usize,
}

/// Splits `len` items into `parts` near-equal consecutive chunks.
fn split_even(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts);
    let mut at = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push((at, at + size));
        at += size;
    }
    out
}

impl BPlusTreeIndex {
    /// Builds from `(key, rid)` pairs; ties are ordered by rid.
    pub fn build(column: &str, order: usize, mut entries: Vec<(f64, usize)>) -> Self {
        let order = order.max(3);
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut t = Self {
            column: column.to_string(),
            order,
            entries,
            nodes: Vec::new(),
            root: None,
        };
        if t.entries.is_empty() {
            return t;
        }
        let leaves = t.entries.len().div_ceil(order);
        let mut level: Vec<usize> = split_even(t.entries.len(), leaves)
            .into_iter()
            .map(|(s, e)| {
                t.push(Node {
                    kind: NodeKind::Leaf,
                    start: s,
                    end: e,
                    min: t.entries[s].0,
                    max: t.entries[e - 1].0,
                })
            })
            .collect();
        while level.len() > 1 {
            let parents = level.len().div_ceil(order);
            level = split_even(level.len(), parents)
                .into_iter()
                .map(|(s, e)| {
                    let children = level[s..e].to_vec();
                    let first = &t.nodes[children[0]];
                    let last = &t.nodes[*children.last().expect("non-empty")];
                    let node = Node {
                        kind: NodeKind::Internal(Vec::new()),
                        start: first.start,
                        end: last.end,
                        min: first.min,
                        max: last.max,
                    };
                    let id = t.push(node);
                    t.nodes[id].kind = NodeKind::Internal(children);
                    id
                })
                .collect();
        }
        t.root = level.first().copied();
        t
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Root-to-leaf path length (0 for an empty tree).
    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut cur = self.root;
        while let Some(id) = cur {
            h += 1;
            cur = match &self.nodes[id].kind {
                NodeKind::Leaf => None,
                NodeKind::Internal(c) => Some(c[0]),
            };
        }
        h
    }

    /// Checks ordering, fill and equal leaf depth.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.entries.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err("leaf chain out of order".into());
        }
        let Some(root) = self.root else { return Ok(()) };
        let mut leaf_depth = None;
        let mut stack = vec![(root, 1usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            let fanout = match &node.kind {
                NodeKind::Leaf => {
                    if *leaf_depth.get_or_insert(depth) != depth {
                        return Err("leaves at different depths".into());
                    }
                    node.end - node.start
                }
                NodeKind::Internal(children) => {
                    let mut at = node.start;
                    for &c in children {
                        let child = &self.nodes[c];
                        if child.start != at || child.min < node.min || child.max > node.max {
                            return Err(format!("child {c} not nested in node {id}"));
                        }
                        at = child.end;
                        stack.push((c, depth + 1));
                    }
                    if at != node.end {
                        return Err(format!("children of node {id} do not cover it"));
                    }
                    children.len()
                }
            };
            let min_fill = if id == root {
                1
            } else {
                self.order.div_ceil(2)
            };
            let min_fill = if id == root && matches!(node.kind, NodeKind::Internal(_)) {
                2
            } else {
                min_fill
            };
            if fanout < min_fill.min(self.entries.len()) || fanout > self.order {
                return Err(format!(
                    "node {id} holds {fanout} items with order {}",
                    self.order
                ));
            }
        }
        Ok(())
    }

    /// Exact rid set for `range`, in key order. Subtrees inside the range are
    /// taken wholesale; partially overlapping leaves are filtered entry-wise.
    pub fn probe(&self, range: &KeyRange) -> (Vec<usize>, ProbeStats) {
        let mut out = Vec::new();
        let mut stats = ProbeStats::default();
        if let Some(root) = self.root {
            self.visit(root, range, &mut out, &mut stats);
        }
        (out, stats)
    }

    fn visit(&self, id: usize, range: &KeyRange, out: &mut Vec<usize>, stats: &mut ProbeStats) {
        let node = &self.nodes[id];
        stats.nodes_visited += 1;
        if !range.overlaps(node.min, node.max) {
            return;
        }
        if range.contains(node.min) && range.contains(node.max) {
            stats.wholesale += 1;
            out.extend(self.entries[node.start..node.end].iter().map(|e| e.1));
            return;
        }
        match &node.kind {
            NodeKind::Leaf => {
                stats.entries_checked += node.end - node.start;
                out.extend(
                    self.entries[node.start..node.end]
                        .iter()
                        .filter(|e| range.contains(e.0))
                        .map(|e| e.1),
                );
            }
            NodeKind::Internal(children) => {
                for &c in children {
                    self.visit(c, range, out, stats);
                }
            }
        }
    }
}
