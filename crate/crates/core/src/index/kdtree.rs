use super::KeyRange;

#[derive(Debug, Clone, PartialEq)]
enum KdNode {
    Leaf {
        rids: Vec<usize>,
    },
    Split {
        dim: usize,
        left: usize,
        right: usize,
    },
}

/// Median-split KD-tree over `dims.len()` columns, splitting on dimension
/// `depth mod d` at each level.
#[derive(Debug, Clone, PartialEq)]
pub struct KdTreeIndex {
    pub dims: Vec<String>,
    pub leaf_size: usize,
    points: Vec<Vec<f64>>,
    nodes: Vec<KdNode>,
    /// Bounding box per node, one (min, max) per dimension.
    boxes: Vec<Vec<(f64, f64)>>,
    root: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KdSearch {
    /// Rids inside fully contained subtrees; no per-row check needed.
    pub contained: Vec<usize>,
    /// Rids from partially overlapping leaves that still need a row check.
    pub candidates: Vec<usize>,
    pub nodes_visited: usize,
    pub pruned: usize,
}

impl KdTreeIndex {
    /// `points[rid][k]` is the rid's key on dimension `k`.
    pub fn build(dims: Vec<String>, leaf_size: usize, points: Vec<Vec<f64>>) -> Self {
        let leaf_size = leaf_size.max(1);
        let mut t = Self {
            dims,
            leaf_size,
            points,
            nodes: Vec::new(),
            boxes: Vec::new(),
            root: None,
        };
        if !t.points.is_empty() {
            let rids: Vec<usize> = (0..t.points.len()).collect();
            t.root = Some(t.split(rids, 0));
        }
        t
    }

    fn split(&mut self, mut rids: Vec<usize>, depth: usize) -> usize {
        let bbox: Vec<(f64, f64)> = (0..self.dims.len())
            .map(|k| {
                rids.iter()
                    .map(|&r| self.points[r][k])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect();
        let dim = depth % self.dims.len().max(1);
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf { rids: Vec::new() });
        self.boxes.push(bbox);
        if rids.len() <= self.leaf_size || self.dims.is_empty() {
            self.nodes[id] = KdNode::Leaf { rids };
            return id;
        }
        rids.sort_by(|&a, &b| {
            self.points[a][dim]
                .total_cmp(&self.points[b][dim])
                .then(a.cmp(&b))
        });
        let mid = rids.len() / 2;
        let right_rids = rids.split_off(mid);
        let left = self.split(rids, depth + 1);
        let right = self.split(right_rids, depth + 1);
        self.nodes[id] = KdNode::Split { dim, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Leaf rid lists, in tree order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                KdNode::Leaf { rids } => Some(rids.as_slice()),
                KdNode::Split { .. } => None,
            })
            .collect()
    }

    /// Split dimensions along every root-to-leaf path, root first.
    pub fn split_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if let Some(root) = self.root {
            self.paths(root, Vec::new(), &mut out);
        }
        out
    }

    fn paths(&self, id: usize, prefix: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match &self.nodes[id] {
            KdNode::Leaf { .. } => out.push(prefix),
            KdNode::Split {
                dim, left, right, ..
            } => {
                let mut p = prefix.clone();
                p.push(*dim);
                self.paths(*left, p.clone(), out);
                self.paths(*right, p, out);
            }
        }
    }

    /// Candidate search for the box `ranges` (one per dimension, `None` = unbounded).
    pub fn search(&self, ranges: &[Option<KeyRange>]) -> KdSearch {
        let mut s = KdSearch::default();
        if let Some(root) = self.root {
            self.visit(root, ranges, &mut s);
        }
        s
    }

    /// Exact rid set for the box, ascending.
    pub fn range_query(&self, ranges: &[Option<KeyRange>]) -> Vec<usize> {
        let s = self.search(ranges);
        let mut out = s.contained;
        out.extend(
            s.candidates
                .into_iter()
                .filter(|&r| self.point_in(r, ranges)),
        );
        out.sort_unstable();
        out
    }

    pub fn point_in(&self, rid: usize, ranges: &[Option<KeyRange>]) -> bool {
        ranges
            .iter()
            .enumerate()
            .all(|(k, r)| r.as_ref().is_none_or(|r| r.contains(self.points[rid][k])))
    }

    fn visit(&self, id: usize, ranges: &[Option<KeyRange>], s: &mut KdSearch) {
        s.nodes_visited += 1;
        let bbox = &self.boxes[id];
        let mut inside = true;
        for (k, r) in ranges.iter().enumerate() {
            let Some(r) = r else { continue };
            let (lo, hi) = bbox[k];
            if !r.overlaps(lo, hi) {
                s.pruned += 1;
                return;
            }
            inside &= r.contains(lo) && r.contains(hi);
        }
        if inside {
            self.collect(id, &mut s.contained);
            return;
        }
        match &self.nodes[id] {
            KdNode::Leaf { rids } => s.candidates.extend_from_slice(rids),
            KdNode::Split { left, right, .. } => {
                self.visit(*left, ranges, s);
                self.visit(*right, ranges, s);
            }
        }
    }

    fn collect(&self, id: usize, out: &mut Vec<usize>) {
        match &self.nodes[id] {
            KdNode::Leaf { rids } => out.extend_from_slice(rids),
            KdNode::Split { left, right, .. } => {
                self.collect(*left, out);
                self.collect(*right, out);
            }
        }
    }
}
