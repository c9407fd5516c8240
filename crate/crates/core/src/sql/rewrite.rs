use super::logical::{LogicalNode, LogicalOp, Schema};
use crate::predicate::{Bound, Predicate};
use crate::storage::Value;

/// A semantics-preserving plan transformation. `apply` returns `None` when the
/// rule does not match at the given node.
#[derive(Clone, Copy)]
pub struct RewriteRule {
    pub name: &'static str,
    pub pattern: &'static str,
    pub replacement: &'static str,
    pub apply: fn(&LogicalNode) -> Option<LogicalNode>,
}

impl std::fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} => {}", self.name, self.pattern, self.replacement)
    }
}

pub fn default_rules() -> Vec<RewriteRule> {
    vec![
        RewriteRule {
            name: "fuse-filters",
            pattern: "Filter(p, Filter(q, x))",
            replacement: "Filter(q AND p, x)",
            apply: fuse_filters,
        },
        RewriteRule {
            name: "push-down-filter",
            pattern: "Filter(p1 AND p2 AND r, Join(L, R)) with cols(p1) ⊆ L, cols(p2) ⊆ R",
            replacement: "Filter(r, Join(Filter(p1, L), Filter(p2, R)))",
            apply: push_down,
        },
        RewriteRule {
            name: "reorder-conjuncts",
            pattern: "Filter(c1 AND … AND ck, x)",
            replacement: "conjuncts sorted by ascending estimated selectivity",
            apply: reorder_conjuncts,
        },
    ]
}

/// Applies `rules` anywhere in the tree until none matches.
pub fn apply_rewrites(ir: &LogicalNode, rules: &[RewriteRule]) -> LogicalNode {
    let mut cur = ir.clone();
    for _ in 0..1000 {
        match step(&cur, rules) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn step(node: &LogicalNode, rules: &[RewriteRule]) -> Option<LogicalNode> {
    for r in rules {
        if let Some(n) = (r.apply)(node) {
            return Some(n);
        }
    }
    for (i, c) in node.children.iter().enumerate() {
        if let Some(nc) = step(c, rules) {
            let mut n = node.clone();
            n.children[i] = nc;
            return Some(n);
        }
    }
    None
}

fn shift_exists(p: &Predicate, offset: usize) -> Predicate {
    match p {
        Predicate::Exists(i) => Predicate::Exists(i + offset),
        Predicate::And(v) => Predicate::And(v.iter().map(|q| shift_exists(q, offset)).collect()),
        Predicate::Or(v) => Predicate::Or(v.iter().map(|q| shift_exists(q, offset)).collect()),
        Predicate::Not(q) => Predicate::Not(Box::new(shift_exists(q, offset))),
        p => p.clone(),
    }
}

fn fuse_filters(node: &LogicalNode) -> Option<LogicalNode> {
    let LogicalOp::Filter { predicate: outer } = &node.op else {
        return None;
    };
    let inner = &node.children[0];
    let LogicalOp::Filter { predicate: inner_p } = &inner.op else {
        return None;
    };
    let offset = inner.children.len() - 1;
    let predicate = Predicate::and(vec![inner_p.clone(), shift_exists(outer, offset)]);
    let mut children = inner.children.clone();
    children.extend(node.children[1..].iter().cloned());
    Some(LogicalNode {
        op: LogicalOp::Filter { predicate },
        children,
        schema: node.schema.clone(),
    })
}

fn is_join(op: &LogicalOp) -> bool {
    matches!(
        op,
        LogicalOp::EquiJoin { .. }
            | LogicalOp::NonEquiJoin { .. }
            | LogicalOp::SimilarityJoin { .. }
    )
}

fn covered(p: &Predicate, schema: &Schema) -> bool {
    let cols = p.columns();
    !cols.is_empty() && !p.has_exists() && cols.iter().all(|c| schema.index_of(c).is_some())
}

fn wrap_filter(parts: Vec<Predicate>, input: LogicalNode) -> LogicalNode {
    if parts.is_empty() {
        return input;
    }
    let schema = input.schema.clone();
    LogicalNode {
        op: LogicalOp::Filter {
            predicate: Predicate::and(parts),
        },
        children: vec![input],
        schema,
    }
}

fn push_down(node: &LogicalNode) -> Option<LogicalNode> {
    let LogicalOp::Filter { predicate } = &node.op else {
        return None;
    };
    let join = &node.children[0];
    if !is_join(&join.op) {
        return None;
    }
    let (mut left, mut right, mut keep) = (Vec::new(), Vec::new(), Vec::new());
    for c in predicate.conjuncts() {
        if covered(&c, &join.children[0].schema) {
            left.push(c);
        } else if covered(&c, &join.children[1].schema) {
            right.push(c);
        } else {
            keep.push(c);
        }
    }
    if left.is_empty() && right.is_empty() {
        return None;
    }
    let mut new_join = join.clone();
    new_join.children[0] = wrap_filter(left, join.children[0].clone());
    new_join.children[1] = wrap_filter(right, join.children[1].clone());
    if keep.is_empty() && node.children.len() == 1 {
        return Some(new_join);
    }
    let mut children = vec![new_join];
    children.extend(node.children[1..].iter().cloned());
    Some(LogicalNode {
        op: LogicalOp::Filter {
            predicate: Predicate::and(keep),
        },
        children,
        schema: node.schema.clone(),
    })
}

fn reorder_conjuncts(node: &LogicalNode) -> Option<LogicalNode> {
    let LogicalOp::Filter {
        predicate: Predicate::And(parts),
    } = &node.op
    else {
        return None;
    };
    let schema = &node.children[0].schema;
    let sel: Vec<f64> = parts
        .iter()
        .map(|p| estimate_selectivity(p, schema))
        .collect();
    if sel.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by(|&a, &b| sel[a].total_cmp(&sel[b]));
    let predicate = Predicate::And(order.into_iter().map(|i| parts[i].clone()).collect());
    let mut n = node.clone();
    n.op = LogicalOp::Filter { predicate };
    Some(n)
}

fn bound_fraction(b: &Bound, lo: f64, hi: f64) -> Option<f64> {
    let v = b.value.as_f64()?;
    if hi <= lo {
        return None;
    }
    Some(((v - lo) / (hi - lo)).clamp(0.0, 1.0))
}

/// Fraction of rows expected to satisfy `p`, from min/max and distinct-count
/// statistics under uniformity and independence.
pub fn estimate_selectivity(p: &Predicate, schema: &Schema) -> f64 {
    match p {
        Predicate::Const(b) => f64::from(u8::from(*b)),
        Predicate::Eq { column, value } => {
            let Some(f) = schema.field(column) else {
                return 0.1;
            };
            let (Some(min), Some(max)) = (&f.stats.min, &f.stats.max) else {
                return 0.0;
            };
            let outside = matches!(value.compare(min), Some(std::cmp::Ordering::Less))
                || matches!(value.compare(max), Some(std::cmp::Ordering::Greater));
            if outside {
                0.0
            } else {
                1.0 / f.stats.distinct.max(1) as f64
            }
        }
        Predicate::Range { column, low, high } => {
            let Some(f) = schema.field(column) else {
                return 0.3;
            };
            let (Some(lo), Some(hi)) = (
                f.stats.min.as_ref().and_then(Value::as_f64),
                f.stats.max.as_ref().and_then(Value::as_f64),
            ) else {
                return if f.stats.min.is_none() { 0.0 } else { 0.3 };
            };
            if hi <= lo {
                let only = f.stats.min.clone().expect("checked above");
                return f64::from(u8::from(p.eval(&|_| only.clone())));
            }
            let a = low
                .as_ref()
                .and_then(|b| bound_fraction(b, lo, hi))
                .unwrap_or(0.0);
            let b = high
                .as_ref()
                .and_then(|b| bound_fraction(b, lo, hi))
                .unwrap_or(1.0);
            if b < a {
                0.0
            } else {
                (b - a).max(1.0 / f.stats.distinct.max(1) as f64)
            }
        }
        Predicate::PrefixLike { .. } => 0.1,
        Predicate::And(v) => v.iter().map(|q| estimate_selectivity(q, schema)).product(),
        Predicate::Or(v) => {
            1.0 - v
                .iter()
                .map(|q| 1.0 - estimate_selectivity(q, schema))
                .product::<f64>()
        }
        Predicate::Not(q) => 1.0 - estimate_selectivity(q, schema),
        Predicate::Exists(_) => 0.5,
    }
}
