//! Graphviz DOT rendering of a tree for visual inspection.

use crate::tree::{MemoryTree, NodeId};

/// Rendering knobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotOptions {
    /// Content is truncated to this many characters in labels.
    pub max_label_chars: usize,
    /// Only nodes at or above this depth are emitted; `None` keeps all.
    pub depth_limit: Option<usize>,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            max_label_chars: 40,
            depth_limit: None,
        }
    }
}

/// Renders the tree as a DOT digraph: one box per node labeled with its
/// truncated content and depth, one edge per parent-child link, everything
/// in node-id order.
pub fn export_dot(tree: &MemoryTree, options: &DotOptions) -> String {
    let included = |id: NodeId| -> bool {
        match options.depth_limit {
            Some(limit) => tree
                .node(id)
                .map(|n| n.depth() <= limit)
                .unwrap_or(false),
            None => true,
        }
    };
    let mut out = String::from("digraph memtree {\n  node [shape=box];\n");
    for node in tree.nodes() {
        if !included(node.id()) {
            continue;
        }
        let label = match node.content() {
            Some(content) => format!(
                "{} (d{})",
                escape(&truncate(content, options.max_label_chars)),
                node.depth()
            ),
            None => format!("root (d{})", node.depth()),
        };
        out.push_str(&format!("  n{} [label=\"{}\"];\n", node.id(), label));
    }
    for node in tree.nodes() {
        if !included(node.id()) {
            continue;
        }
        for &child in node.children() {
            if included(child) {
                out.push_str(&format!("  n{} -> n{};\n", node.id(), child));
            }
        }
    }
    out.push_str("}\n");
    out
}

fn truncate(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let mut kept: String = text.chars().take(max_chars).collect();
    kept.push('…');
    kept
}

/// Escapes a label for a double-quoted DOT string.
fn escape(text: &str) -> String {
    text.chars()
        .flat_map(|c| match c {
            '\\' => vec!['\\', '\\'],
            '"' => vec!['\\', '"'],
            '\n' => vec!['\\', 'n'],
            '\r' => vec![],
            other => vec![other],
        })
        .collect()
}
