//! Versioned tree persistence with canonical, diff-friendly JSON.
//!
//! Canonical means: stable field order, two-space indentation, embeddings
//! as decimal arrays with shortest round-trip float formatting, and a
//! trailing newline — so identical trees always serialize to identical
//! bytes and `save(load(bytes)) == bytes`.

use serde::{Deserialize, Serialize};

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::insert::ThresholdPolicy;
use crate::tree::{MemoryTree, NodeId, RawNode};

/// Current snapshot format. Bump on breaking layout changes.
pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotNode {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Embedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    depth: usize,
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    format_version: u32,
    embedding_dimension: usize,
    policy: ThresholdPolicy,
    creation_counter: u64,
    nodes: Vec<SnapshotNode>,
}

/// Serializes the tree and its insertion policy to canonical bytes.
///
/// Refuses trees with outstanding invariant violations: snapshots only
/// ever hold well-formed state.
pub fn save_snapshot(tree: &MemoryTree, policy: &ThresholdPolicy) -> Result<Vec<u8>> {
    let violations = tree.validate();
    if let Some(violation) = violations.first() {
        return Err(Error::InvalidState(format!(
            "refusing to snapshot an invalid tree: {violation}"
        )));
    }
    let file = SnapshotFile {
        format_version: SNAPSHOT_FORMAT_VERSION,
        embedding_dimension: tree.embedding_dimension(),
        policy: *policy,
        creation_counter: tree.creation_counter(),
        nodes: tree
            .nodes()
            .map(|node| SnapshotNode {
                id: node.id(),
                content: node.content().map(str::to_string),
                embedding: node.embedding().cloned(),
                parent: node.parent(),
                children: node.children().to_vec(),
                depth: node.depth(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file)
        .map_err(|e| Error::InvalidState(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parses snapshot bytes back into a tree and policy, verifying the
/// format version and every structural invariant.
pub fn load_snapshot(bytes: &[u8]) -> Result<(MemoryTree, ThresholdPolicy)> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::CorruptSnapshot(format!("not valid JSON: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptSnapshot("missing format_version".into()))?;
    if found != u64::from(SNAPSHOT_FORMAT_VERSION) {
        return Err(Error::UnsupportedVersion {
            found: found.try_into().unwrap_or(u32::MAX),
            supported: SNAPSHOT_FORMAT_VERSION,
        });
    }
    let file: SnapshotFile = serde_json::from_value(value)
        .map_err(|e| Error::CorruptSnapshot(format!("malformed snapshot: {e}")))?;
    file.policy
        .validate()
        .map_err(|e| Error::CorruptSnapshot(format!("bad policy: {e}")))?;

    let max_id = file.nodes.iter().map(|n| n.id.as_u64()).max();
    if let Some(max_id) = max_id {
        if file.creation_counter <= max_id {
            return Err(Error::CorruptSnapshot(format!(
                "creation_counter {} not past max node id {max_id}",
                file.creation_counter
            )));
        }
    }

    let tree = MemoryTree::from_raw_parts(
        file.embedding_dimension,
        file.creation_counter,
        file.nodes
            .into_iter()
            .map(|n| RawNode {
                id: n.id,
                content: n.content,
                embedding: n.embedding,
                parent: n.parent,
                children: n.children,
                depth: n.depth,
            })
            .collect(),
    )?;
    let violations = tree.validate();
    if let Some(violation) = violations.first() {
        return Err(Error::CorruptSnapshot(violation.to_string()));
    }
    Ok((tree, file.policy))
}
