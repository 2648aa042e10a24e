use crate::error::{GnarError, Result};

/// Disjoint covering assignment of nodes to communities `K_1 .. K_C`.
///
/// Community indices are 0-based in the API; labels default to `"1".."C"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityPartition {
    assignment: Vec<usize>,
    labels: Vec<String>,
    members: Vec<Vec<usize>>,
}

impl CommunityPartition {
    /// Every community in `0..=max(assignment)` must be nonempty.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        let count = assignment.iter().max().map_or(0, |m| m + 1);
        let labels = (1..=count).map(|c| c.to_string()).collect();
        Self::with_labels(assignment, labels)
    }

    pub fn with_labels(assignment: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(GnarError::InvalidPartition("no nodes".into()));
        }
        let count = labels.len();
        let mut members = vec![Vec::new(); count];
        for (node, &c) in assignment.iter().enumerate() {
            if c >= count {
                return Err(GnarError::InvalidPartition(format!(
                    "node {} assigned to community {} but only {} are labelled",
                    node + 1,
                    c + 1,
                    count
                )));
            }
            members[c].push(node);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(GnarError::InvalidPartition(format!(
                "community {} has no members",
                empty + 1
            )));
        }
        Ok(Self {
            assignment,
            labels,
            members,
        })
    }

    /// One community holding every node.
    pub fn single(nodes: usize) -> Self {
        Self {
            assignment: vec![0; nodes],
            labels: vec!["1".into()],
            members: vec![(0..nodes).collect()],
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Sorted node indices of `K_c`.
    pub fn members(&self, community: usize) -> &[usize] {
        &self.members[community]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, community: usize) -> &str {
        &self.labels[community]
    }

    /// `ξ_c` as a 0/1 vector.
    pub fn indicator(&self, community: usize) -> Vec<f64> {
        self.assignment
            .iter()
            .map(|&c| if c == community { 1.0 } else { 0.0 })
            .collect()
    }

    /// Node reordering: node `perm[i]` of the result is node `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut assignment = vec![0; self.assignment.len()];
        for (old, &new) in perm.iter().enumerate() {
            assignment[new] = self.assignment[old];
        }
        Self::with_labels(assignment, self.labels.clone()).expect("permutation keeps communities")
    }
}
