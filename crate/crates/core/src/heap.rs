use std::cmp::Ordering;

/// Min-heap entry for `BinaryHeap`: the smallest value pops first, ties go
/// to the lowest node index.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MinEntry {
    pub value: f64,
    pub node: usize,
}

impl PartialEq for MinEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for MinEntry {}
impl PartialOrd for MinEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MinEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.value.total_cmp(&self.value).then_with(|| other.node.cmp(&self.node))
    }
}
