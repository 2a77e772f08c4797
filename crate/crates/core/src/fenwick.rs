use alloc::vec;
use alloc::vec::Vec;

/// Binary indexed tree over counts.
pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        Self { tree: vec![0; len + 1] }
    }

    pub(crate) fn add(&mut self, index: usize, value: u64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += value;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over `[0, end)`.
    pub(crate) fn prefix(&self, end: usize) -> u64 {
        let mut i = end.min(self.tree.len() - 1);
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums() {
        let mut f = Fenwick::new(5);
        f.add(0, 1);
        f.add(3, 2);
        f.add(4, 5);
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(1), 1);
        assert_eq!(f.prefix(4), 3);
        assert_eq!(f.prefix(5), 8);
    }
}
