use crate::blocktree::{BlockId, BlockTree};

/// Binary-lifting ancestor table over a tree whose block ids equal their
/// insertion index.
pub(crate) struct Lineage {
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
}

impl Lineage {
    pub(crate) fn new(tree: &BlockTree) -> Self {
        let n = tree.len();
        let depth: Vec<u32> = (0..n).map(|i| tree.node(i).depth).collect();
        let parent: Vec<u32> = (0..n)
            .map(|i| {
                debug_assert_eq!(tree.id_of(i).0 as usize, i);
                tree.node(i).parent.unwrap_or(i) as u32
            })
            .collect();
        let max = depth.iter().copied().max().unwrap_or(0).max(1);
        let levels = (32 - max.leading_zeros()) as usize;
        let mut up = vec![parent];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next = prev.iter().map(|&p| prev[p as usize]).collect();
            up.push(next);
        }
        Lineage { depth, up }
    }

    pub(crate) fn len(&self) -> usize {
        self.depth.len()
    }

    pub(crate) fn depth(&self, b: BlockId) -> u32 {
        self.depth[b.0 as usize]
    }

    /// Ancestor of `b` at depth `d` (`d` at most the depth of `b`).
    pub(crate) fn ancestor_at(&self, b: BlockId, d: u32) -> BlockId {
        let mut i = b.0 as u32;
        let mut diff = self.depth[i as usize] - d;
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                i = self.up[k][i as usize];
            }
            diff >>= 1;
            k += 1;
        }
        BlockId(i as u64)
    }

    /// Whether `a` lies on the chain ending at `b` (a block is its own ancestor).
    pub(crate) fn is_ancestor(&self, a: BlockId, b: BlockId) -> bool {
        let da = self.depth(a);
        da <= self.depth(b) && self.ancestor_at(b, da) == a
    }

    pub(crate) fn lca(&self, a: BlockId, b: BlockId) -> BlockId {
        let d = self.depth(a).min(self.depth(b));
        let (mut x, mut y) = (
            self.ancestor_at(a, d).0 as u32,
            self.ancestor_at(b, d).0 as u32,
        );
        if x == y {
            return BlockId(x as u64);
        }
        for k in (0..self.up.len()).rev() {
            let (px, py) = (self.up[k][x as usize], self.up[k][y as usize]);
            if px != py {
                x = px;
                y = py;
            }
        }
        BlockId(self.up[0][x as usize] as u64)
    }

    pub(crate) fn lca_all(&self, blocks: &[BlockId]) -> BlockId {
        blocks
            .iter()
            .skip(1)
            .fold(blocks[0], |acc, &b| self.lca(acc, b))
    }
}
