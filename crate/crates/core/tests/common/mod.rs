#![allow(dead_code)]

use medium_core::blocktree::{BlockId, BlockTree, Miner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tree of `1..=max_blocks` blocks below genesis. Half of the blocks go
/// below a uniformly chosen block, the rest below one of the deepest few,
/// which gives long chains with frequent equal-weight siblings.
pub fn random_tree(seed: u64, max_blocks: usize) -> BlockTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_blocks);
    let mut tree = BlockTree::new();
    let mut ids = vec![tree.genesis()];
    for k in 0..n {
        let parent = if rng.gen_bool(0.5) {
            ids[rng.gen_range(0..ids.len())]
        } else {
            let max = ids.iter().map(|&b| tree.depth(b).unwrap()).max().unwrap();
            let deep: Vec<BlockId> = ids
                .iter()
                .copied()
                .filter(|&b| tree.depth(b).unwrap() + 2 >= max)
                .collect();
            deep[rng.gen_range(0..deep.len())]
        };
        ids.push(tree.extend(parent, Miner::Honest(k as u32 % 7)).unwrap());
    }
    tree
}
