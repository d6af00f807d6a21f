//! Synchronous message delivery with a rushing adversary and partitions.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::blocktree::{Block, BlockId, Miner};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffusionError {
    #[error("partition assignment covers {got} parties, expected {expected}")]
    BadAssignment { got: usize, expected: usize },
    #[error("party {0} out of range")]
    UnknownParty(u32),
    #[error("block {block} sent across the partition to party {recipient} without a grant")]
    CrossPartition { block: BlockId, recipient: u32 },
}

/// Who put a block into a buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Honest(u32),
    Adversary,
    Heal,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Honest(i) => write!(f, "h{i}"),
            Source::Adversary => write!(f, "adv"),
            Source::Heal => write!(f, "heal"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Delivery {
    pub block: Arc<Block>,
    pub source: Source,
}

/// A block the adversary hands to chosen recipients.
#[derive(Clone, Debug)]
pub struct AdversaryMessage {
    pub block: Arc<Block>,
    pub recipients: Vec<u32>,
    pub cross_partition: bool,
}

/// One line of the delivery log: `round recipient block_id source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeliveryEvent {
    pub round: u64,
    pub recipient: u32,
    pub block: BlockId,
    pub source: Source,
}

impl fmt::Display for DeliveryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.round, self.recipient, self.block, self.source
        )
    }
}

#[derive(Clone, Debug)]
pub struct DiffusionState {
    buffers: Vec<Vec<Delivery>>,
    present: Vec<HashSet<BlockId>>,
    partition: Vec<u32>,
    log: Option<Vec<DeliveryEvent>>,
}

impl DiffusionState {
    pub fn new(n: u32) -> Self {
        DiffusionState {
            buffers: vec![Vec::new(); n as usize],
            present: vec![HashSet::new(); n as usize],
            partition: vec![0; n as usize],
            log: None,
        }
    }

    /// Keep every delivery in an event log.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn parties(&self) -> u32 {
        self.buffers.len() as u32
    }

    pub fn partition_of(&self, party: u32) -> u32 {
        self.partition[party as usize]
    }

    pub fn is_partitioned(&self) -> bool {
        self.partition.iter().any(|&l| l != self.partition[0])
    }

    pub fn set_partition(&mut self, assignment: Vec<u32>) -> Result<(), DiffusionError> {
        if assignment.len() != self.buffers.len() {
            return Err(DiffusionError::BadAssignment {
                got: assignment.len(),
                expected: self.buffers.len(),
            });
        }
        self.partition = assignment;
        Ok(())
    }

    pub fn heal_partition(&mut self) {
        self.partition.iter_mut().for_each(|l| *l = 0);
    }

    pub fn buffer(&self, party: u32) -> &[Delivery] {
        &self.buffers[party as usize]
    }

    /// Empties and returns the buffer of `party`.
    pub fn take_buffer(&mut self, party: u32) -> Vec<Delivery> {
        self.present[party as usize].clear();
        std::mem::take(&mut self.buffers[party as usize])
    }

    fn push(&mut self, round: u64, recipient: u32, block: &Arc<Block>, source: Source) {
        let r = recipient as usize;
        if !self.present[r].insert(block.id) {
            return;
        }
        if let Some(log) = self.log.as_mut() {
            log.push(DeliveryEvent {
                round,
                recipient,
                block: block.id,
                source,
            });
        }
        self.buffers[r].push(Delivery {
            block: block.clone(),
            source,
        });
    }

    /// Closes round `round`: honest broadcasts reach every party of the
    /// sender's partition (in sender-index order), then adversarial messages
    /// reach exactly their recipients (in submission order). Buffers are read
    /// at the start of round `round + 1`.
    pub fn end_of_round(
        &mut self,
        round: u64,
        honest_broadcasts: &[(u32, Arc<Block>)],
        adversary_messages: &[AdversaryMessage],
    ) -> Result<(), DiffusionError> {
        let n = self.parties();
        let mut order: Vec<usize> = (0..honest_broadcasts.len()).collect();
        order.sort_by_key(|&k| honest_broadcasts[k].0);
        for k in order {
            let (sender, block) = &honest_broadcasts[k];
            if *sender >= n {
                return Err(DiffusionError::UnknownParty(*sender));
            }
            let label = self.partition[*sender as usize];
            for r in 0..n {
                if self.partition[r as usize] == label {
                    self.push(round + 1, r, block, Source::Honest(*sender));
                }
            }
        }
        for m in adversary_messages {
            for &r in &m.recipients {
                if r >= n {
                    return Err(DiffusionError::UnknownParty(r));
                }
                if let Miner::Adversary(k) = m.block.miner {
                    let crosses = (k as usize) < self.partition.len()
                        && self.partition[k as usize] != self.partition[r as usize];
                    if crosses && !m.cross_partition {
                        return Err(DiffusionError::CrossPartition {
                            block: m.block.id,
                            recipient: r,
                        });
                    }
                }
                self.push(round + 1, r, &m.block, Source::Adversary);
            }
        }
        Ok(())
    }

    /// Delivers `blocks` to every listed recipient, used when a partition
    /// heals and holders re-send what the other side may lack.
    pub fn heal_broadcast(&mut self, round: u64, blocks: &[Arc<Block>], recipients: &[u32]) {
        for b in blocks {
            for &r in recipients {
                self.push(round + 1, r, b, Source::Heal);
            }
        }
    }

    pub fn take_log(&mut self) -> Vec<DeliveryEvent> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(id: u64) -> Arc<Block> {
        Arc::new(Block {
            id: BlockId(id),
            parent: Some(BlockId(0)),
            miner: Miner::Honest(0),
            round: 1,
            ctr: 1,
            payload: vec![],
        })
    }

    #[test]
    fn broadcast_reaches_everyone() {
        let mut d = DiffusionState::new(4);
        d.end_of_round(1, &[(0, b(1))], &[]).unwrap();
        for p in 0..4 {
            assert_eq!(d.buffer(p).len(), 1);
        }
    }

    #[test]
    fn partition_blocks_honest_traffic() {
        let mut d = DiffusionState::new(2);
        d.set_partition(vec![0, 1]).unwrap();
        d.end_of_round(1, &[(0, b(1))], &[]).unwrap();
        assert_eq!(d.buffer(0).len(), 1);
        assert!(d.buffer(1).is_empty());
        d.heal_partition();
        d.end_of_round(2, &[(0, b(2))], &[]).unwrap();
        assert_eq!(d.buffer(1).len(), 1);
        assert!(d.set_partition(vec![0]).is_err());
    }

    #[test]
    fn cross_partition_needs_grant() {
        let mut d = DiffusionState::new(3);
        d.set_partition(vec![0, 1, 1]).unwrap();
        let mut blk = (*b(5)).clone();
        blk.miner = Miner::Adversary(2);
        let m = AdversaryMessage {
            block: Arc::new(blk),
            recipients: vec![0],
            cross_partition: false,
        };
        assert!(matches!(
            d.end_of_round(1, &[], std::slice::from_ref(&m)),
            Err(DiffusionError::CrossPartition { .. })
        ));
        let m = AdversaryMessage {
            cross_partition: true,
            ..m
        };
        d.end_of_round(1, &[], &[m]).unwrap();
        assert_eq!(d.buffer(0).len(), 1);
    }

    #[test]
    fn ordering_and_dedup() {
        let mut d = DiffusionState::new(3).with_log();
        let adv = AdversaryMessage {
            block: b(9),
            recipients: vec![1],
            cross_partition: false,
        };
        d.end_of_round(1, &[(2, b(2)), (0, b(1))], &[adv.clone(), adv])
            .unwrap();
        let ids: Vec<u64> = d.buffer(1).iter().map(|x| x.block.id.0).collect();
        assert_eq!(ids, vec![1, 2, 9]);
        assert_eq!(d.buffer(0).len(), 2);
        let log = d.take_log();
        assert_eq!(log.len(), 7);
        assert_eq!(log[0].to_string(), "2 0 1 h0");
    }
}
