//! In-process FIFO channels between the three parties, with byte accounting.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Aggregate communication counters for one session.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommStats {
    pub rounds: u64,
    pub bytes: u64,
    pub messages: u64,
}

/// One transcript line: who sent how much to whom in which round. No payloads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: u64,
    pub sender: u8,
    pub receiver: u8,
    pub bytes: u64,
}

/// Invocation counters per primitive. `total` counts every call at any nesting
/// depth; `direct` only top-level calls and their immediate sub-protocols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveCounts {
    pub total: BTreeMap<String, u64>,
    pub direct: BTreeMap<String, u64>,
}

impl PrimitiveCounts {
    pub fn total_of(&self, name: &str) -> u64 {
        self.total.get(name).copied().unwrap_or(0)
    }

    pub fn direct_of(&self, name: &str) -> u64 {
        self.direct.get(name).copied().unwrap_or(0)
    }
}

#[derive(Debug, Default)]
pub(crate) struct Network {
    // channels[from][to]
    channels: [[VecDeque<Vec<u64>>; 3]; 3],
    pub(crate) stats: CommStats,
    transcript: Option<Vec<TranscriptEntry>>,
}

impl Network {
    pub(crate) fn new(record_transcript: bool) -> Self {
        Network {
            transcript: record_transcript.then(Vec::new),
            ..Default::default()
        }
    }

    pub(crate) fn send(&mut self, from: usize, to: usize, payload: Vec<u64>) {
        debug_assert_ne!(from, to);
        let bytes = 8 * payload.len() as u64;
        self.stats.bytes += bytes;
        self.stats.messages += 1;
        if let Some(t) = self.transcript.as_mut() {
            t.push(TranscriptEntry {
                round: self.stats.rounds,
                sender: from as u8 + 1,
                receiver: to as u8 + 1,
                bytes,
            });
        }
        self.channels[from][to].push_back(payload);
    }

    pub(crate) fn recv(&mut self, to: usize, from: usize) -> Vec<u64> {
        self.channels[from][to]
            .pop_front()
            .expect("receive on empty channel: protocol message schedule out of sync")
    }

    pub(crate) fn end_round(&mut self) {
        self.stats.rounds += 1;
    }

    pub(crate) fn transcript(&self) -> Option<&[TranscriptEntry]> {
        self.transcript.as_deref()
    }

    pub(crate) fn pending(&self) -> usize {
        self.channels.iter().flatten().map(VecDeque::len).sum()
    }
}

/// Renders a transcript as `round sender receiver bytes` lines.
pub fn format_transcript(entries: &[TranscriptEntry]) -> String {
    let mut out = String::with_capacity(entries.len() * 16);
    for e in entries {
        let _ = writeln!(out, "{} P{} P{} {}", e.round, e.sender, e.receiver, e.bytes);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_per_channel() {
        let mut net = Network::new(true);
        net.send(0, 1, vec![1]);
        net.send(0, 1, vec![2, 3]);
        net.send(2, 1, vec![9]);
        net.end_round();
        assert_eq!(net.recv(1, 0), vec![1]);
        assert_eq!(net.recv(1, 2), vec![9]);
        assert_eq!(net.recv(1, 0), vec![2, 3]);
        assert_eq!(net.stats.bytes, 32);
        assert_eq!(net.stats.rounds, 1);
        assert_eq!(net.pending(), 0);
        let text = format_transcript(net.transcript().unwrap());
        assert_eq!(text, "0 P1 P2 8\n0 P1 P2 16\n0 P3 P2 8\n");
    }
}
