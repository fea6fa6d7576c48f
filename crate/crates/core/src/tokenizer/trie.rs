//! Byte-level prefix trie used for greedy longest-match segmentation.

/// A single trie node. Children are kept sorted by edge byte.
#[derive(Debug, Clone, Default)]
struct Node {
    children: Vec<(u8, u32)>,
    value: Option<u32>,
}

impl Node {
    fn child(&self, byte: u8) -> Option<u32> {
        self.children
            .binary_search_by_key(&byte, |&(b, _)| b)
            .ok()
            .map(|i| self.children[i].1)
    }
}

/// Maps byte strings to token ids and answers longest-prefix queries.
#[derive(Debug, Clone)]
pub struct Trie {
    nodes: Vec<Node>,
    max_depth: usize,
}

impl Default for Trie {
    fn default() -> Self {
        Self::new()
    }
}

impl Trie {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::default()],
            max_depth: 0,
        }
    }

    /// Inserts `key` with `value`, replacing any previous value.
    pub fn insert(&mut self, key: &[u8], value: u32) {
        let mut cur = 0usize;
        for &byte in key {
            cur = match self.nodes[cur].child(byte) {
                Some(next) => next as usize,
                None => {
                    let next = self.nodes.len() as u32;
                    self.nodes.push(Node::default());
                    let children = &mut self.nodes[cur].children;
                    let pos = children.partition_point(|&(b, _)| b < byte);
                    children.insert(pos, (byte, next));
                    next as usize
                }
            };
        }
        self.nodes[cur].value = Some(value);
        self.max_depth = self.max_depth.max(key.len());
    }

    pub fn get(&self, key: &[u8]) -> Option<u32> {
        let mut cur = 0usize;
        for &byte in key {
            cur = self.nodes[cur].child(byte)? as usize;
        }
        self.nodes[cur].value
    }

    /// Returns `(value, length)` for the longest key that is a prefix of `input`.
    pub fn longest_prefix(&self, input: &[u8]) -> Option<(u32, usize)> {
        let mut cur = 0usize;
        let mut best = None;
        for (i, &byte) in input.iter().take(self.max_depth).enumerate() {
            match self.nodes[cur].child(byte) {
                Some(next) => cur = next as usize,
                None => break,
            }
            if let Some(v) = self.nodes[cur].value {
                best = Some((v, i + 1));
            }
        }
        best
    }
}
