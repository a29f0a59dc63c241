use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grammar::EntityRef;

use super::quant::NvRange;

/// Wire form of a program: token ids plus pointer payloads keyed by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "StreamDoc", into = "StreamDoc")]
pub struct TokenStream {
    pub q: u32,
    pub nv_range: NvRange,
    pub tokens: Vec<u32>,
    pub pointers: BTreeMap<usize, EntityRef>,
}

impl TokenStream {
    pub fn new(q: u32, nv_range: NvRange) -> Self {
        Self { q, nv_range, tokens: Vec::new(), pointers: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("token stream serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Removes the token at `pos`, shifting later payloads down.
    pub fn delete_token(&mut self, pos: usize) {
        if pos >= self.tokens.len() {
            return;
        }
        self.tokens.remove(pos);
        let old = std::mem::take(&mut self.pointers);
        for (p, r) in old {
            match p.cmp(&pos) {
                std::cmp::Ordering::Less => {
                    self.pointers.insert(p, r);
                }
                std::cmp::Ordering::Greater => {
                    self.pointers.insert(p - 1, r);
                }
                std::cmp::Ordering::Equal => {}
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PointerDoc {
    pos: usize,
    entity_ref: EntityRef,
}

#[derive(Serialize, Deserialize)]
struct StreamDoc {
    q: u32,
    nv_lo: f64,
    nv_hi: f64,
    tokens: Vec<u32>,
    #[serde(default)]
    pointers: Vec<PointerDoc>,
}

impl From<StreamDoc> for TokenStream {
    fn from(d: StreamDoc) -> Self {
        Self {
            q: d.q,
            nv_range: NvRange::new(d.nv_lo, d.nv_hi),
            tokens: d.tokens,
            pointers: d.pointers.into_iter().map(|p| (p.pos, p.entity_ref)).collect(),
        }
    }
}

impl From<TokenStream> for StreamDoc {
    fn from(s: TokenStream) -> Self {
        Self {
            q: s.q,
            nv_lo: s.nv_range.lo,
            nv_hi: s.nv_range.hi,
            tokens: s.tokens,
            pointers: s
                .pointers
                .into_iter()
                .map(|(pos, entity_ref)| PointerDoc { pos, entity_ref })
                .collect(),
        }
    }
}
