//! Associative memory of past events as memory-tagged records.
//!
//! Events are stored as depth-1 records whose header carries the memory
//! flag and the storage epoch; records can be re-wrapped (a memory of
//! having a memory) up to depth 3. Recall is partial-match: a query is a
//! pattern/mask over the embedded event frame's 19 bits, and every stored
//! record whose embedded frame matches is returned, newest first.
//!
//! [`strip_memory_tags`] is the tag-rewrite primitive: it removes exactly
//! one memory wrapper, and at depth 1 hands back the embedded reality
//! frame bit for bit, marked as internally generated, never as sensed.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::codec::{
    CodecError, ContextCode, InputFrame, MemoryBody, MemoryRecord, OutputFrame, FRAME_BITS,
};

/// Where a working-set frame came from. Only the environment feed creates
/// sensor provenance; stripped or rewritten frames are always internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Sensor,
    Internal,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Sensor => write!(f, "sensor"),
            Provenance::Internal => write!(f, "internal"),
        }
    }
}

/// An input frame annotated with its origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProvenancedFrame {
    pub frame: InputFrame,
    pub provenance: Provenance,
}

/// Store failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreError {
    /// Storage epochs may never run backwards.
    ClockRegression { clock: u32, requested: u32 },
    UnknownRecord(RecordId),
}

impl fmt::Display for StoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreError::ClockRegression { clock, requested } => {
                write!(f, "epoch {requested} is before the store clock {clock}")
            }
            StoreError::UnknownRecord(id) => write!(f, "no record with id {}", id.0),
        }
    }
}

impl core::error::Error for StoreError {}

/// Stable identifier of a stored record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecordId(pub u64);

/// Partial bit pattern over an event frame's 19 bits; a record matches
/// when its embedded input frame agrees on every masked bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub pattern: u32,
    pub mask: u32,
}

impl Query {
    /// Matches every record.
    pub const ANY: Query = Query { pattern: 0, mask: 0 };

    pub fn new(pattern: u32, mask: u32) -> Option<Self> {
        if pattern & !mask != 0 || mask >= 1 << FRAME_BITS {
            return None;
        }
        Some(Query { pattern, mask })
    }

    /// Matches records whose event happened under `context`.
    pub fn context(context: ContextCode) -> Self {
        let shift = FRAME_BITS - 5;
        Query {
            pattern: (context.bits() as u32) << shift,
            mask: 0b11111 << shift,
        }
    }

    /// Matches records of one exact event frame.
    pub fn exact(frame: &InputFrame) -> Self {
        Query {
            pattern: frame_bits(frame),
            mask: (1 << FRAME_BITS) - 1,
        }
    }

    pub fn matches(&self, frame: &InputFrame) -> bool {
        frame_bits(frame) & self.mask == self.pattern
    }
}

fn frame_bits(frame: &InputFrame) -> u32 {
    frame
        .to_bits()
        .iter()
        .fold(0u32, |acc, &b| (acc << 1) | b as u32)
}

/// Time-ordered store of memory records with a monotone epoch clock.
/// Stored records are never mutated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryStore {
    records: Vec<(RecordId, MemoryRecord)>,
    clock: u32,
    next_id: u64,
}

impl MemoryStore {
    pub fn new() -> Self {
        MemoryStore::default()
    }

    pub fn clock(&self) -> u32 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a depth-1 record of `frame -> out` with a memory-flagged
    /// header carrying the storage epoch, and advances the clock.
    pub fn store_event(
        &mut self,
        frame: InputFrame,
        out: OutputFrame,
        time: u32,
    ) -> Result<RecordId, StoreError> {
        if time < self.clock {
            return Err(StoreError::ClockRegression {
                clock: self.clock,
                requested: time,
            });
        }
        let record = MemoryRecord::event(ContextCode::MEMORY, time, frame, out)
            .expect("memory header and well-formed output");
        Ok(self.push(record, time))
    }

    /// Wraps the identified record one level deeper at `time`; the new
    /// record is stored alongside the old one, which stays untouched.
    pub fn nest(&mut self, id: RecordId, time: u32) -> Result<(RecordId, MemoryRecord), StoreError> {
        if time < self.clock {
            return Err(StoreError::ClockRegression {
                clock: self.clock,
                requested: time,
            });
        }
        let inner = self
            .records
            .iter()
            .find(|(rid, _)| *rid == id)
            .map(|(_, r)| r.clone())
            .ok_or(StoreError::UnknownRecord(id))?;
        let record = MemoryRecord::nested(ContextCode::MEMORY, time, inner)
            .map_err(|_| StoreError::UnknownRecord(id))?;
        let id = self.push(record.clone(), time);
        Ok((id, record))
    }

    fn push(&mut self, record: MemoryRecord, time: u32) -> RecordId {
        let id = RecordId(self.next_id);
        self.next_id += 1;
        self.clock = time;
        self.records.push((id, record));
        id
    }

    pub fn get(&self, id: RecordId) -> Option<&MemoryRecord> {
        self.records
            .iter()
            .find(|(rid, _)| *rid == id)
            .map(|(_, r)| r)
    }

    /// All records whose embedded input frame matches the query, newest
    /// first. Never mutates or re-encodes what was stored.
    pub fn recall(&self, q: &Query) -> Vec<&MemoryRecord> {
        self.records
            .iter()
            .rev()
            .filter(|(_, r)| q.matches(r.embedded_input()))
            .map(|(_, r)| r)
            .collect()
    }

    pub fn records(&self) -> impl Iterator<Item = (&RecordId, &MemoryRecord)> {
        self.records.iter().map(|(id, r)| (id, r))
    }

    /// Line-oriented dump: one record per line in bracketed packet text
    /// with `@epoch` markers, preceded by a clock line.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "clock {}", self.clock);
        for (_, record) in &self.records {
            out.push_str(&record.dump_text());
            out.push('\n');
        }
        out
    }

    pub fn load(text: &str) -> Result<Self, CodecError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let clock_line = lines.next().ok_or(CodecError::Text("missing clock line"))?;
        let clock: u32 = clock_line
            .strip_prefix("clock ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(CodecError::Text("bad clock line"))?;
        let mut store = MemoryStore::new();
        for line in lines {
            let record = MemoryRecord::from_dump_text(line.trim())?;
            let time = record.time();
            store.push(record, time.max(store.clock));
        }
        store.clock = clock.max(store.clock);
        Ok(store)
    }
}

/// Result of removing one memory wrapper.
#[derive(Debug, Clone, PartialEq)]
pub enum Stripped {
    /// Depth 1: the embedded reality event frame, bit for bit, marked
    /// internal. The remembered output is returned alongside.
    Frame(ProvenancedFrame, OutputFrame),
    /// Deeper records shed exactly one wrapper per call.
    Record(MemoryRecord),
}

/// The tag-rewrite spoof primitive: removes exactly one memory wrapper.
///
/// A depth-1 record yields the embedded frame unchanged except that it is
/// now reality-tagged working data of internal provenance; sensor
/// provenance can never be fabricated here.
pub fn strip_memory_tags(record: &MemoryRecord) -> Stripped {
    match record.body() {
        MemoryBody::Event { input, output } => Stripped::Frame(
            ProvenancedFrame {
                frame: *input,
                provenance: Provenance::Internal,
            },
            *output,
        ),
        MemoryBody::Nested(inner) => Stripped::Record((**inner).clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{FuncCode, VerbCode};

    fn alice_add() -> InputFrame {
        InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::ADD, 4, 2).unwrap()
    }

    fn bob_mul() -> InputFrame {
        InputFrame::new(ContextCode::BOB, VerbCode::WRITE, FuncCode::MUL, 4, 2).unwrap()
    }

    #[test]
    fn store_and_recall_exact() {
        let mut store = MemoryStore::new();
        let id = store.store_event(alice_add(), OutputFrame::say(6), 2).unwrap();
        let record = store.get(id).unwrap();
        assert_eq!(record.depth(), 1);
        assert_eq!(record.time(), 2);
        assert!(record.header().is_memory());

        let hits = store.recall(&Query::exact(&alice_add()));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].embedded_input(), &alice_add());
    }

    #[test]
    fn clock_never_regresses() {
        let mut store = MemoryStore::new();
        store.store_event(alice_add(), OutputFrame::say(6), 5).unwrap();
        assert_eq!(
            store.store_event(alice_add(), OutputFrame::say(6), 3),
            Err(StoreError::ClockRegression { clock: 5, requested: 3 })
        );
        assert_eq!(store.clock(), 5);
    }

    #[test]
    fn storing_twice_gives_distinct_ids_identical_bodies() {
        let mut store = MemoryStore::new();
        let a = store.store_event(alice_add(), OutputFrame::say(6), 2).unwrap();
        let b = store.store_event(alice_add(), OutputFrame::say(6), 3).unwrap();
        assert_ne!(a, b);
        assert_eq!(store.get(a).unwrap().embedded_input(), store.get(b).unwrap().embedded_input());
    }

    #[test]
    fn recall_by_person_context() {
        let mut store = MemoryStore::new();
        store.store_event(alice_add(), OutputFrame::say(6), 1).unwrap();
        store.store_event(bob_mul(), OutputFrame::write(8), 2).unwrap();
        store.store_event(alice_add(), OutputFrame::say(6), 3).unwrap();

        let alice_hits = store.recall(&Query::context(ContextCode::ALICE_LAB));
        assert_eq!(alice_hits.len(), 2);
        assert!(alice_hits
            .iter()
            .all(|r| r.embedded_input().context == ContextCode::ALICE_LAB));
        // newest first
        assert_eq!(alice_hits[0].time(), 3);

        assert!(store.recall(&Query::context(ContextCode::NOVEL)).is_empty());
        assert_eq!(store.recall(&Query::ANY).len(), 3);
    }

    #[test]
    fn empty_person_recall_on_foreign_store() {
        let mut store = MemoryStore::new();
        store.store_event(alice_add(), OutputFrame::say(6), 1).unwrap();
        assert!(store.recall(&Query::context(ContextCode::BOB)).is_empty());
    }

    #[test]
    fn nesting_and_strip_are_inverse() {
        let mut store = MemoryStore::new();
        let id = store.store_event(alice_add(), OutputFrame::say(6), 2).unwrap();
        let (nid, nested) = store.nest(id, 3).unwrap();
        assert_eq!(nested.depth(), 2);
        assert_eq!(nested.time(), 3);

        match strip_memory_tags(&nested) {
            Stripped::Record(inner) => assert_eq!(&inner, store.get(id).unwrap()),
            Stripped::Frame(..) => panic!("depth-2 strip must yield a record"),
        }

        let (_, nested3) = store.nest(nid, 4).unwrap();
        assert_eq!(nested3.depth(), 3);
        let (_, overflow) = match store.nest(nid, 5) {
            Ok((id3, _)) => (id3, store.nest(id3, 6)),
            Err(e) => panic!("unexpected: {e}"),
        };
        // nesting a depth-3 record fails
        let depth3_id = store
            .records()
            .find(|(_, r)| r.depth() == 3)
            .map(|(id, _)| *id)
            .unwrap();
        assert!(store.nest(depth3_id, 7).is_err());
        let _ = overflow;
    }

    #[test]
    fn strip_returns_exact_bits_with_internal_provenance() {
        let record =
            MemoryRecord::event(ContextCode::MEMORY, 2, alice_add(), OutputFrame::say(6)).unwrap();
        match strip_memory_tags(&record) {
            Stripped::Frame(pf, out) => {
                assert_eq!(pf.frame.to_bit_string(), alice_add().to_bit_string());
                assert_eq!(pf.provenance, Provenance::Internal);
                assert_eq!(out, OutputFrame::say(6));
            }
            Stripped::Record(_) => panic!("depth-1 strip must yield a frame"),
        }
    }

    #[test]
    fn dump_load_round_trip() {
        let mut store = MemoryStore::new();
        let id = store.store_event(alice_add(), OutputFrame::say(6), 2).unwrap();
        store.store_event(bob_mul(), OutputFrame::write(8), 3).unwrap();
        store.nest(id, 4).unwrap();

        let dump = store.dump();
        let loaded = MemoryStore::load(&dump).unwrap();
        assert_eq!(loaded.clock(), store.clock());
        assert_eq!(loaded.len(), store.len());
        for ((_, a), (_, b)) in store.records().zip(loaded.records()) {
            assert_eq!(a, b);
        }
        assert_eq!(loaded.dump(), dump);
    }

    #[test]
    fn recall_matches_brute_force_scan() {
        let mut store = MemoryStore::new();
        let frames = [alice_add(), bob_mul()];
        for (i, f) in frames.iter().cycle().take(40).enumerate() {
            store
                .store_event(*f, OutputFrame::say(6), i as u32)
                .unwrap();
        }
        let q = Query::context(ContextCode::BOB);
        let got = store.recall(&q);
        let expected: Vec<&MemoryRecord> = store
            .records()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .filter(|(_, r)| q.matches(r.embedded_input()))
            .map(|(_, r)| r)
            .collect();
        assert_eq!(got, expected);
    }
}
