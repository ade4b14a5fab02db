//! Bit-exact encoding, decoding, and validation of tagged data packets.
//!
//! An input frame is 19 bits, most significant bit first, in field order
//!
//! ```text
//! | context (5) | verb (3) | func (3) | op1 (4) | op2 (4) |
//! ```
//!
//! The context header is an opaque registry code; only two bits have fixed
//! meaning: bit 0 (MSB) is the source-present flag and must be 1, bit 1 is
//! the memory flag (0 = reality, 1 = recalled memory). Operands are digits
//! 0–9; `op2` is zero for unary functions. An output frame is 8 bits,
//! `verb (3) | value (5)`, and only verbs `100` (say) and `110` (write)
//! with values 0-31 are well formed; everything else is gated off as
//! malformed, which is one of the two ways a dispatch turns into a null
//! state.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Total serialized width of an input frame in bits.
pub const FRAME_BITS: usize = 19;
/// Width of the context header.
pub const CONTEXT_BITS: usize = 5;
/// Width of the verb field.
pub const VERB_BITS: usize = 3;
/// Width of the function-selector field.
pub const FUNC_BITS: usize = 3;
/// Width of each operand field.
pub const OPERAND_BITS: usize = 4;
/// Serialized width of a well-formed output frame.
pub const OUTPUT_BITS: usize = 8;
/// Maximum value of an operand digit.
pub const MAX_DIGIT: u8 = 9;
/// Maximum value representable in the 5-bit output value field.
pub const MAX_OUTPUT_VALUE: u32 = 31;
/// Deepest permitted memory-record nesting.
pub const MAX_MEMORY_DEPTH: usize = 3;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Frame construction and (de)serialization failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    /// Bit string is not exactly the declared width.
    FrameLength { expected: usize, got: usize },
    /// A character other than '0'/'1' appeared in a bit string.
    BadBitChar(char),
    /// Context header value does not fit in 5 bits or clears the MSB.
    ContextOutOfRange(u8),
    /// The source-present flag (context MSB) is clear.
    SourceFlagClear,
    /// A verb pattern does not fit in 3 bits.
    VerbOutOfRange(u8),
    /// A function selector does not fit in 3 bits.
    FuncOutOfRange(u8),
    /// An operand decoded to a value greater than 9.
    InvalidOperand(u8),
    /// Packed bytes carried nonzero padding bits.
    PaddingNonzero,
    /// Packed byte stream length is not a multiple of the frame stride.
    PackedLength(usize),
    /// Text form did not match the canonical comma-separated layout.
    Text(&'static str),
    /// An output frame field exceeds its serialized width.
    OutputOutOfRange,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::FrameLength { expected, got } => {
                write!(f, "expected {expected} bits, got {got}")
            }
            CodecError::BadBitChar(c) => write!(f, "invalid bit character {c:?}"),
            CodecError::ContextOutOfRange(v) => write!(f, "context code {v:#07b} out of range"),
            CodecError::SourceFlagClear => write!(f, "context source-present flag (MSB) is clear"),
            CodecError::VerbOutOfRange(v) => write!(f, "verb pattern {v} does not fit in 3 bits"),
            CodecError::FuncOutOfRange(v) => write!(f, "func pattern {v} does not fit in 3 bits"),
            CodecError::InvalidOperand(v) => write!(f, "operand {v} exceeds digit range 0-9"),
            CodecError::PaddingNonzero => write!(f, "nonzero padding bits in packed frame"),
            CodecError::PackedLength(n) => write!(f, "packed length {n} not a multiple of 3"),
            CodecError::Text(what) => write!(f, "malformed packet text: {what}"),
            CodecError::OutputOutOfRange => write!(f, "output frame fields exceed 3+5 bits"),
        }
    }
}

impl core::error::Error for CodecError {}

// ---------------------------------------------------------------------------
// Context codes and the registry
// ---------------------------------------------------------------------------

/// A 5-bit context header, MSB first.
///
/// Codes are opaque composites of source, time-epoch, person, and location
/// information; the registry is the only authority on their meaning. The
/// MSB (source-present flag) is 1 for every well-formed code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextCode(u8);

impl ContextCode {
    /// Alice in her original laboratory: `10000`.
    pub const ALICE_LAB: ContextCode = ContextCode(0b10000);
    /// A new person at a new location: `10101`.
    pub const NOVEL: ContextCode = ContextCode(0b10101);
    /// Bob testing the machine: `10110`.
    pub const BOB: ContextCode = ContextCode(0b10110);
    /// A photograph of Alice: `10100`.
    pub const ALICE_PHOTO: ContextCode = ContextCode(0b10100);
    /// Memory wrapper header: `11010`.
    pub const MEMORY: ContextCode = ContextCode(0b11010);
    /// Alice at a second training location: `10001`.
    pub const ALICE_LAB_2: ContextCode = ContextCode(0b10001);
    /// Alice at a third training location: `10010`.
    pub const ALICE_LAB_3: ContextCode = ContextCode(0b10010);

    /// Builds a context code, enforcing the 5-bit width and the
    /// source-present flag.
    pub fn new(bits: u8) -> Result<Self, CodecError> {
        if bits >= 1 << CONTEXT_BITS {
            return Err(CodecError::ContextOutOfRange(bits));
        }
        if bits & 0b10000 == 0 {
            return Err(CodecError::SourceFlagClear);
        }
        Ok(ContextCode(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Bit 1 of the header: set for recalled-memory packets.
    pub fn is_memory(self) -> bool {
        self.0 & 0b01000 != 0
    }

    /// Reality-sourced (memory flag clear).
    pub fn is_reality(self) -> bool {
        !self.is_memory()
    }

    /// Five-character bit string, MSB first.
    pub fn bit_string(self) -> String {
        bits_to_string(self.0 as u32, CONTEXT_BITS)
    }

    pub fn from_bit_string(s: &str) -> Result<Self, CodecError> {
        let v = parse_bits(s, CONTEXT_BITS)?;
        ContextCode::new(v as u8)
    }
}

impl fmt::Display for ContextCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

/// One registry row binding a semantic label to a context code.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub label: String,
    pub code: ContextCode,
    /// Fixed entries are immutable and cannot be shadowed.
    pub fixed: bool,
}

/// Registry failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryError {
    DuplicateLabel(String),
    /// The registry is injective on bits; a code may carry only one label.
    DuplicateCode(ContextCode),
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::DuplicateLabel(l) => write!(f, "label {l:?} already registered"),
            RegistryError::DuplicateCode(c) => write!(f, "code {c} already registered"),
        }
    }
}

impl core::error::Error for RegistryError {}

/// Mapping from semantic environment descriptions to context codes.
///
/// The standard registry carries the fixed entries; callers may register
/// additional codes (for example extra training locations) but can never
/// replace a fixed one.
#[derive(Debug, Clone)]
pub struct ContextRegistry {
    entries: Vec<RegistryEntry>,
}

impl ContextRegistry {
    /// The fixed registry: Alice's laboratory, the changed environment,
    /// Bob, the photograph of Alice, and the memory wrapper.
    pub fn standard() -> Self {
        let fixed = [
            ("alice-lab", ContextCode::ALICE_LAB),
            ("novel", ContextCode::NOVEL),
            ("bob", ContextCode::BOB),
            ("alice-photo", ContextCode::ALICE_PHOTO),
            ("memory", ContextCode::MEMORY),
        ];
        ContextRegistry {
            entries: fixed
                .iter()
                .map(|(label, code)| RegistryEntry {
                    label: (*label).to_owned(),
                    code: *code,
                    fixed: true,
                })
                .collect(),
        }
    }

    pub fn register(&mut self, label: &str, code: ContextCode) -> Result<(), RegistryError> {
        if self.entries.iter().any(|e| e.label == label) {
            return Err(RegistryError::DuplicateLabel(label.to_owned()));
        }
        if self.entries.iter().any(|e| e.code == code) {
            return Err(RegistryError::DuplicateCode(code));
        }
        self.entries.push(RegistryEntry {
            label: label.to_owned(),
            code,
            fixed: false,
        });
        Ok(())
    }

    pub fn code(&self, label: &str) -> Option<ContextCode> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.code)
    }

    pub fn label(&self, code: ContextCode) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.code == code)
            .map(|e| e.label.as_str())
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }
}

impl Default for ContextRegistry {
    fn default() -> Self {
        ContextRegistry::standard()
    }
}

// ---------------------------------------------------------------------------
// Verb and function selectors
// ---------------------------------------------------------------------------

/// A 3-bit verb pattern. Only [`VerbCode::SAY`] and [`VerbCode::WRITE`]
/// are well formed; any other pattern decodes but is rejected by the
/// output gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerbCode(u8);

impl VerbCode {
    /// `100`, decimal 4.
    pub const SAY: VerbCode = VerbCode(0b100);
    /// `110`, decimal 6.
    pub const WRITE: VerbCode = VerbCode(0b110);

    pub fn new(bits: u8) -> Result<Self, CodecError> {
        if bits >= 1 << VERB_BITS {
            return Err(CodecError::VerbOutOfRange(bits));
        }
        Ok(VerbCode(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_well_formed(self) -> bool {
        self == VerbCode::SAY || self == VerbCode::WRITE
    }

    pub fn bit_string(self) -> String {
        bits_to_string(self.0 as u32, VERB_BITS)
    }

    pub fn label(self) -> &'static str {
        match self {
            VerbCode::SAY => "say",
            VerbCode::WRITE => "write",
            _ => "?",
        }
    }
}

impl fmt::Display for VerbCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

/// A 3-bit function selector.
///
/// The square selector is `111`; the four arithmetic selectors are
/// distinct, nonzero, and different from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FuncCode(u8);

impl FuncCode {
    pub const ADD: FuncCode = FuncCode(0b001);
    pub const SUB: FuncCode = FuncCode(0b010);
    pub const MUL: FuncCode = FuncCode(0b011);
    pub const DIV: FuncCode = FuncCode(0b101);
    /// `111`, decimal 7.
    pub const SQUARE: FuncCode = FuncCode(0b111);

    pub fn new(bits: u8) -> Result<Self, CodecError> {
        if bits >= 1 << FUNC_BITS {
            return Err(CodecError::FuncOutOfRange(bits));
        }
        Ok(FuncCode(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn bit_string(self) -> String {
        bits_to_string(self.0 as u32, FUNC_BITS)
    }

    pub fn label(self) -> &'static str {
        match self {
            FuncCode::ADD => "+",
            FuncCode::SUB => "-",
            FuncCode::MUL => "*",
            FuncCode::DIV => "/",
            FuncCode::SQUARE => "n^2",
            _ => "?",
        }
    }
}

impl fmt::Display for FuncCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string())
    }
}

// ---------------------------------------------------------------------------
// Frame slices
// ---------------------------------------------------------------------------

/// The five fields of an input frame, in serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameField {
    Context,
    Verb,
    Func,
    Op1,
    Op2,
}

impl FrameField {
    pub const ALL: [FrameField; 5] = [
        FrameField::Context,
        FrameField::Verb,
        FrameField::Func,
        FrameField::Op1,
        FrameField::Op2,
    ];

    pub fn width(self) -> usize {
        match self {
            FrameField::Context => CONTEXT_BITS,
            FrameField::Verb => VERB_BITS,
            FrameField::Func => FUNC_BITS,
            FrameField::Op1 | FrameField::Op2 => OPERAND_BITS,
        }
    }

    fn token(self) -> &'static str {
        match self {
            FrameField::Context => "context",
            FrameField::Verb => "verb",
            FrameField::Func => "func",
            FrameField::Op1 => "op1",
            FrameField::Op2 => "op2",
        }
    }
}

/// Slice-descriptor construction failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SliceError {
    Empty,
    /// Fields must appear in frame order, without repeats.
    OutOfOrder,
    /// Every learned-name slice is anchored at the context header.
    MissingContext,
    /// Unknown token in a textual descriptor.
    UnknownField(String),
}

impl fmt::Display for SliceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceError::Empty => write!(f, "slice selects no fields"),
            SliceError::OutOfOrder => write!(f, "slice fields repeated or out of frame order"),
            SliceError::MissingContext => write!(f, "slice does not start at the context header"),
            SliceError::UnknownField(t) => write!(f, "unknown slice field {t:?}"),
        }
    }
}

impl core::error::Error for SliceError {}

/// A name-length descriptor: which frame fields a learned-function name
/// (or numeric key) covers. Selected fields are concatenated in frame
/// order, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameSlice {
    fields: u8, // bit i set selects FrameField::ALL[i]
}

impl FrameSlice {
    /// Context header alone (5 bits).
    pub const CONTEXT: FrameSlice = FrameSlice { fields: 0b00001 };
    /// Context + verb (8 bits): the verb-map key of the worked example.
    pub const CONTEXT_VERB: FrameSlice = FrameSlice { fields: 0b00011 };
    /// Context + verb + func (11 bits): composite operator names.
    pub const CONTEXT_VERB_FUNC: FrameSlice = FrameSlice { fields: 0b00111 };
    /// Context + func + op1 (12 bits): the square-map key.
    pub const CONTEXT_FUNC_OP1: FrameSlice = FrameSlice { fields: 0b01101 };
    /// All five fields (19 bits).
    pub const FULL: FrameSlice = FrameSlice { fields: 0b11111 };

    /// Builds a slice from fields listed in frame order.
    pub fn new(fields: &[FrameField]) -> Result<Self, SliceError> {
        if fields.is_empty() {
            return Err(SliceError::Empty);
        }
        let mut mask = 0u8;
        let mut last: Option<FrameField> = None;
        for &field in fields {
            if let Some(prev) = last {
                if field <= prev {
                    return Err(SliceError::OutOfOrder);
                }
            }
            mask |= 1 << field as u8;
            last = Some(field);
        }
        if mask & 1 == 0 {
            return Err(SliceError::MissingContext);
        }
        Ok(FrameSlice { fields: mask })
    }

    pub fn contains(self, field: FrameField) -> bool {
        self.fields & (1 << field as u8) != 0
    }

    pub fn fields(self) -> impl Iterator<Item = FrameField> {
        FrameField::ALL
            .into_iter()
            .filter(move |f| self.fields & (1 << *f as u8) != 0)
    }

    /// Total width in bits of the selected fields.
    pub fn width(self) -> usize {
        self.fields().map(FrameField::width).sum()
    }

    /// Textual descriptor, e.g. `context+func+op1`.
    pub fn descriptor(self) -> String {
        let mut s = String::new();
        for field in self.fields() {
            if !s.is_empty() {
                s.push('+');
            }
            s.push_str(field.token());
        }
        s
    }

    pub fn parse_descriptor(s: &str) -> Result<Self, SliceError> {
        let mut fields = Vec::new();
        for token in s.split('+') {
            let field = FrameField::ALL
                .into_iter()
                .find(|f| f.token() == token)
                .ok_or_else(|| SliceError::UnknownField(token.to_owned()))?;
            fields.push(field);
        }
        FrameSlice::new(&fields)
    }
}

// ---------------------------------------------------------------------------
// Input frames
// ---------------------------------------------------------------------------

/// A tagged data packet: context header, verb, function selector, and two
/// operand digits (`op2` is `0000` for unary functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputFrame {
    pub context: ContextCode,
    pub verb: VerbCode,
    pub func: FuncCode,
    pub op1: u8,
    pub op2: u8,
}

impl InputFrame {
    pub fn new(
        context: ContextCode,
        verb: VerbCode,
        func: FuncCode,
        op1: u8,
        op2: u8,
    ) -> Result<Self, CodecError> {
        if op1 > MAX_DIGIT {
            return Err(CodecError::InvalidOperand(op1));
        }
        if op2 > MAX_DIGIT {
            return Err(CodecError::InvalidOperand(op2));
        }
        Ok(InputFrame {
            context,
            verb,
            func,
            op1,
            op2,
        })
    }

    /// Replaces the context header, keeping every other bit.
    pub fn with_context(mut self, context: ContextCode) -> Self {
        self.context = context;
        self
    }

    /// Field bits concatenated in declared order, MSB first.
    pub fn to_bits(&self) -> [bool; FRAME_BITS] {
        let mut bits = [false; FRAME_BITS];
        let mut at = 0;
        for (value, width) in [
            (self.context.bits() as u32, CONTEXT_BITS),
            (self.verb.bits() as u32, VERB_BITS),
            (self.func.bits() as u32, FUNC_BITS),
            (self.op1 as u32, OPERAND_BITS),
            (self.op2 as u32, OPERAND_BITS),
        ] {
            for i in 0..width {
                bits[at + i] = value & (1 << (width - 1 - i)) != 0;
            }
            at += width;
        }
        bits
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, CodecError> {
        if bits.len() != FRAME_BITS {
            return Err(CodecError::FrameLength {
                expected: FRAME_BITS,
                got: bits.len(),
            });
        }
        let read = |start: usize, width: usize| -> u8 {
            bits[start..start + width]
                .iter()
                .fold(0u8, |acc, &b| (acc << 1) | b as u8)
        };
        let context = ContextCode::new(read(0, CONTEXT_BITS))?;
        let verb = VerbCode::new(read(5, VERB_BITS))?;
        let func = FuncCode::new(read(8, FUNC_BITS))?;
        let op1 = read(11, OPERAND_BITS);
        let op2 = read(15, OPERAND_BITS);
        InputFrame::new(context, verb, func, op1, op2)
    }

    /// Encodes the frame as a 19-character bit string.
    pub fn to_bit_string(&self) -> String {
        self.to_bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Decodes a 19-character bit string; the exact inverse of
    /// [`InputFrame::to_bit_string`].
    pub fn from_bit_string(s: &str) -> Result<Self, CodecError> {
        let bits = string_to_bits(s, FRAME_BITS)?;
        InputFrame::from_bits(&bits)
    }

    /// Canonical comma-separated text, e.g. `10000,100,111,0010,0000`.
    pub fn canonical_text(&self) -> String {
        let mut s = String::with_capacity(FRAME_BITS + 4);
        s.push_str(&self.context.bit_string());
        s.push(',');
        s.push_str(&self.verb.bit_string());
        s.push(',');
        s.push_str(&self.func.bit_string());
        s.push(',');
        s.push_str(&bits_to_string(self.op1 as u32, OPERAND_BITS));
        s.push(',');
        s.push_str(&bits_to_string(self.op2 as u32, OPERAND_BITS));
        s
    }

    pub fn from_canonical_text(s: &str) -> Result<Self, CodecError> {
        let mut parts = s.split(',');
        let mut next = |width: usize| -> Result<u32, CodecError> {
            let part = parts.next().ok_or(CodecError::Text("missing field"))?;
            parse_bits(part, width)
        };
        let context = ContextCode::new(next(CONTEXT_BITS)? as u8)?;
        let verb = VerbCode::new(next(VERB_BITS)? as u8)?;
        let func = FuncCode::new(next(FUNC_BITS)? as u8)?;
        let op1 = next(OPERAND_BITS)? as u8;
        let op2 = next(OPERAND_BITS)? as u8;
        if parts.next().is_some() {
            return Err(CodecError::Text("trailing field"));
        }
        InputFrame::new(context, verb, func, op1, op2)
    }

    /// The unsigned integer value of the selected fields, MSB first: the
    /// decimal key a learned function consumes. For the worked frames,
    /// context+verb gives 132/134/172 and context+func+op1 gives 2160+n
    /// and 2802.
    pub fn slice_key(&self, slice: FrameSlice) -> u32 {
        let mut key = 0u32;
        for field in slice.fields() {
            let (value, width) = match field {
                FrameField::Context => (self.context.bits() as u32, CONTEXT_BITS),
                FrameField::Verb => (self.verb.bits() as u32, VERB_BITS),
                FrameField::Func => (self.func.bits() as u32, FUNC_BITS),
                FrameField::Op1 => (self.op1 as u32, OPERAND_BITS),
                FrameField::Op2 => (self.op2 as u32, OPERAND_BITS),
            };
            key = (key << width) | value;
        }
        key
    }
}

impl fmt::Display for InputFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

// ---------------------------------------------------------------------------
// Packed binary form
// ---------------------------------------------------------------------------

/// Bytes per frame in the packed binary form: 19 bits plus 5 zero pad bits.
pub const PACKED_FRAME_BYTES: usize = 3;

/// Packs frames MSB-first, one frame per 3 bytes.
pub fn pack_frames(frames: &[InputFrame]) -> Vec<u8> {
    let mut out = Vec::with_capacity(frames.len() * PACKED_FRAME_BYTES);
    for frame in frames {
        let bits = frame.to_bits();
        let mut bytes = [0u8; PACKED_FRAME_BYTES];
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                bytes[i / 8] |= 1 << (7 - i % 8);
            }
        }
        out.extend_from_slice(&bytes);
    }
    out
}

/// Inverse of [`pack_frames`]; rejects nonzero padding.
pub fn unpack_frames(bytes: &[u8]) -> Result<Vec<InputFrame>, CodecError> {
    if !bytes.len().is_multiple_of(PACKED_FRAME_BYTES) {
        return Err(CodecError::PackedLength(bytes.len()));
    }
    let mut frames = Vec::with_capacity(bytes.len() / PACKED_FRAME_BYTES);
    for chunk in bytes.chunks_exact(PACKED_FRAME_BYTES) {
        if chunk[2] & 0b0001_1111 != 0 {
            return Err(CodecError::PaddingNonzero);
        }
        let mut bits = [false; FRAME_BITS];
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = chunk[i / 8] & (1 << (7 - i % 8)) != 0;
        }
        frames.push(InputFrame::from_bits(&bits)?);
    }
    Ok(frames)
}

// ---------------------------------------------------------------------------
// Output frames and the well-formedness gate
// ---------------------------------------------------------------------------

/// An output candidate: a verb pattern and a value.
///
/// Fields are wider than their serialized widths on purpose: learned maps
/// driven out of domain produce values like verb 44 or value 412164, and
/// the gate must be able to inspect them. Only well-formed frames have an
/// 8-bit serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutputFrame {
    pub verb: u32,
    pub value: u32,
}

impl OutputFrame {
    pub fn new(verb: u32, value: u32) -> Self {
        OutputFrame { verb, value }
    }

    pub fn say(value: u32) -> Self {
        OutputFrame::new(VerbCode::SAY.bits() as u32, value)
    }

    pub fn write(value: u32) -> Self {
        OutputFrame::new(VerbCode::WRITE.bits() as u32, value)
    }

    /// 8-bit serialization `verb|value`; `None` when a field overflows its
    /// width (such frames are necessarily malformed).
    pub fn to_bits(&self) -> Option<[bool; OUTPUT_BITS]> {
        if self.verb >= 1 << VERB_BITS || self.value >= 1 << (OUTPUT_BITS - VERB_BITS) {
            return None;
        }
        let mut bits = [false; OUTPUT_BITS];
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = if i < VERB_BITS {
                self.verb & (1 << (VERB_BITS - 1 - i)) != 0
            } else {
                self.value & (1 << (OUTPUT_BITS - 1 - i)) != 0
            };
        }
        Some(bits)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, CodecError> {
        if bits.len() != OUTPUT_BITS {
            return Err(CodecError::FrameLength {
                expected: OUTPUT_BITS,
                got: bits.len(),
            });
        }
        let verb = bits[..VERB_BITS]
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | b as u32);
        let value = bits[VERB_BITS..]
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(OutputFrame { verb, value })
    }

    /// Canonical text `100,00100`; `None` when not serializable.
    pub fn canonical_text(&self) -> Option<String> {
        self.to_bits().map(|_| {
            let mut s = bits_to_string(self.verb, VERB_BITS);
            s.push(',');
            s.push_str(&bits_to_string(self.value, OUTPUT_BITS - VERB_BITS));
            s
        })
    }

    pub fn from_canonical_text(s: &str) -> Result<Self, CodecError> {
        let (verb, value) = s.split_once(',').ok_or(CodecError::Text("missing comma"))?;
        Ok(OutputFrame {
            verb: parse_bits(verb, VERB_BITS)?,
            value: parse_bits(value, OUTPUT_BITS - VERB_BITS)?,
        })
    }
}

/// Why an output frame failed the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MalformedReason {
    /// The verb pattern cannot activate any output mechanism.
    BadVerb,
    /// The value does not fit the 5-bit output field.
    Overflow,
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MalformedReason::BadVerb => write!(f, "bad-verb"),
            MalformedReason::Overflow => write!(f, "overflow"),
        }
    }
}

/// Gate verdict for an output candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputCheck {
    WellFormed,
    Malformed(MalformedReason),
}

impl OutputCheck {
    pub fn is_well_formed(self) -> bool {
        matches!(self, OutputCheck::WellFormed)
    }
}

/// The well-formedness gate: accepts exactly the 2 × 32 frames whose verb
/// is say/write and whose value fits in 5 bits. Verb is checked first, so
/// a frame that is bad on both counts reports `bad-verb`.
pub fn validate_output(out: &OutputFrame) -> OutputCheck {
    if out.verb != VerbCode::SAY.bits() as u32 && out.verb != VerbCode::WRITE.bits() as u32 {
        return OutputCheck::Malformed(MalformedReason::BadVerb);
    }
    if out.value > MAX_OUTPUT_VALUE {
        return OutputCheck::Malformed(MalformedReason::Overflow);
    }
    OutputCheck::WellFormed
}

// ---------------------------------------------------------------------------
// Memory records
// ---------------------------------------------------------------------------

/// Nesting and event-construction failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    /// The wrapper header must carry the memory flag.
    HeaderNotMemory(ContextCode),
    /// Nesting beyond [`MAX_MEMORY_DEPTH`].
    DepthOverflow,
    /// Stored events keep only well-formed outputs.
    MalformedEventOutput,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::HeaderNotMemory(c) => write!(f, "header {c} lacks the memory flag"),
            RecordError::DepthOverflow => write!(f, "nesting deeper than {MAX_MEMORY_DEPTH}"),
            RecordError::MalformedEventOutput => write!(f, "event output is not well formed"),
        }
    }
}

impl core::error::Error for RecordError {}

/// Body of a memory record: either a remembered event or a memory of a
/// memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemoryBody {
    Event {
        input: InputFrame,
        output: OutputFrame,
    },
    Nested(Box<MemoryRecord>),
}

/// A memory-tagged copy of a past event, nestable to depth 3.
///
/// `time` is the epoch the wrapper was created (the recall/storage time);
/// the wrapped event keeps its own original bits untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryRecord {
    header: ContextCode,
    time: u32,
    body: MemoryBody,
}

impl MemoryRecord {
    /// Wraps an event as a depth-1 record.
    pub fn event(
        header: ContextCode,
        time: u32,
        input: InputFrame,
        output: OutputFrame,
    ) -> Result<Self, RecordError> {
        if !header.is_memory() {
            return Err(RecordError::HeaderNotMemory(header));
        }
        if !validate_output(&output).is_well_formed() {
            return Err(RecordError::MalformedEventOutput);
        }
        Ok(MemoryRecord {
            header,
            time,
            body: MemoryBody::Event { input, output },
        })
    }

    /// Wraps an existing record one level deeper.
    pub fn nested(header: ContextCode, time: u32, inner: MemoryRecord) -> Result<Self, RecordError> {
        if !header.is_memory() {
            return Err(RecordError::HeaderNotMemory(header));
        }
        if inner.depth() >= MAX_MEMORY_DEPTH {
            return Err(RecordError::DepthOverflow);
        }
        Ok(MemoryRecord {
            header,
            time,
            body: MemoryBody::Nested(Box::new(inner)),
        })
    }

    pub fn header(&self) -> ContextCode {
        self.header
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn body(&self) -> &MemoryBody {
        &self.body
    }

    /// Nesting level: 1 for a wrapped event, inner + 1 otherwise.
    pub fn depth(&self) -> usize {
        match &self.body {
            MemoryBody::Event { .. } => 1,
            MemoryBody::Nested(inner) => inner.depth() + 1,
        }
    }

    /// The innermost remembered input frame.
    pub fn embedded_input(&self) -> &InputFrame {
        match &self.body {
            MemoryBody::Event { input, .. } => input,
            MemoryBody::Nested(inner) => inner.embedded_input(),
        }
    }

    /// The innermost remembered output.
    pub fn embedded_output(&self) -> &OutputFrame {
        match &self.body {
            MemoryBody::Event { output, .. } => output,
            MemoryBody::Nested(inner) => inner.embedded_output(),
        }
    }

    /// Display form without epochs, e.g.
    /// `[11010(10000,100,111,0010,0000->100,00100)]`.
    pub fn canonical_text(&self) -> String {
        self.render(false)
    }

    /// Lossless dump form with epochs, e.g. `[11010@2(...)]`.
    pub fn dump_text(&self) -> String {
        self.render(true)
    }

    fn render(&self, with_epoch: bool) -> String {
        let mut s = String::new();
        s.push('[');
        s.push_str(&self.header.bit_string());
        if with_epoch {
            s.push('@');
            push_u32(&mut s, self.time);
        }
        s.push('(');
        match &self.body {
            MemoryBody::Event { input, output } => {
                s.push_str(&input.canonical_text());
                s.push_str("->");
                // Stored events are constructed well formed.
                s.push_str(&output.canonical_text().unwrap_or_default());
            }
            MemoryBody::Nested(inner) => s.push_str(&inner.render(with_epoch)),
        }
        s.push_str(")]");
        s
    }

    /// Parses the dump form produced by [`MemoryRecord::dump_text`].
    pub fn from_dump_text(s: &str) -> Result<Self, CodecError> {
        let (record, rest) = Self::parse_inner(s)?;
        if !rest.is_empty() {
            return Err(CodecError::Text("trailing characters after record"));
        }
        Ok(record)
    }

    fn parse_inner(s: &str) -> Result<(Self, &str), CodecError> {
        let s = s.strip_prefix('[').ok_or(CodecError::Text("expected '['"))?;
        let at = s.find('@').ok_or(CodecError::Text("expected '@epoch'"))?;
        let header = ContextCode::from_bit_string(&s[..at])?;
        let s = &s[at + 1..];
        let paren = s.find('(').ok_or(CodecError::Text("expected '('"))?;
        let time: u32 = s[..paren]
            .parse()
            .map_err(|_| CodecError::Text("bad epoch"))?;
        let s = &s[paren + 1..];
        if s.starts_with('[') {
            let (inner, rest) = Self::parse_inner(s)?;
            let rest = rest
                .strip_prefix(")]")
                .ok_or(CodecError::Text("expected ')]'"))?;
            let record = MemoryRecord::nested(header, time, inner)
                .map_err(|_| CodecError::Text("invalid nesting"))?;
            Ok((record, rest))
        } else {
            let end = s.find(")]").ok_or(CodecError::Text("expected ')]'"))?;
            let (input_text, output_text) = s[..end]
                .split_once("->")
                .ok_or(CodecError::Text("expected '->'"))?;
            let input = InputFrame::from_canonical_text(input_text)?;
            let output = OutputFrame::from_canonical_text(output_text)?;
            let record = MemoryRecord::event(header, time, input, output)
                .map_err(|_| CodecError::Text("invalid event record"))?;
            Ok((record, &s[end + 2..]))
        }
    }
}

impl fmt::Display for MemoryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

// ---------------------------------------------------------------------------
// Bit-string helpers
// ---------------------------------------------------------------------------

fn bits_to_string(value: u32, width: usize) -> String {
    (0..width)
        .map(|i| {
            if value & (1 << (width - 1 - i)) != 0 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn parse_bits(s: &str, width: usize) -> Result<u32, CodecError> {
    let bits = string_to_bits(s, width)?;
    Ok(bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
}

fn string_to_bits(s: &str, width: usize) -> Result<Vec<bool>, CodecError> {
    if s.chars().count() != width {
        return Err(CodecError::FrameLength {
            expected: width,
            got: s.chars().count(),
        });
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CodecError::BadBitChar(other)),
        })
        .collect()
}

fn push_u32(s: &mut String, v: u32) {
    use core::fmt::Write;
    let _ = write!(s, "{v}");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn say_square_2() -> InputFrame {
        InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::SQUARE, 2, 0).unwrap()
    }

    #[test]
    fn encode_worked_square_frame() {
        assert_eq!(say_square_2().to_bit_string(), "1000010011100100000");
        assert_eq!(say_square_2().canonical_text(), "10000,100,111,0010,0000");
    }

    #[test]
    fn encode_zero_operands_tail() {
        let f = InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::ADD, 0, 0).unwrap();
        let s = f.to_bit_string();
        assert_eq!(s.len(), FRAME_BITS);
        assert!(s.ends_with("00000000"));
    }

    #[test]
    fn decode_worked_square_frame() {
        let f = InputFrame::from_bit_string("1000010011100100000").unwrap();
        assert_eq!(f, say_square_2());
        assert_eq!(f.op2, 0);
    }

    #[test]
    fn decode_rejects_clear_source_flag() {
        let err = InputFrame::from_bit_string("0000000000000000000").unwrap_err();
        assert_eq!(err, CodecError::SourceFlagClear);
    }

    #[test]
    fn decode_rejects_wrong_length_and_bad_operand() {
        assert!(matches!(
            InputFrame::from_bit_string("101"),
            Err(CodecError::FrameLength { expected: 19, got: 3 })
        ));
        // op1 = 1111 = 15 > 9
        assert_eq!(
            InputFrame::from_bit_string("1000010011111110000"),
            Err(CodecError::InvalidOperand(15))
        );
        assert_eq!(InputFrame::new(ContextCode::BOB, VerbCode::SAY, FuncCode::ADD, 12, 0),
            Err(CodecError::InvalidOperand(12)));
    }

    #[test]
    fn round_trip_write_frame() {
        let f = InputFrame::new(ContextCode::BOB, VerbCode::WRITE, FuncCode::SQUARE, 9, 0).unwrap();
        assert_eq!(InputFrame::from_bit_string(&f.to_bit_string()).unwrap(), f);
        assert_eq!(InputFrame::from_canonical_text(&f.canonical_text()).unwrap(), f);
    }

    #[test]
    fn slice_keys_match_hand_computed_values() {
        let alice = say_square_2();
        assert_eq!(alice.slice_key(FrameSlice::CONTEXT_VERB), 132);
        assert_eq!(alice.slice_key(FrameSlice::CONTEXT_FUNC_OP1), 2162);

        let write = InputFrame::new(ContextCode::ALICE_LAB, VerbCode::WRITE, FuncCode::SQUARE, 2, 0)
            .unwrap();
        assert_eq!(write.slice_key(FrameSlice::CONTEXT_VERB), 134);

        let moved = say_square_2().with_context(ContextCode::NOVEL);
        assert_eq!(moved.slice_key(FrameSlice::CONTEXT_VERB), 172);
        assert_eq!(moved.slice_key(FrameSlice::CONTEXT_FUNC_OP1), 2802);
    }

    #[test]
    fn slice_key_square_base_offset() {
        for n in 0..=MAX_DIGIT {
            let f =
                InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::SQUARE, n, 0)
                    .unwrap();
            assert_eq!(f.slice_key(FrameSlice::CONTEXT_FUNC_OP1), 2160 + n as u32);
        }
    }

    #[test]
    fn slice_construction_errors() {
        assert_eq!(FrameSlice::new(&[]), Err(SliceError::Empty));
        assert_eq!(
            FrameSlice::new(&[FrameField::Verb, FrameField::Context]),
            Err(SliceError::OutOfOrder)
        );
        assert_eq!(
            FrameSlice::new(&[FrameField::Verb, FrameField::Func]),
            Err(SliceError::MissingContext)
        );
        let s = FrameSlice::new(&[FrameField::Context, FrameField::Func, FrameField::Op1]).unwrap();
        assert_eq!(s, FrameSlice::CONTEXT_FUNC_OP1);
        assert_eq!(s.width(), 12);
        assert_eq!(s.descriptor(), "context+func+op1");
        assert_eq!(FrameSlice::parse_descriptor("context+func+op1").unwrap(), s);
    }

    #[test]
    fn gate_accepts_say_four() {
        assert!(validate_output(&OutputFrame::say(4)).is_well_formed());
        assert_eq!(OutputFrame::say(4).canonical_text().unwrap(), "100,00100");
    }

    #[test]
    fn gate_rejects_bad_verb_and_overflow() {
        // f_verb(172) = 44 = 101100, not a verb
        assert_eq!(
            validate_output(&OutputFrame::new(44, 4)),
            OutputCheck::Malformed(MalformedReason::BadVerb)
        );
        // 642^2 = 412164 overflows the 5-bit value field
        assert_eq!(
            validate_output(&OutputFrame::say(412164)),
            OutputCheck::Malformed(MalformedReason::Overflow)
        );
        // bad on both counts reports the verb first
        assert_eq!(
            validate_output(&OutputFrame::new(0, 412164)),
            OutputCheck::Malformed(MalformedReason::BadVerb)
        );
    }

    #[test]
    fn gate_accepts_exactly_64_bit_patterns() {
        let mut accepted = 0;
        for pattern in 0u32..256 {
            let bits: Vec<bool> = (0..8).map(|i| pattern & (1 << (7 - i)) != 0).collect();
            let frame = OutputFrame::from_bits(&bits).unwrap();
            if validate_output(&frame).is_well_formed() {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 64);
    }

    #[test]
    fn registry_fixed_entries() {
        let reg = ContextRegistry::standard();
        assert_eq!(reg.code("alice-lab").unwrap().bits(), 0b10000);
        assert_eq!(reg.code("novel").unwrap().bits(), 0b10101);
        assert_eq!(reg.code("bob").unwrap().bits(), 0b10110);
        assert_eq!(reg.code("alice-photo").unwrap().bits(), 0b10100);
        assert_eq!(reg.code("memory").unwrap().bits(), 0b11010);
        assert_eq!(reg.label(ContextCode::ALICE_LAB).unwrap(), "alice-lab");
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = ContextRegistry::standard();
        reg.register("alice-lab-2", ContextCode::ALICE_LAB_2).unwrap();
        assert_eq!(
            reg.register("alice-lab-2", ContextCode::ALICE_LAB_3),
            Err(RegistryError::DuplicateLabel("alice-lab-2".into()))
        );
        assert_eq!(
            reg.register("shadow", ContextCode::ALICE_LAB),
            Err(RegistryError::DuplicateCode(ContextCode::ALICE_LAB))
        );
    }

    #[test]
    fn memory_flag_follows_bit_one() {
        assert!(ContextCode::MEMORY.is_memory());
        assert!(ContextCode::ALICE_LAB.is_reality());
        assert!(ContextCode::BOB.is_reality());
    }

    #[test]
    fn memory_record_nesting_and_text() {
        let input =
            InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::ADD, 4, 2).unwrap();
        let r1 = MemoryRecord::event(ContextCode::MEMORY, 2, input, OutputFrame::say(6)).unwrap();
        assert_eq!(r1.depth(), 1);
        assert_eq!(
            r1.canonical_text(),
            "[11010(10000,100,001,0100,0010->100,00110)]"
        );

        let r2 = MemoryRecord::nested(ContextCode::MEMORY, 3, r1.clone()).unwrap();
        assert_eq!(r2.depth(), 2);
        assert_eq!(r2.embedded_input(), &input);

        let r3 = MemoryRecord::nested(ContextCode::MEMORY, 4, r2.clone()).unwrap();
        assert_eq!(r3.depth(), 3);
        assert_eq!(
            MemoryRecord::nested(ContextCode::MEMORY, 5, r3.clone()),
            Err(RecordError::DepthOverflow)
        );

        let dumped = r3.dump_text();
        assert_eq!(MemoryRecord::from_dump_text(&dumped).unwrap(), r3);
    }

    #[test]
    fn memory_record_canonical_square_packet() {
        let record = MemoryRecord::event(
            ContextCode::MEMORY,
            2,
            say_square_2(),
            OutputFrame::say(4),
        )
        .unwrap();
        assert_eq!(
            record.canonical_text(),
            "[11010(10000,100,111,0010,0000->100,00100)]"
        );
    }

    #[test]
    fn memory_record_requires_memory_header() {
        let input =
            InputFrame::new(ContextCode::ALICE_LAB, VerbCode::SAY, FuncCode::ADD, 4, 2).unwrap();
        assert!(matches!(
            MemoryRecord::event(ContextCode::ALICE_LAB, 2, input, OutputFrame::say(6)),
            Err(RecordError::HeaderNotMemory(_))
        ));
    }

    #[test]
    fn packed_frames_round_trip_and_reject_bad_padding() {
        let frames = [
            say_square_2(),
            InputFrame::new(ContextCode::BOB, VerbCode::WRITE, FuncCode::MUL, 4, 2).unwrap(),
        ];
        let bytes = pack_frames(&frames);
        assert_eq!(bytes.len(), 6);
        assert_eq!(unpack_frames(&bytes).unwrap(), frames);

        let mut bad = bytes.clone();
        bad[2] |= 1;
        assert_eq!(unpack_frames(&bad), Err(CodecError::PaddingNonzero));
        assert_eq!(unpack_frames(&bytes[..4]), Err(CodecError::PackedLength(4)));
    }
}
