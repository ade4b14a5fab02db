//! The reference learned machine: a dispatch table of named functions.
//!
//! Every learned function has a *name* (a pattern/mask pair over a slice
//! of the input frame) and a numeric map. Environmental information can
//! leak into a function along two distinct routes, and each produces its
//! own flavor of null state:
//!
//! * **name masks** that require person or location context bits: when the
//!   environment changes, the name no longer matches and the function
//!   cannot be called at all (`no-matching-name`);
//! * **numeric keys** that fold the whole name slice into the map's
//!   domain, `f_verb(k) = k − 128` style: the function still fires on a
//!   changed context but extrapolates to garbage that the output gate
//!   rejects (`malformed-output`).
//!
//! [`build_table`] constructs scenario tables with a requested mask
//! structure; [`context_keyed_table`] builds the two-entry machine whose
//! keys absorbed the training context, reproducing the worked
//! 132→4 / 172→44 / 2162→4 / 2802→412164 failure chain.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::codec::{
    validate_output, CodecError, ContextCode, FrameSlice, FuncCode, InputFrame, MalformedReason,
    OutputCheck, OutputFrame, SliceError, VerbCode, CONTEXT_BITS,
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Out-of-domain key for a slice-keyed decimal map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyUnderflow {
    pub key: u32,
    pub min: u32,
}

impl fmt::Display for KeyUnderflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "key {} below map domain floor {}", self.key, self.min)
    }
}

impl core::error::Error for KeyUnderflow {}

/// Arithmetic failures on the operand digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithError {
    DivByZero,
    /// Subtraction below zero; the unsigned output field cannot hold it.
    NegativeResult,
}

impl fmt::Display for ArithError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithError::DivByZero => write!(f, "division by zero"),
            ArithError::NegativeResult => write!(f, "negative result"),
        }
    }
}

impl core::error::Error for ArithError {}

/// Name or entry construction failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryError {
    /// `pattern & !mask` must be zero.
    PatternOutsideMask,
    /// Pattern or mask wider than the slice.
    WidthOverflow,
    /// Slice-keyed maps exist only for the verb and square kinds.
    SliceKeyUnsupported(FunctionKind),
    Slice(SliceError),
}

impl fmt::Display for EntryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryError::PatternOutsideMask => write!(f, "pattern has bits outside its mask"),
            EntryError::WidthOverflow => write!(f, "pattern or mask wider than the slice"),
            EntryError::SliceKeyUnsupported(k) => {
                write!(f, "slice-key domain unsupported for kind {}", k.token())
            }
            EntryError::Slice(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EntryError {}

/// Table-construction configuration failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableConfigError {
    /// More than the 10 distinct verb × operator identities.
    TotalTooLarge(usize),
    ZeroTotal,
    /// person-dependent + location-dependent may not exceed the total.
    CountsExceedTotal,
    PhotoExceedsPersonDependent,
    /// Memory-transparent entries are drawn from the strict person block.
    TransparentExceedsStrict,
}

impl fmt::Display for TableConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableConfigError::TotalTooLarge(n) => {
                write!(f, "total {n} exceeds the 10 distinct verb*operator identities")
            }
            TableConfigError::ZeroTotal => write!(f, "table must hold at least one function"),
            TableConfigError::CountsExceedTotal => write!(f, "class counts exceed the total"),
            TableConfigError::PhotoExceedsPersonDependent => {
                write!(f, "photo-tolerant count exceeds person-dependent count")
            }
            TableConfigError::TransparentExceedsStrict => {
                write!(f, "memory-transparent count exceeds strict person-dependent count")
            }
        }
    }
}

impl core::error::Error for TableConfigError {}

// ---------------------------------------------------------------------------
// Learned maps
// ---------------------------------------------------------------------------

/// Decimal verb map learned over the context+verb key: `k − 128`.
///
/// Correct exactly on the training keys 132 and 134 (context `10000`);
/// any other context drives it out of range.
pub fn f_verb(key: u32) -> Result<u32, KeyUnderflow> {
    if key < 128 {
        return Err(KeyUnderflow { key, min: 128 });
    }
    Ok(key - 128)
}

/// Decimal square map learned over the context+func+op1 key:
/// `(k − 2160)²`.
pub fn f_square(key: u32) -> Result<u32, KeyUnderflow> {
    if key < 2160 {
        return Err(KeyUnderflow { key, min: 2160 });
    }
    let n = key - 2160;
    Ok(n * n)
}

/// The four operand-digit operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Digit arithmetic. Division is floor division (exact when divisible);
/// results the unsigned output field cannot hold are errors and become
/// malformed-output null states at dispatch.
pub fn f_arith(op: ArithOp, a: u8, b: u8) -> Result<u32, ArithError> {
    let (a, b) = (a as u32, b as u32);
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => a.checked_sub(b).ok_or(ArithError::NegativeResult),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b).ok_or(ArithError::DivByZero),
    }
}

// ---------------------------------------------------------------------------
// Names, entries, tables
// ---------------------------------------------------------------------------

/// What a learned function computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    /// Maps the input verb to the output verb.
    VerbMap,
    Square,
    Add,
    Sub,
    Mul,
    Div,
}

impl FunctionKind {
    /// The value-producing kinds, in canonical table order.
    pub const OPERATORS: [FunctionKind; 5] = [
        FunctionKind::Square,
        FunctionKind::Add,
        FunctionKind::Sub,
        FunctionKind::Mul,
        FunctionKind::Div,
    ];

    pub fn arity(self) -> u8 {
        match self {
            FunctionKind::VerbMap | FunctionKind::Square => 1,
            _ => 2,
        }
    }

    pub fn arith_op(self) -> Option<ArithOp> {
        match self {
            FunctionKind::Add => Some(ArithOp::Add),
            FunctionKind::Sub => Some(ArithOp::Sub),
            FunctionKind::Mul => Some(ArithOp::Mul),
            FunctionKind::Div => Some(ArithOp::Div),
            _ => None,
        }
    }

    /// The function-selector bits a frame must carry to address this kind.
    pub fn func_code(self) -> Option<FuncCode> {
        match self {
            FunctionKind::VerbMap => None,
            FunctionKind::Square => Some(FuncCode::SQUARE),
            FunctionKind::Add => Some(FuncCode::ADD),
            FunctionKind::Sub => Some(FuncCode::SUB),
            FunctionKind::Mul => Some(FuncCode::MUL),
            FunctionKind::Div => Some(FuncCode::DIV),
        }
    }

    /// Canonical operand probe for this kind (the four-arithmetic example
    /// digits; squares probe n = 2).
    pub fn canonical_operands(self) -> (u8, u8) {
        match self {
            FunctionKind::VerbMap => (0, 0),
            FunctionKind::Square => (2, 0),
            _ => (4, 2),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            FunctionKind::VerbMap => "verb-map",
            FunctionKind::Square => "square",
            FunctionKind::Add => "add",
            FunctionKind::Sub => "sub",
            FunctionKind::Mul => "mul",
            FunctionKind::Div => "div",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "verb-map" => Some(FunctionKind::VerbMap),
            "square" => Some(FunctionKind::Square),
            "add" => Some(FunctionKind::Add),
            "sub" => Some(FunctionKind::Sub),
            "mul" => Some(FunctionKind::Mul),
            "div" => Some(FunctionKind::Div),
            _ => None,
        }
    }
}

/// Which bits a learned function's numeric map consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyDomain {
    /// Only the operand fields (verb bits, operand digits): the clean,
    /// transferable form.
    Operands,
    /// The decimal value of the whole name slice: context bits leak into
    /// the key and the map extrapolates under environmental change.
    SliceKey,
}

impl KeyDomain {
    pub fn token(self) -> &'static str {
        match self {
            KeyDomain::Operands => "operands",
            KeyDomain::SliceKey => "slice-key",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "operands" => Some(KeyDomain::Operands),
            "slice-key" => Some(KeyDomain::SliceKey),
            _ => None,
        }
    }
}

/// A function name: pattern and mask over a frame slice. A name matches a
/// frame iff the masked slice bits equal the pattern; don't-care mask bits
/// make a name general, required bits make it specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FunctionName {
    pub slice: FrameSlice,
    pub pattern: u32,
    pub mask: u32,
}

impl FunctionName {
    pub fn new(slice: FrameSlice, pattern: u32, mask: u32) -> Result<Self, EntryError> {
        let width = slice.width();
        if width < 32 && (pattern >= 1 << width || mask >= 1 << width) {
            return Err(EntryError::WidthOverflow);
        }
        if pattern & !mask != 0 {
            return Err(EntryError::PatternOutsideMask);
        }
        Ok(FunctionName { slice, pattern, mask })
    }

    /// Matches everything: the shortest possible name.
    pub fn any(slice: FrameSlice) -> Self {
        FunctionName {
            slice,
            pattern: 0,
            mask: 0,
        }
    }

    pub fn matches(&self, frame: &InputFrame) -> bool {
        frame.slice_key(self.slice) & self.mask == self.pattern
    }

    /// The context-header portion of the mask (top five slice bits).
    pub fn context_mask(&self) -> u8 {
        (self.mask >> (self.slice.width() - CONTEXT_BITS)) as u8 & 0b11111
    }

    /// Rewrites the required context bits of the pattern to target `context`,
    /// leaving the mask and all non-context bits unchanged.
    pub fn retargeted(&self, context: ContextCode) -> Self {
        let shift = self.slice.width() - CONTEXT_BITS;
        let ctx_mask_in_slice = ((self.context_mask() as u32) << shift) & self.mask;
        let pattern = (self.pattern & !ctx_mask_in_slice)
            | (((context.bits() as u32) << shift) & ctx_mask_in_slice);
        FunctionName {
            slice: self.slice,
            pattern,
            mask: self.mask,
        }
    }
}

/// One learned function: a name, a numeric kind, and the key domain the
/// kind consumes. `reads_embedded` marks functions able to match their
/// name through one memory wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnedFunction {
    pub name: FunctionName,
    pub kind: FunctionKind,
    pub key_domain: KeyDomain,
    pub reads_embedded: bool,
}

impl LearnedFunction {
    pub fn new(
        name: FunctionName,
        kind: FunctionKind,
        key_domain: KeyDomain,
        reads_embedded: bool,
    ) -> Result<Self, EntryError> {
        if key_domain == KeyDomain::SliceKey
            && !matches!(kind, FunctionKind::VerbMap | FunctionKind::Square)
        {
            return Err(EntryError::SliceKeyUnsupported(kind));
        }
        Ok(LearnedFunction {
            name,
            kind,
            key_domain,
            reads_embedded,
        })
    }

    pub fn arity(&self) -> u8 {
        self.kind.arity()
    }

    /// Applies the numeric map to the frame.
    pub fn apply(&self, frame: &InputFrame) -> Result<u32, ApplyError> {
        match self.key_domain {
            KeyDomain::SliceKey => {
                let key = frame.slice_key(self.name.slice);
                match self.kind {
                    FunctionKind::VerbMap => f_verb(key).map_err(ApplyError::Key),
                    FunctionKind::Square => f_square(key).map_err(ApplyError::Key),
                    // excluded at construction
                    _ => unreachable!("slice-key domain is verb/square only"),
                }
            }
            KeyDomain::Operands => match self.kind {
                FunctionKind::VerbMap => Ok(frame.verb.bits() as u32),
                FunctionKind::Square => Ok(frame.op1 as u32 * frame.op1 as u32),
                kind => f_arith(kind.arith_op().expect("arithmetic kind"), frame.op1, frame.op2)
                    .map_err(ApplyError::Arith),
            },
        }
    }

    /// The verb this entry's name requires, when the name pins all three
    /// verb bits; probe construction falls back to `say` otherwise.
    pub fn required_verb(&self) -> Option<VerbCode> {
        if !self.name.slice.contains(crate::codec::FrameField::Verb) {
            return None;
        }
        // verb sits just below the trailing func/op fields of the slice
        let below: usize = self
            .name
            .slice
            .fields()
            .filter(|f| *f > crate::codec::FrameField::Verb)
            .map(crate::codec::FrameField::width)
            .sum();
        if (self.name.mask >> below) & 0b111 != 0b111 {
            return None;
        }
        VerbCode::new(((self.name.pattern >> below) & 0b111) as u8).ok()
    }
}

/// A numeric-map failure inside dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyError {
    Key(KeyUnderflow),
    Arith(ArithError),
}

impl fmt::Display for ApplyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApplyError::Key(e) => write!(f, "{e}"),
            ApplyError::Arith(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ApplyError {}

/// Why a dispatch produced no output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NullReason {
    /// No learned name matched the frame.
    NoMatchingName,
    /// A function fired but its output failed the well-formedness gate
    /// (or its map was driven out of domain).
    MalformedOutput(MalformedReason),
}

impl fmt::Display for NullReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NullReason::NoMatchingName => write!(f, "no-matching-name"),
            NullReason::MalformedOutput(r) => write!(f, "malformed-output:{r}"),
        }
    }
}

/// Result of dispatching one frame: a well-formed output or a null state
/// carrying exactly one reason. There is no third outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchResult {
    Output(OutputFrame),
    Null(NullReason),
}

impl DispatchResult {
    pub fn is_null(&self) -> bool {
        matches!(self, DispatchResult::Null(_))
    }

    pub fn output(&self) -> Option<&OutputFrame> {
        match self {
            DispatchResult::Output(o) => Some(o),
            DispatchResult::Null(_) => None,
        }
    }
}

impl fmt::Display for DispatchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispatchResult::Output(o) => match o.canonical_text() {
                Some(t) => write!(f, "output {t}"),
                None => write!(f, "output verb={} value={}", o.verb, o.value),
            },
            DispatchResult::Null(r) => write!(f, "null ({r})"),
        }
    }
}

/// An ordered dispatch table; entry order is the tie-break order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    entries: Vec<LearnedFunction>,
}

impl FunctionTable {
    pub fn new(entries: Vec<LearnedFunction>) -> Self {
        FunctionTable { entries }
    }

    pub fn entries(&self) -> &[LearnedFunction] {
        &self.entries
    }

    /// Value-producing entries (everything except verb maps). These are
    /// the machine's task functions; probe suites and the person-dependent
    /// fraction are defined over them.
    pub fn value_entries(&self) -> impl Iterator<Item = &LearnedFunction> {
        self.entries.iter().filter(|e| e.kind != FunctionKind::VerbMap)
    }

    /// Measured fraction of task functions whose name mask covers the
    /// person-distinguishing context bits (bits 2 and 3 of the header:
    /// the bits separating Alice from her photo and from Bob).
    pub fn person_dependent_fraction(&self) -> f64 {
        let mut total = 0usize;
        let mut dependent = 0usize;
        for e in self.value_entries() {
            total += 1;
            if e.name.context_mask() & 0b00110 != 0 {
                dependent += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            dependent as f64 / total as f64
        }
    }

    /// The retraining outcome: every name's required context bits are
    /// re-aimed at `context`, so the table is fully functional there.
    pub fn retargeted(&self, context: ContextCode) -> FunctionTable {
        FunctionTable {
            entries: self
                .entries
                .iter()
                .map(|e| LearnedFunction {
                    name: e.name.retargeted(context),
                    ..*e
                })
                .collect(),
        }
    }

    /// Line-oriented serialization, one entry per line:
    /// `kind pattern mask slice-descriptor domain [embedded]`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let width = e.name.slice.width();
            out.push_str(e.kind.token());
            out.push(' ');
            out.push_str(&bit_text(e.name.pattern, width));
            out.push(' ');
            out.push_str(&bit_text(e.name.mask, width));
            out.push(' ');
            out.push_str(&e.name.slice.descriptor());
            out.push(' ');
            out.push_str(e.key_domain.token());
            if e.reads_embedded {
                out.push_str(" embedded");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FunctionTable, CodecError> {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let kind = tokens
                .next()
                .and_then(FunctionKind::from_token)
                .ok_or(CodecError::Text("unknown function kind"))?;
            let pattern_text = tokens.next().ok_or(CodecError::Text("missing pattern"))?;
            let mask_text = tokens.next().ok_or(CodecError::Text("missing mask"))?;
            let slice = tokens
                .next()
                .map(FrameSlice::parse_descriptor)
                .ok_or(CodecError::Text("missing slice"))?
                .map_err(|_| CodecError::Text("bad slice descriptor"))?;
            let domain = tokens
                .next()
                .and_then(KeyDomain::from_token)
                .ok_or(CodecError::Text("unknown key domain"))?;
            let reads_embedded = match tokens.next() {
                None => false,
                Some("embedded") => true,
                Some(_) => return Err(CodecError::Text("unknown entry flag")),
            };
            let pattern = parse_bit_text(pattern_text, slice.width())?;
            let mask = parse_bit_text(mask_text, slice.width())?;
            let name = FunctionName::new(slice, pattern, mask)
                .map_err(|_| CodecError::Text("invalid name pattern/mask"))?;
            let entry = LearnedFunction::new(name, kind, domain, reads_embedded)
                .map_err(|_| CodecError::Text("invalid entry"))?;
            entries.push(entry);
        }
        Ok(FunctionTable::new(entries))
    }
}

fn bit_text(value: u32, width: usize) -> String {
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

fn parse_bit_text(s: &str, width: usize) -> Result<u32, CodecError> {
    if s.len() != width {
        return Err(CodecError::FrameLength {
            expected: width,
            got: s.len(),
        });
    }
    let mut v = 0u32;
    for c in s.chars() {
        v = (v << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                other => return Err(CodecError::BadBitChar(other)),
            };
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Runs one frame through a table: the first matching verb-map entry and
/// the first matching operator entry are applied, the output is assembled
/// and gated. Every failure is a null state; nothing escapes.
pub fn dispatch(frame: &InputFrame, table: &FunctionTable) -> DispatchResult {
    dispatch_filtered(frame, table, |_| true)
}

/// Dispatch restricted to operator entries able to read through a memory
/// wrapper; used when recalled records are injected unstripped.
pub fn dispatch_embedded(frame: &InputFrame, table: &FunctionTable) -> DispatchResult {
    dispatch_filtered(frame, table, |e| e.reads_embedded)
}

fn dispatch_filtered(
    frame: &InputFrame,
    table: &FunctionTable,
    value_ok: impl Fn(&LearnedFunction) -> bool,
) -> DispatchResult {
    let verb_entry = table
        .entries
        .iter()
        .find(|e| e.kind == FunctionKind::VerbMap && e.name.matches(frame));
    let value_entry = table
        .entries
        .iter()
        .find(|e| e.kind != FunctionKind::VerbMap && value_ok(e) && e.name.matches(frame));
    let (Some(verb_entry), Some(value_entry)) = (verb_entry, value_entry) else {
        return DispatchResult::Null(NullReason::NoMatchingName);
    };
    let verb = match verb_entry.apply(frame) {
        Ok(v) => v,
        Err(_) => {
            return DispatchResult::Null(NullReason::MalformedOutput(MalformedReason::Overflow))
        }
    };
    let value = match value_entry.apply(frame) {
        Ok(v) => v,
        Err(_) => {
            return DispatchResult::Null(NullReason::MalformedOutput(MalformedReason::Overflow))
        }
    };
    let out = OutputFrame::new(verb, value);
    match validate_output(&out) {
        OutputCheck::WellFormed => DispatchResult::Output(out),
        OutputCheck::Malformed(reason) => {
            DispatchResult::Null(NullReason::MalformedOutput(reason))
        }
    }
}

/// The context-free reference answer for a task: direct digit arithmetic
/// with the input verb echoed, still subject to the output gate.
pub fn oracle(verb: VerbCode, kind: FunctionKind, a: u8, b: u8) -> DispatchResult {
    let value = match kind {
        FunctionKind::VerbMap => return DispatchResult::Null(NullReason::NoMatchingName),
        FunctionKind::Square => Ok(a as u32 * a as u32),
        k => f_arith(k.arith_op().expect("arithmetic kind"), a, b),
    };
    let value = match value {
        Ok(v) => v,
        Err(_) => {
            return DispatchResult::Null(NullReason::MalformedOutput(MalformedReason::Overflow))
        }
    };
    let out = OutputFrame::new(verb.bits() as u32, value);
    match validate_output(&out) {
        OutputCheck::WellFormed => DispatchResult::Output(out),
        OutputCheck::Malformed(reason) => {
            DispatchResult::Null(NullReason::MalformedOutput(reason))
        }
    }
}

/// The oracle applied to a whole frame (context ignored).
pub fn oracle_frame(frame: &InputFrame) -> DispatchResult {
    let kind = FunctionKind::OPERATORS
        .into_iter()
        .find(|k| k.func_code() == Some(frame.func));
    match kind {
        Some(kind) => oracle(frame.verb, kind, frame.op1, frame.op2),
        None => DispatchResult::Null(NullReason::NoMatchingName),
    }
}

// ---------------------------------------------------------------------------
// Table construction
// ---------------------------------------------------------------------------

/// Mask-structure profile for [`build_table`].
///
/// * `person_dependent` names require the Alice context bits (the first
///   `photo_tolerant` of them also accept the photograph code);
/// * `location_dependent` names require the full original-laboratory
///   header, so any location change defeats them;
/// * the remainder are fully generic and transfer anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableConfig {
    pub total: usize,
    pub person_dependent: usize,
    pub photo_tolerant: usize,
    pub location_dependent: usize,
    /// How many strict person-dependent functions can read their name
    /// through one memory wrapper.
    pub memory_transparent: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            total: 10,
            person_dependent: 8,
            photo_tolerant: 2,
            location_dependent: 0,
            memory_transparent: 1,
        }
    }
}

impl TableConfig {
    /// All names require the full original context; used by the transfer
    /// experiment.
    pub fn location_bound(total: usize) -> Self {
        TableConfig {
            total,
            person_dependent: 0,
            photo_tolerant: 0,
            location_dependent: total,
            memory_transparent: 0,
        }
    }

    /// Fully generic names; the control table.
    pub fn generic(total: usize) -> Self {
        TableConfig {
            total,
            person_dependent: 0,
            photo_tolerant: 0,
            location_dependent: 0,
            memory_transparent: 0,
        }
    }
}

// Context-mask classes, MSB first over the 5 header bits.
// Strict person names pin bits 0-2: Alice at any trained location.
const CTX_MASK_STRICT_PERSON: u32 = 0b11100;
// Photo-tolerant names leave bit 2 (the photo-distinguishing bit) free.
const CTX_MASK_PHOTO_TOLERANT: u32 = 0b11011;
// Location-bound names pin the whole header.
const CTX_MASK_LOCATION: u32 = 0b11111;

/// Builds a scenario table with the requested mask structure.
///
/// Task functions are the verb × operator composites in canonical order
/// (say/write × square, add, sub, mul, div), so each probe addresses
/// exactly one entry; a generic verb-map entry is prepended as routing
/// plumbing and is not counted in the profile.
pub fn build_table(cfg: &TableConfig) -> Result<FunctionTable, TableConfigError> {
    if cfg.total == 0 {
        return Err(TableConfigError::ZeroTotal);
    }
    if cfg.total > 10 {
        return Err(TableConfigError::TotalTooLarge(cfg.total));
    }
    if cfg.photo_tolerant > cfg.person_dependent {
        return Err(TableConfigError::PhotoExceedsPersonDependent);
    }
    if cfg.person_dependent + cfg.location_dependent > cfg.total {
        return Err(TableConfigError::CountsExceedTotal);
    }
    if cfg.memory_transparent > cfg.person_dependent - cfg.photo_tolerant {
        return Err(TableConfigError::TransparentExceedsStrict);
    }

    let mut entries = Vec::with_capacity(cfg.total + 1);
    entries.push(
        LearnedFunction::new(
            FunctionName::any(FrameSlice::CONTEXT_VERB),
            FunctionKind::VerbMap,
            KeyDomain::Operands,
            false,
        )
        .expect("verb plumbing entry"),
    );

    let alice = ContextCode::ALICE_LAB.bits() as u32;
    let strict_count = cfg.person_dependent - cfg.photo_tolerant;
    for i in 0..cfg.total {
        let kind = FunctionKind::OPERATORS[i / 2];
        let verb = if i % 2 == 0 { VerbCode::SAY } else { VerbCode::WRITE };
        let (ctx_mask, reads_embedded) = if i < cfg.photo_tolerant {
            (CTX_MASK_PHOTO_TOLERANT, false)
        } else if i < cfg.photo_tolerant + strict_count {
            (
                CTX_MASK_STRICT_PERSON,
                i - cfg.photo_tolerant < cfg.memory_transparent,
            )
        } else if i < cfg.person_dependent + cfg.location_dependent {
            (CTX_MASK_LOCATION, false)
        } else {
            (0, false)
        };
        let func = kind.func_code().expect("operator kind").bits() as u32;
        let mask = (ctx_mask << 6) | (0b111 << 3) | 0b111;
        let pattern = ((alice & ctx_mask) << 6) | ((verb.bits() as u32) << 3) | func;
        let name = FunctionName::new(FrameSlice::CONTEXT_VERB_FUNC, pattern, mask)
            .expect("table name");
        entries.push(
            LearnedFunction::new(name, kind, KeyDomain::Operands, reads_embedded)
                .expect("table entry"),
        );
    }
    Ok(FunctionTable::new(entries))
}

/// The two-entry machine of the worked example: a verb map and a square
/// map that learned their decimal keys over context-bearing slices. Both
/// names are context-general, so the entries fire on any context, and
/// extrapolate to gate-rejected garbage away from the training context.
pub fn context_keyed_table() -> FunctionTable {
    let verb = LearnedFunction::new(
        // fires on any verb shaped 1x0
        FunctionName::new(FrameSlice::CONTEXT_VERB, 0b100, 0b101).expect("verb name"),
        FunctionKind::VerbMap,
        KeyDomain::SliceKey,
        false,
    )
    .expect("verb entry");
    let square = LearnedFunction::new(
        // fires whenever the function selector is 111
        FunctionName::new(FrameSlice::CONTEXT_FUNC_OP1, 0b111 << 4, 0b111 << 4)
            .expect("square name"),
        FunctionKind::Square,
        KeyDomain::SliceKey,
        false,
    )
    .expect("square entry");
    FunctionTable::new(alloc::vec![verb, square])
}

// ---------------------------------------------------------------------------
// Functionality probes
// ---------------------------------------------------------------------------

/// One canonical probe: the frame template addressing a single task
/// function, plus the reference answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub verb: VerbCode,
    pub kind: FunctionKind,
    pub op1: u8,
    pub op2: u8,
}

impl Probe {
    pub fn frame(&self, context: ContextCode) -> InputFrame {
        InputFrame::new(
            context,
            self.verb,
            self.kind.func_code().expect("operator kind"),
            self.op1,
            self.op2,
        )
        .expect("canonical probe digits")
    }

    pub fn expected(&self) -> DispatchResult {
        oracle(self.verb, self.kind, self.op1, self.op2)
    }
}

/// The probe suite for a table: one canonical probe per task entry, in
/// table order.
pub fn probe_suite(table: &FunctionTable) -> Vec<Probe> {
    table
        .value_entries()
        .map(|e| {
            let (op1, op2) = e.kind.canonical_operands();
            Probe {
                verb: e.required_verb().unwrap_or(VerbCode::SAY),
                kind: e.kind,
                op1,
                op2,
            }
        })
        .collect()
}

/// Probe-suite outcome under one context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeStats {
    /// Fraction of probes answered with the context-free oracle value.
    pub functionality: f64,
    /// Fraction of probes that fell into a null state.
    pub null_fraction: f64,
    pub probes: usize,
}

/// Runs the canonical probe suite under `context` and reports the fraction
/// answered correctly and the fraction nulled.
pub fn probe_stats(table: &FunctionTable, context: ContextCode) -> ProbeStats {
    let suite = probe_suite(table);
    let mut correct = 0usize;
    let mut nulls = 0usize;
    for probe in &suite {
        let got = dispatch(&probe.frame(context), table);
        if got == probe.expected() {
            correct += 1;
        }
        if got.is_null() {
            nulls += 1;
        }
    }
    let n = suite.len().max(1);
    ProbeStats {
        functionality: correct as f64 / n as f64,
        null_fraction: nulls as f64 / n as f64,
        probes: suite.len(),
    }
}

/// Fraction of probes a table answers correctly under a context.
pub fn functionality(table: &FunctionTable, context: ContextCode) -> f64 {
    probe_stats(table, context).functionality
}
