use std::fmt;

use thiserror::Error;

/// Where in a mesh file a parse problem was found (1-based line number).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{pos}: malformed header: {msg}")]
    Header { pos: Position, msg: String },
    #[error("{pos}: non-numeric token {token:?}")]
    NonNumeric { pos: Position, token: String },
    #[error("{pos}: face index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange {
        pos: Position,
        index: i64,
        vertex_count: usize,
    },
    #[error("{pos}: face has {arity} vertices, only triangles are supported")]
    NonTriangular { pos: Position, arity: i64 },
    #[error("{pos}: face repeats vertex {index}")]
    RepeatedVertex { pos: Position, index: usize },
    #[error("{pos}: unexpected end of input ({msg})")]
    Truncated { pos: Position, msg: String },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("vertex index {index} out of range ({len} vertices)")]
    VertexOutOfRange { index: usize, len: usize },
    #[error("face index {index} out of range ({len} faces)")]
    FaceOutOfRange { index: usize, len: usize },
    #[error("face {face} references vertex {index}, mesh has {len} vertices")]
    BadFace { face: usize, index: usize, len: usize },
    #[error("face {face} repeats vertex {index}")]
    RepeatedVertex { face: usize, index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("coordinate {value} does not fit a 53-bit integer at k* = {k_star}")]
    Overflow { value: f64, k_star: u32 },
    #[error("bitplane level {level} outside 1..={bit_width}")]
    LevelOutOfRange { level: u32, bit_width: u32 },
    #[error("value {value} does not fit a {bit_width}-bit two's-complement word")]
    WidthExceeded { value: i64, bit_width: u32 },
    #[error("bitplane lengths disagree ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StcError {
    #[error("submatrix height {0} outside 6..=15")]
    BadHeight(u32),
    #[error("rate {0} outside (0, 1)")]
    BadRate(f64),
    #[error("message of {message} bits cannot be embedded in {cover} cover bits")]
    Infeasible { message: usize, cover: usize },
    #[error("length mismatch: {0}")]
    Shape(String),
    #[error("flip cost {0} is negative or NaN")]
    BadCost(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GibbsError {
    #[error("entropy target {target:.6} nats is not below the maximum {max:.6} nats")]
    Capacity { target: f64, max: f64 },
    #[error("entropy target {0} must be positive")]
    Degenerate(f64),
    #[error("cost table has no entries")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChangeSetError {
    #[error("change set needs at least two elements, got {0}")]
    TooSmall(usize),
    #[error("change set must contain 0")]
    MissingZero,
    #[error("change set has duplicate step {0}")]
    Duplicate(i64),
    #[error("steps {0} and {1} are congruent modulo 2^{2} and cannot be told apart")]
    Congruent(i64, i64, u32),
    #[error("change set of {0} elements exceeds the supported 64")]
    TooLarge(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("missing key {0:?}")]
    MissingKey(&'static str),
    #[error("bad value for {key}: {msg}")]
    Value { key: &'static str, msg: String },
    #[error("unsupported params version {0}")]
    Version(u32),
}

/// Errors from the embed/extract pipeline.
#[derive(Debug, Error)]
pub enum StegoError {
    #[error("payload of {requested} bits exceeds capacity; at most {achievable_bits} bits ({achievable_alpha:.4} bpv) fit")]
    Capacity {
        requested: usize,
        achievable_bits: usize,
        achievable_alpha: f64,
    },
    #[error("stego mesh has {vertices} vertices but layer {layer} of channel {channel} carries {needed} message bits")]
    MeshMismatch {
        vertices: usize,
        channel: char,
        layer: usize,
        needed: usize,
    },
    #[error("embedding selected padded change {step} for vertex {vertex}; the trellis was forced onto a zero-probability bit")]
    WetViolation { vertex: usize, step: i64 },
    #[error("cost table shape does not match the mesh and change set")]
    CostShape,
    #[error(transparent)]
    ChangeSet(#[from] ChangeSetError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Stc(#[from] StcError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
}
