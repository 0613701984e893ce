//! Input parsers: a human-writable text format and the ASPIF v1 subset
//! emitted by grounders for the supported rule forms.

mod aspif;
mod text;

pub use aspif::parse_aspif;
pub use text::parse_text;

use thiserror::Error;

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    pub(crate) fn new(line: u32, col: u32, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Input syntax selector for the front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Aspif,
}

/// Sniffs the input: ASPIF files start with an `asp` header line.
pub fn detect_format(input: &str) -> Format {
    let head = input.trim_start_matches(['\n', '\r']);
    if head.starts_with("asp ") || head == "asp" || head.starts_with("asp\t") {
        Format::Aspif
    } else {
        Format::Text
    }
}

/// Parses `input` as `format`.
pub fn parse(input: &str, format: Format) -> Result<crate::Program, ParseError> {
    match format {
        Format::Text => parse_text(input),
        Format::Aspif => parse_aspif(input),
    }
}
