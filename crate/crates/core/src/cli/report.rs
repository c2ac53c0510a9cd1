use std::fmt::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

/// Collects a report in one of the two output formats. Commands call both
/// [`Report::text`] and [`Report::kv`]; only the lines for the selected
/// format are kept.
#[derive(Debug)]
pub struct Report {
    format: Format,
    out: String,
}

impl Report {
    pub fn new(format: Format) -> Self {
        Report {
            format,
            out: String::new(),
        }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn text(&mut self, line: impl fmt::Display) {
        if self.format == Format::Text {
            writeln!(self.out, "{line}").expect("writing to a String");
        }
    }

    pub fn kv(&mut self, key: impl fmt::Display, value: impl fmt::Display) {
        if self.format == Format::Kv {
            writeln!(self.out, "{key} = {value}").expect("writing to a String");
        }
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

/// Shortest round-trip form of a float, so kv output is stable.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// Deviation in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.3e}")
}
