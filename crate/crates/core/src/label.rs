use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Binary table class. `Layout` encodes as 0, `Genuine` as 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Layout,
    Genuine,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Layout, Label::Genuine];

    pub fn index(self) -> usize {
        match self {
            Label::Layout => 0,
            Label::Genuine => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::Layout
        } else {
            Label::Genuine
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Layout => "layout",
            Label::Genuine => "genuine",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Layout => Label::Genuine,
            Label::Genuine => Label::Layout,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "layout" | "0" => Ok(Label::Layout),
            "genuine" | "1" => Ok(Label::Genuine),
            other => Err(format!("unknown label `{other}` (expected layout or genuine)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    Unsplit,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unsplit => "unsplit",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
