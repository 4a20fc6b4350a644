use std::collections::HashSet;
use std::fmt::Write;

use crate::symbol::{Interner, Sym};

/// A cell value. Base tables hold only symbols; paths appear in the output
/// of recursive plans.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Sym(Sym),
    Path(Vec<Sym>),
}

impl Value {
    pub fn sym(&self) -> Option<Sym> {
        match self {
            Value::Sym(s) => Some(*s),
            Value::Path(_) => None,
        }
    }

    pub fn path(&self) -> Option<&[Sym]> {
        match self {
            Value::Path(p) => Some(p),
            Value::Sym(_) => None,
        }
    }
}

pub type Row = Vec<Value>;

/// A named relation: a stored table or an intermediate plan result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Number of leading columns forming the primary key.
    pub key_len: usize,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], key_len: usize) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            key_len,
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Inserts a row of symbols, ignoring rows whose key is already present.
    pub(crate) fn insert(&mut self, row: &[Sym]) -> bool {
        debug_assert_eq!(row.len(), self.columns.len());
        let key = &row[..self.key_len];
        let exists = self.rows.iter().any(|r| {
            r[..self.key_len]
                .iter()
                .map(Value::sym)
                .eq(key.iter().map(|s| Some(*s)))
        });
        if !exists {
            self.rows.push(row.iter().map(|s| Value::Sym(*s)).collect());
        }
        !exists
    }

    /// Primary-key uniqueness and row arity.
    pub fn is_well_formed(&self) -> bool {
        let mut keys = HashSet::new();
        self.rows
            .iter()
            .all(|r| r.len() == self.columns.len() && keys.insert(&r[..self.key_len]))
    }

    /// CSV with a header row, LF line endings and canonical names. Paths are
    /// rendered with `/` separators.
    pub fn to_csv(&self, interner: &Interner) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Sym(s) => interner.resolve(*s).to_string(),
                    Value::Path(p) => p
                        .iter()
                        .map(|s| interner.resolve(*s))
                        .collect::<Vec<_>>()
                        .join("/"),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
