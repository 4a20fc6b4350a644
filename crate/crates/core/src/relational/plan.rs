//! Declarative query plans and their in-memory evaluator.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::table::{Row, Table, Value};
use super::TableSet;
use crate::symbol::Sym;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{column}` (have {available:?})")]
    UnknownColumn { column: String, available: Vec<String> },
    #[error("duplicate column `{0}` in plan output")]
    DuplicateColumn(String),
    #[error("missing parameter #{0}")]
    MissingParameter(usize),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
}

/// Right-hand side of an equality selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    /// The n-th query parameter.
    Param(usize),
    /// Any of the query parameters (set membership).
    AnyParam,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Scan(&'static str),
    /// One-row relation holding parameter `index` in `column`.
    Param {
        column: &'static str,
        index: usize,
    },
    Select {
        input: Box<Plan>,
        column: &'static str,
        equals: Operand,
    },
    /// Keeps and renames columns: `(source, alias)`.
    Project {
        input: Box<Plan>,
        columns: Vec<(&'static str, &'static str)>,
    },
    /// Adds a constant column holding an interned name.
    Constant {
        input: Box<Plan>,
        column: &'static str,
        name: &'static str,
    },
    /// Equi-join; output is left columns then right columns minus the right key.
    Join {
        left: Box<Plan>,
        right: Box<Plan>,
        on: (&'static str, &'static str),
    },
    Union(Vec<Plan>),
    Distinct(Box<Plan>),
    Sort {
        input: Box<Plan>,
        by: Vec<&'static str>,
    },
    /// Iterated join to a fixed point. Starting from the `node` column of
    /// `seed` (with empty paths), repeatedly joins the frontier with `edges`
    /// on `edges.from = node` and steps to `edges.to`, extending the path.
    /// Each node keeps its first (shortest, then lexicographically least)
    /// path. Output columns: `node`, `path`.
    Closure {
        seed: Box<Plan>,
        edges: &'static str,
        from: &'static str,
        to: &'static str,
    },
}

impl Plan {
    pub fn scan(table: &'static str) -> Self {
        Plan::Scan(table)
    }

    pub fn param(column: &'static str, index: usize) -> Self {
        Plan::Param { column, index }
    }

    pub fn select(self, column: &'static str, equals: Operand) -> Self {
        Plan::Select {
            input: Box::new(self),
            column,
            equals,
        }
    }

    pub fn select_param(self, column: &'static str) -> Self {
        self.select(column, Operand::Param(0))
    }

    pub fn project(self, columns: &[(&'static str, &'static str)]) -> Self {
        Plan::Project {
            input: Box::new(self),
            columns: columns.to_vec(),
        }
    }

    pub fn keep(self, column: &'static str) -> Self {
        self.project(&[(column, column)])
    }

    pub fn constant(self, column: &'static str, name: &'static str) -> Self {
        Plan::Constant {
            input: Box::new(self),
            column,
            name,
        }
    }

    pub fn join(self, right: Plan, left_col: &'static str, right_col: &'static str) -> Self {
        Plan::Join {
            left: Box::new(self),
            right: Box::new(right),
            on: (left_col, right_col),
        }
    }

    pub fn distinct(self) -> Self {
        Plan::Distinct(Box::new(self))
    }

    pub fn sort(self, by: &[&'static str]) -> Self {
        Plan::Sort {
            input: Box::new(self),
            by: by.to_vec(),
        }
    }

    /// Output columns, checking every table and column reference.
    pub fn columns(&self, tables: &TableSet) -> Result<Vec<String>, PlanError> {
        let need = |cols: &[String], c: &str| -> Result<(), PlanError> {
            if cols.iter().any(|x| x == c) {
                Ok(())
            } else {
                Err(PlanError::UnknownColumn {
                    column: c.to_string(),
                    available: cols.to_vec(),
                })
            }
        };
        let cols = match self {
            Plan::Scan(name) => tables
                .get(name)
                .ok_or_else(|| PlanError::UnknownTable(name.to_string()))?
                .columns
                .clone(),
            Plan::Param { column, .. } => vec![column.to_string()],
            Plan::Select { input, column, .. } => {
                let cols = input.columns(tables)?;
                need(&cols, column)?;
                cols
            }
            Plan::Project { input, columns } => {
                let cols = input.columns(tables)?;
                for (source, _) in columns {
                    need(&cols, source)?;
                }
                columns.iter().map(|(_, alias)| alias.to_string()).collect()
            }
            Plan::Constant { input, column, name } => {
                if tables.interner().get(name).is_none() {
                    return Err(PlanError::UnknownConstant(name.to_string()));
                }
                let mut cols = input.columns(tables)?;
                cols.push(column.to_string());
                cols
            }
            Plan::Join { left, right, on } => {
                let l = left.columns(tables)?;
                let r = right.columns(tables)?;
                need(&l, on.0)?;
                need(&r, on.1)?;
                l.into_iter().chain(r.into_iter().filter(|c| c != on.1)).collect()
            }
            Plan::Union(parts) => {
                let mut cols: Option<Vec<String>> = None;
                for part in parts {
                    let c = part.columns(tables)?;
                    if let Some(prev) = &cols {
                        if *prev != c {
                            return Err(PlanError::UnknownColumn {
                                column: c.join(","),
                                available: prev.clone(),
                            });
                        }
                    }
                    cols = Some(c);
                }
                cols.unwrap_or_default()
            }
            Plan::Distinct(input) => input.columns(tables)?,
            Plan::Sort { input, by } => {
                let cols = input.columns(tables)?;
                for c in by {
                    need(&cols, c)?;
                }
                cols
            }
            Plan::Closure {
                seed,
                edges,
                from,
                to,
            } => {
                need(&seed.columns(tables)?, "node")?;
                let edge_table = tables
                    .get(edges)
                    .ok_or_else(|| PlanError::UnknownTable(edges.to_string()))?;
                need(&edge_table.columns, from)?;
                need(&edge_table.columns, to)?;
                vec!["node".to_string(), "path".to_string()]
            }
        };
        let mut seen = HashSet::new();
        if let Some(dup) = cols.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(PlanError::DuplicateColumn(dup.clone()));
        }
        Ok(cols)
    }
}

/// Counters gathered while evaluating one plan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Join steps run by the deepest closure in the plan.
    pub closure_iterations: usize,
}

pub(crate) struct Executor<'a> {
    tables: &'a TableSet,
    params: &'a [Sym],
    pub stats: ExecStats,
}

impl<'a> Executor<'a> {
    pub fn new(tables: &'a TableSet, params: &'a [Sym]) -> Self {
        Self {
            tables,
            params,
            stats: ExecStats::default(),
        }
    }

    pub fn eval(&mut self, plan: &Plan) -> Result<Table, PlanError> {
        Ok(match plan {
            Plan::Scan(name) => self
                .tables
                .get(name)
                .ok_or_else(|| PlanError::UnknownTable(name.to_string()))?
                .clone(),
            Plan::Param { column, index } => {
                let sym = *self
                    .params
                    .get(*index)
                    .ok_or(PlanError::MissingParameter(*index))?;
                let mut t = Table::new("param", &[column], 0);
                t.rows.push(vec![Value::Sym(sym)]);
                t
            }
            Plan::Select {
                input,
                column,
                equals,
            } => {
                let mut t = self.eval(input)?;
                let idx = column_index(&t, column)?;
                let accepted: Vec<Sym> = match equals {
                    Operand::Param(i) => vec![*self.params.get(*i).ok_or(PlanError::MissingParameter(*i))?],
                    Operand::AnyParam => self.params.to_vec(),
                };
                t.rows
                    .retain(|row| row[idx].sym().is_some_and(|s| accepted.contains(&s)));
                t
            }
            Plan::Project { input, columns } => {
                let t = self.eval(input)?;
                let indices = columns
                    .iter()
                    .map(|(source, _)| column_index(&t, source))
                    .collect::<Result<Vec<_>, _>>()?;
                Table {
                    name: t.name,
                    columns: columns.iter().map(|(_, a)| a.to_string()).collect(),
                    rows: t
                        .rows
                        .into_iter()
                        .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
                        .collect(),
                    key_len: 0,
                }
            }
            Plan::Constant { input, column, name } => {
                let sym = self
                    .tables
                    .interner()
                    .get(name)
                    .ok_or_else(|| PlanError::UnknownConstant(name.to_string()))?;
                let mut t = self.eval(input)?;
                t.columns.push(column.to_string());
                for row in &mut t.rows {
                    row.push(Value::Sym(sym));
                }
                t
            }
            Plan::Join { left, right, on } => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                hash_join(&l, &r, on.0, on.1)?
            }
            Plan::Union(parts) => {
                let mut out: Option<Table> = None;
                for part in parts {
                    let t = self.eval(part)?;
                    match &mut out {
                        None => out = Some(t),
                        Some(acc) => acc.rows.extend(t.rows),
                    }
                }
                out.unwrap_or_else(|| Table::new("union", &[], 0))
            }
            Plan::Distinct(input) => {
                let mut t = self.eval(input)?;
                let mut seen = HashSet::new();
                t.rows.retain(|row| seen.insert(row.clone()));
                t
            }
            Plan::Sort { input, by } => {
                let mut t = self.eval(input)?;
                let indices = by
                    .iter()
                    .map(|c| column_index(&t, c))
                    .collect::<Result<Vec<_>, _>>()?;
                t.rows.sort_by(|a, b| {
                    indices
                        .iter()
                        .map(|&i| a[i].cmp(&b[i]))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                t
            }
            Plan::Closure {
                seed,
                edges,
                from,
                to,
            } => self.closure(seed, edges, from, to)?,
        })
    }

    fn closure(&mut self, seed: &Plan, edges: &str, from: &str, to: &str) -> Result<Table, PlanError> {
        let seed = self.eval(seed)?;
        let node_idx = column_index(&seed, "node")?;
        let edge_table = self
            .tables
            .get(edges)
            .ok_or_else(|| PlanError::UnknownTable(edges.to_string()))?;

        let mut best: BTreeMap<Sym, Vec<Sym>> = BTreeMap::new();
        let mut frontier = Table::new("frontier", &["node", "path"], 0);
        for row in &seed.rows {
            if let Some(node) = row[node_idx].sym() {
                if best.insert(node, Vec::new()).is_none() {
                    frontier
                        .rows
                        .push(vec![Value::Sym(node), Value::Path(Vec::new())]);
                }
            }
        }

        let mut iterations = 0;
        while !frontier.is_empty() {
            iterations += 1;
            let stepped = hash_join(&frontier, edge_table, "node", from)?;
            let path_idx = column_index(&stepped, "path")?;
            let to_idx = column_index(&stepped, to)?;

            // Shortest paths first; among this level keep the least path per node.
            let mut level: BTreeMap<Sym, Vec<Sym>> = BTreeMap::new();
            for row in &stepped.rows {
                let (Some(next), Some(path)) = (row[to_idx].sym(), row[path_idx].path()) else {
                    continue;
                };
                if best.contains_key(&next) {
                    continue;
                }
                let mut extended = path.to_vec();
                extended.push(next);
                level
                    .entry(next)
                    .and_modify(|p| {
                        if extended < *p {
                            *p = extended.clone();
                        }
                    })
                    .or_insert(extended);
            }
            frontier.rows.clear();
            for (node, path) in level {
                best.insert(node, path.clone());
                frontier.rows.push(vec![Value::Sym(node), Value::Path(path)]);
            }
        }
        self.stats.closure_iterations = self.stats.closure_iterations.max(iterations);

        let mut out = Table::new("closure", &["node", "path"], 1);
        out.rows = best
            .into_iter()
            .map(|(node, path)| vec![Value::Sym(node), Value::Path(path)])
            .collect();
        Ok(out)
    }
}

fn column_index(table: &Table, column: &str) -> Result<usize, PlanError> {
    table.column(column).ok_or_else(|| PlanError::UnknownColumn {
        column: column.to_string(),
        available: table.columns.clone(),
    })
}

fn hash_join(left: &Table, right: &Table, left_col: &str, right_col: &str) -> Result<Table, PlanError> {
    let li = column_index(left, left_col)?;
    let ri = column_index(right, right_col)?;
    let mut index: HashMap<&Value, Vec<&Row>> = HashMap::new();
    for row in &right.rows {
        index.entry(&row[ri]).or_default().push(row);
    }
    let mut columns = left.columns.clone();
    columns.extend(
        right
            .columns
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ri)
            .map(|(_, c)| c.clone()),
    );
    let mut rows = Vec::new();
    for l in &left.rows {
        for r in index.get(&l[li]).into_iter().flatten() {
            let mut row = l.clone();
            row.extend(
                r.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != ri)
                    .map(|(_, v)| v.clone()),
            );
            rows.push(row);
        }
    }
    Ok(Table {
        name: format!("{}_{}", left.name, right.name),
        columns,
        rows,
        key_len: 0,
    })
}
