//! Tabled backward chaining.
//!
//! Every derived call pattern (predicate plus which arguments are bound) gets
//! an answer table. Evaluation proceeds in passes from the outermost goal:
//! within a pass each table is expanded at most once, and a call that
//! re-enters a table under expansion sees its current answers. Passes repeat
//! until none adds an answer, at which point every table touched is complete.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use super::rules::{Atom, GroundAtom, Predicate, Rule, RuleId, RuleSet, Term, Var};
use super::{Partition, TripleStore};
use crate::symbol::Sym;

type Tuple = (Sym, Sym);

/// Which fact partitions a query may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Conceptual,
    All,
}

impl Scope {
    fn admits(self, partition: Partition) -> bool {
        match self {
            Scope::Conceptual => partition == Partition::Conceptual,
            Scope::All => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("goal {predicate}(_, _) is fully unbound and exceeds the enumeration bound of {bound}")]
    UnboundGoal { predicate: Predicate, bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CallKey {
    predicate: Predicate,
    args: [Option<Sym>; 2],
}

impl CallKey {
    fn of(atom: &Atom, env: &[Option<Sym>]) -> Self {
        let bind = |t: &Term| match t {
            Term::Const(c) => Some(*c),
            Term::Var(v) => env.get(*v as usize).copied().flatten(),
        };
        Self {
            predicate: atom.predicate,
            args: [bind(&atom.args[0]), bind(&atom.args[1])],
        }
    }

    fn is_unbound(&self) -> bool {
        self.args == [None, None]
    }
}

#[derive(Debug, Default)]
struct AnswerTable {
    answers: BTreeSet<Tuple>,
    pass: u64,
    complete: bool,
}

/// Variable assignments for one solution of a goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bindings(Vec<(Var, Sym)>);

impl Bindings {
    pub fn get(&self, var: Var) -> Option<Sym> {
        self.0.iter().find(|(v, _)| *v == var).map(|(_, s)| *s)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A derivation of one ground atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub atom: GroundAtom,
    /// `None` for a stored fact.
    pub rule: Option<RuleId>,
    pub children: Vec<Rc<Proof>>,
    /// Pre-order atoms of the proof, taxonomy steps omitted. Proofs are
    /// ranked by (length, then lexicographic order) of this trace.
    trace: Vec<GroundAtom>,
}

impl Proof {
    fn new(atom: GroundAtom, rule: Option<RuleId>, children: Vec<Rc<Proof>>) -> Self {
        let mut trace = Vec::new();
        if !atom.0.is_taxonomy() {
            trace.push(atom);
        }
        for child in &children {
            trace.extend_from_slice(&child.trace);
        }
        Self {
            atom,
            rule,
            children,
            trace,
        }
    }

    pub fn trace(&self) -> &[GroundAtom] {
        &self.trace
    }

    fn rank(&self) -> (usize, &[GroundAtom]) {
        (self.trace.len(), &self.trace)
    }

    /// Checks every leaf against the store and every inner node against its
    /// rule's shape.
    pub fn replays(&self, store: &TripleStore, rules: &RuleSet, scope: Scope) -> bool {
        match self.rule {
            None => self.children.is_empty() && store.holds(self.atom, scope),
            Some(id) => {
                let Some(rule) = rules.rules().iter().find(|r| r.id == id) else {
                    return false;
                };
                let mut env = vec![None; rule.var_count()];
                let bind = |t: &Term, value: Sym, env: &mut Vec<Option<Sym>>| match t {
                    Term::Const(c) => *c == value,
                    Term::Var(v) => match env[*v as usize] {
                        Some(existing) => existing == value,
                        None => {
                            env[*v as usize] = Some(value);
                            true
                        }
                    },
                };
                if rule.head.predicate != self.atom.0
                    || !bind(&rule.head.args[0], self.atom.1, &mut env)
                    || !bind(&rule.head.args[1], self.atom.2, &mut env)
                    || rule.body.len() != self.children.len()
                {
                    return false;
                }
                for (atom, child) in rule.body.iter().zip(&self.children) {
                    if atom.predicate != child.atom.0
                        || !bind(&atom.args[0], child.atom.1, &mut env)
                        || !bind(&atom.args[1], child.atom.2, &mut env)
                        || !child.replays(store, rules, scope)
                    {
                        return false;
                    }
                }
                true
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub passes: u64,
    pub physical_facts_read: usize,
    pub tables: usize,
}

/// Per-query solver state. Create one per query; tables are not shared.
pub struct Solver<'s> {
    store: &'s TripleStore,
    rules: &'s RuleSet,
    scope: Scope,
    bound: usize,
    tables: HashMap<CallKey, AnswerTable>,
    pass: u64,
    changed: bool,
    overflow: Option<Predicate>,
    proofs: HashMap<GroundAtom, Option<Rc<Proof>>>,
    proving: HashSet<GroundAtom>,
    stats: SolveStats,
}

impl<'s> Solver<'s> {
    pub fn new(store: &'s TripleStore, rules: &'s RuleSet, scope: Scope) -> Self {
        Self {
            store,
            rules,
            scope,
            bound: store.len(),
            tables: HashMap::new(),
            pass: 0,
            changed: false,
            overflow: None,
            proofs: HashMap::new(),
            proving: HashSet::new(),
            stats: SolveStats::default(),
        }
    }

    /// Overrides the answer bound for fully unbound derived goals
    /// (defaults to the store size).
    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn stats(&self) -> SolveStats {
        SolveStats {
            tables: self.tables.len(),
            ..self.stats
        }
    }

    /// All distinct solutions of `goal`, in ascending order.
    pub fn solve(&mut self, goal: &Atom) -> Result<Vec<Bindings>, SolveError> {
        let key = CallKey::of(goal, &[]);
        let tuples = self.complete(key)?;
        let mut out = BTreeSet::new();
        for (a, b) in tuples {
            let mut bindings: Vec<(Var, Sym)> = Vec::with_capacity(2);
            let mut consistent = true;
            for (term, value) in goal.args.iter().zip([a, b]) {
                if let Term::Var(v) = term {
                    match bindings.iter().find(|(bv, _)| bv == v) {
                        Some((_, existing)) if *existing != value => consistent = false,
                        Some(_) => {}
                        None => bindings.push((*v, value)),
                    }
                }
            }
            if consistent {
                out.insert(Bindings(bindings));
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Convenience: values of `var` across all solutions.
    pub fn values(&mut self, goal: &Atom, var: Var) -> Result<Vec<Sym>, SolveError> {
        let mut values: Vec<Sym> = self.solve(goal)?.into_iter().filter_map(|b| b.get(var)).collect();
        values.sort_unstable();
        values.dedup();
        Ok(values)
    }

    fn complete(&mut self, key: CallKey) -> Result<Vec<Tuple>, SolveError> {
        if key.predicate.is_stored() {
            return Ok(self.facts(key));
        }
        loop {
            self.pass += 1;
            self.stats.passes += 1;
            self.changed = false;
            self.eval(key);
            if let Some(predicate) = self.overflow {
                return Err(SolveError::UnboundGoal {
                    predicate,
                    bound: self.bound,
                });
            }
            if !self.changed {
                break;
            }
        }
        for table in self.tables.values_mut() {
            table.complete = true;
        }
        Ok(self.tables[&key].answers.iter().copied().collect())
    }

    fn facts(&mut self, key: CallKey) -> Vec<Tuple> {
        let mut out = Vec::new();
        for (a, b, partition) in self.store.lookup(key.predicate, key.args) {
            if partition == Partition::Physical {
                self.stats.physical_facts_read += 1;
            }
            if self.scope.admits(partition) {
                out.push((a, b));
            }
        }
        out
    }

    fn eval(&mut self, key: CallKey) -> Vec<Tuple> {
        if key.predicate.is_stored() {
            return self.facts(key);
        }
        if self.overflow.is_some() {
            return Vec::new();
        }
        let table = self.tables.entry(key).or_default();
        if table.complete || table.pass == self.pass {
            return table.answers.iter().copied().collect();
        }
        table.pass = self.pass;

        let rules = self.rules;
        for rule in rules.for_predicate(key.predicate) {
            let produced = self.eval_rule(rule, key);
            let table = self.tables.get_mut(&key).expect("table");
            for tuple in produced {
                if table.answers.insert(tuple) {
                    self.changed = true;
                }
            }
            if key.is_unbound() && table.answers.len() > self.bound {
                self.overflow = Some(key.predicate);
                return Vec::new();
            }
        }
        self.tables[&key].answers.iter().copied().collect()
    }

    fn eval_rule(&mut self, rule: &Rule, key: CallKey) -> Vec<Tuple> {
        let mut env = vec![None; rule.var_count()];
        if !unify_head(&rule.head, key.args, &mut env) {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.join_body(&rule.body, 0, &mut env, &mut |env| {
            if let (Some(a), Some(b)) = (ground(&rule.head.args[0], env), ground(&rule.head.args[1], env)) {
                out.push((a, b));
            }
        });
        out
    }

    fn join_body(
        &mut self,
        body: &[Atom],
        index: usize,
        env: &mut Vec<Option<Sym>>,
        emit: &mut dyn FnMut(&[Option<Sym>]),
    ) {
        let Some(atom) = body.get(index) else {
            emit(env);
            return;
        };
        let key = CallKey::of(atom, env);
        for (a, b) in self.eval(key) {
            let saved = env.clone();
            if bind(&atom.args[0], a, env) && bind(&atom.args[1], b, env) {
                self.join_body(body, index + 1, env, emit);
            }
            *env = saved;
        }
    }

    /// Least derivation of a ground atom: fewest non-taxonomy steps, then
    /// lexicographically least pre-order trace.
    pub fn prove(&mut self, atom: GroundAtom) -> Result<Option<Rc<Proof>>, SolveError> {
        if let Some(known) = self.proofs.get(&atom) {
            return Ok(known.clone());
        }
        let (predicate, a, b) = atom;
        if predicate.is_stored() {
            let proof = self
                .store
                .holds(atom, self.scope)
                .then(|| Rc::new(Proof::new(atom, None, Vec::new())));
            self.proofs.insert(atom, proof.clone());
            return Ok(proof);
        }
        if !self.proving.insert(atom) {
            return Ok(None);
        }

        let mut best: Option<Rc<Proof>> = None;
        let rules = self.rules;
        for rule in rules.for_predicate(predicate) {
            let mut env = vec![None; rule.var_count()];
            if !unify_head(&rule.head, [Some(a), Some(b)], &mut env) {
                continue;
            }
            for solution in self.body_solutions(&rule.body, env)? {
                let mut children = Vec::with_capacity(rule.body.len());
                for body_atom in &rule.body {
                    let ground_atom = (
                        body_atom.predicate,
                        ground(&body_atom.args[0], &solution).expect("bound"),
                        ground(&body_atom.args[1], &solution).expect("bound"),
                    );
                    match self.prove(ground_atom)? {
                        Some(child) => children.push(child),
                        None => break,
                    }
                }
                if children.len() != rule.body.len() {
                    continue;
                }
                let candidate = Proof::new(atom, Some(rule.id), children);
                if best.as_ref().is_none_or(|b| candidate.rank() < b.rank()) {
                    best = Some(Rc::new(candidate));
                }
            }
        }
        self.proving.remove(&atom);
        self.proofs.insert(atom, best.clone());
        Ok(best)
    }

    /// All complete variable assignments satisfying `body` from `env`, using
    /// completed answer tables.
    fn body_solutions(
        &mut self,
        body: &[Atom],
        env: Vec<Option<Sym>>,
    ) -> Result<Vec<Vec<Option<Sym>>>, SolveError> {
        let mut partial = vec![env];
        for atom in body {
            let mut next = Vec::new();
            for env in partial {
                let key = CallKey::of(atom, &env);
                for (a, b) in self.complete(key)? {
                    let mut extended = env.clone();
                    if bind(&atom.args[0], a, &mut extended) && bind(&atom.args[1], b, &mut extended) {
                        next.push(extended);
                    }
                }
            }
            partial = next;
        }
        Ok(partial)
    }
}

fn unify_head(head: &Atom, args: [Option<Sym>; 2], env: &mut [Option<Sym>]) -> bool {
    head.args
        .iter()
        .zip(args)
        .all(|(term, value)| match (term, value) {
            (_, None) => true,
            (Term::Const(c), Some(v)) => *c == v,
            (Term::Var(var), Some(v)) => match env[*var as usize] {
                Some(existing) => existing == v,
                None => {
                    env[*var as usize] = Some(v);
                    true
                }
            },
        })
}

fn bind(term: &Term, value: Sym, env: &mut [Option<Sym>]) -> bool {
    match term {
        Term::Const(c) => *c == value,
        Term::Var(v) => match env[*v as usize] {
            Some(existing) => existing == value,
            None => {
                env[*v as usize] = Some(value);
                true
            }
        },
    }
}

fn ground(term: &Term, env: &[Option<Sym>]) -> Option<Sym> {
    match term {
        Term::Const(c) => Some(*c),
        Term::Var(v) => env[*v as usize],
    }
}
