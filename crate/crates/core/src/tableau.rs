//! Labelled tableaux for JRC with budgeted fair saturation and countermodel extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::doc::RelDefault;
use crate::routley::{check_jrc_conditions, RoutleyEvaluator, RoutleyModel};
use crate::syntax::{check_dialect, closure, Dialect, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub index: u32,
    pub sharped: bool,
}

impl Label {
    pub const ROOT: Label = Label { index: 0, sharped: false };

    pub fn plain(index: u32) -> Label {
        Label { index, sharped: false }
    }

    pub fn bar(self) -> Label {
        Label { index: self.index, sharped: !self.sharped }
    }

    /// State name used in extracted models.
    pub fn state_name(self) -> String {
        if self.sharped {
            format!("w{}s", self.index)
        } else {
            format!("w{}", self.index)
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sharped {
            write!(f, "{}#", self.index)
        } else {
            write!(f, "{}", self.index)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeExpr {
    Signed(Formula, Sign, Label),
    FormulaEdge(Label, Formula, Label),
    TermEdge(Label, Term, Label),
    Ternary(Label, Label, Label),
}

impl NodeExpr {
    fn labels(&self) -> Vec<Label> {
        match self {
            NodeExpr::Signed(_, _, x) => vec![*x],
            NodeExpr::FormulaEdge(x, _, y) | NodeExpr::TermEdge(x, _, y) => vec![*x, *y],
            NodeExpr::Ternary(x, y, z) => vec![*x, *y, *z],
        }
    }
}

impl fmt::Display for NodeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeExpr::Signed(phi, Sign::Plus, x) => write!(f, "{phi}, +{x}"),
            NodeExpr::Signed(phi, Sign::Minus, x) => write!(f, "{phi}, -{x}"),
            NodeExpr::FormulaEdge(x, phi, y) => write!(f, "{x} -[{phi}]-> {y}"),
            NodeExpr::TermEdge(x, t, y) => write!(f, "{x} -<{t}>-> {y}"),
            NodeExpr::Ternary(x, y, z) => write!(f, "r {x} {y} {z}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    TNeg,
    FNeg,
    TAnd,
    FAnd,
    TImp,
    FImp,
    TRcf,
    FRcf,
    FRcf0,
    TJust,
    FJust,
    SumEdge,
    Normality,
    Cut,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::TNeg => "T~",
            Rule::FNeg => "F~",
            Rule::TAnd => "T&",
            Rule::FAnd => "F&",
            Rule::TImp => "T->",
            Rule::FImp => "F->",
            Rule::TRcf => "T~>",
            Rule::FRcf => "F~>",
            Rule::FRcf0 => "F~>0",
            Rule::TJust => "T:",
            Rule::FJust => "F:",
            Rule::SumEdge => "->+",
            Rule::Normality => "norm",
            Rule::Cut => "cut",
        }
    }

    /// Scheduling class: non-branching rules, then normality, then branching rules.
    fn class(self) -> u8 {
        match self {
            Rule::FAnd | Rule::TImp | Rule::Cut => 2,
            Rule::Normality => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_fresh_labels: u32,
    pub max_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_fresh_labels: 12, max_steps: 5000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error("formula `{formula}` is not a JRC formula: {reason}")]
    Dialect { formula: String, reason: String },
    #[error("`[]` is not handled by the tableau calculus")]
    BoxUnsupported,
    #[error("branch is not complete")]
    Incomplete,
}

// ---------------------------------------------------------------------------
// Proof trees

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LeafStatus {
    Closed,
    Open,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub expr: NodeExpr,
    pub parent: Option<usize>,
    /// `None` for root nodes.
    pub rule: Option<Rule>,
    /// Arena ids of the premises.
    pub premises: Vec<usize>,
}

/// Every node created during the search, in creation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofTree {
    pub nodes: Vec<TreeNode>,
    pub leaves: BTreeMap<usize, LeafStatus>,
}

impl ProofTree {
    /// `(number, expr, rule, premise numbers)` in creation order, numbers from 1.
    pub fn trace(&self) -> Vec<(usize, &NodeExpr, Option<Rule>, Vec<usize>)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i + 1, &n.expr, n.rule, n.premises.iter().map(|p| p + 1).collect()))
            .collect()
    }

    /// Rules in order of first use on the tree, one entry per application.
    pub fn rule_sequence(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        let mut last: Option<(Rule, &[usize])> = None;
        for n in &self.nodes {
            if let Some(r) = n.rule {
                if last != Some((r, n.premises.as_slice())) {
                    out.push(r);
                }
                last = Some((r, n.premises.as_slice()));
            }
        }
        out
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                ch[p].push(i);
            }
        }
        ch
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ch = self.children();
        let mut stack: Vec<(usize, usize)> =
            self.nodes.iter().position(|n| n.parent.is_none()).map(|r| vec![(r, 0)]).unwrap_or_default();
        while let Some((id, depth)) = stack.pop() {
            let n = &self.nodes[id];
            let pad = "  ".repeat(depth);
            match n.rule {
                None => writeln!(f, "{pad}{}. {}  [root]", id + 1, n.expr)?,
                Some(r) => {
                    let ps: Vec<String> = n.premises.iter().map(|p| (p + 1).to_string()).collect();
                    if ps.is_empty() {
                        writeln!(f, "{pad}{}. {}  [{}]", id + 1, n.expr, r)?;
                    } else {
                        writeln!(f, "{pad}{}. {}  [{} {}]", id + 1, n.expr, r, ps.join(","))?;
                    }
                }
            }
            match self.leaves.get(&id) {
                Some(LeafStatus::Closed) => writeln!(f, "{pad}   x closed")?,
                Some(LeafStatus::Open) => writeln!(f, "{pad}   o open")?,
                Some(LeafStatus::Exhausted) => writeln!(f, "{pad}   ? budget exhausted")?,
                None => {}
            }
            let kids = &ch[id];
            let d = if kids.len() > 1 { depth + 1 } else { depth };
            for &k in kids.iter().rev() {
                stack.push((k, d));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Branches

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Instance {
    One(Rule, usize),
    Two(Rule, usize, usize),
    Cut(Formula, Label),
    Norm(Label),
}

impl Instance {
    fn rule(&self) -> Rule {
        match self {
            Instance::One(r, _) | Instance::Two(r, ..) => *r,
            Instance::Cut(..) => Rule::Cut,
            Instance::Norm(_) => Rule::Normality,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub nodes: Vec<NodeExpr>,
    ids: Vec<usize>,
    index: HashMap<NodeExpr, usize>,
    labels: BTreeMap<Label, usize>,
    antecedents: BTreeMap<Formula, usize>,
    queue: BTreeMap<(u8, usize, u64), Instance>,
    queued: HashSet<Instance>,
    seq: u64,
    pub next_fresh: u32,
    pub fresh_used: u32,
    tip: Option<usize>,
    closed: bool,
}

impl Branch {
    fn new() -> Branch {
        Branch {
            nodes: Vec::new(),
            ids: Vec::new(),
            index: HashMap::new(),
            labels: BTreeMap::new(),
            antecedents: BTreeMap::new(),
            queue: BTreeMap::new(),
            queued: HashSet::new(),
            seq: 0,
            next_fresh: 1,
            fresh_used: 0,
            tip: None,
            closed: false,
        }
    }

    pub fn contains(&self, e: &NodeExpr) -> bool {
        self.index.contains_key(e)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Labels occurring on the branch, in label order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.labels.keys().copied()
    }

    /// Antecedents of `~>` nodes on the branch.
    pub fn rcf_antecedents(&self) -> impl Iterator<Item = &Formula> + '_ {
        self.antecedents.keys()
    }

    fn enqueue(&mut self, inst: Instance, avail: usize, disabled: &BTreeSet<Rule>) {
        if disabled.contains(&inst.rule()) || !self.queued.insert(inst.clone()) {
            return;
        }
        self.seq += 1;
        self.queue.insert((inst.rule().class(), avail, self.seq), inst);
    }

    /// Appends a node, schedules the instances it enables and reports closure.
    fn insert(&mut self, e: NodeExpr, arena_id: usize, disabled: &BTreeSet<Rule>) {
        let p = self.nodes.len();
        self.nodes.push(e.clone());
        self.ids.push(arena_id);
        self.index.insert(e.clone(), p);
        self.tip = Some(arena_id);

        for x in e.labels() {
            if !x.sharped {
                self.next_fresh = self.next_fresh.max(x.index + 1);
            }
            if self.labels.contains_key(&x) {
                continue;
            }
            self.labels.insert(x, p);
            self.enqueue(Instance::Norm(x), p, disabled);
            let ants: Vec<Formula> = self.antecedents.keys().cloned().collect();
            for a in ants {
                self.enqueue(Instance::Cut(a, x), p, disabled);
            }
        }

        match &e {
            NodeExpr::Signed(f, s, x) => {
                let opposite = NodeExpr::Signed(f.clone(), s.flip(), *x);
                if self.index.contains_key(&opposite) {
                    self.closed = true;
                    return;
                }
                if let Formula::RelCf(a, _) = f {
                    if !self.antecedents.contains_key(&**a) {
                        self.antecedents.insert((**a).clone(), p);
                        let ls: Vec<Label> = self.labels.keys().copied().collect();
                        for l in ls {
                            self.enqueue(Instance::Cut((**a).clone(), l), p, disabled);
                        }
                    }
                }
                let unary = match (f, s) {
                    (Formula::Neg(_), Sign::Plus) => Some(Rule::TNeg),
                    (Formula::Neg(_), Sign::Minus) => Some(Rule::FNeg),
                    (Formula::And(..), Sign::Plus) => Some(Rule::TAnd),
                    (Formula::And(..), Sign::Minus) => Some(Rule::FAnd),
                    (Formula::RelImp(..), Sign::Minus) => Some(Rule::FImp),
                    (Formula::RelCf(..), Sign::Minus) if *x == Label::ROOT => Some(Rule::FRcf0),
                    (Formula::RelCf(..), Sign::Minus) => Some(Rule::FRcf),
                    (Formula::Just(..), Sign::Minus) => Some(Rule::FJust),
                    _ => None,
                };
                if let Some(r) = unary {
                    self.enqueue(Instance::One(r, p), p, disabled);
                }
                if *s == Sign::Plus {
                    let partners: Vec<(usize, Rule)> = self
                        .nodes
                        .iter()
                        .enumerate()
                        .filter_map(|(q, n)| match (f, n) {
                            (Formula::RelImp(..), NodeExpr::Ternary(y, ..)) if y == x => Some((q, Rule::TImp)),
                            (Formula::RelCf(a, _), NodeExpr::FormulaEdge(y, b, _)) if y == x && **a == *b => {
                                Some((q, Rule::TRcf))
                            }
                            (Formula::Just(t, _), NodeExpr::TermEdge(y, u, _)) if y == x && t == u => {
                                Some((q, Rule::TJust))
                            }
                            _ => None,
                        })
                        .collect();
                    for (q, r) in partners {
                        self.enqueue(Instance::Two(r, p, q), p, disabled);
                    }
                }
            }
            NodeExpr::FormulaEdge(x, a, _) => {
                let partners: Vec<usize> = self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| {
                        matches!(n, NodeExpr::Signed(Formula::RelCf(b, _), Sign::Plus, y) if y == x && **b == *a)
                    })
                    .map(|(q, _)| q)
                    .collect();
                for q in partners {
                    self.enqueue(Instance::Two(Rule::TRcf, q, p), p, disabled);
                }
            }
            NodeExpr::TermEdge(x, t, _) => {
                if matches!(t, Term::Sum(..)) {
                    self.enqueue(Instance::One(Rule::SumEdge, p), p, disabled);
                }
                let partners: Vec<usize> = self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| matches!(n, NodeExpr::Signed(Formula::Just(u, _), Sign::Plus, y) if y == x && u == t))
                    .map(|(q, _)| q)
                    .collect();
                for q in partners {
                    self.enqueue(Instance::Two(Rule::TJust, q, p), p, disabled);
                }
            }
            NodeExpr::Ternary(x, ..) => {
                let partners: Vec<usize> = self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| matches!(n, NodeExpr::Signed(Formula::RelImp(..), Sign::Plus, y) if y == x))
                    .map(|(q, _)| q)
                    .collect();
                for q in partners {
                    self.enqueue(Instance::Two(Rule::TImp, q, p), p, disabled);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Prover

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub steps: usize,
    pub budget: Budget,
    pub reason: String,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ProofResult {
    Closed(ProofTree),
    Open { branch: Branch, model: RoutleyModel, root: String, tree: ProofTree },
    Exhausted(BudgetReport),
}

impl ProofResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            ProofResult::Closed(_) => "CLOSED",
            ProofResult::Open { .. } => "OPEN",
            ProofResult::Exhausted(_) => "EXHAUSTED",
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, ProofResult::Closed(_))
    }

    pub fn is_open(&self) -> bool {
        matches!(self, ProofResult::Open { .. })
    }

    pub fn tree(&self) -> Option<&ProofTree> {
        match self {
            ProofResult::Closed(t) | ProofResult::Open { tree: t, .. } => Some(t),
            ProofResult::Exhausted(_) => None,
        }
    }
}

/// Tableau prover; rules can be disabled to build deliberately broken variants.
#[derive(Debug, Clone, Default)]
pub struct Prover {
    pub budget: Budget,
    pub disabled: BTreeSet<Rule>,
}

struct Pending {
    rule: Rule,
    premises: Vec<usize>,
    nodes: Vec<NodeExpr>,
}

enum Outcome {
    Closed,
    Open,
    OutOfLabels,
    OutOfSteps,
}

impl Prover {
    pub fn new(budget: Budget) -> Prover {
        Prover { budget, disabled: BTreeSet::new() }
    }

    pub fn without_rule(mut self, r: Rule) -> Prover {
        self.disabled.insert(r);
        self
    }

    pub fn prove(&self, premises: &[Formula], goal: &Formula) -> Result<ProofResult, TableauError> {
        for f in premises.iter().chain(std::iter::once(goal)) {
            check_dialect(f, Dialect::JRC)
                .map_err(|reason| TableauError::Dialect { formula: f.to_string(), reason })?;
            if crate::syntax::subformulas(f).iter().any(|g| matches!(g, Formula::Box(_))) {
                return Err(TableauError::BoxUnsupported);
            }
        }
        let mut tree = ProofTree::default();
        let mut root = Branch::new();
        let roots = premises
            .iter()
            .map(|p| NodeExpr::Signed(p.clone(), Sign::Plus, Label::ROOT))
            .chain(std::iter::once(NodeExpr::Signed(goal.clone(), Sign::Minus, Label::ROOT)));
        for e in roots {
            if root.contains(&e) || root.closed {
                continue;
            }
            let id = tree.nodes.len();
            tree.nodes.push(TreeNode { expr: e.clone(), parent: root.tip, rule: None, premises: vec![] });
            root.insert(e, id, &self.disabled);
        }

        let mut steps = 0usize;
        let mut exhausted: Option<String> = None;
        let mut stack: Vec<(Branch, Option<Pending>)> = vec![(root, None)];
        while let Some((mut b, pending)) = stack.pop() {
            if let Some(pd) = pending {
                self.add_nodes(&mut b, &mut tree, pd);
            }
            match self.saturate(&mut b, &mut tree, &mut stack, &mut steps) {
                Outcome::Closed => {
                    tree.leaves.insert(b.tip.expect("nonempty branch"), LeafStatus::Closed);
                }
                Outcome::Open => {
                    let tip = b.tip.expect("nonempty branch");
                    tree.leaves.insert(tip, LeafStatus::Open);
                    let model = extract_model(&b)?;
                    return Ok(ProofResult::Open { branch: b, model, root: Label::ROOT.state_name(), tree });
                }
                Outcome::OutOfLabels => {
                    tree.leaves.insert(b.tip.expect("nonempty branch"), LeafStatus::Exhausted);
                    exhausted.get_or_insert_with(|| {
                        format!("a branch needed more than {} fresh labels", self.budget.max_fresh_labels)
                    });
                }
                Outcome::OutOfSteps => {
                    tree.leaves.insert(b.tip.expect("nonempty branch"), LeafStatus::Exhausted);
                    return Ok(ProofResult::Exhausted(BudgetReport {
                        steps,
                        budget: self.budget,
                        reason: format!("step limit {} reached", self.budget.max_steps),
                    }));
                }
            }
        }
        match exhausted {
            Some(reason) => Ok(ProofResult::Exhausted(BudgetReport { steps, budget: self.budget, reason })),
            None => Ok(ProofResult::Closed(tree)),
        }
    }

    fn add_nodes(&self, b: &mut Branch, tree: &mut ProofTree, pd: Pending) {
        let prem_ids: Vec<usize> = pd.premises.iter().map(|&q| b.ids[q]).collect();
        for e in pd.nodes {
            if b.closed || b.contains(&e) {
                continue;
            }
            let id = tree.nodes.len();
            tree.nodes.push(TreeNode { expr: e.clone(), parent: b.tip, rule: Some(pd.rule), premises: prem_ids.clone() });
            b.insert(e, id, &self.disabled);
        }
    }

    fn saturate(
        &self,
        b: &mut Branch,
        tree: &mut ProofTree,
        stack: &mut Vec<(Branch, Option<Pending>)>,
        steps: &mut usize,
    ) -> Outcome {
        loop {
            if b.closed {
                return Outcome::Closed;
            }
            let Some((_, inst)) = b.queue.pop_first() else {
                return Outcome::Open;
            };
            let (premises, alts) = match self.conclusions(b, &inst) {
                Some(x) => x,
                None => return Outcome::OutOfLabels,
            };
            if alts.iter().any(|alt| alt.iter().all(|e| b.contains(e))) {
                continue;
            }
            if *steps >= self.budget.max_steps {
                return Outcome::OutOfSteps;
            }
            *steps += 1;
            let rule = inst.rule();
            let mut alts = alts.into_iter();
            let first = alts.next().expect("at least one alternative");
            if let Some(second) = alts.next() {
                stack.push((b.clone(), Some(Pending { rule, premises: premises.clone(), nodes: second })));
            }
            self.add_nodes(b, tree, Pending { rule, premises, nodes: first });
        }
    }

    /// Premise positions and alternatives of an instance; `None` when fresh labels run out.
    fn conclusions(&self, b: &mut Branch, inst: &Instance) -> Option<(Vec<usize>, Vec<Vec<NodeExpr>>)> {
        use NodeExpr::*;
        let signed = |q: usize| match &b.nodes[q] {
            Signed(f, s, x) => (f.clone(), *s, *x),
            _ => unreachable!("unary rules fire on signed nodes"),
        };
        let fresh = |b: &mut Branch, n: u32| -> Option<Vec<Label>> {
            if b.fresh_used + n > self.budget.max_fresh_labels {
                return None;
            }
            let out = (0..n).map(|k| Label::plain(b.next_fresh + k)).collect();
            b.next_fresh += n;
            b.fresh_used += n;
            Some(out)
        };
        let pos = |x: Formula, l: Label| Signed(x, Sign::Plus, l);
        let neg = |x: Formula, l: Label| Signed(x, Sign::Minus, l);
        Some(match inst {
            Instance::One(Rule::SumEdge, q) => {
                let TermEdge(x, Term::Sum(s, t), y) = &b.nodes[*q] else { unreachable!() };
                (vec![*q], vec![vec![TermEdge(*x, (**s).clone(), *y), TermEdge(*x, (**t).clone(), *y)]])
            }
            Instance::One(rule, q) => {
                let (f, _, x) = signed(*q);
                let alts = match (rule, f) {
                    (Rule::TNeg, Formula::Neg(a)) => vec![vec![neg(*a, x.bar())]],
                    (Rule::FNeg, Formula::Neg(a)) => vec![vec![pos(*a, x.bar())]],
                    (Rule::TAnd, Formula::And(a, c)) => vec![vec![pos(*a, x), pos(*c, x)]],
                    (Rule::FAnd, Formula::And(a, c)) => vec![vec![neg(*a, x)], vec![neg(*c, x)]],
                    (Rule::FImp, Formula::RelImp(a, c)) => {
                        let (j, k) = if x == Label::ROOT {
                            let j = fresh(b, 1)?[0];
                            (j, j)
                        } else {
                            let v = fresh(b, 2)?;
                            (v[0], v[1])
                        };
                        vec![vec![Ternary(x, j, k), pos(*a, j), neg(*c, k)]]
                    }
                    (Rule::FRcf, Formula::RelCf(a, c)) => {
                        let j = fresh(b, 1)?[0];
                        vec![vec![FormulaEdge(x, *a, j), neg(*c, j)]]
                    }
                    (Rule::FRcf0, Formula::RelCf(a, c)) => {
                        let j = fresh(b, 1)?[0];
                        vec![vec![FormulaEdge(x, (*a).clone(), j), pos(*a, j), neg(*c, j)]]
                    }
                    (Rule::FJust, Formula::Just(t, a)) => {
                        let j = fresh(b, 1)?[0];
                        vec![vec![TermEdge(x, t, j), neg(*a, j)]]
                    }
                    _ => unreachable!("instance scheduled for a matching shape"),
                };
                (vec![*q], alts)
            }
            Instance::Two(Rule::TImp, q, r) => {
                let (f, _, _) = signed(*q);
                let (Formula::RelImp(a, c), Ternary(_, y, z)) = (f, &b.nodes[*r]) else { unreachable!() };
                (vec![*q, *r], vec![vec![neg(*a, *y)], vec![pos(*c, *z)]])
            }
            Instance::Two(Rule::TRcf, q, r) => {
                let (f, _, _) = signed(*q);
                let (Formula::RelCf(_, c), FormulaEdge(_, _, y)) = (f, &b.nodes[*r]) else { unreachable!() };
                (vec![*q, *r], vec![vec![pos(*c, *y)]])
            }
            Instance::Two(Rule::TJust, q, r) => {
                let (f, _, _) = signed(*q);
                let (Formula::Just(_, a), TermEdge(_, _, y)) = (f, &b.nodes[*r]) else { unreachable!() };
                (vec![*q, *r], vec![vec![pos(*a, *y)]])
            }
            Instance::Two(..) => unreachable!("binary rules are T->, T~> and T:"),
            Instance::Cut(phi, x) => {
                let at = b.antecedents[phi].max(b.labels[x]);
                (
                    vec![at],
                    vec![vec![neg(phi.clone(), *x)], vec![pos(phi.clone(), *x), FormulaEdge(*x, phi.clone(), *x)]],
                )
            }
            Instance::Norm(x) => (vec![b.labels[x]], vec![vec![Ternary(Label::ROOT, *x, *x)]]),
        })
    }
}

/// Proves with the default prover and the given budget.
pub fn prove(premises: &[Formula], goal: &Formula, budget: Budget) -> Result<ProofResult, TableauError> {
    Prover::new(budget).prove(premises, goal)
}

// ---------------------------------------------------------------------------
// Countermodels

/// Model induced by an open branch; the root label becomes the only normal state.
pub fn extract_model(b: &Branch) -> Result<RoutleyModel, TableauError> {
    if b.closed {
        return Err(TableauError::Incomplete);
    }
    let labels: Vec<Label> = b.labels().collect();
    let idx: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let names: Vec<String> = labels.iter().map(|l| l.state_name()).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut m = RoutleyModel::with_states(&name_refs, &["w0"]);
    m.formula_rel_default = RelDefault::TruthsetAll;
    for (i, l) in labels.iter().enumerate() {
        m.star[i] = idx.get(&l.bar()).copied().unwrap_or(i);
    }
    for a in b.rcf_antecedents() {
        m.formula_rels.insert(a.clone(), BTreeSet::new());
    }
    for e in &b.nodes {
        match e {
            NodeExpr::Ternary(x, y, z) => {
                m.ternary.insert((idx[x], idx[y], idx[z]));
            }
            NodeExpr::FormulaEdge(x, a, y) => {
                m.formula_rels.entry(a.clone()).or_default().insert((idx[x], idx[y]));
            }
            NodeExpr::TermEdge(x, t, y) => {
                m.term_rels.entry(t.clone()).or_default().insert((idx[x], idx[y]));
            }
            NodeExpr::Signed(Formula::Atom(p), Sign::Plus, x) => {
                m.valuation[idx[x]].insert(p.clone());
            }
            NodeExpr::Signed(..) => {}
        }
    }
    Ok(m)
}

/// Formulas signed on the branch together with the sequent, closed under subformulas.
pub fn branch_universe(b: &Branch, premises: &[Formula], goal: &Formula) -> BTreeSet<Formula> {
    let mut fs: Vec<&Formula> = premises.iter().chain(std::iter::once(goal)).collect();
    for e in &b.nodes {
        match e {
            NodeExpr::Signed(f, ..) | NodeExpr::FormulaEdge(_, f, _) => fs.push(f),
            _ => {}
        }
    }
    closure(fs)
}

/// Whether `m` is a JRC model on `universe` that satisfies the premises and refutes the goal at `root`.
pub fn refutes(m: &RoutleyModel, root: &str, premises: &[Formula], goal: &Formula, universe: &BTreeSet<Formula>) -> bool {
    let Ok(w) = m.state(root) else { return false };
    if !m.normal[w] || !check_jrc_conditions(m, universe).passed() {
        return false;
    }
    let ev = RoutleyEvaluator::new(m);
    premises.iter().all(|p| ev.holds(w, p)) && !ev.holds(w, goal)
}

/// Checks a verdict: open models must refute the sequent; closed sequents must have no
/// countermodel up to `size_bound`.
pub fn verify_result(r: &ProofResult, premises: &[Formula], goal: &Formula, size_bound: usize) -> bool {
    match r {
        ProofResult::Open { branch, model, root, .. } => {
            refutes(model, root, premises, goal, &branch_universe(branch, premises, goal))
        }
        ProofResult::Closed(_) => crate::falsifier::find_jrc_countermodel(premises, goal, size_bound).is_none(),
        ProofResult::Exhausted(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, Dialect::JRC).unwrap()
    }

    #[test]
    fn labels_bar_involutively() {
        let x = Label::plain(3);
        assert_eq!(x.bar().bar(), x);
        assert_eq!(x.bar().to_string(), "3#");
    }

    #[test]
    fn identity_closes_via_cut() {
        let r = prove(&[], &f("p ~> p"), Budget::default()).unwrap();
        assert!(r.is_closed());
    }

    #[test]
    fn box_is_rejected() {
        assert_eq!(prove(&[], &f("[]p"), Budget::default()).unwrap_err(), TableauError::BoxUnsupported);
    }
}
