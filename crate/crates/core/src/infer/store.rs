//! Union-find type graph with kinded row variables.

use std::collections::{HashMap, HashSet};

use crate::kinds::{admits, extend, intersect, subset, without};
use crate::syntax::{Kind, Label, LabelSet, Name, Row, RowKind, RowTail, Scheme, TypeExpr};

pub type Ty = usize;

/// Level of variables that have been quantified.
pub const GENERIC: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub enum Node {
    Var {
        kind: Kind,
        level: u32,
    },
    /// A rigid variable, only equal to itself.
    Skolem {
        kind: Kind,
        name: Name,
    },
    Arrow(Ty, Ty),
    Record(Ty),
    Variant(Ty),
    Empty,
    Ext(Label, Ty, Ty),
    Link(Ty),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnifyError {
    Mismatch(Ty, Ty),
    MissingLabel(Label, Ty),
    Kind { found: RowKind, expected: RowKind },
    RecursiveRow(Ty),
}

#[derive(Clone, Debug, Default)]
pub struct Store {
    nodes: Vec<Node>,
    pub level: u32,
    /// Row variables solved so far, with the kind they had when solved.
    solved: Vec<(Ty, RowKind)>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mk(&mut self, n: Node) -> Ty {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    pub fn fresh(&mut self, kind: Kind) -> Ty {
        let level = self.level;
        self.fresh_at(kind, level)
    }

    pub fn fresh_at(&mut self, kind: Kind, level: u32) -> Ty {
        self.mk(Node::Var { kind, level })
    }

    pub fn fresh_row(&mut self, k: RowKind) -> Ty {
        self.fresh(Kind::Row(k))
    }

    pub fn arrow(&mut self, a: Ty, b: Ty) -> Ty {
        self.mk(Node::Arrow(a, b))
    }

    pub fn variant(&mut self, r: Ty) -> Ty {
        self.mk(Node::Variant(r))
    }

    pub fn record(&mut self, r: Ty) -> Ty {
        self.mk(Node::Record(r))
    }

    pub fn empty(&mut self) -> Ty {
        self.mk(Node::Empty)
    }

    pub fn ext(&mut self, l: Label, t: Ty, r: Ty) -> Ty {
        self.mk(Node::Ext(l, t, r))
    }

    /// Builds `(l1: t1 | ... | tail)`.
    pub fn row(&mut self, fields: Vec<(Label, Ty)>, tail: Ty) -> Ty {
        fields.into_iter().rev().fold(tail, |acc, (l, t)| self.ext(l, t, acc))
    }

    pub fn find(&mut self, t: Ty) -> Ty {
        let mut root = t;
        while let Node::Link(n) = self.nodes[root] {
            root = n;
        }
        let mut cur = t;
        while let Node::Link(n) = self.nodes[cur] {
            self.nodes[cur] = Node::Link(root);
            cur = n;
        }
        root
    }

    pub fn node(&mut self, t: Ty) -> Node {
        let r = self.find(t);
        self.nodes[r].clone()
    }

    fn link(&mut self, from: Ty, to: Ty) {
        if from != to {
            self.nodes[from] = Node::Link(to);
        }
    }

    /// Explicit fields of a row and the node it ends in.
    pub fn row_parts(&mut self, r: Ty) -> (Vec<(Label, Ty)>, Ty) {
        let mut fields = Vec::new();
        let mut cur = self.find(r);
        while let Node::Ext(l, t, rest) = self.nodes[cur].clone() {
            fields.push((l, t));
            cur = self.find(rest);
        }
        (fields, cur)
    }

    pub fn unify(&mut self, a: Ty, b: Ty) -> Result<(), UnifyError> {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return Ok(());
        }
        match (self.nodes[a].clone(), self.nodes[b].clone()) {
            (Node::Var { kind: ka, level: la }, Node::Var { kind: kb, level: lb }) => {
                let kind = match (ka, kb) {
                    (Kind::Type, Kind::Type) => Kind::Type,
                    (Kind::Row(x), Kind::Row(y)) => {
                        let k = intersect(&x, &y);
                        self.solved.push((a, x));
                        Kind::Row(k)
                    }
                    _ => return Err(UnifyError::Mismatch(a, b)),
                };
                self.nodes[b] = Node::Var {
                    kind,
                    level: la.min(lb),
                };
                self.link(a, b);
                Ok(())
            }
            (Node::Var { kind, level }, _) => self.bind(a, kind, level, b),
            (_, Node::Var { kind, level }) => self.bind(b, kind, level, a),
            (Node::Arrow(a1, a2), Node::Arrow(b1, b2)) => {
                self.link(a, b);
                self.unify(a1, b1)?;
                self.unify(a2, b2)
            }
            (Node::Record(r), Node::Record(s)) | (Node::Variant(r), Node::Variant(s)) => {
                self.link(a, b);
                self.unify(r, s)
            }
            (Node::Empty, Node::Empty) => {
                self.link(a, b);
                Ok(())
            }
            (Node::Ext(l, t, r), Node::Ext(..) | Node::Empty | Node::Skolem { .. }) => self.unify_ext(a, l, t, r, b),
            (Node::Empty | Node::Skolem { .. }, Node::Ext(l, t, r)) => self.unify_ext(b, l, t, r, a),
            (Node::Empty, Node::Skolem { .. }) | (Node::Skolem { .. }, Node::Empty) => Err(UnifyError::Mismatch(a, b)),
            _ => Err(UnifyError::Mismatch(a, b)),
        }
    }

    fn unify_ext(&mut self, a: Ty, l: Label, t: Ty, r: Ty, b: Ty) -> Result<(), UnifyError> {
        let (_, tail_b) = self.row_parts(b);
        let (_, tail_r) = self.row_parts(r);
        let open_b = matches!(self.nodes[tail_b], Node::Var { .. });
        let (t2, r2) = self.rewrite(b, &l)?;
        if open_b && self.find(tail_r) != tail_r {
            // the shared tail was just extended with `l`, so the rows can never agree
            return Err(UnifyError::RecursiveRow(a));
        }
        self.link(a, b);
        self.unify(t, t2)?;
        self.unify(r, r2)
    }

    /// Finds `l` in row `r`, returning its payload and the row without it.
    pub fn rewrite(&mut self, r: Ty, l: &Label) -> Result<(Ty, Ty), UnifyError> {
        let r = self.find(r);
        match self.nodes[r].clone() {
            Node::Ext(m, t, rest) if m == *l => Ok((t, rest)),
            Node::Ext(m, t, rest) => {
                let (p, rest2) = self.rewrite(rest, l)?;
                let n = self.ext(m, t, rest2);
                Ok((p, n))
            }
            Node::Var {
                kind: Kind::Row(k),
                level,
            } => {
                if !admits(&k, l) {
                    return Err(UnifyError::MissingLabel(l.clone(), r));
                }
                let p = self.fresh_at(Kind::Type, level);
                let rest = self.fresh_at(Kind::Row(without(&k, &LabelSet::from([l.clone()]))), level);
                let n = self.ext(l.clone(), p, rest);
                self.solved.push((r, k));
                self.link(r, n);
                Ok((p, rest))
            }
            _ => Err(UnifyError::MissingLabel(l.clone(), r)),
        }
    }

    fn bind(&mut self, v: Ty, kind: Kind, level: u32, t: Ty) -> Result<(), UnifyError> {
        let node = self.nodes[t].clone();
        match (&kind, &node) {
            (Kind::Type, Node::Arrow(..) | Node::Record(_) | Node::Variant(_)) => {}
            (Kind::Type, Node::Skolem { kind: Kind::Type, .. }) => {}
            (Kind::Row(k), Node::Empty | Node::Ext(..) | Node::Skolem { kind: Kind::Row(_), .. }) => {
                let (fields, tail) = self.row_parts(t);
                let labels: LabelSet = fields.iter().map(|(l, _)| l.clone()).collect();
                if let Some((l, _)) = fields.iter().find(|(l, _)| !admits(k, l)) {
                    return Err(UnifyError::Kind {
                        found: RowKind::Pos(LabelSet::from([l.clone()])),
                        expected: k.clone(),
                    });
                }
                let rest = without(k, &labels);
                match self.nodes[tail].clone() {
                    Node::Var {
                        kind: Kind::Row(k2),
                        level: l2,
                    } => {
                        self.nodes[tail] = Node::Var {
                            kind: Kind::Row(intersect(&k2, &rest)),
                            level: l2,
                        }
                    }
                    Node::Skolem {
                        kind: Kind::Row(k2), ..
                    } if !subset(&k2, &rest) => {
                        return Err(UnifyError::Kind {
                            found: k2,
                            expected: rest,
                        })
                    }
                    _ => {}
                }
            }
            _ => return Err(UnifyError::Mismatch(v, t)),
        }
        if let Kind::Row(k) = kind {
            self.solved.push((v, k));
        }
        self.adjust_levels(t, level);
        self.link(v, t);
        Ok(())
    }

    /// Kind of the row `r` as it stands now.
    pub fn row_kind(&mut self, r: Ty) -> Option<RowKind> {
        let (fields, tail) = self.row_parts(r);
        let mut k = match self.node(tail) {
            Node::Empty => RowKind::Pos(LabelSet::new()),
            Node::Var { kind: Kind::Row(k), .. } | Node::Skolem { kind: Kind::Row(k), .. } => k,
            _ => return None,
        };
        for (l, _) in fields.iter().rev() {
            k = extend(&k, l).ok()?;
        }
        Some(k)
    }

    /// Solved row variables whose solution no longer fits the kind they were solved at.
    pub fn audit(&mut self) -> Vec<(Ty, RowKind, Option<RowKind>)> {
        let solved = self.solved.clone();
        solved
            .into_iter()
            .filter_map(|(v, k)| {
                let now = self.row_kind(v);
                match &now {
                    Some(n) if subset(n, &k) => None,
                    _ => Some((v, k, now)),
                }
            })
            .collect()
    }

    fn adjust_levels(&mut self, t: Ty, level: u32) {
        let mut seen = HashSet::new();
        let mut work = vec![t];
        while let Some(t) = work.pop() {
            let t = self.find(t);
            if !seen.insert(t) {
                continue;
            }
            match &mut self.nodes[t] {
                Node::Var { level: l, .. } => {
                    if *l > level && *l != GENERIC {
                        *l = level
                    }
                }
                Node::Arrow(a, b) | Node::Ext(_, a, b) => work.extend([*a, *b]),
                Node::Record(r) | Node::Variant(r) => work.push(*r),
                _ => {}
            }
        }
    }

    /// Every variable reachable from `t`.
    pub fn free_vars(&mut self, t: Ty) -> Vec<Ty> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut work = vec![t];
        while let Some(t) = work.pop() {
            let t = self.find(t);
            if !seen.insert(t) {
                continue;
            }
            match self.nodes[t].clone() {
                Node::Var { .. } => out.push(t),
                Node::Arrow(a, b) | Node::Ext(_, a, b) => work.extend([b, a]),
                Node::Record(r) | Node::Variant(r) => work.push(r),
                _ => {}
            }
        }
        out
    }

    /// Quantifies the variables of `t` above the current level.
    pub fn generalize(&mut self, t: Ty) {
        for v in self.free_vars(t) {
            if let Node::Var { level, .. } = &mut self.nodes[v] {
                if *level > self.level {
                    *level = GENERIC;
                }
            }
        }
    }

    pub fn level_of(&mut self, v: Ty) -> Option<u32> {
        match self.node(v) {
            Node::Var { level, .. } => Some(level),
            _ => None,
        }
    }

    /// Copies `t`, replacing quantified variables by fresh ones at the current level.
    pub fn instantiate(&mut self, t: Ty) -> Ty {
        let mut memo = HashMap::new();
        self.copy(t, &mut memo)
    }

    fn copy(&mut self, t: Ty, memo: &mut HashMap<Ty, Ty>) -> Ty {
        let t = self.find(t);
        if let Some(&n) = memo.get(&t) {
            return n;
        }
        let node = self.nodes[t].clone();
        match node {
            Node::Var { kind, level } if level == GENERIC => {
                let n = self.fresh(kind);
                memo.insert(t, n);
                n
            }
            Node::Var { .. } | Node::Skolem { .. } | Node::Empty | Node::Link(_) => t,
            Node::Arrow(a, b) => {
                let n = self.mk(Node::Empty);
                memo.insert(t, n);
                let a = self.copy(a, memo);
                let b = self.copy(b, memo);
                self.nodes[n] = Node::Arrow(a, b);
                n
            }
            Node::Record(r) | Node::Variant(r) => {
                let n = self.mk(Node::Empty);
                memo.insert(t, n);
                let r2 = self.copy(r, memo);
                self.nodes[n] = match node {
                    Node::Record(_) => Node::Record(r2),
                    _ => Node::Variant(r2),
                };
                n
            }
            Node::Ext(l, a, r) => {
                let n = self.mk(Node::Empty);
                memo.insert(t, n);
                let a = self.copy(a, memo);
                let r = self.copy(r, memo);
                self.nodes[n] = Node::Ext(l, a, r);
                n
            }
        }
    }

    // ---- conversion from and to syntax ----

    /// Builds the graph of a resolved type. Unknown variables are created with the kind in
    /// `kinds` (default `Type`), as rigid skolems when `rigid` is set.
    pub fn import(
        &mut self,
        t: &TypeExpr,
        env: &mut HashMap<Name, Ty>,
        kinds: &HashMap<Name, Kind>,
        rigid: bool,
    ) -> Ty {
        match t {
            TypeExpr::Var(a) => self.import_var(a, env, kinds, rigid),
            TypeExpr::Arrow(a, b) => {
                let a = self.import(a, env, kinds, rigid);
                let b = self.import(b, env, kinds, rigid);
                self.arrow(a, b)
            }
            TypeExpr::Record(r) => {
                let r = self.import_row(r, env, kinds, rigid);
                self.record(r)
            }
            TypeExpr::Variant(r) => {
                let r = self.import_row(r, env, kinds, rigid);
                self.variant(r)
            }
            TypeExpr::Rec(a, body) => {
                let hole = self.fresh(Kind::Type);
                let old = env.insert(a.clone(), hole);
                let b = self.import(body, env, kinds, rigid);
                match old {
                    Some(o) => env.insert(a.clone(), o),
                    None => env.remove(a),
                };
                let b = self.find(b);
                self.link(hole, b);
                b
            }
            TypeExpr::Alias(..) => panic!("aliases must be resolved before import"),
        }
    }

    fn import_var(&mut self, a: &str, env: &mut HashMap<Name, Ty>, kinds: &HashMap<Name, Kind>, rigid: bool) -> Ty {
        if let Some(&t) = env.get(a) {
            return t;
        }
        let kind = kinds.get(a).cloned().unwrap_or(Kind::Type);
        let t = if rigid {
            self.mk(Node::Skolem {
                kind,
                name: a.to_string(),
            })
        } else {
            self.fresh(kind)
        };
        env.insert(a.to_string(), t);
        t
    }

    fn import_row(&mut self, r: &Row, env: &mut HashMap<Name, Ty>, kinds: &HashMap<Name, Kind>, rigid: bool) -> Ty {
        let fields: Vec<(Label, Ty)> = r
            .fields
            .iter()
            .map(|(l, t)| (l.clone(), self.import(t, env, kinds, rigid)))
            .collect();
        let tail = match &r.tail {
            RowTail::Empty => self.empty(),
            RowTail::Var(v) => self.import_var(v, env, kinds, rigid),
            RowTail::Fresh => {
                let kind = Kind::Row(RowKind::Neg(r.labels()));
                if rigid {
                    let name = format!("#{}", self.nodes.len());
                    self.mk(Node::Skolem { kind, name })
                } else {
                    self.fresh(kind)
                }
            }
        };
        self.row(fields, tail)
    }

    /// Reads a type back, introducing `as` binders at back edges.
    pub fn export(&mut self, t: Ty, names: &mut Namer) -> TypeExpr {
        let mut stack = Vec::new();
        let mut binders = HashMap::new();
        self.export_go(t, names, &mut stack, &mut binders)
    }

    fn export_go(
        &mut self,
        t: Ty,
        names: &mut Namer,
        stack: &mut Vec<Ty>,
        binders: &mut HashMap<Ty, Name>,
    ) -> TypeExpr {
        let t = self.find(t);
        match self.nodes[t].clone() {
            Node::Var { kind, .. } => TypeExpr::Var(names.var(t, &kind)),
            Node::Skolem { name, .. } => TypeExpr::Var(name),
            Node::Empty | Node::Ext(..) | Node::Link(_) => TypeExpr::Record(self.export_row(t, names, stack, binders)),
            node => {
                if stack.contains(&t) {
                    let n = binders.entry(t).or_insert_with(|| names.binder()).clone();
                    return TypeExpr::Var(n);
                }
                stack.push(t);
                let body = match node {
                    Node::Arrow(a, b) => TypeExpr::arrow(
                        self.export_go(a, names, stack, binders),
                        self.export_go(b, names, stack, binders),
                    ),
                    Node::Record(r) => TypeExpr::Record(self.export_row(r, names, stack, binders)),
                    Node::Variant(r) => TypeExpr::Variant(self.export_row(r, names, stack, binders)),
                    _ => unreachable!(),
                };
                stack.pop();
                match binders.remove(&t) {
                    Some(n) => TypeExpr::Rec(n, Box::new(body)),
                    None => body,
                }
            }
        }
    }

    fn export_row(&mut self, r: Ty, names: &mut Namer, stack: &mut Vec<Ty>, binders: &mut HashMap<Ty, Name>) -> Row {
        let (fields, tail) = self.row_parts(r);
        let fields = fields
            .into_iter()
            .map(|(l, t)| (l, self.export_go(t, names, stack, binders)))
            .collect();
        let tail = match self.nodes[tail].clone() {
            Node::Var { kind, .. } => RowTail::Var(names.var(tail, &kind)),
            Node::Skolem { name, .. } => RowTail::Var(name),
            _ => RowTail::Empty,
        };
        Row { fields, tail }
    }

    /// Reads `t` back as a scheme quantifying every variable in it.
    pub fn export_scheme(&mut self, t: Ty) -> Scheme {
        let mut names = Namer::default();
        let body = self.export(t, &mut names);
        let mut vars = Vec::new();
        for (v, name) in names.order.clone() {
            let kind = match self.node(v) {
                Node::Var { kind, .. } => kind,
                _ => Kind::Type,
            };
            vars.push((name, kind));
        }
        Scheme { vars, body }
    }
}

/// Readable names for variables: `p`, `p1`, ... for types, `r`, `r1`, ... for rows.
#[derive(Default, Debug)]
pub struct Namer {
    names: HashMap<Ty, Name>,
    pub order: Vec<(Ty, Name)>,
    types: usize,
    rows: usize,
    binders: usize,
}

impl Namer {
    fn numbered(base: &str, n: usize) -> Name {
        if n == 0 {
            base.to_string()
        } else {
            format!("{base}{n}")
        }
    }

    pub fn var(&mut self, t: Ty, kind: &Kind) -> Name {
        if let Some(n) = self.names.get(&t) {
            return n.clone();
        }
        let n = match kind {
            Kind::Type => {
                self.types += 1;
                Namer::numbered("p", self.types - 1)
            }
            Kind::Row(_) => {
                self.rows += 1;
                Namer::numbered("r", self.rows - 1)
            }
        };
        self.names.insert(t, n.clone());
        self.order.push((t, n.clone()));
        n
    }

    fn binder(&mut self) -> Name {
        self.binders += 1;
        Namer::numbered("t", self.binders - 1)
    }
}
