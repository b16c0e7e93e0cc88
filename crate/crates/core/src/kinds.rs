//! Row-kind algebra and kinding of type expressions.

use std::collections::HashMap;

use crate::syntax::{Kind, Label, LabelSet, Name, Row, RowKind, RowTail, TypeExpr};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KindError {
    #[error("unbound type variable `{0}`")]
    Unbound(Name),
    #[error("label `{0}` occurs twice in a row")]
    Duplicate(Label),
    #[error("`{name}` has kind {found} but is used at {expected}")]
    Mismatch {
        name: Name,
        expected: String,
        found: String,
    },
    #[error("recursive type `{0} as ...` is not contractive")]
    NonContractive(Name),
    #[error("unresolved type alias `{0}`")]
    Alias(Name),
}

pub type KindingEnv = HashMap<Name, Kind>;

/// `k1 ⊑ k2` on the label sets the kinds denote.
pub fn subset(k1: &RowKind, k2: &RowKind) -> bool {
    match (k1, k2) {
        (RowKind::Pos(a), RowKind::Pos(b)) => a.is_subset(b),
        (RowKind::Neg(a), RowKind::Neg(b)) => b.is_subset(a),
        (RowKind::Pos(a), RowKind::Neg(b)) => a.is_disjoint(b),
        (RowKind::Neg(_), RowKind::Pos(_)) => false,
    }
}

/// `k + l`: the kind of `(l: t | ρ)` when `ρ : k`.
pub fn extend(k: &RowKind, l: &Label) -> Result<RowKind, KindError> {
    match k {
        RowKind::Pos(s) if !s.contains(l) => {
            let mut s = s.clone();
            s.insert(l.clone());
            Ok(RowKind::Pos(s))
        }
        RowKind::Neg(s) if s.contains(l) => {
            let mut s = s.clone();
            s.remove(l);
            Ok(RowKind::Neg(s))
        }
        _ => Err(KindError::Duplicate(l.clone())),
    }
}

/// Whether a row of kind `k` may contain `l`.
pub fn admits(k: &RowKind, l: &Label) -> bool {
    match k {
        RowKind::Pos(s) => s.contains(l),
        RowKind::Neg(s) => !s.contains(l),
    }
}

/// Greatest kind below both.
pub fn intersect(a: &RowKind, b: &RowKind) -> RowKind {
    match (a, b) {
        (RowKind::Pos(x), RowKind::Pos(y)) => RowKind::Pos(x.intersection(y).cloned().collect()),
        (RowKind::Neg(x), RowKind::Neg(y)) => RowKind::Neg(x.union(y).cloned().collect()),
        (RowKind::Pos(x), RowKind::Neg(y)) | (RowKind::Neg(y), RowKind::Pos(x)) => {
            RowKind::Pos(x.difference(y).cloned().collect())
        }
    }
}

/// `k` with the labels in `ls` taken out.
pub fn without(k: &RowKind, ls: &LabelSet) -> RowKind {
    intersect(k, &RowKind::Neg(ls.clone()))
}

/// The empty row kind `{}`.
pub fn empty() -> RowKind {
    RowKind::Pos(LabelSet::new())
}

/// Interprets `k` over a finite universe of labels.
pub fn denote(k: &RowKind, universe: &LabelSet) -> LabelSet {
    match k {
        RowKind::Pos(s) => s.clone(),
        RowKind::Neg(s) => universe.difference(s).cloned().collect(),
    }
}

/// Kind of a type under `env`. Aliases must already be expanded.
pub fn kind_of(env: &KindingEnv, t: &TypeExpr) -> Result<Kind, KindError> {
    match t {
        TypeExpr::Var(a) => env.get(a).cloned().ok_or_else(|| KindError::Unbound(a.clone())),
        TypeExpr::Arrow(a, b) => {
            expect_type(env, a)?;
            expect_type(env, b)?;
            Ok(Kind::Type)
        }
        TypeExpr::Record(r) | TypeExpr::Variant(r) => {
            row_kind_of(env, r)?;
            Ok(Kind::Type)
        }
        TypeExpr::Rec(a, body) => {
            check_contractive(a, body)?;
            let mut inner = env.clone();
            inner.insert(a.clone(), Kind::Type);
            expect_type(&inner, body)?;
            Ok(Kind::Type)
        }
        TypeExpr::Alias(n, _) => Err(KindError::Alias(n.clone())),
    }
}

fn expect_type(env: &KindingEnv, t: &TypeExpr) -> Result<(), KindError> {
    match kind_of(env, t)? {
        Kind::Type => Ok(()),
        Kind::Row(k) => Err(KindError::Mismatch {
            name: match t {
                TypeExpr::Var(a) => a.clone(),
                _ => String::new(),
            },
            expected: "a type".into(),
            found: k.to_string(),
        }),
    }
}

/// Kind of a row. An implicit tail gets the kind excluding the row's own labels.
pub fn row_kind_of(env: &KindingEnv, r: &Row) -> Result<RowKind, KindError> {
    let mut k = match &r.tail {
        RowTail::Empty => empty(),
        RowTail::Fresh => RowKind::Neg(r.labels()),
        RowTail::Var(v) => match env.get(v) {
            Some(Kind::Row(k)) => k.clone(),
            Some(Kind::Type) => {
                return Err(KindError::Mismatch {
                    name: v.clone(),
                    expected: "a row".into(),
                    found: "a type".into(),
                })
            }
            None => return Err(KindError::Unbound(v.clone())),
        },
    };
    for (l, t) in r.fields.iter().rev() {
        expect_type(env, t)?;
        k = extend(&k, l)?;
    }
    Ok(k)
}

/// The body of `a as body` must start with a type constructor.
pub fn check_contractive(a: &str, body: &TypeExpr) -> Result<(), KindError> {
    match body {
        TypeExpr::Arrow(..) | TypeExpr::Record(_) | TypeExpr::Variant(_) => Ok(()),
        TypeExpr::Rec(_, inner) => check_contractive(a, inner),
        TypeExpr::Var(_) | TypeExpr::Alias(..) => Err(KindError::NonContractive(a.to_string())),
    }
}
