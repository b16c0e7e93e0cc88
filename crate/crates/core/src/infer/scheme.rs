//! Type annotations, aliases and comparisons between schemes.

use std::collections::{BTreeSet, HashMap};

use super::store::{Store, Ty};
use crate::kinds::{check_contractive, kind_of, KindError, KindingEnv};
use crate::syntax::{tail_uses, Kind, Name, Row, RowKind, RowTail, Scheme, TypeAnnot, TypeExpr};

/// Declared type aliases, by name.
#[derive(Clone, Debug, Default)]
pub struct Aliases {
    defs: HashMap<Name, TypeAnnot>,
}

/// An annotation with aliases expanded and every variable kinded.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub ty: TypeExpr,
    pub kinds: HashMap<Name, Kind>,
}

impl Aliases {
    pub fn new() -> Aliases {
        let mut a = Aliases::default();
        // numerals are labels; a natural number is a variant over one fixed unknown row
        a.defs.insert(
            "Nat".into(),
            TypeAnnot {
                forall: Vec::new(),
                kinds: Vec::new(),
                ty: TypeExpr::Variant(Row {
                    fields: Vec::new(),
                    tail: RowTail::Var("n".into()),
                }),
                span: Default::default(),
            },
        );
        a
    }

    pub fn define(&mut self, name: &str, a: TypeAnnot) -> Result<(), KindError> {
        let mut counter = 0;
        self.expand(&a.ty, &mut vec![name.to_string()], &mut counter, &mut Vec::new())?;
        self.defs.insert(name.to_string(), a);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    /// Expands aliases and computes the kind of every variable.
    pub fn resolve(&self, a: &TypeAnnot) -> Result<Resolved, KindError> {
        let mut counter = 0;
        let mut extra = Vec::new();
        let ty = self.expand(&a.ty, &mut Vec::new(), &mut counter, &mut extra)?;
        let mut declared: Vec<(Name, RowKind)> = a.kinds.clone();
        declared.extend(extra);
        kinds_for(ty, &declared)
    }

    fn expand(
        &self,
        t: &TypeExpr,
        active: &mut Vec<Name>,
        counter: &mut usize,
        extra: &mut Vec<(Name, RowKind)>,
    ) -> Result<TypeExpr, KindError> {
        let row = |r: &Row, active: &mut Vec<Name>, counter: &mut usize, extra: &mut Vec<(Name, RowKind)>| {
            Ok::<Row, KindError>(Row {
                fields: r
                    .fields
                    .iter()
                    .map(|(l, f)| Ok((l.clone(), self.expand(f, active, counter, extra)?)))
                    .collect::<Result<_, KindError>>()?,
                tail: r.tail.clone(),
            })
        };
        Ok(match t {
            TypeExpr::Var(_) => t.clone(),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(
                self.expand(a, active, counter, extra)?,
                self.expand(b, active, counter, extra)?,
            ),
            TypeExpr::Record(r) => TypeExpr::Record(row(r, active, counter, extra)?),
            TypeExpr::Variant(r) => TypeExpr::Variant(row(r, active, counter, extra)?),
            TypeExpr::Rec(a, b) => TypeExpr::Rec(a.clone(), Box::new(self.expand(b, active, counter, extra)?)),
            TypeExpr::Alias(n, args) => {
                if active.contains(n) {
                    return Err(KindError::Alias(format!("{n} refers to itself; use an `as` binder")));
                }
                let def = self.defs.get(n).ok_or_else(|| KindError::Alias(n.clone()))?;
                if !args.is_empty() && args.len() != def.forall.len() {
                    return Err(KindError::Alias(format!(
                        "{n} takes {} argument(s), {} given",
                        def.forall.len(),
                        args.len()
                    )));
                }
                let args = args
                    .iter()
                    .map(|a| self.expand(a, active, counter, extra))
                    .collect::<Result<Vec<_>, _>>()?;
                active.push(n.clone());
                let body = self.expand(&def.ty, active, counter, extra)?;
                active.pop();
                // binders get a private spelling per expansion; other locals are shared by
                // every expansion within one annotation
                let mut binders = BTreeSet::new();
                rec_binders(&def.ty, &mut binders);
                let mut rename: HashMap<Name, TypeExpr> = HashMap::new();
                for (i, p) in def.forall.iter().enumerate() {
                    let v = args.get(i).cloned().unwrap_or_else(|| {
                        *counter += 1;
                        TypeExpr::Var(format!("#{p}{counter}"))
                    });
                    rename.insert(p.clone(), v);
                }
                let mut locals = BTreeSet::new();
                type_vars(&body, &mut locals);
                for v in locals {
                    if rename.contains_key(&v) {
                        continue;
                    }
                    let fresh = if binders.contains(&v) {
                        *counter += 1;
                        format!("#{v}{counter}")
                    } else {
                        format!("#{n}.{v}")
                    };
                    rename.insert(v.clone(), TypeExpr::Var(fresh));
                }
                for (v, k) in &def.kinds {
                    if let Some(TypeExpr::Var(n)) = rename.get(v) {
                        extra.push((n.clone(), k.clone()));
                    }
                }
                substitute(&body, &rename)
            }
        })
    }
}

fn rec_binders(t: &TypeExpr, out: &mut BTreeSet<Name>) {
    match t {
        TypeExpr::Var(_) => {}
        TypeExpr::Arrow(a, b) => {
            rec_binders(a, out);
            rec_binders(b, out)
        }
        TypeExpr::Record(r) | TypeExpr::Variant(r) => r.fields.iter().for_each(|(_, f)| rec_binders(f, out)),
        TypeExpr::Rec(a, b) => {
            out.insert(a.clone());
            rec_binders(b, out)
        }
        TypeExpr::Alias(_, args) => args.iter().for_each(|a| rec_binders(a, out)),
    }
}

/// Names of variables and binders occurring in `t`.
fn type_vars(t: &TypeExpr, out: &mut BTreeSet<Name>) {
    match t {
        TypeExpr::Var(a) => {
            out.insert(a.clone());
        }
        TypeExpr::Arrow(a, b) => {
            type_vars(a, out);
            type_vars(b, out)
        }
        TypeExpr::Record(r) | TypeExpr::Variant(r) => {
            r.fields.iter().for_each(|(_, f)| type_vars(f, out));
            if let RowTail::Var(v) = &r.tail {
                out.insert(v.clone());
            }
        }
        TypeExpr::Rec(a, b) => {
            out.insert(a.clone());
            type_vars(b, out)
        }
        TypeExpr::Alias(_, args) => args.iter().for_each(|a| type_vars(a, out)),
    }
}

fn substitute(t: &TypeExpr, s: &HashMap<Name, TypeExpr>) -> TypeExpr {
    let row = |r: &Row| Row {
        fields: r.fields.iter().map(|(l, f)| (l.clone(), substitute(f, s))).collect(),
        tail: match &r.tail {
            RowTail::Var(v) => match s.get(v) {
                Some(TypeExpr::Var(n)) => RowTail::Var(n.clone()),
                _ => r.tail.clone(),
            },
            other => other.clone(),
        },
    };
    match t {
        TypeExpr::Var(a) => s.get(a).cloned().unwrap_or_else(|| t.clone()),
        TypeExpr::Arrow(a, b) => TypeExpr::arrow(substitute(a, s), substitute(b, s)),
        TypeExpr::Record(r) => TypeExpr::Record(row(r)),
        TypeExpr::Variant(r) => TypeExpr::Variant(row(r)),
        TypeExpr::Rec(a, b) => {
            let a2 = match s.get(a) {
                Some(TypeExpr::Var(n)) => n.clone(),
                _ => a.clone(),
            };
            TypeExpr::Rec(a2, Box::new(substitute(b, s)))
        }
        TypeExpr::Alias(n, args) => TypeExpr::Alias(n.clone(), args.iter().map(|a| substitute(a, s)).collect()),
    }
}

/// Kinds every variable of an alias-free type: declared row kinds win, other row tails get the
/// kind excluding the labels of the rows they end, everything else is a type.
pub fn kinds_for(ty: TypeExpr, declared: &[(Name, RowKind)]) -> Result<Resolved, KindError> {
    let mut kinds: HashMap<Name, Kind> = HashMap::new();
    let mut vars = BTreeSet::new();
    type_vars(&ty, &mut vars);
    let mut binders = BTreeSet::new();
    collect_binders(&ty, &mut binders);
    for v in &vars {
        if !binders.contains(v) {
            kinds.insert(v.clone(), Kind::Type);
        }
    }
    for (v, uses) in tail_uses(&ty) {
        kinds.insert(v, Kind::Row(crate::syntax::default_row_kind(&uses)));
    }
    for (v, k) in declared {
        kinds.insert(v.clone(), Kind::Row(k.clone()));
    }
    check_contractive_all(&ty)?;
    let env: KindingEnv = kinds.clone();
    match kind_of(&env, &ty)? {
        Kind::Type => Ok(Resolved { ty, kinds }),
        Kind::Row(k) => Err(KindError::Mismatch {
            name: String::new(),
            expected: "a type".into(),
            found: k.to_string(),
        }),
    }
}

fn collect_binders(t: &TypeExpr, out: &mut BTreeSet<Name>) {
    match t {
        TypeExpr::Rec(a, b) => {
            out.insert(a.clone());
            collect_binders(b, out)
        }
        TypeExpr::Arrow(a, b) => {
            collect_binders(a, out);
            collect_binders(b, out)
        }
        TypeExpr::Record(r) | TypeExpr::Variant(r) => r.fields.iter().for_each(|(_, f)| collect_binders(f, out)),
        TypeExpr::Var(_) | TypeExpr::Alias(..) => {}
    }
}

fn check_contractive_all(t: &TypeExpr) -> Result<(), KindError> {
    match t {
        TypeExpr::Rec(a, b) => {
            check_contractive(a, b)?;
            check_contractive_all(b)
        }
        TypeExpr::Arrow(a, b) => {
            check_contractive_all(a)?;
            check_contractive_all(b)
        }
        TypeExpr::Record(r) | TypeExpr::Variant(r) => r.fields.iter().try_for_each(|(_, f)| check_contractive_all(f)),
        TypeExpr::Var(_) | TypeExpr::Alias(..) => Ok(()),
    }
}

fn scheme_kinds(s: &Scheme) -> HashMap<Name, Kind> {
    s.vars.iter().cloned().collect()
}

/// Whether every instance of `specific` is also an instance of `general`.
pub fn instance_of(general: &Scheme, specific: &Scheme) -> bool {
    let mut store = Store::new();
    store.level = 1;
    let s = store.import(&specific.body, &mut HashMap::new(), &scheme_kinds(specific), true);
    let g = store.import(&general.body, &mut HashMap::new(), &scheme_kinds(general), false);
    store.unify(g, s).is_ok()
}

/// Equality up to renaming of quantified variables, row order and unrolling of recursive types.
pub fn scheme_equal_alpha(a: &Scheme, b: &Scheme) -> bool {
    instance_of(a, b) && instance_of(b, a)
}

/// Reads an annotation as a scheme quantifying all of its variables.
pub fn annot_scheme(aliases: &Aliases, a: &TypeAnnot) -> Result<Scheme, KindError> {
    let r = aliases.resolve(a)?;
    let mut store = Store::new();
    let t: Ty = store.import(&r.ty, &mut HashMap::new(), &r.kinds, false);
    Ok(store.export_scheme(t))
}
