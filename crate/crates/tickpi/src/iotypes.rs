//! Plain input/output channel types: no sizes, no times. Serves as the
//! baseline discipline and as the target of the forgetful map from the sized
//! systems.

use std::collections::BTreeMap;

use crate::syntax::{Expr, Ident, Process};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimpleType {
    Nat,
    Bool,
    List(Box<SimpleType>),
    /// Both capabilities.
    Ch(Vec<SimpleType>),
    /// Input capability only.
    In(Vec<SimpleType>),
    /// Output capability only.
    Out(Vec<SimpleType>),
}

impl SimpleType {
    pub fn is_base(&self) -> bool {
        matches!(
            self,
            SimpleType::Nat | SimpleType::Bool | SimpleType::List(_)
        )
    }
}

/// Structural subtyping: `Ch` may lose capabilities, inputs are covariant in
/// their payloads, outputs contravariant, and `Ch` payloads are invariant.
pub fn subtype_simple(t: &SimpleType, u: &SimpleType) -> bool {
    use SimpleType::*;
    match (t, u) {
        (Nat, Nat) | (Bool, Bool) => true,
        (List(a), List(b)) => subtype_simple(a, b),
        (Ch(a), Ch(b)) => args_invariant(a, b),
        (Ch(a), In(b)) | (In(a), In(b)) => args_covariant(a, b),
        (Ch(a), Out(b)) | (Out(a), Out(b)) => args_contravariant(a, b),
        _ => false,
    }
}

fn args_covariant(a: &[SimpleType], b: &[SimpleType]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| subtype_simple(x, y))
}

fn args_contravariant(a: &[SimpleType], b: &[SimpleType]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| subtype_simple(y, x))
}

fn args_invariant(a: &[SimpleType], b: &[SimpleType]) -> bool {
    args_covariant(a, b) && args_contravariant(a, b)
}

pub type SimpleCtx = BTreeMap<Ident, SimpleType>;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("{0}")]
pub struct SimpleTypeError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, SimpleTypeError> {
    Err(SimpleTypeError(msg.into()))
}

/// Synthesise the type of an expression where possible. `Nil` alone does not
/// determine its element type, so it only checks against a known list type.
pub fn synth_expr_simple(ctx: &SimpleCtx, e: &Expr) -> Result<SimpleType, SimpleTypeError> {
    match e {
        Expr::Var(v) => ctx
            .get(v)
            .cloned()
            .ok_or_else(|| SimpleTypeError(format!("unbound name `{v}`"))),
        Expr::Zero => Ok(SimpleType::Nat),
        Expr::Succ(inner) => {
            check_expr_simple(ctx, inner, &SimpleType::Nat)?;
            Ok(SimpleType::Nat)
        }
        Expr::True | Expr::False => Ok(SimpleType::Bool),
        Expr::Cons(h, t) => {
            let eh = synth_expr_simple(ctx, h)?;
            if !eh.is_base() {
                return err(format!("list elements must carry base types"));
            }
            check_expr_simple(ctx, t, &SimpleType::List(Box::new(eh.clone())))?;
            Ok(SimpleType::List(Box::new(eh)))
        }
        Expr::Nil => err("cannot synthesise the element type of an empty list"),
    }
}

pub fn check_expr_simple(
    ctx: &SimpleCtx,
    e: &Expr,
    t: &SimpleType,
) -> Result<(), SimpleTypeError> {
    match (e, t) {
        (Expr::Nil, SimpleType::List(_)) => Ok(()),
        (Expr::Cons(h, tl), SimpleType::List(b)) => {
            check_expr_simple(ctx, h, b)?;
            check_expr_simple(ctx, tl, t)
        }
        _ => {
            let s = synth_expr_simple(ctx, e)?;
            if subtype_simple(&s, t) {
                Ok(())
            } else {
                err(format!("expression has type {s:?}, expected {t:?}"))
            }
        }
    }
}

/// Check a process under a typing context. Unannotated restrictions get
/// their payload types synthesised from the first output occurrence of the
/// restricted name in the body.
pub fn check_process_simple(ctx: &SimpleCtx, p: &Process) -> Result<(), SimpleTypeError> {
    match p {
        Process::Nil => Ok(()),
        Process::Par(a, b) => {
            check_process_simple(ctx, a)?;
            check_process_simple(ctx, b)
        }
        Process::Serv { chan, params, body } | Process::Input { chan, params, body } => {
            let args = match ctx.get(chan) {
                Some(SimpleType::Ch(a)) | Some(SimpleType::In(a)) => a.clone(),
                Some(other) => {
                    return err(format!(
                        "`{chan}` has type {other:?}, which lacks the input capability"
                    ))
                }
                None => return err(format!("unbound channel `{chan}`")),
            };
            if args.len() != params.len() {
                return err(format!(
                    "`{chan}` carries {} payloads but {} parameters are bound",
                    args.len(),
                    params.len()
                ));
            }
            let mut inner = ctx.clone();
            for (v, t) in params.iter().zip(&args) {
                inner.insert(v.clone(), t.clone());
            }
            check_process_simple(&inner, body)
        }
        Process::Output { chan, args, .. } => {
            let tys = match ctx.get(chan) {
                Some(SimpleType::Ch(a)) | Some(SimpleType::Out(a)) => a.clone(),
                Some(other) => {
                    return err(format!(
                        "`{chan}` has type {other:?}, which lacks the output capability"
                    ))
                }
                None => return err(format!("unbound channel `{chan}`")),
            };
            if tys.len() != args.len() {
                return err(format!(
                    "`{chan}` carries {} payloads but {} were supplied",
                    tys.len(),
                    args.len()
                ));
            }
            for (e, t) in args.iter().zip(&tys) {
                check_expr_simple(ctx, e, t)?;
            }
            Ok(())
        }
        Process::Nu { name, annot, body } => {
            let t = match annot {
                Some(sized) => crate::spantypes::forget(sized),
                None => infer_nu_type(ctx, name, body)?,
            };
            let mut inner = ctx.clone();
            inner.insert(name.clone(), t);
            check_process_simple(&inner, body)
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            check_expr_simple(ctx, scrutinee, &SimpleType::Nat)?;
            check_process_simple(ctx, zero)?;
            let mut inner = ctx.clone();
            inner.insert(succ_bind.clone(), SimpleType::Nat);
            check_process_simple(&inner, succ)
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            let t = synth_expr_simple(ctx, scrutinee)?;
            let elem = match &t {
                SimpleType::List(b) => (**b).clone(),
                other => return err(format!("match on non-list type {other:?}")),
            };
            check_process_simple(ctx, nil)?;
            let mut inner = ctx.clone();
            inner.insert(head_bind.clone(), elem);
            inner.insert(tail_bind.clone(), t);
            check_process_simple(&inner, cons)
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            check_expr_simple(ctx, cond, &SimpleType::Bool)?;
            check_process_simple(ctx, then_branch)?;
            check_process_simple(ctx, else_branch)
        }
        Process::Tick(q) => check_process_simple(ctx, q),
    }
}

/// Usage-based synthesis for an unannotated restriction: take the payload
/// types from the first output on the name whose arguments synthesise, and
/// fall back to the arity of an input occurrence only if every payload can
/// be determined.
fn infer_nu_type(
    ctx: &SimpleCtx,
    name: &Ident,
    body: &Process,
) -> Result<SimpleType, SimpleTypeError> {
    fn find_output<'a>(name: &Ident, p: &'a Process) -> Option<&'a Vec<Expr>> {
        match p {
            Process::Output { chan, args, .. } if chan == name => Some(args),
            Process::Par(a, b) => find_output(name, a).or_else(|| find_output(name, b)),
            Process::Serv { chan, params, body } | Process::Input { chan, params, body } => {
                if chan != name && !params.contains(name) {
                    find_output(name, body)
                } else if chan == name {
                    find_output(name, body)
                } else {
                    None
                }
            }
            Process::Nu { name: n, body, .. } if n != name => find_output(name, body),
            Process::MatchNat { zero, succ, .. } => {
                find_output(name, zero).or_else(|| find_output(name, succ))
            }
            Process::MatchList { nil, cons, .. } => {
                find_output(name, nil).or_else(|| find_output(name, cons))
            }
            Process::If {
                then_branch,
                else_branch,
                ..
            } => find_output(name, then_branch).or_else(|| find_output(name, else_branch)),
            Process::Tick(q) => find_output(name, q),
            _ => None,
        }
    }
    match find_output(name, body) {
        Some(args) => {
            let tys: Result<Vec<SimpleType>, _> =
                args.iter().map(|e| synth_expr_simple(ctx, e)).collect();
            match tys {
                Ok(tys) => Ok(SimpleType::Ch(tys)),
                Err(e) => err(format!(
                    "cannot infer payload types for `new {name}`: {e}; annotate the restriction"
                )),
            }
        }
        None => err(format!(
            "cannot infer a type for `new {name}`: no output usage found; annotate the restriction"
        )),
    }
}
