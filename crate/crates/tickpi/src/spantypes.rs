//! Sized types with time annotations and the span (parallel-time) checker.
//!
//! Sizes refine naturals and lists with interval bounds; channel types carry
//! the time at which their communication happens, and server types carry a
//! complexity bound for the session they spawn. Checking a declared bound is
//! syntax-directed descent: the bound is pushed into the term so branch
//! refinements stay available, while `synthesize_span` builds the
//! best bottom-up expression for reporting.

use std::collections::BTreeMap;

use crate::index::{
    entails, fold_add, fold_max, fold_monus, Constraint, EntailConfig, Entailment, IndexEnv,
    IndexExpr, IndexVar, Valuation,
};
use crate::iotypes::SimpleType;
use crate::syntax::{Expr, Ident, Process};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizedType {
    /// `Nat[I,J]`: a natural between I and J.
    Nat { lo: IndexExpr, hi: IndexExpr },
    /// `List[I,J](B)`: a list of base-type elements with length between I and J.
    List {
        lo: IndexExpr,
        hi: IndexExpr,
        elem: Box<SizedType>,
    },
    Bool,
    /// `ch^I(T...)`: both capabilities, communication at time I.
    Ch { time: IndexExpr, args: Vec<SizedType> },
    /// `in^I(T...)`.
    In { time: IndexExpr, args: Vec<SizedType> },
    /// `out^I(T...)`.
    Out { time: IndexExpr, args: Vec<SizedType> },
    /// `serv^I[i...](K; T...)`: a server ready at time I whose sessions cost K.
    Serv {
        time: IndexExpr,
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<SizedType>,
    },
    /// `iserv^I[i...](K; T...)`: the replicated-input capability alone.
    IServ {
        time: IndexExpr,
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<SizedType>,
    },
    /// `oserv^I[i...](K; T...)`: the call capability alone.
    OServ {
        time: IndexExpr,
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<SizedType>,
    },
}

impl SizedType {
    pub fn is_base(&self) -> bool {
        matches!(
            self,
            SizedType::Nat { .. } | SizedType::List { .. } | SizedType::Bool
        )
    }

    pub fn nat(lo: IndexExpr, hi: IndexExpr) -> Self {
        SizedType::Nat { lo, hi }
    }

    pub fn list(lo: IndexExpr, hi: IndexExpr, elem: SizedType) -> Self {
        SizedType::List {
            lo,
            hi,
            elem: Box::new(elem),
        }
    }

    /// Substitute index variables throughout the type's indices.
    pub fn subst(&self, map: &BTreeMap<IndexVar, IndexExpr>) -> SizedType {
        use SizedType::*;
        let s = |i: &IndexExpr| i.subst(map);
        let sargs = |args: &Vec<SizedType>| args.iter().map(|t| t.subst(map)).collect();
        match self {
            Nat { lo, hi } => Nat {
                lo: s(lo),
                hi: s(hi),
            },
            List { lo, hi, elem } => List {
                lo: s(lo),
                hi: s(hi),
                elem: Box::new(elem.subst(map)),
            },
            Bool => Bool,
            Ch { time, args } => Ch {
                time: s(time),
                args: sargs(args),
            },
            In { time, args } => In {
                time: s(time),
                args: sargs(args),
            },
            Out { time, args } => Out {
                time: s(time),
                args: sargs(args),
            },
            Serv {
                time,
                binders,
                cost,
                args,
            }
            | IServ {
                time,
                binders,
                cost,
                args,
            }
            | OServ {
                time,
                binders,
                cost,
                args,
            } => {
                // Binders shadow outer index variables inside cost and args.
                let inner: BTreeMap<IndexVar, IndexExpr> = map
                    .iter()
                    .filter(|(k, _)| !binders.contains(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let mk = |time, binders: &Vec<IndexVar>, cost: &IndexExpr, args: &Vec<SizedType>| {
                    (
                        time,
                        binders.clone(),
                        cost.subst(&inner),
                        args.iter().map(|t| t.subst(&inner)).collect::<Vec<_>>(),
                    )
                };
                let (time, binders, cost, args) = mk(s(time), binders, cost, args);
                match self {
                    Serv { .. } => Serv {
                        time,
                        binders,
                        cost,
                        args,
                    },
                    IServ { .. } => IServ {
                        time,
                        binders,
                        cost,
                        args,
                    },
                    _ => OServ {
                        time,
                        binders,
                        cost,
                        args,
                    },
                }
            }
        }
    }
}

/// Strip sizes and times; server types collapse onto channel types.
pub fn forget(t: &SizedType) -> SimpleType {
    match t {
        SizedType::Nat { .. } => SimpleType::Nat,
        SizedType::Bool => SimpleType::Bool,
        SizedType::List { elem, .. } => SimpleType::List(Box::new(forget(elem))),
        SizedType::Ch { args, .. } => SimpleType::Ch(args.iter().map(forget).collect()),
        SizedType::In { args, .. } => SimpleType::In(args.iter().map(forget).collect()),
        SizedType::Out { args, .. } => SimpleType::Out(args.iter().map(forget).collect()),
        SizedType::Serv { args, .. } => SimpleType::Ch(args.iter().map(forget).collect()),
        SizedType::IServ { args, .. } => SimpleType::In(args.iter().map(forget).collect()),
        SizedType::OServ { args, .. } => SimpleType::Out(args.iter().map(forget).collect()),
    }
}

pub type TypeCtx = BTreeMap<Ident, SizedType>;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("{message}")]
pub struct TypeError {
    pub message: String,
    pub witness: Option<Valuation>,
}

impl TypeError {
    pub fn new(message: impl Into<String>) -> Self {
        TypeError {
            message: message.into(),
            witness: None,
        }
    }
    fn context(mut self, prefix: &str) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }
}

/// Entailment-aware checker. Holds the index environment (variables and
/// assumptions in scope) and the entailment configuration.
#[derive(Debug, Clone)]
pub struct Checker {
    pub env: IndexEnv,
    pub cfg: EntailConfig,
}

impl Checker {
    pub fn new(env: IndexEnv) -> Self {
        Checker {
            env,
            cfg: EntailConfig::default(),
        }
    }

    pub fn with_config(env: IndexEnv, cfg: EntailConfig) -> Self {
        Checker { env, cfg }
    }

    fn extended(&self, vars: &[IndexVar], cs: &[Constraint]) -> Checker {
        Checker {
            env: self.env.extended(vars, cs),
            cfg: self.cfg,
        }
    }

    /// Require a constraint to be entailed, reporting a witness on
    /// refutation and a hint on an undecided side condition.
    pub fn require(&self, c: &Constraint, what: impl Fn() -> String) -> Result<(), TypeError> {
        match entails(&self.env, c, &self.cfg) {
            Entailment::Valid => Ok(()),
            Entailment::Refuted(rho) => Err(TypeError {
                message: format!("{}: constraint `{c}` fails at {}", what(), fmt_valuation(&rho)),
                witness: Some(rho),
            }),
            Entailment::Unknown => Err(TypeError {
                message: format!(
                    "{}: constraint `{c}` could not be decided; add assumptions or raise --b-refute",
                    what()
                ),
                witness: None,
            }),
        }
    }

    pub fn holds(&self, c: &Constraint) -> bool {
        entails(&self.env, c, &self.cfg).is_valid()
    }
}

fn fmt_valuation(rho: &Valuation) -> String {
    if rho.is_empty() {
        return "the empty valuation".to_string();
    }
    let parts: Vec<String> = rho.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("[{}]", parts.join(", "))
}

// ---------------------------------------------------------------------------
// Subtyping
// ---------------------------------------------------------------------------

/// `t` can be used where `u` is expected. Channel payloads are invariant and
/// channel times must coincide; servers may forget capabilities, with the
/// complexity loosening on the output side and tightening on the input side.
pub fn subtype_sized(ck: &Checker, t: &SizedType, u: &SizedType) -> Result<(), TypeError> {
    use SizedType::*;
    let time_eq = |i: &IndexExpr, j: &IndexExpr| {
        ck.require(&Constraint::eq(i.clone(), j.clone()), || {
            "channel times must coincide".to_string()
        })
    };
    match (t, u) {
        (Bool, Bool) => Ok(()),
        (Nat { lo: i, hi: j }, Nat { lo: i2, hi: j2 }) => {
            ck.require(&Constraint::le(i2.clone(), i.clone()), || {
                "lower bound must widen".to_string()
            })?;
            ck.require(&Constraint::le(j.clone(), j2.clone()), || {
                "upper bound must widen".to_string()
            })
        }
        (
            List {
                lo: i,
                hi: j,
                elem: b,
            },
            List {
                lo: i2,
                hi: j2,
                elem: b2,
            },
        ) => {
            ck.require(&Constraint::le(i2.clone(), i.clone()), || {
                "lower bound must widen".to_string()
            })?;
            ck.require(&Constraint::le(j.clone(), j2.clone()), || {
                "upper bound must widen".to_string()
            })?;
            subtype_sized(ck, b, b2)
        }
        (Ch { time: i, args: a }, Ch { time: j, args: b }) => {
            time_eq(i, j)?;
            args_invariant(ck, a, b)
        }
        (Ch { time: i, args: a }, In { time: j, args: b })
        | (In { time: i, args: a }, In { time: j, args: b }) => {
            time_eq(i, j)?;
            args_covariant(ck, a, b)
        }
        (Ch { time: i, args: a }, Out { time: j, args: b })
        | (Out { time: i, args: a }, Out { time: j, args: b }) => {
            time_eq(i, j)?;
            args_contravariant(ck, a, b)
        }
        (
            Serv {
                time: i,
                binders: bi,
                cost: k,
                args: a,
            },
            Serv {
                time: j,
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            time_eq(i, j)?;
            let ck2 = check_binders(ck, bi, bj)?;
            ck2.require(&Constraint::eq(k.clone(), k2.clone()), || {
                "server complexities must coincide".to_string()
            })?;
            args_invariant(&ck2, a, b)
        }
        (
            Serv {
                time: i,
                binders: bi,
                cost: k,
                args: a,
            },
            IServ {
                time: j,
                binders: bj,
                cost: k2,
                args: b,
            },
        )
        | (
            IServ {
                time: i,
                binders: bi,
                cost: k,
                args: a,
            },
            IServ {
                time: j,
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            time_eq(i, j)?;
            let ck2 = check_binders(ck, bi, bj)?;
            // The defining side may be granted a smaller budget.
            ck2.require(&Constraint::le(k2.clone(), k.clone()), || {
                "input-server complexity may only shrink".to_string()
            })?;
            args_covariant(&ck2, a, b)
        }
        (
            Serv {
                time: i,
                binders: bi,
                cost: k,
                args: a,
            },
            OServ {
                time: j,
                binders: bj,
                cost: k2,
                args: b,
            },
        )
        | (
            OServ {
                time: i,
                binders: bi,
                cost: k,
                args: a,
            },
            OServ {
                time: j,
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            time_eq(i, j)?;
            let ck2 = check_binders(ck, bi, bj)?;
            // The calling side may overestimate the cost.
            ck2.require(&Constraint::le(k.clone(), k2.clone()), || {
                "output-server complexity may only grow".to_string()
            })?;
            args_contravariant(&ck2, a, b)
        }
        _ => Err(TypeError::new(format!(
            "no subtyping between {} and {}",
            t, u
        ))),
    }
}

fn check_binders(ck: &Checker, bi: &[IndexVar], bj: &[IndexVar]) -> Result<Checker, TypeError> {
    if bi != bj {
        return Err(TypeError::new(format!(
            "server binders differ: [{}] vs [{}]",
            bi.join(","),
            bj.join(",")
        )));
    }
    Ok(ck.extended(bi, &[]))
}

fn args_covariant(ck: &Checker, a: &[SizedType], b: &[SizedType]) -> Result<(), TypeError> {
    check_arity(a, b)?;
    for (x, y) in a.iter().zip(b) {
        subtype_sized(ck, x, y)?;
    }
    Ok(())
}

fn args_contravariant(ck: &Checker, a: &[SizedType], b: &[SizedType]) -> Result<(), TypeError> {
    check_arity(a, b)?;
    for (x, y) in a.iter().zip(b) {
        subtype_sized(ck, y, x)?;
    }
    Ok(())
}

fn args_invariant(ck: &Checker, a: &[SizedType], b: &[SizedType]) -> Result<(), TypeError> {
    args_covariant(ck, a, b)?;
    args_contravariant(ck, a, b)
}

fn check_arity(a: &[SizedType], b: &[SizedType]) -> Result<(), TypeError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(TypeError::new(format!(
            "payload arity mismatch: {} vs {}",
            a.len(),
            b.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// Time advance / delay
// ---------------------------------------------------------------------------

/// `<T> - i`: advance a type by `i` time units. Returns `None` when the
/// communication would be missed (its time cannot be shown to be at least
/// `i`), in which case the context entry is discarded.
pub fn advance_type(ck: &Checker, t: &SizedType, i: &IndexExpr) -> Option<SizedType> {
    use SizedType::*;
    if t.is_base() {
        return Some(t.clone());
    }
    if let IndexExpr::Lit(0) = i {
        return Some(t.clone());
    }
    let later = |j: &IndexExpr| ck.holds(&Constraint::ge(j.clone(), i.clone()));
    let shift = |j: &IndexExpr| fold_monus(j.clone(), i.clone());
    match t {
        Ch { time, args } => later(time).then(|| Ch {
            time: shift(time),
            args: args.clone(),
        }),
        In { time, args } => later(time).then(|| In {
            time: shift(time),
            args: args.clone(),
        }),
        Out { time, args } => later(time).then(|| Out {
            time: shift(time),
            args: args.clone(),
        }),
        Serv {
            time,
            binders,
            cost,
            args,
        } => Some(if later(time) {
            Serv {
                time: shift(time),
                binders: binders.clone(),
                cost: cost.clone(),
                args: args.clone(),
            }
        } else {
            // The replication offer may already be running; only the call
            // capability survives.
            OServ {
                time: shift(time),
                binders: binders.clone(),
                cost: cost.clone(),
                args: args.clone(),
            }
        }),
        IServ {
            time,
            binders,
            cost,
            args,
        } => later(time).then(|| IServ {
            time: shift(time),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        }),
        OServ {
            time,
            binders,
            cost,
            args,
        } => Some(OServ {
            time: shift(time),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        }),
        _ => unreachable!("base types handled above"),
    }
}

/// `<T> + i`: delay a type by `i` time units.
pub fn delay_type(t: &SizedType, i: &IndexExpr) -> SizedType {
    use SizedType::*;
    let shift = |j: &IndexExpr| fold_add(j.clone(), i.clone());
    match t {
        Nat { .. } | List { .. } | Bool => t.clone(),
        Ch { time, args } => Ch {
            time: shift(time),
            args: args.clone(),
        },
        In { time, args } => In {
            time: shift(time),
            args: args.clone(),
        },
        Out { time, args } => Out {
            time: shift(time),
            args: args.clone(),
        },
        Serv {
            time,
            binders,
            cost,
            args,
        } => Serv {
            time: shift(time),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        },
        IServ {
            time,
            binders,
            cost,
            args,
        } => IServ {
            time: shift(time),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        },
        OServ {
            time,
            binders,
            cost,
            args,
        } => OServ {
            time: shift(time),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        },
    }
}

/// Advance every context entry, dropping the ones whose communications are
/// missed.
pub fn advance_context(ck: &Checker, ctx: &TypeCtx, i: &IndexExpr) -> TypeCtx {
    ctx.iter()
        .filter_map(|(n, t)| advance_type(ck, t, i).map(|t2| (n.clone(), t2)))
        .collect()
}

/// A type that stays meaningful under arbitrary delays: base types, and
/// call-only server capabilities at time zero.
pub fn is_time_invariant(ck: &Checker, t: &SizedType) -> bool {
    match t {
        _ if t.is_base() => true,
        SizedType::OServ { time, .. } => ck.holds(&Constraint::eq(time.clone(), IndexExpr::lit(0))),
        _ => false,
    }
}

/// Weaken a context to its strongest time-invariant part: base entries stay,
/// full server capabilities at time 0 degrade to call-only capabilities, and
/// everything else is dropped.
pub fn weaken_invariant(ck: &Checker, ctx: &TypeCtx) -> TypeCtx {
    let zero = IndexExpr::lit(0);
    ctx.iter()
        .filter_map(|(n, t)| {
            if t.is_base() {
                return Some((n.clone(), t.clone()));
            }
            match t {
                SizedType::Serv {
                    time,
                    binders,
                    cost,
                    args,
                } if ck.holds(&Constraint::eq(time.clone(), zero.clone())) => Some((
                    n.clone(),
                    SizedType::OServ {
                        time: time.clone(),
                        binders: binders.clone(),
                        cost: cost.clone(),
                        args: args.clone(),
                    },
                )),
                SizedType::OServ { time, .. }
                    if ck.holds(&Constraint::eq(time.clone(), zero.clone())) =>
                {
                    Some((n.clone(), t.clone()))
                }
                _ => None,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

/// Synthesise a sized type for an expression when its shape determines one.
pub fn synth_expr(ck: &Checker, ctx: &TypeCtx, e: &Expr) -> Result<SizedType, TypeError> {
    match e {
        Expr::Var(v) => ctx.get(v).cloned().ok_or_else(|| {
            TypeError::new(format!(
                "name `{v}` is unbound here (or its communication time has expired)"
            ))
        }),
        Expr::Zero => Ok(SizedType::nat(IndexExpr::lit(0), IndexExpr::lit(0))),
        Expr::Succ(inner) => match synth_expr(ck, ctx, inner)? {
            SizedType::Nat { lo, hi } => Ok(SizedType::nat(
                fold_add(lo, IndexExpr::lit(1)),
                fold_add(hi, IndexExpr::lit(1)),
            )),
            other => Err(TypeError::new(format!(
                "successor applied to non-natural type {other}"
            ))),
        },
        Expr::True | Expr::False => Ok(SizedType::Bool),
        Expr::Nil => Ok(SizedType::list(
            IndexExpr::lit(0),
            IndexExpr::lit(0),
            // The element type of an empty literal is unconstrained; use the
            // empty interval so any vacuity is caught by entailment.
            SizedType::nat(IndexExpr::lit(1), IndexExpr::lit(0)),
        )),
        Expr::Cons(h, t) => {
            let eh = synth_expr(ck, ctx, h)?;
            match synth_expr(ck, ctx, t)? {
                SizedType::List { lo, hi, elem } => {
                    let elem = if matches!(
                        *elem,
                        SizedType::Nat { lo: IndexExpr::Lit(1), hi: IndexExpr::Lit(0) }
                    ) {
                        eh
                    } else {
                        *elem
                    };
                    Ok(SizedType::list(
                        fold_add(lo, IndexExpr::lit(1)),
                        fold_add(hi, IndexExpr::lit(1)),
                        elem,
                    ))
                }
                other => Err(TypeError::new(format!(
                    "cons onto non-list type {other}"
                ))),
            }
        }
    }
}

/// Check an expression against a sized type. Literal naturals and lists are
/// pushed into the bounds so that e.g. `x::q : List[0,i+j]` needs only
/// `i+j >= 1` and `q : List[0,i+j-1]`.
pub fn check_expr(ck: &Checker, ctx: &TypeCtx, e: &Expr, t: &SizedType) -> Result<(), TypeError> {
    match (e, t) {
        (Expr::Zero, SizedType::Nat { lo, .. }) => {
            ck.require(&Constraint::le(lo.clone(), IndexExpr::lit(0)), || {
                "zero must satisfy the lower bound".to_string()
            })
        }
        (Expr::Succ(inner), SizedType::Nat { lo, hi }) => {
            ck.require(&Constraint::ge(hi.clone(), IndexExpr::lit(1)), || {
                "a successor needs an upper bound of at least 1".to_string()
            })?;
            let t2 = SizedType::nat(
                fold_monus(lo.clone(), IndexExpr::lit(1)),
                fold_monus(hi.clone(), IndexExpr::lit(1)),
            );
            check_expr(ck, ctx, inner, &t2)
        }
        (Expr::Nil, SizedType::List { lo, .. }) => {
            ck.require(&Constraint::le(lo.clone(), IndexExpr::lit(0)), || {
                "the empty list must satisfy the lower bound".to_string()
            })
        }
        (Expr::Cons(h, tl), SizedType::List { lo, hi, elem }) => {
            ck.require(&Constraint::ge(hi.clone(), IndexExpr::lit(1)), || {
                "a cons needs an upper bound of at least 1".to_string()
            })?;
            check_expr(ck, ctx, h, elem)?;
            let t2 = SizedType::list(
                fold_monus(lo.clone(), IndexExpr::lit(1)),
                fold_monus(hi.clone(), IndexExpr::lit(1)),
                (**elem).clone(),
            );
            check_expr(ck, ctx, tl, &t2)
        }
        _ => {
            let s = synth_expr(ck, ctx, e)?;
            subtype_sized(ck, &s, t)
                .map_err(|err| err.context(&format!("`{e}` has type {s}, expected {t}")))
        }
    }
}

// ---------------------------------------------------------------------------
// Channel capability views
// ---------------------------------------------------------------------------

pub(crate) struct InputView {
    pub time: IndexExpr,
    pub args: Vec<SizedType>,
}

pub(crate) struct ServView {
    pub time: IndexExpr,
    pub binders: Vec<IndexVar>,
    pub cost: IndexExpr,
    pub args: Vec<SizedType>,
}

pub(crate) enum OutputView {
    Channel(InputView),
    Server(ServView),
}

pub(crate) fn as_input(t: &SizedType) -> Option<InputView> {
    match t {
        SizedType::Ch { time, args } | SizedType::In { time, args } => Some(InputView {
            time: time.clone(),
            args: args.clone(),
        }),
        _ => None,
    }
}

pub(crate) fn as_serv_input(t: &SizedType) -> Option<ServView> {
    match t {
        SizedType::Serv {
            time,
            binders,
            cost,
            args,
        }
        | SizedType::IServ {
            time,
            binders,
            cost,
            args,
        } => Some(ServView {
            time: time.clone(),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        }),
        _ => None,
    }
}

pub(crate) fn as_output(t: &SizedType) -> Option<OutputView> {
    match t {
        SizedType::Ch { time, args } | SizedType::Out { time, args } => {
            Some(OutputView::Channel(InputView {
                time: time.clone(),
                args: args.clone(),
            }))
        }
        SizedType::Serv {
            time,
            binders,
            cost,
            args,
        }
        | SizedType::OServ {
            time,
            binders,
            cost,
            args,
        } => Some(OutputView::Server(ServView {
            time: time.clone(),
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.clone(),
        })),
        _ => None,
    }
}

/// Infer the index instantiation for a server call by first-order matching
/// of the declared payload types against the synthesised types of the actual
/// arguments: a binder standing alone in a size or time slot picks up the
/// corresponding actual index.
pub(crate) fn infer_inst(
    ck: &Checker,
    ctx: &TypeCtx,
    chan: &Ident,
    binders: &[IndexVar],
    decl_args: &[SizedType],
    actual_args: &[Expr],
) -> Result<Vec<IndexExpr>, TypeError> {
    let mut solved: BTreeMap<IndexVar, IndexExpr> = BTreeMap::new();
    for (decl, actual) in decl_args.iter().zip(actual_args) {
        if let Ok(at) = synth_expr(ck, ctx, actual) {
            match_slots(decl, &at, binders, &mut solved);
        }
    }
    binders
        .iter()
        .map(|b| {
            solved.get(b).cloned().ok_or_else(|| {
                TypeError::new(format!(
                    "cannot infer index `{b}` for call to `{chan}`; annotate the call as {chan}<...>@[...]"
                ))
            })
        })
        .collect()
}

fn match_slots(
    decl: &SizedType,
    actual: &SizedType,
    binders: &[IndexVar],
    solved: &mut BTreeMap<IndexVar, IndexExpr>,
) {
    let mut slot = |d: &IndexExpr, a: &IndexExpr| {
        if let IndexExpr::Var(v) = d {
            if binders.contains(v) && !solved.contains_key(v) {
                solved.insert(v.clone(), a.clone());
            }
        }
    };
    use SizedType::*;
    match (decl, actual) {
        (Nat { lo: l1, hi: h1 }, Nat { lo: l2, hi: h2 }) => {
            slot(l1, l2);
            slot(h1, h2);
        }
        (
            List {
                lo: l1,
                hi: h1,
                elem: e1,
            },
            List {
                lo: l2,
                hi: h2,
                elem: e2,
            },
        ) => {
            slot(l1, l2);
            slot(h1, h2);
            match_slots(e1, e2, binders, solved);
        }
        (Ch { time: t1, args: a1 }, Ch { time: t2, args: a2 })
        | (In { time: t1, args: a1 }, In { time: t2, args: a2 })
        | (Out { time: t1, args: a1 }, Out { time: t2, args: a2 })
        | (Out { time: t1, args: a1 }, Ch { time: t2, args: a2 })
        | (In { time: t1, args: a1 }, Ch { time: t2, args: a2 }) => {
            slot(t1, t2);
            for (d, a) in a1.iter().zip(a2) {
                match_slots(d, a, binders, solved);
            }
        }
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Span checking
// ---------------------------------------------------------------------------

/// Bottom-up best complexity bound for a process. Parallel composition and
/// branching take maxima; prefixes add their communication times. Useful for
/// reporting, but weaker than `check_span` at match sites because the
/// branch refinements cannot be kept in a single expression.
pub fn synthesize_span(ck: &Checker, ctx: &TypeCtx, p: &Process) -> Result<IndexExpr, TypeError> {
    match p {
        Process::Nil => Ok(IndexExpr::lit(0)),
        Process::Par(a, b) => Ok(fold_max(
            synthesize_span(ck, ctx, a)?,
            synthesize_span(ck, ctx, b)?,
        )),
        Process::Tick(q) => {
            let one = IndexExpr::lit(1);
            let ctx2 = advance_context(ck, ctx, &one);
            Ok(fold_add(one, synthesize_span(ck, &ctx2, q)?))
        }
        Process::Nu { name, annot, body } => {
            let t = annot.clone().ok_or_else(|| {
                TypeError::new(format!(
                    "span checking requires a type annotation on `new {name}`"
                ))
            })?;
            let mut ctx2 = ctx.clone();
            ctx2.insert(name.clone(), t);
            synthesize_span(ck, &ctx2, body)
        }
        Process::Input { chan, params, body } => {
            let t = lookup(ctx, chan)?;
            let view = as_input(&t).ok_or_else(|| {
                TypeError::new(format!("`{chan}` has type {t}, not an input channel"))
            })?;
            bind_params(chan, &view.args, params)?;
            let mut ctx2 = advance_context(ck, ctx, &view.time);
            for (v, ty) in params.iter().zip(&view.args) {
                ctx2.insert(v.clone(), ty.clone());
            }
            let kb = synthesize_span(ck, &ctx2, body)
                .map_err(|e| e.context(&format!("in input on `{chan}`")))?;
            Ok(fold_add(view.time, kb))
        }
        Process::Serv { chan, .. } => {
            let t = lookup(ctx, chan)?;
            let view = as_serv_input(&t).ok_or_else(|| {
                TypeError::new(format!("`{chan}` has type {t}, not an input server"))
            })?;
            check_serv_body(ck, ctx, p)?;
            Ok(view.time)
        }
        Process::Output { .. } => {
            let (cost, _) = output_cost(ck, ctx, p)?;
            Ok(cost)
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            let (lo, hi) = nat_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = ck.extended(&[], &[Constraint::le(lo.clone(), IndexExpr::lit(0))]);
            let k0 = synthesize_span(&ck0, ctx, zero)?;
            let ck1 = ck.extended(&[], &[Constraint::ge(hi.clone(), IndexExpr::lit(1))]);
            let mut ctx2 = ctx.clone();
            ctx2.insert(
                succ_bind.clone(),
                SizedType::nat(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                ),
            );
            let k1 = synthesize_span(&ck1, &ctx2, succ)?;
            Ok(fold_max(k0, k1))
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            let (lo, hi, elem) = list_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = ck.extended(&[], &[Constraint::le(lo.clone(), IndexExpr::lit(0))]);
            let k0 = synthesize_span(&ck0, ctx, nil)?;
            let ck1 = ck.extended(&[], &[Constraint::ge(hi.clone(), IndexExpr::lit(1))]);
            let mut ctx2 = ctx.clone();
            ctx2.insert(head_bind.clone(), elem.clone());
            ctx2.insert(
                tail_bind.clone(),
                SizedType::list(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                    elem,
                ),
            );
            let k1 = synthesize_span(&ck1, &ctx2, cons)?;
            Ok(fold_max(k0, k1))
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            check_expr(ck, ctx, cond, &SizedType::Bool)?;
            Ok(fold_max(
                synthesize_span(ck, ctx, then_branch)?,
                synthesize_span(ck, ctx, else_branch)?,
            ))
        }
    }
}

/// Check a process against a declared span bound, pushing the bound into the
/// term so that match-arm refinements participate in the arithmetic.
pub fn check_span(
    ck: &Checker,
    ctx: &TypeCtx,
    p: &Process,
    bound: &IndexExpr,
) -> Result<(), TypeError> {
    match p {
        Process::Nil => Ok(()),
        Process::Par(a, b) => {
            check_span(ck, ctx, a, bound)?;
            check_span(ck, ctx, b, bound)
        }
        Process::Tick(q) => {
            ck.require(&Constraint::ge(bound.clone(), IndexExpr::lit(1)), || {
                "a tick needs a bound of at least 1".to_string()
            })?;
            let one = IndexExpr::lit(1);
            let ctx2 = advance_context(ck, ctx, &one);
            check_span(ck, &ctx2, q, &fold_monus(bound.clone(), one))
        }
        Process::Nu { name, annot, body } => {
            let t = annot.clone().ok_or_else(|| {
                TypeError::new(format!(
                    "span checking requires a type annotation on `new {name}`"
                ))
            })?;
            let mut ctx2 = ctx.clone();
            ctx2.insert(name.clone(), t);
            check_span(ck, &ctx2, body, bound)
        }
        Process::Input { chan, params, body } => {
            let t = lookup(ctx, chan)?;
            let view = as_input(&t).ok_or_else(|| {
                TypeError::new(format!("`{chan}` has type {t}, not an input channel"))
            })?;
            bind_params(chan, &view.args, params)?;
            ck.require(&Constraint::le(view.time.clone(), bound.clone()), || {
                format!("input on `{chan}` at time {} exceeds the bound {bound}", view.time)
            })?;
            let mut ctx2 = advance_context(ck, ctx, &view.time);
            for (v, ty) in params.iter().zip(&view.args) {
                ctx2.insert(v.clone(), ty.clone());
            }
            check_span(ck, &ctx2, body, &fold_monus(bound.clone(), view.time))
                .map_err(|e| e.context(&format!("in input on `{chan}`")))
        }
        Process::Serv { chan, .. } => {
            let t = lookup(ctx, chan)?;
            let view = as_serv_input(&t).ok_or_else(|| {
                TypeError::new(format!("`{chan}` has type {t}, not an input server"))
            })?;
            ck.require(&Constraint::le(view.time.clone(), bound.clone()), || {
                format!("server `{chan}` ready at {} exceeds the bound {bound}", view.time)
            })?;
            check_serv_body(ck, ctx, p)
        }
        Process::Output { .. } => {
            let (cost, chan) = output_cost(ck, ctx, p)?;
            ck.require(&Constraint::le(cost.clone(), bound.clone()), || {
                format!("output on `{chan}` costs {cost}, exceeding the bound {bound}")
            })
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            let (lo, hi) = nat_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = ck.extended(&[], &[Constraint::le(lo.clone(), IndexExpr::lit(0))]);
            check_span(&ck0, ctx, zero, bound)?;
            let ck1 = ck.extended(&[], &[Constraint::ge(hi.clone(), IndexExpr::lit(1))]);
            let mut ctx2 = ctx.clone();
            ctx2.insert(
                succ_bind.clone(),
                SizedType::nat(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                ),
            );
            check_span(&ck1, &ctx2, succ, bound)
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            let (lo, hi, elem) = list_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = ck.extended(&[], &[Constraint::le(lo.clone(), IndexExpr::lit(0))]);
            check_span(&ck0, ctx, nil, bound)?;
            let ck1 = ck.extended(&[], &[Constraint::ge(hi.clone(), IndexExpr::lit(1))]);
            let mut ctx2 = ctx.clone();
            ctx2.insert(head_bind.clone(), elem.clone());
            ctx2.insert(
                tail_bind.clone(),
                SizedType::list(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                    elem,
                ),
            );
            check_span(&ck1, &ctx2, cons, bound)
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            check_expr(ck, ctx, cond, &SizedType::Bool)?;
            check_span(ck, ctx, then_branch, bound)?;
            check_span(ck, ctx, else_branch, bound)
        }
    }
}

/// Check the body of a replicated input against the complexity declared in
/// its channel's server type. The context is advanced to the server's ready
/// time and weakened to its time-invariant part; the server binders come
/// into scope as fresh index variables.
pub fn check_serv_body(ck: &Checker, ctx: &TypeCtx, serv: &Process) -> Result<(), TypeError> {
    let Process::Serv { chan, params, body } = serv else {
        panic!("check_serv_body expects a replicated input");
    };
    let t = lookup(ctx, chan)?;
    let view = as_serv_input(&t).ok_or_else(|| {
        TypeError::new(format!("`{chan}` has type {t}, not an input server"))
    })?;
    bind_params(chan, &view.args, params)?;
    let ck2 = ck.extended(&view.binders, &[]);
    let advanced = advance_context(&ck2, ctx, &view.time);
    let mut ctx2 = weaken_invariant(&ck2, &advanced);
    for (v, ty) in params.iter().zip(&view.args) {
        ctx2.insert(v.clone(), ty.clone());
    }
    check_span(&ck2, &ctx2, body, &view.cost)
        .map_err(|e| e.context(&format!("in the body of server `{chan}`")))
}

/// The span cost of an output: the channel's time, plus the instantiated
/// session complexity for server calls. Also checks the arguments in the
/// appropriately advanced context. Returns the cost and channel name.
fn output_cost(
    ck: &Checker,
    ctx: &TypeCtx,
    p: &Process,
) -> Result<(IndexExpr, Ident), TypeError> {
    let Process::Output { chan, args, inst } = p else {
        panic!("output_cost expects an output");
    };
    let t = lookup(ctx, chan)?;
    let view = as_output(&t).ok_or_else(|| {
        TypeError::new(format!("`{chan}` has type {t}, not an output channel"))
    })?;
    match view {
        OutputView::Channel(v) => {
            if inst.is_some() {
                return Err(TypeError::new(format!(
                    "`{chan}` is a plain channel; index instantiation @[..] applies to servers"
                )));
            }
            check_args(ck, ctx, chan, &v.time, &v.args, args)?;
            Ok((v.time, chan.clone()))
        }
        OutputView::Server(v) => {
            let insts = match inst {
                Some(js) => {
                    if js.len() != v.binders.len() {
                        return Err(TypeError::new(format!(
                            "call to `{chan}` instantiates {} indices, expected {}",
                            js.len(),
                            v.binders.len()
                        )));
                    }
                    js.clone()
                }
                None => infer_inst(ck, ctx, chan, &v.binders, &v.args, args)?,
            };
            let map: BTreeMap<IndexVar, IndexExpr> = v
                .binders
                .iter()
                .cloned()
                .zip(insts.iter().cloned())
                .collect();
            let inst_args: Vec<SizedType> = v.args.iter().map(|a| a.subst(&map)).collect();
            check_args(ck, ctx, chan, &v.time, &inst_args, args)?;
            let cost = fold_add(v.time, v.cost.subst(&map));
            Ok((cost, chan.clone()))
        }
    }
}

fn check_args(
    ck: &Checker,
    ctx: &TypeCtx,
    chan: &Ident,
    time: &IndexExpr,
    tys: &[SizedType],
    args: &[Expr],
) -> Result<(), TypeError> {
    if tys.len() != args.len() {
        return Err(TypeError::new(format!(
            "`{chan}` carries {} payloads but {} were supplied",
            tys.len(),
            args.len()
        )));
    }
    let ctx2 = advance_context(ck, ctx, time);
    for (e, ty) in args.iter().zip(tys) {
        check_expr(ck, &ctx2, e, ty)
            .map_err(|err| err.context(&format!("argument `{e}` of `{chan}`")))?;
    }
    Ok(())
}

fn bind_params(chan: &Ident, tys: &[SizedType], params: &[Ident]) -> Result<(), TypeError> {
    if tys.len() != params.len() {
        return Err(TypeError::new(format!(
            "`{chan}` carries {} payloads but {} parameters are bound",
            tys.len(),
            params.len()
        )));
    }
    Ok(())
}

fn lookup(ctx: &TypeCtx, n: &Ident) -> Result<SizedType, TypeError> {
    ctx.get(n).cloned().ok_or_else(|| {
        TypeError::new(format!(
            "channel `{n}` is unbound here (or its communication time has expired)"
        ))
    })
}

fn nat_scrutinee(
    ck: &Checker,
    ctx: &TypeCtx,
    e: &Expr,
) -> Result<(IndexExpr, IndexExpr), TypeError> {
    match synth_expr(ck, ctx, e)? {
        SizedType::Nat { lo, hi } => Ok((lo, hi)),
        other => Err(TypeError::new(format!(
            "match on a natural requires Nat, found {other}"
        ))),
    }
}

fn list_scrutinee(
    ck: &Checker,
    ctx: &TypeCtx,
    e: &Expr,
) -> Result<(IndexExpr, IndexExpr, SizedType), TypeError> {
    match synth_expr(ck, ctx, e)? {
        SizedType::List { lo, hi, elem } => Ok((lo, hi, *elem)),
        other => Err(TypeError::new(format!(
            "match on a list requires List, found {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexExpr as I;
    use crate::syntax::Process as P;

    fn ck() -> Checker {
        Checker::new(IndexEnv::new())
    }

    fn ch0(args: Vec<SizedType>) -> SizedType {
        SizedType::Ch {
            time: I::lit(0),
            args,
        }
    }

    #[test]
    fn subtyping_channel_time_invariance() {
        let c = ck();
        let a = SizedType::Ch {
            time: I::lit(1),
            args: vec![],
        };
        let b = SizedType::Ch {
            time: I::lit(2),
            args: vec![],
        };
        assert!(subtype_sized(&c, &a, &a).is_ok());
        assert!(subtype_sized(&c, &a, &b).is_err());
        let i = SizedType::In {
            time: I::lit(1),
            args: vec![],
        };
        assert!(subtype_sized(&c, &a, &i).is_ok());
        assert!(subtype_sized(&c, &i, &a).is_err());
    }

    #[test]
    fn nat_interval_widening() {
        let env = IndexEnv::with_vars(["i", "j"]);
        let c = Checker::new(env);
        let narrow = SizedType::nat(I::lit(1), I::var("i"));
        let wide = SizedType::nat(I::lit(0), I::add(I::var("i"), I::var("j")));
        assert!(subtype_sized(&c, &narrow, &wide).is_ok());
        assert!(subtype_sized(&c, &wide, &narrow).is_err());
    }

    #[test]
    fn succ_needs_room_in_upper_bound() {
        // x : Nat[i,j] |- s(x) : Nat[i,j] requires j >= j+1: refutable.
        let env = IndexEnv::with_vars(["i", "j"]);
        let c = Checker::new(env);
        let ctx: TypeCtx = [(
            "x".to_string(),
            SizedType::nat(I::var("i"), I::var("j")),
        )]
        .into_iter()
        .collect();
        let e = Expr::Succ(Box::new(Expr::var("x")));
        let t = SizedType::nat(I::var("i"), I::var("j"));
        let err = check_expr(&c, &ctx, &e, &t).unwrap_err();
        assert!(err.witness.is_some() || err.message.contains("decided"));
        // but s(x) : Nat[i, j+1] is fine.
        let t2 = SizedType::nat(I::var("i"), I::add(I::var("j"), I::lit(1)));
        assert!(check_expr(&c, &ctx, &e, &t2).is_ok());
    }

    #[test]
    fn advance_drops_expired_channels() {
        let c = ck();
        let t = SizedType::Ch {
            time: I::lit(1),
            args: vec![],
        };
        let adv = advance_type(&c, &t, &I::lit(1)).unwrap();
        match &adv {
            SizedType::Ch { time, .. } => assert_eq!(time, &I::lit(0)),
            _ => panic!(),
        }
        assert!(advance_type(&c, &adv, &I::lit(1)).is_none());
        // servers degrade to call-only capabilities instead of vanishing
        let s = SizedType::Serv {
            time: I::lit(0),
            binders: vec![],
            cost: I::lit(3),
            args: vec![],
        };
        match advance_type(&c, &s, &I::lit(2)).unwrap() {
            SizedType::OServ { time, .. } => assert_eq!(time, I::lit(0)),
            other => panic!("expected oserv, got {other}"),
        }
    }

    #[test]
    fn delay_then_advance_roundtrip() {
        let t = SizedType::Out {
            time: I::var("i"),
            args: vec![SizedType::Bool],
        };
        let env = IndexEnv::with_vars(["i"]);
        let c = Checker::new(env);
        let d = delay_type(&t, &I::lit(3));
        let back = advance_type(&c, &d, &I::lit(3)).unwrap();
        match back {
            SizedType::Out { time, .. } => {
                assert!(c.holds(&Constraint::eq(time, I::var("i"))));
            }
            _ => panic!(),
        }
        let _ = c;
    }

    #[test]
    fn race_example_types_at_one() {
        // a : ch^0() |- a().tick.0 | a<> | tick.0 at bound 1
        let c = ck();
        let ctx: TypeCtx = [("a".to_string(), ch0(vec![]))].into_iter().collect();
        let p = P::par(
            P::par(
                P::input("a", vec![], P::tick(P::Nil)),
                P::output("a", vec![]),
            ),
            P::tick(P::Nil),
        );
        assert!(check_span(&c, &ctx, &p, &I::lit(1)).is_ok());
        let k = synthesize_span(&c, &ctx, &p).unwrap();
        assert_eq!(k, I::lit(1));
        // and 0 is refuted
        let err = check_span(&c, &ctx, &p, &I::lit(0)).unwrap_err();
        assert!(err.witness.is_some());
    }

    #[test]
    fn tick_advances_context() {
        // b : ch^1() |- tick.b<> : 1, but b<> alone (at time 1) also costs 1;
        // under a tick the channel time has shrunk to 0.
        let c = ck();
        let ctx: TypeCtx = [(
            "b".to_string(),
            SizedType::Ch {
                time: I::lit(1),
                args: vec![],
            },
        )]
        .into_iter()
        .collect();
        let p = P::tick(P::output("b", vec![]));
        assert!(check_span(&c, &ctx, &p, &I::lit(1)).is_ok());
        let err = check_span(&c, &ctx, &p, &I::lit(0)).unwrap_err();
        assert!(err.message.contains("tick"));
    }
}
