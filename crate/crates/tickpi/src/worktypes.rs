//! Work types: sized types without time annotations, and the work (total
//! cost) checker. Parallel composition sums costs instead of taking maxima,
//! and no context advancement happens at prefixes.

use std::collections::BTreeMap;

use crate::index::{
    fold_add, fold_max, fold_monus, Constraint, IndexEnv, IndexExpr, IndexVar,
};
use crate::spantypes::{Checker, SizedType, TypeError};
use crate::syntax::{Expr, Ident, Process};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WorkType {
    Nat {
        lo: IndexExpr,
        hi: IndexExpr,
    },
    List {
        lo: IndexExpr,
        hi: IndexExpr,
        elem: Box<WorkType>,
    },
    Bool,
    Ch {
        args: Vec<WorkType>,
    },
    In {
        args: Vec<WorkType>,
    },
    Out {
        args: Vec<WorkType>,
    },
    Serv {
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<WorkType>,
    },
    IServ {
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<WorkType>,
    },
    OServ {
        binders: Vec<IndexVar>,
        cost: IndexExpr,
        args: Vec<WorkType>,
    },
}

impl WorkType {
    pub fn is_base(&self) -> bool {
        matches!(
            self,
            WorkType::Nat { .. } | WorkType::List { .. } | WorkType::Bool
        )
    }

    pub fn nat(lo: IndexExpr, hi: IndexExpr) -> Self {
        WorkType::Nat { lo, hi }
    }

    pub fn list(lo: IndexExpr, hi: IndexExpr, elem: WorkType) -> Self {
        WorkType::List {
            lo,
            hi,
            elem: Box::new(elem),
        }
    }

    pub fn subst(&self, map: &BTreeMap<IndexVar, IndexExpr>) -> WorkType {
        use WorkType::*;
        let s = |i: &IndexExpr| i.subst(map);
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
            Ch { args } => Ch {
                args: args.iter().map(|t| t.subst(map)).collect(),
            },
            In { args } => In {
                args: args.iter().map(|t| t.subst(map)).collect(),
            },
            Out { args } => Out {
                args: args.iter().map(|t| t.subst(map)).collect(),
            },
            Serv {
                binders,
                cost,
                args,
            }
            | IServ {
                binders,
                cost,
                args,
            }
            | OServ {
                binders,
                cost,
                args,
            } => {
                let inner: BTreeMap<IndexVar, IndexExpr> = map
                    .iter()
                    .filter(|(k, _)| !binders.contains(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let cost = cost.subst(&inner);
                let args: Vec<WorkType> = args.iter().map(|t| t.subst(&inner)).collect();
                match self {
                    Serv { .. } => Serv {
                        binders: binders.clone(),
                        cost,
                        args,
                    },
                    IServ { .. } => IServ {
                        binders: binders.clone(),
                        cost,
                        args,
                    },
                    _ => OServ {
                        binders: binders.clone(),
                        cost,
                        args,
                    },
                }
            }
        }
    }
}

/// Forget the time annotations of a sized type, keeping sizes and costs.
pub fn strip_time(t: &SizedType) -> WorkType {
    match t {
        SizedType::Nat { lo, hi } => WorkType::nat(lo.clone(), hi.clone()),
        SizedType::Bool => WorkType::Bool,
        SizedType::List { lo, hi, elem } => {
            WorkType::list(lo.clone(), hi.clone(), strip_time(elem))
        }
        SizedType::Ch { args, .. } => WorkType::Ch {
            args: args.iter().map(strip_time).collect(),
        },
        SizedType::In { args, .. } => WorkType::In {
            args: args.iter().map(strip_time).collect(),
        },
        SizedType::Out { args, .. } => WorkType::Out {
            args: args.iter().map(strip_time).collect(),
        },
        SizedType::Serv {
            binders,
            cost,
            args,
            ..
        } => WorkType::Serv {
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.iter().map(strip_time).collect(),
        },
        SizedType::IServ {
            binders,
            cost,
            args,
            ..
        } => WorkType::IServ {
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.iter().map(strip_time).collect(),
        },
        SizedType::OServ {
            binders,
            cost,
            args,
            ..
        } => WorkType::OServ {
            binders: binders.clone(),
            cost: cost.clone(),
            args: args.iter().map(strip_time).collect(),
        },
    }
}

pub type WorkCtx = BTreeMap<Ident, WorkType>;

// ---------------------------------------------------------------------------
// Subtyping (same shape as the sized system, without the time premises)
// ---------------------------------------------------------------------------

pub fn subtype_work(ck: &Checker, t: &WorkType, u: &WorkType) -> Result<(), TypeError> {
    use WorkType::*;
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
            subtype_work(ck, b, b2)
        }
        (Ch { args: a }, Ch { args: b }) => invariant(ck, a, b),
        (Ch { args: a }, In { args: b }) | (In { args: a }, In { args: b }) => {
            covariant(ck, a, b)
        }
        (Ch { args: a }, Out { args: b }) | (Out { args: a }, Out { args: b }) => {
            contravariant(ck, a, b)
        }
        (
            Serv {
                binders: bi,
                cost: k,
                args: a,
            },
            Serv {
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            let ck2 = same_binders(ck, bi, bj)?;
            ck2.require(&Constraint::eq(k.clone(), k2.clone()), || {
                "server complexities must coincide".to_string()
            })?;
            invariant(&ck2, a, b)
        }
        (
            Serv {
                binders: bi,
                cost: k,
                args: a,
            },
            IServ {
                binders: bj,
                cost: k2,
                args: b,
            },
        )
        | (
            IServ {
                binders: bi,
                cost: k,
                args: a,
            },
            IServ {
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            let ck2 = same_binders(ck, bi, bj)?;
            ck2.require(&Constraint::le(k2.clone(), k.clone()), || {
                "input-server complexity may only shrink".to_string()
            })?;
            covariant(&ck2, a, b)
        }
        (
            Serv {
                binders: bi,
                cost: k,
                args: a,
            },
            OServ {
                binders: bj,
                cost: k2,
                args: b,
            },
        )
        | (
            OServ {
                binders: bi,
                cost: k,
                args: a,
            },
            OServ {
                binders: bj,
                cost: k2,
                args: b,
            },
        ) => {
            let ck2 = same_binders(ck, bi, bj)?;
            ck2.require(&Constraint::le(k.clone(), k2.clone()), || {
                "output-server complexity may only grow".to_string()
            })?;
            contravariant(&ck2, a, b)
        }
        _ => Err(TypeError::new(format!(
            "no subtyping between {t} and {u}"
        ))),
    }
}

fn same_binders(ck: &Checker, bi: &[IndexVar], bj: &[IndexVar]) -> Result<Checker, TypeError> {
    if bi != bj {
        return Err(TypeError::new(format!(
            "server binders differ: [{}] vs [{}]",
            bi.join(","),
            bj.join(",")
        )));
    }
    let mut env = ck.env.clone();
    for b in bi {
        env.declare_var(b.clone());
    }
    Ok(Checker::with_config(env, ck.cfg))
}

fn covariant(ck: &Checker, a: &[WorkType], b: &[WorkType]) -> Result<(), TypeError> {
    arity(a, b)?;
    for (x, y) in a.iter().zip(b) {
        subtype_work(ck, x, y)?;
    }
    Ok(())
}

fn contravariant(ck: &Checker, a: &[WorkType], b: &[WorkType]) -> Result<(), TypeError> {
    arity(a, b)?;
    for (x, y) in a.iter().zip(b) {
        subtype_work(ck, y, x)?;
    }
    Ok(())
}

fn invariant(ck: &Checker, a: &[WorkType], b: &[WorkType]) -> Result<(), TypeError> {
    covariant(ck, a, b)?;
    contravariant(ck, a, b)
}

fn arity(a: &[WorkType], b: &[WorkType]) -> Result<(), TypeError> {
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
// Expressions
// ---------------------------------------------------------------------------

pub fn synth_expr_work(ck: &Checker, ctx: &WorkCtx, e: &Expr) -> Result<WorkType, TypeError> {
    match e {
        Expr::Var(v) => ctx
            .get(v)
            .cloned()
            .ok_or_else(|| TypeError::new(format!("name `{v}` is unbound here"))),
        Expr::Zero => Ok(WorkType::nat(IndexExpr::lit(0), IndexExpr::lit(0))),
        Expr::Succ(inner) => match synth_expr_work(ck, ctx, inner)? {
            WorkType::Nat { lo, hi } => Ok(WorkType::nat(
                fold_add(lo, IndexExpr::lit(1)),
                fold_add(hi, IndexExpr::lit(1)),
            )),
            other => Err(TypeError::new(format!(
                "successor applied to non-natural type {other}"
            ))),
        },
        Expr::True | Expr::False => Ok(WorkType::Bool),
        Expr::Nil => Ok(WorkType::list(
            IndexExpr::lit(0),
            IndexExpr::lit(0),
            WorkType::nat(IndexExpr::lit(1), IndexExpr::lit(0)),
        )),
        Expr::Cons(h, t) => {
            let eh = synth_expr_work(ck, ctx, h)?;
            match synth_expr_work(ck, ctx, t)? {
                WorkType::List { lo, hi, elem } => {
                    let elem = if matches!(
                        *elem,
                        WorkType::Nat { lo: IndexExpr::Lit(1), hi: IndexExpr::Lit(0) }
                    ) {
                        eh
                    } else {
                        *elem
                    };
                    Ok(WorkType::list(
                        fold_add(lo, IndexExpr::lit(1)),
                        fold_add(hi, IndexExpr::lit(1)),
                        elem,
                    ))
                }
                other => Err(TypeError::new(format!("cons onto non-list type {other}"))),
            }
        }
    }
}

pub fn check_expr_work(
    ck: &Checker,
    ctx: &WorkCtx,
    e: &Expr,
    t: &WorkType,
) -> Result<(), TypeError> {
    match (e, t) {
        (Expr::Zero, WorkType::Nat { lo, .. }) => {
            ck.require(&Constraint::le(lo.clone(), IndexExpr::lit(0)), || {
                "zero must satisfy the lower bound".to_string()
            })
        }
        (Expr::Succ(inner), WorkType::Nat { lo, hi }) => {
            ck.require(&Constraint::ge(hi.clone(), IndexExpr::lit(1)), || {
                "a successor needs an upper bound of at least 1".to_string()
            })?;
            let t2 = WorkType::nat(
                fold_monus(lo.clone(), IndexExpr::lit(1)),
                fold_monus(hi.clone(), IndexExpr::lit(1)),
            );
            check_expr_work(ck, ctx, inner, &t2)
        }
        (Expr::Nil, WorkType::List { lo, .. }) => {
            ck.require(&Constraint::le(lo.clone(), IndexExpr::lit(0)), || {
                "the empty list must satisfy the lower bound".to_string()
            })
        }
        (Expr::Cons(h, tl), WorkType::List { lo, hi, elem }) => {
            ck.require(&Constraint::ge(hi.clone(), IndexExpr::lit(1)), || {
                "a cons needs an upper bound of at least 1".to_string()
            })?;
            check_expr_work(ck, ctx, h, elem)?;
            let t2 = WorkType::list(
                fold_monus(lo.clone(), IndexExpr::lit(1)),
                fold_monus(hi.clone(), IndexExpr::lit(1)),
                (**elem).clone(),
            );
            check_expr_work(ck, ctx, tl, &t2)
        }
        _ => {
            let s = synth_expr_work(ck, ctx, e)?;
            subtype_work(ck, &s, t)
                .map_err(|err| TypeError::new(format!("`{e}` has type {s}, expected {t}: {err}")))
        }
    }
}

// ---------------------------------------------------------------------------
// Work checking
// ---------------------------------------------------------------------------

/// Bottom-up work bound: ticks count one each, parallel composition sums,
/// branching takes the maximum of the arms.
pub fn synthesize_work(ck: &Checker, ctx: &WorkCtx, p: &Process) -> Result<IndexExpr, TypeError> {
    match p {
        Process::Nil => Ok(IndexExpr::lit(0)),
        Process::Par(a, b) => Ok(fold_add(
            synthesize_work(ck, ctx, a)?,
            synthesize_work(ck, ctx, b)?,
        )),
        Process::Tick(q) => Ok(fold_add(IndexExpr::lit(1), synthesize_work(ck, ctx, q)?)),
        Process::Nu { name, annot, body } => {
            let t = nu_annot(name, annot)?;
            let mut ctx2 = ctx.clone();
            ctx2.insert(name.clone(), t);
            synthesize_work(ck, &ctx2, body)
        }
        Process::Input { chan, params, body } => {
            let args = input_args(ctx, chan)?;
            bind_arity(chan, &args, params)?;
            let mut ctx2 = ctx.clone();
            for (v, ty) in params.iter().zip(&args) {
                ctx2.insert(v.clone(), ty.clone());
            }
            synthesize_work(ck, &ctx2, body)
                .map_err(|e| TypeError::new(format!("in input on `{chan}`: {e}")))
        }
        Process::Serv { .. } => {
            check_serv_body_work(ck, ctx, p)?;
            Ok(IndexExpr::lit(0))
        }
        Process::Output { .. } => output_cost_work(ck, ctx, p).map(|(k, _)| k),
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            let (lo, hi) = nat_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = with_hyp(ck, Constraint::le(lo.clone(), IndexExpr::lit(0)));
            let k0 = synthesize_work(&ck0, ctx, zero)?;
            let ck1 = with_hyp(ck, Constraint::ge(hi.clone(), IndexExpr::lit(1)));
            let mut ctx2 = ctx.clone();
            ctx2.insert(
                succ_bind.clone(),
                WorkType::nat(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                ),
            );
            let k1 = synthesize_work(&ck1, &ctx2, succ)?;
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
            let ck0 = with_hyp(ck, Constraint::le(lo.clone(), IndexExpr::lit(0)));
            let k0 = synthesize_work(&ck0, ctx, nil)?;
            let ck1 = with_hyp(ck, Constraint::ge(hi.clone(), IndexExpr::lit(1)));
            let mut ctx2 = ctx.clone();
            ctx2.insert(head_bind.clone(), elem.clone());
            ctx2.insert(
                tail_bind.clone(),
                WorkType::list(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                    elem,
                ),
            );
            let k1 = synthesize_work(&ck1, &ctx2, cons)?;
            Ok(fold_max(k0, k1))
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            check_expr_work(ck, ctx, cond, &WorkType::Bool)?;
            Ok(fold_max(
                synthesize_work(ck, ctx, then_branch)?,
                synthesize_work(ck, ctx, else_branch)?,
            ))
        }
    }
}

/// Check a process against a declared work bound. Parallel composition
/// synthesises one side and passes the remainder to the other, trying both
/// orders; matches check each arm under its refinement.
pub fn check_work(
    ck: &Checker,
    ctx: &WorkCtx,
    p: &Process,
    bound: &IndexExpr,
) -> Result<(), TypeError> {
    match p {
        Process::Nil => Ok(()),
        Process::Par(a, b) => {
            let attempt = |x: &Process, y: &Process| -> Result<(), TypeError> {
                let kx = synthesize_work(ck, ctx, x)?;
                ck.require(&Constraint::le(kx.clone(), bound.clone()), || {
                    format!("parallel component costs {kx}, exceeding the bound {bound}")
                })?;
                check_work(ck, ctx, y, &fold_monus(bound.clone(), kx))
            };
            attempt(a, b).or_else(|first| attempt(b, a).map_err(|_| first))
        }
        Process::Tick(q) => {
            ck.require(&Constraint::ge(bound.clone(), IndexExpr::lit(1)), || {
                "a tick needs a bound of at least 1".to_string()
            })?;
            check_work(ck, ctx, q, &fold_monus(bound.clone(), IndexExpr::lit(1)))
        }
        Process::Nu { name, annot, body } => {
            let t = nu_annot(name, annot)?;
            let mut ctx2 = ctx.clone();
            ctx2.insert(name.clone(), t);
            check_work(ck, &ctx2, body, bound)
        }
        Process::Input { chan, params, body } => {
            let args = input_args(ctx, chan)?;
            bind_arity(chan, &args, params)?;
            let mut ctx2 = ctx.clone();
            for (v, ty) in params.iter().zip(&args) {
                ctx2.insert(v.clone(), ty.clone());
            }
            check_work(ck, &ctx2, body, bound)
                .map_err(|e| TypeError::new(format!("in input on `{chan}`: {e}")))
        }
        Process::Serv { .. } => check_serv_body_work(ck, ctx, p),
        Process::Output { .. } => {
            let (cost, chan) = output_cost_work(ck, ctx, p)?;
            ck.require(&Constraint::le(cost.clone(), bound.clone()), || {
                format!("call on `{chan}` costs {cost}, exceeding the bound {bound}")
            })
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            let (lo, hi) = nat_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = with_hyp(ck, Constraint::le(lo.clone(), IndexExpr::lit(0)));
            check_work(&ck0, ctx, zero, bound)?;
            let ck1 = with_hyp(ck, Constraint::ge(hi.clone(), IndexExpr::lit(1)));
            let mut ctx2 = ctx.clone();
            ctx2.insert(
                succ_bind.clone(),
                WorkType::nat(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                ),
            );
            check_work(&ck1, &ctx2, succ, bound)
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            let (lo, hi, elem) = list_scrutinee(ck, ctx, scrutinee)?;
            let ck0 = with_hyp(ck, Constraint::le(lo.clone(), IndexExpr::lit(0)));
            check_work(&ck0, ctx, nil, bound)?;
            let ck1 = with_hyp(ck, Constraint::ge(hi.clone(), IndexExpr::lit(1)));
            let mut ctx2 = ctx.clone();
            ctx2.insert(head_bind.clone(), elem.clone());
            ctx2.insert(
                tail_bind.clone(),
                WorkType::list(
                    fold_monus(lo, IndexExpr::lit(1)),
                    fold_monus(hi, IndexExpr::lit(1)),
                    elem,
                ),
            );
            check_work(&ck1, &ctx2, cons, bound)
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            check_expr_work(ck, ctx, cond, &WorkType::Bool)?;
            check_work(ck, ctx, then_branch, bound)?;
            check_work(ck, ctx, else_branch, bound)
        }
    }
}

/// Check the body of a replicated input against the complexity declared in
/// its channel's server type.
pub fn check_serv_body_work(ck: &Checker, ctx: &WorkCtx, serv: &Process) -> Result<(), TypeError> {
    let Process::Serv { chan, params, body } = serv else {
        panic!("check_serv_body_work expects a replicated input");
    };
    let t = ctx
        .get(chan)
        .ok_or_else(|| TypeError::new(format!("unbound channel `{chan}`")))?;
    let (binders, cost, args) = match t {
        WorkType::Serv {
            binders,
            cost,
            args,
        }
        | WorkType::IServ {
            binders,
            cost,
            args,
        } => (binders.clone(), cost.clone(), args.clone()),
        other => {
            return Err(TypeError::new(format!(
                "`{chan}` has type {other}, not an input server"
            )))
        }
    };
    bind_arity(chan, &args, params)?;
    let mut env = ck.env.clone();
    for b in &binders {
        env.declare_var(b.clone());
    }
    let ck2 = Checker::with_config(env, ck.cfg);
    let mut ctx2 = ctx.clone();
    for (v, ty) in params.iter().zip(&args) {
        ctx2.insert(v.clone(), ty.clone());
    }
    check_work(&ck2, &ctx2, body, &cost)
        .map_err(|e| TypeError::new(format!("in the body of server `{chan}`: {e}")))
}

fn output_cost_work(
    ck: &Checker,
    ctx: &WorkCtx,
    p: &Process,
) -> Result<(IndexExpr, Ident), TypeError> {
    let Process::Output { chan, args, inst } = p else {
        panic!("output_cost_work expects an output");
    };
    let t = ctx
        .get(chan)
        .ok_or_else(|| TypeError::new(format!("unbound channel `{chan}`")))?;
    match t {
        WorkType::Ch { args: tys } | WorkType::Out { args: tys } => {
            if inst.is_some() {
                return Err(TypeError::new(format!(
                    "`{chan}` is a plain channel; index instantiation @[..] applies to servers"
                )));
            }
            check_args_work(ck, ctx, chan, tys, args)?;
            Ok((IndexExpr::lit(0), chan.clone()))
        }
        WorkType::Serv {
            binders,
            cost,
            args: tys,
        }
        | WorkType::OServ {
            binders,
            cost,
            args: tys,
        } => {
            let insts = match inst {
                Some(js) => {
                    if js.len() != binders.len() {
                        return Err(TypeError::new(format!(
                            "call to `{chan}` instantiates {} indices, expected {}",
                            js.len(),
                            binders.len()
                        )));
                    }
                    js.clone()
                }
                None => infer_inst_work(ck, ctx, chan, binders, tys, args)?,
            };
            let map: BTreeMap<IndexVar, IndexExpr> = binders
                .iter()
                .cloned()
                .zip(insts.iter().cloned())
                .collect();
            let inst_args: Vec<WorkType> = tys.iter().map(|a| a.subst(&map)).collect();
            check_args_work(ck, ctx, chan, &inst_args, args)?;
            Ok((cost.subst(&map), chan.clone()))
        }
        other => Err(TypeError::new(format!(
            "`{chan}` has type {other}, not an output channel"
        ))),
    }
}

fn infer_inst_work(
    ck: &Checker,
    ctx: &WorkCtx,
    chan: &Ident,
    binders: &[IndexVar],
    decl_args: &[WorkType],
    actual_args: &[Expr],
) -> Result<Vec<IndexExpr>, TypeError> {
    let mut solved: BTreeMap<IndexVar, IndexExpr> = BTreeMap::new();
    for (decl, actual) in decl_args.iter().zip(actual_args) {
        if let Ok(at) = synth_expr_work(ck, ctx, actual) {
            match_slots_work(decl, &at, binders, &mut solved);
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

fn match_slots_work(
    decl: &WorkType,
    actual: &WorkType,
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
    use WorkType::*;
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
            match_slots_work(e1, e2, binders, solved);
        }
        (Ch { args: a1 }, Ch { args: a2 })
        | (In { args: a1 }, In { args: a2 })
        | (Out { args: a1 }, Out { args: a2 })
        | (Out { args: a1 }, Ch { args: a2 })
        | (In { args: a1 }, Ch { args: a2 }) => {
            for (d, a) in a1.iter().zip(a2) {
                match_slots_work(d, a, binders, solved);
            }
        }
        _ => {}
    }
}

fn check_args_work(
    ck: &Checker,
    ctx: &WorkCtx,
    chan: &Ident,
    tys: &[WorkType],
    args: &[Expr],
) -> Result<(), TypeError> {
    if tys.len() != args.len() {
        return Err(TypeError::new(format!(
            "`{chan}` carries {} payloads but {} were supplied",
            tys.len(),
            args.len()
        )));
    }
    for (e, ty) in args.iter().zip(tys) {
        check_expr_work(ck, ctx, e, ty)
            .map_err(|err| TypeError::new(format!("argument `{e}` of `{chan}`: {err}")))?;
    }
    Ok(())
}

fn with_hyp(ck: &Checker, c: Constraint) -> Checker {
    let mut env = ck.env.clone();
    env.assume(c);
    Checker::with_config(env, ck.cfg)
}

fn nu_annot(
    name: &Ident,
    annot: &Option<SizedType>,
) -> Result<WorkType, TypeError> {
    annot
        .as_ref()
        .map(strip_time)
        .ok_or_else(|| {
            TypeError::new(format!(
                "work checking requires a type annotation on `new {name}`"
            ))
        })
}

fn input_args(ctx: &WorkCtx, chan: &Ident) -> Result<Vec<WorkType>, TypeError> {
    match ctx.get(chan) {
        Some(WorkType::Ch { args }) | Some(WorkType::In { args }) => Ok(args.clone()),
        Some(other) => Err(TypeError::new(format!(
            "`{chan}` has type {other}, not an input channel"
        ))),
        None => Err(TypeError::new(format!("unbound channel `{chan}`"))),
    }
}

fn bind_arity<T>(chan: &Ident, tys: &[T], params: &[Ident]) -> Result<(), TypeError> {
    if tys.len() != params.len() {
        return Err(TypeError::new(format!(
            "`{chan}` carries {} payloads but {} parameters are bound",
            tys.len(),
            params.len()
        )));
    }
    Ok(())
}

fn nat_scrutinee(
    ck: &Checker,
    ctx: &WorkCtx,
    e: &Expr,
) -> Result<(IndexExpr, IndexExpr), TypeError> {
    match synth_expr_work(ck, ctx, e)? {
        WorkType::Nat { lo, hi } => Ok((lo, hi)),
        other => Err(TypeError::new(format!(
            "match on a natural requires Nat, found {other}"
        ))),
    }
}

fn list_scrutinee(
    ck: &Checker,
    ctx: &WorkCtx,
    e: &Expr,
) -> Result<(IndexExpr, IndexExpr, WorkType), TypeError> {
    match synth_expr_work(ck, ctx, e)? {
        WorkType::List { lo, hi, elem } => Ok((lo, hi, *elem)),
        other => Err(TypeError::new(format!(
            "match on a list requires List, found {other}"
        ))),
    }
}

/// Convenience: build a work checker over an index environment.
pub fn work_checker(env: IndexEnv) -> Checker {
    Checker::new(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexExpr as I;
    use crate::syntax::Process as P;

    #[test]
    fn par_sums_ticks() {
        let ck = work_checker(IndexEnv::new());
        let p = P::par(P::tick(P::Nil), P::par(P::tick(P::Nil), P::tick(P::Nil)));
        let k = synthesize_work(&ck, &WorkCtx::new(), &p).unwrap();
        assert_eq!(k, I::lit(3));
        assert!(check_work(&ck, &WorkCtx::new(), &p, &I::lit(3)).is_ok());
        let err = check_work(&ck, &WorkCtx::new(), &p, &I::lit(2)).unwrap_err();
        assert!(err.witness.is_some());
    }

    #[test]
    fn strip_time_collapses_servers() {
        use crate::spantypes::SizedType as S;
        let s = S::Serv {
            time: I::lit(0),
            binders: vec!["i".into()],
            cost: I::var("i"),
            args: vec![S::Bool],
        };
        match strip_time(&s) {
            WorkType::Serv { binders, cost, .. } => {
                assert_eq!(binders, vec!["i".to_string()]);
                assert_eq!(cost, I::var("i"));
            }
            other => panic!("expected work server, got {other}"),
        }
    }

    #[test]
    fn input_does_not_advance() {
        // a : ch(), b : ch() |- a().b<> works regardless of times, since work
        // types carry none.
        let ck = work_checker(IndexEnv::new());
        let ctx: WorkCtx = [
            ("a".to_string(), WorkType::Ch { args: vec![] }),
            ("b".to_string(), WorkType::Ch { args: vec![] }),
        ]
        .into_iter()
        .collect();
        let p = P::input("a", vec![], P::output("b", vec![]));
        assert!(check_work(&ck, &ctx, &p, &I::lit(0)).is_ok());
    }
}
