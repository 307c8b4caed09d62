//! Display implementations for the surface syntax. The printers and the
//! parser in `parse` agree: printing any term and re-parsing it yields the
//! same term.

use std::fmt;

use crate::index::{FnSym, IndexExpr};
use crate::iotypes::SimpleType;
use crate::spantypes::SizedType;
use crate::syntax::{Expr, Process};
use crate::worktypes::WorkType;

// ---------------------------------------------------------------------------
// Index expressions
// ---------------------------------------------------------------------------

// Precedence levels: 0 = + and - (left associative), 1 = *, 2 = atoms.
fn fmt_index(e: &IndexExpr, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        IndexExpr::Var(v) => write!(f, "{v}"),
        IndexExpr::Lit(n) => write!(f, "{n}"),
        IndexExpr::Apply(sym, args) => match sym {
            FnSym::Add | FnSym::Monus => {
                let op = if matches!(sym, FnSym::Add) { "+" } else { "-" };
                if prec > 0 {
                    write!(f, "(")?;
                }
                fmt_index(&args[0], 0, f)?;
                write!(f, " {op} ")?;
                fmt_index(&args[1], 1, f)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            FnSym::Mul => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                fmt_index(&args[0], 1, f)?;
                write!(f, " * ")?;
                fmt_index(&args[1], 2, f)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            FnSym::Max => {
                write!(f, "max(")?;
                fmt_index(&args[0], 0, f)?;
                write!(f, ", ")?;
                fmt_index(&args[1], 0, f)?;
                write!(f, ")")
            }
            FnSym::Pow2 => {
                write!(f, "pow2(")?;
                fmt_index(&args[0], 0, f)?;
                write!(f, ")")
            }
            FnSym::User(name) => {
                // Superscript position (prec 2) needs parentheses so the
                // application is not mistaken for a payload list.
                if prec > 1 {
                    write!(f, "(")?;
                }
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_index(a, 0, f)?;
                }
                write!(f, ")")?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        },
    }
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_index(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Value expressions
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_nat() {
            return write!(f, "{n}");
        }
        if let Some(items) = self.as_list() {
            write!(f, "[")?;
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            return write!(f, "]");
        }
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Zero => write!(f, "0"),
            Expr::Succ(e) => write!(f, "s({e})"),
            Expr::Nil => write!(f, "[]"),
            Expr::Cons(h, t) => {
                // Heads that are themselves cons cells need parentheses to
                // keep :: right associative on re-parse.
                if matches!(**h, Expr::Cons(..)) {
                    write!(f, "({h}) :: {t}")
                } else {
                    write!(f, "{h} :: {t}")
                }
            }
            Expr::True => write!(f, "true"),
            Expr::False => write!(f, "false"),
        }
    }
}

// ---------------------------------------------------------------------------
// Processes
// ---------------------------------------------------------------------------

// `top` distinguishes positions where a bare parallel composition is
// unambiguous from prefix continuations, which need parentheses around `|`.
fn fmt_process(p: &Process, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        Process::Par(a, b) => {
            if !top {
                write!(f, "(")?;
            }
            // "|" parses right-associatively, so a parallel left operand
            // needs parentheses while a right operand can stay bare.
            fmt_process(a, !matches!(**a, Process::Par(..)), f)?;
            write!(f, " | ")?;
            fmt_process(b, true, f)?;
            if !top {
                write!(f, ")")?;
            }
            Ok(())
        }
        Process::Nil => write!(f, "0"),
        Process::Tick(q) => {
            write!(f, "tick.")?;
            fmt_process(q, false, f)
        }
        Process::Serv { chan, params, body } => {
            write!(f, "!{chan}({}).", params.join(", "))?;
            fmt_process(body, false, f)
        }
        Process::Input { chan, params, body } => {
            write!(f, "{chan}({}).", params.join(", "))?;
            fmt_process(body, false, f)
        }
        Process::Output { chan, args, inst } => {
            write!(f, "{chan}<")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ">")?;
            if let Some(js) = inst {
                write!(f, "@[")?;
                for (i, j) in js.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{j}")?;
                }
                write!(f, "]")?;
            }
            Ok(())
        }
        Process::Nu { name, annot, body } => {
            match annot {
                Some(t) => write!(f, "new {name} : {t} in ")?,
                None => write!(f, "new {name} in ")?,
            }
            fmt_process(body, false, f)
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            write!(f, "match {scrutinee} {{ 0 => ")?;
            fmt_process(zero, true, f)?;
            write!(f, "; s({succ_bind}) => ")?;
            fmt_process(succ, true, f)?;
            write!(f, " }}")
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            write!(f, "match {scrutinee} {{ [] => ")?;
            fmt_process(nil, true, f)?;
            write!(f, "; {head_bind} :: {tail_bind} => ")?;
            fmt_process(cons, true, f)?;
            write!(f, " }}")
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => {
            write!(f, "if {cond} then ")?;
            fmt_process(then_branch, false, f)?;
            write!(f, " else ")?;
            fmt_process(else_branch, false, f)
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_process(self, true, f)
    }
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

fn fmt_payloads<T: fmt::Display>(args: &[T], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

fn fmt_serv<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    kw: &str,
    time: Option<&IndexExpr>,
    binders: &[String],
    cost: &IndexExpr,
    args: &[T],
) -> fmt::Result {
    write!(f, "{kw}")?;
    if let Some(t) = time {
        write!(f, "^{}", Atom(t))?;
    }
    if !binders.is_empty() {
        write!(f, "[{}]", binders.join(", "))?;
    }
    write!(f, "({cost}; ")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

// Time superscripts print atomically: `ch^2(...)` but `ch^(i + 1)(...)`.
struct Atom<'a>(&'a IndexExpr);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_index(self.0, 2, f)
    }
}

impl fmt::Display for SizedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizedType::Nat { lo, hi } => write!(f, "Nat[{lo}, {hi}]"),
            SizedType::List { lo, hi, elem } => write!(f, "List[{lo}, {hi}]({elem})"),
            SizedType::Bool => write!(f, "Bool"),
            SizedType::Ch { time, args } => {
                write!(f, "ch^{}", Atom(time))?;
                fmt_payloads(args, f)
            }
            SizedType::In { time, args } => {
                write!(f, "in^{}", Atom(time))?;
                fmt_payloads(args, f)
            }
            SizedType::Out { time, args } => {
                write!(f, "out^{}", Atom(time))?;
                fmt_payloads(args, f)
            }
            SizedType::Serv {
                time,
                binders,
                cost,
                args,
            } => fmt_serv(f, "serv", Some(time), binders, cost, args),
            SizedType::IServ {
                time,
                binders,
                cost,
                args,
            } => fmt_serv(f, "iserv", Some(time), binders, cost, args),
            SizedType::OServ {
                time,
                binders,
                cost,
                args,
            } => fmt_serv(f, "oserv", Some(time), binders, cost, args),
        }
    }
}

impl fmt::Display for WorkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkType::Nat { lo, hi } => write!(f, "Nat[{lo}, {hi}]"),
            WorkType::List { lo, hi, elem } => write!(f, "List[{lo}, {hi}]({elem})"),
            WorkType::Bool => write!(f, "Bool"),
            WorkType::Ch { args } => {
                write!(f, "ch")?;
                fmt_payloads(args, f)
            }
            WorkType::In { args } => {
                write!(f, "in")?;
                fmt_payloads(args, f)
            }
            WorkType::Out { args } => {
                write!(f, "out")?;
                fmt_payloads(args, f)
            }
            WorkType::Serv {
                binders,
                cost,
                args,
            } => fmt_serv(f, "serv", None, binders, cost, args),
            WorkType::IServ {
                binders,
                cost,
                args,
            } => fmt_serv(f, "iserv", None, binders, cost, args),
            WorkType::OServ {
                binders,
                cost,
                args,
            } => fmt_serv(f, "oserv", None, binders, cost, args),
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Nat => write!(f, "Nat"),
            SimpleType::Bool => write!(f, "Bool"),
            SimpleType::List(elem) => write!(f, "List({elem})"),
            SimpleType::Ch(args) => {
                write!(f, "ch")?;
                fmt_payloads(args, f)
            }
            SimpleType::In(args) => {
                write!(f, "in")?;
                fmt_payloads(args, f)
            }
            SimpleType::Out(args) => {
                write!(f, "out")?;
                fmt_payloads(args, f)
            }
        }
    }
}
