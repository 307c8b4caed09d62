//! Lexer and recursive-descent parser for the surface language: value
//! expressions, processes, index expressions, constraints, types, and whole
//! program files. The grammar matches what the `pretty` printers emit, so
//! printing then parsing is the identity.

use std::fmt;

use crate::index::{Constraint, FnSym, IndexExpr, UserFn};
use crate::program::{Def, Main, ProgramFile};
use crate::spantypes::SizedType;
use crate::syntax::{Expr, Ident, Process};
use crate::worktypes::WorkType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kw {
    New,
    In,
    Match,
    If,
    Then,
    Else,
    Tick,
    True,
    False,
    Def,
    Main,
    Vars,
    Assume,
    Fun,
    Work,
    Default,
}

fn keyword(s: &str) -> Option<Kw> {
    Some(match s {
        "new" => Kw::New,
        "in" => Kw::In,
        "match" => Kw::Match,
        "if" => Kw::If,
        "then" => Kw::Then,
        "else" => Kw::Else,
        "tick" => Kw::Tick,
        "true" => Kw::True,
        "false" => Kw::False,
        "def" => Kw::Def,
        "main" => Kw::Main,
        "vars" => Kw::Vars,
        "assume" => Kw::Assume,
        "fun" => Kw::Fun,
        "work" => Kw::Work,
        "default" => Kw::Default,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Kw(Kw),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Kw(k) => write!(f, "keyword `{k:?}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const TWO_CHAR: [&str; 6] = ["=>", "::", "<=", ">=", "!=", "->"];
const ONE_CHAR: &str = "()[]{}<>,;:.|!@+-*=^";

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '%')
            {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let tok = match keyword(&s) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(s),
            };
            toks.push((tok, line, start_col));
            continue;
        }
        if c.is_ascii_digit() {
            let mut n: u64 = 0;
            while i < chars.len() && chars[i].is_ascii_digit() {
                n = n
                    .checked_mul(10)
                    .and_then(|m| m.checked_add(chars[i] as u64 - '0' as u64))
                    .ok_or(ParseError {
                        message: "numeric literal out of range".into(),
                        line,
                        col: start_col,
                    })?;
                i += 1;
                col += 1;
            }
            toks.push((Tok::Num(n), line, start_col));
            continue;
        }
        if i + 1 < chars.len() {
            let pair: String = chars[i..i + 2].iter().collect();
            if let Some(sym) = TWO_CHAR.iter().find(|s| **s == pair) {
                toks.push((Tok::Sym(sym), line, start_col));
                i += 2;
                col += 2;
                continue;
            }
        }
        if let Some(pos) = ONE_CHAR.find(c) {
            let sym = &ONE_CHAR[pos..pos + c.len_utf8()];
            toks.push((Tok::Sym(sym), line, start_col));
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            message: format!("unexpected character `{c}`"),
            line,
            col,
        });
    }
    toks.push((Tok::Eof, line, col));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    i: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.i];
        Err(ParseError {
            message: message.into(),
            line,
            col,
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if *self.peek() == Tok::Sym(match_sym(s)) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        if *self.peek() == Tok::Kw(k) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: Kw, what: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{what}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected an identifier, found {other}")),
        }
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Tok::Num(n) => {
                let n = *n;
                self.next();
                Ok(n)
            }
            other => self.err(format!("expected a number, found {other}")),
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    // -- index expressions --------------------------------------------------

    fn index(&mut self) -> Result<IndexExpr, ParseError> {
        let mut e = self.index_term()?;
        loop {
            if self.eat_sym("+") {
                e = IndexExpr::add(e, self.index_term()?);
            } else if self.eat_sym("-") {
                e = IndexExpr::monus(e, self.index_term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn index_term(&mut self) -> Result<IndexExpr, ParseError> {
        let mut e = self.index_factor()?;
        while self.eat_sym("*") {
            e = IndexExpr::mul(e, self.index_factor()?);
        }
        Ok(e)
    }

    fn index_factor(&mut self) -> Result<IndexExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Ok(IndexExpr::lit(n))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.index()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                if *self.peek() == Tok::Sym("(") {
                    self.next();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Sym(")") {
                        args.push(self.index()?);
                        while self.eat_sym(",") {
                            args.push(self.index()?);
                        }
                    }
                    self.expect_sym(")")?;
                    match name.as_str() {
                        "max" if args.len() == 2 => {
                            let mut it = args.into_iter();
                            Ok(IndexExpr::max(it.next().unwrap(), it.next().unwrap()))
                        }
                        "pow2" if args.len() == 1 => {
                            Ok(IndexExpr::pow2(args.into_iter().next().unwrap()))
                        }
                        "max" | "pow2" => self.err(format!("wrong arity for `{name}`")),
                        _ => Ok(IndexExpr::Apply(FnSym::User(name), args)),
                    }
                } else {
                    Ok(IndexExpr::var(name))
                }
            }
            other => self.err(format!("expected an index expression, found {other}")),
        }
    }

    // A superscript after `^`: a number, a variable, or a parenthesised
    // index expression.
    fn index_atom(&mut self) -> Result<IndexExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Ok(IndexExpr::lit(n))
            }
            Tok::Ident(name) => {
                // `pow2` and `max` applications are unambiguous even before a
                // payload list; anything else needs parentheses.
                if (name == "pow2" || name == "max") && *self.peek2() == Tok::Sym("(") {
                    return self.index_factor();
                }
                self.next();
                Ok(IndexExpr::var(name))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.index()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            other => self.err(format!("expected an index after `^`, found {other}")),
        }
    }

    fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let lhs = self.index()?;
        let rel = self.next();
        let rhs = self.index()?;
        match rel {
            Tok::Sym("<=") => Ok(Constraint::le(lhs, rhs)),
            Tok::Sym("<") => Ok(Constraint::lt(lhs, rhs)),
            Tok::Sym(">=") => Ok(Constraint::ge(lhs, rhs)),
            Tok::Sym(">") => Ok(Constraint::gt(lhs, rhs)),
            Tok::Sym("=") => Ok(Constraint::eq(lhs, rhs)),
            Tok::Sym("!=") => Ok(Constraint::ne(lhs, rhs)),
            other => self.err(format!("expected a relation, found {other}")),
        }
    }

    // -- value expressions --------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let head = self.expr_atom()?;
        if self.eat_sym("::") {
            let tail = self.expr()?;
            Ok(Expr::Cons(Box::new(head), Box::new(tail)))
        } else {
            Ok(head)
        }
    }

    fn expr_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Ok(Expr::nat(n))
            }
            Tok::Kw(Kw::True) => {
                self.next();
                Ok(Expr::True)
            }
            Tok::Kw(Kw::False) => {
                self.next();
                Ok(Expr::False)
            }
            Tok::Sym("[") => {
                self.next();
                let mut items = Vec::new();
                if *self.peek() != Tok::Sym("]") {
                    items.push(self.expr()?);
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                }
                self.expect_sym("]")?;
                Ok(Expr::list(items))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "s" && *self.peek2() == Tok::Sym("(") => {
                self.next();
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::Succ(Box::new(e)))
            }
            Tok::Ident(name) => {
                self.next();
                Ok(Expr::Var(name))
            }
            other => self.err(format!("expected a value expression, found {other}")),
        }
    }

    // -- types --------------------------------------------------------------

    fn sized_type(&mut self) -> Result<SizedType, ParseError> {
        if self.eat_kw(Kw::In) {
            self.expect_sym("^")?;
            let time = self.index_atom()?;
            let args = self.payloads(Self::sized_type)?;
            return Ok(SizedType::In { time, args });
        }
        let name = self.ident()?;
        match name.as_str() {
            "Bool" => Ok(SizedType::Bool),
            "Nat" => {
                let (lo, hi) = self.interval()?;
                Ok(SizedType::Nat { lo, hi })
            }
            "List" => {
                let (lo, hi) = self.interval()?;
                self.expect_sym("(")?;
                let elem = self.sized_type()?;
                self.expect_sym(")")?;
                Ok(SizedType::List {
                    lo,
                    hi,
                    elem: Box::new(elem),
                })
            }
            "ch" | "out" => {
                self.expect_sym("^")?;
                let time = self.index_atom()?;
                let args = self.payloads(Self::sized_type)?;
                if name == "ch" {
                    Ok(SizedType::Ch { time, args })
                } else {
                    Ok(SizedType::Out { time, args })
                }
            }
            "serv" | "iserv" | "oserv" => {
                self.expect_sym("^")?;
                let time = self.index_atom()?;
                let (binders, cost, args) = self.serv_rest(Self::sized_type)?;
                Ok(match name.as_str() {
                    "serv" => SizedType::Serv {
                        time,
                        binders,
                        cost,
                        args,
                    },
                    "iserv" => SizedType::IServ {
                        time,
                        binders,
                        cost,
                        args,
                    },
                    _ => SizedType::OServ {
                        time,
                        binders,
                        cost,
                        args,
                    },
                })
            }
            other => self.err(format!("unknown type constructor `{other}`")),
        }
    }

    fn work_type(&mut self) -> Result<WorkType, ParseError> {
        if self.eat_kw(Kw::In) {
            let args = self.payloads(Self::work_type)?;
            return Ok(WorkType::In { args });
        }
        let name = self.ident()?;
        match name.as_str() {
            "Bool" => Ok(WorkType::Bool),
            "Nat" => {
                let (lo, hi) = self.interval()?;
                Ok(WorkType::Nat { lo, hi })
            }
            "List" => {
                let (lo, hi) = self.interval()?;
                self.expect_sym("(")?;
                let elem = self.work_type()?;
                self.expect_sym(")")?;
                Ok(WorkType::List {
                    lo,
                    hi,
                    elem: Box::new(elem),
                })
            }
            "ch" => Ok(WorkType::Ch {
                args: self.payloads(Self::work_type)?,
            }),
            "out" => Ok(WorkType::Out {
                args: self.payloads(Self::work_type)?,
            }),
            "serv" | "iserv" | "oserv" => {
                let (binders, cost, args) = self.serv_rest(Self::work_type)?;
                Ok(match name.as_str() {
                    "serv" => WorkType::Serv {
                        binders,
                        cost,
                        args,
                    },
                    "iserv" => WorkType::IServ {
                        binders,
                        cost,
                        args,
                    },
                    _ => WorkType::OServ {
                        binders,
                        cost,
                        args,
                    },
                })
            }
            other => self.err(format!("unknown type constructor `{other}`")),
        }
    }

    fn interval(&mut self) -> Result<(IndexExpr, IndexExpr), ParseError> {
        self.expect_sym("[")?;
        let lo = self.index()?;
        self.expect_sym(",")?;
        let hi = self.index()?;
        self.expect_sym("]")?;
        Ok((lo, hi))
    }

    fn payloads<T>(
        &mut self,
        item: fn(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::Sym(")") {
            args.push(item(self)?);
            while self.eat_sym(",") {
                args.push(item(self)?);
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn serv_rest<T>(
        &mut self,
        item: fn(&mut Self) -> Result<T, ParseError>,
    ) -> Result<(Vec<String>, IndexExpr, Vec<T>), ParseError> {
        let mut binders = Vec::new();
        if self.eat_sym("[") {
            if *self.peek() != Tok::Sym("]") {
                binders.push(self.ident()?);
                while self.eat_sym(",") {
                    binders.push(self.ident()?);
                }
            }
            self.expect_sym("]")?;
        }
        self.expect_sym("(")?;
        let cost = self.index()?;
        self.expect_sym(";")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::Sym(")") {
            args.push(item(self)?);
            while self.eat_sym(",") {
                args.push(item(self)?);
            }
        }
        self.expect_sym(")")?;
        Ok((binders, cost, args))
    }

    // -- processes ----------------------------------------------------------

    fn process(&mut self) -> Result<Process, ParseError> {
        // "|" is right-associative: a | b | c parses as a | (b | c).
        let first = self.prefix()?;
        if self.eat_sym("|") {
            let rest = self.process()?;
            return Ok(Process::par(first, rest));
        }
        Ok(first)
    }

    fn prefix(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Num(0) => {
                self.next();
                Ok(Process::Nil)
            }
            Tok::Kw(Kw::Tick) => {
                self.next();
                self.expect_sym(".")?;
                Ok(Process::tick(self.prefix()?))
            }
            Tok::Sym("(") => {
                self.next();
                let p = self.process()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Kw(Kw::New) => {
                self.next();
                let name = self.ident()?;
                let annot = if self.eat_sym(":") {
                    Some(self.sized_type()?)
                } else {
                    None
                };
                self.expect_kw(Kw::In, "in")?;
                let body = self.prefix()?;
                Ok(Process::Nu {
                    name,
                    annot,
                    body: Box::new(body),
                })
            }
            Tok::Kw(Kw::If) => {
                self.next();
                let cond = self.expr()?;
                self.expect_kw(Kw::Then, "then")?;
                let then_branch = self.prefix()?;
                self.expect_kw(Kw::Else, "else")?;
                let else_branch = self.prefix()?;
                Ok(Process::If {
                    cond,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            Tok::Kw(Kw::Match) => {
                self.next();
                let scrutinee = self.expr()?;
                self.expect_sym("{")?;
                if self.eat_sym("[") {
                    self.expect_sym("]")?;
                    self.expect_sym("=>")?;
                    let nil = self.process()?;
                    self.expect_sym(";")?;
                    let head_bind = self.ident()?;
                    self.expect_sym("::")?;
                    let tail_bind = self.ident()?;
                    self.expect_sym("=>")?;
                    let cons = self.process()?;
                    self.expect_sym("}")?;
                    Ok(Process::MatchList {
                        scrutinee,
                        nil: Box::new(nil),
                        head_bind,
                        tail_bind,
                        cons: Box::new(cons),
                    })
                } else {
                    match self.next() {
                        Tok::Num(0) => {}
                        other => {
                            return self
                                .err(format!("expected a `0` or `[]` pattern, found {other}"))
                        }
                    }
                    self.expect_sym("=>")?;
                    let zero = self.process()?;
                    self.expect_sym(";")?;
                    let s = self.ident()?;
                    if s != "s" {
                        return self.err(format!("expected pattern `s(x)`, found `{s}`"));
                    }
                    self.expect_sym("(")?;
                    let succ_bind = self.ident()?;
                    self.expect_sym(")")?;
                    self.expect_sym("=>")?;
                    let succ = self.process()?;
                    self.expect_sym("}")?;
                    Ok(Process::MatchNat {
                        scrutinee,
                        zero: Box::new(zero),
                        succ_bind,
                        succ: Box::new(succ),
                    })
                }
            }
            Tok::Sym("!") => {
                self.next();
                let chan = self.ident()?;
                let params = self.param_list()?;
                self.expect_sym(".")?;
                let body = self.prefix()?;
                Ok(Process::Serv {
                    chan,
                    params,
                    body: Box::new(body),
                })
            }
            Tok::Ident(chan) => {
                self.next();
                if *self.peek() == Tok::Sym("<") {
                    self.next();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Sym(">") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(">")?;
                    let inst = if self.eat_sym("@") {
                        self.expect_sym("[")?;
                        let mut js = Vec::new();
                        if *self.peek() != Tok::Sym("]") {
                            js.push(self.index()?);
                            while self.eat_sym(",") {
                                js.push(self.index()?);
                            }
                        }
                        self.expect_sym("]")?;
                        Some(js)
                    } else {
                        None
                    };
                    Ok(Process::Output { chan, args, inst })
                } else {
                    let params = self.param_list()?;
                    self.expect_sym(".")?;
                    let body = self.prefix()?;
                    Ok(Process::Input {
                        chan,
                        params,
                        body: Box::new(body),
                    })
                }
            }
            other => self.err(format!("expected a process, found {other}")),
        }
    }

    fn param_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::Sym(")") {
            params.push(self.ident()?);
            while self.eat_sym(",") {
                params.push(self.ident()?);
            }
        }
        self.expect_sym(")")?;
        Ok(params)
    }

    // -- program files ------------------------------------------------------

    fn program(&mut self) -> Result<ProgramFile, ParseError> {
        let mut prog = ProgramFile {
            vars: Vec::new(),
            assumes: Vec::new(),
            user_fns: Vec::new(),
            defs: Vec::new(),
            main: Main {
                params: Vec::new(),
                span_bound: None,
                work_bound: None,
                body: Process::Nil,
            },
        };
        loop {
            if self.eat_kw(Kw::Vars) {
                prog.vars.push(self.ident()?);
                while self.eat_sym(",") {
                    prog.vars.push(self.ident()?);
                }
                self.expect_sym(";")?;
            } else if self.eat_kw(Kw::Assume) {
                prog.assumes.push(self.constraint()?);
                while self.eat_sym(",") {
                    prog.assumes.push(self.constraint()?);
                }
                self.expect_sym(";")?;
            } else if self.eat_kw(Kw::Fun) {
                prog.user_fns.push(self.user_fn()?);
            } else if self.eat_kw(Kw::Def) {
                prog.defs.push(self.def()?);
            } else if self.eat_kw(Kw::Main) {
                prog.main = self.main_decl()?;
                if !self.at_eof() {
                    return self.err(format!("unexpected {} after main", self.peek()));
                }
                return Ok(prog);
            } else {
                return self.err(format!(
                    "expected `vars`, `assume`, `fun`, `def`, or `main`, found {}",
                    self.peek()
                ));
            }
        }
    }

    // fun f(2) = { (0, 1) -> 3; default 0 };
    fn user_fn(&mut self) -> Result<(String, UserFn), ParseError> {
        let name = self.ident()?;
        self.expect_sym("(")?;
        let arity = self.number()? as usize;
        self.expect_sym(")")?;
        self.expect_sym("=")?;
        self.expect_sym("{")?;
        let mut entries = Vec::new();
        let mut default = 0;
        loop {
            if self.eat_kw(Kw::Default) {
                default = self.number()?;
            } else if *self.peek() == Tok::Sym("(") {
                self.next();
                let mut key = Vec::new();
                if *self.peek() != Tok::Sym(")") {
                    key.push(self.number()?);
                    while self.eat_sym(",") {
                        key.push(self.number()?);
                    }
                }
                self.expect_sym(")")?;
                if key.len() != arity {
                    return self.err(format!(
                        "table entry for `{name}` has {} arguments, expected {arity}",
                        key.len()
                    ));
                }
                self.expect_sym("->")?;
                let val = self.number()?;
                entries.push((key, val));
            } else {
                return self.err(format!(
                    "expected a table entry or `default`, found {}",
                    self.peek()
                ));
            }
            if !self.eat_sym(";") {
                break;
            }
            if *self.peek() == Tok::Sym("}") {
                break;
            }
        }
        self.expect_sym("}")?;
        self.expect_sym(";")?;
        Ok((
            name,
            UserFn {
                arity,
                entries,
                default,
            },
        ))
    }

    fn def(&mut self) -> Result<Def, ParseError> {
        let name = self.ident()?;
        let params = self.param_list()?;
        self.expect_sym(":")?;
        let span_type = self.sized_type()?;
        let work_type = if self.eat_kw(Kw::Work) {
            Some(self.work_type()?)
        } else {
            None
        };
        self.expect_sym("=")?;
        let body = self.process()?;
        Ok(Def {
            name,
            params,
            span_type,
            work_type,
            body,
        })
    }

    fn main_decl(&mut self) -> Result<Main, ParseError> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::Sym(")") {
            loop {
                let name = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.sized_type()?;
                params.push((name, ty));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let span_bound = if self.eat_sym(":") {
            Some(self.index()?)
        } else {
            None
        };
        let work_bound = if self.eat_kw(Kw::Work) {
            Some(self.index()?)
        } else {
            None
        };
        self.expect_sym("=")?;
        let body = self.process()?;
        Ok(Main {
            params,
            span_bound,
            work_bound,
            body,
        })
    }
}

fn match_sym(s: &str) -> &'static str {
    TWO_CHAR
        .iter()
        .copied()
        .find(|t| *t == s)
        .unwrap_or_else(|| {
            let pos = ONE_CHAR.find(s).expect("unknown symbol in parser");
            &ONE_CHAR[pos..pos + 1]
        })
}

fn finish<T>(p: Parser, v: T) -> Result<T, ParseError> {
    if p.at_eof() {
        Ok(v)
    } else {
        p.err(format!("trailing input: {}", p.peek()))
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    finish(p, e)
}

pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(src)?;
    let q = p.process()?;
    finish(p, q)
}

pub fn parse_index(src: &str) -> Result<IndexExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.index()?;
    finish(p, e)
}

pub fn parse_constraint(src: &str) -> Result<Constraint, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.constraint()?;
    finish(p, c)
}

pub fn parse_sized_type(src: &str) -> Result<SizedType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.sized_type()?;
    finish(p, t)
}

pub fn parse_work_type(src: &str) -> Result<WorkType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.work_type()?;
    finish(p, t)
}

pub fn parse_program(src: &str) -> Result<ProgramFile, ParseError> {
    let mut p = Parser::new(src)?;
    p.program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Process as P;

    #[test]
    fn parses_processes() {
        let p = parse_process("a().tick.0 | a<> | tick.0").unwrap();
        assert_eq!(
            p,
            P::par(
                P::input("a", vec![], P::tick(P::Nil)),
                P::par(P::output("a", vec![]), P::tick(P::Nil))
            )
        );
    }

    #[test]
    fn parses_sugar() {
        let p = parse_process("f<[4, 6], 2>@[n]").unwrap();
        let P::Output { args, inst, .. } = &p else {
            panic!("expected an output");
        };
        assert_eq!(args[0], Expr::list(vec![Expr::nat(4), Expr::nat(6)]));
        assert_eq!(args[1], Expr::nat(2));
        assert_eq!(inst.as_deref(), Some(&[IndexExpr::var("n")][..]));
    }

    #[test]
    fn parses_match_and_new() {
        let src = "new b : ch^1(Bool) in match l { [] => a<[]>; x :: xs => b<true> | b(y).0 }";
        let p = parse_process(src).unwrap();
        assert_eq!(parse_process(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn roundtrips_types() {
        for src in [
            "Nat[0, m]",
            "List[0, i + j](Nat[0, m])",
            "ch^(i + 1)(Bool)",
            "serv^0[i, j](i + j; List[0, i](Nat[0, m]), out^(i + j)(List[0, i + j](Nat[0, m])))",
            "iserv^2(1; in^0())",
            "oserv^0[i](pow2(i + 1); Bool)",
        ] {
            let t = parse_sized_type(src).unwrap();
            assert_eq!(t.to_string(), src);
            assert_eq!(parse_sized_type(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn roundtrips_work_types() {
        for src in ["ch(Bool)", "serv[i](i * 2; List[0, i](Bool))"] {
            let t = parse_work_type(src).unwrap();
            assert_eq!(t.to_string(), src);
        }
    }

    #[test]
    fn parses_program_skeleton() {
        let src = "\
vars n;
assume n >= 1;
def id(x, r) : serv^0[i](0; Nat[0, i], out^0(Nat[0, i])) = r<x>
main(a : ch^0()) : 1 = a().tick.0 | a<> | tick.0
";
        let prog = parse_program(src).unwrap();
        assert_eq!(prog.vars, vec!["n"]);
        assert_eq!(prog.assumes.len(), 1);
        assert_eq!(prog.defs.len(), 1);
        assert_eq!(prog.main.span_bound, Some(IndexExpr::lit(1)));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_process("a(").is_err());
        assert!(parse_program("def = 0").is_err());
        assert!(parse_process("tick tick").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_process("tick.0 -- the whole point\n| 0").unwrap();
        assert_eq!(p, P::par(P::tick(P::Nil), P::Nil));
    }
}
