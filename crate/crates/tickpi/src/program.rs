//! Whole program files: a preamble of index variables and assumptions,
//! server definitions with declared complexity signatures, and a `main`
//! process with optional span and work bounds. This module checks every
//! declaration and assembles the runtime process for execution.

use std::collections::BTreeMap;

use crate::index::{Constraint, EntailConfig, IndexEnv, IndexExpr, IndexVar, UserFn};
use crate::iotypes::{check_process_simple, SimpleCtx};
use crate::spantypes::{
    check_serv_body, check_span, forget, synthesize_span, Checker, SizedType, TypeCtx, TypeError,
};
use crate::syntax::{Expr, Ident, Process};
use crate::worktypes::{
    check_serv_body_work, check_work, strip_time, synthesize_work, WorkCtx, WorkType,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramFile {
    pub vars: Vec<IndexVar>,
    pub assumes: Vec<Constraint>,
    pub user_fns: Vec<(String, UserFn)>,
    pub defs: Vec<Def>,
    pub main: Main,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Def {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub span_type: SizedType,
    /// Declared work signature; when absent it is the span signature with
    /// the time annotations stripped.
    pub work_type: Option<WorkType>,
    pub body: Process,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Main {
    pub params: Vec<(Ident, SizedType)>,
    pub span_bound: Option<IndexExpr>,
    pub work_bound: Option<IndexExpr>,
    pub body: Process,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Span,
    Work,
    Io,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "span" => Ok(Mode::Span),
            "work" => Ok(Mode::Work),
            "io" => Ok(Mode::Io),
            other => Err(format!("unknown mode `{other}`; expected span, work, or io")),
        }
    }
}

/// The verdict for one checked declaration.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub result: Result<String, TypeError>,
}

impl CheckItem {
    pub fn ok(&self) -> bool {
        self.result.is_ok()
    }
}

impl ProgramFile {
    pub fn index_env(&self) -> IndexEnv {
        let mut env = IndexEnv::new();
        for v in &self.vars {
            env.declare_var(v.clone());
        }
        for c in &self.assumes {
            env.assume(c.clone());
        }
        for (name, f) in &self.user_fns {
            env.user_fns.insert(name.clone(), f.clone());
        }
        env
    }

    /// Context of all definition signatures at their declared span types.
    pub fn span_ctx(&self) -> Result<TypeCtx, TypeError> {
        let mut ctx = TypeCtx::new();
        for d in &self.defs {
            if !matches!(d.span_type, SizedType::Serv { .. }) {
                return Err(TypeError::new(format!(
                    "definition `{}` must declare a serv type, found {}",
                    d.name, d.span_type
                )));
            }
            if ctx.insert(d.name.clone(), d.span_type.clone()).is_some() {
                return Err(TypeError::new(format!("duplicate definition `{}`", d.name)));
            }
        }
        Ok(ctx)
    }

    /// Context of all definition signatures at their work types.
    pub fn work_ctx(&self) -> Result<WorkCtx, TypeError> {
        let mut ctx = WorkCtx::new();
        for d in &self.defs {
            let t = match &d.work_type {
                Some(t) => t.clone(),
                None => strip_time(&d.span_type),
            };
            if !matches!(t, WorkType::Serv { .. }) {
                return Err(TypeError::new(format!(
                    "definition `{}` must declare a serv work type, found {t}",
                    d.name
                )));
            }
            ctx.insert(d.name.clone(), t);
        }
        Ok(ctx)
    }

    fn serv_process(d: &Def) -> Process {
        Process::Serv {
            chan: d.name.clone(),
            params: d.params.clone(),
            body: Box::new(d.body.clone()),
        }
    }
}

/// Check every definition and the main process under the requested type
/// system, returning one verdict per declaration.
pub fn check_program(prog: &ProgramFile, mode: Mode, cfg: EntailConfig) -> Vec<CheckItem> {
    match mode {
        Mode::Span => check_span_mode(prog, cfg),
        Mode::Work => check_work_mode(prog, cfg),
        Mode::Io => check_io_mode(prog),
    }
}

// A declared bound is verified either by synthesising a cost and comparing,
// or, when the comparison needs the size refinements of inner branches, by
// pushing the bound down through the process.
fn verify_span_bound(
    ck: &Checker,
    ctx: &TypeCtx,
    p: &Process,
    bound: &IndexExpr,
) -> Result<(), TypeError> {
    if let Ok(k) = synthesize_span(ck, ctx, p) {
        if ck.holds(&Constraint::le(k, bound.clone())) {
            return Ok(());
        }
    }
    check_span(ck, ctx, p, bound)
}

fn verify_work_bound(
    ck: &Checker,
    ctx: &WorkCtx,
    p: &Process,
    bound: &IndexExpr,
) -> Result<(), TypeError> {
    if let Ok(k) = synthesize_work(ck, ctx, p) {
        if ck.holds(&Constraint::le(k, bound.clone())) {
            return Ok(());
        }
    }
    check_work(ck, ctx, p, bound)
}

fn check_span_mode(prog: &ProgramFile, cfg: EntailConfig) -> Vec<CheckItem> {
    let ck = Checker::with_config(prog.index_env(), cfg);
    let ctx = match prog.span_ctx() {
        Ok(ctx) => ctx,
        Err(e) => {
            return vec![CheckItem {
                name: "signatures".into(),
                result: Err(e),
            }]
        }
    };
    let mut items = Vec::new();
    for d in &prog.defs {
        let serv = ProgramFile::serv_process(d);
        items.push(CheckItem {
            name: d.name.clone(),
            result: check_serv_body(&ck, &ctx, &serv)
                .map(|()| format!("span signature {} verified", d.span_type)),
        });
    }
    let mut mctx = ctx;
    for (name, ty) in &prog.main.params {
        mctx.insert(name.clone(), ty.clone());
    }
    let result = match &prog.main.span_bound {
        Some(bound) => verify_span_bound(&ck, &mctx, &prog.main.body, bound)
            .map(|()| format!("span bound {bound} verified")),
        None => synthesize_span(&ck, &mctx, &prog.main.body).map(|k| format!("span at most {k}")),
    };
    items.push(CheckItem {
        name: "main".into(),
        result,
    });
    items
}

fn check_work_mode(prog: &ProgramFile, cfg: EntailConfig) -> Vec<CheckItem> {
    let ck = Checker::with_config(prog.index_env(), cfg);
    let ctx = match prog.work_ctx() {
        Ok(ctx) => ctx,
        Err(e) => {
            return vec![CheckItem {
                name: "signatures".into(),
                result: Err(e),
            }]
        }
    };
    let mut items = Vec::new();
    for d in &prog.defs {
        let serv = ProgramFile::serv_process(d);
        let sig = ctx.get(&d.name).cloned().expect("signature just built");
        items.push(CheckItem {
            name: d.name.clone(),
            result: check_serv_body_work(&ck, &ctx, &serv)
                .map(|()| format!("work signature {sig} verified")),
        });
    }
    let mut mctx = ctx;
    for (name, ty) in &prog.main.params {
        mctx.insert(name.clone(), strip_time(ty));
    }
    let result = match &prog.main.work_bound {
        Some(bound) => verify_work_bound(&ck, &mctx, &prog.main.body, bound)
            .map(|()| format!("work bound {bound} verified")),
        None => synthesize_work(&ck, &mctx, &prog.main.body).map(|k| format!("work at most {k}")),
    };
    items.push(CheckItem {
        name: "main".into(),
        result,
    });
    items
}

fn check_io_mode(prog: &ProgramFile) -> Vec<CheckItem> {
    let mut ctx = SimpleCtx::new();
    for d in &prog.defs {
        ctx.insert(d.name.clone(), forget(&d.span_type));
    }
    let mut items = Vec::new();
    for d in &prog.defs {
        let serv = ProgramFile::serv_process(d);
        items.push(CheckItem {
            name: d.name.clone(),
            result: check_process_simple(&ctx, &serv)
                .map(|()| "well typed".to_string())
                .map_err(|e| TypeError::new(e.0)),
        });
    }
    let mut mctx = ctx;
    for (name, ty) in &prog.main.params {
        mctx.insert(name.clone(), forget(ty));
    }
    items.push(CheckItem {
        name: "main".into(),
        result: check_process_simple(&mctx, &prog.main.body)
            .map(|()| "well typed".to_string())
            .map_err(|e| TypeError::new(e.0)),
    });
    items
}

/// Assemble the process a program file denotes at run time: every definition
/// becomes a replicated server restricted over its name, channel-typed main
/// parameters become fresh restrictions, and base-typed main parameters are
/// replaced by the supplied values.
pub fn build_runtime(
    prog: &ProgramFile,
    binds: &BTreeMap<Ident, Expr>,
) -> Result<Process, String> {
    for name in binds.keys() {
        let known = prog.main.params.iter().any(|(p, t)| p == name && t.is_base());
        if !known {
            return Err(format!(
                "--bind {name}: main has no base-typed parameter of that name"
            ));
        }
    }
    let mut value_binds: BTreeMap<Ident, Expr> = BTreeMap::new();
    let mut channel_params: Vec<Ident> = Vec::new();
    for (name, ty) in &prog.main.params {
        if ty.is_base() {
            match binds.get(name) {
                Some(v) => {
                    value_binds.insert(name.clone(), v.clone());
                }
                None => {
                    return Err(format!(
                        "main parameter `{name}` : {ty} needs a value; pass --bind {name}=VALUE"
                    ))
                }
            }
        } else {
            channel_params.push(name.clone());
        }
    }
    let mut body = crate::syntax::substitute(&prog.main.body, &value_binds)
        .map_err(|e| format!("binding main parameters: {e:?}"))?;
    for name in channel_params.into_iter().rev() {
        body = Process::Nu {
            name,
            annot: None,
            body: Box::new(body),
        };
    }
    let mut whole = body;
    for d in prog.defs.iter().rev() {
        whole = Process::par(ProgramFile::serv_process(d), whole);
    }
    for d in prog.defs.iter().rev() {
        whole = Process::Nu {
            name: d.name.clone(),
            annot: None,
            body: Box::new(whole),
        };
    }
    Ok(whole)
}
