//! Process and expression syntax for the tick-instrumented pi-calculus,
//! together with the structural operations the semantics and type systems
//! rely on: free names, capture-avoiding substitution, tick erasure,
//! canonical forms and structural congruence.

use std::collections::{BTreeMap, BTreeSet};

use crate::index::IndexExpr;
use crate::spantypes::SizedType;

pub type Ident = String;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(Ident),
    Zero,
    Succ(Box<Expr>),
    Nil,
    Cons(Box<Expr>, Box<Expr>),
    True,
    False,
}

impl Expr {
    pub fn var(n: impl Into<String>) -> Self {
        Expr::Var(n.into())
    }

    /// Build the numeral `s(s(...s(0)))`.
    pub fn nat(n: u64) -> Self {
        let mut e = Expr::Zero;
        for _ in 0..n {
            e = Expr::Succ(Box::new(e));
        }
        e
    }

    /// Build a list literal out of `::` and `[]`.
    pub fn list(items: Vec<Expr>) -> Self {
        let mut e = Expr::Nil;
        for item in items.into_iter().rev() {
            e = Expr::Cons(Box::new(item), Box::new(e));
        }
        e
    }

    /// The value of a closed numeral, if this is one.
    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Expr::Zero => Some(0),
            Expr::Succ(e) => e.as_nat().map(|n| n + 1),
            _ => None,
        }
    }

    /// The elements of a closed list spine, if this is one.
    pub fn as_list(&self) -> Option<Vec<&Expr>> {
        match self {
            Expr::Nil => Some(vec![]),
            Expr::Cons(h, t) => {
                let mut v = vec![h.as_ref()];
                v.extend(t.as_list()?);
                Some(v)
            }
            _ => None,
        }
    }

    pub fn free_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Succ(e) => e.collect_free(out),
            Expr::Cons(h, t) => {
                h.collect_free(out);
                t.collect_free(out);
            }
            Expr::Zero | Expr::Nil | Expr::True | Expr::False => {}
        }
    }

    pub fn subst(&self, map: &BTreeMap<Ident, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Succ(e) => Expr::Succ(Box::new(e.subst(map))),
            Expr::Cons(h, t) => Expr::Cons(Box::new(h.subst(map)), Box::new(t.subst(map))),
            _ => self.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    /// The inert process `0`.
    Nil,
    Par(Box<Process>, Box<Process>),
    /// Replicated input `!a(v...).P` — a server definition.
    Serv {
        chan: Ident,
        params: Vec<Ident>,
        body: Box<Process>,
    },
    /// Single input `a(v...).P`.
    Input {
        chan: Ident,
        params: Vec<Ident>,
        body: Box<Process>,
    },
    /// Output `a<e...>`, optionally carrying an explicit index instantiation
    /// `@[J...]` for server calls. The instantiation is typing metadata and
    /// plays no role in reduction.
    Output {
        chan: Ident,
        args: Vec<Expr>,
        inst: Option<Vec<IndexExpr>>,
    },
    /// Name restriction `new a in P`, optionally annotated with a sized type
    /// (required by the span checker, forgotten by the others).
    Nu {
        name: Ident,
        annot: Option<SizedType>,
        body: Box<Process>,
    },
    MatchNat {
        scrutinee: Expr,
        zero: Box<Process>,
        succ_bind: Ident,
        succ: Box<Process>,
    },
    MatchList {
        scrutinee: Expr,
        nil: Box<Process>,
        head_bind: Ident,
        tail_bind: Ident,
        cons: Box<Process>,
    },
    If {
        cond: Expr,
        then_branch: Box<Process>,
        else_branch: Box<Process>,
    },
    Tick(Box<Process>),
}

impl Process {
    pub fn par(a: Process, b: Process) -> Process {
        Process::Par(Box::new(a), Box::new(b))
    }

    pub fn tick(p: Process) -> Process {
        Process::Tick(Box::new(p))
    }

    pub fn output(chan: impl Into<String>, args: Vec<Expr>) -> Process {
        Process::Output {
            chan: chan.into(),
            args,
            inst: None,
        }
    }

    pub fn input(chan: impl Into<String>, params: Vec<&str>, body: Process) -> Process {
        Process::Input {
            chan: chan.into(),
            params: params.into_iter().map(String::from).collect(),
            body: Box::new(body),
        }
    }

    pub fn nu(name: impl Into<String>, body: Process) -> Process {
        Process::Nu {
            name: name.into(),
            annot: None,
            body: Box::new(body),
        }
    }

    /// A guarded process is one whose head is a prefix, a match, a
    /// conditional or a tick: the shapes that appear as the parallel
    /// components of a canonical form.
    pub fn is_guarded(&self) -> bool {
        matches!(
            self,
            Process::Serv { .. }
                | Process::Input { .. }
                | Process::Output { .. }
                | Process::MatchNat { .. }
                | Process::MatchList { .. }
                | Process::If { .. }
                | Process::Tick(_)
        )
    }

    pub fn free_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Ident>, bound: &mut Vec<Ident>) {
        let mut add = |n: &Ident, bound: &Vec<Ident>| {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            Process::Nil => {}
            Process::Par(a, b) => {
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
            Process::Serv { chan, params, body } | Process::Input { chan, params, body } => {
                add(chan, bound);
                let n = bound.len();
                bound.extend(params.iter().cloned());
                body.collect_free(out, bound);
                bound.truncate(n);
            }
            Process::Output { chan, args, .. } => {
                add(chan, bound);
                for e in args {
                    for v in e.free_names() {
                        add(&v, bound);
                    }
                }
            }
            Process::Nu { name, body, .. } => {
                bound.push(name.clone());
                body.collect_free(out, bound);
                bound.pop();
            }
            Process::MatchNat {
                scrutinee,
                zero,
                succ_bind,
                succ,
            } => {
                for v in scrutinee.free_names() {
                    add(&v, bound);
                }
                zero.collect_free(out, bound);
                bound.push(succ_bind.clone());
                succ.collect_free(out, bound);
                bound.pop();
            }
            Process::MatchList {
                scrutinee,
                nil,
                head_bind,
                tail_bind,
                cons,
            } => {
                for v in scrutinee.free_names() {
                    add(&v, bound);
                }
                nil.collect_free(out, bound);
                bound.push(head_bind.clone());
                bound.push(tail_bind.clone());
                cons.collect_free(out, bound);
                bound.pop();
                bound.pop();
            }
            Process::If {
                cond,
                then_branch,
                else_branch,
            } => {
                for v in cond.free_names() {
                    add(&v, bound);
                }
                then_branch.collect_free(out, bound);
                else_branch.collect_free(out, bound);
            }
            Process::Tick(p) => p.collect_free(out, bound),
        }
    }

    /// Every identifier occurring anywhere in the term, free or bound.
    pub fn all_names(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Process::Nil => {}
            Process::Par(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
            Process::Serv { chan, params, body } | Process::Input { chan, params, body } => {
                out.insert(chan.clone());
                out.extend(params.iter().cloned());
                body.collect_all(out);
            }
            Process::Output { chan, args, .. } => {
                out.insert(chan.clone());
                for e in args {
                    out.extend(e.free_names());
                }
            }
            Process::Nu { name, body, .. } => {
                out.insert(name.clone());
                body.collect_all(out);
            }
            Process::MatchNat {
                scrutinee,
                zero,
                succ_bind,
                succ,
            } => {
                out.extend(scrutinee.free_names());
                out.insert(succ_bind.clone());
                zero.collect_all(out);
                succ.collect_all(out);
            }
            Process::MatchList {
                scrutinee,
                nil,
                head_bind,
                tail_bind,
                cons,
            } => {
                out.extend(scrutinee.free_names());
                out.insert(head_bind.clone());
                out.insert(tail_bind.clone());
                nil.collect_all(out);
                cons.collect_all(out);
            }
            Process::If {
                cond,
                then_branch,
                else_branch,
            } => {
                out.extend(cond.free_names());
                then_branch.collect_all(out);
                else_branch.collect_all(out);
            }
            Process::Tick(p) => p.collect_all(out),
        }
    }

    /// Remove every tick, keeping the underlying communication structure.
    pub fn erase_ticks(&self) -> Process {
        match self {
            Process::Nil => Process::Nil,
            Process::Par(a, b) => Process::par(a.erase_ticks(), b.erase_ticks()),
            Process::Serv { chan, params, body } => Process::Serv {
                chan: chan.clone(),
                params: params.clone(),
                body: Box::new(body.erase_ticks()),
            },
            Process::Input { chan, params, body } => Process::Input {
                chan: chan.clone(),
                params: params.clone(),
                body: Box::new(body.erase_ticks()),
            },
            Process::Output { .. } => self.clone(),
            Process::Nu { name, annot, body } => Process::Nu {
                name: name.clone(),
                annot: annot.clone(),
                body: Box::new(body.erase_ticks()),
            },
            Process::MatchNat {
                scrutinee,
                zero,
                succ_bind,
                succ,
            } => Process::MatchNat {
                scrutinee: scrutinee.clone(),
                zero: Box::new(zero.erase_ticks()),
                succ_bind: succ_bind.clone(),
                succ: Box::new(succ.erase_ticks()),
            },
            Process::MatchList {
                scrutinee,
                nil,
                head_bind,
                tail_bind,
                cons,
            } => Process::MatchList {
                scrutinee: scrutinee.clone(),
                nil: Box::new(nil.erase_ticks()),
                head_bind: head_bind.clone(),
                tail_bind: tail_bind.clone(),
                cons: Box::new(cons.erase_ticks()),
            },
            Process::If {
                cond,
                then_branch,
                else_branch,
            } => Process::If {
                cond: cond.clone(),
                then_branch: Box::new(then_branch.erase_ticks()),
                else_branch: Box::new(else_branch.erase_ticks()),
            },
            Process::Tick(p) => p.erase_ticks(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SubstError {
    #[error("cannot substitute non-name expression for `{0}` used in channel position")]
    NonChannelSubstitution(Ident),
}

/// Pick a name based on `base` that is not in `used`, and record it.
pub fn fresh_name(base: &str, used: &mut BTreeSet<Ident>) -> Ident {
    let stem = match base.find('%') {
        Some(i) => &base[..i],
        None => base,
    };
    if !used.contains(stem) {
        used.insert(stem.to_string());
        return stem.to_string();
    }
    let mut k = 1usize;
    loop {
        let cand = format!("{stem}%{k}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        k += 1;
    }
}

/// Simultaneous capture-avoiding substitution of expressions for names.
/// Names in channel position may only be replaced by names; anything else is
/// a kind error, mirroring the side condition on the reduction rules.
pub fn substitute(p: &Process, map: &BTreeMap<Ident, Expr>) -> Result<Process, SubstError> {
    if map.is_empty() {
        return Ok(p.clone());
    }
    let chan_subst = |c: &Ident| -> Result<Ident, SubstError> {
        match map.get(c) {
            None => Ok(c.clone()),
            Some(Expr::Var(v)) => Ok(v.clone()),
            Some(_) => Err(SubstError::NonChannelSubstitution(c.clone())),
        }
    };
    match p {
        Process::Nil => Ok(Process::Nil),
        Process::Par(a, b) => Ok(Process::par(substitute(a, map)?, substitute(b, map)?)),
        Process::Serv { chan, params, body } => {
            let (params, body) = subst_under(params, body, map)?;
            Ok(Process::Serv {
                chan: chan_subst(chan)?,
                params,
                body: Box::new(body),
            })
        }
        Process::Input { chan, params, body } => {
            let (params, body) = subst_under(params, body, map)?;
            Ok(Process::Input {
                chan: chan_subst(chan)?,
                params,
                body: Box::new(body),
            })
        }
        Process::Output { chan, args, inst } => Ok(Process::Output {
            chan: chan_subst(chan)?,
            args: args.iter().map(|e| e.subst(map)).collect(),
            inst: inst.clone(),
        }),
        Process::Nu { name, annot, body } => {
            let (mut names, body) = subst_under(std::slice::from_ref(name), body, map)?;
            Ok(Process::Nu {
                name: names.pop().unwrap(),
                annot: annot.clone(),
                body: Box::new(body),
            })
        }
        Process::MatchNat {
            scrutinee,
            zero,
            succ_bind,
            succ,
        } => {
            let (mut binds, succ) = subst_under(std::slice::from_ref(succ_bind), succ, map)?;
            Ok(Process::MatchNat {
                scrutinee: scrutinee.subst(map),
                zero: Box::new(substitute(zero, map)?),
                succ_bind: binds.pop().unwrap(),
                succ: Box::new(succ),
            })
        }
        Process::MatchList {
            scrutinee,
            nil,
            head_bind,
            tail_bind,
            cons,
        } => {
            let binders = [head_bind.clone(), tail_bind.clone()];
            let (mut binds, cons) = subst_under(&binders, cons, map)?;
            let tail = binds.pop().unwrap();
            let head = binds.pop().unwrap();
            Ok(Process::MatchList {
                scrutinee: scrutinee.subst(map),
                nil: Box::new(substitute(nil, map)?),
                head_bind: head,
                tail_bind: tail,
                cons: Box::new(cons),
            })
        }
        Process::If {
            cond,
            then_branch,
            else_branch,
        } => Ok(Process::If {
            cond: cond.subst(map),
            then_branch: Box::new(substitute(then_branch, map)?),
            else_branch: Box::new(substitute(else_branch, map)?),
        }),
        Process::Tick(q) => Ok(Process::tick(substitute(q, map)?)),
    }
}

fn subst_under(
    binders: &[Ident],
    body: &Process,
    map: &BTreeMap<Ident, Expr>,
) -> Result<(Vec<Ident>, Process), SubstError> {
    let inner: BTreeMap<Ident, Expr> = map
        .iter()
        .filter(|(k, _)| !binders.contains(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return Ok((binders.to_vec(), body.clone()));
    }
    let mut replaced_free: BTreeSet<Ident> = BTreeSet::new();
    for e in inner.values() {
        replaced_free.extend(e.free_names());
    }
    let mut used: BTreeSet<Ident> = body.all_names();
    used.extend(replaced_free.iter().cloned());
    used.extend(binders.iter().cloned());
    let mut renames: BTreeMap<Ident, Expr> = BTreeMap::new();
    let mut out_binders = Vec::with_capacity(binders.len());
    for b in binders {
        if replaced_free.contains(b) {
            let nb = fresh_name(b, &mut used);
            renames.insert(b.clone(), Expr::Var(nb.clone()));
            out_binders.push(nb);
        } else {
            out_binders.push(b.clone());
        }
    }
    let body = if renames.is_empty() {
        body.clone()
    } else {
        substitute(body, &renames)?
    };
    Ok((out_binders, substitute(&body, &inner)?))
}

/// A process decomposed as `new a1 ... an in (P1 | ... | Pk)` with every
/// `Pi` guarded. `tops` is kept sorted by the derived syntactic order, making
/// the representation canonical up to the identity of restricted names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub restricted: Vec<Ident>,
    pub tops: Vec<Process>,
}

impl CanonicalForm {
    pub fn into_process(self) -> Process {
        let mut body = match self.tops.len() {
            0 => Process::Nil,
            _ => {
                let mut it = self.tops.into_iter();
                let first = it.next().unwrap();
                it.fold(first, Process::par)
            }
        };
        for name in self.restricted.into_iter().rev() {
            body = Process::Nu {
                name,
                annot: None,
                body: Box::new(body),
            };
        }
        body
    }
}

/// Compute the canonical form: float every unguarded restriction to the top
/// (renaming when hoisting would capture) and flatten the parallel structure
/// into a sorted multiset of guarded processes.
pub fn canonicalize(p: &Process) -> CanonicalForm {
    let mut taken: BTreeSet<Ident> = p.free_names();
    let mut restricted = Vec::new();
    let mut tops = Vec::new();
    collect_canonical(p.clone(), &mut taken, &mut restricted, &mut tops);
    tops.sort();
    CanonicalForm { restricted, tops }
}

fn collect_canonical(
    p: Process,
    taken: &mut BTreeSet<Ident>,
    restricted: &mut Vec<Ident>,
    tops: &mut Vec<Process>,
) {
    match p {
        Process::Nil => {}
        Process::Par(a, b) => {
            collect_canonical(*a, taken, restricted, tops);
            collect_canonical(*b, taken, restricted, tops);
        }
        Process::Nu { name, body, .. } => {
            if taken.contains(&name) {
                let fresh = fresh_name(&name, taken);
                let renames: BTreeMap<Ident, Expr> =
                    [(name, Expr::Var(fresh.clone()))].into_iter().collect();
                let body = substitute(&body, &renames)
                    .expect("renaming a name by a name cannot fail");
                restricted.push(fresh);
                collect_canonical(body, taken, restricted, tops);
            } else {
                taken.insert(name.clone());
                restricted.push(name);
                collect_canonical(*body, taken, restricted, tops);
            }
        }
        guarded => tops.push(guarded),
    }
}

/// Canonical form, reassembled into a process.
pub fn canonical_process(p: &Process) -> Process {
    canonicalize(p).into_process()
}

/// Structural congruence: equal restricted-name multisets and matching
/// multisets of guarded tops, compared recursively under the guards.
pub fn congruent(p: &Process, q: &Process) -> bool {
    let a = canonicalize(p);
    let b = canonicalize(q);
    let mut ra = a.restricted.clone();
    let mut rb = b.restricted.clone();
    ra.sort();
    rb.sort();
    if ra != rb || a.tops.len() != b.tops.len() {
        return false;
    }
    let mut used = vec![false; b.tops.len()];
    match_tops(&a.tops, &b.tops, &mut used, 0)
}

fn match_tops(a: &[Process], b: &[Process], used: &mut Vec<bool>, i: usize) -> bool {
    if i == a.len() {
        return true;
    }
    for j in 0..b.len() {
        if !used[j] && guarded_congruent(&a[i], &b[j]) {
            used[j] = true;
            if match_tops(a, b, used, i + 1) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

fn guarded_congruent(p: &Process, q: &Process) -> bool {
    match (p, q) {
        (Process::Tick(a), Process::Tick(b)) => congruent(a, b),
        (
            Process::Input {
                chan: c1,
                params: v1,
                body: b1,
            },
            Process::Input {
                chan: c2,
                params: v2,
                body: b2,
            },
        )
        | (
            Process::Serv {
                chan: c1,
                params: v1,
                body: b1,
            },
            Process::Serv {
                chan: c2,
                params: v2,
                body: b2,
            },
        ) => c1 == c2 && v1 == v2 && congruent(b1, b2),
        (Process::Output { .. }, Process::Output { .. }) => p == q,
        (
            Process::MatchNat {
                scrutinee: e1,
                zero: z1,
                succ_bind: s1,
                succ: p1,
            },
            Process::MatchNat {
                scrutinee: e2,
                zero: z2,
                succ_bind: s2,
                succ: p2,
            },
        ) => e1 == e2 && s1 == s2 && congruent(z1, z2) && congruent(p1, p2),
        (
            Process::MatchList {
                scrutinee: e1,
                nil: n1,
                head_bind: h1,
                tail_bind: t1,
                cons: c1,
            },
            Process::MatchList {
                scrutinee: e2,
                nil: n2,
                head_bind: h2,
                tail_bind: t2,
                cons: c2,
            },
        ) => e1 == e2 && h1 == h2 && t1 == t2 && congruent(n1, n2) && congruent(c1, c2),
        (
            Process::If {
                cond: e1,
                then_branch: t1,
                else_branch: f1,
            },
            Process::If {
                cond: e2,
                then_branch: t2,
                else_branch: f2,
            },
        ) => e1 == e2 && congruent(t1, t2) && congruent(f1, f2),
        _ => false,
    }
}

/// Rename every binder to a position-derived name. Two alpha-equivalent
/// processes map to the same term, which makes this (composed with
/// canonicalisation) suitable as a memoisation key.
pub fn alpha_normalize(p: &Process) -> Process {
    fn go(p: &Process, env: &BTreeMap<Ident, Ident>, counter: &mut usize) -> Process {
        let rn = |n: &Ident, env: &BTreeMap<Ident, Ident>| -> Ident {
            env.get(n).cloned().unwrap_or_else(|| n.clone())
        };
        let bind = |names: &[&Ident], env: &BTreeMap<Ident, Ident>, counter: &mut usize| {
            let mut env = env.clone();
            let mut out = Vec::new();
            for n in names {
                let fresh = format!("${}", *counter);
                *counter += 1;
                env.insert((*n).clone(), fresh.clone());
                out.push(fresh);
            }
            (out, env)
        };
        match p {
            Process::Nil => Process::Nil,
            Process::Par(a, b) => Process::par(go(a, env, counter), go(b, env, counter)),
            Process::Serv { chan, params, body } => {
                let (ps, env2) = bind(&params.iter().collect::<Vec<_>>(), env, counter);
                Process::Serv {
                    chan: rn(chan, env),
                    params: ps,
                    body: Box::new(go(body, &env2, counter)),
                }
            }
            Process::Input { chan, params, body } => {
                let (ps, env2) = bind(&params.iter().collect::<Vec<_>>(), env, counter);
                Process::Input {
                    chan: rn(chan, env),
                    params: ps,
                    body: Box::new(go(body, &env2, counter)),
                }
            }
            Process::Output { chan, args, inst } => {
                let map: BTreeMap<Ident, Expr> = env
                    .iter()
                    .map(|(k, v)| (k.clone(), Expr::Var(v.clone())))
                    .collect();
                Process::Output {
                    chan: rn(chan, env),
                    args: args.iter().map(|e| e.subst(&map)).collect(),
                    inst: inst.clone(),
                }
            }
            Process::Nu { name, annot, body } => {
                let (mut ns, env2) = bind(&[name], env, counter);
                Process::Nu {
                    name: ns.pop().unwrap(),
                    annot: annot.clone(),
                    body: Box::new(go(body, &env2, counter)),
                }
            }
            Process::MatchNat {
                scrutinee,
                zero,
                succ_bind,
                succ,
            } => {
                let map: BTreeMap<Ident, Expr> = env
                    .iter()
                    .map(|(k, v)| (k.clone(), Expr::Var(v.clone())))
                    .collect();
                let z = go(zero, env, counter);
                let (mut ns, env2) = bind(&[succ_bind], env, counter);
                Process::MatchNat {
                    scrutinee: scrutinee.subst(&map),
                    zero: Box::new(z),
                    succ_bind: ns.pop().unwrap(),
                    succ: Box::new(go(succ, &env2, counter)),
                }
            }
            Process::MatchList {
                scrutinee,
                nil,
                head_bind,
                tail_bind,
                cons,
            } => {
                let map: BTreeMap<Ident, Expr> = env
                    .iter()
                    .map(|(k, v)| (k.clone(), Expr::Var(v.clone())))
                    .collect();
                let n = go(nil, env, counter);
                let (mut ns, env2) = bind(&[head_bind, tail_bind], env, counter);
                let tail = ns.pop().unwrap();
                let head = ns.pop().unwrap();
                Process::MatchList {
                    scrutinee: scrutinee.subst(&map),
                    nil: Box::new(n),
                    head_bind: head,
                    tail_bind: tail,
                    cons: Box::new(go(cons, &env2, counter)),
                }
            }
            Process::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let map: BTreeMap<Ident, Expr> = env
                    .iter()
                    .map(|(k, v)| (k.clone(), Expr::Var(v.clone())))
                    .collect();
                Process::If {
                    cond: cond.subst(&map),
                    then_branch: Box::new(go(then_branch, env, counter)),
                    else_branch: Box::new(go(else_branch, env, counter)),
                }
            }
            Process::Tick(q) => Process::tick(go(q, env, counter)),
        }
    }
    go(p, &BTreeMap::new(), &mut 0)
}
