//! The index language: arithmetic expressions over natural-valued variables,
//! constraints between them, and a layered decision procedure for constraint
//! entailment under a set of hypotheses.

use std::collections::BTreeMap;
use std::fmt;

pub type IndexVar = String;

/// Built-in and user-declared function symbols. All built-ins are total over
/// the naturals; `Monus` is truncated subtraction (`n - m = 0` when `m >= n`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FnSym {
    Add,
    Mul,
    Monus,
    Max,
    Pow2,
    User(String),
}

impl FnSym {
    pub fn name(&self) -> &str {
        match self {
            FnSym::Add => "+",
            FnSym::Mul => "*",
            FnSym::Monus => "-",
            FnSym::Max => "max",
            FnSym::Pow2 => "pow2",
            FnSym::User(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexExpr {
    Var(IndexVar),
    Lit(u64),
    Apply(FnSym, Vec<IndexExpr>),
}

impl IndexExpr {
    pub fn var(n: impl Into<String>) -> Self {
        IndexExpr::Var(n.into())
    }
    pub fn lit(n: u64) -> Self {
        IndexExpr::Lit(n)
    }
    pub fn add(a: IndexExpr, b: IndexExpr) -> Self {
        IndexExpr::Apply(FnSym::Add, vec![a, b])
    }
    pub fn mul(a: IndexExpr, b: IndexExpr) -> Self {
        IndexExpr::Apply(FnSym::Mul, vec![a, b])
    }
    pub fn monus(a: IndexExpr, b: IndexExpr) -> Self {
        IndexExpr::Apply(FnSym::Monus, vec![a, b])
    }
    pub fn max(a: IndexExpr, b: IndexExpr) -> Self {
        IndexExpr::Apply(FnSym::Max, vec![a, b])
    }
    pub fn pow2(a: IndexExpr) -> Self {
        IndexExpr::Apply(FnSym::Pow2, vec![a])
    }

    pub fn free_vars(&self) -> Vec<IndexVar> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<IndexVar>) {
        match self {
            IndexExpr::Var(v) => out.push(v.clone()),
            IndexExpr::Lit(_) => {}
            IndexExpr::Apply(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Simultaneous capture-free substitution of index variables.
    pub fn subst(&self, map: &BTreeMap<IndexVar, IndexExpr>) -> IndexExpr {
        match self {
            IndexExpr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            IndexExpr::Lit(_) => self.clone(),
            IndexExpr::Apply(f, args) => IndexExpr::Apply(
                f.clone(),
                args.iter().map(|a| a.subst(map)).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        };
        write!(f, "{s}")
    }
}

/// A constraint `lhs rel rhs`. Surface `>=` and `>` are normalised to `<=`
/// and `<` with the sides swapped at construction time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub lhs: IndexExpr,
    pub rel: Rel,
    pub rhs: IndexExpr,
}

impl Constraint {
    pub fn new(lhs: IndexExpr, rel: Rel, rhs: IndexExpr) -> Self {
        Constraint { lhs, rel, rhs }
    }
    pub fn le(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(lhs, Rel::Le, rhs)
    }
    pub fn lt(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(lhs, Rel::Lt, rhs)
    }
    pub fn eq(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(lhs, Rel::Eq, rhs)
    }
    pub fn ne(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(lhs, Rel::Ne, rhs)
    }
    /// `lhs >= rhs`, stored as `rhs <= lhs`.
    pub fn ge(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(rhs, Rel::Le, lhs)
    }
    /// `lhs > rhs`, stored as `rhs < lhs`.
    pub fn gt(lhs: IndexExpr, rhs: IndexExpr) -> Self {
        Self::new(rhs, Rel::Lt, lhs)
    }

    pub fn subst(&self, map: &BTreeMap<IndexVar, IndexExpr>) -> Constraint {
        Constraint {
            lhs: self.lhs.subst(map),
            rel: self.rel,
            rhs: self.rhs.subst(map),
        }
    }

    pub fn free_vars(&self) -> Vec<IndexVar> {
        let mut v = self.lhs.free_vars();
        v.extend(self.rhs.free_vars());
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
    }
}

pub type Valuation = BTreeMap<IndexVar, u64>;

/// Interpretation table for a user-declared function symbol: explicit entries
/// plus a default value for argument tuples not listed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserFn {
    pub arity: usize,
    pub entries: Vec<(Vec<u64>, u64)>,
    pub default: u64,
}

impl UserFn {
    pub fn eval(&self, args: &[u64]) -> u64 {
        for (pat, v) in &self.entries {
            if pat.as_slice() == args {
                return *v;
            }
        }
        self.default
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexEnv {
    /// Declared index variables, in declaration order.
    pub vars: Vec<IndexVar>,
    /// Hypotheses assumed to hold for every admissible valuation.
    pub constraints: Vec<Constraint>,
    /// User-declared function symbols with table interpretations.
    pub user_fns: BTreeMap<String, UserFn>,
}

impl IndexEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars<I: IntoIterator<Item = S>, S: Into<String>>(vars: I) -> Self {
        IndexEnv {
            vars: vars.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn declare_var(&mut self, v: impl Into<String>) {
        let v = v.into();
        if !self.vars.contains(&v) {
            self.vars.push(v);
        }
    }

    pub fn assume(&mut self, c: Constraint) {
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
    }

    /// A copy of this environment extended with additional variables and
    /// hypotheses (used when descending under server binders and match arms).
    pub fn extended(&self, vars: &[IndexVar], constraints: &[Constraint]) -> IndexEnv {
        let mut env = self.clone();
        for v in vars {
            env.declare_var(v.clone());
        }
        for c in constraints {
            env.assume(c.clone());
        }
        env
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound index variable `{0}`")]
    UnboundVar(IndexVar),
    #[error("unknown function symbol `{0}`")]
    UnknownFn(String),
    #[error("function `{0}` applied to {1} arguments, expects {2}")]
    Arity(String, usize, usize),
}

/// Evaluate an index expression under a valuation. All arithmetic saturates
/// at `u64::MAX` so evaluation is total.
pub fn eval_index(e: &IndexExpr, rho: &Valuation, env: &IndexEnv) -> Result<u64, EvalError> {
    match e {
        IndexExpr::Var(v) => rho
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::UnboundVar(v.clone())),
        IndexExpr::Lit(n) => Ok(*n),
        IndexExpr::Apply(f, args) => {
            let vals: Vec<u64> = args
                .iter()
                .map(|a| eval_index(a, rho, env))
                .collect::<Result<_, _>>()?;
            let need = |n: usize| {
                if vals.len() == n {
                    Ok(())
                } else {
                    Err(EvalError::Arity(f.name().to_string(), vals.len(), n))
                }
            };
            match f {
                FnSym::Add => {
                    need(2)?;
                    Ok(vals[0].saturating_add(vals[1]))
                }
                FnSym::Mul => {
                    need(2)?;
                    Ok(vals[0].saturating_mul(vals[1]))
                }
                FnSym::Monus => {
                    need(2)?;
                    Ok(vals[0].saturating_sub(vals[1]))
                }
                FnSym::Max => {
                    need(2)?;
                    Ok(vals[0].max(vals[1]))
                }
                FnSym::Pow2 => {
                    need(1)?;
                    Ok(if vals[0] >= 63 {
                        u64::MAX
                    } else {
                        1u64 << vals[0]
                    })
                }
                FnSym::User(name) => {
                    let uf = env
                        .user_fns
                        .get(name)
                        .ok_or_else(|| EvalError::UnknownFn(name.clone()))?;
                    need(uf.arity)?;
                    Ok(uf.eval(&vals))
                }
            }
        }
    }
}

/// Evaluate a constraint under a valuation.
pub fn eval_constraint(c: &Constraint, rho: &Valuation, env: &IndexEnv) -> Result<bool, EvalError> {
    let l = eval_index(&c.lhs, rho, env)?;
    let r = eval_index(&c.rhs, rho, env)?;
    Ok(match c.rel {
        Rel::Le => l <= r,
        Rel::Lt => l < r,
        Rel::Eq => l == r,
        Rel::Ne => l != r,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    /// The constraint holds for every admissible valuation.
    Valid,
    /// A concrete admissible valuation falsifying the constraint.
    Refuted(Valuation),
    /// The decision procedure could not settle the question.
    Unknown,
}

impl Entailment {
    pub fn is_valid(&self) -> bool {
        matches!(self, Entailment::Valid)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EntailConfig {
    /// Per-variable bound for the refutation search.
    pub b_refute: u64,
    /// Depth budget for case splits on monus/max subterms.
    pub split_depth: usize,
    /// Cap on total valuations enumerated during refutation.
    pub refute_cap: u64,
    /// Work budget for the symbolic proof search, charged per visited goal
    /// proportionally to its size. An exhausted budget degrades the verdict
    /// to `Unknown`.
    pub prove_cap: u64,
}

impl Default for EntailConfig {
    fn default() -> Self {
        EntailConfig {
            b_refute: 16,
            split_depth: 12,
            refute_cap: 2_000_000,
            prove_cap: 2_000_000,
        }
    }
}

/// Decide `env |= c`: first attempt a symbolic validity proof, then a bounded
/// counterexample search, and report `Unknown` if both are inconclusive.
pub fn entails(env: &IndexEnv, c: &Constraint, cfg: &EntailConfig) -> Entailment {
    if prove(env, c, cfg) {
        return Entailment::Valid;
    }
    if let Some(rho) = refute(env, c, cfg) {
        return Entailment::Refuted(rho);
    }
    Entailment::Unknown
}

pub fn entails_default(env: &IndexEnv, c: &Constraint) -> Entailment {
    entails(env, c, &EntailConfig::default())
}

// ---------------------------------------------------------------------------
// Refutation: grid search over admissible valuations.
// ---------------------------------------------------------------------------

fn refute(env: &IndexEnv, c: &Constraint, cfg: &EntailConfig) -> Option<Valuation> {
    let mut vars: Vec<IndexVar> = env.vars.clone();
    for v in c.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    for v in env.constraints.iter().flat_map(|h| h.free_vars()) {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let per = cfg.b_refute + 1;
    let mut total: u64 = 1;
    for _ in &vars {
        total = total.saturating_mul(per);
        if total > cfg.refute_cap {
            return None;
        }
    }
    let mut rho = Valuation::new();
    let mut counters = vec![0u64; vars.len()];
    loop {
        for (v, n) in vars.iter().zip(&counters) {
            rho.insert(v.clone(), *n);
        }
        let admissible = env
            .constraints
            .iter()
            .all(|h| eval_constraint(h, &rho, env).unwrap_or(false));
        if admissible && !eval_constraint(c, &rho, env).unwrap_or(true) {
            return Some(rho);
        }
        // increment the mixed-radix counter
        let mut i = 0;
        loop {
            if i == counters.len() {
                return None;
            }
            counters[i] += 1;
            if counters[i] < per {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Symbolic proof: polynomial normal forms over opaque atoms, case splitting
// on monus/max, and monomial-domination reasoning with hypothesis bounds.
// ---------------------------------------------------------------------------

/// An irreducible subterm treated as an opaque nonnegative quantity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Var(IndexVar),
    Pow2(Poly),
    Max(Poly, Poly),
    Monus(Poly, Poly),
    App(String, Vec<Poly>),
}

/// A product of atoms (sorted multiset).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Mono(Vec<Atom>);

impl Mono {
    fn one() -> Self {
        Mono(vec![])
    }
    fn atom(a: Atom) -> Self {
        Mono(vec![a])
    }
    fn mul(&self, other: &Mono) -> Mono {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        Mono(v)
    }
}

/// A sum of monomials with integer coefficients. Canonical polynomials of
/// index expressions have nonnegative coefficients; differences may not.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Poly(BTreeMap<Mono, i128>);

impl Poly {
    fn zero() -> Self {
        Poly::default()
    }
    fn constant(n: i128) -> Self {
        let mut p = Poly::zero();
        if n != 0 {
            p.0.insert(Mono::one(), n);
        }
        p
    }
    fn atom(a: Atom) -> Self {
        let mut p = Poly::zero();
        p.0.insert(Mono::atom(a), 1);
        p
    }
    fn add_term(&mut self, m: Mono, c: i128) {
        if c == 0 {
            return;
        }
        let e = self.0.entry(m.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&m);
        }
    }
    fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.0 {
            p.add_term(m.clone(), *c);
        }
        p
    }
    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
    fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }
    fn scale(&self, k: i128) -> Poly {
        if k == 0 {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }
    fn constant_term(&self) -> i128 {
        self.0.get(&Mono::one()).copied().unwrap_or(0)
    }
    fn is_constant(&self) -> Option<i128> {
        match self.0.len() {
            0 => Some(0),
            1 => self.0.get(&Mono::one()).copied(),
            _ => None,
        }
    }
    fn all_nonneg(&self) -> bool {
        self.0.values().all(|c| *c >= 0)
    }
    /// If the polynomial is a single variable atom with coefficient 1 plus a
    /// constant, return `(var, constant)`.
    fn as_var_plus_const(&self) -> Option<(IndexVar, i128)> {
        let mut var = None;
        let mut k = 0i128;
        for (m, c) in &self.0 {
            if m.0.is_empty() {
                k = *c;
            } else if m.0.len() == 1 && *c == 1 {
                if let Atom::Var(v) = &m.0[0] {
                    if var.is_some() {
                        return None;
                    }
                    var = Some(v.clone());
                } else {
                    return None;
                }
            } else {
                return None;
            }
        }
        var.map(|v| (v, k))
    }
    /// If the polynomial is exactly one atom with coefficient 1, return it.
    fn as_single_atom(&self) -> Option<Atom> {
        if self.0.len() != 1 {
            return None;
        }
        let (m, c) = self.0.iter().next().unwrap();
        if *c == 1 && m.0.len() == 1 {
            Some(m.0[0].clone())
        } else {
            None
        }
    }
    fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for m in self.0.keys() {
            for a in &m.0 {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        }
        out
    }
}

/// Normalise an index expression to a polynomial. Applies the rewrites
/// `pow2(P + c) = 2^c * pow2(P)`, constant folding, cancellation of the
/// common part of monus arguments, and resolution of max/monus when the
/// comparison is decided coefficientwise.
fn normalize(e: &IndexExpr) -> Poly {
    match e {
        IndexExpr::Var(v) => Poly::atom(Atom::Var(v.clone())),
        IndexExpr::Lit(n) => Poly::constant(*n as i128),
        IndexExpr::Apply(f, args) => {
            let ps: Vec<Poly> = args.iter().map(normalize).collect();
            apply_poly(f, ps)
        }
    }
}

fn apply_poly(f: &FnSym, ps: Vec<Poly>) -> Poly {
    match f {
        FnSym::Add => ps[0].add(&ps[1]),
        FnSym::Mul => ps[0].mul(&ps[1]),
        FnSym::Monus => monus_poly(&ps[0], &ps[1]),
        FnSym::Max => max_poly(&ps[0], &ps[1]),
        FnSym::Pow2 => pow2_poly(&ps[0]),
        FnSym::User(n) => Poly::atom(Atom::App(n.clone(), ps)),
    }
}

fn monus_poly(a: &Poly, b: &Poly) -> Poly {
    // Cancel the common part first: (P+R) - (Q+R) = P - Q.
    let diff = a.sub(b);
    if diff.all_nonneg() {
        return diff;
    }
    if diff.0.values().all(|c| *c <= 0) {
        return Poly::zero();
    }
    let mut pos = Poly::zero();
    let mut neg = Poly::zero();
    for (m, c) in &diff.0 {
        if *c > 0 {
            pos.add_term(m.clone(), *c);
        } else {
            neg.add_term(m.clone(), -*c);
        }
    }
    Poly::atom(Atom::Monus(pos, neg))
}

fn max_poly(a: &Poly, b: &Poly) -> Poly {
    let d = b.sub(a);
    if d.all_nonneg() {
        return b.clone();
    }
    if d.0.values().all(|c| *c <= 0) {
        return a.clone();
    }
    let (a, b) = if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    Poly::atom(Atom::Max(a, b))
}

fn pow2_poly(p: &Poly) -> Poly {
    if let Some(c) = p.is_constant() {
        if (0..=62).contains(&c) {
            return Poly::constant(1i128 << c);
        }
    }
    let c = p.constant_term();
    if c > 0 && c <= 62 {
        let rest = p.sub(&Poly::constant(c));
        return pow2_poly(&rest).scale(1i128 << c);
    }
    Poly::atom(Atom::Pow2(p.clone()))
}

/// Substitute a variable by a polynomial throughout a polynomial, rebuilding
/// nested atoms so normalisation rewrites can fire again.
fn poly_subst_var(p: &Poly, v: &IndexVar, by: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.0 {
        let mut term = Poly::constant(*c);
        for a in &m.0 {
            term = term.mul(&atom_subst_var(a, v, by));
        }
        out = out.add(&term);
    }
    out
}

fn atom_subst_var(a: &Atom, v: &IndexVar, by: &Poly) -> Poly {
    match a {
        Atom::Var(w) if w == v => by.clone(),
        Atom::Var(_) => Poly::atom(a.clone()),
        Atom::Pow2(p) => pow2_poly(&poly_subst_var(p, v, by)),
        Atom::Max(p, q) => max_poly(&poly_subst_var(p, v, by), &poly_subst_var(q, v, by)),
        Atom::Monus(p, q) => monus_poly(&poly_subst_var(p, v, by), &poly_subst_var(q, v, by)),
        Atom::App(n, ps) => Poly::atom(Atom::App(
            n.clone(),
            ps.iter().map(|p| poly_subst_var(p, v, by)).collect(),
        )),
    }
}

/// Replace every occurrence of a specific atom by a polynomial.
fn poly_replace_atom(p: &Poly, target: &Atom, by: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.0 {
        let mut term = Poly::constant(*c);
        for a in &m.0 {
            if a == target {
                term = term.mul(by);
            } else {
                // Rebuild nested occurrences inside composite atoms.
                term = term.mul(&atom_replace(a, target, by));
            }
        }
        out = out.add(&term);
    }
    out
}

fn atom_replace(a: &Atom, target: &Atom, by: &Poly) -> Poly {
    if a == target {
        return by.clone();
    }
    match a {
        Atom::Var(_) => Poly::atom(a.clone()),
        Atom::Pow2(p) => pow2_poly(&poly_replace_atom(p, target, by)),
        Atom::Max(p, q) => max_poly(
            &poly_replace_atom(p, target, by),
            &poly_replace_atom(q, target, by),
        ),
        Atom::Monus(p, q) => monus_poly(
            &poly_replace_atom(p, target, by),
            &poly_replace_atom(q, target, by),
        ),
        Atom::App(n, ps) => Poly::atom(Atom::App(
            n.clone(),
            ps.iter().map(|p| poly_replace_atom(p, target, by)).collect(),
        )),
    }
}

/// A hypothesis in polynomial form: `lhs rel rhs`.
#[derive(Debug, Clone)]
struct PolyHyp {
    lhs: Poly,
    rel: Rel,
    rhs: Poly,
}

#[derive(Debug, Clone)]
struct Goal {
    hyps: Vec<PolyHyp>,
    /// Prove `lhs <= rhs`.
    lhs: Poly,
    rhs: Poly,
    fresh: usize,
}

thread_local! {
    /// Remaining step budget for the current symbolic proof attempt. The
    /// case-split search is worst-case exponential in the split depth, so a
    /// global cap keeps a single query from monopolising the session; an
    /// exhausted budget just degrades the verdict to `Unknown`.
    static PROVE_BUDGET: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

fn prove(env: &IndexEnv, c: &Constraint, cfg: &EntailConfig) -> bool {
    PROVE_BUDGET.with(|b| b.set(cfg.prove_cap));
    let hyps: Vec<PolyHyp> = env
        .constraints
        .iter()
        .map(|h| PolyHyp {
            lhs: normalize(&h.lhs),
            rel: h.rel,
            rhs: normalize(&h.rhs),
        })
        .collect();
    let l = normalize(&c.lhs);
    let r = normalize(&c.rhs);
    let mk = |lhs: Poly, rhs: Poly| Goal {
        hyps: hyps.clone(),
        lhs,
        rhs,
        fresh: 0,
    };
    match c.rel {
        Rel::Le => prove_goal(mk(l, r), cfg.split_depth),
        Rel::Lt => prove_goal(mk(l.add(&Poly::constant(1)), r), cfg.split_depth),
        Rel::Eq => {
            prove_goal(mk(l.clone(), r.clone()), cfg.split_depth)
                && prove_goal(mk(r, l), cfg.split_depth)
        }
        Rel::Ne => {
            prove_goal(mk(l.clone().add(&Poly::constant(1)), r.clone()), cfg.split_depth)
                || prove_goal(mk(r.add(&Poly::constant(1)), l), cfg.split_depth)
        }
    }
}

fn goal_map(g: &Goal, f: impl Fn(&Poly) -> Poly) -> Goal {
    Goal {
        hyps: g
            .hyps
            .iter()
            .map(|h| PolyHyp {
                lhs: f(&h.lhs),
                rel: h.rel,
                rhs: f(&h.rhs),
            })
            .collect(),
        lhs: f(&g.lhs),
        rhs: f(&g.rhs),
        fresh: g.fresh,
    }
}

/// True when some hypothesis is unsatisfiable on its face, making the branch
/// vacuous.
fn contradictory(hyps: &[PolyHyp]) -> bool {
    for h in hyps {
        let d = h.lhs.sub(&h.rhs);
        match h.rel {
            // lhs <= rhs impossible if lhs - rhs has all coeffs >= 0 and
            // positive constant term (then lhs > rhs pointwise).
            Rel::Le => {
                if d.all_nonneg() && d.constant_term() > 0 {
                    return true;
                }
            }
            Rel::Lt => {
                if d.all_nonneg() && d.constant_term() >= 0 {
                    return true;
                }
            }
            Rel::Eq => {
                if d.all_nonneg() && d.constant_term() > 0 {
                    return true;
                }
                let nd = d.neg();
                if nd.all_nonneg() && nd.constant_term() > 0 {
                    return true;
                }
            }
            Rel::Ne => {
                if d == Poly::zero() {
                    return true;
                }
            }
        }
    }
    false
}

fn prove_goal(mut g: Goal, depth: usize) -> bool {
    // Charge the budget by the size of the goal so that searches whose
    // polynomials balloon are cut off proportionally sooner.
    let cost = 1
        + g.lhs.0.len() as u64
        + g.rhs.0.len() as u64
        + g.hyps
            .iter()
            .map(|h| (h.lhs.0.len() + h.rhs.0.len()) as u64)
            .sum::<u64>();
    let exhausted = PROVE_BUDGET.with(|b| {
        let left = b.get();
        b.set(left.saturating_sub(cost));
        left < cost
    });
    if exhausted {
        return false;
    }
    saturate_hyps(&mut g);
    if contradictory(&g.hyps) {
        return true;
    }
    let d = g.rhs.sub(&g.lhs);
    if d.all_nonneg() && d.constant_term() >= 0 {
        return true;
    }
    if linear_leaf(&g) {
        return true;
    }
    depth > 0 && try_split(&g, depth)
}

/// Collect every composite atom occurring anywhere in the goal.
fn goal_atoms(g: &Goal) -> Vec<Atom> {
    let mut out = Vec::new();
    collect_atoms(&g.lhs, &mut out);
    collect_atoms(&g.rhs, &mut out);
    for h in &g.hyps {
        collect_atoms(&h.lhs, &mut out);
        collect_atoms(&h.rhs, &mut out);
    }
    out
}

/// Collect atoms of a polynomial, including those nested inside composite
/// atom arguments; case splits on a nested monus or max are still exact
/// because every split replaces the atom by an equal polynomial under the
/// hypothesis it introduces.
fn collect_atoms(p: &Poly, out: &mut Vec<Atom>) {
    for m in p.0.keys() {
        for a in &m.0 {
            match a {
                Atom::Var(_) => {}
                Atom::Pow2(q) => collect_atoms(q, out),
                Atom::Max(q, r) | Atom::Monus(q, r) => {
                    collect_atoms(q, out);
                    collect_atoms(r, out);
                }
                Atom::App(_, args) => {
                    for q in args {
                        collect_atoms(q, out);
                    }
                }
            }
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
    }
}

/// Attempt to make progress by case-splitting on a monus or max atom, by
/// eliminating an equality hypothesis, or by instantiating a variable lower
/// bound from the hypotheses. Returns true only when a strategy proves the
/// goal in every resulting case.
fn budget_left() -> bool {
    PROVE_BUDGET.with(|b| b.get() > 0)
}

fn try_split(g: &Goal, depth: usize) -> bool {
    // Equality hypotheses whose left side is a single atom act as rewrites.
    for h in &g.hyps {
        if !budget_left() {
            return false;
        }
        if h.rel == Rel::Eq {
            for (a, by) in [(&h.lhs, &h.rhs), (&h.rhs, &h.lhs)] {
                if let Some(atom) = a.as_single_atom() {
                    if !by.atoms().contains(&atom) && occurs_elsewhere(g, &atom, h) {
                        let rewritten = goal_map(g, |x| poly_replace_atom(x, &atom, by));
                        if prove_goal(rewritten, depth - 1) {
                            return true;
                        }
                    }
                }
            }
        }
    }

    // Relax monus atoms without case-splitting: p - q is at least the
    // integer difference and at most p, so a monus occurring only with one
    // sign in the goal difference can be replaced by the matching bound.
    let diff = g.rhs.sub(&g.lhs);
    for atom in goal_atoms(g) {
        if !budget_left() {
            return false;
        }
        let Atom::Monus(p, q) = &atom else { continue };
        let coeffs: Vec<i128> = diff
            .0
            .iter()
            .filter(|(m, _)| m.0.contains(&atom))
            .map(|(_, c)| *c)
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        // Only sound for top-level occurrences; a copy nested inside another
        // atom (e.g. a pow2 argument) has no fixed sign.
        let nested = diff.0.keys().any(|m| {
            m.0.iter()
                .any(|a| a != &atom && atom_mentions(a, &atom))
        });
        if nested {
            continue;
        }
        let by = if coeffs.iter().all(|c| *c > 0) {
            p.sub(q)
        } else if coeffs.iter().all(|c| *c < 0) {
            p.clone()
        } else {
            continue;
        };
        let mut relaxed = g.clone();
        relaxed.lhs = Poly::zero();
        relaxed.rhs = poly_replace_atom(&diff, &atom, &by);
        if prove_goal(relaxed, depth - 1) {
            return true;
        }
    }

    let atoms = goal_atoms(g);
    let mut candidates: Vec<&Atom> = atoms
        .iter()
        .filter(|a| matches!(a, Atom::Monus(..) | Atom::Max(..)))
        .collect();
    let is_inner = |a: &Atom| match a {
        Atom::Monus(p, q) | Atom::Max(p, q) => p
            .atoms()
            .iter()
            .chain(q.atoms().iter())
            .all(|x| matches!(x, Atom::Var(_))),
        _ => true,
    };
    candidates.sort_by_key(|a| !is_inner(a));
    for cand in candidates {
        if !budget_left() {
            return false;
        }
        let proved = match cand {
            Atom::Monus(p, q) => split_monus(g, cand, p, q, depth),
            Atom::Max(p, q) => split_max(g, cand, p, q, depth),
            _ => unreachable!(),
        };
        if proved {
            return true;
        }
    }

    // Hypothesis-guided grounding: a hypothesis `c <= v` lets us substitute
    // v := v' + c, which can unlock monus cancellation (e.g. (i+j)-1 under
    // i >= 1 becomes j + i').
    for h in &g.hyps {
        if !budget_left() {
            return false;
        }
        if h.rel == Rel::Le || h.rel == Rel::Lt {
            let (Some(c), Some((v, 0))) = (h.lhs.is_constant(), h.rhs.as_var_plus_const()) else {
                continue;
            };
            let c = if h.rel == Rel::Lt { c + 1 } else { c };
            if c <= 0 || c > 16 {
                continue;
            }
            let fresh_name = format!("$d{}", g.fresh);
            let by = Poly::atom(Atom::Var(fresh_name)).add(&Poly::constant(c));
            let mut sub = goal_map(g, |x| poly_subst_var(x, &v, &by));
            sub.fresh = g.fresh + 1;
            if prove_goal(sub, depth - 1) {
                return true;
            }
        }
    }
    false
}

fn atom_mentions(a: &Atom, target: &Atom) -> bool {
    if a == target {
        return true;
    }
    let poly_mentions = |p: &Poly| {
        p.0.keys()
            .any(|m| m.0.iter().any(|x| atom_mentions(x, target)))
    };
    match a {
        Atom::Var(_) => false,
        Atom::Pow2(p) => poly_mentions(p),
        Atom::Max(p, q) | Atom::Monus(p, q) => poly_mentions(p) || poly_mentions(q),
        Atom::App(_, args) => args.iter().any(poly_mentions),
    }
}

fn occurs_elsewhere(g: &Goal, atom: &Atom, skip: &PolyHyp) -> bool {
    let contains = |p: &Poly| p.atoms().contains(atom);
    if contains(&g.lhs) || contains(&g.rhs) {
        return true;
    }
    g.hyps
        .iter()
        .any(|h| !std::ptr::eq(h, skip) && (contains(&h.lhs) || contains(&h.rhs)))
}

fn split_monus(g: &Goal, atom: &Atom, p: &Poly, q: &Poly, depth: usize) -> bool {
    // Case "small": p <= q, the atom collapses to 0.
    let mut small = goal_map(g, |x| poly_replace_atom(x, atom, &Poly::zero()));
    small.hyps.push(PolyHyp {
        lhs: p.clone(),
        rel: Rel::Le,
        rhs: q.clone(),
    });

    if let Some((v, k)) = p.as_var_plus_const() {
        if let Some(qc) = q.is_constant() {
            // (v + k) - qc with qc > k (the normaliser cancelled commons).
            // Enumerate v below the threshold, substitute v := lo + fresh at
            // and above it.
            let lo = (qc - k).max(0);
            if lo <= 16 {
                for val in 0..lo {
                    if !budget_left() {
                        return false;
                    }
                    let inst = goal_map(g, |x| poly_subst_var(x, &v, &Poly::constant(val)));
                    if !prove_goal(inst, depth - 1) {
                        return false;
                    }
                }
                let fresh_name = format!("$d{}", g.fresh);
                let by = Poly::atom(Atom::Var(fresh_name)).add(&Poly::constant(lo));
                let mut big = goal_map(g, |x| poly_subst_var(x, &v, &by));
                big.fresh = g.fresh + 1;
                return prove_goal(big, depth - 1);
            }
            return false;
        }
        // (v + k) - q: in the big case substitute v := (q - k) + fresh.
        let fresh_name = format!("$d{}", g.fresh);
        let by = q
            .sub(&Poly::constant(k))
            .add(&Poly::atom(Atom::Var(fresh_name)));
        if by.all_nonneg() {
            let mut big = goal_map(g, |x| poly_subst_var(x, &v, &by));
            big.fresh = g.fresh + 1;
            return prove_goal(small, depth - 1) && prove_goal(big, depth - 1);
        }
        return false;
    }
    if let Some(a) = p.as_single_atom() {
        // In the big case replace the opaque atom by q + fresh.
        let fresh_name = format!("$d{}", g.fresh);
        let by = q.add(&Poly::atom(Atom::Var(fresh_name)));
        let mut big = goal_map(g, |x| poly_replace_atom(x, &a, &by));
        big.fresh = g.fresh + 1;
        return prove_goal(small, depth - 1) && prove_goal(big, depth - 1);
    }
    // General big case: once q <= p is assumed, the atom is exactly the
    // difference polynomial (possibly with a negative constant term).
    let mut big = goal_map(g, |x| poly_replace_atom(x, atom, &p.sub(q)));
    big.hyps.push(PolyHyp {
        lhs: q.clone(),
        rel: Rel::Le,
        rhs: p.clone(),
    });
    prove_goal(small, depth - 1) && prove_goal(big, depth - 1)
}

fn split_max(g: &Goal, atom: &Atom, p: &Poly, q: &Poly, depth: usize) -> bool {
    let mut left = goal_map(g, |x| poly_replace_atom(x, atom, q));
    left.hyps.push(PolyHyp {
        lhs: p.clone(),
        rel: Rel::Le,
        rhs: q.clone(),
    });
    let mut right = goal_map(g, |x| poly_replace_atom(x, atom, p));
    right.hyps.push(PolyHyp {
        lhs: q.clone(),
        rel: Rel::Le,
        rhs: p.clone(),
    });
    prove_goal(left, depth - 1) && prove_goal(right, depth - 1)
}

/// Derive consequences of lower-bound hypotheses, to a fixed point:
///
/// * `c <= k*a + d` gives `ceil((c - d) / k) <= a` for a single atom `a`;
/// * `c <= pow2(P)` with `c >= 2` gives `ceil(log2 c) <= P`;
/// * `c <= p monus q` with `c >= 1` gives `q + c <= p`.
fn saturate_hyps(g: &mut Goal) {
    for _ in 0..4 {
        let mut derived = Vec::new();
        for h in &g.hyps {
            // Constant lower bound on the right-hand side.
            let c = match h.rel {
                Rel::Le => h.lhs.is_constant(),
                Rel::Lt => h.lhs.is_constant().map(|c| c + 1),
                Rel::Eq => h.lhs.is_constant().or_else(|| {
                    // An equality with a constant side bounds the other side.
                    h.rhs.is_constant()
                }),
                Rel::Ne => None,
            };
            let Some(c) = c else { continue };
            let bounded = if h.rel == Rel::Eq && h.lhs.is_constant().is_none() {
                &h.lhs
            } else {
                &h.rhs
            };
            let d0 = bounded.constant_term();
            let non_const: Vec<(&Mono, i128)> = bounded
                .0
                .iter()
                .filter(|(m, _)| !m.0.is_empty())
                .map(|(m, k)| (m, *k))
                .collect();
            let [(m, k)] = non_const.as_slice() else {
                continue;
            };
            if *k <= 0 || m.0.len() != 1 {
                continue;
            }
            let lo = {
                let need = c - d0;
                if need <= 0 {
                    continue;
                }
                (need + k - 1) / k
            };
            if *k > 1 || d0 != 0 {
                let mut rhs = Poly::zero();
                rhs.add_term((*m).clone(), 1);
                derived.push(PolyHyp {
                    lhs: Poly::constant(lo),
                    rel: Rel::Le,
                    rhs,
                });
            }
            match &m.0[0] {
                Atom::Pow2(p) if lo >= 2 => {
                    // smallest lg with 2^lg >= lo
                    let mut lg = 0i128;
                    while lg < 120 && (1i128 << lg) < lo {
                        lg += 1;
                    }
                    derived.push(PolyHyp {
                        lhs: Poly::constant(lg),
                        rel: Rel::Le,
                        rhs: p.clone(),
                    });
                }
                Atom::Monus(p, q) if lo >= 1 => {
                    derived.push(PolyHyp {
                        lhs: q.add(&Poly::constant(lo)),
                        rel: Rel::Le,
                        rhs: p.clone(),
                    });
                }
                _ => {}
            }
        }
        let mut grew = false;
        for h in derived {
            let present = g
                .hyps
                .iter()
                .any(|x| x.rel == h.rel && x.lhs == h.lhs && x.rhs == h.rhs);
            if !present {
                g.hyps.push(h);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
}

/// Leaf decision: monomial domination, nonnegative combinations of
/// hypothesis differences, and constant lower bounds derived from the
/// hypotheses and from `pow2(P) >= P + 1`.
fn linear_leaf(g: &Goal) -> bool {
    let mut d = g.rhs.sub(&g.lhs);

    // Constant lower bounds for atoms.
    let lb = |a: &Atom| atom_lower_bound(a, &g.hyps, 3);

    // Try to cancel negative non-constant monomials by domination: find a
    // positive monomial that contains the negative one as a sub-multiset and
    // whose leftover factors are all provably >= 1.
    loop {
        let neg: Option<(Mono, i128)> = d
            .0
            .iter()
            .find(|(m, c)| **c < 0 && !m.0.is_empty())
            .map(|(m, c)| (m.clone(), *c));
        let Some((nm, nc)) = neg else { break };
        let need = -nc;
        // Candidate dominating monomials.
        let cand: Option<(Mono, i128)> = d
            .0
            .iter()
            .filter(|(m, c)| **c > 0 && submultiset(&nm.0, &m.0))
            .filter(|(m, _)| {
                multiset_diff(&m.0, &nm.0)
                    .iter()
                    .all(|a| lb(a) >= 1)
            })
            .map(|(m, c)| (m.clone(), *c))
            .next();
        if let Some((pm, pc)) = cand {
            let k = need.min(pc);
            d.add_term(nm.clone(), k);
            d.add_term(pm, -k);
        } else {
            // No exact domination; try replacing the monus upper bound:
            // a Monus(p, q) atom is itself bounded by p. Expanding on the
            // negative side is unsound, so give up.
            break;
        }
    }

    if d.all_nonneg() && d.constant_term() >= 0 {
        return true;
    }

    // Subtract nonnegative hypothesis differences to cancel remaining
    // negative monomials: from `lhs <= rhs` we know rhs - lhs >= 0, so
    // d >= 0 follows from d - t*(rhs - lhs) >= 0 for any t >= 0.
    let mut diffs: Vec<Poly> = Vec::new();
    for h in &g.hyps {
        match h.rel {
            Rel::Le => diffs.push(h.rhs.sub(&h.lhs)),
            Rel::Lt => diffs.push(h.rhs.sub(&h.lhs).sub(&Poly::constant(1))),
            Rel::Eq => {
                diffs.push(h.rhs.sub(&h.lhs));
                diffs.push(h.lhs.sub(&h.rhs));
            }
            Rel::Ne => {}
        }
    }
    // Implicit facts about pow2 atoms: pow2(P) >= P + 1.
    for a in goal_atoms(g) {
        if let Atom::Pow2(p) = &a {
            diffs.push(
                Poly::atom(a.clone())
                    .sub(p)
                    .sub(&Poly::constant(1)),
            );
        }
    }
    for _ in 0..12 {
        if d.all_nonneg() && d.constant_term() >= 0 {
            return true;
        }
        let Some((m, dm)) = d
            .0
            .iter()
            .find(|(m, c)| **c < 0 && !m.0.is_empty())
            .map(|(m, c)| (m.clone(), *c))
        else {
            break;
        };
        let mut applied = false;
        for h in &diffs {
            let hm = h.0.get(&m).copied().unwrap_or(0);
            if hm < 0 {
                let t = ((-dm) + (-hm) - 1) / (-hm);
                d = d.sub(&h.scale(t));
                applied = true;
                break;
            }
        }
        if !applied {
            break;
        }
    }

    if d.all_nonneg() && d.constant_term() >= 0 {
        return true;
    }
    // Use lower bounds to absorb a negative constant.
    let neg_nonconst = d.0.iter().any(|(m, c)| *c < 0 && !m.0.is_empty());
    if neg_nonconst {
        return false;
    }
    let mut budget: i128 = 0;
    for (m, c) in &d.0 {
        if m.0.is_empty() {
            budget += c;
        } else {
            let mono_lb: i128 = m.0.iter().map(|a| lb(a)).product();
            budget += c * mono_lb;
        }
    }
    budget >= 0
}

fn submultiset(small: &[Atom], big: &[Atom]) -> bool {
    let mut pool = big.to_vec();
    for a in small {
        if let Some(pos) = pool.iter().position(|x| x == a) {
            pool.remove(pos);
        } else {
            return false;
        }
    }
    true
}

fn multiset_diff(big: &[Atom], small: &[Atom]) -> Vec<Atom> {
    let mut pool = big.to_vec();
    for a in small {
        if let Some(pos) = pool.iter().position(|x| x == a) {
            pool.remove(pos);
        }
    }
    pool
}

/// Best known constant lower bound for an atom.
fn atom_lower_bound(a: &Atom, hyps: &[PolyHyp], depth: usize) -> i128 {
    if depth == 0 {
        return 0;
    }
    let poly_lb = |p: &Poly| -> i128 {
        let mut acc = p.constant_term();
        for (m, c) in &p.0 {
            if m.0.is_empty() {
                continue;
            }
            if *c > 0 {
                let ml: i128 = m
                    .0
                    .iter()
                    .map(|x| atom_lower_bound(x, hyps, depth - 1))
                    .product();
                acc += c * ml;
            } else {
                // Negative coefficient: no finite upper bound available, so
                // the polynomial has no useful lower bound.
                return 0;
            }
        }
        acc.max(0)
    };
    let mut best: i128 = match a {
        Atom::Pow2(p) => {
            let pl = poly_lb(p);
            if (0..=40).contains(&pl) {
                1i128 << pl
            } else if pl > 40 {
                i128::MAX / 4
            } else {
                1
            }
        }
        Atom::Max(p, q) => poly_lb(p).max(poly_lb(q)),
        _ => 0,
    };
    // Hypotheses of the form c <= X where X is exactly this atom (or a
    // polynomial whose every monomial is bounded below by this atom's info).
    for h in hyps {
        if h.rel == Rel::Le || h.rel == Rel::Lt || h.rel == Rel::Eq {
            if let Some(c) = h.lhs.is_constant() {
                if let Some(b) = h.rhs.as_single_atom() {
                    if &b == a {
                        let bound = if h.rel == Rel::Lt { c + 1 } else { c };
                        best = best.max(bound);
                    }
                }
            }
        }
        if h.rel == Rel::Eq {
            if let Some(c) = h.rhs.is_constant() {
                if let Some(b) = h.lhs.as_single_atom() {
                    if &b == a {
                        best = best.max(c);
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> IndexExpr {
        IndexExpr::var(n)
    }
    fn l(n: u64) -> IndexExpr {
        IndexExpr::lit(n)
    }

    #[test]
    fn eval_builtins() {
        let env = IndexEnv::new();
        let rho: Valuation = [("i".to_string(), 3u64), ("j".to_string(), 5u64)]
            .into_iter()
            .collect();
        let e = IndexExpr::add(IndexExpr::mul(v("i"), v("j")), l(2));
        assert_eq!(eval_index(&e, &rho, &env), Ok(17));
        assert_eq!(
            eval_index(&IndexExpr::monus(v("i"), v("j")), &rho, &env),
            Ok(0)
        );
        assert_eq!(
            eval_index(&IndexExpr::monus(v("j"), v("i")), &rho, &env),
            Ok(2)
        );
        assert_eq!(eval_index(&IndexExpr::max(v("i"), v("j")), &rho, &env), Ok(5));
        assert_eq!(eval_index(&IndexExpr::pow2(v("i")), &rho, &env), Ok(8));
    }

    #[test]
    fn eval_user_fn() {
        let mut env = IndexEnv::new();
        env.user_fns.insert(
            "f".into(),
            UserFn {
                arity: 1,
                entries: vec![(vec![0], 7)],
                default: 1,
            },
        );
        let rho = Valuation::new();
        let e = IndexExpr::Apply(FnSym::User("f".into()), vec![l(0)]);
        assert_eq!(eval_index(&e, &rho, &env), Ok(7));
        let e = IndexExpr::Apply(FnSym::User("f".into()), vec![l(3)]);
        assert_eq!(eval_index(&e, &rho, &env), Ok(1));
    }

    #[test]
    fn entails_linear() {
        let env = IndexEnv::with_vars(["i", "j"]);
        // i <= i + j
        assert!(entails_default(&env, &Constraint::le(v("i"), IndexExpr::add(v("i"), v("j")))).is_valid());
        // i + 1 <= i refuted
        match entails_default(&env, &Constraint::le(IndexExpr::add(v("i"), l(1)), v("i"))) {
            Entailment::Refuted(_) => {}
            o => panic!("expected refutation, got {o:?}"),
        }
    }

    #[test]
    fn entails_monus_case_split() {
        let env = IndexEnv::with_vars(["i"]);
        // 1 + (i - 1) <= i is NOT valid (fails at i = 0)...
        let c = Constraint::le(
            IndexExpr::add(l(1), IndexExpr::monus(v("i"), l(1))),
            v("i"),
        );
        match entails_default(&env, &c) {
            Entailment::Refuted(rho) => assert_eq!(rho.get("i"), Some(&0)),
            o => panic!("expected refutation, got {o:?}"),
        }
        // ... but is valid under the hypothesis i >= 1.
        let env2 = env.extended(&[], &[Constraint::ge(v("i"), l(1))]);
        assert!(entails_default(&env2, &c).is_valid());
        // (i - 1) + 1 <= max(i, 1) holds unconditionally.
        let c2 = Constraint::le(
            IndexExpr::add(IndexExpr::monus(v("i"), l(1)), l(1)),
            IndexExpr::max(v("i"), l(1)),
        );
        assert!(entails_default(&env2, &c2).is_valid());
    }

    #[test]
    fn entails_pow2() {
        let env = IndexEnv::with_vars(["i"]);
        // pow2(i) <= pow2(i + 1)
        let c = Constraint::le(IndexExpr::pow2(v("i")), IndexExpr::pow2(IndexExpr::add(v("i"), l(1))));
        assert!(entails_default(&env, &c).is_valid());
        // i + 1 <= pow2(i)
        let c = Constraint::le(IndexExpr::add(v("i"), l(1)), IndexExpr::pow2(v("i")));
        assert!(entails_default(&env, &c).is_valid());
        // pow2(i) <= 2 * pow2(i - 1) under i >= 1
        let env2 = env.extended(&[], &[Constraint::ge(v("i"), l(1))]);
        let c = Constraint::le(
            IndexExpr::pow2(v("i")),
            IndexExpr::mul(l(2), IndexExpr::pow2(IndexExpr::monus(v("i"), l(1)))),
        );
        assert!(entails_default(&env2, &c).is_valid());
        // pow2(i+1) - pow2(i) = pow2(i)
        let c = Constraint::eq(
            IndexExpr::monus(IndexExpr::pow2(IndexExpr::add(v("i"), l(1))), IndexExpr::pow2(v("i"))),
            IndexExpr::pow2(v("i")),
        );
        assert!(entails_default(&env, &c).is_valid());
    }

    #[test]
    fn entails_contradictory_hypotheses() {
        // Under pow2(i) >= 2 we can conclude i >= 1.
        let env = IndexEnv::with_vars(["i"]).extended(
            &[],
            &[Constraint::ge(IndexExpr::pow2(v("i")), l(2))],
        );
        let c = Constraint::ge(v("i"), l(1));
        assert!(entails_default(&env, &c).is_valid());
    }

    #[test]
    fn entails_mergesort_recurrence() {
        // 2*(i-1)*pow2(i-1) + 2*pow2(i-1) <= i*pow2(i) under pow2(i) >= 2.
        let env = IndexEnv::with_vars(["i"]).extended(
            &[],
            &[Constraint::ge(IndexExpr::pow2(v("i")), l(2))],
        );
        let im1 = IndexExpr::monus(v("i"), l(1));
        let lhs = IndexExpr::add(
            IndexExpr::mul(IndexExpr::mul(l(2), im1.clone()), IndexExpr::pow2(im1.clone())),
            IndexExpr::mul(l(2), IndexExpr::pow2(im1)),
        );
        let rhs = IndexExpr::mul(v("i"), IndexExpr::pow2(v("i")));
        assert!(entails_default(&env, &Constraint::le(lhs, rhs)).is_valid());
    }

    #[test]
    fn max_upper_bound_split() {
        let env = IndexEnv::with_vars(["i", "j"]);
        let c = Constraint::le(
            IndexExpr::max(v("i"), v("j")),
            IndexExpr::add(v("i"), v("j")),
        );
        assert!(entails_default(&env, &c).is_valid());
    }

    #[test]
    fn scaled_lower_bounds_divide_through() {
        // 1 <= 2i forces 1 <= i over the naturals.
        let mut env = IndexEnv::with_vars(["i"]);
        env.assume(Constraint::ge(
            IndexExpr::mul(IndexExpr::lit(2), v("i")),
            IndexExpr::lit(1),
        ));
        let c = Constraint::ge(v("i"), IndexExpr::lit(1));
        assert!(entails_default(&env, &c).is_valid());

        // 5 <= 2i + 1 forces 2 <= i.
        let mut env = IndexEnv::with_vars(["i"]);
        env.assume(Constraint::le(
            IndexExpr::lit(5),
            IndexExpr::add(IndexExpr::mul(IndexExpr::lit(2), v("i")), IndexExpr::lit(1)),
        ));
        assert!(entails_default(&env, &Constraint::ge(v("i"), IndexExpr::lit(2))).is_valid());
        assert!(!entails_default(&env, &Constraint::ge(v("i"), IndexExpr::lit(3))).is_valid());
    }

    #[test]
    fn nonempty_tail_forces_positive_exponent() {
        // 1 <= pow2(i) - 1 chains through 2 <= pow2(i) to 1 <= i.
        let mut env = IndexEnv::with_vars(["i"]);
        env.assume(Constraint::ge(
            IndexExpr::monus(IndexExpr::pow2(v("i")), IndexExpr::lit(1)),
            IndexExpr::lit(1),
        ));
        assert!(entails_default(
            &env,
            &Constraint::ge(IndexExpr::pow2(v("i")), IndexExpr::lit(2))
        )
        .is_valid());
        assert!(entails_default(&env, &Constraint::ge(v("i"), IndexExpr::lit(1))).is_valid());
    }

    #[test]
    fn halved_lists_stay_in_bounds() {
        // Splitting a list of length <= 2i: under 1 <= 2i and 1 <= 2i - 1,
        // the tail of the tail fits in 2(i - 1).
        let mut env = IndexEnv::with_vars(["i"]);
        let two_i = IndexExpr::mul(IndexExpr::lit(2), v("i"));
        env.assume(Constraint::ge(two_i.clone(), IndexExpr::lit(1)));
        env.assume(Constraint::ge(
            IndexExpr::monus(two_i.clone(), IndexExpr::lit(1)),
            IndexExpr::lit(1),
        ));
        let lhs = IndexExpr::monus(two_i, IndexExpr::lit(2));
        let rhs = IndexExpr::mul(
            IndexExpr::lit(2),
            IndexExpr::monus(v("i"), IndexExpr::lit(1)),
        );
        assert!(entails_default(&env, &Constraint::le(lhs.clone(), rhs.clone())).is_valid());
        assert!(entails_default(&env, &Constraint::le(rhs, lhs)).is_valid());
    }

    #[test]
    fn unknown_on_opaque_user_fn() {
        let mut env = IndexEnv::with_vars(["i"]);
        env.user_fns.insert(
            "f".into(),
            UserFn {
                arity: 1,
                entries: vec![],
                default: 0,
            },
        );
        // f(i) <= f(i+1) is false for the table (default 0 everywhere ties),
        // actually 0 <= 0 holds everywhere, so it's not refutable; the
        // symbolic layer knows nothing about f, and the grid search cannot
        // prove validity, so the result is Unknown.
        let c = Constraint::lt(
            IndexExpr::Apply(FnSym::User("f".into()), vec![v("i")]),
            IndexExpr::Apply(FnSym::User("f".into()), vec![IndexExpr::add(v("i"), l(1))]),
        );
        match entails_default(&env, &c) {
            Entailment::Refuted(_) => {}
            o => panic!("f(i) < f(i+1) should be refuted by the grid, got {o:?}"),
        }
        let c2 = Constraint::le(
            IndexExpr::Apply(FnSym::User("f".into()), vec![v("i")]),
            IndexExpr::Apply(FnSym::User("f".into()), vec![v("i")]),
        );
        assert!(entails_default(&env, &c2).is_valid());
    }
}

// ---------------------------------------------------------------------------
// Smart constructors with light constant folding, used when the checkers
// assemble synthesised complexity expressions.
// ---------------------------------------------------------------------------

pub fn fold_add(a: IndexExpr, b: IndexExpr) -> IndexExpr {
    match (&a, &b) {
        (IndexExpr::Lit(0), _) => b,
        (_, IndexExpr::Lit(0)) => a,
        (IndexExpr::Lit(x), IndexExpr::Lit(y)) => IndexExpr::Lit(x.saturating_add(*y)),
        _ => IndexExpr::add(a, b),
    }
}

pub fn fold_mul(a: IndexExpr, b: IndexExpr) -> IndexExpr {
    match (&a, &b) {
        (IndexExpr::Lit(0), _) | (_, IndexExpr::Lit(0)) => IndexExpr::Lit(0),
        (IndexExpr::Lit(1), _) => b,
        (_, IndexExpr::Lit(1)) => a,
        (IndexExpr::Lit(x), IndexExpr::Lit(y)) => IndexExpr::Lit(x.saturating_mul(*y)),
        _ => IndexExpr::mul(a, b),
    }
}

pub fn fold_monus(a: IndexExpr, b: IndexExpr) -> IndexExpr {
    match (&a, &b) {
        (_, IndexExpr::Lit(0)) => a,
        (IndexExpr::Lit(x), IndexExpr::Lit(y)) => IndexExpr::Lit(x.saturating_sub(*y)),
        _ if a == b => IndexExpr::Lit(0),
        _ => IndexExpr::monus(a, b),
    }
}

pub fn fold_max(a: IndexExpr, b: IndexExpr) -> IndexExpr {
    match (&a, &b) {
        (IndexExpr::Lit(0), _) => b,
        (_, IndexExpr::Lit(0)) => a,
        (IndexExpr::Lit(x), IndexExpr::Lit(y)) => IndexExpr::Lit(*x.max(y)),
        _ if a == b => a,
        _ => IndexExpr::max(a, b),
    }
}
