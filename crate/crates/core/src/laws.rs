//! Reverse-order laws for the core inverse, as data.
//!
//! Each law is a list of premises plus either a list of conclusions
//! (one-directional statements) or a list of clauses that are claimed to be
//! equivalent. Every condition is built from a small expression vocabulary
//! over the two operands `A` and `B` and evaluated with relative residuals.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Sub};
use std::rc::Rc;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::{self, InverseEquation, InverseOptions};
use crate::tensor::{DenseTensor, TensorShape};
use crate::testkit::{generate, law_families, GeneratorSpec};

/// Default tolerance for law conditions.
pub const LAW_RESIDUAL_TOL: f64 = 1e-8;

/// Residual reported for conditions that cannot be evaluated (an inverse
/// that does not exist, or an ambiguous rank).
pub const UNDEFINED_RESIDUAL: f64 = f64::MAX;

/// Options with the law tolerance.
pub fn law_options() -> InverseOptions {
    InverseOptions::default()
        .with_residual_tol(LAW_RESIDUAL_TOL)
        .expect("positive tolerance")
}

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawId {
    T3_1,
    C3_2,
    P3_NORMAL,
    T3_3,
    T3_4,
    T3_5,
    T3_6,
    C3_10,
    T3_11,
    C3_12,
    T4_1,
    T4_2,
    T4_3,
    T4_4,
    T_KRON,
    T_UNITARY_A,
    T_UNITARY_B,
}

impl LawId {
    pub const ALL: [LawId; 17] = [
        LawId::T3_1,
        LawId::C3_2,
        LawId::P3_NORMAL,
        LawId::T3_3,
        LawId::T3_4,
        LawId::T3_5,
        LawId::T3_6,
        LawId::C3_10,
        LawId::T3_11,
        LawId::C3_12,
        LawId::T4_1,
        LawId::T4_2,
        LawId::T4_3,
        LawId::T4_4,
        LawId::T_KRON,
        LawId::T_UNITARY_A,
        LawId::T_UNITARY_B,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LawId::T3_1 => "T3_1",
            LawId::C3_2 => "C3_2",
            LawId::P3_NORMAL => "P3_NORMAL",
            LawId::T3_3 => "T3_3",
            LawId::T3_4 => "T3_4",
            LawId::T3_5 => "T3_5",
            LawId::T3_6 => "T3_6",
            LawId::C3_10 => "C3_10",
            LawId::T3_11 => "T3_11",
            LawId::C3_12 => "C3_12",
            LawId::T4_1 => "T4_1",
            LawId::T4_2 => "T4_2",
            LawId::T4_3 => "T4_3",
            LawId::T4_4 => "T4_4",
            LawId::T_KRON => "T_KRON",
            LawId::T_UNITARY_A => "T_UNITARY_A",
            LawId::T_UNITARY_B => "T_UNITARY_B",
        }
    }

    /// True when the law uses only `A`.
    pub fn is_single(self) -> bool {
        self == LawId::P3_NORMAL
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LawId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LawId::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidOption(format!("unknown law id `{s}`")))
    }
}

/// Tensor-valued expression over the operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    A,
    B,
    /// Identity of the operands' shape.
    I,
    Mul(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Adj(Box<Expr>),
    Core(Box<Expr>),
    Group(Box<Expr>),
    Pinv(Box<Expr>),
    Kron(Box<Expr>, Box<Expr>),
}

impl Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Expr {
    pub fn adj(self) -> Expr {
        Expr::Adj(Box::new(self))
    }

    pub fn core(self) -> Expr {
        Expr::Core(Box::new(self))
    }

    pub fn group(self) -> Expr {
        Expr::Group(Box::new(self))
    }

    pub fn pinv(self) -> Expr {
        Expr::Pinv(Box::new(self))
    }

    pub fn kron(self, rhs: Expr) -> Expr {
        Expr::Kron(Box::new(self), Box::new(rhs))
    }

    fn is_atom(&self) -> bool {
        matches!(self, Expr::A | Expr::B | Expr::I)
            || matches!(self, Expr::Core(x) | Expr::Group(x) | Expr::Pinv(x) | Expr::Adj(x) if x.is_atom())
    }
}

/// Left-associated product of several factors.
fn prod(factors: &[Expr]) -> Expr {
    let mut it = factors.iter().cloned();
    let first = it.next().expect("non-empty product");
    it.fold(first, Expr::mul)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, f: &mut fmt::Formatter<'_>| {
            if e.is_atom() {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        };
        match self {
            Expr::A => f.write_str("A"),
            Expr::B => f.write_str("B"),
            Expr::I => f.write_str("I"),
            Expr::Mul(l, r) => {
                match l.as_ref() {
                    Expr::Sub(..) | Expr::Kron(..) => wrap(l, f)?,
                    _ => write!(f, "{l}")?,
                }
                f.write_str("·")?;
                match r.as_ref() {
                    Expr::Mul(..) | Expr::Sub(..) | Expr::Kron(..) => wrap(r, f),
                    _ => write!(f, "{r}"),
                }
            }
            Expr::Sub(l, r) => write!(f, "{l} - {r}"),
            Expr::Kron(l, r) => {
                wrap(l, f)?;
                f.write_str("⊗")?;
                wrap(r, f)
            }
            Expr::Adj(x) => {
                wrap(x, f)?;
                f.write_str("^*")
            }
            Expr::Core(x) => {
                wrap(x, f)?;
                f.write_str("^⊕")
            }
            Expr::Group(x) => {
                wrap(x, f)?;
                f.write_str("^#")
            }
            Expr::Pinv(x) => {
                wrap(x, f)?;
                f.write_str("^†")
            }
        }
    }
}

/// A checkable statement about expressions.
#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Equal(Expr, Expr),
    /// `e == O`
    Zero(Expr),
    /// `R(sub) ⊆ R(sup)`
    RangeIn {
        sub: Expr,
        sup: Expr,
    },
    RangeEq(Expr, Expr),
    /// `ind(e) = 1`
    Core(Expr),
    /// `x` satisfies the listed defining equations for `of`.
    InClass {
        x: Expr,
        of: Expr,
        eqs: Vec<InverseEquation>,
    },
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Equal(l, r) => write!(f, "{l} = {r}"),
            Condition::Zero(e) => write!(f, "{e} = O"),
            Condition::RangeIn { sub, sup } => write!(f, "R({sub}) ⊆ R({sup})"),
            Condition::RangeEq(l, r) => write!(f, "R({l}) = R({r})"),
            Condition::Core(e) => write!(f, "ind({e}) = 1"),
            Condition::InClass { x, of, eqs } => {
                let nums: Vec<String> = eqs.iter().map(|e| e.number().to_string()).collect();
                write!(f, "{x} ∈ ({of}){{{}}}", nums.join(","))
            }
        }
    }
}

/// Named conjunction of conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub label: String,
    pub conditions: Vec<Condition>,
}

impl Item {
    fn new(label: &str, conditions: Vec<Condition>) -> Self {
        Self {
            label: label.to_string(),
            conditions,
        }
    }

    fn single(c: Condition) -> Self {
        Self {
            label: c.to_string(),
            conditions: vec![c],
        }
    }

    /// Label followed by the condition texts.
    pub fn describe(&self) -> String {
        let body: Vec<String> = self.conditions.iter().map(|c| c.to_string()).collect();
        if self.conditions.len() == 1 && self.label == body[0] {
            self.label.clone()
        } else {
            format!("{}: {}", self.label, body.join(", "))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LawBody {
    /// Premises imply every conclusion.
    Implication(Vec<Item>),
    /// Under the premises, all clauses are equivalent.
    Equivalence(Vec<Item>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawSpec {
    pub id: LawId,
    pub summary: &'static str,
    pub premises: Vec<Item>,
    pub body: LawBody,
}

fn a() -> Expr {
    Expr::A
}
fn b() -> Expr {
    Expr::B
}
fn ac() -> Expr {
    Expr::A.core()
}
fn bc() -> Expr {
    Expr::B.core()
}
fn ab() -> Expr {
    Expr::A.mul(Expr::B)
}
fn ba() -> Expr {
    Expr::B.mul(Expr::A)
}
/// `A·B·B^⊕`
fn abbc() -> Expr {
    prod(&[a(), b(), bc()])
}
fn eq(l: Expr, r: Expr) -> Condition {
    Condition::Equal(l, r)
}
fn range_in(sub: Expr, sup: Expr) -> Condition {
    Condition::RangeIn { sub, sup }
}
fn core_of(e: Expr) -> Item {
    Item::single(Condition::Core(e))
}
/// `(A·B)^⊕ = B^⊕·A^⊕`
fn rol() -> Condition {
    eq(ab().core(), bc().mul(ac()))
}
fn ep(e: Expr) -> Item {
    Item::new(
        &format!("{e} is EP"),
        vec![eq(e.clone().mul(e.clone().pinv()), e.clone().pinv().mul(e))],
    )
}
fn unitary(e: Expr) -> Item {
    Item::new(
        &format!("{e} is unitary"),
        vec![
            eq(e.clone().mul(e.clone().adj()), Expr::I),
            eq(e.clone().adj().mul(e), Expr::I),
        ],
    )
}

/// Registry entry for `id`.
pub fn law_spec(id: LawId) -> LawSpec {
    use LawBody::*;
    let core_ab = || vec![core_of(a()), core_of(b()), core_of(ab())];
    let core_a_b = || vec![core_of(a()), core_of(b())];
    let (summary, premises, body) = match id {
        LawId::T3_1 => {
            let mut p = core_ab();
            p.push(Item::single(eq(abbc(), prod(&[b(), bc(), a()]))));
            p.push(Item::single(eq(
                prod(&[b(), a(), ac()]),
                prod(&[a(), ac(), b()]),
            )));
            (
                "range projectors commute with the other factor => ROL",
                p,
                Implication(vec![Item::single(rol())]),
            )
        }
        LawId::C3_2 => {
            let mut p = core_a_b();
            p.push(Item::single(eq(ab(), ba())));
            p.push(Item::single(eq(a().adj().mul(b()), b().mul(a().adj()))));
            (
                "A, A* commute with B => ROL",
                p,
                Implication(vec![Item::single(rol())]),
            )
        }
        LawId::P3_NORMAL => (
            "normal core tensor commutes with its core inverse",
            vec![
                core_of(a()),
                Item::new(
                    "A is normal",
                    vec![eq(a().mul(a().adj()), a().adj().mul(a()))],
                ),
            ],
            Implication(vec![Item::single(eq(a().mul(ac()), ac().mul(a())))]),
        ),
        LawId::T3_3 => {
            let proj = prod(&[a(), b(), bc(), ac()]).adj();
            let zero = prod(&[b().adj(), a().group(), Expr::I.sub(proj), a()]);
            (
                "range and annihilation conditions <=> ROL",
                core_ab(),
                Equivalence(vec![
                    Item::new(
                        "(conditions)",
                        vec![
                            range_in(a().mul(bc()), bc().mul(ac())),
                            Condition::Zero(zero),
                        ],
                    ),
                    Item::new("(ROL)", vec![rol()]),
                ]),
            )
        }
        LawId::T3_4 => {
            let mut p = core_a_b();
            p.push(Item::new("(ROL)", vec![rol()]));
            (
                "necessary conditions of ROL",
                p,
                Implication(vec![
                    Item::new("(a)", vec![range_in(ab(), ba())]),
                    Item::new(
                        "(b)",
                        vec![Condition::InClass {
                            x: prod(&[b(), bc(), ac()]),
                            of: abbc(),
                            eqs: vec![InverseEquation::E3, InverseEquation::E6],
                        }],
                    ),
                ]),
            )
        }
        LawId::T3_5 => {
            let mut p = core_a_b();
            p.push(Item::single(eq(a().mul(a()), ba())));
            (
                "A^2 = B·A => ROL for A·B and A·B·B^⊕",
                p,
                Implication(vec![
                    core_of(ab()),
                    Item::single(rol()),
                    core_of(abbc()),
                    Item::single(eq(abbc().core(), prod(&[b(), bc(), ac()]))),
                ]),
            )
        }
        LawId::T3_6 => {
            let mut p = core_ab();
            p.push(Item::single(Condition::RangeEq(
                a().adj().mul(b()),
                b().mul(a().adj()),
            )));
            (
                "under R(A*·B) = R(B·A*): ROL <=> range chain and commuting projectors",
                p,
                Equivalence(vec![
                    Item::new("(ROL)", vec![rol()]),
                    Item::new(
                        "(a)",
                        vec![range_in(bc().mul(a()), ab()), range_in(ab(), ba())],
                    ),
                    Item::new(
                        "(b)",
                        vec![eq(
                            prod(&[a(), ac(), b(), bc()]),
                            prod(&[b(), bc(), a(), ac()]),
                        )],
                    ),
                ]),
            )
        }
        LawId::C3_10 => {
            let mut p = core_a_b();
            p.push(Item::single(Condition::RangeEq(
                a().adj().mul(b()),
                b().mul(a().adj()),
            )));
            p.push(Item::new("(ROL)", vec![rol()]));
            (
                "ROL passes to A·B·B^⊕",
                p,
                Implication(vec![
                    core_of(abbc()),
                    Item::single(eq(abbc().core(), prod(&[b(), bc(), ac()]))),
                    Item::single(eq(prod(&[b(), bc(), ac()]), b().mul(bc()).core().mul(ac()))),
                ]),
            )
        }
        LawId::T3_11 => {
            let mut p = core_a_b();
            p.push(Item::single(range_in(a(), ab())));
            p.push(ep(a()));
            p.push(Item::new("(ROL)", vec![rol()]));
            let m = ac().adj().mul(b());
            (
                "EP A with R(A) ⊆ R(A·B): ROL for (A^⊕)*·B",
                p,
                Implication(vec![
                    core_of(m.clone()),
                    Item::single(eq(m.core(), bc().mul(a().adj()))),
                ]),
            )
        }
        LawId::C3_12 => {
            let mut p = core_a_b();
            p.push(Item::single(range_in(a(), ab())));
            p.push(Item::single(range_in(b().adj(), b().adj().mul(a().adj()))));
            p.push(ep(a()));
            p.push(Item::new("(ROL)", vec![rol()]));
            (
                "EP A with two range conditions: ROL passes to A·B·B^⊕",
                p,
                Implication(vec![
                    core_of(abbc()),
                    Item::single(eq(abbc().core(), prod(&[b(), bc(), ac()]))),
                ]),
            )
        }
        LawId::T4_1 => {
            let c = abbc().core();
            let x = bc().mul(c.clone());
            (
                "mixed ROL with (A·B·B^⊕)^⊕",
                vec![core_of(b()), core_of(ab()), core_of(abbc())],
                Equivalence(vec![
                    Item::new(
                        "(a)",
                        vec![eq(ab().core(), ab().group()), eq(ab().group(), x.clone())],
                    ),
                    Item::new(
                        "(b)",
                        vec![Condition::InClass {
                            x,
                            of: ab(),
                            eqs: vec![InverseEquation::E5],
                        }],
                    ),
                    Item::new(
                        "(c)",
                        vec![
                            eq(prod(&[bc(), b(), a(), b()]), ab()),
                            eq(ab(), prod(&[b(), bc(), a(), b()])),
                            eq(prod(&[b(), a(), c.clone()]), prod(&[c.clone(), a(), b()])),
                        ],
                    ),
                    Item::new("(d)", vec![eq(c, b().mul(ab().group()))]),
                ]),
            )
        }
        LawId::T4_2 => (
            "A^⊕ = B·(A·B)^# characterizations",
            core_a_b(),
            Equivalence(vec![
                Item::new("(a)", vec![eq(ac(), b().mul(ab().group()))]),
                Item::new(
                    "(b)",
                    vec![
                        eq(prod(&[ac(), a(), b()]), prod(&[b(), a(), ac()])),
                        range_in(a(), ab()),
                    ],
                ),
                Item::new(
                    "(c)",
                    vec![
                        eq(ab().group(), ab().core()),
                        eq(ab().core(), bc().mul(ac())),
                        range_in(a(), b()),
                    ],
                ),
            ]),
        ),
        LawId::T4_3 => (
            "A^⊕ = B·(A·B)^⊕ <=> R(A) ⊆ R(B·A·B)",
            vec![core_of(a())],
            Equivalence(vec![
                Item::new("(a)", vec![eq(ac(), b().mul(ab().core()))]),
                Item::new("(b)", vec![range_in(a(), prod(&[b(), a(), b()]))]),
            ]),
        ),
        LawId::T4_4 => (
            "group inverses of A·B and B·A from core inverses",
            core_a_b(),
            Equivalence(vec![
                Item::new(
                    "(a)",
                    vec![
                        eq(ab().group(), bc().mul(ac())),
                        eq(ba().group(), ac().mul(bc())),
                    ],
                ),
                Item::new(
                    "(b)",
                    vec![
                        eq(prod(&[ac(), a(), b()]), prod(&[b(), a(), ac()])),
                        eq(prod(&[bc(), b(), a()]), prod(&[a(), b(), bc()])),
                        eq(prod(&[a(), bc(), ac()]), prod(&[bc(), ac(), a()])),
                    ],
                ),
            ]),
        ),
        LawId::T_KRON => (
            "core inverse of a Kronecker product",
            core_a_b(),
            Implication(vec![Item::single(eq(
                a().kron(b()).core(),
                ac().kron(bc()),
            ))]),
        ),
        LawId::T_UNITARY_A => {
            let mut p = core_ab();
            p.push(unitary(a()));
            p.push(Item::single(range_in(a(), b())));
            (
                "unitary left factor",
                p,
                Implication(vec![Item::single(eq(ab().core(), bc().mul(a().adj())))]),
            )
        }
        LawId::T_UNITARY_B => {
            let mut p = core_ab();
            p.push(unitary(b()));
            p.push(Item::single(range_in(b().adj().mul(ac()), ac())));
            (
                "unitary right factor",
                p,
                Implication(vec![Item::single(eq(ab().core(), b().adj().mul(ac())))]),
            )
        }
    };
    LawSpec {
        id,
        summary,
        premises,
        body,
    }
}

/// Outcome of one named item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: LawId,
    pub hypotheses: Vec<Check>,
    /// Clause outcomes of an equivalence law (empty for implications).
    pub clauses: Vec<Check>,
    /// Conclusions, or the directed implications `(x) => (y)` between clauses.
    pub conclusions: Vec<Check>,
    pub conclusion_residual: f64,
    pub conclusion_pass: bool,
    pub implication_ok: bool,
}

impl LawReport {
    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }
}

#[derive(Debug, Clone, Copy)]
struct Undefined;

struct Val {
    t: DenseTensor,
    /// Upper bound on the Frobenius norms of the terms that built `t`.
    scale: f64,
}

type Slot = std::result::Result<Rc<Val>, Undefined>;

struct Evaluator<'a> {
    a: &'a DenseTensor,
    b: &'a DenseTensor,
    opts: InverseOptions,
    cache: HashMap<Expr, Slot>,
}

fn relative(diff: f64, denom: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if denom > 0.0 {
        diff / denom
    } else {
        UNDEFINED_RESIDUAL
    }
}

impl<'a> Evaluator<'a> {
    fn new(a: &'a DenseTensor, b: &'a DenseTensor, opts: &InverseOptions) -> Self {
        Self {
            a,
            b,
            opts: *opts,
            cache: HashMap::new(),
        }
    }

    fn scaled(&self, scale: f64) -> InverseOptions {
        self.opts.with_reference_norm(scale)
    }

    fn value(t: DenseTensor, scale: f64) -> Slot {
        Ok(Rc::new(Val { t, scale }))
    }

    fn inverse_of(
        &mut self,
        x: &Expr,
        which: fn(&DenseTensor, &InverseOptions) -> Result<DenseTensor>,
    ) -> Result<Slot> {
        let v = match self.eval(x)? {
            Ok(v) => v,
            Err(u) => return Ok(Err(u)),
        };
        match which(&v.t, &self.scaled(v.scale)) {
            Ok(t) => {
                let s = t.norm_fro();
                Ok(Self::value(t, s))
            }
            Err(Error::IndexTooHigh { .. } | Error::RankAmbiguous { .. }) => Ok(Err(Undefined)),
            Err(e) => Err(e),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Slot> {
        if let Some(s) = self.cache.get(e) {
            return Ok(s.clone());
        }
        let slot = match e {
            Expr::A => Self::value(self.a.clone(), self.a.norm_fro()),
            Expr::B => Self::value(self.b.clone(), self.b.norm_fro()),
            Expr::I => {
                let i = self.a.identity_like()?;
                let s = i.norm_fro();
                Self::value(i, s)
            }
            Expr::Mul(l, r) | Expr::Sub(l, r) | Expr::Kron(l, r) => {
                let (lv, rv) = match (self.eval(l)?, self.eval(r)?) {
                    (Ok(lv), Ok(rv)) => (lv, rv),
                    _ => {
                        self.cache.insert(e.clone(), Err(Undefined));
                        return Ok(Err(Undefined));
                    }
                };
                match e {
                    Expr::Mul(..) => {
                        Self::value(lv.t.einstein_product(&rv.t)?, lv.scale * rv.scale)
                    }
                    Expr::Sub(..) => Self::value(lv.t.sub(&rv.t)?, lv.scale + rv.scale),
                    _ => Self::value(lv.t.kron(&rv.t), lv.scale * rv.scale),
                }
            }
            Expr::Adj(x) => match self.eval(x)? {
                Ok(v) => Self::value(v.t.conj_transpose(), v.scale),
                Err(u) => Err(u),
            },
            Expr::Core(x) => self.inverse_of(x, inverse::core_inverse)?,
            Expr::Group(x) => self.inverse_of(x, inverse::group_inverse)?,
            Expr::Pinv(x) => self.inverse_of(x, inverse::moore_penrose)?,
        };
        self.cache.insert(e.clone(), slot.clone());
        Ok(slot)
    }

    /// `(residual, pass)` of one condition.
    fn condition(&mut self, c: &Condition) -> Result<(f64, bool)> {
        let tol = self.opts.residual_tol();
        let undefined = (UNDEFINED_RESIDUAL, false);
        let judge = |r: f64| (r, r <= tol);
        Ok(match c {
            Condition::Equal(l, r) => match (self.eval(l)?, self.eval(r)?) {
                (Ok(lv), Ok(rv)) => judge(relative(lv.t.distance(&rv.t)?, lv.scale + rv.scale)),
                _ => undefined,
            },
            Condition::Zero(x) => match self.eval(x)? {
                Ok(v) => judge(relative(v.t.norm_fro(), v.scale)),
                Err(_) => undefined,
            },
            Condition::RangeIn { sub, sup } => self.range_in(sub, sup)?,
            Condition::RangeEq(l, r) => {
                let (r1, p1) = self.range_in(l, r)?;
                let (r2, p2) = self.range_in(r, l)?;
                (r1.max(r2), p1 && p2)
            }
            Condition::Core(x) => match self.eval(x)? {
                Ok(v) => match inverse::index(&v.t, &self.scaled(v.scale)) {
                    Ok(ix) if ix.k == 1 => (0.0, true),
                    Ok(ix) => ((ix.k - 1) as f64, false),
                    Err(Error::RankAmbiguous { .. }) => undefined,
                    Err(e) => return Err(e),
                },
                Err(_) => undefined,
            },
            Condition::InClass { x, of, eqs } => match (self.eval(x)?, self.eval(of)?) {
                (Ok(xv), Ok(ov)) => {
                    let rep = inverse::verify_inverse_class(&ov.t, &xv.t, eqs, &self.opts)?;
                    (rep.max_residual(), rep.all_pass())
                }
                _ => undefined,
            },
        })
    }

    fn range_in(&mut self, sub: &Expr, sup: &Expr) -> Result<(f64, bool)> {
        let tol = self.opts.residual_tol();
        Ok(match (self.eval(sub)?, self.eval(sup)?) {
            (Ok(s), Ok(p)) => {
                let defect = inverse::range_defect(&p.t, &s.t, &self.scaled(p.scale))?;
                let r = relative(defect, s.scale);
                (r, r <= tol)
            }
            _ => (UNDEFINED_RESIDUAL, false),
        })
    }

    fn item(&mut self, item: &Item) -> Result<Check> {
        let mut residual: f64 = 0.0;
        let mut pass = true;
        for c in &item.conditions {
            let (r, p) = self.condition(c)?;
            residual = residual.max(r);
            pass &= p;
        }
        Ok(Check {
            name: item.describe(),
            residual,
            pass,
        })
    }
}

fn check_shapes(law: LawId, a: &DenseTensor, b: &DenseTensor) -> Result<()> {
    a.require_square("check_law")?;
    b.require_square("check_law")?;
    if law != LawId::T_KRON && !law.is_single() && a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            op: "check_law",
            left: a.shape().clone(),
            right: b.shape().clone(),
        });
    }
    Ok(())
}

/// Evaluates every premise and conclusion of `law` on `(a, b)`.
pub fn check_law(
    law: LawId,
    a: &DenseTensor,
    b: &DenseTensor,
    opts: &InverseOptions,
) -> Result<LawReport> {
    let b = if law.is_single() { a } else { b };
    check_shapes(law, a, b)?;
    let spec = law_spec(law);
    let mut ev = Evaluator::new(a, b, opts);
    let hypotheses = spec
        .premises
        .iter()
        .map(|p| ev.item(p))
        .collect::<Result<Vec<_>>>()?;
    let (clauses, conclusions) = match &spec.body {
        LawBody::Implication(items) => {
            let c = items
                .iter()
                .map(|i| ev.item(i))
                .collect::<Result<Vec<_>>>()?;
            (Vec::new(), c)
        }
        LawBody::Equivalence(items) => {
            let cl = items
                .iter()
                .map(|i| ev.item(i))
                .collect::<Result<Vec<_>>>()?;
            let mut dirs = Vec::new();
            for (i, x) in cl.iter().enumerate() {
                for (j, y) in cl.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    dirs.push(Check {
                        name: format!("{} => {}", items[i].label, items[j].label),
                        residual: if x.pass { y.residual } else { 0.0 },
                        pass: !x.pass || y.pass,
                    });
                }
            }
            (cl, dirs)
        }
    };
    let conclusion_residual = conclusions.iter().map(|c| c.residual).fold(0.0, f64::max);
    let conclusion_pass = conclusions.iter().all(|c| c.pass);
    let all_hyp = hypotheses.iter().all(|h| h.pass);
    Ok(LawReport {
        law,
        hypotheses,
        clauses,
        conclusions,
        conclusion_residual,
        conclusion_pass,
        implication_ok: !all_hyp || conclusion_pass,
    })
}

/// Reports for trials `0..trials`, each on the tensors of `gen.for_trial(i)`.
/// Trials run in parallel; the output is ordered by trial index.
pub fn run_trials(
    law: LawId,
    gen: &GeneratorSpec,
    trials: usize,
    opts: &InverseOptions,
) -> Result<Vec<LawReport>> {
    if trials == 0 {
        return Err(Error::InvalidOption("trials must be at least 1".into()));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let (a, b) = generate(&gen.for_trial(i))?.into_pair();
            check_law(law, &a, &b, opts)
        })
        .collect()
}

/// Reports for trials `0..trials` cycling through `law_families(law)`; trial
/// `i` uses family `i % families` with the per-trial seed of `i`.
pub fn run_family_trials(
    law: LawId,
    shape: &TensorShape,
    seed: u64,
    trials: usize,
    opts: &InverseOptions,
) -> Result<Vec<LawReport>> {
    if trials == 0 {
        return Err(Error::InvalidOption("trials must be at least 1".into()));
    }
    let families = law_families(law);
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let family = families[i as usize % families.len()].clone();
            let spec = GeneratorSpec::new(shape.clone(), family, seed).for_trial(i);
            let (a, b) = generate(&spec)?.into_pair();
            check_law(law, &a, &b, opts)
        })
        .collect()
}

/// Reports whose implication fails.
pub fn counterexample_search(
    law: LawId,
    gen: &GeneratorSpec,
    trials: usize,
    opts: &InverseOptions,
) -> Result<Vec<LawReport>> {
    Ok(run_trials(law, gen, trials, opts)?
        .into_iter()
        .filter(|r| !r.implication_ok)
        .collect())
}
