//! A small imperative workload language with executable assertions.
//!
//! A program is a list of variable declarations followed by statements:
//!
//! ```text
//! var a : 8 = 3
//! array xs : 16 [4] = 0
//! a = a + 1 cost 2
//! assert a_ok cost 2 : a == 4
//! output a
//! ```
//!
//! Arithmetic is unsigned and wraps at 32 bits; stores truncate to the
//! declared width of the target. Assertion predicates cannot contain
//! assignments, so executing one never changes workload state.

mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use parser::parse;
pub use printer::render_source;

use crate::error::Result;

/// Bits per element of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Width {
    W8,
    W16,
    W32,
}

impl Width {
    pub fn bits(self) -> u32 {
        match self {
            Width::W8 => 8,
            Width::W16 => 16,
            Width::W32 => 32,
        }
    }

    pub fn mask(self) -> u32 {
        match self {
            Width::W8 => 0xff,
            Width::W16 => 0xffff,
            Width::W32 => u32::MAX,
        }
    }

    pub fn from_bits(bits: u64) -> Option<Width> {
        match bits {
            8 => Some(Width::W8),
            16 => Some(Width::W16),
            32 => Some(Width::W32),
            _ => None,
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Scalar,
    Array(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub width: Width,
    /// One value per element.
    pub init: Vec<u32>,
}

impl VarDecl {
    pub fn len(&self) -> usize {
        match self.kind {
            VarKind::Scalar => 1,
            VarKind::Array(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_array(&self) -> bool {
        matches!(self.kind, VarKind::Array(_))
    }
}

/// Index into [`Program::vars`].
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u32),
    Var(VarId),
    Elem(VarId, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Var(VarId),
    Elem(VarId, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        target: LValue,
        value: Expr,
        cost: u32,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    /// Executes [`Program::assertions`]`[index]`.
    Assert {
        index: usize,
    },
    Output {
        value: Expr,
        cost: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionDecl {
    pub id: String,
    pub cost: u32,
    pub predicate: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub vars: Vec<VarDecl>,
    pub body: Vec<Stmt>,
    /// In order of textual appearance; the position is the assertion's bit
    /// in every configuration.
    pub assertions: Vec<AssertionDecl>,
}

/// One row of [`list_assertions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionInfo {
    pub index: usize,
    pub id: String,
    pub cost: u32,
}

pub fn list_assertions(p: &Program) -> Vec<AssertionInfo> {
    p.assertions.iter().enumerate().map(|(index, a)| AssertionInfo { index, id: a.id.clone(), cost: a.cost }).collect()
}

impl Program {
    pub fn n_assertions(&self) -> usize {
        self.assertions.len()
    }

    /// Hex SHA-256 of the canonical source rendering.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let hash = Sha256::digest(render_source(self).as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Count of `assert` statements (static occurrences) in the body.
    pub fn count_assert_statements(&self) -> usize {
        fn walk(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::Assert { .. } => 1,
                    Stmt::If { then_branch, else_branch, .. } => walk(then_branch) + walk(else_branch),
                    Stmt::While { body, .. } => walk(body),
                    _ => 0,
                })
                .sum()
        }
        walk(&self.body)
    }
}

impl std::str::FromStr for Program {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(parse(s)?)
    }
}
