use std::collections::HashMap;

use super::lexer::{tokenize, Tok};
use super::{AssertionDecl, BinOp, Expr, LValue, Program, Stmt, UnOp, VarDecl, VarKind, Width};
use crate::error::{ParseError, Span};

/// Parses and validates workload source.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars: Vec::new(),
        var_ids: HashMap::new(),
        assertions: Vec::new(),
        assertion_ids: HashMap::new(),
    };
    while matches!(p.peek(), Tok::Var | Tok::Array) {
        p.var_decl()?;
    }
    let mut body = Vec::new();
    while *p.peek() != Tok::Eof {
        body.push(p.stmt()?);
    }
    Ok(Program { vars: p.vars, body, assertions: p.assertions })
}

/// Context for an expression currently being parsed.
#[derive(Clone, Copy)]
enum Ctx<'a> {
    Workload,
    Predicate { id: &'a str, at: Span },
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
    vars: Vec<VarDecl>,
    var_ids: HashMap<String, usize>,
    assertions: Vec<AssertionDecl>,
    assertion_ids: HashMap<String, Span>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { at: self.span(), message: message.into() })
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            self.syntax(format!("expected {}, found {}", want.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let at = self.bump().1;
                Ok((name, at))
            }
            other => self.syntax(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            ref other => self.syntax(format!("expected integer, found {}", other.describe())),
        }
    }

    fn width(&mut self) -> Result<Width, ParseError> {
        let at = self.span();
        let bits = self.int()?;
        Width::from_bits(bits)
            .ok_or(ParseError::Syntax { at, message: format!("width must be 8, 16 or 32, found {bits}") })
    }

    fn var_decl(&mut self) -> Result<(), ParseError> {
        let is_array = self.bump().0 == Tok::Array;
        let (name, at) = self.ident()?;
        if self.var_ids.contains_key(&name) {
            return Err(ParseError::Duplicate { name, at });
        }
        self.expect(Tok::Colon)?;
        let width = self.width()?;
        let kind = if is_array {
            self.expect(Tok::LBracket)?;
            let len_at = self.span();
            let len = self.int()?;
            if len == 0 || len > u32::MAX as u64 {
                return Err(ParseError::Syntax { at: len_at, message: "array length must be at least 1".into() });
            }
            self.expect(Tok::RBracket)?;
            VarKind::Array(len as usize)
        } else {
            VarKind::Scalar
        };
        self.expect(Tok::Assign)?;
        let mut init = vec![self.int()?];
        if is_array {
            while *self.peek() == Tok::Comma {
                self.bump();
                init.push(self.int()?);
            }
        }
        for &value in &init {
            if value > width.mask() as u64 {
                return Err(ParseError::InitOutOfRange { name, value, width: width.bits() });
            }
        }
        if let VarKind::Array(len) = kind {
            if init.len() == 1 {
                init = vec![init[0]; len];
            } else if init.len() != len {
                return Err(ParseError::Syntax {
                    at,
                    message: format!("array `{name}` has length {len} but {} initial values", init.len()),
                });
            }
        }
        self.var_ids.insert(name.clone(), self.vars.len());
        self.vars.push(VarDecl { name, kind, width, init: init.into_iter().map(|v| v as u32).collect() });
        Ok(())
    }

    fn cost(&mut self) -> Result<u32, ParseError> {
        if *self.peek() != Tok::Cost {
            return Ok(1);
        }
        self.bump();
        let at = self.span();
        let n = self.int()?;
        if n == 0 || n > u32::MAX as u64 {
            return Err(ParseError::Syntax { at, message: "cost must be a positive integer".into() });
        }
        Ok(n as u32)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.syntax("unterminated block, expected `}`");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Ident(_) => {
                let target = self.lvalue()?;
                self.expect(Tok::Assign)?;
                let value = self.expr(Ctx::Workload)?;
                let cost = self.cost()?;
                Ok(Stmt::Assign { target, value, cost })
            }
            Tok::If => {
                self.bump();
                let cond = self.expr(Ctx::Workload)?;
                let then_branch = self.block()?;
                let else_branch = if *self.peek() == Tok::Else {
                    self.bump();
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(Stmt::If { cond, then_branch, else_branch })
            }
            Tok::While => {
                self.bump();
                let cond = self.expr(Ctx::Workload)?;
                let body = self.block()?;
                Ok(Stmt::While { cond, body })
            }
            Tok::Assert => {
                self.bump();
                let (id, at) = self.ident()?;
                if self.assertion_ids.contains_key(&id) {
                    return Err(ParseError::Duplicate { name: id, at });
                }
                let cost = self.cost()?;
                self.expect(Tok::Colon)?;
                let predicate = self.expr(Ctx::Predicate { id: &id, at })?;
                if *self.peek() == Tok::Assign {
                    return Err(ParseError::ImpureAssertion { id, at });
                }
                self.assertion_ids.insert(id.clone(), at);
                self.assertions.push(AssertionDecl { id, cost, predicate });
                Ok(Stmt::Assert { index: self.assertions.len() - 1 })
            }
            Tok::Output => {
                self.bump();
                let value = self.expr(Ctx::Workload)?;
                let cost = self.cost()?;
                Ok(Stmt::Output { value, cost })
            }
            other => self.syntax(format!("expected statement, found {}", other.describe())),
        }
    }

    fn resolve(&self, name: &str, at: Span) -> Result<usize, ParseError> {
        self.var_ids.get(name).copied().ok_or_else(|| ParseError::Undeclared { name: name.to_string(), at })
    }

    fn lvalue(&mut self) -> Result<LValue, ParseError> {
        let (name, at) = self.ident()?;
        let var = self.resolve(&name, at)?;
        if *self.peek() == Tok::LBracket {
            if !self.vars[var].is_array() {
                return Err(ParseError::Syntax { at, message: format!("`{name}` is not an array") });
            }
            self.bump();
            let index = self.expr(Ctx::Workload)?;
            self.expect(Tok::RBracket)?;
            Ok(LValue::Elem(var, Box::new(index)))
        } else if self.vars[var].is_array() {
            Err(ParseError::Syntax { at, message: format!("array `{name}` needs an index") })
        } else {
            Ok(LValue::Var(var))
        }
    }

    fn expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        self.or_expr(ctx)
    }

    fn or_expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr(ctx)?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and_expr(ctx)?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr(ctx)?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.cmp_expr(ctx)?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let lhs = self.add_expr(ctx)?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr(ctx)?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr(ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr(ctx)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let mut lhs = self.unary(ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary(ctx)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Not {
            self.bump();
            let inner = self.unary(ctx)?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(inner)));
        }
        self.primary(ctx)
    }

    fn primary(&mut self, ctx: Ctx<'_>) -> Result<Expr, ParseError> {
        let at = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                u32::try_from(n)
                    .map(Expr::Const)
                    .map_err(|_| ParseError::Syntax { at, message: format!("constant {n} exceeds 32 bits") })
            }
            Tok::Ident(name) => {
                self.bump();
                let var = self.resolve(&name, at)?;
                if *self.peek() == Tok::LBracket {
                    if !self.vars[var].is_array() {
                        return Err(ParseError::Syntax { at, message: format!("`{name}` is not an array") });
                    }
                    self.bump();
                    let index = self.expr(ctx)?;
                    self.expect(Tok::RBracket)?;
                    Ok(Expr::Elem(var, Box::new(index)))
                } else if self.vars[var].is_array() {
                    Err(ParseError::Syntax { at, message: format!("array `{name}` needs an index") })
                } else {
                    Ok(Expr::Var(var))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(ctx)?;
                if *self.peek() == Tok::Assign {
                    return match ctx {
                        Ctx::Predicate { id, at } => Err(ParseError::ImpureAssertion { id: id.to_string(), at }),
                        Ctx::Workload => self.syntax("assignment is a statement, not an expression"),
                    };
                }
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => self.syntax(format!("expected expression, found {}", other.describe())),
        }
    }
}
