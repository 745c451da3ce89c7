use std::fmt::Write;

use super::{Expr, LValue, Program, Stmt, UnOp, VarKind};

/// Canonical source text for `p`. Parsing the result yields `p` again.
pub fn render_source(p: &Program) -> String {
    let mut out = String::new();
    for v in &p.vars {
        match v.kind {
            VarKind::Scalar => {
                let _ = writeln!(out, "var {} : {} = {}", v.name, v.width, v.init[0]);
            }
            VarKind::Array(len) => {
                let init: Vec<String> = v.init.iter().map(u32::to_string).collect();
                let _ = writeln!(out, "array {} : {} [{}] = {}", v.name, v.width, len, init.join(", "));
            }
        }
    }
    block(p, &p.body, 0, &mut out);
    out
}

fn cost_suffix(cost: u32) -> String {
    if cost == 1 {
        String::new()
    } else {
        format!(" cost {cost}")
    }
}

fn block(p: &Program, stmts: &[Stmt], depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::Assign { target, value, cost } => {
                let lhs = match target {
                    LValue::Var(v) => p.vars[*v].name.clone(),
                    LValue::Elem(v, i) => format!("{}[{}]", p.vars[*v].name, expr(p, i, false)),
                };
                let _ = writeln!(out, "{pad}{lhs} = {}{}", expr(p, value, false), cost_suffix(*cost));
            }
            Stmt::If { cond, then_branch, else_branch } => {
                let _ = writeln!(out, "{pad}if {} {{", expr(p, cond, false));
                block(p, then_branch, depth + 1, out);
                if else_branch.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    block(p, else_branch, depth + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            Stmt::While { cond, body } => {
                let _ = writeln!(out, "{pad}while {} {{", expr(p, cond, false));
                block(p, body, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            Stmt::Assert { index } => {
                let a = &p.assertions[*index];
                let _ = writeln!(out, "{pad}assert {}{} : {}", a.id, cost_suffix(a.cost), expr(p, &a.predicate, false));
            }
            Stmt::Output { value, cost } => {
                let _ = writeln!(out, "{pad}output {}{}", expr(p, value, false), cost_suffix(*cost));
            }
        }
    }
}

fn expr(p: &Program, e: &Expr, nested: bool) -> String {
    match e {
        Expr::Const(c) => c.to_string(),
        Expr::Var(v) => p.vars[*v].name.clone(),
        Expr::Elem(v, i) => format!("{}[{}]", p.vars[*v].name, expr(p, i, false)),
        Expr::Unary(UnOp::Not, inner) => format!("not {}", expr(p, inner, true)),
        Expr::Binary(op, l, r) => {
            let s = format!("{} {} {}", expr(p, l, true), op.symbol(), expr(p, r, true));
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
    }
}
