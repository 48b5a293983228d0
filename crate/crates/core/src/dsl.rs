//! A small text language for string diagrams.
//!
//! ```text
//! expr   := term { "." term }          composition, `f . g` is f after g
//! term   := factor { "*" factor }      tensor product
//! factor := atom { "^d" | "^t" | "^c" }
//! atom   := prim "(" args ")" | NAME | "(" expr ")" | NUMBER
//! args   := [ arg { "," arg } ]        arg := NAME [ "^op" ]
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{QsyncError, Result};
use crate::qset::{comult, counit, mult, share_wires, unit, wire, QuantumSet};
use crate::tensor::{c, dual_wires, signature, Morphism, Wire};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Id,
    M,
    U,
    Delta,
    Eps,
    Swap,
    Cup,
    Cap,
    Share,
}

impl Prim {
    pub const ALL: [Prim; 9] = [
        Prim::Id,
        Prim::M,
        Prim::U,
        Prim::Delta,
        Prim::Eps,
        Prim::Swap,
        Prim::Cup,
        Prim::Cap,
        Prim::Share,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Id => "id",
            Prim::M => "m",
            Prim::U => "u",
            Prim::Delta => "delta",
            Prim::Eps => "eps",
            Prim::Swap => "swap",
            Prim::Cup => "cup",
            Prim::Cap => "cap",
            Prim::Share => "share",
        }
    }

    pub fn from_name(s: &str) -> Option<Prim> {
        Prim::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modifier {
    Dagger,
    Transpose,
    Conjugate,
}

impl Modifier {
    fn suffix(self) -> &'static str {
        match self {
            Modifier::Dagger => "d",
            Modifier::Transpose => "t",
            Modifier::Conjugate => "c",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireArg {
    pub name: String,
    pub op: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Name(String),
    Prim(Prim, Vec<WireArg>),
    Compose(Box<Expr>, Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
    Modified(Modifier, Box<Expr>),
    Scalar(f64),
}

impl Expr {
    pub fn compose(self, g: Expr) -> Expr {
        Expr::Compose(Box::new(self), Box::new(g))
    }

    pub fn tensor(self, g: Expr) -> Expr {
        Expr::Tensor(Box::new(self), Box::new(g))
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        // 0: expr, 1: term, 2: factor
        let own = match self {
            Expr::Compose(..) => 0,
            Expr::Tensor(..) => 1,
            _ => 2,
        };
        if own < level {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Scalar(v) => write!(f, "{v}"),
            Expr::Prim(p, args) => {
                write!(f, "{}(", p.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}{}", a.name, if a.op { "^op" } else { "" })?;
                }
                write!(f, ")")
            }
            Expr::Compose(l, r) => {
                l.fmt_at(f, 0)?;
                write!(f, " . ")?;
                r.fmt_at(f, 1)
            }
            Expr::Tensor(l, r) => {
                l.fmt_at(f, 1)?;
                write!(f, " * ")?;
                r.fmt_at(f, 2)
            }
            Expr::Modified(m, child) => {
                child.fmt_at(f, 2)?;
                write!(f, "^{}", m.suffix())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Dot,
    Star,
    Caret,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> QsyncError {
    QsyncError::SyntaxError {
        line,
        column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match ch {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        let start = i;
        let tok = if let Some(t) = single {
            i += 1;
            t
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if ch.is_ascii_digit() {
            let digits = |i: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    *i += 1;
                }
            };
            digits(&mut i);
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                digits(&mut i);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    digits(&mut i);
                }
            }
            let text: String = chars[start..i].iter().collect();
            Tok::Number(
                text.parse()
                    .map_err(|_| syntax(l0, c0, format!("bad number `{text}`")))?,
            )
        } else {
            return Err(syntax(l0, c0, format!("unexpected character `{ch}`")));
        };
        col += i - start;
        out.push(Token {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(syntax(t.line, t.column, message))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        while self.peek().tok == Tok::Dot {
            self.next();
            e = e.compose(self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            e = e.tensor(self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.peek().tok == Tok::Caret {
            self.next();
            let m = match &self.peek().tok {
                Tok::Ident(s) if s == "d" => Modifier::Dagger,
                Tok::Ident(s) if s == "t" => Modifier::Transpose,
                Tok::Ident(s) if s == "c" => Modifier::Conjugate,
                _ => return self.fail("expected modifier d, t or c after `^`"),
            };
            self.next();
            e = Expr::Modified(m, Box::new(e));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().tok.clone() {
            Tok::Number(v) => {
                self.next();
                Ok(Expr::Scalar(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                if self.peek().tok != Tok::LParen {
                    return Ok(Expr::Name(name));
                }
                let prim = Prim::from_name(&name).ok_or(QsyncError::UnknownPrimitive(name))?;
                self.next();
                let args = self.args()?;
                Ok(Expr::Prim(prim, args))
            }
            Tok::End => self.fail("unexpected end of input"),
            other => self.fail(format!("unexpected token {other:?}")),
        }
    }

    fn args(&mut self) -> Result<Vec<WireArg>> {
        let mut args = Vec::new();
        if self.peek().tok == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            let name = match self.peek().tok.clone() {
                Tok::Ident(n) => n,
                _ => return self.fail("expected a wire name"),
            };
            self.next();
            let mut op = false;
            if self.peek().tok == Tok::Caret {
                self.next();
                match &self.peek().tok {
                    Tok::Ident(s) if s == "op" => op = true,
                    _ => return self.fail("expected `op` after `^` in a wire argument"),
                }
                self.next();
            }
            args.push(WireArg { name, op });
            match self.next().tok {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return self.fail("expected `,` or `)`");
                }
            }
        }
    }
}

pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.fail("trailing input");
    }
    Ok(e)
}

/// Named morphisms and wires available to an expression.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    morphisms: HashMap<String, Morphism>,
    wires: HashMap<String, Wire>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, m: Morphism) -> &mut Self {
        self.morphisms.insert(name.into(), m);
        self
    }

    pub fn bind_wire(&mut self, name: impl Into<String>, w: Wire) -> &mut Self {
        self.wires.insert(name.into(), w);
        self
    }

    /// Binds the set under its own name.
    pub fn bind_set(&mut self, set: &Arc<QuantumSet>) -> &mut Self {
        self.bind_wire(set.name().to_string(), wire(set))
    }

    pub fn morphism(&self, name: &str) -> Result<&Morphism> {
        self.morphisms
            .get(name)
            .ok_or_else(|| QsyncError::UnboundName(name.to_string()))
    }

    pub fn wire(&self, arg: &WireArg) -> Result<Wire> {
        let w = self
            .wires
            .get(&arg.name)
            .ok_or_else(|| QsyncError::UnboundName(arg.name.clone()))?;
        Ok(if arg.op { w.dual() } else { w.clone() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub dom: Vec<Wire>,
    pub cod: Vec<Wire>,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", signature(&self.dom), signature(&self.cod))
    }
}

/// An expression node annotated with its signature.
#[derive(Clone, Debug)]
pub struct Typed {
    pub sig: Signature,
    pub children: Vec<Typed>,
}

fn require_structure(p: Prim, wires: &[Wire]) -> Result<()> {
    if let Some(w) = wires.iter().find(|w| !w.is_qset()) {
        return Err(QsyncError::OppositeStructureMissing(format!(
            "{}({}) needs quantum-set wires, {w} is a plain space",
            p.name(),
            signature(wires)
        )));
    }
    Ok(())
}

fn prim_signature(p: Prim, w: Vec<Wire>) -> Result<Signature> {
    let doubled = || {
        let mut d = w.clone();
        d.extend(w.iter().cloned());
        d
    };
    let with_duals = || {
        let mut d = w.clone();
        d.extend(dual_wires(&w));
        d
    };
    if matches!(p, Prim::M | Prim::U | Prim::Delta | Prim::Eps | Prim::Share) {
        require_structure(p, &w)?;
    }
    let (dom, cod) = match p {
        Prim::Id => (w.clone(), w.clone()),
        Prim::M => (doubled(), w.clone()),
        Prim::U => (vec![], w.clone()),
        Prim::Delta => (w.clone(), doubled()),
        Prim::Eps => (w.clone(), vec![]),
        Prim::Swap => {
            if w.len() != 2 {
                return Err(QsyncError::Malformed(format!(
                    "swap takes two wires, got {}",
                    w.len()
                )));
            }
            (w.clone(), vec![w[1].clone(), w[0].clone()])
        }
        Prim::Cup => (vec![], with_duals()),
        Prim::Cap => (with_duals(), vec![]),
        Prim::Share => (with_duals(), with_duals()),
    };
    Ok(Signature { dom, cod })
}

fn prim_wires(args: &[WireArg], b: &Bindings) -> Result<Vec<Wire>> {
    args.iter().map(|a| b.wire(a)).collect()
}

/// Infers the signature of every node.
pub fn typecheck(e: &Expr, b: &Bindings) -> Result<Typed> {
    let leaf = |sig| Typed {
        sig,
        children: vec![],
    };
    Ok(match e {
        Expr::Name(n) => {
            let m = b.morphism(n)?;
            leaf(Signature {
                dom: m.dom().to_vec(),
                cod: m.cod().to_vec(),
            })
        }
        Expr::Scalar(_) => leaf(Signature {
            dom: vec![],
            cod: vec![],
        }),
        Expr::Prim(p, args) => leaf(prim_signature(*p, prim_wires(args, b)?)?),
        Expr::Compose(f, g) => {
            let tf = typecheck(f, b)?;
            let tg = typecheck(g, b)?;
            if tf.sig.dom != tg.sig.cod {
                return Err(QsyncError::mismatch(signature(&tf.sig.dom), signature(&tg.sig.cod)));
            }
            let sig = Signature {
                dom: tg.sig.dom.clone(),
                cod: tf.sig.cod.clone(),
            };
            Typed {
                sig,
                children: vec![tf, tg],
            }
        }
        Expr::Tensor(f, g) => {
            let tf = typecheck(f, b)?;
            let tg = typecheck(g, b)?;
            let mut dom = tf.sig.dom.clone();
            dom.extend(tg.sig.dom.iter().cloned());
            let mut cod = tf.sig.cod.clone();
            cod.extend(tg.sig.cod.iter().cloned());
            Typed {
                sig: Signature { dom, cod },
                children: vec![tf, tg],
            }
        }
        Expr::Modified(m, child) => {
            let t = typecheck(child, b)?;
            let s = &t.sig;
            let sig = match m {
                Modifier::Dagger => Signature {
                    dom: s.cod.clone(),
                    cod: s.dom.clone(),
                },
                Modifier::Transpose => Signature {
                    dom: dual_wires(&s.cod),
                    cod: dual_wires(&s.dom),
                },
                Modifier::Conjugate => Signature {
                    dom: dual_wires(&s.dom),
                    cod: dual_wires(&s.cod),
                },
            };
            Typed {
                sig,
                children: vec![t],
            }
        }
    })
}

fn eval_prim(p: Prim, w: &[Wire]) -> Result<Morphism> {
    match p {
        Prim::Id => Ok(Morphism::identity(w)),
        Prim::M => mult(w),
        Prim::U => unit(w),
        Prim::Delta => comult(w),
        Prim::Eps => counit(w),
        Prim::Swap => Ok(Morphism::swap(&w[0], &w[1])),
        Prim::Cup => Ok(Morphism::cup_list(w)),
        Prim::Cap => Ok(Morphism::cap_list(w)),
        Prim::Share => share_wires(w),
    }
}

fn eval_unchecked(e: &Expr, b: &Bindings) -> Result<Morphism> {
    match e {
        Expr::Name(n) => Ok(b.morphism(n)?.clone()),
        Expr::Scalar(v) => Ok(Morphism::scalar(c(*v))),
        Expr::Prim(p, args) => {
            let w = prim_wires(args, b)?;
            prim_signature(*p, w.clone())?;
            eval_prim(*p, &w)
        }
        Expr::Compose(f, g) => eval_unchecked(f, b)?.compose(&eval_unchecked(g, b)?),
        Expr::Tensor(f, g) => Ok(eval_unchecked(f, b)?.tensor(&eval_unchecked(g, b)?)),
        Expr::Modified(m, child) => {
            let x = eval_unchecked(child, b)?;
            Ok(match m {
                Modifier::Dagger => x.dagger(),
                Modifier::Transpose => x.transpose(),
                Modifier::Conjugate => x.conjugate(),
            })
        }
    }
}

/// Typechecks, then evaluates bottom-up.
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<Morphism> {
    typecheck(e, b)?;
    eval_unchecked(e, b)
}

pub fn eval_str(source: &str, b: &Bindings) -> Result<Morphism> {
    evaluate(&parse(source)?, b)
}
