use super::{BinOp, Condition, Expr, ExprError, Func, Relation};

/// Words that cannot be used as variable names.
pub const RESERVED: &[&str] = &["piecewise", "exp", "ln", "sin", "cos", "abs"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Colon,
    Semi,
    Rel(Relation),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v, _) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Rel(_) => "comparison".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b':' => Tok::Colon,
            b';' => Tok::Semi,
            b'<' | b'>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                if eq {
                    i += 1;
                }
                Tok::Rel(match (c, eq) {
                    (b'<', false) => Relation::Lt,
                    (b'<', true) => Relation::Le,
                    (_, false) => Relation::Gt,
                    (_, true) => Relation::Ge,
                })
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let mut integral = true;
                if j < bytes.len() && bytes[j] == b'.' {
                    integral = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        integral = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[start..j];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
                if !v.is_finite() {
                    return Err(syntax(start, format!("number `{lit}` is not finite")));
                }
                i = j;
                out.push((Tok::Number(v, integral), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                i = j;
                out.push((Tok::Ident(text[start..j].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
}

/// Parses `text` against the declared variable names.
pub fn parse(text: &str, vars: &[String]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(syntax(p.offset(), format!("expected operator, found {}", t.describe()))),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {what}, found {}", self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    // Unary minus binds looser than `^`: `-x^2` is `-(x^2)`.
    fn factor(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let k = match self.bump() {
            Tok::Number(v, true) if v <= f64::from(u32::MAX) => v as u32,
            t => {
                return Err(syntax(
                    at,
                    format!("exponent must be a nonnegative integer literal, found {}", t.describe()),
                ))
            }
        };
        if *self.peek() == Tok::Caret {
            return Err(syntax(self.offset(), "chained exponents need parentheses"));
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Number(v, _) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    if name == "piecewise" {
                        self.bump();
                        return self.piecewise();
                    }
                    let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        offset: at,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(syntax(self.offset(), format!("expected `(` after `{name}`")));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ExprError::UnknownVariable { name, offset: at }),
                }
            }
            t => Err(syntax(at, format!("expected operand, found {}", t.describe()))),
        }
    }

    // After `piecewise(`: (cond ':' expr ';')* expr ')'
    fn piecewise(&mut self) -> Result<Expr, ExprError> {
        let mut branches = Vec::new();
        loop {
            let first = self.expr()?;
            match self.peek().clone() {
                Tok::Rel(relation) => {
                    self.bump();
                    let rhs = self.expr()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let body = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    branches.push((
                        Condition {
                            lhs: first,
                            relation,
                            rhs,
                        },
                        body,
                    ));
                }
                _ => {
                    self.expect(Tok::RParen, "`)` closing piecewise")?;
                    return Ok(Expr::Piecewise {
                        branches,
                        otherwise: Box::new(first),
                    });
                }
            }
        }
    }
}
