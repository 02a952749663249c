//! Recursive-descent parser for textual STL.
//!
//! Precedence, loosest first: `->` (right-assoc), `or`, `and`, then the
//! prefix operators `not`, `alw`/`G`, `ev`/`F`. Until is only written in
//! parenthesized infix form, `(phi U[a,b] psi)`.

use super::ast::{AffineExpr, Comparator, Formula, Interval};
use super::StlError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Cmp(Comparator),
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const KEYWORDS: &[&str] = &["not", "and", "or", "alw", "G", "ev", "F", "U"];

fn lex(text: &str) -> Result<Vec<Token>, StlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if !c.is_ascii() {
            return Err(StlError::syntax(line, col, format!("non-ASCII character `{c}`")));
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value: f64 = lit
                .parse()
                .map_err(|_| StlError::syntax(line, col, format!("malformed number `{lit}`")))?;
            col += i - start;
            push(&mut out, Tok::Num(value));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('<', Some('=')) => (Tok::Cmp(Comparator::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(Comparator::Ge), 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('<', _) => (Tok::Cmp(Comparator::Lt), 1),
            ('>', _) => (Tok::Cmp(Comparator::Gt), 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (',', _) => (Tok::Comma, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => {
                return Err(StlError::syntax(line, col, format!("unknown operator `{c}`")));
            }
        };
        push(&mut out, tok);
        i += width;
        col += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

/// Parses a textual STL formula.
pub fn parse(text: &str) -> Result<Formula, StlError> {
    if text.trim().is_empty() {
        return Err(StlError::syntax(1, 1, "empty specification"));
    }
    let toks = lex(text)?;
    let end = text
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.len() + 1))
        .unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, end };
    let f = p.implies()?;
    if let Some(t) = p.peek_token() {
        return Err(StlError::syntax(
            t.line,
            t.column,
            format!("unexpected {}", describe(&t.tok)),
        ));
    }
    Ok(f)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("number {v}"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Cmp(c) => format!("`{}`", c.symbol()),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Arrow => "`->`".into(),
    }
}

impl Parser {
    fn peek_token(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn here(&self) -> (usize, usize) {
        self.peek_token()
            .map(|t| (t.line, t.column))
            .unwrap_or(self.end)
    }

    fn error_here(&self, message: impl Into<String>) -> StlError {
        let (line, column) = self.here();
        StlError::syntax(line, column, message)
    }

    fn expect(&mut self, want: Tok) -> Result<(), StlError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error_here(format!(
                "expected {}, found {}",
                describe(&want),
                describe(t)
            ))),
            None => Err(self.error_here(format!("expected {}, found end of input", describe(&want)))),
        }
    }

    fn implies(&mut self) -> Result<Formula, StlError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, StlError> {
        let mut acc = self.and()?;
        while self.is_keyword("or") {
            self.pos += 1;
            let rhs = self.and()?;
            acc = Formula::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, StlError> {
        let mut acc = self.unary()?;
        while self.is_keyword("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, StlError> {
        let kw = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.primary(),
        };
        match kw.as_str() {
            "not" => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            "alw" | "G" => {
                self.pos += 1;
                let i = self.interval()?;
                Ok(Formula::Always(i, Box::new(self.unary()?)))
            }
            "ev" | "F" => {
                self.pos += 1;
                let i = self.interval()?;
                Ok(Formula::Eventually(i, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn interval(&mut self) -> Result<Interval, StlError> {
        let (line, column) = self.here();
        self.expect(Tok::LBrack)?;
        let a = self.interval_bound()?;
        self.expect(Tok::Comma)?;
        let b = self.interval_bound()?;
        self.expect(Tok::RBrack)?;
        Interval::new(a, b).ok_or(StlError::Interval {
            line,
            column,
            start: a,
            end: b,
        })
    }

    fn interval_bound(&mut self) -> Result<f64, StlError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(t) => {
                let msg = format!("expected interval bound, found {}", describe(t));
                Err(self.error_here(msg))
            }
            None => Err(self.error_here("expected interval bound, found end of input")),
        }
    }

    fn primary(&mut self) -> Result<Formula, StlError> {
        let start = self.pos;
        let atom_err = match self.atom() {
            Ok(f) => return Ok(f),
            Err(e) => (self.pos, e),
        };
        self.pos = start;
        if self.peek() != Some(&Tok::LParen) {
            return Err(atom_err.1);
        }
        match self.parenthesized() {
            Ok(f) => Ok(f),
            Err(e) => {
                // Report whichever reading got further into the input.
                if self.pos >= atom_err.0 {
                    Err(e)
                } else {
                    Err(atom_err.1)
                }
            }
        }
    }

    fn parenthesized(&mut self) -> Result<Formula, StlError> {
        self.expect(Tok::LParen)?;
        let lhs = self.implies()?;
        if self.is_keyword("U") {
            self.pos += 1;
            let i = self.interval()?;
            let rhs = self.implies()?;
            self.expect(Tok::RParen)?;
            return Ok(Formula::Until(i, Box::new(lhs), Box::new(rhs)));
        }
        self.expect(Tok::RParen)?;
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Formula, StlError> {
        let lhs = self.expr()?;
        let cmp = match self.peek() {
            Some(Tok::Cmp(c)) => *c,
            Some(t) => {
                let msg = format!("expected comparison operator, found {}", describe(t));
                return Err(self.error_here(msg));
            }
            None => return Err(self.error_here("expected comparison operator, found end of input")),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Formula::atom(lhs, cmp, rhs))
    }

    fn expr(&mut self) -> Result<AffineExpr, StlError> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => 1.0,
                Some(Tok::Minus) => -1.0,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add_scaled(rhs, sign);
        }
    }

    fn term(&mut self) -> Result<AffineExpr, StlError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = match (acc.as_constant(), rhs.as_constant()) {
                        (Some(k), _) => rhs.scale(k),
                        (_, Some(k)) => acc.scale(k),
                        _ => return Err(self.error_here("product of two signals is not affine")),
                    };
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    match rhs.as_constant() {
                        Some(k) if k != 0.0 => acc = acc.scale(1.0 / k),
                        _ => return Err(self.error_here("division must be by a non-zero constant")),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<AffineExpr, StlError> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.scale(-1.0))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.factor()
            }
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(AffineExpr::constant(v))
            }
            Some(Tok::Ident(name)) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.error_here(format!("unexpected keyword `{name}`")));
                }
                self.pos += 1;
                Ok(AffineExpr::signal(name))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(t) => Err(self.error_here(format!("expected expression, found {}", describe(&t)))),
            None => Err(self.error_here("expected expression, found end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str, cmp: Comparator, c: f64) -> Formula {
        Formula::atom(AffineExpr::signal(name), cmp, AffineExpr::constant(c))
    }

    #[test]
    fn always_atom() {
        let f = parse("alw[0,10](speed < 120)").unwrap();
        assert_eq!(
            f,
            Formula::Always(
                Interval::new(0.0, 10.0).unwrap(),
                Box::new(atom("speed", Comparator::Lt, 120.0))
            )
        );
    }

    #[test]
    fn conjunction_of_temporal() {
        let f = parse("ev[0,5](x > 0.9) and alw[0,5](x < 2)").unwrap();
        let i = Interval::new(0.0, 5.0).unwrap();
        assert_eq!(
            f,
            Formula::And(
                Box::new(Formula::Eventually(i, Box::new(atom("x", Comparator::Gt, 0.9)))),
                Box::new(Formula::Always(i, Box::new(atom("x", Comparator::Lt, 2.0)))),
            )
        );
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(matches!(parse("alw[5,2](x > 0)"), Err(StlError::Interval { .. })));
    }

    #[test]
    fn precedence() {
        // not > and > or > ->
        let f = parse("not a > 0 and b > 0 or c > 0 -> d > 0").unwrap();
        let expected = Formula::Implies(
            Box::new(Formula::Or(
                Box::new(Formula::And(
                    Box::new(Formula::Not(Box::new(atom("a", Comparator::Gt, 0.0)))),
                    Box::new(atom("b", Comparator::Gt, 0.0)),
                )),
                Box::new(atom("c", Comparator::Gt, 0.0)),
            )),
            Box::new(atom("d", Comparator::Gt, 0.0)),
        );
        assert_eq!(f, expected);

        // temporal operators bind tighter than `and`
        let f = parse("G[0,1] x > 0 and y > 0").unwrap();
        assert!(matches!(f, Formula::And(ref l, _) if matches!(**l, Formula::Always(..))));
    }

    #[test]
    fn affine_atoms() {
        let f = parse("alw[0,100](y5 - y4 <= 40)").unwrap();
        let Formula::Always(_, inner) = f else { panic!() };
        let Formula::Atom(a) = *inner else { panic!() };
        assert_eq!(a.lhs.terms, vec![("y5".to_string(), 1.0), ("y4".to_string(), -1.0)]);
        assert_eq!(a.cmp, Comparator::Le);

        let f = parse("(2*(x - 1) + y/4) >= -3").unwrap();
        let Formula::Atom(a) = f else { panic!() };
        assert_eq!(a.lhs.terms, vec![("x".to_string(), 2.0), ("y".to_string(), 0.25)]);
        assert_eq!(a.lhs.constant, -2.0);
        assert_eq!(a.rhs.as_constant(), Some(-3.0));
    }

    #[test]
    fn until_form() {
        let f = parse("(x > 0 U[1,2] y < 3)").unwrap();
        assert!(matches!(f, Formula::Until(i, _, _) if i.start == 1.0 && i.end == 2.0));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("alw[0,1](x > 0) and\n  (y & 1)") {
            Err(StlError::Syntax { line, column, message }) => {
                assert_eq!((line, column), (2, 6));
                assert!(message.contains("unknown operator"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x * y > 0"), Err(StlError::Syntax { .. })));
        assert!(matches!(parse("alw[0,1](x > 0"), Err(StlError::Syntax { .. })));
        assert!(matches!(parse("x >"), Err(StlError::Syntax { .. })));
        assert!(matches!(parse("   "), Err(StlError::Syntax { .. })));
        assert!(matches!(parse("and > 0"), Err(StlError::Syntax { .. })));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "alw[0,10](ev[0,5](x > 0))",
            "(a > 1 U[0.5,2] not b <= -2.5)",
            "alw[2,4](x>0) and ev[0,9](y<1) -> 3*x - y >= 0.25",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{text}");
        }
    }
}
