//! Parser for the ASCII formula grammar.
//!
//! ```text
//! formula  := binder | iff
//! binder   := ("forall" | "exists") var "." formula
//!           | "exists>=" NAT var "." formula
//!           | ("Forall" | "Exists") SETVAR "." formula
//!           | "J" var+ "." "(" formula ")" "(" formula ")"
//! iff      := implies ("<->" iff)?
//! implies  := or ("->" implies)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "!" unary | "(" formula ")" | atom
//! atom     := IDENT "(" var ("," var)* ")" | var "=" var | SETVAR "(" var ")"
//! ```
//!
//! Element variables are lowercase identifiers; set variables are uppercase
//! identifiers starting with `X`, `Y` or `Z` (those initials are reserved:
//! they are never relation symbols). Binders scope maximally to the right;
//! `->` and `<->` associate to the right, `&` binds tighter than `|`.

use thiserror::Error;

use super::Formula;
use crate::structure::Vocabulary;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    GreaterEq,
}

struct Lexer<'a> {
    text: &'a str,
    tokens: Vec<(usize, Tok)>,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                tokens.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                tokens.push((i, Tok::Comma));
                i += 1;
            }
            '.' => {
                tokens.push((i, Tok::Dot));
                i += 1;
            }
            '=' => {
                tokens.push((i, Tok::Equals));
                i += 1;
            }
            '!' => {
                tokens.push((i, Tok::Bang));
                i += 1;
            }
            '&' => {
                tokens.push((i, Tok::Amp));
                i += 1;
            }
            '|' => {
                tokens.push((i, Tok::Pipe));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    tokens.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return err(i, "expected `->`");
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    tokens.push((i, Tok::DoubleArrow));
                    i += 3;
                } else {
                    return err(i, "expected `<->`");
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    tokens.push((i, Tok::GreaterEq));
                    i += 2;
                } else {
                    return err(i, "expected `>=`");
                }
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: usize = text[start..i].parse().map_err(|_| ParseError {
                    position: start,
                    message: "number too large".into(),
                })?;
                tokens.push((start, Tok::Nat(n)));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => return err(i, format!("unexpected character `{c}`")),
        }
    }
    Ok(tokens)
}

fn is_set_var(name: &str) -> bool {
    matches!(name.chars().next(), Some('X' | 'Y' | 'Z'))
}

fn is_lower(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    pos: usize,
    /// First-seen arity per relation symbol, for consistency checking.
    arities: Vec<(String, usize)>,
    declared: Option<&'a Vocabulary>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.lexer.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.lexer
            .tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.lexer.text.len())
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.lexer.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => err(at, format!("expected {what}")),
        }
    }

    fn expect_lower_ident(&mut self, what: &str) -> Result<String, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Ident(name)) if is_lower(&name) && !is_keyword(&name) => Ok(name),
            _ => err(at, format!("expected {what}")),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn binder(&mut self) -> Result<Formula, ParseError> {
        let at = self.here();
        let keyword = match self.bump() {
            Some(Tok::Ident(k)) => k,
            _ => return err(at, "expected a quantifier"),
        };
        match keyword.as_str() {
            "forall" | "exists" => {
                let counting = keyword == "exists" && self.peek() == Some(&Tok::GreaterEq);
                if counting {
                    self.bump();
                    let at_n = self.here();
                    let min = match self.bump() {
                        Some(Tok::Nat(n)) => n,
                        _ => return err(at_n, "expected a threshold after `exists>=`"),
                    };
                    if min == 0 {
                        return err(at_n, "counting threshold must be at least 1");
                    }
                    let var = self.expect_lower_ident("a variable")?;
                    self.expect(Tok::Dot, "`.`")?;
                    let body = self.formula()?;
                    return Ok(Formula::CountingExists {
                        min,
                        var,
                        body: Box::new(body),
                    });
                }
                let var = self.expect_lower_ident("a variable")?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.formula()?;
                Ok(if keyword == "forall" {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                })
            }
            "Forall" | "Exists" => {
                let at_v = self.here();
                let var = match self.bump() {
                    Some(Tok::Ident(v)) if is_set_var(&v) => v,
                    _ => {
                        return err(
                            at_v,
                            "expected a set variable (an identifier starting with X, Y or Z)",
                        )
                    }
                };
                self.expect(Tok::Dot, "`.`")?;
                let body = self.formula()?;
                Ok(if keyword == "Forall" {
                    Formula::forall_set(var, body)
                } else {
                    Formula::exists_set(var, body)
                })
            }
            "J" => {
                let mut vars = Vec::new();
                while let Some(Tok::Ident(name)) = self.peek() {
                    if !is_lower(name) || is_keyword(name) {
                        break;
                    }
                    vars.push(name.clone());
                    self.bump();
                }
                if vars.is_empty() {
                    return err(self.here(), "expected at least one variable after `J`");
                }
                self.expect(Tok::Dot, "`.`")?;
                self.expect(Tok::LParen, "`(`")?;
                let left = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::LParen, "`(`")?;
                let right = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::Rescher {
                    vars,
                    left: Box::new(left),
                    right: Box::new(right),
                })
            }
            _ => err(at, "expected a quantifier"),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implies()?;
        if self.peek() == Some(&Tok::DoubleArrow) {
            self.bump();
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn at_binder(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(name))
                if matches!(name.as_str(), "forall" | "exists" | "Forall" | "Exists" | "J")
        )
    }

    // A binder that appears as an operand grabs everything to its right, so
    // handling it here gives every connective the maximal-scope reading.
    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.at_binder() {
            return self.binder();
        }
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => err(self.here(), "expected a formula"),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let at = self.here();
        let name = match self.bump() {
            Some(Tok::Ident(name)) => name,
            _ => return err(at, "expected an identifier"),
        };
        if is_keyword(&name) {
            return err(at, format!("`{name}` is a reserved keyword"));
        }
        match self.peek() {
            Some(Tok::LParen) => {
                self.bump();
                let mut args = vec![self.expect_lower_ident("a variable")?];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    args.push(self.expect_lower_ident("a variable")?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if is_set_var(&name) {
                    if args.len() != 1 {
                        return err(
                            at,
                            format!("set variable `{name}` must be applied to one variable"),
                        );
                    }
                    return Ok(Formula::set_member(name, args.remove(0)));
                }
                self.check_arity(at, &name, args.len())?;
                Ok(Formula::Atom { rel: name, args })
            }
            Some(Tok::Equals) if is_lower(&name) => {
                self.bump();
                let rhs = self.expect_lower_ident("a variable")?;
                Ok(Formula::eq(name, rhs))
            }
            _ => err(self.here(), "expected `(` or `=` after an identifier"),
        }
    }

    fn check_arity(&mut self, at: usize, name: &str, arity: usize) -> Result<(), ParseError> {
        if let Some(vocab) = self.declared {
            match vocab.get(name) {
                Some(sym) if sym.arity == arity => {}
                Some(sym) => {
                    return err(
                        at,
                        format!(
                            "`{name}` is declared with arity {} but used with {arity} arguments",
                            sym.arity
                        ),
                    )
                }
                None => return err(at, format!("`{name}` is not a declared relation symbol")),
            }
        }
        match self.arities.iter().find(|(n, _)| n == name) {
            Some(&(_, first)) if first != arity => err(
                at,
                format!("`{name}` is used with arities {first} and {arity}"),
            ),
            Some(_) => Ok(()),
            None => {
                self.arities.push((name.to_string(), arity));
                Ok(())
            }
        }
    }
}

fn is_keyword(name: &str) -> bool {
    matches!(name, "forall" | "exists" | "Forall" | "Exists" | "J")
}

fn parse_inner(text: &str, declared: Option<&Vocabulary>) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        lexer: Lexer { text, tokens },
        pos: 0,
        arities: Vec::new(),
        declared,
    };
    let f = p.formula()?;
    if p.pos != p.lexer.tokens.len() {
        return err(p.here(), "unexpected trailing input");
    }
    Ok(f)
}

/// Parse a formula; relation arities only need to be consistent within the
/// formula itself.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_inner(text, None)
}

/// Parse a formula and check every relation atom against a declared
/// vocabulary.
pub fn parse_in(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    parse_inner(text, Some(vocab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn roundtrip(f: &Formula) {
        let printed = f.to_string();
        let reparsed = parse(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(&reparsed, f, "printed as {printed}");
    }

    #[test]
    fn parses_basic_forms() {
        assert_eq!(
            parse("forall y. leq(x, y)").unwrap(),
            Formula::forall("y", Formula::atom("leq", &["x", "y"]))
        );
        assert_eq!(
            parse("exists>= 2 x. R(x)").unwrap(),
            Formula::counting_exists(2, "x", Formula::atom("R", &["x"]))
        );
        assert_eq!(
            parse("J x. (P(x)) (Q(x))").unwrap(),
            Formula::rescher(
                &["x"],
                Formula::atom("P", &["x"]),
                Formula::atom("Q", &["x"])
            )
        );
        assert_eq!(
            parse("Exists X. forall x. X(x)").unwrap(),
            Formula::exists_set("X", Formula::forall("x", Formula::set_member("X", "x")))
        );
        assert_eq!(parse("x = y").unwrap(), Formula::eq("x", "y"));
    }

    #[test]
    fn precedence_and_scope() {
        // ! binds tighter than &, & tighter than |, -> is right associative,
        // <-> binds loosest.
        let f = parse("!P(x) & Q(x) | R(x) -> S(x) -> T(x)").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::or(
                    Formula::and(
                        Formula::not(Formula::atom("P", &["x"])),
                        Formula::atom("Q", &["x"])
                    ),
                    Formula::atom("R", &["x"]),
                ),
                Formula::implies(Formula::atom("S", &["x"]), Formula::atom("T", &["x"])),
            )
        );
        // Binders extend maximally to the right.
        let g = parse("P(y) & exists x. Q(x) | R(x)").unwrap();
        assert_eq!(
            g,
            Formula::and(
                Formula::atom("P", &["y"]),
                Formula::exists(
                    "x",
                    Formula::or(Formula::atom("Q", &["x"]), Formula::atom("R", &["x"]))
                )
            )
        );
        let h = parse("P(y) <-> forall x. Q(x)").unwrap();
        assert_eq!(
            h,
            Formula::iff(
                Formula::atom("P", &["y"]),
                Formula::forall("x", Formula::atom("Q", &["x"]))
            )
        );
    }

    #[test]
    fn arity_errors() {
        // Conflicting use within one formula.
        let e = parse("R(x, y) & R(x)").unwrap_err();
        assert!(e.message.contains("arities"));

        // Conflict against a declared vocabulary, with a position.
        let vocab = Vocabulary::parse(&[("R", 2)]).unwrap();
        let e = parse_in("exists x. R(x, x, x)", &vocab).unwrap_err();
        assert_eq!(e.position, 10);
        assert!(e.message.contains("arity 2"));

        let e = parse_in("Q(x)", &vocab).unwrap_err();
        assert!(e.message.contains("not a declared"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        assert_eq!(parse("forall . P(x)").unwrap_err().position, 7);
        assert!(parse("exists>= 0 x. P(x)")
            .unwrap_err()
            .message
            .contains("at least 1"));
        assert!(parse("P(x) &").is_err());
        assert!(parse("P(x) P(y)").is_err());
        // Set variables take exactly one argument.
        assert!(parse("X(x, y)").is_err());
        // Set binders need a reserved initial.
        assert!(parse("Exists R. R(x)").is_err());
    }

    #[test]
    fn set_variable_convention() {
        // Uppercase relation symbols that do not start with X/Y/Z are
        // ordinary atoms, even when unary.
        assert_eq!(parse("P(x)").unwrap(), Formula::atom("P", &["x"]));
        assert_eq!(parse("R1(x)").unwrap(), Formula::atom("R1", &["x"]));
        assert_eq!(parse("X(x)").unwrap(), Formula::set_member("X", "x"));
        assert_eq!(parse("Y2(x)").unwrap(), Formula::set_member("Y2", "x"));
    }

    fn random_formula(rng: &mut ChaCha12Rng, depth: usize) -> Formula {
        let vars = ["x", "y", "z", "w"];
        let var = |rng: &mut ChaCha12Rng| vars[rng.gen_range(0..vars.len())];
        if depth == 0 {
            return match rng.gen_range(0..4) {
                0 => Formula::atom("E", &[var(rng), var(rng)]),
                1 => Formula::atom("P", &[var(rng)]),
                2 => Formula::eq(var(rng), var(rng)),
                _ => Formula::set_member("X", var(rng)),
            };
        }
        match rng.gen_range(0..11) {
            0 => Formula::not(random_formula(rng, depth - 1)),
            1 => Formula::and(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            2 => Formula::or(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            3 => Formula::implies(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            4 => Formula::iff(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            5 => Formula::exists(var(rng), random_formula(rng, depth - 1)),
            6 => Formula::forall(var(rng), random_formula(rng, depth - 1)),
            7 => Formula::counting_exists(
                rng.gen_range(1..4),
                var(rng),
                random_formula(rng, depth - 1),
            ),
            8 => Formula::exists_set("X", random_formula(rng, depth - 1)),
            9 => Formula::forall_set("Y", random_formula(rng, depth - 1)),
            _ => Formula::rescher(
                &[var(rng)],
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
        }
    }

    #[test]
    fn print_parse_roundtrip_on_random_formulas() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
        for _ in 0..500 {
            let depth = rng.gen_range(1..6);
            roundtrip(&random_formula(&mut rng, depth));
        }
    }
}
