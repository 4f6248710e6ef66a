//! Text form of presentations:
//!
//! ```text
//! p=2; gens=x1,x2,x3; rel=x1^2*[x2,x3]
//! ```
//!
//! A word is a sequence of terms joined by `*` or juxtaposition. A term is
//! an atom with an optional integer exponent; atoms are generator names,
//! commutators `[u,v]`, parenthesised words, and `1` for the empty word.

use std::collections::HashMap;
use std::fmt;

use demushkin_core::words::{commutator, Gen, Presentation, Word};
use num_bigint::BigInt;
use num_traits::One;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DslError {
    Parse { position: usize, message: String },
    UnknownGenerator { position: usize, name: String },
    Invalid(demushkin_core::Error),
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslError::Parse { position, message } => write!(f, "parse error at {}: {}", position, message),
            DslError::UnknownGenerator { position, name } => write!(f, "unknown generator '{}' at {}", name, position),
            DslError::Invalid(e) => write!(f, "invalid presentation: {}", e),
        }
    }
}

impl std::error::Error for DslError {}

/// A presentation together with its generator names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPresentation {
    pub names: Vec<String>,
    pub presentation: Presentation,
}

impl NamedPresentation {
    /// Names `x1 .. xn`.
    pub fn standard(presentation: Presentation) -> NamedPresentation {
        let names = (1..=presentation.generator_count()).map(|i| format!("x{}", i)).collect();
        NamedPresentation { names, presentation }
    }

    pub fn render(&self) -> String {
        render_presentation(&self.presentation, &self.names)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    names: HashMap<&'a str, usize>,
}

fn is_name_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric()
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src, pos: 0, names: HashMap::new() }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Parse { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw) {
            self.pos += kw.len();
            Ok(())
        } else {
            self.err(format!("expected '{}'", kw))
        }
    }

    fn name(&mut self) -> Result<(&'a str, usize), DslError> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(is_name_start) {
            return self.err("expected a generator name");
        }
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        Ok((&self.src[start..self.pos], start))
    }

    fn integer(&mut self) -> Result<BigInt, DslError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return self.err("expected an integer");
        }
        Ok(self.src[start..self.pos].parse().expect("validated digits"))
    }

    fn atom(&mut self) -> Result<Word, DslError> {
        self.skip_ws();
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let u = self.word()?;
                self.expect(b',')?;
                let v = self.word()?;
                self.expect(b']')?;
                Ok(commutator(&u, &v))
            }
            Some(b'(') => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(b')')?;
                Ok(w)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Word::empty())
            }
            Some(c) if is_name_start(c) => {
                let (name, position) = self.name()?;
                match self.names.get(name) {
                    Some(&i) => Ok(Word::generator(Gen(i))),
                    None => Err(DslError::UnknownGenerator { position, name: name.to_string() }),
                }
            }
            _ => self.err("expected a generator, '[', '(' or '1'"),
        }
    }

    fn starts_term(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), Some(c) if c == b'[' || c == b'(' || c == b'1' || is_name_start(c))
    }

    fn term(&mut self) -> Result<Word, DslError> {
        let a = self.atom()?;
        if self.eat(b'^') {
            let k = self.integer()?;
            return Ok(a.pow(&k));
        }
        Ok(a)
    }

    fn word(&mut self) -> Result<Word, DslError> {
        let mut w = self.term()?;
        loop {
            if self.eat(b'*') {
                w = w * self.term()?;
            } else if self.starts_term() {
                w = w * self.term()?;
            } else {
                return Ok(w);
            }
        }
    }

    fn presentation(&mut self) -> Result<NamedPresentation, DslError> {
        self.keyword("p")?;
        self.expect(b'=')?;
        let p_pos = self.pos;
        let p = self.integer()?;
        let p: u64 = p.try_into().map_err(|_| DslError::Parse { position: p_pos, message: "prime out of range".into() })?;
        self.expect(b';')?;
        self.keyword("gens")?;
        self.expect(b'=')?;
        let mut names = Vec::new();
        loop {
            let (name, position) = self.name()?;
            if self.names.insert(name, names.len()).is_some() {
                return Err(DslError::Parse { position, message: format!("duplicate generator '{}'", name) });
            }
            names.push(name.to_string());
            if !self.eat(b',') {
                break;
            }
        }
        let mut relators = Vec::new();
        while self.eat(b';') {
            if self.at_end() {
                break;
            }
            self.keyword("rel")?;
            self.expect(b'=')?;
            relators.push(self.word()?);
        }
        if !self.at_end() {
            return self.err("unexpected trailing input");
        }
        let presentation = Presentation::new(p, names.len(), relators).map_err(DslError::Invalid)?;
        Ok(NamedPresentation { names, presentation })
    }
}

pub fn parse_presentation(text: &str) -> Result<NamedPresentation, DslError> {
    Parser::new(text).presentation()
}

/// Parses a word over the given generator names.
pub fn parse_word(text: &str, names: &[String]) -> Result<Word, DslError> {
    let mut parser = Parser::new(text);
    parser.names = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let w = parser.word()?;
    if !parser.at_end() {
        return parser.err("unexpected trailing input");
    }
    Ok(w)
}

pub fn render_word(w: &Word, names: &[String]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let parts: Vec<String> = w
        .syllables()
        .iter()
        .map(|(g, k)| if k.is_one() { names[g.0].clone() } else { format!("{}^{}", names[g.0], k) })
        .collect();
    parts.join("*")
}

pub fn render_presentation(pres: &Presentation, names: &[String]) -> String {
    let mut out = format!("p={}; gens={}", pres.prime(), names.join(","));
    for r in pres.relators() {
        out.push_str("; rel=");
        out.push_str(&render_word(r, names));
    }
    out
}

/// A name not in `taken`, starting from `base`.
pub fn fresh_name(base: &str, taken: &[String]) -> String {
    if !taken.iter().any(|t| t == base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{}{}", base, i)).find(|c| !taken.iter().any(|t| t == c)).expect("unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_d() {
        let np = parse_presentation("p=2; gens=x1,x2,x3; rel=x1^2*[x2,x3]").unwrap();
        assert_eq!(np.names, ["x1", "x2", "x3"]);
        assert_eq!(np.presentation.relator().unwrap().to_string(), "x1^2*x2^-1*x3^-1*x2*x3");
    }

    #[test]
    fn juxtaposition_and_groups() {
        let a = parse_presentation("p=2; gens=a,b,c; rel=a^2 b^2 c^2").unwrap();
        let b = parse_presentation("p=2;gens=a,b,c;rel=a^2*b^2*c^2;").unwrap();
        assert_eq!(a, b);
        let c = parse_presentation("p=3; gens=a,b; rel=(a b)^-2 [a,b^3]^2").unwrap();
        assert_eq!(c.render(), "p=3; gens=a,b; rel=b^-1*a^-1*b^-1*a^-2*b^-3*a*b^3*a^-1*b^-3*a*b^3");
        let e = parse_presentation("p=5; gens=x; rel=x x^-1").unwrap();
        assert_eq!(e.render(), "p=5; gens=x; rel=1");
        let none = parse_presentation("p=5; gens=x,y").unwrap();
        assert!(none.presentation.relators().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_presentation("p=3; gens=x1,x2; rel=[x1,x2"), Err(DslError::Parse { position: 27, .. })));
        assert_eq!(
            parse_presentation("p=3; gens=x1,x2; rel=x1*y"),
            Err(DslError::UnknownGenerator { position: 24, name: "y".into() })
        );
        assert!(matches!(parse_presentation("p=4; gens=x; rel=x"), Err(DslError::Invalid(_))));
        assert!(matches!(parse_presentation("p=3; gens=x,x"), Err(DslError::Parse { .. })));
        assert!(matches!(parse_presentation("p=3; gens=x; rel=x^"), Err(DslError::Parse { .. })));
        assert!(matches!(parse_presentation("q=3"), Err(DslError::Parse { position: 0, .. })));
    }

    #[test]
    fn words_over_names() {
        let names = vec!["s".to_string(), "t".to_string()];
        assert_eq!(render_word(&parse_word("[s,t] t^-1", &names).unwrap(), &names), "s^-1*t^-1*s");
        assert!(parse_word("s)", &names).is_err());
    }

    #[test]
    fn fresh_names() {
        let taken = vec!["a".to_string(), "a2".to_string()];
        assert_eq!(fresh_name("a", &taken), "a3");
        assert_eq!(fresh_name("b", &taken), "b");
    }
}
