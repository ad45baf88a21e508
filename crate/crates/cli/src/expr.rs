//! Element expressions such as `2*x*g - 1/3*z + g^2`.
//!
//! ```text
//! expr   := [sign] term (sign term)*
//! term   := factor ('*'? factor)*
//! factor := number | 'i' | symbol ['^' digits] | '(' gaussian ')'
//! symbol := x | y | z | g
//! ```
//! Whitespace is ignored. Columns in errors are 1-based.

use opgraph_core::fp_algebra::{FPElement, FPPresentation, Symbol};
use opgraph_core::scalar::parse_gaussian;
use opgraph_core::{Error, GaussianRational, Result, Scalar};

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            column: self.column(),
            message: message.into(),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|&c| f(c)) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }
}

fn starts_factor(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '(' || c == '.'
}

/// One factor folded into the running coefficient and word.
fn factor(lex: &mut Lexer, coeff: &mut GaussianRational, word: &mut Vec<Symbol>) -> Result<()> {
    let Some(c) = lex.peek() else {
        return Err(lex.error("expected a factor"));
    };
    let column = lex.column();
    if c.is_ascii_digit() || c == '.' {
        let token = lex.take_while(|c| c.is_ascii_digit() || c == '.' || c == '/');
        let value = parse_gaussian(&token).map_err(|e| shift(e, column - 1))?;
        *coeff = coeff.clone() * value;
    } else if c == '(' {
        lex.pos += 1;
        let start = lex.pos;
        let mut depth = 1;
        while let Some(&ch) = lex.chars.get(lex.pos) {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if depth == 0 {
                break;
            }
            lex.pos += 1;
        }
        if depth != 0 {
            return Err(Error::Parse {
                column,
                message: "unbalanced '('".into(),
            });
        }
        let inner: String = lex.chars[start..lex.pos].iter().collect();
        lex.pos += 1;
        let value = parse_gaussian(&inner).map_err(|e| shift(e, start))?;
        *coeff = coeff.clone() * value;
    } else if c == 'i' {
        lex.pos += 1;
        *coeff = coeff.clone() * GaussianRational::imag_unit();
    } else if c.is_alphabetic() {
        let symbol = Symbol::from_char(c).map_err(|_| Error::Parse {
            column,
            message: format!("unknown symbol '{c}'"),
        })?;
        lex.pos += 1;
        let mut power = 1usize;
        if lex.peek() == Some('^') {
            lex.pos += 1;
            lex.skip_ws();
            let digits = lex.take_while(|c| c.is_ascii_digit());
            power = digits
                .parse()
                .map_err(|_| lex.error("expected a nonnegative integer exponent"))?;
        }
        word.extend(std::iter::repeat_n(symbol, power));
    } else {
        return Err(lex.error(format!("unexpected character '{c}'")));
    }
    Ok(())
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { column, message } => Error::Parse {
            column: column + offset,
            message,
        },
        other => other,
    }
}

/// Parses `text` into words with Gaussian-rational coefficients.
pub fn parse_terms(text: &str) -> Result<Vec<(Vec<Symbol>, GaussianRational)>> {
    let mut lex = Lexer {
        chars: text.chars().collect(),
        pos: 0,
    };
    if lex.peek().is_none() {
        return Err(Error::Parse {
            column: 1,
            message: "empty expression".into(),
        });
    }
    let mut terms = Vec::new();
    let mut first = true;
    loop {
        let mut sign = GaussianRational::one();
        match lex.peek() {
            Some('+') => lex.pos += 1,
            Some('-') => {
                lex.pos += 1;
                sign = -sign;
            }
            Some(_) if first => {}
            Some(c) => return Err(lex.error(format!("expected '+' or '-', found '{c}'"))),
            None => break,
        }
        first = false;
        let mut coeff = sign;
        let mut word = Vec::new();
        factor(&mut lex, &mut coeff, &mut word)?;
        loop {
            match lex.peek() {
                Some('*') => {
                    lex.pos += 1;
                    factor(&mut lex, &mut coeff, &mut word)?;
                }
                Some(c) if starts_factor(c) => factor(&mut lex, &mut coeff, &mut word)?,
                _ => break,
            }
        }
        terms.push((word, coeff));
    }
    Ok(terms)
}

/// Parsed and normal-formed element of A_theta.
pub fn parse_element<S: Scalar>(text: &str, pres: &FPPresentation<S>) -> Result<FPElement<S>> {
    let terms = parse_terms(text)?
        .into_iter()
        .map(|(w, c)| (w, S::from_gaussian(&c)))
        .collect();
    Ok(pres.element_from_terms(terms))
}
