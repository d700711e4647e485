use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Diagnostic, DiagnosticKind};

/// 1-based source position. Positions are not part of a description's value,
/// so every span compares equal.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(BigRational),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Quote,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Number(n) => return write!(f, "number `{n}`"),
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Caret => "`^`",
            Tok::Quote => "`'`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Eq => "`=`",
            Tok::Newline => "end of line",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line_no = li as u32 + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span::new(line_no, i as u32 + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    span,
                });
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int: String = chars[start..i].iter().collect();
                let mut frac = String::new();
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let fs = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac = chars[fs..i].iter().collect();
                }
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '.') {
                    return Err(Diagnostic::new(
                        DiagnosticKind::Lexical,
                        span,
                        format!("malformed number near `{}`", chars[i]),
                    ));
                }
                out.push(Token {
                    tok: Tok::Number(decimal(&int, &frac)),
                    span,
                });
                continue;
            }
            let tok = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '\'' => Tok::Quote,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                other => {
                    return Err(Diagnostic::new(
                        DiagnosticKind::Lexical,
                        span,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            out.push(Token { tok, span });
            i += 1;
        }
        out.push(Token {
            tok: Tok::Newline,
            span: Span::new(line_no, chars.len() as u32 + 1),
        });
    }
    let last = out.last().map_or(Span::new(1, 1), |t| t.span);
    out.push(Token { tok: Tok::Eof, span: last });
    Ok(out)
}

fn decimal(int: &str, frac: &str) -> BigRational {
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("ascii digits")
    };
    BigRational::new(num, BigInt::from(10).pow(frac.len() as u32))
}

/// Exact decimal text for a rational whose denominator divides a power of ten.
pub fn decimal_text(r: &BigRational) -> Option<String> {
    if r.is_integer() {
        return Some(r.numer().to_string());
    }
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return None;
    }
    let places = twos.max(fives);
    let scaled = r * BigRational::from_integer(BigInt::from(10).pow(places));
    let n = scaled.to_integer();
    let neg = n < BigInt::zero();
    let digits = if neg { (-n).to_string() } else { n.to_string() };
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    Some(format!("{}{whole}.{frac}", if neg { "-" } else { "" }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("A[1] = -k1*a1' # note"),
            vec![
                Tok::Ident("A".into()),
                Tok::LBracket,
                Tok::Number(BigRational::from_integer(1.into())),
                Tok::RBracket,
                Tok::Eq,
                Tok::Minus,
                Tok::Ident("k1".into()),
                Tok::Star,
                Tok::Ident("a1".into()),
                Tok::Quote,
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(
            toks("0.125")[0],
            Tok::Number(BigRational::new(1.into(), 8.into()))
        );
        assert_eq!(decimal_text(&BigRational::new(1.into(), 8.into())).unwrap(), "0.125");
        assert_eq!(decimal_text(&BigRational::new(3.into(), 100.into())).unwrap(), "0.03");
        assert_eq!(decimal_text(&BigRational::new(1.into(), 3.into())), None);
    }

    #[test]
    fn lexical_error_position() {
        let e = tokenize("params g\nA[1] = g $ a1").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        assert!(tokenize("x = 1.2.3").is_err());
    }
}
