//! Recursive-descent parser for the concrete formula grammar.
//!
//! Precedence, tightest first: `!`, the prefix operators (`X`, `WX`, `F`, `G`,
//! `<path>`, `[path]`), `U`/`R` (right associative), `&&`, `||`, and finally
//! `->`/`<->` (right associative). Inside paths `*` binds tighter than `;`,
//! which binds tighter than `+`.
//!
//! `X`, `WX`, `F` and `G` are operators only when followed by something that
//! can start a formula; otherwise they are ordinary proposition names, so
//! `<!G*; G> end` reads `G` as a proposition.

use super::{Formula, LogicError, PathExpr, Prop, PropFormula};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Tt,
    Ff,
    True,
    False,
    Last,
    End,
    If,
    Then,
    Else,
    While,
    Do,
    Until,
    Release,
    NextSym,
    WeakNextSym,
    EventuallySym,
    AlwaysSym,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    Semi,
    Plus,
    Star,
    Question,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => {
                let text = match other {
                    Tok::Tt => "tt",
                    Tok::Ff => "ff",
                    Tok::True => "true",
                    Tok::False => "false",
                    Tok::Last => "last",
                    Tok::End => "end",
                    Tok::If => "if",
                    Tok::Then => "then",
                    Tok::Else => "else",
                    Tok::While => "while",
                    Tok::Do => "do",
                    Tok::Until => "U",
                    Tok::Release => "R",
                    Tok::NextSym => "○",
                    Tok::WeakNextSym => "●",
                    Tok::EventuallySym => "◇",
                    Tok::AlwaysSym => "□",
                    Tok::Not => "!",
                    Tok::And => "&&",
                    Tok::Or => "||",
                    Tok::Implies => "->",
                    Tok::Iff => "<->",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LAngle => "<",
                    Tok::RAngle => ">",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Semi => ";",
                    Tok::Plus => "+",
                    Tok::Star => "*",
                    Tok::Question => "?",
                    Tok::Ident(_) | Tok::Eof => unreachable!(),
                };
                format!("`{text}`")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(input: &str) -> Result<Vec<Spanned>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_column) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let three: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, width) = if three == "<->" {
            (Tok::Iff, 3)
        } else if two == "->" {
            (Tok::Implies, 2)
        } else if two == "&&" {
            (Tok::And, 2)
        } else if two == "||" {
            (Tok::Or, 2)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = match word.as_str() {
                "tt" => Tok::Tt,
                "ff" => Tok::Ff,
                "true" => Tok::True,
                "false" => Tok::False,
                "last" => Tok::Last,
                "end" => Tok::End,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "while" => Tok::While,
                "do" => Tok::Do,
                "U" => Tok::Until,
                "R" => Tok::Release,
                _ => Tok::Ident(word),
            };
            (tok, j - i)
        } else {
            let tok = match c {
                '!' | '¬' | '~' => Tok::Not,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '→' => Tok::Implies,
                '↔' => Tok::Iff,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '<' | '⟨' => Tok::LAngle,
                '>' | '⟩' => Tok::RAngle,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ';' => Tok::Semi,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '?' => Tok::Question,
                '○' => Tok::NextSym,
                '●' => Tok::WeakNextSym,
                '◇' => Tok::EventuallySym,
                '□' => Tok::AlwaysSym,
                '⊤' => Tok::True,
                '⊥' => Tok::False,
                other => {
                    return Err(LogicError::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            (tok, 1)
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_column,
        });
        i += width;
        column += width;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// Parses the concrete syntax into a [`Formula`].
///
/// Golog-style `if c then p else q` and `while c do p` are accepted inside
/// path expressions and expanded on the spot.
pub fn parse(input: &str) -> Result<Formula, LogicError> {
    let tokens = lex(input)?;
    let mut p = Parser { tokens, pos: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> LogicError {
        let s = &self.tokens[self.pos];
        LogicError::Syntax {
            line: s.line,
            column: s.column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), LogicError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Tok::Implies => {
                self.bump();
                let rhs = self.formula()?;
                Ok(Formula::implies(lhs, rhs))
            }
            Tok::Iff => {
                self.bump();
                let rhs = self.formula()?;
                Ok(Formula::iff(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == &Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.binary_temporal()?;
        while self.peek() == &Tok::And {
            self.bump();
            let rhs = self.binary_temporal()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.binary_temporal()?;
                Ok(Formula::until(lhs, rhs))
            }
            Tok::Release => {
                self.bump();
                let rhs = self.binary_temporal()?;
                Ok(Formula::release(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn starts_formula(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Ident(_)
                | Tok::Tt
                | Tok::Ff
                | Tok::True
                | Tok::False
                | Tok::Last
                | Tok::End
                | Tok::LParen
                | Tok::Not
                | Tok::LAngle
                | Tok::LBracket
                | Tok::NextSym
                | Tok::WeakNextSym
                | Tok::EventuallySym
                | Tok::AlwaysSym
        )
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        let prefix: Option<fn(Formula) -> Formula> = match self.peek() {
            Tok::Not => Some(Formula::not),
            Tok::NextSym => Some(Formula::next),
            Tok::WeakNextSym => Some(Formula::weak_next),
            Tok::EventuallySym => Some(Formula::eventually),
            Tok::AlwaysSym => Some(Formula::always),
            Tok::Ident(name) if Self::starts_formula(self.peek_at(1)) => match name.as_str() {
                "X" => Some(Formula::next),
                "WX" => Some(Formula::weak_next),
                "F" => Some(Formula::eventually),
                "G" => Some(Formula::always),
                _ => None,
            },
            _ => None,
        };
        if let Some(op) = prefix {
            self.bump();
            return Ok(op(self.unary()?));
        }
        match self.peek() {
            Tok::LAngle => {
                self.bump();
                let path = self.path()?;
                self.expect(Tok::RAngle)?;
                Ok(Formula::diamond(path, self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let path = self.path()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::box_op(path, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LogicError> {
        let f = match self.peek().clone() {
            Tok::Tt => Formula::Tt,
            Tok::Ff => Formula::Ff,
            Tok::True => Formula::Bool(true),
            Tok::False => Formula::Bool(false),
            Tok::Last => Formula::Last,
            Tok::End => Formula::End,
            Tok::Ident(name) => {
                let prop = Prop::new(name).map_err(|e| self.error(e.to_string()))?;
                Formula::Atom(prop)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                return Ok(f);
            }
            Tok::If | Tok::Then | Tok::Else | Tok::While | Tok::Do => {
                return Err(self.error(format!(
                    "{} is only allowed inside a path expression",
                    self.peek().describe()
                )))
            }
            other => {
                return Err(self.error(format!("expected a formula, found {}", other.describe())))
            }
        };
        self.bump();
        Ok(f)
    }

    fn path(&mut self) -> Result<PathExpr, LogicError> {
        let mut lhs = self.path_seq()?;
        while self.peek() == &Tok::Plus {
            self.bump();
            let rhs = self.path_seq()?;
            lhs = PathExpr::union(lhs, rhs);
        }
        Ok(lhs)
    }

    fn path_seq(&mut self) -> Result<PathExpr, LogicError> {
        let mut lhs = self.path_starred()?;
        while self.peek() == &Tok::Semi {
            self.bump();
            let rhs = self.path_starred()?;
            lhs = PathExpr::concat(lhs, rhs);
        }
        Ok(lhs)
    }

    fn path_starred(&mut self) -> Result<PathExpr, LogicError> {
        let mut base = self.path_base()?;
        while self.peek() == &Tok::Star {
            self.bump();
            base = PathExpr::star(base);
        }
        Ok(base)
    }

    fn path_base(&mut self) -> Result<PathExpr, LogicError> {
        match self.peek() {
            Tok::If => {
                self.bump();
                let cond = self.formula()?;
                self.expect(Tok::Then)?;
                let then_branch = self.path()?;
                self.expect(Tok::Else)?;
                let else_branch = self.path()?;
                Ok(PathExpr::union(
                    PathExpr::concat(PathExpr::check(cond.clone()), then_branch),
                    PathExpr::concat(PathExpr::check(Formula::not(cond)), else_branch),
                ))
            }
            Tok::While => {
                self.bump();
                let cond = self.formula()?;
                self.expect(Tok::Do)?;
                let body = self.path()?;
                Ok(PathExpr::concat(
                    PathExpr::star(PathExpr::concat(PathExpr::check(cond.clone()), body)),
                    PathExpr::check(Formula::not(cond)),
                ))
            }
            Tok::LParen => {
                let saved = self.pos;
                self.bump();
                if let Ok(inner) = self.path() {
                    if self.peek() == &Tok::RParen {
                        self.bump();
                        if self.peek() != &Tok::Question {
                            return Ok(inner);
                        }
                        if let PathExpr::PropTest(guard) = &inner {
                            self.bump();
                            return Ok(PathExpr::check(guard.to_formula()));
                        }
                    }
                }
                self.pos = saved;
                self.path_formula_step()
            }
            _ => self.path_formula_step(),
        }
    }

    fn path_formula_step(&mut self) -> Result<PathExpr, LogicError> {
        let start = self.pos;
        let f = self.formula()?;
        if self.peek() == &Tok::Question {
            self.bump();
            return Ok(PathExpr::check(f));
        }
        match to_guard(&f) {
            Some(g) => Ok(PathExpr::guard(g)),
            None => {
                self.pos = start;
                Err(self.error(
                    "a path step must be propositional; write `f?` to test a temporal formula"
                        .to_string(),
                ))
            }
        }
    }
}

fn to_guard(f: &Formula) -> Option<PropFormula> {
    Some(match f {
        Formula::Bool(b) => PropFormula::Const(*b),
        Formula::Atom(p) => PropFormula::Var(p.clone()),
        Formula::Not(g) => PropFormula::not(to_guard(g)?),
        Formula::And(a, b) => PropFormula::and(to_guard(a)?, to_guard(b)?),
        Formula::Or(a, b) => PropFormula::or(to_guard(a)?, to_guard(b)?),
        _ => return None,
    })
}
