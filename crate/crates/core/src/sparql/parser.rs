//! Recursive-descent parser for the query fragment.

use super::ast::*;
use super::prefixes::is_name_char;
use super::{PrefixTable, QueryError};
use crate::store::Term;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Comma,
    Slash,
    QMark,
    Star,
    Var(String),
    Iri(String),
    Name(String),
    Str(String),
    Lang(String),
    Other(char),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "OPTIONAL",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "GROUP",
    "HAVING",
    "CONSTRUCT",
    "DESCRIBE",
    "BIND",
    "VALUES",
    "MINUS",
    "SERVICE",
    "GRAPH",
    "FROM",
    "INSERT",
    "DELETE",
];

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, column, message: String| QueryError::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '{' => {
                advance(1, &mut i, &mut col);
                Tok::LBrace
            }
            '}' => {
                advance(1, &mut i, &mut col);
                Tok::RBrace
            }
            '(' => {
                advance(1, &mut i, &mut col);
                Tok::LParen
            }
            ')' => {
                advance(1, &mut i, &mut col);
                Tok::RParen
            }
            '.' => {
                advance(1, &mut i, &mut col);
                Tok::Dot
            }
            ',' => {
                advance(1, &mut i, &mut col);
                Tok::Comma
            }
            '/' => {
                advance(1, &mut i, &mut col);
                Tok::Slash
            }
            '*' => {
                advance(1, &mut i, &mut col);
                Tok::Star
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    if c == '$' {
                        return Err(syntax(line, col, "empty variable name".into()));
                    }
                    advance(1, &mut i, &mut col);
                    Tok::QMark
                } else {
                    let name: String = chars[i + 1..j].iter().collect();
                    let n = j - i;
                    advance(n, &mut i, &mut col);
                    Tok::Var(name)
                }
            }
            '<' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' {
                    if chars[j].is_whitespace() {
                        return Err(syntax(line, col, "whitespace inside <IRI>".into()));
                    }
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(syntax(line, col, "unterminated <IRI>".into()));
                }
                let iri: String = chars[i + 1..j].iter().collect();
                let n = j + 1 - i;
                advance(n, &mut i, &mut col);
                Tok::Iri(iri)
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(syntax(line, col, "unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('r') => '\r',
                                other => return Err(syntax(line, col + (j - i), format!("bad escape {other:?}"))),
                            };
                            s.push(esc);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let n = j + 1 - i;
                advance(n, &mut i, &mut col);
                out.push(Spanned { tok: Tok::Str(s), line: start_line, column: start_col });
                if chars.get(i) == Some(&'@') {
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '-') {
                        j += 1;
                    }
                    if j == i + 1 {
                        return Err(syntax(line, col, "empty language tag".into()));
                    }
                    let tag: String = chars[i + 1..j].iter().collect();
                    let (l, c0) = (line, col);
                    let n = j - i;
                    advance(n, &mut i, &mut col);
                    out.push(Spanned { tok: Tok::Lang(tag), line: l, column: c0 });
                }
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() {
                    let ch = chars[j];
                    if is_name_char(ch) || (ch == '.' && chars.get(j + 1).is_some_and(|n| is_name_char(*n)) && j > i) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let name: String = chars[i..j].iter().collect();
                let n = j - i;
                advance(n, &mut i, &mut col);
                Tok::Name(name)
            }
            other => {
                advance(1, &mut i, &mut col);
                Tok::Other(other)
            }
        };
        out.push(Spanned { tok, line: start_line, column: start_col });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixTable,
    end: (usize, usize),
}

/// Parses query text. Prefixed names and bare names resolve through
/// `prefixes`; `PREFIX` declarations in the text extend it.
pub fn parse_query(text: &str, prefixes: &PrefixTable) -> Result<QueryPlan, QueryError> {
    let toks = lex(text)?;
    let end = text.lines().enumerate().last().map(|(i, l)| (i + 1, l.chars().count() + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, prefixes: prefixes.clone(), end };
    let plan = p.query()?;
    if let Some(t) = p.peek_spanned() {
        return Err(QueryError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("unexpected trailing {:?}", t.tok),
        });
    }
    validate(&plan)?;
    Ok(plan)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_spanned(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        let (line, column) = self.here();
        Err(QueryError::Syntax { line, column, message: message.into() })
    }

    fn unsupported<T>(&self, construct: impl Into<String>) -> Result<T, QueryError> {
        let (line, column) = self.here();
        Err(QueryError::Unsupported { line, column, construct: construct.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Name(n)) if n.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), QueryError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(t) => format!("{t:?}"),
        }
    }

    fn check_unsupported_keyword(&self) -> Result<(), QueryError> {
        if let Some(Tok::Name(n)) = self.peek() {
            if let Some(kw) = UNSUPPORTED_KEYWORDS.iter().find(|k| n.eq_ignore_ascii_case(k)) {
                return self.unsupported(*kw);
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<QueryPlan, QueryError> {
        while self.eat_keyword("PREFIX") {
            let Some(Tok::Name(name)) = self.next() else {
                self.pos -= 1;
                return self.err("expected prefix name");
            };
            let Some(prefix) = name.strip_suffix(':') else {
                self.pos -= 1;
                return self.err("prefix name must end with ':'");
            };
            let prefix = prefix.to_string();
            match self.next() {
                Some(Tok::Iri(base)) => self.prefixes.add_prefix(&prefix, &base),
                _ => {
                    self.pos -= 1;
                    return self.err("expected <IRI> after PREFIX name");
                }
            }
        }
        self.check_unsupported_keyword()?;
        let form = if self.eat_keyword("ASK") {
            QueryForm::Ask
        } else if self.eat_keyword("SELECT") {
            if self.eat_keyword("COUNT") {
                self.expect(Tok::LParen, "'('")?;
                if !self.eat_keyword("DISTINCT") {
                    return self.unsupported("COUNT without DISTINCT");
                }
                let var = match self.next() {
                    Some(Tok::Var(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected variable in COUNT(DISTINCT ...)");
                    }
                };
                self.expect(Tok::RParen, "')'")?;
                QueryForm::CountDistinct { var }
            } else {
                let distinct = self.eat_keyword("DISTINCT");
                if self.is_keyword("REDUCED") {
                    return self.unsupported("REDUCED");
                }
                let projection = if self.peek() == Some(&Tok::Star) {
                    self.pos += 1;
                    Projection::All
                } else {
                    let mut vars = Vec::new();
                    while let Some(Tok::Var(v)) = self.peek() {
                        vars.push(v.clone());
                        self.pos += 1;
                    }
                    if vars.is_empty() {
                        if self.peek() == Some(&Tok::LParen) {
                            return self.unsupported("projection expression");
                        }
                        return self.err("expected projection variables");
                    }
                    Projection::Vars(vars)
                };
                QueryForm::Select { distinct, projection }
            }
        } else {
            return self.err(format!("expected SELECT or ASK, found {}", self.describe()));
        };
        self.eat_keyword("WHERE");
        let pattern = self.group()?;
        if pattern.elements.is_empty() {
            return self.err_at_prev("empty WHERE clause");
        }
        self.check_unsupported_keyword()?;
        Ok(QueryPlan { form, pattern })
    }

    fn err_at_prev<T>(&self, message: &str) -> Result<T, QueryError> {
        let t = &self.toks[self.pos.saturating_sub(1)];
        Err(QueryError::Syntax { line: t.line, column: t.column, message: message.into() })
    }

    fn group(&mut self) -> Result<GroupPattern, QueryError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut elements = Vec::new();
        loop {
            self.check_unsupported_keyword()?;
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                None => return self.err("unterminated group, expected '}'"),
                Some(Tok::Dot) => return self.err("unexpected '.'"),
                Some(Tok::LBrace) => {
                    let mut branches = vec![self.nonempty_group()?];
                    while self.eat_keyword("UNION") {
                        branches.push(self.nonempty_group()?);
                    }
                    elements.push(PatternElement::Union(branches));
                }
                Some(Tok::Name(n)) if n.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    elements.push(PatternElement::Filter(self.filter()?));
                }
                Some(_) => elements.push(PatternElement::Triple(self.triple()?)),
            }
            if self.peek() == Some(&Tok::Dot) {
                self.pos += 1;
            } else if !matches!(self.peek(), Some(Tok::RBrace) | Some(Tok::LBrace)) && !self.is_keyword("FILTER") {
                if matches!(self.peek(), Some(Tok::Other(';')) | Some(Tok::Comma)) {
                    return self.unsupported("predicate/object lists");
                }
                return self.err(format!("expected '.' or '}}', found {}", self.describe()));
            }
        }
        Ok(GroupPattern { elements })
    }

    fn nonempty_group(&mut self) -> Result<GroupPattern, QueryError> {
        let g = self.group()?;
        if g.elements.is_empty() {
            return self.err_at_prev("empty group");
        }
        Ok(g)
    }

    fn filter(&mut self) -> Result<RegexFilter, QueryError> {
        if !self.eat_keyword("regex") {
            return self.unsupported("FILTER expressions other than regex()");
        }
        self.expect(Tok::LParen, "'('")?;
        let var = match self.next() {
            Some(Tok::Var(v)) => v,
            _ => {
                self.pos -= 1;
                return self.unsupported("regex() on a non-variable");
            }
        };
        self.expect(Tok::Comma, "','")?;
        let pattern = match self.next() {
            Some(Tok::Str(s)) => s,
            _ => {
                self.pos -= 1;
                return self.err("expected pattern string");
            }
        };
        let flags = if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Str(s)) => Some(s),
                _ => {
                    self.pos -= 1;
                    return self.err("expected flags string");
                }
            }
        } else {
            None
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(RegexFilter { var, pattern, flags })
    }

    fn triple(&mut self) -> Result<TriplePattern, QueryError> {
        let subject = self.node()?;
        let predicate = self.predicate()?;
        let object = self.node()?;
        Ok(TriplePattern { subject, predicate, object })
    }

    fn iri_from_name(&self, name: &str) -> Result<Term, QueryError> {
        match self.prefixes.resolve(name) {
            Some(iri) => Ok(Term::iri(iri)),
            None => {
                let (line, column) = self.here_prev();
                Err(QueryError::Syntax { line, column, message: format!("unknown name or prefix: {name}") })
            }
        }
    }

    fn here_prev(&self) -> (usize, usize) {
        let t = &self.toks[self.pos.saturating_sub(1)];
        (t.line, t.column)
    }

    fn node(&mut self) -> Result<NodePattern, QueryError> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(NodePattern::Var(v)),
            Some(Tok::Iri(i)) => Ok(NodePattern::Term(Term::iri(i))),
            Some(Tok::Name(n)) => Ok(NodePattern::Term(self.iri_from_name(&n)?)),
            Some(Tok::Str(s)) => {
                if let Some(Tok::Lang(l)) = self.peek().cloned() {
                    self.pos += 1;
                    Ok(NodePattern::Term(Term::lang_literal(s, l)))
                } else {
                    Ok(NodePattern::Term(Term::literal(s)))
                }
            }
            Some(Tok::Other('[')) | Some(Tok::Other('_')) => {
                self.pos -= 1;
                self.unsupported("blank nodes")
            }
            _ => {
                self.pos -= 1;
                self.err(format!("expected term or variable, found {}", self.describe()))
            }
        }
    }

    fn predicate(&mut self) -> Result<PredicatePattern, QueryError> {
        if let Some(Tok::Var(v)) = self.peek().cloned() {
            self.pos += 1;
            return Ok(PredicatePattern::Var(v));
        }
        let mut steps = Vec::new();
        let mut is_path = false;
        loop {
            if matches!(self.peek(), Some(Tok::Other('^')) | Some(Tok::Other('!'))) {
                return self.unsupported("inverse or negated property paths");
            }
            let predicate = match self.next() {
                Some(Tok::Iri(i)) => Term::iri(i),
                Some(Tok::Name(n)) if n == "a" => {
                    self.pos -= 1;
                    return self.unsupported("'a' shorthand");
                }
                Some(Tok::Name(n)) => self.iri_from_name(&n)?,
                _ => {
                    self.pos -= 1;
                    if self.peek() == Some(&Tok::QMark) {
                        return self.unsupported("prefix '?' path modifier");
                    }
                    return self.err(format!("expected predicate, found {}", self.describe()));
                }
            };
            let optional = if self.peek() == Some(&Tok::QMark) {
                self.pos += 1;
                is_path = true;
                true
            } else {
                false
            };
            match self.peek() {
                Some(Tok::Star) | Some(Tok::Other('+')) => return self.unsupported("'*' and '+' path modifiers"),
                Some(Tok::Other('|')) => return self.unsupported("alternative paths"),
                _ => {}
            }
            steps.push(PathStep { predicate, optional });
            if self.peek() == Some(&Tok::Slash) {
                self.pos += 1;
                is_path = true;
            } else {
                break;
            }
        }
        if is_path {
            Ok(PredicatePattern::Path(steps))
        } else {
            Ok(PredicatePattern::Term(steps.pop().expect("one step").predicate))
        }
    }
}

fn validate(plan: &QueryPlan) -> Result<(), QueryError> {
    validate_unions(&plan.pattern)?;
    let vars = plan.pattern.var_set();
    match &plan.form {
        QueryForm::Select { projection: Projection::Vars(vs), .. } => {
            for v in vs {
                if !vars.contains(v) {
                    return Err(QueryError::Invalid(format!(
                        "projected variable ?{v} does not occur in any triple pattern"
                    )));
                }
            }
        }
        QueryForm::CountDistinct { var } if !vars.contains(var) => {
            return Err(QueryError::Invalid(format!("counted variable ?{var} does not occur in any triple pattern")));
        }
        _ => {}
    }
    Ok(())
}

/// Every branch of a UNION must bind the same variables, so that solutions
/// are always total over the query's variables.
fn validate_unions(g: &GroupPattern) -> Result<(), QueryError> {
    for el in &g.elements {
        if let PatternElement::Union(branches) = el {
            let first = branches[0].var_set();
            for b in &branches[1..] {
                if b.var_set() != first {
                    return Err(QueryError::Unsupported {
                        line: 0,
                        column: 0,
                        construct: "UNION branches binding different variables".into(),
                    });
                }
            }
            for b in branches {
                validate_unions(b)?;
            }
        }
    }
    Ok(())
}
