//! Model description language.
//!
//! ```text
//! manifold R4 dim 4 coords x1 x2 x3 x4;
//! bivector P { (1,2): 1, (3,4): 1, (2,3): x1*x2 };
//! threeform H { (1,2,4): -x1 };
//! ```

use std::collections::BTreeSet;
use std::fmt;

use gradgauge::cartan::ThreeTensor;
use gradgauge::gengeo::Bivector;
use gradgauge::Poly;
use num_rational::BigRational;
use num_traits::Zero;

use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

type PResult<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(num_bigint::BigInt),
    Float(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> PResult<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut float = false;
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                float = true;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if float { Tok::Float(s) } else { Tok::Int(s.parse().expect("digits")) };
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if ";{}(),:|+-*/^".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError { line: l0, col: c0, message: format!("unexpected character '{c}'") });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    coords: Vec<String>,
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

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError { line: t.line, col: t.col, message: msg.into() })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Float(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<Token> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            self.err(&t, format!("expected '{c}', found {}", Self::describe(&t.tok)))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.err(&t, format!("expected a name, found {}", Self::describe(other))),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let (s, t) = self.ident()?;
        if s == kw {
            Ok(())
        } else {
            self.err(&t, format!("expected '{kw}', found '{s}'"))
        }
    }

    fn uint(&mut self) -> PResult<(usize, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => match usize::try_from(n.clone()) {
                Ok(v) => Ok((v, t.clone())),
                Err(_) => self.err(&t, "integer too large"),
            },
            Tok::Float(s) => self.err(&t, format!("floating point literal '{s}' is not allowed")),
            other => self.err(&t, format!("expected an integer, found {}", Self::describe(other))),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> PResult<Poly> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_sym('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> PResult<Poly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_sym('*') {
                acc = &acc * &self.unary()?;
            } else if self.peek().tok == Tok::Sym('/') {
                let t = self.next();
                let d = self.unary()?;
                if !d.is_constant() {
                    return self.err(&t, "non-polynomial expression: division by a non-constant");
                }
                let c = d.constant_term();
                if c.is_zero() {
                    return self.err(&t, "division by zero");
                }
                acc = acc.scale(&c.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> PResult<Poly> {
        if self.eat_sym('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.next();
            let t = self.peek().clone();
            if t.tok == Tok::Sym('-') {
                return self.err(&t, "non-polynomial expression: negative exponent");
            }
            let (k, t) = self.uint()?;
            let k = u32::try_from(k).or_else(|_| self.err(&t, "exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Poly> {
        let n = self.coords.len();
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(Poly::constant(n, BigRational::from_integer(v.clone()))),
            Tok::Float(s) => self.err(&t, format!("floating point literal '{s}' is not allowed")),
            Tok::Ident(s) => match self.coords.iter().position(|c| c == s) {
                Some(i) => Ok(Poly::var(n, i)),
                None => self.err(&t, format!("unknown coordinate '{s}'")),
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            other => self.err(&t, format!("expected an expression, found {}", Self::describe(other))),
        }
    }

    /// `(i,j,...)` with 1-based indices checked against the dimension.
    fn index_tuple(&mut self, arity: usize) -> PResult<(Vec<usize>, Token)> {
        let open = self.expect_sym('(')?;
        let mut idx = Vec::new();
        for k in 0..arity {
            if k > 0 {
                self.expect_sym(',')?;
            }
            let (v, t) = self.uint()?;
            if v == 0 || v > self.coords.len() {
                return self.err(&t, format!("index {v} out of range 1..{}", self.coords.len()));
            }
            idx.push(v - 1);
        }
        self.expect_sym(')')?;
        Ok((idx, open))
    }

    /// `{ (i,..): expr, ... }` entries.
    fn entries(&mut self, arity: usize) -> PResult<Vec<(Vec<usize>, Token, Poly)>> {
        self.expect_sym('{')?;
        let mut out = Vec::new();
        if self.eat_sym('}') {
            return Ok(out);
        }
        loop {
            let (idx, t) = self.index_tuple(arity)?;
            self.expect_sym(':')?;
            let v = self.expr()?;
            out.push((idx, t, v));
            if self.eat_sym(',') {
                continue;
            }
            self.expect_sym('}')?;
            return Ok(out);
        }
    }

    /// `e1, ..., en | a1, ..., an` inside parentheses.
    fn pair_vectors(&mut self) -> PResult<(Vec<Poly>, Vec<Poly>)> {
        let open = self.expect_sym('(')?;
        let n = self.coords.len();
        let mut v = Vec::new();
        let mut a = Vec::new();
        let mut side = 0;
        loop {
            let e = self.expr()?;
            if side == 0 { v.push(e) } else { a.push(e) }
            if self.eat_sym(',') {
                continue;
            }
            if side == 0 && self.eat_sym('|') {
                side = 1;
                continue;
            }
            self.expect_sym(')')?;
            break;
        }
        if v.len() != n || a.len() != n {
            return self.err(&open, format!("expected {n} vector and {n} form components"));
        }
        Ok((v, a))
    }
}

fn once<T>(slot: &Option<T>, t: &Token, what: &str) -> PResult<()> {
    if slot.is_some() {
        Err(ParseError { line: t.line, col: t.col, message: format!("{what} declared twice") })
    } else {
        Ok(())
    }
}

/// Parses a model file.
pub fn parse(text: &str) -> PResult<ModelSpec> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, coords: Vec::new() };

    let first = p.peek().clone();
    match &first.tok {
        Tok::Ident(s) if s == "manifold" => {}
        Tok::Eof => return p.err(&first, "missing manifold declaration"),
        _ => return p.err(&first, "the file must start with a manifold declaration"),
    }
    p.next();
    let (name, _) = p.ident()?;
    p.keyword("dim")?;
    let (dim, dim_tok) = p.uint()?;
    p.keyword("coords")?;
    let mut coords = Vec::new();
    while let Tok::Ident(s) = &p.peek().tok {
        let t = p.peek().clone();
        if coords.contains(s) {
            return p.err(&t, format!("coordinate '{s}' repeated"));
        }
        coords.push(s.clone());
        p.next();
    }
    p.expect_sym(';')?;
    if coords.len() != dim || dim == 0 {
        return p.err(&dim_tok, format!("dim {dim} but {} coordinates", coords.len()));
    }
    p.coords = coords.clone();
    let n = dim;

    let mut spec = ModelSpec {
        name,
        coords,
        bivector: None,
        threeform: None,
        metric: None,
        ooperator: None,
        frame: None,
        actions: Vec::new(),
        degree: None,
        assert_orbit_nondegenerate: false,
    };
    let mut structure_tok: Option<Token> = None;

    loop {
        let t = p.peek().clone();
        let kw = match &t.tok {
            Tok::Eof => break,
            Tok::Ident(s) => s.clone(),
            other => return p.err(&t, format!("expected a declaration, found {}", Parser::describe(other))),
        };
        p.next();
        let defines_structure = matches!(kw.as_str(), "bivector" | "ooperator" | "frame");
        if defines_structure {
            if structure_tok.is_some() {
                return p.err(&t, "the Dirac structure is already defined by an earlier declaration");
            }
            structure_tok = Some(t.clone());
        }
        match kw.as_str() {
            "bivector" => {
                let (bname, _) = p.ident()?;
                let mut seen = BTreeSet::new();
                let mut ents = Vec::new();
                for (idx, et, v) in p.entries(2)? {
                    let (i, j) = (idx[0], idx[1]);
                    if i == j {
                        return p.err(&et, "diagonal entry violates antisymmetry");
                    }
                    if !seen.insert((i.min(j), i.max(j))) {
                        return p.err(&et, format!("duplicate component ({},{})", i + 1, j + 1));
                    }
                    ents.push(if i < j { ((i, j), v) } else { ((j, i), -&v) });
                }
                let pi = Bivector::from_entries(n, &ents).map_err(|e| ParseError {
                    line: t.line,
                    col: t.col,
                    message: e.to_string(),
                })?;
                spec.bivector = Some((bname, pi));
            }
            "threeform" => {
                once(&spec.threeform, &t, "threeform")?;
                let (hname, _) = p.ident()?;
                let mut seen = BTreeSet::new();
                let mut h = ThreeTensor::zero(n);
                for (idx, et, v) in p.entries(3)? {
                    let mut s = idx.clone();
                    s.sort_unstable();
                    if s[0] == s[1] || s[1] == s[2] {
                        return p.err(&et, "repeated index violates antisymmetry");
                    }
                    if !seen.insert(s.clone()) {
                        return p.err(&et, "duplicate component");
                    }
                    // sign of the permutation sorting idx
                    let inversions = (0..3).flat_map(|a| (a + 1..3).map(move |b| (a, b))).filter(|&(a, b)| idx[a] > idx[b]).count();
                    let v = if inversions % 2 == 1 { -&v } else { v };
                    h.set_antisymmetric(s[0], s[1], s[2], v);
                }
                spec.threeform = Some((hname, h));
            }
            "metric" => {
                once(&spec.metric, &t, "metric")?;
                let mut rows = vec![vec![Poly::zero(n); n]; n];
                if let Tok::Ident(s) = &p.peek().tok {
                    if s != "identity" {
                        let tt = p.peek().clone();
                        return p.err(&tt, format!("expected 'identity' or '{{', found '{s}'"));
                    }
                    p.next();
                    for (i, row) in rows.iter_mut().enumerate() {
                        row[i] = Poly::one(n);
                    }
                } else {
                    let mut seen = BTreeSet::new();
                    for (idx, et, v) in p.entries(2)? {
                        let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                        if !seen.insert((i, j)) {
                            return p.err(&et, format!("duplicate component ({},{})", i + 1, j + 1));
                        }
                        rows[i][j] = v.clone();
                        rows[j][i] = v;
                    }
                }
                spec.metric = Some(rows);
            }
            "ooperator" => {
                let mut rows = vec![vec![Poly::zero(n); n]; n];
                let mut seen = BTreeSet::new();
                for (idx, et, v) in p.entries(2)? {
                    if !seen.insert((idx[0], idx[1])) {
                        return p.err(&et, format!("duplicate component ({},{})", idx[0] + 1, idx[1] + 1));
                    }
                    rows[idx[0]][idx[1]] = v;
                }
                spec.ooperator = Some(rows);
            }
            "frame" => {
                p.expect_sym('{')?;
                let mut secs = Vec::new();
                loop {
                    secs.push(p.pair_vectors()?);
                    if p.eat_sym(',') {
                        continue;
                    }
                    p.expect_sym('}')?;
                    break;
                }
                if secs.len() != n {
                    return p.err(&t, format!("a frame needs {n} sections, got {}", secs.len()));
                }
                spec.frame = Some(secs);
            }
            "action" => {
                let (aname, at) = p.ident()?;
                if spec.actions.iter().any(|(x, _, _)| *x == aname) {
                    return p.err(&at, format!("action '{aname}' declared twice"));
                }
                let (v, a) = p.pair_vectors()?;
                spec.actions.push((aname, v, a));
            }
            "degree" => {
                once(&spec.degree, &t, "degree")?;
                let (d, dt) = p.uint()?;
                spec.degree = Some(u32::try_from(d).or_else(|_| p.err(&dt, "degree too large"))?);
            }
            "assert" => {
                let (flag, ft) = p.ident()?;
                if flag != "orbit_nondegenerate" {
                    return p.err(&ft, format!("unknown assertion '{flag}'"));
                }
                spec.assert_orbit_nondegenerate = true;
            }
            other => return p.err(&t, format!("unknown declaration '{other}'")),
        }
        p.expect_sym(';')?;
    }
    Ok(spec)
}
