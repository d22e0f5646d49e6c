//! Text syntax for manifolds, classes, integer matrices, polynomials and
//! polynomial matrices. Every error carries the byte offset where parsing
//! stopped.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use spherecalc::classifier::{ClassifierError, FourManifold};
use spherecalc::groupring::GroupRingElement;
use spherecalc::hermitian::{FormJson, RingMatrix};
use spherecalc::intlattice::{HomologyClass, IntersectionForm};
use spherecalc::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub input: String,
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at position {} in {:?}: {}",
            self.pos, self.input, self.message
        )
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            input: self.src.to_string(),
            pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(match self.peek() {
                Some(found) => self.error(format!("expected '{c}', found '{found}'")),
                None => self.error(format!("expected '{c}', found end of input")),
            })
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return None;
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Some(s)
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        let digits = self
            .digits()
            .ok_or_else(|| self.error_at(start, "expected an integer"))?;
        let value: BigInt = digits.parse().expect("ascii digits");
        Ok(if negative { -value } else { value })
    }

    /// `[a, b, ...]`, possibly empty.
    fn integer_list(&mut self) -> Result<Vec<BigInt>, ParseError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.integer()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn integer_rows(&mut self) -> Result<Vec<Vec<BigInt>>, ParseError> {
        self.expect('[')?;
        let mut rows = Vec::new();
        if self.eat(']') {
            return Ok(rows);
        }
        loop {
            rows.push(self.integer_list()?);
            if self.eat(']') {
                return Ok(rows);
            }
            self.expect(',')?;
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            let ok = c.is_ascii_alphanumeric() || c == '_' || (i == 0 && c == '*');
            if !ok {
                break;
            }
            len = i + c.len_utf8();
        }
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }
}

/// A homology class literal: a JSON array of integers.
pub fn parse_class(src: &str) -> Result<HomologyClass, ParseError> {
    let mut cur = Cursor::new(src);
    let coords = cur.integer_list()?;
    cur.finish()?;
    Ok(HomologyClass(coords))
}

/// An integer matrix literal: a JSON array of equal-length integer arrays.
pub fn parse_int_matrix(src: &str) -> Result<IntMatrix, ParseError> {
    let mut cur = Cursor::new(src);
    let rows = cur.integer_rows()?;
    cur.finish()?;
    IntMatrix::from_rows(rows).map_err(|e| cur.error_at(0, e.to_string()))
}

/// A manifold given by its intersection form and Kirby–Siebenmann invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    /// The source text.
    pub name: String,
    pub form: IntersectionForm,
    pub ks: u8,
}

impl ManifoldSpec {
    pub fn with_ks(mut self, ks: Option<u8>) -> Self {
        if let Some(ks) = ks {
            self.ks = ks;
        }
        self
    }

    pub fn manifold(&self) -> Result<FourManifold, ClassifierError> {
        FourManifold::new(self.form.clone(), self.ks)
    }
}

/// Manifold expressions.
///
/// ```text
/// sum   := unary ('#' unary)*
/// unary := '-' unary | atom
/// atom  := name | 'diag(' ints ')' | matrix | '(' sum ')'
/// name  := S4 | CP2 | CP2bar | *CP2 | H | S2xS2 | E8
/// ```
///
/// `#` block-sums the forms and adds ks mod 2; `-` negates the form and keeps
/// ks. `*CP2` and `E8` carry ks = 1.
pub fn parse_manifold(src: &str) -> Result<ManifoldSpec, ParseError> {
    let mut cur = Cursor::new(src);
    let (form, ks) = manifold_sum(&mut cur)?;
    cur.finish()?;
    Ok(ManifoldSpec {
        name: src.trim().to_string(),
        form,
        ks,
    })
}

fn manifold_sum(cur: &mut Cursor<'_>) -> Result<(IntersectionForm, u8), ParseError> {
    let (mut form, mut ks) = manifold_unary(cur)?;
    while cur.eat('#') {
        let (f, k) = manifold_unary(cur)?;
        form = form.block_sum(&f);
        ks = (ks + k) % 2;
    }
    Ok((form, ks))
}

fn manifold_unary(cur: &mut Cursor<'_>) -> Result<(IntersectionForm, u8), ParseError> {
    if cur.eat('-') {
        let (form, ks) = manifold_unary(cur)?;
        return Ok((form.negated(), ks));
    }
    manifold_atom(cur)
}

fn manifold_atom(cur: &mut Cursor<'_>) -> Result<(IntersectionForm, u8), ParseError> {
    match cur.peek() {
        Some('(') => {
            cur.expect('(')?;
            let inner = manifold_sum(cur)?;
            cur.expect(')')?;
            return Ok(inner);
        }
        Some('[') => {
            let start = cur.pos;
            let rows = cur.integer_rows()?;
            let m = IntMatrix::from_rows(rows).map_err(|e| cur.error_at(start, e.to_string()))?;
            let form = IntersectionForm::new(m).map_err(|e| cur.error_at(start, e.to_string()))?;
            return Ok((form, 0));
        }
        _ => {}
    }
    let start = {
        cur.skip_ws();
        cur.pos
    };
    let name = cur
        .ident()
        .ok_or_else(|| cur.error("expected a manifold name, diag(...) or a matrix"))?;
    let atom = match name.to_ascii_lowercase().as_str() {
        "s4" => (IntersectionForm::empty(), 0),
        "cp2" => (IntersectionForm::cp2(), 0),
        "cp2bar" => (IntersectionForm::cp2().negated(), 0),
        "*cp2" => (IntersectionForm::cp2(), 1),
        "h" | "s2xs2" => (IntersectionForm::hyperbolic(), 0),
        "e8" => (IntersectionForm::e8(), 1),
        "diag" => {
            cur.expect('(')?;
            let mut entries = Vec::new();
            if !cur.eat(')') {
                loop {
                    entries.push(cur.integer()?);
                    if cur.eat(')') {
                        break;
                    }
                    cur.expect(',')?;
                }
            }
            let form = IntersectionForm::new(IntMatrix::diagonal(entries))
                .map_err(|e| cur.error_at(start, e.to_string()))?;
            (form, 0)
        }
        _ => return Err(cur.error_at(start, format!("unknown manifold '{name}'"))),
    };
    Ok(atom)
}

/// Which group ring a form lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingSpec {
    Cyclic(usize),
    Laurent,
}

/// `Z2`, `Z_2`, `Z[Z_2]`, `cyclic:2` for `Z[Z_2]`; `laurent`, `Z[Z]` or `Z` for
/// Laurent polynomials.
pub fn parse_ring(src: &str) -> Result<RingSpec, ParseError> {
    let s = src.trim();
    let lower = s.to_ascii_lowercase();
    if matches!(lower.as_str(), "laurent" | "z[z]" | "z" | "z[t,t^-1]") {
        return Ok(RingSpec::Laurent);
    }
    let digits = lower
        .strip_prefix("cyclic:")
        .or_else(|| lower.strip_prefix("z[z_").and_then(|r| r.strip_suffix(']')))
        .or_else(|| lower.strip_prefix("z_"))
        .or_else(|| lower.strip_prefix('z'));
    let err = || ParseError {
        input: src.to_string(),
        pos: 0,
        message: "expected a ring: Z<d>, cyclic:<d> or laurent".into(),
    };
    match digits.and_then(|d| d.parse::<usize>().ok()) {
        Some(d) if d >= 1 => Ok(RingSpec::Cyclic(d)),
        Some(_) => Err(ParseError {
            message: "the group order must be at least 1".into(),
            ..err()
        }),
        None => Err(err()),
    }
}

/// A polynomial in `T` or `t` with integer coefficients, e.g. `3 + 2T`,
/// `1 - t^-2`, `-2*t^(-1)`.
pub fn parse_polynomial<R: GroupRingElement>(src: &str, ring: R::Ring) -> Result<R, ParseError> {
    let mut cur = Cursor::new(src);
    let p = polynomial::<R>(&mut cur, ring)?;
    cur.finish()?;
    Ok(p)
}

fn polynomial<R: GroupRingElement>(cur: &mut Cursor<'_>, ring: R::Ring) -> Result<R, ParseError> {
    let mut acc = R::zero(ring);
    let mut negative = if cur.eat('-') {
        true
    } else {
        cur.eat('+');
        false
    };
    loop {
        let (c, e) = term(cur)?;
        let c = if negative { -c } else { c };
        acc = acc + R::monomial(ring, c, e);
        if cur.eat('+') {
            negative = false;
        } else if cur.eat('-') {
            negative = true;
        } else {
            return Ok(acc);
        }
    }
}

fn term(cur: &mut Cursor<'_>) -> Result<(BigInt, i64), ParseError> {
    cur.skip_ws();
    let start = cur.pos;
    let coeff = cur
        .digits()
        .map(|d| d.parse::<BigInt>().expect("ascii digits"));
    let had_star = coeff.is_some() && cur.eat('*');
    let var = matches!(cur.peek(), Some('t') | Some('T'));
    if !var {
        if had_star {
            return Err(cur.error("expected 'T' or 't' after '*'"));
        }
        return coeff
            .map(|c| (c, 0))
            .ok_or_else(|| cur.error_at(start, "expected a term"));
    }
    cur.pos += 1;
    let mut exp = 1i64;
    if cur.eat('^') {
        let paren = cur.eat('(');
        let at = cur.pos;
        let e = cur.integer()?;
        exp = i64::try_from(&e).map_err(|_| cur.error_at(at, "exponent out of range"))?;
        if paren {
            cur.expect(')')?;
        }
    }
    Ok((coeff.unwrap_or_else(|| BigInt::from(1)), exp))
}

/// A square matrix of polynomials, `[[t + t^-1, 1], [1, 0]]`, or the JSON
/// object emitted for forms (`{"ring": ..., "size": ..., "entries": ...}`).
pub fn parse_ring_matrix<R: RingLiteral>(
    src: &str,
    ring: R::Ring,
) -> Result<RingMatrix<R>, ParseError> {
    let mut cur = Cursor::new(src);
    if cur.peek() == Some('{') {
        let json: FormJson = serde_json::from_str(src).map_err(|e| ParseError {
            input: src.to_string(),
            pos: 0,
            message: e.to_string(),
        })?;
        let m = R::from_json(json).map_err(|m| cur.error_at(0, m))?;
        if m.ring() != ring {
            return Err(cur.error_at(0, "form is over a different ring than --ring"));
        }
        return Ok(m);
    }
    let mut rows = Vec::new();
    cur.expect('[')?;
    if !cur.eat(']') {
        loop {
            rows.push(ring_row::<R>(&mut cur, ring)?);
            if cur.eat(']') {
                break;
            }
            cur.expect(',')?;
        }
    }
    cur.finish()?;
    RingMatrix::from_rows(ring, rows).map_err(|e| cur.error_at(0, e.to_string()))
}

/// A row vector of polynomials, `[1, T]`.
pub fn parse_ring_vector<R: GroupRingElement>(
    src: &str,
    ring: R::Ring,
) -> Result<Vec<R>, ParseError> {
    let mut cur = Cursor::new(src);
    let row = ring_row::<R>(&mut cur, ring)?;
    cur.finish()?;
    Ok(row)
}

fn ring_row<R: GroupRingElement>(
    cur: &mut Cursor<'_>,
    ring: R::Ring,
) -> Result<Vec<R>, ParseError> {
    cur.expect('[')?;
    let mut out = Vec::new();
    if cur.eat(']') {
        return Ok(out);
    }
    loop {
        out.push(polynomial::<R>(cur, ring)?);
        if cur.eat(']') {
            return Ok(out);
        }
        cur.expect(',')?;
    }
}

/// Ring elements that have a JSON form representation.
pub trait RingLiteral: GroupRingElement {
    fn from_json(json: FormJson) -> Result<RingMatrix<Self>, String>;
    fn to_json(m: &RingMatrix<Self>) -> FormJson;
}

impl RingLiteral for spherecalc::groupring::GroupRingElem {
    fn from_json(json: FormJson) -> Result<RingMatrix<Self>, String> {
        json.into_cyclic().map_err(|e| e.to_string())
    }

    fn to_json(m: &RingMatrix<Self>) -> FormJson {
        FormJson::from(m)
    }
}

impl RingLiteral for spherecalc::groupring::LaurentElem {
    fn from_json(json: FormJson) -> Result<RingMatrix<Self>, String> {
        json.into_laurent().map_err(|e| e.to_string())
    }

    fn to_json(m: &RingMatrix<Self>) -> FormJson {
        FormJson::from(m)
    }
}
