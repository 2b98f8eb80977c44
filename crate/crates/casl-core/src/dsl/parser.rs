//! Recursive-descent parser for workspace documents.
//!
//! Recovery is per declaration: a malformed declaration is reported and
//! skipped, and parsing resumes at the next top-level keyword, so one bad
//! block does not hide diagnostics in the blocks after it. Fields inside a
//! block may appear in any order; each is allowed once, and repeatable items
//! (`variable`, `cluster`, `resume`) keep their declaration order.

use num_bigint::BigInt;

use crate::rational::Rational;

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};
use super::{Diagnostic, Severity, SourceSpan};

const DECL_KEYWORDS: [&str; 6] = [
    "model",
    "alignment",
    "population",
    "projection",
    "audit",
    "normcompare",
];

/// Parse a document, returning every complete declaration plus diagnostics
/// for everything that went wrong. The document is trustworthy only when no
/// diagnostic has [`Severity::Error`].
pub fn parse(text: &str) -> (Document, Vec<Diagnostic>) {
    let (tokens, mut diagnostics) = lex(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diagnostics: Vec::new(),
    };
    let document = parser.document();
    diagnostics.append(&mut parser.diagnostics);
    diagnostics.sort_by_key(|d| (d.span.line, d.span.column));
    (document, diagnostics)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
}

/// Sentinel for "already reported"; the diagnostic holds the details.
type Parsed<T> = Result<T, ()>;

impl Parser {
    // ── Token plumbing ───────────────────────────────────────────────────

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let token = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        token
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        });
    }

    fn expected(&mut self, what: &str) {
        let token = self.peek().clone();
        let found = token.kind.describe();
        self.error(token.span, format!("expected {what}, found {found}"));
    }

    fn expect_punct(&mut self, kind: TokenKind, what: &str) -> Parsed<()> {
        if self.peek().kind == kind {
            self.bump();
            Ok(())
        } else {
            self.expected(what);
            Err(())
        }
    }

    /// An identifier in name position (declarations, variables, fields).
    fn expect_name(&mut self, what: &str) -> Parsed<Name> {
        match &self.peek().kind {
            TokenKind::Ident(text) => {
                let name = Spanned::new(text.clone(), self.peek().span);
                self.bump();
                Ok(name)
            }
            _ => {
                self.expected(what);
                Err(())
            }
        }
    }

    /// A value label: an identifier or a bare integer such as a draw index.
    fn expect_value(&mut self, what: &str) -> Parsed<Name> {
        match &self.peek().kind {
            TokenKind::Ident(text) | TokenKind::Integer(text) => {
                let name = Spanned::new(text.clone(), self.peek().span);
                self.bump();
                Ok(name)
            }
            _ => {
                self.expected(what);
                Err(())
            }
        }
    }

    fn at_value(&self) -> bool {
        matches!(
            self.peek().kind,
            TokenKind::Ident(_) | TokenKind::Integer(_)
        )
    }

    fn skip_comma(&mut self) {
        if self.peek().kind == TokenKind::Comma {
            self.bump();
        }
    }

    /// `int`, `int/int`, or an exact decimal like `0.25`.
    fn expect_rational(&mut self) -> Parsed<Spanned<Rational>> {
        let token = self.peek().clone();
        match token.kind {
            TokenKind::Integer(digits) => {
                self.bump();
                let numerator: BigInt = digits.parse().expect("lexer emits digits");
                if self.peek().kind == TokenKind::Slash {
                    self.bump();
                    let denom_token = self.peek().clone();
                    if let TokenKind::Integer(denom_digits) = denom_token.kind {
                        self.bump();
                        let denominator: BigInt =
                            denom_digits.parse().expect("lexer emits digits");
                        if denominator == BigInt::from(0) {
                            self.error(denom_token.span, "denominator must not be zero");
                            return Err(());
                        }
                        Ok(Spanned::new(
                            Rational::new(numerator, denominator),
                            token.span,
                        ))
                    } else {
                        self.expected("a denominator");
                        Err(())
                    }
                } else {
                    Ok(Spanned::new(Rational::from_integer(numerator), token.span))
                }
            }
            TokenKind::Decimal(digits) => {
                self.bump();
                let (whole, frac) = digits.split_once('.').expect("lexer emits the dot");
                let scale = frac
                    .chars()
                    .fold(BigInt::from(1), |acc, _| acc * BigInt::from(10));
                let whole: BigInt = whole.parse().expect("lexer emits digits");
                let frac: BigInt = frac.parse().expect("lexer emits digits");
                Ok(Spanned::new(
                    Rational::new(whole * &scale + frac, scale),
                    token.span,
                ))
            }
            _ => {
                self.expected("a probability");
                Err(())
            }
        }
    }

    /// Skip to the next top-level declaration keyword outside any braces.
    fn recover(&mut self) {
        let mut depth = 0usize;
        while !self.at_eof() {
            match &self.peek().kind {
                TokenKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::RBrace => {
                    depth = depth.saturating_sub(1);
                    self.bump();
                }
                TokenKind::Ident(text)
                    if depth == 0 && DECL_KEYWORDS.contains(&text.as_str()) =>
                {
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    // ── Documents and declarations ───────────────────────────────────────

    fn document(&mut self) -> Document {
        let mut decls = Vec::new();
        while !self.at_eof() {
            let token = self.peek().clone();
            let keyword = match &token.kind {
                TokenKind::Ident(text) if DECL_KEYWORDS.contains(&text.as_str()) => text.clone(),
                _ => {
                    self.expected(
                        "a declaration (`model`, `alignment`, `population`, `projection`, \
                         `audit`, or `normcompare`)",
                    );
                    self.bump();
                    self.recover();
                    continue;
                }
            };
            self.bump();
            let result = match keyword.as_str() {
                "model" => self.model_decl().map(Decl::Model),
                "alignment" => self.alignment_decl().map(Decl::Alignment),
                "population" => self.population_decl().map(Decl::Population),
                "projection" => self.projection_decl().map(Decl::Projection),
                "audit" => self.audit_decl().map(Decl::Audit),
                _ => self.normcompare_decl().map(Decl::NormCompare),
            };
            match result {
                Ok(decl) => decls.push(decl),
                Err(()) => self.recover(),
            }
        }
        Document { decls }
    }

    // ── Models ───────────────────────────────────────────────────────────

    fn model_decl(&mut self) -> Parsed<ModelDecl> {
        let name = self.expect_name("a model name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut items = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(text) if text == "exogenous" => {
                    self.bump();
                    items.push(ModelItem::Exogenous(self.exogenous_decl()?));
                }
                TokenKind::Ident(text) if text == "variable" => {
                    self.bump();
                    items.push(ModelItem::Variable(self.variable_decl()?));
                }
                _ => {
                    self.expected("`exogenous`, `variable`, or `}`");
                    return Err(());
                }
            }
        }
        Ok(ModelDecl { name, items })
    }

    fn exogenous_decl(&mut self) -> Parsed<ExogenousDecl> {
        let name = self.expect_name("an exogenous variable name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut weights = Vec::new();
        while self.at_value() {
            let value = self.expect_value("a value")?;
            self.expect_punct(TokenKind::Colon, "`:`")?;
            let weight = self.expect_rational()?;
            weights.push((value, weight));
            self.skip_comma();
        }
        self.expect_punct(TokenKind::RBrace, "a weight entry or `}`")?;
        Ok(ExogenousDecl { name, weights })
    }

    fn variable_decl(&mut self) -> Parsed<VariableDecl> {
        let name = self.expect_name("a variable name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut domain: Option<Vec<Name>> = None;
        let mut parents: Option<Vec<Name>> = None;
        let mut table: Option<Vec<TableRow>> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "domain" => {
                            self.check_once(domain.is_some(), &field, token.span);
                            domain = Some(self.value_list()?);
                        }
                        "parents" => {
                            self.check_once(parents.is_some(), &field, token.span);
                            parents = Some(self.name_list()?);
                        }
                        "table" => {
                            self.check_once(table.is_some(), &field, token.span);
                            table = Some(self.row_list()?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in a variable block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected("`domain`, `parents`, `table`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if domain.is_none() {
            self.missing(&name, "variable", "domain");
            complete = false;
        }
        if table.is_none() {
            self.missing(&name, "variable", "table");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(VariableDecl {
            name,
            domain: domain.expect("checked above"),
            parents: parents.unwrap_or_default(),
            table: table.expect("checked above"),
        })
    }

    // ── Alignments ───────────────────────────────────────────────────────

    fn alignment_decl(&mut self) -> Parsed<AlignmentDecl> {
        let name = self.expect_name("an alignment name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut low: Option<Name> = None;
        let mut high: Option<Name> = None;
        let mut clusters = Vec::new();
        let mut dropped: Option<Vec<Name>> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "low" => {
                            self.check_once(low.is_some(), &field, token.span);
                            low = Some(self.expect_name("a model name")?);
                        }
                        "high" => {
                            self.check_once(high.is_some(), &field, token.span);
                            high = Some(self.expect_name("a model name")?);
                        }
                        "cluster" => clusters.push(self.cluster_decl()?),
                        "drop" => {
                            self.check_once(dropped.is_some(), &field, token.span);
                            dropped = Some(self.name_list()?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in an alignment block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected("`low`, `high`, `cluster`, `drop`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if low.is_none() {
            self.missing(&name, "alignment", "low");
            complete = false;
        }
        if high.is_none() {
            self.missing(&name, "alignment", "high");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(AlignmentDecl {
            name,
            low: low.expect("checked above"),
            high: high.expect("checked above"),
            clusters,
            dropped: dropped.unwrap_or_default(),
        })
    }

    fn cluster_decl(&mut self) -> Parsed<ClusterDecl> {
        let high_var = self.expect_name("a high variable name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut over: Option<Vec<Name>> = None;
        let mut map: Option<Vec<TableRow>> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "over" => {
                            self.check_once(over.is_some(), &field, token.span);
                            over = Some(self.name_list()?);
                        }
                        "map" => {
                            self.check_once(map.is_some(), &field, token.span);
                            map = Some(self.row_list()?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in a cluster block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected("`over`, `map`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if over.is_none() {
            self.missing(&high_var, "cluster", "over");
            complete = false;
        }
        if map.is_none() {
            self.missing(&high_var, "cluster", "map");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(ClusterDecl {
            high_var,
            over: over.expect("checked above"),
            map: map.expect("checked above"),
        })
    }

    // ── Audit-study declarations ─────────────────────────────────────────

    fn population_decl(&mut self) -> Parsed<PopulationDecl> {
        let name = self.expect_name("a population name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut model: Option<Name> = None;
        let mut outcome: Option<Name> = None;
        let mut positive: Option<Name> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "model" => {
                            self.check_once(model.is_some(), &field, token.span);
                            model = Some(self.expect_name("a model name")?);
                        }
                        "outcome" => {
                            self.check_once(outcome.is_some(), &field, token.span);
                            outcome = Some(self.expect_name("a variable name")?);
                        }
                        "positive" => {
                            self.check_once(positive.is_some(), &field, token.span);
                            positive = Some(self.expect_value("a value")?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in a population block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected("`model`, `outcome`, `positive`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if model.is_none() {
            self.missing(&name, "population", "model");
            complete = false;
        }
        if outcome.is_none() {
            self.missing(&name, "population", "outcome");
            complete = false;
        }
        if positive.is_none() {
            self.missing(&name, "population", "positive");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(PopulationDecl {
            name,
            model: model.expect("checked above"),
            outcome: outcome.expect("checked above"),
            positive: positive.expect("checked above"),
        })
    }

    fn projection_decl(&mut self) -> Parsed<ProjectionDecl> {
        let name = self.expect_name("a projection name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut population: Option<Name> = None;
        let mut keep: Option<Vec<Name>> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "population" => {
                            self.check_once(population.is_some(), &field, token.span);
                            population = Some(self.expect_name("a population name")?);
                        }
                        "keep" => {
                            self.check_once(keep.is_some(), &field, token.span);
                            keep = Some(self.name_list()?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in a projection block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected("`population`, `keep`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if population.is_none() {
            self.missing(&name, "projection", "population");
            complete = false;
        }
        if keep.is_none() {
            self.missing(&name, "projection", "keep");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(ProjectionDecl {
            name,
            population: population.expect("checked above"),
            keep: keep.expect("checked above"),
        })
    }

    fn audit_decl(&mut self) -> Parsed<AuditDecl> {
        let name = self.expect_name("an audit name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut population: Option<Name> = None;
        let mut projection: Option<Name> = None;
        let mut construction: Option<Name> = None;
        let mut protected: Option<Name> = None;
        let mut resumes = Vec::new();
        let mut aggregator: Option<Name> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "population" => {
                            self.check_once(population.is_some(), &field, token.span);
                            population = Some(self.expect_name("a population name")?);
                        }
                        "projection" => {
                            self.check_once(projection.is_some(), &field, token.span);
                            projection = Some(self.expect_name("a projection name")?);
                        }
                        "construction" => {
                            self.check_once(construction.is_some(), &field, token.span);
                            construction = Some(self.expect_name("an alignment name")?);
                        }
                        "protected" => {
                            self.check_once(protected.is_some(), &field, token.span);
                            protected = Some(self.expect_name("a high variable name")?);
                        }
                        "resume" => resumes.push(self.resume_decl()?),
                        "aggregator" => {
                            self.check_once(aggregator.is_some(), &field, token.span);
                            aggregator = Some(self.expect_name("an aggregator name")?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in an audit block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected(
                        "`population`, `projection`, `construction`, `protected`, `resume`, \
                         `aggregator`, or `}`",
                    );
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if population.is_none() {
            self.missing(&name, "audit", "population");
            complete = false;
        }
        if projection.is_none() {
            self.missing(&name, "audit", "projection");
            complete = false;
        }
        if construction.is_none() {
            self.missing(&name, "audit", "construction");
            complete = false;
        }
        if resumes.len() != 2 {
            self.error(
                name.span,
                format!(
                    "audit `{}` needs exactly two `resume` blocks, found {}",
                    name.node,
                    resumes.len()
                ),
            );
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok(AuditDecl {
            name,
            population: population.expect("checked above"),
            projection: projection.expect("checked above"),
            construction: construction.expect("checked above"),
            protected,
            resumes,
            aggregator,
        })
    }

    fn resume_decl(&mut self) -> Parsed<ResumeDecl> {
        let label = self.expect_name("a resume label")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut fields = Vec::new();
        while self.at_value() {
            let var = self.expect_name("a variable name")?;
            self.expect_punct(TokenKind::Colon, "`:`")?;
            let value = self.expect_value("a value")?;
            fields.push((var, value));
            self.skip_comma();
        }
        self.expect_punct(TokenKind::RBrace, "a field or `}`")?;
        Ok(ResumeDecl { label, fields })
    }

    // ── Construction contrasts ───────────────────────────────────────────

    fn normcompare_decl(&mut self) -> Parsed<NormCompareDecl> {
        let name = self.expect_name("a comparison name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut factual: Option<Name> = None;
        let mut counterfactual: Option<Name> = None;
        let mut contrast: Option<(Name, Name, Name)> = None;
        let mut outcome: Option<Name> = None;
        let mut positive: Option<Name> = None;
        let mut aggregator: Option<Name> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) => {
                    let field = field.clone();
                    self.bump();
                    match field.as_str() {
                        "factual" => {
                            self.check_once(factual.is_some(), &field, token.span);
                            factual = Some(self.expect_name("an alignment name")?);
                        }
                        "counterfactual" => {
                            self.check_once(counterfactual.is_some(), &field, token.span);
                            counterfactual = Some(self.expect_name("an alignment name")?);
                        }
                        "contrast" => {
                            self.check_once(contrast.is_some(), &field, token.span);
                            contrast = Some(self.contrast_decl()?);
                        }
                        "outcome" => {
                            self.check_once(outcome.is_some(), &field, token.span);
                            outcome = Some(self.expect_name("a high variable name")?);
                        }
                        "positive" => {
                            self.check_once(positive.is_some(), &field, token.span);
                            positive = Some(self.expect_value("a value")?);
                        }
                        "aggregator" => {
                            self.check_once(aggregator.is_some(), &field, token.span);
                            aggregator = Some(self.expect_name("an aggregator name")?);
                        }
                        _ => {
                            self.error(
                                token.span,
                                format!("unknown field `{field}` in a normcompare block"),
                            );
                            return Err(());
                        }
                    }
                }
                _ => {
                    self.expected(
                        "`factual`, `counterfactual`, `contrast`, `outcome`, `positive`, \
                         `aggregator`, or `}`",
                    );
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if factual.is_none() {
            self.missing(&name, "normcompare", "factual");
            complete = false;
        }
        if counterfactual.is_none() {
            self.missing(&name, "normcompare", "counterfactual");
            complete = false;
        }
        if contrast.is_none() {
            self.missing(&name, "normcompare", "contrast");
            complete = false;
        }
        if outcome.is_none() {
            self.missing(&name, "normcompare", "outcome");
            complete = false;
        }
        if positive.is_none() {
            self.missing(&name, "normcompare", "positive");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        let (contrast, from, to) = contrast.expect("checked above");
        Ok(NormCompareDecl {
            name,
            factual: factual.expect("checked above"),
            counterfactual: counterfactual.expect("checked above"),
            contrast,
            from,
            to,
            outcome: outcome.expect("checked above"),
            positive: positive.expect("checked above"),
            aggregator,
        })
    }

    fn contrast_decl(&mut self) -> Parsed<(Name, Name, Name)> {
        let variable = self.expect_name("a high variable name")?;
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut from: Option<Name> = None;
        let mut to: Option<Name> = None;
        loop {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Ident(field) if field == "from" || field == "to" => {
                    let field = field.clone();
                    self.bump();
                    self.expect_punct(TokenKind::Colon, "`:`")?;
                    let value = self.expect_value("a value")?;
                    if field == "from" {
                        self.check_once(from.is_some(), &field, token.span);
                        from = Some(value);
                    } else {
                        self.check_once(to.is_some(), &field, token.span);
                        to = Some(value);
                    }
                    self.skip_comma();
                }
                _ => {
                    self.expected("`from`, `to`, or `}`");
                    return Err(());
                }
            }
        }
        let mut complete = true;
        if from.is_none() {
            self.missing(&variable, "contrast", "from");
            complete = false;
        }
        if to.is_none() {
            self.missing(&variable, "contrast", "to");
            complete = false;
        }
        if !complete {
            return Err(());
        }
        Ok((
            variable,
            from.expect("checked above"),
            to.expect("checked above"),
        ))
    }

    // ── Shared list shapes ───────────────────────────────────────────────

    /// `{ Name, Name, ... }` with optional commas.
    fn name_list(&mut self) -> Parsed<Vec<Name>> {
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut names = Vec::new();
        while matches!(self.peek().kind, TokenKind::Ident(_)) {
            names.push(self.expect_name("a name")?);
            self.skip_comma();
        }
        self.expect_punct(TokenKind::RBrace, "a name or `}`")?;
        Ok(names)
    }

    /// `{ value, value, ... }` where values may be bare integers.
    fn value_list(&mut self) -> Parsed<Vec<Name>> {
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut values = Vec::new();
        while self.at_value() {
            values.push(self.expect_value("a value")?);
            self.skip_comma();
        }
        self.expect_punct(TokenKind::RBrace, "a value or `}`")?;
        Ok(values)
    }

    /// `{ (k, k) -> v ... }` rows for tables and value maps.
    fn row_list(&mut self) -> Parsed<Vec<TableRow>> {
        self.expect_punct(TokenKind::LBrace, "`{`")?;
        let mut rows = Vec::new();
        while self.peek().kind == TokenKind::LParen {
            self.bump();
            let mut key = Vec::new();
            while self.at_value() {
                key.push(self.expect_value("a value")?);
                self.skip_comma();
            }
            self.expect_punct(TokenKind::RParen, "a value or `)`")?;
            self.expect_punct(TokenKind::Arrow, "`->`")?;
            let value = self.expect_value("a value")?;
            rows.push(TableRow { key, value });
            self.skip_comma();
        }
        self.expect_punct(TokenKind::RBrace, "a row or `}`")?;
        Ok(rows)
    }

    // ── Field bookkeeping ────────────────────────────────────────────────

    fn check_once(&mut self, already: bool, field: &str, span: SourceSpan) {
        if already {
            self.error(span, format!("field `{field}` appears more than once"));
        }
    }

    fn missing(&mut self, owner: &Name, block: &str, field: &str) {
        self.error(
            owner.span,
            format!("{block} `{}` is missing its `{field}` field", owner.node),
        );
    }
}
